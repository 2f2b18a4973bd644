//! Edge-labeled sharing graphs.
//!
//! Vertices are tenants; an edge labeled with variant `V` means the two
//! endpoints may share an instance of `V` (relationship graph) or must not
//! (conflict graph, the per-variant complement of the former). Labels are
//! stored as bit masks over the component's variant order, which caps a
//! component at 64 variants — the same limit bundle validation enforces.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{RvcId, TenantId, TenantRegistry, TenantSet, VariantId};
use crate::translate::VariantRequirementTable;

/// Bit mask over a graph's variant order.
pub type VariantMask = u64;

/// Undirected edge-labeled graph over the tenants that use at least one
/// variant of one component.
///
/// Vertices keep registry declaration order; unordered edges are keyed by
/// `(low, high)` vertex index. Both are canonical, so identical inputs
/// produce identical graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    rvc: RvcId,
    vertices: Vec<TenantId>,
    variants: Vec<VariantId>,
    /// Per variant: participating vertices.
    participants: Vec<TenantSet>,
    /// Non-empty label masks keyed by unordered vertex pair.
    edges: HashMap<(usize, usize), VariantMask>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on {0}")]
    SelfLoop(TenantId),
    #[error("unknown vertex {0}")]
    UnknownVertex(TenantId),
    #[error("unknown variant {0}")]
    UnknownVariant(VariantId),
    #[error("edge {a}--{b} labeled {variant} but {tenant} does not participate in {variant}")]
    NonParticipant {
        a: TenantId,
        b: TenantId,
        variant: VariantId,
        tenant: TenantId,
    },
    #[error("edge {0}--{1} carries no label")]
    EmptyLabel(TenantId, TenantId),
    #[error("{0} variants exceed the supported maximum of 64")]
    TooManyVariants(usize),
}

impl LabeledGraph {
    /// Builds a graph from explicit parts, checking every structural
    /// invariant. Fixtures and property tests construct graphs this way;
    /// the planning pipeline goes through [`build_relationship_graph`].
    pub fn from_parts(
        rvc: impl Into<RvcId>,
        vertices: Vec<TenantId>,
        variants: Vec<VariantId>,
        participants: BTreeMap<VariantId, BTreeSet<TenantId>>,
        edges: Vec<(TenantId, TenantId, BTreeSet<VariantId>)>,
    ) -> Result<Self, GraphError> {
        if variants.len() > 64 {
            return Err(GraphError::TooManyVariants(variants.len()));
        }
        let vertex_pos: HashMap<&TenantId, usize> =
            vertices.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let variant_pos: HashMap<&VariantId, usize> =
            variants.iter().enumerate().map(|(i, v)| (v, i)).collect();

        let mut participant_sets = vec![TenantSet::empty(vertices.len()); variants.len()];
        for (variant, tenants) in &participants {
            let &v = variant_pos
                .get(variant)
                .ok_or_else(|| GraphError::UnknownVariant(variant.clone()))?;
            for tenant in tenants {
                let &i = vertex_pos
                    .get(tenant)
                    .ok_or_else(|| GraphError::UnknownVertex(tenant.clone()))?;
                participant_sets[v].insert(i);
            }
        }

        let mut edge_map: HashMap<(usize, usize), VariantMask> = HashMap::new();
        for (a, b, labels) in &edges {
            if a == b {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if labels.is_empty() {
                return Err(GraphError::EmptyLabel(a.clone(), b.clone()));
            }
            let &i = vertex_pos
                .get(a)
                .ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let &j = vertex_pos
                .get(b)
                .ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            let mut mask = 0;
            for label in labels {
                let &v = variant_pos
                    .get(label)
                    .ok_or_else(|| GraphError::UnknownVariant(label.clone()))?;
                for (tenant, pos) in [(a, i), (b, j)] {
                    if !participant_sets[v].contains(pos) {
                        return Err(GraphError::NonParticipant {
                            a: a.clone(),
                            b: b.clone(),
                            variant: label.clone(),
                            tenant: tenant.clone(),
                        });
                    }
                }
                mask |= 1 << v;
            }
            *edge_map.entry(pair_key(i, j)).or_insert(0) |= mask;
        }

        Ok(Self {
            rvc: rvc.into(),
            vertices,
            variants,
            participants: participant_sets,
            edges: edge_map,
        })
    }

    pub fn rvc(&self) -> &RvcId {
        &self.rvc
    }

    pub fn vertices(&self) -> &[TenantId] {
        &self.vertices
    }

    pub fn variants(&self) -> &[VariantId] {
        &self.variants
    }

    pub fn vertex_position(&self, tenant: &TenantId) -> Option<usize> {
        self.vertices.iter().position(|t| t == tenant)
    }

    pub fn variant_position(&self, variant: &VariantId) -> Option<usize> {
        self.variants.iter().position(|v| v == variant)
    }

    /// Participating vertices of one variant.
    pub fn participants(&self, variant: usize) -> &TenantSet {
        &self.participants[variant]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_mask(&self, a: usize, b: usize) -> VariantMask {
        if a == b {
            return 0;
        }
        self.edges.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    pub fn has_label(&self, a: usize, b: usize, variant: usize) -> bool {
        self.edge_mask(a, b) & (1 << variant) != 0
    }

    /// Edges with their label masks, sorted by vertex pair.
    pub fn edges_sorted(&self) -> Vec<((usize, usize), VariantMask)> {
        let mut edges: Vec<_> = self.edges.iter().map(|(&k, &m)| (k, m)).collect();
        edges.sort_unstable();
        edges
    }

    /// Variant ids named by a label mask, in variant order.
    pub fn mask_labels(&self, mask: VariantMask) -> Vec<&VariantId> {
        self.variants
            .iter()
            .enumerate()
            .filter(|(v, _)| mask & (1 << v) != 0)
            .map(|(_, id)| id)
            .collect()
    }

    /// The labels an edge between `a` and `b` would carry if the pair shared
    /// every variant both participate in.
    pub fn shared_participation_mask(&self, a: usize, b: usize) -> VariantMask {
        let mut mask = 0;
        for v in 0..self.variants.len() {
            if self.participants[v].contains(a) && self.participants[v].contains(b) {
                mask |= 1 << v;
            }
        }
        mask
    }

    /// Per-variant adjacency: `adjacency[v][i]` is the set of vertices with
    /// a `v`-labeled edge to `i`. Built once and handed to the coloring
    /// passes, which probe it heavily.
    pub fn per_variant_adjacency(&self) -> Vec<Vec<TenantSet>> {
        let n = self.vertices.len();
        let mut adjacency = vec![vec![TenantSet::empty(n); n]; self.variants.len()];
        for (&(i, j), &mask) in &self.edges {
            let mut rest = mask;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                adjacency[v][i].insert(j);
                adjacency[v][j].insert(i);
            }
        }
        adjacency
    }
}

fn pair_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Extracts the sharing-relationship graph of one component from its
/// requirement table.
///
/// For each variant `V` and each pair of tenants using `V`, the edge carries
/// label `V` exactly when the permission is mutual: each tenant appears in
/// the other's allowed set. One-sided permission yields no edge, which is
/// what makes a declared `DSW` enforceable.
pub fn build_relationship_graph(
    table: &VariantRequirementTable,
    registry: &TenantRegistry,
) -> LabeledGraph {
    let tenant_positions = table.participating_tenants();
    let vertices: Vec<TenantId> = tenant_positions
        .iter()
        .map(|&p| registry.id(p).clone())
        .collect();
    let variants = table.variants().to_vec();

    let mut participants = vec![TenantSet::empty(vertices.len()); variants.len()];
    for (vertex, &registry_pos) in tenant_positions.iter().enumerate() {
        for (v, members) in participants.iter_mut().enumerate() {
            if table.participants(v).contains(registry_pos) {
                members.insert(vertex);
            }
        }
    }

    let mut edges: HashMap<(usize, usize), VariantMask> = HashMap::new();
    for (v, variant_members) in participants.iter().enumerate() {
        // Hoist the cell lookups out of the pair loop; it runs over every
        // pair of the variant's participants.
        let members: Vec<(usize, usize, &TenantSet)> = variant_members
            .iter()
            .map(|vertex| {
                let registry_pos = tenant_positions[vertex];
                let allowed = table
                    .cell_at(registry_pos, v)
                    .expect("participant has a cell")
                    .allowed();
                (vertex, registry_pos, allowed)
            })
            .collect();
        for (a_pos, &(a, a_registry, a_allowed)) in members.iter().enumerate() {
            for &(b, b_registry, b_allowed) in &members[a_pos + 1..] {
                if a_allowed.contains(b_registry) && b_allowed.contains(a_registry) {
                    *edges.entry((a, b)).or_insert(0) |= 1 << v;
                }
            }
        }
    }

    LabeledGraph {
        rvc: table.rvc.clone(),
        vertices,
        variants,
        participants,
        edges,
    }
}

/// Per-variant complement: over each variant's participants, pairs swap
/// between edge and non-edge; vertices and participation are unchanged.
/// Applied to a relationship graph this yields the conflict graph, and it is
/// an involution.
pub fn complement(graph: &LabeledGraph) -> LabeledGraph {
    let n = graph.vertices.len();
    // Per-vertex participation masks make the complement of one pair a
    // couple of word operations; the scan is a single pass over all pairs.
    let mut participation = vec![0u64; n];
    for (v, members) in graph.participants.iter().enumerate() {
        for vertex in members.iter() {
            participation[vertex] |= 1 << v;
        }
    }
    let mut edges: HashMap<(usize, usize), VariantMask> = HashMap::new();
    for i in 0..n {
        if participation[i] == 0 {
            continue;
        }
        for j in (i + 1)..n {
            let shared = participation[i] & participation[j];
            if shared == 0 {
                continue;
            }
            let flipped = shared & !graph.edge_mask(i, j);
            if flipped != 0 {
                edges.insert((i, j), flipped);
            }
        }
    }
    LabeledGraph {
        rvc: graph.rvc.clone(),
        vertices: graph.vertices.clone(),
        variants: graph.variants.clone(),
        participants: graph.participants.clone(),
        edges,
    }
}
