//! Instance assignment by conflict-graph coloring.
//!
//! Each color class is one deployed component instance; a (tenant, variant)
//! usage colored into a class means that instance serves that variant to
//! that tenant. Two colorings are provided:
//!
//! * [`greedy_color`] — first-fit over tenants in canonical order with one
//!   color pool spanning all variants: an instance may serve different
//!   variants to different tenants. A usage joins the lowest class whose
//!   tenants it has no conflict edge with *along its own variant*.
//! * [`per_variant_color`] — first-fit run independently per variant, so an
//!   instance serves exactly one variant.
//!
//! [`exact_min_color`] finds a provably minimal coloring for either mode and
//! is used to audit how far greedy lands from the optimum; first-fit alone
//! does not guarantee minimality. [`check_validity`] re-verifies any
//! coloring against the conflict graph.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::model::{RvcId, TenantId, TenantSet, VariantId};

/// Instance-sharing semantics of a coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One color pool across variants; an instance may serve several
    /// variants.
    SharedPool,
    /// Colors namespaced per variant; an instance serves one variant.
    PerVariant,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::SharedPool => "shared-pool",
            Mode::PerVariant => "per-variant",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shared-pool" => Ok(Mode::SharedPool),
            "per-variant" => Ok(Mode::PerVariant),
            other => Err(format!(
                "unknown mode {other:?} (expected shared-pool or per-variant)"
            )),
        }
    }
}

/// One instance: the usages assigned to it, as (vertex, variant) positions
/// into the coloring's vertex/variant lists, in tenant-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorClass {
    /// 1-based instance number.
    pub index: usize,
    pub members: Vec<(usize, usize)>,
}

/// A complete instance assignment for one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RvcColoring {
    pub rvc: RvcId,
    pub mode: Mode,
    /// Participating tenants, same order as the conflict graph's vertices.
    pub vertices: Vec<TenantId>,
    pub variants: Vec<VariantId>,
    pub classes: Vec<ColorClass>,
    /// (vertex, variant) -> 1-based class index; covers exactly the cells of
    /// the component's requirement table.
    pub assignment: BTreeMap<(usize, usize), usize>,
}

impl RvcColoring {
    /// Number of instances used.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, vertex: usize, variant: usize) -> Option<usize> {
        self.assignment.get(&(vertex, variant)).copied()
    }

    pub fn tenant(&self, vertex: usize) -> &TenantId {
        &self.vertices[vertex]
    }

    pub fn variant(&self, variant: usize) -> &VariantId {
        &self.variants[variant]
    }
}

struct ClassState {
    tenants: TenantSet,
    members: Vec<(usize, usize)>,
}

impl ClassState {
    fn new(universe: usize) -> Self {
        Self {
            tenants: TenantSet::empty(universe),
            members: Vec::new(),
        }
    }

    fn admit(&mut self, vertex: usize, variant: usize) {
        self.tenants.insert(vertex);
        self.members.push((vertex, variant));
    }
}

fn coloring_from_classes(
    conflict: &LabeledGraph,
    mode: Mode,
    classes: Vec<ClassState>,
) -> RvcColoring {
    let mut assignment = BTreeMap::new();
    let classes: Vec<ColorClass> = classes
        .into_iter()
        .enumerate()
        .map(|(k, state)| {
            for &cell in &state.members {
                assignment.insert(cell, k + 1);
            }
            ColorClass {
                index: k + 1,
                members: state.members,
            }
        })
        .collect();
    RvcColoring {
        rvc: conflict.rvc().clone(),
        mode,
        vertices: conflict.vertices().to_vec(),
        variants: conflict.variants().to_vec(),
        classes,
        assignment,
    }
}

/// First-fit coloring with a single color pool across variants.
///
/// Tenants are visited in canonical order, variants in declared order. The
/// first tenant takes class 1 for all its variants; each later usage
/// `(T, V)` joins the lowest class none of whose tenants has a `V`-labeled
/// conflict edge to `T` — regardless of which variant those tenants joined
/// for — and opens a new class when every existing one is blocked. The
/// output is fully determined by the input orders.
pub fn greedy_color(conflict: &LabeledGraph) -> RvcColoring {
    let n = conflict.vertices().len();
    let adjacency = conflict.per_variant_adjacency();
    let mut classes: Vec<ClassState> = Vec::new();

    for vertex in 0..n {
        for (variant, rows) in adjacency.iter().enumerate() {
            if !conflict.participants(variant).contains(vertex) {
                continue;
            }
            let neighbors = &rows[vertex];
            let slot = classes
                .iter()
                .position(|class| !neighbors.intersects(&class.tenants));
            let k = slot.unwrap_or_else(|| {
                classes.push(ClassState::new(n));
                classes.len() - 1
            });
            classes[k].admit(vertex, variant);
        }
    }

    coloring_from_classes(conflict, Mode::SharedPool, classes)
}

/// First-fit coloring run independently per variant over the variant's
/// participant subgraph. Classes are appended variant by variant, so the
/// total instance count is the sum of the per-variant color counts.
pub fn per_variant_color(conflict: &LabeledGraph) -> RvcColoring {
    let n = conflict.vertices().len();
    let adjacency = conflict.per_variant_adjacency();
    let mut classes: Vec<ClassState> = Vec::new();

    for (variant, rows) in adjacency.iter().enumerate() {
        let offset = classes.len();
        for vertex in conflict.participants(variant).iter() {
            let neighbors = &rows[vertex];
            let slot = classes[offset..]
                .iter()
                .position(|class| !neighbors.intersects(&class.tenants));
            let k = match slot {
                Some(local) => offset + local,
                None => {
                    classes.push(ClassState::new(n));
                    classes.len() - 1
                }
            };
            classes[k].admit(vertex, variant);
        }
    }

    coloring_from_classes(conflict, Mode::PerVariant, classes)
}

/// The instance was too large for exhaustive search; the caller falls back
/// to the greedy result with an unknown optimality gap.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{participants} participating tenants exceed the exact-solver limit of {limit}")]
pub struct ExactTooLarge {
    pub participants: usize,
    pub limit: usize,
}

/// Exact minimum coloring for the chosen mode's conflict semantics.
///
/// The minimum class count decomposes per variant: classes can be reused
/// across variants in shared-pool mode (the minimum is the largest
/// per-variant chromatic number) and cannot in per-variant mode (the minimum
/// is their sum). Each per-variant chromatic number is established by
/// backtracking search, and the returned assignment is the lexicographically
/// smallest valid one over cells in tenant-major order, which makes ties
/// deterministic.
pub fn exact_min_color(
    conflict: &LabeledGraph,
    mode: Mode,
    limit: usize,
) -> Result<RvcColoring, ExactTooLarge> {
    let n = conflict.vertices().len();
    if n > limit {
        return Err(ExactTooLarge {
            participants: n,
            limit,
        });
    }
    let n_variants = conflict.variants().len();
    let adjacency = conflict.per_variant_adjacency();

    let chi: Vec<usize> = (0..n_variants)
        .map(|v| {
            let members: Vec<usize> = conflict.participants(v).iter().collect();
            chromatic_number(&members, &adjacency[v])
        })
        .collect();
    let minimum = match mode {
        Mode::SharedPool => chi.iter().copied().max().unwrap_or(0),
        Mode::PerVariant => chi.iter().sum(),
    };

    // Cells in canonical tenant-major order.
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for vertex in 0..n {
        for variant in 0..n_variants {
            if conflict.participants(variant).contains(vertex) {
                cells.push((vertex, variant));
            }
        }
    }

    // For each cell, the earlier cells it may not share a class with.
    let earlier_conflicts: Vec<Vec<usize>> = cells
        .iter()
        .enumerate()
        .map(|(c, &cell)| {
            (0..c)
                .filter(|&e| cells_conflict(conflict, mode, cells[e], cell))
                .collect()
        })
        .collect();

    let colors = lex_first_coloring(cells.len(), &earlier_conflicts, minimum);

    let mut classes: Vec<ClassState> = (0..minimum).map(|_| ClassState::new(n)).collect();
    for (c, &(vertex, variant)) in cells.iter().enumerate() {
        classes[colors[c] - 1].admit(vertex, variant);
    }
    debug_assert!(classes.iter().all(|c| !c.members.is_empty()));

    Ok(coloring_from_classes(conflict, mode, classes))
}

/// Whether two cells may not share a class under the mode's semantics.
fn cells_conflict(
    conflict: &LabeledGraph,
    mode: Mode,
    (a, av): (usize, usize),
    (b, bv): (usize, usize),
) -> bool {
    if av != bv {
        // Classes never span variants in per-variant mode; in shared-pool
        // mode adjacency is only tested along a usage's own variant, so
        // cross-variant cells are always compatible.
        return mode == Mode::PerVariant;
    }
    a != b && conflict.has_label(a, b, av)
}

/// Smallest number of colors that properly colors `members` under the given
/// adjacency, by iterative-deepening backtracking.
fn chromatic_number(members: &[usize], adjacency: &[TenantSet]) -> usize {
    if members.is_empty() {
        return 0;
    }
    for k in 1..members.len() {
        if colorable(members, adjacency, k) {
            return k;
        }
    }
    members.len()
}

fn colorable(members: &[usize], adjacency: &[TenantSet], k: usize) -> bool {
    fn go(
        pos: usize,
        members: &[usize],
        adjacency: &[TenantSet],
        k: usize,
        colors: &mut [usize],
        max_used: usize,
    ) -> bool {
        if pos == members.len() {
            return true;
        }
        let neighbors = &adjacency[members[pos]];
        for color in 1..=k.min(max_used + 1) {
            let clash = members[..pos]
                .iter()
                .enumerate()
                .any(|(e, &m)| colors[e] == color && neighbors.contains(m));
            if !clash {
                colors[pos] = color;
                if go(pos + 1, members, adjacency, k, colors, max_used.max(color)) {
                    return true;
                }
            }
        }
        colors[pos] = 0;
        false
    }
    let mut colors = vec![0; members.len()];
    go(0, members, adjacency, k, &mut colors, 0)
}

/// Lexicographically smallest proper coloring with colors `1..=k`, over the
/// solution set that is closed under relabeling; trying colors ascending and
/// capping at one past the maximum used keeps the search canonical.
fn lex_first_coloring(len: usize, earlier_conflicts: &[Vec<usize>], k: usize) -> Vec<usize> {
    fn go(
        idx: usize,
        len: usize,
        earlier_conflicts: &[Vec<usize>],
        k: usize,
        colors: &mut Vec<usize>,
        max_used: usize,
    ) -> bool {
        if idx == len {
            return true;
        }
        for color in 1..=k.min(max_used + 1) {
            if earlier_conflicts[idx].iter().all(|&e| colors[e] != color) {
                colors[idx] = color;
                if go(
                    idx + 1,
                    len,
                    earlier_conflicts,
                    k,
                    colors,
                    max_used.max(color),
                ) {
                    return true;
                }
            }
        }
        colors[idx] = 0;
        false
    }
    let mut colors = vec![0; len];
    if len > 0 {
        let found = go(0, len, earlier_conflicts, k, &mut colors, 0);
        assert!(found, "a coloring with the derived minimum always exists");
    }
    colors
}

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

/// One way a coloring fails to satisfy its conflict graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RvcMismatch {
        coloring: RvcId,
        graph: RvcId,
    },
    /// A required (tenant, variant) usage has no instance.
    MissingAssignment {
        tenant: TenantId,
        variant: VariantId,
    },
    /// An assignment exists for a usage the requirement table does not have.
    UnexpectedAssignment {
        tenant: TenantId,
        variant: VariantId,
    },
    /// Classes and assignment disagree, or indices are out of shape.
    ClassShape {
        class: usize,
        detail: String,
    },
    /// Two same-variant usages in one class are conflict-adjacent.
    Conflict {
        class: usize,
        variant: VariantId,
        a: TenantId,
        b: TenantId,
    },
    /// A per-variant-mode class serves more than one variant.
    MixedVariantClass {
        class: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RvcMismatch { coloring, graph } => {
                write!(f, "coloring is for {coloring} but graph is for {graph}")
            }
            Violation::MissingAssignment { tenant, variant } => {
                write!(f, "usage {tenant}.{variant} has no instance")
            }
            Violation::UnexpectedAssignment { tenant, variant } => {
                write!(f, "assignment for {tenant}.{variant} which is not required")
            }
            Violation::ClassShape { class, detail } => {
                write!(f, "class {class}: {detail}")
            }
            Violation::Conflict {
                class,
                variant,
                a,
                b,
            } => {
                write!(
                    f,
                    "class {class} co-locates {a} and {b} despite a {variant} conflict"
                )
            }
            Violation::MixedVariantClass { class } => {
                write!(f, "class {class} mixes variants in per-variant mode")
            }
        }
    }
}

/// Re-verifies a coloring against its conflict graph.
///
/// Checks assignment coverage (exactly the required cells), that classes are
/// the fibers of the assignment, and the adjacency condition: a usage
/// `(T, V)` must have no `V`-labeled conflict edge to any other tenant
/// serving `V` in the same class. In per-variant mode a class additionally
/// must not span variants. Greedy insertion tests adjacency against every
/// tenant in a class whatever variant it joined for, which is strictly
/// stronger, so both coloring passes satisfy this check by construction.
pub fn check_validity(coloring: &RvcColoring, conflict: &LabeledGraph) -> Vec<Violation> {
    let mut violations = Vec::new();
    if &coloring.rvc != conflict.rvc() {
        violations.push(Violation::RvcMismatch {
            coloring: coloring.rvc.clone(),
            graph: conflict.rvc().clone(),
        });
        return violations;
    }
    let n = conflict.vertices().len();
    let n_variants = conflict.variants().len();

    // Coverage: required cells and assignment keys must coincide.
    for vertex in 0..n {
        for variant in 0..n_variants {
            if conflict.participants(variant).contains(vertex)
                && !coloring.assignment.contains_key(&(vertex, variant))
            {
                violations.push(Violation::MissingAssignment {
                    tenant: conflict.vertices()[vertex].clone(),
                    variant: conflict.variants()[variant].clone(),
                });
            }
        }
    }
    for &(vertex, variant) in coloring.assignment.keys() {
        let required =
            vertex < n && variant < n_variants && conflict.participants(variant).contains(vertex);
        if !required {
            violations.push(Violation::UnexpectedAssignment {
                tenant: coloring
                    .vertices
                    .get(vertex)
                    .cloned()
                    .unwrap_or_else(|| TenantId::new(format!("#{vertex}"))),
                variant: coloring
                    .variants
                    .get(variant)
                    .cloned()
                    .unwrap_or_else(|| VariantId::new(format!("#{variant}"))),
            });
        }
    }

    // Classes are exactly the fibers of the assignment.
    for (pos, class) in coloring.classes.iter().enumerate() {
        let index = pos + 1;
        if class.index != index {
            violations.push(Violation::ClassShape {
                class: index,
                detail: format!("stored index {} does not match position", class.index),
            });
        }
        if class.members.is_empty() {
            violations.push(Violation::ClassShape {
                class: index,
                detail: "class has no members".to_owned(),
            });
        }
        for &cell in &class.members {
            if coloring.assignment.get(&cell) != Some(&index) {
                violations.push(Violation::ClassShape {
                    class: index,
                    detail: format!("member {cell:?} not assigned to this class"),
                });
            }
        }
    }
    for (&cell, &index) in &coloring.assignment {
        let in_class = coloring
            .classes
            .get(index.wrapping_sub(1))
            .is_some_and(|class| class.members.contains(&cell));
        if !in_class {
            violations.push(Violation::ClassShape {
                class: index,
                detail: format!("assignment {cell:?} missing from class member list"),
            });
        }
    }

    // Adjacency condition, per class and per variant.
    for class in &coloring.classes {
        let mut by_variant: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(vertex, variant) in &class.members {
            by_variant.entry(variant).or_default().push(vertex);
        }
        if coloring.mode == Mode::PerVariant && by_variant.len() > 1 {
            violations.push(Violation::MixedVariantClass { class: class.index });
        }
        for (&variant, vertices) in &by_variant {
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    if a != b && conflict.has_label(a, b, variant) {
                        violations.push(Violation::Conflict {
                            class: class.index,
                            variant: conflict.variants()[variant].clone(),
                            a: conflict.vertices()[a].clone(),
                            b: conflict.vertices()[b].clone(),
                        });
                    }
                }
            }
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap as Map, BTreeSet as Set};

    fn graph(
        vertices: &[&str],
        variants: &[&str],
        participants: &[(&str, &[&str])],
        edges: &[(&str, &str, &[&str])],
    ) -> LabeledGraph {
        LabeledGraph::from_parts(
            "R1",
            vertices.iter().map(|t| TenantId::from(*t)).collect(),
            variants.iter().map(|v| VariantId::from(*v)).collect(),
            participants
                .iter()
                .map(|(v, ts)| {
                    (
                        VariantId::from(*v),
                        ts.iter().map(|t| TenantId::from(*t)).collect::<Set<_>>(),
                    )
                })
                .collect::<Map<_, _>>(),
            edges
                .iter()
                .map(|(a, b, labels)| {
                    (
                        TenantId::from(*a),
                        TenantId::from(*b),
                        labels
                            .iter()
                            .map(|v| VariantId::from(*v))
                            .collect::<Set<_>>(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn members_of(coloring: &RvcColoring, class: usize) -> Vec<String> {
        coloring.classes[class]
            .members
            .iter()
            .map(|&(t, v)| format!("{}.{}", coloring.vertices[t], coloring.variants[v]))
            .collect()
    }

    #[test]
    fn empty_conflicts_share_one_instance() {
        let g = graph(
            &["T1", "T2", "T3"],
            &["A"],
            &[("A", &["T1", "T2", "T3"])],
            &[],
        );
        let c = greedy_color(&g);
        assert_eq!(c.class_count(), 1);
        assert_eq!(members_of(&c, 0), ["T1.A", "T2.A", "T3.A"]);
    }

    #[test]
    fn complete_conflict_needs_one_instance_each() {
        let g = graph(
            &["T1", "T2", "T3"],
            &["A"],
            &[("A", &["T1", "T2", "T3"])],
            &[
                ("T1", "T2", &["A"]),
                ("T1", "T3", &["A"]),
                ("T2", "T3", &["A"]),
            ],
        );
        let c = greedy_color(&g);
        assert_eq!(c.class_count(), 3);
        for k in 0..3 {
            assert_eq!(c.classes[k].members.len(), 1);
        }
    }

    // Two tenants over variants {A, B} with a single A-labeled conflict:
    // the first tenant takes class 1 for both variants, the second is pushed
    // to class 2 for A but rejoins class 1 for B.
    #[test]
    fn shared_pool_reuses_instances_across_variants() {
        let g = graph(
            &["T1", "T2"],
            &["A", "B"],
            &[("A", &["T1", "T2"]), ("B", &["T1", "T2"])],
            &[("T1", "T2", &["A"])],
        );
        let c = greedy_color(&g);
        assert_eq!(c.class_count(), 2);
        assert_eq!(members_of(&c, 0), ["T1.A", "T1.B", "T2.B"]);
        assert_eq!(members_of(&c, 1), ["T2.A"]);
        let exact = exact_min_color(&g, Mode::SharedPool, 12).unwrap();
        assert_eq!(exact.class_count(), 2);
    }

    #[test]
    fn path_conflict_two_colors() {
        let g = graph(
            &["T1", "T2", "T3"],
            &["A"],
            &[("A", &["T1", "T2", "T3"])],
            &[("T1", "T2", &["A"]), ("T2", "T3", &["A"])],
        );
        let c = greedy_color(&g);
        assert_eq!(c.class_count(), 2);
        assert_eq!(members_of(&c, 0), ["T1.A", "T3.A"]);
        assert_eq!(members_of(&c, 1), ["T2.A"]);
        assert_eq!(
            exact_min_color(&g, Mode::SharedPool, 12)
                .unwrap()
                .class_count(),
            2
        );
    }

    #[test]
    fn per_variant_mode_never_merges_variants() {
        let g = graph(
            &["T1", "T2"],
            &["A", "B"],
            &[("A", &["T1", "T2"]), ("B", &["T1", "T2"])],
            &[("T1", "T2", &["A"])],
        );
        let c = per_variant_color(&g);
        // Variant A needs 2 classes, variant B one: 3 in total.
        assert_eq!(c.class_count(), 3);
        assert_eq!(members_of(&c, 0), ["T1.A"]);
        assert_eq!(members_of(&c, 1), ["T2.A"]);
        assert_eq!(members_of(&c, 2), ["T1.B", "T2.B"]);
        assert!(check_validity(&c, &g).is_empty());
    }

    #[test]
    fn per_variant_mode_on_empty_graph_uses_one_class_per_variant() {
        let g = graph(
            &["T1", "T2"],
            &["A", "B"],
            &[("A", &["T1", "T2"]), ("B", &["T1", "T2"])],
            &[],
        );
        let c = per_variant_color(&g);
        assert_eq!(c.class_count(), 2);
    }

    #[test]
    fn per_variant_complete_conflict_needs_m_times_n() {
        let vertices = ["T1", "T2", "T3"];
        let g = graph(
            &vertices,
            &["A", "B"],
            &[("A", &vertices), ("B", &vertices)],
            &[
                ("T1", "T2", &["A", "B"]),
                ("T1", "T3", &["A", "B"]),
                ("T2", "T3", &["A", "B"]),
            ],
        );
        let c = per_variant_color(&g);
        assert_eq!(c.class_count(), 6);
        let exact = exact_min_color(&g, Mode::PerVariant, 12).unwrap();
        assert_eq!(exact.class_count(), 6);
    }

    #[test]
    fn five_cycle_has_chromatic_number_three() {
        let vertices = ["T1", "T2", "T3", "T4", "T5"];
        let g = graph(
            &vertices,
            &["A"],
            &[("A", &vertices)],
            &[
                ("T1", "T2", &["A"]),
                ("T2", "T3", &["A"]),
                ("T3", "T4", &["A"]),
                ("T4", "T5", &["A"]),
                ("T5", "T1", &["A"]),
            ],
        );
        let exact = exact_min_color(&g, Mode::SharedPool, 12).unwrap();
        assert_eq!(exact.class_count(), 3);
        assert!(check_validity(&exact, &g).is_empty());
        assert!(greedy_color(&g).class_count() >= 3);
    }

    #[test]
    fn exact_on_edgeless_graph_is_one() {
        let g = graph(&["T1", "T2"], &["A"], &[("A", &["T1", "T2"])], &[]);
        assert_eq!(
            exact_min_color(&g, Mode::SharedPool, 12)
                .unwrap()
                .class_count(),
            1
        );
    }

    #[test]
    fn exact_rejects_oversized_instances() {
        let vertices: Vec<String> = (1..=13).map(|i| format!("T{i}")).collect();
        let refs: Vec<&str> = vertices.iter().map(String::as_str).collect();
        let g = graph(&refs, &["A"], &[("A", &refs)], &[]);
        let err = exact_min_color(&g, Mode::SharedPool, 12).unwrap_err();
        assert_eq!(err.participants, 13);
        assert_eq!(err.limit, 12);
    }

    // Crown-style instance where first-fit in declaration order burns one
    // class per tenant pair while two classes suffice.
    #[test]
    fn first_fit_can_miss_the_optimum() {
        let vertices = ["a1", "b1", "a2", "b2", "a3", "b3"];
        let mut edges = Vec::new();
        for i in 1..=3 {
            for j in 1..=3 {
                if i != j {
                    edges.push((format!("a{i}"), format!("b{j}")));
                }
            }
        }
        let edge_refs: Vec<(&str, &str, &[&str])> = edges
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str(), ["A"].as_slice()))
            .collect();
        let g = graph(&vertices, &["A"], &[("A", &vertices)], &edge_refs);
        let greedy = greedy_color(&g);
        let exact = exact_min_color(&g, Mode::SharedPool, 12).unwrap();
        assert_eq!(greedy.class_count(), 3);
        assert_eq!(exact.class_count(), 2);
        assert!(check_validity(&greedy, &g).is_empty());
        assert!(check_validity(&exact, &g).is_empty());
    }

    #[test]
    fn validity_reports_a_planted_conflict() {
        let g = graph(
            &["T1", "T2"],
            &["A"],
            &[("A", &["T1", "T2"])],
            &[("T1", "T2", &["A"])],
        );
        let mut c = greedy_color(&g);
        assert!(check_validity(&c, &g).is_empty());
        // Force T2.A into T1.A's class.
        c.assignment.insert((1, 0), 1);
        c.classes[0].members.push((1, 0));
        c.classes.pop();
        let violations = check_validity(&c, &g);
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            &violations[0],
            Violation::Conflict { class: 1, a, b, .. }
                if a == &TenantId::from("T1") && b == &TenantId::from("T2")
        ));
    }

    #[test]
    fn validity_reports_missing_coverage() {
        let g = graph(&["T1", "T2"], &["A"], &[("A", &["T1", "T2"])], &[]);
        let mut c = greedy_color(&g);
        c.assignment.remove(&(1, 0));
        c.classes[0].members.retain(|&m| m != (1, 0));
        let violations = check_validity(&c, &g);
        assert_eq!(violations.len(), 1);
        assert!(matches!(
            &violations[0],
            Violation::MissingAssignment { tenant, .. } if tenant == &TenantId::from("T2")
        ));
    }

    #[test]
    fn colorings_are_deterministic() {
        let g = graph(
            &["T1", "T2", "T3", "T4"],
            &["A", "B"],
            &[("A", &["T1", "T2", "T3"]), ("B", &["T2", "T3", "T4"])],
            &[
                ("T1", "T2", &["A"]),
                ("T2", "T3", &["A", "B"]),
                ("T3", "T4", &["B"]),
            ],
        );
        assert_eq!(greedy_color(&g), greedy_color(&g));
        assert_eq!(per_variant_color(&g), per_variant_color(&g));
        assert_eq!(
            exact_min_color(&g, Mode::SharedPool, 12).unwrap(),
            exact_min_color(&g, Mode::SharedPool, 12).unwrap()
        );
    }
}
