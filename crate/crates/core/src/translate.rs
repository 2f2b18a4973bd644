//! Translation of functionality-level requirements into per-component
//! variant requirement tables.
//!
//! Tenants declare sharing expressions against application functionalities;
//! instances are shared (or not) per component variant. A requirement on a
//! functionality therefore carries over to every (component, variant) pair
//! that realizes it. When several expressions land on the same
//! (tenant, variant) cell they are folded with [`crate::expr::combine`]; a
//! cell a tenant uses but never constrained gets the `SWAny` default.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::{self, AllowedSet, SharingExpression};
use crate::model::{
    AppId, Bundle, ConfigurationTemplate, FunctionalityId, RvcId, TenantId, TenantRegistry,
    TenantSet, VariantId,
};

/// Per-application requirement table: the expressions each tenant declared
/// on each functionality it selected. A cell exists (possibly with an empty
/// expression list) if and only if the tenant selected the functionality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalityRequirementTable {
    pub app: AppId,
    cells: BTreeMap<(TenantId, FunctionalityId), Vec<SharingExpression>>,
}

impl FunctionalityRequirementTable {
    /// Collects one application's table out of a validated bundle.
    ///
    /// Deployment cells on functionalities the tenant did not select are
    /// dropped (validation has already warned about them); expressions for
    /// the same cell arriving from several input rows are concatenated.
    pub fn from_bundle(bundle: &Bundle, app: &AppId) -> Result<Self, TranslateError> {
        let mut cells: BTreeMap<(TenantId, FunctionalityId), Vec<SharingExpression>> =
            BTreeMap::new();
        for req in bundle.functional_for(app) {
            for functionality in &req.selected {
                cells.insert((req.tenant.clone(), functionality.clone()), Vec::new());
            }
        }
        for cell in bundle.deployment_for(app) {
            let key = (cell.tenant.clone(), cell.functionality.clone());
            if let Some(expressions) = cells.get_mut(&key) {
                for text in &cell.expressions {
                    expressions.push(expr::parse_expression(text)?);
                }
            }
        }
        Ok(Self {
            app: app.clone(),
            cells,
        })
    }

    pub fn cell(
        &self,
        tenant: &TenantId,
        functionality: &FunctionalityId,
    ) -> Option<&[SharingExpression]> {
        self.cells
            .get(&(tenant.clone(), functionality.clone()))
            .map(Vec::as_slice)
    }

    pub fn cells(
        &self,
    ) -> impl Iterator<Item = (&TenantId, &FunctionalityId, &[SharingExpression])> {
        self.cells.iter().map(|((t, f), e)| (t, f, e.as_slice()))
    }
}

/// Requirement table for one component: the folded allowed set of every
/// tenant for every variant it uses.
///
/// Tenant positions index the full registry; variant positions index the
/// component's declared variant order. A cell exists exactly when the tenant
/// selected at least one functionality realized by that variant, and
/// `participants(v)` is exactly the set of tenants with a cell for `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariantRequirementTable {
    pub rvc: RvcId,
    variants: Vec<VariantId>,
    cells: BTreeMap<(usize, usize), AllowedSet>,
    participants: Vec<TenantSet>,
}

impl VariantRequirementTable {
    pub fn new(rvc: impl Into<RvcId>, variants: Vec<VariantId>, universe: usize) -> Self {
        let participants = vec![TenantSet::empty(universe); variants.len()];
        Self {
            rvc: rvc.into(),
            variants,
            cells: BTreeMap::new(),
            participants,
        }
    }

    /// Inserts or folds an allowed set into a cell. The normal route into a
    /// table is [`translate`]; this is exposed for tests and tooling that
    /// build tables directly.
    pub fn attach(&mut self, tenant: usize, variant: usize, set: AllowedSet) {
        use std::collections::btree_map::Entry;
        self.participants[variant].insert(tenant);
        match self.cells.entry((tenant, variant)) {
            Entry::Vacant(slot) => {
                slot.insert(set);
            }
            Entry::Occupied(mut slot) => {
                let folded =
                    expr::combine(slot.get(), &set).expect("cell accumulates sets of one declarer");
                slot.insert(folded);
            }
        }
    }

    pub fn variants(&self) -> &[VariantId] {
        &self.variants
    }

    pub fn variant_position(&self, variant: &VariantId) -> Option<usize> {
        self.variants.iter().position(|v| v == variant)
    }

    pub fn cell_at(&self, tenant: usize, variant: usize) -> Option<&AllowedSet> {
        self.cells.get(&(tenant, variant))
    }

    pub fn cell(
        &self,
        registry: &TenantRegistry,
        tenant: &TenantId,
        variant: &VariantId,
    ) -> Option<&AllowedSet> {
        let t = registry.position(tenant)?;
        let v = self.variant_position(variant)?;
        self.cell_at(t, v)
    }

    /// Cells in canonical (tenant-major) order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &AllowedSet)> {
        self.cells.iter().map(|(&(t, v), set)| (t, v, set))
    }

    /// Participating tenants of one variant, as registry positions.
    pub fn participants(&self, variant: usize) -> &TenantSet {
        &self.participants[variant]
    }

    /// Tenants participating in at least one variant, ascending.
    pub fn participating_tenants(&self) -> Vec<usize> {
        let universe = self
            .participants
            .first()
            .map(TenantSet::universe)
            .unwrap_or(0);
        let mut any = TenantSet::empty(universe);
        for p in &self.participants {
            any.union_with(p);
        }
        any.iter().collect()
    }
}

/// Tenant-specific application configuration: the selected functionalities
/// and the component variants they pull in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RichVariantConfiguration {
    pub tenant: TenantId,
    pub app: AppId,
    pub functionalities: BTreeSet<FunctionalityId>,
    pub variants_used: BTreeMap<RvcId, BTreeSet<VariantId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Resolve(#[from] expr::ResolveError),
    #[error("tenant {0} missing from registry")]
    UnknownTenant(TenantId),
}

/// Rewrites a functionality-level requirement table into one variant
/// requirement table per component, plus the per-tenant configurations.
///
/// Every expression a tenant declared on a functionality is resolved and
/// attached to each (component, variant) pair realizing it; colliding sets
/// fold by intersection. Selected-but-unconstrained cells default to
/// `SWAny`. Tenants that use no variant of a component simply have no cells
/// there and impose no constraints.
pub fn translate(
    template: &ConfigurationTemplate,
    table: &FunctionalityRequirementTable,
    registry: &TenantRegistry,
) -> Result<(Vec<VariantRequirementTable>, Vec<RichVariantConfiguration>), TranslateError> {
    let rvc_positions: BTreeMap<&RvcId, usize> = template
        .rvcs
        .iter()
        .enumerate()
        .map(|(i, r)| (&r.id, i))
        .collect();
    let mut tables: Vec<VariantRequirementTable> = template
        .rvcs
        .iter()
        .map(|rvc| {
            VariantRequirementTable::new(rvc.id.clone(), rvc.variants.clone(), registry.len())
        })
        .collect();
    let mut configurations: BTreeMap<usize, RichVariantConfiguration> = BTreeMap::new();

    for (tenant, functionality, expressions) in table.cells() {
        let declarer = registry
            .position(tenant)
            .ok_or_else(|| TranslateError::UnknownTenant(tenant.clone()))?;

        let mut resolved = Vec::with_capacity(expressions.len().max(1));
        for expression in expressions {
            resolved.push(expr::resolve_at(expression, declarer, registry)?);
        }
        if resolved.is_empty() {
            // No declared expression: the default applies.
            resolved.push(AllowedSet::share_with_any(declarer, registry));
        }

        let config = configurations
            .entry(declarer)
            .or_insert_with(|| RichVariantConfiguration {
                tenant: tenant.clone(),
                app: table.app.clone(),
                functionalities: BTreeSet::new(),
                variants_used: BTreeMap::new(),
            });
        config.functionalities.insert(functionality.clone());

        let Some(pairs) = template.realization.get(functionality) else {
            continue;
        };
        for (rvc_id, variant_id) in pairs {
            let Some(&rvc_pos) = rvc_positions.get(rvc_id) else {
                continue;
            };
            let Some(variant_pos) = tables[rvc_pos].variant_position(variant_id) else {
                continue;
            };
            config
                .variants_used
                .entry(rvc_id.clone())
                .or_default()
                .insert(variant_id.clone());
            for set in &resolved {
                tables[rvc_pos].attach(declarer, variant_pos, set.clone());
            }
        }
    }

    Ok((tables, configurations.into_values().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Application, Catalog, DeploymentCell, DeploymentRequirements, FunctionalRequirement,
        RawBundle, Rvc, Tenant,
    };

    fn bundle(cells: Vec<(&str, &str, Vec<&str>)>, selections: Vec<(&str, Vec<&str>)>) -> Bundle {
        let mut catalog = Catalog::default();
        catalog
            .applications
            .push(Application::new("app", ["F1", "F2", "F3"]));
        let mut realization = BTreeMap::new();
        realization.insert(
            FunctionalityId::from("F1"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("A"))]),
        );
        realization.insert(
            FunctionalityId::from("F2"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("A"))]),
        );
        realization.insert(
            FunctionalityId::from("F3"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("B"))]),
        );
        let raw = RawBundle {
            catalog,
            templates: vec![ConfigurationTemplate {
                app: AppId::from("app"),
                rvcs: vec![Rvc::new("R1", ["A", "B"])],
                realization,
            }],
            tenants: vec![Tenant::new("T1"), Tenant::new("T2"), Tenant::new("T3")],
            functional: selections
                .into_iter()
                .map(|(tenant, fs)| FunctionalRequirement {
                    tenant: TenantId::from(tenant),
                    app: AppId::from("app"),
                    selected: fs.into_iter().map(FunctionalityId::from).collect(),
                })
                .collect(),
            deployment: vec![DeploymentRequirements {
                app: AppId::from("app"),
                cells: cells
                    .into_iter()
                    .map(|(tenant, f, exprs)| DeploymentCell {
                        tenant: TenantId::from(tenant),
                        functionality: FunctionalityId::from(f),
                        expressions: exprs.into_iter().map(str::to_owned).collect(),
                    })
                    .collect(),
            }],
        };
        Bundle::from_raw(raw).expect("fixture validates").0
    }

    fn run(bundle: &Bundle) -> (Vec<VariantRequirementTable>, Vec<RichVariantConfiguration>) {
        let app = AppId::from("app");
        let table = FunctionalityRequirementTable::from_bundle(bundle, &app).unwrap();
        translate(&bundle.templates[0], &table, &bundle.registry).unwrap()
    }

    #[test]
    fn unconstrained_cell_defaults_to_share_with_any() {
        let b = bundle(vec![], vec![("T1", vec!["F1"])]);
        let (tables, _) = run(&b);
        let cell = tables[0]
            .cell(&b.registry, &TenantId::from("T1"), &VariantId::from("A"))
            .expect("cell exists");
        assert!(cell.is_share_with_any());
    }

    #[test]
    fn expressions_on_shared_variant_are_folded() {
        // DSW(T2) on F1 and SWJ(T2,T3) on F2 both land on (R1, A):
        // (all \ {T2}) ∩ {T2,T3} = {T3}.
        let b = bundle(
            vec![
                ("T1", "F1", vec!["DSW(T2)"]),
                ("T1", "F2", vec!["SWJ(T2,T3)"]),
            ],
            vec![("T1", vec!["F1", "F2"])],
        );
        let (tables, _) = run(&b);
        let cell = tables[0]
            .cell(&b.registry, &TenantId::from("T1"), &VariantId::from("A"))
            .unwrap();
        assert_eq!(cell.allowed_ids(&b.registry), [&TenantId::from("T3")]);
    }

    #[test]
    fn non_participants_have_no_cell() {
        let b = bundle(vec![], vec![("T1", vec!["F1", "F3"]), ("T2", vec!["F1"])]);
        let (tables, _) = run(&b);
        let table = &tables[0];
        let variant_b = table.variant_position(&VariantId::from("B")).unwrap();
        let t2 = b.registry.position(&TenantId::from("T2")).unwrap();
        assert!(!table.participants(variant_b).contains(t2));
        assert!(table.cell_at(t2, variant_b).is_none());
        // Participants are exactly the tenants with a cell.
        let t1 = b.registry.position(&TenantId::from("T1")).unwrap();
        assert!(table.participants(variant_b).contains(t1));
        assert!(table.cell_at(t1, variant_b).is_some());
    }

    #[test]
    fn configurations_mirror_realization_image() {
        let b = bundle(vec![], vec![("T1", vec!["F1", "F3"]), ("T2", vec!["F2"])]);
        let (_, configs) = run(&b);
        assert_eq!(configs.len(), 2);
        let t1 = &configs[0];
        assert_eq!(t1.tenant, TenantId::from("T1"));
        assert_eq!(
            t1.variants_used[&RvcId::from("R1")],
            BTreeSet::from([VariantId::from("A"), VariantId::from("B")])
        );
        let t2 = &configs[1];
        assert_eq!(
            t2.variants_used[&RvcId::from("R1")],
            BTreeSet::from([VariantId::from("A")])
        );
    }

    #[test]
    fn translate_is_deterministic() {
        let b = bundle(
            vec![
                ("T1", "F1", vec!["DSW(T2)"]),
                ("T2", "F2", vec!["SWJ(T1)"]),
                ("T3", "F3", vec!["DSWAny"]),
            ],
            vec![
                ("T1", vec!["F1", "F2"]),
                ("T2", vec!["F2", "F3"]),
                ("T3", vec!["F1", "F3"]),
            ],
        );
        let (t1, c1) = run(&b);
        let (t2, c2) = run(&b);
        assert_eq!(t1, t2);
        assert_eq!(c1, c2);
        assert_eq!(format!("{t1:?}"), format!("{t2:?}"));
    }
}
