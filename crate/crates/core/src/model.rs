//! Input domain model: identifiers, tenants, the provider catalog,
//! configuration templates, functional requirements, and bundle validation.
//!
//! All entities are immutable after a bundle has been validated. Canonical
//! orderings are fixed at ingestion (tenants in registry declaration order,
//! variants in component declaration order) and every downstream stage
//! iterates in those orders, which is what makes the whole pipeline
//! deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }

        impl From<&str> for $name {
            fn from(id: &str) -> Self {
                Self(id.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(id: String) -> Self {
                Self(id)
            }
        }
    };
}

id_type!(
    /// Opaque tenant identifier, unique within one registry.
    TenantId
);
id_type!(
    /// Identifier of a rich-variant component within one template.
    RvcId
);
id_type!(
    /// Variant identifier, unique within its component.
    VariantId
);
id_type!(
    /// Functionality identifier, unique within one application.
    FunctionalityId
);
id_type!(
    /// Application identifier, unique within one catalog.
    AppId
);

/// A customer organization together with its declared relations.
///
/// Partner/competitor sets are interpreted from the declarer's point of view
/// only; the relations are not symmetrized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tenant {
    pub id: TenantId,
    pub partners: BTreeSet<TenantId>,
    pub competitors: BTreeSet<TenantId>,
}

impl Tenant {
    pub fn new(id: impl Into<TenantId>) -> Self {
        Self {
            id: id.into(),
            partners: BTreeSet::new(),
            competitors: BTreeSet::new(),
        }
    }

    pub fn with_partners<I, T>(mut self, partners: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<TenantId>,
    {
        self.partners = partners.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_competitors<I, T>(mut self, competitors: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<TenantId>,
    {
        self.competitors = competitors.into_iter().map(Into::into).collect();
        self
    }
}

/// A deployable component offered in one or more variants. The declared
/// variant order is the canonical iteration order for all downstream stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rvc {
    pub id: RvcId,
    pub variants: Vec<VariantId>,
}

impl Rvc {
    pub fn new<I, V>(id: impl Into<RvcId>, variants: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: Into<VariantId>,
    {
        Self {
            id: id.into(),
            variants: variants.into_iter().map(Into::into).collect(),
        }
    }
}

/// One application as offered in the provider catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    pub id: AppId,
    pub functionalities: BTreeSet<FunctionalityId>,
    /// Free-text description of how each functionality can be customized.
    pub variation_points: BTreeMap<FunctionalityId, String>,
}

impl Application {
    pub fn new<I, F>(id: impl Into<AppId>, functionalities: I) -> Self
    where
        I: IntoIterator<Item = F>,
        F: Into<FunctionalityId>,
    {
        Self {
            id: id.into(),
            functionalities: functionalities.into_iter().map(Into::into).collect(),
            variation_points: BTreeMap::new(),
        }
    }
}

/// The provider's offer: every application available for configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    pub applications: Vec<Application>,
}

impl Catalog {
    pub fn application(&self, app: &AppId) -> Option<&Application> {
        self.applications.iter().find(|a| &a.id == app)
    }
}

/// Build recipe for one application: the components it is assembled from and
/// which (component, variant) pairs realize each functionality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigurationTemplate {
    pub app: AppId,
    pub rvcs: Vec<Rvc>,
    pub realization: BTreeMap<FunctionalityId, BTreeSet<(RvcId, VariantId)>>,
}

impl ConfigurationTemplate {
    pub fn rvc(&self, id: &RvcId) -> Option<&Rvc> {
        self.rvcs.iter().find(|r| &r.id == id)
    }
}

/// A tenant's functional requirement: the functionality selection it made
/// for one application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalRequirement {
    pub tenant: TenantId,
    pub app: AppId,
    pub selected: BTreeSet<FunctionalityId>,
}

/// One raw deployment-requirement cell: the sharing expressions a tenant
/// declared on one functionality, still in textual form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeploymentCell {
    pub tenant: TenantId,
    pub functionality: FunctionalityId,
    pub expressions: Vec<String>,
}

/// The deployment-requirement table for one application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeploymentRequirements {
    pub app: AppId,
    pub cells: Vec<DeploymentCell>,
}

/// Everything one planning run consumes, exactly as ingested and before any
/// cross-reference checking.
#[derive(Clone, Debug, Default)]
pub struct RawBundle {
    pub catalog: Catalog,
    pub templates: Vec<ConfigurationTemplate>,
    pub tenants: Vec<Tenant>,
    pub functional: Vec<FunctionalRequirement>,
    pub deployment: Vec<DeploymentRequirements>,
}

// ---------------------------------------------------------------------------
// Tenant sets
// ---------------------------------------------------------------------------

/// Set of tenants over a fixed registry, stored as a bit set keyed by
/// registry position. All allowed-set algebra and graph construction runs on
/// these, which keeps large populations (thousands of tenants) cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TenantSet {
    universe: usize,
    words: Vec<u64>,
}

impl TenantSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    /// All registry members except `except`.
    pub fn all_except(universe: usize, except: usize) -> Self {
        let mut set = Self::full(universe);
        set.remove(except);
        set
    }

    pub fn full(universe: usize) -> Self {
        let mut words = vec![u64::MAX; universe.div_ceil(64)];
        if !universe.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (universe % 64)) - 1;
            }
        }
        Self { universe, words }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, index: usize) {
        debug_assert!(index < self.universe);
        self.words[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.universe {
            self.words[index / 64] &= !(1 << (index % 64));
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersect_with(&mut self, other: &TenantSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
    }

    pub fn union_with(&mut self, other: &TenantSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn subtract(&mut self, other: &TenantSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
    }

    pub fn intersects(&self, other: &TenantSet) -> bool {
        self.words.iter().zip(&other.words).any(|(w, o)| w & o != 0)
    }

    /// Member positions in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }
}

impl fmt::Debug for TenantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Validated tenant registry with positional indexing.
///
/// Positions follow declaration order and are the canonical tenant order for
/// every downstream stage. Self-references in partner/competitor sets have
/// already been stripped by validation.
#[derive(Clone, Debug)]
pub struct TenantRegistry {
    tenants: Vec<Tenant>,
    index: HashMap<TenantId, usize>,
    partner_sets: Vec<TenantSet>,
    competitor_sets: Vec<TenantSet>,
}

impl TenantRegistry {
    /// Builds a registry, trusting its input: relation entries that do not
    /// resolve are dropped and self-references are stripped silently.
    /// `validate_bundle` is the place where those problems get reported.
    pub fn new(tenants: Vec<Tenant>) -> Self {
        let index: HashMap<TenantId, usize> = tenants
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        let universe = tenants.len();
        let mut partner_sets = Vec::with_capacity(universe);
        let mut competitor_sets = Vec::with_capacity(universe);
        for (i, tenant) in tenants.iter().enumerate() {
            let mut partners = TenantSet::empty(universe);
            for p in &tenant.partners {
                if let Some(&j) = index.get(p) {
                    if j != i {
                        partners.insert(j);
                    }
                }
            }
            let mut competitors = TenantSet::empty(universe);
            for c in &tenant.competitors {
                if let Some(&j) = index.get(c) {
                    if j != i {
                        competitors.insert(j);
                    }
                }
            }
            partner_sets.push(partners);
            competitor_sets.push(competitors);
        }
        Self {
            tenants,
            index,
            partner_sets,
            competitor_sets,
        }
    }

    pub fn len(&self) -> usize {
        self.tenants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tenants.is_empty()
    }

    pub fn position(&self, id: &TenantId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, position: usize) -> &TenantId {
        &self.tenants[position].id
    }

    pub fn tenant(&self, position: usize) -> &Tenant {
        &self.tenants[position]
    }

    pub fn tenants(&self) -> &[Tenant] {
        &self.tenants
    }

    pub fn partners_of(&self, position: usize) -> &TenantSet {
        &self.partner_sets[position]
    }

    pub fn competitors_of(&self, position: usize) -> &TenantSet {
        &self.competitor_sets[position]
    }

    /// Every tenant except the declarer.
    pub fn all_others(&self, declarer: usize) -> TenantSet {
        TenantSet::all_except(self.len(), declarer)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One validation finding, pointing at the offending input element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Outcome of validating a raw bundle. Validation is total: any parseable
/// bundle yields a report, never a panic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ValidationIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(ValidationIssue {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.errors {
            writeln!(f, "error: {issue}")?;
        }
        for issue in &self.warnings {
            writeln!(f, "warning: {issue}")?;
        }
        write!(
            f,
            "{} error(s), {} warning(s)",
            self.errors.len(),
            self.warnings.len()
        )
    }
}

/// Largest number of variants one component may declare. Edge labels are
/// stored as 64-bit masks, so this is a hard representation limit.
pub const MAX_VARIANTS_PER_RVC: usize = 64;

/// Checks every cross-reference and structural invariant of a raw bundle.
///
/// Errors cover dangling identifiers, duplicates, catalog/template
/// mismatches, and unparseable sharing expressions; warnings cover stripped
/// self-references, expressions on unselected functionalities, and cells
/// that fall back to the `SWAny` default.
pub fn validate_bundle(raw: &RawBundle) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Registry: unique, non-empty ids; relations resolve and are not self.
    let mut tenant_ids: HashSet<&TenantId> = HashSet::new();
    for (i, tenant) in raw.tenants.iter().enumerate() {
        let path = format!("registry.tenants[{i}]");
        if tenant.id.as_str().is_empty() {
            report.error(format!("{path}.id"), "tenant id must be non-empty");
        }
        if !tenant_ids.insert(&tenant.id) {
            report.error(
                format!("{path}.id"),
                format!("duplicate tenant id {}", tenant.id),
            );
        }
    }
    for (i, tenant) in raw.tenants.iter().enumerate() {
        let path = format!("registry.tenants[{i}]");
        for (field, refs) in [
            ("partners", &tenant.partners),
            ("competitors", &tenant.competitors),
        ] {
            for r in refs {
                if r == &tenant.id {
                    report.warning(
                        format!("{path}.{field}[{r}]"),
                        format!("self-reference stripped: {} lists itself", tenant.id),
                    );
                } else if !tenant_ids.contains(r) {
                    report.error(
                        format!("{path}.{field}[{r}]"),
                        format!("unknown tenant {r}"),
                    );
                }
            }
        }
    }

    // Catalog: unique application and functionality ids.
    let mut app_ids: HashSet<&AppId> = HashSet::new();
    for (i, app) in raw.catalog.applications.iter().enumerate() {
        let path = format!("catalog.applications[{i}]");
        if app.id.as_str().is_empty() {
            report.error(format!("{path}.id"), "application id must be non-empty");
        }
        if !app_ids.insert(&app.id) {
            report.error(
                format!("{path}.id"),
                format!("duplicate application id {}", app.id),
            );
        }
        for f in &app.functionalities {
            if f.as_str().is_empty() {
                report.error(
                    format!("{path}.functionalities"),
                    "functionality id must be non-empty",
                );
            }
        }
        for f in app.variation_points.keys() {
            if !app.functionalities.contains(f) {
                report.error(
                    format!("{path}.variation_points[{f}]"),
                    format!("variation point refers to unknown functionality {f}"),
                );
            }
        }
    }

    // Templates: declared components are well-formed and the realization map
    // covers exactly the application's functionalities.
    let mut template_apps: HashSet<&AppId> = HashSet::new();
    for (ti, template) in raw.templates.iter().enumerate() {
        let path = format!("templates[{ti}]");
        let app = raw.catalog.application(&template.app);
        if app.is_none() {
            report.error(
                format!("{path}.app"),
                format!("template for unknown application {}", template.app),
            );
        }
        if !template_apps.insert(&template.app) {
            report.error(
                format!("{path}.app"),
                format!("duplicate template for application {}", template.app),
            );
        }
        let mut rvc_ids: HashSet<&RvcId> = HashSet::new();
        for (ri, rvc) in template.rvcs.iter().enumerate() {
            let rpath = format!("{path}.rvcs[{ri}]");
            if rvc.id.as_str().is_empty() {
                report.error(format!("{rpath}.id"), "RVC id must be non-empty");
            }
            if !rvc_ids.insert(&rvc.id) {
                report.error(
                    format!("{rpath}.id"),
                    format!("duplicate RVC id {}", rvc.id),
                );
            }
            if rvc.variants.is_empty() {
                report.error(
                    format!("{rpath}.variants"),
                    format!("RVC {} declares no variants", rvc.id),
                );
            }
            if rvc.variants.len() > MAX_VARIANTS_PER_RVC {
                report.error(
                    format!("{rpath}.variants"),
                    format!(
                        "RVC {} declares {} variants; at most {MAX_VARIANTS_PER_RVC} are supported",
                        rvc.id,
                        rvc.variants.len()
                    ),
                );
            }
            let mut seen: HashSet<&VariantId> = HashSet::new();
            for v in &rvc.variants {
                if v.as_str().is_empty() {
                    report.error(format!("{rpath}.variants"), "variant id must be non-empty");
                }
                if !seen.insert(v) {
                    report.error(
                        format!("{rpath}.variants[{v}]"),
                        format!("duplicate variant id {v} in RVC {}", rvc.id),
                    );
                }
            }
        }
        for (f, pairs) in &template.realization {
            let fpath = format!("{path}.realization[{f}]");
            if let Some(app) = app {
                if !app.functionalities.contains(f) {
                    report.error(
                        fpath.clone(),
                        format!(
                            "realization of functionality {f} not offered by {}",
                            template.app
                        ),
                    );
                }
            }
            if pairs.is_empty() {
                report.error(
                    fpath.clone(),
                    format!("functionality {f} realized by no variant"),
                );
            }
            for (rvc_id, variant_id) in pairs {
                match template.rvc(rvc_id) {
                    None => report.error(
                        format!("{fpath}[{rvc_id}]"),
                        format!("unknown RVC {rvc_id}"),
                    ),
                    Some(rvc) if !rvc.variants.contains(variant_id) => report.error(
                        format!("{fpath}[{rvc_id}.{variant_id}]"),
                        format!("RVC {rvc_id} has no variant {variant_id}"),
                    ),
                    Some(_) => {}
                }
            }
        }
        if let Some(app) = app {
            for f in &app.functionalities {
                if !template.realization.contains_key(f) {
                    report.error(
                        format!("{path}.realization"),
                        format!("functionality {f} of {} has no realization", template.app),
                    );
                }
            }
        }
    }

    // Functional requirements: known tenant/app, selections exist in catalog.
    let mut selections: HashSet<(&TenantId, &AppId)> = HashSet::new();
    for (i, req) in raw.functional.iter().enumerate() {
        let path = format!("functional[{i}]");
        if !tenant_ids.contains(&req.tenant) {
            report.error(
                format!("{path}.tenant"),
                format!("unknown tenant {}", req.tenant),
            );
        }
        if !selections.insert((&req.tenant, &req.app)) {
            report.error(
                format!("{path}.tenant"),
                format!(
                    "duplicate functional requirement for tenant {} on {}",
                    req.tenant, req.app
                ),
            );
        }
        match raw.catalog.application(&req.app) {
            None => report.error(
                format!("{path}.app"),
                format!("unknown application {}", req.app),
            ),
            Some(app) => {
                if req.selected.is_empty() {
                    report.error(
                        format!("{path}.functionalities"),
                        "selection must name at least one functionality",
                    );
                }
                for f in &req.selected {
                    if !app.functionalities.contains(f) {
                        report.error(
                            format!("{path}.functionalities[{f}]"),
                            format!("functionality {f} not offered by {}", req.app),
                        );
                    }
                }
            }
        }
    }

    // Deployment requirements: cells reference selected functionality and
    // every expression parses and resolves symbolically.
    let mut selected_by_tenant: HashMap<(&TenantId, &AppId), HashSet<&FunctionalityId>> =
        HashMap::new();
    for req in &raw.functional {
        selected_by_tenant
            .entry((&req.tenant, &req.app))
            .or_default()
            .extend(req.selected.iter());
    }
    for (di, dep) in raw.deployment.iter().enumerate() {
        let path = format!("deployment[{di}]");
        let app = raw.catalog.application(&dep.app);
        if app.is_none() {
            report.error(
                format!("{path}.app"),
                format!("unknown application {}", dep.app),
            );
        }
        for (ci, cell) in dep.cells.iter().enumerate() {
            let cpath = format!("{path}.cells[{ci}]");
            if !tenant_ids.contains(&cell.tenant) {
                report.error(
                    format!("{cpath}.tenant"),
                    format!("unknown tenant {}", cell.tenant),
                );
            }
            if let Some(app) = app {
                if !app.functionalities.contains(&cell.functionality) {
                    report.error(
                        format!("{cpath}.functionality"),
                        format!(
                            "functionality {} not offered by {}",
                            cell.functionality, dep.app
                        ),
                    );
                }
            }
            let selected = selected_by_tenant
                .get(&(&cell.tenant, &dep.app))
                .is_some_and(|fs| fs.contains(&cell.functionality));
            if !selected && tenant_ids.contains(&cell.tenant) {
                report.warning(
                    cpath.clone(),
                    format!(
                        "expression on functionality {} that tenant {} did not select; ignored",
                        cell.functionality, cell.tenant
                    ),
                );
            }
            for (ei, text) in cell.expressions.iter().enumerate() {
                let epath = format!("{cpath}.expressions[{ei}]");
                match crate::expr::parse_expression(text) {
                    Err(err) => report.error(epath, err.to_string()),
                    Ok(expr) => {
                        for target in expr.targets() {
                            if let crate::expr::SymbolicRef::Specific(id) = target {
                                if id == &cell.tenant {
                                    report.warning(
                                        format!("{epath}[{id}]"),
                                        format!(
                                            "self-reference stripped: {} targets itself",
                                            cell.tenant
                                        ),
                                    );
                                } else if !tenant_ids.contains(id) {
                                    report.error(
                                        format!("{epath}[{id}]"),
                                        format!("unknown tenant {id}"),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    report
}

// ---------------------------------------------------------------------------
// Validated bundle
// ---------------------------------------------------------------------------

/// A bundle that passed validation, with the tenant registry indexed and
/// canonical orders frozen. Immutable; safe to share across threads.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub catalog: Catalog,
    pub templates: Vec<ConfigurationTemplate>,
    pub registry: TenantRegistry,
    pub functional: Vec<FunctionalRequirement>,
    pub deployment: Vec<DeploymentRequirements>,
}

impl Bundle {
    /// Validates `raw` and freezes it. On validation errors the full report
    /// is returned instead.
    pub fn from_raw(raw: RawBundle) -> Result<(Bundle, ValidationReport), ValidationReport> {
        let report = validate_bundle(&raw);
        if !report.is_clean() {
            return Err(report);
        }
        let bundle = Bundle {
            registry: TenantRegistry::new(raw.tenants),
            catalog: raw.catalog,
            templates: raw.templates,
            functional: raw.functional,
            deployment: raw.deployment,
        };
        Ok((bundle, report))
    }

    pub fn template(&self, app: &AppId) -> Option<&ConfigurationTemplate> {
        self.templates.iter().find(|t| &t.app == app)
    }

    /// Functional requirements for one application, in registry order.
    pub fn functional_for(&self, app: &AppId) -> Vec<&FunctionalRequirement> {
        let mut reqs: Vec<&FunctionalRequirement> =
            self.functional.iter().filter(|r| &r.app == app).collect();
        reqs.sort_by_key(|r| self.registry.position(&r.tenant));
        reqs
    }

    /// Deployment-requirement cells for one application.
    pub fn deployment_for(&self, app: &AppId) -> Vec<&DeploymentCell> {
        self.deployment
            .iter()
            .filter(|d| &d.app == app)
            .flat_map(|d| d.cells.iter())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_tenant_bundle() -> RawBundle {
        let mut catalog = Catalog::default();
        catalog
            .applications
            .push(Application::new("shop", ["F1", "F2"]));
        let mut realization = BTreeMap::new();
        realization.insert(
            FunctionalityId::from("F1"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("A"))]),
        );
        realization.insert(
            FunctionalityId::from("F2"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("B"))]),
        );
        RawBundle {
            catalog,
            templates: vec![ConfigurationTemplate {
                app: AppId::from("shop"),
                rvcs: vec![Rvc::new("R1", ["A", "B"])],
                realization,
            }],
            tenants: vec![Tenant::new("T1"), Tenant::new("T2")],
            functional: vec![
                FunctionalRequirement {
                    tenant: TenantId::from("T1"),
                    app: AppId::from("shop"),
                    selected: BTreeSet::from([FunctionalityId::from("F1")]),
                },
                FunctionalRequirement {
                    tenant: TenantId::from("T2"),
                    app: AppId::from("shop"),
                    selected: BTreeSet::from([
                        FunctionalityId::from("F1"),
                        FunctionalityId::from("F2"),
                    ]),
                },
            ],
            deployment: vec![DeploymentRequirements {
                app: AppId::from("shop"),
                cells: vec![
                    DeploymentCell {
                        tenant: TenantId::from("T1"),
                        functionality: FunctionalityId::from("F1"),
                        expressions: vec!["DSW(T2)".to_owned()],
                    },
                    DeploymentCell {
                        tenant: TenantId::from("T2"),
                        functionality: FunctionalityId::from("F1"),
                        expressions: vec!["SWAny".to_owned()],
                    },
                    DeploymentCell {
                        tenant: TenantId::from("T2"),
                        functionality: FunctionalityId::from("F2"),
                        expressions: vec!["SWAny".to_owned()],
                    },
                ],
            }],
        }
    }

    #[test]
    fn well_formed_bundle_is_clean() {
        let report = validate_bundle(&two_tenant_bundle());
        assert!(report.errors.is_empty(), "{report}");
        assert!(report.warnings.is_empty(), "{report}");
    }

    #[test]
    fn unknown_functionality_in_selection_is_an_error() {
        let mut raw = two_tenant_bundle();
        raw.functional[0]
            .selected
            .insert(FunctionalityId::from("F9"));
        let report = validate_bundle(&raw);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].message.contains("F9"), "{report}");
    }

    #[test]
    fn self_reference_in_expression_warns_without_error() {
        let mut raw = two_tenant_bundle();
        raw.deployment[0].cells[0].expressions = vec!["DSW(T1)".to_owned()];
        let report = validate_bundle(&raw);
        assert!(report.errors.is_empty(), "{report}");
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0]
            .message
            .contains("self-reference stripped"));
    }

    #[test]
    fn dangling_partner_reference_is_an_error() {
        let mut raw = two_tenant_bundle();
        raw.tenants[0].partners.insert(TenantId::from("T9"));
        let report = validate_bundle(&raw);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].message.contains("T9"));
        assert!(report.errors[0].path.contains("partners"));
    }

    #[test]
    fn duplicate_tenant_id_is_an_error() {
        let mut raw = two_tenant_bundle();
        raw.tenants.push(Tenant::new("T1"));
        let report = validate_bundle(&raw);
        assert!(report
            .errors
            .iter()
            .any(|e| e.message.contains("duplicate tenant id T1")));
    }

    #[test]
    fn empty_swj_is_a_parse_error() {
        let mut raw = two_tenant_bundle();
        raw.deployment[0].cells[0].expressions = vec!["SWJ()".to_owned()];
        let report = validate_bundle(&raw);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].path.contains("expressions[0]"));
    }

    #[test]
    fn registry_strips_self_relations() {
        let mut t1 = Tenant::new("T1").with_partners(["T1", "T2"]);
        t1.competitors.insert(TenantId::from("T1"));
        let registry = TenantRegistry::new(vec![t1, Tenant::new("T2")]);
        assert!(!registry.partners_of(0).contains(0));
        assert!(registry.partners_of(0).contains(1));
        assert!(registry.competitors_of(0).is_empty());
    }

    #[test]
    fn tenant_set_operations() {
        let mut a = TenantSet::empty(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        let full = TenantSet::full(130);
        assert_eq!(full.len(), 130);
        let others = TenantSet::all_except(130, 64);
        assert_eq!(others.len(), 129);
        assert!(!others.contains(64));
        let mut b = a.clone();
        b.intersect_with(&others);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 129]);
        assert!(a.intersects(&full));
        b.subtract(&a);
        assert!(b.is_empty());
    }
}
