//! Seeded random populations for property tests, optimality-gap studies,
//! and benchmarks.
//!
//! Everything here is a pure function of the scenario seed: the generator
//! owns its RNG (a fixed ChaCha stream) and iterates in canonical orders
//! only, so published numbers can be reproduced exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::Mode;
use crate::graph::LabeledGraph;
use crate::model::{
    AppId, Application, Bundle, Catalog, ConfigurationTemplate, DeploymentCell,
    DeploymentRequirements, FunctionalRequirement, FunctionalityId, RawBundle, Rvc, RvcId, Tenant,
    TenantId, VariantId,
};
use crate::pipeline::{plan_application, PlanError, PlanOptions};

/// Probability weights for the expression form drawn on each selected
/// functionality. Must sum to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strictness {
    pub swany: f64,
    pub swj: f64,
    pub dsw: f64,
    pub dswany: f64,
}

/// One synthetic population: sizes, densities, expression-form mix, seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub tenants: usize,
    pub rvcs: usize,
    pub variants_per_rvc: usize,
    pub functionality_count: usize,
    /// Probability that a tenant selects any given functionality; tenants
    /// that would end up empty get one uniform pick instead.
    pub selection_density: f64,
    pub strictness: Strictness,
    pub partner_density: f64,
    pub competitor_density: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            tenants: 10,
            rvcs: 2,
            variants_per_rvc: 3,
            functionality_count: 6,
            selection_density: 0.7,
            strictness: Strictness {
                swany: 0.7,
                swj: 0.1,
                dsw: 0.15,
                dswany: 0.05,
            },
            partner_density: 0.1,
            competitor_density: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpecError {
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("{field} = {value} is not a probability in [0, 1]")]
    InvalidProbability { field: &'static str, value: f64 },
    #[error("strictness weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("variants_per_rvc above the supported maximum of 64")]
    TooManyVariants,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        for (field, value) in [
            ("tenants", self.tenants),
            ("rvcs", self.rvcs),
            ("variants_per_rvc", self.variants_per_rvc),
            ("functionality_count", self.functionality_count),
        ] {
            if value == 0 {
                return Err(SpecError::ZeroCount { field });
            }
        }
        if self.variants_per_rvc > 64 {
            return Err(SpecError::TooManyVariants);
        }
        for (field, value) in [
            ("selection_density", self.selection_density),
            ("partner_density", self.partner_density),
            ("competitor_density", self.competitor_density),
            ("strictness.swany", self.strictness.swany),
            ("strictness.swj", self.strictness.swj),
            ("strictness.dsw", self.strictness.dsw),
            ("strictness.dswany", self.strictness.dswany),
        ] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(SpecError::InvalidProbability { field, value });
            }
        }
        let sum = self.strictness.swany
            + self.strictness.swj
            + self.strictness.dsw
            + self.strictness.dswany;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SpecError::WeightSum { sum });
        }
        Ok(())
    }
}

fn variant_name(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("V{}", index + 1)
    }
}

/// Generates a full input bundle from a scenario. The result always passes
/// validation with zero errors, and equal specs yield identical bundles.
pub fn generate(spec: &ScenarioSpec) -> Result<RawBundle, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.tenants;

    let tenant_ids: Vec<TenantId> = (1..=n).map(|i| TenantId::new(format!("T{i}"))).collect();
    let mut tenants: Vec<Tenant> = tenant_ids
        .iter()
        .map(|id| Tenant::new(id.clone()))
        .collect();
    for (i, tenant) in tenants.iter_mut().enumerate() {
        for (j, other) in tenant_ids.iter().enumerate() {
            if i == j {
                continue;
            }
            if rng.gen_bool(spec.partner_density) {
                tenant.partners.insert(other.clone());
            } else if rng.gen_bool(spec.competitor_density) {
                tenant.competitors.insert(other.clone());
            }
        }
    }

    let functionality_ids: Vec<FunctionalityId> = (1..=spec.functionality_count)
        .map(|i| FunctionalityId::new(format!("F{i}")))
        .collect();
    let app_id = AppId::new("app");
    let mut catalog = Catalog::default();
    catalog
        .applications
        .push(Application::new(app_id.clone(), functionality_ids.clone()));

    let rvcs: Vec<Rvc> = (1..=spec.rvcs)
        .map(|r| {
            Rvc::new(
                format!("R{r}"),
                (0..spec.variants_per_rvc).map(variant_name),
            )
        })
        .collect();

    // Each functionality maps to 1-3 distinct (component, variant) pairs.
    let pair_count = spec.rvcs * spec.variants_per_rvc;
    let mut realization: BTreeMap<FunctionalityId, BTreeSet<(RvcId, VariantId)>> = BTreeMap::new();
    for f in &functionality_ids {
        let amount = rng.gen_range(1..=3usize).min(pair_count);
        let picked = rand::seq::index::sample(&mut rng, pair_count, amount);
        let pairs: BTreeSet<(RvcId, VariantId)> = picked
            .iter()
            .map(|flat| {
                let rvc = &rvcs[flat / spec.variants_per_rvc];
                let variant = &rvc.variants[flat % spec.variants_per_rvc];
                (rvc.id.clone(), variant.clone())
            })
            .collect();
        realization.insert(f.clone(), pairs);
    }

    let template = ConfigurationTemplate {
        app: app_id.clone(),
        rvcs,
        realization,
    };

    let mut functional = Vec::with_capacity(n);
    let mut cells = Vec::new();
    for (i, tenant_id) in tenant_ids.iter().enumerate() {
        let mut selected: BTreeSet<FunctionalityId> = functionality_ids
            .iter()
            .filter(|_| rng.gen_bool(spec.selection_density))
            .cloned()
            .collect();
        if selected.is_empty() {
            let pick = rng.gen_range(0..functionality_ids.len());
            selected.insert(functionality_ids[pick].clone());
        }
        for functionality in &selected {
            if let Some(expression) = sample_expression(&mut rng, spec, i, &tenant_ids) {
                cells.push(DeploymentCell {
                    tenant: tenant_id.clone(),
                    functionality: functionality.clone(),
                    expressions: vec![expression],
                });
            }
        }
        functional.push(FunctionalRequirement {
            tenant: tenant_id.clone(),
            app: app_id.clone(),
            selected,
        });
    }

    Ok(RawBundle {
        catalog,
        templates: vec![template],
        tenants,
        functional,
        deployment: vec![DeploymentRequirements { app: app_id, cells }],
    })
}

/// Draws one expression for a cell; `None` means the cell is left to the
/// `SWAny` default.
fn sample_expression(
    rng: &mut ChaCha8Rng,
    spec: &ScenarioSpec,
    declarer: usize,
    tenant_ids: &[TenantId],
) -> Option<String> {
    let roll: f64 = rng.gen();
    let s = &spec.strictness;
    if roll < s.swany {
        return None;
    }
    if roll < s.swany + s.dswany {
        return Some("DSWAny".to_owned());
    }
    let keyword = if roll < s.swany + s.dswany + s.swj {
        "SWJ"
    } else {
        "DSW"
    };
    let count = rng.gen_range(1..=3usize);
    let mut targets = Vec::with_capacity(count);
    for _ in 0..count {
        let kind: f64 = rng.gen();
        if kind < 0.2 || tenant_ids.len() == 1 {
            targets.push("P".to_owned());
        } else if kind < 0.4 {
            targets.push("Cp".to_owned());
        } else {
            let mut other = rng.gen_range(0..tenant_ids.len() - 1);
            if other >= declarer {
                other += 1;
            }
            targets.push(tenant_ids[other].to_string());
        }
    }
    Some(format!("{keyword}({})", targets.join(",")))
}

/// Degenerate population: `m` tenants all selecting every functionality of
/// one application with `rvcs` components of `variants` variants each, one
/// functionality per (component, variant) pair, and every cell carrying
/// `expression` (`None` leaves cells to the `SWAny` default). Useful for
/// pinning the extreme cases: all-open populations need one instance per
/// component, all-closed ones need one per tenant.
pub fn uniform_population(
    m: usize,
    rvcs: usize,
    variants: usize,
    expression: Option<&str>,
) -> RawBundle {
    let app = AppId::new("app");
    let mut functionalities = Vec::new();
    let mut realization: BTreeMap<FunctionalityId, BTreeSet<(RvcId, VariantId)>> = BTreeMap::new();
    let mut rvc_list = Vec::new();
    for r in 1..=rvcs {
        let rvc_id = RvcId::new(format!("R{r}"));
        let mut variant_ids = Vec::new();
        for v in 0..variants {
            let variant_id = VariantId::new(variant_name(v));
            let f = FunctionalityId::new(format!("F{r}_{}", v + 1));
            realization.insert(
                f.clone(),
                BTreeSet::from([(rvc_id.clone(), variant_id.clone())]),
            );
            functionalities.push(f);
            variant_ids.push(variant_id);
        }
        rvc_list.push(Rvc {
            id: rvc_id,
            variants: variant_ids,
        });
    }
    let mut catalog = Catalog::default();
    catalog
        .applications
        .push(Application::new(app.clone(), functionalities.clone()));

    let tenants: Vec<Tenant> = (1..=m).map(|i| Tenant::new(format!("T{i}"))).collect();
    let functional = tenants
        .iter()
        .map(|t| FunctionalRequirement {
            tenant: t.id.clone(),
            app: app.clone(),
            selected: functionalities.iter().cloned().collect(),
        })
        .collect();
    let cells = match expression {
        None => Vec::new(),
        Some(text) => tenants
            .iter()
            .flat_map(|t| {
                functionalities.iter().map(|f| DeploymentCell {
                    tenant: t.id.clone(),
                    functionality: f.clone(),
                    expressions: vec![text.to_owned()],
                })
            })
            .collect(),
    };

    RawBundle {
        catalog,
        templates: vec![ConfigurationTemplate {
            app: app.clone(),
            rvcs: rvc_list,
            realization,
        }],
        tenants,
        functional,
        deployment: vec![DeploymentRequirements { app, cells }],
    }
}

/// Random conflict-graph instance for property tests: participation and
/// per-variant edges drawn independently at the given densities.
pub fn random_conflict_graph(
    rng: &mut impl Rng,
    tenants: usize,
    variants: usize,
    participation_density: f64,
    edge_density: f64,
) -> LabeledGraph {
    let vertex_ids: Vec<TenantId> = (1..=tenants)
        .map(|i| TenantId::new(format!("T{i}")))
        .collect();
    let variant_ids: Vec<VariantId> = (0..variants)
        .map(|v| VariantId::new(variant_name(v)))
        .collect();

    let mut participants: BTreeMap<VariantId, BTreeSet<TenantId>> = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(variants);
    for variant in &variant_ids {
        let picked: Vec<usize> = (0..tenants)
            .filter(|_| rng.gen_bool(participation_density))
            .collect();
        participants.insert(
            variant.clone(),
            picked.iter().map(|&i| vertex_ids[i].clone()).collect(),
        );
        members.push(picked);
    }

    let mut edges: BTreeMap<(usize, usize), BTreeSet<VariantId>> = BTreeMap::new();
    for (v, variant) in variant_ids.iter().enumerate() {
        for (a_pos, &a) in members[v].iter().enumerate() {
            for &b in &members[v][a_pos + 1..] {
                if rng.gen_bool(edge_density) {
                    edges.entry((a, b)).or_default().insert(variant.clone());
                }
            }
        }
    }

    LabeledGraph::from_parts(
        "R1",
        vertex_ids.clone(),
        variant_ids,
        participants,
        edges
            .into_iter()
            .map(|((a, b), labels)| (vertex_ids[a].clone(), vertex_ids[b].clone(), labels))
            .collect(),
    )
    .expect("generated graph is structurally valid")
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One evaluated scenario: greedy instance count, exact count where every
/// component fit the solver limit, and the planning wall time.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub tenants: usize,
    pub rvcs: usize,
    pub variants: usize,
    pub strict_dswany: f64,
    pub d_greedy: usize,
    pub d_exact: Option<usize>,
    pub gap: Option<usize>,
    pub ms: u128,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("generated bundle failed validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Runs each scenario through the full greedy pipeline (shared-pool mode)
/// with the exact audit applied to components within `exact_limit`.
pub fn sweep(specs: &[ScenarioSpec], exact_limit: usize) -> Result<Vec<SweepRow>, SweepError> {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let raw = generate(spec)?;
        let (bundle, _) =
            Bundle::from_raw(raw).map_err(|report| SweepError::Validation(report.to_string()))?;
        let options = PlanOptions {
            mode: Mode::SharedPool,
            exact_limit,
        };
        let app = AppId::new("app");
        let started = Instant::now();
        let plan = plan_application(&bundle, &app, &options)?;
        let ms = started.elapsed().as_millis();
        rows.push(SweepRow {
            seed: spec.seed,
            tenants: spec.tenants,
            rvcs: spec.rvcs,
            variants: spec.variants_per_rvc,
            strict_dswany: spec.strictness.dswany,
            d_greedy: plan.distribution.total_instances,
            d_exact: plan.report.optimality.exact,
            gap: plan.report.optimality.gap,
            ms,
        });
    }
    Ok(rows)
}

/// Serializes sweep rows as CSV. Components skipped by the exact solver
/// leave their fields empty.
pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("seed,tenants,rvcs,variants,strict_dswany,d_greedy,d_exact,gap,ms\n");
    for row in rows {
        let exact = row.d_exact.map_or(String::new(), |e| e.to_string());
        let gap = row.gap.map_or(String::new(), |g| g.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.seed,
            row.tenants,
            row.rvcs,
            row.variants,
            row.strict_dswany,
            row.d_greedy,
            exact,
            gap,
            row.ms
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_bundle;

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = ScenarioSpec::default();
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let other = ScenarioSpec {
            seed: 1,
            ..ScenarioSpec::default()
        };
        assert_ne!(format!("{:?}", generate(&other).unwrap()), format!("{a:?}"));
    }

    #[test]
    fn generated_bundles_validate_cleanly() {
        for seed in 0..50 {
            let spec = ScenarioSpec {
                seed,
                tenants: 1 + (seed as usize % 13),
                ..ScenarioSpec::default()
            };
            let raw = generate(&spec).unwrap();
            let report = validate_bundle(&raw);
            assert!(report.errors.is_empty(), "seed {seed}: {report}");
        }
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let spec = ScenarioSpec {
            tenants: 0,
            ..ScenarioSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SpecError::ZeroCount { .. })));

        let spec = ScenarioSpec {
            selection_density: 1.5,
            ..ScenarioSpec::default()
        };
        assert!(matches!(
            spec.validate(),
            Err(SpecError::InvalidProbability { .. })
        ));

        let mut spec = ScenarioSpec::default();
        spec.strictness.swany = 0.9;
        assert!(matches!(spec.validate(), Err(SpecError::WeightSum { .. })));
    }

    #[test]
    fn csv_header_is_stable() {
        let csv = render_csv(&[]);
        assert_eq!(
            csv,
            "seed,tenants,rvcs,variants,strict_dswany,d_greedy,d_exact,gap,ms\n"
        );
        let row = SweepRow {
            seed: 7,
            tenants: 5,
            rvcs: 2,
            variants: 3,
            strict_dswany: 0.25,
            d_greedy: 4,
            d_exact: None,
            gap: None,
            ms: 12,
        };
        let csv = render_csv(&[row]);
        assert!(csv.ends_with("7,5,2,3,0.25,4,,,12\n"), "{csv}");
    }
}
