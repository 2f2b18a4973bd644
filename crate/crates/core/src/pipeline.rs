//! End-to-end planning: requirement translation, graph extraction,
//! coloring, audit, and report assembly for one application at a time.
//! Applications are independent; there is no cross-application constraint.

use std::fmt::Write as _;

use thiserror::Error;

use crate::allocation::{exact_min_color, greedy_color, per_variant_color, Mode, RvcColoring};
use crate::expr::{self, AllowedSet, CanonicalForm, SharingExpression};
use crate::graph::{build_relationship_graph, complement, LabeledGraph};
use crate::model::{AppId, Bundle, RvcId, TenantId};
use crate::report::{
    assemble, build_report, cost_summary, AssembleError, CostSummary, Distribution, PlanReport,
};
use crate::translate::{
    translate, FunctionalityRequirementTable, RichVariantConfiguration, TranslateError,
    VariantRequirementTable,
};

/// Default ceiling on participating tenants per component for the exact
/// solver; beyond it only the greedy result is reported.
pub const DEFAULT_EXACT_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug)]
pub struct PlanOptions {
    pub mode: Mode,
    pub exact_limit: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            mode: Mode::SharedPool,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

/// Everything the pipeline produced for one component.
#[derive(Clone, Debug)]
pub struct RvcPlan {
    pub rvc: RvcId,
    pub table: VariantRequirementTable,
    pub relationship: LabeledGraph,
    pub conflict: LabeledGraph,
    pub coloring: RvcColoring,
    /// Exact minimum coloring, when the component fit the solver limit.
    pub exact: Option<RvcColoring>,
}

/// Everything the pipeline produced for one application.
#[derive(Clone, Debug)]
pub struct AppPlan {
    pub app: AppId,
    pub configurations: Vec<RichVariantConfiguration>,
    pub rvcs: Vec<RvcPlan>,
    pub distribution: Distribution,
    pub summary: CostSummary,
    pub report: PlanReport,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no configuration template for application {0}")]
    UnknownApp(AppId),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
}

/// Runs the full pipeline for one application.
pub fn plan_application(
    bundle: &Bundle,
    app: &AppId,
    options: &PlanOptions,
) -> Result<AppPlan, PlanError> {
    let template = bundle
        .template(app)
        .ok_or_else(|| PlanError::UnknownApp(app.clone()))?;
    let requirement_table = FunctionalityRequirementTable::from_bundle(bundle, app)?;
    let (tables, configurations) = translate(template, &requirement_table, &bundle.registry)?;

    let mut rvcs = Vec::with_capacity(tables.len());
    for table in tables {
        let relationship = build_relationship_graph(&table, &bundle.registry);
        let conflict = complement(&relationship);
        let coloring = match options.mode {
            Mode::SharedPool => greedy_color(&conflict),
            Mode::PerVariant => per_variant_color(&conflict),
        };
        let exact = exact_min_color(&conflict, options.mode, options.exact_limit).ok();
        rvcs.push(RvcPlan {
            rvc: table.rvc.clone(),
            table,
            relationship,
            conflict,
            coloring,
            exact,
        });
    }

    let distribution = assemble(
        app,
        rvcs.iter().map(|r| r.coloring.clone()).collect(),
        template,
        &configurations,
    )?;
    let summary = cost_summary(&distribution);
    let exact_per_rvc: Vec<Option<usize>> = distribution
        .colorings
        .iter()
        .map(|coloring| {
            rvcs.iter()
                .find(|r| r.rvc == coloring.rvc)
                .and_then(|r| r.exact.as_ref().map(RvcColoring::class_count))
        })
        .collect();
    let report = build_report(&distribution, &summary, &exact_per_rvc, options.mode);

    Ok(AppPlan {
        app: app.clone(),
        configurations,
        rvcs,
        distribution,
        summary,
        report,
    })
}

/// Plans every application that has a template, in template order.
pub fn plan_all(bundle: &Bundle, options: &PlanOptions) -> Result<Vec<AppPlan>, PlanError> {
    bundle
        .templates
        .iter()
        .map(|t| plan_application(bundle, &t.app, options))
        .collect()
}

// ---------------------------------------------------------------------------
// Explanation
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("unknown tenant {0}")]
    UnknownTenant(TenantId),
    #[error("unknown RVC {0}")]
    UnknownRvc(RvcId),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Finds the application whose template declares `rvc`.
pub fn app_of_rvc<'b>(bundle: &'b Bundle, rvc: &RvcId) -> Option<&'b AppId> {
    bundle
        .templates
        .iter()
        .find(|t| t.rvc(rvc).is_some())
        .map(|t| &t.app)
}

/// Builds the relationship and conflict graphs of one component without
/// coloring, for graph export.
pub fn graphs_for_rvc(
    bundle: &Bundle,
    rvc: &RvcId,
) -> Result<(LabeledGraph, LabeledGraph), ExplainError> {
    let app = app_of_rvc(bundle, rvc).ok_or_else(|| ExplainError::UnknownRvc(rvc.clone()))?;
    let template = bundle.template(app).expect("app found via template");
    let requirement_table =
        FunctionalityRequirementTable::from_bundle(bundle, app).map_err(PlanError::from)?;
    let (tables, _) =
        translate(template, &requirement_table, &bundle.registry).map_err(PlanError::from)?;
    let table = tables
        .into_iter()
        .find(|t| &t.rvc == rvc)
        .ok_or_else(|| ExplainError::UnknownRvc(rvc.clone()))?;
    let relationship = build_relationship_graph(&table, &bundle.registry);
    let conflict = complement(&relationship);
    Ok((relationship, conflict))
}

fn fold_step_rule(
    before: &AllowedSet,
    incoming: &SharingExpression,
    after: &AllowedSet,
) -> &'static str {
    match (expr::canonical_form(before), incoming) {
        (CanonicalForm::ShareWithAny, _) => "SWA + Z -> Z",
        (CanonicalForm::DontShareWithAny, _) => "DSWA + Z -> DSWA",
        (_, SharingExpression::ShareWithAny) => "SWA + Z -> Z",
        (_, SharingExpression::DontShareWithAny) => "DSWA + Z -> DSWA",
        (_, SharingExpression::DontShareWith(_)) => match expr::canonical_form(after) {
            CanonicalForm::DontShareWithAny => "DSW(X) + SWJ(X) -> DSWA",
            _ => "DSW(X) + SWJ(Y) -> SWJ(Y)",
        },
        (_, SharingExpression::ShareWithJust(_)) => match expr::canonical_form(after) {
            CanonicalForm::DontShareWithAny => "SWJ(X) + SWJ(Y) -> DSWA",
            _ => "SWJ(X) + SWJ(Y) -> SWJ(X∩Y)",
        },
    }
}

/// Renders the audit trail for one tenant on one component: contributing
/// expressions per variant, the fold to the final allowed set, conflict
/// neighbors, and the assigned instance.
pub fn explain(
    bundle: &Bundle,
    tenant: &TenantId,
    rvc: &RvcId,
    options: &PlanOptions,
) -> Result<String, ExplainError> {
    let declarer = bundle
        .registry
        .position(tenant)
        .ok_or_else(|| ExplainError::UnknownTenant(tenant.clone()))?;
    let app = app_of_rvc(bundle, rvc)
        .ok_or_else(|| ExplainError::UnknownRvc(rvc.clone()))?
        .clone();
    let template = bundle.template(&app).expect("app found via template");
    let requirement_table =
        FunctionalityRequirementTable::from_bundle(bundle, &app).map_err(PlanError::from)?;
    let plan = plan_application(bundle, &app, options)?;
    let rvc_plan = plan
        .rvcs
        .iter()
        .find(|r| &r.rvc == rvc)
        .ok_or_else(|| ExplainError::UnknownRvc(rvc.clone()))?;

    let registry = &bundle.registry;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "tenant {tenant} on RVC {rvc} (application {app}, mode {})",
        options.mode
    );

    for (v, variant) in rvc_plan.table.variants().iter().enumerate() {
        let _ = writeln!(out);
        if rvc_plan.table.cell_at(declarer, v).is_none() {
            let _ = writeln!(out, "variant {variant}: not used");
            continue;
        }
        let _ = writeln!(out, "variant {variant}:");

        // Contributing functionality-level expressions, in catalog order.
        let mut contributions: Vec<(&crate::model::FunctionalityId, &SharingExpression)> =
            Vec::new();
        for (cell_tenant, functionality, expressions) in requirement_table.cells() {
            if cell_tenant != tenant {
                continue;
            }
            let realizes = template
                .realization
                .get(functionality)
                .is_some_and(|pairs| pairs.contains(&(rvc.clone(), variant.clone())));
            if !realizes {
                continue;
            }
            if expressions.is_empty() {
                let _ = writeln!(out, "  {functionality}: default: SWAny");
            } else {
                for expression in expressions {
                    let _ = writeln!(out, "  {functionality}: {expression}");
                    contributions.push((functionality, expression));
                }
            }
        }

        // Fold trail, starting from the neutral default.
        let mut acc = AllowedSet::share_with_any(declarer, registry);
        for (functionality, expression) in &contributions {
            let resolved = expr::resolve_at(expression, declarer, registry)
                .map_err(|e| PlanError::Translate(e.into()))?;
            let folded = expr::combine(&acc, &resolved).expect("same declarer");
            let _ = writeln!(
                out,
                "  fold {functionality} {expression}: {} + {} -> {}  [{}]",
                acc.describe(registry),
                resolved.describe(registry),
                folded.describe(registry),
                fold_step_rule(&acc, expression, &folded),
            );
            acc = folded;
        }
        let cell = rvc_plan
            .table
            .cell_at(declarer, v)
            .expect("participation checked above");
        let _ = writeln!(out, "  allowed: {}", cell.describe(registry));

        // Conflict neighbors and the assigned instance.
        let conflict = &rvc_plan.conflict;
        let vertex = conflict
            .vertex_position(tenant)
            .expect("participant is a vertex");
        let neighbors: Vec<String> = conflict
            .participants(v)
            .iter()
            .filter(|&other| other != vertex && conflict.has_label(vertex, other, v))
            .map(|other| conflict.vertices()[other].to_string())
            .collect();
        let _ = writeln!(
            out,
            "  conflicts with: {}",
            if neighbors.is_empty() {
                "(none)".to_owned()
            } else {
                neighbors.join(", ")
            }
        );
        let instance = rvc_plan
            .coloring
            .class_of(vertex, v)
            .expect("covered by coloring");
        let _ = writeln!(out, "  instance: {instance}");
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Application, Catalog, ConfigurationTemplate, DeploymentCell, DeploymentRequirements,
        FunctionalRequirement, FunctionalityId, RawBundle, Rvc, Tenant, VariantId,
    };
    use std::collections::{BTreeMap, BTreeSet};

    fn small_bundle() -> Bundle {
        let mut catalog = Catalog::default();
        catalog
            .applications
            .push(Application::new("app", ["F1", "F2"]));
        let mut realization = BTreeMap::new();
        realization.insert(
            FunctionalityId::from("F1"),
            BTreeSet::from([(RvcId::from("R1"), VariantId::from("A"))]),
        );
        realization.insert(
            FunctionalityId::from("F2"),
            BTreeSet::from([
                (RvcId::from("R1"), VariantId::from("B")),
                (RvcId::from("R2"), VariantId::from("A")),
            ]),
        );
        let raw = RawBundle {
            catalog,
            templates: vec![ConfigurationTemplate {
                app: AppId::from("app"),
                rvcs: vec![Rvc::new("R1", ["A", "B"]), Rvc::new("R2", ["A"])],
                realization,
            }],
            tenants: vec![Tenant::new("T1"), Tenant::new("T2"), Tenant::new("T3")],
            functional: vec![
                FunctionalRequirement {
                    tenant: TenantId::from("T1"),
                    app: AppId::from("app"),
                    selected: BTreeSet::from([
                        FunctionalityId::from("F1"),
                        FunctionalityId::from("F2"),
                    ]),
                },
                FunctionalRequirement {
                    tenant: TenantId::from("T2"),
                    app: AppId::from("app"),
                    selected: BTreeSet::from([FunctionalityId::from("F1")]),
                },
                FunctionalRequirement {
                    tenant: TenantId::from("T3"),
                    app: AppId::from("app"),
                    selected: BTreeSet::from([FunctionalityId::from("F2")]),
                },
            ],
            deployment: vec![DeploymentRequirements {
                app: AppId::from("app"),
                cells: vec![DeploymentCell {
                    tenant: TenantId::from("T1"),
                    functionality: FunctionalityId::from("F1"),
                    expressions: vec!["DSW(T2)".to_owned()],
                }],
            }],
        };
        Bundle::from_raw(raw).expect("fixture validates").0
    }

    #[test]
    fn plans_every_component_and_audits() {
        let bundle = small_bundle();
        let plan = plan_application(&bundle, &AppId::from("app"), &PlanOptions::default()).unwrap();
        assert_eq!(plan.rvcs.len(), 2);
        assert!(plan.rvcs.iter().all(|r| r.exact.is_some()));
        assert!(plan.report.optimality.audited);
        // T1 and T2 both use R1.A but T1 refuses T2: two instances there,
        // everything else shares.
        let r1 = &plan.rvcs[0];
        assert_eq!(r1.coloring.class_count(), 2);
        let r2 = &plan.rvcs[1];
        assert_eq!(r2.coloring.class_count(), 1);
        assert_eq!(plan.distribution.total_instances, 3);
        assert_eq!(plan.report.optimality.exact, Some(3));
        assert_eq!(plan.report.optimality.gap, Some(0));
    }

    #[test]
    fn unknown_app_is_an_error() {
        let bundle = small_bundle();
        let err = plan_application(&bundle, &AppId::from("nope"), &PlanOptions::default());
        assert!(matches!(err, Err(PlanError::UnknownApp(_))));
    }

    #[test]
    fn explain_traces_defaults_folds_and_instances() {
        let bundle = small_bundle();
        let text = explain(
            &bundle,
            &TenantId::from("T1"),
            &RvcId::from("R1"),
            &PlanOptions::default(),
        )
        .unwrap();
        assert!(text.contains("variant A:"), "{text}");
        assert!(text.contains("F1: DSW(T2)"), "{text}");
        assert!(text.contains("SWA + Z -> Z"), "{text}");
        assert!(text.contains("conflicts with: T2"), "{text}");
        assert!(text.contains("default: SWAny"), "{text}");
        assert!(text.contains("instance: "), "{text}");

        // A tenant not using the component's variant reads "not used".
        let text = explain(
            &bundle,
            &TenantId::from("T2"),
            &RvcId::from("R1"),
            &PlanOptions::default(),
        )
        .unwrap();
        assert!(text.contains("variant B: not used"), "{text}");
    }

    #[test]
    fn explain_rejects_unknown_names() {
        let bundle = small_bundle();
        assert!(matches!(
            explain(
                &bundle,
                &TenantId::from("T9"),
                &RvcId::from("R1"),
                &PlanOptions::default()
            ),
            Err(ExplainError::UnknownTenant(_))
        ));
        assert!(matches!(
            explain(
                &bundle,
                &TenantId::from("T1"),
                &RvcId::from("R9"),
                &PlanOptions::default()
            ),
            Err(ExplainError::UnknownRvc(_))
        ));
    }

    #[test]
    fn graphs_for_rvc_exports_both_kinds() {
        let bundle = small_bundle();
        let (relationship, conflict) = graphs_for_rvc(&bundle, &RvcId::from("R1")).unwrap();
        // R1.A participants are T1 and T2 with a one-sided refusal: no
        // relationship edge, one conflict edge.
        let a = relationship
            .variant_position(&VariantId::from("A"))
            .unwrap();
        let t1 = relationship.vertex_position(&TenantId::from("T1")).unwrap();
        let t2 = relationship.vertex_position(&TenantId::from("T2")).unwrap();
        assert!(!relationship.has_label(t1, t2, a));
        assert!(conflict.has_label(t1, t2, a));
    }
}
