//! Distribution assembly, cost summaries, DOT export, and plan reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::{Mode, RvcColoring};
use crate::graph::LabeledGraph;
use crate::model::{AppId, ConfigurationTemplate, RvcId, TenantId, VariantId};
use crate::translate::RichVariantConfiguration;

/// The application-level outcome: one coloring per component plus the
/// transposed per-tenant view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub app: AppId,
    /// Colorings in template order.
    pub colorings: Vec<RvcColoring>,
    /// Sum of class counts across components.
    pub total_instances: usize,
    /// tenant -> component -> (variant, instance index) usages.
    pub per_tenant_view: BTreeMap<TenantId, BTreeMap<RvcId, BTreeSet<(VariantId, usize)>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AssembleError {
    #[error("no coloring for RVC {0}")]
    MissingColoring(RvcId),
    #[error("more than one coloring for RVC {0}")]
    DuplicateColoring(RvcId),
    #[error("coloring for RVC {0} which the template does not declare")]
    UnknownRvc(RvcId),
    #[error("tenant {tenant} requires {rvc}.{variant} but no instance serves it")]
    CoverageGap {
        tenant: TenantId,
        rvc: RvcId,
        variant: VariantId,
    },
}

/// Combines per-component colorings into the application distribution,
/// verifying that every variant each tenant's configuration pulls in is
/// actually served by some instance.
pub fn assemble(
    app: &AppId,
    colorings: Vec<RvcColoring>,
    template: &ConfigurationTemplate,
    configurations: &[RichVariantConfiguration],
) -> Result<Distribution, AssembleError> {
    let mut by_rvc: BTreeMap<&RvcId, &RvcColoring> = BTreeMap::new();
    for coloring in &colorings {
        if template.rvc(&coloring.rvc).is_none() {
            return Err(AssembleError::UnknownRvc(coloring.rvc.clone()));
        }
        if by_rvc.insert(&coloring.rvc, coloring).is_some() {
            return Err(AssembleError::DuplicateColoring(coloring.rvc.clone()));
        }
    }
    for rvc in &template.rvcs {
        if !by_rvc.contains_key(&rvc.id) {
            return Err(AssembleError::MissingColoring(rvc.id.clone()));
        }
    }

    for config in configurations {
        for (rvc_id, variants) in &config.variants_used {
            let coloring = by_rvc
                .get(rvc_id)
                .ok_or_else(|| AssembleError::MissingColoring(rvc_id.clone()))?;
            for variant in variants {
                let covered = coloring
                    .vertices
                    .iter()
                    .position(|t| t == &config.tenant)
                    .zip(coloring.variants.iter().position(|v| v == variant))
                    .is_some_and(|(t, v)| coloring.assignment.contains_key(&(t, v)));
                if !covered {
                    return Err(AssembleError::CoverageGap {
                        tenant: config.tenant.clone(),
                        rvc: rvc_id.clone(),
                        variant: variant.clone(),
                    });
                }
            }
        }
    }

    let mut per_tenant_view: BTreeMap<TenantId, BTreeMap<RvcId, BTreeSet<(VariantId, usize)>>> =
        BTreeMap::new();
    for coloring in &colorings {
        for (&(vertex, variant), &class) in &coloring.assignment {
            per_tenant_view
                .entry(coloring.vertices[vertex].clone())
                .or_default()
                .entry(coloring.rvc.clone())
                .or_default()
                .insert((coloring.variants[variant].clone(), class));
        }
    }

    // Order colorings by template declaration.
    let mut ordered = colorings;
    ordered.sort_by_key(|c| template.rvcs.iter().position(|r| r.id == c.rvc));

    Ok(Distribution {
        app: app.clone(),
        total_instances: ordered.iter().map(RvcColoring::class_count).sum(),
        colorings: ordered,
        per_tenant_view,
    })
}

/// Instance counts against the two straw baselines: one instance per
/// (component, participating tenant) as in single tenancy, and one instance
/// per used component as in pure multi-tenancy.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSummary {
    pub instances: usize,
    pub single_tenancy_baseline: usize,
    pub pure_mt_baseline: usize,
    /// `1 - instances / single_tenancy_baseline`; in [0, 1] for shared-pool
    /// colorings. Per-variant colorings can exceed the single-tenancy count
    /// and then report a negative ratio.
    pub savings_ratio: f64,
}

pub fn cost_summary(distribution: &Distribution) -> CostSummary {
    let instances = distribution.total_instances;
    let single_tenancy_baseline: usize = distribution
        .colorings
        .iter()
        .map(|c| c.vertices.len())
        .sum();
    let pure_mt_baseline = distribution
        .colorings
        .iter()
        .filter(|c| !c.vertices.is_empty())
        .count();
    let savings_ratio = if single_tenancy_baseline == 0 {
        0.0
    } else {
        1.0 - instances as f64 / single_tenancy_baseline as f64
    };
    CostSummary {
        instances,
        single_tenancy_baseline,
        pure_mt_baseline,
        savings_ratio,
    }
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Relationship,
    Conflict,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Relationship => "relationship",
            GraphKind::Conflict => "conflict",
        }
    }
}

impl std::str::FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relationship" => Ok(GraphKind::Relationship),
            "conflict" => Ok(GraphKind::Conflict),
            other => Err(format!(
                "unknown graph kind {other:?} (expected relationship or conflict)"
            )),
        }
    }
}

fn dot_quote(id: &str) -> String {
    let escaped = id.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

/// Renders a graph in DOT format with deterministic vertex and edge order.
///
/// The `label` attribute lists the edge's variants; it is omitted when the
/// edge covers every variant both endpoints participate in, matching the
/// label-free drawing convention for fully shared pairs.
pub fn export_dot(graph: &LabeledGraph, kind: GraphKind) -> String {
    let mut out = String::new();
    let name = format!("{} {}", kind.as_str(), graph.rvc());
    let _ = writeln!(out, "graph {} {{", dot_quote(&name));
    for tenant in graph.vertices() {
        let _ = writeln!(out, "  {};", dot_quote(tenant.as_str()));
    }
    for ((a, b), mask) in graph.edges_sorted() {
        let lhs = dot_quote(graph.vertices()[a].as_str());
        let rhs = dot_quote(graph.vertices()[b].as_str());
        if mask == graph.shared_participation_mask(a, b) {
            let _ = writeln!(out, "  {lhs} -- {rhs};");
        } else {
            let labels: Vec<&str> = graph
                .mask_labels(mask)
                .into_iter()
                .map(VariantId::as_str)
                .collect();
            let _ = writeln!(
                out,
                "  {lhs} -- {rhs} [label={}];",
                dot_quote(&labels.join(","))
            );
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Machine-readable plan report; field order is the wire format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub app: AppId,
    pub mode: String,
    pub rvcs: Vec<RvcReport>,
    pub totals: ReportTotals,
    pub optimality: OptimalityReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RvcReport {
    pub rvc: RvcId,
    pub instances: Vec<InstanceReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub index: usize,
    pub members: Vec<MemberReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReport {
    pub tenant: TenantId,
    pub variant: VariantId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportTotals {
    pub instances: usize,
    pub single_tenancy: usize,
    pub pure_mt: usize,
    pub savings_ratio: f64,
}

/// Result of auditing the greedy coloring against the exact solver; `exact`
/// and `gap` are null unless every component fit within the solver limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub audited: bool,
    pub exact: Option<usize>,
    pub gap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(format!("unknown format {other:?} (expected json or text)")),
        }
    }
}

/// Builds the report structure from a distribution, its cost summary, and
/// the per-component exact instance counts (aligned with the distribution's
/// colorings; `None` where the solver was skipped).
pub fn build_report(
    distribution: &Distribution,
    summary: &CostSummary,
    exact_per_rvc: &[Option<usize>],
    mode: Mode,
) -> PlanReport {
    let rvcs = distribution
        .colorings
        .iter()
        .map(|coloring| RvcReport {
            rvc: coloring.rvc.clone(),
            instances: coloring
                .classes
                .iter()
                .map(|class| InstanceReport {
                    index: class.index,
                    members: class
                        .members
                        .iter()
                        .map(|&(t, v)| MemberReport {
                            tenant: coloring.vertices[t].clone(),
                            variant: coloring.variants[v].clone(),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();

    let audited = exact_per_rvc.iter().all(Option::is_some);
    let exact = audited.then(|| exact_per_rvc.iter().map(|e| e.unwrap_or(0)).sum());
    let gap = exact.map(|e: usize| distribution.total_instances.saturating_sub(e));

    PlanReport {
        app: distribution.app.clone(),
        mode: mode.to_string(),
        rvcs,
        totals: ReportTotals {
            instances: summary.instances,
            single_tenancy: summary.single_tenancy_baseline,
            pure_mt: summary.pure_mt_baseline,
            savings_ratio: summary.savings_ratio,
        },
        optimality: OptimalityReport {
            audited,
            exact,
            gap,
        },
    }
}

/// Serializes a report with stable field order; JSON output is byte-stable
/// for identical inputs.
pub fn render_report(report: &PlanReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out =
                serde_json::to_string_pretty(report).expect("report serialization is infallible");
            out.push('\n');
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "application: {}", report.app);
            let _ = writeln!(out, "mode: {}", report.mode);
            for rvc in &report.rvcs {
                let _ = writeln!(out, "RVC {}: {} instance(s)", rvc.rvc, rvc.instances.len());
                for instance in &rvc.instances {
                    let members: Vec<String> = instance
                        .members
                        .iter()
                        .map(|m| format!("{}.{}", m.tenant, m.variant))
                        .collect();
                    let _ = writeln!(out, "  instance {}: {}", instance.index, members.join(", "));
                }
            }
            let _ = writeln!(
                out,
                "totals: instances={} single_tenancy={} pure_mt={} savings_ratio={:.4}",
                report.totals.instances,
                report.totals.single_tenancy,
                report.totals.pure_mt,
                report.totals.savings_ratio
            );
            let _ = writeln!(
                out,
                "optimality: audited={} exact={} gap={}",
                report.optimality.audited,
                report
                    .optimality
                    .exact
                    .map_or("null".to_owned(), |e| e.to_string()),
                report
                    .optimality
                    .gap
                    .map_or("null".to_owned(), |g| g.to_string()),
            );
            out
        }
    }
}
