//! JSON file formats consumed and produced by the `rvplan` tool.
//!
//! One document per input kind, each carrying an explicit `"rv_schema": 1`
//! version field: catalog, configuration template, tenant registry,
//! functional requirements, and deployment requirements. Sharing
//! expressions appear as plain strings in the expression grammar and are
//! parsed downstream. Unknown fields are rejected so typos surface as parse
//! errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AppId, Application, Catalog, ConfigurationTemplate, DeploymentCell, DeploymentRequirements,
    FunctionalRequirement, FunctionalityId, RawBundle, Rvc, RvcId, Tenant, TenantId, VariantId,
};
use crate::simulate::ScenarioSpec;

pub const RV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unsupported rv_schema {0} (this tool reads version {RV_SCHEMA_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn check_version(version: u32) -> Result<(), SchemaError> {
    if version == RV_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(SchemaError::Version(version))
    }
}

// ---------------------------------------------------------------------------
// Wire structs
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    rv_schema: u32,
    applications: Vec<ApplicationEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApplicationEntry {
    id: String,
    functionalities: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    variation_points: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    rv_schema: u32,
    app: String,
    rvcs: Vec<RvcEntry>,
    realization: BTreeMap<String, Vec<RealizationPair>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RvcEntry {
    id: String,
    variants: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationPair {
    rvc: String,
    variant: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    rv_schema: u32,
    tenants: Vec<TenantEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TenantEntry {
    id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    partners: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    competitors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalFile {
    rv_schema: u32,
    app: String,
    selections: Vec<SelectionEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionEntry {
    tenant: String,
    functionalities: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeploymentFile {
    rv_schema: u32,
    app: String,
    cells: Vec<CellEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellEntry {
    tenant: String,
    functionality: String,
    expressions: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    rv_schema: u32,
    scenarios: Vec<ScenarioSpec>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_catalog(json: &str) -> Result<Catalog, SchemaError> {
    let file: CatalogFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    Ok(Catalog {
        applications: file
            .applications
            .into_iter()
            .map(|a| Application {
                id: AppId::new(a.id),
                functionalities: a
                    .functionalities
                    .into_iter()
                    .map(FunctionalityId::new)
                    .collect(),
                variation_points: a
                    .variation_points
                    .into_iter()
                    .map(|(f, text)| (FunctionalityId::new(f), text))
                    .collect(),
            })
            .collect(),
    })
}

pub fn parse_template(json: &str) -> Result<ConfigurationTemplate, SchemaError> {
    let file: TemplateFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    Ok(ConfigurationTemplate {
        app: AppId::new(file.app),
        rvcs: file
            .rvcs
            .into_iter()
            .map(|r| Rvc {
                id: RvcId::new(r.id),
                variants: r.variants.into_iter().map(VariantId::new).collect(),
            })
            .collect(),
        realization: file
            .realization
            .into_iter()
            .map(|(f, pairs)| {
                (
                    FunctionalityId::new(f),
                    pairs
                        .into_iter()
                        .map(|p| (RvcId::new(p.rvc), VariantId::new(p.variant)))
                        .collect(),
                )
            })
            .collect(),
    })
}

pub fn parse_registry(json: &str) -> Result<Vec<Tenant>, SchemaError> {
    let file: RegistryFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    Ok(file
        .tenants
        .into_iter()
        .map(|t| Tenant {
            id: TenantId::new(t.id),
            partners: t.partners.into_iter().map(TenantId::new).collect(),
            competitors: t.competitors.into_iter().map(TenantId::new).collect(),
        })
        .collect())
}

pub fn parse_functional(json: &str) -> Result<Vec<FunctionalRequirement>, SchemaError> {
    let file: FunctionalFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    let app = AppId::new(file.app);
    Ok(file
        .selections
        .into_iter()
        .map(|s| FunctionalRequirement {
            tenant: TenantId::new(s.tenant),
            app: app.clone(),
            selected: s
                .functionalities
                .into_iter()
                .map(FunctionalityId::new)
                .collect(),
        })
        .collect())
}

pub fn parse_deployment(json: &str) -> Result<DeploymentRequirements, SchemaError> {
    let file: DeploymentFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    Ok(DeploymentRequirements {
        app: AppId::new(file.app),
        cells: file
            .cells
            .into_iter()
            .map(|c| DeploymentCell {
                tenant: TenantId::new(c.tenant),
                functionality: FunctionalityId::new(c.functionality),
                expressions: c.expressions,
            })
            .collect(),
    })
}

pub fn parse_scenarios(json: &str) -> Result<Vec<ScenarioSpec>, SchemaError> {
    let file: BenchFile = serde_json::from_str(json)?;
    check_version(file.rv_schema)?;
    Ok(file.scenarios)
}

/// The textual contents of one bundle's input files.
#[derive(Clone, Debug, Default)]
pub struct BundleSources {
    pub catalog: String,
    pub templates: Vec<String>,
    pub registry: String,
    pub functional: Vec<String>,
    pub deployment: Vec<String>,
}

/// Parses a set of input documents into a raw bundle.
pub fn parse_bundle(sources: &BundleSources) -> Result<RawBundle, SchemaError> {
    let mut raw = RawBundle {
        catalog: parse_catalog(&sources.catalog)?,
        tenants: parse_registry(&sources.registry)?,
        ..RawBundle::default()
    };
    for template in &sources.templates {
        raw.templates.push(parse_template(template)?);
    }
    for functional in &sources.functional {
        raw.functional.extend(parse_functional(functional)?);
    }
    for deployment in &sources.deployment {
        raw.deployment.push(parse_deployment(deployment)?);
    }
    Ok(raw)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("wire structs serialize");
    out.push('\n');
    out
}

pub fn render_catalog(catalog: &Catalog) -> String {
    pretty(&CatalogFile {
        rv_schema: RV_SCHEMA_VERSION,
        applications: catalog
            .applications
            .iter()
            .map(|a| ApplicationEntry {
                id: a.id.to_string(),
                functionalities: a.functionalities.iter().map(ToString::to_string).collect(),
                variation_points: a
                    .variation_points
                    .iter()
                    .map(|(f, text)| (f.to_string(), text.clone()))
                    .collect(),
            })
            .collect(),
    })
}

pub fn render_template(template: &ConfigurationTemplate) -> String {
    pretty(&TemplateFile {
        rv_schema: RV_SCHEMA_VERSION,
        app: template.app.to_string(),
        rvcs: template
            .rvcs
            .iter()
            .map(|r| RvcEntry {
                id: r.id.to_string(),
                variants: r.variants.iter().map(ToString::to_string).collect(),
            })
            .collect(),
        realization: template
            .realization
            .iter()
            .map(|(f, pairs)| {
                (
                    f.to_string(),
                    pairs
                        .iter()
                        .map(|(rvc, variant)| RealizationPair {
                            rvc: rvc.to_string(),
                            variant: variant.to_string(),
                        })
                        .collect(),
                )
            })
            .collect(),
    })
}

pub fn render_registry(tenants: &[Tenant]) -> String {
    pretty(&RegistryFile {
        rv_schema: RV_SCHEMA_VERSION,
        tenants: tenants
            .iter()
            .map(|t| TenantEntry {
                id: t.id.to_string(),
                partners: t.partners.iter().map(ToString::to_string).collect(),
                competitors: t.competitors.iter().map(ToString::to_string).collect(),
            })
            .collect(),
    })
}

pub fn render_functional(app: &AppId, requirements: &[&FunctionalRequirement]) -> String {
    pretty(&FunctionalFile {
        rv_schema: RV_SCHEMA_VERSION,
        app: app.to_string(),
        selections: requirements
            .iter()
            .map(|r| SelectionEntry {
                tenant: r.tenant.to_string(),
                functionalities: r.selected.iter().map(ToString::to_string).collect(),
            })
            .collect(),
    })
}

pub fn render_deployment(deployment: &DeploymentRequirements) -> String {
    pretty(&DeploymentFile {
        rv_schema: RV_SCHEMA_VERSION,
        app: deployment.app.to_string(),
        cells: deployment
            .cells
            .iter()
            .map(|c| CellEntry {
                tenant: c.tenant.to_string(),
                functionality: c.functionality.to_string(),
                expressions: c.expressions.clone(),
            })
            .collect(),
    })
}

/// Renders a raw bundle back into one document per input kind, suitable for
/// writing fixture files. Functional and deployment documents are grouped
/// per application, in catalog order.
pub fn render_bundle(raw: &RawBundle) -> BundleSources {
    let mut sources = BundleSources {
        catalog: render_catalog(&raw.catalog),
        registry: render_registry(&raw.tenants),
        ..BundleSources::default()
    };
    for template in &raw.templates {
        sources.templates.push(render_template(template));
    }
    for app in raw.catalog.applications.iter().map(|a| &a.id) {
        let requirements: Vec<&FunctionalRequirement> =
            raw.functional.iter().filter(|r| &r.app == app).collect();
        if !requirements.is_empty() {
            sources
                .functional
                .push(render_functional(app, &requirements));
        }
    }
    for deployment in &raw.deployment {
        sources.deployment.push(render_deployment(deployment));
    }
    sources
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_bundle;
    use crate::simulate::{generate, ScenarioSpec};

    #[test]
    fn bundle_round_trips_through_documents() {
        let raw = generate(&ScenarioSpec::default()).unwrap();
        let sources = render_bundle(&raw);
        let parsed = parse_bundle(&sources).unwrap();
        assert_eq!(format!("{parsed:?}"), format!("{raw:?}"));
        assert!(validate_bundle(&parsed).errors.is_empty());
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let err = parse_catalog(r#"{"rv_schema": 2, "applications": []}"#).unwrap_err();
        assert!(matches!(err, SchemaError::Version(2)));
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = parse_catalog(r#"{"rv_schema": 1, "applications": [], "extra": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn parses_the_documented_shapes() {
        let catalog = parse_catalog(
            r#"{
              "rv_schema": 1,
              "applications": [
                {"id": "shop", "functionalities": ["F1"], "variation_points": {"F1": "optional audit trail"}}
              ]
            }"#,
        )
        .unwrap();
        assert_eq!(catalog.applications.len(), 1);

        let template = parse_template(
            r#"{
              "rv_schema": 1,
              "app": "shop",
              "rvcs": [{"id": "R1", "variants": ["A", "B"]}],
              "realization": {"F1": [{"rvc": "R1", "variant": "A"}]}
            }"#,
        )
        .unwrap();
        assert_eq!(template.rvcs[0].variants.len(), 2);

        let tenants = parse_registry(
            r#"{"rv_schema": 1, "tenants": [{"id": "T1", "partners": ["T2"]}, {"id": "T2"}]}"#,
        )
        .unwrap();
        assert_eq!(tenants[0].partners.len(), 1);

        let functional = parse_functional(
            r#"{"rv_schema": 1, "app": "shop", "selections": [{"tenant": "T1", "functionalities": ["F1"]}]}"#,
        )
        .unwrap();
        assert_eq!(functional[0].app, AppId::from("shop"));

        let deployment = parse_deployment(
            r#"{"rv_schema": 1, "app": "shop", "cells": [{"tenant": "T1", "functionality": "F1", "expressions": ["DSW(Cp)"]}]}"#,
        )
        .unwrap();
        assert_eq!(deployment.cells[0].expressions[0], "DSW(Cp)");
    }
}
