//! Deployment planning for multi-tenant applications assembled from shared,
//! multi-variant components.
//!
//! The library turns per-tenant sharing requirements ("don't share this
//! functionality with my competitors") into a concrete assignment of tenants
//! to component instances, using as few instances as the requirements allow:
//!
//! 1. [`model`] holds the input domain: tenants, the provider catalog,
//!    configuration templates mapping functionalities to component variants,
//!    and bundle validation.
//! 2. [`expr`] parses and evaluates the sharing-expression algebra
//!    (`SWAny` / `SWJ(..)` / `DSW(..)` / `DSWAny`).
//! 3. [`translate`] rewrites functionality-level requirements into
//!    per-component variant requirement tables.
//! 4. [`graph`] builds edge-labeled sharing-relationship graphs and their
//!    per-variant complements (conflict graphs).
//! 5. [`allocation`] colors conflict graphs to assign tenant/variant usages
//!    to instances, with an exact minimum solver for auditing the greedy
//!    result.
//! 6. [`report`] assembles per-application distributions, cost summaries,
//!    DOT exports, and JSON/text reports.
//! 7. [`simulate`] generates seeded random populations for property tests
//!    and optimality-gap sweeps.
//!
//! [`pipeline`] wires the stages together; [`schema`] defines the JSON file
//! formats consumed by the `rvplan` command-line tool.

pub mod allocation;
pub mod expr;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod schema;
pub mod simulate;
pub mod translate;
