//! Generator and sweep contracts: validator-clean output across many seeds,
//! the exact-solver limit, and the empirical effect of stricter populations.

use rvplan_core::model::{validate_bundle, Bundle};
use rvplan_core::pipeline::DEFAULT_EXACT_LIMIT;
use rvplan_core::simulate::{generate, sweep, ScenarioSpec, Strictness};

fn spec(seed: u64, tenants: usize, dswany: f64) -> ScenarioSpec {
    ScenarioSpec {
        tenants,
        seed,
        strictness: Strictness {
            swany: 0.9 - dswany,
            swj: 0.05,
            dsw: 0.05,
            dswany,
        },
        ..ScenarioSpec::default()
    }
}

#[test]
fn every_generated_bundle_is_validator_clean() {
    for seed in 0..1_000u64 {
        let s = ScenarioSpec {
            seed,
            tenants: 1 + (seed as usize % 17),
            rvcs: 1 + (seed as usize % 3),
            variants_per_rvc: 1 + (seed as usize % 4),
            selection_density: 0.3 + (seed % 7) as f64 * 0.1,
            ..ScenarioSpec::default()
        };
        let raw = generate(&s).unwrap();
        let report = validate_bundle(&raw);
        assert!(report.errors.is_empty(), "seed {seed}: {report}");
    }
}

#[test]
fn small_sweeps_always_carry_exact_counts() {
    let specs: Vec<ScenarioSpec> = (0..10)
        .map(|seed| spec(seed, 4 + seed as usize % 7, 0.1))
        .collect();
    let rows = sweep(&specs, DEFAULT_EXACT_LIMIT).unwrap();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        let exact = row.d_exact.expect("within solver limit");
        let gap = row.gap.expect("within solver limit");
        assert!(row.d_greedy >= exact);
        assert_eq!(gap, row.d_greedy - exact);
    }
}

#[test]
fn oversized_populations_skip_the_exact_solver() {
    let rows = sweep(&[spec(3, 40, 0.1)], DEFAULT_EXACT_LIMIT).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].d_exact, None);
    assert_eq!(rows[0].gap, None);
    assert!(rows[0].d_greedy >= 1);
}

/// Raising the all-refusal weight across otherwise identical scenarios must
/// not lower the mean exact instance count, checked over paired seeds.
#[test]
fn stricter_populations_need_more_instances_on_average() {
    let mean_exact = |dswany: f64| -> f64 {
        let specs: Vec<ScenarioSpec> = (0..30).map(|seed| spec(seed, 8, dswany)).collect();
        let rows = sweep(&specs, DEFAULT_EXACT_LIMIT).unwrap();
        let total: usize = rows.iter().map(|r| r.d_exact.expect("within limit")).sum();
        total as f64 / rows.len() as f64
    };
    let relaxed = mean_exact(0.0);
    let middling = mean_exact(0.4);
    let strict = mean_exact(0.9);
    assert!(
        relaxed <= middling && middling <= strict,
        "means not monotone: {relaxed} / {middling} / {strict}"
    );
}

/// Extreme strictness weights force the degenerate instance counts.
#[test]
fn pure_strictness_end_to_end() {
    let open = ScenarioSpec {
        tenants: 9,
        selection_density: 1.0,
        strictness: Strictness {
            swany: 1.0,
            swj: 0.0,
            dsw: 0.0,
            dswany: 0.0,
        },
        seed: 5,
        ..ScenarioSpec::default()
    };
    let (bundle, _) = Bundle::from_raw(generate(&open).unwrap()).unwrap();
    let plan = rvplan_core::pipeline::plan_application(
        &bundle,
        &rvplan_core::model::AppId::from("app"),
        &rvplan_core::pipeline::PlanOptions::default(),
    )
    .unwrap();
    for rvc in &plan.rvcs {
        assert!(rvc.coloring.class_count() <= 1);
    }

    let closed = ScenarioSpec {
        strictness: Strictness {
            swany: 0.0,
            swj: 0.0,
            dsw: 0.0,
            dswany: 1.0,
        },
        ..open
    };
    let (bundle, _) = Bundle::from_raw(generate(&closed).unwrap()).unwrap();
    let plan = rvplan_core::pipeline::plan_application(
        &bundle,
        &rvplan_core::model::AppId::from("app"),
        &rvplan_core::pipeline::PlanOptions::default(),
    )
    .unwrap();
    for rvc in &plan.rvcs {
        // Full selection makes every participant share every variant, so
        // refusing everyone costs one instance per participating tenant.
        assert_eq!(rvc.coloring.class_count(), rvc.coloring.vertices.len());
    }
}
