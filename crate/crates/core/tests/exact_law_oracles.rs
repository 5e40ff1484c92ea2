//! Cross-validation of the determinant law and the finite-set series
//! against the uniformized CTMC, which knows nothing about contour
//! integrals: agreement pins down signs, conventions, and normalization.

use asep_core::exact_law::{
    prob_position, prob_position_finite_start, ProbOptions, TimeConvention,
};
use asep_core::sim::{bernoulli_window_for_current, exact_ctmc_law, CtmcInitial};
use asep_core::ModelParams;

fn standard() -> ModelParams {
    ModelParams::new(0.3, 0.7, 0.5).unwrap()
}

#[test]
fn finite_start_single_particle_matches_ctmc() {
    // one particle from site 0: the series must reproduce the exact
    // biased-walk law to quadrature accuracy
    let params = standard();
    let lattice = (-12, 12);
    let table = exact_ctmc_law(&CtmcInitial::PointMass(vec![0]), lattice, 1.0, &params).unwrap();
    for x in -5..=4i64 {
        let series = prob_position_finite_start(&[0], 1, x, 1.0, params).unwrap();
        let ctmc = table.prob_mth_particle_at(1, x);
        assert!(
            (series - ctmc).abs() < 1e-8,
            "x={x}: series {series} vs ctmc {ctmc}"
        );
    }
}

#[test]
fn finite_start_two_particles_matches_ctmc() {
    let params = standard();
    let lattice = (-10, 12);
    for (t, x_range) in [(0.5, -2..=4i64), (1.0, -3..=4i64)] {
        let table =
            exact_ctmc_law(&CtmcInitial::PointMass(vec![1, 2]), lattice, t, &params).unwrap();
        for m in 1..=2u32 {
            for x in x_range.clone() {
                let series = prob_position_finite_start(&[1, 2], m, x, t, params).unwrap();
                let ctmc = table.prob_mth_particle_at(m, x);
                assert!(
                    (series - ctmc).abs() < 1e-6,
                    "t={t} m={m} x={x}: {series} vs {ctmc}"
                );
            }
        }
    }
}

#[test]
fn finite_start_three_particles_matches_ctmc() {
    let params = standard();
    let lattice = (-8, 12);
    let y = vec![1i64, 2, 4];
    let t = 0.5;
    let table = exact_ctmc_law(&CtmcInitial::PointMass(y.clone()), lattice, t, &params).unwrap();
    for (m, x) in [(1u32, 0i64), (2, 2), (3, 4), (3, 3)] {
        let series = prob_position_finite_start(&y, m, x, t, params).unwrap();
        let ctmc = table.prob_mth_particle_at(m, x);
        assert!(
            (series - ctmc).abs() < 1e-6,
            "m={m} x={x}: series {series} vs ctmc {ctmc}"
        );
    }
}

#[test]
fn determinant_law_matches_bernoulli_ctmc_spot() {
    // the named spot check: m=1, x=0, t=1
    let params = standard();
    let ev = prob_position(
        1,
        0,
        1.0,
        params,
        TimeConvention::Raw,
        &ProbOptions::default(),
    )
    .unwrap();
    let window = bernoulli_window_for_current(0);
    let table = exact_ctmc_law(&CtmcInitial::BernoulliWindow, window, 1.0, &params).unwrap();
    let ctmc = table.prob_current_at_least(0, 1);
    assert!(
        (ev.probability - ctmc).abs() < 1e-4,
        "{} vs {ctmc}",
        ev.probability
    );
    // the two routes actually agree far below the required 1e-4
    assert!((ev.probability - ctmc).abs() < 1e-6);
}
