// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use ycel_core::dynamics::{self, MomentSystem, RoutePreference};
use ycel_core::entanglement::{
    covariance_from_moments, covariance_from_table, default_gains, optimize_gains, vlf_evaluate, witness, Bipartition,
};
use ycel_core::fock_oracle::{self, moments_from_state};
use ycel_core::{Backend, DensityState, FockConfig, Prefactors, SecondMoments};

fn triangle() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(mut u, mut v)| {
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let w = 1.0 - u - v;
        (u - v, u - w)
    })
}

fn stable_steady(a: f64, x: f64, y: f64) -> Option<SecondMoments> {
    let p = Prefactors::from_inversions(a, x, y).ok()?;
    let sys = MomentSystem::new(&p, 1.0, Backend::Ehrenfest);
    if sys.stability().margin < 1e-3 {
        return None;
    }
    sys.steady_state().ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn added_noise_never_lowers_a_witness((x, y) in triangle(), a in 0.05..1.5f64, mode in 0usize..3, delta in 1e-3..1.0f64) {
        let Some(m) = stable_steady(a, x, y) else { return Ok(()) };
        let mut noisy = m;
        match mode {
            0 => noisy.n1 += delta,
            1 => noisy.n2 += delta,
            _ => noisy.n3 += delta,
        }
        let (c, cn) = (covariance_from_moments(&m), covariance_from_moments(&noisy));
        let fixed = vlf_evaluate(&c, &default_gains()).unwrap();
        let fixed_noisy = vlf_evaluate(&cn, &default_gains()).unwrap();
        let opt = witness(&m, true);
        let opt_noisy = witness(&noisy, true);
        for b in Bipartition::ALL {
            prop_assert!(fixed_noisy.record(b).lhs >= fixed.record(b).lhs);
            prop_assert!(opt_noisy.record(b).ratio() >= opt.record(b).ratio() - 1e-12);
        }
    }

    #[test]
    fn swap_exchanges_modes_two_and_three((x, y) in triangle(), a in 0.05..1.5f64, t in 0.0..20.0f64) {
        let p = Prefactors::from_inversions(a, x, y).unwrap();
        let q = Prefactors::from_inversions(a, y, x).unwrap();
        let st = dynamics::is_stable(&dynamics::drift_matrix(&p, 1.0));
        prop_assume!(st.margin > -0.05);
        let m = dynamics::evolve_second_moments(&p, 1.0, t, Backend::Ehrenfest, None).unwrap().value;
        let n = dynamics::evolve_second_moments(&q, 1.0, t, Backend::Ehrenfest, None).unwrap().value;
        prop_assert!(m.swapped().max_rel_diff(&n, 1e-9) < 1e-8, "{m:?} vs {n:?}");
        let (r, s) = (witness(&m, true), witness(&n, true));
        for b in Bipartition::ALL {
            prop_assert!((r.record(b).ratio() - s.record(b.swapped()).ratio()).abs() < 1e-6);
        }
    }

    #[test]
    fn no_false_violation_without_mode_one_correlations(
        n1 in 0.0..2.0f64, n2 in 0.0..2.0f64, n3 in 0.0..2.0f64, rho in -1.0..1.0f64,
    ) {
        let m = SecondMoments { n1, n2, n3, c32: rho * (n2 * n3).sqrt(), c31: 0.0, c21: 0.0 };
        let rep = witness(&m, true);
        for r in rep.records {
            prop_assert!(r.lhs >= r.bound - 1e-9, "{:?}", r);
        }
    }

    #[test]
    fn optimized_ratio_dominates_defaults((x, y) in triangle(), a in 0.05..1.5f64) {
        let Some(m) = stable_steady(a, x, y) else { return Ok(()) };
        let cov = covariance_from_moments(&m);
        let d = vlf_evaluate(&cov, &default_gains()).unwrap();
        let o = vlf_evaluate(&cov, &optimize_gains(&cov)).unwrap();
        for (rd, ro) in d.ratios().iter().zip(o.ratios()) {
            prop_assert!(ro <= rd + 1e-9);
        }
    }
}

#[test]
fn scaling_covariance_by_one_is_deterministic() {
    let m = stable_steady(0.5, 0.1, 0.2).unwrap();
    let cov = covariance_from_moments(&m);
    let scaled = ycel_core::CovarianceMatrix(cov.0 * 1.0);
    assert_eq!(optimize_gains(&cov), optimize_gains(&scaled));
}

// Oracle at a moderate truncation, shared by the checks below.
fn oracle_at(x: f64, y: f64, n_max: [usize; 3], t: f64) -> (fock_oracle::OracleRun, Prefactors) {
    let p = Prefactors::from_inversions(0.5, x, y).unwrap();
    let cfg = FockConfig {
        n_max,
        t_final: t,
        samples: 1,
        ..FockConfig::default()
    };
    let rho = DensityState::vacuum(&cfg).unwrap();
    (fock_oracle::integrate(&rho, &cfg, &p, 1.0).unwrap(), p)
}

#[test]
fn witness_from_oracle_matches_moment_dynamics() {
    for (x, y, n) in [(0.0, 0.0, 8), (0.25, 0.25, 7)] {
        let (run, p) = oracle_at(x, y, [n; 3], 5.0);
        let state = &run.final_state;
        let cov_oracle = covariance_from_table(&moments_from_state(state));
        assert!(cov_oracle.min_variance() >= 1.0 - 1e-9);
        let m = MomentSystem::new(&p, 1.0, Backend::Ehrenfest)
            .trajectory(&[5.0], &SecondMoments::VACUUM, RoutePreference::Auto)
            .unwrap()
            .value[0];
        let cov_moments = covariance_from_moments(&m);
        let gains = optimize_gains(&cov_moments);
        let a = vlf_evaluate(&cov_oracle, &gains).unwrap();
        let b = vlf_evaluate(&cov_moments, &gains).unwrap();
        for (ra, rb) in a.ratios().iter().zip(b.ratios()) {
            assert!((ra - rb).abs() / rb.abs() < 2e-3, "({x},{y}): {ra} vs {rb}");
        }
    }
}

#[test]
fn oracle_state_is_a_density_matrix() {
    let (run, _) = oracle_at(0.0, 0.5, [9; 3], 5.0);
    assert!(run.final_state.hermiticity_residue() < 1e-12);
    assert!((run.final_state.trace().re - 1.0).abs() < 1e-9);
    assert!(run.min_eigenvalue.unwrap() >= fock_oracle::NEGATIVITY_TOL);
    assert!(run.warnings.is_empty());
    assert!(run.convergence_residue.unwrap() < 1e-6);
}

#[test]
fn imported_block_diagonal_state_uses_charge_blocks() {
    let cfg = FockConfig {
        n_max: [2, 2, 2],
        layout: fock_oracle::LayoutMode::Dense,
        ..FockConfig::default()
    };
    let dense = DensityState::vacuum(&cfg).unwrap();
    let back = DensityState::from_matrix([2, 2, 2], &dense.to_matrix(), fock_oracle::LayoutMode::Auto).unwrap();
    assert!(back.layout().is_sectored());
    let mut m = dense.to_matrix();
    // Coherence between |000⟩ and |001⟩ (charges 0 and 1).
    m[(0, 1)] = num_complex::Complex64::new(0.1, 0.0);
    m[(1, 0)] = num_complex::Complex64::new(0.1, 0.0);
    let mixed = DensityState::from_matrix([2, 2, 2], &m, fock_oracle::LayoutMode::Auto).unwrap();
    assert!(!mixed.layout().is_sectored());
    assert_eq!(mixed.get(0, 1).re, 0.1);
}

#[test]
fn paper_literal_backend_departs_from_oracle_in_n1() {
    // With ρ₀₀ > 0 the literal diffusion entry drives ⟨â₁†â₁⟩ below zero.
    let (run, p) = oracle_at(0.0, 0.0, [8; 3], 5.0);
    let oracle = run.samples.last().unwrap().closure();
    let lit = dynamics::evolve_second_moments(&p, 1.0, 5.0, Backend::PaperLiteral, None).unwrap().value;
    assert!((lit.n1 - oracle.n1).abs() > 1e-2);
    assert!(lit.n1 < 0.0);
}
