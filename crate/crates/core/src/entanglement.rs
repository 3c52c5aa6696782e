// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature covariance matrices and variance-sum tripartite inseparability
//! witnesses.
//!
//! Conventions: `xⱼ = âⱼ + âⱼ†`, `pⱼ = −i(âⱼ − âⱼ†)`, so `[x, p] = 2i` and the
//! vacuum variance of each quadrature is 1. For a bipartition `(m | k, l)` and
//! real gains `h`, `g` the witness compares
//!
//! ```text
//! V(h₁x₁ + h₂x₂ + h₃x₃) + V(g₁p₁ + g₂p₂ + g₃p₃)
//!     ≥ 2 (|h_m g_m| + |h_k g_k + h_l g_l|)
//! ```
//!
//! which holds for every state separable across that bipartition.

use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, Backend, SecondMoments};
use crate::fock_oracle::MomentTable;
use crate::model::{validate_physical, Prefactors};

/// Violation margin: `lhs < bound − VIOLATION_TOL`.
pub const VIOLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntanglementError {
    #[error("degenerate witness for bipartition {0}: gains give a nonpositive bound")]
    DegenerateWitness(Bipartition),
}

/// Quadrature covariance over `(x₁, p₁, x₂, p₂, x₃, p₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix6<f64>);

impl CovarianceMatrix {
    pub fn vacuum() -> Self {
        Self(Matrix6::identity())
    }

    pub fn x_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[(2 * i, 2 * j)])
    }

    pub fn p_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[(2 * i + 1, 2 * j + 1)])
    }

    /// Smallest quadrature variance.
    pub fn min_variance(&self) -> f64 {
        self.0.diagonal().min()
    }
}

/// Covariance of a state with zero mean and real closure moments.
pub fn covariance_from_moments(m: &SecondMoments) -> CovarianceMatrix {
    let mut s = Matrix6::zeros();
    let n = [m.n1, m.n2, m.n3];
    for j in 0..3 {
        s[(2 * j, 2 * j)] = 1.0 + 2.0 * n[j];
        s[(2 * j + 1, 2 * j + 1)] = 1.0 + 2.0 * n[j];
    }
    // (mode i, mode j, ⟨xᵢxⱼ⟩, ⟨pᵢpⱼ⟩)
    for (i, j, xx, pp) in [
        (2, 1, 2.0 * m.c32, 2.0 * m.c32),
        (2, 0, 2.0 * m.c31, -2.0 * m.c31),
        (1, 0, 2.0 * m.c21, -2.0 * m.c21),
    ] {
        s[(2 * i, 2 * j)] = xx;
        s[(2 * j, 2 * i)] = xx;
        s[(2 * i + 1, 2 * j + 1)] = pp;
        s[(2 * j + 1, 2 * i + 1)] = pp;
    }
    CovarianceMatrix(s)
}

/// Covariance from the full moment table, with means subtracted.
pub fn covariance_from_table(t: &MomentTable) -> CovarianceMatrix {
    let i = Complex64::i();
    // Quadrature k = α âₘ + β âₘ†.
    let quad: [(usize, Complex64, Complex64); 6] = std::array::from_fn(|k| {
        let mode = k / 2;
        if k % 2 == 0 {
            (mode, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        } else {
            (mode, -i, i)
        }
    });
    // ⟨âᵢâⱼ⟩, ⟨âᵢ†âⱼ†⟩, ⟨âᵢ†âⱼ⟩, ⟨âᵢâⱼ†⟩
    let aa = |p: usize, q: usize| t.anomalous[p][q];
    let cc = |p: usize, q: usize| t.anomalous[q][p].conj();
    let ca = |p: usize, q: usize| t.normal[p][q];
    let ac = |p: usize, q: usize| t.normal[q][p] + if p == q { 1.0 } else { 0.0 };
    let mean = |k: usize| {
        let (m, a, b) = quad[k];
        (a * t.mean[m] + b * t.mean[m].conj()).re
    };
    let s = Matrix6::from_fn(|k, l| {
        let (p, a1, b1) = quad[k];
        let (q, a2, b2) = quad[l];
        let raw = a1 * a2 * aa(p, q) + a1 * b2 * ac(p, q) + b1 * a2 * ca(p, q) + b1 * b2 * cc(p, q);
        raw.re - mean(k) * mean(l)
    });
    CovarianceMatrix((s + s.transpose()) * 0.5)
}

/// The mode standing alone in a bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bipartition {
    /// 1 | 2,3
    One,
    /// 2 | 1,3
    Two,
    /// 3 | 1,2
    Three,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::One, Bipartition::Two, Bipartition::Three];

    /// `(m, k, l)`, 0-based, with `k < l`.
    pub fn modes(self) -> (usize, usize, usize) {
        match self {
            Bipartition::One => (0, 1, 2),
            Bipartition::Two => (1, 0, 2),
            Bipartition::Three => (2, 0, 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bipartition::One => "1|23",
            Bipartition::Two => "2|13",
            Bipartition::Three => "3|12",
        }
    }

    /// Image under the exchange of modes 2 and 3.
    pub fn swapped(self) -> Self {
        match self {
            Bipartition::One => Bipartition::One,
            Bipartition::Two => Bipartition::Three,
            Bipartition::Three => Bipartition::Two,
        }
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Real coefficients of `u = Σ hⱼxⱼ` and `v = Σ gⱼpⱼ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub h: [f64; 3],
    pub g: [f64; 3],
}

impl Gains {
    pub fn is_zero(&self) -> bool {
        self.h.iter().chain(&self.g).all(|v| *v == 0.0)
    }
}

/// Gains matched to the sign structure of the model: x-difference / p-sum
/// between mode 1 and the other group.
pub fn default_gains() -> [Gains; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [
        Gains {
            h: [1.0, -r, -r],
            g: [1.0, r, r],
        },
        Gains {
            h: [1.0, -1.0, 0.0],
            g: [1.0, 1.0, 0.0],
        },
        Gains {
            h: [1.0, 0.0, -1.0],
            g: [1.0, 0.0, 1.0],
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub bipartition: Bipartition,
    pub lhs: f64,
    pub bound: f64,
    pub gains: Gains,
    pub violated: bool,
}

impl WitnessRecord {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlfReport {
    /// Indexed like [`Bipartition::ALL`].
    pub records: [WitnessRecord; 3],
    /// All three bipartitions are violated.
    pub fully_inseparable: bool,
}

impl VlfReport {
    pub fn record(&self, b: Bipartition) -> &WitnessRecord {
        &self.records[b as usize]
    }

    pub fn ratios(&self) -> [f64; 3] {
        self.records.map(|r| r.ratio())
    }
}

fn lhs_bound(cov: &CovarianceMatrix, b: Bipartition, gains: &Gains) -> (f64, f64) {
    let h = nalgebra::Vector3::from(gains.h);
    let g = nalgebra::Vector3::from(gains.g);
    let lhs = h.dot(&(cov.x_block() * h)) + g.dot(&(cov.p_block() * g));
    let (m, k, l) = b.modes();
    let bound = 2.0 * ((gains.h[m] * gains.g[m]).abs() + (gains.h[k] * gains.g[k] + gains.h[l] * gains.g[l]).abs());
    (lhs, bound)
}

pub fn evaluate_bipartition(
    cov: &CovarianceMatrix,
    b: Bipartition,
    gains: &Gains,
) -> Result<WitnessRecord, EntanglementError> {
    let (lhs, bound) = lhs_bound(cov, b, gains);
    if gains.is_zero() || !(bound > 0.0) {
        return Err(EntanglementError::DegenerateWitness(b));
    }
    Ok(WitnessRecord {
        bipartition: b,
        lhs,
        bound,
        gains: *gains,
        violated: lhs < bound - VIOLATION_TOL,
    })
}

pub fn vlf_evaluate(cov: &CovarianceMatrix, gains: &[Gains; 3]) -> Result<VlfReport, EntanglementError> {
    let records = [
        evaluate_bipartition(cov, Bipartition::One, &gains[0])?,
        evaluate_bipartition(cov, Bipartition::Two, &gains[1])?,
        evaluate_bipartition(cov, Bipartition::Three, &gains[2])?,
    ];
    Ok(VlfReport {
        fully_inseparable: records.iter().all(|r| r.violated),
        records,
    })
}

const GOLDEN_ITERS: usize = 60;
const MAX_SWEEPS: usize = 40;
const GAIN_RANGE: f64 = 4.0;

/// Gains minimizing `lhs / bound` for each bipartition. Never worse than
/// [`default_gains`]; ties keep the defaults.
///
/// With the signs inside the bound fixed, `bound = 2 hᵀJg` for a diagonal
/// sign matrix `J`, and the minimum of `(hᵀXh + gᵀPg) / (2 hᵀJg)` is
/// `1 / σ_max(X^{-1/2} J P^{-1/2})`, attained at the top singular pair. The
/// true bound is the largest over sign choices, so the global minimum is the
/// smallest of these. Golden-section coordinate search covers covariances
/// whose x or p block is not positive definite.
pub fn optimize_gains(cov: &CovarianceMatrix) -> [Gains; 3] {
    let start = default_gains();
    std::array::from_fn(|k| {
        let b = Bipartition::ALL[k];
        let candidate = stationary_gains(cov, b).unwrap_or_else(|| search_gains(cov, b, &start[k]));
        if ratio_of(cov, b, &candidate) < ratio_of(cov, b, &start[k]) - 1e-13 {
            candidate
        } else {
            start[k]
        }
    })
}

fn inverse_sqrt(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let eig = nalgebra::SymmetricEigen::new(*m);
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

fn stationary_gains(cov: &CovarianceMatrix, b: Bipartition) -> Option<Gains> {
    let xi = inverse_sqrt(&cov.x_block())?;
    let pi = inverse_sqrt(&cov.p_block())?;
    let (m, k, l) = b.modes();
    let mut best: Option<(f64, Gains)> = None;
    for sign in [1.0, -1.0] {
        let mut j = Matrix3::zeros();
        j[(m, m)] = 1.0;
        j[(k, k)] = sign;
        j[(l, l)] = sign;
        let svd = (xi * j * pi).svd(true, true);
        let (u, vt) = (svd.u?, svd.v_t?);
        let top = svd.singular_values.imax();
        let h = xi * u.column(top);
        let g = pi * vt.row(top).transpose();
        // Fix the overall sign so that h_m ≥ 0 and normalize the largest gain.
        let flip = if h[m] < 0.0 { -1.0 } else { 1.0 };
        let norm = h.amax().max(g.amax());
        if !(norm > 0.0) {
            continue;
        }
        let gains = balance(
            cov,
            &Gains {
                h: (h * (flip / norm)).into(),
                g: (g * (flip / norm)).into(),
            },
        );
        let r = ratio_of(cov, b, &gains);
        if r.is_finite() && best.as_ref().is_none_or(|(rb, _)| r < *rb) {
            best = Some((r, gains));
        }
    }
    best.map(|(_, g)| g)
}

/// Rescales `h → s·h`, `g → g/s` (bound unchanged) to minimize `lhs`.
fn balance(cov: &CovarianceMatrix, gains: &Gains) -> Gains {
    let h = nalgebra::Vector3::from(gains.h);
    let g = nalgebra::Vector3::from(gains.g);
    let vu = h.dot(&(cov.x_block() * h));
    let vv = g.dot(&(cov.p_block() * g));
    if !(vu > 0.0 && vv > 0.0) {
        return *gains;
    }
    let s = (vv / vu).powf(0.25);
    Gains {
        h: gains.h.map(|v| v * s),
        g: gains.g.map(|v| v / s),
    }
}

fn ratio_of(cov: &CovarianceMatrix, b: Bipartition, gains: &Gains) -> f64 {
    let (lhs, bound) = lhs_bound(cov, b, gains);
    if bound > 0.0 {
        lhs / bound
    } else {
        f64::INFINITY
    }
}

fn search_gains(cov: &CovarianceMatrix, b: Bipartition, start: &Gains) -> Gains {
    let (m, k, l) = b.modes();
    // Free coordinates relative to h_m = g_m = 1; the overall h/g scale is
    // fixed by balancing.
    let mut x = [start.h[k], start.h[l], start.g[k], start.g[l]];
    let build = |x: &[f64; 4]| {
        let mut h = [0.0; 3];
        let mut g = [0.0; 3];
        h[m] = 1.0;
        g[m] = 1.0;
        h[k] = x[0];
        h[l] = x[1];
        g[k] = x[2];
        g[l] = x[3];
        Gains { h, g }
    };
    let score = |x: &[f64; 4]| {
        let gains = build(x);
        // Balancing gives lhs = 2 sqrt(V(u) V(v)).
        let h = nalgebra::Vector3::from(gains.h);
        let g = nalgebra::Vector3::from(gains.g);
        let vu = h.dot(&(cov.x_block() * h));
        let vv = g.dot(&(cov.p_block() * g));
        let (_, bound) = lhs_bound(cov, b, &gains);
        if bound > 0.0 && vu >= 0.0 && vv >= 0.0 {
            2.0 * (vu * vv).sqrt() / bound
        } else {
            f64::INFINITY
        }
    };
    let mut best = score(&x);
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for c in 0..4 {
            let f = |v: f64| {
                let mut y = x;
                y[c] = v;
                score(&y)
            };
            let v = golden_min(f, -GAIN_RANGE, GAIN_RANGE);
            let val = f(v);
            if val < best {
                best = val;
                x[c] = v;
            }
        }
        if !(before - best > 1e-14 * before.abs()) {
            break;
        }
    }
    let candidate = balance(cov, &build(&x));
    // Dominance: never worse than the starting gains.
    if ratio_of(cov, b, &candidate) <= ratio_of(cov, b, start) {
        candidate
    } else {
        *start
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..GOLDEN_ITERS {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    if fa <= fb {
        a
    } else {
        b
    }
}

/// Witness report for a set of closure moments, at default or optimized
/// gains.
pub fn witness(m: &SecondMoments, optimize: bool) -> VlfReport {
    let cov = covariance_from_moments(m);
    let gains = if optimize { optimize_gains(&cov) } else { default_gains() };
    vlf_evaluate(&cov, &gains).expect("built-in gains have a positive bound")
}

/// Which moments a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Steady,
    FixedTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    /// Gain prefactor `A`.
    pub a: f64,
    pub kappa: f64,
    pub backend: Backend,
    pub mode: SweepMode,
    pub optimize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta1: f64,
    pub eta2: f64,
    pub valid: bool,
    pub prefactors: Option<Prefactors>,
    pub stable: Option<bool>,
    pub margin: Option<f64>,
    pub moments: Option<SecondMoments>,
    pub report: Option<VlfReport>,
    /// Why the row is incomplete, if it is.
    pub note: Option<String>,
}

/// `n1 × n2` equally spaced points over `[−1, 1]²`, η₂ fastest.
pub fn eta_grid(n1: usize, n2: usize) -> Vec<(f64, f64)> {
    let axis = |n: usize| -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect(),
        }
    };
    let (a, b) = (axis(n1), axis(n2));
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

pub fn sweep_point(eta1: f64, eta2: f64, t: &SweepTemplate) -> SweepRow {
    let mut row = SweepRow {
        eta1,
        eta2,
        valid: false,
        prefactors: None,
        stable: None,
        margin: None,
        moments: None,
        report: None,
        note: None,
    };
    let validity = validate_physical(eta1, eta2);
    if !validity.valid {
        row.note = Some(match validity.violated {
            Some(p) => format!("{p} < 0"),
            None => "non-finite inversion".into(),
        });
        return row;
    }
    let p = match Prefactors::from_inversions(t.a, eta1, eta2) {
        Ok(p) => p,
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    };
    row.valid = true;
    row.prefactors = Some(p);
    let st = dynamics::is_stable(&dynamics::drift_matrix(&p, t.kappa));
    row.stable = Some(st.stable);
    row.margin = Some(st.margin);
    let moments = match t.mode {
        SweepMode::Steady if !st.stable => {
            row.note = Some("no steady state (drift not stable)".into());
            return row;
        }
        SweepMode::Steady => dynamics::steady_state_moments(&p, t.kappa, t.backend),
        SweepMode::FixedTime(time) => {
            dynamics::evolve_second_moments(&p, t.kappa, time, t.backend, None).map(|r| r.value)
        }
    };
    match moments {
        Ok(m) => {
            row.moments = Some(m);
            row.report = Some(witness(&m, t.optimize));
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// Evaluates every grid point; rows come back in grid order. `threads`
/// bounds the worker pool when the `parallel` feature is on.
pub fn sweep(grid: &[(f64, f64)], template: &SweepTemplate, threads: Option<usize>) -> Vec<SweepRow> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || grid.par_iter().map(|&(x, y)| sweep_point(x, y, template)).collect();
        match threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            },
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        grid.iter().map(|&(x, y)| sweep_point(x, y, template)).collect()
    }
}
