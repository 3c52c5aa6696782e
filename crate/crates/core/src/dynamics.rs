// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Linear moment dynamics of the three cavity modes.
//!
//! With `R = (α₁*, α₂, α₃)` the c-number amplitudes obey
//! `dR/dt = −M R + N(t)` with zero-mean noise, so the normally ordered second
//! moments `S = ⟨R R†⟩` obey
//!
//! ```text
//! dS/dt = −M S − S Mᵀ + Q.
//! ```
//!
//! Every quantity here is real for real prefactors and a vacuum start, which
//! leaves six independent moments (see [`SecondMoments`]).
//!
//! Two diffusion matrices are available. [`Backend::Ehrenfest`] is obtained by
//! tracing each moment against the master equation; it differs from
//! [`Backend::PaperLiteral`] only in the `(1,1)` entry, where the literal
//! table carries `−2AD` and drives ⟨â₁†â₁⟩ negative from vacuum.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Prefactors;
use crate::ode::{self, Tolerance};

/// Condition number of the eigenvector matrix above which the closed-form
/// route is abandoned.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e10;

/// Relative reconstruction error `‖VΛV⁻¹ − M‖/‖M‖` tolerated by
/// [`eigendecompose`].
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Largest admissible growth exponent `2·|margin|·t` of an unstable system.
pub const GROWTH_EXPONENT_LIMIT: f64 = 200.0;

// Eigenvalues closer than this (relative to ‖M‖) are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("drift matrix is defective or ill-conditioned (eigenvector condition {condition:.3e})")]
    Defective { condition: f64 },
    #[error("no steady state: drift is not stable (min Re(lambda) = {margin:.6e}, eigenvalues {})", fmt_eigs(.eigenvalues))]
    Unstable {
        margin: f64,
        eigenvalues: [Complex64; 3],
    },
    #[error("Lyapunov system is singular")]
    Degenerate,
    #[error(
        "unstable drift: t = {t} exceeds the overflow horizon {horizon:.6e}; \
         moments grow without bound and no steady state exists (eigenvalues {})",
        fmt_eigs(.eigenvalues)
    )]
    Overflow {
        t: f64,
        horizon: f64,
        eigenvalues: [Complex64; 3],
    },
    #[error("time must be finite and nonnegative, got {0}")]
    BadTime(f64),
    #[error("moment integration failed at t = {0}")]
    Integration(f64),
}

pub(crate) fn fmt_eigs(e: &[Complex64; 3]) -> String {
    let parts: Vec<String> = e.iter().map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

/// Diffusion-matrix flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Moment equations traced from the master equation (default).
    #[default]
    Ehrenfest,
    /// The published drift/diffusion tables, kept verbatim.
    PaperLiteral,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Ehrenfest => "ehrenfest",
            Backend::PaperLiteral => "paper-literal",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ehrenfest" => Ok(Backend::Ehrenfest),
            "paper-literal" => Ok(Backend::PaperLiteral),
            other => Err(format!("unknown backend '{other}' (expected ehrenfest or paper-literal)")),
        }
    }
}

/// Drift `M` over `(α₁*, α₂, α₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix3<f64>);

/// Diffusion `Q`, symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Matrix3<f64>);

pub fn drift_matrix(p: &Prefactors, kappa: f64) -> DriftMatrix {
    let (a, h) = (p.a, kappa / 2.0);
    DriftMatrix(Matrix3::new(
        h + a * p.d,
        -a * p.g,
        -a * p.f,
        a * p.g,
        h - a * p.c,
        -a * p.e,
        a * p.f,
        -a * p.e,
        h - a * p.b,
    ))
}

pub fn diffusion_matrix(p: &Prefactors, backend: Backend) -> DiffusionMatrix {
    let a = p.a;
    // Loss on mode 1 adds no normally ordered noise.
    let q11 = match backend {
        Backend::Ehrenfest => 0.0,
        Backend::PaperLiteral => -2.0 * a * p.d,
    };
    DiffusionMatrix(Matrix3::new(
        q11,
        a * p.g,
        a * p.f,
        a * p.g,
        2.0 * a * p.c,
        2.0 * a * p.e,
        a * p.f,
        2.0 * a * p.e,
        2.0 * a * p.b,
    ))
}

/// The closed set of normally ordered second moments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondMoments {
    /// ⟨â₁†â₁⟩
    pub n1: f64,
    /// ⟨â₂†â₂⟩
    pub n2: f64,
    /// ⟨â₃†â₃⟩
    pub n3: f64,
    /// ⟨â₃†â₂⟩
    pub c32: f64,
    /// ⟨â₃â₁⟩
    pub c31: f64,
    /// ⟨â₂â₁⟩
    pub c21: f64,
}

impl SecondMoments {
    pub const VACUUM: SecondMoments = SecondMoments {
        n1: 0.0,
        n2: 0.0,
        n3: 0.0,
        c32: 0.0,
        c31: 0.0,
        c21: 0.0,
    };

    /// `⟨R R†⟩` as a symmetric matrix.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.n1, self.c21, self.c31, //
            self.c21, self.n2, self.c32, //
            self.c31, self.c32, self.n3,
        )
    }

    /// Reads the upper triangle of `⟨R R†⟩`.
    pub fn from_matrix(s: &Matrix3<f64>) -> Self {
        Self {
            n1: s[(0, 0)],
            n2: s[(1, 1)],
            n3: s[(2, 2)],
            c32: s[(1, 2)],
            c31: s[(0, 2)],
            c21: s[(0, 1)],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.n1, self.n2, self.n3, self.c32, self.c31, self.c21]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            n1: v[0],
            n2: v[1],
            n3: v[2],
            c32: v[3],
            c31: v[4],
            c21: v[5],
        }
    }

    /// Moments of the mirrored system (modes 2 and 3 exchanged).
    pub fn swapped(&self) -> Self {
        Self {
            n2: self.n3,
            n3: self.n2,
            c31: self.c21,
            c21: self.c31,
            ..*self
        }
    }

    /// Largest elementwise difference relative to `max(1, |a|, |b|)`-style
    /// scale `floor`.
    pub fn max_rel_diff(&self, other: &Self, floor: f64) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
            .fold(0.0, f64::max)
    }
}

/// Eigendecomposition `M = V diag(λ) V⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: [Complex64; 3],
    pub v: Matrix3<Complex64>,
    pub v_inv: Matrix3<Complex64>,
    /// 2-norm condition number of `v` (unit columns).
    pub condition: f64,
}

impl EigenSystem {
    pub fn reconstruct(&self) -> Matrix3<Complex64> {
        self.v * Matrix3::from_diagonal(&Vector3::from(self.eigenvalues)) * self.v_inv
    }

    /// `P(t) = V e^{−Λt} V⁻¹`.
    pub fn propagator(&self, t: f64) -> Matrix3<Complex64> {
        let decay = Vector3::from(self.eigenvalues.map(|l| (-l * t).exp()));
        self.v * Matrix3::from_diagonal(&decay) * self.v_inv
    }
}

fn sorted_eigenvalues(m: &Matrix3<f64>) -> [Complex64; 3] {
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Diagonalises the drift. Fails with [`DynamicsError::Defective`] when the
/// eigenbasis is not trustworthy; callers then fall back to integration.
pub fn eigendecompose(m: &DriftMatrix) -> Result<EigenSystem, DynamicsError> {
    let mr = m.0;
    let scale = mr.norm().max(f64::MIN_POSITIVE);
    let lambdas = sorted_eigenvalues(&mr);
    let mc: Matrix3<Complex64> = mr.map(|x| Complex64::new(x, 0.0));
    let defective = |condition| DynamicsError::Defective { condition };

    let mut v = Matrix3::<Complex64>::zeros();
    let mut col = 0;
    while col < 3 {
        let mut end = col + 1;
        while end < 3 && (lambdas[end] - lambdas[col]).norm() <= CLUSTER_TOL * scale {
            end += 1;
        }
        let k = end - col;
        let mean = lambdas[col..end].iter().sum::<Complex64>() / k as f64;
        let shifted = mc - Matrix3::from_diagonal_element(mean);
        let svd = SVD::new(shifted, false, true);
        let v_t = svd.v_t.ok_or_else(|| defective(f64::INFINITY))?;
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        if svd.singular_values[order[k - 1]] > 10.0 * CLUSTER_TOL * scale {
            // Geometric multiplicity below algebraic: a Jordan block.
            return Err(defective(f64::INFINITY));
        }
        for (j, &idx) in order.iter().take(k).enumerate() {
            // Null vectors are the conjugated rows of Vᴴ.
            let row = v_t.row(idx).transpose().map(|z| z.conj());
            let norm = row.norm();
            v.set_column(col + j, &(row / Complex64::new(norm, 0.0)));
        }
        col = end;
    }

    let sv = v.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_EIGENVECTOR_CONDITION) {
        return Err(defective(condition));
    }
    let v_inv = v.try_inverse().ok_or_else(|| defective(condition))?;
    let eig = EigenSystem {
        eigenvalues: lambdas,
        v,
        v_inv,
        condition,
    };
    let residue = (eig.reconstruct() - mc).norm() / scale;
    if !(residue <= RECONSTRUCTION_TOL) {
        return Err(defective(condition));
    }
    Ok(eig)
}

/// Stability verdict of a drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    /// All eigenvalues have strictly positive real part.
    pub stable: bool,
    /// `min Re(λ)`.
    pub margin: f64,
    /// The smallest real part vanishes within `1e-12·‖M‖`.
    pub marginal: bool,
    pub eigenvalues: [Complex64; 3],
}

pub fn is_stable(m: &DriftMatrix) -> Stability {
    let eigenvalues = sorted_eigenvalues(&m.0);
    let margin = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * m.0.norm();
    Stability {
        stable: margin > tol,
        margin,
        marginal: margin.abs() <= tol,
        eigenvalues,
    }
}

/// How a moment solution was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    Ode,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::ClosedForm => "closed-form",
            Route::Ode => "ode",
        })
    }
}

/// Which route a caller asks for. `Auto` tries the eigenbasis first and falls
/// back to integration when the drift is defective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutePreference {
    #[default]
    Auto,
    ClosedForm,
    Ode,
}

impl FromStr for RoutePreference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "closed-form" => Ok(Self::ClosedForm),
            "ode" => Ok(Self::Ode),
            other => Err(format!("unknown route '{other}' (expected auto, closed-form or ode)")),
        }
    }
}

/// A value together with the route that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Routed<T> {
    pub value: T,
    pub route: Route,
    /// The closed form was requested (or attempted) but the drift was
    /// defective, so the ODE route was used instead.
    pub fallback: bool,
}

fn check_time(t: f64) -> Result<(), DynamicsError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::BadTime(t))
    }
}

fn ode_hint(m: &Matrix3<f64>) -> f64 {
    0.01 / m.norm().max(1e-300)
}

fn guard_growth(m: &DriftMatrix, t: f64, factor: f64) -> Result<Stability, DynamicsError> {
    let st = is_stable(m);
    if st.margin < 0.0 {
        let horizon = GROWTH_EXPONENT_LIMIT / (factor * -st.margin);
        if t > horizon {
            return Err(DynamicsError::Overflow {
                t,
                horizon,
                eigenvalues: st.eigenvalues,
            });
        }
    }
    Ok(st)
}

/// Mean amplitudes `R(t)` from `R(0)`; the noise contributes nothing to the
/// mean.
pub fn evolve_first_moments(
    m: &DriftMatrix,
    r0: [Complex64; 3],
    t: f64,
    route: RoutePreference,
) -> Result<Routed<[Complex64; 3]>, DynamicsError> {
    check_time(t)?;
    guard_growth(m, t, 1.0)?;
    let closed = match route {
        RoutePreference::Ode => None,
        _ => match eigendecompose(m) {
            Ok(eig) => Some(eig),
            Err(e) if route == RoutePreference::ClosedForm => return Err(e),
            Err(_) => None,
        },
    };
    if let Some(eig) = closed {
        let r = eig.propagator(t) * Vector3::from(r0);
        return Ok(Routed {
            value: [r[0], r[1], r[2]],
            route: Route::ClosedForm,
            fallback: false,
        });
    }
    let mr = m.0;
    let rhs = |y: &[f64; 6]| {
        let re = -(mr * Vector3::new(y[0], y[1], y[2]));
        let im = -(mr * Vector3::new(y[3], y[4], y[5]));
        [re[0], re[1], re[2], im[0], im[1], im[2]]
    };
    let y0 = [r0[0].re, r0[1].re, r0[2].re, r0[0].im, r0[1].im, r0[2].im];
    let ys = ode::integrate(rhs, y0, &[t], Tolerance::default(), ode_hint(&mr))
        .map_err(|_| DynamicsError::Integration(t))?;
    let y = ys[0];
    Ok(Routed {
        value: [
            Complex64::new(y[0], y[3]),
            Complex64::new(y[1], y[4]),
            Complex64::new(y[2], y[5]),
        ],
        route: Route::Ode,
        fallback: route == RoutePreference::Auto,
    })
}

/// Drift and diffusion of the second-moment equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSystem {
    pub drift: DriftMatrix,
    pub diffusion: DiffusionMatrix,
    pub backend: Backend,
}

impl MomentSystem {
    pub fn new(p: &Prefactors, kappa: f64, backend: Backend) -> Self {
        Self {
            drift: drift_matrix(p, kappa),
            diffusion: diffusion_matrix(p, backend),
            backend,
        }
    }

    /// `−M S − S Mᵀ + Q`.
    pub fn rate(&self, s: &Matrix3<f64>) -> Matrix3<f64> {
        let m = self.drift.0;
        -(m * s) - s * m.transpose() + self.diffusion.0
    }

    fn rate_vec(&self, y: &[f64; 6]) -> [f64; 6] {
        let s = SecondMoments::from_array(*y).to_matrix();
        SecondMoments::from_matrix(&self.rate(&s)).to_array()
    }

    pub fn stability(&self) -> Stability {
        is_stable(&self.drift)
    }

    /// Closed-form moments at each time, from `initial`.
    ///
    /// In the eigenbasis the noise integral is elementwise:
    /// `S = V [Q̃ᵢⱼ (1 − e^{−(λᵢ+λⱼ)t})/(λᵢ+λⱼ)] Vᵀ` with `Q̃ = V⁻¹ Q V⁻ᵀ`.
    pub fn closed_form(
        &self,
        eig: &EigenSystem,
        times: &[f64],
        initial: &SecondMoments,
    ) -> Result<Vec<SecondMoments>, DynamicsError> {
        let q = self.diffusion.0.map(|x| Complex64::new(x, 0.0));
        let s0 = initial.to_matrix().map(|x| Complex64::new(x, 0.0));
        let q_tilde = eig.v_inv * q * eig.v_inv.transpose();
        let lam = eig.eigenvalues;
        let scale = lam.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            check_time(t)?;
            let mut kernel = Matrix3::<Complex64>::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let s = lam[i] + lam[j];
                    kernel[(i, j)] = q_tilde[(i, j)] * integral_factor(s, t, scale);
                }
            }
            let p = eig.propagator(t);
            let total = p * s0 * p.transpose() + eig.v * kernel * eig.v.transpose();
            let s = total.map(|z| z.re);
            if s.iter().any(|x| !x.is_finite()) {
                return Err(DynamicsError::Integration(t));
            }
            out.push(SecondMoments::from_matrix(&(0.5 * (s + s.transpose()))));
        }
        Ok(out)
    }

    /// Direct integration of the six real moment equations.
    pub fn integrate(&self, times: &[f64], initial: &SecondMoments) -> Result<Vec<SecondMoments>, DynamicsError> {
        for &t in times {
            check_time(t)?;
        }
        let ys = ode::integrate(
            |y: &[f64; 6]| self.rate_vec(y),
            initial.to_array(),
            times,
            Tolerance::default(),
            ode_hint(&self.drift.0),
        )
        .map_err(|e| match e {
            ode::OdeError::StepUnderflow { t } | ode::OdeError::NonFinite { t } => DynamicsError::Integration(t),
        })?;
        Ok(ys.into_iter().map(SecondMoments::from_array).collect())
    }

    /// Moments at each of `times` (nondecreasing).
    pub fn trajectory(
        &self,
        times: &[f64],
        initial: &SecondMoments,
        route: RoutePreference,
    ) -> Result<Routed<Vec<SecondMoments>>, DynamicsError> {
        let t_max = times.iter().copied().fold(0.0, f64::max);
        for &t in times {
            check_time(t)?;
        }
        guard_growth(&self.drift, t_max, 2.0)?;
        if route != RoutePreference::Ode {
            match eigendecompose(&self.drift) {
                Ok(eig) => {
                    return Ok(Routed {
                        value: self.closed_form(&eig, times, initial)?,
                        route: Route::ClosedForm,
                        fallback: false,
                    })
                }
                Err(e) if route == RoutePreference::ClosedForm => return Err(e),
                Err(_) => {}
            }
        }
        Ok(Routed {
            value: self.integrate(times, initial)?,
            route: Route::Ode,
            fallback: route == RoutePreference::Auto,
        })
    }

    /// Solves `M S + S Mᵀ = Q` through its 9×9 Kronecker form.
    pub fn steady_state(&self) -> Result<SecondMoments, DynamicsError> {
        let st = self.stability();
        if !st.stable {
            return Err(DynamicsError::Unstable {
                margin: st.margin,
                eigenvalues: st.eigenvalues,
            });
        }
        let m = self.drift.0;
        let id = Matrix3::<f64>::identity();
        // Column-major vec: vec(M S) = (I ⊗ M) vec S, vec(S Mᵀ) = (M ⊗ I) vec S.
        let mut k = SMatrix::<f64, 9, 9>::zeros();
        for a in 0..3 {
            for b in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        k[(3 * a + i, 3 * b + j)] = id[(a, b)] * m[(i, j)] + m[(a, b)] * id[(i, j)];
                    }
                }
            }
        }
        let rhs = SVector::<f64, 9>::from_column_slice(self.diffusion.0.as_slice());
        let lu = k.full_piv_lu();
        let u_diag = lu.u().diagonal().map(f64::abs);
        if u_diag.min() <= 1e-14 * u_diag.max() {
            return Err(DynamicsError::Degenerate);
        }
        let x = lu.solve(&rhs).ok_or(DynamicsError::Degenerate)?;
        let s = Matrix3::from_column_slice(x.as_slice());
        let asym = (s - s.transpose()).norm();
        if asym > 1e-10 * s.norm().max(1e-300) {
            return Err(DynamicsError::Degenerate);
        }
        Ok(SecondMoments::from_matrix(&(0.5 * (s + s.transpose()))))
    }
}

/// `∫₀ᵗ e^{−s τ} dτ`, with the `t` limit when `s` vanishes.
fn integral_factor(s: Complex64, t: f64, scale: f64) -> Complex64 {
    if s.norm() < 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Complex64::new(t, 0.0);
    }
    let x = s * t;
    if x.norm() < 1e-4 {
        // Series avoids cancellation in 1 − e^{−x}.
        let t_c = Complex64::new(t, 0.0);
        return t_c * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
    }
    (1.0 - (-x).exp()) / s
}

/// Second moments after time `t`, from `initial` (vacuum by default).
pub fn evolve_second_moments(
    p: &Prefactors,
    kappa: f64,
    t: f64,
    backend: Backend,
    initial: Option<&SecondMoments>,
) -> Result<Routed<SecondMoments>, DynamicsError> {
    let sys = MomentSystem::new(p, kappa, backend);
    let r = sys.trajectory(&[t], initial.unwrap_or(&SecondMoments::VACUUM), RoutePreference::Auto)?;
    Ok(Routed {
        value: r.value[0],
        route: r.route,
        fallback: r.fallback,
    })
}

pub fn steady_state_moments(p: &Prefactors, kappa: f64, backend: Backend) -> Result<SecondMoments, DynamicsError> {
    MomentSystem::new(p, kappa, backend).steady_state()
}

/// Photon numbers below this are reported as unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// Human-readable reasons why `m` cannot come from a density matrix.
pub fn physicality_warnings(m: &SecondMoments) -> Vec<String> {
    let mut out = Vec::new();
    for (name, n) in [("n1", m.n1), ("n2", m.n2), ("n3", m.n3)] {
        if n < -PHYSICALITY_TOL {
            out.push(format!("{name} = {n:.6e} is negative"));
        }
    }
    if m.c32 * m.c32 > m.n2 * m.n3 + PHYSICALITY_TOL {
        out.push(format!("|c32|^2 = {:.6e} exceeds n2*n3 = {:.6e}", m.c32 * m.c32, m.n2 * m.n3));
    }
    out
}

/// Steady states of both backends side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendComparison {
    pub ehrenfest: SecondMoments,
    pub paper_literal: SecondMoments,
    pub max_abs_diff: f64,
    /// Physicality warnings for the literal backend.
    pub literal_warnings: Vec<String>,
}

impl BackendComparison {
    pub fn discrepant(&self) -> bool {
        self.max_abs_diff > PHYSICALITY_TOL || !self.literal_warnings.is_empty()
    }
}

pub fn compare_backends(p: &Prefactors, kappa: f64) -> Result<BackendComparison, DynamicsError> {
    let ehrenfest = steady_state_moments(p, kappa, Backend::Ehrenfest)?;
    let paper_literal = steady_state_moments(p, kappa, Backend::PaperLiteral)?;
    let max_abs_diff = ehrenfest
        .to_array()
        .iter()
        .zip(paper_literal.to_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(BackendComparison {
        ehrenfest,
        paper_literal,
        max_abs_diff,
        literal_warnings: physicality_warnings(&paper_literal),
    })
}
