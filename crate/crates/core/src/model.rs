// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical parameters, initial atomic preparation and master-equation
//! prefactors.
//!
//! The atoms enter the cavity in the pure state
//! `C₃|3⟩ + C₂|2⟩ + C₀|0⟩` with the intermediate level empty. Two population
//! inversions parameterise the preparation,
//!
//! ```text
//! η₁ = ρ₀₀ − ρ₃₃,   η₂ = ρ₀₀ − ρ₂₂,
//! ```
//!
//! and since the three populations sum to one they fix every population and,
//! through the pure-state product relations, every coherence.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TRIANGLE_TOL;

/// Default lower bound on γ/κ below which the good-cavity advisory fires.
pub const GOOD_CAVITY_FACTOR: f64 = 10.0;

/// Tolerance when comparing the closed-form radicands with the product forms.
const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("inversion {name} must be finite, got {value}")]
    NonFiniteInversion { name: &'static str, value: f64 },
    #[error(
        "(eta1, eta2) = ({eta1}, {eta2}) is outside the physical triangle: {population} = {value:.6} < 0"
    )]
    OutsideTriangle {
        eta1: f64,
        eta2: f64,
        population: Population,
        value: f64,
    },
    #[error("internal consistency: radicand of {coefficient} is {radicand:e} (product form {product:e})")]
    InternalConsistency {
        coefficient: char,
        radicand: f64,
        product: f64,
    },
}

/// One of the three initially populated atomic levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Population {
    Rho00,
    Rho22,
    Rho33,
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Population::Rho00 => "rho00",
            Population::Rho22 => "rho22",
            Population::Rho33 => "rho33",
        })
    }
}

/// Physical inputs. Rates share one unit (1/s or multiples of κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atom injection rate.
    pub r_a: f64,
    /// Atom–field coupling, equal for all three transitions.
    pub g: f64,
    /// Atomic decay rate, equal for all levels.
    pub gamma: f64,
    /// Cavity damping, equal for all modes.
    pub kappa: f64,
    /// ρ₀₀ − ρ₃₃.
    pub eta1: f64,
    /// ρ₀₀ − ρ₂₂.
    pub eta2: f64,
}

/// Non-fatal observations attached to a validated parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Advisory {
    /// γ/κ is below the configured factor, so adiabatic elimination of the
    /// atomic variables is questionable.
    WeakGoodCavity { ratio: f64, factor: f64 },
}

impl fmt::Display for Advisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advisory::WeakGoodCavity { ratio, factor } => write!(
                f,
                "gamma/kappa = {ratio:.3} is below {factor}; the good-cavity limit is not well satisfied"
            ),
        }
    }
}

impl ModelParams {
    /// Builds and validates a parameter set.
    pub fn new(r_a: f64, g: f64, gamma: f64, kappa: f64, eta1: f64, eta2: f64) -> Result<Self, ModelError> {
        let params = Self {
            r_a,
            g,
            gamma,
            kappa,
            eta1,
            eta2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("r_a", self.r_a),
            ("g", self.g),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        populations_from_inversions(self.eta1, self.eta2).map(|_| ())
    }

    /// Linear gain `A = 2 r_a g² / γ²`.
    pub fn gain(&self) -> f64 {
        2.0 * self.r_a * self.g * self.g / (self.gamma * self.gamma)
    }

    pub fn preparation(&self) -> Result<AtomPreparation, ModelError> {
        populations_from_inversions(self.eta1, self.eta2)
    }

    pub fn prefactors(&self) -> Result<Prefactors, ModelError> {
        prefactors(self)
    }

    /// Advisories for this parameter set; `factor` is the minimum γ/κ.
    pub fn advisories(&self, factor: f64) -> Vec<Advisory> {
        let ratio = self.gamma / self.kappa;
        let mut out = Vec::new();
        if ratio < factor {
            out.push(Advisory::WeakGoodCavity { ratio, factor });
        }
        out
    }
}

/// Initial atomic density matrix restricted to levels 3, 2 and 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomPreparation {
    pub rho33: f64,
    pub rho22: f64,
    pub rho00: f64,
    pub rho32: f64,
    pub rho30: f64,
    pub rho20: f64,
}

impl AtomPreparation {
    /// Inversions recomputed from the populations.
    pub fn inversions(&self) -> (f64, f64) {
        (self.rho00 - self.rho33, self.rho00 - self.rho22)
    }
}

/// Result of [`validate_physical`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    pub rho00: f64,
    pub rho22: f64,
    pub rho33: f64,
    /// The most negative population when the pair is invalid.
    pub violated: Option<Population>,
}

fn raw_populations(eta1: f64, eta2: f64) -> [(Population, f64); 3] {
    [
        (Population::Rho00, (1.0 + (eta1 + eta2)) / 3.0),
        (Population::Rho22, (1.0 + eta1 - 2.0 * eta2) / 3.0),
        (Population::Rho33, (1.0 + eta2 - 2.0 * eta1) / 3.0),
    ]
}

/// Checks whether (η₁, η₂) lies in the triangle where all populations are
/// nonnegative. Never fails; non-finite input is reported as invalid.
pub fn validate_physical(eta1: f64, eta2: f64) -> Validity {
    let pops = raw_populations(eta1, eta2);
    let violated = if !(eta1.is_finite() && eta2.is_finite()) {
        Some(Population::Rho00)
    } else {
        pops.iter()
            .filter(|(_, v)| *v < -TRIANGLE_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(p, _)| *p)
    };
    Validity {
        valid: violated.is_none(),
        rho00: pops[0].1,
        rho22: pops[1].1,
        rho33: pops[2].1,
        violated,
    }
}

/// Populations and coherences of the prepared atom.
///
/// Populations within [`TRIANGLE_TOL`] below zero are snapped to zero; the
/// coherences take the nonnegative root of the pure-state products.
pub fn populations_from_inversions(eta1: f64, eta2: f64) -> Result<AtomPreparation, ModelError> {
    for (name, value) in [("eta1", eta1), ("eta2", eta2)] {
        if !value.is_finite() {
            return Err(ModelError::NonFiniteInversion { name, value });
        }
    }
    let v = validate_physical(eta1, eta2);
    if let Some(population) = v.violated {
        let value = match population {
            Population::Rho00 => v.rho00,
            Population::Rho22 => v.rho22,
            Population::Rho33 => v.rho33,
        };
        return Err(ModelError::OutsideTriangle {
            eta1,
            eta2,
            population,
            value,
        });
    }
    let rho00 = v.rho00.max(0.0);
    let rho22 = v.rho22.max(0.0);
    let rho33 = v.rho33.max(0.0);
    Ok(AtomPreparation {
        rho33,
        rho22,
        rho00,
        rho32: (rho33 * rho22).sqrt(),
        rho30: (rho33 * rho00).sqrt(),
        rho20: (rho22 * rho00).sqrt(),
    })
}

/// The seven master-equation coefficients.
///
/// `a` carries the rate unit; `b..g` are dimensionless and each lies in
/// `[0, 1/2]` with `b + c + d = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactors {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl Prefactors {
    /// Prefactors for a given linear gain `a` and preparation.
    pub fn from_inversions(a: f64, eta1: f64, eta2: f64) -> Result<Self, ModelError> {
        let prep = populations_from_inversions(eta1, eta2)?;
        check_radicands(eta1, eta2, &prep)?;
        Ok(Self::from_preparation(a, &prep))
    }

    /// `B = ρ₃₃/2`, `C = ρ₂₂/2`, `D = ρ₀₀/2` and the products `E = √(BC)`,
    /// `F = √(BD)`, `G = √(CD)`.
    pub fn from_preparation(a: f64, prep: &AtomPreparation) -> Self {
        let b = prep.rho33 / 2.0;
        let c = prep.rho22 / 2.0;
        let d = prep.rho00 / 2.0;
        Self {
            a,
            b,
            c,
            d,
            e: (b * c).sqrt(),
            f: (b * d).sqrt(),
            g: (c * d).sqrt(),
        }
    }

    /// Prefactors of the mirrored preparation (η₁ ↔ η₂), i.e. modes 2 and 3
    /// exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            b: self.c,
            c: self.b,
            f: self.g,
            g: self.f,
            ..*self
        }
    }

    /// Largest deviation from the product relations and the population sum.
    pub fn identity_residue(&self) -> f64 {
        [
            (self.e - (self.b * self.c).sqrt()).abs(),
            (self.f - (self.b * self.d).sqrt()).abs(),
            (self.g - (self.c * self.d).sqrt()).abs(),
            (self.b + self.c + self.d - 0.5).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Closed-form radicands (36·E², 36·F², 36·G²) written directly in the
/// inversions.
pub fn closed_form_radicands(eta1: f64, eta2: f64) -> [f64; 3] {
    let (x, y) = (eta1, eta2);
    [
        1.0 - x - y + 5.0 * x * y - 2.0 * (x * x + y * y),
        1.0 - x + 2.0 * y - x * y - 2.0 * x * x + y * y,
        1.0 - y + 2.0 * x - x * y + x * x - 2.0 * y * y,
    ]
}

/// `E`, `F`, `G` from the closed-form radicals, clamping radicands in
/// `[−1e-12, 0)` to zero.
pub fn closed_form_coherence_prefactors(eta1: f64, eta2: f64) -> Result<[f64; 3], ModelError> {
    let r = closed_form_radicands(eta1, eta2);
    let mut out = [0.0; 3];
    for (i, (&rad, name)) in r.iter().zip(['E', 'F', 'G']).enumerate() {
        if rad < -RADICAND_TOL {
            return Err(ModelError::InternalConsistency {
                coefficient: name,
                radicand: rad,
                product: f64::NAN,
            });
        }
        out[i] = rad.max(0.0).sqrt() / 6.0;
    }
    Ok(out)
}

fn check_radicands(eta1: f64, eta2: f64, prep: &AtomPreparation) -> Result<(), ModelError> {
    let (b, c, d) = (prep.rho33 / 2.0, prep.rho22 / 2.0, prep.rho00 / 2.0);
    let products = [b * c, b * d, c * d];
    for ((rad, product), name) in closed_form_radicands(eta1, eta2)
        .into_iter()
        .zip(products)
        .zip(['E', 'F', 'G'])
    {
        if rad < -RADICAND_TOL || (rad / 36.0 - product).abs() > RADICAND_TOL {
            return Err(ModelError::InternalConsistency {
                coefficient: name,
                radicand: rad,
                product,
            });
        }
    }
    Ok(())
}

/// Prefactors of a validated parameter set.
pub fn prefactors(params: &ModelParams) -> Result<Prefactors, ModelError> {
    params.validate()?;
    Prefactors::from_inversions(params.gain(), params.eta1, params.eta2)
}
