// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; failures
//! surface as JavaScript exceptions carrying the error message. The
//! `*_json` functions hold the logic so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use ycel_core::dynamics::{self, MomentSystem, RoutePreference, Stability};
use ycel_core::entanglement::{self, SweepMode, SweepTemplate, VlfReport};
use ycel_core::model::{self, AtomPreparation};
use ycel_core::{Backend, Prefactors, SecondMoments};

/// Largest grid side accepted by [`witness_map`]; keeps the page responsive.
pub const MAX_GRID: usize = 161;
/// Largest number of trajectory samples.
pub const MAX_SAMPLES: usize = 2000;

#[derive(Serialize)]
struct PrefactorDoc {
    populations: AtomPreparation,
    prefactors: Prefactors,
    stability: Stability,
}

/// Populations, prefactors and drift stability at one inversion pair.
pub fn prefactors_json(eta1: f64, eta2: f64, a: f64) -> Result<String, String> {
    check_gain(a)?;
    let populations = model::populations_from_inversions(eta1, eta2).map_err(|e| e.to_string())?;
    let prefactors = Prefactors::from_inversions(a, eta1, eta2).map_err(|e| e.to_string())?;
    let stability = dynamics::is_stable(&dynamics::drift_matrix(&prefactors, 1.0));
    to_json(&PrefactorDoc {
        populations,
        prefactors,
        stability,
    })
}

#[derive(Serialize)]
struct TrajectoryDoc {
    route: String,
    fallback: bool,
    times: Vec<f64>,
    moments: Vec<SecondMoments>,
    /// Witnesses on the last sample, optimized gains.
    witness: VlfReport,
    warnings: Vec<String>,
}

/// Second moments from vacuum on `samples` equal intervals of `[0, t]`.
pub fn trajectory_json(eta1: f64, eta2: f64, a: f64, t: f64, samples: usize, backend: &str) -> Result<String, String> {
    check_gain(a)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(format!("t must be finite and nonnegative, got {t}"));
    }
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(format!("samples must lie in 1..={MAX_SAMPLES}, got {samples}"));
    }
    let backend: Backend = backend.parse()?;
    let p = Prefactors::from_inversions(a, eta1, eta2).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..=samples).map(|k| t * k as f64 / samples as f64).collect();
    let run = MomentSystem::new(&p, 1.0, backend)
        .trajectory(&times, &SecondMoments::VACUUM, RoutePreference::Auto)
        .map_err(|e| e.to_string())?;
    let last = *run.value.last().expect("at least one sample");
    to_json(&TrajectoryDoc {
        route: run.route.to_string(),
        fallback: run.fallback,
        witness: entanglement::witness(&last, true),
        warnings: dynamics::physicality_warnings(&last),
        times,
        moments: run.value,
    })
}

#[derive(Serialize)]
struct Cell {
    valid: bool,
    stable: Option<bool>,
    /// Witness ratios for 1|23, 2|13, 3|12; below one means violated.
    ratios: Option<[f64; 3]>,
    fully_inseparable: bool,
}

#[derive(Serialize)]
struct MapDoc {
    n: usize,
    /// Axis values shared by both inversions.
    axis: Vec<f64>,
    /// Row-major, η₁ slowest.
    cells: Vec<Cell>,
}

/// Steady-state witness map on an `n × n` grid over `[−1, 1]²`.
pub fn witness_map_json(n: usize, a: f64, optimize: bool) -> Result<String, String> {
    check_gain(a)?;
    if n == 0 || n > MAX_GRID {
        return Err(format!("grid side must lie in 1..={MAX_GRID}, got {n}"));
    }
    let template = SweepTemplate {
        a,
        kappa: 1.0,
        backend: Backend::Ehrenfest,
        mode: SweepMode::Steady,
        optimize,
    };
    let grid = entanglement::eta_grid(n, n);
    let cells = entanglement::sweep(&grid, &template, None)
        .into_iter()
        .map(|r| Cell {
            valid: r.valid,
            stable: r.stable,
            ratios: r.report.map(|x| x.ratios()),
            fully_inseparable: r.report.is_some_and(|x| x.fully_inseparable),
        })
        .collect();
    let axis = grid.iter().take(n).map(|&(_, y)| y).collect();
    to_json(&MapDoc { n, axis, cells })
}

fn check_gain(a: f64) -> Result<(), String> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(format!("A must be finite and nonnegative, got {a}"))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn prefactors(eta1: f64, eta2: f64, a: f64) -> Result<String, JsError> {
    prefactors_json(eta1, eta2, a).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trajectory(eta1: f64, eta2: f64, a: f64, t: f64, samples: usize, backend: &str) -> Result<String, JsError> {
    trajectory_json(eta1, eta2, a, t, samples, backend).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = witnessMap)]
pub fn witness_map(n: usize, a: f64, optimize: bool) -> Result<String, JsError> {
    witness_map_json(n, a, optimize).map_err(|e| JsError::new(&e))
}
