// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Resolved run configuration: defaults, then the `--config` file, then
//! command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use ycel_core::dynamics::RoutePreference;
use ycel_core::Backend;

use crate::Failure;

/// Every knob of every subcommand. Rates and times are in units of κ unless
/// `absolute_units` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub eta1: f64,
    pub eta2: f64,
    /// Linear gain; derived from `r_a`, `g`, `gamma` when absent.
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    pub kappa: f64,
    pub gamma: f64,
    pub g: f64,
    pub r_a: f64,
    pub absolute_units: bool,
    pub backend: Backend,
    pub route: RoutePreference,
    /// Final time of `evolve` and `oracle`, fixed time of `sweep`.
    pub t: f64,
    /// Number of equal intervals sampled on `[0, t]`.
    pub samples: usize,
    /// One value for all modes or three per-mode values.
    pub n_max: Vec<usize>,
    pub dt: f64,
    pub edge_tol: f64,
    pub convergence_check: bool,
    pub dense: bool,
    /// `N1xN2` points over `[-1, 1]²`.
    pub eta_grid: String,
    pub sweep_mode: SweepKind,
    pub optimize: bool,
    pub valid_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Steady,
    FixedTime,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eta1: 0.0,
            eta2: 0.0,
            a: None,
            kappa: 1.0,
            gamma: 10.0,
            g: 1.0,
            r_a: 25.0,
            absolute_units: false,
            backend: Backend::Ehrenfest,
            route: RoutePreference::Auto,
            t: 10.0,
            samples: 10,
            n_max: vec![6],
            dt: 0.02,
            edge_tol: 1e-6,
            convergence_check: true,
            dense: false,
            eta_grid: "21x21".into(),
            sweep_mode: SweepKind::Steady,
            optimize: true,
            valid_only: false,
        }
    }
}

impl RunConfig {
    /// Reads a flat TOML table, a flat JSON object, or a JSON document
    /// written by this tool (its `config` member is used).
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("config {} is not valid JSON: {e}", path.display())))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value).map_err(|e| Failure::Input(format!("config {}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Failure::Input(format!("config {}: {e}", path.display())))
        }
    }

    pub fn check(&self) -> Result<(), Failure> {
        if !self.absolute_units && self.kappa != 1.0 {
            return Err(Failure::Input(format!(
                "kappa = {} but rates are in units of kappa; pass --absolute-units to set kappa",
                self.kappa
            )));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Failure::Input(format!("t must be finite and nonnegative, got {}", self.t)));
        }
        if self.samples == 0 {
            return Err(Failure::Input("samples must be >= 1".into()));
        }
        if let Some(a) = self.a {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Failure::Input(format!("A must be finite and nonnegative, got {a}")));
            }
        }
        self.n_max_triple()?;
        self.grid()?;
        Ok(())
    }

    pub fn n_max_triple(&self) -> Result<[usize; 3], Failure> {
        match self.n_max.as_slice() {
            [n] => Ok([*n; 3]),
            [a, b, c] => Ok([*a, *b, *c]),
            other => Err(Failure::Input(format!("n_max takes one or three values, got {other:?}"))),
        }
    }

    pub fn grid(&self) -> Result<(usize, usize), Failure> {
        let bad = || Failure::Input(format!("eta grid must look like 21x21, got '{}'", self.eta_grid));
        let (a, b) = self.eta_grid.split_once(['x', 'X']).ok_or_else(bad)?;
        let (a, b) = (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim().parse::<usize>().map_err(|_| bad())?);
        if a == 0 || b == 0 {
            return Err(bad());
        }
        Ok((a, b))
    }

    /// Sample times `k·t/samples`, `k = 0..=samples`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.samples).map(|k| self.t * k as f64 / self.samples as f64).collect()
    }

    /// One-line JSON for CSV header comments.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
