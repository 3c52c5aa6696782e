// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;
use ycel_core::dynamics::{self, DynamicsError, MomentSystem, Route};
use ycel_core::entanglement::{self, SweepMode, SweepTemplate, VlfReport};
use ycel_core::export::{self, num};
use ycel_core::fock_oracle::{self, LayoutMode, OracleError};
use ycel_core::model::{closed_form_radicands, AtomPreparation, ModelParams};
use ycel_core::{Backend, DensityState, FockConfig, Prefactors, SecondMoments};

use crate::config::{RunConfig, SweepKind};
use crate::{Failure, Format};

fn eigs(st: &dynamics::Stability) -> String {
    let parts: Vec<String> = st
        .eigenvalues
        .iter()
        .map(|z| format!("{}{:+.11e}i", num(z.re), z.im))
        .collect();
    parts.join(" ")
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn dynamics_failure(e: DynamicsError) -> Failure {
    match e {
        DynamicsError::BadTime(_) => Failure::Input(e.to_string()),
        _ => Failure::Runtime(e.to_string()),
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::Config(_) => Failure::Input(e.to_string()),
        _ => Failure::Runtime(e.to_string()),
    }
}

fn rates(cfg: &RunConfig, eta1: f64, eta2: f64) -> ModelParams {
    ModelParams {
        r_a: cfg.r_a,
        g: cfg.g,
        gamma: cfg.gamma,
        kappa: cfg.kappa,
        eta1,
        eta2,
    }
}

/// Linear gain from the explicit override or the rates; the rates are
/// validated either way.
fn gain(cfg: &RunConfig) -> Result<f64, Failure> {
    // The preparation is checked separately; (0, 0) is always valid.
    let params = rates(cfg, 0.0, 0.0);
    params.validate().map_err(|e| Failure::Input(e.to_string()))?;
    for a in params.advisories(ycel_core::model::GOOD_CAVITY_FACTOR) {
        warn(&a.to_string());
    }
    Ok(cfg.a.unwrap_or_else(|| params.gain()))
}

struct Setup {
    params: ModelParams,
    prep: AtomPreparation,
    pref: Prefactors,
}

fn setup(cfg: &RunConfig) -> Result<Setup, Failure> {
    let a = gain(cfg)?;
    let params = rates(cfg, cfg.eta1, cfg.eta2);
    let prep = params.preparation().map_err(|e| Failure::Input(e.to_string()))?;
    let pref = Prefactors::from_inversions(a, cfg.eta1, cfg.eta2).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(Setup { params, prep, pref })
}

fn base_meta(command: &str, cfg: &RunConfig, pref: &Prefactors) -> Vec<(&'static str, String)> {
    vec![
        ("ycel", command.to_string()),
        ("config", cfg.to_json_line()),
        ("backend", cfg.backend.to_string()),
        ("prefactors", serde_json::to_string(pref).expect("prefactors serialize")),
    ]
}

#[derive(Serialize)]
struct Residues {
    /// |B + C + D − 1/2|
    population_sum: f64,
    /// |radicand/36 − product| for E, F, G.
    radicand: [f64; 3],
    /// |sqrt(radicand)/6 − E|, ... (rounding near zero is amplified here).
    radical: [f64; 3],
}

fn residues(cfg: &RunConfig, p: &Prefactors) -> Residues {
    let rad = closed_form_radicands(cfg.eta1, cfg.eta2);
    let prods = [p.b * p.c, p.b * p.d, p.c * p.d];
    let vals = [p.e, p.f, p.g];
    Residues {
        population_sum: (p.b + p.c + p.d - 0.5).abs(),
        radicand: std::array::from_fn(|k| (rad[k] / 36.0 - prods[k]).abs()),
        radical: std::array::from_fn(|k| (rad[k].max(0.0).sqrt() / 6.0 - vals[k]).abs()),
    }
}

pub fn prefactors(cfg: &RunConfig, format: Option<Format>) -> Result<String, Failure> {
    let s = setup(cfg)?;
    let (p, prep) = (s.pref, s.prep);
    let res = residues(cfg, &p);
    Ok(match format {
        Some(Format::Json) => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a RunConfig,
                populations: AtomPreparation,
                prefactors: Prefactors,
                residues: Residues,
            }
            export::json(&Doc {
                config: cfg,
                populations: prep,
                prefactors: p,
                residues: res,
            })
        }
        Some(Format::Csv) => {
            let mut out = export::comment_block(&base_meta("prefactors", cfg, &p));
            out.push_str("eta1,eta2,rho00,rho22,rho33,A,B,C,D,E,F,G\n");
            let cells = [
                cfg.eta1, cfg.eta2, prep.rho00, prep.rho22, prep.rho33, p.a, p.b, p.c, p.d, p.e, p.f, p.g,
            ]
            .map(num);
            out.push_str(&cells.join(","));
            out.push('\n');
            out
        }
        None => {
            let mut out = String::new();
            let mut line = |k: &str, v: String| out.push_str(&format!("{k:<28}{v}\n"));
            line("eta1", num(cfg.eta1));
            line("eta2", num(cfg.eta2));
            line("rho00", num(prep.rho00));
            line("rho22", num(prep.rho22));
            line("rho33", num(prep.rho33));
            line("rho32", num(prep.rho32));
            line("rho30", num(prep.rho30));
            line("rho20", num(prep.rho20));
            line("gamma/kappa", num(s.params.gamma / s.params.kappa));
            for (k, v) in [("A", p.a), ("B", p.b), ("C", p.c), ("D", p.d), ("E", p.e), ("F", p.f), ("G", p.g)] {
                line(k, num(v));
            }
            line("|B+C+D-1/2|", num(res.population_sum));
            line("|radicand/36 - product|", res.radicand.map(num).join(" "));
            line("|sqrt(radicand)/6 - E,F,G|", res.radical.map(num).join(" "));
            out
        }
    })
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    #[serde(flatten)]
    moments: SecondMoments,
}

pub fn evolve(cfg: &RunConfig, format: Format) -> Result<String, Failure> {
    let s = setup(cfg)?;
    let sys = MomentSystem::new(&s.pref, cfg.kappa, cfg.backend);
    let st = sys.stability();
    let times = cfg.times();
    let traj = sys
        .trajectory(&times, &SecondMoments::VACUUM, cfg.route)
        .map_err(dynamics_failure)?;
    if !st.stable {
        warn(&format!("drift is not stable (margin {}); moments grow without bound", num(st.margin)));
    }
    if traj.fallback {
        warn("drift is defective; moments were integrated numerically");
    }
    Ok(match format {
        Format::Csv => {
            let mut meta = base_meta("evolve", cfg, &s.pref);
            meta.push(("route", traj.route.to_string()));
            meta.push(("eigenvalues", eigs(&st)));
            meta.push(("margin", num(st.margin)));
            let rows: Vec<(f64, SecondMoments)> = times.iter().copied().zip(traj.value).collect();
            export::trajectory_csv(&meta, &rows)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a RunConfig,
                backend: Backend,
                route: Route,
                prefactors: Prefactors,
                stability: dynamics::Stability,
                samples: Vec<Sample>,
            }
            export::json(&Doc {
                config: cfg,
                backend: cfg.backend,
                route: traj.route,
                prefactors: s.pref,
                stability: st,
                samples: times
                    .iter()
                    .zip(traj.value)
                    .map(|(&t, moments)| Sample { t, moments })
                    .collect(),
            })
        }
    })
}

fn witness_meta(rep: &VlfReport) -> Vec<(&'static str, String)> {
    let mut meta: Vec<(&'static str, String)> = rep
        .records
        .iter()
        .map(|r| {
            (
                "witness",
                format!(
                    "{} lhs={} bound={} ratio={} violated={}",
                    r.bipartition,
                    num(r.lhs),
                    num(r.bound),
                    num(r.ratio()),
                    r.violated
                ),
            )
        })
        .collect();
    meta.push(("fully_inseparable", rep.fully_inseparable.to_string()));
    meta
}

pub fn steady(cfg: &RunConfig, format: Format) -> Result<String, Failure> {
    let s = setup(cfg)?;
    let sys = MomentSystem::new(&s.pref, cfg.kappa, cfg.backend);
    let st = sys.stability();
    let m = sys.steady_state().map_err(dynamics_failure)?;
    let mut warnings = dynamics::physicality_warnings(&m);
    if !warnings.is_empty() {
        warnings.push("witness verdicts below come from unphysical moments and certify nothing".into());
    }
    let comparison = if cfg.backend == Backend::PaperLiteral {
        let cmp = dynamics::compare_backends(&s.pref, cfg.kappa).map_err(dynamics_failure)?;
        if cmp.discrepant() {
            warnings.push(format!(
                "paper-literal and ehrenfest steady states differ by up to {}",
                num(cmp.max_abs_diff)
            ));
        }
        Some(cmp)
    } else {
        None
    };
    for w in &warnings {
        warn(w);
    }
    let report = entanglement::witness(&m, cfg.optimize);
    Ok(match format {
        Format::Csv => {
            let mut meta = base_meta("steady", cfg, &s.pref);
            meta.push(("eigenvalues", eigs(&st)));
            meta.push(("margin", num(st.margin)));
            meta.extend(witness_meta(&report));
            meta.extend(warnings.iter().map(|w| ("warning", w.clone())));
            export::trajectory_csv(&meta, &[(f64::INFINITY, m)])
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a RunConfig,
                backend: Backend,
                prefactors: Prefactors,
                stability: dynamics::Stability,
                moments: SecondMoments,
                witness: VlfReport,
                warnings: Vec<String>,
                #[serde(skip_serializing_if = "Option::is_none")]
                comparison: Option<dynamics::BackendComparison>,
            }
            export::json(&Doc {
                config: cfg,
                backend: cfg.backend,
                prefactors: s.pref,
                stability: st,
                moments: m,
                witness: report,
                warnings,
                comparison,
            })
        }
    })
}

pub fn oracle(cfg: &RunConfig, format: Format) -> Result<String, Failure> {
    let s = setup(cfg)?;
    let fock = FockConfig {
        n_max: cfg.n_max_triple()?,
        dt: cfg.dt,
        t_final: cfg.t,
        edge_tol: cfg.edge_tol,
        samples: cfg.samples,
        check_convergence: cfg.convergence_check,
        convergence_tol: FockConfig::default().convergence_tol,
        layout: if cfg.dense { LayoutMode::Dense } else { LayoutMode::Auto },
    };
    let rho = DensityState::vacuum(&fock).map_err(oracle_failure)?;
    let run = fock_oracle::integrate(&rho, &fock, &s.pref, cfg.kappa).map_err(oracle_failure)?;
    for w in &run.warnings {
        warn(w);
    }
    let outside = run
        .samples
        .iter()
        .map(|x| x.moments.outside_closure())
        .fold(0.0, f64::max);
    Ok(match format {
        Format::Csv => {
            let mut meta = base_meta("oracle", cfg, &s.pref);
            meta.push(("n_max", format!("{:?}", fock.n_max)));
            meta.push(("dt", num(run.dt)));
            meta.push(("stored_entries", run.final_state.layout().stored().to_string()));
            meta.push(("convergence_residue", run.convergence_residue.map(num).unwrap_or_else(|| "unchecked".into())));
            meta.push(("min_eigenvalue", run.min_eigenvalue.map(num).unwrap_or_else(|| "not computed".into())));
            meta.push(("max_outside_closure", num(outside)));
            meta.extend(run.warnings.iter().map(|w| ("warning", w.clone())));
            export::oracle_csv(&meta, &run.samples)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct OracleSampleDoc {
                t: f64,
                #[serde(flatten)]
                moments: SecondMoments,
                outside_closure: f64,
                trace_residue: f64,
                max_edge: f64,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a RunConfig,
                prefactors: Prefactors,
                n_max: [usize; 3],
                dt: f64,
                convergence_residue: Option<f64>,
                min_eigenvalue: Option<f64>,
                warnings: &'a [String],
                samples: Vec<OracleSampleDoc>,
            }
            export::json(&Doc {
                config: cfg,
                prefactors: s.pref,
                n_max: fock.n_max,
                dt: run.dt,
                convergence_residue: run.convergence_residue,
                min_eigenvalue: run.min_eigenvalue,
                warnings: &run.warnings,
                samples: run
                    .samples
                    .iter()
                    .map(|x| OracleSampleDoc {
                        t: x.t,
                        moments: x.closure(),
                        outside_closure: x.moments.outside_closure(),
                        trace_residue: x.trace_residue,
                        max_edge: x.max_edge,
                    })
                    .collect(),
            })
        }
    })
}

pub fn sweep(cfg: &RunConfig, format: Format, threads: Option<usize>) -> Result<String, Failure> {
    let a = gain(cfg)?;
    let (n1, n2) = cfg.grid()?;
    let template = SweepTemplate {
        a,
        kappa: cfg.kappa,
        backend: cfg.backend,
        mode: match cfg.sweep_mode {
            SweepKind::Steady => SweepMode::Steady,
            SweepKind::FixedTime => SweepMode::FixedTime(cfg.t),
        },
        optimize: cfg.optimize,
    };
    let mut rows = entanglement::sweep(&entanglement::eta_grid(n1, n2), &template, threads);
    if cfg.valid_only {
        rows.retain(|r| r.valid);
    }
    let count = |f: &dyn Fn(&entanglement::SweepRow) -> bool| rows.iter().filter(|r| f(r)).count();
    eprintln!(
        "sweep: {} points, {} valid, {} stable, {} fully inseparable",
        rows.len(),
        count(&|r| r.valid),
        count(&|r| r.stable == Some(true)),
        count(&|r| r.report.is_some_and(|x| x.fully_inseparable))
    );
    Ok(match format {
        Format::Csv => {
            let meta = vec![
                ("ycel", "sweep".to_string()),
                ("config", cfg.to_json_line()),
                ("backend", cfg.backend.to_string()),
                ("A", num(a)),
            ];
            export::sweep_csv(&meta, &rows)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a RunConfig,
                #[serde(rename = "A")]
                a: f64,
                rows: &'a [entanglement::SweepRow],
            }
            export::json(&Doc { config: cfg, a, rows: &rows })
        }
    })
}
