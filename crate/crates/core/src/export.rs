// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Text layouts shared by the command-line tool and the browser demo.
//!
//! CSV files start with `#` comment lines carrying the run metadata, then one
//! header row, then data rows. Numbers are written with 12 significant digits
//! in exponent form so identical runs give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::SecondMoments;
use crate::entanglement::{Bipartition, SweepRow};
use crate::fock_oracle::OracleSample;

pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "n1", "n2", "n3", "c32", "c31", "c21"];
pub const ORACLE_EXTRA_COLUMNS: [&str; 2] = ["trace_residue", "max_edge"];

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `# key: value` lines. Values must not contain newlines.
pub fn comment_block(meta: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        debug_assert!(!v.contains('\n'));
        let _ = writeln!(out, "# {k}: {v}");
    }
    out
}

fn moment_cells(m: &SecondMoments) -> impl Iterator<Item = String> {
    [m.n1, m.n2, m.n3, m.c32, m.c31, m.c21].into_iter().map(num)
}

pub fn trajectory_csv(meta: &[(&str, String)], rows: &[(f64, SecondMoments)]) -> String {
    let mut out = comment_block(meta);
    out.push_str(&TRAJECTORY_COLUMNS.join(","));
    out.push('\n');
    for (t, m) in rows {
        let cells: Vec<String> = std::iter::once(num(*t)).chain(moment_cells(m)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn oracle_csv(meta: &[(&str, String)], samples: &[OracleSample]) -> String {
    let mut out = comment_block(meta);
    let header: Vec<&str> = TRAJECTORY_COLUMNS.iter().chain(&ORACLE_EXTRA_COLUMNS).copied().collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for s in samples {
        let cells: Vec<String> = std::iter::once(num(s.t))
            .chain(moment_cells(&s.closure()))
            .chain([num(s.trace_residue), num(s.max_edge)])
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sweep_header() -> String {
    let mut cols: Vec<String> = ["eta1", "eta2", "valid", "stable", "margin", "n1", "n2", "n3", "c32", "c31", "c21"]
        .map(String::from)
        .to_vec();
    cols.extend(Bipartition::ALL.map(|b| format!("ratio_{}", b.label())));
    cols.extend(Bipartition::ALL.map(|b| format!("violated_{}", b.label())));
    cols.push("fully_inseparable".into());
    cols.join(",")
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

pub fn sweep_csv(meta: &[(&str, String)], rows: &[SweepRow]) -> String {
    let mut out = comment_block(meta);
    out.push_str(&sweep_header());
    out.push('\n');
    for r in rows {
        let mut cells = vec![num(r.eta1), num(r.eta2), flag(r.valid)];
        cells.push(r.stable.map(flag).unwrap_or_default());
        cells.push(opt(r.margin));
        match &r.moments {
            Some(m) => cells.extend(moment_cells(m)),
            None => cells.extend(std::iter::repeat_n(String::new(), 6)),
        }
        match &r.report {
            Some(rep) => {
                cells.extend(rep.ratios().map(num));
                cells.extend(rep.records.map(|w| flag(w.violated)));
                cells.push(flag(rep.fully_inseparable));
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 7)),
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(num(0.0), "0.00000000000e0");
        assert_eq!(num(-2.5e-10), "-2.50000000000e-10");
    }

    #[test]
    fn trajectory_layout() {
        let csv = trajectory_csv(&[("backend", "ehrenfest".into())], &[(0.0, SecondMoments::VACUUM)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# backend: ehrenfest");
        assert_eq!(lines[1], "t,n1,n2,n3,c32,c31,c21");
        assert_eq!(lines[2].split(',').count(), 7);
        assert!(lines[2].split(',').all(|c| c.parse::<f64>().unwrap() == 0.0));
    }

    #[test]
    fn sweep_header_columns() {
        let h = sweep_header();
        assert!(h.starts_with("eta1,eta2,valid,stable,margin,n1"));
        assert!(h.contains("ratio_1|23,ratio_2|13,ratio_3|12"));
        assert_eq!(h.split(',').count(), 18);
    }
}
