// Copyright 2026 The ycel Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference: the three-mode master equation integrated on a
//! truncated Fock space.
//!
//! Every term of the generator has the form
//! `c (2 X ρ Y − Y X ρ − ρ Y X)` with `X`, `Y` single ladder operators, so the
//! generator is stored as a list of such triples. Each term changes the charge
//! `n₂ + n₃ − n₁` of the ket and of the bra by the same amount, hence the
//! charge difference of a matrix element is conserved. Starting from a state
//! without coherences between charge sectors, the density matrix stays block
//! diagonal and only those blocks are stored ([`Layout::Sectors`]). The
//! [`Layout::Dense`] layout stores the full matrix and is used to audit that
//! claim directly.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SecondMoments;
use crate::model::Prefactors;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid Fock configuration: {0}")]
    Config(String),
    #[error(
        "truncation breach at t = {t:.4}: edge population of mode {mode} is {population:.3e} > {edge_tol:.1e}; \
         increase n_max"
    )]
    Truncation {
        t: f64,
        mode: usize,
        population: f64,
        edge_tol: f64,
    },
    #[error("trace drifted to {trace} at t = {t}; reduce the integrator step")]
    TraceDrift { t: f64, trace: f64 },
    #[error("step halving changed tracked moments by {residue:.3e} (> {tol:.1e}); reduce dt")]
    NotConverged { residue: f64, tol: f64 },
}

/// How the density matrix is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutMode {
    /// Charge blocks when the initial state allows it, dense otherwise.
    #[default]
    Auto,
    /// Always the full matrix.
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    /// Per-mode truncation: photon numbers `0..=n_max[i]` are kept.
    pub n_max: [usize; 3],
    /// Fixed RK4 step.
    pub dt: f64,
    pub t_final: f64,
    /// Largest population tolerated in any mode's top Fock layer.
    pub edge_tol: f64,
    /// Number of equal intervals sampled on `[0, t_final]`.
    pub samples: usize,
    /// Repeat the run at `dt/2` and compare.
    pub check_convergence: bool,
    pub convergence_tol: f64,
    pub layout: LayoutMode,
}

impl FockConfig {
    pub fn uniform(n_max: usize) -> Self {
        Self {
            n_max: [n_max; 3],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_max.iter().any(|&n| n < 1) {
            return Err(OracleError::Config(format!("n_max must be >= 1, got {:?}", self.n_max)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(OracleError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(OracleError::Config(format!("t_final must be nonnegative, got {}", self.t_final)));
        }
        if !(self.edge_tol > 0.0 && self.edge_tol < 1.0) {
            return Err(OracleError::Config(format!("edge_tol must lie in (0, 1), got {}", self.edge_tol)));
        }
        if self.samples == 0 {
            return Err(OracleError::Config("samples must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.samples)
            .map(|k| self.t_final * k as f64 / self.samples as f64)
            .collect()
    }
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_max: [5; 3],
            dt: 0.02,
            t_final: 10.0,
            edge_tol: 1e-6,
            samples: 10,
            check_convergence: true,
            convergence_tol: 1e-6,
            layout: LayoutMode::Auto,
        }
    }
}

/// Product basis `|n₁ n₂ n₃⟩` with `n₃` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    pub n_max: [usize; 3],
    occupations: Vec<[usize; 3]>,
}

impl FockBasis {
    pub fn new(n_max: [usize; 3]) -> Self {
        let mut occupations = Vec::new();
        for a in 0..=n_max[0] {
            for b in 0..=n_max[1] {
                for c in 0..=n_max[2] {
                    occupations.push([a, b, c]);
                }
            }
        }
        Self { n_max, occupations }
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn index(&self, n: [usize; 3]) -> Option<usize> {
        if (0..3).any(|m| n[m] > self.n_max[m]) {
            return None;
        }
        Some((n[0] * (self.n_max[1] + 1) + n[1]) * (self.n_max[2] + 1) + n[2])
    }

    pub fn occupation(&self, i: usize) -> [usize; 3] {
        self.occupations[i]
    }

    /// Conserved charge `n₂ + n₃ − n₁`.
    pub fn charge(&self, i: usize) -> i64 {
        let [a, b, c] = self.occupations[i];
        b as i64 + c as i64 - a as i64
    }

    fn ladder(&self, mode: usize, raise: bool) -> Ladder {
        let mut target = Vec::with_capacity(self.dim());
        let mut coef = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let mut n = self.occupations[i];
            let (ok, c) = if raise {
                n[mode] += 1;
                (n[mode] <= self.n_max[mode], (n[mode] as f64).sqrt())
            } else if n[mode] > 0 {
                let c = (n[mode] as f64).sqrt();
                n[mode] -= 1;
                (true, c)
            } else {
                (false, 0.0)
            };
            match (ok, self.index(n)) {
                (true, Some(j)) => {
                    target.push(Some(j));
                    coef.push(c);
                }
                _ => {
                    target.push(None);
                    coef.push(0.0);
                }
            }
        }
        Ladder { target, coef }
    }

    /// `âₘ` (mode 0-based).
    pub fn lower(&self, mode: usize) -> Ladder {
        self.ladder(mode, false)
    }

    /// `âₘ†`, truncated at `n_max`.
    pub fn raise(&self, mode: usize) -> Ladder {
        self.ladder(mode, true)
    }
}

/// An operator mapping each basis state to at most one basis state:
/// `L|k⟩ = coef[k] |target[k]⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    target: Vec<Option<usize>>,
    coef: Vec<f64>,
}

impl Ladder {
    /// `self ∘ inner` (apply `inner` first).
    pub fn after(&self, inner: &Ladder) -> Ladder {
        let mut target = Vec::with_capacity(inner.target.len());
        let mut coef = Vec::with_capacity(inner.target.len());
        for (t, c) in inner.target.iter().zip(&inner.coef) {
            match t.and_then(|m| self.target[m].map(|n| (n, c * self.coef[m]))) {
                Some((n, v)) => {
                    target.push(Some(n));
                    coef.push(v);
                }
                None => {
                    target.push(None);
                    coef.push(0.0);
                }
            }
        }
        Ladder { target, coef }
    }

    fn inverse(&self) -> Vec<Option<(usize, f64)>> {
        let mut inv = vec![None; self.target.len()];
        for (k, t) in self.target.iter().enumerate() {
            if let Some(n) = t {
                inv[*n] = Some((k, self.coef[k]));
            }
        }
        inv
    }
}

/// Storage layout of a density matrix: blocks of basis states, with only
/// intra-block elements stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    basis: FockBasis,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    local: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
    sectors: bool,
}

impl Layout {
    pub fn dense(basis: FockBasis) -> Self {
        let blocks = vec![(0..basis.dim()).collect()];
        Self::from_blocks(basis, blocks, false)
    }

    pub fn sectors(basis: FockBasis) -> Self {
        let (lo, hi) = (-(basis.n_max[0] as i64), (basis.n_max[1] + basis.n_max[2]) as i64);
        let mut blocks: Vec<Vec<usize>> = (lo..=hi)
            .map(|q| (0..basis.dim()).filter(|&i| basis.charge(i) == q).collect())
            .collect();
        blocks.retain(|b| !b.is_empty());
        Self::from_blocks(basis, blocks, true)
    }

    fn from_blocks(basis: FockBasis, blocks: Vec<Vec<usize>>, sectors: bool) -> Self {
        let mut block_of = vec![0; basis.dim()];
        let mut local = vec![0; basis.dim()];
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut len = 0;
        for (b, states) in blocks.iter().enumerate() {
            offsets.push(len);
            len += states.len() * states.len();
            for (l, &s) in states.iter().enumerate() {
                block_of[s] = b;
                local[s] = l;
            }
        }
        Self {
            basis,
            blocks,
            block_of,
            local,
            offsets,
            len,
            sectors,
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Number of stored complex entries.
    pub fn stored(&self) -> usize {
        self.len
    }

    pub fn is_sectored(&self) -> bool {
        self.sectors
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let b = self.block_of[i];
        if self.block_of[j] != b {
            return None;
        }
        let s = self.blocks[b].len();
        Some(self.offsets[b] + self.local[i] * s + self.local[j])
    }
}

/// Density matrix on a truncated three-mode Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    layout: Arc<Layout>,
    data: Vec<Complex64>,
}

impl DensityState {
    /// `|n⟩⟨n|` in the given layout.
    pub fn fock(layout: Arc<Layout>, n: [usize; 3]) -> Result<Self, OracleError> {
        let i = layout
            .basis
            .index(n)
            .ok_or_else(|| OracleError::Config(format!("occupation {n:?} exceeds n_max {:?}", layout.basis.n_max)))?;
        let mut data = vec![Complex64::new(0.0, 0.0); layout.len];
        let pos = layout.position(i, i).expect("diagonal is always stored");
        data[pos] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, data })
    }

    /// Vacuum for the given configuration, in charge blocks unless the
    /// configuration asks for the dense layout.
    pub fn vacuum(cfg: &FockConfig) -> Result<Self, OracleError> {
        cfg.validate()?;
        let basis = FockBasis::new(cfg.n_max);
        let layout = match cfg.layout {
            LayoutMode::Auto => Layout::sectors(basis),
            LayoutMode::Dense => Layout::dense(basis),
        };
        Self::fock(Arc::new(layout), [0, 0, 0])
    }

    /// Imports a full matrix; charge blocks are used when `mode` is `Auto` and
    /// every cross-sector element vanishes exactly.
    pub fn from_matrix(n_max: [usize; 3], rho: &DMatrix<Complex64>, mode: LayoutMode) -> Result<Self, OracleError> {
        let basis = FockBasis::new(n_max);
        let d = basis.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(OracleError::Config(format!(
                "matrix is {}x{}, basis dimension is {d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let sectored = Layout::sectors(basis.clone());
        let block_diagonal = (0..d).all(|i| (0..d).all(|j| sectored.position(i, j).is_some() || rho[(i, j)] == Complex64::new(0.0, 0.0)));
        let layout = if mode == LayoutMode::Auto && block_diagonal {
            sectored
        } else {
            Layout::dense(basis)
        };
        let mut data = vec![Complex64::new(0.0, 0.0); layout.len];
        for i in 0..d {
            for j in 0..d {
                if let Some(p) = layout.position(i, j) {
                    data[p] = rho[(i, j)];
                }
            }
        }
        Ok(Self {
            layout: Arc::new(layout),
            data,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.basis.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.layout
            .position(i, j)
            .map_or(Complex64::new(0.0, 0.0), |p| self.data[p])
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_residue(&self) -> f64 {
        let mut worst = 0.0f64;
        for (b, states) in self.layout.blocks.iter().enumerate() {
            let s = states.len();
            let off = self.layout.offsets[b];
            for r in 0..s {
                for c in r..s {
                    let x = self.data[off + r * s + c];
                    let y = self.data[off + c * s + r];
                    worst = worst.max((x - y.conj()).norm());
                }
            }
        }
        worst
    }

    fn hermitize(&mut self) {
        for (b, states) in self.layout.blocks.iter().enumerate() {
            let s = states.len();
            let off = self.layout.offsets[b];
            for r in 0..s {
                let d = off + r * s + r;
                self.data[d] = Complex64::new(self.data[d].re, 0.0);
                for c in r + 1..s {
                    let (p, q) = (off + r * s + c, off + c * s + r);
                    let avg = 0.5 * (self.data[p] + self.data[q].conj());
                    self.data[p] = avg;
                    self.data[q] = avg.conj();
                }
            }
        }
    }

    /// Population of the top Fock layer of each mode.
    pub fn edge_populations(&self) -> [f64; 3] {
        let basis = &self.layout.basis;
        let mut out = [0.0; 3];
        for i in 0..basis.dim() {
            let n = basis.occupation(i);
            let p = self.get(i, i).re;
            for m in 0..3 {
                if n[m] == basis.n_max[m] {
                    out[m] += p;
                }
            }
        }
        out
    }

    /// `Tr(ρ L)` for a single-target operator.
    fn expect(&self, op: &Ladder) -> Complex64 {
        op.target
            .iter()
            .zip(&op.coef)
            .enumerate()
            .filter_map(|(k, (t, c))| t.map(|m| self.get(k, m) * *c))
            .sum()
    }

    /// Smallest eigenvalue, computed block by block. `None` when the state is
    /// dense and larger than `max_dense`.
    pub fn min_eigenvalue(&self, max_dense: usize) -> Option<f64> {
        let mut worst = f64::INFINITY;
        for (b, states) in self.layout.blocks.iter().enumerate() {
            let s = states.len();
            if !self.layout.sectors && s > max_dense {
                return None;
            }
            let off = self.layout.offsets[b];
            let m = DMatrix::from_fn(s, s, |r, c| self.data[off + r * s + c]);
            let eig = m.symmetric_eigenvalues();
            worst = worst.min(eig.min());
        }
        Some(worst)
    }
}

/// The precomputed generator on one layout.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    layout: Arc<Layout>,
    sandwiches: Vec<Sandwich>,
    // K = Σ c Y X, stored by row and by column.
    k_rows: Vec<Vec<(usize, f64)>>,
    k_cols: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone)]
struct Sandwich {
    weight: f64,
    // Output row i = X(i') reads source row i'.
    x_inv: Vec<Option<(usize, f64)>>,
    // Per output block: (output column, source column in the source block,
    // Y coefficient). Every row of a block reads the same source block.
    cols: Vec<Vec<(usize, usize, f64)>>,
}

impl Liouvillian {
    pub fn new(layout: Arc<Layout>, p: &Prefactors, kappa: f64) -> Self {
        let basis = &layout.basis;
        let lo: Vec<Ladder> = (0..3).map(|m| basis.lower(m)).collect();
        let hi: Vec<Ladder> = (0..3).map(|m| basis.raise(m)).collect();
        let a = p.a;
        // (c, X, Y) for c (2XρY − YXρ − ρYX), modes 0-based.
        let terms: Vec<(f64, &Ladder, &Ladder)> = vec![
            (a * p.b, &hi[2], &lo[2]),
            (a * p.e, &hi[2], &lo[1]),
            (a * p.e, &hi[1], &lo[2]),
            (a * p.c, &hi[1], &lo[1]),
            (-a * p.f, &lo[0], &lo[2]),
            (-a * p.f, &hi[2], &hi[0]),
            (a * p.d, &lo[0], &hi[0]),
            (-a * p.g, &lo[0], &lo[1]),
            (-a * p.g, &hi[1], &hi[0]),
            (kappa / 2.0, &lo[0], &hi[0]),
            (kappa / 2.0, &lo[1], &hi[1]),
            (kappa / 2.0, &lo[2], &hi[2]),
        ];
        let d = basis.dim();
        let mut k_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
        let mut sandwiches = Vec::new();
        for (c, x, y) in terms {
            if c == 0.0 {
                continue;
            }
            let yx = y.after(x);
            for (col, (t, v)) in yx.target.iter().zip(&yx.coef).enumerate() {
                if let Some(row) = t {
                    match k_rows[*row].iter_mut().find(|(cc, _)| *cc == col) {
                        Some(entry) => entry.1 += c * v,
                        None => k_rows[*row].push((col, c * v)),
                    }
                }
            }
            let x_inv = x.inverse();
            let cols = layout
                .blocks
                .iter()
                .map(|states| {
                    let Some(src_block) = states.iter().find_map(|&i| x_inv[i].map(|(s, _)| layout.block_of[s])) else {
                        return Vec::new();
                    };
                    states
                        .iter()
                        .enumerate()
                        .filter_map(|(c, &j)| {
                            y.target[j]
                                .filter(|&yj| layout.block_of[yj] == src_block)
                                .map(|yj| (c, layout.local[yj], y.coef[j]))
                        })
                        .collect()
                })
                .collect();
            sandwiches.push(Sandwich {
                weight: 2.0 * c,
                x_inv,
                cols,
            });
        }
        let mut k_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
        for (row, entries) in k_rows.iter_mut().enumerate() {
            entries.retain(|(_, v)| *v != 0.0);
            entries.sort_by_key(|e| e.0);
            for &(col, v) in entries.iter() {
                k_cols[col].push((row, v));
            }
        }
        Self {
            layout,
            sandwiches,
            k_rows,
            k_cols,
        }
    }

    /// `dρ/dt`.
    pub fn apply(&self, rho: &DensityState) -> Result<DensityState, OracleError> {
        if !Arc::ptr_eq(&rho.layout, &self.layout) && *rho.layout != *self.layout {
            return Err(OracleError::Config("state and generator use different Fock layouts".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.layout.len];
        self.apply_into(&rho.data, &mut out);
        Ok(DensityState {
            layout: self.layout.clone(),
            data: out,
        })
    }

    fn apply_into(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let lay = &*self.layout;
        let zero = Complex64::new(0.0, 0.0);
        out.iter_mut().for_each(|v| *v = zero);
        for (b, states) in lay.blocks.iter().enumerate() {
            let s = states.len();
            let off = lay.offsets[b];
            for (r, &i) in states.iter().enumerate() {
                let row = &mut out[off + r * s..off + (r + 1) * s];
                // 2c X ρ Y: out(i, j) += 2c x(i') y(j) ρ(i', Y(j)).
                for sw in &self.sandwiches {
                    let Some((src, xc)) = sw.x_inv[i] else { continue };
                    let sb = lay.block_of[src];
                    let ss = lay.blocks[sb].len();
                    let src_row = lay.offsets[sb] + lay.local[src] * ss;
                    let w = sw.weight * xc;
                    for &(c, ly, yc) in &sw.cols[b] {
                        row[c] += rho[src_row + ly] * (w * yc);
                    }
                }
                // −K ρ
                for &(l, kv) in &self.k_rows[i] {
                    let lr = off + lay.local[l] * s;
                    for c in 0..s {
                        row[c] -= rho[lr + c] * kv;
                    }
                }
                // −ρ K
                let rr = off + r * s;
                for (c, &j) in states.iter().enumerate() {
                    let mut acc = zero;
                    for &(l, kv) in &self.k_cols[j] {
                        acc += rho[rr + lay.local[l]] * kv;
                    }
                    row[c] -= acc;
                }
            }
        }
    }
}

/// `dρ/dt` for a state, building the generator on the fly.
pub fn liouvillian_apply(rho: &DensityState, p: &Prefactors, kappa: f64) -> Result<DensityState, OracleError> {
    Liouvillian::new(rho.layout.clone(), p, kappa).apply(rho)
}

/// All first and second moments of the three modes (modes 0-based in the
/// arrays).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    /// ⟨âᵢ⟩
    pub mean: [Complex64; 3],
    /// ⟨âᵢ†âⱼ⟩ at `[i][j]`.
    pub normal: [[Complex64; 3]; 3],
    /// ⟨âᵢâⱼ⟩ at `[i][j]`.
    pub anomalous: [[Complex64; 3]; 3],
}

impl MomentTable {
    /// The six closure moments and the largest imaginary part among them.
    pub fn closure(&self) -> (SecondMoments, f64) {
        let picks = [
            self.normal[0][0],
            self.normal[1][1],
            self.normal[2][2],
            self.normal[2][1],
            self.anomalous[2][0],
            self.anomalous[1][0],
        ];
        let imag = picks.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (SecondMoments::from_array(picks.map(|z| z.re)), imag)
    }

    /// Largest magnitude among moments outside the closure set (first
    /// moments, ⟨â₁†â₂⟩, ⟨â₁†â₃⟩ and conjugates, ⟨âᵢ²⟩, ⟨â₃â₂⟩).
    pub fn outside_closure(&self) -> f64 {
        let mut vals = vec![
            self.normal[0][1],
            self.normal[1][0],
            self.normal[0][2],
            self.normal[2][0],
            self.anomalous[1][2],
        ];
        vals.extend(self.mean);
        vals.extend((0..3).map(|i| self.anomalous[i][i]));
        vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn moments_from_state(rho: &DensityState) -> MomentTable {
    let basis = &rho.layout.basis;
    let lo: Vec<Ladder> = (0..3).map(|m| basis.lower(m)).collect();
    let hi: Vec<Ladder> = (0..3).map(|m| basis.raise(m)).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut t = MomentTable {
        mean: [zero; 3],
        normal: [[zero; 3]; 3],
        anomalous: [[zero; 3]; 3],
    };
    for i in 0..3 {
        t.mean[i] = rho.expect(&lo[i]);
        for j in 0..3 {
            t.normal[i][j] = rho.expect(&hi[i].after(&lo[j]));
            t.anomalous[i][j] = rho.expect(&lo[i].after(&lo[j]));
        }
    }
    t
}

/// One sampled point of an oracle run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub moments: MomentTable,
    pub trace_residue: f64,
    pub max_edge: f64,
}

impl OracleSample {
    pub fn closure(&self) -> SecondMoments {
        self.moments.closure().0
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub samples: Vec<OracleSample>,
    pub final_state: DensityState,
    /// Step actually used for the reported samples.
    pub dt: f64,
    /// Largest tracked-moment change under step halving, if checked.
    pub convergence_residue: Option<f64>,
    /// Smallest eigenvalue of the final state, if computed.
    pub min_eigenvalue: Option<f64>,
    pub warnings: Vec<String>,
}

/// Eigenvalues down to this value are accepted silently.
pub const NEGATIVITY_TOL: f64 = -1e-8;

/// Largest dense block for which the final-state spectrum is computed.
const MAX_DENSE_EIGEN: usize = 512;

fn tracked(sample: &OracleSample) -> [f64; 6] {
    sample.closure().to_array()
}

/// Integrates `rho0` over `[0, cfg.t_final]` and samples `cfg.samples + 1`
/// equally spaced times.
pub fn integrate(rho0: &DensityState, cfg: &FockConfig, p: &Prefactors, kappa: f64) -> Result<OracleRun, OracleError> {
    integrate_at(rho0, cfg, p, kappa, &cfg.sample_times())
}

/// Like [`integrate`] but samples at explicit nondecreasing `times`.
pub fn integrate_at(
    rho0: &DensityState,
    cfg: &FockConfig,
    p: &Prefactors,
    kappa: f64,
    times: &[f64],
) -> Result<OracleRun, OracleError> {
    cfg.validate()?;
    if rho0.layout.basis.n_max != cfg.n_max {
        return Err(OracleError::Config(format!(
            "state truncation {:?} differs from configuration {:?}",
            rho0.layout.basis.n_max, cfg.n_max
        )));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(OracleError::Config("sample times must be finite, nonnegative and sorted".into()));
    }
    let gen = Liouvillian::new(rho0.layout.clone(), p, kappa);
    let (samples, state, dt) = if cfg.check_convergence {
        let (coarse, _) = run_fixed(&gen, rho0, cfg, cfg.dt, times)?;
        let (fine, state) = run_fixed(&gen, rho0, cfg, cfg.dt / 2.0, times)?;
        let residue = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| tracked(a).into_iter().zip(tracked(b)).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if residue > cfg.convergence_tol {
            return Err(OracleError::NotConverged {
                residue,
                tol: cfg.convergence_tol,
            });
        }
        return finish(fine, state, cfg.dt / 2.0, Some(residue));
    } else {
        let (s, st) = run_fixed(&gen, rho0, cfg, cfg.dt, times)?;
        (s, st, cfg.dt)
    };
    finish(samples, state, dt, None)
}

fn finish(
    samples: Vec<OracleSample>,
    state: DensityState,
    dt: f64,
    convergence_residue: Option<f64>,
) -> Result<OracleRun, OracleError> {
    let min_eigenvalue = state.min_eigenvalue(MAX_DENSE_EIGEN);
    let mut warnings = Vec::new();
    if let Some(m) = min_eigenvalue {
        if m < NEGATIVITY_TOL {
            warnings.push(format!("final density matrix has eigenvalue {m:.3e} below {NEGATIVITY_TOL:.0e}"));
        }
    }
    Ok(OracleRun {
        samples,
        final_state: state,
        dt,
        convergence_residue,
        min_eigenvalue,
        warnings,
    })
}

fn observe(state: &DensityState, t: f64, cfg: &FockConfig) -> Result<OracleSample, OracleError> {
    let trace = state.trace().re;
    if (trace - 1.0).abs() > 1e-6 {
        return Err(OracleError::TraceDrift { t, trace });
    }
    let edges = state.edge_populations();
    check_edges(&edges, t, cfg)?;
    Ok(OracleSample {
        t,
        moments: moments_from_state(state),
        trace_residue: (trace - 1.0).abs(),
        max_edge: edges.iter().copied().fold(0.0, f64::max),
    })
}

fn check_edges(edges: &[f64; 3], t: f64, cfg: &FockConfig) -> Result<(), OracleError> {
    for (mode, &population) in edges.iter().enumerate() {
        if population > cfg.edge_tol {
            return Err(OracleError::Truncation {
                t,
                mode: mode + 1,
                population,
                edge_tol: cfg.edge_tol,
            });
        }
    }
    Ok(())
}

fn run_fixed(
    gen: &Liouvillian,
    rho0: &DensityState,
    cfg: &FockConfig,
    dt: f64,
    times: &[f64],
) -> Result<(Vec<OracleSample>, DensityState), OracleError> {
    let n = rho0.data.len();
    let mut y = rho0.data.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]);
    let mut tmp = vec![Complex64::default(); n];
    let mut state = rho0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = if span > 0.0 { (span / dt - 1e-9).ceil().max(1.0) as usize } else { 0 };
        for _ in 0..steps {
            let h = span / steps as f64;
            gen.apply_into(&y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * (h / 2.0);
            }
            gen.apply_into(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + k2[i] * (h / 2.0);
            }
            gen.apply_into(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + k3[i] * h;
            }
            gen.apply_into(&tmp, &mut k4);
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
            state.data.copy_from_slice(&y);
            state.hermitize();
            y.copy_from_slice(&state.data);
            t += h;
            let trace = state.trace().re;
            if (trace - 1.0).abs() > 1e-6 {
                return Err(OracleError::TraceDrift { t, trace });
            }
            check_edges(&state.edge_populations(), t, cfg)?;
        }
        t = target;
        state.data.copy_from_slice(&y);
        out.push(observe(&state, t, cfg)?);
    }
    Ok((out, state))
}
