//! Monte Carlo evolution of Pauli-string ensembles under brickwork circuits.
//!
//! Each trajectory is a single Pauli string updated layer by layer: every
//! two-site window with non-identity content is independently resampled from
//! the class kernel row of its current restriction. Edge positions are
//! recorded in link coordinates after every layer and aggregated into
//! integer histograms and block sums, so the ensemble reduction is exact
//! and independent of thread scheduling.

use rayon::prelude::*;
use thiserror::Error;

use crate::kernels::{kernel, SymmetryClass, TransitionKernel};
use crate::pauli::{make_string, EdgeCoords, LayerParity, PauliError, PauliString, SiteOp};
use crate::rng::CounterRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("light cone hit boundary")]
    BoundaryHit,
    #[error("fit window [{lo}, {hi}] invalid: {why}")]
    InvalidWindow { lo: usize, hi: usize, why: &'static str },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

pub const DEFAULT_BURN_IN: usize = 20;

/// Number of contiguous trajectory blocks used for slope error bars.
pub(crate) const NUM_BLOCKS: usize = 20;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub class: SymmetryClass,
    pub n: usize,
    pub t_max: usize,
    pub ensemble: u64,
    pub seed: u64,
    pub initial_site: usize,
    pub initial_op: SiteOp,
    pub burn_in: usize,
    pub fit_window: (usize, usize),
}

impl SimConfig {
    pub fn new(class: SymmetryClass, n: usize, t_max: usize, ensemble: u64, seed: u64) -> Self {
        SimConfig {
            class,
            n,
            t_max,
            ensemble,
            seed,
            initial_site: n / 2,
            initial_op: SiteOp::X,
            burn_in: DEFAULT_BURN_IN,
            fit_window: (DEFAULT_BURN_IN.max(t_max / 3), t_max),
        }
    }

    /// Check the invariants that keep every trajectory away from the
    /// open boundaries for all `t_max` layers.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.t_max < 1 {
            return Err(SimError::InvalidConfig("t_max must be at least 1".into()));
        }
        if self.ensemble < 1 {
            return Err(SimError::InvalidConfig("ensemble must be at least 1".into()));
        }
        if self.ensemble > u32::MAX as u64 {
            return Err(SimError::InvalidConfig(
                "ensemble exceeds histogram count range".into(),
            ));
        }
        if self.n <= 2 * self.t_max + 2 {
            return Err(SimError::InvalidConfig(format!(
                "n = {} too small for t_max = {}: need n > 2*t_max + 2",
                self.n, self.t_max
            )));
        }
        // Light cone spreads one site per layer on each side; keep it off
        // sites 0 and n-1 so the dynamics match the infinite chain exactly.
        if self.initial_site < self.t_max + 1 || self.initial_site + self.t_max + 2 > self.n {
            return Err(SimError::InvalidConfig(format!(
                "initial_site = {} leaves less than t_max + 1 = {} sites on one side",
                self.initial_site,
                self.t_max + 1
            )));
        }
        Ok(())
    }
}

/// Per-layer ensemble statistics of the two edge positions, in link
/// coordinates. Histograms are raw trajectory counts indexed by `link + 1`;
/// normalizing a row by `ensemble` gives the front weight profile at that
/// layer. Block sums (contiguous trajectory blocks) feed the fit error bars.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub class: SymmetryClass,
    pub n: usize,
    pub t_max: usize,
    pub ensemble: u64,
    pub seed: u64,
    pub burn_in: usize,
    pub mean_r: Vec<f64>,
    pub var_r: Vec<f64>,
    pub mean_l: Vec<f64>,
    pub var_l: Vec<f64>,
    /// `hist_r[t][x + 1]` = number of trajectories whose right edge sits at
    /// link `x` after `t` layers. Row sums equal `ensemble`.
    pub hist_r: Vec<Vec<u32>>,
    pub hist_l: Vec<Vec<u32>>,
    pub(crate) blocks: BlockSums,
}

#[derive(Clone, Debug)]
pub(crate) struct BlockSums {
    /// Trajectories per block.
    pub count: Vec<u64>,
    /// `sum_r[b][t]` = sum of right links over block `b` at layer `t`.
    pub sum_r: Vec<Vec<i64>>,
    pub sum2_r: Vec<Vec<i64>>,
    pub sum_l: Vec<Vec<i64>>,
    pub sum2_l: Vec<Vec<i64>>,
}

/// Apply one brickwork layer in place. Every gate whose window holds a
/// non-identity two-site Pauli is resampled from the kernel with its own
/// random stream, obtained from `rng_for_gate(gate index)`.
///
/// Errors if the string's support already touches site 0 or n-1 on entry:
/// past that point a finite chain no longer reproduces the infinite one.
pub fn step<F>(
    s: &mut PauliString,
    parity: LayerParity,
    k: &TransitionKernel,
    mut rng_for_gate: F,
) -> Result<EdgeCoords, SimError>
where
    F: FnMut(usize) -> CounterRng,
{
    let e = s.edges()?;
    if e.left_link < 0 || e.right_link > s.n() as i64 - 2 {
        return Err(SimError::BoundaryHit);
    }
    let (lo, hi) = gate_range(e, parity);
    for g in lo..=hi {
        let w = s.gate_window(g, parity)?;
        if w.is_identity() {
            continue;
        }
        let mut rng = rng_for_gate(g);
        s.set_gate_window(g, parity, k.apply_gate(w, &mut rng));
    }
    Ok(s.edges()?)
}

/// Gates of one layer that can meet the support `[l+1, r]`. May include one
/// extra all-identity window at the left boundary of the range; `step` skips
/// those, so the superset is harmless.
fn gate_range(e: EdgeCoords, parity: LayerParity) -> (usize, usize) {
    let (l, r) = (e.left_link, e.right_link);
    match parity {
        LayerParity::Even => ((l / 2) as usize, (r / 2) as usize),
        LayerParity::Odd => (((l - 1).max(0) / 2) as usize, ((r - 1) / 2) as usize),
    }
}

fn simulate_trajectory(
    cfg: &SimConfig,
    k: &TransitionKernel,
    base: &PauliString,
    m: u64,
    rs: &mut Vec<i64>,
    ls: &mut Vec<i64>,
) -> Result<(), SimError> {
    let mut s = base.clone();
    let mut e = s.edges()?;
    rs.clear();
    ls.clear();
    rs.push(e.right_link);
    ls.push(e.left_link);
    for t in 0..cfg.t_max {
        e = step(&mut s, LayerParity::of_layer(t), k, |g| {
            CounterRng::keyed(&[cfg.seed, m, t as u64, g as u64])
        })?;
        rs.push(e.right_link);
        ls.push(e.left_link);
    }
    Ok(())
}

/// Run `cfg.ensemble` independent trajectories and aggregate edge statistics.
///
/// Each trajectory's randomness is keyed by (seed, trajectory, layer, gate),
/// and all accumulators are integers, so the result is a pure function of
/// the config regardless of how rayon schedules the work.
pub fn run_ensemble(cfg: &SimConfig) -> Result<EnsembleStats, SimError> {
    cfg.validate()?;
    let base = make_string(cfg.n, cfg.initial_site, cfg.initial_op)?;
    let k = kernel(cfg.class);
    collect_stats(cfg, |m, rs, ls| {
        simulate_trajectory(cfg, &k, &base, m, rs, ls)
    })
}

/// Aggregate per-trajectory edge series produced by `traj` into ensemble
/// statistics. Series values must stay within `[-1, n]`.
pub(crate) fn collect_stats<F>(cfg: &SimConfig, traj: F) -> Result<EnsembleStats, SimError>
where
    F: Fn(u64, &mut Vec<i64>, &mut Vec<i64>) -> Result<(), SimError> + Sync,
{
    let m_total = cfg.ensemble;
    let blocks = (NUM_BLOCKS as u64).min(m_total) as usize;
    let t_len = cfg.t_max + 1;
    let bins = cfg.n + 2;
    let acc = (0..m_total as usize)
        .into_par_iter()
        .with_min_len(256)
        .try_fold(
            || (Accum::new(t_len, bins, blocks), Vec::new(), Vec::new()),
            |(mut acc, mut rs, mut ls), m| {
                let m = m as u64;
                traj(m, &mut rs, &mut ls)?;
                let b = (m * blocks as u64 / m_total) as usize;
                acc.add(b, &rs, &ls);
                Ok((acc, rs, ls))
            },
        )
        .map(|r: Result<_, SimError>| r.map(|(acc, _, _)| acc))
        .try_reduce(
            || Accum::new(t_len, bins, blocks),
            |a, b| Ok(a.merge(b)),
        )?;
    Ok(acc.finalize(cfg))
}

struct Accum {
    t_len: usize,
    bins: usize,
    hist_r: Vec<u32>,
    hist_l: Vec<u32>,
    bsum_r: Vec<i64>,
    bsum2_r: Vec<i64>,
    bsum_l: Vec<i64>,
    bsum2_l: Vec<i64>,
    bcount: Vec<u64>,
}

impl Accum {
    fn new(t_len: usize, bins: usize, blocks: usize) -> Accum {
        Accum {
            t_len,
            bins,
            hist_r: vec![0; t_len * bins],
            hist_l: vec![0; t_len * bins],
            bsum_r: vec![0; blocks * t_len],
            bsum2_r: vec![0; blocks * t_len],
            bsum_l: vec![0; blocks * t_len],
            bsum2_l: vec![0; blocks * t_len],
            bcount: vec![0; blocks],
        }
    }

    fn add(&mut self, b: usize, rs: &[i64], ls: &[i64]) {
        assert_eq!(rs.len(), self.t_len);
        assert_eq!(ls.len(), self.t_len);
        self.bcount[b] += 1;
        for t in 0..self.t_len {
            let (r, l) = (rs[t], ls[t]);
            self.hist_r[t * self.bins + (r + 1) as usize] += 1;
            self.hist_l[t * self.bins + (l + 1) as usize] += 1;
            self.bsum_r[b * self.t_len + t] += r;
            self.bsum2_r[b * self.t_len + t] += r * r;
            self.bsum_l[b * self.t_len + t] += l;
            self.bsum2_l[b * self.t_len + t] += l * l;
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        for (a, b) in self.hist_r.iter_mut().zip(&other.hist_r) {
            *a += b;
        }
        for (a, b) in self.hist_l.iter_mut().zip(&other.hist_l) {
            *a += b;
        }
        for (a, b) in self.bsum_r.iter_mut().zip(&other.bsum_r) {
            *a += b;
        }
        for (a, b) in self.bsum2_r.iter_mut().zip(&other.bsum2_r) {
            *a += b;
        }
        for (a, b) in self.bsum_l.iter_mut().zip(&other.bsum_l) {
            *a += b;
        }
        for (a, b) in self.bsum2_l.iter_mut().zip(&other.bsum2_l) {
            *a += b;
        }
        for (a, b) in self.bcount.iter_mut().zip(&other.bcount) {
            *a += b;
        }
        self
    }

    fn finalize(self, cfg: &SimConfig) -> EnsembleStats {
        let blocks = self.bcount.len();
        let t_len = self.t_len;
        let m = cfg.ensemble;
        let unflatten_i64 = |v: &[i64]| -> Vec<Vec<i64>> {
            (0..blocks).map(|b| v[b * t_len..(b + 1) * t_len].to_vec()).collect()
        };
        let sum_r = unflatten_i64(&self.bsum_r);
        let sum2_r = unflatten_i64(&self.bsum2_r);
        let sum_l = unflatten_i64(&self.bsum_l);
        let sum2_l = unflatten_i64(&self.bsum2_l);

        let mut mean_r = Vec::with_capacity(t_len);
        let mut var_r = Vec::with_capacity(t_len);
        let mut mean_l = Vec::with_capacity(t_len);
        let mut var_l = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let (mr, vr) = mean_var(
                sum_r.iter().map(|b| b[t]).sum(),
                sum2_r.iter().map(|b| b[t]).sum(),
                m,
            );
            let (ml, vl) = mean_var(
                sum_l.iter().map(|b| b[t]).sum(),
                sum2_l.iter().map(|b| b[t]).sum(),
                m,
            );
            mean_r.push(mr);
            var_r.push(vr);
            mean_l.push(ml);
            var_l.push(vl);
        }
        let unflatten_u32 = |v: Vec<u32>| -> Vec<Vec<u32>> {
            (0..t_len).map(|t| v[t * self.bins..(t + 1) * self.bins].to_vec()).collect()
        };
        EnsembleStats {
            class: cfg.class,
            n: cfg.n,
            t_max: cfg.t_max,
            ensemble: m,
            seed: cfg.seed,
            burn_in: cfg.burn_in,
            mean_r,
            var_r,
            mean_l,
            var_l,
            hist_r: unflatten_u32(self.hist_r),
            hist_l: unflatten_u32(self.hist_l),
            blocks: BlockSums {
                count: self.bcount,
                sum_r,
                sum2_r,
                sum_l,
                sum2_l,
            },
        }
    }
}

/// Sample mean and unbiased variance from exact integer power sums.
pub(crate) fn mean_var(s1: i64, s2: i64, m: u64) -> (f64, f64) {
    let mean = s1 as f64 / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let num = m as i128 * s2 as i128 - (s1 as i128) * (s1 as i128);
    (mean, num as f64 / (m as f64 * (m as f64 - 1.0)))
}
