//! Least-squares extraction of the front velocity and diffusion constant
//! from ensemble edge statistics, plus a shape check of the front profile
//! against the Gaussian it should approach.

use serde::Serialize;

use crate::circuit::{mean_var, EnsembleStats, SimError};
use crate::kernels::SymmetryClass;

/// Fitted laws for one edge. The mean line is `mean_intercept + v_b_hat * t`
/// (left edge negated so both velocities are positive), the variance line is
/// `var_intercept + 2 * d_hat * t`. Error bars come from refitting on
/// contiguous trajectory blocks and are `None` when the blocking is
/// degenerate (fewer than two blocks or single-trajectory blocks).
#[derive(Clone, Debug, Serialize)]
pub struct EdgeFit {
    pub v_b_hat: f64,
    pub v_b_stderr: Option<f64>,
    pub mean_intercept: f64,
    pub d_hat: f64,
    pub d_stderr: Option<f64>,
    pub var_intercept: f64,
    pub r2_mean: f64,
    pub r2_var: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontFit {
    pub class: SymmetryClass,
    pub seed: u64,
    pub window: (usize, usize),
    pub right: EdgeFit,
    pub left: EdgeFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub t: usize,
    pub sup_norm: f64,
    pub skewness: f64,
}

fn check_window(stats: &EnsembleStats, window: (usize, usize)) -> Result<(), SimError> {
    let (lo, hi) = window;
    let err = |why| Err(SimError::InvalidWindow { lo, hi, why });
    if lo < stats.burn_in {
        return err("window starts before burn-in");
    }
    if hi > stats.t_max {
        return err("window extends past t_max");
    }
    if lo + 9 > hi {
        return err("window shorter than 10 layers");
    }
    Ok(())
}

/// Ordinary least squares of `ys[t]` against `t` over `[lo, hi]`.
/// Returns (intercept, slope, r_squared).
fn ols(ys: &[f64], lo: usize, hi: usize) -> (f64, f64, f64) {
    // Integer weights u_t = 2t - (lo + hi) are symmetric around the window
    // center, so the slope is 2 * sum(u y) / sum(u^2) with no cancellation
    // in the normal equations.
    let mut suy = 0.0;
    let mut suu = 0.0;
    let mut sy = 0.0;
    for t in lo..=hi {
        let u = (2 * t) as f64 - (lo + hi) as f64;
        suy += u * ys[t];
        suu += u * u;
        sy += ys[t];
    }
    let len = (hi - lo + 1) as f64;
    let slope = 2.0 * suy / suu;
    let ybar = sy / len;
    let intercept = ybar - slope * (lo + hi) as f64 / 2.0;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for t in lo..=hi {
        let fit = intercept + slope * t as f64;
        ss_res += (ys[t] - fit) * (ys[t] - fit);
        ss_tot += (ys[t] - ybar) * (ys[t] - ybar);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (intercept, slope, r2)
}

/// Standard error of the mean of `xs`, or `None` if it is not finite.
fn spread(xs: &[f64]) -> Option<f64> {
    let b = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / b;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let se = (ss / (b * (b - 1.0))).sqrt();
    se.is_finite().then_some(se)
}

fn fit_edge(
    stats: &EnsembleStats,
    window: (usize, usize),
    mean: &[f64],
    var: &[f64],
    negate: bool,
    block_sum: &[Vec<i64>],
    block_sum2: &[Vec<i64>],
) -> EdgeFit {
    let (lo, hi) = window;
    let sign = if negate { -1.0 } else { 1.0 };
    let signed_mean: Vec<f64> = mean.iter().map(|&m| sign * m).collect();
    let (mean_intercept, v_b_hat, r2_mean) = ols(&signed_mean, lo, hi);
    let (var_intercept, var_slope, r2_var) = ols(var, lo, hi);

    let blocks = stats.blocks.count.len();
    let blockwise = blocks >= 2 && stats.blocks.count.iter().all(|&c| c >= 2);
    let (v_b_stderr, d_stderr) = if blockwise {
        let mut v_slopes = Vec::with_capacity(blocks);
        let mut d_slopes = Vec::with_capacity(blocks);
        for b in 0..blocks {
            let mb = stats.blocks.count[b];
            let mut bm = Vec::with_capacity(hi + 1);
            let mut bv = Vec::with_capacity(hi + 1);
            for t in 0..=hi {
                let (m, v) = mean_var(block_sum[b][t], block_sum2[b][t], mb);
                bm.push(sign * m);
                bv.push(v);
            }
            v_slopes.push(ols(&bm, lo, hi).1);
            d_slopes.push(ols(&bv, lo, hi).1 / 2.0);
        }
        (spread(&v_slopes), spread(&d_slopes))
    } else {
        (None, None)
    };
    EdgeFit {
        v_b_hat,
        v_b_stderr,
        mean_intercept,
        d_hat: var_slope / 2.0,
        d_stderr,
        var_intercept,
        r2_mean,
        r2_var,
    }
}

/// Fit the linear growth laws of both edges over `window` (inclusive layers).
/// The mean-position slope estimates the butterfly velocity and half the
/// variance slope estimates the front diffusion constant.
pub fn fit_front(stats: &EnsembleStats, window: (usize, usize)) -> Result<FrontFit, SimError> {
    check_window(stats, window)?;
    let right = fit_edge(
        stats,
        window,
        &stats.mean_r,
        &stats.var_r,
        false,
        &stats.blocks.sum_r,
        &stats.blocks.sum2_r,
    );
    let left = fit_edge(
        stats,
        window,
        &stats.mean_l,
        &stats.var_l,
        true,
        &stats.blocks.sum_l,
        &stats.blocks.sum2_l,
    );
    Ok(FrontFit {
        class: stats.class,
        seed: stats.seed,
        window,
        right,
        left,
    })
}

/// Compare the right-edge profile at layer `t` against the Gaussian implied
/// by the fitted lines. The comparison marginalizes the two-site split
/// inside the final layer's frontier gate window first: which of the two
/// window sites carries the edge is fixed kernel microstructure (a constant
/// 4:1 split for uniform qubit rates), not front shape, so the density is
/// read off per window and compared at the window center. The skewness is
/// taken on the raw histogram (zero for a true Gaussian).
pub fn front_profile_check(
    stats: &EnsembleStats,
    fit: &FrontFit,
    t: usize,
) -> Result<ProfileReport, SimError> {
    let (lo, hi) = fit.window;
    if t < lo || t > hi {
        return Err(SimError::InvalidWindow {
            lo,
            hi,
            why: "profile layer outside the fitted window",
        });
    }
    let mu = fit.right.mean_intercept + fit.right.v_b_hat * t as f64;
    let sigma2 = fit.right.var_intercept + 2.0 * fit.right.d_hat * t as f64;
    if sigma2 <= 0.0 {
        return Err(SimError::DegenerateFit("fitted variance is not positive"));
    }
    let m = stats.ensemble as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma2).sqrt();
    let hist = &stats.hist_r[t];
    let (mut s1, mut s2, mut s3) = (0i128, 0i128, 0i128);
    for (idx, &c) in hist.iter().enumerate() {
        let x = idx as i64 - 1;
        let (c, x) = (c as i128, x as i128);
        s1 += c * x;
        s2 += c * x * x;
        s3 += c * x * x * x;
    }
    // Gate windows of the last applied layer: even layers pair sites
    // (2g, 2g+1), odd layers (2g+1, 2g+2). In histogram indices (site + 1)
    // the left window site is even after an even layer count, odd otherwise.
    let first = t % 2;
    let mut sup = 0.0f64;
    let mut check = |count: u64, left_site: f64| {
        let rho = count as f64 / (2.0 * m);
        let center = left_site + 0.5;
        let gauss = norm * (-(center - mu).powi(2) / (2.0 * sigma2)).exp();
        sup = sup.max((rho - gauss).abs());
    };
    if first == 1 && hist[0] != 0 {
        check(hist[0] as u64, -2.0);
    }
    let mut idx = first;
    while idx < hist.len() {
        let a = hist[idx] as u64;
        let b = if idx + 1 < hist.len() { hist[idx + 1] as u64 } else { 0 };
        check(a + b, idx as f64 - 1.0);
        idx += 2;
    }
    let mu1 = s1 as f64 / m;
    let m2 = s2 as f64 / m - mu1 * mu1;
    let m3 = s3 as f64 / m - 3.0 * mu1 * (s2 as f64 / m) + 2.0 * mu1 * mu1 * mu1;
    if m2 <= 0.0 {
        return Err(SimError::DegenerateFit("profile has zero variance"));
    }
    Ok(ProfileReport {
        t,
        sup_norm: sup,
        skewness: m3 / m2.powf(1.5),
    })
}
