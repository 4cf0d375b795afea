//! Operator growth under a GUE Hamiltonian at small Hilbert dimension:
//! exact Pauli weights |gamma_p(t)|^2 grouped by their commutation relation
//! to the initial operator, and the two-point spectral form factor.

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::CounterRng;

#[derive(Debug, Error)]
pub enum GueError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("eigensolver failed to converge")]
    EigenFailed,
    #[error("Pauli weights sum to {sum} at t = {t}, not 1")]
    NormNotConserved { t: f64, sum: f64 },
}

/// Draw a GUE matrix normalized so the spectrum fills roughly [-2, 2]:
/// H = (A + A^dag)/2 with the real and imaginary parts of each A entry
/// distributed N(0, 1/d). Hermiticity is exact by construction.
pub fn sample_gue(d: usize, rng: &mut CounterRng) -> DMatrix<Complex64> {
    assert!(d >= 2, "need at least a two-level system");
    let s = (1.0 / d as f64).sqrt();
    let a = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    });
    let half = Complex64::new(0.5, 0.0);
    (&a + a.adjoint()) * half
}

/// Diagonalized evolution of one Hamiltonian acting on a fixed initial
/// Pauli string, ready to be evaluated at any time.
pub struct Evolution {
    d: usize,
    eigvals: DVector<f64>,
    q: DMatrix<Complex64>,
    /// Initial operator rotated into the eigenbasis.
    b: DMatrix<Complex64>,
}

impl Evolution {
    /// `x0`, `z0` are the bit masks of the initial string O_0 = X^x0 Z^z0
    /// (site k is bit k); it must not be the identity.
    pub fn new(h: &DMatrix<Complex64>, x0: u64, z0: u64) -> Result<Evolution, GueError> {
        assert!(x0 != 0 || z0 != 0, "initial operator must be non-identity");
        let d = h.nrows();
        let eig = nalgebra::SymmetricEigen::try_new(h.clone(), 1e-13, 0)
            .ok_or(GueError::EigenFailed)?;
        let q = eig.eigenvectors;
        // O_0 Q has rows permuted by x0 and sign-twisted by z0.
        let oq = DMatrix::from_fn(d, d, |j, k| {
            let a = j ^ x0 as usize;
            let sign = 1 - 2 * ((z0 as usize & a).count_ones() as i64 % 2);
            q[(a, k)] * Complex64::new(sign as f64, 0.0)
        });
        let b = q.adjoint() * oq;
        Ok(Evolution {
            d,
            eigvals: eig.eigenvalues,
            q,
            b,
        })
    }

    /// All 4^n Pauli weights |gamma_p(t)|^2 of the evolved operator,
    /// indexed by `x * d + z`. Their sum is checked against 1.
    pub fn coeffs_at(&self, t: f64) -> Result<Vec<f64>, GueError> {
        let d = self.d;
        let phases = DVector::from_fn(d, |j, _| {
            Complex64::new(0.0, -self.eigvals[j] * t).exp()
        });
        let c = DMatrix::from_fn(d, d, |j, k| self.b[(j, k)] * phases[j] * phases[k].conj());
        let ot = &self.q * c * self.q.adjoint();
        let mut out = vec![0.0; d * d];
        let scale = 1.0 / d as f64;
        for x in 0..d {
            for z in 0..d {
                let mut g = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    let sign = if (z & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    g += ot[(j, j ^ x)] * sign;
                }
                out[x * d + z] = (g * scale).norm_sqr();
            }
        }
        let sum: f64 = out.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(GueError::NormNotConserved { t, sum });
        }
        Ok(out)
    }
}

/// One-shot Pauli weights of O_0 evolved for time `t` under `h`.
pub fn coeffs(
    h: &DMatrix<Complex64>,
    x0: u64,
    z0: u64,
    t: f64,
) -> Result<Vec<f64>, GueError> {
    Evolution::new(h, x0, z0)?.coeffs_at(t)
}

#[derive(Clone, Debug)]
pub struct GueConfig {
    pub n_qubits: usize,
    pub samples: u64,
    pub t_max: f64,
    pub points: usize,
    pub seed: u64,
    /// Bit masks of the initial Pauli string; defaults to Z on qubit 0.
    pub initial: (u64, u64),
}

impl GueConfig {
    pub fn new(n_qubits: usize, samples: u64, seed: u64) -> GueConfig {
        GueConfig {
            n_qubits,
            samples,
            t_max: 4.0 * (1u64 << n_qubits) as f64,
            points: 161,
            seed,
            initial: (0, 1),
        }
    }

    pub fn validate(&self) -> Result<(), GueError> {
        if !(3..=5).contains(&self.n_qubits) {
            return Err(GueError::InvalidConfig(
                "n_qubits must be 3, 4 or 5".into(),
            ));
        }
        if self.samples < 100 {
            return Err(GueError::InvalidConfig(
                "need at least 100 samples".into(),
            ));
        }
        if self.points < 2 || !(self.t_max > 0.0) {
            return Err(GueError::InvalidConfig(
                "need a time grid with at least 2 points and t_max > 0".into(),
            ));
        }
        let d = 1u64 << self.n_qubits;
        let (x0, z0) = self.initial;
        if x0 == 0 && z0 == 0 || x0 >= d || z0 >= d {
            return Err(GueError::InvalidConfig(
                "initial operator must be a non-identity string on the chain".into(),
            ));
        }
        Ok(())
    }
}

/// Ensemble-averaged weight curves. `g_commute` averages over the Pauli
/// strings commuting with O_0 other than O_0 itself and the identity
/// (which carries exactly zero weight at all times); `g_anticommute` over
/// the anticommuting half.
#[derive(Clone, Debug, Serialize)]
pub struct GueRun {
    pub n_qubits: usize,
    pub d_h: usize,
    pub samples: u64,
    pub seed: u64,
    pub times: Vec<f64>,
    pub g_initial: Vec<f64>,
    pub g_commute: Vec<f64>,
    pub g_anticommute: Vec<f64>,
    pub r2: Vec<f64>,
}

impl GueRun {
    /// Grid index of the form-factor dip (first minimum of R_2).
    pub fn dip_index(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.r2.iter().enumerate() {
            if v < self.r2[best] {
                best = i;
            }
        }
        best
    }
}

pub fn ensemble_curves(cfg: &GueConfig) -> Result<GueRun, GueError> {
    cfg.validate()?;
    let d = 1usize << cfg.n_qubits;
    let (x0, z0) = cfg.initial;
    let p0 = x0 as usize * d + z0 as usize;
    let times: Vec<f64> = (0..cfg.points)
        .map(|i| cfg.t_max * i as f64 / (cfg.points - 1) as f64)
        .collect();

    // Commutation with O_0 in symplectic bit form.
    let anticommutes = |x: usize, z: usize| {
        ((x & z0 as usize).count_ones() + (z & x0 as usize).count_ones()) % 2 == 1
    };
    let mut commuting = Vec::new();
    let mut anti = Vec::new();
    for x in 0..d {
        for z in 0..d {
            let p = x * d + z;
            if p == 0 || p == p0 {
                continue;
            }
            if anticommutes(x, z) {
                anti.push(p);
            } else {
                commuting.push(p);
            }
        }
    }

    // One curve set per sample, collected in sample order and reduced
    // sequentially so the result does not depend on thread scheduling.
    let per_sample: Result<Vec<_>, GueError> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = CounterRng::keyed(&[cfg.seed, s]);
            let h = sample_gue(d, &mut rng);
            let ev = Evolution::new(&h, x0, z0)?;
            let mut gi = Vec::with_capacity(times.len());
            let mut gc = Vec::with_capacity(times.len());
            let mut ga = Vec::with_capacity(times.len());
            let mut r2 = Vec::with_capacity(times.len());
            for &t in &times {
                let w = ev.coeffs_at(t)?;
                gi.push(w[p0]);
                gc.push(commuting.iter().map(|&p| w[p]).sum::<f64>() / commuting.len() as f64);
                ga.push(anti.iter().map(|&p| w[p]).sum::<f64>() / anti.len() as f64);
                let tr: Complex64 = ev
                    .eigvals
                    .iter()
                    .map(|&l| Complex64::new(0.0, -l * t).exp())
                    .sum();
                r2.push(tr.norm_sqr());
            }
            Ok((gi, gc, ga, r2))
        })
        .collect();

    let n = cfg.samples as f64;
    let mut run = GueRun {
        n_qubits: cfg.n_qubits,
        d_h: d,
        samples: cfg.samples,
        seed: cfg.seed,
        times,
        g_initial: vec![0.0; cfg.points],
        g_commute: vec![0.0; cfg.points],
        g_anticommute: vec![0.0; cfg.points],
        r2: vec![0.0; cfg.points],
    };
    for (gi, gc, ga, r2) in per_sample? {
        for i in 0..cfg.points {
            run.g_initial[i] += gi[i];
            run.g_commute[i] += gc[i];
            run.g_anticommute[i] += ga[i];
            run.r2[i] += r2[i];
        }
    }
    for i in 0..cfg.points {
        run.g_initial[i] /= n;
        run.g_commute[i] /= n;
        run.g_anticommute[i] /= n;
        run.r2[i] /= n;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_matrices_are_exactly_hermitian() {
        let mut rng = CounterRng::keyed(&[21]);
        for _ in 0..10 {
            let h = sample_gue(16, &mut rng);
            assert_eq!(h, h.adjoint());
        }
    }

    #[test]
    fn spectrum_matches_the_semicircle_normalization() {
        let d = 32;
        let mut rng = CounterRng::keyed(&[22]);
        let samples = 100;
        let mut tr2 = 0.0;
        let mut spacing = 0.0;
        let mut gaps = 0usize;
        for _ in 0..samples {
            let h = sample_gue(d, &mut rng);
            tr2 += h.iter().map(|c| c.norm_sqr()).sum::<f64>() / d as f64;
            let mut ev: Vec<f64> = nalgebra::SymmetricEigen::try_new(h, 1e-13, 0)
                .unwrap()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            // Bulk spacings around the center of the band.
            for k in d / 2 - 3..d / 2 + 3 {
                spacing += ev[k + 1] - ev[k];
                gaps += 1;
            }
        }
        let tr2 = tr2 / samples as f64;
        assert!((tr2 - 1.0).abs() < 0.05, "<Tr H^2>/d = {tr2}");
        let spacing = spacing / gaps as f64;
        let expect = std::f64::consts::PI / d as f64;
        assert!(
            (spacing / expect - 1.0).abs() < 0.10,
            "bulk spacing {spacing} vs {expect}"
        );
    }

    #[test]
    fn weights_start_as_a_point_mass_on_the_initial_operator() {
        let d = 8;
        let mut rng = CounterRng::keyed(&[23]);
        let h = sample_gue(d, &mut rng);
        let w = coeffs(&h, 0, 1, 0.0).unwrap();
        for (p, &v) in w.iter().enumerate() {
            if p == 1 {
                assert!((v - 1.0).abs() < 1e-10);
            } else {
                assert!(v < 1e-10, "weight {v} at {p}");
            }
        }
    }

    #[test]
    fn zero_hamiltonian_freezes_the_weights() {
        let d = 8;
        let h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        let ev = Evolution::new(&h, 2, 1).unwrap();
        let w0 = ev.coeffs_at(0.0).unwrap();
        let w1 = ev.coeffs_at(1.7).unwrap();
        let w2 = ev.coeffs_at(34.0).unwrap();
        assert_eq!(w0, w1);
        assert_eq!(w0, w2);
    }

    #[test]
    fn config_validation() {
        assert!(GueConfig::new(3, 100, 0).validate().is_ok());
        assert!(GueConfig::new(6, 100, 0).validate().is_err());
        assert!(GueConfig::new(3, 50, 0).validate().is_err());
        let mut cfg = GueConfig::new(3, 100, 0);
        cfg.initial = (0, 0);
        assert!(cfg.validate().is_err());
        cfg.initial = (8, 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn form_factor_starts_at_d_squared_and_curves_are_deterministic() {
        let mut cfg = GueConfig::new(3, 100, 31);
        cfg.points = 21;
        let run = ensemble_curves(&cfg).unwrap();
        assert_eq!(run.r2[0], 64.0);
        assert!((run.g_initial[0] - 1.0).abs() < 1e-10);
        assert!(run.g_commute[0].abs() < 1e-12);
        assert!(run.g_anticommute[0].abs() < 1e-12);

        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| ensemble_curves(&cfg)).unwrap();
        let b = pool4.install(|| ensemble_curves(&cfg)).unwrap();
        assert_eq!(a.g_initial, b.g_initial);
        assert_eq!(a.g_commute, b.g_commute);
        assert_eq!(a.g_anticommute, b.g_anticommute);
        assert_eq!(a.r2, b.r2);
    }

    /// GUE is unitarily invariant, so the group-averaged curves cannot
    /// depend on which single-site Pauli seeds the growth.
    #[test]
    fn curves_do_not_depend_on_the_initial_operator_label() {
        let mut runs = Vec::new();
        for (i, initial) in [(0u64, 1u64), (2, 0), (4, 4)].iter().enumerate() {
            let mut cfg = GueConfig::new(3, 150, 40 + i as u64);
            cfg.points = 41;
            cfg.initial = *initial;
            runs.push(ensemble_curves(&cfg).unwrap());
        }
        let grid_mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        for r in &runs[1..] {
            for (a, b) in [
                (&runs[0].g_initial, &r.g_initial),
                (&runs[0].g_commute, &r.g_commute),
                (&runs[0].g_anticommute, &r.g_anticommute),
            ] {
                let (ma, mb) = (grid_mean(a), grid_mean(b));
                assert!(
                    (ma - mb).abs() / ma < 0.1,
                    "group means differ: {ma} vs {mb}"
                );
            }
        }
    }
}
