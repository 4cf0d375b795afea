//! Haar gate sampling for the five symmetry classes and a Monte Carlo
//! estimate of the two-site transition kernel from trace second moments.
//! This is the numerical cross-check of the analytic kernels: it knows
//! nothing about the rate formulas, only how to draw random gates.

use nalgebra::{Matrix4, Vector4};
use num::complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kernels::{SymmetryClass, TransitionKernel};
use crate::pauli::{two_site_matrix_int, TwoSitePauli};
use crate::rng::CounterRng;

pub type Gate = Matrix4<Complex64>;

/// Acceptance gate on every sampled matrix: unitarity plus the class
/// symmetry, in max-entry norm.
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{class} gate failed its symmetry residual: {residual:.3e}")]
    ResidualTooLarge { class: SymmetryClass, residual: f64 },
    #[error("trace moment has imaginary part {imag:.3e}: gate sampler is broken")]
    NonRealTrace { imag: f64 },
    #[error("second-moment row for input {input} sums to {sum}, not 1")]
    NormNotConserved { input: usize, sum: f64 },
    #[error("estimate is for {est} but kernel is for {kernel}")]
    ClassMismatch {
        est: SymmetryClass,
        kernel: SymmetryClass,
    },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },
}

/// The antisymmetric form defining the symplectic classes: J = iY (x) 1,
/// real with J J^T = 1.
pub fn j_matrix() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = 1.0;
    j[(1, 3)] = 1.0;
    j[(2, 0)] = -1.0;
    j[(3, 1)] = -1.0;
    j
}

fn j_complex() -> Gate {
    j_matrix().map(|x| Complex64::new(x, 0.0))
}

fn gaussian(rng: &mut CounterRng) -> f64 {
    StandardNormal.sample(rng)
}

fn complex_gaussian(rng: &mut CounterRng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Haar-uniform U(4): QR of a complex Ginibre matrix with the R diagonal
/// rephased to positive reals. Without that correction QR output is not
/// Haar distributed.
fn haar_unitary(rng: &mut CounterRng) -> Gate {
    loop {
        let g = Gate::from_fn(|_, _| complex_gaussian(rng));
        let qr = g.qr();
        let r = qr.r();
        let mut phases = Vector4::zeros();
        let mut degenerate = false;
        for i in 0..4 {
            let d = r[(i, i)];
            if d.norm() < 1e-12 {
                degenerate = true;
                break;
            }
            phases[i] = d / d.norm();
        }
        if degenerate {
            continue;
        }
        return qr.q() * Gate::from_diagonal(&phases);
    }
}

/// Haar-uniform O(4): QR of a real Gaussian matrix with sign-corrected
/// R diagonal.
fn haar_orthogonal(rng: &mut CounterRng) -> Gate {
    loop {
        let g = Matrix4::<f64>::from_fn(|_, _| gaussian(rng));
        let qr = g.qr();
        let r = qr.r();
        if (0..4).any(|i| r[(i, i)].abs() < 1e-12) {
            continue;
        }
        let signs = Vector4::from_fn(|i, _| r[(i, i)].signum());
        let o = qr.q() * Matrix4::from_diagonal(&signs);
        return o.map(|x| Complex64::new(x, 0.0));
    }
}

/// Haar-uniform Sp(4) as quaternionic Gram-Schmidt: columns come in pairs
/// (c, -J conj(c)), and orthonormalizing the pair representatives in the
/// ordinary Hermitian inner product enforces U^T J U = J automatically.
fn haar_symplectic(rng: &mut CounterRng) -> Gate {
    let j = j_complex();
    loop {
        let g0 = Vector4::from_fn(|_, _| complex_gaussian(rng));
        if g0.norm() < 1e-6 {
            continue;
        }
        let c0 = g0 / Complex64::new(g0.norm(), 0.0);
        let c2 = -(j * c0.conjugate());
        let g1 = Vector4::from_fn(|_, _| complex_gaussian(rng));
        let h = g1 - c0 * c0.dotc(&g1) - c2 * c2.dotc(&g1);
        if h.norm() < 1e-6 {
            continue;
        }
        let c1 = h / Complex64::new(h.norm(), 0.0);
        let c3 = -(j * c1.conjugate());
        return Gate::from_columns(&[c0, c1, c2, c3]);
    }
}

fn dual(u: &Gate) -> Gate {
    let j = j_complex();
    j * u.transpose() * j.transpose()
}

fn max_abs(m: &Gate) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Unitarity residual plus the class symmetry residual, whichever is worse.
pub fn residual(class: SymmetryClass, u: &Gate) -> f64 {
    let unitarity = max_abs(&(u.adjoint() * u - Gate::identity()));
    let class_res = match class {
        SymmetryClass::Unitary => 0.0,
        SymmetryClass::Coe => max_abs(&(u - u.transpose())),
        SymmetryClass::Cse => max_abs(&(u - dual(u))),
        SymmetryClass::Orthogonal => u.iter().map(|c| c.im.abs()).fold(0.0, f64::max),
        SymmetryClass::Symplectic => {
            let j = j_complex();
            max_abs(&(u.transpose() * j * u - j))
        }
    };
    unitarity.max(class_res)
}

/// Draw one gate from the class ensemble. COE is V^T V and CSE is V^D V
/// with V Haar on U(4); the three group classes are sampled directly.
pub fn sample_gate(class: SymmetryClass, rng: &mut CounterRng) -> Result<Gate, OracleError> {
    let u = match class {
        SymmetryClass::Unitary => haar_unitary(rng),
        SymmetryClass::Orthogonal => haar_orthogonal(rng),
        SymmetryClass::Symplectic => haar_symplectic(rng),
        SymmetryClass::Coe => {
            let v = haar_unitary(rng);
            v.transpose() * v
        }
        SymmetryClass::Cse => {
            let v = haar_unitary(rng);
            dual(&v) * v
        }
    };
    let res = residual(class, &u);
    if res > RESIDUAL_TOL {
        return Err(OracleError::ResidualTooLarge {
            class,
            residual: res,
        });
    }
    Ok(u)
}

fn pauli_matrices() -> &'static [Gate; 16] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Gate; 16]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|i| {
            let m = two_site_matrix_int(TwoSitePauli::from_index(i as u8));
            Gate::from_fn(|r, c| Complex64::new(m[r][c].re as f64, m[r][c].im as f64))
        })
    })
}

/// Normalized Pauli transfer coefficients of one gate:
/// `R[a][p] = Tr(U O_a U^dag O_p) / 4`. Each row satisfies sum_p R^2 = 1
/// (the gate maps a normalized operator to a normalized operator), checked
/// to 1e-10, and every coefficient must be real to 1e-10.
fn transfer(u: &Gate) -> Result<[[f64; 16]; 16], OracleError> {
    let ps = pauli_matrices();
    let udag = u.adjoint();
    let mut out = [[0.0; 16]; 16];
    // Row 0 is U 1 U^dag = 1 for any unitary; fill it exactly rather than
    // collecting rounding dust that would pollute the zero-noise checks.
    out[0][0] = 1.0;
    for a in 1..16 {
        let m = u * ps[a] * udag;
        let mut row_sum = 0.0;
        for p in 0..16 {
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for k in 0..4 {
                    tr += m[(i, k)] * ps[p][(k, i)];
                }
            }
            if tr.im.abs() / 4.0 > 1e-10 {
                return Err(OracleError::NonRealTrace { imag: tr.im / 4.0 });
            }
            out[a][p] = tr.re / 4.0;
            row_sum += out[a][p] * out[a][p];
        }
        if (row_sum - 1.0).abs() > 1e-10 {
            return Err(OracleError::NormNotConserved {
                input: a,
                sum: row_sum,
            });
        }
    }
    Ok(out)
}

/// Input pairs whose cross moments E[R[a][p] R[b][p]] are sampled alongside
/// the diagonal second moments; they must vanish for the kernel picture
/// (diagonal-only second moments) to close.
pub const CROSS_PAIRS: [(usize, usize); 5] = [(1, 2), (1, 4), (5, 10), (3, 12), (7, 13)];

#[derive(Clone, Debug, Serialize)]
pub struct CrossMoment {
    pub a: usize,
    pub b: usize,
    pub p: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of the 16 x 16 transition kernel: sample means of
/// `R[a][p]^2` with per-entry standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct KernelEstimate {
    pub class: SymmetryClass,
    pub samples: u64,
    pub mean: [[f64; 16]; 16],
    pub stderr: [[f64; 16]; 16],
    pub cross: Vec<CrossMoment>,
}

#[derive(Default, Clone)]
struct ChunkAcc {
    s1: [[f64; 16]; 16],
    s2: [[f64; 16]; 16],
    c1: [[f64; 16]; CROSS_PAIRS.len()],
    c2: [[f64; 16]; CROSS_PAIRS.len()],
}

impl ChunkAcc {
    fn absorb(&mut self, r: &[[f64; 16]; 16]) {
        for a in 0..16 {
            for p in 0..16 {
                let x = r[a][p] * r[a][p];
                self.s1[a][p] += x;
                self.s2[a][p] += x * x;
            }
        }
        for (i, &(a, b)) in CROSS_PAIRS.iter().enumerate() {
            for p in 0..16 {
                let y = r[a][p] * r[b][p];
                self.c1[i][p] += y;
                self.c2[i][p] += y * y;
            }
        }
    }

    fn merge(&mut self, other: &ChunkAcc) {
        for a in 0..16 {
            for p in 0..16 {
                self.s1[a][p] += other.s1[a][p];
                self.s2[a][p] += other.s2[a][p];
            }
        }
        for i in 0..CROSS_PAIRS.len() {
            for p in 0..16 {
                self.c1[i][p] += other.c1[i][p];
                self.c2[i][p] += other.c2[i][p];
            }
        }
    }
}

fn stderr_of_mean(s1: f64, s2: f64, n: f64) -> f64 {
    let var = (s2 - s1 * s1 / n).max(0.0) / (n - 1.0);
    (var / n).sqrt()
}

/// Estimate the kernel from `samples` independent gates. Gate `g` draws
/// from a stream keyed by (seed, g), and chunk sums are combined in fixed
/// order, so the result is reproducible and thread-count independent.
pub fn estimate_kernel(
    class: SymmetryClass,
    samples: u64,
    seed: u64,
) -> Result<KernelEstimate, OracleError> {
    const MIN_SAMPLES: u64 = 10_000;
    if samples < MIN_SAMPLES {
        return Err(OracleError::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples,
        });
    }
    const CHUNK: u64 = 250;
    let starts: Vec<u64> = (0..samples).step_by(CHUNK as usize).collect();
    let partials: Result<Vec<ChunkAcc>, OracleError> = starts
        .par_iter()
        .map(|&start| {
            let mut acc = ChunkAcc::default();
            for g in start..(start + CHUNK).min(samples) {
                let mut rng = CounterRng::keyed(&[seed, g]);
                let u = sample_gate(class, &mut rng)?;
                acc.absorb(&transfer(&u)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = ChunkAcc::default();
    for part in partials?.iter() {
        total.merge(part);
    }

    let n = samples as f64;
    let mut mean = [[0.0; 16]; 16];
    let mut stderr = [[0.0; 16]; 16];
    for a in 0..16 {
        for p in 0..16 {
            mean[a][p] = total.s1[a][p] / n;
            stderr[a][p] = stderr_of_mean(total.s1[a][p], total.s2[a][p], n);
        }
    }
    let mut cross = Vec::new();
    for (i, &(a, b)) in CROSS_PAIRS.iter().enumerate() {
        for p in 0..16 {
            cross.push(CrossMoment {
                a,
                b,
                p,
                mean: total.c1[i][p] / n,
                stderr: stderr_of_mean(total.c1[i][p], total.c2[i][p], n),
            });
        }
    }
    Ok(KernelEstimate {
        class,
        samples,
        mean,
        stderr,
        cross,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub class: SymmetryClass,
    pub samples: u64,
    pub max_abs_dev: f64,
    pub max_z: f64,
    pub worst_entry: String,
    pub pass: bool,
}

/// Check the Monte Carlo estimate against an exact kernel: every entry with
/// sampling noise must sit within 4 standard errors, and entries with zero
/// sampling noise (structural zeros and the identity row) must agree to
/// 1e-12.
pub fn compare(est: &KernelEstimate, k: &TransitionKernel) -> Result<CompareReport, OracleError> {
    if est.class != k.class {
        return Err(OracleError::ClassMismatch {
            est: est.class,
            kernel: k.class,
        });
    }
    let mut max_abs_dev = 0.0f64;
    let mut max_z = 0.0f64;
    let mut worst = (0, 0);
    let mut pass = true;
    for a in 0..16 {
        for p in 0..16 {
            let dev = est.mean[a][p] - k.matrix[a][p];
            max_abs_dev = max_abs_dev.max(dev.abs());
            // Entries the gate algebra forces to a constant agree up to
            // float dust and carry no sampling noise; z-test the rest.
            if dev.abs() <= 1e-12 {
                continue;
            }
            let se = est.stderr[a][p];
            if se == 0.0 {
                pass = false;
                continue;
            }
            let z = (dev / se).abs();
            if z > max_z {
                max_z = z;
                worst = (a, p);
            }
            if z > 4.0 {
                pass = false;
            }
        }
    }
    let label = |i: usize| TwoSitePauli::from_index(i as u8).label();
    Ok(CompareReport {
        class: est.class,
        samples: est.samples,
        max_abs_dev,
        max_z,
        worst_entry: format!("{} -> {}", label(worst.0), label(worst.1)),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kernel;

    #[test]
    fn j_is_real_antisymmetric_with_jjt_identity() {
        let j = j_matrix();
        assert_eq!(j.transpose(), -j);
        assert_eq!(j * j.transpose(), Matrix4::identity());
    }

    #[test]
    fn sampled_gates_pass_their_class_residuals() {
        for class in SymmetryClass::ALL {
            let mut rng = CounterRng::keyed(&[1, class as u64]);
            for _ in 0..50 {
                sample_gate(class, &mut rng).unwrap();
            }
        }
    }

    #[test]
    fn first_matrix_element_second_moments() {
        // E|U_00|^2 = 1/4 for Haar U(4) and E[O_00^2] = 1/4 for Haar O(4).
        let n = 100_000;
        for class in [SymmetryClass::Unitary, SymmetryClass::Orthogonal] {
            let mut rng = CounterRng::keyed(&[2, class as u64]);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let u = sample_gate(class, &mut rng).unwrap();
                let x = u[(0, 0)].norm_sqr();
                s1 += x;
                s2 += x * x;
            }
            let mean = s1 / n as f64;
            let se = stderr_of_mean(s1, s2, n as f64);
            assert!(
                (mean - 0.25).abs() < 4.0 * se,
                "{class}: mean {mean}, se {se}"
            );
        }
    }

    #[test]
    fn estimate_rejects_small_sample_counts() {
        assert!(matches!(
            estimate_kernel(SymmetryClass::Unitary, 100, 0),
            Err(OracleError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn unitary_estimate_matches_uniform_rate() {
        let est = estimate_kernel(SymmetryClass::Unitary, 30_000, 3).unwrap();
        // Identity row is exact.
        assert_eq!(est.mean[0][0], 1.0);
        assert_eq!(est.stderr[0][0], 0.0);
        for p in 1..16 {
            assert!(est.mean[0][p].abs() < 1e-12);
        }
        for a in 1..16 {
            for p in 1..16 {
                assert!(
                    (est.mean[a][p] - 1.0 / 15.0).abs() < 5e-3,
                    "entry {a} {p}: {}",
                    est.mean[a][p]
                );
            }
            assert!(est.mean[a][0].abs() < 1e-12, "no flow back to identity");
        }
    }

    #[test]
    fn cse_commuting_entries_vanish_samplewise() {
        use crate::pauli::{symplectic_inner, SiteOp};
        let est = estimate_kernel(SymmetryClass::Cse, 20_000, 4).unwrap();
        let xi = TwoSitePauli::from_ops(SiteOp::X, SiteOp::I);
        assert!(
            (est.mean[xi.index()][xi.index()] - 1.0 / 3.0).abs() < 5e-3,
            "XI -> XI: {}",
            est.mean[xi.index()][xi.index()]
        );
        for a in 1..16 {
            for p in 1..16 {
                let commute =
                    symplectic_inner(TwoSitePauli::from_index(a), TwoSitePauli::from_index(p)) == 0;
                if commute && a != p {
                    assert!(
                        est.mean[a as usize][p as usize] < 1e-12,
                        "commuting entry {a} {p} should vanish gate by gate"
                    );
                }
            }
        }
    }

    #[test]
    fn all_classes_agree_with_exact_kernels() {
        for class in SymmetryClass::ALL {
            let est = estimate_kernel(class, 30_000, 5).unwrap();
            let rep = compare(&est, &kernel(class)).unwrap();
            assert!(
                rep.pass,
                "{class}: max |z| {} at {}, max |dev| {}",
                rep.max_z, rep.worst_entry, rep.max_abs_dev
            );
        }
    }

    #[test]
    fn symplectic_estimate_resolves_the_even_rate() {
        // Two candidate even-sector rates differ by 1/15, far beyond the
        // sampling error at this size; the estimate picks 1/5.
        use crate::pauli::SiteOp;
        let est = estimate_kernel(SymmetryClass::Symplectic, 30_000, 6).unwrap();
        let ix = TwoSitePauli::from_ops(SiteOp::I, SiteOp::X).index();
        let iz = TwoSitePauli::from_ops(SiteOp::I, SiteOp::Z).index();
        let (m, se) = (est.mean[ix][iz], est.stderr[ix][iz]);
        assert!((m - 0.2).abs() < 4.0 * se, "IX -> IZ: {m} +- {se}");
        assert!((m - 2.0 / 15.0).abs() > 10.0 * se);
    }

    #[test]
    fn cross_moments_vanish() {
        for class in [SymmetryClass::Unitary, SymmetryClass::Coe] {
            let est = estimate_kernel(class, 20_000, 7).unwrap();
            for cm in &est.cross {
                if cm.mean.abs() < 1e-12 {
                    continue;
                }
                assert!(
                    cm.mean.abs() < 5.0 * cm.stderr,
                    "{class} cross ({}, {}) at p={}: {} +- {}",
                    cm.a,
                    cm.b,
                    cm.p,
                    cm.mean,
                    cm.stderr
                );
            }
        }
    }

    #[test]
    fn mismatched_classes_error() {
        let est = estimate_kernel(SymmetryClass::Unitary, 10_000, 8).unwrap();
        assert!(matches!(
            compare(&est, &kernel(SymmetryClass::Coe)),
            Err(OracleError::ClassMismatch { .. })
        ));
    }

    #[test]
    fn estimate_is_thread_count_independent() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| estimate_kernel(SymmetryClass::Orthogonal, 10_000, 9).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
    }

    /// Left-composing every sample with a fixed class element must leave the
    /// estimated entries statistically unchanged if the sampler is Haar.
    /// COE and CSE are not groups, so their invariance is V -> VQ, which
    /// acts on the sample as W -> Q^T W Q (resp. Q^D W Q).
    #[test]
    fn haar_invariance_smoke_test() {
        let n = 10_000u64;
        let fixed: Vec<Gate> = SymmetryClass::ALL
            .iter()
            .map(|&c| sample_gate(c, &mut CounterRng::keyed(&[77, c as u64])).unwrap())
            .collect();
        let q = haar_unitary(&mut CounterRng::keyed(&[78]));
        for (ci, &class) in SymmetryClass::ALL.iter().enumerate() {
            let mut base = ChunkAcc::default();
            let mut moved = ChunkAcc::default();
            for g in 0..n {
                let mut rng = CounterRng::keyed(&[80, class as u64, g]);
                let u = sample_gate(class, &mut rng).unwrap();
                base.absorb(&transfer(&u).unwrap());
                let v = match class {
                    SymmetryClass::Coe => q.transpose() * u * q,
                    SymmetryClass::Cse => dual(&q) * u * q,
                    _ => fixed[ci] * u,
                };
                moved.absorb(&transfer(&v).unwrap());
            }
            let nf = n as f64;
            for a in 1..16 {
                for p in 0..16 {
                    let m1 = base.s1[a][p] / nf;
                    let m2 = moved.s1[a][p] / nf;
                    if (m1 - m2).abs() < 1e-12 {
                        continue;
                    }
                    let se1 = stderr_of_mean(base.s1[a][p], base.s2[a][p], nf);
                    let se2 = stderr_of_mean(moved.s1[a][p], moved.s2[a][p], nf);
                    let se = (se1 * se1 + se2 * se2).sqrt();
                    assert!(
                        (m1 - m2).abs() < 6.0 * se,
                        "{class} entry ({a}, {p}): {m1} vs {m2} with se {se}"
                    );
                }
            }
        }
    }
}
