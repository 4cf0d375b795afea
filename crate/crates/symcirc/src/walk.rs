//! Closed-form solutions of the endpoint random walks.
//!
//! The right (or left) edge of a growing Pauli string performs a random walk
//! on links: one step per layer, +1 when the frontier gate emits a
//! non-identity on its outer site and -1 otherwise. Depending on the gate
//! ensemble this walk is iid (unitary), persistent with a two-step memory
//! (COE, CSE), or carries an internal even/odd parity state (orthogonal,
//! symplectic). Each case is solved here in exact rational arithmetic.
//!
//! Two independent routes to the diffusion constant are provided for the
//! parity chains: the continuum-limit expression [`four_state_front`] and a
//! direct stationary-covariance summation [`chain_diffusion`]. They are not
//! algebraically identical; tests pin both values and the simulator decides
//! which one tracks the measured front width.

use num::rational::BigRational;
use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::kernels::{kernel_exact, rates, KernelError, RateSet, SymmetryClass};
use crate::pauli::{sympl_parity, transpose_parity, Parity, SiteOp, TwoSitePauli};
use crate::br;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(BigRational),
    #[error("degenerate chain: {0}")]
    DegenerateChain(&'static str),
    #[error("{op} is not defined for the {class} class")]
    UnsupportedClass {
        class: SymmetryClass,
        op: &'static str,
    },
    #[error("{op} is not available for {class} at q = {q}: {why}")]
    UnsupportedDimension {
        class: SymmetryClass,
        q: i64,
        op: &'static str,
        why: &'static str,
    },
    #[error("series order {0} exceeds the supported maximum of 8")]
    SeriesOrderTooLarge(usize),
    #[error("four-state rows must each sum to 1 with entries in [0, 1]")]
    ConstraintViolation,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A solved endpoint walk. All fields are exact rationals; `v_b = 1 - 2p`
/// holds by construction and `alpha = 0` forces `d = d0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkSolution {
    /// Stationary probability of a back step.
    pub p: BigRational,
    /// Persistence: correlation coefficient between successive steps. For
    /// the four-state walk this is the effective value implied by d/d0.
    pub alpha: BigRational,
    /// Drift of the edge, one link per layer.
    pub v_b: BigRational,
    /// Uncorrelated diffusion constant 2p(1-p).
    pub d0: BigRational,
    /// Corrected diffusion constant.
    pub d: BigRational,
}

fn check_prob(p: &BigRational) -> Result<(), WalkError> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(WalkError::ProbabilityOutOfRange(p.clone()));
    }
    Ok(())
}

/// Walk with iid steps: back with probability `p`, forward otherwise.
pub fn biased_walk(p: &BigRational) -> Result<WalkSolution, WalkError> {
    check_prob(p)?;
    let one = BigRational::one();
    let v_b = &one - br(2, 1) * p;
    let d0 = br(2, 1) * p * (&one - p);
    Ok(WalkSolution {
        p: p.clone(),
        alpha: BigRational::zero(),
        v_b,
        d: d0.clone(),
        d0,
    })
}

/// Two-step persistent walk: `p1` is the back probability after a forward
/// step, `p2` after a back step. The stationary back probability is
/// p = p1/(1+p1-p2) and successive steps carry correlation alpha = p2-p1,
/// which rescales the diffusion constant by (1+alpha)/(1-alpha).
pub fn persistent_walk(p1: &BigRational, p2: &BigRational) -> Result<WalkSolution, WalkError> {
    check_prob(p1)?;
    check_prob(p2)?;
    let one = BigRational::one();
    let alpha = p2 - p1;
    if alpha == one {
        return Err(WalkError::DegenerateChain(
            "p1 = 0 with p2 = 1 traps the walker after its first back step",
        ));
    }
    let p = p1 / (&one + p1 - p2);
    let v_b = &one - br(2, 1) * &p;
    let d0 = br(2, 1) * &p * (&one - &p);
    let d = &d0 * (&one + &alpha) / (&one - &alpha);
    Ok(WalkSolution {
        p,
        alpha,
        v_b,
        d0,
        d,
    })
}

/// The memory parameters (p1, p2) of the circular-ensemble endpoint walk,
/// assembled from the class rates at gate dimension d. p1 conditions on the
/// previous step being forward (edge operator enters the frontier gate next
/// to an identity), p2 on it being backward (a uniformly mixed interior
/// operator enters alongside it).
pub fn recipe_p1_p2(class: SymmetryClass, d: i64) -> Result<(BigRational, BigRational), WalkError> {
    if !matches!(class, SymmetryClass::Coe | SymmetryClass::Cse) {
        return Err(WalkError::UnsupportedClass {
            class,
            op: "recipe_p1_p2",
        });
    }
    let kr = rates(class, d)?;
    let RateSet::ClassFunction { p_s, p_c, p_a } = kr.rates else {
        unreachable!("circular ensembles use class-function rates");
    };
    let half = br(d, 2);
    let p1 = &p_s + (&half - br(2, 1)) * &p_c + &half * &p_a;
    let p2 = br(d - 1, d) * ((&half - br(1, 1)) * &p_c + &half * &p_a) + br(d - 1, d) * &p_c;
    Ok((p1, p2))
}

fn poly_eval(coeffs: &[i64], q: i64) -> BigInt {
    let q = BigInt::from(q);
    let mut acc = BigInt::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * &q + BigInt::from(c);
    }
    acc
}

/// Ascending-in-q coefficient lists (numerator, denominator) for the
/// stationary back probability p(q) of each class.
fn p_polys(class: SymmetryClass) -> (&'static [i64], &'static [i64]) {
    match class {
        SymmetryClass::Unitary => (&[1], &[1, 0, 1]),
        SymmetryClass::Coe => (&[0, 0, 2, 0, 5, 0, 1], &[2, 0, 4, 0, 5, 0, 4, 0, 1]),
        SymmetryClass::Cse => (&[2, 0, -1, 0, -2, 0, 1], &[-2, 0, 1, 0, 1, 0, -3, 0, 1]),
        SymmetryClass::Orthogonal => (&[2, 1, 1], &[1, 3, 2, 1, 1]),
        SymmetryClass::Symplectic => (&[2, -1, 1], &[1, -1, 2, -1, 1]),
    }
}

/// Ascending-in-q coefficient lists for the closed-form v_B(q) of each class.
fn vb_polys(class: SymmetryClass) -> (&'static [i64], &'static [i64]) {
    match class {
        SymmetryClass::Unitary => (&[-1, 0, 1], &[1, 0, 1]),
        SymmetryClass::Coe => (
            &[2, 0, 0, 0, -5, 0, 2, 0, 1],
            &[2, 0, 4, 0, 5, 0, 4, 0, 1],
        ),
        SymmetryClass::Cse => (
            &[-6, 0, 3, 0, 5, 0, -5, 0, 1],
            &[-2, 0, 1, 0, 1, 0, -3, 0, 1],
        ),
        SymmetryClass::Orthogonal => (&[-3, 1, 0, 1, 1], &[1, 3, 2, 1, 1]),
        SymmetryClass::Symplectic => (&[-3, 1, 0, -1, 1], &[1, -1, 2, -1, 1]),
    }
}

fn eval_ratio(polys: (&[i64], &[i64]), q: i64) -> BigRational {
    BigRational::new(poly_eval(polys.0, q), poly_eval(polys.1, q))
}

fn check_q(class: SymmetryClass, q: i64, op: &'static str) -> Result<(), WalkError> {
    if q < 2 {
        return Err(WalkError::UnsupportedDimension {
            class,
            q,
            op,
            why: "local dimension must be at least 2",
        });
    }
    Ok(())
}

/// Closed-form stationary back probability p(q).
///
/// For CSE this is the published closed form, which does NOT agree with
/// `persistent_walk` applied to `recipe_p1_p2` at small q (15/41 versus 4/11
/// for qubits); both are exposed and the simulator arbitrates.
pub fn closed_form_p(class: SymmetryClass, q: i64) -> Result<BigRational, WalkError> {
    check_q(class, q, "closed_form_p")?;
    Ok(eval_ratio(p_polys(class), q))
}

/// Closed-form butterfly velocity v_B(q) = 1 - 2 p(q).
pub fn closed_form_vb(class: SymmetryClass, q: i64) -> Result<BigRational, WalkError> {
    check_q(class, q, "closed_form_vb")?;
    Ok(eval_ratio(vb_polys(class), q))
}

/// Coefficients of the asymptotic expansion of v_B in powers of 1/q, from
/// order 0 through `order` (at most 8), by exact division of the reversed
/// numerator and denominator polynomials.
pub fn series_vb(class: SymmetryClass, order: usize) -> Result<Vec<BigRational>, WalkError> {
    if order > 8 {
        return Err(WalkError::SeriesOrderTooLarge(order));
    }
    let (num, den) = vb_polys(class);
    // v_B(q) = N(q)/D(q) with deg N = deg D, so in x = 1/q the ratio is
    // N_rev(x)/D_rev(x) with the coefficient lists reversed.
    let c: Vec<BigRational> = num
        .iter()
        .rev()
        .map(|&v| BigRational::from(BigInt::from(v)))
        .collect();
    let d: Vec<BigRational> = den
        .iter()
        .rev()
        .map(|&v| BigRational::from(BigInt::from(v)))
        .collect();
    let mut s: Vec<BigRational> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = c.get(k).cloned().unwrap_or_else(BigRational::zero);
        for j in 1..=k {
            if let Some(dj) = d.get(j) {
                acc -= dj * &s[k - j];
            }
        }
        s.push(acc / &d[0]);
    }
    Ok(s)
}

/// Which end of the growing string a parity chain describes. Transposition
/// parity is mirror symmetric, so the orthogonal chains coincide; symplectic
/// parity is not, and the two edges carry different chains (with equal v_B).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
}

/// Joint one-layer probabilities of the parity-carrying edge walk. Rows are
/// conditioned on the current parity: from even the step is forward to an
/// even state with probability alpha, back to even with beta, forward to odd
/// with gamma, back to odd with delta; from odd the same four exits are
/// sigma (forward to even), tau (back to even), mu (forward to odd) and nu
/// (back to odd).
#[derive(Clone, Debug, PartialEq)]
pub struct FourStateProbs {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
    pub delta: BigRational,
    pub mu: BigRational,
    pub nu: BigRational,
    pub sigma: BigRational,
    pub tau: BigRational,
}

impl FourStateProbs {
    pub fn validate(&self) -> Result<(), WalkError> {
        let entries = [
            &self.alpha,
            &self.beta,
            &self.gamma,
            &self.delta,
            &self.mu,
            &self.nu,
            &self.sigma,
            &self.tau,
        ];
        for e in entries {
            if e < &BigRational::zero() || e > &BigRational::one() {
                return Err(WalkError::ConstraintViolation);
            }
        }
        let even_row = &self.alpha + &self.beta + &self.gamma + &self.delta;
        let odd_row = &self.mu + &self.nu + &self.sigma + &self.tau;
        if even_row != BigRational::one() || odd_row != BigRational::one() {
            return Err(WalkError::ConstraintViolation);
        }
        Ok(())
    }

    /// Stationary parity distribution (pi_e, pi_o) of the embedded 2-state
    /// parity chain.
    pub fn stationary(&self) -> Result<(BigRational, BigRational), WalkError> {
        let to_even = &self.sigma + &self.tau;
        let to_odd = &self.gamma + &self.delta;
        let total = &to_even + &to_odd;
        if total.is_zero() {
            return Err(WalkError::DegenerateChain(
                "both parities are absorbing; no unique stationary state",
            ));
        }
        Ok((&to_even / &total, to_odd / total))
    }
}

/// Embed a two-step persistent walk as a four-state walk whose parity label
/// records the previous step direction (even = moved forward).
pub fn persistent_embedding(p1: &BigRational, p2: &BigRational) -> FourStateProbs {
    let one = BigRational::one();
    FourStateProbs {
        alpha: &one - p1,
        beta: BigRational::zero(),
        gamma: BigRational::zero(),
        delta: p1.clone(),
        sigma: &one - p2,
        tau: BigRational::zero(),
        mu: BigRational::zero(),
        nu: p2.clone(),
    }
}

/// Continuum-limit drift and diffusion of the four-state walk.
pub fn four_state_front(pr: &FourStateProbs) -> Result<WalkSolution, WalkError> {
    pr.validate()?;
    let one = BigRational::one();
    let two = br(2, 1);
    let s = &pr.gamma + &pr.delta + &pr.sigma + &pr.tau;
    if s.is_zero() {
        return Err(WalkError::DegenerateChain(
            "both parities are absorbing; no unique stationary state",
        ));
    }
    let v_b = ((&pr.gamma + &pr.delta) * (&pr.sigma + &pr.mu - &pr.tau - &pr.nu)
        + (&pr.sigma + &pr.tau) * (&pr.alpha + &pr.gamma - &pr.beta - &pr.delta))
        / &s;
    let p = (&one - &v_b) / &two;
    let d0 = &two * &p * (&one - &p);
    let correction = &two * (&pr.alpha + &pr.gamma - &pr.mu - &pr.sigma) / &s
        * (((&pr.sigma + &pr.tau) * (&pr.alpha - &pr.gamma - &pr.beta + &pr.delta)
            + (&pr.delta + &pr.gamma) * (&pr.sigma - &pr.mu - &pr.tau + &pr.nu))
            / &s);
    let d = (&one + correction) * &d0;
    let denom = &d + &d0;
    let alpha = if denom.is_zero() {
        BigRational::zero()
    } else {
        (&d - &d0) / denom
    };
    Ok(WalkSolution { p, alpha, v_b, d0, d })
}

/// Diffusion constant of the four-state walk from the exact stationary
/// autocovariance sum: 2D = Var(x) + 2 sum_{k>=1} Cov(x_0, x_k), where the
/// covariances decay geometrically with the subleading eigenvalue of the
/// parity chain. Exact for the chain as a Markov process; serves as an
/// independent check on [`four_state_front`].
pub fn chain_diffusion(pr: &FourStateProbs) -> Result<BigRational, WalkError> {
    pr.validate()?;
    let one = BigRational::one();
    let (pi_e, pi_o) = pr.stationary()?;
    let m_e = &pr.alpha + &pr.gamma - &pr.beta - &pr.delta;
    let m_o = &pr.sigma + &pr.mu - &pr.tau - &pr.nu;
    let v = &pi_e * &m_e + &pi_o * &m_o;
    // Second eigenvalue of the 2x2 parity chain (trace minus 1).
    let lambda = (&pr.alpha + &pr.beta) + (&pr.mu + &pr.nu) - &one;
    if lambda == one {
        return Err(WalkError::DegenerateChain(
            "parity chain does not mix; covariance sum diverges",
        ));
    }
    let g_ee = &pr.alpha - &pr.beta;
    let g_eo = &pr.gamma - &pr.delta;
    let g_oe = &pr.sigma - &pr.tau;
    let g_oo = &pr.mu - &pr.nu;
    let m_perp_e = &m_e - &v;
    let m_perp_o = &m_o - &v;
    let b_e = &g_ee * &m_perp_e + &g_eo * &m_perp_o;
    let b_o = &g_oe * &m_perp_e + &g_oo * &m_perp_o;
    let a = &pi_e * &b_e + &pi_o * &b_o;
    let two_d = (&one - &v * &v) + br(2, 1) * &a / (&one - &lambda);
    Ok(two_d / br(2, 1))
}

fn n_even(x: i64) -> BigRational {
    br((x - 1) * (x + 2), 2)
}

fn n_odd(x: i64) -> BigRational {
    br(x * (x - 1), 2)
}

fn m_even(x: i64) -> BigRational {
    br((x + 1) * (x - 2), 2)
}

fn m_odd(x: i64) -> BigRational {
    br(x * (x + 1), 2)
}

/// Joint probabilities of the orthogonal edge walk at local dimension q,
/// from the operator counts n_e/n_o at one site and at the 2-site gate. The
/// forward exits enumerate the outer single-site operator of the new edge
/// gate input; the back exits average over a uniformly mixed interior
/// operator, contributing the extra factor 1/q^2.
fn orthogonal_four_state(q: i64) -> FourStateProbs {
    let d = q * q;
    let (ne_q, no_q) = (n_even(q), n_odd(q));
    let (ne_d, no_d) = (n_even(d), n_odd(d));
    let one = BigRational::one();
    let qq = br(d, 1);
    FourStateProbs {
        alpha: (&ne_q + &one) * &ne_q / &ne_d,
        gamma: &no_q * &no_q / &ne_d,
        beta: (&ne_q + &one) * &ne_q / (&ne_d * &qq),
        delta: &ne_q * &no_q / (&ne_d * &qq),
        sigma: &ne_q * &no_q / &no_d,
        mu: (&ne_q + &one) * &no_q / &no_d,
        tau: &no_q * &no_q / (&no_d * &qq),
        nu: (&ne_q + &one) * &no_q / (&no_d * &qq),
    }
}

/// Derive the four-state joint probabilities directly from the qubit kernel:
/// enumerate the uniform output class of the frontier gate, classify each
/// output as a forward or back move of the chosen edge, and average the
/// re-entering interior operator uniformly over the four single-site Paulis.
/// Only the parity-conserving classes admit this reduction.
pub fn micro_four_state(class: SymmetryClass, edge: Edge) -> Result<FourStateProbs, WalkError> {
    let classify: fn(TwoSitePauli) -> Parity = match class {
        SymmetryClass::Orthogonal => transpose_parity,
        SymmetryClass::Symplectic => sympl_parity,
        _ => {
            return Err(WalkError::UnsupportedClass {
                class,
                op: "micro_four_state",
            })
        }
    };
    let kernel = kernel_exact(class);
    let mut result = FourStateProbs {
        alpha: BigRational::zero(),
        beta: BigRational::zero(),
        gamma: BigRational::zero(),
        delta: BigRational::zero(),
        mu: BigRational::zero(),
        nu: BigRational::zero(),
        sigma: BigRational::zero(),
        tau: BigRational::zero(),
    };
    for parity in [Parity::Even, Parity::Odd] {
        // All same-parity rows are identical; take the first member.
        let input = TwoSitePauli::iter_all()
            .find(|p| !p.is_identity() && classify(*p) == parity)
            .expect("both parity classes are non-empty");
        let row = &kernel[input.index()];
        let mut fwd = [BigRational::zero(), BigRational::zero()];
        let mut back = [BigRational::zero(), BigRational::zero()];
        for out in TwoSitePauli::iter_all().filter(|o| !o.is_identity()) {
            let w = &row[out.index()];
            if w.is_zero() {
                continue;
            }
            let (outer, inner) = match edge {
                Edge::Right => (out.right(), out.left()),
                Edge::Left => (out.left(), out.right()),
            };
            if outer != SiteOp::I {
                // The edge advances; the outer operator seeds the next gate.
                let next = match edge {
                    Edge::Right => TwoSitePauli::from_ops(outer, SiteOp::I),
                    Edge::Left => TwoSitePauli::from_ops(SiteOp::I, outer),
                };
                fwd[classify(next) as usize] += w;
            } else {
                // The edge retreats; a uniformly mixed interior operator
                // joins the surviving inner operator at the next gate.
                for c in SiteOp::ALL {
                    let next = match edge {
                        Edge::Right => TwoSitePauli::from_ops(c, inner),
                        Edge::Left => TwoSitePauli::from_ops(inner, c),
                    };
                    back[classify(next) as usize] += w * br(1, 4);
                }
            }
        }
        let even = Parity::Even as usize;
        let odd = Parity::Odd as usize;
        match parity {
            Parity::Even => {
                result.alpha = fwd[even].clone();
                result.gamma = fwd[odd].clone();
                result.beta = back[even].clone();
                result.delta = back[odd].clone();
            }
            Parity::Odd => {
                result.sigma = fwd[even].clone();
                result.mu = fwd[odd].clone();
                result.tau = back[even].clone();
                result.nu = back[odd].clone();
            }
        }
    }
    result.validate()?;
    Ok(result)
}

/// The four-state probabilities of a parity class at local dimension q.
/// Orthogonal chains are available for every q >= 2 and are edge symmetric;
/// symplectic chains are derived from the kernel and exist for qubits only,
/// with distinct left and right chains.
pub fn four_state_probs(
    class: SymmetryClass,
    q: i64,
    edge: Edge,
) -> Result<FourStateProbs, WalkError> {
    check_q(class, q, "four_state_probs")?;
    match class {
        SymmetryClass::Orthogonal => Ok(orthogonal_four_state(q)),
        SymmetryClass::Symplectic => {
            if q != 2 {
                return Err(WalkError::UnsupportedDimension {
                    class,
                    q,
                    op: "four_state_probs",
                    why: "symplectic joint probabilities are derived from the qubit kernel",
                });
            }
            micro_four_state(class, edge)
        }
        _ => Err(WalkError::UnsupportedClass {
            class,
            op: "four_state_probs",
        }),
    }
}

/// Stationary state of the even/odd edge chain.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenOddState {
    /// Stationary probability that the edge operator is parity even.
    pub p_e: BigRational,
    /// Stationary probability that it is parity odd.
    pub p_o: BigRational,
    /// Back-step probability conditioned on an even edge operator.
    pub p_back_even: BigRational,
    /// Back-step probability conditioned on an odd edge operator.
    pub p_back_odd: BigRational,
    /// Stationary back-step probability.
    pub p: BigRational,
    /// One-layer update in column form: new (p_e, p_o) = M (p_e, p_o).
    /// Available for the orthogonal chain; the symplectic general-q chain is
    /// reconstructed from counting identities instead.
    pub recursion: Option<[[BigRational; 2]; 2]>,
}

/// Solve the even/odd chain of a parity class at local dimension q. The
/// values describe the right endpoint; for the symplectic class the left
/// endpoint has different conditional probabilities but the same v_B.
pub fn evenodd_chain(class: SymmetryClass, q: i64) -> Result<EvenOddState, WalkError> {
    check_q(class, q, "evenodd_chain")?;
    match class {
        SymmetryClass::Orthogonal => {
            let one = BigRational::one();
            let m00 = br((q + 2) * (q * q + 1), 2 * q * (q * q + 2));
            let m01 = br(q * q - 1, 2 * q * q);
            let m10 = br((q - 1) * (q * q - q + 2), 2 * q * (q * q + 2));
            let m11 = br(q * q + 1, 2 * q * q);
            let p_e = &m01 / (&one - &m00 + &m01);
            let p_o = &one - &p_e;
            let p_back_even = n_even(q) / n_even(q * q);
            let p_back_odd = n_odd(q) / n_odd(q * q);
            let p = &p_back_even * &p_e + &p_back_odd * &p_o;
            Ok(EvenOddState {
                p_e,
                p_o,
                p_back_even,
                p_back_odd,
                p,
                recursion: Some([[m00, m01], [m10, m11]]),
            })
        }
        SymmetryClass::Symplectic => {
            if q % 2 != 0 {
                return Err(WalkError::UnsupportedDimension {
                    class,
                    q,
                    op: "evenodd_chain",
                    why: "symplectic structure needs an even gate dimension",
                });
            }
            let p_back_even = m_even(q) / m_even(q * q);
            let p_back_odd = m_odd(q) / m_odd(q * q);
            let p = closed_form_p(class, q)?;
            // The update matrix is not published for this class; the
            // stationary parity split is still fixed by
            // p = p_back_even * p_e + p_back_odd * (1 - p_e).
            let spread = &p_back_even - &p_back_odd;
            if spread.is_zero() {
                return Err(WalkError::DegenerateChain(
                    "back rates coincide; parity split is undetermined",
                ));
            }
            let p_e = (&p - &p_back_odd) / spread;
            let p_o = BigRational::one() - &p_e;
            Ok(EvenOddState {
                p_e,
                p_o,
                p_back_even,
                p_back_odd,
                p,
                recursion: None,
            })
        }
        _ => Err(WalkError::UnsupportedClass {
            class,
            op: "evenodd_chain",
        }),
    }
}
