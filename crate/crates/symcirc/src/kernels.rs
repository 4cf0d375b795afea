//! Exact 2-site transition kernels for the five gate ensembles.
//!
//! Averaging the conjugation action of a random 2-site gate over its ensemble
//! turns Heisenberg evolution of Pauli weight into a Markov chain on 2-site
//! Paulis. The chain's transition matrix depends only on coarse data: which
//! ensemble, and how the input and output Paulis relate (same / commuting /
//! anticommuting for the circular ensembles, transposition or symplectic
//! parity for the real ones).
//!
//! Rates are kept as exact rationals so that normalization identities can be
//! checked with equality; floats appear only in the sampling tables.

use std::fmt;
use std::str::FromStr;

use num::rational::BigRational;
use num::{One, Zero};
use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{sympl_parity, symplectic_inner, transpose_parity, TwoSitePauli};
use crate::{br, ratf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    Unitary,
    Coe,
    Cse,
    Orthogonal,
    Symplectic,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 5] = [
        SymmetryClass::Unitary,
        SymmetryClass::Coe,
        SymmetryClass::Cse,
        SymmetryClass::Orthogonal,
        SymmetryClass::Symplectic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Unitary => "unitary",
            SymmetryClass::Coe => "coe",
            SymmetryClass::Cse => "cse",
            SymmetryClass::Orthogonal => "orthogonal",
            SymmetryClass::Symplectic => "symplectic",
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unitary" | "u" => Ok(SymmetryClass::Unitary),
            "coe" => Ok(SymmetryClass::Coe),
            "cse" => Ok(SymmetryClass::Cse),
            "orthogonal" | "o" => Ok(SymmetryClass::Orthogonal),
            "symplectic" | "sp" => Ok(SymmetryClass::Symplectic),
            other => Err(format!(
                "unknown symmetry class '{other}' (expected unitary, coe, cse, orthogonal, or symplectic)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("gate dimension d = {0} is below 4")]
    DimensionTooSmall(i64),
    #[error("{class} rates need an even gate dimension, got d = {d}")]
    OddDimension { class: SymmetryClass, d: i64 },
}

/// The named rates of one class at gate dimension d. Each variant carries
/// exactly the constants that parameterize that class's kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum RateSet {
    /// All non-identity targets equally likely.
    Uniform { p_uniform: BigRational },
    /// Rate depends on the relation of target to input: stay put, move to a
    /// distinct commuting Pauli, or move to an anticommuting one.
    ClassFunction {
        p_s: BigRational,
        p_c: BigRational,
        p_a: BigRational,
    },
    /// Rate depends only on a conserved parity; uniform within each parity
    /// class of sizes n_e / n_o. `p_e_alt` is a second candidate even-rate
    /// whose product with n_e is not 1, so it cannot normalize a stochastic
    /// row; it is retained for the sampling oracle to rule out empirically.
    ParityUniform {
        p_e: BigRational,
        p_o: BigRational,
        n_e: BigRational,
        n_o: BigRational,
        p_e_alt: Option<BigRational>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelRates {
    pub class: SymmetryClass,
    pub d: i64,
    pub rates: RateSet,
}

/// Exact transition rates for `class` at gate dimension `d` (= q² for a
/// chain of q-state sites).
pub fn rates(class: SymmetryClass, d: i64) -> Result<KernelRates, KernelError> {
    if d < 4 {
        return Err(KernelError::DimensionTooSmall(d));
    }
    if d % 2 != 0 && matches!(class, SymmetryClass::Cse | SymmetryClass::Symplectic) {
        return Err(KernelError::OddDimension { class, d });
    }
    let rates = match class {
        SymmetryClass::Unitary => RateSet::Uniform {
            p_uniform: br(1, d * d - 1),
        },
        SymmetryClass::Coe => RateSet::ClassFunction {
            p_s: br(3 * d + 8, d * (d + 1) * (d + 3)),
            p_c: br(d + 4, d * (d + 1) * (d + 3)),
            p_a: br((d + 2) * (d + 2), d * d * (d + 1) * (d + 3)),
        },
        SymmetryClass::Cse => RateSet::ClassFunction {
            p_s: br(3 * d - 8, d * (d - 3) * (d - 1)),
            p_c: br(d - 4, d * (d - 3) * (d - 1)),
            p_a: br((d - 2) * (d - 2), d * d * (d - 3) * (d - 1)),
        },
        SymmetryClass::Orthogonal => RateSet::ParityUniform {
            p_e: br(2, (d - 1) * (d + 2)),
            p_o: br(2, d * (d - 1)),
            n_e: br((d - 1) * (d + 2), 2),
            n_o: br(d * (d - 1), 2),
            p_e_alt: None,
        },
        SymmetryClass::Symplectic => RateSet::ParityUniform {
            p_e: br(2, (d + 1) * (d - 2)),
            p_o: br(2, d * (d + 1)),
            n_e: br((d + 1) * (d - 2), 2),
            n_o: br(d * (d + 1), 2),
            p_e_alt: Some(br(2, (d - 1) * (d + 1))),
        },
    };
    Ok(KernelRates { class, d, rates })
}

/// The 16x16 qubit transition matrix in exact rationals. Row = input 2-site
/// Pauli, column = output, both indexed in II..ZZ order.
pub fn kernel_exact(class: SymmetryClass) -> Vec<Vec<BigRational>> {
    let kr = rates(class, 4).expect("d = 4 is valid for every class");
    let mut m = vec![vec![BigRational::zero(); 16]; 16];
    m[0][0] = BigRational::one();
    for p in TwoSitePauli::iter_all().filter(|p| !p.is_identity()) {
        for a in TwoSitePauli::iter_all().filter(|a| !a.is_identity()) {
            m[p.index()][a.index()] = match &kr.rates {
                RateSet::Uniform { p_uniform } => p_uniform.clone(),
                RateSet::ClassFunction { p_s, p_c, p_a } => {
                    if a == p {
                        p_s.clone()
                    } else if symplectic_inner(a, p) == 0 {
                        p_c.clone()
                    } else {
                        p_a.clone()
                    }
                }
                RateSet::ParityUniform { p_e, p_o, .. } => {
                    let classify = match class {
                        SymmetryClass::Orthogonal => transpose_parity,
                        SymmetryClass::Symplectic => sympl_parity,
                        _ => unreachable!(),
                    };
                    if classify(p) != classify(a) {
                        BigRational::zero()
                    } else if classify(p) == crate::pauli::Parity::Even {
                        p_e.clone()
                    } else {
                        p_o.clone()
                    }
                }
            };
        }
    }
    m
}

/// A kernel prepared for sampling: float matrix plus per-row cumulative
/// tables. Immutable once built, freely shared across threads.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    pub class: SymmetryClass,
    pub matrix: [[f64; 16]; 16],
    cumulative: [[f64; 16]; 16],
}

/// Build the qubit kernel for `class` (gate dimension 4).
pub fn kernel(class: SymmetryClass) -> TransitionKernel {
    let exact = kernel_exact(class);
    let mut matrix = [[0.0; 16]; 16];
    let mut cumulative = [[0.0; 16]; 16];
    for (i, row) in exact.iter().enumerate() {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (j, e) in row.iter().enumerate() {
            let p = ratf(e);
            matrix[i][j] = p;
            acc += p;
            cumulative[i][j] = acc;
            if p > 0.0 {
                last_nonzero = j;
            }
        }
        // Pin the tail to exactly 1 so a uniform draw in [0, 1) always lands
        // on an entry with nonzero mass.
        for c in cumulative[i].iter_mut().skip(last_nonzero) {
            *c = 1.0;
        }
    }
    TransitionKernel {
        class,
        matrix,
        cumulative,
    }
}

impl TransitionKernel {
    /// Sample an output Pauli from the row of `input`. The identity row is a
    /// point mass, so II always returns II.
    #[inline]
    pub fn apply_gate<R: RngCore>(&self, input: TwoSitePauli, rng: &mut R) -> TwoSitePauli {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let row = &self.cumulative[input.index()];
        for (j, &c) in row.iter().enumerate() {
            if u < c {
                return TwoSitePauli::from_index(j as u8);
            }
        }
        unreachable!("cumulative row ends at 1.0 and u < 1.0");
    }
}
