//! Pauli strings on a qubit chain and the classifiers the kernels need:
//! commutation (symplectic inner product), transposition parity, and parity
//! under symplectic conjugation.
//!
//! Strings are stored as two bit masks (x and z components per site), so the
//! whole algebra is word-parallel and phase-free. Phases are deliberately
//! never tracked: the ensemble-averaged dynamics acts on squared string
//! amplitudes, which do not see them.

use std::fmt;
use std::sync::OnceLock;

use num::Complex;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("initial operator must be non-identity")]
    IdentityInitial,
    #[error("site {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("gate {gate} out of range for {n} sites")]
    GateOutOfRange { gate: usize, n: usize },
    #[error("all-identity string has no edges")]
    IdentityString,
}

/// Single-site Pauli label. The (x, z) bit pair is the storage encoding:
/// I=(0,0), X=(1,0), Y=(1,1), Z=(0,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SiteOp {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl SiteOp {
    pub const ALL: [SiteOp; 4] = [SiteOp::I, SiteOp::X, SiteOp::Y, SiteOp::Z];

    #[inline]
    pub fn bits(self) -> (u64, u64) {
        match self {
            SiteOp::I => (0, 0),
            SiteOp::X => (1, 0),
            SiteOp::Y => (1, 1),
            SiteOp::Z => (0, 1),
        }
    }

    #[inline]
    pub fn from_bits(x: u64, z: u64) -> SiteOp {
        match (x & 1, z & 1) {
            (0, 0) => SiteOp::I,
            (1, 0) => SiteOp::X,
            (1, 1) => SiteOp::Y,
            (0, 1) => SiteOp::Z,
            _ => unreachable!(),
        }
    }

    pub fn from_index(i: u8) -> SiteOp {
        Self::ALL[i as usize]
    }

    pub fn letter(self) -> char {
        match self {
            SiteOp::I => 'I',
            SiteOp::X => 'X',
            SiteOp::Y => 'Y',
            SiteOp::Z => 'Z',
        }
    }
}

/// A 2-site Pauli, indexed 0..16 as `4 * left + right` in I,X,Y,Z order.
/// Index 0 is the 2-site identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoSitePauli(u8);

impl TwoSitePauli {
    pub const COUNT: usize = 16;

    #[inline]
    pub fn from_index(i: u8) -> TwoSitePauli {
        assert!(i < 16);
        TwoSitePauli(i)
    }

    #[inline]
    pub fn from_ops(left: SiteOp, right: SiteOp) -> TwoSitePauli {
        TwoSitePauli((left as u8) << 2 | right as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn left(self) -> SiteOp {
        SiteOp::from_index(self.0 >> 2)
    }

    #[inline]
    pub fn right(self) -> SiteOp {
        SiteOp::from_index(self.0 & 3)
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    pub fn iter_all() -> impl Iterator<Item = TwoSitePauli> {
        (0u8..16).map(TwoSitePauli)
    }

    pub fn label(self) -> String {
        format!("{}{}", self.left().letter(), self.right().letter())
    }
}

impl fmt::Display for TwoSitePauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// Whether a brickwork layer places gates on (2g, 2g+1) or (2g+1, 2g+2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerParity {
    Even,
    Odd,
}

impl LayerParity {
    #[inline]
    pub fn of_layer(t: usize) -> LayerParity {
        if t % 2 == 0 {
            LayerParity::Even
        } else {
            LayerParity::Odd
        }
    }

    /// Leftmost site covered by gate `g` in a layer of this parity.
    #[inline]
    pub fn gate_site(self, g: usize) -> usize {
        match self {
            LayerParity::Even => 2 * g,
            LayerParity::Odd => 2 * g + 1,
        }
    }
}

/// Symplectic inner product of two 2-site Paulis:
/// sum over sites of (x_a z_b + z_a x_b) mod 2.
/// 0 means the operators commute, 1 that they anticommute.
#[inline]
pub fn symplectic_inner(a: TwoSitePauli, b: TwoSitePauli) -> u8 {
    let mut acc = 0;
    for (pa, pb) in [(a.left(), b.left()), (a.right(), b.right())] {
        let (xa, za) = pa.bits();
        let (xb, zb) = pb.bits();
        acc ^= (xa & zb) ^ (za & xb);
    }
    acc as u8
}

/// Parity of a 2-site Pauli under transposition: odd iff it contains an odd
/// number of Y factors (Y is the only antisymmetric Pauli matrix).
#[inline]
pub fn transpose_parity(p: TwoSitePauli) -> Parity {
    let ys = (p.left() == SiteOp::Y) as u8 + (p.right() == SiteOp::Y) as u8;
    if ys % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Parity under symplectic conjugation O -> J O^T J^T with J = iY (x) 1.
///
/// Computed once by brute force in exact Gaussian-integer arithmetic and
/// cached; this removes any sign-convention ambiguity from the table.
pub fn sympl_parity(p: TwoSitePauli) -> Parity {
    static TABLE: OnceLock<[Parity; 16]> = OnceLock::new();
    TABLE.get_or_init(build_sympl_table)[p.index()]
}

type C = Complex<i64>;
type M4 = [[C; 4]; 4];

fn c(re: i64, im: i64) -> C {
    Complex::new(re, im)
}

fn site_matrix(op: SiteOp) -> [[C; 2]; 2] {
    match op {
        SiteOp::I => [[c(1, 0), c(0, 0)], [c(0, 0), c(1, 0)]],
        SiteOp::X => [[c(0, 0), c(1, 0)], [c(1, 0), c(0, 0)]],
        SiteOp::Y => [[c(0, 0), c(0, -1)], [c(0, 1), c(0, 0)]],
        SiteOp::Z => [[c(1, 0), c(0, 0)], [c(0, 0), c(-1, 0)]],
    }
}

fn kron(a: [[C; 2]; 2], b: [[C; 2]; 2]) -> M4 {
    let mut out = [[c(0, 0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Dense 4x4 Gaussian-integer matrix for a 2-site Pauli.
pub(crate) fn two_site_matrix_int(p: TwoSitePauli) -> M4 {
    kron(site_matrix(p.left()), site_matrix(p.right()))
}

fn matmul(a: &M4, b: &M4) -> M4 {
    let mut out = [[c(0, 0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = c(0, 0);
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

fn transpose(a: &M4) -> M4 {
    let mut out = [[c(0, 0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn build_sympl_table() -> [Parity; 16] {
    // J = iY (x) 1, which is real antisymmetric with J J^T = 1.
    let j = kron(
        [[c(0, 0), c(1, 0)], [c(-1, 0), c(0, 0)]],
        [[c(1, 0), c(0, 0)], [c(0, 0), c(1, 0)]],
    );
    let jt = transpose(&j);
    let mut table = [Parity::Even; 16];
    for p in TwoSitePauli::iter_all() {
        let m = two_site_matrix_int(p);
        let conj = matmul(&matmul(&j, &transpose(&m)), &jt);
        let plus = conj == m;
        let minus = {
            let mut neg = m;
            for row in neg.iter_mut() {
                for e in row.iter_mut() {
                    *e = -*e;
                }
            }
            conj == neg
        };
        assert!(plus ^ minus, "conjugation of {p} is not +/- itself");
        table[p.index()] = if plus { Parity::Even } else { Parity::Odd };
    }
    table
}

/// Link coordinates of a string's support. Link i sits between sites i and
/// i+1; `right_link` is the index of the rightmost non-identity site and
/// `left_link` is the index of the leftmost non-identity site minus one, so a
/// single X at site 4 has edges (3, 4).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeCoords {
    pub left_link: i64,
    pub right_link: i64,
}

/// A bit-packed Pauli string on `n` sites. Bit i of `x`/`z` is set iff site i
/// carries an x/z component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

/// A string with `op` at `site` and identity elsewhere. The identity initial
/// operator is rejected: it never grows.
pub fn make_string(n: usize, site: usize, op: SiteOp) -> Result<PauliString, PauliError> {
    if op == SiteOp::I {
        return Err(PauliError::IdentityInitial);
    }
    if site >= n {
        return Err(PauliError::SiteOutOfRange { site, n });
    }
    let mut s = PauliString::identity(n);
    s.set_site(site, op);
    Ok(s)
}

impl PauliString {
    pub fn identity(n: usize) -> PauliString {
        let words = n.div_ceil(64);
        PauliString {
            n,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn site(&self, i: usize) -> SiteOp {
        debug_assert!(i < self.n);
        let (w, b) = (i / 64, i % 64);
        SiteOp::from_bits(self.x[w] >> b, self.z[w] >> b)
    }

    #[inline]
    pub fn set_site(&mut self, i: usize, op: SiteOp) {
        debug_assert!(i < self.n);
        let (w, b) = (i / 64, i % 64);
        let (xb, zb) = op.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | (xb << b);
        self.z[w] = (self.z[w] & !(1 << b)) | (zb << b);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// Restriction of the string to the two sites covered by gate `g` in a
    /// layer of the given parity.
    pub fn gate_window(
        &self,
        g: usize,
        layer: LayerParity,
    ) -> Result<TwoSitePauli, PauliError> {
        let a = layer.gate_site(g);
        if a + 1 >= self.n {
            return Err(PauliError::GateOutOfRange { gate: g, n: self.n });
        }
        Ok(TwoSitePauli::from_ops(self.site(a), self.site(a + 1)))
    }

    /// Write a 2-site Pauli back onto the window of gate `g`.
    pub fn set_gate_window(&mut self, g: usize, layer: LayerParity, p: TwoSitePauli) {
        let a = layer.gate_site(g);
        debug_assert!(a + 1 < self.n);
        self.set_site(a, p.left());
        self.set_site(a + 1, p.right());
    }

    /// Edge positions in link coordinates. Errors on the all-identity string.
    pub fn edges(&self) -> Result<EdgeCoords, PauliError> {
        let mut right = None;
        for w in (0..self.x.len()).rev() {
            let occ = self.x[w] | self.z[w];
            if occ != 0 {
                right = Some(64 * w as i64 + 63 - occ.leading_zeros() as i64);
                break;
            }
        }
        let right_link = right.ok_or(PauliError::IdentityString)?;
        let mut left_link = 0;
        for w in 0..self.x.len() {
            let occ = self.x[w] | self.z[w];
            if occ != 0 {
                left_link = 64 * w as i64 + occ.trailing_zeros() as i64 - 1;
                break;
            }
        }
        Ok(EdgeCoords {
            left_link,
            right_link,
        })
    }
}
