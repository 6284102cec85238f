//! Angular-momentum operators, irreducible tensor operators and the
//! rank-2 quadrupole set.
//!
//! Basis ordering is the Zeeman ordering: index 0 is m = I, the last index
//! is m = -I.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A spin of quantum number I = two_i / 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSystem {
    two_i: u32,
}

impl SpinSystem {
    pub fn new(two_i: u32) -> Result<Self> {
        if two_i == 0 {
            return Err(Error::UnsupportedSpin(0));
        }
        Ok(Self { two_i })
    }

    /// Spin 7/2.
    pub fn seven_halves() -> Self {
        Self { two_i: 7 }
    }

    pub fn two_i(&self) -> u32 {
        self.two_i
    }

    pub fn spin(&self) -> f64 {
        self.two_i as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_i as usize + 1
    }

    /// Magnetic quantum number of basis index `k` (0-based).
    pub fn m(&self, k: usize) -> f64 {
        self.spin() - k as f64
    }
}

/// Dense complex operator on the spin Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(pub DMatrix<Complex64>);

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// Hilbert-Schmidt inner product tr(A^dagger B).
    pub fn inner(&self, other: &Operator) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Real part of every entry.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.0.map(|z| z.re)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

/// Cartesian and ladder spin operators.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub ix: Operator,
    pub iy: Operator,
    pub iz: Operator,
    pub iplus: Operator,
    pub iminus: Operator,
}

pub fn make_spin_operators(two_i: u32) -> Result<SpinOperators> {
    let sys = SpinSystem::new(two_i)?;
    let d = sys.dim();
    let s = sys.spin();
    let mut iz = DMatrix::<f64>::zeros(d, d);
    let mut ip = DMatrix::<f64>::zeros(d, d);
    for k in 0..d {
        iz[(k, k)] = sys.m(k);
    }
    // I+ |m> = sqrt(I(I+1) - m(m+1)) |m+1>, and |m+1> sits one index up.
    for k in 1..d {
        let m = sys.m(k);
        ip[(k - 1, k)] = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
    }
    let iplus = Operator::from_real(&ip);
    let iminus = iplus.adjoint();
    let ix = (&iplus + &iminus).scale(0.5);
    let iy = (&iplus - &iminus).scale_c(Complex64::new(0.0, -0.5));
    Ok(SpinOperators { ix, iy, iz: Operator::from_real(&iz), iplus, iminus })
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(&(a * b) - &(b * a))
}

/// Orthonormal tensor operator T_{l,m}.
///
/// T_{l,l} = (-1)^l (I+)^l / |(I+)^l|, then T_{l,m-1} follows from
/// [I-, T_{l,m}] renormalized at each step. This gives I_z = sqrt(42) T_{1,0}
/// and I_x = (sqrt(84)/2)(T_{1,-1} - T_{1,1}) for spin 7/2, and
/// T_{l,m}^dagger = (-1)^m T_{l,-m}.
pub fn make_irreducible_tensor(system: SpinSystem, l: i32, m: i32) -> Result<Operator> {
    if l < 0 || l > system.two_i() as i32 || m.abs() > l {
        return Err(Error::InvalidArgument(format!("tensor rank/projection ({l}, {m}) out of range")));
    }
    let ops = make_spin_operators(system.two_i())?;
    let d = system.dim();
    let mut t = Operator::identity(d);
    for _ in 0..l {
        t = &t * &ops.iplus;
    }
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    t = t.scale(sign / t.norm());
    let mut mm = l;
    while mm > m {
        let lowered = commutator(&ops.iminus, &t)?;
        t = lowered.scale(1.0 / lowered.norm());
        mm -= 1;
    }
    Ok(t)
}

/// The five second-rank quadrupole operators Q_p, p = -2..=2.
#[derive(Debug, Clone)]
pub struct QuadrupoleSet {
    pub q_minus2: Operator,
    pub q_minus1: Operator,
    pub q_zero: Operator,
    pub q_plus1: Operator,
    pub q_plus2: Operator,
    /// The sign s in [I_z, Q_p] = s p Q_p.
    pub coherence_sign: i32,
}

impl QuadrupoleSet {
    pub fn get(&self, p: i32) -> &Operator {
        match p {
            -2 => &self.q_minus2,
            -1 => &self.q_minus1,
            0 => &self.q_zero,
            1 => &self.q_plus1,
            2 => &self.q_plus2,
            _ => panic!("quadrupole index {p} out of range"),
        }
    }

    pub fn dim(&self) -> usize {
        self.q_zero.dim()
    }
}

pub fn make_quadrupole_operators(system: SpinSystem) -> Result<QuadrupoleSet> {
    if system.two_i() != 7 {
        return Err(Error::UnsupportedSpin(system.two_i()));
    }
    let t00 = make_irreducible_tensor(system, 0, 0)?;
    let t10 = make_irreducible_tensor(system, 1, 0)?;
    let t11 = make_irreducible_tensor(system, 1, 1)?;
    let t1m1 = make_irreducible_tensor(system, 1, -1)?;

    let s6 = 6f64.sqrt();
    let s3 = 3f64.sqrt();
    let q_minus2 = (&t11 * &t11).scale(42.0 * s6);
    let q_plus2 = (&t1m1 * &t1m1).scale(42.0 * s6);
    let q_minus1 = (&(&t10 * &t11) + &(&t11 * &t10)).scale(-42.0 * s3);
    let q_plus1 = (&(&t10 * &t1m1) + &(&t1m1 * &t10)).scale(-42.0 * s3);
    let q_zero = (&(&t10 * &t10).scale(2.0) - &t00.scale(7f64.sqrt() / 4.0)).scale(63.0);

    let iz = make_spin_operators(7)?.iz;
    let ops = [(-2, &q_minus2), (-1, &q_minus1), (1, &q_plus1), (2, &q_plus2)];
    let mut sign = 0;
    for s in [1, -1] {
        let ok = ops.iter().all(|(p, q)| {
            let c = commutator(&iz, q).expect("same dimension");
            c.max_abs_diff(&q.scale((s * p) as f64)) < 1e-10 * q.max_abs()
        });
        if ok {
            sign = s;
            break;
        }
    }
    if sign == 0 {
        return Err(Error::InvalidArgument("quadrupole operators are not coherence-graded".into()));
    }
    Ok(QuadrupoleSet { q_minus2, q_minus1, q_zero, q_plus1, q_plus2, coherence_sign: sign })
}
