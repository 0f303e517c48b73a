//! Matrix ternary rings of operators.
//!
//! Elements are complex `rows x cols` matrices. The ternary product is
//! `[xyz] = x y* z` and the norm is the spectral norm (largest singular
//! value), which is the only matrix norm satisfying `||[xxx]|| = ||x||^3`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{rng_from_seed, SeededRng};
use crate::scalar::{unit_floor, Real};
use crate::spectral;

/// Matrix dimensions of a ring element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape { rows, cols });
        }
        Ok(Shape { rows, cols })
    }

    pub fn square(n: usize) -> Result<Self> {
        Shape::new(n, n)
    }

    /// Number of complex entries.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn transposed(&self) -> Shape {
        Shape {
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub(crate) fn expect(&self, found: Shape) -> Result<()> {
        if *self == found {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: *self,
                found,
            })
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// A complex matrix viewed as a member of the full matrix TRO of its shape.
///
/// Entries are stored row-major. Constructors reject non-finite entries;
/// arithmetic may still overflow, in which case [`RingElement::norm`]
/// reports `+inf` and [`RingElement::try_norm`] fails.
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement<T: Real> {
    shape: Shape,
    entries: Vec<Complex<T>>,
}

impl<T: Real> RingElement<T> {
    pub fn new(shape: Shape, entries: Vec<Complex<T>>) -> Result<Self> {
        Shape::new(shape.rows, shape.cols)?;
        if entries.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "{} entries supplied for shape {}",
                entries.len(),
                shape
            )));
        }
        if let Some(index) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(RingElement { shape, entries })
    }

    /// Builds an element from nested rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let shape = Shape::new(r, c)?;
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&(re, im)| Complex::new(T::of(re), T::of(im)))
            .collect();
        RingElement::new(shape, entries)
    }

    pub(crate) fn from_vec_unchecked(shape: Shape, entries: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(entries.len(), shape.len());
        RingElement { shape, entries }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut entries = Vec::with_capacity(shape.len());
        for i in 0..shape.rows {
            for j in 0..shape.cols {
                entries.push(f(i, j));
            }
        }
        RingElement { shape, entries }
    }

    pub fn zeros(shape: Shape) -> Self {
        RingElement {
            shape,
            entries: vec![Complex::zero(); shape.len()],
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        let shape = Shape::square(n)?;
        Ok(Self::from_fn(shape, |i, j| {
            if i == j {
                Complex::one()
            } else {
                Complex::zero()
            }
        }))
    }

    /// Matrix unit `e_ij` (zero-based indices).
    pub fn matrix_unit(shape: Shape, i: usize, j: usize) -> Result<Self> {
        if i >= shape.rows || j >= shape.cols {
            return Err(Error::InvalidInput(format!(
                "matrix unit ({i},{j}) outside shape {shape}"
            )));
        }
        let mut e = Self::zeros(shape);
        e.entries[i * shape.cols + j] = Complex::one();
        Ok(e)
    }

    pub fn scalar(z: Complex<T>) -> Self {
        RingElement {
            shape: Shape { rows: 1, cols: 1 },
            entries: vec![z],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex<T>> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[i * self.shape.cols + j]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.is_zero())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let cols = self.shape.cols;
        Self::from_fn(self.shape.transposed(), |i, j| self.entries[j * cols + i].conj())
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        RingElement {
            shape: self.shape,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Ordinary matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::InvalidInput(format!(
                "cannot multiply {} by {}",
                self.shape, rhs.shape
            )));
        }
        Ok(self.matmul_unchecked(rhs))
    }

    pub(crate) fn matmul_unchecked(&self, rhs: &Self) -> Self {
        let (m, k, n) = (self.rows(), self.cols(), rhs.cols());
        let mut out = vec![Complex::zero(); m * n];
        for i in 0..m {
            for p in 0..k {
                let a = self.entries[i * k + p];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = out[i * n + j] + a * rhs.entries[p * n + j];
                }
            }
        }
        RingElement {
            shape: Shape { rows: m, cols: n },
            entries: out,
        }
    }

    /// `self * rhs^*` without materialising the adjoint.
    fn mul_adjoint(&self, rhs: &Self) -> Self {
        let (m, k, n) = (self.rows(), self.cols(), rhs.rows());
        let mut out = vec![Complex::zero(); m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = Complex::zero();
                for p in 0..k {
                    acc = acc + self.entries[i * k + p] * rhs.entries[j * k + p].conj();
                }
                out[i * n + j] = acc;
            }
        }
        RingElement {
            shape: Shape { rows: m, cols: n },
            entries: out,
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.shape.expect(rhs.shape)?;
        Ok(self.zip(rhs, |a, b| a + b))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.shape.expect(rhs.shape)?;
        Ok(self.zip(rhs, |a, b| a - b))
    }

    fn zip(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        RingElement {
            shape: self.shape,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn scale_real(&self, t: T) -> Self {
        self.map(|z| z * t)
    }

    /// Ternary product `[self y z] = self y* z`.
    pub fn tprod(&self, y: &Self, z: &Self) -> Result<Self> {
        self.shape.expect(y.shape)?;
        self.shape.expect(z.shape)?;
        Ok(self.tprod_unchecked(y, z))
    }

    pub(crate) fn tprod_unchecked(&self, y: &Self, z: &Self) -> Self {
        self.mul_adjoint(y).matmul_unchecked(z)
    }

    /// Spectral norm; `+inf` when any entry is non-finite.
    pub fn norm(&self) -> T {
        if !self.is_finite() {
            return T::infinity();
        }
        spectral::spectral_norm(self)
    }

    pub fn try_norm(&self) -> Result<T> {
        if let Some(index) = self
            .entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(spectral::spectral_norm(self))
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Distance in the spectral norm.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.checked_sub(other)?.norm())
    }

    /// Converts the scalar type, e.g. `f64 -> f32`.
    pub fn cast<U: Real>(&self) -> RingElement<U> {
        RingElement {
            shape: self.shape,
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(U::of(z.re.as_f64()), U::of(z.im.as_f64())))
                .collect(),
        }
    }

    /// Row-major `[re, im]` pairs, widened to `f64`.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.entries
            .iter()
            .map(|z| [z.re.as_f64(), z.im.as_f64()])
            .collect()
    }

    pub fn from_pairs(shape: Shape, pairs: &[[f64; 2]]) -> Result<Self> {
        let entries = pairs
            .iter()
            .map(|p| Complex::new(T::of(p[0]), T::of(p[1])))
            .collect();
        RingElement::new(shape, entries)
    }
}

impl<T: Real> Add for &RingElement<T> {
    type Output = RingElement<T>;

    fn add(self, rhs: Self) -> RingElement<T> {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in addition");
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &RingElement<T> {
    type Output = RingElement<T>;

    fn sub(self, rhs: Self) -> RingElement<T> {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in subtraction");
        self.zip(rhs, |a, b| a - b)
    }
}

impl<T: Real> Neg for &RingElement<T> {
    type Output = RingElement<T>;

    fn neg(self) -> RingElement<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul<Complex<T>> for &RingElement<T> {
    type Output = RingElement<T>;

    fn mul(self, rhs: Complex<T>) -> RingElement<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<T> for &RingElement<T> {
    type Output = RingElement<T>;

    fn mul(self, rhs: T) -> RingElement<T> {
        self.scale_real(rhs)
    }
}

/// `[xyz] = x y* z`; linear in `x` and `z`, conjugate-linear in `y`.
pub fn tprod<T: Real>(x: &RingElement<T>, y: &RingElement<T>, z: &RingElement<T>) -> Result<RingElement<T>> {
    x.tprod(y, z)
}

/// Spectral norm, rejecting non-finite input.
pub fn norm<T: Real>(x: &RingElement<T>) -> Result<T> {
    x.try_norm()
}

pub fn add<T: Real>(x: &RingElement<T>, y: &RingElement<T>) -> Result<RingElement<T>> {
    x.checked_add(y)
}

pub fn scale<T: Real>(alpha: Complex<T>, x: &RingElement<T>) -> RingElement<T> {
    x.scale(alpha)
}

/// The unital C*-algebra induced by a unit `e` of the ternary ring:
/// `x . y = [x e y]` and `x^* = [e x e]`.
#[derive(Debug, Clone)]
pub struct UnitalStructure<T: Real> {
    unit: RingElement<T>,
}

/// Number of random probes used to confirm that a candidate is a unit.
const UNIT_PROBES: usize = 8;
const UNIT_PROBE_SEED: u64 = 0x5eed_0e1e;

impl<T: Real> UnitalStructure<T> {
    pub fn unit(&self) -> &RingElement<T> {
        &self.unit
    }

    pub fn odot(&self, x: &RingElement<T>, y: &RingElement<T>) -> Result<RingElement<T>> {
        x.tprod(&self.unit, y)
    }

    pub fn star(&self, x: &RingElement<T>) -> Result<RingElement<T>> {
        self.unit.tprod(x, &self.unit)
    }
}

/// Derives the unital product and involution from a unit `e`, after checking
/// `[xee] = [eex] = x` on random samples.
pub fn unital_structure<T: Real>(e: &RingElement<T>) -> Result<UnitalStructure<T>> {
    if !e.shape().is_square() {
        return Err(Error::Precondition(format!(
            "unit must be square, got {}",
            e.shape()
        )));
    }
    let tol = T::of(1e-9);
    let mut rng = rng_from_seed(UNIT_PROBE_SEED);
    for _ in 0..UNIT_PROBES {
        let x = random_element_from(&mut rng, e.shape(), T::one());
        let scale = unit_floor(x.norm());
        let right = x.tprod_unchecked(e, e);
        let left = e.tprod_unchecked(e, &x);
        if (&right - &x).norm() > tol * scale || (&left - &x).norm() > tol * scale {
            return Err(Error::Precondition(
                "candidate unit fails [xee] = [eex] = x".into(),
            ));
        }
    }
    Ok(UnitalStructure { unit: e.clone() })
}

/// Deterministic random element.
///
/// Entries are i.i.d. standard complex Gaussians (real and imaginary parts
/// `N(0, 1/2)`); the matrix is then rescaled so that its spectral norm equals
/// `radius * s` with `s` uniform on `(0, 1]`.
pub fn random_element<T: Real>(shape: Shape, radius: T, seed: u64) -> RingElement<T> {
    let mut rng = rng_from_seed(seed);
    random_element_from(&mut rng, shape, radius)
}

pub fn random_element_from<T: Real>(rng: &mut SeededRng, shape: Shape, radius: T) -> RingElement<T> {
    let s: f64 = 1.0 - rng.random::<f64>();
    random_on_sphere(rng, shape, radius * T::of(s))
}

/// Random element with spectral norm exactly `norm` (up to rounding).
pub fn random_on_sphere<T: Real>(rng: &mut SeededRng, shape: Shape, norm: T) -> RingElement<T> {
    let g = gaussian_matrix::<T>(rng, shape);
    let n = g.norm();
    if n.is_zero() {
        return RingElement::zeros(shape);
    }
    g.scale_real(norm / n)
}

pub(crate) fn gaussian_matrix<T: Real>(rng: &mut SeededRng, shape: Shape) -> RingElement<T> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    RingElement::from_fn(shape, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::of(re * half), T::of(im * half))
    })
}

/// Random isometry (`rows >= cols`, orthonormal columns) obtained from a
/// complex Gaussian matrix by twice-applied modified Gram-Schmidt.
pub fn random_isometry<T: Real>(rng: &mut SeededRng, rows: usize, cols: usize) -> Result<RingElement<T>> {
    if rows < cols {
        return Err(Error::InvalidInput(format!(
            "isometry needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let shape = Shape::new(rows, cols)?;
    let mut a = gaussian_matrix::<T>(rng, shape);
    for _pass in 0..2 {
        for j in 0..cols {
            for k in 0..j {
                let mut dot = Complex::<T>::zero();
                for i in 0..rows {
                    dot = dot + a.get(i, k).conj() * a.get(i, j);
                }
                for i in 0..rows {
                    let v = a.get(i, k);
                    a.entries[i * cols + j] = a.entries[i * cols + j] - dot * v;
                }
            }
            let nrm = (0..rows).map(|i| a.get(i, j).norm_sqr()).sum::<T>().sqrt();
            for i in 0..rows {
                a.entries[i * cols + j] = a.entries[i * cols + j] / nrm;
            }
        }
    }
    Ok(a)
}

/// `||U* U - I||` for a candidate isometry.
pub fn isometry_residual<T: Real>(u: &RingElement<T>) -> T {
    let gram = u.adjoint().matmul_unchecked(u);
    let id = RingElement::identity(u.cols()).expect("cols >= 1");
    (&gram - &id).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    type E = RingElement<f64>;

    fn s(r: usize, c: usize) -> Shape {
        Shape::new(r, c).unwrap()
    }

    #[test]
    fn identity_is_fixed_by_tprod() {
        let i = E::identity(2).unwrap();
        assert_eq!(tprod(&i, &i, &i).unwrap(), i);
    }

    #[test]
    fn matrix_unit_is_ternary_idempotent() {
        let e = E::matrix_unit(s(2, 2), 0, 1).unwrap();
        assert_eq!(tprod(&e, &e, &e).unwrap(), e);
    }

    #[test]
    fn scalar_multiples_of_identity() {
        let (a, b, c) = (cplx::<f64>(1.0, 2.0), cplx(-0.5, 3.0), cplx(2.0, -1.0));
        let i = E::identity(2).unwrap();
        let p = tprod(&i.scale(a), &i.scale(b), &i.scale(c)).unwrap();
        // direct 2x2 product, written out
        let expect = a * b.conj() * c;
        for r in 0..2 {
            for col in 0..2 {
                let want = if r == col { expect } else { Complex::zero() };
                assert!((p.get(r, col) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let x = E::zeros(s(2, 2));
        let y = E::zeros(s(2, 3));
        assert!(matches!(tprod(&x, &y, &x), Err(Error::ShapeMismatch { .. })));
        assert!(add(&x, &y).is_err());
    }

    #[test]
    fn zero_shape_is_rejected() {
        assert_eq!(Shape::new(0, 2), Err(Error::InvalidShape { rows: 0, cols: 2 }));
    }

    #[test]
    fn non_finite_entries_rejected() {
        let r = E::new(s(1, 2), vec![Complex::new(1.0, 0.0), Complex::new(f64::NAN, 0.0)]);
        assert_eq!(r, Err(Error::NonFinite { index: 1 }));
        let big = E::new(s(1, 1), vec![Complex::new(f64::MAX, 0.0)]).unwrap();
        let inf = big.scale_real(10.0);
        assert!(norm(&inf).is_err());
        assert!(inf.norm().is_infinite());
    }

    #[test]
    fn norms_of_simple_matrices() {
        let d = E::from_rows(&[vec![(3.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]]).unwrap();
        assert!((d.norm() - 3.0).abs() < 1e-14);
        let e = E::matrix_unit(s(2, 2), 0, 1).unwrap();
        assert!((e.norm() - 1.0).abs() < 1e-15);
        assert_eq!(E::zeros(s(3, 2)).norm(), 0.0);
    }

    #[test]
    fn add_scale_basics() {
        let x = random_element::<f64>(s(3, 2), 2.0, 9);
        assert!(add(&x, &scale(cplx(-1.0, 0.0), &x)).unwrap().is_zero());
        let e = E::matrix_unit(s(2, 2), 0, 0).unwrap();
        let y = scale(cplx(0.0, 2.0), &e);
        assert_eq!(y.get(0, 0), cplx(0.0, 2.0));
        assert!((x.scale_real(-2.0).norm() - 2.0 * x.norm()).abs() < 1e-13);
    }

    #[test]
    fn unital_structure_of_identity() {
        let i = E::identity(2).unwrap();
        let u = unital_structure(&i).unwrap();
        let x = random_element::<f64>(s(2, 2), 1.0, 1);
        let y = random_element::<f64>(s(2, 2), 1.0, 2);
        let xy = x.matmul(&y).unwrap();
        assert!((&u.odot(&x, &y).unwrap() - &xy).norm() < 1e-14);
        assert!((&u.star(&x).unwrap() - &x.adjoint()).norm() < 1e-15);
        let c = u.odot(&u.odot(&x, &u.star(&x).unwrap()).unwrap(), &x).unwrap();
        assert!((c.norm() - x.norm().powi(3)).abs() < 1e-12);
    }

    #[test]
    fn unital_structure_rejects_non_units() {
        let e = E::matrix_unit(s(2, 2), 0, 0).unwrap();
        assert!(matches!(unital_structure(&e), Err(Error::Precondition(_))));
        assert!(matches!(
            unital_structure(&E::zeros(s(2, 3))),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn random_element_is_deterministic_and_bounded() {
        let a = random_element::<f64>(s(3, 3), 1.0, 42);
        let b = random_element::<f64>(s(3, 3), 1.0, 42);
        assert_eq!(a, b);
        assert!(a.norm() <= 1.0 + 1e-12);
        let distinct: std::collections::HashSet<Vec<u64>> = (0..100)
            .map(|seed| {
                random_element::<f64>(s(2, 2), 1.0, seed)
                    .entries()
                    .iter()
                    .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                    .collect()
            })
            .collect();
        assert_eq!(distinct.len(), 100);
    }

    #[test]
    fn isometries_are_isometric() {
        let mut rng = rng_from_seed(3);
        for (r, c) in [(2, 2), (3, 2), (4, 1), (5, 3)] {
            let u = random_isometry::<f64>(&mut rng, r, c).unwrap();
            assert!(isometry_residual(&u) < 1e-13);
        }
        assert!(random_isometry::<f64>(&mut rng, 1, 2).is_err());
    }

    #[test]
    fn adjoint_is_involution() {
        let x = random_element::<f64>(s(2, 3), 1.0, 5);
        assert_eq!(x.adjoint().shape(), s(3, 2));
        assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn works_in_single_precision() {
        let x = random_element::<f32>(s(2, 2), 1.0, 11);
        let c = tprod(&x, &x, &x).unwrap();
        assert!((c.norm() - x.norm().powi(3)).abs() < 1e-5);
    }
}
