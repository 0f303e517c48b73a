//! Direct-method extraction: `T_n(x) = q^-n f(q^n x)` and its limit.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{series_from_norms, substituted_args, ControlFunction, DEFAULT_MAX_TERMS};
use crate::error::{Error, Result};
use crate::map::TernaryMap;
use crate::scalar::{unit_floor, Real};
use crate::ternary::{RingElement, Shape};
use crate::trif::{TrifParams, TrifParamsSummary};

pub const DEFAULT_N_MAX: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Consecutive small gaps required to declare convergence.
pub const CONVERGENCE_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSettings {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for IterationSettings {
    fn default() -> Self {
        IterationSettings {
            n_max: DEFAULT_N_MAX,
            tol: DEFAULT_TOL,
        }
    }
}

/// The sequence `T_0(x), T_1(x), ..` with gaps `||T_n - T_{n-1}||`.
#[derive(Debug, Clone)]
pub struct IterationTrace<T: Real> {
    pub x: RingElement<T>,
    /// `values[n] = T_n(x)`.
    pub values: Vec<RingElement<T>>,
    /// `gaps[n - 1] = ||T_n(x) - T_{n-1}(x)||`.
    pub gaps: Vec<T>,
    /// `cauchy_gap_bound(n - 1, n)` for each gap, when a control was supplied.
    pub certified_gap_bounds: Option<Vec<T>>,
    pub converged: bool,
    /// First `n` of the run of small gaps.
    pub converged_at: Option<usize>,
    pub final_value: RingElement<T>,
}

impl<T: Real> IterationTrace<T> {
    /// Index of the last computed iterate.
    pub fn last_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn last_gap(&self) -> Option<T> {
        self.gaps.last().copied()
    }
}

fn overflow(n: usize) -> Error {
    Error::RangeExhausted {
        failed_at: n,
        max_usable_n: n.saturating_sub(1),
    }
}

/// Computes `T_n(x)` for `n = 0..=n_max`, stopping after
/// [`CONVERGENCE_RUN`] consecutive gaps below `tol * max(1, ||T_n(x)||)`.
///
/// Fails with [`Error::RangeExhausted`] when `q^n x` or `f(q^n x)` stops
/// being finite before convergence.
pub fn iterate<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    x: &RingElement<T>,
    p: &TrifParams,
    settings: &IterationSettings,
    control: Option<&ControlFunction>,
) -> Result<IterationTrace<T>> {
    f.domain().expect(x.shape())?;
    let q = p.q_real::<T>();
    let tol = T::of(settings.tol);
    let norms = control.map(|_| substituted_args(p, x).norms());
    let mut values: Vec<RingElement<T>> = Vec::with_capacity(settings.n_max + 1);
    let mut gaps = Vec::new();
    let mut bounds = control.map(|_| Vec::new());
    let mut run = 0;
    let mut converged_at = None;
    for n in 0..=settings.n_max {
        let qn = q.powi(n as i32);
        let arg = x.scale_real(qn);
        if !arg.is_finite() {
            return Err(overflow(n));
        }
        let fx = f.apply(&arg);
        let tn = fx.map(|z| z / qn);
        if !tn.is_finite() || !fx.is_finite() {
            return Err(overflow(n));
        }
        if let Some(prev) = values.last() {
            let gap = (&tn - prev).norm();
            gaps.push(gap);
            if let (Some(cf), Some(b), Some(norms)) = (control, bounds.as_mut(), norms.as_ref()) {
                b.push(gap_bound_from_norms(
                    p,
                    cf,
                    norms,
                    n - 1,
                    Some(n),
                    DEFAULT_MAX_TERMS,
                )?);
            }
            if gap < tol * unit_floor(tn.norm()) {
                run += 1;
            } else {
                run = 0;
            }
        }
        values.push(tn);
        if run == CONVERGENCE_RUN {
            converged_at = Some(n + 1 - CONVERGENCE_RUN);
            break;
        }
    }
    let final_value = values.last().cloned().expect("n = 0 is always computed");
    Ok(IterationTrace {
        x: x.clone(),
        values,
        gaps,
        certified_gap_bounds: bounds,
        converged: converged_at.is_some(),
        converged_at,
        final_value,
    })
}

fn gap_bound_from_norms<T: Real>(
    p: &TrifParams,
    cf: &ControlFunction,
    norms: &[T],
    m: usize,
    n: Option<usize>,
    max_terms: usize,
) -> Result<T> {
    let q = p.q_real::<T>();
    let sum = match n {
        Some(n) => {
            if n < m {
                return Err(Error::InvalidInput(format!("need m <= n, got m = {m}, n = {n}")));
            }
            let mut s = T::zero();
            for j in m..n {
                let qj = q.powi(j as i32);
                let scaled: Vec<T> = norms.iter().map(|&v| v * qj).collect();
                s = s + cf.eval_norms(&scaled)? / qj;
            }
            if !s.is_finite() {
                return Err(overflow(n));
            }
            s
        }
        None => T::of(series_from_norms(cf, q, norms, m, max_terms, 0.0)?.upper()),
    };
    Ok(sum * p.prefactor::<T>())
}

/// Bound on `||T_n(x) - T_m(x)||`:
/// `sum_{j=m}^{n-1} q^-j phi(q^j qx, q^j rx, .., 0, 0, 0) / (l C(d-1,l-1))`;
/// with `n = None` the full tail from `m`, which bounds `||T(x) - T_m(x)||`.
pub fn cauchy_gap_bound<T: Real>(
    p: &TrifParams,
    cf: &ControlFunction,
    x: &RingElement<T>,
    m: usize,
    n: Option<usize>,
    max_terms: usize,
) -> Result<T> {
    cf.validate()?;
    gap_bound_from_norms(p, cf, &substituted_args(p, x).norms(), m, n, max_terms)
}

/// Where an extracted map came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: TrifParamsSummary,
    pub n_max: usize,
    pub tol: f64,
    /// Largest iterate index needed over the basis.
    pub n_used: usize,
    pub scenario: Option<String>,
}

/// A linear map stored as its matrix on the matrix-unit basis.
///
/// Column `k` holds `T(e_k)` in row-major order, where `e_k` is the `k`-th
/// matrix unit of the domain in row-major order.
#[derive(Debug, Clone)]
pub struct ExtractedMap<T: Real> {
    domain: Shape,
    codomain: Shape,
    /// Row-major `codomain.len() x domain.len()`.
    matrix: Vec<Complex<T>>,
    pub traces: Vec<IterationTrace<T>>,
    pub provenance: Option<Provenance>,
}

impl<T: Real> ExtractedMap<T> {
    /// The matrix of `f` on the basis, assuming `f` is complex-linear.
    pub fn from_linear<F: TernaryMap<T> + ?Sized>(f: &F) -> Self {
        let domain = f.domain();
        let images: Vec<RingElement<T>> = basis(domain).iter().map(|e| f.apply(e)).collect();
        Self::from_images(domain, f.codomain(), &images)
    }

    fn from_images(domain: Shape, codomain: Shape, images: &[RingElement<T>]) -> Self {
        let (rows, cols) = (codomain.len(), domain.len());
        let mut matrix = vec![Complex::new(T::zero(), T::zero()); rows * cols];
        for (k, img) in images.iter().enumerate() {
            for (i, z) in img.entries().iter().enumerate() {
                matrix[i * cols + k] = *z;
            }
        }
        ExtractedMap {
            domain,
            codomain,
            matrix,
            traces: Vec::new(),
            provenance: None,
        }
    }

    pub fn matrix(&self) -> &[Complex<T>] {
        &self.matrix
    }

    /// Largest entrywise modulus difference between two representations.
    pub fn max_entry_distance(&self, other: &Self) -> Result<T> {
        self.domain.expect(other.domain)?;
        self.codomain.expect(other.codomain)?;
        Ok(self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    pub fn to_json(&self) -> ExtractedMapJson {
        ExtractedMapJson {
            domain: self.domain,
            codomain: self.codomain,
            matrix: self
                .matrix
                .iter()
                .map(|z| [z.re.as_f64(), z.im.as_f64()])
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_json(j: &ExtractedMapJson) -> Result<Self> {
        let n = j.domain.len() * j.codomain.len();
        if j.matrix.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} matrix entries, got {}",
                j.matrix.len()
            )));
        }
        let matrix = j
            .matrix
            .iter()
            .map(|[re, im]| Complex::new(T::of(*re), T::of(*im)))
            .collect();
        Ok(ExtractedMap {
            domain: j.domain,
            codomain: j.codomain,
            matrix,
            traces: Vec::new(),
            provenance: j.provenance.clone(),
        })
    }
}

impl<T: Real> TernaryMap<T> for ExtractedMap<T> {
    fn domain(&self) -> Shape {
        self.domain
    }
    fn codomain(&self) -> Shape {
        self.codomain
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        let cols = self.domain.len();
        let entries = (0..self.codomain.len())
            .map(|i| {
                let row = &self.matrix[i * cols..(i + 1) * cols];
                row.iter()
                    .zip(x.entries())
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect();
        RingElement::from_vec_unchecked(self.codomain, entries)
    }
}

/// Serialisable form of [`ExtractedMap`]; entries are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedMapJson {
    pub domain: Shape,
    pub codomain: Shape,
    pub matrix: Vec<[f64; 2]>,
    pub provenance: Option<Provenance>,
}

/// Matrix units of `shape` in row-major order.
pub fn basis<T: Real>(shape: Shape) -> Vec<RingElement<T>> {
    (0..shape.rows)
        .flat_map(|i| (0..shape.cols).map(move |j| (i, j)))
        .map(|(i, j)| RingElement::matrix_unit(shape, i, j).expect("index in range"))
        .collect()
}

/// Runs [`iterate`] on every basis element and assembles the limit map.
///
/// Fails with [`Error::ExtractionFailed`] naming the basis element with the
/// largest final gap when any trace does not converge.
pub fn extract_map<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    settings: &IterationSettings,
    control: Option<&ControlFunction>,
) -> Result<ExtractedMap<T>> {
    let domain = f.domain();
    let traces = basis::<T>(domain)
        .par_iter()
        .map(|e| iterate(f, e, p, settings, control))
        .collect::<Result<Vec<_>>>()?;
    let worst = traces
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.converged)
        .max_by(|a, b| {
            let ga = a.1.last_gap().map_or(f64::INFINITY, |g| g.as_f64());
            let gb = b.1.last_gap().map_or(f64::INFINITY, |g| g.as_f64());
            ga.total_cmp(&gb)
        });
    if let Some((k, t)) = worst {
        return Err(Error::ExtractionFailed {
            basis_index: k,
            n_reached: t.last_n(),
            last_gap: t.last_gap().map_or(f64::NAN, |g| g.as_f64()),
        });
    }
    let images: Vec<RingElement<T>> = traces.iter().map(|t| t.final_value.clone()).collect();
    let mut out = ExtractedMap::from_images(domain, f.codomain(), &images);
    out.provenance = Some(Provenance {
        params: p.summary(),
        n_max: settings.n_max,
        tol: settings.tol,
        n_used: traces.iter().map(IterationTrace::last_n).max().unwrap_or(0),
        scenario: None,
    });
    out.traces = traces;
    Ok(out)
}
