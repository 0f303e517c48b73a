//! The Trif functional equation and the defect operators built on it.
//!
//! For integers `2 <= l <= d - 1` the Trif equation reads
//!
//! ```text
//! d C(d-2,l-2) f((x_1+..+x_d)/d) + C(d-2,l-1) sum_j f(x_j)
//!     = l sum_{j_1<..<j_l} f((x_{j_1}+..+x_{j_l})/l)
//! ```
//!
//! and its solutions are exactly the maps `additive + constant`. The
//! scaling constants are `q = l(d-1)/(d-l) > 1` and `r = -l/(d-l)`.

use num_complex::Complex;
use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{dominates, ControlArgs, ControlFunction};
use crate::error::{Error, Result};
use crate::map::TernaryMap;
use crate::sampling::{derive_seed, rng_from_seed, ScalarDomain};
use crate::scalar::Real;
use crate::subsets::l_subsets;
use crate::ternary::{random_element_from, RingElement};

/// Largest `d` accepted by [`TrifParams::new`].
pub const DEFAULT_MAX_D: usize = 12;

/// Absolute `||f(0)||` below which a map counts as vanishing at zero.
pub const ZERO_AT_ORIGIN_TOL: f64 = 1e-9;

/// The pair `(d, l)` with its exact derived constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrifParams {
    d: usize,
    l: usize,
    q: Ratio<i64>,
    r: Ratio<i64>,
    c_dm2_lm2: u64,
    c_dm2_lm1: u64,
    c_dm1_lm1: u64,
    c_d_l: u64,
    c_dm1_l: u64,
    subsets: Vec<Vec<usize>>,
}

/// Serializable view of [`TrifParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrifParamsSummary {
    pub d: usize,
    pub l: usize,
    /// `[numerator, denominator]`
    pub q: [i64; 2],
    pub r: [i64; 2],
    pub c_dm2_lm2: u64,
    pub c_dm2_lm1: u64,
    pub c_dm1_lm1: u64,
    pub c_d_l: u64,
}

impl TrifParams {
    pub fn new(d: usize, l: usize) -> Result<Self> {
        Self::with_max_d(d, l, DEFAULT_MAX_D)
    }

    /// Like [`TrifParams::new`] with a custom cap on `d`.
    pub fn with_max_d(d: usize, l: usize, max_d: usize) -> Result<Self> {
        if l < 2 || d < 3 || l > d - 1 {
            return Err(Error::InvalidInput(format!(
                "need 2 <= l <= d - 1, got d = {d}, l = {l}"
            )));
        }
        if d > max_d {
            return Err(Error::InvalidInput(format!(
                "d = {d} exceeds the enumeration cap {max_d}"
            )));
        }
        let (di, li) = (d as i64, l as i64);
        let b = |n: usize, k: usize| binomial(n as u64, k as u64);
        let params = TrifParams {
            d,
            l,
            q: Ratio::new(li * (di - 1), di - li),
            r: Ratio::new(-li, di - li),
            c_dm2_lm2: b(d - 2, l - 2),
            c_dm2_lm1: b(d - 2, l - 1),
            c_dm1_lm1: b(d - 1, l - 1),
            c_d_l: b(d, l),
            c_dm1_l: b(d - 1, l),
            subsets: l_subsets(d, l),
        };
        params.check_identities().map_err(Error::InvalidInput)?;
        Ok(params)
    }

    /// Verifies the structural identities in exact arithmetic.
    pub fn check_identities(&self) -> std::result::Result<(), String> {
        let one = Ratio::from_integer(1);
        let d = Ratio::from_integer(self.d as i64);
        let l = Ratio::from_integer(self.l as i64);
        let (d_u, l_u) = (self.d as u64, self.l as u64);
        if self.q <= one {
            return Err(format!("q = {} is not > 1", self.q));
        }
        if self.r >= Ratio::zero() {
            return Err(format!("r = {} is not < 0", self.r));
        }
        if self.q + (d - one) * self.r != Ratio::zero() {
            return Err("q + (d-1) r != 0".into());
        }
        if self.q + (l - one) * self.r != l {
            return Err("q + (l-1) r != l".into());
        }
        if d_u * self.c_dm2_lm2 + d_u * self.c_dm2_lm1 != l_u * self.c_d_l {
            return Err("d C(d-2,l-2) + d C(d-2,l-1) != l C(d,l)".into());
        }
        if (d_u - 1) * self.c_dm2_lm1 != l_u * self.c_dm1_l {
            return Err("(d-1) C(d-2,l-1) != l C(d-1,l)".into());
        }
        if self.c_dm2_lm2 + self.c_dm2_lm1 != self.c_dm1_lm1 {
            return Err("C(d-2,l-2) + C(d-2,l-1) != C(d-1,l-1)".into());
        }
        if self.q * Ratio::from_integer(self.c_dm2_lm1 as i64)
            != l * Ratio::from_integer(self.c_dm1_lm1 as i64)
        {
            return Err("q C(d-2,l-1) != l C(d-1,l-1)".into());
        }
        if self.subsets.len() as u64 != self.c_d_l {
            return Err("subset count != C(d,l)".into());
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn q(&self) -> Ratio<i64> {
        self.q
    }

    pub fn r(&self) -> Ratio<i64> {
        self.r
    }

    /// `C(d-2, l-2)`
    pub fn c_dm2_lm2(&self) -> u64 {
        self.c_dm2_lm2
    }

    /// `C(d-2, l-1)`
    pub fn c_dm2_lm1(&self) -> u64 {
        self.c_dm2_lm1
    }

    /// `C(d-1, l-1)`
    pub fn c_dm1_lm1(&self) -> u64 {
        self.c_dm1_lm1
    }

    /// `C(d, l)`
    pub fn c_d_l(&self) -> u64 {
        self.c_d_l
    }

    /// `C(d-1, l)`
    pub fn c_dm1_l(&self) -> u64 {
        self.c_dm1_l
    }

    /// The lexicographically ordered `l`-subsets of `0..d`.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn q_real<T: Real>(&self) -> T {
        ratio_to_real(self.q)
    }

    pub fn r_real<T: Real>(&self) -> T {
        ratio_to_real(self.r)
    }

    /// `d C(d-2, l-2)`, the weight of the leading term.
    pub fn leading_weight(&self) -> u64 {
        self.d as u64 * self.c_dm2_lm2
    }

    /// `l C(d-1, l-1)`, the denominator of the stability bound.
    pub fn bound_denominator(&self) -> u64 {
        self.l as u64 * self.c_dm1_lm1
    }

    /// `1 / (l C(d-1, l-1))`.
    pub fn prefactor<T: Real>(&self) -> T {
        T::of(self.bound_denominator() as f64).recip()
    }

    /// Triangle-inequality budget of the defect for a map bounded by 1:
    /// `d C(d-2,l-2) + d C(d-2,l-1) + l C(d,l) + 1`.
    pub fn truncation_delta(&self) -> u64 {
        let (d, l) = (self.d as u64, self.l as u64);
        d * self.c_dm2_lm2 + d * self.c_dm2_lm1 + l * self.c_d_l + 1
    }

    pub fn summary(&self) -> TrifParamsSummary {
        TrifParamsSummary {
            d: self.d,
            l: self.l,
            q: [*self.q.numer(), *self.q.denom()],
            r: [*self.r.numer(), *self.r.denom()],
            c_dm2_lm2: self.c_dm2_lm2,
            c_dm2_lm1: self.c_dm2_lm1,
            c_dm1_lm1: self.c_dm1_lm1,
            c_d_l: self.c_d_l,
        }
    }
}

fn ratio_to_real<T: Real>(r: Ratio<i64>) -> T {
    T::of(r.numer().to_f64().unwrap_or(f64::NAN)) / T::of(r.denom().to_f64().unwrap_or(f64::NAN))
}

/// A defect norm together with the magnitude of the terms it cancels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect<T> {
    pub value: T,
    /// Sum of the norms of the individual terms.
    pub scale: T,
}

fn check_inputs<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    xs: &[RingElement<T>],
) -> Result<()> {
    if xs.len() != p.d() {
        return Err(Error::InvalidInput(format!(
            "expected {} arguments, got {}",
            p.d(),
            xs.len()
        )));
    }
    for x in xs {
        f.domain().expect(x.shape())?;
    }
    Ok(())
}

/// Residual of the Trif part with an extra summand in the leading argument;
/// returns `(residual, sum of term norms)`.
fn trif_residual<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    xs: &[RingElement<T>],
    mu: Complex<T>,
    leading_shift: Option<&RingElement<T>>,
) -> (RingElement<T>, T) {
    let d = T::of(p.d() as f64);
    let l = T::of(p.l() as f64);
    let mut sum = RingElement::zeros(f.domain());
    for x in xs {
        sum = &sum + &x.scale(mu);
    }
    let mut lead_arg = sum.scale_real(d.recip());
    if let Some(shift) = leading_shift {
        lead_arg = &lead_arg + shift;
    }
    let lead = f.apply(&lead_arg).scale_real(T::of(p.leading_weight() as f64));

    let mut singles = RingElement::zeros(f.codomain());
    for x in xs {
        singles = &singles + &f.apply(x);
    }
    let singles = singles.scale(mu * T::of(p.c_dm2_lm1() as f64));

    let mut subs = RingElement::zeros(f.codomain());
    for s in p.subsets() {
        let mut part = RingElement::zeros(f.domain());
        for &j in s {
            part = &part + &xs[j];
        }
        subs = &subs + &f.apply(&part.scale_real(l.recip()));
    }
    let subs = subs.scale(mu * l);

    let scale = lead.norm() + singles.norm() + subs.norm();
    (&(&lead + &singles) - &subs, scale)
}

/// Norm of the pure Trif defect
/// `d C(d-2,l-2) f(mu (x_1+..+x_d)/d) + C(d-2,l-1) sum mu f(x_j) - l sum mu f(subset mean)`.
pub fn trif_defect<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    xs: &[RingElement<T>],
    mu: Complex<T>,
) -> Result<T> {
    Ok(trif_defect_scaled(f, p, xs, mu)?.value)
}

/// [`trif_defect`] with the scale of the cancelling terms.
pub fn trif_defect_scaled<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    xs: &[RingElement<T>],
    mu: Complex<T>,
) -> Result<Defect<T>> {
    check_inputs(f, p, xs)?;
    let (res, scale) = trif_residual(f, p, xs, mu, None);
    Ok(Defect {
        value: res.norm(),
        scale,
    })
}

/// The full operator `D_mu f(x_1..x_d, u, v, w)`: the leading argument is
/// shifted by `[uvw] / (d C(d-2,l-2))` and `[f(u) f(v) f(w)]` is subtracted.
pub fn d_mu_defect<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    mu: Complex<T>,
    xs: &[RingElement<T>],
    u: &RingElement<T>,
    v: &RingElement<T>,
    w: &RingElement<T>,
) -> Result<T> {
    Ok(d_mu_defect_scaled(f, p, mu, xs, u, v, w)?.value)
}

pub fn d_mu_defect_scaled<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    mu: Complex<T>,
    xs: &[RingElement<T>],
    u: &RingElement<T>,
    v: &RingElement<T>,
    w: &RingElement<T>,
) -> Result<Defect<T>> {
    check_inputs(f, p, xs)?;
    for e in [u, v, w] {
        f.domain().expect(e.shape())?;
    }
    let shift = u
        .tprod_unchecked(v, w)
        .scale_real(T::of(p.leading_weight() as f64).recip());
    let (res, scale) = trif_residual(f, p, xs, mu, Some(&shift));
    let tern = f.apply(u).tprod_unchecked(&f.apply(v), &f.apply(w));
    let tn = tern.norm();
    Ok(Defect {
        value: (&res - &tern).norm(),
        scale: scale + tn,
    })
}

/// `||C(d-2,l-1) f(qx) - l C(d-1,l-1) f(x)||`, the Trif defect at the
/// substituted tuple `(qx, rx, .., rx)` for maps vanishing at zero.
pub fn collapse_defect<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    x: &RingElement<T>,
) -> Result<T> {
    f.domain().expect(x.shape())?;
    let f0 = f.apply(&RingElement::zeros(f.domain())).norm();
    if f0 > T::of(ZERO_AT_ORIGIN_TOL) {
        return Err(Error::Precondition(format!(
            "collapse requires f(0) = 0, found ||f(0)|| = {f0}"
        )));
    }
    let fqx = f
        .apply(&x.scale_real(p.q_real()))
        .scale_real(T::of(p.c_dm2_lm1() as f64));
    let fx = f.apply(x).scale_real(T::of(p.bound_denominator() as f64));
    Ok((&fqx - &fx).norm())
}

/// The tuple `(qx, rx, .., rx)` with `d` entries.
pub fn substituted_tuple<T: Real>(p: &TrifParams, x: &RingElement<T>) -> Vec<RingElement<T>> {
    let mut xs = Vec::with_capacity(p.d());
    xs.push(x.scale_real(p.q_real()));
    let rx = x.scale_real(p.r_real());
    xs.extend(std::iter::repeat_n(rx, p.d() - 1));
    xs
}

/// One Monte-Carlo evaluation of `D_mu f` against a control.
#[derive(Debug, Clone)]
pub struct DefectSample<T: Real> {
    pub index: usize,
    pub mu: Complex<T>,
    pub args: ControlArgs<T>,
    pub defect: T,
    pub scale: T,
    pub control_value: T,
    pub dominated: bool,
}

/// Which defect a batch evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectScope {
    /// `D_mu f` including the ternary term.
    Full,
    /// Only the Trif part (`u = v = w` are ignored).
    TrifOnly,
}

/// Settings for [`sample_defects`].
#[derive(Debug, Clone, Copy)]
pub struct DefectBatch {
    pub samples: usize,
    pub seed: u64,
    /// Inputs are drawn from the ball of this radius.
    pub radius: f64,
    pub domain: ScalarDomain,
    pub scope: DefectScope,
}

/// Evaluates the defect on `samples` random inputs and compares it with the
/// control. Results are ordered by sample index regardless of scheduling.
pub fn sample_defects<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    control: &ControlFunction,
    batch: &DefectBatch,
) -> Result<Vec<DefectSample<T>>> {
    control.validate()?;
    let shape = f.domain();
    let radius = T::of(batch.radius);
    (0..batch.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng_from_seed(derive_seed(batch.seed, index as u64));
            let mu = batch.domain.draw::<T>(&mut rng, index);
            let xs: Vec<_> = (0..p.d())
                .map(|_| random_element_from(&mut rng, shape, radius))
                .collect();
            let (u, v, w) = match batch.scope {
                DefectScope::Full => (
                    random_element_from(&mut rng, shape, radius),
                    random_element_from(&mut rng, shape, radius),
                    random_element_from(&mut rng, shape, radius),
                ),
                DefectScope::TrifOnly => (
                    RingElement::zeros(shape),
                    RingElement::zeros(shape),
                    RingElement::zeros(shape),
                ),
            };
            let d = match batch.scope {
                DefectScope::Full => d_mu_defect_scaled(f, p, mu, &xs, &u, &v, &w)?,
                DefectScope::TrifOnly => trif_defect_scaled(f, p, &xs, mu)?,
            };
            let args = ControlArgs { xs, u, v, w };
            let control_value = control.eval(&args)?;
            Ok(DefectSample {
                index,
                mu,
                args,
                defect: d.value,
                scale: d.scale,
                control_value,
                dominated: dominates(d.value, control_value, d.scale),
            })
        })
        .collect()
}
