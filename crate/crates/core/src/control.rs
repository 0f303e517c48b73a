//! Control functions, their scaled series, and the closed-form bounds.
//!
//! A control `phi(x_1..x_d, u, v, w) >= 0` is summable when
//! `phi~ = sum_j q^-j phi(q^j x_1, .., q^j w)` converges. The stability
//! bound is `phi~(qx, rx, .., rx, 0, 0, 0) / (l C(d-1,l-1))`.
//!
//! Every control shipped here depends on its arguments only through their
//! norms. `||0||^0` is taken to be `0`, so `phi(0, .., 0) = 0` for the
//! p-norm control even when `p = 0`.

use std::collections::HashMap;
use std::sync::RwLock;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::ternary::RingElement;
use crate::trif::{substituted_tuple, TrifParams};

/// Default number of series terms.
pub const DEFAULT_MAX_TERMS: usize = 60;
/// Number of trailing term ratios used to certify a geometric tail.
pub const TAIL_WINDOW: usize = 8;
/// A tail is certified when the trailing ratio is at most `1 - margin`.
pub const RATIO_MARGIN: f64 = 0.05;
/// Default relative early-stop target for the tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-16;

/// Relative slack for float error in domination checks.
pub const DOMINATION_SLACK: f64 = 1e-9;

/// `defect <= control` up to floating-point slack proportional to the
/// magnitude of the cancelling terms.
pub fn dominates<T: Real>(defect: T, control: T, scale: T) -> bool {
    let slack = T::of(DOMINATION_SLACK);
    defect <= control * (T::one() + slack) + slack * scale
}

/// Descriptor of a control function `phi`.
///
/// Serializes as `{"kind":"constant","delta":13.0}`,
/// `{"kind":"pnorm","eps":1.0,"p":0.5}` or
/// `{"kind":"custom","name":"norm_power","params":[1.0,1.0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlFunction {
    /// `phi = delta`
    Constant { delta: f64 },
    /// `phi = eps (sum ||x_j||^p + ||u||^p + ||v||^p + ||w||^p)`, `0 <= p < 1`.
    Pnorm { eps: f64, p: f64 },
    /// A registered evaluator, looked up by name.
    Custom {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
}

/// Evaluator for a registered custom control. Receives the descriptor
/// parameters and the norms `[||x_1||, .., ||x_d||, ||u||, ||v||, ||w||]`.
pub type CustomEvaluator = fn(params: &[f64], norms: &[f64]) -> f64;

static REGISTRY: Lazy<RwLock<HashMap<String, CustomEvaluator>>> = Lazy::new(|| {
    let mut m: HashMap<String, CustomEvaluator> = HashMap::new();
    m.insert("norm_power".into(), norm_power);
    m.insert("max_norm_power".into(), max_norm_power);
    m.insert("affine".into(), affine);
    m.insert("exponential".into(), exponential);
    RwLock::new(m)
});

fn pow0(n: f64, p: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n.powf(p)
    }
}

fn param(params: &[f64], i: usize) -> f64 {
    params.get(i).copied().unwrap_or(f64::NAN)
}

/// `eps * sum ||a||^p` for any `p >= 0`; params `[eps, p]`.
fn norm_power(params: &[f64], norms: &[f64]) -> f64 {
    let (eps, p) = (param(params, 0), param(params, 1));
    eps * norms.iter().map(|&n| pow0(n, p)).sum::<f64>()
}

/// `eps * max ||a||^p`; params `[eps, p]`.
fn max_norm_power(params: &[f64], norms: &[f64]) -> f64 {
    let (eps, p) = (param(params, 0), param(params, 1));
    eps * norms.iter().map(|&n| pow0(n, p)).fold(0.0, f64::max)
}

/// `delta + eps * sum ||a||^p`; params `[delta, eps, p]`.
fn affine(params: &[f64], norms: &[f64]) -> f64 {
    param(params, 0) + norm_power(&params[1.min(params.len())..], norms)
}

/// `eps * sum (exp(rate ||a||) - 1)`; params `[eps, rate]`.
fn exponential(params: &[f64], norms: &[f64]) -> f64 {
    let (eps, rate) = (param(params, 0), param(params, 1));
    eps * norms.iter().map(|&n| (rate * n).exp_m1()).sum::<f64>()
}

/// Registers (or replaces) a named custom control evaluator.
pub fn register_custom_control(name: &str, evaluator: CustomEvaluator) {
    REGISTRY
        .write()
        .expect("control registry poisoned")
        .insert(name.to_string(), evaluator);
}

fn lookup(name: &str) -> Option<CustomEvaluator> {
    REGISTRY
        .read()
        .expect("control registry poisoned")
        .get(name)
        .copied()
}

/// Arguments `(x_1..x_d, u, v, w)` of a control function.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlArgs<T: Real> {
    pub xs: Vec<RingElement<T>>,
    pub u: RingElement<T>,
    pub v: RingElement<T>,
    pub w: RingElement<T>,
}

impl<T: Real> ControlArgs<T> {
    /// `(x_1..x_d, 0, 0, 0)`
    pub fn trif_only(xs: Vec<RingElement<T>>) -> Self {
        let shape = xs.first().map(|x| x.shape()).expect("at least one argument");
        let z = RingElement::zeros(shape);
        ControlArgs {
            xs,
            u: z.clone(),
            v: z.clone(),
            w: z,
        }
    }

    /// `[||x_1||, .., ||x_d||, ||u||, ||v||, ||w||]`
    pub fn norms(&self) -> Vec<T> {
        self.xs
            .iter()
            .chain([&self.u, &self.v, &self.w])
            .map(RingElement::norm)
            .collect()
    }
}

impl ControlFunction {
    pub fn constant(delta: f64) -> Self {
        ControlFunction::Constant { delta }
    }

    pub fn pnorm(eps: f64, p: f64) -> Self {
        ControlFunction::Pnorm { eps, p }
    }

    pub fn custom(name: &str, params: Vec<f64>) -> Self {
        ControlFunction::Custom {
            name: name.to_string(),
            params,
        }
    }

    /// Checks parameter ranges and that custom names are registered.
    pub fn validate(&self) -> Result<()> {
        match self {
            ControlFunction::Constant { delta } => {
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "constant control needs delta >= 0, got {delta}"
                    )));
                }
            }
            ControlFunction::Pnorm { eps, p } => {
                if !(eps.is_finite() && *eps >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "p-norm control needs eps >= 0, got {eps}"
                    )));
                }
                if !(p.is_finite() && *p >= 0.0 && *p < 1.0) {
                    return Err(Error::OutOfRange(format!(
                        "p-norm control needs p in [0, 1), got {p}"
                    )));
                }
            }
            ControlFunction::Custom { name, .. } => {
                if lookup(name).is_none() {
                    return Err(Error::InvalidInput(format!("unknown custom control '{name}'")));
                }
            }
        }
        Ok(())
    }

    /// Ratio of consecutive series terms, when it is known in closed form.
    pub fn geometric_ratio(&self, q: f64) -> Option<f64> {
        match self {
            ControlFunction::Constant { .. } => Some(q.recip()),
            ControlFunction::Pnorm { p, .. } => Some(q.powf(p - 1.0)),
            ControlFunction::Custom { .. } => None,
        }
    }

    /// `phi` evaluated from argument norms.
    pub fn eval_norms<T: Real>(&self, norms: &[T]) -> Result<T> {
        match self {
            ControlFunction::Constant { delta } => Ok(T::of(*delta)),
            ControlFunction::Pnorm { eps, p } => {
                let p = T::of(*p);
                let s: T = norms
                    .iter()
                    .map(|&n| if n.is_zero() { T::zero() } else { n.powf(p) })
                    .sum();
                Ok(T::of(*eps) * s)
            }
            ControlFunction::Custom { name, params } => {
                let eval = lookup(name)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown custom control '{name}'")))?;
                let wide: Vec<f64> = norms.iter().map(|n| n.as_f64()).collect();
                let v = eval(params, &wide);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::ControlContract(format!(
                        "custom control '{name}' returned {v}"
                    )));
                }
                Ok(T::of(v))
            }
        }
    }

    /// `phi(x_1..x_d, u, v, w)`.
    pub fn eval<T: Real>(&self, args: &ControlArgs<T>) -> Result<T> {
        self.eval_norms(&args.norms())
    }

    /// Descriptor name used in reports.
    pub fn label(&self) -> String {
        match self {
            ControlFunction::Constant { delta } => format!("constant({delta})"),
            ControlFunction::Pnorm { eps, p } => format!("pnorm(eps={eps}, p={p})"),
            ControlFunction::Custom { name, params } => format!("custom:{name}{params:?}"),
        }
    }
}

/// Result of summing a control series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    /// Partial sum of the terms used.
    pub truncated_value: f64,
    /// Closed form of the full series, when one exists.
    pub closed_form_value: Option<f64>,
    pub terms_used: usize,
    /// Certified bound on the omitted tail.
    pub tail_bound: f64,
    /// Ratio used to certify the tail.
    pub ratio: f64,
}

impl BoundCertificate {
    /// `truncated_value + tail_bound`, an upper estimate of the series.
    pub fn upper(&self) -> f64 {
        self.truncated_value + self.tail_bound
    }
}

/// Sums `sum_{j >= start} q^-j phi(q^j a)` where `a` has the given norms.
///
/// Stops early once the certified tail is below `tail_tol` times the partial
/// sum. For constant and p-norm controls the tail is exactly geometric; for
/// custom controls the largest of the last [`TAIL_WINDOW`] term ratios must
/// be at most `1 - RATIO_MARGIN`.
pub fn series_from_norms<T: Real>(
    cf: &ControlFunction,
    q: T,
    norms: &[T],
    start: usize,
    max_terms: usize,
    tail_tol: f64,
) -> Result<BoundCertificate> {
    cf.validate()?;
    if max_terms == 0 {
        return Err(Error::InvalidInput("max_terms must be >= 1".into()));
    }
    let known_ratio = cf.geometric_ratio(q.as_f64());
    let mut partial = T::zero();
    let mut terms: Vec<T> = Vec::with_capacity(max_terms);
    let mut tail = T::infinity();
    let mut ratio = T::infinity();
    for k in 0..max_terms {
        let j = start + k;
        let qj = q.powi(j as i32);
        let scaled: Vec<T> = norms.iter().map(|&n| n * qj).collect();
        let a = cf.eval_norms(&scaled)? / qj;
        if !a.is_finite() {
            return Err(Error::RangeExhausted {
                failed_at: j,
                max_usable_n: j.saturating_sub(1),
            });
        }
        partial = partial + a;
        terms.push(a);
        (ratio, tail) = match known_ratio {
            Some(rho) => {
                let rho = T::of(rho);
                (rho, a * rho / (T::one() - rho))
            }
            None => trailing_tail(&terms),
        };
        if tail.is_finite() && tail <= T::of(tail_tol) * partial {
            break;
        }
    }
    if !tail.is_finite() {
        return Err(Error::NotSummable(format!(
            "{}: term ratio {} not certifiably below {} after {} terms",
            cf.label(),
            ratio.as_f64(),
            1.0 - RATIO_MARGIN,
            terms.len()
        )));
    }
    let closed = match cf {
        ControlFunction::Constant { delta } if start == 0 => Some(*delta * q.as_f64() / (q.as_f64() - 1.0)),
        ControlFunction::Pnorm { eps, p } if start == 0 => {
            let s: f64 = norms.iter().map(|n| pow0(n.as_f64(), *p)).sum();
            Some(eps * s / (1.0 - q.as_f64().powf(p - 1.0)))
        }
        _ => None,
    };
    Ok(BoundCertificate {
        truncated_value: partial.as_f64(),
        closed_form_value: closed,
        terms_used: terms.len(),
        tail_bound: tail.as_f64(),
        ratio: ratio.as_f64(),
    })
}

/// Geometric tail estimate from the trailing ratios; infinite when not
/// certifiable yet.
fn trailing_tail<T: Real>(terms: &[T]) -> (T, T) {
    if terms.len() < TAIL_WINDOW + 1 {
        return (T::infinity(), T::infinity());
    }
    let window = &terms[terms.len() - TAIL_WINDOW - 1..];
    let rho = term_ratio(window);
    let last = *terms.last().expect("non-empty");
    if rho <= T::one() - T::of(RATIO_MARGIN) {
        let tail = if last.is_zero() {
            T::zero()
        } else {
            last * rho / (T::one() - rho)
        };
        (rho, tail)
    } else {
        (rho, T::infinity())
    }
}

/// Largest successive ratio in a run of terms (`0/0` counts as `0`).
fn term_ratio<T: Real>(terms: &[T]) -> T {
    terms.windows(2).fold(T::zero(), |acc, w| {
        let r = if w[1].is_zero() {
            T::zero()
        } else if w[0].is_zero() {
            T::infinity()
        } else {
            w[1] / w[0]
        };
        acc.max(r)
    })
}

/// `phi~(x_1..x_d, u, v, w)` with a certified tail.
pub fn phi_tilde<T: Real>(
    cf: &ControlFunction,
    p: &TrifParams,
    args: &ControlArgs<T>,
    max_terms: usize,
    tail_tol: f64,
) -> Result<BoundCertificate> {
    series_from_norms(cf, p.q_real::<T>(), &args.norms(), 0, max_terms, tail_tol)
}

/// Which form of the stability bound to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `phi~(qx, rx, .., rx, 0, 0, 0) / (l C(d-1,l-1))`
    WithPrefactor,
    /// `phi~(qx, rx, .., rx, 0, 0, 0)`, the form stated for the `{1, i}`
    /// scalar domain.
    WithoutPrefactor,
}

/// `(qx, rx, .., rx, 0, 0, 0)` as control arguments.
pub fn substituted_args<T: Real>(p: &TrifParams, x: &RingElement<T>) -> ControlArgs<T> {
    ControlArgs::trif_only(substituted_tuple(p, x))
}

/// `phi~(qx, rx, .., rx, 0, 0, 0)` with its certificate.
pub fn substituted_series<T: Real>(
    cf: &ControlFunction,
    p: &TrifParams,
    x: &RingElement<T>,
) -> Result<BoundCertificate> {
    phi_tilde(
        cf,
        p,
        &substituted_args(p, x),
        DEFAULT_MAX_TERMS,
        DEFAULT_TAIL_TOL,
    )
}

/// Upper bound on `||f(x) - T(x)||`:
/// `phi~(qx, rx, .., rx, 0, 0, 0) / (l C(d-1,l-1))`.
pub fn stability_bound<T: Real>(cf: &ControlFunction, p: &TrifParams, x: &RingElement<T>) -> Result<T> {
    stability_bound_variant(cf, p, x, BoundVariant::WithPrefactor)
}

pub fn stability_bound_variant<T: Real>(
    cf: &ControlFunction,
    p: &TrifParams,
    x: &RingElement<T>,
    variant: BoundVariant,
) -> Result<T> {
    let cert = substituted_series(cf, p, x)?;
    let v = T::of(cert.upper());
    Ok(match variant {
        BoundVariant::WithPrefactor => v * p.prefactor::<T>(),
        BoundVariant::WithoutPrefactor => v,
    })
}

/// Closed form `q^(1-p) (q^p + (d-1)|r|^p) eps ||x||^p / (l C(d-1,l-1) (q^(1-p) - 1))`.
pub fn power_control_bound<T: Real>(eps: f64, p: f64, params: &TrifParams, x: &RingElement<T>) -> Result<T> {
    power_control_bound_at_norm(eps, p, params, x.norm())
}

pub fn power_control_bound_at_norm<T: Real>(eps: f64, p: f64, params: &TrifParams, x_norm: T) -> Result<T> {
    if !(p.is_finite() && (0.0..1.0).contains(&p)) {
        return Err(Error::OutOfRange(format!(
            "p = {p} outside the admissible range p in [0, 1)"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidInput(format!("eps must be >= 0, got {eps}")));
    }
    if x_norm.is_zero() {
        return Ok(T::zero());
    }
    let pp = T::of(p);
    let q = params.q_real::<T>();
    let r_abs = params.r_real::<T>().abs();
    let dm1 = T::of((params.d() - 1) as f64);
    let q1p = q.powf(T::one() - pp);
    let num = q1p * (q.powf(pp) + dm1 * r_abs.powf(pp)) * T::of(eps);
    let den = T::of(params.bound_denominator() as f64) * (q1p - T::one());
    Ok(num / den * x_norm.powf(pp))
}

/// Outcome of [`summability_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummabilityProbe {
    pub passed: bool,
    /// Estimated lim sup of successive term ratios.
    pub ratio: f64,
}

/// Estimates the lim sup of `a_{j+1} / a_j` for `a_j = q^-j phi(q^j args)`
/// over the second half of `horizon` terms, maximised over sample points.
pub fn summability_probe<T: Real>(
    cf: &ControlFunction,
    p: &TrifParams,
    sample_points: &[ControlArgs<T>],
    horizon: usize,
) -> Result<SummabilityProbe> {
    if horizon < 8 {
        return Err(Error::InvalidInput(format!(
            "horizon must be >= 8, got {horizon}"
        )));
    }
    cf.validate()?;
    let q = p.q_real::<T>();
    let mut worst = T::zero();
    for args in sample_points {
        let norms = args.norms();
        let mut terms = Vec::with_capacity(horizon + 1);
        for j in 0..=horizon {
            let qj = q.powi(j as i32);
            let scaled: Vec<T> = norms.iter().map(|&n| n * qj).collect();
            let a = match cf.eval_norms(&scaled) {
                Ok(v) => v / qj,
                Err(Error::ControlContract(_)) => T::infinity(),
                Err(e) => return Err(e),
            };
            terms.push(a);
        }
        let tail = &terms[horizon / 2..];
        let r = if tail.iter().any(|a| !a.is_finite()) {
            T::infinity()
        } else {
            term_ratio(tail)
        };
        worst = worst.max(r);
    }
    let ratio = worst.as_f64();
    Ok(SummabilityProbe {
        passed: ratio <= 1.0 - RATIO_MARGIN,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ternary::{random_element, Shape};

    type E = RingElement<f64>;

    fn s22() -> Shape {
        Shape::new(2, 2).unwrap()
    }

    fn args_with(x1: E, d: usize) -> ControlArgs<f64> {
        let mut xs = vec![x1];
        xs.extend((1..d).map(|_| E::zeros(s22())));
        ControlArgs::trif_only(xs)
    }

    #[test]
    fn eval_examples() {
        let x = random_element::<f64>(s22(), 1.0, 1);
        let a = ControlArgs {
            xs: vec![x.clone(), x.clone(), x.clone()],
            u: x.clone(),
            v: x.clone(),
            w: x,
        };
        assert_eq!(ControlFunction::constant(13.0).eval(&a).unwrap(), 13.0);
        let zero = ControlArgs::trif_only(vec![E::zeros(s22()); 3]);
        assert_eq!(ControlFunction::pnorm(1.0, 0.5).eval(&zero).unwrap(), 0.0);
        assert_eq!(ControlFunction::pnorm(2.0, 0.0).eval(&a).unwrap(), 12.0);
        assert_eq!(ControlFunction::pnorm(2.0, 0.0).eval(&zero).unwrap(), 0.0);
    }

    #[test]
    fn custom_contract_is_enforced() {
        fn negative(_: &[f64], _: &[f64]) -> f64 {
            -1.0
        }
        register_custom_control("test_negative", negative);
        let cf = ControlFunction::custom("test_negative", vec![]);
        let a = args_with(E::zeros(s22()), 3);
        assert!(matches!(cf.eval(&a), Err(Error::ControlContract(_))));
        assert!(ControlFunction::custom("no_such_thing", vec![])
            .validate()
            .is_err());
    }

    #[test]
    fn constant_series_matches_closed_form() {
        let p = TrifParams::new(3, 2).unwrap();
        let a = args_with(E::zeros(s22()), 3);
        let c = phi_tilde(&ControlFunction::constant(13.0), &p, &a, 60, 1e-16).unwrap();
        assert!((c.upper() - 52.0 / 3.0).abs() < 1e-12);
        assert!((c.closed_form_value.unwrap() - 52.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pnorm_series_at_zero_is_zero() {
        let p = TrifParams::new(3, 2).unwrap();
        let a = args_with(E::zeros(s22()), 3);
        let c = phi_tilde(&ControlFunction::pnorm(1.0, 0.5), &p, &a, 60, 1e-16).unwrap();
        assert_eq!(c.upper(), 0.0);
    }

    #[test]
    fn pnorm_series_single_unit_argument() {
        let p = TrifParams::new(3, 2).unwrap();
        let e = E::matrix_unit(s22(), 0, 0).unwrap();
        let c = phi_tilde(&ControlFunction::pnorm(1.0, 0.5), &p, &args_with(e, 3), 60, 1e-16).unwrap();
        // direct summation of 4^-j (4^j)^0.5 = 2^-j
        let oracle: f64 = (0..30).map(|j| 0.5f64.powi(j)).sum::<f64>() + 0.5f64.powi(29);
        assert!((c.upper() - 2.0).abs() < 1e-12);
        assert!((oracle - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_example_bound() {
        let p = TrifParams::new(3, 2).unwrap();
        for seed in 0..5 {
            let x = random_element::<f64>(s22(), 3.0, seed);
            let b = stability_bound(&ControlFunction::constant(13.0), &p, &x).unwrap();
            assert!((b - 13.0 / 3.0).abs() < 1e-12);
        }
        let zero = E::zeros(s22());
        assert_eq!(
            stability_bound(&ControlFunction::pnorm(1.0, 0.5), &p, &zero).unwrap(),
            0.0
        );
    }

    #[test]
    fn pnorm_series_equals_power_control_closed_form() {
        let p = TrifParams::new(3, 2).unwrap();
        let x = E::matrix_unit(s22(), 1, 0).unwrap();
        let series = stability_bound(&ControlFunction::pnorm(1.0, 0.5), &p, &x).unwrap();
        let closed = power_control_bound(1.0, 0.5, &p, &x).unwrap();
        assert!((series - closed).abs() <= 1e-12 * closed);
        assert!((closed - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn power_control_closed_form_examples() {
        let p = TrifParams::new(3, 2).unwrap();
        let x = E::identity(2).unwrap();
        assert_eq!(power_control_bound(0.0, 0.5, &p, &x).unwrap(), 0.0);
        assert!((power_control_bound(1.0, 0.0, &p, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            power_control_bound(1.0, 1.0, &p, &x),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn probes() {
        let p = TrifParams::new(3, 2).unwrap();
        let pts: Vec<ControlArgs<f64>> = (0..3)
            .map(|k| args_with(random_element(s22(), 1.0, k), 3))
            .collect();
        let c = summability_probe(&ControlFunction::constant(1.0), &p, &pts, 16).unwrap();
        assert!(c.passed && (c.ratio - 0.25).abs() < 1e-12);
        let c = summability_probe(&ControlFunction::pnorm(1.0, 0.9), &p, &pts, 16).unwrap();
        assert!(c.passed && (c.ratio - 4f64.powf(-0.1)).abs() < 1e-12);
        let lin = ControlFunction::custom("norm_power", vec![1.0, 1.0]);
        let c = summability_probe(&lin, &p, &pts, 16).unwrap();
        assert!(!c.passed && (c.ratio - 1.0).abs() < 1e-12);
        assert!(summability_probe(&lin, &p, &pts, 4).is_err());
    }

    #[test]
    fn non_summable_custom_is_diagnosed() {
        let p = TrifParams::new(3, 2).unwrap();
        let a = args_with(E::identity(2).unwrap(), 3);
        let lin = ControlFunction::custom("norm_power", vec![1.0, 1.0]);
        assert!(matches!(
            phi_tilde(&lin, &p, &a, 60, 1e-16),
            Err(Error::NotSummable(_))
        ));
        let ok = ControlFunction::custom("norm_power", vec![1.0, 0.5]);
        let c = phi_tilde(&ok, &p, &a, 60, 1e-16).unwrap();
        let closed = phi_tilde(&ControlFunction::pnorm(1.0, 0.5), &p, &a, 60, 1e-16).unwrap();
        assert!((c.upper() - closed.upper()).abs() <= c.tail_bound + 1e-12);
    }

    #[test]
    fn descriptor_json() {
        let c: ControlFunction = serde_json::from_str(r#"{"kind":"constant","delta":13.0}"#).unwrap();
        assert_eq!(c, ControlFunction::constant(13.0));
        let c: ControlFunction = serde_json::from_str(r#"{"kind":"pnorm","eps":1.0,"p":0.5}"#).unwrap();
        assert_eq!(c, ControlFunction::pnorm(1.0, 0.5));
        assert_eq!(
            serde_json::to_string(&ControlFunction::constant(13.0)).unwrap(),
            r#"{"kind":"constant","delta":13.0}"#
        );
    }
}
