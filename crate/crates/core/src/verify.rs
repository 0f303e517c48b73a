//! Sampled checks that an extracted map is a ternary homomorphism close to
//! the original map, plus the exactness and factorisation tests.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::control::{
    stability_bound_variant, BoundVariant, ControlArgs, ControlFunction, DEFAULT_MAX_TERMS, DOMINATION_SLACK,
    RATIO_MARGIN,
};
use crate::error::{Error, Result};
use crate::hyers::{cauchy_gap_bound, extract_map, iterate, IterationSettings};
use crate::map::TernaryMap;
use crate::sampling::{derive_seed, rng_from_seed, ScalarDomain, SeededRng};
use crate::scalar::{unit_floor, Real};
use crate::ternary::{random_element_from, RingElement, Shape};
use crate::trif::{trif_defect_scaled, TrifParams};

/// Absolute slack added to bound comparisons.
pub const BOUND_ABS_SLACK: f64 = 1e-12;

/// One named check with its worst residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Informational checks do not affect the verdict.
    pub mandatory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, max_residual: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            max_residual,
            threshold,
            passed: max_residual <= threshold,
            mandatory: true,
            note: None,
        }
    }

    fn informational(mut self, note: &str) -> Self {
        self.mandatory = false;
        self.note = Some(note.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationVerdict {
    pub checks: Vec<Check>,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
}

impl VerificationVerdict {
    fn from_checks(checks: Vec<Check>, samples: usize, seed: u64) -> Self {
        let passed = checks.iter().filter(|c| c.mandatory).all(|c| c.passed);
        VerificationVerdict {
            checks,
            samples,
            seed,
            passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Settings shared by the sampled checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Relative tolerance for algebraic identities.
    pub tol: f64,
    /// Inputs are drawn from the ball of this radius.
    pub radius: f64,
    /// Number of points used for the uniqueness probe.
    pub uniqueness_points: usize,
    pub iteration: IterationSettings,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 500,
            seed: 0,
            tol: 1e-9,
            radius: 2.0,
            uniqueness_points: 4,
            iteration: IterationSettings::default(),
        }
    }
}

fn sample<T: Real>(rng: &mut SeededRng, shape: Shape, radius: f64) -> RingElement<T> {
    random_element_from(rng, shape, T::of(radius))
}

fn rel<T: Real>(residual: T, scale: T) -> f64 {
    (residual / unit_floor(scale)).as_f64()
}

/// Worst relative residual of `T(x + y) = T(x) + T(y)`.
pub fn additivity_residual<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    samples: usize,
    seed: u64,
    radius: f64,
) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample::<T>(&mut rng, t.domain(), radius);
        let y = sample::<T>(&mut rng, t.domain(), radius);
        let lhs = t.apply(&(&x + &y));
        let rhs = &t.apply(&x) + &t.apply(&y);
        worst = worst.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
    }
    worst
}

/// Worst relative residual of `T(mu x) = mu T(x)` for `mu` from `domain`.
pub fn homogeneity_residual<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    domain: ScalarDomain,
    samples: usize,
    seed: u64,
    radius: f64,
) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for k in 0..samples {
        let mu = domain.draw::<T>(&mut rng, k);
        let x = sample::<T>(&mut rng, t.domain(), radius);
        let lhs = t.apply(&x.scale(mu));
        let rhs = t.apply(&x).scale(mu);
        worst = worst.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
    }
    worst
}

/// Worst relative residual of `T([uvw]) = [T(u) T(v) T(w)]`.
pub fn multiplicativity_residual<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    samples: usize,
    seed: u64,
    radius: f64,
) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = sample::<T>(&mut rng, t.domain(), radius);
        let v = sample::<T>(&mut rng, t.domain(), radius);
        let w = sample::<T>(&mut rng, t.domain(), radius);
        let lhs = t.apply(&u.tprod_unchecked(&v, &w));
        let rhs = t.apply(&u).tprod_unchecked(&t.apply(&v), &t.apply(&w));
        worst = worst.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
    }
    worst
}

/// Worst relative Trif defect of `t` at `mu = 1`.
pub fn trif_residual<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    p: &TrifParams,
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let one = Complex::new(T::one(), T::zero());
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let xs: Vec<_> = (0..p.d())
            .map(|_| sample::<T>(&mut rng, t.domain(), radius))
            .collect();
        let d = trif_defect_scaled(t, p, &xs, one)?;
        worst = worst.max(rel(d.value, d.scale));
    }
    Ok(worst)
}

/// Residuals of `T(i x) = i T(x)` and of `T(lambda x) = lambda T(x)` for
/// random complex `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IHomogeneity {
    pub i_residual: f64,
    pub complex_residual: f64,
    pub passed: bool,
}

pub fn verify_i_homogeneity<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    samples: usize,
    seed: u64,
    tol: f64,
) -> IHomogeneity {
    let mut rng = rng_from_seed(seed);
    let i = Complex::new(T::zero(), T::one());
    let mut worst_i = 0.0f64;
    for _ in 0..samples {
        let x = sample::<T>(&mut rng, t.domain(), 2.0);
        let lhs = t.apply(&x.scale(i));
        let rhs = t.apply(&x).scale(i);
        worst_i = worst_i.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
    }
    let complex_residual =
        homogeneity_residual(t, ScalarDomain::AllComplex, samples, derive_seed(seed, 1), 2.0);
    IHomogeneity {
        i_residual: worst_i,
        complex_residual,
        passed: worst_i <= tol && complex_residual <= tol,
    }
}

/// Unit scalars `mu_1, mu_2` with `mu_1 + mu_2 = 2 lambda / M`, for
/// `lambda != 0` and `M > |lambda|`.
pub fn unimodular_decompose(lambda: Complex<f64>, m: f64) -> Result<(Complex<f64>, Complex<f64>)> {
    let a = lambda.norm();
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Precondition(format!(
            "lambda must be nonzero and finite, got {lambda}"
        )));
    }
    if !(m.is_finite() && m > a) {
        return Err(Error::Precondition(format!(
            "decomposition needs M > |lambda|, got M = {m}, |lambda| = {a}"
        )));
    }
    let z = lambda * (2.0 / m);
    let u = z / z.norm();
    let c = z.norm() / 2.0;
    let s = (1.0 - c * c).sqrt();
    Ok((u * Complex::new(c, s), u * Complex::new(c, -s)))
}

/// Agreement of limits computed from shifted starting indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub offsets: Vec<usize>,
    pub max_deviation: f64,
    /// Largest allowed deviation: certified tails plus rounding slack.
    pub allowed: f64,
    pub passed: bool,
}

struct Shifted<'a, T: Real, F: ?Sized> {
    f: &'a F,
    factor: T,
}

impl<T: Real, F: TernaryMap<T> + ?Sized> TernaryMap<T> for Shifted<'_, T, F> {
    fn domain(&self) -> Shape {
        self.f.domain()
    }
    fn codomain(&self) -> Shape {
        self.f.codomain()
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        let fx = self.f.apply(&x.scale_real(self.factor));
        fx.map(|z| z / self.factor)
    }
}

/// Computes the limit at each point starting from `q^-o f(q^o .)` for every
/// offset `o` and compares the results pairwise. Each limit is within the
/// certified tail (from its last index) of the true limit when a control is
/// given; otherwise the last gap stands in for the tail.
pub fn uniqueness_probe<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    control: Option<&ControlFunction>,
    offsets: &[usize],
    points: &[RingElement<T>],
    settings: &IterationSettings,
) -> Result<UniquenessProbe> {
    let q = p.q_real::<T>();
    let mut max_dev = 0.0f64;
    let mut allowed_at_worst = 0.0f64;
    let mut passed = true;
    for x in points {
        let mut limits = Vec::with_capacity(offsets.len());
        for &o in offsets {
            let g = Shifted {
                f,
                factor: q.powi(o as i32),
            };
            let trace = iterate(&g, x, p, settings, control)?;
            let last = trace.last_n() + o;
            let tail = match control {
                Some(cf) => cauchy_gap_bound(p, cf, x, last, None, DEFAULT_MAX_TERMS)?.as_f64(),
                None => trace.last_gap().map_or(0.0, |g| g.as_f64()),
            };
            limits.push((trace.final_value, tail));
        }
        for a in 0..limits.len() {
            for b in a + 1..limits.len() {
                let (ta, ea) = &limits[a];
                let (tb, eb) = &limits[b];
                let dev = (ta - tb).norm().as_f64();
                let scale = unit_floor(ta.norm().max(tb.norm())).as_f64();
                let allowed = ea + eb + 1e-9 * scale;
                if dev > allowed {
                    passed = false;
                }
                if dev >= max_dev {
                    max_dev = dev;
                    allowed_at_worst = allowed;
                }
            }
        }
    }
    Ok(UniquenessProbe {
        offsets: offsets.to_vec(),
        max_deviation: max_dev,
        allowed: allowed_at_worst,
        passed,
    })
}

/// Worst excess of `||f(x) - T(x)||` over the stability bound, and the
/// largest ratio between them.
fn bound_check<T: Real, F, M>(
    f: &F,
    t: &M,
    control: &ControlFunction,
    p: &TrifParams,
    variant: BoundVariant,
    points: &[RingElement<T>],
) -> Result<(f64, f64)>
where
    F: TernaryMap<T> + ?Sized,
    M: TernaryMap<T> + ?Sized,
{
    let mut excess = f64::NEG_INFINITY;
    let mut ratio = 0.0f64;
    for x in points {
        let dist = (&f.apply(x) - &t.apply(x)).norm().as_f64();
        let bound = stability_bound_variant::<T>(control, p, x, variant)?.as_f64();
        excess = excess.max(dist - bound * (1.0 + DOMINATION_SLACK));
        if bound > 0.0 {
            ratio = ratio.max(dist / bound);
        } else if dist > 0.0 {
            ratio = f64::INFINITY;
        }
    }
    Ok((excess, ratio))
}

/// Runs every conclusion check on an extracted map `t` of `f`.
///
/// For the `{1, i}` scalar domain the mandatory bound is the one without
/// the `1 / (l C(d-1,l-1))` prefactor; the prefactored form is reported as an
/// informational check.
pub fn verify_conclusions<T: Real, F, M>(
    t: &M,
    f: &F,
    control: &ControlFunction,
    p: &TrifParams,
    domain: ScalarDomain,
    cfg: &VerifyConfig,
) -> Result<VerificationVerdict>
where
    F: TernaryMap<T> + ?Sized,
    M: TernaryMap<T> + ?Sized,
{
    f.domain().expect(t.domain())?;
    f.codomain().expect(t.codomain())?;
    let n = cfg.samples;
    let seed = |k| derive_seed(cfg.seed, k);
    let mut checks = vec![
        Check::new(
            "trif_equation",
            trif_residual(t, p, n, seed(1), cfg.radius)?,
            cfg.tol,
        ),
        Check::new(
            "additivity",
            additivity_residual(t, n, seed(2), cfg.radius),
            cfg.tol,
        ),
        Check::new(
            "homogeneity",
            homogeneity_residual(t, domain, n, seed(3), cfg.radius),
            cfg.tol,
        ),
        Check::new(
            "ternary_multiplicativity",
            multiplicativity_residual(t, n, seed(4), cfg.radius),
            cfg.tol,
        ),
    ];
    if domain == ScalarDomain::OneAndI {
        let ih = verify_i_homogeneity(t, n, seed(5), cfg.tol);
        checks.push(Check::new(
            "complex_homogeneity",
            ih.i_residual.max(ih.complex_residual),
            cfg.tol,
        ));
    }

    let mut rng = rng_from_seed(seed(6));
    let points: Vec<RingElement<T>> = (0..n).map(|_| sample(&mut rng, t.domain(), cfg.radius)).collect();
    let (mandatory, extra) = match domain {
        ScalarDomain::OneAndI => (BoundVariant::WithoutPrefactor, Some(BoundVariant::WithPrefactor)),
        _ => (BoundVariant::WithPrefactor, None),
    };
    let (excess, _) = bound_check(f, t, control, p, mandatory, &points)?;
    checks.push(Check::new("stability_bound", excess, BOUND_ABS_SLACK));
    if let Some(v) = extra {
        let (excess, _) = bound_check(f, t, control, p, v, &points)?;
        checks.push(
            Check::new("stability_bound_with_prefactor", excess, BOUND_ABS_SLACK)
                .informational("the {1, i} statement omits the 1/(l C(d-1,l-1)) factor"),
        );
    }

    let probe_points: Vec<RingElement<T>> = points.iter().take(cfg.uniqueness_points).cloned().collect();
    let u = uniqueness_probe(f, p, Some(control), &[0, 1, 2, 3], &probe_points, &cfg.iteration)?;
    let mut c = Check::new("uniqueness", u.max_deviation, u.allowed);
    c.passed = u.passed;
    checks.push(c);

    Ok(VerificationVerdict::from_checks(checks, n, cfg.seed))
}

/// Outcome of [`exactness_check`]. The conclusion checks only run when both
/// premises hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessVerdict {
    pub premises: Vec<Check>,
    pub premises_hold: bool,
    pub conclusions: Option<Vec<Check>>,
    pub passed: bool,
}

/// Tests whether `t` is a ternary homomorphism via the exactness criterion:
/// (a) `t(qx) = q t(x)` and (b) `q^-n phi(q^n args) -> 0`; if both hold,
/// `t` must satisfy the Trif equation, complex homogeneity and ternary
/// multiplicativity.
pub fn exactness_check<T: Real, M: TernaryMap<T> + ?Sized>(
    t: &M,
    control: &ControlFunction,
    p: &TrifParams,
    samples: usize,
    horizon: usize,
    seed: u64,
    tol: f64,
) -> Result<ExactnessVerdict> {
    control.validate()?;
    if horizon < 8 {
        return Err(Error::InvalidInput(format!(
            "horizon must be >= 8, got {horizon}"
        )));
    }
    let q = p.q_real::<T>();
    let shape = t.domain();
    let mut rng = rng_from_seed(derive_seed(seed, 10));

    let mut worst_abs = 0.0f64;
    let mut a_holds = true;
    for _ in 0..samples {
        let x = sample::<T>(&mut rng, shape, 2.0);
        let lhs = t.apply(&x.scale_real(q));
        let rhs = t.apply(&x).scale_real(q);
        let r = (&lhs - &rhs).norm();
        worst_abs = worst_abs.max(r.as_f64());
        if r.as_f64() > tol * unit_floor(lhs.norm() + rhs.norm()).as_f64() {
            a_holds = false;
        }
    }
    let mut a = Check::new("q_homogeneity", worst_abs, tol);
    a.passed = a_holds;

    let mut ratio = 0.0f64;
    for _ in 0..samples.clamp(1, 32) {
        let xs: Vec<_> = (0..p.d()).map(|_| sample::<T>(&mut rng, shape, 2.0)).collect();
        let mut args = ControlArgs::trif_only(xs);
        args.u = sample(&mut rng, shape, 2.0);
        args.v = sample(&mut rng, shape, 2.0);
        args.w = sample(&mut rng, shape, 2.0);
        let norms = args.norms();
        let mut terms = Vec::with_capacity(horizon + 1);
        for j in 0..=horizon {
            let qj = q.powi(j as i32);
            let scaled: Vec<T> = norms.iter().map(|&v| v * qj).collect();
            terms.push((control.eval_norms(&scaled)? / qj).as_f64());
        }
        ratio = ratio.max(trailing_ratio(&terms[horizon / 2..]));
    }
    let mut b = Check::new("control_vanishes", ratio, 1.0 - RATIO_MARGIN);
    b.note = Some("largest trailing ratio of q^-n phi(q^n args)".into());

    let premises_hold = a.passed && b.passed;
    let premises = vec![a, b];
    if !premises_hold {
        return Ok(ExactnessVerdict {
            premises,
            premises_hold,
            conclusions: None,
            passed: false,
        });
    }
    let conclusions = vec![
        Check::new(
            "trif_equation",
            trif_residual(t, p, samples, derive_seed(seed, 11), 2.0)?,
            tol,
        ),
        Check::new(
            "homogeneity",
            homogeneity_residual(t, ScalarDomain::AllComplex, samples, derive_seed(seed, 12), 2.0),
            tol,
        ),
        Check::new(
            "ternary_multiplicativity",
            multiplicativity_residual(t, samples, derive_seed(seed, 13), 2.0),
            tol,
        ),
    ];
    let passed = conclusions.iter().all(|c| c.passed);
    Ok(ExactnessVerdict {
        premises,
        premises_hold,
        conclusions: Some(conclusions),
        passed,
    })
}

/// Largest successive ratio; a run of zeros counts as ratio `0`.
fn trailing_ratio(terms: &[f64]) -> f64 {
    terms.windows(2).fold(0.0, |acc, w| {
        let r = if w[1] == 0.0 {
            0.0
        } else if w[0] == 0.0 {
            f64::INFINITY
        } else {
            w[1] / w[0]
        };
        acc.max(r)
    })
}

/// Outcome of [`factorization_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationVerdict {
    /// `(n, worst relative residual of f(q^2n [s1 s2 z]) = [f(q^n s1) f(q^n s2) f(z)])`
    pub per_n: Vec<(usize, f64)>,
    pub max_residual: f64,
    /// Worst relative residual of `T([s1 s2 z]) = [T(s1) T(s2) f(z)]`.
    pub chain_residual: f64,
    /// Worst relative residual of `T([uvw]) = [T(u) T(v) T(w)]` on samples.
    pub multiplicativity_residual: f64,
    pub passed: bool,
}

/// Checks the factorisation identity on a spanning set of tripotents and
/// that it forces the extracted map to be multiplicative.
#[allow(clippy::too_many_arguments)]
pub fn factorization_check<T: Real, F: TernaryMap<T> + ?Sized>(
    f: &F,
    p: &TrifParams,
    control: Option<&ControlFunction>,
    span: &[RingElement<T>],
    z_samples: &[RingElement<T>],
    n_list: &[usize],
    settings: &IterationSettings,
    tol: f64,
) -> Result<FactorizationVerdict> {
    if span.is_empty() {
        return Err(Error::InvalidInput("spanning set is empty".into()));
    }
    for (k, s) in span.iter().enumerate() {
        f.domain().expect(s.shape())?;
        let r = (&s.tprod_unchecked(s, s) - s).norm();
        if r > T::of(tol) * unit_floor(s.norm()) {
            return Err(Error::Precondition(format!(
                "spanning element {k} is not a tripotent: ||[sss] - s|| = {r}"
            )));
        }
    }
    let q = p.q_real::<T>();
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let qn = q.powi(n as i32);
        let q2n = qn * qn;
        let mut worst = 0.0f64;
        for s1 in span {
            let f1 = f.apply(&s1.scale_real(qn));
            for s2 in span {
                let f2 = f.apply(&s2.scale_real(qn));
                for z in z_samples {
                    let lhs = f.apply(&s1.tprod_unchecked(s2, z).scale_real(q2n));
                    let rhs = f1.tprod_unchecked(&f2, &f.apply(z));
                    worst = worst.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
                }
            }
        }
        per_n.push((n, worst));
    }
    let max_residual = per_n.iter().map(|x| x.1).fold(0.0, f64::max);

    let t = extract_map(f, p, settings, control)?;
    let mut chain = 0.0f64;
    for s1 in span {
        for s2 in span {
            for z in z_samples {
                let lhs = t.apply(&s1.tprod_unchecked(s2, z));
                let rhs = t.apply(s1).tprod_unchecked(&t.apply(s2), &f.apply(z));
                chain = chain.max(rel((&lhs - &rhs).norm(), lhs.norm() + rhs.norm()));
            }
        }
    }
    let mult = multiplicativity_residual(&t, z_samples.len().max(16), 0xfac7, 2.0);
    Ok(FactorizationVerdict {
        per_n,
        max_residual,
        chain_residual: chain,
        multiplicativity_residual: mult,
        passed: max_residual <= tol && chain <= tol && mult <= tol,
    })
}
