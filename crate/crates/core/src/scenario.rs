//! Approximate homomorphisms with known ground truth.
//!
//! Every scenario is `S + eta` (or a truncation of `S`) where
//! `S(x) = U x V*` is an isometry-pair homomorphism. Corner noise lives in
//! the block `(I - UU*) . (I - VV*)`, so every ternary product mixing `S`
//! and `eta` values vanishes and the defect budget stays linear in the
//! noise amplitude.

use serde::{Deserialize, Serialize};

use crate::control::ControlFunction;
use crate::error::{Error, Result};
use crate::hyers::{basis, ExtractedMap, IterationSettings};
use crate::map::TernaryMap;
use crate::noise::{HashNoise, NoiseProfile, SmoothNoise};
use crate::sampling::{derive_seed, rng_from_seed, ScalarDomain};
use crate::scalar::{unit_floor, Real};
use crate::ternary::{isometry_residual, random_element_from, random_isometry, RingElement, Shape};
use crate::trif::{sample_defects, DefectBatch, DefectScope, TrifParams};

/// Isometry tolerance in double precision; widened to `100 eps` for `f32`.
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Samples in the domination spot-check run at construction.
pub const SPOT_CHECK_SAMPLES: usize = 50;
/// Norm annulus carrying the Trif-only noise.
pub const ANNULUS: (f64, f64) = (0.25, 0.75);
/// Default `n` values for the factorisation identity.
pub const DEFAULT_N_LIST: [usize; 4] = [1, 2, 3, 4];

/// `S(x) = U x V*` with isometries `U`, `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactHom<T: Real> {
    u: RingElement<T>,
    v: RingElement<T>,
}

impl<T: Real> ExactHom<T> {
    /// `u` is `codomain.rows x domain.rows`, `v` is `codomain.cols x domain.cols`.
    pub fn new(u: RingElement<T>, v: RingElement<T>) -> Result<Self> {
        let tol = ISOMETRY_TOL.max(100.0 * T::epsilon().as_f64());
        for (name, m) in [("U", &u), ("V", &v)] {
            let r = isometry_residual(m).as_f64();
            if m.rows() < m.cols() || r.is_nan() || r > tol {
                return Err(Error::InvalidInput(format!(
                    "{name} is not an isometry: ||{name}*{name} - I|| = {r:e}"
                )));
            }
        }
        Ok(ExactHom { u, v })
    }

    pub fn identity(shape: Shape) -> Self {
        ExactHom {
            u: RingElement::identity(shape.rows).expect("rows >= 1"),
            v: RingElement::identity(shape.cols).expect("cols >= 1"),
        }
    }

    pub fn random(domain: Shape, codomain: Shape, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let u = random_isometry(&mut rng, codomain.rows, domain.rows)?;
        let v = random_isometry(&mut rng, codomain.cols, domain.cols)?;
        Self::new(u, v)
    }

    pub fn u(&self) -> &RingElement<T> {
        &self.u
    }

    pub fn v(&self) -> &RingElement<T> {
        &self.v
    }

    /// `(I - UU*, I - VV*)`.
    pub fn complement_projections(&self) -> (RingElement<T>, RingElement<T>) {
        let proj = |m: &RingElement<T>| {
            let id = RingElement::identity(m.rows()).expect("rows >= 1");
            &id - &m.matmul_unchecked(&m.adjoint())
        };
        (proj(&self.u), proj(&self.v))
    }

    /// Whether both complements are nonzero, i.e. corner noise is possible.
    pub fn has_corner(&self) -> bool {
        self.u.rows() > self.u.cols() && self.v.rows() > self.v.cols()
    }
}

impl<T: Real> TernaryMap<T> for ExactHom<T> {
    fn domain(&self) -> Shape {
        Shape {
            rows: self.u.cols(),
            cols: self.v.cols(),
        }
    }
    fn codomain(&self) -> Shape {
        Shape {
            rows: self.u.rows(),
            cols: self.v.rows(),
        }
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        self.u.matmul_unchecked(x).matmul_unchecked(&self.v.adjoint())
    }
}

/// Serialisable matrix, entries as row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub shape: Shape,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixSpec {
    pub fn from_element<T: Real>(x: &RingElement<T>) -> Self {
        MatrixSpec {
            shape: x.shape(),
            entries: x.to_pairs(),
        }
    }

    pub fn to_element<T: Real>(&self) -> Result<RingElement<T>> {
        RingElement::from_pairs(self.shape, &self.entries)
    }
}

/// How the ground-truth homomorphism is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum HomSource {
    /// `U = V = I` (requires equal domain and codomain).
    Identity,
    /// Random isometries seeded from the scenario seed.
    Random,
    Explicit {
        u: MatrixSpec,
        v: MatrixSpec,
    },
}

/// The perturbation applied to the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `f = S`.
    Exact,
    /// `f = S` on the open unit ball, `0` elsewhere.
    Truncated,
    /// `f = S + eta`, `||eta|| <= delta`, corner noise.
    ConstantNoise { delta: f64 },
    /// `f = S + eta`, `||eta(x)|| <= eps min(||x||^p, 1)`, corner noise.
    PnormNoise { eps: f64, p: f64 },
    /// `f = S + eta` with `eta` supported in a norm annulus.
    TrifNoise { amplitude: f64 },
    /// `f = S + eta` with continuous bounded corner noise.
    SmoothNoise { delta: f64 },
}

impl ScenarioKind {
    /// Every kind name, in catalogue order.
    pub const NAMES: [&'static str; 6] = [
        "exact",
        "truncated",
        "constant_noise",
        "pnorm_noise",
        "trif_noise",
        "smooth_noise",
    ];

    /// The serialized `kind` tag.
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Exact => "exact",
            ScenarioKind::Truncated => "truncated",
            ScenarioKind::ConstantNoise { .. } => "constant_noise",
            ScenarioKind::PnormNoise { .. } => "pnorm_noise",
            ScenarioKind::TrifNoise { .. } => "trif_noise",
            ScenarioKind::SmoothNoise { .. } => "smooth_noise",
        }
    }
}

/// Which property of the theory a scenario is meant to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exercises {
    /// `T(qx) = qT(x)` forces a homomorphism.
    Exactness,
    /// Direct-method extraction under a general control.
    DirectMethod,
    /// Bounded control where the limit is the zero map.
    Truncation,
    /// Closed-form bound for `eps sum ||x||^p`.
    PowerControl,
    /// Multiplicativity from the spanning-set identity.
    SpanningSet,
    /// Linearity from the scalars `{1, i}` alone.
    OneAndI,
}

/// What extraction should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedLimit {
    GroundTruth,
    ZeroMap,
}

/// Everything needed to rebuild a scenario's evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescriptor {
    pub id: String,
    pub kind: ScenarioKind,
    pub exercises: Exercises,
    pub d: usize,
    pub l: usize,
    pub domain: Shape,
    pub codomain: Shape,
    pub hom: HomSource,
    pub seed: u64,
    pub control: ControlFunction,
    pub scalar_domain: ScalarDomain,
    pub defect_scope: DefectScope,
    pub expected: ExpectedLimit,
}

#[derive(Debug, Clone)]
enum Perturbation<T: Real> {
    None,
    Truncate,
    Hash(HashNoise<T>),
    Smooth(SmoothNoise<T>),
}

/// A scenario map together with its advertised control.
#[derive(Debug, Clone)]
pub struct MapUnderTest<T: Real> {
    descriptor: ScenarioDescriptor,
    params: TrifParams,
    hom: ExactHom<T>,
    perturbation: Perturbation<T>,
}

impl<T: Real> TernaryMap<T> for MapUnderTest<T> {
    fn domain(&self) -> Shape {
        self.descriptor.domain
    }
    fn codomain(&self) -> Shape {
        self.descriptor.codomain
    }
    fn apply(&self, x: &RingElement<T>) -> RingElement<T> {
        match &self.perturbation {
            Perturbation::None => self.hom.apply(x),
            Perturbation::Truncate => {
                if x.norm() < T::one() {
                    self.hom.apply(x)
                } else {
                    RingElement::zeros(self.codomain())
                }
            }
            Perturbation::Hash(n) => &self.hom.apply(x) + &n.sample(x),
            Perturbation::Smooth(n) => &self.hom.apply(x) + &n.sample(x),
        }
    }
}

impl<T: Real> MapUnderTest<T> {
    /// Rebuilds the evaluator and runs the domination spot-check.
    pub fn from_descriptor(desc: &ScenarioDescriptor) -> Result<Self> {
        let params = TrifParams::new(desc.d, desc.l)?;
        desc.control.validate()?;
        let hom = match &desc.hom {
            HomSource::Identity => {
                if desc.domain != desc.codomain {
                    return Err(Error::InvalidInput(
                        "identity ground truth needs equal domain and codomain".into(),
                    ));
                }
                ExactHom::identity(desc.domain)
            }
            HomSource::Random => ExactHom::random(desc.domain, desc.codomain, derive_seed(desc.seed, 1))?,
            HomSource::Explicit { u, v } => ExactHom::new(u.to_element()?, v.to_element()?)?,
        };
        if hom.domain() != desc.domain || hom.codomain() != desc.codomain {
            return Err(Error::InvalidInput(format!(
                "isometries induce {} -> {}, descriptor says {} -> {}",
                hom.domain(),
                hom.codomain(),
                desc.domain,
                desc.codomain
            )));
        }
        let noise_seed = derive_seed(desc.seed, 2);
        let corner = || -> Result<(RingElement<T>, RingElement<T>)> {
            if !hom.has_corner() {
                return Err(Error::InvalidInput(format!(
                    "corner noise needs a codomain larger than the domain in both dimensions, got {} -> {}",
                    desc.domain, desc.codomain
                )));
            }
            Ok(hom.complement_projections())
        };
        let perturbation = match desc.kind {
            ScenarioKind::Exact => Perturbation::None,
            ScenarioKind::Truncated => Perturbation::Truncate,
            ScenarioKind::ConstantNoise { delta } => {
                check_amplitude(delta)?;
                let (l, r) = corner()?;
                Perturbation::Hash(HashNoise {
                    profile: NoiseProfile::Ball { amplitude: delta },
                    seed: noise_seed,
                    codomain: desc.codomain,
                    left: Some(l),
                    right: Some(r),
                })
            }
            ScenarioKind::PnormNoise { eps, p } => {
                check_amplitude(eps)?;
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::OutOfRange(format!("p = {p} outside [0, 1)")));
                }
                let (l, r) = corner()?;
                Perturbation::Hash(HashNoise {
                    profile: NoiseProfile::CappedPower { eps, p },
                    seed: noise_seed,
                    codomain: desc.codomain,
                    left: Some(l),
                    right: Some(r),
                })
            }
            ScenarioKind::TrifNoise { amplitude } => {
                check_amplitude(amplitude)?;
                Perturbation::Hash(HashNoise {
                    profile: NoiseProfile::Annulus {
                        amplitude,
                        inner: ANNULUS.0,
                        outer: ANNULUS.1,
                    },
                    seed: noise_seed,
                    codomain: desc.codomain,
                    left: None,
                    right: None,
                })
            }
            ScenarioKind::SmoothNoise { delta } => {
                check_amplitude(delta)?;
                let (l, r) = corner()?;
                Perturbation::Smooth(SmoothNoise::new(
                    delta,
                    desc.domain,
                    desc.codomain,
                    noise_seed,
                    Some(l),
                    Some(r),
                ))
            }
        };
        let m = MapUnderTest {
            descriptor: desc.clone(),
            params,
            hom,
            perturbation,
        };
        m.spot_check(SPOT_CHECK_SAMPLES, derive_seed(desc.seed, 3))?;
        Ok(m)
    }

    /// Fails with [`Error::ControlContract`] if the advertised control does
    /// not dominate the defect on `samples` random inputs of norm at most 2.
    pub fn spot_check(&self, samples: usize, seed: u64) -> Result<()> {
        let batch = DefectBatch {
            samples,
            seed,
            radius: 2.0,
            domain: self.descriptor.scalar_domain,
            scope: self.descriptor.defect_scope,
        };
        let out = sample_defects(self, &self.params, &self.descriptor.control, &batch)?;
        if let Some(s) = out.iter().find(|s| !s.dominated) {
            return Err(Error::ControlContract(format!(
                "scenario '{}': defect {} exceeds control {} at sample {}",
                self.descriptor.id,
                s.defect.as_f64(),
                s.control_value.as_f64(),
                s.index
            )));
        }
        Ok(())
    }

    pub fn descriptor(&self) -> &ScenarioDescriptor {
        &self.descriptor
    }

    pub fn params(&self) -> &TrifParams {
        &self.params
    }

    pub fn ground_truth(&self) -> &ExactHom<T> {
        &self.hom
    }

    pub fn control(&self) -> &ControlFunction {
        &self.descriptor.control
    }

    pub fn scalar_domain(&self) -> ScalarDomain {
        self.descriptor.scalar_domain
    }

    /// Matrix of the map extraction should recover.
    pub fn expected_representation(&self) -> ExtractedMap<T> {
        match self.descriptor.expected {
            ExpectedLimit::GroundTruth => ExtractedMap::from_linear(&self.hom),
            ExpectedLimit::ZeroMap => {
                let zero = crate::map::FnMap::new(self.domain(), self.codomain(), {
                    let c = self.codomain();
                    move |_| RingElement::zeros(c)
                });
                ExtractedMap::from_linear(&zero)
            }
        }
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if a.is_finite() && a >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "noise amplitude must be >= 0, got {a}"
        )))
    }
}

/// Perturbation for [`make_perturbed_hom`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "noise", rename_all = "snake_case")]
pub enum NoiseKind {
    ConstantBall { delta: f64 },
    Pnorm { eps: f64, p: f64 },
}

/// Constant control `d C(d-2,l-2) + d C(d-2,l-1) + l C(d,l) + 1` for the
/// truncated map.
pub fn truncation_control(p: &TrifParams) -> ControlFunction {
    ControlFunction::constant(p.truncation_delta() as f64)
}

/// Constant control dominating `D_mu (S + eta)` for corner noise with
/// `||eta|| <= delta`.
pub fn constant_noise_control(p: &TrifParams, delta: f64) -> ControlFunction {
    let w = (p.leading_weight() + p.d() as u64 * p.c_dm2_lm1() + p.l() as u64 * p.c_d_l()) as f64;
    ControlFunction::constant(delta * w + delta.powi(3))
}

/// P-norm control dominating `D_mu (S + eta)` for corner noise with
/// `||eta(x)|| <= eps min(||x||^p, 1)`.
pub fn pnorm_noise_control(p: &TrifParams, eps: f64, exponent: f64) -> ControlFunction {
    let lead = p.leading_weight() as f64;
    let xs = eps * (lead + p.c_dm2_lm1() as f64 + p.bound_denominator() as f64);
    let uvw = eps * lead + eps.powi(3);
    ControlFunction::pnorm(xs.max(uvw), exponent)
}

/// Constant control for the Trif part of `S + eta` with `||eta|| <= a`.
pub fn trif_noise_control(p: &TrifParams, amplitude: f64) -> ControlFunction {
    let w = (p.leading_weight() + p.d() as u64 * p.c_dm2_lm1() + p.l() as u64 * p.c_d_l()) as f64;
    ControlFunction::constant(amplitude * w)
}

fn descriptor_for<T: Real>(
    s: &ExactHom<T>,
    p: &TrifParams,
    kind: ScenarioKind,
    seed: u64,
) -> ScenarioDescriptor {
    let (exercises, control, scalar_domain, scope, expected) = match kind {
        ScenarioKind::Exact => (
            Exercises::Exactness,
            ControlFunction::constant(0.0),
            ScalarDomain::AllComplex,
            DefectScope::Full,
            ExpectedLimit::GroundTruth,
        ),
        ScenarioKind::Truncated => (
            Exercises::Truncation,
            truncation_control(p),
            ScalarDomain::UnitCircle,
            DefectScope::Full,
            ExpectedLimit::ZeroMap,
        ),
        ScenarioKind::ConstantNoise { delta } => (
            Exercises::DirectMethod,
            constant_noise_control(p, delta),
            ScalarDomain::UnitCircle,
            DefectScope::Full,
            ExpectedLimit::GroundTruth,
        ),
        ScenarioKind::PnormNoise { eps, p: e } => (
            Exercises::PowerControl,
            pnorm_noise_control(p, eps, e),
            ScalarDomain::UnitCircle,
            DefectScope::Full,
            ExpectedLimit::GroundTruth,
        ),
        ScenarioKind::TrifNoise { amplitude } => (
            Exercises::SpanningSet,
            trif_noise_control(p, amplitude),
            ScalarDomain::UnitCircle,
            DefectScope::TrifOnly,
            ExpectedLimit::GroundTruth,
        ),
        ScenarioKind::SmoothNoise { delta } => (
            Exercises::OneAndI,
            constant_noise_control(p, delta),
            ScalarDomain::OneAndI,
            DefectScope::Full,
            ExpectedLimit::GroundTruth,
        ),
    };
    ScenarioDescriptor {
        id: format!("{}/d{}l{}/{}/{seed:016x}", kind.name(), p.d(), p.l(), s.domain()),
        kind,
        exercises,
        d: p.d(),
        l: p.l(),
        domain: s.domain(),
        codomain: s.codomain(),
        hom: HomSource::Explicit {
            u: MatrixSpec::from_element(s.u()),
            v: MatrixSpec::from_element(s.v()),
        },
        seed,
        control,
        scalar_domain,
        defect_scope: scope,
        expected,
    }
}

/// The exact homomorphism `x -> U x V*` as a scenario.
pub fn make_isometry_hom<T: Real>(
    u: RingElement<T>,
    v: RingElement<T>,
    p: &TrifParams,
) -> Result<MapUnderTest<T>> {
    let s = ExactHom::new(u, v)?;
    MapUnderTest::from_descriptor(&descriptor_for(&s, p, ScenarioKind::Exact, 0))
}

/// `f(x) = S(x)` for `||x|| < 1` and `0` otherwise; the extracted limit is
/// the zero map.
pub fn make_truncated_hom<T: Real>(s: &ExactHom<T>, p: &TrifParams) -> Result<MapUnderTest<T>> {
    MapUnderTest::from_descriptor(&descriptor_for(s, p, ScenarioKind::Truncated, 0))
}

/// `S + eta` with bounded or power-law corner noise.
pub fn make_perturbed_hom<T: Real>(
    s: &ExactHom<T>,
    p: &TrifParams,
    noise: NoiseKind,
    seed: u64,
) -> Result<MapUnderTest<T>> {
    let kind = match noise {
        NoiseKind::ConstantBall { delta } => ScenarioKind::ConstantNoise { delta },
        NoiseKind::Pnorm { eps, p } => ScenarioKind::PnormNoise { eps, p },
    };
    MapUnderTest::from_descriptor(&descriptor_for(s, p, kind, seed))
}

/// `S + eta` with continuous corner noise, checked over the scalars `{1, i}`.
pub fn make_smooth_hom<T: Real>(
    s: &ExactHom<T>,
    p: &TrifParams,
    delta: f64,
    seed: u64,
) -> Result<MapUnderTest<T>> {
    MapUnderTest::from_descriptor(&descriptor_for(s, p, ScenarioKind::SmoothNoise { delta }, seed))
}

/// The matrix units `e_ij` of `shape`, row-major.
pub fn matrix_units_span<T: Real>(shape: Shape) -> Vec<RingElement<T>> {
    basis(shape)
}

fn check_tripotents<T: Real>(span: &[RingElement<T>], tol: f64) -> Result<()> {
    for (k, s) in span.iter().enumerate() {
        let r = (&s.tprod_unchecked(s, s) - s).norm();
        if r.as_f64() > tol * unit_floor(s.norm()).as_f64() {
            return Err(Error::Precondition(format!(
                "spanning element {k} is not a tripotent: ||[sss] - s|| = {}",
                r.as_f64()
            )));
        }
    }
    Ok(())
}

/// `S + eta` with `eta` supported in the annulus `0.25 <= ||x|| <= 0.75`.
///
/// Nonzero tripotents have norm 1, so `q^n s` never meets the annulus; use
/// [`protected_z_samples`] for `z` values whose products also avoid it.
pub fn make_trif_noise_hom<T: Real>(
    s: &ExactHom<T>,
    p: &TrifParams,
    span: &[RingElement<T>],
    amplitude: f64,
    seed: u64,
) -> Result<MapUnderTest<T>> {
    check_tripotents(span, 1e-12)?;
    MapUnderTest::from_descriptor(&descriptor_for(s, p, ScenarioKind::TrifNoise { amplitude }, seed))
}

fn outside_annulus<T: Real>(x: &RingElement<T>) -> bool {
    let n = x.norm().as_f64();
    n < ANNULUS.0 || n > ANNULUS.1
}

/// Random `z` (norm at most 3) such that `z` and every `q^2n [s1 s2 z]`,
/// `n` in `n_list`, lie outside the noise annulus.
pub fn protected_z_samples<T: Real>(
    p: &TrifParams,
    span: &[RingElement<T>],
    n_list: &[usize],
    count: usize,
    seed: u64,
) -> Result<Vec<RingElement<T>>> {
    let shape = span
        .first()
        .map(RingElement::shape)
        .ok_or_else(|| Error::InvalidInput("spanning set is empty".into()))?;
    let q = p.q_real::<T>();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::Precondition(
                "could not find protected samples outside the noise annulus".into(),
            ));
        }
        let z = random_element_from(&mut rng, shape, T::of(3.0));
        let ok = outside_annulus(&z)
            && span.iter().all(|s1| {
                span.iter().all(|s2| {
                    let prod = s1.tprod_unchecked(s2, &z);
                    n_list
                        .iter()
                        .all(|&n| outside_annulus(&prod.scale_real(q.powi(2 * n as i32))))
                })
            });
        if ok {
            out.push(z);
        }
    }
    Ok(out)
}

/// Amplitudes used by [`catalogue`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogueOptions {
    pub noise: f64,
    pub pnorm_eps: f64,
    pub pnorm_p: f64,
    pub trif_amplitude: f64,
}

impl Default for CatalogueOptions {
    fn default() -> Self {
        CatalogueOptions {
            noise: 2e-3,
            pnorm_eps: 2e-3,
            pnorm_p: 0.5,
            trif_amplitude: 0.5,
        }
    }
}

impl CatalogueOptions {
    /// Defaults with the noise amplitudes lowered, when needed, so that a
    /// gap of order `noise q^-n` falls below `settings.tol` four steps
    /// before `settings.n_max`.
    pub fn scaled_for(p: &TrifParams, settings: &IterationSettings) -> Self {
        let d = Self::default();
        let reach = settings.n_max.saturating_sub(4) as i32;
        let cap = 0.25 * settings.tol * p.q_real::<f64>().powi(reach);
        CatalogueOptions {
            noise: d.noise.min(cap),
            pnorm_eps: d.pnorm_eps.min(cap),
            ..d
        }
    }
}

/// Codomain used by the catalogue: one extra row and column for corner noise.
pub fn catalogue_codomain(domain: Shape) -> Shape {
    Shape {
        rows: domain.rows + 1,
        cols: domain.cols + 1,
    }
}

/// Six scenarios per shape: exact, truncated, constant noise, p-norm noise,
/// Trif-only noise and smooth noise over `{1, i}`.
pub fn catalogue<T: Real>(
    p: &TrifParams,
    shapes: &[Shape],
    seed: u64,
    opts: &CatalogueOptions,
) -> Result<Vec<MapUnderTest<T>>> {
    let mut out = Vec::with_capacity(6 * shapes.len());
    for (k, &shape) in shapes.iter().enumerate() {
        let base = derive_seed(seed, k as u64);
        let s = ExactHom::<T>::random(shape, catalogue_codomain(shape), derive_seed(base, 0))?;
        let kinds = [
            ScenarioKind::Exact,
            ScenarioKind::Truncated,
            ScenarioKind::ConstantNoise { delta: opts.noise },
            ScenarioKind::PnormNoise {
                eps: opts.pnorm_eps,
                p: opts.pnorm_p,
            },
            ScenarioKind::TrifNoise {
                amplitude: opts.trif_amplitude,
            },
            ScenarioKind::SmoothNoise { delta: opts.noise },
        ];
        for (j, kind) in kinds.into_iter().enumerate() {
            let desc = descriptor_for(&s, p, kind, derive_seed(base, 1 + j as u64));
            out.push(MapUnderTest::from_descriptor(&desc)?);
        }
    }
    Ok(out)
}
