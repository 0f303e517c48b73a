//! The five subcommands. Each returns its payload and exit status; writing
//! the payload is left to the caller.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ternary_stab::axioms::{axiom_suite, RingAxiomReport};
use ternary_stab::control::{power_control_bound_at_norm, substituted_series, BoundCertificate};
use ternary_stab::hyers::{basis, extract_map, iterate, ExtractedMapJson, IterationTrace};
use ternary_stab::sampling::derive_seed;
use ternary_stab::scenario::{
    catalogue, matrix_units_span, protected_z_samples, Exercises, ScenarioDescriptor, ScenarioKind,
    DEFAULT_N_LIST,
};
use ternary_stab::trif::{sample_defects, DefectBatch, TrifParamsSummary};
use ternary_stab::verify::{exactness_check, factorization_check, verify_conclusions, Check, VerifyConfig};
use ternary_stab::{
    BoundVariant, ControlFunction, Element, ScalarDomain, Scenario, Shape, TernaryMap, TrifParams,
};

use crate::config::RunConfig;
use crate::error::{CliError, Exit};

/// Relative slack when comparing an observed gap with its certified bound.
pub const GAP_SLACK: f64 = 1e-9;
/// Largest entry distance accepted between the extracted and expected maps.
pub const EXPECTED_LIMIT_TOL: f64 = 1e-8;
/// Number of `q`-powers probed by the exactness check.
pub const EXACTNESS_HORIZON: usize = 16;
/// Iterate indices probed by the factorisation check.
pub const FACTORIZATION_N: [usize; 3] = [1, 2, 3];
/// Protected points used by the factorisation check.
pub const FACTORIZATION_POINTS: usize = 16;

const DEFECT_STREAM: u64 = 0xdef;
const VERIFY_STREAM: u64 = 0x7e5;
const EXACTNESS_STREAM: u64 = 0xe8a;
const FACTOR_STREAM: u64 = 0xfac;

/// Config echo shared by every JSON payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub command: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub library_version: String,
}

impl Header {
    fn new(command: &str, cfg: &RunConfig) -> Self {
        let mut config = cfg.clone();
        config.command = Some(command.to_string());
        Header {
            command: command.to_string(),
            config_hash: config.hash(),
            config,
            library_version: ternary_stab::VERSION.to_string(),
        }
    }
}

/// Run-dependent fields, excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub timestamp_unix_ms: u64,
    pub wall_clock_seconds: f64,
}

impl Meta {
    fn since(start: Instant) -> Self {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Meta {
            timestamp_unix_ms: now,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingOutput {
    #[serde(flatten)]
    pub header: Header,
    pub report: RingAxiomReport,
    pub passed: bool,
    pub meta: Meta,
}

pub fn verify_ring(cfg: &RunConfig) -> Result<(RingOutput, Exit), CliError> {
    let start = Instant::now();
    let shape = cfg.shape()?;
    cfg.validate()?;
    let report = axiom_suite::<f64>(shape, cfg.samples, cfg.seed()?, cfg.tol)?;
    let passed = report.passed;
    let out = RingOutput {
        header: Header::new("verify-ring", cfg),
        report,
        passed,
        meta: Meta::since(start),
    };
    Ok((out, exit_for(passed)))
}

fn exit_for(passed: bool) -> Exit {
    if passed {
        Exit::Pass
    } else {
        Exit::CheckFailed
    }
}

/// Catalogue scenarios for the configured shape, filtered by kind name.
pub fn select_scenarios(cfg: &RunConfig, p: &TrifParams) -> Result<Vec<Scenario>, CliError> {
    let shape = cfg.shape()?;
    let wanted = match cfg.scenario.as_deref() {
        None | Some("all") => None,
        Some(name) if ScenarioKind::NAMES.contains(&name) => Some(name),
        Some(name) => {
            return Err(CliError::Input(format!(
                "unsupported scenario kind `{name}`; expected one of {} or all",
                ScenarioKind::NAMES.join(", ")
            )))
        }
    };
    let all = catalogue::<f64>(p, &[shape], cfg.seed()?, &cfg.catalogue_options(p))?;
    Ok(all
        .into_iter()
        .filter(|m| wanted.is_none_or(|w| m.descriptor().kind.name() == w))
        .collect())
}

fn single_scenario(cfg: &RunConfig, p: &TrifParams) -> Result<Scenario, CliError> {
    if matches!(cfg.scenario.as_deref(), None | Some("all")) {
        return Err(CliError::Input(format!(
            "select one scenario with --scenario ({})",
            ScenarioKind::NAMES.join(", ")
        )));
    }
    select_scenarios(cfg, p)?
        .pop()
        .ok_or_else(|| CliError::Input("no matching scenario".into()))
}

fn defect_batch(cfg: &RunConfig, m: &Scenario) -> Result<DefectBatch, CliError> {
    Ok(DefectBatch {
        samples: cfg.samples,
        seed: derive_seed(cfg.seed()?, DEFECT_STREAM),
        radius: cfg.radius,
        domain: m.scalar_domain(),
        scope: m.descriptor().defect_scope,
    })
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Defect table as CSV; the exit status reports domination.
pub fn defect(cfg: &RunConfig) -> Result<(String, Exit), CliError> {
    cfg.validate()?;
    let p = cfg.params()?;
    let m = single_scenario(cfg, &p)?;
    let control = cfg.control.clone().unwrap_or_else(|| m.control().clone());
    let samples = sample_defects(&m, &p, &control, &defect_batch(cfg, &m)?)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Numeric(format!("csv: {e}"));
    w.write_record([
        "sample_index",
        "mu_re",
        "mu_im",
        "defect",
        "control_value",
        "dominated",
    ])
    .map_err(io)?;
    for s in &samples {
        w.write_record([
            s.index.to_string(),
            fmt17(s.mu.re),
            fmt17(s.mu.im),
            fmt17(s.defect),
            fmt17(s.control_value),
            s.dominated.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numeric(format!("csv: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is ascii");
    Ok((text, exit_for(samples.iter().all(|s| s.dominated))))
}

/// Per-basis-element iteration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub basis_index: usize,
    pub converged: bool,
    pub converged_at: Option<usize>,
    pub n_used: usize,
    pub gaps: Vec<f64>,
    pub certified_gap_bounds: Option<Vec<f64>>,
    /// Worst `(gap - bound) / max(1, ||T_n||, ||T_{n-1}||)`, floored at 0.
    pub bound_excess: f64,
    pub within_bounds: bool,
}

fn summarize(k: usize, t: &IterationTrace<f64>) -> TraceSummary {
    let mut excess: f64 = 0.0;
    if let Some(bounds) = &t.certified_gap_bounds {
        for (n, (g, b)) in t.gaps.iter().zip(bounds).enumerate() {
            let scale = t.values[n].norm().max(t.values[n + 1].norm()).max(1.0);
            excess = excess.max((g - b) / scale);
        }
    }
    TraceSummary {
        basis_index: k,
        converged: t.converged,
        converged_at: t.converged_at,
        n_used: t.last_n(),
        gaps: t.gaps.clone(),
        certified_gap_bounds: t.certified_gap_bounds.clone(),
        bound_excess: excess,
        within_bounds: excess <= GAP_SLACK,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractOutput {
    #[serde(flatten)]
    pub header: Header,
    pub scenario: ScenarioDescriptor,
    pub converged: bool,
    pub n_used: usize,
    pub gaps_within_bounds: bool,
    pub traces: Vec<TraceSummary>,
    pub extracted: Option<ExtractedMapJson>,
    /// Largest entry distance to the scenario's expected limit.
    pub expected_distance: Option<f64>,
    pub passed: bool,
    pub meta: Meta,
}

/// Runs the iteration on every basis element and assembles the limit.
/// Non-convergence exits with [`Exit::Numeric`] but still yields the traces.
pub fn extract(cfg: &RunConfig) -> Result<(ExtractOutput, Exit), CliError> {
    let start = Instant::now();
    cfg.validate()?;
    let p = cfg.params()?;
    let m = single_scenario(cfg, &p)?;
    let settings = cfg.iteration();
    let traces = basis::<f64>(m.domain())
        .par_iter()
        .map(|e| iterate(&m, e, &p, &settings, Some(m.control())))
        .collect::<ternary_stab::Result<Vec<_>>>()?;
    let summaries: Vec<TraceSummary> = traces.iter().enumerate().map(|(k, t)| summarize(k, t)).collect();
    let converged = traces.iter().all(|t| t.converged);
    let within = summaries.iter().all(|s| s.within_bounds);
    let (extracted, expected_distance) = if converged {
        let mut t = extract_map(&m, &p, &settings, Some(m.control()))?;
        if let Some(pr) = t.provenance.as_mut() {
            pr.scenario = Some(m.descriptor().id.clone());
        }
        let dist = t.max_entry_distance(&m.expected_representation())?;
        (Some(t.to_json()), Some(dist))
    } else {
        (None, None)
    };
    let exit = if !converged {
        Exit::Numeric
    } else {
        exit_for(within)
    };
    let out = ExtractOutput {
        header: Header::new("extract", cfg),
        scenario: m.descriptor().clone(),
        converged,
        n_used: traces.iter().map(IterationTrace::last_n).max().unwrap_or(0),
        gaps_within_bounds: within,
        traces: summaries,
        extracted,
        expected_distance,
        passed: exit == Exit::Pass,
        meta: Meta::since(start),
    };
    Ok((out, exit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub samples: usize,
    pub max_defect: f64,
    pub max_control_value: f64,
    pub all_dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub converged: bool,
    pub n_used: usize,
    pub max_final_gap: f64,
    pub expected_distance: f64,
    pub extracted: ExtractedMapJson,
}

/// Stability bound at a unit-norm reference point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValues {
    pub control: ControlFunction,
    pub reference_norm: f64,
    pub phi_tilde: BoundCertificate,
    pub with_prefactor: f64,
    pub without_prefactor: f64,
    /// The variant the mandatory bound check uses.
    pub mandatory: BoundVariant,
}

/// Flags a scenario whose two bound variants disagree in what they claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDiscrepancy {
    pub mandatory: BoundVariant,
    pub informational: BoundVariant,
    pub mandatory_passed: bool,
    pub informational_passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: String,
    pub descriptor: ScenarioDescriptor,
    pub bounds: BoundValues,
    pub discrepancy: Option<BoundDiscrepancy>,
    pub defect: Option<DefectSummary>,
    pub extraction: Option<ExtractionSummary>,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    #[serde(flatten)]
    pub header: Header,
    pub params: TrifParamsSummary,
    pub bound_only: bool,
    pub scenarios: Vec<ScenarioResult>,
    pub passed: bool,
    pub meta: Meta,
}

fn check(name: &str, max_residual: f64, threshold: f64, passed: bool) -> Check {
    Check {
        name: name.to_string(),
        max_residual,
        threshold,
        passed,
        mandatory: true,
        note: None,
    }
}

fn bound_values(m: &Scenario, p: &TrifParams) -> Result<BoundValues, CliError> {
    let x = Element::matrix_unit(m.domain(), 0, 0)?;
    let cert = substituted_series(m.control(), p, &x)?;
    let mandatory = match m.scalar_domain() {
        ScalarDomain::OneAndI => BoundVariant::WithoutPrefactor,
        _ => BoundVariant::WithPrefactor,
    };
    Ok(BoundValues {
        control: m.control().clone(),
        reference_norm: x.norm(),
        phi_tilde: cert,
        with_prefactor: cert.upper() * p.prefactor::<f64>(),
        without_prefactor: cert.upper(),
        mandatory,
    })
}

fn pipeline(m: &Scenario, p: &TrifParams, cfg: &RunConfig, r: &mut ScenarioResult) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let settings = cfg.iteration();

    let control = cfg.control.clone().unwrap_or_else(|| m.control().clone());
    let defects = sample_defects(m, p, &control, &defect_batch(cfg, m)?)?;
    let all_dominated = defects.iter().all(|s| s.dominated);
    let worst_excess = defects
        .iter()
        .map(|s| ((s.defect - s.control_value) / s.scale.max(1.0)).max(0.0))
        .fold(0.0, f64::max);
    r.checks.push(check(
        "defect_domination",
        worst_excess,
        ternary_stab::control::DOMINATION_SLACK,
        all_dominated,
    ));
    r.defect = Some(DefectSummary {
        samples: defects.len(),
        max_defect: defects.iter().map(|s| s.defect).fold(0.0, f64::max),
        max_control_value: defects.iter().map(|s| s.control_value).fold(0.0, f64::max),
        all_dominated,
    });

    let mut t = extract_map(m, p, &settings, Some(m.control()))?;
    if let Some(pr) = t.provenance.as_mut() {
        pr.scenario = Some(r.id.clone());
    }
    let summaries: Vec<TraceSummary> = t
        .traces
        .iter()
        .enumerate()
        .map(|(k, t)| summarize(k, t))
        .collect();
    let excess = summaries.iter().map(|s| s.bound_excess).fold(0.0, f64::max);
    r.checks.push(check(
        "certified_gaps",
        excess,
        GAP_SLACK,
        summaries.iter().all(|s| s.within_bounds),
    ));
    let dist = t.max_entry_distance(&m.expected_representation())?;
    r.checks.push(check(
        "expected_limit",
        dist,
        EXPECTED_LIMIT_TOL,
        dist <= EXPECTED_LIMIT_TOL,
    ));
    r.extraction = Some(ExtractionSummary {
        converged: true,
        n_used: t.provenance.as_ref().map_or(0, |pr| pr.n_used),
        max_final_gap: t
            .traces
            .iter()
            .filter_map(IterationTrace::last_gap)
            .fold(0.0, f64::max),
        expected_distance: dist,
        extracted: t.to_json(),
    });

    let vcfg = VerifyConfig {
        samples: cfg.samples,
        seed: derive_seed(seed, VERIFY_STREAM),
        tol: cfg.tol,
        radius: cfg.radius,
        iteration: settings,
        ..VerifyConfig::default()
    };
    let verdict = verify_conclusions(&t, m, m.control(), p, m.scalar_domain(), &vcfg)?;
    if let Some(extra) = verdict.check("stability_bound_with_prefactor") {
        let main = verdict.check("stability_bound").is_some_and(|c| c.passed);
        r.discrepancy = Some(BoundDiscrepancy {
            mandatory: BoundVariant::WithoutPrefactor,
            informational: BoundVariant::WithPrefactor,
            mandatory_passed: main,
            informational_passed: extra.passed,
            note: "for the {1, i} scalar domain the bound is stated without the \
                   1/(l C(d-1,l-1)) factor; both variants are reported"
                .to_string(),
        });
    }
    r.checks.extend(verdict.checks);

    match m.descriptor().exercises {
        Exercises::Exactness => {
            let v = exactness_check(
                m,
                m.control(),
                p,
                cfg.samples,
                EXACTNESS_HORIZON,
                derive_seed(seed, EXACTNESS_STREAM),
                cfg.tol,
            )?;
            let worst = v
                .premises
                .iter()
                .chain(v.conclusions.iter().flatten())
                .map(|c| c.max_residual)
                .fold(0.0, f64::max);
            r.checks.push(check("exactness", worst, cfg.tol, v.passed));
        }
        Exercises::SpanningSet => {
            let span = matrix_units_span::<f64>(m.domain());
            let zs = protected_z_samples(
                p,
                &span,
                &DEFAULT_N_LIST,
                FACTORIZATION_POINTS,
                derive_seed(seed, FACTOR_STREAM),
            )?;
            let v = factorization_check(
                m,
                p,
                Some(m.control()),
                &span,
                &zs,
                &FACTORIZATION_N,
                &settings,
                cfg.tol,
            )?;
            r.checks
                .push(check("factorization", v.max_residual, cfg.tol, v.passed));
        }
        _ => {}
    }
    Ok(())
}

fn run_scenario(m: &Scenario, p: &TrifParams, cfg: &RunConfig) -> Result<ScenarioResult, CliError> {
    let desc = m.descriptor();
    let mut r = ScenarioResult {
        id: desc.id.clone(),
        descriptor: desc.clone(),
        bounds: bound_values(m, p)?,
        discrepancy: None,
        defect: None,
        extraction: None,
        checks: Vec::new(),
        error: None,
        passed: true,
    };
    if cfg.bound_only {
        return Ok(r);
    }
    if let Err(e) = pipeline(m, p, cfg, &mut r) {
        r.error = Some(e.to_string());
    }
    r.passed = r.error.is_none() && r.checks.iter().filter(|c| c.mandatory).all(|c| c.passed);
    Ok(r)
}

/// Full pipeline over the selected catalogue scenarios, ordered by id.
pub fn report(cfg: &RunConfig) -> Result<(StabilityReport, Exit), CliError> {
    let start = Instant::now();
    cfg.validate()?;
    let p = cfg.params()?;
    let scenarios = select_scenarios(cfg, &p)?;
    let mut results = scenarios
        .par_iter()
        .map(|m| run_scenario(m, &p, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = results.iter().all(|r| r.passed);
    let exit = if results.iter().any(|r| r.error.is_some()) {
        Exit::Numeric
    } else {
        exit_for(passed)
    };
    let out = StabilityReport {
        header: Header::new("report", cfg),
        params: p.summary(),
        bound_only: cfg.bound_only,
        scenarios: results,
        passed,
        meta: Meta::since(start),
    };
    Ok((out, exit))
}

/// One row of the `bound` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub norm: f64,
    pub phi_tilde_truncated: f64,
    pub tail_bound: f64,
    pub phi_tilde_closed_form: Option<f64>,
    /// Series upper estimate times the prefactor.
    pub stability_bound: f64,
    /// Closed form of the stability bound.
    pub closed_form_bound: f64,
}

/// Control requested for the `bound` table.
pub fn bound_control(cfg: &RunConfig) -> Result<ControlFunction, CliError> {
    let b = &cfg.bound;
    match (b.delta, b.eps) {
        (Some(_), Some(_)) => Err(CliError::Input("give either delta or eps/p, not both".into())),
        (Some(delta), None) => {
            let cf = ControlFunction::constant(delta);
            cf.validate()?;
            Ok(cf)
        }
        (None, Some(eps)) => {
            let p = b.p.unwrap_or(0.0);
            if !(p.is_finite() && (0.0..1.0).contains(&p)) {
                return Err(CliError::Input(format!(
                    "p = {p} is outside the closed-form range p ∈ [0,1)"
                )));
            }
            let cf = ControlFunction::pnorm(eps, p);
            cf.validate()?;
            Ok(cf)
        }
        (None, None) => Err(CliError::Input("bound needs --delta or --eps (with --p)".into())),
    }
}

pub fn bound_rows(cfg: &RunConfig) -> Result<(ControlFunction, Vec<BoundRow>), CliError> {
    let params = cfg.params()?;
    let cf = bound_control(cfg)?;
    let pre = params.prefactor::<f64>();
    let unit = Element::matrix_unit(Shape::square(1)?, 0, 0)?;
    let mut rows = Vec::with_capacity(cfg.bound.norms.len());
    for &norm in &cfg.bound.norms {
        if !(norm.is_finite() && norm >= 0.0) {
            return Err(CliError::Input(format!(
                "norms must be finite and >= 0, got {norm}"
            )));
        }
        let cert = substituted_series(&cf, &params, &unit.scale_real(norm))?;
        let closed_form_bound = match &cf {
            ControlFunction::Pnorm { eps, p } => power_control_bound_at_norm(*eps, *p, &params, norm)?,
            _ => cert.closed_form_value.unwrap_or(cert.upper()) * pre,
        };
        rows.push(BoundRow {
            norm,
            phi_tilde_truncated: cert.truncated_value,
            tail_bound: cert.tail_bound,
            phi_tilde_closed_form: cert.closed_form_value,
            stability_bound: cert.upper() * pre,
            closed_form_bound,
        });
    }
    Ok((cf, rows))
}

/// The `bound` table as aligned text.
pub fn bound(cfg: &RunConfig) -> Result<(String, Exit), CliError> {
    let params = cfg.params()?;
    let (cf, rows) = bound_rows(cfg)?;
    let mut s = format!(
        "# control {}  (d, l) = ({}, {})  prefactor 1/{}\n",
        cf.label(),
        params.d(),
        params.l(),
        params.bound_denominator()
    );
    let cols = [
        "norm",
        "phi_tilde_truncated",
        "tail_bound",
        "phi_tilde_closed_form",
        "stability_bound",
        "closed_form_bound",
    ];
    s.push_str(cols.map(|c| format!("{c:<24}")).join(" ").trim_end());
    s.push('\n');
    for r in &rows {
        let cells = [
            fmt17(r.norm),
            fmt17(r.phi_tilde_truncated),
            fmt17(r.tail_bound),
            r.phi_tilde_closed_form.map_or("-".to_string(), fmt17),
            fmt17(r.stability_bound),
            fmt17(r.closed_form_bound),
        ];
        s.push_str(cells.map(|c| format!("{c:<24}")).join(" ").trim_end());
        s.push('\n');
    }
    Ok((s, Exit::Pass))
}
