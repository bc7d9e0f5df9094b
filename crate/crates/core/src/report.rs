//! Run configuration, the pipeline driver and the JSON report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::connections::{
    ambient_canonical_residuals, corrupt_m, curve_family, transport_vs_pushforward,
    verify_extrinsic_homogeneity, verify_homogeneous_structure, Check, Connection,
    ConnectionOptions, PipelineStructure,
};
use crate::decomposition::{
    ambient_isotropy, ambient_reductive_complement, induced_orbit_decomposition,
    principal_orbit_report, span_mismatch, DecompositionResult,
};
use crate::error::{Error, Result};
use crate::gallery::{self, Flags};
use crate::kostant::{kostant, phi_bar_gram, phi_orbit_gram, FormNormalization};
use crate::lie::{ad_invariance_check, bracket, MatrixLieAlgebra};
use crate::mat::Mat;
use crate::model::{ChartedHomSpace, FieldKind, OrbitData};
use crate::ode::OdeTolerances;
use crate::scalar::{Exact, Mode, Scalar};
use crate::subspace::Subspace;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Float gate for invariance, span and identity residuals.
    pub residual: f64,
    pub definiteness: f64,
    pub skew: f64,
    pub principal: f64,
    pub parallel: f64,
    pub lemma: f64,
    pub transport: f64,
    pub metric: f64,
    pub negative: f64,
    pub ode_atol: f64,
    pub ode_rtol: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-8,
            definiteness: 1e-6,
            skew: 1e-7,
            principal: 1e-8,
            parallel: 1e-6,
            lemma: 1e-8,
            transport: 1e-7,
            metric: 1e-7,
            negative: 1e-2,
            ode_atol: 1e-10,
            ode_rtol: 1e-9,
            fd_step: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("residual", self.residual),
            ("definiteness", self.definiteness),
            ("skew", self.skew),
            ("principal", self.principal),
            ("parallel", self.parallel),
            ("lemma", self.lemma),
            ("transport", self.transport),
            ("metric", self.metric),
            ("negative", self.negative),
            ("ode_atol", self.ode_atol),
            ("ode_rtol", self.ode_rtol),
            ("fd_step", self.fd_step),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Groups of checks a run can be restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    Decomposition,
    Kostant,
    Principal,
    Transport,
    Extrinsic,
    Ambient,
    Structure,
    Negative,
}

impl CheckGroup {
    pub const DECOMPOSE: [CheckGroup; 3] =
        [CheckGroup::Decomposition, CheckGroup::Kostant, CheckGroup::Principal];
    pub const ALL: [CheckGroup; 8] = [
        CheckGroup::Decomposition,
        CheckGroup::Kostant,
        CheckGroup::Principal,
        CheckGroup::Transport,
        CheckGroup::Extrinsic,
        CheckGroup::Ambient,
        CheckGroup::Structure,
        CheckGroup::Negative,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Input(format!("unknown check group `{s}`")))
    }
}

/// A model from the gallery with a user-supplied orbit algebra and,
/// optionally, ambient complement.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    /// Gallery fixture providing the chart and the ambient algebra.
    pub base: String,
    /// Generators of `g`, as matrix JSON objects.
    pub g: Vec<Value>,
    #[serde(default)]
    pub m_bar: Option<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub example: Option<String>,
    pub custom: Option<CustomModel>,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    pub normalization: FormNormalization,
    pub tolerances: Tolerances,
    pub checks: Option<Vec<CheckGroup>>,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            example: None,
            custom: None,
            n: 3,
            mode: Mode::Exact,
            seed: 0,
            normalization: FormNormalization::Trace,
            tolerances: Tolerances::default(),
            checks: None,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        match (&self.example, &self.custom) {
            (Some(_), Some(_)) => Err(Error::Input("give either an example or a custom model".into())),
            (None, None) => Err(Error::Input("no example or custom model selected".into())),
            _ if self.n < 3 => Err(Error::Input(format!("n must be at least 3, got {}", self.n))),
            _ => Ok(()),
        }
    }

    fn groups(&self, default: &[CheckGroup]) -> Vec<CheckGroup> {
        let mut g = self.checks.clone().unwrap_or_else(|| default.to_vec());
        g.sort();
        g.dedup();
        g
    }

    fn connection_options(&self) -> ConnectionOptions {
        let t = &self.tolerances;
        ConnectionOptions {
            seed: self.seed,
            fd_step: t.fd_step,
            ode: OdeTolerances {
                atol: t.ode_atol,
                rtol: t.ode_rtol,
                ..Default::default()
            },
            tol_parallel: t.parallel,
            tol_lemma: t.lemma,
            tol_transport: t.transport,
            tol_metric: t.metric,
            ..Default::default()
        }
    }
}

/// Inputs of one run in a given scalar type.
struct Problem<T: Scalar> {
    name: String,
    model: std::sync::Arc<dyn ChartedHomSpace<T>>,
    g: MatrixLieAlgebra<T>,
    h_bar: Subspace<T>,
    m_bar: Subspace<T>,
    expected: Option<(Subspace<T>, Subspace<T>, Subspace<T>)>,
    flags: Option<Flags>,
}

fn parse_mats<T: Scalar>(v: &[Value], size: usize, what: &str) -> Result<Vec<Mat<T>>> {
    let mats = v.iter().map(Mat::from_json).collect::<Result<Vec<Mat<T>>>>()?;
    if let Some(m) = mats.iter().find(|m| m.shape() != (size, size)) {
        return Err(Error::Input(format!(
            "{what}: expected {size}x{size} matrices, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(mats)
}

fn problem<T: Scalar>(cfg: &RunConfig) -> Result<Problem<T>> {
    if let Some(name) = &cfg.example {
        let f = gallery::build::<T>(name, cfg.n)?;
        return Ok(Problem {
            name: f.name,
            model: f.model,
            g: f.g,
            h_bar: f.h_bar,
            m_bar: f.m_bar,
            expected: Some((f.h, f.m, f.normal)),
            flags: Some(f.flags),
        });
    }
    let c = cfg
        .custom
        .as_ref()
        .ok_or_else(|| Error::Input("no model selected".into()))?;
    let base = gallery::build::<T>(&c.base, cfg.n)?;
    let model = base.model;
    let alg = model.algebra();
    let size = alg.n();
    let g_gens = parse_mats::<T>(&c.g, size, "g")?;
    if let Some(x) = g_gens.iter().find(|x| !alg.contains(x)) {
        return Err(Error::NotContained(format!("g generator {:?}", x.to_f64().data())));
    }
    let g = MatrixLieAlgebra::new("custom", size, &g_gens)?;
    let h_bar = ambient_isotropy(model.as_ref())?;
    let m_bar = match &c.m_bar {
        Some(v) => {
            let mats = parse_mats::<T>(v, size, "m_bar")?;
            let m_bar = Subspace::span(size, size, &mats)?;
            if !alg.span().contains_subspace(&m_bar) {
                return Err(Error::NotContained("m_bar".into()));
            }
            let inv = ad_invariance_check(&h_bar, &m_bar, alg, 4)?;
            let bad = match T::MODE {
                Mode::Exact => inv.bracket_residual != 0.0 || inv.conjugation_residual != 0.0,
                Mode::Float => !inv.invariant(cfg.tolerances.residual),
            };
            if bad {
                return Err(Error::Certificate {
                    name: "ad_invariance(h_bar, m_bar)".into(),
                    residual: inv.bracket_residual.max(inv.conjugation_residual),
                });
            }
            if h_bar.dim() + m_bar.dim() != alg.dim() || !Subspace::is_direct(&[&h_bar, &m_bar]) {
                return Err(Error::NotDirect(h_bar.intersect(&m_bar)?.dim()));
            }
            m_bar
        }
        None => ambient_reductive_complement(model.as_ref(), &h_bar, cfg.normalization)?.m_bar,
    };
    Ok(Problem {
        name: format!("custom:{}", c.base),
        model,
        g,
        h_bar,
        m_bar,
        expected: None,
        flags: None,
    })
}

fn gate<T: Scalar>(tol: f64) -> f64 {
    match T::MODE {
        Mode::Exact => 0.0,
        Mode::Float => tol,
    }
}

fn flag(name: &str, ok: bool) -> Check {
    Check::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
}

fn basis_json<T: Scalar>(s: &Subspace<T>) -> Value {
    Value::Array(s.basis().iter().map(Mat::to_json).collect())
}

struct Stage {
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl Stage {
    fn new() -> Self {
        Stage {
            timings: BTreeMap::new(),
            clock: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings
            .insert(name.to_string(), (now - self.clock).as_secs_f64() * 1e3);
        self.clock = now;
    }
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
        s.push('\n');
        s
    }

    /// A fixed-width table of all checks.
    pub fn render_table(&self) -> String {
        render_checks(&self.checks)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn render_checks(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:>12}  {:>10}  result\n", "check", "value", "gate");
    for c in checks {
        out.push_str(&format!(
            "{:<width$}  {:>12.3e}  {:>10.1e}  {}\n",
            c.name,
            c.value,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

fn decomposition_checks<T: Scalar>(
    p: &Problem<T>,
    orbit: &OrbitData<T>,
    d: &DecompositionResult<T>,
    tol: &Tolerances,
    checks: &mut Vec<Check>,
    observations: &mut Map<String, Value>,
) -> Result<()> {
    let c = &d.certificates;
    let r = gate::<T>(tol.residual);
    let inv = |name: &str, a: &crate::lie::AdInvariance| {
        Check::new(name, a.bracket_residual.max(a.conjugation_residual), r)
    };
    checks.push(inv("ad_invariance.h_bar_m_bar", &c.ambient));
    checks.push(inv("ad_invariance.h_m", &c.orbit));
    checks.push(inv("ad_invariance.h_n", &c.normal));
    checks.push(Check::above("h_bar_definite", c.h_bar_min_eigenvalue, tol.definiteness));
    checks.push(flag("direct.g", c.g_direct));
    checks.push(flag("direct.ambient", c.ambient_direct));
    checks.push(flag("direct.h_bar_m_n", c.three_way_direct));
    checks.push(Check::new("normal_match", c.normal_match_residual, r));
    if let Some(b) = c.proof_identity {
        checks.push(flag("h_perp_identity", b));
    }
    if let Some(b) = c.m_direct {
        checks.push(flag("m_direct", b));
    }
    if let Some((h, m, n)) = &p.expected {
        checks.push(Check::new("expected.h", span_mismatch(&d.h, h)?, r));
        checks.push(Check::new("expected.m", span_mismatch(&d.m, m)?, r));
        checks.push(Check::new("expected.n", span_mismatch(&d.n, n)?, r));
    }
    let split = c.ambient_split.bracket_residual.max(c.ambient_split.conjugation_residual);
    observations.insert(
        "ambient_split".into(),
        json!({
            "residual": split,
            "invariant": split <= r,
            "h_perp_in_h_bar_dim": d.h_perp_in_h_bar.dim(),
        }),
    );
    observations.insert(
        "dims".into(),
        json!({
            "ambient": p.model.algebra().dim(),
            "h_bar": d.h_bar.dim(),
            "g": orbit.g.dim(),
            "h": d.h.dim(),
            "m": d.m.dim(),
            "n": d.n.dim(),
            "orbit": orbit.orbit_dim(),
        }),
    );
    Ok(())
}

fn kostant_checks<T: Scalar>(
    p: &Problem<T>,
    tol: &Tolerances,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let model = p.model.as_ref();
    let o = model.base_point();
    let mut skew: f64 = 0.0;
    for x in model.algebra().basis() {
        if model.field_kind(x) == FieldKind::Killing {
            skew = skew.max(kostant(model, x)?.skew_residual);
        }
    }
    let mut iso: f64 = 0.0;
    for x in p.h_bar.basis() {
        let k = kostant(model, x)?;
        for y in model.algebra().basis() {
            let lhs = k.apply(&model.field(y, &o)?);
            let rhs = model.field(&bracket(x, y)?, &o)?;
            for (a, b) in lhs.into_iter().zip(rhs) {
                iso = iso.max((a - b).magnitude());
            }
        }
    }
    checks.push(Check::new("kostant.skew", skew, gate::<T>(tol.skew)));
    checks.push(Check::new("kostant.isotropy_identity", iso, gate::<T>(tol.skew)));
    Ok(())
}

fn run_generic<T: Scalar>(cfg: &RunConfig, default: &[CheckGroup]) -> Result<Report> {
    cfg.validate()?;
    let groups = cfg.groups(default);
    let tol = cfg.tolerances;
    let mut stage = Stage::new();
    let p = problem::<T>(cfg)?;
    let model = p.model.as_ref();
    let orbit = OrbitData::new(model, p.g.clone())?;
    let d = induced_orbit_decomposition(model, &orbit, &p.h_bar, &p.m_bar, cfg.normalization)?;
    stage.lap("decomposition");
    let mut checks = Vec::new();
    let mut observations = Map::new();
    let mut sections = Map::new();

    if groups.contains(&CheckGroup::Decomposition) {
        decomposition_checks(&p, &orbit, &d, &tol, &mut checks, &mut observations)?;
    }
    if groups.contains(&CheckGroup::Kostant) {
        kostant_checks(&p, &tol, &mut checks)?;
        stage.lap("kostant");
    }
    if groups.contains(&CheckGroup::Principal) {
        let r = principal_orbit_report(model, &orbit, &d, cfg.normalization)?;
        let principal = p.flags.map_or(r.slice_trivial, |f| f.principal);
        if principal {
            checks.push(Check::new("principal.slice", r.slice_residual, gate::<T>(1e-9)));
            checks.push(Check::new("principal.forms", r.prin_residual, gate::<T>(tol.principal)));
            checks.push(flag("principal.h_perp_phi_is_m", r.h_perp_phi_is_m));
        }
        sections.insert("principal".into(), r.to_json());
        stage.lap("principal");
    }

    let wants_float = groups.iter().any(|g| {
        matches!(
            g,
            CheckGroup::Transport
                | CheckGroup::Extrinsic
                | CheckGroup::Ambient
                | CheckGroup::Structure
                | CheckGroup::Negative
        )
    });
    if wants_float {
        let conn = connection_checks(cfg, &groups, &mut checks)?;
        sections.insert("connections".into(), conn);
        stage.lap("connections");
    }

    let passed = checks.iter().all(|c| c.passed);
    let mut grams = Map::new();
    grams.insert(
        "phi_bar_h_bar".into(),
        phi_bar_gram(model, p.h_bar.basis(), cfg.normalization)?.to_json(),
    );
    grams.insert("psi".into(), d.psi.gram().to_json());
    let mut g_basis: Vec<Mat<T>> = d.h.basis().to_vec();
    g_basis.extend(d.m.basis().iter().cloned());
    grams.insert(
        "phi_orbit_h_m".into(),
        phi_orbit_gram(model, &orbit, &g_basis, cfg.normalization)?.to_json(),
    );

    let verdicts = verdicts(&checks, &groups, &observations);
    let mut json = json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "model": p.name,
        "mode": T::MODE,
        "decomposition": {
            "h_bar": basis_json(&d.h_bar),
            "m_bar": basis_json(&d.m_bar),
            "h": basis_json(&d.h),
            "m": basis_json(&d.m),
            "n": basis_json(&d.n),
            "h_perp_in_h_bar": basis_json(&d.h_perp_in_h_bar),
            "certificates": d.to_json()["certificates"].clone(),
        },
        "grams": grams,
        "sections": sections,
        "observations": observations,
        "checks": checks,
        "verdicts": verdicts,
        "passed": passed,
    });
    if cfg.timing {
        stage.lap("report");
        json["timing_ms"] = json!(stage.timings);
    }
    Ok(Report {
        json,
        checks,
        passed,
    })
}

fn verdicts(checks: &[Check], groups: &[CheckGroup], obs: &Map<String, Value>) -> Value {
    let all = |prefixes: &[&str]| -> Value {
        let sel: Vec<&Check> = checks
            .iter()
            .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
            .collect();
        if sel.is_empty() {
            Value::Null
        } else {
            Value::Bool(sel.iter().all(|c| c.passed))
        }
    };
    let mut v = Map::new();
    v.insert(
        "induced_decomposition".into(),
        all(&["ad_invariance", "direct", "h_bar_definite", "normal_match", "expected", "h_perp", "m_direct"]),
    );
    v.insert(
        "ambient_split_not_invariant".into(),
        if groups.contains(&CheckGroup::Decomposition) {
            obs.get("ambient_split")
                .and_then(|a| a.get("invariant"))
                .and_then(Value::as_bool)
                .map_or(Value::Null, |b| Value::Bool(!b))
        } else {
            Value::Null
        },
    );
    v.insert("kostant".into(), all(&["kostant."]));
    v.insert("principal_forms".into(), all(&["principal."]));
    v.insert("pushforward_transport".into(), all(&["transport."]));
    v.insert("extrinsic_homogeneity".into(), all(&["extrinsic."]));
    v.insert("gamma_s_equivalence".into(), all(&["extrinsic.lemma_equivalence", "extrinsic.d_s_bar"]));
    v.insert("homogeneous_structure".into(), all(&["structure."]));
    v.insert("ambient_parallelism".into(), all(&["ambient."]));
    v.insert("negative_control".into(), all(&["negative."]));
    Value::Object(v)
}

fn prefixed(prefix: &str, checks: Vec<Check>) -> impl Iterator<Item = Check> + '_ {
    checks.into_iter().map(move |mut c| {
        c.name = format!("{prefix}.{}", c.name);
        c
    })
}

fn connection_checks(cfg: &RunConfig, groups: &[CheckGroup], checks: &mut Vec<Check>) -> Result<Value> {
    let p = problem::<f64>(cfg)?;
    let model = p.model.as_ref();
    let orbit = OrbitData::new(model, p.g.clone())?;
    let d = induced_orbit_decomposition(model, &orbit, &p.h_bar, &p.m_bar, cfg.normalization)?;
    let opts = cfg.connection_options();
    let mut out = Map::new();
    if groups.contains(&CheckGroup::Transport) {
        let conn = Connection::orbit(d.m.basis(), &d.m_bar);
        let mut worst: f64 = 0.0;
        for curve in curve_family(model, d.m.basis(), &opts)?.iter().filter(|c| c.pieces() == 1) {
            worst = worst.max(transport_vs_pushforward(model, &conn, &curve.generators[0], opts.ode)?);
        }
        checks.push(Check::new("transport.pushforward", worst, opts.tol_transport));
    }
    if groups.contains(&CheckGroup::Extrinsic) {
        let r = verify_extrinsic_homogeneity(model, &orbit, &d, &opts)?;
        out.insert("extrinsic".into(), r.to_json());
        checks.extend(prefixed("extrinsic", r.checks));
    }
    if groups.contains(&CheckGroup::Structure) {
        let s = PipelineStructure {
            m: d.m.basis().to_vec(),
            m_bar: d.m_bar.basis().to_vec(),
        };
        let r = verify_homogeneous_structure(model, &orbit, &s, &opts)?;
        out.insert("structure".into(), r.to_json());
        checks.extend(prefixed("structure", r.checks));
    }
    if groups.contains(&CheckGroup::Ambient) {
        match ambient_canonical_residuals(model, &d.m_bar, &opts) {
            Ok(r) => checks.extend(prefixed("ambient", r)),
            Err(Error::Conformal(why)) => {
                out.insert("ambient".into(), json!({ "skipped": format!("conformal complement: {why}") }));
            }
            Err(e) => return Err(e),
        }
    }
    if groups.contains(&CheckGroup::Negative) {
        if d.h_perp_in_h_bar.dim() == 0 {
            out.insert(
                "negative".into(),
                json!({ "skipped": "h-bar equals h, so every corruption of m stays inside g" }),
            );
        } else {
            let mut bad = d.clone();
            bad.m = corrupt_m(&d)?;
            let r = verify_extrinsic_homogeneity(model, &orbit, &bad, &opts)?;
            let v = r.get("tm_parallel").map_or(0.0, |c| c.value);
            checks.push(Check::above("negative.tm_parallel", v, cfg.tolerances.negative));
        }
    }
    out.insert(
        "coverage".into(),
        json!("sampled curves through o; the pushforward property is certified only along them"),
    );
    Ok(Value::Object(out))
}

/// Decomposition, Kostant and principal-orbit checks.
pub fn run_decompose(cfg: &RunConfig) -> Result<Report> {
    match cfg.mode {
        Mode::Exact => run_generic::<Exact>(cfg, &CheckGroup::DECOMPOSE),
        Mode::Float => run_generic::<f64>(cfg, &CheckGroup::DECOMPOSE),
    }
}

/// Everything, including the connection checks (always in floating point).
pub fn run_verify(cfg: &RunConfig) -> Result<Report> {
    match cfg.mode {
        Mode::Exact => run_generic::<Exact>(cfg, &CheckGroup::ALL),
        Mode::Float => run_generic::<f64>(cfg, &CheckGroup::ALL),
    }
}

/// Only the pushforward comparison.
pub fn run_transport(cfg: &RunConfig) -> Result<Report> {
    let mut cfg = cfg.clone();
    cfg.checks = Some(vec![CheckGroup::Transport]);
    run_verify(&cfg)
}

/// Re-reads a report and recomputes its pass flags from the stored checks.
pub fn summarize(report: &Value) -> Result<(Vec<Check>, bool)> {
    let version = report
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Input("report has no schema_version".into()))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::Input(format!("unsupported schema_version {version}")));
    }
    let checks = report
        .get("checks")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("report has no checks".into()))?
        .iter()
        .map(|c| {
            let stored: Check = serde_json::from_value(c.clone())
                .map_err(|e| Error::Input(format!("malformed check: {e}")))?;
            let again = Check::with_bound(&stored.name, stored.value, stored.tolerance, stored.bound);
            if again.passed != stored.passed {
                return Err(Error::Input(format!(
                    "check `{}` pass flag disagrees with its gate",
                    stored.name
                )));
            }
            Ok(stored)
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = checks.iter().all(|c| c.passed);
    if report.get("passed").and_then(Value::as_bool) != Some(passed) {
        return Err(Error::Input("stored pass flag disagrees with its checks".into()));
    }
    Ok((checks, passed))
}
