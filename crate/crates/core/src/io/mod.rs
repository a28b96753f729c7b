//! Experiment configuration, check orchestration and byte-stable report output.

mod runs;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::distributions::{Strategy, TestFunction};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "feynman-index/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Eta,
    Xi,
    Index,
    PropagatorCheck,
    DistCheck,
    Hadamard,
    FullSuite,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Eta,
        Command::Xi,
        Command::Index,
        Command::PropagatorCheck,
        Command::DistCheck,
        Command::Hadamard,
        Command::FullSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Eta => "eta",
            Command::Xi => "xi",
            Command::Index => "index",
            Command::PropagatorCheck => "propagator-check",
            Command::DistCheck => "dist-check",
            Command::Hadamard => "hadamard",
            Command::FullSuite => "full-suite",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| config_err("command", format!("unknown command `{s}`")))
    }
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectorConfig {
    pub random_matrices: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub tolerance: f64,
    pub splitting_tolerance: f64,
    pub splitting_times: Vec<f64>,
}

impl Default for ProjectorConfig {
    fn default() -> Self {
        Self {
            random_matrices: 200,
            min_dim: 2,
            max_dim: 8,
            tolerance: 1e-10,
            splitting_tolerance: 1e-12,
            splitting_times: vec![-2.5, -0.7, -0.1, 0.1, 0.7, 2.5],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorConfig {
    pub flux: f64,
    pub k: usize,
    pub t_minus: f64,
    pub t_plus: f64,
    pub nodes: usize,
    pub levels: usize,
    pub expected_order: f64,
    pub order_tolerance: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { flux: 0.25, k: 3, t_minus: 0.0, t_plus: 4.0, nodes: 81, levels: 4, expected_order: 2.0, order_tolerance: 0.25 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EtaConfig {
    pub fluxes: Vec<String>,
    pub k: usize,
    pub tolerance: f64,
}

impl Default for EtaConfig {
    fn default() -> Self {
        Self { fluxes: ["0.1", "0.25", "0.4", "0.6", "0.9"].map(String::from).to_vec(), k: 200, tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GaugePathConfig {
    pub a_minus: String,
    pub a_plus: String,
    pub expected_index: i64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IndexConfig {
    pub paths: Vec<GaugePathConfig>,
    pub k: usize,
    pub duration: f64,
    pub integrality_tolerance: f64,
    pub xi_tolerance: f64,
    pub duality_tolerance: f64,
    pub density_tolerance: f64,
}

fn default_paths() -> Vec<GaugePathConfig> {
    [("0.3", "1.3", 1), ("0.25", "-1.75", -2), ("0.3", "0.9", 0)]
        .iter()
        .map(|(a, b, i)| GaugePathConfig { a_minus: a.to_string(), a_plus: b.to_string(), expected_index: *i })
        .collect()
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            paths: default_paths(),
            k: 128,
            duration: 4.0,
            integrality_tolerance: 1e-3,
            xi_tolerance: 2e-3,
            duality_tolerance: 1e-8,
            density_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default = "default_envelope")]
    pub envelope: String,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
}

fn default_envelope() -> String {
    "gaussian".into()
}

impl TestFunctionConfig {
    fn build(&self, field: &str) -> Result<TestFunction> {
        let terms: Vec<(Vec<u32>, f64)> = self.terms.iter().map(|t| (t.exponents.clone(), t.coefficient)).collect();
        let r = match self.envelope.as_str() {
            "gaussian" => TestFunction::gaussian_poly(self.center.clone(), self.width, &terms),
            "bump" => TestFunction::bump(self.center.clone(), self.width, &terms),
            other => return Err(config_err(&format!("{field}.envelope"), format!("unknown envelope `{other}`"))),
        };
        r.map_err(|e| config_err(field, e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionConfig {
    pub n: usize,
    pub betas: Vec<String>,
    pub lambda: String,
    pub tolerance: f64,
    pub delta_tolerance: f64,
    pub constant_tolerance: f64,
    pub strategy: String,
    pub ladder: Option<Vec<f64>>,
    /// Test functions of dimension `n` for the identities; the delta checks
    /// use their restrictions to each dimension they need.
    pub test_functions: Vec<TestFunctionConfig>,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        let tf = |c: &[f64], w: f64, terms: &[(&[u32], f64)]| TestFunctionConfig {
            center: c.to_vec(),
            width: w,
            envelope: default_envelope(),
            terms: terms.iter().map(|(e, c)| TermConfig { exponents: e.to_vec(), coefficient: *c }).collect(),
        };
        Self {
            n: 2,
            betas: ["0.5", "1", "1.5"].map(String::from).to_vec(),
            lambda: "1".into(),
            tolerance: 1e-6,
            delta_tolerance: 1e-3,
            constant_tolerance: 1e-12,
            strategy: "ladder".into(),
            ladder: None,
            test_functions: vec![
                tf(&[0.0, 0.0], 1.0, &[]),
                tf(&[0.3, -0.2], 0.8, &[(&[0, 0], 1.0), (&[1, 0], 0.5), (&[0, 2], -0.3)]),
                tf(&[-0.4, 0.5], 1.2, &[(&[0, 0], 1.0), (&[2, 1], 0.2)]),
            ],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HadamardConfig {
    /// Real constant potential, row-major.
    pub potential: Vec<Vec<f64>>,
    pub k_max: usize,
    pub base_point: Vec<f64>,
    pub segment_end: Vec<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub profile_points: usize,
    /// Order of the transport check on the twisted cylinders.
    pub cylinder_k_max: usize,
}

impl Default for HadamardConfig {
    fn default() -> Self {
        Self {
            potential: vec![vec![0.3, 0.1], vec![-0.2, 0.5]],
            k_max: 3,
            base_point: vec![1.6, -0.2],
            segment_end: vec![2.3, 0.4],
            samples: 10,
            tolerance: 1e-8,
            profile_points: 41,
            cylinder_k_max: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub projectors: ProjectorConfig,
    pub propagator: PropagatorConfig,
    pub eta: EtaConfig,
    pub index: IndexConfig,
    pub distributions: DistributionConfig,
    pub hadamard: HadamardConfig,
}

pub fn parse_decimal(s: &str, field: &str) -> Result<f64> {
    let t = s.trim();
    let ok = !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E'));
    match t.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(config_err(field, format!("`{s}` is not a decimal number"))),
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(field, "tolerance must be positive"))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.command {
            Command::parse(c)?;
        }
        let p = &self.projectors;
        positive(p.tolerance, "projectors.tolerance")?;
        positive(p.splitting_tolerance, "projectors.splitting_tolerance")?;
        if p.min_dim == 0 || p.min_dim > p.max_dim {
            return Err(config_err("projectors.min_dim", "need 1 <= min_dim <= max_dim"));
        }
        let g = &self.propagator;
        positive(g.order_tolerance, "propagator.order_tolerance")?;
        if g.levels < 2 {
            return Err(config_err("propagator.levels", "need at least two levels"));
        }
        if !(g.t_minus < g.t_plus) {
            return Err(config_err("propagator.t_plus", "need t_minus < t_plus"));
        }
        positive(self.eta.tolerance, "eta.tolerance")?;
        for (i, a) in self.eta.fluxes.iter().enumerate() {
            parse_decimal(a, &format!("eta.fluxes[{i}]"))?;
        }
        let ix = &self.index;
        positive(ix.integrality_tolerance, "index.integrality_tolerance")?;
        positive(ix.xi_tolerance, "index.xi_tolerance")?;
        positive(ix.duality_tolerance, "index.duality_tolerance")?;
        positive(ix.density_tolerance, "index.density_tolerance")?;
        positive(ix.duration, "index.duration")?;
        for (i, path) in ix.paths.iter().enumerate() {
            parse_decimal(&path.a_minus, &format!("index.paths[{i}].a_minus"))?;
            parse_decimal(&path.a_plus, &format!("index.paths[{i}].a_plus"))?;
        }
        let d = &self.distributions;
        positive(d.tolerance, "distributions.tolerance")?;
        positive(d.delta_tolerance, "distributions.delta_tolerance")?;
        positive(d.constant_tolerance, "distributions.constant_tolerance")?;
        if !(d.n == 2 || d.n == 3) {
            return Err(config_err("distributions.n", "n must be 2 or 3"));
        }
        for (i, b) in d.betas.iter().enumerate() {
            parse_decimal(b, &format!("distributions.betas[{i}]"))?;
        }
        parse_decimal(&d.lambda, "distributions.lambda")?;
        self.strategy()?;
        for (i, t) in d.test_functions.iter().enumerate() {
            let f = format!("distributions.test_functions[{i}]");
            if t.center.len() != d.n {
                return Err(config_err(&format!("{f}.center"), format!("expected {} coordinates", d.n)));
            }
            t.build(&f)?;
        }
        let h = &self.hadamard;
        positive(h.tolerance, "hadamard.tolerance")?;
        let r = h.potential.len();
        if r == 0 || h.potential.iter().any(|row| row.len() != r) {
            return Err(config_err("hadamard.potential", "potential must be a nonempty square matrix"));
        }
        if h.base_point.len() != 2 || h.segment_end.len() != 2 {
            return Err(config_err("hadamard.base_point", "points have two coordinates"));
        }
        if h.samples == 0 {
            return Err(config_err("hadamard.samples", "need at least one sample"));
        }
        Ok(())
    }

    pub fn strategy(&self) -> Result<Strategy> {
        let d = &self.distributions;
        match d.strategy.as_str() {
            "ladder" => match &d.ladder {
                Some(l) if l.len() < 6 || l.iter().any(|e| !(*e > 0.0)) => {
                    Err(config_err("distributions.ladder", "need at least 6 positive epsilons"))
                }
                Some(l) => Ok(Strategy::EpsilonLadder(l.clone())),
                None => Ok(Strategy::default()),
            },
            "boundary" => Ok(Strategy::BoundaryValue),
            other => Err(config_err("distributions.strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Exact closed form or algebraic identity.
    Exact,
    /// Independent numerical or analytic route.
    Oracle,
    /// Value quoted as stated, not re-derived.
    Stated,
}

impl ReferenceSource {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceSource::Exact => "exact",
            ReferenceSource::Oracle => "oracle",
            ReferenceSource::Stated => "stated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub criterion: u32,
    pub value: Value,
    pub reference: Value,
    pub deviation: f64,
    pub tolerance: f64,
    pub source: ReferenceSource,
    pub pass: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, criterion: u32, value: Value, reference: Value, deviation: f64, tolerance: f64, source: ReferenceSource) -> Self {
        Self {
            name: name.into(),
            criterion,
            value,
            reference,
            deviation,
            tolerance,
            source,
            pass: deviation <= tolerance,
            note: None,
        }
    }

    pub fn error(name: impl Into<String>, criterion: u32, err: &Error) -> Self {
        Self {
            name: name.into(),
            criterion,
            value: Value::Null,
            reference: Value::Null,
            deviation: f64::INFINITY,
            tolerance: 0.0,
            source: ReferenceSource::Exact,
            pass: false,
            note: Some(format!("{}: {err}", err.code())),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("criterion".into(), json!(self.criterion));
        m.insert("value".into(), self.value.clone());
        m.insert("reference".into(), self.reference.clone());
        m.insert("deviation".into(), num(self.deviation));
        m.insert("tolerance".into(), num(self.tolerance));
        m.insert("reference_source".into(), json!(self.source.name()));
        m.insert("pass".into(), json!(self.pass));
        if let Some(n) = &self.note {
            m.insert("note".into(), json!(n));
        }
        Value::Object(m)
    }
}

/// Floats travel as tagged objects until emission so that formatting stays
/// under our control.
pub fn num(v: f64) -> Value {
    json!({ "$f": v.to_bits() })
}

pub fn cnum(z: C64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub config_echo: Value,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
    /// Wall-clock seconds per section; written separately from the report.
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut by_criterion: BTreeMap<u32, bool> = BTreeMap::new();
        for c in &self.checks {
            *by_criterion.entry(c.criterion).or_insert(true) &= c.pass;
        }
        let crit: serde_json::Map<String, Value> =
            by_criterion.iter().map(|(k, v)| (format!("{k:02}"), json!(v))).collect();
        json!({
            "schema": REPORT_SCHEMA,
            "command": self.command.name(),
            "seed": self.seed,
            "config": self.config_echo,
            "checks": self.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "criteria": Value::Object(crit),
            "pass": self.pass(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = String::new();
        write_json(&self.to_json(), 0, &mut s);
        s.push('\n');
        s
    }

    /// Writes `report.json`, one CSV per table and `timing.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, text: &str| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        };
        put("report.json", &self.to_json_string())?;
        for (name, table) in &self.tables {
            put(&format!("{name}.csv"), &emit_csv(table)?)?;
        }
        let timing: serde_json::Map<String, Value> = self.timing.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
        let mut s = String::new();
        write_json(&Value::Object(timing), 0, &mut s);
        s.push('\n');
        put("timing.json", &s)
    }
}

/// 17 significant digits, exponent form; non-finite values become strings.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "\"NaN\"".into()
    } else if v.is_infinite() {
        if v > 0.0 { "\"Infinity\"" } else { "\"-Infinity\"" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn float_of(v: &Value) -> Option<f64> {
    let m = v.as_object()?;
    if m.len() != 1 {
        return None;
    }
    m.get("$f")?.as_u64().map(f64::from_bits)
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    if let Some(f) = float_of(v) {
        out.push_str(&format_float(f));
        return;
    }
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(a) if !a.is_empty() => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if !m.is_empty() => {
            // serde_json's map is ordered by key
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Number(n) if n.is_f64() => out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN))),
        other => out.push_str(&other.to_string()),
    }
}

fn cell(v: &Value) -> String {
    if let Some(f) = float_of(v) {
        return format_float(f).trim_matches('"').to_string();
    }
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

pub fn emit_csv(t: &Table) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&t.header).map_err(io)?;
    for r in &t.rows {
        w.write_record(r.iter().map(cell)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Config as it was understood, with all defaults filled in.
fn echo(cfg: &ExperimentConfig) -> Value {
    let p = &cfg.projectors;
    let g = &cfg.propagator;
    let d = &cfg.distributions;
    let h = &cfg.hadamard;
    let floats = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>();
    json!({
        "projectors": {
            "random_matrices": p.random_matrices, "min_dim": p.min_dim, "max_dim": p.max_dim,
            "tolerance": num(p.tolerance), "splitting_tolerance": num(p.splitting_tolerance),
            "splitting_times": floats(&p.splitting_times),
        },
        "propagator": {
            "flux": num(g.flux), "k": g.k, "t_minus": num(g.t_minus), "t_plus": num(g.t_plus),
            "nodes": g.nodes, "levels": g.levels, "expected_order": num(g.expected_order),
            "order_tolerance": num(g.order_tolerance),
        },
        "eta": { "fluxes": cfg.eta.fluxes, "k": cfg.eta.k, "tolerance": num(cfg.eta.tolerance) },
        "index": {
            "paths": cfg.index.paths.iter().map(|p| json!({"a_minus": p.a_minus, "a_plus": p.a_plus, "expected_index": p.expected_index})).collect::<Vec<_>>(),
            "k": cfg.index.k, "duration": num(cfg.index.duration),
            "integrality_tolerance": num(cfg.index.integrality_tolerance), "xi_tolerance": num(cfg.index.xi_tolerance),
            "duality_tolerance": num(cfg.index.duality_tolerance), "density_tolerance": num(cfg.index.density_tolerance),
        },
        "distributions": {
            "n": d.n, "betas": d.betas, "lambda": d.lambda, "tolerance": num(d.tolerance),
            "delta_tolerance": num(d.delta_tolerance), "constant_tolerance": num(d.constant_tolerance),
            "strategy": d.strategy, "ladder": d.ladder.as_ref().map(|l| floats(l)),
            "test_functions": d.test_functions.iter().map(|t| json!({
                "center": floats(&t.center), "width": num(t.width), "envelope": t.envelope,
                "terms": t.terms.iter().map(|x| json!({"exponents": x.exponents, "coefficient": num(x.coefficient)})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        },
        "hadamard": {
            "potential": h.potential.iter().map(|r| floats(r)).collect::<Vec<_>>(), "k_max": h.k_max,
            "base_point": floats(&h.base_point), "segment_end": floats(&h.segment_end),
            "samples": h.samples, "tolerance": num(h.tolerance), "profile_points": h.profile_points,
            "cylinder_k_max": h.cylinder_k_max,
        },
    })
}

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Runs `command`; module errors become failing checks.
pub fn run(command: Command, cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<Report> {
    cfg.validate()?;
    if let Some(c) = &cfg.command {
        if Command::parse(c)? != command {
            return Err(config_err("command", format!("config is for `{c}`, not `{}`", command.name())));
        }
    }
    let seed = seed_override.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let mut report = Report {
        command,
        seed,
        config: cfg.clone(),
        config_echo: echo(cfg),
        checks: Vec::new(),
        tables: BTreeMap::new(),
        timing: BTreeMap::new(),
    };
    let sections: Vec<Command> = match command {
        Command::FullSuite => vec![
            Command::PropagatorCheck,
            Command::DistCheck,
            Command::Eta,
            Command::Xi,
            Command::Index,
            Command::Hadamard,
        ],
        c => vec![c],
    };
    let start = Instant::now();
    for s in sections {
        let t = Instant::now();
        let (checks, tables) = match s {
            Command::Eta => runs::eta(cfg),
            Command::Xi => runs::xi(cfg),
            Command::Index => runs::index(cfg),
            Command::PropagatorCheck => runs::propagator(cfg, seed),
            Command::DistCheck => runs::distributions(cfg),
            Command::Hadamard => runs::hadamard(cfg),
            Command::FullSuite => unreachable!(),
        };
        report.checks.extend(checks);
        report.tables.extend(tables);
        report.timing.insert(s.name().to_string(), t.elapsed().as_secs_f64());
    }
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}
