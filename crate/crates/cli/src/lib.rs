//! Batch runner over JSON instances.
//!
//! An instance is a JSON object with `"field"`, `"shape"` and exactly one
//! payload key: `"module"` (with `"filtration"`), `"monodromy"`, `"germ"` or
//! `"classes"`. Optional keys: `"command"` (default command), `"seed"`,
//! `"scramble"` (apply a seeded random basis change before running),
//! `"other"` (second object for `iso`), `"direction"` (for `solve-ell`) and
//! `"expect"` (monodromy data that `extract` must reproduce).

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use phinlab_core::coeff::{GaloisShape, Level, ProductElement};
use phinlab_core::cohomology::{self, H1Tate, H1Trivial};
use phinlab_core::colmez::{self, FamilyGerm};
use phinlab_core::filtration::{is_admissible, Filtration};
use phinlab_core::json as pj;
use phinlab_core::monodromy::{self, MonodromyData};
use phinlab_core::padic::LocalFieldDesc;
use phinlab_core::phin::{is_isomorphic, PhiNModule};
use phinlab_core::{Error, ErrorKind};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub const COMMANDS: &[&str] = &[
    "validate",
    "newton",
    "hodge",
    "admissible",
    "build-monodromy",
    "build-w",
    "extract",
    "end0-check",
    "iso",
    "cup",
    "colmez",
    "degenerate",
    "gamma-check",
    "solve-ell",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("command {command} needs a {needs} payload")]
    PayloadMismatch {
        command: String,
        needs: &'static str,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.kind() == ErrorKind::Precision => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Precision => "precision",
                ErrorKind::Input => "input",
                ErrorKind::Structure => "structure",
            },
            CliError::UnknownCommand(_) | CliError::PayloadMismatch { .. } => "usage",
            CliError::Io { .. } | CliError::Json(_) => "input",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Overrides the instance's declared precision.
    pub precision: Option<u32>,
    /// Overrides the instance's seed.
    pub seed: Option<u64>,
    /// Include wall-clock timing in reports (breaks byte-level determinism).
    pub timing: bool,
}

#[derive(Clone, Debug)]
pub enum Payload {
    Module {
        module: PhiNModule,
        filtration: Filtration,
        other: Option<(PhiNModule, Filtration)>,
    },
    Monodromy {
        data: MonodromyData,
        other: Option<MonodromyData>,
    },
    Germ {
        germ: FamilyGerm,
        direction: Option<ProductElement>,
    },
    Classes {
        x: Option<H1Trivial>,
        y: Option<H1Tate>,
    },
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub desc: Arc<LocalFieldDesc>,
    pub shape: GaloisShape,
    pub payload: Payload,
    pub command: Option<String>,
    pub seed: u64,
    pub scramble: bool,
    pub expect: Option<MonodromyData>,
}

const PAYLOAD_KEYS: &[&str] = &["module", "monodromy", "germ", "classes"];

/// Parse and validate an instance. `precision` overrides the declared one.
pub fn parse_instance(bytes: &[u8], precision: Option<u32>) -> CliResult<Instance> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| CliError::Json(e.to_string()))?;
    if !v.is_object() {
        return Err(Error::Parse {
            pointer: String::new(),
            message: "expected an object".into(),
        }
        .into());
    }
    let (f, fp) = pj::get(&v, "", "field")?;
    let mut desc = pj::field_from_json(f, &fp)?;
    if let Some(p) = precision {
        desc = desc.with_prec(p)?;
    }
    let desc = Arc::new(desc);
    let (s, sp) = pj::get(&v, "", "shape")?;
    let shape = pj::shape_from_json(s, &sp)?;
    let present: Vec<&str> = PAYLOAD_KEYS
        .iter()
        .copied()
        .filter(|k| v.get(*k).is_some())
        .collect();
    if present.len() != 1 {
        return Err(Error::Parse {
            pointer: String::new(),
            message: format!("expected exactly one of {PAYLOAD_KEYS:?}, found {present:?}"),
        }
        .into());
    }
    let other = v.get("other");
    let payload = match present[0] {
        "module" => {
            let (module, filtration) = module_pair(&v, "", shape, &desc)?;
            let other = match other {
                Some(o) => Some(module_pair(o, "/other", shape, &desc)?),
                None => None,
            };
            Payload::Module {
                module,
                filtration,
                other,
            }
        }
        "monodromy" => {
            let data = monodromy_data(&v["monodromy"], "/monodromy", shape, &desc)?;
            let other = match other {
                Some(o) => Some(monodromy_data(o, "/other", shape, &desc)?),
                None => None,
            };
            Payload::Monodromy { data, other }
        }
        "germ" => {
            let germ = pj::germ_from_json(shape, &desc, &v["germ"], "/germ")?;
            let direction = match v.get("direction") {
                Some(d) => Some(pj::product_from_json(
                    shape,
                    Level::K,
                    &desc,
                    d,
                    "/direction",
                )?),
                None => None,
            };
            Payload::Germ { germ, direction }
        }
        _ => {
            let c = &v["classes"];
            let x = match c.get("x") {
                Some(x) => Some(pj::h1_trivial_from_json(shape, &desc, x, "/classes/x")?),
                None => None,
            };
            let y = match c.get("y") {
                Some(y) => Some(pj::h1_tate_from_json(shape, &desc, y, "/classes/y")?),
                None => None,
            };
            Payload::Classes { x, y }
        }
    };
    let command = match v.get("command") {
        Some(c) => Some(
            c.as_str()
                .ok_or_else(|| Error::Parse {
                    pointer: "/command".into(),
                    message: "expected a string".into(),
                })?
                .to_string(),
        ),
        None => None,
    };
    let seed = match v.get("seed") {
        Some(s) => s.as_u64().ok_or_else(|| Error::Parse {
            pointer: "/seed".into(),
            message: "expected a nonnegative integer".into(),
        })?,
        None => 0,
    };
    let scramble = v.get("scramble").and_then(Value::as_bool).unwrap_or(false);
    let expect = match v.get("expect") {
        Some(e) => Some(pj::monodromy_from_json(shape, &desc, e, "/expect")?),
        None => None,
    };
    Ok(Instance {
        desc,
        shape,
        payload,
        command,
        seed,
        scramble,
        expect,
    })
}

fn module_pair(
    v: &Value,
    ptr: &str,
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
) -> CliResult<(PhiNModule, Filtration)> {
    let (m, mp) = pj::get(v, ptr, "module")?;
    let module = pj::module_from_json(shape, desc, m, &mp)?;
    module.validate()?;
    let (f, fp) = pj::get(v, ptr, "filtration")?;
    let filtration = pj::filtration_from_json(shape, desc, module.rank(), f, &fp)?;
    Ok((module, filtration))
}

fn monodromy_data(
    v: &Value,
    ptr: &str,
    shape: GaloisShape,
    desc: &Arc<LocalFieldDesc>,
) -> CliResult<MonodromyData> {
    let data = pj::monodromy_from_json(shape, desc, v, ptr)?;
    data.check()?;
    Ok(data)
}

pub fn parse_instance_file(path: &Path, precision: Option<u32>) -> CliResult<Instance> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_instance(&bytes, precision)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub instance: String,
    pub command: String,
    /// `pass`, `fail`, `value` or `error`.
    pub status: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}: {}", self.instance, self.command, self.status);
        if let Some(v) = &self.value {
            s.push_str(&format!(" {v}"));
        }
        if let Some(w) = &self.witness {
            s.push_str(&format!(" witness={w}"));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(" [{}] {}", e.kind, e.message));
        }
        s
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// What a command produced before it is wrapped in a [`Report`].
struct Outcome {
    verdict: Option<bool>,
    value: Option<Value>,
    witness: Option<Value>,
}

impl Outcome {
    fn verdict(v: bool) -> Self {
        Outcome {
            verdict: Some(v),
            value: None,
            witness: None,
        }
    }

    fn value(v: Value) -> Self {
        Outcome {
            verdict: None,
            value: Some(v),
            witness: None,
        }
    }
}

/// Run one command on a parsed instance. Errors become `error` reports.
pub fn run(command: &str, instance: &Instance, label: &str, opts: &Options) -> Report {
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(instance.seed);
    let result = dispatch(command, instance, seed);
    let mut report = Report {
        instance: label.to_string(),
        command: command.to_string(),
        status: "value",
        exit_code: 0,
        verdict: None,
        value: None,
        witness: None,
        error: None,
        precision: Some(instance.desc.prec()),
        seed,
        timing_ms: None,
    };
    match result {
        Ok(out) => {
            if let Some(v) = out.verdict {
                report.status = if v { "pass" } else { "fail" };
                report.exit_code = if v { 0 } else { 1 };
            }
            report.verdict = out.verdict;
            report.value = out.value;
            report.witness = out.witness;
        }
        Err(e) => report = error_report(report, &e),
    }
    if opts.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    report
}

fn error_report(mut r: Report, e: &CliError) -> Report {
    r.status = "error";
    r.exit_code = e.exit_code();
    r.error = Some(ErrorReport {
        kind: e.kind(),
        message: e.to_string(),
    });
    r
}

/// Parse then run; parse failures are reported like command failures.
pub fn run_file(command: Option<&str>, path: &Path, label: &str, opts: &Options) -> Report {
    let blank = |command: &str| Report {
        instance: label.to_string(),
        command: command.to_string(),
        status: "error",
        exit_code: 2,
        verdict: None,
        value: None,
        witness: None,
        error: None,
        precision: opts.precision,
        seed: opts.seed.unwrap_or(0),
        timing_ms: None,
    };
    match parse_instance_file(path, opts.precision) {
        Ok(inst) => match command.map(str::to_string).or_else(|| inst.command.clone()) {
            Some(c) => run(&c, &inst, label, opts),
            None => error_report(blank("?"), &CliError::UnknownCommand("none given".into())),
        },
        Err(e) => error_report(blank(command.unwrap_or("?")), &e),
    }
}

fn needs(command: &str, kind: &'static str) -> CliError {
    CliError::PayloadMismatch {
        command: command.to_string(),
        needs: kind,
    }
}

/// The filtered module carried by a module or monodromy payload.
fn filtered(command: &str, inst: &Instance, seed: u64) -> CliResult<(PhiNModule, Filtration)> {
    let (m, f) = match &inst.payload {
        Payload::Module {
            module, filtration, ..
        } => (module.clone(), filtration.clone()),
        Payload::Monodromy { data, .. } => build(data)?,
        _ => return Err(needs(command, "module or monodromy")),
    };
    if inst.scramble {
        Ok(m.random_transport(&f, seed)?)
    } else {
        Ok((m, f))
    }
}

fn build(data: &MonodromyData) -> CliResult<(PhiNModule, Filtration)> {
    Ok(if data.degenerate {
        monodromy::build_degenerate(data)?
    } else {
        monodromy::build_monodromy(data)?
    })
}

fn rational_json(r: phinlab_core::padic::Rational) -> Value {
    if r.is_integer() {
        json!(r.to_integer())
    } else {
        json!(r.to_string())
    }
}

fn module_json(m: &PhiNModule, f: &Filtration) -> Value {
    json!({"module": pj::module_to_json(m), "filtration": pj::filtration_to_json(f)})
}

fn dispatch(command: &str, inst: &Instance, seed: u64) -> CliResult<Outcome> {
    match command {
        "validate" => {
            let (m, _) = filtered(command, inst, seed)?;
            m.validate()?;
            Ok(Outcome::verdict(true))
        }
        "newton" => {
            let (m, _) = filtered(command, inst, seed)?;
            Ok(Outcome::value(rational_json(m.newton_number()?)))
        }
        "hodge" => {
            let (_, f) = filtered(command, inst, seed)?;
            Ok(Outcome::value(json!(f.hodge_number())))
        }
        "admissible" => {
            let (m, f) = filtered(command, inst, seed)?;
            let v = is_admissible(&m, &f)?;
            let witness = v.violations.first().map(|w| {
                json!({
                    "basis": w.submodule.bases().iter().map(pj::matrix_to_json).collect::<Vec<_>>(),
                    "t_n": rational_json(w.t_n),
                    "t_h": w.t_h,
                })
            });
            let mut out = Outcome::verdict(v.admissible);
            out.value = Some(
                json!({"t_n": rational_json(v.t_n), "t_h": v.t_h, "submodules_checked": v.checked.len()}),
            );
            out.witness = witness;
            Ok(out)
        }
        "build-monodromy" => match &inst.payload {
            Payload::Monodromy { data, .. } => {
                let (m, f) = build(data)?;
                Ok(Outcome::value(module_json(&m, &f)))
            }
            _ => Err(needs(command, "monodromy")),
        },
        "build-w" => match &inst.payload {
            Payload::Monodromy { data, .. } => {
                let (m, f) = monodromy::build_w(&data.ell, &data.k)?;
                Ok(Outcome::value(module_json(&m, &f)))
            }
            _ => Err(needs(command, "monodromy")),
        },
        "extract" => {
            let (m, f) = filtered(command, inst, seed)?;
            let got = monodromy::extract_invariants(&m, &f)?;
            let mut out = Outcome::value(pj::monodromy_to_json(&got));
            let reference = match (&inst.expect, &inst.payload) {
                (Some(e), _) => Some(e),
                (None, Payload::Monodromy { data, .. }) => Some(data),
                _ => None,
            };
            if let Some(e) = reference {
                out.verdict = Some(got.same_as(e)?);
            }
            Ok(out)
        }
        "end0-check" => match &inst.payload {
            Payload::Monodromy { data, .. } => {
                let direct = monodromy::end0_map_is_isomorphism(&data.alpha, &data.k, &data.ell)?;
                let zero_m = MonodromyData {
                    m: vec![0; data.m.len()],
                    ..data.clone()
                };
                let (m, f) = monodromy::build_monodromy_unchecked(&zero_m)?;
                let (e, ef) = monodromy::end0_filtered(&m, &f)?;
                let (w, wf) = monodromy::build_w(&data.ell, &data.k)?;
                let iso = is_isomorphic(&e, &ef, &w, &wf)?;
                let mut out = Outcome::verdict(direct && iso);
                out.value = Some(json!({"explicit_map": direct, "is_isomorphic": iso}));
                Ok(out)
            }
            _ => Err(needs(command, "monodromy")),
        },
        "iso" => match &inst.payload {
            Payload::Module {
                other: Some((m2, f2)),
                ..
            } => {
                let (m1, f1) = filtered(command, inst, seed)?;
                Ok(Outcome::verdict(is_isomorphic(&m1, &f1, m2, f2)?))
            }
            Payload::Monodromy {
                data,
                other: Some(o),
            } => {
                let v = if data.degenerate && o.degenerate {
                    monodromy::iso_degenerate(data, o)?
                } else {
                    let (m1, f1) = filtered(command, inst, seed)?;
                    let (m2, f2) = build(o)?;
                    is_isomorphic(&m1, &f1, &m2, &f2)?
                };
                Ok(Outcome::verdict(v))
            }
            _ => Err(needs(command, "module or monodromy with \"other\"")),
        },
        "cup" => match &inst.payload {
            Payload::Classes {
                x: Some(x),
                y: Some(y),
            } => Ok(Outcome::value(pj::h2_to_json(&cohomology::cup(x, y)?))),
            _ => Err(needs(command, "classes with x and y")),
        },
        "colmez" => Ok(Outcome::value(pj::element_to_json(&colmez::colmez_form(
            germ(command, inst)?,
        )?))),
        "degenerate" => Ok(Outcome::value(pj::element_to_json(
            &colmez::degenerate_form(germ(command, inst)?)?,
        ))),
        "gamma-check" => {
            let g = germ(command, inst)?;
            let (gamma, residual) = colmez::gamma_consistency(g)?;
            let form = colmez::colmez_form(g)?;
            let mut out = Outcome::verdict(residual == form);
            out.value = Some(
                json!({"gamma": pj::product_to_json(&gamma), "residual": pj::element_to_json(&residual)}),
            );
            Ok(out)
        }
        "solve-ell" => match &inst.payload {
            Payload::Germ {
                germ,
                direction: Some(d),
            } => {
                let s = colmez::solve_ell_scalar(germ, d)?;
                let ell = d.scale(&s);
                Ok(Outcome::value(
                    json!({"scalar": pj::element_to_json(&s), "ell": pj::product_to_json(&ell)}),
                ))
            }
            _ => Err(needs(command, "germ with \"direction\"")),
        },
        other => Err(CliError::UnknownCommand(other.to_string())),
    }
}

fn germ<'a>(command: &str, inst: &'a Instance) -> CliResult<&'a FamilyGerm> {
    match &inst.payload {
        Payload::Germ { germ, .. } => Ok(germ),
        _ => Err(needs(command, "germ")),
    }
}

/// One manifest entry: an instance path relative to the manifest and the
/// command to run (defaults to the instance's own `"command"`).
#[derive(Clone, Debug)]
pub struct Entry {
    pub path: String,
    pub command: Option<String>,
}

/// `{"instances": [{"path": "...", "command": "..."}, ...]}`.
pub fn parse_manifest(path: &Path) -> CliResult<(PathBuf, Vec<Entry>)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let v: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Json(e.to_string()))?;
    let (items, ip) = pj::get(&v, "", "instances")?;
    let entries = pj::array(items, &ip)?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let ep = format!("{ip}/{i}");
            let (p, pp) = pj::get(e, &ep, "path")?;
            let path = p
                .as_str()
                .ok_or_else(|| Error::Parse {
                    pointer: pp,
                    message: "expected a string".into(),
                })?
                .to_string();
            let command = e.get("command").and_then(Value::as_str).map(str::to_string);
            Ok(Entry { path, command })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((base, entries))
}

/// Reports in manifest order on a pool of `jobs` threads.
pub fn run_batch(manifest: &Path, jobs: usize, opts: &Options) -> CliResult<Vec<Report>> {
    let (base, entries) = parse_manifest(manifest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io {
            path: "thread pool".into(),
            message: e.to_string(),
        })?;
    Ok(pool.install(|| {
        entries
            .par_iter()
            .map(|e| run_file(e.command.as_deref(), &base.join(&e.path), &e.path, opts))
            .collect()
    }))
}

/// Maximum of the per-report exit codes.
pub fn aggregate_exit(reports: &[Report]) -> i32 {
    reports.iter().map(|r| r.exit_code).max().unwrap_or(0)
}
