use std::fmt::Write as _;

use helmholtz_core::expr::{Expr, Point, ZeroTester, ZeroVerdict};
use helmholtz_core::forms::determinant;
use helmholtz_core::geodesic::{
    el_residual_pointwise, evaluate_along, integrate, Acceleration, GeodesicError, NumericSpray,
};
use helmholtz_core::helmholtz::{
    check as check_helmholtz, euler_lagrange_semispray, poincare_cartan, Classification, ConditionVerdict,
    HelmholtzError, HelmholtzReport, Lagrangian,
};
use helmholtz_core::identities;
use helmholtz_core::semispray::Semispray;
use serde_json::{json, Value};

use crate::problem::Problem;
use crate::report::Status;
use crate::{InputError, Settings};

/// What a command produced, before it is wrapped into a report document.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub message: Option<String>,
    pub result: Value,
    pub text: String,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(status: Status, result: Value, text: String) -> Outcome {
        Outcome { status, message: None, result, text, csv: None }
    }

    fn failure(message: String, result: Value) -> Outcome {
        Outcome { status: Status::Fail, text: format!("FAIL {message}\n"), message: Some(message), result, csv: None }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report parts always serialize")
}

fn evidence_word(c: &ConditionVerdict) -> &'static str {
    match c.evidence {
        helmholtz_core::expr::Evidence::Proven => "proven",
        helmholtz_core::expr::Evidence::Probable => "probable",
        helmholtz_core::expr::Evidence::Fail => "FAIL",
    }
}

fn summarize(report: &HelmholtzReport) -> String {
    let mut out = String::new();
    let c = &report.conditions;
    for v in [&c.h1, &c.h2, &c.h3, &c.h4, &c.ds] {
        writeln!(out, "{:<4} {:<9} {}", v.name, evidence_word(v), v.statement).unwrap();
        if let Some(bad) = v.first_failure() {
            if let ZeroVerdict::NonZero { witness, value } = &bad.verdict {
                writeln!(out, "       {} = {value:e} at {witness}", bad.label).unwrap();
            }
        }
    }
    writeln!(out, "det g = {}", report.nondegeneracy.det).unwrap();
    match &report.classification {
        Classification::Fail(f) => {
            write!(out, "classification: fail ({}", f.condition).unwrap();
            if let Some(comp) = &f.component {
                write!(out, ", {comp}").unwrap();
            }
            if let (Some(w), Some(v)) = (&f.witness, f.value) {
                write!(out, " = {v:e} at {w}").unwrap();
            }
            writeln!(out, ")").unwrap();
        }
        cls => {
            let name = if *cls == Classification::PoincareCartan { "poincare_cartan" } else { "conservative_with_symmetry" };
            let note = if report.evidence == helmholtz_core::expr::Evidence::Probable { ", probe-level" } else { "" };
            writeln!(out, "classification: {name} (evidence {:?}{note})", report.evidence).unwrap();
        }
    }
    if let Some(l) = &report.lagrangian {
        match &l.expr {
            Some(e) => writeln!(out, "L = {e}").unwrap(),
            None => writeln!(out, "L = (numeric homotopy integral)").unwrap(),
        }
    }
    if let Some(f) = report.first_integral.as_ref().and_then(|f| f.expr.as_ref()) {
        writeln!(out, "f = {f}").unwrap();
    }
    if let Some(ds) = &report.dual_symmetry {
        let comps: Vec<String> = ds.omega_x.iter().chain(&ds.omega_y).map(|e| e.to_string()).collect();
        writeln!(out, "omega = ({})", comps.join(", ")).unwrap();
    }
    out
}

/// Maps library errors met while checking into outcomes or input errors.
fn helmholtz_failure(e: HelmholtzError) -> Result<Outcome, InputError> {
    match e {
        HelmholtzError::OracleMismatch { what, witness } => {
            let at = witness.as_ref().map(|w| format!(" at {w}")).unwrap_or_default();
            Ok(Outcome::failure(format!("local and generic {what} disagree{at}"), json!({ "oracle_mismatch": what, "witness": witness })))
        }
        HelmholtzError::HomotopyDomain { point, source } => Ok(Outcome::failure(
            format!("Lagrangian integrand undefined at {point}: {source}"),
            json!({ "homotopy_domain": to_value(&point) }),
        )),
        HelmholtzError::SingularMetric { det, witness } => {
            let at = witness.as_ref().map(|w| format!(" at {w}")).unwrap_or_default();
            Ok(Outcome::failure(format!("singular metric: det g = {det}{at}"), json!({ "singular_metric": { "det": det, "witness": witness } })))
        }
        HelmholtzError::DimensionTooLarge(n) => Err(InputError::new(format!(
            "symbolic Euler-Lagrange solve supports n <= 4, got n = {n}; rerun with --numeric-only"
        ))),
        other => Err(InputError::new(other.to_string())),
    }
}

fn report_outcome(report: &HelmholtzReport, extra: Value) -> Outcome {
    let status = if report.classification.passed() { Status::Pass } else { Status::Fail };
    let mut result = extra;
    result["report"] = to_value(report);
    let mut out = Outcome::new(status, result, summarize(report));
    if let Classification::Fail(f) = &report.classification {
        out.message = Some(format!("{} failed{}", f.condition, f.component.as_ref().map(|c| format!(" at {c}")).unwrap_or_default()));
    }
    out
}

fn problem_value(p: &Problem) -> Value {
    json!({
        "n": p.n,
        "G": p.g,
        "theta0": p.theta.as_ref().map(|t| t.theta0.to_string()),
        "theta": p.theta.as_ref().map(|t| t.theta.iter().map(Expr::to_string).collect::<Vec<_>>()),
        "L": p.lagrangian.as_ref().map(|l| l.expr.to_string()),
    })
}

pub fn check(p: &Problem, settings: &Settings) -> Result<Outcome, InputError> {
    let spray = p.require_spray()?;
    let theta = p.require_theta()?;
    match check_helmholtz(spray, theta, &settings.tester(p.n)) {
        Ok(report) => Ok(report_outcome(&report, json!({ "problem": problem_value(p) }))),
        Err(e) => helmholtz_failure(e),
    }
}

pub fn from_lagrangian(p: &Problem, settings: &Settings) -> Result<Outcome, InputError> {
    let l = p.require_lagrangian()?;
    let tester = settings.tester(p.n);
    if settings.numeric_only {
        return numeric_regularity(l, &tester);
    }
    let spray = match euler_lagrange_semispray(l, &tester) {
        Ok(s) => s,
        Err(e) => return helmholtz_failure(e),
    };
    let theta = poincare_cartan(l);
    let report = match check_helmholtz(&spray, &theta, &tester) {
        Ok(r) => r,
        Err(e) => return helmholtz_failure(e),
    };
    let derived: Vec<String> = spray.coeffs().iter().map(Expr::to_string).collect();
    let mut head = String::new();
    for (i, g) in derived.iter().enumerate() {
        writeln!(head, "G{} = {g}", i + 1).unwrap();
    }
    writeln!(head, "theta0 = {}", theta.theta0).unwrap();
    for (i, t) in theta.theta.iter().enumerate() {
        writeln!(head, "theta{} = {t}", i + 1).unwrap();
    }
    // A semispray given alongside L must agree with the derived one.
    let given = match &p.spray {
        Some(s) => {
            let diffs: Vec<Expr> = s.coeffs().iter().zip(spray.coeffs()).map(|(a, b)| a - b).collect();
            Some(tester.all_zero(&diffs).map_err(|e| InputError::new(e.to_string()))?)
        }
        None => None,
    };
    let extra = json!({
        "problem": problem_value(p),
        "G": derived,
        "theta_L": to_value(&theta),
        "given_G_matches": given,
    });
    let mut out = report_outcome(&report, extra);
    out.text = head + &out.text;
    if let Some(ZeroVerdict::NonZero { witness, value }) = &given {
        out.status = Status::Fail;
        out.message = Some(format!("given G differs from the Euler-Lagrange semispray by {value:e} at {witness}"));
        writeln!(out.text, "FAIL given G differs from the derived one by {value:e} at {witness}").unwrap();
    }
    Ok(out)
}

/// Regularity by probing `det g` and solving the linear system at each
/// probe point, without inverting the metric symbolically.
fn numeric_regularity(l: &Lagrangian, tester: &ZeroTester) -> Result<Outcome, InputError> {
    let det = determinant(&l.metric());
    let solver = NumericSpray::new(l);
    let mut used = 0;
    let mut min_abs = f64::INFINITY;
    for point in tester.points() {
        let Ok(d) = det.eval(point) else { continue };
        if d.abs() <= tester.tol() || solver.two_g(point).is_err() {
            let message = format!("singular metric: det g = {d:e} at {point}");
            return Ok(Outcome::failure(message, json!({ "singular_metric": { "det": det.to_string(), "witness": point } })));
        }
        min_abs = min_abs.min(d.abs());
        used += 1;
        if used == tester.probes() {
            break;
        }
    }
    if used < tester.probes() {
        return Err(InputError::new(format!("only {used} of {} probe points are in the domain of det g", tester.probes())));
    }
    let text = format!("det g = {det}\nregular at {used} probe points, min |det g| = {min_abs:e}\n");
    let result = json!({ "mode": "numeric", "det": det.to_string(), "probes_used": used, "min_abs_det": min_abs });
    Ok(Outcome::new(Status::Pass, result, text))
}

pub fn identities(p: &Problem, settings: &Settings) -> Result<Outcome, InputError> {
    let spray = p.require_spray()?;
    let checks = identities::run(spray, &settings.tester(p.n), settings.seed).map_err(|e| InputError::new(e.to_string()))?;
    let mut text = String::new();
    for c in &checks {
        writeln!(text, "{:<9} {}", format!("{:?}", c.evidence).to_lowercase(), c.name).unwrap();
    }
    let passed = identities::all_pass(&checks);
    let failed: Vec<&str> = checks.iter().filter(|c| c.verdict.is_nonzero()).map(|c| c.name.as_str()).collect();
    let mut out = Outcome::new(
        if passed { Status::Pass } else { Status::Fail },
        json!({ "problem": problem_value(p), "identities": to_value(&checks) }),
        text,
    );
    if !passed {
        out.message = Some(format!("failed: {}", failed.join(", ")));
    }
    Ok(out)
}

enum Field {
    Symbolic(Semispray),
    Numeric(NumericSpray),
}

impl Field {
    fn accel(&self) -> &dyn Acceleration {
        match self {
            Field::Symbolic(s) => s,
            Field::Numeric(s) => s,
        }
    }
}

fn column(values: Result<Vec<f64>, impl std::fmt::Display>, len: usize) -> Vec<f64> {
    values.unwrap_or_else(|_| vec![f64::NAN; len])
}

pub fn geodesics(p: &Problem, settings: &Settings) -> Result<Outcome, InputError> {
    let (cfg, init) = p.integrator.clone().ok_or_else(|| InputError::new("integrator: this command needs an [integrator] block"))?;
    let tester = settings.tester(p.n);
    let field = match (&p.spray, &p.lagrangian) {
        (Some(s), _) => Field::Symbolic(s.clone()),
        (None, Some(l)) if settings.numeric_only => Field::Numeric(NumericSpray::new(l)),
        (None, Some(l)) => match euler_lagrange_semispray(l, &tester) {
            Ok(s) => Field::Symbolic(s),
            Err(e) => return helmholtz_failure(e),
        },
        (None, None) => return Err(InputError::new("G: this command needs G or L")),
    };
    let traj = match integrate(field.accel(), &init, &cfg) {
        Ok(t) => t,
        Err(e) => return integration_failure(e),
    };
    let len = traj.samples.len();
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut notes = Vec::new();
    let mut lagrangian = p.lagrangian.clone();
    if let (Some(theta), Field::Symbolic(s)) = (&p.theta, &field) {
        match check_helmholtz(s, theta, &tester) {
            Ok(report) if report.classification.passed() => {
                let extracted = report.lagrangian.expect("a passing report carries L");
                let values = match report.first_integral.and_then(|f| f.expr) {
                    Some(f) => evaluate_along(&|q| f.eval(q), &traj),
                    None => evaluate_along(&|q| Ok(theta.theta0.eval(q)? - extracted.eval(q)?), &traj),
                };
                columns.push(("first_integral".to_string(), column(values, len)));
                if lagrangian.is_none() {
                    lagrangian = extracted.lagrangian();
                }
            }
            Ok(_) => notes.push("theta fails the Helmholtz check; no first-integral column".to_string()),
            Err(e) => notes.push(format!("theta could not be checked: {e}")),
        }
    }
    if let Some(l) = &lagrangian {
        columns.push(("el_residual".to_string(), column(el_residual_pointwise(l, field.accel(), &traj), len)));
    }
    let summary = column_summary(&columns);
    let last = traj.last();
    let mut text = format!("{len} samples, final state {last}\n");
    for (name, value) in &summary {
        writeln!(text, "max {name} = {value:e}").unwrap();
    }
    for n in &notes {
        writeln!(text, "note: {n}").unwrap();
    }
    let result = json!({
        "problem": problem_value(p),
        "integrator": to_value(&cfg),
        "method": traj.method,
        "samples": len,
        "final": to_value(last),
        "columns": columns.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "max_first_integral_drift": summary.iter().find(|(n, _)| n == "first_integral drift").map(|(_, v)| *v),
        "max_el_residual": summary.iter().find(|(n, _)| n == "el_residual").map(|(_, v)| *v),
        "notes": notes,
    });
    let mut out = Outcome::new(Status::Pass, result, text);
    out.csv = Some(traj.to_csv(&columns));
    Ok(out)
}

fn column_summary(columns: &[(String, Vec<f64>)]) -> Vec<(String, f64)> {
    columns
        .iter()
        .map(|(name, values)| {
            if name == "first_integral" {
                let first = values[0];
                ("first_integral drift".to_string(), values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max))
            } else {
                (name.clone(), values.iter().copied().fold(0.0, f64::max))
            }
        })
        .collect()
}

fn integration_failure(e: GeodesicError) -> Result<Outcome, InputError> {
    let last_good: Option<&Point> = match &e {
        GeodesicError::Domain { last_good, .. } => last_good.as_deref(),
        GeodesicError::BlowUp { last_good } => Some(last_good),
        _ => None,
    };
    match last_good {
        Some(p) => Ok(Outcome::failure(
            format!("{e}; last good sample at t = {}", p.t),
            json!({ "last_good": to_value(p), "error": e.to_string() }),
        )),
        None => Err(InputError::new(format!("integration cannot start: {e}"))),
    }
}
