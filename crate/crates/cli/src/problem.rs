//! Problem files: TOML with the expression grammar embedded as strings.
//!
//! ```toml
//! n = 1
//! G = ["y1 + x1/2"]
//! theta0 = "exp(2*t)*(y1^2 - x1^2)/2"
//! theta = ["exp(2*t)*y1"]
//! L = "exp(2*t)*(y1^2 - x1^2)/2"
//! seed = 7
//!
//! [integrator]
//! t0 = 0.0
//! t1 = 3.0
//! h = 0.001
//! x = [1.0]
//! y = [-1.0]
//! ```

use std::path::Path;

use helmholtz_core::expr::{parse, Expr, Point, MAX_DIM};
use helmholtz_core::geodesic::IntegratorConfig;
use helmholtz_core::helmholtz::{Lagrangian, SemiBasicOneForm};
use helmholtz_core::semispray::Semispray;
use serde::Deserialize;

use crate::InputError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: i64,
    #[serde(rename = "G", default)]
    pub g: Option<Vec<String>>,
    pub theta0: Option<String>,
    pub theta: Option<Vec<String>>,
    #[serde(rename = "L")]
    pub l: Option<String>,
    pub seed: Option<u64>,
    pub probes: Option<usize>,
    pub tol: Option<f64>,
    pub integrator: Option<IntegratorBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A validated problem with every expression parsed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub n: usize,
    pub g: Option<Vec<String>>,
    pub spray: Option<Semispray>,
    pub theta: Option<SemiBasicOneForm>,
    pub lagrangian: Option<Lagrangian>,
    pub seed: Option<u64>,
    pub probes: Option<usize>,
    pub tol: Option<f64>,
    pub integrator: Option<(IntegratorConfig, Point)>,
}

fn expr(field: &str, text: &str, n: usize) -> Result<Expr, InputError> {
    parse(text, n).map_err(|e| InputError::new(format!("{field}: {e} in `{text}`")))
}

fn exprs(field: &str, texts: &[String], n: usize) -> Result<Vec<Expr>, InputError> {
    if texts.len() != n {
        return Err(InputError::new(format!("{field}: expected {n} entries, got {}", texts.len())));
    }
    texts.iter().enumerate().map(|(i, t)| expr(&format!("{field}[{}]", i + 1), t, n)).collect()
}

impl ProblemFile {
    pub fn from_toml(text: &str) -> Result<ProblemFile, InputError> {
        toml::from_str(text).map_err(|e| InputError::new(format!("malformed problem file: {e}")))
    }

    pub fn read(path: &Path) -> Result<ProblemFile, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError::new(format!("cannot read {}: {e}", path.display())))?;
        ProblemFile::from_toml(&text)
            .map_err(|e| InputError::new(format!("{}: {}", path.display(), e.message)))
    }

    pub fn validate(&self) -> Result<Problem, InputError> {
        if self.n < 1 || self.n > MAX_DIM as i64 {
            return Err(InputError::new(format!("n: must be between 1 and {MAX_DIM}, got {}", self.n)));
        }
        let n = self.n as usize;
        let spray = match &self.g {
            Some(g) => Some(Semispray::new(n, exprs("G", g, n)?).map_err(|e| InputError::new(format!("G: {e}")))?),
            None => None,
        };
        let theta = match (&self.theta0, &self.theta) {
            (Some(t0), Some(t)) => Some(SemiBasicOneForm::new(expr("theta0", t0, n)?, exprs("theta", t, n)?)),
            (None, None) => None,
            (Some(_), None) => return Err(InputError::new("theta0 given without theta")),
            (None, Some(_)) => return Err(InputError::new("theta given without theta0")),
        };
        let lagrangian = match &self.l {
            Some(l) => Some(Lagrangian::new(n, expr("L", l, n)?)),
            None => None,
        };
        if self.probes == Some(0) {
            return Err(InputError::new("probes: must be at least 1"));
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(InputError::new(format!("tol: must be positive, got {tol}")));
            }
        }
        let integrator = match &self.integrator {
            Some(b) => {
                if b.x.len() != n || b.y.len() != n {
                    return Err(InputError::new(format!(
                        "integrator: x and y need {n} entries, got {} and {}",
                        b.x.len(),
                        b.y.len()
                    )));
                }
                let cfg = IntegratorConfig::new(b.t0, b.t1, b.h).map_err(|e| InputError::new(format!("integrator: {e}")))?;
                Some((cfg, Point::new(b.t0, b.x.clone(), b.y.clone())))
            }
            None => None,
        };
        Ok(Problem {
            n,
            g: self.g.clone(),
            spray,
            theta,
            lagrangian,
            seed: self.seed,
            probes: self.probes,
            tol: self.tol,
            integrator,
        })
    }
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, InputError> {
        ProblemFile::read(path)?.validate()
    }

    pub fn require_spray(&self) -> Result<&Semispray, InputError> {
        self.spray.as_ref().ok_or_else(|| InputError::new("G: this command needs the semispray coefficients"))
    }

    pub fn require_theta(&self) -> Result<&SemiBasicOneForm, InputError> {
        self.theta.as_ref().ok_or_else(|| InputError::new("theta: this command needs theta0 and theta"))
    }

    pub fn require_lagrangian(&self) -> Result<&Lagrangian, InputError> {
        self.lagrangian.as_ref().ok_or_else(|| InputError::new("L: this command needs a Lagrangian"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Problem, InputError> {
        ProblemFile::from_toml(text)?.validate()
    }

    #[test]
    fn full_file_parses() {
        let p = load(
            r#"
n = 1
G = ["y1 + x1/2"]
theta0 = "exp(2*t)*(y1^2 - x1^2)/2"
theta = ["exp(2*t)*y1"]
seed = 9

[integrator]
t0 = 0.0
t1 = 1.0
h = 0.01
x = [1.0]
y = [-1.0]
"#,
        )
        .unwrap();
        assert_eq!(p.n, 1);
        assert!(p.spray.is_some() && p.theta.is_some() && p.lagrangian.is_none());
        assert_eq!(p.seed, Some(9));
        assert_eq!(p.integrator.unwrap().1.y, vec![-1.0]);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(load("n = 0\nG = []").unwrap_err().message.contains("n:"));
        assert!(load("n = 1\nG = [\"y1\", \"y2\"]").unwrap_err().message.contains("expected 1"));
        assert!(load("n = 1\nG = [\"y3\"]").unwrap_err().message.contains("G[1]"));
        assert!(load("n = 1\nG = [\"y1\"]\ntheta0 = \"y1\"").unwrap_err().message.contains("theta"));
        assert!(load("n = 1\nG = [\"y1\"]\ncolour = 3").unwrap_err().message.contains("colour"));
        assert!(load("n = 1\nG = [\"(y1\"]").unwrap_err().message.contains("byte"));
        let e = load("n = 1\nG = [\"y1\"\n").unwrap_err();
        assert!(e.message.contains("line"), "{}", e.message);
    }
}
