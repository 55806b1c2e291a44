//! Floating-point evaluation at a point of the jet space.

use serde::Serialize;
use thiserror::Error;

use super::{Expr, Func, Node, Var};

/// A point `(t, x, y)`; `x` and `y` have the ambient length `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Point {
        assert_eq!(x.len(), y.len(), "x and y must have the same length");
        Point { t, x, y }
    }

    pub fn origin(n: usize) -> Point {
        Point { t: 0.0, x: vec![0.0; n], y: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => Some(self.t),
            Var::X(i) => i.checked_sub(1).and_then(|k| self.x.get(k).copied()),
            Var::Y(i) => i.checked_sub(1).and_then(|k| self.y.get(k).copied()),
        }
    }

    /// Coordinates in frame order `(t, x1..xn, y1..yn)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.n());
        v.push(self.t);
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v
    }

    pub fn from_slice(v: &[f64]) -> Point {
        let n = (v.len() - 1) / 2;
        Point { t: v[0], x: v[1..=n].to_vec(), y: v[n + 1..].to_vec() }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(t={}", self.t)?;
        for (i, v) in self.x.iter().enumerate() {
            write!(f, ", x{}={}", i + 1, v)?;
        }
        for (i, v) in self.y.iter().enumerate() {
            write!(f, ", y{}={}", i + 1, v)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{subtree}`")]
    Domain { subtree: String },
    #[error("division by zero in `{subtree}`")]
    DivisionByZero { subtree: String },
    #[error("non-finite value in `{subtree}`")]
    NonFinite { subtree: String },
    #[error("variable {var} is not defined at the point")]
    MissingVariable { var: Var },
}

impl Expr {
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        let mut mag = 0.0;
        self.eval_tracked(p, &mut mag)
    }

    /// Evaluate while recording the largest intermediate magnitude in `mag`.
    pub fn eval_tracked(&self, p: &Point, mag: &mut f64) -> Result<f64, EvalError> {
        let v = match self.node() {
            Node::Num(q) => q.to_f64(),
            Node::Var(v) => p.get(*v).ok_or(EvalError::MissingVariable { var: *v })?,
            Node::Add(c, ts) => {
                let mut acc = c.to_f64();
                for (m, k) in ts {
                    let term = k.to_f64() * m.eval_tracked(p, mag)?;
                    *mag = mag.max(term.abs());
                    acc += term;
                }
                acc
            }
            Node::Mul(c, fs) => {
                let mut acc = c.to_f64();
                for (b, e) in fs {
                    acc *= pow_eval(self, b.eval_tracked(p, mag)?, e)?;
                }
                acc
            }
            Node::Pow(b, e) => pow_eval(self, b.eval_tracked(p, mag)?, e)?,
            Node::Func(f, u) => {
                let a = u.eval_tracked(p, mag)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(EvalError::Domain { subtree: self.to_string() });
                        }
                        a.ln()
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalError::NonFinite { subtree: self.to_string() });
        }
        *mag = mag.max(v.abs());
        Ok(v)
    }
}

fn pow_eval(node: &Expr, b: f64, e: &super::Q) -> Result<f64, EvalError> {
    if b == 0.0 && e.is_negative() {
        return Err(EvalError::DivisionByZero { subtree: node.to_string() });
    }
    if e.is_integer() {
        if let Some(k) = e.to_i64().and_then(|k| i32::try_from(k).ok()) {
            return Ok(b.powi(k));
        }
    }
    let ef = e.to_f64();
    if b >= 0.0 {
        return Ok(b.powf(ef));
    }
    // Negative base: real only for odd denominators.
    let den_odd = e.denom().bit(0);
    if !den_odd {
        return Err(EvalError::Domain { subtree: node.to_string() });
    }
    let mag = (-b).powf(ef);
    Ok(if e.numer().bit(0) { -mag } else { mag })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn pt(t: f64, x: f64, y: f64) -> Point {
        Point::new(t, vec![x], vec![y])
    }

    #[test]
    fn evaluates_examples() {
        let e = parse("y1^2/2", 1).unwrap();
        assert_eq!(e.eval(&pt(0.0, 1.0, 3.0)).unwrap(), 4.5);
        let e = parse("exp(2*t)", 1).unwrap();
        assert_eq!(e.eval(&pt(0.0, 5.0, 5.0)).unwrap(), 1.0);
        let e = parse("(-8)^(1/3) + x1^(2/3)", 1).unwrap();
        assert!((e.eval(&pt(0.0, -8.0, 0.0)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_offending_subtree() {
        let e = parse("1/x1", 1).unwrap();
        assert!(matches!(e.eval(&pt(0.0, 0.0, 1.0)), Err(EvalError::DivisionByZero { subtree }) if subtree == "x1^(-1)"));
        let e = parse("ln(x1) + 1", 1).unwrap();
        assert!(matches!(e.eval(&pt(0.0, -1.0, 1.0)), Err(EvalError::Domain { subtree }) if subtree == "ln(x1)"));
        let e = parse("sqrt(x1)", 1).unwrap();
        assert!(matches!(e.eval(&pt(0.0, -1.0, 1.0)), Err(EvalError::Domain { .. })));
        let e = parse("y2", 2).unwrap();
        assert!(matches!(e.eval(&pt(0.0, 1.0, 1.0)), Err(EvalError::MissingVariable { .. })));
    }

    #[test]
    fn tracks_intermediate_magnitude() {
        let e = parse("x1^2 - x1^2 + 1", 1).unwrap();
        let mut mag = 0.0;
        e.eval_tracked(&pt(0.0, 10.0, 0.0), &mut mag).unwrap();
        assert_eq!(mag, 1.0);
        let e = parse("(x1 + 1)^2 - x1^2 - 2*x1", 1).unwrap();
        let mut mag = 0.0;
        assert_eq!(e.eval_tracked(&pt(0.0, 10.0, 0.0), &mut mag).unwrap(), 1.0);
    }
}
