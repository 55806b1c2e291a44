//! Fixed-step RK4 integration of `x'' = −2G(t, x, x')` and checks along the
//! resulting paths.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Point, Var};
use crate::helmholtz::{euler_lagrange_rhs, Lagrangian};
use crate::semispray::Semispray;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("initial point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("evaluation failed at t = {t}: {source}")]
    Domain { t: f64, last_good: Option<Box<Point>>, source: StepError },
    #[error("solution left the finite range after t = {}", last_good.t)]
    BlowUp { last_good: Box<Point> },
}

impl GeodesicError {
    /// Whether the failure happened before any step was taken.
    pub fn at_start(&self) -> bool {
        matches!(self, GeodesicError::Domain { last_good: None, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is numerically singular")]
    SingularMetric,
}

/// Right-hand side `y' = a(t, x, y)` of a second-order system.
pub trait Acceleration {
    fn n(&self) -> usize;
    fn accel(&self, p: &Point, out: &mut [f64]) -> Result<(), StepError>;
}

impl Acceleration for Semispray {
    fn n(&self) -> usize {
        Semispray::n(self)
    }

    fn accel(&self, p: &Point, out: &mut [f64]) -> Result<(), StepError> {
        for (o, g) in out.iter_mut().zip(self.coeffs()) {
            *o = -2.0 * g.eval(p)?;
        }
        Ok(())
    }
}

/// Euler-Lagrange system of a Lagrangian solved pointwise by LU
/// factorisation, without symbolic inversion of the metric.
#[derive(Debug, Clone)]
pub struct NumericSpray {
    n: usize,
    metric: Vec<Vec<Expr>>,
    rhs: Vec<Expr>,
}

impl NumericSpray {
    pub fn new(l: &Lagrangian) -> NumericSpray {
        NumericSpray { n: l.n, metric: l.metric(), rhs: euler_lagrange_rhs(l) }
    }

    /// `2G` at `p`.
    pub fn two_g(&self, p: &Point) -> Result<Vec<f64>, StepError> {
        let n = self.n;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.metric[i][j].eval(p)?;
            }
        }
        let b = DVector::from_vec(self.rhs.iter().map(|e| e.eval(p)).collect::<Result<Vec<_>, _>>()?);
        let w = g.lu().solve(&b).ok_or(StepError::SingularMetric)?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(StepError::SingularMetric);
        }
        Ok(w.iter().copied().collect())
    }
}

impl Acceleration for NumericSpray {
    fn n(&self) -> usize {
        self.n
    }

    fn accel(&self, p: &Point, out: &mut [f64]) -> Result<(), StepError> {
        for (o, w) in out.iter_mut().zip(self.two_g(p)?) {
            *o = -w;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

impl IntegratorConfig {
    pub fn new(t0: f64, t1: f64, h: f64) -> Result<IntegratorConfig, GeodesicError> {
        let ok = t0.is_finite() && t1.is_finite() && h.is_finite() && h > 0.0 && (t1 - t0) / h >= 1.0;
        if ok {
            Ok(IntegratorConfig { t0, t1, h })
        } else {
            Err(GeodesicError::Config(format!("need h > 0 and (t1 - t0)/h >= 1, got t0 = {t0}, t1 = {t1}, h = {h}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n: usize,
    pub h: f64,
    pub method: &'static str,
    pub samples: Vec<Point>,
}

impl Trajectory {
    pub fn last(&self) -> &Point {
        self.samples.last().expect("a trajectory has at least one sample")
    }

    /// CSV with header `t,x1..xN,y1..yN` followed by `extra` columns, one row
    /// per sample, 17 significant digits.
    pub fn to_csv(&self, extra: &[(String, Vec<f64>)]) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n {
            write!(out, ",x{i}").unwrap();
        }
        for i in 1..=self.n {
            write!(out, ",y{i}").unwrap();
        }
        for (name, _) in extra {
            write!(out, ",{name}").unwrap();
        }
        out.push('\n');
        for (k, p) in self.samples.iter().enumerate() {
            write!(out, "{:.16e}", p.t).unwrap();
            for v in p.x.iter().chain(&p.y).chain(extra.iter().map(|(_, col)| &col[k])) {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// State with compensated (Kahan) summation of the increments.
struct State {
    z: Vec<f64>,
    carry: Vec<f64>,
}

impl State {
    fn add(&mut self, dz: &[f64]) {
        for ((z, c), d) in self.z.iter_mut().zip(&mut self.carry).zip(dz) {
            let y = d - *c;
            let s = *z + y;
            *c = (s - *z) - y;
            *z = s;
        }
    }
}

fn point(n: usize, t: f64, z: &[f64]) -> Point {
    Point::new(t, z[..n].to_vec(), z[n..].to_vec())
}

/// Derivative of the first-order state `z = (x, y)`.
fn field<A: Acceleration + ?Sized>(a: &A, t: f64, z: &[f64], out: &mut [f64]) -> Result<(), StepError> {
    let n = a.n();
    out[..n].copy_from_slice(&z[n..]);
    a.accel(&point(n, t, z), &mut out[n..])
}

/// Classical RK4 with fixed step `h`; the last step is shortened so that the
/// final sample lies at `t1`.
pub fn integrate<A: Acceleration + ?Sized>(a: &A, init: &Point, cfg: &IntegratorConfig) -> Result<Trajectory, GeodesicError> {
    let n = a.n();
    if init.n() != n {
        return Err(GeodesicError::DimensionMismatch { expected: n, got: init.n() });
    }
    let m = 2 * n;
    let mut state = State { z: init.x.iter().chain(&init.y).copied().collect(), carry: vec![0.0; m] };
    let t0 = cfg.t0;
    let mut samples = vec![Point::new(t0, init.x.clone(), init.y.clone())];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    let mut dz = vec![0.0; m];
    // Steps whose end falls within 1e-9·h of t1 land exactly on t1.
    let steps = ((cfg.t1 - t0) / cfg.h - 1e-9).ceil() as usize;
    for k in 0..steps {
        let t = samples[k].t;
        let next = if k + 1 == steps { cfg.t1 } else { t0 + (k + 1) as f64 * cfg.h };
        let h = next - t;
        // Only a failure at the initial point itself counts as being at the start.
        let fail = |source: StepError, samples: &[Point], at_sample: bool| GeodesicError::Domain {
            t,
            last_good: (k > 0 || !at_sample).then(|| Box::new(samples[k].clone())),
            source,
        };
        let z = &state.z;
        field(a, t, z, &mut k1).map_err(|e| fail(e, &samples, true))?;
        for i in 0..m {
            tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        field(a, t + 0.5 * h, &tmp, &mut k2).map_err(|e| fail(e, &samples, false))?;
        for i in 0..m {
            tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        field(a, t + 0.5 * h, &tmp, &mut k3).map_err(|e| fail(e, &samples, false))?;
        for i in 0..m {
            tmp[i] = z[i] + h * k3[i];
        }
        field(a, next, &tmp, &mut k4).map_err(|e| fail(e, &samples, false))?;
        for i in 0..m {
            dz[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        state.add(&dz);
        if state.z.iter().any(|v| !v.is_finite()) {
            return Err(GeodesicError::BlowUp { last_good: Box::new(samples[k].clone()) });
        }
        samples.push(point(n, next, &state.z));
    }
    Ok(Trajectory { n, h: cfg.h, method: "rk4", samples })
}

/// Values of `f` at each sample.
pub fn evaluate_along(f: &dyn Fn(&Point) -> Result<f64, EvalError>, traj: &Trajectory) -> Result<Vec<f64>, EvalError> {
    traj.samples.iter().map(f).collect()
}

/// `max_k |f(p_k) − f(p_0)|`.
pub fn conservation_check(f: &Expr, traj: &Trajectory) -> Result<f64, EvalError> {
    drift(&|p| f.eval(p), traj)
}

/// [`conservation_check`] for a numerically evaluated function.
pub fn drift(f: &dyn Fn(&Point) -> Result<f64, EvalError>, traj: &Trajectory) -> Result<f64, EvalError> {
    let values = evaluate_along(f, traj)?;
    Ok(values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max))
}

/// Euler-Lagrange residuals `S(∂L/∂y^i) − ∂L/∂x^i`, with the time
/// derivative taken along the semispray that generated the path.
pub fn el_residual_exprs(l: &Lagrangian, s: &Semispray) -> Vec<Expr> {
    (1..=l.n).map(|i| s.apply(&l.expr.diff(Var::Y(i))) - l.expr.diff(Var::X(i))).collect()
}

/// Largest residual per sample.
pub fn el_residual_along(l: &Lagrangian, s: &Semispray, traj: &Trajectory) -> Result<Vec<f64>, EvalError> {
    let res = el_residual_exprs(l, s);
    traj.samples
        .iter()
        .map(|p| res.iter().try_fold(0.0f64, |m, e| Ok(m.max(e.eval(p)?.abs()))))
        .collect()
}

/// Max over samples and indices of the Euler-Lagrange residual.
pub fn el_residual(l: &Lagrangian, s: &Semispray, traj: &Trajectory) -> Result<f64, EvalError> {
    Ok(el_residual_along(l, s, traj)?.into_iter().fold(0.0, f64::max))
}

/// Largest residual `g_ij ẏ^j + ∂²L/∂t∂y^i + y^k ∂²L/∂x^k∂y^i − ∂L/∂x^i`
/// per sample, with `ẏ` taken from `a`. Works for any acceleration field.
pub fn el_residual_pointwise<A: Acceleration + ?Sized>(l: &Lagrangian, a: &A, traj: &Trajectory) -> Result<Vec<f64>, StepError> {
    let g = l.metric();
    let rhs = euler_lagrange_rhs(l);
    let mut acc = vec![0.0; l.n];
    traj.samples
        .iter()
        .map(|p| {
            a.accel(p, &mut acc)?;
            let mut worst = 0.0f64;
            for (row, r) in g.iter().zip(&rhs) {
                let mut v = r.eval(p)?;
                for (gij, aj) in row.iter().zip(&acc) {
                    v += gij.eval(p)? * aj;
                }
                worst = worst.max(v.abs());
            }
            Ok(worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn harmonic() -> Semispray {
        Semispray::parse(1, &["x1/2"]).unwrap()
    }

    #[test]
    fn free_particle_is_exact() {
        let traj = integrate(&Semispray::free(1), &Point::new(0.0, vec![0.0], vec![1.0]), &IntegratorConfig::new(0.0, 2.0, 0.1).unwrap()).unwrap();
        assert!((traj.last().x[0] - 2.0).abs() < 1e-12);
        assert_eq!(traj.last().t, 2.0);
        let x = parse("x1", 1).unwrap();
        assert!((conservation_check(&x, &traj).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(conservation_check(&parse("y1", 1).unwrap(), &traj).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_half_period() {
        let cfg = IntegratorConfig::new(0.0, PI, 1e-3).unwrap();
        let traj = integrate(&harmonic(), &Point::new(0.0, vec![1.0], vec![0.0]), &cfg).unwrap();
        assert!((traj.last().x[0] + 1.0).abs() < 1e-6);
        assert_eq!(traj.last().t, PI);
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn critically_damped() {
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let cfg = IntegratorConfig::new(0.0, 3.0, 1e-3).unwrap();
        let traj = integrate(&s, &Point::new(0.0, vec![1.0], vec![-1.0]), &cfg).unwrap();
        for p in &traj.samples {
            assert!((p.x[0] - (-p.t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn residual_flags_mismatched_pair() {
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-2).unwrap();
        let traj = integrate(&harmonic(), &Point::new(0.0, vec![1.0], vec![0.0]), &cfg).unwrap();
        let free = Lagrangian::new(1, parse("y1^2/2", 1).unwrap());
        assert!(el_residual(&free, &harmonic(), &traj).unwrap() > 0.1);
        let matched = Lagrangian::new(1, parse("(y1^2 - x1^2)/2", 1).unwrap());
        assert!(el_residual(&matched, &harmonic(), &traj).unwrap() < 1e-12);
    }

    #[test]
    fn numeric_spray_agrees_with_symbolic() {
        let l = Lagrangian::new(1, parse("exp(2*t)*(y1^2 - x1^2)/2", 1).unwrap());
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 1e-2).unwrap();
        let init = Point::new(0.0, vec![0.3], vec![0.2]);
        let a = integrate(&NumericSpray::new(&l), &init, &cfg).unwrap();
        let b = integrate(&s, &init, &cfg).unwrap();
        assert!((a.last().x[0] - b.last().x[0]).abs() < 1e-12);
    }

    #[test]
    fn domain_errors_report_position() {
        let s = Semispray::parse(1, &["1/x1"]).unwrap();
        let cfg = IntegratorConfig::new(0.0, 1.0, 0.1).unwrap();
        let err = integrate(&s, &Point::new(0.0, vec![0.0], vec![0.0]), &cfg).unwrap_err();
        assert!(err.at_start());
        let s = Semispray::parse(1, &["ln(1 - t)"]).unwrap();
        let err = integrate(&s, &Point::new(0.0, vec![0.0], vec![0.0]), &IntegratorConfig::new(0.0, 2.0, 0.1).unwrap()).unwrap_err();
        assert!(!err.at_start());
        let s = Semispray::parse(1, &["-y1^2"]).unwrap();
        let err = integrate(&s, &Point::new(0.0, vec![0.0], vec![10.0]), &IntegratorConfig::new(0.0, 5.0, 0.01).unwrap()).unwrap_err();
        assert!(matches!(err, GeodesicError::BlowUp { .. } | GeodesicError::Domain { .. }), "{err:?}");
        assert!(IntegratorConfig::new(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn pointwise_residual_agrees_with_symbolic() {
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let l = Lagrangian::new(1, parse("exp(2*t)*(y1^2 - x1^2)/2", 1).unwrap());
        let traj = integrate(&s, &Point::new(0.0, vec![1.0], vec![-1.0]), &IntegratorConfig::new(0.0, 1.0, 0.01).unwrap()).unwrap();
        assert!(el_residual_pointwise(&l, &NumericSpray::new(&l), &traj).unwrap().iter().all(|r| *r < 1e-10));
        let wrong = el_residual_pointwise(&l, &Semispray::free(1), &traj).unwrap();
        let symbolic = el_residual_along(&l, &Semispray::free(1), &traj).unwrap();
        for (a, b) in wrong.iter().zip(&symbolic) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
        assert!(wrong[0] > 0.1);
    }

    #[test]
    fn csv_layout() {
        let traj = integrate(&Semispray::free(2), &Point::new(0.0, vec![0.0, 1.0], vec![1.0, 0.0]), &IntegratorConfig::new(0.0, 1.0, 0.5).unwrap()).unwrap();
        let csv = traj.to_csv(&[("f".to_string(), vec![1.0, 1.0, 1.0])]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,y1,y2,f");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0");
    }
}
