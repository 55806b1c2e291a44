//! Tri-state zero testing: canonical form first, random probing second.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::{EvalError, Expr, Point};

pub const DEFAULT_PROBES: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-9;
const OVERSAMPLING: usize = 10;
const BOX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroVerdict {
    ProvenZero,
    ProbablyZero { probes: usize, max_abs: f64 },
    NonZero { witness: Point, value: f64 },
}

/// Strength of a zero claim, ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Fail,
    Probable,
    Proven,
}

impl ZeroVerdict {
    pub fn evidence(&self) -> Evidence {
        match self {
            ZeroVerdict::ProvenZero => Evidence::Proven,
            ZeroVerdict::ProbablyZero { .. } => Evidence::Probable,
            ZeroVerdict::NonZero { .. } => Evidence::Fail,
        }
    }

    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn is_nonzero(&self) -> bool {
        !self.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("only {found} of {needed} probe points were in the domain of `{expr}` (last error: {last})")]
    Exhausted { needed: usize, found: usize, expr: String, last: EvalError },
}

/// Probing zero tester. Sample points are a deterministic function of the
/// seed, so repeated runs give identical verdicts.
#[derive(Debug, Clone)]
pub struct ZeroTester {
    n: usize,
    probes: usize,
    tol: f64,
    seed: u64,
    probe_only: bool,
    points: Vec<Point>,
}

impl ZeroTester {
    pub fn new(n: usize, probes: usize, tol: f64, seed: u64) -> ZeroTester {
        assert!(probes >= 1, "at least one probe is required");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = || rng.random_range(-BOX..=BOX);
        let points = (0..probes * OVERSAMPLING)
            .map(|_| {
                let t = sample();
                let x = (0..n).map(|_| sample()).collect();
                let y = (0..n).map(|_| sample()).collect();
                Point { t, x, y }
            })
            .collect();
        ZeroTester { n, probes, tol, seed, probe_only: false, points }
    }

    pub fn with_defaults(n: usize, seed: u64) -> ZeroTester {
        ZeroTester::new(n, DEFAULT_PROBES, DEFAULT_TOL, seed)
    }

    /// Skip the canonical-form shortcut, so that no verdict is stronger
    /// than `ProbablyZero`.
    pub fn probe_only(mut self, on: bool) -> ZeroTester {
        self.probe_only = on;
        self
    }

    pub fn is_probe_only(&self) -> bool {
        self.probe_only
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probes(&self) -> usize {
        self.probes
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The full pool of candidate sample points, in probing order.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_zero(&self, e: &Expr) -> Result<ZeroVerdict, ProbeError> {
        if e.is_zero() && !self.probe_only {
            return Ok(ZeroVerdict::ProvenZero);
        }
        let mut used = 0;
        let mut max_abs: f64 = 0.0;
        let mut last = None;
        for p in &self.points {
            let mut mag = 0.0;
            match e.eval_tracked(p, &mut mag) {
                Ok(v) => {
                    if v.abs() > self.tol * (1.0 + mag) {
                        return Ok(ZeroVerdict::NonZero { witness: p.clone(), value: v });
                    }
                    max_abs = max_abs.max(v.abs());
                    used += 1;
                    if used == self.probes {
                        return Ok(ZeroVerdict::ProbablyZero { probes: used, max_abs });
                    }
                }
                Err(err) => last = Some(err),
            }
        }
        Err(ProbeError::Exhausted {
            needed: self.probes,
            found: used,
            expr: e.to_string(),
            last: last.expect("a skipped probe recorded its error"),
        })
    }

    /// Joint verdict for a family: first nonzero member wins, otherwise the
    /// weakest evidence.
    pub fn all_zero<'a, I>(&self, es: I) -> Result<ZeroVerdict, ProbeError>
    where
        I: IntoIterator<Item = &'a Expr>,
    {
        let mut out = ZeroVerdict::ProvenZero;
        for e in es {
            match self.is_zero(e)? {
                ZeroVerdict::ProvenZero => {}
                nz @ ZeroVerdict::NonZero { .. } => return Ok(nz),
                ZeroVerdict::ProbablyZero { probes, max_abs } => {
                    let prev = match out {
                        ZeroVerdict::ProbablyZero { max_abs: m, .. } => m,
                        _ => 0.0,
                    };
                    out = ZeroVerdict::ProbablyZero { probes, max_abs: prev.max(max_abs) };
                }
            }
        }
        Ok(out)
    }
}
