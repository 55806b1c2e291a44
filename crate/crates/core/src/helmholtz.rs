//! Helmholtz conditions for a semi-basic 1-form along a semispray, and the
//! objects a passing form produces: Lagrangian, first integral, dual symmetry.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Evidence, Expr, Func, Node, Point, ProbeError, Var, ZeroTester, ZeroVerdict, MAX_DIM, Q};
use crate::forms::{self, determinant, FormError, KForm};
use crate::semispray::{Indexed, Semispray, SprayGeometry, Variance};

/// Largest dimension for which the Euler-Lagrange solve uses symbolic
/// cofactors.
pub const MAX_SYMBOLIC_SOLVE: usize = 4;

const QUADRATURE_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HelmholtzError {
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("local expression for {what} disagrees with the generic operators")]
    OracleMismatch { what: String, witness: Option<Point> },
    #[error("no dual symmetry: every a_i vanishes")]
    NoDualSymmetry,
    #[error("singular metric: det g = {det}")]
    SingularMetric { det: String, witness: Option<Point> },
    #[error("symbolic Euler-Lagrange solve supports n <= {MAX_SYMBOLIC_SOLVE}, got n = {0}")]
    DimensionTooLarge(usize),
    #[error("homotopy integrand undefined at {point}: {source}")]
    HomotopyDomain { point: Point, source: EvalError },
}

/// `θ = θ_0 dt + θ_i δx^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemiBasicOneForm {
    pub theta0: Expr,
    pub theta: Vec<Expr>,
}

impl SemiBasicOneForm {
    pub fn new(theta0: Expr, theta: Vec<Expr>) -> SemiBasicOneForm {
        SemiBasicOneForm { theta0, theta }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Components in the adapted cobasis `(dt, δx^i, δy^i)`.
    pub fn adapted(&self) -> KForm {
        let n = self.n();
        let mut comps = vec![self.theta0.clone()];
        comps.extend(self.theta.iter().cloned());
        comps.extend((0..n).map(|_| Expr::zero()));
        KForm::one_form(n, comps)
    }

    /// Coordinate form `(θ_0 − θ_i y^i) dt + θ_i dx^i`; `δx^i = dx^i − y^i dt`
    /// does not depend on the semispray.
    pub fn to_coords(&self) -> KForm {
        let n = self.n();
        let mut dt = vec![self.theta0.clone()];
        dt.extend(self.theta.iter().enumerate().map(|(i, th)| -(th * &Expr::y(i + 1))));
        let mut comps = vec![Expr::add_all(dt)];
        comps.extend(self.theta.iter().cloned());
        comps.extend((0..n).map(|_| Expr::zero()));
        KForm::one_form(n, comps)
    }

    /// Inverse of [`to_coords`](Self::to_coords). `None` when the form has a
    /// `dy` component.
    pub fn from_coords(w: &KForm) -> Option<SemiBasicOneForm> {
        let n = w.n();
        let c = w.one_form_comps();
        if c[n + 1..].iter().any(|e| !e.is_zero()) {
            return None;
        }
        let theta: Vec<Expr> = c[1..=n].to_vec();
        let mut t0 = vec![c[0].clone()];
        t0.extend(theta.iter().enumerate().map(|(i, th)| th * &Expr::y(i + 1)));
        Some(SemiBasicOneForm { theta0: Expr::add_all(t0), theta })
    }

    /// `θ + E dt`.
    pub fn plus_dt(&self, e: &Expr) -> SemiBasicOneForm {
        SemiBasicOneForm { theta0: &self.theta0 + e, theta: self.theta.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lagrangian {
    pub n: usize,
    pub expr: Expr,
}

impl Lagrangian {
    pub fn new(n: usize, expr: Expr) -> Lagrangian {
        Lagrangian { n, expr }
    }

    /// `g_ij = ∂²L/∂y^i∂y^j`.
    pub fn metric(&self) -> Vec<Vec<Expr>> {
        let dl: Vec<Expr> = (1..=self.n).map(|i| self.expr.diff(Var::Y(i))).collect();
        (1..=self.n).map(|i| (1..=self.n).map(|j| dl[i - 1].diff(Var::Y(j))).collect()).collect()
    }
}

/// `θ_L = L dt + ∂L/∂y^i δx^i`.
pub fn poincare_cartan(l: &Lagrangian) -> SemiBasicOneForm {
    SemiBasicOneForm {
        theta0: l.expr.clone(),
        theta: (1..=l.n).map(|i| l.expr.diff(Var::Y(i))).collect(),
    }
}

/// Components of `dθ` in the adapted cobasis, plus `∇θ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HelmholtzQuantities {
    pub n: usize,
    /// `a_i = ∂θ_0/∂y^i − θ_i`
    pub a: Vec<Expr>,
    /// `b_i = δ_iθ_0 − ∇θ_i`
    pub b: Vec<Expr>,
    /// `b_ij = δ_jθ_i − δ_iθ_j`
    pub b_ij: Vec<Vec<Expr>>,
    /// `g_ij = ∂θ_i/∂y^j`
    pub g: Vec<Vec<Expr>>,
    pub nabla_theta: Vec<Expr>,
}

pub fn helmholtz_quantities(geom: &SprayGeometry, theta: &SemiBasicOneForm) -> Result<HelmholtzQuantities, HelmholtzError> {
    let n = geom.n();
    if theta.n() != n {
        return Err(HelmholtzError::DimensionMismatch { expected: n, got: theta.n() });
    }
    let nabla_theta = covector_nabla(geom, &theta.theta);
    let a = (0..n).map(|i| &theta.theta0.diff(Var::Y(i + 1)) - &theta.theta[i]).collect();
    let b = (0..n).map(|i| &geom.conn.horizontal(i, &theta.theta0) - &nabla_theta[i]).collect();
    let delta: Vec<Vec<Expr>> =
        (0..n).map(|i| (0..n).map(|j| geom.conn.horizontal(j, &theta.theta[i])).collect()).collect();
    let b_ij = (0..n).map(|i| (0..n).map(|j| &delta[i][j] - &delta[j][i]).collect()).collect();
    let g = (0..n).map(|i| (0..n).map(|j| theta.theta[i].diff(Var::Y(j + 1))).collect()).collect();
    Ok(HelmholtzQuantities { n, a, b, b_ij, g, nabla_theta })
}

fn covector_nabla(geom: &SprayGeometry, v: &[Expr]) -> Vec<Expr> {
    geom.nabla_components(&Indexed::covector(v.to_vec())).expect("covector has rank 1").comps
}

fn lower2_nabla(geom: &SprayGeometry, m: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = geom.n();
    geom.nabla_components(&Indexed::matrix([Variance::Lower; 2], m)).expect("rank 2").rows(n)
}

/// Covariant derivatives of the quantities that enter the conditions.
struct Derived {
    nabla_a: Vec<Expr>,
    nabla_b: Vec<Expr>,
    nabla_nabla_a: Vec<Expr>,
    nabla_b_ij: Vec<Vec<Expr>>,
    nabla_g: Vec<Vec<Expr>>,
    /// `R^j_i a_j`
    ra: Vec<Expr>,
    /// `g_ik R^k_j`
    gr: Vec<Vec<Expr>>,
}

impl Derived {
    fn new(geom: &SprayGeometry, q: &HelmholtzQuantities) -> Derived {
        let n = q.n;
        let r = &geom.jacobi().r;
        let nabla_a = covector_nabla(geom, &q.a);
        let nabla_nabla_a = covector_nabla(geom, &nabla_a);
        let ra = (0..n).map(|i| (0..n).map(|j| &r[j][i] * &q.a[j]).sum()).collect();
        let gr = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &q.g[i][k] * &r[k][j]).sum()).collect()).collect();
        Derived {
            nabla_b: covector_nabla(geom, &q.b),
            nabla_a,
            nabla_nabla_a,
            nabla_b_ij: lower2_nabla(geom, &q.b_ij),
            nabla_g: lower2_nabla(geom, &q.g),
            ra,
            gr,
        }
    }
}

/// The 2-forms built from `θ`, in the adapted cobasis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForms {
    pub d_theta: KForm,
    pub dj_theta: KForm,
    pub dh_theta: KForm,
    pub dphi_theta: KForm,
    pub nabla_d_theta: KForm,
    pub lie_s_d_theta: KForm,
}

impl TwoForms {
    fn named(&self) -> [(&'static str, &KForm); 6] {
        [
            ("dθ", &self.d_theta),
            ("d_Jθ", &self.dj_theta),
            ("d_hθ", &self.dh_theta),
            ("d_Φθ", &self.dphi_theta),
            ("∇dθ", &self.nabla_d_theta),
            ("L_S dθ", &self.lie_s_d_theta),
        ]
    }
}

/// Builder for adapted forms `Σ f δ^a∧δ^b` with 0-based adapted indices.
struct Assembly {
    n: usize,
    parts: Vec<KForm>,
}

impl Assembly {
    fn new(n: usize) -> Assembly {
        Assembly { n, parts: Vec::new() }
    }

    fn dx(&self, i: usize) -> usize {
        1 + i
    }

    fn dy(&self, i: usize) -> usize {
        1 + self.n + i
    }

    fn push(&mut self, a: usize, b: usize, f: Expr) {
        if !f.is_zero() {
            self.parts.push(KForm::monomial(self.n, &[a, b], f));
        }
    }

    fn finish(self) -> KForm {
        KForm::sum(self.n, 2, &self.parts)
    }
}

fn half(e: &Expr) -> Expr {
    e.scale(&Q::new(1, 2))
}

/// Local expressions in terms of the quantities and the Jacobi endomorphism.
pub fn local_two_forms(geom: &SprayGeometry, q: &HelmholtzQuantities) -> TwoForms {
    local_from(&Derived::new(geom, q), q)
}

fn local_from(d: &Derived, q: &HelmholtzQuantities) -> TwoForms {
    let n = q.n;
    let (mut dtheta, mut dj, mut dh, mut dphi, mut ndt, mut lie) =
        (Assembly::new(n), Assembly::new(n), Assembly::new(n), Assembly::new(n), Assembly::new(n), Assembly::new(n));
    for i in 0..n {
        let (xi, yi) = (dtheta.dx(i), dtheta.dy(i));
        dtheta.push(xi, 0, q.b[i].clone());
        dtheta.push(yi, 0, q.a[i].clone());
        dj.push(xi, 0, q.a[i].clone());
        dh.push(xi, 0, q.b[i].clone());
        dphi.push(xi, 0, d.ra[i].clone());
        ndt.push(xi, 0, d.nabla_b[i].clone());
        ndt.push(yi, 0, d.nabla_a[i].clone());
        lie.push(xi, 0, &d.nabla_b[i] - &d.ra[i]);
        lie.push(yi, 0, &q.b[i] + &d.nabla_a[i]);
        for j in 0..n {
            let (xj, yj) = (dtheta.dx(j), dtheta.dy(j));
            let g_anti = &q.g[i][j] - &q.g[j][i];
            let gr_anti = &d.gr[i][j] - &d.gr[j][i];
            dtheta.push(xj, xi, half(&q.b_ij[i][j]));
            dtheta.push(yj, xi, q.g[i][j].clone());
            dj.push(xj, xi, half(&g_anti));
            dh.push(xj, xi, half(&q.b_ij[i][j]));
            dphi.push(xj, xi, half(&gr_anti));
            ndt.push(xj, xi, half(&d.nabla_b_ij[i][j]));
            ndt.push(yj, xi, d.nabla_g[i][j].clone());
            lie.push(xj, xi, half(&(&d.nabla_b_ij[i][j] - &gr_anti)));
            lie.push(yj, xi, &d.nabla_g[i][j] + &q.b_ij[i][j]);
            lie.push(yj, yi, half(&g_anti));
        }
    }
    TwoForms {
        d_theta: dtheta.finish(),
        dj_theta: dj.finish(),
        dh_theta: dh.finish(),
        dphi_theta: dphi.finish(),
        nabla_d_theta: ndt.finish(),
        lie_s_d_theta: lie.finish(),
    }
}

/// The same 2-forms from the generic Cartan calculus on coordinates,
/// converted to the adapted cobasis.
pub fn generic_two_forms(geom: &SprayGeometry, theta: &SemiBasicOneForm) -> Result<TwoForms, HelmholtzError> {
    let w = theta.to_coords();
    let dw = forms::exterior_d(&w)?;
    let adapted = |f: KForm| geom.frame.form_to_adapted(&f);
    Ok(TwoForms {
        d_theta: adapted(dw.clone()),
        dj_theta: adapted(forms::d_a(&geom.j, &w)?),
        dh_theta: adapted(forms::d_a(&geom.proj.h, &w)?),
        dphi_theta: adapted(forms::d_a(&geom.phi, &w)?),
        nabla_d_theta: adapted(geom.nabla_form(&dw)),
        lie_s_d_theta: adapted(forms::lie_form(&geom.field, &dw)),
    })
}

/// Fails with `OracleMismatch` when the local and generic forms differ.
pub fn cross_check(local: &TwoForms, generic: &TwoForms, tester: &ZeroTester) -> Result<(), HelmholtzError> {
    for ((what, l), (_, g)) in local.named().into_iter().zip(generic.named()) {
        let diff = l.sub(g).coefficients();
        if let ZeroVerdict::NonZero { witness, .. } = tester.all_zero(&diff)? {
            return Err(HelmholtzError::OracleMismatch { what: what.to_string(), witness: Some(witness) });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCheck {
    pub label: String,
    pub expr: Expr,
    pub verdict: ZeroVerdict,
}

/// A family of expressions that must all vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub name: String,
    pub statement: String,
    pub evidence: Evidence,
    pub components: Vec<ComponentCheck>,
}

impl ConditionVerdict {
    pub fn evaluate(
        name: &str,
        statement: &str,
        comps: Vec<(String, Expr)>,
        tester: &ZeroTester,
    ) -> Result<ConditionVerdict, ProbeError> {
        let mut components = Vec::with_capacity(comps.len());
        for (label, expr) in comps {
            let verdict = tester.is_zero(&expr)?;
            components.push(ComponentCheck { label, expr, verdict });
        }
        let evidence = components.iter().map(|c| c.verdict.evidence()).min().unwrap_or(Evidence::Proven);
        Ok(ConditionVerdict { name: name.to_string(), statement: statement.to_string(), evidence, components })
    }

    pub fn passed(&self) -> bool {
        self.evidence != Evidence::Fail
    }

    pub fn first_failure(&self) -> Option<&ComponentCheck> {
        self.components.iter().find(|c| c.verdict.is_nonzero())
    }

    /// All coefficients of an adapted form.
    fn of_form(name: &str, statement: &str, w: &KForm, tester: &ZeroTester) -> Result<ConditionVerdict, ProbeError> {
        let n = w.n();
        let comps = w.terms().map(|(idx, c)| (cobasis_label(idx, n), c.clone())).collect();
        ConditionVerdict::evaluate(name, statement, comps, tester)
    }
}

fn cobasis_label(idx: &[usize], n: usize) -> String {
    idx.iter()
        .map(|&a| match a {
            0 => "dt".to_string(),
            a if a <= n => format!("δx{a}"),
            a => format!("δy{}", a - n),
        })
        .collect::<Vec<_>>()
        .join("^")
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn ij(i: usize, j: usize) -> String {
    format!("{}{}", i + 1, j + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub h1: ConditionVerdict,
    pub h2: ConditionVerdict,
    pub h3: ConditionVerdict,
    pub h4: ConditionVerdict,
    pub ds: ConditionVerdict,
    pub jacobi: ConditionVerdict,
    pub a_vanishes: ConditionVerdict,
    pub b_vanishes: ConditionVerdict,
}

fn conditions(d: &Derived, q: &HelmholtzQuantities, tester: &ZeroTester) -> Result<Conditions, ProbeError> {
    let n = q.n;
    let h1 = pairs(n).map(|(i, j)| (format!("g_{} - g_{}", ij(i, j), ij(j, i)), &q.g[i][j] - &q.g[j][i])).collect();
    let h2 = pairs(n).map(|(i, j)| (format!("b_{}", ij(i, j)), q.b_ij[i][j].clone())).collect();
    let h3 = pairs(n)
        .map(|(i, j)| (format!("g_{i}k R^k_{j} - g_{j}k R^k_{i}", i = i + 1, j = j + 1), &d.gr[i][j] - &d.gr[j][i]))
        .collect();
    let mut h4: Vec<(String, Expr)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (format!("∇g_{}", ij(i, j)), d.nabla_g[i][j].clone()))
        .collect();
    h4.extend(pairs(n).map(|(i, j)| {
        let e = &d.nabla_b_ij[i][j] - &(&d.gr[i][j] - &d.gr[j][i]);
        (format!("∇b_{} - g_{i}k R^k_{j} + g_{j}k R^k_{i}", ij(i, j), i = i + 1, j = j + 1), e)
    }));
    let mut ds: Vec<(String, Expr)> =
        (0..n).map(|i| (format!("b_{k} + ∇a_{k}", k = i + 1), &q.b[i] + &d.nabla_a[i])).collect();
    ds.extend((0..n).map(|i| (format!("∇b_{k} - a_j R^j_{k}", k = i + 1), &d.nabla_b[i] - &d.ra[i])));
    let jacobi =
        (0..n).map(|i| (format!("∇∇a_{k} + a_j R^j_{k}", k = i + 1), &d.nabla_nabla_a[i] + &d.ra[i])).collect();
    let a = (0..n).map(|i| (format!("a_{}", i + 1), q.a[i].clone())).collect();
    let b = (0..n).map(|i| (format!("b_{}", i + 1), q.b[i].clone())).collect();
    Ok(Conditions {
        h1: ConditionVerdict::evaluate("H1", "g_ij = g_ji", h1, tester)?,
        h2: ConditionVerdict::evaluate("H2", "b_ij = 0", h2, tester)?,
        h3: ConditionVerdict::evaluate("H3", "g_ik R^k_j = g_jk R^k_i", h3, tester)?,
        h4: ConditionVerdict::evaluate("H4", "∇g_ij = 0 and ∇b_ij = g_ik R^k_j - g_jk R^k_i", h4, tester)?,
        ds: ConditionVerdict::evaluate("DS", "b_i + ∇a_i = 0 and ∇b_i = a_j R^j_i", ds, tester)?,
        jacobi: ConditionVerdict::evaluate("Jacobi", "∇∇a_i + a_j R^j_i = 0", jacobi, tester)?,
        a_vanishes: ConditionVerdict::evaluate("a", "a_i = 0", a, tester)?,
        b_vanishes: ConditionVerdict::evaluate("b", "b_i = 0", b, tester)?,
    })
}

/// Vanishing of the 2-forms wedged with `dt`, and of `L_S dθ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoFormVerdicts {
    pub dj_theta_dt: ConditionVerdict,
    pub dh_theta_dt: ConditionVerdict,
    pub dphi_theta_dt: ConditionVerdict,
    pub nabla_d_theta_dt: ConditionVerdict,
    pub lie_s_d_theta: ConditionVerdict,
}

fn two_form_verdicts(local: &TwoForms, tester: &ZeroTester) -> Result<TwoFormVerdicts, ProbeError> {
    Ok(TwoFormVerdicts {
        dj_theta_dt: ConditionVerdict::of_form("d_Jθ∧dt", "d_Jθ∧dt = 0", &local.dj_theta.wedge_dt(), tester)?,
        dh_theta_dt: ConditionVerdict::of_form("d_hθ∧dt", "d_hθ∧dt = 0", &local.dh_theta.wedge_dt(), tester)?,
        dphi_theta_dt: ConditionVerdict::of_form("d_Φθ∧dt", "d_Φθ∧dt = 0", &local.dphi_theta.wedge_dt(), tester)?,
        nabla_d_theta_dt: ConditionVerdict::of_form("∇dθ∧dt", "∇dθ∧dt = 0", &local.nabla_d_theta.wedge_dt(), tester)?,
        lie_s_d_theta: ConditionVerdict::of_form("L_S dθ", "L_S dθ = 0", &local.lie_s_d_theta, tester)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub det: Expr,
    pub verdict: ZeroVerdict,
    /// `dθ` has rank `2n` exactly when `det g` does not vanish.
    pub full_rank: bool,
}

pub fn nondegenerate(q: &HelmholtzQuantities, tester: &ZeroTester) -> Result<Nondegeneracy, ProbeError> {
    let det = determinant(&q.g);
    let verdict = tester.is_zero(&det)?;
    Ok(Nondegeneracy { full_rank: verdict.is_nonzero(), det, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `a_i = 0`: `θ` is a Poincaré-Cartan form.
    Exact,
    /// `θ = θ_L + E dt` with `E` a conserved quantity.
    Conservative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub condition: String,
    pub component: Option<String>,
    pub witness: Option<Point>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    PoincareCartan,
    ConservativeWithSymmetry,
    Fail(Failure),
}

impl Classification {
    pub fn passed(&self) -> bool {
        !matches!(self, Classification::Fail(_))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HelmholtzReport {
    pub n: usize,
    pub route: Route,
    pub classification: Classification,
    /// Weakest evidence among the conditions the route requires.
    pub evidence: Evidence,
    pub quantities: HelmholtzQuantities,
    pub conditions: Conditions,
    pub two_forms: TwoFormVerdicts,
    pub nondegeneracy: Nondegeneracy,
    pub lagrangian: Option<ExtractedLagrangian>,
    pub first_integral: Option<FirstIntegral>,
    pub dual_symmetry: Option<DualSymmetry>,
}

pub fn check(s: &Semispray, theta: &SemiBasicOneForm, tester: &ZeroTester) -> Result<HelmholtzReport, HelmholtzError> {
    check_in(&SprayGeometry::new(s), theta, tester)
}

pub fn check_in(geom: &SprayGeometry, theta: &SemiBasicOneForm, tester: &ZeroTester) -> Result<HelmholtzReport, HelmholtzError> {
    let q = helmholtz_quantities(geom, theta)?;
    let derived = Derived::new(geom, &q);
    let local = local_from(&derived, &q);
    cross_check(&local, &generic_two_forms(geom, theta)?, tester)?;
    let conditions = conditions(&derived, &q, tester)?;
    let two_forms = two_form_verdicts(&local, tester)?;
    let nondegeneracy = nondegenerate(&q, tester)?;

    let c = &conditions;
    let (route, required) = if c.a_vanishes.passed() {
        (Route::Exact, vec![&c.a_vanishes, &c.h1, &c.b_vanishes, &c.h2])
    } else {
        (Route::Conservative, vec![&c.h1, &c.h2, &c.h3, &c.h4, &c.ds])
    };
    let evidence = required.iter().map(|v| v.evidence).min().unwrap_or(Evidence::Proven);
    let classification = if let Some(bad) = required.iter().find(|v| !v.passed()) {
        let comp = bad.first_failure();
        let (witness, value) = match comp.map(|c| &c.verdict) {
            Some(ZeroVerdict::NonZero { witness, value }) => (Some(witness.clone()), Some(*value)),
            _ => (None, None),
        };
        Classification::Fail(Failure {
            condition: bad.name.clone(),
            component: comp.map(|c| c.label.clone()),
            witness,
            value,
        })
    } else if !nondegeneracy.full_rank {
        Classification::Fail(Failure {
            condition: "nondegenerate".to_string(),
            component: Some(format!("det g = {}", nondegeneracy.det)),
            witness: None,
            value: None,
        })
    } else if route == Route::Exact {
        Classification::PoincareCartan
    } else {
        Classification::ConservativeWithSymmetry
    };

    let (mut lagrangian, mut first_integral, mut dual_symmetry) = (None, None, None);
    if classification.passed() {
        let l = extract_lagrangian_from(geom, theta, &q, route)?;
        first_integral = Some(first_integral_of(geom, theta, &l, tester)?);
        lagrangian = Some(l);
        if route == Route::Conservative {
            dual_symmetry = Some(dual_symmetry_from(geom, &q, &derived, tester)?);
        }
    }
    Ok(HelmholtzReport {
        n: q.n,
        route,
        classification,
        evidence,
        quantities: q,
        conditions,
        two_forms,
        nondegeneracy,
        lagrangian,
        first_integral,
        dual_symmetry,
    })
}

// ----- Lagrangian extraction ---------------------------------------------------------------

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(QUADRATURE_ORDER).expect("nonzero order")))
}

/// `∫_a^b f` by 16-point Gauss-Legendre; the first evaluation error aborts.
fn quadrature(a: f64, b: f64, mut f: impl FnMut(f64) -> Result<f64, EvalError>) -> Result<f64, EvalError> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = 0.0;
    for (x, w) in gauss_legendre().as_node_weight_pairs() {
        acc += w * f(mid + half * x)?;
    }
    Ok(half * acc)
}

/// `∫₀¹ u(s·z) ds` where `z` are the scaled variables, provided
/// every summand of `u` is a monomial of positive degree in them. The
/// scaled variables are the fiber coordinates or the positions.
fn radial_integral(u: &Expr, fiber: bool) -> Option<Expr> {
    let scaled = |v: Var| matches!((v, fiber), (Var::Y(_), true) | (Var::X(_), false));
    let involves = |e: &Expr| if fiber { e.depends_on_fiber() } else { (1..=MAX_DIM).any(|i| e.depends_on(Var::X(i))) };
    let mut out = Vec::new();
    for m in u.summands() {
        let (_, fs) = m.factors();
        let mut degree = Q::zero();
        for (base, p) in &fs {
            match base.node() {
                Node::Var(v) if scaled(*v) => degree = &degree + p,
                _ if involves(base) => return None,
                _ => {}
            }
        }
        if !degree.is_positive() {
            return None;
        }
        out.push(m.scale(&degree.recip()));
    }
    Some(Expr::add_all(out))
}

/// `∫₀^t w(τ) dτ` for sums of `c·τ^p` and `c·exp(kτ)`.
fn time_integral(w: &Expr) -> Option<Expr> {
    let t = Expr::t();
    let mut out = Vec::new();
    for m in w.summands() {
        let (c, fs) = m.factors();
        let c = Expr::num(c);
        match fs.as_slice() {
            [] => out.push(&c * &t),
            [(base, p)] if *base == t && !(p + &Q::one()).is_zero() => {
                let p1 = p + &Q::one();
                if !p1.is_positive() {
                    return None;
                }
                out.push((&c * &t.pow_q(&p1)).scale(&p1.recip()));
            }
            [(base, p)] if p.is_one() => match base.node() {
                Node::Func(Func::Exp, arg) => {
                    let (k, rest) = arg.split_coeff();
                    if rest != t {
                        return None;
                    }
                    out.push((&c * &(base - &Expr::one())).scale(&k.recip()));
                }
                _ => return None,
            },
            _ => return None,
        }
    }
    Some(Expr::add_all(out))
}

/// Pieces of the homotopy Lagrangian `L = L_fiber + φ(t, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homotopy {
    n: usize,
    theta: Vec<Expr>,
    /// `c_0 = (S(θ_0) + 2G^iθ_i)|_{y=0}`, further restricted to `x = 0`.
    c0_axis: Expr,
    /// `c_i = S(θ_i)|_{y=0}`
    c: Vec<Expr>,
    fiber: Option<Expr>,
    time: Option<Expr>,
    space: Option<Expr>,
}

impl Homotopy {
    fn new(geom: &SprayGeometry, theta: &SemiBasicOneForm) -> Homotopy {
        let n = geom.n();
        let at_zero_y = |e: &Expr| e.subs_with(&|v| matches!(v, Var::Y(_)).then(Expr::zero));
        let at_zero_x = |e: &Expr| e.subs_with(&|v| matches!(v, Var::X(_)).then(Expr::zero));
        let c: Vec<Expr> = theta.theta.iter().map(|th| at_zero_y(&geom.spray.apply(th))).collect();
        let mut c0 = vec![geom.spray.apply(&theta.theta0)];
        for (g, th) in geom.spray.coeffs().iter().zip(&theta.theta) {
            c0.push((g * th).scale(&Q::from_int(2)));
        }
        let c0_axis = at_zero_x(&at_zero_y(&Expr::add_all(c0)));
        let fiber_integrand: Expr = theta.theta.iter().enumerate().map(|(i, th)| th * &Expr::y(i + 1)).sum();
        let space_integrand: Expr = c.iter().enumerate().map(|(i, ci)| ci * &Expr::x(i + 1)).sum();
        let fiber = radial_integral(&fiber_integrand, true);
        let space = radial_integral(&space_integrand, false);
        let time = time_integral(&c0_axis);
        Homotopy { n, theta: theta.theta.clone(), c0_axis, c, fiber, time, space }
    }

    pub fn symbolic(&self) -> Option<Expr> {
        Some(self.fiber.as_ref()? + &(self.time.as_ref()? + self.space.as_ref()?))
    }

    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        let fiber = match &self.fiber {
            Some(e) => e.eval(p)?,
            None => quadrature(0.0, 1.0, |s| {
                let q = Point::new(p.t, p.x.clone(), p.y.iter().map(|y| s * y).collect());
                let mut acc = 0.0;
                for (th, y) in self.theta.iter().zip(&p.y) {
                    acc += th.eval(&q)? * y;
                }
                Ok(acc)
            })?,
        };
        let time = match &self.time {
            Some(e) => e.eval(p)?,
            None => quadrature(0.0, p.t, |tau| self.c0_axis.eval(&Point::new(tau, vec![0.0; self.n], vec![0.0; self.n])))?,
        };
        let space = match &self.space {
            Some(e) => e.eval(p)?,
            None => quadrature(0.0, 1.0, |s| {
                let q = Point::new(p.t, p.x.iter().map(|x| s * x).collect(), vec![0.0; self.n]);
                let mut acc = 0.0;
                for (c, x) in self.c.iter().zip(&p.x) {
                    acc += c.eval(&q)? * x;
                }
                Ok(acc)
            })?,
        };
        Ok(fiber + time + space)
    }
}

/// Lagrangian recovered from `θ`, symbolic when the homotopy integrals close
/// in elementary terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractedLagrangian {
    pub n: usize,
    pub expr: Option<Expr>,
    pub symbolic: bool,
    #[serde(skip)]
    homotopy: Option<Homotopy>,
}

impl ExtractedLagrangian {
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        match (&self.expr, &self.homotopy) {
            (Some(e), _) => e.eval(p),
            (None, Some(h)) => h.eval(p),
            (None, None) => unreachable!("an extracted Lagrangian has an expression or a homotopy"),
        }
    }

    pub fn lagrangian(&self) -> Option<Lagrangian> {
        self.expr.as_ref().map(|e| Lagrangian::new(self.n, e.clone()))
    }
}

/// `L` with `L_Sθ = dL`, normalised by `L(0, 0, 0) = 0` when `a ≠ 0`.
pub fn extract_lagrangian(geom: &SprayGeometry, theta: &SemiBasicOneForm, tester: &ZeroTester) -> Result<ExtractedLagrangian, HelmholtzError> {
    let q = helmholtz_quantities(geom, theta)?;
    let route = if tester.all_zero(&q.a)?.is_zero() { Route::Exact } else { Route::Conservative };
    extract_lagrangian_from(geom, theta, &q, route)
}

fn extract_lagrangian_from(
    geom: &SprayGeometry,
    theta: &SemiBasicOneForm,
    q: &HelmholtzQuantities,
    route: Route,
) -> Result<ExtractedLagrangian, HelmholtzError> {
    let n = q.n;
    if route == Route::Exact {
        return Ok(ExtractedLagrangian { n, expr: Some(theta.theta0.clone()), symbolic: true, homotopy: None });
    }
    let h = Homotopy::new(geom, theta);
    let expr = h.symbolic();
    let symbolic = expr.is_some();
    let origin = Point::origin(n);
    h.eval(&origin).map_err(|source| HelmholtzError::HomotopyDomain { point: origin, source })?;
    Ok(ExtractedLagrangian { n, expr, symbolic, homotopy: (!symbolic).then_some(h) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstIntegral {
    pub expr: Option<Expr>,
    pub symbolic: bool,
    /// Verdict on `S(f) = 0`.
    pub verdict: ZeroVerdict,
}

/// `f = i_Sθ − L` together with the verdict on `S(f) = 0`.
pub fn first_integral(geom: &SprayGeometry, theta: &SemiBasicOneForm, l: &ExtractedLagrangian, tester: &ZeroTester) -> Result<FirstIntegral, HelmholtzError> {
    first_integral_of(geom, theta, l, tester)
}

fn first_integral_of(geom: &SprayGeometry, theta: &SemiBasicOneForm, l: &ExtractedLagrangian, tester: &ZeroTester) -> Result<FirstIntegral, HelmholtzError> {
    if let Some(le) = &l.expr {
        let f = &theta.theta0 - le;
        let verdict = tester.is_zero(&geom.spray.apply(&f))?;
        return Ok(FirstIntegral { expr: Some(f), symbolic: true, verdict });
    }
    let f = |p: &Point| -> Result<f64, EvalError> { Ok(theta.theta0.eval(p)? - l.eval(p)?) };
    let verdict = numeric_flow_derivative_zero(geom, &f, tester)?;
    Ok(FirstIntegral { expr: None, symbolic: false, verdict })
}

/// Probes `S(f) = 0` for a numerically evaluated `f` by central differences
/// along the flow direction.
fn numeric_flow_derivative_zero(
    geom: &SprayGeometry,
    f: &dyn Fn(&Point) -> Result<f64, EvalError>,
    tester: &ZeroTester,
) -> Result<ZeroVerdict, HelmholtzError> {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-6;
    let n = geom.n();
    let mut used = 0;
    let mut max_abs: f64 = 0.0;
    let mut last = None;
    for p in tester.points() {
        let sample = || -> Result<(f64, f64), EvalError> {
            let g: Vec<f64> = geom.spray.coeffs().iter().map(|g| g.eval(p)).collect::<Result<_, _>>()?;
            let shifted = |h: f64| {
                let x = (0..n).map(|i| p.x[i] + h * p.y[i]).collect();
                let y = (0..n).map(|i| p.y[i] - 2.0 * h * g[i]).collect();
                Point::new(p.t + h, x, y)
            };
            let (fp, fm, f0) = (f(&shifted(STEP))?, f(&shifted(-STEP))?, f(p)?);
            Ok(((fp - fm) / (2.0 * STEP), fp.abs().max(fm.abs()).max(f0.abs())))
        };
        match sample() {
            Ok((v, mag)) => {
                if !v.is_finite() || v.abs() > TOL * (1.0 + mag) {
                    return Ok(ZeroVerdict::NonZero { witness: p.clone(), value: v });
                }
                max_abs = max_abs.max(v.abs());
                used += 1;
                if used == tester.probes() {
                    return Ok(ZeroVerdict::ProbablyZero { probes: used, max_abs });
                }
            }
            Err(e) => last = Some(e),
        }
    }
    Err(ProbeError::Exhausted {
        needed: tester.probes(),
        found: used,
        expr: "S(f)".to_string(),
        last: last.expect("a skipped probe recorded its error"),
    }
    .into())
}

// ----- dual symmetry ------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSymmetry {
    /// `ω = i_S dθ` on `δx^i`: `−b_i`.
    pub omega_x: Vec<Expr>,
    /// `ω` on `δy^i`: `−a_i`.
    pub omega_y: Vec<Expr>,
    /// `α = −i_Γ ω` on `δx^i`.
    pub adjoint_x: Vec<Expr>,
    /// `α` on `δy^i`.
    pub adjoint_y: Vec<Expr>,
    /// Verdict on `L_S ω = 0`.
    pub invariance: ZeroVerdict,
    pub jacobi: ConditionVerdict,
}

pub fn dual_symmetry(geom: &SprayGeometry, q: &HelmholtzQuantities, tester: &ZeroTester) -> Result<DualSymmetry, HelmholtzError> {
    dual_symmetry_from(geom, q, &Derived::new(geom, q), tester)
}

fn dual_symmetry_from(geom: &SprayGeometry, q: &HelmholtzQuantities, d: &Derived, tester: &ZeroTester) -> Result<DualSymmetry, HelmholtzError> {
    let n = q.n;
    if tester.all_zero(&q.a)?.is_zero() {
        return Err(HelmholtzError::NoDualSymmetry);
    }
    let mut comps = vec![Expr::zero()];
    comps.extend(q.b.iter().map(|b| -b));
    comps.extend(q.a.iter().map(|a| -a));
    let omega = geom.frame.form_to_coords(&KForm::one_form(n, comps));
    let invariance = tester.all_zero(&forms::lie_form(&geom.field, &omega).coefficients())?;
    let alpha = geom.frame.form_to_adapted(&forms::interior_t11(&geom.proj.gamma, &omega).neg());
    let ac = alpha.one_form_comps();
    let jacobi =
        (0..n).map(|i| (format!("∇∇a_{k} + a_j R^j_{k}", k = i + 1), &d.nabla_nabla_a[i] + &d.ra[i])).collect();
    Ok(DualSymmetry {
        omega_x: q.b.iter().map(|b| -b).collect(),
        omega_y: q.a.iter().map(|a| -a).collect(),
        adjoint_x: ac[1..=n].to_vec(),
        adjoint_y: ac[n + 1..].to_vec(),
        invariance,
        jacobi: ConditionVerdict::evaluate("Jacobi", "∇∇a_i + a_j R^j_i = 0", jacobi, tester)?,
    })
}

// ----- Euler-Lagrange semispray -------------------------------------------------------------

/// Right-hand side `∂²L/∂t∂y^i + y^k ∂²L/∂x^k∂y^i − ∂L/∂x^i`.
pub fn euler_lagrange_rhs(l: &Lagrangian) -> Vec<Expr> {
    (1..=l.n)
        .map(|i| {
            let ly = l.expr.diff(Var::Y(i));
            let mut terms = vec![ly.diff(Var::T), -l.expr.diff(Var::X(i))];
            terms.extend((1..=l.n).map(|k| &Expr::y(k) * &ly.diff(Var::X(k))));
            Expr::add_all(terms)
        })
        .collect()
}

/// Semispray whose paths solve the Euler-Lagrange equations of `L`:
/// `2G^j = g^{ji}(∂²L/∂t∂y^i + y^k ∂²L/∂x^k∂y^i − ∂L/∂x^i)`.
pub fn euler_lagrange_semispray(l: &Lagrangian, tester: &ZeroTester) -> Result<Semispray, HelmholtzError> {
    let n = l.n;
    if n > MAX_SYMBOLIC_SOLVE {
        return Err(HelmholtzError::DimensionTooLarge(n));
    }
    let g = l.metric();
    let det = determinant(&g);
    let singular = |witness| HelmholtzError::SingularMetric { det: det.to_string(), witness };
    match tester.is_zero(&det)? {
        ZeroVerdict::NonZero { .. } => {}
        _ => return Err(singular(None)),
    }
    let mut used = 0;
    for p in tester.points() {
        if let Ok(v) = det.eval(p) {
            if v.abs() <= tester.tol() {
                return Err(singular(Some(p.clone())));
            }
            used += 1;
            if used == tester.probes() {
                break;
            }
        }
    }
    let rhs = euler_lagrange_rhs(l);
    let inv_det = det.recip();
    let coeffs = (0..n)
        .map(|j| {
            let s: Expr = (0..n).map(|i| &cofactor(&g, i, j) * &rhs[i]).sum();
            (&s * &inv_det).scale(&Q::new(1, 2))
        })
        .collect();
    let spray = Semispray::new(n, coeffs).expect("one coefficient per dimension");
    let theta = poincare_cartan(l);
    let residual: Vec<Expr> = (0..n).map(|i| spray.apply(&theta.theta[i]) - l.expr.diff(Var::X(i + 1))).collect();
    if let ZeroVerdict::NonZero { witness, .. } = tester.all_zero(&residual)? {
        return Err(HelmholtzError::OracleMismatch { what: "Euler-Lagrange residual".to_string(), witness: Some(witness) });
    }
    Ok(spray)
}

/// Cofactor `C_ij = (−1)^{i+j} M_ij`, so that `adj(g)_ji = C_ij`.
fn cofactor(g: &[Vec<Expr>], i: usize, j: usize) -> Expr {
    let minor: Vec<Vec<Expr>> = g
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != i)
        .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect())
        .collect();
    let m = if minor.is_empty() { Expr::one() } else { determinant(&minor) };
    if (i + j) % 2 == 0 {
        m
    } else {
        -m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str, n: usize) -> Expr {
        parse(s, n).unwrap()
    }

    fn tester(n: usize) -> ZeroTester {
        ZeroTester::with_defaults(n, 7)
    }

    fn damped() -> (Semispray, SemiBasicOneForm) {
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let l = Lagrangian::new(1, e("exp(2*t)*(y1^2 - x1^2)/2", 1));
        (s, poincare_cartan(&l))
    }

    #[test]
    fn damped_oscillator_quantities() {
        let (s, th) = damped();
        let geom = SprayGeometry::new(&s);
        let q = helmholtz_quantities(&geom, &th).unwrap();
        assert!(q.a[0].is_zero());
        assert_eq!(q.g[0][0], e("exp(2*t)", 1));
        assert!(q.b[0].is_zero(), "b = {}", q.b[0]);
        let report = check(&s, &th, &tester(1)).unwrap();
        assert_eq!(report.classification, Classification::PoincareCartan);
        assert_eq!(report.evidence, Evidence::Proven);
    }

    #[test]
    fn harmonic_energy_form_is_conservative() {
        let s = Semispray::parse(1, &["x1/2"]).unwrap();
        let th = SemiBasicOneForm::new(e("y1^2", 1), vec![e("y1", 1)]);
        let report = check(&s, &th, &tester(1)).unwrap();
        assert_eq!(report.route, Route::Conservative);
        assert_eq!(report.classification, Classification::ConservativeWithSymmetry);
        let l = report.lagrangian.unwrap();
        assert_eq!(l.expr.unwrap(), e("y1^2/2 - x1^2/2", 1));
        let f = report.first_integral.unwrap();
        assert_eq!(f.expr.unwrap(), e("(y1^2 + x1^2)/2", 1));
        assert_eq!(f.verdict, ZeroVerdict::ProvenZero);
        let ds = report.dual_symmetry.unwrap();
        assert_eq!(ds.omega_x, vec![e("-x1", 1)]);
        assert_eq!(ds.omega_y, vec![e("-y1", 1)]);
        assert_eq!(ds.adjoint_x, vec![e("x1", 1)]);
        assert_eq!(ds.adjoint_y, vec![e("-y1", 1)]);
        assert_eq!(ds.invariance, ZeroVerdict::ProvenZero);
    }

    #[test]
    fn failing_form_names_condition() {
        let s = Semispray::free(2);
        let th = SemiBasicOneForm::new(Expr::zero(), vec![e("y2", 2), Expr::zero()]);
        let report = check(&s, &th, &tester(2)).unwrap();
        match report.classification {
            Classification::Fail(f) => assert_eq!(f.condition, "H1"),
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn degenerate_metric_fails() {
        let s = Semispray::free(1);
        let th = poincare_cartan(&Lagrangian::new(1, e("y1", 1)));
        let report = check(&s, &th, &tester(1)).unwrap();
        match report.classification {
            Classification::Fail(f) => assert_eq!(f.condition, "nondegenerate"),
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn euler_lagrange_of_damped_oscillator() {
        let l = Lagrangian::new(1, e("exp(2*t)*(y1^2 - x1^2)/2", 1));
        let s = euler_lagrange_semispray(&l, &tester(1)).unwrap();
        assert_eq!(s.coeffs()[0], e("y1 + x1/2", 1));
        let singular = Lagrangian::new(1, e("y1 + x1", 1));
        assert!(matches!(euler_lagrange_semispray(&singular, &tester(1)), Err(HelmholtzError::SingularMetric { .. })));
        assert!(matches!(
            euler_lagrange_semispray(&Lagrangian::new(5, Expr::zero()), &tester(5)),
            Err(HelmholtzError::DimensionTooLarge(5))
        ));
    }

    #[test]
    fn dual_symmetry_requires_nonzero_a() {
        let (s, th) = damped();
        let geom = SprayGeometry::new(&s);
        let q = helmholtz_quantities(&geom, &th).unwrap();
        assert_eq!(dual_symmetry(&geom, &q, &tester(1)), Err(HelmholtzError::NoDualSymmetry));
    }

    #[test]
    fn homotopy_integrals() {
        assert_eq!(radial_integral(&e("y1*x1 + y1^2*exp(t)", 1), true), Some(e("y1*x1 + y1^2*exp(t)/2", 1)));
        assert_eq!(radial_integral(&e("sin(y1)", 1), true), None);
        assert_eq!(radial_integral(&e("x1", 1), true), None);
        assert_eq!(time_integral(&e("3*t^2 + 2 + exp(2*t)", 1)), Some(e("t^3 + 2*t + (exp(2*t) - 1)/2", 1)));
        assert_eq!(time_integral(&e("sin(t)", 1)), None);
    }

    #[test]
    fn numeric_homotopy_matches_quadrature() {
        // sin in the fiber forces the quadrature path.
        let s = Semispray::free(1);
        let th = SemiBasicOneForm::new(e("y1*sin(y1) + y1", 1), vec![e("sin(y1) + 1", 1)]);
        let geom = SprayGeometry::new(&s);
        let t = tester(1);
        let report = check_in(&geom, &th, &t).unwrap();
        assert_eq!(report.classification, Classification::ConservativeWithSymmetry);
        let l = report.lagrangian.unwrap();
        assert!(!l.symbolic);
        let p = Point::new(0.3, vec![0.2], vec![0.7]);
        assert!((l.eval(&p).unwrap() - (1.0 - 0.7f64.cos() + 0.7)).abs() < 1e-12);
        assert!(report.first_integral.unwrap().verdict.is_zero());
    }
}
