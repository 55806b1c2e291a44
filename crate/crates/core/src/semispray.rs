//! Geometry induced by a semispray `S = ∂t + y^i ∂x^i − 2G^i ∂y^i`:
//! nonlinear connection, adapted frame, projectors, the tensors `F`, `Φ`,
//! `Ψ`, curvature, and the dynamical covariant derivative.
//!
//! Indices in the component arrays are 0-based: `n_ij[i][j]` is `N^{i+1}_{j+1}`.
//! Adapted-frame objects use the index layout of the coordinate frame,
//! with `S, δ/δx^i, ∂/∂y^i` (resp. `dt, δx^i, δy^i`) in place of
//! `∂t, ∂x^i, ∂y^i` (resp. `dt, dx^i, dy^i`).

use thiserror::Error;

use crate::expr::{parse, Expr, ParseError, Var, MAX_DIM, Q};
use crate::forms::{self, dim, KForm, Tensor11, VectorField, VectorValued2Form};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemisprayError {
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fiber dimension must be between 1 and {MAX_DIM}, got {0}")]
    BadDimension(usize),
    #[error("coefficient {index} uses a variable outside dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unsupported variance signature of rank {0}; at most rank 2 is supported")]
    UnsupportedVariance(usize),
    #[error("component count {got} does not match rank {rank} in dimension {n}")]
    ShapeMismatch { got: usize, rank: usize, n: usize },
    #[error("coefficient {index}: {source}")]
    Parse { index: usize, source: ParseError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semispray {
    n: usize,
    g: Vec<Expr>,
}

impl Semispray {
    pub fn new(n: usize, g: Vec<Expr>) -> Result<Semispray, SemisprayError> {
        if n == 0 || n > MAX_DIM {
            return Err(SemisprayError::BadDimension(n));
        }
        if g.len() != n {
            return Err(SemisprayError::DimensionMismatch { expected: n, got: g.len() });
        }
        if let Some(index) = g.iter().position(|e| e.max_index() > n) {
            return Err(SemisprayError::IndexOutOfRange { index: index + 1, n });
        }
        Ok(Semispray { n, g })
    }

    pub fn parse(n: usize, g: &[&str]) -> Result<Semispray, SemisprayError> {
        let g = g
            .iter()
            .enumerate()
            .map(|(i, s)| parse(s, n).map_err(|source| SemisprayError::Parse { index: i + 1, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Semispray::new(n, g)
    }

    /// The free particle, `G = 0`.
    pub fn free(n: usize) -> Semispray {
        Semispray { n, g: vec![Expr::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients `G^1..G^n`.
    pub fn coeffs(&self) -> &[Expr] {
        &self.g
    }

    pub fn vector_field(&self) -> VectorField {
        let mut c = Vec::with_capacity(dim(self.n));
        c.push(Expr::one());
        c.extend((1..=self.n).map(Expr::y));
        c.extend(self.g.iter().map(|g| g.scale(&Q::from_int(-2))));
        VectorField::new(self.n, c)
    }

    /// `S(f) = ∂f/∂t + y^i ∂f/∂x^i − 2G^i ∂f/∂y^i`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = vec![f.diff(Var::T)];
        for i in 1..=self.n {
            if f.depends_on(Var::X(i)) {
                terms.push(Expr::y(i) * f.diff(Var::X(i)));
            }
            if f.depends_on(Var::Y(i)) && !self.g[i - 1].is_zero() {
                terms.push(self.g[i - 1].scale(&Q::from_int(-2)) * f.diff(Var::Y(i)));
            }
        }
        Expr::add_all(terms)
    }
}

/// Connection coefficients `N^i_j = ∂G^i/∂y^j`, `N^i_0 = 2G^i − N^i_j y^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionData {
    pub n_ij: Vec<Vec<Expr>>,
    pub n_i0: Vec<Expr>,
}

impl ConnectionData {
    pub fn n(&self) -> usize {
        self.n_i0.len()
    }

    /// `δf/δx^j = ∂f/∂x^j − N^l_j ∂f/∂y^l` (0-based `j`).
    pub fn horizontal(&self, j: usize, f: &Expr) -> Expr {
        let mut terms = vec![f.diff(Var::X(j + 1))];
        for l in 0..self.n() {
            if f.depends_on(Var::Y(l + 1)) && !self.n_ij[l][j].is_zero() {
                terms.push(-(&self.n_ij[l][j] * &f.diff(Var::Y(l + 1))));
            }
        }
        Expr::add_all(terms)
    }
}

pub fn connection_coeffs(s: &Semispray) -> ConnectionData {
    let n = s.n;
    let n_ij: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| s.g[i].diff(Var::Y(j + 1))).collect()).collect();
    let n_i0 = (0..n)
        .map(|i| {
            let mut terms = vec![s.g[i].scale(&Q::from_int(2))];
            terms.extend((0..n).map(|j| -(&n_ij[i][j] * &Expr::y(j + 1))));
            Expr::add_all(terms)
        })
        .collect();
    ConnectionData { n_ij, n_i0 }
}

/// Adapted frame `{S, δ/δx^i, ∂/∂y^i}` (columns of `e`) and its dual
/// cobasis `{dt, δx^i, δy^i}` (rows of `c`), both in coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptedFrame {
    n: usize,
    e: Tensor11,
    c: Tensor11,
}

impl AdaptedFrame {
    pub fn new(s: &Semispray, conn: &ConnectionData) -> AdaptedFrame {
        let n = s.n;
        let mut e = Tensor11::identity(n);
        let sv = s.vector_field();
        for a in 0..dim(n) {
            e.set(a, 0, sv.comp(a).clone());
        }
        let mut c = Tensor11::identity(n);
        for i in 0..n {
            c.set(1 + i, 0, -Expr::y(i + 1));
            c.set(1 + n + i, 0, conn.n_i0[i].clone());
            for j in 0..n {
                e.set(1 + n + j, 1 + i, -conn.n_ij[j][i].clone());
                c.set(1 + n + i, 1 + j, conn.n_ij[i][j].clone());
            }
        }
        AdaptedFrame { n, e, c }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix whose columns are the frame fields.
    pub fn frame_matrix(&self) -> &Tensor11 {
        &self.e
    }

    /// Matrix whose rows are the cobasis 1-forms.
    pub fn coframe_matrix(&self) -> &Tensor11 {
        &self.c
    }

    pub fn frame_field(&self, a: usize) -> VectorField {
        self.e.column(a)
    }

    pub fn coframe(&self, a: usize) -> KForm {
        self.c.row_form(a)
    }

    /// Pairing matrix `⟨cobasis, frame⟩`; the identity by duality.
    pub fn pairing(&self) -> Tensor11 {
        self.c.compose(&self.e)
    }

    pub fn form_to_coords(&self, w: &KForm) -> KForm {
        forms::a_star(&self.c, w)
    }

    pub fn form_to_adapted(&self, w: &KForm) -> KForm {
        forms::a_star(&self.e, w)
    }

    pub fn vf_to_coords(&self, x: &VectorField) -> VectorField {
        self.e.apply(x)
    }

    pub fn vf_to_adapted(&self, x: &VectorField) -> VectorField {
        self.c.apply(x)
    }

    pub fn t11_to_coords(&self, t: &Tensor11) -> Tensor11 {
        self.e.compose(t).compose(&self.c)
    }

    pub fn t11_to_adapted(&self, t: &Tensor11) -> Tensor11 {
        self.c.compose(t).compose(&self.e)
    }

    pub fn vv2_to_coords(&self, k: &VectorValued2Form) -> VectorValued2Form {
        let d = dim(self.n);
        let pulled: Vec<KForm> = k.comps().iter().map(|w| self.form_to_coords(w)).collect();
        let comps = (0..d)
            .map(|a| {
                let parts: Vec<KForm> = (0..d)
                    .filter(|&al| !self.e.get(a, al).is_zero() && !pulled[al].is_zero())
                    .map(|al| pulled[al].scale(self.e.get(a, al)))
                    .collect();
                KForm::sum(self.n, 2, &parts)
            })
            .collect();
        VectorValued2Form::new(self.n, comps)
    }

    pub fn vv2_to_adapted(&self, k: &VectorValued2Form) -> VectorValued2Form {
        let d = dim(self.n);
        let pulled: Vec<KForm> = k.comps().iter().map(|w| self.form_to_adapted(w)).collect();
        let comps = (0..d)
            .map(|al| {
                let parts: Vec<KForm> = (0..d)
                    .filter(|&a| !self.c.get(al, a).is_zero() && !pulled[a].is_zero())
                    .map(|a| pulled[a].scale(self.c.get(al, a)))
                    .collect();
                KForm::sum(self.n, 2, &parts)
            })
            .collect();
        VectorValued2Form::new(self.n, comps)
    }
}

pub fn adapted_frame(s: &Semispray) -> AdaptedFrame {
    AdaptedFrame::new(s, &connection_coeffs(s))
}

/// Vertical endomorphism `J = ∂/∂y^i ⊗ δx^i`.
pub fn vertical_endomorphism(n: usize) -> Tensor11 {
    let mut j = Tensor11::zero(n);
    for i in 1..=n {
        j.set(n + i, 0, -Expr::y(i));
        j.set(n + i, i, Expr::one());
    }
    j
}

/// Horizontal projector `h`, vertical projector `v = Id − h` and the
/// almost product structure `Γ = 2h − Id = h − v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projectors {
    pub h: Tensor11,
    pub v: Tensor11,
    pub gamma: Tensor11,
}

fn adapted_diag(n: usize, horizontal: bool) -> Tensor11 {
    let mut t = Tensor11::zero(n);
    for a in 0..dim(n) {
        if (a <= n) == horizontal {
            t.set(a, a, Expr::one());
        }
    }
    t
}

pub fn projectors_in(frame: &AdaptedFrame) -> Projectors {
    let n = frame.n;
    let h = frame.t11_to_coords(&adapted_diag(n, true));
    let v = Tensor11::identity(n).sub(&h);
    let gamma = h.sub(&v);
    Projectors { h, v, gamma }
}

pub fn projectors(s: &Semispray) -> Projectors {
    projectors_in(&adapted_frame(s))
}

/// `F = δ/δx^i ⊗ δy^i − ∂/∂y^i ⊗ δx^i` in adapted components.
pub fn tensor_f_adapted(n: usize) -> Tensor11 {
    let mut f = Tensor11::zero(n);
    for i in 1..=n {
        f.set(i, n + i, Expr::one());
        f.set(n + i, i, -Expr::one());
    }
    f
}

pub fn tensor_f(s: &Semispray) -> Tensor11 {
    adapted_frame(s).t11_to_coords(&tensor_f_adapted(s.n))
}

/// Jacobi endomorphism components `r[i][j] = R^{i+1}_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiEndomorphism {
    pub r: Vec<Vec<Expr>>,
}

impl JacobiEndomorphism {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// `Φ = R^j_i ∂/∂y^j ⊗ δx^i` in adapted components.
    pub fn adapted(&self) -> Tensor11 {
        let n = self.n();
        let mut t = Tensor11::zero(n);
        for j in 0..n {
            for i in 0..n {
                t.set(1 + n + j, 1 + i, self.r[j][i].clone());
            }
        }
        t
    }
}

pub fn jacobi_in(s: &Semispray, conn: &ConnectionData) -> JacobiEndomorphism {
    let n = s.n;
    let r = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut terms = vec![s.g[i].diff(Var::X(j + 1)).scale(&Q::from_int(2))];
                    terms.extend((0..n).map(|k| -(&conn.n_ij[i][k] * &conn.n_ij[k][j])));
                    terms.push(-s.apply(&conn.n_ij[i][j]));
                    Expr::add_all(terms)
                })
                .collect()
        })
        .collect();
    JacobiEndomorphism { r }
}

pub fn jacobi_endomorphism(s: &Semispray) -> JacobiEndomorphism {
    jacobi_in(s, &connection_coeffs(s))
}

/// Curvature components `rkij[k][i][j] = R^k_ij = δN^k_i/δx^j − δN^k_j/δx^i`
/// together with the Jacobi endomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvatureData {
    pub rkij: Vec<Vec<Vec<Expr>>>,
    pub jacobi: JacobiEndomorphism,
}

impl CurvatureData {
    /// `R = ½R^k_ij ∂/∂y^k ⊗ δx^i∧δx^j + R^j_i ∂/∂y^j ⊗ dt∧δx^i` in adapted components.
    pub fn adapted(&self) -> VectorValued2Form {
        let n = self.jacobi.n();
        let mut comps = vec![KForm::zero(n, 2); dim(n)];
        for k in 0..n {
            let mut parts = Vec::new();
            for i in 0..n {
                parts.push(KForm::monomial(n, &[0, 1 + i], self.jacobi.r[k][i].clone()));
                for j in i + 1..n {
                    parts.push(KForm::monomial(n, &[1 + i, 1 + j], self.rkij[k][i][j].clone()));
                }
            }
            comps[1 + n + k] = KForm::sum(n, 2, &parts);
        }
        VectorValued2Form::new(n, comps)
    }
}

pub fn curvature_in(conn: &ConnectionData, jacobi: JacobiEndomorphism) -> CurvatureData {
    let n = conn.n();
    let rkij = (0..n)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                Expr::zero()
                            } else {
                                conn.horizontal(j, &conn.n_ij[k][i]) - conn.horizontal(i, &conn.n_ij[k][j])
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    CurvatureData { rkij, jacobi }
}

pub fn curvature(s: &Semispray) -> CurvatureData {
    let conn = connection_coeffs(s);
    let jacobi = jacobi_in(s, &conn);
    curvature_in(&conn, jacobi)
}

/// `Ψ = δ/δx^i ⊗ δy^i − R^j_i ∂/∂y^j ⊗ δx^i` in adapted components.
pub fn psi_adapted(jacobi: &JacobiEndomorphism) -> Tensor11 {
    let n = jacobi.n();
    tensor_f_adapted(n).add(&vertical_endomorphism_adapted(n)).sub(&jacobi.adapted())
}

fn vertical_endomorphism_adapted(n: usize) -> Tensor11 {
    let mut j = Tensor11::zero(n);
    for i in 1..=n {
        j.set(n + i, i, Expr::one());
    }
    j
}

pub fn psi(s: &Semispray) -> Tensor11 {
    let conn = connection_coeffs(s);
    let frame = AdaptedFrame::new(s, &conn);
    frame.t11_to_coords(&psi_adapted(&jacobi_in(s, &conn)))
}

// ----- dynamical covariant derivative on components ------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Upper,
    Lower,
}

/// Components of an adapted-frame tensor with `n`-dimensional indices,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indexed {
    pub variance: Vec<Variance>,
    pub comps: Vec<Expr>,
}

impl Indexed {
    pub fn scalar(f: Expr) -> Indexed {
        Indexed { variance: Vec::new(), comps: vec![f] }
    }

    pub fn vector(comps: Vec<Expr>) -> Indexed {
        Indexed { variance: vec![Variance::Upper], comps }
    }

    pub fn covector(comps: Vec<Expr>) -> Indexed {
        Indexed { variance: vec![Variance::Lower], comps }
    }

    pub fn matrix(variance: [Variance; 2], rows: &[Vec<Expr>]) -> Indexed {
        Indexed { variance: variance.to_vec(), comps: rows.iter().flatten().cloned().collect() }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get2(&self, n: usize, i: usize, j: usize) -> &Expr {
        &self.comps[i * n + j]
    }

    pub fn rows(&self, n: usize) -> Vec<Vec<Expr>> {
        self.comps.chunks(n).map(<[Expr]>::to_vec).collect()
    }
}

/// Component rule: `S` on scalars, `+N^i_k T^k` per upper index and
/// `−N^k_j T_k` per lower index.
pub fn nabla(s: &Semispray, conn: &ConnectionData, t: &Indexed) -> Result<Indexed, SemisprayError> {
    let n = s.n;
    let rank = t.rank();
    if rank > 2 {
        return Err(SemisprayError::UnsupportedVariance(rank));
    }
    let expected = n.pow(rank as u32);
    if t.comps.len() != expected {
        return Err(SemisprayError::ShapeMismatch { got: t.comps.len(), rank, n });
    }
    let comps = (0..expected)
        .map(|flat| {
            let idx: Vec<usize> = match rank {
                0 => vec![],
                1 => vec![flat],
                _ => vec![flat / n, flat % n],
            };
            let mut terms = vec![s.apply(&t.comps[flat])];
            for (pos, var) in t.variance.iter().enumerate() {
                for k in 0..n {
                    let mut other = idx.clone();
                    other[pos] = k;
                    let tk = &t.comps[other.iter().fold(0, |acc, &i| acc * n + i)];
                    if tk.is_zero() {
                        continue;
                    }
                    match var {
                        Variance::Upper => terms.push(&conn.n_ij[idx[pos]][k] * tk),
                        Variance::Lower => terms.push(-(&conn.n_ij[k][idx[pos]] * tk)),
                    }
                }
            }
            Expr::add_all(terms)
        })
        .collect();
    Ok(Indexed { variance: t.variance.clone(), comps })
}

/// Every object derived from one semispray, computed once.
#[derive(Debug, Clone)]
pub struct SprayGeometry {
    pub spray: Semispray,
    pub field: VectorField,
    pub conn: ConnectionData,
    pub frame: AdaptedFrame,
    pub curvature: CurvatureData,
    pub j: Tensor11,
    pub proj: Projectors,
    pub f: Tensor11,
    pub phi: Tensor11,
    pub psi: Tensor11,
}

impl SprayGeometry {
    pub fn new(s: &Semispray) -> SprayGeometry {
        let conn = connection_coeffs(s);
        let frame = AdaptedFrame::new(s, &conn);
        let jacobi = jacobi_in(s, &conn);
        let phi = frame.t11_to_coords(&jacobi.adapted());
        let psi = frame.t11_to_coords(&psi_adapted(&jacobi));
        let curvature = curvature_in(&conn, jacobi);
        let proj = projectors_in(&frame);
        let f = frame.t11_to_coords(&tensor_f_adapted(s.n));
        SprayGeometry {
            spray: s.clone(),
            field: s.vector_field(),
            conn,
            frame,
            curvature,
            j: vertical_endomorphism(s.n),
            proj,
            f,
            phi,
            psi,
        }
    }

    pub fn n(&self) -> usize {
        self.spray.n
    }

    pub fn jacobi(&self) -> &JacobiEndomorphism {
        &self.curvature.jacobi
    }

    /// Curvature `R` as a coordinate vector-valued 2-form.
    pub fn curvature_form(&self) -> VectorValued2Form {
        self.frame.vv2_to_coords(&self.curvature.adapted())
    }

    /// `∇ω = L_S ω − i_Ψ ω`.
    pub fn nabla_form(&self, w: &KForm) -> KForm {
        forms::lie_form(&self.field, w).sub(&forms::interior_t11(&self.psi, w))
    }

    /// `∇A = L_S A + Ψ∘A − A∘Ψ`.
    pub fn nabla_t11(&self, a: &Tensor11) -> Tensor11 {
        forms::lie_t11(&self.field, a).add(&self.psi.compose(a)).sub(&a.compose(&self.psi))
    }

    /// `∇X = [S, X] + ΨX`.
    pub fn nabla_vf(&self, x: &VectorField) -> VectorField {
        forms::bracket(&self.field, x).add(&self.psi.apply(x))
    }

    pub fn nabla_components(&self, t: &Indexed) -> Result<Indexed, SemisprayError> {
        nabla(&self.spray, &self.conn, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str, n: usize) -> Expr {
        parse(s, n).unwrap()
    }

    #[test]
    fn connection_examples() {
        let c = connection_coeffs(&Semispray::parse(1, &["y1 + x1/2"]).unwrap());
        assert_eq!(c.n_ij[0][0], Expr::one());
        assert_eq!(c.n_i0[0], e("y1 + x1", 1));
        let c = connection_coeffs(&Semispray::free(2));
        assert!(c.n_ij.iter().flatten().chain(&c.n_i0).all(Expr::is_zero));
        let c = connection_coeffs(&Semispray::parse(2, &["y1*y2", "0"]).unwrap());
        assert_eq!(c.n_ij[0][0], Expr::y(2));
        assert_eq!(c.n_ij[0][1], Expr::y(1));
        assert!(c.n_i0[0].is_zero());
        assert!(c.n_ij[1].iter().all(Expr::is_zero));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Semispray::parse(1, &["y2"]), Err(SemisprayError::Parse { index: 1, .. })));
        assert!(matches!(Semispray::new(2, vec![Expr::zero()]), Err(SemisprayError::DimensionMismatch { .. })));
        assert!(matches!(Semispray::new(1, vec![Expr::x(2)]), Err(SemisprayError::IndexOutOfRange { .. })));
        assert!(matches!(Semispray::new(0, vec![]), Err(SemisprayError::BadDimension(0))));
    }

    #[test]
    fn frame_is_dual_to_cobasis() {
        let s = Semispray::parse(2, &["x1*y2^2 + t", "sin(x2)*y1"]).unwrap();
        assert_eq!(adapted_frame(&s).pairing(), Tensor11::identity(2));
    }

    #[test]
    fn projector_examples() {
        let p = projectors(&Semispray::free(1));
        assert_eq!(p.h.column(1), VectorField::coordinate(1, 1));
        assert_eq!(p.v.column(2), VectorField::coordinate(1, 2));
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let p = projectors(&s);
        assert_eq!(p.h.column(1), VectorField::new(1, vec![Expr::zero(), Expr::one(), -Expr::one()]));
        assert_eq!(p.h.apply(&s.vector_field()), s.vector_field());
    }

    #[test]
    fn jacobi_examples() {
        assert!(jacobi_endomorphism(&Semispray::free(2)).r.iter().flatten().all(Expr::is_zero));
        assert_eq!(jacobi_endomorphism(&Semispray::parse(1, &["x1/2"]).unwrap()).r[0][0], Expr::one());
        // 2G = 2γy + ω²x with γ = 3/2, ω² = 5: R = ω² − γ².
        let s = Semispray::parse(1, &["3/2*y1 + 5/2*x1"]).unwrap();
        assert_eq!(jacobi_endomorphism(&s).r[0][0], Expr::rational(11, 4));
    }

    #[test]
    fn curvature_example() {
        let c = curvature(&Semispray::parse(2, &["x2*y1", "0"]).unwrap());
        assert_eq!(c.rkij[0][0][1], Expr::one());
        assert_eq!(c.rkij[0][1][0], -Expr::one());
    }

    #[test]
    fn f_and_psi_examples() {
        let f = tensor_f(&Semispray::free(1));
        assert_eq!(f.column(2), VectorField::coordinate(1, 1));
        let g = SprayGeometry::new(&Semispray::parse(1, &["x1*y1^2"]).unwrap());
        let lsh = forms::lie_t11(&g.field, &g.proj.h);
        assert_eq!(g.proj.h.compose(&lsh).sub(&g.j), g.f);
        assert_eq!(g.f.apply(&g.frame.frame_field(1)), VectorField::coordinate(1, 2).scale(&-Expr::one()));
        let s = Semispray::parse(1, &["x1/2"]).unwrap();
        let g = SprayGeometry::new(&s);
        assert!(g.f.apply(&g.field).is_zero());
        assert!(g.psi.apply(&g.field).is_zero());
        let delta = g.frame.frame_field(1);
        assert_eq!(g.psi.apply(&delta), VectorField::new(1, vec![Expr::zero(), Expr::zero(), -Expr::one()]));
        let free = SprayGeometry::new(&Semispray::free(1));
        assert_eq!(free.psi.apply(&VectorField::coordinate(1, 2)), VectorField::coordinate(1, 1));
    }

    #[test]
    fn nabla_examples() {
        let free = Semispray::free(1);
        let conn = connection_coeffs(&free);
        assert!(nabla(&free, &conn, &Indexed::scalar(Expr::y(1))).unwrap().comps[0].is_zero());
        // Damped oscillator with γ = 1, ω² = 1: 2G = 2y + x.
        let s = Semispray::parse(1, &["y1 + x1/2"]).unwrap();
        let conn = connection_coeffs(&s);
        let theta = Indexed::covector(vec![e("exp(2*t)*y1", 1)]);
        assert_eq!(nabla(&s, &conn, &theta).unwrap().comps[0], e("-exp(2*t)*(x1 + y1)", 1));
        let g = Indexed::matrix([Variance::Lower, Variance::Lower], &[vec![e("exp(2*t)", 1)]]);
        assert!(nabla(&s, &conn, &g).unwrap().comps[0].is_zero());
        let bad = Indexed { variance: vec![Variance::Lower; 3], comps: vec![Expr::zero()] };
        assert!(matches!(nabla(&s, &conn, &bad), Err(SemisprayError::UnsupportedVariance(3))));
    }
}
