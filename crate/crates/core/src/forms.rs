//! Exterior calculus in the coordinate frame `{∂t, ∂x^i, ∂y^i}` with dual
//! cobasis `{dt, dx^i, dy^i}`, frame index order `(t, x1..xn, y1..yn)`.
//!
//! Forms are stored sparsely by strictly increasing multi-index; wedge
//! products use the determinant convention, so
//! `(dx^a ∧ dx^b)(∂_a, ∂_b) = 1`.
//!
//! Interior products are graded derivations fixed by their value on the
//! basis 1-forms: `i_X dx^a = X^a`, `i_A dx^a = A^a_b dx^b` and, for a
//! vector-valued 2-form `K`, `i_K dx^a = K^a`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Var, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("degree {degree} exceeds the dimension {dim} of the jet space")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("interior product of a vector field with a 0-form")]
    DegreeZero,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Dimension `2n + 1` of the jet space over fiber dimension `n`.
pub fn dim(n: usize) -> usize {
    2 * n + 1
}

pub fn frame_var(a: usize, n: usize) -> Var {
    Var::from_frame_index(a, n)
}

/// Sort a multi-index, returning the permutation sign, or `None` when an
/// index repeats.
fn sort_sign(mut idx: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx, negative))
}

/// Accumulates expression terms per key before a single canonical sum.
struct Accumulator<K: Ord>(BTreeMap<K, Vec<Expr>>);

impl<K: Ord> Accumulator<K> {
    fn new() -> Self {
        Accumulator(BTreeMap::new())
    }

    fn push(&mut self, k: K, e: Expr) {
        if !e.is_zero() {
            self.0.entry(k).or_default().push(e);
        }
    }

    fn finish(self) -> BTreeMap<K, Expr> {
        self.0
            .into_iter()
            .map(|(k, v)| (k, Expr::add_all(v)))
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }
}

// ----- vector fields ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    n: usize,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(n: usize, comps: Vec<Expr>) -> VectorField {
        assert_eq!(comps.len(), dim(n), "vector field needs 2n+1 components");
        VectorField { n, comps }
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField::new(n, vec![Expr::zero(); dim(n)])
    }

    /// The coordinate field `∂_a`.
    pub fn coordinate(n: usize, a: usize) -> VectorField {
        let mut v = VectorField::zero(n);
        v.comps[a] = Expr::one();
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn comp(&self, a: usize) -> &Expr {
        &self.comps[a]
    }

    /// Directional derivative `X(f) = X^a ∂_a f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::add_all(
            self.comps
                .iter()
                .enumerate()
                .filter(|(a, c)| !c.is_zero() && f.depends_on(frame_var(*a, self.n)))
                .map(|(a, c)| c * &f.diff(frame_var(a, self.n))),
        )
    }

    /// Componentwise partial derivative `∂_a X`.
    pub fn diff(&self, a: usize) -> VectorField {
        let v = frame_var(a, self.n);
        VectorField::new(self.n, self.comps.iter().map(|c| c.diff(v)).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.n, self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.n, self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField::new(self.n, self.comps.iter().map(|c| c * f).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }
}

/// Lie bracket `[X, Y]^a = X(Y^a) − Y(X^a)`.
pub fn bracket(x: &VectorField, y: &VectorField) -> VectorField {
    VectorField::new(x.n, x.comps.iter().zip(&y.comps).map(|(xa, ya)| x.apply(ya) - y.apply(xa)).collect())
}

// ----- k-forms ------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KForm {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl KForm {
    pub fn zero(n: usize, degree: usize) -> KForm {
        KForm { n, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, f: Expr) -> KForm {
        let mut w = KForm::zero(n, 0);
        if !f.is_zero() {
            w.terms.insert(Vec::new(), f);
        }
        w
    }

    /// `f · dx^{i1} ∧ … ∧ dx^{ik}` for an arbitrary (unsorted) index list.
    pub fn monomial(n: usize, idx: &[usize], f: Expr) -> KForm {
        let mut w = KForm::zero(n, idx.len());
        assert!(idx.iter().all(|&a| a < dim(n)), "frame index out of range");
        if let Some((sorted, neg)) = sort_sign(idx.to_vec()) {
            let f = if neg { -f } else { f };
            if !f.is_zero() {
                w.terms.insert(sorted, f);
            }
        }
        w
    }

    /// The 1-form `ω_a dx^a`.
    pub fn one_form(n: usize, comps: Vec<Expr>) -> KForm {
        assert_eq!(comps.len(), dim(n));
        let terms = comps.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(a, c)| (vec![a], c)).collect();
        KForm { n, degree: 1, terms }
    }

    /// The differential of a function.
    pub fn differential(n: usize, f: &Expr) -> KForm {
        KForm::one_form(n, (0..dim(n)).map(|a| f.diff(frame_var(a, n))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Expr {
        match sort_sign(idx.to_vec()) {
            Some((sorted, neg)) => {
                let c = self.terms.get(&sorted).cloned().unwrap_or_else(Expr::zero);
                if neg {
                    -c
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    /// The 0-form value (zero for higher degrees).
    pub fn as_scalar(&self) -> Expr {
        self.coeff(&[])
    }

    /// Components of a 1-form in frame order.
    pub fn one_form_comps(&self) -> Vec<Expr> {
        (0..dim(self.n)).map(|a| self.coeff(&[a])).collect()
    }

    /// Stored coefficients; the form vanishes iff all of them do.
    pub fn coefficients(&self) -> Vec<Expr> {
        self.terms.values().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_acc(n: usize, degree: usize, acc: Accumulator<Vec<usize>>) -> KForm {
        KForm { n, degree, terms: acc.finish() }
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut acc = Accumulator::new();
        for (k, v) in self.terms.iter().chain(&other.terms) {
            acc.push(k.clone(), v.clone());
        }
        KForm::from_acc(self.n, self.degree, acc)
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> KForm {
        self.scale_q(&Q::from_int(-1))
    }

    pub fn scale_q(&self, q: &Q) -> KForm {
        let terms =
            self.terms.iter().map(|(k, v)| (k.clone(), v.scale(q))).filter(|(_, v)| !v.is_zero()).collect();
        KForm { n: self.n, degree: self.degree, terms }
    }

    pub fn scale(&self, f: &Expr) -> KForm {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * f)).filter(|(_, v)| !v.is_zero()).collect();
        KForm { n: self.n, degree: self.degree, terms }
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a KForm>>(n: usize, degree: usize, forms: I) -> KForm {
        let mut acc = Accumulator::new();
        for w in forms {
            assert_eq!(w.degree, degree);
            for (k, v) in &w.terms {
                acc.push(k.clone(), v.clone());
            }
        }
        KForm::from_acc(n, degree, acc)
    }

    pub fn wedge(&self, other: &KForm) -> KForm {
        let degree = self.degree + other.degree;
        let mut acc = Accumulator::new();
        if degree <= dim(self.n) {
            for (i, a) in &self.terms {
                for (j, b) in &other.terms {
                    let mut idx = i.clone();
                    idx.extend_from_slice(j);
                    if let Some((sorted, neg)) = sort_sign(idx) {
                        let c = a * b;
                        acc.push(sorted, if neg { -c } else { c });
                    }
                }
            }
        }
        KForm::from_acc(self.n, degree, acc)
    }

    /// `self ∧ dt`.
    pub fn wedge_dt(&self) -> KForm {
        self.wedge(&KForm::monomial(self.n, &[0], Expr::one()))
    }

    /// Apply `f` to every coefficient.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> KForm {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), f(v))).filter(|(_, v)| !v.is_zero()).collect();
        KForm { n: self.n, degree: self.degree, terms }
    }

    /// Evaluate on frame vectors given by their component lists.
    pub fn evaluate(&self, vectors: &[VectorField]) -> Expr {
        assert_eq!(vectors.len(), self.degree);
        let mut terms = Vec::new();
        for (idx, c) in &self.terms {
            // Determinant of the k×k minor selected by idx.
            let rows: Vec<Vec<Expr>> =
                vectors.iter().map(|v| idx.iter().map(|&a| v.comp(a).clone()).collect()).collect();
            terms.push(c * &determinant(&rows));
        }
        Expr::add_all(terms)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let name = |a: usize| match frame_var(a, self.n) {
            Var::T => "dt".to_string(),
            Var::X(i) => format!("dx{i}"),
            Var::Y(i) => format!("dy{i}"),
        };
        for (k, (idx, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for &a in idx {
                write!(f, "*{}", name(a))?;
            }
        }
        Ok(())
    }
}

/// Symbolic determinant by cofactor expansion along the first row.
pub fn determinant(rows: &[Vec<Expr>]) -> Expr {
    match rows.len() {
        0 => Expr::one(),
        1 => rows[0][0].clone(),
        2 => &rows[0][0] * &rows[1][1] - &rows[0][1] * &rows[1][0],
        k => {
            let mut terms = Vec::with_capacity(k);
            for j in 0..k {
                if rows[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, e)| e.clone()).collect())
                    .collect();
                let t = &rows[0][j] * &determinant(&minor);
                terms.push(if j % 2 == 1 { -t } else { t });
            }
            Expr::add_all(terms)
        }
    }
}

// ----- (1,1) tensors ------------------------------------------------------------------

/// A (1,1) tensor as a matrix `[output][input]` in the coordinate frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor11 {
    n: usize,
    m: Vec<Vec<Expr>>,
}

impl Tensor11 {
    pub fn new(n: usize, m: Vec<Vec<Expr>>) -> Tensor11 {
        let d = dim(n);
        assert!(m.len() == d && m.iter().all(|r| r.len() == d), "tensor needs (2n+1)x(2n+1) entries");
        Tensor11 { n, m }
    }

    pub fn zero(n: usize) -> Tensor11 {
        let d = dim(n);
        Tensor11 { n, m: vec![vec![Expr::zero(); d]; d] }
    }

    pub fn identity(n: usize) -> Tensor11 {
        let mut t = Tensor11::zero(n);
        for a in 0..dim(n) {
            t.m[a][a] = Expr::one();
        }
        t
    }

    /// `X ⊗ ω` for a vector field and a 1-form.
    pub fn outer(x: &VectorField, w: &KForm) -> Tensor11 {
        assert_eq!(w.degree(), 1);
        let wc = w.one_form_comps();
        let d = dim(x.n);
        let m = (0..d).map(|a| (0..d).map(|b| x.comp(a) * &wc[b]).collect()).collect();
        Tensor11 { n: x.n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &Expr {
        &self.m[a][b]
    }

    pub fn set(&mut self, a: usize, b: usize, e: Expr) {
        self.m[a][b] = e;
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.m
    }

    /// Row `a` as the 1-form `A^a_b dx^b`, i.e. `dx^a ∘ A`.
    pub fn row_form(&self, a: usize) -> KForm {
        KForm::one_form(self.n, self.m[a].clone())
    }

    /// `A ∂_b`.
    pub fn column(&self, b: usize) -> VectorField {
        VectorField::new(self.n, self.m.iter().map(|r| r[b].clone()).collect())
    }

    pub fn apply(&self, x: &VectorField) -> VectorField {
        VectorField::new(
            self.n,
            self.m.iter().map(|r| Expr::add_all(r.iter().zip(x.comps()).map(|(a, b)| a * b))).collect(),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Tensor11) -> Tensor11 {
        let d = dim(self.n);
        let m = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| {
                        Expr::add_all(
                            (0..d)
                                .filter(|&c| !self.m[a][c].is_zero() && !other.m[c][b].is_zero())
                                .map(|c| &self.m[a][c] * &other.m[c][b]),
                        )
                    })
                    .collect()
            })
            .collect();
        Tensor11 { n: self.n, m }
    }

    pub fn add(&self, other: &Tensor11) -> Tensor11 {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor11) -> Tensor11 {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale_q(&self, q: &Q) -> Tensor11 {
        self.map(|e| e.scale(q))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Tensor11 {
        Tensor11 { n: self.n, m: self.m.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    fn zip(&self, other: &Tensor11, f: impl Fn(&Expr, &Expr) -> Expr) -> Tensor11 {
        Tensor11 {
            n: self.n,
            m: self.m.iter().zip(&other.m).map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect()).collect(),
        }
    }

    pub fn entries(&self) -> Vec<Expr> {
        self.m.iter().flatten().filter(|e| !e.is_zero()).cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(Expr::is_zero)
    }
}

// ----- vector-valued 2-forms ----------------------------------------------------------

/// Vector-valued 2-form stored as one 2-form per output frame index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorValued2Form {
    n: usize,
    comps: Vec<KForm>,
}

impl VectorValued2Form {
    pub fn new(n: usize, comps: Vec<KForm>) -> VectorValued2Form {
        assert_eq!(comps.len(), dim(n));
        assert!(comps.iter().all(|w| w.degree() == 2));
        VectorValued2Form { n, comps }
    }

    pub fn zero(n: usize) -> VectorValued2Form {
        VectorValued2Form { n, comps: vec![KForm::zero(n, 2); dim(n)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn comp(&self, a: usize) -> &KForm {
        &self.comps[a]
    }

    pub fn comps(&self) -> &[KForm] {
        &self.comps
    }

    pub fn add(&self, other: &VectorValued2Form) -> VectorValued2Form {
        VectorValued2Form { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &VectorValued2Form) -> VectorValued2Form {
        VectorValued2Form { n: self.n, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale_q(&self, q: &Q) -> VectorValued2Form {
        VectorValued2Form { n: self.n, comps: self.comps.iter().map(|w| w.scale_q(q)).collect() }
    }

    /// Value on a pair of vector fields.
    pub fn evaluate(&self, x: &VectorField, y: &VectorField) -> VectorField {
        VectorField::new(self.n, self.comps.iter().map(|w| w.evaluate(&[x.clone(), y.clone()])).collect())
    }

    /// `i_X K`, the (1,1) tensor `Y ↦ K(X, Y)`.
    pub fn contract(&self, x: &VectorField) -> Tensor11 {
        let d = dim(self.n);
        let m = self
            .comps
            .iter()
            .map(|w| {
                let r = interior_vf(x, w).expect("2-form has positive degree");
                (0..d).map(|b| r.coeff(&[b])).collect()
            })
            .collect();
        Tensor11 { n: self.n, m }
    }

    pub fn coefficients(&self) -> Vec<Expr> {
        self.comps.iter().flat_map(KForm::coefficients).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(KForm::is_zero)
    }
}

// ----- operators ----------------------------------------------------------------------

fn check_degree(n: usize, degree: usize) -> Result<(), FormError> {
    if degree > dim(n) {
        Err(FormError::DegreeOverflow { degree, dim: dim(n) })
    } else {
        Ok(())
    }
}

pub fn exterior_d(w: &KForm) -> Result<KForm, FormError> {
    let n = w.n;
    check_degree(n, w.degree + 1)?;
    let mut acc = Accumulator::new();
    for (idx, c) in &w.terms {
        for a in 0..dim(n) {
            let v = frame_var(a, n);
            if idx.contains(&a) || !c.depends_on(v) {
                continue;
            }
            let mut full = Vec::with_capacity(idx.len() + 1);
            full.push(a);
            full.extend_from_slice(idx);
            let (sorted, neg) = sort_sign(full).expect("distinct indices");
            let dc = c.diff(v);
            acc.push(sorted, if neg { -dc } else { dc });
        }
    }
    Ok(KForm::from_acc(n, w.degree + 1, acc))
}

/// Graded derivation of degree `r` determined by `image(a) = D(dx^a)`,
/// each image of degree `r + 1`.
fn derivation(w: &KForm, r: isize, image: impl Fn(usize) -> KForm) -> KForm {
    let n = w.n;
    let degree = (w.degree as isize + r) as usize;
    let mut cache: BTreeMap<usize, KForm> = BTreeMap::new();
    let mut acc = Accumulator::new();
    for (idx, c) in &w.terms {
        for p in 0..idx.len() {
            let img = cache.entry(idx[p]).or_insert_with(|| image(idx[p]));
            let flip = r.rem_euclid(2) == 1 && p % 2 == 1;
            for (j, e) in &img.terms {
                let mut full = Vec::with_capacity(idx.len() + j.len());
                full.extend_from_slice(&idx[..p]);
                full.extend_from_slice(j);
                full.extend_from_slice(&idx[p + 1..]);
                if let Some((sorted, neg)) = sort_sign(full) {
                    let t = c * e;
                    acc.push(sorted, if neg != flip { -t } else { t });
                }
            }
        }
    }
    KForm::from_acc(n, degree, acc)
}

pub fn interior_vf(x: &VectorField, w: &KForm) -> Result<KForm, FormError> {
    if w.degree == 0 {
        return Err(FormError::DegreeZero);
    }
    Ok(derivation(w, -1, |a| KForm::scalar(x.n, x.comp(a).clone())))
}

/// `i_A ω`; zero on 0-forms.
pub fn interior_t11(a: &Tensor11, w: &KForm) -> KForm {
    derivation(w, 0, |b| a.row_form(b))
}

/// `i_K ω` for a vector-valued 2-form `K`; raises the degree by one.
pub fn interior_vv2(k: &VectorValued2Form, w: &KForm) -> Result<KForm, FormError> {
    check_degree(w.n, w.degree + 1)?;
    Ok(derivation(w, 1, |a| k.comp(a).clone()))
}

/// `d_A = i_A ∘ d − d ∘ i_A`.
pub fn d_a(a: &Tensor11, w: &KForm) -> Result<KForm, FormError> {
    let lhs = interior_t11(a, &exterior_d(w)?);
    let rhs = exterior_d(&interior_t11(a, w))?;
    Ok(lhs.sub(&rhs))
}

/// `d_K = i_K ∘ d + d ∘ i_K` for a vector-valued 2-form `K`.
pub fn d_k(k: &VectorValued2Form, w: &KForm) -> Result<KForm, FormError> {
    check_degree(w.n, w.degree + 2)?;
    let lhs = interior_vv2(k, &exterior_d(w)?)?;
    let rhs = exterior_d(&interior_vv2(k, w)?)?;
    Ok(lhs.add(&rhs))
}

/// Lie derivative by Cartan's formula.
pub fn lie_form(x: &VectorField, w: &KForm) -> KForm {
    if w.degree == 0 {
        return KForm::scalar(w.n, x.apply(&w.as_scalar()));
    }
    let mut parts = Vec::with_capacity(2);
    if w.degree < dim(w.n) {
        parts.push(interior_vf(x, &exterior_d(w).expect("degree checked")).expect("positive degree"));
    }
    parts.push(exterior_d(&interior_vf(x, w).expect("positive degree")).expect("degree checked"));
    KForm::sum(w.n, w.degree, &parts)
}

/// `(L_X A)(Y) = [X, AY] − A[X, Y]`.
pub fn lie_t11(x: &VectorField, a: &Tensor11) -> Tensor11 {
    let n = x.n;
    let d = dim(n);
    let dx: Vec<VectorField> = (0..d).map(|c| x.diff(c)).collect();
    let m = (0..d)
        .map(|r| {
            (0..d)
                .map(|b| {
                    let mut terms = vec![x.apply(&a.m[r][b])];
                    for c in 0..d {
                        if !a.m[c][b].is_zero() && !x.comp(r).is_zero() {
                            terms.push(-(&a.m[c][b] * &dx[c].comps[r]));
                        }
                        if !a.m[r][c].is_zero() && !dx[b].comps[c].is_zero() {
                            terms.push(&a.m[r][c] * &dx[b].comps[c]);
                        }
                    }
                    Expr::add_all(terms)
                })
                .collect()
        })
        .collect();
    Tensor11 { n, m }
}

/// Frölicher–Nijenhuis bracket of two (1,1) tensors, evaluated on pairs of
/// coordinate fields (whose mutual brackets vanish).
pub fn fn_bracket_t11(a: &Tensor11, b: &Tensor11) -> VectorValued2Form {
    let n = a.n;
    let d = dim(n);
    let a_cols: Vec<VectorField> = (0..d).map(|c| a.column(c)).collect();
    let b_cols: Vec<VectorField> = (0..d).map(|c| b.column(c)).collect();
    let mut comps: Vec<Accumulator<Vec<usize>>> = (0..d).map(|_| Accumulator::new()).collect();
    for p in 0..d {
        for q in p + 1..d {
            // [∂p, V] = ∂p V and [V, ∂q] = −∂q V for coordinate fields.
            let mut v = bracket(&a_cols[p], &b_cols[q]).add(&bracket(&b_cols[p], &a_cols[q]));
            let a_terms = b_cols[q].diff(p).sub(&b_cols[p].diff(q));
            let b_terms = a_cols[q].diff(p).sub(&a_cols[p].diff(q));
            v = v.sub(&a.apply(&a_terms)).sub(&b.apply(&b_terms));
            for (c, e) in v.comps.into_iter().enumerate() {
                comps[c].push(vec![p, q], e);
            }
        }
    }
    VectorValued2Form { n, comps: comps.into_iter().map(|acc| KForm::from_acc(n, 2, acc)).collect() }
}

/// Nijenhuis tensor `N_A = ½[A, A]`.
pub fn nijenhuis(a: &Tensor11) -> VectorValued2Form {
    fn_bracket_t11(a, a).scale_q(&Q::new(1, 2))
}

/// `A ∧ dt`, with components `(dx^c ∘ A) ∧ dt`.
pub fn vv1_wedge_dt(a: &Tensor11) -> VectorValued2Form {
    VectorValued2Form { n: a.n, comps: (0..dim(a.n)).map(|c| a.row_form(c).wedge_dt()).collect() }
}

/// `A*ω (X_1..X_k) = ω(AX_1..AX_k)`: the algebra map with `dx^a ↦ dx^a ∘ A`.
pub fn a_star(a: &Tensor11, w: &KForm) -> KForm {
    let n = w.n;
    let rows: Vec<KForm> = (0..dim(n)).map(|r| a.row_form(r)).collect();
    let mut parts = Vec::with_capacity(w.terms.len());
    for (idx, c) in &w.terms {
        let mut acc = KForm::scalar(n, c.clone());
        for &i in idx {
            acc = acc.wedge(&rows[i]);
        }
        parts.push(acc);
    }
    KForm::sum(n, w.degree, &parts)
}
