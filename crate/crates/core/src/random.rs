//! Seeded generators of random polynomial objects for property checks.

use rand::Rng;

use crate::expr::{Expr, Var, Q};
use crate::forms::{dim, frame_var, KForm, Tensor11, VectorField};
use crate::helmholtz::{Lagrangian, SemiBasicOneForm};
use crate::semispray::Semispray;

/// Rational in `[−bound, bound]` with denominator at most 3.
pub fn rational<R: Rng>(rng: &mut R, bound: i64) -> Q {
    let den = rng.random_range(1..=3);
    Q::new(rng.random_range(-bound * den..=bound * den), den)
}

fn nonzero_rational<R: Rng>(rng: &mut R, bound: i64) -> Q {
    loop {
        let q = rational(rng, bound);
        if !q.is_zero() {
            return q;
        }
    }
}

/// Sum of up to `terms` monomials over `vars` with total degree at most
/// `degree`.
pub fn polynomial<R: Rng>(rng: &mut R, vars: &[Var], degree: usize, terms: usize) -> Expr {
    let count = rng.random_range(1..=terms.max(1));
    let monomials: Vec<Expr> = (0..count).map(|_| {
        let d = rng.random_range(0..=degree);
        let mut factors = vec![Expr::num(nonzero_rational(rng, 3))];
        for _ in 0..d {
            factors.push(Expr::var(vars[rng.random_range(0..vars.len())]));
        }
        Expr::mul_all(factors)
    }).collect();
    Expr::add_all(monomials)
}

/// All jet coordinates `t, x^i, y^i`.
pub fn jet_vars(n: usize) -> Vec<Var> {
    (0..dim(n)).map(|a| frame_var(a, n)).collect()
}

fn base_vars(n: usize) -> Vec<Var> {
    (0..=n).map(|a| frame_var(a, n)).collect()
}

/// Semispray with `G^i` of total degree at most 2.
pub fn semispray<R: Rng>(rng: &mut R, n: usize) -> Semispray {
    let vars = jet_vars(n);
    let g = (0..n).map(|_| polynomial(rng, &vars, 2, 3)).collect();
    Semispray::new(n, g).expect("one coefficient per dimension")
}

/// Random `k`-form with sparse low-degree polynomial coefficients.
pub fn form<R: Rng>(rng: &mut R, n: usize, degree: usize) -> KForm {
    let vars = jet_vars(n);
    let m = dim(n);
    let count = rng.random_range(1..=3);
    let parts: Vec<KForm> = (0..count)
        .map(|_| {
            let idx = rand::seq::index::sample(rng, m, degree).into_vec();
            let c = polynomial(rng, &vars, 2, 2);
            KForm::monomial(n, &idx, c)
        })
        .collect();
    KForm::sum(n, degree, &parts)
}

/// Form of degree `degree` that satisfies `ω∧dt = 0`.
pub fn form_with_dt<R: Rng>(rng: &mut R, n: usize, degree: usize) -> KForm {
    let beta = if degree == 1 { KForm::scalar(n, polynomial(rng, &jet_vars(n), 2, 2)) } else { form(rng, n, degree - 1) };
    beta.wedge_dt()
}

pub fn vector_field<R: Rng>(rng: &mut R, n: usize) -> VectorField {
    let vars = jet_vars(n);
    let comps = (0..dim(n))
        .map(|_| if rng.random_bool(0.4) { polynomial(rng, &vars, 1, 2) } else { Expr::zero() })
        .collect();
    VectorField::new(n, comps)
}

/// Sparse `(1,1)`-tensor with affine entries.
pub fn tensor11<R: Rng>(rng: &mut R, n: usize) -> Tensor11 {
    let vars = jet_vars(n);
    let m = dim(n);
    let mut t = Tensor11::zero(n);
    for _ in 0..rng.random_range(1..=m) {
        let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
        t.set(a, b, polynomial(rng, &vars, 1, 2));
    }
    t
}

pub fn semi_basic<R: Rng>(rng: &mut R, n: usize) -> SemiBasicOneForm {
    let vars = jet_vars(n);
    SemiBasicOneForm::new(polynomial(rng, &vars, 2, 3), (0..n).map(|_| polynomial(rng, &vars, 2, 3)).collect())
}

/// `½ yᵀMy + c_i(t, x) y^i − V(t, x)` with `M = BᵀB + I`, `B` a small
/// integer matrix, so that `M` is symmetric positive definite.
pub fn regular_lagrangian<R: Rng>(rng: &mut R, n: usize) -> Lagrangian {
    let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1..=1)).collect()).collect();
    let base = base_vars(n);
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut m: i64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
            if i == j {
                m += 1;
            }
            if m != 0 {
                terms.push(Expr::y(i + 1) * Expr::y(j + 1) * Expr::rational(m, 2));
            }
        }
        if rng.random_bool(0.5) {
            terms.push(polynomial(rng, &base, 2, 2) * Expr::y(i + 1));
        }
    }
    terms.push(-polynomial(rng, &base, 3, 3));
    Lagrangian::new(n, Expr::add_all(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic() {
        let a = semispray(&mut ChaCha8Rng::seed_from_u64(3), 2);
        let b = semispray(&mut ChaCha8Rng::seed_from_u64(3), 2);
        assert_eq!(a, b);
    }

    #[test]
    fn regular_lagrangian_has_constant_positive_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let g = regular_lagrangian(&mut rng, n).metric();
            for (i, row) in g.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    assert!(e.is_constant());
                    assert_eq!(*e, g[j][i]);
                }
                assert!(row[i].as_num().unwrap().is_positive());
            }
        }
    }

    #[test]
    fn forms_with_dt_vanish_against_dt() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=3 {
            assert!(form_with_dt(&mut rng, 2, k).wedge_dt().is_zero());
        }
    }
}
