//! Structural identities of the Cartan and Frölicher-Nijenhuis calculus
//! evaluated on one semispray and seeded random forms and tensors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::{Evidence, Expr, ProbeError, Var, ZeroTester, ZeroVerdict, Q};
use crate::forms::{
    bracket, d_a, dim, d_k, exterior_d, fn_bracket_t11, interior_t11, interior_vf, interior_vv2, lie_form, lie_t11,
    nijenhuis, vv1_wedge_dt, FormError, KForm, Tensor11, VectorField,
};
use crate::random;
use crate::semispray::{Semispray, SprayGeometry};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub verdict: ZeroVerdict,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Form(#[from] FormError),
}

struct Suite<'a> {
    tester: &'a ZeroTester,
    out: Vec<IdentityCheck>,
}

impl Suite<'_> {
    fn record(&mut self, name: &str, residuals: Vec<Expr>) -> Result<(), ProbeError> {
        let verdict = self.tester.all_zero(&residuals)?;
        self.out.push(IdentityCheck { name: name.to_string(), evidence: verdict.evidence(), verdict });
        Ok(())
    }
}

fn sign(k: usize) -> Q {
    if k % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn vf_coeffs(x: &VectorField) -> Vec<Expr> {
    x.comps().to_vec()
}

/// Every identity, in a fixed order. Random operands are drawn from `seed`.
pub fn run(s: &Semispray, tester: &ZeroTester, seed: u64) -> Result<Vec<IdentityCheck>, IdentityError> {
    let geom = SprayGeometry::new(s);
    let n = s.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = Suite { tester, out: Vec::new() };
    let jac = &geom.j;
    let h = &geom.proj.h;
    let v = &geom.proj.v;
    let r_form = geom.curvature_form();
    let sf = &geom.field;

    // Operands shared by the operator identities.
    let scalar = KForm::scalar(n, random::polynomial(&mut rng, &random::jet_vars(n), 2, 3));
    let w1 = random::form(&mut rng, n, 1);
    let w2 = random::form(&mut rng, n, 2);
    let (a, b) = (random::tensor11(&mut rng, n), random::tensor11(&mut rng, n));
    let x = random::vector_field(&mut rng, n);
    let low = [&scalar, &w1];
    let pos = [&w1, &w2];

    suite.record("J^2 = 0", jac.compose(jac).entries())?;
    suite.record("N_J = -J∧dt", nijenhuis(jac).add(&vv1_wedge_dt(jac)).coefficients())?;

    let mut res = Vec::new();
    for w in low {
        res.extend(exterior_d(&exterior_d(w)?)?.coefficients());
    }
    suite.record("d∘d = 0", res)?;

    let ab = fn_bracket_t11(&a, &b);
    let (ba_comp, ab_comp) = (b.compose(&a), a.compose(&b));
    let la = lie_t11(&x, &a);
    let ax = a.apply(&x);
    let (mut c1, mut c2, mut c3, mut c4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for w in pos {
        let lhs = interior_t11(&a, &d_a(&b, w)?).sub(&d_a(&b, &interior_t11(&a, w))?);
        let rhs = d_a(&ba_comp, w)?.sub(&interior_vv2(&ab, w)?);
        c1.extend(lhs.sub(&rhs).coefficients());

        let lhs = lie_form(&x, &interior_t11(&a, w)).sub(&interior_t11(&a, &lie_form(&x, w)));
        c2.extend(lhs.sub(&interior_t11(&la, w)).coefficients());

        let lhs = interior_vf(&x, &d_a(&a, w)?)?.add(&d_a(&a, &interior_vf(&x, w)?)?);
        let rhs = lie_form(&ax, w).sub(&interior_t11(&la, w));
        c3.extend(lhs.sub(&rhs).coefficients());

        let lhs = interior_t11(&a, &interior_t11(&b, w)).sub(&interior_t11(&b, &interior_t11(&a, w)));
        let rhs = interior_t11(&ba_comp, w).sub(&interior_t11(&ab_comp, w));
        c4.extend(lhs.sub(&rhs).coefficients());
    }
    suite.record("i_A d_B - d_B i_A = d_{B∘A} - i_[A,B]", c1)?;
    suite.record("L_X i_A - i_A L_X = i_[X,A]", c2)?;
    suite.record("i_X d_A + d_A i_X = L_{AX} - i_[X,A]", c3)?;
    suite.record("i_A i_B - i_B i_A = i_{B∘A} - i_{A∘B}", c4)?;

    let nj = nijenhuis(jac);
    let mut res = Vec::new();
    for w in low {
        res.extend(d_k(&nj, w)?.sub(&d_a(jac, &d_a(jac, w)?)?).coefficients());
    }
    suite.record("d_{N_J} = d_J∘d_J", res)?;

    let jdt = vv1_wedge_dt(jac);
    let (mut ires, mut dres) = (Vec::new(), Vec::new());
    for w in [&scalar, &w1, &w2] {
        if w.degree() >= 1 {
            let rhs = interior_t11(jac, w).wedge_dt().scale_q(&sign(w.degree() + 1));
            ires.extend(interior_vv2(&jdt, w)?.sub(&rhs).coefficients());
        }
        if w.degree() + 2 <= dim(n) {
            let rhs = d_a(jac, w)?.wedge_dt().scale_q(&sign(w.degree()));
            dres.extend(d_k(&jdt, w)?.sub(&rhs).coefficients());
        }
    }
    suite.record("i_{J∧dt}ω = (-1)^(k+1) i_Jω∧dt", ires)?;
    suite.record("d_{J∧dt}ω = (-1)^k d_Jω∧dt", dres)?;

    let mut res = Vec::new();
    for k in 1..=2 {
        let w = random::form_with_dt(&mut rng, n, k);
        res.extend(w.sub(&interior_vf(sf, &w)?.wedge_dt().scale_q(&sign(k + 1))).coefficients());
    }
    suite.record("ω∧dt = 0 ⇒ ω = (-1)^(k+1) i_Sω∧dt", res)?;

    suite.record("Φ = i_S R", r_form.contract(sf).sub(&geom.phi).entries())?;
    suite.record("[J,h] = 0", fn_bracket_t11(jac, h).coefficients())?;
    let rhs = r_form.scale_q(&Q::from_int(3)).add(&vv1_wedge_dt(&geom.phi));
    suite.record("[J,Φ] = 3R + Φ∧dt", fn_bracket_t11(jac, &geom.phi).sub(&rhs).coefficients())?;
    suite.record("R = ½[h,h]", nijenhuis(h).sub(&r_form).coefficients())?;

    let cur = &geom.curvature;
    let mut res = Vec::new();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let lhs = cur.jacobi.r[k][j].diff(Var::Y(i + 1)) - cur.jacobi.r[k][i].diff(Var::Y(j + 1));
                res.push(lhs - cur.rkij[k][i][j].scale(&Q::from_int(3)));
            }
        }
    }
    suite.record("∂R^k_j/∂y^i - ∂R^k_i/∂y^j = 3R^k_ij", res)?;

    let f3 = geom.f.compose(&geom.f).compose(&geom.f);
    suite.record("F^3 + F = 0", f3.add(&geom.f).entries())?;
    for (name, t) in [("∇h = 0", h), ("∇v = 0", v), ("∇J = 0", jac), ("∇F = 0", &geom.f)] {
        suite.record(name, geom.nabla_t11(t).entries())?;
    }
    suite.record("∇S = 0", vf_coeffs(&geom.nabla_vf(sf)))?;
    suite.record("∇dt = 0", geom.nabla_form(&KForm::monomial(n, &[0], Expr::one())).coefficients())?;
    suite.record("Lie derivatives along S of the adapted frame", lie_tables(&geom))?;

    let mut res = Vec::new();
    for w in low {
        let lhs = exterior_d(&geom.nabla_form(w))?.sub(&geom.nabla_form(&exterior_d(w)?));
        res.extend(lhs.sub(&d_a(&geom.psi, w)?).coefficients());
    }
    suite.record("d∇ - ∇d = d_Ψ", res)?;

    let mut res = Vec::new();
    for t in [h, v, jac, &geom.f] {
        let lhs = geom.nabla_form(&interior_t11(t, &w1)).sub(&interior_t11(t, &geom.nabla_form(&w1)));
        res.extend(lhs.sub(&interior_t11(&geom.nabla_t11(t), &w1)).coefficients());
    }
    suite.record("∇i_A - i_A∇ = i_{∇A}", res)?;

    let theta = random::semi_basic(&mut rng, n).to_coords();
    let is_theta = interior_vf(sf, &theta)?;
    let dh_theta = d_a(h, &theta)?;
    let rhs = d_a(h, &is_theta)?.add(&interior_vf(sf, &dh_theta)?);
    suite.record("∇θ = d_h i_Sθ + i_S d_hθ", geom.nabla_form(&theta).sub(&rhs).coefficients())?;
    let rhs = interior_t11(h, &interior_vf(sf, &exterior_d(&theta)?)?);
    suite.record("i_S d_hθ = i_h i_S dθ", interior_vf(sf, &dh_theta)?.sub(&rhs).coefficients())?;

    Ok(suite.out)
}

/// Residuals of the Lie derivatives of the adapted frame and coframe along
/// `S`, of `L_S J` and `L_S h`, and of the horizontal brackets.
fn lie_tables(geom: &SprayGeometry) -> Vec<Expr> {
    let n = geom.n();
    let fr = &geom.frame;
    let sf = &geom.field;
    let r = &geom.jacobi().r;
    let nij = &geom.conn.n_ij;
    let delta = |i: usize| fr.frame_field(1 + i);
    let dy = |i: usize| fr.frame_field(1 + n + i);
    let dx_form = |i: usize| fr.coframe(1 + i);
    let dy_form = |i: usize| fr.coframe(1 + n + i);
    let mut res = Vec::new();
    res.extend(lie_form(sf, &fr.coframe(0)).coefficients());
    res.extend(vf_coeffs(&bracket(sf, sf)));
    for i in 0..n {
        let mut expect = vec![dy_form(i)];
        expect.extend((0..n).map(|j| dx_form(j).scale(&-&nij[i][j])));
        res.extend(lie_form(sf, &dx_form(i)).sub(&KForm::sum(n, 1, &expect)).coefficients());

        let expect: Vec<KForm> =
            (0..n).flat_map(|j| [dx_form(j).scale(&-&r[i][j]), dy_form(j).scale(&-&nij[i][j])]).collect();
        res.extend(lie_form(sf, &dy_form(i)).sub(&KForm::sum(n, 1, &expect)).coefficients());

        let mut expect = VectorField::zero(n);
        for j in 0..n {
            expect = expect.add(&delta(j).scale(&nij[j][i])).add(&dy(j).scale(&r[j][i]));
        }
        res.extend(vf_coeffs(&bracket(sf, &delta(i)).sub(&expect)));

        let mut expect = delta(i).scale(&Expr::int(-1));
        for j in 0..n {
            expect = expect.add(&dy(j).scale(&nij[j][i]));
        }
        res.extend(vf_coeffs(&bracket(sf, &dy(i)).sub(&expect)));

        for j in 0..n {
            let mut expect = VectorField::zero(n);
            for k in 0..n {
                expect = expect.add(&dy(k).scale(&geom.curvature.rkij[k][i][j]));
            }
            res.extend(vf_coeffs(&bracket(&delta(i), &delta(j)).sub(&expect)));
            let mut expect = VectorField::zero(n);
            for k in 0..n {
                expect = expect.add(&dy(k).scale(&nij[k][i].diff(Var::Y(j + 1))));
            }
            res.extend(vf_coeffs(&bracket(&delta(i), &dy(j)).sub(&expect)));
        }
    }
    let mut lsj = Tensor11::zero(n);
    let mut lsh = Tensor11::zero(n);
    for i in 0..n {
        lsj = lsj.sub(&Tensor11::outer(&delta(i), &dx_form(i))).add(&Tensor11::outer(&dy(i), &dy_form(i)));
        lsh = lsh.add(&Tensor11::outer(&delta(i), &dy_form(i)));
        for j in 0..n {
            lsh = lsh.add(&Tensor11::outer(&dy(j).scale(&r[j][i]), &dx_form(i)));
        }
    }
    res.extend(lie_t11(sf, &geom.j).sub(&lsj).entries());
    res.extend(lie_t11(sf, &geom.proj.h).sub(&lsh).entries());
    res
}

/// Convenience for callers that only need the conjunction.
pub fn all_pass(checks: &[IdentityCheck]) -> bool {
    checks.iter().all(|c| c.evidence != Evidence::Fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_identities_hold() {
        let checks = run(&Semispray::free(1), &ZeroTester::with_defaults(1, 1), 1).unwrap();
        for c in &checks {
            assert!(c.verdict.is_zero(), "{} failed: {:?}", c.name, c.verdict);
        }
    }

    #[test]
    fn polynomial_semispray_identities_hold() {
        let s = Semispray::parse(2, &["x1*y2 + y1^2/2", "t*y1 - x2"]).unwrap();
        let checks = run(&s, &ZeroTester::with_defaults(2, 3), 3).unwrap();
        for c in &checks {
            assert!(c.verdict.is_zero(), "{} failed: {:?}", c.name, c.verdict);
        }
    }
}
