//! Exact partial derivatives and substitution.

use super::{Expr, Func, Node, Var, Q};

impl Expr {
    /// Partial derivative with respect to `v`, canonicalized.
    pub fn diff(&self, v: Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(_, ts) => Expr::add_all(ts.iter().map(|(m, k)| m.diff(v).scale(k))),
            Node::Mul(c, fs) => {
                let mut terms = Vec::new();
                for (i, (b, p)) in fs.iter().enumerate() {
                    if !b.depends_on(v) {
                        continue;
                    }
                    let mut items: Vec<Expr> = Vec::with_capacity(fs.len() + 2);
                    items.push(Expr::num(c * p));
                    for (j, (bj, pj)) in fs.iter().enumerate() {
                        if j != i {
                            items.push(bj.pow_q(pj));
                        }
                    }
                    items.push(b.pow_q(&(p - &Q::one())));
                    items.push(b.diff(v));
                    terms.push(Expr::mul_all(items));
                }
                Expr::add_all(terms)
            }
            Node::Pow(b, p) => Expr::mul_all([Expr::num(p.clone()), b.pow_q(&(p - &Q::one())), b.diff(v)]),
            Node::Func(f, u) => {
                let du = u.diff(v);
                let outer = match f {
                    Func::Sin => Expr::cos(u),
                    Func::Cos => -Expr::sin(u),
                    Func::Exp => self.clone(),
                    Func::Ln => u.recip(),
                };
                outer * du
            }
        }
    }

    /// Replace every occurrence of `v` by `r`.
    pub fn subs(&self, v: Var, r: &Expr) -> Expr {
        self.subs_with(&|w| if w == v { Some(r.clone()) } else { None })
    }

    /// Replace variables according to `f`; variables mapped to `None` stay.
    pub fn subs_with(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        if self.is_constant() {
            return self.clone();
        }
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(w) => f(*w).unwrap_or_else(|| self.clone()),
            Node::Add(c, ts) => Expr::add_all(
                std::iter::once(Expr::num(c.clone())).chain(ts.iter().map(|(m, k)| m.subs_with(f).scale(k))),
            ),
            Node::Mul(c, fs) => Expr::mul_all(
                std::iter::once(Expr::num(c.clone())).chain(fs.iter().map(|(b, p)| b.subs_with(f).pow_q(p))),
            ),
            Node::Pow(b, p) => b.subs_with(f).pow_q(p),
            Node::Func(g, u) => Expr::apply(*g, &u.subs_with(f)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s, 2).unwrap()
    }

    #[test]
    fn basic_rules() {
        assert_eq!(p("y1*y2").diff(Var::Y(2)), p("y1"));
        assert_eq!(p("exp(2*t)").diff(Var::T), p("2*exp(2*t)"));
        assert_eq!(p("sin(x1*y1)").diff(Var::X(1)), p("y1*cos(x1*y1)"));
        assert_eq!(p("ln(x1)").diff(Var::X(1)), p("1/x1"));
        assert_eq!(p("sqrt(x1)").diff(Var::X(1)), p("1/(2*sqrt(x1))"));
        assert_eq!(p("cos(t)").diff(Var::T), p("-sin(t)"));
        assert_eq!(p("1/(x1 + y1)").diff(Var::Y(1)), p("-(x1 + y1)^-2"));
        assert_eq!(p("x2").diff(Var::X(1)), Expr::zero());
    }

    #[test]
    fn product_rule_on_mixed_factors() {
        let e = p("x1^2*exp(t)*sin(y1)");
        assert_eq!(e.diff(Var::X(1)), p("2*x1*exp(t)*sin(y1)"));
        assert_eq!(e.diff(Var::Y(1)), p("x1^2*exp(t)*cos(y1)"));
        assert_eq!(e.diff(Var::T), e);
    }

    #[test]
    fn substitution() {
        let e = p("x1*y1 + y1^2");
        let s = Expr::rational(1, 2) * Expr::y(1);
        assert_eq!(e.subs(Var::Y(1), &s), p("x1*y1/2 + y1^2/4"));
        assert_eq!(e.subs(Var::Y(1), &Expr::zero()), Expr::zero());
        assert_eq!(p("exp(y1)*exp(-y1)"), Expr::one());
    }
}
