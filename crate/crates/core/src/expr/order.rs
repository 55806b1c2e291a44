//! Total order on canonical expressions.
//!
//! Every non-numeric expression is viewed as a coefficient times a list of
//! `(base, exponent)` factors. Views are compared lexicographically, which
//! keeps polynomial terms in a readable order (`x1 < x1^2 < x1*y1 < y1`).

use std::cmp::Ordering;

use super::{Expr, Node, Q};

fn kind_rank(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(_) => 0,
        Node::Var(_) => 1,
        Node::Func(..) => 2,
        Node::Pow(..) => 3,
        Node::Add(..) => 4,
        Node::Mul(..) => 5,
    }
}

/// Compare expressions that can appear as factor bases (never products).
fn cmp_base(a: &Expr, b: &Expr) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    match (a.node(), b.node()) {
        (Node::Num(p), Node::Num(q)) => p.cmp(q),
        (Node::Var(u), Node::Var(v)) => u.cmp(v),
        (Node::Func(f, u), Node::Func(g, v)) => f.cmp(g).then_with(|| u.cmp(v)),
        (Node::Pow(u, p), Node::Pow(v, q)) => cmp_base(u, v).then_with(|| p.cmp(q)),
        (Node::Add(c, ts), Node::Add(d, us)) => cmp_terms(ts, us).then_with(|| c.cmp(d)),
        (Node::Mul(..), Node::Mul(..)) => a.cmp(b),
        _ => kind_rank(a).cmp(&kind_rank(b)),
    }
}

fn cmp_terms(ts: &[(Expr, Q)], us: &[(Expr, Q)]) -> Ordering {
    for ((a, p), (b, q)) in ts.iter().zip(us) {
        let o = a.cmp(b).then_with(|| p.cmp(q));
        if o != Ordering::Equal {
            return o;
        }
    }
    ts.len().cmp(&us.len())
}

fn cmp_factors(ts: &[(Expr, Q)], us: &[(Expr, Q)]) -> Ordering {
    for ((a, p), (b, q)) in ts.iter().zip(us) {
        let o = cmp_base(a, b).then_with(|| p.cmp(q));
        if o != Ordering::Equal {
            return o;
        }
    }
    ts.len().cmp(&us.len())
}

fn view(e: &Expr) -> (Q, std::borrow::Cow<'_, [(Expr, Q)]>) {
    use std::borrow::Cow;
    match e.node() {
        Node::Mul(c, fs) => (c.clone(), Cow::Borrowed(fs.as_slice())),
        Node::Pow(b, p) => (Q::one(), Cow::Owned(vec![(b.clone(), p.clone())])),
        _ => (Q::one(), Cow::Owned(vec![(e.clone(), Q::one())])),
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self.node(), other.node()) {
            (Node::Num(p), Node::Num(q)) => p.cmp(q),
            (Node::Num(_), _) => Ordering::Less,
            (_, Node::Num(_)) => Ordering::Greater,
            _ => {
                let (ca, fa) = view(self);
                let (cb, fb) = view(other);
                cmp_factors(&fa, &fb).then_with(|| ca.cmp(&cb))
            }
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
