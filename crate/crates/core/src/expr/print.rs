//! Infix printing in the same grammar the parser accepts.

use std::fmt::{self, Write};

use super::{Expr, Node, Q};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;

fn write_q_factor(out: &mut String, q: &Q) {
    // Rationals as factors print as `1/2*x`, which re-parses left-associatively.
    let _ = write!(out, "{q}");
}

fn write_exponent(out: &mut String, p: &Q) {
    if p.is_integer() && p.is_positive() {
        let _ = write!(out, "^{p}");
    } else {
        let _ = write!(out, "^({p})");
    }
}

fn write_base(out: &mut String, b: &Expr) {
    match b.node() {
        Node::Var(_) | Node::Func(..) => write_expr(out, b, 0),
        Node::Num(q) if q.is_integer() && !q.is_negative() => {
            let _ = write!(out, "{q}");
        }
        _ => {
            out.push('(');
            write_expr(out, b, 0);
            out.push(')');
        }
    }
}

fn write_factors(out: &mut String, fs: &[(Expr, Q)]) {
    for (i, (b, p)) in fs.iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        write_base(out, b);
        if !p.is_one() {
            write_exponent(out, p);
        }
    }
}

/// Writes `k * m` for a monomial `m` with coefficient one.
fn write_scaled(out: &mut String, k: &Q, m: &Expr) {
    if k.is_one() {
        write_expr(out, m, PREC_PRODUCT);
    } else if k == &Q::from_int(-1) {
        out.push('-');
        write_expr(out, m, PREC_PRODUCT);
    } else {
        write_q_factor(out, k);
        out.push('*');
        write_expr(out, m, PREC_PRODUCT);
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    let (prec, body) = {
        let mut s = String::new();
        let prec = match e.node() {
            Node::Num(q) => {
                let _ = write!(s, "{q}");
                if q.is_integer() && !q.is_negative() {
                    u8::MAX
                } else {
                    PREC_SUM
                }
            }
            Node::Var(v) => {
                let _ = write!(s, "{v}");
                u8::MAX
            }
            Node::Func(f, a) => {
                s.push_str(f.name());
                s.push('(');
                write_expr(&mut s, a, 0);
                s.push(')');
                u8::MAX
            }
            Node::Pow(b, p) => {
                write_base(&mut s, b);
                write_exponent(&mut s, p);
                PREC_POWER
            }
            Node::Mul(c, fs) => {
                if c == &Q::from_int(-1) {
                    s.push('-');
                } else if !c.is_one() {
                    write_q_factor(&mut s, c);
                    s.push('*');
                }
                write_factors(&mut s, fs);
                if c.is_negative() {
                    PREC_SUM
                } else {
                    PREC_PRODUCT
                }
            }
            Node::Add(c, ts) => {
                for (i, (m, k)) in ts.iter().enumerate() {
                    if i == 0 {
                        write_scaled(&mut s, k, m);
                    } else if k.is_negative() {
                        s.push_str(" - ");
                        write_scaled(&mut s, &-k, m);
                    } else {
                        s.push_str(" + ");
                        write_scaled(&mut s, k, m);
                    }
                }
                if c.is_negative() {
                    let _ = write!(s, " - {}", -c);
                } else if !c.is_zero() {
                    let _ = write!(s, " + {c}");
                }
                PREC_SUM
            }
        };
        (prec, s)
    };
    if prec < ctx {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, 0);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn show(s: &str) -> String {
        parse(s, 2).unwrap().to_string()
    }

    #[test]
    fn prints_readably() {
        assert_eq!(show("y1^2/2"), "1/2*y1^2");
        assert_eq!(show("x1 - y1"), "x1 - y1");
        assert_eq!(show("-x1"), "-x1");
        assert_eq!(show("1/x1"), "x1^(-1)");
        assert_eq!(show("sqrt(x1)"), "x1^(1/2)");
        assert_eq!(show("exp(2*t)"), "exp(2*t)");
        assert_eq!(show("(x1 + 1)^(-2)"), "(x1 + 1)^(-2)");
        assert_eq!(show("-1/3"), "-1/3");
    }
}
