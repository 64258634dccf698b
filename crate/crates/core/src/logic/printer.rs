//! Concrete syntax with minimal parentheses. Parsing the output yields the
//! original tree.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::{Bound, PathFormula, Query, StateFormula};
use crate::scm::Intervention;

// Binding strength, loosest first.
const UNTIL: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;
const ATOM: u8 = 5;

#[derive(Clone, Copy)]
enum Node<'a> {
    S(&'a StateFormula),
    P(&'a PathFormula),
}

impl Node<'_> {
    fn prec(self) -> u8 {
        match self {
            Node::S(s) => match s {
                StateFormula::Not(_) => UNARY,
                StateFormula::And(..) => AND,
                StateFormula::Or(..) => OR,
                StateFormula::Implies(..) => IMPLIES,
                _ => ATOM,
            },
            Node::P(p) => match p {
                PathFormula::State(s) => Node::S(s).prec(),
                PathFormula::Not(_)
                | PathFormula::Eventually(..)
                | PathFormula::Globally(..)
                | PathFormula::Next(_) => UNARY,
                PathFormula::And(..) => AND,
                PathFormula::Or(..) => OR,
                PathFormula::Implies(..) => IMPLIES,
                PathFormula::Until(..) => UNTIL,
            },
        }
    }

    fn child(f: &mut Formatter<'_>, n: Node<'_>, min: u8) -> fmt::Result {
        if n.prec() < min {
            write!(f, "({n})")
        } else {
            write!(f, "{n}")
        }
    }

    fn binary(f: &mut Formatter<'_>, a: Node<'_>, op: &str, b: Node<'_>, prec: u8) -> fmt::Result {
        // `&` and `|` associate to the left, `->` and `U` to the right
        let (left, right) = if prec == AND || prec == OR { (prec, prec + 1) } else { (prec + 1, prec) };
        Self::child(f, a, left)?;
        write!(f, " {op} ")?;
        Self::child(f, b, right)
    }
}

impl Display for Node<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        use Node::{P, S};
        match *self {
            S(s) => match s {
                StateFormula::True => f.write_str("true"),
                StateFormula::Atom(a) => write_atom(f, a),
                StateFormula::Not(a) => {
                    f.write_char('!')?;
                    Node::child(f, S(a), UNARY)
                }
                StateFormula::And(a, b) => Node::binary(f, S(a), "&", S(b), AND),
                StateFormula::Or(a, b) => Node::binary(f, S(a), "|", S(b), OR),
                StateFormula::Implies(a, b) => Node::binary(f, S(a), "->", S(b), IMPLIES),
                StateFormula::Query(q) => write!(f, "{q}"),
                StateFormula::Cf { intervention, offset, query } => {
                    write!(f, "[{intervention}]@{offset}.{query}")
                }
                StateFormula::Delta { treated, control, offset, query } => {
                    f.write_str("D[")?;
                    write_side(f, treated)?;
                    f.write_str(", ")?;
                    write_side(f, control)?;
                    write!(f, "]@{offset}.{query}")
                }
            },
            P(p) => match p {
                PathFormula::State(s) => S(s).fmt(f),
                PathFormula::Not(a) => {
                    f.write_char('!')?;
                    Node::child(f, P(a), UNARY)
                }
                PathFormula::And(a, b) => Node::binary(f, P(a), "&", P(b), AND),
                PathFormula::Or(a, b) => Node::binary(f, P(a), "|", P(b), OR),
                PathFormula::Implies(a, b) => Node::binary(f, P(a), "->", P(b), IMPLIES),
                PathFormula::Until(a, iv, b) => Node::binary(f, P(a), &format!("U{iv}"), P(b), UNTIL),
                PathFormula::Eventually(iv, a) => {
                    write!(f, "F{iv} ")?;
                    Node::child(f, P(a), UNARY)
                }
                PathFormula::Globally(iv, a) => {
                    write!(f, "G{iv} ")?;
                    Node::child(f, P(a), UNARY)
                }
                PathFormula::Next(a) => {
                    f.write_str("X ")?;
                    Node::child(f, P(a), UNARY)
                }
            },
        }
    }
}

fn write_atom(f: &mut Formatter<'_>, a: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in a.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

fn write_side(f: &mut Formatter<'_>, i: &Intervention) -> fmt::Result {
    if i.replacements().len() > 1 {
        write!(f, "[{i}]")
    } else {
        write!(f, "{i}")
    }
}

impl Display for Bound {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Cmp(c, p) => write!(f, "{c}{p}"),
            Bound::Query => f.write_str("=?"),
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Query::Prob { bound, path } => write!(f, "P{bound} [{path}]"),
            Query::Reward { bound, interval } => write!(f, "R{bound} [C{interval}]"),
        }
    }
}

impl Display for StateFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        Node::S(self).fmt(f)
    }
}

impl Display for PathFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        Node::P(self).fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use crate::logic::{parse_formula, parse_path_formula};

    #[test]
    fn examples_round_trip() {
        for src in [
            r#"P>=0.9 [!"unsafe" U[0,10] "target"]"#,
            r#"[pi<-opt]@-1.P=? [F[0,10] "fail"]"#,
            r#"D[[pi<-a, pi<-b], empty]@3.R<=2.5 [C[0,4]]"#,
            r#"P<-0 [true]"#,
        ] {
            let Ok(f) = parse_formula(src) else {
                // the last one is invalid: thresholds must lie in [0, 1]
                assert!(src.starts_with("P<-"));
                continue;
            };
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{src}");
        }
    }

    #[test]
    fn minimal_parentheses() {
        let cases = [
            (r#"(("a") & ("b")) & "c""#, r#""a" & "b" & "c""#),
            (r#""a" & ("b" & "c")"#, r#""a" & ("b" & "c")"#),
            (r#"!("a" & "b") | !"c""#, r#"!("a" & "b") | !"c""#),
            (r#"("a" -> "b") -> "c""#, r#"("a" -> "b") -> "c""#),
            (r#""a" -> ("b" -> "c")"#, r#""a" -> "b" -> "c""#),
            (r#"(F[0,2] "a") U[1,3] ("b" U[0,1] "c")"#, r#"F[0,2] "a" U[1,3] "b" U[0,1] "c""#),
            (r#"!(G[0,3] "a")"#, r#"!G[0,3] "a""#),
            (r#"X (X "a" & "b")"#, r#"X (X "a" & "b")"#),
        ];
        for (src, printed) in cases {
            let f = parse_path_formula(src).unwrap();
            assert_eq!(f.to_string(), printed, "{src}");
        }
    }

    #[test]
    fn sugar_is_preserved() {
        let f = parse_formula(r#"P>0.5 [G[0,3] "a" | X "b"]"#).unwrap();
        assert_eq!(f.to_string(), r#"P>0.5 [G[0,3] "a" | X "b"]"#);
    }

    #[test]
    fn atoms_with_quotes_are_escaped() {
        let f = parse_formula(r#""say \"hi\" \\ bye""#).unwrap();
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }
}
