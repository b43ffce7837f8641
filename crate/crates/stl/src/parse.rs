//! Text grammar for formulas.
//!
//! `G[k1,k2](...)` is Always, `F[k1,k2](...)` is Eventually, `&` binds
//! tighter than `|`, and predicates are affine expressions over the named
//! features compared against zero, e.g. `0.4111*x - 0.3976*y + 3.8745 > 0`.
//! `format_formula` emits the canonical spelling and round-trips through
//! `parse_formula` to an identical syntax tree.

use crate::ast::check_window;
use crate::{Real, Result, StlError, StlFormula, DIM, FEATURE_NAMES};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Real),
    Name(usize),
    Always,
    Eventually,
    LPar,
    RPar,
    LBrack,
    RBrack,
    Comma,
    And,
    Or,
    Star,
    Plus,
    Minus,
    Gt,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '(' => Tok::LPar,
            ')' => Tok::RPar,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '&' => Tok::And,
            '|' => Tok::Or,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '>' => Tok::Gt,
            'G' => Tok::Always,
            'F' => Tok::Eventually,
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                let lit = &text[start..i];
                let v: Real = lit.parse().map_err(|_| StlError::Syntax {
                    pos: start,
                    msg: format!("bad number literal '{lit}'"),
                })?;
                toks.push((Tok::Num(v), start));
                continue;
            }
            _ => {
                if let Some(idx) = FEATURE_NAMES.iter().position(|&n| n == c.to_string()) {
                    Tok::Name(idx)
                } else {
                    return Err(StlError::Syntax {
                        pos: i,
                        msg: format!("unexpected character '{c}'"),
                    });
                }
            }
        };
        toks.push((tok, i));
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |&(_, p)| p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(StlError::Syntax { pos, msg: format!("expected {what}") }),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(StlError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<StlFormula> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { StlFormula::Or(terms) })
    }

    fn term(&mut self) -> Result<StlFormula> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { StlFormula::And(factors) })
    }

    fn factor(&mut self) -> Result<StlFormula> {
        match self.peek() {
            Some(Tok::Always) | Some(Tok::Eventually) => {
                let eventually = self.bump() == Some(Tok::Eventually);
                let (k1, k2) = self.window()?;
                self.expect(Tok::LPar, "'('")?;
                let child = self.expr()?;
                self.expect(Tok::RPar, "')'")?;
                check_window(k1, k2)?;
                Ok(if eventually {
                    StlFormula::Eventually { k1, k2, child: Box::new(child) }
                } else {
                    StlFormula::Always { k1, k2, child: Box::new(child) }
                })
            }
            Some(Tok::LPar) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RPar, "')'")?;
                Ok(inner)
            }
            _ => self.predicate(),
        }
    }

    fn window(&mut self) -> Result<(usize, usize)> {
        self.expect(Tok::LBrack, "'['")?;
        let k1 = self.slot_index()?;
        self.expect(Tok::Comma, "','")?;
        let k2 = self.slot_index()?;
        self.expect(Tok::RBrack, "']'")?;
        Ok((k1, k2))
    }

    fn slot_index(&mut self) -> Result<usize> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 => Ok(v as usize),
            _ => Err(StlError::Syntax { pos, msg: "expected a nonnegative integer slot".into() }),
        }
    }

    fn predicate(&mut self) -> Result<StlFormula> {
        let mut a = [0.0; DIM];
        let mut constant = 0.0;
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(Tok::Minus) => {
                    self.bump();
                    -1.0
                }
                Some(Tok::Plus) => {
                    self.bump();
                    1.0
                }
                _ if first => 1.0,
                Some(Tok::Gt) => break,
                _ => return self.err("expected '+', '-', or '>'"),
            };
            first = false;
            match self.bump() {
                Some(Tok::Num(v)) => {
                    if self.peek() == Some(&Tok::Star) {
                        self.bump();
                        let pos = self.pos();
                        match self.bump() {
                            Some(Tok::Name(idx)) => a[idx] += sign * v,
                            _ => {
                                return Err(StlError::Syntax {
                                    pos,
                                    msg: "expected a feature name after '*'".into(),
                                })
                            }
                        }
                    } else {
                        constant += sign * v;
                    }
                }
                Some(Tok::Name(idx)) => a[idx] += sign,
                _ => return self.err("expected a number or feature name"),
            }
        }
        self.expect(Tok::Gt, "'>'")?;
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) if v == 0.0 => {}
            _ => return Err(StlError::Syntax { pos, msg: "predicates compare against 0".into() }),
        }
        Ok(StlFormula::Predicate { a, b: -constant })
    }
}

/// Parse the grammar above into a formula.
pub fn parse_formula(text: &str) -> Result<StlFormula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len() };
    let phi = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input after formula");
    }
    Ok(phi)
}

/// Canonical text form; `parse_formula(format_formula(φ)) == φ`.
pub fn format_formula(phi: &StlFormula) -> String {
    let mut out = String::new();
    write_formula(phi, &mut out);
    out
}

fn write_formula(phi: &StlFormula, out: &mut String) {
    match phi {
        StlFormula::Predicate { a, b } => write_predicate(a, *b, out),
        StlFormula::And(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                // Parenthesize anything that would re-associate.
                let wrap = matches!(c, StlFormula::And(_) | StlFormula::Or(_));
                write_child(c, wrap, out);
            }
        }
        StlFormula::Or(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let wrap = matches!(c, StlFormula::Or(_));
                write_child(c, wrap, out);
            }
        }
        StlFormula::Always { k1, k2, child } => {
            out.push_str(&format!("G[{k1},{k2}]("));
            write_formula(child, out);
            out.push(')');
        }
        StlFormula::Eventually { k1, k2, child } => {
            out.push_str(&format!("F[{k1},{k2}]("));
            write_formula(child, out);
            out.push(')');
        }
    }
}

fn write_child(c: &StlFormula, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
    }
    write_formula(c, out);
    if wrap {
        out.push(')');
    }
}

fn write_predicate(a: &[Real; DIM], b: Real, out: &mut String) {
    let mut any = false;
    for (coef, name) in a.iter().zip(FEATURE_NAMES) {
        if *coef == 0.0 {
            continue;
        }
        if any {
            out.push_str(if *coef < 0.0 { " - " } else { " + " });
        } else if *coef < 0.0 {
            out.push('-');
        }
        out.push_str(&format!("{}*{}", coef.abs(), name));
        any = true;
    }
    let constant = -b;
    if constant != 0.0 || !any {
        if any {
            out.push_str(if constant < 0.0 { " - " } else { " + " });
            out.push_str(&format!("{}", constant.abs()));
        } else {
            out.push_str(&format!("{constant}"));
        }
    }
    out.push_str(" > 0");
}
