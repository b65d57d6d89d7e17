use super::lexer::{lex, Tok, Token};
use crate::contract::{Contr, Exp, Op, TExpr};
use crate::error::{Error, Result};

const KEYWORDS: &[&str] = &[
    "zero", "transfer", "scale", "translate", "both", "all", "if", "let", "in", "obs", "cond", "acc",
    "true", "false",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses a contract in the textual syntax.
pub fn parse_contract(src: &str) -> Result<Contr> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let c = p.contract()?;
    p.expect_eof()?;
    Ok(c)
}

/// Parses a standalone expression.
pub fn parse_exp(src: &str) -> Result<Exp> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.exp()?;
    p.expect_eof()?;
    Ok(e)
}

/// Value of a numeric literal. Two or more dots are thousands separators.
pub fn number_value(text: &str) -> Option<f64> {
    if text.matches('.').count() >= 2 {
        let digits: String = text.chars().filter(|c| *c != '.').collect();
        if digits.contains(['e', 'E']) {
            return None;
        }
        return digits.parse::<u64>().ok().map(|n| n as f64);
    }
    text.parse::<f64>().ok()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: String) -> Error {
        let t = &self.toks[self.pos];
        Error::Parse { line: t.line, col: t.col, msg }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_eof(&self) -> Result<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_kw(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// Identifier that is not a keyword.
    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// Party, asset or observable label: identifier or quoted string.
    fn name(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn natural(&mut self, what: &str) -> Result<u64> {
        match self.peek() {
            Tok::Num(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                let v = s.parse::<u64>().map_err(|_| self.error_here(format!("{what} out of range")))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn integer(&mut self, what: &str) -> Result<i64> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.next();
        }
        let n = self.natural(what)?;
        let n = i64::try_from(n).map_err(|_| self.error_here(format!("{what} out of range")))?;
        Ok(if neg { -n } else { n })
    }

    fn texpr(&mut self) -> Result<TExpr> {
        match self.peek() {
            Tok::Num(_) => Ok(TExpr::num(self.natural("a day count")?)),
            Tok::Ident(s) if !is_keyword(s) => Ok(TExpr::var(self.ident("a template variable")?)),
            _ => Err(self.unexpected("a day count or template variable")),
        }
    }

    fn contract(&mut self) -> Result<Contr> {
        let kw = match self.peek() {
            Tok::LParen => {
                self.next();
                let c = self.contract()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(c);
            }
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a contract")),
        };
        match kw.as_str() {
            "zero" => {
                self.next();
                Ok(Contr::Zero)
            }
            "transfer" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let from = self.name("a party")?;
                self.expect(Tok::Comma, "`,`")?;
                let to = self.name("a party")?;
                self.expect(Tok::Comma, "`,`")?;
                let asset = self.name("an asset")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Contr::transfer(&from, &to, &asset))
            }
            "scale" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.exp()?;
                self.expect(Tok::Comma, "`,`")?;
                let c = self.contract()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Contr::scale(e, c))
            }
            "translate" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let t = self.texpr()?;
                self.expect(Tok::Comma, "`,`")?;
                let c = self.contract()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Contr::translate(t, c))
            }
            "both" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let l = self.contract()?;
                self.expect(Tok::Comma, "`,`")?;
                let r = self.contract()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Contr::both(l, r))
            }
            "all" => {
                self.next();
                self.expect(Tok::LBrack, "`[`")?;
                let mut parts = Vec::new();
                if *self.peek() != Tok::RBrack {
                    parts.push(self.contract()?);
                    while *self.peek() == Tok::Comma {
                        self.next();
                        parts.push(self.contract()?);
                    }
                }
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Contr::all(parts))
            }
            "if" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.exp()?;
                self.expect(Tok::Comma, "`,`")?;
                let window = match self.peek() {
                    Tok::Num(_) => Some(self.texpr()?),
                    Tok::Ident(s) if !is_keyword(s) => Some(self.texpr()?),
                    _ => None,
                };
                if window.is_some() {
                    self.expect(Tok::Comma, "`,`")?;
                }
                let c1 = self.contract()?;
                self.expect(Tok::Comma, "`,`")?;
                let c2 = self.contract()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Contr::if_within(e, window.unwrap_or(TExpr::num(0)), c1, c2))
            }
            "let" => {
                self.next();
                let x = self.ident("a variable name")?;
                self.expect(Tok::Assign, "`=`")?;
                let e = self.exp()?;
                self.keyword("in")?;
                let c = self.contract()?;
                Ok(Contr::let_in(x, e, c))
            }
            _ => Err(self.unexpected("a contract")),
        }
    }

    fn exp(&mut self) -> Result<Exp> {
        let mut l = self.and_exp()?;
        while *self.peek() == Tok::Or {
            self.next();
            let r = self.and_exp()?;
            l = Exp::bin(Op::Or, l, r);
        }
        Ok(l)
    }

    fn and_exp(&mut self) -> Result<Exp> {
        let mut l = self.cmp_exp()?;
        while *self.peek() == Tok::And {
            self.next();
            let r = self.cmp_exp()?;
            l = Exp::bin(Op::And, l, r);
        }
        Ok(l)
    }

    fn cmp_exp(&mut self) -> Result<Exp> {
        let l = self.add_exp()?;
        let op = self.peek().clone();
        let mk: fn(Exp, Exp) -> Exp = match op {
            Tok::Lt => |a, b| Exp::bin(Op::Lt, a, b),
            Tok::Leq => |a, b| Exp::bin(Op::Leq, a, b),
            Tok::Gt => |a, b| Exp::bin(Op::Lt, b, a),
            Tok::Geq => |a, b| Exp::bin(Op::Leq, b, a),
            Tok::EqEq => |a, b| Exp::bin(Op::Eq, a, b),
            _ => return Ok(l),
        };
        self.next();
        let r = self.add_exp()?;
        if matches!(self.peek(), Tok::Lt | Tok::Leq | Tok::Gt | Tok::Geq | Tok::EqEq) {
            return Err(self.error_here("comparisons do not chain; add parentheses".into()));
        }
        Ok(mk(l, r))
    }

    fn add_exp(&mut self) -> Result<Exp> {
        let mut l = self.mul_exp()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => return Ok(l),
            };
            self.next();
            let r = self.mul_exp()?;
            l = Exp::bin(op, l, r);
        }
    }

    fn mul_exp(&mut self) -> Result<Exp> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Op::Mult,
                Tok::Slash => Op::Div,
                _ => return Ok(l),
            };
            self.next();
            let r = self.unary()?;
            l = Exp::bin(op, l, r);
        }
    }

    fn unary(&mut self) -> Result<Exp> {
        match self.peek() {
            Tok::Minus => {
                if let Tok::Num(text) = self.peek_at(1).clone() {
                    self.next();
                    let v = self.number(&text)?;
                    return Ok(Exp::real(-v));
                }
                self.next();
                Ok(Exp::op(Op::Neg, vec![self.unary()?]))
            }
            Tok::Bang => {
                self.next();
                Ok(Exp::op(Op::Not, vec![self.unary()?]))
            }
            _ => self.atom(),
        }
    }

    fn number(&mut self, text: &str) -> Result<f64> {
        let v = number_value(text).ok_or_else(|| self.error_here(format!("malformed number `{text}`")))?;
        self.next();
        Ok(v)
    }

    fn atom(&mut self) -> Result<Exp> {
        match self.peek().clone() {
            Tok::Num(text) => Ok(Exp::real(self.number(&text)?)),
            Tok::LParen => {
                self.next();
                let e = self.exp()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.next();
                    Ok(Exp::bool(s == "true"))
                }
                "obs" => {
                    self.next();
                    self.expect(Tok::LParen, "`(`")?;
                    let label = self.name("an observable label")?;
                    self.expect(Tok::Comma, "`,`")?;
                    let i = self.integer("a day offset")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Exp::obs(label, i))
                }
                "cond" => {
                    self.next();
                    self.expect(Tok::LParen, "`(`")?;
                    let b = self.exp()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let e1 = self.exp()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let e2 = self.exp()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Exp::cond(b, e1, e2))
                }
                "acc" => {
                    self.next();
                    self.expect(Tok::LParen, "`(`")?;
                    let x = self.ident("a variable name")?;
                    self.expect(Tok::Dot, "`.`")?;
                    let body = self.exp()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let d = self.natural("a day count")?;
                    self.expect(Tok::Comma, "`,`")?;
                    let init = self.exp()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Exp::acc(x, body, d, init))
                }
                kw if is_keyword(kw) => Err(self.unexpected("an expression")),
                _ => Ok(Exp::var(self.ident("a variable")?)),
            },
            _ => Err(self.unexpected("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero() {
        assert_eq!(parse_contract("zero").unwrap(), Contr::Zero);
        assert_eq!(parse_contract(" ( zero ) ").unwrap(), Contr::Zero);
    }

    #[test]
    fn thousands_separators() {
        assert_eq!(number_value("1.000.000"), Some(1_000_000.0));
        assert_eq!(number_value("7.21"), Some(7.21));
        assert_eq!(number_value("1e-7"), Some(1e-7));
    }

    #[test]
    fn precedence() {
        let e = parse_exp("1 + 2 * obs(A, -1) < 3 & true | false").unwrap();
        let expect = Exp::bin(
            Op::Or,
            Exp::bin(
                Op::And,
                Exp::lt(
                    Exp::add(Exp::real(1.0), Exp::mult(Exp::real(2.0), Exp::obs("A", -1))),
                    Exp::real(3.0),
                ),
                Exp::bool(true),
            ),
            Exp::bool(false),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_exp("-2.5").unwrap(), Exp::real(-2.5));
        assert_eq!(parse_exp("1-2").unwrap(), Exp::sub(Exp::real(1.0), Exp::real(2.0)));
        assert_eq!(parse_exp("1 - -2").unwrap(), Exp::sub(Exp::real(1.0), Exp::real(-2.0)));
        assert_eq!(
            parse_exp("-(2)").unwrap(),
            Exp::op(Op::Neg, vec![Exp::real(2.0)])
        );
    }

    #[test]
    fn if_forms() {
        let c3 = parse_contract("if(true, zero, zero)").unwrap();
        assert_eq!(c3, Contr::if_within(Exp::bool(true), TExpr::num(0), Contr::Zero, Contr::Zero));
        let c4 = parse_contract("if(true, T, zero, zero)").unwrap();
        assert_eq!(c4, Contr::if_within(Exp::bool(true), TExpr::var("T"), Contr::Zero, Contr::Zero));
    }

    #[test]
    fn let_and_acc() {
        let c = parse_contract("let x = acc(y. y + obs(A, 0), 3, 0.0) in scale(x, zero)").unwrap();
        let acc = Exp::acc("y", Exp::add(Exp::var("y"), Exp::obs("A", 0)), 3, Exp::real(0.0));
        assert_eq!(c, Contr::let_in("x", acc, Contr::scale(Exp::var("x"), Contr::Zero)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_contract("translate(90,\n  transfer(me, you))") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 19)),
            other => panic!("{other:?}"),
        }
        assert!(parse_exp("1 < 2 < 3").is_err());
        assert!(parse_contract("zero zero").is_err());
    }
}
