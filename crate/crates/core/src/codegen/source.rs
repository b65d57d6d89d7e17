//! Kernel source text: emitter, parser and reference interpreter.
//!
//! ```text
//! program ::= def+
//! def     ::= name '(' name (',' name)* ')' '=' expr
//! expr    ::= 'let' name '=' expr 'in' expr
//!           | 'loop' name '=' expr 'while' expr 'do' expr
//!           | 'if' expr 'then' expr 'else' expr
//!           | or
//! or      ::= and ('||' and)*
//! and     ::= cmp ('&&' cmp)*
//! cmp     ::= add (('<' | '<=' | '==') add)?
//! add     ::= mul (('+' | '-') mul)*
//! mul     ::= unary (('*' | '/') unary)*
//! unary   ::= '-' unary | '!' unary | postfix
//! postfix ::= atom ('[' expr (',' expr)* ']')*
//! atom    ::= int | float | string | 'true' | 'false' | name
//!           | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `loop x = e0 while c do s` binds `x` to `e0`, then replaces it with `s`
//! while `c` holds, and yields the final `x`. `--` starts a comment.
//! Integers and floats do not mix. `ext[r, c]` indexes the row-major
//! observation table, `disc[r]` the per-row discount factors and `tenv[i]`
//! the template values.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use super::kernel::{KExpr, KTime, Kernel, KernelInput};
use crate::contract::Party;
use crate::error::{Error, Result};
use crate::payoff::UnOp;

fn str_lit(s: &str) -> String {
    format!("{s:?}")
}

fn float_lit(v: f64) -> String {
    if v.is_sign_negative() {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

/// `konst + tenv[i] + … (+ counter)`, omitting a zero constant.
fn ktime(t: &KTime, counter: Option<&str>) -> String {
    let mut parts = Vec::new();
    if t.konst != 0 || (t.tenv.is_empty() && counter.is_none()) {
        parts.push(t.konst.to_string());
    }
    parts.extend(t.tenv.iter().map(|i| format!("tenv[{i}]")));
    parts.extend(counter.map(str::to_owned));
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("({})", parts.join(" + "))
    }
}

struct Emitter {
    out: String,
    fresh: usize,
}

impl Emitter {
    fn newline(&mut self, indent: usize) {
        self.out.push('\n');
        for _ in 0..indent {
            self.out.push(' ');
        }
    }

    fn expr(&mut self, k: &KExpr, ctr: &str, indent: usize) {
        match k {
            KExpr::Float { value } => self.out.push_str(&float_lit(*value)),
            KExpr::Nat { value } => write!(self.out, "{value}").unwrap(),
            KExpr::Bool { value } => write!(self.out, "{value}").unwrap(),
            KExpr::Now => self.out.push_str("t_now"),
            KExpr::Time { time } => self.out.push_str(&ktime(time, Some(ctr))),
            KExpr::Ext { row, col } => write!(self.out, "ext[{ctr} + {row}, {col}]").unwrap(),
            KExpr::Payoff { row, from, to } => {
                let (a, b) = (str_lit(from.as_str()), str_lit(to.as_str()));
                write!(
                    self.out,
                    "((if ({a} == p1 && {b} == p2) then 1.0 else if ({a} == p2 && {b} == p1) then -1.0 else 0.0) * disc[{ctr} + {row}])"
                )
                .unwrap()
            }
            KExpr::Unop { op, arg } => {
                self.out.push_str(match op {
                    UnOp::Neg => "-(",
                    UnOp::Not => "!(",
                });
                self.expr(arg, ctr, indent);
                self.out.push(')');
            }
            KExpr::Binop { op, left, right } => {
                self.out.push('(');
                self.expr(left, ctr, indent);
                write!(self.out, " {} ", op.symbol()).unwrap();
                self.expr(right, ctr, indent);
                self.out.push(')');
            }
            KExpr::If { cond, then, els } => self.cond(cond, then, els, ctr, indent),
            KExpr::Loop { cond, then, els, window } if window.konst == 0 && window.tenv.is_empty() => {
                self.cond(cond, then, els, ctr, indent)
            }
            KExpr::Loop { cond, then, els, window } => {
                self.fresh += 1;
                let t = format!("t{}", self.fresh);
                write!(self.out, "(let {t} = loop {t} = {ctr} while (!(").unwrap();
                self.expr(cond, &t, indent + 2);
                write!(self.out, ") && {t} < {ctr} + {}) do {t} + 1 in", ktime(window, None)).unwrap();
                self.newline(indent + 2);
                self.cond(cond, then, els, &t, indent + 2);
                self.out.push(')');
            }
        }
    }

    fn cond(&mut self, cond: &KExpr, then: &KExpr, els: &KExpr, ctr: &str, indent: usize) {
        self.out.push_str("(if ");
        self.expr(cond, ctr, indent + 4);
        self.newline(indent + 2);
        self.out.push_str("then ");
        self.expr(then, ctr, indent + 4);
        self.newline(indent + 2);
        self.out.push_str("else ");
        self.expr(els, ctr, indent + 4);
        self.out.push(')');
    }
}

/// Deterministic source text for `k`.
pub fn emit_kernel_source(k: &Kernel) -> String {
    let mut e = Emitter { out: String::new(), fresh: 0 };
    let days: Vec<String> = k.rows.iter().map(|d| d.to_string()).collect();
    writeln!(e.out, "-- rows (days): [{}]", days.join(", ")).unwrap();
    writeln!(e.out, "-- cols: [{}]", k.cols.join(", ")).unwrap();
    let tenv: Vec<String> = k
        .tenv_names
        .iter()
        .zip(&k.tenv_values)
        .enumerate()
        .map(|(i, (n, v))| format!("{i}: {n} = {v}"))
        .collect();
    writeln!(e.out, "-- tenv: [{}]", tenv.join(", ")).unwrap();
    e.out.push_str("payoffInternal(ext, tenv, disc, t0, t_now, p1, p2) =");
    e.newline(2);
    e.expr(&k.body, "t0", 2);
    e.out.push_str("\n\npayoff(ext, tenv, disc, t_now, p1, p2) =\n  payoffInternal(ext, tenv, disc, 0, t_now, p1, p2)\n");
    e.out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    "&&", "||", "<=", "==", "(", ")", "[", "]", ",", "=", "<", "+", "-", "*", "/", "!",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let code = match line.find("--") {
            Some(i) => &line[..i],
            None => line,
        };
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Name(chars[s..i].iter().collect()), line_no, col));
            } else if c.is_ascii_digit() {
                let s = i;
                let mut float = false;
                while i < chars.len() {
                    let d = chars[i];
                    if d.is_ascii_digit() {
                        i += 1;
                    } else if d == '.' {
                        float = true;
                        i += 1;
                    } else if d == 'e' || d == 'E' {
                        float = true;
                        i += 1;
                        if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                            i += 1;
                        }
                    } else {
                        break;
                    }
                }
                let text: String = chars[s..i].iter().collect();
                let bad = || Error::Parse { line: line_no, col, msg: format!("malformed number `{text}`") };
                let tok = if float {
                    Tok::Float(text.parse().map_err(|_| bad())?)
                } else {
                    Tok::Int(text.parse().map_err(|_| bad())?)
                };
                out.push((tok, line_no, col));
            } else if c == '"' {
                let s = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += if chars[i] == '\\' { 2 } else { 1 };
                }
                if i >= chars.len() {
                    return Err(Error::Parse { line: line_no, col, msg: "unterminated string".into() });
                }
                let raw: String = chars[s - 1..=i].iter().collect();
                let text: String = serde_json::from_str(&raw)
                    .map_err(|_| Error::Parse { line: line_no, col, msg: "bad string escape".into() })?;
                i += 1;
                out.push((Tok::Str(text), line_no, col));
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let sym = SYMBOLS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .ok_or_else(|| Error::Parse { line: line_no, col, msg: format!("unexpected character `{c}`") })?;
                i += sym.len();
                out.push((Tok::Sym(sym), line_no, col));
            }
        }
    }
    let last = src.lines().count().max(1);
    out.push((Tok::Eof, last, 1));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum SExpr {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Var(String),
    Index(Box<SExpr>, Vec<SExpr>),
    Call(String, Vec<SExpr>),
    Neg(Box<SExpr>),
    Not(Box<SExpr>),
    Bin(&'static str, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Let(String, Box<SExpr>, Box<SExpr>),
    Loop { var: String, init: Box<SExpr>, cond: Box<SExpr>, step: Box<SExpr> },
}

#[derive(Debug, Clone)]
struct Def {
    params: Vec<String>,
    body: SExpr,
}

/// A parsed kernel source program.
#[derive(Debug, Clone)]
pub struct Program {
    defs: HashMap<String, Def>,
}

const RESERVED: &[&str] = &["let", "in", "loop", "while", "do", "if", "then", "else", "true", "false"];

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (_, line, col) = &self.toks[self.pos];
        Error::Parse { line: *line, col: *col, msg: msg.into() }
    }

    fn sym(&mut self, s: &'static str) -> Result<()> {
        if *self.peek() == Tok::Sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {:?}", self.peek())))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Name(x) if x == w)
    }

    fn word(&mut self, w: &str) -> Result<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{w}`, found {:?}", self.peek())))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Name(n) if !RESERVED.contains(&n.as_str()) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.err(format!("expected a name, found {other:?}"))),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut defs = HashMap::new();
        while *self.peek() != Tok::Eof {
            let name = self.name()?;
            self.sym("(")?;
            let mut params = vec![self.name()?];
            while self.is_sym(",") {
                self.bump();
                params.push(self.name()?);
            }
            self.sym(")")?;
            self.sym("=")?;
            let body = self.expr()?;
            defs.insert(name, Def { params, body });
        }
        Ok(Program { defs })
    }

    fn expr(&mut self) -> Result<SExpr> {
        if self.is_word("let") {
            self.bump();
            let x = self.name()?;
            self.sym("=")?;
            let bound = self.expr()?;
            self.word("in")?;
            let body = self.expr()?;
            return Ok(SExpr::Let(x, Box::new(bound), Box::new(body)));
        }
        if self.is_word("loop") {
            self.bump();
            let var = self.name()?;
            self.sym("=")?;
            let init = self.expr()?;
            self.word("while")?;
            let cond = self.expr()?;
            self.word("do")?;
            let step = self.expr()?;
            return Ok(SExpr::Loop { var, init: Box::new(init), cond: Box::new(cond), step: Box::new(step) });
        }
        if self.is_word("if") {
            self.bump();
            let c = self.expr()?;
            self.word("then")?;
            let a = self.expr()?;
            self.word("else")?;
            let b = self.expr()?;
            return Ok(SExpr::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        self.or()
    }

    fn or(&mut self) -> Result<SExpr> {
        let mut l = self.and()?;
        while self.is_sym("||") {
            self.bump();
            l = SExpr::Bin("||", Box::new(l), Box::new(self.and()?));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<SExpr> {
        let mut l = self.cmp()?;
        while self.is_sym("&&") {
            self.bump();
            l = SExpr::Bin("&&", Box::new(l), Box::new(self.cmp()?));
        }
        Ok(l)
    }

    fn cmp(&mut self) -> Result<SExpr> {
        let l = self.add()?;
        for op in ["<=", "<", "=="] {
            if self.is_sym(op) {
                self.bump();
                return Ok(SExpr::Bin(op, Box::new(l), Box::new(self.add()?)));
            }
        }
        Ok(l)
    }

    fn add(&mut self) -> Result<SExpr> {
        let mut l = self.mul()?;
        loop {
            let op = if self.is_sym("+") {
                "+"
            } else if self.is_sym("-") {
                "-"
            } else {
                return Ok(l);
            };
            self.bump();
            l = SExpr::Bin(op, Box::new(l), Box::new(self.mul()?));
        }
    }

    fn mul(&mut self) -> Result<SExpr> {
        let mut l = self.unary()?;
        loop {
            let op = if self.is_sym("*") {
                "*"
            } else if self.is_sym("/") {
                "/"
            } else {
                return Ok(l);
            };
            self.bump();
            l = SExpr::Bin(op, Box::new(l), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<SExpr> {
        if self.is_sym("-") {
            self.bump();
            return Ok(SExpr::Neg(Box::new(self.unary()?)));
        }
        if self.is_sym("!") {
            self.bump();
            return Ok(SExpr::Not(Box::new(self.unary()?)));
        }
        let mut e = self.atom()?;
        while self.is_sym("[") {
            self.bump();
            let mut idx = vec![self.expr()?];
            while self.is_sym(",") {
                self.bump();
                idx.push(self.expr()?);
            }
            self.sym("]")?;
            e = SExpr::Index(Box::new(e), idx);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<SExpr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(SExpr::Int(n))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(SExpr::Float(x))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(SExpr::Str(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Name(n) if n == "true" || n == "false" => {
                self.bump();
                Ok(SExpr::Bool(n == "true"))
            }
            Tok::Name(n) if n == "if" || n == "let" || n == "loop" => self.expr(),
            Tok::Name(_) => {
                let n = self.name()?;
                if self.is_sym("(") {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.is_sym(",") {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.sym(")")?;
                    Ok(SExpr::Call(n, args))
                } else {
                    Ok(SExpr::Var(n))
                }
            }
            other => Err(self.err(format!("expected an expression, found {other:?}"))),
        }
    }
}

pub fn parse_kernel_source(src: &str) -> Result<Program> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

#[derive(Debug, Clone)]
enum SVal {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(Rc<str>),
    Table { data: Rc<Vec<f64>>, cols: usize },
    Reals(Rc<Vec<f64>>),
    Ints(Rc<Vec<i64>>),
}

fn type_err(what: &str, v: &[&SVal]) -> Error {
    Error::ValueType(format!("{what} applied to {v:?}"))
}

fn index(len: usize, i: &SVal) -> Result<usize> {
    match i {
        SVal::Int(n) if *n >= 0 && (*n as usize) < len => Ok(*n as usize),
        SVal::Int(n) => Err(Error::IndexOutOfRange(format!("index {n} of {len}"))),
        other => Err(type_err("index", &[other])),
    }
}

struct Interp<'p> {
    prog: &'p Program,
    depth: usize,
}

type Scope = Vec<(String, SVal)>;

impl Interp<'_> {
    fn call(&mut self, name: &str, args: Vec<SVal>) -> Result<SVal> {
        let def = self
            .prog
            .defs
            .get(name)
            .ok_or_else(|| Error::ValueType(format!("unknown function `{name}`")))?;
        if def.params.len() != args.len() {
            return Err(Error::ValueType(format!("`{name}` expects {} arguments", def.params.len())));
        }
        if self.depth > 64 {
            return Err(Error::ValueType("call depth exceeded".into()));
        }
        self.depth += 1;
        let mut scope: Scope = def.params.iter().cloned().zip(args).collect();
        let out = self.eval(&def.body, &mut scope);
        self.depth -= 1;
        out
    }

    fn eval(&mut self, e: &SExpr, scope: &mut Scope) -> Result<SVal> {
        Ok(match e {
            SExpr::Int(n) => SVal::Int(*n),
            SExpr::Float(x) => SVal::Real(*x),
            SExpr::Bool(b) => SVal::Bool(*b),
            SExpr::Str(s) => SVal::Str(Rc::from(s.as_str())),
            SExpr::Var(n) => scope
                .iter()
                .rev()
                .find(|(k, _)| k == n)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::ValueType(format!("unbound name `{n}`")))?,
            SExpr::Call(f, args) => {
                let vals = args.iter().map(|a| self.eval(a, scope)).collect::<Result<Vec<_>>>()?;
                self.call(f, vals)?
            }
            SExpr::Index(arr, idx) => {
                let a = self.eval(arr, scope)?;
                let ix = idx.iter().map(|i| self.eval(i, scope)).collect::<Result<Vec<_>>>()?;
                match (&a, ix.as_slice()) {
                    (SVal::Table { data, cols }, [r, c]) => {
                        let rows = if *cols == 0 { 0 } else { data.len() / cols };
                        let (r, c) = (index(rows, r)?, index(*cols, c)?);
                        SVal::Real(data[r * cols + c])
                    }
                    (SVal::Reals(v), [i]) => SVal::Real(v[index(v.len(), i)?]),
                    (SVal::Ints(v), [i]) => SVal::Int(v[index(v.len(), i)?]),
                    _ => return Err(type_err("indexing", &[&a])),
                }
            }
            SExpr::Neg(x) => match self.eval(x, scope)? {
                SVal::Int(n) => SVal::Int(-n),
                SVal::Real(r) => SVal::Real(-r),
                v => return Err(type_err("-", &[&v])),
            },
            SExpr::Not(x) => match self.eval(x, scope)? {
                SVal::Bool(b) => SVal::Bool(!b),
                v => return Err(type_err("!", &[&v])),
            },
            SExpr::Bin(op, l, r) => {
                let a = self.eval(l, scope)?;
                let b = self.eval(r, scope)?;
                binop(op, &a, &b)?
            }
            SExpr::If(c, a, b) => match self.eval(c, scope)? {
                SVal::Bool(true) => self.eval(a, scope)?,
                SVal::Bool(false) => self.eval(b, scope)?,
                v => return Err(type_err("if", &[&v])),
            },
            SExpr::Let(x, bound, body) => {
                let v = self.eval(bound, scope)?;
                scope.push((x.clone(), v));
                let out = self.eval(body, scope);
                scope.pop();
                out?
            }
            SExpr::Loop { var, init, cond, step } => {
                let v = self.eval(init, scope)?;
                scope.push((var.clone(), v));
                let out = loop {
                    match self.eval(cond, scope) {
                        Ok(SVal::Bool(true)) => match self.eval(step, scope) {
                            Ok(next) => scope.last_mut().unwrap().1 = next,
                            Err(e) => break Err(e),
                        },
                        Ok(SVal::Bool(false)) => break Ok(scope.last().unwrap().1.clone()),
                        Ok(v) => break Err(type_err("while", &[&v])),
                        Err(e) => break Err(e),
                    }
                };
                scope.pop();
                out?
            }
        })
    }
}

fn binop(op: &str, a: &SVal, b: &SVal) -> Result<SVal> {
    use SVal::*;
    Ok(match (op, a, b) {
        ("+", Int(x), Int(y)) => Int(x + y),
        ("-", Int(x), Int(y)) => Int(x - y),
        ("*", Int(x), Int(y)) => Int(x * y),
        ("+", Real(x), Real(y)) => Real(x + y),
        ("-", Real(x), Real(y)) => Real(x - y),
        ("*", Real(x), Real(y)) => Real(x * y),
        ("/", Real(x), Real(y)) => {
            if *y == 0.0 {
                return Err(Error::DivisionByZero);
            }
            Real(x / y)
        }
        ("<", Int(x), Int(y)) => Bool(x < y),
        ("<=", Int(x), Int(y)) => Bool(x <= y),
        ("==", Int(x), Int(y)) => Bool(x == y),
        ("<", Real(x), Real(y)) => Bool(x < y),
        ("<=", Real(x), Real(y)) => Bool(x <= y),
        ("==", Real(x), Real(y)) => Bool(x == y),
        ("==", Str(x), Str(y)) => Bool(x == y),
        ("==", Bool(x), Bool(y)) => Bool(x == y),
        ("&&", Bool(x), Bool(y)) => Bool(*x && *y),
        ("||", Bool(x), Bool(y)) => Bool(*x || *y),
        _ => return Err(type_err(op, &[a, b])),
    })
}

impl Program {
    /// Calls `payoff(ext, tenv, disc, t_now, p1, p2)`.
    pub fn run(&self, input: &KernelInput, p1: &Party, p2: &Party) -> Result<f64> {
        let args = vec![
            SVal::Table { data: Rc::new(input.ext.clone()), cols: input.cols },
            SVal::Ints(Rc::new(input.tenv.iter().map(|&v| v as i64).collect())),
            SVal::Reals(Rc::new(input.disc.clone())),
            SVal::Int(input.t_now as i64),
            SVal::Str(Rc::from(p1.as_str())),
            SVal::Str(Rc::from(p2.as_str())),
        ];
        match (Interp { prog: self, depth: 0 }).call("payoff", args)? {
            SVal::Real(r) => Ok(r),
            _ => Err(Error::NonRealResult),
        }
    }
}

/// Parses and runs kernel source text.
pub fn interpret_kernel_source(src: &str, input: &KernelInput, p1: &Party, p2: &Party) -> Result<f64> {
    parse_kernel_source(src)?.run(input, p1, p2)
}
