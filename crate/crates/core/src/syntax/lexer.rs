use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Quoted name, e.g. `"DJ Eurostoxx 50"`.
    Str(String),
    /// Raw numeric text; interpretation depends on context.
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Leq,
    Gt,
    Geq,
    EqEq,
    And,
    Or,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Leq => "<=",
            Tok::Gt => ">",
            Tok::Geq => ">=",
            Tok::EqEq => "==",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Bang => "!",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut bump = |i: &mut usize, n: usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            bump(&mut i, 1);
            continue;
        }
        // line comments
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump(&mut i, 1);
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let next_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if d.is_ascii_digit() || (d == '.' && next_digit) {
                    bump(&mut i, 1);
                } else if (d == 'e' || d == 'E')
                    && (next_digit
                        || matches!(chars.get(i + 1), Some('+' | '-'))
                            && chars.get(i + 2).is_some_and(|n| n.is_ascii_digit()))
                {
                    bump(&mut i, 2);
                } else {
                    break;
                }
            }
            Tok::Num(chars[start..i].iter().collect())
        } else if c == '"' {
            let start = i + 1;
            bump(&mut i, 1);
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(err(l0, c0, "unterminated string".into()));
                }
                bump(&mut i, 1);
            }
            if i >= chars.len() {
                return Err(err(l0, c0, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            bump(&mut i, 1);
            Tok::Str(s)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, n) = match (c, next) {
                ('<', Some('=')) => (Tok::Leq, 2),
                ('>', Some('=')) => (Tok::Geq, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('&', Some('&')) => (Tok::And, 2),
                ('|', Some('|')) => (Tok::Or, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBrack, 1),
                (']', _) => (Tok::RBrack, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('=', _) => (Tok::Assign, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('&', _) => (Tok::And, 1),
                ('|', _) => (Tok::Or, 1),
                ('!', _) => (Tok::Bang, 1),
                _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
            };
            bump(&mut i, n);
            tok
        };
        out.push(Token { tok, line: l0, col: c0 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_dots() {
        assert_eq!(toks("1.000.000"), vec![Tok::Num("1.000.000".into()), Tok::Eof]);
        assert_eq!(
            toks("acc(x. x)"),
            vec![
                Tok::Ident("acc".into()),
                Tok::LParen,
                Tok::Ident("x".into()),
                Tok::Dot,
                Tok::Ident("x".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
        assert_eq!(toks("1e-7"), vec![Tok::Num("1e-7".into()), Tok::Eof]);
    }

    #[test]
    fn positions() {
        let t = lex("zero\n  ?").unwrap_err();
        assert_eq!(t, Error::Parse { line: 2, col: 3, msg: "unexpected character `?`".into() });
    }
}
