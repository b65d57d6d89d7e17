//! Textual syntax for contracts.
//!
//! ```text
//! c ::= zero | transfer(p, q, a) | scale(e, c) | translate(t, c)
//!     | both(c, c) | all[c, ...] | if(e, c, c) | if(e, t, c, c)
//!     | let x = e in c | (c)
//! t ::= n | x
//! e ::= e | e  |  e & e  |  e (< <= > >= ==) e  |  e (+ -) e  |  e (* /) e
//!     | -e | !e | n | true | false | x | obs(l, i) | cond(e, e, e)
//!     | acc(x. e, n, e) | (e)
//! ```
//!
//! Numerals with two or more dots use the dots as thousands separators
//! (`1.000.000`). `a > b` is read as `b < a`. `//` starts a line comment.

mod lexer;
mod parser;
mod print;

pub use parser::{number_value, parse_contract, parse_exp};
pub use print::pretty;
