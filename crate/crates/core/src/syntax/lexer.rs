//! Tokenizer for the `.chr` surface syntax.

use std::fmt;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    At,
    Bar,
    Backslash,
    DirectivePrefix, // :-
    Simp,            // <=>
    Prop,            // ==>
    Eq,              // =
    Lt,
    Gt,
    Le, // =<
    Ge, // >=
    StrictEq,  // ==
    StrictNeq, // \==
    Plus,
    Minus,
    Star,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Atom(s) => write!(f, "{s}"),
            Tok::Var(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::At => write!(f, "@"),
            Tok::Bar => write!(f, "|"),
            Tok::Backslash => write!(f, "\\"),
            Tok::DirectivePrefix => write!(f, ":-"),
            Tok::Simp => write!(f, "<=>"),
            Tok::Prop => write!(f, "==>"),
            Tok::Eq => write!(f, "="),
            Tok::Lt => write!(f, "<"),
            Tok::Gt => write!(f, ">"),
            Tok::Le => write!(f, "=<"),
            Tok::Ge => write!(f, ">="),
            Tok::StrictEq => write!(f, "=="),
            Tok::StrictNeq => write!(f, "\\=="),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(source: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(Spanned { tok: $tok, line, col });
            i += $len;
            col += $len;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            ',' => push!(Tok::Comma, 1),
            '.' => push!(Tok::Dot, 1),
            '@' => push!(Tok::At, 1),
            '|' => push!(Tok::Bar, 1),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            '/' => push!(Tok::Slash, 1),
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push!(Tok::DirectivePrefix, 2);
                } else {
                    return Err(SyntaxError::at(line, col, "expected `:-`"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') {
                    push!(Tok::Simp, 3);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '=' => {
                if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'>') {
                    push!(Tok::Prop, 3);
                } else if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::StrictEq, 2);
                } else if chars.get(i + 1) == Some(&'<') {
                    push!(Tok::Le, 2);
                } else {
                    push!(Tok::Eq, 1);
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '\\' => {
                if chars.get(i + 1) == Some(&'=') && chars.get(i + 2) == Some(&'=') {
                    push!(Tok::StrictNeq, 3);
                } else {
                    push!(Tok::Backslash, 1);
                }
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value: i64 = text
                    .parse()
                    .map_err(|_| SyntaxError::at(line, col, "integer literal out of range"))?;
                out.push(Spanned { tok: Tok::Int(value), line, col });
                col += i - start;
            }
            _ if c.is_ascii_lowercase() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Spanned { tok: Tok::Atom(text), line, col });
                col += i - start;
            }
            _ if c.is_ascii_uppercase() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Spanned { tok: Tok::Var(text), line, col });
                col += i - start;
            }
            other => {
                return Err(SyntaxError::at(line, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}
