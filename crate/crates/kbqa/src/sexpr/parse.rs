//! Parser for the textual S-expression form.
//!
//! Bare atoms resolve by lexical shape and position: ids starting `m.` or
//! `g.` are entities, numeric/quoted/date atoms are literals, `<e:..>` and
//! `<v:..>` are placeholders, and anything else is a class in set positions
//! or a relation in binary positions.

use thiserror::Error;

use crate::kb::{ClassId, FunctionSym, Literal, LiteralKind, RelationId};

use super::{CmpOp, SExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("offset {offset}: unbalanced parenthesis")]
    Unbalanced { offset: usize },
    #[error("offset {offset}: unknown head symbol `{head}`")]
    UnknownHead { offset: usize, head: String },
    #[error("offset {offset}: `{head}` expects {expected} arguments")]
    WrongArity {
        offset: usize,
        head: String,
        expected: usize,
    },
    #[error("offset {offset}: {detail}")]
    InvalidAtom { offset: usize, detail: String },
    #[error("offset {offset}: unterminated string literal")]
    UnterminatedString { offset: usize },
    #[error("offset {offset}: trailing input after expression")]
    TrailingInput { offset: usize },
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen(usize),
    RParen(usize),
    Atom { offset: usize, text: String },
    Str { offset: usize, value: String },
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::LParen(o) | Token::RParen(o) => *o,
            Token::Atom { offset, .. } | Token::Str { offset, .. } => *offset,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                tokens.push(Token::LParen(i));
                i += 1;
            }
            b')' => {
                tokens.push(Token::RParen(i));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut value = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(ParseError::UnterminatedString { offset: start });
                    }
                    match bytes[i] {
                        b'\\' if i + 1 < bytes.len() => {
                            value.push(bytes[i + 1] as char);
                            i += 2;
                        }
                        b'"' => {
                            i += 1;
                            break;
                        }
                        _ => {
                            // keep multi-byte chars intact
                            let ch_len = utf8_len(bytes[i]);
                            value.push_str(&text[i..i + ch_len]);
                            i += ch_len;
                        }
                    }
                }
                tokens.push(Token::Str {
                    offset: start,
                    value,
                });
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                    && bytes[i] != b'"'
                {
                    i += utf8_len(bytes[i]);
                }
                tokens.push(Token::Atom {
                    offset: start,
                    text: text[start..i].to_string(),
                });
            }
        }
    }
    Ok(tokens)
}

fn utf8_len(first: u8) -> usize {
    match first {
        b if b < 0x80 => 1,
        b if b >= 0xF0 => 4,
        b if b >= 0xE0 => 3,
        _ => 2,
    }
}

/// Expected shape of an argument position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    /// A set of entities: bare atoms are classes here.
    Set,
    /// A set of binary tuples: bare atoms are relations here.
    Binary,
    /// Either, decided by the argument itself (second argument of JOIN).
    Flexible,
    /// Comparative bound: a literal or literal placeholder.
    Bound,
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn parse(&mut self, pos: Pos) -> Result<SExpr, ParseError> {
        match self.next() {
            None => Err(ParseError::Unbalanced { offset: self.len }),
            Some(Token::RParen(offset)) => Err(ParseError::Unbalanced { offset }),
            Some(Token::Str { offset, value }) => match pos {
                Pos::Set | Pos::Flexible => Ok(SExpr::Literal(Literal::Text(value))),
                Pos::Binary => Err(ParseError::InvalidAtom {
                    offset,
                    detail: "expected a relation, found a string literal".into(),
                }),
                Pos::Bound => Err(ParseError::InvalidAtom {
                    offset,
                    detail: "comparative bound must be numeric or datetime".into(),
                }),
            },
            Some(Token::Atom { offset, text }) => self.resolve_atom(offset, &text, pos),
            Some(Token::LParen(offset)) => {
                let head = match self.next() {
                    Some(Token::Atom { offset, text }) => {
                        FunctionSym::from_name(&text).ok_or(ParseError::UnknownHead {
                            offset,
                            head: text,
                        })?
                    }
                    Some(t) => {
                        return Err(ParseError::UnknownHead {
                            offset: t.offset(),
                            head: "(".into(),
                        })
                    }
                    None => return Err(ParseError::Unbalanced { offset }),
                };
                let expr = self.parse_call(offset, head, pos)?;
                match self.next() {
                    Some(Token::RParen(_)) => Ok(expr),
                    Some(t) => Err(ParseError::WrongArity {
                        offset: t.offset(),
                        head: head.name().into(),
                        expected: head_arity(head),
                    }),
                    None => Err(ParseError::Unbalanced { offset }),
                }
            }
        }
    }

    fn parse_call(&mut self, offset: usize, head: FunctionSym, pos: Pos) -> Result<SExpr, ParseError> {
        self.check_args(offset, head)?;
        let expr = match head {
            FunctionSym::And => {
                let a = self.parse(Pos::Set)?;
                let b = self.parse(Pos::Set)?;
                SExpr::and(a, b)
            }
            FunctionSym::Count => SExpr::count(self.parse(Pos::Set)?),
            FunctionSym::Reverse => SExpr::reverse(self.parse(Pos::Binary)?),
            FunctionSym::Join => {
                let b = self.parse(Pos::Binary)?;
                // a JOIN that itself fills a binary position composes two
                // binary sets, so atoms in its second argument are relations
                let u = self.parse(if pos == Pos::Binary {
                    Pos::Binary
                } else {
                    Pos::Flexible
                })?;
                SExpr::join(b, u)
            }
            FunctionSym::ArgMax => {
                let u = self.parse(Pos::Set)?;
                let b = self.parse(Pos::Binary)?;
                SExpr::arg_max(u, b)
            }
            FunctionSym::ArgMin => {
                let u = self.parse(Pos::Set)?;
                let b = self.parse(Pos::Binary)?;
                SExpr::arg_min(u, b)
            }
            FunctionSym::Lt | FunctionSym::Le | FunctionSym::Gt | FunctionSym::Ge => {
                let op = match head {
                    FunctionSym::Lt => CmpOp::Lt,
                    FunctionSym::Le => CmpOp::Le,
                    FunctionSym::Gt => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                let b = self.parse(Pos::Binary)?;
                let bound = self.parse(Pos::Bound)?;
                SExpr::compare(op, b, bound)
            }
        };
        // a structurally unary expression cannot fill a binary position
        if pos == Pos::Binary && !expr.is_binary() {
            return Err(ParseError::InvalidAtom {
                offset,
                detail: format!("expected a relation-valued expression, found `{expr}`"),
            });
        }
        Ok(expr)
    }

    /// Checks up front that the call has the right number of argument tokens,
    /// so arity errors surface before nested resolution errors.
    fn check_args(&self, offset: usize, head: FunctionSym) -> Result<(), ParseError> {
        let mut depth = 0usize;
        let mut args = 0usize;
        for t in &self.tokens[self.cursor..] {
            match t {
                Token::LParen(_) => {
                    if depth == 0 {
                        args += 1;
                    }
                    depth += 1;
                }
                Token::RParen(_) => {
                    if depth == 0 {
                        if args != head_arity(head) {
                            return Err(ParseError::WrongArity {
                                offset,
                                head: head.name().into(),
                                expected: head_arity(head),
                            });
                        }
                        return Ok(());
                    }
                    depth -= 1;
                }
                _ => {
                    if depth == 0 {
                        args += 1;
                    }
                }
            }
        }
        Err(ParseError::Unbalanced { offset })
    }

    fn resolve_atom(&self, offset: usize, text: &str, pos: Pos) -> Result<SExpr, ParseError> {
        if let Some(inner) = text.strip_prefix("<e:").and_then(|t| t.strip_suffix('>')) {
            if matches!(pos, Pos::Binary | Pos::Bound) {
                return Err(ParseError::InvalidAtom {
                    offset,
                    detail: "entity placeholder not allowed here".into(),
                });
            }
            return Ok(if inner == "any" {
                SExpr::EntityHole(None)
            } else {
                SExpr::EntityHole(Some(ClassId::new(inner)))
            });
        }
        if let Some(inner) = text.strip_prefix("<v:").and_then(|t| t.strip_suffix('>')) {
            let kind = LiteralKind::from_token(inner).ok_or_else(|| ParseError::InvalidAtom {
                offset,
                detail: format!("unknown literal kind `{inner}`"),
            })?;
            if pos == Pos::Binary {
                return Err(ParseError::InvalidAtom {
                    offset,
                    detail: "literal placeholder not allowed here".into(),
                });
            }
            if pos == Pos::Bound && !kind.is_orderable() {
                return Err(ParseError::InvalidAtom {
                    offset,
                    detail: "comparative bound must be numeric or datetime".into(),
                });
            }
            return Ok(SExpr::LiteralHole(kind));
        }
        let literal = Literal::parse_numeric_atom(text);
        let is_entity = text.starts_with("m.") || text.starts_with("g.");
        match pos {
            Pos::Bound => match literal {
                Some(l) if l.kind().is_orderable() => Ok(SExpr::Literal(l)),
                _ => Err(ParseError::InvalidAtom {
                    offset,
                    detail: format!("comparative bound must be numeric or datetime, got `{text}`"),
                }),
            },
            Pos::Binary => {
                if is_entity || literal.is_some() {
                    Err(ParseError::InvalidAtom {
                        offset,
                        detail: format!("expected a relation, found `{text}`"),
                    })
                } else {
                    Ok(SExpr::Relation(RelationId::new(text)))
                }
            }
            Pos::Set | Pos::Flexible => {
                if let Some(l) = literal {
                    Ok(SExpr::Literal(l))
                } else if is_entity {
                    Ok(SExpr::entity(text))
                } else {
                    Ok(SExpr::class(text))
                }
            }
        }
    }
}

fn head_arity(head: FunctionSym) -> usize {
    match head {
        FunctionSym::Count | FunctionSym::Reverse => 1,
        _ => 2,
    }
}

/// Parses the canonical textual form into an [`SExpr`].
pub fn parse(text: &str) -> Result<SExpr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        len: text.len(),
    };
    let expr = parser.parse(Pos::Set)?;
    if let Some(t) = parser.peek() {
        return Err(ParseError::TrailingInput { offset: t.offset() });
    }
    Ok(expr)
}
