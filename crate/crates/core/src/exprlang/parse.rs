use super::{BinOp, Expr, ExprError, ExprErrorKind, ExprKind, Func, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| {
                    ExprError::new(
                        ExprErrorKind::Lexical,
                        SourceSpan::new(start, i),
                        format!("malformed number '{text}'"),
                    )
                })?;
                out.push(Token {
                    tok: Tok::Num(v),
                    span: SourceSpan::new(start, i),
                });
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    span: SourceSpan::new(start, i),
                });
                continue;
            }
            b'*' if bytes.get(i + 1) == Some(&b'*') => {
                return Err(ExprError::new(
                    ExprErrorKind::Lexical,
                    SourceSpan::new(i, i + 2),
                    "'**' is not an operator (use '^')",
                ));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                out.push(Token {
                    tok: Tok::Op(c as char),
                    span: SourceSpan::new(start, i),
                });
                continue;
            }
            b'(' | b')' | b',' => {
                i += 1;
                let tok = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                out.push(Token {
                    tok,
                    span: SourceSpan::new(start, i),
                });
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ExprError::new(
                    ExprErrorKind::Lexical,
                    SourceSpan::new(i, i + ch.len_utf8()),
                    format!("unexpected character '{ch}'"),
                ));
            }
        }
    }
    out.push(Token {
        tok: Tok::End,
        span: SourceSpan::new(src.len(), src.len()),
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variables: &'a [&'a str],
}

/// Parse `text` against a list of variable names. The identifier `pi` is the
/// constant π unless it is itself a declared variable.
pub fn parse(text: &str, variables: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        variables,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    match t.tok {
        Tok::End => Ok(e),
        Tok::RParen => Err(ExprError::new(
            ExprErrorKind::UnbalancedParens,
            t.span,
            "unmatched ')'",
        )),
        _ => Err(ExprError::new(
            ExprErrorKind::Syntax,
            t.span,
            "unexpected token (implicit multiplication is not supported)",
        )),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn is_op(&self, c: char) -> bool {
        self.peek().tok == Tok::Op(c)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while self.is_op('+') || self.is_op('-') {
            let op = if self.next().tok == Tok::Op('+') { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while self.is_op('*') || self.is_op('/') {
            let op = if self.next().tok == Tok::Op('*') { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.is_op('-') {
            let start = self.next().span;
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.is_op('^') {
            self.next();
            // Right associative; the exponent may carry its own unary minus.
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr {
                kind: ExprKind::Num(v),
                span: t.span,
            }),
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Err(ExprError::new(
                        ExprErrorKind::UnbalancedParens,
                        SourceSpan::new(t.span.start, close.span.end.max(t.span.end)),
                        "missing ')'",
                    ));
                }
                Ok(Expr {
                    kind: inner.kind,
                    span: t.span.join(close.span),
                })
            }
            Tok::Ident(name) => self.identifier(name, t.span),
            Tok::RParen => Err(ExprError::new(
                ExprErrorKind::UnbalancedParens,
                t.span,
                "unmatched ')'",
            )),
            Tok::End => Err(ExprError::new(
                ExprErrorKind::Syntax,
                t.span,
                "unexpected end of input",
            )),
            Tok::Op(c) => Err(ExprError::new(
                ExprErrorKind::Syntax,
                t.span,
                format!("expected an operand, found '{c}'"),
            )),
            Tok::Comma => Err(ExprError::new(ExprErrorKind::Syntax, t.span, "unexpected ','")),
        }
    }

    fn identifier(&mut self, name: String, span: SourceSpan) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::LParen {
            let Some(func) = Func::from_name(&name) else {
                return Err(ExprError::new(
                    ExprErrorKind::UnknownIdentifier,
                    span,
                    format!("unknown function '{name}'"),
                ));
            };
            let open = self.next();
            let mut args = Vec::new();
            if self.peek().tok != Tok::RParen {
                loop {
                    args.push(self.expr()?);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            let close = self.next();
            if close.tok != Tok::RParen {
                return Err(ExprError::new(
                    ExprErrorKind::UnbalancedParens,
                    SourceSpan::new(open.span.start, close.span.end.max(open.span.end)),
                    "missing ')' after function arguments",
                ));
            }
            let full = span.join(close.span);
            if args.len() != 1 {
                return Err(ExprError::new(
                    ExprErrorKind::Arity,
                    full,
                    format!("{name} takes 1 argument, got {}", args.len()),
                ));
            }
            let arg = args.pop().expect("one argument");
            return Ok(Expr {
                kind: ExprKind::Call(func, Box::new(arg)),
                span: full,
            });
        }
        if let Some(i) = self.variables.iter().position(|v| *v == name) {
            return Ok(Expr {
                kind: ExprKind::Var(i, name),
                span,
            });
        }
        if name == "pi" {
            return Ok(Expr {
                kind: ExprKind::Num(std::f64::consts::PI),
                span,
            });
        }
        if Func::from_name(&name).is_some() {
            return Err(ExprError::new(
                ExprErrorKind::Arity,
                span,
                format!("function '{name}' needs an argument list"),
            ));
        }
        Err(ExprError::new(
            ExprErrorKind::UnknownIdentifier,
            span,
            format!("unknown identifier '{name}'"),
        ))
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.join(rhs.span);
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}
