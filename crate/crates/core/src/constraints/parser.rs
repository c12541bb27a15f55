//! Lexer and precedence-climbing parser.
//!
//! Binding strength, tightest first: `not` and unary `-`, `* /`, `+ -`,
//! comparisons (non-associative), `and`, `or`.

use super::ast::{BinOp, Expr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Unit(String),
    Dot,
    LParen,
    RParen,
    Minus,
    Not,
    True,
    False,
    Op(BinOp),
}

fn err(offset: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let mut single = |t: Tok| {
            it.next();
            out.push((i, t));
        };
        match c {
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '.' => single(Tok::Dot),
            '+' => single(Tok::Op(BinOp::Add)),
            '-' | '−' => single(Tok::Minus),
            '*' | '×' => single(Tok::Op(BinOp::Mul)),
            '/' | '÷' => single(Tok::Op(BinOp::Div)),
            '≤' => single(Tok::Op(BinOp::Le)),
            '≥' => single(Tok::Op(BinOp::Ge)),
            '≠' => single(Tok::Op(BinOp::Ne)),
            '<' | '>' | '=' | '!' => {
                it.next();
                let followed_by_eq = matches!(it.peek(), Some(&(_, '=')));
                if followed_by_eq {
                    it.next();
                }
                let op = match (c, followed_by_eq) {
                    ('<', false) => BinOp::Lt,
                    ('<', true) => BinOp::Le,
                    ('>', false) => BinOp::Gt,
                    ('>', true) => BinOp::Ge,
                    ('=', _) => BinOp::Eq,
                    ('!', true) => BinOp::Ne,
                    _ => return Err(err(i, "expected `!=`")),
                };
                out.push((i, Tok::Op(op)));
            }
            '[' => {
                it.next();
                let mut unit = String::new();
                loop {
                    match it.next() {
                        Some((_, ']')) => break,
                        Some((_, ch)) => unit.push(ch),
                        None => return Err(err(i, "unterminated unit annotation")),
                    }
                }
                let unit = unit.trim();
                if unit.is_empty() {
                    return Err(err(i, "empty unit annotation"));
                }
                out.push((i, Tok::Unit(unit.to_string())));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut end = i;
                let mut seen_dot = false;
                let mut seen_exp = false;
                while let Some(&(j, ch)) = it.peek() {
                    let ok = ch.is_ascii_digit()
                        || (ch == '.' && !seen_dot && !seen_exp && next_is_digit(src, j))
                        || ((ch == 'e' || ch == 'E') && !seen_exp && exp_follows(src, j))
                        || ((ch == '+' || ch == '-') && seen_exp && matches!(src[..j].chars().last(), Some('e' | 'E')));
                    if !ok {
                        break;
                    }
                    seen_dot |= ch == '.';
                    seen_exp |= ch == 'e' || ch == 'E';
                    end = j + ch.len_utf8();
                    it.next();
                }
                let text = &src[start..end];
                let v: f64 = text.parse().map_err(|_| err(start, format!("bad number `{text}`")))?;
                if !v.is_finite() {
                    return Err(err(start, format!("number out of range `{text}`")));
                }
                out.push((start, Tok::Number(v)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut end = i;
                while let Some(&(j, ch)) = it.peek() {
                    if !(ch.is_alphanumeric() || ch == '_') {
                        break;
                    }
                    end = j + ch.len_utf8();
                    it.next();
                }
                let word = &src[start..end];
                let tok = match word {
                    "and" => Tok::Op(BinOp::And),
                    "or" => Tok::Op(BinOp::Or),
                    "not" => Tok::Not,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn next_is_digit(src: &str, dot_at: usize) -> bool {
    src[dot_at + 1..].chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn exp_follows(src: &str, e_at: usize) -> bool {
    let mut rest = src[e_at + 1..].chars();
    match rest.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+' | '-') => rest.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn peek_binop(&self) -> Option<BinOp> {
        match self.peek()? {
            Tok::Op(op) => Some(*op),
            Tok::Minus => Some(BinOp::Sub),
            _ => None,
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(p + 1)?;
            if op.is_comparison() {
                if let Some(next) = self.peek_binop().filter(|o| o.is_comparison()) {
                    return Err(err(
                        self.offset(),
                        format!("comparison `{}` cannot follow another comparison; add parentheses", next.symbol()),
                    ));
                }
            }
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Minus) => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Number(value)) => {
                let unit = match self.peek() {
                    Some(Tok::Unit(u)) => {
                        let u = u.clone();
                        self.bump();
                        Some(u)
                    }
                    _ => None,
                };
                Ok(Expr::Number { value, unit })
            }
            Some(Tok::True) => Ok(Expr::Bool(true)),
            Some(Tok::False) => Ok(Expr::Bool(false)),
            Some(Tok::Ident(first)) => {
                let mut segs = vec![first];
                while let Some(Tok::Dot) = self.peek() {
                    self.bump();
                    let seg_at = self.offset();
                    match self.bump() {
                        Some(Tok::Ident(s)) => segs.push(s),
                        _ => return Err(err(seg_at, "expected identifier after `.`")),
                    }
                }
                Ok(Expr::Path(segs))
            }
            Some(Tok::LParen) => {
                let inner = self.expr(0)?;
                let close = self.offset();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(close, "expected `)`")),
                }
            }
            Some(Tok::Unit(_)) => Err(err(at, "unit annotation must follow a number")),
            Some(_) => Err(err(at, "expected a value")),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr(0)?;
    if p.pos < p.toks.len() {
        return Err(err(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}
