use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

pub(crate) const UNARY_PRECEDENCE: u8 = 6;

/// Constraint expression tree. Number literals are non-negative; a leading
/// minus is always a [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number { value: f64, unit: Option<String> },
    Bool(bool),
    Path(Vec<String>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn number(value: f64) -> Expr {
        Expr::Number { value, unit: None }
    }

    pub fn quantity(value: f64, unit: &str) -> Expr {
        Expr::Number {
            value,
            unit: Some(unit.to_string()),
        }
    }

    pub fn path(dotted: &str) -> Expr {
        Expr::Path(dotted.split('.').map(str::to_string).collect())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Number { .. } | Expr::Bool(_) | Expr::Path(_) => 1,
            Expr::Neg(e) | Expr::Not(e) => 1 + e.size(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.size() + rhs.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Number { .. } | Expr::Bool(_) | Expr::Path(_) => 1,
            Expr::Neg(e) | Expr::Not(e) => 1 + e.depth(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    /// Dotted paths referenced by the expression, in order of appearance.
    pub fn paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_paths(&mut out);
        out
    }

    fn collect_paths(&self, out: &mut Vec<String>) {
        match self {
            Expr::Path(p) => out.push(p.join(".")),
            Expr::Neg(e) | Expr::Not(e) => e.collect_paths(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_paths(out);
                rhs.collect_paths(out);
            }
            _ => {}
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Expr::Number { value, unit } => {
                write!(f, "{value}")?;
                if let Some(u) = unit {
                    write!(f, " [{u}]")?;
                }
                Ok(())
            }
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Path(p) => write!(f, "{}", p.join(".")),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_prec(f, UNARY_PRECEDENCE)
            }
            Expr::Not(e) => {
                f.write_str("not ")?;
                e.write_prec(f, UNARY_PRECEDENCE)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let paren = p < min;
                if paren {
                    f.write_str("(")?;
                }
                // comparisons do not chain, so both sides bind tighter
                let left_min = if op.is_comparison() { p + 1 } else { p };
                lhs.write_prec(f, left_min)?;
                write!(f, " {} ", op.symbol())?;
                rhs.write_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
