//! Predicates and arithmetic over dotted-path references to unit-carrying
//! data points.
//!
//! Evaluation is one bottom-up pass over a finite tree, so it always
//! terminates; [`Evaluator::evaluate_counted`] reports the node visits.
//! Mixed-unit comparisons convert the right operand into the left operand's
//! unit. `+` and `-` never convert implicitly.

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, Expr};
pub use eval::{
    evaluate, validate_bindings, EnvParseError, Environment, EvalError, Evaluator, Value, Violation,
    ViolationKind,
};
pub use parser::{parse, SyntaxError};
