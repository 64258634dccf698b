//! The formula language: syntax tree, parser, printer, horizons and the
//! finite-path semantics of path formulas.

mod ast;
mod horizon;
mod parser;
mod printer;
mod semantics;

pub use ast::{Bound, Comparison, Interval, PathFormula, Query, StateFormula};
pub use horizon::{formula_horizon, path_horizon, query_horizon};
pub use parser::{parse_formula, parse_path_formula, ParseError};
pub use semantics::{eval_labels, eval_path_formula, EvalError, LabelOracle, StateOracle};
