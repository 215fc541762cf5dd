//! Elementary functions as DAGs, evaluated over points and boxes.

mod dag;
mod parse;

pub use dag::{BinaryOp, DagBuilder, ExprDag, ExprNode, NodeId, UnaryOp};
pub use parse::{parse_expr, ParseError};
