pub mod expr;
pub mod metric;
pub mod parse;

pub use expr::{Expr, Func, Scalar, Var};
pub use metric::{load_metric, MetricFile, MetricKind, MetricSpec};
pub use parse::parse;
