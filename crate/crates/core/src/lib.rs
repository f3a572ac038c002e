//! A calculus of self-stabilising computational fields: parsing, type and
//! sort checking, annotated checking of diffusions, device evaluation,
//! network simulation and test oracles.

pub mod annotated;
pub mod ast;
pub mod eval;
pub mod json;
pub mod network;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod registry;
pub mod sort;
pub mod sortcheck;
pub mod typecheck;
pub mod validate;
pub mod value;

pub use ast::{Diagnostic, Expr, ExprKind, FunctionDef, Program, Severity, SortSignature};
pub use eval::{Evaluator, SensorState};
pub use registry::{SensorCatalog, SignatureRegistry};
pub use sort::{AnnotatedSort, Annotation, GroundSort, Sort};
pub use value::{GroundValue, TypeExpr, Value, ValueTree};
