//! SSAFJ-EH: syntax, parsing, validation, the while-entry pre-pass, and the
//! reference interpreter.

pub mod ast;
pub mod interp;
pub mod parser;
pub mod preprocess;
pub mod pretty;
pub mod validate;

pub use ast::*;
pub use parser::{parse_source, ParseError};
pub use preprocess::{min_label, preprocess_while_entries, LabelOrder};
pub use pretty::pretty_print;
pub use validate::{validate, Violation};
