//! A toolchain for SSAFJ-EH, a structured SSA dialect of Featherweight Java
//! with exception handling, and its control-flow obfuscation into FJλ, an
//! FJ extension with anonymous functions and mutable closure variables.
//!
//! The pipeline has three sides:
//!
//! * **Defender**: parse and validate `.ssafj` programs ([`source`]), run them
//!   under the reference interpreter ([`source::interp`]), and obfuscate
//!   methods into continuation-passing `.fjl` programs ([`translate`]).
//! * **Target runtime**: parse and execute FJλ ([`target`]), where every
//!   control construct has become applications of the `seq` / `ifelse` /
//!   `loop` / `trycatch` combinators.
//! * **Attacker**: reconstruct control flow from the obfuscated code with
//!   context-insensitive and call-string-sensitive flow analyses ([`cfa`]),
//!   rebuild CFGs, and measure how much structure survives.
//!
//! The [`cli`] module wires these into the `fjobf` binary.

pub mod cfa;
pub mod cli;
pub mod common;
pub mod lexer;
pub mod report;
pub mod source;
pub mod target;
pub mod translate;
