//! Bundled tables, record formats and coefficient sources.

pub mod fields;
pub mod records;
pub mod source;
pub mod tables;

pub use records::{format_certificate, parse_certificate, ConductorRecord, DimsRecord, NewformRecord};
pub use source::{fetch_coefficients, CoefficientSource};
pub use tables::{bundled_tables, find_row, load_tables, parse_tables, resolve_newform, ResolvedNewform, TableRow};
