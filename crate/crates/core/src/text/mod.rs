//! Textual surface: the expression grammar, canonical rendering and the
//! system-file format.

mod parse;
mod render;
mod sysfile;

pub use parse::{eval_diffpoly, parse_expr, parse_expr_with_letter, parse_tree, Expr, ParseError};
pub use render::{from_json, render_expr, render_text, to_json, Format, JsonCoeff, JsonPoly, JsonTerm};
pub use sysfile::{eval_series, parse_miura_map, parse_series_file, parse_system, render_system};
