//! Text front end: a small system description language, report rendering and
//! the `spencer` subcommands.

mod app;
pub mod dsl;
pub mod render;

pub use app::run;
