//! Session files and the `conecalc` command surface.

pub mod commands;
pub mod error;
pub mod session;

pub use commands::{run_command, Command, Outcome};
pub use error::CliError;
pub use session::{emit_session, parse_session, Session, SessionBuilder};
