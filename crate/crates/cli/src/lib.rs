//! Command implementations behind the `emberfield` binary.

pub mod pipeline;
pub mod probe;
pub mod report;

use emberfield::fire::FireError;
use emberfield::grid::GridError;
use emberfield::io::FormatError;
use emberfield::render::RenderError;

/// Exit code for bad input: unreadable files, invalid configs, bad flags.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for failures that are not the caller's fault.
pub const EXIT_INTERNAL: i32 = 3;

/// A problem with what the user supplied.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let input = err.chain().any(|e| {
        e.is::<InputError>()
            || e.is::<FormatError>()
            || e.is::<GridError>()
            || e.is::<FireError>()
            || e.is::<RenderError>()
    });
    if input {
        EXIT_INPUT
    } else {
        EXIT_INTERNAL
    }
}
