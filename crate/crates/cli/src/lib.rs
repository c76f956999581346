//! Configuration, reports and the command implementations behind the
//! `cellhom` binary.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod verify;

use cellhom::{Error, ErrorKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Geometry => EXIT_GEOMETRY,
        ErrorKind::Solver => EXIT_SOLVER,
        ErrorKind::Verify => EXIT_VERIFY,
    }
}
