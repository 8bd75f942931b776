//! File formats, reports, parallel Monte Carlo and the verification suite
//! for `osb-core`, plus the `osb` command-line tool.

pub mod checks;
pub mod curve_io;
pub mod error;
pub mod json;
pub mod orbit_io;
pub mod output;
pub mod parallel;
pub mod spec;
pub mod verify;

pub use checks::CheckReport;
pub use error::OsbError;
pub use spec::{load_spec, parse_spec, serialize_spec, spec_hash, SpecError};
pub use verify::{run_verify, Level, VerifyReport};
