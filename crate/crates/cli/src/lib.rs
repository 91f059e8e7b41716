//! Command-line front end and HTTP service for the `sensograph` library.

pub mod bench;
pub mod config;
pub mod service;

/// Process exit codes. Usage errors exit with clap's code 2.
pub mod exit {
    pub const FAILURE: i32 = 1;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const IO: i32 = 5;
}

/// Maps an error chain to an exit code from the first recognised cause.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use sensograph::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parse { .. } | E::CorruptSession { .. } => exit::PARSE,
                E::Io(_) => exit::IO,
                E::Validation(_) | E::SampleCountMismatch { .. } | E::UnknownSession(_) | E::NoData => {
                    exit::VALIDATION
                }
            };
        }
        if cause.is::<toml::de::Error>() {
            return exit::PARSE;
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
    }
    exit::FAILURE
}
