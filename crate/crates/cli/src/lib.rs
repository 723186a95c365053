//! Command-line driver: argument parsing, suite dispatch and report output.

pub mod checkpoint;
pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_cli, Command, Format, ParseOutcome, RunConfig};
pub use report::Report;
pub use run::{run_suite, CliError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Parses `argv`, runs the command, writes the report and returns the
/// process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_cli(argv) {
        ParseOutcome::Run(cfg) => cfg,
        ParseOutcome::Info(text) => {
            print!("{text}");
            return EXIT_OK;
        }
        ParseOutcome::Usage(text) => {
            eprint!("{text}");
            return EXIT_USAGE;
        }
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e @ CliError::Usage(_)) => {
            eprintln!("braidwork: {e}");
            return EXIT_USAGE;
        }
        Err(e @ CliError::Io(_)) => {
            eprintln!("braidwork: {e}");
            return EXIT_IO;
        }
    };
    if let Err(e) = report::write_output(&report.render(cfg.format), cfg.out.as_deref()) {
        let target = cfg.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "stdout".into());
        eprintln!("braidwork: I/O error writing {target}: {e}");
        return EXIT_IO;
    }
    report.exit_code(cfg.strict)
}
