//! Command-line experiments over `heun-core`: closed-form tables, orbit
//! sweeps, rank-one checks and ordering probes, written as JSON or CSV reports.

pub mod config;
pub mod experiments;
pub mod presets;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::Parser;

use crate::config::{resolve, Cli};

/// Exit code for usage and configuration errors.
pub const USAGE_ERROR: i32 = 2;

/// Parse `args`, run the experiment and write the report. Returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { USAGE_ERROR } else { 0 };
        }
    };
    let (experiment, shared) = cli.verb.split();
    let cfg = match resolve(experiment, shared) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE_ERROR;
        }
    };
    let (format, out) = (cfg.format, cfg.out.clone());
    let report = match experiments::run(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE_ERROR;
        }
    };
    let written = match &out {
        Some(path) => File::create(path)
            .map_err(anyhow::Error::from)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                report.write(format, &mut w)?;
                w.flush()?;
                Ok(())
            }),
        None => report.write(format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return USAGE_ERROR;
    }
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{} {} ({:.2} s)", report.status.label(), report.experiment, report.wall_time_s);
    report.exit_code()
}
