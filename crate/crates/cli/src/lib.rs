//! Command-line pipeline: generation, annotation, preference extraction,
//! metrics, consistency and reporting.

pub mod args;
pub mod commands;
pub mod common;
pub mod config;
pub mod exit;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command};
pub use common::BackendFactory;
use common::{timestamp, Ctx};
use config::Config;

/// Runs a parsed command line.
pub fn run(cli: &Cli, backend: Option<&BackendFactory>) -> anyhow::Result<()> {
    let ctx = Ctx {
        config: Config::resolve(&cli.global)?,
        created_at: timestamp()?,
        manifest_path: cli.global.manifest.clone(),
        backend,
    };
    match &cli.command {
        Command::Validate(a) => commands::validate::run(&ctx, a),
        Command::Generate(a) => commands::generate::run(&ctx, a),
        Command::Annotate(a) => commands::annotate::run(&ctx, a),
        Command::PrefsShort(a) => commands::prefs::short(&ctx, a),
        Command::PrefsLong(a) => commands::prefs::long(&ctx, a),
        Command::Metrics(a) => commands::analyze::metrics(&ctx, a),
        Command::Consistency(a) => commands::analyze::consistency(&ctx, a),
        Command::Rollup(a) => commands::analyze::rollup(&ctx, a),
        Command::Synth(a) => commands::synth::run(&ctx, a),
        Command::Report(a) => commands::report::run(&ctx, a),
    }
}

/// Parses `args`, runs, prints any error and maps it to an exit code.
pub fn main_with<I, T>(args: I, backend: Option<&BackendFactory>) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return exit::exit_code(if e.use_stderr() { exit::VALIDATION } else { exit::OK });
        }
    };
    match run(&cli, backend) {
        Ok(()) => exit::exit_code(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::exit_code(exit::code_for(&e))
        }
    }
}
