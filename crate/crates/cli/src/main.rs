// Copyright 2026 The stq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `stq` command-line tool.

mod args;
mod commands;
mod exit;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Honors `STQ_THREADS` as a cap on worker threads.
fn configure_threads() -> Result<(), exit::Failure> {
    let Ok(raw) = std::env::var("STQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| exit::Failure::new(exit::SCHEMA, format!("STQ_THREADS must be a positive integer, got {raw:?}")))?;
    // a second initialization only happens in tests; ignore it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<String, exit::Failure> {
    configure_threads()?;
    match &cli.command {
        Command::SwitchScan(a) => commands::scan::run(a),
        Command::Verify(a) => commands::verify::run(a),
        Command::Pdm(c) => commands::pdm::run(c),
        Command::Process(c) => commands::process::run(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::SCHEMA } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::from(exit::OK)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
