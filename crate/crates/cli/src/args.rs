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

//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "stq", version, about = "Pseudo-density matrices, two-time states and process matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Negativity scan of the switched constant channels; writes CSV.
    SwitchScan(ScanArgs),
    /// Cross-check probability rules between formalisms on random inputs.
    Verify(VerifyArgs),
    /// Build and inspect pseudo-density matrices.
    #[command(subcommand)]
    Pdm(PdmCommand),
    /// Validate and convert process matrices.
    #[command(subcommand)]
    Process(ProcessCommand),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Grid points per axis.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Spread grid points over worker threads.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    PdmOracle,
    Abl,
    Pure,
    Ensemble,
    Bridge,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum PdmCommand {
    /// Closed-form PDM from `{"state": …, "channels": […]}`.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// `‖R‖_tr − 1` of a PDM (or a bare density matrix).
    Negativity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Reduced PDM on the listed slots.
    Marginal {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated slot labels.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProcessCommand {
    /// PSD and randomized normalization checks.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = stq::process::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Outcome table through the two-time ensemble and its PDM realization.
    ToPdm {
        #[arg(long = "in")]
        input: PathBuf,
        /// `{"a": instrument, "b": instrument}`; computational-basis
        /// measurements when omitted.
        #[arg(long)]
        instruments: Option<PathBuf>,
    },
    /// Two-time ensemble from the eigendecomposition of W.
    ToTwotime {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
