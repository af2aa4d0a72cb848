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

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stq::channels::Instrument;
use stq::mappings::{bridge, process_to_twotime};
use stq::process::{validate, ProcessMatrix};

use crate::args::{ProcessCommand, DEFAULT_TOL};
use crate::exit::{self, as_process_failure, Failure};
use crate::report::{print_json, read_json, write_json, RunManifest};

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct InstrumentPair {
    a: Instrument,
    b: Instrument,
}

#[derive(Serialize)]
struct ToPdmReport {
    manifest: RunManifest,
    w_file: String,
    instruments: InstrumentPair,
    table_pdm: Vec<Vec<f64>>,
    table_born: Vec<Vec<f64>>,
    table_twotime: Vec<Vec<f64>>,
    max_abs_diff: f64,
}

fn read_process(path: &PathBuf) -> Result<ProcessMatrix, Failure> {
    read_json(path).map_err(|f| {
        // Hermiticity failures surface through deserialization
        if f.message.contains("not Hermitian") || f.message.contains("not positive") {
            Failure::new(exit::INVALID_PROCESS, f.message)
        } else {
            f
        }
    })
}

pub fn run(cmd: &ProcessCommand) -> Result<String, Failure> {
    match cmd {
        ProcessCommand::Validate { input, samples, seed } => {
            let manifest = RunManifest::new("process validate").seed(*seed).input(input);
            let w = read_process(input)?;
            let v = validate(&w, *samples, *seed).map_err(as_process_failure)?;
            let valid = v.valid;
            print_json(&serde_json::json!({ "manifest": manifest, "validation": v }));
            let status = if valid { "valid" } else { "INVALID" };
            if !valid {
                return Err(Failure::new(exit::INVALID_PROCESS, manifest.summary(status)));
            }
            Ok(manifest.summary(status))
        }
        ProcessCommand::ToPdm { input, instruments } => {
            let mut manifest = RunManifest::new("process to-pdm").tolerance(DEFAULT_TOL).input(input);
            let w = read_process(input)?;
            let pair = match instruments {
                Some(path) => {
                    manifest = manifest.input(path);
                    read_json::<InstrumentPair>(path)?
                }
                None => {
                    let dims = w.dims();
                    InstrumentPair { a: Instrument::computational(dims.a1), b: Instrument::computational(dims.b1) }
                }
            };
            if pair.a.dim_in() != w.dims().a1 || pair.b.dim_in() != w.dims().b1 {
                return Err(Failure::new(exit::DIMENSION, "dimension mismatch: instruments do not fit the process matrix"));
            }
            let t = bridge(&w, &pair.a, &pair.b).map_err(as_process_failure)?;
            let total: f64 = t.born.iter().flatten().sum();
            let table_born: Vec<Vec<f64>> = t.born.iter().map(|r| r.iter().map(|x| x / total).collect()).collect();
            let report = ToPdmReport {
                w_file: input.display().to_string(),
                instruments: pair,
                table_pdm: t.pdm,
                table_born,
                table_twotime: t.twotime,
                max_abs_diff: t.pdm_deviation.max(t.twotime_deviation),
                manifest,
            };
            print_json(&report);
            let status = format!("max abs diff {:.2e}", report.max_abs_diff);
            if report.max_abs_diff > DEFAULT_TOL {
                return Err(Failure::new(exit::TOLERANCE, report.manifest.summary(&status)));
            }
            Ok(report.manifest.summary(&status))
        }
        ProcessCommand::ToTwotime { input, out } => {
            let manifest = RunManifest::new("process to-twotime").input(input);
            let w = read_process(input)?;
            let ens = process_to_twotime(&w).map_err(as_process_failure)?;
            let members = ens.len();
            match out {
                Some(path) => {
                    write_json(path, &ens)?;
                    let manifest = manifest.output(path);
                    print_json(&serde_json::json!({ "manifest": manifest, "members": members }));
                    Ok(manifest.summary(&format!("{members} members")))
                }
                None => {
                    print_json(&ens);
                    Ok(manifest.summary(&format!("{members} members")))
                }
            }
        }
    }
}
