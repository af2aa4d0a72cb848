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

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use stq::channels::Channel;
use stq::linalg::{ComplexMatrix, SlotSpace};
use stq::pdm::{build_from_channels, Pdm};

use crate::args::PdmCommand;
use crate::exit::{self, Failure};
use crate::report::{print_json, print_line, read_json, significant, write_json, RunManifest};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildInput {
    state: ComplexMatrix,
    #[serde(default)]
    channels: Vec<Channel>,
}

/// Reads a PDM, or a bare matrix taken as a single slot `t1`.
fn read_pdm(path: &Path) -> Result<Pdm, Failure> {
    let value: Value = read_json(path)?;
    let where_ = path.display().to_string();
    if value.get("slots").is_some() {
        return serde_json::from_value(value).map_err(|e| exit::from_json_error(&where_, e));
    }
    let m: ComplexMatrix = serde_json::from_value(value).map_err(|e| exit::from_json_error(&where_, e))?;
    let d = m.check_square("matrix")?;
    Ok(Pdm::new(m, SlotSpace::times(1, d))?)
}

fn emit(manifest: RunManifest, pdm: &Pdm, out: Option<&PathBuf>) -> Result<RunManifest, Failure> {
    match out {
        Some(path) => {
            write_json(path, pdm)?;
            let manifest = manifest.output(path);
            let slots: Vec<Value> = pdm.space().slots().iter().map(|s| json!({"label": s.label, "dim": s.dim})).collect();
            print_json(&json!({
                "manifest": manifest,
                "slots": slots,
                "normalized": pdm.is_normalized(),
                "trace": pdm.trace(),
            }));
            Ok(manifest)
        }
        None => {
            print_json(pdm);
            Ok(manifest)
        }
    }
}

pub fn run(cmd: &PdmCommand) -> Result<String, Failure> {
    match cmd {
        PdmCommand::Build { input, out } => {
            let manifest = RunManifest::new("pdm build").input(input);
            let request: BuildInput = read_json(input)?;
            let pdm = build_from_channels(&request.state, &request.channels)?;
            let manifest = emit(manifest, &pdm, out.as_ref())?;
            Ok(manifest.summary(&format!("{} slots, dimension {}", pdm.space().len(), pdm.matrix().rows())))
        }
        PdmCommand::Negativity { input } => {
            let manifest = RunManifest::new("pdm negativity").input(input);
            let f = read_pdm(input)?.negativity()?;
            print_line(&significant(f));
            Ok(manifest.summary(&format!("f = {f:.6e}")))
        }
        PdmCommand::Marginal { input, keep, out } => {
            let manifest = RunManifest::new("pdm marginal").input(input);
            let pdm = read_pdm(input)?;
            let labels: Vec<&str> = keep.iter().map(String::as_str).collect();
            let reduced = pdm.marginal(&labels)?;
            let manifest = emit(manifest, &reduced, out.as_ref())?;
            Ok(manifest.summary(&format!("kept {}", keep.join(","))))
        }
    }
}
