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

use serde::Serialize;
use stq::switch::{negativity_scan, write_csv_file, ScanRow};

use crate::args::{ScanArgs, DEFAULT_TOL};
use crate::exit::{self, Failure};
use crate::report::{print_json, RunManifest};

#[derive(Serialize)]
struct ScanReport {
    manifest: RunManifest,
    steps: usize,
    rows: usize,
    max_expected_zero: f64,
    interior_min_f_a1c2a2: Option<f64>,
    definite_order_max_f_a1c2a2: f64,
}

fn interior(p: f64) -> bool {
    p > 1e-12 && p < 1.0 - 1e-12
}

pub fn run(args: &ScanArgs) -> Result<String, Failure> {
    if args.steps < 2 {
        return Err(Failure::new(exit::SCHEMA, "--steps must be at least 2"));
    }
    let manifest = RunManifest::new("switch-scan").tolerance(DEFAULT_TOL).output(&args.out);
    let rows = negativity_scan(args.steps, args.parallel)?;
    write_csv_file(&rows, &args.out)?;

    let max_expected_zero = rows.iter().map(ScanRow::max_expected_zero).fold(0.0, f64::max);
    let interior_min = rows
        .iter()
        .filter(|r| interior(r.p_a) && interior(r.p_c))
        .map(|r| r.f_a1c2a2)
        .reduce(f64::min);
    let definite_max = rows
        .iter()
        .filter(|r| !interior(r.p_c))
        .map(|r| r.f_a1c2a2.abs())
        .fold(0.0, f64::max);
    let report = ScanReport {
        manifest,
        steps: args.steps,
        rows: rows.len(),
        max_expected_zero,
        interior_min_f_a1c2a2: interior_min,
        definite_order_max_f_a1c2a2: definite_max,
    };
    print_json(&report);
    if max_expected_zero > DEFAULT_TOL {
        return Err(Failure::new(
            exit::INVARIANT,
            format!("negativity {max_expected_zero:.3e} on a slot set that admits a causal order"),
        ));
    }
    Ok(report.manifest.summary(&format!("{} rows, interior min {:.4}", rows.len(), interior_min.unwrap_or(f64::NAN))))
}
