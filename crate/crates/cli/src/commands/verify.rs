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

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use stq::channels::{random_cptp_with, random_instrument_with, Instrument};
use stq::linalg::{ComplexMatrix, ONE, ZERO};
use stq::mappings::{self, bridge, process_to_pdm, process_to_twotime, recompose};
use stq::pdm::{build_from_channels, build_tomographic};
use stq::process::{born_table, random_valid_process, ProcessDims, ProcessMatrix};
use stq::random::{ginibre, random_density, rng, split_seed, StqRng};
use stq::twotime::{abl_table, ensemble_table, ensemble_table_bipartite, pure_table, PureTwoTimeState, TwoTimeEnsemble};
use stq::Result;

use crate::args::{Suite, VerifyArgs};
use crate::exit::{self, Failure};
use crate::report::{print_json, RunManifest};

const SUITES: [Suite; 5] = [Suite::PdmOracle, Suite::Abl, Suite::Pure, Suite::Ensemble, Suite::Bridge];

fn name(s: Suite) -> &'static str {
    match s {
        Suite::PdmOracle => "pdm-oracle",
        Suite::Abl => "abl",
        Suite::Pure => "pure",
        Suite::Ensemble => "ensemble",
        Suite::Bridge => "bridge",
        Suite::All => "all",
    }
}

#[derive(Serialize)]
struct SuiteResult {
    suite: &'static str,
    trials: usize,
    max_deviation: f64,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    manifest: RunManifest,
    suites: Vec<SuiteResult>,
    passed: bool,
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn instrument(r: &mut StqRng, d: usize) -> Result<Instrument> {
    let outcomes = r.random_range(2..=3);
    let per = r.random_range(1..=2);
    random_instrument_with(d, d, outcomes, per, r)
}

fn pdm_oracle(r: &mut StqRng, trial: usize) -> Result<f64> {
    let (n, m) = [(1, 2), (1, 3), (2, 2)][trial % 3];
    let d = 1usize << n;
    let rho = random_density(d, r);
    let channels = (1..m)
        .map(|_| {
            let nk = r.random_range(1..=4);
            random_cptp_with(d, d, nk, r)
        })
        .collect::<Result<Vec<_>>>()?;
    let closed = build_from_channels(&rho, &channels)?;
    let tomo = build_tomographic(&rho, &channels)?;
    Ok(closed.matrix().max_abs_diff(tomo.matrix()))
}

fn abl(r: &mut StqRng) -> Result<f64> {
    let d = r.random_range(2..=4);
    let inst = instrument(r, d)?;
    let (j, i) = (r.random_range(0..d), r.random_range(0..d));
    let pre = ComplexMatrix::basis_vector(d, j);
    let post = ComplexMatrix::basis_vector(d, i);
    Ok(max_dev(&abl_table(&pre, &post, &inst)?, &mappings::simple_conditional(j, i, &inst)?))
}

fn pure(r: &mut StqRng) -> Result<f64> {
    let d = r.random_range(2..=3);
    let inst = instrument(r, d)?;
    let state = PureTwoTimeState::single(&ginibre(d, d, r));
    Ok(max_dev(&pure_table(&state, &inst)?, &mappings::pure_conditional(&state, &inst)?))
}

fn ensemble(r: &mut StqRng) -> Result<f64> {
    let d = r.random_range(2..=3);
    let inst = instrument(r, d)?;
    let n = r.random_range(2..=4);
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let members = raw.iter().map(|w| (w / total, PureTwoTimeState::single(&ginibre(d, d, r)))).collect();
    let ens = TwoTimeEnsemble::new(members)?;
    Ok(max_dev(&ensemble_table(&ens, &inst)?, &mappings::ensemble_conditional(&ens, &inst)?))
}

fn bridge_trial(r: &mut StqRng) -> Result<f64> {
    let w = random_valid_process(ProcessDims::qubits(), r)?;
    let a = instrument(r, 2)?;
    let b = instrument(r, 2)?;
    let t = bridge(&w, &a, &b)?;
    Ok(t.twotime_deviation.max(t.pdm_deviation))
}

/// W = I/4 against the 16-member ensemble of basis coefficients with
/// computational measurements: every route must give 1/4 per outcome.
fn uniform_example() -> Result<f64> {
    let dims = ProcessDims::qubits();
    let w = ProcessMatrix::uniform(dims);
    let members = (0..16)
        .map(|x| {
            let mut c = vec![ZERO; 16];
            c[x] = ONE * 2.0;
            Ok((1.0 / 16.0, PureTwoTimeState::bipartite([2; 4], c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let ens = TwoTimeEnsemble::new(members)?;
    let z = Instrument::computational(2);
    let uniform = [0.25; 4];
    let mut dev = recompose(&ens).max_abs_diff(w.matrix());
    dev = dev.max(max_dev(&born_table(&w, &z, &z)?.concat(), &uniform));
    dev = dev.max(max_dev(&ensemble_table_bipartite(&ens, &z, &z)?.concat(), &uniform));
    dev = dev.max(max_dev(&ensemble_table_bipartite(&process_to_twotime(&w)?, &z, &z)?.concat(), &uniform));
    let branches = (0..4).map(|x| Ok(process_to_pdm(&w, &z, &z, x / 2, x % 2)?.probability())).collect::<Result<Vec<f64>>>()?;
    let total: f64 = branches.iter().sum();
    let normalized: Vec<f64> = branches.iter().map(|p| p / total).collect();
    Ok(dev.max(max_dev(&normalized, &uniform)))
}

fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<f64> {
    let suite_seed = split_seed(seed, SUITES.iter().position(|&s| s == suite).unwrap_or(0) as u64);
    let devs = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng(split_seed(suite_seed, k as u64));
            match suite {
                Suite::PdmOracle => pdm_oracle(&mut r, k),
                Suite::Abl => abl(&mut r),
                Suite::Pure => pure(&mut r),
                Suite::Ensemble => ensemble(&mut r),
                Suite::Bridge => bridge_trial(&mut r),
                Suite::All => unreachable!("expanded by the caller"),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = devs.into_iter().fold(0.0, f64::max);
    if suite == Suite::Bridge {
        worst = worst.max(uniform_example()?);
    }
    Ok(worst)
}

pub fn run(args: &VerifyArgs) -> std::result::Result<String, Failure> {
    if !(args.tol >= 0.0) {
        return Err(Failure::new(exit::SCHEMA, "--tol must be a non-negative number"));
    }
    let manifest = RunManifest::new("verify").seed(args.seed).tolerance(args.tol);
    let selected: Vec<Suite> = if args.suite == Suite::All { SUITES.to_vec() } else { vec![args.suite] };
    let mut suites = Vec::new();
    for suite in selected {
        let max_deviation = run_suite(suite, args.trials, args.seed)?;
        suites.push(SuiteResult { suite: name(suite), trials: args.trials, max_deviation, passed: max_deviation <= args.tol });
    }
    let passed = suites.iter().all(|s| s.passed);
    let summary: Vec<String> = suites.iter().map(|s| format!("{} {:.2e}", s.suite, s.max_deviation)).collect();
    let report = VerifyReport { manifest, suites, passed };
    print_json(&report);
    let status = format!("{} ({})", if passed { "passed" } else { "FAILED" }, summary.join(", "));
    if !passed {
        return Err(Failure::new(exit::TOLERANCE, report.manifest.summary(&status)));
    }
    Ok(report.manifest.summary(&status))
}
