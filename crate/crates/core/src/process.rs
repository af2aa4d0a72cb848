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

//! Bipartite process matrices over slots `A1, A2, B1, B2`, the generalized
//! Born rule, and randomized validity checking.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{process_cj, random_cptp_with, random_instrument_with, CjConvention, CjMatrix, Instrument};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, kron, kron_all, ComplexMatrix, SlotSpace};
use crate::random::{random_density, rng, split_seed};

/// Minimum eigenvalue tolerated by the PSD check.
pub const PSD_TOL: f64 = 1e-10;
/// Maximum deviation of `Σ_ab P(a,b)` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessDims {
    #[serde(rename = "A1")]
    pub a1: usize,
    #[serde(rename = "A2")]
    pub a2: usize,
    #[serde(rename = "B1")]
    pub b1: usize,
    #[serde(rename = "B2")]
    pub b2: usize,
}

impl ProcessDims {
    pub fn qubits() -> Self {
        ProcessDims { a1: 2, a2: 2, b1: 2, b2: 2 }
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.a1, self.a2, self.b1, self.b2]
    }

    pub fn total(&self) -> usize {
        self.a1 * self.a2 * self.b1 * self.b2
    }

    pub fn space(&self) -> SlotSpace {
        SlotSpace::new([("A1", self.a1), ("A2", self.a2), ("B1", self.b1), ("B2", self.b2)]).expect("distinct labels")
    }
}

/// Hermitian operator on `A1 ⊗ A2 ⊗ B1 ⊗ B2`. Positivity and normalization
/// are checked by [`validate`], not on construction, so invalid candidates
/// can still be inspected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessRepr")]
pub struct ProcessMatrix {
    dims: ProcessDims,
    matrix: ComplexMatrix,
}

#[derive(Deserialize)]
struct ProcessRepr {
    dims: ProcessDims,
    matrix: ComplexMatrix,
}

impl TryFrom<ProcessRepr> for ProcessMatrix {
    type Error = Error;
    fn try_from(r: ProcessRepr) -> Result<Self> {
        ProcessMatrix::new(r.matrix, r.dims)
    }
}

impl ProcessMatrix {
    pub fn new(matrix: ComplexMatrix, dims: ProcessDims) -> Result<Self> {
        let n = matrix.check_square("process matrix")?;
        if dims.as_array().contains(&0) {
            return dim_err("slot dimensions must be positive");
        }
        if n != dims.total() {
            return dim_err(format!("process matrix is {n}x{n} but slots span {}", dims.total()));
        }
        let residual = matrix.hermitian_residual();
        if residual > linalg::HERMITIAN_TOL * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian(residual));
        }
        Ok(ProcessMatrix { dims, matrix })
    }

    /// `I / (d_A1 d_B1)`, valid for any slot dimensions.
    pub fn uniform(dims: ProcessDims) -> Self {
        let matrix = ComplexMatrix::identity(dims.total()).scale_real(1.0 / (dims.a1 * dims.b1) as f64);
        ProcessMatrix { dims, matrix }
    }

    pub fn dims(&self) -> ProcessDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn space(&self) -> SlotSpace {
        self.dims.space()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(&self.matrix)
    }
}

fn check_cj(m: &CjMatrix, din: usize, dout: usize, party: &str) -> Result<()> {
    if m.convention != CjConvention::Process {
        return Err(Error::InvalidArgument("the Born rule pairs process matrices with process-convention CJ matrices".into()));
    }
    if (m.dim_in, m.dim_out) != (din, dout) {
        return dim_err(format!("party {party} expects a {din}->{dout} map, got {}->{}", m.dim_in, m.dim_out));
    }
    Ok(())
}

/// `P(a, b) = Tr[W (Mᵃ ⊗ Mᵇ)]`.
pub fn born_rule(w: &ProcessMatrix, ma: &CjMatrix, mb: &CjMatrix) -> Result<f64> {
    let d = w.dims;
    check_cj(ma, d.a1, d.a2, "A")?;
    check_cj(mb, d.b1, d.b2, "B")?;
    let x = kron(&ma.matrix, &mb.matrix);
    let n = x.rows();
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            total += (w.matrix.get(r, c) * x.get(c, r)).re;
        }
    }
    Ok(total)
}

/// Born-rule table indexed `[a][b]`.
pub fn born_table(w: &ProcessMatrix, inst_a: &Instrument, inst_b: &Instrument) -> Result<Vec<Vec<f64>>> {
    let ma: Vec<CjMatrix> = inst_a.outcomes().iter().map(process_cj).collect();
    let mb: Vec<CjMatrix> = inst_b.outcomes().iter().map(process_cj).collect();
    ma.iter().map(|a| mb.iter().map(|b| born_rule(w, a, b)).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessValidation {
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub normalization_max_deviation: f64,
    pub normalized: bool,
    pub n_samples: usize,
    pub seed: u64,
    pub valid: bool,
}

/// Random instrument pair for normalization sample `index`.
pub fn sample_instruments(dims: ProcessDims, seed: u64, index: u64) -> Result<(Instrument, Instrument)> {
    let mut r = rng(split_seed(seed, index));
    let a = random_instrument_with(dims.a1, dims.a2, 2, 2, &mut r)?;
    let b = random_instrument_with(dims.b1, dims.b2, 2, 2, &mut r)?;
    Ok((a, b))
}

/// PSD check plus `max |Σ_ab P(a,b) − 1|` over `n_samples` random
/// instrument pairs. Samples run in parallel; the result does not depend on
/// scheduling.
pub fn validate(w: &ProcessMatrix, n_samples: usize, seed: u64) -> Result<ProcessValidation> {
    let min_eigenvalue = w.min_eigenvalue()?;
    let deviations = (0..n_samples as u64)
        .into_par_iter()
        .map(|s| {
            let (a, b) = sample_instruments(w.dims, seed, s)?;
            let total: f64 = born_table(w, &a, &b)?.iter().flatten().sum();
            Ok((total - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let dev = deviations.into_iter().fold(0.0, f64::max);
    let psd = min_eigenvalue >= -PSD_TOL;
    let normalized = dev <= NORMALIZATION_TOL;
    Ok(ProcessValidation {
        min_eigenvalue,
        psd,
        normalization_max_deviation: dev,
        normalized,
        n_samples,
        seed,
        valid: psd && normalized,
    })
}

/// `q W^{B≺A} + (1 − q) W^{A≺B}`.
pub fn causal_mixture(w_bna: &ProcessMatrix, w_anb: &ProcessMatrix, q: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("mixing weight {q} outside [0, 1]")));
    }
    if w_bna.dims != w_anb.dims {
        return dim_err("process matrices have different slot dimensions");
    }
    let matrix = &w_bna.matrix.scale_real(q) + &w_anb.matrix.scale_real(1.0 - q);
    Ok(ProcessMatrix { dims: w_bna.dims, matrix })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalOrder {
    AThenB,
    BThenA,
}

/// A fixed-order process: a random state enters the first party and a
/// random CPTP channel carries its output to the second party's input.
pub fn random_ordered_process(dims: ProcessDims, order: CausalOrder, rng: &mut impl Rng) -> Result<ProcessMatrix> {
    let (first_in, first_out, second_in, second_out, labels) = match order {
        CausalOrder::AThenB => (dims.a1, dims.a2, dims.b1, dims.b2, ["A1", "A2", "B1", "B2"]),
        CausalOrder::BThenA => (dims.b1, dims.b2, dims.a1, dims.a2, ["B1", "B2", "A1", "A2"]),
    };
    let rho = random_density(first_in, rng);
    let link = random_cptp_with(first_out, second_in, 2, rng)?;
    let m = kron_all([&rho, &process_cj(&link).matrix, &ComplexMatrix::identity(second_out)]);
    let space = SlotSpace::new(labels.iter().zip([first_in, first_out, second_in, second_out]).map(|(l, d)| (*l, d)))?;
    let (matrix, _) = linalg::permute(&m, &space, &["A1", "A2", "B1", "B2"])?;
    ProcessMatrix::new(matrix.hermitian_part(), dims)
}

/// Causally separable random process: a mixture of both fixed orders with a
/// uniform weight.
pub fn random_valid_process(dims: ProcessDims, rng: &mut impl Rng) -> Result<ProcessMatrix> {
    let anb = random_ordered_process(dims, CausalOrder::AThenB, rng)?;
    let bna = random_ordered_process(dims, CausalOrder::BThenA, rng)?;
    causal_mixture(&bna, &anb, rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_instrument, Channel};
    use crate::random::random_psd;

    #[test]
    fn uniform_process_is_valid_and_uniform() {
        let w = ProcessMatrix::uniform(ProcessDims::qubits());
        assert!(w.matrix().max_abs_diff(&ComplexMatrix::identity(16).scale_real(0.25)) == 0.0);
        let rep = validate(&w, DEFAULT_SAMPLES, 1).unwrap();
        assert!(rep.valid, "{rep:?}");
        let z = Instrument::computational(2);
        for row in born_table(&w, &z, &z).unwrap() {
            for p in row {
                assert!((p - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn uniform_process_factorizes_traces() {
        let w = ProcessMatrix::uniform(ProcessDims::qubits());
        let (a, b) = (random_instrument(2, 3, 1).unwrap(), random_instrument(2, 2, 2).unwrap());
        let table = born_table(&w, &a, &b).unwrap();
        for (x, oa) in a.outcomes().iter().enumerate() {
            for (y, ob) in b.outcomes().iter().enumerate() {
                let want = 0.25 * process_cj(oa).matrix.trace().re * process_cj(ob).matrix.trace().re;
                assert!((table[x][y] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_identity_fails_psd() {
        let dims = ProcessDims::qubits();
        let w = ProcessMatrix::new(ComplexMatrix::identity(16).scale_real(-0.25), dims).unwrap();
        let rep = validate(&w, 8, 1).unwrap();
        assert!(!rep.psd && !rep.valid);
    }

    #[test]
    fn wrong_trace_fails_normalization() {
        let psd = random_psd(16, 16, &mut rng(4));
        let w = ProcessMatrix::new(psd.scale_real(3.0 / psd.trace().re), ProcessDims::qubits()).unwrap();
        let rep = validate(&w, 16, 4).unwrap();
        assert!(rep.psd && !rep.normalized, "{rep:?}");
    }

    #[test]
    fn identity_channels_sum_to_one() {
        let mut r = rng(6);
        let w = random_valid_process(ProcessDims::qubits(), &mut r).unwrap();
        let id = process_cj(&Channel::identity(2));
        let p = born_rule(&w, &id, &id).unwrap();
        assert!((p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn random_processes_are_valid() {
        let mut r = rng(7);
        for _ in 0..10 {
            for dims in [ProcessDims::qubits(), ProcessDims { a1: 2, a2: 3, b1: 3, b2: 2 }] {
                let w = random_valid_process(dims, &mut r).unwrap();
                let rep = validate(&w, 16, 3).unwrap();
                assert!(rep.valid, "{rep:?}");
            }
        }
    }

    #[test]
    fn mixture_endpoints_and_affinity() {
        let mut r = rng(9);
        let dims = ProcessDims::qubits();
        let anb = random_ordered_process(dims, CausalOrder::AThenB, &mut r).unwrap();
        let bna = random_ordered_process(dims, CausalOrder::BThenA, &mut r).unwrap();
        assert_eq!(causal_mixture(&bna, &anb, 0.0).unwrap().matrix(), anb.matrix());
        assert_eq!(causal_mixture(&bna, &anb, 1.0).unwrap().matrix(), bna.matrix());
        assert!(causal_mixture(&bna, &anb, 1.5).is_err());
        let (a, b) = sample_instruments(dims, 5, 0).unwrap();
        let (ma, mb) = (process_cj(&a.outcomes()[0]), process_cj(&b.outcomes()[1]));
        let p = |q| born_rule(&causal_mixture(&bna, &anb, q).unwrap(), &ma, &mb).unwrap();
        for q in [0.1, 0.4, 0.8] {
            assert!((p(q) - (q * p(1.0) + (1.0 - q) * p(0.0))).abs() < 1e-12);
        }
        assert!(validate(&causal_mixture(&bna, &anb, 0.3).unwrap(), 16, 2).unwrap().valid);
    }

    #[test]
    fn born_rule_is_linear_in_each_argument() {
        let w = random_valid_process(ProcessDims::qubits(), &mut rng(10)).unwrap();
        let a = random_instrument(2, 2, 11).unwrap();
        let b = random_instrument(2, 2, 12).unwrap();
        let ma: Vec<CjMatrix> = a.outcomes().iter().map(process_cj).collect();
        let mb = process_cj(&b.outcomes()[0]);
        let sum = CjMatrix::sum(&ma).unwrap();
        let lhs = born_rule(&w, &sum, &mb).unwrap();
        let rhs: f64 = ma.iter().map(|m| born_rule(&w, m, &mb).unwrap()).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn born_rule_rejects_mismatches() {
        let w = ProcessMatrix::uniform(ProcessDims::qubits());
        let id2 = process_cj(&Channel::identity(2));
        let id3 = process_cj(&Channel::identity(3));
        assert!(matches!(born_rule(&w, &id3, &id2), Err(Error::Dimension(_))));
        let temporal = crate::channels::cj_matrix(&Channel::identity(2));
        assert!(matches!(born_rule(&w, &temporal, &id2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn json_shape() {
        let w = ProcessMatrix::uniform(ProcessDims::qubits());
        let json = serde_json::to_string(&w).unwrap();
        assert!(json.starts_with(r#"{"dims":{"A1":2,"A2":2,"B1":2,"B2":2},"matrix":{"rows":16"#));
        assert_eq!(serde_json::from_str::<ProcessMatrix>(&json).unwrap(), w);
        let bad = json.replace(r#""B2":2"#, r#""B2":3"#);
        assert!(serde_json::from_str::<ProcessMatrix>(&bad).is_err());
    }

    #[test]
    fn validation_is_deterministic() {
        let w = random_valid_process(ProcessDims::qubits(), &mut rng(13)).unwrap();
        assert_eq!(validate(&w, 32, 99).unwrap(), validate(&w, 32, 99).unwrap());
    }
}
