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

//! Realizations of two-time states and process matrices as
//! pseudo-density matrices.
//!
//! Each boundary state is prepared with an ancilla, evolved by the outcome
//! map on the system, post-selected onto a maximally entangled
//! system–ancilla state and the ancilla is traced out. The post-selection
//! projector factorizes across the last two times:
//! `½{R₁₂ ⊗ I, I ⊗ Φ ⊗ Φ} = ½{R₁₂, I ⊗ Φ} ⊗ Φ`, so the three-time operator
//! is never built at full size, and the rank-one preparation and
//! post-selection reduce the rest to matrix–vector products.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{cj_matrix, Channel, Instrument};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, kron, ComplexMatrix, SlotSpace, C64, ZERO};
use crate::pdm::{build_from_channels, Pdm};
use crate::process::{born_table, ProcessMatrix};
use crate::twotime::{ensemble_table_bipartite, PureTwoTimeState, TwoTimeEnsemble, POST_SELECTION_TOL};

/// Eigenvalues of `W` below this are dropped when decomposing it.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// One post-selected branch as a PDM. Its trace is the joint probability of
/// the outcome and the post-selection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdmRealization {
    pub pdm: Pdm,
    pub post_label: String,
    pub ancilla_traced: bool,
}

impl PdmRealization {
    pub fn probability(&self) -> f64 {
        self.pdm.trace()
    }
}

fn conditioned(weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if total <= POST_SELECTION_TOL {
        return Err(Error::ImpossiblePostSelection(total));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Prepare `|j⟩`, apply outcome `a`, post-select `|i⟩`.
pub fn simple_to_pdm(j: usize, i: usize, inst: &Instrument, a: usize) -> Result<PdmRealization> {
    let (din, dout) = (inst.dim_in(), inst.dim_out());
    if j >= din || i >= dout {
        return Err(Error::InvalidArgument(format!("basis indices ({j}, {i}) out of range for {din}->{dout}")));
    }
    let rho = ComplexMatrix::unit(din, j, j);
    let post = Channel::projector(&ComplexMatrix::basis_vector(dout, i));
    let pdm = build_from_channels(&rho, &[inst.outcome(a)?.clone(), post])?;
    Ok(PdmRealization { pdm, post_label: format!("i={i}"), ancilla_traced: false })
}

/// `P(a | i)` for every outcome.
pub fn simple_conditional(j: usize, i: usize, inst: &Instrument) -> Result<Vec<f64>> {
    conditioned((0..inst.len()).map(|a| simple_to_pdm(j, i, inst, a).map(|r| r.probability())).collect::<Result<_>>()?)
}

/// The maximally entangled post-selection vector on `system ⊗ ancilla`.
pub fn max_entangled(d: usize) -> Vec<C64> {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    (0..d * d).map(|x| if x / d == x % d { amp } else { ZERO }).collect()
}

/// CJ matrix of `channel ⊗ id_ancilla`, shared by every preparation.
struct ExtendedMap {
    sys_in: usize,
    anc: usize,
    cj: ComplexMatrix,
}

impl ExtendedMap {
    /// The ancilla dimension equals the system output dimension.
    fn new(channel: &Channel) -> Self {
        let anc = channel.dim_out();
        ExtendedMap { sys_in: channel.dim_in(), anc, cj: cj_matrix(&channel.tensor(&Channel::identity(anc))).matrix }
    }

    /// Three-time operator over `(system in, system out, system out)` for
    /// the preparation `psi` on `system ⊗ ancilla`, ancilla traced out.
    ///
    /// With `L = |ψ⟩⟨ψ| ⊗ I`, `X = I ⊗ |φ⟩⟨φ|` and `v = ψ ⊗ φ`, the two-time
    /// part `½{½{L, M}, X}` equals `¼(|v⟩⟨Mv| + |Mv⟩⟨v| + T + T†)` with
    /// `T = X M L`, so only matrix–vector work is needed.
    fn branch(&self, psi: &[C64]) -> Result<ComplexMatrix> {
        let (sys_in, anc) = (self.sys_in, self.anc);
        if psi.len() != sys_in * anc {
            return dim_err("preparation does not match the channel and ancilla");
        }
        let (d1, d2) = (sys_in * anc, anc * anc);
        let phi = max_entangled(anc);
        let v = linalg::kron_vec(psi, &phi);
        let w = self.cj.mul_vec(&v);
        // N = (I ⊗ ⟨φ|) M (|ψ⟩ ⊗ I)
        let support: Vec<usize> = (0..d2).filter(|&x| phi[x] != ZERO).collect();
        let mut n = ComplexMatrix::zeros(d1, d2);
        for s in 0..d1 {
            for &x in &support {
                let row = &self.cj.data()[(s * d2 + x) * d1 * d2..(s * d2 + x + 1) * d1 * d2];
                for (y, &py) in psi.iter().enumerate() {
                    if py == ZERO {
                        continue;
                    }
                    let c = phi[x].conj() * py;
                    for t in 0..d2 {
                        n[(s, t)] += c * row[y * d2 + t];
                    }
                }
            }
        }
        let size = d1 * d2;
        let y = ComplexMatrix::from_fn(size, size, |r, c| {
            let (s, x) = (r / d2, r % d2);
            let (yy, t) = (c / d2, c % d2);
            let t_rc = phi[x] * n.get(s, t) * psi[yy].conj();
            let (s2, x2) = (c / d2, c % d2);
            let (y2, t2) = (r / d2, r % d2);
            let t_cr = (phi[x2] * n.get(s2, t2) * psi[y2].conj()).conj();
            (v[r] * w[c].conj() + w[r] * v[c].conj() + t_rc + t_cr) * 0.25
        });
        let space = SlotSpace::new([("S1", sys_in), ("C1", anc), ("S2", anc), ("C2", anc)])?;
        let y = linalg::partial_trace(&y, &space, &["S1", "S2"])?;
        Ok(kron(&y, &ComplexMatrix::identity(anc).scale_real(1.0 / anc as f64)))
    }
}

fn single_party_branch(state: &PureTwoTimeState, map: &ExtendedMap) -> Result<ComplexMatrix> {
    let alpha = state.alpha()?;
    if alpha.cols() != map.sys_in || alpha.rows() != map.anc {
        return dim_err("two-time state legs do not match the instrument");
    }
    let (din, dout) = (alpha.cols(), alpha.rows());
    // |ψ⟩ = Σ α_ij |j⟩_A |i⟩_C
    let psi: Vec<C64> = (0..din * dout).map(|x| alpha.get(x % dout, x / dout)).collect();
    map.branch(&psi)
}

fn single_party_space(state: &PureTwoTimeState) -> Result<SlotSpace> {
    let (din, dout) = state.party_dims(0);
    SlotSpace::new([("A1", din), ("A2", dout), ("A3", dout)])
}

/// Ancilla realization of a pure two-time state with normalized
/// coefficients. The trace is `(1/d) |Σ α_ij E_ij|²` summed over the
/// outcome's Kraus operators.
pub fn pure_to_pdm(state: &PureTwoTimeState, inst: &Instrument, a: usize) -> Result<PdmRealization> {
    let normalized = state.normalized()?;
    let matrix = single_party_branch(&normalized, &ExtendedMap::new(inst.outcome(a)?))?;
    let pdm = Pdm::unnormalized(matrix, single_party_space(state)?)?;
    Ok(PdmRealization { pdm, post_label: "phi".into(), ancilla_traced: true })
}

pub fn pure_conditional(state: &PureTwoTimeState, inst: &Instrument) -> Result<Vec<f64>> {
    conditioned((0..inst.len()).map(|a| pure_to_pdm(state, inst, a).map(|r| r.probability())).collect::<Result<_>>()?)
}

/// `Σ_r p_r R_r`, each member prepared from its unnormalized coefficients.
pub fn ensemble_to_pdm(ens: &TwoTimeEnsemble, inst: &Instrument, a: usize) -> Result<PdmRealization> {
    let map = ExtendedMap::new(inst.outcome(a)?);
    let (_, first) = &ens.members()[0];
    let mut sum: Option<ComplexMatrix> = None;
    for (p, s) in ens.members() {
        let branch = single_party_branch(s, &map)?.scale_real(*p);
        sum = Some(match sum {
            None => branch,
            Some(acc) => &acc + &branch,
        });
    }
    let pdm = Pdm::unnormalized(sum.expect("non-empty ensemble"), single_party_space(first)?)?;
    Ok(PdmRealization { pdm, post_label: "phi".into(), ancilla_traced: true })
}

pub fn ensemble_conditional(ens: &TwoTimeEnsemble, inst: &Instrument) -> Result<Vec<f64>> {
    conditioned((0..inst.len()).map(|a| ensemble_to_pdm(ens, inst, a).map(|r| r.probability())).collect::<Result<_>>()?)
}

/// Ensemble solving `Σ_r p_r α′_r α′_r† = W` from the eigendecomposition
/// of `W`: `p_r = λ_r / Σλ`, `α′_r = √(Σλ) u_r`.
pub fn process_to_twotime(w: &ProcessMatrix) -> Result<TwoTimeEnsemble> {
    let (values, vectors) = linalg::eigh(w.matrix())?;
    let scale = w.matrix().max_abs().max(1.0);
    if values[0] < -crate::process::PSD_TOL * scale {
        return Err(Error::NotPsd(values[0]));
    }
    let kept: Vec<usize> = (0..values.len()).rev().filter(|&r| values[r] > EIGEN_CUTOFF).collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument("process matrix has no positive spectrum".into()));
    }
    let total: f64 = kept.iter().map(|&r| values[r]).sum();
    let amp = total.sqrt();
    let n = values.len();
    let members = kept
        .iter()
        .map(|&r| {
            let coeffs = (0..n).map(|x| vectors.get(x, r) * amp).collect();
            Ok((values[r] / total, PureTwoTimeState::bipartite(w.dims().as_array(), coeffs)?))
        })
        .collect::<Result<Vec<_>>>()?;
    TwoTimeEnsemble::new(members)
}

/// `Σ_r p_r α′_r α′_r†`.
pub fn recompose(ens: &TwoTimeEnsemble) -> ComplexMatrix {
    ens.recompose()
}

/// Three-time operator over `(A1B1, A2B2, A2B2)` for one bipartite member.
fn bipartite_branch(state: &PureTwoTimeState, map: &ExtendedMap) -> Result<ComplexMatrix> {
    let (da1, da2) = state.party_dims(0);
    let (db1, db2) = state.party_dims(1);
    let c = state.coeffs();
    // |ψ⟩ = Σ α′_ijkl |i,k⟩_{A1B1} |j,l⟩_C
    let mut psi = vec![ZERO; c.len()];
    for i in 0..da1 {
        for j in 0..da2 {
            for k in 0..db1 {
                for l in 0..db2 {
                    psi[((i * db1 + k) * da2 + j) * db2 + l] = c[((i * da2 + j) * db1 + k) * db2 + l];
                }
            }
        }
    }
    map.branch(&psi)
}

fn bipartite_outcome_pdm(ens: &TwoTimeEnsemble, joint: &Channel) -> Result<Pdm> {
    let map = ExtendedMap::new(joint);
    let branches =
        ens.members().par_iter().map(|(p, s)| bipartite_branch(s, &map).map(|m| m.scale_real(*p))).collect::<Result<Vec<_>>>()?;
    let mut it = branches.into_iter();
    let first = it.next().expect("non-empty ensemble");
    let sum = it.fold(first, |acc, m| &acc + &m);
    let legs = ens.legs();
    let (da1, da2, db1, db2) = (legs[0].dim, legs[1].dim, legs[2].dim, legs[3].dim);
    let pdm = Pdm::unnormalized(sum, SlotSpace::new([("t1", da1 * db1), ("t2", da2 * db2), ("t3", da2 * db2)])?)?;
    pdm.split_slots(&[
        vec![("A1", da1), ("B1", db1)],
        vec![("A2", da2), ("B2", db2)],
        vec![("A3", da2), ("B3", db2)],
    ])
}

fn check_bipartite(ens: &TwoTimeEnsemble, inst_a: &Instrument, inst_b: &Instrument) -> Result<()> {
    let legs = ens.legs();
    if legs.len() != 4 {
        return Err(Error::InvalidArgument("bipartite realization needs a two-party ensemble".into()));
    }
    if (inst_a.dim_in(), inst_a.dim_out(), inst_b.dim_in(), inst_b.dim_out()) != (legs[0].dim, legs[1].dim, legs[2].dim, legs[3].dim) {
        return dim_err("instruments do not match the process slots");
    }
    Ok(())
}

/// Ancilla realization of a bipartite ensemble for outcomes `(a, b)`.
pub fn bipartite_ensemble_to_pdm(
    ens: &TwoTimeEnsemble,
    inst_a: &Instrument,
    inst_b: &Instrument,
    a: usize,
    b: usize,
) -> Result<PdmRealization> {
    check_bipartite(ens, inst_a, inst_b)?;
    let joint = inst_a.outcome(a)?.tensor(inst_b.outcome(b)?);
    Ok(PdmRealization { pdm: bipartite_outcome_pdm(ens, &joint)?, post_label: "phi".into(), ancilla_traced: true })
}

/// Process matrix → two-time ensemble → PDM branch for outcomes `(a, b)`.
pub fn process_to_pdm(w: &ProcessMatrix, inst_a: &Instrument, inst_b: &Instrument, a: usize, b: usize) -> Result<PdmRealization> {
    bipartite_ensemble_to_pdm(&process_to_twotime(w)?, inst_a, inst_b, a, b)
}

/// Conditional table `P_R(a, b | φ)` from the PDM branches, indexed `[a][b]`.
pub fn process_conditional_table(w: &ProcessMatrix, inst_a: &Instrument, inst_b: &Instrument) -> Result<Vec<Vec<f64>>> {
    pdm_table(&process_to_twotime(w)?, inst_a, inst_b)
}

fn pdm_table(ens: &TwoTimeEnsemble, inst_a: &Instrument, inst_b: &Instrument) -> Result<Vec<Vec<f64>>> {
    check_bipartite(ens, inst_a, inst_b)?;
    let mut weights = Vec::with_capacity(inst_a.len() * inst_b.len());
    for oa in inst_a.outcomes() {
        for ob in inst_b.outcomes() {
            weights.push(bipartite_outcome_pdm(ens, &oa.tensor(ob))?.trace());
        }
    }
    Ok(conditioned(weights)?.chunks(inst_b.len()).map(<[f64]>::to_vec).collect())
}

/// The same outcome statistics computed three ways.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BridgeTables {
    pub born: Vec<Vec<f64>>,
    pub twotime: Vec<Vec<f64>>,
    pub pdm: Vec<Vec<f64>>,
    /// `max |born − twotime|`.
    pub twotime_deviation: f64,
    /// `max |born / Σ born − pdm|`.
    pub pdm_deviation: f64,
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn bridge(w: &ProcessMatrix, inst_a: &Instrument, inst_b: &Instrument) -> Result<BridgeTables> {
    let born = born_table(w, inst_a, inst_b)?;
    let ens = process_to_twotime(w)?;
    let twotime = ensemble_table_bipartite(&ens, inst_a, inst_b)?;
    let pdm = pdm_table(&ens, inst_a, inst_b)?;
    let total: f64 = born.iter().flatten().sum();
    let born_normalized: Vec<Vec<f64>> = born.iter().map(|r| r.iter().map(|x| x / total).collect()).collect();
    Ok(BridgeTables {
        twotime_deviation: max_diff(&born, &twotime),
        pdm_deviation: max_diff(&born_normalized, &pdm),
        born,
        twotime,
        pdm,
    })
}
