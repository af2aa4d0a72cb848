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

//! Pseudo-density matrices over labeled time (and party) slots.
//!
//! Two independent constructions are provided: the closed-form recursion
//! `R₁…ₘ = ½{R₁…ₘ₋₁ ⊗ I, I ⊗ M}` built from CJ matrices, and a tomographic
//! assembly from simulated Pauli correlators under coarse-grained
//! projective measurements. The second exists to check the first.

use serde::{Deserialize, Serialize};

use crate::channels::{cj_matrix, Channel, CjConvention, CjMatrix, Instrument};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, hermitian_anticommutator, kron, kron_all, ComplexMatrix, Slot, SlotSpace, C64};

/// Tolerance on `|Tr R − 1|` for a normalized PDM.
pub const TRACE_TOL: f64 = 1e-10;

/// A Hermitian operator over an ordered list of slots. `normalized` is false
/// for post-selected or single-outcome branches whose trace is a
/// probability rather than one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PdmRepr")]
pub struct Pdm {
    slots: SlotSpace,
    matrix: ComplexMatrix,
    normalized: bool,
}

#[derive(Deserialize)]
struct PdmRepr {
    slots: SlotSpace,
    matrix: ComplexMatrix,
    #[serde(default = "default_true")]
    normalized: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<PdmRepr> for Pdm {
    type Error = Error;
    fn try_from(r: PdmRepr) -> Result<Pdm> {
        if r.normalized {
            Pdm::new(r.matrix, r.slots)
        } else {
            Pdm::unnormalized(r.matrix, r.slots)
        }
    }
}

/// Residual diagnostics for a PDM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdmReport {
    pub hermitian_residual: f64,
    pub trace_error: f64,
    /// Minimum eigenvalue over all single-slot marginals.
    pub min_slot_eigenvalue: f64,
}

impl Pdm {
    /// Hermitian, unit trace.
    pub fn new(matrix: ComplexMatrix, slots: SlotSpace) -> Result<Self> {
        let pdm = Self::unnormalized(matrix, slots)?;
        let err = (pdm.trace() - 1.0).abs();
        if err > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("PDM trace differs from 1 by {err:e}")));
        }
        Ok(Pdm { normalized: true, ..pdm })
    }

    /// Hermitian only.
    pub fn unnormalized(matrix: ComplexMatrix, slots: SlotSpace) -> Result<Self> {
        let n = matrix.check_square("PDM")?;
        if n != slots.total_dim() {
            return dim_err(format!("PDM matrix is {n}x{n} but slots span {}", slots.total_dim()));
        }
        let residual = matrix.hermitian_residual();
        if residual > linalg::HERMITIAN_TOL * matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Pdm { slots, matrix, normalized: false })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn space(&self) -> &SlotSpace {
        &self.slots
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Same matrix with new slot labels; dimensions are unchanged.
    pub fn relabeled(&self, labels: &[&str]) -> Result<Pdm> {
        if labels.len() != self.slots.len() {
            return Err(Error::InvalidArgument(format!("{} labels for {} slots", labels.len(), self.slots.len())));
        }
        let slots = SlotSpace::new(labels.iter().zip(self.slots.dims()).map(|(l, d)| (*l, d)))?;
        Ok(Pdm { slots, ..self.clone() })
    }

    /// Splits each slot into consecutive sub-slots, e.g. a time slice of
    /// dimension 4 into parties `(A, 2), (B, 2)`.
    pub fn split_slots(&self, parts: &[Vec<(&str, usize)>]) -> Result<Pdm> {
        if parts.len() != self.slots.len() {
            return Err(Error::InvalidArgument("one partition per slot required".into()));
        }
        let mut slots = Vec::new();
        for (slot, sub) in self.slots.slots().iter().zip(parts) {
            let prod: usize = sub.iter().map(|(_, d)| d).product();
            if prod != slot.dim {
                return dim_err(format!("slot `{}` of dim {} split into dims with product {prod}", slot.label, slot.dim));
            }
            slots.extend(sub.iter().map(|(l, d)| Slot { label: l.to_string(), dim: *d }));
        }
        Ok(Pdm { slots: SlotSpace::from_slots(slots)?, ..self.clone() })
    }

    pub fn report(&self) -> PdmReport {
        let min_slot_eigenvalue = self
            .slots
            .labels()
            .iter()
            .filter_map(|l| linalg::partial_trace(&self.matrix, &self.slots, &[l]).ok())
            .filter_map(|m| linalg::min_eigenvalue(&m).ok())
            .fold(f64::INFINITY, f64::min);
        PdmReport {
            hermitian_residual: self.matrix.hermitian_residual(),
            trace_error: (self.trace() - 1.0).abs(),
            min_slot_eigenvalue,
        }
    }

    /// Partial trace onto `keep`. The normalization flag carries over.
    pub fn marginal(&self, keep: &[&str]) -> Result<Pdm> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("marginal needs at least one slot to keep".into()));
        }
        let matrix = linalg::partial_trace(&self.matrix, &self.slots, keep)?.hermitian_part();
        let slots = self.slots.restrict(keep)?;
        Ok(Pdm { slots, matrix, normalized: self.normalized })
    }

    /// `f(R) = ‖R‖_tr − 1`.
    pub fn negativity(&self) -> Result<f64> {
        if !self.normalized {
            return Err(Error::Unnormalized);
        }
        Ok(linalg::trace_norm(&self.matrix) - 1.0)
    }
}

/// Free-function form of [`Pdm::marginal`].
pub fn marginal(r: &Pdm, keep: &[&str]) -> Result<Pdm> {
    r.marginal(keep)
}

/// Free-function form of [`Pdm::negativity`].
pub fn negativity(r: &Pdm) -> Result<f64> {
    r.negativity()
}

/// An n-qubit Pauli string `σ_{l₁} ⊗ … ⊗ σ_{lₙ}` with letters in `0..4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<u8>,
}

impl PauliString {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(l) = letters.iter().find(|&&l| l > 3) {
            return Err(Error::InvalidArgument(format!("Pauli letter {l} out of range")));
        }
        Ok(PauliString { letters })
    }

    pub fn identity(n: usize) -> Self {
        PauliString { letters: vec![0; n] }
    }

    /// The `index`-th string of `n` qubits, first letter most significant.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut letters = vec![0u8; n];
        for k in (0..n).rev() {
            letters[k] = (index % 4) as u8;
            index /= 4;
        }
        PauliString { letters }
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == 0)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        kron_all(self.letters.iter().map(|&l| ComplexMatrix::pauli(l)).collect::<Vec<_>>().iter())
    }
}

/// `P± = (I ± σ̃)/2`. For the identity string this degenerates to
/// `P₊ = I, P₋ = 0`, i.e. no measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseProjectors {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
}

impl CoarseProjectors {
    pub fn new(s: &PauliString) -> Self {
        let sigma = s.matrix();
        let id = ComplexMatrix::identity(sigma.rows());
        CoarseProjectors { plus: (&id + &sigma).scale_real(0.5), minus: (&id - &sigma).scale_real(0.5) }
    }
}

/// True when a temporal CJ matrix comes from a trace-preserving map.
fn is_trace_preserving(cj: &CjMatrix) -> bool {
    cj.output_traced().max_abs_diff(&ComplexMatrix::identity(cj.dim_in)) <= TRACE_TOL
}

/// One step of the recursion: `½{R ⊗ I_out, I_prefix ⊗ M}` where `M` acts
/// on the last slot of `r` and a new slot.
pub(crate) fn extend(r: &ComplexMatrix, last_dim: usize, cj: &CjMatrix) -> Result<ComplexMatrix> {
    if cj.convention != CjConvention::Temporal {
        return Err(Error::InvalidArgument("PDM recursion needs temporal-convention CJ matrices".into()));
    }
    if cj.dim_in != last_dim {
        return dim_err(format!("CJ matrix expects input {} but the last slot has dim {last_dim}", cj.dim_in));
    }
    let prefix = r.rows() / last_dim;
    let lifted = kron(r, &ComplexMatrix::identity(cj.dim_out));
    let padded = kron(&ComplexMatrix::identity(prefix), &cj.matrix);
    // the sparser factor goes on the left of the product
    let nnz = |m: &ComplexMatrix| m.data().iter().filter(|z| **z != C64::default()).count();
    Ok(if nnz(&lifted) <= nnz(&padded) {
        hermitian_anticommutator(&lifted, &padded)
    } else {
        hermitian_anticommutator(&padded, &lifted)
    })
}

/// Closed-form PDM from an initial state and the CJ matrices of the maps
/// between consecutive times. Slots are labeled `t1, t2, …`.
///
/// The result is flagged normalized when `rho1` has unit trace and every
/// map is trace preserving.
pub fn build_closed_form(rho1: &ComplexMatrix, cjs: &[CjMatrix]) -> Result<Pdm> {
    let d1 = rho1.check_square("initial state")?;
    let residual = rho1.hermitian_residual();
    if residual > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian(residual));
    }
    let mut r = rho1.clone();
    let mut dims = vec![d1];
    for cj in cjs {
        r = extend(&r, *dims.last().expect("non-empty"), cj)?;
        dims.push(cj.dim_out);
    }
    let slots = SlotSpace::new(dims.iter().enumerate().map(|(k, &d)| (format!("t{}", k + 1), d)))?;
    let normalized = (rho1.trace().re - 1.0).abs() <= TRACE_TOL && cjs.iter().all(is_trace_preserving);
    if normalized {
        Pdm::new(r, slots)
    } else {
        Pdm::unnormalized(r, slots)
    }
}

/// [`build_closed_form`] with the CJ matrices computed from Kraus channels.
pub fn build_from_channels(rho1: &ComplexMatrix, channels: &[Channel]) -> Result<Pdm> {
    let cjs: Vec<CjMatrix> = channels.iter().map(cj_matrix).collect();
    build_closed_form(rho1, &cjs)
}

pub const TOMOGRAPHY_MAX_QUBITS: usize = 2;
pub const TOMOGRAPHY_MAX_TIMES: usize = 3;

fn qubit_count(d: usize) -> Option<usize> {
    (d.is_power_of_two() && d > 1).then(|| d.trailing_zeros() as usize)
}

/// Expectation of `σ̃₁ ⊗ … ⊗ σ̃ₘ` when each non-identity string is measured
/// with coarse-grained projectors at its time and the state is propagated
/// through the channels in between. Outcome paths are enumerated exactly.
pub fn correlator(rho1: &ComplexMatrix, channels: &[Channel], strings: &[PauliString]) -> Result<f64> {
    if strings.len() != channels.len() + 1 {
        return Err(Error::InvalidArgument(format!("{} strings for {} times", strings.len(), channels.len() + 1)));
    }
    // (sign, unnormalized post-measurement state)
    let mut paths: Vec<(f64, ComplexMatrix)> = vec![(1.0, rho1.clone())];
    for (t, s) in strings.iter().enumerate() {
        if !s.is_identity() {
            let proj = CoarseProjectors::new(s);
            paths = paths
                .into_iter()
                .flat_map(|(sign, st)| {
                    [(sign, &proj.plus), (-sign, &proj.minus)]
                        .map(|(sg, p)| (sg, &(p * &st) * p))
                })
                .collect();
        }
        if let Some(ch) = channels.get(t) {
            paths = paths.into_iter().map(|(sg, st)| ch.apply(&st).map(|o| (sg, o))).collect::<Result<_>>()?;
        }
    }
    Ok(paths.iter().map(|(sg, st)| sg * st.trace().re).sum())
}

/// Assembles `R = 2^{−mn} Σ ⟨{σ̃ᵢ}⟩ ⊗ σ̃ᵢ` from simulated correlators.
/// Limited to at most two qubits and three times.
pub fn build_tomographic(rho1: &ComplexMatrix, channels: &[Channel]) -> Result<Pdm> {
    let d = rho1.check_square("initial state")?;
    let n = qubit_count(d).ok_or_else(|| Error::InvalidArgument(format!("dimension {d} is not a qubit register")))?;
    let m = channels.len() + 1;
    if n > TOMOGRAPHY_MAX_QUBITS || m > TOMOGRAPHY_MAX_TIMES {
        return Err(Error::SizeGuard(format!(
            "tomography limited to {TOMOGRAPHY_MAX_QUBITS} qubits and {TOMOGRAPHY_MAX_TIMES} times, got {n} and {m}"
        )));
    }
    if let Some(ch) = channels.iter().find(|c| c.dim_in() != d || c.dim_out() != d) {
        return dim_err(format!("channel {}->{} on a {d}-dimensional register", ch.dim_in(), ch.dim_out()));
    }
    let per_time = 4usize.pow(n as u32);
    let total = d.pow(m as u32);
    let mut r = ComplexMatrix::zeros(total, total);
    for index in 0..per_time.pow(m as u32) {
        let strings: Vec<PauliString> =
            (0..m).map(|t| PauliString::from_index(n, index / per_time.pow((m - 1 - t) as u32) % per_time)).collect();
        let c = correlator(rho1, channels, &strings)?;
        if c == 0.0 {
            continue;
        }
        let op = kron_all(strings.iter().map(|s| s.matrix()).collect::<Vec<_>>().iter());
        r = &r + &op.scale_real(c);
    }
    let r = r.scale_real(1.0 / total as f64);
    let slots = SlotSpace::times(m, d);
    if (r.trace().re - 1.0).abs() <= TRACE_TOL {
        Pdm::new(r, slots)
    } else {
        Pdm::unnormalized(r, slots)
    }
}

/// Coarse-grained joint probabilities `(p₊, p₋)` of the product of the two
/// Pauli outcomes being ±1 together with the outcome that produced `r_a`:
/// `p± = ½(Tr Rᵃ ± Tr(σ̃₁ ⊗ σ̃₂ Rᵃ))`.
pub fn prob_coarse(r_a: &Pdm, s1: &PauliString, s2: &PauliString) -> Result<(f64, f64)> {
    if s1.is_identity() || s2.is_identity() {
        return Err(Error::InvalidArgument("coarse-grained probabilities need non-identity strings".into()));
    }
    if r_a.space().len() != 2 {
        return dim_err("coarse-grained probabilities need a two-slot PDM");
    }
    let obs = kron(&s1.matrix(), &s2.matrix());
    if obs.rows() != r_a.matrix().rows() {
        return dim_err("Pauli strings do not match the PDM slot dimensions");
    }
    let corr = (&obs * r_a.matrix()).trace().re;
    let tr = r_a.trace();
    Ok((0.5 * (tr + corr), 0.5 * (tr - corr)))
}

/// `Tr((Π at slot) Rᵃ)`: the probability of projector `Π` at one slot with
/// nothing measured at the others.
pub fn prob_projector(r_a: &Pdm, slot: &str, proj: &ComplexMatrix) -> Result<f64> {
    let lifted = linalg::embed(proj, r_a.space(), &[slot])?;
    Ok((&lifted * r_a.matrix()).trace().re)
}

/// `P(a) = Tr Rᵃ`.
pub fn prob_outcome(r_a: &Pdm) -> f64 {
    r_a.trace()
}

/// Two parties across three times: party instruments at `[t1,t2]` and
/// `[t2,t3]`. Slots are `A1, B1, A2, B2, A3, B3`.
pub struct TwoPartyProtocol<'a> {
    pub first: [&'a Instrument; 2],
    pub second: [&'a Instrument; 2],
}

impl TwoPartyProtocol<'_> {
    fn check(&self, rho1: &ComplexMatrix) -> Result<()> {
        let [a1, b1] = self.first;
        let [a2, b2] = self.second;
        if rho1.rows() != a1.dim_in() * b1.dim_in() || !rho1.is_square() {
            return dim_err("initial state does not match the first-stage party inputs");
        }
        if a2.dim_in() != a1.dim_out() || b2.dim_in() != b1.dim_out() {
            return dim_err("second-stage inputs do not match first-stage outputs");
        }
        Ok(())
    }

    /// `R^{a₁b₁a₂b₂}₁₂₃` for the given outcomes `[a1, b1, a2, b2]`.
    pub fn pdm(&self, rho1: &ComplexMatrix, outcomes: [usize; 4]) -> Result<Pdm> {
        self.check(rho1)?;
        let [a1, b1] = self.first;
        let [a2, b2] = self.second;
        let stage1 = a1.outcome(outcomes[0])?.tensor(b1.outcome(outcomes[1])?);
        let stage2 = a2.outcome(outcomes[2])?.tensor(b2.outcome(outcomes[3])?);
        let r = build_from_channels(rho1, &[stage1, stage2])?;
        r.split_slots(&[
            vec![("A1", a1.dim_in()), ("B1", b1.dim_in())],
            vec![("A2", a2.dim_in()), ("B2", b2.dim_in())],
            vec![("A3", a2.dim_out()), ("B3", b2.dim_out())],
        ])
    }
}

/// `P(a₁,b₁,a₂,b₂) = Tr R^{a₁b₁a₂b₂}₁₂₃`.
pub fn prob_multiparty(rho1: &ComplexMatrix, protocol: &TwoPartyProtocol<'_>, outcomes: [usize; 4]) -> Result<f64> {
    Ok(protocol.pdm(rho1, outcomes)?.trace())
}

/// `|v⟩⟨v|` helper used in examples and tests.
pub fn pure(v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::outer(v, v)
}
