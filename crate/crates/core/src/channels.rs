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

//! CP maps in Kraus form, instruments, and Choi–Jamiołkowski matrices.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, kron, ComplexMatrix, SlotSpace, C64};
use crate::random::{haar_unitary, rng};

/// Tolerance for the completeness relation `Σ E†E = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFlag {
    /// Trace-preserving.
    Cptp,
    /// Trace-non-increasing.
    Cp,
}

/// A completely positive map `ρ ↦ Σ_μ E_μ ρ E_μ†`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr")]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    flags: Vec<ChannelFlag>,
}

#[derive(Deserialize)]
struct ChannelRepr {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    #[serde(default)]
    flags: Vec<ChannelFlag>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;

    fn try_from(r: ChannelRepr) -> Result<Channel> {
        let mut ch = Channel::new(r.kraus)?;
        if ch.dim_in != r.dim_in || ch.dim_out != r.dim_out {
            return dim_err(format!(
                "declared {}->{} but Kraus operators map {}->{}",
                r.dim_in, r.dim_out, ch.dim_in, ch.dim_out
            ));
        }
        for flag in r.flags {
            ch = ch.with_flag(flag)?;
        }
        Ok(ch)
    }
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if dim_in == 0 || dim_out == 0 {
            return dim_err("empty Kraus operator");
        }
        if let Some(k) = kraus.iter().find(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return dim_err(format!("Kraus operators {dim_out}x{dim_in} and {}x{} mixed", k.rows(), k.cols()));
        }
        Ok(Channel { dim_in, dim_out, kraus, flags: Vec::new() })
    }

    /// A channel whose Kraus operators must satisfy completeness.
    pub fn new_cptp(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(kraus)?.with_flag(ChannelFlag::Cptp)
    }

    /// Attaches a flag after checking the property it claims.
    pub fn with_flag(mut self, flag: ChannelFlag) -> Result<Self> {
        let mode = match flag {
            ChannelFlag::Cptp => ValidationMode::Cptp,
            ChannelFlag::Cp => ValidationMode::Cp,
        };
        let report = self.validate(mode);
        if !report.passed {
            return Err(Error::InvalidArgument(format!(
                "channel flagged {flag:?} fails its check (residual {:e})",
                report.max_residual
            )));
        }
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        Ok(self)
    }

    pub fn identity(d: usize) -> Self {
        Channel { dim_in: d, dim_out: d, kraus: vec![ComplexMatrix::identity(d)], flags: vec![ChannelFlag::Cptp] }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new_cptp(vec![u])
    }

    /// The CP map `ρ ↦ |v⟩⟨v| ρ |v⟩⟨v|` (post-selection on `|v⟩`).
    pub fn projector(v: &[C64]) -> Self {
        let p = ComplexMatrix::outer(v, v);
        Channel { dim_in: v.len(), dim_out: v.len(), kraus: vec![p], flags: Vec::new() }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn flags(&self) -> &[ChannelFlag] {
        &self.flags
    }

    /// `Σ_μ E_μ ρ E_μ†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !rho.is_square() || rho.rows() != self.dim_in {
            return dim_err(format!("channel input is {} but state is {}x{}", self.dim_in, rho.rows(), rho.cols()));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.kraus {
            out = &out + &(&(e * rho) * &e.adjoint());
        }
        Ok(out)
    }

    /// `Σ_μ E_μ† E_μ`.
    pub fn effect(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, e| &acc + &(&e.adjoint() * e))
    }

    pub fn validate(&self, mode: ValidationMode) -> ValidationReport {
        let effect = self.effect();
        let (passed, max_residual) = match mode {
            ValidationMode::Cptp => {
                let r = effect.max_abs_diff(&ComplexMatrix::identity(self.dim_in));
                (r <= COMPLETENESS_TOL, r)
            }
            ValidationMode::Cp => {
                let top = linalg::eigvalsh(&effect).ok().and_then(|v| v.last().copied()).unwrap_or(f64::INFINITY);
                let r = (top - 1.0).max(0.0);
                (r <= COMPLETENESS_TOL, r)
            }
        };
        ValidationReport { mode: mode.to_string(), passed, max_residual }
    }

    /// Parallel composition `self ⊗ other`.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let kraus = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| kron(a, b))).collect();
        let flags = self.flags.iter().filter(|f| other.flags.contains(f)).copied().collect();
        Channel { dim_in: self.dim_in * other.dim_in, dim_out: self.dim_out * other.dim_out, kraus, flags }
    }

    /// Sequential composition: `self` applied after `first`.
    pub fn after(&self, first: &Channel) -> Result<Channel> {
        if first.dim_out != self.dim_in {
            return dim_err(format!("cannot feed {} outputs into {} inputs", first.dim_out, self.dim_in));
        }
        let kraus = self.kraus.iter().flat_map(|a| first.kraus.iter().map(move |b| a * b)).collect();
        let flags = self.flags.iter().filter(|f| first.flags.contains(f)).copied().collect();
        Ok(Channel { dim_in: first.dim_in, dim_out: self.dim_out, kraus, flags })
    }

    /// Reconstructs a channel without flags from concatenated Kraus lists.
    fn concat<'a>(parts: impl IntoIterator<Item = &'a Channel>) -> Result<Channel> {
        Channel::new(parts.into_iter().flat_map(|c| c.kraus.iter().cloned()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Cp,
    Cptp,
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMode::Cp => "cp",
            ValidationMode::Cptp => "cptp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub mode: String,
    pub passed: bool,
    pub max_residual: f64,
}

/// A set of CP maps, one per outcome, summing to a CPTP map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentRepr")]
pub struct Instrument {
    outcomes: Vec<Channel>,
}

#[derive(Deserialize)]
struct InstrumentRepr {
    outcomes: Vec<Channel>,
}

impl TryFrom<InstrumentRepr> for Instrument {
    type Error = Error;
    fn try_from(r: InstrumentRepr) -> Result<Instrument> {
        Instrument::new(r.outcomes)
    }
}

impl Instrument {
    /// Checks that the outcomes share dimensions and that their sum is CPTP.
    pub fn new(outcomes: Vec<Channel>) -> Result<Self> {
        let inst = Self::new_unchecked(outcomes)?;
        let report = inst.validate();
        if !report.passed {
            return Err(Error::InvalidArgument(format!(
                "instrument outcomes do not sum to a CPTP map (residual {:e})",
                report.max_residual
            )));
        }
        Ok(inst)
    }

    /// Dimension checks only; the completeness relation is not enforced.
    pub fn new_unchecked(outcomes: Vec<Channel>) -> Result<Self> {
        let first = outcomes.first().ok_or_else(|| Error::InvalidArgument("instrument needs at least one outcome".into()))?;
        let dims = (first.dim_in, first.dim_out);
        if outcomes.iter().any(|c| (c.dim_in, c.dim_out) != dims) {
            return dim_err("instrument outcomes have different dimensions");
        }
        Ok(Instrument { outcomes })
    }

    /// Each outcome is a list of Kraus operators.
    pub fn from_kraus(outcomes: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        Self::new(outcomes.into_iter().map(Channel::new).collect::<Result<_>>()?)
    }

    /// Rank-one projective measurement in an orthonormal basis.
    pub fn projective(basis: &[Vec<C64>]) -> Result<Self> {
        Self::new(basis.iter().map(|v| Channel::projector(v)).collect())
    }

    /// Measurement in the computational basis of dimension `d`.
    pub fn computational(d: usize) -> Self {
        let basis: Vec<Vec<C64>> = (0..d).map(|i| ComplexMatrix::basis_vector(d, i)).collect();
        Self::projective(&basis).expect("computational basis is complete")
    }

    /// A single-outcome instrument.
    pub fn from_channel(ch: Channel) -> Result<Self> {
        Self::new(vec![ch])
    }

    pub fn outcomes(&self) -> &[Channel] {
        &self.outcomes
    }

    pub fn outcome(&self, a: usize) -> Result<&Channel> {
        self.outcomes
            .get(a)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {a} out of range ({} outcomes)", self.outcomes.len())))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.outcomes[0].dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.outcomes[0].dim_out
    }

    /// The CPTP map `Σ_a M_a`.
    pub fn summed(&self) -> Channel {
        Channel::concat(&self.outcomes).expect("outcomes share dimensions")
    }

    pub fn validate(&self) -> ValidationReport {
        let r = self.summed().validate(ValidationMode::Cptp);
        ValidationReport { mode: "instrument".into(), ..r }
    }

    /// Joint instrument `self ⊗ other`; outcome `(a, b)` has index
    /// `a * other.len() + b`.
    pub fn tensor(&self, other: &Instrument) -> Instrument {
        let outcomes = self.outcomes.iter().flat_map(|a| other.outcomes.iter().map(move |b| a.tensor(b))).collect();
        Instrument { outcomes }
    }
}

/// Which Choi–Jamiołkowski convention a matrix follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CjConvention {
    /// `Σ |n⟩⟨m| ⊗ M(|m⟩⟨n|)`: input transposed. Used by pseudo-density
    /// matrices; not positive in general (the identity gives SWAP).
    Temporal,
    /// Full transpose of the Choi matrix. Positive semidefinite for CP maps;
    /// this is the operator paired with process matrices.
    Process,
}

/// CJ matrix on `input ⊗ output`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CjMatrix {
    pub matrix: ComplexMatrix,
    pub dim_in: usize,
    pub dim_out: usize,
    pub convention: CjConvention,
}

impl CjMatrix {
    /// Slot space `[("in", dim_in), ("out", dim_out)]`.
    pub fn space(&self) -> SlotSpace {
        SlotSpace::new([("in", self.dim_in), ("out", self.dim_out)]).expect("distinct labels")
    }

    /// Partial trace over the output slot.
    pub fn output_traced(&self) -> ComplexMatrix {
        linalg::partial_trace(&self.matrix, &self.space(), &["in"]).expect("valid space")
    }

    /// Recovers `M(ρ) = Tr_in[(ρ ⊗ I) M]` from a temporal-convention matrix.
    pub fn act(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.convention != CjConvention::Temporal {
            return Err(Error::InvalidArgument("act expects the temporal CJ convention".into()));
        }
        if !rho.is_square() || rho.rows() != self.dim_in {
            return dim_err("state does not match CJ input dimension");
        }
        let lifted = kron(rho, &ComplexMatrix::identity(self.dim_out));
        linalg::partial_trace(&(&lifted * &self.matrix), &self.space(), &["out"])
    }

    /// Converts to the other convention by transposing the output slot.
    pub fn converted(&self, to: CjConvention) -> CjMatrix {
        if to == self.convention {
            return self.clone();
        }
        let matrix = linalg::partial_transpose(&self.matrix, &self.space(), &["out"]).expect("valid space");
        CjMatrix { matrix, convention: to, ..*self }
    }

    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a CjMatrix>) -> Result<CjMatrix> {
        let mut it = parts.into_iter();
        let first = it.next().ok_or_else(|| Error::InvalidArgument("empty CJ sum".into()))?.clone();
        it.try_fold(first, |acc, m| {
            if (m.dim_in, m.dim_out, m.convention) != (acc.dim_in, acc.dim_out, acc.convention) {
                return dim_err("CJ matrices differ in shape or convention");
            }
            Ok(CjMatrix { matrix: &acc.matrix + &m.matrix, ..acc })
        })
    }
}

/// CJ matrix `M = Σ_{mn} |m⟩⟨n|ᵀ ⊗ M(|m⟩⟨n|)`, transpose in the
/// computational basis.
pub fn cj_matrix(ch: &Channel) -> CjMatrix {
    let (di, dout) = (ch.dim_in, ch.dim_out);
    // M[(n,p),(m,q)] = Σ_μ E_pm conj(E_qn)
    let matrix = ComplexMatrix::from_fn(di * dout, di * dout, |r, c| {
        let (n, p) = (r / dout, r % dout);
        let (m, q) = (c / dout, c % dout);
        ch.kraus.iter().map(|e| e.get(p, m) * e.get(q, n).conj()).sum()
    });
    CjMatrix { matrix, dim_in: di, dim_out: dout, convention: CjConvention::Temporal }
}

/// Positive CJ operator used with process matrices.
pub fn process_cj(ch: &Channel) -> CjMatrix {
    let (di, dout) = (ch.dim_in, ch.dim_out);
    // M[(n,p),(m,q)] = Σ_μ E_qm conj(E_pn)
    let matrix = ComplexMatrix::from_fn(di * dout, di * dout, |r, c| {
        let (n, p) = (r / dout, r % dout);
        let (m, q) = (c / dout, c % dout);
        ch.kraus.iter().map(|e| e.get(q, m) * e.get(p, n).conj()).sum()
    });
    CjMatrix { matrix, dim_in: di, dim_out: dout, convention: CjConvention::Process }
}

/// Haar-random CPTP map: a random isometry `C^{dim_in} → C^{dim_out} ⊗
/// C^{n_kraus}` cut into `n_kraus` blocks.
pub fn random_cptp(dim_in: usize, dim_out: usize, n_kraus: usize, seed: u64) -> Result<Channel> {
    random_cptp_with(dim_in, dim_out, n_kraus, &mut rng(seed))
}

pub fn random_cptp_with(dim_in: usize, dim_out: usize, n_kraus: usize, rng: &mut impl Rng) -> Result<Channel> {
    if n_kraus == 0 {
        return Err(Error::InvalidArgument("n_kraus must be at least 1".into()));
    }
    if dim_in == 0 || dim_out == 0 {
        return dim_err("channel dimensions must be positive");
    }
    let big = dim_out * n_kraus;
    if big < dim_in {
        return Err(Error::InvalidArgument(format!(
            "{n_kraus} Kraus operators of size {dim_out}x{dim_in} cannot be trace preserving"
        )));
    }
    let u = haar_unitary(big, rng);
    let kraus = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |i, j| u.get(k * dim_out + i, j)))
        .collect();
    Channel::new_cptp(kraus)
}

/// Random instrument with two Kraus operators per outcome.
pub fn random_instrument(dim: usize, n_outcomes: usize, seed: u64) -> Result<Instrument> {
    random_instrument_with(dim, dim, n_outcomes, 2, &mut rng(seed))
}

/// Splits the Kraus list of a random CPTP map into `n_outcomes` groups of
/// `kraus_per_outcome` operators.
pub fn random_instrument_with(
    dim_in: usize,
    dim_out: usize,
    n_outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut impl Rng,
) -> Result<Instrument> {
    if n_outcomes == 0 || kraus_per_outcome == 0 {
        return Err(Error::InvalidArgument("instrument needs outcomes and Kraus operators".into()));
    }
    let ch = random_cptp_with(dim_in, dim_out, n_outcomes * kraus_per_outcome, rng)?;
    let outcomes = ch
        .kraus
        .chunks(kraus_per_outcome)
        .map(|c| Channel::new(c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut inst = Instrument::new(outcomes)?;
    if n_outcomes == 1 {
        inst.outcomes[0].flags.push(ChannelFlag::Cptp);
    }
    Ok(inst)
}
