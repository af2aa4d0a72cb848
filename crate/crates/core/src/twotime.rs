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

//! Two-time states: pre- and post-selected boundary conditions as
//! coefficient tensors, their contraction with Kraus operators, and the
//! resulting conditional outcome probabilities.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channels::{Channel, Instrument};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Post-selection weight below which conditioning is refused.
pub const POST_SELECTION_TOL: f64 = 1e-14;

/// Tolerance on the sum of ensemble weights.
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegRole {
    /// Bra leg, contracted with the output index of a Kraus operator.
    Out,
    /// Ket leg, contracted with the input index.
    In,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub role: LegRole,
    pub dim: usize,
}

/// A pure two-time state `Σ α′ ⟨out…| ⊗ |in…⟩`. Legs come in consecutive
/// pairs, one pair per party, each pair holding one `In` and one `Out` leg.
/// Coefficients are stored row-major over the legs and are not normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PureTwoTimeState {
    legs: Vec<Leg>,
    coeffs: Vec<C64>,
}

impl PureTwoTimeState {
    pub fn new(legs: Vec<Leg>, coeffs: Vec<C64>) -> Result<Self> {
        if legs.is_empty() || legs.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!("{} legs; need a positive even number", legs.len())));
        }
        if legs.iter().any(|l| l.dim == 0) {
            return dim_err("leg dimensions must be positive");
        }
        for pair in legs.chunks(2) {
            if pair[0].role == pair[1].role {
                return Err(Error::InvalidArgument("each party needs one in leg and one out leg".into()));
            }
        }
        let size: usize = legs.iter().map(|l| l.dim).product();
        if coeffs.len() != size {
            return dim_err(format!("{} coefficients for legs spanning {size}", coeffs.len()));
        }
        Ok(PureTwoTimeState { legs, coeffs })
    }

    /// Single party: `alpha[(i, j)]` with `i` the output (bra) index and `j`
    /// the input (ket) index.
    pub fn single(alpha: &ComplexMatrix) -> Self {
        let legs = vec![Leg { role: LegRole::Out, dim: alpha.rows() }, Leg { role: LegRole::In, dim: alpha.cols() }];
        PureTwoTimeState { legs, coeffs: alpha.data().to_vec() }
    }

    /// `⟨φ| ⊗ |ψ⟩`.
    pub fn product(post: &[C64], pre: &[C64]) -> Self {
        let conj = |v: &[C64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        Self::single(&ComplexMatrix::outer(&conj(post), &conj(pre)))
    }

    /// Two parties with coefficients `α′_{ijkl}`: `i` over the A input, `j`
    /// over the A output, `k` over the B input, `l` over the B output.
    /// `dims` is `[A1, A2, B1, B2]`.
    pub fn bipartite(dims: [usize; 4], coeffs: Vec<C64>) -> Result<Self> {
        let roles = [LegRole::In, LegRole::Out, LegRole::In, LegRole::Out];
        Self::new(roles.iter().zip(dims).map(|(&role, dim)| Leg { role, dim }).collect(), coeffs)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn n_parties(&self) -> usize {
        self.legs.len() / 2
    }

    /// `(input dim, output dim)` of party `p`.
    pub fn party_dims(&self, p: usize) -> (usize, usize) {
        let pair = &self.legs[2 * p..2 * p + 2];
        if pair[0].role == LegRole::In {
            (pair[0].dim, pair[1].dim)
        } else {
            (pair[1].dim, pair[0].dim)
        }
    }

    /// `Σ |α′|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: C64) -> Self {
        PureTwoTimeState { legs: self.legs.clone(), coeffs: self.coeffs.iter().map(|z| z * c).collect() }
    }

    /// Coefficients rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero two-time state".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Coefficients as a matrix for a single-party state (rows = output).
    pub fn alpha(&self) -> Result<ComplexMatrix> {
        if self.n_parties() != 1 {
            return Err(Error::InvalidArgument("alpha matrix is defined for single-party states".into()));
        }
        let (din, dout) = self.party_dims(0);
        let m = ComplexMatrix::from_vec(self.legs[0].dim, self.legs[1].dim, self.coeffs.clone())?;
        Ok(if self.legs[0].role == LegRole::Out { m } else { ComplexMatrix::from_fn(dout, din, |i, j| m.get(j, i)) })
    }
}

/// `Ψ • (E_1, E_2, …) = Σ α′ Π_p ⟨out_p|E_p|in_p⟩`, one Kraus operator per
/// party.
pub fn bullet(state: &PureTwoTimeState, kraus: &[&ComplexMatrix]) -> Result<C64> {
    if kraus.len() != state.n_parties() {
        return Err(Error::InvalidArgument(format!("{} operators for {} parties", kraus.len(), state.n_parties())));
    }
    for (p, k) in kraus.iter().enumerate() {
        let (din, dout) = state.party_dims(p);
        if k.rows() != dout || k.cols() != din {
            return dim_err(format!("party {p} expects a {dout}x{din} operator, got {}x{}", k.rows(), k.cols()));
        }
    }
    let dims: Vec<usize> = state.legs.iter().map(|l| l.dim).collect();
    let mut digits = vec![0usize; dims.len()];
    let mut total = ZERO;
    for &c in &state.coeffs {
        if c != ZERO {
            let mut term = c;
            for (p, k) in kraus.iter().enumerate() {
                let (a, b) = (digits[2 * p], digits[2 * p + 1]);
                let (out, inp) = if state.legs[2 * p].role == LegRole::Out { (a, b) } else { (b, a) };
                term *= k.get(out, inp);
            }
            total += term;
        }
        for q in (0..dims.len()).rev() {
            digits[q] += 1;
            if digits[q] < dims[q] {
                break;
            }
            digits[q] = 0;
        }
    }
    Ok(total)
}

/// The density vector `J = Σ_μ E_μ ⊗ E_μ†` of one instrument outcome, kept as
/// its Kraus list.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausDensityVector {
    kraus: Vec<ComplexMatrix>,
}

impl KrausDensityVector {
    pub fn new(outcome: &Channel) -> Self {
        KrausDensityVector { kraus: outcome.kraus().to_vec() }
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `(Ψ ⊗ Ψ†) • J = Σ_μ |Ψ • E_μ|²` for a single-party state.
    pub fn contract(&self, state: &PureTwoTimeState) -> Result<f64> {
        outcome_weight(state, &[self])
    }
}

/// `(Ψ ⊗ Ψ†) • (J_1 ⊗ J_2 ⊗ …)`: the unnormalized weight of one outcome per
/// party, summed over every Kraus tuple.
pub fn outcome_weight(state: &PureTwoTimeState, parts: &[&KrausDensityVector]) -> Result<f64> {
    if parts.len() != state.n_parties() {
        return Err(Error::InvalidArgument(format!("{} outcomes for {} parties", parts.len(), state.n_parties())));
    }
    let mut idx = vec![0usize; parts.len()];
    let mut total = 0.0;
    loop {
        let ops: Vec<&ComplexMatrix> = parts.iter().zip(&idx).map(|(j, &k)| &j.kraus[k]).collect();
        total += bullet(state, &ops)?.norm_sqr();
        let mut q = parts.len();
        loop {
            if q == 0 {
                return Ok(total);
            }
            q -= 1;
            idx[q] += 1;
            if idx[q] < parts[q].kraus.len() {
                break;
            }
            idx[q] = 0;
        }
    }
}

/// Unnormalized weights over all outcome tuples, row-major (the last
/// party's outcome varies fastest).
pub fn outcome_weights(state: &PureTwoTimeState, insts: &[&Instrument]) -> Result<Vec<f64>> {
    let vectors: Vec<Vec<KrausDensityVector>> =
        insts.iter().map(|inst| inst.outcomes().iter().map(KrausDensityVector::new).collect()).collect();
    let sizes: Vec<usize> = insts.iter().map(|i| i.len()).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut parts = vec![&vectors[0][0]; insts.len()];
            for p in (0..insts.len()).rev() {
                parts[p] = &vectors[p][rem % sizes[p]];
                rem /= sizes[p];
            }
            outcome_weight(state, &parts)
        })
        .collect()
}

fn conditioned(weights: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if total <= POST_SELECTION_TOL {
        return Err(Error::ImpossiblePostSelection(total));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

fn pick(table: Vec<f64>, a: usize) -> Result<f64> {
    let n = table.len();
    table.get(a).copied().ok_or_else(|| Error::InvalidArgument(format!("outcome {a} out of range for {n} outcomes")))
}

/// ABL probabilities `|⟨φ|E_a|ψ⟩|² / Σ_a′ |⟨φ|E_a′|ψ⟩|²` for every outcome,
/// with coarse-grained outcomes summed over their Kraus operators.
pub fn abl_table(pre: &[C64], post: &[C64], inst: &Instrument) -> Result<Vec<f64>> {
    if pre.len() != inst.dim_in() || post.len() != inst.dim_out() {
        return dim_err("pre/post-selected states do not match the instrument");
    }
    pure_table(&PureTwoTimeState::product(post, pre), inst)
}

pub fn abl_prob(pre: &[C64], post: &[C64], inst: &Instrument, a: usize) -> Result<f64> {
    pick(abl_table(pre, post, inst)?, a)
}

/// `|Ψ • E_a|² / Σ_a′ |Ψ • E_a′|²` for every outcome.
pub fn pure_table(state: &PureTwoTimeState, inst: &Instrument) -> Result<Vec<f64>> {
    conditioned(outcome_weights(state, &[inst])?)
}

pub fn pure_prob(state: &PureTwoTimeState, inst: &Instrument, a: usize) -> Result<f64> {
    pick(pure_table(state, inst)?, a)
}

/// A weighted mixture of pure two-time states over common legs.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoTimeEnsemble {
    members: Vec<(f64, PureTwoTimeState)>,
}

impl TwoTimeEnsemble {
    pub fn new(members: Vec<(f64, PureTwoTimeState)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
        };
        if members.iter().any(|(_, s)| s.legs != first.legs) {
            return dim_err("ensemble members have different legs");
        }
        if let Some((p, _)) = members.iter().find(|(p, _)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(format!("weight {p} outside [0, 1]")));
        }
        let sum: f64 = members.iter().map(|(p, _)| p).sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {sum}")));
        }
        Ok(TwoTimeEnsemble { members })
    }

    pub fn pure(state: PureTwoTimeState) -> Self {
        TwoTimeEnsemble { members: vec![(1.0, state)] }
    }

    pub fn members(&self) -> &[(f64, PureTwoTimeState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn legs(&self) -> &[Leg] {
        &self.members[0].1.legs
    }

    /// `Σ_r p_r α′_r α′_r†` as a matrix over the flattened coefficient index.
    pub fn recompose(&self) -> ComplexMatrix {
        let n = self.members[0].1.coeffs.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (p, s) in &self.members {
            out = &out + &ComplexMatrix::outer(&s.coeffs, &s.coeffs).scale_real(*p);
        }
        out
    }
}

/// `Σ_r p_r (Ψ_r ⊗ Ψ_r†) • J` over all outcome tuples.
pub fn ensemble_weights(ens: &TwoTimeEnsemble, insts: &[&Instrument]) -> Result<Vec<f64>> {
    let mut total: Option<Vec<f64>> = None;
    for (p, s) in &ens.members {
        let w = outcome_weights(s, insts)?;
        total = Some(match total {
            None => w.iter().map(|x| p * x).collect(),
            Some(t) => t.iter().zip(&w).map(|(a, b)| a + p * b).collect(),
        });
    }
    Ok(total.expect("non-empty ensemble"))
}

/// Conditional outcome probabilities for a single-party ensemble.
pub fn ensemble_table(ens: &TwoTimeEnsemble, inst: &Instrument) -> Result<Vec<f64>> {
    conditioned(ensemble_weights(ens, &[inst])?)
}

pub fn ensemble_prob(ens: &TwoTimeEnsemble, inst: &Instrument, a: usize) -> Result<f64> {
    pick(ensemble_table(ens, inst)?, a)
}

/// Joint conditional table `P(a, b)` for a bipartite ensemble, indexed
/// `[a][b]`.
pub fn ensemble_table_bipartite(ens: &TwoTimeEnsemble, inst_a: &Instrument, inst_b: &Instrument) -> Result<Vec<Vec<f64>>> {
    let flat = conditioned(ensemble_weights(ens, &[inst_a, inst_b])?)?;
    Ok(flat.chunks(inst_b.len()).map(<[f64]>::to_vec).collect())
}

fn nest(data: &[C64], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => Value::from(vec![data[0].re, data[0].im]),
        Some((&d, rest)) => {
            let stride = data.len() / d;
            Value::Array((0..d).map(|k| nest(&data[k * stride..(k + 1) * stride], rest)).collect())
        }
    }
}

fn unnest(v: &Value, dims: &[usize], out: &mut Vec<C64>) -> Result<()> {
    let arr = v.as_array().ok_or_else(|| Error::Schema("coefficients must be nested arrays".into()))?;
    match dims.split_first() {
        None => match arr.as_slice() {
            [re, im] => {
                let f = |x: &Value| x.as_f64().ok_or_else(|| Error::Schema("complex parts must be numbers".into()));
                out.push(C64::new(f(re)?, f(im)?));
                Ok(())
            }
            _ => Err(Error::Schema("complex numbers are [re, im] pairs".into())),
        },
        Some((&d, rest)) => {
            if arr.len() != d {
                return Err(Error::Schema(format!("expected {d} entries, found {}", arr.len())));
            }
            arr.iter().try_for_each(|x| unnest(x, rest, out))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    legs: Vec<Leg>,
    coeffs: Value,
}

impl Serialize for PureTwoTimeState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let dims: Vec<usize> = self.legs.iter().map(|l| l.dim).collect();
        StateRepr { legs: self.legs.clone(), coeffs: nest(&self.coeffs, &dims) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureTwoTimeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = StateRepr::deserialize(d)?;
        let dims: Vec<usize> = r.legs.iter().map(|l| l.dim).collect();
        let mut coeffs = Vec::new();
        unnest(&r.coeffs, &dims, &mut coeffs).map_err(serde::de::Error::custom)?;
        PureTwoTimeState::new(r.legs, coeffs).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MemberRepr {
    weight: f64,
    state: PureTwoTimeState,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    members: Vec<MemberRepr>,
}

impl Serialize for TwoTimeEnsemble {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let members = self.members.iter().map(|(w, st)| MemberRepr { weight: *w, state: st.clone() }).collect();
        EnsembleRepr { members }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoTimeEnsemble {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EnsembleRepr::deserialize(d)?;
        TwoTimeEnsemble::new(r.members.into_iter().map(|m| (m.weight, m.state)).collect()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_instrument;
    use crate::linalg::ONE;
    use crate::random::{ginibre, random_state, rng};

    fn ket(d: usize, i: usize) -> Vec<C64> {
        ComplexMatrix::basis_vector(d, i)
    }

    fn plus_minus() -> [Vec<C64>; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        [vec![C64::new(h, 0.0), C64::new(h, 0.0)], vec![C64::new(h, 0.0), C64::new(-h, 0.0)]]
    }

    #[test]
    fn bullet_of_product_is_matrix_element() {
        let mut r = rng(1);
        let (phi, psi) = (random_state(3, &mut r), random_state(3, &mut r));
        let e = ginibre(3, 3, &mut r);
        let got = bullet(&PureTwoTimeState::product(&phi, &psi), &[&e]).unwrap();
        let want: C64 = phi.iter().zip(e.mul_vec(&psi)).map(|(a, b)| a.conj() * b).sum();
        assert!((got - want).norm() < 1e-14);
        let s = PureTwoTimeState::product(&ket(2, 0), &ket(2, 0));
        assert_eq!(bullet(&s, &[&ComplexMatrix::identity(2)]).unwrap(), ONE);
    }

    #[test]
    fn bullet_squared_is_density_vector_contraction() {
        for seed in 0..20 {
            let mut r = rng(seed);
            let alpha = ginibre(3, 2, &mut r);
            let e = ginibre(3, 2, &mut r);
            let s = PureTwoTimeState::single(&alpha);
            // (Ψ ⊗ Ψ†) • (E ⊗ E†) = Σ α′_ij α′*_mn E_ij E*_mn
            let mut full = ZERO;
            for i in 0..3 {
                for j in 0..2 {
                    for m in 0..3 {
                        for n in 0..2 {
                            full += alpha.get(i, j) * alpha.get(m, n).conj() * e.get(i, j) * e.get(m, n).conj();
                        }
                    }
                }
            }
            assert!(full.im.abs() < 1e-12);
            assert!((bullet(&s, &[&e]).unwrap().norm_sqr() - full.re).abs() < 1e-12);
        }
    }

    #[test]
    fn bipartite_index_roles() {
        // α′_{ijkl} = δ at (i,j,k,l) = (1,0,0,1): picks ⟨0|E_a|1⟩ ⟨1|E_b|0⟩
        let mut coeffs = vec![ZERO; 16];
        coeffs[8 + 1] = ONE;
        let s = PureTwoTimeState::bipartite([2, 2, 2, 2], coeffs).unwrap();
        let (ea, eb) = (ComplexMatrix::unit(2, 0, 1), ComplexMatrix::unit(2, 1, 0));
        assert_eq!(bullet(&s, &[&ea, &eb]).unwrap(), ONE);
        assert_eq!(bullet(&s, &[&eb, &ea]).unwrap(), ZERO);
        assert!(matches!(bullet(&s, &[&ea]), Err(Error::InvalidArgument(_))));
        assert!(matches!(bullet(&s, &[&ea, &ComplexMatrix::identity(3)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn abl_examples() {
        let inst = Instrument::computational(2);
        assert_eq!(abl_table(&ket(2, 0), &ket(2, 0), &inst).unwrap(), vec![1.0, 0.0]);
        let pm = plus_minus();
        let inst = Instrument::projective(&pm).unwrap();
        assert!((abl_prob(&ket(2, 0), &pm[0], &inst, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(abl_prob(&ket(2, 0), &pm[0], &inst, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn abl_impossible_post_selection() {
        let inst = Instrument::from_channel(Channel::identity(2)).unwrap();
        assert!(matches!(abl_table(&ket(2, 0), &ket(2, 1), &inst), Err(Error::ImpossiblePostSelection(_))));
    }

    #[test]
    fn abl_coarse_grained_outcomes() {
        for seed in 0..10 {
            let inst = random_instrument(3, 2, seed).unwrap();
            let mut r = rng(seed + 100);
            let (psi, phi) = (random_state(3, &mut r), random_state(3, &mut r));
            let w: Vec<f64> = inst
                .outcomes()
                .iter()
                .map(|o| {
                    o.kraus()
                        .iter()
                        .map(|k| phi.iter().zip(k.mul_vec(&psi)).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr())
                        .sum()
                })
                .collect();
            let total: f64 = w.iter().sum();
            let table = abl_table(&psi, &phi, &inst).unwrap();
            for (p, x) in table.iter().zip(&w) {
                assert!((p - x / total).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pure_rule_reduces_and_rescales() {
        let inst = random_instrument(2, 3, 5).unwrap();
        let mut r = rng(5);
        let (psi, phi) = (random_state(2, &mut r), random_state(2, &mut r));
        let s = PureTwoTimeState::product(&phi, &psi);
        assert_eq!(pure_table(&s, &inst).unwrap(), abl_table(&psi, &phi, &inst).unwrap());
        let alpha = ginibre(2, 2, &mut r);
        let s = PureTwoTimeState::single(&alpha);
        let a = pure_table(&s, &inst).unwrap();
        let b = pure_table(&s.scaled(C64::new(-3.0, 0.7)), &inst).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_rules() {
        let inst = random_instrument(2, 2, 8).unwrap();
        let mut r = rng(8);
        let s1 = PureTwoTimeState::single(&ginibre(2, 2, &mut r));
        let s2 = PureTwoTimeState::single(&ginibre(2, 2, &mut r));
        assert_eq!(ensemble_table(&TwoTimeEnsemble::pure(s1.clone()), &inst).unwrap(), pure_table(&s1, &inst).unwrap());
        let ens = TwoTimeEnsemble::new(vec![(0.3, s1.clone()), (0.7, s2.clone())]).unwrap();
        let t = ensemble_table(&ens, &inst).unwrap();
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // rescaling a member with compensating weight leaves statistics fixed
        let c = C64::new(0.5, 0.5);
        let w1 = 0.3 / c.norm_sqr();
        let total = w1 + 0.7;
        let ens2 = TwoTimeEnsemble::new(vec![(w1 / total, s1.scaled(c)), (0.7 / total, s2)]).unwrap();
        for (x, y) in t.iter().zip(ensemble_table(&ens2, &inst).unwrap()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_validation() {
        let s = PureTwoTimeState::product(&ket(2, 0), &ket(2, 0));
        assert!(TwoTimeEnsemble::new(vec![]).is_err());
        assert!(TwoTimeEnsemble::new(vec![(0.5, s.clone())]).is_err());
        assert!(TwoTimeEnsemble::new(vec![(1.5, s.clone()), (-0.5, s.clone())]).is_err());
        let other = PureTwoTimeState::product(&ket(3, 0), &ket(2, 0));
        assert!(matches!(TwoTimeEnsemble::new(vec![(0.5, s), (0.5, other)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn alpha_round_trip() {
        let alpha = ginibre(3, 2, &mut rng(2));
        assert_eq!(PureTwoTimeState::single(&alpha).alpha().unwrap(), alpha);
        let legs = vec![Leg { role: LegRole::In, dim: 2 }, Leg { role: LegRole::Out, dim: 3 }];
        let swapped = PureTwoTimeState::new(legs, alpha.transpose().into_data()).unwrap();
        assert_eq!(swapped.alpha().unwrap(), alpha);
        let e = ginibre(3, 2, &mut rng(3));
        let s = PureTwoTimeState::single(&alpha);
        assert!((bullet(&s, &[&e]).unwrap() - bullet(&swapped, &[&e]).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let s = PureTwoTimeState::product(&ket(2, 1), &ket(2, 0));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"legs":[{"role":"out","dim":2},{"role":"in","dim":2}],"coeffs":[[[0.0,0.0],[0.0,0.0]],[[1.0,0.0],[0.0,0.0]]]}"#
        );
        assert_eq!(serde_json::from_str::<PureTwoTimeState>(&json).unwrap(), s);
        let ens = TwoTimeEnsemble::new(vec![(0.25, s.clone()), (0.75, s)]).unwrap();
        let back: TwoTimeEnsemble = serde_json::from_str(&serde_json::to_string(&ens).unwrap()).unwrap();
        assert_eq!(back, ens);
        assert!(serde_json::from_str::<PureTwoTimeState>(&json.replace("[[1.0,0.0],[0.0,0.0]]", "[[1.0,0.0]]")).is_err());
    }
}
