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

//! Property tests across modules.

use proptest::prelude::*;
use stq::channels::{cj_matrix, random_instrument_with, Instrument};
use stq::linalg::{ComplexMatrix, C64};
use stq::mappings::{process_to_twotime, recompose};
use stq::pdm::build_from_channels;
use stq::process::{born_table, random_valid_process, ProcessDims, ProcessMatrix};
use stq::random::{ginibre, random_density, random_psd, rng};
use stq::twotime::{bullet, ensemble_table, outcome_weights, pure_table, KrausDensityVector, PureTwoTimeState, TwoTimeEnsemble};

fn instrument(seed: u64, d: usize) -> Instrument {
    let mut r = rng(seed);
    random_instrument_with(d, d, 2 + (seed % 2) as usize, 1 + (seed % 3) as usize, &mut r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn density_vector_contraction_is_real_and_nonnegative(seed in 0u64..10_000, d in 2usize..4) {
        let inst = instrument(seed, d);
        let state = PureTwoTimeState::single(&ginibre(d, d, &mut rng(seed ^ 0xabc)));
        for o in inst.outcomes() {
            let j = KrausDensityVector::new(o);
            let direct: f64 = o.kraus().iter().map(|k| bullet(&state, &[k]).unwrap().norm_sqr()).sum();
            let c = j.contract(&state).unwrap();
            prop_assert!(c >= -1e-12);
            prop_assert!((c - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn probabilities_lie_in_unit_interval_and_sum_to_one(seed in 0u64..10_000, d in 2usize..4) {
        let inst = instrument(seed, d);
        let mut r = rng(seed + 1);
        let state = PureTwoTimeState::single(&ginibre(d, d, &mut r));
        let t = pure_table(&state, &inst).unwrap();
        prop_assert!(t.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ensemble_rescaling_with_compensating_weight(seed in 0u64..10_000, scale in 0.1f64..5.0, phase in 0.0f64..6.3) {
        let inst = instrument(seed, 2);
        let mut r = rng(seed + 2);
        let (s1, s2) = (PureTwoTimeState::single(&ginibre(2, 2, &mut r)), PureTwoTimeState::single(&ginibre(2, 2, &mut r)));
        let a = TwoTimeEnsemble::new(vec![(0.5, s1.clone()), (0.5, s2.clone())]).unwrap();
        let c = C64::from_polar(scale, phase);
        let w1 = 0.5 / c.norm_sqr();
        let total = w1 + 0.5;
        let b = TwoTimeEnsemble::new(vec![(w1 / total, s1.scaled(c)), (0.5 / total, s2)]).unwrap();
        let (ta, tb) = (ensemble_table(&a, &inst).unwrap(), ensemble_table(&b, &inst).unwrap());
        for (x, y) in ta.iter().zip(&tb) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn pdm_is_linear_over_instrument_outcomes(seed in 0u64..10_000) {
        let inst = instrument(seed, 2);
        let rho = random_density(2, &mut rng(seed + 3));
        let full = build_from_channels(&rho, &[inst.summed()]).unwrap();
        let mut sum = ComplexMatrix::zeros(4, 4);
        for o in inst.outcomes() {
            sum = &sum + build_from_channels(&rho, std::slice::from_ref(o)).unwrap().matrix();
        }
        prop_assert!(sum.max_abs_diff(full.matrix()) <= 1e-12);
    }

    #[test]
    fn cj_output_trace_is_effect(seed in 0u64..10_000) {
        let inst = instrument(seed, 3);
        for o in inst.outcomes() {
            prop_assert!(cj_matrix(o).output_traced().max_abs_diff(&o.effect()) <= 1e-12);
        }
    }

    #[test]
    fn recomposition_is_identity_on_psd(seed in 0u64..10_000, rank in 1usize..17) {
        let w = ProcessMatrix::new(random_psd(16, rank, &mut rng(seed)), ProcessDims::qubits()).unwrap();
        prop_assert!(recompose(&process_to_twotime(&w).unwrap()).max_abs_diff(w.matrix()) <= 1e-10);
    }

    #[test]
    fn born_matches_two_time_weights(seed in 0u64..10_000) {
        let w = random_valid_process(ProcessDims::qubits(), &mut rng(seed)).unwrap();
        let (a, b) = (instrument(seed + 5, 2), instrument(seed + 6, 2));
        let born = born_table(&w, &a, &b).unwrap().concat();
        let ens = process_to_twotime(&w).unwrap();
        let mut weights = vec![0.0; born.len()];
        for (p, s) in ens.members() {
            for (acc, x) in weights.iter_mut().zip(outcome_weights(s, &[&a, &b]).unwrap()) {
                *acc += p * x;
            }
        }
        for (x, y) in born.iter().zip(&weights) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}
