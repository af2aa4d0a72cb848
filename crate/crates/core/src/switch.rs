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

//! Two constant channels in a superposition of orders, and the negativity
//! of reduced PDMs over the control and system slots.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{Channel, ChannelFlag, COMPLETENESS_TOL};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64};
use crate::pdm::{build_from_channels, Pdm};

/// The reset channel `ρ ↦ I/2`.
pub fn constant_channel() -> Channel {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let k = |i, j| ComplexMatrix::unit(2, i, j).scale_real(h);
    Channel::new_cptp(vec![k(0, 0), k(1, 0), k(0, 1), k(1, 1)]).expect("complete Kraus set")
}

/// Control-conditioned order: `n1` then `n2` on control `|0⟩`, the reverse
/// on `|1⟩`. Kraus operators `S_ij = |0⟩⟨0| ⊗ K²ᵢK¹ⱼ + |1⟩⟨1| ⊗ K¹ⱼK²ᵢ`
/// act on control ⊗ system.
pub fn switch_channel(n1: &Channel, n2: &Channel) -> Result<Channel> {
    for ch in [n1, n2] {
        if ch.dim_in() != 2 || ch.dim_out() != 2 {
            return dim_err(format!("switch needs qubit channels, got {}->{}", ch.dim_in(), ch.dim_out()));
        }
    }
    let (p0, p1) = (ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1));
    let mut kraus = Vec::with_capacity(n1.kraus().len() * n2.kraus().len());
    for k2 in n2.kraus() {
        for k1 in n1.kraus() {
            kraus.push(&kron(&p0, &(k2 * k1)) + &kron(&p1, &(k1 * k2)));
        }
    }
    let ch = Channel::new(kraus)?;
    let cptp = (&ch.effect() - &ComplexMatrix::identity(4)).max_abs() <= COMPLETENESS_TOL;
    if cptp {
        ch.with_flag(ChannelFlag::Cptp)
    } else {
        Ok(ch)
    }
}

/// `√p |0⟩ + √(1 − p) |1⟩`.
pub fn amplitude_state(p: f64) -> Vec<C64> {
    vec![C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0)]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwitchConfig {
    /// System parameter.
    pub p_a: f64,
    /// Control parameter.
    pub p_c: f64,
}

impl SwitchConfig {
    pub fn new(p_a: f64, p_c: f64) -> Result<Self> {
        for (name, p) in [("p_a", p_a), ("p_c", p_c)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(SwitchConfig { p_a, p_c })
    }

    /// `σ_C ⊗ ρ_A`.
    pub fn initial_state(&self) -> ComplexMatrix {
        let (c, a) = (amplitude_state(self.p_c), amplitude_state(self.p_a));
        kron(&ComplexMatrix::outer(&c, &c), &ComplexMatrix::outer(&a, &a))
    }
}

/// Two-time PDM over `C1, A1, C2, A2` for the switch of `n1` and `n2`.
pub fn switch_pdm_with(cfg: &SwitchConfig, n1: &Channel, n2: &Channel) -> Result<Pdm> {
    let sw = switch_channel(n1, n2)?;
    build_from_channels(&cfg.initial_state(), &[sw])?.split_slots(&[vec![("C1", 2), ("A1", 2)], vec![("C2", 2), ("A2", 2)]])
}

/// [`switch_pdm_with`] for two constant channels.
pub fn switch_pdm(cfg: &SwitchConfig) -> Result<Pdm> {
    let c = constant_channel();
    switch_pdm_with(cfg, &c, &c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub p_a: f64,
    pub p_c: f64,
    pub f_a1c2a2: f64,
    pub f_c1a1a2: f64,
    pub f_a1c2: f64,
    pub f_a1a2: f64,
}

impl ScanRow {
    pub fn at(cfg: &SwitchConfig) -> Result<Self> {
        let r = switch_pdm(cfg)?;
        let f = |keep: &[&str]| r.marginal(keep)?.negativity();
        Ok(ScanRow {
            p_a: cfg.p_a,
            p_c: cfg.p_c,
            f_a1c2a2: f(&["A1", "C2", "A2"])?,
            f_c1a1a2: f(&["C1", "A1", "A2"])?,
            f_a1c2: f(&["A1", "C2"])?,
            f_a1a2: f(&["A1", "A2"])?,
        })
    }

    /// Largest of the negativities that vanish on the whole grid.
    pub fn max_expected_zero(&self) -> f64 {
        self.f_c1a1a2.max(self.f_a1c2).max(self.f_a1a2)
    }

    pub fn csv_line(&self) -> String {
        let fmt = |x: f64| {
            let s = format!("{x:.9}");
            if s == "-0.000000000" {
                "0.000000000".to_string()
            } else {
                s
            }
        };
        [self.p_a, self.p_c, self.f_a1c2a2, self.f_c1a1a2, self.f_a1c2, self.f_a1a2].map(fmt).join(",")
    }
}

pub const CSV_HEADER: &str = "p_a,p_c,f_a1c2a2,f_c1a1a2,f_a1c2,f_a1a2";

/// Grid value `k / (steps − 1)`.
pub fn grid_point(k: usize, steps: usize) -> f64 {
    k as f64 / (steps - 1) as f64
}

/// Negativities on a `steps × steps` grid over `[0, 1]²`, rows in `p_a`-major
/// order. With `parallel` the grid points are spread over the rayon pool;
/// the output is identical either way.
pub fn negativity_scan(steps: usize, parallel: bool) -> Result<Vec<ScanRow>> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("scan needs at least 2 steps, got {steps}")));
    }
    let point = |idx: usize| ScanRow::at(&SwitchConfig::new(grid_point(idx / steps, steps), grid_point(idx % steps, steps))?);
    if parallel {
        (0..steps * steps).into_par_iter().map(point).collect()
    } else {
        (0..steps * steps).map(point).collect()
    }
}

pub fn write_csv(rows: &[ScanRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

pub fn write_csv_file(rows: &[ScanRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(rows, &mut buf)?;
    buf.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_cptp, ValidationMode};
    use crate::linalg::partial_trace;
    use crate::random::{random_density, rng};

    fn half_identity() -> ComplexMatrix {
        ComplexMatrix::identity(2).scale_real(0.5)
    }

    #[test]
    fn constant_channel_resets() {
        let c = constant_channel();
        let plus = amplitude_state(0.5);
        assert!(c.apply(&ComplexMatrix::outer(&plus, &plus)).unwrap().max_abs_diff(&half_identity()) < 1e-15);
        assert!(c.apply(&half_identity()).unwrap().max_abs_diff(&half_identity()) < 1e-15);
        assert!(c.validate(ValidationMode::Cptp).passed);
    }

    #[test]
    fn switch_is_cptp_with_sixteen_kraus() {
        let c = constant_channel();
        let s = switch_channel(&c, &c).unwrap();
        assert_eq!(s.kraus().len(), 16);
        assert!(s.validate(ValidationMode::Cptp).passed);
        assert!(s.flags().contains(&ChannelFlag::Cptp));
        assert!(matches!(switch_channel(&Channel::identity(3), &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn definite_control_gives_fixed_order() {
        let n1 = random_cptp(2, 2, 2, 1).unwrap();
        let n2 = random_cptp(2, 2, 3, 2).unwrap();
        let s = switch_channel(&n1, &n2).unwrap();
        let rho = random_density(2, &mut rng(3));
        let space = crate::linalg::SlotSpace::new([("C", 2), ("A", 2)]).unwrap();
        for (ctrl, first, second) in [(0, &n1, &n2), (1, &n2, &n1)] {
            let out = s.apply(&kron(&ComplexMatrix::unit(2, ctrl, ctrl), &rho)).unwrap();
            let sys = partial_trace(&out, &space, &["A"]).unwrap();
            let want = second.apply(&first.apply(&rho).unwrap()).unwrap();
            assert!(sys.max_abs_diff(&want) < 1e-12);
        }
        let c = constant_channel();
        let sc = switch_channel(&c, &c).unwrap();
        let out = sc.apply(&kron(&ComplexMatrix::unit(2, 1, 1), &rho)).unwrap();
        assert!(partial_trace(&out, &space, &["A"]).unwrap().max_abs_diff(&half_identity()) < 1e-12);
    }

    #[test]
    fn switch_pdm_structure() {
        for (pa, pc) in [(0.0, 0.0), (0.3, 0.7), (0.5, 0.5), (1.0, 0.2)] {
            let cfg = SwitchConfig::new(pa, pc).unwrap();
            let r = switch_pdm(&cfg).unwrap();
            assert_eq!(r.space().labels(), vec!["C1", "A1", "C2", "A2"]);
            assert!(r.matrix().hermitian_residual() <= 1e-12);
            assert!((r.trace() - 1.0).abs() <= 1e-12);
            let first = r.marginal(&["C1", "A1"]).unwrap();
            assert!(first.matrix().max_abs_diff(&cfg.initial_state()) <= 1e-12);
        }
        assert!(SwitchConfig::new(1.2, 0.0).is_err());
    }

    #[test]
    fn definite_control_has_no_negativity() {
        for pa in [0.0, 0.25, 0.6, 1.0] {
            for pc in [0.0, 1.0] {
                let row = ScanRow::at(&SwitchConfig::new(pa, pc).unwrap()).unwrap();
                for f in [row.f_a1c2a2, row.f_c1a1a2, row.f_a1c2, row.f_a1a2] {
                    assert!(f.abs() <= 1e-9, "{row:?}");
                }
            }
        }
    }

    #[test]
    fn superposed_control_activates_negativity() {
        let row = ScanRow::at(&SwitchConfig::new(0.5, 0.5).unwrap()).unwrap();
        assert!(row.f_a1c2a2 > 1e-6);
        assert!(row.max_expected_zero() <= 1e-9);
        assert!(row.f_a1c2a2 > row.f_c1a1a2);
    }

    #[test]
    fn scan_shape_and_order() {
        let rows = negativity_scan(3, true).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!((rows[1].p_a, rows[1].p_c), (0.0, 0.5));
        assert_eq!((rows[3].p_a, rows[3].p_c), (0.5, 0.0));
        assert_eq!(rows, negativity_scan(3, false).unwrap());
        assert!(negativity_scan(1, false).is_err());
    }

    #[test]
    fn csv_format() {
        let rows = negativity_scan(2, false).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0.000000000,0.000000000,0.000000000,0.000000000,0.000000000,0.000000000");
        assert!(write_csv_file(&rows, Path::new("/nonexistent/dir/scan.csv")).is_err());
    }
}
