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

//! Pseudo-density matrices, two-time states and process matrices, with the
//! statistics-preserving mappings between them.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod mappings;
pub mod pdm;
pub mod process;
pub mod random;
pub mod switch;
pub mod twotime;

pub use channels::{cj_matrix, process_cj, Channel, CjConvention, CjMatrix, Instrument};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SlotSpace, C64};
pub use mappings::PdmRealization;
pub use pdm::{PauliString, Pdm};
pub use process::{ProcessDims, ProcessMatrix};
pub use twotime::{PureTwoTimeState, TwoTimeEnsemble};
