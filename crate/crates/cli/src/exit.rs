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

//! Exit codes and the mapping from library errors.

use std::fmt;

use stq::Error;

pub const OK: u8 = 0;
pub const TOLERANCE: u8 = 1;
pub const INVARIANT: u8 = 2;
pub const SCHEMA: u8 = 3;
pub const DIMENSION: u8 = 4;
pub const INVALID_PROCESS: u8 = 5;

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Dimension(_) | Error::SizeGuard(_) => DIMENSION,
            Error::Unnormalized | Error::ImpossiblePostSelection(_) | Error::NotPsd(_) => INVARIANT,
            _ => SCHEMA,
        };
        Failure::new(code, e.to_string())
    }
}

/// Errors met while handling a process matrix make the input invalid.
pub fn as_process_failure(e: Error) -> Failure {
    match e {
        Error::NotPsd(_) | Error::NotHermitian(_) => Failure::new(INVALID_PROCESS, e.to_string()),
        other => other.into(),
    }
}

/// Deserialization errors lose their type; dimension failures are
/// recognized by their message.
pub fn from_json_error(path: &str, e: serde_json::Error) -> Failure {
    let msg = e.to_string();
    let code = if msg.starts_with("dimension mismatch") { DIMENSION } else { SCHEMA };
    Failure::new(code, format!("{path}: {msg}"))
}
