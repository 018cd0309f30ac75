//! Frozen calibration constants shipped in `data/calibration.json`.

use crate::lambda::LambdaConstants;
use crate::ufunc::EnvelopeConstants;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

const FROZEN: &str = include_str!("../data/calibration.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    /// Routine that produced the values.
    pub source: String,
    pub envelope: EnvelopeConstants,
    pub lambda: LambdaConstants,
}

/// The constants frozen in the data directory.
pub fn frozen() -> &'static Calibration {
    static CELL: OnceLock<Calibration> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(FROZEN).expect("data/calibration.json is valid"))
}
