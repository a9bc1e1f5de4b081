//! Plot-ready contour document of a feasibility map.
//!
//! JSON object, version 1:
//!
//! - `format_version`: 1
//! - `metadata`: `{design_digest, evaluator, created_unix, speeds_rpm}`
//! - `delta_h_r_um`, `delta_h_g_um`: axes in µm
//! - `worst_log_dec`, `min_load_capacity_n`, `max_power_loss_w`, `feasible`:
//!   matrices indexed `[i][j]` with `i` along `delta_h_r_um` and `j` along
//!   `delta_h_g_um`; `null` marks an invalid cell (and, for `worst_log_dec`,
//!   a cell with no excited mode)
//! - `failures`: `{i, j, speed_rpm, error}` per invalid cell

use serde::{Deserialize, Serialize};

use super::{Cell, EvaluatorKind, FeasibilityMap};

pub const CONTOUR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourMetadata {
    pub design_digest: String,
    pub evaluator: EvaluatorKind,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub speeds_rpm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub i: usize,
    pub j: usize,
    pub speed_rpm: f64,
    pub error: String,
}

type Matrix<T> = Vec<Vec<Option<T>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourDocument {
    pub format_version: u32,
    pub metadata: ContourMetadata,
    pub delta_h_r_um: Vec<f64>,
    pub delta_h_g_um: Vec<f64>,
    pub worst_log_dec: Matrix<f64>,
    pub min_load_capacity_n: Matrix<f64>,
    pub max_power_loss_w: Matrix<f64>,
    pub feasible: Matrix<bool>,
    pub failures: Vec<CellFailure>,
}

fn matrix<T>(map: &FeasibilityMap, f: impl Fn(&Cell) -> Option<T>) -> Matrix<T> {
    let n = map.grid_n();
    (0..n).map(|i| (0..n).map(|j| f(map.cell(i, j))).collect()).collect()
}

pub fn export_contours(map: &FeasibilityMap, created_unix: u64) -> ContourDocument {
    let n = map.grid_n();
    let failures = map
        .cells
        .iter()
        .enumerate()
        .filter_map(|(k, c)| match c {
            Cell::Invalid { speed_rpm, error } => {
                Some(CellFailure { i: k / n, j: k % n, speed_rpm: *speed_rpm, error: error.clone() })
            }
            Cell::Valid(_) => None,
        })
        .collect();
    ContourDocument {
        format_version: CONTOUR_FORMAT_VERSION,
        metadata: ContourMetadata {
            design_digest: map.design_digest.clone(),
            evaluator: map.evaluator,
            created_unix,
            speeds_rpm: map.speeds.clone(),
        },
        delta_h_r_um: map.delta_h_r.iter().map(|v| v * 1e6).collect(),
        delta_h_g_um: map.delta_h_g.iter().map(|v| v * 1e6).collect(),
        worst_log_dec: matrix(map, |c| c.summary().and_then(|s| s.worst_log_dec)),
        min_load_capacity_n: matrix(map, |c| c.summary().map(|s| s.min_load_capacity_n)),
        max_power_loss_w: matrix(map, |c| c.summary().map(|s| s.max_power_loss_w)),
        feasible: matrix(map, |c| c.summary().map(|s| s.feasible)),
        failures,
    }
}
