//! Whirl-ratio sweep and the intersection method.
//!
//! Bearing coefficients depend on the assumed whirl ratio `ν`. For each
//! labelled mode, `g(ν) = |Im λ(ν)| / Ω − ν` vanishes where the mode's own
//! frequency matches the assumed one; a mode is excited when `g` changes sign
//! on the grid, and its log decrement is read at the root.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{checked_state_matrix, eigenvalues, eigenvector, log_decrement, DynamicsError, RigidRotorModel};
use crate::bearing::{BearingError, DimensionalCoefficients};

/// Root tolerance on `g(ν)`.
pub const ROOT_TOLERANCE: f64 = 1e-6;
pub const MAX_BISECTIONS: usize = 40;
/// Log decrements smaller than this in magnitude are reported as exactly 0 (marginal).
pub const LOG_DEC_RESOLUTION: f64 = 1e-9;
/// Minimum separation of forward-whirl scores between the forward and backward pairs.
const DIRECTION_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeId {
    CylindricalForward,
    CylindricalBackward,
    ConicalForward,
    ConicalBackward,
}

impl ModeId {
    pub const ALL: [ModeId; 4] =
        [ModeId::CylindricalForward, ModeId::CylindricalBackward, ModeId::ConicalForward, ModeId::ConicalBackward];

    /// 1-based mode number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CylindricalForward => "cylindrical-forward",
            Self::CylindricalBackward => "cylindrical-backward",
            Self::ConicalForward => "conical-forward",
            Self::ConicalBackward => "conical-backward",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Outcome of the intersection method for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStabilityResult {
    pub mode: ModeId,
    pub excited: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whirl_speed_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_dec: Option<f64>,
}

impl ModeStabilityResult {
    pub fn not_excited(mode: ModeId) -> Self {
        Self { mode, excited: false, stable: None, whirl_speed_ratio: None, log_dec: None }
    }

    /// Excited mode at whirl ratio `nu` with decrement `log_dec`; marginal counts as unstable.
    pub fn excited(mode: ModeId, nu: f64, log_dec: f64) -> Self {
        Self { mode, excited: true, stable: Some(log_dec > 0.0), whirl_speed_ratio: Some(nu), log_dec: Some(log_dec) }
    }
}

/// Uniform whirl-ratio grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for NuGrid {
    fn default() -> Self {
        Self { start: 0.05, stop: 2.0, step: 0.01 }
    }
}

impl NuGrid {
    pub fn points(&self) -> Result<Vec<f64>, DynamicsError> {
        nu_grid(self.start, self.stop, self.step)
    }
}

/// Points `start + i·step` up to `stop` (inclusive, to rounding).
pub fn nu_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, DynamicsError> {
    if !(start > 0.0 && stop > start && step > 0.0 && stop.is_finite() && step.is_finite()) {
        return Err(DynamicsError::InvalidGrid(format!("need 0 < start < stop and step > 0, got {start}, {stop}, {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n < 2 {
        return Err(DynamicsError::InvalidGrid("grid needs at least two points".into()));
    }
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// A labelled whirl mode: eigenvalue (rad/s, `Im ≥ 0`) and bearing
/// displacement shape `(u_ax, u_ay, u_bx, u_by)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhirlMode {
    pub mode: ModeId,
    pub eigenvalue: Complex64,
    pub shape: [Complex64; 4],
}

/// The four rigid-body whirl modes, indexed in [`ModeId::ALL`] order.
///
/// Modes are the eigenvalues with positive imaginary part; when fewer than
/// four are oscillatory the least damped real eigenvalues fill in. Whirl
/// direction comes from the forward/backward content of the bearing orbits,
/// and within each direction the mode whose bearings move more in phase is
/// the cylindrical one.
pub fn whirl_modes(
    model: &RigidRotorModel,
    a: &DimensionalCoefficients,
    b: &DimensionalCoefficients,
) -> Result<[WhirlMode; 4], DynamicsError> {
    let (s, scale) = checked_state_matrix(model, a, b)?;
    let values = eigenvalues(&s)?;
    let tol = 1e-9 * values.iter().map(|v| v.norm()).fold(1e-3, f64::max);
    let mut oscillatory: Vec<Complex64> = values.iter().copied().filter(|v| v.im > tol).collect();
    oscillatory.sort_by(|x, y| y.im.total_cmp(&x.im));
    let mut real: Vec<Complex64> = values.iter().copied().filter(|v| v.im.abs() <= tol).collect();
    real.sort_by(|x, y| y.re.total_cmp(&x.re));
    let picked: Vec<Complex64> = oscillatory.into_iter().chain(real).take(4).collect();
    if picked.len() < 4 {
        return Err(DynamicsError::EigenFailure("fewer than four whirl modes".into()));
    }

    let mut candidates = Vec::with_capacity(4);
    for v in picked {
        let q = eigenvector(&s, v)?;
        let shape = model.bearing_displacements(&q);
        let value = if v.im > tol { v * scale } else { Complex64::new(v.re * scale, 0.0) };
        candidates.push((value, shape, forward_score(&shape), cylindrical_score(&shape), v.im > tol));
    }

    let mut by_direction: Vec<usize> = (0..4).collect();
    by_direction.sort_by(|&i, &j| candidates[j].2.total_cmp(&candidates[i].2).then(i.cmp(&j)));
    let (second, third) = (&candidates[by_direction[1]], &candidates[by_direction[2]]);
    if second.4 && third.4 && second.2 - third.2 < DIRECTION_MARGIN {
        return Err(DynamicsError::AmbiguousModes);
    }

    let mut out = [WhirlMode { mode: ModeId::CylindricalForward, eigenvalue: Complex64::default(), shape: [Complex64::default(); 4] }; 4];
    for (pair, (cyl, con)) in [
        (&by_direction[..2], (ModeId::CylindricalForward, ModeId::ConicalForward)),
        (&by_direction[2..], (ModeId::CylindricalBackward, ModeId::ConicalBackward)),
    ] {
        let (p, q) = (pair[0], pair[1]);
        let (c, k) = if candidates[q].3 > candidates[p].3 { (q, p) } else { (p, q) };
        out[cyl.index()] = WhirlMode { mode: cyl, eigenvalue: candidates[c].0, shape: candidates[c].1 };
        out[con.index()] = WhirlMode { mode: con, eigenvalue: candidates[k].0, shape: candidates[k].1 };
    }
    Ok(out)
}

/// Forward minus backward orbit content of both bearings, in [−1, 1].
fn forward_score(u: &[Complex64; 4]) -> f64 {
    let i = Complex64::i();
    let (mut fwd, mut bwd) = (0.0, 0.0);
    for (x, y) in [(u[0], u[1]), (u[2], u[3])] {
        fwd += (x + i * y).norm_sqr();
        bwd += (x - i * y).norm_sqr();
    }
    if fwd + bwd == 0.0 {
        0.0
    } else {
        (fwd - bwd) / (fwd + bwd)
    }
}

/// In-phase content of the two bearing orbits, in [−1, 1].
fn cylindrical_score(u: &[Complex64; 4]) -> f64 {
    let dot = (u[0].conj() * u[2] + u[1].conj() * u[3]).re;
    let norm = u.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if norm == 0.0 {
        0.0
    } else {
        2.0 * dot / norm
    }
}

/// Run the intersection method over `nu_grid` for bearing coefficients
/// supplied per whirl ratio as `[bearing_a, bearing_b]`.
pub fn intersection_sweep<F>(
    model: &RigidRotorModel,
    mut coefficients: F,
    nu_grid: &[f64],
) -> Result<[ModeStabilityResult; 4], DynamicsError>
where
    F: FnMut(f64) -> Result<[DimensionalCoefficients; 2], BearingError>,
{
    if model.omega == 0.0 {
        return Err(DynamicsError::ZeroSpeed);
    }
    if !(model.omega > 0.0) {
        return Err(DynamicsError::InvalidModel(format!("spin speed must be positive, got {}", model.omega)));
    }
    if nu_grid.len() < 2 || nu_grid[0] <= 0.0 || nu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DynamicsError::InvalidGrid("whirl ratios must be positive and strictly increasing".into()));
    }

    let omega = model.omega;
    let mut evaluate = |nu: f64, low: f64, high: f64| -> Result<[WhirlMode; 4], DynamicsError> {
        let [a, b] = coefficients(nu)?;
        whirl_modes(model, &a, &b).map_err(|e| match e {
            DynamicsError::AmbiguousModes => DynamicsError::TrackingAmbiguity { nu_low: low, nu_high: high },
            other => other,
        })
    };
    let gap = |m: &WhirlMode, nu: f64| m.eigenvalue.im.abs() / omega - nu;

    let n = nu_grid.len();
    let mut samples = Vec::with_capacity(n);
    for (i, &nu) in nu_grid.iter().enumerate() {
        samples.push(evaluate(nu, nu_grid[i.saturating_sub(1)], nu_grid[(i + 1).min(n - 1)])?);
    }

    let mut results = ModeId::ALL.map(ModeStabilityResult::not_excited);
    for mode in ModeId::ALL {
        let k = mode.index();
        let g: Vec<f64> = samples.iter().zip(nu_grid).map(|(s, &nu)| gap(&s[k], nu)).collect();
        let Some(i) = (0..n).find(|&i| g[i] == 0.0 || (i + 1 < n && (g[i] < 0.0) != (g[i + 1] < 0.0) && g[i + 1] != 0.0))
        else {
            continue;
        };
        let (nu_star, lambda) = if g[i] == 0.0 {
            (nu_grid[i], samples[i][k].eigenvalue)
        } else {
            let (mut lo, mut hi, mut g_lo) = (nu_grid[i], nu_grid[i + 1], g[i]);
            let mut last = (hi, samples[i + 1][k].eigenvalue);
            for _ in 0..MAX_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                let m = evaluate(mid, lo, hi)?[k];
                let g_mid = gap(&m, mid);
                last = (mid, m.eigenvalue);
                if g_mid.abs() < ROOT_TOLERANCE {
                    break;
                }
                if (g_mid < 0.0) == (g_lo < 0.0) {
                    lo = mid;
                    g_lo = g_mid;
                } else {
                    hi = mid;
                }
            }
            last
        };
        let delta = log_decrement(lambda).unwrap_or(0.0);
        let delta = if delta.abs() < LOG_DEC_RESOLUTION { 0.0 } else { delta };
        results[k] = ModeStabilityResult::excited(mode, nu_star, delta);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_numbers() {
        for (i, m) in ModeId::ALL.iter().enumerate() {
            assert_eq!(m.number() as usize, i + 1);
            assert_eq!(ModeId::from_number(m.number()), Some(*m));
        }
        assert_eq!(ModeId::from_number(0), None);
        assert_eq!(ModeId::from_number(5), None);
        assert_eq!(serde_json::to_string(&ModeId::ConicalBackward).unwrap(), "\"conical-backward\"");
    }

    #[test]
    fn default_grid() {
        let g = NuGrid::default().points().unwrap();
        assert_eq!(g.len(), 196);
        assert_eq!(g[0], 0.05);
        assert!((g[195] - 2.0).abs() < 1e-12);
        assert!(nu_grid(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn scores() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let forward_cyl = [one, -i, one, -i];
        assert!((forward_score(&forward_cyl) - 1.0).abs() < 1e-15);
        assert!((cylindrical_score(&forward_cyl) - 1.0).abs() < 1e-15);
        let backward_con = [one, i, -one, -i];
        assert!((forward_score(&backward_con) + 1.0).abs() < 1e-15);
        assert!((cylindrical_score(&backward_con) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_speed_rejected() {
        let model = RigidRotorModel::new(0.25, 1e-4, 1e-5, -0.02, 0.02, 0.0).unwrap();
        let err = intersection_sweep(&model, |_| Ok([DimensionalCoefficients::ZERO; 2]), &[0.1, 0.2]).unwrap_err();
        assert_eq!(err, DynamicsError::ZeroSpeed);
    }
}
