//! Estimation result and its JSON exchange format.
//!
//! The JSON document carries angles in degrees and gains as re/im pairs so it
//! can be replayed into the robust beamformer.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Estimated DoAs/CSI with uncertainty radii.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    /// Sorted ascending, radians.
    pub doa_alice: Vec<f64>,
    pub doa_jam: Vec<f64>,
    pub gains_alice: DVector<Complex64>,
    pub gains_jam: DVector<Complex64>,
    /// Angle-error radii (radians) bounding the DoA error vector norms.
    pub rho_theta_alice: f64,
    pub rho_theta_jam: f64,
    /// CSI-error radii bounding the gain error vector norms.
    pub rho_g_alice: f64,
    pub rho_g_jam: f64,
    /// Expected path-gain magnitude scales.
    pub sigma_alice: f64,
    pub sigma_jam: f64,
}

impl EstimationResult {
    pub fn validate(&self) -> Result<(), String> {
        if self.doa_alice.len() != self.gains_alice.len()
            || self.doa_jam.len() != self.gains_jam.len()
        {
            return Err("angle/gain lengths differ".into());
        }
        if self.rho_theta_alice < 0.0
            || self.rho_theta_jam < 0.0
            || self.rho_g_alice < 0.0
            || self.rho_g_jam < 0.0
        {
            return Err("radii must be nonnegative".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(JsonForm::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let form: JsonForm = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        let out = Self::from(&form);
        out.validate()?;
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonForm {
    doa_alice_deg: Vec<f64>,
    doa_jam_deg: Vec<f64>,
    gains_alice: Vec<[f64; 2]>,
    gains_jam: Vec<[f64; 2]>,
    rho_theta_alice: f64,
    rho_theta_jam: f64,
    rho_g_alice: f64,
    rho_g_jam: f64,
    sigma_alice: f64,
    sigma_jam: f64,
}

impl From<&EstimationResult> for JsonForm {
    fn from(r: &EstimationResult) -> Self {
        Self {
            doa_alice_deg: r.doa_alice.iter().map(|t| t.to_degrees()).collect(),
            doa_jam_deg: r.doa_jam.iter().map(|t| t.to_degrees()).collect(),
            gains_alice: r.gains_alice.iter().map(|g| [g.re, g.im]).collect(),
            gains_jam: r.gains_jam.iter().map(|g| [g.re, g.im]).collect(),
            rho_theta_alice: r.rho_theta_alice,
            rho_theta_jam: r.rho_theta_jam,
            rho_g_alice: r.rho_g_alice,
            rho_g_jam: r.rho_g_jam,
            sigma_alice: r.sigma_alice,
            sigma_jam: r.sigma_jam,
        }
    }
}

impl From<&JsonForm> for EstimationResult {
    fn from(f: &JsonForm) -> Self {
        Self {
            doa_alice: f.doa_alice_deg.iter().map(|d| d.to_radians()).collect(),
            doa_jam: f.doa_jam_deg.iter().map(|d| d.to_radians()).collect(),
            gains_alice: DVector::from_iterator(
                f.gains_alice.len(),
                f.gains_alice.iter().map(|g| Complex64::new(g[0], g[1])),
            ),
            gains_jam: DVector::from_iterator(
                f.gains_jam.len(),
                f.gains_jam.iter().map(|g| Complex64::new(g[0], g[1])),
            ),
            rho_theta_alice: f.rho_theta_alice,
            rho_theta_jam: f.rho_theta_jam,
            rho_g_alice: f.rho_g_alice,
            rho_g_jam: f.rho_g_jam,
            sigma_alice: f.sigma_alice,
            sigma_jam: f.sigma_jam,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let r = EstimationResult {
            doa_alice: vec![-0.2, 0.4],
            doa_jam: vec![0.9],
            gains_alice: DVector::from_vec(vec![
                Complex64::new(1.0, -0.5),
                Complex64::new(0.3, 0.8),
            ]),
            gains_jam: DVector::from_vec(vec![Complex64::new(-1.0, 0.1)]),
            rho_theta_alice: 0.1,
            rho_theta_jam: 0.08,
            rho_g_alice: 0.1,
            rho_g_jam: 0.12,
            sigma_alice: 1.0,
            sigma_jam: 1.0,
        };
        let j = r.to_json();
        assert!((j["doa_alice_deg"][1].as_f64().unwrap() - 0.4f64.to_degrees()).abs() < 1e-12);
        let back = EstimationResult::from_json(&j).unwrap();
        assert!((back.doa_alice[0] - r.doa_alice[0]).abs() < 1e-12);
        assert!((back.gains_jam[0] - r.gains_jam[0]).norm() < 1e-12);
    }
}
