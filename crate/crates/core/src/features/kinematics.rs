use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shaft speed of the reference test rig (3010 rpm).
pub const DEFAULT_SHAFT_HZ: f64 = 3010.0 / 60.0;

/// Rolling-element bearing geometry.
///
/// The default is a 6205-class deep-groove bearing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BearingGeometry {
    pub n_balls: u32,
    pub ball_diameter_mm: f64,
    pub pitch_diameter_mm: f64,
    #[serde(default)]
    pub contact_angle_rad: f64,
}

impl Default for BearingGeometry {
    fn default() -> Self {
        Self {
            n_balls: 9,
            ball_diameter_mm: 7.94,
            pitch_diameter_mm: 39.04,
            contact_angle_rad: 0.0,
        }
    }
}

impl BearingGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_balls == 0 {
            return Err(Error::BadGeometry("need at least one rolling element".into()));
        }
        let d = self.ball_diameter_mm;
        let p = self.pitch_diameter_mm;
        if !(d.is_finite() && d > 0.0 && p.is_finite() && p > 0.0) {
            return Err(Error::BadGeometry(format!(
                "diameters must be positive, got ball {d} and pitch {p}"
            )));
        }
        if d >= p {
            return Err(Error::BadGeometry(format!(
                "ball diameter {d} must be below pitch diameter {p}"
            )));
        }
        let phi = self.contact_angle_rad;
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&phi) {
            return Err(Error::BadGeometry(format!("contact angle {phi} rad out of [0, pi/2)")));
        }
        Ok(())
    }
}

/// Defect repetition rates for a given geometry and shaft speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultFrequencies {
    pub bpfo_hz: f64,
    pub bpfi_hz: f64,
    pub shaft_hz: f64,
}

/// Outer- and inner-race ball pass frequencies.
pub fn fault_frequencies(g: &BearingGeometry, shaft_hz: f64) -> Result<FaultFrequencies> {
    g.validate()?;
    if !(shaft_hz.is_finite() && shaft_hz > 0.0) {
        return Err(Error::BadGeometry(format!("shaft speed {shaft_hz} Hz")));
    }
    let ratio = g.ball_diameter_mm / g.pitch_diameter_mm * g.contact_angle_rad.cos();
    let base = g.n_balls as f64 / 2.0 * shaft_hz;
    Ok(FaultFrequencies {
        bpfo_hz: base * (1.0 - ratio),
        bpfi_hz: base * (1.0 + ratio),
        shaft_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rig() {
        let ff = fault_frequencies(&BearingGeometry::default(), DEFAULT_SHAFT_HZ).unwrap();
        assert!((ff.bpfo_hz - 179.8).abs() < 0.05, "{}", ff.bpfo_hz);
        assert!((ff.bpfi_hz - 271.7).abs() < 0.05, "{}", ff.bpfi_hz);
        assert!(ff.bpfo_hz < ff.bpfi_hz);
    }

    #[test]
    fn small_ball_limit() {
        let g = BearingGeometry {
            ball_diameter_mm: 1e-9,
            ..Default::default()
        };
        let ff = fault_frequencies(&g, 20.0).unwrap();
        assert!((ff.bpfo_hz - 90.0).abs() < 1e-6);
        assert!((ff.bpfi_hz - 90.0).abs() < 1e-6);
    }

    #[test]
    fn linear_in_shaft_speed() {
        let g = BearingGeometry::default();
        let a = fault_frequencies(&g, 25.0).unwrap();
        let b = fault_frequencies(&g, 50.0).unwrap();
        assert!((b.bpfo_hz - 2.0 * a.bpfo_hz).abs() < 1e-12);
        assert!((b.bpfi_hz - 2.0 * a.bpfi_hz).abs() < 1e-12);
    }

    #[test]
    fn bad_geometry() {
        let g = BearingGeometry::default();
        assert!(fault_frequencies(&g, 0.0).is_err());
        for bad in [
            BearingGeometry { n_balls: 0, ..g },
            BearingGeometry { ball_diameter_mm: 40.0, ..g },
            BearingGeometry { pitch_diameter_mm: -1.0, ..g },
            BearingGeometry { contact_angle_rad: 1.6, ..g },
        ] {
            assert!(matches!(fault_frequencies(&bad, 50.0), Err(Error::BadGeometry(_))));
        }
    }
}
