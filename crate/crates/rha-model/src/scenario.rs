//! Scenario configuration: array geometry, waveguide, ADC, powers, multipath.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("angle {0} outside [-pi/2, pi/2]")]
    AngleOutOfDomain(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Full description of one physical scenario.
///
/// Lengths `antenna_spacing` and `element_spacing` are in wavelengths;
/// `wavelength` is in meters and only enters through the waveguide
/// propagation factors (attenuation and guided phase per meter).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of antennas M.
    pub num_antennas: usize,
    /// Metamaterial elements per antenna N.
    pub elements_per_antenna: usize,
    /// Antenna spacing d in wavelengths.
    pub antenna_spacing: f64,
    /// Element spacing d_e in wavelengths.
    pub element_spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Waveguide attenuation alpha_t in nepers per meter.
    pub waveguide_attenuation: f64,
    /// Waveguide phase constant beta_t in radians per meter.
    pub waveguide_phase: f64,
    /// DMA element control bits B; the phase set has 2^B states.
    pub control_bits: u32,
    /// ADC bits K.
    pub adc_bits: u32,
    /// ADC full-scale range V_f in volts.
    pub adc_fullscale: f64,
    /// LNA gain (the model fixes this to 1).
    pub lna_gain: f64,
    /// Signal power P_a (linear).
    pub signal_power: f64,
    /// Jamming power P_j (linear).
    pub jam_power: f64,
    /// Noise power sigma_n^2 (linear).
    pub noise_power: f64,
    /// Signal multipath count L_a.
    pub num_paths_alice: usize,
    /// Jamming multipath count L_j.
    pub num_paths_jam: usize,
    /// Blocking ratio xi for the per-antenna jamming-to-signal constraint.
    pub blocking_ratio: f64,
    /// Pilot length T_p.
    pub pilot_len: usize,
    /// Synthetic per-element mutual-coupling efficiency (1.0 = ideal). This
    /// stands in for a measured S21 coupling study and simply scales each
    /// radiation pattern.
    pub coupling_efficiency: f64,
    /// Draw Rayleigh-faded path gains instead of fixed-magnitude ones.
    pub rayleigh_gains: bool,
}

impl ScenarioConfig {
    /// Nominal setup: 4 antennas spaced 2.5 wavelengths, 8 elements per
    /// antenna at quarter-wavelength pitch, 3 control bits, guide index 2.5,
    /// signal 20 dB and jamming 40 dB over unit noise power.
    pub fn nominal() -> Self {
        let wavelength = 0.1;
        Self {
            num_antennas: 4,
            elements_per_antenna: 8,
            antenna_spacing: 2.5,
            element_spacing: 0.25,
            wavelength,
            waveguide_attenuation: 0.1,
            waveguide_phase: 2.5 * 2.0 * PI / wavelength,
            control_bits: 3,
            adc_bits: 4,
            adc_fullscale: 1.0,
            lna_gain: 1.0,
            signal_power: 100.0,
            jam_power: 10_000.0,
            noise_power: 1.0,
            num_paths_alice: 4,
            num_paths_jam: 4,
            blocking_ratio: 64.0,
            pilot_len: 16,
            coupling_efficiency: 1.0,
            rayleigh_gains: false,
        }
    }

    /// Small toy used throughout the tests: M antennas, N elements,
    /// contiguous subarrays (antenna spacing = N * element spacing).
    pub fn toy(m: usize, n: usize) -> Self {
        let mut sc = Self::nominal();
        sc.num_antennas = m;
        sc.elements_per_antenna = n;
        sc.element_spacing = 0.25;
        sc.antenna_spacing = 0.25 * n as f64;
        sc.num_paths_alice = 1;
        sc.num_paths_jam = 1;
        sc
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |m: &str| Err(ModelError::InvalidScenario(m.to_string()));
        if self.num_antennas * self.elements_per_antenna == 0 {
            return err("M*N must be >= 1");
        }
        if self.element_spacing * self.elements_per_antenna as f64
            > self.antenna_spacing + 1e-12
        {
            // the antenna length must not exceed the antenna spacing
            if self.num_antennas > 1 {
                return err("antenna aperture N*d_e exceeds spacing d");
            }
        }
        if self.control_bits < 1 {
            return err("control bits must be >= 1");
        }
        if self.signal_power <= 0.0 || self.jam_power < 0.0 || self.noise_power <= 0.0 {
            return err("powers must be positive");
        }
        if self.num_paths_alice == 0 || self.num_paths_jam == 0 {
            return err("path counts must be >= 1");
        }
        if self.wavelength <= 0.0 || self.adc_fullscale <= 0.0 {
            return err("wavelength and ADC full scale must be positive");
        }
        Ok(())
    }

    /// Wave number k0 = 2 pi / lambda (per meter).
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Set the guided phase constant from a guide refraction index:
    /// `beta_t = n_g * k0`.
    pub fn with_guide_index(mut self, n_g: f64) -> Self {
        self.waveguide_phase = n_g * self.wave_number();
        self
    }

    /// Jamming power expressed relative to noise, in dB.
    pub fn with_jam_db(mut self, db: f64) -> Self {
        self.jam_power = self.noise_power * 10f64.powf(db / 10.0);
        self
    }

    /// Signal power expressed relative to noise, in dB.
    pub fn with_signal_db(mut self, db: f64) -> Self {
        self.signal_power = self.noise_power * 10f64.powf(db / 10.0);
        self
    }

    /// Element positions within one antenna, in wavelengths.
    pub fn element_positions(&self) -> Vec<f64> {
        (0..self.elements_per_antenna)
            .map(|n| n as f64 * self.element_spacing)
            .collect()
    }

    /// Antenna positions, in wavelengths.
    pub fn antenna_positions(&self) -> Vec<f64> {
        (0..self.num_antennas)
            .map(|m| m as f64 * self.antenna_spacing)
            .collect()
    }

    /// The discrete phase set Psi = {2 pi b / 2^B}.
    pub fn phase_set(&self) -> Vec<f64> {
        let states = 1usize << self.control_bits;
        (0..states)
            .map(|b| 2.0 * PI * b as f64 / states as f64)
            .collect()
    }

    pub fn adc(&self) -> crate::receive::AdcModel {
        crate::receive::AdcModel::new(self.adc_bits, self.adc_fullscale)
    }

    /// Default blocking ratio derived from the quantizer: the squared
    /// amplitude headroom `(2^(K-1))^2` before a jam rail swamps the signal
    /// rail below one LSB.
    pub fn default_blocking_ratio(adc_bits: u32) -> f64 {
        let head = (1u64 << (adc_bits - 1)) as f64;
        head * head
    }
}
