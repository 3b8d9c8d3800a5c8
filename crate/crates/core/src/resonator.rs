//! Semi-confocal Fabry-Perot resonator: mode geometry, Q from a round-trip
//! loss budget, B1 at the sample, and ring-down.

use std::f64::consts::PI;

use crate::constants::CODATA_2018;
use crate::error::{domain, Result};
use crate::pulses::{duration_for_angle, Polarization};
use crate::warning::Warning;

/// Tuning range of the piezo transducer (m).
pub const PIEZO_RANGE: f64 = 100e-6;
/// Q band around the room-temperature calibration.
pub const Q_BAND: (f64, f64) = (250.0, 1000.0);
pub const MESH_BAND: (f64, f64) = (0.002, 0.01);
pub const HALFWAVE_RANGE: (u32, u32) = (5, 8);
/// Round-trip loss besides the coupling mesh, calibrated so that six
/// half-wavelengths and a 0.5 % mesh give Q near 500.
pub const DEFAULT_OTHER_LOSS: f64 = 0.07;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// m
    pub length: f64,
    /// GHz
    pub free_spectral_range: f64,
    /// m
    pub half_wavelength: f64,
}

impl ModeGeometry {
    /// True when the piezo alone cannot move the mirror by a full half-wavelength.
    pub fn fine_tune_only(&self, piezo_range: f64) -> bool {
        piezo_range < self.half_wavelength
    }
}

pub fn mode_geometry(freq_ghz: f64, n_halfwaves: u32) -> Result<ModeGeometry> {
    if !(freq_ghz > 0.0) || n_halfwaves == 0 {
        return domain("mode geometry needs positive frequency and at least one half-wave");
    }
    let half = CODATA_2018.c / (freq_ghz * 1e9) / 2.0;
    let length = n_halfwaves as f64 * half;
    Ok(ModeGeometry { length, free_spectral_range: freq_ghz / n_halfwaves as f64, half_wavelength: half })
}

/// Q = 2 pi n / (mesh transmission + other round-trip loss).
pub fn quality_factor(n_halfwaves: u32, mesh_transmission: f64, other_loss: f64) -> Result<f64> {
    let total = mesh_transmission + other_loss;
    if n_halfwaves == 0 || !(mesh_transmission > 0.0 && mesh_transmission < 1.0) || !(0.0..1.0).contains(&other_loss) {
        return domain("losses must lie in (0, 1)");
    }
    if total >= 1.0 {
        return domain(format!("round-trip loss {total} must be below 1"));
    }
    Ok(2.0 * PI * n_halfwaves as f64 / total)
}

/// Energy ring-down time q / (2 pi f) in seconds.
pub fn ringdown_time(q: f64, freq_ghz: f64) -> Result<f64> {
    if !(q > 0.0 && freq_ghz > 0.0) {
        return domain("ring-down needs positive Q and frequency");
    }
    Ok(q / (2.0 * PI * freq_ghz * 1e9))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorModel {
    /// GHz
    pub freq: f64,
    pub n_halfwaves: u32,
    /// m
    pub beam_waist: f64,
    pub mesh_transmission: f64,
    pub other_loss: f64,
    /// Overrides the loss-budget Q when set.
    pub q_override: Option<f64>,
    /// W
    pub incident_power: f64,
    pub polarization: Polarization,
}

impl ResonatorModel {
    pub fn new(freq: f64, incident_power: f64) -> ResonatorModel {
        ResonatorModel {
            freq,
            n_halfwaves: 6,
            beam_waist: 1.5e-3,
            mesh_transmission: 0.005,
            other_loss: DEFAULT_OTHER_LOSS,
            q_override: None,
            incident_power,
            polarization: Polarization::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq > 0.0) || !(self.beam_waist > 0.0) || !(self.incident_power >= 0.0) {
            return domain("resonator needs positive frequency and waist, non-negative power");
        }
        if let Some(q) = self.q_override {
            if !(q > 0.0) {
                return domain("Q must be positive");
            }
        }
        self.q().map(|_| ())
    }

    pub fn q(&self) -> Result<f64> {
        match self.q_override {
            Some(q) => Ok(q),
            None => quality_factor(self.n_halfwaves, self.mesh_transmission, self.other_loss),
        }
    }

    pub fn geometry(&self) -> Result<ModeGeometry> {
        mode_geometry(self.freq, self.n_halfwaves)
    }

    /// pi w0^2 L / 4 in m^3.
    pub fn mode_volume(&self) -> Result<f64> {
        Ok(PI * self.beam_waist.powi(2) * self.geometry()?.length / 4.0)
    }

    /// Full width of the resonance (GHz).
    pub fn bandwidth(&self) -> Result<f64> {
        Ok(self.freq / self.q()?)
    }

    /// Circularly rotating B1 (mT) before any polarization penalty.
    pub fn nominal_b1(&self) -> Result<f64> {
        self.validate()?;
        let omega = 2.0 * PI * self.freq * 1e9;
        let b1 = (CODATA_2018.mu0 * self.q()? * self.incident_power / (omega * self.mode_volume()?)).sqrt();
        Ok(b1 * 1e3)
    }

    /// B1 at the sample (mT), including the linear-polarization penalty.
    pub fn b1_from_power(&self) -> Result<f64> {
        Ok(self.nominal_b1()? * self.polarization.b1_factor())
    }

    /// On-resonance pi/2 duration (s) for effective g.
    pub fn pi_half_duration(&self, g_eff: f64) -> Result<f64> {
        Ok(duration_for_angle(PI / 2.0, self.b1_from_power()?, g_eff))
    }

    pub fn ringdown(&self) -> Result<f64> {
        ringdown_time(self.q()?, self.freq)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = Vec::new();
        if self.q_override.is_none() && !(MESH_BAND.0..=MESH_BAND.1).contains(&self.mesh_transmission) {
            w.push(Warning::MeshTransmissionOutOfBand { transmission: self.mesh_transmission });
        }
        if !(HALFWAVE_RANGE.0..=HALFWAVE_RANGE.1).contains(&self.n_halfwaves) {
            w.push(Warning::HalfwavesOutOfRange { n: self.n_halfwaves });
        }
        if let Ok(q) = self.q() {
            if !(Q_BAND.0..=Q_BAND.1).contains(&q) {
                w.push(Warning::QualityFactorOutOfBand { q });
            }
        }
        w
    }
}
