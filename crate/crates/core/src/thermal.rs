//! Thermal-equilibrium populations at high field and low temperature.

use crate::constants::CODATA_2018;
use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    pub temperature: f64,
    pub populations: Vec<f64>,
    /// p0 - p1 for a two-level summary; `None` for larger systems.
    pub polarization_two_level: Option<f64>,
}

impl ThermalState {
    pub fn new(levels_mhz: &[f64], temperature: f64) -> Result<ThermalState> {
        let populations = thermal_populations(levels_mhz, temperature)?;
        let polarization_two_level = (populations.len() == 2).then(|| populations[0] - populations[1]);
        Ok(ThermalState { temperature, populations, polarization_two_level })
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("temperature {t} K must be positive"));
    }
    Ok(())
}

/// Boltzmann populations for energies in MHz.
pub fn thermal_populations(levels_mhz: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    if levels_mhz.iter().any(|e| !e.is_finite()) {
        return domain("non-finite level energy");
    }
    let Some(e_min) = levels_mhz.iter().cloned().reduce(f64::min) else {
        return Ok(vec![]);
    };
    let beta = CODATA_2018.h * 1e6 / (CODATA_2018.k_b * temperature);
    let boltz: Vec<f64> = levels_mhz.iter().map(|e| (-(e - e_min) * beta).exp()).collect();
    let z: f64 = boltz.iter().sum();
    Ok(boltz.into_iter().map(|b| b / z).collect())
}

/// tanh(h nu / 2kT) for a two-level system at `freq_ghz`.
pub fn two_level_polarization(freq_ghz: f64, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    if !(freq_ghz >= 0.0) || !freq_ghz.is_finite() {
        return domain(format!("frequency {freq_ghz} GHz must be non-negative"));
    }
    Ok((CODATA_2018.reduced_energy(freq_ghz * 1e9, temperature) / 2.0).tanh())
}
