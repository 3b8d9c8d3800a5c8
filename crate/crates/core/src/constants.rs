//! CODATA-2018 physical constants in SI units.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant (J s).
    pub h: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Nuclear magneton (J/T).
    pub mu_n: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Vacuum permeability (T m/A).
    pub mu0: f64,
    /// Speed of light (m/s).
    pub c: f64,
}

pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    h: 6.626_070_15e-34,
    hbar: 6.626_070_15e-34 / (2.0 * PI),
    mu_b: 9.274_010_078_3e-24,
    mu_n: 5.050_783_746_1e-27,
    k_b: 1.380_649e-23,
    mu0: 1.256_637_062_12e-6,
    c: 299_792_458.0,
};

impl PhysicalConstants {
    /// Electron Zeeman frequency per unit g and field, Hz/T.
    pub fn mu_b_over_h(&self) -> f64 {
        self.mu_b / self.h
    }

    /// Nuclear Zeeman frequency per unit g_n and field, Hz/T.
    pub fn mu_n_over_h(&self) -> f64 {
        self.mu_n / self.h
    }

    /// Dimensionless h*nu/(kT) for a frequency in Hz.
    pub fn reduced_energy(&self, freq_hz: f64, temperature: f64) -> f64 {
        self.h * freq_hz / (self.k_b * temperature)
    }
}

/// Free-electron Zeeman frequency for effective g at field `b0` (T), in GHz.
pub fn electron_larmor_ghz(g: f64, b0: f64) -> f64 {
    g * CODATA_2018.mu_b_over_h() * b0 * 1e-9
}

/// Field (T) at which an electron with effective g resonates at `freq_ghz`.
pub fn resonance_field(g: f64, freq_ghz: f64) -> f64 {
    freq_ghz * 1e9 / (g * CODATA_2018.mu_b_over_h())
}

/// Nuclear Larmor frequency in MHz.
pub fn nuclear_larmor_mhz(gn: f64, b0: f64) -> f64 {
    gn * CODATA_2018.mu_n_over_h() * b0 * 1e-6
}
