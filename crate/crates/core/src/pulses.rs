//! Rectangular microwave pulses: flip angles, excitation bandwidth, and
//! rotating-frame propagation of density operators.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Complex;

use crate::constants::CODATA_2018;
use crate::error::{domain, Result};
use crate::spinsys::{eigensystem, CMatrix, Spin, SpinOperators};

/// Half-width convention for the excitation window: bandwidth = 0.75 / t_p.
pub const BANDWIDTH_KAPPA: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    #[default]
    Circular,
    /// Linearly polarized drive; only the co-rotating half reaches the spins.
    Linear,
}

impl Polarization {
    /// Amplitude factor applied to a nominal B1.
    pub fn b1_factor(self) -> f64 {
        match self {
            Polarization::Circular => 1.0,
            Polarization::Linear => 1.0 / SQRT_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// s
    pub duration: f64,
    /// Nominal B1 amplitude (mT).
    pub b1: f64,
    /// rad
    pub phase: f64,
    /// Carrier minus spin-packet frequency (MHz).
    pub carrier_offset: f64,
    pub polarization: Polarization,
}

impl PulseSpec {
    pub fn new(duration: f64, b1: f64) -> PulseSpec {
        PulseSpec { duration, b1, phase: 0.0, carrier_offset: 0.0, polarization: Polarization::Circular }
    }

    /// A pulse of `duration` whose nominal B1 produces `angle` on resonance.
    pub fn with_angle(duration: f64, angle: f64, g_eff: f64, polarization: Polarization) -> PulseSpec {
        let b1 = b1_for_angle(angle, duration, g_eff) / polarization.b1_factor();
        PulseSpec { polarization, ..PulseSpec::new(duration, b1) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return domain(format!("pulse duration {} must be positive", self.duration));
        }
        if !(self.b1 >= 0.0) || !self.b1.is_finite() {
            return domain(format!("pulse B1 {} must be non-negative", self.b1));
        }
        if !self.phase.is_finite() || !self.carrier_offset.is_finite() {
            return domain("pulse phase and offset must be finite");
        }
        Ok(())
    }

    /// B1 reaching the spins (mT).
    pub fn b1_eff(&self) -> f64 {
        self.b1 * self.polarization.b1_factor()
    }

    /// Nutation rate (rad/s).
    pub fn rabi_omega(&self, g_eff: f64) -> f64 {
        g_eff * CODATA_2018.mu_b * self.b1_eff() * 1e-3 / CODATA_2018.hbar
    }
}

/// On-resonance flip angle (rad).
pub fn flip_angle(pulse: &PulseSpec, g_eff: f64) -> f64 {
    pulse.rabi_omega(g_eff) * pulse.duration
}

/// Effective B1 (mT) needed for `angle` in `duration`.
pub fn b1_for_angle(angle: f64, duration: f64, g_eff: f64) -> f64 {
    angle * CODATA_2018.hbar / (g_eff * CODATA_2018.mu_b * duration) * 1e3
}

/// Duration (s) for `angle` at the pulse's effective B1.
pub fn duration_for_angle(angle: f64, b1_eff_mt: f64, g_eff: f64) -> f64 {
    angle * CODATA_2018.hbar / (g_eff * CODATA_2018.mu_b * b1_eff_mt * 1e-3)
}

/// Field width (mT) excited by a pulse of `duration`.
pub fn excitation_window(duration: f64, g_eff: f64) -> f64 {
    CODATA_2018.h * (BANDWIDTH_KAPPA / duration) / (g_eff * CODATA_2018.mu_b) * 1e3
}

/// On-resonance two-pulse echo factor sin(theta1) sin^2(theta2 / 2).
pub fn two_pulse_echo_factor(theta1: f64, theta2: f64) -> f64 {
    theta1.sin() * (theta2 / 2.0).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

const RHO_TOL: f64 = 1e-9;

fn spin_of(rho: &CMatrix) -> Result<Spin> {
    if !rho.is_square() || rho.nrows() < 2 {
        return domain("density matrix must be square with dimension >= 2");
    }
    Spin::from_twice(rho.nrows() as u32 - 1)
}

/// Checks Hermiticity, unit trace and positivity to 1e-9.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    spin_of(rho)?;
    let skew = (rho - rho.adjoint()).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if skew > RHO_TOL {
        return domain("density matrix is not Hermitian");
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > RHO_TOL || tr.im.abs() > RHO_TOL {
        return domain(format!("density matrix trace {tr} != 1"));
    }
    let eig = eigensystem(rho)?;
    if eig.levels.first().is_some_and(|l| *l < -RHO_TOL) {
        return domain("density matrix is not positive semidefinite");
    }
    Ok(())
}

/// exp(-i G) for Hermitian G.
fn unitary_from_generator(g: &CMatrix) -> Result<CMatrix> {
    let eig = eigensystem(g)?;
    let n = eig.dim();
    let mut phased = eig.states.clone();
    for c in 0..n {
        let p = Complex::from_polar(1.0, -eig.levels[c]);
        for r in 0..n {
            phased[(r, c)] *= p;
        }
    }
    Ok(phased * eig.states.adjoint())
}

/// Propagator of a rectangular pulse in the rotating frame.
pub fn pulse_propagator(spin: Spin, pulse: &PulseSpec, g_eff: f64) -> Result<CMatrix> {
    pulse.validate()?;
    let ops = SpinOperators::new(spin);
    let dw = 2.0 * PI * pulse.carrier_offset * 1e6;
    let w1 = pulse.rabi_omega(g_eff);
    let (s, c) = pulse.phase.sin_cos();
    let gen =
        (&ops.z * Complex::new(dw, 0.0) + &ops.x * Complex::new(w1 * c, 0.0) + &ops.y * Complex::new(w1 * s, 0.0))
            * Complex::new(pulse.duration, 0.0);
    unitary_from_generator(&gen)
}

pub fn propagate_pulse(rho: &CMatrix, pulse: &PulseSpec, g_eff: f64) -> Result<CMatrix> {
    validate_density(rho)?;
    let u = pulse_propagator(spin_of(rho)?, pulse, g_eff)?;
    Ok(&u * rho * u.adjoint())
}

/// Instantaneous rotation by `angle` about a rotating-frame axis.
pub fn ideal_rotation(rho: &CMatrix, axis: Axis, angle: f64) -> Result<CMatrix> {
    validate_density(rho)?;
    let ops = SpinOperators::new(spin_of(rho)?);
    let j = match axis {
        Axis::X => &ops.x,
        Axis::Y => &ops.y,
        Axis::Z => &ops.z,
    };
    let u = unitary_from_generator(&(j * Complex::new(angle, 0.0)))?;
    Ok(&u * rho * u.adjoint())
}

/// Tr(rho A) for Hermitian A.
pub fn expectation(rho: &CMatrix, op: &CMatrix) -> f64 {
    (rho * op).trace().re
}

/// Pure state polarized along +z.
pub fn polarized_state(spin: Spin) -> CMatrix {
    let n = spin.multiplicity();
    let mut rho = CMatrix::zeros(n, n);
    rho[(0, 0)] = Complex::new(1.0, 0.0);
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    fn random_rho(spin: Spin, seed: u64) -> CMatrix {
        let n = spin.multiplicity();
        let mut r = rng::stream(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
        let m = &a * a.adjoint();
        let tr = m.trace();
        m / tr
    }

    #[test]
    fn pi_half_at_100_ns() {
        let b1 = b1_for_angle(PI / 2.0, 100e-9, 2.0);
        assert!((b1 - 0.0893).abs() < 5e-5, "{b1}");
        let p = PulseSpec::new(100e-9, b1);
        assert!((flip_angle(&p, 2.0) - PI / 2.0).abs() < 1e-12);
        let p2 = PulseSpec { duration: 200e-9, ..p };
        assert!((flip_angle(&p2, 2.0) - PI).abs() < 1e-12);
    }

    #[test]
    fn tempol_pulses() {
        let b1 = b1_for_angle(2.0 * PI / 3.0, 650e-9, 2.0);
        assert!((b1 - 0.0183).abs() < 5e-5, "{b1}");
        let w = excitation_window(650e-9, 2.006);
        assert!((w - 0.041).abs() < 5e-4, "{w}");
        assert!((excitation_window(1300e-9, 2.006) - w / 2.0).abs() < 1e-15);
        let fraction = w / 38.0;
        assert!((fraction - 0.00108).abs() < 1e-5);
        assert!((fraction - 0.001).abs() / 0.001 < 0.2);
    }

    #[test]
    fn linear_polarization_scales_angle() {
        let mut p = PulseSpec::new(300e-9, 0.03);
        let circ = flip_angle(&p, 2.0);
        p.polarization = Polarization::Linear;
        assert!((flip_angle(&p, 2.0) - circ / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn inversion_swaps_populations() {
        let rho = polarized_state(Spin::HALF);
        let ops = SpinOperators::new(Spin::HALF);
        let p = PulseSpec::with_angle(100e-9, PI, 2.0, Polarization::Circular);
        let out = propagate_pulse(&rho, &p, 2.0).unwrap();
        assert!((out[(0, 0)].re).abs() < 1e-12);
        assert!((out[(1, 1)].re - 1.0).abs() < 1e-12);
        let half = PulseSpec::with_angle(100e-9, PI / 2.0, 2.0, Polarization::Circular);
        let out = propagate_pulse(&rho, &half, 2.0).unwrap();
        assert!((expectation(&out, &ops.y) + 0.5).abs() < 1e-9);
        assert!(expectation(&out, &ops.z).abs() < 1e-9);
    }

    #[test]
    fn off_resonance_rabi_oracle() {
        let rho = polarized_state(Spin::HALF);
        let ops = SpinOperators::new(Spin::HALF);
        let mut p = PulseSpec::with_angle(200e-9, PI, 2.0, Polarization::Circular);
        let w1 = p.rabi_omega(2.0);
        p.carrier_offset = w1 / (2.0 * PI * 1e6);
        let out = propagate_pulse(&rho, &p, 2.0).unwrap();
        let omega = (2.0 * w1 * w1).sqrt();
        let mz = 1.0 - 2.0 * w1 * w1 / (omega * omega) * (omega * p.duration / 2.0).sin().powi(2);
        assert!((2.0 * expectation(&out, &ops.z) - mz).abs() < 1e-9);
    }

    #[test]
    fn ideal_rotation_group_properties() {
        for twice in [1u32, 3, 5] {
            let spin = Spin::from_twice(twice).unwrap();
            let rho = random_rho(spin, twice as u64);
            let full = ideal_rotation(&rho, Axis::X, 2.0 * PI).unwrap();
            assert!(max_dev(&full, &rho) < 1e-12);
            let two = ideal_rotation(&ideal_rotation(&rho, Axis::X, PI / 2.0).unwrap(), Axis::X, PI / 2.0).unwrap();
            let one = ideal_rotation(&rho, Axis::X, PI).unwrap();
            assert!(max_dev(&two, &one) < 1e-12);
        }
    }

    #[test]
    fn ideal_matches_on_resonance_pulse() {
        for seed in 0..10 {
            let spin = Spin::from_twice(1 + (seed % 4) as u32).unwrap();
            let rho = random_rho(spin, 100 + seed);
            let angle = 0.3 + seed as f64 * 0.4;
            for (axis, phase) in [(Axis::X, 0.0), (Axis::Y, PI / 2.0)] {
                let mut p = PulseSpec::with_angle(250e-9, angle, 2.0023, Polarization::Linear);
                p.phase = phase;
                let a = propagate_pulse(&rho, &p, 2.0023).unwrap();
                let b = ideal_rotation(&rho, axis, angle).unwrap();
                assert!(max_dev(&a, &b) < 1e-9);
            }
        }
    }

    #[test]
    fn unitarity_preserves_trace_and_purity() {
        let rho = random_rho(Spin::new(2.5).unwrap(), 9);
        let mut p = PulseSpec::with_angle(400e-9, 1.1, 2.0, Polarization::Circular);
        p.carrier_offset = 0.7;
        p.phase = 0.4;
        let out = propagate_pulse(&rho, &p, 2.0).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-9);
        let purity = |m: &CMatrix| (m * m).trace().re;
        assert!((purity(&out) - purity(&rho)).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_density() {
        let mut rho = polarized_state(Spin::HALF);
        rho[(1, 1)] = Complex::new(0.5, 0.0);
        let p = PulseSpec::new(1e-7, 0.01);
        assert!(propagate_pulse(&rho, &p, 2.0).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = Complex::new(1.5, 0.0);
        neg[(1, 1)] = Complex::new(-0.5, 0.0);
        assert!(ideal_rotation(&neg, Axis::X, 1.0).is_err());
        assert!(PulseSpec::new(-1.0, 0.1).validate().is_err());
    }

    #[test]
    fn angle_duration_round_trip() {
        for &(angle, b1, g) in &[(PI / 2.0, 0.0893, 2.0), (2.1, 0.0183, 2.006), (PI, 0.04, 1.98)] {
            let t = duration_for_angle(angle, b1, g);
            let p = PulseSpec::new(t, b1);
            assert!((flip_angle(&p, g) - angle).abs() / angle < 1e-12);
        }
    }
}
