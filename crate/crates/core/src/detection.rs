//! Receiver model: two-channel superheterodyne detection with per-shot phase
//! noise, magnitude combination before averaging, and square-law diode
//! detection.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::rng::{derive_seed, stream};
use crate::warning::Warning;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseMode {
    /// Same reference phase on every shot.
    Fixed(f64),
    /// Independent uniform phase per shot.
    UniformRandom,
    /// Uniform start plus a random walk whose variance grows as `walk_rate * t`
    /// from the first pulse.
    RandomWalk { walk_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Additive Gaussian std per quadrature per sample.
    pub sigma: f64,
    pub phase: PhaseMode,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { sigma: 0.0, phase: PhaseMode::UniformRandom }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return domain("noise sigma must be non-negative");
        }
        if let PhaseMode::RandomWalk { walk_rate } = self.phase {
            if !(walk_rate >= 0.0) || !walk_rate.is_finite() {
                return domain("walk rate must be non-negative");
            }
        }
        Ok(())
    }

    /// Mean of the magnitude of pure noise, sigma sqrt(pi/2).
    pub fn rayleigh_floor(&self) -> f64 {
        rayleigh_floor(self.sigma)
    }

    /// Std of the magnitude of pure noise, sigma sqrt(2 - pi/2).
    pub fn magnitude_std(&self) -> f64 {
        self.sigma * (2.0 - PI / 2.0).sqrt()
    }

    /// Sigma for which the magnitude SNR estimator of `average_shots`
    /// reports `snr` on a single shot with echo amplitude `peak`.
    pub fn sigma_for_snr(peak: f64, snr: f64) -> f64 {
        peak / (snr * (2.0 - PI / 2.0).sqrt() + (PI / 2.0).sqrt())
    }
}

pub fn rayleigh_floor(sigma: f64) -> f64 {
    sigma * (PI / 2.0).sqrt()
}

/// Uniformly sampled complex signal; `t0` is measured from the first pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Complex<f64>>,
}

impl Trace {
    pub fn constant(value: Complex<f64>, len: usize) -> Trace {
        Trace { t0: 0.0, dt: 1.0, samples: vec![value; len] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub v_i: Vec<f64>,
    pub v_q: Vec<f64>,
    pub shot_phase: f64,
    pub seed: u64,
}

/// v_i + i v_q = signal e^{i phi} + n(t).
pub fn detect_shot(signal: &Trace, noise: &NoiseModel, seed: u64) -> ShotRecord {
    let mut rng = stream(seed);
    let shot_phase = match noise.phase {
        PhaseMode::Fixed(p) => p,
        PhaseMode::UniformRandom | PhaseMode::RandomWalk { .. } => rng.random::<f64>() * 2.0 * PI,
    };
    let walk = match noise.phase {
        PhaseMode::RandomWalk { walk_rate } => walk_rate,
        _ => 0.0,
    };
    let mut phase = shot_phase;
    if walk > 0.0 {
        phase += (walk * signal.t0.max(0.0)).sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    let step = (walk * signal.dt).sqrt();
    let n = signal.samples.len();
    let mut v_i = Vec::with_capacity(n);
    let mut v_q = Vec::with_capacity(n);
    for (k, s) in signal.samples.iter().enumerate() {
        if walk > 0.0 && k > 0 {
            phase += step * rng.sample::<f64, _>(StandardNormal);
        }
        let rotated = s * Complex::from_polar(1.0, phase);
        let (ni, nq) = if noise.sigma > 0.0 {
            (noise.sigma * rng.sample::<f64, _>(StandardNormal), noise.sigma * rng.sample::<f64, _>(StandardNormal))
        } else {
            (0.0, 0.0)
        };
        v_i.push(rotated.re + ni);
        v_q.push(rotated.im + nq);
    }
    ShotRecord { v_i, v_q, shot_phase, seed }
}

/// `count` shots with seeds derived from `(master_seed, shot index)`.
pub fn acquire_shots(signal: &Trace, noise: &NoiseModel, master_seed: u64, count: usize) -> Vec<ShotRecord> {
    (0..count as u64).into_par_iter().map(|i| detect_shot(signal, noise, derive_seed(master_seed, i))).collect()
}

/// Pointwise sqrt(V'^2 + V''^2) of one shot.
pub fn quadrature_magnitude(shot: &ShotRecord) -> Vec<f64> {
    shot.v_i.iter().zip(&shot.v_q).map(|(i, q)| i.hypot(*q)).collect()
}

/// Vector average of raw quadratures, for comparison with magnitude averaging.
pub fn coherent_average(shots: &[ShotRecord]) -> Vec<Complex<f64>> {
    let Some(first) = shots.first() else { return vec![] };
    let n = shots.len() as f64;
    (0..first.v_i.len())
        .map(|k| shots.iter().map(|s| Complex::new(s.v_i[k], s.v_q[k])).sum::<Complex<f64>>() / n)
        .collect()
}

/// Sample ranges used by the SNR estimator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnrWindows {
    pub baseline: Range<usize>,
    pub peak: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Averaged {
    pub mean: Vec<f64>,
    pub shots: usize,
    pub peak: f64,
    pub baseline_mean: f64,
    pub baseline_std: f64,
    /// (peak - baseline mean) / baseline std.
    pub snr: f64,
    pub windows: SnrWindows,
}

pub fn average_shots(shots: &[Vec<f64>], windows: &SnrWindows) -> Result<Averaged> {
    let Some(first) = shots.first() else {
        return domain("no shots to average");
    };
    let len = first.len();
    if shots.iter().any(|s| s.len() != len) {
        return domain("shots differ in length");
    }
    let SnrWindows { baseline, peak } = windows;
    if baseline.len() < 2 || baseline.end > len || peak.is_empty() || peak.end > len {
        return domain("SNR windows fall outside the trace");
    }
    let n = shots.len() as f64;
    let mean: Vec<f64> = (0..len).map(|k| shots.iter().map(|s| s[k]).sum::<f64>() / n).collect();
    let base = &mean[baseline.clone()];
    let bm = base.iter().sum::<f64>() / base.len() as f64;
    let var = base.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (base.len() - 1) as f64;
    let bs = var.sqrt();
    let pk = mean[peak.clone()].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let snr = if bs > 0.0 { (pk - bm) / bs } else { f64::INFINITY };
    Ok(Averaged {
        mean,
        shots: shots.len(),
        peak: pk,
        baseline_mean: bm,
        baseline_std: bs,
        snr,
        windows: windows.clone(),
    })
}

/// Square-law diode output, optionally through a one-pole low-pass of time
/// constant `tau` sampled every `dt`.
pub fn diode_detect(amplitude: &[f64], lowpass: Option<(f64, f64)>) -> Result<Vec<f64>> {
    if amplitude.iter().any(|a| !(*a >= 0.0)) {
        return domain("diode input amplitudes must be non-negative");
    }
    let power = amplitude.iter().map(|a| a * a);
    match lowpass {
        None => Ok(power.collect()),
        Some((tau, dt)) => {
            if !(tau > 0.0 && dt > 0.0) {
                return domain("low-pass time constant and step must be positive");
            }
            let alpha = 1.0 - (-dt / tau).exp();
            let mut y = 0.0;
            Ok(power
                .enumerate()
                .map(|(k, p)| {
                    y = if k == 0 { p } else { y + alpha * (p - y) };
                    y
                })
                .collect())
        }
    }
}

/// Leakage of reflected pulse power into the cross-polarized receiver arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakthrough {
    /// Cross-polar isolation (dB).
    pub isolation_db: f64,
    /// Receiver blanking after each pulse end (s).
    pub dead_time: f64,
    /// Decay time of the leaked transient (s).
    pub ring_time: f64,
    /// Leaked power, relative to the incident pulse, that damages the mixer.
    pub damage_ceiling: f64,
}

impl Default for Breakthrough {
    fn default() -> Self {
        Breakthrough { isolation_db: 25.0, dead_time: 300e-9, ring_time: 20e-9, damage_ceiling: 0.01 }
    }
}

impl Breakthrough {
    /// Amplitude transmission factor of the isolation.
    pub fn amplitude_factor(&self) -> f64 {
        10f64.powf(-self.isolation_db / 20.0)
    }

    /// Adds decaying leakage following each `(start, end)` pulse of amplitude
    /// `pulse_amplitude` to `trace`.
    pub fn apply(&self, trace: &mut Trace, pulses: &[(f64, f64)], pulse_amplitude: f64) {
        let a = pulse_amplitude * self.amplitude_factor();
        for (k, s) in trace.samples.iter_mut().enumerate() {
            let t = trace.t0 + k as f64 * trace.dt;
            for &(start, end) in pulses {
                if t >= start && t <= end {
                    *s += a;
                } else if t > end {
                    *s += a * (-(t - end) / self.ring_time).exp();
                }
            }
        }
    }

    pub fn check(&self, pulses: &[(f64, f64)], echo_start: f64) -> Vec<Warning> {
        let mut out = Vec::new();
        let leaked = 10f64.powf(-self.isolation_db / 10.0);
        if leaked > self.damage_ceiling {
            out.push(Warning::MixerDamage { power_ratio: leaked / self.damage_ceiling });
        }
        if let Some(&(_, end)) = pulses.iter().rfind(|p| p.1 <= echo_start + self.dead_time) {
            let dead_end = end + self.dead_time;
            if dead_end > echo_start {
                out.push(Warning::BreakthroughOverlapsEcho { dead_time_end: dead_end, echo_start });
            }
        }
        out
    }
}
