//! Hahn echo, stimulated echo and Mims ENDOR over an inhomogeneous ensemble
//! of spin packets with phenomenological relaxation.

mod endor;

pub use endor::{endor_spectrum, lower_manifold, merge_lines, mims_efficiency, sign_model, EndorLine, EndorSpectrum};

use std::f64::consts::PI;

use nalgebra::Complex;

use crate::constants::CODATA_2018;
use crate::error::{domain, Result};
use crate::pulses::{flip_angle, polarized_state, pulse_propagator, two_pulse_echo_factor, PulseSpec};
use crate::spinsys::{Spin, T2Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Hahn,
    Stimulated,
    MimsEndor,
}

impl SequenceKind {
    pub fn pulse_count(self) -> usize {
        match self {
            SequenceKind::Hahn => 2,
            SequenceKind::Stimulated | SequenceKind::MimsEndor => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::Hahn => "hahn",
            SequenceKind::Stimulated => "stimulated",
            SequenceKind::MimsEndor => "mims_endor",
        }
    }
}

/// RF pulse applied during the mixing period of a Mims sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfPulse {
    /// MHz
    pub freq: f64,
    /// s
    pub duration: f64,
    /// W
    pub power: f64,
    /// Fraction of full inversion reached on the addressed nuclear transition.
    pub inversion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    /// s
    pub tau: f64,
    /// Mixing period (s).
    pub t_wait: f64,
    pub pulses: Vec<PulseSpec>,
    pub rf: Option<RfPulse>,
}

impl SequenceSpec {
    pub fn hahn(tau: f64, p1: PulseSpec, p2: PulseSpec) -> SequenceSpec {
        SequenceSpec { kind: SequenceKind::Hahn, tau, t_wait: 0.0, pulses: vec![p1, p2], rf: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return domain(format!("tau {} must be positive", self.tau));
        }
        if !(self.t_wait >= 0.0) || !self.t_wait.is_finite() {
            return domain("mixing time must be non-negative");
        }
        if self.pulses.len() != self.kind.pulse_count() {
            return domain(format!(
                "{} sequence needs {} pulses, got {}",
                self.kind.name(),
                self.kind.pulse_count(),
                self.pulses.len()
            ));
        }
        for p in &self.pulses {
            p.validate()?;
        }
        match (&self.kind, &self.rf) {
            (SequenceKind::MimsEndor, None) => domain("mims_endor requires an RF pulse"),
            (_, Some(rf)) if !(rf.duration > 0.0) || !(rf.inversion >= 0.0 && rf.inversion <= 1.0) => {
                domain("RF pulse needs positive duration and inversion in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    /// Longest microwave pulse, which limits the excited bandwidth.
    pub fn longest_pulse(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).fold(0.0, f64::max)
    }

    /// On-resonance echo factor of the first two pulses.
    pub fn echo_factor(&self, g_eff: f64) -> f64 {
        match self.kind {
            SequenceKind::Hahn => {
                two_pulse_echo_factor(flip_angle(&self.pulses[0], g_eff), flip_angle(&self.pulses[1], g_eff))
            }
            _ => {
                let th: Vec<f64> = self.pulses.iter().map(|p| flip_angle(p, g_eff)).collect();
                // stimulated echo: sin(t1) sin(t2) sin(t3), times 1/2 in the amplitude law
                th[0].sin() * th[1].sin() * th[2].sin()
            }
        }
    }
}

/// Spin-packet offsets (mT) with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(offsets: Vec<f64>, weights: Vec<f64>) -> Result<Ensemble> {
        if offsets.is_empty() {
            return domain("empty spin-packet ensemble");
        }
        if offsets.len() != weights.len() {
            return domain("ensemble offsets and weights differ in length");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || weights.iter().any(|w| !(*w >= 0.0)) {
            return domain(format!("ensemble weights must be non-negative and sum to 1 (sum {total})"));
        }
        Ok(Ensemble { offsets, weights })
    }

    pub fn single(offset: f64) -> Ensemble {
        Ensemble { offsets: vec![offset], weights: vec![1.0] }
    }

    /// Gaussian line of `fwhm` (mT) sampled on `n` points over `[-span, span]`,
    /// weighted by the probability mass of each cell of the full line.
    pub fn gaussian(fwhm: f64, span: f64, n: usize) -> Result<Ensemble> {
        if !(fwhm > 0.0) || !(span > 0.0) || n == 0 {
            return domain("gaussian ensemble needs positive width, span and count");
        }
        let sigma = fwhm / (8.0 * 2f64.ln()).sqrt();
        let step = 2.0 * span / n as f64;
        let offsets: Vec<f64> = (0..n).map(|k| -span + (k as f64 + 0.5) * step).collect();
        let density: Vec<f64> =
            offsets.iter().map(|b| (-0.5 * (b / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt()) * step).collect();
        // The window only covers part of the line; keep the absolute mass
        // and put the remainder in a far-off packet that is never excited.
        let covered: f64 = density.iter().sum();
        let mut offsets = offsets;
        let mut weights = density;
        if covered < 1.0 {
            offsets.push(f64::INFINITY);
            weights.push(1.0 - covered);
        }
        Ok(Ensemble { offsets, weights })
    }
}

/// Complex echo signal sampled around the refocusing point.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoTransient {
    /// Absolute times from the first pulse (s).
    pub times: Vec<f64>,
    pub values: Vec<Complex<f64>>,
}

impl EchoTransient {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn peak_index(&self) -> usize {
        let m = self.magnitudes();
        (0..m.len()).fold(0, |best, k| if m[k] > m[best] { k } else { best })
    }

    /// Full width at half maximum of |V| (s), linearly interpolated.
    pub fn fwhm(&self) -> f64 {
        let m = self.magnitudes();
        let k = self.peak_index();
        let half = m[k] / 2.0;
        let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
            let mut prev = k;
            for i in range {
                if m[i] < half {
                    let f = (m[prev] - half) / (m[prev] - m[i]);
                    return Some(self.times[prev] + f * (self.times[i] - self.times[prev]));
                }
                prev = i;
            }
            None
        };
        let right = cross(&mut (k + 1..m.len()));
        let left = cross(&mut (0..k).rev());
        match (left, right) {
            (Some(l), Some(r)) => r - l,
            _ => f64::NAN,
        }
    }
}

/// Sampling window placed relative to the echo time 2*tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoWindow {
    /// Start relative to 2*tau (s), usually negative.
    pub start: f64,
    pub dt: f64,
    pub samples: usize,
}

impl EchoWindow {
    pub fn centered(half_width: f64, samples: usize) -> EchoWindow {
        let dt = 2.0 * half_width / (samples - 1) as f64;
        EchoWindow { start: -half_width, dt, samples }
    }

    pub fn index_of(&self, offset_from_echo: f64) -> usize {
        ((offset_from_echo - self.start) / self.dt).round().max(0.0) as usize
    }
}

/// Field offset (mT) to frequency offset (MHz).
pub fn field_to_mhz(offset_mt: f64, g_eff: f64) -> f64 {
    g_eff * CODATA_2018.mu_b_over_h() * offset_mt * 1e-3 * 1e-6
}

/// Echo coefficient |c| of one spin packet at `offset_mhz` for two
/// rectangular pulses, normalized so ideal pi/2 - pi gives 1.
///
/// Only the refocused coherence pathway is kept and its phase is dropped, so
/// every packet refocuses exactly at 2*tau.
pub fn packet_echo_coefficient(p1: &PulseSpec, p2: &PulseSpec, offset_mhz: f64, g_eff: f64) -> Result<f64> {
    let spin = Spin::HALF;
    let a = PulseSpec { carrier_offset: offset_mhz, ..*p1 };
    let b = PulseSpec { carrier_offset: offset_mhz, ..*p2 };
    let u1 = pulse_propagator(spin, &a, g_eff)?;
    let u2 = pulse_propagator(spin, &b, g_eff)?;
    let rho0 = polarized_state(spin);
    let rho1 = &u1 * rho0 * u1.adjoint();
    Ok(2.0 * u2[(0, 1)].norm_sqr() * rho1[(1, 0)].norm())
}

/// Two-pulse echo of an ensemble, sampled on `window` around t = 2*tau.
pub fn hahn_echo_transient(
    ensemble: &Ensemble,
    seq: &SequenceSpec,
    t2: f64,
    g_eff: f64,
    window: &EchoWindow,
) -> Result<EchoTransient> {
    if ensemble.offsets.is_empty() {
        return domain("empty spin-packet ensemble");
    }
    seq.validate()?;
    if seq.kind != SequenceKind::Hahn {
        return domain("hahn_echo_transient needs a two-pulse sequence");
    }
    if !(t2 > 0.0) {
        return domain("T2 must be positive");
    }
    let (p1, p2) = (&seq.pulses[0], &seq.pulses[1]);
    let decay = (-2.0 * seq.tau / t2).exp();
    let packets: Vec<(f64, f64)> = ensemble
        .offsets
        .iter()
        .zip(&ensemble.weights)
        .filter(|(b, w)| b.is_finite() && **w > 0.0)
        .map(|(&b, &w)| {
            let f = field_to_mhz(b, g_eff);
            packet_echo_coefficient(p1, p2, f, g_eff).map(|c| (2.0 * PI * f * 1e6, w * c * decay))
        })
        .collect::<Result<_>>()?;
    let echo = 2.0 * seq.tau;
    let mut times = Vec::with_capacity(window.samples);
    let mut values = Vec::with_capacity(window.samples);
    for k in 0..window.samples {
        let s = window.start + k as f64 * window.dt;
        let v = packets.iter().fold(Complex::new(0.0, 0.0), |acc, &(w, a)| acc + Complex::from_polar(a, w * s));
        times.push(echo + s);
        values.push(v);
    }
    Ok(EchoTransient { times, values })
}

/// Relative echo amplitudes A/A0 = exp(-2 tau / T2).
pub fn echo_decay_curve(taus: &[f64], t2: f64) -> Result<Vec<f64>> {
    if !(t2 > 0.0) {
        return domain("T2 must be positive");
    }
    if taus.iter().any(|t| !(*t > 0.0)) || taus.windows(2).any(|w| w[1] <= w[0]) {
        return domain("taus must be positive and ascending");
    }
    Ok(taus.iter().map(|t| (-2.0 * t / t2).exp()).collect())
}

/// Field-resolved decay map: one row per field offset (mT), one column per tau.
pub fn echo_decay_map(offsets_mt: &[f64], taus: &[f64], profile: &T2Profile) -> Result<Vec<Vec<f64>>> {
    offsets_mt.iter().map(|&b| echo_decay_curve(taus, profile.at(b))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub t2: f64,
    pub a0: f64,
    pub points_used: usize,
}

/// Fit of A(tau) = A0 exp(-2 tau / T2) to echo magnitudes.
///
/// Without `noise_sigma` this is a log-linear fit weighted by A^2. With it,
/// the magnitudes are treated as Rician: E[M^2] = A^2 + 2 sigma^2 holds
/// exactly, so A0 and T2 are refined by least squares on M^2 - 2 sigma^2
/// with weights from the model variance 4 sigma^2 A^2 + 4 sigma^4.
pub fn fit_decay(taus: &[f64], amplitudes: &[f64], noise_sigma: Option<f64>) -> Result<DecayFit> {
    if taus.len() != amplitudes.len() {
        return domain("taus and amplitudes differ in length");
    }
    let sigma2 = noise_sigma.map_or(0.0, |s| s * s);
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(amplitudes)
        .filter_map(|(&t, &m)| {
            let a2 = m * m - 2.0 * sigma2;
            (a2 > 0.0 && m > 0.0).then(|| (2.0 * t, a2.sqrt()))
        })
        .collect();
    let start = log_linear(&pts)?;
    if sigma2 == 0.0 {
        return Ok(start);
    }
    let data: Vec<(f64, f64)> = taus.iter().zip(amplitudes).map(|(&t, &m)| (2.0 * t, m * m - 2.0 * sigma2)).collect();
    let mut fit = DecayFit { points_used: data.len(), ..start };
    for _ in 0..4 {
        let weights: Vec<f64> = data
            .iter()
            .map(|&(x, _)| {
                let a2 = (fit.a0 * (-x / fit.t2).exp()).powi(2);
                1.0 / (4.0 * sigma2 * a2 + 4.0 * sigma2 * sigma2)
            })
            .collect();
        // for a fixed rate the best A0^2 is linear; search the rate on a log grid
        let profile = |t2: f64| -> (f64, f64) {
            let (mut sey, mut see) = (0.0, 0.0);
            for (&(x, y), w) in data.iter().zip(&weights) {
                let e = (-2.0 * x / t2).exp();
                sey += w * e * y;
                see += w * e * e;
            }
            let c = (sey / see).max(0.0);
            let cost = data.iter().zip(&weights).map(|(&(x, y), w)| w * (y - c * (-2.0 * x / t2).exp()).powi(2)).sum();
            (cost, c)
        };
        let (lo, hi) = ((fit.t2 / 10.0).ln(), (fit.t2 * 10.0).ln());
        let n = 400;
        let grid = |i: usize| (lo + (hi - lo) * i as f64 / n as f64).exp();
        let best = (0..=n).min_by(|&i, &j| profile(grid(i)).0.total_cmp(&profile(grid(j)).0)).unwrap_or(0);
        let (mut a, mut b) = (grid(best.saturating_sub(1)).ln(), grid((best + 1).min(n)).ln());
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - golden * (b - a);
            let d = a + golden * (b - a);
            if profile(c.exp()).0 < profile(d.exp()).0 {
                b = d;
            } else {
                a = c;
            }
        }
        let t2 = (0.5 * (a + b)).exp();
        let (_, c) = profile(t2);
        if !(c > 0.0) {
            return domain("decay fit found no signal above the noise");
        }
        fit = DecayFit { t2, a0: c.sqrt(), points_used: data.len() };
    }
    Ok(fit)
}

/// A^2-weighted fit of ln A against x = 2 tau.
fn log_linear(pts: &[(f64, f64)]) -> Result<DecayFit> {
    if pts.len() < 2 {
        return domain("fewer than two usable decay points");
    }
    // var(ln A) ~ sigma^2 / A^2, so weight by A^2
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, a) in pts {
        let w = a * a;
        let y = a.ln();
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let denom = sw * sxx - sx * sx;
    if denom.abs() < f64::MIN_POSITIVE {
        return domain("degenerate decay fit");
    }
    let slope = (sw * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / sw;
    if !(slope < 0.0) {
        return domain("decay fit found no decay");
    }
    Ok(DecayFit { t2: -1.0 / slope, a0: intercept.exp(), points_used: pts.len() })
}

/// Ideal three-pulse stimulated echo, 1/2 exp(-2 tau/T2) exp(-t_wait/T1).
pub fn stimulated_echo_amplitude(tau: f64, t_wait: f64, t1: f64, t2: f64) -> Result<f64> {
    if !(tau >= 0.0 && t_wait >= 0.0 && t1 > 0.0 && t2 > 0.0) {
        return domain("stimulated echo needs non-negative delays and positive T1, T2");
    }
    Ok(0.5 * (-2.0 * tau / t2).exp() * (-t_wait / t1).exp())
}
