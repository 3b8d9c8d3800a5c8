//! Sweep orchestration: field-swept echo spectra, field x tau maps, echo
//! decays and Mims ENDOR RF sweeps, plus the sensitivity figure of merit.
//!
//! Every sweep point draws its shots from a seed derived from
//! `(master_seed, flat point index)`, so parallel evaluation is bitwise
//! identical to serial evaluation.

mod dataset;

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use nalgebra::Complex;
use rayon::prelude::*;

pub use dataset::{DataAxis, Dataset};

use crate::constants::{resonance_field, CODATA_2018};
use crate::detection::{acquire_shots, quadrature_magnitude, NoiseModel, Trace};
use crate::error::{domain, Result};
use crate::pulses::excitation_window;
use crate::rng::derive_seed;
use crate::sequences::{endor_spectrum, stimulated_echo_amplitude, SequenceKind, SequenceSpec};
use crate::spinsys::{Euler, NuclearSpecies, SpinSystem, DEFAULT_MOMENT_FLOOR};
use crate::thermal::thermal_populations;
use crate::warning::Warning;

/// Upper field limit of the superconducting magnet (T).
pub const DEFAULT_MAGNET_LIMIT: f64 = 12.5;
/// Gaussian FWHM of ENDOR lines (MHz) unless configured otherwise.
pub const DEFAULT_ENDOR_LINEWIDTH: f64 = 0.05;
/// Largest Hilbert space diagonalized per sweep point.
pub const DEFAULT_SWEEP_DIM: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Field,
    Tau,
    Rf,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Field => "field",
            AxisKind::Tau => "tau",
            AxisKind::Rf => "rf",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            AxisKind::Field => "T",
            AxisKind::Tau => "s",
            AxisKind::Rf => "MHz",
        }
    }

    pub fn from_name(name: &str) -> Option<AxisKind> {
        match name {
            "field" => Some(AxisKind::Field),
            "tau" => Some(AxisKind::Tau),
            "rf" => Some(AxisKind::Rf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(kind: AxisKind, values: Vec<f64>) -> SweepAxis {
        SweepAxis { kind, values }
    }

    /// `points` equally spaced values from `start` to `stop` inclusive.
    pub fn linspace(kind: AxisKind, start: f64, stop: f64, points: usize) -> Result<SweepAxis> {
        if points == 0 {
            return domain("a sweep axis needs at least one point");
        }
        if points == 1 {
            return Ok(SweepAxis::new(kind, vec![start]));
        }
        let step = (stop - start) / (points - 1) as f64;
        Ok(SweepAxis::new(kind, (0..points).map(|i| start + step * i as f64).collect()))
    }

    fn data_axis(&self) -> DataAxis {
        DataAxis::new(self.kind.name(), self.kind.unit(), self.values.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
    pub shots_per_point: usize,
    /// s
    pub repetition_time: f64,
    pub master_seed: u64,
    /// Fixed cost per sweep point (s), e.g. field settling.
    pub point_overhead: f64,
}

impl SweepPlan {
    pub fn new(axis1: SweepAxis, shots_per_point: usize, repetition_time: f64, master_seed: u64) -> SweepPlan {
        SweepPlan { axis1, axis2: None, shots_per_point, repetition_time, master_seed, point_overhead: 0.0 }
    }

    pub fn with_axis2(mut self, axis: SweepAxis) -> SweepPlan {
        self.axis2 = Some(axis);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for axis in std::iter::once(&self.axis1).chain(&self.axis2) {
            if axis.values.is_empty() {
                return domain(format!("{} axis is empty", axis.kind.name()));
            }
            if axis.values.iter().any(|v| !v.is_finite()) || axis.values.windows(2).any(|w| w[1] <= w[0]) {
                return domain(format!("{} grid must be finite and strictly ascending", axis.kind.name()));
            }
        }
        if let Some(a2) = &self.axis2 {
            if a2.kind == self.axis1.kind {
                return domain("the two sweep axes must differ");
            }
        }
        if self.shots_per_point == 0 {
            return domain("shots_per_point must be at least 1");
        }
        if !(self.repetition_time > 0.0) || !(self.point_overhead >= 0.0) {
            return domain("repetition time must be positive and overhead non-negative");
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn warnings(&self, t1: f64) -> Vec<Warning> {
        shot_plan(self.points(), self.shots_per_point, self.repetition_time, self.point_overhead, Some(t1)).warnings
    }

    fn axes(&self) -> Vec<DataAxis> {
        std::iter::once(&self.axis1).chain(&self.axis2).map(SweepAxis::data_axis).collect()
    }
}

/// Instrument settings shared by every sweep kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditions {
    /// Microwave carrier (GHz).
    pub carrier: f64,
    /// K
    pub temperature: f64,
    /// Orientation of the crystal frame relative to the field.
    pub orientation: Euler,
    /// T
    pub magnet_limit: f64,
    /// Fixed field (T) for tau and RF sweeps; the line center when `None`.
    pub field: Option<f64>,
    /// Subtract the Rayleigh floor from averaged magnitudes.
    pub subtract_floor: bool,
    /// ENDOR line FWHM (MHz).
    pub endor_linewidth: f64,
    pub moment_floor: f64,
    /// Hilbert-space budget per field point; see [`reduced_for_sweep`].
    pub max_dim: usize,
}

impl Conditions {
    pub fn new(carrier: f64, temperature: f64) -> Conditions {
        Conditions {
            carrier,
            temperature,
            orientation: Euler::default(),
            magnet_limit: DEFAULT_MAGNET_LIMIT,
            field: None,
            subtract_floor: true,
            endor_linewidth: DEFAULT_ENDOR_LINEWIDTH,
            moment_floor: DEFAULT_MOMENT_FLOOR,
            max_dim: DEFAULT_SWEEP_DIM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier > 0.0) || !(self.temperature > 0.0) || !(self.magnet_limit > 0.0) {
            return domain("carrier, temperature and magnet limit must be positive");
        }
        if !(self.endor_linewidth > 0.0) {
            return domain("ENDOR line width must be positive");
        }
        if let Some(b) = self.field {
            self.check_field(b)?;
        }
        Ok(())
    }

    fn check_field(&self, b: f64) -> Result<()> {
        if !(0.0..=self.magnet_limit).contains(&b) {
            return domain(format!("field {b} T outside magnet range 0-{} T", self.magnet_limit));
        }
        Ok(())
    }
}

/// Field (T) where the g-center of `system` resonates at the carrier.
pub fn line_center(system: &SpinSystem, cond: &Conditions) -> f64 {
    resonance_field(system.g_eff(cond.orientation), cond.carrier)
}

/// System that fits in `max_dim`: nuclear species are kept in order of
/// decreasing coupling while they fit, and the unresolved splitting of the
/// rest is folded into the Gaussian linewidth through its second moment,
/// A^2 I(I+1)/3 per site.
pub fn reduced_for_sweep(system: &SpinSystem, g_eff: f64, max_dim: usize) -> SpinSystem {
    if system.hilbert_dim() <= max_dim {
        return system.clone();
    }
    let score = |n: &NuclearSpecies| n.sites().map(|s| s.a.abs()).fold(0.0, f64::max) * n.spin.value();
    let mut order: Vec<&NuclearSpecies> = system.nuclei.iter().collect();
    order.sort_by(|a, b| score(b).total_cmp(&score(a)));
    let mut dim = system.electron.spin.multiplicity();
    let mut kept = Vec::new();
    let mut variance = 0.0;
    for n in order {
        let d = n.spin.multiplicity().checked_pow(n.multiplicity as u32).and_then(|m| m.checked_mul(dim));
        match d {
            Some(d) if d <= max_dim => {
                dim = d;
                kept.push(n.clone());
            }
            _ => variance += n.sites().map(|s| s.a * s.a * s.spin.casimir() / 3.0).sum::<f64>(),
        }
    }
    let mhz_per_mt = g_eff.abs() * CODATA_2018.mu_b_over_h() * 1e-9;
    let extra = (8.0 * LN_2).sqrt() * variance.sqrt() / mhz_per_mt;
    let mut reduced = system.clone();
    reduced.nuclei = kept;
    reduced.electron.linewidth_fwhm = reduced.electron.linewidth_fwhm.hypot(extra);
    reduced
}

/// Population-difference and amplitude shares of each fine-structure
/// transition, summed over nuclear sublevels, sorted by amplitude share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineStructureShare {
    pub ms_lo: f64,
    pub ms_hi: f64,
    pub weight_share: f64,
    pub amplitude_share: f64,
}

pub fn fine_structure_shares(system: &SpinSystem, cond: &Conditions, b0: f64) -> Result<Vec<FineStructureShare>> {
    let system = &reduced_for_sweep(system, system.g_eff(cond.orientation), cond.max_dim);
    let diagram = system.level_diagram(b0, cond.orientation)?;
    let pops = thermal_populations(diagram.levels(), cond.temperature)?;
    let transitions = diagram.transitions(&pops, None, cond.moment_floor)?;
    let mut groups: BTreeMap<(i64, i64), (f64, f64)> = BTreeMap::new();
    for t in transitions.iter().filter(|t| t.weight > 0.0) {
        let (lo, hi) = t.ms_label();
        let key = ((2.0 * lo) as i64, (2.0 * hi) as i64);
        let e = groups.entry(key).or_default();
        e.0 += t.weight;
        e.1 += t.moment * t.weight;
    }
    let (wt, at) = groups.values().fold((0.0, 0.0), |(a, b), (w, m)| (a + w, b + m));
    if !(wt > 0.0) {
        return domain("no thermally weighted transitions");
    }
    let mut out: Vec<FineStructureShare> = groups
        .into_iter()
        .map(|((lo, hi), (w, m))| FineStructureShare {
            ms_lo: lo as f64 / 2.0,
            ms_hi: hi as f64 / 2.0,
            weight_share: w / wt,
            amplitude_share: m / at,
        })
        .collect();
    out.sort_by(|a, b| b.amplitude_share.total_cmp(&a.amplitude_share));
    Ok(out)
}

/// Fraction of a Gaussian line (FWHM `fwhm`, centered `offset` away) inside
/// an excitation window of full width `window`, all in mT.
pub fn window_overlap(offset: f64, window: f64, fwhm: f64) -> f64 {
    if !(fwhm > 0.0) {
        return if offset.abs() <= window / 2.0 { 1.0 } else { 0.0 };
    }
    let k = (4.0 * LN_2).sqrt() / fwhm;
    0.5 * (libm::erf((offset + window / 2.0) * k) - libm::erf((offset - window / 2.0) * k))
}

/// Noise-free echo amplitude (spins) at field `b0` before relaxation: sum over
/// transitions of spins x 4|Sx|^2 x weight x window overlap, times the
/// on-resonance echo factor of the sequence.
pub fn ese_amplitude(system: &SpinSystem, cond: &Conditions, seq: &SequenceSpec, b0: f64) -> Result<f64> {
    cond.check_field(b0)?;
    let g = system.g_eff(cond.orientation);
    let system = &reduced_for_sweep(system, g, cond.max_dim);
    let diagram = system.level_diagram(b0, cond.orientation)?;
    let pops = thermal_populations(diagram.levels(), cond.temperature)?;
    let window = excitation_window(seq.longest_pulse(), g);
    let fwhm = system.electron.linewidth_fwhm;
    let mut sum = 0.0;
    for t in diagram.transitions(&pops, Some(cond.carrier), cond.moment_floor)? {
        let Some(br) = t.field_resonant else { continue };
        sum += 4.0 * t.moment * t.weight * window_overlap((b0 - br) * 1e3, window, fwhm);
    }
    Ok(system.spins_count * sum * seq.echo_factor(g).abs())
}

/// Relaxation factor of the echo for delay `tau`, at `offset_mt` from the line center.
pub fn relaxation_factor(system: &SpinSystem, seq: &SequenceSpec, tau: f64, offset_mt: f64) -> Result<f64> {
    let t2 = system.electron.t2.at(offset_mt);
    match seq.kind {
        SequenceKind::Hahn => {
            if !(t2 > 0.0) || !(tau >= 0.0) {
                return domain("echo decay needs positive T2 and non-negative tau");
            }
            Ok((-2.0 * tau / t2).exp())
        }
        SequenceKind::Stimulated | SequenceKind::MimsEndor => {
            stimulated_echo_amplitude(tau, seq.t_wait, system.electron.t1, t2)
        }
    }
}

/// Noise-free detected echo amplitude at `b0` for the sequence's own tau.
pub fn ese_signal(system: &SpinSystem, cond: &Conditions, seq: &SequenceSpec, b0: f64) -> Result<f64> {
    let center = line_center(system, cond);
    Ok(ese_amplitude(system, cond, seq, b0)? * relaxation_factor(system, seq, seq.tau, (b0 - center) * 1e3)?)
}

/// Averaged magnitude of `shots` detected shots of a constant echo amplitude.
/// A noise-free model bypasses the phase rotation so the result does not
/// depend on the seed even at the last bit.
pub fn measure_point(amplitude: f64, noise: &NoiseModel, seed: u64, shots: usize, subtract_floor: bool) -> f64 {
    if noise.sigma == 0.0 {
        return amplitude.abs();
    }
    let trace = Trace::constant(Complex::new(amplitude, 0.0), 1);
    let records = acquire_shots(&trace, noise, seed, shots);
    let mean = records.iter().map(|r| quadrature_magnitude(r)[0]).sum::<f64>() / shots as f64;
    if subtract_floor {
        mean - noise.rayleigh_floor()
    } else {
        mean
    }
}

fn prepare(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<()> {
    system.validate()?;
    cond.validate()?;
    plan.validate()?;
    seq.validate()?;
    noise.validate()?;
    for axis in std::iter::once(&plan.axis1).chain(&plan.axis2) {
        match axis.kind {
            AxisKind::Field => {
                for &b in &axis.values {
                    cond.check_field(b)?;
                }
            }
            AxisKind::Tau if axis.values[0] < 0.0 => return domain("tau grid must be non-negative"),
            AxisKind::Rf if axis.values[0] < 0.0 => return domain("RF grid must be non-negative"),
            _ => {}
        }
    }
    Ok(())
}

fn metadata(
    mode: &str,
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    noise: &NoiseModel,
) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(format!("acquisition.{k}"), v);
    };
    put("mode", mode.to_string());
    put("line_center", format!("{} T", line_center(system, cond)));
    put("master_seed", plan.master_seed.to_string());
    put("shots_per_point", plan.shots_per_point.to_string());
    put("floor_subtracted", cond.subtract_floor.to_string());
    put("rayleigh_floor", noise.rayleigh_floor().to_string());
    put("seed_derivation", "splitmix64(master, point)".to_string());
    for (i, w) in plan.warnings(system.electron.t1).iter().enumerate() {
        put(&format!("warning.{i}"), w.to_string());
    }
    m
}

fn detect_all(amplitudes: &[f64], plan: &SweepPlan, noise: &NoiseModel, cond: &Conditions) -> Vec<f64> {
    amplitudes
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            measure_point(a, noise, derive_seed(plan.master_seed, i as u64), plan.shots_per_point, cond.subtract_floor)
        })
        .collect()
}

/// Echo-detected field sweep at fixed carrier. `plan.axis1` must be the field.
pub fn field_sweep_ese(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<Dataset> {
    if plan.axis1.kind != AxisKind::Field || plan.axis2.is_some() {
        return domain("field sweep needs a single field axis");
    }
    prepare(system, cond, plan, seq, noise)?;
    let signal: Vec<f64> =
        plan.axis1.values.par_iter().map(|&b| ese_signal(system, cond, seq, b)).collect::<Result<_>>()?;
    let values = detect_all(&signal, plan, noise, cond);
    Dataset::new(plan.axes(), values, metadata("field_sweep", system, cond, plan, noise))
}

/// Field x tau echo map: each row is the tau decay at one field.
pub fn scan_2d(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<Dataset> {
    let taus = match &plan.axis2 {
        Some(a) if plan.axis1.kind == AxisKind::Field && a.kind == AxisKind::Tau => &a.values,
        _ => return domain("2D scan needs a field axis followed by a tau axis"),
    };
    prepare(system, cond, plan, seq, noise)?;
    let center = line_center(system, cond);
    let rows: Vec<Vec<f64>> = plan
        .axis1
        .values
        .par_iter()
        .map(|&b| {
            let a0 = ese_amplitude(system, cond, seq, b)?;
            taus.iter().map(|&t| Ok(a0 * relaxation_factor(system, seq, t, (b - center) * 1e3)?)).collect()
        })
        .collect::<Result<_>>()?;
    let signal: Vec<f64> = rows.into_iter().flatten().collect();
    let values = detect_all(&signal, plan, noise, cond);
    Dataset::new(plan.axes(), values, metadata("scan_2d", system, cond, plan, noise))
}

/// Echo amplitude against tau at the fixed field of `cond`.
pub fn echo_decay_sweep(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<Dataset> {
    if plan.axis1.kind != AxisKind::Tau || plan.axis2.is_some() {
        return domain("echo decay needs a single tau axis");
    }
    prepare(system, cond, plan, seq, noise)?;
    let center = line_center(system, cond);
    let b = cond.field.unwrap_or(center);
    let a0 = ese_amplitude(system, cond, seq, b)?;
    let signal: Vec<f64> = plan
        .axis1
        .values
        .iter()
        .map(|&t| Ok(a0 * relaxation_factor(system, seq, t, (b - center) * 1e3)?))
        .collect::<Result<_>>()?;
    let values = detect_all(&signal, plan, noise, cond);
    let mut meta = metadata("echo_decay", system, cond, plan, noise);
    meta.insert("acquisition.field".into(), format!("{b} T"));
    Dataset::new(plan.axes(), values, meta)
}

/// Mims ENDOR: stimulated echo magnitude against RF frequency, at the fixed
/// field of `cond`. A positive line amplitude reduces the echo.
pub fn endor_sweep(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<Dataset> {
    if plan.axis1.kind != AxisKind::Rf || plan.axis2.is_some() {
        return domain("ENDOR sweep needs a single RF axis");
    }
    let Some(rf) = seq.rf.as_ref().filter(|_| seq.kind == SequenceKind::MimsEndor) else {
        return domain("ENDOR sweep needs a mims_endor sequence");
    };
    prepare(system, cond, plan, seq, noise)?;
    let b = cond.field.unwrap_or_else(|| line_center(system, cond));
    let g = system.g_eff(cond.orientation);
    let echo = ese_signal(system, cond, seq, b)?;
    let spectrum = endor_spectrum(
        &system.electron,
        g,
        &system.nuclei,
        b,
        cond.carrier,
        seq.tau,
        cond.temperature,
        &plan.axis1.values,
        cond.endor_linewidth,
    )?;
    let signal: Vec<f64> = spectrum.values.iter().map(|v| echo * (1.0 - rf.inversion * v)).collect();
    let values = detect_all(&signal, plan, noise, cond);
    let mut meta = metadata("endor", system, cond, plan, noise);
    meta.insert("acquisition.field".into(), format!("{b} T"));
    meta.insert("acquisition.reference_echo".into(), echo.to_string());
    meta.insert("acquisition.nuclear_larmor".into(), format!("{} MHz", spectrum.larmor));
    Dataset::new(plan.axes(), values, meta)
}

/// Run whichever sweep the plan's axes describe.
pub fn run_plan(
    system: &SpinSystem,
    cond: &Conditions,
    plan: &SweepPlan,
    seq: &SequenceSpec,
    noise: &NoiseModel,
) -> Result<Dataset> {
    match (plan.axis1.kind, plan.axis2.as_ref().map(|a| a.kind)) {
        (AxisKind::Field, None) => field_sweep_ese(system, cond, plan, seq, noise),
        (AxisKind::Field, Some(AxisKind::Tau)) => scan_2d(system, cond, plan, seq, noise),
        (AxisKind::Tau, None) => echo_decay_sweep(system, cond, plan, seq, noise),
        (AxisKind::Rf, None) => endor_sweep(system, cond, plan, seq, noise),
        (a, b) => domain(format!("unsupported sweep axes {} x {}", a.name(), b.map_or("none", |k| k.name()))),
    }
}

/// Indices of strict local maxima above `threshold` x the global maximum.
pub fn local_maxima(values: &[f64], threshold: f64) -> Vec<usize> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i + 1 == n || values[i] >= values[i + 1];
            left && right && values[i] > threshold * max
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityInput {
    pub n_spins: f64,
    pub fraction_excited: f64,
    pub snr_single_shot: f64,
    /// s
    pub tau: f64,
    /// s
    pub t2: f64,
}

impl SensitivityInput {
    pub fn new(
        n_spins: f64,
        fraction_excited: f64,
        snr_single_shot: f64,
        tau: f64,
        t2: f64,
    ) -> Result<SensitivityInput> {
        let input = SensitivityInput { n_spins, fraction_excited, snr_single_shot, tau, t2 };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.n_spins, self.fraction_excited, self.snr_single_shot, self.t2];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !(self.tau >= 0.0) {
            return domain("sensitivity inputs must be positive");
        }
        if self.fraction_excited > 1.0 {
            return domain("excited fraction cannot exceed 1");
        }
        Ok(())
    }
}

/// Absolute pulsed sensitivity (spins): (N f / SNR) exp(-2 tau / T2).
pub fn sensitivity(input: &SensitivityInput) -> f64 {
    input.n_spins * input.fraction_excited / input.snr_single_shot * (-2.0 * input.tau / input.t2).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotPlan {
    /// s
    pub wall_time: f64,
    pub warnings: Vec<Warning>,
}

/// Wall time of `points` x `shots` shots at `repetition_time`, plus a fixed
/// per-point overhead. Warns when the repetition is shorter than 3 T1.
pub fn shot_plan(points: usize, shots: usize, repetition_time: f64, point_overhead: f64, t1: Option<f64>) -> ShotPlan {
    let wall_time = points as f64 * (shots as f64 * repetition_time + point_overhead);
    let warnings = match t1 {
        Some(t1) if repetition_time < 3.0 * t1 => vec![Warning::RepetitionTooShort { repetition_time, t1 }],
        _ => vec![],
    };
    ShotPlan { wall_time, warnings }
}
