//! Typed experiment configuration built from a parsed document, with
//! cross-validation and canonical re-emission.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::dataset_io::OutputFormat;
use super::syntax::{parse_document, ParseError, Section, Span};
use super::units::{lookup, number_prefix, parse_number, parse_quantity, unit_list};
use crate::acquisition::{run_plan, AxisKind, Conditions, Dataset, SweepAxis, SweepPlan};
use crate::detection::{NoiseModel, PhaseMode};
use crate::pulses::{duration_for_angle, Polarization, PulseSpec};
use crate::resonator::ResonatorModel;
use crate::sequences::{RfPulse, SequenceKind, SequenceSpec};
use crate::spinsys::{ElectronSpin, Euler, NuclearSpecies, Spin, SpinSystem, T2Profile};
use crate::warning::Warning;

/// Bumped whenever a default below changes.
pub const DEFAULTS_VERSION: u32 = 1;

/// Value used for every key left out of a file.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("system.name", "sample"),
    ("system.spins", "1e12"),
    ("system.temperature", "5 K"),
    ("system.orientation", "0 rad, 0 rad, 0 rad"),
    ("electron.spin", "1/2"),
    ("electron.g_euler", "0 rad, 0 rad, 0 rad"),
    ("electron.d", "0 MHz"),
    ("electron.e", "0 MHz"),
    ("electron.linewidth", "1 mT"),
    ("electron.t1", "1 ms"),
    ("electron.t2", "1 us"),
    ("nucleus.a", "0 MHz"),
    ("nucleus.p", "0 MHz"),
    ("nucleus.count", "1"),
    ("nucleus.spread", "0 MHz @ 0 MHz per site"),
    ("resonator.freq", "sequence carrier"),
    ("resonator.halfwaves", "6"),
    ("resonator.waist", "1.5 mm"),
    ("resonator.mesh", "0.005"),
    ("resonator.loss", "0.07"),
    ("resonator.q", "from mesh and loss"),
    ("resonator.power", "30 mW"),
    ("resonator.polarization", "linear"),
    ("sequence.kind", "hahn"),
    ("sequence.t_wait", "0 s for hahn, 2 us otherwise"),
    ("sequence.p1", "pi/2 at resonator B1"),
    ("sequence.p2", "pi at resonator B1 for hahn, pi/2 otherwise"),
    ("sequence.p3", "pi/2 at resonator B1"),
    ("sequence.rf_duration", "10 us"),
    ("sequence.rf_power", "1 W"),
    ("sequence.rf_inversion", "1"),
    ("sequence.b1_override", "false"),
    ("noise.sigma", "0"),
    ("noise.phase", "uniform"),
    ("noise.phase_angle", "0 rad"),
    ("noise.walk_rate", "0"),
    ("sweep.shots", "1"),
    ("sweep.repetition", "10 ms"),
    ("sweep.seed", "0"),
    ("sweep.overhead", "0 s"),
    ("sweep.fixed_field", "line center"),
    ("sweep.magnet_limit", "12.5 T"),
    ("sweep.subtract_floor", "true"),
    ("sweep.endor_width", "0.05 MHz"),
    ("output.format", "csv"),
];

/// Allowed overshoot of a pulse's B1 over what the resonator delivers.
pub const B1_TOLERANCE: f64 = 0.2;

const KEYS: &[(&str, &[&str])] = &[
    ("system", &["name", "spins", "temperature", "orientation"]),
    ("electron", &["spin", "g", "g_euler", "d", "e", "linewidth", "t1", "t2", "t2_profile"]),
    ("nucleus", &["label", "spin", "gn", "a", "p", "count", "spread"]),
    ("resonator", &["freq", "halfwaves", "waist", "mesh", "loss", "q", "power", "polarization"]),
    (
        "sequence",
        &[
            "kind",
            "carrier",
            "tau",
            "t_wait",
            "p1",
            "p2",
            "p3",
            "rf_duration",
            "rf_power",
            "rf_inversion",
            "b1_override",
        ],
    ),
    ("noise", &["sigma", "phase", "phase_angle", "walk_rate"]),
    (
        "sweep",
        &[
            "field",
            "tau",
            "rf",
            "shots",
            "repetition",
            "seed",
            "overhead",
            "fixed_field",
            "magnet_limit",
            "subtract_floor",
            "endor_width",
        ],
    ),
    ("output", &["format", "path"]),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SpinSystem,
    pub resonator: ResonatorModel,
    pub sequence: SequenceSpec,
    pub noise: NoiseModel,
    pub plan: SweepPlan,
    pub conditions: Conditions,
    pub outputs: Vec<OutputSpec>,
    /// Accept pulses needing more B1 than the resonator delivers.
    pub b1_override: bool,
    /// Non-fatal findings of the cross-check.
    pub warnings: Vec<Warning>,
}

// ---- typed value readers ----

fn quantity(span: Span, unit: &str) -> Result<f64, ParseError> {
    let target = lookup(unit).expect("known target unit");
    let q = parse_quantity(span.text).map_err(|e| span.error_at(e.offset, e.message))?;
    match q.unit {
        None => Err(span.error(format!(
            "`{}` needs a unit of {} ({})",
            span.text,
            target.dimension.name(),
            unit_list(target.dimension.units())
        ))),
        Some(u) if u.dimension != target.dimension => {
            let offset = span.text.chars().count() - u.symbol.chars().count();
            Err(span.error_at(
                offset,
                format!(
                    "unit `{}` is a {}, expected {} ({})",
                    u.symbol,
                    u.dimension.name(),
                    target.dimension.name(),
                    unit_list(target.dimension.units())
                ),
            ))
        }
        Some(u) => Ok(u.convert(q.magnitude, target)),
    }
}

fn plain_number(span: Span) -> Result<f64, ParseError> {
    parse_number(span.text).ok_or_else(|| {
        if number_prefix(span.text) > 0 {
            span.error_at(number_prefix(span.text), "expected a plain number without unit")
        } else {
            span.error(format!("expected a decimal number, found `{}`", span.text))
        }
    })
}

fn integer(span: Span) -> Result<u64, ParseError> {
    if span.text.is_empty() || !span.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(span.error(format!("expected a non-negative integer, found `{}`", span.text)));
    }
    span.text.parse().map_err(|_| span.error("integer out of range"))
}

fn boolean(span: Span) -> Result<bool, ParseError> {
    match span.text {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(span.error(format!("expected `true` or `false`, found `{other}`"))),
    }
}

fn word<'a>(span: Span, choices: &[&'a str]) -> Result<&'a str, ParseError> {
    choices
        .iter()
        .find(|c| **c == span.text)
        .copied()
        .ok_or_else(|| span.error(format!("expected one of {}, found `{}`", choices.join(", "), span.text)))
}

fn spin(span: Span) -> Result<Spin, ParseError> {
    let twice = match span.text.split_once('/') {
        Some((n, "2")) if !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) => n.parse::<u32>().ok(),
        Some(_) => None,
        None => parse_number(span.text).and_then(|v| {
            let t = 2.0 * v;
            (t.fract() == 0.0 && t > 0.0 && t <= 64.0).then_some(t as u32)
        }),
    };
    twice
        .and_then(|t| Spin::from_twice(t).ok())
        .ok_or_else(|| span.error(format!("`{}` is not a spin (1/2, 1, 3/2, ... up to 32)", span.text)))
}

fn list(span: Span, unit: &str, len: Option<usize>) -> Result<Vec<f64>, ParseError> {
    let items: Vec<f64> = span.split(',').into_iter().map(|s| quantity(s, unit)).collect::<Result<_, _>>()?;
    match len {
        Some(n) if items.len() != n => {
            Err(span.error(format!("expected {n} comma-separated values, found {}", items.len())))
        }
        _ => Ok(items),
    }
}

fn pairs(span: Span, unit_x: &str, unit_y: &str) -> Result<Vec<(f64, f64)>, ParseError> {
    span.split(',')
        .into_iter()
        .map(|item| {
            let (x, y) = item.split_once("@").ok_or_else(|| item.error("expected `value @ value`"))?;
            Ok((quantity(x, unit_x)?, quantity(y, unit_y)?))
        })
        .collect()
}

fn grid(span: Span, unit: &str) -> Result<Vec<f64>, ParseError> {
    let Some((start, rest)) = span.split_once("..") else {
        return list(span, unit, None);
    };
    let (stop, count) = rest.split_once("/").ok_or_else(|| rest.error("expected `start .. stop / points`"))?;
    let (a, b, n) = (quantity(start, unit)?, quantity(stop, unit)?, integer(count)?);
    if n == 0 || n > 1_000_000 {
        return Err(count.error("point count must be between 1 and 1000000"));
    }
    if n == 1 && a != b {
        return Err(count.error("a one-point range needs start = stop"));
    }
    Ok(SweepAxis::linspace(AxisKind::Field, a, b, n as usize).expect("n >= 1").values)
}

/// Pulse as written: duration, then optionally an angle or a nominal B1, then a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PulseRequest {
    Default,
    Power { duration: f64, phase: f64 },
    Angle { duration: f64, angle: f64, phase: f64 },
    Field { duration: f64, b1: f64, phase: f64 },
}

fn pulse(span: Span) -> Result<PulseRequest, ParseError> {
    let parts = span.split(',');
    if parts.len() > 3 {
        return Err(span.error("a pulse is `duration[, angle | B1][, phase]`"));
    }
    let duration = quantity(parts[0], "s")?;
    let phase = parts.get(2).map(|p| quantity(*p, "rad")).transpose()?.unwrap_or(0.0);
    let Some(second) = parts.get(1) else {
        return Ok(PulseRequest::Power { duration, phase });
    };
    match parse_quantity(second.text).ok().and_then(|q| q.unit) {
        Some(u) if u.symbol == "T" || u.symbol == "mT" => {
            Ok(PulseRequest::Field { duration, b1: quantity(*second, "mT")?, phase })
        }
        _ => Ok(PulseRequest::Angle { duration, angle: quantity(*second, "rad")?, phase }),
    }
}

struct Reader<'s, 'a> {
    section: &'s Section<'a>,
    errors: &'s mut Vec<ParseError>,
}

impl<'s, 'a> Reader<'s, 'a> {
    fn span(&self, key: &str) -> Option<Span<'a>> {
        span_of(self.section, key)
    }

    fn read<T>(&mut self, key: &str, f: impl FnOnce(Span<'a>) -> Result<T, ParseError>) -> Option<T> {
        let span = self.span(key)?;
        match f(span) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(e);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, f: impl FnOnce(Span<'a>) -> Result<T, ParseError>) -> Option<T> {
        if self.span(key).is_none() {
            self.errors
                .push(self.section.header.error(format!("missing required key `{key}` in [{}]", self.section.name)));
            return None;
        }
        self.read(key, f)
    }

    fn q(&mut self, key: &str, unit: &str) -> Option<f64> {
        self.read(key, |s| quantity(s, unit))
    }

    fn num(&mut self, key: &str) -> Option<f64> {
        self.read(key, plain_number)
    }

    fn int(&mut self, key: &str) -> Option<u64> {
        self.read(key, integer)
    }
}

fn span_of<'a>(section: &Section<'a>, key: &str) -> Option<Span<'a>> {
    section.entries.iter().find(|e| e.key.text == key).map(|e| e.value)
}

fn check_keys(section: &Section, errors: &mut Vec<ParseError>) {
    let allowed = KEYS.iter().find(|(s, _)| *s == section.name).map_or(&[][..], |k| k.1);
    for e in &section.entries {
        if !allowed.contains(&e.key.text) {
            errors.push(e.key.error(format!(
                "unknown key `{}` in [{}]; valid keys are {}",
                e.key.text,
                section.name,
                allowed.join(", ")
            )));
        }
    }
}

fn euler(v: Vec<f64>) -> Euler {
    Euler::new(v[0], v[1], v[2])
}

/// Parse and cross-validate an experiment file. Either a complete config or
/// every error found.
pub fn parse_experiment(source: &str) -> Result<ExperimentConfig, Vec<ParseError>> {
    let (sections, mut errors) = parse_document(source);
    let syntax_failed = !errors.is_empty();
    for s in &sections {
        check_keys(s, &mut errors);
    }
    let top = Span { text: source.lines().next().unwrap_or(""), line: 1, column: 1 };
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    for required in ["electron", "sequence", "sweep"] {
        if find(required).is_none() && !syntax_failed {
            errors.push(ParseError {
                line: 1,
                column: 1,
                message: format!("missing required section [{required}]"),
                snippet: top.text.to_string(),
            });
        }
    }
    let empty = Section { name: "", header: top, entries: vec![] };

    // [system]
    let sys_sec = find("system").unwrap_or(&empty);
    let mut r = Reader { section: sys_sec, errors: &mut errors };
    let name = r.read("name", |s| Ok(s.text.to_string())).unwrap_or_else(|| "sample".into());
    let spins_count = r.num("spins").unwrap_or(1e12);
    let temperature = r.q("temperature", "K").unwrap_or(5.0);
    let orientation = r.read("orientation", |s| list(s, "rad", Some(3))).map(euler).unwrap_or_default();

    // [electron]
    let el_sec = find("electron").unwrap_or(&empty);
    let mut r = Reader { section: el_sec, errors: &mut errors };
    let e_spin = r.read("spin", spin).unwrap_or(Spin::HALF);
    let g = if el_sec.name.is_empty() {
        None
    } else {
        r.required("g", |s| {
            let v = s.split(',').into_iter().map(plain_number).collect::<Result<Vec<_>, _>>()?;
            if v.iter().any(|g| !(*g > 0.0)) {
                return Err(s.error("g principal values must be positive"));
            }
            match v.len() {
                1 => Ok([v[0]; 3]),
                3 => Ok([v[0], v[1], v[2]]),
                n => Err(s.error(format!("g takes 1 or 3 principal values, found {n}"))),
            }
        })
    };
    let g_orientation = r.read("g_euler", |s| list(s, "rad", Some(3))).map(euler).unwrap_or_default();
    let d = r.q("d", "MHz").unwrap_or(0.0);
    let e = r.q("e", "MHz").unwrap_or(0.0);
    let linewidth = r.q("linewidth", "mT").unwrap_or(1.0);
    let t1 = r.q("t1", "s").unwrap_or(1e-3);
    let t2_const = r.q("t2", "s");
    let t2_profile = r.read("t2_profile", |s| {
        let pts = pairs(s, "s", "mT")?;
        T2Profile::from_points(pts.into_iter().map(|(t, b)| (b, t)).collect()).map_err(|e| s.error(e.to_string()))
    });
    if t2_const.is_some() && t2_profile.is_some() {
        errors.push(el_sec.header.error("give either t2 or t2_profile, not both"));
    }
    let t2 = t2_profile.unwrap_or_else(|| T2Profile::constant(t2_const.unwrap_or(1e-6)));

    // [nucleus]*
    let mut nuclei = Vec::new();
    for sec in sections.iter().filter(|s| s.name == "nucleus") {
        let mut r = Reader { section: sec, errors: &mut errors };
        let label = r.read("label", |s| Ok(s.text.to_string())).unwrap_or_else(|| format!("n{}", nuclei.len()));
        let n_spin = r.required("spin", spin);
        let gn = r.required("gn", plain_number);
        let a = r.q("a", "MHz").unwrap_or(0.0);
        let p = r.q("p", "MHz").unwrap_or(0.0);
        let count = r.int("count").unwrap_or(1);
        let spread = r.read("spread", |s| pairs(s, "MHz", "MHz"));
        if !(1..=64).contains(&count) {
            if let Some(s) = r.span("count") {
                r.errors.push(s.error("count must be between 1 and 64"));
            }
            continue;
        }
        let (Some(n_spin), Some(gn)) = (n_spin, gn) else { continue };
        if n_spin.twice() == 1 && p != 0.0 {
            let at = r.span("p").expect("p was read");
            r.errors.push(at.error("quadrupole coupling p requires nuclear spin >= 1"));
            continue;
        }
        if let Some(s) = spread.as_ref().filter(|s| s.len() != count as usize) {
            let at = r.span("spread").expect("spread was read");
            r.errors.push(at.error(format!("spread lists {} sites but count = {count}", s.len())));
            continue;
        }
        let site_spread = spread.unwrap_or_else(|| vec![(0.0, 0.0); count as usize]);
        let species = NuclearSpecies {
            label,
            spin: n_spin,
            gn,
            a_secular: a,
            p_eff: p,
            multiplicity: count as usize,
            site_spread,
        };
        if let Err(err) = species.validate() {
            errors.push(sec.header.error(err.to_string()));
        }
        nuclei.push(species);
    }

    // [sequence]
    let seq_sec = find("sequence").unwrap_or(&empty);
    let mut r = Reader { section: seq_sec, errors: &mut errors };
    let kind = match r.read("kind", |s| word(s, &["hahn", "stimulated", "mims_endor"])) {
        Some("stimulated") => SequenceKind::Stimulated,
        Some("mims_endor") => SequenceKind::MimsEndor,
        _ => SequenceKind::Hahn,
    };
    let (carrier, tau) = if seq_sec.name.is_empty() {
        (None, None)
    } else {
        (r.required("carrier", |s| quantity(s, "GHz")), r.required("tau", |s| quantity(s, "s")))
    };
    let t_wait = r.q("t_wait", "s").unwrap_or(if kind == SequenceKind::Hahn { 0.0 } else { 2e-6 });
    let requests: Vec<(PulseRequest, Option<Span>)> =
        ["p1", "p2", "p3"].iter().map(|k| (r.read(k, pulse).unwrap_or(PulseRequest::Default), r.span(k))).collect();
    if kind == SequenceKind::Hahn {
        if let Some(s) = r.span("p3") {
            r.errors.push(s.error("a hahn sequence has two pulses; remove p3"));
        }
    }
    let rf_duration = r.q("rf_duration", "s").unwrap_or(10e-6);
    let rf_power = r.q("rf_power", "W").unwrap_or(1.0);
    let rf_inversion = r.num("rf_inversion").unwrap_or(1.0);
    let b1_override = r.read("b1_override", boolean).unwrap_or(false);
    if kind != SequenceKind::MimsEndor {
        for k in ["rf_duration", "rf_power", "rf_inversion"] {
            if let Some(s) = r.span(k) {
                r.errors.push(s.error(format!("`{k}` only applies to mims_endor")));
            }
        }
    }

    // [resonator]
    let res_sec = find("resonator").unwrap_or(&empty);
    let mut r = Reader { section: res_sec, errors: &mut errors };
    let res_freq = r.q("freq", "GHz");
    let halfwaves = r.int("halfwaves");
    let waist = r.q("waist", "m");
    let mesh = r.num("mesh");
    let loss = r.num("loss");
    let q_override = r.num("q");
    let power = r.q("power", "W");
    let polarization = match r.read("polarization", |s| word(s, &["linear", "circular"])) {
        Some("circular") => Polarization::Circular,
        _ => Polarization::Linear,
    };
    if halfwaves.is_some_and(|n| n == 0 || n > 1000) {
        errors.push(span_of(res_sec, "halfwaves").unwrap().error("halfwaves must be between 1 and 1000"));
    }

    // [noise]
    let noise_sec = find("noise").unwrap_or(&empty);
    let mut r = Reader { section: noise_sec, errors: &mut errors };
    let sigma = r.num("sigma").unwrap_or(0.0);
    let phase_kind = r.read("phase", |s| word(s, &["fixed", "uniform", "random_walk"])).unwrap_or("uniform");
    let phase_angle = r.q("phase_angle", "rad");
    let walk_rate = r.num("walk_rate");
    let phase = match phase_kind {
        "fixed" => PhaseMode::Fixed(phase_angle.unwrap_or(0.0)),
        "random_walk" => PhaseMode::RandomWalk { walk_rate: walk_rate.unwrap_or(0.0) },
        _ => PhaseMode::UniformRandom,
    };
    if phase_kind != "fixed" {
        if let Some(s) = r.span("phase_angle") {
            r.errors.push(s.error("`phase_angle` needs phase = fixed"));
        }
    }
    if phase_kind != "random_walk" {
        if let Some(s) = r.span("walk_rate") {
            r.errors.push(s.error("`walk_rate` needs phase = random_walk"));
        }
    }
    let noise = NoiseModel { sigma, phase };
    if let Err(err) = noise.validate() {
        errors.push(noise_sec.header.error(err.to_string()));
    }

    // [sweep]
    let sweep_sec = find("sweep").unwrap_or(&empty);
    let mut r = Reader { section: sweep_sec, errors: &mut errors };
    let mut axes: Vec<(SweepAxis, Span)> = Vec::new();
    for e in &sweep_sec.entries {
        let kind = match e.key.text {
            "field" => AxisKind::Field,
            "tau" => AxisKind::Tau,
            "rf" => AxisKind::Rf,
            _ => continue,
        };
        let unit = kind.unit();
        if let Some(values) = r.read(e.key.text, |s| grid(s, unit)) {
            if values.windows(2).any(|w| w[1] <= w[0]) {
                r.errors.push(e.value.error(format!("{} grid must be strictly ascending", e.key.text)));
            }
            axes.push((SweepAxis::new(kind, values), e.key));
        }
    }
    let shots = r.int("shots").unwrap_or(1);
    let repetition = r.q("repetition", "s").unwrap_or(10e-3);
    let seed = r.int("seed").unwrap_or(0);
    let overhead = r.q("overhead", "s").unwrap_or(0.0);
    let fixed_field = r.q("fixed_field", "T");
    let magnet_limit = r.q("magnet_limit", "T").unwrap_or(crate::acquisition::DEFAULT_MAGNET_LIMIT);
    let subtract_floor = r.read("subtract_floor", boolean).unwrap_or(true);
    let endor_width = r.q("endor_width", "MHz").unwrap_or(crate::acquisition::DEFAULT_ENDOR_LINEWIDTH);
    if !sweep_sec.name.is_empty()
        && axes.is_empty()
        && !sweep_sec.entries.iter().any(|e| ["field", "tau", "rf"].contains(&e.key.text))
    {
        errors.push(sweep_sec.header.error("[sweep] needs at least one of field, tau, rf"));
    }
    if axes.len() > 2 {
        errors.push(axes[2].1.error("at most two sweep axes"));
    }
    if shots == 0 || shots > 10_000_000 {
        errors.push(span_of(sweep_sec, "shots").unwrap().error("shots must be between 1 and 10000000"));
    }

    // [output]*
    let mut outputs = Vec::new();
    for sec in sections.iter().filter(|s| s.name == "output") {
        let mut r = Reader { section: sec, errors: &mut errors };
        let format = match r.read("format", |s| word(s, &["csv", "json"])) {
            Some("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        };
        if let Some(path) = r.required("path", |s| Ok(s.text.to_string())) {
            outputs.push(OutputSpec { format, path });
        }
    }

    if !errors.is_empty() {
        if syntax_failed {
            // a dropped line would otherwise also show up as a missing key
            errors.retain(|e| !e.message.starts_with("missing required"));
        }
        errors.sort_by_key(|e| (e.line, e.column));
        return Err(errors);
    }
    let (Some(g), Some(carrier), Some(tau)) = (g, carrier, tau) else {
        unreachable!("missing required values are reported as errors");
    };

    let system = SpinSystem {
        name,
        electron: ElectronSpin { spin: e_spin, g_principal: g, g_orientation, d, e, linewidth_fwhm: linewidth, t1, t2 },
        nuclei,
        spins_count,
    };
    if let Err(err) = system.validate() {
        errors.push(el_sec.header.error(err.to_string()));
    }

    let mut resonator = ResonatorModel::new(res_freq.unwrap_or(carrier), power.unwrap_or(0.03));
    resonator.n_halfwaves = halfwaves.map_or(resonator.n_halfwaves, |n| n as u32);
    resonator.beam_waist = waist.unwrap_or(resonator.beam_waist);
    resonator.mesh_transmission = mesh.unwrap_or(resonator.mesh_transmission);
    resonator.other_loss = loss.unwrap_or(resonator.other_loss);
    resonator.q_override = q_override;
    resonator.polarization = polarization;
    let nominal_b1 = match resonator.nominal_b1() {
        Ok(b) => Some(b),
        Err(err) => {
            errors.push(res_sec.header.error(err.to_string()));
            None
        }
    };

    let sys_err = !errors.is_empty();
    let mut pulses = Vec::new();
    let g_eff = system.g_eff(orientation);
    if let (Some(bn), false) = (nominal_b1, sys_err) {
        let b1_eff = bn * polarization.b1_factor();
        let t90 = duration_for_angle(PI / 2.0, b1_eff, g_eff);
        for (i, (req, span)) in requests.iter().take(kind.pulse_count()).enumerate() {
            let mut p = match *req {
                PulseRequest::Default => {
                    let hahn_pi = kind == SequenceKind::Hahn && i == 1;
                    PulseSpec::new(if hahn_pi { 2.0 * t90 } else { t90 }, bn)
                }
                PulseRequest::Power { duration, phase } => PulseSpec { phase, ..PulseSpec::new(duration, bn) },
                PulseRequest::Angle { duration, angle, phase } => {
                    PulseSpec { phase, ..PulseSpec::with_angle(duration, angle, g_eff, polarization) }
                }
                PulseRequest::Field { duration, b1, phase } => PulseSpec { phase, ..PulseSpec::new(duration, b1) },
            };
            p.polarization = polarization;
            if !b1_override && p.b1 > bn * (1.0 + B1_TOLERANCE) {
                let at = span.unwrap_or(seq_sec.header);
                errors.push(at.error(format!(
                    "pulse p{} needs a nominal B1 of {:.4} mT but the resonator delivers {:.4} mT; \
                     shorten the power demand or set b1_override = true",
                    i + 1,
                    p.b1,
                    bn
                )));
            }
            pulses.push(p);
        }
    }
    if pulses.len() >= 2 {
        let gap = (pulses[0].duration + pulses[1].duration) / 2.0;
        let taus = sweep_sec.entries.iter().find(|e| e.key.text == "tau");
        let shortest = axes.iter().find(|(a, _)| a.kind == AxisKind::Tau).map_or(tau, |(a, _)| a.values[0]);
        if shortest < gap {
            let at = taus.map(|e| e.value).or_else(|| span_of(seq_sec, "tau")).unwrap_or(seq_sec.header);
            errors.push(at.error(format!(
                "tau {shortest:e} s is shorter than the pulse overlap limit {gap:e} s (half of p1 + p2)"
            )));
        }
    }
    if pulses.len() == 3 && t_wait < (pulses[1].duration + pulses[2].duration) / 2.0 {
        let at = span_of(seq_sec, "t_wait").unwrap_or(seq_sec.header);
        errors.push(at.error("t_wait is shorter than half of p2 + p3"));
    }
    let rf = (kind == SequenceKind::MimsEndor).then_some(RfPulse {
        freq: 0.0,
        duration: rf_duration,
        power: rf_power,
        inversion: rf_inversion,
    });
    let sequence = SequenceSpec { kind, tau, t_wait, pulses, rf };
    if !sys_err {
        if let Err(err) = sequence.validate() {
            errors.push(seq_sec.header.error(err.to_string()));
        }
    }

    let mut axes_iter = axes.into_iter().map(|(a, _)| a);
    let axis1 = axes_iter.next().expect("at least one axis");
    let mut plan = SweepPlan::new(axis1, shots as usize, repetition, seed);
    plan.axis2 = axes_iter.next();
    plan.point_overhead = overhead;
    let sweep_span = sweep_sec.header;
    if let Err(err) = plan.validate() {
        errors.push(sweep_span.error(err.to_string()));
    }
    let supported = matches!(
        (plan.axis1.kind, plan.axis2.as_ref().map(|a| a.kind)),
        (AxisKind::Field, None) | (AxisKind::Field, Some(AxisKind::Tau)) | (AxisKind::Tau, None) | (AxisKind::Rf, None)
    );
    if !supported {
        errors.push(sweep_span.error("supported sweeps: field; field then tau; tau; rf"));
    }
    if plan.axis1.kind == AxisKind::Rf && kind != SequenceKind::MimsEndor {
        let at = span_of(sweep_sec, "rf").unwrap_or(sweep_span);
        errors.push(at.error("an rf sweep needs sequence kind = mims_endor"));
    }

    let conditions = Conditions {
        carrier,
        temperature,
        orientation,
        magnet_limit,
        field: fixed_field,
        subtract_floor,
        endor_linewidth: endor_width,
        moment_floor: crate::spinsys::DEFAULT_MOMENT_FLOOR,
        max_dim: crate::acquisition::DEFAULT_SWEEP_DIM,
    };
    if let Err(err) = conditions.validate() {
        errors.push(sweep_span.error(err.to_string()));
    }
    for axis in std::iter::once(&plan.axis1).chain(&plan.axis2) {
        if axis.kind == AxisKind::Field && axis.values.iter().any(|b| !(0.0..=magnet_limit).contains(b)) {
            let at = sweep_sec.entries.iter().find(|e| e.key.text == "field").map_or(sweep_span, |e| e.value);
            errors.push(at.error(format!("field grid leaves the magnet range 0-{magnet_limit} T")));
        }
    }

    if let Ok(bw) = resonator.bandwidth() {
        if (carrier - resonator.freq).abs() > bw / 2.0 {
            let at = seq_sec.entries.iter().find(|e| e.key.text == "carrier").map_or(seq_sec.header, |e| e.value);
            errors.push(at.error(format!(
                "carrier {carrier} GHz lies outside the resonator band {} GHz +/- {:.4} GHz",
                resonator.freq,
                bw / 2.0
            )));
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| (e.line, e.column));
        return Err(errors);
    }
    let mut warnings = resonator.warnings();
    warnings.extend(plan.warnings(system.electron.t1));
    Ok(ExperimentConfig { system, resonator, sequence, noise, plan, conditions, outputs, b1_override, warnings })
}

// ---- canonical emission ----

fn n(x: f64) -> String {
    format!("{x:e}")
}

fn q(x: f64, unit: &str) -> String {
    format!("{x:e} {unit}")
}

fn qs(xs: &[f64], unit: &str) -> String {
    xs.iter().map(|x| q(*x, unit)).collect::<Vec<_>>().join(", ")
}

fn grid_text(values: &[f64], unit: &str) -> String {
    let (a, b) = (values[0], values[values.len() - 1]);
    let lin = SweepAxis::linspace(AxisKind::Field, a, b, values.len()).map(|s| s.values);
    if values.len() > 2 && lin.as_deref() == Ok(values) {
        format!("{} .. {} / {}", q(a, unit), q(b, unit), values.len())
    } else {
        qs(values, unit)
    }
}

impl ExperimentConfig {
    /// Fully explicit source text that parses back to an equal config.
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        let sys = &self.system;
        let el = &sys.electron;
        let o = self.conditions.orientation;
        let _ = writeln!(
            s,
            "[system]\nname = {}\nspins = {}\ntemperature = {}",
            sys.name,
            n(sys.spins_count),
            q(self.conditions.temperature, "K")
        );
        let _ = writeln!(s, "orientation = {}", qs(&[o.alpha, o.beta, o.gamma], "rad"));
        let g = el.g_principal;
        let _ = writeln!(s, "\n[electron]\nspin = {}\ng = {}, {}, {}", el.spin, n(g[0]), n(g[1]), n(g[2]));
        let go = el.g_orientation;
        let _ = writeln!(s, "g_euler = {}", qs(&[go.alpha, go.beta, go.gamma], "rad"));
        let _ = writeln!(
            s,
            "d = {}\ne = {}\nlinewidth = {}\nt1 = {}",
            q(el.d, "MHz"),
            q(el.e, "MHz"),
            q(el.linewidth_fwhm, "mT"),
            q(el.t1, "s")
        );
        if el.t2.is_constant() {
            let _ = writeln!(s, "t2 = {}", q(el.t2.at(0.0), "s"));
        } else {
            let pts: Vec<String> =
                el.t2.points().iter().map(|(b, t)| format!("{} @ {}", q(*t, "s"), q(*b, "mT"))).collect();
            let _ = writeln!(s, "t2_profile = {}", pts.join(", "));
        }
        for nuc in &sys.nuclei {
            let _ = writeln!(s, "\n[nucleus]\nlabel = {}\nspin = {}\ngn = {}", nuc.label, nuc.spin, n(nuc.gn));
            let _ = writeln!(
                s,
                "a = {}\np = {}\ncount = {}",
                q(nuc.a_secular, "MHz"),
                q(nuc.p_eff, "MHz"),
                nuc.multiplicity
            );
            let spread: Vec<String> =
                nuc.site_spread.iter().map(|(a, p)| format!("{} @ {}", q(*a, "MHz"), q(*p, "MHz"))).collect();
            let _ = writeln!(s, "spread = {}", spread.join(", "));
        }
        let r = &self.resonator;
        let _ = writeln!(
            s,
            "\n[resonator]\nfreq = {}\nhalfwaves = {}\nwaist = {}",
            q(r.freq, "GHz"),
            r.n_halfwaves,
            q(r.beam_waist, "m")
        );
        let _ = writeln!(s, "mesh = {}\nloss = {}", n(r.mesh_transmission), n(r.other_loss));
        if let Some(qf) = r.q_override {
            let _ = writeln!(s, "q = {}", n(qf));
        }
        let pol = match r.polarization {
            Polarization::Linear => "linear",
            Polarization::Circular => "circular",
        };
        let _ = writeln!(s, "power = {}\npolarization = {pol}", q(r.incident_power, "W"));
        let seq = &self.sequence;
        let _ =
            writeln!(s, "\n[sequence]\nkind = {}\ncarrier = {}", seq.kind.name(), q(self.conditions.carrier, "GHz"));
        let _ = writeln!(s, "tau = {}\nt_wait = {}", q(seq.tau, "s"), q(seq.t_wait, "s"));
        for (i, p) in seq.pulses.iter().enumerate() {
            let _ = writeln!(s, "p{} = {}, {}, {}", i + 1, q(p.duration, "s"), q(p.b1, "mT"), q(p.phase, "rad"));
        }
        if let Some(rf) = &seq.rf {
            let _ = writeln!(
                s,
                "rf_duration = {}\nrf_power = {}\nrf_inversion = {}",
                q(rf.duration, "s"),
                q(rf.power, "W"),
                n(rf.inversion)
            );
        }
        let _ = writeln!(s, "b1_override = {}", self.b1_override);
        let _ = writeln!(s, "\n[noise]\nsigma = {}", n(self.noise.sigma));
        match self.noise.phase {
            PhaseMode::Fixed(a) => {
                let _ = writeln!(s, "phase = fixed\nphase_angle = {}", q(a, "rad"));
            }
            PhaseMode::UniformRandom => {
                let _ = writeln!(s, "phase = uniform");
            }
            PhaseMode::RandomWalk { walk_rate } => {
                let _ = writeln!(s, "phase = random_walk\nwalk_rate = {}", n(walk_rate));
            }
        }
        let p = &self.plan;
        let c = &self.conditions;
        let _ = writeln!(s, "\n[sweep]");
        for axis in std::iter::once(&p.axis1).chain(&p.axis2) {
            let _ = writeln!(s, "{} = {}", axis.kind.name(), grid_text(&axis.values, axis.kind.unit()));
        }
        let _ = writeln!(
            s,
            "shots = {}\nrepetition = {}\nseed = {}",
            p.shots_per_point,
            q(p.repetition_time, "s"),
            p.master_seed
        );
        let _ = writeln!(s, "overhead = {}", q(p.point_overhead, "s"));
        if let Some(b) = c.field {
            let _ = writeln!(s, "fixed_field = {}", q(b, "T"));
        }
        let _ = writeln!(s, "magnet_limit = {}\nsubtract_floor = {}", q(c.magnet_limit, "T"), c.subtract_floor);
        let _ = writeln!(s, "endor_width = {}", q(c.endor_linewidth, "MHz"));
        for out in &self.outputs {
            let _ = writeln!(s, "\n[output]\nformat = {}\npath = {}", out.format.name(), out.path);
        }
        s
    }

    /// Config echo and defaults table for dataset metadata.
    pub fn metadata(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for (i, line) in self.to_source().lines().enumerate() {
            m.insert(format!("config.{:04}", i + 1), line.to_string());
        }
        m.insert("defaults.version".into(), DEFAULTS_VERSION.to_string());
        for (k, v) in DEFAULTS {
            m.insert(format!("defaults.{k}"), v.to_string());
        }
        for (i, w) in self.warnings.iter().enumerate() {
            m.insert(format!("config.warning.{i}"), w.to_string());
        }
        m
    }

    /// Rebuild a config from the echo written by [`ExperimentConfig::metadata`].
    pub fn from_metadata(meta: &BTreeMap<String, String>) -> Result<ExperimentConfig, Vec<ParseError>> {
        let mut lines: Vec<(usize, &str)> = meta
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("config.")?.parse::<usize>().ok().map(|i| (i, v.as_str())))
            .collect();
        lines.sort_unstable_by_key(|l| l.0);
        let source: Vec<&str> = lines.into_iter().map(|l| l.1).collect();
        parse_experiment(&source.join("\n"))
    }

    /// Simulate the configured sweep; the dataset carries the config echo.
    pub fn run(&self) -> crate::Result<Dataset> {
        let mut ds = run_plan(&self.system, &self.conditions, &self.plan, &self.sequence, &self.noise)?;
        ds.metadata.extend(self.metadata());
        Ok(ds)
    }
}
