//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use hfepr::acquisition::{
    echo_decay_sweep, fine_structure_shares, line_center, local_maxima, sensitivity, AxisKind, SensitivityInput,
    SweepAxis, SweepPlan,
};
use hfepr::detection::{
    acquire_shots, average_shots, detect_shot, quadrature_magnitude, NoiseModel, PhaseMode, SnrWindows, Trace,
};
use hfepr::expdsl::{emit_dataset, parse_dataset, parse_experiment, ExperimentConfig, OutputFormat};
use hfepr::pulses::Polarization;
use hfepr::resonator::ResonatorModel;
use hfepr::sequences::fit_decay;
use hfepr::sequences::{endor_spectrum, mims_efficiency, EndorSpectrum};
use hfepr::spinsys::{ElectronSpin, NuclearSpecies};
use hfepr::thermal::two_level_polarization;
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn corpus_dir(kind: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(kind)
}

fn load(name: &str) -> ExperimentConfig {
    let path = corpus_dir("valid").join(name);
    let src = fs::read_to_string(&path).unwrap();
    parse_experiment(&src).unwrap_or_else(|e| panic!("{}: {:?}", path.display(), e))
}

fn noise_free(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.noise.sigma = 0.0;
    cfg
}

/// Field positions of the local maxima of a field sweep.
fn field_maxima(cfg: &ExperimentConfig, threshold: f64) -> Vec<f64> {
    let ds = cfg.run().unwrap();
    let fields = &ds.axes[0].values;
    local_maxima(&ds.values, threshold).into_iter().map(|i| fields[i]).collect()
}

fn c1_sensitivity() -> Check {
    let input = SensitivityInput::new(4e14, 0.001, 20.0, 1.5e-6, 1.49e-6).map_err(|e| e.to_string())?;
    let got = sensitivity(&input);
    let oracle = 4e14 * 0.001 / 20.0 * (-2.0 * 1.5 / 1.49f64).exp();
    let exact = (got - oracle).abs() / oracle < 1e-12;
    let rounded = (got / 1e9 * 100.0).round() / 100.0 == 2.67;
    let ratio = 4e9 / got;
    ensure(
        exact && rounded && (0.5..=2.0).contains(&ratio),
        format!("sensitivity {got:.4e} spins (oracle {oracle:.4e}), reported 4e9 / simulated = {ratio:.3}"),
    )
}

fn c2_manganese() -> Check {
    let peaks = field_maxima(&noise_free(load("mgo_mn.exp")), 0.05);
    let inside = peaks.iter().all(|b| (11.965..=12.035).contains(b));
    ensure(peaks.len() == 6 && inside, format!("{} maxima at {peaks:.4?} T, window 11.965-12.035 T", peaks.len()))
}

fn c3_vanadium() -> Check {
    let peaks = field_maxima(&noise_free(load("mgo_v.exp")), 0.05);
    let center = peaks.iter().sum::<f64>() / peaks.len().max(1) as f64;
    let inside = peaks.iter().all(|b| (12.09..=12.16).contains(b));
    ensure(
        peaks.len() == 8 && (center - 12.123).abs() <= 0.01 && inside,
        format!("{} maxima centered at {center:.4} T (target 12.123 +/- 0.01), span {:.4?}", peaks.len(), peaks),
    )
}

fn c4_polarization() -> Check {
    let pol = two_level_polarization(336.0, 1.8).map_err(|e| e.to_string())?;
    let cfg = load("mgo_mn.exp");
    let b = line_center(&cfg.system, &cfg.conditions);
    let shares = fine_structure_shares(&cfg.system, &cfg.conditions, b).map_err(|e| e.to_string())?;
    let weight = |lo: f64| shares.iter().find(|s| s.ms_lo == lo).map_or(0.0, |s| s.weight_share);
    let ratio = weight(-2.5) / weight(-1.5);
    // h nu / k T with CODATA 2018 exact h and k
    let oracle = (6.62607015e-34 * 336e9 / (1.380649e-23 * 5.0f64)).exp();
    let top = shares[0];
    let dominated =
        top.ms_lo == -2.5 && top.amplitude_share >= 0.9 && top.amplitude_share >= 10.0 * shares[1].amplitude_share;
    ensure(
        pol >= 0.99 && (ratio - 25.1).abs() <= 0.5 && (ratio - oracle).abs() <= 0.5 && dominated,
        format!(
            "P(336 GHz, 1.8 K) = {pol:.5}; weight ratio {ratio:.2} (Boltzmann {oracle:.2}); top transition {}<->{} carries {:.3} of the amplitude",
            top.ms_lo, top.ms_hi, top.amplitude_share
        ),
    )
}

fn c5_mims() -> Check {
    let tau = 600e-9;
    let max = (0..=200_000).map(|i| mims_efficiency(i as f64 * 1e-4, tau)).fold(0.0, f64::max);
    let peak = mims_efficiency(0.5 / tau * 1e-6, tau);
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let expected = n as f64 / 0.6;
        // bisect the sign change of the derivative-free odd function sin(pi A tau)
        let f = |a: f64| (PI * a * 1e6 * tau).sin();
        let (mut lo, mut hi) = (expected - 0.4, expected + 0.4);
        let flo = f(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        worst = worst.max((root - expected).abs()).max(mims_efficiency(expected, tau));
    }
    ensure(
        max <= 0.5 && peak == 0.5 && worst <= 1e-9,
        format!("max efficiency {max:.12} (at A = 1/(2 tau): {peak}); zeros off n/tau by at most {worst:.2e}"),
    )
}

fn c6_t2_roundtrip() -> Check {
    let mut cfg = noise_free(load("tempol_hahn.exp"));
    cfg.system.electron.t2 = hfepr::spinsys::T2Profile::constant(1.49e-6);
    let taus = SweepAxis::linspace(AxisKind::Tau, 0.2e-6, 2.2e-6, 20).unwrap();
    let clean_plan = SweepPlan::new(taus.clone(), 1, 10e-3, 0);
    let clean = echo_decay_sweep(&cfg.system, &cfg.conditions, &clean_plan, &cfg.sequence, &cfg.noise)
        .map_err(|e| e.to_string())?;
    let a0 = clean.values[0];
    let noise = NoiseModel { sigma: NoiseModel::sigma_for_snr(a0, 20.0), phase: PhaseMode::UniformRandom };
    let mut fits: Vec<f64> = (0..50u64)
        .map(|seed| {
            let plan = SweepPlan::new(taus.clone(), 1, 10e-3, 1000 + seed);
            let mut cond = cfg.conditions.clone();
            cond.subtract_floor = false;
            let ds = echo_decay_sweep(&cfg.system, &cond, &plan, &cfg.sequence, &noise).unwrap();
            fit_decay(&taus.values, &ds.values, Some(noise.sigma)).unwrap().t2
        })
        .collect();
    fits.sort_by(f64::total_cmp);
    let median = 0.5 * (fits[24] + fits[25]);
    let err = (median - 1.49e-6).abs() / 1.49e-6;
    ensure(err <= 0.03, format!("median fitted T2 {:.4} us over 50 seeds, error {:.2}%", median * 1e6, err * 100.0))
}

fn c7_detection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let signal = Trace {
        t0: 0.0,
        dt: 1e-9,
        samples: (0..256)
            .map(|k| Complex::from_polar((-((k as f64 - 128.0) / 30.0).powi(2)).exp(), 0.01 * k as f64))
            .collect(),
    };
    let reference: Vec<f64> = signal.samples.iter().map(|s| s.norm()).collect();
    let mut dev = 0.0f64;
    for i in 0..100 {
        let noise = NoiseModel { sigma: 0.0, phase: PhaseMode::Fixed(rng.random::<f64>() * 2.0 * PI) };
        let mag = quadrature_magnitude(&detect_shot(&signal, &noise, i));
        dev = dev.max(mag.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    let sigma = 0.8;
    let floor_shot = detect_shot(
        &Trace::constant(Complex::new(0.0, 0.0), 100_000),
        &NoiseModel { sigma, phase: PhaseMode::UniformRandom },
        3,
    );
    let mags = quadrature_magnitude(&floor_shot);
    let floor = mags.iter().sum::<f64>() / mags.len() as f64;
    let floor_err = (floor - sigma * FRAC_PI_2.sqrt()).abs() / (sigma * FRAC_PI_2.sqrt());

    // echo of 5 sigma on a 400-sample trace; baseline before, peak at the echo center
    let echo = Trace {
        t0: 0.0,
        dt: 1.0,
        samples: (0..400).map(|k| Complex::new(5.0 * (-((k as f64 - 300.0) / 20.0).powi(2)).exp(), 0.0)).collect(),
    };
    let windows = SnrWindows { baseline: 0..200, peak: 300..301 };
    let noise = NoiseModel { sigma: 1.0, phase: PhaseMode::UniformRandom };
    let mean_snr = |shots: usize, repeats: u64| -> f64 {
        (0..repeats)
            .map(|r| {
                let mags: Vec<Vec<f64>> = acquire_shots(&echo, &noise, 10_000 * shots as u64 + r, shots)
                    .iter()
                    .map(quadrature_magnitude)
                    .collect();
                average_shots(&mags, &windows).unwrap().snr
            })
            .sum::<f64>()
            / repeats as f64
    };
    let scaling = mean_snr(100, 200) / mean_snr(1, 2000);
    ensure(
        dev < 1e-12 && floor_err <= 0.01 && (scaling - 10.0).abs() <= 1.0,
        format!(
            "phase deviation {dev:.1e}; floor error {:.3}% at 1e5 samples; SNR(100)/SNR(1) = {scaling:.2}",
            floor_err * 100.0
        ),
    )
}

fn c8_resonator() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (freq, power, reported_ns) in [(110.0, 0.100, 100.0), (221.0, 0.030, 300.0), (334.0, 0.003, 600.0)] {
        let model = ResonatorModel::new(freq, power);
        let q = model.q().map_err(|e| e.to_string())?;
        let t = model.pi_half_duration(2.0).map_err(|e| e.to_string())? * 1e9;
        ok &= (reported_ns / 3.0..=reported_ns * 3.0).contains(&t) && (475.0..=525.0).contains(&q);
        lines.push(format!("{freq} GHz: Q {q:.0}, pi/2 {t:.0} ns (vs {reported_ns})"));
    }
    let linear = ResonatorModel::new(240.0, 0.03);
    let circular = ResonatorModel { polarization: Polarization::Circular, ..linear.clone() };
    let ratio = circular.b1_from_power().unwrap() / linear.b1_from_power().unwrap();
    ok &= (ratio - SQRT_2).abs() <= 2.0 * f64::EPSILON;
    lines.push(format!("circular/linear B1 = {ratio:.16}"));
    ensure(ok, lines.join("; "))
}

fn potassium(a_sign: f64) -> (ElectronSpin, Vec<NuclearSpecies>) {
    let cfg = load("cr_mims.exp");
    let mut nuclei = cfg.system.nuclei.clone();
    for n in &mut nuclei {
        n.a_secular *= a_sign;
        for s in &mut n.site_spread {
            s.0 *= a_sign;
        }
    }
    (cfg.system.electron.clone(), nuclei)
}

fn k_spectrum(a_sign: f64, temperature: f64, grid: &[f64]) -> EndorSpectrum {
    let (electron, nuclei) = potassium(a_sign);
    endor_spectrum(&electron, 1.9878, &nuclei, 8.626, 240.0, 600e-9, temperature, grid, 0.04).unwrap()
}

fn c9_endor() -> Check {
    let (_, nuclei) = potassium(1.0);
    let larmor_oracle = nuclei[0].gn * 5.0507837461e-27 / 6.62607015e-34 * 8.626 * 1e-6;
    let nu_n = k_spectrum(1.0, 5.0, &[17.0]).larmor;
    let grid: Vec<f64> = (-1500..=1500).map(|k| nu_n + k as f64 * 0.002).collect();
    let cold = k_spectrum(1.0, 5.0, &grid);
    let hot = k_spectrum(1.0, 300.0, &grid);
    let mut structure = cold.lines.len() <= 48;
    let mut signs = true;
    for site in 0..8 {
        let lines: Vec<_> = cold.lines_of_site(site).collect();
        let upper: Vec<_> = lines.iter().filter(|l| l.manifold > 0.0).collect();
        let lower: Vec<_> = lines.iter().filter(|l| l.manifold < 0.0).collect();
        structure &= upper.len() == 3 && lower.len() == 3;
        let (su, sl) = (upper[0].amplitude.signum(), lower[0].amplitude.signum());
        signs &= upper.iter().all(|l| l.amplitude.signum() == su)
            && lower.iter().all(|l| l.amplitude.signum() == sl)
            && su != sl;
    }
    signs &= hot.lines.iter().filter(|l| l.amplitude != 0.0).all(|l| l.amplitude > 0.0);
    let mirrored = k_spectrum(-1.0, 5.0, &grid);
    let n = grid.len();
    let peak = cold.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mirror_dev = (0..n).map(|i| (cold.values[i] - mirrored.values[n - 1 - i]).abs()).fold(0.0, f64::max) / peak;
    ensure(
        structure && signs && mirror_dev < 1e-9 && (nu_n - 17.16).abs() <= 0.02 && (nu_n - larmor_oracle).abs() < 1e-9,
        format!(
            "{} lines, 3+3 per site: {structure}; branch signs opposite at 5 K, positive at 300 K: {signs}; mirror deviation {mirror_dev:.1e}; nu_n {nu_n:.4} MHz (oracle {larmor_oracle:.4})",
            cold.lines.len()
        ),
    )
}

fn c10_determinism() -> Check {
    let configs = ["mgo_mn.exp", "tempol_t2map.exp", "cr_mims.exp"];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let mut ok = true;
    for name in configs {
        let cfg = load(name);
        let a = many.install(|| cfg.run()).map_err(|e| e.to_string())?;
        let b = many.install(|| cfg.run()).map_err(|e| e.to_string())?;
        let c = single.install(|| cfg.run()).map_err(|e| e.to_string())?;
        let bytes = |d| emit_dataset(d, OutputFormat::Json);
        let bits = |d: &hfepr::acquisition::Dataset| d.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ok &= bits(&a) == bits(&b) && bits(&a) == bits(&c) && bytes(&a) == bytes(&c);
    }
    ensure(ok, format!("{} sweeps identical across repeats and 1 vs 8 threads", configs.len()))
}

fn expected_lines(source: &str) -> Option<Vec<usize>> {
    let header = source.lines().next()?.strip_prefix("# expect:")?;
    header.split(',').map(|n| n.trim().parse().ok()).collect()
}

fn c11_parser() -> Check {
    let files = |kind| -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = fs::read_dir(corpus_dir(kind)).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v
    };
    let (valid, invalid) = (files("valid"), files("invalid"));
    let mut failures = Vec::new();
    for f in &valid {
        let src = fs::read_to_string(f).unwrap();
        match parse_experiment(&src) {
            Ok(cfg) => {
                let canonical = cfg.to_source();
                let again = parse_experiment(&canonical).map(|c| c.to_source());
                if again.as_ref() != Ok(&canonical) {
                    failures.push(format!("{} not a fixpoint", f.display()));
                }
            }
            Err(_) => failures.push(format!("false reject {}", f.display())),
        }
    }
    for f in &invalid {
        let src = fs::read_to_string(f).unwrap();
        match parse_experiment(&src) {
            Ok(_) => failures.push(format!("false accept {}", f.display())),
            Err(errs) => {
                let mut lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
                lines.dedup();
                if Some(lines) != expected_lines(&src) {
                    failures.push(format!("wrong lines in {}", f.display()));
                }
            }
        }
    }
    // dataset emit -> parse -> emit on a real run
    let ds = load("tempol_t2map.exp").run().map_err(|e| e.to_string())?;
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let first = emit_dataset(&ds, format);
        let back = parse_dataset(std::str::from_utf8(&first).unwrap(), format).map_err(|e| e.to_string())?;
        if emit_dataset(&back, format) != first {
            failures.push(format!("{} dataset not a fixpoint", format.name()));
        }
    }
    ensure(
        valid.len() >= 30 && invalid.len() >= 30 && failures.is_empty(),
        format!("{} valid, {} invalid files; problems: {:?}", valid.len(), invalid.len(), failures),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("sensitivity figure", c1_sensitivity),
        ("Mn2+ line window", c2_manganese),
        ("V2+ line center", c3_vanadium),
        ("thermal polarization", c4_polarization),
        ("Mims efficiency", c5_mims),
        ("T2 round trip", c6_t2_roundtrip),
        ("detection properties", c7_detection),
        ("resonator consistency", c8_resonator),
        ("ENDOR structure", c9_endor),
        ("determinism", c10_determinism),
        ("parser corpus", c11_parser),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
