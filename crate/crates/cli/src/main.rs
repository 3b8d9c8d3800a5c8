use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hfepr::acquisition::{fine_structure_shares, line_center, shot_plan};
use hfepr::expdsl::{emit_dataset, parse_experiment, ExperimentConfig, OutputFormat, ParseError};
use hfepr::pulses::{duration_for_angle, flip_angle};

#[derive(Parser)]
#[command(name = "hfepr", version, about = "Simulate pulsed high-field EPR and ENDOR experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by an experiment file and write the dataset.
    Run {
        file: PathBuf,
        /// Directory for output files (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the master seed of the sweep.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the format of every output.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Parse and cross-check an experiment file.
    Validate { file: PathBuf },
    /// Print derived quantities: resonance fields, B1, pulse lengths, wall time.
    Describe { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

enum Failure {
    Invalid,
    Runtime(String),
}

fn report(file: &Path, errors: &[ParseError]) {
    for e in errors {
        eprintln!("{}:{}:{}: {}", file.display(), e.line, e.column, e.message);
        if !e.snippet.is_empty() {
            eprintln!("    {}", e.snippet);
        }
    }
}

fn load(file: &Path) -> Result<ExperimentConfig, Failure> {
    let source = fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        Failure::Invalid
    })?;
    parse_experiment(&source).map_err(|errors| {
        report(file, &errors);
        Failure::Invalid
    })
}

fn run(file: &Path, out: Option<PathBuf>, seed: Option<u64>, format: Option<Format>) -> Result<(), Failure> {
    let mut cfg = load(file)?;
    if let Some(seed) = seed {
        cfg.plan.master_seed = seed;
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let ds = cfg.run().map_err(|e| Failure::Runtime(e.to_string()))?;
    let dir = out.unwrap_or_else(|| PathBuf::from("."));
    let mut targets: Vec<(PathBuf, OutputFormat)> =
        cfg.outputs.iter().map(|o| (dir.join(&o.path), format.map_or(o.format, Into::into))).collect();
    if targets.is_empty() {
        let fmt: OutputFormat = format.map_or(OutputFormat::Csv, Into::into);
        let stem = file.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
        targets.push((dir.join(format!("{stem}.{}", fmt.name())), fmt));
    }
    for (path, fmt) in targets {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure::Runtime(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, emit_dataset(&ds, fmt)).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn describe(cfg: &ExperimentConfig) -> Result<String, String> {
    let mut s = String::new();
    let c = &cfg.conditions;
    let g = cfg.system.g_eff(c.orientation);
    let center = line_center(&cfg.system, c);
    let _ = writeln!(
        s,
        "system        {} ({} spins, S = {})",
        cfg.system.name, cfg.system.spins_count, cfg.system.electron.spin
    );
    let _ = writeln!(s, "carrier       {} GHz at {} K", c.carrier, c.temperature);
    let _ = writeln!(s, "g_eff         {g:.6}");
    let _ = writeln!(s, "line center   {center:.6} T");
    let shares = fine_structure_shares(&cfg.system, c, center).map_err(|e| e.to_string())?;
    for sh in shares.iter().take(5) {
        let _ = writeln!(
            s,
            "  m_S {:+.1} <-> {:+.1}   population share {:.4}   amplitude share {:.4}",
            sh.ms_lo, sh.ms_hi, sh.weight_share, sh.amplitude_share
        );
    }
    let r = &cfg.resonator;
    let q = r.q().map_err(|e| e.to_string())?;
    let geo = r.geometry().map_err(|e| e.to_string())?;
    let _ = writeln!(
        s,
        "resonator     {} GHz, {} half-waves, L = {:.4} mm, FSR = {:.3} GHz",
        r.freq,
        r.n_halfwaves,
        geo.length * 1e3,
        geo.free_spectral_range
    );
    let _ = writeln!(
        s,
        "              Q = {q:.1}, bandwidth = {:.1} MHz, ring-down = {:.3} ns",
        r.freq / q * 1e3,
        r.ringdown().map_err(|e| e.to_string())? * 1e9
    );
    let b1 = r.b1_from_power().map_err(|e| e.to_string())?;
    let _ =
        writeln!(s, "B1            {b1:.5} mT at {} mW ({:?} polarization)", r.incident_power * 1e3, r.polarization);
    let _ = writeln!(s, "pi/2 time     {:.1} ns", duration_for_angle(std::f64::consts::FRAC_PI_2, b1, g) * 1e9);
    for (i, p) in cfg.sequence.pulses.iter().enumerate() {
        let _ = writeln!(
            s,
            "  p{}          {:.1} ns, B1 {:.5} mT, flip {:.1} deg",
            i + 1,
            p.duration * 1e9,
            p.b1_eff(),
            flip_angle(p, g).to_degrees()
        );
    }
    let plan = &cfg.plan;
    let sp = shot_plan(
        plan.points(),
        plan.shots_per_point,
        plan.repetition_time,
        plan.point_overhead,
        Some(cfg.system.electron.t1),
    );
    let _ = writeln!(
        s,
        "wall time     {:.1} s ({} points x {} shots x {} s)",
        sp.wall_time,
        plan.points(),
        plan.shots_per_point,
        plan.repetition_time
    );
    for w in &cfg.warnings {
        let _ = writeln!(s, "warning       {w}");
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, out, seed, format } => run(&file, out, seed, format),
        Command::Validate { file } => load(&file).map(|cfg| {
            for w in &cfg.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: ok", file.display());
        }),
        Command::Describe { file } => load(&file).and_then(|cfg| {
            print!("{}", describe(&cfg).map_err(Failure::Runtime)?);
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
