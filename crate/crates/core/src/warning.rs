use std::fmt;

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    MeshTransmissionOutOfBand { transmission: f64 },
    QualityFactorOutOfBand { q: f64 },
    HalfwavesOutOfRange { n: u32 },
    RepetitionTooShort { repetition_time: f64, t1: f64 },
    MixerDamage { power_ratio: f64 },
    BreakthroughOverlapsEcho { dead_time_end: f64, echo_start: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::MeshTransmissionOutOfBand { transmission } => {
                write!(f, "mesh transmission {transmission} outside the 0.002-0.01 calibration band")
            }
            Warning::QualityFactorOutOfBand { q } => {
                write!(f, "quality factor {q:.0} outside the calibrated 250-1000 band")
            }
            Warning::HalfwavesOutOfRange { n } => {
                write!(f, "{n} half-wavelengths outside the 5-8 tuning range")
            }
            Warning::RepetitionTooShort { repetition_time, t1 } => {
                write!(f, "repetition time {repetition_time:e} s shorter than 3*T1 ({:e} s)", 3.0 * t1)
            }
            Warning::MixerDamage { power_ratio } => {
                write!(f, "pulse breakthrough at {power_ratio:.2}x the mixer damage ceiling")
            }
            Warning::BreakthroughOverlapsEcho { dead_time_end, echo_start } => write!(
                f,
                "receiver dead time ends at {dead_time_end:e} s, after the echo window opens at {echo_start:e} s"
            ),
        }
    }
}
