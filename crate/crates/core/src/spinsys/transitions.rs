use super::eigen::Eigensystem;
use super::operators::CMatrix;
use crate::constants::CODATA_2018;
use crate::error::{domain, Result};

pub const DEFAULT_MOMENT_FLOOR: f64 = 1e-6;

/// One allowed transition between two eigenlevels.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub level_lo: usize,
    pub level_hi: usize,
    /// GHz.
    pub freq: f64,
    /// Field (T) at which this transition meets the carrier, first order in the
    /// electron Zeeman slope.
    pub field_resonant: Option<f64>,
    /// |<hi|Sx|lo>|^2.
    pub moment: f64,
    /// p(lo) - p(hi).
    pub weight: f64,
    /// Electron <Sz> of the two levels.
    pub sz_lo: f64,
    pub sz_hi: f64,
}

impl Transition {
    /// Electron spin projections rounded to the nearest half-integer label.
    pub fn ms_label(&self) -> (f64, f64) {
        ((self.sz_lo * 2.0).round() / 2.0, (self.sz_hi * 2.0).round() / 2.0)
    }
}

/// Levels and the electron operators needed to tabulate transitions.
#[derive(Debug, Clone)]
pub struct LevelDiagram {
    eig: Eigensystem,
    sx_moments: CMatrix,
    sz: Vec<f64>,
    b0: f64,
    g_eff: f64,
}

impl LevelDiagram {
    pub fn new(eig: Eigensystem, sx: &CMatrix, sz: &CMatrix, b0: f64, g_eff: f64) -> LevelDiagram {
        let sx_e = eig.to_eigenbasis(sx);
        let sz_e = eig.to_eigenbasis(sz);
        let sz = (0..eig.dim()).map(|k| sz_e[(k, k)].re).collect();
        LevelDiagram { eig, sx_moments: sx_e, sz, b0, g_eff }
    }

    /// Energies in MHz, ascending.
    pub fn levels(&self) -> &[f64] {
        &self.eig.levels
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn field(&self) -> f64 {
        self.b0
    }

    pub fn g_eff(&self) -> f64 {
        self.g_eff
    }

    pub fn sz_expectations(&self) -> &[f64] {
        &self.sz
    }

    pub fn transitions(
        &self,
        populations: &[f64],
        carrier_ghz: Option<f64>,
        moment_floor: f64,
    ) -> Result<Vec<Transition>> {
        transition_table(self, populations, carrier_ghz, moment_floor)
    }
}

/// Every level pair whose Sx moment exceeds `moment_floor`.
pub fn transition_table(
    diagram: &LevelDiagram,
    populations: &[f64],
    carrier_ghz: Option<f64>,
    moment_floor: f64,
) -> Result<Vec<Transition>> {
    let n = diagram.levels().len();
    if populations.len() != n {
        return domain(format!("{} populations for {} levels", populations.len(), n));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > 1e-9 || populations.iter().any(|p| !(*p >= 0.0)) {
        return domain(format!("populations must be non-negative and sum to 1 (sum {total})"));
    }
    let slope_ghz = diagram.g_eff * CODATA_2018.mu_b_over_h() * 1e-9;
    let levels = diagram.levels();
    let mut out = Vec::new();
    for lo in 0..n {
        for hi in lo + 1..n {
            let moment = diagram.sx_moments[(hi, lo)].norm_sqr();
            if moment <= moment_floor {
                continue;
            }
            let freq = (levels[hi] - levels[lo]) / 1e3;
            out.push(Transition {
                level_lo: lo,
                level_hi: hi,
                freq,
                field_resonant: carrier_ghz.map(|c| diagram.b0 + (c - freq) / slope_ghz),
                moment,
                weight: populations[lo] - populations[hi],
                sz_lo: diagram.sz[lo],
                sz_hi: diagram.sz[hi],
            });
        }
    }
    Ok(out)
}
