//! First-order Mims ENDOR line positions and signed amplitudes.

use std::f64::consts::PI;

use crate::constants::{nuclear_larmor_mhz, CODATA_2018};
use crate::error::{domain, Error, Result};
use crate::spinsys::{ElectronSpin, NuclearSpecies, Spin};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndorLine {
    /// Site index across all species, 0-based.
    pub site_index: usize,
    /// Electron manifold m_S.
    pub manifold: f64,
    /// Upper nuclear level m of the m <-> m-1 transition.
    pub nuclear_m: f64,
    /// MHz
    pub nu: f64,
    /// Fractional stimulated-echo change, signed.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndorSpectrum {
    pub larmor: f64,
    pub lines: Vec<EndorLine>,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Mims efficiency 1/2 sin^2(pi A tau) for coupling `a_hf` (MHz).
pub fn mims_efficiency(a_hf: f64, tau: f64) -> f64 {
    0.5 * (PI * a_hf * 1e6 * tau).sin().powi(2)
}

/// Electron manifold with the lower Zeeman energy.
pub fn lower_manifold(g_eff: f64) -> f64 {
    if g_eff >= 0.0 {
        -0.5
    } else {
        0.5
    }
}

/// Branch weight (1 - Pe) + s Pe with s = +1 on the lower manifold.
pub fn sign_model(manifold: f64, g_eff: f64, temperature: f64, carrier_ghz: f64) -> f64 {
    let pe = (CODATA_2018.reduced_energy(carrier_ghz * 1e9, temperature) / 2.0).tanh();
    let s = if manifold == lower_manifold(g_eff) { 1.0 } else { -1.0 };
    (1.0 - pe) + s * pe
}

/// Signed Mims ENDOR lines of every site, convolved with a Gaussian of
/// FWHM `width` (MHz) onto `rf_grid`.
#[allow(clippy::too_many_arguments)]
pub fn endor_spectrum(
    electron: &ElectronSpin,
    g_eff: f64,
    nuclei: &[NuclearSpecies],
    b0: f64,
    carrier_ghz: f64,
    tau: f64,
    temperature: f64,
    rf_grid: &[f64],
    width: f64,
) -> Result<EndorSpectrum> {
    if electron.spin != Spin::HALF {
        return Err(Error::UnsupportedModel(format!(
            "Mims ENDOR lines are modelled for S = 1/2 only, not S = {}",
            electron.spin
        )));
    }
    if !(tau > 0.0) || !(temperature > 0.0) || !(width > 0.0) || !(b0 >= 0.0) {
        return domain("ENDOR needs positive tau, temperature and line width");
    }
    if rf_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("RF grid must be ascending");
    }
    let mut lines = Vec::new();
    let mut site_index = 0;
    let mut larmor = f64::NAN;
    for species in nuclei {
        species.validate()?;
        let nu_n = nuclear_larmor_mhz(species.gn, b0);
        larmor = if larmor.is_nan() { nu_n } else { larmor };
        for site in species.sites() {
            let eff = mims_efficiency(site.a, tau);
            for manifold in [0.5, -0.5] {
                let sign = sign_model(manifold, g_eff, temperature, carrier_ghz);
                let ms: Vec<f64> = site.spin.m_values().collect();
                for &m in &ms[..ms.len() - 1] {
                    let nu = (nu_n - manifold * site.a - 1.5 * site.p * (2.0 * m - 1.0)).abs();
                    lines.push(EndorLine { site_index, manifold, nuclear_m: m, nu, amplitude: eff * sign });
                }
            }
            site_index += 1;
        }
    }
    let k = 4.0 * 2f64.ln() / (width * width);
    let values =
        rf_grid.iter().map(|&f| lines.iter().map(|l| l.amplitude * (-k * (f - l.nu).powi(2)).exp()).sum()).collect();
    Ok(EndorSpectrum { larmor, lines, grid: rf_grid.to_vec(), values })
}

/// Combine lines whose positions and signs coincide within `resolution` (MHz).
pub fn merge_lines(lines: &[EndorLine], resolution: f64) -> Vec<EndorLine> {
    let mut sorted = lines.to_vec();
    sorted.sort_by(|a, b| a.nu.total_cmp(&b.nu));
    let mut out: Vec<EndorLine> = Vec::new();
    for l in sorted {
        match out.last_mut() {
            Some(last) if (l.nu - last.nu).abs() <= resolution && last.amplitude.signum() == l.amplitude.signum() => {
                last.amplitude += l.amplitude;
            }
            _ => out.push(l),
        }
    }
    out
}

impl EndorSpectrum {
    pub fn lines_of_site(&self, site: usize) -> impl Iterator<Item = &EndorLine> {
        self.lines.iter().filter(move |l| l.site_index == site)
    }
}
