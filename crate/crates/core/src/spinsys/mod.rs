//! Spin systems, their static high-field Hamiltonians, and level diagrams.

mod eigen;
mod hamiltonian;
mod operators;
mod transitions;

pub use eigen::{eigensystem, Eigensystem};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with, effective_g, spiral_orientations, Euler, HamiltonianOptions,
    ProductBasis, DEFAULT_MAX_DIM,
};
pub use operators::{spin_operators, CMatrix, Spin, SpinOperators};
pub use transitions::{transition_table, LevelDiagram, Transition, DEFAULT_MOMENT_FLOOR};

use crate::error::{domain, Result};

/// Transverse relaxation as a function of field offset from line centre.
///
/// Points are `(offset_mT, t2_s)` sorted by offset; evaluation interpolates
/// linearly and clamps outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct T2Profile {
    points: Vec<(f64, f64)>,
}

impl T2Profile {
    pub fn constant(t2: f64) -> T2Profile {
        T2Profile { points: vec![(0.0, t2)] }
    }

    pub fn from_points(mut points: Vec<(f64, f64)>) -> Result<T2Profile> {
        if points.is_empty() {
            return domain("T2 profile needs at least one point");
        }
        if points.iter().any(|&(b, t)| !b.is_finite() || !(t > 0.0) || !t.is_finite()) {
            return domain("T2 profile values must be finite and T2 > 0");
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return domain("T2 profile has duplicate offsets");
        }
        Ok(T2Profile { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_constant(&self) -> bool {
        self.points.len() == 1
    }

    pub fn at(&self, offset_mt: f64) -> f64 {
        let p = &self.points;
        if offset_mt <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if offset_mt >= last.0 {
            return last.1;
        }
        let k = p.partition_point(|&(b, _)| b <= offset_mt);
        let (b0, t0) = p[k - 1];
        let (b1, t1) = p[k];
        t0 + (t1 - t0) * (offset_mt - b0) / (b1 - b0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronSpin {
    pub spin: Spin,
    pub g_principal: [f64; 3],
    /// ZYZ Euler angles of the g frame in the crystal frame (rad).
    pub g_orientation: Euler,
    /// Axial zero-field splitting (MHz).
    pub d: f64,
    /// Rhombic zero-field splitting (MHz).
    pub e: f64,
    /// Gaussian inhomogeneous FWHM (mT).
    pub linewidth_fwhm: f64,
    pub t1: f64,
    pub t2: T2Profile,
}

impl ElectronSpin {
    /// Isotropic-g electron with no zero-field splitting.
    pub fn isotropic(spin: Spin, g: f64, linewidth_fwhm: f64, t1: f64, t2: f64) -> ElectronSpin {
        ElectronSpin {
            spin,
            g_principal: [g; 3],
            g_orientation: Euler::default(),
            d: 0.0,
            e: 0.0,
            linewidth_fwhm,
            t1,
            t2: T2Profile::constant(t2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.g_principal.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return domain("g principal values must be positive");
        }
        if !self.d.is_finite() || !self.e.is_finite() || self.e.abs() > self.d.abs() / 3.0 + 1e-12 {
            return domain(format!("|E| = {} exceeds |D|/3 = {}", self.e.abs(), self.d.abs() / 3.0));
        }
        if !(self.linewidth_fwhm > 0.0) || !self.linewidth_fwhm.is_finite() {
            return domain("linewidth must be positive");
        }
        if !(self.t1 > 0.0) || !self.t1.is_finite() {
            return domain("T1 must be positive");
        }
        Ok(())
    }

    pub fn is_isotropic(&self) -> bool {
        let g = self.g_principal;
        g[0] == g[1] && g[1] == g[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearSpecies {
    pub label: String,
    pub spin: Spin,
    /// Nuclear g-factor.
    pub gn: f64,
    /// Secular hyperfine coupling along B0 (MHz, signed).
    pub a_secular: f64,
    /// Effective first-order quadrupole coupling along B0 (MHz, signed).
    pub p_eff: f64,
    pub multiplicity: usize,
    /// Per-site offsets `(dA, dP)` in MHz, one entry per site.
    pub site_spread: Vec<(f64, f64)>,
}

/// Couplings of one site after applying its spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearSite {
    pub spin: Spin,
    pub gn: f64,
    pub a: f64,
    pub p: f64,
}

impl NuclearSpecies {
    /// Single-site species without spread.
    pub fn single(label: &str, spin: Spin, gn: f64, a: f64, p: f64) -> NuclearSpecies {
        NuclearSpecies {
            label: label.to_string(),
            spin,
            gn,
            a_secular: a,
            p_eff: p,
            multiplicity: 1,
            site_spread: vec![(0.0, 0.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.multiplicity == 0 {
            return domain(format!("nucleus {}: multiplicity must be at least 1", self.label));
        }
        if self.site_spread.len() != self.multiplicity {
            return domain(format!(
                "nucleus {}: {} site offsets for multiplicity {}",
                self.label,
                self.site_spread.len(),
                self.multiplicity
            ));
        }
        if self.spin == Spin::HALF && (self.p_eff != 0.0 || self.site_spread.iter().any(|s| s.1 != 0.0)) {
            return domain(format!("nucleus {}: quadrupole coupling requires I >= 1", self.label));
        }
        let finite = [self.gn, self.a_secular, self.p_eff].iter().all(|v| v.is_finite())
            && self.site_spread.iter().all(|s| s.0.is_finite() && s.1.is_finite());
        if !finite {
            return domain(format!("nucleus {}: non-finite coupling", self.label));
        }
        Ok(())
    }

    pub fn sites(&self) -> impl Iterator<Item = NuclearSite> + '_ {
        self.site_spread.iter().map(move |&(da, dp)| NuclearSite {
            spin: self.spin,
            gn: self.gn,
            a: self.a_secular + da,
            p: self.p_eff + dp,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub name: String,
    pub electron: ElectronSpin,
    pub nuclei: Vec<NuclearSpecies>,
    /// Absolute number of spins in the sample.
    pub spins_count: f64,
}

impl SpinSystem {
    pub fn validate(&self) -> Result<()> {
        self.electron.validate()?;
        for n in &self.nuclei {
            n.validate()?;
        }
        if !(self.spins_count > 0.0) || !self.spins_count.is_finite() {
            return domain("spin count must be positive");
        }
        Ok(())
    }

    /// All nuclear sites after expanding multiplicities.
    pub fn sites(&self) -> Vec<NuclearSite> {
        self.nuclei.iter().flat_map(|n| n.sites()).collect()
    }

    /// Dimension of the fully coupled Hilbert space.
    pub fn hilbert_dim(&self) -> usize {
        self.sites().iter().fold(self.electron.spin.multiplicity(), |d, s| d.saturating_mul(s.spin.multiplicity()))
    }

    pub fn g_eff(&self, orientation: Euler) -> f64 {
        effective_g(&self.electron, orientation)
    }

    /// Diagonalized level structure at field `b0`.
    pub fn level_diagram(&self, b0: f64, orientation: Euler) -> Result<LevelDiagram> {
        self.level_diagram_with(b0, orientation, &HamiltonianOptions::default())
    }

    pub fn level_diagram_with(&self, b0: f64, orientation: Euler, opts: &HamiltonianOptions) -> Result<LevelDiagram> {
        let h = build_hamiltonian_with(self, b0, orientation, opts)?;
        let eig = eigensystem(&h)?;
        let basis = ProductBasis::for_system(self);
        let s = SpinOperators::new(self.electron.spin);
        let sx = basis.embed(&s.x, 0);
        let sz = basis.embed(&s.z, 0);
        Ok(LevelDiagram::new(eig, &sx, &sz, b0, self.g_eff(orientation)))
    }
}
