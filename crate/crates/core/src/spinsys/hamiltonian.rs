use nalgebra::{Complex, Matrix3, Vector3};

use super::operators::{CMatrix, SpinOperators};
use super::SpinSystem;
use crate::constants::CODATA_2018;
use crate::error::{domain, Error, Result};

pub const DEFAULT_MAX_DIM: usize = 4096;

/// ZYZ Euler angles (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Euler {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Euler {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Euler {
        Euler { alpha, beta, gamma }
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Effective g along B0; `orientation` maps lab axes onto crystal axes.
pub fn effective_g(electron: &super::ElectronSpin, orientation: Euler) -> f64 {
    if electron.is_isotropic() {
        return electron.g_principal[0];
    }
    // Field direction in crystal coordinates has polar angles (beta, alpha).
    let in_crystal = orientation.rotation() * Vector3::z();
    let n = electron.g_orientation.rotation().transpose() * in_crystal;
    let g = electron.g_principal;
    ((g[0] * n[0]).powi(2) + (g[1] * n[1]).powi(2) + (g[2] * n[2]).powi(2)).sqrt()
}

/// Equal-weight field directions on the upper hemisphere (generalized spiral).
pub fn spiral_orientations(n: usize) -> Vec<Euler> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let phi = (golden * k as f64).rem_euclid(2.0 * std::f64::consts::PI);
            Euler::new(phi, z.acos(), 0.0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianOptions {
    /// Keep the pseudo-secular and non-secular hyperfine terms A(SxIx + SyIy).
    pub full_hyperfine: bool,
    pub max_dim: usize,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        HamiltonianOptions { full_hyperfine: false, max_dim: DEFAULT_MAX_DIM }
    }
}

/// Tensor-product layout: factor 0 is the electron, then one factor per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductBasis {
    dims: Vec<usize>,
}

impl ProductBasis {
    pub fn new(dims: Vec<usize>) -> ProductBasis {
        ProductBasis { dims }
    }

    pub fn for_system(system: &SpinSystem) -> ProductBasis {
        let mut dims = vec![system.electron.spin.multiplicity()];
        dims.extend(system.sites().iter().map(|s| s.spin.multiplicity()));
        ProductBasis { dims }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Lift a single-factor operator into the product space.
    pub fn embed(&self, op: &CMatrix, factor: usize) -> CMatrix {
        let before: usize = self.dims[..factor].iter().product();
        let after: usize = self.dims[factor + 1..].iter().product();
        let left = CMatrix::identity(before, before).kronecker(op);
        left.kronecker(&CMatrix::identity(after, after))
    }
}

fn real(v: f64) -> Complex<f64> {
    Complex::new(v, 0.0)
}

/// Static spin Hamiltonian in MHz with the secular hyperfine form.
pub fn build_hamiltonian(system: &SpinSystem, b0: f64, orientation: Euler) -> Result<CMatrix> {
    build_hamiltonian_with(system, b0, orientation, &HamiltonianOptions::default())
}

pub fn build_hamiltonian_with(
    system: &SpinSystem,
    b0: f64,
    orientation: Euler,
    opts: &HamiltonianOptions,
) -> Result<CMatrix> {
    if !(b0 >= 0.0) || !b0.is_finite() {
        return domain(format!("field {b0} T must be finite and non-negative"));
    }
    let dim = system.hilbert_dim();
    if dim > opts.max_dim {
        return Err(Error::Capacity { dim, limit: opts.max_dim });
    }
    system.validate()?;

    let basis = ProductBasis::for_system(system);
    let el = &system.electron;
    let s = SpinOperators::new(el.spin);
    let s_cas = el.spin.casimir();
    let zeeman = effective_g(el, orientation) * CODATA_2018.mu_b_over_h() * b0 * 1e-6;

    let sz2 = &s.z * &s.z;
    let ident_e = CMatrix::identity(s.z.nrows(), s.z.ncols());
    let mut h_e = &s.z * real(zeeman);
    if el.d != 0.0 {
        h_e += (&sz2 - &ident_e * real(s_cas / 3.0)) * real(el.d);
    }
    if el.e != 0.0 {
        h_e += (&s.x * &s.x - &s.y * &s.y) * real(el.e);
    }
    let mut h = basis.embed(&h_e, 0);

    let sz = basis.embed(&s.z, 0);
    let (sx, sy) =
        if opts.full_hyperfine { (Some(basis.embed(&s.x, 0)), Some(basis.embed(&s.y, 0))) } else { (None, None) };
    for (k, site) in system.sites().iter().enumerate() {
        let factor = k + 1;
        let i = SpinOperators::new(site.spin);
        let ident_n = CMatrix::identity(i.z.nrows(), i.z.ncols());
        let nu_n = site.gn * CODATA_2018.mu_n_over_h() * b0 * 1e-6;
        let mut h_n = &i.z * real(-nu_n);
        if site.p != 0.0 {
            // First-order quadrupole: m <-> m-1 shifts by 3P(2m-1)/2.
            let q = &i.z * &i.z - &ident_n * real(site.spin.casimir() / 3.0);
            h_n += q * real(1.5 * site.p);
        }
        h += basis.embed(&h_n, factor);
        if site.a != 0.0 {
            let iz = basis.embed(&i.z, factor);
            h += &sz * &iz * real(site.a);
            if let (Some(sx), Some(sy)) = (&sx, &sy) {
                h += sx * basis.embed(&i.x, factor) * real(site.a);
                h += sy * basis.embed(&i.y, factor) * real(site.a);
            }
        }
    }
    Ok(h)
}
