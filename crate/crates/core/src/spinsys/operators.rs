use nalgebra::{Complex, DMatrix};

use crate::error::{domain, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// A spin quantum number stored as twice its value, so 5/2 is `Spin(5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);

    /// Accepts 1/2, 1, 3/2, ... given as a float.
    pub fn new(j: f64) -> Result<Spin> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return domain(format!("spin {j} is not a positive half-integer"));
        }
        if twice > 64.0 {
            return domain(format!("spin {j} too large"));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn from_twice(twice: u32) -> Result<Spin> {
        if twice == 0 || twice > 64 {
            return domain(format!("twice-spin {twice} out of range"));
        }
        Ok(Spin(twice))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// 2j + 1.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// Magnetic quantum numbers in basis order j, j-1, ..., -j.
    pub fn m_values(self) -> impl Iterator<Item = f64> {
        let j = self.value();
        (0..self.multiplicity()).map(move |k| j - k as f64)
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Cartesian angular momentum matrices in the |j, m> basis, m descending.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

impl SpinOperators {
    pub fn new(spin: Spin) -> SpinOperators {
        let n = spin.multiplicity();
        let j = spin.value();
        let m: Vec<f64> = spin.m_values().collect();
        let mut plus = CMatrix::zeros(n, n);
        // <m+1| J+ |m> sits one row above the diagonal since m descends.
        for col in 1..n {
            let mm = m[col];
            plus[(col - 1, col)] = Complex::new((j * (j + 1.0) - mm * (mm + 1.0)).sqrt(), 0.0);
        }
        let minus = plus.adjoint();
        let half = Complex::new(0.5, 0.0);
        let x = (&plus + &minus) * half;
        let y = (&plus - &minus) * Complex::new(0.0, -0.5);
        let z = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, m.iter().map(|&v| Complex::new(v, 0.0))));
        SpinOperators { x, y, z }
    }

    pub fn plus(&self) -> CMatrix {
        &self.x + &self.y * Complex::i()
    }

    pub fn minus(&self) -> CMatrix {
        &self.x - &self.y * Complex::i()
    }
}

/// Jx, Jy, Jz for a half-integer `j` given as a float.
pub fn spin_operators(j: f64) -> Result<SpinOperators> {
    Ok(SpinOperators::new(Spin::new(j)?))
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = spin_operators(0.5).unwrap();
        assert_eq!(ops.z[(0, 0)].re, 0.5);
        assert_eq!(ops.z[(1, 1)].re, -0.5);
        assert_eq!(ops.x[(0, 1)].re, 0.5);
        assert_eq!(ops.x[(1, 0)].re, 0.5);
        assert_eq!(ops.x[(0, 0)].re, 0.0);
    }

    #[test]
    fn spin_five_halves_ladder() {
        let ops = spin_operators(2.5).unwrap();
        let z: Vec<f64> = (0..6).map(|k| ops.z[(k, k)].re).collect();
        assert_eq!(z, vec![2.5, 1.5, 0.5, -0.5, -1.5, -2.5]);
        // <3/2|J+|1/2>: row of m=3/2 is 1, column of m=1/2 is 2.
        let p = ops.plus();
        assert!((p[(1, 2)].re - 8f64.sqrt()).abs() < 1e-14);
        assert!((p[(1, 2)].re - (35.0f64 / 4.0 - 3.0 / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn spin_one_casimir() {
        let ops = spin_operators(1.0).unwrap();
        let c = &ops.x * &ops.x + &ops.y * &ops.y + &ops.z * &ops.z;
        let two = CMatrix::identity(3, 3) * Complex::new(2.0, 0.0);
        assert!(close(&c, &two, 1e-14));
    }

    #[test]
    fn rejects_non_half_integer() {
        assert!(spin_operators(0.3).is_err());
        assert!(spin_operators(0.0).is_err());
        assert!(spin_operators(-0.5).is_err());
        assert!(spin_operators(f64::NAN).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(Spin::new(2.5).unwrap().to_string(), "5/2");
        assert_eq!(Spin::new(1.0).unwrap().to_string(), "1");
    }

    proptest! {
        #[test]
        fn commutator_and_hermiticity(twice in 1u32..12) {
            let ops = SpinOperators::new(Spin::from_twice(twice).unwrap());
            let comm = &ops.x * &ops.y - &ops.y * &ops.x;
            let iz = &ops.z * Complex::i();
            prop_assert!(close(&comm, &iz, 1e-12));
            prop_assert!(close(&ops.x, &ops.x.adjoint(), 0.0));
            prop_assert!(close(&ops.y, &ops.y.adjoint(), 0.0));
            prop_assert!(close(&ops.z, &ops.z.adjoint(), 0.0));
        }
    }
}
