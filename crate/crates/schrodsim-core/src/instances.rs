//! Seeded random problem instances shared by the experiment drivers and the
//! verification suites.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::Result;
use crate::linalg::{self, CMat, CVec};
use crate::linear_core::{hermitian_split, HermitianSplit};

pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> CMat {
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_vector<R: Rng>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random Hermitian matrix scaled to unit spectral radius.
pub fn random_hermitian_unit<R: Rng>(n: usize, rng: &mut R) -> Result<CMat> {
    let m = random_matrix(n, rng);
    let h = (&m + m.adjoint()).map(|z| z * 0.5);
    let (vals, _) = linalg::eigh(&h)?;
    let rad = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    Ok(h.map(|z| z / rad))
}

/// A stable instance: H₁ = −B†B rescaled to unit spectral radius (negative
/// semi-definite, λ₊ = 0) plus a random Hermitian H₂ of unit spectral
/// radius.
pub fn random_stable_split<R: Rng>(n: usize, rng: &mut R) -> Result<HermitianSplit> {
    let b = random_matrix(n, rng);
    let mut h1 = -(b.adjoint() * &b);
    let (vals, _) = linalg::eigh(&h1)?;
    let rad = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    h1 /= C64::new(rad, 0.0);
    let h2 = random_hermitian_unit(n, rng)?;
    hermitian_split(&(&h1 + h2.map(|z| z * C64::i())))
}

/// An unstable instance: a stable split shifted by a multiple of the
/// identity chosen so the top eigenvalue of H₁ lands exactly at δ.
pub fn random_unstable_split<R: Rng>(n: usize, delta: f64, rng: &mut R) -> Result<HermitianSplit> {
    let stable = random_stable_split(n, rng)?;
    let (vals, _) = linalg::eigh(&stable.h1)?;
    let top = vals.last().copied().unwrap_or(0.0);
    let shift = CMat::identity(n, n).map(|z| z * (delta - top));
    hermitian_split(&(&stable.a + shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_core::spectral_data;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stable_split_is_nsd_with_unit_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2, 5, 8] {
            let s = random_stable_split(n, &mut rng).unwrap();
            let sd = spectral_data(&s).unwrap();
            assert!(sd.lambda_plus <= 1e-12);
            assert!((sd.lambda_min + 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn unstable_split_shifts_lambda_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let s = random_unstable_split(4, 0.37, &mut rng).unwrap();
        let sd = spectral_data(&s).unwrap();
        assert!((sd.lambda_plus - 0.37).abs() <= 1e-10);
    }
}
