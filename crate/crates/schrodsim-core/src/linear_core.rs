//! Square complex linear systems du/dt = Au: the Hermitian/anti-Hermitian
//! split A = H₁ + iH₂, spectral analysis of H₁, a dense-exponential
//! reference propagator, and the exponential stabilization transform.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::linalg::{self, CMat, CVec};

/// A together with its Hermitian part H₁ = (A+A†)/2 and the Hermitian
/// generator H₂ = (A−A†)/(2i), so that A = H₁ + iH₂.
#[derive(Debug, Clone)]
pub struct HermitianSplit {
    pub a: CMat,
    pub h1: CMat,
    pub h2: CMat,
    pub n: usize,
}

impl HermitianSplit {
    /// Entrywise error of H₁ + iH₂ against the stored A.
    pub fn reconstruction_defect(&self) -> f64 {
        let recon = &self.h1 + self.h2.map(|z| z * C64::i());
        linalg::max_abs(&(recon - &self.a))
    }

    /// True when the anti-Hermitian generator vanishes (entrywise tolerance).
    pub fn is_pure_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs(&self.h2) <= tol
    }
}

/// Eigen-data of H₁: ascending eigenvalues, the diagonalizing unitary Q,
/// λ₊ = max(0, λ_max) and λ_min.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub q: CMat,
    pub lambda_plus: f64,
    pub lambda_min: f64,
}

/// Split A into its Hermitian part and anti-Hermitian generator.
pub fn hermitian_split(a: &CMat) -> Result<HermitianSplit> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::Dimension(format!(
            "hermitian_split needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::Parameter("matrix has non-finite entries".into()));
    }
    let adj = a.adjoint();
    let h1 = (a + &adj).map(|z| z * 0.5);
    // H2 = (A - A†) / (2i) = -i/2 (A - A†)
    let h2 = (a - &adj).map(|z| z * C64::new(0.0, -0.5));
    Ok(HermitianSplit { a: a.clone(), h1, h2, n })
}

/// Eigendecomposition of the split's Hermitian part.
pub fn spectral_data(split: &HermitianSplit) -> Result<SpectralData> {
    let (eigenvalues, q) = linalg::eigh(&split.h1)?;
    let lambda_min = eigenvalues.first().copied().unwrap_or(0.0);
    let lambda_max = eigenvalues.last().copied().unwrap_or(0.0);
    Ok(SpectralData {
        eigenvalues,
        q,
        lambda_plus: lambda_max.max(0.0),
        lambda_min,
    })
}

/// Brute-force reference propagator u(t) = e^{At} u₀.
///
/// Uses the Hermitian eigendecomposition when A is (anti-)Hermitian, and
/// Padé scaling-and-squaring otherwise.
pub fn reference_evolve(a: &CMat, u0: &CVec, t: f64) -> Result<CVec> {
    if a.nrows() != a.ncols() {
        return Err(CoreError::Dimension(format!(
            "reference_evolve needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != u0.len() {
        return Err(CoreError::Dimension(format!(
            "matrix is {0}x{0} but the state has length {1}",
            a.nrows(),
            u0.len()
        )));
    }
    if !t.is_finite() {
        return Err(CoreError::Parameter("evolution time must be finite".into()));
    }
    let scale = linalg::max_abs(a).max(1.0);
    let herm_defect = linalg::hermiticity_defect(a);
    let anti_defect = linalg::max_abs(&(a + a.adjoint()));
    let e = if herm_defect <= 1e-14 * scale {
        linalg::expm_hermitian(a, C64::new(t, 0.0))?
    } else if anti_defect <= 1e-14 * scale {
        // A = iH with H = -iA Hermitian
        let h = a.map(|z| z * C64::new(0.0, -1.0));
        linalg::expm_hermitian(&h, C64::new(0.0, t))?
    } else {
        linalg::expm(&a.map(|z| z * t))?
    };
    let out = e * u0;
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::Overflow(format!(
            "state overflowed at t = {t} for an unstable generator"
        )));
    }
    Ok(out)
}

/// Shift the generator: split of A − cI. With c = λ_max(H₁) the shifted
/// Hermitian part is negative semi-definite.
pub fn stabilize(split: &HermitianSplit, c: f64) -> HermitianSplit {
    let shift = CMat::identity(split.n, split.n).map(|z| z * c);
    HermitianSplit {
        a: &split.a - &shift,
        h1: &split.h1 - &shift,
        h2: split.h2.clone(),
        n: split.n,
    }
}
