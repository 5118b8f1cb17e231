//! Reference spectra and result diagnostics: entanglement, overlaps, and
//! weighted quadratic fits of energy curves with Monte-Carlo error propagation.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{reconstruct, DenseHermitian, PauliHamiltonian, PauliString};
use crate::statevector::StateVector;

/// Largest register accepted by [`exact_spectrum`].
pub const MAX_SPECTRUM_QUBITS: usize = 10;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
///
/// Within a degenerate eigenspace the basis is arbitrary; compare subspaces
/// through [`Spectrum::ground_overlap`] rather than individual vectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn spectral_range(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1] - self.eigenvalues[0]
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        let col = self.eigenvectors.column(k);
        StateVector::normalized(col.iter().copied().collect()).expect("eigenvectors are normalized")
    }

    /// Number of eigenvalues within `1e-8 * max(1, |E0|)` of the lowest one.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.eigenvalues[0];
        let tol = 1e-8 * e0.abs().max(1.0);
        self.eigenvalues.iter().take_while(|&&e| e - e0 <= tol).count()
    }

    /// Norm of the projection of `state` onto the ground eigenspace; equals
    /// `|<psi|psi_G>|` when the ground state is non-degenerate.
    pub fn ground_overlap(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.eigenvectors.nrows() {
            return Err(Error::LengthMismatch {
                expected: self.eigenvectors.nrows(),
                found: state.dim(),
            });
        }
        let amps = state.amplitudes();
        let mut weight = 0.0;
        for k in 0..self.ground_degeneracy() {
            let col = self.eigenvectors.column(k);
            let proj: Complex64 = col.iter().zip(amps).map(|(v, a)| v.conj() * a).sum();
            weight += proj.norm_sqr();
        }
        Ok(weight.sqrt().min(1.0))
    }
}

/// Dense diagonalization of `reconstruct(h)`.
pub fn exact_spectrum(h: &PauliHamiltonian) -> Result<Spectrum> {
    if h.n_qubits() > MAX_SPECTRUM_QUBITS {
        return Err(Error::SizeLimit {
            what: "qubits for dense diagonalization",
            value: h.n_qubits(),
            limit: MAX_SPECTRUM_QUBITS,
        });
    }
    Ok(spectrum_of(&reconstruct(h)))
}

pub fn spectrum_of(m: &DenseHermitian) -> Spectrum {
    let eig = SymmetricEigen::new(m.matrix().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let dim = m.dim();
    let eigenvectors = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Two-qubit tangle `C^2` with pure-state concurrence `C = |<psi| Y⊗Y |psi*>|`.
pub fn tangle(state: &StateVector) -> Result<f64> {
    if state.n_qubits() != 2 {
        return Err(Error::QubitMismatch {
            expected: 2,
            found: state.n_qubits(),
        });
    }
    let yy = PauliString::parse("YY").expect("valid label");
    let flipped = state.conjugate().apply_pauli(&yy)?;
    let c = state.inner(&flipped)?.norm();
    Ok((c * c).clamp(0.0, 1.0))
}

/// `|<a|b>|`, invariant under global phases.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// One curve sample: label `r`, energy, and its variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub r: f64,
    pub energy: f64,
    pub variance: f64,
}

/// Weighted least-squares parabola `E(R) = a R^2 + b R + c`.
///
/// Internally the fit runs in the centred, scaled variable
/// `u = (R - center) / scale`; the public coefficients and covariance are
/// the exact linear image of the centred ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Covariance of `(a, b, c)`.
    pub covariance: [[f64; 3]; 3],
    /// `-b / 2a`, present only when `a > 0`.
    pub r_min: Option<f64>,
    /// `c - b^2 / 4a`, present only when `a > 0`.
    pub e_min: Option<f64>,
    /// Weighted residual sum of squares.
    pub chi_square: f64,
    center: f64,
    scale: f64,
    centered: [f64; 3],
    centered_covariance: [[f64; 3]; 3],
}

impl QuadraticFit {
    /// Builds a fit from coefficients and covariance given directly in `R`.
    pub fn from_coefficients(a: f64, b: f64, c: f64, covariance: [[f64; 3]; 3]) -> Self {
        let (r_min, e_min) = vertex(a, b, c);
        Self {
            a,
            b,
            c,
            covariance,
            r_min,
            e_min,
            chi_square: 0.0,
            center: 0.0,
            scale: 1.0,
            centered: [a, b, c],
            centered_covariance: covariance,
        }
    }

    /// Minimum location and value of the parabola, when it opens upward.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        self.r_min.zip(self.e_min)
    }

    /// The same fit with its covariance multiplied by `factor`, e.g. the
    /// residual variance when the points carried no error estimates.
    pub fn with_covariance_scaled(mut self, factor: f64) -> Self {
        for row in self.covariance.iter_mut().chain(self.centered_covariance.iter_mut()) {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        self
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let u = (r - self.center) / self.scale;
        let [al, be, ga] = self.centered;
        al * u * u + be * u + ga
    }
}

fn vertex(a: f64, b: f64, c: f64) -> (Option<f64>, Option<f64>) {
    if a > 0.0 {
        (Some(-b / (2.0 * a)), Some(c - b * b / (4.0 * a)))
    } else {
        (None, None)
    }
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

fn from_array(a: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| a[i][j])
}

/// Generalized least squares with weights `1 / variance` and covariance
/// `(X^T W X)^-1` from the weighted normal equations.
pub fn fit_quadratic_minimum(points: &[FitPoint]) -> Result<QuadraticFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    for p in points {
        if !(p.variance > 0.0 && p.variance.is_finite()) {
            return Err(Error::Fit(format!("non-positive variance {} at R = {}", p.variance, p.r)));
        }
        if !(p.r.is_finite() && p.energy.is_finite()) {
            return Err(Error::Fit(format!("non-finite point at R = {}", p.r)));
        }
    }
    let n = points.len() as f64;
    let center = points.iter().map(|p| p.r).sum::<f64>() / n;
    let scale = points.iter().map(|p| (p.r - center).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Fit("singular design: all R values are equal".into()));
    }

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for p in points {
        let u = (p.r - center) / scale;
        let row = Vector3::new(u * u, u, 1.0);
        let w = 1.0 / p.variance;
        normal += row * row.transpose() * w;
        rhs += row * (w * p.energy);
    }
    let chol = normal
        .cholesky()
        .ok_or_else(|| Error::Fit("singular design: fewer than 3 distinct R values".into()))?;
    let cov_u = chol.inverse();
    // Guard against numerically rank-deficient designs that still factor.
    if (normal * cov_u - Matrix3::identity()).abs().max() > 1e-6 {
        return Err(Error::Fit("singular design matrix".into()));
    }
    let beta = chol.solve(&rhs);
    let cov_u = (cov_u + cov_u.transpose()) * 0.5;

    let chi_square = points
        .iter()
        .map(|p| {
            let u = (p.r - center) / scale;
            let model = beta[0] * u * u + beta[1] * u + beta[2];
            (p.energy - model).powi(2) / p.variance
        })
        .sum();

    let s2 = scale * scale;
    let jac = Matrix3::new(
        1.0 / s2,
        0.0,
        0.0,
        -2.0 * center / s2,
        1.0 / scale,
        0.0,
        center * center / s2,
        -center / scale,
        1.0,
    );
    let coeffs = jac * beta;
    let cov = jac * cov_u * jac.transpose();
    let cov = (cov + cov.transpose()) * 0.5;

    // The vertex is computed in centred coordinates to avoid cancellation.
    let (r_min, e_min) = match vertex(beta[0], beta[1], beta[2]) {
        (Some(u), Some(e)) => (Some(center + scale * u), Some(e)),
        _ => (None, None),
    };

    Ok(QuadraticFit {
        a: coeffs[0],
        b: coeffs[1],
        c: coeffs[2],
        covariance: to_array(&cov),
        r_min,
        e_min,
        chi_square,
        center,
        scale,
        centered: [beta[0], beta[1], beta[2]],
        centered_covariance: to_array(&cov_u),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumUncertainty {
    pub sigma_r_min: f64,
    pub sigma_e_min: f64,
    pub samples: usize,
    /// Samples dropped because their curvature was not positive.
    pub discarded: usize,
    /// Set when more than 10% of samples were discarded.
    pub warning: bool,
}

/// Standard deviations of `(R_min, E_min)` under Gaussian coefficient errors,
/// estimated by sampling coefficient triples from the fit's covariance.
pub fn monte_carlo_minimum_uncertainty(
    fit: &QuadraticFit,
    samples: usize,
    seed: u64,
) -> Result<MinimumUncertainty> {
    if samples < 1000 {
        return Err(Error::Fit(format!("need at least 1000 samples, got {samples}")));
    }
    let cov = from_array(&fit.centered_covariance);
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("degenerate covariance: non-finite entries".into()));
    }
    if (cov - cov.transpose()).abs().max() > 1e-10 * cov.abs().max().max(1e-300) {
        return Err(Error::Fit("degenerate covariance: not symmetric".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let largest = eig.eigenvalues.abs().max();
    if eig.eigenvalues.iter().any(|&l| l < -1e-10 * largest.max(1e-300)) {
        return Err(Error::Fit("degenerate covariance: not positive semidefinite".into()));
    }
    let sqrt = eig.eigenvectors
        * Matrix3::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let mean = Vector3::from(fit.centered);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rs = Vec::with_capacity(samples);
    let mut es = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let t = mean + sqrt * z;
        if let (Some(u), Some(e)) = vertex(t[0], t[1], t[2]) {
            rs.push(fit.center + fit.scale * u);
            es.push(e);
        }
    }
    let discarded = samples - rs.len();
    if rs.len() < 2 {
        return Err(Error::Fit("all Monte-Carlo samples had non-positive curvature".into()));
    }
    Ok(MinimumUncertainty {
        sigma_r_min: std_dev(&rs),
        sigma_e_min: std_dev(&es),
        samples,
        discarded,
        warning: discarded as f64 > 0.1 * samples as f64,
    })
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
