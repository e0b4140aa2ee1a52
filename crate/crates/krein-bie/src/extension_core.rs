//! Exact finite-dimensional model of the abstract extension theory.
//!
//! A Hermitian matrix A on ℂ^dim_H plays the self-adjoint operator, a full-
//! row-rank matrix τ the trace map onto the boundary space 𝔥 = ℂ^dim_h, and
//! a positive matrix `gram` the duality mapping J between 𝔥 and its dual.
//! Both 𝔥 and 𝔥′ live in the same coordinates; the convention used
//! throughout is
//!
//! ```text
//! ⟨φ, ψ⟩_{𝔥′,𝔥} = φ† gram⁻¹ ψ,        J = gram,
//! ```
//!
//! so the 𝔥 inner product is the plain Euclidean one, primed (dual) maps are
//! gram-conjugations, and the γ-field and Weyl family become concrete
//! matrices:
//!
//! ```text
//! G_z = R_z τ† gram⁻¹,     M_z = τ(G_{λ∘} − G_z),     R_z = (−A + z)⁻¹.
//! ```
//!
//! Self-adjointness "in the duality sense" of an operator O: ran(Π′) → ran(Π)
//! then means O·gram is Hermitian.  Everything here is exact linear algebra —
//! no quadrature — so the resolvent formula, its first resolvent identity and
//! adjoint symmetry can be checked to near machine precision.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("{0} must be Hermitian (defect {1:.3e})")]
    NotHermitian(&'static str, f64),
    #[error("trace map is rank deficient: σ_min/σ_max = {0:.3e}")]
    RankDeficientTrace(f64),
    #[error("gram matrix must be positive definite (min eigenvalue {0:.3e})")]
    GramNotPositive(f64),
    #[error("λ∘ = {lambda0} sits on the spectrum (distance {distance:.3e})")]
    Lambda0InSpectrum { lambda0: f64, distance: f64 },
    #[error("z = {z} is numerically in the spectrum of A (‖R_z‖ > 1e12)")]
    SingularShift { z: Complex64 },
    #[error("Θ + ΠM_zΠ′ is singular on ran(Π) at z = {z} (σ_min/σ_max = {ratio:.3e}); z is an eigenvalue of the extension")]
    SingularBlock { z: Complex64, ratio: f64 },
    #[error("Π is not an orthogonal projection (defect {0:.3e})")]
    NotProjection(f64),
}

/// Shared relative threshold for "numerically singular" blocks.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// The (A, τ, gram, λ∘) tuple on which the extension algebra is evaluated.
#[derive(Debug, Clone)]
pub struct AbstractModel {
    pub a: CMatrix,
    pub tau: CMatrix,
    pub gram: CMatrix,
    pub lambda0: f64,
}

impl AbstractModel {
    pub fn new(a: CMatrix, tau: CMatrix, gram: CMatrix, lambda0: f64) -> Result<Self, ExtensionError> {
        let defect = hermitian_defect(&a);
        if defect > 1e-14 * (1.0 + a.norm()) {
            return Err(ExtensionError::NotHermitian("A", defect));
        }
        let sv = tau.clone().svd(false, false).singular_values;
        let (smin, smax) = (sv[sv.len() - 1], sv[0]);
        if smin <= SINGULARITY_THRESHOLD * smax {
            return Err(ExtensionError::RankDeficientTrace(smin / smax));
        }
        let defect = hermitian_defect(&gram);
        if defect > 1e-14 * (1.0 + gram.norm()) {
            return Err(ExtensionError::NotHermitian("gram", defect));
        }
        let gram_eigs = gram.clone().symmetric_eigen().eigenvalues;
        let min_eig = gram_eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig <= 0.0 {
            return Err(ExtensionError::GramNotPositive(min_eig));
        }
        let spectrum = a.clone().symmetric_eigen().eigenvalues;
        let distance = spectrum.iter().map(|&e| (e - lambda0).abs()).fold(f64::INFINITY, f64::min);
        if distance <= 1e-8 {
            return Err(ExtensionError::Lambda0InSpectrum { lambda0, distance });
        }
        Ok(AbstractModel { a, tau, gram, lambda0 })
    }

    /// Random instance with the invariants built in: A = B + B†, τ the first
    /// dim_h rows of a Haar-ish unitary, gram = CC† + 0.1·Id, λ∘ above the
    /// spectrum.
    pub fn random(rng: &mut impl Rng, dim_big: usize, dim_small: usize) -> Self {
        assert!(dim_small <= dim_big);
        let b = random_matrix(rng, dim_big, dim_big);
        let a = &b + b.adjoint();
        let q = random_matrix(rng, dim_big, dim_big).qr().q();
        let tau = q.rows(0, dim_small).into_owned();
        let c = random_matrix(rng, dim_small, dim_small);
        let gram = &c * c.adjoint() + CMatrix::identity(dim_small, dim_small).scale(0.1);
        let top = a
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let lambda0 = top + 1.0;
        AbstractModel::new(a, tau, gram, lambda0).expect("construction recipe guarantees invariants")
    }

    pub fn dim_state(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_trace(&self) -> usize {
        self.tau.nrows()
    }

    /// R_z = (−A + z)⁻¹, guarded against shifts inside the spectrum.
    pub fn resolvent(&self, z: Complex64) -> Result<CMatrix, ExtensionError> {
        let n = self.dim_state();
        let shifted = CMatrix::identity(n, n).scale_mut_into(z) - &self.a;
        let sv = shifted.clone().svd(false, false).singular_values;
        if sv[sv.len() - 1] < 1e-12 {
            return Err(ExtensionError::SingularShift { z });
        }
        Ok(shifted.lu().try_inverse().expect("guarded by singular-value check"))
    }

    fn gram_inverse(&self) -> CMatrix {
        self.gram.clone().lu().try_inverse().expect("gram is positive definite")
    }
}

/// G_z = R_z τ† gram⁻¹ — the matrix with ⟨G_zφ, u⟩_H = ⟨φ, τR_z̄ u⟩_{𝔥′,𝔥}.
pub fn gamma_field(model: &AbstractModel, z: Complex64) -> Result<CMatrix, ExtensionError> {
    Ok(model.resolvent(z)? * model.tau.adjoint() * model.gram_inverse())
}

/// M_z = τ(G_{λ∘} − G_z); equivalently (z − λ∘)·G′·G_z.
pub fn weyl_operator(model: &AbstractModel, z: Complex64) -> Result<CMatrix, ExtensionError> {
    let g0 = gamma_field(model, Complex64::new(model.lambda0, 0.0))?;
    let gz = gamma_field(model, z)?;
    Ok(&model.tau * (g0 - gz))
}

/// Boundary parameters (Π, Θ) selecting one self-adjoint extension.
#[derive(Debug, Clone)]
pub struct ExtensionParams {
    pub pi: CMatrix,
    pub theta: CMatrix,
}

impl ExtensionParams {
    pub fn new(pi: CMatrix, theta: CMatrix, model: &AbstractModel) -> Result<Self, ExtensionError> {
        let defect = hermitian_defect(&pi).max((&pi * &pi - &pi).norm());
        if defect > 1e-13 * (1.0 + pi.norm()) {
            return Err(ExtensionError::NotProjection(defect));
        }
        // Θ·J must be Hermitian on ran(Π)
        let theta_tilde = &pi * &theta * &model.gram * &pi;
        let defect = hermitian_defect(&theta_tilde);
        if defect > 1e-12 * (1.0 + theta_tilde.norm()) {
            return Err(ExtensionError::NotHermitian("Θ·gram on ran(Π)", defect));
        }
        Ok(ExtensionParams { pi, theta })
    }

    /// Random projection of the given rank plus a compatible random Θ
    /// (Θ = Π H gram⁻¹ Π′ with H Hermitian, so Θ·gram is Hermitian by
    /// construction).
    pub fn random(rng: &mut impl Rng, model: &AbstractModel, rank: usize) -> Self {
        let dim = model.dim_trace();
        assert!(rank <= dim);
        let h = random_matrix(rng, dim, dim);
        let herm = &h + h.adjoint();
        let basis = herm.symmetric_eigen().eigenvectors.columns(0, rank).into_owned();
        let pi = &basis * basis.adjoint();
        let g = random_matrix(rng, dim, dim);
        let gherm = &g + g.adjoint();
        let gram_inv = model.gram_inverse();
        let pi_prime = &model.gram * &pi * &gram_inv;
        let theta = &pi * gherm * gram_inv * pi_prime;
        ExtensionParams::new(pi, theta, model).expect("construction recipe guarantees invariants")
    }

    /// Π′ = J Π J⁻¹ — the dual projection.
    pub fn pi_prime(&self, model: &AbstractModel) -> CMatrix {
        &model.gram * &self.pi * model.gram_inverse()
    }
}

/// The resolvent of the extension selected by (Π, Θ):
///
/// ```text
/// R(z) = R_z + G_z Π′ (Θ + Π M_z Π′)⁻¹ Π τ R_z,
/// ```
///
/// with the middle inverse taken on ran(Π) → ran(Π′) through explicit bases.
pub fn krein_resolvent_matrix(
    model: &AbstractModel,
    params: &ExtensionParams,
    z: Complex64,
) -> Result<CMatrix, ExtensionError> {
    let rz = model.resolvent(z)?;
    let basis = range_basis(&params.pi);
    if basis.ncols() == 0 {
        return Ok(rz); // Π = 0: the correction vanishes and R(z) = R_z
    }
    let gz = &rz * model.tau.adjoint() * model.gram_inverse();
    let m_z = weyl_operator(model, z)?;
    let pi_prime = params.pi_prime(model);
    let block = &params.theta + &params.pi * m_z * &pi_prime;

    // reduce to the p×p system between ran(Π′) (basis gram·B) and ran(Π) (basis B)
    let basis_prime = &model.gram * &basis;
    let reduced = basis.adjoint() * block * &basis_prime;
    let sv = reduced.clone().svd(false, false).singular_values;
    let ratio = sv[sv.len() - 1] / sv[0];
    if ratio <= SINGULARITY_THRESHOLD {
        return Err(ExtensionError::SingularBlock { z, ratio });
    }
    let reduced_inv = reduced.lu().try_inverse().expect("guarded by singular-value check");
    let correction = gz * basis_prime * reduced_inv * basis.adjoint() * &model.tau * &rz;
    Ok(rz + correction)
}

/// The boundary datum φ ∈ ran(Π′) of u = R(z)f in the decomposition
/// u = u∘ + G_{λ∘}φ; exposed so tests can check Πτu∘ = Θφ.
pub fn krein_boundary_datum(
    model: &AbstractModel,
    params: &ExtensionParams,
    z: Complex64,
    f: &CMatrix,
) -> Result<CMatrix, ExtensionError> {
    let rz = model.resolvent(z)?;
    let basis = range_basis(&params.pi);
    if basis.ncols() == 0 {
        return Ok(CMatrix::zeros(model.dim_trace(), f.ncols()));
    }
    let m_z = weyl_operator(model, z)?;
    let pi_prime = params.pi_prime(model);
    let block = &params.theta + &params.pi * m_z * &pi_prime;
    let basis_prime = &model.gram * &basis;
    let reduced = basis.adjoint() * block * &basis_prime;
    let reduced_inv = reduced
        .lu()
        .try_inverse()
        .ok_or(ExtensionError::SingularBlock { z, ratio: 0.0 })?;
    Ok(basis_prime * reduced_inv * basis.adjoint() * &model.tau * rz * f)
}

/// Compression of a Hermitian form to ran(Π), expressed in the canonical
/// orthonormal basis obtained by Gram–Schmidt over the columns of Π in index
/// order (so Π = identity reproduces the input verbatim).
#[derive(Debug, Clone)]
pub struct CompressedForm {
    /// p×p Hermitian matrix of the restricted form.
    pub matrix: CMatrix,
    /// dim×p orthonormal basis of ran(Π) in which `matrix` is expressed.
    pub basis: CMatrix,
}

/// Θ_Π = B† Θ̃ B for an orthonormal basis B of ran(Π): the operator of the
/// form of `theta_tilde` restricted to the subspace.
pub fn compress_form(theta_tilde: &CMatrix, pi: &CMatrix) -> CompressedForm {
    let basis = range_basis(pi);
    let matrix = basis.adjoint() * theta_tilde * &basis;
    CompressedForm { matrix, basis }
}

/// Orthonormal basis of the column span by modified Gram–Schmidt in column
/// order, dropping residuals below 1e−8 (projection columns are either O(1)
/// or numerically zero after orthogonalization).
fn range_basis(pi: &CMatrix) -> CMatrix {
    let n = pi.nrows();
    let mut columns: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for j in 0..pi.ncols() {
        let mut v = pi.column(j).into_owned();
        for b in &columns {
            let coeff = b.dotc(&v);
            v -= b.scale_mut_into(coeff);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            columns.push(v.unscale(norm));
        }
    }
    let mut out = CMatrix::zeros(n, columns.len());
    for (j, c) in columns.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Small helper: M·c for scalar c without consuming M (nalgebra's scale is
/// real-only for complex matrices).
trait ScaleInto {
    fn scale_mut_into(&self, c: Complex64) -> Self;
}

impl ScaleInto for CMatrix {
    fn scale_mut_into(&self, c: Complex64) -> Self {
        self.map(|e| e * c)
    }
}

impl ScaleInto for nalgebra::DVector<Complex64> {
    fn scale_mut_into(&self, c: Complex64) -> Self {
        self.map(|e| e * c)
    }
}
