//! Free-space kernel of −Δ + V₀ in the plane and its conormal derivatives.
//!
//! For spectral parameter z with z + V₀ off the negative real axis the
//! resolvent kernel is
//!
//! ```text
//! g_z(x, y) = (1/2π) K₀(κ |x − y|),    κ = principal sqrt(z + V₀), Re κ > 0,
//! ```
//!
//! which decays exponentially.  On the open negative half-line z + V₀ < 0 the
//! resolvent boundary value is reached from below (limiting absorption with
//! Im z < 0): the branch κ = −i√|z + V₀| turns (1/2π)K₀(κr) into
//! (i/4)H₀⁽¹⁾(√|z+V₀| r), the outgoing oscillatory kernel used for
//! scattering.  [`KernelConfig`] records which regime is active so callers
//! can pick quadratures and spectral scans accordingly.

pub mod bessel;

use bessel::BesselError;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("field/source points coincide (|x - y| = {r:.3e}); the kernel is log-singular")]
    CoincidentPoints { r: f64 },
    #[error("z + V0 = 0 is the branch point of sqrt; no kernel branch is defined there")]
    BranchPoint,
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Points `x`, `y` below this separation are treated as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-14;

/// Spectral parameter, potential shift and the chosen square-root branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Constant background potential V₀.
    pub v0: f64,
    /// Spectral parameter z of (−Δ + V₀ + z)⁻¹-type formulas.
    pub z: Complex64,
    /// κ with κ² = z + V₀; Re κ > 0 off the cut, κ = −i·|κ| on it.
    pub kappa: Complex64,
    /// True when κ is purely imaginary, i.e. the kernel oscillates
    /// (outgoing Hankel regime) instead of decaying.
    pub oscillatory: bool,
}

impl KernelConfig {
    /// Kernel for spectral parameter `z`.  Off the negative real half-line of
    /// z + V₀ this takes the principal square root (Re κ > 0, exponentially
    /// decaying kernel); exactly on it, the outgoing branch κ = −i√|z+V₀|.
    pub fn new(v0: f64, z: Complex64) -> Result<Self, KernelError> {
        let shifted = z + v0;
        if shifted.norm() == 0.0 {
            return Err(KernelError::BranchPoint);
        }
        let (kappa, oscillatory) = if shifted.im == 0.0 && shifted.re < 0.0 {
            (Complex64::new(0.0, -(-shifted.re).sqrt()), true)
        } else {
            (shifted.sqrt(), false)
        };
        Ok(KernelConfig { v0, z, kappa, oscillatory })
    }

    /// Limiting-absorption configuration at wavenumber `k > 0`: the boundary
    /// value of z = −k² − V₀ − iε as ε ↓ 0, i.e. κ = −ik (outgoing).
    pub fn limiting_absorption(v0: f64, k: f64) -> Self {
        KernelConfig {
            v0,
            z: Complex64::new(-k * k - v0, 0.0),
            kappa: Complex64::new(0.0, -k),
            oscillatory: true,
        }
    }
}

/// g_z(x, y) = (1/2π) K₀(κ |x − y|).
pub fn fundamental_solution(
    config: &KernelConfig,
    x: [f64; 2],
    y: [f64; 2],
) -> Result<Complex64, KernelError> {
    let r = distance(x, y);
    if r < COINCIDENCE_TOLERANCE {
        return Err(KernelError::CoincidentPoints { r });
    }
    let (k0, _) = bessel::k0_k1(config.kappa * r)?;
    Ok(k0 / (2.0 * std::f64::consts::PI))
}

/// ν(y) · ∇_y g_z(x, y) = (κ/2π) K₁(κr) ((x − y)·ν(y)) / r — the kernel of
/// the double layer / adjoint data taken in the source variable.
pub fn conormal_gradient(
    config: &KernelConfig,
    x: [f64; 2],
    y: [f64; 2],
    normal_at_y: [f64; 2],
) -> Result<Complex64, KernelError> {
    let r = distance(x, y);
    if r < COINCIDENCE_TOLERANCE {
        return Err(KernelError::CoincidentPoints { r });
    }
    let (_, k1) = bessel::k0_k1(config.kappa * r)?;
    let dot = (x[0] - y[0]) * normal_at_y[0] + (x[1] - y[1]) * normal_at_y[1];
    Ok(config.kappa * k1 * dot / (2.0 * std::f64::consts::PI * r))
}

/// ν(x) · ∇_x g_z(x, y) = −(κ/2π) K₁(κr) ((x − y)·ν(x)) / r — the normal
/// derivative in the field variable, i.e. the γ₁-trace kernel.
pub fn conormal_gradient_x(
    config: &KernelConfig,
    x: [f64; 2],
    y: [f64; 2],
    normal_at_x: [f64; 2],
) -> Result<Complex64, KernelError> {
    let r = distance(x, y);
    if r < COINCIDENCE_TOLERANCE {
        return Err(KernelError::CoincidentPoints { r });
    }
    let (_, k1) = bessel::k0_k1(config.kappa * r)?;
    let dot = (x[0] - y[0]) * normal_at_x[0] + (x[1] - y[1]) * normal_at_x[1];
    Ok(-config.kappa * k1 * dot / (2.0 * std::f64::consts::PI * r))
}

fn distance(x: [f64; 2], y: [f64; 2]) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_selection() {
        // decaying branch: Re κ > 0 whenever z + V0 misses the cut
        let c = KernelConfig::new(0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(c.kappa, Complex64::new(1.0, 0.0));
        assert!(!c.oscillatory);

        let c = KernelConfig::new(2.0, Complex64::new(-1.0, 0.0)).unwrap();
        assert_eq!(c.kappa, Complex64::new(1.0, 0.0));

        // on the cut: outgoing branch
        let c = KernelConfig::new(0.0, Complex64::new(-4.0, 0.0)).unwrap();
        assert_eq!(c.kappa, Complex64::new(0.0, -2.0));
        assert!(c.oscillatory);

        // kappa² = z + V0 in every case
        for &(v0, zr, zi) in &[(0.0, 1.0, 0.0), (3.0, -1.0, 2.0), (0.0, -4.0, 0.0), (-1.0, 0.5, -0.25)] {
            let c = KernelConfig::new(v0, Complex64::new(zr, zi)).unwrap();
            let err = (c.kappa * c.kappa - (c.z + c.v0)).norm();
            assert!(err < 1e-14, "kappa^2 mismatch {err:e}");
        }

        assert!(matches!(
            KernelConfig::new(2.0, Complex64::new(-2.0, 0.0)),
            Err(KernelError::BranchPoint)
        ));
    }

    #[test]
    fn limiting_absorption_is_the_epsilon_limit() {
        // κ(ε) from z = −k² − iε has positive real part and converges to −ik
        let k = 2.0;
        let on_cut = KernelConfig::limiting_absorption(0.0, k);
        assert_eq!(on_cut.kappa, Complex64::new(0.0, -2.0));
        let mut prev_gap = f64::INFINITY;
        for &eps in &[1e-1, 1e-3, 1e-5] {
            let c = KernelConfig::new(0.0, Complex64::new(-k * k, -eps)).unwrap();
            assert!(c.kappa.re > 0.0);
            let gap = (c.kappa - on_cut.kappa).norm();
            assert!(gap < prev_gap, "branch must be approached monotonically");
            prev_gap = gap;
        }
    }

    #[test]
    fn free_kernel_value_and_symmetry() {
        // (1/2π) K0(1) at unit distance, κ = 1
        let c = KernelConfig::new(0.0, Complex64::new(1.0, 0.0)).unwrap();
        let g = fundamental_solution(&c, [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((g.re - 0.067008120508497137).abs() < 1e-15);
        assert_eq!(g.im, 0.0);

        // symmetry g(x,y) = g(y,x) for a genuinely complex z
        let c = KernelConfig::new(0.5, Complex64::new(1.5, -2.0)).unwrap();
        let x = [0.3, -1.1];
        let y = [-0.2, 0.4];
        let gxy = fundamental_solution(&c, x, y).unwrap();
        let gyx = fundamental_solution(&c, y, x).unwrap();
        assert!((gxy - gyx).norm() < 1e-16);
    }

    #[test]
    fn conormal_matches_finite_differences() {
        let c = KernelConfig::new(0.7, Complex64::new(2.0, 1.3)).unwrap();
        let x = [0.9, 0.2];
        let y = [-0.4, -0.3];
        let nu = [0.6, 0.8];
        let h = 1e-6;

        let fd_y = (fundamental_solution(&c, x, [y[0] + h * nu[0], y[1] + h * nu[1]]).unwrap()
            - fundamental_solution(&c, x, [y[0] - h * nu[0], y[1] - h * nu[1]]).unwrap())
            / (2.0 * h);
        let an_y = conormal_gradient(&c, x, y, nu).unwrap();
        assert!((fd_y - an_y).norm() < 1e-9 * an_y.norm().max(1.0));

        let fd_x = (fundamental_solution(&c, [x[0] + h * nu[0], x[1] + h * nu[1]], y).unwrap()
            - fundamental_solution(&c, [x[0] - h * nu[0], x[1] - h * nu[1]], y).unwrap())
            / (2.0 * h);
        let an_x = conormal_gradient_x(&c, x, y, nu).unwrap();
        assert!((fd_x - an_x).norm() < 1e-9 * an_x.norm().max(1.0));
    }

    #[test]
    fn pde_residual_by_five_point_stencil() {
        // (−Δ + V0 + z) g_z = 0 away from the source, checked with a
        // five-point Laplacian at step h (residual O(h²)·scale)
        let v0 = 0.6;
        let z = Complex64::new(1.1, 0.8);
        let c = KernelConfig::new(v0, z).unwrap();
        let y = [0.0, 0.0];
        let x = [0.8, 0.5];
        let h = 1e-4;
        let g = |p: [f64; 2]| fundamental_solution(&c, p, y).unwrap();
        let lap = (g([x[0] + h, x[1]]) + g([x[0] - h, x[1]]) + g([x[0], x[1] + h])
            + g([x[0], x[1] - h])
            - 4.0 * g(x))
            / (h * h);
        let residual = -lap + (v0 + z) * g(x);
        assert!(residual.norm() < 1e-6, "stencil residual {:e}", residual.norm());
    }

    #[test]
    fn oscillatory_kernel_satisfies_helmholtz_stencil() {
        // on-cut branch: (−Δ − k²) g = 0 with g = (i/4)H0^(1)(kr) up to scaling
        let k = 2.0;
        let c = KernelConfig::limiting_absorption(0.0, k);
        let y = [0.0, 0.0];
        let x = [1.1, -0.7];
        let h = 1e-4;
        let g = |p: [f64; 2]| fundamental_solution(&c, p, y).unwrap();
        let lap = (g([x[0] + h, x[1]]) + g([x[0] - h, x[1]]) + g([x[0], x[1] + h])
            + g([x[0], x[1] - h])
            - 4.0 * g(x))
            / (h * h);
        let residual = -lap - k * k * g(x);
        assert!(residual.norm() < 1e-6, "stencil residual {:e}", residual.norm());
    }

    #[test]
    fn decay_dichotomy() {
        // real κ > 0: |g| strictly decreasing in r and tending to zero
        let c = KernelConfig::new(0.0, Complex64::new(1.0, 0.0)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=40 {
            let r = 0.5 * k as f64;
            let g = fundamental_solution(&c, [r, 0.0], [0.0, 0.0]).unwrap().norm();
            assert!(g < prev);
            prev = g;
        }
        assert!(prev < 1e-9);

        // oscillatory branch: |g|·√r stays bounded on r ∈ [1, 100]
        let c = KernelConfig::limiting_absorption(0.0, 1.5);
        assert!(c.oscillatory);
        for k in 0..100 {
            let r = 1.0 + k as f64;
            let g = fundamental_solution(&c, [r, 0.0], [0.0, 0.0]).unwrap().norm();
            assert!(g * r.sqrt() < 1.0, "|g|√r = {} at r = {r}", g * r.sqrt());
        }
    }

    #[test]
    fn conormal_sign_for_radial_configuration() {
        // y on the unit circle, ν = y, x = 2y: the field decays outward, so
        // the ν-derivative in the field variable is negative; by radial
        // symmetry the source-side derivative has the opposite sign
        let c = KernelConfig::new(0.0, Complex64::new(1.0, 0.0)).unwrap();
        let y = [0.6, 0.8];
        let x = [1.2, 1.6];
        let outward = conormal_gradient_x(&c, x, y, y).unwrap();
        assert!(outward.re < 0.0 && outward.im == 0.0);
        let source_side = conormal_gradient(&c, x, y, y).unwrap();
        assert!((source_side + outward).norm() < 1e-16);
    }

    #[test]
    fn conormal_accuracy_over_random_configurations() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let c = KernelConfig::new(0.3, Complex64::new(1.2, 0.4)).unwrap();
        let h = 1e-6;
        for _ in 0..100 {
            let x: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let mut y: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            // keep the pair separated so the log singularity stays resolved
            if ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt() < 0.5 {
                y[0] += 1.0;
                y[1] -= 1.0;
            }
            let angle: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let nu = [angle.cos(), angle.sin()];
            let fd = (fundamental_solution(&c, x, [y[0] + h * nu[0], y[1] + h * nu[1]]).unwrap()
                - fundamental_solution(&c, x, [y[0] - h * nu[0], y[1] - h * nu[1]]).unwrap())
                / (2.0 * h);
            let exact = conormal_gradient(&c, x, y, nu).unwrap();
            assert!((fd - exact).norm() <= 1e-6, "FD gap {:e}", (fd - exact).norm());
        }

        // ν ⟂ (x − y) annihilates the kernel exactly
        let v = conormal_gradient(&c, [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn branch_continuous_on_absorption_path() {
        // κ(λ + iε) for fixed λ < −V0 is continuous in ε down to 1e−6
        let v0 = 0.5;
        let lambda = -3.0;
        let mut prev: Option<Complex64> = None;
        let mut eps = 1.0;
        while eps >= 1e-6 {
            let c = KernelConfig::new(v0, Complex64::new(lambda, eps)).unwrap();
            if let Some(p) = prev {
                // |dκ/dε| = 1/(2|κ|) ≤ 1/2 here, so halving ε moves κ by ≤ ε/2
                assert!((c.kappa - p).norm() < eps, "jump at ε = {eps}");
            }
            prev = Some(c.kappa);
            eps *= 0.5;
        }
    }

    #[test]
    fn coincident_points_are_refused() {
        let c = KernelConfig::new(0.0, Complex64::new(1.0, 0.0)).unwrap();
        let x = [0.5, 0.5];
        assert!(matches!(
            fundamental_solution(&c, x, x),
            Err(KernelError::CoincidentPoints { .. })
        ));
        assert!(matches!(
            conormal_gradient(&c, x, [0.5, 0.5 + 1e-15], [1.0, 0.0]),
            Err(KernelError::CoincidentPoints { .. })
        ));
    }
}
