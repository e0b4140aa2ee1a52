//! Fourier–Sobolev calculus on a smooth closed curve.
//!
//! Elements of H^s(Γ) are held as Fourier coefficients with respect to the
//! orthonormal arc-length eigenfunctions φ_n(θ) = e^{inθ}/√(2πR) of −Δ_Γ on
//! the circle of radius R; the eigenvalues are λ_n = n²/R², so the scale of
//! spaces is generated by the diagonal operator Λ = (−Δ_Γ + 1)^{1/2} with
//! symbol (n²/R² + 1)^{1/2}.  For non-circular curves the same basis in the
//! uniform parameter defines a spectrally equivalent norm (with R the
//! arc-length-equivalent radius L/2π); everything that relies on Λ being the
//! exact Laplace–Beltrami power runs on the circle.
//!
//! Arcs enter through nodal index sets: restriction drops the complement
//! nodes, inclusion extends by zero, which is the discrete model of the
//! closed subspace of distributions supported on Σ̄.

use crate::geometry::BoundaryGrid;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceSpaceError {
    #[error("pairing requires dual orders (−s, s); got ({0}, {1})")]
    OrderMismatch(f64, f64),
    #[error("operands live on different discretizations (mode count or radius differ)")]
    ShapeMismatch,
    #[error("{fraction:.3e} of the sample energy sits above mode {n_max}; increase the band or refine")]
    Aliasing { fraction: f64, n_max: usize },
    #[error("modal transforms need a uniform periodic grid")]
    GridNotUniform,
    #[error("need at least 2·n_max + 1 = {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("index sets must partition 0..{0}")]
    BadIndexSet(usize),
}

/// Fourier representative of an element of H^s(Γ), modes n = −n_max..n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector {
    coeffs: Vec<Complex64>,
    pub n_max: usize,
    pub sobolev_order: f64,
    pub radius: f64,
}

impl TraceVector {
    /// Wraps coefficients listed from n = −n_max to n = +n_max.
    pub fn new(coeffs: Vec<Complex64>, sobolev_order: f64, radius: f64) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficients must cover -n_max..=n_max");
        assert!(coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        let n_max = coeffs.len() / 2;
        TraceVector { coeffs, n_max, sobolev_order, radius }
    }

    pub fn zero(n_max: usize, sobolev_order: f64, radius: f64) -> Self {
        TraceVector {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n_max + 1],
            n_max,
            sobolev_order,
            radius,
        }
    }

    /// The basis vector φ_n itself (coefficient 1 in slot n).
    pub fn single_mode(n: i64, n_max: usize, sobolev_order: f64, radius: f64) -> Self {
        let mut v = TraceVector::zero(n_max, sobolev_order, radius);
        *v.coeff_mut(n) = Complex64::new(1.0, 0.0);
        v
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs[(n + self.n_max as i64) as usize]
    }

    pub fn coeff_mut(&mut self, n: i64) -> &mut Complex64 {
        &mut self.coeffs[(n + self.n_max as i64) as usize]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(k, &c)| (k as i64 - n_max, c))
    }

    /// (n²/R² + 1) for mode n — the symbol of Λ².
    fn lambda_plus_one(&self, n: i64) -> f64 {
        let freq = n as f64 / self.radius;
        freq * freq + 1.0
    }
}

/// Λ^r: H^s → H^{s−r}, the diagonal map c_n ↦ (n²/R² + 1)^{r/2} c_n.
pub fn lambda_power(v: &TraceVector, r: f64) -> TraceVector {
    let coeffs = v
        .modes()
        .map(|(n, c)| c * v.lambda_plus_one(n).powf(0.5 * r))
        .collect();
    TraceVector::new(coeffs, v.sobolev_order - r, v.radius)
}

/// ‖v‖_{H^s} = (Σ_n (n²/R² + 1)^s |c_n|²)^{1/2}.
pub fn sobolev_norm(v: &TraceVector, s: f64) -> f64 {
    v.modes()
        .map(|(n, c)| v.lambda_plus_one(n).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// H^{−s}–H^s pairing Σ_n conj(f_n) g_n (conjugate-linear in `f`), which is
/// ⟨Λ^{−s}f, Λ^{s}g⟩_{L²} because Λ^{2s} is the duality map of the scale.
pub fn duality_pairing(f: &TraceVector, g: &TraceVector) -> Result<Complex64, TraceSpaceError> {
    if (f.sobolev_order + g.sobolev_order).abs() > 1e-12 {
        return Err(TraceSpaceError::OrderMismatch(f.sobolev_order, g.sobolev_order));
    }
    if f.n_max != g.n_max || (f.radius - g.radius).abs() > 1e-14 * f.radius.abs() {
        return Err(TraceSpaceError::ShapeMismatch);
    }
    Ok(f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a.conj() * b).sum())
}

/// Fraction of energy outside the retained band above which `grid_to_modes`
/// refuses the samples.
pub const ALIASING_TOLERANCE: f64 = 1e-8;

/// Projects nodal samples on a uniform periodic grid onto modes −n_max..n_max.
///
/// The grid must be a closed-curve grid (uniform in t); the radius is taken
/// as length/2π so the circle case is exact.  Fails when more than
/// [`ALIASING_TOLERANCE`] of the discrete energy sits above the band.
pub fn grid_to_modes(
    samples: &[Complex64],
    grid: &BoundaryGrid,
    n_max: usize,
    sobolev_order: f64,
) -> Result<TraceVector, TraceSpaceError> {
    let n = grid.len();
    if grid.arc.is_some() || !is_uniform(&grid.params) {
        return Err(TraceSpaceError::GridNotUniform);
    }
    assert_eq!(samples.len(), n, "one sample per grid node");
    if n < 2 * n_max + 1 {
        return Err(TraceSpaceError::TooFewNodes { needed: 2 * n_max + 1, got: n });
    }
    let radius = grid.length() / (2.0 * std::f64::consts::PI);

    // plain DFT: û_m = (1/N) Σ_j u_j e^{−i m t_j}, m over the full band
    let half = n as i64 / 2;
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    let mut in_band = 0.0;
    let mut total = 0.0;
    for (k, h) in hat.iter_mut().enumerate() {
        let m = if (k as i64) <= half { k as i64 } else { k as i64 - n as i64 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &u) in samples.iter().enumerate() {
            let phase = -(m as f64) * grid.params[j];
            acc += u * Complex64::new(phase.cos(), phase.sin());
        }
        *h = acc / n as f64;
        let e = h.norm_sqr();
        total += e;
        if m.unsigned_abs() as usize <= n_max {
            in_band += e;
        }
    }
    if total > 0.0 {
        let fraction = ((total - in_band) / total).max(0.0);
        if fraction > ALIASING_TOLERANCE {
            return Err(TraceSpaceError::Aliasing { fraction, n_max });
        }
    }

    // c_n = √(2πR) û_n (normalization of φ_n = e^{inθ}/√(2πR))
    let scale = (2.0 * std::f64::consts::PI * radius).sqrt();
    let coeffs = (-(n_max as i64)..=n_max as i64)
        .map(|m| {
            let k = if m >= 0 { m as usize } else { (m + n as i64) as usize };
            hat[k] * scale
        })
        .collect();
    Ok(TraceVector::new(coeffs, sobolev_order, radius))
}

/// Evaluates the modal representative back on a uniform grid of `n_nodes`.
pub fn modes_to_grid(v: &TraceVector, n_nodes: usize) -> Result<Vec<Complex64>, TraceSpaceError> {
    if n_nodes < 2 * v.n_max + 1 {
        return Err(TraceSpaceError::TooFewNodes { needed: 2 * v.n_max + 1, got: n_nodes });
    }
    let scale = 1.0 / (2.0 * std::f64::consts::PI * v.radius).sqrt();
    let h = 2.0 * std::f64::consts::PI / n_nodes as f64;
    Ok((0..n_nodes)
        .map(|j| {
            let t = h * j as f64;
            v.modes()
                .map(|(n, c)| {
                    let phase = n as f64 * t;
                    c * Complex64::new(phase.cos(), phase.sin())
                })
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

fn is_uniform(params: &[f64]) -> bool {
    if params.len() < 2 {
        return true;
    }
    let h = params[1] - params[0];
    params
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() < 1e-12)
}

/// Node-index split of a closed-curve grid into Σ and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcIndexSet {
    pub sigma: Vec<usize>,
    pub complement: Vec<usize>,
    pub n_total: usize,
}

impl ArcIndexSet {
    /// Splits by membership of t_j in the open parameter interval (t0, t1).
    pub fn from_interval(grid: &BoundaryGrid, t0: f64, t1: f64) -> Self {
        let mut sigma = Vec::new();
        let mut complement = Vec::new();
        for (j, &t) in grid.params.iter().enumerate() {
            if t > t0 && t < t1 {
                sigma.push(j);
            } else {
                complement.push(j);
            }
        }
        ArcIndexSet { sigma, complement, n_total: grid.len() }
    }

    pub fn from_indices(sigma: Vec<usize>, n_total: usize) -> Result<Self, TraceSpaceError> {
        let mut seen = vec![false; n_total];
        for &j in &sigma {
            if j >= n_total || seen[j] {
                return Err(TraceSpaceError::BadIndexSet(n_total));
            }
            seen[j] = true;
        }
        let complement = (0..n_total).filter(|&j| !seen[j]).collect();
        Ok(ArcIndexSet { sigma, complement, n_total })
    }
}

/// R_Σ: keeps the Σ-node entries, in Σ-index order.
pub fn arc_restrict(samples: &[Complex64], arc: &ArcIndexSet) -> Vec<Complex64> {
    assert_eq!(samples.len(), arc.n_total);
    arc.sigma.iter().map(|&j| samples[j]).collect()
}

/// The adjoint inclusion: extends Σ-node values by zero to the whole grid.
pub fn arc_include(sigma_samples: &[Complex64], arc: &ArcIndexSet) -> Vec<Complex64> {
    assert_eq!(sigma_samples.len(), arc.sigma.len());
    let mut out = vec![Complex64::new(0.0, 0.0); arc.n_total];
    for (k, &j) in arc.sigma.iter().enumerate() {
        out[j] = sigma_samples[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize_curve, CurveParam};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_vector(rng: &mut ChaCha8Rng, n_max: usize, order: f64, radius: f64) -> TraceVector {
        let coeffs = (0..2 * n_max + 1)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        TraceVector::new(coeffs, order, radius)
    }

    #[test]
    fn lambda_power_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_vector(&mut rng, 5, 0.0, 1.0);

        // r = 0 is the identity
        assert_eq!(lambda_power(&v, 0.0).coeffs(), v.coeffs());

        // the n = 0 coefficient never changes, any order
        for &r in &[-2.0, -0.5, 1.0, 3.0] {
            assert_eq!(lambda_power(&v, r).coeff(0), v.coeff(0));
        }

        // R = 1, n = 3, r = 2: multiply by (9 + 1)^1 = 10
        let w = lambda_power(&v, 2.0);
        assert!((w.coeff(3) - 10.0 * v.coeff(3)).norm() < 1e-14);
        assert_eq!(w.sobolev_order, -2.0);

        // unitarity between orders: Λ^r then Λ^{−r} is the identity
        let round = lambda_power(&lambda_power(&v, 1.7), -1.7);
        for n in -5..=5 {
            assert!((round.coeff(n) - v.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn sobolev_norm_closed_forms() {
        // the constant function 1 on the unit circle: c₀ = √(2π), norm √(2π) at every s
        let mut c = TraceVector::zero(4, 0.0, 1.0);
        *c.coeff_mut(0) = Complex64::new((2.0 * PI).sqrt(), 0.0);
        for &s in &[-1.0, -0.5, 0.0, 0.5, 2.0] {
            assert!((sobolev_norm(&c, s) - (2.0 * PI).sqrt()).abs() < 1e-14);
        }

        // φ₁ at s = 1/2: (1 + 1)^{1/4}
        let v = TraceVector::single_mode(1, 4, 0.5, 1.0);
        assert!((sobolev_norm(&v, 0.5) - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn sobolev_norm_monotone_and_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let v = random_vector(&mut rng, 8, 0.0, 1.0);
            // s ≤ t ⇒ ‖v‖_{H^s} ≤ ‖v‖_{H^t}
            let mut prev = 0.0;
            for &s in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
                let n = sobolev_norm(&v, s);
                assert!(n >= prev - 1e-13);
                prev = n;
            }
            // ‖v‖_{H^1} ≤ ε‖v‖_{H^2} + (1/4ε)‖v‖_{H^0} with ε = 0.1
            let eps = 0.1;
            assert!(
                sobolev_norm(&v, 1.0)
                    <= eps * sobolev_norm(&v, 2.0) + sobolev_norm(&v, 0.0) / (4.0 * eps) + 1e-13
            );
        }
    }

    #[test]
    fn duality_pairing_conventions() {
        let phi0 = TraceVector::single_mode(0, 3, 0.5, 1.0);
        let mut dual0 = phi0.clone();
        dual0.sobolev_order = -0.5;
        assert_eq!(duality_pairing(&dual0, &phi0).unwrap(), Complex64::new(1.0, 0.0));

        let phi2 = TraceVector::single_mode(2, 3, 0.5, 1.0);
        assert_eq!(duality_pairing(&dual0, &phi2).unwrap(), Complex64::new(0.0, 0.0));

        // mismatched orders are refused
        assert!(matches!(
            duality_pairing(&phi0, &phi2),
            Err(TraceSpaceError::OrderMismatch(_, _))
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = random_vector(&mut rng, 6, 0.75, 1.3);
            // ⟨Λ^{2s} g, g⟩_{−s,s} = ‖g‖²_{H^s}
            let lhs = duality_pairing(&lambda_power(&g, 2.0 * 0.75), &g).unwrap();
            let rhs = sobolev_norm(&g, 0.75).powi(2);
            assert!((lhs - rhs).norm() < 1e-13 * rhs);
            // Cauchy–Schwarz through Λ
            let f = {
                let mut f = random_vector(&mut rng, 6, 0.0, 1.3);
                f.sobolev_order = -0.75;
                f
            };
            let pairing = duality_pairing(&f, &g).unwrap().norm();
            assert!(pairing <= sobolev_norm(&f, -0.75) * sobolev_norm(&g, 0.75) + 1e-13);
        }
    }

    #[test]
    fn modal_transforms_round_trip() {
        let grid = discretize_curve(&CurveParam::Circle { radius: 1.0 }, 32).unwrap();

        // constants map to the single coefficient c₀
        let ones = vec![Complex64::new(1.0, 0.0); 32];
        let v = grid_to_modes(&ones, &grid, 5, 0.0).unwrap();
        assert!((v.coeff(0) - (2.0 * PI).sqrt()).norm() < 1e-13);
        for n in 1..=5i64 {
            assert!(v.coeff(n).norm() < 1e-14 && v.coeff(-n).norm() < 1e-14);
        }

        // round trip on random band-limited data
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = random_vector(&mut rng, 5, 0.0, 1.0);
        let samples = modes_to_grid(&w, 32).unwrap();
        let back = grid_to_modes(&samples, &grid, 5, 0.0).unwrap();
        for n in -5..=5 {
            assert!((back.coeff(n) - w.coeff(n)).norm() < 1e-12);
        }

        // Parseval against the quadrature weights
        let quad: f64 = grid.weights.iter().zip(&samples).map(|(w, u)| w * u.norm_sqr()).sum();
        let modal: f64 = w.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!((quad - modal).abs() < 1e-12 * modal);
    }

    #[test]
    fn aliasing_is_detected() {
        let grid = discretize_curve(&CurveParam::Circle { radius: 1.0 }, 32).unwrap();
        // mode 9 lies outside the band n ≤ 5 and must trip the energy check
        let samples: Vec<Complex64> = grid
            .params
            .iter()
            .map(|&t| Complex64::new((9.0 * t).cos(), (9.0 * t).sin()))
            .collect();
        match grid_to_modes(&samples, &grid, 5, 0.0) {
            Err(TraceSpaceError::Aliasing { fraction, .. }) => assert!(fraction > 0.99),
            other => panic!("expected aliasing error, got {other:?}"),
        }
    }

    #[test]
    fn arc_restriction_and_inclusion() {
        let grid = discretize_curve(&CurveParam::Circle { radius: 1.0 }, 16).unwrap();
        let arc = ArcIndexSet::from_interval(&grid, 0.5, 3.5);
        assert!(!arc.sigma.is_empty() && !arc.complement.is_empty());
        assert_eq!(arc.sigma.len() + arc.complement.len(), 16);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let full: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let on_sigma = arc_restrict(&full, &arc);

        // restrict ∘ include = identity on Σ-samples
        assert_eq!(arc_restrict(&arc_include(&on_sigma, &arc), &arc), on_sigma);

        // include ∘ restrict is idempotent
        let proj = arc_include(&arc_restrict(&full, &arc), &arc);
        let proj2 = arc_include(&arc_restrict(&proj, &arc), &arc);
        assert_eq!(proj, proj2);

        // weighted duality ⟨include f, g⟩ = ⟨f, restrict g⟩
        let g = full.clone();
        let lhs: Complex64 = arc_include(&on_sigma, &arc)
            .iter()
            .zip(&g)
            .zip(&grid.weights)
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum();
        let rhs: Complex64 = on_sigma
            .iter()
            .zip(arc_restrict(&g, &arc).iter())
            .zip(arc.sigma.iter().map(|&j| grid.weights[j]))
            .map(|((a, b), w)| a.conj() * b * w)
            .sum();
        assert!((lhs - rhs).norm() < 1e-14);

        // supports on Σ̄ and on the complement's nodes pair to exactly zero
        let on_complement: Vec<Complex64> = {
            let mut v = vec![Complex64::new(0.0, 0.0); 16];
            for &j in &arc.complement {
                v[j] = Complex64::new(1.0, -2.0);
            }
            v
        };
        let pair: Complex64 = arc_include(&on_sigma, &arc)
            .iter()
            .zip(&on_complement)
            .zip(&grid.weights)
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum();
        assert_eq!(pair, Complex64::new(0.0, 0.0));

        // malformed index sets are refused
        assert!(ArcIndexSet::from_indices(vec![0, 0], 4).is_err());
        assert!(ArcIndexSet::from_indices(vec![9], 4).is_err());
    }
}
