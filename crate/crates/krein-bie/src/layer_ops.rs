//! Nyström discretization of the four boundary operators of the trace
//! calculus — γ₀SL_z, γ₁^±SL_z, γ₀^±DL_z, γ₁DL_z — plus off-surface layer
//! potentials and the 2×2 Weyl blocks built from them.
//!
//! On a closed smooth curve every kernel is split as
//!
//! ```text
//! k(t, s) = a(t, s) · ln(4 sin²((t−s)/2)) + b(t, s)
//! ```
//!
//! with `a`, `b` smooth; the log factor is integrated with the classical
//! periodic log-quadrature weights (exact on trigonometric polynomials up to
//! the grid bandwidth) and `b` with the trapezoid rule, so smooth-curve
//! assemblies converge superalgebraically.  Diagonal limits of `a` and `b`
//! are supplied analytically from the small-argument expansions of K₀/K₁.
//! The hypersingular operator never appears as a kernel: it is reduced by
//! the Maue identity to tangential derivatives around a single-layer-type
//! matrix plus a κ²-weighted single layer.
//!
//! One-sided traces are represented as ±½·Id around the shared
//! principal-value matrix, which makes the jump relations exact by
//! construction; the principal-value parts themselves are what the circle
//! oracles and the dense-quadrature tests certify.

pub mod arc;

use crate::geometry::BoundaryGrid;
use crate::kernels::{self, bessel, KernelConfig, KernelError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

type CMatrix = DMatrix<Complex64>;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum LayerError {
    #[error("this assembly needs a uniform closed-curve grid, not a graded arc grid")]
    NeedClosedGrid,
    #[error("this assembly needs a graded arc grid")]
    NeedArcGrid,
    #[error("evaluation point ({0:.3}, {1:.3}) is {2:.3e} from the boundary; need > {3:.3e} (three grid spacings)")]
    TooCloseToBoundary(f64, f64, f64, f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Which side of Γ a one-sided trace is taken from; `Plus` is the side the
/// outward normal points into (the unbounded component).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    G0Sl,
    G1SlPlus,
    G1SlMinus,
    G0DlPlus,
    G0DlMinus,
    G1Dl,
}

/// Dense discretization of one boundary operator, acting on nodal values.
#[derive(Debug, Clone)]
pub struct LayerMatrix {
    pub entries: CMatrix,
    pub tag: OperatorTag,
    pub z: Complex64,
    pub grid: BoundaryGrid,
}

impl LayerMatrix {
    /// Matrix–vector product with a fixed left-to-right summation order per
    /// row, so results are bit-identical regardless of parallelism.
    pub fn apply(&self, density: &[Complex64]) -> Vec<Complex64> {
        apply_rows(&self.entries, density)
    }

    /// W^{1/2}·A·W^{−1/2} with W the quadrature weights: the similarity that
    /// exposes the L²(Γ) symmetry of the underlying kernel.  Hermitian (for
    /// real spectral parameter) because the assembled entries factor as
    /// (symmetric kernel part)·(column weight).
    pub fn weighted_symmetrization(&self) -> CMatrix {
        let w = quadrature_weights(&self.grid);
        let n = self.entries.nrows();
        CMatrix::from_fn(n, n, |i, j| {
            self.entries[(i, j)] * (w[i] / w[j]).sqrt()
        })
    }
}

/// The weights pairing nodal values with ∫_Γ · ds for the grid at hand: the
/// grid's own weights on closed curves, the cosine-chart (Chebyshev–Gauss)
/// weights on arcs, which stay spectrally accurate for densities carrying
/// the inverse-square-root edge behavior of arc problems.
pub fn quadrature_weights(grid: &BoundaryGrid) -> Vec<f64> {
    match &grid.arc {
        None => grid.weights.clone(),
        Some(meta) => {
            let m = grid.len();
            let h_u = std::f64::consts::PI / m as f64;
            (0..m)
                .map(|j| h_u * meta.halfwidth * meta.u_nodes[j].sin() * grid.speeds[j])
                .collect()
        }
    }
}

pub(crate) fn apply_rows(matrix: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(matrix.ncols(), v.len());
    (0..matrix.nrows())
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &vj) in v.iter().enumerate() {
                acc += matrix[(i, j)] * vj;
            }
            acc
        })
        .collect()
}

/// Weights R_m of the periodic quadrature for ln(4 sin²((t−s)/2)) on a
/// uniform grid of `n_nodes` points (only node differences enter, so any
/// uniform offset, including midpoint grids, is covered).
pub(crate) fn kress_weights(n_nodes: usize) -> Vec<f64> {
    let n_half = n_nodes / 2;
    let h = TWO_PI / n_nodes as f64;
    (0..n_nodes)
        .map(|m| {
            let d = h * m as f64;
            let mut sum = 0.0;
            for k in 1..n_half {
                sum += (k as f64 * d).cos() / k as f64;
            }
            -(TWO_PI / n_half as f64) * sum
                - (std::f64::consts::PI / (n_half * n_half) as f64) * (n_half as f64 * d).cos()
        })
        .collect()
}

/// Spectral differentiation matrix d/dt on a uniform periodic grid of even
/// size (entries ½(−1)^{i−j}cot((t_i−t_j)/2)); valid on midpoint grids too.
pub(crate) fn trig_differentiation(n_nodes: usize) -> DMatrix<f64> {
    let h = TWO_PI / n_nodes as f64;
    DMatrix::from_fn(n_nodes, n_nodes, |i, j| {
        if i == j {
            0.0
        } else {
            let d = 0.5 * (i as f64 - j as f64) * h;
            0.5 * if (i + j) % 2 == 0 { 1.0 } else { -1.0 } * (d.cos() / d.sin())
        }
    })
}

fn require_closed(grid: &BoundaryGrid) -> Result<(), LayerError> {
    if grid.arc.is_some() {
        return Err(LayerError::NeedClosedGrid);
    }
    Ok(())
}

/// Entry recipe shared by all log-split closed-curve assemblies: for i ≠ j
/// the entry is [R_{|i−j|}·a_ij + h·(full_ij − a_ij·ln(4sin²((t_i−t_j)/2)))]
/// and the diagonal gets the analytic limits of `a` and of the smooth part.
fn closed_log_assembly<F, A, DA, DB>(
    grid: &BoundaryGrid,
    full: F,
    log_coeff: A,
    diag_log_coeff: DA,
    diag_smooth: DB,
    with_speed: bool,
) -> CMatrix
where
    F: Fn(usize, usize) -> Complex64 + Sync,
    A: Fn(usize, usize) -> Complex64 + Sync,
    DA: Fn(usize) -> Complex64 + Sync,
    DB: Fn(usize) -> Complex64 + Sync,
{
    let n = grid.len();
    let h = TWO_PI / n as f64;
    let r_weights = kress_weights(n);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let speed = if with_speed { grid.speeds[j] } else { 1.0 };
                    if i == j {
                        (r_weights[0] * diag_log_coeff(i) + h * diag_smooth(i)) * speed
                    } else {
                        let a = log_coeff(i, j);
                        let log_val =
                            (4.0 * (0.5 * (grid.params[i] - grid.params[j])).sin().powi(2)).ln();
                        let b = full(i, j) - a * log_val;
                        (r_weights[(i as isize - j as isize).unsigned_abs() % n] * a + h * b)
                            * speed
                    }
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// γ₀SL_z: the weakly singular single-layer trace.
pub fn assemble_g0sl(grid: &BoundaryGrid, cfg: &KernelConfig) -> Result<LayerMatrix, LayerError> {
    require_closed(grid)?;
    let kappa = cfg.kappa;
    let entries = closed_log_assembly(
        grid,
        |i, j| {
            kernels::fundamental_solution(cfg, grid.points[i], grid.points[j])
                .expect("grid nodes are distinct")
        },
        |i, j| {
            let r = dist(grid.points[i], grid.points[j]);
            -bessel::i0_i1(kappa * r).0 / (4.0 * std::f64::consts::PI)
        },
        |_| Complex64::new(-1.0 / (4.0 * std::f64::consts::PI), 0.0),
        |i| -((0.5 * kappa * grid.speeds[i]).ln() + EULER_GAMMA) / TWO_PI,
        true,
    );
    Ok(LayerMatrix { entries, tag: OperatorTag::G0Sl, z: cfg.z, grid: grid.clone() })
}

/// Principal-value part K_z of the double-layer trace γ₀DL_z.
fn assemble_dl_pv(grid: &BoundaryGrid, cfg: &KernelConfig) -> CMatrix {
    let kappa = cfg.kappa;
    closed_log_assembly(
        grid,
        |i, j| {
            kernels::conormal_gradient(cfg, grid.points[i], grid.points[j], grid.normals[j])
                .expect("grid nodes are distinct")
        },
        |i, j| dl_log_coeff(kappa, grid.points[i], grid.points[j], grid.normals[j]),
        |_| Complex64::new(0.0, 0.0),
        |i| Complex64::new(-grid.curvatures[i] / (4.0 * std::f64::consts::PI), 0.0),
        true,
    )
}

/// Principal-value part K′_z of the adjoint trace γ₁SL_z.
fn assemble_sl_normal_pv(grid: &BoundaryGrid, cfg: &KernelConfig) -> CMatrix {
    let kappa = cfg.kappa;
    closed_log_assembly(
        grid,
        |i, j| {
            kernels::conormal_gradient_x(cfg, grid.points[i], grid.points[j], grid.normals[i])
                .expect("grid nodes are distinct")
        },
        |i, j| dl_log_coeff(kappa, grid.points[j], grid.points[i], grid.normals[i]),
        |_| Complex64::new(0.0, 0.0),
        |i| Complex64::new(-grid.curvatures[i] / (4.0 * std::f64::consts::PI), 0.0),
        true,
    )
}

/// Log coefficient (κ/4π)·I₁(κr)·((x−y)·ν)/r of the double-layer-type
/// kernels; I₁(v)/v is entire so this is smooth with value 0 on the
/// diagonal.
fn dl_log_coeff(kappa: Complex64, x: [f64; 2], y: [f64; 2], nu: [f64; 2]) -> Complex64 {
    let r = dist(x, y);
    let w = (x[0] - y[0]) * nu[0] + (x[1] - y[1]) * nu[1];
    let i1 = bessel::i0_i1(kappa * r).1;
    kappa * i1 * w / (4.0 * std::f64::consts::PI * r)
}

/// γ₀^±DL_z = ±½·Id + K_z.
pub fn assemble_g0dl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    side: Side,
) -> Result<LayerMatrix, LayerError> {
    require_closed(grid)?;
    let mut entries = assemble_dl_pv(grid, cfg);
    let half = match side {
        Side::Plus => 0.5,
        Side::Minus => -0.5,
    };
    for i in 0..entries.nrows() {
        entries[(i, i)] += Complex64::new(half, 0.0);
    }
    let tag = match side {
        Side::Plus => OperatorTag::G0DlPlus,
        Side::Minus => OperatorTag::G0DlMinus,
    };
    Ok(LayerMatrix { entries, tag, z: cfg.z, grid: grid.clone() })
}

/// γ₁^±SL_z = ∓½·Id + K′_z.
pub fn assemble_g1sl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    side: Side,
) -> Result<LayerMatrix, LayerError> {
    require_closed(grid)?;
    let mut entries = assemble_sl_normal_pv(grid, cfg);
    let half = match side {
        Side::Plus => -0.5,
        Side::Minus => 0.5,
    };
    for i in 0..entries.nrows() {
        entries[(i, i)] += Complex64::new(half, 0.0);
    }
    let tag = match side {
        Side::Plus => OperatorTag::G1SlPlus,
        Side::Minus => OperatorTag::G1SlMinus,
    };
    Ok(LayerMatrix { entries, tag, z: cfg.z, grid: grid.clone() })
}

/// γ₁DL_z by the Maue identity: (1/|x′|)·𝒟·S⁰_z·𝒟 − κ²·S^{νν}_z, with 𝒟 the
/// spectral parameter derivative, S⁰ the speed-free single layer and S^{νν}
/// the (ν_i·ν_j)-weighted one.  Both one-sided traces coincide with this.
pub fn assemble_g1dl(grid: &BoundaryGrid, cfg: &KernelConfig) -> Result<LayerMatrix, LayerError> {
    require_closed(grid)?;
    let kappa = cfg.kappa;
    let s0 = closed_log_assembly(
        grid,
        |i, j| {
            kernels::fundamental_solution(cfg, grid.points[i], grid.points[j])
                .expect("grid nodes are distinct")
        },
        |i, j| {
            let r = dist(grid.points[i], grid.points[j]);
            -bessel::i0_i1(kappa * r).0 / (4.0 * std::f64::consts::PI)
        },
        |_| Complex64::new(-1.0 / (4.0 * std::f64::consts::PI), 0.0),
        |i| -((0.5 * kappa * grid.speeds[i]).ln() + EULER_GAMMA) / TWO_PI,
        false,
    );
    let snn = closed_log_assembly(
        grid,
        |i, j| {
            let nn = grid.normals[i][0] * grid.normals[j][0] + grid.normals[i][1] * grid.normals[j][1];
            kernels::fundamental_solution(cfg, grid.points[i], grid.points[j])
                .expect("grid nodes are distinct")
                * nn
        },
        |i, j| {
            let nn = grid.normals[i][0] * grid.normals[j][0] + grid.normals[i][1] * grid.normals[j][1];
            let r = dist(grid.points[i], grid.points[j]);
            -bessel::i0_i1(kappa * r).0 * nn / (4.0 * std::f64::consts::PI)
        },
        |_| Complex64::new(-1.0 / (4.0 * std::f64::consts::PI), 0.0),
        |i| -((0.5 * kappa * grid.speeds[i]).ln() + EULER_GAMMA) / TWO_PI,
        true,
    );
    let n = grid.len();
    let d = trig_differentiation(n).map(|x| Complex64::new(x, 0.0));
    let mut first = &d * s0 * &d;
    for i in 0..n {
        let inv_speed = Complex64::new(1.0 / grid.speeds[i], 0.0);
        for j in 0..n {
            first[(i, j)] *= inv_speed;
        }
    }
    let entries = first - snn.map(|e| e * kappa * kappa);
    Ok(LayerMatrix { entries, tag: OperatorTag::G1Dl, z: cfg.z, grid: grid.clone() })
}

/// Off-surface single-layer potential at the given points.
pub fn eval_sl_field(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    density: &[Complex64],
    points: &[[f64; 2]],
) -> Result<Vec<Complex64>, LayerError> {
    eval_field(grid, points, |x, j| {
        kernels::fundamental_solution(cfg, x, grid.points[j]).expect("point is off the boundary")
    })
    .map(|weights_applied| weighted_sums(grid, density, weights_applied))
}

/// Matrix of the single-layer potential map: row p, column j holds the
/// quadrature-weighted kernel from node j to evaluation point p, so that
/// (matrix · density) evaluates the potential at every point at once.
pub fn sl_potential_matrix(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    points: &[[f64; 2]],
) -> Result<CMatrix, LayerError> {
    let rows = eval_field(grid, points, |x, j| {
        kernels::fundamental_solution(cfg, x, grid.points[j]).expect("point is off the boundary")
    })?;
    Ok(weighted_matrix(grid, rows))
}

/// Matrix of the double-layer potential map, weighted like
/// [`sl_potential_matrix`].
pub fn dl_potential_matrix(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    points: &[[f64; 2]],
) -> Result<CMatrix, LayerError> {
    let rows = eval_field(grid, points, |x, j| {
        kernels::conormal_gradient(cfg, x, grid.points[j], grid.normals[j])
            .expect("point is off the boundary")
    })?;
    Ok(weighted_matrix(grid, rows))
}

fn weighted_matrix(grid: &BoundaryGrid, kernel_rows: Vec<Vec<Complex64>>) -> CMatrix {
    let w = quadrature_weights(grid);
    let n = grid.len();
    CMatrix::from_fn(kernel_rows.len(), n, |p, j| kernel_rows[p][j] * w[j])
}

/// The distance guard used by every off-surface evaluation: each point must
/// be more than three grid spacings away from the nearest node.
pub fn require_off_boundary(
    grid: &BoundaryGrid,
    points: &[[f64; 2]],
) -> Result<(), LayerError> {
    let spacing = grid.weights.iter().cloned().fold(0.0_f64, f64::max);
    let required = 3.0 * spacing;
    for &p in points {
        let distance = grid
            .points
            .iter()
            .map(|&q| dist(p, q))
            .fold(f64::INFINITY, f64::min);
        if distance <= required {
            return Err(LayerError::TooCloseToBoundary(p[0], p[1], distance, required));
        }
    }
    Ok(())
}

/// Off-surface double-layer potential at the given points.
pub fn eval_dl_field(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
    density: &[Complex64],
    points: &[[f64; 2]],
) -> Result<Vec<Complex64>, LayerError> {
    eval_field(grid, points, |x, j| {
        kernels::conormal_gradient(cfg, x, grid.points[j], grid.normals[j])
            .expect("point is off the boundary")
    })
    .map(|weights_applied| weighted_sums(grid, density, weights_applied))
}

/// Distance guard plus kernel-row evaluation; returns rows of kernel values.
fn eval_field<K>(
    grid: &BoundaryGrid,
    points: &[[f64; 2]],
    kernel: K,
) -> Result<Vec<Vec<Complex64>>, LayerError>
where
    K: Fn([f64; 2], usize) -> Complex64 + Sync,
{
    require_off_boundary(grid, points)?;
    Ok(points
        .par_iter()
        .map(|&p| (0..grid.len()).map(|j| kernel(p, j)).collect())
        .collect())
}

fn weighted_sums(
    grid: &BoundaryGrid,
    density: &[Complex64],
    kernel_rows: Vec<Vec<Complex64>>,
) -> Vec<Complex64> {
    let w = quadrature_weights(grid);
    kernel_rows
        .into_iter()
        .map(|row| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..row.len() {
                acc += row[j] * density[j] * w[j];
            }
            acc
        })
        .collect()
}

/// 2N×2N block of the (averaged) boundary operators at one spectral
/// parameter, ordered (γ₀SL, γ₀DL; γ₁SL, γ₁DL) — the M°_z of the resolvent
/// formulas — or their difference between λ∘ and z, which is M_z.
#[derive(Debug, Clone)]
pub struct WeylBlock {
    pub matrix: CMatrix,
    pub z: Complex64,
    /// Present when this is the differenced block M_z (λ∘ minus z).
    pub lambda0: Option<f64>,
}

/// M°_z: the plain block of principal-value operators at z.
pub fn m_circ_block(grid: &BoundaryGrid, cfg: &KernelConfig) -> Result<WeylBlock, LayerError> {
    require_closed(grid)?;
    let n = grid.len();
    let g0sl = assemble_g0sl(grid, cfg)?.entries;
    let g0dl = assemble_dl_pv(grid, cfg);
    let g1sl = assemble_sl_normal_pv(grid, cfg);
    let g1dl = assemble_g1dl(grid, cfg)?.entries;
    let mut matrix = CMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, 0), (n, n)).copy_from(&g0sl);
    matrix.view_mut((0, n), (n, n)).copy_from(&g0dl);
    matrix.view_mut((n, 0), (n, n)).copy_from(&g1sl);
    matrix.view_mut((n, n), (n, n)).copy_from(&g1dl);
    Ok(WeylBlock { matrix, z: cfg.z, lambda0: None })
}

/// M_z = M°_{λ∘} − M°_z, the differenced Weyl block: all ½-jump ambiguities
/// cancel because the jumps are parameter independent.
pub fn weyl_block(
    grid: &BoundaryGrid,
    cfg_at_z: &KernelConfig,
    cfg_at_lambda0: &KernelConfig,
) -> Result<WeylBlock, LayerError> {
    assert_eq!(
        cfg_at_lambda0.z.im, 0.0,
        "the reference point λ∘ must be real"
    );
    let at_l0 = m_circ_block(grid, cfg_at_lambda0)?;
    let at_z = m_circ_block(grid, cfg_at_z)?;
    Ok(WeylBlock {
        matrix: at_l0.matrix - at_z.matrix,
        z: cfg_at_z.z,
        lambda0: Some(cfg_at_lambda0.z.re),
    })
}

pub(crate) fn dist(x: [f64; 2], y: [f64; 2]) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}
