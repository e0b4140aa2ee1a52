//! Boundary operators on an open arc Σ ⊂ Γ, assembled through the cosine
//! double cover.
//!
//! The graded arc chart t(u) = t_c + h_c·cos u, extended to u ∈ [0, 2π),
//! traverses Σ forward and back, turning the arc into a formally closed
//! curve whose parametrization is even under u ↦ 2π−u.  Distances factor as
//!
//! ```text
//! ln r(u, v) = ½·ln(4 sin²((u−v)/2)) + ½·ln(4 sin²((u+v)/2)) + smooth
//! ```
//!
//! so each kernel splits into *two* periodic log convolutions (the second
//! acting at the reflected index) plus a smooth part, and the closed-curve
//! log quadrature applies verbatim on the midpoint grid.  Folding the
//! double cover back (averaging a column with its reflection) yields M×M
//! operator matrices acting on nodal values at the arc nodes.  The cosine
//! chart absorbs the inverse-square-root edge behavior of arc densities:
//! solutions of the arc equations are smooth and even in u, which is what
//! makes the arc Dirichlet solver spectrally accurate.  The hypersingular
//! operator uses the same tangential-derivative reduction as on closed
//! curves; its inner odd-parity integrand costs smoothness at the edges, so
//! Neumann/Robin/δ′ arc assemblies converge at an algebraic rate instead.
//! Densities there must vanish at the arc ends (the natural class for
//! those couplings).

use super::{
    dist, kress_weights, trig_differentiation, LayerError, LayerMatrix, OperatorTag,
};
use crate::geometry::{ArcMeta, BoundaryGrid};
use crate::kernels::{self, bessel, KernelConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

type CMatrix = DMatrix<Complex64>;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const PI: f64 = std::f64::consts::PI;

fn require_arc(grid: &BoundaryGrid) -> Result<&ArcMeta, LayerError> {
    grid.arc.as_ref().ok_or(LayerError::NeedArcGrid)
}

/// Physical node behind cover index j: the second sheet retraces the first.
fn phys(j: usize, m: usize) -> usize {
    if j < m {
        j
    } else {
        2 * m - 1 - j
    }
}

/// Double-cover assembly with the two-log splitting; returns the full
/// 2M×2M cover matrix (fold afterwards).
fn cover_log_assembly<F, A, DA, DB>(
    grid: &BoundaryGrid,
    meta: &ArcMeta,
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
    let m = grid.len();
    let nn = 2 * m;
    let h_u = PI / m as f64;
    let r_weights = kress_weights(nn);
    let u_at = |j: usize| (2 * j + 1) as f64 * PI / nn as f64;
    let rows: Vec<Vec<Complex64>> = (0..nn)
        .into_par_iter()
        .map(|i| {
            let u_i = u_at(i);
            (0..nn)
                .map(|j| {
                    let (pi, pj) = (phys(i, m), phys(j, m));
                    let u_j = u_at(j);
                    let speed = if with_speed {
                        meta.halfwidth * u_j.sin().abs() * grid.speeds[pj]
                    } else {
                        1.0
                    };
                    let r_sum = r_weights[(i as isize - j as isize).unsigned_abs() % nn]
                        + r_weights[(i + j + 1) % nn];
                    if pi == pj {
                        (r_sum * diag_log_coeff(pi) + h_u * diag_smooth(pi)) * speed
                    } else {
                        let a = log_coeff(pi, pj);
                        // ln(4sin²((u−v)/2)) + ln(4sin²((u+v)/2)) = ln(4(cos u − cos v)²)
                        let dcos = u_i.cos() - u_j.cos();
                        let b = full(pi, pj) - a * (4.0 * dcos * dcos).ln();
                        (r_sum * a + h_u * b) * speed
                    }
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(nn, nn, |i, j| rows[i][j])
}

/// Average each column with its reflected partner: the arc operator on the
/// M physical nodes.
fn fold(cover: &CMatrix, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |i, j| {
        0.5 * (cover[(i, j)] + cover[(i, 2 * m - 1 - j)])
    })
}

fn sl_closures<'a>(
    grid: &'a BoundaryGrid,
    meta: &'a ArcMeta,
    cfg: &'a KernelConfig,
) -> (
    impl Fn(usize, usize) -> Complex64 + Sync + 'a,
    impl Fn(usize, usize) -> Complex64 + Sync + 'a,
    impl Fn(usize) -> Complex64 + Sync + 'a,
    impl Fn(usize) -> Complex64 + Sync + 'a,
) {
    let kappa = cfg.kappa;
    (
        move |i: usize, j: usize| {
            kernels::fundamental_solution(cfg, grid.points[i], grid.points[j])
                .expect("arc nodes are distinct")
        },
        move |i: usize, j: usize| {
            let r = dist(grid.points[i], grid.points[j]);
            -bessel::i0_i1(kappa * r).0 / (4.0 * PI)
        },
        move |_| Complex64::new(-1.0 / (4.0 * PI), 0.0),
        move |i: usize| {
            -((0.25 * kappa * grid.speeds[i] * meta.halfwidth).ln() + EULER_GAMMA) / (2.0 * PI)
        },
    )
}

/// γ₀SL_z restricted to the arc.
pub fn assemble_arc_g0sl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<LayerMatrix, LayerError> {
    let meta = require_arc(grid)?;
    let (full, a, da, db) = sl_closures(grid, meta, cfg);
    let cover = cover_log_assembly(grid, meta, full, a, da, db, true);
    Ok(LayerMatrix {
        entries: fold(&cover, grid.len()),
        tag: OperatorTag::G0Sl,
        z: cfg.z,
        grid: grid.clone(),
    })
}

/// Principal-value double-layer trace K_z on the arc.
pub fn assemble_arc_g0dl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<LayerMatrix, LayerError> {
    let meta = require_arc(grid)?;
    let kappa = cfg.kappa;
    let cover = cover_log_assembly(
        grid,
        meta,
        |i, j| {
            kernels::conormal_gradient(cfg, grid.points[i], grid.points[j], grid.normals[j])
                .expect("arc nodes are distinct")
        },
        |i, j| super::dl_log_coeff(kappa, grid.points[i], grid.points[j], grid.normals[j]),
        |_| Complex64::new(0.0, 0.0),
        |i| Complex64::new(-grid.curvatures[i] / (4.0 * PI), 0.0),
        true,
    );
    Ok(LayerMatrix {
        entries: fold(&cover, grid.len()),
        tag: OperatorTag::G0DlPlus,
        z: cfg.z,
        grid: grid.clone(),
    })
}

/// Principal-value adjoint trace K′_z on the arc.
pub fn assemble_arc_g1sl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<LayerMatrix, LayerError> {
    let meta = require_arc(grid)?;
    let kappa = cfg.kappa;
    let cover = cover_log_assembly(
        grid,
        meta,
        |i, j| {
            kernels::conormal_gradient_x(cfg, grid.points[i], grid.points[j], grid.normals[i])
                .expect("arc nodes are distinct")
        },
        |i, j| super::dl_log_coeff(kappa, grid.points[j], grid.points[i], grid.normals[i]),
        |_| Complex64::new(0.0, 0.0),
        |i| Complex64::new(-grid.curvatures[i] / (4.0 * PI), 0.0),
        true,
    );
    Ok(LayerMatrix {
        entries: fold(&cover, grid.len()),
        tag: OperatorTag::G1SlPlus,
        z: cfg.z,
        grid: grid.clone(),
    })
}

/// γ₁DL_z on the arc by the tangential-derivative reduction, for densities
/// vanishing at the arc ends (no endpoint terms in the integration by
/// parts).  The inner derivative lives on the cover: differentiate the even
/// extension, flip the second sheet's sign to restore the physical
/// orientation, integrate against the speed-free single layer, then take
/// the outer derivative of the resulting even function.
pub fn assemble_arc_g1dl(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<LayerMatrix, LayerError> {
    let meta = require_arc(grid)?;
    let m = grid.len();
    let nn = 2 * m;
    let kappa = cfg.kappa;

    let (full, a, da, db) = sl_closures(grid, meta, cfg);
    let s0 = cover_log_assembly(grid, meta, full, a, da, db, false);

    let snn_cover = cover_log_assembly(
        grid,
        meta,
        |i, j| {
            let nndot =
                grid.normals[i][0] * grid.normals[j][0] + grid.normals[i][1] * grid.normals[j][1];
            kernels::fundamental_solution(cfg, grid.points[i], grid.points[j])
                .expect("arc nodes are distinct")
                * nndot
        },
        |i, j| {
            let nndot =
                grid.normals[i][0] * grid.normals[j][0] + grid.normals[i][1] * grid.normals[j][1];
            let r = dist(grid.points[i], grid.points[j]);
            -bessel::i0_i1(kappa * r).0 * nndot / (4.0 * PI)
        },
        |_| Complex64::new(-1.0 / (4.0 * PI), 0.0),
        |i| -((0.25 * kappa * grid.speeds[i] * meta.halfwidth).ln() + EULER_GAMMA) / (2.0 * PI),
        true,
    );
    let snn = fold(&snn_cover, m);

    let d = trig_differentiation(nn).map(|x| Complex64::new(x, 0.0));
    // symmetric extension M → 2M
    let extend = CMatrix::from_fn(nn, m, |i, j| {
        if phys(i, m) == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut inner = &d * &extend; // dΨ/du at cover nodes
    for i in m..nn {
        for j in 0..m {
            inner[(i, j)] = -inner[(i, j)]; // second sheet runs backwards
        }
    }
    let g_cover = (&s0 * &inner).map(|e| 0.5 * e);
    let dg = &d * g_cover;

    let u_at = |j: usize| (2 * j + 1) as f64 * PI / nn as f64;
    let first = CMatrix::from_fn(m, m, |i, j| {
        dg[(i, j)] / (meta.halfwidth * u_at(i).sin() * grid.speeds[i])
    });

    Ok(LayerMatrix {
        entries: first - snn.map(|e| e * kappa * kappa),
        tag: OperatorTag::G1Dl,
        z: cfg.z,
        grid: grid.clone(),
    })
}
