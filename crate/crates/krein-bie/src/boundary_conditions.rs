//! The five boundary couplings — Dirichlet, Neumann, Robin, δ, δ′ — on the
//! whole curve Γ or on an arc Σ, expressed as parameter pairs for the
//! abstract resolvent machinery.
//!
//! Each family picks a component selector (which rows of the two-component
//! trace participate) and a reference operator Θ built from the boundary
//! operators at λ∘:
//!
//! | family    | selector | Θ                                   |
//! |-----------|----------|--------------------------------------|
//! | Dirichlet | first    | −γ₀SL                                |
//! | Neumann   | second   | −γ₁DL                                |
//! | Robin     | both     | −(coefficient block + operator block)|
//! | δ         | first    | −(1/α + γ₀SL)                        |
//! | δ′        | second   | 1/β − γ₁DL                           |
//!
//! all at λ∘.  With these choices the solver block Θ + ΠM_zΠ′ collapses to
//! ∓(family block at z), where the family block is what [`birman_block`]
//! assembles directly at z; its singularities in z are the spectrum of the
//! coupled operator.  Arc couplings use the same formulas over the graded
//! arc grid, where restriction and extension-by-zero are index maps by
//! construction.
//!
//! Coefficients are real samples at the grid nodes acting diagonally.
//! Degenerate samples (vanishing Robin jump b₊−b₋, vanishing α or β where
//! their reciprocals are needed) are refused rather than regularized.

use crate::geometry::{ArcSpec, BoundaryGrid};
use crate::kernels::KernelConfig;
use crate::layer_ops::{self, arc, LayerError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

type CMatrix = DMatrix<Complex64>;

/// Coefficients below this magnitude are treated as degenerate wherever a
/// reciprocal is required.
pub const COEFFICIENT_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("{family} coefficient degenerate at node {node}: {value:e}")]
    CoefficientDegeneracy {
        family: &'static str,
        node: usize,
        value: f64,
    },
    #[error("coefficient sampled at {got} nodes but the grid has {expected}")]
    CoefficientLength { expected: usize, got: usize },
    #[error("arc-Robin requires b₊ − b₋ < 0 at every node (node {node}: {value:e})")]
    ArcRobinSign { node: usize, value: f64 },
    #[error("the spec region does not match the supplied grid")]
    RegionGridMismatch,
    #[error("the reference point λ∘ must be real, got {0}")]
    ComplexLambda0(Complex64),
    #[error(transparent)]
    Layer(#[from] LayerError),
}

/// Where the coupling lives: all of Γ, or an arc Σ ⊂ Γ described by the
/// same parameters that build the graded grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    FullGamma,
    Arc(ArcSpec),
}

/// The coupling family, with coefficients sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFamily {
    Dirichlet,
    Neumann,
    Robin { b_plus: Vec<f64>, b_minus: Vec<f64> },
    Delta { alpha: Vec<f64> },
    DeltaPrime { beta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSpec {
    pub family: BoundaryFamily,
    pub region: Region,
}

impl ExtensionSpec {
    /// Checks that the spec and grid agree: region against grid kind and
    /// arc metadata, coefficient sample counts, and the Robin jump
    /// condition (strictly negative on arcs, bounded away from zero
    /// everywhere).
    pub fn validate(&self, grid: &BoundaryGrid) -> Result<(), BoundaryError> {
        match (&self.region, &grid.arc) {
            (Region::FullGamma, None) => {}
            (Region::Arc(spec), Some(meta)) => {
                let center = 0.5 * (spec.t0 + spec.t1);
                let halfwidth = 0.5 * (spec.t1 - spec.t0);
                if grid.len() != spec.m
                    || (meta.t_center - center).abs() > 1e-12
                    || (meta.halfwidth - halfwidth).abs() > 1e-12
                {
                    return Err(BoundaryError::RegionGridMismatch);
                }
            }
            _ => return Err(BoundaryError::RegionGridMismatch),
        }
        let n = grid.len();
        let check_len = |v: &Vec<f64>| {
            if v.len() == n {
                Ok(())
            } else {
                Err(BoundaryError::CoefficientLength { expected: n, got: v.len() })
            }
        };
        match &self.family {
            BoundaryFamily::Dirichlet | BoundaryFamily::Neumann => {}
            BoundaryFamily::Robin { b_plus, b_minus } => {
                check_len(b_plus)?;
                check_len(b_minus)?;
                for (node, (bp, bm)) in b_plus.iter().zip(b_minus).enumerate() {
                    let jump = bp - bm;
                    if jump.abs() < COEFFICIENT_FLOOR {
                        return Err(BoundaryError::CoefficientDegeneracy {
                            family: "Robin",
                            node,
                            value: jump,
                        });
                    }
                    if matches!(self.region, Region::Arc(_)) && jump >= 0.0 {
                        return Err(BoundaryError::ArcRobinSign { node, value: jump });
                    }
                }
            }
            BoundaryFamily::Delta { alpha } => check_len(alpha)?,
            BoundaryFamily::DeltaPrime { beta } => check_len(beta)?,
        }
        Ok(())
    }
}

/// Which component(s) of the two-component trace the coupling addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSelector {
    First,
    Second,
    Both,
}

/// The discrete Θ of the coupling, on the selected trace coordinates.
#[derive(Debug, Clone)]
pub struct ThetaBlock {
    pub selector: BlockSelector,
    pub theta_matrix: CMatrix,
    pub lambda0: f64,
}

impl ThetaBlock {
    /// W^{1/2}·Θ·W^{−1/2} with the grid quadrature weights, duplicated when
    /// both components participate.
    pub fn weighted_symmetrization(&self, grid: &BoundaryGrid) -> CMatrix {
        let mut w = layer_ops::quadrature_weights(grid);
        if self.selector == BlockSelector::Both {
            w.extend_from_slice(&w.clone());
        }
        let n = self.theta_matrix.nrows();
        CMatrix::from_fn(n, n, |i, j| self.theta_matrix[(i, j)] * (w[i] / w[j]).sqrt())
    }
}

/// The four principal-value boundary operators at one spectral parameter,
/// assembled for whichever grid kind is supplied.
#[derive(Debug, Clone)]
pub struct TraceOperators {
    pub g0sl: CMatrix,
    pub g0dl: CMatrix,
    pub g1sl: CMatrix,
    pub g1dl: CMatrix,
    pub z: Complex64,
}

pub fn trace_operators(
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<TraceOperators, LayerError> {
    if grid.arc.is_some() {
        Ok(TraceOperators {
            g0sl: arc::assemble_arc_g0sl(grid, cfg)?.entries,
            g0dl: arc::assemble_arc_g0dl(grid, cfg)?.entries,
            g1sl: arc::assemble_arc_g1sl(grid, cfg)?.entries,
            g1dl: arc::assemble_arc_g1dl(grid, cfg)?.entries,
            z: cfg.z,
        })
    } else {
        let n = grid.len();
        let block = layer_ops::m_circ_block(grid, cfg)?.matrix;
        Ok(TraceOperators {
            g0sl: block.view((0, 0), (n, n)).into_owned(),
            g0dl: block.view((0, n), (n, n)).into_owned(),
            g1sl: block.view((n, 0), (n, n)).into_owned(),
            g1dl: block.view((n, n), (n, n)).into_owned(),
            z: cfg.z,
        })
    }
}

/// γ₀SL alone, dispatched on the grid kind.  The first-component families
/// never read the other three trace blocks, and those dominate the cost of
/// a spectral scan or a scattering solve.
pub(crate) fn g0sl_block(grid: &BoundaryGrid, cfg: &KernelConfig) -> Result<CMatrix, LayerError> {
    Ok(if grid.arc.is_some() {
        arc::assemble_arc_g0sl(grid, cfg)?.entries
    } else {
        layer_ops::assemble_g0sl(grid, cfg)?.entries
    })
}

/// γ₁DL alone, the second-component counterpart of [`g0sl_block`].
pub(crate) fn g1dl_block(grid: &BoundaryGrid, cfg: &KernelConfig) -> Result<CMatrix, LayerError> {
    Ok(if grid.arc.is_some() {
        arc::assemble_arc_g1dl(grid, cfg)?.entries
    } else {
        layer_ops::assemble_g1dl(grid, cfg)?.entries
    })
}

/// Robin node data derived from the sampled coefficients.
struct RobinData {
    jump_inv: Vec<f64>,     // 1/[b]
    mean_ratio: Vec<f64>,   // ⟨b⟩/[b]
    product_ratio: Vec<f64>, // b₊b₋/[b]
}

fn robin_data(b_plus: &[f64], b_minus: &[f64]) -> RobinData {
    let jump_inv = b_plus
        .iter()
        .zip(b_minus)
        .map(|(p, m)| 1.0 / (p - m))
        .collect::<Vec<_>>();
    let mean_ratio = b_plus
        .iter()
        .zip(b_minus)
        .zip(&jump_inv)
        .map(|((p, m), ji)| 0.5 * (p + m) * ji)
        .collect();
    let product_ratio = b_plus
        .iter()
        .zip(b_minus)
        .zip(&jump_inv)
        .map(|((p, m), ji)| p * m * ji)
        .collect();
    RobinData { jump_inv, mean_ratio, product_ratio }
}

fn add_diagonal(mut m: CMatrix, d: &[f64]) -> CMatrix {
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(d[i], 0.0);
    }
    m
}

fn reciprocal_samples(
    family: &'static str,
    values: &[f64],
) -> Result<Vec<f64>, BoundaryError> {
    values
        .iter()
        .enumerate()
        .map(|(node, &v)| {
            if v.abs() < COEFFICIENT_FLOOR {
                Err(BoundaryError::CoefficientDegeneracy { family, node, value: v })
            } else {
                Ok(1.0 / v)
            }
        })
        .collect()
}

fn two_by_two(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&a);
    out.view_mut((0, n), (n, n)).copy_from(&b);
    out.view_mut((n, 0), (n, n)).copy_from(&c);
    out.view_mut((n, n), (n, n)).copy_from(&d);
    out
}

/// The family block at z: the matrix whose inverse drives the resolvent
/// correction and whose singularities in z locate the spectrum.
///
/// Dirichlet: γ₀SL_z.  Neumann: γ₁DL_z.  Robin: the 2×2 coefficient-plus-
/// operator block.  δ: 1/α + γ₀SL_z.  δ′: 1/β − γ₁DL_z.
pub fn birman_block(
    spec: &ExtensionSpec,
    grid: &BoundaryGrid,
    cfg: &KernelConfig,
) -> Result<CMatrix, BoundaryError> {
    spec.validate(grid)?;
    match &spec.family {
        BoundaryFamily::Dirichlet => Ok(g0sl_block(grid, cfg)?),
        BoundaryFamily::Neumann => Ok(g1dl_block(grid, cfg)?),
        BoundaryFamily::Delta { alpha } => Ok(add_diagonal(
            g0sl_block(grid, cfg)?,
            &reciprocal_samples("Delta", alpha)?,
        )),
        BoundaryFamily::DeltaPrime { beta } => Ok(add_diagonal(
            g1dl_block(grid, cfg)?.map(|e| -e),
            &reciprocal_samples("DeltaPrime", beta)?,
        )),
        BoundaryFamily::Robin { .. } => family_block(&spec.family, trace_operators(grid, cfg)?),
    }
}

pub(crate) fn family_block(
    family: &BoundaryFamily,
    ops: TraceOperators,
) -> Result<CMatrix, BoundaryError> {
    Ok(match family {
        BoundaryFamily::Dirichlet => ops.g0sl,
        BoundaryFamily::Neumann => ops.g1dl,
        BoundaryFamily::Robin { b_plus, b_minus } => {
            let data = robin_data(b_plus, b_minus);
            two_by_two(
                add_diagonal(ops.g0sl, &data.jump_inv),
                add_diagonal(ops.g0dl, &data.mean_ratio),
                add_diagonal(ops.g1sl, &data.mean_ratio),
                add_diagonal(ops.g1dl, &data.product_ratio),
            )
        }
        BoundaryFamily::Delta { alpha } => {
            add_diagonal(ops.g0sl, &reciprocal_samples("Delta", alpha)?)
        }
        BoundaryFamily::DeltaPrime { beta } => {
            let minus_t = ops.g1dl.map(|e| -e);
            add_diagonal(minus_t, &reciprocal_samples("DeltaPrime", beta)?)
        }
    })
}

/// Sign relating the family block at z to the solver block Θ + ΠM_zΠ′: the
/// latter equals `sign · birman_block(z)`.
pub fn family_sign(family: &BoundaryFamily) -> f64 {
    match family {
        BoundaryFamily::DeltaPrime { .. } => 1.0,
        _ => -1.0,
    }
}

/// Θ of the coupling: `family_sign · (family block at λ∘)`, with the
/// selector naming the participating trace components.
pub fn build_theta(
    spec: &ExtensionSpec,
    grid: &BoundaryGrid,
    ops_at_lambda0: &TraceOperators,
) -> Result<ThetaBlock, BoundaryError> {
    spec.validate(grid)?;
    if ops_at_lambda0.z.im != 0.0 {
        return Err(BoundaryError::ComplexLambda0(ops_at_lambda0.z));
    }
    let sign = family_sign(&spec.family);
    let block = family_block(&spec.family, ops_at_lambda0.clone())?;
    Ok(ThetaBlock {
        selector: match spec.family {
            BoundaryFamily::Dirichlet | BoundaryFamily::Delta { .. } => BlockSelector::First,
            BoundaryFamily::Neumann | BoundaryFamily::DeltaPrime { .. } => BlockSelector::Second,
            BoundaryFamily::Robin { .. } => BlockSelector::Both,
        },
        theta_matrix: block.map(|e| sign * e),
        lambda0: ops_at_lambda0.z.re,
    })
}

/// B_Θ = Θ + (compression of M°_{λ∘}): the constant part of the coupling.
/// Vanishes for Dirichlet/Neumann; for Robin it is the pure coefficient
/// block; for δ and δ′ the diagonal ±1/coefficient.
pub fn b_theta(theta: &ThetaBlock, ops_at_lambda0: &TraceOperators) -> CMatrix {
    let compressed = match theta.selector {
        BlockSelector::First => ops_at_lambda0.g0sl.clone(),
        BlockSelector::Second => ops_at_lambda0.g1dl.clone(),
        BlockSelector::Both => two_by_two(
            ops_at_lambda0.g0sl.clone(),
            ops_at_lambda0.g0dl.clone(),
            ops_at_lambda0.g1sl.clone(),
            ops_at_lambda0.g1dl.clone(),
        ),
    };
    &theta.theta_matrix + compressed
}
