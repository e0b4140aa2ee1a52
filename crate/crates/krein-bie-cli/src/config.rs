//! Run configuration: a single JSON document describing curve, grids, kernel
//! parameters, boundary family and task.
//!
//! The schema is strict — unknown keys are rejected at every nesting level —
//! so a typo fails loudly instead of silently running with a default.
//! Boundary coefficients are either plain numbers or expressions in the curve
//! parameter t restricted to the micro-grammar
//!
//! ```text
//! const
//! c0 + c1*cos(m*t)
//! c0 + c1*sin(m*t)
//! ```
//!
//! with `c0`, `c1` floats and `m` a nonnegative integer.  That is enough for
//! smooth variable coefficients without dragging in an expression
//! interpreter.

use krein_bie::boundary_conditions::{BoundaryFamily, ExtensionSpec, Region};
use krein_bie::geometry::{
    discretize_curve, graded_arc_grid, ArcSpec, BoundaryGrid, CurveParam, GeometryError,
};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("coefficient expression {text:?}: {reason}")]
    Coefficient { text: String, reason: String },
    #[error("task block is {found:?} but the subcommand is {expected:?}")]
    TaskMismatch { expected: String, found: String },
    #[error("region is an arc but grid.m_arc is missing")]
    MissingArcNodes,
    #[error("arc halfwidth must lie in (0, π), got {0}")]
    BadHalfwidth(f64),
    #[error("scattering runs on the free background; set kernel.v0 = 0, got {0}")]
    ScatterBackground(f64),
    #[error("grid: {0}")]
    Geometry(#[from] GeometryError),
}

/// Everything one invocation needs, straight out of the JSON document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curve: CurveConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub kernel: KernelBlock,
    pub extension: ExtensionConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seed for the randomized finite-dimensional verification models.
    #[serde(default)]
    pub seed: u64,
}

// The tagged enums below serialize with a "kind" discriminator but
// deserialize through hand-written impls: serde's derive cannot reject
// unknown keys inside an internally tagged enum, and silent key-dropping is
// exactly what the schema promises not to do.

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveConfig {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Kite,
}

impl<'de> Deserialize<'de> for CurveConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (kind, rest) = split_kind(deserializer)?;
        match kind.as_str() {
            "circle" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    radius: f64,
                }
                let f: F = fields(rest)?;
                Ok(CurveConfig::Circle { radius: f.radius })
            }
            "ellipse" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    a: f64,
                    b: f64,
                }
                let f: F = fields(rest)?;
                Ok(CurveConfig::Ellipse { a: f.a, b: f.b })
            }
            "kite" => {
                no_fields(rest)?;
                Ok(CurveConfig::Kite)
            }
            other => Err(D::Error::unknown_variant(other, &["circle", "ellipse", "kite"])),
        }
    }
}

/// Pull the "kind" discriminator out of a JSON object, leaving the variant
/// fields for a strict per-variant parse.
fn split_kind<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> Result<(String, serde_json::Value), D::Error> {
    let mut map = serde_json::Map::deserialize(deserializer)?;
    match map.remove("kind") {
        Some(serde_json::Value::String(kind)) => Ok((kind, serde_json::Value::Object(map))),
        Some(_) => Err(D::Error::custom("`kind` must be a string")),
        None => Err(D::Error::missing_field("kind")),
    }
}

fn fields<T: serde::de::DeserializeOwned, E: serde::de::Error>(
    value: serde_json::Value,
) -> Result<T, E> {
    serde_json::from_value(value).map_err(E::custom)
}

fn no_fields<E: serde::de::Error>(value: serde_json::Value) -> Result<(), E> {
    match value {
        serde_json::Value::Object(map) if map.is_empty() => Ok(()),
        serde_json::Value::Object(map) => {
            let key = map.keys().next().expect("nonempty").clone();
            Err(E::unknown_field(&key, &[]))
        }
        _ => Err(E::custom("expected an object")),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Nodes on the closed curve Γ.
    pub n_gamma: usize,
    /// Nodes on the graded arc grid; required exactly when the region is an
    /// arc.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_arc: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    /// Constant background potential V₀.
    #[serde(default)]
    pub v0: f64,
    /// Real reference point λ∘ of the extension parametrization.
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
}

fn default_lambda0() -> f64 {
    1.0
}

impl Default for KernelBlock {
    fn default() -> Self {
        KernelBlock { v0: 0.0, lambda0: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExtensionConfig {
    pub family: FamilyConfig,
    #[serde(default)]
    pub region: RegionConfig,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyConfig {
    Dirichlet,
    Neumann,
    Robin { b_plus: CoeffExpr, b_minus: CoeffExpr },
    Delta { alpha: CoeffExpr },
    DeltaPrime { beta: CoeffExpr },
}

impl<'de> Deserialize<'de> for FamilyConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (kind, rest) = split_kind(deserializer)?;
        match kind.as_str() {
            "dirichlet" => {
                no_fields(rest)?;
                Ok(FamilyConfig::Dirichlet)
            }
            "neumann" => {
                no_fields(rest)?;
                Ok(FamilyConfig::Neumann)
            }
            "robin" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    b_plus: CoeffExpr,
                    b_minus: CoeffExpr,
                }
                let f: F = fields(rest)?;
                Ok(FamilyConfig::Robin { b_plus: f.b_plus, b_minus: f.b_minus })
            }
            "delta" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    alpha: CoeffExpr,
                }
                let f: F = fields(rest)?;
                Ok(FamilyConfig::Delta { alpha: f.alpha })
            }
            "delta_prime" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    beta: CoeffExpr,
                }
                let f: F = fields(rest)?;
                Ok(FamilyConfig::DeltaPrime { beta: f.beta })
            }
            other => Err(D::Error::unknown_variant(
                other,
                &["dirichlet", "neumann", "robin", "delta", "delta_prime"],
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionConfig {
    Full,
    Arc { t_center: f64, halfwidth: f64 },
}

impl<'de> Deserialize<'de> for RegionConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (kind, rest) = split_kind(deserializer)?;
        match kind.as_str() {
            "full" => {
                no_fields(rest)?;
                Ok(RegionConfig::Full)
            }
            "arc" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    t_center: f64,
                    halfwidth: f64,
                }
                let f: F = fields(rest)?;
                Ok(RegionConfig::Arc { t_center: f.t_center, halfwidth: f.halfwidth })
            }
            other => Err(D::Error::unknown_variant(other, &["full", "arc"])),
        }
    }
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig::Full
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskConfig {
    /// Run every registered invariant and write a pass/fail report.
    Verify { models: usize },
    /// σ_min scan over an energy interval plus refined spectral hits.
    Eig {
        branch: BranchConfig,
        interval: [f64; 2],
        n_scan: usize,
        refine_tol: f64,
    },
    /// Re/Im of the perturbed Green function on a rectangle of field points.
    Green {
        z: [f64; 2],
        source: [f64; 2],
        lo: [f64; 2],
        hi: [f64; 2],
        nx: usize,
        ny: usize,
    },
    /// Far-field sweep for an incident plane wave.
    Scatter {
        k: f64,
        direction: [f64; 2],
        n_angles: usize,
    },
    /// Singular values of the weighted resolvent difference on a box.
    Svd {
        z: [f64; 2],
        lo: [f64; 2],
        hi: [f64; 2],
        n_samples: usize,
    },
}

impl<'de> Deserialize<'de> for TaskConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (kind, rest) = split_kind(deserializer)?;
        match kind.as_str() {
            "verify" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    #[serde(default = "default_models")]
                    models: usize,
                }
                let f: F = fields(rest)?;
                Ok(TaskConfig::Verify { models: f.models })
            }
            "eig" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    branch: BranchConfig,
                    interval: [f64; 2],
                    #[serde(default = "default_n_scan")]
                    n_scan: usize,
                    #[serde(default = "default_refine_tol")]
                    refine_tol: f64,
                }
                let f: F = fields(rest)?;
                Ok(TaskConfig::Eig {
                    branch: f.branch,
                    interval: f.interval,
                    n_scan: f.n_scan,
                    refine_tol: f.refine_tol,
                })
            }
            "green" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    z: [f64; 2],
                    source: [f64; 2],
                    lo: [f64; 2],
                    hi: [f64; 2],
                    nx: usize,
                    ny: usize,
                }
                let f: F = fields(rest)?;
                Ok(TaskConfig::Green {
                    z: f.z,
                    source: f.source,
                    lo: f.lo,
                    hi: f.hi,
                    nx: f.nx,
                    ny: f.ny,
                })
            }
            "scatter" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    k: f64,
                    direction: [f64; 2],
                    #[serde(default = "default_n_angles")]
                    n_angles: usize,
                }
                let f: F = fields(rest)?;
                Ok(TaskConfig::Scatter {
                    k: f.k,
                    direction: f.direction,
                    n_angles: f.n_angles,
                })
            }
            "svd" => {
                #[derive(Deserialize)]
                #[serde(deny_unknown_fields)]
                struct F {
                    z: [f64; 2],
                    lo: [f64; 2],
                    hi: [f64; 2],
                    n_samples: usize,
                }
                let f: F = fields(rest)?;
                Ok(TaskConfig::Svd { z: f.z, lo: f.lo, hi: f.hi, n_samples: f.n_samples })
            }
            other => Err(D::Error::unknown_variant(
                other,
                &["verify", "eig", "green", "scatter", "svd"],
            )),
        }
    }
}

impl TaskConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskConfig::Verify { .. } => "verify",
            TaskConfig::Eig { .. } => "eig",
            TaskConfig::Green { .. } => "green",
            TaskConfig::Scatter { .. } => "scatter",
            TaskConfig::Svd { .. } => "svd",
        }
    }
}

fn default_models() -> usize {
    50
}

fn default_n_scan() -> usize {
    120
}

fn default_refine_tol() -> f64 {
    1e-10
}

fn default_n_angles() -> usize {
    64
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum BranchConfig {
    Decaying,
    Oscillatory,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory the artifacts go into; `--out` overrides it.
    #[serde(default = "default_out_dir")]
    pub dir: String,
    /// Stem of the artifact file names; defaults to the task kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basename: Option<String>,
}

fn default_out_dir() -> String {
    ".".to_owned()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out_dir(), basename: None }
    }
}

/// A coefficient of the micro-grammar, stored in evaluated form.  Serializes
/// back to the canonical expression text so resolved configs stay readable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffExpr {
    pub c0: f64,
    pub c1: f64,
    pub mode: TrigMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrigMode {
    Constant,
    Cos(u32),
    Sin(u32),
}

impl CoeffExpr {
    pub fn constant(c0: f64) -> Self {
        CoeffExpr { c0, c1: 0.0, mode: TrigMode::Constant }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.mode {
            TrigMode::Constant => self.c0,
            TrigMode::Cos(m) => self.c0 + self.c1 * (m as f64 * t).cos(),
            TrigMode::Sin(m) => self.c0 + self.c1 * (m as f64 * t).sin(),
        }
    }

    /// Nodal samples over a grid's parameter values.
    pub fn samples(&self, grid: &BoundaryGrid) -> Vec<f64> {
        grid.params.iter().map(|&t| self.eval(t)).collect()
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            TrigMode::Constant => write!(f, "{}", self.c0),
            TrigMode::Cos(m) => write!(f, "{} + {}*cos({}*t)", self.c0, self.c1, m),
            TrigMode::Sin(m) => write!(f, "{} + {}*sin({}*t)", self.c0, self.c1, m),
        }
    }
}

impl Serialize for CoeffExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.mode {
            TrigMode::Constant => serializer.serialize_f64(self.c0),
            _ => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for CoeffExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Source {
            Number(f64),
            Text(String),
        }
        match Source::deserialize(deserializer)? {
            Source::Number(c0) => Ok(CoeffExpr::constant(c0)),
            Source::Text(text) => parse_coeff(&text).map_err(D::Error::custom),
        }
    }
}

/// Parse the coefficient micro-grammar.  Whitespace between tokens is free;
/// everything else is rejected.
pub fn parse_coeff(text: &str) -> Result<CoeffExpr, ConfigError> {
    let fail = |reason: &str| ConfigError::Coefficient {
        text: text.to_owned(),
        reason: reason.to_owned(),
    };
    let compact: String = text.split_whitespace().collect();
    if compact.is_empty() {
        return Err(fail("empty expression"));
    }
    // split at the +/- between the constant and the trig term; signs inside
    // an exponent (1e-3) or leading the constant do not count
    let bytes = compact.as_bytes();
    let mut split = None;
    for (i, &b) in bytes.iter().enumerate().skip(1) {
        if b != b'+' && b != b'-' {
            continue;
        }
        let prev = bytes[i - 1];
        if prev == b'e' || prev == b'E' {
            continue;
        }
        split = Some(i);
        break;
    }
    let Some(i) = split else {
        let c0 = compact.parse::<f64>().map_err(|_| fail("not a float"))?;
        return Ok(CoeffExpr::constant(c0));
    };
    let c0 = compact[..i].parse::<f64>().map_err(|_| fail("constant part is not a float"))?;
    let sign = if bytes[i] == b'-' { -1.0 } else { 1.0 };
    let term = &compact[i + 1..];
    let star = term.find('*').ok_or_else(|| fail("trig term must look like c1*cos(m*t)"))?;
    let c1 = term[..star].parse::<f64>().map_err(|_| fail("amplitude is not a float"))?;
    let rest = &term[star + 1..];
    let (mode_name, arg) = rest
        .strip_suffix("*t)")
        .and_then(|r| r.split_once('('))
        .ok_or_else(|| fail("trig term must end in (m*t)"))?;
    let m = arg.parse::<u32>().map_err(|_| fail("mode number is not a nonnegative integer"))?;
    let mode = match mode_name {
        "cos" => TrigMode::Cos(m),
        "sin" => TrigMode::Sin(m),
        _ => return Err(fail("only cos and sin are in the grammar")),
    };
    Ok(CoeffExpr { c0, c1: sign * c1, mode })
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Structural checks that do not need a grid yet.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let RegionConfig::Arc { halfwidth, .. } = self.extension.region {
            if self.grid.m_arc.is_none() {
                return Err(ConfigError::MissingArcNodes);
            }
            if !(halfwidth > 0.0 && halfwidth < std::f64::consts::PI) {
                return Err(ConfigError::BadHalfwidth(halfwidth));
            }
        }
        if let TaskConfig::Scatter { .. } = self.task {
            if self.kernel.v0 != 0.0 {
                return Err(ConfigError::ScatterBackground(self.kernel.v0));
            }
        }
        Ok(())
    }

    pub fn curve(&self) -> CurveParam {
        match self.curve {
            CurveConfig::Circle { radius } => CurveParam::Circle { radius },
            CurveConfig::Ellipse { a, b } => CurveParam::Ellipse { a, b },
            CurveConfig::Kite => CurveParam::Kite,
        }
    }

    /// The grid the configured region lives on: uniform on Γ, graded on Σ.
    pub fn build_grid(&self) -> Result<BoundaryGrid, ConfigError> {
        let curve = self.curve();
        match self.extension.region {
            RegionConfig::Full => Ok(discretize_curve(&curve, self.grid.n_gamma)?),
            RegionConfig::Arc { t_center, halfwidth } => {
                let m = self.grid.m_arc.ok_or(ConfigError::MissingArcNodes)?;
                let arc = ArcSpec { t0: t_center - halfwidth, t1: t_center + halfwidth, m };
                Ok(graded_arc_grid(&curve, &arc)?)
            }
        }
    }

    /// The library-side extension spec, with coefficient expressions sampled
    /// at the grid nodes.
    pub fn build_spec(&self, grid: &BoundaryGrid) -> Result<ExtensionSpec, ConfigError> {
        let family = match &self.extension.family {
            FamilyConfig::Dirichlet => BoundaryFamily::Dirichlet,
            FamilyConfig::Neumann => BoundaryFamily::Neumann,
            FamilyConfig::Robin { b_plus, b_minus } => BoundaryFamily::Robin {
                b_plus: b_plus.samples(grid),
                b_minus: b_minus.samples(grid),
            },
            FamilyConfig::Delta { alpha } => BoundaryFamily::Delta { alpha: alpha.samples(grid) },
            FamilyConfig::DeltaPrime { beta } => {
                BoundaryFamily::DeltaPrime { beta: beta.samples(grid) }
            }
        };
        let region = match self.extension.region {
            RegionConfig::Full => Region::FullGamma,
            RegionConfig::Arc { t_center, halfwidth } => {
                let m = self.grid.m_arc.ok_or(ConfigError::MissingArcNodes)?;
                Region::Arc(ArcSpec { t0: t_center - halfwidth, t1: t_center + halfwidth, m })
            }
        };
        Ok(ExtensionSpec { family, region })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(task: &str) -> String {
        format!(
            r#"{{
              "curve": {{ "kind": "circle", "radius": 1.0 }},
              "grid": {{ "n_gamma": 32 }},
              "extension": {{ "family": {{ "kind": "dirichlet" }} }},
              "task": {task}
            }}"#
        )
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = RunConfig::from_json_str(&minimal(r#"{ "kind": "verify" }"#)).unwrap();
        assert_eq!(config.kernel.lambda0, 1.0);
        assert_eq!(config.kernel.v0, 0.0);
        assert_eq!(config.output.dir, ".");
        assert_eq!(config.seed, 0);
        assert!(matches!(config.task, TaskConfig::Verify { models: 50 }));
        assert_eq!(config.extension.region, RegionConfig::Full);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        let cases = [
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet" } },
                 "task": { "kind": "verify" }, "typo": 1 }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0, "typo": 1 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet" } },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32, "typo": 1 },
                 "extension": { "family": { "kind": "dirichlet" } },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "kernel": { "v0": 0.0, "typo": 1 },
                 "extension": { "family": { "kind": "dirichlet" } },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet" }, "typo": 1 },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet", "typo": 1 } },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet" },
                                "region": { "kind": "full", "typo": 1 } },
                 "task": { "kind": "verify" } }"#,
            r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                 "extension": { "family": { "kind": "dirichlet" } },
                 "task": { "kind": "verify", "typo": 1 } }"#,
        ];
        for text in cases {
            let err = RunConfig::from_json_str(text).unwrap_err();
            assert!(
                err.to_string().contains("typo") || err.to_string().contains("unknown"),
                "case should name the bad key: {err}"
            );
        }
    }

    #[test]
    fn missing_family_points_at_the_field() {
        let text = r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
                        "extension": { }, "task": { "kind": "verify" } }"#;
        let err = RunConfig::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("family"), "got {err}");
    }

    #[test]
    fn coefficient_grammar_round_trips() {
        let cases = [
            ("1.5", CoeffExpr::constant(1.5)),
            ("-2", CoeffExpr::constant(-2.0)),
            ("1e-3", CoeffExpr::constant(1e-3)),
            ("0.5 + 1*cos(3*t)", CoeffExpr { c0: 0.5, c1: 1.0, mode: TrigMode::Cos(3) }),
            ("1 - 0.25*sin(2*t)", CoeffExpr { c0: 1.0, c1: -0.25, mode: TrigMode::Sin(2) }),
            ("-1.5+2e0*cos(0*t)", CoeffExpr { c0: -1.5, c1: 2.0, mode: TrigMode::Cos(0) }),
        ];
        for (text, want) in cases {
            let got = parse_coeff(text).unwrap();
            assert_eq!(got, want, "{text}");
            // canonical form reparses to the same value
            let again = parse_coeff(&got.to_string()).unwrap();
            assert_eq!(again, got, "{text} via {got}");
        }
    }

    #[test]
    fn coefficient_grammar_rejects_everything_else() {
        for text in [
            "",
            "t",
            "cos(t)",
            "1 + cos(2*t)",
            "1 + 2*tan(3*t)",
            "1 + 2*cos(3t)",
            "1 + 2*cos(-3*t)",
            "1 + 2*cos(3*t) + 4*sin(5*t)",
            "1..2",
            "1 + 2*cos(3*s)",
        ] {
            assert!(parse_coeff(text).is_err(), "{text:?} should be rejected");
        }
    }

    #[test]
    fn coefficient_expressions_evaluate_on_the_grid() {
        let text = r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 8 },
                        "extension": { "family": { "kind": "robin",
                                                   "b_plus": "1 + 0.5*cos(2*t)",
                                                   "b_minus": -1.0 } },
                        "task": { "kind": "verify" } }"#;
        let config = RunConfig::from_json_str(text).unwrap();
        let grid = config.build_grid().unwrap();
        let spec = config.build_spec(&grid).unwrap();
        match spec.family {
            BoundaryFamily::Robin { b_plus, b_minus } => {
                assert_eq!(b_plus.len(), 8);
                for (j, &b) in b_plus.iter().enumerate() {
                    let t = grid.params[j];
                    assert!((b - (1.0 + 0.5 * (2.0 * t).cos())).abs() < 1e-15);
                }
                assert!(b_minus.iter().all(|&b| b == -1.0));
            }
            other => panic!("expected Robin, got {other:?}"),
        }
    }

    #[test]
    fn arc_region_needs_node_count_and_sane_halfwidth() {
        let no_nodes = r#"{ "curve": { "kind": "circle", "radius": 1.0 }, "grid": { "n_gamma": 32 },
            "extension": { "family": { "kind": "dirichlet" },
                           "region": { "kind": "arc", "t_center": 1.0, "halfwidth": 0.5 } },
            "task": { "kind": "verify" } }"#;
        assert!(matches!(
            RunConfig::from_json_str(no_nodes),
            Err(ConfigError::MissingArcNodes)
        ));

        let too_wide = r#"{ "curve": { "kind": "circle", "radius": 1.0 },
            "grid": { "n_gamma": 32, "m_arc": 16 },
            "extension": { "family": { "kind": "dirichlet" },
                           "region": { "kind": "arc", "t_center": 1.0, "halfwidth": 4.0 } },
            "task": { "kind": "verify" } }"#;
        assert!(matches!(
            RunConfig::from_json_str(too_wide),
            Err(ConfigError::BadHalfwidth(_))
        ));
    }

    #[test]
    fn resolved_config_survives_a_json_round_trip() {
        let text = r#"{ "curve": { "kind": "kite" }, "grid": { "n_gamma": 48 },
            "kernel": { "v0": 0.5, "lambda0": 2.0 },
            "extension": { "family": { "kind": "delta", "alpha": "0 - 4*cos(1*t)" } },
            "task": { "kind": "eig", "branch": "decaying", "interval": [0.5, 3.0] },
            "output": { "dir": "runs", "basename": "kite" }, "seed": 9 }"#;
        let config = RunConfig::from_json_str(text).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let again = RunConfig::from_json_str(&json).unwrap();
        assert_eq!(again, config);
    }
}
