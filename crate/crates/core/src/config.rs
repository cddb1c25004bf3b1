//! Run configuration: JSON with unknown keys rejected and rationals written
//! as `"p/q"` strings or integers.

use std::fmt;
use std::path::{Path, PathBuf};

use num_traits::Signed;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constitutive::{GrioliParams, MaterialParams, ParamError};
use crate::poly_fields::{parse_poly_vec, LiteralError, PolyVec};
use crate::scalar::{format_rational, parse_rational, rational, Rational};
use crate::surface_geom::{LevelSurface, Patch};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field literal {index}: {source}")]
    Field { index: usize, source: LiteralError },
    #[error(transparent)]
    Material(#[from] ParamError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Exact rational read from `"p/q"` or an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLiteral(pub Rational);

impl RationalLiteral {
    pub fn new(p: i64, q: i64) -> Self {
        RationalLiteral(rational(p, q))
    }
}

impl Serialize for RationalLiteral {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RationalLiteral;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a \"p/q\" string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(RationalLiteral::new(v, 1))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                i64::try_from(v).map(|v| RationalLiteral::new(v, 1)).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Err(E::custom(format!("floating-point value {v} is not exact; write it as \"p/q\"")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_rational(v).map(RationalLiteral).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rational,
    Float,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}` (expected rational or float)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub mu: RationalLiteral,
    pub lambda: RationalLiteral,
    pub alpha1: RationalLiteral,
    pub alpha2: RationalLiteral,
    /// Grioli's η; defaults to `(α₁ − α₂)/(α₁ + α₂)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<RationalLiteral>,
    #[serde(rename = "Lc", default = "one")]
    pub length_scale: RationalLiteral,
}

fn one() -> RationalLiteral {
    RationalLiteral::new(1, 1)
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            mu: RationalLiteral::new(1, 1),
            lambda: RationalLiteral::new(1, 2),
            alpha1: RationalLiteral::new(3, 1),
            alpha2: RationalLiteral::new(1, 1),
            eta: None,
            length_scale: one(),
        }
    }
}

impl MaterialConfig {
    pub fn params(&self) -> Result<MaterialParams, ParamError> {
        MaterialParams::new(self.mu.0.clone(), self.lambda.0.clone(), self.alpha1.0.clone(), self.alpha2.0.clone())
    }

    pub fn grioli(&self) -> Result<GrioliParams, ConfigError> {
        let eta = match &self.eta {
            Some(e) => e.0.clone(),
            None => self.params()?.eta().ok_or_else(|| {
                ConfigError::Invalid("eta is undefined for alpha1 + alpha2 = 0; set material.eta".into())
            })?,
        };
        Ok(GrioliParams { eta, length_scale: self.length_scale.0.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub count: usize,
    pub degree: u32,
    pub coeff_bound: u32,
    pub points_per_surface: usize,
    /// Explicit fields `"u1; u2; u3"` used instead of random ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<String>>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { count: 20, degree: 4, coeff_bound: 10, points_per_surface: 10, fields: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceChoice {
    Plane,
    Sphere,
    Ellipsoid,
    Saddle,
}

impl SurfaceChoice {
    pub fn surface(&self) -> LevelSurface {
        match self {
            SurfaceChoice::Plane => LevelSurface::plane(),
            SurfaceChoice::Sphere => LevelSurface::unit_sphere(),
            SurfaceChoice::Ellipsoid => LevelSurface::ellipsoid(),
            SurfaceChoice::Saddle => LevelSurface::saddle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub check_nodes: usize,
    pub tolerance: f64,
    pub refinement: Vec<usize>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 32, check_nodes: 64, tolerance: 1e-8, refinement: vec![4, 8, 16, 32, 64] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PatchConfig {
    Hemisphere { upper: bool },
    Disc { radius: RationalLiteral },
}

impl PatchConfig {
    pub fn patch(&self) -> Patch {
        match self {
            PatchConfig::Hemisphere { upper } => Patch::Hemisphere { upper: *upper },
            PatchConfig::Disc { radius } => Patch::Disc { radius: radius.0.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("report") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub mode: Mode,
    /// Relative tolerance for pointwise checks in float mode.
    pub tolerance: f64,
    pub seed: u64,
    pub material: MaterialConfig,
    pub corpus: CorpusConfig,
    pub surfaces: Vec<SurfaceChoice>,
    pub quadrature: QuadratureConfig,
    pub patches: Vec<PatchConfig>,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: Mode::Rational,
            tolerance: 1e-10,
            seed: 20240601,
            material: MaterialConfig::default(),
            corpus: CorpusConfig::default(),
            surfaces: vec![SurfaceChoice::Plane, SurfaceChoice::Sphere, SurfaceChoice::Ellipsoid],
            quadrature: QuadratureConfig::default(),
            patches: vec![
                PatchConfig::Hemisphere { upper: true },
                PatchConfig::Disc { radius: RationalLiteral::new(1, 1) },
            ],
            output: OutputConfig::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Config = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic checks beyond the schema; run before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.material.params()?;
        self.material.grioli()?;
        if !(self.tolerance >= 0.0) || !(self.quadrature.tolerance >= 0.0) {
            return Err(ConfigError::Invalid("tolerances must be non-negative".into()));
        }
        if self.quadrature.nodes == 0 || self.quadrature.check_nodes == 0 || self.quadrature.refinement.contains(&0) {
            return Err(ConfigError::Invalid("quadrature node counts must be positive".into()));
        }
        if self.surfaces.is_empty() {
            return Err(ConfigError::Invalid("at least one surface is required".into()));
        }
        for p in &self.patches {
            if let PatchConfig::Disc { radius } = p {
                if !radius.0.is_positive() {
                    return Err(ConfigError::Invalid(format!(
                        "disc radius {} gives a patch of zero measure",
                        format_rational(&radius.0)
                    )));
                }
            }
        }
        if self.corpus.degree > 12 {
            return Err(ConfigError::Invalid("corpus degree above 12 is not supported".into()));
        }
        self.fields()?;
        Ok(())
    }

    /// The displacement fields of the corpus, in order.
    pub fn fields(&self) -> Result<Vec<PolyVec>, ConfigError> {
        match &self.corpus.fields {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(index, text)| parse_poly_vec(text).map_err(|source| ConfigError::Field { index, source }))
                .collect(),
            None => Ok((0..self.corpus.count)
                .map(|i| crate::poly_fields::random_field(field_seed(self.seed, i), self.corpus.degree, self.corpus.coeff_bound))
                .collect()),
        }
    }
}

/// Per-item seed derived from the run seed.
pub fn field_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64 + 1)
}
