//! Run configuration: JSON schema, parsing and up-front validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fracspec::assembly::{CoefficientSpec, EllipticCoefficients, Field, Mesh};
use fracspec::fracops::{FractionalOrder, HolderWeight};
use fracspec::geometry::{ConvexDomain, DomainKind, GridFunction, Point, RayGeometry};
use fracspec::spectral::{NuParams, RangeStrategy, SectorConstants};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::expr::Expr;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub alpha: f64,
    pub grid: GridConfig,
    pub coefficients: CoefficientConfig,
    pub seed: u64,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub length: Option<f64>,
    pub radius: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    /// Boundary point the rays start from.
    pub base: Option<[f64; 2]>,
    /// Ray directions on two-dimensional domains.
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_directions() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Cells per side of the assembled mesh, and radial cells per ray
    /// unless `radial_cells` is given.
    pub cells: usize,
    #[serde(default)]
    pub radial_cells: Option<usize>,
    #[serde(default = "one")]
    pub grading: f64,
}

fn one() -> f64 {
    1.0
}

/// A number or an expression string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Number(f64),
    Text(String),
}

impl Default for FieldValue {
    fn default() -> Self {
        FieldValue::Number(1.0)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default)]
    pub a11: FieldValue,
    #[serde(default)]
    pub a22: FieldValue,
    /// Weight of the fractional term; omit to drop the term.
    #[serde(default)]
    pub rho: Option<FieldValue>,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Analytic Hölder constant of `rho`.
    #[serde(default)]
    pub holder_constant: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Trial fields for the empirical accretivity minimum.
    pub trials: usize,
    /// Random grid functions for the boundedness check.
    pub boundedness_trials: usize,
    /// Numerical-range samples.
    pub samples: usize,
    pub strategy: RangeStrategy,
    /// Eigenvalues compared in the sandwich.
    pub eigenvalues: usize,
    /// Constants for the analytic sector; reported alongside the fitted one.
    pub sector: Option<AnalyticSectorConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            boundedness_trials: 100,
            samples: 500,
            strategy: RangeStrategy::Mixed,
            eigenvalues: 20,
            sector: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSectorConfig {
    pub c2: f64,
    pub c3: f64,
    pub eps: f64,
    pub delta: f64,
    pub l: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub identity: f64,
    pub kernel_mass: f64,
    pub boundedness: f64,
    pub inversion: f64,
    pub adjoint: f64,
    pub accretivity: f64,
    /// Relative slack of `λ_min(H) ≥ μ₁`.
    pub positivity: f64,
    pub sector: f64,
    pub sandwich: f64,
    /// Relative error of the comparator spectra against the closed form.
    pub comparator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            kernel_mass: 1e-8,
            boundedness: 1e-6,
            inversion: 5e-2,
            adjoint: 1e-3,
            accretivity: 1e-2,
            positivity: 0.05,
            sector: 1e-10,
            sandwich: 1e-8,
            comparator: 1e-2,
        }
    }
}

/// A configuration problem, anchored to a line of the file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        write!(f, ": {}", self.msg)
    }
}

impl std::error::Error for ConfigError {}

/// Everything the commands need, validated.
pub struct Setup {
    pub config: RunConfig,
    pub hash: String,
    pub seed: u64,
    pub alpha: FractionalOrder,
    pub domain: ConvexDomain,
    pub geometry: Arc<RayGeometry>,
    /// Present on interval and box domains, where operators are assembled.
    pub coeffs: Option<EllipticCoefficients>,
    pub rho: Option<Field>,
    /// `ρ` on the ray geometry, when given.
    pub weight: Option<HolderWeight>,
    /// Smallest sampled eigenvalue of `a^{ij}` over the ray nodes.
    pub a0: f64,
    pub sector: Option<(SectorConstants, NuParams)>,
}

impl Setup {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_owned(),
            line: None,
            column: None,
            msg: format!("cannot read config: {e}"),
        })?;
        Self::from_str(&text, path, seed_override)
    }

    pub fn from_str(text: &str, path: &Path, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            path: path.to_owned(),
            line: Some(e.line()),
            column: Some(e.column()),
            msg: e.to_string(),
        })?;
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        let anchor = |key: &str, msg: String| {
            let needle = format!("\"{key}\"");
            ConfigError {
                path: path.to_owned(),
                line: text.lines().position(|l| l.contains(&needle)).map(|i| i + 1),
                column: None,
                msg,
            }
        };
        build(config, hash, seed_override).map_err(|(key, e)| anchor(&key, e.to_string()))
    }
}

fn field(value: &FieldValue, base: Point) -> Result<Field, fracspec::Error> {
    match value {
        FieldValue::Number(c) => Ok(Arc::new({
            let c = *c;
            move |_| c
        })),
        FieldValue::Text(s) => {
            let e = Expr::parse(s).map_err(|err| fracspec::Error::InvalidParameter {
                name: "expression",
                reason: format!("`{s}` {err}"),
            })?;
            Ok(Arc::new(move |p: Point| e.eval(p.x, p.y, p.dist(base))))
        }
    }
}

type Keyed = (String, fracspec::Error);

fn bad(key: &str, name: &'static str, reason: impl Into<String>) -> Keyed {
    (
        key.to_owned(),
        fracspec::Error::InvalidParameter {
            name,
            reason: reason.into(),
        },
    )
}

fn need(v: Option<f64>, key: &'static str, kind: &str) -> Result<f64, Keyed> {
    v.ok_or_else(|| bad("kind", key, format!("required for a {kind} domain")))
}

fn build(config: RunConfig, hash: String, seed_override: Option<u64>) -> Result<Setup, Keyed> {
    let at = |key: &'static str| move |e: fracspec::Error| (key.to_owned(), e);
    let alpha = FractionalOrder::new(config.alpha).map_err(at("alpha"))?;
    let d = &config.domain;
    let (domain, base) = match d.kind {
        DomainKind::Interval => {
            let len = need(d.length, "length", "interval")?;
            (ConvexDomain::interval(len).map_err(at("length"))?, Point::default())
        }
        DomainKind::Disk => {
            let r = need(d.radius, "radius", "disk")?;
            let base = d.base.map_or(Point::new(0.0, -r), |b| Point::new(b[0], b[1]));
            (ConvexDomain::disk(r).map_err(at("radius"))?, base)
        }
        DomainKind::Box => {
            let w = need(d.width, "width", "box")?;
            let h = need(d.height, "height", "box")?;
            let base = d.base.map_or(Point::new(0.5 * w, 0.0), |b| Point::new(b[0], b[1]));
            (ConvexDomain::rect(w, h).map_err(at("width"))?, base)
        }
    };
    if domain.dim() == 2 && !domain.is_on_boundary(base) {
        return Err((
            "base".into(),
            fracspec::Error::NotOnBoundary { x: base.x, y: base.y },
        ));
    }
    let cells = config.grid.cells;
    if cells < 2 {
        return Err(bad("cells", "cells", "need at least 2 cells"));
    }
    let radial = config.grid.radial_cells.unwrap_or(cells);
    if radial < 2 {
        return Err(bad("radial_cells", "radial_cells", "need at least 2 cells"));
    }
    let directions = if domain.dim() == 1 { 1 } else { d.directions };
    let geometry = Arc::new(
        RayGeometry::graded(domain, base, directions, radial, config.grid.grading).map_err(at("grid"))?,
    );

    let c = &config.coefficients;
    let a11 = field(&c.a11, base).map_err(at("a11"))?;
    let a22 = field(&c.a22, base).map_err(at("a22"))?;
    let rho = c.rho.as_ref().map(|v| field(v, base)).transpose().map_err(at("rho"))?;
    // ellipticity on the ray nodes; assembled meshes repeat the check on their own nodes
    let mut a0 = f64::INFINITY;
    for k in 0..geometry.ray_count() {
        for j in 0..geometry.grids()[k].nodes().len() {
            let p = geometry.position(k, j);
            let lo = if domain.dim() == 1 { a11(p) } else { a11(p).min(a22(p)) };
            if !(lo > 0.0) {
                return Err((
                    "a11".into(),
                    fracspec::Error::Ellipticity { a0: lo, x: p.x, y: p.y },
                ));
            }
            a0 = a0.min(lo);
        }
    }
    let weight = match &rho {
        None => None,
        Some(r) => {
            let r = r.clone();
            let g = GridFunction::from_real_fn(geometry.clone(), move |s| r(s.point)).map_err(at("rho"))?;
            Some(HolderWeight::new(g, c.lambda, alpha, c.holder_constant).map_err(|e| match e {
                fracspec::Error::HolderExponent { .. } => ("lambda".to_owned(), e),
                fracspec::Error::InvalidParameter { .. } => ("holder_constant".to_owned(), e),
                e => ("rho".to_owned(), e),
            })?)
        }
    };

    let coeffs = match d.kind {
        DomainKind::Disk => None,
        kind => {
            let mesh = match kind {
                DomainKind::Interval => Mesh::interval(d.length.unwrap_or(1.0), cells),
                _ => {
                    let (w, h) = (d.width.unwrap_or(1.0), d.height.unwrap_or(1.0));
                    let ny = ((cells as f64 * h / w).round() as usize).max(2);
                    let m = Mesh::Box {
                        width: w,
                        height: h,
                        nx: cells,
                        ny,
                        base,
                    };
                    m.validate().map(|_| m)
                }
            }
            .map_err(at("grid"))?;
            let spec = CoefficientSpec {
                a11: a11.clone(),
                a22: a22.clone(),
                rho: rho.clone(),
                lambda: c.lambda,
                holder_constant: c.holder_constant,
            };
            Some(EllipticCoefficients::new(spec, mesh, alpha).map_err(|e| match e {
                fracspec::Error::HolderExponent { .. } => ("lambda".to_owned(), e),
                fracspec::Error::Ellipticity { .. } => ("a11".to_owned(), e),
                fracspec::Error::NonPositiveWeight { .. } => ("rho".to_owned(), e),
                e => ("coefficients".to_owned(), e),
            })?)
        }
    };

    let an = &config.analysis;
    for (key, v) in [
        ("trials", an.trials),
        ("boundedness_trials", an.boundedness_trials),
        ("samples", an.samples),
        ("eigenvalues", an.eigenvalues),
    ] {
        if v == 0 {
            return Err(bad(key, "analysis", format!("`{key}` must be at least 1")));
        }
    }
    let t = &config.tolerances;
    for (key, v) in [
        ("identity", t.identity),
        ("kernel_mass", t.kernel_mass),
        ("boundedness", t.boundedness),
        ("inversion", t.inversion),
        ("adjoint", t.adjoint),
        ("accretivity", t.accretivity),
        ("positivity", t.positivity),
        ("sector", t.sector),
        ("sandwich", t.sandwich),
        ("comparator", t.comparator),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad(key, "tolerances", format!("`{key}` must be a nonnegative number")));
        }
    }
    let sector = match an.sector {
        None => None,
        Some(s) => {
            let nu = NuParams::new(domain.dim(), alpha.value(), s.l, s.p, s.q, s.beta).map_err(at("sector"))?;
            let consts = SectorConstants {
                c2: s.c2,
                c3: s.c3,
                eps: s.eps,
                delta: s.delta,
            };
            if !(s.eps > 0.0 && s.delta > 0.0 && s.c2 >= 0.0 && s.c3 >= 0.0) {
                return Err(bad("sector", "sector", "need eps, delta > 0 and c2, c3 ≥ 0"));
            }
            Some((consts, nu))
        }
    };

    Ok(Setup {
        seed: seed_override.unwrap_or(config.seed),
        hash,
        alpha,
        domain,
        geometry,
        coeffs,
        rho,
        weight,
        a0,
        sector,
        config,
    })
}
