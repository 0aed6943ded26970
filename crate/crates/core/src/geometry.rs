//! Convex domains, ray fans from a boundary point, radial grids and the
//! grid functions that live on them.
//!
//! Every point `Q` of the domain is written as `P + r e` with `P` a fixed
//! boundary point and `e` a unit direction; integrals over the domain are
//! split as `∫ dχ ∫_0^{d(e)} (·) r^{n-1} dr`. A [`RayGeometry`] discretizes
//! the angular part with a midpoint fan and the radial part with a
//! [`RadialGrid`] per ray.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;

/// A point of the plane. One-dimensional domains use the `x` axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn along(self, dir: Point, t: f64) -> Point {
        Point::new(self.x + t * dir.x, self.y + t * dir.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Disk,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `[0, length]` on the x axis.
    Interval { length: f64 },
    Disk { center: Point, radius: f64 },
    /// Axis-aligned rectangle `[origin.x, origin.x + width] × [origin.y, origin.y + height]`.
    Rect { origin: Point, width: f64, height: f64 },
}

/// A bounded convex domain of dimension 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexDomain {
    shape: Shape,
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(name, format!("must be a positive finite number, got {v}")))
    }
}

impl ConvexDomain {
    pub fn interval(length: f64) -> Result<Self> {
        let length = positive("length", length)?;
        Ok(Self {
            shape: Shape::Interval { length },
        })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::disk_at(Point::default(), radius)
    }

    pub fn disk_at(center: Point, radius: f64) -> Result<Self> {
        let radius = positive("radius", radius)?;
        Ok(Self {
            shape: Shape::Disk { center, radius },
        })
    }

    pub fn rect(width: f64, height: f64) -> Result<Self> {
        Self::rect_at(Point::default(), width, height)
    }

    pub fn rect_at(origin: Point, width: f64, height: f64) -> Result<Self> {
        let width = positive("width", width)?;
        let height = positive("height", height)?;
        Ok(Self {
            shape: Shape::Rect {
                origin,
                width,
                height,
            },
        })
    }

    /// Builds a domain from a kind and its positional shape parameters:
    /// interval `[length]`, disk `[radius]`, box `[width, height]`.
    pub fn build(kind: DomainKind, params: &[f64]) -> Result<Self> {
        let need = match kind {
            DomainKind::Interval | DomainKind::Disk => 1,
            DomainKind::Box => 2,
        };
        if params.len() != need {
            return Err(invalid(
                "shape",
                format!("{kind:?} takes {need} parameter(s), got {}", params.len()),
            ));
        }
        match kind {
            DomainKind::Interval => Self::interval(params[0]),
            DomainKind::Disk => Self::disk(params[0]),
            DomainKind::Box => Self::rect(params[0], params[1]),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn kind(&self) -> DomainKind {
        match self.shape {
            Shape::Interval { .. } => DomainKind::Interval,
            Shape::Disk { .. } => DomainKind::Disk,
            Shape::Rect { .. } => DomainKind::Box,
        }
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Interval { length } => length,
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Rect { width, height, .. } => width.hypot(height),
        }
    }

    fn tol(&self) -> f64 {
        1e-9 * self.diameter()
    }

    /// Whether `p` lies in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        let tol = self.tol();
        match self.shape {
            Shape::Interval { length } => p.y.abs() <= tol && p.x >= -tol && p.x <= length + tol,
            Shape::Disk { center, radius } => p.dist(center) <= radius + tol,
            Shape::Rect {
                origin,
                width,
                height,
            } => {
                p.x >= origin.x - tol
                    && p.x <= origin.x + width + tol
                    && p.y >= origin.y - tol
                    && p.y <= origin.y + height + tol
            }
        }
    }

    pub fn is_on_boundary(&self, p: Point) -> bool {
        if !self.contains(p) {
            return false;
        }
        let tol = self.tol();
        match self.shape {
            Shape::Interval { length } => p.x.abs() <= tol || (p.x - length).abs() <= tol,
            Shape::Disk { center, radius } => (p.dist(center) - radius).abs() <= tol,
            Shape::Rect {
                origin,
                width,
                height,
            } => {
                (p.x - origin.x).abs() <= tol
                    || (p.x - origin.x - width).abs() <= tol
                    || (p.y - origin.y).abs() <= tol
                    || (p.y - origin.y - height).abs() <= tol
            }
        }
    }

    /// Length of the segment `{p + t e : t ≥ 0}` inside the closed domain;
    /// zero for directions pointing outward.
    pub fn chord_length(&self, p: Point, e: Point) -> f64 {
        match self.shape {
            Shape::Interval { length } => {
                if e.x > 0.0 {
                    (length - p.x).max(0.0)
                } else if e.x < 0.0 {
                    p.x.max(0.0)
                } else {
                    0.0
                }
            }
            Shape::Disk { center, radius } => {
                // |p - c + t e|^2 = R^2, larger root
                let w = Point::new(p.x - center.x, p.y - center.y);
                let b = w.x * e.x + w.y * e.y;
                let c = w.x * w.x + w.y * w.y - radius * radius;
                let disc = b * b - c;
                if disc <= 0.0 {
                    return 0.0;
                }
                (-b + disc.sqrt()).max(0.0)
            }
            Shape::Rect {
                origin,
                width,
                height,
            } => {
                let mut t = f64::INFINITY;
                let slabs = [
                    (p.x, e.x, origin.x, origin.x + width),
                    (p.y, e.y, origin.y, origin.y + height),
                ];
                for (pos, dir, lo, hi) in slabs {
                    if dir > 1e-15 {
                        t = t.min((hi - pos) / dir);
                    } else if dir < -1e-15 {
                        t = t.min((lo - pos) / dir);
                    }
                }
                if t.is_finite() {
                    t.max(0.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// Nonnegative function vanishing exactly on the boundary; used to
    /// build trial fields in `H¹₀`.
    pub fn boundary_envelope(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Interval { length } => (p.x * (length - p.x)).max(0.0),
            Shape::Disk { center, radius } => {
                let d = p.dist(center);
                (radius * radius - d * d).max(0.0)
            }
            Shape::Rect {
                origin,
                width,
                height,
            } => {
                let sx = (p.x - origin.x) * (origin.x + width - p.x);
                let sy = (p.y - origin.y) * (origin.y + height - p.y);
                if sx <= 0.0 || sy <= 0.0 {
                    0.0
                } else {
                    sx * sy
                }
            }
        }
    }

    /// Euclidean distance from an interior point to the boundary (zero outside).
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        let d = match self.shape {
            Shape::Interval { length } => p.x.min(length - p.x),
            Shape::Disk { center, radius } => radius - p.dist(center),
            Shape::Rect {
                origin,
                width,
                height,
            } => (p.x - origin.x)
                .min(origin.x + width - p.x)
                .min(p.y - origin.y)
                .min(origin.y + height - p.y),
        };
        d.max(0.0)
    }

    /// Bounding box as `(lower-left, upper-right)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self.shape {
            Shape::Interval { length } => (Point::new(0.0, 0.0), Point::new(length, 0.0)),
            Shape::Disk { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Shape::Rect {
                origin,
                width,
                height,
            } => (origin, Point::new(origin.x + width, origin.y + height)),
        }
    }

    /// Admissible direction angles at a boundary point, as `(center, half_width)`.
    fn direction_sector(&self, p: Point) -> Result<(f64, f64)> {
        if !self.is_on_boundary(p) {
            return Err(Error::NotOnBoundary { x: p.x, y: p.y });
        }
        let tol = self.tol();
        match self.shape {
            Shape::Interval { length } => {
                if p.x.abs() <= tol {
                    Ok((0.0, 0.0))
                } else {
                    debug_assert!((p.x - length).abs() <= tol);
                    Ok((PI, 0.0))
                }
            }
            Shape::Disk { center, .. } => Ok(((center.y - p.y).atan2(center.x - p.x), FRAC_PI_2)),
            Shape::Rect {
                origin,
                width,
                height,
            } => {
                let mut nx: f64 = 0.0;
                let mut ny: f64 = 0.0;
                if (p.x - origin.x).abs() <= tol {
                    nx += 1.0;
                }
                if (p.x - origin.x - width).abs() <= tol {
                    nx -= 1.0;
                }
                if (p.y - origin.y).abs() <= tol {
                    ny += 1.0;
                }
                if (p.y - origin.y - height).abs() <= tol {
                    ny -= 1.0;
                }
                let corner = nx != 0.0 && ny != 0.0;
                let half = if corner { FRAC_PI_4 } else { FRAC_PI_2 };
                Ok((ny.atan2(nx), half))
            }
        }
    }
}

/// A ray `P + t e`, `t ∈ [0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub base: Point,
    pub direction: Point,
    pub length: f64,
}

impl Ray {
    pub fn point_at(&self, t: f64) -> Point {
        self.base.along(self.direction, t)
    }
}

/// Rays from a boundary point covering the admissible directions, with
/// midpoint weights for the angular measure `dχ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFan {
    pub rays: Vec<Ray>,
    pub angular_weights: Vec<f64>,
    /// Directions dropped because their chord has zero length.
    pub skipped_tangential: usize,
    /// Analytic measure of the admissible direction set.
    pub angular_measure: f64,
}

impl RayFan {
    /// Builds `direction_count` midpoint rays from the boundary point `base`.
    /// One-dimensional domains always get a single ray of weight 1.
    pub fn build(domain: &ConvexDomain, base: Point, direction_count: usize) -> Result<Self> {
        if direction_count == 0 {
            return Err(invalid("direction_count", "must be at least 1"));
        }
        let (center, half) = domain.direction_sector(base)?;
        if domain.dim() == 1 {
            let direction = Point::new(center.cos().round(), 0.0);
            let length = domain.chord_length(base, direction);
            return Ok(Self {
                rays: vec![Ray {
                    base,
                    direction,
                    length,
                }],
                angular_weights: vec![1.0],
                skipped_tangential: 0,
                angular_measure: 1.0,
            });
        }
        let span = 2.0 * half;
        let weight = span / direction_count as f64;
        let tiny = 1e-12 * domain.diameter();
        let mut rays = Vec::with_capacity(direction_count);
        let mut angular_weights = Vec::with_capacity(direction_count);
        let mut skipped = 0;
        for k in 0..direction_count {
            let phi = center - half + (k as f64 + 0.5) * weight;
            let direction = Point::new(phi.cos(), phi.sin());
            let length = domain.chord_length(base, direction);
            if length <= tiny {
                skipped += 1;
                continue;
            }
            rays.push(Ray {
                base,
                direction,
                length,
            });
            angular_weights.push(weight);
        }
        if rays.is_empty() {
            return Err(invalid("direction_count", "no admissible direction has a positive chord"));
        }
        Ok(Self {
            rays,
            angular_weights,
            skipped_tangential: skipped,
            angular_measure: span,
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.angular_weights.iter().sum()
    }
}

/// Radial nodes `0 = r_0 < r_1 < … < r_N = d(e)` along one ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(length: f64, cells: usize) -> Result<Self> {
        Self::graded(length, cells, 1.0)
    }

    /// Power-graded nodes `r_j = d (j/N)^q`, refined toward `r = 0` for `q > 1`.
    pub fn graded(length: f64, cells: usize, exponent: f64) -> Result<Self> {
        let length = positive("length", length)?;
        if cells == 0 {
            return Err(invalid("cells", "must be at least 1"));
        }
        if !(exponent.is_finite() && exponent >= 1.0) {
            return Err(invalid("grading", format!("exponent must be ≥ 1, got {exponent}")));
        }
        let n = cells as f64;
        let mut nodes: Vec<f64> = (0..=cells)
            .map(|j| length * (j as f64 / n).powf(exponent))
            .collect();
        nodes[cells] = length;
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("nodes", "need at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(invalid("nodes", "first node must be 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("nodes", "nodes must be finite and strictly increasing"));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for (j, c) in self.nodes.windows(2).enumerate() {
            let h = c[1] - c[0];
            w[j] += 0.5 * h;
            w[j + 1] += 0.5 * h;
        }
        w
    }
}

/// A domain, a boundary point, its ray fan and one radial grid per ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayGeometry {
    domain: ConvexDomain,
    base: Point,
    fan: RayFan,
    grids: Vec<RadialGrid>,
    /// Per ray: trapezoid weight times `r^{n-1}` times angular weight.
    measure: Vec<Vec<f64>>,
}

impl RayGeometry {
    /// Uniform radial grids with `cells` cells on every ray.
    pub fn new(domain: ConvexDomain, base: Point, directions: usize, cells: usize) -> Result<Self> {
        Self::graded(domain, base, directions, cells, 1.0)
    }

    pub fn graded(
        domain: ConvexDomain,
        base: Point,
        directions: usize,
        cells: usize,
        grading: f64,
    ) -> Result<Self> {
        let fan = RayFan::build(&domain, base, directions)?;
        let grids = fan
            .rays
            .iter()
            .map(|ray| RadialGrid::graded(ray.length, cells, grading))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(domain, base, fan, grids))
    }

    fn assemble(domain: ConvexDomain, base: Point, fan: RayFan, grids: Vec<RadialGrid>) -> Self {
        let n = domain.dim() as i32;
        let measure = grids
            .iter()
            .zip(&fan.angular_weights)
            .map(|(g, &wchi)| {
                g.trapezoid_weights()
                    .iter()
                    .zip(g.nodes())
                    .map(|(&q, &r)| wchi * q * r.powi(n - 1))
                    .collect()
            })
            .collect();
        Self {
            domain,
            base,
            fan,
            grids,
            measure,
        }
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn fan(&self) -> &RayFan {
        &self.fan
    }

    pub fn grids(&self) -> &[RadialGrid] {
        &self.grids
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn ray_count(&self) -> usize {
        self.grids.len()
    }

    /// Quadrature weights of `r^{n-1} dr dχ` per (ray, node).
    pub fn measure(&self) -> &[Vec<f64>] {
        &self.measure
    }

    pub fn node_count(&self) -> usize {
        self.grids.iter().map(|g| g.nodes().len()).sum()
    }

    pub fn max_spacing(&self) -> f64 {
        self.grids
            .iter()
            .map(RadialGrid::max_spacing)
            .fold(0.0, f64::max)
    }

    pub fn position(&self, ray: usize, node: usize) -> Point {
        self.fan.rays[ray].point_at(self.grids[ray].nodes()[node])
    }

    /// Same rays, every other radial node. `None` if some ray has an odd cell count.
    pub fn coarsened(&self) -> Option<Self> {
        if self.grids.iter().any(|g| g.cells() % 2 != 0 || g.cells() < 2) {
            return None;
        }
        let grids = self
            .grids
            .iter()
            .map(|g| RadialGrid {
                nodes: g.nodes().iter().copied().step_by(2).collect(),
            })
            .collect();
        Some(Self::assemble(self.domain, self.base, self.fan.clone(), grids))
    }
}

/// Location of one sample of a [`GridFunction`].
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub ray: usize,
    pub node: usize,
    pub r: f64,
    /// Chord length of the ray.
    pub d: f64,
    pub point: Point,
}

/// Complex samples per (ray, radial node) on a shared [`RayGeometry`].
/// Functions are extended by zero outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    geometry: Arc<RayGeometry>,
    values: Vec<Vec<Complex64>>,
}

impl GridFunction {
    pub fn new(geometry: Arc<RayGeometry>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if values.len() != geometry.ray_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rays", geometry.ray_count()),
                got: format!("{} rays", values.len()),
            });
        }
        for (k, (row, grid)) in values.iter().zip(geometry.grids()).enumerate() {
            if row.len() != grid.nodes().len() {
                return Err(Error::ShapeMismatch {
                    expected: format!("{} nodes on ray {k}", grid.nodes().len()),
                    got: format!("{}", row.len()),
                });
            }
            if let Some(j) = row.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { ray: k, node: j });
            }
        }
        Ok(Self { geometry, values })
    }

    pub(crate) fn from_parts_unchecked(geometry: Arc<RayGeometry>, values: Vec<Vec<Complex64>>) -> Self {
        Self { geometry, values }
    }

    pub fn zeros(geometry: Arc<RayGeometry>) -> Self {
        let values = geometry
            .grids()
            .iter()
            .map(|g| vec![Complex64::new(0.0, 0.0); g.nodes().len()])
            .collect();
        Self { geometry, values }
    }

    pub fn from_fn<F>(geometry: Arc<RayGeometry>, f: F) -> Result<Self>
    where
        F: Fn(Sample) -> Complex64 + Sync + Send,
    {
        let values = exec::map_range(geometry.ray_count(), |k| {
            let ray = geometry.fan().rays[k];
            geometry.grids()[k]
                .nodes()
                .iter()
                .enumerate()
                .map(|(j, &r)| {
                    f(Sample {
                        ray: k,
                        node: j,
                        r,
                        d: ray.length,
                        point: ray.point_at(r),
                    })
                })
                .collect()
        });
        Self::new(geometry, values)
    }

    pub fn from_real_fn<F>(geometry: Arc<RayGeometry>, f: F) -> Result<Self>
    where
        F: Fn(Sample) -> f64 + Sync + Send,
    {
        Self::from_fn(geometry, |s| Complex64::new(f(s), 0.0))
    }

    pub fn geometry(&self) -> &Arc<RayGeometry> {
        &self.geometry
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn ray(&self, k: usize) -> &[Complex64] {
        &self.values[k]
    }

    pub fn same_geometry(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.geometry, &other.geometry) || *self.geometry == *other.geometry
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|&z| f(z)).collect())
            .collect();
        Self::from_parts_unchecked(self.geometry.clone(), values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if !self.same_geometry(other) {
            return Err(Error::GeometryMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Ok(Self::from_parts_unchecked(self.geometry.clone(), values))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn real_part(&self) -> Self {
        self.map(|z| Complex64::new(z.re, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        self.map(|z| Complex64::new(z.im, 0.0))
    }

    /// Weighted `L₂` norm.
    pub fn norm(&self) -> f64 {
        self.norm_excluding_base(false)
    }

    /// `L₂` norm, optionally leaving out the node `r = 0` of every ray.
    pub fn norm_excluding_base(&self, exclude_base: bool) -> f64 {
        let skip = usize::from(exclude_base);
        self.values
            .iter()
            .zip(self.geometry.measure())
            .map(|(row, w)| {
                row.iter()
                    .zip(w)
                    .skip(skip)
                    .map(|(z, &q)| q * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `L₂` norm over interior nodes only: both ends of every ray are left
    /// out. Error norms use this, since at the ray ends the zero extension
    /// pins operator values that the continuous operators leave free.
    pub fn norm_interior(&self) -> f64 {
        self.values
            .iter()
            .zip(self.geometry.measure())
            .map(|(row, w)| {
                let n = row.len();
                row.iter()
                    .zip(w)
                    .take(n.saturating_sub(1))
                    .skip(1)
                    .map(|(z, &q)| q * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Largest modulus over all nodes, optionally skipping `r = 0`.
    pub fn max_abs(&self, exclude_base: bool) -> f64 {
        let skip = usize::from(exclude_base);
        self.values
            .iter()
            .flat_map(|row| row.iter().skip(skip))
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `(f, g) = Σ_rays w_χ Σ_nodes q_j f_j conj(g_j) r_j^{n-1}`.
pub fn weighted_inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    if !f.same_geometry(g) {
        return Err(Error::GeometryMismatch);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, b), w) in f.values.iter().zip(&g.values).zip(f.geometry.measure()) {
        for ((x, y), &q) in a.iter().zip(b).zip(w) {
            acc += x * y.conj() * q;
        }
    }
    Ok(acc)
}

/// Result of [`holder_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    /// Largest sampled ratio `|ρ(Q) - ρ(Q')| / |Q - Q'|^λ`. A lower bound
    /// for the true Hölder constant, since only node pairs are examined.
    pub sampled_constant: f64,
    pub inf_rho: f64,
    /// Per ray: `ρ` is non-increasing along the ray.
    pub monotone_per_ray: Vec<bool>,
    pub monotone: bool,
}

/// Sample-based Hölder constant, infimum and monotonicity of a positive
/// weight `ρ`. Pairs examined: every pair on each ray, and nodes of equal
/// index on neighbouring rays.
pub fn holder_estimate(rho: &GridFunction, lambda: f64, alpha: f64) -> Result<HolderEstimate> {
    if !(lambda > alpha && lambda <= 1.0) {
        return Err(Error::HolderExponent { lambda, alpha });
    }
    let geom = rho.geometry();
    let mut inf_rho = f64::INFINITY;
    let mut real = Vec::with_capacity(rho.values.len());
    for (k, row) in rho.values.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (j, z) in row.iter().enumerate() {
            if !(z.re > 0.0) || z.im.abs() > 1e-14 * z.re.abs().max(1.0) {
                return Err(Error::NonPositiveWeight {
                    value: z.re,
                    ray: k,
                    node: j,
                });
            }
            inf_rho = inf_rho.min(z.re);
            r.push(z.re);
        }
        real.push(r);
    }

    let per_ray: Vec<(f64, bool)> = exec::map_range(real.len(), |k| {
        let vals = &real[k];
        let nodes = geom.grids()[k].nodes();
        let mut m: f64 = 0.0;
        for i in 0..vals.len() {
            for j in (i + 1)..vals.len() {
                let dist = nodes[j] - nodes[i];
                if dist > 0.0 {
                    m = m.max((vals[j] - vals[i]).abs() / dist.powf(lambda));
                }
            }
        }
        let monotone = vals
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        (m, monotone)
    });
    let mut sampled_constant = per_ray.iter().map(|p| p.0).fold(0.0, f64::max);
    for k in 1..real.len() {
        let common = real[k].len().min(real[k - 1].len());
        for j in 0..common {
            let dist = geom.position(k, j).dist(geom.position(k - 1, j));
            if dist > 1e-14 {
                sampled_constant =
                    sampled_constant.max((real[k][j] - real[k - 1][j]).abs() / dist.powf(lambda));
            }
        }
    }
    let monotone_per_ray: Vec<bool> = per_ray.iter().map(|p| p.1).collect();
    let monotone = monotone_per_ray.iter().all(|&b| b);
    Ok(HolderEstimate {
        sampled_constant,
        inf_rho,
        monotone_per_ray,
        monotone,
    })
}
