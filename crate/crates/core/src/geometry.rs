//! Points, polygons, reflections and the single discrete bicycle step.
//!
//! Everything here works in an arbitrary dimension `n >= 2`. Arithmetic
//! operators on [`Vector`] panic on mixed dimensions; the public geometric
//! routines check dimensions up front and return
//! [`BicycleError::DimensionMismatch`] instead.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{BicycleError, Result};

/// Default relative tolerance for geometric predicates.
pub const DEFAULT_EPS_GEOM: f64 = 1e-9;
/// Default relative tolerance for monodromy-class boundaries.
pub const DEFAULT_EPS_CLASS: f64 = 1e-8;

/// Tolerances used by predicates and classifications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative tolerance for geometric predicates.
    pub eps_geom: f64,
    /// Relative tolerance for the parabolic boundary and identity tests.
    pub eps_class: f64,
}

impl Tolerance {
    pub fn new(eps_geom: f64, eps_class: f64) -> Result<Self> {
        if !(eps_geom > 0.0 && eps_geom.is_finite()) || !(eps_class > 0.0 && eps_class.is_finite()) {
            return Err(BicycleError::InvalidParameter(format!(
                "tolerances must be positive and finite (got {eps_geom}, {eps_class})"
            )));
        }
        Ok(Self { eps_geom, eps_class })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_geom: DEFAULT_EPS_GEOM,
            eps_class: DEFAULT_EPS_CLASS,
        }
    }
}

/// A point or displacement in Euclidean space of dimension at least two.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector {
    coords: Vec<f64>,
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl Vector {
    /// Builds a vector, rejecting dimension below two and non-finite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(BicycleError::InvalidParameter(format!(
                "vectors need at least two coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(BicycleError::InvalidParameter(
                "coordinates must be finite".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self { coords: vec![x, y] }
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: vec![x, y, z],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    /// Unit vector at angle `theta` (radians, counterclockwise from +x).
    pub fn polar(theta: f64) -> Self {
        Self::xy(theta.cos(), theta.sin())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(&self) -> Vector {
        self * (1.0 / self.norm())
    }

    /// z-component of the planar cross product (first two coordinates).
    pub fn cross2(&self, other: &Vector) -> f64 {
        self.coords[0] * other.coords[1] - self.coords[1] * other.coords[0]
    }

    /// Rotation by +90 degrees in the plane of the first two coordinates.
    pub fn perp(&self) -> Vector {
        Vector::xy(-self.y(), self.x())
    }

    /// Angle of a planar vector, in (-pi, pi].
    pub fn angle(&self) -> f64 {
        self.y().atan2(self.x())
    }

    /// Rotates a planar point about `center` by `theta`.
    pub fn rotate_about(&self, center: &Vector, theta: f64) -> Vector {
        let d = self - center;
        let (s, c) = theta.sin_cos();
        center + &Vector::xy(c * d.x() - s * d.y(), s * d.x() + c * d.y())
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(BicycleError::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Vector> for &Vector {
            type Output = Vector;
            fn $method(self, rhs: &Vector) -> Vector {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                Vector {
                    coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<Vector> for Vector {
            type Output = Vector;
            fn $method(self, rhs: Vector) -> Vector {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Vector> for Vector {
            type Output = Vector;
            fn $method(self, rhs: &Vector) -> Vector {
                (&self).$method(rhs)
            }
        }
        impl $trait<Vector> for &Vector {
            type Output = Vector;
            fn $method(self, rhs: Vector) -> Vector {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        &self * s
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        &self * -1.0
    }
}

/// A closed polygon: a cyclic list of at least three vertices of equal
/// dimension with distinct consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vector>,
    dim: usize,
}

impl Polygon {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(BicycleError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let dim = vertices[0].dim();
        for v in &vertices {
            v.check_dim(dim)?;
            if dim < 2 || v.coords.iter().any(|c| !c.is_finite()) {
                return Err(BicycleError::InvalidPolygon(
                    "vertices must be finite points of dimension >= 2".into(),
                ));
            }
        }
        let k = vertices.len();
        for i in 0..k {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % k];
            let scale = a.norm().max(b.norm()).max(1.0);
            if a.dist(b) <= f64::EPSILON * scale {
                return Err(BicycleError::InvalidPolygon(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % k
                )));
            }
        }
        Ok(Self { vertices, dim })
    }

    /// Planar polygon from coordinate pairs.
    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(x, y)| Vector::xy(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vector> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cyclic vertex access; any integer index is reduced modulo `len`.
    pub fn vertex(&self, i: isize) -> &Vector {
        let k = self.len() as isize;
        &self.vertices[i.rem_euclid(k) as usize]
    }

    /// Side vector `V_{i+1} - V_i`.
    pub fn side(&self, i: usize) -> Vector {
        self.vertex(i as isize + 1) - self.vertex(i as isize)
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.side(i).norm()).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.side_lengths().iter().sum()
    }

    pub fn centroid(&self) -> Vector {
        let sum = self
            .vertices
            .iter()
            .fold(Vector::zeros(self.dim), |acc, v| acc + v);
        sum * (1.0 / self.len() as f64)
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(b));
            }
        }
        d
    }

    pub fn translated(&self, shift: &Vector) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| v + shift).collect(),
            dim: self.dim,
        }
    }

    /// Same vertices traversed in the opposite direction, starting at `V_0`.
    pub fn reversed(&self) -> Polygon {
        let k = self.len();
        Polygon {
            vertices: (0..k).map(|i| self.vertices[(k - i) % k].clone()).collect(),
            dim: self.dim,
        }
    }

    /// Cyclic relabeling `V_i -> V_{i+shift}`.
    pub fn shifted(&self, shift: isize) -> Polygon {
        Polygon {
            vertices: (0..self.len() as isize)
                .map(|i| self.vertex(i + shift).clone())
                .collect(),
            dim: self.dim,
        }
    }

    /// Largest vertexwise distance to another polygon with the same labeling.
    pub fn max_vertex_distance(&self, other: &Polygon) -> f64 {
        assert_eq!(self.len(), other.len());
        self.vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max)
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(BicycleError::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn with_vertex(&self, i: usize, v: Vector) -> Polygon {
        let mut vertices = self.vertices.clone();
        vertices[i] = v;
        Polygon {
            vertices,
            dim: self.dim,
        }
    }
}

fn same_dim(points: &[&Vector]) -> Result<usize> {
    let dim = points[0].dim();
    for p in points {
        p.check_dim(dim)?;
    }
    Ok(dim)
}

fn line_is_degenerate(a: &Vector, b: &Vector, eps: f64) -> bool {
    a.dist(b) < eps * a.norm().max(b.norm()).max(1.0)
}

/// Reflects `p` in the line through `a` and `b` (the point map
/// `p -> 2 proj(p) - p`, valid in any dimension).
pub fn reflect_in_line(p: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
    reflect_in_line_tol(p, a, b, DEFAULT_EPS_GEOM)
}

pub(crate) fn reflect_in_line_tol(p: &Vector, a: &Vector, b: &Vector, eps: f64) -> Result<Vector> {
    same_dim(&[p, a, b])?;
    if line_is_degenerate(a, b, eps) {
        return Err(BicycleError::DegenerateLine);
    }
    let d = b - a;
    let t = (p - a).dot(&d) / d.norm_sq();
    let foot = a + &(&d * t);
    Ok(&foot * 2.0 - p)
}

/// Reflects `p` in the perpendicular bisector hyperplane of segment `ab`.
pub fn perp_bisector_reflect(p: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
    perp_bisector_reflect_tol(p, a, b, DEFAULT_EPS_GEOM)
}

pub(crate) fn perp_bisector_reflect_tol(
    p: &Vector,
    a: &Vector,
    b: &Vector,
    eps: f64,
) -> Result<Vector> {
    same_dim(&[p, a, b])?;
    if line_is_degenerate(a, b, eps) {
        return Err(BicycleError::DegenerateLine);
    }
    let n = b - a;
    let mid = (a + b) * 0.5;
    let s = 2.0 * (p - &mid).dot(&n) / n.norm_sq();
    Ok(p - &(&n * s))
}

/// One discrete bicycle step: given the side `v1 -> v2` and the seed `w1`,
/// returns `w2`, the reflection of `w1 + (v2 - v1)` in the line `w1 v2`.
///
/// The quadrilateral `v1 v2 w2 w1` is then a plane isosceles trapezoid with
/// `|v2 - w2| = |v1 - w1|` and `|w1 - w2| = |v1 - v2|`.
pub fn bicycle_step(v1: &Vector, v2: &Vector, w1: &Vector, tol: &Tolerance) -> Result<Vector> {
    same_dim(&[v1, v2, w1])?;
    if v1.dist(w1) == 0.0 {
        return Err(BicycleError::InvalidParameter(
            "seed segment has zero length".into(),
        ));
    }
    let u = w1 + &(v2 - v1);
    reflect_in_line_tol(&u, w1, v2, tol.eps_geom)
}

/// Distance between `p4` and the reflection of `p2` in the perpendicular
/// bisector of `p1 p3`. Zero exactly for Darboux butterflies `p1 p2 p3 p4`.
pub fn butterfly_residual(p1: &Vector, p2: &Vector, p3: &Vector, p4: &Vector) -> Result<f64> {
    let mirrored = perp_bisector_reflect_tol(p2, p1, p3, f64::EPSILON)?;
    Ok(mirrored.dist(p4))
}

/// Relative scale of a point configuration, used by the butterfly predicate.
pub(crate) fn spread(points: &[&Vector]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(a.dist(b));
        }
    }
    d
}

/// Whether four points `(P1, P2, P3, P4)` form a Darboux butterfly, i.e.
/// `P4` is the mirror image of `P2` in the perpendicular bisector of
/// `P1 P3`. Equivalently the closed quadrilateral is made of the lateral
/// sides and diagonals of an isosceles trapezoid.
pub fn is_darboux_butterfly(q: &Polygon, tol: &Tolerance) -> Result<bool> {
    if q.len() != 4 {
        return Err(BicycleError::WrongArity {
            expected: 4,
            found: q.len(),
        });
    }
    let v = q.vertices();
    Ok(points_form_butterfly(&v[0], &v[1], &v[2], &v[3], tol))
}

/// Point-based form of [`is_darboux_butterfly`]; tolerates repeated points.
pub fn points_form_butterfly(
    p1: &Vector,
    p2: &Vector,
    p3: &Vector,
    p4: &Vector,
    tol: &Tolerance,
) -> bool {
    let scale = spread(&[p1, p2, p3, p4]);
    match butterfly_residual(p1, p2, p3, p4) {
        Ok(r) => r <= tol.eps_geom * scale.max(f64::MIN_POSITIVE),
        // p1 = p3: the bisector is undefined; fall back to |p1 p2| = |p1 p4|
        // with p2 = p4, the only configuration with identity monodromy here.
        Err(_) => p2.dist(p4) <= tol.eps_geom * scale.max(f64::MIN_POSITIVE),
    }
}

/// Gram determinant of the difference vectors `p_i - p_0`; zero iff the
/// points lie in a common affine plane (for four points).
pub fn gram_determinant(points: &[&Vector]) -> f64 {
    let base = points[0];
    let diffs: Vec<Vector> = points[1..].iter().map(|p| *p - base).collect();
    let m = diffs.len();
    let gram = nalgebra::DMatrix::from_fn(m, m, |i, j| diffs[i].dot(&diffs[j]));
    gram.determinant()
}

/// Oriented angle from `a` to `b` in the plane, in (-pi, pi].
pub fn oriented_angle(a: &Vector, b: &Vector) -> f64 {
    a.cross2(b).atan2(a.dot(b))
}
