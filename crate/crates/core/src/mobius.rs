//! Monodromy of the bicycle correspondence.
//!
//! In the plane a direction `alpha` of the segment `V_i W_i` is encoded by
//! the affine coordinate `x = tan(alpha / 2)` (stereographic projection from
//! `(-1, 0)`), and the transport along one side acts on `x` by a fractional
//! linear map. Internally directions are homogeneous pairs `(x0 : x1)` so
//! that `alpha = pi` (`x = inf`) needs no special casing.
//!
//! In dimension `n` the same transport is the projective action of a matrix
//! in `O(n, 1)` on the unit sphere of directions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{BicycleError, Result};
use crate::geometry::{Polygon, Tolerance, Vector, DEFAULT_EPS_GEOM};

/// A real 2x2 matrix acting on the projective line, defined up to scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius2 {
    m: Matrix2<f64>,
}

impl Mobius2 {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        if m.iter().all(|&e| e == 0.0) || m.iter().any(|e| !e.is_finite()) {
            return Err(BicycleError::InvalidParameter(
                "Mobius matrix must be finite and nonzero".into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn from_rows(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(Matrix2::new(a, b, c, d))
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix2::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn det(&self) -> f64 {
        self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]
    }

    /// `Tr^2 - 4 det`.
    pub fn discriminant(&self) -> f64 {
        let t = self.trace();
        t * t - 4.0 * self.det()
    }

    /// Discriminant divided by `max(Tr^2, 4|det|)`; scale free, in [-1, 1].
    pub fn normalized_discriminant(&self) -> f64 {
        let t2 = self.trace().powi(2);
        let d4 = 4.0 * self.det().abs();
        let s = t2.max(d4);
        if s == 0.0 {
            0.0
        } else {
            self.discriminant() / s
        }
    }

    /// The conjugacy invariant `Tr^2 / det`.
    pub fn trace_sq_over_det(&self) -> f64 {
        self.trace().powi(2) / self.det()
    }

    /// Composition `self ∘ earlier` (apply `earlier` first).
    pub fn compose(&self, earlier: &Mobius2) -> Mobius2 {
        Mobius2 {
            m: self.m * earlier.m,
        }
    }

    fn normalized_at(&self, idx: (usize, usize)) -> Option<Matrix2<f64>> {
        let pivot = self.m[idx];
        if pivot == 0.0 {
            None
        } else {
            Some(self.m / pivot)
        }
    }

    fn largest_entry(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for i in 0..2 {
            for j in 0..2 {
                if self.m[(i, j)].abs() > self.m[best].abs() {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Projective distance: both matrices are divided by their entry at the
    /// position of the largest-magnitude entry of `self`, then compared
    /// entrywise (max norm).
    pub fn projective_distance(&self, other: &Mobius2) -> f64 {
        let idx = self.largest_entry();
        match (self.normalized_at(idx), other.normalized_at(idx)) {
            (Some(a), Some(b)) => (a - b).amax(),
            _ => f64::INFINITY,
        }
    }

    pub fn projectively_equal(&self, other: &Mobius2, eps: f64) -> bool {
        self.projective_distance(other) <= eps
    }

    /// Image of the direction angle `alpha` under the projective action.
    pub fn apply_angle(&self, alpha: f64) -> f64 {
        let h = Vector2::new((alpha / 2.0).sin(), (alpha / 2.0).cos());
        homogeneous_to_angle(&(self.m * h))
    }
}

/// Angle `alpha = 2 atan2(x0, x1)` of a homogeneous pair, in (-pi, pi].
pub fn homogeneous_to_angle(h: &Vector2<f64>) -> f64 {
    wrap_angle(2.0 * h[0].atan2(h[1]))
}

/// Reduces an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Conjugacy class of a real Möbius transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonodromyClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
    Identity,
    Degenerate,
}

impl std::fmt::Display for MonodromyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MonodromyClass::Elliptic => "elliptic",
            MonodromyClass::Parabolic => "parabolic",
            MonodromyClass::Hyperbolic => "hyperbolic",
            MonodromyClass::Identity => "identity",
            MonodromyClass::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Transport matrix along one side of length `a` and direction `phi`:
/// `[[l + a cos phi, -a sin phi], [-a sin phi, l - a cos phi]]`.
pub fn edge_mobius(ell: f64, a: f64, phi: f64) -> Result<Mobius2> {
    if !ell.is_finite() || ell <= 0.0 || !a.is_finite() || a < 0.0 || !phi.is_finite() {
        return Err(BicycleError::InvalidParameter(format!(
            "edge_mobius needs ell > 0 and a >= 0 (got ell = {ell}, a = {a})"
        )));
    }
    let (s, c) = phi.sin_cos();
    Mobius2::from_rows(ell + a * c, -a * s, -a * s, ell - a * c)
}

/// Raw product of the edge matrices of a planar polygon, later sides on the
/// left. No degeneracy check.
pub fn monodromy_product(v: &Polygon, ell: f64) -> Result<Mobius2> {
    v.require_dim(2)?;
    let mut m = Matrix2::identity();
    for i in 0..v.len() {
        let side = v.side(i);
        let e = edge_mobius(ell, side.norm(), side.angle())?;
        m = e.m * m;
    }
    Mobius2::new(m)
}

/// Monodromy `M_{V, ell}` of a closed planar polygon based at `V_0`.
///
/// Fails with [`BicycleError::DegenerateMonodromy`] when `ell` coincides
/// with a side length (the determinant `prod (ell^2 - a_i^2)` vanishes).
pub fn polygon_monodromy(v: &Polygon, ell: f64) -> Result<Mobius2> {
    let m = monodromy_product(v, ell)?;
    let scale: f64 = v
        .side_lengths()
        .iter()
        .map(|a| ell * ell + a * a)
        .product();
    if m.det().abs() < DEFAULT_EPS_GEOM * scale {
        return Err(BicycleError::DegenerateMonodromy);
    }
    Ok(m)
}

/// Classifies a monodromy by the discriminant `Tr^2 - 4 det`.
pub fn classify(m: &Mobius2, tol: &Tolerance) -> MonodromyClass {
    if m.projective_distance(&Mobius2::identity()) <= tol.eps_class {
        return MonodromyClass::Identity;
    }
    let scale = m.matrix().amax();
    if m.det().abs() <= tol.eps_class * scale * scale {
        return MonodromyClass::Degenerate;
    }
    let t2 = m.trace().powi(2);
    let bound = tol.eps_class * t2.max(4.0 * m.det().abs());
    let disc = m.discriminant();
    if disc > bound {
        MonodromyClass::Hyperbolic
    } else if disc < -bound {
        MonodromyClass::Elliptic
    } else {
        MonodromyClass::Parabolic
    }
}

/// A fixed direction of the monodromy on the circle of directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedDirection {
    /// Direction angle in (-pi, pi].
    pub angle: f64,
    /// Derivative of the circle map at the fixed point (its multiplier).
    pub multiplier: f64,
}

impl FixedDirection {
    pub fn is_attracting(&self) -> bool {
        self.multiplier.abs() < 1.0
    }
}

/// Fixed-point set of a non-elliptic monodromy.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedSet {
    /// Every direction is fixed.
    Identity,
    /// Hyperbolic: two entries, attracting first. Parabolic: one entry.
    Points(Vec<FixedDirection>),
}

fn eigenvector(m: &Matrix2<f64>, mu: f64) -> Vector2<f64> {
    let c1 = Vector2::new(m[(0, 1)], mu - m[(0, 0)]);
    let c2 = Vector2::new(mu - m[(1, 1)], m[(1, 0)]);
    if c1.norm() >= c2.norm() {
        c1
    } else {
        c2
    }
}

/// Fixed directions of the projective action `x -> (m00 x + m01)/(m10 x + m11)`
/// with their multipliers. The multiplier at the fixed point belonging to
/// eigenvalue `mu` is `det / mu^2`, so the two multipliers of a hyperbolic
/// map are reciprocal.
pub fn fixed_directions(m: &Mobius2, tol: &Tolerance) -> Result<FixedSet> {
    match classify(m, tol) {
        MonodromyClass::Identity => Ok(FixedSet::Identity),
        MonodromyClass::Elliptic => Err(BicycleError::NoRealFixedPoint),
        MonodromyClass::Degenerate => Err(BicycleError::DegenerateMonodromy),
        MonodromyClass::Parabolic => {
            let mu = m.trace() / 2.0;
            let h = eigenvector(m.matrix(), mu);
            Ok(FixedSet::Points(vec![FixedDirection {
                angle: homogeneous_to_angle(&h),
                multiplier: 1.0,
            }]))
        }
        MonodromyClass::Hyperbolic => {
            let t = m.trace();
            let root = m.discriminant().sqrt();
            let big = 0.5 * (t + if t >= 0.0 { root } else { -root });
            let small = m.det() / big;
            let det = m.det();
            let mut points: Vec<FixedDirection> = [big, small]
                .iter()
                .map(|&mu| FixedDirection {
                    angle: homogeneous_to_angle(&eigenvector(m.matrix(), mu)),
                    multiplier: det / (mu * mu),
                })
                .collect();
            points.sort_by(|a, b| a.multiplier.abs().total_cmp(&b.multiplier.abs()));
            Ok(FixedSet::Points(points))
        }
    }
}

/// Coefficients `c_0 = 1, c_1, ..., c_k` of `Tr(M)/2 = l^k + c_1 l^{k-1} + ... + c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoly {
    pub coeffs: Vec<f64>,
}

impl TracePoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates `Tr(M_{V, ell}) / 2` by Horner's rule.
    pub fn eval(&self, ell: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * ell + c)
    }
}

/// Expands `prod (l E + a_i A(alpha_i))` as a matrix polynomial in `l` and
/// returns half the traces of its coefficients.
pub fn trace_polynomial(v: &Polygon) -> Result<TracePoly> {
    v.require_dim(2)?;
    let k = v.len();
    // by_degree[j] is the matrix coefficient of l^j
    let mut by_degree = vec![Matrix2::<f64>::zeros(); k + 1];
    by_degree[0] = Matrix2::identity();
    for i in 0..k {
        let side = v.side(i);
        let (a, phi) = (side.norm(), side.angle());
        let (s, c) = phi.sin_cos();
        let b = Matrix2::new(a * c, -a * s, -a * s, -a * c);
        let mut next = vec![Matrix2::<f64>::zeros(); k + 1];
        for j in 0..=i {
            next[j + 1] += by_degree[j];
            next[j] += b * by_degree[j];
        }
        by_degree = next;
    }
    let coeffs = (0..=k).map(|j| 0.5 * by_degree[k - j].trace()).collect();
    Ok(TracePoly { coeffs })
}

/// Direction of `V_2 W_2` from the unit direction `u` of `V_1 W_1`, the unit
/// direction `x` of the side `V_1 V_2`, its length `a` and the segment
/// length `ell`. Works in any dimension.
pub fn direction_step(u: &Vector, x: &Vector, a: f64, ell: f64) -> Result<Vector> {
    u.check_dim(x.dim())?;
    let xu = x.dot(u);
    let denom = ell * ell + a * a - 2.0 * a * ell * xu;
    if denom <= DEFAULT_EPS_GEOM * (ell * ell + a * a) {
        return Err(BicycleError::PoleAtEllEqualsA);
    }
    let num = u * (ell * ell - a * a) + x * (2.0 * a * a * xu - 2.0 * a * ell);
    Ok(num * (1.0 / denom))
}

/// A matrix of `O(n, 1)` with block structure `[[A, xi], [eta^t, lambda]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMatrix {
    m: DMatrix<f64>,
    n: usize,
}

impl LorentzMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n + 1, n + 1),
            n,
        }
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 3 {
            return Err(BicycleError::InvalidParameter(
                "Lorentz matrix must be square of size >= 3".into(),
            ));
        }
        let n = m.nrows() - 1;
        Ok(Self { m, n })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Spatial dimension `n`.
    pub fn space_dim(&self) -> usize {
        self.n
    }

    pub fn compose(&self, earlier: &LorentzMatrix) -> LorentzMatrix {
        assert_eq!(self.n, earlier.n, "dimension mismatch");
        LorentzMatrix {
            m: &self.m * &earlier.m,
            n: self.n,
        }
    }

    fn metric(n: usize) -> DMatrix<f64> {
        let mut g = DMatrix::identity(n + 1, n + 1);
        g[(n, n)] = -1.0;
        g
    }

    /// Largest entry of `M^t G M - G`, `G = diag(1, ..., 1, -1)`.
    pub fn metric_defect(&self) -> f64 {
        let g = Self::metric(self.n);
        (self.m.transpose() * &g * &self.m - g).amax()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }
}

/// Lorentz matrix of the transport along a side of length `a` with unit
/// direction `x`, for segment length `ell`.
pub fn edge_lorentz(ell: f64, a: f64, x: &Vector) -> Result<LorentzMatrix> {
    let q = ell * ell - a * a;
    if q.abs() <= DEFAULT_EPS_GEOM * (ell * ell + a * a) {
        return Err(BicycleError::PoleAtEllEqualsA);
    }
    let n = x.dim();
    let mut m = DMatrix::<f64>::identity(n + 1, n + 1);
    let s = 2.0 * a * a / q;
    let t = -2.0 * a * ell / q;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += s * x[i] * x[j];
        }
        m[(i, n)] = t * x[i];
        m[(n, i)] = t * x[i];
    }
    m[(n, n)] = (ell * ell + a * a) / q;
    Ok(LorentzMatrix { m, n })
}

/// Projective action `u -> (A u + xi) / (eta . u + lambda)` on unit vectors.
pub fn lorentz_action(m: &LorentzMatrix, u: &Vector) -> Result<Vector> {
    u.check_dim(m.n)?;
    let n = m.n;
    let mut h = DVector::<f64>::zeros(n + 1);
    for i in 0..n {
        h[i] = u[i];
    }
    h[n] = 1.0;
    let img = &m.m * h;
    let denom = img[n];
    if denom.abs() <= DEFAULT_EPS_GEOM * img.amax().max(f64::MIN_POSITIVE) {
        return Err(BicycleError::ProjectiveDenominatorZero);
    }
    Vector::new((0..n).map(|i| img[i] / denom).collect())
}

/// Monodromy `M_{V, ell}` in `O(n, 1)` of a closed polygon in any dimension.
pub fn polygon_lorentz_monodromy(v: &Polygon, ell: f64) -> Result<LorentzMatrix> {
    let mut acc = LorentzMatrix::identity(v.dim());
    for i in 0..v.len() {
        let side = v.side(i);
        let a = side.norm();
        let e = edge_lorentz(ell, a, &(&side * (1.0 / a)))?;
        acc = e.compose(&acc);
    }
    Ok(acc)
}
