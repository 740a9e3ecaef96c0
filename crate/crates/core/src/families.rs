//! Families with closed-form dynamics: cyclic polygons, alternating
//! concentric 2k-gons, quadrilaterals, and bicycle (n, k)-gons.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{transform, Branch};
use crate::error::{BicycleError, Result};
use crate::geometry::{
    butterfly_residual, is_darboux_butterfly, Polygon, Tolerance, Vector,
};
use crate::mobius::MonodromyClass;

fn circle_through(a: &Vector, b: &Vector, c: &Vector) -> Option<(Vector, f64)> {
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * ab.cross2(&ac);
    if d.abs() <= 1e-14 * ab.norm_sq().max(ac.norm_sq()) {
        return None;
    }
    let (p, q) = (ab.norm_sq(), ac.norm_sq());
    let off = Vector::xy(ac.y() * p - ab.y() * q, ab.x() * q - ac.x() * p) * (1.0 / d);
    let r = off.norm();
    Some((a + &off, r))
}

/// Classifies a value against a boundary with a relative parabolic band.
fn band(x: f64, boundary: f64, eps: f64) -> std::cmp::Ordering {
    if (x - boundary).abs() <= eps * boundary.max(f64::MIN_POSITIVE) {
        std::cmp::Ordering::Equal
    } else {
        x.partial_cmp(&boundary).unwrap()
    }
}

/// Outcome of [`classify_cyclic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicClassification {
    pub is_cyclic_convex: bool,
    /// Circumcenter, when the polygon is convex cyclic.
    pub center: Option<Vector>,
    /// Circumdiameter `d`; zero when the polygon is not convex cyclic.
    pub diameter: f64,
}

impl CyclicClassification {
    /// Hyperbolic on `(0, d)`, parabolic at `d`, elliptic beyond. `None` for
    /// non-cyclic input or `L <= eps_geom`.
    pub fn regime(&self, length: f64, tol: &Tolerance) -> Option<MonodromyClass> {
        use std::cmp::Ordering::*;
        if !self.is_cyclic_convex || length <= tol.eps_geom {
            return None;
        }
        Some(match band(length, self.diameter, tol.eps_class) {
            Less => MonodromyClass::Hyperbolic,
            Equal => MonodromyClass::Parabolic,
            Greater => MonodromyClass::Elliptic,
        })
    }
}

/// Whether the planar polygon is strictly convex (consistent turning and
/// total turning of one full revolution).
pub fn is_convex(v: &Polygon) -> bool {
    if v.dim() != 2 {
        return false;
    }
    let k = v.len();
    let mut sign = 0.0;
    let mut turning = 0.0;
    for i in 0..k {
        let (a, b) = (v.side(i), v.side((i + 1) % k));
        let c = a.cross2(&b);
        if c == 0.0 || (sign != 0.0 && c.signum() != sign) {
            return false;
        }
        sign = c.signum();
        turning += a.cross2(&b).atan2(a.dot(&b));
    }
    (turning.abs() - 2.0 * PI).abs() < 1e-6
}

/// Detects convex cyclic polygons: fits the circle through `V_0, V_1, V_2`
/// and checks the remaining vertices against it.
pub fn classify_cyclic(v: &Polygon, tol: &Tolerance) -> CyclicClassification {
    let not = CyclicClassification {
        is_cyclic_convex: false,
        center: None,
        diameter: 0.0,
    };
    if v.dim() != 2 || !is_convex(v) {
        return not;
    }
    let Some((center, r)) = circle_through(v.vertex(0), v.vertex(1), v.vertex(2)) else {
        return not;
    };
    if v.vertices().iter().any(|p| (p.dist(&center) - r).abs() > tol.eps_geom * r) {
        return not;
    }
    CyclicClassification {
        is_cyclic_convex: true,
        center: Some(center),
        diameter: 2.0 * r,
    }
}

/// The rotation about the circumcenter by `2 arcsin(L / d)`, counterclockwise.
/// The clockwise rotation is the other companion.
pub fn rotation_transform(v: &Polygon, length: f64, tol: &Tolerance) -> Result<Polygon> {
    v.require_dim(2)?;
    let c = classify_cyclic(v, tol);
    let Some(center) = c.center else {
        return Err(BicycleError::InvalidPolygon("not convex cyclic".into()));
    };
    if length <= 0.0 {
        return Err(BicycleError::InvalidParameter(format!("length must be positive, got {length}")));
    }
    if length > c.diameter * (1.0 + tol.eps_geom) {
        return Err(BicycleError::ChordTooLong {
            chord: length,
            diameter: c.diameter,
        });
    }
    let theta = 2.0 * (length / c.diameter).min(1.0).asin();
    Polygon::new(v.vertices().iter().map(|p| p.rotate_about(&center, theta)).collect())
}

/// Center and radii `(r_even, r_odd)` of a polygon whose even and odd
/// vertices lie on two concentric circles.
pub fn concentric_fit(v: &Polygon, tol: &Tolerance) -> Result<(Vector, f64, f64)> {
    v.require_dim(2)?;
    let k = v.len();
    if !k.is_multiple_of(2) || k < 4 {
        return Err(BicycleError::NotConcentricAlternating);
    }
    let center = if k >= 6 {
        circle_through(v.vertex(0), v.vertex(2), v.vertex(4)).map(|(c, _)| c)
    } else {
        // perpendicular bisectors of the diagonals V0V2 and V1V3
        let (a, b, c, d) = (v.vertex(0), v.vertex(1), v.vertex(2), v.vertex(3));
        bisector_intersection(a, c, b, d)
    };
    let center = center.ok_or(BicycleError::NotConcentricAlternating)?;
    let r_even = v.vertex(0).dist(&center);
    let r_odd = v.vertex(1).dist(&center);
    let scale = r_even.max(r_odd);
    for (i, p) in v.vertices().iter().enumerate() {
        let r = if i % 2 == 0 { r_even } else { r_odd };
        if (p.dist(&center) - r).abs() > tol.eps_geom * scale {
            return Err(BicycleError::NotConcentricAlternating);
        }
    }
    Ok((center, r_even, r_odd))
}

fn bisector_intersection(a: &Vector, c: &Vector, b: &Vector, d: &Vector) -> Option<Vector> {
    let (m1, m2) = ((a + c) * 0.5, (b + d) * 0.5);
    let (u1, u2) = ((c - a).perp(), (d - b).perp());
    let den = u1.cross2(&u2);
    if den.abs() <= 1e-12 * u1.norm() * u2.norm() {
        return None;
    }
    let s = (&m2 - &m1).cross2(&u2) / den;
    Some(&m1 + &(&u1 * s))
}

/// Companion of an alternating concentric 2k-gon: `W_0` sits at polar
/// angle `w1_angle` about the common center, every `W_i` is `V_i` turned by
/// the same angle, and the radii are swapped.
///
/// Applying this twice with the same turn is the rotation by twice the turn.
pub fn concentric_transform(v: &Polygon, w1_angle: f64, tol: &Tolerance) -> Result<Polygon> {
    let (center, r_even, r_odd) = concentric_fit(v, tol)?;
    let turn = w1_angle - (v.vertex(0) - &center).angle();
    let w = v
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let r = if i % 2 == 0 { r_odd } else { r_even };
            let phi = (p - &center).angle() + turn;
            &center + &(Vector::polar(phi) * r)
        })
        .collect();
    Polygon::new(w)
}

/// The three kinds of quadrilateral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QuadKind {
    /// `A, C` on the circle of radius `r1`, `B, D` on radius `r2`, or the
    /// other way round; always `r1 >= r2`.
    GenericConcentric { center: Vector, r1: f64, r2: f64 },
    /// Diagonals parallel to `direction`, at distance `gap`.
    ParallelDiagonals { direction: Vector, gap: f64 },
    Butterfly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadClassification {
    pub kind: QuadKind,
}

impl QuadClassification {
    /// Elliptic on `(0, r1 - r2)` and beyond `r1 + r2`, hyperbolic in
    /// between, parabolic on the boundaries; a parallel-diagonal
    /// quadrilateral behaves like `r1 - r2 = gap`, `r1 + r2 = inf`.
    /// `None` for `L <= eps_geom`.
    pub fn regime(&self, length: f64, tol: &Tolerance) -> Option<MonodromyClass> {
        use std::cmp::Ordering::*;
        use MonodromyClass::*;
        if length <= tol.eps_geom {
            return None;
        }
        let (lo, hi) = match &self.kind {
            QuadKind::Butterfly => return Some(Identity),
            QuadKind::GenericConcentric { r1, r2, .. } => (r1 - r2, r1 + r2),
            QuadKind::ParallelDiagonals { gap, .. } => (*gap, f64::INFINITY),
        };
        Some(match (band(length, lo, tol.eps_class), band(length, hi, tol.eps_class)) {
            (Equal, _) if lo > tol.eps_geom => Parabolic,
            (_, Equal) => Parabolic,
            (Less, _) => Elliptic,
            (_, Greater) => Elliptic,
            _ => Hyperbolic,
        })
    }

    /// The regime boundaries in `L` (parabolic values), ascending.
    pub fn boundaries(&self) -> Vec<f64> {
        match &self.kind {
            QuadKind::Butterfly => vec![],
            QuadKind::GenericConcentric { r1, r2, .. } => {
                if r1 - r2 > 0.0 {
                    vec![r1 - r2, r1 + r2]
                } else {
                    vec![r1 + r2]
                }
            }
            QuadKind::ParallelDiagonals { gap, .. } => vec![*gap],
        }
    }
}

/// Classifies a planar quadrilateral `ABCD` by its circumcenter of mass `O`,
/// the intersection of the perpendicular bisectors of `AC` and `BD`.
pub fn classify_quadrilateral(q: &Polygon, tol: &Tolerance) -> Result<QuadClassification> {
    q.require_dim(2)?;
    if is_darboux_butterfly(q, tol)? {
        return Ok(QuadClassification {
            kind: QuadKind::Butterfly,
        });
    }
    let (a, b, c, d) = (q.vertex(0), q.vertex(1), q.vertex(2), q.vertex(3));
    let kind = match bisector_intersection(a, c, b, d) {
        Some(center) => {
            let (ra, rb) = (center.dist(a), center.dist(b));
            QuadKind::GenericConcentric {
                center,
                r1: ra.max(rb),
                r2: ra.min(rb),
            }
        }
        None => {
            let direction = (c - a).normalized();
            let gap = (b - a).cross2(&direction).abs();
            QuadKind::ParallelDiagonals { direction, gap }
        }
    };
    Ok(QuadClassification { kind })
}

/// Iterates `T_L`, each time taking the fixed direction whose companion is
/// not the previous polygon (so the orbit never steps back). Returns
/// `V, T(V), T^2(V), ...` with `steps + 1` entries.
pub fn transform_orbit(v: &Polygon, length: f64, steps: usize, tol: &Tolerance) -> Result<Vec<Polygon>> {
    let mut orbit = vec![v.clone()];
    for _ in 0..steps {
        let current = orbit.last().unwrap();
        let scale = current.perimeter();
        let a = transform(current, length, Branch::Attracting, tol)?.polygon;
        let next = match orbit.len() {
            1 => a,
            n => {
                let prev = &orbit[n - 2];
                if a.max_vertex_distance(prev) > 1e-6 * scale {
                    a
                } else {
                    transform(current, length, Branch::Repelling, tol)?.polygon
                }
            }
        };
        orbit.push(next);
    }
    Ok(orbit)
}

/// Parameters of the alternating two-circle (n, k)-gons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGonSpec {
    pub n: usize,
    pub k: usize,
    pub r1: f64,
    pub r2: f64,
    pub phase: f64,
}

impl NGonSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BicycleError::InvalidParameter(m));
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and at least 4, got {}", self.n));
        }
        if self.k.is_multiple_of(2) || self.k < 1 || 2 * self.k >= self.n {
            return bad(format!("k must be odd with 1 <= k < n/2, got {}", self.k));
        }
        if !(self.r1 > 0.0 && self.r2 > 0.0 && self.r1.is_finite() && self.r2.is_finite()) {
            return bad("radii must be positive".into());
        }
        if !self.phase.is_finite() {
            return bad("phase must be finite".into());
        }
        Ok(())
    }
}

/// Vertices at angles `phase + 2 pi i / n`, on radius `r1` for even `i` and
/// `r2` for odd `i`.
pub fn ngon_construct(spec: &NGonSpec) -> Result<Polygon> {
    spec.validate()?;
    let n = spec.n;
    Polygon::new(
        (0..n)
            .map(|i| {
                let r = if i % 2 == 0 { spec.r1 } else { spec.r2 };
                Vector::polar(spec.phase + 2.0 * PI * i as f64 / n as f64) * r
            })
            .collect(),
    )
}

/// Defects of the (n, k)-gon conditions, all relative to the polygon's
/// diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGonResiduals {
    pub sides: f64,
    pub diagonals: f64,
    pub butterflies: f64,
    /// Index `i` of the worst quadrilateral `V_i V_{i+1} V_{i+k+1} V_{i+k}`.
    pub worst_index: usize,
}

impl NGonResiduals {
    pub fn max(&self) -> f64 {
        self.sides.max(self.diagonals).max(self.butterflies)
    }
}

pub fn ngon_residuals(v: &Polygon, k: usize) -> Result<NGonResiduals> {
    v.require_dim(2)?;
    let n = v.len();
    if k == 0 || 2 * k >= n {
        return Err(BicycleError::InvalidParameter(format!("need 1 <= k < {}/2, got {k}", n)));
    }
    let scale = v.diameter();
    let spread = |xs: Vec<f64>| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / scale
    };
    let sides = spread(v.side_lengths());
    let kk = k as isize;
    let diagonals = spread((0..n as isize).map(|i| v.vertex(i).dist(v.vertex(i + kk))).collect());
    let mut butterflies: f64 = 0.0;
    let mut worst_index = 0;
    for i in 0..n as isize {
        let r = butterfly_residual(v.vertex(i), v.vertex(i + 1), v.vertex(i + kk + 1), v.vertex(i + kk))
            .unwrap_or(f64::INFINITY)
            / scale;
        if r > butterflies {
            butterflies = r;
            worst_index = i as usize;
        }
    }
    Ok(NGonResiduals {
        sides,
        diagonals,
        butterflies,
        worst_index,
    })
}

/// Whether `v` is a bicycle (n, k)-gon: equilateral, equal k-diagonals, and
/// every `V_i V_{i+1} V_{i+k+1} V_{i+k}` a Darboux butterfly.
pub fn ngon_verify(v: &Polygon, k: usize, tol: &Tolerance) -> bool {
    ngon_residuals(v, k).is_ok_and(|r| r.max() <= tol.eps_geom)
}

/// Summary of a rigidity search over bicycle (4k, k)-gons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidReport {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    /// Trials whose search reached a verified (4k, k)-gon.
    pub verified: usize,
    /// Verified instances that are not regular (even k) or not in the
    /// alternating two-circle family (odd k).
    pub violations: usize,
    /// Verified instances that are not regular, whatever the parity of k.
    pub non_regular: usize,
    /// Largest [`regularity_defect`] among verified instances.
    pub max_regularity_defect: f64,
    /// Largest non-congruence between consecutive rhombi
    /// `V_j V_{j+k} V_{j+2k} V_{j+3k}` over verified instances.
    pub max_rhombus_defect: f64,
}

impl RigidReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Residual vector of the (n, k)-gon conditions, for Gauss–Newton.
fn ngon_system(x: &DVector<f64>, n: usize, k: usize) -> DVector<f64> {
    let p = |i: usize| Vector::xy(x[2 * (i % n)], x[2 * (i % n) + 1]);
    let s0 = p(0).dist(&p(1));
    let d0 = p(0).dist(&p(k));
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        out.push(p(i).dist(&p(i + 1)) - s0);
        out.push(p(i).dist(&p(i + k)) - d0);
        let (a, b, c, d) = (p(i), p(i + 1), p(i + k + 1), p(i + k));
        let nrm = &c - &a;
        let mid = (&a + &c) * 0.5;
        let t = 2.0 * (&b - &mid).dot(&nrm) / nrm.norm_sq().max(1e-300);
        let mirrored = &b - &(&nrm * t);
        let e = &mirrored - &d;
        out.push(e.x());
        out.push(e.y());
    }
    DVector::from_vec(out)
}

fn gauss_newton(mut x: DVector<f64>, n: usize, k: usize) -> DVector<f64> {
    let h = 1e-7;
    for _ in 0..60 {
        let r = ngon_system(&x, n, k);
        if r.norm() < 1e-14 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), x.len());
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (ngon_system(&xp, n, k) - ngon_system(&xm, n, k)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&(-&r), 1e-9) else {
            break;
        };
        x += step;
    }
    x
}

fn angular_profile(v: &Polygon) -> (Vector, Vec<f64>, Vec<f64>) {
    let c = v.centroid();
    let radii = v.vertices().iter().map(|p| p.dist(&c)).collect();
    let angles = v.vertices().iter().map(|p| (p - &c).angle()).collect();
    (c, radii, angles)
}

/// Deviation of the polar angle gaps from a common gap `2 pi m / n`
/// (regular star polygons included).
fn spacing_defect(angles: &[f64]) -> f64 {
    use crate::mobius::wrap_angle;
    let n = angles.len();
    let step = 2.0 * PI / n as f64;
    let first = wrap_angle(angles[1] - angles[0]);
    let common = (first / step).round() * step;
    (0..n)
        .map(|i| (wrap_angle(angles[(i + 1) % n] - angles[i] - common)).abs())
        .fold(0.0, f64::max)
}

/// Distance from regularity: the larger of the relative spread of the
/// radii about the centroid and the deviation of the polar angle gaps from
/// a common multiple of `2 pi / n`.
pub fn regularity_defect(v: &Polygon) -> f64 {
    let (_, radii, angles) = angular_profile(v);
    let r0 = radii[0];
    let radial = radii.iter().map(|r| (r - r0).abs() / r0).fold(0.0, f64::max);
    radial.max(spacing_defect(&angles))
}

/// Regular (convex or star) up to similarity: equal radii about the
/// centroid and equal polar angle gaps.
pub fn is_regular(v: &Polygon, eps: f64) -> bool {
    regularity_defect(v) <= eps
}

/// Alternating two-circle polygon: even and odd vertices on two concentric
/// circles, polar angles equally spaced.
pub fn in_two_circle_family(v: &Polygon, eps: f64) -> bool {
    let (_, radii, angles) = angular_profile(v);
    let (re, ro) = (radii[0], radii[1]);
    let scale = re.max(ro);
    radii
        .iter()
        .enumerate()
        .all(|(i, r)| (r - if i % 2 == 0 { re } else { ro }).abs() <= eps * scale)
        && spacing_defect(&angles) <= eps
}

fn rhombus_defect(v: &Polygon, k: usize) -> f64 {
    let shape = |j: usize| {
        let p = |m: usize| v.vertex((j + m * k) as isize);
        let mut sides: Vec<f64> = (0..4).map(|m| p(m).dist(p(m + 1))).collect();
        sides.sort_by(f64::total_cmp);
        let mut diag = [p(0).dist(p(2)), p(1).dist(p(3))];
        diag.sort_by(f64::total_cmp);
        sides.extend(diag);
        sides
    };
    let scale = v.diameter();
    (0..k)
        .map(|j| {
            shape(j)
                .iter()
                .zip(shape(j + 1))
                .map(|(a, b)| (a - b).abs() / scale)
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Random search for bicycle (4k, k)-gons near the regular 4k-gon.
///
/// Each trial perturbs the regular polygon, projects back onto the solution
/// set by Gauss–Newton, and inspects the result if it verifies with relative
/// residual at most `1e-7`. Trials run in parallel, each with its own
/// deterministic generator derived from `seed`.
pub fn rigid_check(k: usize, trials: usize, seed: u64) -> Result<RigidReport> {
    if k == 0 {
        return Err(BicycleError::InvalidParameter("k must be at least 1".into()));
    }
    let n = 4 * k;
    let base: Vec<f64> = (0..n)
        .flat_map(|i| {
            let p = Vector::polar(2.0 * PI * i as f64 / n as f64);
            [p.x(), p.y()]
        })
        .collect();

    struct Outcome {
        verified: bool,
        violation: bool,
        non_regular: bool,
        regularity: f64,
        rhombus: f64,
    }
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let sigma = 10f64.powf(rng.random_range(-3.0..-1.0));
            let x0 = DVector::from_iterator(
                2 * n,
                base.iter().map(|c| c + sigma * rng.random_range(-1.0..1.0)),
            );
            let x = gauss_newton(x0, n, k);
            let none = Outcome {
                verified: false,
                violation: false,
                non_regular: false,
                regularity: 0.0,
                rhombus: 0.0,
            };
            let Ok(poly) = Polygon::new((0..n).map(|i| Vector::xy(x[2 * i], x[2 * i + 1])).collect()) else {
                return none;
            };
            match ngon_residuals(&poly, k) {
                Ok(r) if r.max() <= 1e-7 => {}
                _ => return none,
            }
            let regularity = regularity_defect(&poly);
            let regular = regularity <= 1e-6;
            let violation = if k.is_multiple_of(2) {
                !regular
            } else {
                !in_two_circle_family(&poly, 1e-6)
            };
            Outcome {
                verified: true,
                violation,
                non_regular: !regular,
                regularity,
                rhombus: rhombus_defect(&poly, k),
            }
        })
        .collect();

    Ok(RigidReport {
        k,
        n,
        trials,
        verified: outcomes.iter().filter(|o| o.verified).count(),
        violations: outcomes.iter().filter(|o| o.violation).count(),
        non_regular: outcomes.iter().filter(|o| o.non_regular).count(),
        max_regularity_defect: outcomes.iter().map(|o| o.regularity).fold(0.0, f64::max),
        max_rhombus_defect: outcomes.iter().map(|o| o.rhombus).fold(0.0, f64::max),
    })
}
