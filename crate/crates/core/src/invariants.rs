//! Conserved quantities of the bicycle correspondence and of recutting, the
//! circumcenter of mass, the rear-track chain of circles, and the
//! eigenvalue formulas.

use serde::{Deserialize, Serialize};

use crate::dynamics::BicyclePair;
use crate::error::{BicycleError, Result};
use crate::geometry::{Polygon, Tolerance, Vector};

/// An antisymmetric 2-tensor stored by its upper triangle, row major:
/// `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bivector {
    dim: usize,
    components: Vec<f64>,
}

impl Bivector {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    fn slot(&self, p: usize, q: usize) -> usize {
        debug_assert!(p < q && q < self.dim);
        p * self.dim - p * (p + 1) / 2 + (q - p - 1)
    }

    /// Component `B_{pq}`; antisymmetric by construction.
    pub fn component(&self, p: usize, q: usize) -> f64 {
        use std::cmp::Ordering::*;
        match p.cmp(&q) {
            Equal => 0.0,
            Less => self.components[self.slot(p, q)],
            Greater => -self.components[self.slot(q, p)],
        }
    }

    /// The single component of a planar bivector.
    pub fn scalar(&self) -> f64 {
        self.components[0]
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &Bivector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `A(V) = sum V_i ∧ V_{i+1}`. In the plane this is `sum (x_i y_{i+1} - x_{i+1} y_i)`,
/// twice the signed shoelace area.
pub fn area_bivector(v: &Polygon) -> Bivector {
    let n = v.dim();
    let mut components = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in p + 1..n {
            let s = (0..v.len() as isize)
                .map(|i| {
                    let (a, b) = (v.vertex(i), v.vertex(i + 1));
                    a[p] * b[q] - a[q] * b[p]
                })
                .sum();
            components.push(s);
        }
    }
    Bivector { dim: n, components }
}

/// Signed area of a planar polygon (half the planar `A(V)`).
pub fn signed_area(v: &Polygon) -> Result<f64> {
    v.require_dim(2)?;
    Ok(area_bivector(v).scalar() / 2.0)
}

/// `J(V) = sum (|V_{i+1}|^2 - |V_{i-1}|^2) V_i`.
pub fn j_vector(v: &Polygon) -> Vector {
    (0..v.len() as isize).fold(Vector::zeros(v.dim()), |acc, i| {
        let w = v.vertex(i + 1).norm_sq() - v.vertex(i - 1).norm_sq();
        acc + v.vertex(i) * w
    })
}

/// The equivalent form `sum |V_i|^2 (V_{i-1} - V_{i+1})`.
pub fn j_vector_by_vertex_weights(v: &Polygon) -> Vector {
    (0..v.len() as isize).fold(Vector::zeros(v.dim()), |acc, i| {
        acc + (v.vertex(i - 1) - v.vertex(i + 1)) * v.vertex(i).norm_sq()
    })
}

/// Circumcenter of mass of a planar polygon, by the explicit cubic
/// coordinate sums divided by four times the signed area.
pub fn circumcenter_of_mass(v: &Polygon) -> Result<Vector> {
    v.require_dim(2)?;
    let area = signed_area(v)?;
    let scale = v.diameter();
    if area.abs() <= 1e-12 * scale * scale {
        return Err(BicycleError::ZeroArea);
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..v.len() as isize {
        let (a, b) = (v.vertex(i), v.vertex(i + 1));
        let (x0, y0, x1, y1) = (a.x(), a.y(), b.x(), b.y());
        sx += y0 * y0 * y1 - y0 * y1 * y1 + x0 * x0 * y1 - x1 * x1 * y0;
        sy += x0 * x1 * x1 - x0 * x0 * x1 + x0 * y1 * y1 - x1 * y0 * y0;
    }
    Ok(Vector::xy(sx, sy) * (1.0 / (4.0 * area)))
}

fn circumcenter(a: &Vector, b: &Vector, c: &Vector) -> Option<Vector> {
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * ab.cross2(&ac);
    let scale = ab.norm_sq().max(ac.norm_sq());
    if d.abs() <= 1e-14 * scale {
        return None;
    }
    let (p, q) = (ab.norm_sq(), ac.norm_sq());
    let off = Vector::xy(ac.y() * p - ab.y() * q, ab.x() * q - ac.x() * p) * (1.0 / d);
    Some(a + &off)
}

/// Area-weighted mean of the circumcenters of the fan triangulation from
/// vertex `apex`. Collinear fan triangles carry zero weight and are skipped.
pub fn ccm_triangulation_oracle(v: &Polygon, apex: usize) -> Result<Vector> {
    v.require_dim(2)?;
    let k = v.len() as isize;
    let o = v.vertex(apex as isize);
    let mut total = 0.0;
    let mut acc = Vector::zeros(2);
    for j in 1..k - 1 {
        let (b, c) = (v.vertex(apex as isize + j), v.vertex(apex as isize + j + 1));
        let weight = 0.5 * (b - o).cross2(&(c - o));
        if let Some(center) = circumcenter(o, b, c) {
            acc = acc + center * weight;
            total += weight;
        }
    }
    let scale = v.diameter();
    if total.abs() <= 1e-12 * scale * scale {
        return Err(BicycleError::ZeroArea);
    }
    Ok(acc * (1.0 / total))
}

/// Center of one member of the rear-track chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChainCenter {
    Finite(Vector),
    /// A straight line; the payload is its unit direction.
    AtInfinity(Vector),
}

/// One circle (or line) of the rear-track chain, stored by signed curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCircle {
    pub center: ChainCenter,
    /// `1 / r`; zero for lines.
    pub curvature: f64,
}

impl ChainCircle {
    /// Signed radius; infinite for lines.
    pub fn radius(&self) -> f64 {
        if self.curvature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.curvature
        }
    }

    pub fn finite_center(&self) -> Option<&Vector> {
        match &self.center {
            ChainCenter::Finite(p) => Some(p),
            ChainCenter::AtInfinity(_) => None,
        }
    }
}

/// The discrete rear track of a bicycle pair.
///
/// `circles[i]` is the circle with half-integer index `i + 1/2`, centered
/// at the intersection `P_{i+1/2}` of the lines `V_i W_i` and
/// `V_{i+1} W_{i+1}`; `q[i]` is the tangency point `Q_i`, the midpoint of
/// `V_i W_i`, and `axes[i]` the unit vector `e_i = (V_i - W_i) / L`.
///
/// Radii are signed along the axes: `P_{i+1/2} = Q_i + r e_i = Q_{i+1} - r e_{i+1}`,
/// so `V_i = Q_i + ell e_i` and `W_i = Q_i - ell e_i` with `ell = L / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearTrack {
    pub circles: Vec<ChainCircle>,
    pub q: Vec<Vector>,
    pub axes: Vec<Vector>,
}

impl RearTrack {
    pub fn radii(&self) -> Vec<f64> {
        self.circles.iter().map(ChainCircle::radius).collect()
    }

    /// Number of interior tangencies (adjacent finite radii of opposite sign).
    pub fn interior_tangencies(&self) -> usize {
        let r = self.radii();
        let k = r.len();
        (0..k)
            .filter(|&i| {
                let (a, b) = (r[(i + k - 1) % k], r[i]);
                a.is_finite() && b.is_finite() && a * b < 0.0
            })
            .count()
    }

    /// Largest violation of `|P_{i-1/2} - P_{i+1/2}| = |r_{i-1/2} + r_{i+1/2}|`
    /// over pairs of finite circles.
    pub fn tangency_defect(&self) -> f64 {
        let k = self.circles.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            let (prev, next) = (&self.circles[(i + k - 1) % k], &self.circles[i]);
            if let (Some(p), Some(q)) = (prev.finite_center(), next.finite_center()) {
                let want = (prev.radius() + next.radius()).abs();
                worst = worst.max((p.dist(q) - want).abs());
            }
        }
        worst
    }

    /// Largest distance from a tangency point to the two circles through it.
    pub fn incidence_defect(&self) -> f64 {
        let k = self.circles.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for c in [&self.circles[(i + k - 1) % k], &self.circles[i]] {
                if let Some(p) = c.finite_center() {
                    worst = worst.max((p.dist(&self.q[i]) - c.radius().abs()).abs());
                }
            }
        }
        worst
    }

    /// Points `((r_{i+1/2} - ell) P_{i-1/2} + (r_{i-1/2} + ell) P_{i+1/2}) / (r_{i-1/2} + r_{i+1/2})`:
    /// `V` for `ell = L/2`, `W` for `ell = -L/2`. Falls back to the
    /// tangency point and axis where a neighbouring member is a line.
    pub fn reconstruct(&self, ell: f64) -> Vec<Vector> {
        let k = self.circles.len();
        (0..k)
            .map(|i| {
                let (prev, next) = (&self.circles[(i + k - 1) % k], &self.circles[i]);
                match (prev.finite_center(), next.finite_center()) {
                    (Some(pm), Some(pp)) if (prev.radius() + next.radius()).abs() > 0.0 => {
                        let (rm, rp) = (prev.radius(), next.radius());
                        (pm * (rp - ell) + pp * (rm + ell)) * (1.0 / (rm + rp))
                    }
                    _ => &self.q[i] + &(&self.axes[i] * ell),
                }
            })
            .collect()
    }
}

/// Builds the rear-track chain of a planar bicycle pair.
///
/// Fails with [`BicycleError::SignAssignmentFailure`] when the radius read
/// off at `Q_i` disagrees with the one read off at `Q_{i+1}`, or when the
/// tangency types do not admit a consistent orientation.
pub fn rear_track(pair: &BicyclePair, tol: &Tolerance) -> Result<RearTrack> {
    let (v, w) = (&pair.v, &pair.w);
    let k = v.len();
    let length = pair.length;
    let q: Vec<Vector> = (0..k as isize)
        .map(|i| (v.vertex(i) + w.vertex(i)) * 0.5)
        .collect();
    let axes: Vec<Vector> = (0..k as isize)
        .map(|i| (v.vertex(i) - w.vertex(i)) * (1.0 / length))
        .collect();
    let scale = v.diameter().max(length);

    let mut circles = Vec::with_capacity(k);
    for i in 0..k {
        let j = (i + 1) % k;
        let (qi, qj, ei, ej) = (&q[i], &q[j], &axes[i], &axes[j]);
        let cross = ei.cross2(ej);
        let d = qj - qi;
        if cross.abs() <= tol.eps_geom {
            // parallel axes: the chain member is a straight line
            let dir = d.normalized();
            circles.push(ChainCircle {
                center: ChainCenter::AtInfinity(if d.norm() > 0.0 { dir } else { ei.perp() }),
                curvature: 0.0,
            });
            continue;
        }
        // Q_i + s e_i = Q_j + t e_j
        let s = d.cross2(ej) / cross;
        let t = d.cross2(ei) / cross;
        if (s + t).abs() > tol.eps_geom.sqrt() * scale.max(s.abs()) {
            return Err(BicycleError::SignAssignmentFailure);
        }
        let center = qi + &(ei * s);
        let curvature = if s == 0.0 { f64::INFINITY } else { 1.0 / s };
        circles.push(ChainCircle {
            center: ChainCenter::Finite(center),
            curvature,
        });
    }
    let track = RearTrack { circles, q, axes };
    check_orientation(&track, tol)?;
    Ok(track)
}

/// Assigns signs from tangency types alone, starting from the sign of the
/// first finite radius, and checks that the result agrees with the signed
/// radii of the track and closes up around the cycle.
fn check_orientation(track: &RearTrack, tol: &Tolerance) -> Result<()> {
    let k = track.circles.len();
    let radii = track.radii();
    let usable = |r: f64| r.is_finite() && r.abs() > tol.eps_geom;
    let Some(start) = (0..k).find(|&i| usable(radii[i])) else {
        return Ok(());
    };
    let mut sign = radii[start].signum();
    let mut prev = start;
    for step in 1..=k {
        let i = (start + step) % k;
        if !usable(radii[i]) {
            continue;
        }
        // contiguous finite members meet at Q_{prev+1}: decide the type there
        if (prev + 1) % k == i {
            let (Some(pa), Some(pb)) = (track.circles[prev].finite_center(), track.circles[i].finite_center()) else {
                unreachable!()
            };
            let qpt = &track.q[i];
            let interior = (pa - qpt).dot(&(pb - qpt)) > 0.0;
            if interior {
                sign = -sign;
            }
        } else {
            sign = radii[i].signum();
        }
        if sign != radii[i].signum() {
            return Err(BicycleError::SignAssignmentFailure);
        }
        prev = i;
    }
    if !track.interior_tangencies().is_multiple_of(2) {
        return Err(BicycleError::SignAssignmentFailure);
    }
    Ok(())
}

/// The two eigenvalue expressions of a planar bicycle pair:
/// `prod |V_{i-1} W_i| / prod |V_i W_{i-1}|` and the chain product
/// `prod |ell - r_j| / prod |ell + r_j|`, `ell = L/2`, with radii signed as
/// in [`RearTrack`] (the homothety at `P_{i+1/2}` maps `V_{i+1} W_i` onto
/// `V_i W_{i+1}` with ratio `|ell - r| / |ell + r|`).
pub fn eigenvalue_products(pair: &BicyclePair, track: &RearTrack, tol: &Tolerance) -> Result<(f64, f64)> {
    let (v, w) = (&pair.v, &pair.w);
    let k = v.len() as isize;
    let mut lambda_vw = 1.0;
    for i in 0..k {
        lambda_vw *= v.vertex(i - 1).dist(w.vertex(i)) / v.vertex(i).dist(w.vertex(i - 1));
    }
    let ell = pair.half_length();
    let mut lambda_chain = 1.0;
    for r in track.radii() {
        if !r.is_finite() {
            continue;
        }
        if (ell - r).abs() < tol.eps_geom * ell || (ell + r).abs() < tol.eps_geom * ell {
            return Err(BicycleError::PoleOnChain);
        }
        lambda_chain *= (ell - r).abs() / (ell + r).abs();
    }
    Ok((lambda_vw, lambda_chain))
}
