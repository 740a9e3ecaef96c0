//! Propagation around a closed polygon, the induced map `T_L`, recutting,
//! Bianchi permutability and the angle difference equation.
//!
//! Length convention: the API parameter `length` (written `L`) is always
//! the common length `|V_i W_i|`. The monodromy formulas use `ell = L`; the
//! angle difference equation is written with `2 ell = L`.

use serde::{Deserialize, Serialize};

use crate::error::{BicycleError, Result};
use crate::geometry::{
    bicycle_step, gram_determinant, oriented_angle, perp_bisector_reflect_tol,
    points_form_butterfly, Polygon, Tolerance, Vector,
};
use crate::mobius::{
    classify, fixed_directions, lorentz_action, polygon_lorentz_monodromy, polygon_monodromy,
    wrap_angle, FixedSet, MonodromyClass,
};

/// Which fixed direction of a hyperbolic monodromy seeds the companion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Attracting,
    Repelling,
}

/// Result of transporting a seed segment once around a closed polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// `W_0, ..., W_k`; `W_k` is the transported seed.
    pub w: Vec<Vector>,
    /// `|W_k - W_0|`.
    pub closure_defect: f64,
}

impl PropagationResult {
    /// The first `k` points as a polygon (meaningful when the defect is small).
    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::new(self.w[..self.w.len() - 1].to_vec())
    }
}

/// Applies the bicycle step along every side of `v`, starting from the seed
/// segment `V_0 w1`.
pub fn propagate(v: &Polygon, w1: &Vector, tol: &Tolerance) -> Result<PropagationResult> {
    w1.check_dim(v.dim())?;
    let k = v.len();
    let mut w = Vec::with_capacity(k + 1);
    w.push(w1.clone());
    for i in 0..k {
        let next = bicycle_step(v.vertex(i as isize), v.vertex(i as isize + 1), &w[i], tol)?;
        w.push(next);
    }
    let closure_defect = w[k].dist(&w[0]);
    Ok(PropagationResult { w, closure_defect })
}

/// A closed companion polygon together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation {
    pub polygon: Polygon,
    pub length: f64,
    pub class: MonodromyClass,
    /// Direction of the seed segment `V_0 W_0`.
    pub seed_angle: f64,
    /// Multiplier of the monodromy at the seed direction (1 for parabolic
    /// or identity monodromy).
    pub multiplier: f64,
    pub closure_defect: f64,
}

fn closure_bound(v: &Polygon, length: f64, tol: &Tolerance) -> f64 {
    tol.eps_geom * (v.perimeter() + length)
}

fn seed_point(v: &Polygon, length: f64, angle: f64) -> Vector {
    v.vertex(0) + &(Vector::polar(angle) * length)
}

/// Propagates from the seed direction `angle` and requires closure.
pub fn transform_from_angle(
    v: &Polygon,
    length: f64,
    angle: f64,
    tol: &Tolerance,
) -> Result<Transformation> {
    v.require_dim(2)?;
    let m = polygon_monodromy(v, length)?;
    let class = classify(&m, tol);
    let run = propagate(v, &seed_point(v, length, angle), tol)?;
    if run.closure_defect > closure_bound(v, length, tol) {
        return Err(BicycleError::ClosureFailure {
            defect: run.closure_defect,
        });
    }
    Ok(Transformation {
        polygon: run.polygon()?,
        length,
        class,
        seed_angle: angle,
        multiplier: 1.0,
        closure_defect: run.closure_defect,
    })
}

/// Sharpens a fixed direction by Newton's method on the geometric closure
/// map `angle -> direction of V_0 W_k`. The fixed point read off the matrix
/// product loses accuracy near parabolic monodromy and at large multipliers.
fn refine_seed(v: &Polygon, length: f64, angle: f64, tol: &Tolerance) -> Result<(f64, PropagationResult)> {
    let k = v.len();
    let gap = |a: f64| -> Result<(f64, PropagationResult)> {
        let run = propagate(v, &seed_point(v, length, a), tol)?;
        let g = wrap_angle((&run.w[k] - v.vertex(0)).angle() - a);
        Ok((g, run))
    };
    let (mut a, (mut g, mut best)) = (angle, gap(angle)?);
    let h = 1e-7;
    for _ in 0..8 {
        if best.closure_defect <= f64::EPSILON * (v.perimeter() + length) {
            break;
        }
        let slope = (gap(a + h)?.0 - gap(a - h)?.0) / (2.0 * h);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let next = a - g / slope;
        let (g_next, run) = gap(next)?;
        if run.closure_defect >= best.closure_defect {
            break;
        }
        (a, g, best) = (next, g_next, run);
    }
    Ok((a, best))
}

/// The discrete bicycle transformation `T_L` of a planar polygon: the
/// closed companion seeded at a fixed direction of `M_{V, L}`.
///
/// A parabolic monodromy has a single fixed direction, used for both
/// branches. The identity monodromy has no preferred seed and is reported
/// as [`BicycleError::IdentityMonodromy`]; use [`transform_from_angle`].
pub fn transform(v: &Polygon, length: f64, branch: Branch, tol: &Tolerance) -> Result<Transformation> {
    v.require_dim(2)?;
    let m = polygon_monodromy(v, length)?;
    let class = classify(&m, tol);
    let fixed = match fixed_directions(&m, tol) {
        Ok(FixedSet::Points(p)) => p,
        Ok(FixedSet::Identity) => return Err(BicycleError::IdentityMonodromy),
        Err(BicycleError::NoRealFixedPoint) => return Err(BicycleError::EllipticMonodromy),
        Err(e) => return Err(e),
    };
    let chosen = match branch {
        Branch::Attracting => fixed[0],
        Branch::Repelling => *fixed.last().unwrap(),
    };
    // propagate in the contracting direction: backwards for the repelling
    // branch, where the reversed traversal has the inverse monodromy
    let (seed_angle, run, polygon) = match branch {
        Branch::Attracting => {
            let (a, run) = refine_seed(v, length, chosen.angle, tol)?;
            let p = run.polygon()?;
            (a, run, p)
        }
        Branch::Repelling => {
            let (a, run) = refine_seed(&v.reversed(), length, chosen.angle, tol)?;
            let p = run.polygon()?.reversed();
            (a, run, p)
        }
    };
    if run.closure_defect > closure_bound(v, length, tol) {
        return Err(BicycleError::ClosureFailure {
            defect: run.closure_defect,
        });
    }
    Ok(Transformation {
        polygon,
        length,
        class,
        seed_angle,
        multiplier: chosen.multiplier,
        closure_defect: run.closure_defect,
    })
}

/// `T_L` in any dimension: the attracting fixed direction of the Lorentz
/// monodromy is found by iterating its projective action, then propagated.
pub fn transform_nd(v: &Polygon, length: f64, tol: &Tolerance) -> Result<Polygon> {
    let m = polygon_lorentz_monodromy(v, length)?;
    let n = v.dim();
    let mut u = Vector::new((0..n).map(|i| 1.0 / (i as f64 + 1.5)).collect())?.normalized();
    let mut converged = false;
    for _ in 0..20_000 {
        let next = lorentz_action(&m, &u)?.normalized();
        let step = next.dist(&u);
        u = next;
        if step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BicycleError::NoRealFixedPoint);
    }
    let run = propagate(v, &(v.vertex(0) + &(&u * length)), tol)?;
    if run.closure_defect > closure_bound(v, length, tol) {
        return Err(BicycleError::ClosureFailure {
            defect: run.closure_defect,
        });
    }
    run.polygon()
}

/// The common length `|V_i W_i|` if `v` and `w` are in the discrete
/// bicycle correspondence, `None` otherwise.
pub fn correspondence_length(v: &Polygon, w: &Polygon, tol: &Tolerance) -> Option<f64> {
    if v.len() != w.len() || v.dim() != w.dim() {
        return None;
    }
    let k = v.len() as isize;
    let scale = v.diameter().max(w.diameter());
    let length = v.vertex(0).dist(w.vertex(0));
    let slack = tol.eps_geom * scale.max(length);
    if length <= slack {
        return None;
    }
    for i in 0..k {
        let (v1, v2) = (v.vertex(i), v.vertex(i + 1));
        let (w1, w2) = (w.vertex(i), w.vertex(i + 1));
        if (v1.dist(w1) - length).abs() > slack {
            return None;
        }
        if (v1.dist(v2) - w1.dist(w2)).abs() > slack {
            return None;
        }
        let local = v1.dist(v2).max(length).max(w1.dist(v2)).max(v1.dist(w2));
        if gram_determinant(&[v1, v2, w2, w1]).abs() > tol.eps_geom * local.powi(6) {
            return None;
        }
        if !points_form_butterfly(v1, v2, w2, w1, tol) {
            return None;
        }
    }
    Some(length)
}

/// Whether `v` and `w` are in the discrete bicycle correspondence for some
/// common length: every `V_i V_{i+1} W_{i+1} W_i` is a Darboux butterfly
/// with `|V_i W_i|` constant.
pub fn correspondence_check(v: &Polygon, w: &Polygon, tol: &Tolerance) -> bool {
    correspondence_length(v, w, tol).is_some()
}

/// Recutting at vertex `i`: `V_i` is mirrored in the perpendicular bisector
/// hyperplane of `V_{i-1} V_{i+1}`.
pub fn recut(v: &Polygon, i: usize) -> Result<Polygon> {
    let i = i % v.len();
    let prev = v.vertex(i as isize - 1);
    let next = v.vertex(i as isize + 1);
    let moved = perp_bisector_reflect_tol(v.vertex(i as isize), prev, next, crate::geometry::DEFAULT_EPS_GEOM)?;
    Polygon::new(v.with_vertex(i, moved).into_vertices())
}

/// The point `t1` completing `v1 w1 t1 s1` to a Darboux butterfly: `v1`
/// mirrored in the perpendicular bisector of `w1 s1`.
pub fn butterfly_fourth(v1: &Vector, w1: &Vector, s1: &Vector) -> Result<Vector> {
    perp_bisector_reflect_tol(v1, w1, s1, crate::geometry::DEFAULT_EPS_GEOM)
}

/// Which known companion of `V` carries the propagation of the fourth polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BianchiRoute {
    /// Propagate along `S` (length `|V_0 W_0|`).
    AlongS,
    /// Propagate along `W` (length `|V_0 S_0|`).
    AlongW,
}

/// Fourth polygon of a Bianchi quadrilateral: given `B(V, W)` and `B(V, S)`,
/// returns a closed `T` with `B(S, T)` at `|V W|` and `B(W, T)` at `|V S|`.
pub fn bianchi_fourth_polygon(v: &Polygon, w: &Polygon, s: &Polygon, tol: &Tolerance) -> Result<Polygon> {
    bianchi_fourth_polygon_via(v, w, s, BianchiRoute::AlongS, tol)
}

pub fn bianchi_fourth_polygon_via(
    v: &Polygon,
    w: &Polygon,
    s: &Polygon,
    route: BianchiRoute,
    tol: &Tolerance,
) -> Result<Polygon> {
    if v.len() != w.len() || v.len() != s.len() {
        return Err(BicycleError::InvalidPolygon(
            "Bianchi inputs must have equal vertex counts".into(),
        ));
    }
    w.require_dim(v.dim())?;
    s.require_dim(v.dim())?;
    let t0 = butterfly_fourth(v.vertex(0), w.vertex(0), s.vertex(0))?;
    let carrier = match route {
        BianchiRoute::AlongS => s,
        BianchiRoute::AlongW => w,
    };
    let run = propagate(carrier, &t0, tol)?;
    let scale = v.diameter() + v.vertex(0).dist(w.vertex(0)) + v.vertex(0).dist(s.vertex(0));
    if run.closure_defect > tol.eps_geom * scale {
        return Err(BicycleError::ClosureFailure {
            defect: run.closure_defect,
        });
    }
    run.polygon()
}

/// A planar pair in the discrete bicycle correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct BicyclePair {
    pub v: Polygon,
    pub w: Polygon,
    /// Common length `L = |V_i W_i|`.
    pub length: f64,
    /// `alpha_i`: oriented angle at `V_i` from `V_{i-1} - V_i` to `W_i - V_i`.
    pub alphas: Vec<f64>,
}

impl BicyclePair {
    pub fn new(v: Polygon, w: Polygon, tol: &Tolerance) -> Result<Self> {
        v.require_dim(2)?;
        let length = correspondence_length(&v, &w, tol).ok_or_else(|| {
            BicycleError::InvalidPolygon("polygons are not in the bicycle correspondence".into())
        })?;
        let alphas = angles_at_v(&v, &w);
        Ok(Self { v, w, length, alphas })
    }

    /// `ell = L / 2`, the length used by the rear-track formulas.
    pub fn half_length(&self) -> f64 {
        self.length / 2.0
    }
}

fn angles_at_v(v: &Polygon, w: &Polygon) -> Vec<f64> {
    (0..v.len() as isize)
        .map(|i| {
            let vi = v.vertex(i);
            oriented_angle(&(v.vertex(i - 1) - vi), &(w.vertex(i) - vi))
        })
        .collect()
}

/// The angles `alpha_i = ∠ V_{i-1} V_i W_i` (oriented, radians).
pub fn angle_sequence(pair: &BicyclePair) -> Vec<f64> {
    pair.alphas.clone()
}

/// The same angles measured at the other end of each trapezoid,
/// `∠ V_{i-1} W_{i-1} W_i`; agrees with [`angle_sequence`].
pub fn angle_sequence_at_w(pair: &BicyclePair) -> Vec<f64> {
    let (v, w) = (&pair.v, &pair.w);
    (0..v.len() as isize)
        .map(|i| {
            let wp = w.vertex(i - 1);
            oriented_angle(&(v.vertex(i - 1) - wp), &(w.vertex(i) - wp))
        })
        .collect()
}

/// Rebuilds `W` from `V`, the segment length and the angle sequence.
pub fn companion_from_angles(v: &Polygon, length: f64, alphas: &[f64]) -> Result<Polygon> {
    v.require_dim(2)?;
    let pts = (0..v.len() as isize)
        .map(|i| {
            let vi = v.vertex(i);
            let back = (v.vertex(i - 1) - vi).angle();
            vi + &(Vector::polar(back + alphas[i as usize]) * length)
        })
        .collect();
    Polygon::new(pts)
}

/// Turning angles `theta_i = ∠ V_{i-1} V_i V_{i+1}` (oriented).
pub fn vertex_angles(v: &Polygon) -> Vec<f64> {
    (0..v.len() as isize)
        .map(|i| {
            let vi = v.vertex(i);
            oriented_angle(&(v.vertex(i - 1) - vi), &(v.vertex(i + 1) - vi))
        })
        .collect()
}

/// Signed residuals of
/// `L cos((a_i - a_{i-1} + t_{i-1})/2) = c_i cos((a_i + a_{i-1} - t_{i-1})/2)`
/// with `c_i = |V_{i-1} V_i|`, one per vertex.
pub fn difference_residuals(v: &Polygon, length: f64, alphas: &[f64]) -> Vec<f64> {
    let k = v.len();
    let thetas = vertex_angles(v);
    (0..k)
        .map(|i| {
            let ip = (i + k - 1) % k;
            let c = v.side(ip).norm();
            let (a, a_prev, t_prev) = (alphas[i], alphas[ip], thetas[ip]);
            length * ((a - a_prev + t_prev) / 2.0).cos() - c * ((a + a_prev - t_prev) / 2.0).cos()
        })
        .collect()
}

/// Largest absolute residual of the angle difference equation for a pair.
pub fn verify_difference_equation(pair: &BicyclePair) -> f64 {
    difference_residuals(&pair.v, pair.length, &pair.alphas)
        .into_iter()
        .fold(0.0, |m, r| m.max(r.abs()))
}
