//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use bicycle_core::geometry::{Polygon, Tolerance, Vector};
use bicycle_core::mobius::{classify, polygon_monodromy, MonodromyClass};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Star-shaped polygon about the origin: sorted polar angles, radii in
/// `[0.5, 1.5]`, consecutive angles at least `0.1` apart.
pub fn star_polygon(rng: &mut ChaCha8Rng, k: usize) -> Polygon {
    loop {
        let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        a.sort_by(f64::total_cmp);
        let gaps_ok = (0..k).all(|i| {
            let next = if i + 1 < k { a[i + 1] } else { a[0] + TAU };
            next - a[i] > 0.1
        });
        if gaps_ok {
            return Polygon::new(a.iter().map(|t| Vector::polar(*t) * rng.random_range(0.5..1.5)).collect())
                .unwrap();
        }
    }
}

/// Polygon in `R^dim` with vertices in the unit cube around the origin,
/// sides at least `0.2`.
pub fn space_polygon(rng: &mut ChaCha8Rng, k: usize, dim: usize) -> Polygon {
    loop {
        let pts: Vec<Vector> = (0..k)
            .map(|_| Vector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let ok = (0..k).all(|i| pts[i].dist(&pts[(i + 1) % k]) > 0.2);
        if ok {
            return Polygon::new(pts).unwrap();
        }
    }
}

/// Convex polygon inscribed in a random circle.
pub fn cyclic_polygon(rng: &mut ChaCha8Rng, k: usize) -> Polygon {
    let center = Vector::xy(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let r = rng.random_range(0.5..2.0);
    loop {
        let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        a.sort_by(f64::total_cmp);
        let gaps_ok = (0..k).all(|i| {
            let next = if i + 1 < k { a[i + 1] } else { a[0] + TAU };
            let gap = next - a[i];
            gap > 0.15 && gap < std::f64::consts::PI - 0.05
        });
        if gaps_ok {
            return Polygon::new(a.iter().map(|t| &center + &(Vector::polar(*t) * r)).collect()).unwrap();
        }
    }
}

/// Whether `l` keeps a relative distance `gap` from every side length.
pub fn off_sides(v: &Polygon, l: f64, gap: f64) -> bool {
    v.side_lengths().iter().all(|s| (s - l).abs() > gap * s)
}

/// A length in `[lo, hi]` with comfortably hyperbolic monodromy
/// (normalized discriminant above `1e-2`) away from the side lengths.
pub fn hyperbolic_length(rng: &mut ChaCha8Rng, v: &Polygon, lo: f64, hi: f64) -> Option<f64> {
    let tol = Tolerance::default();
    for _ in 0..400 {
        let l = rng.random_range(lo..hi);
        if !off_sides(v, l, 1e-2) {
            continue;
        }
        let Ok(m) = polygon_monodromy(v, l) else { continue };
        if classify(&m, &tol) == MonodromyClass::Hyperbolic && m.normalized_discriminant() > 1e-2 {
            return Some(l);
        }
    }
    None
}

/// Random rigid motion of the plane applied to points.
pub fn rigid_motion(rng: &mut ChaCha8Rng) -> impl Fn(&Vector) -> Vector {
    let theta = rng.random_range(0.0..TAU);
    let shift = Vector::xy(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    move |p: &Vector| &p.rotate_about(&Vector::zeros(2), theta) + &shift
}

/// A Darboux butterfly: the lateral sides and diagonals of a random
/// isosceles trapezoid, in random position.
pub fn random_butterfly(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let (a, b): (f64, f64) = (rng.random_range(0.3..1.5), rng.random_range(0.3..1.5));
        let (h1, h2) = (0.0, rng.random_range(0.3..1.5));
        if (a - b).abs() < 0.1 {
            continue;
        }
        let m = rigid_motion(rng);
        // trapezoid P Q R S with PQ parallel to SR, axis x = 0
        let (p, q) = (Vector::xy(-a, h1), Vector::xy(a, h1));
        let (r, s) = (Vector::xy(b, h2), Vector::xy(-b, h2));
        return Polygon::new(vec![m(&p), m(&s), m(&q), m(&r)]).unwrap();
    }
}

/// Relative difference with a floor of one.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Relative difference without floor.
pub fn rel_strict(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
