//! Deterministic input polygons for the benchmarks.

use std::f64::consts::TAU;

use bicycle_core::{Polygon, Vector};

/// A star-shaped `k`-gon with uneven radii and angular gaps. The same `k`
/// always gives the same polygon.
pub fn wobbly(k: usize) -> Polygon {
    let pts = (0..k)
        .map(|i| {
            let t = TAU * (i as f64 + 0.3 * (1.7 * i as f64).sin()) / k as f64;
            let r = 1.0 + 0.35 * (2.3 * i as f64).cos();
            Vector::polar(t) * r
        })
        .collect();
    Polygon::new(pts).expect("at least three distinct vertices")
}

/// A length comfortably inside the hyperbolic range of [`wobbly`] polygons.
pub fn bench_length(k: usize) -> f64 {
    0.4 * TAU / k as f64
}
