//! Static SVG figures. Output depends only on the inputs: no timestamps,
//! ids are positional, and every number is printed with six decimals.

use std::fmt::Write as _;

use bicycle_core::invariants::RearTrack;
use bicycle_core::{Polygon, Vector};

const MARGIN: f64 = 24.0;
/// Pixel size of the larger side of the drawing area.
const CANVAS: f64 = 480.0;
const PALETTE: [&str; 5] = ["#1f4e9c", "#c0392b", "#27803b", "#8e44ad", "#d68910"];

pub struct Arrow {
    pub from: Vector,
    pub to: Vector,
    pub attracting: bool,
}

#[derive(Default)]
pub struct Scene {
    pub polygons: Vec<Polygon>,
    pub track: Option<RearTrack>,
    pub arrows: Vec<Arrow>,
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

struct Frame {
    min: (f64, f64),
    extent: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            (lo, hi) = ((0.0, 0.0), (1.0, 1.0));
        }
        let (w, h) = (hi.0 - lo.0, hi.1 - lo.1);
        let extent = w.max(h).max(1e-12);
        let scale = CANVAS / extent;
        Frame {
            min: lo,
            extent,
            scale,
            width: w * scale + 2.0 * MARGIN,
            height: h * scale + 2.0 * MARGIN,
        }
    }
}

fn polyline_points(v: &Polygon) -> String {
    let mut pts: Vec<String> = v
        .vertices()
        .iter()
        .map(|p| format!("{},{}", num(p.x()), num(p.y())))
        .collect();
    pts.push(pts[0].clone());
    pts.join(" ")
}

pub fn render(scene: &Scene) -> String {
    let mut pts: Vec<(f64, f64)> = scene
        .polygons
        .iter()
        .flat_map(|v| v.vertices().iter().map(|p| (p.x(), p.y())))
        .collect();
    if let Some(t) = &scene.track {
        pts.extend(t.q.iter().map(|p| (p.x(), p.y())));
    }
    for a in &scene.arrows {
        pts.push((a.from.x(), a.from.y()));
        pts.push((a.to.x(), a.to.y()));
    }
    let f = Frame::fit(pts.into_iter());
    let dot = 3.0 / f.scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##,
        w = num(f.width),
        h = num(f.height)
    );
    let _ = writeln!(
        out,
        r##"<defs><marker id="head-attracting" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#27803b"/></marker><marker id="head-repelling" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="8" markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#c0392b"/></marker></defs>"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    // y-up: flip about the bottom margin
    let _ = writeln!(
        out,
        r##"<g transform="translate({} {}) scale({} {}) translate({} {})">"##,
        num(MARGIN),
        num(f.height - MARGIN),
        num(f.scale),
        num(-f.scale),
        num(-f.min.0),
        num(-f.min.1)
    );

    if let Some(t) = &scene.track {
        let _ = writeln!(out, r##"<g id="rear-track" fill="none" stroke="#7f8c8d">"##);
        for (i, c) in t.circles.iter().enumerate() {
            // lines and near-lines would only add clutter off the canvas
            let Some(p) = c.finite_center() else { continue };
            let r = c.radius().abs();
            if r > 1e3 * f.extent {
                continue;
            }
            let _ = writeln!(
                out,
                r##"<circle id="circle-{i}" cx="{}" cy="{}" r="{}" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
                num(p.x()),
                num(p.y()),
                num(r)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    for (i, v) in scene.polygons.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r##"<polyline id="polygon-{i}" points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-linejoin="round" vector-effect="non-scaling-stroke"/>"##,
            polyline_points(v)
        );
    }

    if scene.polygons.len() == 2 && scene.polygons[0].len() == scene.polygons[1].len() {
        let (v, w) = (&scene.polygons[0], &scene.polygons[1]);
        let _ = writeln!(out, r##"<g id="segments" stroke="#95a5a6" stroke-dasharray="4 3">"##);
        for (i, (a, b)) in v.vertices().iter().zip(w.vertices()).enumerate() {
            let _ = writeln!(
                out,
                r##"<line id="segment-{i}" x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
                num(a.x()),
                num(a.y()),
                num(b.x()),
                num(b.y())
            );
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(t) = &scene.track {
        let _ = writeln!(out, r##"<g id="tangency-points" fill="black">"##);
        for (i, q) in t.q.iter().enumerate() {
            let _ = writeln!(
                out,
                r##"<circle id="tangency-{i}" cx="{}" cy="{}" r="{}"/>"##,
                num(q.x()),
                num(q.y()),
                num(dot)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    for (i, a) in scene.arrows.iter().enumerate() {
        let (kind, color) = if a.attracting {
            ("attracting", PALETTE[2])
        } else {
            ("repelling", PALETTE[1])
        };
        let _ = writeln!(
            out,
            r##"<line id="fixed-direction-{i}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.5" vector-effect="non-scaling-stroke" marker-end="url(#head-{kind})"/>"##,
            num(a.from.x()),
            num(a.from.y()),
            num(a.to.x()),
            num(a.to.y())
        );
    }

    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
