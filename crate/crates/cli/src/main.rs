//! `bicycle`: command-line driver for the discrete bicycle correspondence.
//!
//! Angles on the command line are in degrees; the library works in radians.

#[macro_use]
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use bicycle_core::dynamics::{transform_from_angle, BianchiRoute};
use bicycle_core::families::{
    classify_cyclic, classify_quadrilateral, ngon_construct, ngon_residuals, rotation_transform,
    NGonResiduals, NGonSpec,
};
use bicycle_core::geometry::{butterfly_residual, DEFAULT_EPS_CLASS, DEFAULT_EPS_GEOM};
use bicycle_core::invariants::eigenvalue_products;
use bicycle_core::io::load_polygon_file;
use bicycle_core::mobius::FixedSet;
use bicycle_core::scan::{regime_boundaries, scan, scan_row, ScanRow};
use bicycle_core::{
    area_bivector, bianchi_fourth_polygon, circumcenter_of_mass, correspondence_length,
    fixed_directions, j_vector, polygon_monodromy, propagate, rear_track, recut, trace_polynomial,
    transform, transform_nd, BicycleError, BicyclePair, Branch, MonodromyClass, Polygon,
    PolygonFile, Tolerance, Vector,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{
    list, point, print_json, sci, vertex_lines, write_polygon, Aligned, CmdResult, Failure,
};

#[derive(Parser)]
#[command(name = "bicycle", version, about = "Discrete bicycle correspondence on polygons")]
struct Cli {
    /// Geometric tolerance; the classification tolerance scales with it.
    #[arg(long, global = true, env = "BICYCLE_TOL", default_value_t = DEFAULT_EPS_GEOM)]
    tol: f64,

    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Attracting,
    Repelling,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Attracting => Branch::Attracting,
            BranchArg::Repelling => Branch::Repelling,
        }
    }
}

/// `min:max:steps`.
#[derive(Clone, Copy, Debug)]
struct Grid {
    min: f64,
    max: f64,
    steps: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected min:max:steps, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let steps = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
        let (min, max) = (num(a)?, num(b)?);
        if !(min > 0.0 && max > min && max.is_finite()) || steps < 2 {
            return Err(format!("need 0 < min < max and steps >= 2, got {s:?}"));
        }
        Ok(Grid { min, max, steps })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bicycle transform T_L of a polygon.
    Transform {
        input: PathBuf,
        #[arg(short = 'l', long = "ell")]
        ell: f64,
        #[arg(long, value_enum, default_value = "attracting")]
        branch: BranchArg,
        /// Seed direction of V_0 W_0 in degrees (skips the fixed-point search).
        #[arg(long, allow_negative_numbers = true)]
        seed_angle: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report integrals, trace polynomial and monodromy classes; with a
    /// second polygon, the differences and the pair data.
    Invariants {
        input: PathBuf,
        other: Option<PathBuf>,
        /// Lengths at which to classify the monodromy (repeatable).
        #[arg(short = 'l', long = "ell")]
        ell: Vec<f64>,
    },
    /// Classify the monodromy over a grid of lengths and bisect the regime boundaries.
    Scan {
        input: PathBuf,
        #[arg(long)]
        grid: Grid,
    },
    /// Draw polygons, rear track and fixed directions as SVG.
    Svg {
        inputs: Vec<PathBuf>,
        /// Draw the rear-track chain of the first two polygons.
        #[arg(long)]
        rear_track: bool,
        /// Add the alternating two-circle (n, k)-gon.
        #[arg(long, num_args = 2, value_names = ["N", "K"])]
        ngon: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
        #[arg(long, default_value_t = 0.7)]
        r2: f64,
        /// Draw the fixed directions of the monodromy of the first polygon at this length.
        #[arg(short = 'l', long = "ell")]
        ell: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build or verify bicycle (n, k)-gons.
    Ngon {
        #[command(subcommand)]
        action: NgonAction,
    },
    /// Recut a polygon at one vertex and compare invariants.
    Recut {
        input: PathBuf,
        #[arg(short = 'i', long)]
        vertex: usize,
        /// Lengths at which to compare Tr^2/det (repeatable).
        #[arg(short = 'l', long = "ell")]
        ell: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rear-track chain of circles of a bicycle pair.
    RearTrack { v: PathBuf, w: PathBuf },
    /// Fourth polygon of a Bianchi quadrilateral from B(V, W) and B(V, S).
    Bianchi {
        v: PathBuf,
        w: PathBuf,
        s: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NgonAction {
    /// Vertices alternating between radii r1 and r2 at equal angular steps.
    Build {
        n: usize,
        k: usize,
        r1: f64,
        r2: f64,
        /// Angle of V_0 in degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phase: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the (n, k)-gon conditions; exits 1 on failure.
    Verify { input: PathBuf, k: usize },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let tol = Tolerance::new(cli.tol, cli.tol * (DEFAULT_EPS_CLASS / DEFAULT_EPS_GEOM).round())?;
    let json = cli.json;
    match cli.command {
        Command::Transform {
            input,
            ell,
            branch,
            seed_angle,
            output,
        } => cmd_transform(&input, ell, branch.into(), seed_angle, output.as_deref(), &tol, json),
        Command::Invariants { input, other, ell } => cmd_invariants(&input, other.as_deref(), &ell, &tol, json),
        Command::Scan { input, grid } => cmd_scan(&input, grid, &tol, json),
        Command::Svg {
            inputs,
            rear_track,
            ngon,
            r1,
            r2,
            ell,
            output,
        } => cmd_svg(&inputs, rear_track, ngon.as_deref(), (r1, r2), ell, output.as_deref(), &tol),
        Command::Ngon { action } => match action {
            NgonAction::Build {
                n,
                k,
                r1,
                r2,
                phase,
                output,
            } => cmd_ngon_build(NGonSpec { n, k, r1, r2, phase: phase.to_radians() }, output.as_deref(), &tol, json),
            NgonAction::Verify { input, k } => cmd_ngon_verify(&input, k, &tol, json),
        },
        Command::Recut {
            input,
            vertex,
            ell,
            output,
        } => cmd_recut(&input, vertex, &ell, output.as_deref(), &tol, json),
        Command::RearTrack { v, w } => cmd_rear_track(&v, &w, &tol, json),
        Command::Bianchi { v, w, s, output } => cmd_bianchi(&v, &w, &s, output.as_deref(), &tol, json),
    }
}

fn load(path: &Path) -> Result<(Polygon, Option<String>), Failure> {
    let file = load_polygon_file(path)?;
    let v = file.to_polygon()?;
    Ok((v, file.name))
}

fn check_length(ell: f64) -> CmdResult {
    if ell > 0.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("the length must be positive and finite, got {ell}")))
    }
}

// ---------------------------------------------------------------- transform

#[derive(Serialize)]
struct TransformReport {
    tolerance: Tolerance,
    length: f64,
    branch: Option<Branch>,
    method: &'static str,
    class: Option<MonodromyClass>,
    seed_angle_deg: Option<f64>,
    multiplier: Option<f64>,
    closure_defect: f64,
    polygon: PolygonFile,
}

/// Largest violation of `|V_i W_i| = L` and `|W_i W_{i+1}| = |V_i V_{i+1}|`.
fn rotation_defect(v: &Polygon, w: &Polygon, ell: f64) -> f64 {
    (0..v.len() as isize)
        .map(|i| {
            let a = (v.vertex(i).dist(w.vertex(i)) - ell).abs();
            let b = (v.vertex(i).dist(v.vertex(i + 1)) - w.vertex(i).dist(w.vertex(i + 1))).abs();
            a.max(b)
        })
        .fold(0.0, f64::max)
}

/// Explains where the monodromy is elliptic, as far as it can be located.
fn elliptic_message(v: &Polygon, ell: f64, tol: &Tolerance) -> String {
    let head = format!("monodromy is elliptic at L = {ell}: no closed companion exists");
    let cyc = classify_cyclic(v, tol);
    if cyc.is_cyclic_convex {
        return format!(
            "{head}; the polygon is convex cyclic with circumdiameter d = {}, and the monodromy is elliptic for ℓ>d",
            cyc.diameter
        );
    }
    if v.len() == 4 {
        if let Ok(q) = classify_quadrilateral(v, tol) {
            let b: Vec<String> = q.boundaries().iter().map(|x| format!("{x}")).collect();
            return format!("{head}; quadrilateral regime boundaries: [{}]", b.join(", "));
        }
    }
    let hi = (4.0 * ell).max(v.perimeter());
    match regime_boundaries(v, hi * 1e-4, hi, 400, tol) {
        Ok(b) => {
            let below = b.iter().copied().filter(|x| *x < ell).fold(None, |_, x| Some(x));
            let above = b.iter().copied().find(|x| *x > ell);
            let lo = below.map_or("0".to_string(), |x| format!("{x}"));
            let up = above.map_or(format!("beyond {hi}"), |x| format!("{x}"));
            format!("{head}; elliptic range containing L: ({lo}, {up})")
        }
        Err(_) => head,
    }
}

fn cmd_transform(
    input: &Path,
    ell: f64,
    branch: Branch,
    seed_angle: Option<f64>,
    output: Option<&Path>,
    tol: &Tolerance,
    json: bool,
) -> CmdResult {
    check_length(ell)?;
    let (v, name) = load(input)?;
    let name = name.map(|n| format!("{n} T_{ell}"));

    let report = if v.dim() != 2 {
        if seed_angle.is_some() {
            return Err(Failure::Input("--seed-angle needs a planar polygon".into()));
        }
        // the repelling companion is the attracting one of the reversed traversal
        let w = match branch {
            Branch::Attracting => transform_nd(&v, ell, tol)?,
            Branch::Repelling => transform_nd(&v.reversed(), ell, tol)?.reversed(),
        };
        let defect = propagate(&v, w.vertex(0), tol)?.closure_defect;
        TransformReport {
            tolerance: *tol,
            length: ell,
            branch: Some(branch),
            method: "lorentz fixed point",
            class: None,
            seed_angle_deg: None,
            multiplier: None,
            closure_defect: defect,
            polygon: PolygonFile::from_polygon(&w, name),
        }
    } else if let Some(deg) = seed_angle {
        let t = transform_from_angle(&v, ell, deg.to_radians(), tol)?;
        TransformReport {
            tolerance: *tol,
            length: ell,
            branch: None,
            method: "explicit seed",
            class: Some(t.class),
            seed_angle_deg: Some(deg),
            multiplier: None,
            closure_defect: t.closure_defect,
            polygon: PolygonFile::from_polygon(&t.polygon, name),
        }
    } else {
        match transform(&v, ell, branch, tol) {
            Ok(t) => TransformReport {
                tolerance: *tol,
                length: ell,
                branch: Some(branch),
                method: "fixed direction",
                class: Some(t.class),
                seed_angle_deg: Some(t.seed_angle.to_degrees()),
                multiplier: Some(t.multiplier),
                closure_defect: t.closure_defect,
                polygon: PolygonFile::from_polygon(&t.polygon, name),
            },
            Err(BicycleError::EllipticMonodromy) => return Err(Failure::Input(elliptic_message(&v, ell, tol))),
            Err(BicycleError::DegenerateMonodromy) if classify_cyclic(&v, tol).is_cyclic_convex => {
                // L equals a side: the matrix product degenerates, but the
                // rotation about the circumcenter is still a companion
                // W_i may coincide with V_{i+1}, so check the lengths directly
                let w = rotation_transform(&v, ell, tol)?;
                let defect = rotation_defect(&v, &w, ell);
                if defect > tol.eps_geom * (v.perimeter() + ell) {
                    return Err(Failure::Verification(format!("rotation companion does not close (defect {defect:e})")));
                }
                TransformReport {
                    tolerance: *tol,
                    length: ell,
                    branch: None,
                    method: "rotation about the circumcenter",
                    class: Some(MonodromyClass::Degenerate),
                    seed_angle_deg: Some((w.vertex(0) - v.vertex(0)).angle().to_degrees()),
                    multiplier: None,
                    closure_defect: defect,
                    polygon: PolygonFile::from_polygon(&w, name),
                }
            }
            Err(e) => return Err(e.into()),
        }
    };

    if let Some(path) = output {
        write_polygon(path, &report.polygon.to_polygon()?, report.polygon.name.clone())?;
    }
    if json {
        print_json(&report);
        return Ok(());
    }
    let mut t = Aligned::default();
    t.row("length", report.length)
        .row("method", report.method)
        .row("branch", report.branch.map_or("-".into(), |b| format!("{b:?}").to_lowercase()))
        .row("class", report.class.map_or("-".into(), |c| c.to_string()))
        .row("seed angle (deg)", report.seed_angle_deg.map_or("-".into(), |a| format!("{a:.9}")))
        .row("multiplier", report.multiplier.map_or("-".into(), |m| format!("{m:.12e}")))
        .row("closure defect", sci(report.closure_defect))
        .row("tolerance", format!("eps_geom {:e}, eps_class {:e}", tol.eps_geom, tol.eps_class));
    if let Some(path) = output {
        t.row("written", path.display());
    }
    out!("{}", t.render());
    if output.is_none() {
        outln!("vertices");
        out!("{}", vertex_lines(&report.polygon.to_polygon()?));
    }
    Ok(())
}

// --------------------------------------------------------------- invariants

#[derive(Serialize)]
#[serde(untagged)]
enum Ccm {
    Point(Vec<f64>),
    Undefined(&'static str),
}

const CCM_UNDEFINED: &str = "undefined (zero area)";

#[derive(Serialize)]
struct PolygonReport {
    name: Option<String>,
    dim: usize,
    vertex_count: usize,
    perimeter: f64,
    side_lengths: Vec<f64>,
    /// Components of the area bivector (a single signed area in the plane).
    area: Vec<f64>,
    j: Vec<f64>,
    ccm: Option<Ccm>,
    /// Coefficients of half the trace, constant term first.
    trace_polynomial: Option<Vec<f64>>,
    monodromy: Vec<ScanRow>,
}

#[derive(Serialize)]
struct Deltas {
    area: f64,
    j: f64,
    ccm: Option<f64>,
    /// `|Tr^2/det (V) - Tr^2/det (W)|` at each requested length.
    trace_sq_over_det: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct PairReport {
    length: f64,
    rear_track_radii: Option<Vec<f64>>,
    lambda_vw: Option<f64>,
    lambda_chain: Option<f64>,
}

#[derive(Serialize)]
struct InvariantsReport {
    tolerance: Tolerance,
    polygons: Vec<PolygonReport>,
    deltas: Option<Deltas>,
    pair: Option<PairReport>,
}

fn polygon_report(v: &Polygon, name: Option<String>, ells: &[f64], tol: &Tolerance) -> Result<PolygonReport, Failure> {
    let planar = v.dim() == 2;
    let ccm = planar.then(|| match circumcenter_of_mass(v) {
        Ok(c) => Ccm::Point(c.coords().to_vec()),
        Err(_) => Ccm::Undefined(CCM_UNDEFINED),
    });
    let trace = if planar {
        Some(trace_polynomial(v)?.coeffs)
    } else {
        None
    };
    let monodromy = if planar {
        ells.iter().map(|&l| scan_row(v, l, tol)).collect::<bicycle_core::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(PolygonReport {
        name,
        dim: v.dim(),
        vertex_count: v.len(),
        perimeter: v.perimeter(),
        side_lengths: v.side_lengths(),
        area: area_bivector(v).components().to_vec(),
        j: j_vector(v).coords().to_vec(),
        ccm,
        trace_polynomial: trace,
        monodromy,
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cmd_invariants(input: &Path, other: Option<&Path>, ells: &[f64], tol: &Tolerance, json: bool) -> CmdResult {
    for &l in ells {
        check_length(l)?;
    }
    let (v, name) = load(input)?;
    let mut polygons = vec![polygon_report(&v, name, ells, tol)?];
    let mut deltas = None;
    let mut pair = None;
    if let Some(path) = other {
        let (w, wname) = load(path)?;
        if w.dim() != v.dim() {
            return Err(BicycleError::DimensionMismatch {
                expected: v.dim(),
                found: w.dim(),
            }
            .into());
        }
        let rw = polygon_report(&w, wname, ells, tol)?;
        let rv = &polygons[0];
        let ccm = match (&rv.ccm, &rw.ccm) {
            (Some(Ccm::Point(a)), Some(Ccm::Point(b))) => Some(max_diff(a, b)),
            _ => None,
        };
        deltas = Some(Deltas {
            area: max_diff(&rv.area, &rw.area),
            j: max_diff(&rv.j, &rw.j),
            ccm,
            trace_sq_over_det: rv
                .monodromy
                .iter()
                .zip(&rw.monodromy)
                .map(|(a, b)| (a.length, (a.trace_sq_over_det - b.trace_sq_over_det).abs()))
                .collect(),
        });
        if let Some(length) = correspondence_length(&v, &w, tol) {
            let mut p = PairReport {
                length,
                rear_track_radii: None,
                lambda_vw: None,
                lambda_chain: None,
            };
            if v.dim() == 2 {
                let bp = BicyclePair::new(v.clone(), w.clone(), tol)?;
                if let Ok(track) = rear_track(&bp, tol) {
                    p.rear_track_radii = Some(track.radii());
                    if let Ok((a, b)) = eigenvalue_products(&bp, &track, tol) {
                        (p.lambda_vw, p.lambda_chain) = (Some(a), Some(b));
                    }
                }
            }
            pair = Some(p);
        }
        polygons.push(rw);
    }
    let report = InvariantsReport {
        tolerance: *tol,
        polygons,
        deltas,
        pair,
    };
    if json {
        print_json(&report);
        return Ok(());
    }

    outln!("tolerance: eps_geom {:e}, eps_class {:e}", tol.eps_geom, tol.eps_class);
    for (idx, r) in report.polygons.iter().enumerate() {
        let mut t = Aligned::default();
        let title = r.name.clone().unwrap_or_else(|| format!("polygon {idx}"));
        t.row("polygon", title)
            .row("dim / vertices", format!("{} / {}", r.dim, r.vertex_count))
            .row("perimeter", format!("{:.12}", r.perimeter))
            .row("side lengths", list(&r.side_lengths))
            .row("area A", list(&r.area))
            .row("J", list(&r.j));
        match &r.ccm {
            Some(Ccm::Point(c)) => {
                t.row("CCM", point(c));
            }
            Some(Ccm::Undefined(s)) => {
                t.row("CCM", s);
            }
            None => {}
        }
        if let Some(c) = &r.trace_polynomial {
            t.row("trace polynomial", list(c));
            let odd = c.iter().skip(1).step_by(2).fold(0.0f64, |m, x| m.max(x.abs()));
            t.row("max |c_odd|", sci(odd));
        }
        for row in &r.monodromy {
            let mult = row
                .multipliers
                .map_or(String::new(), |(a, b)| format!(", multipliers {a:.9e} / {b:.9e}"));
            t.row(
                format!("monodromy L={}", row.length),
                format!("{} (Tr^2/det {:.12}{mult})", row.class, row.trace_sq_over_det),
            );
        }
        out!("{}", t.render());
    }
    if let Some(d) = &report.deltas {
        let mut t = Aligned::default();
        t.row("delta A", sci(d.area)).row("delta J", sci(d.j));
        t.row("delta CCM", d.ccm.map_or("-".into(), sci));
        for (l, x) in &d.trace_sq_over_det {
            t.row(format!("delta Tr^2/det L={l}"), sci(*x));
        }
        out!("{}", t.render());
    }
    match (&report.pair, other) {
        (Some(p), _) => {
            let mut t = Aligned::default();
            t.row("bicycle pair, L", format!("{:.12}", p.length));
            if let Some(r) = &p.rear_track_radii {
                t.row("rear-track radii", list(r));
            }
            if let (Some(a), Some(b)) = (p.lambda_vw, p.lambda_chain) {
                t.row("lambda (V, W)", format!("{a:.12e}")).row("lambda (chain)", format!("{b:.12e}"));
            }
            out!("{}", t.render());
        }
        (None, Some(_)) => outln!("the two polygons are not in bicycle correspondence"),
        _ => {}
    }
    Ok(())
}

// --------------------------------------------------------------------- scan

#[derive(Serialize)]
struct ScanReport {
    tolerance: Tolerance,
    rows: Vec<ScanRow>,
    boundaries: Vec<f64>,
}

fn cmd_scan(input: &Path, grid: Grid, tol: &Tolerance, json: bool) -> CmdResult {
    let (v, _) = load(input)?;
    let rows = scan(&v, grid.min, grid.max, grid.steps, tol)?;
    let boundaries = regime_boundaries(&v, grid.min, grid.max, grid.steps, tol)?;
    let report = ScanReport {
        tolerance: *tol,
        rows,
        boundaries,
    };
    if json {
        print_json(&report);
        return Ok(());
    }
    outln!("tolerance: eps_geom {:e}, eps_class {:e}", tol.eps_geom, tol.eps_class);
    outln!(
        "{:>16}  {:<10}  {:>20}  {:>12}  {:>14}  {:>14}",
        "L", "class", "Tr^2/det", "disc (norm)", "mult (attr)", "mult (rep)"
    );
    for r in &report.rows {
        let (a, b) = r
            .multipliers
            .map_or(("-".into(), "-".into()), |(a, b)| (format!("{a:.6e}"), format!("{b:.6e}")));
        outln!(
            "{:>16.10}  {:<10}  {:>20.12}  {:>12.4e}  {:>14}  {:>14}",
            r.length,
            r.class.to_string(),
            r.trace_sq_over_det,
            r.normalized_discriminant,
            a,
            b
        );
    }
    if report.boundaries.is_empty() {
        outln!("boundaries: none");
    } else {
        outln!("boundaries: {}", list(&report.boundaries));
    }
    Ok(())
}

// ---------------------------------------------------------------------- svg

fn cmd_svg(
    inputs: &[PathBuf],
    with_track: bool,
    ngon: Option<&[usize]>,
    (r1, r2): (f64, f64),
    ell: Option<f64>,
    output: Option<&Path>,
    tol: &Tolerance,
) -> CmdResult {
    let mut scene = svg::Scene::default();
    for path in inputs {
        let (v, _) = load(path)?;
        if v.dim() != 2 {
            return Err(BicycleError::DimensionMismatch { expected: 2, found: v.dim() }.into());
        }
        scene.polygons.push(v);
    }
    if let Some(nk) = ngon {
        let spec = NGonSpec {
            n: nk[0],
            k: nk[1],
            r1,
            r2,
            phase: 0.0,
        };
        scene.polygons.push(ngon_construct(&spec)?);
    }
    if scene.polygons.is_empty() {
        return Err(Failure::Input("nothing to draw: give input polygons or --ngon".into()));
    }
    if with_track {
        if scene.polygons.len() < 2 {
            return Err(Failure::Input("--rear-track needs two polygons".into()));
        }
        let pair = BicyclePair::new(scene.polygons[0].clone(), scene.polygons[1].clone(), tol)?;
        scene.track = Some(rear_track(&pair, tol)?);
    }
    if let Some(l) = ell {
        check_length(l)?;
        let v = &scene.polygons[0];
        let m = polygon_monodromy(v, l)?;
        if let Ok(FixedSet::Points(points)) = fixed_directions(&m, tol) {
            for p in points {
                let from = v.vertex(0).clone();
                let to = &from + &(Vector::polar(p.angle) * l);
                scene.arrows.push(svg::Arrow {
                    from,
                    to,
                    attracting: p.multiplier.abs() <= 1.0,
                });
            }
        }
    }
    let doc = svg::render(&scene);
    match output {
        Some(path) => std::fs::write(path, doc).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            out!("{doc}");
            Ok(())
        }
    }
}

// -------------------------------------------------------------------- ngon

#[derive(Serialize)]
struct NgonReport {
    tolerance: Tolerance,
    k: usize,
    residuals: NGonResiduals,
    verified: bool,
    polygon: Option<PolygonFile>,
}

fn print_ngon(report: &NgonReport, json: bool) {
    if json {
        print_json(report);
        return;
    }
    let r = &report.residuals;
    let mut t = Aligned::default();
    t.row("k", report.k)
        .row("side spread", sci(r.sides))
        .row("diagonal spread", sci(r.diagonals))
        .row("worst butterfly", format!("{} at index {}", sci(r.butterflies), r.worst_index))
        .row("tolerance", format!("{:e}", report.tolerance.eps_geom))
        .row("verdict", if report.verified { "bicycle (n,k)-gon" } else { "FAIL" });
    out!("{}", t.render());
}

fn ngon_verdict(v: &Polygon, k: usize, tol: &Tolerance) -> Result<(NGonResiduals, bool), Failure> {
    let r = ngon_residuals(v, k)?;
    Ok((r, r.max() <= tol.eps_geom))
}

fn cmd_ngon_build(spec: NGonSpec, output: Option<&Path>, tol: &Tolerance, json: bool) -> CmdResult {
    let v = ngon_construct(&spec)?;
    let (residuals, verified) = ngon_verdict(&v, spec.k, tol)?;
    let name = Some(format!("bicycle ({}, {})-gon r1={} r2={}", spec.n, spec.k, spec.r1, spec.r2));
    if let Some(path) = output {
        write_polygon(path, &v, name.clone())?;
    }
    let report = NgonReport {
        tolerance: *tol,
        k: spec.k,
        residuals,
        verified,
        polygon: Some(PolygonFile::from_polygon(&v, name)),
    };
    print_ngon(&report, json);
    if !json && output.is_none() {
        out!("{}", vertex_lines(&v));
    }
    if verified {
        Ok(())
    } else {
        Err(worst(&residuals))
    }
}

fn worst(r: &NGonResiduals) -> Failure {
    Failure::Verification(format!(
        "not a bicycle (n,k)-gon: worst residual {:e} (butterfly index {})",
        r.max(),
        r.worst_index
    ))
}

fn cmd_ngon_verify(input: &Path, k: usize, tol: &Tolerance, json: bool) -> CmdResult {
    let (v, _) = load(input)?;
    let (residuals, verified) = ngon_verdict(&v, k, tol)?;
    print_ngon(
        &NgonReport {
            tolerance: *tol,
            k,
            residuals,
            verified,
            polygon: None,
        },
        json,
    );
    if verified {
        Ok(())
    } else {
        Err(worst(&residuals))
    }
}

// -------------------------------------------------------------------- recut

#[derive(Serialize)]
struct RecutReport {
    tolerance: Tolerance,
    vertex: usize,
    butterfly_residual: f64,
    delta_area: f64,
    delta_j: f64,
    /// `(L, |Tr^2/det before - after|)`.
    delta_trace_sq_over_det: Vec<(f64, f64)>,
    polygon: PolygonFile,
}

fn cmd_recut(input: &Path, vertex: usize, ells: &[f64], output: Option<&Path>, tol: &Tolerance, json: bool) -> CmdResult {
    let (v, name) = load(input)?;
    if vertex >= v.len() {
        return Err(Failure::Input(format!("vertex {vertex} out of range for a {}-gon", v.len())));
    }
    let r = recut(&v, vertex)?;
    let i = vertex as isize;
    let residual = butterfly_residual(v.vertex(i - 1), v.vertex(i), v.vertex(i + 1), r.vertex(i))? / v.diameter();
    let mut deltas = Vec::new();
    for &l in ells {
        check_length(l)?;
        let a = polygon_monodromy(&v, l)?.trace_sq_over_det();
        let b = polygon_monodromy(&r, l)?.trace_sq_over_det();
        deltas.push((l, (a - b).abs()));
    }
    let name = name.map(|n| format!("{n} recut at {vertex}"));
    if let Some(path) = output {
        write_polygon(path, &r, name.clone())?;
    }
    let report = RecutReport {
        tolerance: *tol,
        vertex,
        butterfly_residual: residual,
        delta_area: area_bivector(&v).max_abs_diff(&area_bivector(&r)),
        delta_j: j_vector(&v).dist(&j_vector(&r)),
        delta_trace_sq_over_det: deltas,
        polygon: PolygonFile::from_polygon(&r, name),
    };
    if json {
        print_json(&report);
        return Ok(());
    }
    let mut t = Aligned::default();
    t.row("vertex", vertex)
        .row("butterfly residual", sci(report.butterfly_residual))
        .row("delta A", sci(report.delta_area))
        .row("delta J", sci(report.delta_j));
    for (l, d) in &report.delta_trace_sq_over_det {
        t.row(format!("delta Tr^2/det L={l}"), sci(*d));
    }
    t.row("tolerance", format!("{:e}", tol.eps_geom));
    out!("{}", t.render());
    if output.is_none() {
        outln!("vertices");
        out!("{}", vertex_lines(&r));
    }
    Ok(())
}

// --------------------------------------------------------------- rear track

#[derive(Serialize)]
struct RearTrackReport {
    tolerance: Tolerance,
    length: f64,
    radii: Vec<f64>,
    centers: Vec<Option<Vec<f64>>>,
    tangency_points: Vec<Vec<f64>>,
    interior_tangencies: usize,
    tangency_defect: f64,
    incidence_defect: f64,
    lambda_vw: Option<f64>,
    lambda_chain: Option<f64>,
}

fn cmd_rear_track(v: &Path, w: &Path, tol: &Tolerance, json: bool) -> CmdResult {
    let ((v, _), (w, _)) = (load(v)?, load(w)?);
    let pair = BicyclePair::new(v, w, tol)?;
    let track = rear_track(&pair, tol)?;
    let (lambda_vw, lambda_chain) = match eigenvalue_products(&pair, &track, tol) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(_) => (None, None),
    };
    let report = RearTrackReport {
        tolerance: *tol,
        length: pair.length,
        radii: track.radii(),
        centers: track
            .circles
            .iter()
            .map(|c| c.finite_center().map(|p| p.coords().to_vec()))
            .collect(),
        tangency_points: track.q.iter().map(|p| p.coords().to_vec()).collect(),
        interior_tangencies: track.interior_tangencies(),
        tangency_defect: track.tangency_defect(),
        incidence_defect: track.incidence_defect(),
        lambda_vw,
        lambda_chain,
    };
    if json {
        print_json(&report);
        return Ok(());
    }
    let mut t = Aligned::default();
    t.row("L", format!("{:.12}", report.length))
        .row("interior tangencies", report.interior_tangencies)
        .row("tangency defect", sci(report.tangency_defect))
        .row("incidence defect", sci(report.incidence_defect))
        .row("lambda (V, W)", report.lambda_vw.map_or("-".into(), |x| format!("{x:.12e}")))
        .row("lambda (chain)", report.lambda_chain.map_or("-".into(), |x| format!("{x:.12e}")))
        .row("tolerance", format!("{:e}", tol.eps_geom));
    out!("{}", t.render());
    outln!("circles (index i+1/2: radius, center)");
    for (i, (r, c)) in report.radii.iter().zip(&report.centers).enumerate() {
        let center = c.as_deref().map_or("line".into(), point);
        outln!("  {i:>3}  {r:>20.12}  {center}");
    }
    Ok(())
}

// ------------------------------------------------------------------ bianchi

#[derive(Serialize)]
struct BianchiReport {
    tolerance: Tolerance,
    length_vw: f64,
    length_vs: f64,
    /// `|S_i T_i|` should equal `|V W|`, `|W_i T_i|` should equal `|V S|`.
    length_st: Option<f64>,
    length_wt: Option<f64>,
    closure_defect_along_w: Option<f64>,
    polygon: PolygonFile,
}

fn cmd_bianchi(v: &Path, w: &Path, s: &Path, output: Option<&Path>, tol: &Tolerance, json: bool) -> CmdResult {
    let ((v, _), (w, _), (s, _)) = (load(v)?, load(w)?, load(s)?);
    let not_pair = |a: &str| Failure::Input(format!("V and {a} are not in bicycle correspondence"));
    let l_vw = correspondence_length(&v, &w, tol).ok_or_else(|| not_pair("W"))?;
    let l_vs = correspondence_length(&v, &s, tol).ok_or_else(|| not_pair("S"))?;
    let t = bianchi_fourth_polygon(&v, &w, &s, tol)?;
    let via_w = bicycle_core::dynamics::bianchi_fourth_polygon_via(&v, &w, &s, BianchiRoute::AlongW, tol)
        .ok()
        .map(|t2| t.max_vertex_distance(&t2));
    if let Some(path) = output {
        write_polygon(path, &t, Some("Bianchi fourth polygon".into()))?;
    }
    let report = BianchiReport {
        tolerance: *tol,
        length_vw: l_vw,
        length_vs: l_vs,
        length_st: correspondence_length(&s, &t, tol),
        length_wt: correspondence_length(&w, &t, tol),
        closure_defect_along_w: via_w,
        polygon: PolygonFile::from_polygon(&t, None),
    };
    let scale = v.diameter() + l_vw + l_vs;
    let ok = |x: Option<f64>, want: f64| x.is_some_and(|x| (x - want).abs() <= tol.eps_geom * scale);
    let verified = ok(report.length_st, l_vw) && ok(report.length_wt, l_vs);
    if json {
        print_json(&report);
    } else {
        let opt = |x: Option<f64>| x.map_or("not a bicycle pair".into(), |x| format!("{x:.12}"));
        let mut tab = Aligned::default();
        tab.row("|VW|", format!("{l_vw:.12}"))
            .row("|VS|", format!("{l_vs:.12}"))
            .row("|ST|", opt(report.length_st))
            .row("|WT|", opt(report.length_wt))
            .row("T via W vs via S", report.closure_defect_along_w.map_or("-".into(), sci))
            .row("tolerance", format!("{:e}", tol.eps_geom));
        out!("{}", tab.render());
        if output.is_none() {
            outln!("vertices");
            out!("{}", vertex_lines(&t));
        }
    }
    if verified {
        Ok(())
    } else {
        Err(Failure::Verification("the fourth polygon does not close the Bianchi quadrilateral".into()))
    }
}
