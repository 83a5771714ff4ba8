use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use string_billiard::io::{self, Metadata};
use string_billiard::stability::{analyze, finite_difference_monodromy, StabilityAnalysis};
use string_billiard::*;

use crate::batch::BatchConfig;
use crate::svg::{color, Figure};
use crate::*;

type Res<T> = std::result::Result<T, Failure>;

fn num<T>(op: &'static str, r: string_billiard::Result<T>) -> Res<T> {
    r.map_err(|err| Failure::Numeric { op, err })
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Writes the outputs of one run; relative paths go under `--out-dir`.
struct Sink<'a> {
    cli: &'a Cli,
    meta: Metadata,
}

impl Sink<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.cli.out_dir.join(p)
        }
    }

    fn write(&self, p: &Path, bytes: &[u8]) -> Res<()> {
        let path = self.path(p);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_failure(&path, e))
    }

    fn with<F>(&self, p: &Option<PathBuf>, fill: F) -> Res<()>
    where
        F: FnOnce(&mut Vec<u8>, &Metadata) -> string_billiard::Result<()>,
    {
        let Some(p) = p else { return Ok(()) };
        let mut buf = Vec::new();
        fill(&mut buf, &self.meta).map_err(|e| io_failure(p, e))?;
        self.write(p, &buf)
    }

    fn json<T: Serialize>(&self, p: &Option<PathBuf>, kind: &str, data: &T) -> Res<()> {
        self.with(p, |buf, meta| io::write_json(buf, meta, kind, data))
    }

    fn svg(&self, p: &Option<PathBuf>, fig: impl FnOnce() -> Figure) -> Res<()> {
        match p {
            Some(p) => self.write(p, fig().finish().as_bytes()),
            None => Ok(()),
        }
    }
}

fn sink<'a>(cli: &'a Cli, config: serde_json::Value, seed: Option<u64>) -> Sink<'a> {
    Sink {
        cli,
        meta: Metadata::new(cli.command.name(), config, seed),
    }
}

fn echo<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn build(args: &TableArgs) -> Res<StringTable> {
    let frame = match args.frame {
        FrameArg::Auto if args.n == 6 => Frame::HexagonCanonical,
        FrameArg::Auto | FrameArg::Generic => Frame::Generic,
        FrameArg::Hexagon => Frame::HexagonCanonical,
    };
    build_table(args.n, frame).map_err(|e| usage(format!("--n {}: {e}", args.n)))
}

fn table_of(id: TableId) -> Res<StringTable> {
    build_table(id.n, id.frame).map_err(|e| usage(format!("input names an invalid table: {e}")))
}

fn read_input(path: &Path) -> Res<Vec<u8>> {
    fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_trajectory(path: &Path) -> Res<Trajectory> {
    let bytes = read_input(path)?;
    let (_, t) = io::read_json(bytes.as_slice(), "trajectory").map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(t)
}

pub fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Table(c) => table(cli, c),
        Command::Trace(c) => trace_cmd(cli, c),
        Command::Classify(c) => classify(cli, c),
        Command::Periodic(c) => periodic(cli, c),
        Command::Stability(c) => stability(cli, c),
        Command::Forbidden(c) => forbidden(cli, c),
        Command::Sos(c) => sos(cli, c),
        Command::Focal(c) => focal(cli, c),
    }
}

#[derive(Serialize)]
struct TableReport<'a> {
    table: &'a StringTable,
    smoothness: table::SmoothnessReport,
    curvature_min: f64,
    curvature_max: f64,
}

fn table(cli: &Cli, c: &TableCmd) -> Res<()> {
    let t = build(&c.table)?;
    let smoothness = verify_c2(&t, 1e-10, 1e-9);
    let (lo, hi) = num("curvature_range", curvature_range(&t, 2000))?;
    println!(
        "n = {}, l = {}, L = {:.15}, curvature in [{lo:.15}, {hi:.15}], C² {}",
        t.n,
        t.string_length,
        t.boundary_length,
        if smoothness.pass { "verified" } else { "FAILED" }
    );
    let out = sink(cli, echo(c), None);
    out.json(
        &c.json,
        "table",
        &TableReport {
            table: &t,
            smoothness,
            curvature_min: lo,
            curvature_max: hi,
        },
    )?;
    out.svg(&c.svg, || {
        let mut fig = Figure::table(&t, &format!("string table, n = {}", t.n));
        for a in &t.apexes {
            fig.dot(*a, 3.0, "#d62728");
        }
        fig
    })
}

fn pair(v: &[f64]) -> Vec2 {
    Vec2::new(v[0], v[1])
}

fn trace_cmd(cli: &Cli, c: &TraceCmd) -> Res<()> {
    let t = build(&c.table)?;
    let traj = match (c.s, c.theta, &c.start, &c.direction) {
        (Some(s), Some(theta), _, _) => num("trace_from_boundary", trace_from_boundary(&t, s, theta, c.bounces))?,
        (_, _, Some(p), Some(d)) if c.focal => num("trace_focal", trace_focal(&t, pair(p), pair(d), c.bounces))?,
        (_, _, Some(p), Some(d)) => num("trace", trace(&t, pair(p), pair(d), c.bounces))?,
        _ => return Err(usage("give either --s and --theta or --start and --direction")),
    };
    if let Some(last) = traj.bounces.last() {
        println!(
            "{} bounces, last impact s = {:.15}, theta = {:.15}",
            traj.bounces.len(),
            last.at.s,
            last.theta
        );
    }
    let out = sink(cli, echo(c), None);
    out.with(&c.csv, |buf, meta| io::write_bounce_csv(buf, meta, &traj))?;
    out.json(&c.json, "trajectory", &traj)?;
    out.svg(&c.svg, || {
        let mut fig = Figure::table(&t, &format!("trajectory, {} bounces", traj.bounces.len()));
        fig.polyline(&traj.points(), color(0), 0.6);
        fig.dot(traj.start, 3.0, color(1));
        fig
    })
}

#[derive(Serialize)]
struct ClassifyReport {
    class: OrbitClass,
    focal: Option<FocalConvergenceSeries>,
}

fn classify(cli: &Cli, c: &ClassifyCmd) -> Res<()> {
    if !(c.tol_support > 0.0) {
        return Err(usage("--tol-support must be positive"));
    }
    let traj = read_trajectory(&c.trajectory)?;
    let t = table_of(traj.table)?;
    let class = num("classify_orbit", classify_orbit(&traj, &t.polygon(), c.tol_support))?;
    let focal = (class.tag == OrbitTag::Focal && t.n == 6)
        .then(|| focal_convergence(&t, &traj).ok())
        .flatten();
    let [sup, int, dis] = class.histogram;
    println!("{:?}: {sup} supporting, {int} intersecting, {dis} disjoint chords", class.tag);
    if let Some(f) = &focal {
        match f.converged_at {
            Some(i) => println!("focal convergence at bounce {i}, Hausdorff distance {:.3e}", f.hausdorff_to_triangle),
            None => println!("focal series of {} bounces, not converged", f.len()),
        }
    }
    sink(cli, echo(c), None).json(&c.json, "classification", &ClassifyReport { class, focal })
}

fn with_stability(t: &StringTable, mut o: PeriodicOrbit) -> Res<PeriodicOrbit> {
    if o.stability.is_none() {
        let m = num("deviation_matrix", deviation_matrix(t, &o))?;
        o.stability = Some(num("stability_class", stability_class(&m, stability::TOL_NEUTRAL))?);
    }
    Ok(o)
}

fn periodic(cli: &Cli, c: &PeriodicCmd) -> Res<()> {
    let t = build(&c.table)?;
    let mode = format!("{:?}", c.mode).to_lowercase();
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--mode {mode} needs {flag}")));
    let mut census = None;
    let orbits = match c.mode {
        PeriodicMode::Symmetric => vec![num("symmetric_orbit", symmetric_orbit(&t, need(c.rotation, "--rotation")?))?],
        PeriodicMode::Birkhoff => {
            let (a, b) = num(
                "birkhoff_pair",
                birkhoff_pair(&t, need(c.period, "--period")?, need(c.rotation, "--rotation")?),
            )?;
            vec![a, b]
        }
        PeriodicMode::Search => {
            let (n, k) = (need(c.period, "--period")?, need(c.rotation, "--rotation")?);
            let seed = rotation_seed(&t, n, k, c.seed_s);
            vec![num("find_periodic_orbit", find_periodic_orbit(&t, n, k, &seed))?]
        }
        PeriodicMode::Census => {
            let cs = num(
                "orbit_census",
                orbit_census(&t, need(c.period, "--period")?, c.grid, c.random, c.seed),
            )?;
            let classes = cs.classes.clone();
            census = Some(cs);
            classes
        }
        PeriodicMode::Resonant => {
            let (n, k) = (need(c.period, "--period")?, need(c.rotation, "--rotation")?);
            let (a, b) = num("birkhoff_pair", birkhoff_pair(&t, n, k))?;
            let base = [a, b]
                .into_iter()
                .find(|o| o.stability.is_some_and(|r| r.tag == StabilityTag::Stable))
                .ok_or_else(|| Failure::Numeric {
                    op: "find_resonant_orbit",
                    err: Error::SearchFailure(format!("no stable ({n}, {k}) orbit to surround")),
                })?;
            vec![num("find_resonant_orbit", find_resonant_orbit(&t, &base, c.order))?]
        }
    };
    let orbits: Vec<PeriodicOrbit> = orbits.into_iter().map(|o| with_stability(&t, o)).collect::<Res<_>>()?;
    for o in &orbits {
        let r = o.stability.expect("attached above");
        println!(
            "({}, {}) perimeter {:.15}, Tr M = {:.16}, {:?}",
            o.n, o.k, o.perimeter, r.trace, r.tag
        );
    }
    let seed = (c.mode == PeriodicMode::Census).then_some(c.seed);
    let out = sink(cli, echo(c), seed);
    match &mut census {
        Some(cs) => {
            println!("census: {} orbits in {} classes, formula {}", cs.total, cs.classes.len(), cs.formula);
            cs.classes = orbits.clone();
            out.json(&c.json, "census", cs)?;
        }
        None => out.json(&c.json, "orbits", &orbits)?,
    }
    out.svg(&c.svg, || {
        let mut fig = Figure::table(&t, &format!("periodic orbits, mode {mode}"));
        for (i, o) in orbits.iter().enumerate() {
            let mut pts: Vec<Vec2> = o.points.iter().map(|p| p.point).collect();
            pts.push(pts[0]);
            fig.polyline(&pts, color(i), 1.0);
        }
        fig
    })
}

fn read_orbits(path: &Path) -> Res<Vec<PeriodicOrbit>> {
    let bytes = read_input(path)?;
    let bad = |e: Error| usage(format!("{}: {e}", path.display()));
    #[derive(Deserialize)]
    struct Kind {
        kind: String,
    }
    let kind: Kind = serde_json::from_slice(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    match kind.kind.as_str() {
        "orbits" => Ok(io::read_json(bytes.as_slice(), "orbits").map_err(bad)?.1),
        "orbit" => Ok(vec![io::read_json(bytes.as_slice(), "orbit").map_err(bad)?.1]),
        "census" => {
            let (_, c): (_, OrbitCensus) = io::read_json(bytes.as_slice(), "census").map_err(bad)?;
            Ok(c.classes)
        }
        k => Err(usage(format!("{}: expected an orbit file, found `{k}`", path.display()))),
    }
}

#[derive(Serialize)]
struct StabilityEntry {
    n: usize,
    k: usize,
    analysis: StabilityAnalysis,
    finite_difference: Option<DeviationMatrix>,
    finite_difference_gap: Option<f64>,
}

fn stability(cli: &Cli, c: &StabilityCmd) -> Res<()> {
    if !(c.tol_neutral > 0.0) || c.fd_step.is_some_and(|h| !(h > 0.0)) {
        return Err(usage("tolerances and steps must be positive"));
    }
    let orbits = read_orbits(&c.orbit)?;
    let mut entries = Vec::with_capacity(orbits.len());
    for o in &orbits {
        let t = table_of(o.table)?;
        let analysis = num("analyze", analyze(&t, o, c.tol_neutral))?;
        let fd = match c.fd_step {
            Some(h) => Some(num("finite_difference_monodromy", finite_difference_monodromy(&t, o, h))?),
            None => None,
        };
        let gap = fd.map(|m| m.max_abs_diff(&analysis.matrix));
        let r = &analysis.report;
        print!("({}, {}) Tr M = {:.16}, det = {:.16}, {:?}", o.n, o.k, r.trace, r.det, r.tag);
        match gap {
            Some(g) => println!(", finite-difference gap {g:.3e}"),
            None => println!(),
        }
        entries.push(StabilityEntry {
            n: o.n,
            k: o.k,
            analysis,
            finite_difference: fd,
            finite_difference_gap: gap,
        });
    }
    sink(cli, echo(c), None).json(&c.json, "stability", &entries)
}

#[derive(Serialize)]
struct RegionReport {
    region: ForbiddenRegion,
    area: f64,
    caustic: CausticReport,
}

fn forbidden(cli: &Cli, c: &ForbiddenCmd) -> Res<()> {
    if !(c.caustic_tol > 0.0) {
        return Err(usage("--caustic-tol must be positive"));
    }
    let traj = read_trajectory(&c.trajectory)?;
    let t = table_of(traj.table)?;
    let orientation = match c.orientation {
        OrientationArg::Auto => Orientation::Auto,
        OrientationArg::Ccw => Orientation::Ccw,
        OrientationArg::Cw => Orientation::Cw,
    };
    let region = num("forbidden_region", forbidden_region(&t, &traj, orientation))?;
    let caustic = is_caustic(&region.polygon, &traj, c.caustic_tol);
    let area = region.polygon.area();
    println!(
        "region: {} vertices, area {area:.12}, {} chords, caustic: {}",
        region.polygon.vertices.len(),
        region.segment_count,
        caustic.is_caustic
    );
    let out = sink(cli, echo(c), None);
    out.svg(&c.svg, || {
        let mut fig = Figure::table(&t, "forbidden region");
        fig.polyline(&traj.points(), color(0), 0.4);
        fig.polygon(&region.polygon.vertices, color(1), color(1), 1.0, None);
        fig
    })?;
    out.json(&c.json, "region", &RegionReport { region, area, caustic })
}

#[derive(Serialize)]
struct SosReport {
    table: TableId,
    bounces: usize,
    reduction: Reduction,
    points: usize,
    /// Thickness threshold `10⁻³ L` for an orbit lying on a curve.
    limit: f64,
    max_thickness: f64,
    all_thin: bool,
    thickness: Vec<ThicknessReport>,
}

fn sos(cli: &Cli, c: &SosCmd) -> Res<()> {
    let t = build(&c.table)?;
    let text = fs::read_to_string(&c.batch).map_err(|e| usage(format!("{}: {e}", c.batch.display())))?;
    let cfg = BatchConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", c.batch.display())))?;
    let bounces = c.bounces.or(cfg.bounces).unwrap_or(480);
    let reduction = match c.reduction {
        Some(ReductionArg::Full) => Reduction::Full,
        Some(ReductionArg::UpperHalf) => Reduction::UpperHalf,
        Some(ReductionArg::Fundamental) => Reduction::Fundamental,
        None => cfg.reduction.unwrap_or(Reduction::Full),
    };
    let starts = cfg.starts(t.boundary_length);
    let trajs: Vec<Trajectory> = num(
        "trace_from_boundary",
        starts
            .par_iter()
            .map(|p| trace_from_boundary(&t, p.s, p.theta, bounces))
            .collect(),
    )?;
    let section = num("build_section", sos::build_section(&t, &trajs, reduction))?;
    let thickness: Vec<ThicknessReport> = trajs
        .par_iter()
        .map(|tr| {
            let pts: Vec<(f64, f64)> = tr.bounces.iter().map(|b| (b.at.s, b.theta)).collect();
            curve_thickness(&pts, t.boundary_length, sos::THICKNESS_WINDOW)
        })
        .collect();
    let limit = 1e-3 * t.boundary_length;
    let max_thickness = thickness
        .iter()
        .filter(|r| !r.periodic)
        .fold(0.0, |m: f64, r| m.max(r.max_thickness));
    println!(
        "{} trajectories x {bounces} bounces, {} section points, max thickness {max_thickness:.3e} (limit {limit:.3e})",
        trajs.len(),
        section.len()
    );
    let config = serde_json::json!({ "args": echo(c), "batch": echo(&cfg) });
    let out = sink(cli, config, Some(cfg.seed));
    out.with(&c.csv, |buf, meta| io::write_section_csv(buf, meta, &section))?;
    out.svg(&c.svg, || {
        let mut fig = Figure::section(section.s_period(), &format!("surface of section, {} orbits", trajs.len()));
        for id in section.trajectory_ids() {
            let pts: Vec<Vec2> = section.trajectory(id).into_iter().map(|(s, th)| Vec2::new(s, th)).collect();
            fig.scatter(&pts, 0.8, color(id));
        }
        fig
    })?;
    out.json(
        &c.json,
        "sos",
        &SosReport {
            table: TableId::from(&t),
            bounces,
            reduction,
            points: section.len(),
            limit,
            max_thickness,
            all_thin: max_thickness < limit,
            thickness,
        },
    )
}

#[derive(Serialize)]
struct FocalReport {
    count: usize,
    bounces: usize,
    curve: FocalCurve,
    fit: FocalCurveMatch,
    converged: usize,
    series: Vec<FocalConvergenceSeries>,
}

fn focal(cli: &Cli, c: &FocalCmd) -> Res<()> {
    if c.count == 0 {
        return Err(usage("--count must be positive"));
    }
    let t = num("build_table", build_table(6, Frame::HexagonCanonical))?;
    let f2 = t.foci[1];
    let trajs: Vec<Trajectory> = num(
        "trace_focal",
        (0..c.count)
            .map(|i| {
                let y = -1.7 + 3.4 * (i as f64 + 0.5) / c.count as f64;
                trace_focal(&t, f2, (Vec2::new(4.0, y) - f2).normalize(), c.bounces)
            })
            .collect(),
    )?;
    let section = num("build_section", sos::build_section(&t, &trajs, Reduction::Full))?;
    let curve = num("FocalCurve", FocalCurve::for_table(&t))?;
    let fit = match_focal_curve(&section, &curve);
    let series: Vec<FocalConvergenceSeries> = trajs.iter().filter_map(|tr| focal_convergence(&t, tr).ok()).collect();
    let converged = series.iter().filter(|s| s.converged_at.is_some()).count();
    println!(
        "{} focal trajectories, {} section points, curve residual {:.3e} at offset {:.3e}, {converged} converged",
        trajs.len(),
        fit.point_count,
        fit.max_residual,
        fit.offset
    );
    let out = sink(cli, echo(c), None);
    out.with(&c.csv, |buf, meta| io::write_section_csv(buf, meta, &section))?;
    out.svg(&c.svg, || {
        let mut fig = Figure::section(t.boundary_length, "focal orbits and the analytic curve");
        let pts: Vec<Vec2> = section.points.iter().map(|p| Vec2::new(p.s, p.theta)).collect();
        fig.scatter(&pts, 0.8, color(0));
        let samples = curve.samples(200);
        for j in 0..=6 {
            let mid = fit.offset + j as f64 * curve.period;
            for (sign, flip) in [(1.0, false), (-1.0, false), (1.0, true), (-1.0, true)] {
                let branch: Vec<Vec2> = samples
                    .iter()
                    .map(|&(u, th)| Vec2::new(mid + sign * u, if flip { PI - th } else { th }))
                    .filter(|p| p.x >= 0.0 && p.x <= t.boundary_length)
                    .collect();
                fig.polyline(&branch, color(1), 0.8);
            }
        }
        fig
    })?;
    out.svg(&c.orbit_svg, || {
        let mut fig = Figure::table(&t, "focal trajectory");
        fig.polyline(&trajs[0].points(), color(0), 0.6);
        fig
    })?;
    out.json(
        &c.json,
        "focal",
        &FocalReport {
            count: c.count,
            bounces: c.bounces,
            curve,
            fit,
            converged,
            series,
        },
    )
}
