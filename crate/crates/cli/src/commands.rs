use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use gutkin_core::billiard2d::{
    self, constant_angle_line, orbit_chords, reduce_angle, rigidity_integral, rigidity_integral_closed,
    verify_constant_angle, write_orbit_csv, OrientedLine2D, Strip,
};
use gutkin_core::billiard_nd::{
    self, constant_angle_line_nd, gauss_inverse, gradient_contract_residual, orbit_nd, twist_jacobian_min_sv,
    write_orbit_csv_nd, EllipsoidSpec, Quadric, MAX_CLI_DIM,
};
use gutkin_core::chords::{
    angle_condition_residuals, chord_correspondence, planarity_residuals, simultaneous_vanish_check, write_chord_csv,
};
use gutkin_core::geodesic::{frenet_apparatus, integrate_geodesic, Ellipsoid, ImplicitSurface, Sphere, Vec3};
use gutkin_core::gutkin::{build_gutkin_table, solve_gutkin_angles};
use gutkin_core::support::SupportCurve;
use gutkin_core::table_file::TableFile;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{ChordArgs, Cli, Command, PlanarStart, SurfaceKind};

/// Threshold shared by the verification commands.
const VERIFY_TOL: f64 = 1e-6;
/// Threshold for the nD gradient contract.
const GRADIENT_TOL: f64 = 1e-7;

pub struct Report {
    pub ok: bool,
    pub text: String,
    pub summary: Value,
    /// A data file went to stdout, so the text report goes to stderr.
    pub stdout_taken: bool,
}

impl Report {
    fn new(command: &str, ok: bool, text: String, mut summary: Value) -> Self {
        summary["command"] = json!(command);
        summary["ok"] = json!(ok);
        Self {
            ok,
            text,
            summary,
            stdout_taken: false,
        }
    }

    pub fn print(&self, json: bool) {
        if json {
            println!("{}", self.summary);
        } else if self.stdout_taken {
            eprint!("{}", self.text);
        } else {
            print!("{}", self.text);
        }
    }
}

/// File sink, or stdout when no path is given (not allowed together with `--json`).
fn sink(path: Option<&Path>, json: bool) -> Result<(Box<dyn Write>, bool)> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Ok((Box::new(BufWriter::new(f)), false))
        }
        None => {
            ensure!(!json, "--json needs an output path for the data file");
            Ok((Box::new(BufWriter::new(io::stdout().lock())), true))
        }
    }
}

fn load_table(path: &Path) -> Result<TableFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(TableFile::from_json(&text)?)
}

fn load_quadric(path: &Path) -> Result<Quadric> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let spec: EllipsoidSpec =
        serde_json::from_str(&text).with_context(|| format!("bad ellipsoid spec {}", path.display()))?;
    ensure!(
        (2..=MAX_CLI_DIM).contains(&spec.d),
        "dimension {} outside 2..={MAX_CLI_DIM}",
        spec.d
    );
    Ok(spec.quadric()?)
}

fn check_angle(name: &str, delta: f64) -> Result<()> {
    ensure!(
        delta > 0.0 && delta <= FRAC_PI_2,
        "{name} = {delta} must lie in (0, π/2]"
    );
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Roots { n } => roots(*n),
        Command::Table {
            n,
            root_index,
            a0,
            an,
            out,
        } => table(*n, *root_index, *a0, *an, out.as_deref(), cli.json),
        Command::Verify { table, delta, grid } => verify(table, *delta, *grid as usize),
        Command::Orbit {
            table,
            start,
            steps,
            out,
        } => orbit(table, start, *steps as usize, out.as_deref(), cli.json),
        Command::PhasePortrait {
            table,
            p_grid,
            phi_grid,
            steps,
            out_csv,
            out_svg,
        } => phase_portrait(
            table,
            *p_grid as usize,
            *phi_grid as usize,
            *steps as usize,
            out_csv.as_deref(),
            out_svg.as_deref(),
            cli.json,
        ),
        Command::Rigidity {
            table,
            delta1,
            delta2,
            order,
        } => rigidity(table, *delta1, *delta2, *order as usize),
        Command::Ellipsoid {
            spec,
            delta,
            steps,
            out,
        } => ellipsoid(spec, *delta, *steps as usize, out.as_deref(), cli.json, cli.seed),
        Command::GradientCheck { spec, pairs } => gradient_check(spec, *pairs as usize, cli.seed),
        Command::Chords(args) => chords(args, cli.json, cli.seed),
    }
}

fn roots(n: usize) -> Result<Report> {
    let roots = solve_gutkin_angles(n)?;
    let text: String = roots.iter().map(|r| format!("{r}\n")).collect();
    Ok(Report::new("roots", true, text, json!({ "n": n, "roots": roots })))
}

fn table(n: Option<usize>, root_index: usize, a0: f64, an: f64, out: Option<&Path>, json: bool) -> Result<Report> {
    let file = match n {
        Some(n) => TableFile::from_table(&build_gutkin_table(n, root_index, a0, an)?),
        None => {
            ensure!(an == 0.0, "--an needs --n");
            TableFile::from_curve(&SupportCurve::circle(a0)?)
        }
    };
    let (mut w, taken) = sink(out, json)?;
    writeln!(w, "{}", file.to_json())?;
    w.flush()?;
    let delta = file.gutkin.map(|g| g.delta);
    let text = match delta {
        Some(d) => format!("table n = {}, delta = {d}\n", n.unwrap_or(0)),
        None => format!("circle of radius {a0}\n"),
    };
    let mut r = Report::new(
        "table",
        true,
        text,
        json!({ "n": n, "a0": a0, "an": an, "delta": delta }),
    );
    r.stdout_taken = taken;
    Ok(r)
}

fn verify(path: &Path, delta: Option<f64>, grid: usize) -> Result<Report> {
    let file = load_table(path)?;
    let recorded = file.gutkin_table()?.map(|t| t.delta);
    let delta = delta
        .or(recorded)
        .ok_or_else(|| anyhow!("table has no recorded angle; pass --delta"))?;
    check_angle("delta", delta)?;
    let curve = file.curve()?;
    let residual = verify_constant_angle(&curve, delta, grid)?;
    let ok = residual < VERIFY_TOL;
    let text = format!(
        "delta = {delta}\nmax arrival-angle error = {residual:e} ({})\n",
        if ok { "ok" } else { "FAILED" }
    );
    Ok(Report::new(
        "verify",
        ok,
        text,
        json!({ "delta": delta, "grid": grid, "max_residual": residual, "tolerance": VERIFY_TOL }),
    ))
}

fn start_line(curve: &SupportCurve, start: &PlanarStart) -> Result<OrientedLine2D> {
    match (start.p, start.phi, start.delta, start.psi) {
        (Some(p), Some(phi), None, None) => Ok(OrientedLine2D::new(p, phi)),
        (None, None, Some(delta), Some(psi)) => {
            check_angle("delta", delta)?;
            Ok(constant_angle_line(curve, delta, psi))
        }
        _ => bail!("give either --p and --phi, or --delta and --psi"),
    }
}

fn orbit(path: &Path, start: &PlanarStart, steps: usize, out: Option<&Path>, json: bool) -> Result<Report> {
    let curve = load_table(path)?.curve()?;
    let line = start_line(&curve, start)?;
    let chords = orbit_chords(&curve, line, steps)?;
    let (mut w, taken) = sink(out, json)?;
    write_orbit_csv(&mut w, &chords, true)?;
    w.flush()?;
    let law = billiard2d::billiard_law_residual(&chords);
    let text = format!("{} chords, reflection-law residual {law:e}\n", chords.len());
    let mut r = Report::new(
        "orbit",
        true,
        text,
        json!({ "p": line.p, "phi": line.phi, "steps": steps, "reflection_residual": law }),
    );
    r.stdout_taken = taken;
    Ok(r)
}

fn phase_portrait(
    path: &Path,
    p_grid: usize,
    phi_grid: usize,
    steps: usize,
    out_csv: Option<&Path>,
    out_svg: Option<&Path>,
    json: bool,
) -> Result<Report> {
    let curve = load_table(path)?.curve()?;
    let starts: Vec<OrientedLine2D> = (0..phi_grid)
        .flat_map(|j| (0..p_grid).map(move |i| (j, i)))
        .map(|(j, i)| {
            let phi = TAU * j as f64 / phi_grid as f64;
            let (hi, lo) = (curve.eval_support(phi).0, -curve.eval_support(phi + PI).0);
            OrientedLine2D::new(lo + (i as f64 + 0.5) / p_grid as f64 * (hi - lo), phi)
        })
        .collect();
    // Collecting an indexed parallel iterator keeps grid order.
    let orbits: Vec<_> = starts.par_iter().map(|l| orbit_chords(&curve, *l, steps)).collect();
    let mut kept = Vec::with_capacity(orbits.len());
    let mut skipped = 0;
    for (idx, o) in orbits.into_iter().enumerate() {
        match o {
            Ok(c) => kept.push(c),
            Err(e) => {
                log::warn!("orbit {idx} skipped: {e}");
                skipped += 1;
            }
        }
    }
    let (mut w, taken) = sink(out_csv, json)?;
    writeln!(w, "{}", billiard2d::ORBIT_CSV_HEADER)?;
    for chords in &kept {
        write_orbit_csv(&mut w, chords, false)?;
    }
    w.flush()?;
    if let Some(svg_path) = out_svg {
        let points: Vec<(f64, f64)> = kept
            .iter()
            .flatten()
            .map(|c| (reduce_angle(c.line.phi), c.line.p))
            .collect();
        fs::write(svg_path, crate::svg::scatter(&points))
            .with_context(|| format!("cannot write {}", svg_path.display()))?;
    }
    let text = format!("{} orbits of {steps} steps, {skipped} skipped\n", kept.len());
    let mut r = Report::new(
        "phase-portrait",
        true,
        text,
        json!({ "orbits": kept.len(), "skipped": skipped, "steps": steps }),
    );
    r.stdout_taken = taken;
    Ok(r)
}

fn rigidity(path: &Path, delta1: f64, delta2: f64, order: usize) -> Result<Report> {
    let curve = load_table(path)?.curve()?;
    let strip = Strip::new(delta1, delta2)?;
    let quad = rigidity_integral(&curve, strip, order)?;
    let closed = rigidity_integral_closed(&curve, strip);
    // Relative gap, or absolute when the closed form vanishes (circles).
    let gap = if closed.abs() > 1e-10 {
        (quad - closed).abs() / closed.abs()
    } else {
        (quad - closed).abs()
    };
    let ok = gap < VERIFY_TOL;
    let text = format!("quadrature  = {quad:.17e}\nclosed form = {closed:.17e}\ngap         = {gap:e}\n");
    Ok(Report::new(
        "rigidity",
        ok,
        text,
        json!({ "delta1": delta1, "delta2": delta2, "quadrature": quad, "closed_form": closed, "gap": gap }),
    ))
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let x = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let n = x.norm();
        if n > 0.1 && n <= 1.0 {
            return x / n;
        }
    }
}

fn ellipsoid(spec: &Path, delta: f64, steps: usize, out: Option<&Path>, json: bool, seed: u64) -> Result<Report> {
    let q = load_quadric(spec)?;
    check_angle("delta", delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = random_unit(&mut rng, q.dim());
    let hint = random_unit(&mut rng, q.dim());
    let line = constant_angle_line_nd(&q, delta, &nu, &hint)?;
    let bounces = orbit_nd(&q, &line, steps)?;
    let (mut w, taken) = sink(out, json)?;
    write_orbit_csv_nd(&mut w, &q, &line, &bounces)?;
    w.flush()?;
    let surface = bounces.iter().map(|b| q.level(&b.point).abs()).fold(0.0, f64::max);
    let angle = billiard_nd::constant_angle_residual_nd(&q, delta, &line, steps)?;
    let text = format!(
        "d = {}, {steps} bounces\nmax quadric residual = {surface:e}\nmax |incidence - delta| = {angle:e}\n",
        q.dim()
    );
    let mut r = Report::new(
        "ellipsoid",
        true,
        text,
        json!({ "d": q.dim(), "delta": delta, "steps": steps, "seed": seed,
                "quadric_residual": surface, "angle_residual": angle }),
    );
    r.stdout_taken = taken;
    Ok(r)
}

fn gradient_check(spec: &Path, pairs: usize, seed: u64) -> Result<Report> {
    let q = load_quadric(spec)?;
    let d = q.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Near-coincident pairs are grazing chords where the differences lose accuracy.
    let inputs: Vec<(DVector<f64>, DVector<f64>)> = (0..pairs)
        .map(|_| loop {
            let (a, b) = (random_unit(&mut rng, d), random_unit(&mut rng, d));
            if (&a - &b).norm() >= 0.05 {
                break (a, b);
            }
        })
        .collect();
    let results: Vec<_> = inputs
        .par_iter()
        .map(|(a, b)| -> gutkin_core::Result<_> {
            Ok((gradient_contract_residual(&q, a, b)?, twist_jacobian_min_sv(&q, a, b)?))
        })
        .collect::<gutkin_core::Result<_>>()?;
    let (mut r1, mut r2, mut gap, mut sv) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for (g, s) in &results {
        r1 = r1.max(g.r1);
        r2 = r2.max(g.r2);
        gap = gap.max(g.analytic_gap);
        sv = sv.min(*s);
    }
    let ok = r1 < GRADIENT_TOL && r2 < GRADIENT_TOL && gap < GRADIENT_TOL && sv > 0.0;
    let text = format!(
        "{pairs} pairs in d = {d}\nmax |D1S - m1| = {r1:e}\nmax |D2S + m2| = {r2:e}\nprojection gap = {gap:e}\nmin twist singular value = {sv:e}\n"
    );
    Ok(Report::new(
        "gradient-check",
        ok,
        text,
        json!({ "d": d, "pairs": pairs, "seed": seed, "r1": r1, "r2": r2,
                "analytic_gap": gap, "min_twist_sv": sv, "tolerance": GRADIENT_TOL }),
    ))
}

fn tangent_at(rng: &mut ChaCha8Rng, normal: &Vec3) -> Vec3 {
    loop {
        let x = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let t = x - x.dot(normal) * normal;
        if t.norm() > 0.1 {
            return t.normalize();
        }
    }
}

fn to_vec3(v: &DVector<f64>) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

fn chords(args: &ChordArgs, json: bool, seed: u64) -> Result<Report> {
    check_angle("delta", args.delta)?;
    ensure!(args.step > 0.0, "--step must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (surface, x0, v0): (Box<dyn ImplicitSurface>, Vec3, Vec3) = match args.surface {
        SurfaceKind::Sphere => {
            let s = Sphere::new(args.radius)?;
            let (x0, v0) = if args.principal {
                (Vec3::x() * args.radius, Vec3::y())
            } else {
                let nu = to_vec3(&random_unit(&mut rng, 3));
                (nu * args.radius, tangent_at(&mut rng, &nu))
            };
            (Box::new(s), x0, v0)
        }
        SurfaceKind::Ellipsoid => {
            let path = args
                .spec
                .as_deref()
                .ok_or_else(|| anyhow!("--surface ellipsoid needs --spec"))?;
            let q = load_quadric(path)?;
            let e = Ellipsoid::from_quadric(&q)?;
            let (x0, v0) = if args.principal {
                // A principal plane is a symmetry plane, so the geodesic stays in it.
                let eig = e.matrix().symmetric_eigen();
                let (a1, a2) = (
                    eig.eigenvectors.column(0).into_owned(),
                    eig.eigenvectors.column(1).into_owned(),
                );
                (a1 * eig.eigenvalues[0].sqrt(), a2)
            } else {
                let nu = random_unit(&mut rng, 3);
                let x0 = to_vec3(&gauss_inverse(&q, &nu)?);
                (x0, tangent_at(&mut rng, &e.gradient(&x0).normalize()))
            };
            (Box::new(e), x0, v0)
        }
    };
    let length = args.length.unwrap_or(PI * surface.diameter());
    let traj = integrate_geodesic(surface.as_ref(), x0, v0, length, args.step)?;
    let frenet = frenet_apparatus(&traj)?;
    let cc = chord_correspondence(surface.as_ref(), &traj, args.delta)?;
    let (mut w, taken) = sink(args.out.as_deref(), json)?;
    write_chord_csv(&mut w, &cc, &frenet, args.delta)?;
    w.flush()?;

    let (r5, r6, r9) = angle_condition_residuals(&cc, &frenet, args.delta).maxima();
    let rows: Vec<_> = planarity_residuals(&cc, &frenet, args.delta)
        .into_iter()
        .flatten()
        .collect();
    let d_gap = rows
        .iter()
        .map(|r| (r.d_numeric - r.d_analytic).abs())
        .fold(0.0, f64::max);
    let d_scale = rows.iter().map(|r| r.d_numeric.abs()).fold(0.0, f64::max);
    let l_min = cc.l.iter().copied().fold(f64::INFINITY, f64::min);
    let l_max = cc.l.iter().copied().fold(0.0, f64::max);
    let vanish = simultaneous_vanish_check(&cc, &frenet, args.delta);
    let text = format!(
        "{} samples, step {:e}\nl in [{l_min}, {l_max}]\nmax R5 = {r5:e}, R6 = {r6:e}, R9 = {r9:e}\nmax |D| = {d_scale:e}, max |D_numeric - D_analytic| = {d_gap:e}\nmin ((kl - sin δ)² + τ²) = {vanish}\nmax |τ| = {:e}\n",
        cc.len(),
        traj.step,
        frenet.max_abs_tau()
    );
    let mut r = Report::new(
        "chords",
        true,
        text,
        json!({ "delta": args.delta, "samples": cc.len(), "seed": seed, "l_min": l_min, "l_max": l_max,
                "r5": r5, "r6": r6, "r9": r9, "d_max": d_scale, "d_gap": d_gap,
                "vanish_min": vanish, "planarity": cc.planarity(), "max_abs_tau": frenet.max_abs_tau() }),
    );
    r.stdout_taken = taken;
    Ok(r)
}
