//! Command-line surface: spec validation, field sampling, holonomy
//! verification, compatibility reports, lattice utilities, and SVG
//! rendering.
//!
//! Exit statuses: 0 success/verified, 1 verified-false, 2 input error,
//! 3 numerical indeterminacy.

mod render;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use latdef::field::{jacobian, value, BranchState, FieldSpec};
use latdef::geometry::{
    connections_coincide, curvature_residual, default_compatibility_tol, is_compatible,
    riemann_cartan_connection, teleparallel_connection, torsion, CoframeField,
};
use latdef::holonomy::verify_holonomy;
use latdef::lattice::{
    canonical_form, classify_detailed, frames_equivalent, reduce_basis, AffineFrame,
    LatticeTransform,
};
use latdef::math::Vec2;
use latdef::region::{sample_grid, CircleSpec, LoopSpec, Rect, StructuredGrid};
use latdef::{build_coframe, CutRule, GeometryError, HolonomyError};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "latdef",
    version,
    about = "Distortion fields of topological defects in 2D lattices: construction, compatibility, holonomy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a field specification and report every check.
    Validate(ValidateArgs),
    /// Sample the field and its Jacobian over a grid as CSV.
    Field(FieldArgs),
    /// Verify Burgers/holonomy elements along a loop.
    Holonomy(HolonomyArgs),
    /// Compatibility report: torsion and connection comparison.
    Check(CheckArgs),
    /// Lattice utilities.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Render the distorted lattice as SVG level curves.
    Render(RenderArgs),
}

#[derive(Args)]
struct SpecSource {
    /// Field specification JSON file.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in preset: edge | quarter-turn | hyperbolic.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    source: SpecSource,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.25)]
    h: f64,
    /// Points per shorter side; overrides --h.
    #[arg(long)]
    grid: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HolonomyArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Circle loop as cx,cy,r,turns.
    #[arg(long, value_name = "CX,CY,R,TURNS", conflicts_with = "loop_file")]
    circle: Option<String>,
    /// Loop JSON file ({"points": ...} or {"circle": ...}).
    #[arg(long = "loop", value_name = "FILE")]
    loop_file: Option<PathBuf>,
    /// Samples per turn for --circle.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Verification tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Coframe CSV file instead of a spec.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["spec", "preset"])]
    coframe: Option<PathBuf>,
    /// Grid spacing for spec-based checks.
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    /// Restrict the grid to a sub-rectangle x0,y0,x1,y1.
    #[arg(long, value_name = "X0,Y0,X1,Y1")]
    patch: Option<String>,
    /// Number of extra halvings of h for a convergence table.
    #[arg(long, default_value_t = 0)]
    refine: u32,
    /// Compatibility tolerance (default 10 h^2, scale-aware).
    #[arg(long)]
    tol: Option<f64>,
    /// Write per-point torsion components as CSV.
    #[arg(long, value_name = "FILE")]
    csv_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Lagrange-Gauss reduction of a frame's basis.
    Reduce(FrameArg),
    /// Classify the lattice into one of the four 2D systems.
    Classify(FrameArg),
    /// Decide whether two frames span the same lattice.
    Equiv(EquivArgs),
}

#[derive(Args)]
struct FrameArg {
    /// Frame JSON {"origin": [x,y], "basis": [[..],[..]]}.
    #[arg(long, value_name = "JSON")]
    frame: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long, value_name = "JSON")]
    frame: String,
    /// The second frame.
    #[arg(long, value_name = "JSON")]
    other: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Cells per axis (minimum 8).
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Level spacing.
    #[arg(long, default_value_t = 1.0)]
    level_step: f64,
    /// Stroke width in world units.
    #[arg(long, default_value_t = 0.01)]
    stroke: f64,
    /// Hide the branch-cut layer.
    #[arg(long)]
    no_cuts: bool,
    /// Output SVG file (stdout if omitted).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Failure modes that map onto the documented exit statuses.
enum CmdError {
    /// Unreadable/malformed/contract-violating input: status 2.
    Input(anyhow::Error),
    /// The computation could not decide: status 3.
    Indeterminate(anyhow::Error),
}

type CmdResult = std::result::Result<u8, CmdError>;

fn input_err<T>(e: impl Into<anyhow::Error>) -> std::result::Result<T, CmdError> {
    Err(CmdError::Input(e.into()))
}

impl SpecSource {
    fn load(&self) -> std::result::Result<FieldSpec, CmdError> {
        match (&self.spec, &self.preset) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(CmdError::Input)?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))
                    .map_err(CmdError::Input)
            }
            (None, Some(name)) => FieldSpec::preset(name).ok_or_else(|| {
                CmdError::Input(anyhow!(
                    "unknown preset {name:?}; available: {}",
                    FieldSpec::preset_names().join(", ")
                ))
            }),
            _ => Err(CmdError::Input(anyhow!(
                "exactly one of --spec or --preset is required"
            ))),
        }
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> std::result::Result<(), CmdError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(CmdError::Input),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_frame(json: &str) -> std::result::Result<AffineFrame, CmdError> {
    let frame: AffineFrame = serde_json::from_str(json)
        .context("parsing frame JSON")
        .map_err(CmdError::Input)?;
    AffineFrame::new(frame.origin, frame.basis).map_err(|e| CmdError::Input(e.into()))
}

fn parse_numbers(s: &str, n: usize, what: &str) -> std::result::Result<Vec<f64>, CmdError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {what} {s:?}"))
        .map_err(CmdError::Input)?;
    if parts.len() != n {
        return input_err(anyhow!("{what} needs {n} comma-separated numbers"));
    }
    Ok(parts)
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization")
    );
}

// ---------------------------------------------------------------- validate

#[derive(Serialize)]
struct CheckLine {
    name: String,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct ValidateReport {
    ok: bool,
    checks: Vec<CheckLine>,
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let spec = args.source.load()?;
    let mut checks = Vec::new();
    let mut push = |name: String, res: std::result::Result<(), String>| {
        checks.push(CheckLine {
            name,
            ok: res.is_ok(),
            detail: res.err(),
        });
    };
    push(
        "region".into(),
        spec.region.validate().map_err(|e| e.to_string()),
    );
    for (i, charge) in spec.charges.iter().enumerate() {
        push(
            format!("charge {i} unit-norm condition and integral translation"),
            latdef::field::validate_charge(charge).map_err(|e| e.to_string()),
        );
    }
    push(
        "charge/puncture/background structure".into(),
        spec.validate().map_err(|e| e.to_string()),
    );
    let ok = checks.iter().all(|c| c.ok);
    print_json(&ValidateReport { ok, checks });
    Ok(u8::from(!ok))
}

// ------------------------------------------------------------------- field

fn cmd_field(args: &FieldArgs) -> CmdResult {
    let spec = args.source.load()?;
    spec.validate().or_else(input_err)?;
    let outer = spec.region.outer;
    let h = match args.grid {
        Some(n) if n >= 2 => outer.width().min(outer.height()) / (n - 1) as f64,
        Some(n) => return input_err(anyhow!("--grid must be at least 2, got {n}")),
        None => args.h,
    };
    let points = sample_grid(&spec.region, h).or_else(input_err)?;
    if points.is_empty() {
        eprintln!("warning: spacing {h} produced an empty grid");
    }
    let branch = BranchState::principal(spec.charges.len());
    let mut out = String::from("x,y,re_w,im_w,J11,J12,J21,J22,detJ\n");
    for p in points {
        let z = p.to_complex();
        match (value(&spec, z, &branch), jacobian(&spec, z, &branch)) {
            (Ok(w), Ok(j)) => {
                let m = j.matrix;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    p.x,
                    p.y,
                    w.re,
                    w.im,
                    m.0[0][0],
                    m.0[0][1],
                    m.0[1][0],
                    m.0[1][1],
                    m.det()
                ));
            }
            // Domain failures are marked, not fatal.
            _ => out.push_str(&format!("{},{},nan,nan,nan,nan,nan,nan,nan\n", p.x, p.y)),
        }
    }
    write_output(&args.out, &out)?;
    Ok(0)
}

// ---------------------------------------------------------------- holonomy

#[derive(Serialize)]
struct ElementReport {
    winding: i64,
    #[serde(rename = "M")]
    m: [[i64; 2]; 2],
    t: [i64; 2],
    center: [f64; 2],
}

#[derive(Serialize)]
struct HolonomyReport {
    #[serde(rename = "loop")]
    loop_spec: serde_json::Value,
    windings: Vec<i64>,
    elements: Vec<ElementReport>,
    numeric: NumericJumps,
    residual: f64,
    verified: bool,
}

#[derive(Serialize)]
struct NumericJumps {
    jump_w: [f64; 2],
    #[serde(rename = "jump_J")]
    jump_j: [[f64; 2]; 2],
    turns: Vec<i64>,
}

fn holonomy_failure(e: HolonomyError) -> CmdError {
    match e {
        HolonomyError::StepBound { .. }
        | HolonomyError::NonIntegerTurns { .. }
        | HolonomyError::IndeterminateWinding { .. } => CmdError::Indeterminate(e.into()),
        other => CmdError::Input(other.into()),
    }
}

fn cmd_holonomy(args: &HolonomyArgs) -> CmdResult {
    let spec = args.source.load()?;
    spec.validate().or_else(input_err)?;
    let (lp, echo) = match (&args.circle, &args.loop_file) {
        (Some(desc), None) => {
            let v = parse_numbers(desc, 4, "--circle")?;
            let turns = v[3] as i32;
            if (v[3] - turns as f64).abs() > 1e-9 {
                return input_err(anyhow!("--circle turns must be an integer"));
            }
            let circle = CircleSpec {
                center: Vec2::new(v[0], v[1]),
                radius: v[2],
                turns,
                samples: args.samples,
            };
            let spec_echo = serde_json::to_value(LoopSpec::Circle { circle }).unwrap();
            let lp = LoopSpec::Circle { circle }.resolve().or_else(input_err)?;
            (lp, spec_echo)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CmdError::Input)?;
            let loop_spec: LoopSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(CmdError::Input)?;
            let echo = serde_json::to_value(&loop_spec).unwrap();
            (loop_spec.resolve().or_else(input_err)?, echo)
        }
        _ => return input_err(anyhow!("exactly one of --circle or --loop is required")),
    };

    let check = verify_holonomy(&spec, &lp, args.tol).map_err(holonomy_failure)?;
    let report = HolonomyReport {
        loop_spec: echo,
        windings: check.burgers.windings.clone(),
        elements: check
            .burgers
            .elements
            .iter()
            .map(|(w, e)| ElementReport {
                winding: *w,
                m: e.m.0,
                t: e.t.0,
                center: [e.center.x, e.center.y],
            })
            .collect(),
        numeric: NumericJumps {
            jump_w: [check.continuation.jump_w.re, check.continuation.jump_w.im],
            jump_j: check.continuation.jump_j.0,
            turns: check.continuation.turns.clone(),
        },
        residual: check.residual,
        verified: check.verified,
    };
    print_json(&report);
    Ok(u8::from(!check.verified))
}

// ------------------------------------------------------------------- check

#[derive(Serialize)]
struct TorsionSummary {
    max: f64,
    derivative_scale: f64,
    evaluated_points: usize,
}

#[derive(Serialize)]
struct GapSummary {
    max: f64,
    coincide: bool,
}

#[derive(Serialize)]
struct ConvergenceRow {
    h: f64,
    max_torsion: f64,
    connection_gap: f64,
    curvature_residual: f64,
}

#[derive(Serialize)]
struct CheckReport {
    source: String,
    h: f64,
    tolerance: f64,
    torsion: TorsionSummary,
    connection_gap: GapSummary,
    compatible: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    convergence: Vec<ConvergenceRow>,
}

fn geometry_failure(e: GeometryError) -> CmdError {
    match e {
        GeometryError::EmptyResult => CmdError::Indeterminate(e.into()),
        other => CmdError::Input(other.into()),
    }
}

fn analyze_field(
    field: &CoframeField,
    tol: f64,
) -> std::result::Result<(TorsionSummary, GapSummary, bool, f64, f64), CmdError> {
    let t = torsion(field).map_err(geometry_failure)?;
    let (compatible, _) = is_compatible(field, tol).map_err(geometry_failure)?;
    let tele = teleparallel_connection(field).map_err(geometry_failure)?;
    let rc = riemann_cartan_connection(field).map_err(geometry_failure)?;
    let (coincide, gap) = connections_coincide(&tele, &rc, tol).map_err(geometry_failure)?;
    let curv = curvature_residual(&tele).unwrap_or(f64::NAN);
    Ok((
        TorsionSummary {
            max: t.max_abs,
            derivative_scale: t.derivative_scale,
            evaluated_points: t.evaluated_count(),
        },
        GapSummary {
            max: gap,
            coincide,
        },
        compatible,
        t.max_abs,
        curv,
    ))
}

fn torsion_csv(field: &CoframeField) -> std::result::Result<String, CmdError> {
    let t = torsion(field).map_err(geometry_failure)?;
    let mut out = String::from("x,y,tau1,tau2\n");
    for j in 0..t.meta.ny {
        for i in 0..t.meta.nx {
            if let Some(ta) = t.at(i, j) {
                let p = t.meta.point(i, j);
                out.push_str(&format!("{},{},{},{}\n", p.x, p.y, ta[0], ta[1]));
            }
        }
    }
    Ok(out)
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    if let Some(path) = &args.coframe {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(CmdError::Input)?;
        let field = CoframeField::from_csv_str(&text).map_err(|e| CmdError::Input(e.into()))?;
        let h = field.meta.h;
        let tol = args.tol.unwrap_or_else(|| default_compatibility_tol(h));
        let (torsion_summary, gap_summary, compatible, _, curv) = analyze_field(&field, tol)?;
        if let Some(csv_path) = &args.csv_out {
            let csv = torsion_csv(&field)?;
            std::fs::write(csv_path, csv)
                .with_context(|| format!("writing {}", csv_path.display()))
                .map_err(CmdError::Input)?;
        }
        let ok = compatible && gap_summary.coincide;
        print_json(&CheckReport {
            source: format!("coframe:{}", path.display()),
            h,
            tolerance: tol,
            torsion: torsion_summary,
            connection_gap: gap_summary,
            compatible,
            convergence: vec![ConvergenceRow {
                h,
                max_torsion: 0.0,
                connection_gap: 0.0,
                curvature_residual: curv,
            }]
            .into_iter()
            .filter(|_| false)
            .collect(),
        });
        return Ok(u8::from(!ok));
    }

    let spec = args.source.load()?;
    spec.validate().or_else(input_err)?;
    let rect = match &args.patch {
        Some(desc) => {
            let v = parse_numbers(desc, 4, "--patch")?;
            Rect::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))
        }
        None => spec.region.outer,
    };

    let build = |h: f64| -> std::result::Result<CoframeField, CmdError> {
        let grid = if args.patch.is_some() {
            StructuredGrid::from_rect(rect, h).or_else(input_err)?
        } else {
            StructuredGrid::from_region(&spec.region, h).or_else(input_err)?
        };
        Ok(build_coframe(&spec, &grid, CutRule::NegativeXRays))
    };

    let tol = args.tol.unwrap_or_else(|| default_compatibility_tol(args.h));
    let field = build(args.h)?;
    if let Some(csv_path) = &args.csv_out {
        let csv = torsion_csv(&field)?;
        std::fs::write(csv_path, csv)
            .with_context(|| format!("writing {}", csv_path.display()))
            .map_err(CmdError::Input)?;
    }
    let (torsion_summary, gap_summary, compatible, tau0, curv0) = analyze_field(&field, tol)?;

    let mut convergence = Vec::new();
    if args.refine > 0 {
        convergence.push(ConvergenceRow {
            h: args.h,
            max_torsion: tau0,
            connection_gap: gap_summary.max,
            curvature_residual: curv0,
        });
        let mut h = args.h;
        for _ in 0..args.refine {
            h /= 2.0;
            let f = build(h)?;
            let level_tol = args.tol.unwrap_or_else(|| default_compatibility_tol(h));
            let (ts, gs, _, tau, curv) = analyze_field(&f, level_tol)?;
            convergence.push(ConvergenceRow {
                h,
                max_torsion: tau,
                connection_gap: gs.max,
                curvature_residual: curv,
            });
            let _ = ts;
        }
    }

    let ok = compatible && gap_summary.coincide;
    print_json(&CheckReport {
        source: args
            .source
            .spec
            .as_ref()
            .map(|p| p.display().to_string())
            .or_else(|| args.source.preset.clone().map(|p| format!("preset:{p}")))
            .unwrap_or_default(),
        h: args.h,
        tolerance: tol,
        torsion: torsion_summary,
        connection_gap: gap_summary,
        compatible,
        convergence,
    });
    Ok(u8::from(!ok))
}

// ----------------------------------------------------------------- lattice

#[derive(Serialize)]
struct ReduceReport {
    b1: [f64; 2],
    b2: [f64; 2],
    norms: [f64; 2],
    inner: f64,
    class: latdef::lattice::LatticeClass,
    centered_rectangular_hint: bool,
    near_tie: bool,
}

#[derive(Serialize)]
struct ClassifyReport {
    class: latdef::lattice::LatticeClass,
    centered_rectangular_hint: bool,
    canonical: AffineFrame,
}

#[derive(Serialize)]
struct EquivReport {
    equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<LatticeTransform>,
}

fn cmd_lattice(cmd: &LatticeCmd) -> CmdResult {
    match cmd {
        LatticeCmd::Reduce(a) => {
            let frame = parse_frame(&a.frame)?;
            let red = reduce_basis(&frame).map_err(|e| CmdError::Input(e.into()))?;
            let outcome = classify_detailed(&frame, a.tol).map_err(|e| CmdError::Input(e.into()))?;
            print_json(&ReduceReport {
                b1: [red.b1.x, red.b1.y],
                b2: [red.b2.x, red.b2.y],
                norms: [red.norm1(), red.norm2()],
                inner: red.inner(),
                class: outcome.class,
                centered_rectangular_hint: outcome.centered_rectangular_hint,
                near_tie: red.near_tie,
            });
            Ok(0)
        }
        LatticeCmd::Classify(a) => {
            let frame = parse_frame(&a.frame)?;
            let outcome = classify_detailed(&frame, a.tol).map_err(|e| CmdError::Input(e.into()))?;
            let canonical = canonical_form(&frame, a.tol).map_err(|e| CmdError::Input(e.into()))?;
            print_json(&ClassifyReport {
                class: outcome.class,
                centered_rectangular_hint: outcome.centered_rectangular_hint,
                canonical: canonical.frame,
            });
            Ok(0)
        }
        LatticeCmd::Equiv(a) => {
            let r1 = parse_frame(&a.frame)?;
            let r2 = parse_frame(&a.other)?;
            let witness =
                frames_equivalent(&r1, &r2, a.tol).map_err(|e| CmdError::Input(e.into()))?;
            let report = EquivReport {
                equivalent: witness.is_some(),
                witness,
            };
            let code = u8::from(!report.equivalent);
            print_json(&report);
            Ok(code)
        }
    }
}

// ------------------------------------------------------------------ render

fn cmd_render(args: &RenderArgs) -> CmdResult {
    let spec = args.source.load()?;
    spec.validate().or_else(input_err)?;
    let opts = render::RenderOptions {
        resolution: args.grid,
        level_step: args.level_step,
        stroke: args.stroke,
        show_cuts: !args.no_cuts,
    };
    let (svg, stats) = render::render_svg(&spec, &opts).map_err(CmdError::Input)?;
    write_output(&args.out, &svg)?;
    eprintln!(
        "rendered {} + {} level curves at resolution {}",
        stats.re_family.polylines, stats.im_family.polylines, args.grid
    );
    if stats.degenerate_points > 0 {
        eprintln!(
            "warning: {} degenerate points marked in the warning layer",
            stats.degenerate_points
        );
    }
    Ok(0)
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Field(a) => cmd_field(a),
        Command::Holonomy(a) => cmd_holonomy(a),
        Command::Check(a) => cmd_check(a),
        Command::Lattice(a) => cmd_lattice(a),
        Command::Render(a) => cmd_render(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CmdError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CmdError::Indeterminate(e)) => {
            eprintln!("indeterminate: {e:#}");
            ExitCode::from(3)
        }
    }
}
