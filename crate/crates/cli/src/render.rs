//! SVG rendering of a distorted lattice: level curves of the real and
//! imaginary parts of the field at regularly spaced values, drawn on a
//! single branch sheet with the cuts visible.

use anyhow::{bail, Result};
use latdef::field::{immersion_failures, jacobian, value, BranchState, FieldSpec};
use latdef::math::Vec2;
use latdef::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Cells per axis across the outer rectangle.
    pub resolution: usize,
    /// Spacing between level values.
    pub level_step: f64,
    /// Stroke width in world units.
    pub stroke: f64,
    /// Draw the branch-cut rays.
    pub show_cuts: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            resolution: 64,
            level_step: 1.0,
            stroke: 0.01,
            show_cuts: true,
        }
    }
}

/// Where a contour polyline terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    WindowBoundary,
    CutStrip,
    PunctureRim,
    Interior,
}

#[derive(Debug, Clone, Default)]
pub struct FamilyStats {
    pub polylines: usize,
    pub window_endpoints: usize,
    pub cut_endpoints: usize,
    pub rim_endpoints: usize,
    pub interior_endpoints: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RenderStats {
    pub re_family: FamilyStats,
    pub im_family: FamilyStats,
    pub degenerate_points: usize,
}

pub struct Contours {
    /// (level, polyline) per family.
    pub re_lines: Vec<(f64, Vec<Vec2>)>,
    pub im_lines: Vec<(f64, Vec<Vec2>)>,
    pub degenerate: Vec<Vec2>,
    cell: f64,
    spec: FieldSpec,
}

/// Marching squares over the principal sheet, excluding puncture cells and
/// cells straddling a cut ray.
pub fn compute_contours(spec: &FieldSpec, opts: &RenderOptions) -> Result<Contours> {
    if opts.resolution < 8 {
        bail!("render resolution must be at least 8, got {}", opts.resolution);
    }
    if !(opts.level_step.is_finite() && opts.level_step > 0.0) {
        bail!("level step must be positive and finite");
    }
    let outer = spec.region.outer;
    let n = opts.resolution;
    let (dx, dy) = (outer.width() / n as f64, outer.height() / n as f64);
    let branch = BranchState::principal(spec.charges.len());

    // Field samples on the (n+1)^2 corner grid.
    let mut vals: Vec<Option<Complex64>> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let p = Vec2::new(
                outer.min.x + dx * i as f64,
                outer.min.y + dy * j as f64,
            );
            vals.push(value(spec, p.to_complex(), &branch).ok());
        }
    }
    let at = |i: usize, j: usize| vals[j * (n + 1) + i];

    let cuts: Vec<Vec2> = spec.charges.iter().map(|c| c.center).collect();
    let cell_ok = |i: usize, j: usize| -> bool {
        for dj in 0..2 {
            for di in 0..2 {
                if at(i + di, j + dj).is_none() {
                    return false;
                }
            }
        }
        let y0 = outer.min.y + dy * j as f64;
        let y1 = y0 + dy;
        let x0 = outer.min.x + dx * i as f64;
        // A cell touches a cut ray when its y-range straddles or meets the
        // ray level left of the defect center; corners exactly on the ray
        // count as contact.
        let eps = 1e-12 * (dy + 1.0);
        !cuts
            .iter()
            .any(|c| x0 <= c.x + eps && (y0 - c.y) * (y1 - c.y) <= eps)
    };

    let extract = |pick: &dyn Fn(Complex64) -> f64| -> Vec<(f64, Vec<Vec2>)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in vals.iter().flatten() {
            let s = pick(*v);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let mut lines = Vec::new();
        if !(lo.is_finite() && hi.is_finite()) {
            return lines;
        }
        let k0 = (lo / opts.level_step).ceil() as i64;
        let k1 = (hi / opts.level_step).floor() as i64;
        for k in k0..=k1 {
            let level = k as f64 * opts.level_step;
            for line in march_level(n, dx, dy, outer.min, &at, &cell_ok, pick, level) {
                lines.push((level, line));
            }
        }
        lines
    };

    let re_lines = extract(&|v: Complex64| v.re);
    let im_lines = extract(&|v: Complex64| v.im);

    // Degenerate-immersion warning layer over the corner grid.
    let mut sample_points = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let p = Vec2::new(outer.min.x + dx * i as f64, outer.min.y + dy * j as f64);
            if at(i, j).is_some() && jacobian(spec, p.to_complex(), &branch).is_ok() {
                sample_points.push(p);
            }
        }
    }
    let degenerate = immersion_failures(spec, &sample_points, &branch)
        .into_iter()
        .map(|d| d.point)
        .collect();

    Ok(Contours {
        re_lines,
        im_lines,
        degenerate,
        cell: dx.max(dy),
        spec: spec.clone(),
    })
}

/// Marching squares for one level; returns chained polylines.
#[allow(clippy::too_many_arguments)]
fn march_level(
    n: usize,
    dx: f64,
    dy: f64,
    origin: Vec2,
    at: &dyn Fn(usize, usize) -> Option<Complex64>,
    cell_ok: &dyn Fn(usize, usize) -> bool,
    pick: &dyn Fn(Complex64) -> f64,
    level: f64,
) -> Vec<Vec<Vec2>> {
    let mut segments: Vec<(Vec2, Vec2)> = Vec::new();
    let corner = |i: usize, j: usize| -> Vec2 {
        Vec2::new(origin.x + dx * i as f64, origin.y + dy * j as f64)
    };
    for j in 0..n {
        for i in 0..n {
            if !cell_ok(i, j) {
                continue;
            }
            // Nudge exact-level corner values off zero so nodal lines
            // through grid corners do not produce degenerate segments.
            let nudge = |x: f64| -> f64 {
                if x == 0.0 {
                    1e-12 * (1.0 + level.abs())
                } else {
                    x
                }
            };
            let v = [
                nudge(pick(at(i, j).unwrap()) - level),
                nudge(pick(at(i + 1, j).unwrap()) - level),
                nudge(pick(at(i + 1, j + 1).unwrap()) - level),
                nudge(pick(at(i, j + 1).unwrap()) - level),
            ];
            let p = [
                corner(i, j),
                corner(i + 1, j),
                corner(i + 1, j + 1),
                corner(i, j + 1),
            ];
            let mut code = 0usize;
            for (bit, val) in v.iter().enumerate() {
                if *val > 0.0 {
                    code |= 1 << bit;
                }
            }
            if code == 0 || code == 15 {
                continue;
            }
            // Interpolated crossing on edge a-b.
            let cross = |a: usize, b: usize| -> Vec2 {
                let t = v[a] / (v[a] - v[b]);
                p[a] + (p[b] - p[a]) * t.clamp(0.0, 1.0)
            };
            // Edges: 0 bottom (0-1), 1 right (1-2), 2 top (2-3), 3 left (3-0).
            let e = |k: usize| -> Vec2 {
                match k {
                    0 => cross(0, 1),
                    1 => cross(1, 2),
                    2 => cross(2, 3),
                    _ => cross(3, 0),
                }
            };
            let mut push = |a: usize, b: usize| {
                let (pa, pb) = (e(a), e(b));
                if pa.dist(pb) > 1e-9 * (dx + dy) {
                    segments.push((pa, pb));
                }
            };
            match code {
                1 | 14 => push(3, 0),
                2 | 13 => push(0, 1),
                3 | 12 => push(3, 1),
                4 | 11 => push(1, 2),
                6 | 9 => push(0, 2),
                7 | 8 => push(2, 3),
                5 | 10 => {
                    // Saddle: disambiguate with the cell-center average.
                    let center = (v[0] + v[1] + v[2] + v[3]) / 4.0;
                    let flip = (code == 5) == (center > 0.0);
                    if flip {
                        push(3, 0);
                        push(1, 2);
                    } else {
                        push(0, 1);
                        push(2, 3);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    chain_segments(segments, dx.min(dy) * 1e-7)
}

/// Joins segments that share endpoints into polylines, deterministically.
fn chain_segments(segments: Vec<(Vec2, Vec2)>, quantum: f64) -> Vec<Vec<Vec2>> {
    let key = |p: Vec2| -> (i64, i64) {
        (
            (p.x / quantum).round() as i64,
            (p.y / quantum).round() as i64,
        )
    };
    // Endpoint -> (segment index, end side).
    let mut adjacency: BTreeMap<(i64, i64), Vec<(usize, bool)>> = BTreeMap::new();
    for (si, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(key(*a)).or_default().push((si, false));
        adjacency.entry(key(*b)).or_default().push((si, true));
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    // Walk a chain starting with `start_seg`, entering at its `a` end when
    // `enter_at_a`, consuming segments until no unused continuation exists.
    let walk = |start_seg: usize,
                enter_at_a: bool,
                used: &mut Vec<bool>,
                adjacency: &BTreeMap<(i64, i64), Vec<(usize, bool)>>|
     -> Vec<Vec2> {
        let (a, b) = segments[start_seg];
        let (head, mut tail) = if enter_at_a { (a, b) } else { (b, a) };
        let mut line = vec![head, tail];
        used[start_seg] = true;
        'grow: loop {
            let k = key(tail);
            if let Some(ends) = adjacency.get(&k) {
                for &(si, at_b) in ends {
                    if used[si] {
                        continue;
                    }
                    let (sa, sb) = segments[si];
                    // Continue out of the segment's far end.
                    let next = if at_b { sa } else { sb };
                    used[si] = true;
                    line.push(next);
                    tail = next;
                    continue 'grow;
                }
            }
            break;
        }
        line
    };

    // Open chains first: start at endpoints of odd degree.
    let keys: Vec<(i64, i64)> = adjacency.keys().copied().collect();
    for k in &keys {
        if adjacency[k].len() % 2 == 0 {
            continue;
        }
        while let Some((si, at_b)) = adjacency[k].iter().find(|(si, _)| !used[*si]).copied() {
            // The chain's first point is the endpoint lying at this key.
            lines.push(walk(si, !at_b, &mut used, &adjacency));
        }
    }
    // Remaining closed loops.
    for si in 0..segments.len() {
        if !used[si] {
            lines.push(walk(si, true, &mut used, &adjacency));
        }
    }
    lines
}

impl Contours {
    /// Classifies a polyline endpoint by what it terminates against.
    pub fn classify_endpoint(&self, p: Vec2) -> EndpointKind {
        let outer = self.spec.region.outer;
        let margin = 1.5 * self.cell;
        if outer.boundary_clearance(p) <= margin {
            return EndpointKind::WindowBoundary;
        }
        for c in &self.spec.charges {
            if p.x <= c.center.x + margin && (p.y - c.center.y).abs() <= margin {
                return EndpointKind::CutStrip;
            }
        }
        for d in &self.spec.region.punctures {
            if p.dist(d.center) <= d.radius + 2.0 * self.cell {
                return EndpointKind::PunctureRim;
            }
        }
        EndpointKind::Interior
    }

    pub fn stats(&self) -> RenderStats {
        let family = |lines: &[(f64, Vec<Vec2>)]| -> FamilyStats {
            let mut s = FamilyStats {
                polylines: lines.len(),
                ..Default::default()
            };
            for (_, line) in lines {
                let closed = line.len() > 2
                    && line[0].dist(*line.last().unwrap()) < 1e-9 * (1.0 + line[0].norm());
                if closed {
                    continue;
                }
                for p in [line[0], *line.last().unwrap()] {
                    match self.classify_endpoint(p) {
                        EndpointKind::WindowBoundary => s.window_endpoints += 1,
                        EndpointKind::CutStrip => s.cut_endpoints += 1,
                        EndpointKind::PunctureRim => s.rim_endpoints += 1,
                        EndpointKind::Interior => s.interior_endpoints += 1,
                    }
                }
            }
            s
        };
        RenderStats {
            re_family: family(&self.re_lines),
            im_family: family(&self.im_lines),
            degenerate_points: self.degenerate.len(),
        }
    }
}

fn fmt_coord(x: f64) -> String {
    format!("{x:.6}")
}

/// Renders the contour set as a standalone SVG document.
pub fn render_svg(spec: &FieldSpec, opts: &RenderOptions) -> Result<(String, RenderStats)> {
    let contours = compute_contours(spec, opts)?;
    let stats = contours.stats();
    let outer = spec.region.outer;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        fmt_coord(outer.min.x),
        fmt_coord(outer.min.y),
        fmt_coord(outer.width()),
        fmt_coord(outer.height())
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#,
        fmt_coord(outer.min.x),
        fmt_coord(outer.min.y),
        fmt_coord(outer.width()),
        fmt_coord(outer.height())
    );
    // Flip y so the mathematical orientation points up.
    let _ = writeln!(
        svg,
        r#"<g transform="matrix(1 0 0 -1 0 {})">"#,
        fmt_coord(outer.min.y + outer.max.y)
    );
    for d in &spec.region.punctures {
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#eeeeee" stroke="#999999" stroke-width="{}"/>"##,
            fmt_coord(d.center.x),
            fmt_coord(d.center.y),
            fmt_coord(d.radius),
            fmt_coord(opts.stroke)
        );
    }
    if opts.show_cuts {
        let _ = writeln!(svg, r##"<g class="cuts" stroke="#bb4444" stroke-dasharray="{} {}" stroke-width="{}">"##,
            fmt_coord(4.0 * opts.stroke), fmt_coord(3.0 * opts.stroke), fmt_coord(opts.stroke));
        for c in &spec.charges {
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                fmt_coord(outer.min.x),
                fmt_coord(c.center.y),
                fmt_coord(c.center.x),
                fmt_coord(c.center.y)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    let mut draw_family = |lines: &[(f64, Vec<Vec2>)], class: &str, color: &str| {
        let _ = writeln!(
            svg,
            r#"<g class="{class}" fill="none" stroke="{color}" stroke-width="{}">"#,
            fmt_coord(opts.stroke)
        );
        for (_, line) in lines {
            let mut d = String::new();
            for (k, p) in line.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{} {}",
                    if k == 0 { "M" } else { " L" },
                    fmt_coord(p.x),
                    fmt_coord(p.y)
                );
            }
            let _ = writeln!(svg, r#"<path d="{d}"/>"#);
        }
        let _ = writeln!(svg, "</g>");
    };
    draw_family(&contours.re_lines, "re-levels", "#2266cc");
    draw_family(&contours.im_lines, "im-levels", "#cc6622");
    if !contours.degenerate.is_empty() {
        let _ = writeln!(svg, r##"<g class="degenerate-warning" fill="#ff9900">"##);
        for p in &contours.degenerate {
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                fmt_coord(p.x),
                fmt_coord(p.y),
                fmt_coord(1.5 * opts.stroke)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok((svg, stats))
}
