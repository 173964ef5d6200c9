//! Numerical differential geometry of grid-sampled coframe fields:
//! torsion in the teleparallel gauge (where the criterion reduces to a
//! curl test on the coframe rows), the Levi-Civita comparison connection
//! of the induced metric, curvature residuals, and the isometric-rigidity
//! contrast.
//!
//! All derivatives are second-order central differences. Points lacking a
//! full four-neighbor stencil, or whose stencil crosses a branch cut, are
//! excluded rather than degraded to one-sided formulas.

use crate::error::GeometryError;
use crate::math::{Mat2, Vec2};
use crate::region::{GridMeta, Rect, StructuredGrid};

/// Connection coefficients at a point, indexed `[upper][derivative][lower]`.
pub type ConnCoeffs = [[[f64; 2]; 2]; 2];

/// A field of invertible 2x2 coframe matrices over a regular grid. Row `a`
/// of the matrix holds the components of the a-th coframe 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct CoframeField {
    pub meta: GridMeta,
    valid: Vec<bool>,
    theta: Vec<Mat2>,
    /// Cut flags for horizontal links `(i,j)-(i+1,j)`, length `(nx-1)*ny`.
    cut_x: Vec<bool>,
    /// Cut flags for vertical links `(i,j)-(i,j+1)`, length `nx*(ny-1)`.
    cut_y: Vec<bool>,
}

impl CoframeField {
    pub(crate) fn from_parts(
        meta: GridMeta,
        valid: Vec<bool>,
        mut theta: Vec<Mat2>,
        cut_x: Vec<bool>,
        cut_y: Vec<bool>,
    ) -> Self {
        debug_assert_eq!(valid.len(), meta.len());
        debug_assert_eq!(theta.len(), meta.len());
        // Matrices at invalid points carry no information; zero them so
        // structural equality and serialization agree.
        for (t, v) in theta.iter_mut().zip(&valid) {
            if !v {
                *t = Mat2::ZERO;
            }
        }
        CoframeField {
            meta,
            valid,
            theta,
            cut_x,
            cut_y,
        }
    }

    /// Samples an analytic coframe over a rectangle. Fails if any sample is
    /// singular or non-finite.
    pub fn from_fn(
        rect: Rect,
        h: f64,
        f: impl Fn(Vec2) -> Mat2,
    ) -> Result<Self, GeometryError> {
        let grid =
            StructuredGrid::from_rect(rect, h).map_err(|_| GeometryError::BadSpacing { h })?;
        let meta = grid.meta;
        let mut theta = vec![Mat2::IDENTITY; meta.len()];
        for j in 0..meta.ny {
            for i in 0..meta.nx {
                let p = meta.point(i, j);
                let m = f(p);
                if !m.is_finite() || m.det().abs() <= 1e-14 * m.max_abs().max(1.0).powi(2) {
                    return Err(GeometryError::SingularCoframe { x: p.x, y: p.y });
                }
                theta[meta.index(i, j)] = m;
            }
        }
        Ok(CoframeField {
            meta,
            valid: vec![true; meta.len()],
            theta,
            cut_x: vec![false; (meta.nx - 1) * meta.ny],
            cut_y: vec![false; meta.nx * (meta.ny - 1)],
        })
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[self.meta.index(i, j)]
    }

    pub fn theta_at(&self, i: usize, j: usize) -> Option<&Mat2> {
        if self.is_valid(i, j) {
            Some(&self.theta[self.meta.index(i, j)])
        } else {
            None
        }
    }

    pub fn cut_link_x(&self, i: usize, j: usize) -> bool {
        self.cut_x[j * (self.meta.nx - 1) + i]
    }

    pub fn cut_link_y(&self, i: usize, j: usize) -> bool {
        self.cut_y[j * self.meta.nx + i]
    }

    /// Invalidate all points satisfying the predicate.
    pub fn mask_where(&mut self, pred: impl Fn(Vec2) -> bool) {
        for j in 0..self.meta.ny {
            for i in 0..self.meta.nx {
                if pred(self.meta.point(i, j)) {
                    self.valid[self.meta.index(i, j)] = false;
                }
            }
        }
    }

    /// Whether `(i, j)` has a full interior stencil: itself and all four
    /// neighbors valid, with no stencil link crossing a cut.
    pub fn stencil_ok(&self, i: usize, j: usize) -> bool {
        let (nx, ny) = (self.meta.nx, self.meta.ny);
        if i == 0 || j == 0 || i + 1 >= nx || j + 1 >= ny {
            return false;
        }
        self.is_valid(i, j)
            && self.is_valid(i - 1, j)
            && self.is_valid(i + 1, j)
            && self.is_valid(i, j - 1)
            && self.is_valid(i, j + 1)
            && !self.cut_link_x(i - 1, j)
            && !self.cut_link_x(i, j)
            && !self.cut_link_y(i, j - 1)
            && !self.cut_link_y(i, j)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Central-difference x and y derivatives of theta at a stencil-ok point.
    fn derivatives(&self, i: usize, j: usize) -> (Mat2, Mat2) {
        let m = &self.meta;
        let two_h = 2.0 * m.h;
        let dx = self.theta[m.index(i + 1, j)]
            .sub(&self.theta[m.index(i - 1, j)])
            .scale(1.0 / two_h);
        let dy = self.theta[m.index(i, j + 1)]
            .sub(&self.theta[m.index(i, j - 1)])
            .scale(1.0 / two_h);
        (dx, dy)
    }

    /// CSV interchange with header `x,y,t11,t12,t21,t22,valid,cut_flags`.
    /// Every grid point appears; `cut_flags` packs the four link flags as
    /// bits (+x, -x, +y, -y).
    pub fn to_csv_string(&self) -> String {
        let m = &self.meta;
        let mut out = String::from("x,y,t11,t12,t21,t22,valid,cut_flags\n");
        for j in 0..m.ny {
            for i in 0..m.nx {
                let p = m.point(i, j);
                let idx = m.index(i, j);
                let t = if self.valid[idx] {
                    self.theta[idx]
                } else {
                    Mat2::ZERO
                };
                let mut flags = 0u8;
                if i + 1 < m.nx && self.cut_link_x(i, j) {
                    flags |= 1;
                }
                if i > 0 && self.cut_link_x(i - 1, j) {
                    flags |= 2;
                }
                if j + 1 < m.ny && self.cut_link_y(i, j) {
                    flags |= 4;
                }
                if j > 0 && self.cut_link_y(i, j - 1) {
                    flags |= 8;
                }
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    p.x,
                    p.y,
                    t.0[0][0],
                    t.0[0][1],
                    t.0[1][0],
                    t.0[1][1],
                    u8::from(self.valid[idx]),
                    flags
                ));
            }
        }
        out
    }

    pub fn from_csv_str(s: &str) -> Result<Self, GeometryError> {
        let parse_err = |line: usize, msg: &str| GeometryError::CsvParse {
            line,
            msg: msg.to_string(),
        };
        struct Row {
            p: Vec2,
            t: Mat2,
            valid: bool,
            flags: u8,
        }
        let mut rows: Vec<Row> = Vec::new();
        for (ln, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with('x')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(parse_err(ln + 1, "expected 8 comma-separated fields"));
            }
            let num = |k: usize| -> Result<f64, GeometryError> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|e| parse_err(ln + 1, &format!("bad number: {e}")))
            };
            rows.push(Row {
                p: Vec2::new(num(0)?, num(1)?),
                t: Mat2([[num(2)?, num(3)?], [num(4)?, num(5)?]]),
                valid: num(6)? != 0.0,
                flags: num(7)? as u8,
            });
        }
        if rows.is_empty() {
            return Err(parse_err(0, "no data rows"));
        }
        let mut xs: Vec<f64> = rows.iter().map(|r| r.p.x).collect();
        let mut ys: Vec<f64> = rows.iter().map(|r| r.p.y).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs()));
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs()));
        let gap = |v: &[f64]| -> Option<f64> {
            v.windows(2).map(|w| w[1] - w[0]).fold(None, |m, g| {
                Some(m.map_or(g, |m: f64| m.min(g)))
            })
        };
        let h = match (gap(&xs), gap(&ys)) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(parse_err(0, "cannot infer grid spacing")),
        };
        if !(h > 0.0) {
            return Err(parse_err(0, "non-positive grid spacing"));
        }
        let meta = GridMeta {
            origin: Vec2::new(xs[0], ys[0]),
            h,
            nx: xs.len(),
            ny: ys.len(),
        };
        if meta.len() != rows.len() {
            return Err(parse_err(0, "rows do not fill a full rectangular grid"));
        }
        let mut valid = vec![false; meta.len()];
        let mut theta = vec![Mat2::ZERO; meta.len()];
        let mut flags = vec![0u8; meta.len()];
        for r in &rows {
            let fi = (r.p.x - meta.origin.x) / h;
            let fj = (r.p.y - meta.origin.y) / h;
            let (i, j) = (fi.round() as usize, fj.round() as usize);
            if i >= meta.nx
                || j >= meta.ny
                || (fi - fi.round()).abs() > 1e-6
                || (fj - fj.round()).abs() > 1e-6
            {
                return Err(parse_err(0, "points do not lie on a regular grid"));
            }
            let idx = meta.index(i, j);
            valid[idx] = r.valid;
            theta[idx] = r.t;
            flags[idx] = r.flags;
        }
        let mut cut_x = vec![false; (meta.nx - 1).max(0) * meta.ny];
        let mut cut_y = vec![false; meta.nx * (meta.ny - 1).max(0)];
        for j in 0..meta.ny {
            for i in 0..meta.nx {
                let f = flags[meta.index(i, j)];
                if i + 1 < meta.nx && (f & 1 != 0 || flags[meta.index(i + 1, j)] & 2 != 0) {
                    cut_x[j * (meta.nx - 1) + i] = true;
                }
                if j + 1 < meta.ny && (f & 4 != 0 || flags[meta.index(i, j + 1)] & 8 != 0) {
                    cut_y[j * meta.nx + i] = true;
                }
            }
        }
        Ok(CoframeField {
            meta,
            valid,
            theta,
            cut_x,
            cut_y,
        })
    }
}

/// Torsion components of the teleparallel gauge: for each coframe row `a`,
/// the single independent 2D component `tau^a = d_x theta^a_y - d_y theta^a_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionField {
    pub meta: GridMeta,
    pub tau: Vec<Option<[f64; 2]>>,
    /// Max |tau^a| over evaluated points.
    pub max_abs: f64,
    /// Max |d theta| over evaluated points; the characteristic scale the
    /// compatibility threshold is measured against.
    pub derivative_scale: f64,
}

impl TorsionField {
    pub fn at(&self, i: usize, j: usize) -> Option<[f64; 2]> {
        self.tau[self.meta.index(i, j)]
    }

    pub fn evaluated_count(&self) -> usize {
        self.tau.iter().filter(|t| t.is_some()).count()
    }
}

/// Computes the torsion field by central differences.
pub fn torsion(field: &CoframeField) -> Result<TorsionField, GeometryError> {
    let meta = field.meta;
    let mut tau = vec![None; meta.len()];
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    let mut any = false;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if !field.stencil_ok(i, j) {
                continue;
            }
            let (dx, dy) = field.derivatives(i, j);
            let t = [
                dx.0[0][1] - dy.0[0][0],
                dx.0[1][1] - dy.0[1][0],
            ];
            max_abs = max_abs.max(t[0].abs()).max(t[1].abs());
            scale = scale.max(dx.max_abs()).max(dy.max_abs());
            tau[meta.index(i, j)] = Some(t);
            any = true;
        }
    }
    if !any {
        return Err(GeometryError::EmptyResult);
    }
    Ok(TorsionField {
        meta,
        tau,
        max_abs,
        derivative_scale: scale,
    })
}

/// Default compatibility tolerance for grid spacing `h`.
pub fn default_compatibility_tol(h: f64) -> f64 {
    10.0 * h * h
}

/// Compatibility verdict: max torsion against `tol` times the measured
/// derivative scale of the coframe. Returns the measured value either way.
pub fn is_compatible(field: &CoframeField, tol: f64) -> Result<(bool, f64), GeometryError> {
    let t = torsion(field)?;
    Ok((t.max_abs <= tol * t.derivative_scale, t.max_abs))
}

/// Linear connection coefficients on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub meta: GridMeta,
    pub coeffs: Vec<Option<ConnCoeffs>>,
}

impl Connection {
    pub fn at(&self, i: usize, j: usize) -> Option<&ConnCoeffs> {
        self.coeffs[self.meta.index(i, j)].as_ref()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .flat_map(|c| c.iter().flatten().flatten())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn evaluated_count(&self) -> usize {
        self.coeffs.iter().filter(|c| c.is_some()).count()
    }
}

/// The connection that declares the given coframe parallel:
/// `G^i_{jk} = (theta^-1)^i_a d_j theta^a_k`. Its curvature vanishes
/// identically; its torsion is the obstruction to compatibility.
pub fn teleparallel_connection(field: &CoframeField) -> Result<Connection, GeometryError> {
    let meta = field.meta;
    let mut coeffs = vec![None; meta.len()];
    let mut any = false;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if !field.stencil_ok(i, j) {
                continue;
            }
            let th = &field.theta[meta.index(i, j)];
            let inv = match th.inverse() {
                Some(m) => m,
                None => continue,
            };
            let (dx, dy) = field.derivatives(i, j);
            let mut c: ConnCoeffs = [[[0.0; 2]; 2]; 2];
            for upper in 0..2 {
                for (dir, d) in [&dx, &dy].iter().enumerate() {
                    for lower in 0..2 {
                        let mut v = 0.0;
                        for a in 0..2 {
                            v += inv.0[upper][a] * d.0[a][lower];
                        }
                        c[upper][dir][lower] = v;
                    }
                }
            }
            coeffs[meta.index(i, j)] = Some(c);
            any = true;
        }
    }
    if !any {
        return Err(GeometryError::EmptyResult);
    }
    Ok(Connection { meta, coeffs })
}

/// Levi-Civita coefficients of the induced metric `g = theta^T theta`,
/// from central differences of `g`.
pub fn riemann_cartan_connection(field: &CoframeField) -> Result<Connection, GeometryError> {
    let meta = field.meta;
    // Metric at every valid point.
    let mut g = vec![None; meta.len()];
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if let Some(th) = field.theta_at(i, j) {
                g[meta.index(i, j)] = Some(th.transpose().mul(th));
            }
        }
    }
    let mut coeffs = vec![None; meta.len()];
    let mut any = false;
    let two_h = 2.0 * meta.h;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if !field.stencil_ok(i, j) {
                continue;
            }
            let gc = g[meta.index(i, j)].unwrap();
            // Positive-definite by construction; guard the inversion anyway.
            let ginv = match gc.inverse() {
                Some(m) => m,
                None => continue,
            };
            let dgx = g[meta.index(i + 1, j)]
                .unwrap()
                .sub(&g[meta.index(i - 1, j)].unwrap())
                .scale(1.0 / two_h);
            let dgy = g[meta.index(i, j + 1)]
                .unwrap()
                .sub(&g[meta.index(i, j - 1)].unwrap())
                .scale(1.0 / two_h);
            let dg = [dgx, dgy];
            let mut c: ConnCoeffs = [[[0.0; 2]; 2]; 2];
            for upper in 0..2 {
                for jj in 0..2 {
                    for kk in 0..2 {
                        let mut v = 0.0;
                        for l in 0..2 {
                            v += ginv.0[upper][l]
                                * (dg[jj].0[l][kk] + dg[kk].0[l][jj] - dg[l].0[jj][kk]);
                        }
                        c[upper][jj][kk] = 0.5 * v;
                    }
                }
            }
            coeffs[meta.index(i, j)] = Some(c);
            any = true;
        }
    }
    if !any {
        return Err(GeometryError::EmptyResult);
    }
    Ok(Connection { meta, coeffs })
}

/// Componentwise comparison of two connections over their common points.
/// The verdict threshold is `tol * max(1, coefficient scale)`.
pub fn connections_coincide(
    c1: &Connection,
    c2: &Connection,
    tol: f64,
) -> Result<(bool, f64), GeometryError> {
    if !c1.meta.approx_eq(&c2.meta) {
        return Err(GeometryError::GridMismatch {
            left: format!("{:?}", c1.meta),
            right: format!("{:?}", c2.meta),
        });
    }
    let mut gap = 0.0f64;
    let mut scale = 0.0f64;
    let mut any = false;
    for (a, b) in c1.coeffs.iter().zip(&c2.coeffs) {
        if let (Some(a), Some(b)) = (a, b) {
            any = true;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        gap = gap.max((a[i][j][k] - b[i][j][k]).abs());
                        scale = scale.max(a[i][j][k].abs()).max(b[i][j][k].abs());
                    }
                }
            }
        }
    }
    if !any {
        return Err(GeometryError::EmptyResult);
    }
    Ok((gap <= tol * scale.max(1.0), gap))
}

/// Max-norm residual of the curvature 2-form of a connection, evaluated by
/// central differences of its coefficients. Zero (to discretization error)
/// for any teleparallel connection.
pub fn curvature_residual(conn: &Connection) -> Result<f64, GeometryError> {
    let meta = conn.meta;
    let two_h = 2.0 * meta.h;
    let mat = |c: &ConnCoeffs, dir: usize| -> Mat2 {
        Mat2([
            [c[0][dir][0], c[0][dir][1]],
            [c[1][dir][0], c[1][dir][1]],
        ])
    };
    let mut max_res = 0.0f64;
    let mut any = false;
    for j in 1..meta.ny.saturating_sub(1) {
        for i in 1..meta.nx.saturating_sub(1) {
            let (Some(center), Some(xp), Some(xm), Some(yp), Some(ym)) = (
                conn.at(i, j),
                conn.at(i + 1, j),
                conn.at(i - 1, j),
                conn.at(i, j + 1),
                conn.at(i, j - 1),
            ) else {
                continue;
            };
            let gx = mat(center, 0);
            let gy = mat(center, 1);
            let dgy_dx = mat(xp, 1).sub(&mat(xm, 1)).scale(1.0 / two_h);
            let dgx_dy = mat(yp, 0).sub(&mat(ym, 0)).scale(1.0 / two_h);
            let res = dgy_dx
                .sub(&dgx_dy)
                .add(&gx.mul(&gy))
                .sub(&gy.mul(&gx));
            max_res = max_res.max(res.max_abs());
            any = true;
        }
    }
    if !any {
        return Err(GeometryError::EmptyResult);
    }
    Ok(max_res)
}

/// Whether `theta^T theta = I` within `tol` at every valid point.
pub fn is_isometric(field: &CoframeField, tol: f64) -> bool {
    let meta = field.meta;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if let Some(th) = field.theta_at(i, j) {
                if th.transpose().mul(th).sub(&Mat2::IDENTITY).max_abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Outcome of the rigidity check: an isometric, compatible coframe field
/// must be constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityReport {
    pub isometric: bool,
    pub compatible: bool,
    pub max_torsion: f64,
    pub constant: bool,
    pub max_deviation: f64,
    /// Whether the implication (isometric and compatible implies constant)
    /// is satisfied by this field.
    pub holds: bool,
}

/// Tests the implication at grid level; `tol` bounds both the isometry
/// residual and the allowed deviation from the mean coframe.
pub fn isometric_rigidity(field: &CoframeField, tol: f64) -> Result<RigidityReport, GeometryError> {
    let isometric = is_isometric(field, tol);
    let (compatible, max_torsion) =
        is_compatible(field, default_compatibility_tol(field.meta.h))?;
    let meta = field.meta;
    let mut mean = Mat2::ZERO;
    let mut n = 0usize;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if let Some(th) = field.theta_at(i, j) {
                mean = mean.add(th);
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(GeometryError::EmptyResult);
    }
    mean = mean.scale(1.0 / n as f64);
    let mut max_deviation = 0.0f64;
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            if let Some(th) = field.theta_at(i, j) {
                max_deviation = max_deviation.max(th.sub(&mean).max_abs());
            }
        }
    }
    let constant = max_deviation <= tol * mean.max_abs().max(1.0);
    Ok(RigidityReport {
        isometric,
        compatible,
        max_torsion,
        constant,
        max_deviation,
        holds: !(isometric && compatible) || constant,
    })
}
