//! The explicit multivalued distortion generator: per-puncture defect
//! charges with Gaussian-integer constraints, a single-valued meromorphic
//! background, branch-indexed evaluation of the field and its Jacobian,
//! immersion checks, and coframe sampling.
//!
//! For a charge `(a, b, c, d)` centered at `z0` and `zeta = z - z0`, the
//! multivalued part on branch `k` contributes
//!
//! ```text
//! (1 / 2 pi i) [ (a zeta + c) (Log zeta + 2 pi i k)
//!              - (b conj(zeta) + d) (conj(Log zeta) - 2 pi i k) ]
//! ```
//!
//! with `Log` the principal logarithm, so bumping `k` by one adds
//! `a zeta + b conj(zeta) + (c + d)` to the value: the affine jump the
//! holonomy module extracts in closed form.

use crate::error::FieldError;
use crate::geometry::CoframeField;
use crate::math::{recognize_int, Mat2, Vec2, INT_TOL};
use crate::region::{Disk, Rect, Region, StructuredGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub(crate) mod c64_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// A Gaussian integer (complex number with integer parts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const ZERO: GaussianInt = GaussianInt { re: 0, im: 0 };
    pub const ONE: GaussianInt = GaussianInt { re: 1, im: 0 };
    pub const I: GaussianInt = GaussianInt { re: 0, im: 1 };

    pub fn new(re: i64, im: i64) -> Self {
        GaussianInt { re, im }
    }

    pub fn norm_sq(self) -> i64 {
        self.re * self.re + self.im * self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    /// Recognizes a complex float as a Gaussian integer within `tol`.
    pub fn recognize(z: Complex64, tol: f64) -> Option<GaussianInt> {
        Some(GaussianInt {
            re: recognize_int(z.re, tol)?,
            im: recognize_int(z.im, tol)?,
        })
    }
}

impl From<[i64; 2]> for GaussianInt {
    fn from(a: [i64; 2]) -> Self {
        GaussianInt { re: a[0], im: a[1] }
    }
}

impl From<GaussianInt> for [i64; 2] {
    fn from(g: GaussianInt) -> Self {
        [g.re, g.im]
    }
}

/// One puncture's defect parameters. `a` and `b` are Gaussian integers with
/// `|a|^2 - |b|^2 = 1`; `c` and `d` are free complex weights whose sum must
/// be a Gaussian integer. The split between `c` and `d` changes the field
/// (it weights the log against the conjugate log) and is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectCharge {
    pub center: Vec2,
    pub a: GaussianInt,
    pub b: GaussianInt,
    #[serde(with = "c64_serde")]
    pub c: Complex64,
    #[serde(with = "c64_serde")]
    pub d: Complex64,
}

impl DefectCharge {
    pub fn new(
        center: Vec2,
        a: GaussianInt,
        b: GaussianInt,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, FieldError> {
        let charge = DefectCharge { center, a, b, c, d };
        validate_charge(&charge)?;
        Ok(charge)
    }

    /// The recognized exact value of `c + d`.
    pub fn translation(&self) -> Result<GaussianInt, FieldError> {
        let sum = self.c + self.d;
        GaussianInt::recognize(sum, INT_TOL).ok_or(FieldError::NonIntegerSum {
            re: sum.re,
            im: sum.im,
        })
    }
}

/// Checks the unit-norm condition and integrality of `c + d`.
pub fn validate_charge(charge: &DefectCharge) -> Result<(), FieldError> {
    let got = charge.a.norm_sq() - charge.b.norm_sq();
    if got != 1 {
        return Err(FieldError::UnitNormCondition { got });
    }
    charge.translation()?;
    Ok(())
}

/// A single-valued term of the background field: `coeff (z - center)^order`,
/// or the same expression in `conj(z)` when `conjugated` is set. Negative
/// orders are poles and must be centered inside punctures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeromorphicTerm {
    pub center: Vec2,
    #[serde(with = "c64_serde")]
    pub coeff: Complex64,
    pub order: i32,
    #[serde(default)]
    pub conjugated: bool,
}

impl MeromorphicTerm {
    /// The identity background `z`.
    pub fn identity() -> Self {
        MeromorphicTerm {
            center: Vec2::ZERO,
            coeff: Complex64::new(1.0, 0.0),
            order: 1,
            conjugated: false,
        }
    }

    fn base(&self, z: Complex64) -> Complex64 {
        let zeta = z - self.center.to_complex();
        if self.conjugated {
            zeta.conj()
        } else {
            zeta
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.coeff * self.base(z).powi(self.order)
    }

    /// Derivative with respect to the term's own variable (`z` or `conj z`).
    fn derivative(&self, z: Complex64) -> Complex64 {
        if self.order == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeff * (self.order as f64) * self.base(z).powi(self.order - 1)
    }
}

fn default_background() -> Vec<MeromorphicTerm> {
    vec![MeromorphicTerm::identity()]
}

/// Generator of a distortion field over a region: one charge per puncture
/// plus a single-valued background. A missing `w2` entry in JSON defaults
/// to the identity background, so an empty charge list reproduces the
/// undistorted reference configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub region: Region,
    #[serde(default)]
    pub charges: Vec<DefectCharge>,
    #[serde(default = "default_background")]
    pub w2: Vec<MeromorphicTerm>,
}

impl FieldSpec {
    /// Spec with the identity background.
    pub fn new(region: Region, charges: Vec<DefectCharge>) -> Self {
        FieldSpec {
            region,
            charges,
            w2: default_background(),
        }
    }

    pub fn with_background(
        region: Region,
        charges: Vec<DefectCharge>,
        w2: Vec<MeromorphicTerm>,
    ) -> Self {
        FieldSpec { region, charges, w2 }
    }

    /// Built-in demonstration configurations on the box `[-2,2]^2` with one
    /// puncture of radius 0.4 at the origin:
    ///
    /// * `edge` — unit translation holonomy (a classic edge dislocation),
    /// * `quarter-turn` — the finite-order quarter-turn lattice rotation,
    /// * `hyperbolic` — an infinite-order hyperbolic element.
    pub fn preset(name: &str) -> Option<FieldSpec> {
        let region = Region::new(
            Rect::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
            vec![Disk::new(Vec2::ZERO, 0.4)],
        );
        let zero = Complex64::new(0.0, 0.0);
        let charge = match name {
            "edge" => DefectCharge {
                center: Vec2::ZERO,
                a: GaussianInt::ONE,
                b: GaussianInt::ZERO,
                c: Complex64::new(1.0, 0.0),
                d: zero,
            },
            "quarter-turn" => DefectCharge {
                center: Vec2::ZERO,
                a: GaussianInt::I,
                b: GaussianInt::ZERO,
                c: zero,
                d: zero,
            },
            "hyperbolic" => DefectCharge {
                center: Vec2::ZERO,
                a: GaussianInt::new(1, 1),
                b: GaussianInt::ONE,
                c: zero,
                d: zero,
            },
            _ => return None,
        };
        Some(FieldSpec::new(region, vec![charge]))
    }

    pub fn preset_names() -> [&'static str; 3] {
        ["edge", "quarter-turn", "hyperbolic"]
    }

    /// Full structural validation: region invariants, charge invariants,
    /// each charge strictly inside its own puncture, poles confined to
    /// punctures, and every puncture hosting a charge or a pole.
    pub fn validate(&self) -> Result<(), FieldError> {
        self.region.validate()?;
        let mut host: Vec<Option<usize>> = vec![None; self.region.punctures.len()];
        for (i, charge) in self.charges.iter().enumerate() {
            if !(charge.center.is_finite()
                && charge.c.is_finite()
                && charge.d.is_finite())
            {
                return Err(FieldError::NonFiniteCharge { index: i });
            }
            validate_charge(charge)?;
            let p = self
                .region
                .puncture_containing(charge.center)
                .ok_or(FieldError::ChargeOutsidePunctures { index: i })?;
            if host[p].is_some() {
                return Err(FieldError::DuplicateCharge { puncture: p });
            }
            host[p] = Some(i);
        }
        let mut has_pole = vec![false; self.region.punctures.len()];
        for (t, term) in self.w2.iter().enumerate() {
            if term.order < 0 {
                match self.region.puncture_containing(term.center) {
                    Some(p) => has_pole[p] = true,
                    None => {
                        return Err(FieldError::PoleOutsidePunctures {
                            term: t,
                            order: term.order,
                        })
                    }
                }
            }
        }
        for (p, h) in host.iter().enumerate() {
            if h.is_none() && !has_pole[p] {
                return Err(FieldError::EmptyPuncture { puncture: p });
            }
        }
        Ok(())
    }
}

/// Logarithm branch offsets, one integer per defect; all-zero is the
/// principal branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchState {
    pub k: Vec<i64>,
}

impl BranchState {
    pub fn principal(defects: usize) -> Self {
        BranchState {
            k: vec![0; defects],
        }
    }

    pub fn shifted(&self, turns: &[i64]) -> Self {
        BranchState {
            k: self
                .k
                .iter()
                .zip(turns)
                .map(|(k, t)| k + t)
                .collect(),
        }
    }
}

fn check_domain(spec: &FieldSpec, z: Complex64) -> Result<(), FieldError> {
    let p = Vec2::from_complex(z);
    if let Some(idx) = spec.region.puncture_containing(p) {
        return Err(FieldError::InsidePuncture {
            x: p.x,
            y: p.y,
            puncture: idx,
        });
    }
    for charge in &spec.charges {
        if (z - charge.center.to_complex()).norm_sqr() < 1e-280 {
            return Err(FieldError::AtSingularity { x: p.x, y: p.y });
        }
    }
    for term in &spec.w2 {
        if term.order < 0 && (z - term.center.to_complex()).norm_sqr() < 1e-280 {
            return Err(FieldError::AtSingularity { x: p.x, y: p.y });
        }
    }
    Ok(())
}

fn check_branch(spec: &FieldSpec, branch: &BranchState) -> Result<(), FieldError> {
    if branch.k.len() != spec.charges.len() {
        return Err(FieldError::BranchLength {
            got: branch.k.len(),
            expected: spec.charges.len(),
        });
    }
    Ok(())
}

/// Evaluates the field at `z` on the given branch.
pub fn value(spec: &FieldSpec, z: Complex64, branch: &BranchState) -> Result<Complex64, FieldError> {
    check_domain(spec, z)?;
    check_branch(spec, branch)?;
    let inv_two_pi_i = Complex64::new(0.0, -1.0 / TAU);
    let mut sum = Complex64::new(0.0, 0.0);
    for (charge, &k) in spec.charges.iter().zip(&branch.k) {
        let zeta = z - charge.center.to_complex();
        let log = zeta.ln();
        let shift = Complex64::new(0.0, TAU * k as f64);
        let fwd = (charge.a.to_complex() * zeta + charge.c) * (log + shift);
        let bwd = (charge.b.to_complex() * zeta.conj() + charge.d) * (log.conj() - shift);
        sum += fwd - bwd;
    }
    let mut w = sum * inv_two_pi_i;
    for term in &spec.w2 {
        w += term.eval(z);
    }
    Ok(w)
}

/// The displacement `w(z) - z` away from the reference configuration.
pub fn displacement(
    spec: &FieldSpec,
    z: Complex64,
    branch: &BranchState,
) -> Result<Complex64, FieldError> {
    Ok(value(spec, z, branch)? - z)
}

/// The two Wirtinger derivatives of the field and the real 2x2 Jacobian
/// they assemble into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianEval {
    /// d w / d z
    pub dz: Complex64,
    /// d w / d conj(z)
    pub dzbar: Complex64,
    /// Real Jacobian of (Re w, Im w) with respect to (x, y).
    pub matrix: Mat2,
}

impl JacobianEval {
    /// `det J = |dw/dz|^2 - |dw/dzbar|^2`, the second algebraic route to
    /// the determinant.
    pub fn det_from_derivatives(&self) -> f64 {
        self.dz.norm_sqr() - self.dzbar.norm_sqr()
    }
}

fn jacobian_matrix(p: Complex64, q: Complex64) -> Mat2 {
    let s = p + q;
    let r = p - q;
    Mat2([[s.re, -r.im], [s.im, r.re]])
}

/// Term-wise derivative of the field at `z` on the given branch.
pub fn jacobian(
    spec: &FieldSpec,
    z: Complex64,
    branch: &BranchState,
) -> Result<JacobianEval, FieldError> {
    check_domain(spec, z)?;
    check_branch(spec, branch)?;
    let inv_two_pi_i = Complex64::new(0.0, -1.0 / TAU);
    let mut p = Complex64::new(0.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    for (charge, &k) in spec.charges.iter().zip(&branch.k) {
        let zeta = z - charge.center.to_complex();
        let log = zeta.ln();
        let shift = Complex64::new(0.0, TAU * k as f64);
        let a = charge.a.to_complex();
        let b = charge.b.to_complex();
        p += a * (log + shift) + a + charge.c / zeta;
        q -= b * (log.conj() - shift) + b + charge.d / zeta.conj();
    }
    p *= inv_two_pi_i;
    q *= inv_two_pi_i;
    for term in &spec.w2 {
        if term.conjugated {
            q += term.derivative(z);
        } else {
            p += term.derivative(z);
        }
    }
    Ok(JacobianEval {
        dz: p,
        dzbar: q,
        matrix: jacobian_matrix(p, q),
    })
}

/// A grid point where the field fails to be an orientation-preserving
/// immersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneratePoint {
    pub point: Vec2,
    pub det: f64,
}

/// Checks `det J > delta` at every point; the returned list is empty when
/// the check passes. `delta` scales as `1e-10` times the squared magnitude
/// of the sampled Jacobians. Evaluation failures are reported as
/// degenerate with a NaN determinant.
pub fn immersion_failures(
    spec: &FieldSpec,
    points: &[Vec2],
    branch: &BranchState,
) -> Vec<DegeneratePoint> {
    let evals: Vec<(Vec2, Option<f64>, f64)> = points
        .iter()
        .map(|&pt| match jacobian(spec, pt.to_complex(), branch) {
            Ok(j) => (pt, Some(j.matrix.det()), j.matrix.max_abs()),
            Err(_) => (pt, None, 0.0),
        })
        .collect();
    let scale = evals
        .iter()
        .map(|(_, _, m)| *m)
        .fold(0.0f64, f64::max)
        .max(1e-30);
    let delta = 1e-10 * scale * scale;
    evals
        .into_iter()
        .filter_map(|(pt, det, _)| match det {
            Some(d) if d > delta => None,
            Some(d) => Some(DegeneratePoint { point: pt, det: d }),
            None => Some(DegeneratePoint {
                point: pt,
                det: f64::NAN,
            }),
        })
        .collect()
}

/// Branch-cut convention for single-sheet sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutRule {
    /// Principal branch with a cut ray in the `-x` direction from each
    /// defect center.
    #[default]
    NegativeXRays,
}

/// Samples the principal-branch Jacobian over a structured grid into a
/// coframe field. Grid points sitting on a cut are excluded; grid links
/// crossing a cut are flagged so differential stencils skip them.
pub fn build_coframe(spec: &FieldSpec, grid: &StructuredGrid, _rule: CutRule) -> CoframeField {
    let meta = grid.meta;
    let branch = BranchState::principal(spec.charges.len());
    let cuts: Vec<Vec2> = spec.charges.iter().map(|c| c.center).collect();
    let on_cut = |p: Vec2| -> bool {
        cuts.iter().any(|c| {
            let eps = 1e-9 * (1.0 + c.norm() + p.norm());
            (p.y - c.y).abs() <= eps && p.x <= c.x + eps
        })
    };

    let mut valid = vec![false; meta.len()];
    let mut theta = vec![Mat2::IDENTITY; meta.len()];
    for j in 0..meta.ny {
        for i in 0..meta.nx {
            let idx = meta.index(i, j);
            if !grid.valid[idx] {
                continue;
            }
            let pt = meta.point(i, j);
            if on_cut(pt) {
                continue;
            }
            if let Ok(jac) = jacobian(spec, pt.to_complex(), &branch) {
                let m = jac.matrix;
                if m.is_finite() && m.det().abs() > 1e-14 * m.max_abs().max(1.0).powi(2) {
                    valid[idx] = true;
                    theta[idx] = m;
                }
            }
        }
    }

    // A vertical grid link crosses a horizontal cut ray when its x is left
    // of the center and its y interval straddles the ray.
    let mut cut_x = vec![false; meta.nx.saturating_sub(1) * meta.ny];
    let mut cut_y = vec![false; meta.nx * meta.ny.saturating_sub(1)];
    for j in 0..meta.ny.saturating_sub(1) {
        for i in 0..meta.nx {
            let a = meta.point(i, j);
            let b = meta.point(i, j + 1);
            let crossed = cuts
                .iter()
                .any(|c| a.x <= c.x + 1e-12 && (a.y - c.y) * (b.y - c.y) < 0.0);
            cut_y[j * meta.nx + i] = crossed;
        }
    }
    // Horizontal links run along constant y and can only meet a horizontal
    // ray collinearly; the on-cut point exclusion already covers that.
    let _ = &mut cut_x;

    CoframeField::from_parts(meta, valid, theta, cut_x, cut_y)
}
