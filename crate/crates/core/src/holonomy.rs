//! Analytic continuation of the distortion field along loops, extraction
//! of Burgers/holonomy elements, and the cross-check between the numeric
//! continuation and the closed-form per-defect elements.
//!
//! Continuation tracks the continuous argument of `z - z0` for every
//! defect center along the loop rather than counting cut crossings, which
//! keeps it robust for loops that graze a cut.

use crate::error::{FieldError, HolonomyError};
use crate::field::{jacobian, value, BranchState, DefectCharge, FieldSpec};
use crate::lattice::LatticeTransform;
use crate::math::{recognize_int, IMat2, IVec2, Mat2, Vec2};
use crate::region::{segment_distance, winding_numbers, Loop};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A holonomy/Burgers element in centered form: the affine map
/// `x -> center + M (x - center) + t` with integer unimodular `M` and
/// integer translation `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteredAffine {
    #[serde(rename = "M")]
    pub m: IMat2,
    pub t: IVec2,
    pub center: Vec2,
}

impl CenteredAffine {
    pub fn identity_at(center: Vec2) -> Self {
        CenteredAffine {
            m: IMat2::IDENTITY,
            t: IVec2::ZERO,
            center,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.m == IMat2::IDENTITY && self.t == IVec2::ZERO
    }

    /// The affine map applied to a point.
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.center + self.m.to_mat2().mul_col(p - self.center) + self.t.to_vec2()
    }

    /// The per-turn jump `M (base - center) + t` this element contributes
    /// to the field value at `base`, as a complex number.
    pub fn jump_at(&self, base: Vec2) -> Complex64 {
        (self.m.to_mat2().mul_col(base - self.center) + self.t.to_vec2()).to_complex()
    }

    /// Conversion to a plain lattice transform `x -> A x + b` with
    /// `b = (I - M) center + t`. Refused unless `b` is integral within
    /// `tol`, which happens exactly when the center is anchored to the
    /// reference lattice appropriately.
    pub fn to_lattice_transform(&self, tol: f64) -> Result<LatticeTransform, HolonomyError> {
        let mf = self.m.to_mat2();
        let shift = self.center - mf.mul_col(self.center) + self.t.to_vec2();
        let bx = recognize_int(shift.x, tol);
        let by = recognize_int(shift.y, tol);
        match (bx, by) {
            (Some(x), Some(y)) => Ok(LatticeTransform {
                a: self.m,
                b: IVec2::new(x, y),
            }),
            _ => Err(HolonomyError::NonIntegralAnchor {
                x: shift.x,
                y: shift.y,
            }),
        }
    }
}

/// The closed-form holonomy element of a single charge:
/// `M = [[Re(a+b), -Im(a-b)], [Im(a+b), Re(a-b)]]`, `t = c + d`,
/// centered at the defect. `det M = |a|^2 - |b|^2 = 1` exactly.
pub fn closed_form_holonomy(charge: &DefectCharge) -> Result<CenteredAffine, FieldError> {
    crate::field::validate_charge(charge)?;
    let (a, b) = (charge.a, charge.b);
    let m = IMat2([
        [a.re + b.re, -(a.im - b.im)],
        [a.im + b.im, a.re - b.re],
    ]);
    debug_assert_eq!(m.det(), a.norm_sq() - b.norm_sq());
    let t = charge.translation()?;
    Ok(CenteredAffine {
        m,
        t: IVec2::new(t.re, t.im),
        center: charge.center,
    })
}

/// Result of continuing the field once around a loop: net branch
/// increments per defect and the induced jumps of the value and Jacobian
/// at the loop's base point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub turns: Vec<i64>,
    pub jump_w: Complex64,
    pub jump_j: Mat2,
    /// Per-defect contribution `k (a zeta + b conj(zeta) + c + d)` at the
    /// base point.
    pub per_defect: Vec<Complex64>,
}

/// Accumulated swept angle of `z - center` along the polyline, with
/// automatic segment subdivision to keep each increment below pi/2.
fn swept_angle(center: Vec2, lp: &Loop) -> Result<f64, HolonomyError> {
    let mut total = 0.0;
    for (index, (a, b)) in lp.segments().enumerate() {
        total += segment_sweep(center, a, b, 0, index)?;
    }
    Ok(total)
}

fn segment_sweep(
    center: Vec2,
    a: Vec2,
    b: Vec2,
    depth: u32,
    index: usize,
) -> Result<f64, HolonomyError> {
    let ra = (a - center).norm_sq();
    let rb = (b - center).norm_sq();
    if ra < 1e-280 || rb < 1e-280 {
        return Err(HolonomyError::StepBound { index });
    }
    let inc = crate::region::arg_increment(center, a, b);
    if inc.abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(inc);
    }
    if depth >= 48 {
        return Err(HolonomyError::StepBound { index });
    }
    let mid = (a + b) * 0.5;
    Ok(segment_sweep(center, a, mid, depth + 1, index)?
        + segment_sweep(center, mid, b, depth + 1, index)?)
}

/// Continues the field along `lp` starting from `base_branch` and reports
/// the branch increments and base-point jumps.
pub fn continue_along_loop(
    spec: &FieldSpec,
    lp: &Loop,
    base_branch: &BranchState,
) -> Result<ContinuationResult, HolonomyError> {
    // Reject loops that touch a puncture before doing any analysis.
    for (s, (a, b)) in lp.segments().enumerate() {
        for (pi, d) in spec.region.punctures.iter().enumerate() {
            if segment_distance(d.center, a, b) <= d.radius {
                return Err(HolonomyError::Region(
                    crate::error::RegionError::LoopHitsPuncture {
                        segment: s,
                        puncture: pi,
                    },
                ));
            }
        }
    }
    let mut turns = Vec::with_capacity(spec.charges.len());
    for (di, charge) in spec.charges.iter().enumerate() {
        let total = swept_angle(charge.center, lp)?;
        let t = total / TAU;
        let rounded = t.round();
        if (t - rounded).abs() >= 1e-6 {
            return Err(HolonomyError::NonIntegerTurns {
                defect: di,
                turns: t,
                residual: (t - rounded).abs(),
            });
        }
        turns.push(rounded as i64);
    }
    let final_branch = base_branch.shifted(&turns);
    let base = lp.base_point().to_complex();
    let jump_w = value(spec, base, &final_branch)? - value(spec, base, base_branch)?;
    let jump_j = jacobian(spec, base, &final_branch)?
        .matrix
        .sub(&jacobian(spec, base, base_branch)?.matrix);
    let per_defect = spec
        .charges
        .iter()
        .zip(&turns)
        .map(|(charge, &k)| {
            let zeta = base - charge.center.to_complex();
            (k as f64)
                * (charge.a.to_complex() * zeta
                    + charge.b.to_complex() * zeta.conj()
                    + charge.c
                    + charge.d)
        })
        .collect();
    Ok(ContinuationResult {
        turns,
        jump_w,
        jump_j,
        per_defect,
    })
}

/// The closed-form side of the holonomy comparison: puncture windings
/// paired with per-defect elements, plus the predicted base-point jump.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersDecomposition {
    /// Winding number per puncture.
    pub windings: Vec<i64>,
    /// `(winding, element)` for every enclosed charge.
    pub elements: Vec<(i64, CenteredAffine)>,
    pub base: Vec2,
}

impl BurgersDecomposition {
    /// `sum winding * (M (base - center) + t)` over enclosed charges.
    pub fn predicted_jump(&self) -> Complex64 {
        self.elements
            .iter()
            .map(|(w, e)| e.jump_at(self.base) * (*w as f64))
            .sum()
    }

    /// `sum winding * M` over enclosed charges.
    pub fn predicted_jump_matrix(&self) -> Mat2 {
        self.elements
            .iter()
            .fold(Mat2::ZERO, |acc, (w, e)| {
                acc.add(&e.m.to_mat2().scale(*w as f64))
            })
    }
}

/// Pairs each puncture's winding number with its charge's closed-form
/// element.
pub fn burgers_decomposition(
    spec: &FieldSpec,
    lp: &Loop,
) -> Result<BurgersDecomposition, HolonomyError> {
    let windings = winding_numbers(lp, &spec.region)?;
    let mut elements = Vec::new();
    for charge in &spec.charges {
        let w = spec
            .region
            .puncture_containing(charge.center)
            .map(|p| windings[p])
            .unwrap_or(0);
        if w != 0 {
            elements.push((w, closed_form_holonomy(charge)?));
        }
    }
    Ok(BurgersDecomposition {
        windings,
        elements,
        base: lp.base_point(),
    })
}

/// Outcome of the equality check between the numeric continuation and the
/// closed-form decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyCheck {
    pub verified: bool,
    pub residual: f64,
    pub continuation: ContinuationResult,
    pub burgers: BurgersDecomposition,
}

/// Residual between the two routes: value-jump mismatch plus the max-norm
/// mismatch of the Jacobian jump.
pub fn check_residual(cont: &ContinuationResult, burgers: &BurgersDecomposition) -> f64 {
    (cont.jump_w - burgers.predicted_jump()).norm()
        + cont.jump_j.sub(&burgers.predicted_jump_matrix()).max_abs()
}

/// Runs both routes and compares them at tolerance `tol`.
pub fn verify_holonomy(
    spec: &FieldSpec,
    lp: &Loop,
    tol: f64,
) -> Result<HolonomyCheck, HolonomyError> {
    let continuation = continue_along_loop(spec, lp, &BranchState::principal(spec.charges.len()))?;
    let burgers = burgers_decomposition(spec, lp)?;
    let residual = check_residual(&continuation, &burgers);
    Ok(HolonomyCheck {
        verified: residual <= tol,
        residual,
        continuation,
        burgers,
    })
}

/// Argument-principle winding of the derivative `dw/dz` along the loop.
/// The derivative is continued along the path (its log branches follow the
/// loop), so the count is well defined whenever the continued derivative
/// closes up; enclosing defect charges generally breaks closure and is
/// reported as indeterminate.
pub fn field_winding(spec: &FieldSpec, lp: &Loop) -> Result<i64, HolonomyError> {
    // Refine globally until both the per-defect argument steps and the
    // derivative argument steps are below pi/2.
    let mut points: Vec<Vec2> = lp.points().to_vec();
    for _ in 0..12 {
        match try_field_winding(spec, &points)? {
            Some(turns) => {
                let rounded = turns.round();
                if (turns - rounded).abs() >= 1e-6 {
                    return Err(HolonomyError::IndeterminateWinding {
                        reason: format!(
                            "continued derivative does not close up (winding {turns:.6})"
                        ),
                    });
                }
                return Ok(rounded as i64);
            }
            None => {
                // Double the sampling.
                let mut refined = Vec::with_capacity(points.len() * 2);
                let n = points.len();
                for i in 0..n {
                    let a = points[i];
                    let b = points[(i + 1) % n];
                    refined.push(a);
                    refined.push((a + b) * 0.5);
                }
                points = refined;
            }
        }
    }
    Err(HolonomyError::IndeterminateWinding {
        reason: "argument step bound not met after maximum refinement".into(),
    })
}

/// One pass over the sampled loop; `None` requests refinement.
fn try_field_winding(spec: &FieldSpec, points: &[Vec2]) -> Result<Option<f64>, HolonomyError> {
    let n = points.len();
    // Continuously tracked argument per defect, seeded by the principal
    // value at the base point.
    let mut args: Vec<f64> = spec
        .charges
        .iter()
        .map(|c| (points[0] - c.center).to_complex().arg())
        .collect();
    let inv_two_pi_i = Complex64::new(0.0, -1.0 / TAU);

    let derivative_at = |z: Complex64, args: &[f64]| -> Complex64 {
        let mut p = Complex64::new(0.0, 0.0);
        for (charge, &arg) in spec.charges.iter().zip(args) {
            let zeta = z - charge.center.to_complex();
            let log = Complex64::new(zeta.norm().ln(), arg);
            let a = charge.a.to_complex();
            p += a * log + a + charge.c / zeta;
        }
        p *= inv_two_pi_i;
        for term in &spec.w2 {
            if !term.conjugated {
                p += match term.order {
                    0 => Complex64::new(0.0, 0.0),
                    o => term.coeff * (o as f64) * (z - term.center.to_complex()).powi(o - 1),
                };
            }
        }
        p
    };

    let scale: f64 = {
        let p0 = derivative_at(points[0].to_complex(), &args);
        p0.norm().max(1e-12)
    };
    let mut total = 0.0f64;
    let mut prev_p = derivative_at(points[0].to_complex(), &args);
    if prev_p.norm() <= 1e-8 * scale {
        return Err(HolonomyError::IndeterminateWinding {
            reason: "derivative magnitude below threshold on the loop".into(),
        });
    }
    for step in 0..n {
        let a = points[step];
        let b = points[(step + 1) % n];
        // Advance the tracked defect arguments across this segment.
        for (ci, charge) in spec.charges.iter().enumerate() {
            let inc = crate::region::arg_increment(charge.center, a, b);
            if inc.abs() >= std::f64::consts::FRAC_PI_2 {
                return Ok(None);
            }
            args[ci] += inc;
        }
        let p = derivative_at(b.to_complex(), &args);
        if p.norm() <= 1e-8 * scale {
            return Err(HolonomyError::IndeterminateWinding {
                reason: "derivative magnitude below threshold on the loop".into(),
            });
        }
        let inc = (p / prev_p).arg();
        if inc.abs() >= std::f64::consts::FRAC_PI_2 {
            return Ok(None);
        }
        total += inc;
        prev_p = p;
    }
    Ok(Some(total / TAU))
}
