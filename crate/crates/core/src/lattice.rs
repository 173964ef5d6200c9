//! Affine frames for plane Bravais lattices, integer unimodular frame
//! changes (SA(2,Z)), Lagrange-Gauss basis reduction, canonical
//! representatives, and classification into the four 2D crystallographic
//! systems.
//!
//! Conventions: basis vectors are the *rows* of the basis matrix, the
//! linear part of a lattice transform acts on the left (`B' = A B`), and
//! the translation part shifts the origin by an integer combination of the
//! *old* basis rows (`o' = o + b B`).

use crate::error::LatticeError;
use crate::math::{recognize_int, IMat2, IVec2, Mat2, Vec2, INT_TOL};
use serde::{Deserialize, Serialize};

/// Condition-number limit above which frame comparisons are refused.
pub const COND_LIMIT: f64 = 1e8;

/// An oriented affine frame: an origin point and two independent basis
/// vectors spanning a plane lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFrame {
    pub origin: Vec2,
    pub basis: Mat2,
}

impl AffineFrame {
    /// Validates orientation (`det > 0`), finiteness and non-degeneracy.
    pub fn new(origin: Vec2, basis: Mat2) -> Result<Self, LatticeError> {
        if !origin.is_finite() || !basis.is_finite() {
            return Err(LatticeError::NonFinite);
        }
        let det = basis.det();
        let scale = basis.max_abs();
        if det <= 0.0 {
            return Err(LatticeError::NotPositivelyOriented { det });
        }
        if det <= 1e-12 * scale * scale {
            return Err(LatticeError::DegenerateBasis { det, scale });
        }
        Ok(AffineFrame { origin, basis })
    }

    pub fn unit_square() -> Self {
        AffineFrame {
            origin: Vec2::ZERO,
            basis: Mat2::IDENTITY,
        }
    }

    pub fn basis_row(&self, i: usize) -> Vec2 {
        self.basis.row(i)
    }

    pub fn condition_number(&self) -> f64 {
        self.basis.condition_number()
    }

    /// The frame rotated rigidly about the coordinate origin.
    pub fn rotated(&self, phi: f64) -> Self {
        AffineFrame {
            origin: self.origin.rotated(phi),
            basis: Mat2::from_rows(
                self.basis.row(0).rotated(phi),
                self.basis.row(1).rotated(phi),
            ),
        }
    }

    /// Lattice points `origin + m a1 + n a2` for `|m|, |n| <= range`.
    pub fn lattice_points(&self, range: i64) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for m in -range..=range {
            for n in -range..=range {
                pts.push(
                    self.origin
                        + self.basis.row(0) * (m as f64)
                        + self.basis.row(1) * (n as f64),
                );
            }
        }
        pts
    }

    fn check_conditioning(&self) -> Result<(), LatticeError> {
        let cond = self.condition_number();
        if cond > COND_LIMIT {
            return Err(LatticeError::IllConditioned {
                cond,
                limit: COND_LIMIT,
            });
        }
        Ok(())
    }
}

/// An integer unimodular frame change together with an integer lattice
/// translation: an element of SA(2,Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeTransform {
    #[serde(rename = "A")]
    pub a: IMat2,
    pub b: IVec2,
}

impl LatticeTransform {
    /// Requires `det A = +1` exactly.
    pub fn new(a: IMat2, b: IVec2) -> Result<Self, LatticeError> {
        let det = a.det();
        if det != 1 {
            return Err(LatticeError::NotUnimodular { det });
        }
        Ok(LatticeTransform { a, b })
    }

    pub fn identity() -> Self {
        LatticeTransform {
            a: IMat2::IDENTITY,
            b: IVec2::ZERO,
        }
    }

    /// The element whose action equals acting by `self` first, `then` second.
    pub fn compose(&self, then: &LatticeTransform) -> LatticeTransform {
        LatticeTransform {
            a: then.a.mul(&self.a),
            b: self.b.add(then.b.mul_mat(&self.a)),
        }
    }

    pub fn inverse(&self) -> LatticeTransform {
        let a_inv = self.a.unimodular_inverse();
        LatticeTransform {
            a: a_inv,
            b: self.b.mul_mat(&a_inv).neg(),
        }
    }

    /// New basis rows `A B`, new origin `o + b B` (old basis).
    pub fn apply(&self, r: &AffineFrame) -> AffineFrame {
        AffineFrame {
            origin: r.origin + self.b.to_vec2().mul_mat(&r.basis),
            basis: self.a.to_mat2().mul(&r.basis),
        }
    }
}

/// Decides whether two frames span the same lattice; if so returns the
/// witnessing transform `g` with `g.apply(r1) == r2` up to `tol`.
pub fn frames_equivalent(
    r1: &AffineFrame,
    r2: &AffineFrame,
    tol: f64,
) -> Result<Option<LatticeTransform>, LatticeError> {
    r1.check_conditioning()?;
    r2.check_conditioning()?;
    let inv1 = r1
        .basis
        .inverse()
        .ok_or(LatticeError::DegenerateBasis {
            det: r1.basis.det(),
            scale: r1.basis.max_abs(),
        })?;
    // Linear part candidate from B2 = A B1.
    let m = r2.basis.mul(&inv1);
    let mut a = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            match recognize_int(m.0[i][j], tol) {
                Some(v) => a[i][j] = v,
                None => return Ok(None),
            }
        }
    }
    let a = IMat2(a);
    if a.det() != 1 {
        return Ok(None);
    }
    // Translation candidate from o2 = o1 + b B1.
    let shift = (r2.origin - r1.origin).mul_mat(&inv1);
    let bx = match recognize_int(shift.x, tol) {
        Some(v) => v,
        None => return Ok(None),
    };
    let by = match recognize_int(shift.y, tol) {
        Some(v) => v,
        None => return Ok(None),
    };
    let g = LatticeTransform {
        a,
        b: IVec2::new(bx, by),
    };
    // Confirm the witness reproduces r2.
    let image = g.apply(r1);
    let scale = r1.basis.max_abs().max(r2.basis.max_abs());
    let err = image
        .basis
        .sub(&r2.basis)
        .max_abs()
        .max((image.origin - r2.origin).norm());
    if err <= tol * (1.0 + scale) * 1e3 {
        Ok(Some(g))
    } else {
        Ok(None)
    }
}

/// A Lagrange-Gauss reduced basis: `|b1| <= |b2|` and `2 |b1.b2| <= |b1|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedBasis {
    pub b1: Vec2,
    pub b2: Vec2,
    /// Set when the canonical choice rested on a comparison closer than
    /// the working tolerance; the output is still deterministic.
    pub near_tie: bool,
}

impl ReducedBasis {
    pub fn norm1(&self) -> f64 {
        self.b1.norm()
    }

    pub fn norm2(&self) -> f64 {
        self.b2.norm()
    }

    pub fn inner(&self) -> f64 {
        self.b1.dot(self.b2)
    }
}

/// One of the four 2D crystallographic systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeClass {
    Oblique,
    Rectangular,
    Square,
    Hexagonal,
}

impl std::fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LatticeClass::Oblique => "oblique",
            LatticeClass::Rectangular => "rectangular",
            LatticeClass::Square => "square",
            LatticeClass::Hexagonal => "hexagonal",
        };
        f.write_str(s)
    }
}

/// Classification plus the centered-rectangular advisory flag (a Bravais
/// type on the rectangular/oblique boundary that the four-system split
/// reports as oblique).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub class: LatticeClass,
    pub centered_rectangular_hint: bool,
}

fn gauss_reduce(mut u: Vec2, mut v: Vec2) -> Result<(Vec2, Vec2), LatticeError> {
    for _ in 0..256 {
        if u.norm_sq() > v.norm_sq() {
            std::mem::swap(&mut u, &mut v);
        }
        let mu = (u.dot(v) / u.norm_sq()).round();
        if mu == 0.0 {
            return Ok((u, v));
        }
        v = v - u * mu;
    }
    Err(LatticeError::ReductionStalled)
}

/// Canonical reduced pair selection. Among the shortest lattice vectors,
/// `b1` is the one with the smallest polar angle in `[0, 2*pi)`; `b2` is
/// chosen the same way among the shortest independent vectors that keep
/// positive orientation.
fn canonical_reduced(
    frame: &AffineFrame,
    tol: f64,
) -> Result<ReducedBasis, LatticeError> {
    let (u, v) = gauss_reduce(frame.basis.row(0), frame.basis.row(1))?;
    let lattice_det = frame.basis.det();

    // Small integer combinations cover the shortest and second-shortest
    // vectors of a reduced basis.
    let mut cands: Vec<Vec2> = Vec::new();
    for m in -2i64..=2 {
        for n in -2i64..=2 {
            if m == 0 && n == 0 {
                continue;
            }
            cands.push(u * (m as f64) + v * (n as f64));
        }
    }

    let min_sq = cands
        .iter()
        .map(|c| c.norm_sq())
        .fold(f64::INFINITY, f64::min);
    let tie = tol.max(f64::EPSILON * 16.0) * min_sq;
    let near = 1e3 * tie;
    let mut near_tie = false;

    let b1 = cands
        .iter()
        .filter(|c| c.norm_sq() <= min_sq + tie)
        .min_by(|a, b| a.polar_angle().partial_cmp(&b.polar_angle()).unwrap())
        .copied()
        .unwrap();
    if cands
        .iter()
        .any(|c| c.norm_sq() > min_sq + tie && c.norm_sq() <= min_sq + near)
    {
        near_tie = true;
    }

    // Independent partners that span the full lattice with positive
    // orientation.
    let partners: Vec<Vec2> = cands
        .iter()
        .filter(|c| {
            let cross = b1.cross(**c);
            cross > 0.0 && (cross - lattice_det).abs() <= 1e-6 * lattice_det
        })
        .copied()
        .collect();
    let min2_sq = partners
        .iter()
        .map(|c| c.norm_sq())
        .fold(f64::INFINITY, f64::min);
    let tie2 = tol.max(f64::EPSILON * 16.0) * min2_sq;
    let b2 = partners
        .iter()
        .filter(|c| c.norm_sq() <= min2_sq + tie2)
        .min_by(|a, b| a.polar_angle().partial_cmp(&b.polar_angle()).unwrap())
        .copied()
        .unwrap();
    if partners
        .iter()
        .any(|c| c.norm_sq() > min2_sq + tie2 && c.norm_sq() <= min2_sq + 1e3 * tie2)
    {
        near_tie = true;
    }

    Ok(ReducedBasis { b1, b2, near_tie })
}

/// Lagrange-Gauss reduction with the canonical deterministic tie-break.
/// The output spans the same lattice as the input.
pub fn reduce_basis(frame: &AffineFrame) -> Result<ReducedBasis, LatticeError> {
    canonical_reduced(frame, INT_TOL)
}

/// Classifies the lattice of `frame` into one of the four 2D systems.
/// Invariant under lattice transforms and rigid rotations.
pub fn classify(frame: &AffineFrame, tol: f64) -> Result<LatticeClass, LatticeError> {
    Ok(classify_detailed(frame, tol)?.class)
}

pub fn classify_detailed(
    frame: &AffineFrame,
    tol: f64,
) -> Result<ClassifyOutcome, LatticeError> {
    let red = canonical_reduced(frame, tol)?;
    let n1 = red.norm1();
    let n2 = red.norm2();
    let p = red.inner();
    let eq_norm = (n2 - n1).abs() <= tol * n2;
    let cos = p / (n1 * n2);
    let ortho = cos.abs() <= tol;
    let half_cos = (cos.abs() - 0.5).abs() <= tol;

    let class = if eq_norm && ortho {
        LatticeClass::Square
    } else if eq_norm && half_cos {
        LatticeClass::Hexagonal
    } else if ortho {
        LatticeClass::Rectangular
    } else {
        LatticeClass::Oblique
    };
    // A rhombic cell (equal norms) or a cell with 2|p| = |b1|^2 is the
    // centered-rectangular Bravais type, which the four-way split files
    // under oblique.
    let boundary = eq_norm || (2.0 * p.abs() - n1 * n1).abs() <= tol * n1 * n1;
    Ok(ClassifyOutcome {
        class,
        centered_rectangular_hint: class == LatticeClass::Oblique && boundary,
    })
}

/// Splits a frame into its cell area and an equi-areal frame with unit
/// determinant; scaling the unimodular frame by `sqrt(area)` recovers the
/// input.
pub fn area_split(frame: &AffineFrame) -> (f64, AffineFrame) {
    let area = frame.basis.det();
    let s = 1.0 / area.sqrt();
    (
        area,
        AffineFrame {
            origin: frame.origin,
            basis: frame.basis.scale(s),
        },
    )
}

/// A canonical representative of a frame's equivalence class under
/// lattice transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub frame: AffineFrame,
    pub near_tie: bool,
}

/// Canonical form: canonical reduced basis, origin reduced modulo the
/// lattice into `[0,1)^2` in lattice coordinates. Equal outputs for
/// equivalent inputs.
pub fn canonical_form(frame: &AffineFrame, tol: f64) -> Result<CanonicalForm, LatticeError> {
    let red = canonical_reduced(frame, tol)?;
    let basis = Mat2::from_rows(red.b1, red.b2);
    let inv = basis.inverse().ok_or(LatticeError::DegenerateBasis {
        det: basis.det(),
        scale: basis.max_abs(),
    })?;
    let coords = frame.origin.mul_mat(&inv);
    let frac = |c: f64| -> f64 {
        // Snap near-integer coordinates so equivalent origins agree exactly.
        let c = match recognize_int(c, tol) {
            Some(v) => v as f64,
            None => c,
        };
        c - c.floor()
    };
    let origin = Vec2::new(frac(coords.x), frac(coords.y)).mul_mat(&basis);
    Ok(CanonicalForm {
        frame: AffineFrame { origin, basis },
        near_tie: red.near_tie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_frame(rng: &mut impl Rng) -> AffineFrame {
        loop {
            let basis = Mat2([
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            ]);
            if basis.det() > 0.1 {
                let origin = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                return AffineFrame { origin, basis };
            }
        }
    }

    pub(crate) fn random_transform(rng: &mut impl Rng) -> LatticeTransform {
        // Random word in the standard generators keeps entries small-ish.
        let shear = IMat2([[1, 1], [0, 1]]);
        let shear_inv = IMat2([[1, -1], [0, 1]]);
        let quarter = IMat2([[0, -1], [1, 0]]);
        let mut a = IMat2::IDENTITY;
        for _ in 0..rng.gen_range(1..8) {
            a = match rng.gen_range(0..3) {
                0 => shear.mul(&a),
                1 => shear_inv.mul(&a),
                _ => quarter.mul(&a),
            };
        }
        LatticeTransform {
            a,
            b: IVec2::new(rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
        }
    }

    #[test]
    fn compose_identity_inverse_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = random_transform(&mut rng);
            let id = LatticeTransform::identity();
            assert_eq!(id.compose(&g), g);
            assert_eq!(g.compose(&id), g);
            assert_eq!(g.compose(&g.inverse()), id);
            assert_eq!(g.inverse().compose(&g), id);
            assert_eq!(g.a.det(), 1);

            let h = random_transform(&mut rng);
            let k = random_transform(&mut rng);
            let left = g.compose(&h).compose(&k);
            let right = g.compose(&h.compose(&k));
            assert_eq!(left, right);
            assert_eq!(left.a.det(), 1);
        }
    }

    #[test]
    fn compose_matches_action_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g1 = LatticeTransform::new(IMat2([[1, 1], [0, 1]]), IVec2::ZERO).unwrap();
        let g2 = LatticeTransform::new(IMat2([[1, 0], [1, 1]]), IVec2::ZERO).unwrap();
        for _ in 0..20 {
            let r = random_frame(&mut rng);
            let lhs = g1.compose(&g2).apply(&r);
            let rhs = g2.apply(&g1.apply(&r));
            assert!(lhs.basis.sub(&rhs.basis).max_abs() < 1e-12);
            assert!((lhs.origin - rhs.origin).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_shear_to_unit_square() {
        let g = LatticeTransform::new(IMat2([[1, 1], [0, 1]]), IVec2::ZERO).unwrap();
        let r = g.apply(&AffineFrame::unit_square());
        assert_eq!(r.basis.row(0), Vec2::new(1.0, 1.0));
        assert_eq!(r.basis.row(1), Vec2::new(0.0, 1.0));
        assert_eq!(r.origin, Vec2::ZERO);
    }

    #[test]
    fn apply_pure_translation() {
        let g = LatticeTransform::new(IMat2::IDENTITY, IVec2::new(2, 3)).unwrap();
        let r = g.apply(&AffineFrame::unit_square());
        assert_eq!(r.origin, Vec2::new(2.0, 3.0));
        assert_eq!(r.basis, Mat2::IDENTITY);
    }

    #[test]
    fn equivalence_finds_constructed_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let r = random_frame(&mut rng);
            let g = random_transform(&mut rng);
            let r2 = g.apply(&r);
            let found = frames_equivalent(&r, &r2, 1e-9).unwrap().unwrap();
            assert_eq!(found, g);
        }
    }

    #[test]
    fn sublattice_is_not_equivalent() {
        let r1 = AffineFrame::unit_square();
        let r2 = AffineFrame::new(Vec2::ZERO, Mat2([[2.0, 0.0], [0.0, 2.0]])).unwrap();
        assert!(frames_equivalent(&r1, &r2, 1e-9).unwrap().is_none());
    }

    #[test]
    fn quarter_turn_witness() {
        let r1 = AffineFrame::unit_square();
        let r2 = AffineFrame::new(Vec2::ZERO, Mat2([[0.0, 1.0], [-1.0, 0.0]])).unwrap();
        let g = frames_equivalent(&r1, &r2, 1e-9).unwrap().unwrap();
        assert_eq!(g.a, IMat2([[0, 1], [-1, 0]]));
        assert_eq!(g.a.det(), 1);
    }

    #[test]
    fn ill_conditioned_basis_is_refused() {
        let r = AffineFrame::new(
            Vec2::ZERO,
            Mat2([[1.0, 0.0], [1.0, 1e-10]]),
        )
        .unwrap();
        match frames_equivalent(&r, &r, 1e-9) {
            Err(LatticeError::IllConditioned { .. }) => {}
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }

    /// Brute-force shortest lattice vectors by enumeration.
    pub(crate) fn enumerated_minima(frame: &AffineFrame, range: i64) -> (f64, f64) {
        let mut norms: Vec<(f64, Vec2)> = Vec::new();
        for m in -range..=range {
            for n in -range..=range {
                if m == 0 && n == 0 {
                    continue;
                }
                let v = frame.basis.row(0) * (m as f64) + frame.basis.row(1) * (n as f64);
                norms.push((v.norm_sq(), v));
            }
        }
        norms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let first = norms[0].0;
        // Second minimum among vectors independent of the first.
        let v0 = norms[0].1;
        let second = norms
            .iter()
            .find(|(_, v)| v0.cross(*v).abs() > 1e-9)
            .unwrap()
            .0;
        (first, second)
    }

    #[test]
    fn reduce_unit_square_unchanged() {
        let red = reduce_basis(&AffineFrame::unit_square()).unwrap();
        assert_eq!(red.b1, Vec2::new(1.0, 0.0));
        assert_eq!(red.b2, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn reduce_5_0_13_1() {
        let frame =
            AffineFrame::new(Vec2::ZERO, Mat2([[5.0, 0.0], [13.0, 1.0]])).unwrap();
        let red = reduce_basis(&frame).unwrap();
        assert_eq!(red.b1, Vec2::new(1.0, 2.0));
        assert_eq!(red.b2, Vec2::new(-2.0, 1.0));
        // Oracle: enumeration over small integer combinations.
        let (n1, n2) = enumerated_minima(&frame, 20);
        assert!((red.b1.norm_sq() - n1).abs() < 1e-9);
        assert!((red.b2.norm_sq() - n2).abs() < 1e-9);
        assert!(red.inner().abs() < 1e-12);
    }

    #[test]
    fn reduce_skew_row() {
        let frame =
            AffineFrame::new(Vec2::ZERO, Mat2([[1.0, 0.0], [10.0, 1.0]])).unwrap();
        let red = reduce_basis(&frame).unwrap();
        assert_eq!(red.b2, Vec2::new(0.0, 1.0));
        let (n1, n2) = enumerated_minima(&frame, 20);
        assert!((red.b1.norm_sq() - n1).abs() < 1e-12);
        assert!((red.b2.norm_sq() - n2).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let tol = 1e-9;
        let square = AffineFrame::unit_square();
        assert_eq!(classify(&square, tol).unwrap(), LatticeClass::Square);

        let hex = AffineFrame::new(
            Vec2::ZERO,
            Mat2([[1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]),
        )
        .unwrap();
        assert_eq!(classify(&hex, tol).unwrap(), LatticeClass::Hexagonal);

        let oblique =
            AffineFrame::new(Vec2::ZERO, Mat2([[1.0, 0.0], [0.2, 1.3]])).unwrap();
        assert_eq!(classify(&oblique, tol).unwrap(), LatticeClass::Oblique);

        let rect =
            AffineFrame::new(Vec2::ZERO, Mat2([[1.0, 0.0], [0.0, 2.0]])).unwrap();
        assert_eq!(classify(&rect, tol).unwrap(), LatticeClass::Rectangular);
    }

    #[test]
    fn centered_rectangular_hint_on_rhombic_cell() {
        // Rhombic cell: equal norms, generic angle.
        let frame = AffineFrame::new(
            Vec2::ZERO,
            Mat2([[1.0, 0.0], [0.3, (1.0f64 - 0.09).sqrt()]]),
        )
        .unwrap();
        let out = classify_detailed(&frame, 1e-9).unwrap();
        assert_eq!(out.class, LatticeClass::Oblique);
        assert!(out.centered_rectangular_hint);
    }

    #[test]
    fn classify_invariant_under_transforms_and_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..30 {
            let r = random_frame(&mut rng);
            let class = classify(&r, 1e-9).unwrap();
            let g = random_transform(&mut rng);
            assert_eq!(classify(&g.apply(&r), 1e-9).unwrap(), class);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            assert_eq!(classify(&r.rotated(phi), 1e-9).unwrap(), class);
        }
    }

    #[test]
    fn area_split_examples() {
        let (area, uni) = area_split(&AffineFrame::unit_square());
        assert_eq!(area, 1.0);
        assert_eq!(uni.basis, Mat2::IDENTITY);

        let scaled =
            AffineFrame::new(Vec2::ZERO, Mat2([[2.0, 0.0], [0.0, 2.0]])).unwrap();
        let (area, uni) = area_split(&scaled);
        assert!((area - 4.0).abs() < 1e-12);
        assert!(uni.basis.sub(&Mat2::IDENTITY).max_abs() < 1e-12);

        let skew =
            AffineFrame::new(Vec2::ZERO, Mat2([[3.0, 0.0], [1.0, 2.0]])).unwrap();
        let (area, uni) = area_split(&skew);
        assert!((area - 6.0).abs() < 1e-12);
        assert!((uni.basis.det() - 1.0).abs() < 1e-12);
        assert!(uni.basis.scale(area.sqrt()).sub(&skew.basis).max_abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..50 {
            let r = random_frame(&mut rng);
            let (area, uni) = area_split(&r);
            assert!((uni.basis.det() - 1.0).abs() <= 1e-12);
            assert!(area > 0.0);
        }
    }

    #[test]
    fn canonical_form_examples() {
        let unit = AffineFrame::unit_square();
        let c = canonical_form(&unit, 1e-9).unwrap();
        assert_eq!(c.frame, unit);

        let shifted = AffineFrame::new(Vec2::new(5.0, 7.0), Mat2::IDENTITY).unwrap();
        let c = canonical_form(&shifted, 1e-9).unwrap();
        assert_eq!(c.frame.origin, Vec2::ZERO);
    }

    #[test]
    fn canonical_form_gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..40 {
            let r = random_frame(&mut rng);
            let base = canonical_form(&r, 1e-9).unwrap().frame;
            let g = random_transform(&mut rng);
            let other = canonical_form(&g.apply(&r), 1e-9).unwrap().frame;
            assert!(base.basis.sub(&other.basis).max_abs() < 1e-9);
            assert!((base.origin - other.origin).norm() < 1e-9);
        }
    }

    #[test]
    fn lattice_point_sets_agree_under_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..20 {
            let r = random_frame(&mut rng);
            let g = random_transform(&mut rng);
            let r2 = g.apply(&r);
            // Every truncated lattice point of each frame must lie on the
            // full lattice of the other.
            let on_lattice = |frame: &AffineFrame, p: Vec2| -> bool {
                let inv = frame.basis.inverse().unwrap();
                let c = (p - frame.origin).mul_mat(&inv);
                (c.x - c.x.round()).abs() < 1e-7 && (c.y - c.y.round()).abs() < 1e-7
            };
            for p in r.lattice_points(3) {
                assert!(on_lattice(&r2, p));
            }
            for p in r2.lattice_points(3) {
                assert!(on_lattice(&r, p));
            }
        }
    }

    #[test]
    fn equivalence_relation_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let r1 = random_frame(&mut rng);
            // Reflexive.
            let id = frames_equivalent(&r1, &r1, 1e-9).unwrap().unwrap();
            assert_eq!(id, LatticeTransform::identity());
            // Symmetric.
            let g = random_transform(&mut rng);
            let r2 = g.apply(&r1);
            let fwd = frames_equivalent(&r1, &r2, 1e-9).unwrap().unwrap();
            let back = frames_equivalent(&r2, &r1, 1e-9).unwrap().unwrap();
            assert_eq!(back, fwd.inverse());
            // Transitive.
            let h = random_transform(&mut rng);
            let r3 = h.apply(&r2);
            let thru = frames_equivalent(&r1, &r3, 1e-9).unwrap().unwrap();
            assert_eq!(thru, fwd.compose(&h));
        }
    }

    #[test]
    fn frame_json_schema() {
        let frame = AffineFrame::new(
            Vec2::new(0.5, 0.25),
            Mat2([[1.0, 0.0], [0.0, 1.0]]),
        )
        .unwrap();
        let js = serde_json::to_value(frame).unwrap();
        assert_eq!(
            js,
            serde_json::json!({"origin": [0.5, 0.25], "basis": [[1.0, 0.0], [0.0, 1.0]]})
        );
        let g = LatticeTransform::new(IMat2([[1, 1], [0, 1]]), IVec2::new(2, -1)).unwrap();
        let js = serde_json::to_value(g).unwrap();
        assert_eq!(js, serde_json::json!({"A": [[1, 1], [0, 1]], "b": [2, -1]}));
    }
}
