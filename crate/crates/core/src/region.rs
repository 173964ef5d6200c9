//! Multiply-connected plane regions (an outer rectangle minus disjoint
//! disks), closed sampled loops, winding numbers, and regular grid
//! sampling.

use crate::error::RegionError;
use crate::math::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Distance from `p` to the rectangle boundary (positive inside).
    pub fn boundary_clearance(&self, p: Vec2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }
}

/// A closed disk puncture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.dist(self.center) <= self.radius
    }
}

/// The body: the outer rectangle minus finitely many disjoint disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub outer: Rect,
    #[serde(default)]
    pub punctures: Vec<Disk>,
}

impl Region {
    pub fn new(outer: Rect, punctures: Vec<Disk>) -> Self {
        Region { outer, punctures }
    }

    /// Checks that punctures are pairwise disjoint and strictly inside the
    /// outer rectangle.
    pub fn validate(&self) -> Result<(), RegionError> {
        if self.outer.width() <= 0.0 || self.outer.height() <= 0.0 {
            return Err(RegionError::EmptyOuter);
        }
        for (i, d) in self.punctures.iter().enumerate() {
            if !(d.radius > 0.0) {
                return Err(RegionError::BadRadius { index: i });
            }
            let margin = self.outer.boundary_clearance(d.center) - d.radius;
            if margin <= 0.0 {
                return Err(RegionError::NotContained { index: i, margin });
            }
        }
        for i in 0..self.punctures.len() {
            for j in (i + 1)..self.punctures.len() {
                let gap = self.punctures[i].center.dist(self.punctures[j].center)
                    - self.punctures[i].radius
                    - self.punctures[j].radius;
                if gap <= 0.0 {
                    return Err(RegionError::Overlap {
                        first: i,
                        second: j,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether `p` lies in the (closed outer, open punctures) body.
    pub fn contains(&self, p: Vec2) -> bool {
        self.outer.contains(p) && self.punctures.iter().all(|d| !d.contains(p))
    }

    /// Distance from `p` to the nearest puncture disk (infinite if none).
    pub fn puncture_clearance(&self, p: Vec2) -> f64 {
        self.punctures
            .iter()
            .map(|d| p.dist(d.center) - d.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the puncture whose disk strictly contains `p`, if any.
    pub fn puncture_containing(&self, p: Vec2) -> Option<usize> {
        self.punctures
            .iter()
            .position(|d| p.dist(d.center) < d.radius)
    }
}

/// Distance from point `p` to the segment `a`-`b`.
pub(crate) fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Signed principal angle subtended at `center` by the step `from -> to`.
pub(crate) fn arg_increment(center: Vec2, from: Vec2, to: Vec2) -> f64 {
    let za = (from - center).to_complex();
    let zb = (to - center).to_complex();
    (zb / za).arg()
}

/// A closed loop given by an ordered list of points; the closing segment
/// from the last point back to the first is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    points: Vec<Vec2>,
}

impl Loop {
    /// Builds a loop from points; a duplicated closing point is dropped.
    pub fn from_points(mut points: Vec<Vec2>) -> Result<Self, RegionError> {
        if points.len() >= 2 {
            let first = points[0];
            let last = *points.last().unwrap();
            if first.dist(last) < 1e-12 * (1.0 + first.norm()) {
                points.pop();
            }
        }
        if points.len() < 3 {
            return Err(RegionError::DegenerateLoop);
        }
        Ok(Loop { points })
    }

    /// A sampled circle; negative `turns` runs clockwise.
    pub fn circle(center: Vec2, radius: f64, turns: i32, samples: usize) -> Self {
        let n = samples.max(16);
        let total = TAU * turns as f64;
        let points = (0..n)
            .map(|i| {
                let ang = total * (i as f64) / (n as f64);
                center + Vec2::new(radius * ang.cos(), radius * ang.sin())
            })
            .collect();
        Loop { points }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn base_point(&self) -> Vec2 {
        self.points[0]
    }

    /// Consecutive segments, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Checks all points lie in the region with the stated clearance from
    /// every puncture and from the outer boundary, and that no segment
    /// crosses a puncture.
    pub fn validate(&self, region: &Region, margin: f64) -> Result<(), RegionError> {
        self.validate_margins(region, |_| margin, margin)
    }

    /// Validation with the default clearance: each puncture demands
    /// `max(s, r/10)` where `s` is the longest loop segment, and the outer
    /// boundary demands `s`.
    pub fn validate_default(&self, region: &Region) -> Result<(), RegionError> {
        let s = self
            .segments()
            .map(|(a, b)| a.dist(b))
            .fold(0.0f64, f64::max);
        self.validate_margins(region, |d| s.max(d.radius / 10.0), s)
    }

    fn validate_margins(
        &self,
        region: &Region,
        puncture_margin: impl Fn(&Disk) -> f64,
        outer_margin: f64,
    ) -> Result<(), RegionError> {
        for (i, &p) in self.points.iter().enumerate() {
            if region.outer.boundary_clearance(p) < outer_margin {
                return Err(RegionError::LoopPointOutside { index: i });
            }
            for d in &region.punctures {
                if p.dist(d.center) - d.radius < puncture_margin(d) {
                    return Err(RegionError::LoopPointOutside { index: i });
                }
            }
        }
        for (s, (a, b)) in self.segments().enumerate() {
            for (pi, d) in region.punctures.iter().enumerate() {
                if segment_distance(d.center, a, b) <= d.radius {
                    return Err(RegionError::LoopHitsPuncture {
                        segment: s,
                        puncture: pi,
                    });
                }
            }
        }
        Ok(())
    }

    /// The loop with a midpoint inserted into every segment.
    pub fn refined(&self) -> Loop {
        let mut points = Vec::with_capacity(self.points.len() * 2);
        for (a, b) in self.segments() {
            points.push(a);
            points.push((a + b) * 0.5);
        }
        Loop { points }
    }

    pub fn reversed(&self) -> Loop {
        let mut points = self.points.clone();
        points[1..].reverse();
        Loop { points }
    }

    /// Concatenation at a shared base point; `None` if the base points differ.
    pub fn concat(&self, other: &Loop) -> Option<Loop> {
        if self.base_point().dist(other.base_point()) > 1e-12 {
            return None;
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Some(Loop { points })
    }
}

/// Signed turn counts of `lp` about each puncture center, from summed
/// principal angle increments.
pub fn winding_numbers(lp: &Loop, region: &Region) -> Result<Vec<i64>, RegionError> {
    for (s, (a, b)) in lp.segments().enumerate() {
        for (pi, d) in region.punctures.iter().enumerate() {
            if segment_distance(d.center, a, b) <= d.radius {
                return Err(RegionError::LoopHitsPuncture {
                    segment: s,
                    puncture: pi,
                });
            }
        }
    }
    let mut out = Vec::with_capacity(region.punctures.len());
    for (pi, d) in region.punctures.iter().enumerate() {
        let total: f64 = lp
            .segments()
            .map(|(a, b)| arg_increment(d.center, a, b))
            .sum();
        let turns = total / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() >= 1e-6 {
            return Err(RegionError::NonIntegerWinding {
                puncture: pi,
                turns,
                residual: (turns - rounded).abs(),
            });
        }
        out.push(rounded as i64);
    }
    Ok(out)
}

/// Regular grid geometry: point `(i, j)` sits at `origin + (i h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridMeta {
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + self.h * i as f64,
            self.origin.y + self.h * j as f64,
        )
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn approx_eq(&self, other: &GridMeta) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.h - other.h).abs() <= 1e-12 * self.h.max(other.h)
            && (self.origin - other.origin).norm() <= 1e-9 * (1.0 + self.origin.norm())
    }
}

/// A regular grid clipped to a region. Points carry a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredGrid {
    pub meta: GridMeta,
    pub valid: Vec<bool>,
}

fn axis_count(extent: f64, h: f64) -> usize {
    (extent / h + 1e-9).floor() as usize + 1
}

impl StructuredGrid {
    /// Grid of spacing `h` anchored at the outer minimum corner. A point is
    /// valid when its clearance from every puncture is at least `h/2`.
    pub fn from_region(region: &Region, h: f64) -> Result<Self, RegionError> {
        if !(h > 0.0) {
            return Err(RegionError::BadSpacing { h });
        }
        let meta = GridMeta {
            origin: region.outer.min,
            h,
            nx: axis_count(region.outer.width(), h),
            ny: axis_count(region.outer.height(), h),
        };
        let mut valid = vec![false; meta.len()];
        for j in 0..meta.ny {
            for i in 0..meta.nx {
                let p = meta.point(i, j);
                valid[meta.index(i, j)] =
                    region.puncture_clearance(p) >= h / 2.0 * (1.0 - 1e-12);
            }
        }
        Ok(StructuredGrid { meta, valid })
    }

    /// All-valid grid over a plain rectangle.
    pub fn from_rect(rect: Rect, h: f64) -> Result<Self, RegionError> {
        Self::from_region(
            &Region::new(rect, Vec::new()),
            h,
        )
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.valid[self.meta.index(i, j)]
    }

    /// Valid grid points in row-major order (y rows scanned in x).
    pub fn points(&self) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for j in 0..self.meta.ny {
            for i in 0..self.meta.nx {
                if self.is_valid(i, j) {
                    pts.push(self.meta.point(i, j));
                }
            }
        }
        pts
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Valid grid points of spacing `h` clipped to the region, row-major.
/// An empty result signals the spacing exceeded the region.
pub fn sample_grid(region: &Region, h: f64) -> Result<Vec<Vec2>, RegionError> {
    Ok(StructuredGrid::from_region(region, h)?.points())
}

/// Loop input: either an explicit point list or a sampled circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopSpec {
    Points { points: Vec<Vec2> },
    Circle { circle: CircleSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: Vec2,
    pub radius: f64,
    pub turns: i32,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    256
}

impl LoopSpec {
    pub fn resolve(&self) -> Result<Loop, RegionError> {
        match self {
            LoopSpec::Points { points } => Loop::from_points(points.clone()),
            LoopSpec::Circle { circle } => Ok(Loop::circle(
                circle.center,
                circle.radius,
                circle.turns,
                circle.samples * circle.turns.unsigned_abs().max(1) as usize,
            )),
        }
    }
}
