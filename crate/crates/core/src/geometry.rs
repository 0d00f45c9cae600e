//! Dyadic arcs, Carleson squares and points of the closed unit disc.
//!
//! Angles are normalized to `[0, 1)` (one unit = one full turn) and arcs are
//! half-open `[a, b)`, so the `2^L` dyadic arcs of level `L` partition the
//! circle exactly. Dyadic arcs are stored as integer `(level, index)` pairs;
//! general arcs use floating point with an angular tolerance of `1e-12`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance on angular comparisons for general (non-dyadic) arcs.
pub const ANGLE_TOL: f64 = 1e-12;

/// Deepest level at which dyadic indices are exact in `u64`/`f64` arithmetic.
pub const MAX_DYADIC_LEVEL: u32 = 52;

/// Reduce an angle to `[0, 1)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(1.0);
    if a >= 1.0 {
        0.0
    } else {
        a
    }
}

/// Circular distance between two normalized angles, in `[0, 1/2]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// A point of the closed disc, stored in polar form so that dyadic
/// membership tests on atoms given as `(r, theta)` stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    radius: f64,
    angle: f64,
}

impl DiscPoint {
    /// `radius` must lie in `[0, 1]`; the angle is normalized.
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        debug_assert!(
            (0.0..=1.0).contains(&radius),
            "radius {radius} outside [0, 1]"
        );
        let angle = if radius == 0.0 {
            0.0
        } else {
            normalize_angle(angle)
        };
        DiscPoint { radius, angle }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let radius = z.norm();
        let angle = if radius == 0.0 {
            0.0
        } else {
            normalize_angle(z.im.atan2(z.re) / TAU)
        };
        DiscPoint { radius, angle }
    }

    pub fn origin() -> Self {
        DiscPoint {
            radius: 0.0,
            angle: 0.0,
        }
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Normalized angle in `[0, 1)`.
    #[inline]
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Distance to the unit circle, `1 - |z|`.
    #[inline]
    pub fn gap(&self) -> f64 {
        1.0 - self.radius
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.radius, TAU * self.angle)
    }

    pub fn is_interior(&self) -> bool {
        self.radius < 1.0
    }
}

/// The dyadic arc `[index 2^-level, (index + 1) 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicArc {
    pub level: u32,
    pub index: u64,
}

impl DyadicArc {
    pub fn new(level: u32, index: u64) -> Self {
        assert!(level <= MAX_DYADIC_LEVEL, "dyadic level {level} too deep");
        assert!(
            index < 1u64 << level,
            "index {index} out of range at level {level}"
        );
        DyadicArc { level, index }
    }

    pub fn full_circle() -> Self {
        DyadicArc { level: 0, index: 0 }
    }

    /// The unique arc of `level` containing `angle`.
    pub fn containing(angle: f64, level: u32) -> Self {
        DyadicArc {
            level,
            index: dyadic_index(angle, level),
        }
    }

    #[inline]
    pub fn length(&self) -> f64 {
        dyadic_length(self.level)
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.index as f64 * self.length()
    }

    #[inline]
    pub fn end(&self) -> f64 {
        (self.index + 1) as f64 * self.length()
    }

    #[inline]
    pub fn center(&self) -> f64 {
        (self.index as f64 + 0.5) * self.length()
    }

    #[inline]
    pub fn contains_angle(&self, angle: f64) -> bool {
        dyadic_index(angle, self.level) == self.index
    }

    pub fn parent(&self) -> Option<DyadicArc> {
        (self.level > 0).then(|| DyadicArc {
            level: self.level - 1,
            index: self.index >> 1,
        })
    }

    pub fn children(&self) -> [DyadicArc; 2] {
        let level = self.level + 1;
        [
            DyadicArc {
                level,
                index: self.index << 1,
            },
            DyadicArc {
                level,
                index: (self.index << 1) | 1,
            },
        ]
    }

    /// Ancestor (or self) at a coarser `level`.
    pub fn ancestor(&self, level: u32) -> DyadicArc {
        assert!(level <= self.level);
        DyadicArc {
            level,
            index: self.index >> (self.level - level),
        }
    }

    /// True when `other` is this arc or one of its descendants.
    pub fn contains_arc(&self, other: &DyadicArc) -> bool {
        other.level >= self.level && other.ancestor(self.level) == *self
    }

    /// The dyadic descendants at `level` (`level >= self.level`), in order.
    pub fn descendants(&self, level: u32) -> impl Iterator<Item = DyadicArc> {
        assert!(level >= self.level);
        let shift = level - self.level;
        let first = self.index << shift;
        (first..first + (1u64 << shift)).map(move |index| DyadicArc { level, index })
    }

    pub fn to_general(&self) -> GeneralArc {
        GeneralArc::new(self.start(), self.length())
    }
}

#[inline]
pub fn dyadic_length(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

/// `floor(angle 2^level)`; exact since scaling by a power of two is exact.
#[inline]
pub fn dyadic_index(angle: f64, level: u32) -> u64 {
    let count = 1u64 << level;
    let i = (angle * count as f64).floor() as u64;
    i.min(count - 1)
}

/// A general arc `[start, start + length)` taken modulo one; `length` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralArc {
    pub start: f64,
    pub length: f64,
}

impl GeneralArc {
    pub fn new(start: f64, length: f64) -> Self {
        assert!(length > 0.0, "arc length must be positive, got {length}");
        GeneralArc {
            start: normalize_angle(start),
            length: length.min(1.0),
        }
    }

    pub fn centered(center: f64, length: f64) -> Self {
        let length = length.min(1.0);
        GeneralArc::new(center - 0.5 * length, length)
    }

    pub fn full_circle() -> Self {
        GeneralArc {
            start: 0.0,
            length: 1.0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    pub fn center(&self) -> f64 {
        normalize_angle(self.start + 0.5 * self.length)
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let mut d = (angle - self.start).rem_euclid(1.0);
        if d > 1.0 - ANGLE_TOL {
            d = 0.0;
        }
        d + ANGLE_TOL < self.length
    }

    /// Circular distance from `angle` to the closed arc; zero inside.
    pub fn distance_to(&self, angle: f64) -> f64 {
        if self.is_full() {
            return 0.0;
        }
        let d = (angle - self.start).rem_euclid(1.0);
        if d <= self.length {
            0.0
        } else {
            (d - self.length).min(1.0 - d)
        }
    }

    /// Same centre, length `min(1, factor |arc|)`.
    pub fn dilate(&self, factor: f64) -> GeneralArc {
        assert!(factor > 0.0);
        let length = factor * self.length;
        if length >= 1.0 {
            GeneralArc::full_circle()
        } else {
            GeneralArc::centered(self.center(), length)
        }
    }

    /// True when `other` lies inside this arc (up to [`ANGLE_TOL`]).
    pub fn contains_arc(&self, other: &GeneralArc) -> bool {
        if self.is_full() {
            return true;
        }
        if other.length > self.length + ANGLE_TOL {
            return false;
        }
        let mut d = (other.start - self.start).rem_euclid(1.0);
        if d > 1.0 - ANGLE_TOL {
            d = 0.0;
        }
        d + other.length <= self.length + ANGLE_TOL
    }

    /// Two dyadic arcs of length at most `2 |arc|` whose Carleson squares
    /// cover the Carleson square of this arc. The two may coincide.
    pub fn dyadic_cover(&self) -> [DyadicArc; 2] {
        if self.is_full() {
            return [DyadicArc::full_circle(); 2];
        }
        let mut level = (-self.length.log2()).floor().max(0.0) as u32;
        while level > 0 && dyadic_length(level) < self.length {
            level -= 1;
        }
        while dyadic_length(level + 1) >= self.length {
            level += 1;
        }
        level = level.min(MAX_DYADIC_LEVEL);
        let first = DyadicArc::containing(self.start, level);
        let second = DyadicArc {
            level,
            index: (first.index + 1) % (1u64 << level),
        };
        [first, second]
    }
}

/// Base of a Carleson square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaseArc {
    Dyadic(DyadicArc),
    General(GeneralArc),
}

impl BaseArc {
    pub fn length(&self) -> f64 {
        match self {
            BaseArc::Dyadic(a) => a.length(),
            BaseArc::General(a) => a.length,
        }
    }

    pub fn center(&self) -> f64 {
        match self {
            BaseArc::Dyadic(a) => a.center(),
            BaseArc::General(a) => a.center(),
        }
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        match self {
            BaseArc::Dyadic(a) => a.contains_angle(angle),
            BaseArc::General(a) => a.contains_angle(angle),
        }
    }
}

/// `Q(I) = { z : 1 - |z| <= |I|, z/|z| in I }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonSquare {
    pub base: BaseArc,
}

impl CarlesonSquare {
    pub fn dyadic(level: u32, index: u64) -> Self {
        CarlesonSquare {
            base: BaseArc::Dyadic(DyadicArc::new(level, index)),
        }
    }

    pub fn over(arc: DyadicArc) -> Self {
        CarlesonSquare {
            base: BaseArc::Dyadic(arc),
        }
    }

    pub fn general(arc: GeneralArc) -> Self {
        CarlesonSquare {
            base: BaseArc::General(arc),
        }
    }

    /// Side length `l(Q) = |I|`.
    pub fn side(&self) -> f64 {
        self.base.length()
    }

    pub fn contains(&self, z: &DiscPoint) -> bool {
        z.gap() <= self.side() && self.base.contains_angle(z.angle())
    }

    /// `z_Q = (1 - l(Q)) e^{2 pi i c}` with `c` the centre of the base.
    pub fn point(&self) -> DiscPoint {
        DiscPoint::from_polar((1.0 - self.side()).max(0.0), self.base.center())
    }

    /// Membership in the top half `T(Q) = { z in Q : 1 - |z| >= l(Q)/2 }`.
    pub fn top_half_contains(&self, z: &DiscPoint) -> bool {
        self.contains(z) && z.gap() >= 0.5 * self.side()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn membership_examples() {
        let z = DiscPoint::from_complex(Complex64::from_polar(0.75, PI / 4.0));
        assert!(CarlesonSquare::dyadic(2, 0).contains(&z));

        let q = CarlesonSquare::dyadic(3, 5);
        assert!(!q.contains(&DiscPoint::origin()));

        let w = DiscPoint::from_polar(0.9, 0.5);
        assert!(!CarlesonSquare::dyadic(1, 0).contains(&w));
        assert!(CarlesonSquare::dyadic(1, 1).contains(&w));
    }

    #[test]
    fn square_points() {
        let p = CarlesonSquare::dyadic(1, 0).point().to_complex();
        assert!((p - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(CarlesonSquare::dyadic(0, 0).point().radius(), 0.0);
        let p = CarlesonSquare::dyadic(3, 7).point();
        assert_eq!(p.radius(), 0.875);
        assert_eq!(p.angle(), 15.0 / 16.0);
    }

    #[test]
    fn top_half() {
        let q = CarlesonSquare::dyadic(2, 0);
        assert!(q.top_half_contains(&DiscPoint::from_polar(0.8, 0.1)));
        assert!(!q.top_half_contains(&DiscPoint::from_polar(0.9, 0.1)));
    }

    #[test]
    fn dilation() {
        let a = GeneralArc::new(0.0, 0.125).dilate(3.0);
        assert!((a.center() - 1.0 / 16.0).abs() < 1e-15);
        assert!((a.length - 0.375).abs() < 1e-15);
        assert!(GeneralArc::new(0.3, 0.4).dilate(3.0).is_full());
        let b = GeneralArc::new(0.5, 0.125).dilate(2.0);
        assert!((b.start - 7.0 / 16.0).abs() < 1e-15);
        assert!((b.end() - 11.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn wrapping_arc_contains() {
        let a = GeneralArc::centered(0.0, 0.25);
        assert!(a.contains_angle(0.95));
        assert!(a.contains_angle(0.1));
        assert!(!a.contains_angle(0.2));
        assert_eq!(a.distance_to(0.0), 0.0);
        assert!((a.distance_to(0.25) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dyadic_tree_navigation() {
        let a = DyadicArc::new(3, 5);
        assert_eq!(a.parent(), Some(DyadicArc::new(2, 2)));
        assert_eq!(a.children(), [DyadicArc::new(4, 10), DyadicArc::new(4, 11)]);
        assert!(DyadicArc::new(1, 1).contains_arc(&a));
        assert!(!DyadicArc::new(1, 0).contains_arc(&a));
        assert_eq!(a.descendants(5).count(), 4);
    }

    #[test]
    fn cover_of_exact_dyadic_arc() {
        let [q1, q2] = GeneralArc::new(0.25, 0.125).dyadic_cover();
        assert_eq!(q1, DyadicArc::new(3, 2));
        assert_eq!(q2, DyadicArc::new(3, 3));
    }
}
