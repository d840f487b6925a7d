//! Exact integer geometry for rational directions on the unit circle and for
//! finite unions of circular arcs.
//!
//! Directions are primitive integer vectors; angles never materialize as
//! floating point. All comparisons reduce to sign tests of cross/dot products
//! computed in 128-bit intermediates, so they are exact for any coordinates
//! accepted by validation ([`COORD_LIMIT`]).

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// Largest coordinate magnitude accepted for lattice points.
///
/// Keeping inputs within `i32` range guarantees every product and short sum
/// computed by the toolkit fits in the 128-bit intermediates used below.
pub const COORD_LIMIT: i64 = i32::MAX as i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("zero vector cannot define a direction")]
    ZeroVector,
    #[error("arithmetic overflow in lattice computation")]
    Overflow,
    #[error("rule must be a nonempty set of nonzero lattice points")]
    InvalidRule,
}

/// A point of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    pub fn norm_inf(&self) -> i64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn checked_add(&self, other: &LatticePoint) -> Result<LatticePoint, GeometryError> {
        Ok(LatticePoint {
            x: self.x.checked_add(other.x).ok_or(GeometryError::Overflow)?,
            y: self.y.checked_add(other.y).ok_or(GeometryError::Overflow)?,
        })
    }

    pub fn checked_sub(&self, other: &LatticePoint) -> Result<LatticePoint, GeometryError> {
        Ok(LatticePoint {
            x: self.x.checked_sub(other.x).ok_or(GeometryError::Overflow)?,
            y: self.y.checked_sub(other.y).ok_or(GeometryError::Overflow)?,
        })
    }

    /// Rotation by +90 degrees: (x, y) -> (-y, x).
    pub fn rot90_ccw(&self) -> LatticePoint {
        LatticePoint { x: -self.y, y: self.x }
    }

    /// Rotation by -90 degrees: (x, y) -> (y, -x).
    pub fn rot90_cw(&self) -> LatticePoint {
        LatticePoint { x: self.y, y: -self.x }
    }

    pub fn negate(&self) -> LatticePoint {
        LatticePoint { x: -self.x, y: -self.y }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Cross product a.x*b.y - a.y*b.x, exact.
pub fn cross(a: &LatticePoint, b: &LatticePoint) -> i128 {
    a.x as i128 * b.y as i128 - a.y as i128 * b.x as i128
}

/// Dot product, exact.
pub fn dot(a: &LatticePoint, b: &LatticePoint) -> i128 {
    a.x as i128 * b.x as i128 + a.y as i128 * b.y as i128
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A rational direction on the circle, stored as the primitive integer vector
/// spanning its ray. Two directions are equal iff their primitive vectors are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    px: i64,
    py: i64,
}

impl Direction {
    pub fn new(x: i64, y: i64) -> Result<Direction, GeometryError> {
        if x == 0 && y == 0 {
            return Err(GeometryError::ZeroVector);
        }
        let g = gcd(x, y);
        Ok(Direction { px: x / g, py: y / g })
    }

    pub fn from_point(p: &LatticePoint) -> Result<Direction, GeometryError> {
        Direction::new(p.x, p.y)
    }

    pub fn x(&self) -> i64 {
        self.px
    }

    pub fn y(&self) -> i64 {
        self.py
    }

    pub fn as_point(&self) -> LatticePoint {
        LatticePoint { x: self.px, y: self.py }
    }

    pub fn antipode(&self) -> Direction {
        Direction { px: -self.px, py: -self.py }
    }

    pub fn rot90_ccw(&self) -> Direction {
        Direction { px: -self.py, py: self.px }
    }

    pub fn rot90_cw(&self) -> Direction {
        Direction { px: self.py, py: -self.px }
    }

    /// Index of the half-quadrant in counterclockwise order from (1,0).
    /// Axis directions get their own slot so that the order is total.
    fn octant(&self) -> u8 {
        match (self.px.signum(), self.py.signum()) {
            (1, 0) => 0,
            (1, 1) => 1,
            (0, 1) => 2,
            (-1, 1) => 3,
            (-1, 0) => 4,
            (-1, -1) => 5,
            (0, -1) => 6,
            (1, -1) => 7,
            _ => unreachable!("direction is never the zero vector"),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.px, self.py)
    }
}

/// Total counterclockwise order on rays, anchored at (1,0).
impl Ord for Direction {
    fn cmp(&self, other: &Self) -> Ordering {
        self.octant().cmp(&other.octant()).then_with(|| {
            let c = cross(&self.as_point(), &other.as_point());
            // Within one open quadrant the angular order is the cross sign;
            // primitive vectors on the same ray are identical.
            if c > 0 {
                Ordering::Less
            } else if c < 0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        })
    }
}

impl PartialOrd for Direction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Counterclockwise comparison of two directions anchored at (1,0).
pub fn ccw_compare(a: &Direction, b: &Direction) -> Ordering {
    a.cmp(b)
}

/// True iff `d` lies strictly inside the counterclockwise sweep from `lo` to
/// `hi` (`lo != hi`).
fn strictly_between(lo: &Direction, hi: &Direction, d: &Direction) -> bool {
    debug_assert!(lo != hi);
    if lo < hi {
        lo < d && d < hi
    } else {
        d > lo || d < hi
    }
}

/// True iff the counterclockwise sweep from `lo` to `hi` has angular length
/// at least pi (`lo != hi`).
fn sweep_at_least_half(lo: &Direction, hi: &Direction) -> bool {
    debug_assert!(lo != hi);
    let c = cross(&lo.as_point(), &hi.as_point());
    c < 0 || (c == 0 && dot(&lo.as_point(), &hi.as_point()) < 0)
}

/// Which side of an endpoint an open semicircle lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The semicircle swept counterclockwise starting at the endpoint.
    CounterClockwise,
    /// The semicircle swept clockwise starting at the endpoint.
    Clockwise,
}

/// A single arc of directions, swept counterclockwise from `lo` to `hi`.
///
/// `lo == hi` denotes the single point (both ends closed); an equal-endpoint
/// arc with an open end normalizes to `Empty`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arc {
    Empty,
    Full,
    Span { lo: Direction, hi: Direction, lo_closed: bool, hi_closed: bool },
}

impl Arc {
    pub fn span(lo: Direction, hi: Direction, lo_closed: bool, hi_closed: bool) -> Arc {
        if lo == hi {
            if lo_closed && hi_closed {
                Arc::Span { lo, hi, lo_closed: true, hi_closed: true }
            } else {
                Arc::Empty
            }
        } else {
            Arc::Span { lo, hi, lo_closed, hi_closed }
        }
    }

    pub fn open(lo: Direction, hi: Direction) -> Arc {
        Arc::span(lo, hi, false, false)
    }

    pub fn closed(lo: Direction, hi: Direction) -> Arc {
        Arc::span(lo, hi, true, true)
    }

    pub fn point(d: Direction) -> Arc {
        Arc::Span { lo: d, hi: d, lo_closed: true, hi_closed: true }
    }

    /// The open semicircle with the given endpoint on the given side.
    pub fn semicircle(endpoint: Direction, side: Side) -> Arc {
        match side {
            Side::CounterClockwise => Arc::open(endpoint, endpoint.antipode()),
            Side::Clockwise => Arc::open(endpoint.antipode(), endpoint),
        }
    }

    pub fn contains(&self, d: &Direction) -> bool {
        match self {
            Arc::Empty => false,
            Arc::Full => true,
            Arc::Span { lo, hi, lo_closed, hi_closed } => {
                if lo == hi {
                    d == lo
                } else if d == lo {
                    *lo_closed
                } else if d == hi {
                    *hi_closed
                } else {
                    strictly_between(lo, hi, d)
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Arc::Empty)
    }
}

/// The open arc of directions `u` such that every site of the rule has
/// strictly negative scalar product with `u`, i.e. the rule fits inside the
/// open half-plane with normal `u`.
///
/// Endpoints are perpendiculars of extremal rule sites, hence rational. The
/// arc is empty whenever the sites are not contained in any open half-plane
/// through the origin (in particular for antipodal site pairs).
pub fn unstable_arc(sites: &[LatticePoint]) -> Result<Arc, GeometryError> {
    if sites.is_empty() || sites.iter().any(|s| s.is_origin()) {
        return Err(GeometryError::InvalidRule);
    }
    let anchor = &sites[0];
    // Angular offsets relative to the anchor, confined to (-pi, pi].
    // Classes order: (-pi,0) < 0 < (0,pi) < pi; within an open half the
    // order is the cross sign.
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum Class {
        Negative,
        Zero,
        Positive,
        Pi,
    }
    let class = |s: &LatticePoint| -> Class {
        let c = cross(anchor, s);
        if c > 0 {
            Class::Positive
        } else if c < 0 {
            Class::Negative
        } else if dot(anchor, s) > 0 {
            Class::Zero
        } else {
            Class::Pi
        }
    };
    let offset_cmp = |a: &LatticePoint, b: &LatticePoint| -> Ordering {
        class(a).cmp(&class(b)).then_with(|| {
            let c = cross(a, b);
            if c > 0 {
                Ordering::Less
            } else if c < 0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        })
    };
    let mut max_site = anchor;
    let mut min_site = anchor;
    for s in sites {
        if offset_cmp(s, max_site) == Ordering::Greater {
            max_site = s;
        }
        if offset_cmp(s, min_site) == Ordering::Less {
            min_site = s;
        }
    }
    // The sites span the sector from min_site to max_site (through the
    // anchor). The intersection of the per-site open semicircles is empty
    // iff that sector is at least a half-plane.
    let c = cross(min_site, max_site);
    let d = dot(min_site, max_site);
    if c < 0 || (c == 0 && d <= 0) {
        return Ok(Arc::Empty);
    }
    let lo = Direction::from_point(&max_site.rot90_ccw())?;
    let hi = Direction::from_point(&min_site.rot90_cw())?;
    debug_assert_ne!(lo, hi);
    Ok(Arc::open(lo, hi))
}

/// One canonical boundary of an [`ArcSet`]: whether the boundary direction
/// itself belongs to the set, and whether the open gap counterclockwise after
/// it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Boundary {
    at: Direction,
    point_in: bool,
    gap_in: bool,
}

/// A finite union of arcs with rational endpoints, in canonical form.
///
/// Internally the set is stored as the circular sequence of its essential
/// boundary directions together with point/gap membership, which makes every
/// boolean operation a positionwise combination and keeps equality
/// structural. With no boundaries the set is uniform (`Empty` or `Full`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcSet {
    boundaries: Vec<Boundary>,
    all_in: bool,
}

/// A maximal connected component of an [`ArcSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// An isolated single direction.
    Point(Direction),
    /// An arc of positive length, swept counterclockwise from `lo` to `hi`.
    Span { lo: Direction, hi: Direction, lo_closed: bool, hi_closed: bool },
    /// The full circle with a single direction removed.
    Punctured(Direction),
    /// The full circle.
    FullCircle,
}

impl Component {
    /// Whether the component contains an open semicircle.
    pub fn spans_half_or_more(&self) -> bool {
        match self {
            Component::Point(_) => false,
            Component::Span { lo, hi, .. } => sweep_at_least_half(lo, hi),
            Component::Punctured(_) | Component::FullCircle => true,
        }
    }
}

impl ArcSet {
    pub fn empty() -> ArcSet {
        ArcSet { boundaries: Vec::new(), all_in: false }
    }

    pub fn full() -> ArcSet {
        ArcSet { boundaries: Vec::new(), all_in: true }
    }

    pub fn from_arc(arc: &Arc) -> ArcSet {
        match arc {
            Arc::Empty => ArcSet::empty(),
            Arc::Full => ArcSet::full(),
            Arc::Span { lo, hi, lo_closed, hi_closed } => {
                if lo == hi {
                    ArcSet::canonical(vec![Boundary { at: *lo, point_in: true, gap_in: false }], false)
                } else {
                    let b_lo = Boundary { at: *lo, point_in: *lo_closed, gap_in: true };
                    let b_hi = Boundary { at: *hi, point_in: *hi_closed, gap_in: false };
                    let bounds =
                        if lo < hi { vec![b_lo, b_hi] } else { vec![b_hi, b_lo] };
                    ArcSet::canonical(bounds, false)
                }
            }
        }
    }

    pub fn from_arcs<'a>(arcs: impl IntoIterator<Item = &'a Arc>) -> ArcSet {
        arcs.into_iter()
            .fold(ArcSet::empty(), |acc, a| acc.union(&ArcSet::from_arc(a)))
    }

    fn canonical(bounds: Vec<Boundary>, all_in: bool) -> ArcSet {
        if bounds.is_empty() {
            return ArcSet { boundaries: Vec::new(), all_in };
        }
        let m = bounds.len();
        let mut keep = Vec::with_capacity(m);
        for i in 0..m {
            let prev_gap = bounds[(i + m - 1) % m].gap_in;
            let b = &bounds[i];
            keep.push(!(prev_gap == b.point_in && b.point_in == b.gap_in));
        }
        let kept: Vec<Boundary> =
            bounds.iter().zip(&keep).filter(|(_, k)| **k).map(|(b, _)| *b).collect();
        if kept.is_empty() {
            // Uniform set: every atom has the same membership.
            ArcSet { boundaries: Vec::new(), all_in: bounds[0].gap_in }
        } else {
            ArcSet { boundaries: kept, all_in: false }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty() && !self.all_in
    }

    pub fn is_full(&self) -> bool {
        self.boundaries.is_empty() && self.all_in
    }

    /// Index of the boundary at `d`, if `d` is a boundary direction.
    fn find(&self, d: &Direction) -> Result<usize, usize> {
        self.boundaries.binary_search_by(|b| b.at.cmp(d))
    }

    pub fn contains(&self, d: &Direction) -> bool {
        if self.boundaries.is_empty() {
            return self.all_in;
        }
        match self.find(d) {
            Ok(i) => self.boundaries[i].point_in,
            Err(i) => {
                let m = self.boundaries.len();
                self.boundaries[(i + m - 1) % m].gap_in
            }
        }
    }

    /// Membership of directions immediately counterclockwise after `d`.
    fn gap_after(&self, d: &Direction) -> bool {
        if self.boundaries.is_empty() {
            return self.all_in;
        }
        match self.find(d) {
            Ok(i) => self.boundaries[i].gap_in,
            Err(i) => {
                let m = self.boundaries.len();
                self.boundaries[(i + m - 1) % m].gap_in
            }
        }
    }

    fn combine(&self, other: &ArcSet, f: impl Fn(bool, bool) -> bool) -> ArcSet {
        let mut positions: Vec<Direction> = self
            .boundaries
            .iter()
            .chain(other.boundaries.iter())
            .map(|b| b.at)
            .collect();
        positions.sort();
        positions.dedup();
        if positions.is_empty() {
            return ArcSet { boundaries: Vec::new(), all_in: f(self.all_in, other.all_in) };
        }
        let bounds: Vec<Boundary> = positions
            .into_iter()
            .map(|at| Boundary {
                at,
                point_in: f(self.contains(&at), other.contains(&at)),
                gap_in: f(self.gap_after(&at), other.gap_after(&at)),
            })
            .collect();
        ArcSet::canonical(bounds, false)
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &ArcSet) -> ArcSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> ArcSet {
        ArcSet {
            boundaries: self
                .boundaries
                .iter()
                .map(|b| Boundary { at: b.at, point_in: !b.point_in, gap_in: !b.gap_in })
                .collect(),
            all_in: !self.all_in,
        }
    }

    pub fn difference(&self, other: &ArcSet) -> ArcSet {
        self.intersection(&other.complement())
    }

    /// Boundary directions of the set, in counterclockwise order.
    pub fn boundary_directions(&self) -> Vec<Direction> {
        self.boundaries.iter().map(|b| b.at).collect()
    }

    /// Maximal connected components in counterclockwise order, starting from
    /// the first excluded atom.
    pub fn components(&self) -> Vec<Component> {
        if self.boundaries.is_empty() {
            return if self.all_in { vec![Component::FullCircle] } else { Vec::new() };
        }
        let m = self.boundaries.len();
        // Atom 2*i is the boundary point i, atom 2*i+1 the open gap after it.
        let atom_in = |a: usize| -> bool {
            let b = &self.boundaries[a / 2];
            if a % 2 == 0 {
                b.point_in
            } else {
                b.gap_in
            }
        };
        let n_atoms = 2 * m;
        let start = (0..n_atoms)
            .find(|&a| !atom_in(a))
            .expect("canonical non-uniform arc set has an excluded atom");
        let mut components = Vec::new();
        let mut run: Option<(usize, usize)> = None;
        for step in 1..=n_atoms {
            let a = (start + step) % n_atoms;
            if atom_in(a) {
                run = match run {
                    None => Some((a, a)),
                    Some((first, _)) => Some((first, a)),
                };
            } else if let Some((first, last)) = run.take() {
                components.push(self.run_component(first, last));
            }
        }
        if let Some((first, last)) = run {
            components.push(self.run_component(first, last));
        }
        components
    }

    fn run_component(&self, first: usize, last: usize) -> Component {
        let m = self.boundaries.len();
        if first == last && first % 2 == 0 {
            return Component::Point(self.boundaries[first / 2].at);
        }
        if first == last && m == 1 {
            // Single included gap wrapping the whole circle minus one point.
            return Component::Punctured(self.boundaries[0].at);
        }
        let (lo, lo_closed) = if first % 2 == 0 {
            (self.boundaries[first / 2].at, true)
        } else {
            (self.boundaries[first / 2].at, false)
        };
        let (hi, hi_closed) = if last % 2 == 0 {
            (self.boundaries[last / 2].at, true)
        } else {
            (self.boundaries[(last / 2 + 1) % m].at, false)
        };
        Component::Span { lo, hi, lo_closed, hi_closed }
    }

    /// The isolated single-direction components, in counterclockwise order.
    pub fn isolated_points(&self) -> Vec<Direction> {
        self.components()
            .into_iter()
            .filter_map(|c| match c {
                Component::Point(d) => Some(d),
                _ => None,
            })
            .collect()
    }

    /// The union of the components of positive angular length.
    pub fn positive_length_part(&self) -> ArcSet {
        let point_arcs: Vec<Arc> =
            self.isolated_points().into_iter().map(Arc::point).collect();
        self.difference(&ArcSet::from_arcs(point_arcs.iter()))
    }

    /// Whether some component contains an open semicircle.
    pub fn has_component_spanning_half(&self) -> bool {
        self.components().iter().any(|c| c.spans_half_or_more())
    }
}

impl fmt::Display for ArcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        if self.is_full() {
            return write!(f, "S1");
        }
        let mut first = true;
        for c in self.components() {
            if !first {
                write!(f, " u ")?;
            }
            first = false;
            match c {
                Component::Point(d) => write!(f, "{{{d}}}")?,
                Component::Span { lo, hi, lo_closed, hi_closed } => write!(
                    f,
                    "{}{lo}, {hi}{}",
                    if lo_closed { '[' } else { '(' },
                    if hi_closed { ']' } else { ')' },
                )?,
                Component::Punctured(d) => write!(f, "S1 - {{{d}}}")?,
                Component::FullCircle => write!(f, "S1")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(x: i64, y: i64) -> Direction {
        Direction::new(x, y).unwrap()
    }

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    #[test]
    fn ccw_order_examples() {
        assert_eq!(ccw_compare(&d(1, 0), &d(0, 1)), Ordering::Less);
        assert_eq!(ccw_compare(&d(1, 1), &d(2, 2)), Ordering::Equal);
        assert_eq!(ccw_compare(&d(-1, 1), &d(0, 1)), Ordering::Greater);
    }

    #[test]
    fn direction_normalizes_to_primitive() {
        assert_eq!(d(2, 2), d(1, 1));
        assert_eq!(d(0, -7), d(0, -1));
        assert_eq!(Direction::new(0, 0), Err(GeometryError::ZeroVector));
    }

    #[test]
    fn antipode_preserves_primitivity() {
        assert_eq!(d(3, -4).antipode(), d(-3, 4));
    }

    #[test]
    fn semicircle_examples() {
        assert_eq!(
            Arc::semicircle(d(0, 1), Side::CounterClockwise),
            Arc::open(d(0, 1), d(0, -1))
        );
        assert_eq!(
            Arc::semicircle(d(1, 0), Side::CounterClockwise),
            Arc::open(d(1, 0), d(-1, 0))
        );
        assert_eq!(
            Arc::semicircle(d(1, 0), Side::Clockwise),
            Arc::open(d(-1, 0), d(1, 0))
        );
    }

    #[test]
    fn unstable_arc_single_site() {
        // A single site at (-1,0) is in the open half-plane of exactly the
        // directions strictly between (0,-1) and (0,1) counterclockwise.
        let arc = unstable_arc(&[p(-1, 0)]).unwrap();
        assert_eq!(arc, Arc::open(d(0, -1), d(0, 1)));
    }

    #[test]
    fn unstable_arc_two_sites() {
        let arc = unstable_arc(&[p(1, 0), p(0, -1)]).unwrap();
        assert_eq!(arc, Arc::open(d(0, 1), d(-1, 0)));
    }

    #[test]
    fn unstable_arc_antipodal_pair_is_empty() {
        assert_eq!(unstable_arc(&[p(1, 0), p(-1, 0)]).unwrap(), Arc::Empty);
        assert_eq!(unstable_arc(&[p(2, 3), p(-4, -6)]).unwrap(), Arc::Empty);
    }

    #[test]
    fn unstable_arc_rejects_bad_rules() {
        assert_eq!(unstable_arc(&[]), Err(GeometryError::InvalidRule));
        assert_eq!(unstable_arc(&[p(0, 0)]), Err(GeometryError::InvalidRule));
    }

    #[test]
    fn union_of_overlapping_arcs_merges() {
        // (-pi/2, pi/2) union (0, pi) = (-pi/2, pi)
        let a = Arc::open(d(0, -1), d(0, 1));
        let b = Arc::open(d(1, 0), d(-1, 0));
        let s = ArcSet::from_arcs([a, b].iter());
        assert_eq!(s, ArcSet::from_arc(&Arc::open(d(0, -1), d(-1, 0))));
    }

    #[test]
    fn complement_of_open_arc_is_closed_arc() {
        // complement of (-pi/2, pi) is [pi, 3pi/2]
        let s = ArcSet::from_arc(&Arc::open(d(0, -1), d(-1, 0)));
        assert_eq!(
            s.complement(),
            ArcSet::from_arc(&Arc::closed(d(-1, 0), d(0, -1)))
        );
    }

    #[test]
    fn complement_of_four_quarter_arcs_is_four_points() {
        let quarters = [
            Arc::open(d(1, 0), d(0, 1)),
            Arc::open(d(0, 1), d(-1, 0)),
            Arc::open(d(-1, 0), d(0, -1)),
            Arc::open(d(0, -1), d(1, 0)),
        ];
        let stable = ArcSet::from_arcs(quarters.iter()).complement();
        assert_eq!(
            stable.isolated_points(),
            vec![d(1, 0), d(0, 1), d(-1, 0), d(0, -1)]
        );
        assert!(stable.positive_length_part().is_empty());
    }

    #[test]
    fn punctured_circle_roundtrip() {
        // Union of three open semicircles covering all but one direction.
        let arcs = [
            Arc::semicircle(d(1, 0), Side::CounterClockwise),
            Arc::semicircle(d(0, 1), Side::CounterClockwise),
            Arc::semicircle(d(0, -1), Side::Clockwise),
        ];
        let s = ArcSet::from_arcs(arcs.iter());
        assert!(!s.is_full());
        assert!(!s.contains(&d(0, -1)));
        assert!(s.contains(&d(1, -1)));
        assert_eq!(s.components(), vec![Component::Punctured(d(0, -1))]);
        assert!(s.has_component_spanning_half());
        let c = s.complement();
        assert_eq!(c.isolated_points(), vec![d(0, -1)]);
        assert_eq!(c.complement(), s);
    }

    #[test]
    fn point_and_span_components() {
        let s = ArcSet::from_arcs(
            [Arc::point(d(1, 0)), Arc::closed(d(0, 1), d(-1, 0))].iter(),
        );
        let comps = s.components();
        assert_eq!(comps.len(), 2);
        assert!(matches!(comps[0], Component::Point(q) if q == d(1, 0)));
        assert!(
            matches!(comps[1], Component::Span { lo, hi, lo_closed: true, hi_closed: true } if lo == d(0,1) && hi == d(-1,0))
        );
    }

    #[test]
    fn closed_wins_on_union_open_wins_on_complement_boundary() {
        let open = ArcSet::from_arc(&Arc::open(d(1, 0), d(0, 1)));
        let closed = ArcSet::from_arc(&Arc::closed(d(1, 0), d(0, 1)));
        let u = open.union(&closed);
        assert_eq!(u, closed);
        assert!(!open.complement().contains(&d(1, 1)));
        assert!(open.complement().contains(&d(1, 0)));
    }

    fn arb_direction() -> impl Strategy<Value = Direction> {
        (-6i64..=6, -6i64..=6)
            .prop_filter("nonzero", |(x, y)| *x != 0 || *y != 0)
            .prop_map(|(x, y)| Direction::new(x, y).unwrap())
    }

    fn arb_arc() -> impl Strategy<Value = Arc> {
        (arb_direction(), arb_direction(), any::<bool>(), any::<bool>())
            .prop_map(|(lo, hi, lc, hc)| Arc::span(lo, hi, lc, hc))
    }

    fn arb_arcset() -> impl Strategy<Value = ArcSet> {
        prop::collection::vec(arb_arc(), 0..5)
            .prop_map(|arcs| ArcSet::from_arcs(arcs.iter()))
    }

    proptest! {
        #[test]
        fn complement_is_involution(s in arb_arcset()) {
            prop_assert_eq!(s.complement().complement(), s);
        }

        #[test]
        fn union_commutative_and_idempotent(a in arb_arcset(), b in arb_arcset()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.union(&a), a);
        }

        #[test]
        fn union_associative(a in arb_arcset(), b in arb_arcset(), c in arb_arcset()) {
            prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        }

        #[test]
        fn de_morgan(a in arb_arcset(), b in arb_arcset()) {
            prop_assert_eq!(
                a.union(&b).complement(),
                a.complement().intersection(&b.complement())
            );
        }

        #[test]
        fn membership_matches_arc_union(arcs in prop::collection::vec(arb_arc(), 0..5), q in arb_direction()) {
            let s = ArcSet::from_arcs(arcs.iter());
            let direct = arcs.iter().any(|a| a.contains(&q));
            prop_assert_eq!(s.contains(&q), direct);
        }

        #[test]
        fn sorting_directions_is_stable_total_order(mut v in prop::collection::vec(arb_direction(), 1..12)) {
            let mut w = v.clone();
            v.sort();
            w.sort_by(ccw_compare);
            prop_assert_eq!(&v, &w);
            for pair in v.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
        }

        #[test]
        fn unstable_arc_membership_is_all_sites_negative(
            sites in prop::collection::vec(
                (-4i64..=4, -4i64..=4).prop_filter("nonzero", |(x,y)| *x != 0 || *y != 0)
                    .prop_map(|(x,y)| LatticePoint::new(x,y)),
                1..5
            ),
            q in arb_direction(),
        ) {
            let arc = unstable_arc(&sites).unwrap();
            let all_negative = sites.iter().all(|s| dot(s, &q.as_point()) < 0);
            prop_assert_eq!(arc.contains(&q), all_negative);
        }
    }
}
