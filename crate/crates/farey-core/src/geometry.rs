//! Exact-rational 2D convex geometry kernel.
//!
//! Everything here works in arbitrary-precision rationals: half-plane
//! clipping, shoelace areas, point location, and the tangent-cone areas used
//! for the vertex weights of the tessellation. No floating point enters any
//! predicate, so downstream table checks can demand exact equality.
//!
//! Polygons carry a strictness flag per edge: a strict edge belongs to the
//! complement (the defining inequality was strict), which lets adjacent cells
//! of a tiling share boundaries without double ownership.

use crate::Rat;
use num::{BigInt, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// A point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        RatPoint { x, y }
    }

    /// Convenience constructor from small integer fractions.
    pub fn from_ints(xn: i64, xd: i64, yn: i64, yd: i64) -> Self {
        RatPoint::new(crate::rat(xn, xd), crate::rat(yn, yd))
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The half-plane `{(x, y) : a·x + b·y + c ≥ 0}`, or with `>` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfPlane {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub strict: bool,
}

impl HalfPlane {
    pub fn new(a: Rat, b: Rat, c: Rat, strict: bool) -> Self {
        assert!(
            !(a.is_zero() && b.is_zero()),
            "half-plane normal must be nonzero"
        );
        HalfPlane { a, b, c, strict }
    }

    /// Signed evaluation `a·x + b·y + c`; nonnegative means inside the closure.
    pub fn eval(&self, p: &RatPoint) -> Rat {
        &self.a * &p.x + &self.b * &p.y + &self.c
    }

    /// The complementary half-plane (same line, opposite side, flipped
    /// strictness so that the two sides partition the plane).
    pub fn complement(&self) -> HalfPlane {
        HalfPlane {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            strict: !self.strict,
        }
    }
}

/// Exact classification of a point against a convex polygon (closure).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointLocation {
    Interior,
    /// On the open edge starting at this vertex index.
    OnEdge(usize),
    AtVertex(usize),
    Outside,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("operation requires a non-degenerate polygon")]
    DegeneratePolygon,
    #[error("cone directions are parallel")]
    ParallelDirections,
}

/// A convex polygon with exact rational vertices in counter-clockwise order.
///
/// Degenerate values (empty, single point, segment) are first-class: they
/// arise naturally while pruning empty tessellation cells and all have area
/// zero. `edge_strictness[i]` refers to the edge from `vertices[i]` to
/// `vertices[i + 1 mod n]`; `true` means the open complement owns that edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPolygon {
    vertices: Vec<RatPoint>,
    edge_strictness: Vec<bool>,
}

fn cross(ox: &Rat, oy: &Rat, ax: &Rat, ay: &Rat, bx: &Rat, by: &Rat) -> Rat {
    (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
}

impl ConvexPolygon {
    /// Empty polygon.
    pub fn empty() -> Self {
        ConvexPolygon {
            vertices: vec![],
            edge_strictness: vec![],
        }
    }

    /// Build from vertices given in either orientation; normalizes to CCW,
    /// drops repeated and collinear vertices, and marks all edges non-strict
    /// (a closed polygon).
    pub fn new(vertices: Vec<RatPoint>) -> Self {
        let strict = vec![false; vertices.len()];
        Self::with_strictness(vertices, strict)
    }

    /// Build from vertices plus per-edge strictness flags (aligned before
    /// normalization; flags follow their edges through cleanup).
    pub fn with_strictness(vertices: Vec<RatPoint>, strictness: Vec<bool>) -> Self {
        assert_eq!(vertices.len(), strictness.len());
        let mut poly = ConvexPolygon {
            vertices,
            edge_strictness: strictness,
        };
        poly.dedup_vertices();
        poly.orient_ccw();
        poly.drop_collinear();
        poly
    }

    fn dedup_vertices(&mut self) {
        let n = self.vertices.len();
        if n <= 1 {
            return;
        }
        let mut vs = Vec::with_capacity(n);
        let mut st = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + 1) % n;
            if self.vertices[i] != self.vertices[j] {
                vs.push(self.vertices[i].clone());
                st.push(self.edge_strictness[i]);
            }
            // A zero-length edge vanishes together with its strictness flag.
        }
        if vs.is_empty() {
            // All vertices coincided: keep the point.
            vs.push(self.vertices[0].clone());
            st.push(false);
        }
        self.vertices = vs;
        self.edge_strictness = st;
    }

    fn orient_ccw(&mut self) {
        if self.signed_area_twice().is_negative() {
            // Reversing vertex order moves edge i (v_i -> v_{i+1}) to the
            // edge between the reversed positions of v_{i+1} and v_i, which
            // is index n-2-i; the wrap-around edge keeps index n-1.
            self.vertices.reverse();
            self.edge_strictness.reverse();
            self.edge_strictness.rotate_left(1);
        }
    }

    fn drop_collinear(&mut self) {
        loop {
            let n = self.vertices.len();
            if n < 3 {
                return;
            }
            let mut removed = false;
            for i in 0..n {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                let c = cross(
                    &self.vertices[prev].x,
                    &self.vertices[prev].y,
                    &self.vertices[i].x,
                    &self.vertices[i].y,
                    &self.vertices[next].x,
                    &self.vertices[next].y,
                );
                if c.is_zero() {
                    // Merge the two collinear edges; if either side excluded
                    // its boundary the merged edge is excluded too.
                    let merged = self.edge_strictness[prev] || self.edge_strictness[i];
                    self.vertices.remove(i);
                    self.edge_strictness.remove(i);
                    let p = if i == 0 { self.vertices.len() - 1 } else { prev };
                    self.edge_strictness[p] = merged;
                    removed = true;
                    break;
                }
            }
            if !removed {
                return;
            }
        }
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn edge_strictness(&self) -> &[bool] {
        &self.edge_strictness
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The supporting half-plane of edge `i` (from vertex `i` to vertex
    /// `i+1`), oriented so the polygon interior satisfies it, carrying the
    /// edge's strictness. Requires a non-degenerate polygon.
    pub fn edge_halfplane(&self, i: usize) -> HalfPlane {
        assert!(!self.is_degenerate(), "edge_halfplane on degenerate polygon");
        let n = self.vertices.len();
        let p = &self.vertices[i];
        let q = &self.vertices[(i + 1) % n];
        let a = &p.y - &q.y;
        let b = &q.x - &p.x;
        let c = -(&a * &p.x) - &b * &p.y;
        HalfPlane::new(a, b, c, self.edge_strictness[i])
    }

    /// True when the polygon has no interior (empty, point, or segment).
    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    fn signed_area_twice(&self) -> Rat {
        let n = self.vertices.len();
        let mut acc = Rat::zero();
        for i in 0..n {
            let j = (i + 1) % n;
            acc += &self.vertices[i].x * &self.vertices[j].y
                - &self.vertices[j].x * &self.vertices[i].y;
        }
        acc
    }

    /// Exact shoelace area (nonnegative; zero for degenerate polygons).
    pub fn area(&self) -> Rat {
        let two = Rat::from(BigInt::from(2));
        let a = self.signed_area_twice();
        if a.is_negative() {
            -a / two
        } else {
            a / two
        }
    }

    /// Exact intersection with a half-plane (Sutherland–Hodgman with exact
    /// predicates). The new boundary edge inherits the half-plane's
    /// strictness; surviving edges keep theirs.
    pub fn clip(&self, hp: &HalfPlane) -> ConvexPolygon {
        let n = self.vertices.len();
        if n == 0 {
            return ConvexPolygon::empty();
        }
        if n == 1 {
            return if !hp.eval(&self.vertices[0]).is_negative() {
                self.clone()
            } else {
                ConvexPolygon::empty()
            };
        }
        // Degenerate segments are clipped as two-vertex "polygons"; the code
        // below handles them because each direction of the segment is an edge.
        let signs: Vec<Rat> = self.vertices.iter().map(|v| hp.eval(v)).collect();
        let mut vs: Vec<RatPoint> = Vec::with_capacity(n + 2);
        let mut st: Vec<bool> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (si, sj) = (&signs[i], &signs[j]);
            let edge_st = self.edge_strictness[i];
            if !si.is_negative() {
                if !sj.is_negative() {
                    // Edge fully kept.
                    vs.push(self.vertices[i].clone());
                    st.push(if si.is_zero() && sj.is_zero() {
                        // Edge lies on the clip line: excluded if either the
                        // original edge or the half-plane excludes it.
                        edge_st || hp.strict
                    } else {
                        edge_st
                    });
                } else if si.is_zero() {
                    // Leaving at the vertex itself: the outgoing boundary
                    // runs along the clip line.
                    vs.push(self.vertices[i].clone());
                    st.push(hp.strict);
                } else {
                    // Leaving through the edge: keep the inside part, then
                    // walk along the clip line.
                    vs.push(self.vertices[i].clone());
                    st.push(edge_st);
                    vs.push(intersect_edge(
                        &self.vertices[i],
                        &self.vertices[j],
                        si,
                        sj,
                    ));
                    st.push(hp.strict);
                }
            } else if sj.is_positive() {
                // Entering through the edge.
                vs.push(intersect_edge(&self.vertices[i], &self.vertices[j], si, sj));
                st.push(edge_st);
            }
            // Entering exactly at vertex j (si < 0, sj == 0): vertex j is
            // emitted by its own iteration.
        }
        ConvexPolygon::with_strictness(vs, st)
    }

    /// Exact point location against the closure of the polygon.
    pub fn locate(&self, p: &RatPoint) -> Result<PointLocation, GeometryError> {
        if self.is_degenerate() {
            return Err(GeometryError::DegeneratePolygon);
        }
        let n = self.vertices.len();
        let mut on_edge: Option<usize> = None;
        for i in 0..n {
            if self.vertices[i] == *p {
                return Ok(PointLocation::AtVertex(i));
            }
            let j = (i + 1) % n;
            let c = cross(
                &self.vertices[i].x,
                &self.vertices[i].y,
                &self.vertices[j].x,
                &self.vertices[j].y,
                &p.x,
                &p.y,
            );
            if c.is_negative() {
                return Ok(PointLocation::Outside);
            }
            if c.is_zero() {
                on_edge = Some(i);
            }
        }
        match on_edge {
            Some(i) => {
                // Zero cross on a CCW convex polygon with all other sides
                // strictly positive places p on the open edge i.
                Ok(PointLocation::OnEdge(i))
            }
            None => Ok(PointLocation::Interior),
        }
    }

    /// Membership honoring per-edge strictness: a point on a strict edge (or
    /// at a vertex incident only to strict edges) does not belong.
    pub fn contains_half_open(&self, p: &RatPoint) -> bool {
        match self.locate(p) {
            Err(_) => false,
            Ok(PointLocation::Outside) => false,
            Ok(PointLocation::Interior) => true,
            Ok(PointLocation::OnEdge(i)) => !self.edge_strictness[i],
            Ok(PointLocation::AtVertex(i)) => {
                let n = self.vertices.len();
                let prev = (i + n - 1) % n;
                !self.edge_strictness[i] && !self.edge_strictness[prev]
            }
        }
    }

    /// Axis-aligned bounding box as (min, max) corners; None when empty.
    pub fn bounding_box(&self) -> Option<(RatPoint, RatPoint)> {
        let first = self.vertices.first()?;
        let (mut xmin, mut xmax) = (first.x.clone(), first.x.clone());
        let (mut ymin, mut ymax) = (first.y.clone(), first.y.clone());
        for v in &self.vertices[1..] {
            if v.x < xmin {
                xmin = v.x.clone();
            }
            if v.x > xmax {
                xmax = v.x.clone();
            }
            if v.y < ymin {
                ymin = v.y.clone();
            }
            if v.y > ymax {
                ymax = v.y.clone();
            }
        }
        Some((RatPoint::new(xmin, ymin), RatPoint::new(xmax, ymax)))
    }

    /// The closed range of x covered by the polygon at height `y`, if any.
    /// Used by the lattice-counting scanline.
    pub fn x_range_at_y(&self, y: &Rat) -> Option<(Rat, Rat)> {
        let n = self.vertices.len();
        if n == 0 {
            return None;
        }
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        let mut push = |x: Rat| {
            if lo.as_ref().map_or(true, |l| x < *l) {
                lo = Some(x.clone());
            }
            if hi.as_ref().map_or(true, |h| x > *h) {
                hi = Some(x);
            }
        };
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (&self.vertices[i], &self.vertices[j]);
            if a.y == *y {
                push(a.x.clone());
            }
            let (dya, dyb) = (&a.y - y, &b.y - y);
            if (dya.is_positive() && dyb.is_negative())
                || (dya.is_negative() && dyb.is_positive())
            {
                // Proper crossing: interpolate x exactly.
                let t = &dya / (&dya - &dyb);
                let x = &a.x + t * (&b.x - &a.x);
                push(x);
            }
            if n == 1 {
                break;
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => Some((l, h)),
            _ => None,
        }
    }
}

fn intersect_edge(a: &RatPoint, b: &RatPoint, sa: &Rat, sb: &Rat) -> RatPoint {
    // The line parameter where the signed evaluation vanishes.
    let t = sa / (sa - sb);
    RatPoint::new(&a.x + &t * (&b.x - &a.x), &a.y + &t * (&b.y - &a.y))
}

/// Area of `cone(dir1, dir2) ∩ {|x| ≤ 1, |pr·y − pr1·x| ≤ 1}` where the cone
/// sits at the origin and is spanned nonnegatively by the two directions.
///
/// With `(dir1, dir2)` the edge directions of a convex polygon at a vertex
/// and `(pr, pr1)` the probe coefficients, this is exactly the limiting
/// normalized area `α` of cell ∩ probe when the probe is centered at that
/// vertex (the polygon agrees with its tangent cone locally).
pub fn cone_clip_area(
    vertex: &RatPoint,
    dir1: &RatPoint,
    dir2: &RatPoint,
    pr: i64,
    pr1: i64,
) -> Result<Rat, GeometryError> {
    let _ = vertex; // The cone is translation-invariant; kept for call-site clarity.
    let d1 = (dir1.x.clone(), dir1.y.clone());
    let d2 = (dir2.x.clone(), dir2.y.clone());
    let cr = &d1.0 * &d2.1 - &d1.1 * &d2.0;
    let para = probe_parallelogram(pr, pr1);
    if cr.is_zero() {
        // Antiparallel directions span a full half-plane through the center,
        // which halves the parallelogram; identical directions are an error.
        let dot = &d1.0 * &d2.0 + &d1.1 * &d2.1;
        if dot.is_negative() {
            return Ok(para.area() / Rat::from(BigInt::from(2)));
        }
        return Err(GeometryError::ParallelDirections);
    }
    // Orient so the cone is the CCW sweep from u to w.
    let (u, w) = if cr.is_positive() { (d1, d2) } else { (d2, d1) };
    // cone = {p : cross(u, p) ≥ 0 and cross(p, w) ≥ 0}
    let hp1 = HalfPlane::new(-u.1.clone(), u.0.clone(), Rat::zero(), false);
    let hp2 = HalfPlane::new(w.1.clone(), -w.0.clone(), Rat::zero(), false);
    Ok(para.clip(&hp1).clip(&hp2).area())
}

/// The probe parallelogram `{|x| ≤ 1, |pr·y − pr1·x| ≤ 1}` centered at the
/// origin; its area is `4/pr`.
pub fn probe_parallelogram(pr: i64, pr1: i64) -> ConvexPolygon {
    assert!(pr >= 1);
    let v = |x: i64, num: i64| RatPoint::new(crate::rat(x, 1), crate::rat(num, pr));
    ConvexPolygon::new(vec![
        v(1, pr1 - 1),
        v(1, pr1 + 1),
        v(-1, -pr1 + 1),
        v(-1, -pr1 - 1),
    ])
}
