//! The exact tessellation machinery behind the pair density.
//!
//! The normalized Farey triangle `T = {(x, y) ∈ (0,1]² : x + y > 1}` splits
//! into cells `T_k = {k·y ≤ 1 + x < (k+1)·y}` indexed by the Farey index
//! `k`, and the map `T(x, y) = (y, ⌊(1+x)/y⌋·y − x)` advances a normalized
//! pair of consecutive denominators one step. A tuple `(k₁, …, k_r)` of
//! indices therefore carves out the cell
//! `T_{k₁} ∩ T⁻¹T_{k₂} ∩ … ∩ T^{−(r−1)}T_{k_r}` of pairs whose next `r`
//! indices are exactly the tuple. Admissible tuples — single even entry, or
//! odd ends with even middles — are the ones arising between consecutive
//! even-denominator fractions.
//!
//! The index polynomials `p_r` (`p_r = k_r·p_{r−1} − p_{r−2}`) express the
//! last denominator of a chain as `p_r·y − p_{r−1}(k₂…k_r)·x`, which turns a
//! small square around a density evaluation point into a parallelogram probe
//! of area `4η²/p_r` against the cell; the vertex weights `α` are the
//! normalized probe∩cell areas when the probe center hits a cell vertex.
//!
//! Everything here is exact rational geometry. The published vertex lists
//! and `α` tables are reimplemented in [`tables`] purely as golden test
//! data; the geometry never reads from them.

use crate::geometry::{cone_clip_area, ConvexPolygon, GeometryError, HalfPlane, RatPoint};
use crate::Rat;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TessError {
    #[error("point lies outside the Farey triangle")]
    OutsideDomain,
    #[error("cell index must be at least 1")]
    InvalidK,
    #[error("operation requires a full-dimensional cell")]
    DegenerateCell,
    #[error("tuple has an empty cell")]
    EmptyCell,
}

/// A tuple of Farey indices `(k₁, …, k_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KTuple {
    ks: Vec<u64>,
}

impl KTuple {
    pub fn new(ks: Vec<u64>) -> Self {
        assert!(!ks.is_empty(), "tuple must be nonempty");
        assert!(ks.iter().all(|&k| k >= 1), "entries must be positive");
        KTuple { ks }
    }

    pub fn ks(&self) -> &[u64] {
        &self.ks
    }

    pub fn level(&self) -> usize {
        self.ks.len()
    }

    /// Parity pattern of index tuples between consecutive even-denominator
    /// fractions: a single even entry, or odd ends with all-even middles.
    pub fn is_admissible(&self) -> bool {
        let r = self.ks.len();
        if r == 1 {
            return self.ks[0] >= 2 && self.ks[0] % 2 == 0;
        }
        self.ks[0] % 2 == 1
            && self.ks[r - 1] % 2 == 1
            && self.ks[1..r - 1].iter().all(|k| k % 2 == 0)
    }

    pub fn reversed(&self) -> KTuple {
        let mut ks = self.ks.clone();
        ks.reverse();
        KTuple { ks }
    }
}

impl std::fmt::Display for KTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.ks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// A tuple together with its (possibly empty) cell polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub tuple: KTuple,
    pub polygon: ConvexPolygon,
}

/// A cell vertex with its probe weight `α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexWeight {
    pub tuple: KTuple,
    pub vertex: RatPoint,
    pub alpha: Rat,
}

/// Index polynomial `p_r(k₁, …, k_r)`: `p₀ = 1`, `p₁ = k₁`,
/// `p_j = k_j·p_{j−1} − p_{j−2}`. Symmetric under tuple reversal.
pub fn p_value(ks: &[u64]) -> i64 {
    let mut prev: i64 = 1; // p_0
    let mut cur: i64 = match ks.first() {
        Some(&k) => k as i64,
        None => return 1,
    };
    for &k in &ks[1..] {
        let next = (k as i64)
            .checked_mul(cur)
            .and_then(|v| v.checked_sub(prev))
            .expect("index polynomial overflow");
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients `(p_r(k), p_{r−1}(k₂…k_r))` expressing the chain's last
/// denominator as `p_r·y − p_{r−1}·x`.
pub fn last_coeffs(tuple: &KTuple) -> (i64, i64) {
    (p_value(tuple.ks()), p_value(&tuple.ks()[1..]))
}

fn in_farey_triangle(p: &RatPoint) -> bool {
    let one = Rat::one();
    p.x.is_positive()
        && p.y.is_positive()
        && p.x <= one
        && p.y <= one
        && &p.x + &p.y > one
}

/// The interval map `T(x, y) = (y, ⌊(1+x)/y⌋·y − x)` on the Farey triangle.
pub fn t_map(p: &RatPoint) -> Result<RatPoint, TessError> {
    if !in_farey_triangle(p) {
        return Err(TessError::OutsideDomain);
    }
    let k = ((Rat::one() + &p.x) / &p.y).floor();
    Ok(RatPoint::new(p.y.clone(), k * &p.y - &p.x))
}

/// Inverse of [`t_map`]: `T⁻¹(x, y) = (⌊(1+y)/x⌋·x − y, x)`.
pub fn t_inv(p: &RatPoint) -> Result<RatPoint, TessError> {
    if !in_farey_triangle(p) {
        return Err(TessError::OutsideDomain);
    }
    let k = ((Rat::one() + &p.y) / &p.x).floor();
    Ok(RatPoint::new(k * &p.x - &p.y, p.x.clone()))
}

/// The index of the cell containing `p`: `k = ⌊(1+x)/y⌋`.
pub fn cell_index(p: &RatPoint) -> Result<u64, TessError> {
    if !in_farey_triangle(p) {
        return Err(TessError::OutsideDomain);
    }
    let k = ((Rat::one() + &p.x) / &p.y).floor();
    Ok(k.to_integer().to_u64().expect("index fits u64"))
}

/// Closure of the Farey triangle with its defining strictness: `x + y > 1`
/// strict, `x ≤ 1`, `y ≤ 1` closed (the `x, y > 0` sides are subsumed).
fn farey_triangle() -> ConvexPolygon {
    let sq = ConvexPolygon::new(vec![
        RatPoint::from_ints(0, 1, 0, 1),
        RatPoint::from_ints(1, 1, 0, 1),
        RatPoint::from_ints(1, 1, 1, 1),
        RatPoint::from_ints(0, 1, 1, 1),
    ]);
    sq.clip(&HalfPlane::new(
        Rat::one(),
        Rat::one(),
        -Rat::one(),
        true,
    ))
}

/// The base cell `T_k = {(x,y) ∈ T : k·y ≤ 1 + x < (k+1)·y}`, with the
/// defining strictness on each edge. `T_1` is a triangle, `T_k` for `k ≥ 2`
/// a quadrilateral.
pub fn base_cell(k: u64) -> Result<ConvexPolygon, TessError> {
    if k == 0 {
        return Err(TessError::InvalidK);
    }
    let ki = k as i64;
    // 1 + x − k·y ≥ 0 (closed: the lower edge belongs to T_k) …
    let lower = HalfPlane::new(Rat::one(), crate::rat(-ki, 1), Rat::one(), false);
    // … and (k+1)·y − 1 − x > 0 (strict: that edge belongs to T_{k+1}).
    let upper = HalfPlane::new(-Rat::one(), crate::rat(ki + 1, 1), -Rat::one(), true);
    Ok(farey_triangle().clip(&lower).clip(&upper))
}

type Mat = [[i128; 2]; 2];

const IDENTITY: Mat = [[1, 0], [0, 1]];

/// Left-compose the linear branch `B_k(x, y) = (y, k·y − x)` onto `m`.
fn compose_branch(k: u64, m: &Mat) -> Mat {
    let k = k as i128;
    [
        [m[1][0], m[1][1]],
        [k * m[1][0] - m[0][0], k * m[1][1] - m[0][1]],
    ]
}

/// Pull a half-plane constraint back through the linear map `m`.
fn pull_back(hp: &HalfPlane, m: &Mat) -> HalfPlane {
    let a = &hp.a * crate::rat(m[0][0] as i64, 1) + &hp.b * crate::rat(m[1][0] as i64, 1);
    let b = &hp.a * crate::rat(m[0][1] as i64, 1) + &hp.b * crate::rat(m[1][1] as i64, 1);
    HalfPlane::new(a, b, hp.c.clone(), hp.strict)
}

fn clip_by_pulled_back_cell(poly: &ConvexPolygon, k: u64, m: &Mat) -> ConvexPolygon {
    let base = base_cell(k).expect("k >= 1");
    let mut out = poly.clone();
    for i in 0..base.vertices().len() {
        if out.is_empty() {
            break;
        }
        out = out.clip(&pull_back(&base.edge_halfplane(i), m));
    }
    out
}

fn cell_memo() -> &'static Mutex<HashMap<Vec<u64>, ConvexPolygon>> {
    static MEMO: OnceLock<Mutex<HashMap<Vec<u64>, ConvexPolygon>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The cell polygon `T_{k₁…k_r}`, computed by the suffix recursion
/// `cell(k₁…k_r) = T_{k₁} ∩ B⁻¹(cell(k₂…k_r))` with `B(x,y) = (y, k₁y − x)`.
/// Admissibility is not required (partition tests use all tuples). Results
/// are memoized; the memo map is insert-only and idempotent.
pub fn cell(tuple: &KTuple) -> ConvexPolygon {
    if let Some(hit) = cell_memo().lock().unwrap().get(tuple.ks()) {
        return hit.clone();
    }
    let ks = tuple.ks();
    let poly = if ks.len() == 1 {
        base_cell(ks[0]).expect("k >= 1")
    } else {
        let sub = cell(&KTuple::new(ks[1..].to_vec()));
        if sub.is_degenerate() {
            ConvexPolygon::empty()
        } else {
            // Pull the sub-cell's constraints back through B.
            let m = compose_branch(ks[0], &IDENTITY);
            let mut poly = base_cell(ks[0]).expect("k >= 1");
            for i in 0..sub.vertices().len() {
                if poly.is_empty() {
                    break;
                }
                poly = poly.clip(&pull_back(&sub.edge_halfplane(i), &m));
            }
            poly
        }
    };
    cell_memo()
        .lock()
        .unwrap()
        .entry(ks.to_vec())
        .or_insert(poly)
        .clone()
}

/// Enumerate the tuples of a given level whose cells are nonempty
/// (positive area), optionally restricted to admissible parity patterns and
/// to cells whose closure meets the vertical strip `x ∈ [window.0, window.1]`.
///
/// Entries are capped at `max_entry`: windows touching `x = 1` meet
/// infinitely many cells, so an explicit cap is part of the contract.
/// Branch-and-prune: a partial tuple is extended only while its polygon has
/// positive area (and meets the window), and the candidate range for the
/// next entry comes from the y-extent of the forward image of the partial
/// cell, since `T_k` lives in the band `2/(k+2) ≤ y ≤ 2/k`.
pub fn enumerate_cells(
    r: usize,
    window: Option<(&Rat, &Rat)>,
    max_entry: u64,
    admissible_only: bool,
) -> Vec<Cell> {
    assert!(r >= 1 && max_entry >= 1);
    if admissible_only {
        let mut out = admissible_cells_upto(r, window, max_entry);
        out.retain(|c| c.tuple.level() == r);
        return out;
    }
    let mut out = Vec::new();
    let start = farey_triangle();
    let mut stack: Vec<u64> = Vec::with_capacity(r);
    extend(&mut stack, &start, &IDENTITY, r, window, max_entry, &mut out);
    out.sort_by(|a, b| a.tuple.cmp(&b.tuple));
    out
}

/// Admissible nonempty cells of level `r` (see [`enumerate_cells`]).
pub fn admissible_cells(r: usize, window: Option<(&Rat, &Rat)>, max_entry: u64) -> Vec<Cell> {
    enumerate_cells(r, window, max_entry, true)
}

/// All admissible nonempty cells of level ≤ `r_max` (windowed, capped), in
/// one pass over the shared prefix tree: a level-`m` admissible tuple and
/// the level-`m'` ones share their even-middle prefixes, so density level
/// sums over many levels cost one traversal instead of one per level.
pub fn admissible_cells_upto(
    r_max: usize,
    window: Option<(&Rat, &Rat)>,
    max_entry: u64,
) -> Vec<Cell> {
    assert!(r_max >= 1 && max_entry >= 1);
    let mut out = Vec::new();
    let start = farey_triangle();
    let start_windowed = strip_clip(&start, window);
    if start_windowed.is_empty() {
        return out;
    }
    // Level 1: a single even entry.
    let (k_lo, k_hi) = k_candidates(&start_windowed, &IDENTITY, max_entry);
    for k in k_lo..=k_hi {
        let poly = clip_by_pulled_back_cell(&start, k, &IDENTITY);
        if poly.is_degenerate() {
            continue;
        }
        let windowed = strip_clip(&poly, window);
        if windowed.is_empty() {
            continue;
        }
        if k % 2 == 0 {
            out.push(Cell {
                tuple: KTuple::new(vec![k]),
                polygon: poly.clone(),
            });
        }
        // Levels ≥ 2: odd first entry, even middles, odd last entry.
        if k % 2 == 1 && r_max >= 2 {
            let m = compose_branch(k, &IDENTITY);
            let mut stack = vec![k];
            extend_admissible(
                &mut stack, &poly, &windowed, &m, r_max, window, max_entry, &mut out,
            );
        }
    }
    out.sort_by(|a, b| a.tuple.cmp(&b.tuple));
    out
}

/// Clip to the closed vertical strip `x ∈ [lo, hi]`; identity when no
/// window. Closed on purpose: probe centers are classified against cell
/// closures, so a boundary touch counts.
fn strip_clip(poly: &ConvexPolygon, window: Option<(&Rat, &Rat)>) -> ConvexPolygon {
    match window {
        None => poly.clone(),
        Some((lo, hi)) => poly
            .clip(&HalfPlane::new(Rat::one(), Rat::zero(), -(*lo).clone(), false))
            .clip(&HalfPlane::new(-Rat::one(), Rat::zero(), (*hi).clone(), false)),
    }
}

/// DFS over admissible continuations of an odd-headed prefix: odd entries
/// close a tuple at the current level, even entries extend the prefix.
#[allow(clippy::too_many_arguments)]
fn extend_admissible(
    stack: &mut Vec<u64>,
    poly: &ConvexPolygon,
    windowed: &ConvexPolygon,
    m: &Mat,
    r_max: usize,
    window: Option<(&Rat, &Rat)>,
    max_entry: u64,
    out: &mut Vec<Cell>,
) {
    let next_len = stack.len() + 1;
    let may_close = next_len <= r_max;
    let may_extend = next_len + 1 <= r_max; // room for a final odd entry
    if !may_close {
        return;
    }
    // The windowed part of the prefix bounds the k-range of any
    // continuation that still meets the window.
    let (k_lo, k_hi) = k_candidates(windowed, m, max_entry);
    for k in k_lo..=k_hi {
        let closing = k % 2 == 1;
        if closing && !may_close || !closing && !may_extend {
            continue;
        }
        let next_poly = clip_by_pulled_back_cell(poly, k, m);
        if next_poly.is_degenerate() {
            continue;
        }
        let next_windowed = strip_clip(&next_poly, window);
        if next_windowed.is_empty() {
            continue;
        }
        stack.push(k);
        if closing {
            out.push(Cell {
                tuple: KTuple::new(stack.clone()),
                polygon: next_poly,
            });
        } else {
            let next_m = compose_branch(k, m);
            extend_admissible(
                stack,
                &next_poly,
                &next_windowed,
                &next_m,
                r_max,
                window,
                max_entry,
                out,
            );
        }
        stack.pop();
    }
}

/// Candidate k-range for the next entry, from the y-extent of the image of
/// the current partial cell under the composed branch map.
fn k_candidates(poly: &ConvexPolygon, m: &Mat, max_entry: u64) -> (u64, u64) {
    let two = crate::rat(2, 1);
    let mut y_min: Option<Rat> = None;
    let mut y_max: Option<Rat> = None;
    for v in poly.vertices() {
        let y = crate::rat(m[1][0] as i64, 1) * &v.x + crate::rat(m[1][1] as i64, 1) * &v.y;
        if y_min.as_ref().map_or(true, |m| y < *m) {
            y_min = Some(y.clone());
        }
        if y_max.as_ref().map_or(true, |m| y > *m) {
            y_max = Some(y);
        }
    }
    let (Some(y_min), Some(y_max)) = (y_min, y_max) else {
        return (1, 0);
    };
    if !y_max.is_positive() {
        return (1, 0);
    }
    // T_k needs 2/(k+2) ≤ y_max and 2/k ≥ y_min.
    let k_lo = {
        let bound = &two / &y_max - &two; // k ≥ 2/y_max − 2
        bound.ceil().to_integer().to_i64().map_or(1, |v| v.max(1)) as u64
    };
    let k_hi = if y_min.is_positive() {
        let bound = &two / &y_min;
        bound
            .floor()
            .to_integer()
            .to_u64()
            .map_or(max_entry, |v| v.min(max_entry))
    } else {
        max_entry
    };
    (k_lo, k_hi)
}

fn extend(
    stack: &mut Vec<u64>,
    poly: &ConvexPolygon,
    m: &Mat,
    r: usize,
    window: Option<(&Rat, &Rat)>,
    max_entry: u64,
    out: &mut Vec<Cell>,
) {
    let (k_lo, k_hi) = k_candidates(&strip_clip(poly, window), m, max_entry);
    for k in k_lo..=k_hi {
        let next_poly = clip_by_pulled_back_cell(poly, k, m);
        if next_poly.is_degenerate() || strip_clip(&next_poly, window).is_empty() {
            continue;
        }
        stack.push(k);
        if stack.len() == r {
            out.push(Cell {
                tuple: KTuple::new(stack.clone()),
                polygon: next_poly,
            });
        } else {
            let next_m = compose_branch(k, m);
            extend(stack, &next_poly, &next_m, r, window, max_entry, out);
        }
        stack.pop();
    }
}

/// Center of the probe parallelogram anchored at `(x₀, y₀)`:
/// `(x₀, (p_{r−1}·x₀ + y₀)/p_r)`.
pub fn probe_center(tuple: &KTuple, anchor: &RatPoint) -> RatPoint {
    let (pr, pr1) = last_coeffs(tuple);
    let y = (crate::rat(pr1, 1) * &anchor.x + &anchor.y) / crate::rat(pr, 1);
    RatPoint::new(anchor.x.clone(), y)
}

/// Probe weight `α` at a cell vertex, computed from the vertex tangent cone
/// and the probe coefficients — never read from a table.
pub fn vertex_alpha(cell: &Cell, vertex_index: usize) -> Result<VertexWeight, TessError> {
    if cell.polygon.is_degenerate() {
        return Err(TessError::DegenerateCell);
    }
    let vs = cell.polygon.vertices();
    let n = vs.len();
    let v = &vs[vertex_index];
    let prev = &vs[(vertex_index + n - 1) % n];
    let next = &vs[(vertex_index + 1) % n];
    let d1 = RatPoint::new(&prev.x - &v.x, &prev.y - &v.y);
    let d2 = RatPoint::new(&next.x - &v.x, &next.y - &v.y);
    let (pr, pr1) = last_coeffs(&cell.tuple);
    let alpha = cone_clip_area(v, &d1, &d2, pr, pr1).map_err(|e| match e {
        GeometryError::ParallelDirections => TessError::DegenerateCell,
        GeometryError::DegeneratePolygon => TessError::DegenerateCell,
    })?;
    Ok(VertexWeight {
        tuple: cell.tuple.clone(),
        vertex: v.clone(),
        alpha,
    })
}

/// Sum of `α` over all vertices: `4/p_r` for quadrilateral cells and
/// `2/p_r` for triangles — the error-correcting identity.
pub fn checksum(cell: &Cell) -> Result<Rat, TessError> {
    if cell.polygon.is_degenerate() {
        return Err(TessError::DegenerateCell);
    }
    let mut sum = Rat::zero();
    for i in 0..cell.polygon.vertices().len() {
        sum += vertex_alpha(cell, i)?.alpha;
    }
    Ok(sum)
}

/// Image of the cell under `(x, y) ↦ (x, p_r·y − p_{r−1}·x)` — the region of
/// normalized (first, last) denominator pairs realized by the tuple.
pub fn u_region(tuple: &KTuple) -> Result<ConvexPolygon, TessError> {
    let c = cell(tuple);
    if c.is_degenerate() {
        return Err(TessError::EmptyCell);
    }
    let (pr, pr1) = last_coeffs(tuple);
    let vs = c
        .vertices()
        .iter()
        .map(|v| {
            RatPoint::new(
                v.x.clone(),
                crate::rat(pr, 1) * &v.y - crate::rat(pr1, 1) * &v.x,
            )
        })
        .collect();
    Ok(ConvexPolygon::new(vs))
}

/// Closed-form reimplementations of the published vertex lists and vertex
/// weights — golden data for the verification suite only.
pub mod tables {
    use super::*;

    fn pt(xn: i64, xd: i64, yn: i64, yd: i64) -> RatPoint {
        RatPoint::from_ints(xn, xd, yn, yd)
    }

    /// Published vertex list for a tuple's cell, when the tuple matches a
    /// table row (fixed rows first; the two level-r families cover r ≥ 5).
    pub fn cell_vertices(tuple: &KTuple) -> Option<Vec<RatPoint>> {
        let ks = tuple.ks();
        let r = ks.len() as i64;
        match ks {
            [k] if *k >= 2 && k % 2 == 0 => {
                let k = *k as i64;
                Some(vec![
                    pt(k - 1, k + 1, 2, k + 1),
                    pt(k, k + 2, 2, k + 2),
                    pt(1, 1, 2, k + 1),
                    pt(1, 1, 2, k),
                ])
            }
            [1, 3] => Some(vec![
                pt(1, 5, 4, 5),
                pt(2, 7, 5, 7),
                pt(1, 2, 1, 1),
                pt(1, 3, 1, 1),
            ]),
            [1, l] if *l >= 5 && l % 2 == 1 => {
                let l = *l as i64;
                Some(vec![
                    pt(l - 3, l + 1, l - 1, l + 1),
                    pt(l - 2, l + 2, l, l + 2),
                    pt(l - 1, l + 1, 1, 1),
                    pt(l - 2, l, 1, 1),
                ])
            }
            [3, 1] => Some(vec![
                pt(1, 2, 1, 2),
                pt(4, 7, 3, 7),
                pt(1, 1, 3, 5),
                pt(1, 1, 2, 3),
            ]),
            [k, 1] if *k >= 5 && k % 2 == 1 => {
                let k = *k as i64;
                Some(vec![
                    pt(k - 1, k + 1, 2, k + 1),
                    pt(k, k + 2, 2, k + 2),
                    pt(1, 1, 2, k + 1),
                    pt(1, 1, 2, k),
                ])
            }
            [1, 2, 3] => Some(vec![
                pt(1, 7, 6, 7),
                pt(1, 5, 4, 5),
                pt(2, 7, 1, 1),
                pt(1, 5, 1, 1),
            ]),
            [3, 2, 1] => Some(vec![
                pt(4, 7, 3, 7),
                pt(3, 5, 2, 5),
                pt(1, 1, 4, 7),
                pt(1, 1, 3, 5),
            ]),
            [1, 4, 1] => Some(vec![
                pt(2, 7, 5, 7),
                pt(1, 3, 2, 3),
                pt(4, 7, 1, 1),
                pt(1, 2, 1, 1),
            ]),
            [1, l, 1] if *l >= 6 && l % 2 == 0 => {
                let l = *l as i64;
                Some(vec![
                    pt(l - 3, l + 1, l - 1, l + 1),
                    pt(l - 2, l + 2, l, l + 2),
                    pt(l - 1, l + 1, 1, 1),
                    pt(l - 2, l, 1, 1),
                ])
            }
            [1, 2, 2, 3] => Some(vec![
                pt(1, 9, 8, 9),
                pt(1, 7, 6, 7),
                pt(1, 5, 1, 1),
                pt(1, 7, 1, 1),
            ]),
            [3, 2, 2, 1] => Some(vec![
                pt(3, 5, 2, 5),
                pt(5, 7, 3, 7),
                pt(1, 1, 5, 9),
                pt(1, 1, 4, 7),
            ]),
            [1, 2, 4, 1] => Some(vec![pt(1, 5, 4, 5), pt(1, 3, 1, 1), pt(2, 7, 1, 1)]),
            [1, 4, 2, 1] => Some(vec![pt(1, 3, 2, 3), pt(3, 5, 1, 1), pt(4, 7, 1, 1)]),
            _ if r >= 5 && is_family_123(ks) => Some(vec![
                pt(1, 2 * r + 1, 2 * r, 2 * r + 1),
                pt(1, 2 * r - 1, 2 * r - 2, 2 * r - 1),
                pt(1, 2 * r - 3, 1, 1),
                pt(1, 2 * r - 1, 1, 1),
            ]),
            _ if r >= 5 && is_family_321(ks) => Some(vec![
                pt(2 * r - 5, 2 * r - 3, r - 2, 2 * r - 3),
                pt(2 * r - 3, 2 * r - 1, r - 1, 2 * r - 1),
                pt(1, 1, r + 1, 2 * r + 1),
                pt(1, 1, r, 2 * r - 1),
            ]),
            _ => None,
        }
    }

    /// Published `α` weights in the same vertex order as [`cell_vertices`].
    pub fn vertex_alphas(tuple: &KTuple) -> Option<Vec<Rat>> {
        let ks = tuple.ks();
        let r = ks.len() as i64;
        let q = crate::rat;
        match ks {
            [k] if *k >= 2 && k % 2 == 0 => {
                let k = *k as i64;
                Some(vec![
                    q(2 * k + 1, 2 * k * (k + 1)),
                    q(k + 2, k * (k + 1)),
                    q(2 * k + 1, 2 * k * (k + 1)),
                    q(1, k),
                ])
            }
            [1, 3] => Some(vec![q(9, 20), q(19, 30), q(1, 3), q(7, 12)]),
            [1, l] if *l >= 5 && l % 2 == 1 => {
                let l = *l as i64;
                Some(vec![
                    q(l, (l - 1) * (l + 1)),
                    q(2 * l * l + 5 * l + 1, 2 * (l - 1) * l * (l + 1)),
                    q(1, l),
                    q(2 * l + 1, 2 * l * (l - 1)),
                ])
            }
            [3, 1] => Some(vec![q(1, 3), q(19, 30), q(9, 20), q(7, 12)]),
            // Published row prints the last weight as (2k+1)/(2k(k+1));
            // the checksum Σα = 4/p_r, the mirror-symmetric (1,l) row, and
            // the (3,1) instance (7/12) all require (2k+1)/(2k(k−1)).
            [k, 1] if *k >= 5 && k % 2 == 1 => {
                let k = *k as i64;
                Some(vec![
                    q(1, k),
                    q(2 * k * k + 5 * k + 1, 2 * (k - 1) * k * (k + 1)),
                    q(k, (k - 1) * (k + 1)),
                    q(2 * k + 1, 2 * k * (k - 1)),
                ])
            }
            [1, 2, 3] => Some(vec![q(13, 28), q(13, 21), q(11, 30), q(11, 20)]),
            [3, 2, 1] => Some(vec![q(11, 30), q(13, 21), q(13, 28), q(11, 20)]),
            [1, 4, 1] => Some(vec![q(11, 30), q(3, 5), q(11, 30), q(2, 3)]),
            [1, l, 1] if *l >= 6 && l % 2 == 0 => {
                let l = *l as i64;
                Some(vec![
                    q(2 * l - 1, 2 * (l - 1) * l),
                    q(l + 2, (l - 2) * l),
                    q(2 * l - 1, 2 * (l - 1) * l),
                    q(l, (l - 2) * (l - 1)),
                ])
            }
            [1, 2, 2, 3] => Some(vec![q(17, 36), q(65, 72), q(5, 56), q(15, 28)]),
            [3, 2, 2, 1] => Some(vec![q(5, 56), q(65, 72), q(17, 36), q(15, 28)]),
            [1, 2, 4, 1] => Some(vec![q(7, 24), q(3, 40), q(19, 30)]),
            [1, 4, 2, 1] => Some(vec![q(3, 40), q(7, 24), q(19, 30)]),
            _ if r >= 5 && is_family_123(ks) => Some(vec![
                q(4 * r + 1, 4 * (2 * r + 1)),
                q(14 * r + 9, 8 * (2 * r + 1)),
                q(2 * r - 3, 8 * (2 * r - 1)),
                q(4 * r - 1, 4 * (2 * r - 1)),
            ]),
            _ if r >= 5 && is_family_321(ks) => Some(vec![
                q(2 * r - 3, 8 * (2 * r - 1)),
                q(14 * r + 9, 8 * (2 * r + 1)),
                q(4 * r + 1, 4 * (2 * r + 1)),
                q(4 * r - 1, 4 * (2 * r - 1)),
            ]),
            _ => None,
        }
    }

    /// Every tuple the golden tables cover: fixed rows, parametric rows
    /// with parameter ≤ `max_param`, and the two level-`r` families for
    /// `5 ≤ r ≤ family_r_max`.
    pub fn covered_tuples(max_param: u64, family_r_max: usize) -> Vec<KTuple> {
        let mut out = Vec::new();
        let mut k = 2;
        while k <= max_param {
            out.push(KTuple::new(vec![k]));
            k += 2;
        }
        out.push(KTuple::new(vec![1, 3]));
        out.push(KTuple::new(vec![3, 1]));
        let mut l = 5;
        while l <= max_param {
            out.push(KTuple::new(vec![1, l]));
            out.push(KTuple::new(vec![l, 1]));
            l += 2;
        }
        out.push(KTuple::new(vec![1, 2, 3]));
        out.push(KTuple::new(vec![3, 2, 1]));
        out.push(KTuple::new(vec![1, 4, 1]));
        let mut l = 6;
        while l <= max_param {
            out.push(KTuple::new(vec![1, l, 1]));
            l += 2;
        }
        out.push(KTuple::new(vec![1, 2, 2, 3]));
        out.push(KTuple::new(vec![3, 2, 2, 1]));
        out.push(KTuple::new(vec![1, 2, 4, 1]));
        out.push(KTuple::new(vec![1, 4, 2, 1]));
        for r in 5..=family_r_max {
            let mut a = vec![2u64; r];
            a[0] = 1;
            a[r - 1] = 3;
            let mut b = vec![2u64; r];
            b[0] = 3;
            b[r - 1] = 1;
            out.push(KTuple::new(a));
            out.push(KTuple::new(b));
        }
        out
    }

    /// `(1, 2, …, 2, 3)`.
    pub fn is_family_123(ks: &[u64]) -> bool {
        ks.len() >= 2
            && ks[0] == 1
            && *ks.last().unwrap() == 3
            && ks[1..ks.len() - 1].iter().all(|&k| k == 2)
    }

    /// `(3, 2, …, 2, 1)`.
    pub fn is_family_321(ks: &[u64]) -> bool {
        ks.len() >= 2
            && ks[0] == 3
            && *ks.last().unwrap() == 1
            && ks[1..ks.len() - 1].iter().all(|&k| k == 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn kt(ks: &[u64]) -> KTuple {
        KTuple::new(ks.to_vec())
    }

    #[test]
    fn p_value_special_forms() {
        // p_r(1,2,…,2,3) = 2 for any length.
        for r in 2..12usize {
            let mut ks = vec![1u64];
            ks.extend(std::iter::repeat(2).take(r - 2));
            ks.push(3);
            assert_eq!(p_value(&ks), 2);
        }
        // p_r(2,…,2,3) = 2r + 1.
        for r in 2..12usize {
            let mut ks = vec![2u64; r - 1];
            ks.push(3);
            assert_eq!(p_value(&ks), 2 * r as i64 + 1);
        }
        // p_r(1,2,…,2) = 1.
        for r in 1..12usize {
            let mut ks = vec![1u64];
            ks.extend(std::iter::repeat(2).take(r - 1));
            assert_eq!(p_value(&ks), 1);
        }
        assert_eq!(p_value(&[1, 4, 1]), 2);
        assert_eq!(p_value(&[1, 2, 4, 1]), 2);
    }

    #[test]
    fn p_value_symmetry() {
        for ks in [
            vec![3u64, 2, 2, 1],
            vec![5, 1, 4],
            vec![2, 3, 4, 5],
            vec![7, 2, 2, 2, 3],
        ] {
            let rev: Vec<u64> = ks.iter().rev().cloned().collect();
            assert_eq!(p_value(&ks), p_value(&rev));
        }
    }

    #[test]
    fn t_map_cases() {
        let p = RatPoint::new(rat(1, 2), rat(2, 3));
        let img = t_map(&p).unwrap();
        // k = ⌊(3/2)/(2/3)⌋ = 2, image (2/3, 4/3 − 1/2).
        assert_eq!(img, RatPoint::new(rat(2, 3), rat(5, 6)));
        assert_eq!(t_inv(&img).unwrap(), p);
        let one = RatPoint::from_ints(1, 1, 1, 1);
        assert_eq!(t_map(&one).unwrap(), one);
        assert_eq!(
            t_map(&RatPoint::from_ints(1, 4, 1, 4)),
            Err(TessError::OutsideDomain)
        );
    }

    #[test]
    fn t_map_round_trip_random_points() {
        // t_inv inverts t_map across the triangle interior.
        for xn in 1..10i64 {
            for yn in 1..=10i64 {
                let p = RatPoint::new(rat(xn, 10), rat(yn, 10));
                if !in_farey_triangle(&p) || (rat(xn, 10) + rat(yn, 10)) == rat(1, 1) {
                    continue;
                }
                let img = t_map(&p).unwrap();
                if in_farey_triangle(&img) {
                    assert_eq!(t_inv(&img).unwrap(), p, "at {p}");
                }
            }
        }
    }

    #[test]
    fn base_cell_vertices() {
        let t1 = base_cell(1).unwrap();
        let want = [
            RatPoint::from_ints(0, 1, 1, 1),
            RatPoint::from_ints(1, 3, 2, 3),
            RatPoint::from_ints(1, 1, 1, 1),
        ];
        assert_eq!(t1.vertices().len(), 3);
        for p in &want {
            assert!(t1.vertices().contains(p), "missing {p}");
        }
        let t2 = base_cell(2).unwrap();
        let want = [
            RatPoint::from_ints(1, 3, 2, 3),
            RatPoint::from_ints(1, 2, 1, 2),
            RatPoint::from_ints(1, 1, 2, 3),
            RatPoint::from_ints(1, 1, 1, 1),
        ];
        assert_eq!(t2.vertices().len(), 4);
        for p in &want {
            assert!(t2.vertices().contains(p), "missing {p}");
        }
    }

    #[test]
    fn base_cells_partition_triangle_exactly() {
        // Σ_{k≤K} Area(T_k) + Area(T ∩ {(K+1)y ≤ 1+x}) = 1/2, exactly:
        // the residual half-plane is precisely the union of the T_k, k > K.
        let k_max = 60u64;
        let mut sum = Rat::zero();
        for k in 1..=k_max {
            sum += base_cell(k).unwrap().area();
        }
        let residual = farey_triangle().clip(&HalfPlane::new(
            Rat::one(),
            rat(-(k_max as i64 + 1), 1),
            Rat::one(),
            false,
        ));
        assert_eq!(sum + residual.area(), rat(1, 2));
    }

    #[test]
    fn cell_matches_table_rows_spot_checks() {
        for ks in [
            vec![1u64, 3],
            vec![3, 1],
            vec![1, 7],
            vec![9, 1],
            vec![1, 2, 3],
            vec![3, 2, 1],
            vec![1, 4, 1],
            vec![1, 6, 1],
            vec![1, 2, 2, 3],
            vec![3, 2, 2, 1],
            vec![1, 2, 4, 1],
            vec![1, 4, 2, 1],
            vec![1, 2, 2, 2, 3],
            vec![3, 2, 2, 2, 2, 1],
        ] {
            let t = kt(&ks);
            let got = cell(&t);
            let want = tables::cell_vertices(&t).expect("row exists");
            assert_eq!(got.vertices().len(), want.len(), "tuple {t}");
            for p in &want {
                assert!(got.vertices().contains(p), "tuple {t} missing {p}");
            }
        }
    }

    #[test]
    fn table1_open_question_rows_coincide() {
        // The (1,l) level-2 row and the (1,l,1) level-3 row list the same
        // polygon; geometrically the trailing 1 adds no constraint. The two
        // rows differ in parameter parity, so both are definitive.
        for l in [6u64, 8, 10, 20] {
            assert_eq!(cell(&kt(&[1, l, 1])), cell(&kt(&[1, l])));
        }
    }

    #[test]
    fn enumerate_level_2_matches_table() {
        let cells = admissible_cells(2, None, 41);
        let tuples: Vec<&[u64]> = cells.iter().map(|c| c.tuple.ks()).collect();
        let mut want: Vec<Vec<u64>> = vec![vec![1, 3], vec![3, 1]];
        for l in (5..=41u64).step_by(2) {
            want.push(vec![1, l]);
            want.push(vec![l, 1]);
        }
        want.sort();
        assert_eq!(tuples, want.iter().map(|v| &v[..]).collect::<Vec<_>>());
    }

    #[test]
    fn enumerate_level_4_and_7() {
        let cells = admissible_cells(4, None, 41);
        let tuples: Vec<&[u64]> = cells.iter().map(|c| c.tuple.ks()).collect();
        assert_eq!(
            tuples,
            vec![
                &[1u64, 2, 2, 3][..],
                &[1, 2, 4, 1],
                &[1, 4, 2, 1],
                &[3, 2, 2, 1]
            ]
        );
        let cells = admissible_cells(7, None, 41);
        let tuples: Vec<&[u64]> = cells.iter().map(|c| c.tuple.ks()).collect();
        assert_eq!(
            tuples,
            vec![&[1u64, 2, 2, 2, 2, 2, 3][..], &[3, 2, 2, 2, 2, 2, 1]]
        );
    }

    #[test]
    fn enumerate_agrees_with_suffix_recursion() {
        // Two independent cell constructions: forward branch composition in
        // the enumerator, suffix recursion in `cell`.
        for r in 1..=5usize {
            for c in enumerate_cells(r, None, 15, false) {
                assert_eq!(c.polygon, cell(&c.tuple), "tuple {}", c.tuple);
            }
        }
    }

    #[test]
    fn last_coeffs_closed_forms() {
        // (1,2,…,2,3): (2, 2r−1); (3,2,…,2,1): (2, 1); (k): (k, 1).
        for r in 2..10usize {
            let mut ks = vec![1u64];
            ks.extend(std::iter::repeat(2).take(r - 2));
            ks.push(3);
            assert_eq!(last_coeffs(&kt(&ks)), (2, 2 * r as i64 - 1));
            let rev: Vec<u64> = ks.iter().rev().cloned().collect();
            assert_eq!(last_coeffs(&kt(&rev)), (2, 1));
        }
        assert_eq!(last_coeffs(&kt(&[6])), (6, 1));
    }

    #[test]
    fn probe_center_cases() {
        let c = probe_center(&kt(&[2]), &RatPoint::from_ints(7, 10, 9, 10));
        assert_eq!(c, RatPoint::from_ints(7, 10, 4, 5));
        let c = probe_center(&kt(&[1, 3]), &RatPoint::from_ints(1, 2, 1, 2));
        // (3·(1/2) + 1/2) / 2 = 1.
        assert_eq!(c, RatPoint::from_ints(1, 2, 1, 1));
    }

    #[test]
    fn alphas_match_table_spot_checks() {
        for ks in [
            vec![2u64],
            vec![4],
            vec![1, 3],
            vec![3, 1],
            vec![1, 9],
            vec![7, 1],
            vec![1, 2, 3],
            vec![1, 4, 1],
            vec![1, 6, 1],
            vec![1, 2, 2, 3],
            vec![3, 2, 2, 1],
            vec![1, 2, 4, 1],
            vec![1, 4, 2, 1],
            vec![1, 2, 2, 2, 2, 3],
            vec![3, 2, 2, 2, 2, 1],
        ] {
            let t = kt(&ks);
            let c = Cell {
                tuple: t.clone(),
                polygon: cell(&t),
            };
            let verts = tables::cell_vertices(&t).unwrap();
            let alphas = tables::vertex_alphas(&t).unwrap();
            for (want_v, want_a) in verts.iter().zip(&alphas) {
                let idx = c
                    .polygon
                    .vertices()
                    .iter()
                    .position(|p| p == want_v)
                    .unwrap_or_else(|| panic!("tuple {t}: vertex {want_v} not found"));
                let got = vertex_alpha(&c, idx).unwrap();
                assert_eq!(&got.alpha, want_a, "tuple {t} vertex {want_v}");
            }
        }
    }

    #[test]
    fn checksum_identity() {
        for ks in [
            vec![2u64],
            vec![8],
            vec![1, 3],
            vec![1, 11],
            vec![7, 1],
            vec![3, 2, 1],
            vec![1, 8, 1],
            vec![1, 2, 2, 3],
            vec![1, 2, 4, 1],
            vec![1, 2, 2, 2, 2, 2, 3],
        ] {
            let t = kt(&ks);
            let poly = cell(&t);
            let n = poly.vertices().len();
            let c = Cell {
                tuple: t.clone(),
                polygon: poly,
            };
            let expect = match n {
                3 => rat(2, p_value(&ks)),
                4 => rat(4, p_value(&ks)),
                _ => panic!("unexpected vertex count"),
            };
            assert_eq!(checksum(&c).unwrap(), expect, "tuple {t}");
        }
    }

    #[test]
    fn u_region_examples() {
        let u2 = u_region(&kt(&[2])).unwrap();
        for p in [
            RatPoint::from_ints(1, 3, 1, 1),
            RatPoint::from_ints(1, 2, 1, 2),
            RatPoint::from_ints(1, 1, 1, 3),
            RatPoint::from_ints(1, 1, 1, 1),
        ] {
            assert!(u2.vertices().contains(&p), "missing {p}");
        }
        let u13 = u_region(&kt(&[1, 3])).unwrap();
        for p in [
            RatPoint::from_ints(1, 5, 1, 1),
            RatPoint::from_ints(2, 7, 4, 7),
            RatPoint::from_ints(1, 2, 1, 2),
            RatPoint::from_ints(1, 3, 1, 1),
        ] {
            assert!(u13.vertices().contains(&p), "missing {p}");
        }
        let u1223 = u_region(&kt(&[1, 2, 2, 3])).unwrap();
        for p in [
            RatPoint::from_ints(1, 9, 1, 1),
            RatPoint::from_ints(1, 7, 5, 7),
            RatPoint::from_ints(1, 5, 3, 5),
            RatPoint::from_ints(1, 7, 1, 1),
        ] {
            assert!(u1223.vertices().contains(&p), "missing {p}");
        }
    }

    #[test]
    fn dynamical_consistency_small_orders() {
        // Every consecutive triple of F_Q lands, after normalization, in the
        // half-open base cell of its index — boundary ownership included.
        use crate::farey::{enumerate_opts, index_of, Interval, SubsetSelector};
        let mut cache: HashMap<u64, ConvexPolygon> = HashMap::new();
        let bc = |k: u64, cache: &mut HashMap<u64, ConvexPolygon>| -> ConvexPolygon {
            cache
                .entry(k)
                .or_insert_with(|| base_cell(k).unwrap())
                .clone()
        };
        for q in 2..=60u64 {
            let all = enumerate_opts(q, SubsetSelector::All, &Interval::unit(), true);
            for w in all.windows(2) {
                let (f, g) = (w[0], w[1]);
                if f.num() == 0 {
                    continue;
                }
                let k = index_of(q, f.den(), g.den()).unwrap();
                let p = RatPoint::new(
                    rat(f.den() as i64, q as i64),
                    rat(g.den() as i64, q as i64),
                );
                assert!(
                    bc(k, &mut cache).contains_half_open(&p),
                    "Q={q} pair ({},{}) k={k}",
                    f.den(),
                    g.den()
                );
                // Exclusive ownership: the adjacent cells, which share the
                // candidate boundary edges, must reject the point.
                if k > 1 {
                    assert!(!bc(k - 1, &mut cache).contains_half_open(&p));
                }
                assert!(!bc(k + 1, &mut cache).contains_half_open(&p));
            }
        }
    }

    #[test]
    fn level_cells_partition_triangle() {
        // Truncating entries at 200 leaves an exact tail of
        // 2/(201·202) ≈ 4.93e−5 per position (Area(T_k) = 4/(k(k+1)(k+2))),
        // so the truncated sums must sit just below 1/2 — close enough that
        // a missing or double-counted cell (area ≥ area(T_{200,…}) of any
        // enumerated tuple) would be caught.
        for r in 1..=5usize {
            let cells = enumerate_cells(r, None, 200, false);
            let sum: f64 = cells
                .iter()
                .map(|c| c.polygon.area().to_f64().unwrap())
                .sum();
            assert!(
                sum <= 0.5 && sum > 0.5 - 6e-5 * r as f64,
                "level {r}: sum {sum}"
            );
        }
        // Pointwise disjointness and covering, exactly: each sample point's
        // index itinerary names one tuple, and half-open membership holds
        // for that cell and no other.
        let cells = enumerate_cells(4, None, 200, false);
        for i in 1..37i64 {
            for j in 1..=41i64 {
                let p = RatPoint::new(rat(i, 37), rat(j, 41));
                if rat(i, 37) + rat(j, 41) <= rat(1, 1) {
                    continue;
                }
                let mut ks = Vec::new();
                let mut cur = p.clone();
                for _ in 0..4 {
                    ks.push(cell_index(&cur).unwrap());
                    cur = t_map(&cur).unwrap();
                }
                if ks.iter().any(|&k| k > 200) {
                    continue;
                }
                for c in &cells {
                    assert_eq!(
                        c.tuple.ks() == &ks[..],
                        c.polygon.contains_half_open(&p),
                        "point {p} itinerary {ks:?} vs cell {}",
                        c.tuple
                    );
                }
            }
        }
    }

    #[test]
    fn admissibility_patterns() {
        assert!(kt(&[2]).is_admissible());
        assert!(kt(&[6]).is_admissible());
        assert!(!kt(&[3]).is_admissible());
        assert!(kt(&[1, 3]).is_admissible());
        assert!(kt(&[1, 2, 2, 3]).is_admissible());
        assert!(!kt(&[1, 2, 3, 3]).is_admissible());
        assert!(!kt(&[2, 2, 2]).is_admissible());
    }

    #[test]
    fn window_restriction() {
        // Strip at x = 0.7: level-1 admissible cells meeting it are T_2, T_4
        // ((k−1)/(k+1) ≤ 0.7 ⇔ k ≤ 17/3).
        let lo = rat(7, 10);
        let hi = rat(7, 10);
        let cells = admissible_cells(1, Some((&lo, &hi)), 100);
        let tuples: Vec<&[u64]> = cells.iter().map(|c| c.tuple.ks()).collect();
        assert_eq!(tuples, vec![&[2u64][..], &[4]]);
    }
}
