//! The limiting local density `g(u, v)` of normalized consecutive
//! even-denominator pairs, by two independent routes.
//!
//! Route one ([`g_closed`]) evaluates the closed form: three series whose
//! terms are gated by characteristic functions of (in)equality systems in
//! `z = u or v`, `z̄ = the other` — an OR-gate `φ` and an AND-gate `φ̃`.
//! Generic points collect a partial harmonic sum; points on the region
//! boundaries collect extra edge and vertex terms; `(1,1)` diverges to +∞.
//!
//! Route two ([`g_sum`]) is geometric: for each level `r`, every admissible
//! cell is probed at `(u, (p_{r−1}u + v)/p_r)` and contributes `2/p_r`
//! (interior), `1/p_r` (edge), or `α/2` (vertex); `g = Σ_r g_r`. The two
//! routes must agree exactly — the crate's central cross-oracle.
//!
//! Terms are also bucketed into the grouping used by the intermediate
//! propositions (`h₁ᵘ`, `h₂ᵘ`, `h₃ᵘ`, their sum `hᵘ`, the deep tail `gᵘ`,
//! and the complementary low-order block `gᵈᵘ`), with independent closed
//! forms [`hu_closed`] and [`gdu_closed`] so the grouping itself is
//! testable: `g = hᵘ + gᵈᵘ`.

use crate::geometry::{ConvexPolygon, PointLocation, RatPoint};
use crate::tess::{self, KTuple};
use crate::Rat;
use num::{One, Signed, ToPrimitive, Zero};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DensityError {
    #[error("point outside the unit square")]
    OutOfDomain,
    #[error("requested level cap {given} is below the required truncation bound {required}")]
    TruncationUnsound { required: usize, given: usize },
    #[error("puzzle index must be odd and at least 3")]
    InvalidParity,
}

/// An exact density value; `+∞` occurs only at `(1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityValue {
    Finite(Rat),
    Infinite,
}

impl DensityValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, DensityValue::Infinite)
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            DensityValue::Finite(r) => Some(r),
            DensityValue::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DensityValue::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            DensityValue::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for DensityValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityValue::Finite(r) => write!(f, "{r}"),
            DensityValue::Infinite => write!(f, "inf"),
        }
    }
}

/// One geometric contribution: a tuple whose probe center landed in the
/// closure of its cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityTerm {
    pub tuple: KTuple,
    pub location: PointLocation,
    pub contribution: Rat,
}

/// Totals of the proposition-level groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupValues {
    /// Level-1 tuples `(k)`, `k ≥ 4` even.
    pub h1u: Rat,
    /// Level-2 tuples `(1,l)` and `(k,1)`, `k,l ≥ 5` odd.
    pub h2u: Rat,
    /// Level-3 tuples `(1,l,1)`, `l ≥ 6` even.
    pub h3u: Rat,
    /// `h1u + h2u + h3u`.
    pub hu: Rat,
    /// Levels ≥ 5 (the two symmetric families).
    pub gu: Rat,
    /// Everything else: `(2)`, `(1,3)`, `(3,1)`, `(1,2,3)`, `(3,2,1)`,
    /// `(1,4,1)`, all of level 4, plus `gu`.
    pub gdu: Rat,
}

/// Exact termwise account of the geometric route at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityBreakdown {
    pub terms: Vec<DensityTerm>,
    pub groups: GroupValues,
    pub total: Rat,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TermGroup {
    H1u,
    H2u,
    H3u,
    LowOrder, // the h^d parts and level 4
    Tail,     // levels ≥ 5
}

fn classify(tuple: &KTuple) -> TermGroup {
    let ks = tuple.ks();
    match ks.len() {
        1 => {
            if ks[0] >= 4 {
                TermGroup::H1u
            } else {
                TermGroup::LowOrder
            }
        }
        2 => {
            if ks == [1, 3] || ks == [3, 1] {
                TermGroup::LowOrder
            } else {
                TermGroup::H2u
            }
        }
        3 => {
            if ks[0] == 1 && ks[2] == 1 && ks[1] >= 6 {
                TermGroup::H3u
            } else {
                TermGroup::LowOrder
            }
        }
        4 => TermGroup::LowOrder,
        _ => TermGroup::Tail,
    }
}

impl DensityBreakdown {
    fn from_terms(terms: Vec<DensityTerm>) -> Self {
        let mut h1u = Rat::zero();
        let mut h2u = Rat::zero();
        let mut h3u = Rat::zero();
        let mut low = Rat::zero();
        let mut gu = Rat::zero();
        for t in &terms {
            match classify(&t.tuple) {
                TermGroup::H1u => h1u += &t.contribution,
                TermGroup::H2u => h2u += &t.contribution,
                TermGroup::H3u => h3u += &t.contribution,
                TermGroup::LowOrder => low += &t.contribution,
                TermGroup::Tail => gu += &t.contribution,
            }
        }
        let hu = &h1u + &h2u + &h3u;
        let gdu = &low + &gu;
        let total = &hu + &gdu;
        DensityBreakdown {
            terms,
            groups: GroupValues {
                h1u,
                h2u,
                h3u,
                hu,
                gu,
                gdu,
            },
            total,
        }
    }
}

/// The support of `g`: the quadrilateral `(0,1), (1/3,1/3), (1,0), (1,1)`,
/// i.e. `{x ≤ 1, y ≤ 1, 2x + y ≥ 1, x + 2y ≥ 1}`.
pub fn support_region() -> ConvexPolygon {
    ConvexPolygon::new(vec![
        RatPoint::from_ints(0, 1, 1, 1),
        RatPoint::from_ints(1, 3, 1, 3),
        RatPoint::from_ints(1, 1, 0, 1),
        RatPoint::from_ints(1, 1, 1, 1),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportLocation {
    Interior,
    Boundary,
    Outside,
}

/// Classify a point against the support quadrilateral.
pub fn support_contains(u: &Rat, v: &Rat) -> SupportLocation {
    let p = RatPoint::new(u.clone(), v.clone());
    match support_region()
        .locate(&p)
        .expect("support region is non-degenerate")
    {
        PointLocation::Interior => SupportLocation::Interior,
        PointLocation::OnEdge(_) | PointLocation::AtVertex(_) => SupportLocation::Boundary,
        PointLocation::Outside => SupportLocation::Outside,
    }
}

fn in_unit_square(u: &Rat, v: &Rat) -> bool {
    let one = Rat::one();
    !u.is_negative() && !v.is_negative() && *u <= one && *v <= one
}

fn harmonic_store() -> &'static Mutex<Vec<Rat>> {
    static STORE: std::sync::OnceLock<Mutex<Vec<Rat>>> = std::sync::OnceLock::new();
    STORE.get_or_init(|| Mutex::new(vec![Rat::zero()]))
}

/// `H_n = 1 + 1/2 + … + 1/n` (`H_0 = 0`), memoized.
pub fn harmonic(n: u64) -> Rat {
    let mut store = harmonic_store().lock().unwrap();
    while (store.len() as u64) <= n {
        let next = store.last().unwrap() + crate::rat(1, store.len() as i64);
        store.push(next);
    }
    store[n as usize].clone()
}

fn harmonic_f64_store() -> &'static Mutex<Vec<f64>> {
    static STORE: std::sync::OnceLock<Mutex<Vec<f64>>> = std::sync::OnceLock::new();
    STORE.get_or_init(|| Mutex::new(vec![0.0]))
}

fn harmonic_f64(n: u64) -> f64 {
    let mut store = harmonic_f64_store().lock().unwrap();
    while (store.len() as u64) <= n {
        let next = store.last().unwrap() + 1.0 / store.len() as f64;
        store.push(next);
    }
    store[n as usize]
}

/// Largest integer `j ≥ 0` with `j < bound`.
fn count_below(bound: &Rat) -> u64 {
    if !bound.is_positive() {
        return 0;
    }
    let c = bound.ceil().to_integer();
    let c = if &Rat::from(c.clone()) == bound {
        c
    } else {
        // bound non-integer: ceil − 1 = floor
        c - 1i64
    };
    // For integer bound, strictness drops it by one more below.
    let j = if &Rat::from(bound.floor().to_integer()) == bound {
        bound.to_integer() - 1i64
    } else {
        c
    };
    j.to_u64().unwrap_or(0)
}

/// `q` as a positive integer, if it is one.
fn as_positive_integer(q: &Rat) -> Option<i64> {
    if q.is_integer() && q.is_positive() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

/// Decomposition of the closed form: two harmonic blocks plus exact
/// boundary terms. `total = H(h1) + H(h2)/2 + extra`; a point lies in the
/// interior of a constant-density region iff `h2 = 0` and `extra = 0`.
struct ClosedParts {
    h1: u64,
    h2: u64,
    extra: Rat,
    infinite: bool,
}

impl ClosedParts {
    fn boundary(&self) -> bool {
        self.h2 > 0 || !self.extra.is_zero()
    }

    fn total(&self) -> DensityValue {
        if self.infinite {
            DensityValue::Infinite
        } else {
            DensityValue::Finite(
                harmonic(self.h1) + harmonic(self.h2) / crate::rat(2, 1) + self.extra.clone(),
            )
        }
    }

    fn total_f64(&self) -> f64 {
        if self.infinite {
            f64::INFINITY
        } else {
            harmonic_f64(self.h1)
                + harmonic_f64(self.h2) / 2.0
                + self.extra.to_f64().unwrap_or(0.0)
        }
    }
}

/// Evaluate the three series of the closed form. The φ-gated (OR) systems
/// are tried under both variable assignments `(z,z̄) = (u,v)` and `(v,u)`,
/// counting once per condition system; the φ̃-gated (AND) ones require both.
fn closed_parts(u: &Rat, v: &Rat) -> ClosedParts {
    let one = Rat::one();
    if u == &one && v == &one {
        // Third series: Σ 1/(4j) over all j — divergent.
        return ClosedParts {
            h1: 0,
            h2: 0,
            extra: Rat::zero(),
            infinite: true,
        };
    }
    let mut extra = Rat::zero();

    // Series 1 (AND): 1/j for j < (z+z̄)/(1−z) under both assignments,
    // i.e. j < (u+v)/(1−min(u,v)); requires u, v < 1.
    let h1 = if u < &one && v < &one {
        let m = if u <= v { u } else { v };
        count_below(&((u + v) / (&one - m)))
    } else {
        0
    };

    // Series 2, edge equalities (OR): (j+1)z + z̄ = j with
    // (j−1)/(j+1) < z < j/(j+2); solve j = (z+z̄)/(1−z) per assignment.
    let mut seen: Vec<i64> = Vec::new();
    for (z, zb) in [(u, v), (v, u)] {
        if z >= &one {
            continue;
        }
        if let Some(j) = as_positive_integer(&((z + zb) / (&one - z))) {
            let lo = crate::rat(j - 1, j + 1);
            let hi = crate::rat(j, j + 2);
            if &lo < z && z < &hi && !seen.contains(&j) {
                seen.push(j);
                extra += crate::rat(1, 2 * j);
            }
        }
    }

    // Series 2, the z = 1 edge (OR): 1/(2j) for (j−1)/(j+1) < z̄ < 1,
    // i.e. j < (1+z̄)/(1−z̄) — a second harmonic block.
    let h2 = if (u == &one) != (v == &one) {
        let w = if u == &one { v } else { u };
        count_below(&((&one + w) / (&one - w)))
    } else {
        0
    };

    // Series 3, vertex terms.
    // (OR) z = (j−1)/(j+1), z̄ = 1 → (2j+1)/(8j(j+1)).
    let mut seen: Vec<i64> = Vec::new();
    for (z, zb) in [(u, v), (v, u)] {
        if zb != &one || z >= &one {
            continue;
        }
        if let Some(j) = as_positive_integer(&((&one + z) / (&one - z))) {
            if !seen.contains(&j) {
                seen.push(j);
                extra += crate::rat(2 * j + 1, 8 * j * (j + 1));
            }
        }
    }
    // (AND) z = j/(j+2), i.e. u = v = j/(j+2) → (j+2)/(4j(j+1)).
    if u == v && u < &one {
        if let Some(j) = as_positive_integer(&(crate::rat(2, 1) * u / (&one - u))) {
            extra += crate::rat(j + 2, 4 * j * (j + 1));
        }
    }

    ClosedParts {
        h1,
        h2,
        extra,
        infinite: false,
    }
}

/// Closed-form value as a float (`+∞` at `(1,1)`), for grid emission where
/// exactness is not needed and the harmonic blocks would be large.
pub fn g_closed_f64(u: &Rat, v: &Rat) -> Result<f64, DensityError> {
    if !in_unit_square(u, v) {
        return Err(DensityError::OutOfDomain);
    }
    Ok(closed_parts(u, v).total_f64())
}

/// The closed-form route: exact `g(u, v)`, `+∞` only at `(1, 1)`.
pub fn g_closed(u: &Rat, v: &Rat) -> Result<DensityValue, DensityError> {
    if !in_unit_square(u, v) {
        return Err(DensityError::OutOfDomain);
    }
    Ok(closed_parts(u, v).total())
}

/// Per-point entry cap for the geometric route: a cell whose closure meets
/// the strip `x = u` has first entry `k₁ ≤ (1+u)/(1−u)` (the `x`-range of
/// `T_{k₁}` starts at `(k₁−1)/(k₁+1)`), and the two-sided families reach
/// the probe anchor only while `k ≤ (3+z)/(1−z)` for an endpoint value `z`;
/// the larger bound plus margin covers both, symmetrically in `u, v`.
fn entry_bound(u: &Rat, v: &Rat) -> u64 {
    let one = Rat::one();
    let mut e: u64 = 8;
    for z in [u, v] {
        if z < &one {
            let b = (crate::rat(3, 1) + z) / (&one - z);
            let b = b.ceil().to_integer().to_u64().unwrap_or(0) + 4;
            e = e.max(b);
        }
    }
    e
}

/// Truncation level for `g_sum`: `R = ⌈max(3, 1/(2·min(u,v)) + 3)⌉`.
/// Level-`r` cells live at `x ≤ 1/(2r−3)` or symmetrically small `y`, so
/// deeper levels cannot reach the probe anchor. When `min(u,v) = 0` the
/// only support points are the deferred corners, so a token bound suffices.
fn level_bound(u: &Rat, v: &Rat) -> usize {
    let m = if u <= v { u } else { v };
    if !m.is_positive() {
        return 5;
    }
    let b = Rat::one() / (crate::rat(2, 1) * m) + crate::rat(3, 1);
    let b = b.ceil().to_integer().to_u64().unwrap_or(3).max(3);
    b as usize
}

fn terms_for_cells(cells: &[tess::Cell], u: &Rat, v: &Rat) -> Vec<DensityTerm> {
    let anchor = RatPoint::new(u.clone(), v.clone());
    let mut terms = Vec::new();
    for c in cells {
        let center = tess::probe_center(&c.tuple, &anchor);
        let loc = c
            .polygon
            .locate(&center)
            .expect("enumerated cells are non-degenerate");
        let p = tess::p_value(c.tuple.ks());
        let contribution = match loc {
            PointLocation::Outside => continue,
            PointLocation::Interior => crate::rat(2, p),
            PointLocation::OnEdge(_) => crate::rat(1, p),
            PointLocation::AtVertex(i) => {
                let alpha = tess::vertex_alpha(c, i)
                    .expect("vertex weight on non-degenerate cell")
                    .alpha;
                alpha / crate::rat(2, 1)
            }
        };
        terms.push(DensityTerm {
            tuple: c.tuple.clone(),
            location: loc,
            contribution,
        });
    }
    terms
}

/// The level-`r` slice of the geometric route: every admissible level-`r`
/// cell meeting the strip `x = u`, probed and classified. `(1,1)` is
/// rejected: its level sums are series tails with no finite per-level value
/// under any entry cap.
pub fn g_level(r: usize, u: &Rat, v: &Rat) -> Result<DensityBreakdown, DensityError> {
    if !in_unit_square(u, v) || (u.is_one() && v.is_one()) {
        return Err(DensityError::OutOfDomain);
    }
    let cells = tess::admissible_cells(r, Some((u, u)), entry_bound(u, v));
    Ok(DensityBreakdown::from_terms(terms_for_cells(&cells, u, v)))
}

/// The geometric route with its termwise account: `Σ_{r≤R} g_r` where `R`
/// is the truncation bound (or a caller-supplied cap at least that large).
/// The corners defer to the closed form: `(1,1)` is `+∞`, while at `(0,1)`
/// and `(1,0)` the probe covers infinitely many family cells completely and
/// the level enumeration does not terminate.
pub fn g_sum_breakdown(
    u: &Rat,
    v: &Rat,
    r_max: Option<usize>,
) -> Result<(DensityValue, DensityBreakdown), DensityError> {
    if !in_unit_square(u, v) {
        return Err(DensityError::OutOfDomain);
    }
    let one = Rat::one();
    if u == &one && v == &one {
        return Ok((
            DensityValue::Infinite,
            DensityBreakdown::from_terms(Vec::new()),
        ));
    }
    if (u.is_zero() && v == &one) || (u == &one && v.is_zero()) {
        let val = g_closed(u, v)?;
        return Ok((val, DensityBreakdown::from_terms(Vec::new())));
    }
    let required = level_bound(u, v);
    let r = match r_max {
        Some(given) if given < required => {
            return Err(DensityError::TruncationUnsound { required, given })
        }
        Some(given) => given,
        None => required,
    };
    let cells = tess::admissible_cells_upto(r, Some((u, u)), entry_bound(u, v));
    let breakdown = DensityBreakdown::from_terms(terms_for_cells(&cells, u, v));
    let total = breakdown.total.clone();
    Ok((DensityValue::Finite(total), breakdown))
}

/// See [`g_sum_breakdown`]; value only.
pub fn g_sum(u: &Rat, v: &Rat, r_max: Option<usize>) -> Result<DensityValue, DensityError> {
    g_sum_breakdown(u, v, r_max).map(|(val, _)| val)
}

/// Closed form of the high-order groups `hᵘ = h₁ᵘ + h₂ᵘ + h₃ᵘ` (odd
/// parameter `i ≥ 5`); diverges only at `(1,1)`.
pub fn hu_closed(u: &Rat, v: &Rat) -> Result<DensityValue, DensityError> {
    if !in_unit_square(u, v) {
        return Err(DensityError::OutOfDomain);
    }
    let one = Rat::one();
    if u == &one && v == &one {
        return Ok(DensityValue::Infinite);
    }
    let two = crate::rat(2, 1);
    let mut total = Rat::zero();

    // Interior terms (AND): 2/(i−1) for odd i with i < (z+2z̄+1)/(1−z)
    // under both assignments.
    if u < &one && v < &one {
        let b1 = (u + &two * v + &one) / (&one - u);
        let b2 = (v + &two * u + &one) / (&one - v);
        let bound = count_below(if b1 <= b2 { &b1 } else { &b2 });
        let mut i = 5i64;
        while (i as u64) <= bound {
            total += crate::rat(2, i - 1);
            i += 2;
        }
    }

    // Edge equalities (OR): (i+1)z + 2z̄ = i−1 on (i−3)/(i+1) < z < (i−1)/(i+3).
    let mut seen: Vec<i64> = Vec::new();
    for (z, zb) in [(u, v), (v, u)] {
        if z >= &one {
            continue;
        }
        if let Some(i) = as_positive_integer(&((z + &two * zb + &one) / (&one - z))) {
            if i >= 5 && i % 2 == 1 {
                let lo = crate::rat(i - 3, i + 1);
                let hi = crate::rat(i - 1, i + 3);
                if &lo < z && z < &hi && !seen.contains(&i) {
                    seen.push(i);
                    total += crate::rat(1, i - 1);
                }
            }
        }
    }

    // The z = 1 edge (OR): 1/(i−1) for odd i ≥ 5 with (i−3)/(i+1) < z̄ < 1,
    // i.e. i < (3+z̄)/(1−z̄).
    if (u == &one) != (v == &one) {
        let w = if u == &one { v } else { u };
        let bound = count_below(&((crate::rat(3, 1) + w) / (&one - w)));
        let mut i = 5i64;
        while (i as u64) <= bound {
            total += crate::rat(1, i - 1);
            i += 2;
        }
    }

    // Vertex terms.
    // (OR) z = (i−3)/(i+1), z̄ = 1 → i/(2(i−1)(i+1)).
    let mut seen: Vec<i64> = Vec::new();
    for (z, zb) in [(u, v), (v, u)] {
        if zb != &one || z >= &one {
            continue;
        }
        if let Some(i) = as_positive_integer(&((crate::rat(3, 1) + z) / (&one - z))) {
            if i >= 5 && i % 2 == 1 && !seen.contains(&i) {
                seen.push(i);
                total += crate::rat(i, 2 * (i - 1) * (i + 1));
            }
        }
    }
    // (AND) z = (i−1)/(i+3), i.e. u = v → (i+3)/(2(i−1)(i+1)).
    if u == v && u < &one {
        if let Some(i) = as_positive_integer(&((crate::rat(3, 1) * u + &one) / (&one - u))) {
            if i >= 5 && i % 2 == 1 {
                total += crate::rat(i + 3, 2 * (i - 1) * (i + 1));
            }
        }
    }
    Ok(DensityValue::Finite(total))
}

/// Closed form of the low-order block `gᵈᵘ = hᵈ + g₄ + gᵘ` — the big-puzzle
/// mosaic where every kernel is 1. Always finite; `g = hᵘ + gᵈᵘ`.
pub fn gdu_closed(u: &Rat, v: &Rat) -> Result<Rat, DensityError> {
    if !in_unit_square(u, v) {
        return Err(DensityError::OutOfDomain);
    }
    let one = Rat::one();
    let two = crate::rat(2, 1);
    let third = crate::rat(1, 3);
    let mut total = Rat::zero();

    // Interior (AND): 1 on {z < 1, 1 < 2z + z̄} both ways.
    if u < &one && v < &one && &two * u + v > one && &two * v + u > one {
        total += &one;
    }
    // Support edge (OR): 1/2 on 2z + z̄ = 1, 0 < z < 1/3.
    if ((&two * u + v) == one && u.is_positive() && u < &third)
        || ((&two * v + u) == one && v.is_positive() && v < &third)
    {
        total += crate::rat(1, 2);
    }
    // The z = 1 edge (OR): 1/2 for 0 < z̄ < 1. (The printed range repeats
    // `z`; the sibling structure and the edge geometry fix it as `z̄`.)
    if (u == &one && v.is_positive() && v < &one) || (v == &one && u.is_positive() && u < &one) {
        total += crate::rat(1, 2);
    }
    // Vertices: (0,1)/(1,0) → 3/16; (1/3,1/3) → 3/8; (1,1) → 1/4.
    if (u.is_zero() && v == &one) || (v.is_zero() && u == &one) {
        total += crate::rat(3, 16);
    }
    if u == &third && v == &third {
        total += crate::rat(3, 8);
    }
    if u == &one && v == &one {
        total += crate::rat(1, 4);
    }
    Ok(total)
}

/// Midpoint-rule integral of `g` over a convex region, parallelized over
/// grid rows with a deterministic reduction order. Midpoints landing on the
/// measure-zero edge/vertex sets (where the closed form picks up extra
/// terms) are nudged deterministically by a quarter subcell.
pub fn integrate_g(region: &ConvexPolygon, n: usize) -> f64 {
    assert!(n >= 16, "grid resolution must be at least 16");
    let Some((lo, hi)) = region.bounding_box() else {
        return 0.0;
    };
    let hx = (&hi.x - &lo.x) / crate::rat(n as i64, 1);
    let hy = (&hi.y - &lo.y) / crate::rat(n as i64, 1);
    if !hx.is_positive() || !hy.is_positive() {
        return 0.0;
    }
    let cell_area = (&hx * &hy).to_f64().unwrap_or(0.0);
    use rayon::prelude::*;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = &lo.y + &hy * crate::rat(2 * j as i64 + 1, 2);
            let mut acc = 0.0;
            for i in 0..n {
                let x = &lo.x + &hx * crate::rat(2 * i as i64 + 1, 2);
                let p = RatPoint::new(x.clone(), y.clone());
                if matches!(region.locate(&p), Ok(PointLocation::Outside) | Err(_)) {
                    continue;
                }
                let mut px = x;
                let mut py = y.clone();
                let mut parts = closed_parts(&px, &py);
                let mut shift_x = &hx / crate::rat(4, 1);
                let mut shift_y = &hy / crate::rat(4, 1);
                let mut tries = 0;
                while (parts.boundary() || parts.infinite) && tries < 4 {
                    px += &shift_x;
                    py += &shift_y;
                    if px > Rat::one() || py > Rat::one() {
                        break;
                    }
                    parts = closed_parts(&px, &py);
                    shift_x /= crate::rat(2, 1);
                    shift_y /= crate::rat(2, 1);
                    tries += 1;
                }
                if !parts.infinite {
                    acc += parts.total_f64();
                }
            }
            acc
        })
        .collect();
    rows.iter().sum::<f64>() * cell_area
}

/// The nested constant-step quadrilaterals: for odd `i ≥ 5` the four
/// level-`i` regions assemble into `{((i−3)/(i+1),1), ((i−1)/(i+3),(i−1)/(i+3)),
/// (1,(i−3)/(i+1)), (1,1)}`; `i = 3` degenerates to the support
/// quadrilateral (the big puzzle).
pub fn puzzle_regions(i: u64) -> Result<ConvexPolygon, DensityError> {
    if i < 3 || i % 2 == 0 {
        return Err(DensityError::InvalidParity);
    }
    let i = i as i64;
    Ok(ConvexPolygon::new(vec![
        RatPoint::from_ints(i - 3, i + 1, 1, 1),
        RatPoint::from_ints(i - 1, i + 3, i - 1, i + 3),
        RatPoint::from_ints(1, 1, i - 3, i + 1),
        RatPoint::from_ints(1, 1, 1, 1),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn g(un: i64, ud: i64, vn: i64, vd: i64) -> DensityValue {
        g_closed(&rat(un, ud), &rat(vn, vd)).unwrap()
    }

    fn fin(n: i64, d: i64) -> DensityValue {
        DensityValue::Finite(rat(n, d))
    }

    #[test]
    fn closed_form_frozen_values() {
        assert_eq!(g(0, 1, 1, 1), fin(3, 16));
        assert_eq!(g(1, 1, 0, 1), fin(3, 16));
        assert_eq!(g(9, 10, 19, 20), DensityValue::Finite(harmonic(18)));
        assert_eq!(g(1, 2, 1, 2), fin(7, 6));
        assert_eq!(g(1, 5, 3, 5), fin(1, 2));
        assert_eq!(g(1, 3, 1, 3), fin(3, 8));
        assert_eq!(g(2, 7, 4, 7), fin(1, 1));
        assert_eq!(g(7, 10, 9, 10), DensityValue::Finite(harmonic(5)));
        // The z = 1 edge at (1, 4/5): H₈/2 from the edge series plus the
        // vertex term (2j+1)/(8j(j+1)) at j = 9.
        let expect = harmonic(8) / rat(2, 1) + rat(19, 720);
        assert_eq!(g(1, 1, 4, 5), DensityValue::Finite(expect));
        assert_eq!(g(1, 1, 1, 1), DensityValue::Infinite);
    }

    #[test]
    fn closed_form_symmetry() {
        for (a, b) in [
            (rat(1, 5), rat(3, 5)),
            (rat(7, 10), rat(9, 10)),
            (rat(1, 1), rat(4, 5)),
            (rat(0, 1), rat(1, 1)),
            (rat(13, 17), rat(11, 13)),
            (rat(2, 7), rat(4, 7)),
        ] {
            assert_eq!(
                g_closed(&a, &b).unwrap(),
                g_closed(&b, &a).unwrap(),
                "at ({a},{b})"
            );
        }
    }

    #[test]
    fn closed_form_outside_support_zero() {
        for (a, b) in [
            (rat(1, 10), rat(1, 10)),
            (rat(0, 1), rat(1, 2)),
            (rat(1, 4), rat(1, 4)),
            (rat(3, 10), rat(1, 5)),
        ] {
            assert_eq!(g_closed(&a, &b).unwrap(), fin(0, 1), "at ({a},{b})");
            assert_eq!(support_contains(&a, &b), SupportLocation::Outside);
        }
    }

    #[test]
    fn closed_form_domain_errors() {
        assert_eq!(
            g_closed(&rat(-1, 2), &rat(1, 2)),
            Err(DensityError::OutOfDomain)
        );
        assert_eq!(
            g_closed(&rat(1, 2), &rat(3, 2)),
            Err(DensityError::OutOfDomain)
        );
    }

    #[test]
    fn grouping_identity_matches_closed_form() {
        // g = hᵘ + gᵈᵘ, each from its own closed form.
        for (a, b) in [
            (rat(7, 10), rat(9, 10)),
            (rat(1, 2), rat(1, 2)),
            (rat(1, 5), rat(3, 5)),
            (rat(1, 1), rat(4, 5)),
            (rat(0, 1), rat(1, 1)),
            (rat(1, 3), rat(1, 3)),
            (rat(9, 10), rat(19, 20)),
            (rat(3, 7), rat(6, 7)),
            (rat(13, 30), rat(17, 30)),
        ] {
            let total = g_closed(&a, &b).unwrap();
            let hu = hu_closed(&a, &b).unwrap();
            let gdu = gdu_closed(&a, &b).unwrap();
            let sum = hu.as_rat().unwrap() + &gdu;
            assert_eq!(total, DensityValue::Finite(sum), "at ({a},{b})");
        }
    }

    #[test]
    fn level_examples() {
        // (7/10, 9/10): level 1 has (2) and (4) interior: 1 + 1/2.
        let b = g_level(1, &rat(7, 10), &rat(9, 10)).unwrap();
        assert_eq!(b.total, rat(3, 2));
        assert!(b
            .terms
            .iter()
            .any(|t| t.tuple.ks() == [2]
                && t.location == PointLocation::Interior
                && t.contribution == rat(1, 1)));
        // Level 2 at (1/2, 1/2): probe centers hit vertices of (1,3) and
        // (3,1), each α = 1/3.
        let b = g_level(2, &rat(1, 2), &rat(1, 2)).unwrap();
        assert_eq!(b.total, rat(1, 3));
        assert_eq!(b.terms.len(), 2);
        for t in &b.terms {
            assert!(matches!(t.location, PointLocation::AtVertex(_)));
            assert_eq!(t.contribution, rat(1, 6));
        }
        // Level 6 at (7/10, 9/10): nothing.
        let b = g_level(6, &rat(7, 10), &rat(9, 10)).unwrap();
        assert_eq!(b.total, rat(0, 1));
        assert!(b.terms.is_empty());
    }

    #[test]
    fn geometric_route_matches_closed_form() {
        for (a, b) in [
            (rat(7, 10), rat(9, 10)),
            (rat(1, 2), rat(1, 2)),
            (rat(1, 5), rat(3, 5)),
            (rat(1, 3), rat(1, 3)),
            (rat(2, 7), rat(4, 7)),
            (rat(1, 1), rat(4, 5)),
            (rat(9, 10), rat(19, 20)),
            (rat(3, 7), rat(6, 7)),
            (rat(1, 1), rat(1, 3)),
            (rat(4, 9), rat(7, 9)),
            (rat(1, 10), rat(1, 10)),
            (rat(0, 1), rat(1, 1)),
            (rat(1, 1), rat(1, 1)),
        ] {
            let closed = g_closed(&a, &b).unwrap();
            let summed = g_sum(&a, &b, None).unwrap();
            assert_eq!(closed, summed, "at ({a},{b})");
        }
    }

    #[test]
    fn truncation_bound_is_enforced_and_sufficient() {
        let (u, v) = (rat(1, 5), rat(3, 5));
        assert_eq!(
            g_sum(&u, &v, Some(2)),
            Err(DensityError::TruncationUnsound {
                required: 6,
                given: 2
            })
        );
        // Levels past the bound contribute nothing.
        let required = level_bound(&u, &v);
        for r in required + 1..=required + 5 {
            let b = g_level(r, &u, &v).unwrap();
            assert_eq!(b.total, rat(0, 1), "level {r}");
        }
    }

    #[test]
    fn breakdown_groups_match_proposition_forms() {
        for (a, b) in [
            (rat(7, 10), rat(9, 10)),
            (rat(1, 2), rat(1, 2)),
            (rat(2, 7), rat(4, 7)),
            (rat(9, 10), (rat(19, 20))),
            (rat(5, 6), rat(5, 6)),
        ] {
            let (_, bd) = g_sum_breakdown(&a, &b, None).unwrap();
            let hu = hu_closed(&a, &b).unwrap();
            let gdu = gdu_closed(&a, &b).unwrap();
            assert_eq!(&bd.groups.hu, hu.as_rat().unwrap(), "hu at ({a},{b})");
            assert_eq!(bd.groups.gdu, gdu, "gdu at ({a},{b})");
            assert_eq!(
                bd.groups.hu,
                &bd.groups.h1u + &bd.groups.h2u + &bd.groups.h3u
            );
            assert_eq!(bd.total, &bd.groups.hu + &bd.groups.gdu);
        }
    }

    #[test]
    fn harmonic_staircase_toward_corner() {
        let mut prev = rat(0, 1);
        for m in 2..=40i64 {
            let val = g_closed(&rat(m - 1, m), &rat(m - 1, m)).unwrap();
            let val = val.as_rat().unwrap().clone();
            assert!(val >= prev, "m = {m}");
            prev = val;
        }
    }

    #[test]
    fn support_classification() {
        assert_eq!(
            support_contains(&rat(1, 2), &rat(1, 2)),
            SupportLocation::Interior
        );
        assert_eq!(
            support_contains(&rat(1, 5), &rat(3, 5)),
            SupportLocation::Boundary
        );
        assert_eq!(
            support_contains(&rat(1, 10), &rat(1, 10)),
            SupportLocation::Outside
        );
    }

    #[test]
    fn puzzle_region_examples() {
        let g3 = puzzle_regions(3).unwrap();
        assert_eq!(g3, support_region());
        let g5 = puzzle_regions(5).unwrap();
        for p in [
            RatPoint::from_ints(1, 3, 1, 1),
            RatPoint::from_ints(1, 2, 1, 2),
            RatPoint::from_ints(1, 1, 1, 3),
            RatPoint::from_ints(1, 1, 1, 1),
        ] {
            assert!(g5.vertices().contains(&p), "missing {p}");
        }
        assert_eq!(puzzle_regions(4), Err(DensityError::InvalidParity));
        assert_eq!(puzzle_regions(1), Err(DensityError::InvalidParity));
        // Nesting: G₅ ⊃ G₇ ⊃ G₉.
        for i in [5u64, 7] {
            let outer = puzzle_regions(i).unwrap();
            let inner = puzzle_regions(i + 2).unwrap();
            for p in inner.vertices() {
                assert_ne!(
                    outer.locate(p).unwrap(),
                    PointLocation::Outside,
                    "G_{} vertex {p} outside G_{i}",
                    i + 2
                );
            }
        }
    }

    #[test]
    fn integrate_small_triangle() {
        // g ≡ 1 on the interior of the triangle (1/3,1/3), (0,1), (1,0),
        // which has area 1/6.
        let tri = ConvexPolygon::new(vec![
            RatPoint::from_ints(1, 3, 1, 3),
            RatPoint::from_ints(0, 1, 1, 1),
            RatPoint::from_ints(1, 1, 0, 1),
        ]);
        let val = integrate_g(&tri, 300);
        assert!((val - 1.0 / 6.0).abs() < 0.005, "got {val}");
    }
}
