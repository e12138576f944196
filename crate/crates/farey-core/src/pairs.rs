//! Consecutive even-denominator pairs and their empirical statistics.
//!
//! Between two consecutive fractions of the even-denominator subsequence of
//! `F_Q` there are always `r ≥ 1` odd-denominator fractions; `r` is the
//! pair's type. This module extracts the typed pairs in one linear pass over
//! `F_Q`, and provides the empirical measurements (type histograms, local
//! densities of normalized points `(q′/Q, q″/Q)`, small-sum probabilities,
//! grid counts) that the density module's exact results are checked against.

use crate::farey::{FareyIter, Fraction, Interval};
use crate::geometry::RatPoint;
use crate::Rat;
use num::{BigInt, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairError {
    #[error("fewer than two even-denominator fractions in range")]
    EmptyResult,
    #[error("input list of pairs is empty")]
    EmptyInput,
    #[error("box has zero area inside the unit square")]
    ZeroArea,
}

/// A pair of consecutive even-denominator fractions with its type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypedPair {
    /// Farey order.
    pub q: u64,
    pub q_prev: u64,
    pub q_next: u64,
    /// Number of odd-denominator fractions strictly between the two.
    pub r: u32,
    pub a_prev: u64,
    pub a_next: u64,
}

/// An axis-aligned square `center ± half_side`, the window of the local
/// density definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenteredBox {
    pub center: RatPoint,
    pub half_side: Rat,
}

impl CenteredBox {
    pub fn new(center: RatPoint, half_side: Rat) -> Self {
        assert!(half_side.is_positive(), "box must have positive half-side");
        CenteredBox { center, half_side }
    }

    fn clamp01(v: Rat) -> Rat {
        let one = crate::rat(1, 1);
        if v.is_negative() {
            Rat::zero()
        } else if v > one {
            one
        } else {
            v
        }
    }

    /// Exact area of box ∩ [0,1]².
    pub fn clipped_area(&self) -> Rat {
        let w = Self::clamp01(&self.center.x + &self.half_side)
            - Self::clamp01(&self.center.x - &self.half_side);
        let h = Self::clamp01(&self.center.y + &self.half_side)
            - Self::clamp01(&self.center.y - &self.half_side);
        if w.is_negative() || h.is_negative() {
            Rat::zero()
        } else {
            w * h
        }
    }

    /// Closed membership test.
    pub fn contains(&self, p: &RatPoint) -> bool {
        (&p.x - &self.center.x).abs() <= self.half_side
            && (&p.y - &self.center.y).abs() <= self.half_side
    }
}

/// Aggregated counts over a pair list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalSummary {
    pub total_pairs: u64,
    pub per_type: BTreeMap<u32, u64>,
    /// Pairs with `q_prev + q_next ≤ Q`.
    pub small_sum_count: u64,
}

impl EmpiricalSummary {
    pub fn from_pairs(pairs: &[TypedPair]) -> Result<Self, PairError> {
        if pairs.is_empty() {
            return Err(PairError::EmptyInput);
        }
        let mut per_type = BTreeMap::new();
        let mut small = 0u64;
        for p in pairs {
            *per_type.entry(p.r).or_insert(0u64) += 1;
            if p.q_prev + p.q_next <= p.q {
                small += 1;
            }
        }
        Ok(EmpiricalSummary {
            total_pairs: pairs.len() as u64,
            per_type,
            small_sum_count: small,
        })
    }
}

/// All consecutive even-denominator pairs of `F_Q ∩ interval`, with types
/// counted during the same pass (no second walk).
pub fn even_pairs(q: u64, interval: &Interval) -> Result<Vec<TypedPair>, PairError> {
    assert!(q >= 2);
    let mut out = Vec::new();
    let mut last_even: Option<Fraction> = None;
    let mut odd_count = 0u32;
    for f in FareyIter::new(q, interval) {
        if f.den() % 2 == 0 {
            if let Some(prev) = last_even {
                debug_assert!(odd_count >= 1, "even denominators cannot be adjacent");
                out.push(TypedPair {
                    q,
                    q_prev: prev.den(),
                    q_next: f.den(),
                    r: odd_count,
                    a_prev: prev.num(),
                    a_next: f.num(),
                });
            }
            last_even = Some(f);
            odd_count = 0;
        } else {
            odd_count += 1;
        }
    }
    if out.is_empty() {
        return Err(PairError::EmptyResult);
    }
    Ok(out)
}

/// Relative frequency of each type, as exact rationals summing to 1.
pub fn type_histogram(pairs: &[TypedPair]) -> Result<BTreeMap<u32, Rat>, PairError> {
    let summary = EmpiricalSummary::from_pairs(pairs)?;
    let total = BigInt::from(summary.total_pairs);
    Ok(summary
        .per_type
        .into_iter()
        .map(|(r, c)| (r, Rat::new(BigInt::from(c), total.clone())))
        .collect())
}

/// Empirical local density: the fraction of normalized points `(q′/Q, q″/Q)`
/// inside the box, divided by the box's area inside the unit square.
pub fn local_density_estimate(
    pairs: &[TypedPair],
    q: u64,
    bx: &CenteredBox,
) -> Result<Rat, PairError> {
    if pairs.is_empty() {
        return Err(PairError::EmptyInput);
    }
    let area = bx.clipped_area();
    if area.is_zero() {
        return Err(PairError::ZeroArea);
    }
    let count = pairs
        .iter()
        .filter(|p| {
            let pt = RatPoint::new(
                Rat::new(BigInt::from(p.q_prev), BigInt::from(q)),
                Rat::new(BigInt::from(p.q_next), BigInt::from(q)),
            );
            bx.contains(&pt)
        })
        .count();
    Ok(Rat::from(BigInt::from(count)) / (Rat::from(BigInt::from(pairs.len())) * area))
}

/// Empirical probability that a consecutive even pair satisfies
/// `q′ + q″ ≤ Q`.
pub fn small_sum_probability(pairs: &[TypedPair], q: u64) -> Result<Rat, PairError> {
    if pairs.is_empty() {
        return Err(PairError::EmptyInput);
    }
    let count = pairs.iter().filter(|p| p.q_prev + p.q_next <= q).count();
    Ok(Rat::new(BigInt::from(count), BigInt::from(pairs.len())))
}

/// `n × n` grid of counts of normalized points; cell `(i, j)` covers
/// `[i/n, (i+1)/n) × [j/n, (j+1)/n)`, with coordinate 1 assigned to the last
/// cell. Binning is exact integer arithmetic, immune to float edge effects.
pub fn grid_counts(pairs: &[TypedPair], q: u64, n: usize) -> Vec<Vec<u64>> {
    assert!(n >= 1);
    let mut grid = vec![vec![0u64; n]; n];
    let bin = |den: u64| -> usize {
        // floor(den/q * n), clamped so den == q lands in the last cell.
        (((den as u128 * n as u128) / q as u128) as usize).min(n - 1)
    };
    for p in pairs {
        grid[bin(p.q_prev)][bin(p.q_next)] += 1;
    }
    grid
}
