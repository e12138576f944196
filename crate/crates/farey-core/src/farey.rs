//! Generation and local navigation of Farey sequences of order Q.
//!
//! The sequence `F_Q` consists of the reduced fractions `a/q` in `(0, 1]`
//! with `q ≤ Q` in increasing order. Consecutive elements satisfy the
//! unimodular relation `a″q′ − a′q″ = 1`, and each element follows from its
//! two predecessors through the index `k = ⌊(Q + q′)/q″⌋`:
//! `a‴ = k·a″ − a′`, `q‴ = k·q″ − q′`. That recurrence drives enumeration in
//! `O(1)` state per step; a brute-force generator (double loop, gcd filter,
//! sort) is kept as a test oracle.
//!
//! Denominator arithmetic stays in `u64`/`i64` with checked conversions —
//! comfortably exact for `Q ≤ 10⁷`, far beyond anything exercised here.

use crate::numtheory::mod_inverse;
use crate::Rat;
use num::integer::gcd;
use num::BigInt;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FareyError {
    #[error("fractions {0} and {1} are not consecutive in F_{2}")]
    NotConsecutive(Fraction, Fraction, u64),
    #[error("no fraction follows 1/1")]
    EndOfSequence,
    #[error("({0}, {1}) is not a neighbor denominator pair for Q = {2}")]
    NotNeighborPair(u64, u64, u64),
    #[error("denominators {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("chain would continue past the final fraction 1/1")]
    ChainLeavesRange,
    #[error("invalid interval bounds")]
    InvalidInterval,
}

/// A reduced fraction `a/q` with `0 ≤ a ≤ q`.
///
/// `0/1` is allowed as an enumeration anchor (the recurrence needs two
/// seeds) but excluded from enumeration output by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den >= 1, "denominator must be positive");
        assert!(num <= den, "fraction must lie in [0, 1]");
        assert_eq!(gcd(num, den), 1, "fraction must be reduced");
        Fraction { num, den }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn zero() -> Self {
        Fraction { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        Fraction { num: 1, den: 1 }
    }

    pub fn to_rat(&self) -> Rat {
        Rat::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

/// A closed subinterval of `[0, 1]` with exact rational endpoints.
///
/// Degenerate intervals (`lo == hi`) are permitted for counting predicates;
/// enumeration over them simply yields at most one fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self, FareyError> {
        use num::{One, Signed};
        if lo.is_negative() || hi > Rat::one() || lo > hi {
            return Err(FareyError::InvalidInterval);
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: crate::rat(0, 1),
            hi: crate::rat(1, 1),
        }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, f: &Fraction) -> bool {
        let v = f.to_rat();
        self.lo <= v && v <= self.hi
    }
}

/// Which denominator class to keep during enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetSelector {
    All,
    OddDen,
    EvenDen,
}

impl SubsetSelector {
    pub fn keeps(&self, f: &Fraction) -> bool {
        match self {
            SubsetSelector::All => true,
            SubsetSelector::OddDen => f.den % 2 == 1,
            SubsetSelector::EvenDen => f.den % 2 == 0,
        }
    }
}

/// A run of consecutive `F_Q` denominators with the indices that link them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenominatorChain {
    pub q: u64,
    /// Denominators `q′, q″, q‴, …` of consecutive fractions.
    pub dens: Vec<u64>,
    /// Indices `k_j = ⌊(Q + dens[j−1]) / dens[j]⌋` linking the triples.
    pub ks: Vec<u64>,
}

/// Enumerate `F_Q ∩ interval`, filtered by subset, excluding the `0/1` anchor.
pub fn enumerate(q: u64, subset: SubsetSelector, interval: &Interval) -> Vec<Fraction> {
    enumerate_opts(q, subset, interval, false)
}

/// As [`enumerate`], with a switch to include `0/1` when the interval allows.
pub fn enumerate_opts(
    q: u64,
    subset: SubsetSelector,
    interval: &Interval,
    include_zero: bool,
) -> Vec<Fraction> {
    use num::Zero;
    assert!(q >= 1);
    let mut out = Vec::new();
    if include_zero && interval.lo().is_zero() && subset.keeps(&Fraction::zero()) {
        out.push(Fraction::zero());
    }
    out.extend(FareyIter::new(q, interval).filter(|f| subset.keeps(f)));
    out
}

/// Streaming iterator over `F_Q ∩ interval` (all denominators, `0/1`
/// excluded); avoids materializing multi-million element sequences.
pub struct FareyIter {
    q: u64,
    prev: Fraction,
    cur: Option<Fraction>,
    hi_num: u64,
    hi_den: u64,
}

impl FareyIter {
    pub fn new(q: u64, interval: &Interval) -> Self {
        use num::ToPrimitive;
        assert!(q >= 1);
        let (prev, cur) = seed_pair(q, interval.lo());
        FareyIter {
            q,
            prev,
            cur: Some(cur),
            hi_num: interval.hi().numer().to_u64().expect("endpoint fits u64"),
            hi_den: interval.hi().denom().to_u64().expect("endpoint fits u64"),
        }
    }
}

impl Iterator for FareyIter {
    type Item = Fraction;

    fn next(&mut self) -> Option<Fraction> {
        loop {
            let cur = self.cur?;
            if cur.num() as u128 * self.hi_den as u128 > self.hi_num as u128 * cur.den() as u128 {
                self.cur = None;
                return None;
            }
            let next = next_fraction(self.q, self.prev, cur).ok();
            self.prev = cur;
            self.cur = next;
            if cur.num() > 0 {
                return Some(cur);
            }
            // 0/1 anchor: skip and continue.
        }
    }
}

/// Brute-force oracle: double loop, gcd filter, exact sort.
pub fn enumerate_brute_force(
    q: u64,
    subset: SubsetSelector,
    interval: &Interval,
    include_zero: bool,
) -> Vec<Fraction> {
    assert!(q >= 1);
    let mut out = Vec::new();
    if include_zero && interval.contains(&Fraction::zero()) && subset.keeps(&Fraction::zero()) {
        out.push(Fraction::zero());
    }
    for den in 1..=q {
        for num in 1..=den {
            if gcd(num, den) == 1 {
                let f = Fraction::new(num, den);
                if subset.keeps(&f) && interval.contains(&f) {
                    out.push(f);
                }
            }
        }
    }
    out.sort();
    out
}

/// The two consecutive `F_Q ∪ {0/1}` fractions `(prev, cur)` with
/// `prev < lo ≤ cur` (or `cur = 1/Q` anchored by `0/1` when `lo = 0`),
/// found by Stern–Brocot descent with run-length acceleration.
fn seed_pair(q: u64, lo: &Rat) -> (Fraction, Fraction) {
    use num::{One, ToPrimitive, Zero};
    if lo.is_zero() {
        return (Fraction::zero(), Fraction::new(1, q));
    }
    if lo.is_one() {
        return if q == 1 {
            (Fraction::zero(), Fraction::one())
        } else {
            (Fraction::new(q - 1, q), Fraction::one())
        };
    }
    let p_lo = lo.numer().to_i64().expect("interval endpoint fits i64") as i128;
    let q_lo = lo.denom().to_i64().expect("interval endpoint fits i64") as i128;
    // Stern–Brocot bounds: left <= lo < right, always F_Q-neighbors once the
    // mediant denominator exceeds Q. `left` starts at the 0/1 anchor.
    let (mut al, mut bl) = (0i128, 1i128);
    let (mut ar, mut br) = (1i128, 1i128);
    let qi = q as i128;
    loop {
        // Signed distances of the bounds from lo (scaled by q_lo * b).
        let dl = p_lo * bl - al * q_lo; // > 0 while left < lo
        let dr = ar * q_lo - p_lo * br; // >= 0 while right >= lo
        if dl == 0 {
            // left == lo cannot happen (left < lo is invariant).
            unreachable!();
        }
        if bl + br > qi {
            // The mediant leaves F_Q: the bounds are consecutive in F_Q.
            break;
        }
        // Mediant value versus lo decides the direction; take the whole run
        // of same-direction steps at once.
        let mediant_cmp = p_lo * (bl + br) - (al + ar) * q_lo;
        if mediant_cmp > 0 {
            // Mediant < lo: move `left` right by t steps, left += t * right.
            // left_t < lo  ⇔  t·dr < dl (strict keeps the invariant), but we
            // also allow left_t == lo to detect membership.
            let t_den = (qi - bl) / br;
            let t_val = if dr == 0 { t_den } else { dl / dr };
            let t = t_den.min(t_val).max(1);
            al += t * ar;
            bl += t * br;
            if p_lo * bl - al * q_lo == 0 {
                // lo itself is in F_Q: pair it with its predecessor.
                let (pa, pb) = farey_predecessor(al, bl, qi);
                return (
                    Fraction::new(pa as u64, pb as u64),
                    Fraction::new(al as u64, bl as u64),
                );
            }
        } else if mediant_cmp < 0 {
            // Mediant > lo: move `right` left by t steps, right += t * left.
            // right_t >= lo  ⇔  t·dl <= dr.
            let t_den = (qi - br) / bl;
            let t_val = dr / dl;
            let t = t_den.min(t_val).max(1);
            ar += t * al;
            br += t * bl;
        } else {
            // Mediant == lo: lo is in F_Q with the mediant's denominator.
            let (a_cur, b_cur) = (al + ar, bl + br);
            let (pa, pb) = farey_predecessor(a_cur, b_cur, qi);
            return (
                Fraction::new(pa as u64, pb as u64),
                Fraction::new(a_cur as u64, b_cur as u64),
            );
        }
    }
    (
        Fraction::new(al as u64, bl as u64),
        Fraction::new(ar as u64, br as u64),
    )
}

/// Predecessor of the reduced fraction a/b within `F_Q ∪ {0/1}`: the unique
/// x/y with a·y − b·x = 1 and Q − b < y ≤ Q.
fn farey_predecessor(a: i128, b: i128, q: i128) -> (i128, i128) {
    if b == 1 {
        // a/b is 1/1; predecessor is (q-1)/q (or 0/1 when q = 1).
        return if q == 1 { (0, 1) } else { (q - 1, q) };
    }
    // Base solution via the modular inverse: y0 = a^{-1} mod b gives
    // a·y0 ≡ 1 (mod b).
    let y0 = mod_inverse(a as i64, b as i64).expect("reduced fraction") as i128;
    // Slide y into (q - b, q].
    let t = (q - y0).div_euclid(b);
    let y = y0 + t * b;
    let x = (a * y - 1) / b;
    (x, y)
}

/// Successor of the consecutive pair `(prev, cur)` in `F_Q`.
pub fn next_fraction(q: u64, prev: Fraction, cur: Fraction) -> Result<Fraction, FareyError> {
    if cur == Fraction::one() {
        return Err(FareyError::EndOfSequence);
    }
    let uni = cur.num as i128 * prev.den as i128 - prev.num as i128 * cur.den as i128;
    if uni != 1 || prev.den > q || cur.den > q {
        return Err(FareyError::NotConsecutive(prev, cur, q));
    }
    let k = (q + prev.den) / cur.den;
    let den = k * cur.den - prev.den;
    let num = k * cur.num - prev.num;
    Ok(Fraction::new(num, den))
}

/// The index `k = ⌊(Q + q′)/q″⌋` of a neighbor denominator pair.
pub fn index_of(q: u64, q_prev: u64, q_cur: u64) -> Result<u64, FareyError> {
    if q_prev == 0
        || q_cur == 0
        || q_prev > q
        || q_cur > q
        || gcd(q_prev, q_cur) != 1
        || q_prev + q_cur <= q
    {
        return Err(FareyError::NotNeighborPair(q_prev, q_cur, q));
    }
    Ok((q + q_prev) / q_cur)
}

/// Recover the numerators of a neighbor pair from its denominators: the
/// current numerator is the inverse of `q′` modulo `q″`, and the unimodular
/// relation pins the previous one.
pub fn numerators_from_pair(q_prev: u64, q_cur: u64) -> Result<(u64, u64), FareyError> {
    if gcd(q_prev, q_cur) != 1 {
        return Err(FareyError::NotCoprime(q_prev, q_cur));
    }
    if q_cur == 1 {
        // Terminal pair (q′, 1): the current fraction is 1/1.
        return Ok((q_prev - 1, 1));
    }
    let a_cur = mod_inverse(q_prev as i64, q_cur as i64)
        .expect("coprime checked above") as u64;
    let a_prev = (a_cur * q_prev - 1) / q_cur;
    Ok((a_prev, a_cur))
}

/// Walk `steps` recurrence steps from a neighbor denominator pair.
pub fn chain(q: u64, q_prev: u64, q_cur: u64, steps: usize) -> Result<DenominatorChain, FareyError> {
    index_of(q, q_prev, q_cur)?;
    let mut dens = vec![q_prev, q_cur];
    let mut ks = Vec::with_capacity(steps);
    let (mut p, mut c) = (q_prev, q_cur);
    for _ in 0..steps {
        if c == 1 {
            // c = 1 here means the current fraction is 1/1 (only 0/1 and 1/1
            // have denominator 1, and 0/1 cannot follow anything).
            return Err(FareyError::ChainLeavesRange);
        }
        let k = (q + p) / c;
        let next = k * c - p;
        ks.push(k);
        dens.push(next);
        p = c;
        c = next;
    }
    Ok(DenominatorChain { q, dens, ks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn iv(a: i64, b: i64, c: i64, d: i64) -> Interval {
        Interval::new(rat(a, b), rat(c, d)).unwrap()
    }

    #[test]
    fn enumerate_even_small() {
        let got = enumerate(5, SubsetSelector::EvenDen, &Interval::unit());
        let want: Vec<Fraction> = [(1, 4), (1, 2), (3, 4)]
            .iter()
            .map(|&(a, q)| Fraction::new(a, q))
            .collect();
        assert_eq!(got, want);

        let got = enumerate(6, SubsetSelector::EvenDen, &Interval::unit());
        let want: Vec<Fraction> = [(1, 6), (1, 4), (1, 2), (3, 4), (5, 6)]
            .iter()
            .map(|&(a, q)| Fraction::new(a, q))
            .collect();
        assert_eq!(got, want);

        assert!(enumerate(1, SubsetSelector::EvenDen, &Interval::unit()).is_empty());
    }

    #[test]
    fn oracle_equivalence_small() {
        let intervals = [iv(0, 1, 1, 1), iv(0, 1, 1, 3), iv(1, 4, 3, 4)];
        for q in 1..=60 {
            for subset in [
                SubsetSelector::All,
                SubsetSelector::OddDen,
                SubsetSelector::EvenDen,
            ] {
                for interval in &intervals {
                    for include_zero in [false, true] {
                        let fast = enumerate_opts(q, subset, interval, include_zero);
                        let slow = enumerate_brute_force(q, subset, interval, include_zero);
                        assert_eq!(fast, slow, "Q={q} subset={subset:?} iv={interval:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn unimodularity_and_neighbor_sum() {
        for q in 1..=80u64 {
            let all = enumerate_opts(q, SubsetSelector::All, &Interval::unit(), true);
            for w in all.windows(2) {
                let (f, g) = (w[0], w[1]);
                assert_eq!(
                    g.num() as i128 * f.den() as i128 - f.num() as i128 * g.den() as i128,
                    1
                );
                assert!(f.den() + g.den() > q);
            }
        }
    }

    #[test]
    fn even_subsequence_can_break_neighbor_sum() {
        // Witness for Q = 6: the even-denominator subsequence has an
        // adjacent pair with q' + q'' <= Q.
        let even = enumerate(6, SubsetSelector::EvenDen, &Interval::unit());
        let found = even
            .windows(2)
            .any(|w| w[0].den() + w[1].den() <= 6);
        assert!(found);
    }

    #[test]
    fn next_fraction_cases() {
        assert_eq!(
            next_fraction(5, Fraction::new(1, 5), Fraction::new(1, 4)).unwrap(),
            Fraction::new(1, 3)
        );
        assert_eq!(
            next_fraction(6, Fraction::new(1, 6), Fraction::new(1, 5)).unwrap(),
            Fraction::new(1, 4)
        );
        assert_eq!(
            next_fraction(4, Fraction::new(3, 4), Fraction::one()),
            Err(FareyError::EndOfSequence)
        );
        assert!(matches!(
            next_fraction(5, Fraction::new(1, 5), Fraction::new(1, 3)),
            Err(FareyError::NotConsecutive(..))
        ));
    }

    #[test]
    fn index_of_cases() {
        assert_eq!(index_of(6, 6, 5), Ok(2));
        assert_eq!(index_of(6, 5, 6), Ok(1));
        assert!(matches!(
            index_of(5, 2, 2),
            Err(FareyError::NotNeighborPair(2, 2, 5))
        ));
    }

    #[test]
    fn numerators_from_pair_cases() {
        assert_eq!(numerators_from_pair(5, 4), Ok((1, 1)));
        assert_eq!(numerators_from_pair(3, 5), Ok((1, 2)));
        assert_eq!(numerators_from_pair(4, 6), Err(FareyError::NotCoprime(4, 6)));
        // Terminal 1/1 pair.
        assert_eq!(numerators_from_pair(7, 1), Ok((6, 1)));
    }

    #[test]
    fn chain_cases() {
        let c = chain(6, 6, 5, 4).unwrap();
        assert_eq!(c.dens, vec![6, 5, 4, 3, 5, 2]);
        assert_eq!(c.ks, vec![2, 2, 3, 1]);

        let c = chain(5, 5, 4, 1).unwrap();
        assert_eq!(c.dens, vec![5, 4, 3]);
        assert_eq!(c.ks, vec![2]);

        let c = chain(9, 9, 5, 0).unwrap();
        assert_eq!(c.dens, vec![9, 5]);
        assert!(c.ks.is_empty());

        assert_eq!(chain(4, 4, 1, 1), Err(FareyError::ChainLeavesRange));
    }

    #[test]
    fn chain_mediant_identity() {
        // q''·k = q' + q''' and likewise for numerators, across F_40.
        let q = 40;
        let all = enumerate_opts(q, SubsetSelector::All, &Interval::unit(), true);
        for w in all.windows(3) {
            let k = index_of(q, w[0].den(), w[1].den()).unwrap();
            assert_eq!(w[1].den() * k, w[0].den() + w[2].den());
            assert_eq!(w[1].num() * k, w[0].num() + w[2].num());
        }
    }

    #[test]
    fn chain_matches_enumeration() {
        let q = 30;
        let all = enumerate_opts(q, SubsetSelector::All, &Interval::unit(), true);
        let c = chain(q, all[0].den(), all[1].den(), all.len() - 2).unwrap();
        let dens: Vec<u64> = all.iter().map(|f| f.den()).collect();
        assert_eq!(c.dens, dens);
    }

    #[test]
    fn seed_pair_on_members_and_nonmembers() {
        // lo in F_Q.
        let (p, c) = seed_pair(7, &rat(1, 2));
        assert_eq!((p, c), (Fraction::new(3, 7), Fraction::new(1, 2)));
        // lo not in F_Q.
        let (p, c) = seed_pair(7, &rat(39, 100));
        assert!(p.to_rat() < rat(39, 100) && c.to_rat() >= rat(39, 100));
        assert_eq!(next_fraction(7, p, c).is_ok(), true);
        // Edges.
        assert_eq!(seed_pair(5, &rat(0, 1)), (Fraction::zero(), Fraction::new(1, 5)));
        assert_eq!(seed_pair(5, &rat(1, 1)), (Fraction::new(4, 5), Fraction::one()));
    }

    #[test]
    fn even_cardinality_main_term() {
        let q = 2000u64;
        let n = enumerate(q, SubsetSelector::EvenDen, &Interval::unit()).len() as f64;
        let main = (q as f64).powi(2) / std::f64::consts::PI.powi(2);
        assert!((n / main - 1.0).abs() < 0.02, "ratio {}", n / main);
    }
}
