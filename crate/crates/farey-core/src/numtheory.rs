//! Integer arithmetic services: gcd and modular inverse, a Möbius sieve, and
//! exact counts of coprime lattice points with parity constraints together
//! with their `2·Area/π²` main terms.
//!
//! Counting is deliberately naive — a scanline over integer rows with a gcd
//! test per candidate — because exactness matters more than speed at the
//! region sizes used here, and the closed-region convention (boundary points
//! count) keeps the semantics obvious.

use crate::farey::Interval;
use crate::geometry::ConvexPolygon;
use crate::Rat;
use num::integer::gcd;
use num::{BigInt, ToPrimitive};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumTheoryError {
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(i64, i64),
    #[error("modulus {0} is smaller than 2")]
    InvalidModulus(i64),
}

/// Parity of one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn matches(self, n: i64) -> bool {
        match self {
            Parity::Even => n.rem_euclid(2) == 0,
            Parity::Odd => n.rem_euclid(2) == 1,
        }
    }
}

/// Parity constraint on a lattice point (x, y).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityPair {
    pub x_parity: Parity,
    pub y_parity: Parity,
}

impl ParityPair {
    pub const EVEN_ODD: ParityPair = ParityPair {
        x_parity: Parity::Even,
        y_parity: Parity::Odd,
    };
    pub const ODD_EVEN: ParityPair = ParityPair {
        x_parity: Parity::Odd,
        y_parity: Parity::Even,
    };
    pub const ODD_ODD: ParityPair = ParityPair {
        x_parity: Parity::Odd,
        y_parity: Parity::Odd,
    };
}

/// Sieve-computed table of the Möbius function on 1..=limit.
#[derive(Clone, Debug)]
pub struct MobiusTable {
    values: Vec<i8>,
}

impl MobiusTable {
    pub fn limit(&self) -> usize {
        self.values.len()
    }

    /// μ(n) for 1 ≤ n ≤ limit.
    pub fn get(&self, n: usize) -> i8 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

/// Modular inverse of `a` modulo `m ≥ 2`, as the representative in `[0, m)`.
pub fn mod_inverse(a: i64, m: i64) -> Result<i64, NumTheoryError> {
    if m < 2 {
        return Err(NumTheoryError::InvalidModulus(m));
    }
    let (g, x, _) = extended_gcd(a.rem_euclid(m), m);
    if g != 1 {
        return Err(NumTheoryError::NotInvertible(a, m));
    }
    Ok(x.rem_euclid(m))
}

/// Extended Euclid: returns (g, x, y) with a·x + b·y = g = gcd(a, b).
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if a == 0 {
        (b, 0, 1)
    } else {
        let (g, x, y) = extended_gcd(b % a, a);
        (g, y - (b / a) * x, x)
    }
}

/// Linear sieve for μ(1..=n).
pub fn mobius_table(n: usize) -> MobiusTable {
    assert!(n >= 1);
    let mut mu = vec![1i8; n];
    let mut primes: Vec<usize> = Vec::new();
    let mut composite = vec![false; n + 1];
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i - 1] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip - 1] = 0;
                break;
            }
            mu[ip - 1] = -mu[i - 1];
        }
    }
    MobiusTable { values: mu }
}

/// Exact lattice count plus its asymptotic main term.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityCount {
    /// Exact number of qualifying lattice points in the closed region.
    pub count: u64,
    /// `2·Area(region)/π²`, the density main term, as a float.
    pub main_term: f64,
}

fn rat_ceil_i64(r: &Rat) -> i64 {
    r.ceil().to_integer().to_i64().expect("coordinate fits i64")
}

fn rat_floor_i64(r: &Rat) -> i64 {
    r.floor().to_integer().to_i64().expect("coordinate fits i64")
}

/// Count lattice points (x, y) in the closed region with the given parities
/// and gcd(x, y) = 1, alongside the `2·Area/π²` main term.
pub fn count_parity_coprime(region: &ConvexPolygon, parity: ParityPair) -> ParityCount {
    let main_term = 2.0 * region.area().to_f64().unwrap_or(0.0) / (std::f64::consts::PI.powi(2));
    let count = count_where(region, |x, y| {
        parity.x_parity.matches(x) && parity.y_parity.matches(y) && coprime(x, y)
    });
    ParityCount { count, main_term }
}

/// Count (x, y) in the closed region with x even, y odd, gcd(x, y) = 1 and
/// the inverse of x modulo y lying in `[y·inf(I), y·sup(I)]`.
pub fn constrained_count(region: &ConvexPolygon, interval: &Interval) -> u64 {
    let Some((lo_pt, hi_pt)) = region.bounding_box() else {
        return 0;
    };
    let y_lo = rat_ceil_i64(&lo_pt.y);
    let y_hi = rat_floor_i64(&hi_pt.y);
    let mut total = 0u64;
    for y in y_lo..=y_hi {
        if !Parity::Odd.matches(y) {
            continue;
        }
        let yr = Rat::from(BigInt::from(y));
        let Some((xa, xb)) = region.x_range_at_y(&yr) else {
            continue;
        };
        // The inverse is an integer, so the rational band [y·lo, y·hi]
        // collapses to integer bounds once per scanline.
        let inv_lo = rat_ceil_i64(&(&yr * interval.lo()));
        let inv_hi = rat_floor_i64(&(&yr * interval.hi()));
        if inv_lo > inv_hi {
            continue;
        }
        let x_lo = rat_ceil_i64(&xa);
        let x_hi = rat_floor_i64(&xb);
        let mut x = x_lo + (Parity::Even.matches(x_lo) as i64 ^ 1);
        while x <= x_hi {
            if coprime(x, y) {
                let inv = if y == 1 {
                    0
                } else {
                    mod_inverse(x, y).expect("coprime by construction")
                };
                if inv_lo <= inv && inv <= inv_hi {
                    total += 1;
                }
            }
            x += 2;
        }
    }
    total
}

fn coprime(x: i64, y: i64) -> bool {
    gcd(x.unsigned_abs(), y.unsigned_abs()) == 1
}

fn count_where(region: &ConvexPolygon, pred: impl Fn(i64, i64) -> bool) -> u64 {
    let Some((lo_pt, hi_pt)) = region.bounding_box() else {
        return 0;
    };
    let y_lo = rat_ceil_i64(&lo_pt.y);
    let y_hi = rat_floor_i64(&hi_pt.y);
    let mut total = 0u64;
    for y in y_lo..=y_hi {
        let yr = Rat::from(BigInt::from(y));
        let Some((xa, xb)) = region.x_range_at_y(&yr) else {
            continue;
        };
        let x_lo = rat_ceil_i64(&xa);
        let x_hi = rat_floor_i64(&xb);
        for x in x_lo..=x_hi {
            if pred(x, y) {
                total += 1;
            }
        }
    }
    total
}
