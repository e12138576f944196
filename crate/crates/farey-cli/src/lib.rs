//! Shared plumbing for the `farey` binary and its integration tests:
//! rational parsing, fixed-precision formatting, deterministic test-point
//! sampling, and atomic file output.

use farey_core::{rat, Rat};
use num::{BigInt, One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

/// Default seed for sampled verification points; override with `--seed`.
pub const DEFAULT_SEED: u64 = 0x4652_4559; // "FREY"

/// Parse a rational from `"p/q"`, a decimal string, or an integer.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int = if int.is_empty() { "0" } else { int };
        let neg = int.starts_with('-');
        let whole: BigInt = int.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let digits: BigInt = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = Rat::new(digits, scale);
        let whole = Rat::from(whole);
        return Ok(if neg { whole - frac_part } else { whole + frac_part });
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rat::from(n))
}

/// Parse `"u,v"` into a rational point.
pub fn parse_point(s: &str) -> Result<(Rat, Rat), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"u,v\", got {s:?}"))?;
    Ok((parse_rat(a)?, parse_rat(b)?))
}

/// Format a float with 12 significant digits ("inf" for infinities).
pub fn sig12(x: f64) -> String {
    if x.is_infinite() {
        return "inf".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Deterministic sample of rational points in `[0,1]²` (denominators
/// ≤ 1000) for density cross-checks. The classes rotate so the sample is
/// guaranteed to include generic interior points, points on the `z = 1`
/// edge, diagonal vertex points `z = j/(j+2)`, points exactly on the
/// oblique edges `(j+1)z + z̄ = j`, and the vertices `((j−1)/(j+1), 1)`.
pub fn sample_points(n: usize, seed: u64) -> Vec<(Rat, Rat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let point = match i % 5 {
            0 => {
                // Generic: both coordinates uniform rationals.
                let qd = rng.gen_range(2..=1000u64);
                let u = rat(rng.gen_range(0..=qd) as i64, qd as i64);
                let qd = rng.gen_range(2..=1000u64);
                let v = rat(rng.gen_range(0..=qd) as i64, qd as i64);
                (u, v)
            }
            1 => {
                // On the z = 1 edge.
                let qd = rng.gen_range(2..=1000u64);
                let w = rat(rng.gen_range(0..=qd) as i64, qd as i64);
                if rng.gen_bool(0.5) {
                    (rat(1, 1), w)
                } else {
                    (w, rat(1, 1))
                }
            }
            2 => {
                // Diagonal vertex z = j/(j+2).
                let j = rng.gen_range(1..=30i64);
                (rat(j, j + 2), rat(j, j + 2))
            }
            3 => {
                // Exactly on the oblique edge (j+1)z + z̄ = j, inside its
                // open parameter range (j−1)/(j+1) < z < j/(j+2).
                let j = rng.gen_range(1..=12i64);
                let b = rng.gen_range(40..=80i64);
                let lo = (b * (j - 1)) / (j + 1) + 1; // first a with a/b > (j−1)/(j+1)
                let hi = (b * j - 1) / (j + 2); // last a with a/b < j/(j+2) (approx)
                if lo <= hi {
                    let a = rng.gen_range(lo..=hi);
                    let z = rat(a, b);
                    let zb = rat(j, 1) - rat(j + 1, 1) * &z;
                    if z > rat(j - 1, j + 1)
                        && z < rat(j, j + 2)
                        && !zb.is_negative()
                        && zb <= Rat::one()
                    {
                        if rng.gen_bool(0.5) {
                            (z, zb)
                        } else {
                            (zb, z)
                        }
                    } else {
                        (rat(1, 2), rat(1, 2))
                    }
                } else {
                    (rat(1, 2), rat(1, 2))
                }
            }
            _ => {
                // Vertex ((j−1)/(j+1), 1) and its mirror.
                let j = rng.gen_range(1..=25i64);
                if rng.gen_bool(0.5) {
                    (rat(j - 1, j + 1), rat(1, 1))
                } else {
                    (rat(1, 1), rat(j - 1, j + 1))
                }
            }
        };
        out.push(point);
    }
    out
}

/// Write to `path` atomically (temp file in the same directory + rename),
/// so failures never leave partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
