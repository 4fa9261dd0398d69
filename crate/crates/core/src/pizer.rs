//! Class-number driven parameter engine for the quaternionic graphs:
//! Eichler class numbers, graph sizes by level, the discriminant tables
//! behind the trace conditions, their modular conditions on p, the
//! 6-regular admissibility test, and prime scanning.

use alloc::vec;
use alloc::vec::Vec;

use crate::ff::{is_prime, legendre};
use crate::Error;

/// H(p) = (p-1)/12 + (1 - (-4/p))/4 + (1 - (-3/p))/3 for p >= 5.
pub fn eichler_class_number(p: u64) -> Result<u64, Error> {
    if p < 5 || !is_prime(p) {
        return Err(Error::Unsupported(
            "class number formula needs a prime p >= 5",
        ));
    }
    let m4 = legendre(-4, p)? as i64;
    let m3 = legendre(-3, p)? as i64;
    let twelfths = (p as i64 - 1) + 3 * (1 - m4) + 4 * (1 - m3);
    debug_assert_eq!(twelfths % 12, 0);
    Ok((twelfths / 12) as u64)
}

/// H(p^2) = (p^2 - 1)/12 for p >= 5, with the correction term 4/3 at p = 3.
pub fn class_number_level_p2(p: u64) -> Result<u64, Error> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Unsupported(
            "level p^2 class number needs an odd prime",
        ));
    }
    if p == 3 {
        return Ok(2); // (9 - 1)/12 + 4/3
    }
    Ok((p * p - 1) / 12)
}

/// Order level selecting which graph family G(N, l) is being sized.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Level {
    P,
    PSquared,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GraphSize {
    pub size: u64,
    pub bipartite: bool,
}

/// Vertex count and bipartiteness of G(p, l) and G(p^2, l). At level p^2
/// the graph splits in two (non-bipartite) components when l is a
/// quadratic residue mod p, and is bipartite of full size otherwise.
pub fn pizer_graph_size(p: u64, l: u64, level: Level) -> Result<GraphSize, Error> {
    if p <= 3 || !is_prime(p) {
        return Err(Error::Unsupported("graph size needs a prime p > 3"));
    }
    if l % p == 0 {
        return Err(Error::Parameter("l must be coprime to p"));
    }
    match level {
        Level::P => Ok(GraphSize {
            size: eichler_class_number(p)?,
            bipartite: false,
        }),
        Level::PSquared => {
            let h = class_number_level_p2(p)?;
            if legendre(l as i64, p)? == 1 {
                Ok(GraphSize {
                    size: h / 2,
                    bipartite: false,
                })
            } else {
                Ok(GraphSize {
                    size: h,
                    bipartite: true,
                })
            }
        }
    }
}

/// One row of the discriminant tables: delta = s^2 - 4m factored as t^2 r
/// (r = 1 mod 4) or 4 t^2 r (r = 2, 3 mod 4), with d = delta / f^2 ranging
/// over the divisors f of t.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiscriminantRow {
    pub s: u64,
    pub delta: i64,
    pub t: u64,
    pub r: i64,
    pub f_divisors: Vec<u64>,
    pub d_values: Vec<i64>,
}

fn squarefree_kernel(mut n: u64) -> u64 {
    let mut k = 1u64;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e % 2 == 1 {
                k *= d;
            }
        }
        d += 1;
    }
    k * n
}

fn isqrt(n: u64) -> u64 {
    let mut r = libm::sqrt(n as f64) as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The possible (s, delta, t, r, f, d) for m in {5, 25}: all s with
/// s^2 - 4m < 0, each factored into the tabulated normal form.
pub fn discriminant_rows(m: u64) -> Result<Vec<DiscriminantRow>, Error> {
    if m != 5 && m != 25 {
        return Err(Error::Unsupported(
            "discriminant tables cover m = 5 and m = 25",
        ));
    }
    let mut rows = Vec::new();
    let mut s = 0u64;
    while (s * s) < 4 * m {
        let delta = s as i64 * s as i64 - 4 * m as i64;
        let kern = squarefree_kernel(delta.unsigned_abs());
        let r = -(kern as i64);
        let t = match r.rem_euclid(4) {
            1 | 2 => isqrt((delta / r) as u64),
            _ => isqrt((delta / (4 * r)) as u64),
        };
        let f_divisors: Vec<u64> = (1..=t).filter(|f| t % f == 0).collect();
        let d_values = f_divisors.iter().map(|&f| delta / (f * f) as i64).collect();
        rows.push(DiscriminantRow {
            s,
            delta,
            t,
            r,
            f_divisors,
            d_values,
        });
        s += 1;
    }
    Ok(rows)
}

/// A congruence condition "p mod modulus lies in the residue set".
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CongruenceCondition {
    pub modulus: u64,
    pub residues: Vec<u64>,
}

impl CongruenceCondition {
    pub fn admits(&self, p: u64) -> bool {
        self.residues.contains(&(p % self.modulus))
    }
}

fn quadratic_residues(q: u64) -> Vec<u64> {
    let mut rs: Vec<u64> = (1..q).map(|x| x * x % q).collect();
    rs.sort_unstable();
    rs.dedup();
    rs
}

/// The modular condition on p equivalent to (d/p) = 1 for the tabulated
/// discriminants, given the standing congruences on p. Each condition is a
/// quadratic-residue class set computed from first principles: residues mod
/// the one prime of d not already constrained, or p = +-1 mod 8 for the
/// d = -96 family where only the factor 2 is new.
pub fn modular_conditions(d: i64) -> Result<CongruenceCondition, Error> {
    let modulus = match d {
        -20 => 5,
        -19 => 19,
        -11 => 11,
        -96 => 8,
        -51 => 17,
        -84 => 7,
        -91 => 13,
        _ => return Err(Error::Unsupported("discriminant outside the tabulated set")),
    };
    if modulus == 8 {
        // (2/p) = 1 iff p = +-1 mod 8
        return Ok(CongruenceCondition {
            modulus: 8,
            residues: vec![1, 7],
        });
    }
    Ok(CongruenceCondition {
        modulus,
        residues: quadratic_residues(modulus),
    })
}

/// Congruence battery for a 6-regular simple connected non-bipartite graph
/// at level p: p = 1 mod 24 and p a square mod 5, 7, 11, 13, 17 and 19.
pub fn admissibility_conditions() -> Vec<CongruenceCondition> {
    let mut conds = vec![CongruenceCondition {
        modulus: 24,
        residues: vec![1],
    }];
    for q in [5u64, 7, 11, 13, 17, 19] {
        conds.push(CongruenceCondition {
            modulus: q,
            residues: quadratic_residues(q),
        });
    }
    conds
}

pub fn is_admissible_6regular(p: u64) -> bool {
    admissibility_conditions().iter().all(|c| c.admits(p))
}

/// Number of admissible residue classes and the combined modulus.
pub fn admissible_class_count() -> (u64, u64) {
    let conds = admissibility_conditions();
    let count = conds.iter().map(|c| c.residues.len() as u64).product();
    let modulus = conds.iter().map(|c| c.modulus).product();
    (count, modulus)
}

/// First `limit_count` primes by a segmented sieve, filtered by the
/// 6-regular admissibility congruences; ascending.
pub fn scan_primes(limit_count: usize) -> Result<Vec<u64>, Error> {
    if limit_count > 1_000_000 {
        return Err(Error::TooLarge(
            "prime scan capped at the first 10^6 primes",
        ));
    }
    let primes = first_primes(limit_count);
    Ok(primes
        .into_iter()
        .filter(|&p| is_admissible_6regular(p))
        .collect())
}

/// First `count` primes via a segmented Eratosthenes sieve.
pub(crate) fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    let n = count as f64;
    let bound = if count < 6 {
        14u64
    } else {
        (n * (libm::log(n) + libm::log(libm::log(n)))) as u64 + 16
    };
    let root = isqrt(bound) + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root {
        if small[i as usize] {
            base.push(i);
            let mut j = i * i;
            while j <= root {
                small[j as usize] = false;
                j += i;
            }
        }
    }
    let mut primes = Vec::with_capacity(count);
    const SEG: u64 = 1 << 16;
    let mut low = 2u64;
    while low <= bound && primes.len() < count {
        let high = (low + SEG - 1).min(bound);
        let mut seg = vec![true; (high - low + 1) as usize];
        for &bp in &base {
            if bp * bp > high {
                break;
            }
            let mut start = low.div_ceil(bp) * bp;
            if start < bp * bp {
                start = bp * bp;
            }
            let mut j = start;
            while j <= high {
                seg[(j - low) as usize] = false;
                j += bp;
            }
        }
        for (off, &ok) in seg.iter().enumerate() {
            if ok {
                primes.push(low + off as u64);
                if primes.len() == count {
                    break;
                }
            }
        }
        low = high + 1;
    }
    primes
}

/// Class number of the level 2^5 p^3 order spanned by 1, 2pi, 2pj, 2pk:
/// (4p^2(p+1) + 4)/3 when p = 1 mod 3, else 4p^2(p+1)/3.
pub fn o2p_class_number(p: u64) -> Result<u128, Error> {
    if p == 3 || !is_prime(p) {
        return Err(Error::Unsupported("o2p class number needs a prime p != 3"));
    }
    let p = p as u128;
    let num = if p % 3 == 1 {
        4 * p * p * (p + 1) + 4
    } else {
        4 * p * p * (p + 1)
    };
    debug_assert_eq!(num % 3, 0);
    Ok(num / 3)
}
