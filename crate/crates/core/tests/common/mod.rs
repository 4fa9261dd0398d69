//! Shared oracles for the integration suites: exhaustive supersingular
//! j-invariant enumeration over F_{p^2} by point counting, independent of
//! both the Velu and the modular-polynomial machinery.

use ramanujan_core::ec::Curve;
use ramanujan_core::ff::{mod_pow, Field, Fp2};

/// Quadratic character table chi(x) for x in F_p.
pub fn chi_table(p: u64) -> Vec<i8> {
    let mut t = vec![0i8; p as usize];
    for x in 1..p {
        t[x as usize] = if mod_pow(x, (p - 1) / 2, p) == 1 {
            1
        } else {
            -1
        };
    }
    t
}

/// #E(F_{p^2}) by a character sum: the quadratic character of F_{p^2}
/// factors through the norm to F_p.
pub fn count_points_fp2(curve: &Curve, chi: &[i8]) -> u64 {
    let f = curve.field();
    let p = f.p();
    let mut sum: i64 = 0;
    for n in 0..p * p {
        let x = f.fp2_u(n % p, n / p);
        let rhs = x * x * x + curve.a() * x + curve.b();
        let norm = rhs.norm().value();
        sum += chi[norm as usize] as i64;
    }
    (p as i64 * p as i64 + 1 + sum) as u64
}

/// Every supersingular j-invariant in F_{p^2}, by exhaustive scan: a curve
/// over F_{p^2} is supersingular iff its point count is 1 mod p. Sorted by
/// (c0, c1). Quadratic in p^2, so only sensible for small p.
pub fn supersingular_j_exhaustive(field: Field) -> Vec<Fp2> {
    let p = field.p();
    let chi = chi_table(p);
    let mut out = Vec::new();
    for n in 0..p * p {
        let j = field.fp2_u(n % p, n / p);
        let curve = match Curve::from_j(j) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let count = count_points_fp2(&curve, &chi);
        if count % p == 1 % p {
            out.push(j);
        }
    }
    out
}
