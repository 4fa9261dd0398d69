//! Prime field F_p and the quadratic extension F_{p^2} = F_p(t), t^2 = s for
//! a fixed quadratic nonresidue s, plus the truncated polynomial powering
//! used by the supersingularity test.
//!
//! Elements carry their field context so cross-field mixups are caught at
//! runtime. The supported modulus range is p < 2^31; all intermediate
//! products go through 128-bit integers and cannot overflow.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::Error;

/// Largest supported modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

/// Deterministic trial-division primality test, adequate for the supported
/// range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// base^exp mod m by square-and-multiply.
pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Legendre symbol (a/q) for an odd prime q.
pub fn legendre(a: i64, q: u64) -> Result<i32, Error> {
    if q < 3 || q % 2 == 0 || !is_prime(q) {
        return Err(Error::Parameter("legendre: modulus must be an odd prime"));
    }
    let r = a.rem_euclid(q as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    Ok(if mod_pow(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    })
}

/// A prime field together with the fixed nonresidue defining F_{p^2}.
///
/// `s` is the smallest positive quadratic nonresidue mod p, found by linear
/// scan, so element labels are reproducible across runs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Field {
    p: u64,
    s: u64,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(p={}, s={})", self.p, self.s)
    }
}

impl Field {
    pub fn new(p: u64) -> Result<Self, Error> {
        if !(3..MAX_MODULUS).contains(&p) {
            return Err(Error::Parameter(
                "field modulus must be an odd prime below 2^31",
            ));
        }
        if !is_prime(p) {
            return Err(Error::Parameter("field modulus must be prime"));
        }
        let mut s = 2u64;
        while mod_pow(s, (p - 1) / 2, p) == 1 {
            s += 1;
        }
        Ok(Field { p, s })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The nonresidue s with t^2 = s in F_{p^2}.
    pub fn nonresidue(&self) -> u64 {
        self.s
    }

    pub fn fp(&self, value: i64) -> Fp {
        Fp {
            value: value.rem_euclid(self.p as i64) as u64,
            field: *self,
        }
    }

    pub fn fp_u(&self, value: u64) -> Fp {
        Fp {
            value: value % self.p,
            field: *self,
        }
    }

    pub fn fp2(&self, c0: i64, c1: i64) -> Fp2 {
        Fp2 {
            c0: c0.rem_euclid(self.p as i64) as u64,
            c1: c1.rem_euclid(self.p as i64) as u64,
            field: *self,
        }
    }

    pub fn fp2_u(&self, c0: u64, c1: u64) -> Fp2 {
        Fp2 {
            c0: c0 % self.p,
            c1: c1 % self.p,
            field: *self,
        }
    }

    pub fn fp2_zero(&self) -> Fp2 {
        self.fp2_u(0, 0)
    }

    pub fn fp2_one(&self) -> Fp2 {
        self.fp2_u(1, 0)
    }
}

/// Element of F_p.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp {
    value: u64,
    field: Field,
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.p)
    }
}

impl Fp {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, exp: u64) -> Fp {
        Fp {
            value: mod_pow(self.value, exp, self.field.p),
            field: self.field,
        }
    }

    pub fn inv(&self) -> Result<Fp, Error> {
        if self.value == 0 {
            return Err(Error::Parameter("division by zero"));
        }
        Ok(self.pow(self.field.p - 2))
    }

    pub fn legendre(&self) -> i32 {
        if self.value == 0 {
            0
        } else if mod_pow(self.value, (self.field.p - 1) / 2, self.field.p) == 1 {
            1
        } else {
            -1
        }
    }

    /// Canonical square root: the root with the smaller integer
    /// representative, or `None` for nonresidues.
    pub fn sqrt(&self) -> Option<Fp> {
        let r = tonelli_shanks(self.value, self.field.p)?;
        let other = (self.field.p - r) % self.field.p;
        Some(Fp {
            value: r.min(other),
            field: self.field,
        })
    }
}

fn check_same_field(a: Field, b: Field) {
    assert!(a == b, "mixed field parameters");
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        check_same_field(self.field, rhs.field);
        let mut v = self.value + rhs.value;
        if v >= self.field.p {
            v -= self.field.p;
        }
        Fp {
            value: v,
            field: self.field,
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        check_same_field(self.field, rhs.field);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + self.field.p - rhs.value
        };
        Fp {
            value: v,
            field: self.field,
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        check_same_field(self.field, rhs.field);
        Fp {
            value: ((self.value as u128 * rhs.value as u128) % self.field.p as u128) as u64,
            field: self.field,
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp {
            value: if self.value == 0 {
                0
            } else {
                self.field.p - self.value
            },
            field: self.field,
        }
    }
}

/// Tonelli-Shanks square root mod an odd prime. Returns any root.
fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    // write p - 1 = q * 2^s with q odd
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while mod_pow(z, (p - 1) / 2, p) == 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = ((tt as u128 * tt as u128) % p as u128) as u64;
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = mod_pow(c, 1u64 << (m - i - 1), p);
        m = i;
        c = ((b as u128 * b as u128) % p as u128) as u64;
        t = ((t as u128 * c as u128) % p as u128) as u64;
        r = ((r as u128 * b as u128) % p as u128) as u64;
    }
    Some(r)
}

/// Element c0 + c1*t of F_{p^2}, t^2 = s.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp2 {
    c0: u64,
    c1: u64,
    field: Field,
}

impl fmt::Debug for Fp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}t mod {})", self.c0, self.c1, self.field.p)
    }
}

impl Fp2 {
    pub fn c0(&self) -> u64 {
        self.c0
    }

    pub fn c1(&self) -> u64 {
        self.c1
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }

    /// True when the element lies in the prime subfield.
    pub fn is_base(&self) -> bool {
        self.c1 == 0
    }

    /// Galois conjugate c0 - c1*t (the p-power Frobenius).
    pub fn conj(&self) -> Fp2 {
        Fp2 {
            c0: self.c0,
            c1: if self.c1 == 0 {
                0
            } else {
                self.field.p - self.c1
            },
            field: self.field,
        }
    }

    /// Norm to F_p: c0^2 - s*c1^2.
    pub fn norm(&self) -> Fp {
        let p = self.field.p as u128;
        let c0 = self.c0 as u128;
        let c1 = self.c1 as u128;
        let n = (c0 * c0 + (p - self.field.s as u128) % p * ((c1 * c1) % p)) % p;
        Fp {
            value: n as u64,
            field: self.field,
        }
    }

    pub fn inv(&self) -> Result<Fp2, Error> {
        if self.is_zero() {
            return Err(Error::Parameter("division by zero"));
        }
        let n = self.norm().inv()?;
        let c = self.conj();
        Ok(Fp2 {
            c0: ((c.c0 as u128 * n.value as u128) % self.field.p as u128) as u64,
            c1: ((c.c1 as u128 * n.value as u128) % self.field.p as u128) as u64,
            field: self.field,
        })
    }

    pub fn pow(&self, mut exp: u128) -> Fp2 {
        let mut acc = self.field.fp2_one();
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// True iff the element is a square in F_{p^2}, decided through the norm.
    pub fn is_square(&self) -> bool {
        self.is_zero() || self.norm().legendre() != -1
    }

    /// Canonical square root in F_{p^2}, or `None` for nonsquares. Of the
    /// two roots the one with lexicographically smaller (c0, c1) is returned.
    pub fn sqrt(&self) -> Option<Fp2> {
        let f = self.field;
        if self.is_zero() {
            return Some(f.fp2_zero());
        }
        let pick = |r: Fp2| -> Fp2 {
            let n = -r;
            if (r.c0, r.c1) <= (n.c0, n.c1) {
                r
            } else {
                n
            }
        };
        if self.c1 == 0 {
            let c0 = Fp {
                value: self.c0,
                field: f,
            };
            if let Some(r) = c0.sqrt() {
                return Some(pick(f.fp2_u(r.value, 0)));
            }
            // c0 is a nonresidue, so c0/s is a residue and sqrt = y*t.
            let s_inv = f.fp_u(f.s).inv().expect("s is nonzero");
            let y = (c0 * s_inv).sqrt().expect("c0/s must be a residue");
            return Some(pick(f.fp2_u(0, y.value)));
        }
        // v = v0 + v1 t with v0^2 a root of x^2 - c0 x + s c1^2/4.
        let n = self.norm();
        let alpha = n.sqrt()?;
        let half = f.fp(2).inv().expect("p is odd");
        let c0 = Fp {
            value: self.c0,
            field: f,
        };
        let c1 = Fp {
            value: self.c1,
            field: f,
        };
        for cand in [(c0 + alpha) * half, (c0 - alpha) * half] {
            if cand.legendre() == 1 {
                let v0 = cand.sqrt().expect("verified residue");
                let v1 = c1 * half * v0.inv().expect("v0 nonzero");
                let r = f.fp2_u(v0.value, v1.value);
                if r * r == *self {
                    return Some(pick(r));
                }
            }
        }
        None
    }
}

impl Add for Fp2 {
    type Output = Fp2;
    fn add(self, rhs: Fp2) -> Fp2 {
        check_same_field(self.field, rhs.field);
        let p = self.field.p;
        let norm = |mut v: u64| {
            if v >= p {
                v -= p;
            }
            v
        };
        Fp2 {
            c0: norm(self.c0 + rhs.c0),
            c1: norm(self.c1 + rhs.c1),
            field: self.field,
        }
    }
}

impl Sub for Fp2 {
    type Output = Fp2;
    fn sub(self, rhs: Fp2) -> Fp2 {
        self + (-rhs)
    }
}

impl Neg for Fp2 {
    type Output = Fp2;
    fn neg(self) -> Fp2 {
        let p = self.field.p;
        Fp2 {
            c0: if self.c0 == 0 { 0 } else { p - self.c0 },
            c1: if self.c1 == 0 { 0 } else { p - self.c1 },
            field: self.field,
        }
    }
}

impl Mul for Fp2 {
    type Output = Fp2;
    fn mul(self, rhs: Fp2) -> Fp2 {
        check_same_field(self.field, rhs.field);
        let p = self.field.p as u128;
        let (a0, a1) = (self.c0 as u128, self.c1 as u128);
        let (b0, b1) = (rhs.c0 as u128, rhs.c1 as u128);
        let s = self.field.s as u128;
        let c0 = (a0 * b0 + s * ((a1 * b1) % p)) % p;
        let c1 = (a0 * b1 + a1 * b0) % p;
        Fp2 {
            c0: c0 as u64,
            c1: c1 as u64,
            field: self.field,
        }
    }
}

/// Scalar multiple by a small integer, convenient for curve formulas.
impl Mul<Fp2> for i64 {
    type Output = Fp2;
    fn mul(self, rhs: Fp2) -> Fp2 {
        rhs.field.fp2(self, 0) * rhs
    }
}

/// Coefficients of f^e mod x^(d+1) over F_p, computed by square-and-multiply
/// on truncated series. `f` is little-endian; the result has length d+1.
pub fn truncated_poly_pow(f: &[u64], e: u64, d: usize, p: u64) -> Result<Vec<u64>, Error> {
    if f.iter().all(|&c| c % p == 0) {
        return Err(Error::Parameter("truncated_poly_pow: zero polynomial"));
    }
    let base: Vec<u64> = f.iter().take(d + 1).map(|&c| c % p).collect();
    let mut acc = vec![0u64; d + 1];
    acc[0] = 1;
    if e == 0 {
        return Ok(acc);
    }
    for bit in (0..64 - e.leading_zeros()).rev() {
        acc = trunc_mul(&acc, &acc, d, p);
        if (e >> bit) & 1 == 1 {
            acc = trunc_mul(&acc, &base, d, p);
        }
    }
    Ok(acc)
}

fn trunc_mul(a: &[u64], b: &[u64], d: usize, p: u64) -> Vec<u64> {
    // Products are below 2^62 and at most ~2^14 terms are summed, so the
    // u128 accumulator needs a single reduction per coefficient.
    let mut out = vec![0u64; d + 1];
    for (n, slot) in out.iter_mut().enumerate() {
        let lo = (n + 1).saturating_sub(b.len());
        let hi = n.min(a.len() - 1);
        let mut acc: u128 = 0;
        for i in lo..=hi {
            acc += a[i] as u128 * b[n - i] as u128;
        }
        *slot = (acc % p as u128) as u64;
    }
    out
}
