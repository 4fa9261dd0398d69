//! Dense polynomial arithmetic over F_{p^2} with deterministic root
//! extraction. Degrees stay small (isogeny x-maps, modular polynomials,
//! kernel radicals), so everything is naive O(n^2).

use alloc::vec;
use alloc::vec::Vec;

use crate::ff::{Field, Fp2};

/// Little-endian coefficient vector; the empty vector is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Poly {
    pub coeffs: Vec<Fp2>,
    pub field: Field,
}

impl Poly {
    pub fn new(field: Field, coeffs: Vec<Fp2>) -> Poly {
        let mut p = Poly { coeffs, field };
        p.trim();
        p
    }

    pub fn zero(field: Field) -> Poly {
        Poly {
            coeffs: Vec::new(),
            field,
        }
    }

    pub fn constant(field: Field, c: Fp2) -> Poly {
        Poly::new(field, vec![c])
    }

    pub fn x(field: Field) -> Poly {
        Poly::new(field, vec![field.fp2_zero(), field.fp2_one()])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Fp2 {
        *self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = self.field.fp2_zero();
        let coeffs = (0..n)
            .map(|i| *self.coeffs.get(i).unwrap_or(&z) + *other.coeffs.get(i).unwrap_or(&z))
            .collect();
        Poly::new(self.field, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-self.field.fp2_one()))
    }

    pub fn scale(&self, c: Fp2) -> Poly {
        Poly::new(self.field, self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.field);
        }
        let mut out = vec![self.field.fp2_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Poly::new(self.field, out)
    }

    /// Remainder of self modulo a nonzero divisor.
    pub fn rem(&self, divisor: &Poly) -> Poly {
        let d = divisor.degree();
        if d == 0 {
            return Poly::zero(self.field);
        }
        let mut r = self.clone();
        let lead_inv = divisor.lead().inv().expect("nonzero divisor");
        while !r.is_zero() && r.degree() >= d {
            let shift = r.degree() - d;
            let q = r.lead() * lead_inv;
            for i in 0..=d {
                let idx = shift + i;
                let delta = divisor.coeffs[i] * q;
                r.coeffs[idx] = r.coeffs[idx] - delta;
            }
            r.trim();
        }
        r
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.lead().inv().expect("nonzero"))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| self.field.fp2(i as i64, 0) * c)
            .collect();
        Poly::new(self.field, coeffs)
    }

    /// Squarefree part self / gcd(self, self').
    pub fn radical(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.monic();
        }
        self.div_exact(&g).monic()
    }

    /// Exact division (caller guarantees divisibility).
    pub fn div_exact(&self, divisor: &Poly) -> Poly {
        let mut r = self.clone();
        let d = divisor.degree();
        let lead_inv = divisor.lead().inv().expect("nonzero divisor");
        let mut q = vec![self.field.fp2_zero(); self.coeffs.len().saturating_sub(d)];
        while !r.is_zero() && r.degree() >= d {
            let shift = r.degree() - d;
            let c = r.lead() * lead_inv;
            q[shift] = c;
            for i in 0..=d {
                let delta = divisor.coeffs[i] * c;
                r.coeffs[shift + i] = r.coeffs[shift + i] - delta;
            }
            r.trim();
            if d == 0 {
                break;
            }
        }
        debug_assert!(r.is_zero(), "division was not exact");
        Poly::new(self.field, q)
    }

    /// self^exp mod modulus by square-and-multiply.
    pub fn pow_mod(&self, mut exp: u128, modulus: &Poly) -> Poly {
        let mut acc = Poly::constant(self.field, self.field.fp2_one()).rem(modulus);
        let mut base = self.rem(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            exp >>= 1;
        }
        acc
    }

    /// Roots in F_{p^2} with multiplicities, sorted by (c0, c1). Roots in
    /// proper extensions are not reported.
    pub fn roots(&self) -> Vec<(Fp2, usize)> {
        assert!(!self.is_zero(), "roots of the zero polynomial");
        let field = self.field;
        let q = field.p() as u128 * field.p() as u128;
        // split part: gcd(x^q - x, f) collects the distinct F_{p^2} roots
        let f = self.monic();
        if f.degree() == 0 {
            return Vec::new();
        }
        let xq = Poly::x(field).pow_mod(q, &f);
        let split = f.gcd(&xq.sub(&Poly::x(field)));
        let mut roots = Vec::new();
        collect_roots(&split, &mut roots);
        let mut out: Vec<(Fp2, usize)> = Vec::new();
        for r in roots {
            let lin = Poly::new(field, vec![-r, field.fp2_one()]);
            let mut mult = 0usize;
            let mut g = f.clone();
            while !g.is_zero() && g.degree() > 0 && g.rem(&lin).is_zero() {
                g = g.div_exact(&lin);
                mult += 1;
            }
            out.push((r, mult));
        }
        out.sort_by_key(|(r, _)| (r.c0(), r.c1()));
        out
    }
}

/// Equal-degree splitting into linear factors, deterministic: delta ranges
/// over the fixed enumeration of F_{p^2}.
fn collect_roots(split: &Poly, out: &mut Vec<Fp2>) {
    let field = split.field;
    match split.degree() {
        0 => {}
        1 => {
            // monic x + c -> root -c
            let g = split.monic();
            out.push(-g.coeffs[0]);
        }
        _ => {
            let p = field.p();
            let s = (p as u128 * p as u128 - 1) / 2;
            let mut n = 0u64;
            loop {
                let delta = field.fp2_u(n % p, n / p);
                n += 1;
                let probe = Poly::new(field, vec![delta, field.fp2_one()]);
                let w = probe
                    .pow_mod(s, split)
                    .sub(&Poly::constant(field, field.fp2_one()));
                let g = split.gcd(&w);
                if g.degree() > 0 && g.degree() < split.degree() {
                    let h = split.div_exact(&g);
                    collect_roots(&g, out);
                    collect_roots(&h, out);
                    return;
                }
            }
        }
    }
}
