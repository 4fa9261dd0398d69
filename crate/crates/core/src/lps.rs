//! LPS graphs: integer quaternion generator sets from four-square
//! decompositions, the Cayley graph on PSL_2(F_p), the tree-neighbor
//! matrices of the standard lattice, and the explicit correspondence
//! between generators and tree directions for both eps branches.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ff::{is_prime, legendre, Field};
use crate::graph::LabeledMultigraph;
use crate::Error;

/// Integer Hamilton quaternion x0 + x1 i + x2 j + x3 k.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct IntegerQuaternion {
    pub x0: i64,
    pub x1: i64,
    pub x2: i64,
    pub x3: i64,
}

impl IntegerQuaternion {
    pub fn new(x0: i64, x1: i64, x2: i64, x3: i64) -> Self {
        IntegerQuaternion { x0, x1, x2, x3 }
    }

    /// Reduced norm x0^2 + x1^2 + x2^2 + x3^2.
    pub fn norm(&self) -> i64 {
        self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn conj(&self) -> Self {
        IntegerQuaternion {
            x0: self.x0,
            x1: -self.x1,
            x2: -self.x2,
            x3: -self.x3,
        }
    }
}

fn isqrt_i(n: i64) -> i64 {
    let mut r = libm::sqrt(n as f64) as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The l + 1 integer solutions of l = x0^2 + x1^2 + x2^2 + x3^2 with x0 odd
/// and positive, by exhaustive search; sorted. The x1, x2, x3 of every
/// solution come out even.
pub fn four_square_solutions(l: u64) -> Result<Vec<IntegerQuaternion>, Error> {
    if !is_prime(l) || l % 4 != 1 {
        return Err(Error::Parameter(
            "four-square generators need a prime l = 1 mod 4",
        ));
    }
    let li = l as i64;
    let bound = isqrt_i(li);
    let mut out = Vec::new();
    let mut x0 = 1i64;
    while x0 <= bound {
        for x1 in -bound..=bound {
            for x2 in -bound..=bound {
                for x3 in -bound..=bound {
                    if x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3 == li {
                        out.push(IntegerQuaternion::new(x0, x1, x2, x3));
                    }
                }
            }
        }
        x0 += 2;
    }
    out.sort();
    if out.len() as u64 != l + 1 {
        return Err(Error::Internal("four-square solution count is off"));
    }
    Ok(out)
}

/// Element of PSL_2(F_p) stored as the canonical representative: scaled to
/// determinant one, then the lexicographically smaller of the two signs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ProjMatrix {
    m: [u64; 4],
    p: u64,
}

impl ProjMatrix {
    /// Canonicalizes a matrix whose determinant is a nonzero square mod p.
    pub fn new(entries: [i64; 4], field: Field) -> Result<ProjMatrix, Error> {
        let p = field.p();
        let m: Vec<u64> = entries
            .iter()
            .map(|&e| e.rem_euclid(p as i64) as u64)
            .collect();
        let det = field.fp_u(m[0]) * field.fp_u(m[3]) - field.fp_u(m[1]) * field.fp_u(m[2]);
        if det.is_zero() {
            return Err(Error::Parameter("projective matrix must be invertible"));
        }
        let mu = det
            .inv()
            .expect("nonzero")
            .sqrt()
            .ok_or(Error::Parameter("determinant is not a square: not in PSL2"))?;
        let scaled: [u64; 4] = core::array::from_fn(|i| (field.fp_u(m[i]) * mu).value());
        Ok(Self::pick_sign(scaled, p))
    }

    fn pick_sign(m: [u64; 4], p: u64) -> ProjMatrix {
        let neg: [u64; 4] = core::array::from_fn(|i| if m[i] == 0 { 0 } else { p - m[i] });
        ProjMatrix {
            m: if m <= neg { m } else { neg },
            p,
        }
    }

    pub fn identity(p: u64) -> ProjMatrix {
        ProjMatrix { m: [1, 0, 0, 1], p }
    }

    pub fn entries(&self) -> [u64; 4] {
        self.m
    }

    /// Group law; operands are already det-one representatives.
    pub fn mul(&self, other: &ProjMatrix) -> ProjMatrix {
        assert_eq!(self.p, other.p, "mixed moduli");
        let p = self.p as u128;
        let a = &self.m;
        let b = &other.m;
        let m: [u64; 4] = [
            ((a[0] as u128 * b[0] as u128 + a[1] as u128 * b[2] as u128) % p) as u64,
            ((a[0] as u128 * b[1] as u128 + a[1] as u128 * b[3] as u128) % p) as u64,
            ((a[2] as u128 * b[0] as u128 + a[3] as u128 * b[2] as u128) % p) as u64,
            ((a[2] as u128 * b[1] as u128 + a[3] as u128 * b[3] as u128) % p) as u64,
        ];
        Self::pick_sign(m, self.p)
    }

    /// Inverse of a det-one representative.
    pub fn inverse(&self) -> ProjMatrix {
        let p = self.p;
        let neg = |v: u64| if v == 0 { 0 } else { p - v };
        Self::pick_sign([self.m[3], neg(self.m[1]), neg(self.m[2]), self.m[0]], p)
    }

    pub fn label(&self) -> String {
        format!("{},{},{},{}", self.m[0], self.m[1], self.m[2], self.m[3])
    }
}

/// The l + 1 Cayley generators of PSL_2(F_p): the four-square solutions
/// mapped through (x0, x1, x2, x3) -> [[x0 + x1 e, x2 + x3 e],
/// [-x2 + x3 e, x0 - x1 e]] with e^2 = -1 mod p.
pub fn cayley_generators(l: u64, p: u64) -> Result<Vec<ProjMatrix>, Error> {
    if !is_prime(p) || p % 4 != 1 {
        return Err(Error::Parameter(
            "need a prime p = 1 mod 4 so that -1 is a square",
        ));
    }
    if p == l {
        return Err(Error::Parameter("p and l must be distinct"));
    }
    if legendre(p as i64, l)? != 1 {
        return Err(Error::Parameter(
            "p must be a square mod l (non-bipartite case)",
        ));
    }
    let field = Field::new(p)?;
    let eps = field.fp(-1).sqrt().expect("p = 1 mod 4").value() as i64;
    let sols = four_square_solutions(l)?;
    let mut gens = Vec::with_capacity(sols.len());
    for s in &sols {
        let m = [
            s.x0 + s.x1 * eps,
            s.x2 + s.x3 * eps,
            -s.x2 + s.x3 * eps,
            s.x0 - s.x1 * eps,
        ];
        gens.push(ProjMatrix::new(m, field)?);
    }
    gens.sort();
    gens.dedup();
    if gens.len() as u64 != l + 1 {
        return Err(Error::Internal(
            "cayley generators are not pairwise distinct",
        ));
    }
    for g in &gens {
        if !gens.contains(&g.inverse()) {
            return Err(Error::Internal(
                "generator set is not closed under inverses",
            ));
        }
    }
    Ok(gens)
}

/// Cayley graph of PSL_2(F_p) on the LPS generators, built by BFS closure
/// from the identity; reaching exactly (p^3 - p)/2 vertices doubles as a
/// consistency check of the generator set.
pub fn build_lps_graph(l: u64, p: u64) -> Result<LabeledMultigraph, Error> {
    let gens = cayley_generators(l, p)?;
    let expected = {
        let p = p as u128;
        (p * p * p - p) / 2
    };
    let mut index: BTreeMap<ProjMatrix, usize> = BTreeMap::new();
    let mut order: Vec<ProjMatrix> = Vec::new();
    let id = ProjMatrix::identity(p);
    index.insert(id, 0);
    order.push(id);
    let mut head = 0usize;
    let mut edges: Vec<(ProjMatrix, ProjMatrix)> = Vec::new();
    while head < order.len() {
        let v = order[head];
        head += 1;
        for g in &gens {
            let w = v.mul(g);
            if let alloc::collections::btree_map::Entry::Vacant(slot) = index.entry(w) {
                slot.insert(order.len());
                order.push(w);
            }
            if v < w {
                edges.push((v, w));
            }
        }
        if order.len() as u128 > expected {
            return Err(Error::Internal("closure exceeded the expected group order"));
        }
    }
    if order.len() as u128 != expected {
        return Err(Error::Internal(
            "closure stalled below the expected group order",
        ));
    }
    let mut graph = LabeledMultigraph::new(false);
    for v in &order {
        graph.add_vertex(&v.label());
    }
    for (u, v) in &edges {
        graph.add_edge(&u.label(), &v.label());
    }
    Ok(graph)
}

/// Integer 2x2 matrices indexing the l + 1 index-l sublattices of the
/// standard lattice: M_h = [[l, h], [0, 1]] for h = 0..l-1, then
/// M_l = [[1, 0], [0, l]].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TreeNeighborMatrix {
    pub h: u64,
    pub m: [[i64; 2]; 2],
}

pub fn tree_neighbor_matrices(l: u64) -> Result<Vec<TreeNeighborMatrix>, Error> {
    if !is_prime(l) {
        return Err(Error::Parameter("need l prime"));
    }
    let li = l as i64;
    let mut out: Vec<TreeNeighborMatrix> = (0..l)
        .map(|h| TreeNeighborMatrix {
            h,
            m: [[li, h as i64], [0, 1]],
        })
        .collect();
    out.push(TreeNeighborMatrix {
        h: l,
        m: [[1, 0], [0, li]],
    });
    Ok(out)
}

/// Which eps is used for the correspondence: the branch with
/// eps = e mod l or the one with eps = -e mod l, where e b = a mod l.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EpsBranch {
    PlusE,
    MinusE,
}

/// The bijection h -> alpha_h pairing tree directions with generators.
#[derive(Clone, Debug)]
pub struct CorrespondenceTable {
    pub l: u64,
    /// a^2 + b^2 = l with a odd, both positive.
    pub a: u64,
    pub b: u64,
    /// 0 <= e < l with e b = a mod l.
    pub e: u64,
    pub branch: EpsBranch,
    /// The eps residue mod l picked by the branch.
    pub eps_residue: u64,
    /// entries[h] = alpha_h for h = 0..=l.
    pub entries: Vec<IntegerQuaternion>,
}

/// Computes the correspondence table: alpha has direction h = l when
/// x0 - x1 eps = 0 mod l, and otherwise h = (x2 + x3 eps)/(x0 - x1 eps)
/// mod l.
pub fn generator_matrix_correspondence(
    l: u64,
    branch: EpsBranch,
) -> Result<CorrespondenceTable, Error> {
    let sols = four_square_solutions(l)?;
    let (a, b) = sum_of_two_squares(l)?;
    let e = (1..l)
        .find(|&e| (e * b) % l == a % l)
        .ok_or(Error::Internal("no e with eb = a"))?;
    let eps_residue = match branch {
        EpsBranch::PlusE => e,
        EpsBranch::MinusE => l - e,
    };
    let mut entries: Vec<Option<IntegerQuaternion>> = alloc::vec![None; l as usize + 1];
    for alpha in &sols {
        let h = direction_of(alpha, l, eps_residue);
        if entries[h as usize].replace(*alpha).is_some() {
            return Err(Error::Internal("correspondence is not a bijection"));
        }
    }
    let entries: Vec<IntegerQuaternion> = entries
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::Internal("correspondence misses a direction"))?;
    Ok(CorrespondenceTable {
        l,
        a,
        b,
        e,
        branch,
        eps_residue,
        entries,
    })
}

fn sum_of_two_squares(l: u64) -> Result<(u64, u64), Error> {
    let bound = isqrt_i(l as i64) as u64;
    for a in (1..=bound).step_by(2) {
        let rest = l - a * a;
        let b = isqrt_i(rest as i64) as u64;
        if b * b == rest {
            return Ok((a, b));
        }
    }
    Err(Error::Internal("no two-square decomposition found"))
}

fn direction_of(alpha: &IntegerQuaternion, l: u64, eps: u64) -> u64 {
    let li = l as i64;
    let eps = eps as i64;
    let den = (alpha.x0 - alpha.x1 * eps).rem_euclid(li);
    if den == 0 {
        return l;
    }
    let num = (alpha.x2 + alpha.x3 * eps).rem_euclid(li);
    let den_inv = crate::ff::mod_pow(den as u64, l - 2, l);
    (num as u64 * den_inv) % l
}

/// Exact l-integrality of sigma(alpha)^{-1} M_h: every entry of the
/// adjugate of sigma(alpha) times M_h must be divisible by l. Entries are
/// linear in eps, so any integer lift of the branch residue decides it.
pub fn correspondence_is_l_integral(
    alpha: &IntegerQuaternion,
    h: u64,
    l: u64,
    eps_residue: u64,
) -> bool {
    let li = l as i128;
    let eps = eps_residue as i128;
    let (x0, x1, x2, x3) = (
        alpha.x0 as i128,
        alpha.x1 as i128,
        alpha.x2 as i128,
        alpha.x3 as i128,
    );
    // adjugate of sigma(alpha): [[x0 - x1 e, -x2 - x3 e], [x2 - x3 e, x0 + x1 e]]
    let adj = [x0 - x1 * eps, -x2 - x3 * eps, x2 - x3 * eps, x0 + x1 * eps];
    let m: [i128; 4] = if h == l {
        [1, 0, 0, li]
    } else {
        [li, h as i128, 0, 1]
    };
    let prod = [
        adj[0] * m[0] + adj[1] * m[2],
        adj[0] * m[1] + adj[1] * m[3],
        adj[2] * m[0] + adj[3] * m[2],
        adj[2] * m[1] + adj[3] * m[3],
    ];
    prod.iter().all(|v| v.rem_euclid(li) == 0)
}
