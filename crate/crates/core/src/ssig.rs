//! Supersingular ell-isogeny graphs over F_{p^2}: construction by Velu
//! steps or by classical modular polynomial roots, the CGL walk, and the
//! congruences that keep the graphs free of short cycles.
//!
//! Vertices are j-invariants labeled "c0,c1"; edge identity is the kernel
//! subgroup. When p = 1 mod 12 each isogeny is merged with its dual into an
//! undirected edge.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ec::{find_supersingular_curve, Curve};
use crate::ff::{is_prime, Field, Fp2};
use crate::graph::LabeledMultigraph;
use crate::isogeny::{ell_kernel_generators, IsogenyStep};
use crate::poly2::Poly;
use crate::Error;

const PHI2_TEXT: &str = include_str!("../data/phi2.txt");
const PHI3_TEXT: &str = include_str!("../data/phi3.txt");

/// Classical modular polynomial loaded from the embedded coefficient table.
#[derive(Clone, Debug)]
pub struct ModularPolynomial {
    level: u64,
    /// Symmetrized monomials (i, j, c) standing for c X^i Y^j.
    monomials: Vec<(u32, u32, i128)>,
}

impl ModularPolynomial {
    /// The embedded table for ell in {2, 3}.
    pub fn classical(ell: u64) -> Result<ModularPolynomial, Error> {
        let text = match ell {
            2 => PHI2_TEXT,
            3 => PHI3_TEXT,
            _ => {
                return Err(Error::Unsupported(
                    "no classical modular polynomial table for this level",
                ))
            }
        };
        Self::parse(ell, text)
    }

    /// Parses "i j c" lines; symmetric entries are listed once and mirrored
    /// here. The polynomial must come out monic of degree level + 1 in Y.
    pub fn parse(level: u64, text: &str) -> Result<ModularPolynomial, Error> {
        let mut monomials = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (i, j, c) = (it.next(), it.next(), it.next());
            let (i, j, c) = match (i, j, c, it.next()) {
                (Some(i), Some(j), Some(c), None) => (i, j, c),
                _ => return Err(Error::Parameter("modular polynomial line is not 'i j c'")),
            };
            let i: u32 = i.parse().map_err(|_| Error::Parameter("bad exponent"))?;
            let j: u32 = j.parse().map_err(|_| Error::Parameter("bad exponent"))?;
            let c: i128 = c.parse().map_err(|_| Error::Parameter("bad coefficient"))?;
            monomials.push((i, j, c));
            if i != j {
                monomials.push((j, i, c));
            }
        }
        let poly = ModularPolynomial { level, monomials };
        let top = poly
            .monomials
            .iter()
            .filter(|&&(_, j, _)| j as u64 == level + 1)
            .map(|&(i, _, c)| (i, c))
            .collect::<Vec<_>>();
        if top != [(0u32, 1i128)] {
            return Err(Error::Parameter(
                "table is not monic of degree level + 1 in Y",
            ));
        }
        Ok(poly)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn eval(&self, x: Fp2, y: Fp2) -> Fp2 {
        let f = x.field();
        let mut acc = f.fp2_zero();
        for &(i, j, c) in &self.monomials {
            acc = acc + self.coeff(f, c) * x.pow(i as u128) * y.pow(j as u128);
        }
        acc
    }

    fn coeff(&self, f: Field, c: i128) -> Fp2 {
        f.fp2(c.rem_euclid(f.p() as i128) as i64, 0)
    }

    /// The univariate specialization Phi(j, Y) as a polynomial in Y.
    pub(crate) fn specialize(&self, j: Fp2) -> Poly {
        let f = j.field();
        let mut coeffs = vec![f.fp2_zero(); self.level as usize + 2];
        for &(i, jj, c) in &self.monomials {
            let term = self.coeff(f, c) * j.pow(i as u128);
            coeffs[jj as usize] = coeffs[jj as usize] + term;
        }
        Poly::new(f, coeffs)
    }
}

/// Multiset of neighbor j-invariants read off the modular polynomial.
#[derive(Clone, Debug)]
pub struct NeighborRoots {
    /// (j, multiplicity), sorted by the label encoding.
    pub roots: Vec<(Fp2, usize)>,
    /// Whether all level + 1 roots (with multiplicity) lie in F_{p^2};
    /// ordinary j-invariants may have neighbors only over extensions.
    pub complete: bool,
}

/// Roots with multiplicity of Phi_ell(j, Y) over F_{p^2}.
pub fn neighbors_modpoly(j: Fp2, ell: u64) -> Result<NeighborRoots, Error> {
    let phi = ModularPolynomial::classical(ell)?;
    let poly = phi.specialize(j);
    let roots = poly.roots();
    let found: usize = roots.iter().map(|(_, m)| m).sum();
    Ok(NeighborRoots {
        roots,
        complete: found as u64 == ell + 1,
    })
}

/// How edges of the isogeny graph are computed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BuildMethod {
    Velu,
    ModularPolynomial,
}

/// Parameters of a supersingular ell-isogeny graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SsigParams {
    pub p: u64,
    pub ell: u64,
    pub directed: bool,
    pub method: BuildMethod,
}

impl SsigParams {
    pub fn new(p: u64, ell: u64, directed: bool, method: BuildMethod) -> Result<Self, Error> {
        if !is_prime(p) || p < 5 {
            return Err(Error::Parameter("p must be a prime at least 5"));
        }
        if !is_prime(ell) || ell == p {
            return Err(Error::Parameter("ell must be a prime different from p"));
        }
        if !directed && p % 12 != 1 {
            return Err(Error::Parameter(
                "undirected output needs p = 1 mod 12 to identify isogenies with duals",
            ));
        }
        Ok(SsigParams {
            p,
            ell,
            directed,
            method,
        })
    }
}

pub fn j_label(j: Fp2) -> String {
    format!("{},{}", j.c0(), j.c1())
}

/// The x-coordinate lists of the kernels of the ell + 1 outgoing isogenies.
///
/// When the ell-torsion is rational the kernels come from torsion points;
/// otherwise (supersingular curves with Frobenius acting as a scalar) every
/// kernel subgroup is still Frobenius-stable and its x-coordinates are the
/// rational roots of the division polynomial, handled here for ell = 3.
fn kernel_x_sets(curve: &Curve, ell: u64) -> Result<Vec<Vec<Fp2>>, Error> {
    let p = curve.field().p();
    if (p + 1) % ell == 0 {
        let gens = ell_kernel_generators(curve, ell)?;
        let mut out = Vec::with_capacity(gens.len());
        for g in &gens {
            let mut xs = Vec::new();
            let mut cur = *g;
            for _ in 0..((ell - 1) / 2).max(1) {
                xs.push(cur.xy().expect("affine").0);
                cur = cur.add(g).expect("same curve");
            }
            xs.sort();
            out.push(xs);
        }
        out.sort();
        return Ok(out);
    }
    if ell != 3 {
        return Err(Error::Parameter(
            "kernels are only rational for ell dividing p + 1 or ell = 3",
        ));
    }
    // psi_3 = 3x^4 + 6a x^2 + 12b x - a^2
    let f = curve.field();
    let a = curve.a();
    let b = curve.b();
    let psi3 = Poly::new(f, vec![-(a * a), 12 * b, 6 * a, f.fp2_zero(), f.fp2(3, 0)]);
    let roots = psi3.roots();
    let total: usize = roots.iter().map(|(_, m)| m).sum();
    if total != 4 {
        return Err(Error::Internal(
            "3-division polynomial must split over F_{p^2}",
        ));
    }
    Ok(roots.into_iter().map(|(r, _)| vec![r]).collect())
}

/// Neighbor multiset of one vertex by Velu steps, as j-invariants.
pub fn neighbors_velu(curve: &Curve, ell: u64) -> Result<Vec<Fp2>, Error> {
    let mut out = Vec::new();
    for xs in kernel_x_sets(curve, ell)? {
        let step = IsogenyStep::velu_from_kernel_xs(curve, &xs, ell)?;
        out.push(step.codomain().j_invariant());
    }
    out.sort();
    Ok(out)
}

/// Builds the supersingular ell-isogeny graph over F_{p^2} by breadth-first
/// expansion from a starting supersingular curve. Vertex count equals the
/// Eichler class number H(p); every vertex has out-degree ell + 1 counting
/// multiplicity.
pub fn build(params: &SsigParams) -> Result<LabeledMultigraph, Error> {
    let start = find_supersingular_curve(params.p)?;
    let start_j = start.j_invariant();
    // representative curve per vertex for the velu method
    let mut curves: BTreeMap<String, Curve> = BTreeMap::new();
    curves.insert(j_label(start_j), start);
    let mut order: Vec<(String, Fp2)> = vec![(j_label(start_j), start_j)];
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    seen.insert(j_label(start_j), 0);
    let mut out_edges: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut head = 0usize;
    while head < order.len() {
        let (label, j) = order[head].clone();
        head += 1;
        let neighbor_js: Vec<Fp2> = match params.method {
            BuildMethod::Velu => {
                let curve = curves[&label];
                let mut js = Vec::new();
                for xs in kernel_x_sets(&curve, params.ell)? {
                    let step = IsogenyStep::velu_from_kernel_xs(&curve, &xs, params.ell)?;
                    let cj = step.codomain().j_invariant();
                    curves.entry(j_label(cj)).or_insert_with(|| step.codomain());
                    js.push(cj);
                }
                js.sort();
                js
            }
            BuildMethod::ModularPolynomial => {
                let nr = neighbors_modpoly(j, params.ell)?;
                if !nr.complete {
                    return Err(Error::Internal(
                        "supersingular vertex with neighbors outside F_{p^2}",
                    ));
                }
                let mut js = Vec::new();
                for (r, mult) in nr.roots {
                    for _ in 0..mult {
                        js.push(r);
                    }
                }
                js
            }
        };
        let mut labels = Vec::with_capacity(neighbor_js.len());
        for nj in neighbor_js {
            let nl = j_label(nj);
            if !seen.contains_key(&nl) {
                seen.insert(nl.clone(), order.len());
                order.push((nl.clone(), nj));
            }
            labels.push(nl);
        }
        out_edges.insert(label, labels);
    }

    let mut graph = LabeledMultigraph::new(params.directed);
    for (label, _) in &order {
        graph.add_vertex(label);
    }
    if params.directed {
        for (from, tos) in &out_edges {
            for to in tos {
                graph.add_edge(from, to);
            }
        }
        return Ok(graph);
    }
    // dual identification: the multiset of arcs must be symmetric, and each
    // unordered pair is stored once with half the total multiplicity
    let mut arc_mult: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (from, tos) in &out_edges {
        for to in tos {
            *arc_mult.entry((from.clone(), to.clone())).or_insert(0) += 1;
        }
    }
    for ((from, to), &m) in &arc_mult {
        if from < to {
            let back = arc_mult
                .get(&(to.clone(), from.clone()))
                .copied()
                .unwrap_or(0);
            if back != m {
                return Err(Error::Internal("arc multiset is not dual-symmetric"));
            }
            for _ in 0..m {
                graph.add_edge(from, to);
            }
        } else if from == to {
            // a loop and its dual are identified pairwise
            let merged = m.div_ceil(2);
            for _ in 0..merged {
                graph.add_edge(from, to);
            }
        }
    }
    Ok(graph)
}

/// Modulus M such that the ell-isogeny graph has no double edges whenever
/// p = 1 mod M: 420 for ell = 2 and 9240 for ell = 3.
pub fn simplicity_congruence(ell: u64) -> Result<u64, Error> {
    match ell {
        2 => Ok(420),
        3 => Ok(9240),
        _ => Err(Error::Unsupported(
            "simplicity congruences cover ell = 2 and 3",
        )),
    }
}

/// Non-backtracking walk on a 3-regular isogeny graph driven by input bits:
/// at each vertex the arrival edge is excluded, the two remaining edges are
/// ordered by codomain label, and the bit picks one. Returns the label of
/// the final vertex.
pub fn cgl_walk(
    graph: &LabeledMultigraph,
    start_vertex: &str,
    start_edge_from: &str,
    bits: &[u8],
) -> Result<String, Error> {
    if !graph.contains_vertex(start_vertex) || !graph.contains_vertex(start_edge_from) {
        return Err(Error::Parameter("walk endpoints must be graph vertices"));
    }
    let mut prev = String::from(start_edge_from);
    let mut cur = String::from(start_vertex);
    for &bit in bits {
        if bit > 1 {
            return Err(Error::Parameter("walk input must be bits"));
        }
        let mut nbrs = graph.neighbor_labels(&cur)?;
        if nbrs.len() != 3 {
            return Err(Error::Parameter("CGL walk needs a 3-regular graph"));
        }
        // drop one copy of the arrival edge
        match nbrs.iter().position(|n| *n == prev) {
            Some(i) => {
                nbrs.remove(i);
            }
            None => {
                return Err(Error::Parameter(
                    "arrival edge is not incident to the vertex",
                ))
            }
        }
        let next = nbrs[bit as usize].clone();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}
