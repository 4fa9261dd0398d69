//! Velu isogenies of prime degree, kernel-subgroup enumeration, chains and
//! their composition/decomposition, and exhaustive chain counting.
//!
//! Steps carry their x-coordinate map as an exact rational function N/D; the
//! composite kernel of a walk is identified by the squarefree polynomial
//! vanishing on the kernel's x-coordinates, which stays inside F_{p^2} even
//! when the kernel points themselves are not rational.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::ec::{pow_u128, torsion_basis, Curve, Point};
use crate::ff::{is_prime, Fp2};
use crate::poly2::Poly;
use crate::Error;

/// One prime-degree isogeny computed with Velu's formulas.
///
/// The kernel enters the formulas only through the x-coordinates of its
/// nonzero points (y appears squared, i.e. through the curve equation), so
/// a step can be built even when the kernel points are irrational but the
/// kernel subgroup is Frobenius-stable. A generator point is carried when
/// one is rational.
#[derive(Clone, Debug)]
pub struct IsogenyStep {
    domain: Curve,
    codomain: Curve,
    kernel_generator: Option<Point>,
    ell: u64,
    /// (x_Q, v_Q, u_Q) for one representative of each +/- pair in the kernel.
    terms: Vec<(Fp2, Fp2, Fp2)>,
    /// x-coordinates of the nonzero kernel points.
    kernel_xs: Vec<Fp2>,
    num_poly: Poly,
    den_poly: Poly,
}

impl IsogenyStep {
    /// Velu's formulas for the isogeny with kernel generated by a point of
    /// exact prime order ell. The 2-torsion case uses the specialization
    /// with the kernel x-coordinate as a curve-cubic root.
    pub fn velu(kernel: &Point, ell: u64) -> Result<IsogenyStep, Error> {
        if !is_prime(ell) {
            return Err(Error::Parameter("isogeny degree must be prime"));
        }
        if kernel.is_infinity() || !kernel.has_order_pp(ell, 1) {
            return Err(Error::Parameter(
                "kernel generator must have exact order ell",
            ));
        }
        let mut reps = Vec::new();
        let mut cur = *kernel;
        for _ in 0..((ell - 1) / 2).max(1) {
            reps.push(cur);
            cur = cur.add(kernel).expect("same curve");
        }
        let xs: Vec<Fp2> = reps.iter().map(|q| q.xy().expect("affine").0).collect();
        let mut step = Self::velu_from_kernel_xs(&kernel.curve(), &xs, ell)?;
        step.kernel_generator = Some(*kernel);
        Ok(step)
    }

    /// Velu's formulas from the x-coordinates of one representative per
    /// +/- pair of the kernel. The list must consist of division-polynomial
    /// roots closed under the multiplication maps of the subgroup.
    pub(crate) fn velu_from_kernel_xs(
        domain: &Curve,
        xs: &[Fp2],
        ell: u64,
    ) -> Result<IsogenyStep, Error> {
        if !is_prime(ell) {
            return Err(Error::Parameter("isogeny degree must be prime"));
        }
        if xs.len() as u64 != ((ell - 1) / 2).max(1) {
            return Err(Error::Parameter("wrong number of kernel x-coordinates"));
        }
        let f = domain.field();
        let a = domain.a();
        let b = domain.b();

        let zero = f.fp2_zero();
        let mut v_sum = zero;
        let mut w_sum = zero;
        let mut terms = Vec::new();
        for &xq in xs {
            let ysq = xq * xq * xq + a * xq + b;
            if ell == 2 && !ysq.is_zero() {
                return Err(Error::Parameter("2-torsion x must be a curve-cubic root"));
            }
            let gx = 3 * (xq * xq) + a;
            let (vq, uq) = if ysq.is_zero() {
                (gx, zero)
            } else {
                (2 * gx, 4 * ysq)
            };
            v_sum = v_sum + vq;
            w_sum = w_sum + uq + xq * vq;
            terms.push((xq, vq, uq));
        }
        let codomain = Curve::new(a - 5 * v_sum, b - 7 * w_sum)
            .map_err(|_| Error::Internal("velu codomain is singular"))?;

        // X(x) = x + sum v/(x - xq) + u/(x - xq)^2 as a fraction N/D
        let x = Poly::x(f);
        let one = Poly::constant(f, f.fp2_one());
        let mut den = one;
        for (xq, _, uq) in &terms {
            let lin = Poly::new(f, vec![-*xq, f.fp2_one()]);
            den = den.mul(&lin);
            if !uq.is_zero() {
                den = den.mul(&lin);
            }
        }
        let mut num = x.mul(&den);
        for (xq, vq, uq) in &terms {
            let lin = Poly::new(f, vec![-*xq, f.fp2_one()]);
            let d1 = den.div_exact(&lin);
            num = num.add(&d1.scale(*vq));
            if !uq.is_zero() {
                num = num.add(&d1.div_exact(&lin).scale(*uq));
            }
        }

        let kernel_xs = terms.iter().map(|(xq, _, _)| *xq).collect();
        Ok(IsogenyStep {
            domain: *domain,
            codomain,
            kernel_generator: None,
            ell,
            terms,
            kernel_xs,
            num_poly: num,
            den_poly: den,
        })
    }

    pub fn domain(&self) -> Curve {
        self.domain
    }

    pub fn codomain(&self) -> Curve {
        self.codomain
    }

    /// A rational kernel generator, when the step was built from one.
    pub fn kernel_generator(&self) -> Option<Point> {
        self.kernel_generator
    }

    pub fn degree(&self) -> u64 {
        self.ell
    }

    pub(crate) fn xmap_fraction(&self) -> (&Poly, &Poly) {
        (&self.num_poly, &self.den_poly)
    }

    /// Squarefree polynomial vanishing on the kernel x-coordinates.
    pub(crate) fn kernel_poly(&self) -> Poly {
        let f = self.domain.field();
        let mut k = Poly::constant(f, f.fp2_one());
        for xq in &self.kernel_xs {
            k = k.mul(&Poly::new(f, vec![-*xq, f.fp2_one()]));
        }
        k
    }

    /// Image of a point; kernel points map to the point at infinity.
    pub fn evaluate(&self, pt: &Point) -> Result<Point, Error> {
        if pt.curve() != self.domain {
            return Err(Error::Parameter("point is not on the isogeny domain"));
        }
        let (x, y) = match pt.xy() {
            None => return Ok(self.codomain.infinity()),
            Some(c) => c,
        };
        if self.kernel_xs.contains(&x) {
            return Ok(self.codomain.infinity());
        }
        let f = self.domain.field();
        let mut xs = x;
        let mut yfac = f.fp2_one();
        for (xq, vq, uq) in &self.terms {
            let inv = (x - *xq).inv().expect("not a kernel x");
            let inv2 = inv * inv;
            xs = xs + *vq * inv + *uq * inv2;
            yfac = yfac - (*vq * inv2 + 2 * (*uq * inv2 * inv));
        }
        self.codomain
            .point(xs, y * yfac)
            .map_err(|_| Error::Internal("velu image is off the codomain"))
    }

    /// All rational preimages of an affine point, found by solving the
    /// x-map relation and checking each lift exactly.
    pub fn preimages(&self, target: &Point) -> Result<Vec<Point>, Error> {
        if target.curve() != self.codomain {
            return Err(Error::Parameter("target is not on the codomain"));
        }
        let (tx, _) = match target.xy() {
            None => return Err(Error::Parameter("preimages of infinity are the kernel")),
            Some(c) => c,
        };
        let g = self.num_poly.sub(&self.den_poly.scale(tx));
        let mut out = Vec::new();
        for (x, _) in g.roots() {
            if let Some(cand) = self.domain.lift_x(x) {
                for pt in [cand, cand.neg()] {
                    if self.evaluate(&pt)? == *target && !out.contains(&pt) {
                        out.push(pt);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// The dual direction as a Velu step: the isogeny from the codomain
    /// whose kernel is the image of the domain's full ell-torsion.
    pub fn dual(&self) -> Result<IsogenyStep, Error> {
        let gens = ell_kernel_generators(&self.domain, self.ell)?;
        let other = gens
            .iter()
            .find(|g| !self.kernel_xs.contains(&g.xy().expect("affine").0))
            .ok_or(Error::Internal("no independent ell-torsion point"))?;
        let image = self.evaluate(other)?;
        IsogenyStep::velu(&image, self.ell)
    }
}

/// Generators of the ell + 1 order-ell subgroups of E[ell], one canonical
/// representative per subgroup, sorted.
pub fn ell_kernel_generators(curve: &Curve, ell: u64) -> Result<Vec<Point>, Error> {
    let (p_pt, q_pt) = torsion_basis(curve, ell, 1)
        .map_err(|_| Error::Parameter("ell-torsion is not rational over the working field"))?;
    let mut gens = Vec::with_capacity(ell as usize + 1);
    gens.push(canonical_subgroup_generator(&q_pt, ell));
    let mut cur = p_pt;
    for _ in 0..ell {
        gens.push(canonical_subgroup_generator(&cur, ell));
        cur = cur.add(&q_pt).expect("same curve");
    }
    gens.sort();
    let distinct: BTreeSet<Point> = gens.iter().copied().collect();
    if distinct.len() != ell as usize + 1 {
        return Err(Error::Internal(
            "kernel generators are not pairwise distinct",
        ));
    }
    Ok(gens)
}

/// The smallest nonzero multiple of g, a canonical label for the subgroup.
fn canonical_subgroup_generator(g: &Point, ell: u64) -> Point {
    let mut best = *g;
    let mut cur = *g;
    for _ in 1..ell {
        cur = cur.add(g).expect("same curve");
        if !cur.is_infinity() && cur < best {
            best = cur;
        }
    }
    best
}

/// An ordered chain of prime-degree isogeny steps, codomain of each step
/// equal to the domain of the next.
#[derive(Clone, Debug)]
pub struct IsogenyChain {
    steps: Vec<IsogenyStep>,
}

impl IsogenyChain {
    pub fn new(steps: Vec<IsogenyStep>) -> Result<IsogenyChain, Error> {
        for w in steps.windows(2) {
            if w[0].codomain != w[1].domain {
                return Err(Error::Parameter("chain steps do not compose"));
            }
            if w[0].ell != w[1].ell {
                return Err(Error::Parameter("chain mixes isogeny degrees"));
            }
        }
        Ok(IsogenyChain { steps })
    }

    pub fn empty() -> IsogenyChain {
        IsogenyChain { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[IsogenyStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn ell(&self) -> Option<u64> {
        self.steps.first().map(|s| s.ell)
    }

    pub fn domain(&self) -> Option<Curve> {
        self.steps.first().map(|s| s.domain)
    }

    pub fn codomain(&self) -> Option<Curve> {
        self.steps.last().map(|s| s.codomain)
    }

    /// Composite evaluation through every step.
    pub fn evaluate(&self, pt: &Point) -> Result<Point, Error> {
        let mut cur = *pt;
        for s in &self.steps {
            cur = s.evaluate(&cur)?;
        }
        Ok(cur)
    }
}

/// Whether consecutive steps undo each other: the pair backtracks iff the
/// composite kills the whole ell-torsion of the first domain, which is
/// robust against composing with automorphisms of the image.
pub fn has_backtracking(chain: &IsogenyChain) -> Result<bool, Error> {
    for w in chain.steps.windows(2) {
        if steps_backtrack(&w[0], &w[1])? {
            return Ok(true);
        }
    }
    Ok(false)
}

pub(crate) fn steps_backtrack(first: &IsogenyStep, second: &IsogenyStep) -> Result<bool, Error> {
    let gens = ell_kernel_generators(&first.domain, first.ell)?;
    steps_backtrack_with_basis(first, second, &gens[0], &gens[1])
}

pub(crate) fn steps_backtrack_with_basis(
    first: &IsogenyStep,
    second: &IsogenyStep,
    b0: &Point,
    b1: &Point,
) -> Result<bool, Error> {
    for b in [b0, b1] {
        if !second.evaluate(&first.evaluate(b)?)?.is_infinity() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Factors an isogeny with cyclic kernel of order ell^m into m Velu steps:
/// step i has kernel generated by [ell^(m-i)] of the pushed-forward point.
pub fn decompose_prime_power(kernel_gen: &Point, ell: u64, m: u32) -> Result<IsogenyChain, Error> {
    if m == 0 {
        return Err(Error::Parameter("need m >= 1"));
    }
    if !kernel_gen.has_order_pp(ell, m) {
        return Err(Error::Parameter(
            "kernel generator must have exact order ell^m",
        ));
    }
    let mut steps = Vec::with_capacity(m as usize);
    let mut pushed = *kernel_gen;
    for i in 1..=m {
        let k = pushed.mul(pow_u128(ell, m - i));
        let step = IsogenyStep::velu(&k, ell)?;
        pushed = step.evaluate(&pushed)?;
        steps.push(step);
    }
    IsogenyChain::new(steps)
}

/// Recovers a generator of the kernel of the composite of a chain without
/// backtracking, by pulling the last kernel generator back through the
/// earlier steps via rational preimages.
pub fn compose_chain_to_kernel(chain: &IsogenyChain) -> Result<Point, Error> {
    if chain.is_empty() {
        return Err(Error::Parameter("empty chain"));
    }
    if has_backtracking(chain)? {
        return Err(Error::Parameter("chain backtracks"));
    }
    let ell = chain.ell().expect("nonempty");
    let m = chain.len() as u32;
    let mut r = chain
        .steps
        .last()
        .expect("nonempty")
        .kernel_generator
        .ok_or(Error::Parameter(
            "last step carries no rational kernel generator",
        ))?;
    for step in chain.steps.iter().rev().skip(1) {
        let pre = step.preimages(&r)?;
        r = *pre
            .first()
            .ok_or(Error::Parameter("required division point is not rational"))?;
    }
    if !r.has_order_pp(ell, m) || !chain.evaluate(&r)?.is_infinity() {
        return Err(Error::Internal(
            "recovered kernel generator fails verification",
        ));
    }
    Ok(r)
}

/// Closed forms for the number of order-ell^m subgroups of (Z/ell^m)^2:
/// total (ell^(m+1) - 1)/(ell - 1), of which ell^m + ell^(m-1) are cyclic.
pub fn count_subgroups_formulas(ell: u64, m: u32) -> (u128, u128) {
    let total = (0..=m).map(|t| pow_u128(ell, t)).sum();
    let cyclic = pow_u128(ell, m) + pow_u128(ell, m.saturating_sub(1));
    (total, cyclic)
}

/// Exhaustive walk count of length-m chains from a starting curve; edges
/// are kernel subgroups. Without backtracking this counts walks none of
/// whose steps undo the previous one; with backtracking it counts distinct
/// composite isogenies, i.e. distinct composite kernel subgroups.
pub fn enumerate_chains(
    start: &Curve,
    ell: u64,
    m: u32,
    allow_backtracking: bool,
) -> Result<u64, Error> {
    let (without, with) = enumerate_chain_counts(start, ell, m)?;
    Ok(if allow_backtracking { with } else { without })
}

/// Both chain counts of `enumerate_chains` in one traversal.
pub fn enumerate_chain_counts(start: &Curve, ell: u64, m: u32) -> Result<(u64, u64), Error> {
    if m == 0 {
        return Err(Error::Parameter("need m >= 1"));
    }
    if (ell as u128 + 1) * pow_u128(ell, m - 1) > 1_000_000 {
        return Err(Error::TooLarge("chain tree exceeds the walk budget"));
    }
    let f = start.field();
    let mut ctx = WalkCtx {
        ell,
        neighbors: BTreeMap::new(),
        labels: BTreeSet::new(),
        clean_walks: 0,
    };
    let x = Poly::x(f);
    let one = Poly::constant(f, f.fp2_one());
    walk(&mut ctx, start, None, m, &x, &one, &one, true)?;
    Ok((ctx.clean_walks, ctx.labels.len() as u64))
}

struct WalkCtx {
    ell: u64,
    neighbors: BTreeMap<Curve, (Vec<IsogenyStep>, Point, Point)>,
    labels: BTreeSet<Vec<(u64, u64)>>,
    clean_walks: u64,
}

fn neighbor_steps(ctx: &mut WalkCtx, curve: &Curve) -> Result<Vec<IsogenyStep>, Error> {
    if !ctx.neighbors.contains_key(curve) {
        let gens = ell_kernel_generators(curve, ctx.ell)?;
        let steps = gens
            .iter()
            .map(|g| IsogenyStep::velu(g, ctx.ell))
            .collect::<Result<Vec<_>, _>>()?;
        ctx.neighbors.insert(*curve, (steps, gens[0], gens[1]));
    }
    Ok(ctx.neighbors[curve].0.clone())
}

fn torsion_pair(ctx: &mut WalkCtx, curve: &Curve) -> Result<(Point, Point), Error> {
    if !ctx.neighbors.contains_key(curve) {
        neighbor_steps(ctx, curve)?;
    }
    let (_, b0, b1) = &ctx.neighbors[curve];
    Ok((*b0, *b1))
}

#[allow(clippy::too_many_arguments)]
fn walk(
    ctx: &mut WalkCtx,
    curve: &Curve,
    prev: Option<&IsogenyStep>,
    remaining: u32,
    ncomp: &Poly,
    dcomp: &Poly,
    acc: &Poly,
    clean: bool,
) -> Result<(), Error> {
    if remaining == 0 {
        if clean {
            ctx.clean_walks += 1;
        }
        let label = acc
            .radical()
            .coeffs
            .iter()
            .map(|c| (c.c0(), c.c1()))
            .collect();
        ctx.labels.insert(label);
        return Ok(());
    }
    for step in neighbor_steps(ctx, curve)? {
        let step_clean = match prev {
            None => true,
            Some(p) => {
                let (b0, b1) = torsion_pair(ctx, &p.domain())?;
                !steps_backtrack_with_basis(p, &step, &b0, &b1)?
            }
        };
        let factor = compose_through_fraction(&step.kernel_poly(), ncomp, dcomp);
        let (nn, nd) = compose_xmap(&step, ncomp, dcomp);
        let nacc = acc.mul(&factor);
        walk(
            ctx,
            &step.codomain(),
            Some(&step),
            remaining - 1,
            &nn,
            &nd,
            &nacc,
            clean && step_clean,
        )?;
    }
    Ok(())
}

/// Numerator of k(N/D): sum of k_i N^i D^(deg k - i).
fn compose_through_fraction(k: &Poly, n: &Poly, d: &Poly) -> Poly {
    let f = k.field;
    let deg = k.degree();
    let (npow, dpow) = fraction_powers(n, d, deg);
    let mut out = Poly::zero(f);
    for (i, c) in k.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        out = out.add(&npow[i].mul(&dpow[deg - i]).scale(*c));
    }
    out
}

/// Composite x-map of step o (N/D) from the step's own fraction.
fn compose_xmap(step: &IsogenyStep, n: &Poly, d: &Poly) -> (Poly, Poly) {
    let (ns, ds) = step.xmap_fraction();
    let f = ns.field;
    let ell = ns.degree();
    let (npow, dpow) = fraction_powers(n, d, ell);
    let mut nn = Poly::zero(f);
    for (i, c) in ns.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        nn = nn.add(&npow[i].mul(&dpow[ell - i]).scale(*c));
    }
    let mut nd = Poly::zero(f);
    for (i, c) in ds.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        nd = nd.add(&npow[i].mul(&dpow[ell - i]).scale(*c));
    }
    (nn, nd)
}

fn fraction_powers(n: &Poly, d: &Poly, up_to: usize) -> (Vec<Poly>, Vec<Poly>) {
    let f = n.field;
    let mut npow = vec![Poly::constant(f, f.fp2_one())];
    let mut dpow = vec![Poly::constant(f, f.fp2_one())];
    for i in 1..=up_to {
        npow.push(npow[i - 1].mul(n));
        dpow.push(dpow[i - 1].mul(d));
    }
    (npow, dpow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::find_supersingular_curve;
    use crate::splitmix64;

    /// Classical modular polynomial of level 2, an independent cross-check
    /// oracle for 2-isogeny codomains.
    fn phi2(x: Fp2, y: Fp2) -> Fp2 {
        let f = x.field();
        let c = |v: i128| {
            let p = f.p() as i128;
            f.fp2((v.rem_euclid(p)) as i64, 0)
        };
        x * x * x + y * y * y - (x * x) * (y * y) + c(1488) * (x * x * y + x * y * y)
            - c(162000) * (x * x + y * y)
            + c(40773375) * (x * y)
            + c(8748000000) * (x + y)
            - c(157464000000000)
    }

    fn start_431() -> Curve {
        find_supersingular_curve(431).unwrap()
    }

    #[test]
    fn velu_kernel_annihilation() {
        let e = start_431();
        for ell in [2u64, 3] {
            let gens = ell_kernel_generators(&e, ell).unwrap();
            for g in &gens {
                let step = IsogenyStep::velu(g, ell).unwrap();
                assert!(step.evaluate(g).unwrap().is_infinity());
                assert!(step.evaluate(&g.mul(2)).unwrap().is_infinity());
                let other = gens.iter().find(|h| *h != g).unwrap();
                assert!(!step.evaluate(other).unwrap().is_infinity());
            }
        }
        let (p16, _) = torsion_basis(&e, 2, 4).unwrap();
        assert!(IsogenyStep::velu(&p16, 2).is_err());
        assert!(IsogenyStep::velu(&e.infinity(), 2).is_err());
    }

    #[test]
    fn velu_codomain_satisfies_modular_polynomial() {
        let e = start_431();
        let je = e.j_invariant();
        for g in ell_kernel_generators(&e, 2).unwrap() {
            let step = IsogenyStep::velu(&g, 2).unwrap();
            let jc = step.codomain().j_invariant();
            assert!(phi2(je, jc).is_zero(), "codomain j not 2-isogenous");
        }
    }

    #[test]
    fn velu_is_a_homomorphism() {
        let e = start_431();
        let gens = ell_kernel_generators(&e, 3).unwrap();
        let step = IsogenyStep::velu(&gens[0], 3).unwrap();
        let pts: Vec<Point> = crate::ec::PointStream::new(e).take(8).collect();
        let mut st = 41u64;
        for _ in 0..40 {
            let a = pts[(splitmix64(&mut st) % 8) as usize];
            let b = pts[(splitmix64(&mut st) % 8) as usize];
            let lhs = step.evaluate(&a.add(&b).unwrap()).unwrap();
            let rhs = step
                .evaluate(&a)
                .unwrap()
                .add(&step.evaluate(&b).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn dual_composite_kills_ell_torsion() {
        let e = start_431();
        for ell in [2u64, 3] {
            let gens = ell_kernel_generators(&e, ell).unwrap();
            let step = IsogenyStep::velu(&gens[0], ell).unwrap();
            let dual = step.dual().unwrap();
            assert_eq!(dual.codomain().j_invariant(), e.j_invariant());
            let (p_pt, q_pt) = torsion_basis(&e, ell, 1).unwrap();
            for i in 0..ell {
                for j in 0..ell {
                    let r = p_pt.mul(i as u128).add(&q_pt.mul(j as u128)).unwrap();
                    let img = dual.evaluate(&step.evaluate(&r).unwrap()).unwrap();
                    assert!(img.is_infinity());
                }
            }
        }
    }

    #[test]
    fn preimages_recover_fibers() {
        let e = start_431();
        for ell in [2u64, 3] {
            let gens = ell_kernel_generators(&e, ell).unwrap();
            let step = IsogenyStep::velu(&gens[0], ell).unwrap();
            let mut stream = crate::ec::PointStream::new(e);
            for _ in 0..5 {
                let pt = stream.next().unwrap();
                let img = step.evaluate(&pt).unwrap();
                if img.is_infinity() {
                    continue;
                }
                let pre = step.preimages(&img).unwrap();
                assert_eq!(pre.len(), ell as usize, "fiber size");
                assert!(pre.contains(&pt));
                for q in &pre {
                    assert_eq!(step.evaluate(q).unwrap(), img);
                }
            }
        }
    }

    #[test]
    fn kernel_generators_examples() {
        let e = start_431();
        // ell = 2: exactly the roots of x^3 + ax + b
        let gens = ell_kernel_generators(&e, 2).unwrap();
        assert_eq!(gens.len(), 3);
        let f = e.field();
        let cubic = Poly::new(f, vec![e.b(), e.a(), f.fp2_zero(), f.fp2_one()]);
        let roots: BTreeSet<(u64, u64)> = cubic
            .roots()
            .iter()
            .map(|(r, _)| (r.c0(), r.c1()))
            .collect();
        let gen_xs: BTreeSet<(u64, u64)> = gens
            .iter()
            .map(|g| {
                let (x, y) = g.xy().unwrap();
                assert!(y.is_zero());
                (x.c0(), x.c1())
            })
            .collect();
        assert_eq!(roots, gen_xs);
        // ell = 3: 4 generators with pairwise trivial subgroup intersections
        let gens = ell_kernel_generators(&e, 3).unwrap();
        assert_eq!(gens.len(), 4);
        for (i, g) in gens.iter().enumerate() {
            for h in gens.iter().skip(i + 1) {
                assert_ne!(*g, *h);
                assert_ne!(*g, h.neg());
            }
        }
    }

    #[test]
    fn kernel_generator_count_on_walked_curves() {
        // ell + 1 subgroups on ten curves reached by deterministic walks;
        // p = 59 has 2, 3 and 5 all dividing p + 1
        let e = find_supersingular_curve(59).unwrap();
        let mut curves = vec![e];
        let mut cur = e;
        for i in 0..9u64 {
            let gens = ell_kernel_generators(&cur, 2).unwrap();
            let step = IsogenyStep::velu(&gens[(i % 3) as usize], 2).unwrap();
            cur = step.codomain();
            curves.push(cur);
        }
        for c in &curves {
            for ell in [2u64, 3, 5] {
                assert_eq!(
                    ell_kernel_generators(c, ell).unwrap().len(),
                    ell as usize + 1
                );
            }
        }
    }

    #[test]
    fn backtracking_detection() {
        let e = start_431();
        let gens = ell_kernel_generators(&e, 2).unwrap();
        let step = IsogenyStep::velu(&gens[0], 2).unwrap();
        let single = IsogenyChain::new(vec![step.clone()]).unwrap();
        assert!(!has_backtracking(&single).unwrap());
        let dual = step.dual().unwrap();
        let pair = IsogenyChain::new(vec![step.clone(), dual]).unwrap();
        assert!(has_backtracking(&pair).unwrap());
        let next_gens = ell_kernel_generators(&step.codomain(), 2).unwrap();
        assert_eq!(
            next_gens
                .iter()
                .filter(|g| {
                    let nxt = IsogenyStep::velu(g, 2).unwrap();
                    steps_backtrack(&step, &nxt).unwrap()
                })
                .count(),
            1,
            "exactly one continuation undoes the step"
        );
    }

    fn random_torsion_point(e: &Curve, ell: u64, m: u32, st: &mut u64) -> Point {
        let (p_pt, q_pt) = torsion_basis(e, ell, m).unwrap();
        loop {
            let a = splitmix64(st) as u128 % pow_u128(ell, m);
            let b = splitmix64(st) as u128 % pow_u128(ell, m);
            let r = p_pt.mul(a).add(&q_pt.mul(b)).unwrap();
            if r.has_order_pp(ell, m) {
                return r;
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let e = start_431();
        let mut st = 2024u64;
        let r = random_torsion_point(&e, 2, 1, &mut st);
        let chain = decompose_prime_power(&r, 2, 1).unwrap();
        assert_eq!(chain.len(), 1);
        for _ in 0..5 {
            let r = random_torsion_point(&e, 2, 4, &mut st);
            let chain = decompose_prime_power(&r, 2, 4).unwrap();
            assert_eq!(chain.len(), 4);
            assert!(chain.evaluate(&r).unwrap().is_infinity());
            assert!(!has_backtracking(&chain).unwrap());
        }
        let r = random_torsion_point(&e, 2, 3, &mut st);
        assert!(decompose_prime_power(&r, 2, 4).is_err());
    }

    #[test]
    fn decompose_order_bookkeeping_with_division_point() {
        // needs E[32] rational: p = 479 has p + 1 = 2^5 * 3 * 5
        let e = find_supersingular_curve(479).unwrap();
        let mut st = 7u64;
        let above = random_torsion_point(&e, 2, 5, &mut st);
        let r = above.mul(2);
        assert!(r.has_order_pp(2, 4));
        let chain = decompose_prime_power(&r, 2, 4).unwrap();
        assert!(chain.evaluate(&r).unwrap().is_infinity());
        let img = chain.evaluate(&above).unwrap();
        assert!(
            img.has_order_pp(2, 1),
            "image of an order-32 point has exact order 2"
        );
    }

    #[test]
    fn decompose_no_backtracking_many() {
        let e = start_431();
        let mut st = 5u64;
        for _ in 0..25 {
            let r = random_torsion_point(&e, 2, 4, &mut st);
            assert!(!has_backtracking(&decompose_prime_power(&r, 2, 4).unwrap()).unwrap());
        }
        for _ in 0..25 {
            let r = random_torsion_point(&e, 3, 3, &mut st);
            assert!(!has_backtracking(&decompose_prime_power(&r, 3, 3).unwrap()).unwrap());
        }
    }

    #[test]
    fn compose_single_step_recovers_kernel() {
        let e = start_431();
        let gens = ell_kernel_generators(&e, 3).unwrap();
        let step = IsogenyStep::velu(&gens[1], 3).unwrap();
        let chain = IsogenyChain::new(vec![step]).unwrap();
        let r = compose_chain_to_kernel(&chain).unwrap();
        let g = gens[1];
        assert!(r == g || r == g.mul(2));
    }

    #[test]
    fn compose_decompose_roundtrip() {
        let e = start_431();
        let mut st = 99u64;
        for trial in 0..50 {
            let (ell, m) = if trial % 2 == 0 { (2u64, 4u32) } else { (3, 3) };
            let r = random_torsion_point(&e, ell, m, &mut st);
            let chain = decompose_prime_power(&r, ell, m).unwrap();
            let r2 = compose_chain_to_kernel(&chain).unwrap();
            assert!(r2.has_order_pp(ell, m));
            // r2 generates the same subgroup as r
            let mut found = false;
            let mut cur = r;
            for _ in 1..pow_u128(ell, m) {
                if cur == r2 {
                    found = true;
                    break;
                }
                cur = cur.add(&r).unwrap();
            }
            assert!(found, "recovered generator not in the original subgroup");
            let chain2 = decompose_prime_power(&r2, ell, m).unwrap();
            let js1: Vec<_> = chain
                .steps()
                .iter()
                .map(|s| s.codomain().j_invariant())
                .collect();
            let js2: Vec<_> = chain2
                .steps()
                .iter()
                .map(|s| s.codomain().j_invariant())
                .collect();
            assert_eq!(js1, js2);
        }
    }

    #[test]
    fn compose_kernel_unique_among_subgroups() {
        // exhaustive subgroup oracle at ell = 2, m = 3
        let e = start_431();
        let mut st = 314u64;
        let r = random_torsion_point(&e, 2, 3, &mut st);
        let chain = decompose_prime_power(&r, 2, 3).unwrap();
        let r0 = compose_chain_to_kernel(&chain).unwrap();
        assert!(r0.has_order_pp(2, 3));
        let (p_pt, q_pt) = torsion_basis(&e, 2, 3).unwrap();
        let span = |g1: (u128, u128), g2: (u128, u128)| -> BTreeSet<(u128, u128)> {
            let mut set = BTreeSet::new();
            for s in 0..8u128 {
                for t in 0..8u128 {
                    set.insert(((s * g1.0 + t * g2.0) % 8, (s * g1.1 + t * g2.1) % 8));
                }
            }
            set
        };
        let mut subgroups: BTreeSet<BTreeSet<(u128, u128)>> = BTreeSet::new();
        for a in 0..8u128 {
            for b in 0..8u128 {
                for c in 0..8u128 {
                    for d in 0..8u128 {
                        let s = span((a, b), (c, d));
                        if s.len() == 8 {
                            subgroups.insert(s);
                        }
                    }
                }
            }
        }
        let (total, _) = count_subgroups_formulas(2, 3);
        assert_eq!(subgroups.len() as u128, total);
        let mut killed = 0;
        for sg in &subgroups {
            let all_die = sg.iter().all(|&(i, j)| {
                let pt = p_pt.mul(i).add(&q_pt.mul(j)).unwrap();
                chain.evaluate(&pt).unwrap().is_infinity()
            });
            if all_die {
                killed += 1;
                let in_sub = |pt: &Point| {
                    let mut cur = e.infinity();
                    for _ in 0..8 {
                        if cur == *pt {
                            return true;
                        }
                        cur = cur.add(&r0).unwrap();
                    }
                    false
                };
                for &(i, j) in sg {
                    let pt = p_pt.mul(i).add(&q_pt.mul(j)).unwrap();
                    assert!(in_sub(&pt));
                }
            }
        }
        assert_eq!(killed, 1, "exactly one order-8 subgroup is annihilated");
    }

    #[test]
    fn subgroup_count_formulas() {
        assert_eq!(count_subgroups_formulas(2, 4), (31, 24));
        assert_eq!(count_subgroups_formulas(3, 5), (364, 324));
        for ell in [2u64, 3, 5, 7] {
            assert_eq!(
                count_subgroups_formulas(ell, 1),
                (ell as u128 + 1, ell as u128 + 1)
            );
        }
    }

    #[test]
    fn chain_counts_table_small() {
        let e = start_431();
        let (without, with) = enumerate_chain_counts(&e, 2, 4).unwrap();
        assert_eq!((without, with), (24, 31));
        let (without, with) = enumerate_chain_counts(&e, 3, 2).unwrap();
        assert_eq!((without, with), (12, 13));
    }

    #[test]
    fn chain_counts_second_base_field() {
        // closed forms hold over a second field; 102 = 2 * 3 * 17 keeps
        // both torsion levels rational at every curve
        let e = find_supersingular_curve(101).unwrap();
        for (ell, max_m) in [(2u64, 4u32), (3, 3)] {
            for m in 1..=max_m {
                let (without, with) = enumerate_chain_counts(&e, ell, m).unwrap();
                let (total, cyclic) = count_subgroups_formulas(ell, m);
                assert_eq!(without as u128, cyclic, "ell={ell} m={m}");
                assert_eq!(with as u128, total, "ell={ell} m={m}");
            }
        }
    }

    #[test]
    fn chain_counts_match_point_based_oracle() {
        // independent oracle: with E[ell^m] rational, identify each walk's
        // composite kernel by the set of (i, j) with [i]P + [j]Q killed
        let e = start_431();
        let (ell, m) = (2u64, 3u32);
        let (p_pt, q_pt) = torsion_basis(&e, ell, m).unwrap();
        let full = pow_u128(ell, m);
        let mut labels: BTreeSet<Vec<(u128, u128)>> = BTreeSet::new();
        let mut clean = 0u64;
        #[allow(clippy::too_many_arguments)]
        fn rec(
            cur: &Curve,
            prev: Option<&IsogenyStep>,
            remaining: u32,
            ell: u64,
            imgs: (Point, Point),
            clean_so_far: bool,
            clean: &mut u64,
            labels: &mut BTreeSet<Vec<(u128, u128)>>,
            full: u128,
        ) {
            if remaining == 0 {
                if clean_so_far {
                    *clean += 1;
                }
                let (ix, iy) = imgs;
                let mut label = Vec::new();
                for i in 0..full {
                    for j in 0..full {
                        if ix.mul(i).add(&iy.mul(j)).unwrap().is_infinity() {
                            label.push((i, j));
                        }
                    }
                }
                labels.insert(label);
                return;
            }
            for g in ell_kernel_generators(cur, ell).unwrap() {
                let step = IsogenyStep::velu(&g, ell).unwrap();
                let bt = match prev {
                    None => false,
                    Some(p) => steps_backtrack(p, &step).unwrap(),
                };
                let nimgs = (
                    step.evaluate(&imgs.0).unwrap(),
                    step.evaluate(&imgs.1).unwrap(),
                );
                rec(
                    &step.codomain(),
                    Some(&step),
                    remaining - 1,
                    ell,
                    nimgs,
                    clean_so_far && !bt,
                    clean,
                    labels,
                    full,
                );
            }
        }
        rec(
            &e,
            None,
            m,
            ell,
            (p_pt, q_pt),
            true,
            &mut clean,
            &mut labels,
            full,
        );
        let (without, with) = enumerate_chain_counts(&e, ell, m).unwrap();
        assert_eq!(clean, without);
        assert_eq!(labels.len() as u64, with);
        let (total, cyclic) = count_subgroups_formulas(ell, m);
        assert_eq!(without as u128, cyclic);
        assert_eq!(with as u128, total);
    }

    #[test]
    fn chain_counts_refusal_guard() {
        let e = start_431();
        assert!(matches!(
            enumerate_chains(&e, 2, 40, true),
            Err(Error::TooLarge(_))
        ));
    }
}
