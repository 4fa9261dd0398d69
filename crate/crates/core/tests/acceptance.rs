//! Acceptance suite: one test per verification criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see the lines for passing
//! tests). Expected values are frozen from independent derivations; graph
//! builds are shared across criteria through lazy statics.

mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use ramanujan_core::ec::{find_supersingular_curve, supersingular_model_from_j};
use ramanujan_core::ff::Field;
use ramanujan_core::graph::LabeledMultigraph;
use ramanujan_core::isogeny::{count_subgroups_formulas, enumerate_chain_counts};
use ramanujan_core::lps::{
    build_lps_graph, correspondence_is_l_integral, four_square_solutions,
    generator_matrix_correspondence, EpsBranch, IntegerQuaternion,
};
use ramanujan_core::pizer::{
    admissible_class_count, discriminant_rows, eichler_class_number, modular_conditions,
    scan_primes,
};
use ramanujan_core::sidh::{
    attack, attack_via, decompose_in_basis, derive_shared, keygen, AttackResult, Side, SidhParams,
};
use ramanujan_core::splitmix64;
use ramanujan_core::ssig::{
    build, j_label, neighbors_modpoly, neighbors_velu, BuildMethod, SsigParams,
};

type GraphCache =
    std::sync::Mutex<std::collections::BTreeMap<(u64, u64, bool), &'static LabeledMultigraph>>;

fn ssig_graph(p: u64, ell: u64, method: BuildMethod) -> &'static LabeledMultigraph {
    static CACHE: OnceLock<GraphCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::BTreeMap::new()));
    let key = (p, ell, method == BuildMethod::Velu);
    let mut guard = cache.lock().unwrap();
    if let Some(g) = guard.get(&key) {
        return g;
    }
    let params = SsigParams::new(p, ell, false, method).unwrap();
    let graph = Box::leak(Box::new(build(&params).unwrap()));
    guard.insert(key, graph);
    graph
}

fn lps_graph_5_29() -> &'static LabeledMultigraph {
    static G: OnceLock<LabeledMultigraph> = OnceLock::new();
    G.get_or_init(|| build_lps_graph(5, 29).unwrap())
}

#[test]
fn criterion_01_chain_counts() {
    let start = find_supersingular_curve(431).unwrap();
    let table = [
        (2u64, 4u32, 24u64, 31u64),
        (2, 5, 48, 63),
        (2, 6, 96, 127),
        (2, 7, 192, 255),
        (3, 4, 108, 121),
        (3, 5, 324, 364),
    ];
    for (ell, m, without, with) in table {
        let got = enumerate_chain_counts(&start, ell, m).unwrap();
        assert_eq!(got, (without, with), "ell={ell} m={m}");
    }
    for ell in [2u64, 3] {
        for m in 1..=5u32 {
            let (without, with) = enumerate_chain_counts(&start, ell, m).unwrap();
            let (total, cyclic) = count_subgroups_formulas(ell, m);
            assert_eq!(
                without as u128, cyclic,
                "closed form (cyclic) ell={ell} m={m}"
            );
            assert_eq!(with as u128, total, "closed form (total) ell={ell} m={m}");
        }
    }
    println!("acceptance criterion 1 (chain count table and closed forms): PASS");
}

#[test]
fn criterion_02_ssig_structure() {
    let h = eichler_class_number(9241).unwrap();
    assert_eq!(h, 770);
    let g2 = ssig_graph(9241, 2, BuildMethod::Velu);
    assert_eq!(g2.vertex_count() as u64, h);
    let r2 = g2.analyze().unwrap();
    assert_eq!(r2.regular_degree, Some(3));
    assert!(r2.connected);
    assert_eq!((r2.loop_count, r2.multi_edge_count), (0, 0), "simple");
    let g3 = ssig_graph(9241, 3, BuildMethod::Velu);
    assert_eq!(g3.vertex_count() as u64, h);
    let r3 = g3.analyze().unwrap();
    assert_eq!(r3.regular_degree, Some(4));
    assert!(r3.connected);
    assert_eq!((r3.loop_count, r3.multi_edge_count), (0, 0), "simple");

    // independent enumeration checks on the vertex set:
    // the 2- and 3-isogeny expansions agree on the whole set,
    let v2: BTreeSet<&String> = g2.labels().iter().collect();
    let v3: BTreeSet<&String> = g3.labels().iter().collect();
    assert_eq!(v2, v3);
    // the set is closed under the p-power Frobenius (c1 negation),
    let f = Field::new(9241).unwrap();
    for label in g2.labels() {
        let parts: Vec<u64> = label.split(',').map(|t| t.parse().unwrap()).collect();
        let conj = f.fp2_u(parts[0], (9241 - parts[1]) % 9241);
        assert!(v2.contains(&j_label(conj)), "Frobenius closure at {label}");
    }
    // and its base-field members equal the independent point-count scan.
    let in_fp: BTreeSet<u64> = g2
        .labels()
        .iter()
        .filter(|l| l.ends_with(",0"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    let scanned: BTreeSet<u64> = ramanujan_core::ec::supersingular_j_in_fp(f)
        .into_iter()
        .collect();
    assert_eq!(in_fp, scanned);
    println!("acceptance criterion 2 (ssig vertex counts and structure at 9241): PASS");
}

#[test]
fn criterion_03_ssig_ramanujan() {
    for (ell, degree) in [(2u64, 3.0f64), (3, 4.0)] {
        let g = ssig_graph(9241, ell, BuildMethod::Velu);
        let eigs = g.full_spectrum().unwrap();
        let bound = 2.0 * (ell as f64).sqrt() + 1e-9;
        let top = *eigs.last().unwrap();
        assert!((top - degree).abs() <= 1e-9, "top eigenvalue is the degree");
        for &e in &eigs[..eigs.len() - 1] {
            assert!(
                e.abs() <= bound,
                "ell={ell}: eigenvalue {e} violates the bound"
            );
        }
        assert!(g.is_ramanujan(ell, 1e-9).unwrap());
    }
    println!("acceptance criterion 3 (ssig spectra meet the Ramanujan bound): PASS");
}

#[test]
fn criterion_04_lps_structure_and_spectrum() {
    let g = lps_graph_5_29();
    assert_eq!(g.vertex_count(), 12180, "(29^3 - 29)/2 vertices");
    let r = g.analyze().unwrap();
    assert_eq!(r.regular_degree, Some(6));
    assert!(r.connected);
    assert!(!r.bipartite);
    assert_eq!((r.loop_count, r.multi_edge_count), (0, 0), "simple");
    let second = g.second_eigenvalue_sparse(1e-7).unwrap();
    let bound = 2.0 * 5.0f64.sqrt() + 1e-6;
    assert!(
        second <= bound,
        "second eigenvalue {second} exceeds {bound}"
    );
    println!(
        "acceptance criterion 4 (LPS(5,29) structure, second eigenvalue {second:.6} <= 2 sqrt 5): PASS"
    );
}

fn q(x0: i64, x1: i64, x2: i64, x3: i64) -> IntegerQuaternion {
    IntegerQuaternion::new(x0, x1, x2, x3)
}

#[test]
fn criterion_05_correspondence_tables() {
    // published reference tables, frozen verbatim
    let printed_l5_plus = [
        q(1, -2, 0, 0),
        q(1, 0, 0, -2),
        q(1, 0, 2, 0),
        q(1, 0, -2, 0),
        q(1, 0, 0, 2),
        q(1, 2, 0, 0),
    ];
    let printed_l5_minus = [
        q(1, 2, 0, 0),
        q(1, 0, 0, 2),
        q(1, 0, 2, 0),
        q(1, 0, -2, 0),
        q(1, 0, 0, -2),
        q(1, -2, 0, 0),
    ];
    let printed_l13_plus = [
        q(3, -2, 0, 0),
        q(3, 0, 0, -2),
        q(1, -2, -2, -2),
        q(1, -2, 2, -2),
        q(1, 2, 2, 2),
        q(3, 0, 2, 0),
        q(1, 2, -2, 2),
        q(1, 2, 2, -2),
        q(3, 0, -2, 0),
        q(1, 2, -2, -2),
        q(1, -2, -2, 2),
        q(1, -2, 2, 2),
        q(3, 0, 0, 2),
        q(3, 2, 0, 0),
    ];
    let printed_l13_minus = [
        q(3, 2, 0, 0),
        q(3, 0, 0, 2),
        q(1, 2, -2, 2),
        q(1, 2, 2, 2),
        q(1, -2, 2, -2),
        q(3, 0, 2, 0),
        q(1, -2, -2, -2),
        q(1, -2, 2, 2),
        q(3, 0, -2, 0),
        q(1, -2, -2, 2),
        q(1, 2, -2, -2),
        q(1, 2, 2, -2),
        q(3, 0, 0, -2),
        q(3, -2, 0, 0),
    ];
    let cases: [(u64, EpsBranch, &[IntegerQuaternion]); 4] = [
        (5, EpsBranch::PlusE, &printed_l5_plus),
        (5, EpsBranch::MinusE, &printed_l5_minus),
        (13, EpsBranch::PlusE, &printed_l13_plus),
        (13, EpsBranch::MinusE, &printed_l13_minus),
    ];
    let mut mismatches = Vec::new();
    let mut printed_integrality_failures = Vec::new();
    for (l, branch, printed) in cases {
        let table = generator_matrix_correspondence(l, branch).unwrap();
        // the computed table always passes the independent integrality check
        for (h, alpha) in table.entries.iter().enumerate() {
            assert!(
                correspondence_is_l_integral(alpha, h as u64, l, table.eps_residue),
                "computed table fails integrality at l={l} h={h}"
            );
        }
        for (h, expected) in printed.iter().enumerate() {
            if &table.entries[h] != expected {
                mismatches.push(format!(
                    "l={l} branch={branch:?} h={h}: computed {:?}, printed {:?}",
                    table.entries[h], expected
                ));
            }
            if !correspondence_is_l_integral(expected, h as u64, l, table.eps_residue) {
                printed_integrality_failures.push(format!(
                    "l={l} branch={branch:?} h={h}: printed {expected:?} is not l-integral"
                ));
            }
        }
    }
    if mismatches.is_empty() && printed_integrality_failures.is_empty() {
        println!("acceptance criterion 5 (correspondence tables cell-for-cell): PASS");
    } else {
        println!("acceptance criterion 5 (correspondence tables cell-for-cell): FAIL");
        panic!(
            "the published tables disagree with the l-integrality definition on the k-cells; \
             the computed tables pass the integrality check in every cell.\n\
             cell mismatches:\n  {}\nprinted cells failing integrality:\n  {}",
            mismatches.join("\n  "),
            printed_integrality_failures.join("\n  ")
        );
    }
}

#[test]
fn criterion_06_jacobi_counts() {
    for l in [5u64, 13, 17, 29] {
        let sols = four_square_solutions(l).unwrap();
        assert_eq!(sols.len() as u64, l + 1, "l={l}");
    }
    println!("acceptance criterion 6 (four-square solution counts): PASS");
}

#[test]
fn criterion_07_pizer_scan() {
    let found = scan_primes(1_000_000).unwrap();
    assert_eq!(found.len(), 1670);
    assert_eq!(found.first(), Some(&53881));
    assert_eq!(eichler_class_number(53881).unwrap(), 4490);
    println!("acceptance criterion 7 (prime scan: 1670 admissible, first 53881): PASS");
}

type DiscRow5 = (u64, i64, u64, i64, &'static [u64], &'static [i64]);

#[test]
fn criterion_08_pizer_tables() {
    // discriminant tables for m = 5 and m = 25
    let rows = discriminant_rows(5).unwrap();
    let expect5: [DiscRow5; 5] = [
        (0, -20, 1, -5, &[1], &[-20]),
        (1, -19, 1, -19, &[1], &[-19]),
        (2, -16, 2, -1, &[1, 2], &[-16, -4]),
        (3, -11, 1, -11, &[1], &[-11]),
        (4, -4, 1, -1, &[1], &[-4]),
    ];
    assert_eq!(rows.len(), expect5.len());
    for (row, (s, delta, t, r, f, d)) in rows.iter().zip(expect5.iter()) {
        assert_eq!(
            (
                row.s,
                row.delta,
                row.t,
                row.r,
                row.f_divisors.as_slice(),
                row.d_values.as_slice()
            ),
            (*s, *delta, *t, *r, *f, *d)
        );
    }
    let rows = discriminant_rows(25).unwrap();
    let expect25: [(u64, i64, u64, i64, &[u64]); 10] = [
        (0, -100, 5, -1, &[1, 5]),
        (1, -99, 3, -11, &[1, 3]),
        (2, -96, 4, -6, &[1, 2, 4]),
        (3, -91, 1, -91, &[1]),
        (4, -84, 1, -21, &[1]),
        (5, -75, 5, -3, &[1, 5]),
        (6, -64, 4, -1, &[1, 2, 4]),
        (7, -51, 1, -51, &[1]),
        (8, -36, 3, -1, &[1, 3]),
        (9, -19, 1, -19, &[1]),
    ];
    assert_eq!(rows.len(), expect25.len());
    for (row, (s, delta, t, r, f)) in rows.iter().zip(expect25.iter()) {
        assert_eq!(
            (row.s, row.delta, row.t, row.r, row.f_divisors.as_slice()),
            (*s, *delta, *t, *r, *f)
        );
    }
    // modular condition residue sets
    let printed: [(i64, u64, &[u64]); 7] = [
        (-20, 5, &[1, 4]),
        (-19, 19, &[1, 4, 5, 6, 7, 9, 11, 16, 17]),
        (-11, 11, &[1, 3, 4, 5, 9]),
        (-96, 8, &[1, 7]),
        (-51, 17, &[1, 2, 4, 8, 9, 13, 15, 16]),
        (-84, 7, &[1, 2, 4]),
        (-91, 13, &[1, 3, 4, 9, 10, 12]),
    ];
    for (d, modulus, residues) in printed {
        let c = modular_conditions(d).unwrap();
        assert_eq!(
            (c.modulus, c.residues.as_slice()),
            (modulus, residues),
            "d={d}"
        );
    }
    let (classes, modulus) = admissible_class_count();
    assert_eq!(classes, 12960);
    assert_eq!(modulus, 38_798_760);
    println!("acceptance criterion 8 (discriminant and condition tables, 12960 classes): PASS");
}

#[test]
fn criterion_09_sidh_roundtrip_and_attack() {
    let params = SidhParams::setup(2, 4, 3, 3, 1, -1).unwrap();
    assert_eq!(params.p, 431);
    let mut st = 0x5eedu64;
    let sample = |ell: u64, e: u32, st: &mut u64| -> (u128, u128) {
        let full = ramanujan_core::ec::pow_u128(ell, e);
        loop {
            let m = splitmix64(st) as u128 % full;
            let n = splitmix64(st) as u128 % full;
            if m % ell as u128 != 0 || n % ell as u128 != 0 {
                return (m, n);
            }
        }
    };
    for trial in 0..20 {
        let sa = sample(2, 4, &mut st);
        let sb = sample(3, 3, &mut st);
        let ka = keygen(&params, Side::A, sa).unwrap();
        let kb = keygen(&params, Side::B, sb).unwrap();
        let ja = derive_shared(&params, Side::A, sa, &kb.public).unwrap();
        let jb = derive_shared(&params, Side::B, sb, &ka.public).unwrap();
        assert_eq!(ja, jb, "exchange {trial}");
        match attack(&params, &ka.public, &kb.public).unwrap() {
            AttackResult::Recovered { shared_j, .. } => assert_eq!(shared_j, ja, "attack {trial}"),
            AttackResult::Failed { paths_tried } => {
                panic!("attack {trial} failed after {paths_tried} paths")
            }
        }
        if trial == 0 {
            // the reduction also runs through the other side
            match attack_via(&params, &ka.public, &kb.public, Side::B).unwrap() {
                AttackResult::Recovered { shared_j, .. } => assert_eq!(shared_j, ja),
                AttackResult::Failed { .. } => panic!("B-side attack failed"),
            }
        }
    }
    // basis decomposition round-trips
    let (p_pt, q_pt) = params.basis_a;
    for _ in 0..100 {
        let (m, n) = (
            splitmix64(&mut st) as u128 % 16,
            splitmix64(&mut st) as u128 % 16,
        );
        let r = p_pt.mul(m).add(&q_pt.mul(n)).unwrap();
        assert_eq!(decompose_in_basis(&r, &p_pt, &q_pt, 2, 4).unwrap(), (m, n));
    }
    println!("acceptance criterion 9 (SIDH round trip and attack, 20 trials): PASS");
}

#[test]
fn criterion_10_velu_modpoly_cross_validation() {
    let f = Field::new(9241).unwrap();
    for ell in [2u64, 3] {
        // the two build methods agree edge-for-edge on the whole graph
        let velu_graph = ssig_graph(9241, ell, BuildMethod::Velu);
        let modp_graph = ssig_graph(9241, ell, BuildMethod::ModularPolynomial);
        assert_eq!(
            velu_graph.export(ramanujan_core::graph::ExportFormat::Json),
            modp_graph.export(ramanujan_core::graph::ExportFormat::Json),
            "ell={ell}"
        );
        // and per-vertex neighbor multisets agree on 50 sampled vertices
        let labels = velu_graph.labels();
        let mut st = 0xc0de + ell;
        for _ in 0..50 {
            let label = &labels[(splitmix64(&mut st) % labels.len() as u64) as usize];
            let parts: Vec<u64> = label.split(',').map(|t| t.parse().unwrap()).collect();
            let j = f.fp2_u(parts[0], parts[1]);
            let curve = supersingular_model_from_j(j).unwrap();
            let velu_js: Vec<(u64, u64)> = neighbors_velu(&curve, ell)
                .unwrap()
                .into_iter()
                .map(|x| (x.c0(), x.c1()))
                .collect();
            let nr = neighbors_modpoly(j, ell).unwrap();
            assert!(nr.complete);
            let mut modp_js = Vec::new();
            for (r, mult) in nr.roots {
                for _ in 0..mult {
                    modp_js.push((r.c0(), r.c1()));
                }
            }
            assert_eq!(velu_js, modp_js, "ell={ell} vertex={label}");
        }
    }
    println!("acceptance criterion 10 (velu and modular polynomial neighbors agree): PASS");
}

/// Supporting check for criterion 2's enumeration claim at a size where a
/// fully exhaustive scan over F_{p^2} is feasible: at p = 101 the graph
/// expansion finds exactly the j-invariants the point-count scan finds.
#[test]
fn supporting_exhaustive_enumeration_at_101() {
    let f = Field::new(101).unwrap();
    let scanned = common::supersingular_j_exhaustive(f);
    assert_eq!(scanned.len() as u64, eichler_class_number(101).unwrap());
    let params = SsigParams::new(101, 2, true, BuildMethod::Velu).unwrap();
    let g = build(&params).unwrap();
    let from_graph: BTreeSet<String> = g.labels().iter().cloned().collect();
    let from_scan: BTreeSet<String> = scanned.iter().map(|j| j_label(*j)).collect();
    assert_eq!(from_graph, from_scan);
}
