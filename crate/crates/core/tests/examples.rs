//! Worked examples with frozen values, each checked against the reference
//! arithmetic in `common` rather than against the library itself.

mod common;

use common::*;
use num_bigint::BigUint;
use permgrowth::group::{block_systems_minimal, is_giant_on, is_k_transitive, orbits, reduce_generators};
use permgrowth::growth::{coset_count, prefix_from_set, tagore_certificate};
use permgrowth::perm::{all_permutations, commutator, conjugate, power_set, product_set};
use permgrowth::structure::{
    abelian_product_write, chain_diameter_bound, level_kernel, schreier_diameter_bound, schreier_generators,
    structure_tree, tree_level_analysis,
};
use permgrowth::support::{double_transposition_decomposition, small_support_search, supconj_witness};
use permgrowth::walks::{cayley_bfs, directed_diameter_pair, mixing_bound, schreier_graph};
use permgrowth::{GenSet, GiantClass, Partition, Permutation, SearchBudget, StabilizerChain, DEFAULT_CAP};

fn p(s: &str, n: usize) -> Permutation {
    Permutation::parse(s, Some(n)).unwrap()
}

fn gs(s: &str) -> GenSet {
    GenSet::parse(s, None).unwrap()
}

fn imgs(a: &GenSet) -> Vec<Img> {
    a.non_identity().iter().map(img).collect()
}

#[test]
fn products_and_conjugates() {
    let (a, b) = (p("(1 2)", 3), p("(2 3)", 3));
    assert_eq!(a.compose(&b), p("(1 3 2)", 3));
    assert_eq!(img(&a.compose(&b)), mul(&img(&a), &img(&b)));
    assert_eq!(conjugate(&a, &p("(1 3)", 3)), p("(2 3)", 3));
    assert_eq!(img(&conjugate(&a, &p("(1 3)", 3))), conj(&img(&a), &img(&p("(1 3)", 3))));
    let prod = product_set(&[a], &[b], 10).unwrap();
    assert_eq!(prod.len(), 1);
    assert!(prod.contains(&p("(1 3 2)", 3)));
}

#[test]
fn cycle_data() {
    let g = p("(1 2)(3 4)", 4);
    assert_eq!((g.support_size(), g.cycle_type(), g.is_even()), (4, vec![2, 2], true));
    assert_eq!(cycle_type(&img(&g)), [2, 2]);
    let g = p("(1 2 3 4 5)", 5);
    assert_eq!((g.support_size(), g.is_even()), (5, true));
}

#[test]
fn power_set_fills_sym4() {
    let a = gs("(1 2),(1 2 3 4)").symmetrize();
    let d = diameter(&imgs(&a), 4);
    assert_eq!(power_set(&a, d, DEFAULT_CAP).unwrap().len(), 24);
    assert_eq!(closure(&imgs(&a), 4).len(), 24);
}

#[test]
fn orbits_and_transitivity() {
    let a = gs("(1 2),(3 4 5)");
    assert_eq!(orbits(&a).orbits.len(), 2);
    assert_eq!(orbit_count(&imgs(&a), 5), 2);
    assert!(is_k_transitive(&gs("(1 2),(1 2 3 4)"), 4));
    assert!(!is_k_transitive(&gs("(1 2)(3 4),(1 3)(2 4)"), 2));
}

#[test]
fn blocks_of_the_square() {
    let d4 = gs("(1 2 3 4),(1 3)");
    let systems = block_systems_minimal(&d4).unwrap();
    assert!(systems.iter().any(|b| {
        let mut bl: Vec<Vec<usize>> = b.blocks.clone();
        bl.sort();
        bl == vec![vec![0, 2], vec![1, 3]]
    }));
    assert!(block_systems_minimal(&gs("(1 2),(1 2 3 4 5)")).unwrap().is_empty());
}

#[test]
fn orders_and_giants() {
    for (s, order, class) in [
        ("(1 2),(1 2 3 4 5)", 120u32, GiantClass::Sym),
        ("(1 2 3),(3 4 5)", 60, GiantClass::Alt),
    ] {
        let a = gs(s);
        assert_eq!(StabilizerChain::from_genset(&a).order(), BigUint::from(order));
        assert_eq!(closure(&imgs(&a), 5).len(), order as usize);
        assert_eq!(is_giant_on(&a, &[0, 1, 2, 3, 4]).unwrap(), class);
    }
    let sym4 = GenSet::new(4, all_permutations(4)).unwrap();
    let r = reduce_generators(&sym4);
    assert!(r.len() <= 16);
    assert_eq!(closure(&imgs(&r), 4).len(), 24);
}

#[test]
fn bfs_diameters() {
    let a = gs("(1 2),(2 3),(3 4)").symmetrize();
    let bfs = cayley_bfs(&a, DEFAULT_CAP).unwrap();
    assert_eq!(bfs.diameter, 6);
    assert_eq!(bfs.witness, Permutation::from_images(vec![3, 2, 1, 0]).unwrap());
    assert_eq!(inversions(&img(&bfs.witness)), 6);

    let c5 = directed_diameter_pair(&gs("(1 2 3 4 5)"), DEFAULT_CAP).unwrap();
    assert_eq!((c5.directed, c5.undirected), (4, 2));
    let s3 = directed_diameter_pair(&gs("(1 2),(1 2 3)"), DEFAULT_CAP).unwrap();
    assert!(s3.directed >= s3.undirected);
    assert_eq!(s3.undirected, diameter(&[img(&p("(1 2)", 3)), img(&p("(1 2 3)", 3))], 3));
}

#[test]
fn schreier_graphs_and_mixing_bounds() {
    let g = schreier_graph(&gs("(1 2),(1 2 3 4 5)").symmetrize(), 2, DEFAULT_CAP).unwrap();
    assert!(g.is_connected());
    assert_eq!(g.vertex_count(), 20);
    // ⌈N² d ln(N/ε)⌉
    assert_eq!(mixing_bound(30, 4, 0.01).unwrap(), (3600.0 * 3000f64.ln()).ceil() as u64);
    assert_eq!(mixing_bound(30, 4, 0.01).unwrap(), 28823);
    assert_eq!(mixing_bound(2, 1, 0.5).unwrap(), 6);
}

#[test]
fn growth_examples() {
    let e = Permutation::identity(3);
    let t = p("(1 2)", 3);
    let cert = tagore_certificate(&[vec![e.clone(), t.clone()], vec![e, t]], 10).unwrap();
    assert_eq!((cert.intersection, cert.bound, cert.achieved), (Some(2), 2.0, 2.0));

    let sym3 = all_permutations(3);
    assert_eq!(coset_count(&sym3, &[0]), 3);

    let sym5 = all_permutations(5);
    let pre = prefix_from_set(&sym5, 5, 0.8);
    assert!(pre.sigma.len() >= 2);
    assert!(coset_count(&sym5, &pre.sigma[..2]) >= 16);
}

#[test]
fn partition_examples() {
    let part = Partition::from_blocks1(4, &[&[1, 2], &[3], &[4]]).unwrap();
    let joined = part.join_image(&p("(2 3)", 4)).unwrap();
    assert_eq!(joined, Partition::from_blocks1(4, &[&[1, 2, 3], &[4]]).unwrap());
    let q = Partition::from_blocks1(6, &[&[1, 2, 3], &[4, 5], &[6]]).unwrap();
    assert!((q.stat_rho(2) - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn commutator_lemma_cases() {
    // Case analysis: long cycle, lone 3-cycle, two 2-cycles, two 3-cycles.
    for (g, n, h, c) in [
        ("(1 2 3 4 5)", 5, "(1 2 3)", "(1 2 4)"),
        ("(1 2 3)", 5, "(2 3 4)", "(1 4)(2 3)"),
        ("(1 2)(3 4)", 4, "(1 2 3)", "(1 3)(2 4)"),
        ("(1 2 3)(4 5 6)", 6, "(1 4 3)(2 5 6)", "(1 6)(2 4)"),
    ] {
        let g = p(g, n);
        let w = supconj_witness(&g).unwrap();
        assert_eq!(w, p(h, n));
        assert_eq!(commutator(&g, &w), p(c, n));
        assert_eq!(comm(&img(&g), &img(&w)), img(&p(c, n)));
    }
    let f = double_transposition_decomposition(&p("(1 2 3)", 5)).unwrap();
    assert_eq!(f, vec![p("(1 3)(4 5)", 5), p("(2 3)(4 5)", 5)]);
}

#[test]
fn cyclic_group_has_no_small_support() {
    let budget = SearchBudget {
        resamples: 10,
        rounds: 4,
        ..SearchBudget::default()
    };
    let c7 = gs("(1 2 3 4 5 6 7)");
    assert!(small_support_search(&c7, 0.5, &budget, 1).unwrap().is_none());
    assert!(closure(&imgs(&c7), 7).iter().all(|x| support(x) == 0 || support(x) == 7));
}

#[test]
fn structure_trees() {
    let d4 = gs("(1 2 3 4),(1 3)");
    let t = structure_tree(&d4).unwrap();
    assert_eq!(t.height(), 2);
    let wreath = gs("(1 2),(1 3)(2 4),(1 5)(2 6)(3 7)(4 8)");
    assert_eq!(structure_tree(&wreath).unwrap().height(), 3);

    // Kernel on the blocks {1,3},{2,4}: the elements of D4 fixing both blocks.
    let k = level_kernel(&d4, &t, 1).unwrap();
    let oracle = closure(&imgs(&d4), 4)
        .into_iter()
        .filter(|g| (g[0] == 0 || g[0] == 2) && (g[1] == 1 || g[1] == 3))
        .count();
    assert_eq!(k.order(), BigUint::from(oracle));

    let sym6 = gs("(1 2),(1 2 3 4 5 6)");
    let an = tree_level_analysis(&sym6, &structure_tree(&sym6).unwrap()).unwrap();
    assert_eq!(an.levels.len(), 1);
    assert_eq!((an.levels[0].giant, an.levels[0].degree), (GiantClass::Sym, 6));
    let an = tree_level_analysis(&d4, &t).unwrap();
    assert!(an.levels.iter().all(|l| l.giant == GiantClass::Neither));
}

#[test]
fn schreier_generator_examples() {
    for (g, normal, order) in [("(1 2),(1 2 3)", "even", 3usize), ("(1 2),(1 2 3 4)", "v4", 4)] {
        let a = gs(g);
        let n = a.degree();
        let v4: Vec<Img> = ["(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"].iter().map(|s| img(&p(s, 4))).collect();
        let in_n = |x: &Permutation| match normal {
            "even" => x.is_even(),
            _ => x.is_identity() || v4.contains(&img(x)),
        };
        let group: Vec<Img> = closure(&imgs(&a), n).into_iter().collect();
        let mut reps: Vec<Permutation> = Vec::new();
        for x in &group {
            let x = perm(x);
            if !reps.iter().any(|r| in_n(&x.compose(&r.inverse()))) {
                reps.push(x);
            }
        }
        reps.sort();
        let s = schreier_generators(&a, in_n, &reps).unwrap();
        assert_eq!(closure(&imgs(&s), n).len(), order);
    }
    assert_eq!(schreier_diameter_bound(2, 3), 17);
    assert_eq!(chain_diameter_bound(&[2, 3]).exact, Some(BigUint::from(6u8)));
}

#[test]
fn abelian_words() {
    let w = abelian_product_write(5, 2, &[vec![1, 0], vec![0, 1]], &[2, 4]).unwrap();
    assert_eq!(w.len(), 3);
    assert_eq!(w.0.iter().filter(|l| l.gen == 0 && !l.inv).count(), 2);
    assert_eq!(w.0.iter().filter(|l| l.gen == 1 && l.inv).count(), 1);
    let w = abelian_product_write(3, 1, &[vec![1]], &[2]).unwrap();
    assert_eq!(w.to_string(), "g1^-1");
}
