mod common;

use common::*;
use permgrowth::growth::{duffy_check, pair_product_bound};
use permgrowth::perm::{commutator, conjugate, power_set};
use permgrowth::support::{commutator_witness, supconj_witness, three_cycle_decomposition};
use permgrowth::walks::cayley_bfs;
use permgrowth::{GenSet, Partition, Permutation, StabilizerChain, DEFAULT_CAP};
use proptest::prelude::*;

fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n as u32).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn arb_sized(lo: usize, hi: usize) -> impl Strategy<Value = (usize, Vec<Permutation>)> {
    (lo..=hi).prop_flat_map(|n| (Just(n), prop::collection::vec(arb_perm(n), 1..6)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn arithmetic_matches_images((_n, ps) in arb_sized(1, 9)) {
        let (g, h) = (&ps[0], ps.last().unwrap());
        prop_assert_eq!(img(&g.compose(h)), mul(&img(g), &img(h)));
        prop_assert_eq!(img(&g.inverse()), inv(&img(g)));
        prop_assert_eq!(img(&commutator(g, h)), comm(&img(g), &img(h)));
        prop_assert_eq!(img(&conjugate(g, h)), conj(&img(g), &img(h)));
        prop_assert_eq!(g.cycle_type(), cycle_type(&img(g)));
        prop_assert_eq!(g.is_even(), is_even(&img(g)));
    }

    #[test]
    fn text_formats_round_trip((n, ps) in arb_sized(1, 12)) {
        let g = &ps[0];
        prop_assert_eq!(&Permutation::parse(&g.to_cycle_string(), Some(n)).unwrap(), g);
        prop_assert_eq!(&Permutation::parse(&g.to_image_string(), None).unwrap(), g);
    }

    #[test]
    fn orders_match_closure((n, ps) in arb_sized(2, 6)) {
        let a = GenSet::new(n, ps.clone()).unwrap();
        let order = StabilizerChain::from_genset(&a).order();
        let gens: Vec<Img> = ps.iter().map(img).collect();
        prop_assert_eq!(order, closure(&gens, n).len().into());
    }

    #[test]
    fn powers_are_balls((n, ps) in arb_sized(2, 5), k in 1usize..5) {
        let a = GenSet::new(n, ps.clone()).unwrap().symmetrize();
        let ball = power_set(&a, k, DEFAULT_CAP).unwrap();
        let gens: Vec<Img> = ps.iter().map(img).collect();
        let dist = distances(&gens, n);
        let oracle = dist.values().filter(|&&d| d <= k).count();
        prop_assert_eq!(ball.len(), oracle);
        prop_assert_eq!(cayley_bfs(&a, DEFAULT_CAP).unwrap().diameter, *dist.values().max().unwrap());
    }

    #[test]
    fn product_bounds_hold((n, a, b) in (3usize..=5).prop_flat_map(|n| (
        Just(n),
        prop::collection::vec(arb_perm(n), 1..8),
        prop::collection::vec(arb_perm(n), 1..8),
    )), k in 1usize..=3) {
        prop_assert!(pair_product_bound(&a, &b, DEFAULT_CAP).unwrap().holds);
        let sigma: Vec<usize> = (0..k.min(n)).collect();
        prop_assert!(duffy_check(&a, &sigma, DEFAULT_CAP).unwrap().holds);
    }

    #[test]
    fn even_decompositions(g in arb_perm(7)) {
        let g = if g.is_even() { g } else { g.compose(&Permutation::parse("(1 2)", Some(7)).unwrap()) };
        let t = three_cycle_decomposition(&g).unwrap();
        prop_assert!(t.len() <= 6);
        let prod = t.iter().fold(id(7), |acc, f| mul(&acc, &img(f)));
        prop_assert_eq!(prod, img(&g));
        if !g.is_identity() {
            let h = supconj_witness(&g).unwrap();
            let c = cycle_type(&comm(&img(&g), &img(&h)));
            prop_assert!(c == [3] || c == [2, 2]);
        }
        let (x, y) = commutator_witness(&g).unwrap();
        prop_assert_eq!(comm(&img(&x), &img(&y)), img(&g));
    }

    #[test]
    fn joins_are_least_upper_bounds(a in prop::collection::vec(0usize..8, 8), b in prop::collection::vec(0usize..8, 8)) {
        let blocks = |labels: &[usize]| {
            let mut out: Vec<Vec<usize>> = vec![Vec::new(); 8];
            for (x, &l) in labels.iter().enumerate() {
                out[l].push(x);
            }
            out.retain(|b| !b.is_empty());
            Partition::from_blocks(8, &out).unwrap()
        };
        let (p, q) = (blocks(&a), blocks(&b));
        let j = p.join(&q).unwrap();
        prop_assert!(p.is_finer_than(&j) && q.is_finer_than(&j));
        // Least: points joined iff connected through shared blocks.
        let mut edges: Vec<Img> = Vec::new();
        for part in [&p, &q] {
            for bl in part.blocks() {
                let mut v = id(8);
                for w in bl.windows(2) {
                    v.swap(w[0], w[1]);
                }
                edges.push(v);
            }
        }
        prop_assert_eq!(j.blocks().len(), orbit_count(&edges, 8));
    }
}
