//! Support manipulation: amplify a support to almost everything, shrink it to
//! a 3-cycle, and the elementary commutator and decomposition constructions
//! inside alternating groups.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::is_k_transitive;
use crate::perm::{all_even_permutations, commutator, GenSet, Permutation, Tracked};
use crate::rng;
use crate::walks::{SearchBudget, Walker};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyResult {
    /// `h = g · ∏ γ_i g γ_i^-1`.
    pub h: Tracked,
    pub conjugators: Vec<Tracked>,
    /// Support after each accepted stage.
    pub supports: Vec<usize>,
    pub attempts: usize,
}

/// `g · ∏ γ g γ^-1` over a conjugator list, with tracked length.
pub fn conjugate_product(g: &Tracked, conjugators: &[Tracked]) -> Tracked {
    let mut h = g.clone();
    for c in conjugators {
        h = h.mul(&g.conjugate(c));
    }
    h
}

/// Produce a product of conjugates of `g` whose support has at least `n-1`
/// points.
///
/// Stage one repeatedly multiplies by `σ g σ^-1` for a walk element σ,
/// demanding that the number of fixed points drop to at most
/// `⌊r u + 1⌋` with `r = (1 + 1/n)(1 - |supp g|/n)`, until that target stops
/// improving. Stage two squares the construction, `h σ h σ^-1`, which
/// extends the conjugator list by `σ` and `σγ_i`.
pub fn amplify_support(a: &GenSet, g: &Tracked, budget: &SearchBudget, seed: u64) -> Result<AmplifyResult> {
    let n = a.degree();
    if g.perm.is_identity() {
        return Err(Error::hypothesis("g must be nontrivial"));
    }
    let s0 = g.perm.support_size();
    if s0 + 1 >= n {
        return Ok(AmplifyResult {
            h: g.clone(),
            conjugators: Vec::new(),
            supports: vec![s0],
            attempts: 0,
        });
    }
    if !(a.is_symmetric() && a.has_identity()) {
        return Err(Error::hypothesis("A must be symmetric and contain e"));
    }
    if !is_k_transitive(a, 2) {
        return Err(Error::hypothesis("<A> is not 2-transitive"));
    }
    let walker = Walker::new(a);
    let mut r = rng::seeded(seed);
    let nf = n as f64;
    let ratio = (1.0 + 1.0 / nf) * (1.0 - s0 as f64 / nf);
    let mut conj: Vec<Tracked> = Vec::new();
    let mut h = g.clone();
    let mut supports = vec![s0];
    let mut attempts = 0usize;

    // Stage one.
    loop {
        let u = n - h.perm.support_size();
        if u <= 1 {
            break;
        }
        let target = (ratio * u as f64 + 1.0).floor() as usize;
        if target >= u {
            break;
        }
        let (sigma, cand) = sample_until(&walker, &mut r, budget, n, &mut attempts, |s| {
            let c = h.mul(&g.conjugate(s));
            (n - c.perm.support_size() <= target).then_some(c)
        })?;
        conj.push(sigma);
        h = cand;
        supports.push(h.perm.support_size());
    }

    // Stage two: h σ h σ^-1.
    if h.perm.support_size() + 1 < n {
        let (sigma, cand) = sample_until(&walker, &mut r, budget, n, &mut attempts, |s| {
            let c = h.mul(&h.conjugate(s));
            (c.perm.support_size() + 1 >= n).then_some(c)
        })?;
        let mut extended = conj.clone();
        extended.push(sigma.clone());
        extended.extend(conj.iter().map(|c| sigma.mul(c)));
        conj = extended;
        h = cand;
        supports.push(h.perm.support_size());
    }
    let rebuilt = conjugate_product(g, &conj);
    debug_assert_eq!(rebuilt.perm, h.perm);
    Ok(AmplifyResult {
        h: rebuilt,
        conjugators: conj,
        supports,
        attempts,
    })
}

fn sample_until<R: Rng, T>(
    walker: &Walker,
    r: &mut R,
    budget: &SearchBudget,
    n: usize,
    attempts: &mut usize,
    mut accept: impl FnMut(&Tracked) -> Option<T>,
) -> Result<(Tracked, T)> {
    for local in 0..budget.total_attempts() {
        *attempts += 1;
        let s = walker.walk(budget.walk_len(n, local), r);
        if let Some(t) = accept(&s) {
            return Ok((s, t));
        }
    }
    Err(Error::budget("amplify_support", "support target not met"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkResult {
    pub c: Tracked,
    /// Accepted `h_i`: `c_{i+1} = [c_i, h_i c_i h_i^-1]`.
    pub conjugators: Vec<Tracked>,
    /// Support after each accepted step, starting with the input.
    pub supports: Vec<usize>,
    pub attempts: usize,
}

/// Default margin below `n/3` required of the input support.
pub const SHRINK_EPS: f64 = 0.05;

/// Budget shape for support reduction: `resamples` per round and
/// `3 log log n + 20` rounds.
pub fn shrink_budget(n: usize) -> SearchBudget {
    let lln = (n.max(3) as f64).ln().ln().max(0.0);
    SearchBudget {
        resamples: 50,
        rounds: (3.0 * lln).ceil() as usize + 20,
        ..SearchBudget::default()
    }
}

/// Shrink the support of `g` to 2 or 3 points via `[g, h g h^-1]` for walk
/// elements h, accepting only nontrivial strictly smaller results.
pub fn shrink_support(a: &GenSet, g: &Tracked, eps: f64, budget: &SearchBudget, seed: u64) -> Result<ShrinkResult> {
    let n = a.degree();
    let s0 = g.perm.support_size();
    if s0 == 0 {
        return Err(Error::hypothesis("g must be nontrivial"));
    }
    if s0 <= 3 {
        return Ok(ShrinkResult {
            c: g.clone(),
            conjugators: Vec::new(),
            supports: vec![s0],
            attempts: 0,
        });
    }
    if s0 as f64 > (1.0 / 3.0 - eps) * n as f64 {
        return Err(Error::hypothesis(format!(
            "support {s0} exceeds (1/3 - {eps}) n"
        )));
    }
    if !is_k_transitive(a, 3) {
        return Err(Error::hypothesis("<A> is not 3-transitive"));
    }
    let walker = Walker::new(a);
    let mut r = rng::seeded(seed);
    let mut cur = g.clone();
    let mut supports = vec![s0];
    let mut conjugators = Vec::new();
    let mut attempts = 0;
    for _round in 0..budget.rounds.max(1) {
        let s = cur.perm.support_size();
        if s <= 3 {
            break;
        }
        let mut accepted = None;
        for i in 0..budget.resamples.max(1) {
            attempts += 1;
            let h = walker.walk(budget.walk_len(n, i / budget.resamples.max(1)), &mut r);
            let cand = cur.commutator(&cur.conjugate(&h));
            let cs = cand.perm.support_size();
            if cs > 0 && cs < s {
                accepted = Some((h, cand));
                break;
            }
        }
        match accepted {
            Some((h, c)) => {
                supports.push(c.perm.support_size());
                conjugators.push(h);
                cur = c;
            }
            None => continue,
        }
    }
    if cur.perm.support_size() > 3 {
        return Err(Error::budget(
            "shrink_support",
            format!("stuck at support {}", cur.perm.support_size()),
        ));
    }
    Ok(ShrinkResult {
        c: cur,
        conjugators,
        supports,
        attempts,
    })
}

/// Replays a shrink run from its conjugators.
pub fn shrink_replay(g: &Tracked, conjugators: &[Tracked]) -> Tracked {
    conjugators.iter().fold(g.clone(), |c, h| c.commutator(&c.conjugate(h)))
}

/// An even `h` with `[g, h]` a 3-cycle or a double transposition, chosen by
/// the case analysis: two 3-cycles, two 2-cycles, a long cycle, a lone
/// 3-cycle.
pub fn supconj_witness(g: &Permutation) -> Result<Permutation> {
    let n = g.degree();
    if g.is_identity() || !g.is_even() || n < 4 {
        return Err(Error::hypothesis("need a nontrivial even permutation of degree >= 4"));
    }
    let cycles = g.cycles();
    let threes: Vec<&Vec<usize>> = cycles.iter().filter(|c| c.len() == 3).collect();
    let twos: Vec<&Vec<usize>> = cycles.iter().filter(|c| c.len() == 2).collect();
    let h = if threes.len() >= 2 {
        let (a, b, c) = (threes[0][0], threes[0][1], threes[0][2]);
        let (d, e, f) = (threes[1][0], threes[1][1], threes[1][2]);
        Permutation::from_cycles(n, &[vec![a, d, c], vec![b, e, f]])?
    } else if twos.len() >= 2 {
        let (a, b, c) = (twos[0][0], twos[0][1], twos[1][0]);
        Permutation::from_cycles(n, &[vec![a, b, c]])?
    } else if let Some(long) = cycles.iter().find(|c| c.len() >= 4) {
        Permutation::from_cycles(n, &[vec![long[0], long[1], long[2]]])?
    } else {
        let c3 = &cycles[0];
        let d = (0..n).find(|x| !c3.contains(x)).expect("degree >= 4");
        Permutation::from_cycles(n, &[vec![c3[1], c3[2], d]])?
    };
    Ok(h)
}

fn require_even(g: &Permutation) -> Result<()> {
    if g.is_even() {
        Ok(())
    } else {
        Err(Error::Parity(format!("{g} is odd")))
    }
}

/// Write an even g as a product of at most `n-1` 3-cycles by repeatedly
/// fixing the least moved point: `g' = g·(b a c)` with `b = a^g`.
pub fn three_cycle_decomposition(g: &Permutation) -> Result<Vec<Permutation>> {
    require_even(g)?;
    let n = g.degree();
    let mut cur = g.clone();
    let mut steps = Vec::new();
    while !cur.is_identity() {
        let supp = cur.support();
        let a = supp[0];
        let b = cur.image(a);
        let c = *supp.iter().find(|&&x| x != a && x != b).expect("even support >= 3");
        let t = Permutation::from_cycles(n, &[vec![b, a, c]])?;
        cur = cur.compose(&t);
        steps.push(t);
    }
    // g = t_r^-1 ... t_1^-1
    Ok(steps.iter().rev().map(Permutation::inverse).collect())
}

/// Write an even g (degree >= 5) as a product of at most `(n+1)/2`
/// double transpositions.
pub fn double_transposition_decomposition(g: &Permutation) -> Result<Vec<Permutation>> {
    require_even(g)?;
    let n = g.degree();
    if n < 5 {
        return Err(Error::Domain("double transposition form needs degree >= 5".into()));
    }
    let mut cur = g.clone();
    let mut steps: Vec<Permutation> = Vec::new();
    let mut tail: Vec<Permutation> = Vec::new();
    while !cur.is_identity() {
        let supp = cur.support();
        if supp.len() == 3 {
            // (a b c) = (a c)(b' c') · (b c)(b' c')
            let (a, b, c) = (supp[0], cur.image(supp[0]), cur.image(cur.image(supp[0])));
            let out: Vec<usize> = (0..n).filter(|x| !supp.contains(x)).take(2).collect();
            tail.push(Permutation::from_cycles(n, &[vec![a, c], vec![out[0], out[1]]])?);
            tail.push(Permutation::from_cycles(n, &[vec![b, c], vec![out[0], out[1]]])?);
            break;
        }
        let a = supp[0];
        let b = cur.image(a);
        let c = *supp
            .iter()
            .find(|&&x| x != a && x != b && cur.image(x) != a && cur.image(x) != b)
            .expect("support >= 4 has a second moved pair");
        let d = cur.image(c);
        let t = Permutation::from_cycles(n, &[vec![b, a], vec![d, c]])?;
        cur = cur.compose(&t);
        steps.push(t);
    }
    // g = tail · t_r^-1 ... t_1^-1 (each t is an involution)
    let mut out = tail;
    out.extend(steps.into_iter().rev());
    Ok(out)
}

/// Largest degree for the brute-force commutator search.
pub const COMMUTATOR_CAP: usize = 7;

/// Canonical element with the given nontrivial cycle lengths.
fn with_cycle_type(n: usize, lens: &[usize]) -> Permutation {
    let mut cycles = Vec::new();
    let mut next = 0;
    for &l in lens {
        cycles.push((next..next + l).collect());
        next += l;
    }
    Permutation::from_cycles(n, &cycles).expect("fits in degree")
}

fn even_cycle_types(n: usize) -> Vec<Vec<usize>> {
    fn parts(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for l in (2..=max.min(rest)).rev() {
            cur.push(l);
            parts(rest - l, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    parts(n, n, &mut Vec::new(), &mut out);
    out.retain(|t| t.iter().map(|l| l - 1).sum::<usize>() % 2 == 0);
    out
}

/// `(x, y)` in `Alt(m)` with `[x, y] = g`, by search over x (class
/// representatives first) and y, pruned by requiring `x` and `xg` to have the
/// same cycle type.
pub fn commutator_witness(g: &Permutation) -> Result<(Permutation, Permutation)> {
    let m = g.degree();
    require_even(g)?;
    if m < 5 {
        return Err(Error::Domain("every element is a commutator only for m >= 5".into()));
    }
    if m > COMMUTATOR_CAP {
        return Err(Error::cap("commutator search degree", COMMUTATOR_CAP, m));
    }
    if g.is_identity() {
        let e = Permutation::identity(m);
        return Ok((e.clone(), e));
    }
    let alt = all_even_permutations(m);
    let reps: Vec<Permutation> = even_cycle_types(m)
        .iter()
        .map(|t| with_cycle_type(m, t))
        .collect();
    for x in reps.iter().chain(alt.iter()) {
        let xg = x.compose(g);
        if xg.cycle_type() != x.cycle_type() {
            continue;
        }
        for y in &alt {
            if commutator(x, y) == *g {
                return Ok((x.clone(), y.clone()));
            }
        }
    }
    Err(Error::NotInGroup)
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Powers `x^(ord/p)` for primes `p | ord(x)`, with tracked lengths.
fn prime_order_powers(x: &Tracked) -> Vec<Tracked> {
    let ord = x.perm.order();
    prime_factors(ord)
        .into_iter()
        .map(|p| {
            let e = ord / p;
            let len = x.len * e.min(ord - e);
            Tracked::new(x.perm.pow(e as i64), len)
        })
        .collect()
}

/// Search for a nontrivial element of support `< εn`: first among A, then
/// among prime-order powers of walk elements, then by shrinking any
/// sufficiently small candidate.
pub fn small_support_search(a: &GenSet, eps: f64, budget: &SearchBudget, seed: u64) -> Result<Option<Tracked>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let n = a.degree();
    let limit = eps * n as f64;
    let small = |t: &Tracked| {
        let s = t.perm.support_size();
        s > 0 && (s as f64) < limit
    };
    if let Some(t) = a
        .tracked()
        .filter(|t| small(t))
        .min_by_key(|t| (t.perm.support_size(), t.len))
    {
        return Ok(Some(t));
    }
    let alphabet = a.symmetrize();
    if alphabet.non_identity().is_empty() {
        return Ok(None);
    }
    let walker = Walker::new(&alphabet);
    let three_transitive = is_k_transitive(a, 3);
    let mut r = rng::seeded(seed);
    let shrink_limit = (1.0 / 3.0 - SHRINK_EPS) * n as f64;
    for i in 0..budget.total_attempts() {
        let x = walker.walk(budget.walk_len(n, i), &mut r);
        let mut cands = prime_order_powers(&x);
        cands.retain(|t| !t.perm.is_identity());
        cands.sort_by_key(|t| (t.perm.support_size(), t.len));
        if let Some(t) = cands.iter().find(|t| small(t)) {
            return Ok(Some(t.clone()));
        }
        if three_transitive && limit > 3.0 {
            if let Some(t) = cands
                .iter()
                .find(|t| (t.perm.support_size() as f64) <= shrink_limit)
            {
                let sb = shrink_budget(n);
                if let Ok(s) = shrink_support(&alphabet, t, SHRINK_EPS, &sb, rng::derive(seed, i as u64)) {
                    if small(&s.c) {
                        return Ok(Some(s.c));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;

    fn c(n: usize, cs: &[&[usize]]) -> Permutation {
        Permutation::cycles1(n, cs)
    }

    fn sym(n: usize) -> GenSet {
        let cyc: Vec<usize> = (1..=n).collect();
        GenSet::new(n, vec![c(n, &[&[1, 2]]), c(n, &[&cyc])]).unwrap().symmetrize()
    }

    fn alt(n: usize) -> GenSet {
        // (1 2 3) and an odd-length cycle through the remaining points.
        let tail: Vec<usize> = if n % 2 == 1 { (1..=n).collect() } else { (2..=n).collect() };
        GenSet::new(n, vec![c(n, &[&[1, 2, 3]]), c(n, &[&tail])]).unwrap().symmetrize()
    }

    #[test]
    fn supconj_cases() {
        let g = c(5, &[&[1, 2, 3, 4, 5]]);
        let h = supconj_witness(&g).unwrap();
        assert_eq!(h, c(5, &[&[1, 2, 3]]));
        // In the right-action convention the commutator is (1 2 4).
        assert_eq!(commutator(&g, &h), c(5, &[&[1, 2, 4]]));

        let g = c(5, &[&[1, 2, 3]]);
        let h = supconj_witness(&g).unwrap();
        assert_eq!(h, c(5, &[&[2, 3, 4]]));
        assert_eq!(commutator(&g, &h), c(5, &[&[1, 4], &[2, 3]]));

        let g = c(4, &[&[1, 2], &[3, 4]]);
        let h = supconj_witness(&g).unwrap();
        assert_eq!(h, c(4, &[&[1, 2, 3]]));
        assert_eq!(commutator(&g, &h).cycle_type(), vec![2, 2]);

        let g = c(6, &[&[1, 2, 3], &[4, 5, 6]]);
        let h = supconj_witness(&g).unwrap();
        assert_eq!(h, c(6, &[&[1, 4, 3], &[2, 5, 6]]));
        assert_eq!(commutator(&g, &h).cycle_type(), vec![2, 2]);

        assert!(supconj_witness(&c(5, &[&[1, 2]])).is_err());
        assert!(supconj_witness(&Permutation::identity(5)).is_err());
    }

    #[test]
    fn supconj_exhaustive_small() {
        for n in 4..=6 {
            for g in all_even_permutations(n).into_iter().filter(|g| !g.is_identity()) {
                let h = supconj_witness(&g).unwrap();
                assert!(h.is_even());
                let t = commutator(&g, &h).cycle_type();
                assert!(t == vec![3] || t == vec![2, 2], "{g} gives {t:?}");
            }
        }
    }

    #[test]
    fn decompositions() {
        assert!(three_cycle_decomposition(&Permutation::identity(5)).unwrap().is_empty());
        let g = c(5, &[&[1, 2, 3]]);
        let d = double_transposition_decomposition(&g).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|t| t.cycle_type() == vec![2, 2]));
        assert_eq!(d[0].compose(&d[1]), g);
        assert!(three_cycle_decomposition(&c(5, &[&[1, 2]])).is_err());

        for n in 5..=7 {
            for g in all_even_permutations(n) {
                let t = three_cycle_decomposition(&g).unwrap();
                assert!(t.len() < n);
                assert!(t.iter().all(|x| x.cycle_type() == vec![3]));
                let p = t.iter().fold(Permutation::identity(n), |acc, x| acc.compose(x));
                assert_eq!(p, g);
                let d = double_transposition_decomposition(&g).unwrap();
                assert!(2 * d.len() <= n + 1);
                let p = d.iter().fold(Permutation::identity(n), |acc, x| acc.compose(x));
                assert_eq!(p, g);
            }
        }
    }

    #[test]
    fn commutators_in_alt5() {
        let (x, y) = commutator_witness(&Permutation::identity(5)).unwrap();
        assert!(x.is_identity() && y.is_identity());
        for g in all_even_permutations(5) {
            let (x, y) = commutator_witness(&g).unwrap();
            assert!(x.is_even() && y.is_even());
            assert_eq!(commutator(&x, &y), g);
        }
        assert!(matches!(
            commutator_witness(&Permutation::identity(8)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn even_types_of_alt6() {
        let t = even_cycle_types(6);
        // (), (3), (2,2), (5), (3,3), (4,2)
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn amplify_examples() {
        let a = sym(12);
        let budget = SearchBudget::default();
        let g = Tracked::new(c(12, &[&[1, 2, 3, 4]]), 1);
        let r = amplify_support(&a, &g, &budget, 7).unwrap();
        assert!(r.h.perm.support_size() >= 11);
        assert_eq!(conjugate_product(&g, &r.conjugators).perm, r.h.perm);

        let full = Tracked::new(c(12, &[&(1..=12).collect::<Vec<_>>()]), 1);
        let r = amplify_support(&a, &full, &budget, 1).unwrap();
        assert!(r.conjugators.is_empty());

        let intr = GenSet::parse("(1 2),(3 4 5 6 7 8 9 10 11 12)", None).unwrap().symmetrize();
        assert!(amplify_support(&intr, &g, &budget, 1).is_err());
    }

    #[test]
    fn shrink_examples() {
        let n = 30;
        let a = alt(n);
        let g = Tracked::new(c(n, &[&[1, 2, 3, 4, 5], &[6, 7, 8]]), 1);
        let r = shrink_support(&a, &g, SHRINK_EPS, &shrink_budget(n), 3).unwrap();
        assert!(matches!(r.c.perm.support_size(), 2 | 3));
        assert!(r.supports.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(shrink_replay(&g, &r.conjugators), r.c);

        let three = Tracked::new(c(n, &[&[1, 2, 3]]), 1);
        assert_eq!(shrink_support(&a, &three, SHRINK_EPS, &shrink_budget(n), 1).unwrap().c, three);

        let big = Tracked::new(c(n, &[&(1..=11).collect::<Vec<_>>()]), 1);
        assert!(matches!(
            shrink_support(&a, &big, SHRINK_EPS, &shrink_budget(n), 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn small_support_examples() {
        let budget = SearchBudget {
            resamples: 10,
            rounds: 4,
            ..SearchBudget::default()
        };
        let a = sym(9);
        let t = small_support_search(&a, 0.3, &budget, 1).unwrap().unwrap();
        assert_eq!(t.perm, c(9, &[&[1, 2]]));

        let cyc = GenSet::parse("(1 2 3 4 5 6 7)", None).unwrap();
        assert!(small_support_search(&cyc, 0.5, &budget, 1).unwrap().is_none());
        // exhaustive check of the oracle: every nontrivial power has full support
        let g = c(7, &[&[1, 2, 3, 4, 5, 6, 7]]);
        assert!((1..7).all(|k| g.pow(k).support_size() == 7));

        // Alt(20) from two generators of support >= 19.
        let long = c(20, &[&(2..=20).collect::<Vec<_>>()]);
        let a20 = GenSet::new(20, vec![c(20, &[&[1, 2, 3]]).compose(&long), long]).unwrap().symmetrize();
        assert!(a20.non_identity().iter().all(|p| p.support_size() >= 19));
        let t = small_support_search(&a20, 0.2, &budget, 5).unwrap().unwrap();
        assert!(t.perm.support_size() < 4);
    }

    #[test]
    fn sym_and_alt_helpers_generate() {
        use crate::group::{factorial, StabilizerChain};
        assert_eq!(StabilizerChain::from_genset(&sym(6)).order(), factorial(6));
        assert_eq!(StabilizerChain::from_genset(&alt(7)).order() * 2u32, factorial(7));
        assert_eq!(StabilizerChain::from_genset(&alt(8)).order() * 2u32, factorial(8));
        assert_eq!(all_permutations(1).len(), 1);
    }
}
