//! Structure trees of transitive groups, level kernels, the Schreier
//! diameter recursion, constructive writing in direct products, and numeric
//! diameter-bound evaluators.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    block_systems_minimal_gens, classify_order, factorial, minimal_block_system, orbits_of, GiantClass,
    StabilizerChain,
};
use crate::perm::{all_even_permutations, GenSet, Letter, Permutation, Word};
use crate::rng;
use crate::support::{
    commutator_witness, double_transposition_decomposition, supconj_witness, three_cycle_decomposition,
    COMMUTATOR_CAP,
};
use crate::walks::{cayley_bfs, cayley_words, SearchBudget};

/// Levels from the root (one vertex, Ω) down to the leaves (the points).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTree {
    pub degree: usize,
    /// `levels[j][v]` is the point set of vertex v at level j.
    pub levels: Vec<Vec<Vec<usize>>>,
    /// `parents[j][v]` indexes the parent of vertex v at level j (empty at the root).
    pub parents: Vec<Vec<usize>>,
}

impl StructureTree {
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn vertex_count(&self, j: usize) -> usize {
        self.levels[j].len()
    }

    /// Children (level `j+1` indices) of vertex v at level j.
    pub fn children(&self, j: usize, v: usize) -> Vec<usize> {
        (0..self.levels[j + 1].len())
            .filter(|&w| self.parents[j + 1][w] == v)
            .collect()
    }

    fn vertex_of_point(&self, j: usize) -> Vec<usize> {
        let mut out = vec![0; self.degree];
        for (v, b) in self.levels[j].iter().enumerate() {
            for &x in b {
                out[x] = v;
            }
        }
        out
    }

    /// Action of a point permutation on the level-j vertices.
    pub fn vertex_action(&self, j: usize, g: &Permutation) -> Permutation {
        let vp = self.vertex_of_point(j);
        let images = self.levels[j].iter().map(|b| vp[g.image(b[0])] as u32).collect();
        Permutation::from_images_unchecked(images)
    }

    /// Children counts per level, whose product is n.
    pub fn branching(&self) -> Vec<usize> {
        (0..self.height()).map(|j| self.children(j, 0).len()).collect()
    }

    /// Leaves are Ω, levels refine each other, the vertex actions are well
    /// defined, and each vertex stabilizer is primitive on its children.
    pub fn verify(&self, gens: &[Permutation]) -> bool {
        let n = self.degree;
        let h = self.height();
        if self.levels[h].len() != n || self.levels[h].iter().any(|b| b.len() != 1) {
            return false;
        }
        if self.branching().iter().product::<usize>() != n {
            return false;
        }
        for j in 1..=h {
            let up = self.vertex_of_point(j - 1);
            for (v, b) in self.levels[j].iter().enumerate() {
                if b.iter().any(|&x| up[x] != self.parents[j][v]) {
                    return false;
                }
            }
        }
        for j in 0..h {
            let act: Vec<Permutation> = gens.iter().map(|g| self.vertex_action(j + 1, g)).collect();
            let vp = self.vertex_of_point(j + 1);
            let consistent = gens.iter().zip(&act).all(|(g, a)| {
                self.levels[j + 1]
                    .iter()
                    .enumerate()
                    .all(|(v, b)| b.iter().all(|&x| vp[g.image(x)] == a.image(v)))
            });
            if !consistent {
                return false;
            }
            let kids = self.children(j, 0);
            let m = self.levels[j + 1].len();
            for &c in &kids[1..] {
                let bs = minimal_block_system(&act, m, kids[0], c);
                if bs.blocks[0] != kids {
                    return false;
                }
            }
        }
        true
    }
}

/// Build the tree bottom-up: at each stage take the first minimal
/// nontrivial block system of the current action and pass to the action on
/// its blocks, until that action is primitive.
pub fn structure_tree(a: &GenSet) -> Result<StructureTree> {
    let n = a.degree();
    let gens = a.non_identity();
    if !orbits_of(&gens, n).is_transitive() {
        return Err(Error::NotTransitive);
    }
    // bottom-up point sets and the current action
    let mut bottom_up: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|x| vec![x]).collect()];
    let mut cur = gens;
    let mut cur_n = n;
    loop {
        let systems = block_systems_minimal_gens(&cur, cur_n)?;
        let Some(bs) = systems.into_iter().next() else {
            break;
        };
        let below = bottom_up.last().unwrap();
        let mut sets: Vec<Vec<usize>> = bs
            .blocks
            .iter()
            .map(|blk| {
                let mut s: Vec<usize> = blk.iter().flat_map(|&v| below[v].iter().copied()).collect();
                s.sort_unstable();
                s
            })
            .collect();
        // keep the block order (blocks are sorted by least vertex)
        cur = cur.iter().map(|g| bs.induced(g)).filter(|g| !g.is_identity()).collect();
        cur_n = bs.count;
        sets.shrink_to_fit();
        bottom_up.push(sets);
    }
    bottom_up.push(vec![(0..n).collect()]);
    bottom_up.reverse();
    let levels = bottom_up;
    let mut parents = vec![Vec::new()];
    for j in 1..levels.len() {
        let mut up = vec![0; n];
        for (v, b) in levels[j - 1].iter().enumerate() {
            for &x in b {
                up[x] = v;
            }
        }
        parents.push(levels[j].iter().map(|b| up[b[0]]).collect());
    }
    Ok(StructureTree {
        degree: n,
        levels,
        parents,
    })
}

/// Generators on `Ω ⊔ V_j`: points first, then the level-j vertices.
fn joint_action(tree: &StructureTree, j: usize, gens: &[Permutation], with_points: bool) -> (Vec<Permutation>, usize) {
    let off = if with_points { tree.degree } else { 0 };
    let out = gens
        .iter()
        .map(|g| {
            let mut im: Vec<u32> = if with_points { g.images().to_vec() } else { Vec::new() };
            let va = tree.vertex_action(j, g);
            im.extend(va.images().iter().map(|&v| v + off as u32));
            Permutation::from_images_unchecked(im)
        })
        .collect();
    (out, off)
}

/// `N_j`: the kernel of the action on level-j vertices, as the pointwise
/// stabilizer of those vertices in the joint action on `Ω ⊔ V_j`.
pub fn level_kernel(a: &GenSet, tree: &StructureTree, j: usize) -> Result<StabilizerChain> {
    if j > tree.height() {
        return Err(Error::Domain(format!("level {j} above height {}", tree.height())));
    }
    let n = tree.degree;
    let gens = a.non_identity();
    let (joint, off) = joint_action(tree, j, &gens, true);
    let v = tree.vertex_count(j);
    let prefix: Vec<usize> = (off..off + v).collect();
    let chain = StabilizerChain::with_base(&joint, n + v, &prefix);
    let kernel: Vec<Permutation> = chain
        .stabilizer_generators(v)
        .iter()
        .map(|g| Permutation::from_images_unchecked(g.images()[..n].to_vec()))
        .filter(|g| !g.is_identity())
        .collect();
    Ok(StabilizerChain::new(&kernel, n))
}

/// Coset representatives of `G/N` found by BFS over the quotient's Cayley
/// graph (generators and inverses), so each representative is a shortest
/// word in the images of A.
#[derive(Clone, Debug)]
pub struct QuotientBfs {
    pub reps: Vec<Permutation>,
    pub depths: Vec<usize>,
    pub diameter: usize,
}

/// Quotient BFS where cosets are recognised by `same_coset(x, rep)`.
pub fn quotient_bfs(
    a: &GenSet,
    same_coset: impl Fn(&Permutation, &Permutation) -> bool,
    cap: usize,
) -> Result<QuotientBfs> {
    let n = a.degree();
    let mut letters = a.non_identity();
    letters.extend(a.non_identity().iter().map(Permutation::inverse));
    let mut reps = vec![Permutation::identity(n)];
    let mut depths = vec![0];
    let mut i = 0;
    while i < reps.len() {
        let x = reps[i].clone();
        for g in &letters {
            let y = x.compose(g);
            if !reps.iter().any(|r| same_coset(&y, r)) {
                if reps.len() >= cap {
                    return Err(Error::cap("quotient BFS", cap, reps.len()));
                }
                reps.push(y);
                depths.push(depths[i] + 1);
            }
        }
        i += 1;
    }
    let diameter = *depths.last().unwrap();
    Ok(QuotientBfs { reps, depths, diameter })
}

/// Schreier generators `σ a (rep(σa))^-1` of N from a transversal of the
/// right cosets `Nσ`, each recorded with length `2·depth + 1` bounds.
pub fn schreier_generators(
    a: &GenSet,
    in_n: impl Fn(&Permutation) -> bool,
    reps: &[Permutation],
) -> Result<GenSet> {
    let n = a.degree();
    if reps.is_empty() || reps.iter().all(|r| !in_n(r)) {
        return Err(Error::TransversalIncomplete);
    }
    let invs: Vec<Permutation> = reps.iter().map(Permutation::inverse).collect();
    let mut out = Vec::new();
    for r in reps {
        for g in a.non_identity() {
            let x = r.compose(&g);
            let s = invs
                .iter()
                .map(|si| x.compose(si))
                .find(|y| in_n(y))
                .ok_or(Error::TransversalIncomplete)?;
            if !s.is_identity() {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        return Ok(GenSet::new(n, vec![Permutation::identity(n)])?);
    }
    GenSet::new(n, out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierCheck {
    pub d_quotient: usize,
    pub d_normal: usize,
    pub diameter: usize,
    pub bound: u64,
    pub holds: bool,
    pub quotient_size: usize,
    pub normal_order: BigUint,
    pub generated_order: BigUint,
}

/// Check `diam(G) ≤ (2 diam(G/N) + 1) diam(N) + diam(G/N)` for a concrete
/// generating set, with `N` given by membership and `|N|` known.
pub fn schreier_check(
    a: &GenSet,
    in_n: impl Fn(&Permutation) -> bool,
    normal_order: &BigUint,
    cap: usize,
) -> Result<SchreierCheck> {
    let n = a.degree();
    let q = quotient_bfs(a, |x, r| in_n(&x.compose(&r.inverse())), cap)?;
    let s = schreier_generators(a, &in_n, &q.reps)?;
    if s.iter().any(|g| !in_n(g)) {
        return Err(Error::NotInGroup);
    }
    let sgens = s.non_identity();
    let generated_order = StabilizerChain::new(&sgens, n).order();
    let d_normal = if sgens.is_empty() {
        0
    } else {
        cayley_bfs(&s.symmetrize(), cap)?.diameter
    };
    let diameter = cayley_bfs(&a.symmetrize(), cap)?.diameter;
    let bound = schreier_diameter_bound(q.diameter as u64, d_normal as u64);
    Ok(SchreierCheck {
        d_quotient: q.diameter,
        d_normal,
        diameter,
        bound,
        holds: diameter as u64 <= bound && &generated_order == normal_order,
        quotient_size: q.reps.len(),
        normal_order: normal_order.clone(),
        generated_order,
    })
}

/// `(2 d_q + 1) d_n + d_q`.
pub fn schreier_diameter_bound(d_quotient: u64, d_normal: u64) -> u64 {
    (2 * d_quotient + 1) * d_normal + d_quotient
}

/// How a bound was obtained; values are recomputed from this on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BoundRule {
    /// A measured or supplied value.
    Value { label: String },
    /// `(2 d_q + 1) d_n + d_q` over two children.
    Schreier,
    /// `4^max(ℓ-2, 0) ∏ d_i` over ℓ children; 0 for an empty chain.
    Chain,
    /// `n^(C ln n) ∏ diam(Alt(m_i))` over the children.
    Finbo { n: usize, c: f64 },
    /// `exp(K (ln n)^4 (ln ln n)^2)`.
    Molop { n: usize, k: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamBoundExpr {
    #[serde(flatten)]
    pub rule: BoundRule,
    /// Exact integer value when the rule is integral.
    pub exact: Option<BigUint>,
    pub ln_value: f64,
    pub children: Vec<DiamBoundExpr>,
}

fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl DiamBoundExpr {
    pub fn value(n: u64, label: impl Into<String>) -> Self {
        let exact = BigUint::from(n);
        DiamBoundExpr {
            rule: BoundRule::Value { label: label.into() },
            ln_value: big_ln(&exact),
            exact: Some(exact),
            children: Vec::new(),
        }
    }

    fn build(rule: BoundRule, children: Vec<DiamBoundExpr>) -> Self {
        let (exact, ln_value) = Self::evaluate(&rule, &children, None);
        DiamBoundExpr {
            rule,
            exact,
            ln_value,
            children,
        }
    }

    fn evaluate(rule: &BoundRule, ch: &[DiamBoundExpr], leaf: Option<&BigUint>) -> (Option<BigUint>, f64) {
        let all_exact = || ch.iter().map(|c| c.exact.clone()).collect::<Option<Vec<BigUint>>>();
        match rule {
            BoundRule::Value { .. } => {
                let e = leaf.cloned();
                let l = e.as_ref().map_or(f64::NAN, big_ln);
                (e, l)
            }
            BoundRule::Schreier => match all_exact().as_deref() {
                Some([q, d]) => {
                    let v = (q * 2u32 + 1u32) * d + q;
                    let l = big_ln(&v);
                    (Some(v), l)
                }
                _ => (None, f64::NAN),
            },
            BoundRule::Chain => {
                if ch.is_empty() {
                    return (Some(BigUint::zero()), f64::NEG_INFINITY);
                }
                let e = ch.len().saturating_sub(2) as u32;
                match all_exact() {
                    Some(v) => {
                        let p = v.iter().fold(BigUint::from(4u32).pow(e), |acc, x| acc * x);
                        let l = big_ln(&p);
                        (Some(p), l)
                    }
                    None => {
                        let l = e as f64 * 4f64.ln() + ch.iter().map(|c| c.ln_value).sum::<f64>();
                        (None, l)
                    }
                }
            }
            BoundRule::Finbo { n, c } => {
                let ln_n = (*n as f64).ln();
                (None, c * ln_n * ln_n + ch.iter().map(|x| x.ln_value).sum::<f64>())
            }
            BoundRule::Molop { n, k } => {
                let ln_n = (*n as f64).ln();
                (None, k * ln_n.powi(4) * ln_n.ln().powi(2))
            }
        }
    }

    /// `exp(ln_value)`, possibly infinite.
    pub fn as_f64(&self) -> f64 {
        match &self.exact {
            Some(e) => e.to_f64().unwrap_or(f64::INFINITY),
            None => self.ln_value.exp(),
        }
    }

    /// Every node's value agrees with a recomputation from its children.
    pub fn is_consistent(&self) -> bool {
        let (e, l) = Self::evaluate(&self.rule, &self.children, self.exact.as_ref());
        let close = (l.is_infinite() && l == self.ln_value)
            || (l - self.ln_value).abs() <= 1e-12 * l.abs().max(1.0)
            || (l.is_nan() && self.ln_value.is_nan());
        e == self.exact && close && self.children.iter().all(Self::is_consistent)
    }
}

pub fn schreier_bound_expr(quotient: DiamBoundExpr, normal: DiamBoundExpr) -> DiamBoundExpr {
    DiamBoundExpr::build(BoundRule::Schreier, vec![quotient, normal])
}

/// `4^max(ℓ-2, 0) ∏ d_i` for the successive quotient diameters of a normal
/// series of length ℓ.
pub fn chain_diameter_bound(diams: &[u64]) -> DiamBoundExpr {
    let ch = diams
        .iter()
        .enumerate()
        .map(|(i, &d)| DiamBoundExpr::value(d, format!("diam(H{}/H{})", i + 1, i)))
        .collect();
    DiamBoundExpr::build(BoundRule::Chain, ch)
}

/// `n^(C ln n) ∏ diam(Alt(m_i))` with `∏ m_i ≤ n`.
pub fn finbo_bound(n: usize, ms: &[usize], diam_alt: &dyn Fn(usize) -> Result<u64>, c: f64) -> Result<DiamBoundExpr> {
    if ms.iter().any(|&m| m < 5) {
        return Err(Error::Domain("every m_i must be >= 5".into()));
    }
    let prod = ms.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
    if prod.is_none_or(|p| p > n) {
        return Err(Error::hypothesis(format!("product of {ms:?} exceeds n = {n}")));
    }
    let ch = ms
        .iter()
        .map(|&m| Ok(DiamBoundExpr::value(diam_alt(m)?, format!("diam(Alt({m}))"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiamBoundExpr::build(BoundRule::Finbo { n, c }, ch))
}

/// `exp(K (ln n)^4 (ln ln n)^2)`, kept in the log domain.
pub fn molop_bound(n: usize, k: f64) -> Result<DiamBoundExpr> {
    if n < 3 {
        return Err(Error::Domain("need n >= 3 so that ln ln n > 0".into()));
    }
    Ok(DiamBoundExpr::build(BoundRule::Molop { n, k }, Vec::new()))
}

/// Largest diameter of `Alt(m)` over generating pairs (undirected), for
/// `m ∈ {5, 6}`; first element of the pair ranges over class
/// representatives, which loses nothing since conjugation preserves the
/// diameter.
pub fn alt_worst_pair_diameter(m: usize) -> Result<u64> {
    static TABLE: OnceLock<[u64; 2]> = OnceLock::new();
    if !(5..=6).contains(&m) {
        return Err(Error::Domain(format!("diam(Alt({m})) is tabulated for m = 5, 6 only")));
    }
    let t = TABLE.get_or_init(|| [worst_pair(5), worst_pair(6)]);
    Ok(t[m - 5])
}

fn worst_pair(m: usize) -> u64 {
    let alt = all_even_permutations(m);
    let order = alt.len();
    let mut reps: Vec<Permutation> = Vec::new();
    let mut seen_types: Vec<Vec<usize>> = Vec::new();
    for g in &alt {
        let t = g.cycle_type();
        if !g.is_identity() && !seen_types.contains(&t) {
            seen_types.push(t);
            reps.push(g.clone());
        }
    }
    let mut worst = 0;
    for x in &reps {
        for y in &alt {
            let s = GenSet::new(m, vec![x.clone(), y.clone()]).unwrap().symmetrize();
            if let Ok(b) = cayley_bfs(&s, order + 1) {
                if b.order == order {
                    worst = worst.max(b.diameter as u64);
                }
            }
        }
    }
    worst
}

/// A word for `target` in a full direct product of alternating groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductWord {
    pub word: Word,
    pub length: usize,
    pub factors: usize,
    /// Largest factor degree.
    pub m: usize,
    /// Largest diameter of a factor w.r.t. the projected generators.
    pub d: usize,
    /// `r^3 m d`.
    pub shape: u64,
}

struct ProductWriter<'a> {
    gens: &'a [Permutation],
    n: usize,
    factors: Vec<Vec<usize>>,
    /// Per factor: shortest words for every element of the projection.
    words: Vec<FxHashMap<Permutation, Word>>,
    budget: SearchBudget,
    seed: u64,
    kernel_cache: FxHashMap<(usize, usize), Word>,
}

impl ProductWriter<'_> {
    fn project(&self, g: &Permutation, j: usize) -> Permutation {
        let f = &self.factors[j];
        let images = f
            .iter()
            .map(|&x| f.binary_search(&g.image(x)).expect("factor invariant") as u32)
            .collect();
        Permutation::from_images_unchecked(images)
    }

    fn eval(&self, w: &Word) -> Permutation {
        w.evaluate(self.gens, self.n)
    }

    /// Word with trivial projection to factor `i` and projection to factor
    /// `j` a 3-cycle or a double transposition.
    fn kernel_element(&mut self, i: usize, j: usize) -> Result<Word> {
        if let Some(w) = self.kernel_cache.get(&(i, j)) {
            return Ok(w.clone());
        }
        let mut r = rng::seeded(rng::derive(self.seed, (i * 1000 + j) as u64));
        let k = self.gens.len();
        for _ in 0..self.budget.total_attempts() {
            let len = r.random_range(1..=24);
            let w = Word(
                (0..len)
                    .map(|_| Letter {
                        gen: r.random_range(0..k) as u32,
                        inv: r.random_bool(0.5),
                    })
                    .collect(),
            );
            let x = self.eval(&w);
            let o = self.project(&x, i).order() as usize;
            let g = x.pow(o as i64);
            let gj = self.project(&g, j);
            if gj.is_identity() {
                continue;
            }
            let gw = Word(w.0.iter().copied().cycle().take(w.len() * o).collect());
            let sigma = supconj_witness(&gj)?;
            let hw = self.words[j][&sigma].clone();
            let c = Word::commutator(&gw, &hw);
            self.kernel_cache.insert((i, j), c.clone());
            return Ok(c);
        }
        Err(Error::budget("product_write", format!("no kernel element for factors {i}, {j}")))
    }

    /// Word killed on factor `i` whose projection to `j` is `u`.
    fn base(&mut self, i: usize, j: usize, u: &Permutation) -> Result<Word> {
        let c = self.kernel_element(i, j)?;
        let cj = self.project(&self.eval(&c), j);
        let pieces = if cj.cycle_type() == vec![3] {
            three_cycle_decomposition(u)?
        } else {
            double_transposition_decomposition(u)?
        };
        let mut out = Word::empty();
        for f in pieces {
            let (tau, wt) = self.words[j]
                .iter()
                .filter(|(t, _)| crate::perm::conjugate(&cj, t) == f)
                .min_by_key(|(t, w)| (w.len(), (*t).clone()))
                .ok_or(Error::NotInGroup)?;
            debug_assert_eq!(crate::perm::conjugate(&cj, tau), f);
            out = out.concat(&Word::conjugate(&c, wt));
        }
        Ok(out)
    }

    /// Word trivial on every factor in `kill`, projecting to `u` on `j`.
    fn killed(&mut self, j: usize, kill: &[usize], u: &Permutation) -> Result<Word> {
        if u.is_identity() {
            return Ok(Word::empty());
        }
        if kill.len() == 1 {
            return self.base(kill[0], j, u);
        }
        let (s1, s2) = kill.split_at(kill.len() / 2);
        let (a, b) = commutator_witness(u)?;
        let x = self.killed(j, s1, &a)?;
        let y = self.killed(j, s2, &b)?;
        Ok(Word::commutator(&x, &y))
    }
}

/// Write `target` as a word in `a.elements()` inside a full direct product
/// `Alt(m_1) × … × Alt(m_r)` acting on the disjoint point sets `factors`:
/// per factor, build an element trivial on all other factors by merging
/// kernel elements with commutators, then multiply.
pub fn product_write(
    a: &GenSet,
    factors: &[Vec<usize>],
    target: &Permutation,
    budget: &SearchBudget,
    seed: u64,
) -> Result<ProductWord> {
    let n = a.degree();
    let gens = a.elements();
    let mut fs: Vec<Vec<usize>> = factors.to_vec();
    for f in &mut fs {
        f.sort_unstable();
    }
    let mut seen = vec![false; n];
    for f in &fs {
        if f.len() < 5 || f.len() > COMMUTATOR_CAP {
            return Err(Error::Domain(format!("factor degree {} outside 5..={COMMUTATOR_CAP}", f.len())));
        }
        for &x in f {
            if x >= n || seen[x] {
                return Err(Error::Domain("factors must be disjoint point sets".into()));
            }
            seen[x] = true;
        }
    }
    let in_product = |g: &Permutation| {
        (0..n).all(|x| seen[x] || g.image(x) == x)
            && fs.iter().all(|f| {
                f.iter().all(|&x| f.binary_search(&g.image(x)).is_ok())
                    && g.restrict(f).map(|r| r.is_even()).unwrap_or(false)
            })
    };
    if target.degree() != n {
        return Err(Error::DegreeMismatch(n, target.degree()));
    }
    if !gens.iter().all(in_product) {
        return Err(Error::NotFullProduct);
    }
    let full: BigUint = fs.iter().map(|f| factorial(f.len()) / 2u32).product();
    if StabilizerChain::new(gens, n).order() != full {
        return Err(Error::NotFullProduct);
    }
    if !in_product(target) {
        return Err(Error::NotInGroup);
    }
    let mut w = ProductWriter {
        gens,
        n,
        factors: fs.clone(),
        words: Vec::new(),
        budget: *budget,
        seed,
        kernel_cache: FxHashMap::default(),
    };
    for j in 0..fs.len() {
        let proj: Vec<Permutation> = gens.iter().map(|g| w.project(g, j)).collect();
        w.words.push(cayley_words(&proj, fs[j].len(), 10_000)?);
    }
    let r = fs.len();
    let mut word = Word::empty();
    for j in 0..r {
        let tj = w.project(target, j);
        let part = if r == 1 {
            w.words[0][&tj].clone()
        } else {
            let others: Vec<usize> = (0..r).filter(|&i| i != j).collect();
            w.killed(j, &others, &tj)?
        };
        word = word.concat(&part);
    }
    if w.eval(&word) != *target {
        return Err(Error::Hypothesis("product word does not re-evaluate to the target".into()));
    }
    let m = fs.iter().map(Vec::len).max().unwrap_or(0);
    let d = w.words.iter().map(|t| t.values().map(Word::len).max().unwrap_or(0)).max().unwrap_or(0);
    Ok(ProductWord {
        length: word.len(),
        word,
        factors: r,
        m,
        d,
        shape: (r as u64).pow(3) * m as u64 * d as u64,
    })
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime: a^(p-2)
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Write `target ∈ (Z/p)^r` as `Σ c_k v_k` over an echelon basis drawn from
/// `gens`, with signed coefficients `|c_k| ≤ ⌊p/2⌋`; the word repeats
/// generator k (inverted when negative) `|c_k|` times.
pub fn abelian_product_write(p: u64, r: usize, gens: &[Vec<u64>], target: &[u64]) -> Result<Word> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if gens.iter().any(|g| g.len() != r) || target.len() != r {
        return Err(Error::DegreeMismatch(r, target.len()));
    }
    // Incremental elimination: reduced rows with pivot columns, each row
    // tracked as a combination of original generators.
    let k = gens.len();
    let mut rows: Vec<(Vec<u64>, Vec<u64>, usize)> = Vec::new();
    let reduce = |v: &mut Vec<u64>, comb: &mut Vec<u64>, rows: &[(Vec<u64>, Vec<u64>, usize)]| {
        for (rv, rc, piv) in rows {
            let f = v[*piv];
            if f != 0 {
                for t in 0..r {
                    v[t] = (v[t] + p - f * rv[t] % p) % p;
                }
                for t in 0..k {
                    comb[t] = (comb[t] + p - f * rc[t] % p) % p;
                }
            }
        }
    };
    for (i, g) in gens.iter().enumerate() {
        let mut v: Vec<u64> = g.iter().map(|x| x % p).collect();
        let mut comb = vec![0; k];
        comb[i] = 1;
        reduce(&mut v, &mut comb, &rows);
        if let Some(piv) = v.iter().position(|&x| x != 0) {
            let inv = mod_inv(v[piv], p);
            v.iter_mut().for_each(|x| *x = *x * inv % p);
            comb.iter_mut().for_each(|x| *x = *x * inv % p);
            for (rv, rc, _) in rows.iter_mut() {
                let f = rv[piv];
                if f != 0 {
                    for t in 0..r {
                        rv[t] = (rv[t] + p - f * v[t] % p) % p;
                    }
                    for t in 0..k {
                        rc[t] = (rc[t] + p - f * comb[t] % p) % p;
                    }
                }
            }
            rows.push((v, comb, piv));
        }
    }
    let mut v: Vec<u64> = target.iter().map(|x| x % p).collect();
    let mut coeffs = vec![0u64; k];
    for (rv, rc, piv) in &rows {
        let f = v[*piv];
        if f != 0 {
            for t in 0..r {
                v[t] = (v[t] + p - f * rv[t] % p) % p;
            }
            for t in 0..k {
                coeffs[t] = (coeffs[t] + f * rc[t]) % p;
            }
        }
    }
    if v.iter().any(|&x| x != 0) {
        return Err(Error::NotInSpan);
    }
    let mut word = Word::empty();
    for (g, &c) in coeffs.iter().enumerate() {
        let (times, inv) = if c <= p / 2 { (c, false) } else { (p - c, true) };
        for _ in 0..times {
            word.0.push(Letter { gen: g as u32, inv });
        }
    }
    Ok(word)
}

/// Evaluate an additive word over `(Z/p)^r`.
pub fn abelian_evaluate(p: u64, r: usize, gens: &[Vec<u64>], word: &Word) -> Vec<u64> {
    let mut acc = vec![0u64; r];
    for l in &word.0 {
        let g = &gens[l.gen as usize];
        for t in 0..r {
            acc[t] = if l.inv {
                (acc[t] + p - g[t] % p) % p
            } else {
                (acc[t] + g[t]) % p
            };
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub vertices: usize,
    /// Children per vertex: the degree of the primitive action `G_v/K_v`.
    pub degree: usize,
    pub action_order: BigUint,
    /// Giant classification of that action; degrees below 5 are reported as
    /// `Neither` since `Alt(m)` is then solvable.
    pub giant: GiantClass,
    /// `|N_j|`.
    pub kernel_order: BigUint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeAnalysis {
    pub levels: Vec<LevelReport>,
    /// `|N_h|` at the leaves (1 for a faithful action).
    pub leaf_kernel_order: BigUint,
    /// Degrees of giant actions, the candidate `m_i`.
    pub candidate_ms: Vec<usize>,
}

/// Per internal level: the action of a vertex stabilizer on its children
/// (order and giant class) and the level kernel.
pub fn tree_level_analysis(a: &GenSet, tree: &StructureTree) -> Result<TreeAnalysis> {
    let gens = a.non_identity();
    let mut levels = Vec::new();
    let mut candidate_ms = Vec::new();
    for j in 0..tree.height() {
        let kids = tree.children(j, 0);
        let below = tree.vertex_count(j + 1);
        // joint action on V_{j+1} ⊔ V_j, stabilize vertex 0 of level j
        let joint: Vec<Permutation> = gens
            .iter()
            .map(|g| {
                let mut im = tree.vertex_action(j + 1, g).images().to_vec();
                im.extend(tree.vertex_action(j, g).images().iter().map(|&v| v + below as u32));
                Permutation::from_images_unchecked(im)
            })
            .collect();
        let chain = StabilizerChain::with_base(&joint, below + tree.vertex_count(j), &[below]);
        let restricted: Vec<Permutation> = chain
            .stabilizer_generators(1)
            .iter()
            .map(|g| {
                let im = kids
                    .iter()
                    .map(|&c| kids.binary_search(&g.image(c)).expect("children are a block") as u32)
                    .collect();
                Permutation::from_images_unchecked(im)
            })
            .collect();
        let action_order = StabilizerChain::new(&restricted, kids.len()).order();
        let giant = if kids.len() >= 5 {
            classify_order(&action_order, kids.len())
        } else {
            GiantClass::Neither
        };
        if giant.is_giant() {
            candidate_ms.push(kids.len());
        }
        levels.push(LevelReport {
            level: j,
            vertices: tree.vertex_count(j),
            degree: kids.len(),
            action_order,
            giant,
            kernel_order: level_kernel(a, tree, j)?.order(),
        });
    }
    Ok(TreeAnalysis {
        leaf_kernel_order: level_kernel(a, tree, tree.height())?.order(),
        levels,
        candidate_ms,
    })
}

/// `|G|` as a product of the successive kernel quotients `|N_j / N_{j+1}|`.
pub fn kernel_quotients(analysis: &TreeAnalysis) -> Vec<BigUint> {
    let mut orders: Vec<BigUint> = analysis.levels.iter().map(|l| l.kernel_order.clone()).collect();
    orders.push(analysis.leaf_kernel_order.clone());
    orders.windows(2).map(|w| &w[0] / &w[1]).collect()
}

/// `∏ |N_j/N_{j+1}| · |N_h| = |G|`, an internal consistency check.
pub fn kernel_series_consistent(analysis: &TreeAnalysis, group_order: &BigUint) -> bool {
    let prod: BigUint = kernel_quotients(analysis).iter().product();
    let total = prod * &analysis.leaf_kernel_order;
    let divides = analysis.levels.windows(2).all(|w| (&w[0].kernel_order % &w[1].kernel_order).is_zero());
    divides && &total == group_order && analysis.levels.first().is_none_or(|l| &l.kernel_order == group_order)
}

impl TreeAnalysis {
    pub fn group_order(&self) -> BigUint {
        self.levels
            .first()
            .map_or_else(BigUint::one, |l| l.kernel_order.clone())
    }
}
