//! Orbits, transitivity, block systems, stabilizer chains and giant detection.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{GenSet, Permutation, Tracked};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    /// Orbits sorted internally and ordered by least point.
    #[serde(with = "crate::perm::one_based")]
    pub orbits: Vec<Vec<usize>>,
    pub point_to_orbit: Vec<usize>,
}

impl OrbitDecomposition {
    pub fn is_transitive(&self) -> bool {
        self.orbits.len() == 1
    }

    pub fn orbit_of(&self, x: usize) -> &[usize] {
        &self.orbits[self.point_to_orbit[x]]
    }

    pub fn largest(&self) -> &[usize] {
        self.orbits
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Orbits of the group generated by `gens` on `0..n`.
pub fn orbits_of(gens: &[Permutation], n: usize) -> OrbitDecomposition {
    let mut point_to_orbit = vec![usize::MAX; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if point_to_orbit[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orb = vec![start];
        point_to_orbit[start] = id;
        let mut i = 0;
        while i < orb.len() {
            let x = orb[i];
            for g in gens {
                let y = g.image(x);
                if point_to_orbit[y] == usize::MAX {
                    point_to_orbit[y] = id;
                    orb.push(y);
                }
            }
            i += 1;
        }
        orb.sort_unstable();
        orbits.push(orb);
    }
    OrbitDecomposition {
        orbits,
        point_to_orbit,
    }
}

pub fn orbits(a: &GenSet) -> OrbitDecomposition {
    orbits_of(a.elements(), a.degree())
}

/// Orbit of one point under the generated group, in discovery order.
pub fn orbit_of_point(gens: &[Permutation], n: usize, x: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut orb = vec![x];
    let mut i = 0;
    while i < orb.len() {
        let y = orb[i];
        for g in gens {
            let z = g.image(y);
            if !seen[z] {
                seen[z] = true;
                orb.push(z);
            }
        }
        i += 1;
    }
    orb
}

/// One-step image set `x^S = {x^s : s ∈ S}` of a point under a set.
pub fn point_images<'a>(set: impl IntoIterator<Item = &'a Permutation>, x: usize) -> Vec<usize> {
    let mut v: Vec<usize> = set.into_iter().map(|s| s.image(x)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// n (n-1) ... (n-k+1), saturating.
pub fn falling_factorial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128))
}

const TUPLE_BFS_LIMIT: u128 = 200_000;

pub fn is_k_transitive(a: &GenSet, k: usize) -> bool {
    is_k_transitive_gens(a.elements(), a.degree(), k)
}

pub fn is_k_transitive_gens(gens: &[Permutation], n: usize, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    if k > n {
        return false;
    }
    let target = falling_factorial(n, k);
    if target <= TUPLE_BFS_LIMIT {
        let start: Vec<u32> = (0..k as u32).collect();
        let mut seen: FxHashSet<Vec<u32>> = FxHashSet::default();
        seen.insert(start.clone());
        let mut stack = vec![start];
        let mut buf = Vec::with_capacity(k);
        while let Some(t) = stack.pop() {
            for g in gens {
                buf.clear();
                buf.extend(t.iter().map(|&x| g.images()[x as usize]));
                if !seen.contains(buf.as_slice()) {
                    seen.insert(buf.clone());
                    stack.push(buf.clone());
                }
            }
        }
        seen.len() as u128 == target
    } else {
        let base: Vec<usize> = (0..k).collect();
        let chain = StabilizerChain::with_base(gens, n, &base);
        (0..k).all(|l| chain.levels[l].orbit.len() == n - l)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSystem {
    /// Sorted blocks ordered by least point.
    #[serde(with = "crate::perm::one_based")]
    pub blocks: Vec<Vec<usize>>,
    pub block_size: usize,
    pub count: usize,
}

impl BlockSystem {
    pub fn from_labels(labels: &[usize]) -> Self {
        let n = labels.len();
        let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, &l) in labels.iter().enumerate() {
            by_label[l].push(x);
        }
        let mut blocks: Vec<Vec<usize>> = by_label.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort_unstable_by_key(|b| b[0]);
        let block_size = blocks.first().map_or(0, Vec::len);
        let count = blocks.len();
        BlockSystem {
            blocks,
            block_size,
            count,
        }
    }

    pub fn point_to_block(&self) -> Vec<usize> {
        let n: usize = self.blocks.iter().map(Vec::len).sum();
        let mut v = vec![0; n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                v[x] = i;
            }
        }
        v
    }

    pub fn is_trivial(&self) -> bool {
        self.count <= 1 || self.block_size <= 1
    }

    /// True when every generator maps blocks onto blocks.
    pub fn is_invariant(&self, gens: &[Permutation]) -> bool {
        let pb = self.point_to_block();
        gens.iter().all(|g| {
            self.blocks.iter().all(|b| {
                let t = pb[g.image(b[0])];
                b.iter().all(|&x| pb[g.image(x)] == t)
            })
        })
    }

    /// Action of a permutation on the blocks.
    pub fn induced(&self, g: &Permutation) -> Permutation {
        let pb = self.point_to_block();
        let images = self.blocks.iter().map(|b| pb[g.image(b[0])] as u32).collect();
        Permutation::from_images_unchecked(images)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Finest block system in which `a` and `b` share a block (pair closure).
pub fn minimal_block_system(gens: &[Permutation], n: usize, a: usize, b: usize) -> BlockSystem {
    let mut uf = UnionFind::new(n);
    let mut queue = vec![(a, b)];
    uf.union(a, b);
    while let Some((x, y)) = queue.pop() {
        for g in gens {
            let (gx, gy) = (g.image(x), g.image(y));
            if uf.union(gx, gy) {
                queue.push((gx, gy));
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|x| uf.find(x)).collect();
    BlockSystem::from_labels(&labels)
}

/// All minimal nontrivial block systems of a transitive group, ordered by the
/// block containing point 0 (smallest first, then lexicographic).
pub fn block_systems_minimal(a: &GenSet) -> Result<Vec<BlockSystem>> {
    block_systems_minimal_gens(a.elements(), a.degree())
}

pub fn block_systems_minimal_gens(gens: &[Permutation], n: usize) -> Result<Vec<BlockSystem>> {
    if !orbits_of(gens, n).is_transitive() {
        return Err(Error::NotTransitive);
    }
    let mut found: Vec<BlockSystem> = Vec::new();
    for w in 1..n {
        let bs = minimal_block_system(gens, n, 0, w);
        if bs.count > 1 && !found.contains(&bs) {
            found.push(bs);
        }
    }
    let zero_block = |bs: &BlockSystem| bs.blocks[0].clone();
    let minimal: Vec<BlockSystem> = found
        .iter()
        .filter(|bs| {
            let b = zero_block(bs);
            !found.iter().any(|o| {
                let ob = zero_block(o);
                ob.len() < b.len() && ob.iter().all(|x| b.binary_search(x).is_ok())
            })
        })
        .cloned()
        .collect();
    let mut minimal = minimal;
    minimal.sort_by(|x, y| {
        let (bx, by) = (zero_block(x), zero_block(y));
        bx.len().cmp(&by.len()).then(bx.cmp(&by))
    });
    Ok(minimal)
}

pub fn is_primitive(a: &GenSet) -> Result<bool> {
    Ok(block_systems_minimal(a)?.is_empty())
}

/// `S_(Σ)`: elements fixing every point of Σ.
pub fn pointwise_stabilizer_subset<'a>(
    set: impl IntoIterator<Item = &'a Permutation>,
    sigma: &[usize],
) -> Vec<Permutation> {
    set.into_iter()
        .filter(|g| sigma.iter().all(|&x| g.image(x) == x))
        .cloned()
        .collect()
}

/// `S_Σ`: elements mapping Σ onto itself.
pub fn setwise_stabilizer_subset<'a>(
    set: impl IntoIterator<Item = &'a Permutation>,
    sigma: &[usize],
) -> Vec<Permutation> {
    let n_hint = sigma.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![false; n_hint];
    for &x in sigma {
        inside[x] = true;
    }
    set.into_iter()
        .filter(|g| {
            sigma.iter().all(|&x| {
                let y = g.image(x);
                y < n_hint && inside[y]
            })
        })
        .cloned()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GiantClass {
    Sym,
    Alt,
    Neither,
}

impl GiantClass {
    pub fn is_giant(self) -> bool {
        self != GiantClass::Neither
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Classify the action on an invariant set Δ by exact order.
pub fn is_giant_on(a: &GenSet, delta: &[usize]) -> Result<GiantClass> {
    giant_on_gens(a.elements(), delta)
}

pub fn giant_on_gens(gens: &[Permutation], delta: &[usize]) -> Result<GiantClass> {
    let mut d = delta.to_vec();
    d.sort_unstable();
    d.dedup();
    let restricted: Vec<Permutation> =
        gens.iter().map(|g| g.restrict(&d)).collect::<Result<_>>()?;
    Ok(classify_order(
        &StabilizerChain::new(&restricted, d.len()).order(),
        d.len(),
    ))
}

pub fn classify_order(order: &BigUint, m: usize) -> GiantClass {
    let f = factorial(m);
    if *order == f {
        GiantClass::Sym
    } else if order * 2u32 == f || (m <= 1 && order.is_one()) {
        GiantClass::Alt
    } else {
        GiantClass::Neither
    }
}

/// Greedy generator reduction: keep an element only if it lies outside the
/// group generated by those kept so far (so the kept subgroups form a strictly
/// increasing chain).
pub fn reduce_generators(a: &GenSet) -> GenSet {
    let n = a.degree();
    let sym = a.symmetrize();
    let mut kept: Vec<Tracked> = Vec::new();
    let mut chain = StabilizerChain::new(&[], n);
    for t in sym.tracked() {
        if t.perm.is_identity() || chain.contains(&t.perm) {
            continue;
        }
        chain.add_generator(t.perm.clone());
        kept.push(t.inverse());
        kept.push(t);
    }
    if kept.is_empty() {
        kept.push(Tracked::identity(n));
    }
    GenSet::from_tracked(n, kept).expect("degrees agree")
}

#[derive(Clone, Debug)]
pub struct Level {
    pub base: usize,
    pub gens: Vec<Permutation>,
    pub orbit: Vec<usize>,
    /// `u[x]` maps the base point to `x`.
    u: Vec<Option<Permutation>>,
    uinv: Vec<Option<Permutation>>,
}

impl Level {
    fn new(n: usize, base: usize, gens: Vec<Permutation>) -> Self {
        let mut l = Level {
            base,
            gens,
            orbit: Vec::new(),
            u: vec![None; n],
            uinv: vec![None; n],
        };
        l.rebuild(n);
        l
    }

    fn rebuild(&mut self, n: usize) {
        self.u = vec![None; n];
        self.uinv = vec![None; n];
        let id = Permutation::identity(n);
        self.u[self.base] = Some(id.clone());
        self.uinv[self.base] = Some(id);
        self.orbit = vec![self.base];
        let mut i = 0;
        while i < self.orbit.len() {
            let x = self.orbit[i];
            for g in &self.gens {
                let y = g.image(x);
                if self.u[y].is_none() {
                    let uy = self.u[x].as_ref().unwrap().compose(g);
                    self.uinv[y] = Some(uy.inverse());
                    self.u[y] = Some(uy);
                    self.orbit.push(y);
                }
            }
            i += 1;
        }
    }

    pub fn transversal(&self, x: usize) -> Option<&Permutation> {
        self.u[x].as_ref()
    }

    pub fn transversal_inverse(&self, x: usize) -> Option<&Permutation> {
        self.uinv[x].as_ref()
    }
}

/// Base and strong generating set with full transversals.
#[derive(Clone, Debug)]
pub struct StabilizerChain {
    n: usize,
    pub levels: Vec<Level>,
}

const RANDOM_SIFTS_WITHOUT_PROGRESS: usize = 24;

impl StabilizerChain {
    pub fn new(gens: &[Permutation], n: usize) -> Self {
        StabilizerChain::with_base(gens, n, &[])
    }

    pub fn from_genset(a: &GenSet) -> Self {
        StabilizerChain::new(a.elements(), a.degree())
    }

    /// Chain whose base starts with `prefix`.
    ///
    /// A seeded random Schreier–Sims phase builds a candidate chain; if its
    /// order reaches the a priori upper bound the chain is exact, otherwise a
    /// deterministic Schreier–Sims pass completes and certifies it.
    pub fn with_base(gens: &[Permutation], n: usize, prefix: &[usize]) -> Self {
        let gens: Vec<Permutation> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabilizerChain { n, levels: Vec::new() };
        for &b in prefix {
            chain.levels.push(Level::new(n, b, Vec::new()));
        }
        if gens.is_empty() {
            return chain;
        }
        if chain.levels.is_empty() {
            let b = gens[0].support()[0];
            chain.levels.push(Level::new(n, b, Vec::new()));
        }
        chain.levels[0].gens = gens.clone();
        chain.levels[0].rebuild(n);

        let bound = order_upper_bound(&gens, n);
        chain.random_phase(&gens, &bound);
        if chain.order() != bound {
            chain.complete();
        }
        chain
    }

    fn random_phase(&mut self, gens: &[Permutation], bound: &BigUint) {
        let mut r = rng::seeded(0x5eed_c4a1 ^ self.n as u64);
        let mut pr = ProductReplacement::new(gens, self.n, &mut r);
        let mut idle = 0;
        while idle < RANDOM_SIFTS_WITHOUT_PROGRESS && self.order() != *bound {
            let g = pr.next(&mut r);
            let (h, j) = self.sift_from(&g, 0);
            if h.is_identity() {
                idle += 1;
            } else {
                idle = 0;
                self.insert_strong(h, j, 0);
            }
        }
    }

    /// Add `h` (which fixes the first `j` base points) to levels `0..=j`,
    /// appending a base point if needed, and rebuild levels `from..=j`.
    fn insert_strong(&mut self, h: Permutation, j: usize, from: usize) {
        if j == self.levels.len() {
            let b = h.support()[0];
            self.levels.push(Level::new(self.n, b, Vec::new()));
        }
        for l in 0..=j {
            self.levels[l].gens.push(h.clone());
        }
        for l in from..=j {
            self.levels[l].rebuild(self.n);
        }
    }

    /// Deterministic Schreier–Sims: check every Schreier generator bottom-up.
    fn complete(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let l = i as usize;
            let mut restart = None;
            let orbit = self.levels[l].orbit.clone();
            let sgens = self.levels[l].gens.clone();
            'scan: for &x in &orbit {
                for s in &sgens {
                    let y = s.image(x);
                    let lev = &self.levels[l];
                    let sg = lev.u[x]
                        .as_ref()
                        .unwrap()
                        .compose(s)
                        .compose(lev.uinv[y].as_ref().unwrap());
                    if sg.is_identity() {
                        continue;
                    }
                    let (h, j) = self.sift_from(&sg, l + 1);
                    if !h.is_identity() {
                        self.insert_strong(h, j, l + 1);
                        restart = Some(j);
                        break 'scan;
                    }
                }
            }
            match restart {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }

    /// Strip `g` through levels `from..`; returns the residue and the level
    /// at which sifting stopped (`levels.len()` if it passed every level).
    pub fn sift_from(&self, g: &Permutation, from: usize) -> (Permutation, usize) {
        let mut g = g.clone();
        for (l, lev) in self.levels.iter().enumerate().skip(from) {
            let x = g.image(lev.base);
            match &lev.uinv[x] {
                Some(ui) => g = g.compose(ui),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    pub fn sift(&self, g: &Permutation) -> (Permutation, usize) {
        self.sift_from(g, 0)
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        if g.degree() != self.n {
            return false;
        }
        let (h, j) = self.sift(g);
        j == self.levels.len() && h.is_identity()
    }

    /// Add a generator and restore the chain invariants.
    pub fn add_generator(&mut self, g: Permutation) {
        if g.is_identity() || self.contains(&g) {
            return;
        }
        if self.levels.is_empty() {
            let b = g.support()[0];
            self.levels.push(Level::new(self.n, b, Vec::new()));
        }
        self.levels[0].gens.push(g);
        self.levels[0].rebuild(self.n);
        self.complete();
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn order_u128(&self) -> Option<u128> {
        self.order().to_u128()
    }

    pub fn strong_generators(&self) -> &[Permutation] {
        self.levels.first().map_or(&[], |l| l.gens.as_slice())
    }

    /// Generators of the stabilizer of the first `l` base points.
    pub fn stabilizer_generators(&self, l: usize) -> Vec<Permutation> {
        self.levels.get(l).map_or(Vec::new(), |lv| lv.gens.clone())
    }

    /// Chain for the pointwise stabilizer of the first `l` base points.
    pub fn stabilizer_chain(&self, l: usize) -> StabilizerChain {
        StabilizerChain {
            n: self.n,
            levels: self.levels[l.min(self.levels.len())..].to_vec(),
        }
    }

    /// Uniformly random element (product of random transversal elements).
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Permutation {
        let mut g = Permutation::identity(self.n);
        for lev in self.levels.iter().rev() {
            let x = lev.orbit[rng.random_range(0..lev.orbit.len())];
            g = g.compose(lev.u[x].as_ref().unwrap());
        }
        g
    }

    /// Every element, for groups small enough to list.
    pub fn elements(&self, cap: usize) -> Result<Vec<Permutation>> {
        let ord = self.order().to_usize().unwrap_or(usize::MAX);
        if ord > cap {
            return Err(Error::cap("group enumeration", cap, 0));
        }
        let mut out = vec![Permutation::identity(self.n)];
        for lev in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * lev.orbit.len());
            for g in &out {
                for &x in &lev.orbit {
                    next.push(g.compose(lev.u[x].as_ref().unwrap()));
                }
            }
            out = next;
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// `∏ |O|!` over orbits, halved when every generator is even and some orbit
/// has at least two points.
pub fn order_upper_bound(gens: &[Permutation], n: usize) -> BigUint {
    let orbs = orbits_of(gens, n);
    let mut b = BigUint::one();
    for o in &orbs.orbits {
        b *= factorial(o.len());
    }
    let all_even = gens.iter().all(Permutation::is_even);
    if all_even && orbs.orbits.iter().any(|o| o.len() >= 2) {
        b /= 2u32;
    }
    b
}

/// Product-replacement generator of (nearly) uniform random elements.
pub struct ProductReplacement {
    state: Vec<Permutation>,
    acc: Permutation,
}

impl ProductReplacement {
    pub fn new<R: Rng>(gens: &[Permutation], n: usize, rng: &mut R) -> Self {
        let mut state: Vec<Permutation> = gens.to_vec();
        if state.is_empty() {
            state.push(Permutation::identity(n));
        }
        let base = state.clone();
        while state.len() < 10 {
            state.push(base[state.len() % base.len()].clone());
        }
        let mut pr = ProductReplacement {
            state,
            acc: Permutation::identity(n),
        };
        for _ in 0..50 {
            pr.next(rng);
        }
        pr
    }

    pub fn next<R: Rng>(&mut self, rng: &mut R) -> Permutation {
        let r = self.state.len();
        let i = rng.random_range(0..r);
        let mut j = rng.random_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let rhs = if rng.random_bool(0.5) {
            self.state[j].clone()
        } else {
            self.state[j].inverse()
        };
        self.state[i] = if rng.random_bool(0.5) {
            self.state[i].compose(&rhs)
        } else {
            rhs.compose(&self.state[i])
        };
        self.acc = self.acc.compose(&self.state[i]);
        self.acc.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::perm::{all_permutations, power_set, PermSet};
    use proptest::prelude::*;

    fn c(n: usize, cs: &[&[usize]]) -> Permutation {
        Permutation::cycles1(n, cs)
    }

    fn gs(n: usize, gens: Vec<Permutation>) -> GenSet {
        GenSet::new(n, gens).unwrap()
    }

    /// Closure by BFS over the Cayley graph — the enumeration oracle.
    fn closure(gens: &[Permutation], n: usize) -> PermSet {
        let mut seen: PermSet = PermSet::default();
        let id = Permutation::identity(n);
        seen.insert(id.clone());
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            for g in gens {
                let y = x.compose(g);
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn orbit_examples() {
        let o = orbits(&gs(5, vec![Permutation::identity(5)]));
        assert_eq!(o.orbits.len(), 5);
        let o = orbits(&gs(5, vec![c(5, &[&[1, 2]]), c(5, &[&[3, 4, 5]])]));
        assert_eq!(o.orbits, vec![vec![0, 1], vec![2, 3, 4]]);
        assert!(orbits(&gs(6, vec![c(6, &[&[1, 2, 3, 4, 5, 6]])])).is_transitive());
    }

    #[test]
    fn transitivity_examples() {
        let s4 = gs(4, vec![c(4, &[&[1, 2]]), c(4, &[&[1, 2, 3, 4]])]);
        assert!(is_k_transitive(&s4, 4));
        let v4 = gs(4, vec![c(4, &[&[1, 2], &[3, 4]]), c(4, &[&[1, 3], &[2, 4]])]);
        assert!(is_k_transitive(&v4, 1));
        assert!(!is_k_transitive(&v4, 2));
        assert!(!is_k_transitive(&s4, 5));
    }

    #[test]
    fn transitivity_by_chain_matches_tuples() {
        // Alt(12) is 10-transitive, not 11-transitive; force the chain path.
        let n = 12;
        let a = vec![c(n, &[&[1, 2, 3]]), Permutation::cycles1(n, &[&(2..=12).collect::<Vec<_>>()])];
        assert!(falling_factorial(n, 10) > TUPLE_BFS_LIMIT);
        assert!(is_k_transitive_gens(&a, n, 10));
        assert!(!is_k_transitive_gens(&a, n, 11));
        assert!(is_k_transitive_gens(&a, n, 3));
    }

    #[test]
    fn block_examples() {
        let d4 = gs(4, vec![c(4, &[&[1, 2, 3, 4]]), c(4, &[&[1, 3]])]);
        let bs = block_systems_minimal(&d4).unwrap();
        assert!(bs.iter().any(|b| b.blocks == vec![vec![0, 2], vec![1, 3]]));
        for b in &bs {
            assert!(b.is_invariant(d4.elements()));
        }
        let s5 = gs(5, vec![c(5, &[&[1, 2]]), c(5, &[&[1, 2, 3, 4, 5]])]);
        assert!(is_primitive(&s5).unwrap());
        let c7 = gs(7, vec![c(7, &[&[1, 2, 3, 4, 5, 6, 7]])]);
        assert!(is_primitive(&c7).unwrap());
        let intrans = gs(4, vec![c(4, &[&[1, 2]])]);
        assert_eq!(is_primitive(&intrans), Err(Error::NotTransitive));
    }

    #[test]
    fn cyclic_of_order_six_has_two_minimal_systems() {
        let c6 = gs(6, vec![c(6, &[&[1, 2, 3, 4, 5, 6]])]);
        let bs = block_systems_minimal(&c6).unwrap();
        let sizes: Vec<usize> = bs.iter().map(|b| b.block_size).collect();
        assert_eq!(sizes, vec![2, 3]);
    }

    #[test]
    fn chain_orders() {
        let s5 = vec![c(5, &[&[1, 2]]), c(5, &[&[1, 2, 3, 4, 5]])];
        assert_eq!(StabilizerChain::new(&s5, 5).order(), BigUint::from(120u32));
        let a5 = vec![c(5, &[&[1, 2, 3]]), c(5, &[&[3, 4, 5]])];
        let ch = StabilizerChain::new(&a5, 5);
        assert_eq!(ch.order(), BigUint::from(60u32));
        assert!(!ch.contains(&c(5, &[&[1, 2]])));
        assert!(ch.contains(&c(5, &[&[1, 2], &[3, 4]])));
        assert_eq!(StabilizerChain::new(&[], 4).order(), BigUint::one());
    }

    #[test]
    fn chain_with_base_prefix() {
        let s5 = vec![c(5, &[&[1, 2]]), c(5, &[&[1, 2, 3, 4, 5]])];
        let ch = StabilizerChain::with_base(&s5, 5, &[4, 2]);
        assert_eq!(&ch.base()[..2], &[4, 2]);
        assert_eq!(ch.order(), BigUint::from(120u32));
        assert_eq!(ch.levels[1].orbit.len(), 4);
    }

    #[test]
    fn chain_elements_enumerate_group() {
        let d4 = vec![c(4, &[&[1, 2, 3, 4]]), c(4, &[&[1, 3]])];
        let ch = StabilizerChain::new(&d4, 4);
        let els = ch.elements(100).unwrap();
        assert_eq!(els.len(), 8);
        let cl = closure(&d4, 4);
        assert!(els.iter().all(|g| cl.contains(g)));
    }

    #[test]
    fn large_giant_orders() {
        let n = 40;
        let cyc: Vec<usize> = (1..=n).collect();
        let s = vec![c(n, &[&[1, 2]]), c(n, &[&cyc])];
        assert_eq!(StabilizerChain::new(&s, n).order(), factorial(n));
        let a = vec![c(n, &[&[1, 2, 3]]), c(n, &[&cyc[1..]])];
        assert_eq!(StabilizerChain::new(&a, n).order() * 2u32, factorial(n));
    }

    #[test]
    fn imprimitive_order_needs_completion() {
        // Sym(3) wr Sym(2) on 6 points has order 72.
        let g = vec![
            c(6, &[&[1, 2]]),
            c(6, &[&[1, 2, 3]]),
            c(6, &[&[1, 4], &[2, 5], &[3, 6]]),
        ];
        assert_eq!(StabilizerChain::new(&g, 6).order(), BigUint::from(72u32));
    }

    #[test]
    fn add_generator_grows_chain() {
        let mut ch = StabilizerChain::new(&[c(5, &[&[1, 2, 3, 4, 5]])], 5);
        assert_eq!(ch.order(), BigUint::from(5u32));
        ch.add_generator(c(5, &[&[1, 2]]));
        assert_eq!(ch.order(), BigUint::from(120u32));
    }

    #[test]
    fn stabilizer_subsets() {
        let s3 = all_permutations(3);
        let p = pointwise_stabilizer_subset(&s3, &[0]);
        assert_eq!(p.len(), 2);
        assert!(p.contains(&c(3, &[&[2, 3]])));
        assert_eq!(pointwise_stabilizer_subset(&s3, &[]).len(), 6);
        let s = setwise_stabilizer_subset(&s3, &[0, 1]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&c(3, &[&[1, 2]])));
    }

    #[test]
    fn giant_examples() {
        let full: Vec<usize> = (0..5).collect();
        let a5 = gs(5, vec![c(5, &[&[1, 2, 3]]), c(5, &[&[3, 4, 5]])]);
        assert_eq!(is_giant_on(&a5, &full).unwrap(), GiantClass::Alt);
        let s5 = gs(5, vec![c(5, &[&[1, 2]]), c(5, &[&[1, 2, 3, 4, 5]])]);
        assert_eq!(is_giant_on(&s5, &full).unwrap(), GiantClass::Sym);
        let c5 = gs(5, vec![c(5, &[&[1, 2, 3, 4, 5]])]);
        assert_eq!(is_giant_on(&c5, &full).unwrap(), GiantClass::Neither);
        let part = gs(5, vec![c(5, &[&[1, 2, 3]]), c(5, &[&[4, 5]])]);
        assert_eq!(is_giant_on(&part, &[0, 1, 2]).unwrap(), GiantClass::Alt);
        assert_eq!(is_giant_on(&part, &[3, 4]).unwrap(), GiantClass::Sym);
        assert_eq!(is_giant_on(&part, &[0, 3]), Err(Error::NotInvariant));
    }

    #[test]
    fn reduce_examples() {
        let n = 4;
        let cyc = gs(n, vec![c(n, &[&[1, 2, 3, 4]])]);
        let r = reduce_generators(&cyc);
        assert_eq!(r.len(), 2);
        assert!(r.is_symmetric());

        let all = GenSet::new(n, all_permutations(n)).unwrap();
        let r = reduce_generators(&all);
        assert!(r.len() <= 16);
        assert_eq!(StabilizerChain::from_genset(&r).order(), BigUint::from(24u32));

        let e = gs(n, vec![Permutation::identity(n)]);
        assert_eq!(reduce_generators(&e).elements(), &[Permutation::identity(n)]);
    }

    fn random_perm(n: usize, seed: u64) -> Permutation {
        let mut r = rng::seeded(seed);
        let mut v: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            v.swap(i, r.random_range(0..=i));
        }
        Permutation::from_images(v).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn order_matches_enumeration(n in 2usize..7, s1 in any::<u64>(), s2 in any::<u64>(), sq in any::<bool>()) {
            let mut gens = vec![random_perm(n, s1)];
            gens.push(if sq { gens[0].pow(2) } else { random_perm(n, s2) });
            let ch = StabilizerChain::new(&gens, n);
            let cl = closure(&gens, n);
            prop_assert_eq!(ch.order(), BigUint::from(cl.len()));
            for g in all_permutations(n) {
                prop_assert_eq!(ch.contains(&g), cl.contains(&g));
            }
        }

        #[test]
        fn minimal_blocks_are_invariant(n in 4usize..10, s in any::<u64>(), k in 1usize..3) {
            let g = random_perm(n, s);
            let mut gens = vec![g.clone()];
            gens.push(g.pow(k as i64 + 1));
            let o = orbits_of(&gens, n);
            if o.is_transitive() {
                for b in block_systems_minimal_gens(&gens, n).unwrap() {
                    prop_assert!(b.is_invariant(&gens));
                    prop_assert_eq!(b.block_size * b.count, n);
                }
            }
        }

        #[test]
        fn reduction_preserves_group(n in 3usize..7, s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = GenSet::new(n, vec![random_perm(n, s1), random_perm(n, s2)]).unwrap();
            let big = GenSet::from_set(n, &power_set(&a.symmetrize(), 3, 100_000).unwrap(), 3).unwrap();
            let r = reduce_generators(&big);
            prop_assert!(r.len() <= 4 * n);
            prop_assert!(r.is_symmetric());
            prop_assert_eq!(
                StabilizerChain::from_genset(&r).order(),
                StabilizerChain::from_genset(&a).order()
            );
        }
    }
}
