//! Cayley and Schreier graphs, exact BFS diameters, lazy random walks and
//! mixing diagnostics.

use rand::Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::falling_factorial;
use crate::perm::{GenSet, Letter, Permutation, Tracked, Word};
use crate::rng;

/// Outcome of a breadth-first search of a Cayley graph from the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyBfs {
    pub diameter: usize,
    /// Least element (lexicographically) at maximal distance.
    pub witness: Permutation,
    pub layer_sizes: Vec<usize>,
    pub order: usize,
}

fn pack(images: &[u32]) -> u64 {
    images.iter().fold(0u64, |acc, &x| (acc << 4) | x as u64)
}

fn unpack(mut key: u64, n: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    for i in (0..n).rev() {
        v[i] = (key & 0xf) as u32;
        key >>= 4;
    }
    v
}

fn right_mul(key: &[u32], g: &Permutation, out: &mut Vec<u32>) {
    out.clear();
    out.extend(key.iter().map(|&x| g.images()[x as usize]));
}

/// Generic layered BFS over keys. `step` expands one key into its neighbours.
fn layered_bfs<K, F>(start: K, cap: usize, parallel: bool, step: F) -> Result<(Vec<usize>, Vec<K>)>
where
    K: Clone + Eq + std::hash::Hash + Ord + Send + Sync,
    F: Fn(&K, &mut Vec<K>) + Sync,
{
    let mut seen: FxHashSet<K> = FxHashSet::default();
    seen.insert(start.clone());
    let mut frontier = vec![start];
    let mut layers = vec![1usize];
    loop {
        let candidates: Vec<K> = if parallel {
            frontier
                .par_chunks(1024)
                .flat_map_iter(|chunk| {
                    let mut out = Vec::new();
                    for k in chunk {
                        step(k, &mut out);
                    }
                    out
                })
                .collect()
        } else {
            let mut out = Vec::new();
            for k in &frontier {
                step(k, &mut out);
            }
            out
        };
        let mut next = Vec::new();
        for c in candidates {
            if !seen.contains(&c) {
                if seen.len() >= cap {
                    return Err(Error::cap("cayley bfs", cap, seen.len()));
                }
                seen.insert(c.clone());
                next.push(c);
            }
        }
        if next.is_empty() {
            return Ok((layers, frontier));
        }
        layers.push(next.len());
        frontier = next;
    }
}

fn cayley_bfs_impl(gens: &[Permutation], n: usize, cap: usize, parallel: bool) -> Result<CayleyBfs> {
    let id: Vec<u32> = (0..n as u32).collect();
    let (layers, last) = if n <= 16 {
        let (layers, last) = layered_bfs(pack(&id), cap, parallel, |&k, out| {
            let cur = unpack(k, n);
            let mut buf = Vec::with_capacity(n);
            for g in gens {
                right_mul(&cur, g, &mut buf);
                out.push(pack(&buf));
            }
        })?;
        (layers, last.into_iter().map(|k| unpack(k, n)).collect::<Vec<_>>())
    } else {
        layered_bfs(id, cap, parallel, |k: &Vec<u32>, out| {
            for g in gens {
                let mut buf = Vec::with_capacity(n);
                right_mul(k, g, &mut buf);
                out.push(buf);
            }
        })?
    };
    let witness = last.into_iter().min().expect("nonempty layer");
    Ok(CayleyBfs {
        diameter: layers.len() - 1,
        witness: Permutation::from_images_unchecked(witness),
        order: layers.iter().sum(),
        layer_sizes: layers,
    })
}

/// Exact diameter of the directed Cayley graph `Γ(⟨A⟩, A)`.
pub fn cayley_bfs(a: &GenSet, cap: usize) -> Result<CayleyBfs> {
    cayley_bfs_impl(a.elements(), a.degree(), cap, false)
}

/// Same as [`cayley_bfs`] with the frontier expanded in parallel.
pub fn cayley_bfs_parallel(a: &GenSet, cap: usize) -> Result<CayleyBfs> {
    cayley_bfs_impl(a.elements(), a.degree(), cap, true)
}

pub fn cayley_diameter(a: &GenSet, cap: usize) -> Result<(usize, Permutation)> {
    let r = cayley_bfs(a, cap)?;
    Ok((r.diameter, r.witness))
}

pub fn cayley_diameter_gens(gens: &[Permutation], n: usize, cap: usize) -> Result<usize> {
    Ok(cayley_bfs_impl(gens, n, cap, false)?.diameter)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterPair {
    pub directed: usize,
    pub undirected: usize,
    pub order: usize,
    /// `(ln |G|)^3 · undirected^2`, the comparison quantity with constant 1.
    pub comparison: f64,
    pub comparison_holds: bool,
}

/// Directed diameter of `Γ(G, A)` and undirected diameter of
/// `Γ(G, A ∪ A^-1)`.
pub fn directed_diameter_pair(a: &GenSet, cap: usize) -> Result<DiameterPair> {
    let d = cayley_bfs(a, cap)?;
    let u = cayley_bfs(&a.symmetrize(), cap)?;
    let comparison = (d.order as f64).ln().powi(3) * (u.diameter as f64).powi(2);
    Ok(DiameterPair {
        directed: d.diameter,
        undirected: u.diameter,
        order: d.order,
        comparison,
        comparison_holds: d.diameter as f64 <= comparison,
    })
}

/// Shortest words (over generators and their inverses) for every element.
pub fn cayley_words(gens: &[Permutation], n: usize, cap: usize) -> Result<FxHashMap<Permutation, Word>> {
    let mut letters: Vec<(Letter, Permutation)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        letters.push((Letter { gen: i as u32, inv: false }, g.clone()));
        letters.push((Letter { gen: i as u32, inv: true }, g.inverse()));
    }
    let id = Permutation::identity(n);
    let mut words: FxHashMap<Permutation, Word> = FxHashMap::default();
    words.insert(id.clone(), Word::empty());
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            let wx = words[x].clone();
            for (l, g) in &letters {
                let y = x.compose(g);
                if !words.contains_key(&y) {
                    if words.len() >= cap {
                        return Err(Error::cap("word table", cap, words.len()));
                    }
                    let mut w = wx.clone();
                    w.0.push(*l);
                    words.insert(y.clone(), w);
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(words)
}

/// Graph of the action on k-tuples of distinct points.
#[derive(Clone, Debug)]
pub struct SchreierGraph {
    pub degree: usize,
    pub k: usize,
    pub vertices: Vec<Vec<u32>>,
    /// `adjacency[g][v]` is the index of `v^g`.
    pub adjacency: Vec<Vec<u32>>,
    index: FxHashMap<Vec<u32>, u32>,
}

impl SchreierGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn valency(&self) -> usize {
        self.adjacency.len()
    }

    pub fn index_of(&self, tuple: &[u32]) -> Option<usize> {
        self.index.get(tuple).map(|&i| i as usize)
    }

    /// Vertex of the base tuple `(0, 1, ..., k-1)`.
    pub fn base_vertex(&self) -> usize {
        let t: Vec<u32> = (0..self.k as u32).collect();
        self.index_of(&t).expect("base tuple present")
    }

    pub fn components(&self) -> usize {
        let nv = self.vertex_count();
        let mut comp = vec![usize::MAX; nv];
        let mut count = 0;
        for s in 0..nv {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for adj in &self.adjacency {
                    let w = adj[v] as usize;
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        // Forward closure in a finite group action is already the orbit.
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Distribution after `t` lazy steps from vertex `start`, by exact
    /// iteration of the transition operator.
    pub fn exact_distribution(&self, start: usize, t: usize) -> Vec<f64> {
        let nv = self.vertex_count();
        let d = self.valency() as f64;
        let mut p = vec![0.0; nv];
        p[start] = 1.0;
        let mut q = vec![0.0; nv];
        for _ in 0..t {
            for (qi, pi) in q.iter_mut().zip(&p) {
                *qi = 0.5 * pi;
            }
            for adj in &self.adjacency {
                for (v, &w) in adj.iter().enumerate() {
                    q[w as usize] += 0.5 * p[v] / d;
                }
            }
            std::mem::swap(&mut p, &mut q);
        }
        p
    }

    /// Exact total variation distance to uniform after `t` lazy steps.
    pub fn exact_tv(&self, start: usize, t: usize) -> f64 {
        let u = 1.0 / self.vertex_count() as f64;
        0.5 * self.exact_distribution(start, t).iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    /// Worst exact TV over every start vertex.
    pub fn exact_tv_max(&self, t: usize) -> f64 {
        (0..self.vertex_count())
            .into_par_iter()
            .map(|s| self.exact_tv(s, t))
            .reduce(|| 0.0, f64::max)
    }
}

/// Schreier graph on k-tuples of distinct points.
pub fn schreier_graph(a: &GenSet, k: usize, cap: usize) -> Result<SchreierGraph> {
    let n = a.degree();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("tuple length {k} outside 1..={n}")));
    }
    let count = falling_factorial(n, k);
    if count > cap as u128 {
        return Err(Error::cap("schreier graph", cap, 0));
    }
    let mut vertices = Vec::with_capacity(count as usize);
    let mut cur: Vec<u32> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    enumerate_tuples(n, k, &mut cur, &mut used, &mut vertices);
    let index: FxHashMap<Vec<u32>, u32> = vertices
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let adjacency = a
        .elements()
        .iter()
        .map(|g| {
            vertices
                .iter()
                .map(|t| {
                    let img: Vec<u32> = t.iter().map(|&x| g.images()[x as usize]).collect();
                    index[&img]
                })
                .collect()
        })
        .collect();
    Ok(SchreierGraph {
        degree: n,
        k,
        vertices,
        adjacency,
        index,
    })
}

fn enumerate_tuples(n: usize, k: usize, cur: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<Vec<u32>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for x in 0..n {
        if !used[x] {
            used[x] = true;
            cur.push(x as u32);
            enumerate_tuples(n, k, cur, used, out);
            cur.pop();
            used[x] = false;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub length: usize,
    pub lazy: bool,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(length: usize, seed: u64) -> Self {
        WalkConfig {
            length,
            lazy: true,
            seed,
        }
    }
}

/// Random walker over a generating set; steps update an image buffer in
/// place.
pub struct Walker<'a> {
    gens: &'a GenSet,
    lazy: bool,
}

impl<'a> Walker<'a> {
    pub fn new(gens: &'a GenSet) -> Self {
        assert!(!gens.is_empty(), "walk over an empty set");
        Walker { gens, lazy: true }
    }

    pub fn non_lazy(mut self) -> Self {
        self.lazy = false;
        self
    }

    pub fn walk<R: Rng>(&self, steps: usize, rng: &mut R) -> Tracked {
        let n = self.gens.degree();
        let els = self.gens.elements();
        let lens = self.gens.lengths();
        let mut cur: Vec<u32> = (0..n as u32).collect();
        let mut len = 0u64;
        for _ in 0..steps {
            if self.lazy && rng.random_bool(0.5) {
                continue;
            }
            let i = rng.random_range(0..els.len());
            let g = els[i].images();
            for x in cur.iter_mut() {
                *x = g[*x as usize];
            }
            len += lens[i];
        }
        Tracked::new(Permutation::from_images_unchecked(cur), len)
    }
}

pub fn lazy_walk(a: &GenSet, cfg: WalkConfig) -> Tracked {
    let mut r = rng::seeded(cfg.seed);
    let w = Walker::new(a);
    let w = if cfg.lazy { w } else { w.non_lazy() };
    w.walk(cfg.length, &mut r)
}

/// Resampling budget and walk-length schedule for randomized searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Candidates tried per round before the walk length doubles.
    pub resamples: usize,
    /// Rounds (walk-length doublings, or lemma stages) allowed.
    pub rounds: usize,
    /// First walk length; `None` means `⌈n² ln n⌉`.
    pub initial_walk: Option<usize>,
    pub max_walk: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            resamples: 50,
            rounds: 24,
            initial_walk: None,
            max_walk: 1 << 22,
        }
    }
}

impl SearchBudget {
    pub fn initial_walk_for(&self, n: usize) -> usize {
        self.initial_walk
            .unwrap_or_else(|| {
                let n = n.max(2) as f64;
                (n * n * n.ln()).ceil() as usize
            })
            .clamp(1, self.max_walk)
    }

    /// Walk length for attempt `i`: doubled after every `resamples` failures.
    pub fn walk_len(&self, n: usize, attempt: usize) -> usize {
        let doublings = (attempt / self.resamples.max(1)).min(40) as u32;
        self.initial_walk_for(n)
            .saturating_mul(1usize << doublings)
            .min(self.max_walk)
    }

    pub fn total_attempts(&self) -> usize {
        self.resamples.max(1) * self.rounds.max(1)
    }
}

/// `⌈N² d ln(N/ε)⌉`.
pub fn mixing_bound(vertices: usize, d: usize, eps: f64) -> Result<u64> {
    if vertices < 2 || d < 1 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "mixing bound needs N >= 2, d >= 1, 0 < eps < 1 (got {vertices}, {d}, {eps})"
        )));
    }
    let nf = vertices as f64;
    Ok((nf * nf * d as f64 * (nf / eps).ln()).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub degree: usize,
    pub k: usize,
    pub vertices: usize,
    pub valency: usize,
    pub steps: usize,
    pub trials: usize,
    pub starts: Vec<usize>,
    /// Estimated TV distance per start vertex.
    pub tv_per_start: Vec<f64>,
    pub se_per_start: Vec<f64>,
    pub max_tv: f64,
    /// Standard error attached to the maximizing start.
    pub standard_error: f64,
    /// `mixing_bound(N, d, 0.1)` for reference.
    pub theoretical_bound: Option<u64>,
    /// The bound controls relative pointwise error; TV is a weaker summary.
    pub metric: String,
}

/// Monte-Carlo TV distance from uniform after `t` lazy steps, started at the
/// base tuple.
pub fn empirical_tv(a: &GenSet, k: usize, t: usize, trials: usize, seed: u64, cap: usize) -> Result<MixingReport> {
    let g = schreier_graph(a, k, cap)?;
    let start = g.base_vertex();
    empirical_tv_on(&g, &[start], t, trials, seed)
}

/// Monte-Carlo TV per start vertex; walks are split into fixed chunks with
/// derived seeds, so results do not depend on the thread count.
pub fn empirical_tv_on(g: &SchreierGraph, starts: &[usize], t: usize, trials: usize, seed: u64) -> Result<MixingReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    const CHUNK: usize = 256;
    let nv = g.vertex_count();
    let d = g.valency();
    let mut tvs = Vec::with_capacity(starts.len());
    let mut ses = Vec::with_capacity(starts.len());
    for (si, &start) in starts.iter().enumerate() {
        let chunks = trials.div_ceil(CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut r = rng::seeded(rng::derive(seed, (si as u64) << 32 | c as u64));
                let mut counts = vec![0u32; nv];
                let here = CHUNK.min(trials - c * CHUNK);
                for _ in 0..here {
                    let mut v = start;
                    for _ in 0..t {
                        if r.random_bool(0.5) {
                            continue;
                        }
                        v = g.adjacency[r.random_range(0..d)][v] as usize;
                    }
                    counts[v] += 1;
                }
                counts
            })
            .reduce(
                || vec![0u32; nv],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let tf = trials as f64;
        let u = 1.0 / nv as f64;
        let tv = 0.5 * counts.iter().map(|&c| (c as f64 / tf - u).abs()).sum::<f64>();
        let var: f64 = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / tf;
                p * (1.0 - p) / tf
            })
            .sum();
        tvs.push(tv);
        ses.push(0.5 * var.sqrt());
    }
    let (imax, max_tv) = tvs
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(MixingReport {
        degree: g.degree,
        k: g.k,
        vertices: nv,
        valency: d,
        steps: t,
        trials,
        starts: starts.to_vec(),
        standard_error: ses[imax],
        tv_per_start: tvs,
        se_per_start: ses,
        max_tv,
        theoretical_bound: mixing_bound(nv, d, 0.1).ok(),
        metric: "total variation (l1); the mixing bound controls relative l-infinity error".into(),
    })
}
