//! Partitions of Ω, joins with conjugated copies, and the randomized drivers
//! that make `⟨h, g_1 h g_1^-1, …⟩` transitive with few conjugates.
//!
//! Every randomized step samples movers and accepts the first one (in
//! candidate-index order) whose conclusion verifies exactly on the joined
//! partition.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_k_transitive, orbits_of};
use crate::perm::{GenSet, Permutation, Tracked};
use crate::rng;
use crate::support::amplify_support;
use crate::walks::{SearchBudget, Walker};

/// Desk mode relaxes numeric thresholds so that small instances run; strict
/// mode enforces them verbatim.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Desk,
    Strict,
}

impl Mode {
    pub fn is_strict(self) -> bool {
        self == Mode::Strict
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Mode::Desk),
            "strict" => Ok(Mode::Strict),
            _ => Err(Error::Parse(format!("unknown mode '{s}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Desk => "desk",
            Mode::Strict => "strict",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Sorted blocks, ordered by least point.
    #[serde(with = "crate::perm::one_based")]
    blocks: Vec<Vec<usize>>,
    point_to_block: Vec<usize>,
}

impl Partition {
    fn from_labels(labels: &[usize]) -> Partition {
        let n = labels.len();
        let mut remap = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut point_to_block = vec![0; n];
        for (x, &l) in labels.iter().enumerate() {
            if remap[l] == usize::MAX {
                remap[l] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[remap[l]].push(x);
            point_to_block[x] = remap[l];
        }
        Partition { blocks, point_to_block }
    }

    pub fn singletons(n: usize) -> Partition {
        Partition::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn whole(n: usize) -> Partition {
        Partition::from_labels(&vec![0; n])
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Partition> {
        let mut labels = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for &x in b {
                if x >= n || labels[x] != usize::MAX {
                    return Err(Error::Domain(format!("point {} repeated or out of range", x + 1)));
                }
                labels[x] = i;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::Domain("blocks do not cover the domain".into()));
        }
        Ok(Partition::from_labels(&labels))
    }

    /// 1-indexed blocks, as in `{{1,2},{3},{4}}`.
    pub fn from_blocks1(n: usize, blocks: &[&[usize]]) -> Result<Partition> {
        let b: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| b.iter().map(|&x| x.wrapping_sub(1)).collect())
            .collect();
        Partition::from_blocks(n, &b)
    }

    pub fn cycle_partition(g: &Permutation) -> Partition {
        Partition::orbit_partition(std::slice::from_ref(g), g.degree())
    }

    pub fn orbit_partition(gens: &[Permutation], n: usize) -> Partition {
        Partition::from_labels(&orbits_of(gens, n).point_to_orbit)
    }

    pub fn degree(&self) -> usize {
        self.point_to_block.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> &[usize] {
        &self.blocks[self.point_to_block[x]]
    }

    /// `s_P(x)`.
    pub fn block_size_of(&self, x: usize) -> usize {
        self.block_of(x).len()
    }

    /// A single block equal to Ω.
    pub fn is_trivial(&self) -> bool {
        self.blocks.len() <= 1
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Block sizes in decreasing order.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Proportion of points x with `s_P(x) ≥ m`.
    pub fn stat_rho(&self, m: usize) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let hit: usize = self.blocks.iter().map(Vec::len).filter(|&l| l >= m).sum();
        hit as f64 / n as f64
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn is_finer_than(&self, other: &Partition) -> bool {
        self.degree() == other.degree()
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&x| other.point_to_block[x] == other.point_to_block[b[0]]))
    }

    pub fn join(&self, other: &Partition) -> Result<Partition> {
        let n = self.degree();
        if other.degree() != n {
            return Err(Error::DegreeMismatch(n, other.degree()));
        }
        let mut uf = UnionFind::new(n);
        for p in [self, other] {
            for b in &p.blocks {
                for &x in &b[1..] {
                    uf.union(b[0], x);
                }
            }
        }
        Ok(uf.partition())
    }

    /// `P^g`: every block replaced by its image.
    pub fn apply_perm(&self, g: &Permutation) -> Result<Partition> {
        let n = self.degree();
        if g.degree() != n {
            return Err(Error::DegreeMismatch(n, g.degree()));
        }
        let mut labels = vec![0; n];
        for (x, &b) in self.point_to_block.iter().enumerate() {
            labels[g.image(x)] = b;
        }
        Ok(Partition::from_labels(&labels))
    }

    /// `P ∨ P^g`.
    pub fn join_image(&self, g: &Permutation) -> Result<Partition> {
        self.join(&self.apply_perm(g)?)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            let pts: Vec<String> = b.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{{{}}}", pts.join(","))?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn partition(&mut self) -> Partition {
        let labels: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&labels)
    }
}

/// A sampled mover together with the element it was conjugated by (for a
/// conjugate sampler, `mover = g h g^-1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mover {
    pub conjugator: Tracked,
    pub mover: Tracked,
}

/// Source of random movers; candidate `index` under `seed` is reproducible.
pub trait MoverSampler: Sync {
    fn degree(&self) -> usize;
    fn sample(&self, seed: u64, index: usize) -> Mover;
}

/// `g h g^-1` for lazy-walk elements g, walk length per the budget schedule.
pub struct ConjugateWalkSampler<'a> {
    walker: Walker<'a>,
    h: Tracked,
    budget: SearchBudget,
}

impl<'a> ConjugateWalkSampler<'a> {
    pub fn new(a: &'a GenSet, h: Tracked, budget: SearchBudget) -> Self {
        ConjugateWalkSampler {
            walker: Walker::new(a),
            h,
            budget,
        }
    }
}

impl MoverSampler for ConjugateWalkSampler<'_> {
    fn degree(&self) -> usize {
        self.h.perm.degree()
    }

    fn sample(&self, seed: u64, index: usize) -> Mover {
        let n = self.degree();
        let mut r = rng::seeded(rng::derive(seed, index as u64));
        let g = self.walker.walk(self.budget.walk_len(n, index), &mut r);
        Mover {
            mover: self.h.conjugate(&g),
            conjugator: g,
        }
    }
}

/// Uniform random permutations (length 0: not words in any alphabet).
pub struct UniformSampler {
    pub n: usize,
}

impl MoverSampler for UniformSampler {
    fn degree(&self) -> usize {
        self.n
    }

    fn sample(&self, seed: u64, index: usize) -> Mover {
        let mut r = rng::seeded(rng::derive(seed, index as u64));
        let mut images: Vec<u32> = (0..self.n as u32).collect();
        images.shuffle(&mut r);
        let g = Tracked::new(Permutation::from_images_unchecked(images), 0);
        Mover {
            conjugator: g.clone(),
            mover: g,
        }
    }
}

/// Always the same permutation.
pub struct ConstantSampler {
    pub perm: Permutation,
}

impl MoverSampler for ConstantSampler {
    fn degree(&self) -> usize {
        self.perm.degree()
    }

    fn sample(&self, _seed: u64, _index: usize) -> Mover {
        let t = Tracked::new(self.perm.clone(), 1);
        Mover {
            conjugator: t.clone(),
            mover: t,
        }
    }
}

const BATCH: usize = 16;

/// First candidate (by index) accepted, evaluating batches in parallel.
fn first_accepted<T: Send>(
    sampler: &dyn MoverSampler,
    seed: u64,
    attempts: usize,
    accept: impl Fn(&Mover) -> Option<T> + Sync,
) -> Option<(usize, Mover, T)> {
    let mut start = 0;
    while start < attempts {
        let end = (start + BATCH).min(attempts);
        let found = (start..end)
            .into_par_iter()
            .filter_map(|i| {
                let m = sampler.sample(seed, i);
                accept(&m).map(|t| (i, m, t))
            })
            .min_by_key(|(i, _, _)| *i);
        if found.is_some() {
            return found;
        }
        start = end;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Part 1: more points in blocks of size ≥ m.
    ExpandRho,
    /// Part 2: a threshold jump `m → ⌈(1 + ρ/3) m⌉`.
    GrowM,
    /// Part 3: one big block.
    BigSet,
    /// The squaring step.
    Square,
    /// Strictly enlarge the largest block.
    Absorb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub variant: Variant,
    pub m: usize,
    pub rho: f64,
    /// Threshold the conclusion is measured against (size or proportion).
    pub target: f64,
    pub achieved: f64,
    /// Block-size threshold of the conclusion (m for ExpandRho).
    pub m_after: usize,
    pub rho_after: f64,
    pub max_block: usize,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// `None` when the partition was already trivial.
    pub mover: Option<Mover>,
    pub q: Partition,
    pub stats: StepStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub mode: Mode,
    /// Total-variation slack ε of the mover distribution.
    pub eps: f64,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            mode: Mode::Desk,
            eps: 0.01,
        }
    }
}

fn trivial_step(p: &Partition, variant: Variant, m: usize) -> Step {
    let rho = p.stat_rho(m);
    Step {
        mover: None,
        q: p.clone(),
        stats: StepStats {
            variant,
            m,
            rho,
            target: 0.0,
            achieved: 0.0,
            m_after: m,
            rho_after: rho,
            max_block: p.max_block(),
            attempts: 0,
        },
    }
}

fn run_step(
    p: &Partition,
    sampler: &dyn MoverSampler,
    budget: &SearchBudget,
    seed: u64,
    variant: Variant,
    m: usize,
    target: f64,
    m_after: usize,
    measure: impl Fn(&Partition) -> f64 + Sync,
) -> Result<Step> {
    if sampler.degree() != p.degree() {
        return Err(Error::DegreeMismatch(p.degree(), sampler.degree()));
    }
    let attempts = budget.total_attempts();
    let best = std::sync::Mutex::new(f64::NEG_INFINITY);
    let hit = first_accepted(sampler, seed, attempts, |mv| {
        let q = p.join_image(&mv.mover.perm).ok()?;
        let v = measure(&q);
        {
            let mut b = best.lock().unwrap();
            *b = b.max(v);
        }
        // A step that changes nothing is never accepted.
        (v >= target - 1e-12 && q.blocks.len() < p.blocks.len()).then_some((q, v))
    });
    match hit {
        Some((i, mv, (q, v))) => Ok(Step {
            stats: StepStats {
                variant,
                m,
                rho: p.stat_rho(m),
                target,
                achieved: v,
                m_after,
                rho_after: q.stat_rho(m_after),
                max_block: q.max_block(),
                attempts: i + 1,
            },
            mover: Some(mv),
            q,
        }),
        None => Err(Error::budget(
            "partition step",
            format!(
                "{variant:?} at m = {m}: target {target:.6}, best {:.6} after {attempts} movers",
                best.into_inner().unwrap()
            ),
        )),
    }
}

/// One application of the three-part growth lemma, verified exactly.
pub fn coeur_step(
    p: &Partition,
    m: usize,
    variant: Variant,
    sampler: &dyn MoverSampler,
    budget: &SearchBudget,
    seed: u64,
    params: &StepParams,
) -> Result<Step> {
    if m < 1 {
        return Err(Error::Domain("m must be >= 1".into()));
    }
    if p.is_trivial() {
        return Ok(trivial_step(p, variant, m));
    }
    let n = p.degree();
    let nf = n as f64;
    let rho = p.stat_rho(m);
    let eps = params.eps;
    match variant {
        Variant::ExpandRho => {
            let target = 1.0 - (1.0 - rho).powi(2) - eps;
            run_step(p, sampler, budget, seed, variant, m, target, m, |q| q.stat_rho(m))
        }
        Variant::GrowM => {
            if params.mode.is_strict() && (eps > rho / 100.0 || n < 100 || m < 2 || 2 * m > n) {
                return Err(Error::hypothesis("part 2 needs eps <= rho/100, n >= 100, 2 <= m <= n/2"));
            }
            let m2 = ((1.0 + rho / 3.0) * m as f64).ceil() as usize;
            let target = rho * rho / 8.0;
            run_step(p, sampler, budget, seed, variant, m, target, m2, |q| q.stat_rho(m2))
        }
        Variant::BigSet => {
            if params.mode.is_strict() && (eps > (rho / 25.0).min(rho / (4.0 * m as f64)) || n < 250) {
                return Err(Error::hypothesis("part 3 needs eps <= min(rho/25, rho/4m), n >= 250"));
            }
            let target = (rho * nf / 10.0).min((rho - eps) * (m * m) as f64 / 2.0);
            run_step(p, sampler, budget, seed, variant, m, target, m, |q| q.max_block() as f64)
        }
        Variant::Square => coeur2_step(p, m, sampler, budget, seed, params),
        Variant::Absorb => {
            let target = (p.max_block() + 1) as f64;
            run_step(p, sampler, budget, seed, variant, m, target, m, |q| q.max_block() as f64)
        }
    }
}

/// Block-size threshold reached by the squaring step from `m`.
pub fn squared_threshold(m: usize, mode: Mode) -> usize {
    let mf = m as f64;
    match mode {
        Mode::Strict => (mf * mf / 2.0).ceil() as usize,
        Mode::Desk => mf.powf(1.5).ceil() as usize,
    }
}

/// Upper limit on m for the squaring step.
pub fn square_m_cap(n: usize, mode: Mode) -> f64 {
    let s = (n as f64).sqrt();
    match mode {
        Mode::Strict => s / 100.0,
        Mode::Desk => s / 2.0,
    }
}

/// The squaring step: more than n/2 points end in blocks of size
/// ≥ m²/2 (strict) or ≥ m^1.5 (desk).
pub fn coeur2_step(
    p: &Partition,
    m: usize,
    sampler: &dyn MoverSampler,
    budget: &SearchBudget,
    seed: u64,
    params: &StepParams,
) -> Result<Step> {
    if p.is_trivial() {
        return Ok(trivial_step(p, Variant::Square, m));
    }
    let n = p.degree();
    let rho = p.stat_rho(m);
    let cap = square_m_cap(n, params.mode);
    let (rho_min, m_min) = match params.mode {
        Mode::Strict => (0.999, 1000),
        Mode::Desk => (0.9, 4),
    };
    if rho < rho_min || m < m_min || m as f64 > cap {
        return Err(Error::hypothesis(format!(
            "squaring step needs rho >= {rho_min}, {m_min} <= m <= {cap:.2} (got rho = {rho:.4}, m = {m})"
        )));
    }
    let m2 = squared_threshold(m, params.mode);
    let nf = n as f64;
    // "more than n/2 points": strictly above one half.
    let target = (n / 2 + 1) as f64 / nf;
    run_step(p, sampler, budget, seed, Variant::Square, m, target, m2, |q| q.stat_rho(m2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Warmup,
    Squaring,
    BigSet,
    Cleanup,
    Absorption,
}

/// One driver step: `{variant, m, rho, max_block, accepted_g word length}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub stage: Stage,
    pub variant: Variant,
    pub m: usize,
    pub rho: f64,
    pub max_block: usize,
    pub word_length: u64,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerodiroResult {
    /// `g_1..g_k`.
    pub conjugators: Vec<Tracked>,
    pub trace: Vec<TraceStep>,
    pub partitions: Vec<Partition>,
    pub k: usize,
    /// `ln ln n`, the scale of the expected k.
    pub loglog_n: f64,
    /// Desk run on a group not known to be 4-transitive.
    pub outside_hypotheses: bool,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverParams {
    pub mode: Mode,
    pub eps: f64,
    /// Largest allowed `n - |supp h|`.
    pub max_c: usize,
    /// Minimal mass of P in blocks of size > 1.
    pub rho: f64,
    /// Below this degree the driver only absorbs.
    pub small_n: usize,
}

impl Default for DriverParams {
    fn default() -> Self {
        DriverParams {
            mode: Mode::Desk,
            eps: 0.01,
            max_c: 8,
            rho: 0.01,
            small_n: 32,
        }
    }
}

struct Driver<'s> {
    sampler: &'s dyn MoverSampler,
    budget: SearchBudget,
    seed: u64,
    params: StepParams,
    q: Partition,
    res: VerodiroResult,
    max_steps: usize,
}

impl Driver<'_> {
    fn apply(&mut self, stage: Stage, variant: Variant, m: usize) -> Result<StepStats> {
        if self.res.k >= self.max_steps {
            return Err(Error::budget("verodiro_driver", format!("{} steps", self.max_steps)));
        }
        let seed = rng::derive(self.seed, self.res.k as u64);
        let step = coeur_step(&self.q, m, variant, self.sampler, &self.budget, seed, &self.params)?;
        debug_assert!(self.q.is_finer_than(&step.q));
        if let Some(mv) = step.mover {
            self.res.trace.push(TraceStep {
                stage,
                variant,
                m,
                rho: step.stats.rho_after,
                max_block: step.stats.max_block,
                word_length: mv.mover.len,
                attempts: step.stats.attempts,
            });
            self.res.conjugators.push(mv.conjugator);
            self.res.partitions.push(step.q.clone());
            self.res.k += 1;
            self.q = step.q;
        }
        Ok(step.stats)
    }

    /// Part 1 at fixed m until `ρ(m) ≥ goal` or no progress.
    fn expand(&mut self, stage: Stage, m: usize, goal: f64) -> Result<()> {
        let mut guard = 0;
        while self.q.stat_rho(m) < goal && !self.q.is_trivial() && guard < 64 {
            let before = self.q.stat_rho(m);
            self.apply(stage, Variant::ExpandRho, m)?;
            if self.q.stat_rho(m) <= before {
                guard += 8;
            }
            guard += 1;
        }
        Ok(())
    }

    fn absorb(&mut self) -> Result<()> {
        while !self.q.is_trivial() {
            self.apply(Stage::Absorption, Variant::Absorb, 1)?;
        }
        Ok(())
    }

    fn staged(&mut self, c: usize) -> Result<()> {
        let n = self.q.degree();
        let mode = self.params.mode;
        let (rho_star, m_sq) = match mode {
            Mode::Strict => (0.999, 1000),
            Mode::Desk => (0.9, 4),
        };
        let cap = square_m_cap(n, mode);

        // Warm-up: part 1 to saturate ρ, part 2 to raise m.
        let mut m = 2;
        while m < m_sq && (m as f64) <= cap && !self.q.is_trivial() {
            self.expand(Stage::Warmup, m, rho_star)?;
            let s = self.apply(Stage::Warmup, Variant::GrowM, m)?;
            m = s.m_after;
        }
        // Squaring.
        while (m as f64) <= cap && !self.q.is_trivial() {
            self.expand(Stage::Squaring, m, rho_star)?;
            if self.q.stat_rho(m) < rho_star {
                break;
            }
            let s = self.apply(Stage::Squaring, Variant::Square, m)?;
            m = s.m_after;
        }
        // One big block.
        let m_big = m.min(cap.ceil().max(2.0) as usize);
        if !self.q.is_trivial() && self.q.stat_rho(m_big) > 0.0 {
            self.apply(Stage::BigSet, Variant::BigSet, m_big)?;
        }
        // Cleanup: push the mass into the block above n/2.
        let half = n / 2 + 1;
        if self.q.max_block() >= half {
            let goal = 1.0 - (18 + 6 * c) as f64 / n as f64;
            self.expand(Stage::Cleanup, half, goal)?;
        }
        Ok(())
    }
}

/// Join `P` with conjugates `g_j h g_j^-1` until the partition is trivial,
/// following the staged schedule, then absorbing leftovers one step at a
/// time. If a stage cannot meet its target within budget the driver falls
/// back to absorption.
pub fn verodiro_driver(
    p: &Partition,
    a: &GenSet,
    h: &Tracked,
    budget: &SearchBudget,
    seed: u64,
    params: &DriverParams,
) -> Result<VerodiroResult> {
    let n = p.degree();
    if a.degree() != n || h.perm.degree() != n {
        return Err(Error::DegreeMismatch(n, a.degree()));
    }
    let mut res = VerodiroResult {
        conjugators: Vec::new(),
        trace: Vec::new(),
        partitions: Vec::new(),
        k: 0,
        loglog_n: (n.max(3) as f64).ln().ln(),
        outside_hypotheses: false,
        mode: params.mode,
    };
    if p.is_trivial() {
        return Ok(res);
    }
    let c = n - h.perm.support_size();
    if c > params.max_c {
        return Err(Error::hypothesis(format!("h fixes {c} points (max {})", params.max_c)));
    }
    if p.stat_rho(2) < params.rho {
        return Err(Error::hypothesis("too little mass in blocks of size > 1"));
    }
    if !is_k_transitive(a, 4) {
        if params.mode.is_strict() || !is_k_transitive(a, 3) {
            return Err(Error::hypothesis("<A> is not 4-transitive"));
        }
        res.outside_hypotheses = true;
    }
    let alphabet = a.symmetrize();
    let sampler = ConjugateWalkSampler::new(&alphabet, h.clone(), *budget);
    let mut d = Driver {
        sampler: &sampler,
        budget: *budget,
        seed,
        params: StepParams {
            mode: params.mode,
            eps: params.eps + (8 + 3 * c) as f64 / n as f64,
        },
        q: p.clone(),
        res,
        max_steps: 4 * n + 64,
    };
    if n >= params.small_n {
        match d.staged(c) {
            Ok(()) => {}
            Err(e) if e.is_resource_limit() => {}
            Err(e) => return Err(e),
        }
    }
    d.absorb()?;
    Ok(d.res)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitivityCertificate {
    pub degree: usize,
    pub generators: usize,
    pub orbits: usize,
    /// Steps at which the orbit partition was checked to be coarser than `Q_j`.
    pub checked_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiniestroResult {
    pub h: Tracked,
    /// `γ_i` with `h = g_0 · ∏ γ_i g_0 γ_i^-1`.
    pub gammas: Vec<Tracked>,
    /// `g_1..g_k`.
    pub conjugators: Vec<Tracked>,
    pub driver: VerodiroResult,
    pub certificate: TransitivityCertificate,
}

/// Below this degree h = g_0 without amplification.
pub const SINIESTRO_SMALL_N: usize = 12;

/// Make `⟨h, g_1 h g_1^-1, …, g_k h g_k^-1⟩` transitive, with h a product of
/// conjugates of `g_0`. The result is verified by an orbit computation.
pub fn siniestro(
    a: &GenSet,
    g0: &Tracked,
    alpha: f64,
    budget: &SearchBudget,
    seed: u64,
    params: &DriverParams,
) -> Result<SiniestroResult> {
    let n = a.degree();
    let s0 = g0.perm.support_size();
    if s0 == 0 {
        return Err(Error::hypothesis("g_0 must be nontrivial"));
    }
    if (s0 as f64) < alpha * n as f64 - 1e-12 {
        return Err(Error::hypothesis(format!("support {s0} < {alpha} n")));
    }
    let alphabet = a.symmetrize();
    let (h, gammas) = if n < SINIESTRO_SMALL_N {
        (g0.clone(), Vec::new())
    } else {
        let r = amplify_support(&alphabet, g0, budget, rng::derive(seed, 0))?;
        (r.h, r.conjugators)
    };
    let p = Partition::cycle_partition(&h.perm);
    let c = n - h.perm.support_size();
    let driver_params = DriverParams {
        max_c: params.max_c.max(c),
        ..*params
    };
    let driver = verodiro_driver(&p, a, &h, budget, rng::derive(seed, 1), &driver_params)?;

    // Orbits of ⟨h, g_1 h g_1^-1, …, g_j h g_j^-1⟩ are coarser than Q_j.
    let mut gens = vec![h.perm.clone()];
    let mut checked = 0;
    for (g, q) in driver.conjugators.iter().zip(&driver.partitions) {
        gens.push(crate::perm::conjugate(&h.perm, &g.perm));
        let orb = Partition::orbit_partition(&gens, n);
        if !q.is_finer_than(&orb) {
            return Err(Error::Hypothesis("orbit partition finer than the driver partition".into()));
        }
        checked += 1;
    }
    let orbits = orbits_of(&gens, n);
    if !orbits.is_transitive() {
        return Err(Error::budget("siniestro", format!("{} orbits remain", orbits.orbits.len())));
    }
    Ok(SiniestroResult {
        certificate: TransitivityCertificate {
            degree: n,
            generators: gens.len(),
            orbits: 1,
            checked_steps: checked,
        },
        conjugators: driver.conjugators.clone(),
        h,
        gammas,
        driver,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym_pair(n: usize) -> GenSet {
        let cyc: Vec<usize> = (1..=n).collect();
        GenSet::new(n, vec![Permutation::cycles1(n, &[&[1, 2]]), Permutation::cycles1(n, &[&cyc])]).unwrap()
    }

    #[test]
    fn serialized_points_are_one_based() {
        let p = Partition::from_blocks1(4, &[&[1, 2], &[3, 4]]).unwrap();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["blocks"], serde_json::json!([[1, 2], [3, 4]]));
        let back: Partition = serde_json::from_value(json).unwrap();
        assert_eq!(back, p);
        let mut bad = serde_json::to_value(&p).unwrap();
        bad["blocks"] = serde_json::json!([[0, 1], [2, 3]]);
        assert!(serde_json::from_value::<Partition>(bad).is_err());
    }

    fn fast_budget() -> SearchBudget {
        SearchBudget {
            resamples: 32,
            rounds: 4,
            initial_walk: Some(2000),
            ..SearchBudget::default()
        }
    }

    #[test]
    fn join_examples() {
        let p = Partition::from_blocks1(4, &[&[1, 2], &[3], &[4]]).unwrap();
        assert_eq!(p.join(&p).unwrap(), p);
        assert_eq!(p.join(&Partition::singletons(4)).unwrap(), p);
        let g = Permutation::cycles1(4, &[&[2, 3]]);
        let q = p.join_image(&g).unwrap();
        assert_eq!(q, Partition::from_blocks1(4, &[&[1, 2, 3], &[4]]).unwrap());
        assert_eq!(q.to_string(), "{{1,2,3},{4}}");
        assert!(p.is_finer_than(&q) && !q.is_finer_than(&p));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(Partition::singletons(5).stat_rho(2), 0.0);
        assert_eq!(Partition::whole(5).stat_rho(5), 1.0);
        let p = Partition::from_blocks1(6, &[&[1, 2, 3], &[4, 5], &[6]]).unwrap();
        assert!((p.stat_rho(2) - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.shape(), vec![3, 2, 1]);
        assert!(Partition::from_blocks1(3, &[&[1, 2]]).is_err());
    }

    #[test]
    fn coeur_variants() {
        let params = StepParams::default();
        let b = fast_budget();
        let whole = Partition::whole(8);
        let s = coeur_step(&whole, 2, Variant::GrowM, &UniformSampler { n: 8 }, &b, 1, &params).unwrap();
        assert!(s.mover.is_none() && s.q == whole);

        let n = 64;
        let h = {
            let mut r = rng::seeded(9);
            let mut im: Vec<u32> = (0..n as u32).collect();
            im.shuffle(&mut r);
            Permutation::from_images(im).unwrap()
        };
        let p = Partition::cycle_partition(&h);
        let s = coeur_step(&p, 2, Variant::GrowM, &UniformSampler { n }, &b, 2, &params).unwrap();
        let rho = p.stat_rho(2);
        let m2 = ((1.0 + rho / 3.0) * 2.0).ceil() as usize;
        assert_eq!(s.stats.m_after, m2);
        assert!(s.q.stat_rho(m2) >= rho * rho / 8.0);
        assert!(p.is_finer_than(&s.q));

        let p = Partition::from_blocks(n, &(0..n / 2).map(|i| vec![2 * i, 2 * i + 1]).collect::<Vec<_>>()).unwrap();
        for v in [Variant::ExpandRho, Variant::BigSet] {
            let s = coeur_step(&p, 2, v, &UniformSampler { n }, &b, 3, &params).unwrap();
            assert!(s.stats.achieved >= s.stats.target - 1e-12);
        }
        let e = ConstantSampler { perm: Permutation::identity(n) };
        let p = Partition::cycle_partition(&h);
        assert!(matches!(
            coeur_step(&p, 2, Variant::GrowM, &e, &b, 1, &params),
            Err(Error::BudgetExhausted { .. })
        ));
        let strict = StepParams { mode: Mode::Strict, eps: 0.0 };
        assert!(coeur_step(&p, 2, Variant::BigSet, &UniformSampler { n }, &b, 1, &strict).is_err());
    }

    #[test]
    fn coeur2_desk_squaring() {
        let n = 10_000;
        let m = 50;
        let blocks: Vec<Vec<usize>> = (0..n / m).map(|i| (i * m..(i + 1) * m).collect()).collect();
        let p = Partition::from_blocks(n, &blocks).unwrap();
        let s = coeur2_step(&p, m, &UniformSampler { n }, &fast_budget(), 4, &StepParams::default()).unwrap();
        assert_eq!(s.stats.m_after, 354);
        assert!(s.q.stat_rho(354) > 0.5);

        let strict = StepParams { mode: Mode::Strict, eps: 0.0 };
        assert!(matches!(
            coeur2_step(&p, m, &UniformSampler { n }, &fast_budget(), 4, &strict),
            Err(Error::Hypothesis(_))
        ));
        let whole = Partition::whole(n);
        assert!(coeur2_step(&whole, m, &UniformSampler { n }, &fast_budget(), 4, &strict).unwrap().mover.is_none());
    }

    #[test]
    fn driver_sym100() {
        let n = 100;
        let a = sym_pair(n);
        let cyc: Vec<usize> = (1..n).collect();
        let h = Tracked::new(Permutation::cycles1(n, &[&cyc[..50], &cyc[50..]]), 1);
        let p = Partition::cycle_partition(&h.perm);
        let r = verodiro_driver(&p, &a, &h, &fast_budget(), 11, &DriverParams::default()).unwrap();
        assert!(r.partitions.last().unwrap().is_trivial());
        assert!(r.k <= 25, "k = {}", r.k);
        let mut prev = p.clone();
        for q in &r.partitions {
            assert!(prev.is_finer_than(q) && q.max_block() >= prev.max_block());
            prev = q.clone();
        }
        let r0 = verodiro_driver(&Partition::whole(n), &a, &h, &fast_budget(), 1, &DriverParams::default()).unwrap();
        assert_eq!(r0.k, 0);
    }

    #[test]
    fn driver_needs_transitivity() {
        // PGL(2,5) on 6 points is 3-transitive but not 4-transitive.
        let a = GenSet::parse("(1 2 3 4 5),(1 6)(2 5),(2 3 5 4)", None).unwrap();
        let h = Tracked::new(Permutation::cycles1(6, &[&[1, 2, 3, 4, 5]]), 1);
        let p = Partition::cycle_partition(&h.perm);
        let strict = DriverParams { mode: Mode::Strict, ..DriverParams::default() };
        assert!(matches!(
            verodiro_driver(&p, &a, &h, &fast_budget(), 1, &strict),
            Err(Error::Hypothesis(_))
        ));
        let r = verodiro_driver(&p, &a, &h, &fast_budget(), 1, &DriverParams::default()).unwrap();
        assert!(r.outside_hypotheses && r.partitions.last().unwrap().is_trivial());
    }

    #[test]
    fn siniestro_examples() {
        let n = 60;
        let a = sym_pair(n);
        let cyc: Vec<usize> = (1..=n).collect();
        let full = Tracked::new(Permutation::cycles1(n, &[&cyc]), 1);
        let r = siniestro(&a, &full, 0.5, &fast_budget(), 1, &DriverParams::default()).unwrap();
        assert_eq!(r.h, full);
        assert_eq!(r.driver.k, 0);

        let g0 = Tracked::new(Permutation::cycles1(n, &[&cyc[..20]]), 1);
        let r = siniestro(&a, &g0, 1.0 / 3.0, &fast_budget(), 2, &DriverParams::default()).unwrap();
        assert_eq!(r.certificate.orbits, 1);
        assert_eq!(r.certificate.checked_steps, r.driver.k);
        assert!(r.driver.k <= 30);
        let mut gens = vec![r.h.perm.clone()];
        gens.extend(r.conjugators.iter().map(|g| crate::perm::conjugate(&r.h.perm, &g.perm)));
        assert!(orbits_of(&gens, n).is_transitive());

        let e = Tracked::identity(n);
        assert!(matches!(
            siniestro(&a, &e, 0.1, &fast_budget(), 1, &DriverParams::default()),
            Err(Error::Hypothesis(_))
        ));
    }

    fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
        proptest::collection::vec(0..n, n).prop_map(|labels| Partition::from_labels(&labels))
    }

    proptest! {
        #[test]
        fn lattice_laws(p in arb_partition(9), q in arb_partition(9), r in arb_partition(9)) {
            prop_assert_eq!(p.join(&q).unwrap(), q.join(&p).unwrap());
            prop_assert_eq!(p.join(&p).unwrap(), p.clone());
            prop_assert_eq!(
                p.join(&q).unwrap().join(&r).unwrap(),
                p.join(&q.join(&r).unwrap()).unwrap()
            );
            let j = p.join(&q).unwrap();
            prop_assert!(p.is_finer_than(&j) && q.is_finer_than(&j));
            prop_assert!(j.max_block() >= p.max_block().max(q.max_block()));
        }

        #[test]
        fn apply_perm_preserves_shape(p in arb_partition(8), seed in any::<u64>()) {
            let g = UniformSampler { n: 8 }.sample(seed, 0).mover.perm;
            let q = p.apply_perm(&g).unwrap();
            prop_assert_eq!(q.shape(), p.shape());
            prop_assert_eq!(q.apply_perm(&g.inverse()).unwrap(), p);
        }
    }
}
