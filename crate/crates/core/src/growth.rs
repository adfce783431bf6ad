//! Set-growth certificates, coset counting, the long-orbit prefix and the
//! splitting-based growth constructions.
//!
//! Every certificate computes both sides of its inequality on explicit sets;
//! nothing is taken on trust.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_k_transitive, point_images, pointwise_stabilizer_subset};
use crate::perm::{
    conjugate, inverse_product_set, power_set, product_inverse_set, product_set, sorted, GenSet, PermSet, Permutation, Tracked,
};
use crate::rng;
use crate::walks::{SearchBudget, Walker};

/// Relative tolerance for comparing real-valued sides.
pub const REL_TOL: f64 = 1e-12;

pub fn ge_tol(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - REL_TOL * rhs.abs().max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub lemma: String,
    /// Left-hand side actually realized.
    pub achieved: f64,
    /// Lower bound claimed by the lemma.
    pub bound: f64,
    pub witness: Option<usize>,
    pub intersection: Option<usize>,
    pub holds: bool,
}

impl GrowthCertificate {
    fn new(lemma: &str, achieved: f64, bound: f64, witness: Option<usize>, intersection: Option<usize>) -> Self {
        GrowthCertificate {
            lemma: lemma.into(),
            achieved,
            bound,
            witness,
            intersection,
            holds: ge_tol(achieved, bound),
        }
    }
}

fn degree_of(sets: &[&[Permutation]]) -> Result<usize> {
    let mut n = None;
    for s in sets {
        for p in s.iter() {
            match n {
                None => n = Some(p.degree()),
                Some(d) if d != p.degree() => return Err(Error::DegreeMismatch(d, p.degree())),
                _ => {}
            }
        }
    }
    n.ok_or_else(|| Error::Domain("empty sets".into()))
}

/// `|AB^-1| ≥ |A||B| / |A^-1A ∩ B^-1B|`.
///
/// The fibres of `(a, b) ↦ ab^-1` are indexed by `a^-1 a' = b^-1 b'`, so the
/// intersection is of `A^-1A` and `B^-1B`; with `AA^-1 ∩ BB^-1` instead the
/// inequality fails in non-abelian groups (e.g. random subsets of Sym(5)).
pub fn pair_product_bound(a: &[Permutation], b: &[Permutation], cap: usize) -> Result<GrowthCertificate> {
    degree_of(&[a, b])?;
    let a = dedup(a);
    let b = dedup(b);
    let ab = product_inverse_set(&a, &b, cap)?;
    let aa = inverse_product_set(&a, &a, cap)?;
    let bb = inverse_product_set(&b, &b, cap)?;
    let inter = aa.iter().filter(|x| bb.contains(*x)).count();
    let bound = (a.len() * b.len()) as f64 / inter as f64;
    Ok(GrowthCertificate::new(
        "pair product bound",
        ab.len() as f64,
        bound,
        None,
        Some(inter),
    ))
}

fn dedup(a: &[Permutation]) -> Vec<Permutation> {
    let s: PermSet = a.iter().cloned().collect();
    sorted(&s)
}

/// For sets `A_0..A_k`: some `|A_j A_{j+1}^-1|` is at least
/// `G^{(k+1)/k} / |∩ A_j^-1 A_j|^{1/k}`, `G` the geometric mean of sizes.
/// As in [`pair_product_bound`], the fibre parameter `a_j^-1 a_j'` lives in
/// `A_j^-1 A_j`; the two agree for symmetric sets.
pub fn tagore_certificate(sets: &[Vec<Permutation>], cap: usize) -> Result<GrowthCertificate> {
    if sets.len() < 2 {
        return Err(Error::Domain("need at least two sets".into()));
    }
    let refs: Vec<&[Permutation]> = sets.iter().map(Vec::as_slice).collect();
    degree_of(&refs)?;
    let sets: Vec<Vec<Permutation>> = sets.iter().map(|s| dedup(s)).collect();
    let k = sets.len() - 1;
    let mut inter: Option<PermSet> = None;
    for s in &sets {
        let d = inverse_product_set(s, s, cap)?;
        inter = Some(match inter {
            None => d,
            Some(i) => i.into_iter().filter(|x| d.contains(x)).collect(),
        });
    }
    let inter = inter.unwrap().len();
    let log_mean = sets.iter().map(|s| (s.len() as f64).ln()).sum::<f64>() / (k + 1) as f64;
    let kf = k as f64;
    let bound = (log_mean * (kf + 1.0) / kf - (inter as f64).ln() / kf).exp();
    let mut best = (0usize, 0usize);
    for j in 0..k {
        let s = product_inverse_set(&sets[j], &sets[j + 1], cap)?.len();
        if s > best.1 {
            best = (j, s);
        }
    }
    Ok(GrowthCertificate::new(
        "tagore",
        best.1 as f64,
        bound,
        Some(best.0),
        Some(inter),
    ))
}

/// Number of right cosets of the pointwise stabilizer of `sigma` met by `a`:
/// distinct image tuples `sigma^x`.
pub fn coset_count<'a>(a: impl IntoIterator<Item = &'a Permutation>, sigma: &[usize]) -> usize {
    let imgs: FxHashSet<Vec<usize>> = a.into_iter().map(|x| x.map_tuple(sigma)).collect();
    imgs.len()
}

fn fixes(x: &Permutation, sigma: &[usize]) -> bool {
    sigma.iter().all(|&s| x.image(s) == s)
}

/// `|AA^-1 ∩ H| ≥ |A| / |π(A)|`, `H` the pointwise stabilizer of `sigma`.
pub fn duffy_check(a: &[Permutation], sigma: &[usize], cap: usize) -> Result<GrowthCertificate> {
    degree_of(&[a])?;
    let a = dedup(a);
    let aa = product_inverse_set(&a, &a, cap)?;
    let lhs = aa.iter().filter(|x| fixes(x, sigma)).count();
    let cosets = coset_count(&a, sigma);
    Ok(GrowthCertificate::new(
        "duffy",
        lhs as f64,
        a.len() as f64 / cosets as f64,
        None,
        Some(cosets),
    ))
}

/// `|A^{k+1}| ≥ |A^k ∩ H| / |AA^-1 ∩ H| · |A|`.
pub fn durdo_check(a: &GenSet, sigma: &[usize], k: usize, cap: usize) -> Result<GrowthCertificate> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let ak = power_set(a, k, cap)?;
    let ak1 = power_set(a, k + 1, cap)?;
    let els = a.elements();
    let aa = product_inverse_set(els, els, cap)?;
    let num = ak.iter().filter(|x| fixes(x, sigma)).count();
    let den = aa.iter().filter(|x| fixes(x, sigma)).count();
    Ok(GrowthCertificate::new(
        "durdo",
        ak1.len() as f64,
        num as f64 / den as f64 * a.len() as f64,
        Some(k),
        Some(den),
    ))
}

/// With `H ≤ K` the pointwise stabilizers of `sigma_h ⊇ sigma_k`:
/// `|π_{K/H}(AA^-1 ∩ K)| ≥ |π_{G/H}(A)| / |π_{G/K}(A)|`.
pub fn subcos_check(a: &[Permutation], sigma_h: &[usize], sigma_k: &[usize], cap: usize) -> Result<GrowthCertificate> {
    degree_of(&[a])?;
    if !sigma_k.iter().all(|x| sigma_h.contains(x)) {
        return Err(Error::hypothesis("subgroup order: sigma_h must contain sigma_k"));
    }
    let a = dedup(a);
    let aa = product_inverse_set(&a, &a, cap)?;
    let in_k: Vec<&Permutation> = aa.iter().filter(|x| fixes(x, sigma_k)).collect();
    let lhs = coset_count(in_k, sigma_h);
    let bound = coset_count(&a, sigma_h) as f64 / coset_count(&a, sigma_k) as f64;
    Ok(GrowthCertificate::new("subcos", lhs as f64, bound, None, None))
}

/// Largest one-step orbit `max_x |x^B|` of a set.
pub fn max_set_orbit(b: &[Permutation], n: usize) -> usize {
    (0..n).map(|x| point_images(b, x).len()).max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixResult {
    /// `α_1, ..., α_k` in order of selection.
    #[serde(with = "crate::perm::one_based")]
    pub sigma: Vec<usize>,
    /// `|α_j^{B_j}|` with `B_j = (A^4)_(α_1..α_{j-1})`.
    pub orbit_sizes: Vec<usize>,
    /// `|B_j|` for each step, plus the final stabilizer subset size.
    pub stabilizer_sizes: Vec<usize>,
    pub rho: f64,
    pub threshold: f64,
    /// True when stopped because no long orbit remained.
    pub terminal: bool,
    pub a4_size: usize,
}

/// Greedy long-orbit prefix: choose `α_j` in the largest orbit of
/// `(A^4)_(α_1..α_{j-1})` of size at least `ρn` (ties to the least point).
pub fn prefix_builder(a: &GenSet, rho: f64, cap: usize) -> Result<PrefixResult> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0,1), got {rho}")));
    }
    let a4 = sorted(&power_set(a, 4, cap)?);
    Ok(prefix_from_set(&a4, a.degree(), rho))
}

/// Prefix construction over an explicit set (already `A^4`).
pub fn prefix_from_set(set: &[Permutation], n: usize, rho: f64) -> PrefixResult {
    let threshold = rho * n as f64;
    let mut sigma = Vec::new();
    let mut orbit_sizes = Vec::new();
    let mut stabilizer_sizes = Vec::new();
    let mut b: Vec<Permutation> = set.to_vec();
    loop {
        stabilizer_sizes.push(b.len());
        let mut best: Option<(usize, usize)> = None;
        for x in 0..n {
            let s = point_images(&b, x).len();
            if (s as f64) >= threshold && best.is_none_or(|(_, bs)| s > bs) {
                best = Some((x, s));
            }
        }
        let Some((x, s)) = best else { break };
        sigma.push(x);
        orbit_sizes.push(s);
        b = pointwise_stabilizer_subset(&b, &[x]);
    }
    PrefixResult {
        sigma,
        orbit_sizes,
        stabilizer_sizes,
        rho,
        threshold,
        terminal: true,
        a4_size: set.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasilicResult {
    pub k: usize,
    /// Distinct images of `(α_1..α_k)` under `S_k ... S_1`.
    pub coset_count: usize,
    /// `∏ |Δ_j|`.
    pub product_bound: f64,
    /// `(ρn)^k`.
    pub rho_bound: f64,
    /// Distinct restrictions to Σ of the setwise stabilizer of `X^k X^-k`.
    pub restriction_count: usize,
    /// `ρ^k k!`.
    pub restriction_bound: f64,
    /// Restrictions as permutations of positions `0..k` of Σ.
    #[serde(skip)]
    pub restrictions: Vec<Permutation>,
}

/// Count cosets reached by the witness products and the restrictions of the
/// setwise stabilizer, for a prefix built from `set` (normally `A^4`).
pub fn basilic_expand(set: &[Permutation], n: usize, prefix: &PrefixResult, cap: usize) -> Result<BasilicResult> {
    let sigma = &prefix.sigma;
    let k = sigma.len();
    // S_j: one element of the stabilizer subset per image of α_j.
    let mut s_sets: Vec<Vec<Permutation>> = Vec::with_capacity(k);
    let mut b: Vec<Permutation> = set.to_vec();
    for &alpha in sigma {
        let mut chosen: Vec<Option<Permutation>> = vec![None; n];
        for g in &b {
            let d = g.image(alpha);
            if chosen[d].is_none() {
                chosen[d] = Some(g.clone());
            }
        }
        s_sets.push(chosen.into_iter().flatten().collect());
        b = pointwise_stabilizer_subset(&b, &[alpha]);
    }
    // Images of the tuple under s_k ... s_1 (s_k acts first).
    let mut tuples: FxHashSet<Vec<usize>> = FxHashSet::default();
    tuples.insert(sigma.clone());
    for s in s_sets.iter().rev() {
        let mut next = FxHashSet::default();
        for t in &tuples {
            for g in s {
                next.insert(g.map_tuple(t));
            }
            if next.len() > cap {
                return Err(Error::cap("basilic tuples", cap, next.len()));
            }
        }
        tuples = next;
    }
    let product_bound: f64 = prefix.orbit_sizes.iter().map(|&s| s as f64).product();

    // X^k as the set of reachable tuples: two elements p, q of X^k give an
    // element p q^-1 of the setwise stabilizer iff Σ^p = Σ^q as sets, and its
    // restriction depends only on the two image tuples.
    let xset = GenSet::from_set(n, set, 1)?;
    let xk: Vec<Vec<usize>> = if k == 0 {
        vec![Vec::new()]
    } else {
        let pk = power_set(&xset, k, cap)?;
        let ts: FxHashSet<Vec<usize>> = pk.iter().map(|p| p.map_tuple(sigma)).collect();
        ts.into_iter().collect()
    };
    let mut by_set: rustc_hash::FxHashMap<Vec<usize>, Vec<Vec<usize>>> = Default::default();
    for t in xk {
        let mut key = t.clone();
        key.sort_unstable();
        by_set.entry(key).or_default().push(t);
    }
    let mut restr: PermSet = PermSet::default();
    for group in by_set.values() {
        for tp in group {
            for tq in group {
                // position i ↦ position j with tq[j] = tp[i]
                let images: Vec<u32> = tp
                    .iter()
                    .map(|x| tq.iter().position(|y| y == x).unwrap() as u32)
                    .collect();
                restr.insert(Permutation::from_images_unchecked(images));
            }
        }
        if restr.len() > cap {
            return Err(Error::cap("basilic restrictions", cap, restr.len()));
        }
    }
    let rho = prefix.rho;
    let kfact: f64 = (1..=k).map(|i| i as f64).product();
    Ok(BasilicResult {
        k,
        coset_count: tuples.len(),
        product_bound,
        rho_bound: (rho * n as f64).powi(k as i32),
        restriction_count: restr.len(),
        restriction_bound: rho.powi(k as i32) * kfact,
        restrictions: sorted(&restr),
    })
}

/// Walk alphabet: `A ∪ A^-1 ∪ {e}` with every letter of length one.
pub fn unit_alphabet(a: &GenSet) -> GenSet {
    let s = a.symmetrize();
    let items = s
        .elements()
        .iter()
        .map(|p| Tracked::new(p.clone(), 1))
        .collect();
    GenSet::from_tracked(a.degree(), items).expect("degrees agree")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingResult {
    /// `g_1..g_k`; `g_0 = e` is implicit.
    pub conjugators: Vec<Tracked>,
    /// Size of the running intersection after each accepted conjugator.
    pub intersection_sizes: Vec<usize>,
    /// `⌈2 ln(n²) / |ln ρ|⌉`.
    pub k_target: usize,
    pub attempts: usize,
}

/// Find `g_1..g_k` (lazy-walk products) with `B ∩ g_1 B g_1^-1 ∩ ... = {e}`.
pub fn splitting(a: &GenSet, b: &[Permutation], rho: f64, budget: &SearchBudget, seed: u64) -> Result<SplittingResult> {
    let n = a.degree();
    if !b.iter().any(Permutation::is_identity) {
        return Err(Error::hypothesis("B must contain the identity"));
    }
    if max_set_orbit(b, n) as f64 > rho * n as f64 {
        return Err(Error::hypothesis("B has an orbit longer than rho n"));
    }
    if !is_k_transitive(a, 2) {
        return Err(Error::hypothesis("<A> is not 2-transitive"));
    }
    let bset: PermSet = b.iter().cloned().collect();
    let mut inter: Vec<Permutation> = sorted(&bset);
    let k_target = (2.0 * ((n * n) as f64).ln() / rho.ln().abs()).ceil() as usize;
    let alphabet = unit_alphabet(a);
    let walker = Walker::new(&alphabet);
    let mut r = rng::seeded(seed);
    let mut conjugators = Vec::new();
    let mut sizes = Vec::new();
    let mut attempt = 0;
    while inter.len() > 1 {
        if attempt >= budget.total_attempts() {
            return Err(Error::budget(
                "splitting",
                format!("intersection still has {} elements", inter.len()),
            ));
        }
        let g = walker.walk(budget.walk_len(n, attempt), &mut r);
        attempt += 1;
        let ginv = g.perm.inverse();
        // x ∈ gBg^-1  iff  g^-1 x g ∈ B
        let next: Vec<Permutation> = inter
            .iter()
            .filter(|x| bset.contains(&conjugate(x, &ginv)))
            .cloned()
            .collect();
        if next.len() < inter.len() {
            inter = next;
            sizes.push(inter.len());
            conjugators.push(g);
        }
    }
    Ok(SplittingResult {
        conjugators,
        intersection_sizes: sizes,
        k_target,
        attempts: attempt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LalmoResult {
    pub g: Tracked,
    pub b_size: usize,
    pub bb_size: usize,
    /// `|BB^-1 g BB^-1 g^-1|`.
    pub product_size: usize,
    pub exponent: f64,
    pub guaranteed: f64,
    pub meets_guarantee: bool,
    /// The product-set certificate along the splitting family.
    pub certificate: GrowthCertificate,
    pub k: usize,
}

/// Growth of `BB^-1` under conjugation by a walk element.
pub fn lalmo_growth(
    a: &GenSet,
    b: &[Permutation],
    rho: f64,
    budget: &SearchBudget,
    seed: u64,
    cap: usize,
) -> Result<LalmoResult> {
    let n = a.degree();
    let b = dedup(b);
    if b.len() < 2 {
        return Err(Error::hypothesis("|B| must be at least 2"));
    }
    let bb = sorted(&product_inverse_set(&b, &b, cap)?);
    let split = splitting(a, &bb, rho, budget, seed)?;
    let mut family: Vec<Tracked> = vec![Tracked::identity(n)];
    family.extend(split.conjugators.iter().cloned());
    let conj_sets: Vec<Vec<Permutation>> = family
        .iter()
        .map(|g| bb.iter().map(|x| conjugate(x, &g.perm)).collect())
        .collect();
    let certificate = tagore_certificate(&conj_sets, cap)?;
    let j = certificate.witness.unwrap_or(0);
    let g = family[j].inverse().mul(&family[j + 1]);
    let size = conj_product_size(&bb, &g.perm, cap)?;
    let guaranteed = 1.0 + rho.ln().abs() / (n as f64).ln();
    let exponent = (size as f64).ln() / (b.len() as f64).ln();
    Ok(LalmoResult {
        g,
        b_size: b.len(),
        bb_size: bb.len(),
        product_size: size,
        exponent,
        guaranteed,
        meets_guarantee: ge_tol(exponent, guaranteed),
        certificate,
        k: split.conjugators.len(),
    })
}

/// `|C g C g^-1|`.
pub fn conj_product_size(c: &[Permutation], g: &Permutation, cap: usize) -> Result<usize> {
    let cg: Vec<Permutation> = c.iter().map(|x| conjugate(x, g)).collect();
    Ok(product_set(c, &cg, cap)?.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum RatherbabBranch {
    /// `|Σ| ≥ |ln ρ| ln|A| / (3 (ln n)^2)`.
    LargeSigma { sigma_len: usize, threshold: f64 },
    /// `|A^ℓ| ≥ |A|^{1 + |ln ρ|/(3 ln n)}` realized.
    Growth {
        ell: u64,
        power_size: usize,
        exponent: f64,
        target: f64,
        holds: bool,
        lalmo: Box<LalmoResult>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatherbabReport {
    pub branch: RatherbabBranch,
    /// Set when `1 - 1/ln n < 2/3`, where the corollary's constant does not
    /// apply.
    pub below_regime: bool,
    pub a_size: usize,
}

/// Either Σ is long relative to `ln|A|` or some power of A grows.
pub fn ratherbab_dichotomy(
    a: &GenSet,
    sigma: &[usize],
    rho: f64,
    budget: &SearchBudget,
    seed: u64,
    cap: usize,
) -> Result<RatherbabReport> {
    let n = a.degree();
    if !(a.is_symmetric() && a.has_identity()) {
        return Err(Error::hypothesis("A must be symmetric and contain e"));
    }
    if !is_k_transitive(a, 2) {
        return Err(Error::hypothesis("<A> is not 2-transitive"));
    }
    let a4 = sorted(&power_set(a, 4, cap)?);
    let stab = pointwise_stabilizer_subset(&a4, sigma);
    if max_set_orbit(&stab, n) as f64 > rho * n as f64 {
        return Err(Error::hypothesis("(A^4)_(Σ) has an orbit longer than rho n"));
    }
    let ln_n = (n as f64).ln();
    let below_regime = 1.0 - 1.0 / ln_n < 2.0 / 3.0;
    let threshold = rho.ln().abs() / (3.0 * ln_n * ln_n) * (a.len() as f64).ln();
    if sigma.len() as f64 >= threshold {
        return Ok(RatherbabReport {
            branch: RatherbabBranch::LargeSigma {
                sigma_len: sigma.len(),
                threshold,
            },
            below_regime,
            a_size: a.len(),
        });
    }
    let a2 = sorted(&power_set(a, 2, cap)?);
    let b = pointwise_stabilizer_subset(&a2, sigma);
    let lalmo = lalmo_growth(a, &b, rho, budget, seed, cap)?;
    // BB^-1 g BB^-1 g^-1 ⊆ A^{4 + m + 4 + m}.
    let ell = 8 + 2 * lalmo.g.len;
    let power_size = power_set(a, ell as usize, cap)?.len();
    let exponent = (power_size as f64).ln() / (a.len() as f64).ln();
    let target = 1.0 + rho.ln().abs() / (3.0 * ln_n);
    Ok(RatherbabReport {
        branch: RatherbabBranch::Growth {
            ell,
            power_size,
            exponent,
            target,
            holds: ge_tol(exponent, target),
            lalmo: Box::new(lalmo),
        },
        below_regime,
        a_size: a.len(),
    })
}
