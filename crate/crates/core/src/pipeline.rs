//! The growth-versus-descent driver, the iteration on top of it, and
//! self-certifying reports.
//!
//! Every inequality a run relies on is stored as a [`Check`] whose two sides
//! are expression trees over set expressions in the input set `A`. The
//! verifier re-evaluates those trees on freshly materialized sets, so a
//! serialized report can be audited without repeating any randomized
//! search. Checks marked `asserted` follow from lemmas that hold
//! unconditionally; the rest record theorem-level conclusions whose
//! hypotheses are out of reach at desk scale, and are reported as observed.

use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    giant_on_gens, is_k_transitive, orbit_of_point, orbits_of, point_images, pointwise_stabilizer_subset,
    setwise_stabilizer_subset, GiantClass, StabilizerChain,
};
pub use crate::partition::Mode;
use crate::growth::{ge_tol, lalmo_growth, prefix_builder, ratherbab_dichotomy, RatherbabBranch, REL_TOL};
use crate::partition::{siniestro, DriverParams};
use crate::perm::{conjugate, inverse_set, power_set, product_set, sorted, GenSet, PermSet, Permutation, Tracked};
use crate::rng;
use crate::support::{shrink_budget, shrink_support, SHRINK_EPS};
use crate::walks::{cayley_bfs, SearchBudget};

/// Schema version of [`GrowthReport`] and [`IterationReport`].
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    /// Long-orbit threshold of the prefix, `e^{-1/5}` by default.
    pub rho_prefix: f64,
    /// Descent threshold on the orbit `O'`, `e^{-1/10}` by default.
    pub rho_descent: f64,
    pub budget: SearchBudget,
    /// Element cap for every materialized set.
    pub cap: usize,
    pub mode: Mode,
    pub seed: u64,
    /// `C` in the size hypothesis `|A| ≥ n^{C (ln n)^2}`.
    pub c_size: f64,
    /// `c` in the growth exponent `1 + c lnln|A| / ((ln n)^2 lnln n)`.
    pub c_growth: f64,
    /// `K` in `exp(K (ln n)^4 (ln ln n)^2)`.
    pub k_diam: f64,
    /// Iterations of the growth driver before plain squaring takes over.
    pub max_iterations: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams {
            rho_prefix: (-0.2f64).exp(),
            rho_descent: (-0.1f64).exp(),
            budget: SearchBudget::default(),
            cap: crate::DEFAULT_CAP,
            mode: Mode::Desk,
            seed: 0,
            c_size: 1.0,
            c_growth: 1.0,
            k_diam: 1.0,
            max_iterations: 16,
        }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("rho_prefix", self.rho_prefix), ("rho_descent", self.rho_descent)] {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0,1), got {r}")));
            }
        }
        if self.cap == 0 {
            return Err(Error::Domain("cap must be positive".into()));
        }
        Ok(())
    }
}

/// A set built from `A` (the report's input set).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetExpr {
    A,
    Elements(Vec<Permutation>),
    Power(Box<SetExpr>, u64),
    Product(Vec<SetExpr>),
    Inverse(Box<SetExpr>),
    /// Elements fixing every listed point.
    Pointwise(Box<SetExpr>, #[serde(with = "crate::perm::one_based")] Vec<usize>),
    /// Elements mapping the listed points onto themselves.
    Setwise(Box<SetExpr>, #[serde(with = "crate::perm::one_based")] Vec<usize>),
    /// `g X g^-1`.
    Conjugate(Box<SetExpr>, Permutation),
    /// `{ g h g^-1 : g ∈ X }`.
    ConjugatesOf(Permutation, Box<SetExpr>),
}

impl SetExpr {
    pub fn power(self, k: u64) -> Self {
        SetExpr::Power(Box::new(self), k)
    }

    pub fn pointwise(self, pts: &[usize]) -> Self {
        SetExpr::Pointwise(Box::new(self), pts.to_vec())
    }

    pub fn setwise(self, pts: &[usize]) -> Self {
        SetExpr::Setwise(Box::new(self), pts.to_vec())
    }

    pub fn size(self) -> Expr {
        Expr::Size(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Num(f64),
    Size(SetExpr),
    /// Distinct images of a tuple under the set.
    Tuples(SetExpr, #[serde(with = "crate::perm::one_based")] Vec<usize>),
    /// `|x^X|`.
    Orbit(SetExpr, #[serde(with = "crate::perm::one_based")] usize),
    MaxOrbit(SetExpr),
    GroupOrder(SetExpr),
    Support(Permutation),
    /// Distinct tuples `(g h_0 g^-1, …, g h_r g^-1)` over `g ∈ X`.
    ConjugateTuples(Vec<Permutation>, SetExpr),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Ln(Box<Expr>),
    Factorial(u64),
}

fn num(x: f64) -> Expr {
    Expr::Num(x)
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::Div(Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    Expr::Pow(Box::new(a), Box::new(b))
}

fn ln(a: Expr) -> Expr {
    Expr::Ln(Box::new(a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    Compare { lhs: Expr, rel: Relation, rhs: Expr },
    /// `lhs = |sub|`, `rhs = |sub ∩ sup|`.
    Subset { sub: SetExpr, sup: SetExpr },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub claim: Claim,
    pub asserted: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// A witness element and a length ℓ with the element in `A^ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub element: Permutation,
    pub length: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthRoute {
    /// `A^2` is already the whole group.
    Saturated,
    /// The dichotomy for short prefixes produced growth directly.
    ShortPrefix,
    /// Growth of the prefix stabilizer lifted to `A`.
    StabilizerLift,
    /// Injectivity of the conjugation map into pointwise stabilizers.
    Centralizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    Growth {
        route: GrowthRoute,
        /// ℓ with the measured `|A^ℓ|`.
        power: u64,
        power_size: u64,
        /// `ln|A^ℓ| / ln|A|`.
        exponent: f64,
        /// Set when the exponent is limited by `|⟨A⟩|`.
        capped: bool,
    },
    Descent {
        /// The orbit `O'`, of size m.
        #[serde(with = "crate::perm::one_based")]
        orbit: Vec<usize>,
        m: usize,
        action_order: BigUint,
        giant: GiantClass,
        /// Diameter of the action on `O'` over the restricted generators.
        d: usize,
        element: Permutation,
        length: u64,
        /// Support-2 or support-3 element derived from `element`.
        small: Option<Tracked>,
    },
    SmallSupportShortcut {
        source: String,
        element: Permutation,
        length: u64,
        small: Option<Tracked>,
    },
    BudgetFail {
        stage: String,
        error: String,
    },
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Growth { .. } => "growth",
            Branch::Descent { .. } => "descent",
            Branch::SmallSupportShortcut { .. } => "small_support_shortcut",
            Branch::BudgetFail { .. } => "budget_fail",
        }
    }

    /// The support-2/3 element, when the branch produced one.
    pub fn small_element(&self) -> Option<&Tracked> {
        match self {
            Branch::Descent { small, .. } | Branch::SmallSupportShortcut { small, .. } => small.as_ref(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub version: u32,
    pub degree: usize,
    pub mode: Mode,
    pub seed: u64,
    /// The theorem's size hypothesis does not hold (always set in desk mode).
    pub outside_hypotheses: bool,
    /// The input set, sorted.
    pub a: Vec<Permutation>,
    pub group_order: BigUint,
    pub branch: Branch,
    pub trace: Vec<StageRecord>,
    pub checks: Vec<Check>,
    pub ledger: Vec<LedgerEntry>,
}

impl GrowthReport {
    pub fn asserted_hold(&self) -> bool {
        self.checks.iter().filter(|c| c.asserted).all(|c| c.holds)
    }
}

/// Set-expression evaluator with memoized intermediate sets.
struct Eval {
    a: Rc<Vec<Permutation>>,
    n: usize,
    cap: usize,
    sets: FxHashMap<String, Rc<Vec<Permutation>>>,
}

fn as_vec(set: PermSet) -> Rc<Vec<Permutation>> {
    Rc::new(sorted(&set))
}

impl Eval {
    fn new(a: Vec<Permutation>, n: usize, cap: usize) -> Self {
        Eval {
            a: Rc::new(a),
            n,
            cap,
            sets: FxHashMap::default(),
        }
    }

    fn set(&mut self, e: &SetExpr) -> Result<Rc<Vec<Permutation>>> {
        if let SetExpr::A = e {
            return Ok(self.a.clone());
        }
        let key = serde_json::to_string(e).expect("set expressions serialize");
        if let Some(s) = self.sets.get(&key) {
            return Ok(s.clone());
        }
        let out = match e {
            SetExpr::A => unreachable!(),
            SetExpr::Elements(v) => as_vec(v.iter().cloned().collect()),
            SetExpr::Power(x, k) => {
                let x = self.set(x)?;
                if x.is_empty() {
                    return Err(Error::Domain("power of an empty set".into()));
                }
                let g = GenSet::from_set(self.n, x.iter(), 1)?;
                as_vec(power_set(&g, *k as usize, self.cap)?)
            }
            SetExpr::Product(xs) => {
                let mut acc: Option<Rc<Vec<Permutation>>> = None;
                for x in xs {
                    let s = self.set(x)?;
                    acc = Some(match acc {
                        None => s,
                        Some(p) => as_vec(product_set(&p, &s, self.cap)?),
                    });
                }
                acc.ok_or_else(|| Error::Domain("empty product".into()))?
            }
            SetExpr::Inverse(x) => {
                let mut v = inverse_set(&self.set(x)?);
                v.sort_unstable();
                Rc::new(v)
            }
            SetExpr::Pointwise(x, pts) => Rc::new(pointwise_stabilizer_subset(self.set(x)?.iter(), pts)),
            SetExpr::Setwise(x, pts) => Rc::new(setwise_stabilizer_subset(self.set(x)?.iter(), pts)),
            SetExpr::Conjugate(x, g) => as_vec(self.set(x)?.iter().map(|y| conjugate(y, g)).collect()),
            SetExpr::ConjugatesOf(h, x) => as_vec(self.set(x)?.iter().map(|g| conjugate(h, g)).collect()),
        };
        self.sets.insert(key, out.clone());
        Ok(out)
    }

    fn num(&mut self, e: &Expr) -> Result<f64> {
        Ok(match e {
            Expr::Num(x) => *x,
            Expr::Size(s) => self.set(s)?.len() as f64,
            Expr::Tuples(s, t) => {
                let set = self.set(s)?;
                let imgs: FxHashSet<Vec<usize>> = set.iter().map(|g| g.map_tuple(t)).collect();
                imgs.len() as f64
            }
            Expr::Orbit(s, x) => point_images(self.set(s)?.iter(), *x).len() as f64,
            Expr::MaxOrbit(s) => {
                let set = self.set(s)?;
                (0..self.n).map(|x| point_images(set.iter(), x).len()).max().unwrap_or(0) as f64
            }
            Expr::GroupOrder(s) => {
                let gens: Vec<Permutation> = self.set(s)?.iter().filter(|g| !g.is_identity()).cloned().collect();
                StabilizerChain::new(&gens, self.n).order().to_f64().unwrap_or(f64::INFINITY)
            }
            Expr::Support(g) => g.support_size() as f64,
            Expr::ConjugateTuples(hs, s) => {
                let set = self.set(s)?;
                let tuples: FxHashSet<Vec<Permutation>> =
                    set.iter().map(|g| hs.iter().map(|h| conjugate(h, g)).collect()).collect();
                tuples.len() as f64
            }
            Expr::Sum(xs) => xs.iter().map(|x| self.num(x)).sum::<Result<f64>>()?,
            Expr::Prod(xs) => xs.iter().map(|x| self.num(x)).product::<Result<f64>>()?,
            Expr::Div(a, b) => self.num(a)? / self.num(b)?,
            Expr::Pow(a, b) => self.num(a)?.powf(self.num(b)?),
            Expr::Ln(a) => self.num(a)?.ln(),
            Expr::Factorial(k) => (1..=*k).map(|i| i as f64).product(),
        })
    }

    fn claim(&mut self, c: &Claim) -> Result<(f64, f64, bool)> {
        match c {
            Claim::Compare { lhs, rel, rhs } => {
                let l = self.num(lhs)?;
                let r = self.num(rhs)?;
                let holds = match rel {
                    Relation::Ge => ge_tol(l, r),
                    Relation::Le => ge_tol(r, l),
                    Relation::Eq => (l - r).abs() <= REL_TOL * l.abs().max(r.abs()).max(1.0),
                };
                Ok((l, r, holds))
            }
            Claim::Subset { sub, sup } => {
                let sub = self.set(sub)?;
                let sup = self.set(sup)?;
                let inside = sub.iter().filter(|x| sup.binary_search(x).is_ok()).count();
                Ok((sub.len() as f64, inside as f64, inside == sub.len()))
            }
        }
    }
}

fn same_value(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: usize,
    pub ledger: usize,
    /// Labels of checks or ledger entries that did not reproduce.
    pub failures: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-evaluate every check and ledger entry of a report from its serialized
/// witnesses: both sides must reproduce, the recorded verdict must match,
/// and asserted checks must hold.
pub fn verify_report(report: &GrowthReport, cap: usize) -> Result<Verification> {
    if report.version != REPORT_VERSION {
        return Err(Error::Parse(format!("unsupported report version {}", report.version)));
    }
    let mut ev = Eval::new(report.a.clone(), report.degree, cap);
    let mut failures = Vec::new();
    let gens: Vec<Permutation> = report.a.iter().filter(|g| !g.is_identity()).cloned().collect();
    if StabilizerChain::new(&gens, report.degree).order() != report.group_order {
        failures.push("group order".to_string());
    }
    for c in &report.checks {
        let (l, r, holds) = ev.claim(&c.claim)?;
        if !same_value(l, c.lhs) || !same_value(r, c.rhs) || holds != c.holds || (c.asserted && !holds) {
            failures.push(c.label.clone());
        }
    }
    for e in &report.ledger {
        let claim = Claim::Subset {
            sub: SetExpr::Elements(vec![e.element.clone()]),
            sup: SetExpr::A.power(e.length),
        };
        if !ev.claim(&claim)?.2 {
            failures.push(format!("ledger: {}", e.label));
        }
    }
    Ok(Verification {
        checks: report.checks.len(),
        ledger: report.ledger.len(),
        failures,
    })
}

struct Run<'p> {
    a: GenSet,
    n: usize,
    p: &'p GrowthParams,
    ev: Eval,
    checks: Vec<Check>,
    ledger: Vec<LedgerEntry>,
    trace: Vec<StageRecord>,
}

impl Run<'_> {
    fn stage(&mut self, stage: &str, detail: impl Into<String>) {
        self.trace.push(StageRecord {
            stage: stage.into(),
            detail: detail.into(),
        });
    }

    fn record(&mut self, label: &str, claim: Claim, asserted: bool) -> Result<bool> {
        let (lhs, rhs, holds) = self.ev.claim(&claim)?;
        self.checks.push(Check {
            label: label.into(),
            claim,
            asserted,
            lhs,
            rhs,
            holds,
        });
        Ok(holds)
    }

    fn compare(&mut self, label: &str, lhs: Expr, rel: Relation, rhs: Expr, asserted: bool) -> Result<bool> {
        self.record(label, Claim::Compare { lhs, rel, rhs }, asserted)
    }

    fn subset(&mut self, label: &str, sub: SetExpr, sup: SetExpr) -> Result<bool> {
        self.record(label, Claim::Subset { sub, sup }, true)
    }

    fn witness(&mut self, label: &str, element: &Permutation, length: u64) {
        self.ledger.push(LedgerEntry {
            label: label.into(),
            element: element.clone(),
            length,
        });
    }

    fn set(&mut self, e: &SetExpr) -> Result<Rc<Vec<Permutation>>> {
        self.ev.set(e)
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Shrink a small-support element to support 2 or 3, when its support
    /// allows it.
    fn shrink(&mut self, g: &Tracked) -> Option<Tracked> {
        let seed = rng::derive(self.p.seed, 0x5151);
        match shrink_support(&self.a, g, SHRINK_EPS, &shrink_budget(self.n), seed) {
            Ok(r) => {
                self.stage("shrink", format!("supports {:?}", r.supports));
                Some(r.c)
            }
            Err(e) => {
                self.stage("shrink", format!("not certified: {e}"));
                None
            }
        }
    }

    fn certify_small(&mut self, g: &Tracked) -> Result<Option<Tracked>> {
        let c = self.shrink(g);
        if let Some(c) = &c {
            self.witness("support-2/3 element", &c.perm, c.len);
            self.compare("small support", Expr::Support(c.perm.clone()), Relation::Le, num(3.0), true)?;
        }
        Ok(c)
    }

    fn growth(&mut self, route: GrowthRoute, power: u64) -> Result<Branch> {
        let size = self.set(&SetExpr::A.power(power))?.len();
        let exponent = (size as f64).ln() / (self.a.len() as f64).ln();
        Ok(Branch::Growth {
            route,
            power,
            power_size: size as u64,
            exponent,
            capped: false,
        })
    }

    /// `1 + c lnln|A| / ((ln n)^2 lnln n)`.
    fn uru_exponent(&self) -> Expr {
        let ln_n = self.ln_n();
        Expr::Sum(vec![
            num(1.0),
            div(
                Expr::Prod(vec![num(self.p.c_growth), ln(ln(SetExpr::A.size()))]),
                num(ln_n * ln_n * ln_n.ln().max(f64::MIN_POSITIVE)),
            ),
        ])
    }
}

fn min_support_nontrivial(set: &[Permutation]) -> Option<Permutation> {
    set.iter()
        .filter(|g| !g.is_identity())
        .min_by(|x, y| x.support_size().cmp(&y.support_size()).then_with(|| x.cmp(y)))
        .cloned()
}

/// Breadth-first search through `(A')^j` for an element with the given
/// restriction to `orbit` that also fixes `fix` pointwise.
fn lift(
    aprime: &[Permutation],
    orbit: &[usize],
    target: &Permutation,
    fix: &[usize],
    cap: usize,
) -> Result<(Permutation, u64)> {
    let n = aprime[0].degree();
    let matches = |g: &Permutation| {
        fix.iter().all(|&x| g.image(x) == x) && g.restrict(orbit).is_ok_and(|r| &r == target)
    };
    let e = Permutation::identity(n);
    if matches(&e) {
        return Ok((e, 0));
    }
    let mut seen: PermSet = std::iter::once(e.clone()).collect();
    let mut frontier = vec![e];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for x in &frontier {
            for g in aprime {
                let y = x.compose(g);
                if seen.insert(y.clone()) {
                    if matches(&y) {
                        return Ok((y, depth));
                    }
                    if seen.len() > cap {
                        return Err(Error::cap("lift search", cap, seen.len()));
                    }
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    Err(Error::NotInGroup)
}

/// One pass of the growth-versus-descent argument on a symmetric set `A`
/// with `e ∈ A` and `⟨A⟩` 3-transitive. Either a power of A is measured to
/// grow, or the run exhibits a small-support element together with the
/// reduced instance (the action on the long orbit `O'`).
pub fn jukuju_run(a: &GenSet, params: &GrowthParams) -> Result<GrowthReport> {
    params.validate()?;
    let n = a.degree();
    if !(a.is_symmetric() && a.has_identity()) {
        return Err(Error::hypothesis("A must be symmetric and contain e"));
    }
    if n < 3 || !is_k_transitive(a, 3) {
        return Err(Error::hypothesis("<A> is not 3-transitive"));
    }
    let ln_n = (n as f64).ln();
    let ln_a = (a.len() as f64).ln();
    let size_hyp = params.c_size * ln_n.powi(3);
    match params.mode {
        Mode::Strict if ln_a < size_hyp => {
            return Err(Error::hypothesis(format!(
                "|A| = {} is below n^(C (ln n)^2) = e^{size_hyp:.1}",
                a.len()
            )))
        }
        Mode::Desk if a.len() < n * n => {
            return Err(Error::hypothesis(format!("desk mode needs |A| >= n^2 = {}", n * n)));
        }
        _ => {}
    }
    let gens = a.non_identity();
    let group_order = StabilizerChain::new(&gens, n).order();
    let mut run = Run {
        a: a.clone(),
        n,
        p: params,
        ev: Eval::new(a.elements().to_vec(), n, params.cap),
        checks: Vec::new(),
        ledger: Vec::new(),
        trace: Vec::new(),
    };
    let branch = match drive(&mut run, &group_order) {
        Ok(b) => b,
        Err(e) if e.is_resource_limit() => Branch::BudgetFail {
            stage: run.trace.last().map_or("start".into(), |s| s.stage.clone()),
            error: e.to_string(),
        },
        Err(e) => return Err(e),
    };
    Ok(GrowthReport {
        version: REPORT_VERSION,
        degree: n,
        mode: params.mode,
        seed: params.seed,
        outside_hypotheses: ln_a < size_hyp,
        a: a.elements().to_vec(),
        group_order,
        branch,
        trace: run.trace,
        checks: run.checks,
        ledger: run.ledger,
    })
}

fn drive(run: &mut Run, group_order: &BigUint) -> Result<Branch> {
    let n = run.n;
    let p = run.p;
    let nf = n as f64;
    let ln_n = run.ln_n();
    let a_len = run.a.len();
    if p.mode == Mode::Desk {
        run.compare("desk size hypothesis", SetExpr::A.size(), Relation::Ge, num(nf * nf), true)?;
    }

    // Saturation: A^2 = <A>.
    let a2 = run.set(&SetExpr::A.power(2))?.len();
    if BigUint::from(a2) == *group_order {
        run.stage("saturation", format!("|A^2| = |<A>| = {a2}"));
        run.compare(
            "saturation",
            SetExpr::A.power(2).size(),
            Relation::Eq,
            Expr::GroupOrder(SetExpr::A),
            true,
        )?;
        let exponent = if a2 == a_len { 1.0 } else { (a2 as f64).ln() / (a_len as f64).ln() };
        return Ok(Branch::Growth {
            route: GrowthRoute::Saturated,
            power: 2,
            power_size: a2 as u64,
            exponent,
            capped: true,
        });
    }

    // Long-orbit prefix.
    run.stage("prefix", "greedy long orbits of (A^4)_(alpha_1..alpha_j-1)");
    let prefix = prefix_builder(&run.a, p.rho_prefix, p.cap)?;
    let sigma = prefix.sigma.clone();
    let k = sigma.len();
    let a4 = SetExpr::A.power(4);
    for j in 0..k {
        run.compare(
            &format!("long orbit {}", j + 1),
            Expr::Orbit(a4.clone().pointwise(&sigma[..j]), sigma[j]),
            Relation::Ge,
            num(p.rho_prefix * nf),
            true,
        )?;
    }
    run.compare(
        "prefix terminal",
        Expr::MaxOrbit(a4.clone().pointwise(&sigma)),
        Relation::Le,
        num(p.rho_prefix * nf),
        true,
    )?;
    run.stage("prefix", format!("k = {k}, sigma = {:?}", sigma.iter().map(|x| x + 1).collect::<Vec<_>>()));
    if k == 0 {
        return Ok(Branch::BudgetFail {
            stage: "prefix".into(),
            error: "A^4 has no orbit of length >= rho n".into(),
        });
    }

    // Short prefixes force growth.
    let seed = rng::derive(p.seed, 1);
    match ratherbab_dichotomy(&run.a, &sigma, p.rho_prefix, &p.budget, seed, p.cap) {
        Ok(rep) => match rep.branch {
            RatherbabBranch::LargeSigma { threshold, .. } => {
                run.stage("short prefix", format!("k = {k} >= {threshold:.4}; no early exit"));
                run.compare(
                    "prefix length",
                    num(k as f64),
                    Relation::Ge,
                    div(
                        Expr::Prod(vec![num(p.rho_prefix.ln().abs()), ln(SetExpr::A.size())]),
                        num(3.0 * ln_n * ln_n),
                    ),
                    false,
                )?;
            }
            RatherbabBranch::Growth {
                ell,
                target,
                holds,
                lalmo,
                ..
            } => {
                if holds {
                    run.stage("short prefix", format!("growth in A^{ell}"));
                    run.witness("conjugating element", &lalmo.g.perm, lalmo.g.len);
                    run.compare(
                        "short-prefix growth",
                        SetExpr::A.power(ell).size(),
                        Relation::Ge,
                        pow(SetExpr::A.size(), num(target)),
                        false,
                    )?;
                    return run.growth(GrowthRoute::ShortPrefix, ell);
                }
                run.stage("short prefix", format!("A^{ell} short of the target exponent {target:.4}"));
            }
        },
        Err(e) => run.stage("short prefix", format!("skipped: {e}")),
    }

    // A' = (A^{8 max(k-1,1)})_Σ and its restrictions to Σ.
    let small_sigma = sigma[..k - 1].to_vec();
    let alpha_k = sigma[k - 1];
    let l_prime = 8 * (k as u64 - 1).max(1);
    let aprime_expr = SetExpr::A.power(l_prime).setwise(&small_sigma);
    let aprime = run.set(&aprime_expr)?;
    let km1 = (k - 1) as u64;
    run.compare(
        "restrictions to Sigma",
        Expr::Tuples(aprime_expr.clone(), small_sigma.clone()),
        Relation::Ge,
        Expr::Prod(vec![num(p.rho_prefix.powi(km1 as i32)), Expr::Factorial(km1)]),
        true,
    )?;
    let h_gens: Vec<Permutation> = aprime.iter().filter(|g| !g.is_identity()).cloned().collect();
    if !small_sigma.is_empty() {
        let orbs = orbits_of(&h_gens, n);
        let delta = small_sigma
            .iter()
            .map(|&x| orbs.orbit_of(x).to_vec())
            .max_by_key(|o| (o.len(), std::cmp::Reverse(o[0])))
            .unwrap();
        let giant = giant_on_gens(&h_gens, &delta)?;
        run.stage("sigma action", format!("orbit of size {} in Sigma, {giant:?}", delta.len()));
        run.compare(
            "long orbit in Sigma",
            num(delta.len() as f64),
            Relation::Ge,
            num(p.rho_prefix * km1 as f64),
            false,
        )?;
    }
    let o_prime = {
        let mut o = orbit_of_point(&h_gens, n, alpha_k);
        o.sort_unstable();
        o
    };
    let m = o_prime.len();
    let giant = giant_on_gens(&h_gens, &o_prime)?;
    run.stage("orbit", format!("|O'| = {m}, action {giant:?}"));

    if (m as f64) <= p.rho_descent * nf || !giant.is_giant() {
        return descent(run, &aprime, &o_prime, giant, l_prime);
    }

    // Growth branch.
    let b_expr = SetExpr::A.power(2).pointwise(&sigma);
    run.compare(
        "stabilizer share",
        b_expr.clone().size(),
        Relation::Ge,
        div(SetExpr::A.size(), num(nf.powi(k as i32))),
        true,
    )?;
    let ln_a = (a_len as f64).ln();
    if k as f64 <= ln_a / (2.0 * ln_n) {
        return stabilizer_lift(run, &aprime, &o_prime, &sigma, l_prime, b_expr);
    }

    let g0_set = run.set(&a4.clone().pointwise(&small_sigma))?;
    let Some(g0) = min_support_nontrivial(&g0_set) else {
        return Ok(Branch::BudgetFail {
            stage: "g0".into(),
            error: "(A^4)_(Sigma) is trivial".into(),
        });
    };
    run.witness("g0", &g0, 4);
    if g0.support_size() as f64 <= nf / 4.0 {
        run.stage("g0", format!("support {} <= n/4", g0.support_size()));
        run.compare("g0 support", Expr::Support(g0.clone()), Relation::Le, num(nf / 4.0), true)?;
        let small = run.certify_small(&Tracked::new(g0.clone(), 4))?;
        return Ok(Branch::SmallSupportShortcut {
            source: "g0".into(),
            element: g0,
            length: 4,
            small,
        });
    }
    centralizer(run, &aprime, &o_prime, &sigma, l_prime, g0)
}

fn restricted_genset(set: &[Permutation], orbit: &[usize], len: u64) -> Result<GenSet> {
    let m = orbit.len();
    let items: Vec<Tracked> = set
        .iter()
        .map(|g| g.restrict(orbit).map(|r| Tracked::new(r, len)))
        .collect::<Result<_>>()?;
    GenSet::from_tracked(m, items)
}

fn descent(
    run: &mut Run,
    aprime: &[Permutation],
    o_prime: &[usize],
    giant: GiantClass,
    l_prime: u64,
) -> Result<Branch> {
    let n = run.n;
    let m = o_prime.len();
    let res = restricted_genset(aprime, o_prime, 1)?.symmetrize();
    let bfs = cayley_bfs(&res, run.p.cap)?;
    let d = bfs.diameter;
    run.stage("descent", format!("diameter of the action on O' is {d}"));
    let ap = GenSet::from_set(n, aprime.iter(), 1)?;
    let ball_d = sorted(&power_set(&ap, d, run.p.cap)?);
    let ball_d1 = sorted(&power_set(&ap, d + 1, run.p.cap)?);
    let (element, length, trivial_on_orbit) = if ball_d1.len() == ball_d.len() {
        let g = min_support_nontrivial(&ball_d).ok_or(Error::NotInGroup)?;
        (g, d as u64 * l_prime, false)
    } else {
        let g = ball_d1.iter().find(|x| ball_d.binary_search(x).is_err()).unwrap();
        let target = g.restrict(o_prime)?;
        let h = ball_d
            .iter()
            .find(|h| h.restrict(o_prime).is_ok_and(|r| r == target))
            .ok_or_else(|| Error::hypothesis("ball of radius D misses a restriction"))?;
        (g.inverse().compose(h), (2 * d as u64 + 1) * l_prime, true)
    };
    run.witness("descent element", &element, length);
    run.compare("descent element nontrivial", Expr::Support(element.clone()), Relation::Ge, num(1.0), true)?;
    if trivial_on_orbit {
        run.compare(
            "descent element off O'",
            Expr::Support(element.clone()),
            Relation::Le,
            num((n - m) as f64),
            true,
        )?;
    }
    let small = run.certify_small(&Tracked::new(element.clone(), length))?;
    Ok(Branch::Descent {
        orbit: o_prime.to_vec(),
        m,
        action_order: BigUint::from(bfs.order),
        giant,
        d,
        element,
        length,
        small,
    })
}

fn stabilizer_lift(
    run: &mut Run,
    aprime: &[Permutation],
    o_prime: &[usize],
    sigma: &[usize],
    l_prime: u64,
    b_expr: SetExpr,
) -> Result<Branch> {
    let p = run.p;
    let n = run.n;
    let ln_n = run.ln_n();
    let small_sigma = &sigma[..sigma.len() - 1];
    let b = run.set(&b_expr)?;
    let a_res = restricted_genset(aprime, o_prime, 1)?;
    let b_res: Vec<Permutation> = b.iter().map(|g| g.restrict(o_prime)).collect::<Result<_>>()?;
    let lal = lalmo_growth(&a_res, &b_res, p.rho_descent, &p.budget, rng::derive(p.seed, 2), p.cap)?;
    run.stage(
        "stabilizer growth",
        format!("|B^2 g B^2 g^-1| = {} from |B| = {}", lal.product_size, lal.b_size),
    );
    let (g, steps) = if o_prime.len() == n {
        (lal.g.perm.clone(), lal.g.len)
    } else {
        lift(aprime, o_prime, &lal.g.perm, &[], p.cap)?
    };
    let g_len = steps * l_prime;
    run.witness("conjugating element", &g, g_len);
    let ell = 8 + 2 * g_len;
    let b2 = b_expr.clone().power(2);
    let prod = SetExpr::Product(vec![b2.clone(), SetExpr::Conjugate(Box::new(b2), g.clone())]);
    run.subset("B^2 g B^2 g^-1 in pointwise stabilizer", prod.clone(), SetExpr::A.power(ell).pointwise(small_sigma))?;
    run.compare(
        "stabilizer growth",
        prod.size(),
        Relation::Ge,
        pow(b_expr.clone().size(), num(1.0 + 0.1 / ln_n)),
        false,
    )?;
    let j = 2 * ell;
    run.compare(
        "growth lifts from the stabilizer",
        SetExpr::A.power(j + 1).size(),
        Relation::Ge,
        Expr::Prod(vec![
            div(
                SetExpr::A.power(j).pointwise(sigma).size(),
                SetExpr::Product(vec![SetExpr::A, SetExpr::Inverse(Box::new(SetExpr::A))])
                    .pointwise(sigma)
                    .size(),
            ),
            SetExpr::A.size(),
        ]),
        true,
    )?;
    run.compare(
        "lifted growth",
        SetExpr::A.power(j + 1).size(),
        Relation::Ge,
        Expr::Prod(vec![
            div(pow(b_expr.size(), num(0.1 / ln_n)), num(n as f64)),
            SetExpr::A.size(),
        ]),
        false,
    )?;
    run.compare(
        "growth exponent",
        SetExpr::A.power(j + 1).size(),
        Relation::Ge,
        pow(SetExpr::A.size(), num(1.0 + 1.0 / (21.0 * ln_n))),
        false,
    )?;
    run.growth(GrowthRoute::StabilizerLift, j + 1)
}

fn centralizer(
    run: &mut Run,
    aprime: &[Permutation],
    o_prime: &[usize],
    sigma: &[usize],
    l_prime: u64,
    g0: Permutation,
) -> Result<Branch> {
    let p = run.p;
    let n = run.n;
    let nf = n as f64;
    let k = sigma.len();
    let small_sigma = &sigma[..k - 1];
    let alpha_k = sigma[k - 1];
    let a_res = restricted_genset(aprime, o_prime, l_prime)?;
    let g0_res = Tracked::new(g0.restrict(o_prime)?, 4);
    let driver = DriverParams {
        mode: p.mode,
        ..DriverParams::default()
    };
    let sin = match siniestro(&a_res, &g0_res, 1.0 / 7.0, &p.budget, rng::derive(p.seed, 3), &driver) {
        Ok(s) => s,
        Err(e) => {
            return Ok(Branch::BudgetFail {
                stage: "transitivity".into(),
                error: e.to_string(),
            })
        }
    };
    run.stage(
        "transitivity",
        format!("{} conjugates make h transitive on O'", sin.conjugators.len() + 1),
    );
    let full = o_prime.len() == n;
    let (h, h_len) = if full {
        (sin.h.perm.clone(), sin.h.len)
    } else {
        let (h, s) = lift(aprime, o_prime, &sin.h.perm, small_sigma, p.cap)?;
        (h, s * l_prime)
    };
    run.witness("h", &h, h_len);
    let mut hs = vec![(h.clone(), h_len)];
    for (i, gi) in sin.conjugators.iter().enumerate() {
        let (g, len) = if full {
            (gi.perm.clone(), gi.len)
        } else {
            let (g, s) = lift(aprime, o_prime, &gi.perm, &[], p.cap)?;
            (g, s * l_prime)
        };
        run.witness(&format!("g{}", i + 1), &g, len);
        hs.push((conjugate(&h, &g), h_len + 2 * len));
    }
    let x_expr = SetExpr::Setwise(
        Box::new(SetExpr::A.power(l_prime)),
        small_sigma.to_vec(),
    )
    .power(2)
    .pointwise(&[alpha_k]);
    let x = run.set(&x_expr)?;
    let h_elems: Vec<Permutation> = hs.iter().map(|(h, _)| h.clone()).collect();
    let mut seen: FxHashMap<Vec<Permutation>, &Permutation> = FxHashMap::default();
    for g in x.iter() {
        let t: Vec<Permutation> = h_elems.iter().map(|h| conjugate(h, g)).collect();
        if let Some(&g1) = seen.get(&t) {
            // g1^-1 g centralizes the transitive group and fixes alpha_k
            let u = g1.inverse().compose(g);
            run.stage("centralizer", "conjugation map not injective");
            run.witness("centralizing element", &u, 4 * l_prime);
            run.compare(
                "centralizing element off O'",
                Expr::Support(u.clone()),
                Relation::Le,
                num((n - o_prime.len()) as f64),
                true,
            )?;
            let small = run.certify_small(&Tracked::new(u.clone(), 4 * l_prime))?;
            return Ok(Branch::SmallSupportShortcut {
                source: "centralizer".into(),
                element: u,
                length: 4 * l_prime,
                small,
            });
        }
        seen.insert(t, g);
    }
    run.stage("centralizer", format!("conjugation map injective on {} elements", x.len()));
    run.compare(
        "conjugation map injective",
        Expr::ConjugateTuples(h_elems.clone(), x_expr.clone()),
        Relation::Eq,
        x_expr.clone().size(),
        true,
    )?;
    let big_n = 4 * l_prime + hs.iter().map(|(_, l)| *l).max().unwrap();
    let target = SetExpr::A.power(big_n).pointwise(small_sigma);
    for (i, (hi, _)) in hs.iter().enumerate() {
        run.subset(
            &format!("conjugates of h{i} in pointwise stabilizer"),
            SetExpr::ConjugatesOf(hi.clone(), Box::new(x_expr.clone())),
            target.clone(),
        )?;
    }
    let kp1 = hs.len() as f64;
    run.compare(
        "stabilizer power bound",
        pow(target.size(), num(kp1)),
        Relation::Ge,
        x_expr.size(),
        true,
    )?;
    let power = 2 * big_n + 1;
    let kf = k as u64;
    run.compare(
        "centralizer growth",
        SetExpr::A.power(power).size(),
        Relation::Ge,
        Expr::Prod(vec![
            div(
                pow(
                    Expr::Prod(vec![num(p.rho_prefix.powi(k as i32)), Expr::Factorial(kf)]),
                    num(1.0 / (2.0 * kp1)),
                ),
                num(nf),
            ),
            SetExpr::A.size(),
        ]),
        false,
    )?;
    let uru = run.uru_exponent();
    run.compare("growth exponent", SetExpr::A.power(power).size(), Relation::Ge, pow(SetExpr::A.size(), uru), false)?;
    run.growth(GrowthRoute::Centralizer, power)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub a_size: usize,
    /// Every element of `A_i` is a word of at most this length in S.
    pub length: u64,
    pub branch: String,
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundWitness {
    /// `A_i^power = G` with `A_i ⊆ S^length`.
    Saturation { length: u64, power: u64 },
    /// Every element is a product of at most `pieces` conjugates `τ c τ^-1`
    /// (plus `parity_letters` letters for odd elements), `c` a 3-cycle or
    /// a transposition.
    Conjugates {
        element: Permutation,
        element_length: u64,
        conjugator_depth: u64,
        pieces: u64,
        parity_letters: u64,
    },
}

impl BoundWitness {
    pub fn value(&self) -> u64 {
        match self {
            BoundWitness::Saturation { length, power } => length * power,
            BoundWitness::Conjugates {
                element_length,
                conjugator_depth,
                pieces,
                parity_letters,
                ..
            } => pieces * (2 * conjugator_depth + element_length) + parity_letters,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub version: u32,
    pub degree: usize,
    pub mode: Mode,
    pub seed: u64,
    /// The symmetrized generating set.
    pub s: Vec<Permutation>,
    pub group_order: BigUint,
    pub symmetric_group: bool,
    pub iterations: Vec<IterationRecord>,
    pub reports: Vec<GrowthReport>,
    pub witness: BoundWitness,
    /// Word-length bound on the diameter valid for this instance.
    pub bound: u64,
    /// `exp(K (ln n)^4 (ln ln n)^2)`, natural log.
    pub ln_asymptotic_bound: f64,
    pub exact_diameter: Option<usize>,
}

impl IterationReport {
    pub fn bound_holds(&self) -> Option<bool> {
        self.exact_diameter.map(|d| self.bound >= d as u64)
    }
}

/// Longest shortest conjugator, over all 3-cycles (`k = 3`) or
/// transpositions (`k = 2`), carrying the cycle of `c` onto them: BFS on
/// ordered k-tuples.
fn conjugator_depth(s: &GenSet, c: &Permutation) -> Result<u64> {
    let n = s.degree();
    let cyc = c.cycles().into_iter().find(|x| x.len() > 1).ok_or(Error::NotInGroup)?;
    let k = cyc.len();
    let size = n.pow(k as u32);
    let enc = |t: &[usize]| t.iter().fold(0, |acc, &x| acc * n + x);
    let mut dist = vec![u32::MAX; size];
    let start = enc(&cyc);
    dist[start] = 0;
    let mut queue = std::collections::VecDeque::from([cyc.clone()]);
    let gens = s.non_identity();
    while let Some(t) = queue.pop_front() {
        let d = dist[enc(&t)];
        for g in &gens {
            let u = g.map_tuple(&t);
            let i = enc(&u);
            if dist[i] == u32::MAX {
                dist[i] = d + 1;
                queue.push_back(u);
            }
        }
    }
    let mut worst = 0;
    let mut t = vec![0; k];
    for code in 0..size {
        let mut c = code;
        for slot in t.iter_mut().rev() {
            *slot = c % n;
            c /= n;
        }
        let mut distinct = t.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < k {
            continue;
        }
        let best = (0..k)
            .map(|r| {
                let rot: Vec<usize> = (0..k).map(|i| t[(i + r) % k]).collect();
                dist[enc(&rot)]
            })
            .min()
            .unwrap();
        if best == u32::MAX {
            return Err(Error::NotTransitive);
        }
        worst = worst.max(best);
    }
    Ok(worst as u64)
}

fn conjugates_bound(s: &GenSet, c: &Tracked, length: u64, sym: bool) -> Result<Option<BoundWitness>> {
    let n = s.degree();
    let supp = c.perm.support_size();
    if !(supp == 2 || supp == 3) || c.perm.cycle_type() == vec![2, 2] {
        return Ok(None);
    }
    let depth = conjugator_depth(s, &c.perm)?;
    let (pieces, parity_letters) = if supp == 3 {
        // at most n-2 3-cycles for an even element; odd ones need one odd letter first
        let odd_letter = s.elements().iter().any(|g| !g.is_even());
        ((n - 2) as u64, u64::from(sym && odd_letter))
    } else {
        ((n - 1) as u64, 0)
    };
    Ok(Some(BoundWitness::Conjugates {
        element: c.perm.clone(),
        element_length: c.len * length,
        conjugator_depth: depth,
        pieces,
        parity_letters,
    }))
}

/// Iterate the growth driver from `A_0 = S^m` (m least with `|S^m| ≥ n^2`),
/// squaring while growth is reported, until a run saturates or produces a
/// support-2/3 element. The result carries a word-length bound on
/// `diam Γ(⟨S⟩, S ∪ S^-1)` valid for this instance, compared against the
/// exact BFS diameter when the group fits under the cap.
pub fn molop_iterate(s: &GenSet, params: &GrowthParams) -> Result<IterationReport> {
    params.validate()?;
    let n = s.degree();
    if n < 5 {
        return Err(Error::Domain("the iteration needs n >= 5".into()));
    }
    let s = s.symmetrize();
    let gens = s.non_identity();
    let order = StabilizerChain::new(&gens, n).order();
    let sym_order = crate::group::factorial(n);
    let symmetric_group = order == sym_order;
    if !symmetric_group && order * 2u32 != sym_order {
        return Err(Error::hypothesis("<S> is neither Alt(n) nor Sym(n)"));
    }
    let order = StabilizerChain::new(&gens, n).order();
    let order_usize = order.to_usize();

    let unit = GenSet::from_set(n, s.elements().iter(), 1)?;
    let mut cur = unit.clone();
    let mut length = 1u64;
    while cur.len() < n * n && Some(cur.len()) != order_usize {
        let next = GenSet::from_set(n, sorted(&power_set(&unit, length as usize + 1, params.cap)?).iter(), 1)?;
        length += 1;
        if next.len() == cur.len() {
            break;
        }
        cur = next;
    }

    let mut iterations = Vec::new();
    let mut reports = Vec::new();
    let mut witness = None;
    let mut i = 0;
    while witness.is_none() {
        if Some(cur.len()) == order_usize {
            witness = Some(BoundWitness::Saturation { length, power: 1 });
            iterations.push(IterationRecord {
                index: i,
                a_size: cur.len(),
                length,
                branch: "saturated".into(),
                exponent: None,
            });
            break;
        }
        if i < params.max_iterations {
            let run_params = GrowthParams {
                seed: rng::derive(params.seed, i as u64),
                ..params.clone()
            };
            let report = jukuju_run(&cur, &run_params)?;
            let exponent = match &report.branch {
                Branch::Growth { exponent, .. } => Some(*exponent),
                _ => None,
            };
            iterations.push(IterationRecord {
                index: i,
                a_size: cur.len(),
                length,
                branch: report.branch.name().into(),
                exponent,
            });
            if let Branch::Growth {
                route: GrowthRoute::Saturated,
                ..
            } = report.branch
            {
                witness = Some(BoundWitness::Saturation { length, power: 2 });
            } else if let Some(c) = report.branch.small_element() {
                witness = conjugates_bound(&s, c, length, symmetric_group)?;
            }
            reports.push(report);
        } else {
            iterations.push(IterationRecord {
                index: i,
                a_size: cur.len(),
                length,
                branch: "squaring".into(),
                exponent: None,
            });
        }
        if witness.is_none() {
            cur = GenSet::from_set(n, sorted(&power_set(&cur, 2, params.cap)?).iter(), 1)?;
            length *= 2;
        }
        i += 1;
    }
    let witness = witness.expect("loop exits with a witness");
    let exact_diameter = match order_usize {
        Some(o) if o <= params.cap => Some(cayley_bfs(&s, params.cap)?.diameter),
        _ => None,
    };
    let ln_n = (n as f64).ln();
    Ok(IterationReport {
        version: REPORT_VERSION,
        degree: n,
        mode: params.mode,
        seed: params.seed,
        s: s.elements().to_vec(),
        group_order: order,
        symmetric_group,
        iterations,
        reports,
        bound: witness.value(),
        witness,
        ln_asymptotic_bound: params.k_diam * ln_n.powi(4) * ln_n.ln().powi(2),
        exact_diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;
    use rand::Rng;

    fn sym(n: usize) -> GenSet {
        GenSet::new(n, all_permutations(n)).unwrap()
    }

    fn random_set(n: usize, size: usize, seed: u64) -> GenSet {
        let all = all_permutations(n);
        let mut r = rng::seeded(seed);
        let mut pick: Vec<Permutation> = (0..size).map(|_| all[r.random_range(0..all.len())].clone()).collect();
        pick.push(Permutation::identity(n));
        GenSet::new(n, pick).unwrap().symmetrize()
    }

    #[test]
    fn whole_group_saturates() {
        let r = jukuju_run(&sym(7), &GrowthParams::default()).unwrap();
        match r.branch {
            Branch::Growth {
                route: GrowthRoute::Saturated,
                capped,
                exponent,
                ..
            } => {
                assert!(capped);
                assert_eq!(exponent, 1.0);
            }
            ref b => panic!("unexpected branch {b:?}"),
        }
        assert!(verify_report(&r, crate::DEFAULT_CAP).unwrap().ok());
    }

    #[test]
    fn preconditions() {
        let small = GenSet::parse("(1 2 3 4 5 6 7),(1 2)", None).unwrap().symmetrize();
        assert!(matches!(jukuju_run(&small, &GrowthParams::default()), Err(Error::Hypothesis(_))));
        let intrans = GenSet::new(7, all_permutations(6).iter().map(|p| p.extend(7)).collect())
            .unwrap()
            .symmetrize();
        assert!(matches!(jukuju_run(&intrans, &GrowthParams::default()), Err(Error::Hypothesis(_))));
        let strict = GrowthParams {
            mode: Mode::Strict,
            ..GrowthParams::default()
        };
        assert!(matches!(jukuju_run(&random_set(7, 300, 1), &strict), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn random_reports_verify() {
        let mut branches = FxHashSet::default();
        for seed in 0..6 {
            let a = random_set(7, 250, seed);
            let p = GrowthParams {
                seed,
                ..GrowthParams::default()
            };
            let r = jukuju_run(&a, &p).unwrap();
            assert!(r.outside_hypotheses);
            assert!(r.asserted_hold(), "{:#?}", r.checks);
            let v = verify_report(&r, p.cap).unwrap();
            assert!(v.ok(), "{:?}", v.failures);
            branches.insert(r.branch.name());
        }
        assert!(!branches.is_empty());
    }

    #[test]
    fn tampered_report_fails() {
        let a = random_set(7, 250, 3);
        let mut r = jukuju_run(&a, &GrowthParams::default()).unwrap();
        let c = r.checks.iter_mut().find(|c| c.asserted).unwrap();
        c.lhs += 1.0;
        assert!(!verify_report(&r, crate::DEFAULT_CAP).unwrap().ok());
    }

    #[test]
    fn deterministic() {
        let a = random_set(7, 250, 9);
        let p = GrowthParams {
            seed: 42,
            ..GrowthParams::default()
        };
        let x = serde_json::to_string(&jukuju_run(&a, &p).unwrap()).unwrap();
        let y = serde_json::to_string(&jukuju_run(&a, &p).unwrap()).unwrap();
        assert_eq!(x, y);
        let back: GrowthReport = serde_json::from_str(&x).unwrap();
        assert!(verify_report(&back, p.cap).unwrap().ok());
    }

    #[test]
    fn iteration_bounds() {
        let whole = molop_iterate(&sym(5), &GrowthParams::default()).unwrap();
        assert_eq!(whole.bound, 1);
        let s = GenSet::parse("(1 2),(1 2 3 4 5)", None).unwrap();
        let r = molop_iterate(&s, &GrowthParams::default()).unwrap();
        assert_eq!(r.bound_holds(), Some(true));
        assert_eq!(r.exact_diameter, Some(cayley_bfs(&s.symmetrize(), 1000).unwrap().diameter));
        let alt = GenSet::parse("(1 2 3),(1 2 3 4 5)", None).unwrap();
        assert_eq!(molop_iterate(&alt, &GrowthParams::default()).unwrap().bound_holds(), Some(true));
        let d10 = GenSet::parse("(1 2 3 4 5),(2 5)(3 4)", None).unwrap();
        assert!(matches!(molop_iterate(&d10, &GrowthParams::default()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn conjugator_depths() {
        let s = GenSet::parse("(1 2),(1 2 3 4 5)", None).unwrap().symmetrize();
        let t = Permutation::cycles1(5, &[&[1, 2]]);
        let d = conjugator_depth(&s, &t).unwrap();
        assert!(d >= 1);
        let whole = sym(5);
        assert_eq!(conjugator_depth(&whole, &t).unwrap(), 1);
        let c3 = Permutation::cycles1(5, &[&[1, 2, 3]]);
        assert_eq!(conjugator_depth(&whole, &c3).unwrap(), 1);
    }
}
