//! Permutations, their text formats, generating sets and exact product sets.
//!
//! Composition is left to right: `p.compose(&q)` maps `x` to `q[p[x]]`.

use std::borrow::Borrow;
use std::fmt;
use std::ops::Mul;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A set of permutations with fast hashing.
pub type PermSet = FxHashSet<Permutation>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Borrow<[u32]> for Permutation {
    fn borrow(&self) -> &[u32] {
        &self.images
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// Build from a 0-indexed image array, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::Parse(format!("not a bijection: {images:?}")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Trusted constructor for internal callers that already hold a bijection.
    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Permutation::from_images(images.clone()).is_ok());
        Permutation { images }
    }

    /// Build from 0-indexed cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x >= n {
                    return Err(Error::Parse(format!("point {} exceeds degree {n}", x + 1)));
                }
                if used[x] {
                    return Err(Error::Parse(format!("point {} repeated in cycles", x + 1)));
                }
                used[x] = true;
                images[x] = c[(i + 1) % c.len()] as u32;
            }
        }
        Ok(Permutation { images })
    }

    /// Shorthand for tests and examples: 1-indexed cycles.
    pub fn cycles1(n: usize, cycles: &[&[usize]]) -> Self {
        let cs: Vec<Vec<usize>> = cycles
            .iter()
            .map(|c| c.iter().map(|&x| x - 1).collect())
            .collect();
        Permutation::from_cycles(n, &cs).expect("valid cycles")
    }

    /// Parse cycle notation `(1 2 3)(4 5)` or image notation `[2,3,1]`.
    /// With `degree = None` a cycle string gets the largest point as degree.
    pub fn parse(s: &str, degree: Option<usize>) -> Result<Self> {
        let s = s.trim();
        let p = if s.starts_with('[') {
            let inner = s
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("unterminated image array: {s}")))?;
            let mut images = Vec::new();
            for tok in inner.split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad point '{tok}'")))?;
                if v == 0 {
                    return Err(Error::Parse("points are 1-indexed".into()));
                }
                images.push((v - 1) as u32);
            }
            let p = Permutation::from_images(images)?;
            match degree {
                Some(d) if d != p.degree() => return Err(Error::DegreeMismatch(d, p.degree())),
                _ => p,
            }
        } else {
            let cycles = parse_cycles(s)?;
            let max = cycles.iter().flatten().map(|&x| x + 1).max().unwrap_or(0);
            let n = match degree {
                Some(d) if d < max => {
                    return Err(Error::Parse(format!("point {max} exceeds degree {d}")))
                }
                Some(d) => d,
                None => max,
            };
            Permutation::from_cycles(n, &cycles)?
        };
        Ok(p)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `x^(self other) = (x^self)^other`. Panics on degree mismatch.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Permutation {
            images: self.images.iter().map(|&x| other.images[x as usize]).collect(),
        }
    }

    pub fn try_compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.compose(other))
    }

    /// Compose into a caller-owned buffer (no allocation).
    #[inline]
    pub fn compose_into(&self, other: &Permutation, out: &mut Vec<u32>) {
        out.clear();
        out.extend(self.images.iter().map(|&x| other.images[x as usize]));
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Permutation::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            sq = sq.compose(&sq);
            e >>= 1;
        }
        acc
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.degree()).filter(|&i| self.images[i] as usize != i).collect()
    }

    pub fn support_size(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &x)| *i as u32 != x).count()
    }

    /// Nontrivial cycles, each starting at its least point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.image(start) == start {
                continue;
            }
            let mut c = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = self.image(x);
            }
            out.push(c);
        }
        out
    }

    /// Sorted lengths of nontrivial cycles.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable();
        t
    }

    pub fn parity(&self) -> Parity {
        // Each k-cycle contributes k - 1 transpositions.
        let s: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if s % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    /// Element order (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        self.cycle_type().into_iter().fold(1u64, |acc, l| {
            let l = l as u64;
            acc / gcd(acc, l) * l
        })
    }

    /// Restrict to an invariant point set; the result acts on `0..pts.len()`
    /// with point `pts[i]` relabelled as `i`.
    pub fn restrict(&self, pts: &[usize]) -> Result<Permutation> {
        let mut pos = vec![u32::MAX; self.degree()];
        for (i, &p) in pts.iter().enumerate() {
            pos[p] = i as u32;
        }
        let mut images = Vec::with_capacity(pts.len());
        for &p in pts {
            let q = pos[self.image(p)];
            if q == u32::MAX {
                return Err(Error::NotInvariant);
            }
            images.push(q);
        }
        Ok(Permutation { images })
    }

    /// Embed into a larger degree, fixing the new points.
    pub fn extend(&self, n: usize) -> Permutation {
        assert!(n >= self.degree());
        let mut images = self.images.clone();
        images.extend(self.degree() as u32..n as u32);
        Permutation { images }
    }

    /// Image of a point tuple.
    pub fn map_tuple(&self, t: &[usize]) -> Vec<usize> {
        t.iter().map(|&x| self.image(x)).collect()
    }

    pub fn to_cycle_string(&self) -> String {
        let cs = self.cycles();
        if cs.is_empty() {
            return "()".into();
        }
        let mut s = String::new();
        for c in cs {
            s.push('(');
            let parts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            s.push_str(&parts.join(" "));
            s.push(')');
        }
        s
    }

    pub fn to_image_string(&self) -> String {
        let parts: Vec<String> = self.images.iter().map(|x| (x + 1).to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn parse_cycles(s: &str) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    if rest.is_empty() {
        return Err(Error::Parse("empty permutation".into()));
    }
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in '{s}'")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unterminated cycle in '{s}'")))?;
        let mut cycle = Vec::new();
        for tok in body[..close].split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad point '{tok}'")))?;
            if v == 0 {
                return Err(Error::Parse("points are 1-indexed".into()));
            }
            cycle.push(v - 1);
        }
        if cycle.len() > 1 {
            out.push(cycle);
        }
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

/// Split a generator list at top-level commas or semicolons, e.g.
/// `"(1 2),(1 2 3 4)"` or `"[2,1,3];[2,3,1]"`.
pub fn split_gen_list(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.retain(|t| !t.is_empty());
    out
}

/// Parse several generators and bring them to one degree: the explicit
/// `degree` if given, else the largest point mentioned.
pub fn parse_gens(items: &[&str], degree: Option<usize>) -> Result<Vec<Permutation>> {
    if items.is_empty() {
        return Err(Error::Parse("empty generator list".into()));
    }
    let parsed: Vec<Permutation> = items
        .iter()
        .map(|s| Permutation::parse(s, None))
        .collect::<Result<_>>()?;
    let max = parsed.iter().map(Permutation::degree).max().unwrap_or(0);
    let n = degree.unwrap_or(max);
    if n < max {
        return Err(Error::Parse(format!("generator degree {max} exceeds {n}")));
    }
    if n == 0 {
        return Err(Error::Parse("degree must be positive".into()));
    }
    // Image arrays fix their degree; only cycle strings may be extended.
    for (s, p) in items.iter().zip(&parsed) {
        if s.trim_start().starts_with('[') && p.degree() != n {
            return Err(Error::DegreeMismatch(p.degree(), n));
        }
    }
    Ok(parsed.into_iter().map(|p| p.extend(n)).collect())
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl Mul for &Permutation {
    type Output = Permutation;
    fn mul(self, rhs: &Permutation) -> Permutation {
        self.compose(rhs)
    }
}

// Image arrays keep the degree, so they are the serialized form.
impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_image_string())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Permutation::parse(&s, None).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for point-valued fields: points are 0-based in memory and
/// 1-based in every serialized form, matching the text formats.
/// Use as `#[serde(with = "crate::perm::one_based")]`.
pub mod one_based {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    pub trait Points: Sized {
        fn up(&self) -> Self;
        fn down(self) -> Option<Self>;
    }

    impl Points for usize {
        fn up(&self) -> Self {
            self + 1
        }
        fn down(self) -> Option<Self> {
            self.checked_sub(1)
        }
    }

    impl<T: Points> Points for Vec<T> {
        fn up(&self) -> Self {
            self.iter().map(Points::up).collect()
        }
        fn down(self) -> Option<Self> {
            self.into_iter().map(Points::down).collect()
        }
    }

    pub fn serialize<T: Points + Serialize, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        v.up().serialize(s)
    }

    pub fn deserialize<'de, T: Points + Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        T::deserialize(d)?
            .down()
            .ok_or_else(|| de::Error::custom("points are numbered from 1"))
    }
}

/// `g h g^-1`.
pub fn conjugate(h: &Permutation, g: &Permutation) -> Permutation {
    g.compose(h).compose(&g.inverse())
}

/// `g^-1 h^-1 g h`.
pub fn commutator(g: &Permutation, h: &Permutation) -> Permutation {
    g.inverse().compose(&h.inverse()).compose(g).compose(h)
}

/// A permutation with the length of a word over the original generators that
/// produces it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tracked {
    pub perm: Permutation,
    pub len: u64,
}

impl Tracked {
    pub fn new(perm: Permutation, len: u64) -> Self {
        Tracked { perm, len }
    }

    pub fn identity(n: usize) -> Self {
        Tracked::new(Permutation::identity(n), 0)
    }

    pub fn mul(&self, other: &Tracked) -> Tracked {
        Tracked::new(self.perm.compose(&other.perm), self.len + other.len)
    }

    pub fn inverse(&self) -> Tracked {
        Tracked::new(self.perm.inverse(), self.len)
    }

    pub fn conjugate(&self, g: &Tracked) -> Tracked {
        Tracked::new(conjugate(&self.perm, &g.perm), self.len + 2 * g.len)
    }

    pub fn commutator(&self, h: &Tracked) -> Tracked {
        Tracked::new(commutator(&self.perm, &h.perm), 2 * (self.len + h.len))
    }
}

/// One letter of a word: generator index, possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(gen: usize) -> Self {
        Word(vec![Letter {
            gen: gen as u32,
            inv: false,
        }])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(
            self.0
                .iter()
                .rev()
                .map(|l| Letter {
                    gen: l.gen,
                    inv: !l.inv,
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Cancel adjacent `x x^-1` pairs.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            match out.last() {
                Some(&t) if t.gen == l.gen && t.inv != l.inv => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.inverse().concat(&b.inverse()).concat(a).concat(b).reduce()
    }

    pub fn conjugate(h: &Word, g: &Word) -> Word {
        g.concat(h).concat(&g.inverse()).reduce()
    }

    pub fn evaluate(&self, gens: &[Permutation], n: usize) -> Permutation {
        let invs: Vec<Permutation> = gens.iter().map(Permutation::inverse).collect();
        let mut acc = Permutation::identity(n);
        for l in &self.0 {
            let g = if l.inv {
                &invs[l.gen as usize]
            } else {
                &gens[l.gen as usize]
            };
            acc = acc.compose(g);
        }
        acc
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                if l.inv {
                    format!("g{}^-1", l.gen + 1)
                } else {
                    format!("g{}", l.gen + 1)
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// A deduplicated set of permutations of one degree, each carrying the length
/// of its defining word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSet {
    degree: usize,
    elements: Vec<Permutation>,
    lengths: Vec<u64>,
    symmetric: bool,
    has_identity: bool,
}

impl GenSet {
    /// Generators as given; every non-identity element has word length 1.
    pub fn new(degree: usize, gens: Vec<Permutation>) -> Result<Self> {
        let tracked = gens
            .into_iter()
            .map(|p| {
                let len = u64::from(!p.is_identity());
                Tracked::new(p, len)
            })
            .collect();
        GenSet::from_tracked(degree, tracked)
    }

    /// Keep the shortest recorded length for duplicate elements.
    pub fn from_tracked(degree: usize, items: Vec<Tracked>) -> Result<Self> {
        let mut best: FxHashMap<Permutation, u64> = FxHashMap::default();
        for t in items {
            if t.perm.degree() != degree {
                return Err(Error::DegreeMismatch(degree, t.perm.degree()));
            }
            let len = if t.perm.is_identity() { 0 } else { t.len };
            best.entry(t.perm)
                .and_modify(|l| *l = (*l).min(len))
                .or_insert(len);
        }
        let mut pairs: Vec<(Permutation, u64)> = best.into_iter().collect();
        pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let (elements, lengths): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let mut s = GenSet {
            degree,
            elements,
            lengths,
            symmetric: false,
            has_identity: false,
        };
        s.refresh_flags();
        Ok(s)
    }

    /// A set of permutations, each with length `len`.
    pub fn from_set<'a>(
        degree: usize,
        set: impl IntoIterator<Item = &'a Permutation>,
        len: u64,
    ) -> Result<Self> {
        GenSet::from_tracked(
            degree,
            set.into_iter().map(|p| Tracked::new(p.clone(), len)).collect(),
        )
    }

    pub fn parse(s: &str, degree: Option<usize>) -> Result<Self> {
        let items = split_gen_list(s);
        let gens = parse_gens(&items, degree)?;
        let n = gens[0].degree();
        GenSet::new(n, gens)
    }

    fn refresh_flags(&mut self) {
        self.has_identity = self.elements.iter().any(Permutation::is_identity);
        self.symmetric = self.elements.iter().all(|a| self.contains(&a.inverse()));
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_identity(&self) -> bool {
        self.has_identity
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    pub fn word_length(&self, p: &Permutation) -> Option<u64> {
        self.elements.binary_search(p).ok().map(|i| self.lengths[i])
    }

    pub fn max_word_length(&self) -> u64 {
        self.lengths.iter().copied().max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.elements.iter()
    }

    pub fn tracked(&self) -> impl Iterator<Item = Tracked> + '_ {
        self.elements
            .iter()
            .zip(&self.lengths)
            .map(|(p, &l)| Tracked::new(p.clone(), l))
    }

    /// Non-identity elements.
    pub fn non_identity(&self) -> Vec<Permutation> {
        self.elements.iter().filter(|p| !p.is_identity()).cloned().collect()
    }

    pub fn to_set(&self) -> PermSet {
        self.elements.iter().cloned().collect()
    }

    /// `A ∪ A^-1 ∪ {e}` with lengths preserved.
    pub fn symmetrize(&self) -> GenSet {
        if self.symmetric && self.has_identity {
            return self.clone();
        }
        let mut items: Vec<Tracked> = self.tracked().collect();
        items.extend(self.tracked().map(|t| t.inverse()).collect::<Vec<_>>());
        items.push(Tracked::identity(self.degree));
        GenSet::from_tracked(self.degree, items).expect("degrees agree")
    }

    /// Union, keeping shortest lengths.
    pub fn union(&self, other: &GenSet) -> Result<GenSet> {
        let mut items: Vec<Tracked> = self.tracked().collect();
        items.extend(other.tracked());
        GenSet::from_tracked(self.degree, items)
    }
}

/// Sorted vector view of a set, for deterministic output.
pub fn sorted(set: &PermSet) -> Vec<Permutation> {
    let mut v: Vec<Permutation> = set.iter().cloned().collect();
    v.sort_unstable();
    v
}

fn check_degrees(a: &[Permutation], b: &[Permutation]) -> Result<()> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        if x.degree() != y.degree() {
            return Err(Error::DegreeMismatch(x.degree(), y.degree()));
        }
    }
    Ok(())
}

/// `{ab : a ∈ A, b ∈ B}`.
pub fn product_set(a: &[Permutation], b: &[Permutation], cap: usize) -> Result<PermSet> {
    check_degrees(a, b)?;
    let mut out = PermSet::default();
    let mut buf = Vec::new();
    for x in a {
        for y in b {
            x.compose_into(y, &mut buf);
            if !out.contains(buf.as_slice()) {
                if out.len() >= cap {
                    return Err(Error::cap("product set", cap, out.len()));
                }
                out.insert(Permutation::from_images_unchecked(buf.clone()));
            }
        }
    }
    Ok(out)
}

/// `A B^-1`.
pub fn product_inverse_set(a: &[Permutation], b: &[Permutation], cap: usize) -> Result<PermSet> {
    let binv: Vec<Permutation> = b.iter().map(Permutation::inverse).collect();
    product_set(a, &binv, cap)
}

/// `A^-1 B`.
pub fn inverse_product_set(a: &[Permutation], b: &[Permutation], cap: usize) -> Result<PermSet> {
    product_set(&inverse_set(a), b, cap)
}

pub fn inverse_set(a: &[Permutation]) -> Vec<Permutation> {
    a.iter().map(Permutation::inverse).collect()
}

/// `A^k` as an exact set. Stops early once the sequence of powers is
/// stationary (which happens as soon as two consecutive sizes agree when
/// `e ∈ A`).
pub fn power_set(a: &GenSet, k: usize, cap: usize) -> Result<PermSet> {
    let n = a.degree();
    if k == 0 {
        return Ok(std::iter::once(Permutation::identity(n)).collect());
    }
    let gens = a.elements();
    let mut cur: PermSet = gens.iter().cloned().collect();
    if cur.len() > cap {
        return Err(Error::cap("power set", cap, cur.len()));
    }
    let mut buf = Vec::new();
    for _ in 1..k {
        let mut next = PermSet::default();
        next.reserve(cur.len());
        for x in &cur {
            for y in gens {
                x.compose_into(y, &mut buf);
                if !next.contains(buf.as_slice()) {
                    if next.len() >= cap {
                        return Err(Error::cap("power set", cap, next.len()));
                    }
                    next.insert(Permutation::from_images_unchecked(buf.clone()));
                }
            }
        }
        let stable = a.has_identity() && next.len() == cur.len();
        cur = next;
        if stable {
            break;
        }
    }
    Ok(cur)
}

/// Power set with tracked lengths: the length of an element of `A^k` is the
/// sum of lengths along the first product found (breadth-first over `j`).
pub fn power_set_tracked(a: &GenSet, k: usize, cap: usize) -> Result<GenSet> {
    let n = a.degree();
    let mut cur: FxHashMap<Permutation, u64> = a.tracked().map(|t| (t.perm, t.len)).collect();
    if k == 0 {
        return GenSet::from_tracked(n, vec![Tracked::identity(n)]);
    }
    let mut buf = Vec::new();
    for _ in 1..k {
        let mut next: FxHashMap<Permutation, u64> = FxHashMap::default();
        for (x, &lx) in &cur {
            for t in a.tracked() {
                x.compose_into(&t.perm, &mut buf);
                let l = lx + t.len;
                if let Some(v) = next.get_mut(buf.as_slice()) {
                    *v = (*v).min(l);
                } else {
                    if next.len() >= cap {
                        return Err(Error::cap("power set", cap, next.len()));
                    }
                    next.insert(Permutation::from_images_unchecked(buf.clone()), l);
                }
            }
        }
        let stable = a.has_identity() && next.len() == cur.len();
        cur = next;
        if stable {
            break;
        }
    }
    GenSet::from_tracked(n, cur.into_iter().map(|(p, l)| Tracked::new(p, l)).collect())
}

/// Every element of `Sym(n)` (lexicographic order); only for small n.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..n as u32).collect();
    loop {
        out.push(Permutation::from_images_unchecked(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Every element of `Alt(n)`.
pub fn all_even_permutations(n: usize) -> Vec<Permutation> {
    all_permutations(n).into_iter().filter(Permutation::is_even).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: usize, cs: &[&[usize]]) -> Permutation {
        Permutation::cycles1(n, cs)
    }

    #[test]
    fn right_action_convention() {
        // x^(pq) = (x^p)^q
        let p = c(3, &[&[1, 2]]);
        let q = c(3, &[&[2, 3]]);
        assert_eq!(p.compose(&q), c(3, &[&[1, 3, 2]]));
        assert_eq!(p.compose(&p), Permutation::identity(3));
        assert_eq!(p.compose(&Permutation::identity(3)), p);
    }

    #[test]
    fn commutator_and_conjugate() {
        let g = c(4, &[&[1, 2, 3]]);
        let h = c(4, &[&[2, 3, 4]]);
        assert_eq!(commutator(&g, &h), c(4, &[&[1, 4], &[2, 3]]));
        assert!(commutator(&g, &g).is_identity());
        assert_eq!(conjugate(&c(3, &[&[1, 2]]), &c(3, &[&[1, 3]])), c(3, &[&[2, 3]]));
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let a = Permutation::identity(3);
        let b = Permutation::identity(4);
        assert_eq!(a.try_compose(&b), Err(Error::DegreeMismatch(3, 4)));
    }

    #[test]
    fn support_cycles_parity() {
        let e = Permutation::identity(5);
        assert!(e.support().is_empty());
        assert_eq!(e.parity(), Parity::Even);
        let p = c(4, &[&[1, 2], &[3, 4]]);
        assert_eq!(p.support(), vec![0, 1, 2, 3]);
        assert_eq!(p.cycle_type(), vec![2, 2]);
        assert!(p.is_even());
        let q = c(5, &[&[1, 2, 3, 4, 5]]);
        assert_eq!(q.support_size(), 5);
        assert!(q.is_even());
        assert!(!c(3, &[&[1, 2]]).is_even());
    }

    #[test]
    fn text_round_trip() {
        let p = Permutation::parse("(1 2 3)(4 5)", None).unwrap();
        assert_eq!(p.to_image_string(), "[2,3,1,5,4]");
        assert_eq!(Permutation::parse("[2,3,1,5,4]", None).unwrap(), p);
        assert_eq!(p.to_string(), "(1 2 3)(4 5)");
        assert_eq!(Permutation::parse("()", Some(3)).unwrap(), Permutation::identity(3));
        assert_eq!(Permutation::identity(4).to_string(), "()");
        assert!(Permutation::parse("(1 2", None).is_err());
        assert!(Permutation::parse("[1,1]", None).is_err());
        assert!(Permutation::parse("(0 1)", None).is_err());
        assert!(Permutation::parse("(1 2)(2 3)", None).is_err());
        let json = serde_json::to_string(&p.extend(7)).unwrap();
        assert_eq!(json, "\"[2,3,1,5,4,6,7]\"");
        let back: Permutation = serde_json::from_str(&json).unwrap();
        assert_eq!(back.degree(), 7);
    }

    #[test]
    fn gen_list_parsing() {
        assert_eq!(split_gen_list("(1 2),(1 2 3 4)"), vec!["(1 2)", "(1 2 3 4)"]);
        assert_eq!(split_gen_list("[2,1,3]; [2,3,1]"), vec!["[2,1,3]", "[2,3,1]"]);
        let a = GenSet::parse("(1 2),(1 2 3 4)", None).unwrap();
        assert_eq!(a.degree(), 4);
        assert_eq!(a.len(), 2);
        assert!(GenSet::parse("", None).is_err());
        assert!(GenSet::parse("[2,1],(1 2 3)", None).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let a = GenSet::new(3, vec![c(3, &[&[1, 2, 3]])]).unwrap();
        let s = a.symmetrize();
        assert_eq!(s.len(), 3);
        assert!(s.contains(&c(3, &[&[1, 3, 2]])));
        assert!(s.is_symmetric() && s.has_identity());
        assert_eq!(s.word_length(&Permutation::identity(3)), Some(0));
        assert_eq!(s.word_length(&c(3, &[&[1, 3, 2]])), Some(1));
        assert_eq!(s.symmetrize(), s);
        let empty = GenSet::new(3, vec![]).unwrap();
        let se = empty.symmetrize();
        assert_eq!(se.elements(), &[Permutation::identity(3)]);
    }

    #[test]
    fn product_and_power_sets() {
        let a = vec![c(3, &[&[1, 2]])];
        let b = vec![c(3, &[&[2, 3]])];
        let p = product_set(&a, &b, 100).unwrap();
        assert_eq!(sorted(&p), vec![c(3, &[&[1, 3, 2]])]);

        let z = GenSet::new(2, vec![Permutation::identity(2), c(2, &[&[1, 2]])]).unwrap();
        assert_eq!(power_set(&z, 5, 100).unwrap().len(), 2);

        let s4 = GenSet::new(4, vec![c(4, &[&[1, 2]]), c(4, &[&[1, 2, 3, 4]])])
            .unwrap()
            .symmetrize();
        assert_eq!(power_set(&s4, 20, 100).unwrap().len(), 24);
        match power_set(&s4, 20, 10) {
            Err(Error::CapExceeded { partial, .. }) => assert!(partial <= 10),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn tracked_power_lengths() {
        let s4 = GenSet::new(4, vec![c(4, &[&[1, 2]]), c(4, &[&[1, 2, 3, 4]])])
            .unwrap()
            .symmetrize();
        let p = power_set_tracked(&s4, 3, 1000).unwrap();
        assert!(p.lengths().iter().all(|&l| l <= 3));
        assert_eq!(p.word_length(&Permutation::identity(4)), Some(0));
    }

    #[test]
    fn words_evaluate() {
        let gens = vec![c(3, &[&[1, 2]]), c(3, &[&[1, 2, 3]])];
        let w = Word::letter(0).concat(&Word::letter(1).inverse());
        assert_eq!(w.evaluate(&gens, 3), gens[0].compose(&gens[1].inverse()));
        assert!(w.concat(&w.inverse()).reduce().is_empty());
        assert_eq!(w.to_string(), "g1*g2^-1");
    }

    #[test]
    fn enumerations() {
        assert_eq!(all_permutations(4).len(), 24);
        assert_eq!(all_even_permutations(5).len(), 60);
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n as u32).collect::<Vec<u32>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(v).unwrap())
    }

    fn pair(max_n: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
        (1..=max_n).prop_flat_map(|n| (perm_strategy(n), perm_strategy(n)))
    }

    proptest! {
        #[test]
        fn compose_matches_pointwise((p, q) in pair(10)) {
            let r = p.compose(&q);
            for x in 0..p.degree() {
                prop_assert_eq!(r.image(x), q.image(p.image(x)));
            }
        }

        #[test]
        fn inverse_cancels(p in (1usize..12).prop_flat_map(perm_strategy)) {
            prop_assert!(p.compose(&p.inverse()).is_identity());
            prop_assert_eq!(Permutation::parse(&p.to_cycle_string(), Some(p.degree())).unwrap(), p.clone());
            prop_assert_eq!(Permutation::parse(&p.to_image_string(), None).unwrap(), p);
        }

        #[test]
        fn conjugated_commutator_support((g, h) in pair(10)) {
            let hg = conjugate(&g, &h);
            let c = commutator(&g, &hg);
            let inter = g.support().iter().filter(|&&x| hg.image(x) != x).count();
            prop_assert!(c.support_size() <= 3 * inter);
        }

        #[test]
        fn powers_grow_until_stable(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(3..=5);
            let mut gens = Vec::new();
            for _ in 0..2 {
                let mut v: Vec<u32> = (0..n as u32).collect();
                for i in (1..n).rev() {
                    v.swap(i, rng.random_range(0..=i));
                }
                gens.push(Permutation::from_images(v).unwrap());
            }
            let a = GenSet::new(n, gens).unwrap().symmetrize();
            let mut prev = 0;
            let mut stable = false;
            for j in 1..12 {
                let s = power_set(&a, j, 1_000).unwrap().len();
                prop_assert!(s >= prev);
                if stable { prop_assert_eq!(s, prev); }
                if s == prev { stable = true; }
                prev = s;
            }
        }
    }
}
