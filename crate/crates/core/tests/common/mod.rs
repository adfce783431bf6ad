//! Independent reference arithmetic on raw image vectors. Nothing here calls
//! into the library beyond converting to and from `Permutation`.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use permgrowth::Permutation;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Img = Vec<u32>;

pub fn img(p: &Permutation) -> Img {
    p.images().to_vec()
}

pub fn perm(v: &[u32]) -> Permutation {
    Permutation::from_images(v.to_vec()).unwrap()
}

pub fn id(n: usize) -> Img {
    (0..n as u32).collect()
}

/// Right action: x^(pq) = (x^p)^q.
pub fn mul(p: &[u32], q: &[u32]) -> Img {
    p.iter().map(|&x| q[x as usize]).collect()
}

pub fn inv(p: &[u32]) -> Img {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

/// g^-1 h^-1 g h
pub fn comm(g: &[u32], h: &[u32]) -> Img {
    mul(&mul(&mul(&inv(g), &inv(h)), g), h)
}

/// g h g^-1
pub fn conj(h: &[u32], g: &[u32]) -> Img {
    mul(&mul(g, h), &inv(g))
}

pub fn support(p: &[u32]) -> usize {
    p.iter().enumerate().filter(|&(i, &x)| i as u32 != x).count()
}

pub fn cycle_type(p: &[u32]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len > 1 {
            out.push(len);
        }
    }
    out.sort_unstable();
    out
}

pub fn is_even(p: &[u32]) -> bool {
    cycle_type(p).iter().map(|l| l - 1).sum::<usize>() % 2 == 0
}

pub fn inversions(p: &[u32]) -> usize {
    let mut c = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                c += 1;
            }
        }
    }
    c
}

/// Subgroup generated by `gens`, by closure under right multiplication.
pub fn closure(gens: &[Img], n: usize) -> HashSet<Img> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id(n));
    queue.push_back(id(n));
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = mul(&x, g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Word-length distances from e in the Cayley graph of `gens ∪ gens^-1`.
pub fn distances(gens: &[Img], n: usize) -> HashMap<Img, usize> {
    let mut alphabet: Vec<Img> = gens.to_vec();
    alphabet.extend(gens.iter().map(|g| inv(g)));
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(id(n), 0);
    queue.push_back(id(n));
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        for g in &alphabet {
            let y = mul(&x, g);
            if !dist.contains_key(&y) {
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

pub fn diameter(gens: &[Img], n: usize) -> usize {
    distances(gens, n).into_values().max().unwrap_or(0)
}

pub fn orbit_count(gens: &[Img], n: usize) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for g in gens {
        for x in 0..n {
            let (a, b) = (find(&mut parent, x), find(&mut parent, g[x] as usize));
            parent[a] = b;
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

pub fn random_img<R: Rng>(n: usize, r: &mut R) -> Img {
    let mut v = id(n);
    v.shuffle(r);
    v
}

pub fn random_even_img<R: Rng>(n: usize, r: &mut R) -> Img {
    let mut v = random_img(n, r);
    if !is_even(&v) {
        v.swap(0, 1);
    }
    v
}

/// Random even element moving exactly `s` points (`s ≥ 3`).
pub fn planted<R: Rng>(n: usize, s: usize, r: &mut R) -> Img {
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(r);
    let pts = &pts[..s];
    // An s-cycle is even for odd s; for even s use a 2-cycle and an (s-2)-cycle.
    let cycles: Vec<&[usize]> = if s % 2 == 1 { vec![pts] } else { vec![&pts[..2], &pts[2..]] };
    let mut v = id(n);
    for c in cycles {
        for i in 0..c.len() {
            v[c[i]] = c[(i + 1) % c.len()] as u32;
        }
    }
    debug_assert!(is_even(&v) && support(&v) == s);
    v
}
