//! Fixtures shared by the benchmarks under `benches/`.

use permgrowth::{GenSet, Permutation};

/// `{(1 2), (1 2 … n)}`.
pub fn sym_pair(n: usize) -> GenSet {
    let cyc: Vec<usize> = (1..=n).collect();
    GenSet::new(n, vec![Permutation::cycles1(n, &[&[1, 2]]), Permutation::cycles1(n, &[&cyc])]).unwrap()
}

/// A fixed pseudo-random permutation (xorshift-driven Fisher–Yates).
pub fn scrambled(n: usize, mut state: u64) -> Permutation {
    let mut v: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        v.swap(i, (state % (i as u64 + 1)) as usize);
    }
    Permutation::from_images(v).unwrap()
}
