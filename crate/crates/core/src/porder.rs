//! Partial orders on q-ary sub-channel indices.
//!
//! Index `i = sum_k i_k q^k` is handled through its digits `i_k`. Two
//! operators never decrease reliability:
//!
//! * addition at position `k` raises `i_k` by one (identity when `i_k = q-1`);
//! * left-swap at `k1 < k2` exchanges `i_k1` and `i_k2` when `i_k1 > i_k2`,
//!   moving the larger digit to the more significant position.
//!
//! `j` dominates `i` when `j` is reachable from `i` by a finite sequence of
//! these operators. Every non-identity application strictly increases the
//! index value, which makes the relation antisymmetric and lets searches
//! prune anything above the target.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Upper bound on `q^m` for materializing pair sets.
pub const PAIR_GUARD: usize = 1 << 16;

/// Index together with its base-q digits, least significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QaryIndex {
    q: usize,
    digits: Vec<u8>,
    value: usize,
}

impl QaryIndex {
    pub fn new(value: usize, q: usize, m: usize) -> Result<Self> {
        let n = checked_len(q, m)?;
        if value >= n {
            return Err(Error::OutOfRange { index: value, limit: n });
        }
        let mut digits = Vec::with_capacity(m);
        let mut v = value;
        for _ in 0..m {
            digits.push((v % q) as u8);
            v /= q;
        }
        Ok(QaryIndex { q, digits, value })
    }

    /// Digits given least significant first.
    pub fn from_digits(digits: &[u8], q: usize) -> Result<Self> {
        let mut value = 0usize;
        for &d in digits.iter().rev() {
            if d as usize >= q {
                return Err(Error::OutOfRange { index: d as usize, limit: q });
            }
            value = value * q + d as usize;
        }
        Ok(QaryIndex { q, digits: digits.to_vec(), value })
    }

    #[inline]
    pub fn value(&self) -> usize {
        self.value
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.digits.len()
    }

    /// Digits, least significant first (`digits()[k]` multiplies `q^k`).
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit(&self, k: usize) -> u8 {
        self.digits[k]
    }

    /// Digits most significant first, as written `(i_{m-1}, .., i_0)`.
    pub fn msb_first(&self) -> Vec<u8> {
        self.digits.iter().rev().copied().collect()
    }
}

fn checked_len(q: usize, m: usize) -> Result<usize> {
    if q < 2 {
        return Err(Error::Config(format!("alphabet size q = {q} must be at least 2")));
    }
    (q as u64)
        .checked_pow(m as u32)
        .filter(|&n| n <= u32::MAX as u64)
        .map(|n| n as usize)
        .ok_or(Error::SizeGuard { size: usize::MAX, limit: u32::MAX as usize })
}

pub fn addition_op(i: &QaryIndex, k: usize) -> Result<QaryIndex> {
    if k >= i.m() {
        return Err(Error::OutOfRange { index: k, limit: i.m() });
    }
    let mut out = i.clone();
    if (i.digits[k] as usize) < i.q - 1 {
        out.digits[k] += 1;
        out.value += i.q.pow(k as u32);
    }
    Ok(out)
}

pub fn left_swap_op(i: &QaryIndex, k1: usize, k2: usize) -> Result<QaryIndex> {
    if k1 >= k2 {
        return Err(Error::Domain(format!("left-swap needs k1 < k2, got ({k1}, {k2})")));
    }
    if k2 >= i.m() {
        return Err(Error::OutOfRange { index: k2, limit: i.m() });
    }
    if i.digits[k1] <= i.digits[k2] {
        return Ok(i.clone());
    }
    let mut digits = i.digits.clone();
    digits.swap(k1, k2);
    QaryIndex::from_digits(&digits, i.q)
}

/// Zero-extends `i` from length `q^m` to `q^{m+1}`; the value is unchanged.
pub fn quasi_nested_embed(i: usize, q: usize, m: usize) -> Result<QaryIndex> {
    let idx = QaryIndex::new(i, q, m)?;
    let mut digits = idx.digits;
    digits.push(0);
    QaryIndex::from_digits(&digits, q)
}

/// Calls `f` with every distinct non-identity image of `v` under one operator.
#[inline]
fn for_each_successor(v: usize, q: usize, m: usize, pows: &[usize], mut f: impl FnMut(usize)) {
    let digit = |k: usize| (v / pows[k]) % q;
    for k in 0..m {
        let d = digit(k);
        if d + 1 < q {
            f(v + pows[k]);
        }
    }
    for k1 in 0..m {
        let d1 = digit(k1);
        for k2 in k1 + 1..m {
            let d2 = digit(k2);
            if d1 > d2 {
                // v - d1 q^k1 - d2 q^k2 + d2 q^k1 + d1 q^k2
                f(v + (d1 - d2) * (pows[k2] - pows[k1]));
            }
        }
    }
}

fn powers(q: usize, m: usize) -> Vec<usize> {
    (0..m).map(|k| q.pow(k as u32)).collect()
}

/// Whether `j` is reachable from `i` through addition and left-swap steps.
pub fn po_dominates(j: usize, i: usize, q: usize, m: usize) -> Result<bool> {
    let n = checked_len(q, m)?;
    for v in [i, j] {
        if v >= n {
            return Err(Error::OutOfRange { index: v, limit: n });
        }
    }
    if i == j {
        return Ok(true);
    }
    if j < i {
        return Ok(false);
    }
    let pows = powers(q, m);
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([i]);
    seen.insert(i);
    while let Some(v) = queue.pop_front() {
        let mut found = false;
        for_each_successor(v, q, m, &pows, |w| {
            if w == j {
                found = true;
            } else if w < j && seen.insert(w) {
                queue.push_back(w);
            }
        });
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Reachability closure for one `(q, m)`, one bitset row per index.
#[derive(Clone, Debug)]
pub struct PartialOrder {
    q: usize,
    m: usize,
    n: usize,
    words: usize,
    /// `reach[i * words ..]` has bit `j` set when `j` dominates `i`.
    reach: Vec<u64>,
}

impl PartialOrder {
    /// Largest `q^m` for which the full closure is kept in memory.
    pub const CLOSURE_GUARD: usize = 1 << 14;

    pub fn build(q: usize, m: usize) -> Result<Self> {
        let n = checked_len(q, m)?;
        if n > Self::CLOSURE_GUARD {
            return Err(Error::SizeGuard { size: n, limit: Self::CLOSURE_GUARD });
        }
        let words = n.div_ceil(64);
        let mut reach = vec![0u64; n * words];
        let pows = powers(q, m);
        // Successors have larger values, so a descending sweep sees them first.
        let mut succ = Vec::new();
        for v in (0..n).rev() {
            succ.clear();
            for_each_successor(v, q, m, &pows, |w| succ.push(w));
            let (lo, hi) = reach.split_at_mut((v + 1) * words);
            let row = &mut lo[v * words..];
            row[v / 64] |= 1 << (v % 64);
            for &w in &succ {
                let other = &hi[(w - v - 1) * words..(w - v) * words];
                for (a, b) in row.iter_mut().zip(other) {
                    *a |= *b;
                }
            }
        }
        Ok(PartialOrder { q, m, n, words, reach })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `j` dominates `i`.
    #[inline]
    pub fn dominates(&self, j: usize, i: usize) -> bool {
        (self.reach[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.dominates(a, b) || self.dominates(b, a)
    }

    /// All `(i, j)` with `j != i` and `j` dominating `i`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.dominates(j, i) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Unordered pairs `(a, b)`, `a < b`, that neither dominates.
    pub fn incomparable_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if !self.comparable(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Every comparable ordered pair `(i, j)`, `j` dominating `i`, `j != i`.
pub fn po_pairs(q: usize, m: usize) -> Result<Vec<(usize, usize)>> {
    let n = checked_len(q, m)?;
    if n > PAIR_GUARD {
        return Err(Error::SizeGuard { size: n, limit: PAIR_GUARD });
    }
    if n <= PartialOrder::CLOSURE_GUARD {
        return Ok(PartialOrder::build(q, m)?.pairs());
    }
    let pows = powers(q, m);
    let mut out = Vec::new();
    let mut mark = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        let mut found = Vec::new();
        mark[i] = i as u32;
        queue.push_back(i);
        while let Some(v) = queue.pop_front() {
            for_each_successor(v, q, m, &pows, |w| {
                if mark[w] != i as u32 {
                    mark[w] = i as u32;
                    found.push(w);
                    queue.push_back(w);
                }
            });
        }
        found.sort_unstable();
        out.extend(found.into_iter().map(|j| (i, j)));
    }
    Ok(out)
}
