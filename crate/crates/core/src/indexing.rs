//! Lexicographic index sequences `R(n,k)` (all k-sequences over `1..=n`) and
//! `Q(n,k)` (strictly increasing ones), their 1-based ranking functions, and
//! signed permutations.
//!
//! Every index visible through this module is 1-based.

use crate::error::{Error, Result};
use crate::limits::{checked_pow, Limits};

/// A tuple of `k` integers, each in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSeq {
    n: usize,
    entries: Vec<usize>,
}

impl IndexSeq {
    /// Validates that every entry lies in `1..=n` and that `k >= 1`.
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ambient dimension n must be positive"));
        }
        if entries.is_empty() {
            return Err(Error::domain("index sequence must have length k >= 1"));
        }
        if let Some(&e) = entries.iter().find(|&&e| e < 1 || e > n) {
            return Err(Error::domain(format!("entry {e} is outside [1, {n}]")));
        }
        Ok(IndexSeq { n, entries })
    }

    /// Like [`IndexSeq::new`] but additionally requires strictly increasing entries.
    pub fn increasing(n: usize, entries: Vec<usize>) -> Result<Self> {
        let seq = IndexSeq::new(n, entries)?;
        if !seq.is_increasing() {
            return Err(Error::domain(format!(
                "sequence {:?} is not strictly increasing",
                seq.entries
            )));
        }
        Ok(seq)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn is_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] < w[1])
    }
}

/// A permutation of a base sequence together with its signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPerm {
    pub entries: IndexSeq,
    pub sign: i8,
}

/// Binomial coefficient; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // exact at every step: acc * (n-k+i) is divisible by i
        acc = acc * (n as u128 - k as u128 + i) / i;
    }
    acc
}

pub(crate) fn binomial_usize(n: usize, k: usize) -> usize {
    usize::try_from(binomial(n, k)).expect("binomial coefficient overflows usize")
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if k < 1 {
        return Err(Error::domain(format!("k = {k} is below the lower bound 1")));
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds the upper bound n = {n}")));
    }
    Ok(())
}

/// `R(n,k)` has no upper bound on `k`: repeated entries are allowed.
fn check_nk_r(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if k < 1 {
        return Err(Error::domain(format!("k = {k} is below the lower bound 1")));
    }
    Ok(())
}

/// Iterator over the increasing k-sequences of `1..=n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k >= 1 && k <= n).then(|| (1..=k).collect());
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still be incremented
        let mut pos = k;
        while pos > 0 && next[pos - 1] == self.n - k + pos {
            pos -= 1;
        }
        if pos > 0 {
            next[pos - 1] += 1;
            for j in pos..k {
                next[j] = next[j - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// `Q(n,k)` in lexicographic order; exactly `C(n,k)` sequences.
pub fn enumerate_q(n: usize, k: usize, limits: &Limits) -> Result<Vec<IndexSeq>> {
    check_nk(n, k)?;
    let count = binomial(n, k);
    if count > limits.max_sequences as u128 {
        return Err(Error::resource(
            format!("enumerate_q({n},{k})"),
            count,
            limits.max_sequences as u128,
        ));
    }
    Ok(Combinations::new(n, k)
        .map(|entries| IndexSeq { n, entries })
        .collect())
}

/// `R(n,k)` in lexicographic order; exactly `n^k` sequences.
pub fn enumerate_r(n: usize, k: usize, limits: &Limits) -> Result<Vec<IndexSeq>> {
    check_nk_r(n, k)?;
    let count = checked_pow(n, k);
    if count > limits.max_sequences as u128 {
        return Err(Error::resource(
            format!("enumerate_r({n},{k})"),
            count,
            limits.max_sequences as u128,
        ));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![1usize; k];
    loop {
        out.push(IndexSeq {
            n,
            entries: cur.clone(),
        });
        // odometer step, last position fastest
        let mut pos = k;
        while pos > 0 && cur[pos - 1] == n {
            cur[pos - 1] = 1;
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        cur[pos - 1] += 1;
    }
    Ok(out)
}

/// Position of `seq` in `Q(n,k)`, by the recursion
/// `ind(i_1..i_k) = C(n,k) - C(n-i_1+1,k) + ind_{n-i_1,k-1}(i_2-i_1, ..., i_k-i_1)`
/// with `ind_{n,1}(i) = i`.
pub fn rank_q(seq: &IndexSeq) -> Result<usize> {
    if !seq.is_increasing() {
        return Err(Error::domain(format!(
            "rank_q needs a strictly increasing sequence, got {:?}",
            seq.entries
        )));
    }
    Ok(rank_q_unchecked(seq.n, &seq.entries))
}

/// [`rank_q`] on a raw slice the caller knows to be increasing and in range.
pub(crate) fn rank_q_unchecked(n: usize, entries: &[usize]) -> usize {
    let mut n = n;
    let mut k = entries.len();
    let mut shift = 0usize;
    let mut acc = 0usize;
    for (pos, &e) in entries.iter().enumerate() {
        let first = e - shift;
        if pos + 1 == entries.len() {
            return acc + first;
        }
        acc += binomial_usize(n, k) - binomial_usize(n - first + 1, k);
        n -= first;
        k -= 1;
        shift = e;
    }
    unreachable!("entries is non-empty")
}

fn binomial_signed(top: i64, bottom: i64) -> i64 {
    if top < 0 || bottom < 0 || bottom > top {
        0
    } else {
        i64::try_from(binomial(top as usize, bottom as usize)).expect("binomial overflows i64")
    }
}

/// Evaluates the published closed-form expression for the `Q(n,k)` rank
/// exactly as printed:
///
/// `i_k + sum_{j=1}^{k-1} ( C(n - sum_{l<j} i_l, k-j+1) - C(n - sum_{l<=j} i_l + 1, k-j+1) - i_j )`
///
/// Binomials with a negative or too small top argument evaluate to zero. The
/// expression agrees with [`rank_q`] for `k <= 2` only; it is kept for
/// auditing and never used internally.
pub fn rank_q_closed(seq: &IndexSeq) -> Result<i64> {
    if !seq.is_increasing() {
        return Err(Error::domain(format!(
            "rank_q_closed needs a strictly increasing sequence, got {:?}",
            seq.entries
        )));
    }
    let n = seq.n as i64;
    let k = seq.k() as i64;
    let i: Vec<i64> = seq.entries.iter().map(|&e| e as i64).collect();
    let mut total = i[i.len() - 1];
    let mut prefix = 0i64;
    for j in 1..k {
        let ij = i[(j - 1) as usize];
        let before = prefix;
        prefix += ij;
        total += binomial_signed(n - before, k - j + 1) - binomial_signed(n - prefix + 1, k - j + 1)
            - ij;
    }
    Ok(total)
}

/// Position of `seq` in `R(n,k)`: `sum_l (i_l - 1) n^(k-l) + 1`.
pub fn rank_r(seq: &IndexSeq) -> Result<usize> {
    let n = seq.n as u128;
    let mut acc: u128 = 0;
    for &e in &seq.entries {
        acc = acc
            .checked_mul(n)
            .and_then(|a| a.checked_add(e as u128 - 1))
            .ok_or_else(|| Error::resource("rank_r", u128::MAX, usize::MAX as u128))?;
    }
    usize::try_from(acc + 1).map_err(|_| Error::resource("rank_r", acc + 1, usize::MAX as u128))
}

/// 0-based [`rank_r`] on a raw slice of in-range entries.
#[inline]
pub(crate) fn rank_r0_unchecked(n: usize, entries: &[usize]) -> usize {
    entries.iter().fold(0, |acc, &e| acc * n + (e - 1))
}

/// Inverse of [`rank_q`]: the `p`-th (1-based) sequence of `Q(n,k)`.
pub fn unrank_q(n: usize, k: usize, p: usize) -> Result<IndexSeq> {
    check_nk(n, k)?;
    let total = binomial(n, k);
    if p < 1 || p as u128 > total {
        return Err(Error::domain(format!(
            "position {p} is outside [1, {total}] for Q({n},{k})"
        )));
    }
    let mut rem = (p - 1) as u128;
    let mut entries = Vec::with_capacity(k);
    let mut next = 1usize;
    for slot in 0..k {
        let left = k - slot - 1;
        let mut c = next;
        loop {
            // sequences whose entry at `slot` equals c
            let block = binomial(n - c, left);
            if rem < block {
                break;
            }
            rem -= block;
            c += 1;
        }
        entries.push(c);
        next = c + 1;
    }
    Ok(IndexSeq { n, entries })
}

/// Inverse of [`rank_r`]: the `p`-th (1-based) sequence of `R(n,k)`.
pub fn unrank_r(n: usize, k: usize, p: usize) -> Result<IndexSeq> {
    check_nk_r(n, k)?;
    let total = checked_pow(n, k);
    if p < 1 || p as u128 > total {
        return Err(Error::domain(format!(
            "position {p} is outside [1, {total}] for R({n},{k})"
        )));
    }
    Ok(IndexSeq {
        n,
        entries: unrank_r0_unchecked(n, k, p - 1),
    })
}

pub(crate) fn unrank_r0_unchecked(n: usize, k: usize, mut p0: usize) -> Vec<usize> {
    let mut entries = vec![0; k];
    for slot in (0..k).rev() {
        entries[slot] = p0 % n + 1;
        p0 /= n;
    }
    entries
}

/// `(-1)^(number of inversions)`, by direct O(k^2) counting.
pub fn inversion_sign(entries: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for a in 0..entries.len() {
        for b in a + 1..entries.len() {
            if entries[a] > entries[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Advances `v` to its lexicographic successor; false when `v` was the last.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All `k!` permutations of a sequence of distinct entries, each with its
/// signature relative to the sorted sequence, in lexicographic order.
pub fn signed_permutations(seq: &IndexSeq) -> Result<Vec<SignedPerm>> {
    let mut base = seq.entries.clone();
    base.sort_unstable();
    if base.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain(format!(
            "signed_permutations needs distinct entries, got {:?}",
            seq.entries
        )));
    }
    let mut out = Vec::new();
    let mut cur = base;
    loop {
        out.push(SignedPerm {
            sign: inversion_sign(&cur),
            entries: IndexSeq {
                n: seq.n,
                entries: cur.clone(),
            },
        });
        if !next_permutation(&mut cur) {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(n: usize, e: &[usize]) -> IndexSeq {
        IndexSeq::new(n, e.to_vec()).unwrap()
    }

    fn entries(v: &[IndexSeq]) -> Vec<Vec<usize>> {
        v.iter().map(|s| s.entries().to_vec()).collect()
    }

    /// All k-subsets of 1..=n by filtering every bit mask, then sorted.
    fn brute_force_q(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (1..=n).filter(|i| m & (1 << (i - 1)) != 0).collect())
            .collect();
        out.sort();
        out
    }

    /// Parity from the cycle decomposition of the permutation mapping the
    /// sorted sequence onto `p`.
    fn cycle_sign(p: &[usize]) -> i8 {
        let mut sorted = p.to_vec();
        sorted.sort_unstable();
        let pos: Vec<usize> = p
            .iter()
            .map(|x| sorted.iter().position(|y| y == x).unwrap())
            .collect();
        let mut seen = vec![false; p.len()];
        let mut transpositions = 0;
        for s in 0..p.len() {
            let mut len = 0;
            let mut c = s;
            while !seen[c] {
                seen[c] = true;
                c = pos[c];
                len += 1;
            }
            if len > 0 {
                transpositions += len - 1;
            }
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn enumerate_q_examples() {
        let l = Limits::default();
        assert_eq!(
            entries(&enumerate_q(3, 2, &l).unwrap()),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(
            entries(&enumerate_q(5, 1, &l).unwrap()),
            (1..=5).map(|i| vec![i]).collect::<Vec<_>>()
        );
        assert_eq!(entries(&enumerate_q(4, 3, &l).unwrap()), brute_force_q(4, 3));
        assert_eq!(
            brute_force_q(4, 3),
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
    }

    #[test]
    fn enumerate_q_matches_subsets() {
        let l = Limits::default();
        for n in 1..=8 {
            for k in 1..=n {
                assert_eq!(entries(&enumerate_q(n, k, &l).unwrap()), brute_force_q(n, k));
            }
        }
    }

    #[test]
    fn enumerate_bounds() {
        let l = Limits::default();
        let err = enumerate_q(3, 4, &l).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("upper bound")));
        let err = enumerate_q(3, 0, &l).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("lower bound")));
        let small = Limits {
            max_sequences: 26,
            ..Limits::default()
        };
        assert!(enumerate_r(3, 3, &Limits { max_sequences: 27, ..l }).is_ok());
        match enumerate_r(3, 3, &small).unwrap_err() {
            Error::Resource {
                required, allowed, ..
            } => {
                assert_eq!(required, 27);
                assert_eq!(allowed, 26);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn enumerate_r_examples() {
        let l = Limits::default();
        assert_eq!(
            entries(&enumerate_r(3, 2, &l).unwrap()),
            vec![
                vec![1, 1],
                vec![1, 2],
                vec![1, 3],
                vec![2, 1],
                vec![2, 2],
                vec![2, 3],
                vec![3, 1],
                vec![3, 2],
                vec![3, 3]
            ]
        );
        assert_eq!(entries(&enumerate_r(2, 1, &l).unwrap()), vec![vec![1], vec![2]]);
        let r23 = entries(&enumerate_r(2, 3, &l).unwrap());
        assert_eq!(r23.len(), 8);
        assert_eq!(r23[0], vec![1, 1, 1]);
        assert_eq!(r23[7], vec![2, 2, 2]);
        assert!(r23.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_q(&seq(3, &[1, 3])).unwrap(), 2);
        assert_eq!(rank_q(&seq(7, &[1, 2, 3, 4])).unwrap(), 1);
        assert_eq!(rank_q(&seq(4, &[1, 2, 4])).unwrap(), 2);
        assert_eq!(rank_r(&seq(3, &[1, 3])).unwrap(), 3);
        assert_eq!(rank_r(&seq(3, &[1, 2, 3])).unwrap(), 6);
        assert_eq!(rank_r(&seq(5, &[1, 1, 1, 1])).unwrap(), 1);
        assert!(rank_q(&seq(3, &[2, 2])).is_err());
        assert!(rank_q(&seq(3, &[3, 1])).is_err());
        assert!(IndexSeq::new(3, vec![0, 1]).is_err());
        assert!(IndexSeq::new(3, vec![4]).is_err());
    }

    #[test]
    fn rank_r_of_identity_sequence() {
        for n in 2..=6usize {
            let s = seq(n, &(1..=n).collect::<Vec<_>>());
            let expected = (n.pow(n as u32) - n) / (n - 1).pow(2);
            assert_eq!(rank_r(&s).unwrap(), expected);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(rank_q_closed(&seq(3, &[1, 3])).unwrap(), 2);
        assert_eq!(rank_q_closed(&seq(3, &[2, 3])).unwrap(), 3);
        // i_3 + [C(4,3) - C(4,3) - 1] + [C(3,2) - C(2,2) - 2] = 4 - 1 + 0
        assert_eq!(rank_q_closed(&seq(4, &[1, 2, 4])).unwrap(), 3);
        assert_eq!(rank_q(&seq(4, &[1, 2, 4])).unwrap(), 2);
    }

    #[test]
    fn closed_form_agrees_for_small_k() {
        let l = Limits::default();
        for n in 1..=8 {
            for k in 1..=n.min(2) {
                for (p, s) in enumerate_q(n, k, &l).unwrap().iter().enumerate() {
                    assert_eq!(rank_q_closed(s).unwrap(), p as i64 + 1, "{s:?}");
                }
            }
        }
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank_q(3, 2, 2).unwrap().entries(), &[1, 3]);
        assert_eq!(unrank_r(3, 2, 3).unwrap().entries(), &[1, 3]);
        assert_eq!(unrank_q(4, 3, 4).unwrap().entries(), &[2, 3, 4]);
        assert!(unrank_q(4, 3, 5).is_err());
        assert!(unrank_q(4, 3, 0).is_err());
        assert!(unrank_r(2, 2, 5).is_err());
    }

    #[test]
    fn round_trips_up_to_eight() {
        let l = Limits::default();
        for n in 1..=8 {
            for k in 1..=n {
                for (p, s) in enumerate_q(n, k, &l).unwrap().iter().enumerate() {
                    assert_eq!(rank_q(s).unwrap(), p + 1);
                    assert_eq!(&unrank_q(n, k, p + 1).unwrap(), s);
                }
                if checked_pow(n, k) <= 50_000 {
                    for (p, s) in enumerate_r(n, k, &l).unwrap().iter().enumerate() {
                        assert_eq!(rank_r(s).unwrap(), p + 1);
                        assert_eq!(&unrank_r(n, k, p + 1).unwrap(), s);
                    }
                }
            }
        }
    }

    #[test]
    fn signed_permutation_examples() {
        let p = signed_permutations(&seq(2, &[1, 2])).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].entries.entries(), p[0].sign), (&[1, 2][..], 1));
        assert_eq!((p[1].entries.entries(), p[1].sign), (&[2, 1][..], -1));

        let p = signed_permutations(&seq(3, &[1, 2, 3])).unwrap();
        assert_eq!(p.len(), 6);
        for sp in &p {
            assert_eq!(sp.sign, cycle_sign(sp.entries.entries()));
        }
        let c = p.iter().find(|s| s.entries.entries() == [2, 3, 1]).unwrap();
        assert_eq!(c.sign, 1);

        let p = signed_permutations(&seq(3, &[1, 3])).unwrap();
        assert_eq!((p[0].entries.entries(), p[0].sign), (&[1, 3][..], 1));
        assert_eq!((p[1].entries.entries(), p[1].sign), (&[3, 1][..], -1));

        assert!(signed_permutations(&seq(3, &[2, 2])).is_err());
    }

    #[test]
    fn signs_balance() {
        for k in 2..=6 {
            let s = seq(8, &(1..=k).collect::<Vec<_>>());
            let perms = signed_permutations(&s).unwrap();
            assert_eq!(perms.len(), (1..=k).product::<usize>());
            assert_eq!(perms.iter().map(|p| p.sign as i32).sum::<i32>(), 0);
            for p in &perms {
                assert_eq!(p.sign, cycle_sign(p.entries.entries()));
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 5), 0);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }
}
