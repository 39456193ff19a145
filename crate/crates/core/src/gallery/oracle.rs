//! Classical membership and promise checks, independent of any quantum construction.

use super::Membership;

fn from_bool(b: bool) -> Membership {
    if b {
        Membership::Yes
    } else {
        Membership::No
    }
}

/// Nonempty binary strings starting with `a`; the empty string is outside the promise.
pub fn l_prefix(a: char, x: &str) -> Membership {
    match x.chars().next() {
        None => Membership::NotPromised,
        Some(c) => from_bool(c == a),
    }
}

pub fn equal(x: &str) -> Membership {
    let a = x.chars().filter(|&c| c == 'a').count();
    let b = x.chars().filter(|&c| c == 'b').count();
    from_bool(a == b)
}

/// `w#w^R`; inputs without exactly one `#` are outside the promise.
pub fn pal_marked(x: &str) -> Membership {
    let mut parts = x.split('#');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(w1), Some(w2), None) => from_bool(w1.chars().eq(w2.chars().rev())),
        _ => Membership::NotPromised,
    }
}

/// Some pair `i < j` with `i + j = n + 1` carries the same letter.
pub fn sym_coin(x: &str) -> Membership {
    let s: Vec<char> = x.chars().collect();
    let n = s.len();
    from_bool((1..=n).any(|i| {
        let j = n + 1 - i;
        i < j && s[i - 1] == s[j - 1]
    }))
}

/// Block lengths of `0^t#1^{n_1}#...#1^{n_k}` as `(t, [n_1, ..., n_k])`.
pub fn subset_sum_blocks(x: &str) -> Option<(usize, Vec<usize>)> {
    let mut blocks = x.split('#');
    let head = blocks.next()?;
    if head.is_empty() || head.chars().any(|c| c != '0') {
        return None;
    }
    let ns: Vec<usize> = blocks
        .map(|b| (!b.is_empty() && b.chars().all(|c| c == '1')).then_some(b.len()))
        .collect::<Option<_>>()?;
    if ns.is_empty() {
        return None;
    }
    Some((head.len(), ns))
}

/// Subsets of `ns` (bit `i` selects `n_{i+1}`) summing to `t`.
pub fn subsets_summing_to(t: usize, ns: &[usize]) -> Vec<u64> {
    (0u64..1 << ns.len())
        .filter(|&mask| ns.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n).sum::<usize>() == t)
        .collect()
}

/// Promise: block form and at most one subset summing to `t`.
pub fn usubsum(x: &str) -> Membership {
    let Some((t, ns)) = subset_sum_blocks(x) else {
        return Membership::NotPromised;
    };
    match subsets_summing_to(t, &ns).len() {
        0 => Membership::No,
        1 => Membership::Yes,
        _ => Membership::NotPromised,
    }
}

/// Blocks `w_0#...#w_k` over `{0,1}` of one common positive length, with `k >= 1`.
pub fn dup_blocks(x: &str) -> Option<Vec<&str>> {
    let blocks: Vec<&str> = x.split('#').collect();
    let l = blocks[0].len();
    let shaped = blocks.len() >= 2
        && l > 0
        && blocks.iter().all(|b| b.len() == l && b.chars().all(|c| c == '0' || c == '1'));
    shaped.then_some(blocks)
}

/// Yes for all blocks equal; the promise allows at most one block `w_i`, `i >= 1`, to differ from `w_0`.
pub fn multdup(x: &str) -> Membership {
    let Some(blocks) = dup_blocks(x) else {
        return Membership::NotPromised;
    };
    match blocks[1..].iter().filter(|b| **b != blocks[0]).count() {
        0 => Membership::Yes,
        1 => Membership::No,
        _ => Membership::NotPromised,
    }
}
