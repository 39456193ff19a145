//! Unary subset sum: `0^t#1^{n_1}#...#1^{n_k}` with `t` a sum over the unique subset.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian};
use crate::qqa::{generate_anchored_qqaf, BasisIndex, InitialMixture, Level, QqaError, QqafLevel, Register, Selector, SparseOp, Symbol};

use super::oracle::{subset_sum_blocks, subsets_summing_to};
use super::{oracle, partial_map, Bounds, Expectation, GalleryEntry, LevelCache, Membership, Orientation, Spectral};

/// Largest number of blocks the subset register is built for.
pub const MAX_BLOCKS: usize = 12;

static LEVELS: LazyLock<LevelCache<Params>> = LazyLock::new(LevelCache::new);

/// Block parameters `(t, k, l)`: leading zeros, number of unary blocks, longest block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    pub t: usize,
    pub k: usize,
    pub l: usize,
}

impl Params {
    pub fn of(x: &str) -> Option<Self> {
        let (t, ns) = subset_sum_blocks(x)?;
        Some(Self { t, k: ns.len(), l: ns.iter().copied().max().unwrap_or(0) })
    }
}

/// `IND = {0,1}^k x ([0,k] x [-kl, t])^2` with registers `(s, i, j, a, b)`.
#[derive(Clone, Copy)]
struct Shape {
    p: Params,
}

impl Shape {
    fn subsets(self) -> usize {
        1 << self.p.k
    }

    fn counter(self) -> usize {
        self.p.k * self.p.l + self.p.t + 1
    }

    fn half(self) -> usize {
        (self.p.k + 1) * self.counter()
    }

    fn dim(self) -> usize {
        self.subsets() * self.half() * self.half()
    }

    /// Digit of counter value `v`.
    fn digit(self, v: i64) -> usize {
        (v + (self.p.k * self.p.l) as i64) as usize
    }

    fn mode(self, i: usize, j: i64) -> usize {
        i * self.counter() + self.digit(j)
    }

    fn xi0(self) -> usize {
        self.mode(0, 0)
    }

    fn index(self, s: usize, u: usize, w: usize) -> usize {
        (s * self.half() + u) * self.half() + w
    }

    fn split(self, c: usize) -> (usize, usize, usize) {
        (c / (self.half() * self.half()), c / self.half() % self.half(), c % self.half())
    }

    /// Bit `s_i` of the subset register, `i` in `1..=k`, written most significant first.
    fn chosen(self, s: usize, i: usize) -> bool {
        s >> (self.p.k - i) & 1 == 1
    }
}

pub(crate) fn level(p: Params) -> Result<QqafLevel, QqaError> {
    if p.k == 0 || p.k > MAX_BLOCKS {
        return Err(QqaError::Capacity(format!("usubsum needs 1..={MAX_BLOCKS} blocks, got {}", p.k)));
    }
    let shape = Shape { p };
    let lo = -((p.k * p.l) as i64);
    let subset_labels: Vec<String> =
        (0..shape.subsets()).map(|s| (1..=p.k).map(|i| if shape.chosen(s, i) { '1' } else { '0' }).collect()).collect();
    let subset_refs: Vec<&str> = subset_labels.iter().map(String::as_str).collect();
    let basis = BasisIndex::new(vec![
        Register::labeled("s", &subset_refs),
        Register::range("i", 0, p.k as i64),
        Register::range("j", lo, p.t as i64),
        Register::range("a", 0, p.k as i64),
        Register::range("b", lo, p.t as i64),
    ])?;
    let dim = shape.dim();
    let xi0 = shape.xi0();
    let counter = shape.counter();

    let keep = partial_map(dim, move |c| (shape.split(c).1 == xi0).then_some(c));
    let swap = partial_map(dim, move |c| {
        let (s, u, w) = shape.split(c);
        (u != xi0).then(|| shape.index(s, w, u))
    });
    // Acts on the first pair (i, j) when the second pair holds xi0.
    let active = move |f: Box<dyn Fn(usize, usize, usize) -> usize + Send + Sync>| {
        SparseOp::permutation(dim, move |c| {
            let (s, u, w) = shape.split(c);
            if w != xi0 {
                return c;
            }
            let (i, j) = (u / counter, u % counter);
            shape.index(s, f(s, i, j), w)
        })
    };
    let zero = active(Box::new(move |_, i, j| i * counter + if i == 0 { (j + 1) % counter } else { j }))?;
    let one = active(Box::new(move |s, i, j| {
        let down = i >= 1 && shape.chosen(s, i);
        i * counter + if down { (j + counter - 1) % counter } else { j }
    }))?;
    let hash = active(Box::new(move |_, i, j| (i + 1) % (p.k + 1) * counter + j))?;

    let kraus = BTreeMap::from([
        (Symbol::Left, vec![keep, swap]),
        (Symbol::Letter('0'), vec![zero]),
        (Symbol::Letter('1'), vec![one]),
        (Symbol::Letter('#'), vec![hash]),
        (Symbol::Right, vec![SparseOp::identity(dim)]),
    ]);
    let lambda0 = InitialMixture::identity_except(shape.index(0, xi0, xi0), 0.5);
    let halting = (0..shape.subsets()).map(|s| shape.index(s, shape.mode(p.k, 0), xi0)).collect();
    QqafLevel::new(basis, vec!['0', '1', '#'], kraus, lambda0, halting)
}

fn cached(p: Params) -> Result<Arc<Level>, AeqsError> {
    LEVELS.get(p, || Ok(Level::Qqaf(level(p)?)))
}

fn params_or_err(x: &str) -> Result<Params, AeqsError> {
    Params::of(x).ok_or_else(|| AeqsError::Input { input: x.to_string(), reason: "not of the form 0^t#1^n1#...#1^nk".to_string() })
}

/// Promised inputs with `t <= t_max`, `k <= k_max` and every block length `<= l_max`.
pub fn promised_inputs(t_max: usize, k_max: usize, l_max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for t in 1..=t_max {
        for k in 1..=k_max {
            let mut ns = vec![1; k];
            loop {
                let x = format!("{}{}", "0".repeat(t), ns.iter().map(|&n| format!("#{}", "1".repeat(n))).collect::<String>());
                if oracle::usubsum(&x) != Membership::NotPromised {
                    out.push(x);
                }
                // Odometer over [1, l_max]^k.
                let Some(pos) = ns.iter().rposition(|&n| n < l_max) else { break };
                ns[pos] += 1;
                ns[pos + 1..].iter_mut().for_each(|n| *n = 1);
            }
        }
    }
    out
}

pub(crate) fn entry() -> GalleryEntry {
    let selector = Selector::new("<t,k,l>", |x| {
        Params::of(x).map_or(0, |p| {
            let (t, k, l) = (p.t as u64, p.k as u64, p.l as u64);
            // Cantor pairing of (t, <k, l>).
            let kl = (k + l) * (k + l + 1) / 2 + l;
            (t + kl) * (t + kl + 1) / 2 + kl
        })
    });
    let family = AeqsFamily::new("usubsum", vec!['0', '1', '#'], selector, |x| {
        let p = params_or_err(x)?;
        let level = cached(p)?;
        let Level::Qqaf(level) = level.as_ref() else { unreachable!("usubsum levels are one-way Kraus levels") };
        let shape = Shape { p };
        let xi0 = shape.xi0();
        let anchors: Vec<usize> = (0..shape.subsets()).map(|s| shape.index(s, xi0, xi0)).collect();
        let g = generate_anchored_qqaf(level, x, &anchors, &EigenSettings::from_env())?;
        let accept = (1..shape.subsets()).map(|s| shape.index(s, shape.mode(p.k, 0), xi0)).collect();
        let reject = vec![shape.index(0, shape.mode(p.k, p.t as i64), xi0)];
        AeqsInstance::new(g.basis, DEFAULT_EPSILON, Hamiltonian::uniform_complement(shape.dim()), g.hamiltonian, accept, reject)
    })
    .with_promise(|x| oracle::usubsum(x) != Membership::NotPromised)
    .with_tags(&["1qqaf", "linsize", "constgap"]);
    GalleryEntry {
        name: "usubsum".to_string(),
        family,
        oracle: Arc::new(oracle::usubsum),
        orientation: Orientation::Direct,
        expectations: vec![
            Expectation::new("member: energy 0, gap 1/2", |x| {
                let (t, ns) = subset_sum_blocks(x)?;
                (subsets_summing_to(t, &ns).len() == 1).then_some(Spectral { energy: 0.0, gap_at_least: Some(0.5) })
            }),
            Expectation::new("non-member: energy 1/2, gap 1/2", |x| {
                let (t, ns) = subset_sum_blocks(x)?;
                subsets_summing_to(t, &ns).is_empty().then_some(Spectral { energy: 0.5, gap_at_least: Some(0.5) })
            }),
        ],
        notes: "Guess a subset s; count up on the zeros and down on the chosen unary blocks; halt where the counter returns to 0. The empty subset carries the rejecting branch at 1/2."
            .to_string(),
        level: Some(Arc::new(|x| cached(params_or_err(x)?))),
        inputs: Arc::new(|b| match b {
            Bounds::Params(_) => Ok(promised_inputs(b.param("t")?, b.param("k")?, b.param("l")?)),
            Bounds::MaxLen(n) => Ok(super::strings_up_to(&['0', '1', '#'], *n)),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::Outcome;

    #[test]
    fn accepts_0_hash_1() {
        let v = entry().family.decide("0#1", &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!(v.ground_energy.abs() < 1e-9);
        assert!(v.spectral_gap >= 0.5 - 1e-9);
    }

    #[test]
    fn rejects_at_one_half() {
        let v = entry().family.decide("000#1#1", &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Reject);
        assert!((v.ground_energy - 0.5).abs() < 1e-9);
    }

    #[test]
    fn outside_block_form_is_an_input_error() {
        assert!(matches!(entry().family.build("1#0"), Err(AeqsError::Input { .. })));
    }

    #[test]
    fn sweep_lists_only_promised() {
        let xs = promised_inputs(2, 2, 2);
        assert!(xs.contains(&"00#1#1".to_string()));
        assert!(!xs.contains(&"0#1#1".to_string()));
        assert!(xs.iter().all(|x| oracle::usubsum(x) != Membership::NotPromised));
    }

    #[test]
    fn kraus_families_complete() {
        let report = level(Params { t: 2, k: 2, l: 1 }).unwrap().validate(&EigenSettings::default()).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
