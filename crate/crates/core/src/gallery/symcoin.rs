//! Symmetric coincidence: some mirrored pair `i < j`, `i + j = n + 1`, carries one letter.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian};
use crate::qqa::{generate_anchored_qqaf, BasisIndex, InitialMixture, Level, QqaError, QqafLevel, Register, Selector, SparseOp, Symbol};

use super::{length_sweep, oracle, partial_map, real, Expectation, GalleryEntry, LevelCache, Orientation, Spectral};

pub const MAX_LEN: usize = 32;

const TAPE: [&str; 5] = ["a", "b", "B", "acc", "rej"];
const BLANK: usize = 2;
const ACC: usize = 3;
const REJ: usize = 4;

static LEVELS: LazyLock<LevelCache<usize>> = LazyLock::new(LevelCache::new);

/// `(0,0)` followed by the pairs `(i, n+1-i)` with `i < n+1-i`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    std::iter::once((0, 0)).chain((1..=n).map(|i| (i, n + 1 - i)).take_while(|(i, j)| i < j)).collect()
}

/// Smallest `i` of a mirrored pair with equal letters.
pub fn smallest_witness(x: &str) -> Option<usize> {
    let s: Vec<char> = x.chars().collect();
    pairs(s.len()).into_iter().skip(1).find(|&(i, j)| s[i - 1] == s[j - 1]).map(|(i, _)| i)
}

/// Index arithmetic for `IND = C~ x (tape x [0, n+1])^2`.
#[derive(Clone, Copy)]
struct Shape {
    n: usize,
    pairs: usize,
}

impl Shape {
    fn heads(self) -> usize {
        self.n + 2
    }

    fn half(self) -> usize {
        TAPE.len() * self.heads()
    }

    fn dim(self) -> usize {
        self.pairs * self.half() * self.half()
    }

    fn mode(self, sigma: usize, h: usize) -> usize {
        sigma * self.heads() + h
    }

    fn xi0(self) -> usize {
        self.mode(BLANK, 0)
    }

    fn index(self, p: usize, u: usize, w: usize) -> usize {
        (p * self.half() + u) * self.half() + w
    }

    fn split(self, c: usize) -> (usize, usize, usize) {
        (c / (self.half() * self.half()), c / self.half() % self.half(), c % self.half())
    }

    fn advance(self, u: usize) -> usize {
        let h = self.heads();
        u / h * h + (u % h + 1) % h
    }
}

pub(crate) fn level(n: usize) -> Result<QqafLevel, QqaError> {
    if n > MAX_LEN {
        return Err(QqaError::Capacity(format!("sym_coin is built for inputs up to length {MAX_LEN}")));
    }
    let ps = pairs(n);
    let shape = Shape { n, pairs: ps.len() };
    let hi = shape.heads() as i64 - 1;
    let labels: Vec<String> = ps.iter().map(|(i, j)| format!("{i}:{j}")).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let basis = BasisIndex::new(vec![
        Register::labeled("pair", &label_refs),
        Register::labeled("sigma", &TAPE),
        Register::range("h", 0, hi),
        Register::labeled("sigma'", &TAPE),
        Register::range("h'", 0, hi),
    ])?;
    let dim = shape.dim();
    let xi0 = shape.xi0();

    let keep = partial_map(dim, move |c| {
        let (p, u, w) = shape.split(c);
        (u == xi0).then(|| shape.index(p, shape.advance(u), w))
    });
    let swap = partial_map(dim, move |c| {
        let (p, u, w) = shape.split(c);
        (u != xi0).then(|| shape.index(p, shape.advance(w), u))
    });

    let letter = |d: usize| {
        let ps = ps.clone();
        SparseOp::permutation(dim, move |c| {
            let (p, u, w) = shape.split(c);
            if w != xi0 {
                return c;
            }
            let (sigma, h) = (u / shape.heads(), u % shape.heads());
            let (i, j) = ps[p];
            let mut tau = sigma;
            if i > 0 && h == i {
                tau = swap_pair(tau, BLANK, d);
            }
            if i > 0 && h == j {
                tau = swap_pair(tau, d, ACC);
            }
            shape.index(p, shape.advance(shape.mode(tau, h)), w)
        })
    };

    let last = shape.n + 1;
    let pair_i: Vec<f64> = ps.iter().map(|&(i, _)| i as f64 / (n + 1) as f64).collect();
    let weights = pair_i.clone();
    let dollar_keep = SparseOp::from_rule(dim, move |c| {
        let (p, u, w) = shape.split(c);
        if w != xi0 {
            return vec![(c, real(1.0))];
        }
        if u == shape.mode(ACC, last) {
            let a = weights[p].sqrt();
            return if a > 0.0 { vec![(shape.index(p, shape.mode(ACC, 0), w), real(a))] } else { Vec::new() };
        }
        vec![(shape.index(p, shape.advance(u), w), real(1.0))]
    });
    let dollar_split = SparseOp::from_rule(dim, move |c| {
        let (p, u, w) = shape.split(c);
        if w == xi0 && u == shape.mode(ACC, last) {
            vec![(shape.index(p, shape.mode(REJ, 0), w), real((1.0 - pair_i[p]).sqrt()))]
        } else {
            Vec::new()
        }
    });

    let kraus = BTreeMap::from([
        (Symbol::Left, vec![keep, swap]),
        (Symbol::Letter('a'), vec![letter(0)?]),
        (Symbol::Letter('b'), vec![letter(1)?]),
        (Symbol::Right, vec![dollar_keep, dollar_split]),
    ]);
    let lambda0 = InitialMixture::identity_except(shape.index(0, xi0, xi0), 2.0 / 3.0);
    QqafLevel::new(basis, vec!['a', 'b'], kraus, lambda0, Vec::new())
}

fn swap_pair(v: usize, a: usize, b: usize) -> usize {
    if v == a {
        b
    } else if v == b {
        a
    } else {
        v
    }
}

fn cached(n: usize) -> Result<Arc<Level>, AeqsError> {
    LEVELS.get(n, || Ok(Level::Qqaf(level(n)?)))
}

pub(crate) fn entry() -> GalleryEntry {
    let family = AeqsFamily::new("sym_coin", vec!['a', 'b'], Selector::length(), |x| {
        let n = x.chars().count();
        let level = cached(n)?;
        let Level::Qqaf(level) = level.as_ref() else { unreachable!("sym_coin levels are one-way Kraus levels") };
        let shape = Shape { n, pairs: pairs(n).len() };
        let xi0 = shape.xi0();
        let anchors: Vec<usize> = (0..shape.pairs).map(|p| shape.index(p, xi0, xi0)).collect();
        let g = generate_anchored_qqaf(level, x, &anchors, &EigenSettings::from_env())?;
        let accept = (1..shape.pairs).map(|p| shape.index(p, shape.mode(ACC, 0), xi0)).collect();
        let reject = vec![shape.index(0, xi0, xi0)];
        AeqsInstance::new(g.basis, DEFAULT_EPSILON, Hamiltonian::uniform_complement(shape.dim()), g.hamiltonian, accept, reject)
    })
    .with_tags(&["1qqaf", "logsize", "polygap"]);
    GalleryEntry {
        name: "sym_coin".to_string(),
        family,
        oracle: Arc::new(oracle::sym_coin),
        orientation: Orientation::Direct,
        expectations: vec![
            Expectation::new("member: energy i_min/(n+1), gap 1/(n+1)", |x| {
                let n1 = (x.chars().count() + 1) as f64;
                smallest_witness(x).map(|i| Spectral { energy: i as f64 / n1, gap_at_least: Some(1.0 / n1) })
            }),
            Expectation::new("non-member: energy 2/3, gap 1/3", |x| {
                smallest_witness(x).is_none().then_some(Spectral { energy: 2.0 / 3.0, gap_at_least: Some(1.0 / 3.0) })
            }),
        ],
        notes: "Guess a mirrored pair (i, n+1-i); remember x_i, compare at x_j; the right endmarker keeps a witness with weight i/(n+1). Pair (0,0) carries the rejecting branch at 2/3."
            .to_string(),
        level: Some(Arc::new(|x| cached(x.chars().count()))),
        inputs: length_sweep(vec!['a', 'b']),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::{decide, Outcome};

    #[test]
    fn ab_rejects_at_two_thirds() {
        let v = entry().family.decide("ab", &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Reject);
        assert!((v.ground_energy - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn aa_accepts_with_gap_a_third() {
        let inst = entry().family.build("aa").unwrap();
        let v = decide(&inst, &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!((v.ground_energy - 1.0 / 3.0).abs() < 1e-9);
        assert!(v.spectral_gap >= 1.0 / 3.0 - 1e-9);
    }

    #[test]
    fn pair_sets() {
        assert_eq!(pairs(4), vec![(0, 0), (1, 4), (2, 3)]);
        assert_eq!(pairs(5), vec![(0, 0), (1, 5), (2, 4)]);
        assert_eq!(pairs(1), vec![(0, 0)]);
        assert_eq!(smallest_witness("abba"), Some(1));
        assert_eq!(smallest_witness("baaa"), Some(2));
    }

    #[test]
    fn kraus_families_complete() {
        let report = level(3).unwrap().validate(&EigenSettings::default()).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
