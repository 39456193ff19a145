//! Multiple duplication: blocks `w_0#w_1#...#w_k` of one length, compared position by position.
//!
//! The construction's accepting space holds inequality witnesses, so it accepts the
//! non-members; `complement(multdup)` accepts the all-equal side.

use std::collections::BTreeMap;
use std::sync::{Arc, LazyLock};

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian};
use crate::qqa::{generate_anchored_qqaf, BasisIndex, InitialMixture, Level, QqaError, QqafLevel, Register, Selector, SparseOp, Symbol};

use super::oracle::dup_blocks;
use super::{oracle, partial_map, strings_up_to, Bounds, Expectation, GalleryEntry, LevelCache, Membership, Orientation, Spectral};

/// Largest basis built, in states.
pub const MAX_DIM: usize = 1 << 23;

const TAPE: [&str; 4] = ["0", "1", "#", "B"];
const BLANK: usize = 3;

static LEVELS: LazyLock<LevelCache<(usize, usize)>> = LazyLock::new(LevelCache::new);

/// `(k, l)`: number of blocks after `w_0` and their common length.
pub fn params(x: &str) -> Option<(usize, usize)> {
    dup_blocks(x).map(|b| (b.len() - 1, b[0].len()))
}

/// `IND = [0,k] x [0,l] x (tape x [0,k] x [0,l] x [0,N+1])^2`, `N = l(k+1) + k`.
#[derive(Clone, Copy)]
struct Shape {
    k: usize,
    l: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Mode {
    sigma: usize,
    h: usize,
    r: usize,
    t: usize,
}

impl Shape {
    fn clock(self) -> usize {
        self.l * (self.k + 1) + self.k + 2
    }

    fn half(self) -> usize {
        TAPE.len() * (self.k + 1) * (self.l + 1) * self.clock()
    }

    fn dim(self) -> usize {
        (self.k + 1) * (self.l + 1) * self.half() * self.half()
    }

    fn pack(self, m: Mode) -> usize {
        ((m.sigma * (self.k + 1) + m.h) * (self.l + 1) + m.r) * self.clock() + m.t
    }

    fn unpack(self, mut u: usize) -> Mode {
        let t = u % self.clock();
        u /= self.clock();
        let r = u % (self.l + 1);
        u /= self.l + 1;
        Mode { sigma: u / (self.k + 1), h: u % (self.k + 1), r, t }
    }

    fn xi0(self) -> usize {
        self.pack(Mode { sigma: BLANK, h: 0, r: 0, t: 0 })
    }

    fn index(self, i: usize, j: usize, u: usize, w: usize) -> usize {
        ((i * (self.l + 1) + j) * self.half() + u) * self.half() + w
    }

    fn split(self, c: usize) -> (usize, usize, usize, usize) {
        let w = c % self.half();
        let rest = c / self.half();
        let u = rest % self.half();
        let ij = rest / self.half();
        (ij / (self.l + 1), ij % (self.l + 1), u, w)
    }

    fn tick(self, u: usize) -> usize {
        let c = self.clock();
        u / c * c + (u % c + 1) % c
    }

    /// Endpoint `(tau, k, 0, 0)` of a run.
    fn end(self, sigma: usize) -> usize {
        self.pack(Mode { sigma, h: self.k, r: 0, t: 0 })
    }
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

pub(crate) fn level(k: usize, l: usize) -> Result<QqafLevel, QqaError> {
    let shape = Shape { k, l };
    if k == 0 || l == 0 {
        return Err(QqaError::Invalid("multdup needs k >= 1 and l >= 1".to_string()));
    }
    let dim = (k + 1)
        .checked_mul(l + 1)
        .and_then(|d| d.checked_mul(shape.half()))
        .and_then(|d| d.checked_mul(shape.half()))
        .filter(|&d| d <= MAX_DIM)
        .ok_or_else(|| QqaError::Capacity(format!("multdup basis for k={k}, l={l} exceeds {MAX_DIM} states")))?;
    let mode_regs = |suffix: &str| {
        vec![
            Register::labeled(&format!("sigma{suffix}"), &TAPE),
            Register::range(&format!("h{suffix}"), 0, k as i64),
            Register::range(&format!("r{suffix}"), 0, l as i64),
            Register::range(&format!("t{suffix}"), 0, shape.clock() as i64 - 1),
        ]
    };
    let mut regs = vec![Register::range("i", 0, k as i64), Register::range("j", 0, l as i64)];
    regs.extend(mode_regs(""));
    regs.extend(mode_regs("'"));
    let basis = BasisIndex::new(regs)?;
    let xi0 = shape.xi0();

    let keep = partial_map(dim, move |c| {
        let (i, j, u, w) = shape.split(c);
        (u == xi0).then(|| shape.index(i, j, shape.tick(u), w))
    });
    let swap = partial_map(dim, move |c| {
        let (i, j, u, w) = shape.split(c);
        (u != xi0).then(|| shape.index(i, j, shape.tick(w), u))
    });

    // `letter = Some(d)` for a block letter, `None` for `#` or `$`; `hash` advances the block counter.
    let symbol = move |letter: Option<usize>, hash: bool| {
        SparseOp::permutation(dim, move |c| {
            let (i, j, u, w) = shape.split(c);
            if w != xi0 {
                return c;
            }
            let mut m = shape.unpack(u);
            if let Some(d) = letter {
                if i >= 1 && j >= 1 && m.r + 1 == j {
                    if m.h == 0 {
                        m.sigma = swap_pair(m.sigma, BLANK, d);
                    } else if m.h == i {
                        m.sigma = swap_pair(m.sigma, BLANK, 1 - d);
                    }
                }
            }
            if hash {
                m.h = (m.h + 1) % (k + 1);
            }
            m.r = (m.r + 1) % (l + 1);
            m.t = (m.t + 1) % shape.clock();
            shape.index(i, j, shape.pack(m), w)
        })
    };

    let kraus = BTreeMap::from([
        (Symbol::Left, vec![keep, swap]),
        (Symbol::Letter('0'), vec![symbol(Some(0), false)?]),
        (Symbol::Letter('1'), vec![symbol(Some(1), false)?]),
        (Symbol::Letter('#'), vec![symbol(None, true)?]),
        (Symbol::Right, vec![symbol(None, false)?]),
    ]);
    let lambda0 = InitialMixture::identity_except(shape.index(0, 0, xi0, xi0), 0.5);
    let halting = witness_pairs(k, l).map(|(i, j)| shape.index(i, j, shape.end(BLANK), xi0)).collect();
    QqafLevel::new(basis, vec!['0', '1', '#'], kraus, lambda0, halting)
}

fn witness_pairs(k: usize, l: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=k).flat_map(move |i| (1..=l).map(move |j| (i, j)))
}

fn cached(k: usize, l: usize) -> Result<Arc<Level>, AeqsError> {
    LEVELS.get((k, l), || Ok(Level::Qqaf(level(k, l)?)))
}

fn params_or_err(x: &str) -> Result<(usize, usize), AeqsError> {
    params(x).ok_or_else(|| AeqsError::Input {
        input: x.to_string(),
        reason: "not of the form w_0#...#w_k with equal positive block lengths".to_string(),
    })
}

/// Promised inputs with `1 <= k <= k_max` and `1 <= l <= l_max`.
pub fn promised_inputs(k_max: usize, l_max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for l in 1..=l_max {
            let bits = l * (k + 1);
            for code in 0u64..1 << bits {
                let s: String = (0..bits).map(|b| if code >> (bits - 1 - b) & 1 == 1 { '1' } else { '0' }).collect();
                let blocks: Vec<&str> = (0..=k).map(|i| &s[i * l..(i + 1) * l]).collect();
                let x = blocks.join("#");
                if oracle::multdup(&x) != Membership::NotPromised {
                    out.push(x);
                }
            }
        }
    }
    out
}

pub(crate) fn entry() -> GalleryEntry {
    let selector = Selector::new("<k,l>", |x| {
        params(x).map_or(0, |(k, l)| {
            let (k, l) = (k as u64, l as u64);
            (k + l) * (k + l + 1) / 2 + l
        })
    });
    let family = AeqsFamily::new("multdup", vec!['0', '1', '#'], selector, |x| {
        let (k, l) = params_or_err(x)?;
        let level = cached(k, l)?;
        let Level::Qqaf(level) = level.as_ref() else { unreachable!("multdup levels are one-way Kraus levels") };
        let shape = Shape { k, l };
        let xi0 = shape.xi0();
        let anchors: Vec<usize> = std::iter::once((0, 0))
            .chain(witness_pairs(k, l))
            .map(|(i, j)| shape.index(i, j, xi0, xi0))
            .collect();
        let g = generate_anchored_qqaf(level, x, &anchors, &EigenSettings::from_env())?;
        let accept = witness_pairs(k, l).map(|(i, j)| shape.index(i, j, shape.end(BLANK), xi0)).collect();
        let reject = vec![shape.index(0, 0, shape.end(BLANK), xi0)];
        AeqsInstance::new(g.basis, DEFAULT_EPSILON, Hamiltonian::uniform_complement(shape.dim()), g.hamiltonian, accept, reject)
    })
    .with_promise(|x| oracle::multdup(x) != Membership::NotPromised)
    .with_tags(&["1qqaf", "logsize", "constgap"]);
    GalleryEntry {
        name: "multdup".to_string(),
        family,
        oracle: Arc::new(oracle::multdup),
        orientation: Orientation::Inverted,
        expectations: vec![
            Expectation::new("differing block: energy 0", |x| {
                (oracle::multdup(x) == Membership::No).then_some(Spectral { energy: 0.0, gap_at_least: None })
            }),
            Expectation::new("all blocks equal: energy 1/2, gap 1/2", |x| {
                (oracle::multdup(x) == Membership::Yes).then_some(Spectral { energy: 0.5, gap_at_least: Some(0.5) })
            }),
        ],
        notes: "Guess a witness (i, j); remember the j-th letter of w_0 and blank the register when the j-th letter of w_i differs. Accepting states are inequality witnesses, so the verbatim entry accepts the non-members."
            .to_string(),
        level: Some(Arc::new(|x| {
            let (k, l) = params_or_err(x)?;
            cached(k, l)
        })),
        inputs: Arc::new(|b| match b {
            Bounds::Params(_) => Ok(promised_inputs(b.param("k")?, b.param("l")?)),
            Bounds::MaxLen(n) => Ok(strings_up_to(&['0', '1', '#'], *n)),
        }),
    }
}
