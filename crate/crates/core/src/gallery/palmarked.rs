//! Marked palindromes `w#w^R` with a linear-time two-way machine on a circular tape.

use std::sync::Arc;

use crate::aeqs::{AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::linalg::{EigenSettings, Hamiltonian, C64};
use crate::qqa::completion::complete_kraus;
use crate::qqa::{
    generate_anchored_2qqaf, BasisIndex, Columns, InitialMixture, KrausBuilder, Level, MoveSet, QqaError, Register, Selector,
    StepCount, TwoWayFamilies, TwoWayKraus, TwoWayQqafLevel,
};

use super::{length_sweep, oracle, partial_map, Expectation, GalleryEntry, Orientation, Spectral};

pub const MAX_LEN: usize = 64;

const STATES: usize = 5;
const PHASES: usize = 3;
/// Inner states `q1..q5` as digits `0..5`.
const Q1: usize = 0;

/// Initial weight of the start configuration.
pub const START_WEIGHT: f64 = 1.0 / 25.0;

/// `IND = (Q x [0,2] x [0,n+1])^2`, index `u * T + w` with `u = (q*3 + k)*(n+2) + h`.
#[derive(Clone, Copy)]
struct Shape {
    n: usize,
}

impl Shape {
    fn heads(self) -> usize {
        self.n + 2
    }

    fn half(self) -> usize {
        STATES * PHASES * self.heads()
    }

    fn dim(self) -> usize {
        self.half() * self.half()
    }

    fn triple(self, q: usize, k: usize, h: usize) -> usize {
        (q * PHASES + k) * self.heads() + h
    }

    fn xi0(self) -> usize {
        self.triple(Q1, 1, 0)
    }

    fn active(self, q: usize, k: usize, h: usize) -> usize {
        self.triple(q, k, h) * self.half() + self.xi0()
    }

    fn advance(self, u: usize) -> usize {
        let h = self.heads();
        u / h * h + (u % h + 1) % h
    }
}

/// Columns of `U_a` and `U_b` on `{q1, q2, q3}`: `[column][row]`.
fn letter_unitary(c: char) -> [[f64; 3]; 3] {
    let (p, m) = (0.8, 0.6);
    match c {
        'a' => [[p, -m, 0.0], [m, p, 0.0], [0.0, 0.0, 1.0]],
        'b' => [[p, 0.0, -m], [0.0, 1.0, 0.0], [m, 0.0, p]],
        _ => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

fn inverse(u: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for (c, col) in u.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            t[r][c] = v;
        }
    }
    t
}

fn push(cols: &mut Columns, from: usize, to: usize, amp: f64) {
    cols.entry(from).or_default().push((to, C64::new(amp, 0.0)));
}

/// Operator families for one input.
pub(crate) fn families(x: &str) -> Result<TwoWayFamilies, QqaError> {
    let symbols: Vec<char> = x.chars().collect();
    let n = symbols.len();
    if n > MAX_LEN {
        return Err(QqaError::Capacity(format!("pal_marked is built for inputs up to length {MAX_LEN}")));
    }
    let shape = Shape { n };
    let last = shape.heads() - 1;
    let triple_regs = |suffix: &str| {
        vec![
            Register::labeled(&format!("q{suffix}"), &["q1", "q2", "q3", "q4", "q5"]),
            Register::range(&format!("k{suffix}"), 0, 2),
            Register::range(&format!("h{suffix}"), 0, last as i64),
        ]
    };
    let mut regs = triple_regs("");
    regs.extend(triple_regs("'"));
    let basis = BasisIndex::new(regs)?;
    let dim = shape.dim();
    let (half, xi0) = (shape.half(), shape.xi0());

    let keep = partial_map(dim, move |c| (c / half == xi0).then(|| shape.advance(xi0) * half + c % half));
    let swap = partial_map(dim, move |c| {
        let (u, w) = (c / half, c % half);
        (u != xi0).then(|| shape.advance(w) * half + u)
    });

    let marker = symbols.iter().position(|&c| c == '#').map_or(n, |p| p + 1);
    let mut k1 = Columns::new();
    let mut k2 = Columns::new();
    let at = |q, k, h| shape.active(q, k, h);
    for q in 0..3 {
        push(&mut k1, at(q, 1, 0), at(q, 1, 1), 1.0);
    }
    for h in 1..=n {
        let u = letter_unitary(symbols[h - 1]);
        let u = if h <= marker { u } else { inverse(u) };
        for (q, col) in u.iter().enumerate() {
            for (p, &v) in col.iter().enumerate() {
                if v != 0.0 {
                    push(&mut k1, at(q, 1, h), at(p, 1, h + 1), v);
                }
            }
        }
    }
    push(&mut k1, at(Q1, 1, last), at(Q1, 0, 0), 1.0);
    let stay = 1.0 / 25.0;
    let leave = 4.0 * 39f64.sqrt() / 25.0;
    for i in [1, 2] {
        push(&mut k1, at(i, 1, last), at(i, 2, 0), 1.0);
        for h in 0..last {
            push(&mut k1, at(i, 2, h), at(i, 2, h + 1), stay);
            push(&mut k2, at(i, 2, h), at(i + 2, 2, h + 1), leave);
        }
        push(&mut k1, at(i, 2, last), at(i + 2, 0, 0), 1.0);
        for h in 0..=last {
            let next = (h + 1) % shape.heads();
            push(&mut k1, at(i + 2, 2, h), at(i + 2, 2, next), 1.0);
            push(&mut k2, at(i + 2, 0, h), at(i + 2, 0, next), 1.0);
        }
    }
    for h in 0..=last {
        push(&mut k2, at(Q1, 0, h), at(Q1, 0, (h + 1) % shape.heads()), 1.0);
    }
    let sector: Vec<usize> = (0..half).map(|u| u * half + xi0).collect();
    let step = complete_kraus(dim, Some(&sector), vec![k1, k2])?;

    let start = xi0 * half + xi0;
    Ok(TwoWayFamilies {
        basis,
        first_step: vec![keep, swap],
        step,
        lambda0: InitialMixture::identity_except(start, START_WEIGHT),
        halting: Vec::new(),
        anchors: vec![start],
    })
}

pub(crate) fn level() -> TwoWayQqafLevel {
    let build: KrausBuilder = Arc::new(families);
    TwoWayQqafLevel {
        alphabet: vec!['a', 'b', '#'],
        kraus: TwoWayKraus::Builder(build),
        steps: StepCount::Linear { per_symbol: 2, constant: 3 },
        moves: MoveSet::TwoWay,
    }
}

/// Accepting and rejecting configurations for inputs of length `n`.
pub fn criteria(n: usize) -> (Vec<usize>, Vec<usize>) {
    let shape = Shape { n };
    (vec![shape.active(Q1, 0, 0)], vec![shape.active(3, 0, 0), shape.active(4, 0, 0)])
}

pub(crate) fn entry() -> GalleryEntry {
    let machine = Arc::new(level());
    let for_family = machine.clone();
    let family = AeqsFamily::new("pal_marked", vec!['a', 'b', '#'], Selector::length(), move |x| {
        let g = generate_anchored_2qqaf(&for_family, x, &EigenSettings::from_env())?;
        let (accept, reject) = criteria(x.chars().count());
        let dim = g.basis.size();
        AeqsInstance::new(g.basis, DEFAULT_EPSILON, Hamiltonian::uniform_complement(dim), g.hamiltonian, accept, reject)
    })
    .with_tags(&["ltime-2qqaf", "logsize"]);
    GalleryEntry {
        name: "pal_marked".to_string(),
        family,
        oracle: Arc::new(oracle::pal_marked),
        orientation: Orientation::Direct,
        expectations: vec![Expectation::new("member: energy 1/25, gap 24/25", |x| {
            (oracle::pal_marked(x) == super::Membership::Yes).then_some(Spectral { energy: 1.0 / 25.0, gap_at_least: Some(24.0 / 25.0) })
        })],
        notes: "First phase rotates q1 by the 3-4-5 unitaries before the marker and undoes them after it; second phase leaks q2, q3 into q4, q5 with weight 1/625 per step. Non-member ground energies are of order 625^-(n+1), so sweeps beyond length 3 are below numerical resolution."
            .to_string(),
        level: Some(Arc::new(move |_| Ok(Arc::new(Level::TwoWay((*machine).clone()))))),
        inputs: length_sweep(vec!['a', 'b', '#']),
    }
}
