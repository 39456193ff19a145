use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aeqs_core::aeqs::{complement, decide, time_bound_from, AeqsInstance, Outcome, TimeBoundParams};
use aeqs_core::compilers::random::{random_isometry, random_moqfa};
use aeqs_core::compilers::{from_moqfa, run_moqfa};
use aeqs_core::doc::HamiltonianDoc;
use aeqs_core::evolve::{
    evolve_trace, midpoint_propagator, phase_shift_product, trotter_error, trotter_product, EvolveSettings, Method, Schedule,
};
use aeqs_core::gallery;
use aeqs_core::linalg::{hadamard_power, DenseMatrix, Direction, EigenSettings, Hamiltonian, RankOne, SparseHermitian, C64};
use aeqs_core::numfmt::{fmt_sig, round_sig};
use aeqs_core::qqa::{generate_moqqaf, BasisIndex, InitialMixture, MoqqafLevel, Register, SparseOp, Symbol};

fn random_hermitian(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let a = DenseMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    DenseMatrix::from_fn(n, n, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5)
}

fn flat_instance(h_ini: &DenseMatrix, h_fin: &DenseMatrix, accept: Vec<usize>, reject: Vec<usize>) -> AeqsInstance {
    AeqsInstance::new(
        BasisIndex::flat("q", h_ini.rows()).unwrap(),
        0.9,
        Hamiltonian::from_dense(h_ini, 1e-10).unwrap(),
        Hamiltonian::from_dense(h_fin, 1e-10).unwrap(),
        accept,
        reject,
    )
    .unwrap()
}

fn hadamard_diagonal(k: u32, rng: &mut impl Rng) -> DenseMatrix {
    let w = hadamard_power(k, &EigenSettings::default()).unwrap();
    let d: Vec<f64> = (0..1usize << k).map(|_| rng.gen_range(0.0..2.0)).collect();
    w.matmul(&DenseMatrix::from_real_diagonal(&d)).unwrap().matmul(&w).unwrap()
}

fn sorted_spectrum(h: &Hamiltonian) -> Vec<f64> {
    h.full_eigen(&EigenSettings::default()).unwrap().values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitary_conjugation_keeps_the_spectrum(seed in any::<u64>(), dim in 1usize..7, x in "[ab]{0,5}") {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unitaries: BTreeMap<Symbol, SparseOp> = [Symbol::Left, Symbol::Letter('a'), Symbol::Letter('b'), Symbol::Right]
            .into_iter()
            .map(|s| (s, SparseOp::from_dense(&random_isometry(dim, dim, &mut rng)).unwrap()))
            .collect();
        let mut overrides = BTreeMap::new();
        for i in 0..dim {
            if rng.gen() {
                overrides.insert(i, rng.gen_range(0.0..1.0));
            }
        }
        let lambda0 = InitialMixture { background: 1.0, overrides };
        let level = MoqqafLevel::new(BasisIndex::flat("q", dim).unwrap(), vec!['a', 'b'], unitaries, lambda0.clone(), vec![]).unwrap();
        let e = generate_moqqaf(&level, &x, &EigenSettings::default()).unwrap().hamiltonian;
        let mut want: Vec<f64> = (0..dim).map(|i| lambda0.value(i)).collect();
        want.sort_by(f64::total_cmp);
        let got = sorted_spectrum(&e);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-8, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn compiled_verdicts_are_consistent(seed in any::<u64>(), states in 1usize..5, x in "[ab]{0,5}") {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_moqfa(states, &['a', 'b'], &mut rng).unwrap();
        let family = from_moqfa(&spec).unwrap();
        let s = EigenSettings::default();
        let v = family.decide(&x, &s).unwrap();
        prop_assert!(v.acc_overlap.powi(2) + v.rej_overlap.powi(2) <= 1.0 + 1e-9);
        let p = run_moqfa(&spec, &x).unwrap();
        prop_assert!((v.acc_overlap.powi(2) - p.accept).abs() <= 1e-9);
        prop_assert_eq!(complement(&complement(&family)).decide(&x, &s).unwrap(), v.clone());
        let flipped = complement(&family).decide(&x, &s).unwrap();
        prop_assert_eq!((flipped.acc_overlap, flipped.rej_overlap), (v.rej_overlap, v.acc_overlap));
    }

    #[test]
    fn scaling_h_fin_keeps_the_verdict(seed in any::<u64>(), n in 2usize..9, c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hf = random_hermitian(n, &mut rng);
        let inst = flat_instance(&DenseMatrix::identity(n), &hf, vec![0], vec![n - 1]);
        let scaled = AeqsInstance { h_fin: inst.h_fin.scaled(c), ..inst.clone() };
        let s = EigenSettings::default();
        let (a, b) = (decide(&inst, &s).unwrap(), decide(&scaled, &s).unwrap());
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert!((a.acc_overlap - b.acc_overlap).abs() <= 1e-8 && (a.rej_overlap - b.rej_overlap).abs() <= 1e-8);
        prop_assert!((b.ground_energy - c * a.ground_energy).abs() <= 1e-8 * c.max(1.0));
        prop_assert!((b.spectral_gap - c * a.spectral_gap).abs() <= 1e-8 * c.max(1.0));
    }

    #[test]
    fn time_bound_shrinks_as_the_gap_grows(norm in 0.1f64..10.0, g1 in 0.01f64..2.0, g2 in 0.01f64..2.0) {
        let p = TimeBoundParams::default();
        let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(time_bound_from(norm, hi, &p).unwrap() <= time_bound_from(norm, lo, &p).unwrap());
    }

    #[test]
    fn propagators_are_unitary_and_phase_matches_trotter(seed in any::<u64>(), k in 1u32..3, t in 0.1f64..10.0, r in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1usize << k;
        let inst = flat_instance(&hadamard_diagonal(k, &mut rng), &random_hermitian(n, &mut rng), vec![0], vec![]);
        let (st, schedule) = (EvolveSettings::default(), Schedule::new(t, r).unwrap());
        let id = DenseMatrix::identity(n);
        let mid = midpoint_propagator(&inst, &schedule, &st).unwrap();
        let trot = trotter_product(&inst, &schedule, &st).unwrap();
        let phase = phase_shift_product(&inst, &schedule, &st).unwrap();
        for u in [&mid, &trot, &phase] {
            prop_assert!(u.matmul(&u.adjoint()).unwrap().max_diff(&id) <= 1e-8);
        }
        prop_assert!(phase.max_diff(&trot) <= r as f64 * 1e-10);
    }

    #[test]
    fn trace_norms_stay_one(seed in any::<u64>(), n in 2usize..6, t in 0.0f64..6.0, r in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hi = Hamiltonian::uniform_complement(n).to_dense();
        let inst = flat_instance(&hi, &random_hermitian(n, &mut rng), vec![0], vec![]);
        let tr = evolve_trace(&inst, &Schedule::new(t, r).unwrap(), Method::Midpoint, &EvolveSettings::default()).unwrap();
        prop_assert_eq!(tr.records.len(), r);
        prop_assert!(tr.records.iter().all(|rec| (rec.norm - 1.0).abs() <= 1e-8));
    }

    #[test]
    fn hamiltonian_export_round_trips(seed in any::<u64>(), n in 1usize..8, shift in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sparse = SparseHermitian::from_dense(&random_hermitian(n, &mut rng), 0.0).unwrap();
        let mut dir: Vec<(usize, C64)> = Vec::new();
        for i in 0..n {
            if rng.gen() {
                dir.push((i, C64::new(rng.gen(), rng.gen())));
            }
        }
        let norm = dir.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        let mut terms = vec![RankOne { weight: -0.5, direction: Direction::Uniform }];
        if norm > 1e-3 {
            terms.push(RankOne { weight: rng.gen(), direction: Direction::Sparse(dir.into_iter().map(|(i, a)| (i, a / norm)).collect()) });
        }
        let h = Hamiltonian::from_parts(n, shift, sparse, terms).unwrap();
        let doc = HamiltonianDoc::from(&h);
        let text = serde_json::to_string(&doc).unwrap();
        let back: HamiltonianDoc = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_hamiltonian().unwrap().to_dense().max_diff(&h.to_dense()), 0.0);
    }

    #[test]
    fn printed_numbers_reparse(v in prop::num::f64::NORMAL) {
        prop_assert_eq!(fmt_sig(v).parse::<f64>().unwrap(), round_sig(v));
        prop_assert!(((round_sig(v) - v) / v).abs() <= 1e-11);
    }

    #[test]
    fn basis_index_round_trips(radices in prop::collection::vec(1usize..5, 1..5), pick in any::<u64>()) {
        let registers: Vec<Register> = radices.iter().enumerate().map(|(i, &r)| Register::range(&format!("r{i}"), 0, r as i64 - 1)).collect();
        let basis = BasisIndex::new(registers).unwrap();
        let index = (pick % basis.size() as u64) as usize;
        let digits = basis.decode(index);
        prop_assert!(digits.iter().zip(&radices).all(|(d, r)| d < r));
        prop_assert_eq!(basis.encode(&digits).unwrap(), index);
    }

    #[test]
    fn schedule_coefficients(t in 0.01f64..100.0, r in 1usize..500) {
        let s = Schedule::new(t, r).unwrap();
        for j in [0, r / 2, r - 1] {
            prop_assert!((s.alpha(j) + s.beta(j) - t / r as f64).abs() <= 1e-12 * t);
            prop_assert!((s.beta(j) - (2 * j + 1) as f64 * s.gamma()).abs() <= 1e-12 * t);
        }
    }
}

#[test]
fn trotter_error_shrinks_with_steps() {
    let inst = gallery::build("l_prefix").unwrap().family.build("01").unwrap();
    let st = EvolveSettings::default();
    let errors: Vec<f64> = [64, 128, 256, 512].iter().map(|&r| trotter_error(&inst, &Schedule::new(8.0, r).unwrap(), &st).unwrap()).collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{errors:?}");
}

#[test]
fn midpoint_and_trotter_agree_at_4096_steps() {
    let st = EvolveSettings::default();
    for (name, x) in [("l_prefix(0)", "01"), ("l_prefix(1)", "10"), ("equal", "ab"), ("equal", "aabb"), ("l_prefix(0)", "0110")] {
        let inst = gallery::build(name).unwrap().family.build(x).unwrap();
        assert!(inst.dim() <= 64);
        let schedule = Schedule::new(8.0, 4096).unwrap();
        let final_of = |m| aeqs_core::evolve::evolve_final(&inst, &schedule, m, &st).unwrap().final_overlap_sq;
        let (a, b) = (final_of(Method::Midpoint), final_of(Method::Trotter));
        assert!((a - b).abs() <= 5e-3, "{name} \"{x}\": {a} vs {b}");
    }
}

#[test]
fn every_expectation_is_exercised() {
    let s = EigenSettings::default();
    let sweeps: [(&str, &str); 7] = [
        ("l_prefix(0)", "4"),
        ("l_prefix(1)", "4"),
        ("equal", "4"),
        ("sym_coin", "4"),
        ("pal_marked", "3"),
        ("usubsum", "t<=3,k<=2,l<=2"),
        ("multdup", "k<=1,l<=2"),
    ];
    for (name, bounds) in sweeps {
        let entry = gallery::build(name).unwrap();
        let report = gallery::verify(&entry, &bounds.parse().unwrap(), &s).unwrap();
        for (label, hits) in &report.expectation_hits {
            assert!(*hits > 0, "{name}: expectation \"{label}\" never applied");
        }
        assert!(report.rows.iter().all(|r| r.expectation.as_ref().map_or(true, |(_, ok)| *ok)), "{name}");
        assert!(report.rows.iter().all(|r| r.verdict.as_ref().map_or(true, |v| v.outcome != Outcome::Indeterminate) || name == "multdup"));
    }
}
