use std::collections::BTreeMap;

use crate::linalg::{EigenSettings, Hamiltonian, C64};

use super::basis::{ceil_log2, BasisIndex};
use super::channel::OperatorSum;
use super::level::{ensure_families_valid, MoqqafLevel, QqafLevel, TwoWayQqafLevel};
use super::op::{SparseOp, SparseVec};
use super::{tape, InitialMixture, QqaError, Symbol};

/// Relative eigenvalue cutoff for the reachable range in anchored generation.
const RANGE_TOL: f64 = 1e-14;

/// `E` for one input, with the basis schema it acts on.
#[derive(Debug, Clone)]
pub struct GeneratedHamiltonian {
    pub hamiltonian: Hamiltonian,
    pub basis: BasisIndex,
    pub qubits: u32,
    /// Trace of the evolved mixture before the halting projection.
    pub trace_before_projection: f64,
    pub provenance: String,
}

fn finish(mut rho: OperatorSum, halting: &[usize], basis: &BasisIndex, provenance: String) -> Result<GeneratedHamiltonian, QqaError> {
    let trace_before_projection = rho.trace();
    rho.project_out(halting);
    Ok(GeneratedHamiltonian {
        hamiltonian: rho.into_hamiltonian()?,
        qubits: ceil_log2(basis.size()),
        basis: basis.clone(),
        trace_before_projection,
        provenance,
    })
}

/// `E = Pi_0 U Lambda_0 U^dagger Pi_0` with `U = U_$ U_{x_n} ... U_{x_1} U_¢`.
///
/// Endmarker operators that the level omits act as the identity.
pub fn generate_moqqaf(level: &MoqqafLevel, x: &str, settings: &EigenSettings) -> Result<GeneratedHamiltonian, QqaError> {
    level.ensure_valid(settings)?;
    let mut rho = level.lambda0.to_operator_sum(level.dim());
    for symbol in tape(&level.alphabet, x)? {
        match level.unitaries.get(&symbol) {
            Some(u) => rho = rho.apply_family(std::slice::from_ref(u), true),
            None if symbol == Symbol::Left || symbol == Symbol::Right => {}
            None => return Err(QqaError::MissingOperator(symbol)),
        }
    }
    finish(rho, &level.halting, &level.basis, format!("moqqaf on \"{x}\""))
}

fn one_way_families<'a>(level: &'a QqafLevel, x: &str) -> Result<Vec<&'a [SparseOp]>, QqaError> {
    let mut out = Vec::new();
    for symbol in tape(&level.alphabet, x)? {
        match level.kraus.get(&symbol) {
            Some(fam) => out.push(fam.as_slice()),
            None if symbol == Symbol::Left || symbol == Symbol::Right => {}
            None => return Err(QqaError::MissingOperator(symbol)),
        }
    }
    Ok(out)
}

/// `E = Pi_0 A_{¢x$}(Lambda_0) Pi_0` with `A_sigma(rho) = sum_j K_{sigma,j} rho K_{sigma,j}^dagger`.
pub fn generate_qqaf(level: &QqafLevel, x: &str, settings: &EigenSettings) -> Result<GeneratedHamiltonian, QqaError> {
    level.ensure_valid(settings)?;
    let mut rho = level.lambda0.to_operator_sum(level.dim());
    for fam in one_way_families(level, x)? {
        rho = rho.apply_family(fam, false);
    }
    finish(rho, &level.halting, &level.basis, format!("qqaf on \"{x}\""))
}

/// `E = Pi_0 A^t(sum_i K_{¢,i} Lambda_0 K_{¢,i}^dagger) Pi_0` with `t = steps(|x|)`.
pub fn generate_2qqaf(level: &TwoWayQqafLevel, x: &str, settings: &EigenSettings) -> Result<GeneratedHamiltonian, QqaError> {
    let fams = level.instantiate(x)?;
    ensure_families_valid(&fams, x, settings)?;
    let mut rho = fams.lambda0.to_operator_sum(fams.basis.size()).apply_family(&fams.first_step, false);
    for _ in 0..level.steps.count(x.chars().count()) {
        rho = rho.apply_family(&fams.step, false);
    }
    finish(rho, &fams.halting, &fams.basis, format!("2qqaf on \"{x}\""))
}

/// Hamiltonian seen from designated start configurations only.
///
/// With `S` the anchors, `rho_S = A(sum_s |s><s|)` and `rho_L = A(sum_s Lambda_0(s)|s><s|)`,
/// the result is `I - P_range(rho_S) + Pi_0 rho_L Pi_0`: configurations reached from an
/// anchor carry the energy transported from it, everything else has energy 1.
#[allow(clippy::too_many_arguments)]
fn anchored<'a>(
    dim: usize,
    lambda0: &InitialMixture,
    anchors: &[usize],
    families: impl IntoIterator<Item = &'a [SparseOp]>,
    halting: &[usize],
    basis: &BasisIndex,
    provenance: String,
    settings: &EigenSettings,
) -> Result<GeneratedHamiltonian, QqaError> {
    let mut reach = OperatorSum::scalar(dim, 0.0);
    let mut weight = OperatorSum::scalar(dim, 0.0);
    for &s in anchors {
        let e = SparseVec::from([(s, C64::new(1.0, 0.0))]);
        reach.rank_one.push((1.0, e.clone()));
        let v = lambda0.value(s);
        if v != 0.0 {
            weight.rank_one.push((v, e));
        }
    }
    for fam in families {
        reach = reach.apply_family(fam, false);
        weight = weight.apply_family(fam, false);
    }
    let projector = reach.range_projector(RANGE_TOL, settings)?;
    let trace_before_projection = weight.trace();
    weight.project_out(halting);
    weight.fold_rank_one();
    let mut e = OperatorSum::scalar(dim, 1.0);
    e.entries = weight.entries;
    for (r, c, v) in projector {
        e.add_entry(r, c, -v);
        if r != c {
            e.add_entry(c, r, -v.conj());
        }
    }
    e.entries.retain(|_, v| v.norm() > 1e-15);
    Ok(GeneratedHamiltonian {
        hamiltonian: e.into_hamiltonian()?,
        qubits: ceil_log2(basis.size()),
        basis: basis.clone(),
        trace_before_projection,
        provenance,
    })
}

/// Anchored variant of [`generate_qqaf`] started from `anchors`.
pub fn generate_anchored_qqaf(
    level: &QqafLevel,
    x: &str,
    anchors: &[usize],
    settings: &EigenSettings,
) -> Result<GeneratedHamiltonian, QqaError> {
    level.ensure_valid(settings)?;
    let fams = one_way_families(level, x)?;
    anchored(level.dim(), &level.lambda0, anchors, fams, &level.halting, &level.basis, format!("anchored qqaf on \"{x}\""), settings)
}

/// Anchored variant of [`generate_2qqaf`] started from the level's designated configurations.
pub fn generate_anchored_2qqaf(level: &TwoWayQqafLevel, x: &str, settings: &EigenSettings) -> Result<GeneratedHamiltonian, QqaError> {
    let fams = level.instantiate(x)?;
    ensure_families_valid(&fams, x, settings)?;
    let steps = level.steps.count(x.chars().count());
    let seq = std::iter::once(fams.first_step.as_slice()).chain(std::iter::repeat(fams.step.as_slice()).take(steps));
    anchored(
        fams.basis.size(),
        &fams.lambda0,
        &fams.anchors,
        seq,
        &fams.halting,
        &fams.basis,
        format!("anchored 2qqaf on \"{x}\""),
        settings,
    )
}

/// Equivalent level without a right endmarker: `U'_¢ = U_$ U_¢`, `U'_sigma = U_$ U_sigma U_$^dagger`.
pub fn drop_right_endmarker(level: &MoqqafLevel) -> Result<MoqqafLevel, QqaError> {
    let Some(dollar) = level.unitaries.get(&Symbol::Right) else {
        return Ok(level.clone());
    };
    let dagger = dollar.adjoint();
    let mut unitaries = BTreeMap::new();
    for (&s, u) in &level.unitaries {
        match s {
            Symbol::Right => {}
            Symbol::Left => {
                unitaries.insert(s, dollar.compose(u)?);
            }
            Symbol::Letter(_) => {
                unitaries.insert(s, dollar.compose(u)?.compose(&dagger)?);
            }
        }
    }
    unitaries.entry(Symbol::Left).or_insert_with(|| dollar.clone());
    MoqqafLevel::new(level.basis.clone(), level.alphabet.clone(), unitaries, level.lambda0.clone(), level.halting.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::qqa::op::Rest;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hadamard_level() -> MoqqafLevel {
        let s = 0.5f64.sqrt();
        let h = SparseOp::from_dense(&DenseMatrix::from_rows(vec![vec![c(s), c(s)], vec![c(s), c(-s)]]).unwrap()).unwrap();
        let x = SparseOp::permutation(2, |i| 1 - i).unwrap();
        let unitaries = BTreeMap::from([(Symbol::Left, h.clone()), (Symbol::Letter('a'), x), (Symbol::Right, h)]);
        MoqqafLevel::new(
            BasisIndex::flat("q", 2).unwrap(),
            vec!['a'],
            unitaries,
            InitialMixture::identity_except(0, 0.0),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn identity_level_reproduces_lambda0() {
        let lambda0 = InitialMixture::identity_except(1, 0.25);
        let level = MoqqafLevel::new(
            BasisIndex::flat("q", 3).unwrap(),
            vec!['a'],
            BTreeMap::from([(Symbol::Letter('a'), SparseOp::identity(3))]),
            lambda0,
            vec![],
        )
        .unwrap();
        let e = generate_moqqaf(&level, "aa", &EigenSettings::default()).unwrap().hamiltonian.to_dense();
        assert_eq!(e.max_diff(&DenseMatrix::from_real_diagonal(&[1.0, 0.25, 1.0])), 0.0);
    }

    #[test]
    fn hadamard_pair_spectrum_is_preserved() {
        let s = EigenSettings::default();
        let g = generate_moqqaf(&hadamard_level(), "a", &s).unwrap();
        // H X H = Z, so the zero-energy state stays |0>... up to the sign flip: Z|0> = |0>.
        let e = g.hamiltonian.to_dense();
        assert!((e[(0, 0)].re - 0.0).abs() < 1e-12);
        assert!((e[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((g.trace_before_projection - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_kraus_matches_moqqaf() {
        let s = EigenSettings::default();
        let level = hadamard_level();
        let q = QqafLevel::from(&level);
        for x in ["", "a", "aa", "aaa"] {
            let a = generate_moqqaf(&level, x, &s).unwrap().hamiltonian.to_dense();
            let b = generate_qqaf(&q, x, &s).unwrap().hamiltonian.to_dense();
            assert!(a.max_diff(&b) < 1e-12, "{x}");
        }
    }

    #[test]
    fn dropping_dollar_keeps_hamiltonians() {
        let s = EigenSettings::default();
        let level = hadamard_level();
        let dropped = drop_right_endmarker(&level).unwrap();
        assert!(!dropped.unitaries.contains_key(&Symbol::Right));
        for x in ["", "a", "aa", "aaa"] {
            let a = generate_moqqaf(&level, x, &s).unwrap().hamiltonian.to_dense();
            let b = generate_moqqaf(&dropped, x, &s).unwrap().hamiltonian.to_dense();
            assert!(a.max_diff(&b) < 1e-12, "{x}");
        }
    }

    #[test]
    fn halting_projection_zeroes_rows() {
        let mut level = hadamard_level();
        level.halting = vec![1];
        let e = generate_moqqaf(&level, "", &EigenSettings::default()).unwrap().hamiltonian.to_dense();
        assert_eq!(e[(1, 1)], c(0.0));
        assert_eq!(e[(0, 1)], c(0.0));
    }

    #[test]
    fn anchored_unreached_states_cost_one() {
        // A damping channel sending 1 -> 0; anchor 1 with Lambda_0 value 0.5.
        let k0 = SparseOp::from_columns(3, BTreeMap::from([(1, vec![])]), Rest::Identity).unwrap();
        let k1 = SparseOp::from_columns(3, BTreeMap::from([(1, vec![(0, c(1.0))])]), Rest::Zero).unwrap();
        let level = QqafLevel::new(
            BasisIndex::flat("q", 3).unwrap(),
            vec!['a'],
            BTreeMap::from([(Symbol::Letter('a'), vec![k0, k1])]),
            InitialMixture::identity_except(1, 0.5),
            vec![],
        )
        .unwrap();
        let g = generate_anchored_qqaf(&level, "a", &[1], &EigenSettings::default()).unwrap();
        let e = g.hamiltonian.to_dense();
        assert!((e[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((e[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((e[(2, 2)].re - 1.0).abs() < 1e-12);
    }
}
