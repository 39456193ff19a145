use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::linalg::{EigenSettings, C64};

use super::basis::{BasisIndex, Register};
use super::op::{Rest, SparseOp};
use super::validate::{family_defect, FamilyCheck, ValidationReport, VALIDATION_TOL};
use super::{InitialMixture, QqaError, Symbol};

fn check_indices(indices: &[usize], dim: usize) -> Result<(), QqaError> {
    match indices.iter().find(|&&i| i >= dim) {
        Some(&index) => Err(QqaError::IndexOutOfRange { index, dim }),
        None => Ok(()),
    }
}

fn check_dims<'a>(ops: impl IntoIterator<Item = &'a SparseOp>, dim: usize) -> Result<(), QqaError> {
    for op in ops {
        if op.dim() != dim {
            return Err(QqaError::DimensionMismatch { expected: dim, found: op.dim() });
        }
    }
    Ok(())
}

fn report(checks: Vec<FamilyCheck>) -> ValidationReport {
    ValidationReport { checks, tolerance: VALIDATION_TOL }
}

fn require(report: &ValidationReport) -> Result<(), QqaError> {
    match report.failures().next() {
        None => Ok(()),
        Some(f) => Err(QqaError::Invalid(format!("{}: defect {:.3e}", f.label, f.defect))),
    }
}

/// One machine of a one-way measure-once quasi-automaton family.
#[derive(Debug, Clone)]
pub struct MoqqafLevel {
    pub basis: BasisIndex,
    pub alphabet: Vec<char>,
    pub unitaries: BTreeMap<Symbol, SparseOp>,
    pub lambda0: InitialMixture,
    pub halting: Vec<usize>,
    checked: OnceLock<Option<String>>,
}

impl MoqqafLevel {
    pub fn new(
        basis: BasisIndex,
        alphabet: Vec<char>,
        unitaries: BTreeMap<Symbol, SparseOp>,
        lambda0: InitialMixture,
        halting: Vec<usize>,
    ) -> Result<Self, QqaError> {
        let dim = basis.size();
        check_dims(unitaries.values(), dim)?;
        lambda0.check(dim)?;
        check_indices(&halting, dim)?;
        Ok(Self { basis, alphabet, unitaries, lambda0, halting, checked: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.basis.size()
    }

    pub fn validate(&self, settings: &EigenSettings) -> Result<ValidationReport, QqaError> {
        let checks = self
            .unitaries
            .iter()
            .map(|(s, u)| Ok(FamilyCheck { label: format!("U[{s}]"), defect: family_defect(std::slice::from_ref(u), settings)? }))
            .collect::<Result<_, QqaError>>()?;
        Ok(report(checks))
    }

    /// Validates on first use; later calls reuse the verdict.
    pub(crate) fn ensure_valid(&self, settings: &EigenSettings) -> Result<(), QqaError> {
        ensure_cached(&self.checked, || self.validate(settings))
    }
}

fn ensure_cached(
    cell: &OnceLock<Option<String>>,
    run: impl FnOnce() -> Result<ValidationReport, QqaError>,
) -> Result<(), QqaError> {
    if let Some(verdict) = cell.get() {
        return verdict.clone().map_or(Ok(()), |m| Err(QqaError::Invalid(m)));
    }
    let verdict = match require(&run()?) {
        Ok(()) => None,
        Err(QqaError::Invalid(m)) => Some(m),
        Err(e) => return Err(e),
    };
    let verdict = cell.get_or_init(|| verdict);
    verdict.clone().map_or(Ok(()), |m| Err(QqaError::Invalid(m)))
}

/// One machine of a one-way quasi-automaton family with Kraus families per symbol.
#[derive(Debug, Clone)]
pub struct QqafLevel {
    pub basis: BasisIndex,
    pub alphabet: Vec<char>,
    pub kraus: BTreeMap<Symbol, Vec<SparseOp>>,
    pub lambda0: InitialMixture,
    pub halting: Vec<usize>,
    checked: OnceLock<Option<String>>,
}

impl QqafLevel {
    pub fn new(
        basis: BasisIndex,
        alphabet: Vec<char>,
        kraus: BTreeMap<Symbol, Vec<SparseOp>>,
        lambda0: InitialMixture,
        halting: Vec<usize>,
    ) -> Result<Self, QqaError> {
        let dim = basis.size();
        check_dims(kraus.values().flatten(), dim)?;
        lambda0.check(dim)?;
        check_indices(&halting, dim)?;
        Ok(Self { basis, alphabet, kraus, lambda0, halting, checked: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.basis.size()
    }

    pub fn validate(&self, settings: &EigenSettings) -> Result<ValidationReport, QqaError> {
        let checks = self
            .kraus
            .iter()
            .map(|(s, fam)| Ok(FamilyCheck { label: format!("K[{s}]"), defect: family_defect(fam, settings)? }))
            .collect::<Result<_, QqaError>>()?;
        Ok(report(checks))
    }

    pub(crate) fn ensure_valid(&self, settings: &EigenSettings) -> Result<(), QqaError> {
        ensure_cached(&self.checked, || self.validate(settings))
    }
}

impl From<&MoqqafLevel> for QqafLevel {
    fn from(m: &MoqqafLevel) -> Self {
        Self {
            basis: m.basis.clone(),
            alphabet: m.alphabet.clone(),
            kraus: m.unitaries.iter().map(|(s, u)| (*s, vec![u.clone()])).collect(),
            lambda0: m.lambda0.clone(),
            halting: m.halting.clone(),
            checked: OnceLock::new(),
        }
    }
}

/// Allowed head moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveSet {
    TwoWay,
    /// Only `0` and `+1`.
    OneAndHalf,
}

impl MoveSet {
    pub fn allows(self, step: i64) -> bool {
        match self {
            Self::TwoWay => (-1..=1).contains(&step),
            Self::OneAndHalf => (0..=1).contains(&step),
        }
    }
}

/// Number of step applications as a function of the input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCount {
    Fixed(usize),
    Linear { per_symbol: usize, constant: usize },
}

impl StepCount {
    pub fn count(self, len: usize) -> usize {
        match self {
            Self::Fixed(t) => t,
            Self::Linear { per_symbol, constant } => per_symbol * len + constant,
        }
    }
}

/// `<to, h + step| K_branch |from, h>` when the head reads `symbol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub symbol: Symbol,
    pub to: usize,
    pub step: i64,
    pub branch: usize,
    pub amplitude: C64,
}

/// Two-way transition function over inner states; everything else is lifted to surface
/// configurations `(q, h)` with `h` in `0..=|x|+1`.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    pub inner: Register,
    pub branches: usize,
    pub entries: Vec<Transition>,
    /// Kraus family on inner states, applied once before stepping.
    pub first_step: Vec<SparseOp>,
    /// Values at head position 0; other positions take the background.
    pub lambda0: InitialMixture,
    pub halting: Vec<usize>,
    pub anchors: Vec<usize>,
}

/// Concrete operators of a two-way level for one input.
#[derive(Debug, Clone)]
pub struct TwoWayFamilies {
    pub basis: BasisIndex,
    pub first_step: Vec<SparseOp>,
    pub step: Vec<SparseOp>,
    pub lambda0: InitialMixture,
    pub halting: Vec<usize>,
    /// Designated start configurations for anchored generation.
    pub anchors: Vec<usize>,
}

pub type KrausBuilder = Arc<dyn Fn(&str) -> Result<TwoWayFamilies, QqaError> + Send + Sync>;

#[derive(Clone)]
pub enum TwoWayKraus {
    Table(TransitionTable),
    Builder(KrausBuilder),
}

impl fmt::Debug for TwoWayKraus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Self::Builder(_) => f.write_str("Builder"),
        }
    }
}

/// One machine of a two-way quasi-automaton family.
#[derive(Debug, Clone)]
pub struct TwoWayQqafLevel {
    pub alphabet: Vec<char>,
    pub kraus: TwoWayKraus,
    pub steps: StepCount,
    pub moves: MoveSet,
}

impl TwoWayQqafLevel {
    pub fn instantiate(&self, x: &str) -> Result<TwoWayFamilies, QqaError> {
        let symbols = super::tape(&self.alphabet, x)?;
        let fams = match &self.kraus {
            TwoWayKraus::Builder(build) => build(x)?,
            TwoWayKraus::Table(table) => self.lift_table(table, &symbols)?,
        };
        let dim = fams.basis.size();
        check_dims(fams.first_step.iter().chain(&fams.step), dim)?;
        fams.lambda0.check(dim)?;
        check_indices(&fams.halting, dim)?;
        check_indices(&fams.anchors, dim)?;
        Ok(fams)
    }

    fn lift_table(&self, table: &TransitionTable, symbols: &[Symbol]) -> Result<TwoWayFamilies, QqaError> {
        let inner = table.inner.radix();
        let width = symbols.len();
        let basis = BasisIndex::new(vec![table.inner.clone(), Register::range("h", 0, width as i64 - 1)])?;
        let dim = basis.size();
        let at = |q: usize, h: usize| q * width + h;
        let mut step: Vec<BTreeMap<usize, Vec<(usize, C64)>>> = vec![BTreeMap::new(); table.branches];
        for t in &table.entries {
            if !self.moves.allows(t.step) {
                return Err(QqaError::ForbiddenMove { step: t.step, symbol: t.symbol });
            }
            if t.from >= inner || t.to >= inner {
                return Err(QqaError::IndexOutOfRange { index: t.from.max(t.to), dim: inner });
            }
            if t.branch >= table.branches {
                return Err(QqaError::IndexOutOfRange { index: t.branch, dim: table.branches });
            }
            for (h, _) in symbols.iter().enumerate().filter(|(_, s)| **s == t.symbol) {
                let target = (h as i64 + t.step).rem_euclid(width as i64) as usize;
                step[t.branch].entry(at(t.from, h)).or_default().push((at(t.to, target), t.amplitude));
            }
        }
        let step = step
            .into_iter()
            .map(|cols| SparseOp::from_columns(dim, cols, Rest::Zero))
            .collect::<Result<Vec<_>, _>>()?;
        check_dims(&table.first_step, inner)?;
        let first_step = table
            .first_step
            .iter()
            .map(|k| {
                let cols = (0..dim)
                    .map(|c| {
                        let (q, h) = (c / width, c % width);
                        (c, k.column(q).into_iter().map(|(p, a)| (at(p, h), a)).collect())
                    })
                    .collect();
                SparseOp::from_columns(dim, cols, Rest::Zero)
            })
            .collect::<Result<Vec<_>, _>>()?;
        table.lambda0.check(inner)?;
        let lambda0 = InitialMixture {
            background: table.lambda0.background,
            overrides: table.lambda0.overrides.iter().map(|(&q, &v)| (at(q, 0), v)).collect(),
        };
        check_indices(&table.halting, inner)?;
        check_indices(&table.anchors, inner)?;
        Ok(TwoWayFamilies {
            basis,
            first_step,
            step,
            lambda0,
            halting: table.halting.iter().flat_map(|&q| (0..width).map(move |h| at(q, h))).collect(),
            anchors: table.anchors.iter().map(|&q| at(q, 0)).collect(),
        })
    }

    /// Completeness of both Kraus families on the configuration space of `x`.
    pub fn validate(&self, x: &str, settings: &EigenSettings) -> Result<ValidationReport, QqaError> {
        let fams = self.instantiate(x)?;
        validate_families(&fams, x, settings)
    }
}

pub(crate) fn validate_families(fams: &TwoWayFamilies, x: &str, settings: &EigenSettings) -> Result<ValidationReport, QqaError> {
    let checks = vec![
        FamilyCheck { label: format!("K[¢] on \"{x}\""), defect: family_defect(&fams.first_step, settings)? },
        FamilyCheck { label: format!("K on \"{x}\""), defect: family_defect(&fams.step, settings)? },
    ];
    Ok(report(checks))
}

pub(crate) fn ensure_families_valid(fams: &TwoWayFamilies, x: &str, settings: &EigenSettings) -> Result<(), QqaError> {
    require(&validate_families(fams, x, settings)?)
}

#[derive(Debug, Clone)]
pub enum Level {
    Moqqaf(MoqqafLevel),
    Qqaf(QqafLevel),
    TwoWay(TwoWayQqafLevel),
}

impl Level {
    /// Unitarity or completeness defects per symbol; two-way levels are checked on each
    /// of `probes` since their operators depend on the input.
    pub fn validate(&self, probes: &[&str], settings: &EigenSettings) -> Result<ValidationReport, QqaError> {
        match self {
            Self::Moqqaf(l) => l.validate(settings),
            Self::Qqaf(l) => l.validate(settings),
            Self::TwoWay(l) => {
                let mut checks = Vec::new();
                for x in probes {
                    checks.extend(l.validate(x, settings)?.checks);
                }
                Ok(report(checks))
            }
        }
    }
}
