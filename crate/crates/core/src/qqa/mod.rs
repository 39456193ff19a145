//! Quantum quasi-automata: machine levels and the Hamiltonians they generate from inputs.

mod basis;
mod channel;
pub mod completion;
mod expr;
mod generate;
mod level;
mod op;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::LinalgError;

pub use basis::{ceil_log2, BasisIndex, Register};
pub use expr::parse_amplitude;
pub use generate::{
    drop_right_endmarker, generate_2qqaf, generate_anchored_2qqaf, generate_anchored_qqaf, generate_moqqaf, generate_qqaf,
    GeneratedHamiltonian,
};
pub use level::{
    KrausBuilder, Level, MoqqafLevel, MoveSet, QqafLevel, StepCount, Transition, TransitionTable, TwoWayFamilies,
    TwoWayKraus, TwoWayQqafLevel,
};
pub use op::{Columns, Rest, SparseOp, SparseVec};
pub use validate::{family_defect, FamilyCheck, ValidationReport, VALIDATION_TOL};

#[derive(Debug, Error)]
pub enum QqaError {
    #[error("symbol '{symbol}' at position {position} is not in the alphabet")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("no operator for symbol {0}")]
    MissingOperator(Symbol),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("value {value} out of range for register '{register}' (radix {radix})")]
    CoordinateOutOfRange { register: String, value: usize, radix: usize },
    #[error("cannot complete operator: {0}")]
    Completion(String),
    #[error("column {column} has squared norm {norm_sq}, exceeding 1")]
    NotIsometric { column: usize, norm_sq: f64 },
    #[error("bad amplitude expression '{input}': {message}")]
    Expression { input: String, message: String },
    #[error("level failed validation: {0}")]
    Invalid(String),
    #[error("head move {step} at symbol {symbol} is not allowed")]
    ForbiddenMove { step: i64, symbol: Symbol },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Tape symbol: the endmarkers or a letter of the input alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Left,
    Letter(char),
    Right,
}

impl Symbol {
    /// Parses `¢`/`cent`, `$`/`dollar` or a single letter.
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "¢" | "cent" => Some(Self::Left),
            "$" | "dollar" => Some(Self::Right),
            _ => {
                let mut it = text.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Some(Self::Letter(c)),
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Left => write!(f, "¢"),
            Self::Letter(c) => write!(f, "{c}"),
            Self::Right => write!(f, "$"),
        }
    }
}

/// `¢ x $` as symbols, checking every letter against `alphabet`.
pub fn tape(alphabet: &[char], x: &str) -> Result<Vec<Symbol>, QqaError> {
    let mut out = vec![Symbol::Left];
    for (position, symbol) in x.chars().enumerate() {
        if !alphabet.contains(&symbol) {
            return Err(QqaError::UnknownSymbol { symbol, position });
        }
        out.push(Symbol::Letter(symbol));
    }
    out.push(Symbol::Right);
    Ok(out)
}

/// Maps an input to the index `n` of the machine that processes it.
#[derive(Clone)]
pub struct Selector {
    pub name: String,
    eval: Arc<dyn Fn(&str) -> u64 + Send + Sync>,
}

impl Selector {
    pub fn new(name: &str, eval: impl Fn(&str) -> u64 + Send + Sync + 'static) -> Self {
        Self { name: name.to_string(), eval: Arc::new(eval) }
    }

    pub fn length() -> Self {
        Self::new("|x|", |x| x.chars().count() as u64)
    }

    pub fn constant(n: u64) -> Self {
        Self::new(&format!("const {n}"), move |_| n)
    }

    pub fn apply(&self, x: &str) -> u64 {
        (self.eval)(x)
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Selector").field(&self.name).finish()
    }
}

/// Diagonal initial mixture: `background` everywhere except the listed basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialMixture {
    pub background: f64,
    pub overrides: BTreeMap<usize, f64>,
}

impl InitialMixture {
    pub fn uniform(value: f64) -> Self {
        Self { background: value, overrides: BTreeMap::new() }
    }

    /// `I - (1 - value)|u><u|`.
    pub fn identity_except(index: usize, value: f64) -> Self {
        Self { background: 1.0, overrides: BTreeMap::from([(index, value)]) }
    }

    pub fn value(&self, index: usize) -> f64 {
        self.overrides.get(&index).copied().unwrap_or(self.background)
    }

    pub fn is_psd(&self) -> bool {
        self.background >= 0.0 && self.overrides.values().all(|&v| v >= 0.0)
    }

    pub(crate) fn check(&self, dim: usize) -> Result<(), QqaError> {
        if let Some((&i, _)) = self.overrides.iter().find(|(&i, _)| i >= dim) {
            return Err(QqaError::IndexOutOfRange { index: i, dim });
        }
        if !self.is_psd() {
            return Err(QqaError::Invalid("initial mixture has a negative value".to_string()));
        }
        Ok(())
    }

    pub(crate) fn to_operator_sum(&self, dim: usize) -> channel::OperatorSum {
        let mut rho = channel::OperatorSum::scalar(dim, self.background);
        for (&i, &v) in &self.overrides {
            let d = v - self.background;
            if d != 0.0 {
                rho.rank_one.push((d, SparseVec::from([(i, crate::linalg::C64::new(1.0, 0.0))])));
            }
        }
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tape_brackets_input() {
        let t = tape(&['0', '1'], "10").unwrap();
        assert_eq!(t, vec![Symbol::Left, Symbol::Letter('1'), Symbol::Letter('0'), Symbol::Right]);
        assert!(matches!(tape(&['0'], "02"), Err(QqaError::UnknownSymbol { symbol: '2', position: 1 })));
    }

    #[test]
    fn symbol_aliases() {
        assert_eq!(Symbol::parse("cent"), Some(Symbol::Left));
        assert_eq!(Symbol::parse("$"), Some(Symbol::Right));
        assert_eq!(Symbol::parse("ab"), None);
    }
}
