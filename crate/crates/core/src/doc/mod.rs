//! JSON documents: machine descriptions and exported Hamiltonians.

mod hamiltonian;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aeqs::{AeqsError, AeqsFamily, AeqsInstance, DEFAULT_EPSILON};
use crate::compilers::{from_garbage_1qfa, from_moqfa, CompileError, GarbageQfaSpec, GarbageTransition, MoQfaSpec};
use crate::linalg::{EigenSettings, Hamiltonian, C64};
use crate::qqa::{
    generate_2qqaf, generate_anchored_2qqaf, generate_anchored_qqaf, generate_moqqaf, generate_qqaf, parse_amplitude, BasisIndex,
    Columns, GeneratedHamiltonian, InitialMixture, MoqqafLevel, MoveSet, QqaError, QqafLevel, Register, Rest, Selector, SparseOp,
    StepCount, Symbol, Transition, TransitionTable, TwoWayKraus, TwoWayQqafLevel,
};

pub use hamiltonian::{DirectionDoc, HamiltonianDoc, RankOneDoc};

/// Version written to and required from every document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Qqa(#[from] QqaError),
    #[error(transparent)]
    Aeqs(#[from] AeqsError),
}

impl From<serde_json::Error> for DocError {
    fn from(e: serde_json::Error) -> Self {
        Self::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn field_error(field: impl Into<String>, message: impl fmt::Display) -> DocError {
    DocError::Field { field: field.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MachineKind {
    Moqqaf,
    Qqaf,
    TwowayQqaf,
    Moqfa,
    #[serde(rename = "garbage-1qfa")]
    Garbage1qfa,
}

/// A register value written either as text or as an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Int(i64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Text(s) => f.write_str(s),
            Self::Int(i) => write!(f, "{i}"),
        }
    }
}

pub type Coord = Vec<Label>;

/// An amplitude: a number or an expression such as `"4*sqrt(39)/25"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Number(f64),
    Expr(String),
}

impl Amplitude {
    fn value(&self, field: &str) -> Result<C64, DocError> {
        match self {
            Self::Number(v) => Ok(C64::new(*v, 0.0)),
            Self::Expr(s) => parse_amplitude(s).map_err(|e| field_error(field, e)),
        }
    }

    fn real(&self, field: &str) -> Result<f64, DocError> {
        let v = self.value(field)?;
        if v.im != 0.0 {
            return Err(field_error(field, "must be real"));
        }
        Ok(v.re)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub row: Coord,
    pub col: Coord,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestDoc {
    #[default]
    Zero,
    Identity,
}

/// Listed entries; unlisted columns follow `rest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    #[serde(default)]
    pub rest: RestDoc,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub symbol: String,
    pub to: String,
    #[serde(default)]
    pub step: i64,
    #[serde(default)]
    pub branch: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garbage: Option<char>,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda0Doc {
    #[serde(default = "Lambda0Doc::one")]
    pub background: Amplitude,
    #[serde(default)]
    pub entries: Vec<Lambda0Entry>,
}

impl Lambda0Doc {
    fn one() -> Amplitude {
        Amplitude::Number(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda0Entry {
    pub at: Coord,
    pub value: Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsDoc {
    #[serde(default)]
    pub per_symbol: usize,
    #[serde(default)]
    pub constant: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MovesDoc {
    #[default]
    TwoWay,
    OneAndHalf,
}

/// Machine family description shared by every kind; fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpecDocument {
    pub schema: u32,
    pub kind: MachineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alphabet: String,
    pub registers: Vec<RegisterDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, OperatorDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kraus: BTreeMap<String, Vec<OperatorDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub first_step: Vec<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<Lambda0Doc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub halting: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Coord>,
    #[serde(default)]
    pub accept: Vec<Coord>,
    #[serde(default)]
    pub reject: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garbage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<StepsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moves: Option<MovesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// A validated document, ready to build instances.
#[derive(Debug, Clone)]
pub enum Machine {
    Moqqaf(Criteria<MoqqafLevel>),
    Qqaf(Criteria<QqafLevel>),
    TwoWay(Criteria<TwoWayQqafLevel>),
    Moqfa(MoQfaSpec),
    Garbage(GarbageQfaSpec),
}

/// A quasi-automaton level with its decision criteria, resolved per input against the basis.
#[derive(Debug, Clone)]
pub struct Criteria<L> {
    pub name: String,
    pub level: L,
    pub anchors: Vec<usize>,
    pub accept: Vec<Coord>,
    pub reject: Vec<Coord>,
    pub epsilon: f64,
}

impl MachineSpecDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema != SCHEMA_VERSION {
            return Err(field_error("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", doc.schema)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    fn alphabet(&self) -> Vec<char> {
        self.alphabet.chars().collect()
    }

    fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
    }

    fn basis(&self) -> Result<BasisIndex, DocError> {
        if self.registers.is_empty() {
            return Err(field_error("registers", "at least one register is required"));
        }
        let regs = self
            .registers
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let field = format!("registers[{i}]");
                match (&r.labels, r.range) {
                    (Some(labels), None) => {
                        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                        Ok(Register::labeled(&r.name, &refs))
                    }
                    (None, Some((lo, hi))) if lo <= hi => Ok(Register::range(&r.name, lo, hi)),
                    (None, Some(_)) => Err(field_error(field, "empty range")),
                    _ => Err(field_error(field, "give exactly one of `labels` and `range`")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BasisIndex::new(regs)?)
    }

    fn epsilon(&self) -> Result<f64, DocError> {
        match self.epsilon {
            Some(e) if !(0.0..=1.0).contains(&e) => Err(field_error("epsilon", "must lie in [0, 1]")),
            Some(e) => Ok(e),
            None => Ok(DEFAULT_EPSILON),
        }
    }

    fn symbol(key: &str, field: &str) -> Result<Symbol, DocError> {
        Symbol::parse(key).ok_or_else(|| field_error(field, format!("'{key}' is not a tape symbol")))
    }

    fn operator(basis: &BasisIndex, op: &OperatorDoc, field: &str) -> Result<SparseOp, DocError> {
        let mut cols = Columns::new();
        for (i, e) in op.entries.iter().enumerate() {
            let f = format!("{field}.entries[{i}]");
            let row = encode(basis, &e.row, &f)?;
            let col = encode(basis, &e.col, &f)?;
            cols.entry(col).or_default().push((row, e.amplitude.value(&f)?));
        }
        let rest = match op.rest {
            RestDoc::Zero => Rest::Zero,
            RestDoc::Identity => Rest::Identity,
        };
        Ok(SparseOp::from_columns(basis.size(), cols, rest)?)
    }

    fn lambda0(&self, basis: &BasisIndex) -> Result<InitialMixture, DocError> {
        let Some(doc) = &self.lambda0 else { return Err(field_error("lambda0", "required for this kind")) };
        let mut out = InitialMixture::uniform(doc.background.real("lambda0.background")?);
        for (i, e) in doc.entries.iter().enumerate() {
            let f = format!("lambda0.entries[{i}]");
            out.overrides.insert(encode(basis, &e.at, &f)?, e.value.real(&f)?);
        }
        Ok(out)
    }

    fn coords(basis: &BasisIndex, coords: &[Coord], field: &str) -> Result<Vec<usize>, DocError> {
        coords.iter().enumerate().map(|(i, c)| encode(basis, c, &format!("{field}[{i}]"))).collect()
    }

    fn criteria<L>(&self, level: L, anchors: Vec<usize>) -> Result<Criteria<L>, DocError> {
        Ok(Criteria { name: self.name(), level, anchors, accept: self.accept.clone(), reject: self.reject.clone(), epsilon: self.epsilon()? })
    }

    fn states(&self) -> Result<Vec<String>, DocError> {
        match self.registers.as_slice() {
            [RegisterDoc { labels: Some(labels), range: None, .. }] => Ok(labels.clone()),
            _ => Err(field_error("registers", "this kind takes a single labelled register of states")),
        }
    }

    fn state_index(states: &[String], label: &str, field: &str) -> Result<usize, DocError> {
        states.iter().position(|s| s == label).ok_or_else(|| field_error(field, format!("unknown state '{label}'")))
    }

    fn state_list(states: &[String], coords: &[Coord], field: &str) -> Result<Vec<usize>, DocError> {
        coords
            .iter()
            .enumerate()
            .map(|(i, c)| match c.as_slice() {
                [l] => Self::state_index(states, &l.to_string(), &format!("{field}[{i}]")),
                _ => Err(field_error(format!("{field}[{i}]"), "expected one state label")),
            })
            .collect()
    }

    fn initial_state(&self, states: &[String]) -> Result<usize, DocError> {
        let c = self.initial.as_ref().ok_or_else(|| field_error("initial", "required for this kind"))?;
        Ok(Self::state_list(states, std::slice::from_ref(c), "initial")?[0])
    }

    /// Validates the document and builds the machine it describes.
    pub fn machine(&self) -> Result<Machine, DocError> {
        let alphabet = self.alphabet();
        match self.kind {
            MachineKind::Moqqaf => {
                let basis = self.basis()?;
                let unitaries = self
                    .operators
                    .iter()
                    .map(|(k, op)| {
                        let f = format!("operators.{k}");
                        Ok((Self::symbol(k, &f)?, Self::operator(&basis, op, &f)?))
                    })
                    .collect::<Result<BTreeMap<_, _>, DocError>>()?;
                let lambda0 = self.lambda0(&basis)?;
                let halting = Self::coords(&basis, &self.halting, "halting")?;
                let level = MoqqafLevel::new(basis, alphabet, unitaries, lambda0, halting)?;
                Ok(Machine::Moqqaf(self.criteria(level, Vec::new())?))
            }
            MachineKind::Qqaf => {
                let basis = self.basis()?;
                let kraus = self
                    .kraus
                    .iter()
                    .map(|(k, ops)| {
                        let sym = Self::symbol(k, &format!("kraus.{k}"))?;
                        let fam = ops
                            .iter()
                            .enumerate()
                            .map(|(j, op)| Self::operator(&basis, op, &format!("kraus.{k}[{j}]")))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok((sym, fam))
                    })
                    .collect::<Result<BTreeMap<_, _>, DocError>>()?;
                let lambda0 = self.lambda0(&basis)?;
                let halting = Self::coords(&basis, &self.halting, "halting")?;
                let anchors = Self::coords(&basis, &self.anchors, "anchors")?;
                let level = QqafLevel::new(basis, alphabet, kraus, lambda0, halting)?;
                Ok(Machine::Qqaf(self.criteria(level, anchors)?))
            }
            MachineKind::TwowayQqaf => self.two_way(alphabet),
            MachineKind::Moqfa => {
                let states = self.states()?;
                let basis = self.basis()?;
                let mut unitaries = BTreeMap::new();
                for (k, op) in &self.operators {
                    let f = format!("operators.{k}");
                    unitaries.insert(Self::symbol(k, &f)?, Self::operator(&basis, op, &f)?.to_dense());
                }
                let initial = self.initial_state(&states)?;
                let accept = Self::state_list(&states, &self.accept, "accept")?;
                let reject = Self::state_list(&states, &self.reject, "reject")?;
                let mut spec = MoQfaSpec::new(states, alphabet, unitaries, initial, accept, reject)?;
                if let Some(b) = self.error_bound {
                    spec = spec.with_error_bound(b)?;
                }
                Ok(Machine::Moqfa(spec))
            }
            MachineKind::Garbage1qfa => {
                let states = self.states()?;
                let garbage: Vec<char> = self.garbage.as_deref().ok_or_else(|| field_error("garbage", "required for this kind"))?.chars().collect();
                let mut transitions: BTreeMap<Symbol, Vec<GarbageTransition>> = BTreeMap::new();
                for (i, t) in self.transitions.iter().enumerate() {
                    let f = format!("transitions[{i}]");
                    let xi = t.garbage.ok_or_else(|| field_error(&f, "`garbage` symbol is required"))?;
                    let g = garbage.iter().position(|&c| c == xi).ok_or_else(|| field_error(&f, format!("'{xi}' is not a garbage symbol")))?;
                    transitions.entry(Self::symbol(&t.symbol, &f)?).or_default().push(GarbageTransition {
                        from: Self::state_index(&states, &t.from, &f)?,
                        to: Self::state_index(&states, &t.to, &f)?,
                        garbage: g,
                        amplitude: t.amplitude.value(&f)?,
                    });
                }
                let initial = self.initial_state(&states)?;
                let accept = Self::state_list(&states, &self.accept, "accept")?;
                let reject = Self::state_list(&states, &self.reject, "reject")?;
                let mut spec = GarbageQfaSpec::new(states, alphabet, garbage, transitions, initial, accept, reject)?;
                if let Some(b) = self.error_bound {
                    spec = spec.with_error_bound(b)?;
                }
                Ok(Machine::Garbage(spec))
            }
        }
    }

    /// Inner states from the single register; configurations add the head `h` in `0..=|x|+1`.
    fn two_way(&self, alphabet: Vec<char>) -> Result<Machine, DocError> {
        let states = self.states()?;
        let inner_basis = self.basis()?;
        let inner = inner_basis.registers()[0].clone();
        let mut branches = 1;
        let mut entries = Vec::new();
        for (i, t) in self.transitions.iter().enumerate() {
            let f = format!("transitions[{i}]");
            branches = branches.max(t.branch + 1);
            entries.push(Transition {
                from: Self::state_index(&states, &t.from, &f)?,
                symbol: Self::symbol(&t.symbol, &f)?,
                to: Self::state_index(&states, &t.to, &f)?,
                step: t.step,
                branch: t.branch,
                amplitude: t.amplitude.value(&f)?,
            });
        }
        let first_step = self
            .first_step
            .iter()
            .enumerate()
            .map(|(j, op)| Self::operator(&inner_basis, op, &format!("first_step[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let steps = self.steps.ok_or_else(|| field_error("steps", "required for this kind"))?;
        let table = TransitionTable {
            inner,
            branches,
            entries,
            first_step,
            lambda0: self.lambda0(&inner_basis)?,
            halting: Self::coords(&inner_basis, &self.halting, "halting")?,
            anchors: Self::coords(&inner_basis, &self.anchors, "anchors")?,
        };
        let anchors = table.anchors.clone();
        let level = TwoWayQqafLevel {
            alphabet,
            kraus: TwoWayKraus::Table(table),
            steps: StepCount::Linear { per_symbol: steps.per_symbol, constant: steps.constant },
            moves: match self.moves.unwrap_or_default() {
                MovesDoc::TwoWay => MoveSet::TwoWay,
                MovesDoc::OneAndHalf => MoveSet::OneAndHalf,
            },
        };
        Ok(Machine::TwoWay(self.criteria(level, anchors)?))
    }
}

fn encode(basis: &BasisIndex, coord: &Coord, field: &str) -> Result<usize, DocError> {
    if coord.len() != basis.registers().len() {
        return Err(field_error(field, format!("expected {} coordinates, got {}", basis.registers().len(), coord.len())));
    }
    let labels: Vec<String> = coord.iter().map(Label::to_string).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    basis.encode_labels(&refs).map_err(|e| field_error(field, e))
}

impl<L> Criteria<L> {
    fn instance(&self, g: GeneratedHamiltonian) -> Result<AeqsInstance, AeqsError> {
        let resolve = |coords: &[Coord], field: &str| {
            MachineSpecDocument::coords(&g.basis, coords, field).map_err(|e| AeqsError::InvalidInstance(e.to_string()))
        };
        let accept = resolve(&self.accept, "accept")?;
        let reject = resolve(&self.reject, "reject")?;
        let dim = g.basis.size();
        AeqsInstance::new(g.basis, self.epsilon, Hamiltonian::uniform_complement(dim), g.hamiltonian, accept, reject)
    }
}

impl Machine {
    pub fn name(&self) -> String {
        match self {
            Self::Moqqaf(c) => c.name.clone(),
            Self::Qqaf(c) => c.name.clone(),
            Self::TwoWay(c) => c.name.clone(),
            Self::Moqfa(_) => "moqfa".to_string(),
            Self::Garbage(_) => "garbage-1qfa".to_string(),
        }
    }

    /// The AEQS family: compiled automata through the compilers, quasi-automata with
    /// `H_ini = I - |u><u|` (`u` uniform) and the generated `H_fin`.
    pub fn family(&self) -> Result<AeqsFamily, DocError> {
        let settings = EigenSettings::from_env;
        let family = match self {
            Self::Moqfa(spec) => from_moqfa(spec)?,
            Self::Garbage(spec) => from_garbage_1qfa(spec)?,
            Self::Moqqaf(c) => {
                let (name, alphabet) = (c.name.clone(), c.level.alphabet.clone());
                let c = Arc::new(c.clone());
                AeqsFamily::new(&name, alphabet, Selector::constant(0), move |x| {
                    c.instance(generate_moqqaf(&c.level, x, &settings())?)
                })
                .with_tags(&["1moqqaf", "document"])
            }
            Self::Qqaf(c) => {
                let (name, alphabet) = (c.name.clone(), c.level.alphabet.clone());
                let c = Arc::new(c.clone());
                AeqsFamily::new(&name, alphabet, Selector::constant(0), move |x| {
                    let g = if c.anchors.is_empty() {
                        generate_qqaf(&c.level, x, &settings())?
                    } else {
                        generate_anchored_qqaf(&c.level, x, &c.anchors, &settings())?
                    };
                    c.instance(g)
                })
                .with_tags(&["1qqaf", "document"])
            }
            Self::TwoWay(c) => {
                let (name, alphabet) = (c.name.clone(), c.level.alphabet.clone());
                let c = Arc::new(c.clone());
                AeqsFamily::new(&name, alphabet, Selector::length(), move |x| {
                    let g = if c.anchors.is_empty() {
                        generate_2qqaf(&c.level, x, &settings())?
                    } else {
                        generate_anchored_2qqaf(&c.level, x, &settings())?
                    };
                    c.instance(g)
                })
                .with_tags(&["2qqaf", "document"])
            }
        };
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeqs::{decide, Outcome};

    const PARITY: &str = r#"{
  "schema": 1,
  "kind": "moqfa",
  "name": "parity",
  "alphabet": "01",
  "registers": [{"name": "q", "labels": ["even", "odd"]}],
  "operators": {
    "0": {"rest": "identity", "entries": []},
    "1": {"entries": [
      {"row": ["odd"], "col": ["even"], "amplitude": 1},
      {"row": ["even"], "col": ["odd"], "amplitude": "1"}
    ]}
  },
  "initial": ["even"],
  "accept": [["even"]],
  "reject": [["odd"]]
}"#;

    const IDENTITY: &str = r#"{
  "schema": 1,
  "kind": "moqqaf",
  "alphabet": "a",
  "registers": [{"name": "q", "labels": ["q0", "q1"]}, {"name": "h", "range": [0, 1]}],
  "operators": {"a": {"rest": "identity", "entries": []}},
  "lambda0": {"background": 1, "entries": [{"at": ["q0", 0], "value": "1/3"}]},
  "accept": [["q0", 0]],
  "reject": [["q1", 1]]
}"#;

    #[test]
    fn parity_document_compiles() {
        let family = MachineSpecDocument::parse(PARITY).unwrap().machine().unwrap().family().unwrap();
        let inst = family.build("11").unwrap();
        let v = decide(&inst, &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!((v.spectral_gap - 1.0).abs() < 1e-9);
        assert_eq!(family.decide("1", &EigenSettings::default()).unwrap().outcome, Outcome::Reject);
    }

    #[test]
    fn identity_moqqaf_gives_lambda0() {
        let family = MachineSpecDocument::parse(IDENTITY).unwrap().machine().unwrap().family().unwrap();
        let inst = family.build("aa").unwrap();
        let d = inst.h_fin.to_dense();
        let expected = crate::linalg::DenseMatrix::from_real_diagonal(&[1.0 / 3.0, 1.0, 1.0, 1.0]);
        assert!(d.max_diff(&expected) < 1e-15);
        assert_eq!(decide(&inst, &EigenSettings::default()).unwrap().outcome, Outcome::Accept);
    }

    #[test]
    fn document_round_trips() {
        let doc = MachineSpecDocument::parse(IDENTITY).unwrap();
        assert_eq!(MachineSpecDocument::parse(&doc.to_json()).unwrap(), doc);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = MachineSpecDocument::parse("{\n  \"schema\": 1,\n  \"kind\": \"nope\"\n}").unwrap_err();
        assert!(matches!(err, DocError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn field_errors_name_the_field() {
        let text = PARITY.replace("\"amplitude\": \"1\"", "\"amplitude\": \"sqrt(\"");
        let err = MachineSpecDocument::parse(&text).unwrap().machine().unwrap_err();
        assert!(err.to_string().contains("operators.1.entries[1]"), "{err}");
        let text = PARITY.replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(MachineSpecDocument::parse(&text), Err(DocError::Field { .. })));
    }

    #[test]
    fn non_unitary_document_reports_defect() {
        let text = PARITY.replace("{\"row\": [\"even\"], \"col\": [\"odd\"], \"amplitude\": \"1\"}", "{\"row\": [\"odd\"], \"col\": [\"odd\"], \"amplitude\": \"1\"}");
        let err = MachineSpecDocument::parse(&text).unwrap().machine().unwrap_err();
        assert!(matches!(err, DocError::Compile(CompileError::NotUnitary { .. })), "{err}");
    }

    #[test]
    fn garbage_document() {
        let text = r#"{
  "schema": 1,
  "kind": "garbage-1qfa",
  "alphabet": "01",
  "registers": [{"name": "q", "labels": ["p0", "p1"]}],
  "garbage": "g",
  "transitions": [
    {"from": "p0", "symbol": "0", "to": "p0", "garbage": "g", "amplitude": 1},
    {"from": "p1", "symbol": "0", "to": "p1", "garbage": "g", "amplitude": 1},
    {"from": "p0", "symbol": "1", "to": "p1", "garbage": "g", "amplitude": 1},
    {"from": "p1", "symbol": "1", "to": "p0", "garbage": "g", "amplitude": 1}
  ],
  "initial": ["p0"],
  "accept": [["p0"]],
  "reject": [["p1"]]
}"#;
        let family = MachineSpecDocument::parse(text).unwrap().machine().unwrap().family().unwrap();
        let s = EigenSettings::default();
        assert_eq!(family.decide("0110", &s).unwrap().outcome, Outcome::Accept);
        assert_eq!(family.decide("010", &s).unwrap().outcome, Outcome::Reject);
    }

    #[test]
    fn two_way_document() {
        // Sweeps right and stays in q0; accepting at (q0, 0) after |x|+2 steps.
        let text = r#"{
  "schema": 1,
  "kind": "twoway-qqaf",
  "alphabet": "a",
  "registers": [{"name": "q", "labels": ["q0", "q1"]}],
  "first_step": [{"rest": "identity", "entries": []}],
  "transitions": [
    {"from": "q0", "symbol": "¢", "to": "q0", "step": 1, "amplitude": 1},
    {"from": "q0", "symbol": "a", "to": "q0", "step": 1, "amplitude": 1},
    {"from": "q0", "symbol": "$", "to": "q0", "step": 1, "amplitude": 1},
    {"from": "q1", "symbol": "¢", "to": "q1", "step": 1, "amplitude": 1},
    {"from": "q1", "symbol": "a", "to": "q1", "step": 1, "amplitude": 1},
    {"from": "q1", "symbol": "$", "to": "q1", "step": 1, "amplitude": 1}
  ],
  "steps": {"per_symbol": 1, "constant": 2},
  "lambda0": {"entries": [{"at": ["q0"], "value": 0}]},
  "accept": [["q0", 0]],
  "reject": [["q1", 0]]
}"#;
        let family = MachineSpecDocument::parse(text).unwrap().machine().unwrap().family().unwrap();
        let v = family.decide("aa", &EigenSettings::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Accept);
        assert!(v.ground_energy.abs() < 1e-12);
    }
}
