//! Worked constructions, each paired with a classical oracle and its expected spectra.

mod equal;
mod lprefix;
mod multdup;
pub mod oracle;
mod palmarked;
mod symcoin;
mod usubsum;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::aeqs::{self, AeqsError, AeqsFamily, Outcome, Verdict};
use crate::linalg::{EigenSettings, C64};
use crate::qqa::{Level, SparseOp};

/// Tolerance for matching expected energies and gaps.
pub const SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("unknown gallery entry '{0}'")]
    UnknownEntry(String),
    #[error("bad bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Aeqs(#[from] AeqsError),
}

/// Classical answer for one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Yes,
    No,
    NotPromised,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Yes => "accept",
            Self::No => "reject",
            Self::NotPromised => "not-promised",
        })
    }
}

/// Whether the construction accepts the members of its language or the non-members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Direct,
    Inverted,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Self::Direct => Self::Inverted,
            Self::Inverted => Self::Direct,
        }
    }

    /// Verdict the construction should reach on an input with this membership.
    pub fn expected(self, m: Membership) -> Option<Outcome> {
        match (self, m) {
            (_, Membership::NotPromised) => None,
            (Self::Direct, Membership::Yes) | (Self::Inverted, Membership::No) => Some(Outcome::Accept),
            _ => Some(Outcome::Reject),
        }
    }
}

/// Expected ground energy and lower bound on the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectral {
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub energy: f64,
    pub gap_at_least: Option<f64>,
}

impl Spectral {
    pub fn holds(&self, energy: f64, gap: f64) -> bool {
        (energy - self.energy).abs() <= SPECTRAL_TOL && self.gap_at_least.map_or(true, |g| gap >= g - SPECTRAL_TOL)
    }
}

type SpectralRule = Arc<dyn Fn(&str) -> Option<Spectral> + Send + Sync>;

/// Labeled predicate on inputs with the spectrum it predicts.
#[derive(Clone)]
pub struct Expectation {
    pub label: String,
    rule: SpectralRule,
}

impl Expectation {
    pub fn new(label: &str, rule: impl Fn(&str) -> Option<Spectral> + Send + Sync + 'static) -> Self {
        Self { label: label.to_string(), rule: Arc::new(rule) }
    }

    pub fn applies(&self, x: &str) -> Option<Spectral> {
        (self.rule)(x)
    }
}

pub type Oracle = Arc<dyn Fn(&str) -> Membership + Send + Sync>;
pub type LevelSource = Arc<dyn Fn(&str) -> Result<Arc<Level>, AeqsError> + Send + Sync>;
type InputSource = Arc<dyn Fn(&Bounds) -> Result<Vec<String>, GalleryError> + Send + Sync>;

/// A language with its construction, classical oracle and expected spectra.
#[derive(Clone)]
pub struct GalleryEntry {
    pub name: String,
    pub family: AeqsFamily,
    pub oracle: Oracle,
    pub orientation: Orientation,
    pub expectations: Vec<Expectation>,
    pub notes: String,
    level: Option<LevelSource>,
    inputs: InputSource,
}

impl fmt::Debug for GalleryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalleryEntry")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("orientation", &self.orientation)
            .finish_non_exhaustive()
    }
}

impl GalleryEntry {
    /// Verdict the construction should reach, `None` outside the promise.
    pub fn expected_outcome(&self, x: &str) -> Option<Outcome> {
        self.orientation.expected((self.oracle)(x))
    }

    /// Machine level used on `x`, for entries whose instances come from one.
    pub fn level(&self, x: &str) -> Option<Result<Arc<Level>, AeqsError>> {
        self.level.as_ref().map(|f| f(x))
    }

    /// Inputs covered by a sweep within `bounds`, promised or not.
    pub fn inputs(&self, bounds: &Bounds) -> Result<Vec<String>, GalleryError> {
        (self.inputs)(bounds)
    }

    fn complemented(&self) -> Self {
        Self {
            name: format!("complement({})", self.name),
            family: aeqs::complement(&self.family),
            orientation: self.orientation.flipped(),
            notes: format!("{} Acceptance and rejection exchanged.", self.notes),
            ..self.clone()
        }
    }
}

pub fn oracle_check(entry: &GalleryEntry, x: &str) -> Membership {
    (entry.oracle)(x)
}

/// Base entry names; `l_prefix` alone means `l_prefix(0)`, and `complement(NAME)` wraps any of them.
pub const NAMES: [&str; 7] = ["l_prefix(0)", "l_prefix(1)", "equal", "pal_marked", "sym_coin", "usubsum", "multdup"];

pub fn build(name: &str) -> Result<GalleryEntry, GalleryError> {
    let name = name.trim();
    if let Some(inner) = name.strip_prefix("complement(").and_then(|r| r.strip_suffix(')')) {
        return Ok(build(inner)?.complemented());
    }
    match name {
        "l_prefix" | "l_prefix(0)" | "l_prefix(a=0)" => Ok(lprefix::entry('0')),
        "l_prefix(1)" | "l_prefix(a=1)" => Ok(lprefix::entry('1')),
        "equal" => Ok(equal::entry()),
        "pal_marked" => Ok(palmarked::entry()),
        "sym_coin" => Ok(symcoin::entry()),
        "usubsum" => Ok(usubsum::entry()),
        "multdup" => Ok(multdup::entry()),
        _ => Err(GalleryError::UnknownEntry(name.to_string())),
    }
}

/// Sweep bounds: every string up to a length, or per-parameter maxima such as `t<=3,k<=2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bounds {
    MaxLen(usize),
    Params(BTreeMap<String, usize>),
}

impl Bounds {
    pub fn param(&self, key: &str) -> Result<usize, GalleryError> {
        match self {
            Self::Params(m) => m.get(key).copied().ok_or_else(|| GalleryError::Bounds(format!("missing parameter '{key}'"))),
            Self::MaxLen(_) => Err(GalleryError::Bounds(format!("parameter '{key}' needs parameter bounds"))),
        }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaxLen(n) => write!(f, "max_len {n}"),
            Self::Params(m) => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}<={v}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for Bounds {
    type Err = GalleryError;

    /// `6` for a length bound, or `t<=3,k<=2,l<=2` (`≤` accepted) for parameter bounds.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(n) = s.parse() {
            return Ok(Self::MaxLen(n));
        }
        let mut map = BTreeMap::new();
        for part in s.split(',') {
            let (k, v) = part
                .split_once("<=")
                .or_else(|| part.split_once('≤'))
                .ok_or_else(|| GalleryError::Bounds(format!("expected KEY<=VALUE, found '{part}'")))?;
            let v = v.trim().parse().map_err(|_| GalleryError::Bounds(format!("bad value in '{part}'")))?;
            map.insert(k.trim().to_string(), v);
        }
        Ok(Self::Params(map))
    }
}

/// One swept input.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub input: String,
    pub membership: Membership,
    pub expected: Option<Outcome>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    /// Label of the first applicable expectation, with whether it held.
    pub expectation: Option<(String, bool)>,
}

impl VerifyRow {
    pub fn is_mismatch(&self) -> bool {
        self.error.is_some()
            || self.expected.is_some_and(|e| self.verdict.as_ref().map(|v| v.outcome) != Some(e))
            || self.expectation.as_ref().is_some_and(|(_, ok)| !ok)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub entry: String,
    pub bounds: String,
    /// Promised inputs only.
    pub rows: Vec<VerifyRow>,
    pub skipped: usize,
    /// How many rows each expectation covered.
    pub expectation_hits: BTreeMap<String, usize>,
}

impl VerifyReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| r.is_mismatch())
    }

    pub fn degenerate(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| r.verdict.as_ref().is_some_and(|v| !v.unique_ground_state))
    }

    pub fn passed(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

fn verify_one(entry: &GalleryEntry, x: &str, settings: &EigenSettings) -> VerifyRow {
    let membership = (entry.oracle)(x);
    let expected = entry.orientation.expected(membership);
    let mut row = VerifyRow { input: x.to_string(), membership, expected, verdict: None, error: None, expectation: None };
    match entry.family.build(x).and_then(|inst| aeqs::decide(&inst, settings)) {
        Ok(v) => {
            row.expectation = entry
                .expectations
                .iter()
                .find_map(|e| e.applies(x).map(|s| (e.label.clone(), s.holds(v.ground_energy, v.spectral_gap))));
            row.verdict = Some(v);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Decides every promised input within `bounds` and compares against the oracle.
pub fn verify(entry: &GalleryEntry, bounds: &Bounds, settings: &EigenSettings) -> Result<VerifyReport, GalleryError> {
    let all = entry.inputs(bounds)?;
    let (promised, skipped): (Vec<String>, Vec<String>) =
        all.into_iter().partition(|x| (entry.oracle)(x) != Membership::NotPromised);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(promised.len().max(1));
    let chunk = promised.len().div_ceil(workers).max(1);
    let rows: Vec<VerifyRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = promised
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|x| verify_one(entry, x, settings)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("verify worker panicked")).collect()
    });
    let mut expectation_hits: BTreeMap<String, usize> = entry.expectations.iter().map(|e| (e.label.clone(), 0)).collect();
    for (label, _) in rows.iter().filter_map(|r| r.expectation.as_ref()) {
        *expectation_hits.entry(label.clone()).or_default() += 1;
    }
    Ok(VerifyReport { entry: entry.name.clone(), bounds: bounds.to_string(), rows, skipped: skipped.len(), expectation_hits })
}

/// Every string over `alphabet` of length at most `max_len`, shortest first.
pub fn strings_up_to(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}"))).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn length_sweep(alphabet: Vec<char>) -> InputSource {
    Arc::new(move |b| match b {
        Bounds::MaxLen(n) => Ok(strings_up_to(&alphabet, *n)),
        Bounds::Params(_) => Err(GalleryError::Bounds("this entry is swept by length".to_string())),
    })
}

type LevelCell = Arc<OnceLock<Result<Arc<Level>, String>>>;

/// Levels built once per parameter key and shared across threads.
pub(crate) struct LevelCache<K> {
    cells: Mutex<HashMap<K, LevelCell>>,
}

impl<K: Hash + Eq> LevelCache<K> {
    pub(crate) fn new() -> Self {
        Self { cells: Mutex::new(HashMap::new()) }
    }

    /// Builds and validates on first request for `key`.
    pub(crate) fn get(&self, key: K, make: impl FnOnce() -> Result<Level, AeqsError>) -> Result<Arc<Level>, AeqsError> {
        let cell = self.cells.lock().unwrap_or_else(|p| p.into_inner()).entry(key).or_default().clone();
        cell.get_or_init(|| {
            let level = make().map_err(|e| e.to_string())?;
            let settings = EigenSettings::from_env();
            let ok = match &level {
                Level::Moqqaf(l) => l.ensure_valid(&settings),
                Level::Qqaf(l) => l.ensure_valid(&settings),
                Level::TwoWay(_) => Ok(()),
            };
            ok.map_err(|e| e.to_string())?;
            Ok(Arc::new(level))
        })
        .clone()
        .map_err(AeqsError::InvalidInstance)
    }
}

pub(crate) fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub(crate) fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Rule operator sending column `c` to `f(c)` with amplitude 1, or to nothing.
pub(crate) fn partial_map(dim: usize, f: impl Fn(usize) -> Option<usize> + Send + Sync + 'static) -> SparseOp {
    SparseOp::from_rule(dim, move |c| f(c).map(|r| vec![(r, one())]).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_parse() {
        assert_eq!("6".parse::<Bounds>().unwrap(), Bounds::MaxLen(6));
        let b: Bounds = "t≤3,k<=2, l<=2".parse().unwrap();
        assert_eq!(b.param("t").unwrap(), 3);
        assert_eq!(b.param("l").unwrap(), 2);
        assert!(b.param("x").is_err());
        assert!("t=3".parse::<Bounds>().is_err());
    }

    #[test]
    fn sweep_sizes() {
        assert_eq!(strings_up_to(&['0', '1'], 6).len(), 127);
        assert_eq!(strings_up_to(&['a'], 0), vec![String::new()]);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(build("nope"), Err(GalleryError::UnknownEntry(_))));
        assert!(matches!(build("complement(nope)"), Err(GalleryError::UnknownEntry(_))));
    }

    #[test]
    fn complement_flips_orientation() {
        let e = build("complement(multdup)").unwrap();
        assert_eq!(e.orientation, Orientation::Direct);
        assert_eq!(e.expected_outcome("01#01"), Some(Outcome::Accept));
        assert_eq!(build("multdup").unwrap().expected_outcome("01#01"), Some(Outcome::Reject));
    }
}
