//! Domain types shared by the whole pipeline: run parameters, the tissue
//! signal matrix, antigen events, dendritic cells, presentation records and
//! MCAV reports. Construction and validation only; behaviour lives in the
//! engine and aggregation modules.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Signal categories, by column index in a [`SignalMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalCategory {
    /// Signature of abnormality (here: ICMP destination-unreachable errors/s).
    Pamp = 0,
    /// Attribute that rises under abnormal behaviour (here: packets/s).
    Danger = 1,
    /// Indicator of steady normal behaviour (here: inverse packets/s derivative).
    Safe = 2,
}

impl SignalCategory {
    pub const ALL: [SignalCategory; 3] = [
        SignalCategory::Pamp,
        SignalCategory::Danger,
        SignalCategory::Safe,
    ];

    pub fn column(self) -> usize {
        self as usize
    }
}

/// Normalisation ceiling for PAMP and danger values.
pub const PAMP_DANGER_MAX: f64 = 100.0;
/// Normalisation ceiling for safe values.
pub const SAFE_MAX: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameters invalid: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("signal value {value} for {category:?} outside [0, {max}]")]
    SignalOutOfRange {
        category: SignalCategory,
        value: f64,
        max: f64,
    },
    #[error("signal value {0} is negative or not finite")]
    BadSignalValue(f64),
    #[error("signal matrix needs at least one row")]
    EmptyMatrix,
    #[error("antigen type must be nonempty")]
    EmptyAntigenType,
    #[error("antigen timestamp {0} is negative or not finite")]
    BadTimestamp(f64),
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Run parameters for the cell population and tissue.
///
/// Field names follow their role; the conventional single-letter symbols are
/// noted inline.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Signals per category (I).
    pub signals_per_category: usize,
    /// Signal categories (J); this artifact is built around exactly 3.
    pub signal_categories: usize,
    /// Max antigen held in the tissue store (K).
    pub tissue_antigen_capacity: usize,
    /// Stopping bound on cell cycles (L).
    pub max_cycles: usize,
    /// Number of dendritic cells (M).
    pub population_size: usize,
    /// Max antigen one cell holds (N).
    pub dc_antigen_capacity: usize,
    /// Output signals per cell (P); fixed at 3.
    pub outputs_per_dc: usize,
    /// Antigen sampled per cell per cycle (R).
    pub antigen_receptors: usize,
    /// Centre of the migration-threshold band.
    pub migration_threshold_center: f64,
    /// Half-width of the threshold band as a fraction of the centre.
    pub migration_threshold_spread_fraction: f64,
    /// Seed for the engine's deterministic generator.
    pub rng_seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            signals_per_category: 1,
            signal_categories: 3,
            tissue_antigen_capacity: 500,
            max_cycles: 10_000,
            population_size: 100,
            dc_antigen_capacity: 50,
            outputs_per_dc: 3,
            antigen_receptors: 1,
            migration_threshold_center: 60.0,
            migration_threshold_spread_fraction: 0.5,
            rng_seed: 0,
        }
    }
}

impl Params {
    /// Every violated invariant, empty when the parameter set is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.signals_per_category == 0 {
            errs.push("signals_per_category must be ≥ 1".to_string());
        }
        if self.signal_categories != 3 {
            errs.push("signal_categories must be 3".to_string());
        }
        if self.tissue_antigen_capacity == 0 {
            errs.push("tissue_antigen_capacity must be ≥ 1".to_string());
        }
        if self.max_cycles == 0 {
            errs.push("max_cycles must be ≥ 1".to_string());
        }
        if self.population_size == 0 {
            errs.push("population_size must be ≥ 1".to_string());
        }
        if self.dc_antigen_capacity == 0 {
            errs.push("dc_antigen_capacity must be ≥ 1".to_string());
        }
        if self.outputs_per_dc != 3 {
            errs.push("outputs_per_dc must be 3".to_string());
        }
        if self.antigen_receptors == 0 {
            errs.push("antigen_receptors must be ≥ 1".to_string());
        }
        if self.antigen_receptors > self.dc_antigen_capacity {
            errs.push("receptors exceed DC capacity".to_string());
        }
        if !self.migration_threshold_center.is_finite() || self.migration_threshold_center < 0.0 {
            errs.push("migration_threshold_center must be a nonnegative real".to_string());
        }
        let spread = self.migration_threshold_spread_fraction;
        if !spread.is_finite() || !(0.0..=1.0).contains(&spread) {
            errs.push("migration_threshold_spread_fraction must lie in [0, 1]".to_string());
        } else if self.migration_threshold_center * (1.0 - spread) <= 0.0 {
            errs.push("threshold band must remain strictly positive".to_string());
        }
        errs
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(errs))
        }
    }

    /// Lower and upper bound of the migration-threshold band.
    pub fn threshold_bounds(&self) -> (f64, f64) {
        let c = self.migration_threshold_center;
        let s = self.migration_threshold_spread_fraction;
        (c * (1.0 - s), c * (1.0 + s))
    }
}

// ---------------------------------------------------------------------------
// Signal matrix
// ---------------------------------------------------------------------------

/// The tissue's current signal values: one row per signal index, columns
/// PAMP / danger / safe.
///
/// [`SignalMatrix::new`] enforces the normalisation ranges (PAMP and danger in
/// [0, 100], safe in [0, 10]). Category-mapping experiments deliberately move
/// values across columns, so mapped matrices are built with
/// [`SignalMatrix::unbounded`], which only requires finite nonnegative values.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    rows: Vec<[f64; 3]>,
}

impl SignalMatrix {
    /// Range-checked construction from `(pamp, danger, safe)` rows.
    pub fn new(rows: Vec<[f64; 3]>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        for row in &rows {
            for cat in SignalCategory::ALL {
                let v = row[cat.column()];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadSignalValue(v));
                }
                let max = match cat {
                    SignalCategory::Safe => SAFE_MAX,
                    _ => PAMP_DANGER_MAX,
                };
                if v > max {
                    return Err(ModelError::SignalOutOfRange {
                        category: cat,
                        value: v,
                        max,
                    });
                }
            }
        }
        Ok(SignalMatrix { rows })
    }

    /// Single-row checked construction, the common I=1 case.
    pub fn single(pamp: f64, danger: f64, safe: f64) -> Result<Self, ModelError> {
        SignalMatrix::new(vec![[pamp, danger, safe]])
    }

    /// Construction without per-column range checks, for matrices whose
    /// columns no longer carry their home category's range (mis-mapped
    /// inputs). Values must still be finite and nonnegative.
    pub fn unbounded(rows: Vec<[f64; 3]>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        for row in &rows {
            for v in row {
                if !v.is_finite() || *v < 0.0 {
                    return Err(ModelError::BadSignalValue(*v));
                }
            }
        }
        Ok(SignalMatrix { rows })
    }

    /// All-zero matrix with `rows` rows.
    pub fn zero(rows: usize) -> Self {
        SignalMatrix {
            rows: vec![[0.0; 3]; rows.max(1)],
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn value(&self, row: usize, category: SignalCategory) -> f64 {
        self.rows[row][category.column()]
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

// ---------------------------------------------------------------------------
// Antigen
// ---------------------------------------------------------------------------

/// Opaque antigen identifier (a process ID in the port-scan use case).
///
/// Cheap to clone; events of the same type share one allocation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AntigenType(Arc<str>);

impl AntigenType {
    pub fn new(name: impl AsRef<str>) -> Result<Self, ModelError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(ModelError::EmptyAntigenType);
        }
        Ok(AntigenType(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AntigenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One timestamped antigen instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AntigenEvent {
    /// Session-relative seconds.
    pub timestamp: f64,
    pub antigen_type: AntigenType,
}

impl AntigenEvent {
    pub fn new(timestamp: f64, antigen_type: AntigenType) -> Result<Self, ModelError> {
        if !timestamp.is_finite() || timestamp < 0.0 {
            return Err(ModelError::BadTimestamp(timestamp));
        }
        Ok(AntigenEvent {
            timestamp,
            antigen_type,
        })
    }
}

// ---------------------------------------------------------------------------
// Dendritic cell
// ---------------------------------------------------------------------------

/// One agent of the sampling population.
///
/// Mutated only by the engine: fields are crate-private, readers get
/// accessors. The CSM and semi-mature cumulative outputs never decrease over
/// a cell's lifetime; the mature cumulative output may (its safe weight is
/// negative).
#[derive(Debug, Clone)]
pub struct DendriticCell {
    pub(crate) signal_snapshot: SignalMatrix,
    pub(crate) antigen_vector: Vec<AntigenType>,
    pub(crate) cumulative_csm: f64,
    pub(crate) cumulative_semimature: f64,
    pub(crate) cumulative_mature: f64,
    pub(crate) migration_threshold: f64,
}

impl DendriticCell {
    pub(crate) fn new(rows: usize, migration_threshold: f64) -> Self {
        DendriticCell {
            signal_snapshot: SignalMatrix::zero(rows),
            antigen_vector: Vec::new(),
            cumulative_csm: 0.0,
            cumulative_semimature: 0.0,
            cumulative_mature: 0.0,
            migration_threshold,
        }
    }

    pub fn signal_snapshot(&self) -> &SignalMatrix {
        &self.signal_snapshot
    }

    pub fn antigen_vector(&self) -> &[AntigenType] {
        &self.antigen_vector
    }

    pub fn cumulative_csm(&self) -> f64 {
        self.cumulative_csm
    }

    pub fn cumulative_semimature(&self) -> f64 {
        self.cumulative_semimature
    }

    pub fn cumulative_mature(&self) -> f64 {
        self.cumulative_mature
    }

    pub fn migration_threshold(&self) -> f64 {
        self.migration_threshold
    }
}

// ---------------------------------------------------------------------------
// Presentation
// ---------------------------------------------------------------------------

/// Context decided when a cell presents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Mature,
    SemiMature,
}

impl Context {
    /// Mature iff the cumulative mature output strictly exceeds the
    /// semi-mature one; ties resolve to semi-mature (tolerance by default).
    pub fn from_outputs(cumulative_mature: f64, cumulative_semimature: f64) -> Context {
        if cumulative_mature > cumulative_semimature {
            Context::Mature
        } else {
            Context::SemiMature
        }
    }
}

/// One migrated cell's antigen list plus its context decision.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationRecord {
    pub antigen_list: Vec<AntigenType>,
    pub cumulative_mature: f64,
    pub cumulative_semimature: f64,
    pub context: Context,
    pub cycle_index: u64,
    /// Set on records emitted by the end-of-run flush rather than a
    /// threshold crossing.
    pub flushed: bool,
}

// ---------------------------------------------------------------------------
// MCAV report
// ---------------------------------------------------------------------------

/// Presentation counts for one antigen type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McavEntry {
    pub mature_presentations: u64,
    pub total_presentations: u64,
}

impl McavEntry {
    /// Mature-context antigen value: mature / total, always in [0, 1].
    pub fn mcav(&self) -> f64 {
        debug_assert!(self.total_presentations >= 1);
        debug_assert!(self.mature_presentations <= self.total_presentations);
        self.mature_presentations as f64 / self.total_presentations as f64
    }
}

/// Per-antigen-type mature-context antigen values. Types never presented are
/// absent. Iteration order is the type order, so output is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct McavReport {
    entries: BTreeMap<AntigenType, McavEntry>,
}

impl McavReport {
    pub(crate) fn from_entries(entries: BTreeMap<AntigenType, McavEntry>) -> Self {
        McavReport { entries }
    }

    pub fn get(&self, antigen_type: &AntigenType) -> Option<McavEntry> {
        self.entries.get(antigen_type).copied()
    }

    pub fn mcav(&self, antigen_type: &AntigenType) -> Option<f64> {
        self.get(antigen_type).map(|e| e.mcav())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AntigenType, &McavEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
