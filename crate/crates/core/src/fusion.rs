//! Weighted-sum fusion of the three signal categories into the three cell
//! outputs, plus the weight-derivation rule and the category-mapping
//! permutations used by the mapping experiments.
//!
//! Each output is the weighted sum over every matrix entry divided by the sum
//! of absolute weights, so outputs stay within the magnitude of the inputs.
//! Outputs are bound by role, not by row number: the output fed only by the
//! safe signal is the semi-mature output, the one with the negative safe
//! weight is the mature output, and the remaining one is the costimulatory
//! (CSM) output compared against migration thresholds.

use thiserror::Error;

use crate::model::{ModelError, SignalCategory, SignalMatrix};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("weight parameters must be positive, got w1={0}, w2={1}")]
    NonpositiveWeight(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The three cell outputs, by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Costimulatory output, compared against the migration threshold.
    Csm = 0,
    /// Grows only with the safe signal.
    SemiMature = 1,
    /// Suppressed by the safe signal (negative weight).
    Mature = 2,
}

impl OutputKind {
    pub const ALL: [OutputKind; 3] = [OutputKind::Csm, OutputKind::SemiMature, OutputKind::Mature];
}

/// Where a weight set came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightProvenance {
    /// The fixed preset rows (2,1,2) / (0,0,3) / (2,1,-3).
    Table1Preset,
    /// Rows generated from the two controlling weights.
    DerivedFromW1W2 { w1: f64, w2: f64 },
}

/// Per-output, per-category fusion weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    // weights[output][category]
    weights: [[f64; 3]; 3],
    provenance: WeightProvenance,
}

impl WeightSet {
    pub fn weight(&self, output: OutputKind, category: SignalCategory) -> f64 {
        self.weights[output as usize][category.column()]
    }

    pub fn row(&self, output: OutputKind) -> [f64; 3] {
        self.weights[output as usize]
    }

    pub fn provenance(&self) -> WeightProvenance {
        self.provenance
    }

    /// Controlling weights when derived, `(2, 2)`-equivalent otherwise.
    pub fn controlling(&self) -> Option<(f64, f64)> {
        match self.provenance {
            WeightProvenance::DerivedFromW1W2 { w1, w2 } => Some((w1, w2)),
            WeightProvenance::Table1Preset => None,
        }
    }
}

/// Build a weight set from the two controlling weights.
///
/// CSM row `(w1, w1/2, 1.5*w1)`, semi-mature row `(0, 0, 1)`, mature row
/// `(w2, w2/2, -1.5*w2)`.
pub fn derive_weights(w1: f64, w2: f64) -> Result<WeightSet, FusionError> {
    if !(w1 > 0.0 && w2 > 0.0) || !w1.is_finite() || !w2.is_finite() {
        return Err(FusionError::NonpositiveWeight(w1, w2));
    }
    Ok(WeightSet {
        weights: [
            [w1, w1 / 2.0, 1.5 * w1],
            [0.0, 0.0, 1.0],
            [w2, w2 / 2.0, -1.5 * w2],
        ],
        provenance: WeightProvenance::DerivedFromW1W2 { w1, w2 },
    })
}

/// The fixed preset weight rows.
///
/// Retained as a named alternative: its CSM and semi-mature rows differ from
/// the derived rule at w1=w2=2 ((2,1,2) vs (2,1,3) and (0,0,3) vs (0,0,1)),
/// so the derived rule is the default everywhere else.
pub fn table1_preset() -> WeightSet {
    WeightSet {
        weights: [[2.0, 1.0, 2.0], [0.0, 0.0, 3.0], [2.0, 1.0, -3.0]],
        provenance: WeightProvenance::Table1Preset,
    }
}

/// The three fused outputs for one signal snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSignals {
    pub csm: f64,
    pub semimature: f64,
    pub mature: f64,
}

impl OutputSignals {
    pub const ZERO: OutputSignals = OutputSignals {
        csm: 0.0,
        semimature: 0.0,
        mature: 0.0,
    };

    pub fn get(&self, kind: OutputKind) -> f64 {
        match kind {
            OutputKind::Csm => self.csm,
            OutputKind::SemiMature => self.semimature,
            OutputKind::Mature => self.mature,
        }
    }
}

/// Fuse a signal matrix into the three outputs:
/// `o_p = sum_ij(w[p][j] * s[i][j]) / sum_ij(|w[p][j]|)`.
///
/// Every category column participates; the sum runs over all rows so larger
/// matrices need no special casing.
pub fn fuse(weights: &WeightSet, signals: &SignalMatrix) -> OutputSignals {
    let mut out = [0.0f64; 3];
    for (p, kind) in OutputKind::ALL.into_iter().enumerate() {
        let row = weights.row(kind);
        let mut num = 0.0;
        let mut den = 0.0;
        for s in signals.rows() {
            for j in 0..3 {
                num += row[j] * s[j];
                den += row[j].abs();
            }
        }
        debug_assert!(den > 0.0, "weight row for {kind:?} must not be all zero");
        out[p] = num / den;
    }
    OutputSignals {
        csm: out[0],
        semimature: out[1],
        mature: out[2],
    }
}

// ---------------------------------------------------------------------------
// Category mappings
// ---------------------------------------------------------------------------

/// Which raw signal role a value was derived as.
pub type SignalRole = SignalCategory;

/// One of the six permutations assigning raw signal roles to matrix columns.
///
/// `M1` is the identity. The listing per code gives the role landing in the
/// PAMP, danger and safe columns respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingCode {
    /// P D S (identity)
    M1,
    /// D P S
    M2,
    /// S D P
    M3,
    /// P S D
    M4,
    /// S P D
    M5,
    /// D S P
    M6,
}

impl MappingCode {
    pub const ALL: [MappingCode; 6] = [
        MappingCode::M1,
        MappingCode::M2,
        MappingCode::M3,
        MappingCode::M4,
        MappingCode::M5,
        MappingCode::M6,
    ];

    /// Raw-signal role filling each matrix column, in column order.
    pub fn column_sources(self) -> [SignalRole; 3] {
        use SignalCategory::{Danger, Pamp, Safe};
        match self {
            MappingCode::M1 => [Pamp, Danger, Safe],
            MappingCode::M2 => [Danger, Pamp, Safe],
            MappingCode::M3 => [Safe, Danger, Pamp],
            MappingCode::M4 => [Pamp, Safe, Danger],
            MappingCode::M5 => [Safe, Pamp, Danger],
            MappingCode::M6 => [Danger, Safe, Pamp],
        }
    }

    /// Column a given raw role lands in.
    pub fn column_for_role(self, role: SignalRole) -> usize {
        self.column_sources()
            .iter()
            .position(|&r| r == role)
            .expect("every role appears exactly once")
    }

    /// The permutation undoing this one.
    pub fn inverse(self) -> MappingCode {
        match self {
            MappingCode::M1 => MappingCode::M1,
            MappingCode::M2 => MappingCode::M2,
            MappingCode::M3 => MappingCode::M3,
            MappingCode::M4 => MappingCode::M4,
            MappingCode::M5 => MappingCode::M6,
            MappingCode::M6 => MappingCode::M5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MappingCode::M1 => "M1",
            MappingCode::M2 => "M2",
            MappingCode::M3 => "M3",
            MappingCode::M4 => "M4",
            MappingCode::M5 => "M5",
            MappingCode::M6 => "M6",
        }
    }

    pub fn parse(s: &str) -> Option<MappingCode> {
        MappingCode::ALL.into_iter().find(|m| m.label() == s)
    }
}

impl std::fmt::Display for MappingCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Place an already-normalised `(pamp, danger, safe)` raw triple into matrix
/// columns under the given permutation. Mis-mapped codes move values outside
/// their home column's range, so the result skips range checks.
pub fn apply_mapping(
    code: MappingCode,
    raw: (f64, f64, f64),
) -> Result<SignalMatrix, FusionError> {
    let by_role = [raw.0, raw.1, raw.2];
    let sources = code.column_sources();
    let row = [
        by_role[sources[0].column()],
        by_role[sources[1].column()],
        by_role[sources[2].column()],
    ];
    Ok(SignalMatrix::unbounded(vec![row])?)
}
