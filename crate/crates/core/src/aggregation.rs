//! Presentation-log aggregation: per-antigen-type MCAV scores, threshold
//! classification and detection metrics against ground truth.
//!
//! MCAV counts antigen appearances, not distinct records: a type occurring
//! three times inside one mature record contributes three mature
//! presentations, matching how cells carry multiple copies of the same type.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::PresentationLog;
use crate::model::{AntigenType, Context, McavEntry, McavReport, PresentationRecord};

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("presentation log is empty")]
    EmptyLog,
    #[error("classification threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("no truth label for antigen type {0}")]
    UnlabeledType(AntigenType),
}

/// Predicted label for one antigen type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Anomalous,
    Normal,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Anomalous => "anomalous",
            Label::Normal => "normal",
        }
    }
}

/// Per-type MCAV and label after thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    entries: BTreeMap<AntigenType, (McavEntry, Label)>,
    threshold: f64,
}

impl ClassificationResult {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn label(&self, antigen_type: &AntigenType) -> Option<Label> {
        self.entries.get(antigen_type).map(|(_, l)| *l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AntigenType, &(McavEntry, Label))> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Confusion counts and rates over antigen types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionRates {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
}

impl DetectionRates {
    /// TP / (TP + FN); `None` when no type is truly anomalous.
    pub fn true_positive_rate(&self) -> Option<f64> {
        let positives = self.true_positives + self.false_negatives;
        (positives > 0).then(|| self.true_positives as f64 / positives as f64)
    }

    /// FP / (FP + TN); `None` when no type is truly normal.
    pub fn false_positive_rate(&self) -> Option<f64> {
        let negatives = self.false_positives + self.true_negatives;
        (negatives > 0).then(|| self.false_positives as f64 / negatives as f64)
    }
}

/// Count mature and total appearances per antigen type over a record slice.
/// This is the single counting path; the test suite re-derives it with an
/// independent scan over the serialized log.
fn count_records<'a>(
    records: impl Iterator<Item = &'a PresentationRecord>,
) -> BTreeMap<AntigenType, McavEntry> {
    let mut counts: BTreeMap<AntigenType, McavEntry> = BTreeMap::new();
    for record in records {
        for antigen in &record.antigen_list {
            let entry = counts.entry(antigen.clone()).or_insert(McavEntry {
                mature_presentations: 0,
                total_presentations: 0,
            });
            entry.total_presentations += 1;
            if record.context == Context::Mature {
                entry.mature_presentations += 1;
            }
        }
    }
    counts
}

/// MCAV per antigen type over the whole log, flush records included.
pub fn compute_mcav(log: &PresentationLog) -> Result<McavReport, AggregationError> {
    compute_mcav_with(log, true)
}

/// MCAV per antigen type, optionally excluding flush-tagged records.
pub fn compute_mcav_with(
    log: &PresentationLog,
    include_flushed: bool,
) -> Result<McavReport, AggregationError> {
    if log.records.is_empty() {
        return Err(AggregationError::EmptyLog);
    }
    let counts = count_records(
        log.records
            .iter()
            .filter(|r| include_flushed || !r.flushed),
    );
    Ok(McavReport::from_entries(counts))
}

/// Label every reported type: anomalous iff its MCAV strictly exceeds the
/// threshold, so a type sitting exactly on the threshold stays normal.
pub fn classify(
    report: &McavReport,
    threshold: f64,
) -> Result<ClassificationResult, AggregationError> {
    if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) {
        return Err(AggregationError::ThresholdOutOfRange(threshold));
    }
    let entries = report
        .iter()
        .map(|(t, e)| {
            let label = if e.mcav() > threshold {
                Label::Anomalous
            } else {
                Label::Normal
            };
            (t.clone(), (*e, label))
        })
        .collect();
    Ok(ClassificationResult { entries, threshold })
}

/// Confusion counts of the predicted labels against ground truth. Every
/// classified type must be labeled in the truth map.
pub fn metrics(
    result: &ClassificationResult,
    truth: &BTreeMap<AntigenType, bool>,
) -> Result<DetectionRates, AggregationError> {
    let mut rates = DetectionRates {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (antigen_type, (_, label)) in result.iter() {
        let anomalous = *truth
            .get(antigen_type)
            .ok_or_else(|| AggregationError::UnlabeledType(antigen_type.clone()))?;
        match (label, anomalous) {
            (Label::Anomalous, true) => rates.true_positives += 1,
            (Label::Anomalous, false) => rates.false_positives += 1,
            (Label::Normal, false) => rates.true_negatives += 1,
            (Label::Normal, true) => rates.false_negatives += 1,
        }
    }
    Ok(rates)
}
