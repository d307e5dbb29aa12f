//! Population-based anomaly detection with the dendritic cell algorithm.
//!
//! A population of artificial dendritic cells fuses three environmental
//! signal categories (PAMP, danger, safe) while asynchronously collecting
//! antigen identifiers from a shared tissue store. Cells migrate once their
//! costimulatory output crosses a per-cell threshold and present their
//! antigen in a mature or semi-mature context; the per-type fraction of
//! mature presentations (MCAV) is the anomaly score.
//!
//! The crate bundles the detection engine, a synthetic port-scan session
//! generator, file formats for datasets and reports, and the harness
//! reproducing the three experimental series (signal mappings, parameter
//! sensitivity, weight grid).

pub mod aggregation;
pub mod engine;
pub mod experiments;
pub mod fusion;
pub mod io;
pub mod model;
pub mod seed;
pub mod sessiongen;

pub use aggregation::{classify, compute_mcav, compute_mcav_with, metrics, ClassificationResult, DetectionRates, Label};
pub use engine::{run, Engine, PresentationLog, RunMeta};
pub use experiments::{
    run_series1, run_series2, run_series3, summarize, ExperimentPlan, Series2Sweep, SeriesId,
    SummaryRow, SummaryTable, WEIGHT_GRID,
};
pub use fusion::{
    apply_mapping, derive_weights, fuse, table1_preset, MappingCode, OutputKind, OutputSignals,
    WeightProvenance, WeightSet,
};
pub use model::{
    AntigenEvent, AntigenType, Context, DendriticCell, McavEntry, McavReport, Params,
    PresentationRecord, SignalCategory, SignalMatrix,
};
pub use sessiongen::{
    derive_signals, generate_corpus, generate_session, Dataset, DatasetMeta, ProcessProfile,
    RateSegment, Scenario, SessionConfig, SignalRecord, SignalScales,
};
