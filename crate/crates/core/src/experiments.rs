//! Experiment harness: signal-mapping permutations (series 1), parameter
//! sensitivity (series 2) and the weight grid (series 3), each reducing many
//! engine runs to per-process MCAV summary statistics.
//!
//! Conditions and replicates run in parallel; replicate seeds derive from
//! `(base seed, condition index, dataset index, repeat index)` and results
//! merge by condition key, so a plan plus a base seed always reproduces the
//! same table.

use rayon::prelude::*;
use thiserror::Error;

use crate::aggregation::{compute_mcav, AggregationError};
use crate::engine::{run, EngineError};
use crate::fusion::{derive_weights, FusionError, MappingCode, WeightSet};
use crate::model::{AntigenType, Params};
use crate::seed;
use crate::sessiongen::{generate_corpus, Dataset, GenError, Scenario};
use std::collections::BTreeMap;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("experiment plan invalid: {0}")]
    InvalidPlan(String),
}

/// One summary row: a condition, a process, and the MCAV statistics over
/// every run of that condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub condition: String,
    pub antigen_type: AntigenType,
    pub mean_mcav: f64,
    pub stdev_mcav: f64,
    pub n_runs: usize,
}

/// Rows sorted by condition then antigen type.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn rows(&self) -> &[SummaryRow] {
        &self.rows
    }

    pub fn get(&self, condition: &str, antigen_type: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.condition == condition && r.antigen_type.as_str() == antigen_type)
    }

    pub fn mean_mcav(&self, condition: &str, antigen_type: &str) -> Option<f64> {
        self.get(condition, antigen_type).map(|r| r.mean_mcav)
    }

    pub fn conditions(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for row in &self.rows {
            if seen.last() != Some(&row.condition.as_str()) {
                seen.push(row.condition.as_str());
            }
        }
        seen
    }

    pub(crate) fn from_rows(rows: Vec<SummaryRow>) -> Self {
        SummaryTable { rows }
    }
}

/// Seed for one replicate, stable under parallel execution.
pub fn replicate_seed(base_seed: u64, condition: u64, dataset: u64, repeat: u64) -> u64 {
    seed::mix_all(base_seed, &[condition, dataset, repeat])
}

/// Collapse per-run MCAV reports into mean and sample standard deviation
/// (n−1 denominator; a single run reports 0) per condition and process.
pub fn summarize(results: &[(String, crate::model::McavReport)]) -> SummaryTable {
    let mut samples: BTreeMap<(String, AntigenType), Vec<f64>> = BTreeMap::new();
    for (condition, report) in results {
        for (antigen_type, entry) in report.iter() {
            samples
                .entry((condition.clone(), antigen_type.clone()))
                .or_default()
                .push(entry.mcav());
        }
    }
    let rows = samples
        .into_iter()
        .map(|((condition, antigen_type), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let stdev = if n < 2 {
                0.0
            } else {
                let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            };
            SummaryRow {
                condition,
                antigen_type,
                mean_mcav: mean,
                stdev_mcav: stdev,
                n_runs: n,
            }
        })
        .collect();
    SummaryTable::from_rows(rows)
}

/// One engine run reduced to its MCAV report.
fn run_condition(
    dataset: &Dataset,
    params: &Params,
    weights: &WeightSet,
    mapping: MappingCode,
    rng_seed: u64,
) -> Result<crate::model::McavReport, ExperimentError> {
    let params = Params { rng_seed, ..params.clone() };
    let log = run(dataset, &params, weights, mapping)?;
    Ok(compute_mcav(&log)?)
}

/// Series 1: every mapping over every dataset, `repeats` times each.
/// Conditions are labeled `<mapping>/<scenario>`.
pub fn run_series1(
    corpus: &[Dataset],
    params: &Params,
    weights: &WeightSet,
    repeats: usize,
    base_seed: u64,
) -> Result<SummaryTable, ExperimentError> {
    if corpus.is_empty() || repeats == 0 {
        return Err(ExperimentError::InvalidPlan(
            "series 1 needs a nonempty corpus and at least one repeat".into(),
        ));
    }
    let mut specs = Vec::new();
    for (c, mapping) in MappingCode::ALL.into_iter().enumerate() {
        for (d, dataset) in corpus.iter().enumerate() {
            for r in 0..repeats {
                specs.push((c, mapping, d, dataset, r));
            }
        }
    }
    let results: Result<Vec<(String, crate::model::McavReport)>, ExperimentError> = specs
        .par_iter()
        .map(|&(c, mapping, d, dataset, r)| {
            let rng_seed = replicate_seed(base_seed, c as u64, d as u64, r as u64);
            let report = run_condition(dataset, params, weights, mapping, rng_seed)?;
            let condition = format!("{}/{}", mapping.label(), dataset.meta.scenario.label());
            Ok((condition, report))
        })
        .collect();
    Ok(summarize(&results?))
}

/// Parameter values exercised by series 2; each family sweeps one parameter
/// with everything else at its default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series2Sweep {
    /// Population sizes (condition prefix `C`).
    pub cells: Vec<usize>,
    /// DC antigen capacities (prefix `N`).
    pub dc_capacity: Vec<usize>,
    /// Antigen receptors per cell (prefix `R`).
    pub receptors: Vec<usize>,
    /// Tissue store capacities (prefix `T`).
    pub tissue_capacity: Vec<usize>,
}

impl Default for Series2Sweep {
    fn default() -> Self {
        Series2Sweep {
            cells: vec![10, 100, 200, 500],
            dc_capacity: vec![1, 2, 5, 10, 25, 50, 100],
            receptors: vec![1, 2, 5, 10, 20],
            tissue_capacity: vec![50, 500, 1000, 5000, 10000],
        }
    }
}

impl Series2Sweep {
    /// `(condition label, params)` for every sweep point, in declared order.
    fn conditions(&self, base: &Params) -> Vec<(String, Params)> {
        let mut out = Vec::new();
        for &m in &self.cells {
            out.push((format!("C{m}"), Params { population_size: m, ..base.clone() }));
        }
        for &n in &self.dc_capacity {
            // Receptor count cannot exceed capacity.
            let receptors = base.antigen_receptors.min(n);
            out.push((
                format!("N{n}"),
                Params { dc_antigen_capacity: n, antigen_receptors: receptors, ..base.clone() },
            ));
        }
        for &r in &self.receptors {
            let capacity = base.dc_antigen_capacity.max(r);
            out.push((
                format!("R{r}"),
                Params { antigen_receptors: r, dc_antigen_capacity: capacity, ..base.clone() },
            ));
        }
        for &k in &self.tissue_capacity {
            out.push((format!("T{k}"), Params { tissue_antigen_capacity: k, ..base.clone() }));
        }
        out
    }
}

/// Series 2: one parameter family at a time over the attack corpus.
pub fn run_series2(
    corpus: &[Dataset],
    sweep: &Series2Sweep,
    params: &Params,
    weights: &WeightSet,
    repeats: usize,
    base_seed: u64,
) -> Result<SummaryTable, ExperimentError> {
    let attack: Vec<&Dataset> = corpus
        .iter()
        .filter(|d| d.meta.scenario == Scenario::Attack)
        .collect();
    if attack.is_empty() || repeats == 0 {
        return Err(ExperimentError::InvalidPlan(
            "series 2 needs attack datasets and at least one repeat".into(),
        ));
    }
    let conditions = sweep.conditions(params);
    let mut specs = Vec::new();
    for (c, (label, cond_params)) in conditions.iter().enumerate() {
        for (d, dataset) in attack.iter().enumerate() {
            for r in 0..repeats {
                specs.push((c, label, cond_params, d, *dataset, r));
            }
        }
    }
    let results: Result<Vec<(String, crate::model::McavReport)>, ExperimentError> = specs
        .par_iter()
        .map(|&(c, label, cond_params, d, dataset, r)| {
            let rng_seed = replicate_seed(base_seed, c as u64, d as u64, r as u64);
            let report =
                run_condition(dataset, cond_params, weights, MappingCode::M1, rng_seed)?;
            Ok((label.clone(), report))
        })
        .collect();
    Ok(summarize(&results?))
}

/// Default grid for the two controlling weights.
pub const WEIGHT_GRID: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Series 3: the full W1×W2 grid on a single attack dataset. Conditions are
/// labeled `w1=<v>;w2=<v>`.
pub fn run_series3(
    dataset: &Dataset,
    grid: &[f64],
    params: &Params,
    repeats: usize,
    base_seed: u64,
) -> Result<SummaryTable, ExperimentError> {
    if grid.is_empty() || repeats == 0 {
        return Err(ExperimentError::InvalidPlan(
            "series 3 needs a nonempty weight grid and at least one repeat".into(),
        ));
    }
    let mut specs = Vec::new();
    let mut idx = 0u64;
    for &w1 in grid {
        for &w2 in grid {
            specs.push((idx, w1, w2));
            idx += 1;
        }
    }
    let results: Result<Vec<(String, crate::model::McavReport)>, ExperimentError> = specs
        .par_iter()
        .flat_map(|&(c, w1, w2)| {
            (0..repeats)
                .into_par_iter()
                .map(move |r| (c, w1, w2, r))
        })
        .map(|(c, w1, w2, r)| {
            let weights = derive_weights(w1, w2)?;
            let rng_seed = replicate_seed(base_seed, c, 0, r as u64);
            let report = run_condition(dataset, params, &weights, MappingCode::M1, rng_seed)?;
            Ok((format!("w1={w1};w2={w2}"), report))
        })
        .collect();
    Ok(summarize(&results?))
}

/// Which experimental series to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesId {
    S1,
    S2,
    S3,
}

/// A fully specified experiment: series, corpus size, repeats and seed.
/// Executing the same plan twice yields identical tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub series: SeriesId,
    pub n_attack: usize,
    pub n_normal: usize,
    pub repeats_per_dataset: usize,
    pub base_seed: u64,
    pub sweep: Series2Sweep,
    pub weight_grid: Vec<f64>,
}

impl ExperimentPlan {
    pub fn new(series: SeriesId, base_seed: u64) -> Self {
        let (n_attack, n_normal) = match series {
            SeriesId::S1 => (10, 10),
            SeriesId::S2 => (10, 0),
            SeriesId::S3 => (1, 0),
        };
        ExperimentPlan {
            series,
            n_attack,
            n_normal,
            repeats_per_dataset: 3,
            base_seed,
            sweep: Series2Sweep::default(),
            weight_grid: WEIGHT_GRID.to_vec(),
        }
    }

    /// Generate the corpus and run the series with default parameters and
    /// weights.
    pub fn execute(&self) -> Result<SummaryTable, ExperimentError> {
        let corpus_seed = seed::mix(self.base_seed, 0xC0);
        let corpus = generate_corpus(self.n_attack, self.n_normal, corpus_seed)?;
        let params = Params::default();
        let weights = derive_weights(2.0, 2.0)?;
        match self.series {
            SeriesId::S1 => run_series1(
                &corpus,
                &params,
                &weights,
                self.repeats_per_dataset,
                self.base_seed,
            ),
            SeriesId::S2 => run_series2(
                &corpus,
                &self.sweep,
                &params,
                &weights,
                self.repeats_per_dataset,
                self.base_seed,
            ),
            SeriesId::S3 => {
                let dataset = corpus
                    .iter()
                    .find(|d| d.meta.scenario == Scenario::Attack)
                    .ok_or_else(|| {
                        ExperimentError::InvalidPlan("series 3 needs one attack dataset".into())
                    })?;
                run_series3(
                    dataset,
                    &self.weight_grid,
                    &params,
                    self.repeats_per_dataset,
                    self.base_seed,
                )
            }
        }
    }
}
