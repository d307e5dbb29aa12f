//! The tissue-update / cell-cycle loop.
//!
//! Each cycle, every cell in population order draws up to its receptor count
//! of antigen from the head of the shared store (without replacement across
//! the population), overwrites its signal snapshot from the tissue matrix,
//! fuses it once into its cumulative outputs, and migrates if its cumulative
//! CSM exceeds its migration threshold. Migrated cells log a presentation
//! record, reset, draw a fresh threshold and return to the population within
//! the same cycle, so the population size never changes.
//!
//! A full run feeds the engine one cycle per second of dataset time, keeps
//! cycling with held signals until the store drains (or the cycle bound is
//! hit), then force-migrates any cell still holding antigen so every
//! collected antigen is presented. Flush records carry a tag so analysis can
//! exclude them.
//!
//! One engine is single-threaded and deterministic: identical dataset,
//! parameters and seed give identical logs, byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fusion::{apply_mapping, fuse, FusionError, MappingCode, WeightSet};
use crate::model::{
    AntigenEvent, Context, DendriticCell, ModelError, Params, PresentationRecord, SignalMatrix,
};
use crate::sessiongen::Dataset;
use std::collections::VecDeque;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("nothing to classify: dataset has no antigen events")]
    NothingToClassify,
}

/// The shared compartment: current signal matrix plus the bounded antigen
/// store cells sample from.
#[derive(Debug, Clone)]
pub struct Tissue {
    signal_matrix: SignalMatrix,
    antigen_store: VecDeque<AntigenEvent>,
    capacity: usize,
    ingested: u64,
    dropped: u64,
}

impl Tissue {
    fn new(rows: usize, capacity: usize) -> Self {
        Tissue {
            signal_matrix: SignalMatrix::zero(rows),
            antigen_store: VecDeque::new(),
            capacity,
            ingested: 0,
            dropped: 0,
        }
    }

    pub fn signal_matrix(&self) -> &SignalMatrix {
        &self.signal_matrix
    }

    pub fn stored(&self) -> usize {
        self.antigen_store.len()
    }

    pub fn dropped_antigen_count(&self) -> u64 {
        self.dropped
    }
}

/// Antigen bookkeeping at a cycle boundary. `ingested` always equals
/// `stored + in_cells + presented + dropped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntigenAccounting {
    pub ingested: u64,
    pub stored: u64,
    pub in_cells: u64,
    pub presented: u64,
    pub dropped: u64,
}

impl AntigenAccounting {
    pub fn balanced(&self) -> bool {
        self.ingested == self.stored + self.in_cells + self.presented + self.dropped
    }
}

/// Run metadata reported alongside the presentation log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunMeta {
    pub cycles_executed: u64,
    /// One-second dataset windows actually processed.
    pub data_windows: u64,
    pub antigen_ingested: u64,
    pub antigen_dropped: u64,
    pub antigen_presented: u64,
    pub antigen_flushed: u64,
    /// Antigen still in the store when the cycle bound cut the run short.
    pub store_leftover: u64,
}

/// The complete output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationLog {
    pub records: Vec<PresentationRecord>,
    pub meta: RunMeta,
}

impl PresentationLog {
    pub fn total_antigen_presented(&self) -> u64 {
        self.records.iter().map(|r| r.antigen_list.len() as u64).sum()
    }
}

/// Engine state: tissue, population, cycle counter, log and the seeded
/// generator that draws migration thresholds.
pub struct Engine {
    params: Params,
    weights: WeightSet,
    tissue: Tissue,
    population: Vec<DendriticCell>,
    cycle_index: u64,
    log: Vec<PresentationRecord>,
    presented: u64,
    rng: ChaCha8Rng,
    randomized_sampling: bool,
}

impl Engine {
    /// Create the engine: validates the parameters, builds M cells with
    /// empty antigen vectors, zero cumulative outputs and thresholds drawn
    /// uniformly from the configured band.
    pub fn new(params: Params, weights: WeightSet) -> Result<Engine, EngineError> {
        params.validate()?;
        let (lo, hi) = params.threshold_bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let rows = params.signals_per_category;
        let population = (0..params.population_size)
            .map(|_| DendriticCell::new(rows, rng.gen_range(lo..=hi)))
            .collect();
        Ok(Engine {
            tissue: Tissue::new(rows, params.tissue_antigen_capacity),
            population,
            cycle_index: 0,
            log: Vec::new(),
            presented: 0,
            rng,
            randomized_sampling: false,
            params,
            weights,
        })
    }

    /// Shuffle the cell sampling order each cycle instead of using index
    /// order. Off by default; index order keeps replays bit-identical with
    /// the documented sampling discipline.
    pub fn set_randomized_sampling(&mut self, on: bool) {
        self.randomized_sampling = on;
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn tissue(&self) -> &Tissue {
        &self.tissue
    }

    pub fn population(&self) -> &[DendriticCell] {
        &self.population
    }

    /// Completed cycles so far.
    pub fn cycle_index(&self) -> u64 {
        self.cycle_index
    }

    pub fn log(&self) -> &[PresentationRecord] {
        &self.log
    }

    pub fn accounting(&self) -> AntigenAccounting {
        AntigenAccounting {
            ingested: self.tissue.ingested,
            stored: self.tissue.antigen_store.len() as u64,
            in_cells: self
                .population
                .iter()
                .map(|c| c.antigen_vector.len() as u64)
                .sum(),
            presented: self.presented,
            dropped: self.tissue.dropped,
        }
    }

    /// Apply one window of events: the signal matrix holds its previous
    /// value unless events overwrite it (the last one wins), and antigen is
    /// appended to the store until capacity, counting overflow as dropped.
    pub fn tissue_update<I>(&mut self, signals: &[SignalMatrix], antigen: I)
    where
        I: IntoIterator<Item = AntigenEvent>,
    {
        if let Some(last) = signals.last() {
            self.tissue.signal_matrix = last.clone();
        }
        for event in antigen {
            self.tissue.ingested += 1;
            if self.tissue.antigen_store.len() < self.tissue.capacity {
                self.tissue.antigen_store.push_back(event);
            } else {
                self.tissue.dropped += 1;
            }
        }
    }

    /// Run one cell cycle over the whole population and return the records
    /// emitted during it.
    pub fn cell_cycle(&mut self) -> Vec<PresentationRecord> {
        let order: Vec<usize> = if self.randomized_sampling {
            let mut idx: Vec<usize> = (0..self.population.len()).collect();
            for i in (1..idx.len()).rev() {
                idx.swap(i, self.rng.gen_range(0..=i));
            }
            idx
        } else {
            (0..self.population.len()).collect()
        };

        let (lo, hi) = self.params.threshold_bounds();
        let rows = self.params.signals_per_category;
        let mut emitted = Vec::new();

        for m in order {
            // Collect up to R antigen; a cell at capacity collects none.
            let room = self
                .params
                .dc_antigen_capacity
                .saturating_sub(self.population[m].antigen_vector.len());
            let take = self
                .params
                .antigen_receptors
                .min(room)
                .min(self.tissue.antigen_store.len());
            for _ in 0..take {
                let event = self.tissue.antigen_store.pop_front().expect("len checked");
                self.population[m].antigen_vector.push(event.antigen_type);
            }

            let cell = &mut self.population[m];
            cell.signal_snapshot.clone_from(&self.tissue.signal_matrix);
            let out = fuse(&self.weights, &cell.signal_snapshot);
            cell.cumulative_csm += out.csm;
            cell.cumulative_semimature += out.semimature;
            cell.cumulative_mature += out.mature;

            if cell.cumulative_csm > cell.migration_threshold {
                let record = PresentationRecord {
                    antigen_list: std::mem::take(&mut cell.antigen_vector),
                    cumulative_mature: cell.cumulative_mature,
                    cumulative_semimature: cell.cumulative_semimature,
                    context: Context::from_outputs(
                        cell.cumulative_mature,
                        cell.cumulative_semimature,
                    ),
                    cycle_index: self.cycle_index,
                    flushed: false,
                };
                self.presented += record.antigen_list.len() as u64;
                cell.signal_snapshot = SignalMatrix::zero(rows);
                cell.cumulative_csm = 0.0;
                cell.cumulative_semimature = 0.0;
                cell.cumulative_mature = 0.0;
                cell.migration_threshold = self.rng.gen_range(lo..=hi);
                emitted.push(record.clone());
                self.log.push(record);
            }
        }

        self.cycle_index += 1;
        let acct = self.accounting();
        assert!(acct.balanced(), "antigen conservation violated: {acct:?}");
        emitted
    }

    /// Force-migrate every cell still holding antigen, tagging the records
    /// as flushed. Returns the number of antigen flushed.
    fn flush(&mut self) -> u64 {
        let mut flushed = 0;
        for cell in &mut self.population {
            if cell.antigen_vector.is_empty() {
                continue;
            }
            let record = PresentationRecord {
                antigen_list: std::mem::take(&mut cell.antigen_vector),
                cumulative_mature: cell.cumulative_mature,
                cumulative_semimature: cell.cumulative_semimature,
                context: Context::from_outputs(cell.cumulative_mature, cell.cumulative_semimature),
                cycle_index: self.cycle_index,
                flushed: true,
            };
            flushed += record.antigen_list.len() as u64;
            self.presented += record.antigen_list.len() as u64;
            self.log.push(record);
        }
        flushed
    }
}

/// Run the full pipeline over one dataset: one cycle per second of dataset
/// time, then drain with held signals, then flush.
pub fn run(
    dataset: &Dataset,
    params: &Params,
    weights: &WeightSet,
    mapping: MappingCode,
) -> Result<PresentationLog, EngineError> {
    if dataset.antigen_events.is_empty() {
        return Err(EngineError::NothingToClassify);
    }
    let mut engine = Engine::new(params.clone(), weights.clone())?;
    let rows = params.signals_per_category;

    let last_event_time = dataset
        .signal_records
        .iter()
        .map(|r| r.timestamp)
        .chain(dataset.antigen_events.iter().map(|e| e.timestamp))
        .fold(0.0f64, f64::max);
    let data_windows = last_event_time.floor() as u64 + 1;

    let mut signal_cursor = 0usize;
    let mut antigen_cursor = 0usize;
    let mut windows_processed = 0u64;
    for window in 0..data_windows {
        if engine.cycle_index() >= params.max_cycles as u64 {
            break;
        }
        windows_processed = window + 1;
        let end = (window + 1) as f64;
        let mut matrices = Vec::new();
        while signal_cursor < dataset.signal_records.len()
            && dataset.signal_records[signal_cursor].timestamp < end
        {
            let r = &dataset.signal_records[signal_cursor];
            let row = apply_mapping(mapping, (r.pamp, r.danger, r.safe))?;
            let replicated = vec![row.rows()[0]; rows];
            matrices.push(SignalMatrix::unbounded(replicated)?);
            signal_cursor += 1;
        }
        let mut antigen = Vec::new();
        while antigen_cursor < dataset.antigen_events.len()
            && dataset.antigen_events[antigen_cursor].timestamp < end
        {
            antigen.push(dataset.antigen_events[antigen_cursor].clone());
            antigen_cursor += 1;
        }
        engine.tissue_update(&matrices, antigen);
        engine.cell_cycle();
    }

    // Drain: signals hold their last value while the store empties.
    while engine.tissue.stored() > 0 && engine.cycle_index() < params.max_cycles as u64 {
        engine.cell_cycle();
    }

    let antigen_flushed = engine.flush();
    let acct = engine.accounting();
    assert!(acct.balanced(), "antigen conservation violated at end of run");

    Ok(PresentationLog {
        records: engine.log,
        meta: RunMeta {
            cycles_executed: engine.cycle_index,
            data_windows: windows_processed,
            antigen_ingested: acct.ingested,
            antigen_dropped: acct.dropped,
            antigen_presented: acct.presented,
            antigen_flushed,
            store_leftover: acct.stored,
        },
    })
}
