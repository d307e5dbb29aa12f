//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Numeric targets are pinned here as constants; the expected values for the
//! fusion and aggregation checks come from independent re-implementations
//! living inside this file, not from the library code they verify.

use std::collections::BTreeMap;
use std::panic::AssertUnwindSafe;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dca_core::*;

const CORPUS_SEED: u64 = 20_260_809;
const HARNESS_SEED: u64 = 424_242;

// Criterion 1
const FUSION_CASES: usize = 1000;
const FUSION_REL_TOL: f64 = 1e-12;
const FUSION_BUDGET: Duration = Duration::from_secs(1);
// Criterion 2
const ORACLE_DATASETS: usize = 50;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
// Criterion 3
const SCAN_MEAN_FLOOR: f64 = 0.6;
const PARENT_MEAN_FLOOR: f64 = 0.45;
const NORMAL_MEAN_CEILING: f64 = 0.3;
const SEPARATION_FLOOR: f64 = 0.3;
const CLASSIFY_THRESHOLD: f64 = 0.5;
const BASELINE_BUDGET: Duration = Duration::from_secs(120);
// Criterion 4
const M3_NORMAL_FLOOR: f64 = 0.9;
const PATHOLOGY_BUDGET: Duration = Duration::from_secs(240);
// Criterion 5
const CELL_BAND: f64 = 0.1;
const CELL_SWEEP_BUDGET: Duration = Duration::from_secs(300);
// Criterion 6
const GRID_SCAN_FLOOR: f64 = 0.7;
const GRID_CONDITIONS: usize = 36;
const GRID_RUNS: usize = 108;
const GRID_BUDGET: Duration = Duration::from_secs(300);

fn criterion<R>(number: u32, name: &str, body: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(body));
    match outcome {
        Ok(value) => {
            println!("[PASS] criterion {number}: {name} ({:.2?})", start.elapsed());
            value
        }
        Err(panic) => {
            println!("[FAIL] criterion {number}: {name}");
            std::panic::resume_unwind(panic);
        }
    }
}

fn corpus() -> &'static Vec<Dataset> {
    static CORPUS: OnceLock<Vec<Dataset>> = OnceLock::new();
    CORPUS.get_or_init(|| generate_corpus(10, 10, CORPUS_SEED).expect("corpus generation"))
}

fn series1_table() -> &'static SummaryTable {
    static TABLE: OnceLock<SummaryTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        run_series1(
            corpus(),
            &Params::default(),
            &derive_weights(2.0, 2.0).unwrap(),
            3,
            HARNESS_SEED,
        )
        .expect("series 1")
    })
}

// ---------------------------------------------------------------------------
// Criterion 1: fusion correctness against a direct equation evaluation
// ---------------------------------------------------------------------------

/// Independent evaluation: weights written out from the derivation table,
/// double loop over the matrix, per-output normalisation by the sum of
/// absolute weights.
fn fuse_by_hand(w1: f64, w2: f64, rows: &[[f64; 3]]) -> [f64; 3] {
    let weight_rows = [
        [w1, w1 / 2.0, w1 * 1.5],
        [0.0, 0.0, 1.0],
        [w2, w2 / 2.0, w2 * -1.5],
    ];
    let mut out = [0.0; 3];
    for p in 0..3 {
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for row in rows {
            for j in 0..3 {
                numerator += weight_rows[p][j] * row[j];
                denominator += weight_rows[p][j].abs();
            }
        }
        out[p] = numerator / denominator;
    }
    out
}

#[test]
fn criterion_1_fusion_correctness() {
    criterion(1, "fusion matches direct equation evaluation", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..FUSION_CASES {
            let w1 = rng.gen_range(0.05..20.0);
            let w2 = rng.gen_range(0.05..20.0);
            let row_count = rng.gen_range(1..=3);
            let rows: Vec<[f64; 3]> = (0..row_count)
                .map(|_| {
                    [
                        rng.gen_range(0.0..100.0),
                        rng.gen_range(0.0..100.0),
                        rng.gen_range(0.0..10.0),
                    ]
                })
                .collect();
            let expected = fuse_by_hand(w1, w2, &rows);
            let weights = derive_weights(w1, w2).unwrap();
            let matrix = SignalMatrix::new(rows.clone()).unwrap();
            let out = fuse(&weights, &matrix);
            for (kind, want) in [
                (OutputKind::Csm, expected[0]),
                (OutputKind::SemiMature, expected[1]),
                (OutputKind::Mature, expected[2]),
            ] {
                let got = out.get(kind);
                let tol = FUSION_REL_TOL * want.abs().max(1.0);
                assert!(
                    (got - want).abs() <= tol,
                    "case {case}: {kind:?} {got} vs {want}"
                );
            }
            if row_count == 1 {
                assert_eq!(out.semimature, rows[0][2], "semimature must equal safe exactly");
            }
        }
        assert!(start.elapsed() < FUSION_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 2: MCAV equals a brute-force recount of the serialized log
// ---------------------------------------------------------------------------

/// Oracle: re-count mature/total appearances straight off the log text.
fn recount_serialized(text: &str) -> BTreeMap<String, (u64, u64)> {
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for line in text.lines() {
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens[0] != "R" {
            continue;
        }
        let mature = tokens[2] == "M";
        for name in &tokens[6..] {
            let entry = counts.entry(name.to_string()).or_insert((0, 0));
            entry.1 += 1;
            if mature {
                entry.0 += 1;
            }
        }
    }
    counts
}

#[test]
fn criterion_2_oracle_equivalence() {
    criterion(2, "MCAV equals brute-force recount on 50 datasets", || {
        let start = Instant::now();
        let datasets = generate_corpus(25, 25, CORPUS_SEED ^ 0xbeef).unwrap();
        assert_eq!(datasets.len(), ORACLE_DATASETS);
        let weights = derive_weights(2.0, 2.0).unwrap();
        for (i, dataset) in datasets.iter().enumerate() {
            let params = Params { rng_seed: i as u64, ..Params::default() };
            let log = run(dataset, &params, &weights, MappingCode::M1).unwrap();
            let report = compute_mcav(&log).unwrap();
            let text = io::write_presentation_log(&log).unwrap();
            let oracle = recount_serialized(&text);
            assert_eq!(oracle.len(), report.len(), "dataset {i}: type sets differ");
            for (name, (mature, total)) in &oracle {
                let entry = report
                    .get(&AntigenType::new(name).unwrap())
                    .unwrap_or_else(|| panic!("dataset {i}: {name} missing from report"));
                assert_eq!(entry.mature_presentations, *mature, "dataset {i}: {name}");
                assert_eq!(entry.total_presentations, *total, "dataset {i}: {name}");
                let expected_mcav = *mature as f64 / *total as f64;
                assert_eq!(
                    report.mcav(&AntigenType::new(name).unwrap()).unwrap(),
                    expected_mcav,
                    "dataset {i}: {name} mcav"
                );
            }
        }
        assert!(start.elapsed() < ORACLE_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 3: series-1 baseline separation and classification
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_series1_baseline() {
    criterion(3, "M1 baseline separates scan processes from normal ones", || {
        let start = Instant::now();
        let table = series1_table();

        let mean = |ty: &str| -> f64 {
            let row = table
                .get("M1/attack", ty)
                .unwrap_or_else(|| panic!("no M1/attack row for {ty}"));
            assert_eq!(row.n_runs, 30, "{ty} must aggregate 10 datasets x 3 repeats");
            row.mean_mcav
        };
        let nmap = mean("nmap");
        let pts = mean("pts");
        let bash = mean("bash");
        let sshd = mean("sshd");

        assert!(nmap >= SCAN_MEAN_FLOOR, "scan mean {nmap}");
        assert!(pts >= PARENT_MEAN_FLOOR, "parent mean {pts}");
        assert!(bash <= NORMAL_MEAN_CEILING, "bash mean {bash}");
        assert!(sshd <= NORMAL_MEAN_CEILING, "sshd mean {sshd}");
        let separation = nmap - bash.max(sshd);
        assert!(separation >= SEPARATION_FLOOR, "separation {separation}");

        // Classification at the fixed threshold against process truth.
        let truth = [("nmap", true), ("pts", true), ("bash", false), ("sshd", false)];
        let mut tp = 0;
        let mut fp = 0;
        let mut fn_ = 0;
        let mut tn = 0;
        for (ty, anomalous) in truth {
            let predicted = mean(ty) > CLASSIFY_THRESHOLD;
            match (predicted, anomalous) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        let tpr = tp as f64 / (tp + fn_) as f64;
        let fpr = fp as f64 / (fp + tn) as f64;
        assert_eq!(tpr, 1.0, "TPR");
        assert_eq!(fpr, 0.0, "FPR");
        assert!(start.elapsed() < BASELINE_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 4: mapping pathologies
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_mapping_pathologies() {
    criterion(4, "M3 floods normal sessions; M2 preserves the ordering", || {
        let start = Instant::now();
        let table = series1_table();

        for ty in ["bash", "sshd", "scp", "xfwd"] {
            let row = table
                .get("M3/normal", ty)
                .unwrap_or_else(|| panic!("no M3/normal row for {ty}"));
            assert!(
                row.mean_mcav >= M3_NORMAL_FLOOR,
                "M3/normal {ty} mean {}",
                row.mean_mcav
            );
        }

        let mean = |ty: &str| table.mean_mcav("M2/attack", ty).unwrap();
        let (nmap, pts) = (mean("nmap"), mean("pts"));
        let (bash, sshd) = (mean("bash"), mean("sshd"));
        assert!(nmap >= SCAN_MEAN_FLOOR, "M2 scan mean {nmap}");
        assert!(pts >= PARENT_MEAN_FLOOR, "M2 parent mean {pts}");
        assert!(bash <= NORMAL_MEAN_CEILING, "M2 bash mean {bash}");
        assert!(sshd <= NORMAL_MEAN_CEILING, "M2 sshd mean {sshd}");
        assert!(nmap - bash.max(sshd) >= SEPARATION_FLOOR, "M2 separation");
        assert!(start.elapsed() < PATHOLOGY_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 5: cell-count sensitivity
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_cell_count_sensitivity() {
    criterion(5, "starved population collapses scan MCAV; large ones agree", || {
        let start = Instant::now();
        let attack: Vec<Dataset> = corpus()
            .iter()
            .filter(|d| d.meta.scenario == Scenario::Attack)
            .cloned()
            .collect();
        let sweep = Series2Sweep {
            cells: vec![10, 100, 200, 500],
            dc_capacity: vec![],
            receptors: vec![],
            tissue_capacity: vec![],
        };
        let table = run_series2(
            &attack,
            &sweep,
            &Params::default(),
            &derive_weights(2.0, 2.0).unwrap(),
            3,
            HARNESS_SEED ^ 0x5eed,
        )
        .unwrap();

        let nmap_at = |c: &str| table.mean_mcav(c, "nmap").unwrap();
        let small = nmap_at("C10");
        let baseline = nmap_at("C100");
        assert!(
            small <= 0.5 * baseline,
            "C10 mean {small} not at most half of C100 mean {baseline}"
        );
        let big = [nmap_at("C100"), nmap_at("C200"), nmap_at("C500")];
        let spread = big.iter().cloned().fold(f64::MIN, f64::max)
            - big.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= CELL_BAND, "C100/C200/C500 spread {spread}");
        assert!(start.elapsed() < CELL_SWEEP_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 6: weight-grid surface
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_weight_grid_surface() {
    criterion(6, "scan MCAV stays high across the full weight grid", || {
        let start = Instant::now();
        let dataset = corpus()
            .iter()
            .find(|d| d.meta.scenario == Scenario::Attack)
            .unwrap();
        let table = run_series3(
            dataset,
            &WEIGHT_GRID,
            &Params::default(),
            3,
            HARNESS_SEED ^ 0x3333,
        )
        .unwrap();

        let conditions = table.conditions();
        assert_eq!(conditions.len(), GRID_CONDITIONS);
        let mut total_runs = 0;
        for condition in &conditions {
            let row = table.get(condition, "nmap").unwrap();
            assert!(
                row.mean_mcav >= GRID_SCAN_FLOOR,
                "{condition}: scan mean {}",
                row.mean_mcav
            );
            total_runs += row.n_runs;
        }
        assert_eq!(total_runs, GRID_RUNS);
        assert!(start.elapsed() < GRID_BUDGET, "took {:?}", start.elapsed());
    });
}

// ---------------------------------------------------------------------------
// Criterion 7: conservation and determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_conservation_and_determinism() {
    criterion(7, "antigen is conserved and replays are byte-identical", || {
        let dataset = &corpus()[0];
        let weights = derive_weights(2.0, 2.0).unwrap();
        let params = Params { rng_seed: 99, ..Params::default() };

        // Drive the engine cycle by cycle, checking the balance after each.
        let mut engine = Engine::new(params.clone(), weights.clone()).unwrap();
        let mut signal_cursor = 0;
        let mut antigen_cursor = 0;
        let windows = dataset.meta.duration_s.ceil() as usize;
        for window in 0..windows {
            let end = (window + 1) as f64;
            let mut matrices = Vec::new();
            while signal_cursor < dataset.signal_records.len()
                && dataset.signal_records[signal_cursor].timestamp < end
            {
                let r = &dataset.signal_records[signal_cursor];
                matrices.push(apply_mapping(MappingCode::M1, (r.pamp, r.danger, r.safe)).unwrap());
                signal_cursor += 1;
            }
            let mut events = Vec::new();
            while antigen_cursor < dataset.antigen_events.len()
                && dataset.antigen_events[antigen_cursor].timestamp < end
            {
                events.push(dataset.antigen_events[antigen_cursor].clone());
                antigen_cursor += 1;
            }
            engine.tissue_update(&matrices, events);
            engine.cell_cycle();
            let acct = engine.accounting();
            assert!(acct.balanced(), "cycle {window}: {acct:?}");
        }

        // Byte-identical logs and reports across two full runs.
        let log_a = run(dataset, &params, &weights, MappingCode::M1).unwrap();
        let log_b = run(dataset, &params, &weights, MappingCode::M1).unwrap();
        let text_a = io::write_presentation_log(&log_a).unwrap();
        let text_b = io::write_presentation_log(&log_b).unwrap();
        assert_eq!(text_a, text_b, "presentation logs differ");

        let report_a = classify(&compute_mcav(&log_a).unwrap(), 0.5).unwrap();
        let report_b = classify(&compute_mcav(&log_b).unwrap(), 0.5).unwrap();
        let csv_a = io::write_single_run_report(&[], &report_a).unwrap();
        let csv_b = io::write_single_run_report(&[], &report_b).unwrap();
        assert_eq!(csv_a, csv_b, "reports differ");

        // Loading the dataset from its file form must not change the run.
        let reloaded = io::parse_dataset(&io::write_dataset(dataset).unwrap()).unwrap();
        let log_c = run(&reloaded, &params, &weights, MappingCode::M1).unwrap();
        assert_eq!(text_a, io::write_presentation_log(&log_c).unwrap());
    });
}

// ---------------------------------------------------------------------------
// Criterion 8: degenerate context properties
// ---------------------------------------------------------------------------

fn constant_dataset(pamp: f64, danger: f64, safe: f64, seconds: usize) -> Dataset {
    let signal_records = (0..seconds)
        .map(|w| SignalRecord { timestamp: w as f64, pamp, danger, safe })
        .collect();
    let mut antigen_events = Vec::new();
    for w in 0..seconds {
        for (k, name) in ["alpha", "beta"].iter().enumerate() {
            antigen_events.push(AntigenEvent {
                timestamp: w as f64 + 0.2 + 0.3 * k as f64,
                antigen_type: AntigenType::new(name).unwrap(),
            });
        }
    }
    let truth = [("alpha", false), ("beta", false)]
        .into_iter()
        .map(|(n, a)| (AntigenType::new(n).unwrap(), a))
        .collect();
    Dataset {
        signal_records,
        antigen_events,
        truth,
        meta: DatasetMeta::bare(Scenario::Normal, 0, seconds as f64),
    }
}

#[test]
fn criterion_8_degenerate_contexts() {
    criterion(8, "zero-safe runs mature; zero-activating runs semi-mature", || {
        let weights = derive_weights(2.0, 2.0).unwrap();
        let params = Params::default();

        let zero_safe = constant_dataset(60.0, 40.0, 0.0, 15);
        let log = run(&zero_safe, &params, &weights, MappingCode::M1).unwrap();
        assert!(!log.records.is_empty());
        assert!(
            log.records.iter().all(|r| r.context == Context::Mature),
            "expected 100% mature records"
        );

        let zero_activating = constant_dataset(0.0, 0.0, 8.0, 15);
        let log = run(&zero_activating, &params, &weights, MappingCode::M1).unwrap();
        assert!(!log.records.is_empty());
        assert!(
            log.records.iter().all(|r| r.context == Context::SemiMature),
            "expected 100% semi-mature records"
        );
    });
}
