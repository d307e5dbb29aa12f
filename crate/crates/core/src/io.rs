//! On-disk formats: the line-oriented dataset file, CSV reports and the
//! presentation-log dump.
//!
//! Dataset files carry a `key=value` header block followed by one record per
//! line, `S <t> <pamp> <danger> <safe>` for signal samples and
//! `A <t> <antigen_type>` for antigen events, interleaved by timestamp.
//! Timestamps use millisecond precision. The writer is canonical: writing a
//! loaded dataset reproduces the original file byte for byte.
//!
//! Reports are CSV with a `#`-prefixed preamble embedding the effective run
//! configuration, so a single file carries both the numbers and the exact
//! settings that produced them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::aggregation::ClassificationResult;
use crate::engine::{PresentationLog, RunMeta};
use crate::experiments::{SummaryRow, SummaryTable};
use crate::model::{
    AntigenEvent, AntigenType, Context, PresentationRecord, PAMP_DANGER_MAX, SAFE_MAX,
};
use crate::sessiongen::{Dataset, DatasetMeta, Scenario, SignalRecord, SignalScales};

#[derive(Debug, Error)]
pub enum IoFormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },
    #[error("antigen type {0:?} cannot be serialized (whitespace, ',' and ':' are reserved)")]
    InvalidToken(String),
    #[error("refusing to write out-of-range signal record: {0}")]
    OutOfRange(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoFormatError {
    IoFormatError::Parse { line, message: message.into() }
}

/// Antigen types cross the format as bare tokens.
fn check_token(name: &str) -> Result<(), IoFormatError> {
    if name.is_empty()
        || name.chars().any(|c| c.is_whitespace() || c.is_control() || c == ',' || c == ':')
    {
        return Err(IoFormatError::InvalidToken(name.to_string()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

/// Serialize a dataset to its canonical text form.
pub fn write_dataset(dataset: &Dataset) -> Result<String, IoFormatError> {
    let meta = &dataset.meta;
    let mut out = String::new();
    out.push_str(&format!("scenario={}\n", meta.scenario.label()));
    out.push_str(&format!("seed={}\n", meta.seed));
    out.push_str(&format!("duration={:.3}\n", meta.duration_s));
    out.push_str(&format!("burstiness={:.3}\n", meta.burstiness));
    out.push_str(&format!("nonresponder_fraction={:.3}\n", meta.nonresponder_fraction));
    out.push_str(&format!("scale_pamp={:.3}\n", meta.scales.pamp));
    out.push_str(&format!("scale_danger={:.3}\n", meta.scales.danger));
    out.push_str(&format!("scale_safe={:.3}\n", meta.scales.safe));
    if let Some(targets) = meta.scan_targets {
        out.push_str(&format!("targets={targets}\n"));
    }
    if let Some((s, e)) = meta.scan_window {
        out.push_str(&format!("scan_start={s:.3}\nscan_end={e:.3}\n"));
    }
    if let Some((s, e)) = meta.transfer_window {
        out.push_str(&format!("transfer_start={s:.3}\ntransfer_end={e:.3}\n"));
    }
    let mut truth_parts = Vec::new();
    for (antigen_type, &anomalous) in &dataset.truth {
        check_token(antigen_type.as_str())?;
        truth_parts.push(format!("{}:{}", antigen_type, u8::from(anomalous)));
    }
    out.push_str(&format!("truth={}\n", truth_parts.join(",")));

    // Records interleaved by timestamp; signal samples first on ties.
    let mut si = 0;
    let mut ai = 0;
    let signals = &dataset.signal_records;
    let antigen = &dataset.antigen_events;
    while si < signals.len() || ai < antigen.len() {
        let take_signal = match (signals.get(si), antigen.get(ai)) {
            (Some(s), Some(a)) => s.timestamp <= a.timestamp,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if take_signal {
            let s = &signals[si];
            if !(0.0..=PAMP_DANGER_MAX).contains(&s.pamp)
                || !(0.0..=PAMP_DANGER_MAX).contains(&s.danger)
                || !(0.0..=SAFE_MAX).contains(&s.safe)
            {
                return Err(IoFormatError::OutOfRange(format!(
                    "t={} ({}, {}, {})",
                    s.timestamp, s.pamp, s.danger, s.safe
                )));
            }
            out.push_str(&format!(
                "S {:.3} {:.3} {:.3} {:.3}\n",
                s.timestamp, s.pamp, s.danger, s.safe
            ));
            si += 1;
        } else {
            let a = &antigen[ai];
            check_token(a.antigen_type.as_str())?;
            out.push_str(&format!("A {:.3} {}\n", a.timestamp, a.antigen_type));
            ai += 1;
        }
    }
    Ok(out)
}

pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<(), IoFormatError> {
    fs::write(path, write_dataset(dataset)?)?;
    Ok(())
}

fn parse_f64(line: usize, field: &str, token: &str) -> Result<f64, IoFormatError> {
    token
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {field} value {token:?}")))
}

/// Parse the canonical dataset text form, validating ranges and ordering.
pub fn parse_dataset(text: &str) -> Result<Dataset, IoFormatError> {
    let mut header: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut signal_records: Vec<SignalRecord> = Vec::new();
    let mut antigen_events: Vec<AntigenEvent> = Vec::new();
    let mut in_records = false;
    let mut last_signal_t = f64::NEG_INFINITY;
    let mut last_antigen_t = f64::NEG_INFINITY;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw_line.starts_with("S ") || raw_line.starts_with("A ") {
            in_records = true;
            let tokens: Vec<&str> = raw_line.split(' ').collect();
            match tokens[0] {
                "S" => {
                    if tokens.len() != 5 {
                        return Err(parse_err(lineno, "signal record needs 4 fields"));
                    }
                    let t = parse_f64(lineno, "timestamp", tokens[1])?;
                    let pamp = parse_f64(lineno, "pamp", tokens[2])?;
                    let danger = parse_f64(lineno, "danger", tokens[3])?;
                    let safe = parse_f64(lineno, "safe", tokens[4])?;
                    if !(t.is_finite() && t >= 0.0) {
                        return Err(parse_err(lineno, format!("timestamp {t} must be ≥ 0")));
                    }
                    if t < last_signal_t {
                        return Err(parse_err(lineno, "decreasing signal timestamp"));
                    }
                    if !(0.0..=PAMP_DANGER_MAX).contains(&pamp) {
                        return Err(parse_err(lineno, "pamp out of range [0,100]"));
                    }
                    if !(0.0..=PAMP_DANGER_MAX).contains(&danger) {
                        return Err(parse_err(lineno, "danger out of range [0,100]"));
                    }
                    if !(0.0..=SAFE_MAX).contains(&safe) {
                        return Err(parse_err(lineno, "safe out of range [0,10]"));
                    }
                    last_signal_t = t;
                    signal_records.push(SignalRecord { timestamp: t, pamp, danger, safe });
                }
                "A" => {
                    if tokens.len() != 3 {
                        return Err(parse_err(lineno, "antigen record needs 2 fields"));
                    }
                    let t = parse_f64(lineno, "timestamp", tokens[1])?;
                    if !(t.is_finite() && t >= 0.0) {
                        return Err(parse_err(lineno, format!("timestamp {t} must be ≥ 0")));
                    }
                    if t < last_antigen_t {
                        return Err(parse_err(lineno, "decreasing antigen timestamp"));
                    }
                    let antigen_type = AntigenType::new(tokens[2])
                        .map_err(|_| parse_err(lineno, "empty antigen type"))?;
                    last_antigen_t = t;
                    antigen_events.push(AntigenEvent { timestamp: t, antigen_type });
                }
                _ => unreachable!(),
            }
        } else if let Some((key, value)) = raw_line.split_once('=') {
            if in_records {
                return Err(parse_err(lineno, "header line after records"));
            }
            if header.contains_key(key) {
                return Err(parse_err(lineno, format!("duplicate header key {key:?}")));
            }
            header.insert(key.to_string(), (value.to_string(), lineno));
        } else {
            return Err(parse_err(lineno, format!("malformed line {raw_line:?}")));
        }
    }

    let mut get_required = |key: &str| -> Result<(String, usize), IoFormatError> {
        header
            .remove(key)
            .ok_or_else(|| parse_err(1, format!("missing header key {key:?}")))
    };

    let (scenario_raw, scenario_line) = get_required("scenario")?;
    let scenario = Scenario::parse(&scenario_raw)
        .ok_or_else(|| parse_err(scenario_line, format!("unknown scenario {scenario_raw:?}")))?;
    let (seed_raw, seed_line) = get_required("seed")?;
    let seed = seed_raw
        .parse::<u64>()
        .map_err(|_| parse_err(seed_line, format!("invalid seed {seed_raw:?}")))?;
    let (duration_raw, duration_line) = get_required("duration")?;
    let duration_s = parse_f64(duration_line, "duration", &duration_raw)?;
    let (truth_raw, truth_line) = get_required("truth")?;

    let mut truth = BTreeMap::new();
    if !truth_raw.is_empty() {
        for part in truth_raw.split(',') {
            let (name, flag) = part.split_once(':').ok_or_else(|| {
                parse_err(truth_line, format!("truth entry {part:?} is not name:0|1"))
            })?;
            let antigen_type = AntigenType::new(name)
                .map_err(|_| parse_err(truth_line, "empty antigen type in truth"))?;
            let anomalous = match flag {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(parse_err(
                        truth_line,
                        format!("truth flag {flag:?} must be 0 or 1"),
                    ))
                }
            };
            truth.insert(antigen_type, anomalous);
        }
    }

    let mut get_f64 = |key: &str, default: f64| -> Result<f64, IoFormatError> {
        match header.remove(key) {
            Some((v, line)) => parse_f64(line, key, &v),
            None => Ok(default),
        }
    };
    let burstiness = get_f64("burstiness", 0.0)?;
    let nonresponder_fraction = get_f64("nonresponder_fraction", 0.0)?;
    let default_scales = SignalScales::default();
    let scales = SignalScales {
        pamp: get_f64("scale_pamp", default_scales.pamp)?,
        danger: get_f64("scale_danger", default_scales.danger)?,
        safe: get_f64("scale_safe", default_scales.safe)?,
    };
    let scan_start = get_f64("scan_start", f64::NAN)?;
    let scan_end = get_f64("scan_end", f64::NAN)?;
    let scan_window =
        (scan_start.is_finite() && scan_end.is_finite()).then_some((scan_start, scan_end));
    let transfer_start = get_f64("transfer_start", f64::NAN)?;
    let transfer_end = get_f64("transfer_end", f64::NAN)?;
    let transfer_window = (transfer_start.is_finite() && transfer_end.is_finite())
        .then_some((transfer_start, transfer_end));
    let scan_targets = match header.remove("targets") {
        Some((v, line)) => Some(
            v.parse::<u32>()
                .map_err(|_| parse_err(line, format!("invalid targets {v:?}")))?,
        ),
        None => None,
    };

    if let Some((key, (_, line))) = header.into_iter().next() {
        return Err(parse_err(line, format!("unknown header key {key:?}")));
    }

    Ok(Dataset {
        signal_records,
        antigen_events,
        truth,
        meta: DatasetMeta {
            scenario,
            seed,
            duration_s,
            scan_targets,
            scan_window,
            transfer_window,
            burstiness,
            nonresponder_fraction,
            scales,
        },
    })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, IoFormatError> {
    parse_dataset(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

fn preamble(config: &[(String, String)]) -> String {
    config
        .iter()
        .map(|(k, v)| format!("# {k}={v}\n"))
        .collect()
}

/// Single-run report: per-type presentation counts, MCAV and label, preceded
/// by the effective configuration as `#` comment lines.
pub fn write_single_run_report(
    config: &[(String, String)],
    result: &ClassificationResult,
) -> Result<String, IoFormatError> {
    let mut csv_writer = csv::Writer::from_writer(Vec::new());
    csv_writer.write_record(["antigen_type", "mature", "total", "mcav", "label"])?;
    for (antigen_type, (entry, label)) in result.iter() {
        csv_writer.write_record([
            antigen_type.as_str(),
            &entry.mature_presentations.to_string(),
            &entry.total_presentations.to_string(),
            &format!("{:.4}", entry.mcav()),
            label.as_str(),
        ])?;
    }
    let body = String::from_utf8(csv_writer.into_inner().expect("vec writer")).expect("utf8");
    Ok(format!("{}{body}", preamble(config)))
}

/// Summary report: one row per (condition, process), preceded by the plan
/// configuration.
pub fn write_summary_report(
    config: &[(String, String)],
    table: &SummaryTable,
) -> Result<String, IoFormatError> {
    let mut csv_writer = csv::Writer::from_writer(Vec::new());
    csv_writer.write_record(["condition", "antigen_type", "mean_mcav", "stdev_mcav", "n_runs"])?;
    for row in table.rows() {
        csv_writer.write_record([
            row.condition.as_str(),
            row.antigen_type.as_str(),
            &format!("{:.4}", row.mean_mcav),
            &format!("{:.4}", row.stdev_mcav),
            &row.n_runs.to_string(),
        ])?;
    }
    let body = String::from_utf8(csv_writer.into_inner().expect("vec writer")).expect("utf8");
    Ok(format!("{}{body}", preamble(config)))
}

/// Split a report into its configuration preamble and CSV body.
pub fn split_report(text: &str) -> (Vec<(String, String)>, String) {
    let mut config = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                config.push((k.to_string(), v.to_string()));
                continue;
            }
        }
        body.push_str(line);
        body.push('\n');
    }
    (config, body)
}

/// Parse the CSV body of a summary report back into a table.
pub fn parse_summary_report(text: &str) -> Result<SummaryTable, IoFormatError> {
    let (_, body) = split_report(text);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("");
        rows.push(SummaryRow {
            condition: get(0).to_string(),
            antigen_type: AntigenType::new(get(1))
                .map_err(|_| parse_err(0, "empty antigen type in summary row"))?,
            mean_mcav: get(2).parse().map_err(|_| parse_err(0, "bad mean_mcav"))?,
            stdev_mcav: get(3).parse().map_err(|_| parse_err(0, "bad stdev_mcav"))?,
            n_runs: get(4).parse().map_err(|_| parse_err(0, "bad n_runs"))?,
        });
    }
    Ok(SummaryTable::from_rows(rows))
}

// ---------------------------------------------------------------------------
// Presentation log files
// ---------------------------------------------------------------------------

/// Serialize a presentation log: one `L` metadata line, then one `R` line
/// per record carrying cycle, context, flush tag, the two cumulative outputs
/// and the antigen list.
pub fn write_presentation_log(log: &PresentationLog) -> Result<String, IoFormatError> {
    let m = &log.meta;
    let mut out = format!(
        "L {} {} {} {} {} {} {}\n",
        m.cycles_executed,
        m.data_windows,
        m.antigen_ingested,
        m.antigen_dropped,
        m.antigen_presented,
        m.antigen_flushed,
        m.store_leftover
    );
    for r in &log.records {
        let context = match r.context {
            Context::Mature => "M",
            Context::SemiMature => "S",
        };
        let flushed = if r.flushed { "F" } else { "-" };
        out.push_str(&format!(
            "R {} {} {} {:.6} {:.6}",
            r.cycle_index, context, flushed, r.cumulative_mature, r.cumulative_semimature
        ));
        for antigen in &r.antigen_list {
            check_token(antigen.as_str())?;
            out.push(' ');
            out.push_str(antigen.as_str());
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a presentation-log dump.
pub fn parse_presentation_log(text: &str) -> Result<PresentationLog, IoFormatError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty presentation log"))?;
    let meta_tokens: Vec<&str> = first.split(' ').collect();
    if meta_tokens.len() != 8 || meta_tokens[0] != "L" {
        return Err(parse_err(1, "first line must be the L metadata line"));
    }
    let parse_u64 = |line: usize, token: &str| -> Result<u64, IoFormatError> {
        token
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("invalid count {token:?}")))
    };
    let meta = RunMeta {
        cycles_executed: parse_u64(1, meta_tokens[1])?,
        data_windows: parse_u64(1, meta_tokens[2])?,
        antigen_ingested: parse_u64(1, meta_tokens[3])?,
        antigen_dropped: parse_u64(1, meta_tokens[4])?,
        antigen_presented: parse_u64(1, meta_tokens[5])?,
        antigen_flushed: parse_u64(1, meta_tokens[6])?,
        store_leftover: parse_u64(1, meta_tokens[7])?,
    };
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.len() < 6 || tokens[0] != "R" {
            return Err(parse_err(lineno, "record line must start with R"));
        }
        let context = match tokens[2] {
            "M" => Context::Mature,
            "S" => Context::SemiMature,
            other => return Err(parse_err(lineno, format!("unknown context {other:?}"))),
        };
        let flushed = match tokens[3] {
            "F" => true,
            "-" => false,
            other => return Err(parse_err(lineno, format!("unknown flush tag {other:?}"))),
        };
        let antigen_list = tokens[6..]
            .iter()
            .map(|t| AntigenType::new(t).map_err(|_| parse_err(lineno, "empty antigen type")))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(PresentationRecord {
            antigen_list,
            cumulative_mature: parse_f64(lineno, "cumulative_mature", tokens[4])?,
            cumulative_semimature: parse_f64(lineno, "cumulative_semimature", tokens[5])?,
            context,
            cycle_index: parse_u64(lineno, tokens[1])?,
            flushed,
        });
    }
    Ok(PresentationLog { records, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sessiongen::{generate_session, SessionConfig};

    #[test]
    fn dataset_round_trip_is_byte_identical() {
        for config in [SessionConfig::attack(3), SessionConfig::normal(4)] {
            let dataset = generate_session(&config).unwrap();
            let text = write_dataset(&dataset).unwrap();
            let parsed = parse_dataset(&text).unwrap();
            let rewritten = write_dataset(&parsed).unwrap();
            assert_eq!(text, rewritten);
            assert_eq!(parsed.meta, dataset.meta);
            assert_eq!(parsed.truth, dataset.truth);
            assert_eq!(parsed.antigen_events.len(), dataset.antigen_events.len());
        }
    }

    #[test]
    fn out_of_range_pamp_reports_line_number() {
        let text = "scenario=normal\nseed=1\nduration=5.000\ntruth=x:0\nS 3.000 150.000 40.000 6.000\n";
        let err = parse_dataset(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pamp out of range [0,100]"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn malformed_line_is_rejected() {
        let text = "scenario=normal\nseed=1\nduration=5.000\ntruth=x:0\nwhat is this\n";
        let err = parse_dataset(text).unwrap_err().to_string();
        assert!(err.contains("malformed line"), "{err}");
    }

    #[test]
    fn decreasing_timestamps_rejected_per_kind() {
        let base = "scenario=normal\nseed=1\nduration=5.000\ntruth=x:0\n";
        let bad_signal = format!("{base}S 2.000 0.000 0.000 5.000\nS 1.000 0.000 0.000 5.000\n");
        assert!(parse_dataset(&bad_signal).unwrap_err().to_string().contains("decreasing"));
        let bad_antigen = format!("{base}A 2.000 x\nA 1.500 x\n");
        assert!(parse_dataset(&bad_antigen).unwrap_err().to_string().contains("decreasing"));
        // Interleaving is free to go "backwards" across kinds.
        let interleaved = format!("{base}A 2.000 x\nS 1.000 0.000 0.000 5.000\n");
        assert!(parse_dataset(&interleaved).is_ok());
    }

    #[test]
    fn empty_antigen_section_loads() {
        let text = "scenario=normal\nseed=1\nduration=5.000\ntruth=x:0\nS 0.000 0.000 0.000 5.000\n";
        let ds = parse_dataset(text).unwrap();
        assert!(ds.antigen_events.is_empty());
    }

    #[test]
    fn unknown_header_key_rejected() {
        let text = "scenario=normal\nseed=1\nduration=5.000\ntruth=x:0\nmystery=1\n";
        assert!(parse_dataset(text).unwrap_err().to_string().contains("unknown header key"));
    }

    #[test]
    fn out_of_range_signals_are_policed_on_write() {
        let mut ds = generate_session(&SessionConfig::normal(1)).unwrap();
        ds.signal_records[0].safe = 11.0;
        assert!(matches!(write_dataset(&ds), Err(IoFormatError::OutOfRange(_))));
    }

    #[test]
    fn antigen_type_tokens_are_policed_on_write() {
        let mut ds = generate_session(&SessionConfig::normal(1)).unwrap();
        ds.antigen_events[0].antigen_type = AntigenType::new("has space").unwrap();
        assert!(matches!(write_dataset(&ds), Err(IoFormatError::InvalidToken(_))));
    }

    #[test]
    fn presentation_log_round_trips() {
        use crate::engine::run;
        use crate::fusion::{derive_weights, MappingCode};
        use crate::model::Params;
        let dataset = generate_session(&SessionConfig::attack(5)).unwrap();
        let log = run(
            &dataset,
            &Params::default(),
            &derive_weights(2.0, 2.0).unwrap(),
            MappingCode::M1,
        )
        .unwrap();
        let text = write_presentation_log(&log).unwrap();
        let parsed = parse_presentation_log(&text).unwrap();
        assert_eq!(parsed.meta, log.meta);
        assert_eq!(parsed.records.len(), log.records.len());
        let rewritten = write_presentation_log(&parsed).unwrap();
        assert_eq!(text, rewritten);
    }

    #[test]
    fn summary_report_round_trips_through_csv() {
        use crate::experiments::summarize;
        use crate::model::{McavEntry, McavReport};
        let mut entries = std::collections::BTreeMap::new();
        entries.insert(
            AntigenType::new("nmap").unwrap(),
            McavEntry { mature_presentations: 4, total_presentations: 5 },
        );
        let report = McavReport::from_entries(entries);
        let table = summarize(&[("M1/attack".to_string(), report)]);
        let config = vec![("series".to_string(), "1".to_string())];
        let text = write_summary_report(&config, &table).unwrap();
        assert!(text.starts_with("# series=1\n"));
        assert!(text.contains("condition,antigen_type,mean_mcav,stdev_mcav,n_runs"));
        assert!(text.contains("M1/attack,nmap,0.8000,0.0000,1"));
        let parsed = parse_summary_report(&text).unwrap();
        assert_eq!(parsed.rows().len(), 1);
        assert_eq!(parsed.mean_mcav("M1/attack", "nmap"), Some(0.8));
        let (config_back, _) = split_report(&text);
        assert_eq!(config_back, config);
    }

    #[test]
    fn single_run_report_formats_mcav_with_four_decimals() {
        use crate::aggregation::{classify, compute_mcav};
        use crate::engine::run;
        use crate::fusion::{derive_weights, MappingCode};
        use crate::model::Params;
        let dataset = generate_session(&SessionConfig::attack(5)).unwrap();
        let log = run(
            &dataset,
            &Params::default(),
            &derive_weights(2.0, 2.0).unwrap(),
            MappingCode::M1,
        )
        .unwrap();
        let result = classify(&compute_mcav(&log).unwrap(), 0.5).unwrap();
        let text = write_single_run_report(&[], &result).unwrap();
        assert!(text.starts_with("antigen_type,mature,total,mcav,label"));
        for line in text.lines().skip(1) {
            let mcav_field = line.split(',').nth(3).unwrap();
            assert_eq!(mcav_field.split('.').nth(1).unwrap().len(), 4, "{line}");
        }
    }
}
