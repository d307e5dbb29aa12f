//! Synthetic attack and normal session generator.
//!
//! Sessions mirror the structure of the original captures: an attack session
//! is a remote shell session with a ping scan embedded in a scan window, a
//! normal session is a remote shell session with a sustained file transfer.
//! Each session yields raw per-second counters (ICMP destination-unreachable
//! errors, packets sent) that are normalised into PAMP / danger / safe
//! signals, plus per-process antigen event streams whose rates follow each
//! process's activity profile.
//!
//! Absolute magnitudes are synthetic; what matters downstream is the shape:
//! elevated PAMP and danger with depressed safe during the scan, smooth
//! traffic with near-zero PAMP during a file transfer. Every stream is
//! reproducible from the config seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AntigenEvent, AntigenType, ModelError, PAMP_DANGER_MAX, SAFE_MAX};
use crate::seed;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("raw counter {0} is negative or not finite")]
    NegativeCounter(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Attack,
    Normal,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Attack => "attack",
            Scenario::Normal => "normal",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "attack" => Some(Scenario::Attack),
            "normal" => Some(Scenario::Normal),
            _ => None,
        }
    }
}

/// Piecewise-constant activity rate (events per second) over a time span.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub rate_per_s: f64,
}

/// One monitored process: display name, the antigen type its events carry,
/// whether ground truth marks it anomalous, and its activity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessProfile {
    pub name: String,
    pub antigen_type: AntigenType,
    pub anomalous: bool,
    pub segments: Vec<RateSegment>,
}

impl ProcessProfile {
    fn new(name: &str, anomalous: bool, segments: Vec<RateSegment>) -> Self {
        ProcessProfile {
            name: name.to_string(),
            antigen_type: AntigenType::new(name).expect("roster names are nonempty"),
            anomalous,
            segments,
        }
    }

    /// Expected event mass inside the 1 s bin starting at `w`.
    fn mass_in_bin(&self, w: f64) -> f64 {
        let (lo, hi) = (w, w + 1.0);
        self.segments
            .iter()
            .map(|seg| {
                let overlap = (hi.min(seg.end_s) - lo.max(seg.start_s)).max(0.0);
                overlap * seg.rate_per_s
            })
            .sum()
    }

    /// Expected event count over the whole session.
    pub fn expected_events(&self) -> f64 {
        self.segments
            .iter()
            .map(|seg| (seg.end_s - seg.start_s).max(0.0) * seg.rate_per_s)
            .sum()
    }
}

/// Normalisation scale factors applied to the raw counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalScales {
    /// PAMP per destination-unreachable error/s.
    pub pamp: f64,
    /// Danger per packet/s.
    pub danger: f64,
    /// Safe decrement per unit |Δ packets/s|.
    pub safe: f64,
}

impl Default for SignalScales {
    fn default() -> Self {
        // pamp: saturates near 100 at the default scan's DU peak
        // (0.7 * 1020 addresses / 25 s ≈ 28.6 errors/s).
        SignalScales {
            pamp: 3.5,
            danger: 1.2,
            safe: 2.0,
        }
    }
}

/// Configuration for one synthetic session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub scenario: Scenario,
    pub duration_s: f64,
    pub process_roster: Vec<ProcessProfile>,
    /// Scan span inside the session; attack scenarios only.
    pub scan_window: Option<(f64, f64)>,
    /// Addresses probed by the scan.
    pub scan_target_count: u32,
    /// Relative amplitude of per-second variation in scan traffic.
    pub burstiness: f64,
    /// Fraction of scanned addresses that answer with a DU error.
    pub nonresponder_fraction: f64,
    pub scales: SignalScales,
    pub rng_seed: u64,
}

pub const DEFAULT_DURATION_S: f64 = 70.0;
pub const DEFAULT_SCAN_TARGETS: u32 = 1020;
const BACKGROUND_PPS: f64 = 8.0;
const BACKGROUND_NOISE_PPS: f64 = 0.5;
const TRANSFER_PLATEAU_PPS: f64 = 24.0;
const TRANSFER_RAMP_S: f64 = 12.0;

impl SessionConfig {
    /// Attack session with default duration and target count.
    pub fn attack(seed: u64) -> Self {
        Self::attack_with(seed, DEFAULT_DURATION_S, DEFAULT_SCAN_TARGETS)
    }

    /// Attack session: shell activity bracketing a ping scan. The shell idles
    /// while the scan runs; the scan's parent terminal relays its output.
    pub fn attack_with(seed: u64, duration_s: f64, targets: u32) -> Self {
        let (scan_start, scan_end) = (duration_s * 2.0 / 7.0, duration_s * 4.5 / 7.0);
        let bracketed = |outside: f64, inside: f64| {
            vec![
                RateSegment { start_s: 0.0, end_s: scan_start, rate_per_s: outside },
                RateSegment { start_s: scan_start, end_s: scan_end, rate_per_s: inside },
                RateSegment { start_s: scan_end, end_s: duration_s, rate_per_s: outside },
            ]
        };
        let scan_len = scan_end - scan_start;
        let nmap_rate = targets as f64 * 1.1 / scan_len;
        SessionConfig {
            scenario: Scenario::Attack,
            duration_s,
            process_roster: vec![
                ProcessProfile::new("sshd", false, bracketed(4.0, 0.8)),
                ProcessProfile::new("bash", false, bracketed(8.0, 0.5)),
                ProcessProfile::new(
                    "nmap",
                    true,
                    vec![RateSegment { start_s: scan_start, end_s: scan_end, rate_per_s: nmap_rate }],
                ),
                ProcessProfile::new("pts", true, bracketed(1.5, 14.0)),
            ],
            scan_window: Some((scan_start, scan_end)),
            scan_target_count: targets,
            burstiness: 0.6,
            nonresponder_fraction: 0.7,
            scales: SignalScales::default(),
            rng_seed: seed,
        }
    }

    /// Normal session with default duration.
    pub fn normal(seed: u64) -> Self {
        Self::normal_with(seed, DEFAULT_DURATION_S)
    }

    /// Normal session: shell activity plus a sustained secure file transfer.
    pub fn normal_with(seed: u64, duration_s: f64) -> Self {
        let (t0, t1) = transfer_window(duration_s);
        let full = |rate| vec![RateSegment { start_s: 0.0, end_s: duration_s, rate_per_s: rate }];
        SessionConfig {
            scenario: Scenario::Normal,
            duration_s,
            process_roster: vec![
                ProcessProfile::new("sshd", false, full(4.0)),
                ProcessProfile::new("bash", false, full(6.0)),
                ProcessProfile::new("xfwd", false, full(2.0)),
                ProcessProfile::new(
                    "scp",
                    false,
                    vec![RateSegment { start_s: t0, end_s: t1, rate_per_s: 20.0 }],
                ),
            ],
            scan_window: None,
            scan_target_count: 0,
            burstiness: 0.6,
            nonresponder_fraction: 0.7,
            scales: SignalScales::default(),
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if !(self.duration_s.is_finite() && self.duration_s >= 2.0) {
            return Err(GenError::InvalidConfig(
                "duration_s must be a finite value of at least 2 seconds".into(),
            ));
        }
        if self.process_roster.is_empty() {
            return Err(GenError::InvalidConfig("process roster must not be empty".into()));
        }
        if self.scenario == Scenario::Attack {
            let (s, e) = self
                .scan_window
                .ok_or_else(|| GenError::InvalidConfig("attack sessions need a scan window".into()))?;
            if !(0.0 <= s && s < e && e <= self.duration_s) {
                return Err(GenError::InvalidConfig(format!(
                    "scan window ({s}, {e}) must lie inside [0, {}]",
                    self.duration_s
                )));
            }
            if self.scan_target_count == 0 {
                return Err(GenError::InvalidConfig("scan_target_count must be ≥ 1".into()));
            }
        }
        if !(self.burstiness.is_finite() && self.burstiness >= 0.0) {
            return Err(GenError::InvalidConfig("burstiness must be ≥ 0".into()));
        }
        if !(0.0..=1.0).contains(&self.nonresponder_fraction) {
            return Err(GenError::InvalidConfig(
                "nonresponder_fraction must lie in [0, 1]".into(),
            ));
        }
        for scale in [self.scales.pamp, self.scales.danger, self.scales.safe] {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(GenError::InvalidConfig("signal scales must be positive".into()));
            }
        }
        for p in &self.process_roster {
            for seg in &p.segments {
                if !(seg.rate_per_s.is_finite() && seg.rate_per_s >= 0.0) {
                    return Err(GenError::InvalidConfig(format!(
                        "process {} has a negative activity rate",
                        p.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn transfer_window(duration_s: f64) -> (f64, f64) {
    (duration_s * 0.15, duration_s * 0.88)
}

/// One normalised signal sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRecord {
    pub timestamp: f64,
    pub pamp: f64,
    pub danger: f64,
    pub safe: f64,
}

/// Dataset metadata: scenario identity plus the generation config echo.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub scenario: Scenario,
    pub seed: u64,
    pub duration_s: f64,
    pub scan_targets: Option<u32>,
    pub scan_window: Option<(f64, f64)>,
    pub transfer_window: Option<(f64, f64)>,
    pub burstiness: f64,
    pub nonresponder_fraction: f64,
    pub scales: SignalScales,
}

impl DatasetMeta {
    /// Minimal metadata for hand-built datasets in tests and replay.
    pub fn bare(scenario: Scenario, seed: u64, duration_s: f64) -> Self {
        DatasetMeta {
            scenario,
            seed,
            duration_s,
            scan_targets: None,
            scan_window: None,
            transfer_window: None,
            burstiness: 0.0,
            nonresponder_fraction: 0.0,
            scales: SignalScales::default(),
        }
    }
}

/// A generated (or loaded) session ready for detection runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub signal_records: Vec<SignalRecord>,
    pub antigen_events: Vec<AntigenEvent>,
    /// Ground truth: antigen type → anomalous?
    pub truth: BTreeMap<AntigenType, bool>,
    pub meta: DatasetMeta,
}

/// Normalise raw `(du_errors_per_s, packets_per_s)` counters sampled at 1 Hz.
///
/// PAMP and danger scale linearly with their counters and clamp to [0, 100];
/// safe starts from its maximum and is decremented by the magnitude of the
/// packets/s derivative, clamping to [0, 10]. The first sample has no
/// predecessor and counts as zero change.
pub fn derive_signals(
    raw: &[(f64, f64)],
    scales: &SignalScales,
) -> Result<Vec<[f64; 3]>, GenError> {
    for &(du, pps) in raw {
        if !du.is_finite() || du < 0.0 {
            return Err(GenError::NegativeCounter(du));
        }
        if !pps.is_finite() || pps < 0.0 {
            return Err(GenError::NegativeCounter(pps));
        }
    }
    let mut out = Vec::with_capacity(raw.len());
    let mut prev_pps: Option<f64> = None;
    for &(du, pps) in raw {
        let delta = match prev_pps {
            Some(prev) => (pps - prev).abs(),
            None => 0.0,
        };
        let pamp = (scales.pamp * du).clamp(0.0, PAMP_DANGER_MAX);
        let danger = (scales.danger * pps).clamp(0.0, PAMP_DANGER_MAX);
        let safe = (SAFE_MAX - scales.safe * delta).clamp(0.0, SAFE_MAX);
        out.push([pamp, danger, safe]);
        prev_pps = Some(pps);
    }
    Ok(out)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Generate one session from its config. All randomness derives from the
/// config seed, so identical configs yield identical datasets.
pub fn generate_session(config: &SessionConfig) -> Result<Dataset, GenError> {
    config.validate()?;
    let seconds = config.duration_s.ceil() as usize;

    // Raw counters, one sample per second.
    let mut traffic_rng = ChaCha8Rng::seed_from_u64(seed::mix(config.rng_seed, 1));
    let mut raw = Vec::with_capacity(seconds);
    match config.scenario {
        Scenario::Attack => {
            let (scan_start, scan_end) = config.scan_window.expect("validated");
            let scan_len = scan_end - scan_start;
            let probe_rate = config.scan_target_count as f64 / scan_len;
            for w in 0..seconds {
                let t = w as f64;
                let bg = BACKGROUND_PPS + BACKGROUND_NOISE_PPS * traffic_rng.gen_range(-1.0..1.0);
                let in_scan = t + 0.5 >= scan_start && t + 0.5 < scan_end;
                let (du, pps) = if in_scan {
                    let burst =
                        (1.0 + config.burstiness * traffic_rng.gen_range(-1.0..1.0)).max(0.05);
                    let probes = probe_rate * burst;
                    (config.nonresponder_fraction * probes, bg + probes)
                } else {
                    (0.0, bg)
                };
                raw.push((du, pps));
            }
        }
        Scenario::Normal => {
            let (t0, t1) = transfer_window(config.duration_s);
            for w in 0..seconds {
                let t = w as f64 + 0.5;
                let bg = BACKGROUND_PPS + BACKGROUND_NOISE_PPS * traffic_rng.gen_range(-1.0..1.0);
                let transfer = if t < t0 || t >= t1 {
                    0.0
                } else if t < t0 + TRANSFER_RAMP_S {
                    TRANSFER_PLATEAU_PPS * (t - t0) / TRANSFER_RAMP_S
                } else if t >= t1 - TRANSFER_RAMP_S {
                    TRANSFER_PLATEAU_PPS * (t1 - t) / TRANSFER_RAMP_S
                } else {
                    TRANSFER_PLATEAU_PPS
                };
                raw.push((0.0, bg + transfer));
            }
        }
    }

    let normalised = derive_signals(&raw, &config.scales)?;
    let signal_records: Vec<SignalRecord> = normalised
        .iter()
        .enumerate()
        .map(|(w, v)| SignalRecord {
            timestamp: w as f64,
            pamp: round3(v[0]),
            danger: round3(v[1]),
            safe: round3(v[2]),
        })
        .collect();

    // Antigen events: error-diffusion emission keeps each process's event
    // count within one event of its profile mass; placement inside each bin
    // is uniform random.
    let mut events: Vec<AntigenEvent> = Vec::new();
    for (k, process) in config.process_roster.iter().enumerate() {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed::mix_all(config.rng_seed, &[10, k as u64]));
        let mut carry = 0.0f64;
        for w in 0..seconds {
            carry += process.mass_in_bin(w as f64);
            let n = carry.floor() as usize;
            carry -= n as f64;
            let mut times: Vec<f64> = (0..n)
                .map(|_| round3(w as f64 + rng.gen_range(0.0..0.999)))
                .collect();
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for t in times {
                events.push(AntigenEvent {
                    timestamp: t,
                    antigen_type: process.antigen_type.clone(),
                });
            }
        }
    }
    events.sort_by(|a, b| {
        a.timestamp
            .partial_cmp(&b.timestamp)
            .unwrap()
            .then_with(|| a.antigen_type.cmp(&b.antigen_type))
    });

    let truth: BTreeMap<AntigenType, bool> = config
        .process_roster
        .iter()
        .map(|p| (p.antigen_type.clone(), p.anomalous))
        .collect();

    // Echoed times carry the file format's millisecond precision.
    let round_window = |w: (f64, f64)| (round3(w.0), round3(w.1));
    Ok(Dataset {
        signal_records,
        antigen_events: events,
        truth,
        meta: DatasetMeta {
            scenario: config.scenario,
            seed: config.rng_seed,
            duration_s: round3(config.duration_s),
            scan_targets: (config.scenario == Scenario::Attack).then_some(config.scan_target_count),
            scan_window: config.scan_window.map(round_window),
            transfer_window: (config.scenario == Scenario::Normal)
                .then(|| round_window(transfer_window(config.duration_s))),
            burstiness: config.burstiness,
            nonresponder_fraction: config.nonresponder_fraction,
            scales: config.scales,
        },
    })
}

/// Generate a corpus of attack and normal sessions with pairwise-distinct
/// derived seeds.
pub fn generate_corpus(
    n_attack: usize,
    n_normal: usize,
    base_seed: u64,
) -> Result<Vec<Dataset>, GenError> {
    if n_attack + n_normal == 0 {
        return Err(GenError::InvalidConfig("corpus must contain at least one dataset".into()));
    }
    let mut out = Vec::with_capacity(n_attack + n_normal);
    for i in 0..n_attack {
        let config = SessionConfig::attack(seed::mix_all(base_seed, &[0, i as u64]));
        out.push(generate_session(&config)?);
    }
    for j in 0..n_normal {
        let config = SessionConfig::normal(seed::mix_all(base_seed, &[1, j as u64]));
        out.push(generate_session(&config)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_traffic_gives_max_safe_and_zero_pamp() {
        let raw = vec![(0.0, 20.0); 5];
        let sig = derive_signals(&raw, &SignalScales::default()).unwrap();
        for s in &sig {
            assert_eq!(s[0], 0.0);
            assert!(s[1] > 0.0);
            assert_eq!(s[2], 10.0);
        }
    }

    #[test]
    fn zero_du_means_zero_pamp_throughout() {
        let config = SessionConfig::normal(3);
        let ds = generate_session(&config).unwrap();
        assert!(ds.signal_records.iter().all(|r| r.pamp == 0.0));
    }

    #[test]
    fn packet_burst_dips_safe_at_edges_and_recovers() {
        let b = 3.0;
        let raw = vec![(0.0, 10.0), (0.0, 10.0), (0.0, 10.0 + b), (0.0, 10.0), (0.0, 10.0)];
        let scales = SignalScales::default();
        let sig = derive_signals(&raw, &scales).unwrap();
        assert_eq!(sig[1][2], 10.0);
        assert_eq!(sig[2][2], 10.0 - scales.safe * b);
        assert_eq!(sig[3][2], 10.0 - scales.safe * b);
        assert_eq!(sig[4][2], 10.0);
    }

    #[test]
    fn burst_clamps_safe_at_zero() {
        let raw = vec![(0.0, 10.0), (0.0, 100.0)];
        let sig = derive_signals(&raw, &SignalScales::default()).unwrap();
        assert_eq!(sig[1][2], 0.0);
    }

    #[test]
    fn negative_counters_rejected() {
        assert!(derive_signals(&[(-1.0, 5.0)], &SignalScales::default()).is_err());
        assert!(derive_signals(&[(0.0, -5.0)], &SignalScales::default()).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_session(&SessionConfig::attack(99)).unwrap();
        let b = generate_session(&SessionConfig::attack(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn attack_pamp_concentrates_in_scan_window() {
        for s in 0..5 {
            let ds = generate_session(&SessionConfig::attack(s)).unwrap();
            let (t0, t1) = ds.meta.scan_window.unwrap();
            let (mut inside, mut n_in, mut outside, mut n_out) = (0.0, 0, 0.0, 0);
            for r in &ds.signal_records {
                if r.timestamp >= t0 && r.timestamp < t1 {
                    inside += r.pamp;
                    n_in += 1;
                } else {
                    outside += r.pamp;
                    n_out += 1;
                }
            }
            assert!(inside / n_in as f64 > outside / n_out as f64);
        }
    }

    #[test]
    fn normal_pamp_stays_below_floor() {
        for s in 0..5 {
            let ds = generate_session(&SessionConfig::normal(s)).unwrap();
            assert!(ds.signal_records.iter().all(|r| r.pamp <= 5.0));
        }
    }

    #[test]
    fn safe_is_antimonotone_in_packet_derivative() {
        let scales = SignalScales::default();
        let raw: Vec<(f64, f64)> = vec![
            (0.0, 10.0),
            (0.0, 12.0),
            (0.0, 11.0),
            (0.0, 14.0),
            (0.0, 14.0),
        ];
        let sig = derive_signals(&raw, &scales).unwrap();
        let deltas: Vec<f64> = raw
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).abs())
            .collect();
        for i in 1..raw.len() {
            for j in 1..raw.len() {
                let (da, db) = (deltas[i - 1], deltas[j - 1]);
                let (sa, sb) = (sig[i][2], sig[j][2]);
                if da < db {
                    assert!(sa >= sb, "safe must not rise with |Δpps|");
                }
            }
        }
    }

    #[test]
    fn event_counts_track_profiles() {
        for seed_v in [0u64, 7, 1234] {
            for config in [SessionConfig::attack(seed_v), SessionConfig::normal(seed_v)] {
                let ds = generate_session(&config).unwrap();
                for p in &config.process_roster {
                    let count = ds
                        .antigen_events
                        .iter()
                        .filter(|e| e.antigen_type == p.antigen_type)
                        .count() as f64;
                    let expected = p.expected_events();
                    let tol = (0.1 * expected).max(1.0);
                    assert!(
                        (count - expected).abs() <= tol,
                        "{}: {} events vs {} expected",
                        p.name,
                        count,
                        expected
                    );
                }
            }
        }
    }

    #[test]
    fn truth_marks_scan_and_parent_only() {
        let attack = generate_session(&SessionConfig::attack(1)).unwrap();
        let anomalous: Vec<&str> = attack
            .truth
            .iter()
            .filter(|(_, &a)| a)
            .map(|(t, _)| t.as_str())
            .collect();
        assert_eq!(anomalous, ["nmap", "pts"]);
        let normal = generate_session(&SessionConfig::normal(1)).unwrap();
        assert!(normal.truth.values().all(|&a| !a));
    }

    #[test]
    fn corpus_counts_and_distinctness() {
        let corpus = generate_corpus(10, 10, 5).unwrap();
        assert_eq!(corpus.len(), 20);
        assert_eq!(
            corpus.iter().filter(|d| d.meta.scenario == Scenario::Attack).count(),
            10
        );
        for i in 0..corpus.len() {
            for j in (i + 1)..corpus.len() {
                assert_ne!(corpus[i], corpus[j], "datasets {i} and {j} identical");
            }
        }

        let single = generate_corpus(1, 0, 5).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].meta.scenario, Scenario::Attack);

        assert!(generate_corpus(0, 0, 5).is_err());
    }

    #[test]
    fn timestamps_fit_inside_session() {
        let ds = generate_session(&SessionConfig::attack(11)).unwrap();
        assert!(ds
            .antigen_events
            .iter()
            .all(|e| e.timestamp >= 0.0 && e.timestamp < ds.meta.duration_s));
        let mut prev = 0.0;
        for e in &ds.antigen_events {
            assert!(e.timestamp >= prev);
            prev = e.timestamp;
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = SessionConfig::attack(1);
        c.scan_window = Some((60.0, 90.0));
        assert!(c.validate().is_err());

        let mut c = SessionConfig::normal(1);
        c.process_roster.clear();
        assert!(c.validate().is_err());

        let mut c = SessionConfig::attack(1);
        c.nonresponder_fraction = 1.5;
        assert!(c.validate().is_err());
    }
}
