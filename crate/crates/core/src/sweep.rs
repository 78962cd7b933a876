//! Case-by-case checks of "the largest layer is the unique maximum
//! antichain" over ranges of `(p, q, r)`, persisted one JSON record per line.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antichain::{check_klym_with, is_unique_max_antichain_with, width_with, AntichainWitness, EngineOptions};
use crate::certificate::{certified_width, theorem_bound, CertificateStatus};
use crate::combinatorics::{build_table, Family, GroundParams};
use crate::error::{Error, Result};
use crate::poset::{build_family, build_sphere, DEFAULT_ELEMENT_BUDGET};
use crate::report::{aligned, TableReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepStatus {
    VerifiedUnique,
    VerifiedSizeOnly,
    Tie,
    Counterexample,
    OverBudget,
}

impl SweepStatus {
    pub const ALL: [SweepStatus; 5] = [
        SweepStatus::VerifiedUnique,
        SweepStatus::VerifiedSizeOnly,
        SweepStatus::Tie,
        SweepStatus::Counterexample,
        SweepStatus::OverBudget,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepStatus::VerifiedUnique => "VERIFIED_UNIQUE",
            SweepStatus::VerifiedSizeOnly => "VERIFIED_SIZE_ONLY",
            SweepStatus::Tie => "TIE",
            SweepStatus::Counterexample => "COUNTEREXAMPLE",
            SweepStatus::OverBudget => "OVER_BUDGET",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepCertificate {
    Certified,
    CertifiedStrict,
    Infeasible,
    NotApplicable,
    Skipped,
}

impl SweepCertificate {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepCertificate::Certified => "CERTIFIED",
            SweepCertificate::CertifiedStrict => "CERTIFIED_STRICT",
            SweepCertificate::Infeasible => "INFEASIBLE",
            SweepCertificate::NotApplicable => "NOT_APPLICABLE",
            SweepCertificate::Skipped => "SKIPPED",
        }
    }
}

impl From<CertificateStatus> for SweepCertificate {
    fn from(s: CertificateStatus) -> Self {
        match s {
            CertificateStatus::Certified => SweepCertificate::Certified,
            CertificateStatus::CertifiedStrict => SweepCertificate::CertifiedStrict,
            CertificateStatus::Infeasible => SweepCertificate::Infeasible,
            CertificateStatus::NotApplicable => SweepCertificate::NotApplicable,
        }
    }
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("{s:?} is not a decimal natural")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(n: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match n {
                Some(n) => super::serialize(n, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            match Option::<String>::deserialize(d)? {
                Some(s) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| D::Error::custom(format!("{s:?} is not a decimal natural"))),
                None => Ok(None),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    #[serde(with = "decimal")]
    pub ball_size: BigUint,
    pub largest_layer_height: u32,
    #[serde(with = "decimal")]
    pub largest_layer_size: BigUint,
    pub tie: bool,
    #[serde(default, with = "decimal::option", skip_serializing_if = "Option::is_none")]
    pub width: Option<BigUint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique: Option<bool>,
    pub certificate: SweepCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klym_sphere: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem_bound_ok: Option<bool>,
    pub status: SweepStatus,
    pub elapsed_ms: u64,
}

impl SweepRecord {
    pub fn key(&self) -> (u32, u32, u32) {
        (self.p, self.q, self.r)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub engine: EngineOptions,
    pub element_budget: u64,
    pub uniqueness: bool,
    /// When false, `elapsed_ms` is written as 0 so reruns are byte-identical.
    pub timing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            engine: EngineOptions::default(),
            element_budget: DEFAULT_ELEMENT_BUDGET,
            uniqueness: true,
            timing: true,
        }
    }
}

/// A counterexample is a width above the largest layer, or a second maximum
/// antichain although the largest layer is strictly largest.
pub fn classify(width: Option<&BigUint>, layer_size: &BigUint, unique: Option<bool>, tie: bool) -> SweepStatus {
    match (width, unique) {
        (Some(w), _) if w != layer_size => SweepStatus::Counterexample,
        (_, Some(false)) if !tie => SweepStatus::Counterexample,
        (None, _) => SweepStatus::OverBudget,
        _ if tie => SweepStatus::Tie,
        (_, Some(true)) => SweepStatus::VerifiedUnique,
        _ => SweepStatus::VerifiedSizeOnly,
    }
}

/// Verdict for a single ball.
pub fn evaluate(params: &GroundParams, opts: &SweepOptions) -> Result<SweepRecord> {
    let started = Instant::now();
    let table = TableReport::build(params, Family::Ball)?;
    let size = table.largest_layer.size.clone();
    let height = table.largest_layer.heights[0];
    let tie = table.largest_layer.tie;
    let regular = params.is_untruncated();

    let n = &table.total;
    let within = |budget: u64| *n <= BigUint::from(budget);
    let mut width = None;
    let mut unique = None;
    if within(opts.engine.matching_budget as u64) && within(opts.element_budget) {
        let inst = build_family(params, Family::Ball, opts.element_budget)?;
        let (w, _) = width_with(&inst, &opts.engine)?;
        let w = BigUint::from(w);
        if w == size {
            if tie {
                // two distinct layers of maximum size
                unique = Some(false);
            } else if opts.uniqueness {
                let layer = AntichainWitness::new(inst.layers()[&height].clone());
                unique = Some(is_unique_max_antichain_with(&inst, &layer, &opts.engine)?);
            }
        }
        width = Some(w);
    }

    let certificate = if regular {
        certified_width(params)?.0.status.into()
    } else {
        SweepCertificate::Skipped
    };

    let sphere_size = build_table(params, Family::Sphere(params.r)).total();
    let klym_sphere = if sphere_size <= BigUint::from(opts.engine.flow_budget.min(opts.element_budget as usize)) {
        let sphere = build_sphere(params, params.r)?;
        Some(check_klym_with(&sphere, &opts.engine)?.holds)
    } else {
        None
    };

    let theorem_bound_ok = match (&width, regular) {
        (Some(w), true) => Some(*w <= theorem_bound(params)?),
        _ => None,
    };

    let status = classify(width.as_ref(), &size, unique, tie);

    Ok(SweepRecord {
        p: params.p,
        q: params.q,
        r: params.r,
        ball_size: table.total.clone(),
        largest_layer_height: height,
        largest_layer_size: size,
        tie,
        width,
        unique,
        certificate,
        klym_sphere,
        theorem_bound_ok,
        status,
        elapsed_ms: if opts.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Which tuples a sweep covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepRange {
    pub p_max: u32,
    pub q_max: u32,
    pub r_max: Option<u32>,
    /// Upper bound on `p + q`.
    pub n_max: Option<u32>,
    /// Allow `r > min(p, q)` (up to `p + q`).
    pub general: bool,
}

impl SweepRange {
    pub fn tuples(&self) -> Result<Vec<GroundParams>> {
        let mut out = Vec::new();
        for p in 1..=self.p_max {
            for q in 1..=self.q_max {
                if self.n_max.is_some_and(|n| p + q > n) {
                    continue;
                }
                let top = if self.general { p + q } else { p.min(q) };
                let top = self.r_max.map_or(top, |r| r.min(top));
                for r in 1..=top {
                    out.push(GroundParams::new(p, q, r)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub tuples: Vec<GroundParams>,
    pub options: SweepOptions,
    pub out: Option<PathBuf>,
    pub resume: bool,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepOutcome {
    /// Records for the planned tuples, sorted by `(p, q, r)`.
    pub records: Vec<SweepRecord>,
    pub resumed: usize,
}

impl SweepOutcome {
    pub fn counts(&self) -> BTreeMap<SweepStatus, usize> {
        let mut counts: BTreeMap<SweepStatus, usize> = SweepStatus::ALL.iter().map(|s| (*s, 0)).collect();
        for r in &self.records {
            *counts.get_mut(&r.status).expect("all statuses") += 1;
        }
        counts
    }

    pub fn has_counterexample(&self) -> bool {
        self.records.iter().any(|r| r.status == SweepStatus::Counterexample)
    }

    pub fn summary_line(&self) -> String {
        let parts: Vec<String> = self
            .counts()
            .iter()
            .map(|(s, n)| format!("{}={n}", s.as_str()))
            .collect();
        format!("{} records: {}", self.records.len(), parts.join(" "))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Reads a record file. A malformed last line is an interrupted write and is
/// dropped; a malformed earlier line is an error.
pub fn load_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    for (k, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SweepRecord>(line) {
            Ok(r) => out.push(r),
            Err(_) if k + 1 == lines.len() => {}
            Err(e) => {
                return Err(Error::Format(format!(
                    "{} line {}: {e}",
                    path.display(),
                    k + 1
                )))
            }
        }
    }
    Ok(out)
}

fn write_sorted(path: &Path, records: &BTreeMap<(u32, u32, u32), SweepRecord>) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let file = File::create(&tmp).map_err(|e| io_error(&tmp, e))?;
        let mut w = BufWriter::new(file);
        for r in records.values() {
            writeln!(w, "{}", r.to_line()).map_err(|e| io_error(&tmp, e))?;
        }
        w.flush().map_err(|e| io_error(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

/// Evaluates every planned tuple not already on file, appending records as
/// they finish, then rewrites the file sorted by `(p, q, r)`.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    let mut known: BTreeMap<(u32, u32, u32), SweepRecord> = BTreeMap::new();
    if let (Some(path), true) = (&plan.out, plan.resume) {
        if path.exists() {
            for r in load_records(path)? {
                known.insert(r.key(), r);
            }
        }
    }
    let resumed = plan
        .tuples
        .iter()
        .filter(|g| known.contains_key(&(g.p, g.q, g.r)))
        .count();
    let todo: Vec<GroundParams> = plan
        .tuples
        .iter()
        .filter(|g| !known.contains_key(&(g.p, g.q, g.r)))
        .copied()
        .collect();

    let mut sink = match &plan.out {
        Some(path) => {
            write_sorted(path, &known)?;
            let file = OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|e| io_error(path, e))?;
            Some((path.clone(), file))
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {} workers: {e}", plan.jobs)))?;
    let (tx, rx) = mpsc::channel();
    let options = plan.options;
    let mut failure: Option<Error> = None;
    std::thread::scope(|scope| {
        scope.spawn(move || {
            pool.install(|| {
                todo.par_iter().for_each_with(tx, |tx, g| {
                    let _ = tx.send(evaluate(g, &options));
                })
            })
        });
        for result in rx {
            match result {
                Ok(record) => {
                    if let Some((path, file)) = &mut sink {
                        let written = writeln!(file, "{}", record.to_line()).and_then(|_| file.flush());
                        if let Err(e) = written {
                            failure.get_or_insert(io_error(path, e));
                        }
                    }
                    known.insert(record.key(), record);
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some((path, file)) = sink {
        drop(file);
        write_sorted(&path, &known)?;
    }
    let mut records: Vec<SweepRecord> = plan
        .tuples
        .iter()
        .filter_map(|g| known.get(&(g.p, g.q, g.r)).cloned())
        .collect();
    records.sort_by_key(SweepRecord::key);
    records.dedup_by_key(|r| r.key());
    Ok(SweepOutcome { records, resumed })
}

const CSV_HEADER: &str = "p,q,r,ball_size,largest_layer_height,largest_layer_size,tie,width,unique,certificate,klym_sphere,theorem_bound_ok,status,elapsed_ms";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn cells(r: &SweepRecord) -> Vec<String> {
    vec![
        r.p.to_string(),
        r.q.to_string(),
        r.r.to_string(),
        r.ball_size.to_string(),
        r.largest_layer_height.to_string(),
        r.largest_layer_size.to_string(),
        r.tie.to_string(),
        opt(&r.width),
        opt(&r.unique),
        r.certificate.as_str().to_string(),
        opt(&r.klym_sphere),
        opt(&r.theorem_bound_ok),
        r.status.as_str().to_string(),
        r.elapsed_ms.to_string(),
    ]
}

pub fn records_csv(records: &[SweepRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        out.push_str(&cells(r).join(","));
        out.push('\n');
    }
    out
}

pub fn records_text(outcome: &SweepOutcome) -> String {
    let mut rows = vec![CSV_HEADER.split(',').map(str::to_string).collect::<Vec<_>>()];
    rows.extend(outcome.records.iter().map(cells));
    let mut out = aligned(&rows);
    out.push_str(&outcome.summary_line());
    out.push('\n');
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    records: &'a [SweepRecord],
    summary: BTreeMap<&'static str, usize>,
}

pub fn records_json(outcome: &SweepOutcome) -> String {
    crate::report::to_json(&JsonReport {
        records: &outcome.records,
        summary: outcome.counts().into_iter().map(|(s, n)| (s.as_str(), n)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(p: u32, q: u32, r: u32) -> GroundParams {
        GroundParams::new(p, q, r).unwrap()
    }

    fn quiet() -> SweepOptions {
        SweepOptions {
            timing: false,
            ..SweepOptions::default()
        }
    }

    #[test]
    fn record_examples() {
        let r = evaluate(&gp(2, 2, 1), &quiet()).unwrap();
        assert_eq!(r.status, SweepStatus::Tie);
        assert!(r.tie);
        assert_eq!(r.width, Some(2u32.into()));
        assert_eq!(r.certificate, SweepCertificate::NotApplicable);

        let r = evaluate(&gp(1, 2, 1), &quiet()).unwrap();
        assert_eq!(r.status, SweepStatus::VerifiedUnique);
        assert_eq!(r.certificate, SweepCertificate::CertifiedStrict);
        assert_eq!(r.klym_sphere, Some(true));
        assert_eq!(r.theorem_bound_ok, Some(true));
    }

    #[test]
    fn over_budget_and_general_regime() {
        let opts = SweepOptions {
            engine: EngineOptions {
                matching_budget: 10,
                flow_budget: 10,
            },
            ..quiet()
        };
        let r = evaluate(&gp(3, 3, 2), &opts).unwrap();
        assert_eq!(r.status, SweepStatus::OverBudget);
        assert_eq!(r.width, None);
        assert!(!r.to_line().contains("\"width\""));

        let r = evaluate(&gp(1, 5, 3), &quiet()).unwrap();
        assert_eq!(r.certificate, SweepCertificate::Skipped);
        assert_eq!(r.theorem_bound_ok, None);
        assert_ne!(r.status, SweepStatus::Counterexample);
    }

    #[test]
    fn records_round_trip() {
        let r = evaluate(&gp(5, 8, 4), &quiet()).unwrap();
        let line = r.to_line();
        assert!(line.contains("\"ball_size\":\"1093\""));
        assert!(line.contains("\"largest_layer_size\":\"321\""));
        let back: SweepRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn ranges() {
        let range = SweepRange {
            p_max: 3,
            q_max: 3,
            r_max: None,
            n_max: Some(4),
            general: false,
        };
        let keys: Vec<(u32, u32, u32)> = range.tuples().unwrap().iter().map(|g| (g.p, g.q, g.r)).collect();
        assert_eq!(keys, vec![(1, 1, 1), (1, 2, 1), (1, 3, 1), (2, 1, 1), (2, 2, 1), (2, 2, 2), (3, 1, 1)]);
        let general = SweepRange { general: true, ..range };
        assert!(general.tuples().unwrap().contains(&gp(1, 1, 2)));
    }

    #[test]
    fn truncated_tail_is_dropped_but_interior_damage_is_not() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let a = evaluate(&gp(1, 1, 1), &quiet()).unwrap().to_line();
        let b = evaluate(&gp(1, 2, 1), &quiet()).unwrap().to_line();
        fs::write(&path, format!("{a}\n{}", &b[..b.len() / 2])).unwrap();
        assert_eq!(load_records(&path).unwrap().len(), 1);
        fs::write(&path, format!("{}\n{b}\n", &a[..a.len() / 2])).unwrap();
        assert!(matches!(load_records(&path), Err(Error::Format(_))));
    }

    #[test]
    fn resumed_sweep_matches_uninterrupted() {
        let dir = tempfile::tempdir().unwrap();
        let tuples = SweepRange {
            p_max: 4,
            q_max: 4,
            r_max: None,
            n_max: None,
            general: false,
        }
        .tuples()
        .unwrap();
        let plan = |name: &str, resume: bool| SweepPlan {
            tuples: tuples.clone(),
            options: quiet(),
            out: Some(dir.path().join(name)),
            resume,
            jobs: 3,
        };
        let full = run_sweep(&plan("full.jsonl", false)).unwrap();
        let full_text = fs::read_to_string(dir.path().join("full.jsonl")).unwrap();
        assert_eq!(full.resumed, 0);

        let lines: Vec<&str> = full_text.lines().collect();
        let cut = format!("{}\n{}\n{}", lines[4], lines[1], &lines[7][..20]);
        fs::write(dir.path().join("cut.jsonl"), cut).unwrap();
        let resumed = run_sweep(&plan("cut.jsonl", true)).unwrap();
        assert_eq!(resumed.resumed, 2);
        assert_eq!(resumed.records, full.records);
        assert_eq!(fs::read_to_string(dir.path().join("cut.jsonl")).unwrap(), full_text);
    }

    #[test]
    fn classification() {
        let n = |v: u32| BigUint::from(v);
        use SweepStatus::*;
        assert_eq!(classify(Some(&n(5)), &n(4), Some(true), false), Counterexample);
        assert_eq!(classify(Some(&n(4)), &n(4), Some(false), false), Counterexample);
        assert_eq!(classify(Some(&n(4)), &n(4), Some(false), true), Tie);
        assert_eq!(classify(Some(&n(4)), &n(4), Some(true), false), VerifiedUnique);
        assert_eq!(classify(Some(&n(4)), &n(4), None, false), VerifiedSizeOnly);
        assert_eq!(classify(None, &n(4), None, false), OverBudget);

        let record = evaluate(&gp(1, 2, 1), &quiet()).unwrap();
        let bad = SweepRecord {
            status: Counterexample,
            ..record.clone()
        };
        let outcome = SweepOutcome {
            records: vec![record, bad],
            resumed: 0,
        };
        assert!(outcome.has_counterexample());
        assert_eq!(outcome.counts()[&Counterexample], 1);
    }

    #[test]
    fn empty_sweep_csv_is_header_only() {
        assert_eq!(records_csv(&[]), format!("{CSV_HEADER}\n"));
    }
}
