//! Evaluation statistics: confusion matrices and per-class P/R/F1, accuracy
//! and confidence by category and by year distance, Pearson correlation with
//! a t-test p-value, McNemar's test, multi-run pooling and CSV reports.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairgen::{PairDataset, SampleCategory};
use crate::results::VerificationResult;
use crate::stats;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    /// Counts decisions with `positive` as the positive class.
    pub fn from_decisions(decisions: impl IntoIterator<Item = (u8, u8)>, positive: u8) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (truth, label) in decisions {
            match (truth == positive, label == positive) {
                (true, true) => cm.tp += 1,
                (false, true) => cm.fp += 1,
                (true, false) => cm.fn_ += 1,
                (false, false) => cm.tn += 1,
            }
        }
        cm
    }

    pub fn from_results(results: &[VerificationResult], positive: u8) -> Self {
        Self::from_decisions(results.iter().map(|r| (r.truth, r.label)), positive)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1; any zero denominator yields 0.
pub fn prf(cm: &ConfusionMatrix) -> Prf {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Prf { precision, recall, f1 }
}

fn id_multiset(results: &[VerificationResult]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for r in results {
        *m.entry(r.sample_id.as_str()).or_default() += 1;
    }
    m
}

fn check_same_samples(runs: &[Vec<VerificationResult>]) -> Result<()> {
    let Some(first) = runs.first() else { return Ok(()) };
    let reference = id_multiset(first);
    for (i, run) in runs.iter().enumerate().skip(1) {
        let ids = id_multiset(run);
        if ids != reference {
            let missing = reference.keys().find(|k| !ids.contains_key(*k));
            let extra = ids.keys().find(|k| !reference.contains_key(*k));
            return Err(Error::MismatchedResults(format!(
                "run {i} differs from run 0 (first missing: {missing:?}, first extra: {extra:?})"
            )));
        }
    }
    Ok(())
}

/// Concatenates the predictions of several runs over the same dataset, so
/// the pooled confusion matrix is the sum of the per-run ones.
pub fn pool_runs(runs: &[Vec<VerificationResult>]) -> Result<Vec<VerificationResult>> {
    check_same_samples(runs)?;
    Ok(runs.iter().flatten().cloned().collect())
}

/// Majority vote per sample across runs. Ties go to label 0. Confidence is
/// the share of runs agreeing with the winning label.
pub fn majority_vote(runs: &[Vec<VerificationResult>]) -> Result<Vec<VerificationResult>> {
    check_same_samples(runs)?;
    let Some(first) = runs.first() else { return Ok(Vec::new()) };
    let mut votes: HashMap<&str, (u8, usize, usize)> = HashMap::new();
    for r in runs.iter().flatten() {
        let e = votes.entry(&r.sample_id).or_insert((r.truth, 0, 0));
        if r.label == 1 {
            e.1 += 1;
        }
        e.2 += 1;
    }
    let mut seen = std::collections::HashSet::new();
    Ok(first
        .iter()
        .filter(|r| seen.insert(r.sample_id.as_str()))
        .map(|r| {
            let (truth, ones, n) = votes[r.sample_id.as_str()];
            let label = u8::from(2 * ones > n);
            let agree = if label == 1 { ones } else { n - ones };
            VerificationResult {
                sample_id: r.sample_id.clone(),
                truth,
                label,
                score: None,
                confidence: agree as f64 / n as f64,
            }
        })
        .collect())
}

/// A decision joined with the metadata of its sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub sample_id: String,
    pub category: SampleCategory,
    pub author1: String,
    pub author2: String,
    pub year_distance: i32,
    pub truth: u8,
    pub label: u8,
    pub confidence: f64,
}

impl Evaluated {
    pub fn correct(&self) -> bool {
        self.truth == self.label
    }
}

/// Joins results to their samples. Every result must name a sample of the
/// dataset; pooled results may name a sample several times.
pub fn join(dataset: &PairDataset, results: &[VerificationResult]) -> Result<Vec<Evaluated>> {
    let by_id: HashMap<&str, usize> = dataset
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (s.sample_id.as_str(), i))
        .collect();
    results
        .iter()
        .map(|r| {
            let s = by_id
                .get(r.sample_id.as_str())
                .map(|&i| &dataset.samples[i])
                .ok_or_else(|| Error::MismatchedResults(format!("unknown sample_id `{}`", r.sample_id)))?;
            if s.label != r.truth {
                return Err(Error::MismatchedResults(format!(
                    "sample `{}` has label {} but result truth {}",
                    s.sample_id, s.label, r.truth
                )));
            }
            Ok(Evaluated {
                sample_id: r.sample_id.clone(),
                category: s.category,
                author1: s.author1.clone(),
                author2: s.author2.clone(),
                year_distance: s.year_distance(),
                truth: r.truth,
                label: r.label,
                confidence: r.confidence,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub n: usize,
    pub accuracy: f64,
    pub mean_confidence: f64,
}

fn group_stat<'a>(items: impl IntoIterator<Item = &'a Evaluated>) -> GroupStat {
    let (mut n, mut correct, mut conf) = (0usize, 0usize, 0.0);
    for e in items {
        n += 1;
        correct += usize::from(e.correct());
        conf += e.confidence;
    }
    GroupStat {
        n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        mean_confidence: if n == 0 { 0.0 } else { conf / n as f64 },
    }
}

pub fn by_category(evals: &[Evaluated]) -> BTreeMap<SampleCategory, GroupStat> {
    let mut groups: BTreeMap<SampleCategory, Vec<&Evaluated>> = BTreeMap::new();
    for e in evals {
        groups.entry(e.category).or_default().push(e);
    }
    groups.into_iter().map(|(c, es)| (c, group_stat(es))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// Same author, different documents.
    Same,
    /// Different authors.
    Diff,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Same => "same",
            PairKind::Diff => "diff",
        }
    }

    fn matches(self, c: SampleCategory) -> bool {
        match self {
            PairKind::Same => matches!(c, SampleCategory::SameAuthNear | SampleCategory::SameAuthFar),
            PairKind::Diff => matches!(c, SampleCategory::DiffAuthNear | SampleCategory::DiffAuthFar),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBucket {
    /// Lower edge of the bucket in years; the exact distance when `width` is 1.
    pub delta: i32,
    pub stat: GroupStat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeries {
    pub kind: PairKind,
    pub width: i32,
    pub buckets: Vec<DistanceBucket>,
}

/// Groups the samples of `kind` by year distance, `width` years per bucket.
pub fn by_distance(evals: &[Evaluated], kind: PairKind, width: i32) -> DistanceSeries {
    let width = width.max(1);
    let mut groups: BTreeMap<i32, Vec<&Evaluated>> = BTreeMap::new();
    for e in evals.iter().filter(|e| kind.matches(e.category)) {
        groups.entry(e.year_distance / width * width).or_default().push(e);
    }
    DistanceSeries {
        kind,
        width,
        buckets: groups
            .into_iter()
            .map(|(delta, es)| DistanceBucket {
                delta,
                stat: group_stat(es),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStat {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson product-moment correlation with a two-tailed t-test p-value on
/// `n - 2` degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationStat> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "series lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        stats::student_t_two_tailed(r * (dof / (1.0 - r * r)).sqrt(), dof)
    };
    Ok(CorrelationStat { r, p, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McNemarMethod {
    /// Continuity-corrected chi-square when `b + c >= 25`, exact binomial otherwise.
    #[default]
    Auto,
    ChiSquareCorrected,
    ChiSquare,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    /// A right, B wrong.
    pub b: u64,
    /// A wrong, B right.
    pub c: u64,
    pub statistic: f64,
    pub p: f64,
    pub method: McNemarMethod,
}

/// McNemar's test from the discordant counts. For the exact branch the
/// statistic reported is `min(b, c)`.
pub fn mcnemar_counts(b: u64, c: u64, method: McNemarMethod) -> McNemar {
    let n = b + c;
    let method = match method {
        McNemarMethod::Auto if n >= 25 => McNemarMethod::ChiSquareCorrected,
        McNemarMethod::Auto => McNemarMethod::Exact,
        m => m,
    };
    if n == 0 {
        return McNemar {
            b,
            c,
            statistic: 0.0,
            p: 1.0,
            method,
        };
    }
    let diff = b.abs_diff(c) as f64;
    let (statistic, p) = match method {
        McNemarMethod::ChiSquareCorrected => {
            let s = (diff - 1.0).max(0.0).powi(2) / n as f64;
            (s, stats::chi_square_sf(s, 1.0))
        }
        McNemarMethod::ChiSquare => {
            let s = diff * diff / n as f64;
            (s, stats::chi_square_sf(s, 1.0))
        }
        McNemarMethod::Exact => (b.min(c) as f64, stats::binomial_two_tailed_half(b, c)),
        McNemarMethod::Auto => unreachable!(),
    };
    McNemar {
        b,
        c,
        statistic,
        p,
        method,
    }
}

/// Pairs the decisions of two classifiers on the same samples. The k-th
/// occurrence of an id in `a` pairs with the k-th occurrence in `b`.
pub fn mcnemar(a: &[VerificationResult], b: &[VerificationResult], method: McNemarMethod) -> Result<McNemar> {
    check_same_samples(&[a.to_vec(), b.to_vec()])?;
    let mut b_by_id: HashMap<&str, Vec<&VerificationResult>> = HashMap::new();
    for r in b.iter().rev() {
        b_by_id.entry(&r.sample_id).or_default().push(r);
    }
    let (mut only_a, mut only_b) = (0u64, 0u64);
    for ra in a {
        let rb = b_by_id.get_mut(ra.sample_id.as_str()).and_then(Vec::pop).expect("multisets checked");
        match (ra.correct(), rb.correct()) {
            (true, false) => only_a += 1,
            (false, true) => only_b += 1,
            _ => {}
        }
    }
    Ok(mcnemar_counts(only_a, only_b, method))
}

/// Evaluated decisions of one named test set.
#[derive(Debug, Clone)]
pub struct TestSetEval {
    pub name: String,
    pub evals: Vec<Evaluated>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfRow {
    pub test_set: String,
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub test_set: String,
    pub category: SampleCategory,
    pub n: usize,
    pub accuracy: f64,
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub test_set: String,
    pub pairs: PairKind,
    pub delta: i32,
    pub n: usize,
    pub accuracy: f64,
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub test_set: String,
    pub pairs: PairKind,
    /// `r1`: distance vs accuracy; `r2`: confidence vs accuracy, over buckets.
    pub stat: String,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub prf: Vec<PrfRow>,
    pub by_category: Vec<CategoryRow>,
    pub by_distance: Vec<DistanceRow>,
    pub correlations: Vec<CorrelationRow>,
    pub mcnemar: Option<McNemar>,
}

pub const OVERALL: &str = "OVERALL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub distance_width: i32,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { distance_width: 1 }
    }
}

fn correlation_row(test_set: &str, pairs: PairKind, stat: &str, xs: &[f64], ys: &[f64]) -> CorrelationRow {
    match pearson(xs, ys) {
        Ok(c) => CorrelationRow {
            test_set: test_set.to_string(),
            pairs,
            stat: stat.to_string(),
            r: Some(c.r),
            p: Some(c.p),
            n: c.n,
            note: String::new(),
        },
        Err(e) => CorrelationRow {
            test_set: test_set.to_string(),
            pairs,
            stat: stat.to_string(),
            r: None,
            p: None,
            n: xs.len(),
            note: e.to_string(),
        },
    }
}

/// Computes all report tables. With more than one test set an OVERALL row
/// group pools every set.
pub fn build_report(sets: &[TestSetEval], mcnemar: Option<McNemar>, opts: &ReportOptions) -> EvalReport {
    let mut report = EvalReport {
        mcnemar,
        ..Default::default()
    };
    let overall: Vec<Evaluated> = sets.iter().flat_map(|s| s.evals.iter().cloned()).collect();
    let mut named: Vec<(&str, &[Evaluated])> = sets.iter().map(|s| (s.name.as_str(), s.evals.as_slice())).collect();
    if sets.len() > 1 {
        named.push((OVERALL, &overall));
    }
    for (name, evals) in named {
        for class in [1u8, 0u8] {
            let cm = ConfusionMatrix::from_decisions(evals.iter().map(|e| (e.truth, e.label)), class);
            let m = prf(&cm);
            report.prf.push(PrfRow {
                test_set: name.to_string(),
                class,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                tp: cm.tp,
                fp: cm.fp,
                fn_: cm.fn_,
                tn: cm.tn,
            });
        }
        for (category, s) in by_category(evals) {
            report.by_category.push(CategoryRow {
                test_set: name.to_string(),
                category,
                n: s.n,
                accuracy: s.accuracy,
                mean_confidence: s.mean_confidence,
            });
        }
        for kind in [PairKind::Same, PairKind::Diff] {
            let series = by_distance(evals, kind, opts.distance_width);
            for b in &series.buckets {
                report.by_distance.push(DistanceRow {
                    test_set: name.to_string(),
                    pairs: kind,
                    delta: b.delta,
                    n: b.stat.n,
                    accuracy: b.stat.accuracy,
                    mean_confidence: b.stat.mean_confidence,
                });
            }
            let deltas: Vec<f64> = series.buckets.iter().map(|b| f64::from(b.delta)).collect();
            let accs: Vec<f64> = series.buckets.iter().map(|b| b.stat.accuracy).collect();
            let confs: Vec<f64> = series.buckets.iter().map(|b| b.stat.mean_confidence).collect();
            report.correlations.push(correlation_row(name, kind, "r1", &deltas, &accs));
            report.correlations.push(correlation_row(name, kind, "r2", &confs, &accs));
        }
    }
    report
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], headers: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(headers)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

impl EvalReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<24} {:>5} {:>9} {:>9} {:>9}", "test set", "class", "precision", "recall", "f1");
        for r in &self.prf {
            let _ = writeln!(
                s,
                "{:<24} {:>5} {:>9.3} {:>9.3} {:>9.3}",
                r.test_set, r.class, r.precision, r.recall, r.f1
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<24} {:<16} {:>6} {:>9} {:>10}", "test set", "category", "n", "accuracy", "confidence");
        for r in &self.by_category {
            let _ = writeln!(
                s,
                "{:<24} {:<16} {:>6} {:>9.3} {:>10.3}",
                r.test_set, r.category.as_str(), r.n, r.accuracy, r.mean_confidence
            );
        }
        let _ = writeln!(s);
        for r in &self.correlations {
            match (r.r, r.p) {
                (Some(cr), Some(p)) => {
                    let _ = writeln!(s, "{} {} {}: r = {:.3}, p = {:.4} (n = {})", r.test_set, r.pairs.as_str(), r.stat, cr, p, r.n);
                }
                _ => {
                    let _ = writeln!(s, "{} {} {}: {}", r.test_set, r.pairs.as_str(), r.stat, r.note);
                }
            }
        }
        if let Some(m) = &self.mcnemar {
            let _ = writeln!(s);
            let _ = write!(s, "{}", mcnemar_text(m));
        }
        s
    }

    /// Writes `prf.csv`, `by_category.csv`, `by_distance.csv`,
    /// `correlations.csv`, `summary.txt` and, with a comparison, `mcnemar.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_csv(
            &dir.join("prf.csv"),
            &self.prf,
            &["test_set", "class", "precision", "recall", "f1", "tp", "fp", "fn", "tn"],
        )?;
        write_csv(
            &dir.join("by_category.csv"),
            &self.by_category,
            &["test_set", "category", "n", "accuracy", "mean_confidence"],
        )?;
        write_csv(
            &dir.join("by_distance.csv"),
            &self.by_distance,
            &["test_set", "pairs", "delta", "n", "accuracy", "mean_confidence"],
        )?;
        write_csv(
            &dir.join("correlations.csv"),
            &self.correlations,
            &["test_set", "pairs", "stat", "r", "p", "n", "note"],
        )?;
        let summary = dir.join("summary.txt");
        fs::write(&summary, self.summary()).map_err(|e| Error::io(summary, e))?;
        if let Some(m) = &self.mcnemar {
            let p = dir.join("mcnemar.txt");
            fs::write(&p, mcnemar_text(m)).map_err(|e| Error::io(p, e))?;
        }
        Ok(())
    }
}

fn mcnemar_text(m: &McNemar) -> String {
    format!(
        "method: {:?}\nb (A right, B wrong): {}\nc (A wrong, B right): {}\nstatistic: {}\np: {}\n",
        m.method, m.b, m.c, m.statistic, m.p
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(id: &str, truth: u8, label: u8) -> VerificationResult {
        VerificationResult {
            sample_id: id.into(),
            truth,
            label,
            score: None,
            confidence: 0.75,
        }
    }

    #[test]
    fn prf_conventions() {
        let m = prf(&ConfusionMatrix { tp: 90, fp: 10, fn_: 20, tn: 0 });
        assert!((m.precision - 0.9).abs() < 1e-12);
        assert!((m.recall - 90.0 / 110.0).abs() < 1e-12);
        assert!((m.f1 - 180.0 / 210.0).abs() < 1e-12);

        let m = prf(&ConfusionMatrix { tp: 5, fp: 0, fn_: 0, tn: 3 });
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = prf(&ConfusionMatrix { tp: 0, fp: 3, fn_: 2, tn: 1 });
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn pooling_checks_samples() {
        let r1 = vec![res("a", 1, 1), res("b", 0, 1)];
        let r2 = vec![res("b", 0, 0), res("a", 1, 0)];
        let pooled = pool_runs(&[r1.clone(), r2.clone()]).unwrap();
        assert_eq!(pooled.len(), 4);
        assert_eq!(pool_runs(&[r1.clone()]).unwrap(), r1);
        assert!(pool_runs(&[r1.clone(), vec![res("a", 1, 1)]]).is_err());

        let voted = majority_vote(&[r1.clone(), r2, r1]).unwrap();
        assert_eq!(voted.iter().map(|r| r.label).collect::<Vec<_>>(), vec![1, 1]);
        assert!((voted[0].confidence - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples_and_errors() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let c = pearson(&xs, &xs.map(|x| 2.0 * x + 1.0)).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        let c = pearson(&xs, &xs.map(|x| -x)).unwrap();
        assert!((c.r + 1.0).abs() < 1e-12);
        assert!(matches!(pearson(&xs, &[1.0; 5]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mcnemar_branches() {
        let m = mcnemar_counts(0, 0, McNemarMethod::Auto);
        assert_eq!((m.statistic, m.p), (0.0, 1.0));
        assert_eq!(mcnemar_counts(10, 30, McNemarMethod::Auto).method, McNemarMethod::ChiSquareCorrected);
        assert_eq!(mcnemar_counts(2, 8, McNemarMethod::Auto).method, McNemarMethod::Exact);
        let m = mcnemar_counts(10, 30, McNemarMethod::ChiSquare);
        assert!((m.statistic - 10.0).abs() < 1e-12);
    }

    #[test]
    fn mcnemar_pairs_by_sample() {
        let a = vec![res("x", 1, 1), res("y", 0, 0), res("z", 1, 0)];
        let b = vec![res("z", 1, 1), res("x", 1, 0), res("y", 0, 0)];
        let m = mcnemar(&a, &b, McNemarMethod::Exact).unwrap();
        assert_eq!((m.b, m.c), (1, 1));
        assert!(mcnemar(&a, &b[..2], McNemarMethod::Exact).is_err());
    }

    #[test]
    fn distance_buckets() {
        let e = |d: i32, correct: bool| Evaluated {
            sample_id: "s".into(),
            category: if d > 10 { SampleCategory::SameAuthFar } else { SampleCategory::SameAuthNear },
            author1: "a".into(),
            author2: "a".into(),
            year_distance: d,
            truth: 1,
            label: u8::from(correct),
            confidence: 0.6,
        };
        let evals = vec![e(9, true), e(9, false), e(13, true), e(17, true)];
        let s = by_distance(&evals, PairKind::Same, 1);
        assert_eq!(s.buckets.iter().map(|b| b.delta).collect::<Vec<_>>(), vec![9, 13, 17]);
        assert_eq!(s.buckets[0].stat.accuracy, 0.5);
        assert_eq!(s.buckets[2].stat.accuracy, 1.0);
        let wide = by_distance(&evals, PairKind::Same, 10);
        assert_eq!(wide.buckets.iter().map(|b| (b.delta, b.stat.n)).collect::<Vec<_>>(), vec![(0, 2), (10, 2)]);
        assert!(by_distance(&evals, PairKind::Diff, 1).buckets.is_empty());
    }
}
