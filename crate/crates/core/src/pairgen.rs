//! Paragraph-pair dataset construction.
//!
//! Authors are grouped by how many documents they have and how far apart
//! those were published, each group is split independently between train,
//! dev and test, and every split is filled with an exact number of samples
//! per [`SampleCategory`].
//!
//! Sampling draws an author uniformly among those eligible for the category,
//! then an ordered document pair uniformly among the eligible pairs, then one
//! paragraph per document. Duplicate paragraph pairs are rejected. Each
//! category draws from its own RNG stream so categories can run in parallel.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::corpus::{truncate_pair, Corpus, TokenizerConfig, TruncationConfig};
use crate::error::{Error, Result};
use crate::seed;

pub const DATASET_FORMAT: &str = "avkit-pairs/1";
pub const SEPARATOR: &str = "[SEP]";
pub const DEFAULT_HORIZON: i32 = 10;

/// Draw attempts allowed per requested sample before a quota is declared
/// unsatisfiable.
const ATTEMPTS_PER_SAMPLE: usize = 100;
/// Rejection-sampling tries for a document pair before enumerating.
const PAIR_REJECTION_TRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SampleCategory {
    SameDoc,
    SameAuthNear,
    SameAuthFar,
    DiffAuthNear,
    DiffAuthFar,
}

impl SampleCategory {
    pub const ALL: [SampleCategory; 5] = [
        SampleCategory::SameDoc,
        SampleCategory::SameAuthNear,
        SampleCategory::SameAuthFar,
        SampleCategory::DiffAuthNear,
        SampleCategory::DiffAuthFar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SampleCategory::SameDoc => "SAME_DOC",
            SampleCategory::SameAuthNear => "SAME_AUTH_NEAR",
            SampleCategory::SameAuthFar => "SAME_AUTH_FAR",
            SampleCategory::DiffAuthNear => "DIFF_AUTH_NEAR",
            SampleCategory::DiffAuthFar => "DIFF_AUTH_FAR",
        }
    }

    pub fn label(self) -> u8 {
        match self {
            SampleCategory::SameDoc | SampleCategory::SameAuthNear | SampleCategory::SameAuthFar => 1,
            SampleCategory::DiffAuthNear | SampleCategory::DiffAuthFar => 0,
        }
    }

    fn is_near(self) -> bool {
        matches!(self, SampleCategory::SameAuthNear | SampleCategory::DiffAuthNear)
    }
}

impl fmt::Display for SampleCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SampleCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SampleCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown sample category `{s}`")))
    }
}

/// Category of a pair from its metadata alone. A distance of exactly
/// `horizon` years is NEAR.
pub fn categorize_pair(
    author1: &str,
    year1: i32,
    doc1: &str,
    author2: &str,
    year2: i32,
    doc2: &str,
    horizon: i32,
) -> Result<SampleCategory> {
    if doc1 == doc2 {
        if author1 != author2 {
            return Err(Error::CorruptMetadata {
                doc: doc1.to_string(),
                author1: author1.to_string(),
                author2: author2.to_string(),
            });
        }
        return Ok(SampleCategory::SameDoc);
    }
    let near = (year1 - year2).abs() <= horizon;
    Ok(match (author1 == author2, near) {
        (true, true) => SampleCategory::SameAuthNear,
        (true, false) => SampleCategory::SameAuthFar,
        (false, true) => SampleCategory::DiffAuthNear,
        (false, false) => SampleCategory::DiffAuthFar,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorGroups {
    /// Authors with exactly one document.
    pub single: Vec<String>,
    /// Several documents, all within `horizon` years of each other.
    pub within: Vec<String>,
    /// Several documents spanning more than `horizon` years.
    pub spanning: Vec<String>,
}

impl AuthorGroups {
    fn named(&self) -> [(&'static str, &[String]); 3] {
        [
            ("single", &self.single),
            ("within", &self.within),
            ("spanning", &self.spanning),
        ]
    }
}

fn years_by_author(corpus: &Corpus) -> BTreeMap<&str, Vec<i32>> {
    let mut by_author: BTreeMap<&str, Vec<i32>> = BTreeMap::new();
    for d in &corpus.documents {
        by_author.entry(d.author_id.as_str()).or_default().push(d.year);
    }
    by_author
}

pub fn group_authors(corpus: &Corpus, horizon: i32) -> AuthorGroups {
    let mut groups = AuthorGroups::default();
    for (author, years) in years_by_author(corpus) {
        let span = years.iter().max().unwrap() - years.iter().min().unwrap();
        let bucket = if years.len() == 1 {
            &mut groups.single
        } else if span <= horizon {
            &mut groups.within
        } else {
            &mut groups.spanning
        };
        bucket.push(author.to_string());
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorSplit {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
    pub permutation_seed: u64,
}

impl AuthorSplit {
    pub fn get(&self, split: SplitName) -> &[String] {
        match split {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

/// Largest-remainder apportionment of `n` items to `ratios`.
fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    // stable sort keeps split order on equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    let mut left = n - sizes.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    sizes
}

/// Shuffles each group with its own stream and cuts it at `ratios`.
/// Returns the split and any warnings about undersized groups.
pub fn split_authors(groups: &AuthorGroups, ratios: [f64; 3], seed: u64) -> Result<(AuthorSplit, Vec<String>)> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios must be non-negative and sum to 1, got {ratios:?}"
        )));
    }
    let mut split = AuthorSplit {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        permutation_seed: seed,
    };
    let mut warnings = Vec::new();
    for (name, members) in groups.named() {
        if members.is_empty() {
            continue;
        }
        let mut members = members.to_vec();
        members.sort();
        if members.len() < 3 {
            let msg = format!(
                "author group `{name}` has {} member(s), fewer than the 3 splits; all assigned to train",
                members.len()
            );
            warn!("{msg}");
            warnings.push(msg);
            split.train.extend(members);
            continue;
        }
        members.shuffle(&mut seed::rng(seed::derive(seed, &["split", name])));
        let [n_train, n_dev, _] = apportion(members.len(), &ratios);
        let mut rest = members.into_iter();
        split.train.extend(rest.by_ref().take(n_train));
        split.dev.extend(rest.by_ref().take(n_dev));
        split.test.extend(rest);
    }
    split.train.sort();
    split.dev.sort();
    split.test.sort();
    Ok((split, warnings))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub struct CategoryQuotas {
    pub same_doc: usize,
    pub same_auth_near: usize,
    pub same_auth_far: usize,
    pub diff_auth_near: usize,
    pub diff_auth_far: usize,
}

impl CategoryQuotas {
    pub fn new(same_doc: usize, same_near: usize, same_far: usize, diff_near: usize, diff_far: usize) -> Self {
        Self {
            same_doc,
            same_auth_near: same_near,
            same_auth_far: same_far,
            diff_auth_near: diff_near,
            diff_auth_far: diff_far,
        }
    }

    pub fn get(&self, c: SampleCategory) -> usize {
        match c {
            SampleCategory::SameDoc => self.same_doc,
            SampleCategory::SameAuthNear => self.same_auth_near,
            SampleCategory::SameAuthFar => self.same_auth_far,
            SampleCategory::DiffAuthNear => self.diff_auth_near,
            SampleCategory::DiffAuthFar => self.diff_auth_far,
        }
    }

    pub fn total(&self) -> usize {
        SampleCategory::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn scaled(&self, divisor: usize) -> Self {
        Self::new(
            self.same_doc / divisor,
            self.same_auth_near / divisor,
            self.same_auth_far / divisor,
            self.diff_auth_near / divisor,
            self.diff_auth_far / divisor,
        )
    }
}

fn default_horizon() -> i32 {
    DEFAULT_HORIZON
}

fn default_true() -> bool {
    true
}

/// Per-split category quotas plus the NEAR/FAR horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotaSpec {
    #[serde(default = "default_horizon")]
    pub horizon: i32,
    #[serde(default = "default_true")]
    pub include_same_doc: bool,
    pub train: CategoryQuotas,
    pub dev: CategoryQuotas,
    pub test: CategoryQuotas,
}

impl QuotaSpec {
    /// Five categories with same-document samples.
    pub fn five_category() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            include_same_doc: true,
            train: CategoryQuotas::new(6000, 6000, 6000, 9000, 9000),
            dev: CategoryQuotas::new(400, 400, 400, 600, 600),
            test: CategoryQuotas::new(600, 600, 600, 900, 900),
        }
    }

    /// Four categories; the same-document share goes to the other positives.
    pub fn four_category() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            include_same_doc: false,
            train: CategoryQuotas::new(0, 9000, 9000, 9000, 9000),
            dev: CategoryQuotas::new(0, 600, 600, 600, 600),
            test: CategoryQuotas::new(0, 900, 900, 900, 900),
        }
    }

    pub fn scaled(&self, divisor: usize) -> Self {
        Self {
            train: self.train.scaled(divisor),
            dev: self.dev.scaled(divisor),
            test: self.test.scaled(divisor),
            ..*self
        }
    }

    pub fn for_split(&self, split: SplitName) -> CategoryQuotas {
        let mut q = match split {
            SplitName::Train => self.train,
            SplitName::Dev => self.dev,
            SplitName::Test => self.test,
        };
        if !self.include_same_doc {
            q.same_doc = 0;
        }
        q
    }

    pub fn load(path: &Path) -> Result<QuotaSpec> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    pub sample_id: String,
    pub author1: String,
    pub year1: i32,
    pub doc1: String,
    pub para_index1: usize,
    pub para1: String,
    pub author2: String,
    pub year2: i32,
    pub doc2: String,
    pub para_index2: usize,
    pub para2: String,
    pub joined: String,
    pub label: u8,
    pub category: SampleCategory,
}

impl PairSample {
    pub fn year_distance(&self) -> i32 {
        (self.year1 - self.year2).abs()
    }

    /// Checks label, category and document consistency of one record.
    pub fn check(&self, horizon: i32) -> Result<()> {
        let bad = |reason: String| Err(Error::Config(format!("sample `{}`: {reason}", self.sample_id)));
        let cat = categorize_pair(
            &self.author1,
            self.year1,
            &self.doc1,
            &self.author2,
            self.year2,
            &self.doc2,
            horizon,
        )?;
        if cat != self.category {
            return bad(format!("category {} but metadata says {cat}", self.category));
        }
        if self.label != u8::from(self.author1 == self.author2) || self.label != cat.label() {
            return bad(format!("label {} inconsistent with authors", self.label));
        }
        if cat == SampleCategory::SameDoc && self.para_index1 == self.para_index2 {
            return bad("same-document sample repeats a paragraph".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub name: String,
    pub seed: u64,
    pub quotas: CategoryQuotas,
    pub horizon: i32,
    pub tokenizer: TokenizerConfig,
    pub truncation: TruncationConfig,
    pub focus_author: Option<String>,
    pub separator: String,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: DatasetHeader,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDataset {
    pub header: DatasetHeader,
    pub samples: Vec<PairSample>,
}

/// A distinct paragraph appearing in a dataset, keyed by `(doc_id, index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetParagraph {
    pub doc_id: String,
    pub index: usize,
    pub author_id: String,
    pub year: i32,
    pub text: String,
}

impl PairDataset {
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        serde_json::to_writer(&mut w, &HeaderLine { header: self.header.clone() })?;
        w.write_all(b"\n").map_err(io)?;
        for s in &self.samples {
            serde_json::to_writer(&mut w, s)?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_jsonl(path: &Path) -> Result<PairDataset> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, e: serde_json::Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        };
        let mut lines = BufReader::new(file).lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                serde_json::from_str::<HeaderLine>(&line).map_err(|e| parse_err(1, e))?.header
            }
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    message: "missing dataset header".into(),
                })
            }
        };
        let mut samples = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            samples.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e))?);
        }
        Ok(PairDataset { header, samples })
    }

    pub fn category_counts(&self) -> BTreeMap<SampleCategory, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.category).or_default() += 1;
        }
        counts
    }

    /// Distinct paragraphs from both sides of every sample, sorted by key.
    pub fn paragraphs(&self) -> Vec<DatasetParagraph> {
        let mut by_key: BTreeMap<(&str, usize), DatasetParagraph> = BTreeMap::new();
        for s in &self.samples {
            for (doc, idx, author, year, text) in [
                (&s.doc1, s.para_index1, &s.author1, s.year1, &s.para1),
                (&s.doc2, s.para_index2, &s.author2, s.year2, &s.para2),
            ] {
                by_key.entry((doc.as_str(), idx)).or_insert_with(|| DatasetParagraph {
                    doc_id: doc.clone(),
                    index: idx,
                    author_id: author.clone(),
                    year,
                    text: text.clone(),
                });
            }
        }
        by_key.into_values().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateOptions {
    pub name: String,
    pub horizon: i32,
    pub truncation: TruncationConfig,
    /// Pins one side of every sample to this author, placed first.
    pub focus_author: Option<String>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            name: "dataset".into(),
            horizon: DEFAULT_HORIZON,
            truncation: TruncationConfig::default(),
            focus_author: None,
        }
    }
}

struct AuthorEntry {
    id: String,
    /// Indices into `Corpus::documents`, sorted by year then id.
    docs: Vec<usize>,
    years: Vec<i32>,
}

struct Index<'a> {
    corpus: &'a Corpus,
    authors: Vec<AuthorEntry>,
}

impl<'a> Index<'a> {
    fn new(corpus: &'a Corpus, ids: &[String]) -> Index<'a> {
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let mut by_author: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, d) in corpus.documents.iter().enumerate() {
            if wanted.contains(d.author_id.as_str()) {
                by_author.entry(&d.author_id).or_default().push(i);
            }
        }
        let authors = by_author
            .into_iter()
            .map(|(id, mut docs)| {
                docs.sort_by(|&a, &b| {
                    let (da, db) = (&corpus.documents[a], &corpus.documents[b]);
                    da.year.cmp(&db.year).then_with(|| da.doc_id.cmp(&db.doc_id))
                });
                let years = docs.iter().map(|&i| corpus.documents[i].year).collect();
                AuthorEntry {
                    id: id.to_string(),
                    docs,
                    years,
                }
            })
            .collect();
        Index { corpus, authors }
    }

    fn doc_years(&self, d: usize) -> i32 {
        self.corpus.documents[d].year
    }
}

fn near_ok(y1: i32, y2: i32, horizon: i32, near: bool) -> bool {
    ((y1 - y2).abs() <= horizon) == near
}

/// Whether one author holds two distinct documents at the required distance.
fn has_own_pair(a: &AuthorEntry, horizon: i32, near: bool) -> bool {
    if a.docs.len() < 2 {
        return false;
    }
    if near {
        a.years.windows(2).any(|w| w[1] - w[0] <= horizon)
    } else {
        a.years[a.years.len() - 1] - a.years[0] > horizon
    }
}

/// Whether two authors hold a cross pair at the required distance.
fn has_cross_pair(a: &AuthorEntry, b: &AuthorEntry, horizon: i32, near: bool) -> bool {
    if near {
        let (mut i, mut j) = (0, 0);
        while i < a.years.len() && j < b.years.len() {
            if (a.years[i] - b.years[j]).abs() <= horizon {
                return true;
            }
            if a.years[i] < b.years[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    } else {
        b.years[b.years.len() - 1] - a.years[0] > horizon || a.years[a.years.len() - 1] - b.years[0] > horizon
    }
}

/// Uniform draw from the ordered pairs `(x, y)` of `xs × ys` accepted by `ok`.
/// Rejection first, then exact enumeration, both uniform over the accepted set.
fn draw_doc_pair(
    rng: &mut ChaCha8Rng,
    xs: &[usize],
    ys: &[usize],
    ok: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    for _ in 0..PAIR_REJECTION_TRIES {
        let (x, y) = (*xs.choose(rng)?, *ys.choose(rng)?);
        if ok(x, y) {
            return Some((x, y));
        }
    }
    let all: Vec<(usize, usize)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .filter(|&(x, y)| ok(x, y))
        .collect();
    all.choose(rng).copied()
}

struct Draw {
    doc1: usize,
    para1: usize,
    doc2: usize,
    para2: usize,
}

struct CategorySampler<'i, 'c> {
    index: &'i Index<'c>,
    category: SampleCategory,
    horizon: i32,
    focus: Option<&'i AuthorEntry>,
    /// Candidate first authors (indices into `index.authors`).
    firsts: Vec<usize>,
    /// For DIFF categories, eligible partners of each first author.
    partners: BTreeMap<usize, Vec<usize>>,
}

impl<'i, 'c> CategorySampler<'i, 'c> {
    fn new(index: &'i Index<'c>, category: SampleCategory, horizon: i32, focus: Option<&'i AuthorEntry>) -> Self {
        let paras = |d: usize| index.corpus.documents[d].paragraphs.len();
        let mut firsts = Vec::new();
        let mut partners = BTreeMap::new();
        match category {
            SampleCategory::SameDoc => {
                if focus.is_none() {
                    firsts = (0..index.authors.len())
                        .filter(|&a| index.authors[a].docs.iter().any(|&d| paras(d) >= 2))
                        .collect();
                }
            }
            SampleCategory::SameAuthNear | SampleCategory::SameAuthFar => {
                if focus.is_none() {
                    firsts = (0..index.authors.len())
                        .filter(|&a| has_own_pair(&index.authors[a], horizon, category.is_near()))
                        .collect();
                }
            }
            SampleCategory::DiffAuthNear | SampleCategory::DiffAuthFar => {
                let near = category.is_near();
                match focus {
                    Some(f) => {
                        let ps: Vec<usize> = (0..index.authors.len())
                            .filter(|&b| index.authors[b].id != f.id && has_cross_pair(f, &index.authors[b], horizon, near))
                            .collect();
                        if !ps.is_empty() {
                            partners.insert(usize::MAX, ps);
                        }
                    }
                    None => {
                        for a in 0..index.authors.len() {
                            let ps: Vec<usize> = (0..index.authors.len())
                                .filter(|&b| b != a && has_cross_pair(&index.authors[a], &index.authors[b], horizon, near))
                                .collect();
                            if !ps.is_empty() {
                                firsts.push(a);
                                partners.insert(a, ps);
                            }
                        }
                    }
                }
            }
        }
        CategorySampler {
            index,
            category,
            horizon,
            focus,
            firsts,
            partners,
        }
    }

    fn eligible(&self) -> bool {
        let paras = |d: usize| self.index.corpus.documents[d].paragraphs.len();
        match (self.category, self.focus) {
            (SampleCategory::SameDoc, Some(f)) => f.docs.iter().any(|&d| paras(d) >= 2),
            (SampleCategory::SameAuthNear | SampleCategory::SameAuthFar, Some(f)) => {
                has_own_pair(f, self.horizon, self.category.is_near())
            }
            (SampleCategory::DiffAuthNear | SampleCategory::DiffAuthFar, Some(_)) => !self.partners.is_empty(),
            (_, None) => !self.firsts.is_empty(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Draw> {
        let authors = &self.index.authors;
        let docs = &self.index.corpus.documents;
        let horizon = self.horizon;
        let near = self.category.is_near();
        let (doc1, doc2) = match self.category {
            SampleCategory::SameDoc => {
                let a = match self.focus {
                    Some(f) => f,
                    None => &authors[*self.firsts.choose(rng)?],
                };
                let multi: Vec<usize> = a.docs.iter().copied().filter(|&d| docs[d].paragraphs.len() >= 2).collect();
                let d = *multi.choose(rng)?;
                let n = docs[d].paragraphs.len();
                let p1 = rng.random_range(0..n);
                let mut p2 = rng.random_range(0..n - 1);
                if p2 >= p1 {
                    p2 += 1;
                }
                return Some(Draw {
                    doc1: d,
                    para1: p1,
                    doc2: d,
                    para2: p2,
                });
            }
            SampleCategory::SameAuthNear | SampleCategory::SameAuthFar => {
                let a = match self.focus {
                    Some(f) => f,
                    None => &authors[*self.firsts.choose(rng)?],
                };
                draw_doc_pair(rng, &a.docs, &a.docs, |x, y| {
                    x != y && near_ok(self.index.doc_years(x), self.index.doc_years(y), horizon, near)
                })?
            }
            SampleCategory::DiffAuthNear | SampleCategory::DiffAuthFar => {
                let (a, partners) = match self.focus {
                    Some(f) => (f, &self.partners[&usize::MAX]),
                    None => {
                        let first = *self.firsts.choose(rng)?;
                        (&authors[first], &self.partners[&first])
                    }
                };
                let b = &authors[*partners.choose(rng)?];
                draw_doc_pair(rng, &a.docs, &b.docs, |x, y| {
                    near_ok(self.index.doc_years(x), self.index.doc_years(y), horizon, near)
                })?
            }
        };
        Some(Draw {
            doc1,
            para1: rng.random_range(0..docs[doc1].paragraphs.len()),
            doc2,
            para2: rng.random_range(0..docs[doc2].paragraphs.len()),
        })
    }
}

fn sample_category(
    index: &Index<'_>,
    category: SampleCategory,
    quota: usize,
    horizon: i32,
    focus: Option<&AuthorEntry>,
    seed: u64,
) -> Result<Vec<Draw>> {
    if quota == 0 {
        return Ok(Vec::new());
    }
    let sampler = CategorySampler::new(index, category, horizon, focus);
    if !sampler.eligible() {
        return Err(Error::UnsatisfiableQuota {
            category: category.to_string(),
            reason: "no eligible authors or document pairs".into(),
        });
    }
    let mut rng = seed::rng(seed::derive(seed, &["pairs", category.as_str()]));
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(quota);
    let cap = quota.saturating_mul(ATTEMPTS_PER_SAMPLE);
    for _ in 0..cap {
        if out.len() == quota {
            break;
        }
        let Some(d) = sampler.draw(&mut rng) else { continue };
        let key = if (d.doc1, d.para1) <= (d.doc2, d.para2) {
            (d.doc1, d.para1, d.doc2, d.para2)
        } else {
            (d.doc2, d.para2, d.doc1, d.para1)
        };
        if seen.insert(key) {
            out.push(d);
        }
    }
    if out.len() < quota {
        return Err(Error::UnsatisfiableQuota {
            category: category.to_string(),
            reason: format!("only {} distinct pairs found in {cap} draws, {quota} requested", out.len()),
        });
    }
    Ok(out)
}

/// Fills every category quota from the documents of `authors`.
///
/// With a focus author, every sample has that author's paragraph first; the
/// focus author need not be in `authors`, which then serves as the pool of
/// foreign authors for negative samples.
pub fn generate_pairs(
    corpus: &Corpus,
    authors: &[String],
    quotas: &CategoryQuotas,
    opts: &GenerateOptions,
    seed: u64,
) -> Result<PairDataset> {
    let mut pool: Vec<String> = authors.to_vec();
    if let Some(f) = &opts.focus_author {
        pool.retain(|a| a != f);
        pool.push(f.clone());
    }
    let index = Index::new(corpus, &pool);
    let focus = match &opts.focus_author {
        Some(f) => Some(
            index
                .authors
                .iter()
                .find(|a| &a.id == f)
                .ok_or_else(|| Error::Config(format!("focus author `{f}` has no admissible documents")))?,
        ),
        None => None,
    };
    // the focus author is never drawn as a foreign author
    let draws: Vec<(SampleCategory, Vec<Draw>)> = SampleCategory::ALL
        .par_iter()
        .map(|&c| sample_category(&index, c, quotas.get(c), opts.horizon, focus, seed).map(|d| (c, d)))
        .collect::<Result<_>>()?;

    let docs = &corpus.documents;
    let mut samples = Vec::with_capacity(quotas.total());
    for (category, ds) in draws {
        for d in ds {
            let (d1, d2) = (&docs[d.doc1], &docs[d.doc2]);
            let (p1, p2) = (&d1.paragraphs[d.para1], &d2.paragraphs[d.para2]);
            let (para1, para2) = truncate_pair(&p1.text, &p2.text, &corpus.tokenizer, &opts.truncation);
            let sample = PairSample {
                sample_id: format!("{}-{:06}", opts.name, samples.len()),
                author1: d1.author_id.clone(),
                year1: d1.year,
                doc1: d1.doc_id.clone(),
                para_index1: p1.index,
                author2: d2.author_id.clone(),
                year2: d2.year,
                doc2: d2.doc_id.clone(),
                para_index2: p2.index,
                joined: format!("{para1}{SEPARATOR}{para2}"),
                para1,
                para2,
                label: category.label(),
                category,
            };
            debug_assert!(sample.check(opts.horizon).is_ok());
            samples.push(sample);
        }
    }
    Ok(PairDataset {
        header: DatasetHeader {
            format: DATASET_FORMAT.to_string(),
            name: opts.name.clone(),
            seed,
            quotas: *quotas,
            horizon: opts.horizon,
            tokenizer: corpus.tokenizer,
            truncation: opts.truncation,
            focus_author: opts.focus_author.clone(),
            separator: SEPARATOR.to_string(),
        },
        samples,
    })
}

/// All datasets of one author permutation.
#[derive(Debug, Clone)]
pub struct PermutationDatasets {
    pub split: AuthorSplit,
    pub warnings: Vec<String>,
    pub train: PairDataset,
    pub dev: PairDataset,
    pub test: PairDataset,
    /// One test set per focus author.
    pub focus: Vec<PairDataset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationConfig {
    pub quotas: QuotaSpec,
    pub ratios: [f64; 3],
    pub truncation: TruncationConfig,
    /// Held out of the split; each gets its own test set against the test authors.
    pub focus_authors: Vec<String>,
}

pub fn build_permutation(corpus: &Corpus, cfg: &PermutationConfig, seed: u64) -> Result<PermutationDatasets> {
    let mut groups = group_authors(corpus, cfg.quotas.horizon);
    for g in [&mut groups.single, &mut groups.within, &mut groups.spanning] {
        g.retain(|a| !cfg.focus_authors.contains(a));
    }
    let (split, warnings) = split_authors(&groups, cfg.ratios, seed)?;
    let gen = |name: &str, authors: &[String], quotas: CategoryQuotas, focus: Option<String>| {
        let opts = GenerateOptions {
            name: name.to_string(),
            horizon: cfg.quotas.horizon,
            truncation: cfg.truncation,
            focus_author: focus,
        };
        generate_pairs(corpus, authors, &quotas, &opts, seed::derive(seed, &["dataset", name]))
    };
    let mut sets = Vec::new();
    for s in SplitName::ALL {
        sets.push(gen(s.as_str(), split.get(s), cfg.quotas.for_split(s), None)?);
    }
    let focus = cfg
        .focus_authors
        .iter()
        .map(|f| gen(&format!("focus-{f}"), &split.test, cfg.quotas.for_split(SplitName::Test), Some(f.clone())))
        .collect::<Result<Vec<_>>>()?;
    let test = sets.pop().unwrap();
    let dev = sets.pop().unwrap();
    let train = sets.pop().unwrap();
    Ok(PermutationDatasets {
        split,
        warnings,
        train,
        dev,
        test,
        focus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IngestedDocument, Paragraph, CORPUS_FORMAT};

    fn corpus(docs: &[(&str, &str, i32, usize)]) -> Corpus {
        Corpus {
            format: CORPUS_FORMAT.into(),
            tokenizer: TokenizerConfig::default(),
            min_tokens: 0,
            documents: docs
                .iter()
                .map(|&(doc, author, year, n)| IngestedDocument {
                    doc_id: doc.into(),
                    author_id: author.into(),
                    year,
                    paragraphs: (0..n)
                        .map(|i| Paragraph {
                            doc_id: doc.into(),
                            index: i,
                            text: format!("{doc} paragraph {i}"),
                            token_count: 0,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn categories() {
        let c = |a1, y1, d1, a2, y2, d2| categorize_pair(a1, y1, d1, a2, y2, d2, 10).unwrap();
        assert_eq!(c("A", 1931, "d1", "A", 1931, "d1"), SampleCategory::SameDoc);
        assert_eq!(c("A", 1940, "d1", "A", 1953, "d2"), SampleCategory::SameAuthFar);
        assert_eq!(c("A", 1931, "d1", "B", 1940, "d2"), SampleCategory::DiffAuthNear);
        assert_eq!(c("A", 1930, "d1", "A", 1940, "d2"), SampleCategory::SameAuthNear);
        assert_eq!(c("A", 1930, "d1", "B", 1941, "d2"), SampleCategory::DiffAuthFar);
        assert!(matches!(
            categorize_pair("A", 1931, "d1", "B", 1931, "d1", 10),
            Err(Error::CorruptMetadata { .. })
        ));
    }

    #[test]
    fn grouping() {
        let c = corpus(&[
            ("a1", "single", 1931, 1),
            ("b1", "within", 1931, 1),
            ("b2", "within", 1940, 1),
            ("c1", "span", 1931, 1),
            ("c2", "span", 1953, 1),
        ]);
        let g = group_authors(&c, 10);
        assert_eq!(g.single, vec!["single"]);
        assert_eq!(g.within, vec!["within"]);
        assert_eq!(g.spanning, vec!["span"]);
    }

    #[test]
    fn apportion_largest_remainder() {
        assert_eq!(apportion(10, &[0.8, 0.1, 0.1]), [8, 1, 1]);
        assert_eq!(apportion(7, &[0.5, 0.25, 0.25]), [3, 2, 2]);
        assert_eq!(apportion(3, &[1.0, 0.0, 0.0]), [3, 0, 0]);
        assert_eq!(apportion(412, &[0.865, 0.053, 0.082]), [356, 22, 34]);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let groups = AuthorGroups {
            single: (0..10).map(|i| format!("a{i}")).collect(),
            within: vec!["w1".into(), "w2".into()],
            spanning: vec![],
        };
        let (s1, warnings) = split_authors(&groups, [0.8, 0.1, 0.1], 5).unwrap();
        let (s2, _) = split_authors(&groups, [0.8, 0.1, 0.1], 5).unwrap();
        assert_eq!(s1, s2);
        assert_eq!((s1.train.len(), s1.dev.len(), s1.test.len()), (10, 1, 1));
        assert!(s1.train.contains(&"w1".to_string()) && s1.train.contains(&"w2".to_string()));
        assert_eq!(warnings.len(), 1);
        let all: HashSet<&String> = s1.train.iter().chain(&s1.dev).chain(&s1.test).collect();
        assert_eq!(all.len(), 12);

        assert!(split_authors(&groups, [0.5, 0.1, 0.1], 5).is_err());
    }

    #[test]
    fn toy_corpus_one_per_category() {
        // A: 1931 and 1935 and 1950; B: 1933 and 1960
        let c = corpus(&[
            ("a1", "A", 1931, 3),
            ("a2", "A", 1935, 2),
            ("a3", "A", 1950, 2),
            ("b1", "B", 1933, 2),
        ]);
        let authors = vec!["A".to_string(), "B".to_string()];
        let ds = generate_pairs(&c, &authors, &CategoryQuotas::new(1, 1, 1, 1, 1), &GenerateOptions::default(), 3).unwrap();
        assert_eq!(ds.samples.len(), 5);
        for s in &ds.samples {
            s.check(10).unwrap();
        }
        let counts = ds.category_counts();
        assert!(SampleCategory::ALL.iter().all(|c| counts[c] == 1));
    }

    #[test]
    fn unsatisfiable_names_category() {
        let c = corpus(&[("a1", "A", 1931, 3), ("b1", "B", 1933, 2)]);
        let authors = vec!["A".to_string(), "B".to_string()];
        let err = generate_pairs(&c, &authors, &CategoryQuotas::new(0, 0, 0, 0, 1), &GenerateOptions::default(), 1)
            .unwrap_err();
        assert!(err.to_string().contains("DIFF_AUTH_FAR"), "{err}");

        // only 3 distinct same-document pairs exist
        let err = generate_pairs(&c, &authors, &CategoryQuotas::new(5, 0, 0, 0, 0), &GenerateOptions::default(), 1)
            .unwrap_err();
        assert!(err.to_string().contains("SAME_DOC"), "{err}");
        assert!(generate_pairs(&c, &authors, &CategoryQuotas::new(3, 0, 0, 0, 0), &GenerateOptions::default(), 1).is_ok());
    }

    #[test]
    fn focus_author_goes_first() {
        let c = corpus(&[
            ("o1", "focus", 1931, 3),
            ("o2", "focus", 1940, 3),
            ("o3", "focus", 1953, 3),
            ("x1", "X", 1935, 3),
            ("y1", "Y", 1960, 3),
        ]);
        let opts = GenerateOptions {
            focus_author: Some("focus".into()),
            ..Default::default()
        };
        let pool = vec!["X".to_string(), "Y".to_string()];
        let ds = generate_pairs(&c, &pool, &CategoryQuotas::new(2, 2, 2, 2, 2), &opts, 9).unwrap();
        assert_eq!(ds.samples.len(), 10);
        for s in &ds.samples {
            assert_eq!(s.author1, "focus");
            s.check(10).unwrap();
        }
    }

    #[test]
    fn dataset_round_trip() {
        let c = corpus(&[("a1", "A", 1931, 3), ("a2", "A", 1935, 2), ("b1", "B", 1933, 2)]);
        let authors = vec!["A".to_string(), "B".to_string()];
        let ds = generate_pairs(&c, &authors, &CategoryQuotas::new(1, 1, 0, 1, 0), &GenerateOptions::default(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        ds.write_jsonl(&p).unwrap();
        assert_eq!(PairDataset::read_jsonl(&p).unwrap(), ds);
        assert!(ds.samples[0].joined.contains(SEPARATOR));
    }
}
