//! Character n-gram tf-idf features.
//!
//! Text is NFC-normalized and whitespace runs collapse to one space before
//! n-grams are taken. The vocabulary keeps the `max_size` n-grams with the
//! highest total occurrence count in the training texts, ties broken by the
//! n-gram itself, so it does not depend on text order. Weights are raw term
//! count times smoothed idf `ln((1 + N) / (1 + df)) + 1`, L2-normalized.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const MODEL_FORMAT: &str = "avkit-features/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub n: usize,
    pub max_size: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { n: 2, max_size: 50_000 }
    }
}

pub fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Character n-grams of already-normalized text, in order of occurrence.
pub fn char_ngrams(text: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    let chars: Vec<char> = text.chars().collect();
    let count = if n == 0 { 0 } else { chars.len().saturating_sub(n - 1) };
    (0..count).map(move |i| chars[i..i + n].iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub n: usize,
    pub max_size: usize,
    /// Index to n-gram, in rank order.
    pub ngrams: Vec<String>,
    /// Total training occurrences, parallel to `ngrams`.
    pub counts: Vec<u64>,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_ranked(n: usize, max_size: usize, ranked: Vec<(String, u64)>) -> Self {
        let (ngrams, counts): (Vec<_>, Vec<_>) = ranked.into_iter().unzip();
        let mut v = Vocabulary {
            n,
            max_size,
            ngrams,
            counts,
            lookup: HashMap::new(),
        };
        v.rebuild_lookup();
        v
    }

    fn rebuild_lookup(&mut self) {
        self.lookup = self
            .ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    pub fn index_of(&self, ngram: &str) -> Option<u32> {
        self.lookup.get(ngram).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub n_docs: usize,
    pub df: Vec<u64>,
    pub idf: Vec<f64>,
}

pub fn smoothed_idf(n_docs: usize, df: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

fn count_ngrams(texts: &[String], n: usize) -> HashMap<String, u64> {
    texts
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<String, u64>, t| {
            for g in char_ngrams(&normalize_text(t), n) {
                *acc.entry(g).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

pub fn build_vocabulary(texts: &[String], n: usize, max_size: usize) -> Result<Vocabulary> {
    if n == 0 {
        return Err(Error::Config("n-gram length must be at least 1".into()));
    }
    if texts.is_empty() {
        return Err(Error::EmptyTrainingCorpus);
    }
    let mut ranked: Vec<(String, u64)> = count_ngrams(texts, n).into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size);
    Ok(Vocabulary::from_ranked(n, max_size, ranked))
}

/// Document frequencies over `texts`, one text per document.
pub fn build_idf(texts: &[String], vocab: &Vocabulary) -> IdfTable {
    let df = texts
        .par_iter()
        .fold(
            || vec![0u64; vocab.len()],
            |mut acc, t| {
                let mut seen: Vec<u32> = char_ngrams(&normalize_text(t), vocab.n)
                    .filter_map(|g| vocab.index_of(&g))
                    .collect();
                seen.sort_unstable();
                seen.dedup();
                for i in seen {
                    acc[i as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; vocab.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let idf = df.iter().map(|&d| smoothed_idf(texts.len(), d)).collect();
    IdfTable {
        n_docs: texts.len(),
        df,
        idf,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureModel {
    pub format: String,
    pub config: FeatureConfig,
    pub vocab: Vocabulary,
    pub idf: IdfTable,
}

impl FeatureModel {
    pub fn fit(texts: &[String], config: FeatureConfig) -> Result<FeatureModel> {
        let vocab = build_vocabulary(texts, config.n, config.max_size)?;
        let idf = build_idf(texts, &vocab);
        Ok(FeatureModel {
            format: MODEL_FORMAT.to_string(),
            config,
            vocab,
            idf,
        })
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// tf-idf vector of `text`, L2-normalized. Out-of-vocabulary n-grams are
    /// ignored; a text without any in-vocabulary n-gram maps to the empty vector.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let pairs = char_ngrams(&normalize_text(text), self.vocab.n)
            .filter_map(|g| self.vocab.index_of(&g))
            .map(|i| (i, self.idf.idf[i as usize]))
            .collect();
        let mut v = SparseVector::from_pairs(pairs);
        v.normalize();
        v
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<FeatureModel> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut model: FeatureModel = serde_json::from_slice(&bytes)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Config(format!(
                "{}: unsupported feature model format `{}`",
                path.display(),
                model.format
            )));
        }
        model.vocab.rebuild_lookup();
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn vocabulary_ranks_by_count() {
        let v = build_vocabulary(&texts(&["abab"]), 2, 50_000).unwrap();
        assert_eq!(v.ngrams, vec!["ab", "ba"]);
        assert_eq!(v.counts, vec![2, 1]);

        let v = build_vocabulary(&texts(&["abab"]), 2, 1).unwrap();
        assert_eq!(v.ngrams, vec!["ab"]);

        let v = build_vocabulary(&texts(&["aaa"]), 1, 10).unwrap();
        assert_eq!((v.ngrams.clone(), v.counts.clone()), (vec!["a".to_string()], vec![3]));
    }

    #[test]
    fn vocabulary_ties_are_lexicographic_and_order_free() {
        let a = build_vocabulary(&texts(&["xy", "ab", "mn"]), 2, 2).unwrap();
        let b = build_vocabulary(&texts(&["mn", "xy", "ab"]), 2, 2).unwrap();
        assert_eq!(a.ngrams, vec!["ab", "mn"]);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(build_vocabulary(&[], 2, 10), Err(Error::EmptyTrainingCorpus)));
        assert!(build_vocabulary(&texts(&["ab"]), 0, 10).is_err());
    }

    #[test]
    fn single_document_weights() {
        let m = FeatureModel::fit(&texts(&["abab"]), FeatureConfig::default()).unwrap();
        assert_eq!(m.idf.idf, vec![1.0, 1.0]);
        let v = m.vectorize("abab");
        let s5 = 5f64.sqrt();
        assert_eq!(v.indices(), &[0, 1]);
        assert!((v.values()[0] - 2.0 / s5).abs() < 1e-15);
        assert!((v.values()[1] - 1.0 / s5).abs() < 1e-15);
        assert_eq!(m.vectorize("abab"), v);
        assert!(m.vectorize("zzzz").is_empty());
        assert!(m.vectorize("").is_empty());
    }

    #[test]
    fn idf_is_smoothed() {
        let m = FeatureModel::fit(&texts(&["ab", "ab", "cd"]), FeatureConfig::default()).unwrap();
        let ab = m.vocab.index_of("ab").unwrap() as usize;
        let cd = m.vocab.index_of("cd").unwrap() as usize;
        assert_eq!(m.idf.df[ab], 2);
        assert!((m.idf.idf[ab] - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((m.idf.idf[cd] - (2.0f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn normalization_collapses_whitespace_and_composes() {
        assert_eq!(normalize_text("  a \n\t b  "), "a b");
        // e + combining acute composes to a single scalar
        assert_eq!(normalize_text("e\u{301}"), "\u{e9}");
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = FeatureModel::fit(&texts(&["hello world", "yellow"]), FeatureConfig::default()).unwrap();
        m.save(&p).unwrap();
        let back = FeatureModel::load(&p).unwrap();
        assert_eq!(back.vectorize("hello"), m.vectorize("hello"));
    }
}
