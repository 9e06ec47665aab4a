//! Synthetic corpora from per-author first-order Markov character models.
//!
//! All authors share a base transition matrix; each author multiplies it by
//! log-normal noise of scale `author_sigma`, which gives every author a
//! distinct character-bigram signature. Documents fall into two eras. For the
//! authors marked as shifted, second-era documents come from a further
//! perturbed matrix (`shift_sigma`), so their cross-era pairs look less alike.

use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub authors: usize,
    pub docs_per_era: usize,
    pub paragraphs_per_doc: usize,
    /// Number of distinct characters; hiragana first, then CJK ideographs.
    pub alphabet_size: usize,
    /// Inclusive range of paragraph lengths in characters.
    pub paragraph_chars: (usize, usize),
    /// Inclusive publication-year ranges of the two eras.
    pub eras: [(i32, i32); 2],
    /// Every `shift_every`-th author (0, k, 2k, ...) changes style in era 2.
    pub shift_every: usize,
    pub author_sigma: f64,
    pub shift_sigma: f64,
    /// Concentration of the shared base matrix; larger is more peaked.
    pub base_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            authors: 20,
            docs_per_era: 4,
            paragraphs_per_doc: 5,
            alphabet_size: 44,
            paragraph_chars: (260, 340),
            eras: [(1900, 1906), (1925, 1931)],
            shift_every: 2,
            author_sigma: 0.7,
            shift_sigma: 1.2,
            base_sigma: 2.5,
            seed: 7,
        }
    }
}

/// Hiragana and Japanese punctuation, then ideographs from U+4E00 up to `size`.
fn alphabet(size: usize) -> Vec<char> {
    let mut a: Vec<char> = ('\u{3042}'..='\u{3093}').step_by(2).collect();
    a.extend(['、', '。', 'ー']);
    a.extend(('\u{4E00}'..='\u{9FFF}').take(size.saturating_sub(a.len())));
    a.truncate(size.max(2));
    a
}

type Matrix = Vec<Vec<f64>>;

fn noisy(rng: &mut ChaCha8Rng, base: &Matrix, sigma: f64) -> Matrix {
    base.iter()
        .map(|row| {
            row.iter()
                .map(|&w| {
                    let z: f64 = StandardNormal.sample(rng);
                    w * (sigma * z).exp()
                })
                .collect()
        })
        .collect()
}

struct Chain {
    rows: Vec<WeightedIndex<f64>>,
}

impl Chain {
    fn new(m: &Matrix) -> Chain {
        Chain {
            rows: m.iter().map(|r| WeightedIndex::new(r).expect("positive weights")).collect(),
        }
    }

    fn emit(&self, rng: &mut ChaCha8Rng, alphabet: &[char], len: usize) -> String {
        let mut state = rng.random_range(0..alphabet.len());
        let mut s = String::with_capacity(len * 3);
        for _ in 0..len {
            s.push(alphabet[state]);
            state = self.rows[state].sample(rng);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    /// Authors whose second-era style differs from the first.
    pub shifted_authors: Vec<String>,
}

pub fn author_id(i: usize) -> String {
    format!("author{i:03}")
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let alphabet = alphabet(cfg.alphabet_size);
    let k = alphabet.len();
    let mut base_rng = seed::rng(seed::derive(cfg.seed, &["synth", "base"]));
    let flat = vec![vec![1.0; k]; k];
    let base = noisy(&mut base_rng, &flat, cfg.base_sigma);

    let mut documents = Vec::new();
    let mut shifted_authors = Vec::new();
    for a in 0..cfg.authors {
        let id = author_id(a);
        let mut rng = seed::rng(seed::derive(cfg.seed, &["synth", &id]));
        let era1 = noisy(&mut rng, &base, cfg.author_sigma);
        let shifted = cfg.shift_every > 0 && a % cfg.shift_every == 0;
        let era2 = if shifted {
            shifted_authors.push(id.clone());
            noisy(&mut rng, &era1, cfg.shift_sigma)
        } else {
            era1.clone()
        };
        for (era, m) in [&era1, &era2].into_iter().enumerate() {
            let chain = Chain::new(m);
            let (lo, hi) = cfg.eras[era];
            for d in 0..cfg.docs_per_era {
                let paragraphs: Vec<String> = (0..cfg.paragraphs_per_doc)
                    .map(|_| {
                        let len = rng.random_range(cfg.paragraph_chars.0..=cfg.paragraph_chars.1);
                        chain.emit(&mut rng, &alphabet, len)
                    })
                    .collect();
                documents.push(Document {
                    doc_id: format!("{id}-e{era}-d{d}"),
                    author_id: id.clone(),
                    year: rng.random_range(lo..=hi),
                    text: paragraphs.join("\n\n"),
                });
            }
        }
    }
    SynthCorpus {
        documents,
        shifted_authors,
    }
}

impl SynthCorpus {
    /// Writes one `.txt` file per document and a `manifest.jsonl` referencing
    /// them, plus `shifted_authors.json`. Returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let texts = dir.join("texts");
        fs::create_dir_all(&texts).map_err(|e| Error::io(&texts, e))?;
        let mut manifest = String::new();
        for d in &self.documents {
            let rel = format!("texts/{}.txt", d.doc_id);
            let p = dir.join(&rel);
            fs::write(&p, &d.text).map_err(|e| Error::io(&p, e))?;
            manifest.push_str(&serde_json::to_string(&serde_json::json!({
                "doc_id": d.doc_id,
                "author_id": d.author_id,
                "year": d.year,
                "path": rel,
            }))?);
            manifest.push('\n');
        }
        let mp = dir.join("manifest.jsonl");
        fs::write(&mp, manifest).map_err(|e| Error::io(&mp, e))?;
        let sp = dir.join("shifted_authors.json");
        fs::write(&sp, serde_json::to_vec_pretty(&self.shifted_authors)?).map_err(|e| Error::io(&sp, e))?;
        Ok(mp)
    }
}
