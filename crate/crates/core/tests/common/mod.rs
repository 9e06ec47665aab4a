#![allow(dead_code)]

use avkit::corpus::{Corpus, TokenizerConfig};
use avkit::pairgen::{self, PairDataset, PermutationConfig, QuotaSpec};
use avkit::synth::{self, SynthConfig};

pub fn small_corpus() -> Corpus {
    let s = synth::generate(&SynthConfig {
        authors: 10,
        docs_per_era: 2,
        paragraphs_per_doc: 4,
        ..Default::default()
    });
    Corpus::ingest(&s.documents, TokenizerConfig::default(), 200)
}

/// A test-split dataset of exactly `n` samples with distinct ids.
pub fn dataset(n: usize) -> PairDataset {
    let cfg = PermutationConfig {
        quotas: QuotaSpec::five_category().scaled(100),
        ratios: [0.6, 0.2, 0.2],
        truncation: Default::default(),
        focus_authors: Vec::new(),
    };
    let mut ds = pairgen::build_permutation(&small_corpus(), &cfg, 5).unwrap().test;
    let base = ds.samples.clone();
    ds.samples = (0..n)
        .map(|i| {
            let mut s = base[i % base.len()].clone();
            s.sample_id = format!("s{i:05}");
            s
        })
        .collect();
    ds
}
