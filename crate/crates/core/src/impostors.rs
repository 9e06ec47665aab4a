//! The Impostors Method.
//!
//! Paragraph 2 of a problem is the disputed text and paragraph 1 the known
//! text of the candidate author. Each iteration restricts the feature space
//! to a random subset and draws a few impostors from a per-problem pool; the
//! iteration is won when the known text is strictly more similar (minmax) to
//! the disputed text than every drawn impostor. The score is the fraction of
//! won iterations.
//!
//! Only features in the union of the supports of the vectors involved in an
//! iteration can change a similarity. Instead of materializing a subset of
//! size `k` over the whole vocabulary `V`, each iteration draws how many of
//! the `|U|` relevant features the subset would contain (hypergeometric over
//! `V`, `|U|`, `k`) and then which ones (uniform). The restricted
//! similarities have exactly the distribution of the full-vocabulary draw.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureModel;
use crate::pairgen::{PairDataset, PairSample};
use crate::results::VerificationResult;
use crate::seed;
use crate::sparse::{minmax_where, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpostorParams {
    pub iterations: usize,
    pub feature_fraction: f64,
    pub pool_size: usize,
    pub impostors_per_iter: usize,
    pub threshold: f64,
}

impl Default for ImpostorParams {
    fn default() -> Self {
        Self {
            iterations: 100,
            feature_fraction: 0.9,
            pool_size: 100,
            impostors_per_iter: 5,
            threshold: 0.5,
        }
    }
}

impl ImpostorParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.iterations == 0 {
            return fail("iterations must be positive".into());
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return fail(format!("feature_fraction {} outside (0, 1]", self.feature_fraction));
        }
        if self.impostors_per_iter == 0 || self.impostors_per_iter > self.pool_size {
            return fail(format!(
                "impostors_per_iter {} must be in 1..={}",
                self.impostors_per_iter, self.pool_size
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return fail(format!("threshold {} outside [0, 1]", self.threshold));
        }
        Ok(())
    }

    /// Size of each iteration's feature subset over a vocabulary of `dim`.
    pub fn features_per_iter(&self, dim: usize) -> usize {
        // the epsilon keeps 0.9 * 50000 from rounding up to 45001
        let k = (self.feature_fraction * dim as f64 - 1e-9).ceil() as usize;
        k.clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone)]
pub struct PoolCandidate {
    pub author_id: String,
    pub doc_id: String,
    pub vector: SparseVector,
}

/// Vectorized candidate impostor texts, shared read-only by all problems.
#[derive(Debug, Clone, Default)]
pub struct ImpostorPool {
    pub candidates: Vec<PoolCandidate>,
}

impl ImpostorPool {
    /// One candidate per distinct paragraph of `dataset`, in key order.
    pub fn from_dataset(dataset: &PairDataset, model: &FeatureModel) -> ImpostorPool {
        let candidates = dataset
            .paragraphs()
            .into_par_iter()
            .map(|p| PoolCandidate {
                vector: model.vectorize(&p.text),
                author_id: p.author_id,
                doc_id: p.doc_id,
            })
            .collect();
        ImpostorPool { candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidates by authors other than those of the problem.
    fn eligible(&self, exclude: &[&str]) -> Vec<usize> {
        (0..self.candidates.len())
            .filter(|&i| !exclude.contains(&self.candidates[i].author_id.as_str()))
            .collect()
    }
}

/// Reusable membership mask over the vocabulary.
struct FeatureMask {
    bits: Vec<bool>,
    set: Vec<u32>,
}

impl FeatureMask {
    fn new(dim: usize) -> Self {
        Self {
            bits: vec![false; dim],
            set: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &i in &self.set {
            self.bits[i as usize] = false;
        }
        self.set.clear();
    }

    fn insert(&mut self, i: u32) {
        self.bits[i as usize] = true;
        self.set.push(i);
    }

    fn contains(&self, i: u32) -> bool {
        self.bits[i as usize]
    }
}

fn union_support(vectors: &[&SparseVector]) -> Vec<u32> {
    let mut u: Vec<u32> = vectors.iter().flat_map(|v| v.indices().iter().copied()).collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Fraction of won iterations for one problem against a fixed impostor set.
///
/// `dim` is the vocabulary size the feature subsets are drawn from; every
/// index in the vectors must be below it.
pub fn score_problem(
    known: &SparseVector,
    disputed: &SparseVector,
    impostors: &[&SparseVector],
    dim: usize,
    params: &ImpostorParams,
    rng: &mut ChaCha8Rng,
) -> f64 {
    assert!(params.impostors_per_iter <= impostors.len());
    let k = params.features_per_iter(dim);
    let mut mask = FeatureMask::new(dim);
    let mut wins = 0usize;
    let mut drawn: Vec<&SparseVector> = Vec::with_capacity(params.impostors_per_iter + 2);
    for _ in 0..params.iterations {
        drawn.clear();
        drawn.extend(
            index::sample(rng, impostors.len(), params.impostors_per_iter)
                .into_iter()
                .map(|i| impostors[i]),
        );
        drawn.push(known);
        drawn.push(disputed);
        let union = union_support(&drawn);
        let hits = if k >= dim {
            union.len()
        } else {
            Hypergeometric::new(dim as u64, union.len() as u64, k as u64)
                .expect("parameters are bounded by dim")
                .sample(rng) as usize
        };
        mask.clear();
        for pos in index::sample(rng, union.len(), hits) {
            mask.insert(union[pos]);
        }
        let keep = |i: u32| mask.contains(i);
        let target = minmax_where(disputed, known, keep);
        let impostors_drawn = &drawn[..drawn.len() - 2];
        if impostors_drawn.iter().all(|imp| target > minmax_where(disputed, imp, keep)) {
            wins += 1;
        }
    }
    wins as f64 / params.iterations as f64
}

/// Verifies one problem. The per-problem impostor pool is drawn once from
/// candidates not written by either author of the problem.
pub fn verify(
    sample: &PairSample,
    model: &FeatureModel,
    pool: &ImpostorPool,
    params: &ImpostorParams,
    seed: u64,
) -> Result<VerificationResult> {
    params.validate()?;
    if model.dim() == 0 {
        return Err(Error::EmptyModel);
    }
    let eligible = pool.eligible(&[&sample.author1, &sample.author2]);
    if eligible.len() < params.pool_size {
        return Err(Error::PoolTooSmall {
            available: eligible.len(),
            required: params.pool_size,
        });
    }
    let mut rng = seed::rng(seed);
    let chosen: Vec<&SparseVector> = index::sample(&mut rng, eligible.len(), params.pool_size)
        .into_iter()
        .map(|i| &pool.candidates[eligible[i]].vector)
        .collect();
    let known = model.vectorize(&sample.para1);
    let disputed = model.vectorize(&sample.para2);
    let score = score_problem(&known, &disputed, &chosen, model.dim(), params, &mut rng);
    Ok(VerificationResult::from_score(
        sample.sample_id.clone(),
        sample.label,
        score,
        params.threshold,
    ))
}

/// Verifies every sample. Each sample's RNG is derived from `(seed, index)`,
/// so the output does not depend on thread count or scheduling.
pub fn run_testset(
    dataset: &PairDataset,
    model: &FeatureModel,
    pool: &ImpostorPool,
    params: &ImpostorParams,
    seed: u64,
) -> Result<Vec<VerificationResult>> {
    params.validate()?;
    dataset
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            verify(s, model, pool, params, seed::derive_index(seed, "sample", i as u64)).map_err(|e| Error::Sample {
                index: i,
                sample_id: s.sample_id.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}
