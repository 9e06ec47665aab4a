//! Declarative multi-stage runs.
//!
//! One TOML file describes ingest, pair generation for every author
//! permutation, feature fitting, the Impostors verifier, any external
//! classifiers, and the report. Each stage records a hash of its inputs next
//! to its outputs and is skipped when the outputs exist and the hash matches.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::info;

use crate::corpus::{load_manifest, Corpus, TokenizerMode, TokenizerConfig, TruncationConfig};
use crate::error::{Error, Result};
use crate::eval::{self, McNemarMethod, ReportOptions, TestSetEval};
use crate::features::{FeatureConfig, FeatureModel};
use crate::impostors::{self, ImpostorParams, ImpostorPool};
use crate::pairgen::{self, PairDataset, PermutationConfig, QuotaSpec};
use crate::protocol::{self, Endpoint, ExternalOptions};
use crate::results::{read_results, write_results, VerificationResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const IMPOSTORS: &str = "impostors";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Output directory, relative to the config file.
    pub out_dir: PathBuf,
    /// One author permutation per seed.
    pub seeds: Vec<u64>,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub pairs: PairsSection,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub impostors: ImpostorsSection,
    #[serde(default)]
    pub external: Vec<ExternalSection>,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub manifest: PathBuf,
    #[serde(default = "default_min_tokens")]
    pub min_tokens: usize,
    #[serde(default)]
    pub tokenizer: TokenizerMode,
}

fn default_min_tokens() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotaPreset {
    #[default]
    FiveCategory,
    FourCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsSection {
    /// JSON quota file; overrides `preset`.
    #[serde(default)]
    pub quotas: Option<PathBuf>,
    #[serde(default)]
    pub preset: QuotaPreset,
    /// Divides every preset count.
    #[serde(default = "one")]
    pub scale_divisor: usize,
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    #[serde(default)]
    pub focus_authors: Vec<String>,
    #[serde(default = "default_max_combined")]
    pub max_combined: usize,
    #[serde(default = "default_reserve")]
    pub reserve: usize,
}

fn one() -> usize {
    1
}
fn default_ratios() -> [f64; 3] {
    [0.8, 0.1, 0.1]
}
fn default_max_combined() -> usize {
    512
}
fn default_reserve() -> usize {
    3
}

impl Default for PairsSection {
    fn default() -> Self {
        Self {
            quotas: None,
            preset: QuotaPreset::default(),
            scale_divisor: 1,
            ratios: default_ratios(),
            focus_authors: Vec::new(),
            max_combined: default_max_combined(),
            reserve: default_reserve(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpostorsSection {
    pub enabled: bool,
    pub seed: u64,
    pub iterations: usize,
    pub feature_fraction: f64,
    pub pool_size: usize,
    pub impostors_per_iter: usize,
    pub threshold: f64,
}

impl ImpostorsSection {
    pub fn params(&self) -> ImpostorParams {
        ImpostorParams {
            iterations: self.iterations,
            feature_fraction: self.feature_fraction,
            pool_size: self.pool_size,
            impostors_per_iter: self.impostors_per_iter,
            threshold: self.threshold,
        }
    }
}

impl Default for ImpostorsSection {
    fn default() -> Self {
        let p = ImpostorParams::default();
        Self {
            enabled: true,
            seed: 17,
            iterations: p.iterations,
            feature_fraction: p.feature_fraction,
            pool_size: p.pool_size,
            impostors_per_iter: p.impostors_per_iter,
            threshold: p.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSection {
    pub name: String,
    /// Command line or `http(s)://` URL.
    pub endpoint: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_timeout() -> u64 {
    300
}
fn default_window() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    #[serde(default = "one_i32")]
    pub distance_width: i32,
    /// Two classifier names to compare with McNemar's test.
    #[serde(default)]
    pub compare: Option<[String; 2]>,
    #[serde(default)]
    pub mcnemar: McNemarMethod,
}

fn one_i32() -> i32 {
    1
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            distance_width: 1,
            compare: None,
            mcnemar: McNemarMethod::default(),
        }
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

impl PipelineConfig {
    pub fn parse(src: &str, path: &Path) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = toml::from_str(src).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&src, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.corpus.manifest);
        if let Some(q) = &mut self.pairs.quotas {
            fix(q);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("`seeds` must list at least one seed".into()));
        }
        let mut uniq = self.seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != self.seeds.len() {
            return Err(Error::Config("`seeds` must be distinct".into()));
        }
        if self.pairs.scale_divisor == 0 {
            return Err(Error::Config("`pairs.scale_divisor` must be positive".into()));
        }
        if self.pairs.max_combined < 2 {
            return Err(Error::Config("`pairs.max_combined` must be at least 2".into()));
        }
        self.impostors.params().validate()?;
        let mut names: Vec<&str> = self.external.iter().map(|e| e.name.as_str()).collect();
        names.push(IMPOSTORS);
        let n = names.len();
        names.sort_unstable();
        names.dedup();
        if names.len() != n {
            return Err(Error::Config("classifier names must be distinct".into()));
        }
        if let Some(pair) = &self.eval.compare {
            for c in pair {
                if !names.contains(&c.as_str()) {
                    return Err(Error::Config(format!("`eval.compare` names unknown classifier `{c}`")));
                }
            }
        }
        Ok(())
    }

    pub fn quotas(&self) -> Result<QuotaSpec> {
        match &self.pairs.quotas {
            Some(p) => QuotaSpec::load(p),
            None => Ok(match self.pairs.preset {
                QuotaPreset::FiveCategory => QuotaSpec::five_category(),
                QuotaPreset::FourCategory => QuotaSpec::four_category(),
            }
            .scaled(self.pairs.scale_divisor)),
        }
    }

    pub fn truncation(&self) -> TruncationConfig {
        TruncationConfig {
            max_combined: self.pairs.max_combined,
            reserve: self.pairs.reserve,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub input_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    pub seeds: Vec<u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Default)]
struct Hasher(Sha256);

impl Hasher {
    fn bytes(mut self, b: &[u8]) -> Self {
        self.0.update((b.len() as u64).to_le_bytes());
        self.0.update(b);
        self
    }

    fn json<T: Serialize>(self, v: &T) -> Result<Self> {
        Ok(self.bytes(&serde_json::to_vec(v)?))
    }

    fn file(self, p: &Path) -> Result<Self> {
        let b = fs::read(p).map_err(|e| Error::io(p, e))?;
        Ok(self.bytes(&b))
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    stamps: PathBuf,
    records: Vec<StageRecord>,
}

impl Runner<'_> {
    /// Runs `body` unless every output exists and the stamp matches `hash`.
    fn stage(&mut self, name: &str, hash: String, outputs: &[PathBuf], body: impl FnOnce() -> Result<()>) -> Result<()> {
        let stamp = self.stamps.join(format!("{}.hash", name.replace('/', "__")));
        let fresh = outputs.iter().all(|o| o.exists())
            && fs::read_to_string(&stamp).map(|s| s.trim() == hash).unwrap_or(false);
        let status = if fresh {
            info!(stage = name, "up to date, skipping");
            StageStatus::Skipped
        } else {
            info!(stage = name, "running");
            body().map_err(|e| Error::Stage {
                stage: name.to_string(),
                source: Box::new(e),
            })?;
            fs::write(&stamp, &hash).map_err(|e| Error::io(&stamp, e))?;
            StageStatus::Ran
        };
        self.records.push(StageRecord {
            stage: name.to_string(),
            status,
            input_hash: hash,
        });
        Ok(())
    }
}

fn create_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

/// Test sets of a permutation directory: `test` then focus sets by name.
fn test_set_names(cfg: &PipelineConfig) -> Vec<String> {
    let mut names = vec!["test".to_string()];
    names.extend(cfg.pairs.focus_authors.iter().map(|f| format!("focus-{f}")));
    names
}

pub fn permutation_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("perm-{seed}"))
}

pub fn results_path(out: &Path, seed: u64, classifier: &str, set: &str) -> PathBuf {
    permutation_dir(out, seed).join(classifier).join(format!("{set}.results.jsonl"))
}

pub fn report_dir(out: &Path, classifier: &str) -> PathBuf {
    out.join("report").join(classifier)
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

impl PipelineOutcome {
    pub fn all_skipped(&self) -> bool {
        self.manifest.stages.iter().all(|s| s.status == StageStatus::Skipped)
    }
}

pub fn run(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let started = now_unix();
    let out = cfg.out_dir.clone();
    let stamps = out.join(".stamps");
    create_dir(&stamps)?;
    let mut runner = Runner {
        cfg,
        stamps,
        records: Vec::new(),
    };
    let mut input_hashes = BTreeMap::new();

    // ingest
    let corpus_path = out.join("corpus.bin");
    let docs = load_manifest(&cfg.corpus.manifest).map_err(|e| Error::Stage {
        stage: "ingest".into(),
        source: Box::new(e),
    })?;
    let manifest_hash = Hasher::default().json(&docs)?.finish();
    input_hashes.insert("manifest".to_string(), manifest_hash.clone());
    let h = Hasher::default()
        .bytes(manifest_hash.as_bytes())
        .json(&cfg.corpus)?
        .bytes(TOOL_VERSION.as_bytes())
        .finish();
    runner.stage("ingest", h, &[corpus_path.clone()], || {
        let corpus = Corpus::ingest(&docs, TokenizerConfig::new(cfg.corpus.tokenizer), cfg.corpus.min_tokens);
        info!("ingested {}", corpus.summary());
        corpus.save(&corpus_path)
    })?;
    drop(docs);
    let corpus_hash = Hasher::default().file(&corpus_path)?.finish();
    let quotas = runner.cfg.quotas()?;
    if let Some(q) = &cfg.pairs.quotas {
        input_hashes.insert("quotas".to_string(), Hasher::default().file(q)?.finish());
    }

    let mut corpus: Option<Corpus> = None;
    let sets = test_set_names(cfg);
    for &seed in &cfg.seeds {
        let dir = permutation_dir(&out, seed);
        create_dir(&dir)?;
        let name = format!("perm-{seed}");

        // pairs
        let mut outputs = vec![dir.join("split.json"), dir.join("train.jsonl"), dir.join("dev.jsonl")];
        outputs.extend(sets.iter().map(|s| dir.join(format!("{s}.jsonl"))));
        let h = Hasher::default()
            .bytes(corpus_hash.as_bytes())
            .json(&quotas)?
            .json(&cfg.pairs)?
            .json(&seed)?
            .bytes(TOOL_VERSION.as_bytes())
            .finish();
        runner.stage(&format!("{name}/pairs"), h, &outputs, || {
            if corpus.is_none() {
                corpus = Some(Corpus::load(&corpus_path)?);
            }
            let pc = PermutationConfig {
                quotas,
                ratios: cfg.pairs.ratios,
                truncation: cfg.truncation(),
                focus_authors: cfg.pairs.focus_authors.clone(),
            };
            let p = pairgen::build_permutation(corpus.as_ref().unwrap(), &pc, seed)?;
            let split = dir.join("split.json");
            fs::write(&split, serde_json::to_vec_pretty(&p.split)?).map_err(|e| Error::io(&split, e))?;
            p.train.write_jsonl(&dir.join("train.jsonl"))?;
            p.dev.write_jsonl(&dir.join("dev.jsonl"))?;
            p.test.write_jsonl(&dir.join("test.jsonl"))?;
            for ds in &p.focus {
                ds.write_jsonl(&dir.join(format!("{}.jsonl", ds.header.name)))?;
            }
            Ok(())
        })?;

        // features
        let train_path = dir.join("train.jsonl");
        let model_path = dir.join("features.model");
        let train_hash = Hasher::default().file(&train_path)?.finish();
        let h = Hasher::default()
            .bytes(train_hash.as_bytes())
            .json(&cfg.features)?
            .bytes(TOOL_VERSION.as_bytes())
            .finish();
        runner.stage(&format!("{name}/features"), h, &[model_path.clone()], || {
            let train = PairDataset::read_jsonl(&train_path)?;
            let texts: Vec<String> = train.paragraphs().into_iter().map(|p| p.text).collect();
            FeatureModel::fit(&texts, cfg.features)?.save(&model_path)
        })?;

        // impostors
        if cfg.impostors.enabled {
            let model_hash = Hasher::default().file(&model_path)?.finish();
            let cdir = dir.join(IMPOSTORS);
            create_dir(&cdir)?;
            let mut loaded: Option<(FeatureModel, ImpostorPool)> = None;
            for set in &sets {
                let test_path = dir.join(format!("{set}.jsonl"));
                let res_path = results_path(&out, seed, IMPOSTORS, set);
                let h = Hasher::default()
                    .bytes(model_hash.as_bytes())
                    .bytes(train_hash.as_bytes())
                    .file(&test_path)?
                    .json(&cfg.impostors)?
                    .bytes(TOOL_VERSION.as_bytes())
                    .finish();
                runner.stage(&format!("{name}/{IMPOSTORS}/{set}"), h, &[res_path.clone()], || {
                    if loaded.is_none() {
                        let model = FeatureModel::load(&model_path)?;
                        let train = PairDataset::read_jsonl(&train_path)?;
                        let pool = ImpostorPool::from_dataset(&train, &model);
                        loaded = Some((model, pool));
                    }
                    let (model, pool) = loaded.as_ref().unwrap();
                    let test = PairDataset::read_jsonl(&test_path)?;
                    let results = impostors::run_testset(&test, model, pool, &cfg.impostors.params(), cfg.impostors.seed)?;
                    write_results(&res_path, &results)
                })?;
            }
        }

        // external classifiers
        for ext in &cfg.external {
            let cdir = dir.join(&ext.name);
            create_dir(&cdir)?;
            let endpoint = Endpoint::parse(&ext.endpoint)?;
            let opts = ExternalOptions {
                timeout: std::time::Duration::from_secs(ext.timeout_secs),
                window: ext.window,
            };
            for set in &sets {
                let test_path = dir.join(format!("{set}.jsonl"));
                let res_path = results_path(&out, seed, &ext.name, set);
                let h = Hasher::default().file(&test_path)?.json(ext)?.finish();
                runner.stage(&format!("{name}/{}/{set}", ext.name), h, &[res_path.clone()], || {
                    let test = PairDataset::read_jsonl(&test_path)?;
                    let results = protocol::run_external(&test, &endpoint, &opts)?;
                    write_results(&res_path, &results)
                })?;
            }
        }
    }

    // eval
    let mut classifiers: Vec<String> = Vec::new();
    if cfg.impostors.enabled {
        classifiers.push(IMPOSTORS.to_string());
    }
    classifiers.extend(cfg.external.iter().map(|e| e.name.clone()));
    let mut h = Hasher::default().json(&cfg.eval)?;
    for &seed in &cfg.seeds {
        for set in &sets {
            h = h.file(&permutation_dir(&out, seed).join(format!("{set}.jsonl")))?;
            for c in &classifiers {
                h = h.file(&results_path(&out, seed, c, set))?;
            }
        }
    }
    let h = h.bytes(TOOL_VERSION.as_bytes()).finish();
    let mut outputs: Vec<PathBuf> = classifiers.iter().map(|c| report_dir(&out, c).join("prf.csv")).collect();
    if cfg.eval.compare.is_some() {
        outputs.push(out.join("report").join("mcnemar.txt"));
    }
    runner.stage("eval", h, &outputs, || evaluate(cfg, &out, &classifiers, &sets))?;

    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        config: cfg.clone(),
        seeds: cfg.seeds.clone(),
        input_hashes,
        stages: runner.records,
        started_unix: started,
        finished_unix: now_unix(),
    };
    let mp = out.join(MANIFEST_FILE);
    fs::write(&mp, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&mp, e))?;
    Ok(PipelineOutcome { manifest, out_dir: out })
}

/// Pools each classifier's predictions over all permutations per test set
/// and writes one report per classifier.
fn evaluate(cfg: &PipelineConfig, out: &Path, classifiers: &[String], sets: &[String]) -> Result<()> {
    let opts = ReportOptions {
        distance_width: cfg.eval.distance_width,
    };
    // keyed by `seed/sample_id` so permutations stay distinct
    let mut keyed: BTreeMap<&str, Vec<VerificationResult>> = BTreeMap::new();
    for c in classifiers {
        let mut test_sets = Vec::new();
        for set in sets {
            let mut evals = Vec::new();
            for &seed in &cfg.seeds {
                let ds = PairDataset::read_jsonl(&permutation_dir(out, seed).join(format!("{set}.jsonl")))?;
                let results = read_results(&results_path(out, seed, c, set))?;
                evals.extend(eval::join(&ds, &results)?);
                keyed.entry(c).or_default().extend(results.into_iter().map(|mut r| {
                    r.sample_id = format!("{seed}/{set}/{}", r.sample_id);
                    r
                }));
            }
            test_sets.push(TestSetEval {
                name: set.clone(),
                evals,
            });
        }
        let report = eval::build_report(&test_sets, None, &opts);
        report.write(&report_dir(out, c))?;
    }
    if let Some([a, b]) = &cfg.eval.compare {
        let m = eval::mcnemar(&keyed[a.as_str()], &keyed[b.as_str()], cfg.eval.mcnemar)?;
        let dir = out.join("report");
        create_dir(&dir)?;
        let p = dir.join("mcnemar.txt");
        let text = format!(
            "A: {a}\nB: {b}\nmethod: {:?}\nb (A right, B wrong): {}\nc (A wrong, B right): {}\nstatistic: {}\np: {}\n",
            m.method, m.b, m.c, m.statistic, m.p
        );
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

/// Config for the bundled synthetic demo rooted at `dir`.
pub fn demo_config(manifest: &Path, out_dir: &Path) -> PipelineConfig {
    PipelineConfig {
        out_dir: out_dir.to_path_buf(),
        seeds: vec![17, 18, 19],
        corpus: CorpusSection {
            manifest: manifest.to_path_buf(),
            min_tokens: 200,
            tokenizer: TokenizerMode::UnicodeChar,
        },
        pairs: PairsSection {
            scale_divisor: 100,
            ..Default::default()
        },
        features: FeatureConfig::default(),
        impostors: ImpostorsSection::default(),
        external: Vec::new(),
        eval: EvalSection::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
out_dir = "run"
seeds = [1, 2]

[corpus]
manifest = "m.jsonl"
"#;

    #[test]
    fn parse_defaults() {
        let cfg = PipelineConfig::parse(MINIMAL, Path::new("c.toml")).unwrap();
        assert_eq!(cfg.corpus.min_tokens, 200);
        assert_eq!(cfg.pairs.ratios, [0.8, 0.1, 0.1]);
        assert_eq!(cfg.impostors.params(), ImpostorParams::default());
        assert_eq!(cfg.quotas().unwrap(), QuotaSpec::five_category());
        assert_eq!(cfg.truncation(), TruncationConfig::default());
    }

    #[test]
    fn parse_errors_carry_line() {
        let src = format!("{MINIMAL}\n[impostors]\niterations = \"many\"\n");
        match PipelineConfig::parse(&src, Path::new("c.toml")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 9),
            e => panic!("unexpected {e}"),
        }
        let src = format!("{MINIMAL}\n[eval]\nbogus = 1\n");
        assert!(matches!(
            PipelineConfig::parse(&src, Path::new("c.toml")).unwrap_err(),
            Error::Parse { line: 9, .. }
        ));
    }

    #[test]
    fn validation() {
        let src = MINIMAL.replace("[1, 2]", "[1, 1]");
        assert!(PipelineConfig::parse(&src, Path::new("c.toml")).is_err());
        let src = format!("{MINIMAL}\n[eval]\ncompare = [\"impostors\", \"bert\"]\n");
        let err = PipelineConfig::parse(&src, Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("bert"), "{err}");
    }

    #[test]
    fn missing_manifest_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::parse(MINIMAL, Path::new("c.toml")).unwrap();
        cfg.resolve(dir.path());
        let err = run(&cfg).unwrap_err();
        assert!(err.to_string().contains("m.jsonl"), "{err}");
    }
}
