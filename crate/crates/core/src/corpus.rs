//! Corpus ingest: manifest loading, paragraph segmentation, the token-length
//! filter and the pair truncation policy.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CORPUS_FORMAT: &str = "avkit-corpus/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub author_id: String,
    pub year: i32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub doc_id: String,
    /// Position among the non-empty paragraphs of the document.
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// One token per Unicode scalar value.
    #[default]
    UnicodeChar,
    /// Maximal runs of non-whitespace.
    Whitespace,
}

impl std::str::FromStr for TokenizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unicode_char" => Ok(TokenizerMode::UnicodeChar),
            "whitespace" => Ok(TokenizerMode::Whitespace),
            other => Err(Error::Config(format!(
                "unknown tokenizer `{other}` (expected unicode_char or whitespace)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub mode: TokenizerMode,
}

impl TokenizerConfig {
    pub fn new(mode: TokenizerMode) -> Self {
        Self { mode }
    }

    pub fn count_tokens(&self, text: &str) -> usize {
        match self.mode {
            TokenizerMode::UnicodeChar => text.chars().count(),
            TokenizerMode::Whitespace => text.split_whitespace().count(),
        }
    }

    /// Longest prefix of `text` holding at most `max_tokens` tokens.
    pub fn truncate<'a>(&self, text: &'a str, max_tokens: usize) -> &'a str {
        match self.mode {
            TokenizerMode::UnicodeChar => match text.char_indices().nth(max_tokens) {
                Some((end, _)) => &text[..end],
                None => text,
            },
            TokenizerMode::Whitespace => {
                if max_tokens == 0 {
                    return "";
                }
                match text.split_whitespace().nth(max_tokens - 1) {
                    Some(tok) => {
                        let end = tok.as_ptr() as usize - text.as_ptr() as usize + tok.len();
                        &text[..end]
                    }
                    None => text,
                }
            }
        }
    }
}

/// Budget for the two paragraphs of a pair. `reserve` positions are kept
/// free for the control and separator tokens of a joint encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub max_combined: usize,
    pub reserve: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            max_combined: 512,
            reserve: 3,
        }
    }
}

impl TruncationConfig {
    pub fn per_side(&self) -> usize {
        self.max_combined.saturating_sub(self.reserve) / 2
    }
}

/// Cuts each side of a pair to an equal per-side budget, keeping the head of
/// each paragraph. Sides already within budget come back unchanged.
pub fn truncate_pair(
    text1: &str,
    text2: &str,
    tok: &TokenizerConfig,
    trunc: &TruncationConfig,
) -> (String, String) {
    let budget = trunc.per_side();
    (
        tok.truncate(text1, budget).to_string(),
        tok.truncate(text2, budget).to_string(),
    )
}

/// Splits on runs of newlines after CRLF normalization, trims each piece,
/// and keeps pieces with at least `min_tokens` tokens. Indices count every
/// non-empty piece so they stay stable under different thresholds.
pub fn segment_paragraphs(doc: &Document, tok: &TokenizerConfig, min_tokens: usize) -> Vec<Paragraph> {
    let normalized = doc.text.replace("\r\n", "\n").replace('\r', "\n");
    normalized
        .split('\n')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .filter_map(|(index, text)| {
            let token_count = tok.count_tokens(text);
            (token_count >= min_tokens).then(|| Paragraph {
                doc_id: doc.doc_id.clone(),
                index,
                text: text.to_string(),
                token_count,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRecord {
    doc_id: String,
    author_id: String,
    year: i32,
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    text: Option<String>,
}

/// Reads a JSON-lines manifest. Relative `path` entries resolve against the
/// manifest's directory. Blank lines are skipped.
pub fn load_manifest(path: &Path) -> Result<Vec<Document>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let text = match (rec.text, rec.path) {
            (Some(text), None) => text,
            (None, Some(rel)) => {
                let full = base.join(rel);
                fs::read_to_string(&full).map_err(|e| Error::io(full, e))?
            }
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: "record needs exactly one of `path` or `text`".into(),
                })
            }
        };
        if rec.year <= 0 {
            return Err(Error::InvalidDocument {
                doc_id: rec.doc_id,
                reason: format!("year must be positive, got {}", rec.year),
            });
        }
        if text.trim().is_empty() {
            return Err(Error::InvalidDocument {
                doc_id: rec.doc_id,
                reason: "empty text".into(),
            });
        }
        if !seen.insert(rec.doc_id.clone()) {
            return Err(Error::DuplicateDocId(rec.doc_id));
        }
        docs.push(Document {
            doc_id: rec.doc_id,
            author_id: rec.author_id,
            year: rec.year,
            text,
        });
    }
    Ok(docs)
}

/// A document after segmentation: metadata plus its admitted paragraphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestedDocument {
    pub doc_id: String,
    pub author_id: String,
    pub year: i32,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub format: String,
    pub tokenizer: TokenizerConfig,
    pub min_tokens: usize,
    pub documents: Vec<IngestedDocument>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub documents: usize,
    pub authors: usize,
    pub paragraphs: usize,
}

impl std::fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} paragraphs in {} documents by {} authors",
            self.paragraphs, self.documents, self.authors
        )
    }
}

impl Corpus {
    /// Segments every document. Documents left without admissible paragraphs
    /// are dropped, since they cannot contribute samples.
    pub fn ingest(docs: &[Document], tokenizer: TokenizerConfig, min_tokens: usize) -> Corpus {
        let documents = docs
            .par_iter()
            .map(|d| IngestedDocument {
                doc_id: d.doc_id.clone(),
                author_id: d.author_id.clone(),
                year: d.year,
                paragraphs: segment_paragraphs(d, &tokenizer, min_tokens),
            })
            .filter(|d| !d.paragraphs.is_empty())
            .collect();
        Corpus {
            format: CORPUS_FORMAT.to_string(),
            tokenizer,
            min_tokens,
            documents,
        }
    }

    pub fn summary(&self) -> IngestSummary {
        let authors: BTreeSet<&str> = self.documents.iter().map(|d| d.author_id.as_str()).collect();
        IngestSummary {
            documents: self.documents.len(),
            authors: authors.len(),
            paragraphs: self.documents.iter().map(|d| d.paragraphs.len()).sum(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let corpus: Corpus = serde_json::from_slice(&bytes)?;
        if corpus.format != CORPUS_FORMAT {
            return Err(Error::Config(format!(
                "{}: unsupported corpus format `{}`",
                path.display(),
                corpus.format
            )));
        }
        Ok(corpus)
    }
}
