//! A small TF-IDF search engine over a [`Corpus`].
//!
//! Documents and queries are bag-of-words vectors weighted by
//! `tf * ln(1 + N / df)`. The distance between two texts is one minus the
//! cosine of their vectors, clamped to `[0, 1]`; a zero vector is at distance
//! 1 from everything. [`search`] enumerates candidates through the inverted
//! index, [`brute_force_search`] scores every document directly and serves as
//! the reference for it.
//!
//! Both paths accumulate dot products over query terms in sorted order, so
//! they agree bit-for-bit rather than merely within rounding.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Minimum token length in characters.
    pub min_token_length: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            min_token_length: 2,
            stopwords: BTreeSet::new(),
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_length == 0 {
            return Err(Error::InvalidConfig("min_token_length must be at least 1".into()));
        }
        Ok(())
    }
}

/// Splits text into maximal runs of letters and digits.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|run| !run.is_empty())
        .map(|run| {
            if config.lowercase {
                run.to_lowercase()
            } else {
                run.to_string()
            }
        })
        .filter(|tok| tok.chars().count() >= config.min_token_length)
        .filter(|tok| !config.stopwords.contains(tok))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Strict distance threshold: only hits with `distance < cutoff` are kept.
    pub cutoff: f64,
    pub max_results: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            cutoff: 0.7,
            max_results: 50,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cutoff {} must lie in (0, 1]",
                self.cutoff
            )));
        }
        if self.max_results == 0 {
            return Err(Error::InvalidConfig("max_results must be at least 1".into()));
        }
        Ok(())
    }
}

/// Inverse document frequencies. Tokens missing from the table weigh as if
/// they occurred in exactly one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    n_documents: usize,
    weights: BTreeMap<String, f64>,
}

impl IdfTable {
    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.weights
            .get(token)
            .copied()
            .unwrap_or_else(|| self.unseen_weight())
    }

    pub fn unseen_weight(&self) -> f64 {
        idf(self.n_documents, 1)
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.weights.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn idf(n_documents: usize, df: usize) -> f64 {
    (1.0 + n_documents as f64 / df as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// One retrieved neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchHit<'a> {
    /// Position of the document in the indexed corpus.
    pub ordinal: usize,
    pub document: &'a Document,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    tokenizer: TokenizerConfig,
    idf: IdfTable,
    postings: BTreeMap<String, Vec<Posting>>,
    /// Squared Euclidean norm of each document's weighted vector.
    doc_sq_norms: Vec<f64>,
    corpus: Corpus,
}

/// Indexes `corpus`, computing idf from its own document frequencies.
pub fn build_index(corpus: &Corpus, config: &TokenizerConfig) -> Result<Index> {
    Index::build(corpus, config, None)
}

impl Index {
    /// Indexes `corpus` with a fixed idf table instead of recomputing it.
    pub fn build_with_idf(corpus: &Corpus, config: &TokenizerConfig, idf: IdfTable) -> Result<Index> {
        Self::build(corpus, config, Some(idf))
    }

    fn build(corpus: &Corpus, config: &TokenizerConfig, frozen: Option<IdfTable>) -> Result<Index> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if corpus.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig("corpus too large to index".into()));
        }
        let counts: Vec<BTreeMap<String, u32>> =
            par::map_indexed(Execution::default(), corpus.documents(), |_, doc| {
                owned_counts(tokenize(doc.text(), config))
            });

        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (ordinal, doc_counts) in counts.iter().enumerate() {
            for (token, &tf) in doc_counts {
                postings.entry(token.clone()).or_default().push(Posting {
                    doc: ordinal as u32,
                    tf,
                });
            }
        }

        let idf = frozen.unwrap_or_else(|| IdfTable {
            n_documents: corpus.len(),
            weights: postings
                .iter()
                .map(|(token, list)| (token.clone(), idf(corpus.len(), list.len())))
                .collect(),
        });

        let doc_sq_norms = counts
            .iter()
            .map(|doc_counts| {
                doc_counts
                    .iter()
                    .map(|(token, &tf)| {
                        let w = tf as f64 * idf.weight(token);
                        w * w
                    })
                    .sum()
            })
            .collect();

        Ok(Index {
            tokenizer: config.clone(),
            idf,
            postings,
            doc_sq_norms,
            corpus: corpus.clone(),
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn tokenizer(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    pub fn idf(&self) -> &IdfTable {
        &self.idf
    }

    pub fn n_documents(&self) -> usize {
        self.corpus.len()
    }

    /// Number of distinct indexed tokens.
    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, token: &str) -> Option<&[Posting]> {
        self.postings.get(token).map(Vec::as_slice)
    }

    pub fn doc_norm(&self, ordinal: usize) -> f64 {
        self.doc_sq_norms[ordinal].sqrt()
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        tokenize(text, &self.tokenizer)
    }

    /// Checks internal consistency after deserialization.
    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.corpus.len();
        let bad = |m: &str| Err(Error::InvalidIndexFile(m.to_string()));
        if n == 0 {
            return bad("index holds no documents");
        }
        if self.doc_sq_norms.len() != n {
            return bad("norm table does not match document count");
        }
        if self.doc_sq_norms.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("negative or non-finite document norm");
        }
        if self.postings.values().flatten().any(|p| p.doc as usize >= n || p.tf == 0) {
            return bad("posting refers to a missing document");
        }
        if self.idf.weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("negative or non-finite idf");
        }
        self.tokenizer
            .validate()
            .map_err(|e| Error::InvalidIndexFile(e.to_string()))
    }
}

fn owned_counts(tokens: Vec<String>) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for tok in tokens {
        *counts.entry(tok).or_insert(0) += 1;
    }
    counts
}

/// Weighted vector in sorted token order, plus its squared norm.
fn weighted<'t>(idf: &IdfTable, tokens: &'t [String]) -> (BTreeMap<&'t str, f64>, f64) {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for tok in tokens {
        *counts.entry(tok.as_str()).or_insert(0) += 1;
    }
    let vector: BTreeMap<&str, f64> = counts
        .into_iter()
        .map(|(tok, tf)| (tok, tf as f64 * idf.weight(tok)))
        .collect();
    let sq_norm = vector.values().map(|w| w * w).sum();
    (vector, sq_norm)
}

fn cosine_distance(dot: f64, sq_a: f64, sq_b: f64) -> f64 {
    if sq_a == 0.0 || sq_b == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (sq_a * sq_b).sqrt()).clamp(0.0, 1.0)
}

/// `1 - cosine` between the tf-idf vectors of two token lists under the
/// index's idf table.
pub fn distance(index: &Index, tokens_a: &[String], tokens_b: &[String]) -> f64 {
    let (va, sq_a) = weighted(&index.idf, tokens_a);
    let (vb, sq_b) = weighted(&index.idf, tokens_b);
    let mut dot = 0.0;
    for (tok, wa) in &va {
        if let Some(wb) = vb.get(tok) {
            dot += wa * wb;
        }
    }
    cosine_distance(dot, sq_a, sq_b)
}

fn finish<'a>(mut hits: Vec<SearchHit<'a>>, config: &SearchConfig) -> Vec<SearchHit<'a>> {
    hits.retain(|h| h.distance < config.cutoff);
    hits.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.ordinal.cmp(&b.ordinal))
    });
    hits.truncate(config.max_results);
    hits
}

/// Neighbors of `query` closer than the cutoff, nearest first, ties by
/// corpus position.
pub fn search<'a>(index: &'a Index, query: &str, config: &SearchConfig) -> Vec<SearchHit<'a>> {
    let tokens = index.tokenize(query);
    let (query_vec, sq_q) = weighted(&index.idf, &tokens);
    if sq_q == 0.0 {
        return Vec::new();
    }

    let n = index.n_documents();
    let mut dots = vec![0.0f64; n];
    let mut touched = vec![false; n];
    let mut candidates = Vec::new();
    for (tok, wq) in &query_vec {
        let Some(list) = index.postings.get(*tok) else {
            continue;
        };
        let term_idf = index.idf.weight(tok);
        for p in list {
            let doc = p.doc as usize;
            if !touched[doc] {
                touched[doc] = true;
                candidates.push(doc);
            }
            dots[doc] += wq * (p.tf as f64 * term_idf);
        }
    }

    let documents = index.corpus.documents();
    let hits = candidates
        .into_iter()
        .map(|doc| SearchHit {
            ordinal: doc,
            document: &documents[doc],
            distance: cosine_distance(dots[doc], sq_q, index.doc_sq_norms[doc]),
        })
        .collect();
    finish(hits, config)
}

/// Reference search: evaluates [`distance`] against every document's text.
pub fn brute_force_search<'a>(
    corpus: &'a Corpus,
    index: &Index,
    query: &str,
    config: &SearchConfig,
) -> Vec<SearchHit<'a>> {
    let query_tokens = index.tokenize(query);
    let hits = corpus
        .documents()
        .iter()
        .enumerate()
        .map(|(ordinal, document)| SearchHit {
            ordinal,
            document,
            distance: distance(index, &query_tokens, &index.tokenize(document.text())),
        })
        .collect();
    finish(hits, config)
}
