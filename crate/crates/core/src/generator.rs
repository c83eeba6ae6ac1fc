//! Synthetic labeled corpora built from per-label token sources.
//!
//! Each label owns a weighted vocabulary. A document picks a handful of
//! labels, draws `tokens_per_label` tokens from each label's vocabulary, tops
//! them up with background tokens from a shared vocabulary, and shuffles the
//! lot into a single line of text.
//!
//! Document `i` of a corpus generated with root seed `s` uses its own
//! `ChaCha8Rng` seeded from `s` on stream `i`, so any document can be
//! regenerated alone and the corpus does not depend on execution order.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Label};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Token source for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGeneratorSpec {
    pub label: Label,
    pub vocabulary: Vec<String>,
    /// Relative sampling weights, parallel to `vocabulary`. Empty means uniform.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub token_weights: Vec<f64>,
}

impl LabelGeneratorSpec {
    pub fn uniform(label: Label, vocabulary: Vec<String>) -> Self {
        Self {
            label,
            vocabulary,
            token_weights: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidConfig(format!("label `{}`: {m}", self.label)));
        if self.vocabulary.is_empty() {
            return err("vocabulary is empty".into());
        }
        let mut seen = HashSet::new();
        for tok in &self.vocabulary {
            check_token(tok).or_else(&err)?;
            if !seen.insert(tok.as_str()) {
                return err(format!("token `{tok}` repeated in vocabulary"));
            }
        }
        if !self.token_weights.is_empty() {
            if self.token_weights.len() != self.vocabulary.len() {
                return err("token_weights and vocabulary differ in length".into());
            }
            if self.token_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return err("token weights must be positive and finite".into());
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Result<WeightedIndex<f64>> {
        self.validate()?;
        let weights = if self.token_weights.is_empty() {
            vec![1.0; self.vocabulary.len()]
        } else {
            self.token_weights.clone()
        };
        WeightedIndex::new(weights).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

fn check_token(tok: &str) -> std::result::Result<(), String> {
    if tok.is_empty() || tok.chars().any(char::is_whitespace) {
        return Err(format!("token {tok:?} is empty or contains whitespace"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedToken {
    pub token: String,
    pub weight: f64,
}

/// Everything that controls a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSpec {
    pub specs: Vec<LabelGeneratorSpec>,
    /// Background tokens that may appear in any document.
    #[serde(default)]
    pub shared_vocabulary: Vec<WeightedToken>,
    /// Target share of background tokens in each document, in `[0, 1)`.
    #[serde(default)]
    pub noise_fraction: f64,
    pub tokens_per_label: usize,
    /// Entry `i` is the probability that a document carries `i + 1` labels.
    pub labels_per_document: Vec<f64>,
    /// Relative chance of a label being picked; unlisted labels weigh 1.
    #[serde(default)]
    pub label_bias: BTreeMap<Label, f64>,
}

impl MixingSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidConfig(m));
        if self.specs.is_empty() {
            return err("at least one label spec is required".into());
        }
        let mut labels = BTreeSet::new();
        for spec in &self.specs {
            spec.validate()?;
            if !labels.insert(&spec.label) {
                return err(format!("label `{}` has more than one spec", spec.label));
            }
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return err(format!("noise_fraction {} must lie in [0, 1)", self.noise_fraction));
        }
        if self.noise_fraction > 0.0 && self.shared_vocabulary.is_empty() {
            return err("noise_fraction > 0 needs a non-empty shared_vocabulary".into());
        }
        for wt in &self.shared_vocabulary {
            check_token(&wt.token).or_else(err)?;
            if !(wt.weight.is_finite() && wt.weight > 0.0) {
                return err(format!("shared token `{}` needs a positive weight", wt.token));
            }
        }
        if self.tokens_per_label == 0 {
            return err("tokens_per_label must be at least 1".into());
        }
        let lpd = &self.labels_per_document;
        if lpd.is_empty() || lpd.len() > self.specs.len() {
            return err(format!(
                "labels_per_document needs between 1 and {} entries",
                self.specs.len()
            ));
        }
        if lpd.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return err("labels_per_document entries must be non-negative".into());
        }
        let total: f64 = lpd.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return err(format!("labels_per_document sums to {total}, not 1"));
        }
        for (label, &w) in &self.label_bias {
            if !labels.contains(label) {
                return err(format!("label_bias names unknown label `{label}`"));
            }
            if !(w.is_finite() && w > 0.0) {
                return err(format!("label_bias for `{label}` must be positive"));
            }
        }
        Ok(())
    }

    fn bias(&self, label: &Label) -> f64 {
        self.label_bias.get(label).copied().unwrap_or(1.0)
    }

    /// Number of background tokens to add to `label_tokens` label tokens.
    fn shared_count(&self, label_tokens: usize) -> usize {
        (label_tokens as f64 * self.noise_fraction / (1.0 - self.noise_fraction)).round() as usize
    }
}

/// Draws `n_tokens` independent tokens from the label's vocabulary.
pub fn generate_label_text<R: Rng + ?Sized>(
    spec: &LabelGeneratorSpec,
    n_tokens: usize,
    rng: &mut R,
) -> Result<Vec<String>> {
    let sampler = spec.sampler()?;
    Ok((0..n_tokens)
        .map(|_| spec.vocabulary[sampler.sample(rng)].clone())
        .collect())
}

/// Concatenates all token lists, shuffles them, and joins with single spaces.
pub fn mix<R: Rng + ?Sized>(parts: &[Vec<String>], shared: &[String], rng: &mut R) -> String {
    let mut tokens: Vec<&str> = parts
        .iter()
        .flatten()
        .chain(shared)
        .map(String::as_str)
        .collect();
    tokens.shuffle(rng);
    tokens.join(" ")
}

/// Generates `n_documents` documents with ids `synth-0`, `synth-1`, ...
pub fn generate_corpus(mixing: &MixingSpec, n_documents: usize, seed: u64) -> Result<Corpus> {
    generate_corpus_with(Execution::default(), mixing, n_documents, seed)
}

pub fn generate_corpus_with(
    exec: Execution,
    mixing: &MixingSpec,
    n_documents: usize,
    seed: u64,
) -> Result<Corpus> {
    mixing.validate()?;
    if n_documents == 0 {
        return Err(Error::InvalidConfig("n_documents must be at least 1".into()));
    }
    let count_sampler = WeightedIndex::new(mixing.labels_per_document.iter().copied())
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let shared_sampler = if mixing.shared_vocabulary.is_empty() {
        None
    } else {
        Some(
            WeightedIndex::new(mixing.shared_vocabulary.iter().map(|t| t.weight))
                .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        )
    };
    let bias: Vec<f64> = mixing.specs.iter().map(|s| mixing.bias(&s.label)).collect();

    let documents = par::map_range(exec, n_documents, |ordinal| {
        let mut rng = document_rng(seed, ordinal as u64);
        let n_labels = count_sampler.sample(&mut rng) + 1;
        let chosen = draw_distinct(&bias, n_labels, &mut rng);

        let mut parts = Vec::with_capacity(chosen.len());
        for &i in &chosen {
            parts.push(generate_label_text(&mixing.specs[i], mixing.tokens_per_label, &mut rng)?);
        }
        let n_shared = mixing.shared_count(n_labels * mixing.tokens_per_label);
        let shared: Vec<String> = match &shared_sampler {
            Some(sampler) => (0..n_shared)
                .map(|_| mixing.shared_vocabulary[sampler.sample(&mut rng)].token.clone())
                .collect(),
            None => Vec::new(),
        };
        let text = mix(&parts, &shared, &mut rng);
        Document::new(
            format!("synth-{ordinal}"),
            text,
            chosen.iter().map(|&i| mixing.specs[i].label.clone()),
        )
    });
    Corpus::new(documents.into_iter().collect::<Result<Vec<_>>>()?)
}

/// The generator state used for document `ordinal` under root `seed`.
pub fn document_rng(seed: u64, ordinal: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal);
    rng
}

/// Weighted sampling of `n` distinct indices, without replacement.
fn draw_distinct<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mut remaining = weights.to_vec();
    let mut chosen = Vec::with_capacity(n);
    for _ in 0..n {
        let pick = WeightedIndex::new(&remaining)
            .expect("label count never exceeds the number of labels")
            .sample(rng);
        remaining[pick] = 0.0;
        chosen.push(pick);
    }
    chosen
}
