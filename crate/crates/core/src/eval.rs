//! Accuracy and per-label metrics over a held-out corpus.
//!
//! A prediction is correct when its rank-1 label is a member of the
//! document's true label set. Abstentions count as misses. Per-label
//! precision and recall look at rank-1 predictions only.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::{vote, Neighborhood, Prediction, Scheme};
use crate::corpus::{Corpus, Label, LabelStats};
use crate::error::{Error, Result};
use crate::index::{search, Index, SearchConfig};
use crate::par::{self, derive_seed, Execution};

/// How a prediction is matched against a multi-label truth.
pub const MATCH_RULE: &str = "membership";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: Scheme,
    pub match_rule: String,
    pub k: usize,
    pub n_test: usize,
    pub n_abstained: usize,
    pub top1_accuracy: f64,
    pub topk_hit_rate: f64,
    pub per_label: BTreeMap<Label, LabelMetrics>,
    /// Mean recall over labels that occur in the test set.
    pub macro_recall: f64,
}

impl EvalReport {
    pub fn recall(&self, label: &Label) -> Option<f64> {
        self.per_label.get(label).map(|m| m.recall)
    }
}

#[derive(Default)]
struct Tally {
    n_test: usize,
    n_abstained: usize,
    top1_hits: usize,
    topk_hits: usize,
    support: BTreeMap<Label, usize>,
    predicted: BTreeMap<Label, usize>,
    correct: BTreeMap<Label, usize>,
}

impl Tally {
    fn add(&mut self, truth: &std::collections::BTreeSet<Label>, prediction: &Prediction, k: usize) {
        self.n_test += 1;
        for label in truth {
            *self.support.entry(label.clone()).or_default() += 1;
        }
        if prediction.abstained {
            self.n_abstained += 1;
            return;
        }
        if prediction.ranked.iter().take(k).any(|r| truth.contains(&r.label)) {
            self.topk_hits += 1;
        }
        if let Some(top) = prediction.top() {
            *self.predicted.entry(top.clone()).or_default() += 1;
            if truth.contains(top) {
                self.top1_hits += 1;
                *self.correct.entry(top.clone()).or_default() += 1;
            }
        }
    }

    fn report(self, scheme: Scheme, k: usize) -> EvalReport {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let mut labels: Vec<&Label> = self.support.keys().chain(self.predicted.keys()).collect();
        labels.sort();
        labels.dedup();
        let per_label: BTreeMap<Label, LabelMetrics> = labels
            .into_iter()
            .map(|label| {
                let correct = self.correct.get(label).copied().unwrap_or(0);
                let support = self.support.get(label).copied().unwrap_or(0);
                let predicted = self.predicted.get(label).copied().unwrap_or(0);
                let metrics = LabelMetrics {
                    precision: ratio(correct, predicted),
                    recall: ratio(correct, support),
                    support,
                };
                (label.clone(), metrics)
            })
            .collect();
        let supported: Vec<f64> = per_label
            .values()
            .filter(|m| m.support > 0)
            .map(|m| m.recall)
            .collect();
        let macro_recall = if supported.is_empty() {
            0.0
        } else {
            supported.iter().sum::<f64>() / supported.len() as f64
        };
        EvalReport {
            scheme,
            match_rule: MATCH_RULE.to_string(),
            k,
            n_test: self.n_test,
            n_abstained: self.n_abstained,
            top1_accuracy: ratio(self.top1_hits, self.n_test),
            topk_hit_rate: ratio(self.topk_hits, self.n_test),
            per_label,
            macro_recall,
        }
    }
}

/// Classifies every test document and scores the predictions.
///
/// Document `i` is voted with the seed `derive_seed(seed, i)`.
pub fn evaluate(
    index: &Index,
    stats: &LabelStats,
    test: &Corpus,
    scheme: Scheme,
    k: usize,
    search_config: &SearchConfig,
    seed: u64,
) -> Result<EvalReport> {
    let mut reports = evaluate_schemes(
        Execution::default(),
        index,
        stats,
        test,
        &[scheme],
        k,
        search_config,
        seed,
    )?;
    Ok(reports.remove(0))
}

/// Runs all three schemes on the same inputs: naive, weighted, boosted.
pub fn compare_schemes(
    index: &Index,
    stats: &LabelStats,
    test: &Corpus,
    k: usize,
    search_config: &SearchConfig,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    evaluate_schemes(
        Execution::default(),
        index,
        stats,
        test,
        &Scheme::ALL,
        k,
        search_config,
        seed,
    )
}

/// Searches once per test document and votes with each scheme in turn.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_schemes(
    exec: Execution,
    index: &Index,
    stats: &LabelStats,
    test: &Corpus,
    schemes: &[Scheme],
    k: usize,
    search_config: &SearchConfig,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    if test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    search_config.validate()?;

    let predictions = par::map_indexed(exec, test.documents(), |i, doc| {
        let hits = search(index, doc.text(), search_config);
        let neighborhood = Neighborhood::new(doc.text(), hits)?;
        let doc_seed = derive_seed(seed, i as u64);
        schemes
            .iter()
            .map(|&scheme| vote(&neighborhood, stats, scheme, k, doc_seed))
            .collect::<Result<Vec<_>>>()
    });

    let mut tallies: Vec<Tally> = schemes.iter().map(|_| Tally::default()).collect();
    for (doc, per_scheme) in test.documents().iter().zip(predictions) {
        for (tally, prediction) in tallies.iter_mut().zip(per_scheme?) {
            tally.add(doc.labels(), &prediction, k);
        }
    }
    Ok(tallies
        .into_iter()
        .zip(schemes)
        .map(|(tally, &scheme)| tally.report(scheme, k))
        .collect())
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scheme {}  (k={}, n_test={}, abstained={}, match={})",
            self.scheme, self.k, self.n_test, self.n_abstained, self.match_rule
        )?;
        writeln!(f, "  top-1 accuracy   {:.4}", self.top1_accuracy)?;
        writeln!(f, "  top-{} hit rate   {:.4}", self.k, self.topk_hit_rate)?;
        writeln!(f, "  macro recall     {:.4}", self.macro_recall)?;
        let width = self
            .per_label
            .keys()
            .map(|l| l.as_str().chars().count())
            .max()
            .unwrap_or(0)
            .max(5);
        writeln!(f, "  {:<width$}  {:>9}  {:>7}  {:>7}", "label", "precision", "recall", "support")?;
        for (label, m) in &self.per_label {
            writeln!(
                f,
                "  {:<width$}  {:>9.4}  {:>7.4}  {:>7}",
                label.as_str(),
                m.precision,
                m.recall,
                m.support
            )?;
        }
        Ok(())
    }
}
