//! Label voting over a search neighborhood.
//!
//! Every neighbor votes for each label it carries:
//!
//! * naive majority counts the votes,
//! * weighted quorum sums `1 - distance` over the voters,
//! * boosted quorum divides the weighted sum by the label's corpus prior.
//!
//! Labels with exactly equal scores are ordered by a seeded shuffle, so a
//! given seed always resolves ties the same way. The full ranking is fixed
//! before truncation to `k`, which makes every top-k a prefix of top-(k+1).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabelStats};
use crate::error::{Error, Result};
use crate::index::{search, Index, SearchConfig, SearchHit};

/// Seed used when callers don't pick one.
pub const DEFAULT_SEED: u64 = 0;

/// The retrieved neighbors of one query, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood<'a> {
    query_text: String,
    hits: Vec<SearchHit<'a>>,
}

impl<'a> Neighborhood<'a> {
    /// Requires every distance in `[0, 1]` and non-decreasing order.
    pub fn new(query_text: impl Into<String>, hits: Vec<SearchHit<'a>>) -> Result<Self> {
        if let Some(h) = hits.iter().find(|h| !(0.0..=1.0).contains(&h.distance)) {
            return Err(Error::InvalidNeighborhood(format!(
                "distance {} outside [0, 1]",
                h.distance
            )));
        }
        if hits.windows(2).any(|w| w[0].distance > w[1].distance) {
            return Err(Error::InvalidNeighborhood("hits are not sorted by distance".into()));
        }
        Ok(Self {
            query_text: query_text.into(),
            hits,
        })
    }

    pub fn query_text(&self) -> &str {
        &self.query_text
    }

    pub fn hits(&self) -> &[SearchHit<'a>] {
        &self.hits
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "naive")]
    NaiveMajority,
    #[serde(rename = "weighted")]
    WeightedQuorum,
    #[serde(rename = "boosted")]
    BoostedQuorum,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::NaiveMajority, Scheme::WeightedQuorum, Scheme::BoostedQuorum];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::NaiveMajority => "naive",
            Scheme::WeightedQuorum => "weighted",
            Scheme::BoostedQuorum => "boosted",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Scheme::NaiveMajority),
            "weighted" => Ok(Scheme::WeightedQuorum),
            "boosted" => Ok(Scheme::BoostedQuorum),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme `{other}` (expected naive, weighted or boosted)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLabel {
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scheme: Scheme,
    /// Set when the neighborhood was empty; `ranked` is then empty too.
    pub abstained: bool,
    pub ranked: Vec<RankedLabel>,
    /// Union of the neighbors' label sets.
    pub plausible: BTreeSet<Label>,
}

impl Prediction {
    pub fn top(&self) -> Option<&Label> {
        self.ranked.first().map(|r| &r.label)
    }
}

/// Union of the label sets of all hits.
pub fn plausible_labels(neighborhood: &Neighborhood<'_>) -> BTreeSet<Label> {
    neighborhood
        .hits
        .iter()
        .flat_map(|h| h.document.labels().iter().cloned())
        .collect()
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    Ok(())
}

/// Per-label sums of `weight(hit)` over the hits carrying the label, in hit order.
fn tally<F>(neighborhood: &Neighborhood<'_>, weight: F) -> BTreeMap<Label, f64>
where
    F: Fn(&SearchHit<'_>) -> f64,
{
    let mut scores: BTreeMap<Label, f64> = BTreeMap::new();
    for hit in &neighborhood.hits {
        let w = weight(hit);
        for label in hit.document.labels() {
            *scores.entry(label.clone()).or_insert(0.0) += w;
        }
    }
    scores
}

/// Sorts descending by score; runs of exactly equal scores are shuffled with
/// the seeded generator, then the list is cut to `k`.
fn rank(scores: BTreeMap<Label, f64>, k: usize, seed: u64) -> Vec<RankedLabel> {
    let mut ranked: Vec<RankedLabel> = scores
        .into_iter()
        .map(|(label, score)| RankedLabel { label, score })
        .collect();
    // stable: equal scores keep label order before the shuffle
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = 0;
    while start < ranked.len() {
        let score = ranked[start].score;
        let end = start + ranked[start..].iter().take_while(|r| r.score == score).count();
        if end - start > 1 {
            ranked[start..end].shuffle(&mut rng);
        }
        start = end;
    }
    ranked.truncate(k);
    ranked
}

fn predict(
    scheme: Scheme,
    neighborhood: &Neighborhood<'_>,
    scores: BTreeMap<Label, f64>,
    k: usize,
    seed: u64,
) -> Prediction {
    Prediction {
        scheme,
        abstained: neighborhood.is_empty(),
        ranked: rank(scores, k, seed),
        plausible: plausible_labels(neighborhood),
    }
}

/// Ranks labels by how many neighbors carry them. Distances are ignored.
pub fn naive_majority(neighborhood: &Neighborhood<'_>, k: usize, seed: u64) -> Result<Prediction> {
    check_k(k)?;
    let scores = tally(neighborhood, |_| 1.0);
    Ok(predict(Scheme::NaiveMajority, neighborhood, scores, k, seed))
}

/// Ranks labels by `W(label) = sum of (1 - distance)` over neighbors carrying it.
pub fn weighted_quorum(neighborhood: &Neighborhood<'_>, k: usize, seed: u64) -> Result<Prediction> {
    check_k(k)?;
    let scores = tally(neighborhood, |h| 1.0 - h.distance);
    Ok(predict(Scheme::WeightedQuorum, neighborhood, scores, k, seed))
}

/// Ranks labels by `W(label) / prior(label)`, lifting labels that are rare in
/// the corpus. Fails if a neighbor carries a label `stats` doesn't know, which
/// means the stats were built from a different corpus than the index.
pub fn boosted_quorum(
    neighborhood: &Neighborhood<'_>,
    stats: &LabelStats,
    k: usize,
    seed: u64,
) -> Result<Prediction> {
    check_k(k)?;
    let mut scores = tally(neighborhood, |h| 1.0 - h.distance);
    for (label, score) in scores.iter_mut() {
        let prior = stats
            .prior(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        *score /= prior;
    }
    Ok(predict(Scheme::BoostedQuorum, neighborhood, scores, k, seed))
}

/// Votes on an existing neighborhood with the chosen scheme.
pub fn vote(
    neighborhood: &Neighborhood<'_>,
    stats: &LabelStats,
    scheme: Scheme,
    k: usize,
    seed: u64,
) -> Result<Prediction> {
    match scheme {
        Scheme::NaiveMajority => naive_majority(neighborhood, k, seed),
        Scheme::WeightedQuorum => weighted_quorum(neighborhood, k, seed),
        Scheme::BoostedQuorum => boosted_quorum(neighborhood, stats, k, seed),
    }
}

/// Searches `index` for `query` and votes on the neighbors.
pub fn classify(
    index: &Index,
    stats: &LabelStats,
    query: &str,
    scheme: Scheme,
    k: usize,
    search_config: &SearchConfig,
    seed: u64,
) -> Result<Prediction> {
    search_config.validate()?;
    let neighborhood = Neighborhood::new(query, search(index, query, search_config))?;
    vote(&neighborhood, stats, scheme, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn label(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn docs(label_sets: &[&[&str]]) -> Vec<Document> {
        label_sets
            .iter()
            .enumerate()
            .map(|(i, ls)| Document::new(i.to_string(), "", ls.iter().map(|l| label(l))).unwrap())
            .collect()
    }

    fn hood<'a>(docs: &'a [Document], distances: &[f64]) -> Neighborhood<'a> {
        let hits = docs
            .iter()
            .zip(distances)
            .enumerate()
            .map(|(ordinal, (document, &distance))| SearchHit {
                ordinal,
                document,
                distance,
            })
            .collect();
        Neighborhood::new("q", hits).unwrap()
    }

    fn pairs(p: &Prediction) -> Vec<(&str, f64)> {
        p.ranked.iter().map(|r| (r.label.as_str(), r.score)).collect()
    }

    #[test]
    fn plausible_is_union() {
        let d = docs(&[&["A"], &["A", "B"], &["C"]]);
        let h = hood(&d, &[0.1, 0.2, 0.3]);
        assert_eq!(plausible_labels(&h), [label("A"), label("B"), label("C")].into());
        let d = docs(&[&["A"], &["A"]]);
        assert_eq!(plausible_labels(&hood(&d, &[0.0, 0.0])), [label("A")].into());
        assert!(plausible_labels(&hood(&[], &[])).is_empty());
    }

    #[test]
    fn naive_counts() {
        let d = docs(&[&["B"], &["A"], &["A"]]);
        let h = hood(&d, &[0.0, 0.1, 0.5]);
        assert_eq!(pairs(&naive_majority(&h, 1, 0).unwrap()), [("A", 2.0)]);
        assert_eq!(pairs(&naive_majority(&h, 2, 0).unwrap()), [("A", 2.0), ("B", 1.0)]);
    }

    #[test]
    fn naive_tie_is_seeded() {
        let d = docs(&[&["A"], &["B"]]);
        let h = hood(&d, &[0.0, 0.0]);
        let mut winners = BTreeSet::new();
        for seed in 0..64 {
            let first = naive_majority(&h, 1, seed).unwrap();
            assert_eq!(first, naive_majority(&h, 1, seed).unwrap());
            assert_eq!(first.ranked.len(), 1);
            winners.insert(first.ranked[0].label.clone());
        }
        // both outcomes occur across seeds
        assert_eq!(winners.len(), 2);
    }

    #[test]
    fn weighted_sums() {
        let d = docs(&[&["B"], &["A"], &["A"]]);
        let h = hood(&d, &[0.1, 0.2, 0.4]);
        let p = weighted_quorum(&h, 2, 0).unwrap();
        assert_eq!(p.ranked[0].label.as_str(), "A");
        assert!((p.ranked[0].score - 1.4).abs() < 1e-12);
        assert!((p.ranked[1].score - 0.9).abs() < 1e-12);
    }

    #[test]
    fn full_distance_contributes_nothing() {
        let d = docs(&[&["A"], &["B"]]);
        let h = hood(&d, &[0.5, 1.0]);
        let p = weighted_quorum(&h, 5, 0).unwrap();
        assert_eq!(pairs(&p), [("A", 0.5), ("B", 0.0)]);
    }

    #[test]
    fn boosted_flips_majority() {
        let stats = LabelStats::from_frequencies(
            10,
            [(label("A"), 8), (label("B"), 2)].into_iter().collect(),
        )
        .unwrap();
        let d = docs(&[&["A"], &["A"], &["B"]]);
        let h = hood(&d, &[0.2, 0.2, 0.2]);
        let w = weighted_quorum(&h, 2, 0).unwrap();
        let b = boosted_quorum(&h, &stats, 2, 0).unwrap();
        assert_eq!(w.top().unwrap().as_str(), "A");
        assert_eq!(b.top().unwrap().as_str(), "B");
        assert!((b.ranked[0].score - 4.0).abs() < 1e-12);
        assert!((b.ranked[1].score - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boosted_unknown_label() {
        let stats =
            LabelStats::from_frequencies(1, [(label("A"), 1)].into_iter().collect()).unwrap();
        let d = docs(&[&["Z"]]);
        match boosted_quorum(&hood(&d, &[0.1]), &stats, 1, 0) {
            Err(Error::UnknownLabel(l)) => assert_eq!(l.as_str(), "Z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_neighborhood_abstains() {
        let h = hood(&[], &[]);
        for p in [naive_majority(&h, 3, 0).unwrap(), weighted_quorum(&h, 3, 0).unwrap()] {
            assert!(p.abstained);
            assert!(p.ranked.is_empty());
            assert!(p.plausible.is_empty());
        }
    }

    #[test]
    fn k_zero_rejected_and_large_k_returns_all() {
        let d = docs(&[&["A", "B"]]);
        let h = hood(&d, &[0.0]);
        assert!(naive_majority(&h, 0, 0).is_err());
        assert_eq!(naive_majority(&h, 10, 0).unwrap().ranked.len(), 2);
    }

    #[test]
    fn neighborhood_validation() {
        let d = docs(&[&["A"], &["B"]]);
        let hit = |i: usize, distance| SearchHit { ordinal: i, document: &d[i], distance };
        assert!(Neighborhood::new("q", vec![hit(0, 0.5), hit(1, 0.1)]).is_err());
        assert!(Neighborhood::new("q", vec![hit(0, 1.5)]).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("majority".parse::<Scheme>().is_err());
    }

    #[test]
    fn prediction_json_shape() {
        let d = docs(&[&["A"]]);
        let p = naive_majority(&hood(&d, &[0.0]), 1, 0).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"scheme":"naive","abstained":false,"ranked":[{"label":"A","score":1.0}],"plausible":["A"]}"#
        );
    }
}
