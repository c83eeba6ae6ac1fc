//! Training-free multi-label text classification by searching a labeled
//! corpus and letting the nearest documents vote on labels.
//!
//! The pipeline is [`corpus`] → [`index`] → [`classifier`]; [`generator`]
//! builds synthetic corpora with known structure and [`eval`] measures how
//! well each voting scheme recovers the labels.
//!
//! ```
//! use searchvote::{build_index, classify, label_stats, Corpus, Document, Label, Scheme,
//!     SearchConfig, TokenizerConfig};
//!
//! let docs = vec![
//!     Document::new("1", "printer out of toner", [Label::new("hardware")?])?,
//!     Document::new("2", "cannot reach vpn gateway", [Label::new("network")?])?,
//! ];
//! let corpus = Corpus::new(docs)?;
//! let index = build_index(&corpus, &TokenizerConfig::default())?;
//! let stats = label_stats(&corpus)?;
//! let p = classify(&index, &stats, "vpn gateway timeout", Scheme::WeightedQuorum, 1,
//!     &SearchConfig::default(), 0)?;
//! assert_eq!(p.top().unwrap().as_str(), "network");
//! # Ok::<(), searchvote::Error>(())
//! ```

pub mod bundle;
pub mod classifier;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod generator;
pub mod index;
pub mod par;

pub use bundle::IndexBundle;
pub use classifier::{
    boosted_quorum, classify, naive_majority, plausible_labels, vote, weighted_quorum,
    Neighborhood, Prediction, RankedLabel, Scheme,
};
pub use corpus::{
    label_stats, load_corpus, split_corpus, write_jsonl, Corpus, CorpusFormat, Document, Label,
    LabelStats,
};
pub use error::{Error, Result};
pub use eval::{compare_schemes, evaluate, EvalReport, LabelMetrics};
pub use generator::{generate_corpus, generate_label_text, mix, LabelGeneratorSpec, MixingSpec};
pub use index::{
    brute_force_search, build_index, distance, search, tokenize, Index, SearchConfig, SearchHit,
    TokenizerConfig,
};
pub use par::Execution;
