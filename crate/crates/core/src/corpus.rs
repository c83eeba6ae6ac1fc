//! Labeled documents, corpus ingestion, and per-label population statistics.
//!
//! A [`Corpus`] is the historical record a query is classified against: every
//! [`Document`] carries free text and a non-empty set of [`Label`]s.
//! [`LabelStats`] summarizes how often each label occurs and is what the
//! boosted voting scheme divides by.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An opaque, case-sensitive label name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains('\n') || name.contains('\r') {
            return Err(Error::InvalidLabel(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Label {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Label::new(value)
    }
}

impl From<Label> for String {
    fn from(label: Label) -> Self {
        label.0
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A labeled text unit from the historical corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument")]
pub struct Document {
    id: String,
    text: String,
    labels: BTreeSet<Label>,
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    text: String,
    labels: Vec<Label>,
}

impl TryFrom<RawDocument> for Document {
    type Error = Error;

    fn try_from(raw: RawDocument) -> Result<Self> {
        Document::new(raw.id, raw.text, raw.labels)
    }
}

impl Document {
    /// Builds a document, rejecting an empty or repeated label list.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        labels: impl IntoIterator<Item = Label>,
    ) -> Result<Self> {
        let id = id.into();
        let mut set = BTreeSet::new();
        for label in labels {
            if let Some(dup) = set.replace(label) {
                return Err(Error::InvalidDocument {
                    id,
                    message: format!("label `{dup}` listed more than once"),
                });
            }
        }
        if set.is_empty() {
            return Err(Error::InvalidDocument {
                id,
                message: "label set is empty".into(),
            });
        }
        Ok(Self {
            id,
            text: text.into(),
            labels: set,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn has_label(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Document>", into = "Vec<Document>")]
pub struct Corpus {
    documents: Vec<Document>,
    label_vocabulary: BTreeSet<Label>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        let label_vocabulary = documents
            .iter()
            .flat_map(|d| d.labels.iter().cloned())
            .collect();
        Ok(Self {
            documents,
            label_vocabulary,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn label_vocabulary(&self) -> &BTreeSet<Label> {
        &self.label_vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

impl TryFrom<Vec<Document>> for Corpus {
    type Error = Error;

    fn try_from(documents: Vec<Document>) -> Result<Self> {
        Corpus::new(documents)
    }
}

impl From<Corpus> for Vec<Document> {
    fn from(corpus: Corpus) -> Self {
        corpus.documents
    }
}

/// On-disk corpus encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One JSON object per line: `{"id": .., "text": .., "labels": [..]}`.
    #[default]
    Jsonl,
    /// Header `id,text,labels`, labels separated by `|`.
    Csv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jsonl => "jsonl",
            Self::Csv => "csv",
        })
    }
}

/// Reads a corpus, preserving source order. Any malformed record aborts the
/// load with the offending line number.
pub fn load_corpus<R: BufRead>(source: R, format: CorpusFormat) -> Result<Corpus> {
    let documents = match format {
        CorpusFormat::Jsonl => read_jsonl(source)?,
        CorpusFormat::Csv => read_csv(source)?,
    };
    Corpus::new(documents)
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    text: Option<String>,
    labels: Option<Vec<String>>,
}

fn read_jsonl<R: BufRead>(source: R) -> Result<Vec<Document>> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            line: line_no,
            message,
        };
        let record: JsonRecord =
            serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let id = record.id.ok_or_else(|| malformed("missing `id`".into()))?;
        let text = record
            .text
            .ok_or_else(|| malformed("missing `text`".into()))?;
        let labels = record
            .labels
            .ok_or_else(|| malformed("missing `labels`".into()))?;
        documents.push(build_record(line_no, &mut seen, id, text, labels)?);
    }
    Ok(documents)
}

fn read_csv<R: BufRead>(source: R) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| csv_error(1, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Malformed {
                line: 1,
                message: format!("header is missing the `{name}` column"),
            })
    };
    let (id_col, text_col, labels_col) = (column("id")?, column("text")?, column("labels")?);

    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            csv_error(line, e)
        })?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |col: usize, name: &str| {
            record.get(col).ok_or_else(|| Error::Malformed {
                line: line_no,
                message: format!("missing `{name}`"),
            })
        };
        let id = field(id_col, "id")?.to_string();
        let text = field(text_col, "text")?.to_string();
        let labels = field(labels_col, "labels")?;
        let labels = if labels.is_empty() {
            Vec::new()
        } else {
            labels.split('|').map(str::to_string).collect()
        };
        documents.push(build_record(line_no, &mut seen, id, text, labels)?);
    }
    Ok(documents)
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    Error::Malformed {
        line,
        message: e.to_string(),
    }
}

fn build_record(
    line: usize,
    seen: &mut HashSet<String>,
    id: String,
    text: String,
    labels: Vec<String>,
) -> Result<Document> {
    let malformed = |message: String| Error::Malformed { line, message };
    if labels.is_empty() {
        return Err(malformed("`labels` must contain at least one label".into()));
    }
    let labels = labels
        .into_iter()
        .map(Label::new)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| malformed(e.to_string()))?;
    if !seen.insert(id.clone()) {
        return Err(malformed(format!("duplicate document id `{id}`")));
    }
    Document::new(id, text, labels).map_err(|e| malformed(e.to_string()))
}

/// Writes the corpus as JSON lines, one document per line.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for doc in corpus.documents() {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Per-label document frequencies and the priors derived from them.
///
/// `priors[k] = frequencies[k] / n_documents`. Documents carrying several
/// labels count once towards each, so the priors can sum to more than one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    n_documents: usize,
    frequencies: BTreeMap<Label, usize>,
    priors: BTreeMap<Label, f64>,
}

impl LabelStats {
    /// Builds stats from raw counts. Every frequency must lie in `1..=n_documents`.
    pub fn from_frequencies(
        n_documents: usize,
        frequencies: BTreeMap<Label, usize>,
    ) -> Result<Self> {
        if n_documents == 0 {
            return Err(Error::EmptyCorpus);
        }
        for (label, &f) in &frequencies {
            if f == 0 || f > n_documents {
                return Err(Error::InvalidConfig(format!(
                    "frequency {f} of label `{label}` is outside 1..={n_documents}"
                )));
            }
        }
        let priors = frequencies
            .iter()
            .map(|(label, &f)| (label.clone(), f as f64 / n_documents as f64))
            .collect();
        Ok(Self {
            n_documents,
            frequencies,
            priors,
        })
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn frequencies(&self) -> &BTreeMap<Label, usize> {
        &self.frequencies
    }

    pub fn priors(&self) -> &BTreeMap<Label, f64> {
        &self.priors
    }

    pub fn frequency(&self, label: &Label) -> Option<usize> {
        self.frequencies.get(label).copied()
    }

    pub fn prior(&self, label: &Label) -> Option<f64> {
        self.priors.get(label).copied()
    }
}

/// Counts, for every label, the number of documents that carry it.
pub fn label_stats(corpus: &Corpus) -> Result<LabelStats> {
    let mut frequencies = BTreeMap::new();
    for doc in corpus.documents() {
        for label in doc.labels() {
            *frequencies.entry(label.clone()).or_insert(0usize) += 1;
        }
    }
    LabelStats::from_frequencies(corpus.len(), frequencies)
}

/// Seeded, disjoint train/test partition. Both halves keep source order.
///
/// The test side holds `round(test_fraction * n)` documents, clamped so
/// neither side is empty.
pub fn split_corpus(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::CorpusTooSmall(n));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction {test_fraction} must lie strictly between 0 and 1"
        )));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_test = vec![false; n];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }

    let (mut train, mut test) = (Vec::with_capacity(n - n_test), Vec::with_capacity(n_test));
    for (doc, in_test) in corpus.documents().iter().zip(is_test) {
        if in_test {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    Ok((Corpus::new(train)?, Corpus::new(test)?))
}
