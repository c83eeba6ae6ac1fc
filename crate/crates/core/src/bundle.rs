//! Index files: a version line followed by the index and its label
//! statistics as JSON. The layout is tied to this crate version.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{label_stats, LabelStats};
use crate::error::{Error, Result};
use crate::index::Index;

/// First line of every index file.
pub const MAGIC: &str = "SEARCHVOTE-INDEX 1";

/// An index together with the label statistics of the corpus it was built
/// from, so boosted voting always sees matching priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexBundle {
    pub index: Index,
    pub stats: LabelStats,
}

impl IndexBundle {
    pub fn new(index: Index) -> Result<Self> {
        let stats = label_stats(index.corpus())?;
        Ok(Self { index, stats })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC}")?;
        serde_json::to_writer(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        if header.trim_end_matches(['\r', '\n']) != MAGIC {
            return Err(Error::InvalidIndexFile(format!(
                "expected header `{MAGIC}`, found {:?}",
                header.trim_end()
            )));
        }
        let bundle: IndexBundle = serde_json::from_reader(input)
            .map_err(|e| Error::InvalidIndexFile(e.to_string()))?;
        bundle.index.validate()?;
        if bundle.stats != label_stats(bundle.index.corpus())? {
            return Err(Error::InvalidIndexFile(
                "label statistics do not match the indexed corpus".into(),
            ));
        }
        Ok(bundle)
    }
}
