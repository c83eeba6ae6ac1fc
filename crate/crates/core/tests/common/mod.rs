#![allow(dead_code)]

use std::collections::BTreeMap;

use searchvote::{Label, LabelGeneratorSpec, MixingSpec};

pub fn label(s: &str) -> Label {
    Label::new(s).unwrap()
}

/// Ten labels with disjoint 50-token vocabularies, one label per document,
/// no background noise.
pub fn separable_spec() -> MixingSpec {
    let specs = (0..10)
        .map(|i| {
            LabelGeneratorSpec::uniform(
                label(&format!("label-{i:02}")),
                (0..50).map(|j| format!("l{i}w{j}")).collect(),
            )
        })
        .collect();
    MixingSpec {
        specs,
        shared_vocabulary: Vec::new(),
        noise_fraction: 0.0,
        tokens_per_label: 20,
        labels_per_document: vec![1.0],
        label_bias: BTreeMap::new(),
    }
}

pub const MAJORITY: &str = "majority";
pub const MINORITY: &str = "minority";

/// Two labels whose 50-token vocabularies share 30 tokens (60%), drawn 9:1.
pub fn confusable_spec() -> MixingSpec {
    let shared: Vec<String> = (0..30).map(|j| format!("common{j}")).collect();
    let vocab = |prefix: &str| {
        let mut v = shared.clone();
        v.extend((0..20).map(|j| format!("{prefix}{j}")));
        v
    };
    MixingSpec {
        specs: vec![
            LabelGeneratorSpec::uniform(label(MAJORITY), vocab("maj")),
            LabelGeneratorSpec::uniform(label(MINORITY), vocab("min")),
        ],
        shared_vocabulary: Vec::new(),
        noise_fraction: 0.0,
        tokens_per_label: 10,
        labels_per_document: vec![1.0],
        label_bias: [(label(MAJORITY), 9.0), (label(MINORITY), 1.0)].into_iter().collect(),
    }
}
