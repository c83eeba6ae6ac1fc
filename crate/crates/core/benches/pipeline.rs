use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use searchvote::eval::evaluate_schemes;
use searchvote::generator::generate_corpus_with;
use searchvote::{
    build_index, label_stats, search, split_corpus, Execution, Label, LabelGeneratorSpec,
    MixingSpec, Scheme, SearchConfig, TokenizerConfig,
};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn overlapping_spec(n_labels: usize) -> MixingSpec {
    let shared: Vec<String> = (0..40).map(|j| format!("common{j}")).collect();
    let specs = (0..n_labels)
        .map(|i| {
            let mut vocab = shared.clone();
            vocab.extend((0..60).map(|j| format!("l{i}w{j}")));
            LabelGeneratorSpec::uniform(Label::new(format!("label-{i}")).unwrap(), vocab)
        })
        .collect();
    let label_bias: BTreeMap<Label, f64> = (0..n_labels)
        .map(|i| (Label::new(format!("label-{i}")).unwrap(), 1.0 + i as f64))
        .collect();
    MixingSpec {
        specs,
        shared_vocabulary: Vec::new(),
        noise_fraction: 0.0,
        tokens_per_label: 15,
        labels_per_document: vec![0.8, 0.2],
        label_bias,
    }
}

fn bench_generate(c: &mut Criterion) {
    let spec = overlapping_spec(8);
    let mut group = c.benchmark_group("generate_corpus");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 5000), &exec, |b, &exec| {
            b.iter(|| generate_corpus_with(exec, black_box(&spec), 5000, 1).unwrap())
        });
    }
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let spec = overlapping_spec(8);
    let corpus = generate_corpus_with(Execution::default(), &spec, 6000, 2).unwrap();
    let (train, test) = split_corpus(&corpus, 0.1, 2).unwrap();
    let index = build_index(&train, &TokenizerConfig::default()).unwrap();
    let stats = label_stats(&train).unwrap();
    let config = SearchConfig::default();

    let mut group = c.benchmark_group("evaluate_all_schemes");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, test.len()), &exec, |b, &exec| {
            b.iter(|| {
                evaluate_schemes(exec, &index, &stats, black_box(&test), &Scheme::ALL, 1, &config, 0)
                    .unwrap()
            })
        });
    }
    group.finish();

    let query = test.documents()[0].text();
    c.bench_function("search/single_query", |b| {
        b.iter(|| search(&index, black_box(query), &config))
    });
}

criterion_group!(benches, bench_generate, bench_evaluate);
criterion_main!(benches);
