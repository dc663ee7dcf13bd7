use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use citepref::balance::{planted_balanced_graph, randomize_signed};
use citepref::community::{fit_dcsbm, planted_digraph, DcsbmOptions};
use citepref::ideas::match_ideas;
use citepref::ingest::{filter_self_links, load_corpus, load_ideas_master, load_texts};
use citepref::preference::{preference_matrix, PreferenceOptions};
use citepref::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn corpus_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic"))
}

fn preference(c: &mut Criterion) {
    let dir = corpus_dir();
    let corpus = filter_self_links(&load_corpus(&dir.join("publications.tsv"), &dir.join("citations.tsv")).unwrap());
    let mut g = c.benchmark_group("preference_matrix");
    for (name, exec) in MODES {
        let opts = PreferenceOptions {
            min_cited: 20,
            window: 5,
            exec,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| (2003..=2017).map(|y| preference_matrix(&corpus, y, &opts).international.len()).sum::<usize>())
        });
    }
    g.finish();
}

fn ideas(c: &mut Criterion) {
    let dir = corpus_dir();
    let corpus = load_corpus(&dir.join("publications.tsv"), &dir.join("citations.tsv")).unwrap();
    let texts = load_texts(&dir.join("texts.tsv")).unwrap();
    let master = load_ideas_master(&dir.join("ideas_master.txt")).unwrap();
    let mut g = c.benchmark_group("idea_matching");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| match_ideas(&corpus, &texts, &master, exec).unwrap().total())
        });
    }
    g.finish();
}

fn balance_ensemble(c: &mut Criterion) {
    let graph = planted_balanced_graph(80, 0.1, &mut ChaCha8Rng::seed_from_u64(1));
    let mut g = c.benchmark_group("signed_ensemble");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| randomize_signed(black_box(&graph), 64, 20, 7, exec).len())
        });
    }
    g.finish();
}

fn dcsbm_restarts(c: &mut Criterion) {
    let blocks: Vec<usize> = (0..60).map(|i| i % 3).collect();
    let graph = planted_digraph(&blocks, 0.3, 0.03, &mut ChaCha8Rng::seed_from_u64(2));
    let mut g = c.benchmark_group("dcsbm_restarts");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = DcsbmOptions {
            restarts: 8,
            seed: 3,
            exec,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| fit_dcsbm(black_box(&graph), 1..=5, &opts).unwrap().partition.blocks)
        });
    }
    g.finish();
}

criterion_group!(benches, preference, ideas, balance_ensemble, dcsbm_restarts);
criterion_main!(benches);
