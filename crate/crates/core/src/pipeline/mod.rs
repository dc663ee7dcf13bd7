//! End-to-end run: every stage in order, outputs written under one
//! directory, and a manifest with content digests.

pub mod config;
pub mod models;
pub mod plots;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::balance::{balance_report, balance_report_json, node_balance_tsv, BalanceOptions};
use crate::community::{fit_dcsbm, fit_report_json, partition_tsv, BlockPartition, DcsbmOptions};
use crate::graph::Sign;
use crate::ideas::{
    diffusion_fractions, dyad_diffusion_tsv, first_usage, idea_mentions_tsv, idea_records_tsv, idea_uses, match_ideas,
};
use crate::ingest::{
    filter_self_links, load_corpus, load_country_year_covariates, load_dyad_covariates, load_ideas_master, load_texts,
    Corpus, CountryYearCovariates, DyadCovariates,
};
use crate::netbuild::{
    aggregate, aggregate_tsv, build_snapshot, edge_list, flips_tsv, graph_json, holm_filter, persistence,
    persistence_tsv, sign_flips, snapshot_tsv, SignedDigraphSnapshot,
};
use crate::netmetrics::{
    centrality_tsv, community_link_probability, community_probs_tsv, entropy_tsv, normalized_entropy, pagerank,
    snapshot_centrality, DEFAULT_TOL,
};
use crate::par::{self, Execution};
use crate::preference::{preference_matrix, scores_tsv, PreferenceOptions, PreferenceScore};
use crate::regress::{fit_json, multinomial_json, regression_table_tsv, TableColumn};
use crate::scimetrics::{
    country_year_metrics, country_year_metrics_tsv, dyad_metrics, dyad_metrics_tsv, publication_c5, topic_distance,
    topic_vector, MetricOptions, TopicLevel,
};
use crate::tsv::{fmt_f64, TsvWriter};
use crate::{Country, Error, Result};

pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Preference,
    Network,
    Metrics,
    Communities,
    Balance,
    Covariates,
    Ideas,
    Regress,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Ingest,
        Stage::Preference,
        Stage::Network,
        Stage::Metrics,
        Stage::Communities,
        Stage::Balance,
        Stage::Covariates,
        Stage::Ideas,
        Stage::Regress,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preference => "preference",
            Stage::Network => "network",
            Stage::Metrics => "metrics",
            Stage::Communities => "communities",
            Stage::Balance => "balance",
            Stage::Covariates => "covariates",
            Stage::Ideas => "ideas",
            Stage::Regress => "regress",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failure tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that remembers what was written.
pub struct Outputs {
    root: PathBuf,
    files: BTreeMap<String, (String, usize)>,
}

impl Outputs {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Outputs {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `rel` (forward-slash separated) under the root.
    pub fn write(&mut self, rel: &str, content: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.files
            .insert(rel.to_string(), (sha256_hex(content.as_bytes()), content.len()));
        Ok(())
    }

    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    path: &'a str,
    sha256: &'a str,
    bytes: usize,
}

#[derive(Serialize)]
struct ManifestInput {
    role: &'static str,
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    status: &'a str,
    failed_stage: Option<&'a str>,
    error: Option<String>,
    stages_completed: Vec<&'static str>,
    config_digest: String,
    settings: BTreeMap<&'a str, &'a str>,
    inputs: Vec<ManifestInput>,
    files: Vec<ManifestFile<'a>>,
}

fn input_list(cfg: &RunConfig) -> Vec<ManifestInput> {
    let roles: [(&'static str, &Option<PathBuf>); 6] = [
        ("publications", &cfg.publications),
        ("citations", &cfg.citations),
        ("covariates_cy", &cfg.covariates_cy),
        ("covariates_dyad", &cfg.covariates_dyad),
        ("ideas", &cfg.ideas),
        ("texts", &cfg.texts),
    ];
    roles
        .into_iter()
        .filter_map(|(role, p)| {
            let p = p.as_ref()?;
            let bytes = fs::read(p).ok()?;
            Some(ManifestInput {
                role,
                file: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

fn write_manifest(out: &mut Outputs, cfg: &RunConfig, completed: &[Stage], failure: Option<&StageError>) -> Result<()> {
    let canonical = cfg.canonical_settings();
    let settings: BTreeMap<&str, &str> = canonical
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .collect();
    let error = failure.map(|f| f.error.to_string());
    let doc = Manifest {
        tool: "citepref",
        version: env!("CARGO_PKG_VERSION"),
        status: if failure.is_some() { "partial" } else { "complete" },
        failed_stage: failure.map(|f| f.stage.name()),
        error,
        stages_completed: completed.iter().map(|s| s.name()).collect(),
        config_digest: cfg.digest(),
        settings,
        inputs: input_list(cfg),
        files: out
            .files
            .iter()
            .map(|(p, (h, n))| ManifestFile {
                path: p,
                sha256: h,
                bytes: *n,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    let path = out.root.join("manifest.json");
    fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

/// Prefixes every row of a TSV document with `year`, keeping one header.
fn with_year(year: i32, doc: &str, header: bool) -> String {
    let mut out = String::new();
    for (i, line) in doc.lines().enumerate() {
        if i == 0 {
            if header {
                out.push_str("year\t");
                out.push_str(line);
                out.push('\n');
            }
            continue;
        }
        out.push_str(&year.to_string());
        out.push('\t');
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn stack_by_year<T>(items: &[T], year: impl Fn(&T) -> i32, render: impl Fn(&T) -> String, empty_header: &str) -> String {
    if items.is_empty() {
        return format!("year\t{empty_header}\n");
    }
    items
        .iter()
        .enumerate()
        .map(|(i, it)| with_year(year(it), &render(it), i == 0))
        .collect()
}

/// What a run produced, for callers that want more than the files.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub years: Option<(i32, i32)>,
    pub stages: Vec<Stage>,
    pub aggregate_edges: BTreeMap<(Country, Country), i8>,
    pub files: Vec<String>,
}

struct Run<'c> {
    cfg: &'c RunConfig,
    exec: Execution,
    out: Outputs,
    corpus: Option<Corpus>,
    years: (i32, i32),
    scores: Vec<PreferenceScore>,
    self_scores: Vec<PreferenceScore>,
    snapshots: Vec<SignedDigraphSnapshot>,
    aggregate: crate::netbuild::AggregateNetwork,
    aggregate_centrality: BTreeMap<Country, f64>,
    cy_cov: CountryYearCovariates,
    dyad_cov: DyadCovariates,
    metrics: BTreeMap<(Country, i32), crate::scimetrics::CountryYearMetrics>,
    dyad_metrics: BTreeMap<(Country, Country, i32), crate::scimetrics::DyadMetrics>,
    field_distance: BTreeMap<(Country, Country), f64>,
    ideas: Option<IdeaState>,
}

struct IdeaState {
    records: Vec<crate::ideas::IdeaRecord>,
    uses: Vec<crate::ideas::IdeaUse>,
    diffusion: Vec<crate::ideas::DyadDiffusion>,
}

impl Run<'_> {
    fn corpus(&self) -> &Corpus {
        self.corpus.as_ref().expect("ingest ran")
    }

    fn run_stage(&mut self, stage: Stage) -> Result<()> {
        log::info!("stage {stage}");
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Preference => self.preference(),
            Stage::Network => self.network(),
            Stage::Metrics => self.metrics(),
            Stage::Communities => self.communities(),
            Stage::Balance => self.balance(),
            Stage::Covariates => self.covariates(),
            Stage::Ideas => self.ideas(),
            Stage::Regress => self.regress(),
            Stage::Report => self.report(),
        }
    }

    fn ingest(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let (p, c) = (cfg.publications.as_ref(), cfg.citations.as_ref());
        let (Some(p), Some(c)) = (p, c) else {
            return Err(Error::Config("publications and citations are required".into()));
        };
        let raw = load_corpus(p, c)?;
        let corpus = filter_self_links(&raw);
        let (lo, hi) = corpus
            .year_range()
            .ok_or_else(|| Error::Data("no publications left after dropping rows without a country".into()))?;
        self.years = cfg.years.unwrap_or((lo, hi));
        if let Some(path) = &cfg.covariates_cy {
            self.cy_cov = load_country_year_covariates(path)?;
        }
        if let Some(path) = &cfg.covariates_dyad {
            self.dyad_cov = load_dyad_covariates(path)?;
        }
        #[derive(Serialize)]
        struct IngestReport {
            publications: usize,
            citations_raw: usize,
            citations_kept: usize,
            countries: usize,
            year_min: i32,
            year_max: i32,
            analysis_years: [i32; 2],
            drops: crate::ingest::DropReport,
            corpus_digest: String,
            country_year_covariate_rows: usize,
            dyad_covariate_rows: usize,
        }
        let rep = IngestReport {
            publications: corpus.publications().len(),
            citations_raw: raw.citations().len(),
            citations_kept: corpus.citations().len(),
            countries: corpus.countries().len(),
            year_min: lo,
            year_max: hi,
            analysis_years: [self.years.0, self.years.1],
            drops: corpus.drop_report(),
            corpus_digest: corpus.digest(),
            country_year_covariate_rows: self.cy_cov.len(),
            dyad_covariate_rows: self.dyad_cov.len(),
        };
        let mut s = serde_json::to_string_pretty(&rep).expect("report serializes");
        s.push('\n');
        self.out.write("ingest/ingest_report.json", &s)?;
        self.corpus = Some(corpus);
        Ok(())
    }

    fn preference(&mut self) -> Result<()> {
        let opts = PreferenceOptions {
            min_cited: self.cfg.min_cited,
            window: self.cfg.window,
            exec: self.exec,
        };
        let years: Vec<i32> = (self.years.0..=self.years.1).collect();
        let corpus = self.corpus();
        let batches: Vec<_> = years.iter().map(|&y| preference_matrix(corpus, y, &opts)).collect();
        let mut skipped = TsvWriter::new(&["year", "source", "target", "n_target", "n_other", "reason"]);
        for b in &batches {
            for s in &b.skipped {
                skipped.row([
                    b.year.to_string(),
                    s.source.to_string(),
                    s.target.to_string(),
                    s.n_target.to_string(),
                    s.n_other.to_string(),
                    s.reason.clone(),
                ]);
            }
        }
        let mut scores = Vec::new();
        let mut own = Vec::new();
        for b in batches {
            scores.extend(holm_filter(b.international, self.cfg.alpha));
            own.extend(b.self_scores);
        }
        self.out.write("preference/preference_scores.tsv", &scores_tsv(&scores))?;
        self.out.write("preference/self_preference.tsv", &scores_tsv(&own))?;
        self.out.write("preference/skipped_pairs.tsv", &skipped.finish())?;
        self.scores = scores;
        self.self_scores = own;
        Ok(())
    }

    fn network(&mut self) -> Result<()> {
        let mut by_year: BTreeMap<i32, Vec<PreferenceScore>> = BTreeMap::new();
        for s in &self.scores {
            by_year.entry(s.year).or_default().push(s.clone());
        }
        self.snapshots = (self.years.0..=self.years.1)
            .map(|y| build_snapshot(by_year.get(&y).map_or(&[][..], Vec::as_slice), y))
            .collect();
        let mut adjusted = TsvWriter::new(&["year", "source", "target", "auc", "p_raw", "p_adjusted", "sign"]);
        for s in &self.scores {
            adjusted.row([
                s.year.to_string(),
                s.source.to_string(),
                s.target.to_string(),
                fmt_f64(s.auc),
                fmt_f64(s.p_raw),
                s.p_adjusted.map(fmt_f64).unwrap_or_else(|| "NA".into()),
                s.sign.to_string(),
            ]);
        }
        self.out.write("network/holm_scores.tsv", &adjusted.finish())?;
        let snaps = stack_by_year(&self.snapshots, |s| s.year, snapshot_tsv, "source\ttarget\tsign\tauc\tp_raw\tp_adjusted");
        self.out.write("network/snapshot_edges.tsv", &snaps)?;
        let mut counts = TsvWriter::new(&["year", "nodes", "positive", "negative"]);
        for s in &self.snapshots {
            counts.row([
                s.year.to_string(),
                s.nodes.len().to_string(),
                s.count_sign(Sign::Positive).to_string(),
                s.count_sign(Sign::Negative).to_string(),
            ]);
        }
        self.out.write("network/edge_counts.tsv", &counts.finish())?;
        self.aggregate = aggregate(&self.snapshots);
        let g = self.aggregate.to_graph();
        self.out.write("network/aggregate_network.tsv", &aggregate_tsv(&self.aggregate))?;
        self.out.write("network/aggregate_graph.json", &graph_json(&g))?;
        self.out.write("network/aggregate_edges.txt", &edge_list(&g))?;
        self.out.write("network/persistence.tsv", &persistence_tsv(&persistence(&self.snapshots)))?;
        self.out.write("network/sign_flips.tsv", &flips_tsv(&sign_flips(&self.snapshots)))?;
        Ok(())
    }

    fn metrics(&mut self) -> Result<()> {
        let mut entropy = Vec::new();
        let mut cents = Vec::new();
        for snap in &self.snapshots {
            let c = if snap.count_sign(Sign::Positive) == 0 {
                None
            } else {
                Some(snapshot_centrality(snap, self.cfg.damping)?)
            };
            let h = match &c {
                Some(c) if c.scores.len() >= 2 => {
                    Some(normalized_entropy(&c.scores.values().copied().collect::<Vec<_>>())?)
                }
                _ => None,
            };
            entropy.push((snap.year, h));
            if let Some(c) = c {
                cents.push(c);
            }
        }
        let doc = stack_by_year(&cents, |c| c.year, centrality_tsv, "country\tpagerank");
        self.out.write("metrics/centrality.tsv", &doc)?;
        self.out.write("metrics/entropy_timeseries.tsv", &entropy_tsv(&entropy))?;
        let g = self.aggregate.to_graph().sign_subgraph(Sign::Positive);
        if g.node_count() > 0 {
            let pr = pagerank(&g, self.cfg.damping, DEFAULT_TOL)?;
            self.aggregate_centrality = g.nodes().iter().cloned().zip(pr).collect();
        }
        let mut w = TsvWriter::new(&["country", "pagerank"]);
        for (c, v) in &self.aggregate_centrality {
            w.row([c.to_string(), fmt_f64(*v)]);
        }
        self.out.write("metrics/aggregate_centrality.tsv", &w.finish())?;
        Ok(())
    }

    fn communities(&mut self) -> Result<()> {
        let g = self.aggregate.to_graph().sign_subgraph(Sign::Positive);
        if g.edge_count() == 0 {
            log::warn!("aggregate positive network has no edges; community detection skipped");
            self.out.write("communities/partition.tsv", "node\tblock\n")?;
            self.out.write("communities/community_probs.tsv", &community_probs_tsv(&[]))?;
            return Ok(());
        }
        let hi = self.cfg.max_blocks.min(g.node_count()).max(1);
        let fit = fit_dcsbm(
            &g,
            1..=hi,
            &DcsbmOptions {
                restarts: self.cfg.restarts,
                seed: self.cfg.seed,
                exec: self.exec,
            },
        )?;
        self.out.write("communities/partition.tsv", &partition_tsv(&fit.partition))?;
        self.out.write("communities/dcsbm_fit.json", &fit_report_json(&fit))?;
        let mut stats = Vec::new();
        for snap in &self.snapshots {
            let labelled = restrict_to_partition(snap, &fit.partition);
            for sign in [Sign::Positive, Sign::Negative] {
                stats.push(community_link_probability(&labelled, &fit.partition, sign)?);
            }
        }
        self.out.write("communities/community_probs.tsv", &community_probs_tsv(&stats))?;
        Ok(())
    }

    fn balance(&mut self) -> Result<()> {
        let g = self.aggregate.to_graph();
        let rep = balance_report(
            &g,
            &BalanceOptions {
                kind: self.cfg.semicycles,
                ensemble: self.cfg.ensemble,
                swaps_per_edge: self.cfg.swaps_per_edge,
                seed: self.cfg.seed,
                exec: self.exec,
            },
        );
        self.out.write("balance/balance_report.json", &balance_report_json(&rep))?;
        self.out.write("balance/node_balance.tsv", &node_balance_tsv(&rep))?;
        Ok(())
    }

    fn covariates(&mut self) -> Result<()> {
        let corpus = self.corpus.as_ref().expect("ingest ran");
        let opts = MetricOptions {
            window: self.cfg.window,
            top_k: self.cfg.top_k,
            topic_level: self.cfg.topic_level,
        };
        let c5 = publication_c5(corpus, self.cfg.window);
        let years: Vec<i32> = (self.years.0..=self.years.1).collect();
        let per_year = par::map(self.exec, &years, |&y| {
            let m = country_year_metrics(corpus, &c5, y, &opts);
            let d = dyad_metrics(corpus, y, &m);
            (m, d)
        });
        let mut all_m = Vec::new();
        let mut all_d = Vec::new();
        for (m, d) in per_year {
            all_m.extend(m);
            all_d.extend(d);
        }
        self.out.write("covariates/country_year_metrics.tsv", &country_year_metrics_tsv(&all_m))?;
        self.out.write("covariates/dyad_metrics.tsv", &dyad_metrics_tsv(&all_d))?;
        let ry = self.years.1;
        let vectors: BTreeMap<Country, _> = corpus
            .countries()
            .into_iter()
            .map(|c| {
                let v = topic_vector(corpus, &c, ry, TopicLevel::Field);
                (c, v)
            })
            .filter(|(_, v)| !v.is_empty())
            .collect();
        for (a, va) in &vectors {
            for (b, vb) in &vectors {
                if a != b {
                    if let Ok(d) = topic_distance(va, vb) {
                        self.field_distance.insert((a.clone(), b.clone()), d);
                    }
                }
            }
        }
        self.metrics = all_m.into_iter().map(|m| ((m.country.clone(), m.year), m)).collect();
        self.dyad_metrics = all_d
            .into_iter()
            .map(|d| ((d.origin.clone(), d.destination.clone(), d.year), d))
            .collect();
        Ok(())
    }

    fn ideas(&mut self) -> Result<()> {
        let (Some(master), Some(texts)) = (&self.cfg.ideas, &self.cfg.texts) else {
            log::warn!("no idea master list or texts given; idea diffusion skipped");
            return Ok(());
        };
        let master = load_ideas_master(master)?;
        let texts = load_texts(texts)?;
        let corpus = self.corpus();
        let mentions = match_ideas(corpus, &texts, &master, self.exec)?;
        let uses = idea_uses(corpus, &mentions);
        let records = first_usage(&mentions.ideas, &uses, self.cfg.min_first_year);
        let diffusion = diffusion_fractions(&records, &uses, &corpus.countries());
        self.out.write("ideas/idea_mentions.tsv", &idea_mentions_tsv(&mentions.ideas, &uses))?;
        self.out.write("ideas/idea_records.tsv", &idea_records_tsv(&records))?;
        self.out.write("ideas/dyad_diffusion.tsv", &dyad_diffusion_tsv(&diffusion))?;
        self.ideas = Some(IdeaState {
            records,
            uses,
            diffusion,
        });
        Ok(())
    }

    fn regress(&mut self) -> Result<()> {
        let countries: BTreeSet<Country> = self
            .scores
            .iter()
            .flat_map(|s| [s.source.clone(), s.target.clone()])
            .collect();
        let self_pref: BTreeMap<(Country, i32), f64> = self
            .self_scores
            .iter()
            .map(|s| ((s.source.clone(), s.year), s.auc))
            .collect();
        let inputs = models::ModelInputs {
            years: self.years,
            reference_year: self.years.1,
            countries: &countries,
            aggregate: &self.aggregate,
            centrality: &self.aggregate_centrality,
            country_year: &self.cy_cov,
            dyad: &self.dyad_cov,
            metrics: &self.metrics,
            dyad_metrics: &self.dyad_metrics,
            field_distance: &self.field_distance,
            self_preference: &self_pref,
            ideas: self.ideas.as_ref().map(|s| models::IdeaInputs {
                records: &s.records,
                uses: &s.uses,
                diffusion: &s.diffusion,
            }),
            exec: self.exec,
        };
        let logit = models::idea_diffusion_models(&inputs);
        let mnl = models::edge_sign_models(&inputs);
        let panels = models::self_preference_models(&inputs);

        let mut status = TsvWriter::new(&["model", "status"]);
        let failure = |out: &mut Outputs, status: &mut TsvWriter, name: &str, e: &Error| -> Result<()> {
            log::warn!("model {name} not fitted: {e}");
            status.row([name, &format!("failed: {e}")]);
            out.write(&format!("regress/{name}.json"), &failure_json(name, e))
        };
        let mut cols = Vec::new();
        for m in &logit {
            match &m.fit {
                Ok(fit) => {
                    self.out.write(&format!("regress/{}.json", m.name), &fit_json(&m.name, fit))?;
                    status.row([m.name.as_str(), "ok"]);
                    cols.push(TableColumn::from_fit(m.name.clone(), fit));
                }
                Err(e) => failure(&mut self.out, &mut status, &m.name, e)?,
            }
        }
        if !logit.is_empty() {
            self.out.write("regress/idea_diffusion_table.tsv", &regression_table_tsv(&cols))?;
        }
        let mut cols = Vec::new();
        for m in &mnl {
            match &m.fit {
                Ok(fit) => {
                    self.out.write(&format!("regress/{}.json", m.name), &multinomial_json(&m.name, fit))?;
                    status.row([m.name.as_str(), "ok"]);
                    for mut c in TableColumn::from_multinomial(fit) {
                        c.label = format!("{}_{}", m.name, c.label);
                        cols.push(c);
                    }
                }
                Err(e) => failure(&mut self.out, &mut status, &m.name, e)?,
            }
        }
        self.out.write("regress/edge_sign_table.tsv", &regression_table_tsv(&cols))?;
        for (outcome, fits) in &panels {
            let mut cols = Vec::new();
            for m in fits {
                match &m.fit {
                    Ok(fit) => {
                        self.out.write(&format!("regress/{}.json", m.name), &fit_json(&m.name, fit))?;
                        status.row([m.name.as_str(), "ok"]);
                        cols.push(TableColumn::from_fit(m.name.clone(), fit));
                    }
                    Err(e) => failure(&mut self.out, &mut status, &m.name, e)?,
                }
            }
            self.out.write(&format!("regress/self_{outcome}_table.tsv"), &regression_table_tsv(&cols))?;
        }
        self.out.write("regress/model_status.tsv", &status.finish())?;
        Ok(())
    }

    fn report(&mut self) -> Result<()> {
        if self.cfg.plots {
            plots::emit_plots(&mut self.out)?;
        }
        Ok(())
    }
}

/// Drops countries the partition does not cover (those with no positive
/// edge in the aggregate) together with their edges.
fn restrict_to_partition(snap: &SignedDigraphSnapshot, partition: &BlockPartition) -> SignedDigraphSnapshot {
    let keep = |c: &Country| partition.block_of(c).is_some();
    let dropped = snap.nodes.iter().filter(|c| !keep(c)).count();
    if dropped > 0 {
        log::debug!("{}: {dropped} countries outside the partition", snap.year);
    }
    SignedDigraphSnapshot {
        year: snap.year,
        nodes: snap.nodes.iter().filter(|c| keep(c)).cloned().collect(),
        edges: snap
            .edges
            .iter()
            .filter(|((s, t), _)| keep(s) && keep(t))
            .map(|(k, e)| (k.clone(), *e))
            .collect(),
    }
}

fn failure_json(name: &str, e: &Error) -> String {
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "name": name, "error": e.to_string() }))
        .expect("json");
    s.push('\n');
    s
}

/// Runs every stage up to and including `until`, then writes the manifest.
/// On failure the manifest is still written, marked partial.
pub fn run_pipeline(cfg: &RunConfig, until: Stage) -> std::result::Result<RunSummary, StageError> {
    cfg.validate().map_err(|error| StageError {
        stage: Stage::Ingest,
        error,
    })?;
    par::with_threads(cfg.threads, || run_inner(cfg, until))
}

fn run_inner(cfg: &RunConfig, until: Stage) -> std::result::Result<RunSummary, StageError> {
    let out = Outputs::new(&cfg.out).map_err(|error| StageError {
        stage: Stage::Ingest,
        error,
    })?;
    let mut run = Run {
        cfg,
        exec: Execution::default(),
        out,
        corpus: None,
        years: (0, 0),
        scores: Vec::new(),
        self_scores: Vec::new(),
        snapshots: Vec::new(),
        aggregate: Default::default(),
        aggregate_centrality: BTreeMap::new(),
        cy_cov: Default::default(),
        dyad_cov: Default::default(),
        metrics: BTreeMap::new(),
        dyad_metrics: BTreeMap::new(),
        field_distance: BTreeMap::new(),
        ideas: None,
    };
    let mut done = Vec::new();
    for stage in Stage::ALL.into_iter().filter(|s| *s <= until) {
        if let Err(error) = run.run_stage(stage) {
            let err = StageError { stage, error };
            if let Err(e) = write_manifest(&mut run.out, cfg, &done, Some(&err)) {
                log::error!("could not write manifest: {e}");
            }
            return Err(err);
        }
        done.push(stage);
    }
    write_manifest(&mut run.out, cfg, &done, None).map_err(|error| StageError {
        stage: until,
        error,
    })?;
    Ok(RunSummary {
        years: run.corpus.as_ref().map(|_| run.years),
        stages: done,
        aggregate_edges: run
            .aggregate
            .edges
            .iter()
            .map(|(k, e)| (k.clone(), e.sign.as_i8()))
            .collect(),
        files: run.out.files().map(str::to_string).collect(),
    })
}
