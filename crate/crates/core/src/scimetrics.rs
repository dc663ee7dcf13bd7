//! Bibliometric covariates per country-year and per dyad-year.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::country::Country;
use crate::error::{Error, Result};
use crate::ingest::{total_windowed_citations, Corpus};
use crate::tsv::{fmt_opt, TsvWriter};

pub const DEFAULT_TOP_K: usize = 50;

/// Which publication labels make up a topic vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicLevel {
    /// The fine-grained `concept_ids` column.
    #[default]
    Concept,
    /// The coarse `field_id` column.
    Field,
}

#[derive(Debug, Clone, Copy)]
pub struct MetricOptions {
    pub window: i32,
    pub top_k: usize,
    pub topic_level: TopicLevel,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            window: crate::ingest::DEFAULT_WINDOW,
            top_k: DEFAULT_TOP_K,
            topic_level: TopicLevel::Concept,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryYearMetrics {
    pub country: Country,
    pub year: i32,
    pub n_publications: usize,
    pub frac_national_authors: Option<f64>,
    pub top_journal_fraction: Option<f64>,
    pub topic_vector: BTreeMap<String, f64>,
    pub diversity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadMetrics {
    pub origin: Country,
    pub destination: Country,
    pub year: i32,
    pub collaboration_strength: u64,
    pub collaboration_cosine: Option<f64>,
    pub topic_distance: Option<f64>,
}

fn ordered(a: &Country, b: &Country) -> (Country, Country) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Co-authorship counts for unordered country pairs (keys have `a < b`):
/// every publication adds one to each pair of its byline countries.
pub fn collaboration_strength(corpus: &Corpus, year: i32) -> BTreeMap<(Country, Country), u64> {
    let mut out = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        let cs: Vec<&Country> = corpus.publication(p).countries.iter().collect();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                *out.entry((cs[i].clone(), cs[j].clone())).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Total cross-country collaboration count of each country.
pub fn collaboration_totals(counts: &BTreeMap<(Country, Country), u64>) -> BTreeMap<Country, u64> {
    let mut t = BTreeMap::new();
    for ((a, b), &n) in counts {
        *t.entry(a.clone()).or_insert(0) += n;
        *t.entry(b.clone()).or_insert(0) += n;
    }
    t
}

/// `C(a,b) / sqrt(C(a,.) C(b,.))`; `None` when either total is zero.
pub fn collaboration_cosine(
    counts: &BTreeMap<(Country, Country), u64>,
    totals: &BTreeMap<Country, u64>,
    a: &Country,
    b: &Country,
) -> Option<f64> {
    let ta = *totals.get(a)?;
    let tb = *totals.get(b)?;
    let c = counts.get(&ordered(a, b)).copied().unwrap_or(0);
    (ta > 0 && tb > 0).then(|| c as f64 / ((ta as f64) * (tb as f64)).sqrt())
}

/// Windowed citation total of every publication.
pub fn publication_c5(corpus: &Corpus, window: i32) -> Vec<u32> {
    (0..corpus.publications().len())
        .map(|i| total_windowed_citations(corpus, i, window))
        .collect()
}

/// Top `k` venues of each field in `year`, ranked by mean `ln(1 + c5)` of
/// their publications; ties go to the smaller venue id.
pub fn top_journal_sets(corpus: &Corpus, c5: &[u32], year: i32, k: usize) -> BTreeMap<String, BTreeSet<String>> {
    let mut acc: BTreeMap<&str, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        let rec = corpus.publication(p);
        let e = acc
            .entry(rec.field_id.as_str())
            .or_default()
            .entry(rec.venue_id.as_str())
            .or_insert((0.0, 0));
        e.0 += (1.0 + c5[p] as f64).ln();
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(field, venues)| {
            if venues.len() < k {
                log::warn!("field {field} in {year} has {} venues (< {k}); all qualify", venues.len());
            }
            let mut ranked: Vec<(&str, f64)> = venues.into_iter().map(|(v, (s, n))| (v, s / n as f64)).collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
            (field.to_string(), ranked.into_iter().take(k).map(|(v, _)| v.to_string()).collect())
        })
        .collect()
}

pub fn top_journal_set(corpus: &Corpus, c5: &[u32], field: &str, year: i32, k: usize) -> BTreeSet<String> {
    top_journal_sets(corpus, c5, year, k).remove(field).unwrap_or_default()
}

fn in_top(corpus: &Corpus, sets: &BTreeMap<String, BTreeSet<String>>, p: usize) -> bool {
    let r = corpus.publication(p);
    sets.get(&r.field_id).is_some_and(|s| s.contains(&r.venue_id))
}

/// Country's share of publications in top venues divided by the global share;
/// `None` for a country without publications or a year without top venues.
pub fn top_journal_fraction(
    corpus: &Corpus,
    sets: &BTreeMap<String, BTreeSet<String>>,
    country: &Country,
    year: i32,
) -> Option<f64> {
    let pubs = corpus.publications_in(year);
    let global_top = pubs.iter().filter(|&&p| in_top(corpus, sets, p)).count();
    let mine: Vec<usize> = pubs
        .iter()
        .copied()
        .filter(|&p| corpus.publication(p).countries.contains(country))
        .collect();
    if mine.is_empty() || global_top == 0 {
        return None;
    }
    let own = mine.iter().filter(|&&p| in_top(corpus, sets, p)).count() as f64 / mine.len() as f64;
    Some(own / (global_top as f64 / pubs.len() as f64))
}

/// Normalized label frequencies over a country's publications in `year`,
/// each publication crediting every one of its labels in full.
pub fn topic_vector(corpus: &Corpus, country: &Country, year: i32, level: TopicLevel) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        let r = corpus.publication(p);
        if !r.countries.contains(country) {
            continue;
        }
        match level {
            TopicLevel::Concept => {
                for c in &r.concept_ids {
                    *counts.entry(c.clone()).or_default() += 1.0;
                }
            }
            TopicLevel::Field => *counts.entry(r.field_id.clone()).or_default() += 1.0,
        }
    }
    let total: f64 = counts.values().sum();
    counts.values_mut().for_each(|v| *v /= total);
    counts
}

/// Simpson diversity `1 - sum p_i^2`.
pub fn simpson_diversity(v: &BTreeMap<String, f64>) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Undefined("diversity of an empty topic vector".into()));
    }
    let total: f64 = v.values().sum();
    Ok(1.0 - v.values().map(|x| (x / total).powi(2)).sum::<f64>())
}

/// Cosine distance `1 - cos(v1, v2)`, clamped to `[0, 1]`.
pub fn topic_distance(v1: &BTreeMap<String, f64>, v2: &BTreeMap<String, f64>) -> Result<f64> {
    if v1.is_empty() || v2.is_empty() {
        return Err(Error::Undefined("distance involving an empty topic vector".into()));
    }
    let dot: f64 = v1.iter().filter_map(|(k, a)| v2.get(k).map(|b| a * b)).sum();
    let n1 = v1.values().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = v2.values().map(|x| x * x).sum::<f64>().sqrt();
    Ok((1.0 - dot / (n1 * n2)).clamp(0.0, 1.0))
}

/// Metrics for every country with at least one publication in `year`.
pub fn country_year_metrics(corpus: &Corpus, c5: &[u32], year: i32, opts: &MetricOptions) -> Vec<CountryYearMetrics> {
    let sets = top_journal_sets(corpus, c5, year, opts.top_k);
    let mut by_country: BTreeMap<&Country, (usize, usize)> = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        let cs = &corpus.publication(p).countries;
        for c in cs {
            let e = by_country.entry(c).or_default();
            e.0 += 1;
            if cs.len() == 1 {
                e.1 += 1;
            }
        }
    }
    by_country
        .into_iter()
        .map(|(c, (n, national))| {
            let tv = topic_vector(corpus, c, year, opts.topic_level);
            CountryYearMetrics {
                country: c.clone(),
                year,
                n_publications: n,
                frac_national_authors: Some(national as f64 / n as f64),
                top_journal_fraction: top_journal_fraction(corpus, &sets, c, year),
                diversity: simpson_diversity(&tv).ok(),
                topic_vector: tv,
            }
        })
        .collect()
}

/// Metrics for every ordered pair of distinct countries active in `year`.
pub fn dyad_metrics(corpus: &Corpus, year: i32, metrics: &[CountryYearMetrics]) -> Vec<DyadMetrics> {
    let counts = collaboration_strength(corpus, year);
    let totals = collaboration_totals(&counts);
    let mut out = Vec::new();
    for a in metrics {
        for b in metrics {
            if a.country == b.country {
                continue;
            }
            out.push(DyadMetrics {
                origin: a.country.clone(),
                destination: b.country.clone(),
                year,
                collaboration_strength: counts.get(&ordered(&a.country, &b.country)).copied().unwrap_or(0),
                collaboration_cosine: collaboration_cosine(&counts, &totals, &a.country, &b.country),
                topic_distance: topic_distance(&a.topic_vector, &b.topic_vector).ok(),
            });
        }
    }
    out
}

pub const COUNTRY_YEAR_METRICS_HEADER: [&str; 7] = [
    "country",
    "year",
    "n_publications",
    "frac_national_authors",
    "top_journal_fraction",
    "diversity",
    "n_topics",
];

pub fn country_year_metrics_tsv(rows: &[CountryYearMetrics]) -> String {
    let mut w = TsvWriter::new(&COUNTRY_YEAR_METRICS_HEADER);
    for r in rows {
        w.row([
            r.country.to_string(),
            r.year.to_string(),
            r.n_publications.to_string(),
            fmt_opt(r.frac_national_authors),
            fmt_opt(r.top_journal_fraction),
            fmt_opt(r.diversity),
            r.topic_vector.len().to_string(),
        ]);
    }
    w.finish()
}

pub fn dyad_metrics_tsv(rows: &[DyadMetrics]) -> String {
    let mut w = TsvWriter::new(&[
        "origin",
        "destination",
        "year",
        "collaboration_strength",
        "collaboration_cosine",
        "topic_distance",
    ]);
    for r in rows {
        w.row([
            r.origin.to_string(),
            r.destination.to_string(),
            r.year.to_string(),
            r.collaboration_strength.to_string(),
            fmt_opt(r.collaboration_cosine),
            fmt_opt(r.topic_distance),
        ]);
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PublicationRecord;
    use proptest::prelude::*;

    fn record(id: &str, year: i32, venue: &str, field: &str, concepts: &[&str], countries: &[&str]) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            year,
            venue_id: venue.into(),
            field_id: field.into(),
            concept_ids: concepts.iter().map(|s| s.to_string()).collect(),
            countries: countries.iter().map(|c| Country::new(*c)).collect(),
            author_ids: [format!("a-{id}")].into(),
            affiliation_ids: [format!("f-{id}")].into(),
        }
    }

    fn corpus(records: Vec<PublicationRecord>, cites: &[(usize, usize)]) -> Corpus {
        let ids: Vec<String> = records.iter().map(|r| r.pub_id.clone()).collect();
        let links: Vec<(String, String)> = cites.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone())).collect();
        Corpus::from_records(records, links).unwrap()
    }

    #[test]
    fn collaboration_counts_by_hand() {
        let c = corpus(
            vec![
                record("p1", 2010, "v", "f", &["x"], &["HU", "US", "CA"]),
                record("p2", 2010, "v", "f", &["x"], &["US"]),
                record("p3", 2010, "v", "f", &["x"], &["US", "CA"]),
            ],
            &[],
        );
        let m = collaboration_strength(&c, 2010);
        let get = |a: &str, b: &str| m.get(&ordered(&Country::new(a), &Country::new(b))).copied().unwrap_or(0);
        assert_eq!(get("HU", "US"), 1);
        assert_eq!(get("HU", "CA"), 1);
        assert_eq!(get("US", "CA"), 2);
        assert_eq!(m.len(), 3);
        let t = collaboration_totals(&m);
        let cos = collaboration_cosine(&m, &t, &Country::new("US"), &Country::new("CA")).unwrap();
        assert!((cos - 2.0 / (3.0f64 * 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn top_journals_and_normalized_fraction() {
        // Venue A: two papers cited 10 times each; venue B: two papers cited once.
        let mut recs = vec![
            record("a1", 2010, "A", "f", &["x"], &["XX"]),
            record("a2", 2010, "A", "f", &["x"], &["XX"]),
            record("b1", 2010, "B", "f", &["x"], &["YY"]),
            record("b2", 2010, "B", "f", &["x"], &["YY"]),
        ];
        let mut cites = Vec::new();
        for target in 0..4 {
            let n = if target < 2 { 10 } else { 1 };
            for _ in 0..n {
                let idx = recs.len();
                recs.push(record(&format!("c{idx}"), 2011, "C", "g", &["y"], &["ZZ"]));
                cites.push((idx, target));
            }
        }
        let c = corpus(recs, &cites);
        let c5 = publication_c5(&c, 5);
        assert_eq!(top_journal_set(&c, &c5, "f", 2010, 1), BTreeSet::from(["A".to_string()]));
        let sets = top_journal_sets(&c, &c5, 2010, 1);
        assert_eq!(top_journal_fraction(&c, &sets, &Country::new("XX"), 2010), Some(2.0));
        assert_eq!(top_journal_fraction(&c, &sets, &Country::new("YY"), 2010), Some(0.0));
        assert_eq!(top_journal_fraction(&c, &sets, &Country::new("QQ"), 2010), None);
        assert_eq!(top_journal_set(&c, &c5, "f", 2010, 50).len(), 2);
    }

    #[test]
    fn diversity_and_distance_examples() {
        let one: BTreeMap<String, f64> = [("a".to_string(), 1.0)].into();
        assert_eq!(simpson_diversity(&one).unwrap(), 0.0);
        let uni: BTreeMap<String, f64> = (0..4).map(|i| (i.to_string(), 0.25)).collect();
        assert!((simpson_diversity(&uni).unwrap() - 0.75).abs() < 1e-15);
        assert!(topic_distance(&uni, &uni).unwrap().abs() < 1e-15);
        let other: BTreeMap<String, f64> = [("z".to_string(), 1.0)].into();
        assert_eq!(topic_distance(&one, &other).unwrap(), 1.0);
        assert!(simpson_diversity(&BTreeMap::new()).is_err());
    }

    #[test]
    fn country_year_rows() {
        let c = corpus(
            vec![
                record("p1", 2010, "v", "f", &["x", "y"], &["HU", "US"]),
                record("p2", 2010, "v", "f", &["x"], &["US"]),
            ],
            &[],
        );
        let c5 = publication_c5(&c, 5);
        let rows = country_year_metrics(&c, &c5, 2010, &MetricOptions::default());
        let us = rows.iter().find(|r| r.country.as_str() == "US").unwrap();
        assert_eq!(us.n_publications, 2);
        assert_eq!(us.frac_national_authors, Some(0.5));
        assert!((us.topic_vector["x"] - 2.0 / 3.0).abs() < 1e-15);
        let dy = dyad_metrics(&c, 2010, &rows);
        assert_eq!(dy.len(), 2);
        assert!(dy.iter().all(|d| d.collaboration_strength == 1));
    }

    fn arb_vec() -> impl Strategy<Value = BTreeMap<String, f64>> {
        prop::collection::btree_map("[a-e]", 0.01f64..1.0, 1..5)
    }

    proptest! {
        #[test]
        fn distance_symmetric_bounded(a in arb_vec(), b in arb_vec(), k in 0.1f64..10.0) {
            let d = topic_distance(&a, &b).unwrap();
            prop_assert!((d - topic_distance(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&d));
            let scaled: BTreeMap<String, f64> = a.iter().map(|(x, v)| (x.clone(), v * k)).collect();
            prop_assert!(topic_distance(&a, &scaled).unwrap() < 1e-12);
            let div = simpson_diversity(&a).unwrap();
            prop_assert!((0.0..1.0).contains(&div));
        }

        #[test]
        fn collaboration_matches_brute_force(bylines in prop::collection::vec(prop::collection::btree_set("[A-E]", 1..5), 1..12)) {
            let recs: Vec<PublicationRecord> = bylines.iter().enumerate().map(|(i, b)| {
                let cs: Vec<&str> = b.iter().map(String::as_str).collect();
                record(&format!("p{i}"), 2000, "v", "f", &["x"], &cs)
            }).collect();
            let c = corpus(recs, &[]);
            let m = collaboration_strength(&c, 2000);
            for a in ["A", "B", "C", "D", "E"] {
                for b in ["A", "B", "C", "D", "E"] {
                    if a >= b { continue; }
                    let brute = bylines.iter().filter(|s| s.contains(a) && s.contains(b)).count() as u64;
                    let got = m.get(&(Country::new(a), Country::new(b))).copied().unwrap_or(0);
                    prop_assert_eq!(got, brute);
                }
            }
        }
    }
}
