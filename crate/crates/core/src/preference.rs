//! Rank-based national citation preference.
//!
//! For a citing country and year, every publication from that year cited at
//! least once by the country is ranked by its windowed citation count. The
//! preference of the citing country for a target country is the AUC of the
//! target's publications within that ranking (ties credited one half), tested
//! against 0.5 with DeLong's variance.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use libm::erfc;

use crate::country::Country;
use crate::error::{Error, Result};
use crate::ingest::{compute_windowed_counts, Corpus, DEFAULT_WINDOW};
use crate::par::{self, Execution};
use crate::tsv::{fmt_f64, TsvWriter};

/// Default minimum number of target publications in a ranking set.
pub const DEFAULT_MIN_CITED: usize = 50;

/// Ascending midranks (1-based; tied values share the mean of their positions).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share the average rank
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// AUC and Mann-Whitney U of the target class against the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AucStats {
    pub auc: f64,
    pub u_stat: f64,
    pub n_target: usize,
    pub n_other: usize,
}

/// DeLong test of an AUC against 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeLongTest {
    pub auc: f64,
    pub variance: f64,
    pub z: f64,
    pub p_raw: f64,
}

fn class_sizes(is_target: &[bool]) -> (usize, usize) {
    let m = is_target.iter().filter(|&&t| t).count();
    (m, is_target.len() - m)
}

/// AUC where higher `values` rank higher, via the midrank form of U.
pub fn auc_stats(values: &[f64], is_target: &[bool]) -> Result<AucStats> {
    assert_eq!(values.len(), is_target.len(), "values and labels differ in length");
    let (m, n) = class_sizes(is_target);
    if m == 0 || n == 0 {
        return Err(Error::Undefined(format!("AUC needs both classes (n_target={m}, n_other={n})")));
    }
    let ranks = midranks(values);
    let rank_sum: f64 = ranks.iter().zip(is_target).filter(|(_, &t)| t).map(|(r, _)| r).sum();
    let u = rank_sum - (m * (m + 1)) as f64 / 2.0;
    Ok(AucStats {
        auc: u / (m as f64 * n as f64),
        u_stat: u,
        n_target: m,
        n_other: n,
    })
}

/// Two-sided standard normal tail probability.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// DeLong variance from placement values, computed with three midrank passes
/// (pooled, within-target, within-other) instead of all pairwise comparisons.
pub fn delong_test(values: &[f64], is_target: &[bool]) -> Result<DeLongTest> {
    assert_eq!(values.len(), is_target.len(), "values and labels differ in length");
    let (m, n) = class_sizes(is_target);
    if m < 2 || n < 2 {
        return Err(Error::Undefined(format!(
            "DeLong variance needs at least two observations per class (n_target={m}, n_other={n})"
        )));
    }
    let pooled = midranks(values);
    let (tv, ov): (Vec<f64>, Vec<f64>) = {
        let t = values.iter().zip(is_target).filter(|(_, &l)| l).map(|(v, _)| *v).collect();
        let o = values.iter().zip(is_target).filter(|(_, &l)| !l).map(|(v, _)| *v).collect();
        (t, o)
    };
    let tr = midranks(&tv);
    let or = midranks(&ov);
    let (mf, nf) = (m as f64, n as f64);
    let mut v10 = Vec::with_capacity(m);
    let mut v01 = Vec::with_capacity(n);
    let (mut ti, mut oi) = (0, 0);
    for (k, &lab) in is_target.iter().enumerate() {
        if lab {
            v10.push((pooled[k] - tr[ti]) / nf);
            ti += 1;
        } else {
            v01.push(1.0 - (pooled[k] - or[oi]) / mf);
            oi += 1;
        }
    }
    let auc = v10.iter().sum::<f64>() / mf;
    let s10 = v10.iter().map(|v| (v - auc).powi(2)).sum::<f64>() / (mf - 1.0);
    let s01 = v01.iter().map(|v| (v - auc).powi(2)).sum::<f64>() / (nf - 1.0);
    let variance = s10 / mf + s01 / nf;
    let (z, p_raw) = if variance <= 0.0 {
        if auc == 0.5 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(auc - 0.5), 0.0)
        }
    } else {
        let z = (auc - 0.5) / variance.sqrt();
        (z, two_sided_p(z))
    };
    Ok(DeLongTest { auc, variance, z, p_raw })
}

/// One publication in a citing country's ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    /// Corpus index of the cited publication.
    pub cited: usize,
    pub cited_countries: BTreeSet<Country>,
    pub c5: u32,
    /// Descending midrank: 1 is the most cited.
    pub rank: f64,
}

/// All publications of one year cited at least once by one country.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingSet {
    pub citing_country: Country,
    pub year: i32,
    /// Sorted by descending `c5`, then corpus index.
    pub entries: Vec<RankedEntry>,
}

impl RankingSet {
    fn from_counts(corpus: &Corpus, citing_country: Country, year: i32, mut counts: Vec<(usize, u32)>) -> Self {
        counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let values: Vec<f64> = counts.iter().map(|&(_, c)| c as f64).collect();
        let asc = midranks(&values);
        let n = counts.len() as f64;
        let entries = counts
            .into_iter()
            .zip(asc)
            .map(|((cited, c5), r)| RankedEntry {
                cited,
                cited_countries: corpus.publication(cited).countries.clone(),
                c5,
                rank: n + 1.0 - r,
            })
            .collect();
        RankingSet {
            citing_country,
            year,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn values_and_labels(&self, target: &Country) -> (Vec<f64>, Vec<bool>) {
        self.entries
            .iter()
            .map(|e| (e.c5 as f64, e.cited_countries.contains(target)))
            .unzip()
    }

    /// Number of ranked publications with `target` on the byline.
    pub fn target_count(&self, target: &Country) -> usize {
        self.entries.iter().filter(|e| e.cited_countries.contains(target)).count()
    }

    /// Every country appearing on a ranked publication.
    pub fn cited_countries(&self) -> BTreeSet<Country> {
        self.entries.iter().flat_map(|e| e.cited_countries.iter().cloned()).collect()
    }

    pub fn auc_preference(&self, target: &Country) -> Result<AucStats> {
        let (v, l) = self.values_and_labels(target);
        auc_stats(&v, &l)
    }

    pub fn delong_test(&self, target: &Country) -> Result<DeLongTest> {
        let (v, l) = self.values_and_labels(target);
        delong_test(&v, &l)
    }

    /// Full preference score for `target` (unadjusted, unsigned).
    pub fn score(&self, target: &Country) -> Result<PreferenceScore> {
        let (v, l) = self.values_and_labels(target);
        let a = auc_stats(&v, &l)?;
        let d = delong_test(&v, &l)?;
        Ok(PreferenceScore {
            source: self.citing_country.clone(),
            target: target.clone(),
            year: self.year,
            n_target: a.n_target,
            n_other: a.n_other,
            auc: a.auc,
            u_stat: a.u_stat,
            var_delong: d.variance,
            z: d.z,
            p_raw: d.p_raw,
            p_adjusted: None,
            sign: 0,
        })
    }
}

/// Ranking set for one citing country and year.
pub fn build_ranking(corpus: &Corpus, citing_country: &Country, year: i32, window: i32) -> RankingSet {
    let counts = compute_windowed_counts(corpus, year, window)
        .into_iter()
        .filter(|w| &w.citing_country == citing_country)
        .map(|w| (w.cited, w.c5))
        .collect();
    RankingSet::from_counts(corpus, citing_country.clone(), year, counts)
}

/// Ranking sets of every citing country active in `year`.
pub fn rankings_for_year(corpus: &Corpus, year: i32, window: i32) -> BTreeMap<Country, RankingSet> {
    let mut grouped: BTreeMap<Country, Vec<(usize, u32)>> = BTreeMap::new();
    for w in compute_windowed_counts(corpus, year, window) {
        grouped.entry(w.citing_country).or_default().push((w.cited, w.c5));
    }
    grouped
        .into_iter()
        .map(|(c, counts)| {
            let set = RankingSet::from_counts(corpus, c.clone(), year, counts);
            (c, set)
        })
        .collect()
}

/// One directed (source, target, year) preference measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceScore {
    pub source: Country,
    pub target: Country,
    pub year: i32,
    pub n_target: usize,
    pub n_other: usize,
    pub auc: f64,
    pub u_stat: f64,
    pub var_delong: f64,
    pub z: f64,
    pub p_raw: f64,
    /// Filled by the multiple-testing step.
    pub p_adjusted: Option<f64>,
    /// -1, 0 or +1; non-zero only after a significant adjusted test.
    pub sign: i8,
}

/// National self-preference: the country's own publications as the target class.
pub fn self_preference(corpus: &Corpus, country: &Country, year: i32, window: i32) -> Result<PreferenceScore> {
    build_ranking(corpus, country, year, window).score(country)
}

#[derive(Debug, Clone, Copy)]
pub struct PreferenceOptions {
    pub min_cited: usize,
    pub window: i32,
    pub exec: Execution,
}

impl Default for PreferenceOptions {
    fn default() -> Self {
        PreferenceOptions {
            min_cited: DEFAULT_MIN_CITED,
            window: DEFAULT_WINDOW,
            exec: Execution::default(),
        }
    }
}

/// A pair that met the publication threshold but could not be tested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPair {
    pub source: Country,
    pub target: Country,
    pub n_target: usize,
    pub n_other: usize,
    pub reason: String,
}

/// All preference scores of one year.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreferenceBatch {
    pub year: i32,
    /// International pairs sorted by (source, target).
    pub international: Vec<PreferenceScore>,
    /// Self-preference scores sorted by country.
    pub self_scores: Vec<PreferenceScore>,
    pub skipped: Vec<SkippedPair>,
}

/// Scores every ordered (source, target) pair whose target has at least
/// `min_cited` publications in the source's ranking set.
pub fn preference_matrix(corpus: &Corpus, year: i32, opts: &PreferenceOptions) -> PreferenceBatch {
    let rankings: Vec<RankingSet> = rankings_for_year(corpus, year, opts.window).into_values().collect();
    let per_source = par::map(opts.exec, &rankings, |set| score_source(set, opts.min_cited));
    let mut batch = PreferenceBatch {
        year,
        ..Default::default()
    };
    for (intl, own, skipped) in per_source {
        batch.international.extend(intl);
        batch.self_scores.extend(own);
        batch.skipped.extend(skipped);
    }
    batch
}

type SourceScores = (Vec<PreferenceScore>, Option<PreferenceScore>, Vec<SkippedPair>);

fn score_source(set: &RankingSet, min_cited: usize) -> SourceScores {
    let mut intl = Vec::new();
    let mut own = None;
    let mut skipped = Vec::new();
    for target in set.cited_countries() {
        let n_target = set.target_count(&target);
        if n_target < min_cited {
            continue;
        }
        match set.score(&target) {
            Ok(s) if target == set.citing_country => own = Some(s),
            Ok(s) => intl.push(s),
            Err(e) => skipped.push(SkippedPair {
                source: set.citing_country.clone(),
                target,
                n_target,
                n_other: set.len() - n_target,
                reason: e.to_string(),
            }),
        }
    }
    (intl, own, skipped)
}

pub const SCORES_HEADER: [&str; 9] = [
    "year",
    "source",
    "target",
    "n_target",
    "n_other",
    "auc",
    "u_stat",
    "var_delong",
    "p_raw",
];

/// Renders `preference_scores.tsv`.
pub fn scores_tsv<'a>(scores: impl IntoIterator<Item = &'a PreferenceScore>) -> String {
    let mut w = TsvWriter::new(&SCORES_HEADER);
    for s in scores {
        w.row([
            s.year.to_string(),
            s.source.to_string(),
            s.target.to_string(),
            s.n_target.to_string(),
            s.n_other.to_string(),
            fmt_f64(s.auc),
            fmt_f64(s.u_stat),
            fmt_f64(s.var_delong),
            fmt_f64(s.p_raw),
        ]);
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PublicationRecord;
    use proptest::prelude::*;

    fn brute_auc(t: &[f64], o: &[f64]) -> f64 {
        let mut s = 0.0;
        for &a in t {
            for &b in o {
                s += if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                };
            }
        }
        s / (t.len() * o.len()) as f64
    }

    fn split(t: &[f64], o: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let mut v = t.to_vec();
        v.extend_from_slice(o);
        let mut l = vec![true; t.len()];
        l.extend(vec![false; o.len()]);
        (v, l)
    }

    #[test]
    fn midrank_examples() {
        assert_eq!(midranks(&[5.0, 3.0, 3.0, 1.0]), vec![4.0, 2.5, 2.5, 1.0]);
        assert_eq!(midranks(&[2.0; 5]), vec![3.0; 5]);
    }

    #[test]
    fn auc_examples() {
        let (v, l) = split(&[10.0, 8.0, 6.0], &[5.0, 3.0, 1.0]);
        assert_eq!(auc_stats(&v, &l).unwrap().auc, 1.0);
        let (v, l) = split(&[3.0], &[3.0]);
        assert_eq!(auc_stats(&v, &l).unwrap().auc, 0.5);
        let (v, l) = split(&[5.0, 2.0], &[4.0, 2.0, 1.0]);
        let a = auc_stats(&v, &l).unwrap();
        assert_eq!(a.auc, brute_auc(&[5.0, 2.0], &[4.0, 2.0, 1.0]));
        assert_eq!(a.auc, 0.75);
        assert_eq!(a.u_stat, 4.5);
        let (v, l) = split(&[], &[1.0]);
        assert!(matches!(auc_stats(&v, &l), Err(Error::Undefined(_))));
    }

    #[test]
    fn delong_null_by_symmetry() {
        let (v, l) = split(&[4.0, 2.0, 2.0, 1.0], &[1.0, 2.0, 4.0, 2.0]);
        let d = delong_test(&v, &l).unwrap();
        assert_eq!(d.auc, 0.5);
        assert_eq!(d.z, 0.0);
        assert_eq!(d.p_raw, 1.0);
    }

    #[test]
    fn delong_degenerate_cases() {
        let (v, l) = split(&[5.0], &[4.0, 2.0, 1.0]);
        assert!(matches!(delong_test(&v, &l), Err(Error::Undefined(_))));
        // zero variance with complete separation
        let (v, l) = split(&[9.0, 9.0], &[1.0, 1.0]);
        let d = delong_test(&v, &l).unwrap();
        assert_eq!((d.auc, d.variance, d.p_raw), (1.0, 0.0, 0.0));
        // zero variance at 0.5
        let (v, l) = split(&[3.0, 3.0], &[3.0, 3.0]);
        assert_eq!(delong_test(&v, &l).unwrap().p_raw, 1.0);
    }

    /// Exact two-sided permutation p-value over all labelings.
    fn exact_permutation_p(t: &[f64], o: &[f64]) -> f64 {
        let all: Vec<f64> = t.iter().chain(o).copied().collect();
        let m = t.len();
        let obs = (brute_auc(t, o) - 0.5).abs();
        let n = all.len();
        let (mut hit, mut total) = (0usize, 0usize);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let (a, b): (Vec<(usize, f64)>, Vec<(usize, f64)>) =
                all.iter().copied().enumerate().partition(|(i, _)| mask & (1 << i) != 0);
            let a: Vec<f64> = a.into_iter().map(|x| x.1).collect();
            let b: Vec<f64> = b.into_iter().map(|x| x.1).collect();
            total += 1;
            if (brute_auc(&a, &b) - 0.5).abs() >= obs - 1e-12 {
                hit += 1;
            }
        }
        hit as f64 / total as f64
    }

    #[test]
    fn delong_vs_exact_permutation_small_example() {
        // Normal approximation at n_target=2, n_other=3: p = 0.386 against an
        // exact permutation p of 0.5 (10 labelings). The 0.05 agreement asked
        // of this example does not hold for the normal approximation at this size.
        let t = [5.0, 2.0];
        let o = [4.0, 2.0, 1.0];
        let exact = exact_permutation_p(&t, &o);
        assert_eq!(exact, 0.5);
        let (v, l) = split(&t, &o);
        let d = delong_test(&v, &l).unwrap();
        assert!((d.variance - 1.0 / 12.0).abs() < 1e-15);
        assert!((d.p_raw - 0.386_476_230_771_232_7).abs() < 1e-12, "{}", d.p_raw);
    }

    #[test]
    #[ignore = "normal approximation gives 0.386 against an exact 0.5 at class sizes 2 and 3"]
    fn delong_within_005_of_exact_small_example() {
        let t = [5.0, 2.0];
        let o = [4.0, 2.0, 1.0];
        let (v, l) = split(&t, &o);
        let d = delong_test(&v, &l).unwrap();
        assert!((d.p_raw - exact_permutation_p(&t, &o)).abs() <= 0.05);
    }

    #[test]
    fn complete_separation_twenty_each() {
        let t: Vec<f64> = (21..=40).map(f64::from).collect();
        let o: Vec<f64> = (1..=20).map(f64::from).collect();
        let (v, l) = split(&t, &o);
        let d = delong_test(&v, &l).unwrap();
        assert_eq!(d.auc, 1.0);
        assert!(d.p_raw < 0.001);
    }

    proptest! {
        #[test]
        fn auc_matches_brute_force(
            t in prop::collection::vec(0u8..=10, 1..30),
            o in prop::collection::vec(0u8..=10, 1..30),
        ) {
            let t: Vec<f64> = t.into_iter().map(f64::from).collect();
            let o: Vec<f64> = o.into_iter().map(f64::from).collect();
            let (v, l) = split(&t, &o);
            let a = auc_stats(&v, &l).unwrap();
            prop_assert!((a.auc - brute_auc(&t, &o)).abs() < 1e-12);
            prop_assert!((a.u_stat - a.auc * (t.len() * o.len()) as f64).abs() < 1e-9);
            // complement symmetry
            let flipped: Vec<bool> = l.iter().map(|x| !x).collect();
            let b = auc_stats(&v, &flipped).unwrap();
            prop_assert!((a.auc + b.auc - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rank_transform_invariance(
            t in prop::collection::vec(0u8..=10, 2..20),
            o in prop::collection::vec(0u8..=10, 2..20),
        ) {
            let (v, l) = split(
                &t.iter().map(|&x| f64::from(x)).collect::<Vec<_>>(),
                &o.iter().map(|&x| f64::from(x)).collect::<Vec<_>>(),
            );
            let w: Vec<f64> = v.iter().map(|x| (x + 1.0).ln() * 3.0 + x.powi(3)).collect();
            let a = delong_test(&v, &l).unwrap();
            let b = delong_test(&w, &l).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    fn rec(id: &str, year: i32, countries: &[&str]) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            year,
            venue_id: "v".into(),
            field_id: "f".into(),
            concept_ids: BTreeSet::new(),
            countries: countries.iter().map(|c| Country::new(*c)).collect(),
            author_ids: BTreeSet::from([id.to_string()]),
            affiliation_ids: BTreeSet::from([id.to_string()]),
        }
    }

    /// Builds a corpus where citing country JP cites each target publication
    /// `c5` times in the target year.
    fn ranking_corpus(cited: &[(&str, &[&str], u32)]) -> Corpus {
        let mut records = Vec::new();
        let mut links = Vec::new();
        for (id, countries, c5) in cited {
            records.push(rec(id, 2010, countries));
            for k in 0..*c5 {
                let citing = format!("{id}-jp{k}");
                records.push(rec(&citing, 2011, &["JP"]));
                links.push((citing, id.to_string()));
            }
        }
        Corpus::from_records(records, links).unwrap()
    }

    #[test]
    fn build_ranking_midranks() {
        let corpus = ranking_corpus(&[("A", &["US"], 5), ("B", &["US"], 3), ("C", &["DE"], 3), ("D", &["DE"], 1)]);
        let set = build_ranking(&corpus, &Country::new("JP"), 2010, 5);
        let got: Vec<(String, f64)> = set
            .entries
            .iter()
            .map(|e| (corpus.publication(e.cited).pub_id.clone(), e.rank))
            .collect();
        assert_eq!(
            got,
            vec![("A".into(), 1.0), ("B".into(), 2.5), ("C".into(), 2.5), ("D".into(), 4.0)]
        );
        assert!(build_ranking(&corpus, &Country::new("FR"), 2010, 5).is_empty());
    }

    #[test]
    fn multinational_publication_joins_target_class() {
        let corpus = ranking_corpus(&[("A", &["US", "DE"], 5), ("B", &["DE"], 1), ("C", &["FR"], 2)]);
        let set = build_ranking(&corpus, &Country::new("JP"), 2010, 5);
        assert_eq!(set.target_count(&Country::new("US")), 1);
        assert_eq!(set.target_count(&Country::new("DE")), 2);
        assert_eq!(set.auc_preference(&Country::new("US")).unwrap().auc, 1.0);
    }

    #[test]
    fn self_preference_direction() {
        // JP's own work ranked below foreign work
        let corpus = ranking_corpus(&[
            ("A", &["US"], 5),
            ("B", &["US"], 4),
            ("C", &["JP"], 1),
            ("D", &["JP"], 2),
        ]);
        let s = self_preference(&corpus, &Country::new("JP"), 2010, 5).unwrap();
        assert!(s.auc < 0.5);
        assert_eq!(s.source, s.target);
    }

    #[test]
    fn self_preference_separation() {
        let mut spec: Vec<(String, Vec<&str>, u32)> = Vec::new();
        for i in 0..20 {
            spec.push((format!("own{i}"), vec!["JP"], 10 + (i % 3)));
        }
        for i in 0..80 {
            spec.push((format!("for{i}"), vec!["US"], 1 + (i % 5)));
        }
        let refs: Vec<(&str, &[&str], u32)> = spec.iter().map(|(a, b, c)| (a.as_str(), b.as_slice(), *c)).collect();
        let corpus = ranking_corpus(&refs);
        let s = self_preference(&corpus, &Country::new("JP"), 2010, 5).unwrap();
        assert_eq!(s.n_target + s.n_other, 100);
        assert_eq!(s.auc, 1.0);
    }

    #[test]
    fn min_cited_threshold_boundary() {
        let mut spec: Vec<(String, Vec<&str>, u32)> = Vec::new();
        for i in 0..50 {
            spec.push((format!("de{i}"), vec!["DE"], 1 + (i % 4)));
        }
        for i in 0..49 {
            spec.push((format!("fr{i}"), vec!["FR"], 1 + (i % 3)));
        }
        let refs: Vec<(&str, &[&str], u32)> = spec.iter().map(|(a, b, c)| (a.as_str(), b.as_slice(), *c)).collect();
        let corpus = ranking_corpus(&refs);
        let batch = preference_matrix(&corpus, 2010, &PreferenceOptions::default());
        let pairs: Vec<(&str, &str)> = batch
            .international
            .iter()
            .map(|s| (s.source.as_str(), s.target.as_str()))
            .collect();
        assert_eq!(pairs, vec![("JP", "DE")]);
    }

    #[test]
    fn toy_world_pairs_match_enumeration() {
        // four countries citing each other; threshold 2
        let mut records = Vec::new();
        let mut links = Vec::new();
        let countries = ["AA", "BB", "CC", "DD"];
        let mut k = 0;
        for (ci, c) in countries.iter().enumerate() {
            for j in 0..(ci + 1) {
                let id = format!("{c}{j}");
                records.push(rec(&id, 2000, &[c]));
            }
        }
        for (si, s) in countries.iter().enumerate() {
            for (ci, c) in countries.iter().enumerate() {
                // source s cites the first min(ci+1, si+2) publications of c
                for j in 0..(ci + 1).min(si + 2) {
                    for _ in 0..=((j + si) % 3) {
                        let citing = format!("x{k}");
                        k += 1;
                        records.push(rec(&citing, 2001, &[s]));
                        links.push((citing, format!("{c}{j}")));
                    }
                }
            }
        }
        let corpus = Corpus::from_records(records, links).unwrap();
        let opts = PreferenceOptions {
            min_cited: 2,
            ..Default::default()
        };
        let batch = preference_matrix(&corpus, 2000, &opts);
        let rankings = rankings_for_year(&corpus, 2000, 5);
        let mut expected = Vec::new();
        for (s, set) in &rankings {
            for t in countries {
                let t = Country::new(t);
                let n_t = set.target_count(&t);
                if &t != s && n_t >= 2 && set.len() - n_t >= 2 {
                    expected.push((s.clone(), t));
                }
            }
        }
        let got: Vec<(Country, Country)> =
            batch.international.iter().map(|s| (s.source.clone(), s.target.clone())).collect();
        assert_eq!(got, expected);
        assert!(!got.is_empty());
        for s in &batch.international {
            assert!((s.u_stat - s.auc * (s.n_target * s.n_other) as f64).abs() < 1e-9);
            assert!(s.p_adjusted.is_none() && s.sign == 0);
        }
    }
}
