//! Loading, validation and indexing of publications, citations, covariate
//! tables, idea lists and texts.
//!
//! Country attribution uses full counting: every country on a byline receives
//! one whole publication. Citing-side attribution is symmetric, so a citing
//! paper with two countries adds one citation to each country's counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::country::Country;
use crate::error::{Error, Result};
use crate::tsv::{self, parse_error, parse_optional_f64, split_multi};

pub const PUBLICATIONS_HEADER: [&str; 8] = [
    "pub_id",
    "year",
    "venue_id",
    "field_id",
    "concept_ids",
    "countries",
    "author_ids",
    "affiliation_ids",
];
pub const CITATIONS_HEADER: [&str; 2] = ["citing_pub_id", "cited_pub_id"];
pub const COUNTRY_YEAR_HEADER: [&str; 9] = [
    "country",
    "year",
    "gdp_pc",
    "gni",
    "population",
    "rd_gdp_pct",
    "democracy",
    "patents_resident",
    "patents_total",
];
pub const DYAD_HEADER: [&str; 7] = [
    "origin",
    "destination",
    "distance_km",
    "same_continent",
    "same_language",
    "trade_volume",
    "sta_flag",
];
pub const TEXTS_HEADER: [&str; 3] = ["pub_id", "title", "abstract"];

/// Default citation window: publication year plus the next five years.
pub const DEFAULT_WINDOW: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub venue_id: String,
    pub field_id: String,
    pub concept_ids: BTreeSet<String>,
    pub countries: BTreeSet<Country>,
    pub author_ids: BTreeSet<String>,
    pub affiliation_ids: BTreeSet<String>,
}

/// A citation between two loaded publications, by corpus index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CitationLink {
    pub citing: usize,
    pub cited: usize,
}

/// Rows discarded while building a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropReport {
    /// Publications without any country (no institutional address).
    pub no_affiliation: usize,
    /// Citations touching a publication dropped for lack of affiliation.
    pub citations_to_dropped: usize,
    /// Citations whose citing and cited ids coincide.
    pub self_citations: usize,
    /// Citations removed by [`filter_self_links`].
    pub self_links: usize,
}

/// Indexed, immutable publication/citation corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pubs: Vec<PublicationRecord>,
    index: HashMap<String, usize>,
    citations: Vec<CitationLink>,
    cited_by: Vec<Vec<usize>>,
    by_year: BTreeMap<i32, Vec<usize>>,
    drops: DropReport,
}

impl Corpus {
    /// Builds a corpus from parsed records and `(citing, cited)` id pairs.
    ///
    /// Publications with no country are dropped, as are citations touching
    /// them. A citation naming an id that never appeared is an error.
    pub fn from_records(
        records: Vec<PublicationRecord>,
        citations: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut drops = DropReport::default();
        let mut dropped_ids = BTreeSet::new();
        let mut pubs = Vec::with_capacity(records.len());
        let mut seen = BTreeSet::new();
        for r in records {
            if !seen.insert(r.pub_id.clone()) {
                return Err(Error::Data(format!("duplicate pub_id {:?}", r.pub_id)));
            }
            if r.countries.is_empty() {
                drops.no_affiliation += 1;
                dropped_ids.insert(r.pub_id);
            } else {
                pubs.push(r);
            }
        }
        let mut links = Vec::new();
        let index: HashMap<String, usize> =
            pubs.iter().enumerate().map(|(i, p)| (p.pub_id.clone(), i)).collect();
        for (n, (citing, cited)) in citations.into_iter().enumerate() {
            if dropped_ids.contains(&citing) || dropped_ids.contains(&cited) {
                drops.citations_to_dropped += 1;
                continue;
            }
            let resolve = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Data(format!("citation #{}: unknown pub_id {id:?}", n + 1)))
            };
            let (a, b) = (resolve(&citing)?, resolve(&cited)?);
            if a == b {
                drops.self_citations += 1;
                continue;
            }
            links.push(CitationLink { citing: a, cited: b });
        }
        Ok(Self::assemble(pubs, index, links, drops))
    }

    fn assemble(
        pubs: Vec<PublicationRecord>,
        index: HashMap<String, usize>,
        mut citations: Vec<CitationLink>,
        drops: DropReport,
    ) -> Self {
        citations.sort_unstable();
        citations.dedup();
        let mut cited_by = vec![Vec::new(); pubs.len()];
        for l in &citations {
            cited_by[l.cited].push(l.citing);
        }
        let mut by_year: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, p) in pubs.iter().enumerate() {
            by_year.entry(p.year).or_default().push(i);
        }
        Corpus {
            pubs,
            index,
            citations,
            cited_by,
            by_year,
            drops,
        }
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.pubs
    }

    pub fn publication(&self, idx: usize) -> &PublicationRecord {
        &self.pubs[idx]
    }

    pub fn lookup(&self, pub_id: &str) -> Option<usize> {
        self.index.get(pub_id).copied()
    }

    pub fn citations(&self) -> &[CitationLink] {
        &self.citations
    }

    /// Indices of publications citing `idx`, ascending.
    pub fn cited_by(&self, idx: usize) -> &[usize] {
        &self.cited_by[idx]
    }

    /// Publication indices for `year`, ascending.
    pub fn publications_in(&self, year: i32) -> &[usize] {
        self.by_year.get(&year).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.by_year.keys().copied()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        Some((*self.by_year.keys().next()?, *self.by_year.keys().next_back()?))
    }

    pub fn countries(&self) -> BTreeSet<Country> {
        self.pubs.iter().flat_map(|p| p.countries.iter().cloned()).collect()
    }

    pub fn drop_report(&self) -> DropReport {
        self.drops
    }

    /// SHA-256 over a canonical serialization of the corpus contents.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.pubs {
            let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join("|");
            let countries: Vec<&str> = p.countries.iter().map(Country::as_str).collect();
            h.update(
                format!(
                    "P\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    p.pub_id,
                    p.year,
                    p.venue_id,
                    p.field_id,
                    join(&p.concept_ids),
                    countries.join("|"),
                    join(&p.author_ids),
                    join(&p.affiliation_ids)
                )
                .as_bytes(),
            );
        }
        for l in &self.citations {
            h.update(format!("C\t{}\t{}\n", self.pubs[l.citing].pub_id, self.pubs[l.cited].pub_id).as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Loads `publications.tsv` and `citations.tsv`.
pub fn load_corpus(publications_path: &Path, citations_path: &Path) -> Result<Corpus> {
    let records = read_publications(publications_path)?;
    let rows = tsv::read_table(citations_path, &CITATIONS_HEADER)?;
    let pub_ids: BTreeSet<&str> = records.iter().map(|r| r.pub_id.as_str()).collect();
    for r in &rows {
        for (col, id) in CITATIONS_HEADER.iter().zip(&r.fields) {
            if id.is_empty() {
                return Err(parse_error(citations_path, r.line, format!("empty {col}")));
            }
            if !pub_ids.contains(id.as_str()) {
                return Err(parse_error(citations_path, r.line, format!("{col} {id:?} not found in publications")));
            }
        }
    }
    Corpus::from_records(records, rows.into_iter().map(|r| (r.fields[0].clone(), r.fields[1].clone())))
}

/// Parses `publications.tsv`. Duplicate ids are reported with their line.
pub fn read_publications(path: &Path) -> Result<Vec<PublicationRecord>> {
    let rows = tsv::read_table(path, &PUBLICATIONS_HEADER)?;
    parse_publication_rows(path, rows)
}

pub fn read_publications_from<R: Read>(reader: R, path: &Path) -> Result<Vec<PublicationRecord>> {
    let rows = tsv::read_table_from(reader, path, &PUBLICATIONS_HEADER)?;
    parse_publication_rows(path, rows)
}

fn parse_publication_rows(path: &Path, rows: Vec<tsv::Row>) -> Result<Vec<PublicationRecord>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let f = &r.fields;
        if f[0].is_empty() {
            return Err(parse_error(path, r.line, "empty pub_id"));
        }
        if !seen.insert(f[0].clone()) {
            return Err(parse_error(path, r.line, format!("duplicate pub_id {:?}", f[0])));
        }
        let year: i32 = f[1]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, r.line, format!("invalid year {:?}", f[1])))?;
        if year < 1900 {
            return Err(parse_error(path, r.line, format!("year {year} before 1900")));
        }
        let set = |cell: &str| split_multi(cell).map(str::to_string).collect::<BTreeSet<_>>();
        let mut countries = BTreeSet::new();
        for code in split_multi(&f[5]) {
            if !Country::is_valid_code(code) {
                return Err(parse_error(path, r.line, format!("invalid country code {code:?}")));
            }
            countries.insert(Country::new(code));
        }
        out.push(PublicationRecord {
            pub_id: f[0].clone(),
            year,
            venue_id: f[2].clone(),
            field_id: f[3].clone(),
            concept_ids: set(&f[4]),
            countries,
            author_ids: set(&f[6]),
            affiliation_ids: set(&f[7]),
        });
    }
    Ok(out)
}

/// Countries credited with `publication`: every byline country, once each.
pub fn attribute_countries(publication: &PublicationRecord) -> BTreeSet<Country> {
    publication.countries.clone()
}

/// True when two publications share an author or an affiliation.
pub fn shares_author_or_affiliation(a: &PublicationRecord, b: &PublicationRecord) -> bool {
    !a.author_ids.is_disjoint(&b.author_ids) || !a.affiliation_ids.is_disjoint(&b.affiliation_ids)
}

/// Removes citations whose endpoints share an author or affiliation. The
/// number removed is accumulated into the drop report's `self_links`.
pub fn filter_self_links(corpus: &Corpus) -> Corpus {
    let kept: Vec<CitationLink> = corpus
        .citations
        .iter()
        .copied()
        .filter(|l| !shares_author_or_affiliation(&corpus.pubs[l.citing], &corpus.pubs[l.cited]))
        .collect();
    let mut drops = corpus.drops;
    drops.self_links += corpus.citations.len() - kept.len();
    Corpus::assemble(corpus.pubs.clone(), corpus.index.clone(), kept, drops)
}

/// Citations to one publication from one country inside the window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedCount {
    /// Corpus index of the cited publication.
    pub cited: usize,
    pub citing_country: Country,
    pub publication_year: i32,
    pub c5: u32,
}

/// Per-country citation counts within `[year, year + window]` for every
/// publication of `year`. Only publications cited at least once by a country
/// appear in that country's counts. Output is sorted by (country, publication).
pub fn compute_windowed_counts(corpus: &Corpus, year: i32, window: i32) -> Vec<WindowedCount> {
    let mut counts: BTreeMap<(&Country, usize), u32> = BTreeMap::new();
    for &p in corpus.publications_in(year) {
        for &citing in corpus.cited_by(p) {
            let cy = corpus.pubs[citing].year;
            if cy < year || cy > year + window {
                continue;
            }
            for c in &corpus.pubs[citing].countries {
                *counts.entry((c, p)).or_insert(0) += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|((c, p), n)| WindowedCount {
            cited: p,
            citing_country: c.clone(),
            publication_year: year,
            c5: n,
        })
        .collect()
}

/// Total citations (from any country) received by `idx` within the window.
pub fn total_windowed_citations(corpus: &Corpus, idx: usize, window: i32) -> u32 {
    let year = corpus.pubs[idx].year;
    corpus
        .cited_by(idx)
        .iter()
        .filter(|&&c| {
            let cy = corpus.pubs[c].year;
            cy >= year && cy <= year + window
        })
        .count() as u32
}

/// One country-year covariate row. `None` marks a missing value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CountryYearRow {
    pub gdp_pc: Option<f64>,
    pub gni: Option<f64>,
    pub population: Option<f64>,
    pub rd_gdp_pct: Option<f64>,
    pub democracy: Option<f64>,
    pub patents_resident: Option<f64>,
    pub patents_total: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct CountryYearCovariates {
    rows: BTreeMap<(Country, i32), CountryYearRow>,
}

impl CountryYearCovariates {
    pub fn get(&self, country: &Country, year: i32) -> Option<&CountryYearRow> {
        self.rows.get(&(country.clone(), year))
    }

    pub fn insert(&mut self, country: Country, year: i32, row: CountryYearRow) {
        self.rows.insert((country, year), row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One dyad covariate row. Flags are stored as 0/1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DyadRow {
    pub distance_km: Option<f64>,
    pub same_continent: Option<f64>,
    pub same_language: Option<f64>,
    pub trade_volume: Option<f64>,
    pub sta_flag: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct DyadCovariates {
    rows: BTreeMap<(Country, Country), DyadRow>,
}

impl DyadCovariates {
    /// Looks up `(origin, destination)`, falling back to the reversed pair.
    pub fn get(&self, origin: &Country, destination: &Country) -> Option<&DyadRow> {
        self.rows
            .get(&(origin.clone(), destination.clone()))
            .or_else(|| self.rows.get(&(destination.clone(), origin.clone())))
    }

    pub fn insert(&mut self, origin: Country, destination: Country, row: DyadRow) {
        self.rows.insert((origin, destination), row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn parse_country(path: &Path, line: u64, cell: &str) -> Result<Country> {
    if !Country::is_valid_code(cell.trim()) {
        return Err(parse_error(path, line, format!("invalid country code {cell:?}")));
    }
    Ok(Country::new(cell.trim()))
}

fn parse_flag(path: &Path, line: u64, col: &str, cell: &str) -> Result<Option<f64>> {
    match parse_optional_f64(path, line, col, cell)? {
        Some(v) if v == 0.0 || v == 1.0 => Ok(Some(v)),
        Some(v) => Err(parse_error(path, line, format!("column {col}: flag must be 0 or 1, got {v}"))),
        None => Ok(None),
    }
}

pub fn load_country_year_covariates(path: &Path) -> Result<CountryYearCovariates> {
    let rows = tsv::read_table(path, &COUNTRY_YEAR_HEADER)?;
    let mut out = CountryYearCovariates::default();
    for r in rows {
        let f = &r.fields;
        let country = parse_country(path, r.line, &f[0])?;
        let year: i32 = f[1]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, r.line, format!("invalid year {:?}", f[1])))?;
        let num = |i: usize| parse_optional_f64(path, r.line, COUNTRY_YEAR_HEADER[i], &f[i]);
        let row = CountryYearRow {
            gdp_pc: num(2)?,
            gni: num(3)?,
            population: num(4)?,
            rd_gdp_pct: num(5)?,
            democracy: num(6)?,
            patents_resident: num(7)?,
            patents_total: num(8)?,
        };
        if out.rows.insert((country.clone(), year), row).is_some() {
            return Err(parse_error(path, r.line, format!("duplicate row for ({country}, {year})")));
        }
    }
    Ok(out)
}

pub fn load_dyad_covariates(path: &Path) -> Result<DyadCovariates> {
    let rows = tsv::read_table(path, &DYAD_HEADER)?;
    let mut out = DyadCovariates::default();
    for r in rows {
        let f = &r.fields;
        let origin = parse_country(path, r.line, &f[0])?;
        let destination = parse_country(path, r.line, &f[1])?;
        let row = DyadRow {
            distance_km: parse_optional_f64(path, r.line, DYAD_HEADER[2], &f[2])?,
            same_continent: parse_flag(path, r.line, DYAD_HEADER[3], &f[3])?,
            same_language: parse_flag(path, r.line, DYAD_HEADER[4], &f[4])?,
            trade_volume: parse_optional_f64(path, r.line, DYAD_HEADER[5], &f[5])?,
            sta_flag: parse_flag(path, r.line, DYAD_HEADER[6], &f[6])?,
        };
        if out.rows.insert((origin.clone(), destination.clone()), row).is_some() {
            return Err(parse_error(path, r.line, format!("duplicate row for ({origin}, {destination})")));
        }
    }
    Ok(out)
}

/// Reads the idea master list: one n-gram per line, blank lines ignored.
pub fn load_ideas_master(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Title and abstract of one publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationText {
    pub title: String,
    pub abstract_text: String,
}

/// Reads `texts.tsv` (`pub_id`, `title`, `abstract`).
pub fn load_texts(path: &Path) -> Result<BTreeMap<String, PublicationText>> {
    let rows = tsv::read_table(path, &TEXTS_HEADER)?;
    let mut out = BTreeMap::new();
    for r in rows {
        let mut f = r.fields.into_iter();
        let id = f.next().unwrap_or_default();
        let title = f.next().unwrap_or_default();
        let abstract_text = f.next().unwrap_or_default();
        if out.insert(id.clone(), PublicationText { title, abstract_text }).is_some() {
            return Err(parse_error(path, r.line, format!("duplicate pub_id {id:?}")));
        }
    }
    Ok(out)
}
