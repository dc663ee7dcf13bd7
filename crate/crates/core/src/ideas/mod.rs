//! Idea diffusion: matching master-list n-grams in titles and abstracts,
//! attributing each idea to the country that used it first, and measuring how
//! often a country's ideas are later picked up elsewhere.

pub mod porter;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ingest::{attribute_countries, Corpus, PublicationText};
use crate::par::{self, Execution};
use crate::tsv::{fmt_f64, TsvWriter};
use crate::{Country, Error, Result};

pub use porter::stem;
pub use text::{preprocess_text, render, segments, strip_copyright, tokenize, Token};

/// Ideas first used before this year are discarded.
pub const DEFAULT_MIN_FIRST_YEAR: i32 = 2000;

/// Master list after preprocessing, indexed by token sequence.
#[derive(Debug, Clone)]
pub struct IdeaIndex {
    ideas: Vec<Vec<String>>,
    lookup: HashMap<Vec<String>, usize>,
    max_len: usize,
}

impl IdeaIndex {
    /// Preprocesses every master entry the same way as publication text.
    /// Entries that normalize to nothing or contain a boundary are skipped,
    /// duplicates keep their first position.
    pub fn compile(master: &[String]) -> Result<Self> {
        if master.is_empty() {
            return Err(Error::Data("idea master list is empty".into()));
        }
        let mut ideas = Vec::new();
        let mut lookup = HashMap::new();
        let mut skipped = 0usize;
        for entry in master {
            let toks = tokenize(entry);
            if toks.is_empty() || toks.iter().any(Token::is_boundary) {
                skipped += 1;
                continue;
            }
            let words: Vec<String> = toks
                .into_iter()
                .map(|t| match t {
                    Token::Word(w) => w,
                    _ => unreachable!(),
                })
                .collect();
            if !lookup.contains_key(&words) {
                lookup.insert(words.clone(), ideas.len());
                ideas.push(words);
            }
        }
        if skipped > 0 {
            log::warn!("{skipped} idea master entries were empty or contained a comma/period and were skipped");
        }
        if ideas.is_empty() {
            return Err(Error::Data("idea master list has no usable entries".into()));
        }
        let max_len = ideas.iter().map(Vec::len).max().unwrap_or(0);
        Ok(IdeaIndex { ideas, lookup, max_len })
    }

    pub fn len(&self) -> usize {
        self.ideas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideas.is_empty()
    }

    /// Space-joined stemmed form of idea `i`.
    pub fn name(&self, i: usize) -> String {
        self.ideas[i].join(" ")
    }

    /// Ideas occurring contiguously inside one boundary-free segment.
    pub fn find(&self, tokens: &[Token]) -> BTreeSet<usize> {
        let mut found = BTreeSet::new();
        let mut key: Vec<String> = Vec::with_capacity(self.max_len);
        for seg in segments(tokens) {
            for start in 0..seg.len() {
                key.clear();
                for w in seg.iter().skip(start).take(self.max_len) {
                    key.push((*w).to_string());
                    if let Some(&i) = self.lookup.get(&key) {
                        found.insert(i);
                    }
                }
            }
        }
        found
    }
}

/// Which publications mention which ideas.
#[derive(Debug, Clone, PartialEq)]
pub struct IdeaMentions {
    pub ideas: Vec<String>,
    /// Corpus publication index and the ideas it mentions, ascending by index.
    pub per_publication: Vec<(usize, BTreeSet<usize>)>,
}

impl IdeaMentions {
    /// Publications mentioning each idea.
    pub fn by_idea(&self) -> Vec<BTreeSet<usize>> {
        let mut out = vec![BTreeSet::new(); self.ideas.len()];
        for (p, ids) in &self.per_publication {
            for &i in ids {
                out[i].insert(*p);
            }
        }
        out
    }

    pub fn total(&self) -> usize {
        self.per_publication.iter().map(|(_, s)| s.len()).sum()
    }
}

/// Matches the master list against every corpus publication that has text.
pub fn match_ideas(
    corpus: &Corpus,
    texts: &BTreeMap<String, PublicationText>,
    master: &[String],
    exec: Execution,
) -> Result<IdeaMentions> {
    let index = IdeaIndex::compile(master)?;
    let mut docs: Vec<(usize, &PublicationText)> = Vec::new();
    let mut orphan = 0usize;
    for (id, t) in texts {
        match corpus.lookup(id) {
            Some(i) => docs.push((i, t)),
            None => orphan += 1,
        }
    }
    if orphan > 0 {
        log::warn!("{orphan} texts refer to publications outside the corpus and were ignored");
    }
    docs.sort_by_key(|d| d.0);
    let found = par::map(exec, &docs, |(_, t)| index.find(&preprocess_text(&t.title, &t.abstract_text)));
    let per_publication = docs
        .iter()
        .zip(found)
        .filter(|(_, f)| !f.is_empty())
        .map(|((i, _), f)| (*i, f))
        .collect();
    Ok(IdeaMentions {
        ideas: (0..index.len()).map(|i| index.name(i)).collect(),
        per_publication,
    })
}

/// One dated use of an idea by the countries on a publication's byline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdeaUse {
    pub idea: usize,
    pub pub_id: String,
    pub year: i32,
    pub countries: BTreeSet<Country>,
}

/// Flattens mentions into dated uses, sorted by idea then publication id.
pub fn idea_uses(corpus: &Corpus, mentions: &IdeaMentions) -> Vec<IdeaUse> {
    let mut out = Vec::with_capacity(mentions.total());
    for (p, ids) in &mentions.per_publication {
        let rec = corpus.publication(*p);
        let countries = attribute_countries(rec);
        for &i in ids {
            out.push(IdeaUse {
                idea: i,
                pub_id: rec.pub_id.clone(),
                year: rec.year,
                countries: countries.clone(),
            });
        }
    }
    out.sort_by(|a, b| (a.idea, &a.pub_id).cmp(&(b.idea, &b.pub_id)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdeaRecord {
    pub idea: usize,
    pub name: String,
    pub first_year: i32,
    pub origin_country: Country,
    pub mention_pubs: BTreeSet<String>,
}

/// Keeps ideas first used in or after `min_year` whose first-year uses all
/// come from a single country, which becomes the origin.
pub fn first_usage(ideas: &[String], uses: &[IdeaUse], min_year: i32) -> Vec<IdeaRecord> {
    let mut grouped: BTreeMap<usize, Vec<&IdeaUse>> = BTreeMap::new();
    for u in uses {
        grouped.entry(u.idea).or_default().push(u);
    }
    let mut out = Vec::new();
    for (idea, us) in grouped {
        let first_year = us.iter().map(|u| u.year).min().expect("non-empty group");
        if first_year < min_year {
            continue;
        }
        let first: BTreeSet<&Country> = us
            .iter()
            .filter(|u| u.year == first_year)
            .flat_map(|u| u.countries.iter())
            .collect();
        if first.len() != 1 {
            continue;
        }
        out.push(IdeaRecord {
            idea,
            name: ideas[idea].clone(),
            first_year,
            origin_country: (*first.iter().next().unwrap()).clone(),
            mention_pubs: us.iter().map(|u| u.pub_id.clone()).collect(),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadDiffusion {
    pub origin: Country,
    pub destination: Country,
    pub n_origin_ideas: usize,
    pub n_diffused: usize,
    pub fraction: f64,
}

/// For each origin with at least one idea and every other country in
/// `countries`, the share of the origin's ideas that the destination used in
/// a year strictly after the idea's first year.
pub fn diffusion_fractions(
    records: &[IdeaRecord],
    uses: &[IdeaUse],
    countries: &BTreeSet<Country>,
) -> Vec<DyadDiffusion> {
    let first: HashMap<usize, i32> = records.iter().map(|r| (r.idea, r.first_year)).collect();
    let mut adopters: HashMap<usize, BTreeSet<&Country>> = HashMap::new();
    for u in uses {
        if let Some(&fy) = first.get(&u.idea) {
            if u.year > fy {
                adopters.entry(u.idea).or_default().extend(u.countries.iter());
            }
        }
    }
    let mut by_origin: BTreeMap<&Country, Vec<usize>> = BTreeMap::new();
    for r in records {
        by_origin.entry(&r.origin_country).or_default().push(r.idea);
    }
    let mut out = Vec::new();
    for (origin, ids) in by_origin {
        for dest in countries.iter().filter(|c| *c != origin) {
            let n_diffused = ids
                .iter()
                .filter(|i| adopters.get(i).is_some_and(|a| a.contains(dest)))
                .count();
            out.push(DyadDiffusion {
                origin: origin.clone(),
                destination: dest.clone(),
                n_origin_ideas: ids.len(),
                n_diffused,
                fraction: n_diffused as f64 / ids.len() as f64,
            });
        }
    }
    out
}

fn join_countries(c: &BTreeSet<Country>) -> String {
    c.iter().map(Country::as_str).collect::<Vec<_>>().join("|")
}

pub fn idea_mentions_tsv(ideas: &[String], uses: &[IdeaUse]) -> String {
    let mut rows: Vec<&IdeaUse> = uses.iter().collect();
    rows.sort_by(|a, b| (&ideas[a.idea], &a.pub_id).cmp(&(&ideas[b.idea], &b.pub_id)));
    let mut w = TsvWriter::new(&["idea", "pub_id", "year", "countries"]);
    for u in rows {
        w.row([ideas[u.idea].clone(), u.pub_id.clone(), u.year.to_string(), join_countries(&u.countries)]);
    }
    w.finish()
}

pub fn idea_records_tsv(records: &[IdeaRecord]) -> String {
    let mut rows: Vec<&IdeaRecord> = records.iter().collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    let mut w = TsvWriter::new(&["idea", "first_year", "origin_country", "n_mentions"]);
    for r in rows {
        w.row([
            r.name.clone(),
            r.first_year.to_string(),
            r.origin_country.to_string(),
            r.mention_pubs.len().to_string(),
        ]);
    }
    w.finish()
}

pub fn dyad_diffusion_tsv(rows: &[DyadDiffusion]) -> String {
    let mut w = TsvWriter::new(&["origin", "destination", "n_origin_ideas", "n_diffused", "fraction"]);
    for d in rows {
        w.row([
            d.origin.to_string(),
            d.destination.to_string(),
            d.n_origin_ideas.to_string(),
            d.n_diffused.to_string(),
            fmt_f64(d.fraction),
        ]);
    }
    w.finish()
}
