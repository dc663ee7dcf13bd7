//! Deterministic synthetic world: countries XA, XB, ... over fifteen years
//! with a planted positive preference XA -> XB and a planted negative
//! preference XA -> XC, plus covariates, titles/abstracts and an idea master
//! list.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal};

use crate::ideas::{render, tokenize};
use crate::{Error, Result};

/// Country codes for a world of `n` countries (3 to 26).
pub fn country_codes(n: usize) -> Vec<String> {
    (b'A'..=b'Z').take(n).map(|c| format!("X{}", c as char)).collect()
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub seed: u64,
    pub countries: usize,
    pub publications: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub refs_per_publication: usize,
    /// Citation weight multiplier XA applies to publications with XB.
    pub favored: f64,
    /// Citation weight multiplier XA applies to publications with XC.
    pub disfavored: f64,
    /// Multiplier for citing within one's own bloc; its inverse applies
    /// across blocs.
    pub bloc_affinity: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            seed: 7,
            countries: 5,
            publications: 5000,
            first_year: 2003,
            last_year: 2017,
            refs_per_publication: 12,
            favored: 4.0,
            disfavored: 0.25,
            bloc_affinity: 2.0,
        }
    }
}

/// Generated input files, as text.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub publications: String,
    pub citations: String,
    pub covariates_cy: String,
    pub covariates_dyad: String,
    pub ideas_master: String,
    pub texts: String,
    pub config: String,
}

const FIELDS: usize = 3;
const VENUES_PER_FIELD: usize = 8;
const CONCEPTS_PER_FIELD: usize = 6;
const AUTHORS_PER_COUNTRY: usize = 150;
const AFFILIATIONS_PER_COUNTRY: usize = 12;
const LAG_WEIGHTS: [f64; 6] = [0.1, 0.25, 0.25, 0.2, 0.12, 0.08];
const IDEAS: usize = 60;

const IDEA_HEADS: [&str; 12] = [
    "sparse", "quantum", "neural", "random", "dark", "soft", "thermal", "optical", "graphene", "lipid", "tensor",
    "swarm",
];
const IDEA_TAILS: [&str; 10] = [
    "kernels", "dots", "networks", "walks", "matter", "robots", "pumps", "combs", "sensors", "membranes",
];

const FILLER: [&str; 30] = [
    "we", "study", "a", "new", "method", "for", "the", "of", "and", "results", "show", "that", "this", "approach",
    "data", "in", "our", "using", "analysis", "on", "with", "is", "are", "based", "large", "small", "under", "across",
    "three", "two",
];

struct Profile {
    bloc: usize,
    share: f64,
    gdp_pc: f64,
    population: f64,
    rd: f64,
    democracy: f64,
    xy: (f64, f64),
    language: usize,
    /// Multiplier on the chance of picking up a foreign idea.
    adoption: f64,
}

fn profiles(n: usize, rng: &mut ChaCha8Rng) -> Vec<Profile> {
    let spread = LogNormal::new(0.0, 0.6).expect("lognormal");
    (0..n)
        .map(|c| {
            let gdp_pc = 25_000.0 * spread.sample(rng);
            let bloc = match c {
                0 | 1 => 0,
                2 => 1,
                _ => c % 2,
            };
            Profile {
                bloc,
                share: if c == 0 { 3.0 } else { 1.0 / (1.0 + c as f64).powf(0.5) },
                gdp_pc,
                population: 5.0e7 * spread.sample(rng) * spread.sample(rng),
                rd: (0.4 + gdp_pc / 20_000.0 * rng.random_range(0.5..1.2)).min(4.5),
                democracy: f64::from(rng.random_range(-10..=10)),
                xy: (rng.random_range(0.0..10.0), rng.random_range(0.0..5.0)),
                language: 2 * bloc + rng.random_range(0..2),
                adoption: spread.sample(rng),
            }
        })
        .collect()
}

struct Pub {
    year: i32,
    countries: Vec<usize>,
    field: usize,
    venue: usize,
    concepts: BTreeSet<usize>,
    authors: BTreeSet<usize>,
    quality: f64,
}

struct Idea {
    phrase: String,
    origin: usize,
    /// A second country also uses the idea in its first year.
    rival: Option<usize>,
    birth: i32,
}

fn publication_years(opts: &SynthOptions) -> Vec<i32> {
    let years: Vec<i32> = (opts.first_year..=opts.last_year).collect();
    let w: Vec<f64> = years.iter().map(|y| 1.0 + 0.05 * f64::from(y - opts.first_year)).collect();
    let total: f64 = w.iter().sum();
    let mut counts: Vec<usize> = w.iter().map(|x| (x / total * opts.publications as f64).floor() as usize).collect();
    let mut short = opts.publications - counts.iter().sum::<usize>();
    let mut i = counts.len();
    while short > 0 {
        i = if i == 0 { counts.len() - 1 } else { i - 1 };
        counts[i] += 1;
        short -= 1;
    }
    years.iter().zip(counts).flat_map(|(&y, n)| std::iter::repeat_n(y, n)).collect()
}

fn make_publications(opts: &SynthOptions, world: &[Profile], rng: &mut ChaCha8Rng) -> Vec<Pub> {
    let share = WeightedIndex::new(world.iter().map(|p| p.share)).expect("weights");
    let venue_q: Vec<f64> = {
        let d = LogNormal::new(0.0, 0.5).expect("lognormal");
        (0..FIELDS * VENUES_PER_FIELD).map(|_| d.sample(rng)).collect()
    };
    let quality = LogNormal::new(0.0, 0.8).expect("lognormal");
    publication_years(opts)
        .into_iter()
        .map(|year| {
            let c0 = share.sample(rng);
            let mut countries = vec![c0];
            if rng.random_bool(0.15) {
                let c1 = share.sample(rng);
                if c1 != c0 {
                    countries.push(c1);
                }
            }
            let field = (c0 + rng.random_range(0..FIELDS + 1)) % FIELDS;
            let venue = field * VENUES_PER_FIELD + rng.random_range(0..VENUES_PER_FIELD);
            let mut concepts = BTreeSet::new();
            for _ in 0..rng.random_range(1..=3) {
                let lean = (c0 + rng.random_range(0..3)) % CONCEPTS_PER_FIELD;
                concepts.insert(field * CONCEPTS_PER_FIELD + lean);
            }
            let mut authors = BTreeSet::new();
            for &c in &countries {
                for _ in 0..rng.random_range(1..=3) {
                    authors.insert(c * AUTHORS_PER_COUNTRY + rng.random_range(0..AUTHORS_PER_COUNTRY));
                }
            }
            Pub {
                year,
                countries,
                field,
                venue,
                concepts,
                authors,
                quality: venue_q[venue] * quality.sample(rng),
            }
        })
        .collect()
}

/// Weight a publication whose lead country is `citer` puts on one with
/// countries `cited`.
fn citation_bias(citer: usize, cited: &[usize], world: &[Profile], opts: &SynthOptions) -> f64 {
    let lead = cited[0];
    let mut w = if world[lead].bloc == world[citer].bloc {
        opts.bloc_affinity
    } else {
        1.0 / opts.bloc_affinity
    };
    if citer == 0 {
        if cited.contains(&1) {
            w *= opts.favored;
        }
        if cited.contains(&2) {
            w *= opts.disfavored;
        }
    }
    w
}

fn make_citations(pubs: &[Pub], world: &[Profile], opts: &SynthOptions, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let by_year: Vec<Vec<usize>> = (opts.first_year..=opts.last_year)
        .map(|y| (0..pubs.len()).filter(|&i| pubs[i].year == y).collect())
        .collect();
    // Per cited year, one sampler per citing lead country.
    let samplers: Vec<Option<Vec<WeightedIndex<f64>>>> = by_year
        .iter()
        .map(|ids| {
            (0..world.len())
                .map(|citer| {
                    let w = ids
                        .iter()
                        .map(|&i| pubs[i].quality * citation_bias(citer, &pubs[i].countries, world, opts));
                    WeightedIndex::new(w).ok()
                })
                .collect()
        })
        .collect();
    let mut links = BTreeSet::new();
    for (i, p) in pubs.iter().enumerate() {
        let yi = (p.year - opts.first_year) as usize;
        let lags: Vec<f64> = (0..LAG_WEIGHTS.len())
            .map(|l| if l <= yi && samplers[yi - l].is_some() { LAG_WEIGHTS[l] } else { 0.0 })
            .collect();
        let Ok(lag) = WeightedIndex::new(&lags) else { continue };
        let which = p.countries[0];
        for _ in 0..opts.refs_per_publication {
            let ty = yi - lag.sample(rng);
            let s = samplers[ty].as_ref().expect("non-empty year");
            let j = by_year[ty][s[which].sample(rng)];
            if j != i {
                links.insert((i, j));
            }
        }
    }
    links.into_iter().collect()
}

/// Two-word phrases whose preprocessed form is stable, so a master line
/// written in stemmed form matches the surface phrase in text.
fn idea_phrases() -> Vec<String> {
    IDEA_HEADS
        .iter()
        .flat_map(|h| IDEA_TAILS.iter().map(move |t| format!("{h} {t}")))
        .filter(|p| {
            let once = tokenize(p);
            once.len() == 2 && tokenize(&render(&once)) == once
        })
        .step_by(2)
        .take(IDEAS)
        .collect()
}

fn make_ideas(opts: &SynthOptions, world: &[Profile], rng: &mut ChaCha8Rng) -> Vec<Idea> {
    let share = WeightedIndex::new(world.iter().map(|p| p.share)).expect("weights");
    idea_phrases()
        .into_iter()
        .enumerate()
        .map(|(k, phrase)| {
            let origin = share.sample(rng);
            let rival = (k % 7 == 3).then(|| (origin + rng.random_range(1..world.len())) % world.len());
            let birth = opts.first_year + 1 + rng.random_range(0..(opts.last_year - opts.first_year - 4).max(1));
            Idea {
                phrase,
                origin,
                rival,
                birth,
            }
        })
        .collect()
}

/// Which ideas each publication mentions. An idea is seeded by solo
/// publications of its origin (and rival) in its birth year; afterwards
/// others pick it up at a rate set by their adoption propensity, and XA
/// picks up XB's ideas faster.
fn assign_mentions(pubs: &[Pub], ideas: &[Idea], world: &[Profile], rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); pubs.len()];
    for (k, idea) in ideas.iter().enumerate() {
        let mut seeded: BTreeSet<usize> = BTreeSet::new();
        for (i, p) in pubs.iter().enumerate() {
            let solo = p.countries.len() == 1;
            let from_origin = p.countries.contains(&idea.origin);
            let from_rival = idea.rival.is_some_and(|r| p.countries.contains(&r));
            let prob = if p.year < idea.birth {
                0.0
            } else if p.year == idea.birth {
                let lead = p.countries[0];
                if solo && (from_origin || from_rival) {
                    if seeded.contains(&lead) {
                        0.2
                    } else {
                        1.0
                    }
                } else {
                    0.0
                }
            } else if from_origin {
                0.06
            } else {
                let c = p.countries[0];
                let boost = if c == 0 && idea.origin == 1 { 6.0 } else { 1.0 };
                (0.0004 * world[c].adoption * boost).min(0.5)
            };
            if prob > 0.0 && rng.random_bool(prob) {
                out[i].push(k);
                if p.year == idea.birth {
                    seeded.insert(p.countries[0]);
                }
            }
        }
    }
    out
}

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words).map(|_| FILLER[rng.random_range(0..FILLER.len())]).collect::<Vec<_>>().join(" ")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn make_text(ideas: &[Idea], mentioned: &[usize], year: i32, rng: &mut ChaCha8Rng) -> (String, String) {
    let n = rng.random_range(3..6);
    let mut title = capitalize(&sentence(rng, n));
    let mut rest = mentioned.iter();
    if let Some(&k) = rest.next() {
        write!(title, " with {}", ideas[k].phrase).unwrap();
    }
    let mut sentences: Vec<String> = (0..rng.random_range(2..4))
        .map(|_| {
            let n = rng.random_range(5..10);
            capitalize(&sentence(rng, n))
        })
        .collect();
    let len = sentences.len();
    for (n, &k) in rest.enumerate() {
        write!(sentences[n % len], " {} {}", ideas[k].phrase, sentence(rng, 2)).unwrap();
    }
    // A boilerplate line naming an idea that must not count as a mention.
    if rng.random_bool(0.25) {
        let decoy = &ideas[rng.random_range(0..ideas.len())].phrase;
        sentences.push(format!("Copyright {year} {} Society", capitalize(decoy)));
    }
    (title, format!("{}.", sentences.join(". ")))
}

fn covariates(opts: &SynthOptions, world: &[Profile], codes: &[String], rng: &mut ChaCha8Rng) -> (String, String) {
    let noise = Normal::new(0.0, 0.02).expect("normal");
    let mut cy = String::from("country\tyear\tgdp_pc\tgni\tpopulation\trd_gdp_pct\tdemocracy\tpatents_resident\tpatents_total\n");
    for (c, (code, p)) in codes.iter().zip(world).enumerate() {
        for year in opts.first_year..=opts.last_year {
            let t = f64::from(year - opts.first_year);
            let gdp = p.gdp_pc * (1.0 + 0.02 * t) * (1.0 + noise.sample(rng));
            let pop = p.population * (1.0 + 0.008 * t) * (1.0 + noise.sample(rng) / 4.0);
            let rd = p.rd * (1.0 + 0.01 * t) * (1.0 + noise.sample(rng));
            let patents = (pop * rd * gdp / 1.0e10 * (1.0 + 3.0 * noise.sample(rng))).round().max(0.0);
            let total = (patents * 1.4).round();
            let rd_cell = if c == 4 && t < 3.0 { "NA".to_string() } else { format!("{rd:.3}") };
            writeln!(
                cy,
                "{code}\t{year}\t{gdp:.1}\t{:.1}\t{pop:.0}\t{rd_cell}\t{}\t{patents}\t{total}",
                gdp * pop,
                p.democracy
            )
            .unwrap();
        }
    }
    let mut dy = String::from("origin\tdestination\tdistance_km\tsame_continent\tsame_language\ttrade_volume\tsta_flag\n");
    for (a, pa) in world.iter().enumerate() {
        for (b, pb) in world.iter().enumerate() {
            if a == b {
                continue;
            }
            let d = ((pa.xy.0 - pb.xy.0).powi(2) + (pa.xy.1 - pb.xy.1).powi(2)).sqrt() * 1000.0;
            let continent = u8::from((pa.xy.0 < 5.0) == (pb.xy.0 < 5.0));
            let language = u8::from(pa.language == pb.language);
            let trade = (pa.gdp_pc * pb.gdp_pc).sqrt() * 1e3 / (1.0 + d / 1000.0);
            let sta = u8::from((a * 7 + b * 7) % 3 == 0);
            writeln!(dy, "{}\t{}\t{d:.1}\t{continent}\t{language}\t{trade:.1}\t{sta}", codes[a], codes[b]).unwrap();
        }
    }
    (cy, dy)
}

pub fn generate(opts: &SynthOptions) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let codes = country_codes(opts.countries);
    let world = profiles(codes.len(), &mut rng);
    let pubs = make_publications(opts, &world, &mut rng);
    let links = make_citations(&pubs, &world, opts, &mut rng);
    let ideas = make_ideas(opts, &world, &mut rng);
    let mentions = assign_mentions(&pubs, &ideas, &world, &mut rng);

    let id = |i: usize| format!("P{i:05}");
    let mut p = String::from("pub_id\tyear\tvenue_id\tfield_id\tconcept_ids\tcountries\tauthor_ids\taffiliation_ids\n");
    let mut texts = String::from("pub_id\ttitle\tabstract\n");
    for (i, x) in pubs.iter().enumerate() {
        let mut cs: Vec<&str> = x.countries.iter().map(|&c| codes[c].as_str()).collect();
        cs.sort_unstable();
        let authors: Vec<String> = x
            .authors
            .iter()
            .map(|a| format!("A{}{:03}", codes[a / AUTHORS_PER_COUNTRY], a % AUTHORS_PER_COUNTRY))
            .collect();
        let affs: BTreeSet<String> = x
            .authors
            .iter()
            .map(|a| {
                format!(
                    "I{}{:02}",
                    codes[a / AUTHORS_PER_COUNTRY],
                    (a % AUTHORS_PER_COUNTRY) % AFFILIATIONS_PER_COUNTRY
                )
            })
            .collect();
        let concepts: Vec<String> = x.concepts.iter().map(|c| format!("C{c:02}")).collect();
        writeln!(
            p,
            "{}\t{}\tV{:02}\tF{}\t{}\t{}\t{}\t{}",
            id(i),
            x.year,
            x.venue,
            x.field,
            concepts.join("|"),
            cs.join("|"),
            authors.join("|"),
            affs.into_iter().collect::<Vec<_>>().join("|")
        )
        .unwrap();
        let (title, abs) = make_text(&ideas, &mentions[i], x.year, &mut rng);
        writeln!(texts, "{}\t{title}\t{abs}", id(i)).unwrap();
    }
    let mut c = String::from("citing_pub_id\tcited_pub_id\n");
    for (a, b) in links {
        writeln!(c, "{}\t{}", id(a), id(b)).unwrap();
    }
    let mut master = String::new();
    for idea in &ideas {
        writeln!(master, "{}", render(&tokenize(&idea.phrase))).unwrap();
    }
    let (cy, dy) = covariates(opts, &world, &codes, &mut rng);
    let config = format!(
        "# synthetic world, seed {}\npublications = publications.tsv\ncitations = citations.tsv\ncovariates-cy = covariates_country_year.tsv\ncovariates-dyad = covariates_dyad.tsv\nideas = ideas_master.txt\ntexts = texts.tsv\nmin-cited = 20\ntop-k = 3\nseed = {}\n",
        opts.seed, opts.seed
    );
    SynthCorpus {
        publications: p,
        citations: c,
        covariates_cy: cy,
        covariates_dyad: dy,
        ideas_master: master,
        texts,
        config,
    }
}

/// Writes the synthetic inputs plus `config.txt` into `dir`.
pub fn write_synthetic(dir: &Path, opts: &SynthOptions) -> Result<()> {
    if !(3..=26).contains(&opts.countries) || opts.publications == 0 || opts.last_year - opts.first_year < 5 {
        return Err(Error::Config(
            "synthetic world needs 3 to 26 countries, some publications and at least six years".into(),
        ));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let s = generate(opts);
    for (name, body) in [
        ("publications.tsv", &s.publications),
        ("citations.tsv", &s.citations),
        ("covariates_country_year.tsv", &s.covariates_cy),
        ("covariates_dyad.tsv", &s.covariates_dyad),
        ("ideas_master.txt", &s.ideas_master),
        ("texts.tsv", &s.texts),
        ("config.txt", &s.config),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_sized() {
        let opts = SynthOptions {
            publications: 600,
            ..Default::default()
        };
        let a = generate(&opts);
        let b = generate(&opts);
        assert_eq!(a.publications, b.publications);
        assert_eq!(a.citations, b.citations);
        assert_eq!(a.texts, b.texts);
        assert_eq!(a.publications.lines().count(), 601);
        assert!(!a.publications.contains("\t\t"));
    }

    #[test]
    fn enough_stable_idea_phrases() {
        let phrases = idea_phrases();
        assert_eq!(phrases.len(), IDEAS);
        for p in &phrases {
            let once = render(&tokenize(p));
            assert_eq!(tokenize(&once), tokenize(p), "{p}");
        }
    }
}
