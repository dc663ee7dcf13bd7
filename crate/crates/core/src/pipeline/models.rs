//! Assembles the regression datasets from pipeline results and fits the
//! nested model columns of each family.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::Sign;
use crate::ideas::{DyadDiffusion, IdeaRecord, IdeaUse};
use crate::ingest::{CountryYearCovariates, CountryYearRow, DyadCovariates, DyadRow};
use crate::netbuild::AggregateNetwork;
use crate::par::{self, Execution};
use crate::regress::{
    build_design, fit_logistic, fit_sign_multinomial, fit_twoway_fe, Feature, MultinomialFit, PanelData, PanelRow,
    RegressionFit, Transform,
};
use crate::scimetrics::{CountryYearMetrics, DyadMetrics};
use crate::{Country, Result};

/// Everything the model families read.
pub struct ModelInputs<'a> {
    pub years: (i32, i32),
    /// Year whose covariates describe the cross-sectional models.
    pub reference_year: i32,
    pub countries: &'a BTreeSet<Country>,
    pub aggregate: &'a AggregateNetwork,
    pub centrality: &'a BTreeMap<Country, f64>,
    pub country_year: &'a CountryYearCovariates,
    pub dyad: &'a DyadCovariates,
    pub metrics: &'a BTreeMap<(Country, i32), CountryYearMetrics>,
    pub dyad_metrics: &'a BTreeMap<(Country, Country, i32), DyadMetrics>,
    /// Topic distance at the field level for the reference year.
    pub field_distance: &'a BTreeMap<(Country, Country), f64>,
    pub self_preference: &'a BTreeMap<(Country, i32), f64>,
    pub ideas: Option<IdeaInputs<'a>>,
    pub exec: Execution,
}

pub struct IdeaInputs<'a> {
    pub records: &'a [IdeaRecord],
    pub uses: &'a [IdeaUse],
    pub diffusion: &'a [DyadDiffusion],
}

pub struct FitOutcome<T> {
    pub name: String,
    pub fit: Result<T>,
}

type Column = Vec<Option<f64>>;

struct Group {
    features: Vec<Feature>,
}

fn f(name: &str, values: Column) -> Feature {
    Feature::new(name, values)
}

fn log10(name: &str, values: Column) -> Feature {
    Feature::new(name, values).transform(Transform::Log10)
}

fn log10p1(name: &str, values: Column) -> Feature {
    Feature::new(name, values).transform(Transform::Log10Plus1)
}

fn flag(name: &str, values: Column) -> Feature {
    Feature::new(name, values).raw()
}

fn cumulative(groups: &[Group], upto: usize) -> Vec<Feature> {
    groups[..=upto].iter().flat_map(|g| g.features.iter().cloned()).collect()
}

impl ModelInputs<'_> {
    fn cy(&self, c: &Country, get: fn(&CountryYearRow) -> Option<f64>) -> Option<f64> {
        self.country_year.get(c, self.reference_year).and_then(get)
    }

    fn dy(&self, a: &Country, b: &Country, get: fn(&DyadRow) -> Option<f64>) -> Option<f64> {
        self.dyad.get(a, b).and_then(get)
    }

    fn edge(&self, s: &Country, t: &Country) -> Option<Sign> {
        self.aggregate.edges.get(&(s.clone(), t.clone())).map(|e| e.sign)
    }

    fn topic_distance(&self, a: &Country, b: &Country) -> Option<f64> {
        self.dyad_metrics
            .get(&(a.clone(), b.clone(), self.reference_year))
            .and_then(|d| d.topic_distance)
    }

    fn top_journal(&self, c: &Country) -> Option<f64> {
        self.metrics
            .get(&(c.clone(), self.reference_year))
            .and_then(|m| m.top_journal_fraction)
    }
}

/// Logistic models of the fraction of an origin's ideas later used by the
/// destination.
pub fn idea_diffusion_models(inp: &ModelInputs) -> Vec<FitOutcome<RegressionFit>> {
    let Some(ideas) = &inp.ideas else { return Vec::new() };
    let rows = ideas.diffusion;
    let mut originated: BTreeMap<&Country, usize> = BTreeMap::new();
    for r in ideas.records {
        *originated.entry(&r.origin_country).or_default() += 1;
    }
    let kept: BTreeSet<usize> = ideas.records.iter().map(|r| r.idea).collect();
    let mut used: BTreeMap<&Country, BTreeSet<usize>> = BTreeMap::new();
    for u in ideas.uses.iter().filter(|u| kept.contains(&u.idea)) {
        for c in &u.countries {
            used.entry(c).or_default().insert(u.idea);
        }
    }
    let col = |g: &dyn Fn(&DyadDiffusion) -> Option<f64>| -> Column { rows.iter().map(g).collect() };
    let sign_flag = |want: Sign| {
        col(&|d| Some(if inp.edge(&d.destination, &d.origin) == Some(want) { 1.0 } else { 0.0 }))
    };
    let groups = vec![
        Group {
            features: vec![
                log10("log_population_origin", col(&|d| inp.cy(&d.origin, |r| r.population))),
                log10("log_population_destination", col(&|d| inp.cy(&d.destination, |r| r.population))),
                log10("log_gdp_pc_origin", col(&|d| inp.cy(&d.origin, |r| r.gdp_pc))),
                log10("log_gdp_pc_destination", col(&|d| inp.cy(&d.destination, |r| r.gdp_pc))),
                f("n_ideas_origin", col(&|d| Some(originated.get(&d.origin).copied().unwrap_or(0) as f64))),
                f("n_ideas_destination", col(&|d| Some(used.get(&d.destination).map_or(0, BTreeSet::len) as f64))),
            ],
        },
        Group {
            features: vec![
                f("topic_distance", col(&|d| inp.topic_distance(&d.origin, &d.destination))),
                log10("log_distance", col(&|d| inp.dy(&d.origin, &d.destination, |r| r.distance_km))),
                flag("same_language", col(&|d| inp.dy(&d.origin, &d.destination, |r| r.same_language))),
            ],
        },
        Group {
            features: vec![flag("positive_edge", sign_flag(Sign::Positive)), flag("negative_edge", sign_flag(Sign::Negative))],
        },
        Group {
            features: vec![
                f("centrality_origin", col(&|d| Some(inp.centrality.get(&d.origin).copied().unwrap_or(0.0)))),
                f("centrality_destination", col(&|d| Some(inp.centrality.get(&d.destination).copied().unwrap_or(0.0)))),
            ],
        },
    ];
    let y: Column = rows.iter().map(|d| Some(d.fraction)).collect();
    let idx: Vec<usize> = (0..groups.len()).collect();
    par::map(inp.exec, &idx, |&m| FitOutcome {
        name: format!("idea_diffusion_m{}", m + 1),
        fit: build_design(&cumulative(&groups, m), &y).and_then(|(d, yy)| fit_logistic(&d, &yy, None)),
    })
}

/// Multinomial models of the aggregate edge sign over all ordered pairs of
/// scored countries; no edge is the reference category.
pub fn edge_sign_models(inp: &ModelInputs) -> Vec<FitOutcome<MultinomialFit>> {
    let pairs: Vec<(&Country, &Country)> = inp
        .countries
        .iter()
        .flat_map(|a| inp.countries.iter().filter(move |b| *b != a).map(move |b| (a, b)))
        .collect();
    let col = |g: &dyn Fn(&Country, &Country) -> Option<f64>| -> Column { pairs.iter().map(|(a, b)| g(a, b)).collect() };
    let groups = vec![
        Group {
            features: vec![
                log10("log_gdp_pc_source", col(&|a, _| inp.cy(a, |r| r.gdp_pc))),
                log10("log_gdp_pc_target", col(&|_, b| inp.cy(b, |r| r.gdp_pc))),
                log10("log_population_source", col(&|a, _| inp.cy(a, |r| r.population))),
                log10("log_population_target", col(&|_, b| inp.cy(b, |r| r.population))),
            ],
        },
        Group {
            features: vec![
                log10("log_distance", col(&|a, b| inp.dy(a, b, |r| r.distance_km))),
                flag("same_continent", col(&|a, b| inp.dy(a, b, |r| r.same_continent))),
                f("field_distance", col(&|a, b| inp.field_distance.get(&(a.clone(), b.clone())).copied())),
            ],
        },
        Group {
            features: vec![
                log10p1("log_trade_volume", col(&|a, b| inp.dy(a, b, |r| r.trade_volume))),
                flag("same_language", col(&|a, b| inp.dy(a, b, |r| r.same_language))),
            ],
        },
        Group {
            features: vec![
                f("democracy_source", col(&|a, _| inp.cy(a, |r| r.democracy))),
                f("democracy_target", col(&|_, b| inp.cy(b, |r| r.democracy))),
                f(
                    "democracy_distance",
                    col(&|a, b| Some((inp.cy(a, |r| r.democracy)? - inp.cy(b, |r| r.democracy)?).abs())),
                ),
                flag("research_agreement", col(&|a, b| inp.dy(a, b, |r| r.sta_flag))),
            ],
        },
        Group {
            features: vec![
                log10p1(
                    "log_collaboration",
                    col(&|a, b| {
                        inp.dyad_metrics
                            .get(&(a.clone(), b.clone(), inp.reference_year))
                            .map(|d| d.collaboration_strength as f64)
                    }),
                ),
                f("top_journal_source", col(&|a, _| inp.top_journal(a))),
                f("top_journal_target", col(&|_, b| inp.top_journal(b))),
            ],
        },
    ];
    let signs: Vec<i8> = pairs.iter().map(|(a, b)| inp.edge(a, b).map_or(0, Sign::as_i8)).collect();
    let y: Column = signs.iter().map(|&s| Some(f64::from(s))).collect();
    let idx: Vec<usize> = (0..groups.len()).collect();
    par::map(inp.exec, &idx, |&m| FitOutcome {
        name: format!("edge_sign_m{}", m + 1),
        fit: build_design(&cumulative(&groups, m), &y).and_then(|(d, yy)| {
            let s: Vec<i8> = yy.iter().map(|&v| v as i8).collect();
            fit_sign_multinomial(&d, &s)
        }),
    })
}

/// Outcomes of the self-preference panels.
pub const PANEL_OUTCOMES: [&str; 4] = ["top_journal_fraction", "diversity", "log_patents_resident", "log_patents_total"];

/// Two-way fixed-effects panels over (country, year) rows that have a
/// self-preference score, one nested family per outcome.
pub fn self_preference_models(inp: &ModelInputs) -> Vec<(String, Vec<FitOutcome<RegressionFit>>)> {
    let keys: Vec<&(Country, i32)> = inp
        .self_preference
        .keys()
        .filter(|(_, y)| (inp.years.0..=inp.years.1).contains(y))
        .collect();
    let cy = |get: fn(&CountryYearRow) -> Option<f64>| -> Column {
        keys.iter().map(|(c, y)| inp.country_year.get(c, *y).and_then(get)).collect()
    };
    let met = |get: fn(&CountryYearMetrics) -> Option<f64>| -> Column {
        keys.iter().map(|k| inp.metrics.get(k).and_then(get)).collect()
    };
    let groups = vec![
        Group {
            features: vec![log10("log_population", cy(|r| r.population)), log10("log_gni", cy(|r| r.gni))],
        },
        Group {
            features: vec![
                log10("log_n_publications", met(|m| Some(m.n_publications as f64))),
                f("rd_gdp_pct", cy(|r| r.rd_gdp_pct)),
            ],
        },
        Group {
            features: vec![f("frac_national_authors", met(|m| m.frac_national_authors))],
        },
        Group {
            features: vec![f("self_preference", keys.iter().map(|k| inp.self_preference.get(*k).copied()).collect())],
        },
    ];
    let log_count = |v: Option<f64>| v.filter(|x| *x >= 0.0).map(|x| (x + 1.0).log10());
    let outcomes: Vec<(&str, Column)> = vec![
        (PANEL_OUTCOMES[0], met(|m| m.top_journal_fraction)),
        (PANEL_OUTCOMES[1], met(|m| m.diversity)),
        (PANEL_OUTCOMES[2], cy(|r| r.patents_resident).into_iter().map(log_count).collect()),
        (PANEL_OUTCOMES[3], cy(|r| r.patents_total).into_iter().map(log_count).collect()),
    ];
    let jobs: Vec<(usize, usize)> = (0..outcomes.len()).flat_map(|o| (0..groups.len()).map(move |m| (o, m))).collect();
    let fits = par::map(inp.exec, &jobs, |&(o, m)| FitOutcome {
        name: format!("self_{}_m{}", outcomes[o].0, m + 1),
        fit: build_design(&cumulative(&groups, m), &outcomes[o].1).and_then(|(d, y)| {
            let panel = PanelData {
                feature_names: d.names.clone(),
                rows: d
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| PanelRow {
                        unit: keys[r].0.to_string(),
                        period: keys[r].1,
                        features: d.x.row(i).iter().map(|v| Some(*v)).collect(),
                        outcome: Some(y[i]),
                    })
                    .collect(),
            };
            fit_twoway_fe(&panel)
        }),
    });
    let mut out: Vec<(String, Vec<FitOutcome<RegressionFit>>)> =
        outcomes.iter().map(|(n, _)| (n.to_string(), Vec::new())).collect();
    for ((o, _), fit) in jobs.into_iter().zip(fits) {
        out[o].1.push(fit);
    }
    out
}
