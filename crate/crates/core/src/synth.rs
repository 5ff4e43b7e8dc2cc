//! Synthetic paper, patent and trial corpora with planted transfer dynamics.
//!
//! Every concept is a two-token pseudo-word phrase. A transfer-prone concept
//! gets a latent transfer year drawn from a constant yearly hazard after its
//! emergence; from `signal_lead` years before that year on, its papers carry
//! the enabled mechanism signals. Patent mentions are placed so the label
//! rule fires exactly in the planted year.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{Affiliation, AuthorRef, CorpusId, DisciplineWeight, Document};
use crate::features::{EasyWordList, SentimentLexicon};
use crate::phrase::{ConceptVocabulary, PhraseStats, Segmenter, Stoplist};
use crate::registry::{compute_emergence_years, label_transfers, yearly_doc_counts, DocConcepts};
use crate::text::tokenize;
use crate::{Error, Result};

const FIELDS: [&str; 6] = [
    "agriculture",
    "bio_health",
    "engineering",
    "humanities",
    "physical_math",
    "social",
];
const ENGINEERING: &str = "engineering";

/// Signal strengths, one per mechanism. 0 disables a mechanism; 1 is the
/// bundled scenario's setting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// More papers per year and more returning authors.
    pub hype: f64,
    /// Extra co-mentions with concepts that already transferred.
    pub contagion: f64,
    /// Papers tagged with the engineering discipline.
    pub engineering: f64,
    /// Positive-lexicon words in the abstract.
    pub sentiment: f64,
    /// Papers in venues that patents cite.
    pub venue_link: f64,
    /// Industry-affiliated co-authors.
    pub industry: f64,
}

impl Knobs {
    pub fn all(strength: f64) -> Knobs {
        Knobs {
            hype: strength,
            contagion: strength,
            engineering: strength,
            sentiment: strength,
            venue_link: strength,
            industry: strength,
        }
    }

    fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("hype", self.hype),
            ("contagion", self.contagion),
            ("engineering", self.engineering),
            ("sentiment", self.sentiment),
            ("venue_link", self.venue_link),
            ("industry", self.industry),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub start_year: i32,
    pub end_year: i32,
    pub n_concepts: usize,
    /// Concepts emerge uniformly over the `emergence_span` years after the start year.
    pub emergence_span: i32,
    /// Share of concepts that carry a latent transfer year.
    pub prone_fraction: f64,
    /// Yearly probability that a prone concept transfers, once eligible.
    pub transfer_hazard: f64,
    /// Minimum years between emergence and transfer.
    pub transfer_lag_min: i32,
    /// Years before the transfer year from which the signals are on.
    pub signal_lead: i32,
    /// Mean papers per concept and year.
    pub papers_per_year: f64,
    pub max_partners: usize,
    pub knobs: Knobs,
    pub n_academic_authors: usize,
    pub n_industry_authors: usize,
    pub n_venues: usize,
    pub linked_venue_fraction: f64,
    pub filler_words: usize,
    pub theta: usize,
    /// Field whose prone concepts also transfer into trials.
    pub trial_field: String,
    /// Most concept-bearing patents that fit into one year.
    pub patent_slots_per_year: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            start_year: 2000,
            end_year: 2019,
            n_concepts: 2000,
            emergence_span: 12,
            prone_fraction: 1.0,
            transfer_hazard: 0.07,
            transfer_lag_min: 1,
            signal_lead: 3,
            papers_per_year: 2.0,
            max_partners: 2,
            knobs: Knobs::all(1.0),
            n_academic_authors: 20_000,
            n_industry_authors: 5_000,
            n_venues: 300,
            linked_venue_fraction: 0.25,
            filler_words: 300,
            theta: 5,
            trial_field: "bio_health".to_string(),
            patent_slots_per_year: 5_000,
        }
    }
}

impl ScenarioConfig {
    /// The bundled scenario: 2,000 concepts over 2000-2019, every mechanism on.
    pub fn demo() -> Self {
        ScenarioConfig::default()
    }

    pub fn from_toml(contents: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(contents).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleScenario(m));
        if self.end_year - self.start_year < 3 {
            return bad("need at least four years".into());
        }
        if self.emergence_span < 1 || self.start_year + self.emergence_span > self.end_year {
            return bad(format!("emergence span {} does not fit the year range", self.emergence_span));
        }
        for (name, v) in [
            ("prone_fraction", self.prone_fraction),
            ("transfer_hazard", self.transfer_hazard),
            ("linked_venue_fraction", self.linked_venue_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        for (name, v) in self.knobs.values() {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("knob {name} must be a finite value >= 0, got {v}"));
            }
        }
        if self.n_concepts == 0 || self.theta == 0 || self.papers_per_year <= 0.0 {
            return bad("n_concepts, theta and papers_per_year must be positive".into());
        }
        if self.transfer_lag_min < 1 || self.signal_lead < 0 {
            return bad("transfer_lag_min must be >= 1 and signal_lead >= 0".into());
        }
        if self.n_academic_authors == 0 || self.n_industry_authors == 0 || self.n_venues < 2 {
            return bad("author and venue pools are too small".into());
        }
        if self.max_partners + 1 > self.n_concepts {
            return bad("max_partners must be below n_concepts".into());
        }
        if !FIELDS.contains(&self.trial_field.as_str()) {
            return bad(format!("unknown trial field `{}`", self.trial_field));
        }
        // two-syllable pseudo-words leave room for about 9,000 of each kind
        if self.n_concepts > 8_000 || self.filler_words > 8_000 {
            return bad("vocabulary exceeds the pseudo-word space".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedClass {
    Prone,
    NotProne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub phrase: String,
    pub planted_class: PlantedClass,
    /// Planted patent transfer year when it falls inside the corpus years.
    pub transfer_year: Option<i32>,
    pub transfer_year_trials: Option<i32>,
    pub emergence_year: i32,
    pub home_field: String,
    /// Latent transfer year, possibly after the last corpus year.
    pub latent_transfer_year: Option<i32>,
    /// First year whose papers carry the mechanism signals.
    pub signal_start: Option<i32>,
    /// Papers with the concept as primary topic, per year.
    pub papers_per_year: BTreeMap<i32, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub theta: usize,
    pub records: Vec<GroundTruthRecord>,
}

impl GroundTruth {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(contents: &str, theta: usize) -> Result<Self> {
        let records = contents
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<GroundTruthRecord>, _>>()?;
        Ok(GroundTruth { theta, records })
    }

    pub fn get(&self, phrase: &str) -> Option<&GroundTruthRecord> {
        self.records.iter().find(|r| r.phrase == phrase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpora {
    pub papers: Vec<Document>,
    pub patents: Vec<Document>,
    pub trials: Vec<Document>,
    pub ground_truth: GroundTruth,
}

impl SyntheticCorpora {
    pub fn documents(&self, corpus: CorpusId) -> &[Document] {
        match corpus {
            CorpusId::Papers => &self.papers,
            CorpusId::Patents => &self.patents,
            CorpusId::Trials => &self.trials,
        }
    }

    pub fn to_jsonl(&self, corpus: CorpusId) -> String {
        let mut out = String::new();
        for d in self.documents(corpus) {
            out.push_str(&d.to_json_line());
            out.push('\n');
        }
        out
    }

    /// Writes `<corpus>.jsonl` for each corpus and `ground_truth.jsonl`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for c in CorpusId::ALL {
            fs::write(dir.join(format!("{c}.jsonl")), self.to_jsonl(c))?;
        }
        fs::write(dir.join("ground_truth.jsonl"), self.ground_truth.to_jsonl())?;
        Ok(())
    }
}

/// Unique pronounceable pseudo-words that avoid a set of reserved words.
struct WordMaker {
    used: HashSet<String>,
}

impl WordMaker {
    const ONSETS: [&'static str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr"];
    const VOWELS: [&'static str; 6] = ["a", "e", "i", "o", "u", "ai"];

    fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        WordMaker {
            used: reserved.into_iter().collect(),
        }
    }

    fn make(&mut self, rng: &mut ChaCha8Rng, syllables: usize, suffix: &str) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(Self::ONSETS.choose(rng).expect("non-empty"));
                w.push_str(Self::VOWELS.choose(rng).expect("non-empty"));
            }
            w.push_str(suffix);
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Concept {
    phrase: String,
    home: &'static str,
    emergence: i32,
    prone: bool,
    latent: Option<i32>,
}

impl Concept {
    fn active(&self, year: i32, lead: i32) -> bool {
        self.latent.is_some_and(|ty| year >= ty - lead)
    }
}

struct Pools {
    filler: Vec<String>,
    patent_filler: Vec<String>,
    trial_filler: Vec<String>,
    easy: Vec<String>,
    positive: Vec<String>,
    negative: Vec<String>,
    linked_venues: Vec<String>,
    other_venues: Vec<String>,
}

fn sentence(rng: &mut ChaCha8Rng, words: &[String], len: usize) -> String {
    (0..len)
        .map(|_| words.choose(rng).expect("non-empty").as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Abstract of `n_sentences` sentences. `emotional_rate` is the chance that a
/// token is drawn from the sentiment lexicon; `positive_bias` tilts those
/// tokens towards the positive list.
fn paper_abstract(rng: &mut ChaCha8Rng, pools: &Pools, emotional_rate: f64, positive_bias: f64) -> String {
    let n_sentences = rng.gen_range(3..=4);
    let mut sentences = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let len = rng.gen_range(7..=11);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen_bool(emotional_rate.min(1.0)) {
                    let positive = rng.gen_bool((0.5 + positive_bias).min(1.0));
                    let list = if positive { &pools.positive } else { &pools.negative };
                    list.choose(rng).expect("non-empty").as_str()
                } else if rng.gen_bool(0.4) {
                    pools.easy.choose(rng).expect("non-empty").as_str()
                } else {
                    pools.filler.choose(rng).expect("non-empty").as_str()
                }
            })
            .collect();
        sentences.push(words.join(" "));
    }
    sentences.join(". ")
}

fn title(phrases: &[&str]) -> String {
    phrases.join("; ")
}

/// Latent transfer year: `emergence + lag_min + Geometric(hazard)`.
fn latent_transfer(rng: &mut ChaCha8Rng, emergence: i32, config: &ScenarioConfig) -> Option<i32> {
    if config.transfer_hazard <= 0.0 {
        return None;
    }
    let mut y = emergence + config.transfer_lag_min;
    // bounded: beyond this the year no longer matters for any corpus
    let limit = config.end_year + 50;
    while y <= limit {
        if rng.gen_bool(config.transfer_hazard) {
            return Some(y);
        }
        y += 1;
    }
    None
}

/// Target-corpus mention years for one concept. Mentions before the planted
/// year stay below `theta`; the planted year brings the total to `theta`.
fn target_mentions(
    rng: &mut ChaCha8Rng,
    emergence: i32,
    planted: Option<i32>,
    end_year: i32,
    theta: usize,
    noise: bool,
) -> Vec<i32> {
    let mut years = Vec::new();
    match planted {
        Some(ty) => {
            let lo = emergence.max(ty - 2);
            let mut before = 0;
            if lo <= ty - 1 {
                before = rng.gen_range(0..theta);
                for _ in 0..before {
                    let y = rng.gen_range(lo..ty);
                    if y <= end_year {
                        years.push(y);
                    }
                }
            }
            if ty <= end_year {
                years.extend(std::iter::repeat_n(ty, theta - before));
                let after = Poisson::new(1.5).expect("positive rate");
                for y in ty + 1..=end_year {
                    let n = after.sample(rng) as usize;
                    years.extend(std::iter::repeat_n(y, n));
                }
            }
        }
        None if noise && theta > 1 => {
            let n = rng.gen_range(0..theta.min(3));
            for _ in 0..n {
                years.push(rng.gen_range(emergence..=end_year));
            }
        }
        None => {}
    }
    years.sort_unstable();
    years
}

/// Share of non-contagion partners drawn from the concept's own field.
const SAME_FIELD_PARTNER: f64 = 0.9;

fn disciplines(rng: &mut ChaCha8Rng, home: &str, engineering: bool) -> Vec<DisciplineWeight> {
    let dw = |code: &str, weight: f64| DisciplineWeight {
        code: code.to_string(),
        weight,
    };
    let other = |rng: &mut ChaCha8Rng, avoid: &str| loop {
        let f = *FIELDS.choose(rng).expect("non-empty");
        if f != avoid {
            return f;
        }
    };
    if engineering {
        if home == ENGINEERING {
            vec![dw(home, 0.7), dw(other(rng, home), 0.3)]
        } else {
            vec![dw(home, 0.7), dw(ENGINEERING, 0.3)]
        }
    } else if rng.gen_bool(0.8) {
        vec![dw(home, 1.0)]
    } else {
        vec![dw(home, 0.75), dw(neighbor_field(home), 0.25)]
    }
}

/// The next non-engineering field in `FIELDS` order; secondary codes of
/// ordinary papers come from there.
fn neighbor_field(home: &str) -> &'static str {
    let i = FIELDS.iter().position(|f| *f == home).unwrap_or(0);
    (1..FIELDS.len())
        .map(|k| FIELDS[(i + k) % FIELDS.len()])
        .find(|f| *f != ENGINEERING)
        .expect("several fields")
}

/// Generates the three corpora and the ground truth. Deterministic per seed.
pub fn generate(config: &ScenarioConfig) -> Result<SyntheticCorpora> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lexicon = SentimentLexicon::seed();
    let easy = EasyWordList::seed();
    let generic = Stoplist::generic();

    let reserved = lexicon
        .positive()
        .chain(lexicon.negative())
        .chain(easy.words())
        .map(str::to_string)
        .chain(generic.phrases().map(str::to_string))
        .collect::<Vec<_>>();
    let mut words = WordMaker::new(reserved);
    let pools = Pools {
        filler: (0..config.filler_words).map(|_| words.make(&mut rng, 3, "")).collect(),
        patent_filler: (0..config.filler_words).map(|_| words.make(&mut rng, 2, "x")).collect(),
        trial_filler: (0..config.filler_words).map(|_| words.make(&mut rng, 2, "q")).collect(),
        easy: easy
            .words()
            .filter(|w| !lexicon.is_emotional(w))
            .map(str::to_string)
            .collect(),
        positive: lexicon.positive().map(str::to_string).collect(),
        negative: lexicon.negative().map(str::to_string).collect(),
        linked_venues: Vec::new(),
        other_venues: Vec::new(),
    };
    let mut pools = pools;
    let n_linked = ((config.n_venues as f64) * config.linked_venue_fraction).round() as usize;
    let n_linked = n_linked.clamp(1, config.n_venues - 1);
    let venue_names: Vec<String> = (0..config.n_venues).map(|i| format!("venue{i:04}")).collect();
    pools.linked_venues = venue_names[..n_linked].to_vec();
    pools.other_venues = venue_names[n_linked..].to_vec();

    // concepts
    let mut concepts: Vec<Concept> = (0..config.n_concepts)
        .map(|_| {
            let phrase = format!("{} {}", words.make(&mut rng, 2, "n"), words.make(&mut rng, 2, "l"));
            let home = *FIELDS.choose(&mut rng).expect("non-empty");
            let emergence = config.start_year + rng.gen_range(1..=config.emergence_span);
            let prone = rng.gen_bool(config.prone_fraction);
            let latent = if prone {
                latent_transfer(&mut rng, emergence, config)
            } else {
                None
            };
            Concept {
                phrase,
                home,
                emergence,
                prone,
                latent,
            }
        })
        .collect();
    concepts.sort_by(|a, b| a.phrase.cmp(&b.phrase));
    let realized = |c: &Concept| c.latent.filter(|&y| y <= config.end_year);

    let author = |id: usize, industry: bool| AuthorRef {
        author_id: if industry { format!("ind{id:05}") } else { format!("aca{id:05}") },
        affiliation_kind: if industry { Affiliation::Industry } else { Affiliation::Academic },
    };

    let mut papers = Vec::new();
    let mut papers_per_year: Vec<BTreeMap<i32, u32>> = vec![BTreeMap::new(); concepts.len()];

    // start-year background papers: every filler word appears before any concept
    let mut background: Vec<String> = pools
        .filler
        .iter()
        .chain(&pools.easy)
        .chain(&pools.positive)
        .chain(&pools.negative)
        .cloned()
        .collect();
    background.shuffle(&mut rng);
    let mut chunks: Vec<Vec<String>> = Vec::new();
    for _ in 0..5 {
        chunks.extend(background.chunks(10).map(<[String]>::to_vec));
        background.shuffle(&mut rng);
    }
    for (i, chunk) in chunks.iter().enumerate() {
        papers.push(Document {
            doc_id: format!("P{}-b{i:05}", config.start_year),
            corpus_id: CorpusId::Papers,
            year: config.start_year,
            title: chunk[..3].join(" "),
            abstract_text: chunk[3..].join(" "),
            authors: vec![author(rng.gen_range(0..config.n_academic_authors), false)],
            venue_id: Some(venue_names[rng.gen_range(0..venue_names.len())].clone()),
            discipline_codes: vec![DisciplineWeight {
                code: FIELDS.choose(&mut rng).expect("non-empty").to_string(),
                weight: 1.0,
            }],
            cited_venue_ids: None,
        });
    }

    let k = &config.knobs;
    let base_rate = Poisson::new(config.papers_per_year).expect("positive rate");
    let boosted_rate = Poisson::new(config.papers_per_year * (1.0 + 1.5 * k.hype)).expect("positive rate");
    let mut previous_authors: Vec<Vec<(usize, bool)>> = vec![Vec::new(); concepts.len()];

    for year in config.start_year + 1..=config.end_year {
        let emerged: Vec<usize> = (0..concepts.len()).filter(|&c| concepts[c].emergence <= year).collect();
        let mut emerged_by_field: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &c in &emerged {
            emerged_by_field.entry(concepts[c].home).or_default().push(c);
        }
        let transferred: Vec<usize> = emerged
            .iter()
            .copied()
            .filter(|&c| realized(&concepts[c]).is_some_and(|ty| ty < year))
            .collect();
        let mut serial = 0usize;
        let mut year_authors: Vec<Vec<(usize, bool)>> = vec![Vec::new(); concepts.len()];
        for &c in &emerged {
            let concept = &concepts[c];
            let active = concept.active(year, config.signal_lead);
            let mut n = if active { boosted_rate.sample(&mut rng) } else { base_rate.sample(&mut rng) } as u32;
            if year == concept.emergence {
                n = n.max(1);
            }
            if n == 0 {
                continue;
            }
            papers_per_year[c].insert(year, n);
            for _ in 0..n {
                let mut members = vec![c];
                let n_partners = rng.gen_range(1..=config.max_partners);
                let contagion = if active && !transferred.is_empty() { k.contagion.min(1.0) } else { 0.0 };
                let mut guard = 0;
                while members.len() < 1 + n_partners && guard < 100 {
                    guard += 1;
                    let p = if rng.gen_bool(contagion) {
                        *transferred.choose(&mut rng).expect("non-empty")
                    } else if rng.gen_bool(SAME_FIELD_PARTNER) {
                        *emerged_by_field[concept.home].choose(&mut rng).expect("holds c")
                    } else {
                        *emerged.choose(&mut rng).expect("non-empty")
                    };
                    if !members.contains(&p) {
                        members.push(p);
                    }
                }

                let n_authors = rng.gen_range(1..=4);
                let industry_rate = if active { 0.1 + 0.5 * k.industry } else { 0.1 };
                let reuse_rate = if active { 0.6 * k.hype } else { 0.0 };
                let mut authors: Vec<(usize, bool)> = Vec::new();
                for _ in 0..n_authors {
                    let a = if rng.gen_bool(reuse_rate.min(1.0)) && !previous_authors[c].is_empty() {
                        *previous_authors[c].choose(&mut rng).expect("non-empty")
                    } else if rng.gen_bool(industry_rate.min(1.0)) {
                        (rng.gen_range(0..config.n_industry_authors), true)
                    } else {
                        (rng.gen_range(0..config.n_academic_authors), false)
                    };
                    if !authors.contains(&a) {
                        authors.push(a);
                    }
                }
                for &m in &members {
                    year_authors[m].extend(authors.iter().copied());
                }

                let linked_rate = if active { 0.25 + 0.6 * k.venue_link } else { 0.25 };
                let venue = if rng.gen_bool(linked_rate.min(1.0)) {
                    pools.linked_venues.choose(&mut rng)
                } else {
                    pools.other_venues.choose(&mut rng)
                }
                .expect("non-empty")
                .clone();
                let engineering = active && rng.gen_bool((0.8 * k.engineering).min(1.0));
                let emotional_rate = if active { 0.03 + 0.12 * k.sentiment } else { 0.03 };
                let positive_bias = if active { 0.5 * k.sentiment.min(1.0) } else { 0.0 };

                let phrases: Vec<&str> = members.iter().map(|&m| concepts[m].phrase.as_str()).collect();
                papers.push(Document {
                    doc_id: format!("P{year}-{serial:06}"),
                    corpus_id: CorpusId::Papers,
                    year,
                    title: title(&phrases),
                    abstract_text: paper_abstract(&mut rng, &pools, emotional_rate, positive_bias),
                    authors: authors.iter().map(|&(id, ind)| author(id, ind)).collect(),
                    venue_id: Some(venue),
                    discipline_codes: disciplines(&mut rng, concept.home, engineering),
                    cited_venue_ids: None,
                });
                serial += 1;
            }
        }
        for (c, list) in year_authors.into_iter().enumerate() {
            for a in list {
                if !previous_authors[c].contains(&a) {
                    previous_authors[c].push(a);
                }
            }
        }
    }

    // target corpora
    let mut patent_mentions: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut trial_mentions: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut trial_years: Vec<Option<i32>> = vec![None; concepts.len()];
    for (c, concept) in concepts.iter().enumerate() {
        for y in target_mentions(&mut rng, concept.emergence, concept.latent, config.end_year, config.theta, true) {
            patent_mentions.entry(y).or_default().push(c);
        }
        if concept.home == config.trial_field {
            let planted = concept.latent.map(|ty| ty + rng.gen_range(0..=2));
            trial_years[c] = planted.filter(|&y| y <= config.end_year);
            for y in target_mentions(&mut rng, concept.emergence, planted, config.end_year, config.theta, false) {
                trial_mentions.entry(y).or_default().push(c);
            }
        }
    }
    for (year, list) in &patent_mentions {
        if list.len() > config.patent_slots_per_year {
            return Err(Error::InfeasibleScenario(format!(
                "{} concept patents needed in {year}, only {} slots",
                list.len(),
                config.patent_slots_per_year
            )));
        }
    }

    let mut patents = Vec::new();
    let mut trials = Vec::new();
    for year in config.start_year..=config.end_year {
        let mut serial = 0usize;
        let cited = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let n = rng.gen_range(1..=3);
            let mut v: Vec<String> = pools.linked_venues.choose_multiple(rng, n).cloned().collect();
            v.sort();
            v
        };
        // background patents; in the start year they cite every linked venue
        let n_background = if year == config.start_year { pools.linked_venues.len() } else { 20 };
        for i in 0..n_background {
            let cites = if year == config.start_year {
                vec![pools.linked_venues[i].clone()]
            } else {
                cited(&mut rng)
            };
            patents.push(Document {
                doc_id: format!("X{year}-{serial:06}"),
                corpus_id: CorpusId::Patents,
                year,
                title: sentence(&mut rng, &pools.patent_filler, 4),
                abstract_text: sentence(&mut rng, &pools.patent_filler, 12),
                authors: Vec::new(),
                venue_id: None,
                discipline_codes: Vec::new(),
                cited_venue_ids: Some(cites),
            });
            serial += 1;
        }
        for &c in patent_mentions.get(&year).into_iter().flatten() {
            patents.push(Document {
                doc_id: format!("X{year}-{serial:06}"),
                corpus_id: CorpusId::Patents,
                year,
                title: format!("{}; {}", concepts[c].phrase, sentence(&mut rng, &pools.patent_filler, 3)),
                abstract_text: sentence(&mut rng, &pools.patent_filler, 12),
                authors: Vec::new(),
                venue_id: None,
                discipline_codes: Vec::new(),
                cited_venue_ids: Some(cited(&mut rng)),
            });
            serial += 1;
        }
        let mut serial = 0usize;
        for _ in 0..5 {
            trials.push(Document {
                doc_id: format!("T{year}-{serial:06}"),
                corpus_id: CorpusId::Trials,
                year,
                title: sentence(&mut rng, &pools.trial_filler, 4),
                abstract_text: sentence(&mut rng, &pools.trial_filler, 12),
                authors: Vec::new(),
                venue_id: None,
                discipline_codes: Vec::new(),
                cited_venue_ids: None,
            });
            serial += 1;
        }
        for &c in trial_mentions.get(&year).into_iter().flatten() {
            trials.push(Document {
                doc_id: format!("T{year}-{serial:06}"),
                corpus_id: CorpusId::Trials,
                year,
                title: format!("{}; {}", concepts[c].phrase, sentence(&mut rng, &pools.trial_filler, 3)),
                abstract_text: sentence(&mut rng, &pools.trial_filler, 12),
                authors: Vec::new(),
                venue_id: None,
                discipline_codes: Vec::new(),
                cited_venue_ids: None,
            });
            serial += 1;
        }
    }

    let records = concepts
        .iter()
        .enumerate()
        .map(|(c, concept)| GroundTruthRecord {
            phrase: concept.phrase.clone(),
            planted_class: if concept.prone {
                PlantedClass::Prone
            } else {
                PlantedClass::NotProne
            },
            transfer_year: realized(concept),
            transfer_year_trials: trial_years[c],
            emergence_year: concept.emergence,
            home_field: concept.home.to_string(),
            latent_transfer_year: concept.latent,
            signal_start: concept.latent.map(|ty| ty - config.signal_lead),
            papers_per_year: std::mem::take(&mut papers_per_year[c]),
        })
        .collect();

    Ok(SyntheticCorpora {
        papers,
        patents,
        trials,
        ground_truth: GroundTruth {
            theta: config.theta,
            records,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub phrase: String,
    /// `emergence`, `patents` or `trials`.
    pub what: String,
    pub expected: Option<i32>,
    pub observed: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n_concepts: usize,
    pub n_checks: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn agreement(&self) -> f64 {
        if self.n_checks == 0 {
            return 1.0;
        }
        1.0 - self.mismatches.len() as f64 / self.n_checks as f64
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "concepts={} checks={} mismatches={} agreement={:.4}\n",
            self.n_concepts,
            self.n_checks,
            self.mismatches.len(),
            self.agreement()
        );
        for m in &self.mismatches {
            writeln!(out, "{}\t{}\texpected={:?}\tobserved={:?}", m.phrase, m.what, m.expected, m.observed).unwrap();
        }
        out
    }
}

fn doc_concepts(docs: &[Document], segmenter: &Segmenter) -> Vec<DocConcepts> {
    docs.iter()
        .map(|d| {
            let ids = segmenter
                .segment_tokens(&tokenize(&d.text()))
                .into_iter()
                .map(|(id, _, _)| id)
                .collect();
            DocConcepts::new(d.doc_id.clone(), d.year, ids)
        })
        .collect()
}

/// Segments the corpora with the ground-truth phrases, re-runs emergence and
/// transfer labeling with `theta`, and lists every disagreement with the
/// planted values. Trial transfers are checked only when trials are given.
pub fn verify_ground_truth(
    papers: &[Document],
    patents: &[Document],
    trials: Option<&[Document]>,
    truth: &GroundTruth,
    theta: usize,
) -> VerificationReport {
    let vocabulary = ConceptVocabulary::from_phrases(truth.records.iter().map(|r| {
        (
            r.phrase.clone(),
            PhraseStats {
                frequency: 0,
                quality: 1.0,
            },
        )
    }));
    let segmenter = Segmenter::new(&vocabulary);
    let paper_docs = doc_concepts(papers, &segmenter);
    let emergence = compute_emergence_years(&paper_docs);
    let patent_usage = yearly_doc_counts(&doc_concepts(patents, &segmenter));
    let trial_usage = trials.map(|t| yearly_doc_counts(&doc_concepts(t, &segmenter)));
    let empty = BTreeMap::new();

    let mut mismatches = Vec::new();
    let mut n_checks = 0;
    let mut check = |phrase: &str, what: &str, expected: Option<i32>, observed: Option<i32>| {
        n_checks += 1;
        if expected != observed {
            mismatches.push(Mismatch {
                phrase: phrase.to_string(),
                what: what.to_string(),
                expected,
                observed,
            });
        }
    };
    for r in &truth.records {
        let id = segmenter.id_of(&r.phrase);
        let e = id.and_then(|i| emergence.get(&i).copied());
        check(&r.phrase, "emergence", Some(r.emergence_year), e);
        let label = |usage: &BTreeMap<usize, BTreeMap<i32, usize>>| match (id, e) {
            (Some(i), Some(e)) => label_transfers(e, usage.get(&i).unwrap_or(&empty), theta, None),
            _ => None,
        };
        check(&r.phrase, "patents", r.transfer_year, label(&patent_usage));
        if let Some(usage) = &trial_usage {
            check(&r.phrase, "trials", r.transfer_year_trials, label(usage));
        }
    }
    VerificationReport {
        n_concepts: truth.records.len(),
        n_checks,
        mismatches,
    }
}

/// Distinct years among the ground-truth emergence years.
pub fn emergence_years(truth: &GroundTruth) -> BTreeSet<i32> {
    truth.records.iter().map(|r| r.emergence_year).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            seed,
            n_concepts: 150,
            n_academic_authors: 3000,
            n_industry_authors: 800,
            filler_words: 120,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small(3)).unwrap();
        let b = generate(&small(3)).unwrap();
        for c in CorpusId::ALL {
            assert_eq!(a.to_jsonl(c), b.to_jsonl(c));
        }
        assert_eq!(a.ground_truth.to_jsonl(), b.ground_truth.to_jsonl());
        let c = generate(&small(4)).unwrap();
        assert_ne!(a.to_jsonl(CorpusId::Papers), c.to_jsonl(CorpusId::Papers));
    }

    #[test]
    fn records_are_valid_line_records() {
        let s = generate(&small(5)).unwrap();
        for c in CorpusId::ALL {
            for line in s.to_jsonl(c).lines() {
                let d = Document::from_record(line).unwrap();
                assert_eq!(d.corpus_id, c);
            }
        }
    }

    #[test]
    fn fresh_generation_verifies() {
        let s = generate(&small(6)).unwrap();
        let report = verify_ground_truth(&s.papers, &s.patents, Some(&s.trials), &s.ground_truth, 5);
        assert!(report.passed(), "{}", report.summary());
        assert!(s.ground_truth.records.iter().any(|r| r.transfer_year.is_some()));
    }

    #[test]
    fn no_patent_use_before_emergence() {
        let s = generate(&small(7)).unwrap();
        let vocab = ConceptVocabulary::from_phrases(
            s.ground_truth
                .records
                .iter()
                .map(|r| (r.phrase.clone(), PhraseStats { frequency: 0, quality: 1.0 })),
        );
        let seg = Segmenter::new(&vocab);
        for d in doc_concepts(&s.patents, &seg) {
            for id in d.concepts {
                let r = s.ground_truth.get(seg.phrase(id)).unwrap();
                assert!(d.year >= r.emergence_year);
            }
        }
    }

    #[test]
    fn truncation_unlabels_late_transfers() {
        let s = generate(&small(8)).unwrap();
        let cut = 2008;
        let keep = |docs: &[Document]| docs.iter().filter(|d| d.year <= cut).cloned().collect::<Vec<_>>();
        let report = verify_ground_truth(&keep(&s.papers), &keep(&s.patents), None, &s.ground_truth, 5);
        let late = s
            .ground_truth
            .records
            .iter()
            .filter(|r| r.transfer_year.is_some_and(|y| y > cut))
            .count();
        let patent_mismatches: Vec<&Mismatch> = report.mismatches.iter().filter(|m| m.what == "patents").collect();
        assert_eq!(patent_mismatches.len(), late);
        assert!(patent_mismatches.iter().all(|m| m.observed.is_none() && m.expected > Some(cut)));
    }

    #[test]
    fn raised_theta_detects_nothing() {
        let s = generate(&small(9)).unwrap();
        let report = verify_ground_truth(&s.papers, &s.patents, None, &s.ground_truth, 10_000);
        let detected = report
            .mismatches
            .iter()
            .filter(|m| m.what == "patents" && m.observed.is_some())
            .count();
        assert_eq!(detected, 0);
        let planted = s.ground_truth.records.iter().filter(|r| r.transfer_year.is_some()).count();
        assert_eq!(report.mismatches.len(), planted);
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let bad = ScenarioConfig {
            patent_slots_per_year: 1,
            ..small(1)
        };
        assert!(matches!(generate(&bad), Err(Error::InfeasibleScenario(_))));
        let bad = ScenarioConfig {
            prone_fraction: 1.5,
            ..small(1)
        };
        assert!(generate(&bad).is_err());
        let bad = ScenarioConfig {
            emergence_span: 40,
            ..small(1)
        };
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn scenario_parses_from_toml() {
        let c = ScenarioConfig::from_toml("seed = 9\nn_concepts = 50\n[knobs]\nhype = 0.5\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.n_concepts, 50);
        assert_eq!(c.knobs.hype, 0.5);
        assert_eq!(c.knobs.contagion, 0.0);
        assert!(ScenarioConfig::from_toml("seed = \"x\"").is_err());
    }
}
