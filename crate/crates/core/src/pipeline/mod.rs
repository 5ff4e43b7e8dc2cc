//! Stage runner behind the command line. Every stage reads declared inputs,
//! writes its outputs under a run directory named after the config digest,
//! and records both in a manifest so unchanged stages are skipped.

mod config;
pub mod study;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    apply_override, FieldsSection, GraphSection, ModelSection, Paths, PipelineConfig, SensitivitySection,
    SplitSection, StudySection,
};
pub use study::{build_study_registry, mine_papers, segment_all, Resources, StudyFrame};

use crate::corpus::{CorpusId, Document, DocumentStore, IngestReport, Taxonomy, VenueLinkTable};
use crate::dataset::{zscore_apply, ConceptLabels, Dataset, NormalizationStats, SplitPlan};
use crate::eval::{
    ablation_csv, ablation_run, auc, feature_groups, feature_importance, per_field_csv, per_field_eval,
    predictions_csv, repeat_runs, run_experiment, sensitivity_csv, sensitivity_run, EvalReport, ImportanceReport,
    Prediction, RepeatSummary, SweepAxis, SweepBase,
};
use crate::features::{feature_correlation, group_comparison, EasyWordList, FeatureMatrix, SentimentLexicon};
use crate::io_util::{file_digest, meta_header, parse_word_list};
use crate::models::{read_checkpoint, write_checkpoint, Checkpoint, ModelKind};
use crate::phrase::{ConceptVocabulary, Stoplist};
use crate::registry::{BurnInResult, ConceptRegistry};
use crate::synth::generate;
use crate::{Error, Result, FEATURE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Ingest,
    Mine,
    Registry,
    Graph,
    Features,
    Dataset,
    Train,
    Evaluate,
    Ablate,
    Sensitivity,
    Fields,
    All,
}

impl Stage {
    /// Stages chained by `all`, in dependency order. The generator is not
    /// part of the chain.
    pub const CHAIN: [Stage; 11] = [
        Stage::Ingest,
        Stage::Mine,
        Stage::Registry,
        Stage::Graph,
        Stage::Features,
        Stage::Dataset,
        Stage::Train,
        Stage::Evaluate,
        Stage::Ablate,
        Stage::Sensitivity,
        Stage::Fields,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Mine => "mine",
            Stage::Registry => "registry",
            Stage::Graph => "graph",
            Stage::Features => "features",
            Stage::Dataset => "dataset",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Ablate => "ablate",
            Stage::Sensitivity => "sensitivity",
            Stage::Fields => "fields",
            Stage::All => "all",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::CHAIN
            .into_iter()
            .chain([Stage::Synth, Stage::All])
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: Stage,
    /// The manifest matched and nothing was recomputed.
    pub skipped: bool,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub config_digest: String,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Input name -> sha256.
    pub inputs: BTreeMap<String, String>,
    /// Output path relative to the stage's base directory -> sha256.
    pub outputs: BTreeMap<String, String>,
}

/// Runs one stage, or the whole chain for [`Stage::All`], inside a worker
/// pool capped by `config.threads`.
pub fn run(config: &PipelineConfig, stage: Stage, force: bool) -> Result<Vec<StageOutcome>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        let ctx = Ctx::new(config);
        let stages: Vec<Stage> = if stage == Stage::All {
            Stage::CHAIN.to_vec()
        } else {
            vec![stage]
        };
        stages.into_iter().map(|s| ctx.run_stage(s, force)).collect()
    })
}

struct Ctx<'a> {
    config: &'a PipelineConfig,
    digest: String,
    seed: u64,
    run_dir: PathBuf,
}

/// Declared inputs: display name and path.
type Inputs = Vec<(String, PathBuf)>;

fn missing(stage: Stage, path: &Path) -> Error {
    Error::MissingArtifact(format!("stage {} needs {}", stage.as_str(), path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

/// Line records with `#` comment lines and blank lines skipped.
fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let contents = fs::read_to_string(path)?;
    contents
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| Document::from_record(l).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))))
        .collect()
}

fn strip_comments(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

/// JSON artifacts carry the run identity next to their payload.
#[derive(Serialize, Deserialize)]
struct Stamped<T> {
    config_digest: String,
    seed: u64,
    data: T,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    concepts: Vec<String>,
    fields: Vec<Option<String>>,
    dataset: Dataset,
}

#[derive(Serialize, Deserialize)]
struct EvaluationFile {
    target: CorpusId,
    reports: Vec<EvalReport>,
    repeats: BTreeMap<String, RepeatSummary>,
    importance: Option<ImportanceReport>,
}

impl<'a> Ctx<'a> {
    fn new(config: &'a PipelineConfig) -> Self {
        Ctx {
            config,
            digest: config.digest(),
            seed: config.seed,
            run_dir: config.run_dir(),
        }
    }

    fn corpus_file(&self, corpus: CorpusId) -> PathBuf {
        self.config.paths.corpora_dir.join(format!("{corpus}.jsonl"))
    }

    fn ingested(&self, corpus: CorpusId) -> PathBuf {
        self.run_dir.join("ingest").join(format!("{corpus}.jsonl"))
    }

    fn file(&self, rel: &str) -> PathBuf {
        self.run_dir.join(rel)
    }

    fn header(&self) -> String {
        meta_header(&self.digest, self.seed)
    }

    fn csv(&self, body: &str) -> String {
        format!("{}{body}", self.header())
    }

    fn stamped<T: Serialize>(&self, payload: T) -> String {
        to_json(&Stamped {
            config_digest: self.digest.clone(),
            seed: self.seed,
            data: payload,
        })
    }

    fn base_dir(&self, stage: Stage) -> PathBuf {
        match stage {
            Stage::Synth => self.config.paths.corpora_dir.clone(),
            _ => self.run_dir.join(stage.as_str()),
        }
    }

    fn manifest_path(&self, stage: Stage) -> PathBuf {
        match stage {
            Stage::Synth => self.config.paths.corpora_dir.join("synth_manifest.json"),
            _ => self.base_dir(stage).join("manifest.json"),
        }
    }

    /// Stoplists, lexicons and taxonomy named in the config.
    fn resource_inputs(&self, stage: Stage) -> Inputs {
        let p = &self.config.paths;
        let mut out = Vec::new();
        let mut add = |name: &str, path: &Option<PathBuf>| {
            if let Some(path) = path {
                out.push((name.to_string(), path.clone()));
            }
        };
        match stage {
            Stage::Registry => add("taxonomy", &p.taxonomy),
            Stage::Features => {
                add("taxonomy", &p.taxonomy);
                add("positive_lexicon", &p.positive_lexicon);
                add("negative_lexicon", &p.negative_lexicon);
                add("easy_words", &p.easy_words);
            }
            _ => {}
        }
        if stage == Stage::Mine {
            for (i, s) in p.stoplists.iter().enumerate() {
                out.push((format!("stoplist_{i}"), s.clone()));
            }
        }
        out
    }

    fn resources(&self) -> Result<Resources> {
        let p = &self.config.paths;
        let read = |path: &PathBuf| fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())));
        let mut r = Resources::default();
        if let Some(t) = &p.taxonomy {
            r.taxonomy = Taxonomy::parse(&read(t)?, &self.config.study.engineering_field)?;
        }
        match (&p.positive_lexicon, &p.negative_lexicon) {
            (Some(pos), Some(neg)) => r.lexicon = SentimentLexicon::parse(&read(pos)?, &read(neg)?)?,
            (None, None) => {}
            _ => return Err(Error::Config("positive_lexicon and negative_lexicon go together".into())),
        }
        if let Some(e) = &p.easy_words {
            r.easy_words = EasyWordList::new(parse_word_list(&read(e)?))?;
        }
        for s in &p.stoplists {
            let name = s.file_stem().map_or("custom".into(), |n| n.to_string_lossy().into_owned());
            r.stoplists.push(Stoplist::parse(&name, &read(s)?));
        }
        Ok(r)
    }

    /// Inputs of a stage; required ones must exist.
    fn inputs(&self, stage: Stage) -> Result<Inputs> {
        let target = self.config.target;
        let mut required: Inputs = Vec::new();
        let mut optional: Inputs = Vec::new();
        let named = |rel: &str| (rel.to_string(), self.file(rel));
        match stage {
            Stage::Synth | Stage::All => {}
            Stage::Ingest => {
                for c in CorpusId::ALL {
                    let entry = (format!("corpora/{c}.jsonl"), self.corpus_file(c));
                    if c == CorpusId::Papers || c == target || c == CorpusId::Patents {
                        required.push(entry);
                    } else {
                        optional.push(entry);
                    }
                }
            }
            Stage::Mine => required.push(named("ingest/papers.jsonl")),
            Stage::Registry => {
                required.push(named("ingest/papers.jsonl"));
                required.push(named("mine/vocabulary.tsv"));
                for c in [CorpusId::Patents, CorpusId::Trials] {
                    let entry = named(&format!("ingest/{c}.jsonl"));
                    if c == target {
                        required.push(entry);
                    } else {
                        optional.push(entry);
                    }
                }
            }
            Stage::Graph | Stage::Features => {
                required.push(named("ingest/papers.jsonl"));
                required.push(named("mine/vocabulary.tsv"));
                required.push(named("registry/registry.jsonl"));
                required.push(named("registry/burn_in.json"));
                if stage == Stage::Features {
                    required.push(named("ingest/patents.jsonl"));
                }
            }
            Stage::Dataset | Stage::Sensitivity => {
                required.push(named("features/features.csv"));
                required.push(named("registry/registry.jsonl"));
            }
            Stage::Train | Stage::Ablate | Stage::Fields => required.push(named("dataset/dataset.json")),
            Stage::Evaluate => {
                required.push(named("dataset/dataset.json"));
                for m in &self.config.model.models {
                    required.push(named(&format!("train/{}.ckpt", m.as_str())));
                    required.push(named(&format!("train/{}_normalization.json", m.as_str())));
                    required.push(named(&format!("train/{}_report.json", m.as_str())));
                }
            }
        }
        if let Some((_, path)) = required.iter().find(|(_, p)| !p.is_file()) {
            return Err(missing(stage, path));
        }
        required.extend(optional.into_iter().filter(|(_, p)| p.is_file()));
        required.extend(self.resource_inputs(stage));
        Ok(required)
    }

    fn digests(inputs: &Inputs) -> Result<BTreeMap<String, String>> {
        inputs
            .iter()
            .map(|(name, path)| Ok((name.clone(), file_digest(path)?)))
            .collect()
    }

    fn up_to_date(&self, stage: Stage, input_digests: &BTreeMap<String, String>) -> Option<Vec<PathBuf>> {
        let text = fs::read_to_string(self.manifest_path(stage)).ok()?;
        let m: Manifest = serde_json::from_str(&text).ok()?;
        if m.config_digest != self.digest || &m.inputs != input_digests {
            return None;
        }
        let base = self.base_dir(stage);
        let mut outputs = Vec::new();
        for (rel, digest) in &m.outputs {
            let path = base.join(rel);
            if file_digest(&path).ok()? != *digest {
                return None;
            }
            outputs.push(path);
        }
        Some(outputs)
    }

    fn run_stage(&self, stage: Stage, force: bool) -> Result<StageOutcome> {
        let inputs = self.inputs(stage)?;
        let input_digests = Self::digests(&inputs)?;
        if !force {
            if let Some(outputs) = self.up_to_date(stage, &input_digests) {
                return Ok(StageOutcome {
                    stage,
                    skipped: true,
                    outputs,
                });
            }
        }
        let base = self.base_dir(stage);
        if stage != Stage::Synth && base.exists() {
            fs::remove_dir_all(&base)?;
        }
        fs::create_dir_all(&base)?;
        let outputs = match stage {
            Stage::Synth => self.synth()?,
            Stage::Ingest => self.ingest()?,
            Stage::Mine => self.mine()?,
            Stage::Registry => self.registry()?,
            Stage::Graph => self.graph()?,
            Stage::Features => self.features()?,
            Stage::Dataset => self.dataset()?,
            Stage::Train => self.train()?,
            Stage::Evaluate => self.evaluate()?,
            Stage::Ablate => self.ablate()?,
            Stage::Sensitivity => self.sensitivity()?,
            Stage::Fields => self.fields()?,
            Stage::All => unreachable!("expanded by run"),
        };
        let mut output_digests = BTreeMap::new();
        for path in &outputs {
            let rel = path.strip_prefix(&base).unwrap_or(path).to_string_lossy().into_owned();
            output_digests.insert(rel, file_digest(path)?);
        }
        let manifest = Manifest {
            stage: stage.as_str().to_string(),
            config_digest: self.digest.clone(),
            seed: self.seed,
            config: serde_json::to_value(self.config).expect("serializes"),
            inputs: input_digests,
            outputs: output_digests,
        };
        write_file(&self.manifest_path(stage), &to_json(&manifest))?;
        Ok(StageOutcome {
            stage,
            skipped: false,
            outputs,
        })
    }

    fn synth(&self) -> Result<Vec<PathBuf>> {
        let corpora = generate(&self.config.synth)?;
        let dir = &self.config.paths.corpora_dir;
        corpora.write_to(dir)?;
        let mut out: Vec<PathBuf> = CorpusId::ALL.iter().map(|&c| self.corpus_file(c)).collect();
        out.push(dir.join("ground_truth.jsonl"));
        Ok(out)
    }

    fn ingest(&self) -> Result<Vec<PathBuf>> {
        let mut store = DocumentStore::in_memory(self.config.store);
        let mut reports: BTreeMap<CorpusId, IngestReport> = BTreeMap::new();
        let mut out = Vec::new();
        for c in CorpusId::ALL {
            let src = self.corpus_file(c);
            if !src.is_file() {
                continue;
            }
            let report = store.ingest_documents(std::io::BufReader::new(fs::File::open(&src)?), c)?;
            reports.insert(c, report);
            let mut body = self.header();
            for d in store.documents(c) {
                body.push_str(&d.to_json_line());
                body.push('\n');
            }
            let path = self.ingested(c);
            write_file(&path, &body)?;
            out.push(path);
        }
        let path = self.file("ingest/report.json");
        write_file(&path, &self.stamped(BTreeMap::from([("corpora", reports)])))?;
        out.push(path);
        Ok(out)
    }

    fn papers(&self) -> Result<Vec<Document>> {
        read_documents(&self.ingested(CorpusId::Papers))
    }

    fn vocabulary(&self) -> Result<ConceptVocabulary> {
        ConceptVocabulary::from_tsv(&fs::read_to_string(self.file("mine/vocabulary.tsv"))?)
    }

    fn study_registry(&self) -> Result<(ConceptRegistry, i32)> {
        let registry = ConceptRegistry::from_jsonl(&fs::read_to_string(self.file("registry/registry.jsonl"))?)?;
        let burn_in: Stamped<BurnInResult> =
            serde_json::from_str(&fs::read_to_string(self.file("registry/burn_in.json"))?)?;
        Ok((registry, burn_in.data.cutoff_year))
    }

    fn mine(&self) -> Result<Vec<PathBuf>> {
        let papers = self.papers()?;
        let refs: Vec<&Document> = papers.iter().collect();
        let resources = self.resources()?;
        let vocab = mine_papers(&refs, &self.config.miner, &resources.stoplists)?;
        if vocab.is_empty() {
            return Err(Error::Degenerate("mining produced an empty vocabulary".into()));
        }
        let path = self.file("mine/vocabulary.tsv");
        write_file(&path, &format!("{}{}", self.header(), vocab.to_tsv()))?;
        Ok(vec![path])
    }

    fn registry(&self) -> Result<Vec<PathBuf>> {
        let papers = self.papers()?;
        let refs: Vec<&Document> = papers.iter().collect();
        let vocab = self.vocabulary()?;
        let mut target_docs: BTreeMap<CorpusId, Vec<Document>> = BTreeMap::new();
        for c in [CorpusId::Patents, CorpusId::Trials] {
            let path = self.ingested(c);
            if path.is_file() {
                target_docs.insert(c, read_documents(&path)?);
            }
        }
        let targets: BTreeMap<CorpusId, Vec<&Document>> =
            target_docs.iter().map(|(&c, d)| (c, d.iter().collect())).collect();
        let resources = self.resources()?;
        let registry = build_study_registry(
            &refs,
            &targets,
            &vocab,
            &resources.taxonomy,
            &self.config.registry,
            self.config.study.burn_in_cutoff,
        )?;
        let burn_in = registry.burn_in.clone().expect("study registry carries its cutoff");
        let reg_path = self.file("registry/registry.jsonl");
        write_file(&reg_path, &format!("{}{}", self.header(), registry.to_jsonl()))?;
        let burn_path = self.file("registry/burn_in.json");
        write_file(&burn_path, &self.stamped(burn_in))?;
        Ok(vec![reg_path, burn_path])
    }

    fn graph(&self) -> Result<Vec<PathBuf>> {
        let papers = self.papers()?;
        let refs: Vec<&Document> = papers.iter().collect();
        let vocab = self.vocabulary()?;
        let (registry, cutoff) = self.study_registry()?;
        let frame = StudyFrame::new(&registry, &refs, &vocab, self.config.target, cutoff + 1)?;
        let graph = frame.graph(self.config.graph.mode)?;
        let mut body = String::from("concept,year,weighted_degree,transferred_neighbor_share\n");
        for (name, series) in frame.names.iter().zip(graph.node_features()) {
            for (offset, (d, s)) in series.into_iter().enumerate() {
                writeln!(body, "{name},{},{d},{s}", frame.start_year + offset as i32).unwrap();
            }
        }
        let nodes = self.file("graph/node_features.csv");
        write_file(&nodes, &self.csv(&body))?;
        let edges = self.file(&format!("graph/edges_{}.csv", frame.end_year));
        write_file(&edges, &self.csv(&graph.edge_list_csv(frame.end_year, &frame.names)))?;
        Ok(vec![nodes, edges])
    }

    fn features(&self) -> Result<Vec<PathBuf>> {
        let papers = self.papers()?;
        let refs: Vec<&Document> = papers.iter().collect();
        let patents = read_documents(&self.ingested(CorpusId::Patents))?;
        let vocab = self.vocabulary()?;
        let (registry, cutoff) = self.study_registry()?;
        let resources = self.resources()?;
        let frame = StudyFrame::new(&registry, &refs, &vocab, self.config.target, cutoff + 1)?;
        let graph = frame.graph(self.config.graph.mode)?;
        let links = VenueLinkTable::from_citations(
            patents
                .iter()
                .filter_map(|d| d.cited_venue_ids.as_deref().map(|v| (d.year, v))),
        );
        let matrix = frame.features(&graph, &links, &resources, self.config.features)?;
        let features = self.file("features/features.csv");
        write_file(&features, &self.csv(&matrix.to_csv()))?;

        let transferred: Vec<bool> = frame.transfer.iter().map(Option::is_some).collect();
        let mut body = String::from("feature,mean_transferred,mean_non_transferred,t,df,p\n");
        for g in group_comparison(&matrix, &frame.emergence, &transferred) {
            let (t, df, p) = g
                .ttest
                .map(|t| (t.t.to_string(), t.df.to_string(), t.p.to_string()))
                .unwrap_or_default();
            writeln!(body, "{},{},{},{t},{df},{p}", g.feature, g.mean_transferred, g.mean_non_transferred).unwrap();
        }
        let groups = self.file("features/group_comparison.csv");
        write_file(&groups, &self.csv(&body))?;

        let active: Vec<[f64; crate::N_FEATURES]> = matrix
            .rows
            .iter()
            .enumerate()
            .flat_map(|(c, series)| {
                let from = (frame.emergence[c] - matrix.start_year).max(0) as usize;
                series[from.min(series.len())..].iter().copied()
            })
            .collect();
        let corr = feature_correlation(&active)?;
        let mut body = String::from("feature");
        for n in FEATURE_NAMES {
            write!(body, ",{n}").unwrap();
        }
        body.push('\n');
        for (n, row) in FEATURE_NAMES.iter().zip(corr) {
            body.push_str(n);
            for v in row {
                write!(body, ",{}", v.map(|r| r.to_string()).unwrap_or_default()).unwrap();
            }
            body.push('\n');
        }
        let correlation = self.file("features/correlation.csv");
        write_file(&correlation, &self.csv(&body))?;
        Ok(vec![features, groups, correlation])
    }

    /// Feature matrix with labels and fields aligned to its concept order.
    fn study_matrix(&self) -> Result<(FeatureMatrix, ConceptLabels, Vec<Option<String>>)> {
        let matrix = FeatureMatrix::from_csv(&fs::read_to_string(self.file("features/features.csv"))?)?;
        let registry = ConceptRegistry::from_jsonl(&fs::read_to_string(self.file("registry/registry.jsonl"))?)?;
        let mut emergence = Vec::new();
        let mut transfer = Vec::new();
        let mut fields = Vec::new();
        for name in &matrix.concepts {
            let r = registry
                .get(name)
                .ok_or_else(|| Error::UnknownConcept(format!("{name} (features and registry disagree)")))?;
            emergence.push(r.emergence_year);
            transfer.push(r.transfer(self.config.target));
            fields.push(r.field.clone());
        }
        Ok((matrix, ConceptLabels { emergence, transfer }, fields))
    }

    fn dataset(&self) -> Result<Vec<PathBuf>> {
        let (matrix, labels, fields) = self.study_matrix()?;
        let s = &self.config.split;
        let plan = SplitPlan::new(s.test_cutoff, s.window, s.history, s.n_train, matrix.start_year)?;
        let dataset = Dataset::build(&matrix, &labels, &plan, s.prior)?;
        let samples = self.file("dataset/samples.csv");
        write_file(&samples, &self.csv(&dataset.to_csv(&matrix.concepts)))?;
        let path = self.file("dataset/dataset.json");
        write_file(
            &path,
            &self.stamped(DatasetFile {
                concepts: matrix.concepts,
                fields,
                dataset,
            }),
        )?;
        Ok(vec![path, samples])
    }

    fn load_dataset(&self) -> Result<DatasetFile> {
        let file: Stamped<DatasetFile> =
            serde_json::from_str(&fs::read_to_string(self.file("dataset/dataset.json"))?)?;
        Ok(file.data)
    }

    fn train(&self) -> Result<Vec<PathBuf>> {
        let data = self.load_dataset()?;
        let mut out = Vec::new();
        for &kind in &self.config.model.models {
            let e = run_experiment(&data.dataset, kind, &self.config.experiment)?;
            let m = kind.as_str();
            let mut ckpt = Vec::new();
            write_checkpoint(&e.model, &mut ckpt)?;
            let path = self.file(&format!("train/{m}.ckpt"));
            write_file(&path, &format!("{}{}", self.header(), String::from_utf8(ckpt).expect("utf-8")))?;
            out.push(path);
            let path = self.file(&format!("train/{m}_normalization.json"));
            write_file(&path, &self.stamped(e.normalization))?;
            out.push(path);
            let mut log = String::from("epoch,train_loss,validation_auc\n");
            for r in &e.epochs {
                let v = r.validation_auc.map(|a| a.to_string()).unwrap_or_default();
                writeln!(log, "{},{},{v}", r.epoch, r.train_loss).unwrap();
            }
            let path = self.file(&format!("train/{m}_log.csv"));
            write_file(&path, &self.csv(&log))?;
            out.push(path);
            let path = self.file(&format!("train/{m}_report.json"));
            write_file(&path, &self.stamped(e.report))?;
            out.push(path);
        }
        Ok(out)
    }

    fn evaluate(&self) -> Result<Vec<PathBuf>> {
        let data = self.load_dataset()?;
        let cfg = &self.config.experiment;
        let mut reports = Vec::new();
        let mut repeats = BTreeMap::new();
        let mut importance = None;
        let mut out = Vec::new();
        for &kind in &self.config.model.models {
            let m = kind.as_str();
            let text = fs::read_to_string(self.file(&format!("train/{m}.ckpt")))?;
            let checkpoint = read_checkpoint(Cursor::new(strip_comments(&text)))?;
            let norm: Stamped<NormalizationStats> =
                serde_json::from_str(&fs::read_to_string(self.file(&format!("train/{m}_normalization.json")))?)?;
            let trained: Stamped<EvalReport> =
                serde_json::from_str(&fs::read_to_string(self.file(&format!("train/{m}_report.json")))?)?;
            let view = if kind == ModelKind::Lr && cfg.lr_last_year_only {
                data.dataset.last_year_only()
            } else {
                data.dataset.clone()
            };
            let test = zscore_apply(&norm.data, &view.test, view.dims());
            let scores = test
                .iter()
                .map(|s| checkpoint.predict(&s.history))
                .collect::<Result<Vec<f64>>>()?;
            let labels: Vec<u8> = test.iter().map(|s| s.label).collect();
            let mut report = trained.data;
            report.auc = auc(&scores, &labels)?;
            let predictions: Vec<Prediction> = test
                .iter()
                .zip(&scores)
                .map(|(s, &probability)| Prediction {
                    concept: s.concept,
                    cutoff: s.cutoff,
                    probability,
                    label: s.label,
                })
                .collect();
            let path = self.file(&format!("evaluate/predictions_{m}.csv"));
            write_file(&path, &self.csv(&predictions_csv(&predictions, &data.concepts)))?;
            out.push(path);
            if let Checkpoint::Lr(lr) = &checkpoint {
                let names: Vec<String> = view.columns.iter().map(|&c| FEATURE_NAMES[c].to_string()).collect();
                let ranking = feature_importance(lr, view.plan.history, &names, self.config.fields.importance)?;
                let path = self.file("evaluate/importance.csv");
                write_file(&path, &self.csv(&ranking.to_csv()))?;
                out.push(path);
                importance = Some(ranking);
            }
            if self.config.repeat > 1 {
                repeats.insert(m.to_string(), repeat_runs(&data.dataset, kind, cfg, self.config.repeat)?);
            }
            reports.push(report);
        }
        let path = self.file("evaluate/report.json");
        write_file(
            &path,
            &self.stamped(EvaluationFile {
                target: self.config.target,
                reports,
                repeats,
                importance,
            }),
        )?;
        out.insert(0, path);
        Ok(out)
    }

    fn ablate(&self) -> Result<Vec<PathBuf>> {
        let data = self.load_dataset()?;
        let cells = ablation_run(&data.dataset, &feature_groups(), &self.config.model.models, &self.config.experiment)?;
        let path = self.file("ablate/ablation.csv");
        write_file(&path, &self.csv(&ablation_csv(&cells)))?;
        Ok(vec![path])
    }

    fn sensitivity(&self) -> Result<Vec<PathBuf>> {
        let (matrix, labels, _) = self.study_matrix()?;
        let s = &self.config.split;
        let base = SweepBase {
            test_cutoff: s.test_cutoff,
            window: s.window,
            history: s.history,
            n_train: s.n_train,
            data_start: matrix.start_year,
            prior: s.prior,
        };
        let sweeps = &self.config.sensitivity;
        let mut out = Vec::new();
        for (axis, values) in [
            (SweepAxis::HistoryLength, &sweeps.history),
            (SweepAxis::WindowLength, &sweeps.window),
            (SweepAxis::CutoffYear, &sweeps.cutoff),
        ] {
            if values.is_empty() {
                continue;
            }
            let points = sensitivity_run(&matrix, &labels, &base, axis, values, sweeps.model, &self.config.experiment);
            let path = self.file(&format!("sensitivity/sensitivity_{}.csv", axis.as_str()));
            write_file(&path, &self.csv(&sensitivity_csv(&points)))?;
            out.push(path);
        }
        Ok(out)
    }

    fn fields(&self) -> Result<Vec<PathBuf>> {
        let data = self.load_dataset()?;
        let results = per_field_eval(&data.dataset, &data.fields, self.config.fields.model, &self.config.experiment);
        let path = self.file("fields/fields.csv");
        write_file(&path, &self.csv(&per_field_csv(&results)))?;
        Ok(vec![path])
    }
}

/// Process exit code for an error: 2 for config problems, 3 for a missing
/// upstream artifact, 1 otherwise.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        Error::MissingArtifact(_) => 3,
        _ => 1,
    }
}
