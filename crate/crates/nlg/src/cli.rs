//! Subcommands. Each prints `key=value` lines on standard output and, when
//! `--out` is given, writes the full result as JSON (or a dataset file).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ensnlg_core::aligner::align_utterance;
use ensnlg_core::augment::{expand_dataset, PermutationConfig};
use ensnlg_core::corpus::{compute_stats_many, parse_mr, Dataset, Dialect, Domain, SentenceSplitter, Split};
use ensnlg_core::delex::{delexicalize, DelexPolicy};
use ensnlg_core::lexicon;
use ensnlg_core::metrics::{evaluate, ErrMode, EvalPair, MetricConfig};
use ensnlg_core::neural::{train, EncoderKind};
use ensnlg_core::styleselect::{select_references, SelectionMode};
use ensnlg_core::synthetic::{gen_synthetic, SyntheticGrammar};
use serde::Serialize;

use crate::checkpoint::save_checkpoint;
use crate::config::{EnsembleSpec, RunConfig};
use crate::error::{NlgError, Result};
use crate::io::{load_dataset, read_lines, read_mrs, read_reference_groups, write_dataset, write_json};

#[derive(Debug, Parser)]
#[command(name = "ensnlg", version, about = "Slot-aligned ensemble data-to-text generation")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset statistics.
    Stats(StatsArgs),
    /// Slot alignment of references (or of one MR/utterance pair).
    Align(AlignArgs),
    /// Delexicalize a dataset.
    Preprocess(PreprocessArgs),
    /// Utterance splitting and slot permutation.
    Augment(AugmentArgs),
    /// Discourse-based reference selection.
    Select(SelectArgs),
    /// Train one submodel and write its checkpoint.
    Train(TrainArgs),
    /// Generate with an ensemble.
    Generate(GenerateArgs),
    /// Automatic metrics for hypothesis/reference files.
    Evaluate(EvaluateArgs),
    /// Write a synthetic restaurant corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DialectArg {
    E2e,
    Rnnlg,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Self {
        match d {
            DialectArg::E2e => Dialect::E2e,
            DialectArg::Rnnlg => Dialect::Rnnlg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    E2e,
    Tv,
    Laptop,
    Synthetic,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::E2e => Domain::E2e,
            DomainArg::Tv => Domain::Tv,
            DomainArg::Laptop => Domain::Laptop,
            DomainArg::Synthetic => Domain::Synthetic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EncoderArg {
    Bilstm,
    Cnn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ErrModeArg {
    HumanEval,
    Rnnlg,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset file (E2E CSV or RNNLG JSON).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "e2e")]
    pub dialect: DialectArg,
    /// Defaults to e2e for the E2E dialect and laptop otherwise.
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
}

impl DataArgs {
    fn domain(&self) -> Domain {
        domain_for(self.domain, self.dialect)
    }

    fn load(&self, cfg: &RunConfig) -> Result<Dataset> {
        load_dataset(&cfg.data_path(&self.data), self.dialect.into(), self.domain(), self.split.into())
    }
}

fn domain_for(domain: Option<DomainArg>, dialect: DialectArg) -> Domain {
    domain.map(Domain::from).unwrap_or(match dialect {
        DialectArg::E2e => Domain::E2e,
        DialectArg::Rnnlg => Domain::Laptop,
    })
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// One or more files, taken as train, validation and test in that order.
    #[arg(long, required = true, num_args = 1..=3)]
    pub data: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "e2e")]
    pub dialect: DialectArg,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long, conflicts_with_all = ["mr", "utterance"])]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "e2e")]
    pub dialect: DialectArg,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, requires = "utterance")]
    pub mr: Option<String>,
    #[arg(long, requires = "mr")]
    pub utterance: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Also delexicalize slots whose values occur verbatim in at least this
    /// share of references.
    #[arg(long)]
    pub scan_threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Substitution report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub no_split: bool,
    /// Permutations per sample (0 disables).
    #[arg(long)]
    pub permute: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Keep the N best references per MR.
    #[arg(long, conflicts_with = "threshold")]
    pub top: Option<usize>,
    /// Keep references scoring at least this much.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// The data is already delexicalized.
    #[arg(long)]
    pub delexicalized: bool,
    #[arg(long, value_enum)]
    pub encoder: Option<EncoderArg>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub decoder_layers: Option<usize>,
    /// Checkpoint directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Ensemble specification (TOML); falls back to the run config's.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long, required_unless_present = "mrs", conflicts_with = "mrs")]
    pub mr: Option<String>,
    /// File with one MR per line.
    #[arg(long)]
    pub mrs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "e2e")]
    pub dialect: DialectArg,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    /// Rerank results (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Generated utterances, one per line.
    #[arg(long)]
    pub hyp_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    /// References grouped per MR by blank lines; a file without blank lines
    /// holds one reference per hypothesis.
    #[arg(long = "ref", value_name = "REF")]
    pub reference: PathBuf,
    /// One MR per line; enables the slot error rate.
    #[arg(long)]
    pub mr: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "e2e")]
    pub dialect: DialectArg,
    #[arg(long, value_enum, default_value = "human-eval")]
    pub err_mode: ErrModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub refs_per_mr: Option<usize>,
    /// Output CSV (E2E format).
    #[arg(long)]
    pub out: PathBuf,
}

/// Summary printed on standard output.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

/// The configured policy, or the defaults of an explicitly requested domain
/// plus the configured extra slots.
fn delex_policy(cfg: &RunConfig, domain: Option<Domain>) -> DelexPolicy {
    match domain {
        Some(d) if d != cfg.delex.domain => crate::config::DelexConfig { domain: d, ..cfg.delex.clone() }.policy(),
        _ => cfg.delex.policy(),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.4}")
}

pub fn run(cli: &Cli) -> Result<Summary> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Stats(a) => cmd_stats(&cfg, a),
        Command::Align(a) => cmd_align(&cfg, a),
        Command::Preprocess(a) => cmd_preprocess(&cfg, a),
        Command::Augment(a) => cmd_augment(&cfg, a),
        Command::Select(a) => cmd_select(&cfg, a),
        Command::Train(a) => cmd_train(&cfg, a),
        Command::Generate(a) => cmd_generate(&cfg, a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

pub fn cmd_stats(cfg: &RunConfig, a: &StatsArgs) -> Result<Summary> {
    let domain = domain_for(a.domain, a.dialect);
    let splits = [Split::Train, Split::Validation, Split::Test];
    let datasets = a
        .data
        .iter()
        .zip(splits)
        .map(|(p, split)| load_dataset(&cfg.data_path(p), a.dialect.into(), domain, split))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Dataset> = datasets.iter().collect();
    let splitter = SentenceSplitter::new(lexicon::word_list(lexicon::ABBREVIATIONS));
    let stats = compute_stats_many(&refs, &splitter);
    let mut s = Summary::default();
    s.push("samples", stats.total);
    for (split, n) in &stats.counts {
        s.push(&format!("samples.{split}"), n);
    }
    s.push("unique_mrs", stats.unique_mr_count);
    s.push("avg_refs_per_mr", fmt_f(stats.avg_refs_per_unique_mr));
    s.push("slot_types", stats.slot_type_count);
    s.push("da_types", stats.da_type_count);
    for (k, p) in &stats.slot_count_histogram {
        s.push(&format!("slots.{k}.proportion"), fmt_f(*p));
    }
    for (k, avg) in &stats.avg_sentences_by_slot_count {
        s.push(&format!("slots.{k}.avg_sentences"), fmt_f(*avg));
    }
    if let Some(out) = &a.out {
        write_json(out, &stats)?;
    }
    Ok(s)
}

#[derive(Serialize)]
struct AlignOutput {
    total_slots: usize,
    unaligned: usize,
    overgenerated: usize,
    reports: Vec<(String, ensnlg_core::AlignmentReport)>,
}

pub fn cmd_align(cfg: &RunConfig, a: &AlignArgs) -> Result<Summary> {
    let gaz = cfg.gazetteer(None)?;
    let items: Vec<(String, ensnlg_core::MeaningRepresentation, String)> = match (&a.data, &a.mr, &a.utterance) {
        (Some(p), _, _) => {
            let ds = load_dataset(&cfg.data_path(p), a.dialect.into(), domain_for(a.domain, a.dialect), Split::Train)?;
            ds.samples.into_iter().map(|s| (s.id, s.mr, s.reference)).collect()
        }
        (None, Some(mr), Some(u)) => vec![("0".to_string(), parse_mr(mr, a.dialect.into())?, u.clone())],
        _ => return Err(NlgError::Config("align needs --data, or --mr with --utterance".into())),
    };
    let reports: Vec<_> = items.iter().map(|(id, mr, u)| (id.clone(), align_utterance(u, mr, &gaz))).collect();
    let out = AlignOutput {
        total_slots: reports.iter().map(|r| r.1.total_slots).sum(),
        unaligned: reports.iter().map(|r| r.1.n_unaligned()).sum(),
        overgenerated: reports.iter().map(|r| r.1.n_overgenerated()).sum(),
        reports,
    };
    let mut s = Summary::default();
    s.push("samples", out.reports.len());
    s.push("slots", out.total_slots);
    s.push("unaligned", out.unaligned);
    s.push("overgenerated", out.overgenerated);
    let err = if out.total_slots == 0 { 0.0 } else { out.unaligned as f64 / out.total_slots as f64 };
    s.push("err", fmt_f(err));
    if let Some(p) = &a.out {
        write_json(p, &out)?;
    }
    Ok(s)
}

pub fn cmd_preprocess(cfg: &RunConfig, a: &PreprocessArgs) -> Result<Summary> {
    let ds = a.data.load(cfg)?;
    let mut policy = delex_policy(cfg, a.data.domain.map(Domain::from));
    if let Some(t) = a.scan_threshold {
        policy = policy.with_scanned(&ds, t);
    }
    let delexed: Vec<_> = ds.samples.iter().map(|s| delexicalize(s, &policy)).collect();
    let missing: usize = delexed.iter().map(|d| d.unsubstituted().count()).sum();
    let out = Dataset { samples: delexed.iter().cloned().map(|d| d.into_sample()).collect(), domain: ds.domain, split: ds.split };
    write_dataset(&a.out, &out, a.data.dialect.into())?;
    if let Some(r) = &a.report {
        write_json(r, &delexed)?;
    }
    let mut s = Summary::default();
    s.push("samples", out.len());
    s.push("delex_slots", policy.delex_slots.iter().cloned().collect::<Vec<_>>().join(","));
    s.push("unsubstituted", missing);
    Ok(s)
}

pub fn cmd_augment(cfg: &RunConfig, a: &AugmentArgs) -> Result<Summary> {
    let ds = a.data.load(cfg)?;
    let gaz = cfg.gazetteer(Some(&ds))?;
    let perm = match a.permute {
        Some(0) => None,
        Some(k) => Some(PermutationConfig { k, seed: a.seed.unwrap_or(cfg.seed) }),
        None => None,
    };
    let split = (!a.no_split).then_some(&cfg.split);
    let out = expand_dataset(&ds, &gaz, split, perm.as_ref())?;
    write_dataset(&a.out, &out, a.data.dialect.into())?;
    let mut s = Summary::default();
    s.push("input_samples", ds.len());
    s.push("output_samples", out.len());
    s.push("ratio", fmt_f(out.len() as f64 / ds.len() as f64));
    Ok(s)
}

pub fn cmd_select(cfg: &RunConfig, a: &SelectArgs) -> Result<Summary> {
    let ds = a.data.load(cfg)?;
    let mut policy = cfg.selection;
    if let Some(n) = a.top {
        policy.mode = SelectionMode::TopPerMr { n: Some(n) };
    }
    if let Some(t) = a.threshold {
        policy.mode = SelectionMode::Threshold { min_score: t };
    }
    let out = select_references(&ds, &policy)?;
    write_dataset(&a.out, &out, a.data.dialect.into())?;
    let mut s = Summary::default();
    s.push("input_samples", ds.len());
    s.push("selected", out.len());
    Ok(s)
}

pub fn cmd_train(cfg: &RunConfig, a: &TrainArgs) -> Result<Summary> {
    let policy = delex_policy(cfg, a.data.domain.map(Domain::from));
    let prep = |ds: Dataset| if a.delexicalized { ds } else { ensnlg_core::delex::delexicalize_dataset(&ds, &policy) };
    let ds = prep(a.data.load(cfg)?);
    let val = match &a.validation {
        Some(p) => Some(prep(load_dataset(&cfg.data_path(p), a.data.dialect.into(), a.data.domain(), Split::Validation)?)),
        None => None,
    };
    let mut h = cfg.hyperparams.clone();
    if let Some(e) = a.encoder {
        h.encoder = match e {
            EncoderArg::Bilstm => EncoderKind::Bilstm,
            EncoderArg::Cnn => EncoderKind::CnnPooling,
        };
    }
    if let Some(e) = a.epochs {
        h.epochs = e;
    }
    if let Some(seed) = a.seed {
        h.seed = seed;
    }
    if let Some(lr) = a.learning_rate {
        h.learning_rate = lr;
    }
    if let Some(d) = a.embed_dim {
        h.embed_dim = d;
    }
    if let Some(d) = a.hidden {
        h.encoder_hidden = d;
        h.decoder_hidden = d;
        h.attention_dim = d;
    }
    if let Some(l) = a.decoder_layers {
        h.decoder_layers = l;
    }
    let (model, log) = train(&ds, val.as_ref(), &h)?;
    save_checkpoint(&a.out, &model, Some(&log))?;
    let mut s = Summary::default();
    s.push("samples", ds.len());
    s.push("encoder", h.encoder);
    s.push("epochs", h.epochs);
    s.push("initial_loss", fmt_f(log.initial_loss));
    if let Some(last) = log.epochs.last() {
        s.push("final_loss", fmt_f(last.train_loss));
        if let Some(v) = last.val_loss {
            s.push("val_loss", fmt_f(v));
        }
    }
    s.push("checkpoint", a.out.display());
    Ok(s)
}

#[derive(Serialize)]
struct GenerateOutput {
    mr: String,
    utterance: String,
    result: ensnlg_core::ensemble::RerankResult,
}

pub fn cmd_generate(cfg: &RunConfig, a: &GenerateArgs) -> Result<Summary> {
    let spec = match (&a.ensemble, &cfg.ensemble) {
        (Some(p), _) => EnsembleSpec::from_file(p)?,
        (None, Some(spec)) => spec.clone(),
        (None, None) => return Err(NlgError::Config("no ensemble given (--ensemble or [ensemble] in the config)".into())),
    };
    let ensemble = spec.load()?;
    let dialect: Dialect = a.dialect.into();
    let mrs = match (&a.mr, &a.mrs) {
        (Some(m), _) => vec![parse_mr(m, dialect)?],
        (None, Some(p)) => read_mrs(p, dialect)?,
        _ => unreachable!("clap requires one of --mr/--mrs"),
    };
    let policy = delex_policy(cfg, a.domain.map(Domain::from));
    let gaz = cfg.gazetteer(None)?;
    let mut outputs = Vec::new();
    for mr in &mrs {
        let (utterance, result) = ensemble.generate_mr(mr, &policy, &gaz)?;
        outputs.push(GenerateOutput { mr: mr.serialize(), utterance, result });
    }
    let mut s = Summary::default();
    s.push("mrs", outputs.len());
    s.push("members", ensemble.members.len());
    if let [one] = outputs.as_slice() {
        s.push("utterance", &one.utterance);
        s.push("s_align", fmt_f(one.result.winner().s_align));
        s.push("final_score", format!("{:.6}", one.result.winner().final_score));
    }
    if let Some(p) = &a.hyp_out {
        let text: String = outputs.iter().map(|o| format!("{}\n", o.utterance)).collect();
        crate::io::write_text(p, &text)?;
    }
    if let Some(p) = &a.out {
        match outputs.as_slice() {
            [one] => write_json(p, one)?,
            many => write_json(p, &many)?,
        }
    }
    Ok(s)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<Summary> {
    let hyps = read_lines(&a.hyp)?;
    let text = crate::io::read_text(&a.reference)?;
    let has_blank = text.trim().lines().any(|l| l.trim().is_empty());
    let groups = if has_blank { read_reference_groups(&a.reference)? } else { read_lines(&a.reference)?.into_iter().map(|l| vec![l]).collect() };
    if groups.len() != hyps.len() {
        return Err(NlgError::format(&a.reference, format!("{} reference groups for {} hypotheses", groups.len(), hyps.len())));
    }
    let mrs = match &a.mr {
        Some(p) => {
            let m = read_mrs(p, a.dialect.into())?;
            if m.len() != hyps.len() {
                return Err(NlgError::format(p, format!("{} MRs for {} hypotheses", m.len(), hyps.len())));
            }
            m.into_iter().map(Some).collect()
        }
        None => vec![None; hyps.len()],
    };
    let pairs: Vec<EvalPair> = hyps
        .into_iter()
        .zip(groups)
        .zip(mrs)
        .map(|((h, r), mr)| EvalPair { hypothesis: h, references: r, mr })
        .collect();
    let cfg = MetricConfig {
        err_mode: match a.err_mode {
            ErrModeArg::HumanEval => ErrMode::HumanEval,
            ErrModeArg::Rnnlg => ErrMode::Rnnlg,
        },
        ..MetricConfig::default()
    };
    let gaz = a.mr.as_ref().map(|_| RunConfig::default().gazetteer(None)).transpose()?;
    let report = evaluate(&pairs, &cfg, gaz.as_ref())?;
    let mut s = Summary::default();
    s.push("pairs", report.pairs);
    s.push("bleu", fmt_f(report.bleu));
    s.push("nist", fmt_f(report.nist));
    s.push("meteor_lite", fmt_f(report.meteor_lite));
    s.push("rouge_l", fmt_f(report.rouge_l));
    if let Some(e) = &report.err {
        s.push("err", fmt_f(e.err));
        s.push("unaligned", e.unaligned);
        s.push("overgenerated", e.overgenerated);
    }
    if let Some(p) = &a.out {
        write_json(p, &report)?;
    }
    Ok(s)
}

pub fn cmd_synth(a: &SynthArgs) -> Result<Summary> {
    let mut grammar = SyntheticGrammar::default();
    if let Some(r) = a.refs_per_mr {
        grammar.refs_per_mr = r;
    }
    let ds = gen_synthetic(&grammar, a.size, a.seed)?;
    write_dataset(&a.out, &ds, Dialect::E2e)?;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for smp in &ds.samples {
        *hist.entry(smp.mr.len()).or_default() += 1;
    }
    let mut s = Summary::default();
    s.push("samples", ds.len());
    for (k, n) in hist {
        s.push(&format!("slots.{k}"), n);
    }
    s.push("out", a.out.display());
    Ok(s)
}

/// Parses arguments, runs the command and prints the summary; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            print!("{}", summary.render());
            0
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.class(), single_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
