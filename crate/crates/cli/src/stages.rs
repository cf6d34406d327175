//! File-to-file stage implementations.
//!
//! Every stage reads JSONL, writes its output atomically (temp file plus
//! rename, so an interrupted run never leaves a partial file under the
//! final name), and returns a manifest record with counts, a drop
//! histogram, wall time, and input/output hashes. Parallel stages derive
//! one generator per record from (seed, stage, index), so worker count
//! never changes the output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use corpusprep::cleaners::{
    clean_book, clean_creative, clean_parlamint, clean_scientific, normalize_ocr, BookCleanConfig,
    OcrTable,
};
use corpusprep::corpus::{compute_stats, load_documents, write_documents, Document, Source};
use corpusprep::denoise::{make_example, DenoiseError, DenoiseOptions, DenoisedExample};
use corpusprep::langid::LanguageModelCharNgram;
use corpusprep::linefilter::filter_document;
use corpusprep::metrics::{
    bleu_report, meteor_exact, pearson, rouge_l, rouge_n, weighted_prf, MetricReport,
};
use corpusprep::mixture::sample_mixture;
use corpusprep::ngram::{
    filter_by_score, percentile_threshold, read_arpa, render_arpa, train, NGramModel,
};
use corpusprep::rng::stage_rng;
use corpusprep::text::{count_tokens, split_sentences, whitespace_tokens};
use corpusprep::tokenizer::TokenizerVocab;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, ValidationError};
use crate::manifest::{file_hash, StageRecord};

/// Sentinel ids appended to the tokenizer vocabulary for denoising.
pub const SENTINEL_COUNT: usize = 128;

/// Shared state for one invocation.
pub struct StageContext {
    /// Merged configuration (file plus command-line overrides).
    pub config: PipelineConfig,
    /// Suppress progress reporting.
    pub quiet: bool,
}

impl StageContext {
    fn vocab(&self) -> anyhow::Result<TokenizerVocab> {
        match &self.config.vocab {
            Some(path) => corpusprep::tokenizer::load_vocab(path)
                .with_context(|| format!("cannot load vocabulary {}", path.display())),
            None => Ok(TokenizerVocab::builtin().clone()),
        }
    }
}

/// One tokenized document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    /// Document id the tokens came from.
    pub id: String,
    /// Source of that document.
    pub source: Source,
    /// Token ids of the newline-flattened text.
    pub ids: Vec<u32>,
}

/// One synthesized training example, tagged with its document id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    /// Id of the tokenized document the example was cut from.
    pub id: String,
    /// The example itself.
    #[serde(flatten)]
    pub example: DenoisedExample,
}

/// One prediction/reference pair for the metrics command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRow {
    /// Example id.
    pub id: String,
    /// System output.
    pub prediction: String,
    /// Gold answer.
    pub reference: String,
}

/// Require that a command-line input path exists before any work starts.
pub fn require_file(path: &Path) -> Result<(), ValidationError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ValidationError(format!("input file not found: {}", path.display())))
    }
}

/// Write bytes to `path` atomically: temp sibling file, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(parent) = parent {
        std::fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = std::fs::File::create(&tmp)
            .with_context(|| format!("cannot create {}", tmp.display()))?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}

/// Serialize documents and write them atomically.
fn write_documents_atomic(path: &Path, docs: &[Document]) -> anyhow::Result<()> {
    let mut buffer = Vec::new();
    write_documents(&mut buffer, docs.iter())?;
    write_atomic(path, &buffer)
}

/// Serialize arbitrary records as JSONL and write them atomically.
fn write_records_atomic<T: Serialize>(path: &Path, records: &[T]) -> anyhow::Result<()> {
    let mut buffer = Vec::new();
    for record in records {
        serde_json::to_writer(&mut buffer, record)?;
        buffer.push(b'\n');
    }
    write_atomic(path, &buffer)
}

/// Read JSONL records, reporting the failing line on parse errors.
fn read_records<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    raw.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .with_context(|| format!("{}:{}: malformed record", path.display(), i + 1))
        })
        .collect()
}

/// Serde name of a unit enum variant, for drop histograms.
fn reason_key<T: Serialize + std::fmt::Debug>(reason: &T) -> String {
    match serde_json::to_value(reason) {
        Ok(serde_json::Value::String(name)) => name,
        _ => format!("{reason:?}"),
    }
}

/// Which cleaning procedure to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanKind {
    /// Journal articles and theses: OCR repair, preamble and boilerplate
    /// stripping, then the line filter.
    Scientific,
    /// Books: front and back matter removal.
    Book,
    /// Creative writings: submission metadata removal.
    Creative,
    /// Parliamentary transcripts: session header and role marker removal.
    Parlamint,
    /// Anything else: OCR repair plus the line filter.
    Generic,
}

impl CleanKind {
    /// Cleaner for a corpus source.
    pub fn for_source(source: Source) -> CleanKind {
        match source {
            Source::Dergipark | Source::Yoktez => CleanKind::Scientific,
            Source::Book => CleanKind::Book,
            Source::Bilkent => CleanKind::Creative,
            Source::Parlamint => CleanKind::Parlamint,
            Source::Web => CleanKind::Generic,
        }
    }

    fn stage_name(self) -> &'static str {
        match self {
            CleanKind::Scientific => "clean-scientific",
            CleanKind::Book => "clean-book",
            CleanKind::Creative => "clean-creative",
            CleanKind::Parlamint => "clean-parlamint",
            CleanKind::Generic => "clean-generic",
        }
    }
}

/// Clean a corpus file. Documents left empty by cleaning are dropped.
pub fn run_clean(
    ctx: &StageContext,
    kind: CleanKind,
    input: &Path,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let mut record = StageRecord::new(kind.stage_name());
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let filter = &ctx.config.filter;
    let lang = LanguageModelCharNgram::builtin();
    let ocr = OcrTable::builtin();
    let cleaned: Vec<anyhow::Result<(Document, BTreeMap<String, u64>)>> = docs
        .par_iter()
        .map(|doc| match kind {
            CleanKind::Scientific => {
                let (cleaned, report) = clean_scientific(doc, ocr, filter, lang)?;
                let drops = report.drops.iter().map(|(k, v)| (reason_key(k), *v)).collect();
                Ok((cleaned, drops))
            }
            CleanKind::Generic => {
                let mut staged = doc.clone();
                staged.text = normalize_ocr(&doc.text, ocr);
                let (cleaned, verdicts) = filter_document(&staged, filter, lang);
                let mut drops = BTreeMap::new();
                for v in &verdicts {
                    if !v.keep {
                        *drops.entry(reason_key(&v.reason)).or_insert(0) += 1;
                    }
                }
                Ok((cleaned, drops))
            }
            CleanKind::Book => {
                let mut cleaned = doc.clone();
                cleaned.text = clean_book(&doc.text, &BookCleanConfig::default());
                Ok((cleaned, BTreeMap::new()))
            }
            CleanKind::Creative => {
                let mut cleaned = doc.clone();
                cleaned.text = clean_creative(&doc.text);
                Ok((cleaned, BTreeMap::new()))
            }
            CleanKind::Parlamint => {
                let mut cleaned = doc.clone();
                cleaned.text = clean_parlamint(&doc.text);
                Ok((cleaned, BTreeMap::new()))
            }
        })
        .collect();

    let mut kept: Vec<Document> = Vec::with_capacity(cleaned.len());
    for result in cleaned {
        let (doc, drops) = result?;
        for (reason, count) in drops {
            *record.drops.entry(reason).or_insert(0) += count;
        }
        if doc.text.trim().is_empty() {
            record.drop_one("empty_after_clean");
        } else {
            kept.push(doc);
        }
    }

    write_documents_atomic(output, &kept)?;
    let stats_out = compute_stats(kept.iter());
    record.docs_out = stats_out.doc_count;
    record.tokens_out = stats_out.token_count;
    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Sentence token lists for model training and scoring: lines are
/// sentence-split, then tokenized by vocabulary pieces when one is
/// configured and by whitespace otherwise.
fn sentence_tokens(ctx: &StageContext, docs: &[Document]) -> anyhow::Result<Vec<Vec<String>>> {
    let vocab = match &ctx.config.vocab {
        Some(_) => Some(ctx.vocab()?),
        None => None,
    };
    let mut sentences = Vec::new();
    for doc in docs {
        for line in doc.text.split('\n') {
            for sentence in split_sentences(line) {
                let tokens: Vec<String> = match &vocab {
                    Some(vocab) => vocab
                        .encode(sentence)
                        .iter()
                        .map(|id| vocab.piece(*id).expect("id from encode").to_string())
                        .collect(),
                    None => whitespace_tokens(sentence).iter().map(|t| t.to_string()).collect(),
                };
                if !tokens.is_empty() {
                    sentences.push(tokens);
                }
            }
        }
    }
    Ok(sentences)
}

/// Train an n-gram model on a corpus file and write it in ARPA form.
pub fn run_train_lm(
    ctx: &StageContext,
    input: &Path,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let mut record = StageRecord::new("train-lm");
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let sentences = sentence_tokens(ctx, &docs)?;
    let model = train(&sentences, ctx.config.lm_train.order, ctx.config.lm_train.smoothing)?;
    write_atomic(output, render_arpa(&model)?.as_bytes())?;

    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Mean per-event log probability of a document under the model, using
/// piece tokens when a vocabulary is configured.
fn score_one(
    model: &NGramModel,
    vocab: Option<&TokenizerVocab>,
    doc: &Document,
) -> Option<f64> {
    match vocab {
        None => model.score_document(doc).ok().map(|s| s.mean_log10_prob),
        Some(vocab) => {
            let mut total = 0.0;
            let mut events = 0u64;
            for line in doc.text.split('\n') {
                for sentence in split_sentences(line) {
                    let pieces: Vec<&str> = vocab
                        .encode(sentence)
                        .iter()
                        .map(|id| vocab.piece(*id).expect("id from encode"))
                        .collect::<Vec<_>>();
                    if pieces.is_empty() {
                        continue;
                    }
                    let (t, e) = model.score_sentence(&pieces);
                    total += t;
                    events += e;
                }
            }
            (events > 0).then(|| total / events as f64)
        }
    }
}

/// Attach language model scores to every document.
pub fn run_score(
    ctx: &StageContext,
    input: &Path,
    lm: &Path,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    require_file(lm)?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let mut record = StageRecord::new("score-docs");
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let model = read_arpa(lm)?;
    let vocab = match &ctx.config.vocab {
        Some(_) => Some(ctx.vocab()?),
        None => None,
    };
    let scores: Vec<Option<f64>> =
        docs.par_iter().map(|doc| score_one(&model, vocab.as_ref(), doc)).collect();

    let mut scored = Vec::with_capacity(docs.len());
    for (mut doc, score) in docs.into_iter().zip(scores) {
        match score {
            Some(score) => {
                doc.lm_score = Some(score);
                scored.push(doc);
            }
            None => record.drop_one("unscorable"),
        }
    }
    write_documents_atomic(output, &scored)?;
    let stats_out = compute_stats(scored.iter());
    record.docs_out = stats_out.doc_count;
    record.tokens_out = stats_out.token_count;
    record.inputs.push(file_hash(input)?);
    record.inputs.push(file_hash(lm)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Drop documents scoring below the percentile cutoff.
pub fn run_filter(
    ctx: &StageContext,
    input: &Path,
    output: &Path,
    pct: f64,
) -> anyhow::Result<StageRecord> {
    let _ = ctx;
    require_file(input)?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let mut record = StageRecord::new("filter-docs");
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let kept = if docs.is_empty() {
        docs
    } else {
        let scores: Vec<f64> = docs
            .iter()
            .map(|doc| {
                doc.lm_score.ok_or_else(|| {
                    anyhow::anyhow!("document {} has no lm_score; run score-docs first", doc.id)
                })
            })
            .collect::<anyhow::Result<_>>()?;
        let cutoff = percentile_threshold(&scores, pct)?;
        let (kept, dropped) = filter_by_score(docs, cutoff)?;
        record.drops.insert("below_cutoff".to_string(), dropped.len() as u64);
        kept
    };

    write_documents_atomic(output, &kept)?;
    let stats_out = compute_stats(kept.iter());
    record.docs_out = stats_out.doc_count;
    record.tokens_out = stats_out.token_count;
    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Split one source's documents into train and validation files.
pub fn run_split(
    ctx: &StageContext,
    input: &Path,
    train_out: &Path,
    validation_out: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    let seed = ctx.config.require_seed()?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let stage = match docs.first() {
        Some(doc) => format!("split:{}", doc.source),
        None => "split".to_string(),
    };
    let mut record = StageRecord::new(stage.clone());
    record.seed = Some(seed);
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let mut rng = stage_rng(seed, &stage, 0);
    let outcome = corpusprep::mixture::split_train_validation(docs, &ctx.config.mixture, &mut rng)?;
    if outcome.warning {
        record.drops.insert("validation_floor_warning".to_string(), 1);
        eprintln!(
            "warning: {stage}: source too small for the validation floors; \
             holding out all but one document"
        );
    }
    write_documents_atomic(train_out, &outcome.train)?;
    write_documents_atomic(validation_out, &outcome.validation)?;

    let stats_out = compute_stats(outcome.train.iter().chain(outcome.validation.iter()));
    record.docs_out = stats_out.doc_count;
    record.tokens_out = stats_out.token_count;
    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(train_out)?);
    record.outputs.push(file_hash(validation_out)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Encode documents into token id records. Newlines are flattened to
/// spaces so one record covers the whole document.
pub fn run_tokenize(
    ctx: &StageContext,
    input: &Path,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    let start = Instant::now();
    let docs = load_documents(input)?;
    let mut record = StageRecord::new("tokenize");
    let stats_in = compute_stats(docs.iter());
    record.docs_in = stats_in.doc_count;
    record.tokens_in = stats_in.token_count;

    let vocab = ctx.vocab()?;
    let records: Vec<TokenRecord> = docs
        .par_iter()
        .map(|doc| TokenRecord {
            id: doc.id.clone(),
            source: doc.source,
            ids: vocab.encode(&doc.text.replace('\n', " ")),
        })
        .collect();

    write_records_atomic(output, &records)?;
    record.docs_out = records.len() as u64;
    record.tokens_out = records.iter().map(|r| r.ids.len() as u64).sum();
    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Load per-source streams and draw a weighted mixture of `n` records.
/// Re-ids each drawn record so cycled streams stay unique.
fn mix_streams<T, F, G>(
    ctx: &StageContext,
    streams: BTreeMap<Source, Vec<T>>,
    n: usize,
    stage: &str,
    re_id: F,
    tokens_of: G,
) -> anyhow::Result<(Vec<T>, StageRecord)>
where
    T: Clone,
    F: Fn(usize, &mut T),
    G: Fn(&T) -> u64,
{
    let seed = ctx.config.require_seed()?;
    let start = Instant::now();
    let mut record = StageRecord::new(stage);
    record.seed = Some(seed);
    record.docs_in = streams.values().map(|v| v.len() as u64).sum();
    record.tokens_in = streams.values().flatten().map(&tokens_of).sum();

    let mut rng = stage_rng(seed, stage, 0);
    let mut drawn = sample_mixture(&mut rng, &streams, &ctx.config.mixture, n)?;
    for (i, item) in drawn.iter_mut().enumerate() {
        re_id(i, item);
    }
    record.docs_out = drawn.len() as u64;
    record.tokens_out = drawn.iter().map(&tokens_of).sum();
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok((drawn, record))
}

/// Mix documents from the configured per-source inputs.
pub fn run_mixture_docs(
    ctx: &StageContext,
    n: usize,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    let mut streams: BTreeMap<Source, Vec<Document>> = BTreeMap::new();
    let mut inputs = Vec::new();
    for (source, path) in &ctx.config.inputs {
        require_file(path)?;
        streams.insert(*source, load_documents(path)?);
        inputs.push(file_hash(path)?);
    }
    let (mixed, mut record) = mix_streams(
        ctx,
        streams,
        n,
        "make-mixture",
        |i, doc: &mut Document| doc.id = format!("mix-{i:06}-{}", doc.id),
        |doc| count_tokens(&doc.text),
    )?;
    write_documents_atomic(output, &mixed)?;
    record.inputs = inputs;
    record.outputs.push(file_hash(output)?);
    Ok(record)
}

/// Mix token records from per-source files.
pub fn run_mixture_tokens(
    ctx: &StageContext,
    inputs: &BTreeMap<Source, PathBuf>,
    n: usize,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    let mut streams: BTreeMap<Source, Vec<TokenRecord>> = BTreeMap::new();
    let mut hashes = Vec::new();
    for (source, path) in inputs {
        require_file(path)?;
        streams.insert(*source, read_records(path)?);
        hashes.push(file_hash(path)?);
    }
    let (mixed, mut record) = mix_streams(
        ctx,
        streams,
        n,
        "make-mixture",
        |i, rec: &mut TokenRecord| rec.id = format!("mix-{i:06}-{}", rec.id),
        |rec| rec.ids.len() as u64,
    )?;
    write_records_atomic(output, &mixed)?;
    record.inputs = hashes;
    record.outputs.push(file_hash(output)?);
    Ok(record)
}

/// Synthesize one denoising example per token record. Records shorter
/// than the denoisable minimum are dropped.
pub fn run_denoise(
    ctx: &StageContext,
    input: &Path,
    output: &Path,
) -> anyhow::Result<StageRecord> {
    require_file(input)?;
    let seed = ctx.config.require_seed()?;
    let start = Instant::now();
    let records: Vec<TokenRecord> = read_records(input)?;
    let mut record = StageRecord::new("denoise");
    record.seed = Some(seed);
    record.docs_in = records.len() as u64;
    record.tokens_in = records.iter().map(|r| r.ids.len() as u64).sum();

    let vocab = ctx.vocab()?.extend_sentinels(SENTINEL_COUNT)?;
    let options = DenoiseOptions {
        weights: ctx.config.denoise.weights,
        seq_len: ctx.config.denoise.seq_len,
        prefix_mode_token: ctx.config.denoise.prefix_mode_token,
    };
    let results: Vec<anyhow::Result<Option<ExampleRecord>>> = records
        .par_iter()
        .enumerate()
        .map(|(i, token_record)| {
            let mut rng = stage_rng(seed, "denoise", i as u64);
            match make_example(&mut rng, &token_record.ids, &vocab, &options) {
                Ok(example) => Ok(Some(ExampleRecord { id: token_record.id.clone(), example })),
                Err(DenoiseError::TooShort { .. }) => Ok(None),
                Err(e) => Err(e).with_context(|| format!("record {}", token_record.id)),
            }
        })
        .collect();

    let mut examples = Vec::with_capacity(records.len());
    for result in results {
        match result? {
            Some(example) => examples.push(example),
            None => record.drop_one("too_short"),
        }
    }
    write_records_atomic(output, &examples)?;
    record.docs_out = examples.len() as u64;
    record.tokens_out = examples
        .iter()
        .map(|r| (r.example.input_ids.len() + r.example.target_ids.len()) as u64)
        .sum();
    record.inputs.push(file_hash(input)?);
    record.outputs.push(file_hash(output)?);
    record.wall_ms = start.elapsed().as_millis() as u64;
    Ok(record)
}

/// Which metric family the metrics command computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricsTask {
    /// Text generation: ROUGE, BLEU, exact-match METEOR.
    Generation,
    /// Label prediction: weighted precision/recall/F1 and accuracy.
    Classification,
    /// Real-valued prediction: Pearson correlation.
    Regression,
}

/// Compute metrics over prediction/reference pairs and emit a JSON report
/// plus a plain-text table.
pub fn run_metrics(
    ctx: &StageContext,
    input: &Path,
    task: MetricsTask,
    output: Option<&Path>,
) -> anyhow::Result<()> {
    require_file(input)?;
    let rows: Vec<MetricRow> = read_records(input)?;
    if rows.is_empty() {
        bail!("metrics input {} has no records", input.display());
    }

    let mut reports: Vec<MetricReport> = Vec::new();
    match task {
        MetricsTask::Generation => {
            let candidates: Vec<Vec<&str>> =
                rows.iter().map(|r| whitespace_tokens(&r.prediction)).collect();
            let references: Vec<Vec<&str>> =
                rows.iter().map(|r| whitespace_tokens(&r.reference)).collect();
            let n = rows.len() as f64;
            for (name, order) in [("rouge-1", 1), ("rouge-2", 2)] {
                let mut precision = 0.0;
                let mut recall = 0.0;
                let mut f1 = 0.0;
                for (c, r) in candidates.iter().zip(&references) {
                    let prf = rouge_n(c, r, order);
                    precision += prf.precision;
                    recall += prf.recall;
                    f1 += prf.f1;
                }
                reports.push(
                    MetricReport::new(name)
                        .with_value("precision", precision / n)
                        .with_value("recall", recall / n)
                        .with_value("f1", f1 / n),
                );
            }
            let mut precision = 0.0;
            let mut recall = 0.0;
            let mut f1 = 0.0;
            let mut meteor = 0.0;
            for (c, r) in candidates.iter().zip(&references) {
                let prf = rouge_l(c, r);
                precision += prf.precision;
                recall += prf.recall;
                f1 += prf.f1;
                meteor += meteor_exact(c, r);
            }
            reports.push(
                MetricReport::new("rouge-l")
                    .with_value("precision", precision / n)
                    .with_value("recall", recall / n)
                    .with_value("f1", f1 / n),
            );
            let bleu = bleu_report(&candidates, &references)?;
            let mut bleu_metric = MetricReport::new("bleu")
                .with_value("score", bleu.score)
                .with_value("brevity_penalty", bleu.brevity_penalty);
            bleu_metric.note = Some(bleu.smoothing.to_string());
            reports.push(bleu_metric);
            reports.push(MetricReport::new("meteor-exact").with_value("score", meteor / n));
        }
        MetricsTask::Classification => {
            let gold: Vec<&str> = rows.iter().map(|r| r.reference.as_str()).collect();
            let pred: Vec<&str> = rows.iter().map(|r| r.prediction.as_str()).collect();
            let (prf, accuracy) = weighted_prf(&gold, &pred)?;
            reports.push(
                MetricReport::new("weighted-prf")
                    .with_value("precision", prf.precision)
                    .with_value("recall", prf.recall)
                    .with_value("f1", prf.f1)
                    .with_value("accuracy", accuracy),
            );
        }
        MetricsTask::Regression => {
            let parse = |field: &str, value: &str, id: &str| -> anyhow::Result<f64> {
                value.trim().parse().with_context(|| {
                    format!("record {id}: {field} {value:?} is not a number")
                })
            };
            let mut xs = Vec::with_capacity(rows.len());
            let mut ys = Vec::with_capacity(rows.len());
            for row in &rows {
                xs.push(parse("reference", &row.reference, &row.id)?);
                ys.push(parse("prediction", &row.prediction, &row.id)?);
            }
            reports.push(MetricReport::new("pearson").with_value("r", pearson(&xs, &ys)?));
        }
    }

    let json = serde_json::json!({
        "task": match task {
            MetricsTask::Generation => "generation",
            MetricsTask::Classification => "classification",
            MetricsTask::Regression => "regression",
        },
        "examples": rows.len(),
        "metrics": reports,
    });
    if !ctx.quiet {
        let mut table = String::new();
        for report in &reports {
            for (key, value) in &report.values {
                table.push_str(&format!("{:<24} {value:.6}\n", format!("{}.{key}", report.name)));
            }
        }
        print!("{table}");
    }
    println!("{json}");
    if let Some(path) = output {
        write_atomic(path, serde_json::to_string_pretty(&json)?.as_bytes())?;
    }
    Ok(())
}

/// Print corpus statistics overall and per source.
pub fn run_stats(input: &Path) -> anyhow::Result<()> {
    require_file(input)?;
    let docs = load_documents(input)?;
    let total = compute_stats(docs.iter());
    let mut per_source = BTreeMap::new();
    for source in Source::ALL {
        let stats = compute_stats(docs.iter().filter(|d| d.source == source));
        if stats.doc_count > 0 {
            per_source.insert(source.to_string(), stats);
        }
    }
    let json = serde_json::json!({ "total": total, "per_source": per_source });
    println!("{json}");
    Ok(())
}

/// Run the full chain: clean, score and filter the scientific sources,
/// split, tokenize, mix, and denoise. Every intermediate is persisted
/// under the output directory and every stage is recorded in the manifest.
pub fn run_prepare(ctx: &StageContext) -> anyhow::Result<()> {
    ctx.config.require_seed()?;
    let out_dir = ctx.config.out_dir();
    for (source, mix) in &ctx.config.mixture.sources {
        if mix.weight > 0.0 && !ctx.config.inputs.contains_key(source) {
            return Err(ValidationError(format!(
                "source {source} has weight {} but no input file",
                mix.weight
            ))
            .into());
        }
    }
    crate::manifest::reset(&out_dir)?;

    let emit = |record: StageRecord| -> anyhow::Result<()> {
        crate::manifest::append(&out_dir, &record)?;
        report_stage(&record, ctx.quiet);
        Ok(())
    };

    let sources: Vec<Source> =
        Source::ALL.into_iter().filter(|s| ctx.config.inputs.contains_key(s)).collect();

    // Clean, then score and percentile-filter the scientific sources.
    let mut ready: BTreeMap<Source, PathBuf> = BTreeMap::new();
    for &source in &sources {
        let input = &ctx.config.inputs[&source];
        let cleaned = out_dir.join(format!("clean/{source}.jsonl"));
        let mut record = run_clean(ctx, CleanKind::for_source(source), input, &cleaned)?;
        record.stage = format!("{}:{source}", record.stage);
        emit(record)?;

        let pct = match source {
            Source::Dergipark => Some(ctx.config.score.dergipark_pct),
            Source::Yoktez => Some(ctx.config.score.yoktez_pct),
            _ => None,
        };
        let staged = match pct {
            None => cleaned,
            Some(pct) => {
                let lm = out_dir.join(format!("lm/{source}.arpa"));
                let mut record = run_train_lm(ctx, &cleaned, &lm)?;
                record.stage = format!("train-lm:{source}");
                emit(record)?;

                let scored = out_dir.join(format!("score/{source}.jsonl"));
                let mut record = run_score(ctx, &cleaned, &lm, &scored)?;
                record.stage = format!("score-docs:{source}");
                emit(record)?;

                let filtered = out_dir.join(format!("filter/{source}.jsonl"));
                let mut record = run_filter(ctx, &scored, &filtered, pct)?;
                record.stage = format!("filter-docs:{source}");
                emit(record)?;
                filtered
            }
        };
        ready.insert(source, staged);
    }

    // Split and tokenize the training halves.
    let mut token_files: BTreeMap<Source, PathBuf> = BTreeMap::new();
    for &source in &sources {
        let train_out = out_dir.join(format!("split/{source}.train.jsonl"));
        let validation_out = out_dir.join(format!("split/{source}.validation.jsonl"));
        emit(run_split(ctx, &ready[&source], &train_out, &validation_out)?)?;

        let tokens = out_dir.join(format!("tokens/{source}.jsonl"));
        let mut record = run_tokenize(ctx, &train_out, &tokens)?;
        record.stage = format!("tokenize:{source}");
        emit(record)?;
        token_files.insert(source, tokens);
    }

    // Mix and denoise.
    let mixture_out = out_dir.join("mixture.jsonl");
    emit(run_mixture_tokens(ctx, &token_files, ctx.config.prepare.examples, &mixture_out)?)?;
    let examples_out = out_dir.join("examples.jsonl");
    emit(run_denoise(ctx, &mixture_out, &examples_out)?)?;
    Ok(())
}

/// One-line progress summary on standard error.
pub fn report_stage(record: &StageRecord, quiet: bool) {
    if quiet {
        return;
    }
    eprintln!(
        "[{}] docs {} -> {}, tokens {} -> {}, {} ms",
        record.stage,
        record.docs_in,
        record.docs_out,
        record.tokens_in,
        record.tokens_out,
        record.wall_ms
    );
}
