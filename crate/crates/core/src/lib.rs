//! Corpus preparation for encoder-decoder language model pretraining.
//!
//! The crate covers the full data path: JSONL corpus handling,
//! source-specific document cleaning, line-wise filtering, n-gram
//! language model scoring, unigram tokenization, denoising example
//! synthesis, source mixing, and evaluation metrics.

#![warn(missing_docs)]

pub mod cleaners;
pub mod corpus;
pub mod denoise;
pub mod langid;
pub mod linefilter;
pub mod metrics;
pub mod mixture;
pub mod ngram;
pub mod rng;
pub mod text;
pub mod tokenizer;

pub use cleaners::{
    clean_book, clean_creative, clean_parlamint, clean_scientific, normalize_ocr,
    strip_preamble, strip_thesis_boilerplate, BookCleanConfig, CleanError, CleanReport, OcrTable,
};
pub use corpus::{
    compute_stats, load_documents, read_documents, read_documents_file, write_documents,
    write_documents_file, CorpusError, CorpusStats, Document, DocumentReader, Source,
};
pub use denoise::{
    apply_s_denoise, apply_span_corruption, make_example, reconstruct, sample_mode, sample_spans,
    token_budget, DenoiseError, DenoiseMode, DenoiseOptions, DenoisedExample, DenoiserSpec,
    MixtureWeights, SpanLengthLaw, SpanSet,
};
pub use langid::{LangIdError, LanguageModelCharNgram, UNKNOWN_LANGUAGE};
pub use linefilter::{
    classify_language, compute_line_features, detect_section_boundary, filter_document,
    filter_document_with, match_metadata, smooth_language_labels, strip_inline_citations,
    DropReason, FilterConfig, FilterError, LineFeatures, LineVerdict, MetadataKind, PatternSet,
    SectionKind,
};
pub use metrics::{
    bleu, bleu_report, meteor_exact, pearson, rouge_l, rouge_n, weighted_prf, BleuReport,
    MetricReport, MetricsError, PRF,
};
pub use mixture::{
    sample_mixture, split_train_validation, MixtureError, MixtureSpec, SourceMix, SplitOutcome,
};
pub use ngram::{
    filter_by_score, parse_arpa, percentile_threshold, read_arpa, render_arpa, train, write_arpa,
    DocScore, NGramError, NGramModel, Smoothing,
};
pub use rng::stage_rng;
pub use tokenizer::{load_vocab, parse_vocab, TokenizerError, TokenizerVocab};
