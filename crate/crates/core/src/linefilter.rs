//! Line-wise document filtering.
//!
//! Each line is citation-stripped, then checked against statistics
//! thresholds, metadata and caption patterns, and a language classifier
//! with neighborhood smoothing. A document is finally truncated at its
//! first bibliography or footnotes heading. Every original line gets a
//! [`LineVerdict`] recording why it was kept or dropped.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::langid::LanguageModelCharNgram;
use crate::text::{fold_turkish, whitespace_tokens};

/// RFC-lite email pattern shared with the book cleaner.
pub(crate) const EMAIL_PATTERN: &str = r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}";

/// Per-line statistics backing the threshold checks.
///
/// A numeric token is one whose characters are all ASCII digits or the
/// digit punctuation `.`, `,`, `%`. Character counts are Unicode scalar
/// values, digit counts are ASCII digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFeatures {
    /// Characters in the line.
    pub char_count: usize,
    /// Whitespace-separated tokens in the line.
    pub token_count: usize,
    /// Numeric tokens over total tokens; 0 for an empty line.
    pub numeric_token_ratio: f64,
    /// Digit characters over total characters; 0 for an empty line.
    pub digit_char_ratio: f64,
    /// Mean token length in characters; 0 for an empty line.
    pub mean_token_length: f64,
}

/// Computes [`LineFeatures`] for one line.
pub fn compute_line_features(line: &str) -> LineFeatures {
    let char_count = line.chars().count();
    let digit_count = line.chars().filter(char::is_ascii_digit).count();
    let tokens = whitespace_tokens(line);
    let token_count = tokens.len();
    let numeric_count = tokens.iter().filter(|t| is_numeric_token(t)).count();
    let token_chars: usize = tokens.iter().map(|t| t.chars().count()).sum();
    LineFeatures {
        char_count,
        token_count,
        numeric_token_ratio: ratio(numeric_count, token_count),
        digit_char_ratio: ratio(digit_count, char_count),
        mean_token_length: ratio(token_chars, token_count),
    }
}

/// True for tokens made only of ASCII digits and `.`, `,`, `%`.
pub(crate) fn is_numeric_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '%'))
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 { 0.0 } else { part as f64 / whole as f64 }
}

/// Thresholds and language settings for [`filter_document`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Lines with fewer characters are dropped.
    pub min_chars: usize,
    /// Lines with fewer tokens are dropped.
    pub min_tokens: usize,
    /// Lines whose numeric token ratio exceeds this are dropped.
    pub max_numeric_token_ratio: f64,
    /// Lines whose digit character ratio exceeds this are dropped.
    pub max_digit_char_ratio: f64,
    /// Lines whose mean token length falls below this are dropped.
    pub min_mean_token_length: f64,
    /// Lines whose mean token length exceeds this are dropped.
    pub max_mean_token_length: f64,
    /// Neighbor radius for language label smoothing.
    pub language_window: usize,
    /// Language code lines must match to be kept.
    pub target_language: String,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_chars: 10,
            min_tokens: 3,
            max_numeric_token_ratio: 0.5,
            max_digit_char_ratio: 0.3,
            min_mean_token_length: 2.0,
            max_mean_token_length: 12.0,
            language_window: 1,
            target_language: "tr".to_string(),
        }
    }
}

impl FilterConfig {
    /// Rejects non-finite thresholds.
    pub fn validate(&self) -> Result<(), FilterError> {
        let named = [
            ("max_numeric_token_ratio", self.max_numeric_token_ratio),
            ("max_digit_char_ratio", self.max_digit_char_ratio),
            ("min_mean_token_length", self.min_mean_token_length),
            ("max_mean_token_length", self.max_mean_token_length),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(FilterError::NonFiniteThreshold { name });
            }
        }
        Ok(())
    }
}

/// Why a line was kept or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Line kept.
    Ok,
    /// Fewer characters than `min_chars`.
    TooShort,
    /// Fewer tokens than `min_tokens`.
    TooFewTokens,
    /// Numeric token ratio or digit character ratio over its cap.
    TooNumeric,
    /// Mean token length outside the configured range.
    TokenLengthOutOfRange,
    /// Neither the raw nor the smoothed language label matches the target.
    WrongLanguage,
    /// Matched a date, email, or name list pattern.
    Metadata,
    /// Matched a figure or table caption pattern.
    Caption,
    /// Heading of, or line inside, a bibliography or footnotes section.
    SpecialSection,
}

/// Per-line outcome of [`filter_document`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineVerdict {
    /// Whether the line was kept.
    pub keep: bool,
    /// [`DropReason::Ok`] exactly when `keep` is true.
    pub reason: DropReason,
}

impl LineVerdict {
    fn ok() -> Self {
        LineVerdict { keep: true, reason: DropReason::Ok }
    }

    fn drop(reason: DropReason) -> Self {
        debug_assert!(reason != DropReason::Ok);
        LineVerdict { keep: false, reason }
    }
}

/// Metadata pattern category matched by [`match_metadata`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataKind {
    /// Standalone or labeled date line.
    Date,
    /// Line containing an email address.
    Email,
    /// Figure or table caption.
    Caption,
    /// Comma-separated list of person names.
    NameList,
}

/// Section kind detected by [`detect_section_boundary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    /// Reference list heading.
    Bibliography,
    /// Footnotes heading.
    Footnotes,
    /// Acknowledgments heading.
    Acknowledgments,
}

/// Errors from pattern loading and configuration validation.
#[derive(Debug, Error)]
pub enum FilterError {
    /// A pattern or heading file could not be read.
    #[error("cannot read pattern file: {0}")]
    Io(#[from] std::io::Error),
    /// A non-comment line is not `<kind><TAB><entry>`.
    #[error("pattern line {line}: expected <kind><TAB><entry>")]
    MalformedPattern {
        /// 1-based line number in the pattern file.
        line: usize,
    },
    /// An entry kind outside the documented set.
    #[error("pattern line {line}: unknown kind `{kind}`")]
    UnknownKind {
        /// 1-based line number in the pattern file.
        line: usize,
        /// The offending kind label.
        kind: String,
    },
    /// A pattern failed to compile.
    #[error("pattern line {line}: invalid regex: {source}")]
    BadRegex {
        /// 1-based line number in the pattern file.
        line: usize,
        /// Compiler error.
        source: regex::Error,
    },
    /// A threshold was NaN or infinite.
    #[error("filter threshold `{name}` must be finite")]
    NonFiniteThreshold {
        /// Config field name.
        name: &'static str,
    },
}

/// Compiled metadata patterns, citation patterns, and section headings.
///
/// The bundled set lives in `resources/*.txt`; [`PatternSet::load`]
/// reads replacements in the same format (one `<kind><TAB><entry>` per
/// line, `#` comments).
#[derive(Debug)]
pub struct PatternSet {
    date: Vec<Regex>,
    email: Vec<Regex>,
    caption: Vec<Regex>,
    name_list: Vec<Regex>,
    citations: Vec<Regex>,
    /// (kind, case-folded heading)
    headings: Vec<(SectionKind, String)>,
}

impl PatternSet {
    /// The compiled-in default patterns.
    pub fn builtin() -> &'static PatternSet {
        static BUILTIN: LazyLock<PatternSet> = LazyLock::new(|| {
            PatternSet::from_strs(
                include_str!("../resources/metadata_patterns.txt"),
                include_str!("../resources/citation_patterns.txt"),
                include_str!("../resources/section_headings.txt"),
            )
            .expect("bundled pattern files are valid")
        });
        &BUILTIN
    }

    /// Parses the three pattern files from their text contents.
    pub fn from_strs(
        metadata: &str,
        citations: &str,
        headings: &str,
    ) -> Result<PatternSet, FilterError> {
        let mut set = PatternSet {
            date: Vec::new(),
            email: Vec::new(),
            caption: Vec::new(),
            name_list: Vec::new(),
            citations: Vec::new(),
            headings: Vec::new(),
        };
        for (line, kind, entry) in entries(metadata) {
            let bucket = match kind {
                "date" => &mut set.date,
                "email" => &mut set.email,
                "caption" => &mut set.caption,
                "name_list" => &mut set.name_list,
                other => {
                    return Err(FilterError::UnknownKind { line, kind: other.to_string() });
                }
            };
            bucket.push(compile(line, entry)?);
        }
        for (line, kind, entry) in entries(citations) {
            match kind {
                "paren" | "bracket" => set.citations.push(compile(line, entry)?),
                other => {
                    return Err(FilterError::UnknownKind { line, kind: other.to_string() });
                }
            }
        }
        for (line, kind, entry) in entries(headings) {
            let section = match kind {
                "bibliography" => SectionKind::Bibliography,
                "footnotes" => SectionKind::Footnotes,
                "acknowledgments" => SectionKind::Acknowledgments,
                other => {
                    return Err(FilterError::UnknownKind { line, kind: other.to_string() });
                }
            };
            set.headings.push((section, fold_turkish(entry.trim())));
        }
        set.validate_shape(metadata, citations, headings)?;
        Ok(set)
    }

    /// Reads the three pattern files from disk.
    pub fn load(metadata: &Path, citations: &Path, headings: &Path) -> Result<PatternSet, FilterError> {
        PatternSet::from_strs(
            &std::fs::read_to_string(metadata)?,
            &std::fs::read_to_string(citations)?,
            &std::fs::read_to_string(headings)?,
        )
    }

    /// Rejects files whose non-comment lines lack the tab separator.
    fn validate_shape(&self, metadata: &str, citations: &str, headings: &str) -> Result<(), FilterError> {
        for raw in [metadata, citations, headings] {
            for (idx, line) in raw.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                if line.split_once('\t').is_none() {
                    return Err(FilterError::MalformedPattern { line: idx + 1 });
                }
            }
        }
        Ok(())
    }
}

/// Yields (1-based line, kind, entry) for non-comment tabbed lines.
fn entries(raw: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    raw.lines().enumerate().filter_map(|(idx, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        line.split_once('\t').map(|(kind, entry)| (idx + 1, kind.trim(), entry))
    })
}

fn compile(line: usize, pattern: &str) -> Result<Regex, FilterError> {
    Regex::new(pattern).map_err(|source| FilterError::BadRegex { line, source })
}

/// Classifies one line with the given model.
///
/// Returns the best language code and the log-likelihood margin over
/// the runner-up; lines shorter than the model order come back as
/// `("unknown", 0.0)`.
pub fn classify_language(line: &str, model: &LanguageModelCharNgram) -> (String, f64) {
    model.classify(line)
}

/// Matches a line against the bundled metadata patterns.
pub fn match_metadata(line: &str) -> Option<MetadataKind> {
    match_metadata_with(line, PatternSet::builtin())
}

/// Matches a line against a specific pattern set.
///
/// Kinds are tried in the order date, email, caption, name list; the
/// first matching pattern wins.
pub fn match_metadata_with(line: &str, patterns: &PatternSet) -> Option<MetadataKind> {
    let buckets = [
        (MetadataKind::Date, &patterns.date),
        (MetadataKind::Email, &patterns.email),
        (MetadataKind::Caption, &patterns.caption),
        (MetadataKind::NameList, &patterns.name_list),
    ];
    for (kind, bucket) in buckets {
        if bucket.iter().any(|re| re.is_match(line)) {
            return Some(kind);
        }
    }
    None
}

/// Removes inline citations using the bundled patterns.
pub fn strip_inline_citations(line: &str) -> String {
    strip_inline_citations_with(line, PatternSet::builtin())
}

/// Removes inline citations using a specific pattern set.
///
/// Patterns are applied in order until no pattern matches, then runs of
/// two or more spaces are collapsed to one. Never lengthens the line.
pub fn strip_inline_citations_with(line: &str, patterns: &PatternSet) -> String {
    static MULTI_SPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(" {2,}").unwrap());
    let mut text = line.to_string();
    loop {
        let before = text.len();
        for re in &patterns.citations {
            // Removal can splice new matches together, so repeat per
            // pattern until stable.
            loop {
                let replaced = re.replace_all(&text, "");
                if replaced == text {
                    break;
                }
                text = replaced.into_owned();
            }
        }
        if text.len() == before {
            break;
        }
    }
    MULTI_SPACE.replace_all(&text, " ").into_owned()
}

/// Detects a special-section heading using the bundled headings.
pub fn detect_section_boundary(line: &str) -> Option<SectionKind> {
    detect_section_boundary_with(line, PatternSet::builtin())
}

/// Detects a special-section heading using a specific pattern set.
///
/// The trimmed, case-folded line must equal a listed heading; embedded
/// mentions do not count.
pub fn detect_section_boundary_with(line: &str, patterns: &PatternSet) -> Option<SectionKind> {
    let folded = fold_turkish(line.trim());
    patterns
        .headings
        .iter()
        .find(|(_, heading)| *heading == folded)
        .map(|(kind, _)| *kind)
}

/// Replaces outlier language labels with their neighborhood majority.
///
/// Each position is compared against the other labels in a window of
/// `2 * window + 1` positions clamped to the sequence bounds. If a
/// strict majority of those neighbors agrees on a different label, the
/// position takes that label. Single pass over the original labels.
pub fn smooth_language_labels<S: AsRef<str>>(labels: &[S], window: usize) -> Vec<String> {
    let n = labels.len();
    let size = 2 * window + 1;
    let mut smoothed = Vec::with_capacity(n);
    for i in 0..n {
        let raw = labels[i].as_ref();
        if window == 0 || n < 2 {
            smoothed.push(raw.to_string());
            continue;
        }
        let start = if n <= size { 0 } else { i.saturating_sub(window).min(n - size) };
        let end = (start + size).min(n);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (j, label) in labels.iter().enumerate().take(end).skip(start) {
            if j != i {
                *counts.entry(label.as_ref()).or_insert(0) += 1;
            }
        }
        let neighbors = end - start - 1;
        // At most one label can hold a strict majority.
        let majority = counts.iter().find(|(_, &c)| c * 2 > neighbors).map(|(l, _)| *l);
        match majority {
            Some(label) if label != raw => smoothed.push(label.to_string()),
            _ => smoothed.push(raw.to_string()),
        }
    }
    smoothed
}

/// Filters a document line by line with the bundled patterns.
pub fn filter_document(
    doc: &Document,
    config: &FilterConfig,
    lang_model: &LanguageModelCharNgram,
) -> (Document, Vec<LineVerdict>) {
    filter_document_with(doc, config, lang_model, PatternSet::builtin())
}

/// Filters a document line by line with a specific pattern set.
///
/// Stages run in order: citation stripping, statistics thresholds,
/// metadata and caption matching, language classification with
/// smoothing over the surviving lines, then truncation from the first
/// bibliography or footnotes heading (which overrides earlier verdicts
/// for the truncated tail). The cleaned text is the kept stripped lines
/// joined with newlines; the verdict list has one entry per input line.
pub fn filter_document_with(
    doc: &Document,
    config: &FilterConfig,
    lang_model: &LanguageModelCharNgram,
    patterns: &PatternSet,
) -> (Document, Vec<LineVerdict>) {
    let stripped: Vec<String> =
        doc.text.split('\n').map(|l| strip_inline_citations_with(l, patterns)).collect();
    let mut verdicts: Vec<LineVerdict> = stripped
        .iter()
        .map(|line| stats_and_metadata_verdict(line, config, patterns))
        .collect();

    // Language labels are smoothed over the lines that are still
    // candidates, so re-filtering sees the same label sequence.
    let candidates: Vec<usize> = (0..stripped.len()).filter(|&i| verdicts[i].keep).collect();
    let labels: Vec<String> =
        candidates.iter().map(|&i| lang_model.classify(&stripped[i]).0).collect();
    let smoothed = smooth_language_labels(&labels, config.language_window);
    for (k, &i) in candidates.iter().enumerate() {
        if labels[k] != config.target_language && smoothed[k] != config.target_language {
            verdicts[i] = LineVerdict::drop(DropReason::WrongLanguage);
        }
    }

    let cut = stripped.iter().position(|line| {
        matches!(
            detect_section_boundary_with(line, patterns),
            Some(SectionKind::Bibliography) | Some(SectionKind::Footnotes)
        )
    });
    if let Some(first) = cut {
        for verdict in &mut verdicts[first..] {
            *verdict = LineVerdict::drop(DropReason::SpecialSection);
        }
    }
    // A lone acknowledgments heading is dropped without truncating.
    for i in 0..cut.unwrap_or(stripped.len()) {
        if detect_section_boundary_with(&stripped[i], patterns)
            == Some(SectionKind::Acknowledgments)
        {
            verdicts[i] = LineVerdict::drop(DropReason::SpecialSection);
        }
    }

    let kept: Vec<&str> = verdicts
        .iter()
        .zip(&stripped)
        .filter(|(v, _)| v.keep)
        .map(|(_, line)| line.as_str())
        .collect();
    let mut cleaned = doc.clone();
    cleaned.text = kept.join("\n");
    (cleaned, verdicts)
}

fn stats_and_metadata_verdict(
    line: &str,
    config: &FilterConfig,
    patterns: &PatternSet,
) -> LineVerdict {
    let f = compute_line_features(line);
    if f.char_count < config.min_chars {
        return LineVerdict::drop(DropReason::TooShort);
    }
    if f.token_count < config.min_tokens {
        return LineVerdict::drop(DropReason::TooFewTokens);
    }
    if f.numeric_token_ratio > config.max_numeric_token_ratio
        || f.digit_char_ratio > config.max_digit_char_ratio
    {
        return LineVerdict::drop(DropReason::TooNumeric);
    }
    if f.mean_token_length < config.min_mean_token_length
        || f.mean_token_length > config.max_mean_token_length
    {
        return LineVerdict::drop(DropReason::TokenLengthOutOfRange);
    }
    match match_metadata_with(line, patterns) {
        Some(MetadataKind::Caption) => LineVerdict::drop(DropReason::Caption),
        Some(_) => LineVerdict::drop(DropReason::Metadata),
        None => LineVerdict::ok(),
    }
}
