//! Source-specific cleaning front-ends.
//!
//! Scientific articles and theses get OCR normalization, preamble and
//! boilerplate removal, then the line filter. Books and creative
//! writings get punctuation standardization, metadata and junk line
//! removal, and back-matter truncation. Parliament transcripts pass
//! through untouched except for newline normalization.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Source};
use crate::langid::LanguageModelCharNgram;
use crate::linefilter::{
    self, filter_document, FilterConfig, LineVerdict, EMAIL_PATTERN,
};
use crate::text::{fold_turkish, whitespace_tokens};

/// Errors from cleaner configuration and table loading.
#[derive(Debug, Error)]
pub enum CleanError {
    /// A table or keyword file could not be read.
    #[error("cannot read cleaner resource: {0}")]
    Io(#[from] std::io::Error),
    /// A non-comment OCR table line is not `<key><TAB><replacement>`.
    #[error("OCR table line {line}: expected <key><TAB><replacement>")]
    MalformedEntry {
        /// 1-based line number in the table file.
        line: usize,
    },
    /// The same key mapped twice.
    #[error("OCR table key {key:?} appears more than once")]
    DuplicateKey {
        /// The repeated key.
        key: String,
    },
    /// A document handed to a cleaner for a different source.
    #[error("document source `{got}` not accepted by the {cleaner} cleaner (expected {expected})")]
    WrongSource {
        /// Source label carried by the document.
        got: Source,
        /// Cleaner that rejected it.
        cleaner: &'static str,
        /// Accepted sources.
        expected: &'static str,
    },
    /// `truncate_after_fraction` outside (0, 1].
    #[error("truncate_after_fraction must be in (0, 1], got {value}")]
    BadFraction {
        /// The rejected value.
        value: f64,
    },
}

/// Replacement table for characters misread during text extraction.
///
/// Keys are matched longest-first, left to right, in a single pass, so
/// a key that is a prefix of a longer key never shadows it.
#[derive(Debug, Clone)]
pub struct OcrTable {
    /// Sorted by key byte length descending, then key ascending.
    entries: Vec<(String, String)>,
}

impl OcrTable {
    /// Builds a table from key/replacement pairs.
    pub fn new(
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<OcrTable, CleanError> {
        let mut entries: Vec<(String, String)> = pairs.into_iter().collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(CleanError::DuplicateKey { key: pair[0].0.clone() });
            }
        }
        Ok(OcrTable { entries })
    }

    /// The bundled table of common Turkish OCR confusions.
    pub fn builtin() -> &'static OcrTable {
        static BUILTIN: LazyLock<OcrTable> = LazyLock::new(|| {
            OcrTable::parse(include_str!("../resources/ocr_table.tsv"))
                .expect("bundled OCR table is valid")
        });
        &BUILTIN
    }

    /// Parses a two-column tab-separated table, `#` comments allowed.
    pub fn parse(raw: &str) -> Result<OcrTable, CleanError> {
        let mut pairs = Vec::new();
        for (idx, line) in raw.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('\t').ok_or(CleanError::MalformedEntry { line: idx + 1 })?;
            if key.is_empty() {
                return Err(CleanError::MalformedEntry { line: idx + 1 });
            }
            pairs.push((key.to_string(), value.to_string()));
        }
        OcrTable::new(pairs)
    }

    /// Reads a table file from disk.
    pub fn load(path: &Path) -> Result<OcrTable, CleanError> {
        OcrTable::parse(&std::fs::read_to_string(path)?)
    }

    /// Number of key/replacement pairs.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when the table has no entries.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn longest_match(&self, rest: &str) -> Option<&(String, String)> {
        self.entries.iter().find(|(key, _)| rest.starts_with(key))
    }
}

/// Applies an [`OcrTable`] over the text in one left-to-right pass.
///
/// Replacements are not rescanned, so the operation is idempotent
/// whenever no table value contains a table key.
pub fn normalize_ocr(text: &str, table: &OcrTable) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        if let Some((key, value)) = table.longest_match(rest) {
            out.push_str(value);
            rest = &rest[key.len()..];
        } else {
            let c = rest.chars().next().unwrap();
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

static ABSTRACT_HEADINGS: LazyLock<Vec<String>> =
    LazyLock::new(|| folded_list(include_str!("../resources/abstract_headings.txt")));
static BOILERPLATE_HEADINGS: LazyLock<Vec<String>> =
    LazyLock::new(|| folded_list(include_str!("../resources/boilerplate_headings.txt")));
static BOOK_METADATA_KEYWORDS: LazyLock<Vec<String>> =
    LazyLock::new(|| keyword_list(include_str!("../resources/book_metadata_keywords.txt")));
static BIBLIOGRAPHY_KEYWORDS: LazyLock<Vec<String>> =
    LazyLock::new(|| keyword_list(include_str!("../resources/bibliography_keywords.txt")));
static CREATIVE_KEYWORDS: LazyLock<Vec<String>> =
    LazyLock::new(|| keyword_list(include_str!("../resources/creative_keywords.txt")));
static COURSE_CODE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b[A-ZÇĞİÖŞÜ]{2,8} ?\d{3}\b").unwrap());
static EMAIL: LazyLock<Regex> = LazyLock::new(|| Regex::new(EMAIL_PATTERN).unwrap());

/// Lines to search past a boilerplate heading before giving up.
const BOILERPLATE_SPAN_CAP: usize = 200;

fn keyword_list(raw: &str) -> Vec<String> {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn folded_list(raw: &str) -> Vec<String> {
    keyword_list(raw).iter().map(|k| fold_turkish(k)).collect()
}

/// Drops front matter before the abstract heading.
///
/// The heading ("ÖZ", "ÖZET", "ABSTRACT", case-insensitive whole line)
/// must appear within the first 40% of lines (at least the first 10
/// lines are always searched); everything before it is dropped and the
/// heading is kept. Without such a heading the text is unchanged.
pub fn strip_preamble(text: &str) -> String {
    let lines: Vec<&str> = text.split('\n').collect();
    let window = 10usize.max((2 * lines.len()).div_ceil(5));
    let hit = lines.iter().take(window).position(|line| {
        let folded = fold_turkish(line.trim());
        ABSTRACT_HEADINGS.iter().any(|h| *h == folded)
    });
    match hit {
        Some(i) => lines[i..].join("\n"),
        None => text.to_string(),
    }
}

/// Drops thesis boilerplate blocks (contents, figure and table lists,
/// declarations).
///
/// Each listed heading starts a block that runs until the next whole
/// line in all caps of at most eight tokens, or until 200 lines have
/// been dropped after the heading, whichever comes first. The
/// terminating heading is kept (or starts its own block if it is
/// itself a boilerplate heading).
pub fn strip_thesis_boilerplate(text: &str) -> String {
    let lines: Vec<&str> = text.split('\n').collect();
    let mut kept: Vec<&str> = Vec::with_capacity(lines.len());
    let mut i = 0;
    while i < lines.len() {
        if is_boilerplate_heading(lines[i]) {
            i += 1;
            let mut dropped = 0;
            while i < lines.len()
                && dropped < BOILERPLATE_SPAN_CAP
                && !is_all_caps_heading(lines[i])
            {
                i += 1;
                dropped += 1;
            }
        } else {
            kept.push(lines[i]);
            i += 1;
        }
    }
    kept.join("\n")
}

fn is_boilerplate_heading(line: &str) -> bool {
    let folded = fold_turkish(line.trim());
    BOILERPLATE_HEADINGS.iter().any(|h| *h == folded)
}

fn is_all_caps_heading(line: &str) -> bool {
    let trimmed = line.trim();
    let mut saw_alpha = false;
    for c in trimmed.chars() {
        if c.is_alphabetic() {
            saw_alpha = true;
            if c.is_lowercase() {
                return false;
            }
        }
    }
    saw_alpha && whitespace_tokens(trimmed).len() <= 8
}

/// Settings for [`clean_book`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BookCleanConfig {
    /// Metadata keywords are only searched within this many leading lines.
    pub head_lines: usize,
    /// Bibliography truncation applies past this fraction of the lines.
    pub truncate_after_fraction: f64,
    /// Front-matter keywords (matched case-folded, as substrings).
    pub metadata_keywords: Vec<String>,
    /// Back-matter keywords (matched case-folded, as substrings).
    pub bibliography_keywords: Vec<String>,
}

impl Default for BookCleanConfig {
    fn default() -> Self {
        BookCleanConfig {
            head_lines: 100,
            truncate_after_fraction: 0.70,
            metadata_keywords: BOOK_METADATA_KEYWORDS.clone(),
            bibliography_keywords: BIBLIOGRAPHY_KEYWORDS.clone(),
        }
    }
}

impl BookCleanConfig {
    /// Rejects fractions outside (0, 1].
    pub fn validate(&self) -> Result<(), CleanError> {
        let f = self.truncate_after_fraction;
        if !(f.is_finite() && 0.0 < f && f <= 1.0) {
            return Err(CleanError::BadFraction { value: f });
        }
        Ok(())
    }
}

/// Cleans a book: standardizes punctuation, removes control characters,
/// drops metadata lines in the head window and all-numeric, URL, and
/// email lines anywhere, then truncates at the first bibliography
/// keyword past `truncate_after_fraction` of the lines.
///
/// The line drops repeat until stable so the cleaner is idempotent even
/// though the head window and truncation point are positional.
pub fn clean_book(text: &str, config: &BookCleanConfig) -> String {
    clean_book_like(text, config, None)
}

/// Cleans a creative writing submission.
///
/// Book mechanics plus: lines containing assignment keywords ("ödev")
/// or course codes ("TURK 101") are dropped at any position, and
/// bibliography truncation applies from any position.
pub fn clean_creative(text: &str) -> String {
    let config = BookCleanConfig { truncate_after_fraction: f64::MIN_POSITIVE, ..Default::default() };
    clean_book_like(text, &config, Some(&CREATIVE_KEYWORDS))
}

fn clean_book_like(
    text: &str,
    config: &BookCleanConfig,
    anywhere_keywords: Option<&[String]>,
) -> String {
    let folded_meta: Vec<String> =
        config.metadata_keywords.iter().map(|k| fold_turkish(k)).collect();
    let folded_bib: Vec<String> =
        config.bibliography_keywords.iter().map(|k| fold_turkish(k)).collect();
    let standardized = standardize_punctuation(text);
    let mut lines: Vec<&str> = standardized.split('\n').collect();
    loop {
        let round: Vec<&str> = clean_book_round(
            &lines,
            config,
            &folded_meta,
            &folded_bib,
            anywhere_keywords,
        );
        if round.len() == lines.len() {
            break;
        }
        lines = round;
    }
    lines.join("\n")
}

fn clean_book_round<'a>(
    lines: &[&'a str],
    config: &BookCleanConfig,
    folded_meta: &[String],
    folded_bib: &[String],
    anywhere_keywords: Option<&[String]>,
) -> Vec<&'a str> {
    let mut kept: Vec<&'a str> = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let folded = fold_turkish(line);
        if i < config.head_lines && folded_meta.iter().any(|k| folded.contains(k.as_str())) {
            continue;
        }
        if is_junk_line(line) {
            continue;
        }
        if let Some(keywords) = anywhere_keywords {
            if keywords.iter().any(|k| folded.contains(k.as_str()))
                || COURSE_CODE.is_match(line)
            {
                continue;
            }
        }
        kept.push(line);
    }
    let n = kept.len();
    let cut = kept.iter().enumerate().position(|(i, line)| {
        (i + 1) as f64 / n as f64 > config.truncate_after_fraction
            && folded_bib.iter().any(|k| fold_turkish(line).contains(k.as_str()))
    });
    if let Some(first) = cut {
        kept.truncate(first);
    }
    kept
}

fn is_junk_line(line: &str) -> bool {
    let tokens = whitespace_tokens(line);
    let all_numeric = !tokens.is_empty() && tokens.iter().all(|t| linefilter::is_numeric_token(t));
    all_numeric
        || line.contains("http://")
        || line.contains("https://")
        || line.contains("www.")
        || EMAIL.is_match(line)
}

/// Replaces curly quotes, long dashes, the ellipsis character, and
/// no-break spaces with their plain ASCII forms and removes control
/// characters other than newline and tab.
fn standardize_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\u{2018}' | '\u{2019}' | '\u{201A}' => out.push('\''),
            '\u{201C}' | '\u{201D}' | '\u{201E}' => out.push('"'),
            '\u{2013}' | '\u{2014}' | '\u{2015}' => out.push('-'),
            '\u{2026}' => out.push_str("..."),
            '\u{00A0}' => out.push(' '),
            '\n' | '\t' => out.push(c),
            c if c.is_control() => {}
            c => out.push(c),
        }
    }
    out
}

/// Normalizes line endings without any other change.
pub fn clean_parlamint(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Line accounting for one cleaned document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    /// Lines in the incoming document.
    pub lines_in: u64,
    /// Lines in the cleaned document.
    pub lines_kept: u64,
    /// Lines removed by OCR-stage preamble and boilerplate stripping,
    /// before line filtering.
    pub lines_removed_pre_filter: u64,
    /// Dropped line counts keyed by filter reason.
    pub drops: BTreeMap<crate::linefilter::DropReason, u64>,
}

impl CleanReport {
    fn new(lines_in: u64, lines_kept: u64, verdicts: &[LineVerdict]) -> CleanReport {
        let mut drops = BTreeMap::new();
        for v in verdicts {
            if !v.keep {
                *drops.entry(v.reason).or_insert(0) += 1;
            }
        }
        CleanReport {
            lines_in,
            lines_kept,
            lines_removed_pre_filter: lines_in - verdicts.len() as u64,
            drops,
        }
    }

    /// Total lines dropped by the line filter.
    pub fn dropped(&self) -> u64 {
        self.drops.values().sum()
    }
}

/// Cleans a scientific article or thesis end to end.
///
/// Applies OCR normalization, preamble stripping, thesis boilerplate
/// stripping for theses, then the line filter. Only `dergipark` and
/// `yoktez` documents are accepted.
pub fn clean_scientific(
    doc: &Document,
    ocr: &OcrTable,
    cfg: &FilterConfig,
    lang: &LanguageModelCharNgram,
) -> Result<(Document, CleanReport), CleanError> {
    if !matches!(doc.source, Source::Dergipark | Source::Yoktez) {
        return Err(CleanError::WrongSource {
            got: doc.source,
            cleaner: "scientific",
            expected: "dergipark or yoktez",
        });
    }
    let mut text = normalize_ocr(&doc.text, ocr);
    text = strip_preamble(&text);
    if doc.source == Source::Yoktez {
        text = strip_thesis_boilerplate(&text);
    }
    let mut staged = doc.clone();
    staged.text = text;
    let (cleaned, verdicts) = filter_document(&staged, cfg, lang);
    let lines_in = doc.text.split('\n').count() as u64;
    let lines_kept = verdicts.iter().filter(|v| v.keep).count() as u64;
    Ok((cleaned, CleanReport::new(lines_in, lines_kept, &verdicts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linefilter::DropReason;

    #[test]
    fn ocr_table_replaces_ligatures_and_mojibake() {
        let table = OcrTable::builtin();
        assert_eq!(normalize_ocr("ﬁkir", table), "fikir");
        assert_eq!(normalize_ocr("ýþ", table), "ış");
        assert_eq!(normalize_ocr("deðiþik", table), "değişik");
        assert_eq!(normalize_ocr("temiz metin", table), "temiz metin");
    }

    #[test]
    fn ocr_combining_marks_collapse_to_precomposed() {
        let table = OcrTable::builtin();
        assert_eq!(normalize_ocr("s\u{327}ehir", table), "şehir");
        assert_eq!(normalize_ocr("u\u{308}zu\u{308}m", table), "üzüm");
        assert_eq!(normalize_ocr("\u{b8}calıs\u{327}ma", table), "çalışma");
    }

    #[test]
    fn ocr_longest_key_wins() {
        let table = OcrTable::new(vec![
            ("a".to_string(), "x".to_string()),
            ("ab".to_string(), "y".to_string()),
        ])
        .unwrap();
        assert_eq!(normalize_ocr("ab a", &table), "y x");
    }

    #[test]
    fn ocr_duplicate_keys_are_rejected() {
        let err = OcrTable::new(vec![
            ("a".to_string(), "x".to_string()),
            ("a".to_string(), "y".to_string()),
        ])
        .unwrap_err();
        assert!(matches!(err, CleanError::DuplicateKey { key } if key == "a"));
    }

    #[test]
    fn ocr_normalization_is_idempotent_on_builtin_table() {
        let table = OcrTable::builtin();
        let text = "ﬁkir deðiþik s\u{327}ehir u\u{308}zu\u{308}m normal";
        let once = normalize_ocr(text, table);
        assert_eq!(normalize_ocr(&once, table), once);
    }

    #[test]
    fn preamble_before_abstract_heading_is_dropped() {
        let text = "Bir Üniversite\nYazar Adı\nÖZET\nBu çalışmanın özeti.";
        assert_eq!(strip_preamble(text), "ÖZET\nBu çalışmanın özeti.");
    }

    #[test]
    fn text_without_abstract_heading_is_unchanged() {
        let text = "Giriş bölümü.\nYöntem bölümü.";
        assert_eq!(strip_preamble(text), text);
    }

    #[test]
    fn late_abstract_heading_is_outside_the_window() {
        let mut lines: Vec<String> = (0..100).map(|i| format!("satır {i}")).collect();
        lines[89] = "ÖZET".to_string();
        let text = lines.join("\n");
        assert_eq!(strip_preamble(&text), text);
        // The same heading within the 40% window triggers the strip.
        lines[30] = "ÖZET".to_string();
        let text = lines.join("\n");
        assert!(strip_preamble(&text).starts_with("ÖZET"));
        assert_eq!(strip_preamble(&text).split('\n').count(), 70);
    }

    #[test]
    fn boilerplate_block_runs_to_next_heading() {
        let text = "İÇİNDEKİLER\nGiriş....1\nYöntem....9\nGİRİŞ\nAsıl metin burada.";
        assert_eq!(strip_thesis_boilerplate(text), "GİRİŞ\nAsıl metin burada.");
    }

    #[test]
    fn boilerplate_block_is_capped_at_two_hundred_lines() {
        let mut lines = vec!["BEYAN".to_string()];
        lines.extend((0..300).map(|i| format!("beyan satırı {i}")));
        let out = strip_thesis_boilerplate(&lines.join("\n"));
        let out_lines: Vec<&str> = out.split('\n').collect();
        assert_eq!(out_lines.len(), 100);
        assert_eq!(out_lines[0], "beyan satırı 200");
    }

    #[test]
    fn text_without_boilerplate_is_unchanged() {
        let text = "GİRİŞ\nNormal metin.\nDevamı.";
        assert_eq!(strip_thesis_boilerplate(text), text);
    }

    #[test]
    fn book_truncates_past_the_fraction_only() {
        let config = BookCleanConfig::default();
        let mut lines: Vec<String> = (1..=8).map(|i| format!("bölüm {i}")).collect();
        lines.push("KAYNAKÇA".to_string());
        lines.push("son satır".to_string());
        let cleaned = clean_book(&lines.join("\n"), &config);
        assert_eq!(cleaned.split('\n').count(), 8);
        assert!(!cleaned.contains("KAYNAKÇA"));

        let early = "ilk\nkaynakça sözü geçiyor\nüç\ndört\nbeş\naltı\nyedi\nsekiz\ndokuz\non";
        assert_eq!(clean_book(early, &config), early);
    }

    #[test]
    fn book_head_metadata_and_junk_lines_drop() {
        let config = BookCleanConfig::default();
        let text = "Yazar: Ayşe Kaya\nISBN 978-605-000-000-0\nRoman başlıyor burada.\n\
                    123 456\nhttp://example.com\ndeneme@ornek.com adresi\nSon cümle.";
        let cleaned = clean_book(text, &config);
        assert_eq!(cleaned, "Roman başlıyor burada.\nSon cümle.");
    }

    #[test]
    fn book_punctuation_is_standardized() {
        let config = BookCleanConfig::default();
        let text = "\u{201C}Merhaba\u{201D} dedi \u{2014} sonra sustu\u{2026}\r\nİkinci satır\u{00A0}burada.";
        let cleaned = clean_book(text, &config);
        assert_eq!(cleaned, "\"Merhaba\" dedi - sonra sustu...\nİkinci satır burada.");
    }

    #[test]
    fn book_cleaning_is_idempotent_even_with_shifting_windows() {
        let config = BookCleanConfig { head_lines: 2, ..Default::default() };
        // After the first round drops line 0, the "yazar" line moves into
        // the head window, so a second round must drop it too.
        let text = "ISBN 975-000\nbir satır\nyazar adı burada\nson satır";
        let cleaned = clean_book(text, &config);
        assert_eq!(cleaned, clean_book(&cleaned, &config));
        assert_eq!(cleaned, "bir satır\nson satır");
    }

    #[test]
    fn creative_drops_assignment_lines_anywhere_and_truncates_anywhere() {
        let text = "Hikaye başlıyor.\nTURK 101 Ödev 2\nDevam ediyor.\nKaynakça\nkaynak bir";
        assert_eq!(clean_creative(text), "Hikaye başlıyor.\nDevam ediyor.");
        let narrative = "Uzun bir yolculuk başladı.\nYol boyunca konuştular.";
        assert_eq!(clean_creative(narrative), narrative);
    }

    #[test]
    fn creative_course_codes_drop_without_the_keyword() {
        let text = "Bir sahne.\nMAT 250 Final Projesi\nSon sahne.";
        assert_eq!(clean_creative(text), "Bir sahne.\nSon sahne.");
    }

    #[test]
    fn parlamint_only_normalizes_newlines() {
        assert_eq!(clean_parlamint("a\r\nb\rc\nd"), "a\nb\nc\nd");
        assert_eq!(clean_parlamint(""), "");
        let text = "Sayın Başkan, teşekkür ederim.\nOylamaya geçiyoruz.";
        assert_eq!(clean_parlamint(text), text);
    }

    #[test]
    fn scientific_cleaner_rejects_other_sources() {
        let doc = Document::new("b1", Source::Book, "metin");
        let err = clean_scientific(
            &doc,
            OcrTable::builtin(),
            &FilterConfig::default(),
            LanguageModelCharNgram::builtin(),
        )
        .unwrap_err();
        assert!(matches!(err, CleanError::WrongSource { got: Source::Book, .. }));
        assert!(err.to_string().contains("book"));
    }

    #[test]
    fn scientific_pipeline_composes_all_stages() {
        let text = "Bir Üniversitesi Fen Bilimleri Enstitüsü\n\
                    ÖZET\n\
                    Bu çalışmada deðiþik bir yöntem önerilmiştir.\n\
                    İÇİNDEKİLER\n\
                    Giriş....1\n\
                    GİRİŞ\n\
                    Deney sonuçları oldukça başarılı bulunmuştur.\n\
                    İletişim için ali.veli@example.com adresine yazınız.\n\
                    Veriler üç yıl boyunca düzenli olarak toplanmıştır.";
        let doc = Document::new("t1", Source::Yoktez, text);
        let (cleaned, report) = clean_scientific(
            &doc,
            OcrTable::builtin(),
            &FilterConfig::default(),
            LanguageModelCharNgram::builtin(),
        )
        .unwrap();
        assert!(cleaned.text.contains("değişik"));
        assert!(!cleaned.text.contains("İÇİNDEKİLER"));
        assert!(!cleaned.text.contains("ali.veli@example.com"));
        assert_eq!(report.drops.get(&DropReason::Metadata), Some(&1));
        assert_eq!(report.lines_in, 9);
        assert_eq!(report.lines_kept, cleaned.text.split('\n').count() as u64);
    }

    #[test]
    fn scientific_cleaner_is_idempotent() {
        let text = "ÖZET\nBu çalışmada örnek bir yöntem önerilmiştir.\n\
                    Deney sonuçları oldukça başarılı bulunmuştur.";
        let doc = Document::new("t2", Source::Dergipark, text);
        let ocr = OcrTable::builtin();
        let cfg = FilterConfig::default();
        let lang = LanguageModelCharNgram::builtin();
        let (once, _) = clean_scientific(&doc, ocr, &cfg, lang).unwrap();
        let (twice, report) = clean_scientific(&once, ocr, &cfg, lang).unwrap();
        assert_eq!(once.text, twice.text);
        assert_eq!(report.dropped(), 0);
    }
}
