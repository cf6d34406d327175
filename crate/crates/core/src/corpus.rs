//! Document records, corpus statistics, and streaming JSONL corpus I/O.
//!
//! A corpus file holds one JSON document per line with keys in fixed
//! order (`id`, `source`, `text`, `meta`, `lm_score`), so identical
//! inputs always serialize to identical bytes.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::{Add, AddAssign};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::count_tokens;

/// Corpus a document came from.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Deduplicated web crawl text.
    Web,
    /// Open-access journal articles.
    Dergipark,
    /// Graduate theses.
    Yoktez,
    /// Long-form books.
    Book,
    /// Student creative writings.
    Bilkent,
    /// Parliamentary transcripts.
    Parlamint,
}

impl Source {
    /// All sources, in the canonical order used for weights and reports.
    pub const ALL: [Source; 6] = [
        Source::Web,
        Source::Dergipark,
        Source::Yoktez,
        Source::Book,
        Source::Bilkent,
        Source::Parlamint,
    ];

    /// Lowercase name as used in record files and configs.
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Web => "web",
            Source::Dergipark => "dergipark",
            Source::Yoktez => "yoktez",
            Source::Book => "book",
            Source::Bilkent => "bilkent",
            Source::Parlamint => "parlamint",
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Source {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Source::ALL
            .into_iter()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownSource(s.to_string()))
    }
}

/// One corpus document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    /// Unique, nonempty identifier within one corpus file.
    pub id: String,
    /// Originating corpus.
    pub source: Source,
    /// Document body; "\n" newlines.
    pub text: String,
    /// Free-form metadata (journal, year, ...).
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    /// Mean per-token log10 probability, set by the document scorer.
    #[serde(default)]
    pub lm_score: Option<f64>,
}

impl Document {
    /// Convenience constructor for a document with no metadata or score.
    pub fn new(id: impl Into<String>, source: Source, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            source,
            text: text.into(),
            meta: BTreeMap::new(),
            lm_score: None,
        }
    }
}

/// Aggregate corpus counters.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize,
)]
pub struct CorpusStats {
    /// Number of documents.
    pub doc_count: u64,
    /// Sum of whitespace-delimited token counts.
    pub token_count: u64,
    /// Sum of UTF-8 byte lengths of document texts.
    pub byte_count: u64,
}

impl Add for CorpusStats {
    type Output = CorpusStats;

    fn add(self, rhs: CorpusStats) -> CorpusStats {
        CorpusStats {
            doc_count: self.doc_count + rhs.doc_count,
            token_count: self.token_count + rhs.token_count,
            byte_count: self.byte_count + rhs.byte_count,
        }
    }
}

impl AddAssign for CorpusStats {
    fn add_assign(&mut self, rhs: CorpusStats) {
        *self = *self + rhs;
    }
}

/// Errors from corpus I/O and record validation.
#[derive(Debug, Error)]
pub enum CorpusError {
    /// Underlying I/O failure.
    #[error("corpus I/O: {0}")]
    Io(#[from] std::io::Error),
    /// A line that does not parse as a document record.
    #[error("line {line} (byte offset {offset}): malformed document record: {reason}")]
    Malformed {
        /// 1-based line number.
        line: u64,
        /// Byte offset of the line start.
        offset: u64,
        /// Parser message.
        reason: String,
    },
    /// A record with an empty id.
    #[error("line {line} (byte offset {offset}): document id is empty")]
    EmptyId {
        /// 1-based line number.
        line: u64,
        /// Byte offset of the line start.
        offset: u64,
    },
    /// A record whose id already appeared in the same file.
    #[error("line {line} (byte offset {offset}): duplicate document id {id:?}")]
    DuplicateId {
        /// 1-based line number.
        line: u64,
        /// Byte offset of the line start.
        offset: u64,
        /// The repeated id.
        id: String,
    },
    /// A source name that is not one of the six corpora.
    #[error("unknown source {0:?}")]
    UnknownSource(String),
}

/// Lazy reader over a JSONL document stream.
///
/// Yields documents in file order; enforces nonempty, file-unique ids.
pub struct DocumentReader<R> {
    lines: std::io::Lines<BufReader<R>>,
    line_no: u64,
    offset: u64,
    seen_ids: HashSet<String>,
}

impl<R: Read> Iterator for DocumentReader<R> {
    type Item = Result<Document, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            let offset = self.offset;
            self.offset += line.len() as u64 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = match serde_json::from_str(&line) {
                Ok(d) => d,
                Err(e) => {
                    return Some(Err(CorpusError::Malformed {
                        line: self.line_no,
                        offset,
                        reason: e.to_string(),
                    }))
                }
            };
            if doc.id.is_empty() {
                return Some(Err(CorpusError::EmptyId { line: self.line_no, offset }));
            }
            if !self.seen_ids.insert(doc.id.clone()) {
                return Some(Err(CorpusError::DuplicateId {
                    line: self.line_no,
                    offset,
                    id: doc.id,
                }));
            }
            return Some(Ok(doc));
        }
    }
}

/// Streams documents from a reader.
pub fn read_documents<R: Read>(reader: R) -> DocumentReader<R> {
    DocumentReader {
        lines: BufReader::new(reader).lines(),
        line_no: 0,
        offset: 0,
        seen_ids: HashSet::new(),
    }
}

/// Streams documents from a file path.
pub fn read_documents_file(path: impl AsRef<Path>) -> Result<DocumentReader<File>, CorpusError> {
    Ok(read_documents(File::open(path)?))
}

/// Collects a whole file into memory, failing on the first bad record.
pub fn load_documents(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    read_documents_file(path)?.collect()
}

/// Writes documents as JSONL; returns the number written.
pub fn write_documents<'a, W, I>(writer: W, docs: I) -> Result<u64, CorpusError>
where
    W: Write,
    I: IntoIterator<Item = &'a Document>,
{
    let mut w = BufWriter::new(writer);
    let mut seen = HashSet::new();
    let mut count = 0u64;
    for doc in docs {
        if doc.id.is_empty() {
            return Err(CorpusError::EmptyId { line: count + 1, offset: 0 });
        }
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: count + 1,
                offset: 0,
                id: doc.id.clone(),
            });
        }
        serde_json::to_writer(&mut w, doc)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))?;
        w.write_all(b"\n")?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

/// Writes documents to a file path; returns the number written.
pub fn write_documents_file<'a, I>(
    path: impl AsRef<Path>,
    docs: I,
) -> Result<u64, CorpusError>
where
    I: IntoIterator<Item = &'a Document>,
{
    write_documents(File::create(path)?, docs)
}

/// Fold of per-document counters over a document sequence.
pub fn compute_stats<'a, I>(docs: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut stats = CorpusStats::default();
    for doc in docs {
        stats.doc_count += 1;
        stats.token_count += count_tokens(&doc.text);
        stats.byte_count += doc.text.len() as u64;
    }
    stats
}
