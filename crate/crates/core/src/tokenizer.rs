//! Unigram-model subword tokenizer: vocabulary loading, Viterbi
//! segmentation, decoding, and sentinel-block extension.
//!
//! A vocabulary is an ordered list of (piece, log probability) pairs; ids
//! are assigned by file order. Encoding replaces spaces with the `▁` marker,
//! prefixes one marker, and picks the segmentation with the highest summed
//! piece log probability. Characters no piece covers come out as one unknown
//! token per maximal uncovered run. Sentinel pieces `<extra_id_k>` extend
//! the id space for denoising but are never produced by segmentation.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

/// Piece that stands in for unknown characters.
pub const UNK_PIECE: &str = "<unk>";
/// Padding piece, when the vocabulary provides one.
pub const PAD_PIECE: &str = "<pad>";
/// End-of-sequence piece, when the vocabulary provides one.
pub const EOS_PIECE: &str = "</s>";
/// Mode prefix pieces for denoising examples.
pub const MODE_PIECES: [&str; 3] = ["[NLU]", "[NLG]", "[S2S]"];
/// Whitespace marker used by the unigram vocabulary convention.
pub const SPACE_MARKER: char = '▁';

/// Per-character score charged for text no piece covers. Large enough that
/// segmentation always prefers any piece covering to an unknown run, small
/// enough that adding real piece scores to it stays exact in an f64.
pub const UNK_CHAR_PENALTY: f64 = -1e9;

/// Errors from vocabulary loading, extension, and decoding.
#[derive(Debug, thiserror::Error)]
pub enum TokenizerError {
    /// Underlying file I/O failure.
    #[error("cannot read or write vocabulary file: {0}")]
    Io(#[from] std::io::Error),
    /// A vocabulary line without a tab separator.
    #[error("vocabulary line {line}: expected `piece<TAB>logprob`")]
    MalformedLine {
        /// 1-based line number.
        line: usize,
    },
    /// A score column that does not parse as a float.
    #[error("vocabulary line {line}: unparseable log probability `{score}`")]
    BadScore {
        /// 1-based line number.
        line: usize,
        /// Offending score text.
        score: String,
    },
    /// The same piece appeared twice.
    #[error("duplicate vocabulary piece `{piece}`")]
    DuplicatePiece {
        /// The repeated piece.
        piece: String,
    },
    /// No `<unk>` piece; unknown characters would be unrepresentable.
    #[error("vocabulary has no `{UNK_PIECE}` piece")]
    MissingUnk,
    /// Sentinel extension would shadow an existing piece.
    #[error("cannot extend sentinels: piece `{piece}` already exists")]
    SentinelCollision {
        /// The colliding piece.
        piece: String,
    },
    /// Decode saw an id outside the vocabulary.
    #[error("token id {id} out of range for vocabulary of size {size}")]
    InvalidId {
        /// Offending id.
        id: u32,
        /// Vocabulary size.
        size: usize,
    },
}

#[derive(Debug, Clone)]
struct Piece {
    text: String,
    logprob: f64,
    /// Score exactly as written in the source file, so dumping a loaded
    /// vocabulary reproduces it byte for byte.
    score_repr: String,
}

/// Immutable unigram vocabulary with dense ids `[0, size)`.
#[derive(Debug, Clone)]
pub struct TokenizerVocab {
    pieces: Vec<Piece>,
    index: HashMap<String, u32>,
    base_size: usize,
    sentinel_count: usize,
    unk_id: u32,
    pad_id: Option<u32>,
    eos_id: Option<u32>,
}

static BUILTIN_VOCAB: LazyLock<TokenizerVocab> = LazyLock::new(|| {
    parse_vocab(include_str!("../resources/vocab_small.tsv"))
        .expect("bundled vocabulary must parse")
});

/// Parse a vocabulary from `piece<TAB>logprob` lines.
pub fn parse_vocab(text: &str) -> Result<TokenizerVocab, TokenizerError> {
    let mut pieces = Vec::new();
    let mut index = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let (piece, score) = line
            .split_once('\t')
            .ok_or(TokenizerError::MalformedLine { line: i + 1 })?;
        let logprob: f64 = score.parse().map_err(|_| TokenizerError::BadScore {
            line: i + 1,
            score: score.to_string(),
        })?;
        if index.insert(piece.to_string(), pieces.len() as u32).is_some() {
            return Err(TokenizerError::DuplicatePiece {
                piece: piece.to_string(),
            });
        }
        pieces.push(Piece {
            text: piece.to_string(),
            logprob,
            score_repr: score.to_string(),
        });
    }
    let unk_id = *index.get(UNK_PIECE).ok_or(TokenizerError::MissingUnk)?;
    let pad_id = index.get(PAD_PIECE).copied();
    let eos_id = index.get(EOS_PIECE).copied();
    Ok(TokenizerVocab {
        base_size: pieces.len(),
        sentinel_count: 0,
        pieces,
        index,
        unk_id,
        pad_id,
        eos_id,
    })
}

/// Load a vocabulary file.
pub fn load_vocab(path: &Path) -> Result<TokenizerVocab, TokenizerError> {
    parse_vocab(&fs::read_to_string(path)?)
}

impl TokenizerVocab {
    /// Small bundled vocabulary with full single-character coverage of
    /// Turkish text plus the special and mode pieces; intended for tests
    /// and fixture pipelines.
    pub fn builtin() -> &'static TokenizerVocab {
        &BUILTIN_VOCAB
    }

    /// Total number of ids, sentinels included.
    pub fn size(&self) -> usize {
        self.pieces.len()
    }

    /// Number of ids before the sentinel block.
    pub fn base_size(&self) -> usize {
        self.base_size
    }

    /// Piece string for an id, if in range.
    pub fn piece(&self, id: u32) -> Option<&str> {
        self.pieces.get(id as usize).map(|p| p.text.as_str())
    }

    /// Id of an exact piece string, if present.
    pub fn id_of(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }

    /// Id of the unknown piece.
    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }

    /// Id of the padding piece, when present.
    pub fn pad_id(&self) -> Option<u32> {
        self.pad_id
    }

    /// Id of the end-of-sequence piece, when present.
    pub fn eos_id(&self) -> Option<u32> {
        self.eos_id
    }

    /// Id of sentinel `k`, valid after extension for `k < sentinel count`.
    pub fn sentinel_id(&self, k: usize) -> Option<u32> {
        if k < self.sentinel_count {
            Some((self.base_size + k) as u32)
        } else {
            None
        }
    }

    /// Inverse of [`sentinel_id`](Self::sentinel_id): the sentinel index of
    /// an id inside the sentinel block.
    pub fn sentinel_index(&self, id: u32) -> Option<usize> {
        let id = id as usize;
        if id >= self.base_size && id < self.base_size + self.sentinel_count {
            Some(id - self.base_size)
        } else {
            None
        }
    }

    /// Number of sentinel ids appended by extension.
    pub fn sentinel_count(&self) -> usize {
        self.sentinel_count
    }

    /// Id of a mode prefix piece such as `[NLU]`, when present.
    pub fn mode_id(&self, mode_piece: &str) -> Option<u32> {
        self.index.get(mode_piece).copied()
    }

    /// Append `count` sentinel pieces `<extra_id_0>..` after the base block.
    /// Sentinel `k` gets id `base size + k`; base ids are unchanged.
    pub fn extend_sentinels(&self, count: usize) -> Result<TokenizerVocab, TokenizerError> {
        let mut extended = self.clone();
        for k in 0..count {
            let name = format!("<extra_id_{k}>");
            if extended.index.contains_key(&name) {
                return Err(TokenizerError::SentinelCollision { piece: name });
            }
            extended.index.insert(name.clone(), extended.pieces.len() as u32);
            extended.pieces.push(Piece {
                text: name,
                // Sentinels exist only as structural markers; an impossible
                // score keeps segmentation from ever emitting one.
                logprob: f64::NEG_INFINITY,
                score_repr: "-inf".to_string(),
            });
        }
        extended.sentinel_count = self.sentinel_count + count;
        Ok(extended)
    }

    /// Render the vocabulary in its file format, one piece per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for piece in &self.pieces {
            out.push_str(&piece.text);
            out.push('\t');
            out.push_str(&piece.score_repr);
            out.push('\n');
        }
        out
    }

    /// Write the vocabulary to a file in its load format.
    pub fn dump(&self, path: &Path) -> Result<(), TokenizerError> {
        Ok(fs::write(path, self.render())?)
    }

    /// Segment text into ids maximizing the summed piece log probability.
    ///
    /// The text is normalized by replacing spaces with the `▁` marker and
    /// prefixing one marker. Ties break toward fewer tokens, then the
    /// lexicographically smallest piece sequence. Uncovered characters are
    /// charged [`UNK_CHAR_PENALTY`] each and merge into one unknown token
    /// per maximal run.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        if text.is_empty() {
            return Vec::new();
        }
        let mut normalized = String::from(SPACE_MARKER);
        normalized.extend(text.chars().map(|c| if c == ' ' { SPACE_MARKER } else { c }));
        let raw = self.viterbi(&normalized);
        // One unknown token per maximal uncovered run.
        let mut tokens: Vec<u32> = Vec::with_capacity(raw.len());
        for id in raw {
            if id == self.unk_id && tokens.last() == Some(&self.unk_id) {
                continue;
            }
            tokens.push(id);
        }
        tokens
    }

    fn viterbi(&self, text: &str) -> Vec<u32> {
        // Pieces grouped by first character so each position only probes
        // plausible matches.
        let mut by_first: HashMap<char, Vec<u32>> = HashMap::new();
        for (id, piece) in self.pieces.iter().enumerate() {
            if piece.logprob == f64::NEG_INFINITY {
                continue;
            }
            if let Some(first) = piece.text.chars().next() {
                by_first.entry(first).or_default().push(id as u32);
            }
        }

        let offsets: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let n = offsets.len() - 1;

        let mut best: Vec<Option<Candidate>> = vec![None; n + 1];
        best[0] = Some(Candidate {
            score: 0.0,
            tokens: Vec::new(),
        });

        for i in 0..n {
            let Some(base) = best[i].clone() else {
                continue;
            };
            let rest = &text[offsets[i]..];
            let first = rest.chars().next().expect("position before end");

            let step = |j: usize, id: u32, piece_score: f64, best: &mut Vec<Option<Candidate>>| {
                let mut tokens = base.tokens.clone();
                tokens.push(id);
                let candidate = Candidate {
                    score: base.score + piece_score,
                    tokens,
                };
                if self.better(&candidate, &best[j]) {
                    best[j] = Some(candidate);
                }
            };

            step(i + 1, self.unk_id, UNK_CHAR_PENALTY, &mut best);
            for id in by_first.get(&first).into_iter().flatten() {
                let piece = &self.pieces[*id as usize];
                if rest.starts_with(&piece.text) {
                    let j = i + piece.text.chars().count();
                    step(j, *id, piece.logprob, &mut best);
                }
            }
        }
        best[n].take().expect("unknown steps reach every position").tokens
    }

    /// True when `candidate` beats `incumbent` under (higher score, fewer
    /// tokens, lexicographically smaller piece sequence).
    fn better(&self, candidate: &Candidate, incumbent: &Option<Candidate>) -> bool {
        let Some(incumbent) = incumbent else {
            return true;
        };
        if candidate.score != incumbent.score {
            return candidate.score > incumbent.score;
        }
        if candidate.tokens.len() != incumbent.tokens.len() {
            return candidate.tokens.len() < incumbent.tokens.len();
        }
        let piece = |id: &u32| self.pieces[*id as usize].text.as_str();
        candidate.tokens.iter().map(piece).lt(incumbent.tokens.iter().map(piece))
    }

    /// Map ids back to text: concatenate pieces, turn markers into spaces,
    /// and strip the single leading space the encode prefix introduced.
    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        let mut joined = String::new();
        for id in ids {
            let piece = self.piece(*id).ok_or(TokenizerError::InvalidId {
                id: *id,
                size: self.size(),
            })?;
            joined.push_str(piece);
        }
        let spaced: String = joined
            .chars()
            .map(|c| if c == SPACE_MARKER { ' ' } else { c })
            .collect();
        Ok(spaced.strip_prefix(' ').unwrap_or(&spaced).to_string())
    }
}

/// Partial segmentation: accumulated score and emitted token ids.
#[derive(Clone)]
struct Candidate {
    score: f64,
    tokens: Vec<u32>,
}
