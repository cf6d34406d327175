//! Mixture-of-denoisers example synthesis.
//!
//! Three corruption families over token id sequences: R-denoising (short
//! spans covering about 15% of the input), S-denoising (a single corrupted
//! suffix from a random split point), and X-denoising (aggressive 50%
//! corruption through many short or few long spans). Examples carry a mode
//! prefix token, use ascending sentinel ids to mark corrupted spans, and fit
//! a fixed input/target budget. Every stochastic choice flows through an
//! explicit generator, so output is a pure function of (seed, input).

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::tokenizer::TokenizerVocab;

/// Minimum window length corruptible by any mode.
pub const MIN_TOKENS: usize = 8;
/// Default input and target length budget.
pub const DEFAULT_SEQ_LEN: usize = 512;
/// Mean span length of the short X-denoising sub-configuration.
pub const X_SHORT_MEAN: f64 = 3.0;
/// Mean span length of the long X-denoising sub-configuration.
pub const X_LONG_MEAN: f64 = 32.0;

/// Errors from span sampling, corruption, and reconstruction.
#[derive(Debug, thiserror::Error)]
pub enum DenoiseError {
    /// Window shorter than the minimum corruptible length.
    #[error("need at least {min} tokens to denoise, got {len}")]
    TooShort {
        /// Tokens available.
        len: usize,
        /// Minimum required.
        min: usize,
    },
    /// Span sampling requested for the suffix-only mode.
    #[error("span sampling applies to R and X denoising only")]
    SpansNotApplicable,
    /// A hand-built span set violated the layout rules.
    #[error("invalid span set: {reason}")]
    InvalidSpans {
        /// Which rule was violated.
        reason: String,
    },
    /// Suffix split outside `1..length`.
    #[error("suffix split point {split} out of range for {len} tokens")]
    BadSplitPoint {
        /// Requested split.
        split: usize,
        /// Sequence length.
        len: usize,
    },
    /// More spans than the vocabulary has sentinel ids.
    #[error("{needed} sentinels needed but the vocabulary has {available}")]
    NotEnoughSentinels {
        /// Sentinels the construction needs (spans plus closing).
        needed: usize,
        /// Sentinel ids available.
        available: usize,
    },
    /// The vocabulary lacks a required mode prefix piece.
    #[error("vocabulary has no `{piece}` mode piece")]
    MissingModePiece {
        /// The absent piece.
        piece: String,
    },
    /// Mixture weights failed validation.
    #[error("invalid mixture weights: {reason}")]
    InvalidWeights {
        /// Which rule was violated.
        reason: String,
    },
    /// Input sentinels do not ascend contiguously from sentinel 0.
    #[error("input sentinels must ascend from <extra_id_0>: expected <extra_id_{expected}>, found <extra_id_{found}>")]
    InputSentinelOrder {
        /// Sentinel index required at this point.
        expected: usize,
        /// Sentinel index actually present.
        found: usize,
    },
    /// The target lacks a sentinel the grammar requires next.
    #[error("target is missing <extra_id_{expected}>")]
    TargetSentinelMissing {
        /// First absent sentinel index.
        expected: usize,
    },
    /// Target sentinels out of order.
    #[error("target sentinel out of order: expected <extra_id_{expected}>, found <extra_id_{found}>")]
    TargetSentinelOrder {
        /// Sentinel index required at this point.
        expected: usize,
        /// Sentinel index actually present.
        found: usize,
    },
    /// Tokens found after the closing sentinel.
    #[error("target continues after its closing sentinel <extra_id_{closing}>")]
    TrailingTargetTokens {
        /// Index of the closing sentinel.
        closing: usize,
    },
}

/// Denoising family of an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DenoiseMode {
    /// Regular span corruption: short spans, light coverage.
    R,
    /// Sequential corruption: one suffix from a random split point.
    S,
    /// Extreme corruption: half the window, short or long spans.
    X,
}

impl DenoiseMode {
    /// Mode token piece prefixed to the example input.
    pub fn prefix_piece(self) -> &'static str {
        match self {
            DenoiseMode::R => "[NLU]",
            DenoiseMode::S => "[S2S]",
            DenoiseMode::X => "[NLG]",
        }
    }
}

/// How span lengths are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpanLengthLaw {
    /// Uniform over `lo..=hi` tokens.
    UniformRange {
        /// Shortest span.
        lo: usize,
        /// Longest span.
        hi: usize,
    },
    /// Geometric with the given mean, clamped to half the window.
    MeanGeometric {
        /// Expected span length.
        mean: f64,
    },
    /// One corrupted suffix; no span sampling.
    SingleSuffix,
}

/// Parameters of one denoising family.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserSpec {
    /// Family this spec realizes.
    pub mode: DenoiseMode,
    /// Fraction of the window to corrupt.
    pub corrupt_ratio: f64,
    /// Span length distribution.
    pub law: SpanLengthLaw,
}

impl DenoiserSpec {
    /// R-denoising: 15% coverage with spans of 2 to 5 tokens.
    pub fn r() -> Self {
        DenoiserSpec {
            mode: DenoiseMode::R,
            corrupt_ratio: 0.15,
            law: SpanLengthLaw::UniformRange { lo: 2, hi: 5 },
        }
    }

    /// X-denoising: 50% coverage with geometric spans of the given mean.
    pub fn x(mean: f64) -> Self {
        DenoiserSpec {
            mode: DenoiseMode::X,
            corrupt_ratio: 0.5,
            law: SpanLengthLaw::MeanGeometric { mean },
        }
    }

    /// S-denoising with the given corrupted suffix fraction.
    pub fn s(corrupt_ratio: f64) -> Self {
        DenoiserSpec {
            mode: DenoiseMode::S,
            corrupt_ratio,
            law: SpanLengthLaw::SingleSuffix,
        }
    }

    fn mean_span_len(&self) -> f64 {
        match self.law {
            SpanLengthLaw::UniformRange { lo, hi } => (lo + hi) as f64 / 2.0,
            SpanLengthLaw::MeanGeometric { mean } => mean,
            SpanLengthLaw::SingleSuffix => f64::NAN,
        }
    }
}

/// Sampling weights over the three families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights {
    /// Probability of R-denoising.
    pub r: f64,
    /// Probability of X-denoising.
    pub x: f64,
    /// Probability of S-denoising.
    pub s: f64,
}

impl Default for MixtureWeights {
    fn default() -> Self {
        MixtureWeights {
            r: 0.40,
            x: 0.40,
            s: 0.20,
        }
    }
}

impl MixtureWeights {
    /// Check nonnegativity and unit sum (within 1e-9).
    pub fn validate(&self) -> Result<(), DenoiseError> {
        for (name, w) in [("r", self.r), ("x", self.x), ("s", self.s)] {
            if !(w >= 0.0) {
                return Err(DenoiseError::InvalidWeights {
                    reason: format!("{name} weight {w} is negative or not a number"),
                });
            }
        }
        let sum = self.r + self.x + self.s;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DenoiseError::InvalidWeights {
                reason: format!("weights sum to {sum}, expected 1"),
            });
        }
        Ok(())
    }
}

/// Sorted, disjoint corruption spans over a token window.
///
/// Layout rules: starts ascend, position 0 stays clear, and consecutive
/// spans keep at least one uncorrupted token between them so sentinel
/// splicing is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanSet {
    spans: Vec<(usize, usize)>,
}

impl SpanSet {
    /// Validate and wrap `(start, length)` pairs for a window of `n_tokens`.
    pub fn new(spans: Vec<(usize, usize)>, n_tokens: usize) -> Result<SpanSet, DenoiseError> {
        let mut previous_end: Option<usize> = None;
        for &(start, len) in &spans {
            if len == 0 {
                return Err(DenoiseError::InvalidSpans {
                    reason: format!("span at {start} has zero length"),
                });
            }
            if start == 0 {
                return Err(DenoiseError::InvalidSpans {
                    reason: "a span may not cover position 0".to_string(),
                });
            }
            if let Some(end) = previous_end {
                if start <= end {
                    return Err(DenoiseError::InvalidSpans {
                        reason: format!(
                            "span at {start} must leave a gap after the previous span ending at {end}"
                        ),
                    });
                }
            }
            if start + len > n_tokens {
                return Err(DenoiseError::InvalidSpans {
                    reason: format!(
                        "span ({start}, {len}) overruns the {n_tokens}-token window"
                    ),
                });
            }
            previous_end = Some(start + len);
        }
        Ok(SpanSet { spans })
    }

    /// The `(start, length)` pairs in ascending start order.
    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    /// Total tokens covered.
    pub fn covered(&self) -> usize {
        self.spans.iter().map(|(_, len)| len).sum()
    }
}

/// One synthesized example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoisedExample {
    /// Denoising family that produced the example.
    pub mode: DenoiseMode,
    /// Corrupted input, mode token first.
    pub input_ids: Vec<u32>,
    /// Reconstruction target, sentinel 0 first.
    pub target_ids: Vec<u32>,
}

/// Example synthesis options.
#[derive(Debug, Clone)]
pub struct DenoiseOptions {
    /// Family sampling weights.
    pub weights: MixtureWeights,
    /// Input and target length budget.
    pub seq_len: usize,
    /// Whether inputs carry the mode prefix token.
    pub prefix_mode_token: bool,
}

impl Default for DenoiseOptions {
    fn default() -> Self {
        DenoiseOptions {
            weights: MixtureWeights::default(),
            seq_len: DEFAULT_SEQ_LEN,
            prefix_mode_token: true,
        }
    }
}

/// Draw a geometric span length with the given mean, clamped to
/// `[1, n_tokens / 2]`.
fn geometric_len<R: Rng>(rng: &mut R, mean: f64, n_tokens: usize) -> usize {
    let p = 1.0 / mean;
    let u: f64 = rng.random();
    let raw = 1.0 + ((1.0 - u).ln() / (1.0 - p).ln()).floor();
    (raw as usize).clamp(1, (n_tokens / 2).max(1))
}

/// Sample corruption spans for an R- or X-denoising window.
///
/// The span count targets `max(1, round(n x ratio / mean span length))`.
/// Lengths are drawn from the spec's law; spans are then dropped from the
/// end while they cannot fit with their separating gaps. Placement is
/// uniform over all layouts that keep position 0 clear and at least one
/// token between consecutive spans.
pub fn sample_spans<R: Rng>(
    rng: &mut R,
    n_tokens: usize,
    spec: &DenoiserSpec,
) -> Result<SpanSet, DenoiseError> {
    if spec.law == SpanLengthLaw::SingleSuffix {
        return Err(DenoiseError::SpansNotApplicable);
    }
    if n_tokens < MIN_TOKENS {
        return Err(DenoiseError::TooShort {
            len: n_tokens,
            min: MIN_TOKENS,
        });
    }
    let count = ((n_tokens as f64 * spec.corrupt_ratio / spec.mean_span_len()).round() as usize)
        .max(1);
    let mut lengths: Vec<usize> = (0..count)
        .map(|_| match spec.law {
            SpanLengthLaw::UniformRange { lo, hi } => rng.random_range(lo..=hi),
            SpanLengthLaw::MeanGeometric { mean } => geometric_len(rng, mean, n_tokens),
            SpanLengthLaw::SingleSuffix => unreachable!("rejected above"),
        })
        .collect();
    // Each span needs one clear token before it (position 0 for the first,
    // the inter-span gap otherwise), so the budget is total length + count.
    while lengths.iter().sum::<usize>() + lengths.len() > n_tokens {
        if lengths.len() == 1 {
            lengths[0] = n_tokens - 1;
            break;
        }
        lengths.pop();
    }

    // Stars and bars: distribute the spare uncorrupted tokens uniformly
    // over the k + 1 gaps (k mandatory gap tokens are already accounted).
    let k = lengths.len();
    let spare = n_tokens - lengths.iter().sum::<usize>() - k;
    let mut dividers = rand::seq::index::sample(rng, spare + k, k).into_vec();
    dividers.sort_unstable();

    let mut spans = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for (i, (divider, len)) in dividers.iter().zip(&lengths).enumerate() {
        let leading_spare = if i == 0 {
            *divider
        } else {
            divider - dividers[i - 1] - 1
        };
        let start = cursor + leading_spare + 1;
        spans.push((start, *len));
        cursor = start + len;
    }
    SpanSet::new(spans, n_tokens)
}

/// Replace each span with its sentinel in the input and emit the target
/// `sentinel 0, span 0, sentinel 1, span 1, ..., closing sentinel`.
pub fn apply_span_corruption(
    tokens: &[u32],
    spans: &SpanSet,
    vocab: &TokenizerVocab,
) -> Result<(Vec<u32>, Vec<u32>), DenoiseError> {
    let needed = spans.spans().len() + 1;
    if needed > vocab.sentinel_count() {
        return Err(DenoiseError::NotEnoughSentinels {
            needed,
            available: vocab.sentinel_count(),
        });
    }
    let sentinel = |k: usize| vocab.sentinel_id(k).expect("checked count above");

    let mut input = Vec::with_capacity(tokens.len());
    let mut target = Vec::with_capacity(spans.covered() + needed);
    let mut pos = 0usize;
    for (k, &(start, len)) in spans.spans().iter().enumerate() {
        input.extend_from_slice(&tokens[pos..start]);
        input.push(sentinel(k));
        target.push(sentinel(k));
        target.extend_from_slice(&tokens[start..start + len]);
        pos = start + len;
    }
    input.extend_from_slice(&tokens[pos..]);
    target.push(sentinel(spans.spans().len()));
    Ok((input, target))
}

/// Corrupt the suffix from `split_point`: input keeps the prefix plus one
/// sentinel; the target is that sentinel plus the suffix.
pub fn apply_s_denoise(
    tokens: &[u32],
    split_point: usize,
    vocab: &TokenizerVocab,
) -> Result<(Vec<u32>, Vec<u32>), DenoiseError> {
    if split_point == 0 || split_point >= tokens.len() {
        return Err(DenoiseError::BadSplitPoint {
            split: split_point,
            len: tokens.len(),
        });
    }
    if vocab.sentinel_count() == 0 {
        return Err(DenoiseError::NotEnoughSentinels {
            needed: 1,
            available: 0,
        });
    }
    let sentinel = vocab.sentinel_id(0).expect("checked count above");
    let mut input = tokens[..split_point].to_vec();
    input.push(sentinel);
    let mut target = vec![sentinel];
    target.extend_from_slice(&tokens[split_point..]);
    Ok((input, target))
}

/// Draw a denoising family from the weights. Callers validate the weights;
/// the draw itself cannot fail.
pub fn sample_mode<R: Rng>(rng: &mut R, weights: &MixtureWeights) -> DenoiseMode {
    debug_assert!(weights.validate().is_ok());
    let total = weights.r + weights.x + weights.s;
    let u: f64 = rng.random::<f64>() * total;
    if u < weights.r {
        DenoiseMode::R
    } else if u < weights.r + weights.x {
        DenoiseMode::X
    } else {
        DenoiseMode::S
    }
}

/// Synthesize one example from a token sequence.
///
/// Draw order: family, then the family's own draws (X sub-configuration,
/// S corrupted fraction, span lengths, placement). The window is the first
/// `seq_len - 1` tokens so the mode prefix keeps the input within budget;
/// both sides always fit `seq_len`.
pub fn make_example<R: Rng>(
    rng: &mut R,
    tokens: &[u32],
    vocab: &TokenizerVocab,
    options: &DenoiseOptions,
) -> Result<DenoisedExample, DenoiseError> {
    options.weights.validate()?;
    if tokens.len() < MIN_TOKENS {
        return Err(DenoiseError::TooShort {
            len: tokens.len(),
            min: MIN_TOKENS,
        });
    }
    let window = &tokens[..tokens.len().min(options.seq_len - 1)];
    let mode = sample_mode(rng, &options.weights);

    let (mut input, target) = match mode {
        DenoiseMode::R => {
            let spans = sample_spans(rng, window.len(), &DenoiserSpec::r())?;
            apply_span_corruption(window, &spans, vocab)?
        }
        DenoiseMode::X => {
            let mean = if rng.random_range(0..2) == 0 {
                X_SHORT_MEAN
            } else {
                X_LONG_MEAN
            };
            let spans = sample_spans(rng, window.len(), &DenoiserSpec::x(mean))?;
            apply_span_corruption(window, &spans, vocab)?
        }
        DenoiseMode::S => {
            let fraction: f64 = rng.random_range(0.10..0.40);
            let suffix = ((window.len() as f64 * fraction).round() as usize)
                .clamp(1, window.len() - 1);
            apply_s_denoise(window, window.len() - suffix, vocab)?
        }
    };

    if options.prefix_mode_token {
        let piece = mode.prefix_piece();
        let id = vocab
            .mode_id(piece)
            .ok_or_else(|| DenoiseError::MissingModePiece {
                piece: piece.to_string(),
            })?;
        input.insert(0, id);
    }
    Ok(DenoisedExample {
        mode,
        input_ids: input,
        target_ids: target,
    })
}

/// Invert a corruption: splice the target's spans back over the input's
/// sentinels, dropping the mode prefix and the closing sentinel. Returns
/// the original (truncated) window.
pub fn reconstruct(
    input_ids: &[u32],
    target_ids: &[u32],
    vocab: &TokenizerVocab,
) -> Result<Vec<u32>, DenoiseError> {
    let is_mode_id = |id: u32| {
        [DenoiseMode::R, DenoiseMode::S, DenoiseMode::X]
            .iter()
            .any(|mode| vocab.mode_id(mode.prefix_piece()) == Some(id))
    };
    let input = match input_ids.first() {
        Some(&first) if is_mode_id(first) => &input_ids[1..],
        _ => input_ids,
    };

    // Input sentinels must be 0, 1, ... in order.
    let mut span_count = 0usize;
    for &id in input {
        if let Some(k) = vocab.sentinel_index(id) {
            if k != span_count {
                return Err(DenoiseError::InputSentinelOrder {
                    expected: span_count,
                    found: k,
                });
            }
            span_count += 1;
        }
    }

    // Parse target segments; sentinel `span_count` closes the target and
    // may be followed by nothing. An open tail (no closing sentinel) is the
    // suffix-mode form.
    let mut segments: Vec<Vec<u32>> = Vec::new();
    let mut next_sentinel = 0usize;
    let mut closed = false;
    for &id in target_ids {
        if closed {
            return Err(DenoiseError::TrailingTargetTokens {
                closing: span_count,
            });
        }
        match vocab.sentinel_index(id) {
            Some(k) => {
                if k != next_sentinel {
                    return Err(DenoiseError::TargetSentinelOrder {
                        expected: next_sentinel,
                        found: k,
                    });
                }
                next_sentinel += 1;
                if k == span_count {
                    closed = true;
                } else {
                    segments.push(Vec::new());
                }
            }
            None => match segments.last_mut() {
                Some(segment) => segment.push(id),
                None => {
                    return Err(DenoiseError::TargetSentinelMissing { expected: 0 });
                }
            },
        }
    }
    if segments.len() < span_count {
        return Err(DenoiseError::TargetSentinelMissing {
            expected: segments.len(),
        });
    }
    if span_count == 0 && !closed {
        return Err(DenoiseError::TargetSentinelMissing { expected: 0 });
    }

    let mut out = Vec::with_capacity(input.len() + target_ids.len());
    let mut next_segment = segments.iter();
    for &id in input {
        if vocab.sentinel_index(id).is_some() {
            out.extend_from_slice(next_segment.next().expect("validated count"));
        } else {
            out.push(id);
        }
    }
    Ok(out)
}

/// Total training tokens for a step count, batch size, and sequence length.
pub fn token_budget(steps: u64, batch: u64, seq_len: u64) -> u128 {
    steps as u128 * batch as u128 * seq_len as u128
}
