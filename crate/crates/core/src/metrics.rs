//! Generation, classification, and regression metrics.
//!
//! Covers clipped n-gram ROUGE, LCS ROUGE, corpus BLEU with a fixed
//! add-epsilon smoothing for zero-match orders, an exact-match METEOR
//! variant (no stemming or synonym resources), support-weighted
//! precision/recall/F1 with accuracy, and Pearson correlation. Sequence
//! metrics are generic over the token type, so scores are invariant under
//! consistent relabeling of the alphabet.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Precision value substituted for a zero-match BLEU order.
pub const BLEU_EPSILON: f64 = 1e-9;
/// Human-readable record of the BLEU smoothing choice.
pub const BLEU_SMOOTHING: &str = "add-epsilon(1e-9) on zero-match orders";
/// Highest n-gram order entering the BLEU geometric mean.
pub const BLEU_MAX_ORDER: usize = 4;

/// Errors from metric computation.
#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    /// Paired inputs of different lengths.
    #[error("paired inputs differ in length: {left} vs {right}")]
    LengthMismatch {
        /// Length of the first sequence.
        left: usize,
        /// Length of the second sequence.
        right: usize,
    },
    /// An operation that needs at least one element got none.
    #[error("metric input is empty")]
    EmptyInput,
    /// Correlation needs at least two points.
    #[error("correlation needs at least 2 points, got {len}")]
    TooFewPoints {
        /// Points provided.
        len: usize,
    },
    /// Correlation is undefined when either side is constant.
    #[error("correlation undefined: {side} values have zero variance")]
    ZeroVariance {
        /// Which argument is constant.
        side: &'static str,
    },
}

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PRF {
    /// Fraction of predicted units that are correct.
    pub precision: f64,
    /// Fraction of reference units that are recovered.
    pub recall: f64,
    /// Harmonic mean of precision and recall, 0 when both are 0. Weighted
    /// aggregates instead carry the support-weighted mean of per-class F1.
    pub f1: f64,
}

impl PRF {
    /// Build from precision and recall with the degenerate-F1 rule.
    pub fn new(precision: f64, recall: f64) -> PRF {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PRF { precision, recall, f1 }
    }
}

/// Named metric values plus an optional per-example breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Metric family name, for example "rouge-1" or "bleu".
    pub name: String,
    /// Aggregate values keyed by component name.
    pub values: BTreeMap<String, f64>,
    /// Recorded implementation choice, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Per-example scores, when the caller asked for them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_example: Option<Vec<(String, f64)>>,
}

impl MetricReport {
    /// Empty report for a metric family.
    pub fn new(name: impl Into<String>) -> MetricReport {
        MetricReport {
            name: name.into(),
            values: BTreeMap::new(),
            note: None,
            per_example: None,
        }
    }

    /// Add one aggregate value. All values must be finite.
    pub fn with_value(mut self, key: impl Into<String>, value: f64) -> MetricReport {
        assert!(value.is_finite(), "metric values must be finite");
        self.values.insert(key.into(), value);
        self
    }
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut counts: HashMap<&[T], u64> = HashMap::new();
    if n <= tokens.len() {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_overlap<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> (u64, u64, u64) {
    let cand = ngram_counts(candidate, n);
    let reference = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(gram, count)| (*count).min(reference.get(gram).copied().unwrap_or(0)))
        .sum();
    let cand_total = cand.values().sum();
    let ref_total = reference.values().sum();
    (overlap, cand_total, ref_total)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Clipped n-gram overlap: recall against the reference's n-grams,
/// precision against the candidate's. Empty sides score 0.
pub fn rouge_n<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> PRF {
    assert!(n >= 1, "n-gram order must be at least 1");
    let (overlap, cand_total, ref_total) = clipped_overlap(candidate, reference, n);
    PRF::new(ratio(overlap, cand_total), ratio(overlap, ref_total))
}

fn lcs_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for item in a {
        let mut diagonal = 0;
        for (j, other) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if item == other {
                diagonal + 1
            } else {
                above.max(row[j])
            };
            diagonal = above;
        }
    }
    row[b.len()]
}

/// Longest-common-subsequence overlap: recall over the reference length,
/// precision over the candidate length.
pub fn rouge_l<T: Eq>(candidate: &[T], reference: &[T]) -> PRF {
    let lcs = lcs_len(candidate, reference) as u64;
    PRF::new(ratio(lcs, candidate.len() as u64), ratio(lcs, reference.len() as u64))
}

/// Corpus BLEU decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// Final score in [0, 1].
    pub score: f64,
    /// Clipped precision per order 1..=4; `None` when the corpus has no
    /// candidate n-grams of that order (the order is left out of the mean).
    pub precisions: [Option<f64>; BLEU_MAX_ORDER],
    /// exp(1 - r/c) when the candidates run short, else 1.
    pub brevity_penalty: f64,
    /// Total candidate tokens.
    pub candidate_tokens: u64,
    /// Total reference tokens.
    pub reference_tokens: u64,
    /// The smoothing rule applied to zero-match orders.
    pub smoothing: &'static str,
}

/// Corpus BLEU over orders 1..=4 with one reference per candidate.
///
/// Zero-match orders enter the geometric mean as [`BLEU_EPSILON`]; orders
/// with no candidate n-grams at all are excluded, so a corpus equal to its
/// references scores exactly 1 regardless of sentence lengths.
pub fn bleu_report<T: Eq + Hash>(
    candidates: &[Vec<T>],
    references: &[Vec<T>],
) -> Result<BleuReport, MetricsError> {
    if candidates.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if candidates.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }

    let mut matched = [0u64; BLEU_MAX_ORDER];
    let mut total = [0u64; BLEU_MAX_ORDER];
    for (candidate, reference) in candidates.iter().zip(references) {
        for n in 1..=BLEU_MAX_ORDER {
            let (overlap, cand_total, _) = clipped_overlap(candidate, reference, n);
            matched[n - 1] += overlap;
            total[n - 1] += cand_total;
        }
    }
    let candidate_tokens: u64 = candidates.iter().map(|c| c.len() as u64).sum();
    let reference_tokens: u64 = references.iter().map(|r| r.len() as u64).sum();

    let mut precisions = [None; BLEU_MAX_ORDER];
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for n in 0..BLEU_MAX_ORDER {
        if total[n] == 0 {
            continue;
        }
        let exact = ratio(matched[n], total[n]);
        precisions[n] = Some(exact);
        let effective = if matched[n] == 0 { BLEU_EPSILON } else { exact };
        log_sum += effective.ln();
        used += 1;
    }

    let brevity_penalty = if candidate_tokens == 0 {
        0.0
    } else if candidate_tokens >= reference_tokens {
        1.0
    } else {
        (1.0 - reference_tokens as f64 / candidate_tokens as f64).exp()
    };
    let score = if used == 0 || candidate_tokens == 0 {
        0.0
    } else {
        brevity_penalty * (log_sum / used as f64).exp()
    };
    Ok(BleuReport {
        score,
        precisions,
        brevity_penalty,
        candidate_tokens,
        reference_tokens,
        smoothing: BLEU_SMOOTHING,
    })
}

/// Corpus BLEU score; see [`bleu_report`] for the decomposition.
pub fn bleu<T: Eq + Hash>(
    candidates: &[Vec<T>],
    references: &[Vec<T>],
) -> Result<f64, MetricsError> {
    Ok(bleu_report(candidates, references)?.score)
}

struct ChunkSearch<'a> {
    matchable: Vec<Option<&'a [usize]>>,
    max_matches: usize,
    ref_used: Vec<bool>,
    best_chunks: usize,
}

impl ChunkSearch<'_> {
    /// Most matches still reachable from candidate position `i` on.
    fn reachable(&self, i: usize) -> usize {
        let mut free_by_token: HashMap<&[usize], usize> = HashMap::new();
        let mut reachable = 0;
        for positions in self.matchable[i..].iter().flatten() {
            let free = free_by_token
                .entry(positions)
                .or_insert_with(|| positions.iter().filter(|&&j| !self.ref_used[j]).count());
            if *free > 0 {
                *free -= 1;
                reachable += 1;
            }
        }
        reachable
    }

    fn descend(&mut self, i: usize, matches: usize, chunks: usize, prev: Option<usize>) {
        if chunks >= self.best_chunks {
            return;
        }
        if i == self.matchable.len() {
            if matches == self.max_matches {
                self.best_chunks = chunks;
            }
            return;
        }
        if let Some(positions) = self.matchable[i] {
            // Continuation first: extending the current chunk reaches the
            // low-chunk solutions early and tightens the bound.
            let continuation = prev.map(|p| p + 1);
            let ordered = continuation
                .filter(|c| positions.contains(c))
                .into_iter()
                .chain(positions.iter().copied().filter(|j| Some(*j) != continuation));
            let ordered: Vec<usize> = ordered.collect();
            for j in ordered {
                if self.ref_used[j] {
                    continue;
                }
                let grown = if Some(j) == continuation { chunks } else { chunks + 1 };
                self.ref_used[j] = true;
                self.descend(i + 1, matches + 1, grown, Some(j));
                self.ref_used[j] = false;
            }
        }
        // Skip this candidate position when a maximum matching is still
        // reachable without it.
        if matches + self.reachable(i + 1) >= self.max_matches {
            self.descend(i + 1, matches, chunks, prev);
        }
    }
}

/// Exact-match METEOR: align unigrams maximizing matches then minimizing
/// chunks, and score `Fmean x (1 - 0.5 (chunks/matches)^3)` with
/// `Fmean = 10PR / (R + 9P)`. No matches scores 0.
pub fn meteor_exact<T: Eq + Hash>(candidate: &[T], reference: &[T]) -> f64 {
    let mut ref_positions: HashMap<&T, Vec<usize>> = HashMap::new();
    for (j, token) in reference.iter().enumerate() {
        ref_positions.entry(token).or_default().push(j);
    }
    let mut cand_counts: HashMap<&T, usize> = HashMap::new();
    for token in candidate {
        *cand_counts.entry(token).or_insert(0) += 1;
    }
    let max_matches: usize = cand_counts
        .iter()
        .map(|(token, count)| {
            ref_positions.get(token).map_or(0, |positions| positions.len().min(*count))
        })
        .sum();
    if max_matches == 0 {
        return 0.0;
    }

    let matchable: Vec<Option<&[usize]>> = candidate
        .iter()
        .map(|token| ref_positions.get(token).map(|positions| positions.as_slice()))
        .collect();
    let mut search = ChunkSearch {
        matchable,
        max_matches,
        ref_used: vec![false; reference.len()],
        best_chunks: max_matches + 1,
    };
    search.descend(0, 0, 0, None);
    let chunks = search.best_chunks;

    let precision = max_matches as f64 / candidate.len() as f64;
    let recall = max_matches as f64 / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (chunks as f64 / max_matches as f64).powi(3);
    fmean * (1.0 - penalty)
}

/// Support-weighted precision/recall/F1 and accuracy over label pairs.
///
/// Per-class scores are averaged with gold-support weights; the weighted
/// recall reduces to total correct over total, so it equals accuracy
/// exactly.
pub fn weighted_prf<T: Eq + Hash>(gold: &[T], pred: &[T]) -> Result<(PRF, f64), MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }

    let mut true_positive: HashMap<&T, u64> = HashMap::new();
    let mut gold_support: HashMap<&T, u64> = HashMap::new();
    let mut pred_support: HashMap<&T, u64> = HashMap::new();
    let mut correct = 0u64;
    for (g, p) in gold.iter().zip(pred) {
        *gold_support.entry(g).or_insert(0) += 1;
        *pred_support.entry(p).or_insert(0) += 1;
        if g == p {
            *true_positive.entry(g).or_insert(0) += 1;
            correct += 1;
        }
    }

    let n = gold.len() as f64;
    let mut weighted_precision = 0.0;
    let mut weighted_f1 = 0.0;
    for (class, support) in &gold_support {
        let tp = true_positive.get(class).copied().unwrap_or(0);
        let class_prf = PRF::new(
            ratio(tp, pred_support.get(class).copied().unwrap_or(0)),
            ratio(tp, *support),
        );
        let weight = *support as f64 / n;
        weighted_precision += weight * class_prf.precision;
        weighted_f1 += weight * class_prf.f1;
    }
    let accuracy = correct as f64 / n;
    Ok((
        PRF {
            precision: weighted_precision,
            recall: accuracy,
            f1: weighted_f1,
        },
        accuracy,
    ))
}

/// Sample Pearson correlation of two equal-length series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooFewPoints { len: xs.len() });
    }
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut covariance = 0.0;
    let mut variance_x = 0.0;
    let mut variance_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        covariance += dx * dy;
        variance_x += dx * dx;
        variance_y += dy * dy;
    }
    if variance_x == 0.0 {
        return Err(MetricsError::ZeroVariance { side: "x" });
    }
    if variance_y == 0.0 {
        return Err(MetricsError::ZeroVariance { side: "y" });
    }
    Ok(covariance / (variance_x * variance_y).sqrt())
}
