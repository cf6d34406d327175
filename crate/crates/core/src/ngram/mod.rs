//! Word-level n-gram language models for document quality scoring.
//!
//! Models are trained on whitespace-tokenized sentences with modified
//! Kneser-Ney smoothing (interpolated, three discounts per order) or, for
//! oracle testing, plain maximum likelihood. Trained models score documents
//! by mean log10 probability per scored event and the resulting scores feed
//! percentile-based corpus filtering. Models round-trip through the ARPA
//! text format.

mod arpa;

pub use arpa::{parse_arpa, read_arpa, render_arpa, write_arpa};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::text::{split_sentences, whitespace_tokens};

/// Sentence-begin marker prepended to every padded sentence.
pub const BOS: &str = "<s>";
/// Sentence-end marker appended to every padded sentence.
pub const EOS: &str = "</s>";
/// Stand-in token for words outside the trained vocabulary.
pub const UNK: &str = "<unk>";

/// Placeholder log10 probability stored for the begin marker; it is never a
/// legal prediction, only a backoff context.
const BOS_LOGPROB: f64 = -99.0;

/// Errors from n-gram training, scoring, filtering, and ARPA I/O.
#[derive(Debug, thiserror::Error)]
pub enum NGramError {
    /// Training input had no nonempty sentence.
    #[error("training corpus has no nonempty sentences")]
    EmptyCorpus,
    /// Requested model order is zero.
    #[error("n-gram order must be at least 1, got {0}")]
    BadOrder(usize),
    /// A document produced no scoreable tokens.
    #[error("document `{id}` has no tokens to score")]
    EmptyDocument {
        /// Identifier of the offending document.
        id: String,
    },
    /// A document reached score filtering without a stored score.
    #[error("document `{id}` has no lm_score; score the corpus first")]
    MissingScore {
        /// Identifier of the offending document.
        id: String,
    },
    /// Percentile lookup over an empty score list.
    #[error("cannot take a percentile of an empty score list")]
    EmptyScores,
    /// Percentile outside the open interval (0, 100).
    #[error("percentile must lie in (0, 100), got {0}")]
    BadPercentile(f64),
    /// Attempt to serialize a model with no unigram entries.
    #[error("model has no unigram entries to write")]
    EmptyModel,
    /// Underlying file I/O failure.
    #[error("n-gram model I/O failed: {0}")]
    Io(#[from] std::io::Error),
    /// Structurally invalid ARPA input.
    #[error("ARPA line {line}: {reason}")]
    Malformed {
        /// 1-based line number in the input.
        line: usize,
        /// What was wrong with the line.
        reason: String,
    },
    /// Header-declared entry count disagrees with a section body.
    #[error("ARPA header declares {expected} {order}-gram entries but the section lists {found}")]
    CountMismatch {
        /// N-gram order of the mismatched section.
        order: usize,
        /// Count promised by the `\data\` header.
        expected: usize,
        /// Entries actually present in the section.
        found: usize,
    },
}

/// Smoothing scheme used at training time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// Interpolated modified Kneser-Ney with per-order discounts; sentences
    /// are padded with begin/end markers and an unknown-word entry is added.
    KneserNey,
    /// Raw conditional relative frequencies without padding or unknown
    /// handling; exists for oracle testing against hand counts.
    Mle,
}

/// Mean log10 probability of one scored document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScore {
    /// Identifier of the scored document.
    pub doc_id: String,
    /// Total log10 probability divided by the number of scored events.
    pub mean_log10_prob: f64,
    /// Scored events: every sentence token plus one end marker per sentence.
    /// Begin markers condition predictions but are never themselves scored.
    pub token_count: u64,
}

/// Backoff n-gram model over whitespace tokens.
///
/// Entries at order n map a space-joined n-gram to its log10 conditional
/// probability and, below the top order, a log10 backoff weight (0.0 when
/// the n-gram never appears as a context).
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    entries: Vec<BTreeMap<String, (f64, f64)>>,
}

impl NGramModel {
    /// Highest n-gram order stored in the model.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of entries at the given order (1-based); zero outside range.
    pub fn entry_count(&self, n: usize) -> usize {
        if n == 0 || n > self.order {
            return 0;
        }
        self.entries[n - 1].len()
    }

    /// Stored `(log10 prob, log10 backoff)` for an exact n-gram, if present.
    pub fn entry(&self, ngram: &[&str]) -> Option<(f64, f64)> {
        if ngram.is_empty() || ngram.len() > self.order {
            return None;
        }
        self.entries[ngram.len() - 1].get(&ngram.join(" ")).copied()
    }

    /// Tokens that can appear as predictions: every unigram entry except the
    /// begin marker.
    pub fn prediction_vocab(&self) -> Vec<&str> {
        self.entries[0]
            .keys()
            .map(String::as_str)
            .filter(|t| *t != BOS)
            .collect()
    }

    /// Log10 probability of `token` after `context` under the standard
    /// backoff rule: use the longest matching entry, charging the stored
    /// backoff weight of each context suffix that fails to extend. Unknown
    /// tokens fall back to the unknown-word entry when the model has one,
    /// otherwise the probability is negative infinity.
    pub fn logprob(&self, context: &[&str], token: &str) -> f64 {
        let token = if self.entries[0].contains_key(token) {
            token
        } else {
            UNK
        };
        let start = context.len().saturating_sub(self.order - 1);
        let mut ctx = &context[start..];
        let mut charged = 0.0;
        loop {
            let mut key = ctx.join(" ");
            if !key.is_empty() {
                key.push(' ');
            }
            key.push_str(token);
            if let Some((logprob, _)) = self.entries[ctx.len()].get(&key) {
                return charged + logprob;
            }
            if ctx.is_empty() {
                return f64::NEG_INFINITY;
            }
            if let Some((_, backoff)) = self.entries[ctx.len() - 1].get(&ctx.join(" ")) {
                charged += backoff;
            }
            ctx = &ctx[1..];
        }
    }

    /// Total log10 probability and event count for one sentence. Events are
    /// each token plus the end marker; the begin marker only conditions.
    pub fn score_sentence(&self, tokens: &[&str]) -> (f64, u64) {
        let mut history: Vec<&str> = Vec::with_capacity(tokens.len() + 1);
        history.push(BOS);
        let mut total = 0.0;
        for token in tokens {
            total += self.logprob(&history, token);
            history.push(token);
        }
        total += self.logprob(&history, EOS);
        (total, tokens.len() as u64 + 1)
    }

    /// Score raw text: lines are sentence-split, whitespace-tokenized, and
    /// scored independently; the mean is over all scored events.
    pub fn score_text(&self, doc_id: &str, text: &str) -> Result<DocScore, NGramError> {
        let mut total = 0.0;
        let mut events = 0u64;
        for line in text.split('\n') {
            for sentence in split_sentences(line) {
                let tokens = whitespace_tokens(sentence);
                if tokens.is_empty() {
                    continue;
                }
                let (t, e) = self.score_sentence(&tokens);
                total += t;
                events += e;
            }
        }
        if events == 0 {
            return Err(NGramError::EmptyDocument {
                id: doc_id.to_string(),
            });
        }
        Ok(DocScore {
            doc_id: doc_id.to_string(),
            mean_log10_prob: total / events as f64,
            token_count: events,
        })
    }

    /// Score a corpus document by its text.
    pub fn score_document(&self, doc: &Document) -> Result<DocScore, NGramError> {
        self.score_text(&doc.id, &doc.text)
    }
}

/// Train an n-gram model on pre-tokenized sentences.
pub fn train(
    sentences: &[Vec<String>],
    order: usize,
    smoothing: Smoothing,
) -> Result<NGramModel, NGramError> {
    if order == 0 {
        return Err(NGramError::BadOrder(order));
    }
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(NGramError::EmptyCorpus);
    }
    let entries = match smoothing {
        Smoothing::Mle => train_mle(sentences, order),
        Smoothing::KneserNey => train_kneser_ney(sentences, order),
    };
    Ok(NGramModel { order, entries })
}

type CountTables = Vec<BTreeMap<Vec<String>, u64>>;

/// Raw n-gram window counts for orders 1..=order, optionally padding each
/// sentence with begin/end markers.
fn count_ngrams(sentences: &[Vec<String>], order: usize, pad: bool) -> CountTables {
    let mut tables: CountTables = vec![BTreeMap::new(); order];
    for sentence in sentences {
        if sentence.is_empty() {
            continue;
        }
        let mut padded: Vec<String> = Vec::with_capacity(sentence.len() + 2);
        if pad {
            padded.push(BOS.to_string());
        }
        padded.extend(sentence.iter().cloned());
        if pad {
            padded.push(EOS.to_string());
        }
        for n in 1..=order {
            for window in padded.windows(n) {
                *tables[n - 1].entry(window.to_vec()).or_insert(0) += 1;
            }
        }
    }
    tables
}

fn train_mle(sentences: &[Vec<String>], order: usize) -> Vec<BTreeMap<String, (f64, f64)>> {
    let raw = count_ngrams(sentences, order, false);
    let mut entries = vec![BTreeMap::new(); order];
    for (table, out) in raw.iter().zip(entries.iter_mut()) {
        for (context, group) in context_groups(table) {
            let total: u64 = group.iter().map(|(_, c)| *c).sum();
            for (token, count) in group {
                let mut key = context.join(" ");
                if !key.is_empty() {
                    key.push(' ');
                }
                key.push_str(&token);
                out.insert(key, ((count as f64 / total as f64).log10(), 0.0));
            }
        }
    }
    entries
}

/// Split a count table into runs sharing the same context (all but the last
/// token); sorted map iteration keeps each context contiguous.
fn context_groups(table: &BTreeMap<Vec<String>, u64>) -> Vec<(Vec<String>, Vec<(String, u64)>)> {
    let mut groups: Vec<(Vec<String>, Vec<(String, u64)>)> = Vec::new();
    for (ngram, count) in table {
        let (context, token) = ngram.split_at(ngram.len() - 1);
        match groups.last_mut() {
            Some((ctx, members)) if ctx.as_slice() == context => {
                members.push((token[0].clone(), *count));
            }
            _ => groups.push((context.to_vec(), vec![(token[0].clone(), *count)])),
        }
    }
    groups
}

/// Discounts D1, D2, D3+ for one order from its count-of-counts `n[0..4]`
/// (how many n-grams occur exactly 1, 2, 3, 4 times). Each discount uses the
/// closed-form estimate when its two supporting counts are positive and the
/// estimate lies in (0, k]; otherwise it falls back to k/2.
fn discount_set(count_of_counts: [u64; 4]) -> [f64; 3] {
    let n = count_of_counts.map(|c| c as f64);
    let mut d = [0.5, 1.0, 1.5];
    if n[0] > 0.0 {
        let y = n[0] / (n[0] + 2.0 * n[1]);
        for k in 0..3 {
            if n[k] > 0.0 && n[k + 1] > 0.0 {
                let estimate = (k as f64 + 1.0) - (k as f64 + 2.0) * y * n[k + 1] / n[k];
                if estimate > 0.0 && estimate <= k as f64 + 1.0 {
                    d[k] = estimate;
                }
            }
        }
    }
    d
}

fn pick_discount(discounts: &[f64; 3], count: u64) -> f64 {
    match count {
        0 => 0.0,
        1 => discounts[0],
        2 => discounts[1],
        _ => discounts[2],
    }
}

fn train_kneser_ney(sentences: &[Vec<String>], order: usize) -> Vec<BTreeMap<String, (f64, f64)>> {
    let raw = count_ngrams(sentences, order, true);

    // Adjusted counts: the top order keeps raw counts; below it an n-gram is
    // counted once per distinct left extension (continuation counting),
    // except n-grams starting with the begin marker, which cannot be
    // extended left and keep their raw counts. The bare begin marker is
    // excluded outright: it is never a prediction.
    let mut adjusted: CountTables = vec![BTreeMap::new(); order];
    adjusted[order - 1] = raw[order - 1].clone();
    for n in (1..order).rev() {
        let table = &mut adjusted[n - 1];
        for extension in raw[n].keys() {
            *table.entry(extension[1..].to_vec()).or_insert(0) += 1;
        }
        for (ngram, count) in &raw[n - 1] {
            if ngram[0] == BOS {
                table.insert(ngram.clone(), *count);
            }
        }
    }
    adjusted[0].remove(&vec![BOS.to_string()]);

    let discounts: Vec<[f64; 3]> = adjusted
        .iter()
        .map(|table| {
            let mut coc = [0u64; 4];
            for count in table.values() {
                if (1..=4).contains(count) {
                    coc[*count as usize - 1] += 1;
                }
            }
            discount_set(coc)
        })
        .collect();

    let mut entries: Vec<BTreeMap<String, (f64, f64)>> = vec![BTreeMap::new(); order];
    // Linear-space probabilities per full n-gram, kept for interpolation by
    // the next order up.
    let mut lower: BTreeMap<Vec<String>, f64> = BTreeMap::new();

    // Unigram layer: discounted counts interpolated with a uniform
    // distribution over the prediction vocabulary, so unseen words get mass.
    let d = &discounts[0];
    let total: u64 = adjusted[0].values().sum();
    let vocab_size = adjusted[0].len() as f64 + 1.0; // plus the unknown token
    let reserved: f64 = adjusted[0]
        .values()
        .map(|c| pick_discount(d, *c))
        .sum::<f64>()
        / total as f64;
    let uniform = reserved / vocab_size;
    for (ngram, count) in &adjusted[0] {
        let p = (*count as f64 - pick_discount(d, *count)).max(0.0) / total as f64 + uniform;
        entries[0].insert(ngram[0].clone(), (p.log10(), 0.0));
        lower.insert(ngram.clone(), p);
    }
    entries[0].insert(UNK.to_string(), (uniform.log10(), 0.0));
    lower.insert(vec![UNK.to_string()], uniform);
    entries[0].insert(BOS.to_string(), (BOS_LOGPROB, 0.0));

    for n in 2..=order {
        let d = &discounts[n - 1];
        let table = if n == order { &raw[n - 1] } else { &adjusted[n - 1] };
        let mut next_lower: BTreeMap<Vec<String>, f64> = BTreeMap::new();
        for (context, group) in context_groups(table) {
            let total: u64 = group.iter().map(|(_, c)| *c).sum();
            let reserved: f64 = group
                .iter()
                .map(|(_, c)| pick_discount(d, *c))
                .sum::<f64>()
                / total as f64;
            for (token, count) in group {
                let mut suffix: Vec<String> = context[1..].to_vec();
                suffix.push(token.clone());
                let p = (count as f64 - pick_discount(d, count)).max(0.0) / total as f64
                    + reserved * lower[&suffix];
                let mut ngram = context.clone();
                ngram.push(token);
                entries[n - 1].insert(ngram.join(" "), (p.log10(), 0.0));
                if n < order {
                    next_lower.insert(ngram, p);
                }
            }
            // The context earned a backoff weight: the mass reserved by
            // discounting, stored on the context's own entry one order down.
            let key = context.join(" ");
            if let Some(entry) = entries[n - 2].get_mut(&key) {
                entry.1 = reserved.log10();
            }
        }
        lower = next_lower;
    }
    entries
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(pct/100 * N)` of
/// the ascending-sorted scores (clamped into range).
pub fn percentile_threshold(scores: &[f64], pct: f64) -> Result<f64, NGramError> {
    if scores.is_empty() {
        return Err(NGramError::EmptyScores);
    }
    if !(pct > 0.0 && pct < 100.0) {
        return Err(NGramError::BadPercentile(pct));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Partition documents by stored score: `(kept, dropped)` where a document
/// is dropped when `lm_score < cutoff`. Order is preserved on both sides.
/// A document without a score is an error, not a silent keep.
pub fn filter_by_score(
    docs: Vec<Document>,
    cutoff: f64,
) -> Result<(Vec<Document>, Vec<Document>), NGramError> {
    if let Some(doc) = docs.iter().find(|d| d.lm_score.is_none()) {
        return Err(NGramError::MissingScore {
            id: doc.id.clone(),
        });
    }
    Ok(docs
        .into_iter()
        .partition(|d| d.lm_score.expect("checked above") >= cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;
    use approx::assert_relative_eq;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn reference_corpus() -> Vec<Vec<String>> {
        vec![
            toks("kedi sütü içti ve kedi uyudu"),
            toks("köpek sütü içti ve köpek koştu"),
        ]
    }

    fn doc(id: &str, text: &str, lm_score: Option<f64>) -> Document {
        Document {
            id: id.to_string(),
            source: Source::Web,
            text: text.to_string(),
            meta: Default::default(),
            lm_score,
        }
    }

    #[test]
    fn mle_unigram_matches_hand_counts() {
        let model = train(&[toks("a a b")], 1, Smoothing::Mle).unwrap();
        assert_eq!(model.entry(&["a"]).unwrap().0, (2.0f64 / 3.0).log10());
        assert_eq!(model.entry(&["b"]).unwrap().0, (1.0f64 / 3.0).log10());
        assert_eq!(model.entry_count(1), 2);
    }

    #[test]
    fn mle_bigram_conditionals_match_hand_counts() {
        let model = train(&[toks("a a b")], 2, Smoothing::Mle).unwrap();
        assert_eq!(model.entry(&["a", "a"]).unwrap().0, 0.5f64.log10());
        assert_eq!(model.entry(&["a", "b"]).unwrap().0, 0.5f64.log10());
        assert_eq!(model.logprob(&["a"], "a"), 0.5f64.log10());
    }

    #[test]
    fn mle_probability_never_drops_when_occurrences_are_added() {
        let before = train(&[toks("a b")], 1, Smoothing::Mle).unwrap();
        let after = train(&[toks("a b"), toks("a a")], 1, Smoothing::Mle).unwrap();
        assert!(after.entry(&["a"]).unwrap().0 >= before.entry(&["a"]).unwrap().0);
    }

    // Reference values computed by an independent implementation of the same
    // discounting scheme, frozen to ten decimals.
    #[test]
    fn kneser_ney_bigram_model_matches_frozen_reference() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let unigrams = [
            ("<s>", -99.0, -0.1461280357),
            ("içti", -0.9790660932, -0.3010299957),
            ("kedi", -0.8770765546, -0.1461280357),
            ("koştu", -0.9790660932, -0.1461280357),
            ("köpek", -0.8770765546, -0.1461280357),
            ("sütü", -0.8770765546, -0.3010299957),
            ("uyudu", -0.9790660932, -0.1461280357),
            ("ve", -0.9790660932, -0.1461280357),
            ("</s>", -0.8770765546, 0.0),
            ("<unk>", -1.3064250276, 0.0),
        ];
        for (token, prob, backoff) in unigrams {
            let (p, b) = model.entry(&[token]).unwrap();
            assert_relative_eq!(p, prob, epsilon = 1e-9);
            assert_relative_eq!(b, backoff, epsilon = 1e-9);
        }
        let bigrams = [
            (["<s>", "kedi"], -0.6240542850),
            (["<s>", "köpek"], -0.6240542850),
            (["içti", "ve"], -0.2576919792),
            (["kedi", "sütü"], -0.6240542850),
            (["kedi", "uyudu"], -0.6619161013),
            (["koştu", "</s>"], -0.4196322545),
            (["köpek", "koştu"], -0.6619161013),
            (["köpek", "sütü"], -0.6240542850),
            (["sütü", "içti"], -0.2576919792),
            (["uyudu", "</s>"], -0.4196322545),
            (["ve", "kedi"], -0.6240542850),
            (["ve", "köpek"], -0.6240542850),
        ];
        assert_eq!(model.entry_count(2), bigrams.len());
        for (ngram, prob) in bigrams {
            assert_relative_eq!(model.entry(&ngram).unwrap().0, prob, epsilon = 1e-9);
        }
    }

    #[test]
    fn backoff_query_charges_context_weight() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        // No "kedi </s>" bigram: backoff(kedi) + p1(</s>).
        assert_relative_eq!(
            model.logprob(&["kedi"], "</s>"),
            -1.0232045903,
            epsilon = 1e-9
        );
        // Unknown word after "kedi": backoff(kedi) + p1(<unk>).
        assert_relative_eq!(
            model.logprob(&["kedi"], "zürafa"),
            -1.4525530632,
            epsilon = 1e-9
        );
        // Top-order hit returns the stored probability with no charge.
        assert_eq!(
            model.logprob(&["kedi"], "sütü"),
            model.entry(&["kedi", "sütü"]).unwrap().0
        );
    }

    #[test]
    fn long_context_is_truncated_to_model_order() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        assert_eq!(
            model.logprob(&["uyudu", "ve", "kedi"], "sütü"),
            model.logprob(&["kedi"], "sütü")
        );
    }

    #[test]
    fn every_context_distribution_sums_to_one() {
        for order in [1usize, 2, 3] {
            let model = train(&reference_corpus(), order, Smoothing::KneserNey).unwrap();
            let vocab = model.prediction_vocab();
            let mut contexts: Vec<Vec<&str>> = vec![Vec::new()];
            for n in 1..order {
                for key in model.entries[n - 1].keys() {
                    contexts.push(key.split(' ').collect());
                }
            }
            for context in &contexts {
                let sum: f64 = vocab
                    .iter()
                    .map(|w| 10f64.powf(model.logprob(context, w)))
                    .sum();
                assert_relative_eq!(sum, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn mle_observed_distribution_sums_to_one() {
        let model = train(&[toks("a a b"), toks("b c a")], 2, Smoothing::Mle).unwrap();
        let unigram_sum: f64 = ["a", "b", "c"]
            .iter()
            .map(|w| 10f64.powf(model.logprob(&[], w)))
            .sum();
        assert_relative_eq!(unigram_sum, 1.0, epsilon = 1e-6);
        // Observed continuations of "a" carry all of its conditional mass.
        let cond_sum: f64 = ["a", "b"]
            .iter()
            .map(|w| 10f64.powf(model.logprob(&["a"], w)))
            .sum();
        assert_relative_eq!(cond_sum, 1.0, epsilon = 1e-6);
        assert_eq!(model.logprob(&[], "zürafa"), f64::NEG_INFINITY);
    }

    #[test]
    fn unknown_token_gets_nonzero_probability() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        assert!(model.logprob(&[], "zürafa").is_finite());
        assert!(model.logprob(&[], "zürafa") < 0.0);
    }

    #[test]
    fn training_rejects_empty_corpus_and_zero_order() {
        assert!(matches!(
            train(&[], 2, Smoothing::KneserNey),
            Err(NGramError::EmptyCorpus)
        ));
        assert!(matches!(
            train(&[toks("")], 2, Smoothing::KneserNey),
            Err(NGramError::EmptyCorpus)
        ));
        assert!(matches!(
            train(&[toks("a")], 0, Smoothing::Mle),
            Err(NGramError::BadOrder(0))
        ));
    }

    #[test]
    fn document_scores_match_frozen_reference() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let score = model.score_text("d1", "kedi").unwrap();
        assert_eq!(score.token_count, 2);
        assert_relative_eq!(score.mean_log10_prob, -0.8236294377, epsilon = 1e-9);
    }

    #[test]
    fn training_sentence_outscores_its_reversal() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let seen = model.score_text("a", "kedi sütü içti ve kedi uyudu").unwrap();
        let shuffled = model.score_text("b", "uyudu kedi ve içti sütü kedi").unwrap();
        assert!(seen.mean_log10_prob > shuffled.mean_log10_prob);
    }

    #[test]
    fn repeating_a_document_leaves_its_mean_unchanged() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let once = model.score_text("a", "kedi sütü içti").unwrap();
        let twice = model
            .score_text("b", "kedi sütü içti\nkedi sütü içti")
            .unwrap();
        assert_eq!(once.mean_log10_prob, twice.mean_log10_prob);
        assert_eq!(twice.token_count, 2 * once.token_count);
    }

    #[test]
    fn sentences_are_split_before_scoring() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let joined = model.score_text("a", "kedi uyudu. köpek koştu.").unwrap();
        // Four tokens, two sentences: each contributes its end marker, and
        // the terminal punctuation glues to the preceding token.
        assert_eq!(joined.token_count, 6);
    }

    #[test]
    fn empty_document_is_an_error() {
        let model = train(&reference_corpus(), 2, Smoothing::KneserNey).unwrap();
        let err = model.score_text("boş", "   \n  ").unwrap_err();
        assert!(matches!(err, NGramError::EmptyDocument { id } if id == "boş"));
    }

    #[test]
    fn percentile_matches_nearest_rank_examples() {
        let scores: Vec<f64> = (1..=100).map(f64::from).collect();
        let cutoff = percentile_threshold(&scores, 5.0).unwrap();
        assert_eq!(cutoff, 5.0);
        assert_eq!(scores.iter().filter(|s| **s < cutoff).count(), 4);
        assert_eq!(percentile_threshold(&[-3.0, -2.0, -1.0], 50.0).unwrap(), -2.0);
    }

    #[test]
    fn percentile_is_permutation_invariant_and_validates_input() {
        let sorted: Vec<f64> = (1..=30).map(f64::from).collect();
        let mut shuffled = sorted.clone();
        shuffled.reverse();
        shuffled.swap(3, 17);
        assert_eq!(
            percentile_threshold(&sorted, 12.5).unwrap(),
            percentile_threshold(&shuffled, 12.5).unwrap()
        );
        assert!(matches!(
            percentile_threshold(&[], 5.0),
            Err(NGramError::EmptyScores)
        ));
        assert!(matches!(
            percentile_threshold(&[1.0], 0.0),
            Err(NGramError::BadPercentile(_))
        ));
        assert!(matches!(
            percentile_threshold(&[1.0], 100.0),
            Err(NGramError::BadPercentile(_))
        ));
    }

    #[test]
    fn percentile_of_identical_scores_drops_nothing() {
        let scores = vec![-2.5; 40];
        let cutoff = percentile_threshold(&scores, 5.0).unwrap();
        assert_eq!(scores.iter().filter(|s| **s < cutoff).count(), 0);
    }

    #[test]
    fn filter_by_score_partitions_preserving_order() {
        let docs = vec![
            doc("a", "x", Some(-1.0)),
            doc("b", "x", Some(-5.0)),
            doc("c", "x", Some(-2.0)),
            doc("d", "x", Some(-5.0)),
        ];
        let (kept, dropped) = filter_by_score(docs, -2.0).unwrap();
        assert_eq!(
            kept.iter().map(|d| d.id.as_str()).collect::<Vec<_>>(),
            ["a", "c"]
        );
        assert_eq!(
            dropped.iter().map(|d| d.id.as_str()).collect::<Vec<_>>(),
            ["b", "d"]
        );
    }

    #[test]
    fn filter_by_score_requires_scores() {
        let docs = vec![doc("a", "x", Some(-1.0)), doc("b", "x", None)];
        let err = filter_by_score(docs, -2.0).unwrap_err();
        assert!(matches!(err, NGramError::MissingScore { id } if id == "b"));
    }
}
