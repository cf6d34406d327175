//! Character n-gram language identification.
//!
//! A small naive-Bayes classifier over character n-grams with add-one
//! smoothing. Each language's conditional distributions are normalized
//! over that language's observed alphabet plus one unseen bucket, so
//! they sum to exactly 1.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::LazyLock;

use thiserror::Error;

/// Label returned when a line is too short to hold a single n-gram.
pub const UNKNOWN_LANGUAGE: &str = "unknown";

/// Errors from classifier training.
#[derive(Debug, Error)]
pub enum LangIdError {
    /// Training needs at least two languages to discriminate between.
    #[error("language model needs at least 2 languages, got {0}")]
    TooFewLanguages(usize),
    /// N-gram order must be at least 1.
    #[error("n-gram order must be >= 1, got {0}")]
    BadOrder(usize),
    /// A language whose sample text yields no n-grams.
    #[error("language {0:?} has no training n-grams (sample shorter than order)")]
    EmptySample(String),
}

struct LangModel {
    /// context (order-1 chars) -> next char -> count
    transitions: HashMap<String, HashMap<char, u32>>,
    context_totals: HashMap<String, u32>,
    alphabet: HashSet<char>,
}

impl LangModel {
    /// log10 P(next | context) with add-one smoothing over the
    /// alphabet plus one unseen bucket.
    fn log_prob(&self, context: &str, next: char) -> f64 {
        let buckets = (self.alphabet.len() + 1) as f64;
        let total = *self.context_totals.get(context).unwrap_or(&0) as f64;
        let count = self
            .transitions
            .get(context)
            .and_then(|m| m.get(&next))
            .copied()
            .unwrap_or(0) as f64;
        ((count + 1.0) / (total + buckets)).log10()
    }
}

/// Per-language character n-gram models with shared order.
pub struct LanguageModelCharNgram {
    order: usize,
    models: BTreeMap<String, LangModel>,
}

impl LanguageModelCharNgram {
    /// Trains one model per `(language code, sample text)` pair.
    pub fn train(samples: &[(&str, &str)], order: usize) -> Result<Self, LangIdError> {
        if order < 1 {
            return Err(LangIdError::BadOrder(order));
        }
        if samples.len() < 2 {
            return Err(LangIdError::TooFewLanguages(samples.len()));
        }
        let mut models = BTreeMap::new();
        for (code, text) in samples {
            let mut transitions: HashMap<String, HashMap<char, u32>> = HashMap::new();
            let mut context_totals: HashMap<String, u32> = HashMap::new();
            let mut alphabet = HashSet::new();
            let mut seen = false;
            for line in text.lines() {
                let chars: Vec<char> = line.chars().collect();
                alphabet.extend(chars.iter().copied());
                if chars.len() < order {
                    continue;
                }
                for win in chars.windows(order) {
                    seen = true;
                    let context: String = win[..order - 1].iter().collect();
                    let next = win[order - 1];
                    *transitions.entry(context.clone()).or_default().entry(next).or_insert(0) +=
                        1;
                    *context_totals.entry(context).or_insert(0) += 1;
                }
            }
            if !seen {
                return Err(LangIdError::EmptySample(code.to_string()));
            }
            models.insert(
                code.to_string(),
                LangModel { transitions, context_totals, alphabet },
            );
        }
        Ok(LanguageModelCharNgram { order, models })
    }

    /// N-gram order shared by all language models.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Language codes in sorted order.
    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    /// Classifies one line.
    ///
    /// Returns the best language code and the margin (mean log10
    /// likelihood per n-gram of the best language minus the runner-up).
    /// Lines shorter than the order return `("unknown", 0.0)`.
    pub fn classify(&self, line: &str) -> (String, f64) {
        let chars: Vec<char> = line.chars().collect();
        if chars.len() < self.order {
            return (UNKNOWN_LANGUAGE.to_string(), 0.0);
        }
        let windows: Vec<(String, char)> = chars
            .windows(self.order)
            .map(|w| (w[..self.order - 1].iter().collect(), w[self.order - 1]))
            .collect();
        let n = windows.len() as f64;
        let mut scored: Vec<(&str, f64)> = self
            .models
            .iter()
            .map(|(code, model)| {
                let sum: f64 =
                    windows.iter().map(|(ctx, next)| model.log_prob(ctx, *next)).sum();
                (code.as_str(), sum / n)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        let margin = scored[0].1 - scored[1].1;
        (scored[0].0.to_string(), margin)
    }

    /// Shared trigram model trained on the bundled Turkish and English
    /// samples under `resources/`.
    pub fn builtin() -> &'static LanguageModelCharNgram {
        static MODEL: LazyLock<LanguageModelCharNgram> = LazyLock::new(|| {
            let tr = resource_sample(include_str!("../resources/lang_tr.txt"));
            let en = resource_sample(include_str!("../resources/lang_en.txt"));
            LanguageModelCharNgram::train(&[("tr", &tr), ("en", &en)], 3)
                .expect("bundled language samples are valid")
        });
        &MODEL
    }
}

/// Drops comment and blank lines from a bundled sample file.
fn resource_sample(raw: &str) -> String {
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}
