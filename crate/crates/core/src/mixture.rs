//! Source-weighted corpus mixing and train/validation splitting.
//!
//! Each source carries a sampling weight (its share of the pretraining
//! mixture) and a train fraction (how much of it stays out of the held-out
//! split). Validation splits honor two floors at once: the source's
//! validation fraction and an absolute minimum token count, whichever
//! demands more documents. Mixture sampling draws a source from the weight
//! distribution for every document, cycling each source's stream when it
//! runs out.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Source};
use crate::text::count_tokens;

/// Validation token floor every source split must reach.
pub const MIN_VALIDATION_TOKENS: u64 = 100_000;

/// Errors from mixture specs, splitting, and sampling.
#[derive(Debug, thiserror::Error)]
pub enum MixtureError {
    /// The spec violated a structural rule.
    #[error("invalid mixture spec: {reason}")]
    InvalidSpec {
        /// Which rule was violated.
        reason: String,
    },
    /// A split input mixed documents from different sources.
    #[error("split input mixes sources: saw both {first} and {second}")]
    MixedSources {
        /// Source of the first document.
        first: Source,
        /// The other source encountered.
        second: Source,
    },
    /// A split input's source has no spec entry.
    #[error("mixture spec has no entry for source {0}")]
    MissingSource(Source),
    /// A positive-weight source has no documents to draw from.
    #[error("source {0} has positive weight but an empty stream")]
    EmptyStream(Source),
}

/// Weight and retention for one source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceMix {
    /// Probability of drawing this source per mixture example.
    pub weight: f64,
    /// Fraction of the source's documents kept for training.
    pub train_fraction: f64,
}

/// Mixture weights, per-source train fractions, and the validation floor.
///
/// Omitted fields deserialize to their defaults, so a config file can
/// override just the floor or just the source table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    /// Per-source weights and train fractions.
    #[serde(default = "default_sources")]
    pub sources: BTreeMap<Source, SourceMix>,
    /// Minimum validation tokens per source split.
    #[serde(default = "default_validation_floor")]
    pub min_validation_tokens: u64,
}

fn default_sources() -> BTreeMap<Source, SourceMix> {
    MixtureSpec::default().sources
}

fn default_validation_floor() -> u64 {
    MIN_VALIDATION_TOKENS
}

impl Default for MixtureSpec {
    fn default() -> Self {
        let sources = BTreeMap::from([
            (Source::Web, SourceMix { weight: 0.50, train_fraction: 0.9999 }),
            (Source::Yoktez, SourceMix { weight: 0.25, train_fraction: 0.99999 }),
            (Source::Dergipark, SourceMix { weight: 0.10, train_fraction: 0.9999 }),
            (Source::Book, SourceMix { weight: 0.10, train_fraction: 0.9997 }),
            (Source::Parlamint, SourceMix { weight: 0.03, train_fraction: 1333.0 / 1335.0 }),
            (Source::Bilkent, SourceMix { weight: 0.02, train_fraction: 8457.0 / 8630.0 }),
        ]);
        MixtureSpec {
            sources,
            min_validation_tokens: MIN_VALIDATION_TOKENS,
        }
    }
}

impl MixtureSpec {
    /// Check weight nonnegativity, unit weight sum (within 1e-9), and
    /// train fractions in [0, 1].
    pub fn validate(&self) -> Result<(), MixtureError> {
        let mut total = 0.0;
        for (source, mix) in &self.sources {
            if !(mix.weight >= 0.0) || !mix.weight.is_finite() {
                return Err(MixtureError::InvalidSpec {
                    reason: format!("{source} weight {} must be a nonnegative number", mix.weight),
                });
            }
            if !(0.0..=1.0).contains(&mix.train_fraction) {
                return Err(MixtureError::InvalidSpec {
                    reason: format!(
                        "{source} train fraction {} must lie in [0, 1]",
                        mix.train_fraction
                    ),
                });
            }
            total += mix.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(MixtureError::InvalidSpec {
                reason: format!("weights sum to {total}, expected 1"),
            });
        }
        Ok(())
    }
}

/// Result of one source's train/validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    /// Documents kept for training.
    pub train: Vec<Document>,
    /// Held-out documents.
    pub validation: Vec<Document>,
    /// True when the source was too small to satisfy the floors and the
    /// fallback (everything but one document held out) was applied.
    pub warning: bool,
}

/// Split one source's documents into train and validation sets.
///
/// Documents are shuffled with the generator, then moved into validation
/// until both the source's validation fraction and the spec's token floor
/// are satisfied. A source too small for the floors keeps one training
/// document, holds out the rest, and flags a warning.
pub fn split_train_validation<R: Rng>(
    docs: Vec<Document>,
    spec: &MixtureSpec,
    rng: &mut R,
) -> Result<SplitOutcome, MixtureError> {
    spec.validate()?;
    let Some(source) = docs.first().map(|doc| doc.source) else {
        return Ok(SplitOutcome { train: Vec::new(), validation: Vec::new(), warning: true });
    };
    if let Some(stray) = docs.iter().find(|doc| doc.source != source) {
        return Err(MixtureError::MixedSources {
            first: source,
            second: stray.source,
        });
    }
    let mix = spec
        .sources
        .get(&source)
        .ok_or(MixtureError::MissingSource(source))?;

    let validation_fraction = 1.0 - mix.train_fraction;
    // Back off a hair before ceiling so exact products (for example
    // fractions given as document ratios) do not round one document up.
    let count_floor = (docs.len() as f64 * validation_fraction - 1e-9).ceil().max(0.0) as usize;

    let mut pool = docs;
    pool.shuffle(rng);

    let mut validation: Vec<Document> = Vec::new();
    let mut validation_tokens = 0u64;
    while validation.len() < count_floor || validation_tokens < spec.min_validation_tokens {
        if pool.len() <= 1 {
            break;
        }
        let doc = pool.pop().expect("pool has more than one document");
        validation_tokens += count_tokens(&doc.text);
        validation.push(doc);
    }
    let warning =
        validation.len() < count_floor || validation_tokens < spec.min_validation_tokens;
    Ok(SplitOutcome {
        train: pool,
        validation,
        warning,
    })
}

/// Draw `n` items, selecting a source per draw from the spec weights and
/// taking that source's next item. Streams cycle on exhaustion. Items are
/// usually documents, but any per-source record type mixes the same way.
pub fn sample_mixture<T: Clone, R: Rng>(
    rng: &mut R,
    streams: &BTreeMap<Source, Vec<T>>,
    spec: &MixtureSpec,
    n: usize,
) -> Result<Vec<T>, MixtureError> {
    spec.validate()?;
    let weighted: Vec<(Source, f64)> = spec
        .sources
        .iter()
        .filter(|(_, mix)| mix.weight > 0.0)
        .map(|(source, mix)| (*source, mix.weight))
        .collect();
    for (source, _) in &weighted {
        if streams.get(source).is_none_or(|docs| docs.is_empty()) {
            return Err(MixtureError::EmptyStream(*source));
        }
    }
    let total: f64 = weighted.iter().map(|(_, weight)| weight).sum();

    let mut cursors: BTreeMap<Source, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u: f64 = rng.random::<f64>() * total;
        let mut chosen = weighted[weighted.len() - 1].0;
        for &(source, weight) in &weighted {
            if u < weight {
                chosen = source;
                break;
            }
            u -= weight;
        }
        let stream = &streams[&chosen];
        let cursor = cursors.entry(chosen).or_insert(0);
        out.push(stream[*cursor % stream.len()].clone());
        *cursor += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::compute_stats;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn docs_of(source: Source, count: usize, tokens_each: usize) -> Vec<Document> {
        (0..count)
            .map(|i| {
                let text = vec!["kelime"; tokens_each].join(" ");
                Document::new(format!("{source}-{i}"), source, text)
            })
            .collect()
    }

    #[test]
    fn default_spec_is_valid() {
        let spec = MixtureSpec::default();
        spec.validate().unwrap();
        let total: f64 = spec.sources.values().map(|m| m.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(spec.min_validation_tokens, 100_000);
        assert_eq!(spec.sources[&Source::Web].weight, 0.50);
        assert_eq!(spec.sources[&Source::Yoktez].train_fraction, 0.99999);
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Web).unwrap().weight = -0.1;
        assert!(matches!(spec.validate(), Err(MixtureError::InvalidSpec { .. })));

        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Web).unwrap().weight = 0.6;
        assert!(matches!(spec.validate(), Err(MixtureError::InvalidSpec { .. })));

        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Book).unwrap().train_fraction = 1.5;
        assert!(matches!(spec.validate(), Err(MixtureError::InvalidSpec { .. })));
    }

    #[test]
    fn token_floor_binds_on_the_uniform_fixture() {
        // 10,000 docs of 100 tokens; validation fraction 0.01 asks for 100
        // docs but the 100,000-token floor needs 1,000.
        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Web).unwrap().train_fraction = 0.99;
        let docs = docs_of(Source::Web, 10_000, 100);
        let outcome = split_train_validation(docs, &spec, &mut rng(1)).unwrap();
        assert_eq!(outcome.validation.len(), 1_000);
        assert_eq!(outcome.train.len(), 9_000);
        let stats = compute_stats(outcome.validation.iter());
        assert_eq!(stats.token_count, 100_000);
        assert!(!outcome.warning);
    }

    #[test]
    fn count_floor_binds_when_tokens_come_easily() {
        // 1,000 docs of 1,000 tokens; the token floor is met after 100
        // docs but the 0.2 validation fraction asks for 200.
        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Web).unwrap().train_fraction = 0.8;
        let docs = docs_of(Source::Web, 1_000, 1_000);
        let outcome = split_train_validation(docs, &spec, &mut rng(2)).unwrap();
        assert_eq!(outcome.validation.len(), 200);
        assert!(!outcome.warning);
    }

    #[test]
    fn tiny_corpus_falls_back_with_warning() {
        let docs = docs_of(Source::Book, 2, 10);
        let outcome = split_train_validation(docs, &MixtureSpec::default(), &mut rng(3)).unwrap();
        assert_eq!(outcome.validation.len(), 1);
        assert_eq!(outcome.train.len(), 1);
        assert!(outcome.warning);

        let outcome =
            split_train_validation(Vec::new(), &MixtureSpec::default(), &mut rng(3)).unwrap();
        assert!(outcome.train.is_empty());
        assert!(outcome.validation.is_empty());
        assert!(outcome.warning);
    }

    #[test]
    fn split_is_deterministic_and_partitions_the_corpus() {
        let docs = docs_of(Source::Dergipark, 500, 300);
        let spec = MixtureSpec::default();
        let a = split_train_validation(docs.clone(), &spec, &mut rng(7)).unwrap();
        let b = split_train_validation(docs.clone(), &spec, &mut rng(7)).unwrap();
        assert_eq!(a, b);

        let total = compute_stats(docs.iter());
        let split_total = compute_stats(a.train.iter()) + compute_stats(a.validation.iter());
        assert_eq!(total, split_total);

        let mut ids: Vec<&str> = a
            .train
            .iter()
            .chain(a.validation.iter())
            .map(|doc| doc.id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), docs.len());
    }

    #[test]
    fn mixed_source_input_is_rejected() {
        let mut docs = docs_of(Source::Web, 3, 10);
        docs.push(Document::new("stray", Source::Book, "bir iki"));
        let err = split_train_validation(docs, &MixtureSpec::default(), &mut rng(0));
        assert!(matches!(
            err,
            Err(MixtureError::MixedSources { first: Source::Web, second: Source::Book })
        ));
    }

    fn all_streams(count: usize, tokens_each: usize) -> BTreeMap<Source, Vec<Document>> {
        Source::ALL
            .into_iter()
            .map(|source| (source, docs_of(source, count, tokens_each)))
            .collect()
    }

    #[test]
    fn degenerate_weights_draw_one_source() {
        let mut spec = MixtureSpec::default();
        for mix in spec.sources.values_mut() {
            mix.weight = 0.0;
        }
        spec.sources.get_mut(&Source::Book).unwrap().weight = 1.0;
        let streams = all_streams(5, 3);
        let out = sample_mixture(&mut rng(9), &streams, &spec, 50).unwrap();
        assert_eq!(out.len(), 50);
        assert!(out.iter().all(|doc| doc.source == Source::Book));
    }

    #[test]
    fn empirical_fractions_track_the_weights() {
        let spec = MixtureSpec::default();
        let streams = all_streams(17, 2);
        let out = sample_mixture(&mut rng(11), &streams, &spec, 100_000).unwrap();
        for (source, mix) in &spec.sources {
            let fraction = out.iter().filter(|doc| doc.source == *source).count() as f64
                / out.len() as f64;
            assert!(
                (fraction - mix.weight).abs() <= 0.01,
                "{source}: {fraction} vs {}",
                mix.weight
            );
        }
    }

    #[test]
    fn empty_positive_weight_stream_is_named() {
        let spec = MixtureSpec::default();
        let mut streams = all_streams(4, 2);
        streams.get_mut(&Source::Yoktez).unwrap().clear();
        let err = sample_mixture(&mut rng(0), &streams, &spec, 10);
        assert!(matches!(err, Err(MixtureError::EmptyStream(Source::Yoktez))));

        // Zero-weight sources may be empty or absent.
        let mut spec = MixtureSpec::default();
        spec.sources.get_mut(&Source::Yoktez).unwrap().weight = 0.0;
        spec.sources.get_mut(&Source::Web).unwrap().weight = 0.75;
        let mut streams = all_streams(4, 2);
        streams.remove(&Source::Yoktez);
        assert!(sample_mixture(&mut rng(0), &streams, &spec, 10).is_ok());
    }

    #[test]
    fn zero_draws_give_empty_output() {
        let out =
            sample_mixture(&mut rng(0), &all_streams(3, 2), &MixtureSpec::default(), 0).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn streams_cycle_on_exhaustion() {
        let mut spec = MixtureSpec::default();
        for mix in spec.sources.values_mut() {
            mix.weight = 0.0;
        }
        spec.sources.get_mut(&Source::Web).unwrap().weight = 1.0;
        let streams = all_streams(2, 2);
        let out = sample_mixture(&mut rng(4), &streams, &spec, 5).unwrap();
        let ids: Vec<&str> = out.iter().map(|doc| doc.id.as_str()).collect();
        assert_eq!(ids, vec!["web-0", "web-1", "web-0", "web-1", "web-0"]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = MixtureSpec::default();
        let streams = all_streams(6, 2);
        let a = sample_mixture(&mut rng(21), &streams, &spec, 1_000).unwrap();
        let b = sample_mixture(&mut rng(21), &streams, &spec, 1_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_weight_sources_are_exchangeable() {
        // Book and Dergipark share weight 0.10 in the default spec; swapping
        // their streams must swap their documents in the output, position
        // by position.
        let spec = MixtureSpec::default();
        let streams = all_streams(4, 2);
        let mut swapped = streams.clone();
        let book = swapped[&Source::Book].clone();
        let dergipark = swapped[&Source::Dergipark].clone();
        swapped.insert(Source::Book, dergipark);
        swapped.insert(Source::Dergipark, book);

        let base = sample_mixture(&mut rng(33), &streams, &spec, 2_000).unwrap();
        let other = sample_mixture(&mut rng(33), &swapped, &spec, 2_000).unwrap();
        for (a, b) in base.iter().zip(&other) {
            match a.source {
                Source::Book => assert_eq!(b.source, Source::Dergipark),
                Source::Dergipark => assert_eq!(b.source, Source::Book),
                _ => assert_eq!(a, b),
            }
        }
    }
}
