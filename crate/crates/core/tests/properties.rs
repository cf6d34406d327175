//! Randomized cross-module invariants.

use std::collections::BTreeMap;

use corpusprep::corpus::{compute_stats, read_documents, write_documents, Document, Source};
use corpusprep::denoise::{make_example, reconstruct, DenoiseOptions};
use corpusprep::langid::LanguageModelCharNgram;
use corpusprep::linefilter::{filter_document, FilterConfig};
use corpusprep::metrics::{bleu, meteor_exact, rouge_l, rouge_n, weighted_prf};
use corpusprep::mixture::{split_train_validation, MixtureSpec};
use corpusprep::ngram::{percentile_threshold, train, Smoothing};
use corpusprep::tokenizer::{parse_vocab, TokenizerVocab};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn denoise_vocab() -> TokenizerVocab {
    let mut text = String::from("<unk>\t-1\n");
    for i in 1..40 {
        text.push_str(&format!("p{i}\t-1\n"));
    }
    text.push_str("[NLU]\t-1\n[S2S]\t-1\n[NLG]\t-1\n");
    parse_vocab(&text).unwrap().extend_sentinels(192).unwrap()
}

fn word() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["ev", "kedi", "süt", "okul", "ve", "bir", "çok"])
}

fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec(word().prop_map(str::to_string), 1..8),
        1..6,
    )
}

proptest! {
    #[test]
    fn reconstruct_inverts_random_examples(
        tokens in prop::collection::vec(1u32..40, 8..600),
        seed in any::<u64>(),
    ) {
        let vocab = denoise_vocab();
        let options = DenoiseOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let example = make_example(&mut rng, &tokens, &vocab, &options).unwrap();
        let rebuilt = reconstruct(&example.input_ids, &example.target_ids, &vocab).unwrap();
        let window = &tokens[..tokens.len().min(options.seq_len - 1)];
        prop_assert_eq!(rebuilt.as_slice(), window);
        prop_assert!(example.input_ids.len() <= options.seq_len);
        prop_assert!(example.target_ids.len() <= options.seq_len);
    }

    #[test]
    fn mle_logprobs_are_count_ratios(corpus in sentences(), order in 1usize..=3) {
        let model = train(&corpus, order, Smoothing::Mle).unwrap();
        // Direct window counts, no padding, mirroring the trainer's input.
        let mut counts: Vec<BTreeMap<Vec<&str>, u64>> = vec![BTreeMap::new(); order];
        for sentence in &corpus {
            for n in 1..=order {
                for window in sentence.windows(n) {
                    let key: Vec<&str> = window.iter().map(String::as_str).collect();
                    *counts[n - 1].entry(key).or_insert(0) += 1;
                }
            }
        }
        for table in &counts {
            for (ngram, count) in table {
                let context = &ngram[..ngram.len() - 1];
                let total: u64 = table
                    .iter()
                    .filter(|(other, _)| &other[..other.len() - 1] == context)
                    .map(|(_, c)| *c)
                    .sum();
                let expected = (*count as f64 / total as f64).log10();
                let (logprob, backoff) = model.entry(ngram).expect("observed n-gram");
                prop_assert_eq!(logprob, expected);
                prop_assert_eq!(backoff, 0.0);
            }
        }
    }

    #[test]
    fn kneser_ney_contexts_sum_to_one(corpus in sentences(), order in 1usize..=3) {
        let model = train(&corpus, order, Smoothing::KneserNey).unwrap();
        let vocab = model.prediction_vocab();
        let mass: f64 = vocab.iter().map(|w| 10f64.powf(model.logprob(&[], w))).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9, "unigram mass {mass}");
    }

    #[test]
    fn corpus_stats_add_associatively(
        texts_a in prop::collection::vec("[a-zç ]{0,40}", 0..6),
        texts_b in prop::collection::vec("[a-zç ]{0,40}", 0..6),
    ) {
        let docs = |texts: &[String], tag: &str| -> Vec<Document> {
            texts
                .iter()
                .enumerate()
                .map(|(i, text)| Document::new(format!("{tag}-{i}"), Source::Web, text.clone()))
                .collect()
        };
        let a = docs(&texts_a, "a");
        let b = docs(&texts_b, "b");
        let joint = compute_stats(a.iter().chain(b.iter()));
        prop_assert_eq!(joint, compute_stats(a.iter()) + compute_stats(b.iter()));
    }

    #[test]
    fn documents_round_trip_through_jsonl(
        texts in prop::collection::vec("[a-zçğıöşü .,\n-]{0,60}", 1..8),
        scores in prop::collection::vec(prop::option::of(-5.0f64..0.0), 1..8),
    ) {
        let docs: Vec<Document> = texts
            .iter()
            .zip(&scores)
            .enumerate()
            .map(|(i, (text, score))| {
                let mut doc = Document::new(format!("d{i}"), Source::ALL[i % 6], text.clone());
                doc.meta.insert("k".into(), format!("v{i}"));
                doc.lm_score = *score;
                doc
            })
            .collect();
        let mut buffer = Vec::new();
        write_documents(&mut buffer, docs.iter()).unwrap();
        let back: Vec<Document> =
            read_documents(buffer.as_slice()).collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, docs);
    }

    #[test]
    fn line_filtering_is_idempotent(text in "[a-zçğıöşü .,!?\n]{0,200}") {
        let doc = Document::new("d", Source::Web, text);
        let config = FilterConfig::default();
        let lang = LanguageModelCharNgram::builtin();
        let (once, _) = filter_document(&doc, &config, lang);
        let (twice, _) = filter_document(&once, &config, lang);
        prop_assert_eq!(twice.text, once.text);
    }

    #[test]
    fn percentile_threshold_ignores_order(
        mut scores in prop::collection::vec(-100.0f64..0.0, 1..50),
        pct in 1.0f64..=100.0,
        seed in any::<u64>(),
    ) {
        let baseline = percentile_threshold(&scores, pct).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        scores.shuffle(&mut rng);
        prop_assert_eq!(percentile_threshold(&scores, pct).unwrap(), baseline);
    }

    #[test]
    fn weighted_recall_is_accuracy(
        gold in prop::collection::vec(0u8..4, 1..60),
        pred_seed in prop::collection::vec(0u8..4, 1..60),
    ) {
        let n = gold.len().min(pred_seed.len());
        let (prf, accuracy) = weighted_prf(&gold[..n], &pred_seed[..n]).unwrap();
        prop_assert_eq!(prf.recall, accuracy);
    }

    #[test]
    fn sequence_metrics_ignore_relabeling(
        candidate in prop::collection::vec(0u8..6, 1..12),
        reference in prop::collection::vec(0u8..6, 1..12),
    ) {
        let name = |t: &u8| format!("tok{t}");
        let cand_names: Vec<String> = candidate.iter().map(name).collect();
        let ref_names: Vec<String> = reference.iter().map(name).collect();

        for n in 1..=2 {
            prop_assert_eq!(
                rouge_n(&candidate, &reference, n),
                rouge_n(&cand_names, &ref_names, n)
            );
        }
        prop_assert_eq!(rouge_l(&candidate, &reference), rouge_l(&cand_names, &ref_names));
        prop_assert_eq!(
            meteor_exact(&candidate, &reference),
            meteor_exact(&cand_names, &ref_names)
        );
        prop_assert_eq!(
            bleu(&[candidate.clone()], &[reference.clone()]).unwrap(),
            bleu(&[cand_names], &[ref_names]).unwrap()
        );
    }

    #[test]
    fn splits_partition_documents_and_tokens(
        token_counts in prop::collection::vec(1usize..40, 2..60),
        seed in any::<u64>(),
    ) {
        let docs: Vec<Document> = token_counts
            .iter()
            .enumerate()
            .map(|(i, count)| {
                Document::new(format!("d{i}"), Source::Book, vec!["söz"; *count].join(" "))
            })
            .collect();
        let total = compute_stats(docs.iter());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcome = split_train_validation(docs.clone(), &MixtureSpec::default(), &mut rng).unwrap();
        let split_total =
            compute_stats(outcome.train.iter()) + compute_stats(outcome.validation.iter());
        prop_assert_eq!(split_total, total);
        let mut ids: Vec<&str> = outcome
            .train
            .iter()
            .chain(outcome.validation.iter())
            .map(|d| d.id.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        prop_assert_eq!(ids.len(), docs.len());
    }
}
