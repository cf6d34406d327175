//! Synthetic corpus fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use corpusprep::corpus::{write_documents, Document, Source};
use corpusprep::rng::stage_rng;
use rand::{Rng, RngExt};

/// Word bank matching the built-in language model's training language.
pub const WORDS: &[&str] = &[
    "sabah", "erkenden", "kalkıp", "pencereyi", "açtım", "serin", "havayı", "içime", "çektim",
    "kitaplığın", "üst", "rafında", "eski", "bir", "sözlük", "duruyordu", "çocuklar", "bahçede",
    "top", "oynarken", "komşular", "balkondan", "onları", "izliyordu", "deniz", "kenarında",
    "yürümek", "insanı", "dinlendirir", "akşam", "yemeğinden", "sonra", "ailecek", "çay",
    "içtik", "çalışmada", "yöntem", "olarak", "nitel", "araştırma", "deseni", "kullanılmıştır",
    "sonuçlar", "tablo", "halinde", "sunulmuş", "tartışılmıştır", "öğrenciler", "sınav",
    "haftasında", "kütüphanede", "uzun", "saatler", "geçirdi", "yazar", "romanın", "ikinci",
    "bölümünde", "kahramanın", "çocukluğunu", "anlatır", "meclis", "oturumunda", "yeni",
    "yasa", "tasarısı", "görüşüldü",
];

/// One sentence of `lo..=hi` bank words, capitalized and dotted.
pub fn sentence<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    let mut words: Vec<&str> = (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
    let mut out = String::new();
    let first = words.remove(0);
    let mut chars = first.chars();
    if let Some(c) = chars.next() {
        out.extend(c.to_uppercase());
        out.push_str(chars.as_str());
    }
    for word in words {
        out.push(' ');
        out.push_str(word);
    }
    out.push('.');
    out
}

/// A paragraph line of `n` sentences.
pub fn paragraph<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| sentence(rng, 6, 14)).collect::<Vec<_>>().join(" ")
}

/// A multi-line document body, occasionally salted with noise the
/// cleaners are expected to remove: mojibake, stray numeric lines, or an
/// off-language line.
pub fn noisy_text<R: Rng>(rng: &mut R, lines: usize) -> String {
    let mut out: Vec<String> = Vec::new();
    for _ in 0..lines {
        let sentences = rng.random_range(1..=3);
        let mut line = paragraph(rng, sentences);
        if rng.random_bool(0.15) {
            line = line.replacen("fi", "\u{fb01}", 1).replacen("ı", "ý", 1);
        }
        out.push(line);
        if rng.random_bool(0.1) {
            out.push(format!("{}", rng.random_range(10..999)));
        }
        if rng.random_bool(0.05) {
            out.push("The committee reviewed the annual report in detail.".to_string());
        }
    }
    out.join("\n")
}

/// `n` documents for one source, deterministically derived from `seed`.
pub fn source_docs(source: Source, n: usize, seed: u64) -> Vec<Document> {
    let mut rng = stage_rng(seed, "fixture", source as u64);
    (0..n)
        .map(|i| {
            let lines = rng.random_range(3..=8);
            Document::new(format!("{source}-{i:04}"), source, noisy_text(&mut rng, lines))
        })
        .collect()
}

/// Write documents as a JSONL corpus file.
pub fn write_corpus(path: &Path, docs: &[Document]) {
    let file = BufWriter::new(File::create(path).unwrap());
    write_documents(file, docs.iter()).unwrap();
}

/// A six-source fixture of exactly 1,000 documents under `dir`.
pub fn standard_fixture(dir: &Path, seed: u64) -> BTreeMap<Source, PathBuf> {
    let counts = [
        (Source::Web, 300),
        (Source::Dergipark, 150),
        (Source::Yoktez, 150),
        (Source::Book, 150),
        (Source::Bilkent, 125),
        (Source::Parlamint, 125),
    ];
    counts
        .into_iter()
        .map(|(source, n)| {
            let path = dir.join(format!("{source}.jsonl"));
            write_corpus(&path, &source_docs(source, n, seed));
            (source, path)
        })
        .collect()
}

/// Write a pipeline config pointing at `inputs`, with a validation floor
/// small enough for fixture-sized sources.
pub fn fixture_config(
    path: &Path,
    inputs: &BTreeMap<Source, PathBuf>,
    out_dir: &Path,
    seed: u64,
) {
    let mut toml = format!("seed = {seed}\nout_dir = {:?}\n\n[inputs]\n", out_dir.display());
    for (source, input) in inputs {
        toml.push_str(&format!("{source} = {:?}\n", input.display()));
    }
    toml.push_str("\n[mixture]\nmin_validation_tokens = 300\n");
    std::fs::write(path, toml).unwrap();
}
