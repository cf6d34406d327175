//! Shared text helpers: whitespace tokenization, Turkish-aware case
//! folding, and sentence splitting.

/// Maximal runs of non-whitespace characters.
pub fn whitespace_tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Number of whitespace tokens in `s` without collecting them.
pub fn count_tokens(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

/// Lowercases with the Turkish i convention: 'İ' folds to 'i' and 'I' to
/// 'ı'. Plain `to_lowercase` maps 'İ' to "i\u{307}", which breaks exact
/// comparison against keyword lists.
pub fn fold_turkish(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'İ' => out.push('i'),
            'I' => out.push('ı'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

const TERMINALS: [char; 4] = ['.', '!', '?', '…'];

/// Splits text into sentences on newlines and on terminal punctuation
/// followed by whitespace or end of line. The terminal character stays
/// attached to its sentence. Empty sentences are dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.split('\n') {
        let mut start = 0;
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if TERMINALS.contains(&c) {
                let at_boundary = match chars.peek() {
                    Some((_, next)) => next.is_whitespace(),
                    None => true,
                };
                if at_boundary {
                    let end = i + c.len_utf8();
                    let sent = line[start..end].trim();
                    if !sent.is_empty() {
                        out.push(sent);
                    }
                    start = end;
                }
            }
        }
        let tail = line[start..].trim();
        if !tail.is_empty() {
            out.push(tail);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_split_on_any_whitespace() {
        assert_eq!(whitespace_tokens("ab  cd\tef"), vec!["ab", "cd", "ef"]);
        assert_eq!(whitespace_tokens("  "), Vec::<&str>::new());
        assert_eq!(count_tokens("a b c"), 3);
    }

    #[test]
    fn turkish_fold_handles_dotted_and_dotless_i() {
        assert_eq!(fold_turkish("DİPNOTLAR"), "dipnotlar");
        assert_eq!(fold_turkish("IŞIK"), "ışık");
        assert_eq!(fold_turkish("KAYNAKÇA"), "kaynakça");
        assert_eq!(fold_turkish("İÇİNDEKİLER"), "içindekiler");
    }

    #[test]
    fn sentences_split_on_terminals_and_newlines() {
        assert_eq!(
            split_sentences("Kedi uyudu. Köpek koştu!\nKuş uçtu"),
            vec!["Kedi uyudu.", "Köpek koştu!", "Kuş uçtu"]
        );
    }

    #[test]
    fn decimal_points_do_not_split() {
        assert_eq!(split_sentences("oran 3.5 oldu."), vec!["oran 3.5 oldu."]);
    }

    #[test]
    fn empty_text_has_no_sentences() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("\n\n").is_empty());
    }
}
