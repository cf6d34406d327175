//! ARPA text serialization for n-gram models.
//!
//! Layout: a `\data\` header declaring entry counts per order, one
//! `\N-grams:` section per order with tab-separated
//! `logprob<TAB>ngram<TAB>backoff` lines (the backoff column is omitted at
//! the top order), and a closing `\end\`. Probabilities are log10 printed to
//! six decimals; entries are sorted, so rendering is deterministic and
//! parse-then-render is byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{NGramError, NGramModel};

/// Render a model to an ARPA string.
pub fn render_arpa(model: &NGramModel) -> Result<String, NGramError> {
    if model.entries[0].is_empty() {
        return Err(NGramError::EmptyModel);
    }
    let mut out = String::new();
    out.push_str("\\data\\\n");
    for n in 1..=model.order {
        out.push_str(&format!("ngram {n}={}\n", model.entries[n - 1].len()));
    }
    for n in 1..=model.order {
        out.push_str(&format!("\n\\{n}-grams:\n"));
        for (ngram, (logprob, backoff)) in &model.entries[n - 1] {
            if n < model.order {
                out.push_str(&format!(
                    "{}\t{ngram}\t{}\n",
                    fmt6(*logprob),
                    fmt6(*backoff)
                ));
            } else {
                out.push_str(&format!("{}\t{ngram}\n", fmt6(*logprob)));
            }
        }
    }
    out.push_str("\n\\end\\\n");
    Ok(out)
}

/// Write a model to a file in ARPA format.
pub fn write_arpa(model: &NGramModel, path: &Path) -> Result<(), NGramError> {
    Ok(fs::write(path, render_arpa(model)?)?)
}

/// Read a model from an ARPA file.
pub fn read_arpa(path: &Path) -> Result<NGramModel, NGramError> {
    parse_arpa(&fs::read_to_string(path)?)
}

/// Six-decimal rendering with negative zero folded to zero.
fn fmt6(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.6}")
}

/// Parse an ARPA string, validating structure strictly: the header must
/// declare consecutive orders starting at 1, every declared section must be
/// present in order with exactly the declared number of well-formed entries,
/// and nothing may follow `\end\`.
pub fn parse_arpa(text: &str) -> Result<NGramModel, NGramError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut pos = 0usize;

    let next_line = |pos: &mut usize| -> Option<(usize, &str)> {
        while *pos < lines.len() && lines[*pos].trim().is_empty() {
            *pos += 1;
        }
        if *pos < lines.len() {
            let found = (*pos + 1, lines[*pos]);
            *pos += 1;
            Some(found)
        } else {
            None
        }
    };

    let eof = |reason: &str| NGramError::Malformed {
        line: lines.len() + 1,
        reason: format!("unexpected end of file, {reason}"),
    };

    let (line_no, line) = next_line(&mut pos).ok_or_else(|| eof("expected \\data\\"))?;
    if line.trim() != "\\data\\" {
        return Err(NGramError::Malformed {
            line: line_no,
            reason: format!("expected \\data\\ header, found `{line}`"),
        });
    }

    let mut declared: Vec<usize> = Vec::new();
    while pos < lines.len() && lines[pos].trim().starts_with("ngram ") {
        let line_no = pos + 1;
        let line = lines[pos].trim();
        pos += 1;
        let rest = line.strip_prefix("ngram ").expect("checked prefix");
        let (order_str, count_str) = rest.split_once('=').ok_or(NGramError::Malformed {
            line: line_no,
            reason: "count declaration must look like `ngram N=count`".to_string(),
        })?;
        let order: usize = order_str.trim().parse().map_err(|_| NGramError::Malformed {
            line: line_no,
            reason: format!("unparseable n-gram order `{order_str}`"),
        })?;
        let count: usize = count_str.trim().parse().map_err(|_| NGramError::Malformed {
            line: line_no,
            reason: format!("unparseable entry count `{count_str}`"),
        })?;
        if order != declared.len() + 1 {
            return Err(NGramError::Malformed {
                line: line_no,
                reason: format!(
                    "orders must be declared consecutively from 1, found {order} after {}",
                    declared.len()
                ),
            });
        }
        declared.push(count);
    }
    if declared.is_empty() {
        return Err(NGramError::Malformed {
            line: pos + 1,
            reason: "no `ngram N=count` declarations after \\data\\".to_string(),
        });
    }

    let order = declared.len();
    let mut entries: Vec<BTreeMap<String, (f64, f64)>> = vec![BTreeMap::new(); order];
    for n in 1..=order {
        let header = format!("\\{n}-grams:");
        let (line_no, line) =
            next_line(&mut pos).ok_or_else(|| eof(&format!("expected {header}")))?;
        if line.trim() != header {
            return Err(NGramError::Malformed {
                line: line_no,
                reason: format!("expected `{header}` section header, found `{line}`"),
            });
        }
        let mut found = 0usize;
        while pos < lines.len() && !lines[pos].trim().is_empty() && !lines[pos].starts_with('\\') {
            let line_no = pos + 1;
            let (ngram, value) = parse_entry(lines[pos], n, line_no)?;
            if entries[n - 1].insert(ngram.clone(), value).is_some() {
                return Err(NGramError::Malformed {
                    line: line_no,
                    reason: format!("duplicate {n}-gram `{ngram}`"),
                });
            }
            found += 1;
            pos += 1;
        }
        if found != declared[n - 1] {
            return Err(NGramError::CountMismatch {
                order: n,
                expected: declared[n - 1],
                found,
            });
        }
    }

    let (line_no, line) = next_line(&mut pos).ok_or_else(|| eof("expected \\end\\"))?;
    if line.trim() != "\\end\\" {
        return Err(NGramError::Malformed {
            line: line_no,
            reason: format!("expected \\end\\, found `{line}`"),
        });
    }
    if let Some((line_no, line)) = next_line(&mut pos) {
        return Err(NGramError::Malformed {
            line: line_no,
            reason: format!("content after \\end\\: `{line}`"),
        });
    }

    Ok(NGramModel { order, entries })
}

fn parse_entry(line: &str, n: usize, line_no: usize) -> Result<(String, (f64, f64)), NGramError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(NGramError::Malformed {
            line: line_no,
            reason: format!(
                "expected 2 or 3 tab-separated fields, found {}",
                fields.len()
            ),
        });
    }
    let parse_float = |field: &str, what: &str| -> Result<f64, NGramError> {
        let value: f64 = field.trim().parse().map_err(|_| NGramError::Malformed {
            line: line_no,
            reason: format!("unparseable {what} `{field}`"),
        })?;
        if !value.is_finite() {
            return Err(NGramError::Malformed {
                line: line_no,
                reason: format!("non-finite {what} `{field}`"),
            });
        }
        Ok(value)
    };
    let logprob = parse_float(fields[0], "log probability")?;
    let backoff = if fields.len() == 3 {
        parse_float(fields[2], "backoff weight")?
    } else {
        0.0
    };
    let tokens: Vec<&str> = fields[1].split(' ').filter(|t| !t.is_empty()).collect();
    if tokens.len() != n {
        return Err(NGramError::Malformed {
            line: line_no,
            reason: format!("entry has {} tokens in a {n}-gram section", tokens.len()),
        });
    }
    Ok((tokens.join(" "), (logprob, backoff)))
}

#[cfg(test)]
mod tests {
    use super::super::{train, Smoothing};
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn trained(order: usize) -> NGramModel {
        train(
            &[
                toks("kedi sütü içti ve kedi uyudu"),
                toks("köpek sütü içti ve köpek koştu"),
            ],
            order,
            Smoothing::KneserNey,
        )
        .unwrap()
    }

    #[test]
    fn rendering_uses_six_decimals_and_sorted_entries() {
        let text = render_arpa(&trained(2)).unwrap();
        assert!(text.starts_with("\\data\\\nngram 1=10\nngram 2=12\n"));
        assert!(text.lines().any(|l| l == "-99.000000\t<s>\t-0.146128"));
        assert!(text.lines().any(|l| l == "-0.624054\t<s> kedi"));
        assert!(text.ends_with("\n\\end\\\n"));
        let unigrams: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "\\1-grams:")
            .skip(1)
            .take(10)
            .map(|l| l.split('\t').nth(1).unwrap())
            .collect();
        let mut sorted = unigrams.clone();
        sorted.sort_unstable();
        assert_eq!(unigrams, sorted);
    }

    #[test]
    fn parse_then_render_is_byte_stable() {
        let text = render_arpa(&trained(3)).unwrap();
        let reparsed = parse_arpa(&text).unwrap();
        assert_eq!(render_arpa(&reparsed).unwrap(), text);
    }

    #[test]
    fn round_trip_preserves_entries_to_printed_precision() {
        let model = trained(3);
        let reparsed = parse_arpa(&render_arpa(&model).unwrap()).unwrap();
        assert_eq!(reparsed.order(), model.order());
        for n in 1..=model.order() {
            assert_eq!(reparsed.entry_count(n), model.entry_count(n));
            for (ngram, (logprob, backoff)) in &model.entries[n - 1] {
                let parts: Vec<&str> = ngram.split(' ').collect();
                let (p, b) = reparsed.entry(&parts).unwrap();
                assert!((p - logprob).abs() < 1e-6, "{ngram}: {p} vs {logprob}");
                assert!((b - backoff).abs() < 1e-6, "{ngram}: {b} vs {backoff}");
            }
        }
    }

    #[test]
    fn file_round_trip_through_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.arpa");
        let model = trained(2);
        write_arpa(&model, &path).unwrap();
        let reread = read_arpa(&path).unwrap();
        assert_eq!(render_arpa(&reread).unwrap(), render_arpa(&model).unwrap());
    }

    #[test]
    fn header_count_disagreement_names_the_mismatch() {
        let text = render_arpa(&trained(2)).unwrap();
        let tampered = text.replace("ngram 2=12", "ngram 2=13");
        match parse_arpa(&tampered).unwrap_err() {
            NGramError::CountMismatch {
                order,
                expected,
                found,
            } => {
                assert_eq!((order, expected, found), (2, 13, 12));
            }
            other => panic!("expected CountMismatch, got {other}"),
        }
    }

    #[test]
    fn malformed_input_is_rejected_with_line_numbers() {
        let missing_data = "ngram 1=1\n\\1-grams:\n-0.5\ta\n\\end\\\n";
        assert!(matches!(
            parse_arpa(missing_data).unwrap_err(),
            NGramError::Malformed { line: 1, .. }
        ));

        let text = render_arpa(&trained(2)).unwrap();
        let bad_section = text.replace("\\2-grams:", "\\2grams:");
        assert!(matches!(
            parse_arpa(&bad_section).unwrap_err(),
            NGramError::Malformed { .. }
        ));

        let bad_float = text.replace("-99.000000", "minus99");
        assert!(matches!(
            parse_arpa(&bad_float).unwrap_err(),
            NGramError::Malformed { .. }
        ));

        let truncated = text.replace("\\end\\\n", "");
        assert!(matches!(
            parse_arpa(&truncated).unwrap_err(),
            NGramError::Malformed { .. }
        ));

        let trailing = format!("{text}stray\n");
        assert!(matches!(
            parse_arpa(&trailing).unwrap_err(),
            NGramError::Malformed { .. }
        ));
    }

    #[test]
    fn duplicate_entries_and_token_arity_are_rejected() {
        let dup = "\\data\\\nngram 1=2\n\n\\1-grams:\n-0.5\ta\n-0.4\ta\n\n\\end\\\n";
        assert!(matches!(
            parse_arpa(dup).unwrap_err(),
            NGramError::Malformed { line: 6, .. }
        ));

        let arity = "\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\ta b\n\n\\end\\\n";
        assert!(matches!(
            parse_arpa(arity).unwrap_err(),
            NGramError::Malformed { line: 5, .. }
        ));
    }

    #[test]
    fn writing_a_model_without_unigrams_is_an_error() {
        let empty = NGramModel {
            order: 1,
            entries: vec![BTreeMap::new()],
        };
        assert!(matches!(
            render_arpa(&empty).unwrap_err(),
            NGramError::EmptyModel
        ));
    }
}
