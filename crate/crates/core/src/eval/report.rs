use super::{MeanStd, SeedAggregate};
use crate::nn::Variant;

/// Seed aggregates of one word for each trained variant.
#[derive(Debug, Clone, PartialEq)]
pub struct WordAggregates {
    pub word_id: String,
    pub gloss: String,
    pub results: Vec<(Variant, SeedAggregate)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub csv: String,
    pub markdown: String,
}

/// Percent cell with one decimal for both parts, e.g. `85.5 ± 3.3`.
pub fn format_cell(s: MeanStd) -> String {
    format!("{:.1} ± {:.1}", s.mean * 100.0, s.std * 100.0)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str =
    "word_id,word_gloss,variant,f1_mean,f1_std,acc_mean,acc_std,prec_mean,prec_std,rec_mean,rec_std";

/// Renders the CSV (fractions) and the two text tables (percentages).
/// Rows keep the order of `words`; variant columns follow [`Variant::ALL`].
pub fn render_report(words: &[WordAggregates]) -> Report {
    let mut csv = format!("{CSV_HEADER}\n");
    for w in words {
        for (variant, a) in &w.results {
            let cells = [a.f1, a.accuracy, a.precision, a.recall]
                .iter()
                .map(|m| format!("{},{}", m.mean, m.std))
                .collect::<Vec<_>>()
                .join(",");
            csv.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&w.word_id),
                csv_field(&w.gloss),
                variant.as_str(),
                cells
            ));
        }
    }

    let variants: Vec<Variant> = Variant::ALL
        .into_iter()
        .filter(|v| words.iter().any(|w| w.results.iter().any(|(x, _)| x == v)))
        .collect();
    let table = |title: &str,
                 first: (&str, fn(&SeedAggregate) -> MeanStd),
                 second: (&str, fn(&SeedAggregate) -> MeanStd)| {
        let mut header = vec!["Word".to_string()];
        for v in &variants {
            header.push(format!("{} {} (%)", v.display_name(), first.0));
            header.push(format!("{} {} (%)", v.display_name(), second.0));
        }
        let rows: Vec<Vec<String>> = words
            .iter()
            .map(|w| {
                let mut row = vec![w.gloss.clone()];
                for v in &variants {
                    match w.results.iter().find(|(x, _)| x == v) {
                        Some((_, a)) => {
                            row.push(format_cell(first.1(a)));
                            row.push(format_cell(second.1(a)));
                        }
                        None => row.extend(["-".to_string(), "-".to_string()]),
                    }
                }
                row
            })
            .collect();
        format!("## {title}\n\n{}", aligned_table(&header, &rows))
    };

    let markdown = format!(
        "{}\n{}",
        table(
            "Table I. Average F1 (%) and accuracy (%) with standard deviation",
            ("F1", |a| a.f1),
            ("Accuracy", |a| a.accuracy),
        ),
        table(
            "Table II. Average precision (%) and recall (%) with standard deviation",
            ("Precision", |a| a.precision),
            ("Recall", |a| a.recall),
        ),
    );
    Report { csv, markdown }
}

fn aligned_table(header: &[String], rows: &[Vec<String>]) -> String {
    let width = |s: &str| s.chars().count();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| width(&r[c]))
                .chain([width(&header[c]), 3])
                .max()
                .unwrap_or(3)
        })
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - width(c))))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}
