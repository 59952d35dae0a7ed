//! TSV and Markdown rendering of report rows.

use serde::{Deserialize, Serialize};

use super::{Cell, MetricReport, COLUMNS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub setting: String,
    pub model: String,
    pub metrics: MetricReport,
}

/// Four decimals; negative zero prints as `0.0000`.
pub fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Value(v) => {
            let s = format!("{v:.4}");
            if s == "-0.0000" {
                "0.0000".into()
            } else {
                s
            }
        }
        Cell::Skipped(r) => format!("skipped:{r}"),
    }
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["Setting", "Model"];
    h.extend(COLUMNS);
    h
}

fn fields(row: &ReportRow) -> Vec<String> {
    let clean = |s: &str| s.replace(['\t', '\n', '|'], " ");
    let mut f = vec![clean(&row.setting), clean(&row.model)];
    f.extend(row.metrics.cells().iter().map(|c| format_cell(c)));
    f
}

pub fn render_tsv(rows: &[ReportRow]) -> String {
    let mut out = header().join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&fields(r).join("\t"));
        out.push('\n');
    }
    out
}

pub fn render_markdown(rows: &[ReportRow]) -> String {
    let h = header();
    let mut out = format!("| {} |\n", h.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(h.len())));
    for r in rows {
        out.push_str(&format!("| {} |\n", fields(r).join(" | ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        let mut cells: [Cell; 14] = std::array::from_fn(|k| Cell::Value(k as f64 / 3.0));
        cells[9] = Cell::skipped("no-scorer");
        cells[12] = Cell::Value(-0.00001);
        ReportRow {
            setting: "Emotion".into(),
            model: "mock:template".into(),
            metrics: MetricReport::from_cells(cells),
        }
    }

    #[test]
    fn tsv_layout() {
        let t = render_tsv(&[row()]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(
            lines[0],
            "Setting\tModel\tR1\tR2\tRL\tB1\tB2\tBL\tBS\tFRES\tCLRS\tPS\tMeS\tMoS\tVS\tCR"
        );
        let f: Vec<&str> = lines[1].split('\t').collect();
        assert_eq!(f.len(), 16);
        assert_eq!(f[3], "0.3333");
        assert_eq!(f[11], "skipped:no-scorer");
        assert_eq!(f[14], "0.0000");
    }

    #[test]
    fn markdown_layout() {
        let m = render_markdown(&[row()]);
        let lines: Vec<&str> = m.lines().collect();
        assert!(lines[0].starts_with("| Setting | Model | R1 | R2 | RL |"));
        assert_eq!(lines[1].matches("---|").count(), 16);
        assert!(lines[2].contains("| skipped:no-scorer |"));
    }
}
