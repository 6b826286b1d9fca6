//! Plain-text result tables, one row per method, IoU values in percent.

use serde::{Deserialize, Serialize};

use super::iou::miou;
use super::EvalReport;
use crate::imaging::ClassTaxonomy;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    /// Percent IoU per taxonomy class, in taxonomy order.
    pub per_class: Vec<Option<f64>>,
    pub miou: Option<f64>,
}

impl TableRow {
    /// A row from per-class percentages; the mIoU is their mean.
    pub fn from_values(method: &str, per_class: Vec<Option<f64>>) -> Self {
        let miou = miou(per_class.iter()).ok();
        Self {
            method: method.to_string(),
            per_class,
            miou,
        }
    }
}

impl From<&EvalReport> for TableRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            method: r.method.clone(),
            per_class: r.classes.iter().map(|c| c.iou.map(|v| 100.0 * v)).collect(),
            miou: r.miou.map(|v| 100.0 * v),
        }
    }
}

fn heading(name: &str) -> String {
    let spaced = name.replace('_', " ");
    let mut chars = spaced.chars();
    match chars.next() {
        Some(f) => f.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

/// Aligned table with a method column, one column per class and a final
/// mIoU column.
pub fn render_table(rows: &[TableRow], taxonomy: &ClassTaxonomy) -> String {
    let mut header: Vec<String> = vec!["Method".into()];
    header.extend(taxonomy.classes.iter().map(|c| heading(&c.name)));
    header.push("mIoU".into());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut line = vec![r.method.clone()];
            line.extend((0..taxonomy.classes.len()).map(|i| cell(r.per_class.get(i).copied().flatten())));
            line.push(cell(r.miou));
            line
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            body.iter()
                .map(|l| l[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let fmt = |line: &[String]| {
        line.iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 {
                    format!("{s:<w$}", w = widths[i])
                } else {
                    format!("{s:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = fmt(&header);
    out.push('\n');
    out.push_str(&"-".repeat(out.len() - 1));
    out.push('\n');
    for l in &body {
        out.push_str(&fmt(l));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_cells() {
        let row = TableRow::from_values("LT", vec![Some(50.0), None, Some(100.0), None, None, None]);
        assert_eq!(row.miou, Some(75.0));
        let t = render_table(&[row], &ClassTaxonomy::default());
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["Method", "Film", "Basket", "Cardboard", "Video", "tape", "Filament", "Trash", "bag", "mIoU"]
        );
        assert!(lines[2].starts_with("LT"));
        assert!(lines[2].ends_with("75.0"));
        assert!(lines[2].contains(" - "));
    }
}
