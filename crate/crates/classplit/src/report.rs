//! CSV and markdown renderings of metrics, comparisons and diagnostics.

use std::fmt::Write;

use classplit_core::vgae::VgaeModel;
use classplit_core::{Matrix, MetricsReport};

/// Averages are printed with two decimals, matching the comparison tables.
pub fn fmt_avg(x: f64) -> String {
    format!("{x:.2}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `sub_class,methods,lcom,mpc` per sub-class, then `original` and
/// `average` summary rows.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("sub_class,methods,lcom,mpc\n");
    for s in &report.per_class {
        let _ = writeln!(out, "{},{},{},{}", s.index, s.methods.len(), s.lcom, s.mpc);
    }
    let n: usize = report.per_class.iter().map(|s| s.methods.len()).sum();
    let _ = writeln!(out, "original,{},{},{}", n, report.original.0, report.original.1);
    let k = report.per_class.len().max(1) as f64;
    let _ = writeln!(
        out,
        "average,{},{},{}",
        fmt_avg(n as f64 / k),
        fmt_avg(report.averages.0),
        fmt_avg(report.averages.1)
    );
    out
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Before/after table: original LCOM and MPC, number of splits, and the
/// per-sub-class values.
pub fn before_after_markdown(rows: &[(String, &MetricsReport)]) -> String {
    let mut out = String::from(
        "| Class | LCOM before | MPC before | #splits | LCOM after | MPC after |\n|---|---:|---:|---:|---|---|\n",
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            name,
            r.original.0,
            r.original.1,
            r.per_class.len(),
            join(r.per_class.iter().map(|s| s.lcom)),
            join(r.per_class.iter().map(|s| s.mpc)),
        );
    }
    out
}

pub fn before_after_csv(rows: &[(String, &MetricsReport)]) -> String {
    let mut out = String::from("class,lcom_before,mpc_before,splits,lcom_after,mpc_after\n");
    for (name, r) in rows {
        let lcoms = r.per_class.iter().map(|s| s.lcom.to_string()).collect::<Vec<_>>().join(";");
        let mpcs = r.per_class.iter().map(|s| s.mpc.to_string()).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(name),
            r.original.0,
            r.original.1,
            r.per_class.len(),
            lcoms,
            mpcs
        );
    }
    out
}

pub fn metrics_markdown(class_name: &str, report: &MetricsReport) -> String {
    let mut out = before_after_markdown(&[(class_name.to_string(), report)]);
    out.push_str("\n| Sub-class | Methods | LCOM | MPC |\n|---:|---|---:|---:|\n");
    for s in &report.per_class {
        let _ = writeln!(out, "| {} | {} | {} | {} |", s.index, join(&s.methods), s.lcom, s.mpc);
    }
    out
}

/// `epoch,loss` per training epoch.
pub fn trace_csv(model: &VgaeModel) -> String {
    let mut out = String::from("epoch,loss\n");
    for t in &model.training_trace {
        let _ = writeln!(out, "{},{}", t.epoch, t.loss);
    }
    out
}

/// Full-precision CSV of a dense matrix, no header.
pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.iter_rows() {
        out.push_str(&row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// One metric across classes (rows) and specs (columns). `None` cells are
/// failed runs. The lowest value in each row is the best.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub metric: String,
    pub classes: Vec<String>,
    pub specs: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl MetricTable {
    /// Column of the row minimum; ties go to the leftmost column.
    pub fn best(&self, row: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in self.cells[row].iter().enumerate() {
            if let Some(v) = *c {
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((j, v));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class");
        for s in &self.specs {
            out.push(',');
            out.push_str(&csv_field(s));
        }
        out.push_str(",best\n");
        for (i, class) in self.classes.iter().enumerate() {
            out.push_str(&csv_field(class));
            for c in &self.cells[i] {
                out.push(',');
                if let Some(v) = c {
                    out.push_str(&fmt_avg(*v));
                }
            }
            out.push(',');
            if let Some(b) = self.best(i) {
                out.push_str(&csv_field(&self.specs[b]));
            }
            out.push('\n');
        }
        out
    }

    /// Best cell per row in bold, failed cells as `n/a`.
    pub fn to_markdown(&self) -> String {
        let mut out = format!("| Class | {} |\n|---|", self.specs.join(" | "));
        out.push_str(&"---:|".repeat(self.specs.len()));
        out.push('\n');
        for (i, class) in self.classes.iter().enumerate() {
            let best = self.best(i);
            let cells: Vec<String> = self.cells[i]
                .iter()
                .enumerate()
                .map(|(j, c)| match c {
                    None => "n/a".into(),
                    Some(v) if best == Some(j) => format!("**{}**", fmt_avg(*v)),
                    Some(v) => fmt_avg(*v),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", class, cells.join(" | "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use classplit_core::metrics::SubClassMetrics;

    fn report() -> MetricsReport {
        MetricsReport {
            per_class: vec![
                SubClassMetrics {
                    index: 0,
                    methods: vec![0, 2],
                    lcom: 1,
                    mpc: 3,
                },
                SubClassMetrics {
                    index: 1,
                    methods: vec![1],
                    lcom: 0,
                    mpc: 2,
                },
            ],
            original: (4, 4),
            averages: (0.5, 2.5),
        }
    }

    #[test]
    fn metrics_csv_layout() {
        assert_eq!(
            metrics_csv(&report()),
            "sub_class,methods,lcom,mpc\n0,2,1,3\n1,1,0,2\noriginal,3,4,4\naverage,1.50,0.50,2.50\n"
        );
    }

    #[test]
    fn before_after_layout() {
        let r = report();
        let md = before_after_markdown(&[("Gantt".into(), &r)]);
        assert!(md.lines().nth(2).unwrap() == "| Gantt | 4 | 4 | 2 | 1, 0 | 3, 2 |");
        assert_eq!(
            before_after_csv(&[("Gantt".into(), &r)]).lines().nth(1).unwrap(),
            "Gantt,4,4,2,1;0,3;2"
        );
    }

    #[test]
    fn table_best_and_missing() {
        let t = MetricTable {
            metric: "lcom".into(),
            classes: vec!["A".into(), "B".into()],
            specs: vec!["WC+LSI".into(), "VGAE+LSI".into()],
            cells: vec![vec![Some(3.0), Some(1.0)], vec![None, Some(2.0)]],
        };
        assert_eq!(t.best(0), Some(1));
        assert_eq!(t.to_csv(), "class,WC+LSI,VGAE+LSI,best\nA,3.00,1.00,VGAE+LSI\nB,,2.00,VGAE+LSI\n");
        let md = t.to_markdown();
        assert!(md.contains("| A | 3.00 | **1.00** |"));
        assert!(md.contains("| B | n/a | **2.00** |"));
    }

    #[test]
    fn one_by_one_table() {
        let t = MetricTable {
            metric: "mpc".into(),
            classes: vec!["A".into()],
            specs: vec!["WC+LDA".into()],
            cells: vec![vec![Some(0.0)]],
        };
        assert_eq!(t.to_csv().lines().count(), 2);
    }
}
