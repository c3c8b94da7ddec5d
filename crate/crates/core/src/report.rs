//! CSV report files.
//!
//! | file              | one line per                                   |
//! |-------------------|------------------------------------------------|
//! | `runs.csv`        | analyzed run, in run-id order                  |
//! | `comparisons.csv` | split × scope comparison                       |
//! | `histogram.csv`   | split × group × scope × normalized-entropy bin |
//! | `ascension.csv`   | ascension level with at least one scored run   |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::RunAnalysis;
use crate::stats::{collect_groups, ComparisonRow, Metric, Scope, Split};

pub const HISTOGRAM_BINS: usize = 10;

pub const RUNS_FILE: &str = "runs.csv";
pub const COMPARISONS_FILE: &str = "comparisons.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const ASCENSION_FILE: &str = "ascension.csv";

/// Writes all four report files into `dir`, creating it if needed. Returns
/// the written paths.
pub fn emit_report(dir: &Path, rows: &[RunAnalysis], comparisons: &[ComparisonRow]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sorted: Vec<&RunAnalysis> = rows.iter().collect();
    sorted.sort_by_key(|r| r.run_id);
    let files = [
        (RUNS_FILE, runs_table(&sorted)),
        (COMPARISONS_FILE, comparisons_table(comparisons)),
        (HISTOGRAM_FILE, histogram_table(rows)),
        (ASCENSION_FILE, ascension_table(rows)),
    ];
    let mut written = Vec::new();
    for (name, table) in files {
        let path = dir.join(name);
        write_csv(&path, &table)?;
        written.push(path);
    }
    Ok(written)
}

type Table = Vec<Vec<String>>;

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for record in table {
        writer.write_record(record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

const ACT_FIELDS: [&str; 8] = [
    "length",
    "total",
    "min",
    "max",
    "normalized",
    "per_step",
    "degenerate",
    "complete",
];

fn runs_table(rows: &[&RunAnalysis]) -> Table {
    let mut head = header(&[
        "run_id",
        "seed",
        "victory",
        "ascension",
        "discarded",
        "ambiguous",
        "acts_entered",
    ]);
    for act in 1..=3 {
        head.extend(ACT_FIELDS.iter().map(|f| format!("act{act}_{f}")));
    }
    head.extend(header(&["avg_normalized", "avg_per_step"]));
    let mut table = vec![head];
    for row in rows {
        let mut line = vec![
            row.run_id.to_string(),
            row.seed.clone(),
            row.victory.to_string(),
            row.ascension.to_string(),
            row.discarded.map(|d| d.as_str().to_string()).unwrap_or_default(),
            row.ambiguous.to_string(),
            row.per_act.len().to_string(),
        ];
        for act in 1..=3 {
            match row.act(act) {
                Some(r) => line.extend([
                    r.path_length.to_string(),
                    num(r.total),
                    num(r.min_possible),
                    num(r.max_possible),
                    num(r.normalized),
                    num(r.per_step),
                    r.degenerate.to_string(),
                    r.complete.to_string(),
                ]),
                None => line.extend(std::iter::repeat_n(String::new(), ACT_FIELDS.len())),
            }
        }
        line.push(opt(row.avg_normalized));
        line.push(opt(row.avg_per_step));
        table.push(line);
    }
    table
}

fn comparisons_table(comparisons: &[ComparisonRow]) -> Table {
    let mut table = vec![header(&[
        "split",
        "scope",
        "metric",
        "group_a",
        "group_b",
        "n_a",
        "n_b",
        "mean_a",
        "mean_b",
        "var_a",
        "var_b",
        "t",
        "df",
        "p",
        "alpha",
        "significant",
        "degenerate_variance",
        "excluded_discarded",
        "excluded_not_entered",
        "excluded_degenerate",
        "note",
    ])];
    for c in comparisons {
        let mut line = vec![
            c.split.name().to_string(),
            c.scope.name(),
            c.metric.name().to_string(),
            c.label_a.clone(),
            c.label_b.clone(),
        ];
        match &c.result {
            Some(r) => line.extend([
                r.n_a.to_string(),
                r.n_b.to_string(),
                num(r.mean_a),
                num(r.mean_b),
                num(r.var_a),
                num(r.var_b),
                num(r.t),
                num(r.df),
                num(r.p),
                num(r.alpha),
                r.significant.to_string(),
                r.degenerate_variance.to_string(),
            ]),
            None => line.extend(std::iter::repeat_n(String::new(), 12)),
        }
        line.extend([
            c.excluded.discarded.to_string(),
            c.excluded.not_entered.to_string(),
            c.excluded.degenerate.to_string(),
            c.note.clone(),
        ]);
        table.push(line);
    }
    table
}

/// Bin index of a value in `[0, 1]`; 1.0 falls in the last bin.
pub fn histogram_bin(value: f64) -> usize {
    ((value * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)
}

fn histogram_table(rows: &[RunAnalysis]) -> Table {
    let mut table = vec![header(&["split", "group", "scope", "bin", "lower", "upper", "count"])];
    for split in [Split::Outcome, Split::ascension()] {
        for scope in Scope::ALL {
            let groups = collect_groups(rows, split, scope, Metric::Normalized, false);
            for (label, values) in [(&groups.label_a, &groups.a), (&groups.label_b, &groups.b)] {
                let mut counts = [0usize; HISTOGRAM_BINS];
                for &v in values {
                    counts[histogram_bin(v)] += 1;
                }
                for (bin, count) in counts.iter().enumerate() {
                    table.push(vec![
                        split.name().to_string(),
                        label.clone(),
                        scope.name(),
                        bin.to_string(),
                        num(bin as f64 / HISTOGRAM_BINS as f64),
                        num((bin + 1) as f64 / HISTOGRAM_BINS as f64),
                        count.to_string(),
                    ]);
                }
            }
        }
    }
    table
}

fn ascension_table(rows: &[RunAnalysis]) -> Table {
    let mut by_level: BTreeMap<u8, (usize, f64, f64)> = BTreeMap::new();
    for row in rows {
        if let (Some(norm), Some(step)) = (row.avg_normalized, row.avg_per_step) {
            let e = by_level.entry(row.ascension).or_default();
            e.0 += 1;
            e.1 += step;
            e.2 += norm;
        }
    }
    let mut table = vec![header(&["ascension", "n", "mean_avg_per_step", "mean_avg_normalized"])];
    for (level, (n, step, norm)) in by_level {
        table.push(vec![
            level.to_string(),
            n.to_string(),
            num(step / n as f64),
            num(norm / n as f64),
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.0999), 0);
        assert_eq!(histogram_bin(0.1), 1);
        assert_eq!(histogram_bin(0.95), 9);
        assert_eq!(histogram_bin(1.0), 9);
    }

    #[test]
    fn empty_report_has_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_report(dir.path(), &[], &[]).unwrap();
        assert_eq!(written.len(), 4);
        let runs = std::fs::read_to_string(dir.path().join(RUNS_FILE)).unwrap();
        assert_eq!(runs.lines().count(), 1);
        assert!(runs.starts_with("run_id,seed,victory"));
        let asc = std::fs::read_to_string(dir.path().join(ASCENSION_FILE)).unwrap();
        assert_eq!(asc.lines().count(), 1);
    }

    #[test]
    fn io_error_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocked");
        std::fs::write(&blocker, "").unwrap();
        let err = emit_report(&blocker.join("out"), &[], &[]).unwrap_err();
        assert!(err.to_string().contains("blocked"), "{err}");
    }
}
