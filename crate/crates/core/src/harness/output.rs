use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{AggregateReport, HarnessError, RunRecord};

/// Leading CSV columns; one `regret@...` column per checkpoint follows.
pub const CSV_FIXED_COLUMNS: [&str; 6] = [
    "seed",
    "heuristic",
    "final_regret",
    "oracle_calls_unconstrained",
    "oracle_calls_constrained",
    "wall_ms",
];

/// `regret@1e3` for powers of ten, `regret@2500` otherwise.
pub fn checkpoint_label(t: u64) -> String {
    let mut p = 1u64;
    let mut k = 0;
    while p < t {
        p *= 10;
        k += 1;
    }
    if p == t && k > 0 {
        format!("regret@1e{k}")
    } else {
        format!("regret@{t}")
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one row per run. Checkpoint columns come from the first record;
/// with no records only the fixed header is written.
pub fn emit_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = CSV_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(first) = records.first() {
        header.extend(first.checkpoints.iter().map(|&(t, _)| checkpoint_label(t)));
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.seed.to_string(),
            r.heuristic.to_string(),
            real(r.final_regret),
            r.oracle_calls.call_count_unconstrained.to_string(),
            r.oracle_calls.call_count_constrained.to_string(),
            real(r.wall_ms),
        ];
        row.extend(r.checkpoints.iter().map(|&(_, v)| real(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    emit_csv(records, std::io::BufWriter::new(file)).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Plain-text table, one line per report.
pub fn format_table(title: &str, reports: &[AggregateReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(
        s,
        "{:<22} {:>9} {:>14} {:>12} {:>12} {:>12} {:>10}",
        "policy", "C", "regret(max)", "std", "begin", "suppress", "ms/run"
    );
    for r in reports {
        let by = |name: &str| {
            r.per_heuristic
                .iter()
                .find(|h| h.heuristic.to_string() == name)
                .map_or("-".to_string(), |h| format!("{:.0}", h.mean_regret))
        };
        let _ = writeln!(
            s,
            "{:<22} {:>9} {:>14.0} {:>12.0} {:>12} {:>12} {:>10.0}",
            r.policy,
            r.budget,
            r.max_over_heuristics,
            r.max_over_heuristics_std,
            by("begin"),
            by("suppress"),
            r.mean_wall_ms
        );
    }
    s
}
