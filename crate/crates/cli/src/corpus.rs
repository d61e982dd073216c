//! Reports over every diagram file in a directory.

use std::path::{Path, PathBuf};

use kei_core::linkdiag::parse_diagram;
use rayon::prelude::*;

use crate::cache::{cache_key, Cache};
use crate::exit_code;
use crate::report::{compute_report, Options, Report};

pub struct Row {
    pub file: String,
    pub outcome: Result<Report, Failure>,
    pub cached: bool,
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

/// Top-level `*.json` files, sorted by name.
pub fn diagram_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

/// Reports in file order. New reports are added to `cache`; the caller flushes it.
pub fn run(files: &[PathBuf], opts: &Options, cache: Option<&mut Cache>, jobs: usize) -> Vec<Row> {
    let shared = cache.as_deref();
    let work = |p: &PathBuf| -> (Row, Option<(String, serde_json::Value)>) {
        let file = file_name(p);
        let fail = |code: i32, message: String| Failure { code, message };
        let text = match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                let row = Row {
                    file,
                    outcome: Err(fail(1, e.to_string())),
                    cached: false,
                };
                return (row, None);
            }
        };
        let d = match parse_diagram(&text) {
            Ok(d) => d,
            Err(e) => {
                let row = Row {
                    file,
                    outcome: Err(fail(exit_code(&e), e.to_string())),
                    cached: false,
                };
                return (row, None);
            }
        };
        let key = cache_key(&d.canonical_serialization(), &opts.fingerprint());
        if let Some(v) = shared.and_then(|c| c.get(&key)) {
            if let Ok(r) = serde_json::from_value::<Report>(v.clone()) {
                return (
                    Row {
                        file,
                        outcome: Ok(r),
                        cached: true,
                    },
                    None,
                );
            }
        }
        match compute_report(&d, opts) {
            Ok(c) => {
                let value = serde_json::to_value(&c.report).expect("serializable");
                (
                    Row {
                        file,
                        outcome: Ok(c.report),
                        cached: false,
                    },
                    Some((key, value)),
                )
            }
            Err(e) => (
                Row {
                    file,
                    outcome: Err(fail(exit_code(&e), e.to_string())),
                    cached: false,
                },
                None,
            ),
        }
    };
    let results: Vec<_> = match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| files.par_iter().map(work).collect()),
        Err(_) => files.iter().map(work).collect(),
    };
    let mut rows = Vec::with_capacity(results.len());
    let mut fresh = Vec::new();
    for (row, new) in results {
        rows.push(row);
        fresh.extend(new);
    }
    if let Some(c) = cache {
        for (k, v) in fresh {
            c.insert(k, v);
        }
    }
    rows
}

/// Highest exit code among rows: errors keep theirs, failed checks give 4,
/// capped computations 3.
pub fn exit_status(rows: &[Row]) -> i32 {
    rows.iter()
        .map(|r| match &r.outcome {
            Err(f) => f.code,
            Ok(rep) if !rep.failed_checks().is_empty() => 4,
            Ok(rep) if rep.capped() => 3,
            Ok(_) => 0,
        })
        .max()
        .unwrap_or(0)
}

pub fn render_text(rows: &[Row]) -> String {
    let header = ["diagram", "mu", "det", "M", "Q_A", "IMQ", "char", "checks"];
    let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    let mut errors = Vec::new();
    for row in rows {
        match &row.outcome {
            Ok(r) => {
                let size = |q: &crate::report::QuandleSize| {
                    q.size.map_or(q.status.clone(), |n| n.to_string())
                };
                let failed = r.failed_checks();
                table.push(vec![
                    row.file.clone(),
                    r.components.to_string(),
                    r.det.clone(),
                    r.module.display.clone(),
                    size(&r.qa),
                    if r.strictly_between_bounds == Some(true) {
                        format!("{}*", size(&r.imq))
                    } else {
                        size(&r.imq)
                    },
                    r.characteristic.clone(),
                    if failed.is_empty() {
                        "pass".into()
                    } else {
                        format!("FAIL {}", failed.join(","))
                    },
                ]);
            }
            Err(f) => errors.push(format!("{}: error {}: {}", row.file, f.code, f.message)),
        }
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            table
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    for r in &table {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(x, w)| format!("{x:<w$}"))
            .collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    for e in &errors {
        s.push_str(e);
        s.push('\n');
    }
    if rows.iter().any(|r| {
        r.outcome
            .as_ref()
            .is_ok_and(|r| r.strictly_between_bounds == Some(true))
    }) {
        s.push_str("* IMQ size attains neither bound\n");
    }
    s.push_str(&summary_line(rows));
    s.push('\n');
    s
}

fn summary_line(rows: &[Row]) -> String {
    let ok: Vec<&Report> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let failing = ok.iter().filter(|r| !r.failed_checks().is_empty()).count();
    let errors = rows.len() - ok.len();
    let suites = if failing == 0 {
        "all property checks pass".to_string()
    } else {
        format!("{failing} with failing property checks")
    };
    format!("{} reports, {errors} errors, {suites}", ok.len())
}

/// One JSON line per file, then a summary line.
pub fn render_machine(rows: &[Row]) -> String {
    let mut s = String::new();
    for row in rows {
        let line = match &row.outcome {
            Ok(r) => crate::report::render_machine(&row.file, r),
            Err(f) => serde_json::to_string(&serde_json::json!({
                "diagram": row.file,
                "error": { "code": f.code, "message": f.message },
            }))
            .expect("serializable"),
        };
        s.push_str(&line);
        s.push('\n');
    }
    let ok: Vec<&Report> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let summary = serde_json::json!({
        "summary": {
            "reports": ok.len(),
            "errors": rows.len() - ok.len(),
            "failing_checks": ok.iter().filter(|r| !r.failed_checks().is_empty()).count(),
        }
    });
    s.push_str(&serde_json::to_string(&summary).expect("serializable"));
    s.push('\n');
    s
}
