use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use spv_core::scoring::{confusion_csv, join_records, score, ScoreOptions, ScoreReport};
use spv_core::study::{read_session_log, Catalog, SessionState};

use crate::args::ScoreArgs;
use crate::atomic;

#[derive(Clone, Debug)]
pub struct ScoreOutcome {
    pub report: ScoreReport,
    pub sessions_used: usize,
    pub sessions_skipped: usize,
    pub written: Vec<PathBuf>,
}

/// Expands directories to the `*.jsonl` files directly inside them.
pub fn session_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            bail!("{} does not exist", p.display());
        }
    }
    Ok(out)
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

pub fn cmd_score(args: &ScoreArgs) -> Result<ScoreOutcome> {
    let catalog = Catalog::load(&args.catalog)?;
    let lookup = catalog.lookup();
    let files = session_files(&args.sessions)?;
    let mut records = Vec::new();
    let (mut used, mut skipped) = (0, 0);
    for f in &files {
        let (header, recs) = read_session_log(f).with_context(|| format!("reading {}", f.display()))?;
        let keep = args
            .filters
            .iter()
            .all(|(k, v)| header.metadata.get(k) == Some(v));
        if !keep {
            skipped += 1;
            continue;
        }
        SessionState::replay(catalog.build_plan(header.seed), &header, &recs)
            .with_context(|| format!("{} does not replay against the catalog", f.display()))?;
        records.extend(recs);
        used += 1;
    }
    if used == 0 {
        bail!("no session logs left to score ({} read, {skipped} filtered out)", files.len());
    }
    let responses = join_records(records, &lookup)?;
    let report = score(
        &responses,
        ScoreOptions {
            group_by: args.group_by.into(),
            include_late: !args.exclude_late,
        },
    )?;
    let written = match &args.out {
        Some(dir) => write_outputs(dir, &report)?,
        None => Vec::new(),
    };
    Ok(ScoreOutcome {
        report,
        sessions_used: used,
        sessions_skipped: skipped,
        written,
    })
}

fn write_outputs(dir: &Path, report: &ScoreReport) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        atomic::write_bytes(&path, body.as_bytes())?;
        written.push(path);
        Ok(())
    };
    put("report.json".into(), report.to_json())?;
    put("report.txt".into(), report.to_text_table())?;
    for g in &report.groups {
        put(format!("confusion-{}.csv", slug(&g.label)), confusion_csv(&g.rooms))?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("SIE-OM Cent"), "sie-om-cent");
        assert_eq!(slug("All"), "all");
    }
}
