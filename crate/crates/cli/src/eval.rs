use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crowdsim_core::metrics::{EPISODE_CSV_HEADER, SUMMARY_CSV_HEADER};
use crowdsim_core::{aggregate, episode_metrics, EpisodeLog, SocialMode, Summary};

use crate::failure::{load_log, Failure};
use crate::GroupBy;

/// Expands a glob; a bare directory stands for its `.jsonl` files.
pub fn expand(pattern: &str) -> Result<Vec<PathBuf>, Failure> {
    let dir = Path::new(pattern);
    let pattern = if dir.is_dir() {
        format!("{}/*.jsonl", pattern.trim_end_matches('/'))
    } else {
        pattern.to_string()
    };
    let paths = glob::glob(&pattern)
        .map_err(|e| Failure::Input(format!("bad glob '{pattern}': {e}")))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Io(e.to_string()))?;
    let mut files: Vec<PathBuf> = paths.into_iter().filter(|p| p.is_file()).collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!("no logs match '{pattern}'")));
    }
    Ok(files)
}

fn group_key(log: &EpisodeLog, by: GroupBy) -> String {
    match by {
        GroupBy::None => "all".to_string(),
        GroupBy::Kind => log.scenario().kind.label().to_string(),
        GroupBy::Policy => log
            .header
            .policy
            .clone()
            .unwrap_or_else(|| "unknown".to_string()),
        GroupBy::Mode => match log.header.config.mode() {
            SocialMode::SociallyIntegrated => "socially_integrated".to_string(),
            SocialMode::SociallyAware => "socially_aware".to_string(),
        },
    }
}

pub fn eval(
    pattern: &str,
    out: &Path,
    episodes_out: Option<&Path>,
    by: GroupBy,
) -> Result<(), Failure> {
    let files = expand(pattern)?;
    let mut groups: BTreeMap<String, Vec<_>> = BTreeMap::new();
    let mut episode_csv = format!("file,{EPISODE_CSV_HEADER}\n");
    for path in &files {
        let log = load_log(path)?;
        let metrics = episode_metrics(&log)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        writeln!(episode_csv, "{},{}", path.display(), metrics.csv_row()).unwrap();
        groups.entry(group_key(&log, by)).or_default().push(metrics);
    }

    let summaries: Vec<Summary> = groups
        .iter()
        .map(|(name, m)| aggregate(name, m))
        .collect::<Result<_, _>>()?;
    let mut csv = format!("{SUMMARY_CSV_HEADER}\n");
    for s in &summaries {
        csv.push_str(&s.csv_row());
        csv.push('\n');
    }
    write(out, &csv)?;
    if let Some(path) = episodes_out {
        write(path, &episode_csv)?;
    }

    println!("{}", Summary::display_header());
    for s in &summaries {
        println!("{}", s.display_row());
    }
    Ok(())
}

pub fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Failure::io(path, e))
}
