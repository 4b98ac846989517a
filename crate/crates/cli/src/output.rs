//! CSV rows, JSON documents and gnuplot data files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use onebit_core::harness::{DemoReport, ExperimentConfig, RiskReport};
use serde::Serialize;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 17] = [
    "protocol",
    "scenario",
    "d",
    "n",
    "r_n",
    "c_n",
    "schedule_validity",
    "replications",
    "test_points",
    "risk_mean",
    "risk_se",
    "bayes_risk",
    "excess_risk",
    "bits_per_query",
    "abstain_rate",
    "all_abstain_frac",
    "seed",
];

/// Rust's `Display` for `f64` is the shortest string that parses back to
/// the same value and never depends on locale.
fn csv_record(r: &RiskReport) -> [String; 17] {
    [
        r.protocol.id().to_string(),
        r.scenario.clone(),
        r.d.to_string(),
        r.n.to_string(),
        r.r_n.to_string(),
        r.c_n.to_string(),
        r.schedule_validity.clone(),
        r.replications.to_string(),
        r.test_points.to_string(),
        r.risk_mean.to_string(),
        r.risk_se.to_string(),
        r.bayes_risk.to_string(),
        r.excess_risk.to_string(),
        r.bits_per_query.to_string(),
        r.abstain_rate.to_string(),
        r.all_abstain_frac.to_string(),
        r.seed.to_string(),
    ]
}

pub fn write_csv(path: &Path, reports: &[RiskReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub csv_schema_version: u32,
    pub csv_columns: Vec<&'static str>,
    /// Resolved `key = value` settings; saved as a config file they rerun
    /// the experiment.
    pub config: BTreeMap<String, String>,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct Document<'a> {
    pub manifest: RunManifest,
    pub rows: &'a [RiskReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo: Option<&'a DemoReport>,
}

pub fn write_json(path: &Path, doc: &Document<'_>) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, doc)?;
    writeln!(f)?;
    Ok(())
}

/// Rows of a results CSV needed for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub protocol: String,
    pub scenario: String,
    pub n: u64,
    pub excess_risk: f64,
}

pub fn read_plot_rows(path: &Path) -> Result<Vec<PlotRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).with_context(|| format!("{}: missing column `{name}`", path.display()))
    };
    let (p, s, n, e) = (col("protocol")?, col("scenario")?, col("n")?, col("excess_risk")?);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        rows.push(PlotRow {
            protocol: field(p).to_string(),
            scenario: field(s).to_string(),
            n: field(n).parse().with_context(|| format!("row {}: bad n", i + 1))?,
            excess_risk: field(e).parse().with_context(|| format!("row {}: bad excess_risk", i + 1))?,
        });
    }
    Ok(rows)
}

/// Writes one `report-<protocol>.dat` file per protocol, two columns
/// `n excess_risk` sorted by `n`. Returns the files written.
pub fn write_gnuplot(out: &Path, source: &Path, rows: &[PlotRow]) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        bail!("{}: no data rows", source.display());
    }
    let mut by_protocol: BTreeMap<&str, Vec<&PlotRow>> = BTreeMap::new();
    for r in rows {
        by_protocol.entry(&r.protocol).or_default().push(r);
    }
    let mut written = Vec::new();
    for (protocol, mut group) in by_protocol {
        group.sort_by_key(|r| r.n);
        let path = out.join(format!("report-{protocol}.dat"));
        let mut text = format!("# {protocol} on {} from {}\n# n excess_risk\n", group[0].scenario, source.display());
        for r in group {
            text.push_str(&format!("{} {}\n", r.n, r.excess_risk));
        }
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}
