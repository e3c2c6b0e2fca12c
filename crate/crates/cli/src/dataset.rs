//! CSV datasets: header `id,x1,...,xd`, one integer point per row.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use shrq_core::oracle::Record;
use shrq_core::{DeploymentConfig, Point};

/// Reads a dataset, checking the header and every cell. `d` is taken from the
/// header when `expect_d` is `None`. Row numbers in errors count the header as row 1.
pub fn read(path: &Path, expect_d: Option<usize>) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let header = rdr.headers().context("cannot read header")?.clone();
    let d = check_header(&header)?;
    if let Some(want) = expect_d {
        if d != want {
            bail!("header declares {d} coordinates, the key expects {want}");
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.with_context(|| format!("row {row}: unreadable"))?;
        if rec.len() != d + 1 {
            bail!("row {row}: expected {} cells, found {}", d + 1, rec.len());
        }
        let id: u64 = rec[0]
            .parse()
            .with_context(|| format!("row {row}: id '{}' is not a non-negative integer", &rec[0]))?;
        if !seen.insert(id) {
            bail!("row {row}: duplicate id {id}");
        }
        let coords = (1..=d)
            .map(|j| {
                rec[j]
                    .parse::<i64>()
                    .with_context(|| format!("row {row}: x{j} = '{}' is not an integer", &rec[j]))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((id, Point::new(coords)));
    }
    Ok(out)
}

fn check_header(h: &csv::StringRecord) -> Result<usize> {
    if h.len() < 2 || &h[0] != "id" {
        bail!("row 1: header must be id,x1,...,xd");
    }
    for (j, name) in h.iter().enumerate().skip(1) {
        if name != format!("x{j}") {
            bail!("row 1: column {} should be named x{j}, found '{name}'", j + 1);
        }
    }
    Ok(h.len() - 1)
}

/// Checks every point against the deployment domain, naming the offending row.
pub fn check_domain(records: &[Record], cfg: &DeploymentConfig) -> Result<()> {
    for (i, (id, p)) in records.iter().enumerate() {
        cfg.to_domain(*id, p).with_context(|| format!("row {}", i + 2))?;
    }
    Ok(())
}
