//! Load-displacement and KKT tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::KktReport;
use crate::solver::StepRecord;

pub const LD_HEADER: &str = "step,t,u_mm,load_kN,iters,err";
pub const KKT_HEADER: &str = "step,primal,dual,complementarity,lambda_theta,slack";

/// Twelve significant digits.
fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn ld_csv(records: &[StepRecord]) -> String {
    let mut s = String::from(LD_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.step,
            num(r.t),
            num(r.u_mm),
            num(r.load_kn),
            r.iters,
            num(r.err)
        );
    }
    s
}

pub fn write_ld_csv(records: &[StepRecord], path: &Path) -> Result<()> {
    std::fs::write(path, ld_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn kkt_csv(records: &[StepRecord], reports: &[KktReport]) -> String {
    let mut s = String::from(KKT_HEADER);
    s.push('\n');
    for (r, k) in records.iter().zip(reports) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.step,
            num(k.primal),
            num(k.dual),
            num(k.complementarity),
            num(k.lambda_theta),
            num(k.slack)
        );
    }
    s
}

pub fn write_kkt_csv(records: &[StepRecord], reports: &[KktReport], path: &Path) -> Result<()> {
    std::fs::write(path, kkt_csv(records, reports)).map_err(|e| Error::io(path, e))
}

/// Reads the `u_mm` and `load_kN` columns of a file written by [`write_ld_csv`].
pub fn read_ld_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == LD_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `{LD_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parsed = (cols.len() == 6)
            .then(|| Some((cols[2].trim().parse().ok()?, cols[3].trim().parse().ok()?)))
            .flatten();
        out.push(parsed.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: "malformed row".into(),
        })?);
    }
    Ok(out)
}
