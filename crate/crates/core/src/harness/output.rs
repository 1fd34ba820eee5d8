use std::io::Write;

use serde::Serialize;

use super::ResultRecord;
use crate::error::Result;

fn write_header<W: Write>(w: &mut W, header: &[String]) -> Result<()> {
    for line in header {
        for part in line.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    Ok(())
}

/// Long-format CSV: `setting,n,r,k,stat,mean,stderr,trials,seed`.
///
/// `stat` is `beta` (`k` = homology degree), `simplices` (`k` = simplex
/// dimension) or `euler` (empty `k`). Header lines are written as `#` comments.
pub fn write_results_csv<W: Write>(mut w: W, setting: &str, header: &[String], records: &[ResultRecord]) -> Result<()> {
    write_header(&mut w, header)?;
    writeln!(w, "setting,n,r,k,stat,mean,stderr,trials,seed")?;
    for rec in records {
        let trials = rec.trials.len();
        let mut row = |k: String, stat: &str, mean: f64, stderr: f64| {
            writeln!(w, "{setting},{},{},{k},{stat},{mean},{stderr},{trials},{}", rec.n, rec.r, rec.master_seed)
        };
        for (k, e) in rec.betti.iter().enumerate() {
            row(k.to_string(), "beta", e.value, e.stderr)?;
        }
        for (j, e) in rec.simplices.iter().enumerate() {
            row(j.to_string(), "simplices", e.value, e.stderr)?;
        }
        if let Some(e) = &rec.euler {
            row(String::new(), "euler", e.value, e.stderr)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a, C: Serialize> {
    config: &'a C,
    records: &'a [ResultRecord],
}

/// JSON document `{ "config": ..., "records": [...] }`.
pub fn write_summary_json<W: Write, C: Serialize>(w: W, config: &C, records: &[ResultRecord]) -> Result<()> {
    serde_json::to_writer_pretty(w, &Summary { config, records })?;
    Ok(())
}

/// Whitespace-separated table, one row per radius: `r` followed by mean and
/// stderr of each `β_k/n`, then of `χ/n` when present.
pub fn write_gnuplot<W: Write>(mut w: W, header: &[String], records: &[ResultRecord]) -> Result<()> {
    write_header(&mut w, header)?;
    let Some(first) = records.first() else { return Ok(()) };
    let mut cols = vec!["r".to_string()];
    for k in 0..first.betti.len() {
        cols.push(format!("beta{k}"));
        cols.push(format!("beta{k}_se"));
    }
    if first.euler.is_some() {
        cols.push("euler".into());
        cols.push("euler_se".into());
    }
    writeln!(w, "# {}", cols.join(" "))?;
    for rec in records {
        let mut line = vec![rec.r.to_string()];
        for e in rec.betti.iter().chain(rec.euler.iter()) {
            line.push(e.value.to_string());
            line.push(e.stderr.to_string());
        }
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
