//! Byte-deterministic CSV tables: fixed headers, fixed decimal places.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::pipeline::SweepRecord;
use crate::robustness::SweepRow;
use crate::summary::{RankRow, RankTable, ScoreTable};

pub const METRICS_HEADER: &str =
    "dataset,image_id,algorithm,k_desired,k_generated,rec,ue_np,ue_levin,ue_bergh,asa,ev,co,icv,mde,runtime_ms";
pub const SUMMARY_HEADER: &str = "algorithm,dataset,amr,aue,auv";
pub const RANK_HEADER: &str = "algorithm,avg_rank,mean_amr,mean_aue,rank_counts";
pub const ROBUSTNESS_HEADER: &str =
    "algorithm,perturbation,magnitude,rec_mean,ue_np_mean,ev_mean,k_raw_mean,k_raw_std";

/// Six decimals; `nan` for non-finite values; never `-0.000000`.
pub fn fmt6(v: f64) -> String {
    fixed(v, 6)
}

fn fixed(v: f64, places: usize) -> String {
    if !v.is_finite() {
        return "nan".to_string();
    }
    let s = format!("{v:.places$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Compact rendering of a magnitude or other free-form real.
pub fn fmt_short(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn check_field(value: &str) -> Result<()> {
    if value.contains([',', '\n', '\r', '"']) {
        return Err(Error::param("csv field", format!("`{value}` contains a reserved character")));
    }
    Ok(())
}

/// One metrics.csv row per record. `runtime_ms` is empty when the record
/// carries no runtime; failed runs print `nan` metrics and an empty
/// `k_generated`.
pub fn render_metrics(dataset: &str, algorithm: &str, records: &[SweepRecord]) -> Result<String> {
    check_field(dataset)?;
    check_field(algorithm)?;
    let mut out = String::new();
    writeln!(out, "{METRICS_HEADER}").expect("write to string");
    for r in records {
        check_field(&r.image_id)?;
        write!(out, "{dataset},{},{algorithm},{},", r.image_id, r.k_desired).expect("write to string");
        match &r.record {
            Some(m) => {
                let values = [m.rec, m.ue_np, m.ue_levin, m.ue_bergh, m.asa, m.ev, m.co, m.icv, m.mde];
                write!(out, "{}", m.k_generated).expect("write to string");
                for v in values {
                    write!(out, ",{}", fmt6(v)).expect("write to string");
                }
                let runtime = m.runtime_ns.map(|ns| fixed(ns as f64 / 1e6, 3)).unwrap_or_default();
                writeln!(out, ",{runtime}").expect("write to string");
            }
            None => {
                writeln!(out, "{}", ",nan".repeat(9) + ",").expect("write to string");
            }
        }
    }
    Ok(out)
}

/// A parsed metrics.csv row. Metric values are `NaN` for failed runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub dataset: String,
    pub image_id: String,
    pub algorithm: String,
    pub k_desired: usize,
    pub k_generated: Option<usize>,
    /// rec, ue_np, ue_levin, ue_bergh, asa, ev, co, icv, mde.
    pub values: [f64; 9],
    pub runtime_ms: Option<f64>,
}

pub const METRIC_NAMES: [&str; 9] = ["rec", "ue_np", "ue_levin", "ue_bergh", "asa", "ev", "co", "icv", "mde"];

fn lines_after_header<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => Ok(lines),
        Some((_, h)) => Err(Error::decode("csv", format!("unexpected header `{h}`"))),
        None => Err(Error::decode("csv", "missing header")),
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::decode("csv", format!("line {}: bad {what} `{field}`", line + 1)))
}

fn split(line: &str, n: usize, idx: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(Error::decode(
            "csv",
            format!("line {}: expected {n} fields, found {}", idx + 1, fields.len()),
        ));
    }
    Ok(fields)
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    lines_after_header(text, METRICS_HEADER)?
        .map(|(i, line)| {
            let f = split(line, 15, i)?;
            let mut values = [0.0; 9];
            for (v, s) in values.iter_mut().zip(&f[5..14]) {
                *v = parse_num(s, i, "metric")?;
            }
            Ok(MetricsRow {
                dataset: f[0].to_string(),
                image_id: f[1].to_string(),
                algorithm: f[2].to_string(),
                k_desired: parse_num(f[3], i, "k_desired")?,
                k_generated: if f[4].is_empty() { None } else { Some(parse_num(f[4], i, "k_generated")?) },
                values,
                runtime_ms: if f[14].is_empty() { None } else { Some(parse_num(f[14], i, "runtime_ms")?) },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub dataset: String,
    pub amr: f64,
    pub aue: f64,
    pub auv: f64,
}

pub fn render_summary(rows: &[SummaryRow]) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{SUMMARY_HEADER}").expect("write to string");
    for r in rows {
        check_field(&r.algorithm)?;
        check_field(&r.dataset)?;
        writeln!(
            out,
            "{},{},{},{},{}",
            r.algorithm,
            r.dataset,
            fmt6(r.amr),
            fmt6(r.aue),
            fmt6(r.auv)
        )
        .expect("write to string");
    }
    Ok(out)
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    lines_after_header(text, SUMMARY_HEADER)?
        .map(|(i, line)| {
            let f = split(line, 5, i)?;
            Ok(SummaryRow {
                algorithm: f[0].to_string(),
                dataset: f[1].to_string(),
                amr: parse_num(f[2], i, "amr")?,
                aue: parse_num(f[3], i, "aue")?,
                auv: parse_num(f[4], i, "auv")?,
            })
        })
        .collect()
}

/// Builds the score table. A repeated (dataset, algorithm) pair
/// is an error.
pub fn summary_scores(rows: &[SummaryRow]) -> Result<ScoreTable> {
    let mut out = ScoreTable::new();
    for r in rows {
        if !(r.amr.is_finite() && r.aue.is_finite()) {
            continue;
        }
        let prev = out
            .entry(r.dataset.clone())
            .or_default()
            .insert(r.algorithm.clone(), (r.amr, r.aue));
        if prev.is_some() {
            return Err(Error::decode(
                "csv",
                format!("duplicate summary for {} on {}", r.algorithm, r.dataset),
            ));
        }
    }
    Ok(out)
}

pub fn render_rank(table: &RankTable) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{RANK_HEADER}").expect("write to string");
    for r in &table.rows {
        check_field(&r.algorithm)?;
        let counts: Vec<String> = r.rank_distribution.iter().map(|(k, c)| format!("{k}:{c}")).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.algorithm,
            fmt6(r.average_rank),
            fmt6(r.mean_amr),
            fmt6(r.mean_aue),
            counts.join("|")
        )
        .expect("write to string");
    }
    Ok(out)
}

pub fn parse_rank(text: &str) -> Result<RankTable> {
    let rows = lines_after_header(text, RANK_HEADER)?
        .map(|(i, line)| {
            let f = split(line, 5, i)?;
            let mut dist = BTreeMap::new();
            for pair in f[4].split('|').filter(|p| !p.is_empty()) {
                let (r, c) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::decode("csv", format!("line {}: bad rank count `{pair}`", i + 1)))?;
                dist.insert(parse_num(r, i, "rank")?, parse_num(c, i, "count")?);
            }
            Ok(RankRow {
                algorithm: f[0].to_string(),
                average_rank: parse_num(f[1], i, "avg_rank")?,
                mean_amr: parse_num(f[2], i, "mean_amr")?,
                mean_aue: parse_num(f[3], i, "mean_aue")?,
                rank_distribution: dist,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankTable { rows })
}

/// Appends robustness rows (no header) for one algorithm and perturbation.
pub fn render_robustness_rows(algorithm: &str, perturbation: &str, rows: &[SweepRow]) -> Result<String> {
    check_field(algorithm)?;
    check_field(perturbation)?;
    let mut out = String::new();
    for r in rows {
        let nan = f64::NAN;
        let (rec, ue, ev) = r
            .stats
            .as_ref()
            .map_or((nan, nan, nan), |s| (s.rec.mean, s.ue_np.mean, s.ev.mean));
        let (km, ks) = r.k_raw.map_or((nan, nan), |s| (s.mean, s.std));
        writeln!(
            out,
            "{algorithm},{perturbation},{},{},{},{},{},{}",
            fmt_short(r.magnitude),
            fmt6(rec),
            fmt6(ue),
            fmt6(ev),
            fmt6(km),
            fmt6(ks)
        )
        .expect("write to string");
    }
    Ok(out)
}
