//! Reading and writing of operator databases, output record files, and log
//! files. Record lines are tuples in the shape `[p, phi*, [a1, a2]]` with
//! flagged points as `[p, phi*, [], C]` / `[p, phi*, [], 0]`; log lines are
//! `[p, trunc_deg, M]` with a `WARN` suffix when the termination check fails.

use crate::error::{Error, Result};
use crate::evaluate::{EulerFactorRecord, Flag};
use crate::operator::{parse_operator, CYOperator};
use num_bigint::BigInt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

pub fn load_operators(path: &Path) -> Result<Vec<CYOperator>> {
    let file = std::fs::File::open(path)?;
    let mut ops = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        ops.push(parse_operator(trimmed)?);
    }
    Ok(ops)
}

pub fn find_operator<'a>(ops: &'a [CYOperator], name: &str) -> Result<&'a CYOperator> {
    ops.iter().find(|op| op.name == name).ok_or_else(|| {
        let known: Vec<&str> = ops.iter().map(|op| op.name.as_str()).collect();
        Error::Usage(format!(
            "unknown operator '{name}' (database has: {})",
            known.join(", ")
        ))
    })
}

pub fn format_record(rec: &EulerFactorRecord) -> String {
    match rec.flag {
        Flag::Good => {
            let coeffs: Vec<String> = rec.coeffs.iter().map(|c| c.to_string()).collect();
            format!("[{}, {}, [{}]]", rec.p, rec.phi_star, coeffs.join(", "))
        }
        Flag::Conifold => format!("[{}, {}, [], C]", rec.p, rec.phi_star),
        Flag::OtherSingular => format!("[{}, {}, [], 0]", rec.p, rec.phi_star),
    }
}

pub fn parse_record(line: &str) -> Result<EulerFactorRecord> {
    let err = |msg: String| Error::Parse {
        context: "record line".into(),
        message: msg,
    };
    let inner = line
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| err(format!("not a bracketed tuple: {line}")))?;
    // split off the coefficient sublist
    let open = inner.find('[').ok_or_else(|| err("missing coefficient list".into()))?;
    let close = inner.rfind(']').ok_or_else(|| err("missing coefficient list".into()))?;
    let head: Vec<&str> = inner[..open].split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if head.len() != 2 {
        return Err(err(format!("expected p and phi* before the list: {line}")));
    }
    let p: u64 = head[0].parse().map_err(|e| err(format!("bad p: {e}")))?;
    let phi_star: u64 = head[1].parse().map_err(|e| err(format!("bad phi*: {e}")))?;
    let coeffs: Vec<BigInt> = inner[open + 1..close]
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<BigInt>().map_err(|e| err(format!("bad coefficient '{s}': {e}"))))
        .collect::<Result<_>>()?;
    let tail = inner[close + 1..].trim_start_matches(',').trim();
    let flag = match tail {
        "" => Flag::Good,
        "C" => Flag::Conifold,
        "0" => Flag::OtherSingular,
        other => return Err(err(format!("unknown flag '{other}'"))),
    };
    if flag == Flag::Good && coeffs.is_empty() {
        return Err(err("good record with empty coefficients".into()));
    }
    Ok(EulerFactorRecord {
        p,
        phi_star,
        coeffs,
        flag,
        full: None,
    })
}

pub fn outputs_path(outdir: &Path, label: &str) -> PathBuf {
    outdir.join("outputs").join(format!("outputs_{label}.txt"))
}

pub fn log_path(outdir: &Path, label: &str) -> PathBuf {
    outdir.join("logs").join(format!("{label}.log"))
}

/// Write records sorted by (p, phi*), one tuple per line.
pub fn write_outputs(records: &[EulerFactorRecord], outdir: &Path, label: &str) -> Result<PathBuf> {
    let path = outputs_path(outdir, label);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut sorted: Vec<&EulerFactorRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.p, r.phi_star));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    for rec in sorted {
        writeln!(out, "{}", format_record(rec))?;
    }
    Ok(path)
}

pub fn read_outputs(path: &Path) -> Result<Vec<EulerFactorRecord>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record(&line)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogLine {
    pub p: u64,
    pub trunc_deg: usize,
    pub m_bound: usize,
    pub warn: bool,
}

pub fn format_log_line(l: &LogLine) -> String {
    if l.warn {
        format!("[{}, {}, {}] WARN", l.p, l.trunc_deg, l.m_bound)
    } else {
        format!("[{}, {}, {}]", l.p, l.trunc_deg, l.m_bound)
    }
}

pub fn parse_log_line(line: &str) -> Result<LogLine> {
    let err = |msg: String| Error::Parse {
        context: "log line".into(),
        message: msg,
    };
    let s = line.trim();
    let (tuple, warn) = match s.strip_suffix("WARN") {
        Some(rest) => (rest.trim(), true),
        None => (s, false),
    };
    let inner = tuple
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| err(format!("not a bracketed tuple: {line}")))?;
    let parts: Vec<&str> = inner.split(',').map(|t| t.trim()).collect();
    if parts.len() != 3 {
        return Err(err(format!("expected 3 fields: {line}")));
    }
    Ok(LogLine {
        p: parts[0].parse().map_err(|e| err(format!("bad p: {e}")))?,
        trunc_deg: parts[1].parse().map_err(|e| err(format!("bad trunc_deg: {e}")))?,
        m_bound: parts[2].parse().map_err(|e| err(format!("bad M: {e}")))?,
        warn,
    })
}

/// Append log lines (ascending p within one run).
pub fn write_log(lines: &[LogLine], outdir: &Path, label: &str) -> Result<PathBuf> {
    let path = log_path(outdir, label);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(
        std::fs::OpenOptions::new().create(true).append(true).open(&path)?,
    );
    for l in lines {
        writeln!(out, "{}", format_log_line(l))?;
    }
    Ok(path)
}

/// One compute run: operator, prime-index range, and knobs.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub label: String,
    pub operator: String,
    /// inclusive range of prime indices (1-based: index 4 is p=7)
    pub n_min: usize,
    pub n_max: usize,
    /// optional override of the operator's truncation constant C
    pub scaling: Option<(i64, i64)>,
    /// optional working-accuracy override (pacc_init)
    pub acc: Option<i64>,
    pub nadd: usize,
    pub outdir: PathBuf,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Usage(format!(
                "bad prime-index range {}:{} (1-based, n_min <= n_max)",
                self.n_min, self.n_max
            )));
        }
        if self.nadd > 0 && self.acc.is_none() {
            return Err(Error::Usage(
                "nadd > 0 requires an explicit accuracy (the default bound may not cover the \
                 trailing coefficients); pass --acc"
                    .into(),
            ));
        }
        if self.label.is_empty() || self.label.contains(['/', ' ']) {
            return Err(Error::Usage(format!("bad label '{}'", self.label)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk(p: u64, phi: u64, coeffs: &[i64], flag: Flag) -> EulerFactorRecord {
        EulerFactorRecord {
            p,
            phi_star: phi,
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            flag,
            full: None,
        }
    }

    #[test]
    fn record_round_trip() {
        let recs = vec![
            mk(7, 2, &[4, 55], Flag::Good),
            mk(7, 5, &[], Flag::Conifold),
            mk(11, 3, &[], Flag::OtherSingular),
            mk(13, 1, &[-35, 805], Flag::Good),
        ];
        for rec in &recs {
            let line = format_record(rec);
            assert_eq!(&parse_record(&line).unwrap(), rec);
        }
        assert_eq!(format_record(&recs[0]), "[7, 2, [4, 55]]");
        assert_eq!(format_record(&recs[1]), "[7, 5, [], C]");
        assert_eq!(format_record(&recs[2]), "[11, 3, [], 0]");
    }

    #[test]
    fn log_round_trip() {
        let l1 = LogLine { p: 7, trunc_deg: 6, m_bound: 9, warn: false };
        let l2 = LogLine { p: 7, trunc_deg: 8, m_bound: 9, warn: true };
        assert_eq!(format_log_line(&l1), "[7, 6, 9]");
        assert_eq!(format_log_line(&l2), "[7, 8, 9] WARN");
        for l in [l1, l2] {
            assert_eq!(parse_log_line(&format_log_line(&l)).unwrap(), l);
        }
    }

    #[test]
    fn outputs_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            mk(11, 3, &[1, 2], Flag::Good),
            mk(7, 5, &[], Flag::Conifold),
            mk(7, 2, &[4, 55], Flag::Good),
        ];
        let path = write_outputs(&recs, dir.path(), "test").unwrap();
        assert!(path.ends_with("outputs/outputs_test.txt"));
        let back = read_outputs(&path).unwrap();
        // written sorted by (p, phi*)
        assert_eq!(back[0], recs[2]);
        assert_eq!(back[1], recs[1]);
        assert_eq!(back[2], recs[0]);
        // deterministic bytes
        let bytes1 = std::fs::read(&path).unwrap();
        write_outputs(&recs, dir.path(), "test").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes1);
    }

    #[test]
    fn manifest_validation() {
        let base = RunManifest {
            label: "x".into(),
            operator: "op".into(),
            n_min: 4,
            n_max: 10,
            scaling: None,
            acc: None,
            nadd: 0,
            outdir: PathBuf::from("."),
        };
        assert!(base.validate().is_ok());
        let mut bad = base.clone();
        bad.nadd = 3;
        assert!(bad.validate().is_err());
        bad.acc = Some(9);
        assert!(bad.validate().is_ok());
        let mut bad2 = base.clone();
        bad2.n_min = 7;
        bad2.n_max = 4;
        assert!(bad2.validate().is_err());
    }
}
