//! Command-line driver: compute Euler factors over prime ranges, validate
//! operators, run Sato-Tate statistics, benchmark the three computation
//! modes, and export records.

use clap::{Args, Parser, Subcommand};
use cyfactor::analytics::{self, ExportFormat};
use cyfactor::bench::{bench_prime, write_bench_csv, BenchMode};
use cyfactor::error::{Error, Result};
use cyfactor::evaluate::EulerFactorRecord;
use cyfactor::io::{
    find_operator, load_operators, read_outputs, write_log, write_outputs, RunManifest,
};
use cyfactor::operator::validate_operator;
use cyfactor::pipeline::{primes_in_index_range, run_compute};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "cyfactor", about = "Euler factors of Calabi-Yau operators by the deformation method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DbArg {
    /// operator database file
    #[arg(long, default_value = "data/operators.txt")]
    db: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Euler factors for all points of F_p* over a prime-index range
    Compute {
        #[arg(long)]
        operator: String,
        /// inclusive 1-based prime-index range, e.g. 4:25 for p in [7, 97]
        #[arg(long)]
        primes: String,
        #[arg(long)]
        label: String,
        /// override the truncation constant C, e.g. 4/5
        #[arg(long)]
        scaling: Option<String>,
        /// working accuracy override (required when nadd > 0)
        #[arg(long)]
        acc: Option<i64>,
        /// extra trailing coefficients for the termination check
        #[arg(long, default_value_t = 0)]
        nadd: usize,
        /// worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
        #[command(flatten)]
        db: DbArg,
    },
    /// Check MUM normalization, integrality, and self-duality of an operator
    Validate {
        #[arg(long)]
        operator: String,
        /// series order for the integrality and self-duality checks
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[command(flatten)]
        db: DbArg,
    },
    /// Sato-Tate moment statistics and classification at a rational point
    Stats {
        /// output files produced by `compute`
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// rational point phi = r/s
        #[arg(long)]
        point: String,
        /// number of primes to use
        #[arg(long)]
        primes: usize,
        /// operator order b (trace normalization is p^((b-1)/2))
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Compare wall time and peak memory of the three computation modes
    Bench {
        #[arg(long)]
        operator: String,
        #[arg(long)]
        primes: String,
        /// comma-separated subset of exact_rational, truncated_rational, truncated_recurrence
        #[arg(long, default_value = "exact_rational,truncated_rational,truncated_recurrence")]
        modes: String,
        #[arg(long, default_value_t = 3)]
        nadd: usize,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
        #[command(flatten)]
        db: DbArg,
    },
    /// Re-export computed records in other formats
    Export {
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// native | euler-factors | histogram
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
}

fn parse_ratio(s: &str) -> Result<(i64, i64)> {
    let err = |m: String| Error::Usage(m);
    match s.split_once('/') {
        Some((a, b)) => Ok((
            a.trim().parse().map_err(|e| err(format!("bad ratio '{s}': {e}")))?,
            b.trim().parse().map_err(|e| err(format!("bad ratio '{s}': {e}")))?,
        )),
        None => Ok((s.trim().parse().map_err(|e| err(format!("bad ratio '{s}': {e}")))?, 1)),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Usage(format!("bad prime range '{s}', expected n_min:n_max")))?;
    Ok((
        a.parse().map_err(|e| Error::Usage(format!("bad range '{s}': {e}")))?,
        b.parse().map_err(|e| Error::Usage(format!("bad range '{s}': {e}")))?,
    ))
}

fn group_by_prime(records: Vec<EulerFactorRecord>) -> Vec<Vec<EulerFactorRecord>> {
    let mut map: BTreeMap<u64, Vec<EulerFactorRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.p).or_default().push(r);
    }
    map.into_values().collect()
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute {
            operator,
            primes,
            label,
            scaling,
            acc,
            nadd,
            workers,
            outdir,
            db,
        } => {
            if let Some(w) = workers {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build_global()
                    .map_err(|e| Error::Usage(format!("worker pool: {e}")))?;
            }
            let ops = load_operators(&db.db)?;
            let op = find_operator(&ops, &operator)?;
            let (n_min, n_max) = parse_range(&primes)?;
            let scaling = scaling.as_deref().map(parse_ratio).transpose()?;
            let manifest = RunManifest {
                label: label.clone(),
                operator,
                n_min,
                n_max,
                scaling,
                acc,
                nadd,
                outdir: outdir.clone(),
            };
            let out = run_compute(op, &manifest)?;
            let opath = write_outputs(&out.records, &outdir, &label)?;
            let lpath = write_log(&out.logs, &outdir, &label)?;
            for (p, msg) in &out.skipped {
                eprintln!("skipped p={p}: {msg}");
            }
            println!(
                "{} records over {} primes -> {} (log {})",
                out.records.len(),
                out.logs.len(),
                opath.display(),
                lpath.display()
            );
            Ok(())
        }
        Command::Validate { operator, depth, db } => {
            let ops = load_operators(&db.db)?;
            let op = find_operator(&ops, &operator)?;
            let rep = validate_operator(op, 1, depth);
            println!("operator:     {}", op.name);
            println!("mum:          {}", if rep.mum_ok { "ok" } else { "FAIL" });
            println!("integrality:  {}", if rep.integrality_ok { "ok" } else { "FAIL" });
            println!("self-duality: {}", if rep.self_duality_ok { "ok" } else { "FAIL" });
            for note in &rep.notes {
                println!("note: {note}");
            }
            if rep.all_ok() {
                Ok(())
            } else {
                Err(Error::Validation(format!("operator {} fails validation", op.name)))
            }
        }
        Command::Stats {
            inputs,
            point,
            primes,
            order,
        } => {
            let mut records = Vec::new();
            for path in &inputs {
                records.extend(read_outputs(path)?);
            }
            let by_prime = group_by_prime(records);
            let (r, s) = parse_ratio(&point)?;
            let traces = analytics::gather_traces(&by_prime, r, s, primes)?;
            let m = analytics::compute_moments(&traces, order)?;
            let (class, dist) = analytics::classify_distribution(&m);
            println!("point:    {r}/{s}");
            println!("traces:   {}", traces.len());
            println!(
                "moments:  [{}]",
                m.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
            );
            println!("class:    {} (squared distance {dist:.4})", class.label());
            if dist >= 2.0 {
                println!("warning:  distance exceeds the classification threshold 2");
            }
            Ok(())
        }
        Command::Bench {
            operator,
            primes,
            modes,
            nadd,
            out,
            db,
        } => {
            let ops = load_operators(&db.db)?;
            let op = find_operator(&ops, &operator)?;
            let modes: Vec<BenchMode> = modes
                .split(',')
                .map(|m| BenchMode::parse(m.trim()))
                .collect::<Result<_>>()?;
            let (n_min, n_max) = parse_range(&primes)?;
            let mut rows = Vec::new();
            for p in primes_in_index_range(n_min, n_max) {
                if p < 5 || p <= op.ceil_c() {
                    eprintln!("skipping p={p} (below the supported range)");
                    continue;
                }
                match bench_prime(op, p, nadd, &modes) {
                    Ok(r) => rows.extend(r),
                    Err(e) => eprintln!("p={p}: {e}"),
                }
            }
            write_bench_csv(&rows, &out)?;
            println!("{} rows -> {}", rows.len(), out.display());
            Ok(())
        }
        Command::Export {
            inputs,
            format,
            out,
            order,
        } => {
            let mut records = Vec::new();
            for path in &inputs {
                records.extend(read_outputs(path)?);
            }
            records.sort_by_key(|r| (r.p, r.phi_star));
            let fmt = match format.as_str() {
                "native" => ExportFormat::Native,
                "euler-factors" => ExportFormat::EulerFactors,
                "histogram" => ExportFormat::HistogramCsv,
                other => {
                    return Err(Error::Usage(format!(
                        "unknown format '{other}' (native, euler-factors, histogram)"
                    )))
                }
            };
            if fmt == ExportFormat::EulerFactors {
                // parsed records carry no completed list; rebuild it
                for rec in records.iter_mut() {
                    if rec.flag == cyfactor::evaluate::Flag::Good {
                        rec.full = Some(complete_coefficients(rec, order)?);
                    }
                }
            }
            analytics::export_records(&records, fmt, order, &out)?;
            println!("exported {} records -> {}", records.len(), out.display());
            Ok(())
        }
    }
}

/// Rebuild a0..ab from a parsed (a1, a2) record via the functional equation.
fn complete_coefficients(rec: &EulerFactorRecord, b: u32) -> Result<Vec<num_bigint::BigInt>> {
    use num_bigint::BigInt;
    let p = BigInt::from(rec.p);
    let (a1, a2) = (&rec.coeffs[0], &rec.coeffs[1]);
    match b {
        4 => Ok(vec![
            BigInt::from(1),
            a1.clone(),
            a2.clone(),
            a1 * p.pow(3),
            p.pow(6),
        ]),
        3 => {
            let (eps, _) = cyfactor::evaluate::split_k3(rec)?;
            Ok(vec![
                BigInt::from(1),
                a1.clone(),
                a2.clone(),
                BigInt::from(eps) * p.pow(3),
            ])
        }
        _ => Err(Error::Usage(format!("unsupported order {b}"))),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
