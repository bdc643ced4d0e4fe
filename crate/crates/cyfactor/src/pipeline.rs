//! Per-prime orchestration: accuracy selection, assembly, evaluation, and the
//! compute loop over a prime-index range.

use crate::error::{Error, Result};
use crate::evaluate::{evaluate_all_points, EulerFactorRecord};
use crate::frobenius::{assemble_u_numerator, PeriodSource};
use crate::io::{LogLine, RunManifest};
use crate::operator::{derive_recurrence, CYOperator, RecurrenceTable};
use crate::recurrence::{accuracy_bound, target_accuracy_b, BoundMode};
use rayon::prelude::*;

/// Simple deterministic primality test (p < 2^63 via trial division up to
/// sqrt; inputs here are modest).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The n-th prime, 1-based (nth_prime(1) = 2, nth_prime(4) = 7).
pub fn nth_prime(n: usize) -> u64 {
    assert!(n >= 1);
    let mut count = 0usize;
    let mut x = 1u64;
    loop {
        x += 1;
        if is_prime(x) {
            count += 1;
            if count == n {
                return x;
            }
        }
    }
}

/// Primes with 1-based indices in [n_min, n_max].
pub fn primes_in_index_range(n_min: usize, n_max: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n_max - n_min + 1);
    let mut count = 0usize;
    let mut x = 1u64;
    while count < n_max {
        x += 1;
        if is_prime(x) {
            count += 1;
            if count >= n_min {
                out.push(x);
            }
        }
    }
    out
}

fn poly_mod_p(q: &[num_bigint::BigInt], p: u64) -> Vec<u64> {
    let mut v: Vec<u64> = q
        .iter()
        .map(|c| {
            let mut r = c % num_bigint::BigInt::from(p);
            if r.sign() == num_bigint::Sign::Minus {
                r += num_bigint::BigInt::from(p);
            }
            u64::try_from(r).unwrap()
        })
        .collect();
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn poly_gcd_degree_mod_p(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    fn trim(v: &mut Vec<u64>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        // a <- a mod b (the chosen factor always cancels the leading term)
        let lead_inv = crate::padic::mod_pow_u64(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let shift = a.len() - b.len();
            let factor = a.last().unwrap() * lead_inv % p;
            for (i, c) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p - factor * c % p) % p;
            }
            if a.len() == 1 {
                a[0] = 0;
            } else {
                a.pop();
                trim(&mut a);
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() - 1
}

/// A prime is good for the operator when p >= 5, p > ceil(C), and every
/// singular-locus polynomial stays squarefree mod p (colliding singular
/// fibers signal bad reduction of the family).
pub fn operator_good_prime(op: &CYOperator, p: u64) -> bool {
    if p < 5 || p <= op.ceil_c() {
        return false;
    }
    let mut loci: Vec<&[num_bigint::BigInt]> =
        vec![&op.conifold_locus, &op.apparent_sing_locus];
    for l in &op.other_sing_loci {
        loci.push(l.as_slice());
    }
    for locus in loci {
        let f = poly_mod_p(locus, p);
        if f.len() == 1 {
            if f[0] == 0 && locus.iter().any(|c| !num_traits::Zero::is_zero(c)) {
                return false; // nonzero locus vanishes identically mod p
            }
            continue;
        }
        let fp: Vec<u64> = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| i as u64 % p * c % p)
            .collect();
        if poly_gcd_degree_mod_p(f, fp, p) > 0 {
            return false; // repeated root mod p
        }
    }
    true
}

/// The first `count` primes >= `from` that are good for the operator.
pub fn usable_primes(op: &CYOperator, from: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut x = from.max(2) - 1;
    while out.len() < count {
        x += 1;
        if is_prime(x) && operator_good_prime(op, x) {
            out.push(x);
        }
    }
    out
}

pub struct PrimeRun {
    pub records: Vec<EulerFactorRecord>,
    pub log: LogLine,
}

/// Full pipeline for one prime: B and A selection, assembly, all-points
/// evaluation, log record.
pub fn run_prime(
    op: &CYOperator,
    table: &RecurrenceTable,
    p: u64,
    acc_override: Option<i64>,
    nadd: usize,
    source: PeriodSource,
) -> Result<PrimeRun> {
    if p < 5 || p <= op.ceil_c() {
        return Err(Error::Usage(format!(
            "prime {p} refused: need p >= 5 and p > ceil(C) = {}",
            op.ceil_c()
        )));
    }
    let big_b = target_accuracy_b(op.order_b, p);
    let a_acc = acc_override.unwrap_or_else(|| {
        accuracy_bound(op.order_b, op.trunc_const_c, big_b, 0, 0, BoundMode::Universal)
    });
    let asm = assemble_u_numerator(op, table, p, big_b, a_acc, nadd, 0, source)?;
    let warn = asm.numerator.warn(op.ceil_cp(p));
    let log = LogLine {
        p,
        trunc_deg: asm.numerator.trunc_deg,
        m_bound: asm.numerator.m_bound,
        warn,
    };
    let records = evaluate_all_points(&asm.numerator, op, table)?;
    Ok(PrimeRun { records, log })
}

pub struct ComputeOutcome {
    pub records: Vec<EulerFactorRecord>,
    pub logs: Vec<LogLine>,
    /// primes skipped with a diagnostic (singular-prime conditions)
    pub skipped: Vec<(u64, String)>,
}

/// Compute over the manifest's prime-index range; primes run concurrently,
/// results are ordered by (p, phi*).
pub fn run_compute(op: &CYOperator, manifest: &RunManifest) -> Result<ComputeOutcome> {
    manifest.validate()?;
    let mut op = op.clone();
    if let Some(c) = manifest.scaling {
        op.trunc_const_c = c;
    }
    let table = derive_recurrence(&op);
    let primes = primes_in_index_range(manifest.n_min, manifest.n_max);
    for &p in &primes {
        if p < 5 || p <= op.ceil_c() {
            return Err(Error::Usage(format!(
                "prime {p} in range refused: need p >= 5 and p > ceil(C) = {}",
                op.ceil_c()
            )));
        }
    }
    let results: Vec<(u64, Result<PrimeRun>)> = primes
        .par_iter()
        .map(|&p| {
            (
                p,
                run_prime(&op, &table, p, manifest.acc, manifest.nadd, PeriodSource::Truncated),
            )
        })
        .collect();
    let mut records = Vec::new();
    let mut logs = Vec::new();
    let mut skipped = Vec::new();
    for (p, res) in results {
        match res {
            Ok(run) => {
                records.extend(run.records);
                logs.push(run.log);
            }
            Err(Error::SingularPrime { p, message }) => skipped.push((p, message)),
            Err(e) => return Err(Error::Integrity(format!("p={p}: {e}"))),
        }
    }
    records.sort_by_key(|r| (r.p, r.phi_star));
    logs.sort_by_key(|l| l.p);
    Ok(ComputeOutcome {
        records,
        logs,
        skipped,
    })
}
