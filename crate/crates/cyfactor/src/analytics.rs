//! Sato-Tate statistics: trace gathering, moments, classification against the
//! four closed-form trace distributions, histograms, Hecke-eigenvalue mapping
//! and Euler-factor export.

use crate::error::{Error, Result};
use crate::evaluate::{EulerFactorRecord, Flag};
use crate::padic::inv_mod;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use std::f64::consts::PI;

pub type MomentVector = [f64; 6];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionClass {
    Batman,
    Wing,
    FlyingBatman,
    ShiftedSemicircle,
}

pub const ALL_CLASSES: [DistributionClass; 4] = [
    DistributionClass::Batman,
    DistributionClass::Wing,
    DistributionClass::FlyingBatman,
    DistributionClass::ShiftedSemicircle,
];

impl DistributionClass {
    pub fn label(&self) -> &'static str {
        match self {
            DistributionClass::Batman => "Batman",
            DistributionClass::Wing => "Wing",
            DistributionClass::FlyingBatman => "FlyingBatman",
            DistributionClass::ShiftedSemicircle => "ShiftedSemicircle",
        }
    }

    pub fn target_moments(&self) -> MomentVector {
        match self {
            DistributionClass::Batman => [1.0, 0.0, 1.0, 0.0, 3.0, 0.0],
            DistributionClass::Wing => [1.0, 0.0, 1.0, -1.0, 3.0, -6.0],
            DistributionClass::FlyingBatman => [1.0, 0.0, 2.0, 0.0, 10.0, 0.0],
            DistributionClass::ShiftedSemicircle => [1.0, -1.0, 2.0, -4.0, 10.0, -26.0],
        }
    }
}

/// For each of the first `prime_count` primes not dividing s (ascending p),
/// pick the record at phi* = r * s^{-1} mod p; flagged points and points with
/// r = 0 mod p are skipped.
pub fn gather_traces(
    records_by_prime: &[Vec<EulerFactorRecord>],
    r: i64,
    s: i64,
    prime_count: usize,
) -> Result<Vec<(u64, f64)>> {
    if s == 0 {
        return Err(Error::Usage("phi = r/s needs s != 0".into()));
    }
    let mut out = Vec::new();
    let mut primes_used = 0usize;
    for recs in records_by_prime {
        if primes_used >= prime_count {
            break;
        }
        let p = match recs.first() {
            Some(rec) => rec.p,
            None => continue,
        };
        if s.unsigned_abs() % p == 0 {
            continue;
        }
        let rr = (r.rem_euclid(p as i64)) as u64;
        if rr == 0 {
            continue;
        }
        primes_used += 1;
        let ss = (s.rem_euclid(p as i64)) as u64;
        let sinv = inv_mod(&BigUint::from(ss), &BigUint::from(p))
            .expect("s unit mod p")
            .to_u64()
            .unwrap();
        let phi_star = (rr as u128 * sinv as u128 % p as u128) as u64;
        let Some(rec) = recs.iter().find(|rec| rec.phi_star == phi_star) else {
            continue;
        };
        if rec.flag != Flag::Good {
            continue;
        }
        let a1 = rec.coeffs[0].to_f64().ok_or_else(|| {
            Error::Integrity(format!("p={p}: trace too large for f64 statistics"))
        })?;
        out.push((p, a1));
    }
    Ok(out)
}

/// Moments of normalized traces x = a^(1) / p^((b-1)/2).
pub fn compute_moments(traces: &[(u64, f64)], b: u32) -> Result<MomentVector> {
    if traces.is_empty() {
        return Err(Error::Usage("compute_moments needs a nonempty trace list".into()));
    }
    let mut m = [0.0f64; 6];
    for &(p, a1) in traces {
        let x = a1 / (p as f64).powf((b as f64 - 1.0) / 2.0);
        let mut xp = 1.0;
        for mj in m.iter_mut() {
            *mj += xp;
            xp *= x;
        }
    }
    for mj in m.iter_mut() {
        *mj /= traces.len() as f64;
    }
    Ok(m)
}

/// Nearest class by squared Euclidean moment distance.
pub fn classify_distribution(m: &MomentVector) -> (DistributionClass, f64) {
    let mut best = (DistributionClass::Batman, f64::INFINITY);
    for class in ALL_CLASSES {
        let t = class.target_moments();
        let d: f64 = m.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (class, d);
        }
    }
    best
}

/// Continuous part of the trace density (Dirac masses reported separately by
/// `point_masses`). Outside the support the density is 0.
pub fn density(x: f64, class: DistributionClass) -> f64 {
    let sq = |v: f64| if v > 0.0 { v.sqrt() } else { 0.0 };
    match class {
        DistributionClass::ShiftedSemicircle => {
            // 1/(2 pi sqrt(4 - (x+1)^2)) on (-3, 1)
            if x > -3.0 && x < 1.0 {
                let d = 4.0 - (x + 1.0) * (x + 1.0);
                if d > 0.0 {
                    1.0 / (2.0 * PI * sq(d))
                } else {
                    0.0
                }
            } else {
                0.0
            }
        }
        DistributionClass::FlyingBatman => {
            let ax = x.abs();
            if ax < 1.0 {
                1.0 / (4.0 * PI * sq(3.0 - 2.0 * x - x * x))
                    + 1.0 / (4.0 * PI * sq(3.0 + 2.0 * x - x * x))
            } else if ax < 3.0 {
                1.0 / (4.0 * PI * sq(3.0 + 2.0 * ax - ax * ax))
            } else {
                0.0
            }
        }
        DistributionClass::Batman => {
            let ax = x.abs();
            if ax < 1.0 {
                (3.0 + x) / (4.0 * PI * sq(3.0 - 2.0 * x - x * x))
                    + (3.0 - x) / (4.0 * PI * sq(3.0 + 2.0 * x - x * x))
            } else if ax < 3.0 {
                (3.0 - ax) / (4.0 * PI * sq(3.0 + 2.0 * ax - ax * ax))
            } else {
                0.0
            }
        }
        DistributionClass::Wing => {
            // (1/2pi) sqrt((3+x)/(1-x)) on [-3, 1)
            if x > -3.0 && x < 1.0 {
                sq((3.0 + x) / (1.0 - x)) / (2.0 * PI)
            } else {
                0.0
            }
        }
    }
}

/// Dirac masses (location, weight) of the class.
pub fn point_masses(class: DistributionClass) -> Vec<(f64, f64)> {
    match class {
        DistributionClass::ShiftedSemicircle => vec![(-1.0, 0.5)],
        DistributionClass::FlyingBatman => vec![(-1.0, 0.25), (1.0, 0.25)],
        _ => Vec::new(),
    }
}

/// Interval boundaries where the continuous part is smooth.
fn smooth_pieces(class: DistributionClass) -> Vec<(f64, f64)> {
    match class {
        DistributionClass::ShiftedSemicircle | DistributionClass::Wing => vec![(-3.0, 1.0)],
        _ => vec![(-3.0, -1.0), (-1.0, 1.0), (1.0, 3.0)],
    }
}

/// Tanh-sinh quadrature on (a, b); robust against inverse-square-root
/// endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let h = 1e-3;
    let tmax = 4.0;
    let mut sum = 0.0;
    let n = (tmax / h) as i64;
    for i in -n..=n {
        let t = i as f64 * h;
        let u = (0.5 * PI * t.sinh()).tanh();
        let x = mid + half * u;
        if x <= a || x >= b {
            continue;
        }
        let w = 0.5 * PI * t.cosh() / (0.5 * PI * t.sinh()).cosh().powi(2);
        let v = f(x);
        if v.is_finite() {
            sum += v * w;
        }
    }
    sum * h * half
}

/// k-th moment of a class: quadrature over the continuous part plus the
/// point-mass contributions.
pub fn density_moment(class: DistributionClass, k: u32) -> f64 {
    let mut total = 0.0;
    for (a, b) in smooth_pieces(class) {
        total += tanh_sinh(|x| x.powi(k as i32) * density(x, class), a, b);
    }
    for (x, m) in point_masses(class) {
        total += m * x.powi(k as i32);
    }
    total
}

pub const HISTOGRAM_BINS: usize = 70;
pub const HISTOGRAM_RANGE: (f64, f64) = (-3.0, 3.0);

/// Relative-abundance histogram of normalized traces, 70 bins on [-3, 3].
pub fn histogram(traces: &[(u64, f64)], b: u32) -> Vec<f64> {
    let (lo, hi) = HISTOGRAM_RANGE;
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut bins = vec![0.0f64; HISTOGRAM_BINS];
    let mut total = 0usize;
    for &(p, a1) in traces {
        let x = a1 / (p as f64).powf((b as f64 - 1.0) / 2.0);
        if x < lo || x > hi {
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        bins[idx] += 1.0;
        total += 1;
    }
    if total > 0 {
        for v in bins.iter_mut() {
            *v /= total as f64;
        }
    }
    bins
}

/// Draw synthetic samples from a class (continuous CDF table + point masses);
/// used to validate that classification recovers the generating class.
pub fn sample_class(class: DistributionClass, count: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // CDF on a fine grid of the continuous part
    let grid = 60_000usize;
    let (lo, hi) = (-3.0f64, 3.0f64);
    let step = (hi - lo) / grid as f64;
    let mut cdf = Vec::with_capacity(grid + 1);
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 0..grid {
        let x = lo + (i as f64 + 0.5) * step;
        acc += density(x, class) * step;
        cdf.push(acc);
    }
    let cont_mass = acc;
    let masses = point_masses(class);
    let discrete: f64 = masses.iter().map(|(_, m)| m).sum();
    let total = cont_mass + discrete;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen_range(0.0..total);
        if u < discrete {
            let mut t = u;
            let mut x = masses[0].0;
            for (loc, m) in &masses {
                if t < *m {
                    x = *loc;
                    break;
                }
                t -= m;
            }
            out.push(x);
        } else {
            let target = u - discrete;
            let idx = cdf.partition_point(|&c| c < target).min(grid);
            out.push(lo + idx as f64 * step);
        }
    }
    out
}

// ----------------------------------------------------------------------------
// Export
// ----------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Native,
    EulerFactors,
    HistogramCsv,
}

/// Export records (or their histogram) to a file. The native format is the
/// same line shape the compute command writes; the Euler-factor list emits
/// `p a0 a1 ... ab` per good record, ascending p; the histogram CSV writes
/// `bin_lo,bin_hi,relative_abundance` rows plus a `<path>.masses` sidecar.
pub fn export_records(
    records: &[EulerFactorRecord],
    format: ExportFormat,
    b: u32,
    path: &std::path::Path,
) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        ExportFormat::Native => {
            for rec in records {
                writeln!(out, "{}", crate::io::format_record(rec))?;
            }
        }
        ExportFormat::EulerFactors => {
            for rec in records {
                if rec.flag != Flag::Good {
                    continue;
                }
                let full = rec.full.as_ref().ok_or_else(|| {
                    Error::Usage("Euler-factor export needs completed coefficient lists".into())
                })?;
                let coeffs: Vec<String> = full.iter().map(|c| c.to_string()).collect();
                writeln!(out, "{} {}", rec.p, coeffs.join(" "))?;
            }
        }
        ExportFormat::HistogramCsv => {
            let traces: Vec<(u64, f64)> = records
                .iter()
                .filter(|r| r.flag == Flag::Good)
                .filter_map(|r| r.coeffs[0].to_f64().map(|a| (r.p, a)))
                .collect();
            let bins = histogram(&traces, b);
            let (lo, hi) = HISTOGRAM_RANGE;
            let width = (hi - lo) / HISTOGRAM_BINS as f64;
            writeln!(out, "bin_lo,bin_hi,relative_abundance")?;
            for (i, v) in bins.iter().enumerate() {
                writeln!(
                    out,
                    "{:.6},{:.6},{:.8}",
                    lo + i as f64 * width,
                    lo + (i + 1) as f64 * width,
                    v
                )?;
            }
            let m = compute_moments(&traces, b)?;
            let (class, _) = classify_distribution(&m);
            let side = path.with_extension("masses");
            let mut sf = std::io::BufWriter::new(std::fs::File::create(side)?);
            writeln!(sf, "x,mass")?;
            for (x, mass) in point_masses(class) {
                writeln!(sf, "{x},{mass}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn densities_normalized() {
        for class in ALL_CLASSES {
            let total = density_moment(class, 0);
            assert!((total - 1.0).abs() < 1e-6, "{}: {total}", class.label());
        }
    }

    #[test]
    fn density_moments_match_targets() {
        for class in ALL_CLASSES {
            let want = class.target_moments();
            for k in 0..6u32 {
                let m = density_moment(class, k);
                assert!(
                    (m - want[k as usize]).abs() < 1e-6,
                    "{} moment {k}: {m} vs {}",
                    class.label(),
                    want[k as usize]
                );
            }
        }
    }

    #[test]
    fn batman_value_at_zero() {
        let want = 3.0_f64.sqrt() / (2.0 * PI);
        assert!((density(0.0, DistributionClass::Batman) - want).abs() < 1e-12);
        assert_eq!(density(3.5, DistributionClass::Batman), 0.0);
        assert_eq!(density(3.5, DistributionClass::Wing), 0.0);
    }

    #[test]
    fn constant_trace_moments() {
        // b=3, all x = -1 (a1 = -p)
        let traces: Vec<(u64, f64)> = [5u64, 7, 11].iter().map(|&p| (p, -(p as f64))).collect();
        let m = compute_moments(&traces, 3).unwrap();
        let want = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        for (a, b) in m.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(compute_moments(&[], 3).is_err());
    }

    #[test]
    fn classify_exact_targets() {
        for class in ALL_CLASSES {
            let (got, d) = classify_distribution(&class.target_moments());
            assert_eq!(got, class);
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn classification_recovers_sampled_class() {
        for (i, class) in ALL_CLASSES.iter().enumerate() {
            let samples = sample_class(*class, 100_000, 1000 + i as u64);
            // fake traces at p=1 so normalization is a no-op
            let traces: Vec<(u64, f64)> = samples.iter().map(|&x| (1, x)).collect();
            let m = compute_moments(&traces, 3).unwrap();
            let (got, d) = classify_distribution(&m);
            assert_eq!(got, *class, "distance {d}, moments {m:?}");
            assert!(d < 2.0, "{}: {d}", class.label());
        }
    }

    #[test]
    fn gather_selects_inverse_point() {
        // r/s = 1/8 at p=11 -> phi* = 7
        let mk = |p: u64, phi: u64| EulerFactorRecord {
            p,
            phi_star: phi,
            coeffs: vec![BigInt::from(1), BigInt::from(0)],
            flag: Flag::Good,
            full: None,
        };
        let recs11: Vec<EulerFactorRecord> = (1..11).map(|x| mk(11, x)).collect();
        let traces = gather_traces(&[recs11], 1, 8, 5).unwrap();
        assert_eq!(traces.len(), 1);
        // p=7 with s=7 is skipped entirely
        let recs7: Vec<EulerFactorRecord> = (1..7).map(|x| mk(7, x)).collect();
        let traces = gather_traces(&[recs7], 1, 7, 5).unwrap();
        assert!(traces.is_empty());
    }

    #[test]
    fn histogram_shape() {
        let traces: Vec<(u64, f64)> = (0..10).map(|i| (1u64, -2.9 + 0.6 * i as f64)).collect();
        let h = histogram(&traces, 3);
        assert_eq!(h.len(), 70);
        let total: f64 = h.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
