//! Benchmark harness comparing the three Euler-factor computation modes:
//! exact rational periods carried through the assembly, rational periods
//! reduced coefficient-wise before assembly, and the p-adically truncated
//! recurrence. Reports wall time and logical peak memory per (mode, prime)
//! and asserts cross-mode equality of the resulting numerators.

use crate::error::{Error, Result};
use crate::frobenius::{
    alpha_vector, assemble_u_numerator, build_u0, mulmod_u128, sigma, PeriodSource, UNumerator,
};
use crate::operator::{derive_recurrence, CYOperator};
use crate::padic::{ScaledPadic, Zp};
use crate::recurrence::{accuracy_bound, rational_table_bytes, target_accuracy_b, BoundMode};
use crate::series::{rat_mat_mul, rat_series_matrix_invert, rat_zero, RatMat};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    ExactRational,
    TruncatedRational,
    TruncatedRecurrence,
}

impl BenchMode {
    pub fn label(&self) -> &'static str {
        match self {
            BenchMode::ExactRational => "exact_rational",
            BenchMode::TruncatedRational => "truncated_rational",
            BenchMode::TruncatedRecurrence => "truncated_recurrence",
        }
    }

    pub fn parse(s: &str) -> Result<BenchMode> {
        match s {
            "exact_rational" => Ok(BenchMode::ExactRational),
            "truncated_rational" => Ok(BenchMode::TruncatedRational),
            "truncated_recurrence" => Ok(BenchMode::TruncatedRecurrence),
            other => Err(Error::Usage(format!(
                "unknown bench mode '{other}' (expected exact_rational, truncated_rational, truncated_recurrence)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub mode: BenchMode,
    pub p: u64,
    pub m_bound: usize,
    pub wall_secs: f64,
    pub peak_bytes: usize,
}

fn numerator_bytes(num: &UNumerator) -> usize {
    num.num.iter().flatten().map(|entry| entry.len() * 16).sum()
}

/// Fully rational assembly: the period series, E, W^{-1} and E(phi^p)^{-1}
/// are carried as exact rationals; reduction mod p^B happens only at the
/// final U product. Returns the numerator and the logical peak bytes of the
/// rational tables.
fn assemble_exact_rational(
    op: &CYOperator,
    p: u64,
    big_b: u32,
    a_acc: i64,
    nadd: usize,
) -> Result<(UNumerator, usize)> {
    let b = op.order_b as usize;
    let table = derive_recurrence(op);
    let m_bound = op.ceil_cp(p) as usize + nadd;
    let modulus = BigUint::from(p).pow(big_b).to_u128().unwrap();
    let ctx = Zp::new(p, (a_acc + 8) as u32);
    let zeta_acc = (a_acc + 4) as u32;

    let f = crate::recurrence::run_exact_recurrence(&table, b - 1, m_bound);
    // full rational E: [E]^{i,k} = sum_j C(k,i-j) theta^{k+j-i} f_j
    let mut e: RatMat = vec![vec![rat_zero(m_bound); b]; b];
    for i in 0..b {
        for k in 0..b {
            for j in i.saturating_sub(k)..=i {
                let co = crate::padic::binomial(k as u64, (i - j) as u64);
                if co.is_zero() {
                    continue;
                }
                let co = BigRational::from_integer(co);
                let t = (k + j - i) as u32;
                for (n, c) in f[j].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let npow = BigRational::from_integer(BigInt::from(n as u64).pow(t));
                    e[i][k][n] += &co * npow * c;
                }
            }
        }
    }
    let peak = rational_table_bytes(&f)
        + e.iter()
            .map(|row| rational_table_bytes(row))
            .sum::<usize>();

    let alphas = alpha_vector(&ctx, op, zeta_acc, 0);
    let u0 = build_u0(&ctx, b, big_b as i64, &alphas)?;
    let sg = sigma(b);

    // T = E(phi^p)^{-1} U_p(0) as a ScaledPadic series with coefficients at
    // degrees m*p, m <= lc
    let lc = m_bound / p as usize;
    let mut t_coeffs: Vec<Vec<Vec<ScaledPadic>>> =
        vec![vec![vec![ScaledPadic::exact_zero(); lc + 1]; b]; b];
    if lc == 0 {
        for r in 0..b {
            for c in 0..b {
                t_coeffs[r][c][0] = u0[r][c].clone();
            }
        }
    } else {
        let e_small: RatMat = e
            .iter()
            .map(|row| row.iter().map(|s| s[..=lc].to_vec()).collect())
            .collect();
        // W = E^T sigma E
        let mut sig_e: RatMat = vec![vec![rat_zero(lc); b]; b];
        for r in 0..b {
            for c in 0..b {
                for j in 0..b {
                    if sg[r][j] != 0 {
                        let s = BigRational::from_integer(BigInt::from(sg[r][j]));
                        for n in 0..=lc {
                            let v = &e_small[j][c][n] * &s;
                            sig_e[r][c][n] += v;
                        }
                    }
                }
            }
        }
        let et: RatMat = (0..b)
            .map(|r| (0..b).map(|c| e_small[c][r].clone()).collect())
            .collect();
        let w = rat_mat_mul(&et, &sig_e, lc);
        let w_inv = rat_series_matrix_invert(&w).map_err(|_| Error::SingularPrime {
            p,
            message: "W(0) not invertible over the rationals".into(),
        })?;
        let prod = rat_mat_mul(&sig_e, &w_inv, lc);
        // einv = prod^T
        for r in 0..b {
            for c in 0..b {
                for m in 0..=lc {
                    let mut s = ScaledPadic::exact_zero();
                    for j in 0..b {
                        let v = ScaledPadic::from_ratio(&ctx, &prod[j][r][m]);
                        s = s.add(&ctx, &v.mul(&ctx, &u0[j][c]));
                    }
                    t_coeffs[r][c][m] = s;
                }
            }
        }
    }

    // U coefficients: U[r][c][q + m p] += T[r][j][m] * E[j][c][q]
    let mut num = vec![vec![vec![0u128; m_bound + 1]; b]; b];
    for q in 0..=m_bound {
        let e_q: Vec<Vec<ScaledPadic>> = (0..b)
            .map(|j| {
                (0..b)
                    .map(|c| ScaledPadic::from_ratio(&ctx, &e[j][c][q]))
                    .collect()
            })
            .collect();
        for m in 0..=lc {
            let out_deg = q + m * p as usize;
            if out_deg > m_bound {
                break;
            }
            for r in 0..b {
                for c in 0..b {
                    let mut s = ScaledPadic::exact_zero();
                    for j in 0..b {
                        s = s.add(&ctx, &t_coeffs[r][j][m].mul(&ctx, &e_q[j][c]));
                    }
                    if matches!(s, ScaledPadic::ExactZero) {
                        continue;
                    }
                    let res = s
                        .residue(&ctx, big_b as i64, "exact-mode U coefficient")?
                        .to_u128()
                        .unwrap();
                    num[r][c][out_deg] = (num[r][c][out_deg] + res) % modulus;
                }
            }
        }
    }
    // optional D(phi^p) factor, as in the production assembly
    let dpoly = crate::frobenius::denominator_poly(op);
    if dpoly.len() > 1 {
        let dres: Vec<u128> = dpoly
            .iter()
            .map(|c| {
                let mut r = c % BigInt::from(modulus);
                if r < BigInt::zero() {
                    r += BigInt::from(modulus);
                }
                r.to_u128().unwrap()
            })
            .collect();
        for r in 0..b {
            for c in 0..b {
                let mut out = vec![0u128; m_bound + 1];
                for (dn, dc) in dres.iter().enumerate() {
                    if *dc == 0 {
                        continue;
                    }
                    let shift = dn * p as usize;
                    if shift > m_bound {
                        break;
                    }
                    for n in 0..=(m_bound - shift) {
                        let v = mulmod_u128(num[r][c][n], *dc, modulus);
                        out[n + shift] = (out[n + shift] + v) % modulus;
                    }
                }
                num[r][c] = out;
            }
        }
    }

    let mut trunc_deg = 0usize;
    let mut nadd_ok = true;
    for row in &num {
        for entry in row {
            for (n, v) in entry.iter().enumerate() {
                if *v != 0 {
                    trunc_deg = trunc_deg.max(n);
                    if n > m_bound - nadd {
                        nadd_ok = false;
                    }
                }
            }
        }
    }
    if nadd == 0 {
        nadd_ok = true;
    }
    Ok((
        UNumerator {
            p,
            big_b,
            modulus,
            m_bound,
            trunc_deg,
            nadd,
            nadd_ok,
            num,
        },
        peak,
    ))
}

/// Run the requested modes on one prime; returns the rows and checks that
/// every mode produced the same numerator.
pub fn bench_prime(
    op: &CYOperator,
    p: u64,
    nadd: usize,
    modes: &[BenchMode],
) -> Result<Vec<BenchRow>> {
    let big_b = target_accuracy_b(op.order_b, p);
    let a_acc = accuracy_bound(op.order_b, op.trunc_const_c, big_b, 0, 0, BoundMode::Universal);
    let table = derive_recurrence(op);
    let mut rows = Vec::new();
    let mut reference: Option<UNumerator> = None;
    for &mode in modes {
        let start = Instant::now();
        let (num, table_bytes) = match mode {
            BenchMode::ExactRational => assemble_exact_rational(op, p, big_b, a_acc, nadd)?,
            BenchMode::TruncatedRational => {
                let asm = assemble_u_numerator(
                    op,
                    &table,
                    p,
                    big_b,
                    a_acc,
                    nadd,
                    0,
                    PeriodSource::ExactRational,
                )?;
                (asm.numerator, asm.period_table_bytes)
            }
            BenchMode::TruncatedRecurrence => {
                let asm = assemble_u_numerator(
                    op,
                    &table,
                    p,
                    big_b,
                    a_acc,
                    nadd,
                    0,
                    PeriodSource::Truncated,
                )?;
                (asm.numerator, asm.period_table_bytes)
            }
        };
        let wall = start.elapsed().as_secs_f64();
        let peak = table_bytes + numerator_bytes(&num);
        if let Some(r) = &reference {
            if r.num != num.num {
                return Err(Error::Integrity(format!(
                    "p={p}: mode {} disagrees with {}",
                    mode.label(),
                    modes[0].label()
                )));
            }
        } else {
            reference = Some(num.clone());
        }
        rows.push(BenchRow {
            mode,
            p,
            m_bound: num.m_bound,
            wall_secs: wall,
            peak_bytes: peak,
        });
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "mode,p,M,wall_secs,peak_bytes")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6},{}",
            r.mode.label(),
            r.p,
            r.m_bound,
            r.wall_secs,
            r.peak_bytes
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::parse_operator;

    fn quintic() -> CYOperator {
        parse_operator("quintic-4.1.1 | 4 | 1 | 0 -120 ; 0 -1250 ; 0 -4375 ; 0 -6250 ; 1 -3125 | 4/5 | -40 | 1 -3125 | 1 | - | 0 0").unwrap()
    }

    fn k3() -> CYOperator {
        parse_operator("k3-hv-2 | 3 | 2 | 0 -4 64 ; 0 -18 192 ; 0 -30 192 ; 1 -20 64 | 1 | - | 1 -20 64 | 1 | - | 0 0").unwrap()
    }

    #[test]
    fn three_modes_agree() {
        let modes = [
            BenchMode::ExactRational,
            BenchMode::TruncatedRational,
            BenchMode::TruncatedRecurrence,
        ];
        for op in [quintic(), k3()] {
            for p in [7u64, 11, 13, 31] {
                let rows = bench_prime(&op, p, 3, &modes).unwrap();
                assert_eq!(rows.len(), 3, "{} p={p}", op.name);
            }
        }
    }

    #[test]
    fn truncated_memory_below_exact() {
        let op = quintic();
        let modes = [BenchMode::ExactRational, BenchMode::TruncatedRecurrence];
        for p in [31u64, 61, 127] {
            let rows = bench_prime(&op, p, 3, &modes).unwrap();
            let exact = rows.iter().find(|r| r.mode == BenchMode::ExactRational).unwrap();
            let trunc = rows
                .iter()
                .find(|r| r.mode == BenchMode::TruncatedRecurrence)
                .unwrap();
            assert!(
                trunc.peak_bytes < exact.peak_bytes,
                "p={p}: {} !< {}",
                trunc.peak_bytes,
                exact.peak_bytes
            );
        }
    }
}
