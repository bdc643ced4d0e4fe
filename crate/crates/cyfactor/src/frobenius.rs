//! Assembly of the inverse-Frobenius matrix series
//! U(phi) = E(phi^p)^{-1} U_p(0) E(phi) mod p^B and its resummation into a
//! polynomial numerator with termination checks.
//!
//! E(phi^p)^{-1} is always produced from order-floor(M/p) data and the
//! phi -> phi^p substitution, never by inverting a long series: with
//! sigma the antidiagonal sign matrix and W = E^T sigma E one has
//! E^{-1} = (sigma E W^{-1})^T.

use crate::error::{Error, Result};
use crate::operator::{denominator_loci, CYOperator, RecurrenceTable};
use crate::padic::{padic_zeta3, ScaledPadic, Zp};
use crate::series::{mat_zero, series_matrix_invert, SeriesMat, TruncSeries};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// sigma_{kl} = (-1)^l delta_{k+l,b-1}.
pub fn sigma(b: usize) -> Vec<Vec<i64>> {
    (0..b)
        .map(|k| {
            (0..b)
                .map(|l| {
                    if k + l == b - 1 {
                        if l % 2 == 0 {
                            1
                        } else {
                            -1
                        }
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Log-free period matrix: [E]^{i,k} = sum_j C(k, i-j) theta^{k+j-i} f_j,
/// truncated at `bound`.
pub fn build_e(ctx: &Zp, f: &[Vec<ScaledPadic>], b: usize, bound: usize) -> SeriesMat {
    let mut e = mat_zero(b, bound);
    for i in 0..b {
        for k in 0..b {
            let mut acc = TruncSeries::zero(bound);
            for j in i.saturating_sub(k)..=i {
                let co = crate::padic::binomial(k as u64, (i - j) as u64);
                if co.is_zero() {
                    continue;
                }
                let co_pad = ScaledPadic::from_bigint(ctx, &co);
                let times = (k + j - i) as u32;
                let mut s = TruncSeries {
                    coeffs: f[j][..=bound.min(f[j].len() - 1)].to_vec(),
                };
                s.coeffs.resize(bound + 1, ScaledPadic::exact_zero());
                let s = s.theta_apply(ctx, times).scale(ctx, &co_pad);
                acc = acc.add(ctx, &s);
            }
            e[i][k] = acc;
        }
    }
    e
}

/// One column of E at a single series degree q: entry i of column k equals
/// sum_j C(k,i-j) q^{k+j-i} f_j[q]. Used by the streaming large-p path.
fn e_at_degree(
    ctx: &Zp,
    fq: &[ScaledPadic],
    b: usize,
    q: usize,
    qpows: &[ScaledPadic],
) -> Vec<Vec<ScaledPadic>> {
    let mut e = vec![vec![ScaledPadic::exact_zero(); b]; b];
    for i in 0..b {
        for k in 0..b {
            let mut acc = ScaledPadic::exact_zero();
            for j in i.saturating_sub(k)..=i {
                let co = crate::padic::binomial(k as u64, (i - j) as u64);
                if co.is_zero() {
                    continue;
                }
                let times = k + j - i;
                let term = if times > 0 && q == 0 {
                    continue;
                } else if times > 0 {
                    fq[j].mul(ctx, &qpows[times])
                } else {
                    fq[j].clone()
                };
                let term = term.mul(ctx, &ScaledPadic::from_bigint(ctx, &co));
                acc = acc.add(ctx, &term);
            }
            e[i][k] = acc;
        }
    }
    e
}

/// W = E^T sigma E to the given order, inverted; returns (W^{-1}, ord_W_inv).
pub fn build_w_inverse(
    ctx: &Zp,
    e_small: &SeriesMat,
    b: usize,
) -> Result<(SeriesMat, i64)> {
    let bound = e_small[0][0].bound();
    let sg = sigma(b);
    let mut w = mat_zero(b, bound);
    for r in 0..b {
        for c in 0..b {
            let mut acc = TruncSeries::zero(bound);
            for j in 0..b {
                for l in 0..b {
                    if sg[j][l] == 0 {
                        continue;
                    }
                    let t = e_small[j][r].mul(ctx, &e_small[l][c]);
                    let t = t.scale(ctx, &ScaledPadic::from_i64(ctx, sg[j][l]));
                    acc = acc.add(ctx, &t);
                }
            }
            w[r][c] = acc;
        }
    }
    series_matrix_invert(ctx, &w)
}

/// U_p(0) = diag(1, p, ..., p^{b-1}) * sum_i alpha_i eps^i with eps the
/// lower shift; entry (r,c) = p^r alpha_{r-c}. The symplectic constraint
/// U_p(0) sigma U_p(0)^T = p^{b-1} sigma is asserted modulo p^k.
pub fn build_u0(
    ctx: &Zp,
    b: usize,
    k: i64,
    alphas: &[ScaledPadic],
) -> Result<Vec<Vec<ScaledPadic>>> {
    assert_eq!(alphas.len(), b);
    let mut u0 = vec![vec![ScaledPadic::exact_zero(); b]; b];
    for r in 0..b {
        for c in 0..=r {
            let pr = ScaledPadic::from_bigint(ctx, &BigInt::from(ctx.p).pow(r as u32));
            u0[r][c] = pr.mul(ctx, &alphas[r - c]);
        }
    }
    let sg = sigma(b);
    for r in 0..b {
        for c in 0..b {
            let mut s = ScaledPadic::exact_zero();
            for j in 0..b {
                for l in 0..b {
                    if sg[j][l] == 0 {
                        continue;
                    }
                    let t = u0[r][j]
                        .mul(ctx, &u0[c][l])
                        .mul(ctx, &ScaledPadic::from_i64(ctx, sg[j][l]));
                    s = s.add(ctx, &t);
                }
            }
            let target = BigInt::from(ctx.p).pow(b as u32 - 1) * BigInt::from(sg[r][c]);
            let d = s.sub(ctx, &ScaledPadic::from_bigint(ctx, &target));
            // entry (r,c) is divisible by p^(r+c) by construction, so the
            // deviation must vanish to k digits beyond that scale
            let need = k + (r + c) as i64;
            if d.ord_lb(ctx) < need.min(d.acc(ctx)) {
                return Err(Error::Integrity(format!(
                    "U_p(0) symplectic constraint fails at entry ({r},{c}): ord {}",
                    d.ord_lb(ctx)
                )));
            }
        }
    }
    Ok(u0)
}

/// alpha vector for the operator: (1, 0, 0) for b=3 and
/// (1, 0, 0, K zeta_p(3)) for b=4, with an optional additive perturbation of
/// alpha_3 (used by the sensitivity checks).
pub fn alpha_vector(
    ctx: &Zp,
    op: &CYOperator,
    zeta_acc: u32,
    alpha3_perturb: i64,
) -> Vec<ScaledPadic> {
    let b = op.order_b as usize;
    let mut alphas = vec![ScaledPadic::exact_zero(); b];
    alphas[0] = ScaledPadic::from_i64(ctx, 1);
    if b == 4 {
        let (kn, kd) = op.rational_k.expect("b=4 carries K");
        let z = padic_zeta3(ctx.p, zeta_acc);
        let zpad = ScaledPadic::from_biguint(ctx, &z.value)
            .clamp_acc(ctx, zeta_acc as i64);
        let kpad = ScaledPadic::from_ratio(
            ctx,
            &BigRational::new(BigInt::from(kn), BigInt::from(kd)),
        );
        let mut a3 = kpad.mul(ctx, &zpad);
        if alpha3_perturb != 0 {
            a3 = a3.add(ctx, &ScaledPadic::from_i64(ctx, alpha3_perturb));
        }
        alphas[3] = a3;
    }
    alphas
}

/// The resummed numerator polynomial of U, with coefficients stored as
/// residues mod p^B (p^B is required to fit in u128).
#[derive(Clone, Debug)]
pub struct UNumerator {
    pub p: u64,
    pub big_b: u32,
    pub modulus: u128,
    pub m_bound: usize,
    pub trunc_deg: usize,
    pub nadd: usize,
    pub nadd_ok: bool,
    /// num[r][c][n], length m_bound+1 per entry.
    pub num: Vec<Vec<Vec<u128>>>,
}

impl UNumerator {
    pub fn warn(&self, ceil_cp: u64) -> bool {
        !self.nadd_ok || self.trunc_deg as u64 > ceil_cp
    }
}

/// Where the period series come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodSource {
    /// p-adically truncated recurrence at working accuracy A.
    Truncated,
    /// exact rational recurrence, reduced coefficient-by-coefficient.
    ExactRational,
}

pub struct Assembly {
    pub numerator: UNumerator,
    pub ord_w_inv: i64,
    /// peak logical bytes of the period table (benchmark instrumentation)
    pub period_table_bytes: usize,
}

pub fn assemble_u_numerator(
    op: &CYOperator,
    table: &RecurrenceTable,
    p: u64,
    big_b: u32,
    a_acc: i64,
    nadd: usize,
    alpha3_perturb: i64,
    source: PeriodSource,
) -> Result<Assembly> {
    let b = op.order_b as usize;
    if p <= op.ceil_c() || p < 5 {
        return Err(Error::Usage(format!(
            "prime {p} must be >= 5 and exceed ceil(C) = {}",
            op.ceil_c()
        )));
    }
    let modulus_big = BigUint::from(p).pow(big_b);
    if modulus_big.bits() > 126 {
        return Err(Error::Usage(format!("p^B too large for evaluation: p={p} B={big_b}")));
    }
    let modulus = modulus_big.to_u128().unwrap();

    let m_bound = op.ceil_cp(p) as usize + nadd;
    let zeta_acc = (a_acc + 4) as u32;

    let (ctx, f, period_bytes) = match source {
        PeriodSource::Truncated => {
            let ctx = Zp::new(p, a_acc as u32 + 4);
            let (f, _ledger) =
                crate::recurrence::run_truncated_recurrence(&ctx, table, a_acc, m_bound);
            let bytes = crate::recurrence::truncated_table_bytes(&f);
            (ctx, f, bytes)
        }
        PeriodSource::ExactRational => {
            let cap = (a_acc + 8) as u32;
            let ctx = Zp::new(p, cap);
            let exact = crate::recurrence::run_exact_recurrence(table, b - 1, m_bound);
            let bytes = crate::recurrence::rational_table_bytes(&exact);
            let f: Vec<Vec<ScaledPadic>> = exact
                .iter()
                .map(|row| row.iter().map(|q| ScaledPadic::from_ratio(&ctx, q)).collect())
                .collect();
            (ctx, f, bytes)
        }
    };

    let alphas = alpha_vector(&ctx, op, zeta_acc, alpha3_perturb);
    let u0 = build_u0(&ctx, b, big_b as i64, &alphas)?;

    let lc = m_bound / p as usize;
    let (t_mat, ord_w_inv) = if lc == 0 {
        // E(phi^p)^{-1} = I through degree M, so the left factor is U_p(0)
        (
            u0.iter()
                .map(|row| {
                    row.iter()
                        .map(|x| TruncSeries::constant(x.clone(), 0))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
            0,
        )
    } else {
        let f_small: Vec<Vec<ScaledPadic>> =
            f.iter().map(|row| row[..=lc].to_vec()).collect();
        let e_small = build_e(&ctx, &f_small, b, lc);
        let (w_inv, ord_w) = build_w_inverse(&ctx, &e_small, b)?;
        if ord_w != 0 {
            return Err(Error::SingularPrime {
                p,
                message: format!("ord_p(W^-1) = {ord_w} != 0 needs special handling"),
            });
        }
        // Einv = (sigma E W^{-1})^T
        let sg = sigma(b);
        let mut sig_e = mat_zero(b, lc);
        for r in 0..b {
            for c in 0..b {
                for j in 0..b {
                    if sg[r][j] != 0 {
                        let t = e_small[j][c].scale(&ctx, &ScaledPadic::from_i64(&ctx, sg[r][j]));
                        sig_e[r][c] = sig_e[r][c].add(&ctx, &t);
                    }
                }
            }
        }
        let prod = crate::series::mat_mul(&ctx, &sig_e, &w_inv);
        let einv = crate::series::mat_transpose(&prod);
        // T = Einv(phi^p) U_p(0): coefficient m of Einv lands at degree m*p
        let mut t_mat: SeriesMat = mat_zero(b, lc * p as usize);
        for r in 0..b {
            for c in 0..b {
                let mut acc = TruncSeries::zero(lc * p as usize);
                for j in 0..b {
                    for m in 0..=lc {
                        let idx = m * p as usize;
                        if idx <= lc * p as usize {
                            let t = einv[r][j].coeffs[m].mul(&ctx, &u0[j][c]);
                            acc.coeffs[idx] = acc.coeffs[idx].add(&ctx, &t);
                        }
                    }
                }
                t_mat[r][c] = acc;
            }
        }
        (t_mat, ord_w)
    };

    // U = T * E(phi), exploiting that T only has coefficients at multiples
    // of p; every complete coefficient is reduced mod p^B immediately.
    let mut num: Vec<Vec<Vec<u128>>> = vec![vec![vec![0u128; m_bound + 1]; b]; b];
    let max_pow = 2 * b; // q^t exponents that appear in E
    for n in 0..=m_bound {
        // E column data at degree n
        let npows: Vec<ScaledPadic> = {
            let mut v = Vec::with_capacity(max_pow + 1);
            v.push(ScaledPadic::from_i64(&ctx, 1));
            for t in 1..=max_pow {
                v.push(ScaledPadic::from_bigint(
                    &ctx,
                    &BigInt::from(n as u64).pow(t as u32),
                ));
            }
            v
        };
        let fq: Vec<ScaledPadic> = (0..b).map(|j| f[j][n].clone()).collect();
        let e_n = e_at_degree(&ctx, &fq, b, n, &npows);
        let lc_eff = t_mat[0][0].bound() / p as usize;
        for m in 0..=lc_eff {
            let out_deg = n + m * p as usize;
            if out_deg > m_bound {
                break;
            }
            for r in 0..b {
                for c in 0..b {
                    let mut s = ScaledPadic::exact_zero();
                    for j in 0..b {
                        let tcoef = &t_mat[r][j].coeffs[m * p as usize];
                        if matches!(tcoef, ScaledPadic::ExactZero) {
                            continue;
                        }
                        s = s.add(&ctx, &tcoef.mul(&ctx, &e_n[j][c]));
                    }
                    if matches!(s, ScaledPadic::ExactZero) {
                        continue;
                    }
                    let res = s
                        .residue(&ctx, big_b as i64, "U coefficient")?
                        .to_u128()
                        .unwrap();
                    num[r][c][out_deg] = (num[r][c][out_deg] + res) % modulus;
                }
            }
        }
    }
    drop(f);

    // optional denominator factor D(phi^p): numerator = U * D(phi^p)
    let dpoly = denominator_poly(op);
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
                        out[n + shift] = addmod_u128(out[n + shift], v, modulus);
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

    Ok(Assembly {
        numerator: UNumerator {
            p,
            big_b,
            modulus,
            m_bound,
            trunc_deg,
            nadd,
            nadd_ok,
            num,
        },
        ord_w_inv,
        period_table_bytes: period_bytes,
    })
}

/// D(phi) = product of locus polynomials raised to their exponents.
pub fn denominator_poly(op: &CYOperator) -> Vec<BigInt> {
    let mut d = vec![BigInt::from(1)];
    for (locus, exp) in denominator_loci(op) {
        for _ in 0..exp {
            d = poly_mul_int(&d, locus);
        }
    }
    d
}

fn poly_mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn addmod_u128(a: u128, b: u128, m: u128) -> u128 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

/// (a * b) mod m for m < 2^126: native when everything fits in u64 squares,
/// big-integer fallback otherwise.
pub fn mulmod_u128(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        (a % m) * (b % m) % m
    } else {
        let prod = BigUint::from(a) * BigUint::from(b);
        (prod % BigUint::from(m)).to_u128().unwrap()
    }
}
