//! The p-adically truncated period recurrence and its exact-rational twin,
//! with per-coefficient accuracy bookkeeping and the a-priori accuracy bound.

use crate::operator::{eval_poly, RecurrenceTable};
use crate::padic::{ScaledPadic, Zp};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Least B such that C(b, ceil(b/2)) * p^(ceil(b/2)(b-1)/2) <= p^B: enough
/// accuracy to pin down the middle Euler-factor coefficient via its Weil bound.
pub fn target_accuracy_b(b: u32, p: u64) -> u32 {
    let half = (b + 1) / 2;
    let binom = crate::padic::binomial(b as u64, half as u64);
    let bound = binom * BigInt::from(p).pow(half * (b - 1) / 2);
    let mut bb = 1u32;
    let mut pk = BigInt::from(p);
    while pk < bound {
        pk *= BigInt::from(p);
        bb += 1;
    }
    bb
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    Universal,
    Sharp { p: u64 },
}

/// Working accuracy A needed so that the U-matrix is good mod p^B.
pub fn accuracy_bound(
    b: u32,
    c: (i64, i64),
    big_b: u32,
    ord_w_inv: i64,
    min_ord_alpha: i64,
    mode: BoundMode,
) -> i64 {
    let ceil_c = ((c.0 + c.1 - 1) / c.1) as i64;
    let b = b as i64;
    let big_b = big_b as i64;
    match mode {
        BoundMode::Universal => big_b + (2 * b - 1) * ceil_c - b + 1 - ord_w_inv - min_ord_alpha,
        BoundMode::Sharp { p } => {
            // floor(ceil(C p)/p) replaces ceil(C) for this specific prime
            let cp = (c.0 * p as i64 + c.1 - 1) / c.1;
            let eff = cp / p as i64;
            let a1 = big_b + (2 * b - 1) * eff - b + 1 - ord_w_inv - min_ord_alpha;
            let a2 = big_b - ord_w_inv;
            a1.max(a2)
        }
    }
}

/// Guaranteed-accuracy ledger for the truncated coefficients, one entry per
/// (row i, degree n). Entries are lower bounds for
/// ord_p(c_{i,n} - c^{(A)}_{i,n}).
pub type AccuracyLedger = Vec<Vec<i64>>;

/// Run the truncated recurrence: coefficients of the b period series up to
/// degree M, every intermediate clamped to accuracy A.
pub fn run_truncated_recurrence(
    ctx: &Zp,
    table: &RecurrenceTable,
    a_acc: i64,
    m_bound: usize,
) -> (Vec<Vec<ScaledPadic>>, AccuracyLedger) {
    let b = table.b as usize;
    let n_deg = table.n_deg as usize;
    let mut c = vec![vec![ScaledPadic::exact_zero(); m_bound + 1]; b];
    c[0][0] = ScaledPadic::from_i64(ctx, 1).clamp_acc(ctx, a_acc);
    for n in 1..=m_bound {
        let nb = BigInt::from(n as u64).pow(table.b);
        let nb_pad = ScaledPadic::from_bigint(ctx, &nb);
        for i in 0..b {
            let mut s = ScaledPadic::exact_zero();
            for k in 1..=n_deg.min(n) {
                for r in 0..=i {
                    let coeff = eval_poly(&table.shifted_polys[r][k - 1], n as u64);
                    if coeff.is_zero() {
                        continue;
                    }
                    let t = ScaledPadic::from_bigint(ctx, &coeff).mul(ctx, &c[i - r][n - k]);
                    s = s.add(ctx, &t);
                }
            }
            for r in 1..=i.min(b - 1) {
                let g = eval_poly(&table.same_n_couplings[r - 1], n as u64);
                let t = ScaledPadic::from_bigint(ctx, &g).mul(ctx, &c[i - r][n]);
                s = s.sub(ctx, &t);
            }
            let v = s
                .div(ctx, &nb_pad)
                .expect("n^b is nonzero")
                .clamp_acc(ctx, a_acc);
            c[i][n] = v;
        }
    }
    let ledger: AccuracyLedger = c
        .iter()
        .map(|row| row.iter().map(|x| x.acc(ctx)).collect())
        .collect();
    (c, ledger)
}

/// Exact rational twin: rows 0..=i_max of the coefficient table up to degree M.
pub fn run_exact_recurrence(
    table: &RecurrenceTable,
    i_max: usize,
    m_bound: usize,
) -> Vec<Vec<BigRational>> {
    let b = table.b as usize;
    let rows = (i_max + 1).min(b);
    let n_deg = table.n_deg as usize;
    let mut c = vec![vec![BigRational::zero(); m_bound + 1]; rows];
    c[0][0] = BigRational::one();
    for n in 1..=m_bound {
        let nb = BigRational::from_integer(BigInt::from(n as u64).pow(table.b));
        for i in 0..rows {
            let mut s = BigRational::zero();
            for k in 1..=n_deg.min(n) {
                for r in 0..=i {
                    let coeff = eval_poly(&table.shifted_polys[r][k - 1], n as u64);
                    if !coeff.is_zero() {
                        s += BigRational::from_integer(coeff) * &c[i - r][n - k];
                    }
                }
            }
            for r in 1..=i.min(b - 1) {
                let g = eval_poly(&table.same_n_couplings[r - 1], n as u64);
                s -= BigRational::from_integer(g) * &c[i - r][n];
            }
            c[i][n] = s / &nb;
        }
    }
    c
}

/// Logical memory footprint of a truncated coefficient table, in bytes
/// (used by the benchmark instrumentation).
pub fn truncated_table_bytes(c: &[Vec<ScaledPadic>]) -> usize {
    c.iter()
        .flatten()
        .map(|x| match x {
            ScaledPadic::Unit { unit, .. } => 24 + unit.to_u32_digits().len() * 4,
            _ => 24,
        })
        .sum()
}

/// Logical memory footprint of a rational coefficient table, in bytes.
pub fn rational_table_bytes(c: &[Vec<BigRational>]) -> usize {
    c.iter()
        .flatten()
        .map(|x| 32 + (x.numer().bits() as usize + x.denom().bits() as usize + 7) / 8)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{derive_recurrence, parse_operator};
    use num_bigint::BigUint;

    fn quintic() -> crate::operator::CYOperator {
        parse_operator("quintic-4.1.1 | 4 | 1 | 0 -120 ; 0 -1250 ; 0 -4375 ; 0 -6250 ; 1 -3125 | 4/5 | -40 | 1 -3125 | 1 | - | 0 0").unwrap()
    }

    fn k3() -> crate::operator::CYOperator {
        parse_operator("k3-hv-2 | 3 | 2 | 0 -4 64 ; 0 -18 192 ; 0 -30 192 ; 1 -20 64 | 1 | - | 1 -20 64 | 1 | - | 0 0").unwrap()
    }

    #[test]
    fn target_b_examples() {
        assert_eq!(target_accuracy_b(4, 7), 4);
        assert_eq!(target_accuracy_b(4, 97), 4);
        assert_eq!(target_accuracy_b(4, 5), 5);
        for p in [5u64, 7, 97] {
            assert_eq!(target_accuracy_b(3, p), 3);
        }
    }

    #[test]
    fn accuracy_bound_examples() {
        assert_eq!(
            accuracy_bound(4, (4, 5), 4, 0, 0, BoundMode::Universal),
            8
        );
        assert_eq!(
            accuracy_bound(4, (4, 5), 4, 0, 0, BoundMode::Sharp { p: 13 }),
            4
        );
        assert_eq!(accuracy_bound(3, (1, 1), 3, 0, 0, BoundMode::Universal), 6);
    }

    #[test]
    fn exact_closed_forms() {
        let op = quintic();
        let t = derive_recurrence(&op);
        let c = run_exact_recurrence(&t, 3, 6);
        // c_{0,n} = (5n)!/(n!)^5
        let fact = |n: u64| -> BigInt {
            let mut f = BigInt::one();
            for i in 1..=n {
                f *= BigInt::from(i);
            }
            f
        };
        for n in 0..=6u64 {
            let want = fact(5 * n) / fact(n).pow(5);
            assert_eq!(c[0][n as usize], BigRational::from_integer(want));
        }
        assert_eq!(c[0][2], BigRational::from_integer(BigInt::from(113400)));
        assert!(c[1][0].is_zero());

        let k3op = k3();
        let t3 = derive_recurrence(&k3op);
        let c3 = run_exact_recurrence(&t3, 0, 4);
        assert_eq!(c3[0][1], BigRational::from_integer(BigInt::from(4)));
    }

    #[test]
    fn truncated_matches_exact_small() {
        let op = quintic();
        let t = derive_recurrence(&op);
        let ctx = Zp::new(7, 16);
        let (c, _) = run_truncated_recurrence(&ctx, &t, 8, 6);
        let exact = run_exact_recurrence(&t, 3, 6);
        let m = BigUint::from(7u32).pow(8);
        for i in 0..4 {
            for n in 0..=6 {
                let want = ScaledPadic::from_ratio(&ctx, &exact[i][n])
                    .residue(&ctx, 8, "t")
                    .unwrap()
                    % &m;
                assert_eq!(c[i][n].residue(&ctx, 8, "t").unwrap(), want, "i={i} n={n}");
            }
        }
    }

    #[test]
    fn initial_conditions() {
        let op = k3();
        let t = derive_recurrence(&op);
        let ctx = Zp::new(11, 12);
        let (c, _) = run_truncated_recurrence(&ctx, &t, 6, 5);
        assert!(c[0][0].congruent(&ctx, &ScaledPadic::from_i64(&ctx, 1), 6));
        assert!(c[1][0].is_zeroish());
        assert!(c[2][0].is_zeroish());
    }

    #[test]
    fn ledger_lower_bound_across_p_multiples() {
        // quintic at p=7 run to degree 14: accuracy at n = 7, 14 stays at
        // least A - (b+i), matching the one division by p each row suffers
        let op = quintic();
        let t = derive_recurrence(&op);
        let a_acc = 8i64;
        let ctx = Zp::new(7, 24);
        let (c, ledger) = run_truncated_recurrence(&ctx, &t, a_acc, 14);
        let exact = run_exact_recurrence(&t, 3, 14);
        for i in 0..4usize {
            for n in [7usize, 14] {
                let bound = a_acc - (4 + i as i64);
                assert!(
                    ledger[i][n] >= bound,
                    "ledger {} < bound {bound} at i={i} n={n}",
                    ledger[i][n]
                );
                // and the ledger is honest: truncated agrees with exact to it
                let diff = ScaledPadic::from_ratio(&ctx, &exact[i][n]).sub(&ctx, &c[i][n]);
                assert!(
                    diff.ord_lb(&ctx) >= ledger[i][n],
                    "i={i} n={n}: ord {} < ledger {}",
                    diff.ord_lb(&ctx),
                    ledger[i][n]
                );
            }
        }
    }

    #[test]
    fn valuation_bound_small_sweep() {
        // ord_p(c_{i,n}) >= -(b+i) ceil(C) for n <= ceil(C p)
        for (line, _) in [
            ("quintic-4.1.1 | 4 | 1 | 0 -120 ; 0 -1250 ; 0 -4375 ; 0 -6250 ; 1 -3125 | 4/5 | -40 | 1 -3125 | 1 | - | 0 0", 0),
        ] {
            let op = parse_operator(line).unwrap();
            let t = derive_recurrence(&op);
            for p in [7u64, 11, 13] {
                let m = op.ceil_cp(p) as usize;
                let exact = run_exact_recurrence(&t, op.order_b as usize - 1, m);
                for (i, row) in exact.iter().enumerate() {
                    for q in row {
                        if q.is_zero() {
                            continue;
                        }
                        let mut den = q.denom().clone();
                        let mut v: i64 = 0;
                        while (&den % BigInt::from(p)).is_zero() {
                            den /= BigInt::from(p);
                            v += 1;
                        }
                        let bound = (op.order_b as i64 + i as i64) * op.ceil_c() as i64;
                        assert!(v <= bound, "p={p} i={i}: denominator p-power {v} > {bound}");
                    }
                }
            }
        }
    }
}
