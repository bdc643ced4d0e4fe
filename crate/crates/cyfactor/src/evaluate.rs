//! Evaluation of the resummed U-matrix at the Teichmueller points of F_p*,
//! Euler-factor extraction via Newton identities, functional-equation
//! completion, and the Hasse-Witt unit-root congruence.

use crate::error::{Error, Result};
use crate::frobenius::{addmod_u128, mulmod_u128, UNumerator};
use crate::operator::{denominator_loci, CYOperator, RecurrenceTable};
use crate::padic::{balanced_lift, inv_mod, primitive_root, teichmuller_lift, ResidueModPk};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    Good,
    Conifold,
    OtherSingular,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerFactorRecord {
    pub p: u64,
    pub phi_star: u64,
    /// a^(1) .. a^(ceil(b/2)) as balanced lifts; empty for flagged points.
    pub coeffs: Vec<BigInt>,
    pub flag: Flag,
    /// a^(0) .. a^(b) after functional-equation completion.
    pub full: Option<Vec<BigInt>>,
}

/// All Teichmueller representatives mod p^B, as successive powers of
/// Teich(g) for the smallest primitive root g. Returned indexed by x-1,
/// i.e. out[x-1] = Teich(x).
pub fn teichmuller_points(p: u64, big_b: u32) -> Vec<u128> {
    let g = primitive_root(p);
    let tg = teichmuller_lift(g, p, big_b)
        .expect("g is a unit")
        .value
        .to_u128()
        .unwrap();
    let modulus = BigUint::from(p).pow(big_b).to_u128().unwrap();
    let mut out = vec![0u128; (p - 1) as usize];
    let mut x = 1u64;
    let mut t = 1u128;
    for _ in 0..p - 1 {
        out[(x - 1) as usize] = t;
        x = ((x as u128 * g as u128) % p as u128) as u64;
        t = mulmod_u128(t, tg, modulus);
    }
    out
}

/// Fold polynomial coefficients along t^(p-1) = 1 (valid at all units).
pub fn fold_coefficients(poly: &[u128], p: u64, modulus: u128) -> Vec<u128> {
    let n = (p - 1) as usize;
    let mut out = vec![0u128; n];
    for (i, c) in poly.iter().enumerate() {
        if *c != 0 {
            out[i % n] = addmod_u128(out[i % n], *c, modulus);
        }
    }
    out
}

/// Horner evaluation of a folded polynomial at every Teichmueller point.
pub fn horner_all_points(folded: &[u128], points: &[u128], modulus: u128) -> Vec<u128> {
    points
        .iter()
        .map(|&t| {
            let mut v = 0u128;
            for c in folded.iter().rev() {
                v = addmod_u128(mulmod_u128(v, t, modulus), *c, modulus);
            }
            v
        })
        .collect()
}

/// All-points evaluation as a length-(p-1) DFT over Z/p^B with root
/// omega = Teich(g): value at x = g^m is F(m) = sum_n c_n omega^(nm).
/// Bluestein: nm = T(n+m) - T(n) - T(m) with T(j) = j(j-1)/2 turns F into a
/// correlation, computed by Kronecker-substitution convolution. Returns
/// values indexed by x-1 like `horner_all_points`.
pub fn dft_all_points(folded: &[u128], p: u64, big_b: u32, modulus: u128) -> Vec<u128> {
    let n = (p - 1) as usize;
    assert_eq!(folded.len(), n);
    let g = primitive_root(p);
    // omega powers by exponent mod (p-1)
    let tg = teichmuller_lift(g, p, big_b)
        .expect("unit")
        .value
        .to_u128()
        .unwrap();
    let mut wpow = vec![1u128; n];
    for i in 1..n {
        wpow[i] = mulmod_u128(wpow[i - 1], tg, modulus);
    }
    // identity nm = t(n+m) - t(n) - t(m) with t(j) = j(j-1)/2, exponents mod p-1
    let tr = |j: u64| -> usize {
        let j = j as u128;
        ((j * j.saturating_sub(1) / 2) % n as u128) as usize
    };
    let inv_exp = |e: usize| -> u128 {
        if e == 0 {
            1
        } else {
            wpow[n - e]
        }
    };
    // reversed a for correlation-as-convolution
    let mut a_rev = vec![BigUint::zero(); n];
    for k in 0..n {
        let v = mulmod_u128(folded[k], inv_exp(tr(k as u64)), modulus);
        a_rev[n - 1 - k] = BigUint::from(v);
    }
    let mut b = Vec::with_capacity(2 * n - 1);
    for j in 0..(2 * n - 1) as u64 {
        b.push(BigUint::from(wpow[tr(j)]));
    }
    let conv = crate::series::convolve_kronecker(&a_rev, &b, &BigUint::from(modulus));
    let mut out = vec![0u128; n];
    let mut x = 1u64;
    for m in 0..n {
        let s = conv[n - 1 + m].to_u128().unwrap();
        out[(x - 1) as usize] = mulmod_u128(s, inv_exp(tr(m as u64)), modulus);
        x = ((x as u128 * g as u128) % p as u128) as u64;
    }
    out
}

/// Primes above this use the DFT path; below it, per-point Horner.
pub const DFT_THRESHOLD: u64 = 128;

fn balanced_from_u128(v: u128, p: u64, big_b: u32) -> BigInt {
    balanced_lift(&ResidueModPk::new(p, big_b, BigUint::from(v)))
}

/// Newton recursion a^(k) = -(1/k) sum_{i=1..k} Tr[U^i] a^(k-i) mod p^B,
/// for k <= ceil(b/2), followed by balanced lifts, Weil-bound assertions and
/// functional-equation completion.
pub fn euler_factor_from_u(
    u_mat: &[Vec<u128>],
    b: usize,
    p: u64,
    big_b: u32,
    modulus: u128,
) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let h = (b + 1) / 2;
    // power traces
    let mut traces = Vec::with_capacity(h);
    let mut power = u_mat.to_vec();
    for i in 1..=h {
        if i > 1 {
            let mut next = vec![vec![0u128; b]; b];
            for (r, row) in next.iter_mut().enumerate() {
                for (c, cell) in row.iter_mut().enumerate() {
                    let mut s = 0u128;
                    for j in 0..b {
                        s = addmod_u128(s, mulmod_u128(power[r][j], u_mat[j][c], modulus), modulus);
                    }
                    *cell = s;
                }
            }
            power = next;
        }
        let mut t = 0u128;
        for (j, row) in power.iter().enumerate() {
            t = addmod_u128(t, row[j], modulus);
        }
        traces.push(t);
    }
    let mut a = vec![0u128; h + 1];
    a[0] = 1;
    for k in 1..=h {
        let mut s = 0u128;
        for i in 1..=k {
            s = addmod_u128(s, mulmod_u128(traces[i - 1], a[k - i], modulus), modulus);
        }
        let kinv = inv_mod(&BigUint::from(k as u64), &BigUint::from(modulus))
            .expect("k unit mod p^B")
            .to_u128()
            .unwrap();
        // a_k = -s/k
        let neg = (modulus - s % modulus) % modulus;
        a[k] = mulmod_u128(neg, kinv, modulus);
    }
    let lifted: Vec<BigInt> = (1..=h).map(|k| balanced_from_u128(a[k], p, big_b)).collect();

    let pb = BigInt::from(p);
    let weil = |msg: String| Error::Integrity(msg);
    match b {
        4 => {
            let (a1, a2) = (&lifted[0], &lifted[1]);
            // |a1| <= 4 p^(3/2)  <=>  a1^2 <= 16 p^3
            if a1 * a1 > BigInt::from(16) * pb.pow(3) {
                return Err(weil(format!("p={p}: |a1|={a1} violates the Weil bound")));
            }
            if a2.abs() > BigInt::from(6) * pb.pow(3) {
                return Err(weil(format!("p={p}: |a2|={a2} violates the Weil bound")));
            }
            let full = vec![
                BigInt::from(1),
                a1.clone(),
                a2.clone(),
                a1 * pb.pow(3),
                pb.pow(6),
            ];
            Ok((lifted, full))
        }
        3 => {
            let (a1, a2) = (lifted[0].clone(), lifted[1].clone());
            if a1.abs() > BigInt::from(3) * &pb {
                return Err(weil(format!("p={p}: |a1|={a1} violates the Weil bound")));
            }
            // split off the (1 + eps p T) factor: a2 = eps p a1 exactly
            let eps: i64 = if a1.is_zero() {
                1
            } else if a2 == &pb * &a1 {
                1
            } else if a2 == -(&pb * &a1) {
                -1
            } else {
                return Err(weil(format!(
                    "p={p}: a2={a2} is not +-p*a1 (a1={a1}); factorization fails"
                )));
            };
            if a1.is_zero() && !a2.is_zero() {
                return Err(weil(format!("p={p}: a1=0 but a2={a2} != 0")));
            }
            let cp = &a1 - BigInt::from(eps) * &pb;
            if cp.abs() > BigInt::from(2) * &pb {
                return Err(weil(format!("p={p}: |c_p|={cp} > 2p")));
            }
            let full = vec![
                BigInt::from(1),
                a1,
                a2,
                BigInt::from(eps) * pb.pow(3),
            ];
            Ok((lifted, full))
        }
        _ => Err(Error::Usage(format!("unsupported order b={b}"))),
    }
}

/// Split a good b=3 factor as (1 + eps p T)(1 + c_p T + p^2 T^2).
pub fn split_k3(record: &EulerFactorRecord) -> Result<(i64, BigInt)> {
    if record.flag != Flag::Good || record.coeffs.len() != 2 {
        return Err(Error::Usage("split_k3 needs a good b=3 record".into()));
    }
    let p = BigInt::from(record.p);
    let (a1, a2) = (&record.coeffs[0], &record.coeffs[1]);
    let eps: i64 = if a1.is_zero() {
        1
    } else if a2 == &(&p * a1) {
        1
    } else if a2 == &(-(&p * a1)) {
        -1
    } else {
        return Err(Error::Integrity(format!(
            "p={}: factor does not split integrally",
            record.p
        )));
    };
    Ok((eps, a1 - BigInt::from(eps) * p))
}

/// Hecke-eigenvalue prediction for b=4 good records:
/// lambda1 = -a1, lambda2 = (a2 - p - p^3)/p, asserted integral.
pub fn hecke_eigenvalues(record: &EulerFactorRecord) -> Result<(BigInt, BigInt)> {
    if record.flag != Flag::Good || record.coeffs.len() != 2 {
        return Err(Error::Usage("hecke_eigenvalues needs a good b=4 record".into()));
    }
    let p = BigInt::from(record.p);
    let l1 = -&record.coeffs[0];
    let num = &record.coeffs[1] - &p - p.pow(3);
    if !(&num % &p).is_zero() {
        return Err(Error::Integrity(format!(
            "p={}: lambda2 = ({})/p is not integral",
            record.p, num
        )));
    }
    Ok((l1, num / p))
}

/// c_{0,n} mod p for n = 0..p-1 (the mod-p truncated holomorphic period),
/// via the row-0 recurrence carried in u64 arithmetic.
pub fn holomorphic_period_mod_p(table: &RecurrenceTable, p: u64) -> Vec<u64> {
    let n_deg = table.n_deg as usize;
    // reduce the R[0][k] polynomials mod p once
    let polys: Vec<Vec<u64>> = (0..n_deg)
        .map(|k| {
            table.shifted_polys[0][k]
                .iter()
                .map(|c| {
                    let mut r = c % BigInt::from(p);
                    if r.sign() == num_bigint::Sign::Minus {
                        r += BigInt::from(p);
                    }
                    r.to_u64().unwrap()
                })
                .collect()
        })
        .collect();
    let eval = |q: &[u64], n: u64| -> u64 {
        let mut v: u128 = 0;
        for c in q.iter().rev() {
            v = (v * n as u128 + *c as u128) % p as u128;
        }
        v as u64
    };
    let mut c = vec![0u64; p as usize];
    c[0] = 1;
    for n in 1..p {
        let mut s: u128 = 0;
        for k in 1..=n_deg.min(n as usize) {
            s = (s + eval(&polys[k - 1], n) as u128 * c[n as usize - k] as u128) % p as u128;
        }
        let nb = crate::padic::mod_pow_u64(n % p, table.b as u64, p);
        let nb_inv = crate::padic::mod_pow_u64(nb, p - 2, p);
        c[n as usize] = (s * nb_inv as u128 % p as u128) as u64;
    }
    c
}

/// Unit-root sanity check: a^(1) == -f_0^[p-1](phi*) mod p at ordinary points.
/// Returns None when f_0^[p-1](phi*) == 0 mod p (non-ordinary, indeterminate).
pub fn hasse_witt_check(
    period_mod_p: &[u64],
    p: u64,
    phi_star: u64,
    a1: &BigInt,
) -> Option<bool> {
    let mut f: u128 = 0;
    for c in period_mod_p.iter().rev() {
        f = (f * phi_star as u128 + *c as u128) % p as u128;
    }
    if f == 0 {
        return None;
    }
    let want = (p as u128 - f) % p as u128;
    let mut a1p = a1 % BigInt::from(p);
    if a1p.sign() == num_bigint::Sign::Minus {
        a1p += BigInt::from(p);
    }
    Some(a1p == BigInt::from(want as u64))
}

fn locus_vanishes_mod_p(locus: &[BigInt], p: u64, x: u64) -> bool {
    let mut v: u128 = 0;
    for c in locus.iter().rev() {
        let mut r = c % BigInt::from(p);
        if r.sign() == num_bigint::Sign::Minus {
            r += BigInt::from(p);
        }
        v = (v * x as u128 + r.to_u64().unwrap() as u128) % p as u128;
    }
    v == 0
}

/// Flag for a point: conifold beats other singular loci.
pub fn point_flag(op: &CYOperator, p: u64, phi_star: u64) -> Flag {
    if locus_vanishes_mod_p(&op.conifold_locus, p, phi_star) {
        return Flag::Conifold;
    }
    if locus_vanishes_mod_p(&op.apparent_sing_locus, p, phi_star) {
        return Flag::OtherSingular;
    }
    for l in &op.other_sing_loci {
        if locus_vanishes_mod_p(l, p, phi_star) {
            return Flag::OtherSingular;
        }
    }
    Flag::Good
}

/// D(Teich(phi)^p) = D(Teich(phi)) value mod p^B (denominator at the point).
fn denominator_value(op: &CYOperator, p: u64, big_b: u32, modulus: u128, t: u128) -> u128 {
    let mut d: u128 = 1;
    for (locus, exp) in denominator_loci(op) {
        if exp == 0 {
            continue;
        }
        let mut v: u128 = 0;
        let pb = BigUint::from(p).pow(big_b);
        for c in locus.iter().rev() {
            let mut r = c % BigInt::from(pb.clone());
            if r.sign() == num_bigint::Sign::Minus {
                r += BigInt::from(pb.clone());
            }
            v = addmod_u128(mulmod_u128(v, t, modulus), r.to_u128().unwrap(), modulus);
        }
        for _ in 0..exp {
            d = mulmod_u128(d, v, modulus);
        }
    }
    d
}

/// Evaluate every numerator entry at every Teichmueller point and extract
/// one Euler-factor record per point of F_p*.
pub fn evaluate_all_points(
    num: &UNumerator,
    op: &CYOperator,
    table: &RecurrenceTable,
) -> Result<Vec<EulerFactorRecord>> {
    let b = op.order_b as usize;
    let p = num.p;
    let points = teichmuller_points(p, num.big_b);
    let use_dft = p > DFT_THRESHOLD;
    let mut values: Vec<Vec<Vec<u128>>> = Vec::with_capacity(b);
    for row in &num.num {
        let mut vrow = Vec::with_capacity(b);
        for entry in row {
            let folded = fold_coefficients(entry, p, num.modulus);
            let vals = if use_dft {
                dft_all_points(&folded, p, num.big_b, num.modulus)
            } else {
                horner_all_points(&folded, &points, num.modulus)
            };
            vrow.push(vals);
        }
        values.push(vrow);
    }
    let period_mod_p = holomorphic_period_mod_p(table, p);

    let mut out = Vec::with_capacity((p - 1) as usize);
    for x in 1..p {
        let idx = (x - 1) as usize;
        let flag = point_flag(op, p, x);
        if flag != Flag::Good {
            out.push(EulerFactorRecord {
                p,
                phi_star: x,
                coeffs: Vec::new(),
                flag,
                full: None,
            });
            continue;
        }
        let dval = denominator_value(op, p, num.big_b, num.modulus, points[idx]);
        let dinv = if dval == 1 {
            1
        } else {
            inv_mod(&BigUint::from(dval), &BigUint::from(num.modulus))
                .ok_or_else(|| Error::Integrity(format!("p={p} phi*={x}: D not a unit off the loci")))?
                .to_u128()
                .unwrap()
        };
        let mut u_mat = vec![vec![0u128; b]; b];
        for (r, row) in u_mat.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = mulmod_u128(values[r][c][idx], dinv, num.modulus);
            }
        }
        let (coeffs, full) = euler_factor_from_u(&u_mat, b, p, num.big_b, num.modulus)?;
        // Hasse-Witt congruence at ordinary points
        if let Some(ok) = hasse_witt_check(&period_mod_p, p, x, &coeffs[0]) {
            if !ok {
                return Err(Error::Integrity(format!(
                    "p={p} phi*={x}: Hasse-Witt congruence fails"
                )));
            }
        }
        out.push(EulerFactorRecord {
            p,
            phi_star: x,
            coeffs,
            flag: Flag::Good,
            full: Some(full),
        });
    }
    Ok(out)
}

/// Single-point variant (skips the all-points transform).
pub fn evaluate_one_point(
    num: &UNumerator,
    op: &CYOperator,
    phi_star: u64,
) -> Result<EulerFactorRecord> {
    let b = op.order_b as usize;
    let p = num.p;
    let flag = point_flag(op, p, phi_star);
    if flag != Flag::Good {
        return Ok(EulerFactorRecord {
            p,
            phi_star,
            coeffs: Vec::new(),
            flag,
            full: None,
        });
    }
    let t = teichmuller_lift(phi_star, p, num.big_b)?
        .value
        .to_u128()
        .unwrap();
    let mut u_mat = vec![vec![0u128; b]; b];
    for (r, row) in u_mat.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut v = 0u128;
            for coeff in num.num[r][c].iter().rev() {
                v = addmod_u128(mulmod_u128(v, t, num.modulus), *coeff, num.modulus);
            }
            *cell = v;
        }
    }
    let dval = denominator_value(op, p, num.big_b, num.modulus, t);
    if dval != 1 {
        let dinv = inv_mod(&BigUint::from(dval), &BigUint::from(num.modulus))
            .ok_or_else(|| {
                Error::Integrity(format!("p={p} phi*={phi_star}: D not a unit off the loci"))
            })?
            .to_u128()
            .unwrap();
        for row in u_mat.iter_mut() {
            for cell in row.iter_mut() {
                *cell = mulmod_u128(*cell, dinv, num.modulus);
            }
        }
    }
    let (coeffs, full) = euler_factor_from_u(&u_mat, b, p, num.big_b, num.modulus)?;
    Ok(EulerFactorRecord {
        p,
        phi_star,
        coeffs,
        flag: Flag::Good,
        full: Some(full),
    })
}
