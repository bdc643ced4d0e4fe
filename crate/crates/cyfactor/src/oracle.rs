//! Independent reference implementations used to cross-check the production
//! code paths. These are deliberately simple and slow.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;

/// zeta_p(3) mod p^k via the Kummer congruence: for
/// m = (p-1)p^(k-1) - 2 one has zeta_p(3) == -(1-p^(m-1)) B_m / m mod p^k,
/// with B_m obtained p-adically from the power sum S_m(p^K)/p^K.
pub fn zeta3_kummer(p: u64, k: u32) -> BigUint {
    let m: u64 = (p - 1) * p.pow(k - 1) - 2;
    let kk = k + 2;
    let cells = p.pow(kk);
    let mod2 = BigUint::from(p).pow(2 * kk);

    let s: BigUint = (1..cells)
        .into_par_iter()
        .fold(BigUint::zero, |acc, x| {
            acc + BigUint::from(x).modpow(&BigUint::from(m), &mod2)
        })
        .reduce(BigUint::zero, |a, b| (a + b) % &mod2);
    let s = s % &mod2;
    let pk_cells = BigUint::from(p).pow(kk);
    assert!((&s % &pk_cells).is_zero(), "power sum not divisible by p^K");
    let modk = BigUint::from(p).pow(k);
    let bm = (s / pk_cells) % &modk;
    // zeta_p(3) = -B_m/m mod p^k (the Euler factor correction 1-p^(m-1)
    // vanishes mod p^k since m-1 >= k)
    let m_inv = crate::padic::inv_mod(&BigUint::from(m % (p.pow(k))), &modk).unwrap();
    let v = bm * m_inv % &modk;
    (modk.clone() - v) % modk
}

/// Characteristic polynomial coefficients of an n x n integer matrix by exact
/// cofactor expansion of det(I - T*M): returns [a_0..a_n] with a_0 = 1.
pub fn char_poly_from_dets(mat: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = mat.len();
    // det(I - T M) = sum_S (-1)^{|S|} det(M_S) T^{|S|} over principal minors
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[0] = BigInt::one();
    for size in 1..=n {
        let mut total = BigInt::zero();
        for subset in subsets(n, size) {
            let minor: Vec<Vec<BigInt>> = subset
                .iter()
                .map(|&r| subset.iter().map(|&c| mat[r][c].clone()).collect())
                .collect();
            total += det_exact(&minor);
        }
        coeffs[size] = if size % 2 == 1 { -total } else { total };
    }
    coeffs
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

pub fn det_exact(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = BigInt::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let t = &m[0][j] * det_exact(&minor);
        if j % 2 == 0 {
            total += t;
        } else {
            total -= t;
        }
    }
    total
}

/// Schoolbook big-integer convolution of residue vectors, reduced mod `m`.
pub fn convolve_schoolbook(a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = (&out[i + j] + x * y) % m;
        }
    }
    out
}
