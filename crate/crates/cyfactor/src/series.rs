//! Truncated power series over `ScaledPadic` coefficients, together with an
//! exact-rational twin used by the oracle and benchmark modes.

use crate::error::{Error, Result};
use crate::padic::{ScaledPadic, Zp};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A power series truncated at a degree bound; coefficient n belongs to phi^n.
#[derive(Clone, Debug)]
pub struct TruncSeries {
    pub coeffs: Vec<ScaledPadic>,
}

impl TruncSeries {
    pub fn zero(bound: usize) -> TruncSeries {
        TruncSeries {
            coeffs: vec![ScaledPadic::exact_zero(); bound + 1],
        }
    }

    pub fn one(ctx: &Zp, bound: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(bound);
        s.coeffs[0] = ScaledPadic::from_i64(ctx, 1);
        s
    }

    pub fn constant(c: ScaledPadic, bound: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(bound);
        s.coeffs[0] = c;
        s
    }

    pub fn bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Series-level accuracy: the minimum coefficient accuracy.
    pub fn min_acc(&self, ctx: &Zp) -> i64 {
        self.coeffs.iter().map(|c| c.acc(ctx)).min().unwrap_or(0)
    }

    /// Minimum coefficient valuation (lower bound).
    pub fn min_ord(&self, ctx: &Zp) -> i64 {
        self.coeffs
            .iter()
            .map(|c| c.ord_lb(ctx))
            .min()
            .unwrap_or(ctx.cap())
    }

    pub fn add(&self, ctx: &Zp, rhs: &TruncSeries) -> TruncSeries {
        assert_eq!(self.bound(), rhs.bound(), "degree bound mismatch");
        TruncSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.add(ctx, b))
                .collect(),
        }
    }

    pub fn scale(&self, ctx: &Zp, c: &ScaledPadic) -> TruncSeries {
        TruncSeries {
            coeffs: self.coeffs.iter().map(|a| a.mul(ctx, c)).collect(),
        }
    }

    /// theta = phi d/dphi applied `times` times: coefficient n picks up n^times.
    pub fn theta_apply(&self, ctx: &Zp, times: u32) -> TruncSeries {
        if times == 0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                if n == 0 {
                    ScaledPadic::exact_zero()
                } else {
                    let f = BigInt::from(n).pow(times);
                    c.mul(ctx, &ScaledPadic::from_bigint(ctx, &f))
                }
            })
            .collect();
        TruncSeries { coeffs }
    }

    /// phi -> phi^p substitution: coefficient n moves to degree n*p.
    pub fn substitute_phi_p(&self, p: u64, target_bound: usize) -> Result<TruncSeries> {
        if (self.bound() as u64) < target_bound as u64 / p {
            return Err(Error::Usage(format!(
                "substitute_phi_p: input bound {} too short for target {}",
                self.bound(),
                target_bound
            )));
        }
        let mut out = TruncSeries::zero(target_bound);
        for (n, c) in self.coeffs.iter().enumerate() {
            let idx = n as u64 * p;
            if idx <= target_bound as u64 {
                out.coeffs[idx as usize] = c.clone();
            }
        }
        Ok(out)
    }

    /// Schoolbook product truncated at the smaller bound.
    pub fn mul(&self, ctx: &Zp, rhs: &TruncSeries) -> TruncSeries {
        let bound = self.bound().min(rhs.bound());
        let mut out = TruncSeries::zero(bound);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zeroish() && matches!(a, ScaledPadic::ExactZero) {
                continue;
            }
            if i > bound {
                break;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j > bound {
                    break;
                }
                if matches!(b, ScaledPadic::ExactZero) {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(ctx, &a.mul(ctx, b));
            }
        }
        out
    }
}

pub type SeriesMat = Vec<Vec<TruncSeries>>;

pub fn mat_zero(b: usize, bound: usize) -> SeriesMat {
    vec![vec![TruncSeries::zero(bound); b]; b]
}

pub fn mat_mul(ctx: &Zp, x: &SeriesMat, y: &SeriesMat) -> SeriesMat {
    let b = x.len();
    let bound = x[0][0].bound().min(y[0][0].bound());
    let mut out = mat_zero(b, bound);
    for r in 0..b {
        for c in 0..b {
            let mut acc = TruncSeries::zero(bound);
            for j in 0..b {
                acc = acc.add(ctx, &x[r][j].mul(ctx, &y[j][c]));
            }
            out[r][c] = acc;
        }
    }
    out
}

pub fn mat_transpose(x: &SeriesMat) -> SeriesMat {
    let b = x.len();
    (0..b)
        .map(|r| (0..b).map(|c| x[c][r].clone()).collect())
        .collect()
}

/// Inverse of a constant b x b ScaledPadic matrix via the adjugate.
pub fn const_mat_inverse(ctx: &Zp, m: &[Vec<ScaledPadic>]) -> Result<Vec<Vec<ScaledPadic>>> {
    let b = m.len();
    let d = const_det(ctx, m);
    let dinv = match &d {
        ScaledPadic::Unit { val, .. } if *val == 0 => d.inv(ctx)?,
        ScaledPadic::Unit { val, .. } => {
            return Err(Error::SingularPrime {
                p: ctx.p,
                message: format!("constant-term determinant has valuation {val}"),
            })
        }
        _ => {
            return Err(Error::SingularPrime {
                p: ctx.p,
                message: "constant-term determinant vanishes to working accuracy".into(),
            })
        }
    };
    let mut inv = vec![vec![ScaledPadic::exact_zero(); b]; b];
    for r in 0..b {
        for c in 0..b {
            let minor: Vec<Vec<ScaledPadic>> = (0..b)
                .filter(|&i| i != c)
                .map(|i| {
                    (0..b)
                        .filter(|&j| j != r)
                        .map(|j| m[i][j].clone())
                        .collect()
                })
                .collect();
            let mut t = if b == 1 {
                ScaledPadic::from_i64(ctx, 1)
            } else {
                const_det(ctx, &minor)
            };
            if (r + c) % 2 == 1 {
                t = t.neg(ctx);
            }
            inv[r][c] = t.mul(ctx, &dinv);
        }
    }
    Ok(inv)
}

fn const_det(ctx: &Zp, m: &[Vec<ScaledPadic>]) -> ScaledPadic {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut s = ScaledPadic::exact_zero();
    for j in 0..n {
        let minor: Vec<Vec<ScaledPadic>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let mut t = m[0][j].mul(ctx, &const_det(ctx, &minor));
        if j % 2 == 1 {
            t = t.neg(ctx);
        }
        s = s.add(ctx, &t);
    }
    s
}

/// Order-by-order inverse of a series matrix with invertible constant term.
/// Returns the inverse and its minimum coefficient valuation.
pub fn series_matrix_invert(ctx: &Zp, w: &SeriesMat) -> Result<(SeriesMat, i64)> {
    let b = w.len();
    let bound = w[0][0].bound();
    let w0: Vec<Vec<ScaledPadic>> = (0..b)
        .map(|r| (0..b).map(|c| w[r][c].coeffs[0].clone()).collect())
        .collect();
    let x0 = const_mat_inverse(ctx, &w0)?;
    let mut x = mat_zero(b, bound);
    for r in 0..b {
        for c in 0..b {
            x[r][c].coeffs[0] = x0[r][c].clone();
        }
    }
    for m in 1..=bound {
        for c in 0..b {
            // v_j = sum_l sum_{q=1..m} w[j][l][q] * x[l][c][m-q]
            let mut v = vec![ScaledPadic::exact_zero(); b];
            for (j, vj) in v.iter_mut().enumerate() {
                for l in 0..b {
                    for q in 1..=m {
                        *vj = vj.add(ctx, &w[j][l].coeffs[q].mul(ctx, &x[l][c].coeffs[m - q]));
                    }
                }
            }
            for r in 0..b {
                let mut s = ScaledPadic::exact_zero();
                for (j, vj) in v.iter().enumerate() {
                    s = s.add(ctx, &x0[r][j].mul(ctx, vj));
                }
                x[r][c].coeffs[m] = s.neg(ctx);
            }
        }
    }
    let mut ord = ctx.cap();
    for row in &x {
        for s in row {
            ord = ord.min(s.min_ord(ctx));
        }
    }
    Ok((x, ord))
}

// ----------------------------------------------------------------------------
// Exact-rational twin
// ----------------------------------------------------------------------------

pub type RatSeries = Vec<BigRational>;
pub type RatMat = Vec<Vec<RatSeries>>;

pub fn rat_zero(bound: usize) -> RatSeries {
    vec![BigRational::zero(); bound + 1]
}

pub fn rat_mul(a: &RatSeries, b: &RatSeries, bound: usize) -> RatSeries {
    let mut out = rat_zero(bound);
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() || i > bound {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > bound {
                break;
            }
            if y.is_zero() {
                continue;
            }
            out[i + j] += x * y;
        }
    }
    out
}

pub fn rat_add(a: &RatSeries, b: &RatSeries) -> RatSeries {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn rat_theta(a: &RatSeries, times: u32) -> RatSeries {
    a.iter()
        .enumerate()
        .map(|(n, c)| c * BigRational::from_integer(BigInt::from(n).pow(times)))
        .collect()
}

pub fn rat_subst_phi_p(a: &RatSeries, p: u64, target_bound: usize) -> RatSeries {
    let mut out = rat_zero(target_bound);
    for (n, c) in a.iter().enumerate() {
        let idx = n as u64 * p;
        if idx <= target_bound as u64 {
            out[idx as usize] = c.clone();
        }
    }
    out
}

pub fn rat_mat_mul(x: &RatMat, y: &RatMat, bound: usize) -> RatMat {
    let b = x.len();
    (0..b)
        .map(|r| {
            (0..b)
                .map(|c| {
                    let mut acc = rat_zero(bound);
                    for j in 0..b {
                        acc = rat_add(&acc, &rat_mul(&x[r][j], &y[j][c], bound));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Order-by-order exact inverse of a rational series matrix.
pub fn rat_series_matrix_invert(w: &RatMat) -> Result<RatMat> {
    let b = w.len();
    let bound = w[0][0].len() - 1;
    let w0: Vec<Vec<BigRational>> = (0..b)
        .map(|r| (0..b).map(|c| w[r][c][0].clone()).collect())
        .collect();
    let x0 = rat_const_inverse(&w0)?;
    let mut x: RatMat = vec![vec![rat_zero(bound); b]; b];
    for r in 0..b {
        for c in 0..b {
            x[r][c][0] = x0[r][c].clone();
        }
    }
    for m in 1..=bound {
        for c in 0..b {
            let mut v = vec![BigRational::zero(); b];
            for (j, vj) in v.iter_mut().enumerate() {
                for l in 0..b {
                    for q in 1..=m {
                        *vj += &w[j][l][q] * &x[l][c][m - q];
                    }
                }
            }
            for r in 0..b {
                let mut s = BigRational::zero();
                for (j, vj) in v.iter().enumerate() {
                    s += &x0[r][j] * vj;
                }
                x[r][c][m] = -s;
            }
        }
    }
    Ok(x)
}

fn rat_const_inverse(m: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let b = m.len();
    let d = rat_det(m);
    if d.is_zero() {
        return Err(Error::Validation("singular constant term".into()));
    }
    let mut inv = vec![vec![BigRational::zero(); b]; b];
    for r in 0..b {
        for c in 0..b {
            let minor: Vec<Vec<BigRational>> = (0..b)
                .filter(|&i| i != c)
                .map(|i| {
                    (0..b)
                        .filter(|&j| j != r)
                        .map(|j| m[i][j].clone())
                        .collect()
                })
                .collect();
            let mut t = if b == 1 {
                BigRational::one()
            } else {
                rat_det(&minor)
            };
            if (r + c) % 2 == 1 {
                t = -t;
            }
            inv[r][c] = t / &d;
        }
    }
    Ok(inv)
}

fn rat_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut s = BigRational::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigRational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let t = &m[0][j] * rat_det(&minor);
        if j % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    s
}

// ----------------------------------------------------------------------------
// Fast residue convolution (Kronecker substitution)
// ----------------------------------------------------------------------------

/// Convolution of residue vectors modulo `m` by packing into one big-integer
/// product. Bit-identical to the schoolbook reference.
pub fn convolve_kronecker(a: &[BigUint], b: &[BigUint], m: &BigUint) -> Vec<BigUint> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let max_terms = a.len().min(b.len());
    // each packed coefficient is < max_terms * m^2
    let slot_bits = (m.bits() * 2 + 64 - (max_terms as u64).leading_zeros() as u64 + 1) as usize;
    let slot_bits = (slot_bits + 31) / 32 * 32; // whole 32-bit words simplify unpacking
    let pack32 = |v: &[BigUint]| -> BigUint {
        let words = slot_bits / 32;
        let mut digits: Vec<u32> = Vec::with_capacity(v.len() * words);
        for x in v {
            let mut d = x.to_u32_digits();
            d.resize(words, 0);
            digits.extend_from_slice(&d);
        }
        BigUint::new(digits)
    };
    let pa = pack32(a);
    let pb = pack32(b);
    let prod = pa * pb;
    let mut digits = prod.to_u32_digits();
    let words = slot_bits / 32;
    digits.resize(words * (len + 1), 0);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let chunk = &digits[i * words..(i + 1) * words];
        out.push(BigUint::new(chunk.to_vec()) % m);
    }
    out
}
