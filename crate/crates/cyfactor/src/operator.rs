//! Calabi-Yau-type operators: parsing, validation, normalization, and the
//! coupled recurrence satisfied by the period coefficients.
//!
//! An operator is L = sum_i S_i(phi) theta^i, theta = phi d/dphi, of order
//! b in {3,4} and degree N, normalized so that S_b(0) = 1 and S_i(0) = 0 for
//! i < b (a point of maximal unipotent monodromy at phi = 0).

use crate::error::{Error, Result};
use crate::padic::binomial;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CYOperator {
    pub name: String,
    pub order_b: u32,
    pub degree_n: u32,
    /// coeffs[i][k] is the coefficient of phi^k in S_i, 0 <= i <= b, 0 <= k <= N.
    pub coeffs: Vec<Vec<BigInt>>,
    /// Truncation constant C (numerator, denominator).
    pub trunc_const_c: (i64, i64),
    /// K with alpha_3 = K * zeta_p(3); present iff b = 4.
    pub rational_k: Option<(i64, i64)>,
    /// Ascending integer coefficients.
    pub conifold_locus: Vec<BigInt>,
    pub apparent_sing_locus: Vec<BigInt>,
    pub other_sing_loci: Vec<Vec<BigInt>>,
    /// Exponents for (conifold, apparent, other...) in the denominator D(phi).
    pub denom_exponents: Vec<u32>,
}

impl CYOperator {
    /// C as a rational > 0, and its ceiling.
    pub fn c_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.trunc_const_c.0),
            BigInt::from(self.trunc_const_c.1),
        )
    }

    pub fn ceil_c(&self) -> u64 {
        let c = self.c_ratio();
        let (num, den) = (c.numer().clone(), c.denom().clone());
        ((&num + &den - BigInt::one()) / den).try_into().unwrap()
    }

    /// ceil(C * p).
    pub fn ceil_cp(&self, p: u64) -> u64 {
        let num = BigInt::from(self.trunc_const_c.0) * BigInt::from(p);
        let den = BigInt::from(self.trunc_const_c.1);
        ((num + &den - BigInt::one()) / den).try_into().unwrap()
    }

    /// Q_k(theta) = sum_i s[i][k] theta^i, ascending theta coefficients.
    pub fn q_poly(&self, k: usize) -> Vec<BigInt> {
        (0..=self.order_b as usize)
            .map(|i| self.coeffs[i][k].clone())
            .collect()
    }

    fn check_invariants(&self) -> Result<()> {
        let b = self.order_b as usize;
        let n = self.degree_n as usize;
        if self.order_b != 3 && self.order_b != 4 {
            return Err(Error::Validation(format!("order b={} not in {{3,4}}", self.order_b)));
        }
        if self.coeffs.len() != b + 1 || self.coeffs.iter().any(|r| r.len() != n + 1) {
            return Err(Error::Validation("coefficient matrix shape mismatch".into()));
        }
        if !self.coeffs[b][0].is_one() {
            return Err(Error::Validation(format!(
                "MUM normalization violated: S_{b}(0) = {} != 1",
                self.coeffs[b][0]
            )));
        }
        for i in 0..b {
            if !self.coeffs[i][0].is_zero() {
                return Err(Error::Validation(format!(
                    "MUM normalization violated: S_{i}(0) = {} != 0",
                    self.coeffs[i][0]
                )));
            }
        }
        let max_deg = (0..=b)
            .map(|i| {
                self.coeffs[i]
                    .iter()
                    .rposition(|c| !c.is_zero())
                    .unwrap_or(0)
            })
            .max()
            .unwrap();
        if max_deg != n {
            return Err(Error::Validation(format!(
                "degree_N={n} but max coefficient degree is {max_deg}"
            )));
        }
        if self.trunc_const_c.0 <= 0 || self.trunc_const_c.1 <= 0 {
            return Err(Error::Validation("truncation constant C must be positive".into()));
        }
        match (self.order_b, &self.rational_k) {
            (4, None) => {
                return Err(Error::Validation("b=4 operator requires the constant K".into()))
            }
            (3, Some(_)) => {
                return Err(Error::Validation("b=3 operator must not carry K".into()))
            }
            _ => {}
        }
        let loci = 2 + self.other_sing_loci.len();
        if self.denom_exponents.len() != loci {
            return Err(Error::Validation(format!(
                "expected {loci} denominator exponents, got {}",
                self.denom_exponents.len()
            )));
        }
        Ok(())
    }
}

// ----------------------------------------------------------------------------
// Database format
// ----------------------------------------------------------------------------
//
// One operator per line:
//   name | b | N | s[0] ; s[1] ; ... ; s[b] | C | K or - | conifold | apparent
//        | other (; separated) or - | denom exponents or -
// where each s[i] and each locus polynomial is an ascending space-separated
// integer coefficient list, and C, K are written r/s (or plain integers).

pub fn parse_operator(line: &str) -> Result<CYOperator> {
    let err = |field: &str, msg: String| Error::Parse {
        context: format!("operator line, field '{field}'"),
        message: msg,
    };
    let fields: Vec<&str> = line.split('|').map(|f| f.trim()).collect();
    if fields.len() != 10 {
        return Err(err("count", format!("expected 10 |-separated fields, got {}", fields.len())));
    }
    let name = fields[0].to_string();
    if name.is_empty() {
        return Err(err("name", "empty".into()));
    }
    let order_b: u32 = fields[1]
        .parse()
        .map_err(|e| err("b", format!("{e}")))?;
    let degree_n: u32 = fields[2]
        .parse()
        .map_err(|e| err("N", format!("{e}")))?;
    let parse_ints = |s: &str, field: &str| -> Result<Vec<BigInt>> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<BigInt>()
                    .map_err(|e| err(field, format!("bad integer '{t}': {e}")))
            })
            .collect()
    };
    let rows: Vec<&str> = fields[3].split(';').map(|r| r.trim()).collect();
    if rows.len() != order_b as usize + 1 {
        return Err(err(
            "coefficients",
            format!("expected {} rows, got {}", order_b + 1, rows.len()),
        ));
    }
    let mut coeffs = Vec::new();
    for row in rows {
        let mut v = parse_ints(row, "coefficients")?;
        if v.len() > degree_n as usize + 1 {
            return Err(err("coefficients", "row longer than N+1".into()));
        }
        v.resize(degree_n as usize + 1, BigInt::zero());
        coeffs.push(v);
    }
    let parse_ratio = |s: &str, field: &str| -> Result<(i64, i64)> {
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (
                a.trim().parse::<i64>().map_err(|e| err(field, format!("{e}")))?,
                b.trim().parse::<i64>().map_err(|e| err(field, format!("{e}")))?,
            ),
            None => (s.parse::<i64>().map_err(|e| err(field, format!("{e}")))?, 1),
        };
        if den == 0 {
            return Err(err(field, "zero denominator".into()));
        }
        Ok((num, den))
    };
    let trunc_const_c = parse_ratio(fields[4], "C")?;
    let rational_k = if fields[5] == "-" {
        None
    } else {
        Some(parse_ratio(fields[5], "K")?)
    };
    let conifold_locus = parse_ints(fields[6], "conifold")?;
    let apparent_sing_locus = parse_ints(fields[7], "apparent")?;
    let other_sing_loci: Vec<Vec<BigInt>> = if fields[8] == "-" {
        Vec::new()
    } else {
        fields[8]
            .split(';')
            .map(|s| parse_ints(s.trim(), "other"))
            .collect::<Result<_>>()?
    };
    let denom_exponents: Vec<u32> = if fields[9] == "-" {
        // default exponents: (apparent^2, conifold^1) for b=4, (1,1) for b=3,
        // stored in (conifold, apparent, other...) order
        let (con, app) = if order_b == 4 { (1, 2) } else { (1, 1) };
        let mut v = vec![con, app];
        v.extend(std::iter::repeat(1).take(other_sing_loci.len()));
        v
    } else {
        fields[9]
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>().map_err(|e| err("denom exponents", format!("{e}")))
            })
            .collect::<Result<_>>()?
    };

    let mut op = CYOperator {
        name,
        order_b,
        degree_n,
        coeffs,
        trunc_const_c,
        rational_k,
        conifold_locus,
        apparent_sing_locus,
        other_sing_loci,
        denom_exponents,
    };
    normalize(&mut op)?;
    op.check_invariants()?;
    Ok(op)
}

/// If S_b(0) != 1 but divides every coefficient, divide the operator through.
fn normalize(op: &mut CYOperator) -> Result<()> {
    let b = op.order_b as usize;
    let lead = op.coeffs[b][0].clone();
    if lead.is_one() || lead.is_zero() {
        return Ok(());
    }
    let divisible = op
        .coeffs
        .iter()
        .flatten()
        .all(|c| (c % &lead).is_zero());
    if !divisible {
        return Err(Error::Validation(format!(
            "cannot normalize: S_b(0) = {lead} does not divide all coefficients"
        )));
    }
    for row in op.coeffs.iter_mut() {
        for c in row.iter_mut() {
            *c = &*c / &lead;
        }
    }
    Ok(())
}

pub fn serialize_operator(op: &CYOperator) -> String {
    let ints = |v: &[BigInt]| {
        v.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let ratio = |(n, d): (i64, i64)| {
        if d == 1 {
            n.to_string()
        } else {
            format!("{n}/{d}")
        }
    };
    let rows = op
        .coeffs
        .iter()
        .map(|r| ints(r))
        .collect::<Vec<_>>()
        .join(" ; ");
    let other = if op.other_sing_loci.is_empty() {
        "-".to_string()
    } else {
        op.other_sing_loci
            .iter()
            .map(|l| ints(l))
            .collect::<Vec<_>>()
            .join(" ; ")
    };
    let exps = op
        .denom_exponents
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    format!(
        "{} | {} | {} | {} | {} | {} | {} | {} | {} | {}",
        op.name,
        op.order_b,
        op.degree_n,
        rows,
        ratio(op.trunc_const_c),
        op.rational_k.map(ratio).unwrap_or_else(|| "-".into()),
        ints(&op.conifold_locus),
        ints(&op.apparent_sing_locus),
        other,
        exps,
    )
}

// ----------------------------------------------------------------------------
// Recurrence derivation
// ----------------------------------------------------------------------------

/// Integer polynomial tables for the coupled period recurrence. Solving for
/// c_{i,n} in ascending i:
///   n^b c_{i,n} = sum_{k=1..N} sum_{r=0..i} R[r][k](n) c_{i-r,n-k}
///                 - sum_{r=1..i} G[r](n) c_{i-r,n}
/// with R[r][k](n) = -(Q_k^(r)/r!)(n-k) and G[r](n) = C(b,r) n^(b-r).
#[derive(Clone, Debug)]
pub struct RecurrenceTable {
    pub b: u32,
    pub n_deg: u32,
    /// shifted_polys[r][k-1]: ascending coefficients of R[r][k](n).
    pub shifted_polys: Vec<Vec<Vec<BigInt>>>,
    /// same_n_couplings[r-1]: ascending coefficients of G[r](n).
    pub same_n_couplings: Vec<Vec<BigInt>>,
}

/// Divided derivative Q^(r)/r! of an ascending theta-polynomial: integral by
/// the binomial identity.
fn divided_derivative(q: &[BigInt], r: u64) -> Vec<BigInt> {
    if r as usize >= q.len() {
        return vec![BigInt::zero()];
    }
    (r as usize..q.len())
        .map(|e| &q[e] * binomial(e as u64, r))
        .collect()
}

/// Substitute x -> x + shift into an ascending-coefficient polynomial.
fn poly_shift(q: &[BigInt], shift: &BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); q.len()];
    for c in q.iter().rev() {
        // out = out * (x + shift) + c
        let mut next = vec![BigInt::zero(); q.len()];
        for (e, v) in out.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            next[e] += v * shift;
            if e + 1 < q.len() {
                next[e + 1] += v;
            }
        }
        next[0] += c;
        out = next;
    }
    out
}

pub fn eval_poly(q: &[BigInt], n: u64) -> BigInt {
    let x = BigInt::from(n);
    let mut v = BigInt::zero();
    for c in q.iter().rev() {
        v = v * &x + c;
    }
    v
}

pub fn derive_recurrence(op: &CYOperator) -> RecurrenceTable {
    let b = op.order_b as usize;
    let n_deg = op.degree_n as usize;
    let mut shifted = Vec::new();
    for r in 0..b {
        let mut per_k = Vec::new();
        for k in 1..=n_deg {
            let q = op.q_poly(k);
            let dd = divided_derivative(&q, r as u64);
            let shiftv = BigInt::from(-(k as i64));
            let mut sh = poly_shift(&dd, &shiftv);
            for c in sh.iter_mut() {
                *c = -&*c;
            }
            per_k.push(sh);
        }
        shifted.push(per_k);
    }
    let mut same_n = Vec::new();
    for r in 1..b {
        let mut g = vec![BigInt::zero(); b - r + 1];
        g[b - r] = binomial(b as u64, r as u64);
        same_n.push(g);
    }
    RecurrenceTable {
        b: op.order_b,
        n_deg: op.degree_n,
        shifted_polys: shifted,
        same_n_couplings: same_n,
    }
}

// ----------------------------------------------------------------------------
// Validation report
// ----------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub mum_ok: bool,
    pub integrality_ok: bool,
    pub self_duality_ok: bool,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.mum_ok && self.integrality_ok && self.self_duality_ok
    }
}

/// Checks MUM normalization, N-integrality of the holomorphic period
/// (N^m c_{0,m} integral), and self-duality to finite series order.
pub fn validate_operator(
    op: &CYOperator,
    n_integrality: u64,
    check_depth: usize,
) -> ValidationReport {
    let mut notes = Vec::new();
    let mum_ok = op.check_invariants().is_ok();

    let table = derive_recurrence(op);
    let exact = crate::recurrence::run_exact_recurrence(&table, 0, check_depth);
    let mut integrality_ok = true;
    let nn = BigInt::from(n_integrality);
    let mut scale = BigInt::one();
    for m in 0..=check_depth {
        let v = &exact[0][m] * BigRational::from_integer(scale.clone());
        if !v.is_integer() {
            integrality_ok = false;
            notes.push(format!("N^{m} c_0,{m} = {v} is not integral"));
            break;
        }
        scale *= &nn;
    }

    let self_duality_ok = match self_duality_check(op, check_depth) {
        Ok(ok) => ok,
        Err(e) => {
            notes.push(format!("self-duality check aborted: {e}"));
            false
        }
    };

    ValidationReport {
        mum_ok,
        integrality_ok,
        self_duality_ok,
        notes,
    }
}

// Differential operators in normal form: v[i] is the series coefficient of
// theta^i (acting on the right), all series truncated at a common bound.

type RatOp = Vec<Vec<BigRational>>;

fn rat_series_mul(a: &[BigRational], b: &[BigRational], bound: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); bound + 1];
    for (i, x) in a.iter().enumerate().take(bound + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > bound {
                break;
            }
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn series_theta(a: &[BigRational]) -> Vec<BigRational> {
    a.iter()
        .enumerate()
        .map(|(n, c)| c * BigRational::from_integer(BigInt::from(n)))
        .collect()
}

/// Compose A after B (A acts second). Both and the result are in normal form.
fn op_compose(a: &RatOp, b: &RatOp, bound: usize) -> RatOp {
    let deg_out = a.len() + b.len() - 2;
    let mut out: RatOp = vec![vec![BigRational::zero(); bound + 1]; deg_out + 1];
    for (i, ai) in a.iter().enumerate() {
        // theta^i applied to (sum_k b_k theta^k): push theta through one at a time
        let mut cur: RatOp = b.clone();
        for _ in 0..i {
            let mut next: RatOp = vec![vec![BigRational::zero(); bound + 1]; cur.len() + 1];
            for (k, bk) in cur.iter().enumerate() {
                for (n, v) in bk.iter().enumerate() {
                    if !v.is_zero() {
                        next[k + 1][n] += v;
                    }
                }
                let tb = series_theta(bk);
                for (n, v) in tb.iter().enumerate() {
                    if !v.is_zero() {
                        next[k][n] += v;
                    }
                }
            }
            cur = next;
        }
        for (k, bk) in cur.iter().enumerate() {
            let prod = rat_series_mul(ai, bk, bound);
            for (n, v) in prod.iter().enumerate() {
                if !v.is_zero() {
                    out[k][n] += v;
                }
            }
        }
    }
    out
}

/// Finite-order self-duality: with the normalized operator
/// Lt = theta^b + sum_i A_i theta^i, A_i = S_i/S_b, and alpha the series
/// solution of alpha' = -(2/b) (A_{b-1}/phi) alpha, verify
///   Lt o alpha = (-1)^b alpha o Lt*        (theta* = -theta)
/// through the requested order.
fn self_duality_check(op: &CYOperator, depth: usize) -> Result<bool> {
    let b = op.order_b as usize;
    let bound = depth + 2;
    // S_b^{-1} as a series
    let sb: Vec<BigRational> = (0..=bound)
        .map(|k| {
            if k <= op.degree_n as usize {
                BigRational::from_integer(op.coeffs[b][k].clone())
            } else {
                BigRational::zero()
            }
        })
        .collect();
    let mut sb_inv = vec![BigRational::zero(); bound + 1];
    sb_inv[0] = BigRational::one();
    for n in 1..=bound {
        let mut s = BigRational::zero();
        for j in 1..=n {
            s += &sb[j] * &sb_inv[n - j];
        }
        sb_inv[n] = -s;
    }
    let a_coeffs: Vec<Vec<BigRational>> = (0..=b)
        .map(|i| {
            let si: Vec<BigRational> = (0..=bound)
                .map(|k| {
                    if k <= op.degree_n as usize {
                        BigRational::from_integer(op.coeffs[i][k].clone())
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            rat_series_mul(&si, &sb_inv, bound)
        })
        .collect();

    // g = A_{b-1}/phi (regular since S_{b-1}(0)=0), alpha' = -(2/b) g alpha
    let mut g = vec![BigRational::zero(); bound + 1];
    for n in 0..bound {
        g[n] = a_coeffs[b - 1][n + 1].clone();
    }
    let factor = BigRational::new(BigInt::from(-2), BigInt::from(b as i64));
    let mut alpha = vec![BigRational::zero(); bound + 1];
    alpha[0] = BigRational::one();
    for n in 1..=bound {
        let mut s = BigRational::zero();
        for m in 0..n {
            s += &g[n - 1 - m] * &alpha[m];
        }
        alpha[n] = &factor * s / BigRational::from_integer(BigInt::from(n as i64));
    }

    let lt: RatOp = a_coeffs;
    // adjoint: sum_i (-theta)^i o A_i
    let mut adj: RatOp = vec![vec![BigRational::zero(); bound + 1]; b + 1];
    for (i, ai) in lt.iter().enumerate() {
        let mut pow_t: RatOp = vec![vec![BigRational::zero(); bound + 1]; 1];
        pow_t[0][0] = BigRational::one();
        let minus_theta: RatOp = vec![
            vec![BigRational::zero(); bound + 1],
            {
                let mut v = vec![BigRational::zero(); bound + 1];
                v[0] = -BigRational::one();
                v
            },
        ];
        for _ in 0..i {
            pow_t = op_compose(&minus_theta, &pow_t, bound);
        }
        let mult: RatOp = vec![ai.clone()];
        let term = op_compose(&pow_t, &mult, bound);
        for (k, tk) in term.iter().enumerate() {
            for (n, v) in tk.iter().enumerate() {
                if !v.is_zero() {
                    adj[k][n] += v;
                }
            }
        }
    }

    let alpha_op: RatOp = vec![alpha];
    let lhs = op_compose(&lt, &alpha_op, bound);
    let mut rhs = op_compose(&alpha_op, &adj, bound);
    if b % 2 == 1 {
        for row in rhs.iter_mut() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
    }
    let kmax = lhs.len().max(rhs.len());
    for k in 0..kmax {
        let zero_row: Vec<BigRational> = vec![BigRational::zero(); bound + 1];
        let l = lhs.get(k).unwrap_or(&zero_row);
        let r = rhs.get(k).unwrap_or(&zero_row);
        for n in 0..=depth {
            if l[n] != r[n] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// D(phi) locus polynomials with their exponents, in evaluation order.
pub fn denominator_loci(op: &CYOperator) -> Vec<(&[BigInt], u32)> {
    let mut v: Vec<(&[BigInt], u32)> = vec![
        (op.conifold_locus.as_slice(), op.denom_exponents[0]),
        (op.apparent_sing_locus.as_slice(), op.denom_exponents[1]),
    ];
    for (i, l) in op.other_sing_loci.iter().enumerate() {
        v.push((l.as_slice(), op.denom_exponents[2 + i]));
    }
    v
}
