//! Brute-force oracles for the depth-one product formula.
//!
//! Everything here is computed from scratch by looping over monic polynomials
//! and inverting each one; nothing goes through [`PowerSumEngine`] caches
//! except the engine-side comparison in [`check_chen`].

use serde::Serialize;

use crate::error::Result;
use crate::exec::Exec;
use crate::gf::{lucas_binom, Fe, FieldSpec, Sign};
use crate::index::Letter;
use crate::powersums::PowerSumEngine;
use crate::ring_a::{check_budget, monic_at, monic_count};
use crate::shuffle::chen_delta;
use crate::useries::USeries;

/// a^{-1}, …, a^{-s_max} for every monic a of one degree, plus their sums.
pub struct DegreeTable {
    pub d: u32,
    /// per_monic[i][s-1] = a_i^{-s}
    pub per_monic: Vec<Vec<USeries>>,
    /// sums[s-1] = Σ_a a^{-s}
    pub sums: Vec<USeries>,
}

impl DegreeTable {
    pub fn build(f: &FieldSpec, d: u32, s_max: u32, prec: i64, budget: u64, exec: Exec) -> Result<Self> {
        check_budget(f.q(), d, budget)?;
        let ids: Vec<u64> = (0..monic_count(f.q(), d) as u64).collect();
        let per_monic = exec.map(&ids, |&i| {
            let inv = USeries::from_poly(&monic_at(f, d, i), f).inv(prec, f).expect("monic");
            let mut out = Vec::with_capacity(s_max as usize);
            let mut cur = inv.clone();
            for _ in 0..s_max {
                out.push(cur.clone());
                cur = cur.mul(&inv, f).truncate(prec);
            }
            out
        });
        let mut sums = vec![USeries::zero_to(prec); s_max as usize];
        for row in &per_monic {
            for (acc, x) in sums.iter_mut().zip(row) {
                acc.add_assign(x, f);
            }
        }
        Ok(DegreeTable { d, per_monic, sums })
    }

    pub fn sum(&self, s: u32) -> &USeries {
        &self.sums[s as usize - 1]
    }

    /// Σ_{a ≠ b} a^{-s1} b^{-s2} over monic a, b of this degree.
    pub fn off_diagonal(&self, s1: u32, s2: u32, f: &FieldSpec) -> USeries {
        let total = self.sum(s2);
        let prec = total.prec();
        let mut acc = USeries::zero_to(prec);
        for row in &self.per_monic {
            let others = total.sub(&row[s2 as usize - 1], f);
            acc.add_assign(&row[s1 as usize - 1].mul(&others, f).truncate(prec), f);
        }
        acc
    }
}

/// One (q, d, s1, s2) case of the oracle comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ChenCase {
    pub d: u32,
    pub s1: u32,
    pub s2: u32,
    pub prec: i64,
    /// Pair sum over a ≠ b against Σ_j Δ^j (deg x = d > deg y sums).
    pub pfdt_residual: i64,
    /// Engine S_d(s1)S_d(s2) − S_d(s1+s2) against Σ_j Δ^j S_d(s1+s2−j, j).
    pub chen_residual: i64,
    /// Engine power sums against the brute-force tables.
    pub engine_residual: i64,
    pub pass: bool,
}

/// Runs every case with d ≤ d_max and s1 + s2 ≤ w_max at absolute precision
/// (q−1)(d_max·w_max + extra).
pub fn check_chen(engine: &PowerSumEngine, d_max: u32, w_max: u32, extra: i64) -> Result<Vec<ChenCase>> {
    let f = engine.field();
    let q1 = f.q() as i64 - 1;
    let prec = q1 * (d_max as i64 * w_max as i64 + extra);
    let tables: Vec<DegreeTable> = (0..=d_max)
        .map(|d| DegreeTable::build(f, d, w_max, prec, engine.budget(), engine.exec()))
        .collect::<Result<_>>()?;
    // below[d][j-1] = Σ_{deg y < d} y^{-j}
    let mut below = vec![vec![USeries::zero(); w_max as usize]];
    for d in 1..=d_max as usize {
        let row = (1..=w_max).map(|j| below[d - 1][j as usize - 1].add(tables[d - 1].sum(j), f)).collect();
        below.push(row);
    }
    let local = PowerSumEngine::with_options(engine.field_arc(), prec, engine.budget(), engine.exec());
    let one = Sign::ONE;
    let mut out = Vec::new();
    for d in 0..=d_max {
        let t = &tables[d as usize];
        for s1 in 1..w_max {
            for s2 in 1..=(w_max - s1) {
                let w = s1 + s2;
                let mut pf = USeries::zero_to(prec);
                let mut chen = USeries::zero_to(prec);
                for j in (1..w).filter(|j| j % (q1 as u32) == 0) {
                    let c = f.from_fp(chen_delta(j, s1, s2, f.p())?);
                    let y = &below[d as usize][j as usize - 1];
                    pf.add_assign(&t.sum(w - j).mul(y, f).truncate(prec).scale(c, f), f);
                    let word = [Letter::new(w - j, one), Letter::new(j, one)];
                    chen.add_assign(&local.composite(d, &word)?.scale(c, f), f);
                }
                let pfdt_residual = t.off_diagonal(s1, s2, f).residual_valuation(&pf, f).min(prec);
                let lhs = local
                    .power_sum(d, s1)?
                    .mul(&*local.power_sum(d, s2)?, f)
                    .truncate(prec)
                    .sub(&*local.power_sum(d, w)?, f);
                let chen_residual = lhs.residual_valuation(&chen, f).min(prec);
                let engine_residual = [s1, s2, w]
                    .iter()
                    .map(|&s| Ok(local.power_sum(d, s)?.residual_valuation(t.sum(s), f)))
                    .collect::<Result<Vec<i64>>>()?
                    .into_iter()
                    .min()
                    .unwrap_or(prec)
                    .min(prec);
                out.push(ChenCase {
                    d,
                    s1,
                    s2,
                    prec,
                    pfdt_residual,
                    chen_residual,
                    engine_residual,
                    pass: pfdt_residual >= prec && chen_residual >= prec && engine_residual >= prec,
                });
            }
        }
    }
    Ok(out)
}

/// Both sides of the single-pair decomposition
///
///   1/(a^{s1} b^{s2}) = −Σ_{0<j<s1+s2} [ c_j(s2) / (a^{s1+s2−j} (a−b)^j)
///                                      + c_j(s1) / (b^{s1+s2−j} (b−a)^j) ]
///
/// with c_j(s) = (−1)^{s−1} C(j−1, s−1). The overall sign cancels against
/// Σ_{c ∈ F_q^×} c^{−j} = −1 once a−b runs over all nonzero polynomials of
/// lower degree, which is why the summed identity carries +Δ^j.
pub fn partial_fractions(a: &USeries, b: &USeries, s1: u32, s2: u32, prec: i64, f: &FieldSpec) -> Result<(USeries, USeries)> {
    let p = f.p();
    let lhs = a.pow(-(s1 as i64), prec, f)?.mul(&b.pow(-(s2 as i64), prec, f)?, f).truncate(prec);
    let a_minus_b = a.sub(b, f);
    let b_minus_a = a_minus_b.neg(f);
    let mut rhs = USeries::zero_to(prec);
    let w = s1 + s2;
    for j in 1..w {
        let c = |s: u32| -> Fe {
            let v = f.from_fp(lucas_binom(j as u64 - 1, s as u64 - 1, p));
            if (s - 1).is_multiple_of(2) { f.neg(v) } else { v }
        };
        let x = a.pow(-((w - j) as i64), prec, f)?.mul(&a_minus_b.pow(-(j as i64), prec, f)?, f);
        let y = b.pow(-((w - j) as i64), prec, f)?.mul(&b_minus_a.pow(-(j as i64), prec, f)?, f);
        rhs.add_assign(&x.truncate(prec).scale(c(s2), f), f);
        rhs.add_assign(&y.truncate(prec).scale(c(s1), f), f);
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring_a::PolyA;
    use std::sync::Arc;

    #[test]
    fn oracle_cases_pass_small() {
        for p in [3u32, 5] {
            let f = Arc::new(FieldSpec::new(p, 1, 2).unwrap());
            let e = PowerSumEngine::new(f, 40);
            for c in check_chen(&e, 2, 6, 20).unwrap() {
                assert!(c.pass, "q={p} {c:?}");
            }
        }
    }

    #[test]
    fn partial_fraction_identity() {
        let f = FieldSpec::new(5, 1, 2).unwrap();
        let poly = |c: &[u32]| USeries::from_poly(&PolyA::from_coeffs(c.iter().map(|&x| f.from_fp(x)).collect()), &f);
        let (a, b) = (poly(&[1, 2, 0, 1]), poly(&[3, 0, 1]));
        for s1 in 1..5 {
            for s2 in 1..5 {
                let (l, r) = partial_fractions(&a, &b, s1, s2, 200, &f).unwrap();
                assert!(l.agrees(&r, &f), "s1={s1} s2={s2}");
            }
        }
    }
}
