//! Anderson–Thakur polynomials H_{s−1} ∈ A[t], found by linear algebra.
//!
//! Unknowns are the F_q coefficients c_ij of H = Σ c_ij θ^i t^j with
//! i ≤ (s−1)q/(q−1). Each u-digit of
//!     H^{(d)}(θ) · Ω^{(d)}(θ)^s = Γ_s S_d(s) Ω(θ)^s,    d = 0, 1, 2,
//! gives F_p-linear equations. For d = 2 the monomials θ^{i q² + j} are
//! distinct while j < q², so the solution is unique once it exists; the
//! t-degree bound J grows from 0 until the system becomes consistent.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec, Sign};
use crate::linalg::{RowReducer, Solution};
use crate::motive::omega::{omega_at, qpow};
use crate::powersums::PowerSumEngine;
use crate::ring_a::{carlitz_gamma, PolyA};
use crate::useries::USeries;

/// A polynomial in A[t], stored by t-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtPoly {
    by_t: Vec<PolyA>,
}

impl AtPoly {
    pub fn new(mut by_t: Vec<PolyA>) -> Self {
        while by_t.len() > 1 && by_t.last().is_some_and(|p| p.is_zero()) {
            by_t.pop();
        }
        if by_t.is_empty() {
            by_t.push(PolyA::zero());
        }
        AtPoly { by_t }
    }

    pub fn one() -> Self {
        AtPoly { by_t: vec![PolyA::one()] }
    }

    pub fn is_one(&self) -> bool {
        self.by_t.len() == 1 && self.by_t[0] == PolyA::one()
    }

    /// Coefficient of t^j.
    pub fn t_coeff(&self, j: usize) -> PolyA {
        self.by_t.get(j).cloned().unwrap_or_else(PolyA::zero)
    }

    pub fn deg_t(&self) -> usize {
        self.by_t.len() - 1
    }

    pub fn deg_theta(&self) -> usize {
        self.by_t.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// H^{(d)} evaluated at t = θ^{q^N}, exactly.
    pub fn eval(&self, d: u32, n_pow: u32, f: &FieldSpec) -> PolyA {
        let qn = (f.q() as usize).pow(n_pow);
        let mut acc = PolyA::zero();
        for (j, h) in self.by_t.iter().enumerate() {
            if !h.is_zero() {
                acc = acc.add(&h.twist(d, f).shift(j * qn), f);
            }
        }
        acc
    }

    /// Largest θ-degree of [`AtPoly::eval`] without computing it.
    pub fn eval_degree(&self, d: u32, n_pow: u32, q: u32) -> Option<i64> {
        let qd = qpow(q, d)?;
        let qn = qpow(q, n_pow)?;
        self.by_t
            .iter()
            .enumerate()
            .filter_map(|(j, h)| h.degree().map(|k| (j, k)))
            .map(|(j, k)| Some(qd.checked_mul(k as i64)? + qn.checked_mul(j as i64)?))
            .try_fold(0i64, |m, x| x.map(|x| m.max(x)))
    }

    pub fn display(&self, f: &FieldSpec) -> String {
        let mut parts = Vec::new();
        for (j, h) in self.by_t.iter().enumerate() {
            if h.is_zero() {
                continue;
            }
            let hs = h.display(f);
            parts.push(match j {
                0 => hs,
                1 => format!("({hs})t"),
                _ => format!("({hs})t^{j}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn to_json(&self, f: &FieldSpec) -> AtPolyJson {
        AtPolyJson {
            text: self.display(f),
            coeffs: self
                .by_t
                .iter()
                .map(|h| h.coeffs().iter().map(|&c| f.packed(c)).collect())
                .collect(),
        }
    }
}

/// `coeffs[j][i]` is the packed coefficient of θ^i t^j.
#[derive(Clone, Debug, Serialize)]
pub struct AtPolyJson {
    pub text: String,
    pub coeffs: Vec<Vec<u32>>,
}

/// deg_θ bound for H_{s−1}: ⌊(s−1)q/(q−1)⌋.
pub fn theta_degree_bound(s: u32, q: u32) -> usize {
    ((s as u64 - 1) * q as u64 / (q as u64 - 1)) as usize
}

/// Solves for H_{s−1} and caches the results.
pub struct AtSolver {
    field: Arc<FieldSpec>,
    cache: Mutex<HashMap<u32, Arc<AtPoly>>>,
    /// Relative u-digits of each imposed identity.
    margin: i64,
}

impl AtSolver {
    pub fn new(field: Arc<FieldSpec>) -> Self {
        let margin = 40 * (field.q() as i64 - 1);
        AtSolver { field, cache: Mutex::new(HashMap::new()), margin }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldSpec> {
        self.field.clone()
    }

    /// H_{s−1}, the polynomial attached to weight s.
    pub fn solve(&self, s: u32) -> Result<Arc<AtPoly>> {
        if s == 0 {
            return Err(Error::Invalid("Anderson-Thakur weight must be at least 1".into()));
        }
        if let Some(h) = self.cache.lock().expect("solver cache").get(&s) {
            return Ok(h.clone());
        }
        let h = Arc::new(self.solve_uncached(s)?);
        self.cache.lock().expect("solver cache").insert(s, h.clone());
        Ok(h)
    }

    /// Pre-seeds the cache, e.g. with a deliberately corrupted polynomial.
    pub fn insert(&self, s: u32, h: AtPoly) {
        self.cache.lock().expect("solver cache").insert(s, Arc::new(h));
    }

    fn solve_uncached(&self, s: u32) -> Result<AtPoly> {
        let f = &*self.field;
        let q = f.q();
        let i_max = theta_degree_bound(s, q);
        let j_cap = (q as usize * q as usize - 1).min(s as usize + 4);
        let mut margin = self.margin;
        for _ in 0..3 {
            let mut j_max = 0;
            while j_max <= j_cap {
                match self.attempt(s, i_max, j_max, margin)? {
                    Solution::Unique(x) => return Ok(self.assemble(&x, i_max, j_max)),
                    Solution::Inconsistent => j_max += 1,
                    Solution::Underdetermined(_) => break,
                }
            }
            if j_max > j_cap {
                return Err(Error::NoUniqueSolution(format!(
                    "H_{} not found with deg_t <= {j_cap}",
                    s - 1
                )));
            }
            margin *= 2;
        }
        Err(Error::NoUniqueSolution(format!("H_{} stays underdetermined", s - 1)))
    }

    /// F_p basis of F_q inside the tower: the images of y^k.
    fn fq_basis(&self) -> Vec<Fe> {
        let f = &*self.field;
        (0..f.e()).map(|k| f.embed(Sign(f.p().pow(k)))).collect()
    }

    fn attempt(&self, s: u32, i_max: usize, j_max: usize, margin: i64) -> Result<Solution> {
        let f = &*self.field;
        let q = f.q();
        let q1 = q as i64 - 1;
        let basis = self.fq_basis();
        let e = basis.len();
        let n_unknowns = (i_max + 1) * (j_max + 1) * e;
        let col = |i: usize, j: usize, k: usize| (i * (j_max + 1) + j) * e + k;
        let gamma = carlitz_gamma(f, s as u64)?;
        let gdeg = gamma.degree().unwrap_or(0) as i64;
        let gamma_s = USeries::from_poly(&gamma, f);
        let mut rr = RowReducer::new(f.p(), n_unknowns + 1);
        for d in 0..=2u32 {
            let qd = qpow(q, d).expect("small");
            let lead = s as i64 * qd * q as i64;
            let top = qd * i_max as i64 + j_max as i64;
            let lo = lead - q1 * top;
            let hi = lead + margin;
            let p_w = hi + q1 * top - (s as i64 - 1) * q as i64 * qd + 1;
            let ws = omega_at(f, d, 0, p_w)?.pow(s as i64, p_w, f)?;
            let p0 = hi + q1 * gdeg - (s as i64 - 1) * q as i64 + 1;
            let w0s = omega_at(f, 0, 0, p0)?.pow(s as i64, p0, f)?;
            let engine = PowerSumEngine::new(self.field.clone(), hi + q1 * gdeg - s as i64 * q as i64 + 1);
            let sd = engine.power_sum(d, s)?;
            let rhs = gamma_s.mul(&sd, f).mul(&w0s, f);
            if rhs.prec() < hi {
                return Err(Error::Precision(format!("right side of H_{} identity", s - 1)));
            }
            let lo = rhs.valuation().map_or(lo, |v| v.min(lo));
            let mut unknowns = Vec::with_capacity(n_unknowns);
            for i in 0..=i_max {
                for j in 0..=j_max {
                    let b = ws.mul(&USeries::theta_pow(qd * i as i64 + j as i64, f), f);
                    for (k, &beta) in basis.iter().enumerate() {
                        unknowns.push((col(i, j, k), b.scale(beta, f)));
                    }
                }
            }
            let fp = f.fp_degree() as usize;
            let mut row = vec![0u32; n_unknowns + 1];
            for digit in lo..hi {
                let coords: Vec<Vec<u32>> =
                    unknowns.iter().map(|(_, b)| f.coords(b.coeff(digit))).collect();
                let rc = f.coords(rhs.coeff(digit));
                for c in 0..fp {
                    for ((cidx, _), v) in unknowns.iter().zip(&coords) {
                        row[*cidx] = v[c];
                    }
                    row[n_unknowns] = rc[c];
                    rr.push(&row);
                }
            }
        }
        Ok(rr.solve_augmented())
    }

    fn assemble(&self, x: &[u32], i_max: usize, j_max: usize) -> AtPoly {
        let f = &*self.field;
        let basis = self.fq_basis();
        let e = basis.len();
        let by_t = (0..=j_max)
            .map(|j| {
                let coeffs = (0..=i_max)
                    .map(|i| {
                        (0..e).fold(Fe::ZERO, |acc, k| {
                            let xk = x[(i * (j_max + 1) + j) * e + k];
                            f.add(acc, f.mul(f.from_fp(xk), basis[k]))
                        })
                    })
                    .collect();
                PolyA::from_coeffs(coeffs)
            })
            .collect();
        AtPoly::new(by_t)
    }
}

/// Outcome of checking H^{(d)}(θ) Ω^{(d)}(θ)^s = Γ_s S_d(s) Ω(θ)^s.
#[derive(Clone, Debug, Serialize)]
pub struct AtCheck {
    pub s: u32,
    pub d: u32,
    /// Valuation of the right side.
    pub valuation: i64,
    pub target: i64,
    pub residual_valuation: i64,
    pub pass: bool,
}

/// Verifies the interpolation identity for H_{s−1} at one d, to `rel`
/// u-digits beyond the leading term. Both sides are computed independently:
/// the left from H and the product for Ω, the right from power sums.
pub fn check_interpolation(solver: &AtSolver, s: u32, d: u32, rel: i64) -> Result<AtCheck> {
    let f = solver.field();
    let q = f.q();
    let q1 = q as i64 - 1;
    let h = solver.solve(s)?;
    let gamma = carlitz_gamma(f, s as u64)?;
    let gdeg = gamma.degree().unwrap_or(0) as i64;
    let probe = PowerSumEngine::new(solver.field_arc(), 64);
    let vs = probe.power_sum_valuation(d, s)?;
    let valuation = vs - q1 * gdeg + s as i64 * q as i64;
    let target = valuation + rel;
    let qd = qpow(q, d).ok_or_else(|| Error::Precision("twist too deep".into()))?;
    let hd = h.eval(d, 0, f);
    let hdeg = hd.degree().unwrap_or(0) as i64;
    let p_w = target + q1 * hdeg - (s as i64 - 1) * q as i64 * qd + 1;
    let lhs = omega_at(f, d, 0, p_w)?
        .pow(s as i64, p_w, f)?
        .mul(&USeries::from_poly(&hd, f), f);
    let engine = PowerSumEngine::new(solver.field_arc(), target + q1 * gdeg - s as i64 * q as i64 + 1);
    let sd = engine.power_sum(d, s)?;
    let p0 = target - vs + q1 * gdeg - (s as i64 - 1) * q as i64 + 1;
    let rhs = omega_at(f, 0, 0, p0)?
        .pow(s as i64, p0, f)?
        .mul(&sd, f)
        .mul(&USeries::from_poly(&gamma, f), f);
    let residual = lhs.truncate(target).residual_valuation(&rhs.truncate(target), f);
    let reached = lhs.prec().min(rhs.prec()) >= target;
    Ok(AtCheck {
        s,
        d,
        valuation,
        target,
        residual_valuation: residual,
        pass: reached && residual >= target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(p: u32) -> AtSolver {
        AtSolver::new(Arc::new(FieldSpec::new(p, 1, 2).unwrap()))
    }

    #[test]
    fn small_weights_give_one() {
        for p in [3u32, 5] {
            let sv = solver(p);
            for s in 1..=p {
                assert!(sv.solve(s).unwrap().is_one(), "q={p} s={s}");
            }
        }
    }

    #[test]
    fn first_nontrivial_polynomial() {
        for p in [3u32, 5] {
            let sv = solver(p);
            let h = sv.solve(p + 1).unwrap();
            assert!(!h.is_one());
            assert!(h.deg_theta() <= theta_degree_bound(p + 1, p));
            for d in 0..=3 {
                let c = check_interpolation(&sv, p + 1, d, 60 * (p as i64 - 1)).unwrap();
                assert!(c.pass, "{c:?}");
            }
        }
    }

    #[test]
    fn corrupted_polynomial_fails_check() {
        let sv = solver(3);
        let f = sv.field().clone();
        sv.insert(2, AtPoly::new(vec![PolyA::from_coeffs(vec![f.from_fp(2)])]));
        let c = check_interpolation(&sv, 2, 1, 60).unwrap();
        assert!(!c.pass);
    }
}
