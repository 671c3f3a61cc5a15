//! Ω = (−θ)^{−q/(q−1)} ∏_{i≥1} (1 − t/θ^{q^i}) and the Carlitz period.
//!
//! With (−θ)^{1/(q−1)} = η u^{-1} the prefactor is the exact monomial
//! η^{−q} u^q, and each factor is 1 − u^{(q−1)q^i} t.

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};
use crate::motive::tseries::TSeries;
use crate::useries::{USeries, EXACT};

/// Largest absolute u-precision the motive code will allocate.
pub const MAX_PREC: i64 = 1 << 22;

/// q^n as i64, None on overflow.
pub fn qpow(q: u32, n: u32) -> Option<i64> {
    (q as i64).checked_pow(n)
}

pub fn prefactor(f: &FieldSpec) -> Result<USeries> {
    let q = f.q() as i64;
    let c = f.pow(f.eta()?, -q)?;
    Ok(USeries::monomial(c, q))
}

/// Number of product factors 1 − u^{(q−1)q^i} t that can touch digits below
/// `prec` once the prefactor u^q is applied.
pub fn factor_count(f: &FieldSpec, prec: i64) -> u32 {
    let q = f.q();
    let need = prec - q as i64;
    let mut i = 1;
    while qpow(q, i).is_some_and(|qi| (q as i64 - 1) * qi < need) {
        i += 1;
    }
    i - 1
}

fn check_prec(prec: i64) -> Result<()> {
    if prec > MAX_PREC {
        return Err(Error::Precision(format!("u-precision {prec} exceeds {MAX_PREC}")));
    }
    Ok(())
}

/// Ω with the t^n coefficient known to `precs[n]` digits.
pub fn omega(f: &FieldSpec, precs: &[i64]) -> Result<TSeries> {
    let pmax = precs.iter().copied().max().unwrap_or(0);
    omega_with_factors(f, precs, factor_count(f, pmax))
}

/// As [`omega`] but with an explicit number of product factors.
pub fn omega_with_factors(f: &FieldSpec, precs: &[i64], i_max: u32) -> Result<TSeries> {
    let pmax = precs.iter().copied().max().unwrap_or(0);
    check_prec(pmax)?;
    let q = f.q();
    let inner = pmax - q as i64;
    let t_len = precs.len();
    let mut prod = vec![USeries::zero_to(inner); t_len];
    prod[0] = USeries::one();
    for i in 1..=i_max {
        let e = (q as i64 - 1) * qpow(q, i).expect("bounded by precision");
        for n in (1..t_len).rev() {
            let step = prod[n - 1].shift(e).neg(f).truncate(inner);
            prod[n].add_assign(&step, f);
        }
    }
    let pre = prefactor(f)?;
    let coeffs = prod
        .iter()
        .zip(precs)
        .map(|(p, &k)| p.truncate(inner).mul(&pre, f).truncate(k))
        .collect();
    Ok(TSeries::new(coeffs))
}

pub fn omega_uniform(f: &FieldSpec, prec: i64, t_len: usize) -> Result<TSeries> {
    omega(f, &vec![prec; t_len])
}

/// Ω^{(d)} evaluated at t = θ^{q^N}, to absolute precision `prec`.
///
/// Factor i becomes 1 − θ^{q^N − q^{i+d}}; it vanishes for i = N − d, so the
/// value is exactly zero when N > d.
pub fn omega_at(f: &FieldSpec, d: u32, n_pow: u32, prec: i64) -> Result<USeries> {
    if n_pow > d {
        return Ok(USeries::zero());
    }
    check_prec(prec)?;
    let q = f.q();
    let Some(lead) = qpow(q, d + 1) else {
        return Ok(USeries::zero_to(prec));
    };
    if lead >= prec {
        return Ok(USeries::zero_to(prec));
    }
    let qn = qpow(q, n_pow).expect("n_pow <= d");
    let inner = prec - lead;
    let mut prod = USeries::one();
    let mut i = 1;
    while let Some(qi) = qpow(q, i + d) {
        let e = (q as i64 - 1) * (qi - qn);
        if e >= inner {
            break;
        }
        let factor = USeries::one().sub(&USeries::monomial(Fe::ONE, e), f);
        prod = prod.mul(&factor, f).truncate(inner);
        i += 1;
    }
    let c = f.frobenius(f.pow(f.eta()?, -(q as i64))?, d);
    Ok(prod.truncate(inner).mul(&USeries::monomial(c, lead), f).truncate(prec))
}

/// π̃ = 1/Ω(θ).
pub fn pi_tilde(f: &FieldSpec, prec: i64) -> Result<USeries> {
    let q = f.q() as i64;
    omega_at(f, 0, 0, prec + 2 * q)?.inv(prec, f)
}

/// Exact zero or a series known to be zero below `prec`.
pub fn is_zero_to(x: &USeries, prec: i64) -> bool {
    x.val_bound() >= prec.min(EXACT)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u32) -> FieldSpec {
        FieldSpec::new(p, 1, 2).unwrap()
    }

    #[test]
    fn constant_term_is_prefactor() {
        let f = field(3);
        let om = omega_uniform(&f, 80, 6).unwrap();
        let pre = prefactor(&f).unwrap();
        assert!(om.coeff(0).agrees(&pre.truncate(80), &f));
        assert_eq!(om.coeff(0).valuation(), Some(3));
    }

    #[test]
    fn forward_twist_identity() {
        for p in [3u32, 5] {
            let f = field(p);
            let k = 200;
            let om = omega_uniform(&f, k, 8).unwrap();
            let tw = om.twist(1, EXACT, &f);
            let th_q = USeries::theta_pow(p as i64, &f);
            let rhs = TSeries::t_minus_pow(&th_q, 1, 8, &f).mul(&tw, &f);
            for n in 0..8 {
                let r = om.coeff(n).residual_valuation(rhs.coeff(n), &f);
                assert!(r >= om.coeff(n).prec().min(rhs.coeff(n).prec()), "q={p} n={n}");
            }
        }
    }

    #[test]
    fn truncation_is_certified() {
        let f = field(3);
        let precs = vec![150; 10];
        let i_max = factor_count(&f, 150);
        let a = omega_with_factors(&f, &precs, i_max).unwrap();
        let b = omega_with_factors(&f, &precs, i_max + 1).unwrap();
        assert_eq!(a, b);
        let longer = omega_with_factors(&f, &[150; 11], i_max).unwrap();
        assert_eq!(longer.truncate_t(10), a);
    }

    #[test]
    fn value_at_theta() {
        for p in [3u32, 5] {
            let f = field(p);
            let q = p as i64;
            let w = omega_at(&f, 0, 0, 120).unwrap();
            assert_eq!(w.valuation(), Some(q));
            let pi = pi_tilde(&f, 100).unwrap();
            assert_eq!(pi.valuation(), Some(-q));
            let prod = pi.mul(&w, &f);
            assert!(prod.agrees(&USeries::one().truncate(prod.prec()), &f));
            // π̃^{q−1} has F_q coefficients.
            let pw = pi.pow(q - 1, 100, &f).unwrap();
            assert!(pw.digits().iter().all(|&c| f.in_fq(c)));
            // t-series summed at θ agrees with the direct product.
            let om = omega_uniform(&f, 400, 12).unwrap();
            let th = USeries::theta_pow(1, &f);
            let s = om.eval_partial(&th, &f).truncate(120);
            assert!(s.agrees(&w, &f));
        }
    }

    #[test]
    fn vanishes_at_theta_q() {
        let f = field(3);
        assert!(omega_at(&f, 0, 1, 100).unwrap().is_zero());
        assert!(omega_at(&f, 1, 2, 100).unwrap().is_zero());
        // Ω^{(1)}(θ^q) = (Ω(θ))^q
        let a = omega_at(&f, 1, 1, 300).unwrap();
        let b = omega_at(&f, 0, 0, 100).unwrap().frob_twist(1, &f);
        assert!(a.truncate(300).agrees(&b.truncate(300), &f));
    }
}
