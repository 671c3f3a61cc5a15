//! The polynomial ring A = F_q[θ], monic enumeration and Carlitz factorials.

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};

/// Default cap on q^d for monic enumeration.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// `AMZV_BUDGET` if set and parseable, else [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u64 {
    std::env::var("AMZV_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Polynomial in θ with coefficients in F_{q^M} (in practice in F_q),
/// ascending, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyA {
    coeffs: Vec<Fe>,
}

impl PolyA {
    pub fn from_coeffs(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyA { coeffs }
    }

    pub fn zero() -> Self {
        PolyA { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyA { coeffs: vec![Fe::ONE] }
    }

    pub fn constant(c: Fe) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn monomial(c: Fe, n: usize) -> Self {
        let mut v = vec![Fe::ZERO; n + 1];
        v[n] = c;
        Self::from_coeffs(v)
    }

    pub fn theta() -> Self {
        Self::monomial(Fe::ONE, 1)
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&Fe::ONE)
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn add(&self, o: &PolyA, f: &FieldSpec) -> PolyA {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, f: &FieldSpec) -> PolyA {
        PolyA { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn sub(&self, o: &PolyA, f: &FieldSpec) -> PolyA {
        self.add(&o.neg(f), f)
    }

    pub fn scale(&self, c: Fe, f: &FieldSpec) -> PolyA {
        Self::from_coeffs(self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, o: &PolyA, f: &FieldSpec) -> PolyA {
        if self.is_zero() || o.is_zero() {
            return PolyA::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::from_coeffs(out)
    }

    pub fn pow(&self, mut n: u64, f: &FieldSpec) -> PolyA {
        let mut acc = PolyA::one();
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b, f);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b, f);
            }
        }
        acc
    }

    /// θ ↦ θ^{q^n} together with c ↦ c^{q^n} on coefficients.
    pub fn twist(&self, n: u32, f: &FieldSpec) -> PolyA {
        if self.is_zero() {
            return PolyA::zero();
        }
        let qn = (f.q() as usize).pow(n);
        let e = f.frob_exponent(n);
        let mut out = vec![Fe::ZERO; (self.coeffs.len() - 1) * qn + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i * qn] = f.frob_with(c, e);
        }
        Self::from_coeffs(out)
    }

    /// Substitutes θ ↦ θ^k.
    pub fn inflate(&self, k: usize) -> PolyA {
        if self.is_zero() {
            return PolyA::zero();
        }
        let mut out = vec![Fe::ZERO; (self.coeffs.len() - 1) * k + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i * k] = c;
        }
        PolyA { coeffs: out }
    }

    pub fn shift(&self, k: usize) -> PolyA {
        if self.is_zero() {
            return PolyA::zero();
        }
        let mut out = vec![Fe::ZERO; k];
        out.extend_from_slice(&self.coeffs);
        PolyA { coeffs: out }
    }

    /// Human-readable form with F_q coefficients as packed integers.
    pub fn display(&self, f: &FieldSpec) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = match f.fq_packed(c) {
                Some(v) => v.to_string(),
                None => format!("[{}]", f.packed(c)),
            };
            parts.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (1, "1") => "θ".to_string(),
                (1, _) => format!("{cs}θ"),
                (_, "1") => format!("θ^{i}"),
                _ => format!("{cs}θ^{i}"),
            });
        }
        parts.join(" + ")
    }
}

pub fn monic_count(q: u32, d: u32) -> u128 {
    (q as u128).pow(d)
}

pub fn check_budget(q: u32, d: u32, budget: u64) -> Result<()> {
    let count = monic_count(q, d);
    if count > budget as u128 {
        return Err(Error::Budget { d, count, budget });
    }
    Ok(())
}

/// The idx-th monic polynomial of degree d: the base-q digits of idx are the
/// coefficients of θ^0, θ^1, ... so θ^{d-1} is the most significant.
pub fn monic_at(f: &FieldSpec, d: u32, mut idx: u64) -> PolyA {
    let q = f.q() as u64;
    let elems = f.fq_elements();
    let mut coeffs = Vec::with_capacity(d as usize + 1);
    for _ in 0..d {
        coeffs.push(elems[(idx % q) as usize]);
        idx /= q;
    }
    coeffs.push(Fe::ONE);
    PolyA { coeffs }
}

pub fn monic_enumerate(f: &FieldSpec, d: u32, budget: u64) -> Result<Vec<PolyA>> {
    check_budget(f.q(), d, budget)?;
    Ok((0..monic_count(f.q(), d) as u64).map(|i| monic_at(f, d, i)).collect())
}

/// D_i = ∏_{j<i} (θ^{q^i} − θ^{q^j}).
pub fn carlitz_d(f: &FieldSpec, i: u32) -> PolyA {
    let q = f.q() as usize;
    let top = PolyA::monomial(Fe::ONE, q.pow(i));
    (0..i).fold(PolyA::one(), |acc, j| {
        acc.mul(&top.sub(&PolyA::monomial(Fe::ONE, q.pow(j)), f), f)
    })
}

/// Γ_{n+1} = ∏ D_i^{n_i} over the base-q digits of n.
pub fn carlitz_gamma(f: &FieldSpec, n_plus_1: u64) -> Result<PolyA> {
    if n_plus_1 == 0 {
        return Err(Error::Invalid("Carlitz gamma needs an argument of at least 1".into()));
    }
    let q = f.q() as u64;
    let mut n = n_plus_1 - 1;
    let mut acc = PolyA::one();
    let mut i = 0;
    while n > 0 {
        let digit = n % q;
        if digit > 0 {
            acc = acc.mul(&carlitz_d(f, i).pow(digit, f), f);
        }
        n /= q;
        i += 1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldSpec {
        FieldSpec::new(3, 1, 2).unwrap()
    }

    #[test]
    fn enumeration_listing() {
        let f = f3();
        let d1 = monic_enumerate(&f, 1, DEFAULT_BUDGET).unwrap();
        let shown: Vec<_> = d1.iter().map(|a| a.display(&f)).collect();
        assert_eq!(shown, ["θ", "θ + 1", "θ + 2"]);
        assert_eq!(monic_enumerate(&f, 0, DEFAULT_BUDGET).unwrap(), vec![PolyA::one()]);

        let f2 = FieldSpec::new(2, 1, 1).unwrap();
        let d2: Vec<_> = monic_enumerate(&f2, 2, DEFAULT_BUDGET)
            .unwrap()
            .iter()
            .map(|a| a.display(&f2))
            .collect();
        assert_eq!(d2, ["θ^2", "θ^2 + 1", "θ^2 + θ", "θ^2 + θ + 1"]);
    }

    #[test]
    fn enumeration_is_complete_and_distinct() {
        let f = FieldSpec::new(5, 1, 2).unwrap();
        let all = monic_enumerate(&f, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(all.len(), 125);
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 125);
        assert!(all.iter().all(|a| a.is_monic() && a.degree() == Some(3)));
    }

    #[test]
    fn budget_error() {
        let f = f3();
        assert!(matches!(monic_enumerate(&f, 5, 100), Err(Error::Budget { .. })));
    }

    #[test]
    fn carlitz_factorials() {
        let f = f3();
        assert_eq!(carlitz_d(&f, 0), PolyA::one());
        let d1 = PolyA::monomial(Fe::ONE, 3).sub(&PolyA::theta(), &f);
        assert_eq!(carlitz_d(&f, 1), d1);
        assert_eq!(carlitz_d(&f, 2).degree(), Some(18));
        for i in 1..=3 {
            let qi = 3usize.pow(i);
            let step = PolyA::monomial(Fe::ONE, qi).sub(&PolyA::theta(), &f);
            let rec = step.mul(&carlitz_d(&f, i - 1).pow(3, &f), &f);
            assert_eq!(carlitz_d(&f, i), rec);
            assert!(carlitz_d(&f, i).is_monic());
        }
        assert_eq!(carlitz_gamma(&f, 1).unwrap(), PolyA::one());
        assert_eq!(carlitz_gamma(&f, 3).unwrap(), PolyA::one());
        assert_eq!(carlitz_gamma(&f, 4).unwrap(), carlitz_d(&f, 1));
        assert_eq!(carlitz_gamma(&f, 7).unwrap(), carlitz_d(&f, 1).pow(2, &f));
    }

    #[test]
    fn twist_is_frobenius() {
        let f = f3();
        let a = PolyA::from_coeffs(vec![f.from_fp(2), Fe::ONE, f.from_fp(1)]);
        assert_eq!(a.twist(1, &f), a.pow(3, &f));
    }
}
