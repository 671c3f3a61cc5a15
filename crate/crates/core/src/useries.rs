//! Truncated Laurent series in the uniformizer u, where u^{q-1} = 1/θ.
//!
//! A series stores its valuation, an absolute precision K (coefficients of
//! u^k are known for k < K) and the digits from the valuation upward.
//! Exact values (embedded polynomials, monomials) carry `prec = EXACT`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};
use crate::ring_a::PolyA;

/// Precision of exactly known series.
pub const EXACT: i64 = i64::MAX / 8;

#[inline]
fn padd(p: i64, d: i64) -> i64 {
    if p >= EXACT || d >= EXACT {
        EXACT
    } else {
        (p + d).min(EXACT - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct USeries {
    val: i64,
    prec: i64,
    coeffs: Vec<Fe>,
}

impl USeries {
    /// Digits `coeffs` start at u^val; anything at or beyond `prec` is dropped.
    pub fn new(val: i64, prec: i64, coeffs: Vec<Fe>) -> Self {
        let mut s = USeries { val, prec: prec.min(EXACT), coeffs };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.val += lead as i64;
        }
        if self.prec < EXACT {
            let keep = (self.prec - self.val).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.val = self.prec;
        }
    }

    pub fn zero() -> Self {
        USeries { val: EXACT, prec: EXACT, coeffs: Vec::new() }
    }

    /// O(u^prec).
    pub fn zero_to(prec: i64) -> Self {
        USeries { val: prec, prec, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Fe::ONE, 0)
    }

    /// c·u^k, exact.
    pub fn monomial(c: Fe, k: i64) -> Self {
        Self::new(k, EXACT, vec![c])
    }

    /// θ^n ↦ u^{-n(q-1)}, exact.
    pub fn from_poly(a: &PolyA, f: &FieldSpec) -> Self {
        let Some(deg) = a.degree() else {
            return Self::zero();
        };
        let step = (f.q() - 1) as usize;
        let mut coeffs = vec![Fe::ZERO; deg * step + 1];
        for (n, &c) in a.coeffs().iter().enumerate() {
            coeffs[(deg - n) * step] = c;
        }
        Self::new(-((deg * step) as i64), EXACT, coeffs)
    }

    /// θ^n as a series.
    pub fn theta_pow(n: i64, f: &FieldSpec) -> Self {
        Self::monomial(Fe::ONE, -n * (f.q() as i64 - 1))
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// True when no nonzero digit is known (exact zero or O(u^prec)).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Valuation, or None when zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Lower bound on the valuation: the valuation, or the precision when zero.
    pub fn val_bound(&self) -> i64 {
        self.val
    }

    /// One past the last stored digit.
    pub fn end(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    pub fn digits(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn lead(&self) -> Option<Fe> {
        self.coeffs.first().copied()
    }

    /// Coefficient of u^k (zero outside the stored range).
    pub fn coeff(&self, k: i64) -> Fe {
        if k < self.val {
            return Fe::ZERO;
        }
        self.coeffs.get((k - self.val) as usize).copied().unwrap_or(Fe::ZERO)
    }

    pub fn theta_degree(&self, f: &FieldSpec) -> Result<Ratio<i64>> {
        let v = self.valuation().ok_or(Error::ZeroToPrecision(self.prec))?;
        Ok(Ratio::new(-v, f.q() as i64 - 1))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::new(self.val, prec, self.coeffs.clone())
    }

    /// Multiplies by u^k.
    pub fn shift(&self, k: i64) -> Self {
        USeries { val: padd(self.val, k), prec: padd(self.prec, k), coeffs: self.coeffs.clone() }
    }

    pub fn neg(&self, f: &FieldSpec) -> Self {
        USeries {
            val: self.val,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
        }
    }

    pub fn scale(&self, c: Fe, f: &FieldSpec) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        USeries {
            val: self.val,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&x| f.mul(x, c)).collect(),
        }
    }

    pub fn add(&self, o: &USeries, f: &FieldSpec) -> Self {
        if self.is_exact() && self.is_zero() {
            return o.clone();
        }
        if o.is_exact() && o.is_zero() {
            return self.clone();
        }
        let prec = self.prec.min(o.prec);
        let lo = self.val.min(o.val);
        let hi = prec.min(self.end().max(o.end()));
        if hi <= lo {
            return Self::zero_to(prec);
        }
        let mut out = vec![Fe::ZERO; (hi - lo) as usize];
        for s in [self, o] {
            for (i, &c) in s.coeffs.iter().enumerate() {
                let k = s.val + i as i64;
                if k >= hi {
                    break;
                }
                let slot = &mut out[(k - lo) as usize];
                *slot = f.add(*slot, c);
            }
        }
        Self::new(lo, prec, out)
    }

    pub fn sub(&self, o: &USeries, f: &FieldSpec) -> Self {
        self.add(&o.neg(f), f)
    }

    /// In-place accumulation, avoiding a fresh allocation when the ranges fit.
    pub fn add_assign(&mut self, o: &USeries, f: &FieldSpec) {
        if o.is_exact() && o.is_zero() {
            return;
        }
        let prec = self.prec.min(o.prec);
        if !self.is_zero() && o.val >= self.val && o.end().min(prec) <= self.end() {
            for (i, &c) in o.coeffs.iter().enumerate() {
                let k = o.val + i as i64;
                if k >= prec {
                    break;
                }
                let slot = &mut self.coeffs[(k - self.val) as usize];
                *slot = f.add(*slot, c);
            }
            self.prec = prec;
            self.normalize();
        } else {
            *self = self.add(o, f);
        }
    }

    pub fn mul(&self, o: &USeries, f: &FieldSpec) -> Self {
        let exact_zero = |s: &USeries| s.is_exact() && s.is_zero();
        if exact_zero(self) || exact_zero(o) {
            return Self::zero();
        }
        let prec = padd(self.prec, o.val).min(padd(o.prec, self.val));
        let val = self.val + o.val;
        if self.is_zero() || o.is_zero() {
            return Self::zero_to(prec);
        }
        let full = self.coeffs.len() + o.coeffs.len() - 1;
        let n = if prec >= EXACT { full } else { ((prec - val).max(0) as usize).min(full) };
        if n == 0 {
            return Self::zero_to(prec);
        }
        let nnz = |s: &USeries| s.coeffs.iter().filter(|c| !c.is_zero()).count();
        let (a, b) = if nnz(self) <= nnz(o) { (self, o) } else { (o, self) };
        let mut out = vec![Fe::ZERO; n];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if i >= n {
                break;
            }
            if ai.is_zero() {
                continue;
            }
            let lim = b.coeffs.len().min(n - i);
            let row = &mut out[i..i + lim];
            for (slot, &bj) in row.iter_mut().zip(&b.coeffs[..lim]) {
                if !bj.is_zero() {
                    *slot = f.add(*slot, f.mul(ai, bj));
                }
            }
        }
        Self::new(val, prec, out)
    }

    /// self / den with result precision at most `cap`.
    pub fn div(&self, den: &USeries, cap: i64, f: &FieldSpec) -> Result<Self> {
        let d0 = den.lead().ok_or(Error::ZeroToPrecision(den.prec))?;
        if self.is_exact() && self.is_zero() {
            return Ok(Self::zero());
        }
        let val = self.val - den.val;
        let rel = (self.prec.saturating_sub(self.val)).min(den.prec.saturating_sub(den.val));
        let prec = if rel >= EXACT / 2 { cap } else { cap.min(val + rel) };
        if prec >= EXACT {
            if den.coeffs.len() == 1 {
                let c = f.inv(d0)?;
                return Ok(self.scale(c, f).shift(-den.val));
            }
            return Err(Error::Precision("exact division by a non-monomial needs a cap".into()));
        }
        let n = (prec - val).max(0) as usize;
        let y0 = f.inv(d0)?;
        let nz: Vec<(usize, Fe)> = den
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (i, f.neg(c)))
            .collect();
        let mut out: Vec<Fe> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs.get(k).copied().unwrap_or(Fe::ZERO);
            for &(i, c) in &nz {
                if i > k {
                    break;
                }
                let z = out[k - i];
                if !z.is_zero() {
                    acc = f.add(acc, f.mul(c, z));
                }
            }
            out.push(f.mul(acc, y0));
        }
        Ok(Self::new(val, prec, out))
    }

    pub fn inv(&self, cap: i64, f: &FieldSpec) -> Result<Self> {
        Self::one().div(self, cap, f)
    }

    /// self^n; negative powers invert first with precision at most `cap`.
    pub fn pow(&self, n: i64, cap: i64, f: &FieldSpec) -> Result<Self> {
        if n < 0 {
            let inv = self.inv(cap, f)?;
            return inv.pow(-n, cap, f);
        }
        let mut acc = Self::one();
        let mut b = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b, f);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b, f);
            }
        }
        Ok(acc)
    }

    /// Σ a_i u^i ↦ Σ a_i^{q^n} u^{i q^n}; precision becomes K q^n.
    pub fn frob_twist(&self, n: u32, f: &FieldSpec) -> Self {
        self.twist_trunc(n, EXACT, f)
    }

    /// Twist keeping only digits below `cap`.
    pub fn twist_trunc(&self, n: u32, cap: i64, f: &FieldSpec) -> Self {
        let qn = (f.q() as i64).checked_pow(n).unwrap_or(EXACT);
        let scale = |x: i64| {
            if x >= EXACT {
                EXACT
            } else {
                x.checked_mul(qn).unwrap_or(if x > 0 { EXACT - 1 } else { -EXACT })
            }
        };
        let prec = scale(self.prec).min(cap);
        if self.is_zero() {
            return if self.is_exact() { Self::zero() } else { Self::zero_to(prec) };
        }
        let val = scale(self.val);
        if val >= prec {
            return Self::zero_to(prec);
        }
        let e = f.frob_exponent(n);
        let last = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, _)| i as i64)
            .take_while(|&i| val + i * qn < prec)
            .last()
            .unwrap_or(0);
        let mut out = vec![Fe::ZERO; (last * qn + 1) as usize];
        for i in 0..=last {
            out[(i * qn) as usize] = f.frob_with(self.coeffs[i as usize], e);
        }
        Self::new(val, prec, out)
    }

    /// Valuation of self − o, or the common precision when they agree.
    pub fn residual_valuation(&self, o: &USeries, f: &FieldSpec) -> i64 {
        let d = self.sub(o, f);
        d.val_bound()
    }

    pub fn agrees(&self, o: &USeries, f: &FieldSpec) -> bool {
        self.sub(o, f).is_zero()
    }

    /// F_p coordinates of the digits u^lo .. u^{hi-1}, digit-major.
    pub fn fp_digits(&self, lo: i64, hi: i64, f: &FieldSpec) -> Vec<u32> {
        let n = f.fp_degree() as usize;
        let mut out = Vec::with_capacity(((hi - lo).max(0) as usize) * n);
        for k in lo..hi {
            out.extend(f.coords(self.coeff(k)));
        }
        out
    }

    pub fn to_json(&self, f: &FieldSpec) -> USeriesJson {
        USeriesJson {
            var: "u".into(),
            q: f.q(),
            m: f.m(),
            valuation: if self.is_exact() && self.is_zero() { 0 } else { self.val },
            prec: if self.is_exact() { None } else { Some(self.prec) },
            digits: self.coeffs.iter().map(|&c| f.packed(c)).collect(),
        }
    }

    pub fn from_json(j: &USeriesJson, f: &FieldSpec) -> Result<Self> {
        if j.var != "u" || j.q != f.q() || j.m != f.m() {
            return Err(Error::Invalid("series belongs to a different field".into()));
        }
        let coeffs = j.digits.iter().map(|&v| f.from_packed(v)).collect::<Result<Vec<_>>>()?;
        match j.prec {
            None if coeffs.is_empty() => Ok(Self::zero()),
            None => Ok(Self::new(j.valuation, EXACT, coeffs)),
            Some(p) => Ok(Self::new(j.valuation, p, coeffs)),
        }
    }
}

/// Wire format of a series; `prec: null` marks an exact value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct USeriesJson {
    pub var: String,
    pub q: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub valuation: i64,
    pub prec: Option<i64>,
    pub digits: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldSpec {
        FieldSpec::new(3, 1, 2).unwrap()
    }

    #[test]
    fn embedding_examples() {
        let f = f3();
        let th = USeries::from_poly(&PolyA::theta(), &f);
        assert_eq!(th.valuation(), Some(-2));
        let d1 = crate::ring_a::carlitz_d(&f, 1);
        let s = USeries::from_poly(&d1, &f);
        assert_eq!(s.valuation(), Some(-6));
        assert_eq!(s.coeff(-6), Fe::ONE);
        assert_eq!(s.coeff(-2), f.from_fp(2));
        assert_eq!(s.digits().iter().filter(|c| !c.is_zero()).count(), 2);
    }

    #[test]
    fn inverse_geometric() {
        let f = f3();
        let d1 = USeries::from_poly(&crate::ring_a::carlitz_d(&f, 1), &f);
        let inv = d1.inv(40, &f).unwrap();
        assert_eq!(inv.valuation(), Some(6));
        assert_eq!(inv.theta_degree(&f).unwrap(), Ratio::from_integer(-3));
        for k in 6..40 {
            let want = if (k - 6) % 4 == 0 { Fe::ONE } else { Fe::ZERO };
            assert_eq!(inv.coeff(k), want, "u^{k}");
        }
        let prod = inv.mul(&d1, &f);
        assert!(prod.agrees(&USeries::one(), &f));
        assert_eq!(prod.prec(), 40 - 6);
    }

    #[test]
    fn precision_rules() {
        let f = f3();
        let x = USeries::new(2, 10, vec![Fe::ONE, Fe::ONE]);
        let y = USeries::new(-1, 5, vec![Fe::ONE]);
        let p = x.mul(&y, &f);
        assert_eq!(p.prec(), 5 + 2);
        let i = x.inv(EXACT - 1, &f).unwrap();
        assert_eq!(i.valuation(), Some(-2));
        assert_eq!(i.prec(), 10 - 4);
        let t = USeries::theta_pow(1, &f).pow(3, EXACT, &f).unwrap();
        assert_eq!(t, USeries::theta_pow(3, &f));
        assert!(t.is_exact());
    }

    #[test]
    fn twist_examples() {
        let f = f3();
        let th = USeries::theta_pow(1, &f);
        assert_eq!(th.frob_twist(1, &f), USeries::theta_pow(3, &f));
        let c = USeries::monomial(f.from_packed(3).unwrap(), 0);
        assert_eq!(c.frob_twist(1, &f).lead(), Some(f.frobenius(f.from_packed(3).unwrap(), 1)));
        let x = USeries::new(1, 7, vec![Fe::ONE, Fe(3), Fe(5)]);
        let tw = x.frob_twist(2, &f);
        assert_eq!(tw.prec(), 63);
        assert_eq!(tw.valuation(), Some(9));
    }

    #[test]
    fn json_round_trip() {
        let f = f3();
        for s in [
            USeries::zero(),
            USeries::zero_to(12),
            USeries::new(-3, 20, vec![Fe(1), Fe::ZERO, Fe(4)]),
            USeries::monomial(Fe(2), 5),
        ] {
            let j = serde_json::to_string(&s.to_json(&f)).unwrap();
            let back: USeriesJson = serde_json::from_str(&j).unwrap();
            assert_eq!(USeries::from_json(&back, &f).unwrap(), s);
        }
    }
}
