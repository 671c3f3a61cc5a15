//! Power series in t truncated at a fixed t-degree, with u-series coefficients.

use crate::gf::{lucas_binom, Fe, FieldSpec};
use crate::useries::{USeries, USeriesJson, EXACT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries {
    coeffs: Vec<USeries>,
}

impl TSeries {
    /// Coefficients of t^0 .. t^{len-1}.
    pub fn new(coeffs: Vec<USeries>) -> Self {
        assert!(!coeffs.is_empty(), "a t-series keeps at least t^0");
        TSeries { coeffs }
    }

    pub fn zero(t_len: usize) -> Self {
        Self::new(vec![USeries::zero(); t_len])
    }

    pub fn one(t_len: usize) -> Self {
        Self::constant(USeries::one(), t_len)
    }

    pub fn constant(c: USeries, t_len: usize) -> Self {
        let mut v = vec![USeries::zero(); t_len];
        v[0] = c;
        Self::new(v)
    }

    /// (t − x)^k.
    pub fn t_minus_pow(x: &USeries, k: u32, t_len: usize, f: &FieldSpec) -> Self {
        let neg_x = x.neg(f);
        let mut v = vec![USeries::zero(); t_len];
        let mut xp = USeries::one();
        // t^i carries C(k, i) (−x)^{k−i}; walk i downward so powers of −x grow.
        for i in (0..=k as usize).rev() {
            if i < t_len {
                let c = lucas_binom(k as u64, i as u64, f.p());
                if c != 0 {
                    v[i] = xp.scale(f.from_fp(c), f);
                }
            }
            xp = xp.mul(&neg_x, f);
        }
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[USeries] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &USeries {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Smallest coefficient precision.
    pub fn min_prec(&self) -> i64 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(EXACT)
    }

    /// Lower bound for the valuation of every coefficient.
    pub fn min_val(&self) -> i64 {
        self.coeffs.iter().map(|c| c.val_bound()).min().unwrap_or(EXACT)
    }

    fn zip(&self, o: &TSeries, op: impl Fn(&USeries, &USeries) -> USeries) -> TSeries {
        let n = self.len().min(o.len());
        TSeries::new((0..n).map(|i| op(&self.coeffs[i], &o.coeffs[i])).collect())
    }

    pub fn add(&self, o: &TSeries, f: &FieldSpec) -> TSeries {
        self.zip(o, |a, b| a.add(b, f))
    }

    pub fn sub(&self, o: &TSeries, f: &FieldSpec) -> TSeries {
        self.zip(o, |a, b| a.sub(b, f))
    }

    pub fn neg(&self, f: &FieldSpec) -> TSeries {
        self.map(|c| c.neg(f))
    }

    pub fn scale(&self, c: Fe, f: &FieldSpec) -> TSeries {
        self.map(|x| x.scale(c, f))
    }

    pub fn scale_series(&self, c: &USeries, f: &FieldSpec) -> TSeries {
        self.map(|x| x.mul(c, f))
    }

    pub fn map(&self, op: impl Fn(&USeries) -> USeries) -> TSeries {
        TSeries::new(self.coeffs.iter().map(op).collect())
    }

    pub fn mul(&self, o: &TSeries, f: &FieldSpec) -> TSeries {
        let n = self.len().min(o.len());
        let mut out = vec![USeries::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_exact() && a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                if b.is_exact() && b.is_zero() {
                    continue;
                }
                out[i + j].add_assign(&a.mul(b, f), f);
            }
        }
        TSeries::new(out)
    }

    pub fn pow(&self, k: u32, f: &FieldSpec) -> TSeries {
        let mut acc = TSeries::one(self.len());
        let mut b = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b, f);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b, f);
            }
        }
        acc
    }

    /// Coefficient-wise Frobenius twist, keeping digits below `cap`.
    pub fn twist(&self, n: u32, cap: i64, f: &FieldSpec) -> TSeries {
        self.map(|c| c.twist_trunc(n, cap, f))
    }

    pub fn truncate(&self, prec: i64) -> TSeries {
        self.map(|c| c.truncate(prec))
    }

    pub fn truncate_t(&self, t_len: usize) -> TSeries {
        TSeries::new(self.coeffs.iter().take(t_len).cloned().collect())
    }

    /// Σ_n a_n x^n over the kept coefficients; the caller accounts for the
    /// discarded t-tail.
    pub fn eval_partial(&self, x: &USeries, f: &FieldSpec) -> USeries {
        let mut acc = USeries::zero();
        let mut xp = USeries::one();
        for c in &self.coeffs {
            acc.add_assign(&c.mul(&xp, f), f);
            xp = xp.mul(x, f);
        }
        acc
    }

    /// Per-degree valuation of self − o (its precision when they agree).
    pub fn residuals(&self, o: &TSeries, f: &FieldSpec) -> Vec<i64> {
        self.sub(o, f).coeffs.iter().map(|c| c.val_bound()).collect()
    }

    pub fn to_json(&self, f: &FieldSpec) -> Vec<USeriesJson> {
        self.coeffs.iter().map(|c| c.to_json(f)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field() -> FieldSpec {
        FieldSpec::new(3, 1, 2).unwrap()
    }

    fn series(f: &FieldSpec, val: i64, digits: &[u32], prec: i64) -> USeries {
        USeries::new(val, prec, digits.iter().map(|&d| f.from_packed(d).unwrap()).collect())
    }

    #[test]
    fn binomial_expansion() {
        let f = field();
        let th = USeries::theta_pow(1, &f);
        let b = TSeries::t_minus_pow(&th, 2, 4, &f);
        // (t − θ)^2 = t^2 − 2θ t + θ^2, and −2 = 1 in F_3
        assert!(b.coeff(2).agrees(&USeries::one(), &f));
        assert!(b.coeff(1).agrees(&th, &f));
        assert!(b.coeff(0).agrees(&USeries::theta_pow(2, &f), &f));
        assert!(b.coeff(3).is_zero());
        let sq = TSeries::t_minus_pow(&th, 1, 4, &f).pow(2, &f);
        assert_eq!(sq, b);
    }

    #[test]
    fn twist_of_constant() {
        let f = field();
        let c = series(&f, 0, &[5], EXACT);
        let t = TSeries::constant(c.clone(), 3).twist(2, EXACT, &f);
        assert!(t.coeff(0).agrees(&c.frob_twist(2, &f), &f));
    }

    proptest! {
        #[test]
        fn twist_is_multiplicative(a in proptest::collection::vec(0u32..9, 12), b in proptest::collection::vec(0u32..9, 12)) {
            let f = field();
            let mk = |d: &[u32]| TSeries::new(d.chunks(4).map(|c| series(&f, 0, c, 40)).collect());
            let (x, y) = (mk(&a), mk(&b));
            let lhs = x.mul(&y, &f).twist(1, EXACT, &f);
            let rhs = x.twist(1, EXACT, &f).mul(&y.twist(1, EXACT, &f), &f);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
