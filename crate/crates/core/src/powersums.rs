//! Power sums S_d(s), their alternating and composite versions, and AMZVs.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf::{Fe, FieldSpec, Sign};
pub use crate::index::{Index, Letter};
use crate::ring_a::{self, check_budget, monic_at, PolyA};
use crate::useries::USeries;

/// An AMZV evaluated to a fixed absolute precision.
#[derive(Clone, Debug)]
pub struct ZetaValue {
    pub index: Index,
    pub value: USeries,
    /// First d whose term was zero to precision; the sum stops there.
    pub d_max_used: u32,
    /// Every discarded term has valuation at least this.
    pub tail_valuation_bound: i64,
}

/// Leading term of ζ(𝔰;ε): S_{r-1}(s_1) ⋯ S_0(s_r).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub valuation: i64,
    pub theta_degree: Ratio<i64>,
}

/// Which family of sums a combination refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Sd,
    Sless,
    Zeta,
}

type SlessKey = (u32, Vec<Letter>);

/// Caches power sums for one field and one absolute precision.
pub struct PowerSumEngine {
    field: Arc<FieldSpec>,
    prec: i64,
    budget: u64,
    exec: Exec,
    sums: RwLock<HashMap<(u32, u32), Arc<USeries>>>,
    sless: RwLock<HashMap<SlessKey, Arc<USeries>>>,
}

impl PowerSumEngine {
    pub fn new(field: Arc<FieldSpec>, prec: i64) -> Self {
        Self::with_options(field, prec, ring_a::budget_from_env(), Exec::default())
    }

    pub fn with_options(field: Arc<FieldSpec>, prec: i64, budget: u64, exec: Exec) -> Self {
        PowerSumEngine {
            field,
            prec,
            budget,
            exec,
            sums: RwLock::new(HashMap::new()),
            sless: RwLock::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn field_arc(&self) -> Arc<FieldSpec> {
        self.field.clone()
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn budget(&self) -> u64 {
        self.budget
    }
    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// S_d(s) = Σ_{a monic, deg a = d} a^{-s}.
    pub fn power_sum(&self, d: u32, s: u32) -> Result<Arc<USeries>> {
        if let Some(v) = self.sums.read().unwrap().get(&(d, s)) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.power_sum_at(d, s, self.prec)?);
        self.sums.write().unwrap().entry((d, s)).or_insert(v.clone());
        Ok(v)
    }

    /// Uncached S_d(s) at an arbitrary precision.
    pub fn power_sum_at(&self, d: u32, s: u32, prec: i64) -> Result<USeries> {
        if s == 0 {
            return Err(Error::Invalid("power sums need s >= 1".into()));
        }
        let f = &*self.field;
        // Every term has valuation exactly (q-1)ds.
        let v0 = (f.q() as i64 - 1) * d as i64 * s as i64;
        if v0 >= prec {
            return Ok(USeries::zero_to(prec));
        }
        check_budget(f.q(), d, self.budget)?;
        let n = (prec - v0) as usize;
        let count = ring_a::monic_count(f.q(), d) as u64;
        let acc = self.exec.fold_range(
            count,
            || vec![Fe::ZERO; n],
            |mut acc, i| {
                let a = monic_at(f, d, i).pow(s as u64, f);
                let t = USeries::from_poly(&a, f).inv(prec, f).expect("monic is nonzero");
                for (k, &c) in t.digits().iter().enumerate() {
                    let slot = &mut acc[(t.val_bound() - v0) as usize + k];
                    *slot = f.add(*slot, c);
                }
                acc
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = f.add(*x, y);
                }
                a
            },
        );
        Ok(USeries::new(v0, prec, acc))
    }

    /// S_d(s;ε) = ε^d S_d(s).
    pub fn alt_power_sum(&self, d: u32, s: u32, eps: Sign) -> Result<USeries> {
        let f = &*self.field;
        let c = f.pow(f.embed(eps), d as i64)?;
        Ok(self.power_sum(d, s)?.scale(c, f))
    }

    /// S_d(𝔰;ε) = S_d(s_1;ε_1) S_{<d}(s_2, …).
    pub fn composite(&self, d: u32, word: &[Letter]) -> Result<USeries> {
        let Some((first, rest)) = word.split_first() else {
            return Ok(if d == 0 { USeries::one() } else { USeries::zero() });
        };
        if rest.len() as u32 > d {
            return Ok(USeries::zero());
        }
        let tail = self.sless(d, rest)?;
        if tail.is_zero() {
            // S_d(s_1) has nonnegative valuation, so the product vanishes too.
            return Ok(USeries::zero_to(tail.prec().min(self.prec)));
        }
        let head = self.alt_power_sum(d, first.s, first.eps)?;
        Ok(head.mul(&tail, &self.field).truncate(self.prec))
    }

    /// S_{<d}(𝔰;ε) = Σ_{e<d} S_e(𝔰;ε).
    pub fn sless(&self, d: u32, word: &[Letter]) -> Result<Arc<USeries>> {
        if word.is_empty() {
            return Ok(Arc::new(USeries::one()));
        }
        if d == 0 {
            return Ok(Arc::new(USeries::zero()));
        }
        let key = (d, word.to_vec());
        if let Some(v) = self.sless.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let below = self.sless(d - 1, word)?;
        let term = self.composite(d - 1, word)?;
        let v = Arc::new(below.add(&term, &self.field));
        self.sless.write().unwrap().entry(key).or_insert(v.clone());
        Ok(v)
    }

    /// Value of one member of a sum family at a fixed d.
    pub fn level_value(&self, level: Level, d: u32, index: &Index) -> Result<USeries> {
        match level {
            Level::Sd => self.composite(d, index.letters()),
            Level::Sless => Ok((*self.sless(d, index.letters())?).clone()),
            Level::Zeta => Ok(self.zeta_eval(index)?.value),
        }
    }

    /// ζ(𝔰;ε) = Σ_{d ≥ r-1} S_d(𝔰;ε), stopping at the first term that is zero
    /// to precision. Valuations of the kept terms must strictly increase.
    pub fn zeta_eval(&self, index: &Index) -> Result<ZetaValue> {
        let f = &*self.field;
        let word = index.letters();
        let mut d = word.len() as u32 - 1;
        let mut total = USeries::zero_to(self.prec);
        let mut prev: Option<i64> = None;
        loop {
            let term = self.composite(d, word)?;
            match term.valuation() {
                None => break,
                Some(v) => {
                    if let Some(pv) = prev {
                        if v <= pv {
                            return Err(Error::Monotonicity { d, prev: pv, next: v });
                        }
                    }
                    prev = Some(v);
                    total.add_assign(&term, f);
                }
            }
            d += 1;
        }
        Ok(ZetaValue {
            index: index.clone(),
            value: total,
            d_max_used: d,
            tail_valuation_bound: self.prec,
        })
    }

    /// Exact valuation of S_d(s), raising the precision until a digit shows.
    pub fn power_sum_valuation(&self, d: u32, s: u32) -> Result<i64> {
        let q1 = self.field.q() as i64 - 1;
        let mut k = self.prec.max(q1 * d as i64 * s as i64 + 8 * q1);
        loop {
            if let Some(v) = self.power_sum_at(d, s, k)?.valuation() {
                return Ok(v);
            }
            if k > 1 << 20 {
                return Err(Error::Precision(format!("S_{d}({s}) vanished to {k} digits")));
            }
            k *= 2;
        }
    }

    pub fn nonvanishing_certificate(&self, index: &Index) -> Result<Certificate> {
        let r = index.depth() as u32;
        let mut v = 0;
        for (i, l) in index.letters().iter().enumerate() {
            v += self.power_sum_valuation(r - 1 - i as u32, l.s)?;
        }
        let q1 = self.field.q() as i64 - 1;
        Ok(Certificate { valuation: v, theta_degree: Ratio::new(-v, q1) })
    }
}

/// S_d(s) as an unreduced fraction num/den, for d ≤ 2.
pub fn power_sum_exact(f: &FieldSpec, d: u32, s: u32) -> Result<(PolyA, PolyA)> {
    if d > 2 {
        return Err(Error::Invalid("exact fractions are limited to d <= 2".into()));
    }
    let powers: Vec<PolyA> = (0..ring_a::monic_count(f.q(), d) as u64)
        .map(|i| monic_at(f, d, i).pow(s as u64, f))
        .collect();
    let den = powers.iter().fold(PolyA::one(), |acc, a| acc.mul(a, f));
    let mut num = PolyA::zero();
    for skip in 0..powers.len() {
        let others = powers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .fold(PolyA::one(), |acc, (_, a)| acc.mul(a, f));
        num = num.add(&others, f);
    }
    Ok((num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine(p: u32, prec: i64) -> PowerSumEngine {
        PowerSumEngine::new(Arc::new(FieldSpec::new(p, 1, 2).unwrap()), prec)
    }

    fn poly(f: &FieldSpec, c: &[u32]) -> PolyA {
        PolyA::from_coeffs(c.iter().map(|&x| f.from_fp(x)).collect())
    }

    #[test]
    fn small_power_sums() {
        let e = engine(3, 60);
        let f = e.field();
        assert!(e.power_sum(0, 4).unwrap().agrees(&USeries::one(), f));
        // S_1(1) = 2/(θ^3 − θ)
        let d1 = USeries::from_poly(&poly(f, &[0, 2, 0, 1]), f);
        let want = USeries::monomial(f.from_fp(2), 0).div(&d1, 60, f).unwrap();
        assert!(e.power_sum(1, 1).unwrap().agrees(&want, f));
        // S_1(1;2) = 1/(θ^3 − θ)
        let alt = e.alt_power_sum(1, 1, Sign(2)).unwrap();
        assert!(alt.agrees(&d1.inv(60, f).unwrap(), f));

        let e5 = engine(5, 120);
        let f5 = e5.field();
        let d1 = USeries::from_poly(&poly(f5, &[0, 4, 0, 0, 0, 1]), f5);
        let s12 = e5.power_sum(1, 2).unwrap();
        assert!(s12.agrees(&d1.pow(-2, 120, f5).unwrap(), f5));
        let s11 = e5.power_sum(1, 1).unwrap();
        assert!(s11.mul(&s11, f5).agrees(&s12, f5));
        assert!(s11.agrees(&d1.inv(120, f5).unwrap().neg(f5), f5));
    }

    #[test]
    fn exact_fraction_matches_series() {
        for p in [3u32, 5] {
            let e = engine(p, 400);
            let f = e.field();
            for d in 0..=2 {
                for s in 1..=4 {
                    let (num, den) = power_sum_exact(f, d, s).unwrap();
                    let num = USeries::from_poly(&num, f);
                    let den = USeries::from_poly(&den, f);
                    let series = e.power_sum(d, s).unwrap();
                    let frac = num.div(&den, 400, f).unwrap();
                    assert!(frac.agrees(&series, f), "q={p} d={d} s={s}");
                }
            }
        }
    }

    #[test]
    fn composite_examples() {
        let e = engine(3, 80);
        let f = e.field();
        let fq = f.fq();
        let i11 = Index::parse("1,1;1,1", fq).unwrap();
        assert!(e.composite(0, i11.letters()).unwrap().is_zero());
        let s1 = e.composite(1, i11.letters()).unwrap();
        assert!(s1.agrees(&e.power_sum(1, 1).unwrap(), f));
        let z = e.zeta_eval(&i11).unwrap();
        assert_eq!(z.value.theta_degree(f).unwrap(), Ratio::from_integer(-3));
        let cert = e.nonvanishing_certificate(&i11).unwrap();
        assert_eq!(cert.theta_degree, Ratio::from_integer(-3));

        let z1 = e.zeta_eval(&Index::parse("2;1", fq).unwrap()).unwrap();
        assert_eq!(z1.value.valuation(), Some(0));
        assert_eq!(z1.value.lead(), Some(Fe::ONE));
        assert!(z1.tail_valuation_bound >= z1.value.prec());
    }

    #[test]
    fn degrees_of_s_d_1() {
        let e = engine(3, 40);
        let want = [-3i64, -12, -39, -120];
        for (d, w) in (1..=4).zip(want) {
            let v = e.power_sum_valuation(d, 1).unwrap();
            assert_eq!(v, -2 * w, "d={d}");
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = Arc::new(FieldSpec::new(5, 1, 2).unwrap());
        let a = PowerSumEngine::with_options(f.clone(), 200, 1 << 20, Exec::Sequential);
        let b = PowerSumEngine::with_options(f, 200, 1 << 20, Exec::Parallel);
        assert_eq!(*a.power_sum(3, 2).unwrap(), *b.power_sum(3, 2).unwrap());
    }
}
