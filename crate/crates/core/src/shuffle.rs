//! Sum-shuffle products of AMZVs as F_p-linear combinations.
//!
//! Products of S_{<d} sums are expanded by splitting on which of the two
//! leading degrees is larger; on the diagonal the depth-one product
//!
//!   S_d(s1;ε1) S_d(s2;ε2) = S_d(s1+s2; ε1ε2) + Σ_j Δ^j S_d(s1+s2−j, j; ε1ε2, 1)
//!
//! is applied, with j over multiples of q−1 in (0, s1+s2). ζ-products follow
//! from S_{<d} products by letting d grow.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{lucas_binom, EpsMode, Fq, Sign};
use crate::index::{word_cmp, Index, IndexJson, Letter};
use crate::powersums::{Level, PowerSumEngine};
use crate::useries::USeries;

/// Δ^j_{s1,s2} = (−1)^{s1−1} C(j−1, s1−1) + (−1)^{s2−1} C(j−1, s2−1) mod p.
pub fn chen_delta(j: u32, s1: u32, s2: u32, p: u32) -> Result<u32> {
    if j == 0 || j >= s1 + s2 {
        return Err(Error::Invalid(format!("j = {j} outside (0, {})", s1 + s2)));
    }
    let part = |s: u32| {
        let b = lucas_binom(j as u64 - 1, s as u64 - 1, p);
        if (s - 1) % 2 == 1 {
            (p - b) % p
        } else {
            b
        }
    };
    Ok((part(s1) + part(s2)) % p)
}

/// Nonzero (j, Δ^j) with (q−1) | j and 0 < j < s1+s2.
pub fn deltas(s1: u32, s2: u32, fq: &Fq) -> Vec<(u32, u32)> {
    let step = fq.q() - 1;
    (1..)
        .map(|k| k * step)
        .take_while(|&j| j < s1 + s2)
        .filter_map(|j| {
            let c = chen_delta(j, s1, s2, fq.p()).expect("j in range");
            (c != 0).then_some((j, c))
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Word(Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, o: &Self) -> Ordering {
        word_cmp(&self.0, &o.0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

type Combo = BTreeMap<Word, u32>;

fn push(combo: &mut Combo, w: Word, c: u32, p: u32) {
    if c.is_multiple_of(p) {
        return;
    }
    let slot = combo.entry(w.clone()).or_insert(0);
    *slot = (*slot + c) % p;
    if *slot == 0 {
        combo.remove(&w);
    }
}

fn prepend(l: Letter, w: &Word) -> Word {
    let mut v = Vec::with_capacity(w.0.len() + 1);
    v.push(l);
    v.extend_from_slice(&w.0);
    Word(v)
}

/// F_p-linear combination of indices, tagged with the sum family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinComb {
    pub level: Level,
    p: u32,
    terms: BTreeMap<Index, u32>,
}

impl LinComb {
    pub fn new(level: Level, p: u32) -> Self {
        LinComb { level, p, terms: BTreeMap::new() }
    }

    fn from_combo(level: Level, p: u32, c: Combo) -> Self {
        let terms = c
            .into_iter()
            .map(|(w, c)| (Index::from_letters(w.0).expect("nonempty output word"), c))
            .collect();
        LinComb { level, p, terms }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn add_term(&mut self, idx: Index, c: u32) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(idx.clone()).or_insert(0);
        *slot = (*slot + c) % self.p;
        if *slot == 0 {
            self.terms.remove(&idx);
        }
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Index, u32)> {
        self.terms.iter().map(|(i, &c)| (i, c))
    }

    pub fn coeff(&self, idx: &Index) -> u32 {
        self.terms.get(idx).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Weight, sign-product and depth checks for the product a·b.
    pub fn check_grading(&self, a: &Index, b: &Index, fq: &Fq) -> std::result::Result<(), String> {
        let w = a.weight() + b.weight();
        let sign = fq.mul(a.sign_product(fq), b.sign_product(fq));
        let depth = a.depth() + b.depth();
        for (idx, _) in self.terms() {
            let shown = idx.format(fq, EpsMode::GenExp);
            if idx.weight() != w {
                return Err(format!("{shown}: weight {} != {w}", idx.weight()));
            }
            if idx.sign_product(fq) != sign {
                return Err(format!("{shown}: sign product differs"));
            }
            if idx.depth() > depth {
                return Err(format!("{shown}: depth {} > {depth}", idx.depth()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, fq: &Fq, mode: EpsMode) -> LinCombJson {
        LinCombJson {
            level: level_name(self.level).into(),
            terms: self
                .terms()
                .map(|(i, c)| {
                    let j = i.to_json(fq, mode);
                    TermJson { coeff: c, s: j.s, eps: j.eps }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LinCombJson, fq: &Fq) -> Result<Self> {
        let level = match j.level.as_str() {
            "sd" => Level::Sd,
            "sless" => Level::Sless,
            "zeta" => Level::Zeta,
            other => return Err(Error::Invalid(format!("unknown level {other:?}"))),
        };
        let mut out = LinComb::new(level, fq.p());
        for t in &j.terms {
            let idx = Index::from_json(&IndexJson { s: t.s.clone(), eps: t.eps.clone() }, fq)?;
            out.add_term(idx, t.coeff);
        }
        Ok(out)
    }
}

pub fn level_name(l: Level) -> &'static str {
    match l {
        Level::Sd => "sd",
        Level::Sless => "sless",
        Level::Zeta => "zeta",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: u32,
    pub s: Vec<u32>,
    pub eps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinCombJson {
    pub level: String,
    pub terms: Vec<TermJson>,
}

type MemoKey = (Vec<Letter>, Vec<Letter>);

/// Symbolic product engine for one q; memoizes S_{<d} products.
pub struct ShuffleEngine {
    fq: Fq,
    memo: Mutex<HashMap<MemoKey, Arc<Combo>>>,
}

impl ShuffleEngine {
    pub fn new(fq: Fq) -> Self {
        ShuffleEngine { fq, memo: Mutex::new(HashMap::new()) }
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }

    fn p(&self) -> u32 {
        self.fq.p()
    }

    /// Terms of the diagonal S_d(a1) S_d(b1) S_{<d}(rest) where `rest` is
    /// itself a combination of S_{<d} words.
    fn diagonal(&self, a1: Letter, b1: Letter, rest: &Combo, out: &mut Combo) {
        let p = self.p();
        let e = self.fq.mul(a1.eps, b1.eps);
        let top = a1.s + b1.s;
        for (w, &c) in rest {
            push(out, prepend(Letter::new(top, e), w), c, p);
        }
        for (j, dj) in deltas(a1.s, b1.s, &self.fq) {
            let head = Letter::new(top - j, e);
            let jl = [Letter::new(j, Sign::ONE)];
            for (w, &c) in rest {
                let inner = self.sless_combo(&jl, &w.0);
                for (w2, &c2) in inner.iter() {
                    let coeff = (dj as u64 * c as u64 % p as u64 * c2 as u64 % p as u64) as u32;
                    push(out, prepend(head, w2), coeff, p);
                }
            }
        }
    }

    fn sless_combo(&self, a: &[Letter], b: &[Letter]) -> Arc<Combo> {
        let p = self.p();
        if a.is_empty() || b.is_empty() {
            let w = if a.is_empty() { b } else { a };
            return Arc::new(BTreeMap::from([(Word(w.to_vec()), 1)]));
        }
        let key = (a.to_vec(), b.to_vec());
        if let Some(c) = self.memo.lock().unwrap().get(&key) {
            return c.clone();
        }
        let mut out = Combo::new();
        for (w, &c) in self.sless_combo(&a[1..], b).iter() {
            push(&mut out, prepend(a[0], w), c, p);
        }
        for (w, &c) in self.sless_combo(a, &b[1..]).iter() {
            push(&mut out, prepend(b[0], w), c, p);
        }
        let rest = self.sless_combo(&a[1..], &b[1..]);
        self.diagonal(a[0], b[0], &rest, &mut out);
        let out = Arc::new(out);
        self.memo.lock().unwrap().insert(key, out.clone());
        out
    }

    fn sd_combo(&self, a: &[Letter], b: &[Letter]) -> Combo {
        let rest = self.sless_combo(&a[1..], &b[1..]);
        let mut out = Combo::new();
        self.diagonal(a[0], b[0], &rest, &mut out);
        out
    }

    pub fn depth1_sd_product(&self, a: Letter, b: Letter) -> LinComb {
        LinComb::from_combo(Level::Sd, self.p(), self.sd_combo(&[a], &[b]))
    }

    pub fn sless_product(&self, a: &Index, b: &Index) -> LinComb {
        let c = (*self.sless_combo(a.letters(), b.letters())).clone();
        LinComb::from_combo(Level::Sless, self.p(), c)
    }

    pub fn sd_product(&self, a: &Index, b: &Index) -> LinComb {
        LinComb::from_combo(Level::Sd, self.p(), self.sd_combo(a.letters(), b.letters()))
    }

    /// ζ(a)ζ(b): the diagonal d1 = e1, plus the two strict orderings of the
    /// leading degrees.
    pub fn zeta_product(&self, a: &Index, b: &Index) -> LinComb {
        let p = self.p();
        let (a, b) = (a.letters(), b.letters());
        let mut out = self.sd_combo(a, b);
        for (x, y) in [(a, b), (b, a)] {
            for (w, &c) in self.sless_combo(&x[1..], y).iter() {
                push(&mut out, prepend(x[0], w), c, p);
            }
        }
        LinComb::from_combo(Level::Zeta, p, out)
    }

    /// Closed form of ζ(a1,a2;ε1,ε2)·ζ(b1;λ1).
    pub fn appendix_2x1(&self, a: &Index, b: &Index) -> Result<LinComb> {
        if a.depth() != 2 || b.depth() != 1 {
            return Err(Error::Invalid("appendix form needs depths (2, 1)".into()));
        }
        let fq = &self.fq;
        let p = self.p();
        let [x1, x2] = [a.letters()[0], a.letters()[1]];
        let y1 = b.letters()[0];
        let (a1, a2, b1) = (x1.s, x2.s, y1.s);
        let (e1, e2, l1) = (x1.eps, x2.eps, y1.eps);
        let one = Sign::ONE;
        let e = fq.mul(e1, l1);
        let mut out = LinComb::new(Level::Zeta, p);
        let mut put = |s: &[u32], eps: &[Sign], c: u32| {
            out.add_term(Index::new(s, eps).expect("positive exponents"), c);
        };
        let mul = |x: u32, y: u32| (x as u64 * y as u64 % p as u64) as u32;
        for (j1, d1) in deltas(a1, b1, fq) {
            let h = a1 + b1 - j1;
            for (j2, d2) in deltas(j1, a2, fq) {
                put(&[h, j1 + a2 - j2, j2], &[e, e2, one], mul(d1, d2));
            }
            put(&[h, j1 + a2], &[e, e2], d1);
            put(&[h, j1, a2], &[e, one, e2], d1);
            put(&[h, a2, j1], &[e, e2, one], d1);
        }
        put(&[a1 + b1, a2], &[e, e2], 1);
        let e2l = fq.mul(e2, l1);
        for (j3, d3) in deltas(a2, b1, fq) {
            put(&[a1, a2 + b1 - j3, j3], &[e1, e2l, one], d3);
        }
        put(&[a1, a2 + b1], &[e1, e2l], 1);
        put(&[a1, a2, b1], &[e1, e2, l1], 1);
        put(&[a1, b1, a2], &[e1, l1, e2], 1);
        put(&[b1, a1, a2], &[l1, e1, e2], 1);
        Ok(out)
    }
}

/// Outcome of a numeric check of Σ a_i b_i = combo.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub residual_valuation: i64,
    pub prec: i64,
    pub pass: bool,
}

/// Evaluates Σ value(a)·value(b) − Σ c·value(idx) with the engine; `d` is
/// required for the S_d and S_{<d} families.
pub fn verify_lincomb(
    engine: &PowerSumEngine,
    products: &[(Index, Index)],
    combo: &LinComb,
    d: Option<u32>,
) -> Result<Verification> {
    let f = engine.field();
    let d = match (combo.level, d) {
        (Level::Zeta, _) => 0,
        (_, Some(d)) => d,
        (_, None) => return Err(Error::Invalid("S_d families need a level d".into())),
    };
    let value = |i: &Index| engine.level_value(combo.level, d, i);
    let mut diff = USeries::zero_to(engine.prec());
    for (a, b) in products {
        diff.add_assign(&value(a)?.mul(&value(b)?, f), f);
    }
    for (idx, c) in combo.terms() {
        let v = value(idx)?.scale(f.neg(f.from_fp(c)), f);
        diff.add_assign(&v, f);
    }
    let target = engine.prec();
    let residual = diff.val_bound().min(target);
    Ok(Verification { residual_valuation: residual, prec: target, pass: residual >= target })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(t: &str, fq: &Fq) -> Index {
        Index::parse(t, fq).unwrap()
    }

    fn shown(c: &LinComb, fq: &Fq) -> Vec<(String, u32)> {
        c.terms().map(|(i, c)| (i.format(fq, EpsMode::Residue), c)).collect()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(chen_delta(4, 2, 3, 5).unwrap(), 0);
        assert_eq!(chen_delta(2, 2, 2, 3).unwrap(), 1);
        assert!(chen_delta(5, 2, 3, 5).is_err());
        for s in 1..8u32 {
            for j in 1..2 * s {
                let b = lucas_binom(j as u64 - 1, s as u64 - 1, 7);
                let sign = if (s - 1) % 2 == 1 { 7 - b } else { b } % 7;
                assert_eq!(chen_delta(j, s, s, 7).unwrap(), 2 * sign % 7);
            }
        }
    }

    #[test]
    fn delta_matches_integer_arithmetic() {
        fn binom(n: i128, k: i128) -> i128 {
            if k < 0 || k > n {
                return 0;
            }
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for p in [2u32, 3, 5, 7] {
            for s1 in 1..20u32 {
                for s2 in 1..=(20 - s1) {
                    for j in 1..s1 + s2 {
                        let sg = |s: u32| if (s - 1).is_multiple_of(2) { 1 } else { -1 };
                        let v = sg(s1) * binom(j as i128 - 1, s1 as i128 - 1)
                            + sg(s2) * binom(j as i128 - 1, s2 as i128 - 1);
                        assert_eq!(
                            chen_delta(j, s1, s2, p).unwrap() as i128,
                            v.rem_euclid(p as i128)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn q3_worked_example() {
        let fq = Fq::new(3, 1).unwrap();
        let e = ShuffleEngine::new(fq.clone());
        let c = e.zeta_product(&idx("2;1", &fq), &idx("1,2;2,2", &fq));
        let want = [
            ("1,4;2,2", 1),
            ("3,2;2,2", 1),
            ("1,2,2;2,1,2", 1),
            ("1,2,2;2,2,1", 2),
            ("2,1,2;1,2,2", 1),
        ];
        let want: Vec<_> = want.iter().map(|(s, c)| (s.to_string(), *c)).collect();
        assert_eq!(shown(&c, &fq), want);
    }

    #[test]
    fn q5_worked_example() {
        let fq = Fq::new(5, 1).unwrap();
        let e = ShuffleEngine::new(fq.clone());
        let c = e.zeta_product(&idx("2;3", &fq), &idx("3;1", &fq));
        let want: Vec<_> = [("5;3", 1), ("2,3;3,1", 1), ("3,2;1,3", 1)]
            .iter()
            .map(|(s, c)| (s.to_string(), *c))
            .collect();
        assert_eq!(shown(&c, &fq), want);
    }

    #[test]
    fn depth_one_examples() {
        let fq = Fq::new(3, 1).unwrap();
        let e = ShuffleEngine::new(fq.clone());
        let l = Letter::new(2, Sign::ONE);
        let c = e.depth1_sd_product(l, l);
        let want = vec![("4;1".to_string(), 1), ("2,2;1,1".to_string(), 1)];
        assert_eq!(shown(&c, &fq), want);

        let f5 = Fq::new(5, 1).unwrap();
        let e5 = ShuffleEngine::new(f5.clone());
        let one = idx("1;1", &f5);
        assert_eq!(shown(&e5.sd_product(&one, &one), &f5), vec![("2;1".to_string(), 1)]);
        let sl = e5.sless_product(&one, &one);
        assert_eq!(shown(&sl, &f5), vec![("2;1".to_string(), 1), ("1,1;1,1".to_string(), 2)]);
    }

    #[test]
    fn appendix_matches_engine_on_examples() {
        let fq = Fq::new(3, 1).unwrap();
        let e = ShuffleEngine::new(fq.clone());
        let (a, b) = (idx("1,2;2,2", &fq), idx("2;1", &fq));
        assert_eq!(e.appendix_2x1(&a, &b).unwrap(), e.zeta_product(&a, &b));
        assert!(e.appendix_2x1(&b, &a).is_err());
    }

    #[test]
    fn json_round_trip() {
        let fq = Fq::new(3, 1).unwrap();
        let e = ShuffleEngine::new(fq.clone());
        let c = e.zeta_product(&idx("2;1", &fq), &idx("1,2;2,2", &fq));
        let j = serde_json::to_string(&c.to_json(&fq, EpsMode::Residue)).unwrap();
        let back: LinCombJson = serde_json::from_str(&j).unwrap();
        assert_eq!(LinComb::from_json(&back, &fq).unwrap(), c);
    }

    fn all_upto(w: u32, depth: usize, fq: &Fq) -> Vec<Index> {
        (1..=w).flat_map(|k| crate::index::enumerate_indices(k, depth, fq)).collect()
    }

    #[test]
    fn appendix_matches_engine_everywhere() {
        for p in [3u32, 5] {
            let fq = Fq::new(p, 1).unwrap();
            let e = ShuffleEngine::new(fq.clone());
            let lefts: Vec<_> = all_upto(5, 2, &fq).into_iter().filter(|i| i.depth() == 2).collect();
            let rights: Vec<_> = all_upto(4, 1, &fq);
            for a in &lefts {
                for b in rights.iter().filter(|b| a.weight() + b.weight() <= 6) {
                    assert_eq!(e.appendix_2x1(a, b).unwrap(), e.zeta_product(a, b), "q={p}");
                }
            }
        }
    }

    #[test]
    fn products_commute_and_are_graded() {
        for p in [3u32, 5] {
            let fq = Fq::new(p, 1).unwrap();
            let e = ShuffleEngine::new(fq.clone());
            let all = all_upto(4, 3, &fq);
            for a in &all {
                for b in all.iter().filter(|b| a.weight() + b.weight() <= 6) {
                    let ab = e.zeta_product(a, b);
                    assert_eq!(ab, e.zeta_product(b, a));
                    ab.check_grading(a, b, &fq).unwrap();
                    e.sless_product(a, b).check_grading(a, b, &fq).unwrap();
                    e.sd_product(a, b).check_grading(a, b, &fq).unwrap();
                }
            }
        }
    }

    /// Sign-free product on plain words, written independently of the engine:
    /// ζ(a)ζ(b) = Σ_{d} [S_d(a)S_d(b)] + the two strict orders, with every
    /// sum expanded straight from the definition of the quasi-shuffle.
    fn plain_product(a: &[u32], b: &[u32], p: u32, q: u32) -> BTreeMap<Vec<u32>, u32> {
        type M = BTreeMap<Vec<u32>, u32>;
        fn add(m: &mut M, w: Vec<u32>, c: u32, p: u32) {
            let v = (m.get(&w).copied().unwrap_or(0) + c) % p;
            if v == 0 {
                m.remove(&w);
            } else {
                m.insert(w, v);
            }
        }
        fn cat(x: &[u32], y: &[u32]) -> Vec<u32> {
            x.iter().chain(y).copied().collect()
        }
        // S_{<d}(a) S_{<d}(b)
        fn less(a: &[u32], b: &[u32], p: u32, q: u32) -> M {
            let mut out = M::new();
            if a.is_empty() || b.is_empty() {
                out.insert(cat(a, b), 1);
                return out;
            }
            for (w, c) in less(&a[1..], b, p, q) {
                add(&mut out, cat(&a[..1], &w), c, p);
            }
            for (w, c) in less(a, &b[1..], p, q) {
                add(&mut out, cat(&b[..1], &w), c, p);
            }
            for (w, c) in diag(a[0], b[0], &less(&a[1..], &b[1..], p, q), p, q) {
                add(&mut out, w, c, p);
            }
            out
        }
        // S_d(x)S_d(y) S_{<d}(rest)
        fn diag(x: u32, y: u32, rest: &M, p: u32, q: u32) -> M {
            let mut out = M::new();
            for (w, &c) in rest {
                add(&mut out, cat(&[x + y], w), c, p);
            }
            for j in ((q - 1)..x + y).step_by((q - 1) as usize) {
                let dj = chen_delta(j, x, y, p).unwrap();
                for (w, &c) in rest {
                    for (w2, c2) in less(&[j], w, p, q) {
                        add(&mut out, cat(&[x + y - j], &w2), dj * c % p * c2 % p, p);
                    }
                }
            }
            out
        }
        let mut out = diag(a[0], b[0], &less(&a[1..], &b[1..], p, q), p, q);
        for (x, y) in [(a, b), (b, a)] {
            for (w, c) in less(&x[1..], y, p, q) {
                add(&mut out, cat(&x[..1], &w), c, p);
            }
        }
        out
    }

    #[test]
    fn unsigned_products_match_plain_oracle() {
        for p in [2u32, 3, 5] {
            let fq = Fq::new(p, 1).unwrap();
            let e = ShuffleEngine::new(fq.clone());
            let plain: Vec<_> = (1..=4).flat_map(|w| crate::index::compositions(w, 3)).collect();
            for a in &plain {
                for b in plain.iter().filter(|b| a.iter().sum::<u32>() + b.iter().sum::<u32>() <= 7) {
                    let got: BTreeMap<Vec<u32>, u32> = e
                        .zeta_product(&Index::plain(a).unwrap(), &Index::plain(b).unwrap())
                        .terms()
                        .map(|(i, c)| (i.s(), c))
                        .collect();
                    assert_eq!(got, plain_product(a, b, p, p), "q={p} {a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn numeric_verification_of_worked_examples() {
        for (p, l, r) in [(3u32, "2;1", "1,2;2,2"), (5, "2;3", "3;1")] {
            let f = Arc::new(crate::gf::FieldSpec::for_signs(p, 1, &Fq::new(p, 1).unwrap().signs()).unwrap());
            let fq = f.fq().clone();
            let ps = PowerSumEngine::new(f, 120);
            let e = ShuffleEngine::new(fq.clone());
            let (a, b) = (idx(l, &fq), idx(r, &fq));
            let combo = e.zeta_product(&a, &b);
            let v = verify_lincomb(&ps, &[(a.clone(), b.clone())], &combo, None).unwrap();
            assert!(v.pass, "{v:?}");

            // Perturb one coefficient: the residual drops to that term's valuation.
            let (victim, c) = combo.terms().next().map(|(i, c)| (i.clone(), c)).unwrap();
            let mut bad = combo.clone();
            bad.add_term(victim.clone(), 1);
            let v = verify_lincomb(&ps, &[(a, b)], &bad, None).unwrap();
            assert!(!v.pass);
            let lead = ps.zeta_eval(&victim).unwrap().value.valuation().unwrap();
            assert_eq!(v.residual_valuation, lead, "coefficient was {c}");
        }
    }

    #[test]
    fn level_products_hold_numerically() {
        let f = Arc::new(crate::gf::FieldSpec::for_signs(3, 1, &Fq::new(3, 1).unwrap().signs()).unwrap());
        let fq = f.fq().clone();
        let ps = PowerSumEngine::new(f, 160);
        let e = ShuffleEngine::new(fq.clone());
        let pairs = [("1;2", "2;2"), ("1,2;2,2", "2;1"), ("2,1;1,2", "1,1;2,1")];
        for (l, r) in pairs {
            let (a, b) = (idx(l, &fq), idx(r, &fq));
            for d in 1..=3 {
                for combo in [e.sd_product(&a, &b), e.sless_product(&a, &b)] {
                    let v = verify_lincomb(&ps, &[(a.clone(), b.clone())], &combo, Some(d)).unwrap();
                    assert!(v.pass, "{l} x {r} at d={d}: {v:?}");
                }
            }
        }
        let empty = LinComb::new(Level::Zeta, 3);
        assert!(verify_lincomb(&ps, &[], &empty, None).unwrap().pass);
        assert!(verify_lincomb(&ps, &[], &LinComb::new(Level::Sd, 3), None).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn random_products_are_graded(seed in 0u64..1_000_000, q5 in proptest::bool::ANY) {
            use rand::SeedableRng;
            let p = if q5 { 5 } else { 3 };
            let fq = Fq::new(p, 1).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = crate::index::random_index(&mut rng, &fq, 4, 3);
            let b = crate::index::random_index(&mut rng, &fq, 4, 3);
            let e = ShuffleEngine::new(fq.clone());
            let ab = e.zeta_product(&a, &b);
            proptest::prop_assert!(ab.check_grading(&a, &b, &fq).is_ok());
            proptest::prop_assert_eq!(ab, e.zeta_product(&b, &a));
        }
    }
}
