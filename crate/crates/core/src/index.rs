//! Indices (𝔰; ε) and their text/JSON forms.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{EpsMode, Fq, Sign};

/// One slot of an index: an exponent with its sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Letter {
    pub s: u32,
    pub eps: Sign,
}

impl Letter {
    pub fn new(s: u32, eps: Sign) -> Self {
        Letter { s, eps }
    }
}

/// Canonical order on words: by length, then exponents, then signs.
pub fn word_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().map(|l| l.s).cmp(b.iter().map(|l| l.s)))
        .then_with(|| a.iter().map(|l| l.eps).cmp(b.iter().map(|l| l.eps)))
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Index {
    letters: Vec<Letter>,
}

impl Ord for Index {
    fn cmp(&self, o: &Self) -> Ordering {
        word_cmp(&self.letters, &o.letters)
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Index {
    pub fn new(s: &[u32], eps: &[Sign]) -> Result<Self> {
        if s.len() != eps.len() {
            return Err(Error::InvalidIndex(format!(
                "length mismatch: {} exponents, {} signs",
                s.len(),
                eps.len()
            )));
        }
        Self::from_letters(s.iter().zip(eps).map(|(&s, &e)| Letter::new(s, e)).collect())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidIndex("depth must be at least 1".into()));
        }
        if letters.iter().any(|l| l.s == 0) {
            return Err(Error::InvalidIndex("exponents must be positive".into()));
        }
        if letters.iter().any(|l| l.eps.0 == 0) {
            return Err(Error::InvalidIndex("signs must be nonzero".into()));
        }
        Ok(Index { letters })
    }

    /// All signs equal to 1.
    pub fn plain(s: &[u32]) -> Result<Self> {
        Self::new(s, &vec![Sign::ONE; s.len()])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }
    pub fn depth(&self) -> usize {
        self.letters.len()
    }
    pub fn weight(&self) -> u32 {
        self.letters.iter().map(|l| l.s).sum()
    }
    pub fn s(&self) -> Vec<u32> {
        self.letters.iter().map(|l| l.s).collect()
    }
    pub fn eps(&self) -> Vec<Sign> {
        self.letters.iter().map(|l| l.eps).collect()
    }
    pub fn sign_product(&self, fq: &Fq) -> Sign {
        fq.product(self.letters.iter().map(|l| l.eps))
    }

    /// `s1,s2;e1,e2`.
    pub fn format(&self, fq: &Fq, mode: EpsMode) -> String {
        let mut out = String::new();
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", l.s);
        }
        out.push(';');
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fq.format_sign(l.eps, mode));
        }
        out
    }

    pub fn parse(text: &str, fq: &Fq) -> Result<Self> {
        let (s_part, e_part) = text
            .split_once(';')
            .ok_or_else(|| Error::InvalidIndex(format!("{text:?}: expected 's1,...;e1,...'")))?;
        let s = s_part
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidIndex(format!("malformed exponent {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let eps = e_part.split(',').map(|t| fq.parse_sign(t)).collect::<Result<Vec<_>>>()?;
        Self::new(&s, &eps)
    }

    pub fn to_json(&self, fq: &Fq, mode: EpsMode) -> IndexJson {
        IndexJson {
            s: self.s(),
            eps: self.letters.iter().map(|l| fq.format_sign(l.eps, mode)).collect(),
        }
    }

    pub fn from_json(j: &IndexJson, fq: &Fq) -> Result<Self> {
        let eps = j.eps.iter().map(|t| fq.parse_sign(t)).collect::<Result<Vec<_>>>()?;
        Self::new(&j.s, &eps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexJson {
    pub s: Vec<u32>,
    pub eps: Vec<String>,
}

/// Compositions of `weight` into at most `max_depth` positive parts, by depth
/// then lexicographically.
pub fn compositions(weight: u32, max_depth: usize) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for first in 1..=left {
            if left - first < (parts - 1) as u32 {
                break;
            }
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for depth in 1..=max_depth.min(weight as usize) {
        rec(weight, depth, &mut Vec::new(), &mut out);
    }
    out
}

/// Every index of the given weight and depth at most `max_depth`, in
/// canonical order.
pub fn enumerate_indices(weight: u32, max_depth: usize, fq: &Fq) -> Vec<Index> {
    let signs = fq.signs();
    let mut out = Vec::new();
    for comp in compositions(weight, max_depth) {
        let r = comp.len();
        let total = signs.len().pow(r as u32);
        for mut k in 0..total {
            let mut eps = vec![Sign::ONE; r];
            for slot in eps.iter_mut().rev() {
                *slot = signs[k % signs.len()];
                k /= signs.len();
            }
            out.push(Index::new(&comp, &eps).expect("valid by construction"));
        }
    }
    out.sort();
    out
}

/// A uniformly random composition of a uniformly random weight in 1..=max_weight,
/// rejected until its depth is at most `max_depth`, with uniform signs.
pub fn random_index<R: rand::Rng>(rng: &mut R, fq: &Fq, max_weight: u32, max_depth: usize) -> Index {
    let signs = fq.signs();
    loop {
        let w = rng.gen_range(1..=max_weight);
        // cut points of a composition of w are a random subset of 1..w
        let mut s = Vec::new();
        let mut last = 0;
        for cut in 1..w {
            if rng.gen_bool(0.5) {
                s.push(cut - last);
                last = cut;
            }
        }
        s.push(w - last);
        if s.len() > max_depth {
            continue;
        }
        let eps: Vec<Sign> = s.iter().map(|_| signs[rng.gen_range(0..signs.len())]).collect();
        return Index::new(&s, &eps).expect("valid by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let fq = Fq::new(3, 1).unwrap();
        let i = Index::parse("1,2;2,2", &fq).unwrap();
        assert_eq!(i.s(), vec![1, 2]);
        assert_eq!(i.eps(), vec![Sign(2), Sign(2)]);
        assert_eq!(Index::parse("2;1", &fq).unwrap().depth(), 1);
        assert!(Index::parse("1,2;2", &fq).is_err());
        assert!(Index::parse("0;1", &fq).is_err());
        assert!(Index::parse("1;0", &fq).is_err());
        assert!(Index::parse("1;x", &fq).is_err());
        assert_eq!(i.format(&fq, EpsMode::Residue), "1,2;2,2");
    }

    #[test]
    fn enumeration_counts() {
        let f3 = Fq::new(3, 1).unwrap();
        assert_eq!(enumerate_indices(2, 2, &f3).len(), 6);
        assert_eq!(enumerate_indices(1, 3, &f3).len(), 2);
        let f2 = Fq::new(2, 1).unwrap();
        assert_eq!(enumerate_indices(5, 5, &f2).len(), 16);
        assert_eq!(enumerate_indices(5, 2, &f2).len(), 5);
    }

    #[test]
    fn canonical_order() {
        let fq = Fq::new(3, 1).unwrap();
        let mut v: Vec<Index> = ["1,2,2;2,2,1", "3,2;2,2", "1,4;2,2", "1,2,2;2,1,2"]
            .iter()
            .map(|t| Index::parse(t, &fq).unwrap())
            .collect();
        v.sort();
        let shown: Vec<_> = v.iter().map(|i| i.format(&fq, EpsMode::Residue)).collect();
        assert_eq!(shown, ["1,4;2,2", "3,2;2,2", "1,2,2;2,1,2", "1,2,2;2,2,1"]);
    }
}
