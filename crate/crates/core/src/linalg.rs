//! Dense linear algebra over F_p with streaming row reduction.
//!
//! Rows are fed one at a time and reduced against the pivots seen so far,
//! so tall systems (many digit equations, few unknowns) never need to be
//! stored in full.

use crate::gf::mod_pow;

#[derive(Clone, Debug)]
pub struct RowReducer {
    p: u32,
    cols: usize,
    pivots: Vec<Option<Vec<u32>>>,
    rank: usize,
}

/// Result of solving A x = b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<u32>),
    Inconsistent,
    /// Consistent with a solution space of the given dimension.
    Underdetermined(usize),
}

impl RowReducer {
    pub fn new(p: u32, cols: usize) -> Self {
        RowReducer { p, cols, pivots: vec![None; cols], rank: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn inv(&self, a: u32) -> u32 {
        mod_pow(a as u64, self.p as u64 - 2, self.p as u64) as u32
    }

    /// Reduces `row` against the current pivots; returns the remainder.
    pub fn reduce(&self, row: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut r: Vec<u32> = row.iter().map(|&x| x % self.p).collect();
        for c in 0..self.cols {
            if r[c] == 0 {
                continue;
            }
            if let Some(piv) = &self.pivots[c] {
                let f = r[c] as u64;
                for k in c..self.cols {
                    if piv[k] != 0 {
                        r[k] = ((r[k] as u64 + (p - f) * piv[k] as u64) % p) as u32;
                    }
                }
            }
        }
        r
    }

    /// Adds a row; returns true when it raised the rank.
    pub fn push(&mut self, row: &[u32]) -> bool {
        assert_eq!(row.len(), self.cols);
        let mut r = self.reduce(row);
        let Some(lead) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let iv = self.inv(r[lead]) as u64;
        for x in r.iter_mut() {
            *x = (*x as u64 * iv % self.p as u64) as u32;
        }
        self.pivots[lead] = Some(r);
        self.rank += 1;
        true
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.cols
    }

    /// Reduced row echelon form of the pivot rows, keyed by pivot column.
    fn rref(&self) -> Vec<Option<Vec<u32>>> {
        let p = self.p as u64;
        let mut piv = self.pivots.clone();
        for c in (0..self.cols).rev() {
            let Some(row_c) = piv[c].clone() else { continue };
            for r in 0..c {
                let Some(row_r) = piv[r].as_mut() else { continue };
                let f = row_r[c] as u64;
                if f == 0 {
                    continue;
                }
                for k in c..self.cols {
                    if row_c[k] != 0 {
                        row_r[k] = ((row_r[k] as u64 + (p - f) * row_c[k] as u64) % p) as u32;
                    }
                }
            }
        }
        piv
    }

    /// Basis of {x : row·x = 0 for every pushed row}.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let piv = self.rref();
        let p = self.p;
        let mut out = Vec::new();
        for free in 0..self.cols {
            if piv[free].is_some() {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (c, row) in piv.iter().enumerate() {
                if let Some(row) = row {
                    v[c] = (p - row[free]) % p;
                }
            }
            out.push(v);
        }
        out
    }

    /// Treats the last column as the right-hand side.
    pub fn solve_augmented(&self) -> Solution {
        let n = self.cols - 1;
        if self.pivots[n].is_some() {
            return Solution::Inconsistent;
        }
        let unknown_rank = self.pivots[..n].iter().filter(|r| r.is_some()).count();
        if unknown_rank < n {
            return Solution::Underdetermined(n - unknown_rank);
        }
        let piv = self.rref();
        Solution::Unique((0..n).map(|c| piv[c].as_ref().expect("full rank")[n]).collect())
    }
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(p: u32, basis: &[Vec<u32>], v: &[u32]) -> bool {
    let mut rr = RowReducer::new(p, v.len());
    for b in basis {
        rr.push(b);
    }
    rr.reduce(v).iter().all(|&x| x == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_dependence() {
        let mut rr = RowReducer::new(3, 2);
        for k in 0..5u32 {
            rr.push(&[k % 3, (2 * k) % 3]);
        }
        assert_eq!(rr.rank(), 1);
        assert_eq!(rr.kernel(), vec![vec![1, 1]]);
    }

    #[test]
    fn solve_cases() {
        let mut rr = RowReducer::new(5, 3);
        rr.push(&[1, 1, 3]);
        rr.push(&[1, 4, 0]);
        assert_eq!(rr.solve_augmented(), Solution::Unique(vec![4, 4]));
        let mut bad = rr.clone();
        bad.push(&[2, 2, 2]);
        assert_eq!(bad.solve_augmented(), Solution::Inconsistent);
        let mut under = RowReducer::new(5, 3);
        under.push(&[1, 1, 3]);
        assert_eq!(under.solve_augmented(), Solution::Underdetermined(1));
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate(rows in proptest::collection::vec(proptest::collection::vec(0u32..7, 6), 1..8)) {
            let mut rr = RowReducer::new(7, 6);
            for r in &rows {
                rr.push(r);
            }
            let ker = rr.kernel();
            prop_assert_eq!(ker.len() + rr.rank(), 6);
            for v in &ker {
                for r in &rows {
                    let dot: u64 = r.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
                    prop_assert_eq!(dot % 7, 0);
                }
            }
        }
    }
}
