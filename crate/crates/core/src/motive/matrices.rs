//! The matrices Φ (exact, symbolic) and Ψ (truncated t-series), and their
//! Kronecker products.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{EpsMode, Fe, FieldSpec, Sign};
use crate::index::{Index, Letter};
use crate::motive::anderson_thakur::AtSolver;
use crate::motive::omega::{omega_uniform, qpow};
use crate::motive::tseries::TSeries;
use crate::ring_a::PolyA;
use crate::useries::{USeries, EXACT};

/// Truncation parameters shared by every matrix built in one context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MotiveParams {
    /// Absolute u-precision of every Ψ coefficient.
    pub prec: i64,
    /// Number of kept t-degrees.
    pub t_len: usize,
    /// L keeps the terms with d_1 ≤ d_max.
    pub d_max: u32,
}

impl Default for MotiveParams {
    fn default() -> Self {
        MotiveParams { prec: 240, t_len: 16, d_max: 5 }
    }
}

/// Largest Kronecker dimension kron_build accepts.
pub const MAX_DIM: usize = 64;

/// c · (t − θ)^k · ∏ H_{s−1}^{(−1)} over the weights in `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiEntry {
    pub coeff: Fe,
    pub tmt: u32,
    pub h: Vec<u32>,
}

impl PhiEntry {
    fn times(&self, o: &PhiEntry, f: &FieldSpec) -> PhiEntry {
        let mut h = self.h.clone();
        h.extend(&o.h);
        h.sort_unstable();
        PhiEntry { coeff: f.mul(self.coeff, o.coeff), tmt: self.tmt + o.tmt, h }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiMatrix {
    dim: usize,
    entries: Vec<Option<PhiEntry>>,
}

impl PhiMatrix {
    /// Row 0 is (t−θ)^{d_1}; row i has γ_i^{(−1)}(t−θ)^{d_i}H_{s_i−1}^{(−1)} left of
    /// the diagonal entry (t−θ)^{d_{i+1}}, with d_{r+1} = 0.
    pub fn for_index(index: &Index, f: &FieldSpec) -> Result<Self> {
        let r = index.depth();
        let dim = r + 1;
        let tails = suffix_weights(index);
        let mut entries = vec![None; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Some(PhiEntry { coeff: Fe::ONE, tmt: tails[i], h: vec![] });
        }
        for (k, l) in index.letters().iter().enumerate() {
            let gamma = f.gamma(l.eps)?;
            let coeff = f.mul(f.inv(f.embed(l.eps))?, gamma);
            entries[(k + 1) * dim + k] = Some(PhiEntry { coeff, tmt: tails[k], h: vec![l.s] });
        }
        Ok(PhiMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&PhiEntry> {
        self.entries[i * self.dim + j].as_ref()
    }

    pub fn kron(&self, o: &PhiMatrix, f: &FieldSpec) -> PhiMatrix {
        let dim = self.dim * o.dim;
        let mut entries = vec![None; dim * dim];
        for (ia, ja, ea) in self.iter() {
            for (ib, jb, eb) in o.iter() {
                let (i, j) = (ia * o.dim + ib, ja * o.dim + jb);
                entries[i * dim + j] = Some(ea.times(eb, f));
            }
        }
        PhiMatrix { dim, entries }
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, &PhiEntry)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(move |(k, e)| e.as_ref().map(|e| (k / self.dim, k % self.dim, e)))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.iter().all(|(i, j, _)| j <= i)
    }

    /// Property (ii): the last column is (0, …, 0, 1).
    pub fn last_column_is_unit(&self) -> bool {
        let n = self.dim - 1;
        (0..self.dim).all(|i| match self.get(i, n) {
            None => i != n,
            Some(e) => i == n && e.coeff == Fe::ONE && e.tmt == 0 && e.h.is_empty(),
        })
    }

    /// det Φ = c (t−θ)^w; returns (c, w). Requires a lower-triangular matrix.
    pub fn det(&self, f: &FieldSpec) -> Result<(Fe, u32)> {
        if !self.is_lower_triangular() {
            return Err(Error::Invalid("determinant needs a triangular matrix".into()));
        }
        let mut c = Fe::ONE;
        let mut w = 0;
        for i in 0..self.dim {
            let e = self.get(i, i).ok_or(Error::Invalid("zero on the diagonal".into()))?;
            if !e.h.is_empty() {
                return Err(Error::Invalid("diagonal entries carry no H".into()));
            }
            c = f.mul(c, e.coeff);
            w += e.tmt;
        }
        Ok((c, w))
    }

    /// det Φ at t = 0, i.e. c (−θ)^w.
    pub fn det_at_zero(&self, f: &FieldSpec) -> Result<PolyA> {
        let (c, w) = self.det(f)?;
        let sign = if w % 2 == 1 { f.neg(c) } else { c };
        Ok(PolyA::monomial(sign, w as usize))
    }

    /// Φ^{(n)} as exact t-series, n ≥ 1.
    pub fn twisted(&self, n: u32, t_len: usize, solver: &AtSolver) -> Result<Vec<Vec<TSeries>>> {
        if n == 0 {
            return Err(Error::Invalid("Φ is only materialized after a forward twist".into()));
        }
        let f = solver.field();
        let qn = qpow(f.q(), n).ok_or_else(|| Error::Precision("twist too deep".into()))?;
        let x = USeries::theta_pow(qn, f);
        let mut out = vec![vec![TSeries::zero(t_len); self.dim]; self.dim];
        for (i, j, e) in self.iter() {
            let mut v = TSeries::t_minus_pow(&x, e.tmt, t_len, f).scale(f.frobenius(e.coeff, n), f);
            for &s in &e.h {
                let h = solver.solve(s)?;
                let ht = TSeries::new(
                    (0..t_len).map(|j| USeries::from_poly(&h.t_coeff(j).twist(n - 1, f), f)).collect(),
                );
                v = v.mul(&ht, f);
            }
            out[i][j] = v;
        }
        Ok(out)
    }

    pub fn to_json(&self, f: &FieldSpec) -> Vec<Vec<Option<PhiEntryJson>>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| {
                        self.get(i, j).map(|e| PhiEntryJson {
                            coeff: f.packed(e.coeff),
                            t_minus_theta_pow: e.tmt,
                            h_weights: e.h.clone(),
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// One entry of Φ: coeff · (t−θ)^k · ∏ H_{s−1}^{(−1)} for s in `h_weights`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiEntryJson {
    pub coeff: u32,
    pub t_minus_theta_pow: u32,
    pub h_weights: Vec<u32>,
}

/// d_i = s_i + … + s_r for i = 1..r, then d_{r+1} = 0.
pub fn suffix_weights(index: &Index) -> Vec<u32> {
    let s = index.s();
    let mut out = vec![0; s.len() + 1];
    for i in (0..s.len()).rev() {
        out[i] = out[i + 1] + s[i];
    }
    out
}

#[derive(Clone, Debug)]
pub struct MotiveMatrices {
    /// Factors of the monomial with multiplicities; one entry of
    /// multiplicity 1 for a single AMZV.
    pub components: Vec<(Index, u32)>,
    pub phi: PhiMatrix,
    pub psi: Vec<Vec<TSeries>>,
    /// Everything L-truncation dropped from Ψ_ij has valuation ≥ tails[i][j].
    pub tails: Vec<Vec<i64>>,
    /// Power of Ω on each diagonal entry of Ψ.
    pub diag_omega: Vec<u32>,
    /// γ_i for a single index; empty for products.
    pub gammas: Vec<Fe>,
    pub params: MotiveParams,
}

impl MotiveMatrices {
    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn weight(&self) -> u32 {
        self.components.iter().map(|(i, m)| i.weight() * m).sum()
    }

    pub fn label(&self, f: &FieldSpec, mode: EpsMode) -> String {
        self.components
            .iter()
            .map(|(i, m)| {
                let z = format!("ζ({})", i.format(f.fq(), mode));
                if *m == 1 {
                    z
                } else {
                    format!("{z}^{m}")
                }
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

type GKey = (u32, u32);

/// Per-field state: the H solver and caches of Ω powers and twisted blocks.
pub struct MotiveContext {
    field: Arc<FieldSpec>,
    params: MotiveParams,
    solver: AtSolver,
    omega: Mutex<HashMap<i64, Arc<TSeries>>>,
    blocks: Mutex<HashMap<GKey, Arc<TSeries>>>,
}

impl MotiveContext {
    pub fn new(field: Arc<FieldSpec>, params: MotiveParams) -> Self {
        MotiveContext {
            solver: AtSolver::new(field.clone()),
            field,
            params,
            omega: Mutex::new(HashMap::new()),
            blocks: Mutex::new(HashMap::new()),
        }
    }

    /// Tower field large enough for every sign of F_q.
    pub fn for_all_signs(p: u32, e: u32, params: MotiveParams) -> Result<Self> {
        let fq = crate::gf::Fq::new(p, e)?;
        let field = FieldSpec::for_signs(p, e, &fq.signs())?;
        Ok(Self::new(Arc::new(field), params))
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldSpec> {
        self.field.clone()
    }

    pub fn params(&self) -> MotiveParams {
        self.params
    }

    pub fn solver(&self) -> &AtSolver {
        &self.solver
    }

    fn omega_at_prec(&self, prec: i64) -> Result<Arc<TSeries>> {
        if let Some(o) = self.omega.lock().expect("omega cache").get(&prec) {
            return Ok(o.clone());
        }
        let o = Arc::new(omega_uniform(&self.field, prec, self.params.t_len)?);
        self.omega.lock().expect("omega cache").insert(prec, o.clone());
        Ok(o)
    }

    /// Ω^k with every coefficient known to `prec` digits.
    pub fn omega_pow(&self, k: u32, prec: i64) -> Result<TSeries> {
        if k == 0 {
            return Ok(TSeries::one(self.params.t_len));
        }
        let om = self.omega_at_prec(prec)?;
        Ok(om.pow(k, &self.field).truncate(prec))
    }

    /// Lower bound for the valuation of every coefficient of H_{s−1}Ω^s.
    pub fn block_min_val(&self, s: u32) -> Result<i64> {
        let q = self.field.q() as i64;
        let h = self.solver.solve(s)?;
        Ok(s as i64 * q - (q - 1) * h.deg_theta() as i64)
    }

    /// (H_{s−1} Ω^s)^{(d)} to the context precision.
    pub fn block(&self, s: u32, d: u32) -> Result<Arc<TSeries>> {
        if let Some(b) = self.blocks.lock().expect("block cache").get(&(s, d)) {
            return Ok(b.clone());
        }
        let f = &*self.field;
        let k = self.params.prec;
        let b = if d == 0 {
            let h = self.solver.solve(s)?;
            let q1 = f.q() as i64 - 1;
            let om = self.omega_pow(s, k + q1 * h.deg_theta() as i64)?;
            let ht = TSeries::new(
                (0..self.params.t_len).map(|j| USeries::from_poly(&h.t_coeff(j), f)).collect(),
            );
            ht.mul(&om, f).truncate(k)
        } else {
            self.block(s, 0)?.twist(d, k, f)
        };
        let b = Arc::new(b);
        self.blocks.lock().expect("block cache").insert((s, d), b.clone());
        Ok(b)
    }

    /// L over `letters` truncated at d_1 ≤ d_max, with a lower bound for the
    /// valuation of the dropped terms.
    pub fn l_series(&self, letters: &[Letter]) -> Result<(TSeries, i64)> {
        let f = &*self.field;
        let t_len = self.params.t_len;
        let dm = self.params.d_max as usize;
        let term = |l: &Letter, d: usize| -> Result<TSeries> {
            let eps = f.pow(f.embed(l.eps), d as i64)?;
            Ok(self.block(l.s, d as u32)?.scale(eps, f))
        };
        // acc[d] = Σ over d > e_k > … of the suffix product, for the current suffix.
        let last = letters.last().expect("nonempty word");
        let mut acc = vec![TSeries::zero(t_len); dm + 2];
        for d in 1..=dm + 1 {
            acc[d] = acc[d - 1].add(&term(last, d - 1)?, f);
        }
        for l in letters[..letters.len() - 1].iter().rev() {
            let mut next = vec![TSeries::zero(t_len); dm + 2];
            for d in 1..=dm + 1 {
                let add = term(l, d - 1)?.mul(&acc[d - 1], f);
                next[d] = next[d - 1].add(&add, f);
            }
            acc = next;
        }
        let q = self.field.q();
        let lead = qpow(q, self.params.d_max + 1)
            .and_then(|x| x.checked_mul(self.block_min_val(letters[0].s).ok()?))
            .unwrap_or(EXACT);
        let mut tail = lead;
        for l in &letters[1..] {
            tail = tail.saturating_add(self.block_min_val(l.s)?).min(EXACT);
        }
        Ok((acc[dm + 1].clone(), tail))
    }

    pub fn build(&self, index: &Index) -> Result<MotiveMatrices> {
        let f = &*self.field;
        let k = self.params.prec;
        let r = index.depth();
        let dim = r + 1;
        let dsum = suffix_weights(index);
        let letters = index.letters();
        let gammas: Vec<Fe> = letters.iter().map(|l| f.gamma(l.eps)).collect::<Result<_>>()?;
        let mut psi = vec![vec![TSeries::zero(self.params.t_len); dim]; dim];
        let mut tails = vec![vec![EXACT; dim]; dim];
        for i in 0..dim {
            let om = self.omega_pow(dsum[i], k)?;
            for j in 0..i {
                let (l, tail) = self.l_series(&letters[j..i])?;
                if tail < k {
                    return Err(Error::Precision(format!(
                        "d_max = {} leaves a tail at u^{tail}, below the target {k}",
                        self.params.d_max
                    )));
                }
                let a = gammas[j..i].iter().fold(Fe::ONE, |acc, &g| f.mul(acc, g));
                psi[i][j] = l.mul(&om, f).scale(a, f).truncate(k);
                tails[i][j] = tail;
            }
            psi[i][i] = om;
        }
        Ok(MotiveMatrices {
            components: vec![(index.clone(), 1)],
            phi: PhiMatrix::for_index(index, f)?,
            psi,
            tails,
            diag_omega: dsum,
            gammas,
            params: self.params,
        })
    }

    /// Kronecker product Φ_1^{⊗m_1} ⊗ ⋯ with the matching Ψ.
    pub fn kron_build(&self, parts: &[(Index, u32)]) -> Result<MotiveMatrices> {
        let dim: usize = parts.iter().map(|(i, m)| (i.depth() + 1).pow(*m)).product();
        if dim > MAX_DIM {
            return Err(Error::Invalid(format!("Kronecker dimension {dim} exceeds {MAX_DIM}")));
        }
        if parts.iter().all(|(_, m)| *m == 0) {
            return Err(Error::Invalid("empty monomial".into()));
        }
        let mut acc: Option<MotiveMatrices> = None;
        for (index, m) in parts {
            let one = self.build(index)?;
            for _ in 0..*m {
                acc = Some(match acc {
                    None => one.clone(),
                    Some(a) => kron_pair(&a, &one, &self.field),
                });
            }
        }
        let mut out = acc.expect("nonempty");
        out.components = parts.iter().filter(|(_, m)| *m > 0).cloned().collect();
        if !(out.components.len() == 1 && out.components[0].1 == 1) {
            out.gammas.clear();
        }
        Ok(out)
    }
}

fn kron_pair(a: &MotiveMatrices, b: &MotiveMatrices, f: &FieldSpec) -> MotiveMatrices {
    let (na, nb) = (a.dim(), b.dim());
    let dim = na * nb;
    let t_len = a.params.t_len;
    let mut psi = vec![vec![TSeries::zero(t_len); dim]; dim];
    let mut tails = vec![vec![EXACT; dim]; dim];
    for ia in 0..na {
        for ja in 0..na {
            let x = &a.psi[ia][ja];
            if x.is_zero() && x.min_prec() >= EXACT {
                continue;
            }
            for ib in 0..nb {
                for jb in 0..nb {
                    let (i, j) = (ia * nb + ib, ja * nb + jb);
                    psi[i][j] = x.mul(&b.psi[ib][jb], f).truncate(a.params.prec);
                    tails[i][j] = a.tails[ia][ja].min(b.tails[ib][jb]);
                }
            }
        }
    }
    let diag_omega = (0..dim).map(|i| a.diag_omega[i / nb] + b.diag_omega[i % nb]).collect();
    let mut components = a.components.clone();
    components.extend(b.components.iter().cloned());
    MotiveMatrices {
        components,
        phi: a.phi.kron(&b.phi, f),
        psi,
        tails,
        diag_omega,
        gammas: vec![],
        params: a.params,
    }
}

/// γ^{(−1)} = ε^{−1}γ, checked as (ε^{−1}γ)^q = γ.
pub fn gamma_twist_holds(f: &FieldSpec, eps: Sign) -> Result<bool> {
    let g = f.gamma(eps)?;
    let gm1 = f.mul(f.inv(f.embed(eps))?, g);
    Ok(f.frobenius(gm1, 1) == g)
}
