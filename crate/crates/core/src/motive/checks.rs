//! Numeric checks of the difference equation, the period identity and the
//! specialization at θ^{q^N}.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{EpsMode, Fe, FieldSpec};
use crate::index::Index;
use crate::motive::evaluate::psi_column_at;
use crate::motive::matrices::{MotiveContext, MotiveMatrices};
use crate::motive::omega::{omega_at, pi_tilde};
use crate::motive::tseries::TSeries;
use crate::powersums::PowerSumEngine;
use crate::ring_a::{carlitz_gamma, PolyA};
use crate::useries::{USeries, EXACT};

#[derive(Clone, Debug, Serialize)]
pub struct EntryResidual {
    pub row: usize,
    pub col: usize,
    pub t_degree: usize,
    pub residual_valuation: i64,
    /// Digits the identity must hold to, after precision and tail losses.
    pub required: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetReport {
    pub omega_power: u32,
    pub residual_valuation: i64,
    pub required: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffEqReport {
    pub label: String,
    pub dim: usize,
    pub t_len: usize,
    pub prec: i64,
    pub d_max: u32,
    /// det Φ = c (t−θ)^w.
    pub phi_det_coeff: u32,
    pub phi_det_power: u32,
    pub max_deficit: i64,
    pub worst: Option<EntryResidual>,
    pub entries: Vec<EntryResidual>,
    pub det: DetReport,
    pub pass: bool,
}

impl DiffEqReport {
    pub fn failures(&self) -> impl Iterator<Item = &EntryResidual> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

fn scaled_tail(q: i64, tail: i64) -> i64 {
    if tail >= EXACT {
        EXACT
    } else {
        tail.saturating_mul(q).min(EXACT)
    }
}

/// Checks Ψ = Φ^{(1)} Ψ^{(1)} coefficient by coefficient.
pub fn check_difference_eq(ctx: &MotiveContext, mm: &MotiveMatrices) -> Result<DiffEqReport> {
    let f = ctx.field();
    let q = f.q() as i64;
    let k = mm.params.prec;
    let t_len = mm.params.t_len;
    let n = mm.dim();
    let phi1 = mm.phi.twisted(1, t_len, ctx.solver())?;
    let psi1: Vec<Vec<TSeries>> =
        mm.psi.iter().map(|row| row.iter().map(|x| x.twist(1, EXACT, f)).collect()).collect();
    let present = |i: usize, j: usize| mm.phi.get(i, j).is_some();
    let mut entries = Vec::with_capacity(n * n * t_len);
    for i in 0..n {
        for j in 0..n {
            let mut rhs = TSeries::zero(t_len);
            let mut required = k.min(mm.tails[i][j]);
            for m in 0..n {
                if !present(i, m) {
                    continue;
                }
                rhs = rhs.add(&phi1[i][m].mul(&psi1[m][j], f), f);
                let neg = (-phi1[i][m].min_val()).max(0);
                required = required.min(scaled_tail(q, mm.tails[m][j]).saturating_sub(neg));
            }
            let res = mm.psi[i][j].residuals(&rhs, f);
            for (deg, &r) in res.iter().enumerate() {
                entries.push(EntryResidual {
                    row: i,
                    col: j,
                    t_degree: deg,
                    residual_valuation: r,
                    required,
                    pass: r >= required,
                });
            }
        }
    }
    let worst = entries.iter().max_by_key(|e| e.required.saturating_sub(e.residual_valuation)).cloned();
    let max_deficit = worst.as_ref().map_or(0, |w| (w.required.saturating_sub(w.residual_valuation)).max(0));
    let det = det_check(ctx, mm)?;
    let (c, w) = mm.phi.det(f)?;
    let pass = entries.iter().all(|e| e.pass) && det.pass;
    Ok(DiffEqReport {
        label: mm.label(f, EpsMode::Residue),
        dim: n,
        t_len,
        prec: k,
        d_max: mm.params.d_max,
        phi_det_coeff: f.packed(c),
        phi_det_power: w,
        max_deficit,
        worst,
        entries,
        det,
        pass,
    })
}

/// All permutations of 0..n with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, odd: bool, out: &mut Vec<(Vec<usize>, bool)>) {
        let n = used.len();
        if cur.len() == n {
            out.push((cur.clone(), odd));
            return;
        }
        for v in 0..n {
            if used[v] {
                continue;
            }
            // Inversions added by placing v after the current prefix.
            let inv = cur.iter().filter(|&&x| x > v).count();
            used[v] = true;
            cur.push(v);
            rec(cur, used, odd ^ (inv % 2 == 1), out);
            cur.pop();
            used[v] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], false, &mut out);
    out
}

/// Leibniz determinant; dimensions above 6 fall back to the diagonal of a
/// triangular matrix.
fn det(psi: &[Vec<TSeries>], f: &FieldSpec) -> Result<TSeries> {
    let n = psi.len();
    let t_len = psi[0][0].len();
    let exact_zero = |x: &TSeries| x.coeffs().iter().all(|c| c.is_exact() && c.is_zero());
    if n > 6 {
        let triangular = (0..n).all(|i| (i + 1..n).all(|j| exact_zero(&psi[i][j])));
        if !triangular {
            return Err(Error::Invalid(format!("determinant of a full {n}x{n} matrix")));
        }
        return Ok((0..n).fold(TSeries::one(t_len), |acc, i| acc.mul(&psi[i][i], f)));
    }
    let mut acc = TSeries::zero(t_len);
    for (perm, odd) in permutations(n) {
        if perm.iter().enumerate().any(|(i, &j)| exact_zero(&psi[i][j])) {
            continue;
        }
        let term = perm.iter().enumerate().fold(TSeries::one(t_len), |a, (i, &j)| a.mul(&psi[i][j], f));
        acc = if odd { acc.sub(&term, f) } else { acc.add(&term, f) };
    }
    Ok(acc)
}

fn det_check(ctx: &MotiveContext, mm: &MotiveMatrices) -> Result<DetReport> {
    let f = ctx.field();
    let k = mm.params.prec;
    let power: u32 = mm.diag_omega.iter().sum();
    let got = det(&mm.psi, f)?;
    let want = ctx.omega_pow(power, k)?;
    let res = got.residuals(&want, f).into_iter().min().unwrap_or(EXACT);
    let required = k.min(mm.tails.iter().flatten().copied().min().unwrap_or(EXACT));
    Ok(DetReport { omega_power: power, residual_valuation: res, required, pass: res >= required })
}

/// Constants attached to one factor ζ(𝔰;ε)^m of a monomial.
struct Factor {
    index: Index,
    mult: u32,
    /// a = ∏γ_i
    a: Fe,
    /// b = ∏Γ_{s_i}
    b: PolyA,
    /// c = ∏ε_i, embedded
    c: Fe,
    zeta_val: i64,
}

impl Factor {
    fn new(index: &Index, mult: u32, f: &FieldSpec, probe: &PowerSumEngine) -> Result<Self> {
        let mut a = Fe::ONE;
        let mut b = PolyA::one();
        for l in index.letters() {
            a = f.mul(a, f.gamma(l.eps)?);
            b = b.mul(&carlitz_gamma(f, l.s as u64)?, f);
        }
        let c = f.embed(index.sign_product(f.fq()));
        let zeta_val = probe.nonvanishing_certificate(index)?.valuation;
        Ok(Factor { index: index.clone(), mult, a, b, c, zeta_val })
    }

    /// Valuation of the last entry of ψ(θ), a b ζ / π̃^w.
    fn last_val(&self, q: i64) -> i64 {
        let bdeg = self.b.degree().unwrap_or(0) as i64;
        self.zeta_val + q * self.index.weight() as i64 - (q - 1) * bdeg
    }
}

fn factors(ctx: &MotiveContext, parts: &[(Index, u32)]) -> Result<Vec<Factor>> {
    let probe = PowerSumEngine::new(ctx.field_arc(), 64);
    let fs: Vec<Factor> = parts
        .iter()
        .filter(|(_, m)| *m > 0)
        .map(|(i, m)| Factor::new(i, *m, ctx.field(), &probe))
        .collect::<Result<_>>()?;
    if fs.is_empty() {
        return Err(Error::Invalid("empty monomial".into()));
    }
    Ok(fs)
}

fn label(parts: &[Factor], f: &FieldSpec) -> String {
    parts
        .iter()
        .map(|p| {
            let z = format!("ζ({})", p.index.format(f.fq(), EpsMode::Residue));
            if p.mult == 1 {
                z
            } else {
                format!("{z}^{}", p.mult)
            }
        })
        .collect::<Vec<_>>()
        .join("·")
}

fn pow_series(x: &USeries, m: u32, f: &FieldSpec) -> USeries {
    (0..m).fold(USeries::one(), |acc, _| acc.mul(x, f))
}

/// ∏ ζ_i^{m_i}, each factor to `rel` digits past its leading term.
fn zeta_product(ctx: &MotiveContext, parts: &[Factor], rel: i64) -> Result<USeries> {
    let f = ctx.field();
    let mut z = USeries::one();
    for p in parts {
        let engine = PowerSumEngine::new(ctx.field_arc(), p.zeta_val + rel + 1);
        let v = engine.zeta_eval(&p.index)?.value;
        z = z.mul(&pow_series(&v, p.mult, f), f);
    }
    Ok(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodReport {
    pub label: String,
    pub weight: u32,
    pub theta_digits: i64,
    pub zeta_valuation: i64,
    /// ψ_last(θ) π̃^w / (a b) against ζ, required to reach `target`.
    pub residual_valuation: i64,
    pub target: i64,
    /// ψ_last(θ) against a b ζ / π̃^w.
    pub entry_residual: i64,
    pub entry_target: i64,
    /// ψ_first(θ) against 1/π̃^w.
    pub first_entry_residual: i64,
    pub first_entry_target: i64,
    pub pass: bool,
}

/// Compares the motive's period with the power-sum value of the AMZV (or
/// of a monomial in AMZVs when `parts` has several factors).
pub fn check_period(ctx: &MotiveContext, parts: &[(Index, u32)], theta_digits: i64) -> Result<PeriodReport> {
    let f = ctx.field();
    let q = f.q() as i64;
    let rel = theta_digits * (q - 1);
    let fs = factors(ctx, parts)?;
    let weight: u32 = fs.iter().map(|p| p.index.weight() * p.mult).sum();
    let w = weight as i64;

    let mut first = USeries::one();
    let mut last = USeries::one();
    for p in &fs {
        let lv = p.last_val(q);
        let wi = p.index.weight() as i64;
        let prec = lv.max(q * wi) + rel;
        let col = psi_column_at(ctx, &p.index, 0, prec)?;
        first = first.mul(&pow_series(&col[0], p.mult, f), f);
        last = last.mul(&pow_series(col.last().expect("r+1 entries"), p.mult, f), f);
    }
    let a = fs.iter().fold(Fe::ONE, |acc, p| f.mul(acc, f.pow(p.a, p.mult as i64).expect("unit")));
    let b = fs.iter().fold(PolyA::one(), |acc, p| acc.mul(&p.b.pow(p.mult as u64, f), f));
    let bdeg = b.degree().unwrap_or(0) as i64;
    let zeta_val: i64 = fs.iter().map(|p| p.zeta_val * p.mult as i64).sum();
    let z = zeta_product(ctx, &fs, rel)?;
    let om_w = omega_at(f, 0, 0, q + rel + 1)?.pow(w, q * w + rel + 1, f)?;
    let b_s = USeries::from_poly(&b, f);

    // Normalized form: ψ_last π̃^w / (a b) = ζ.
    let target = zeta_val + rel;
    let pi_w = pi_tilde(f, -q + rel + 2)?.pow(w, EXACT, f)?;
    let zm = last.mul(&pi_w, f).scale(f.inv(a)?, f).div(&b_s, target + 1, f)?;
    let residual = zm.truncate(target).residual_valuation(&z.truncate(target), f);
    let reached = zm.prec() >= target && z.prec() >= target;

    let entry_target = zeta_val + q * w - (q - 1) * bdeg + rel;
    let want_last = z.mul(&om_w, f).mul(&b_s, f).scale(a, f);
    let entry_residual = last.truncate(entry_target).residual_valuation(&want_last.truncate(entry_target), f);
    let entry_reached = last.prec() >= entry_target && want_last.prec() >= entry_target;

    let first_entry_target = q * w + rel;
    let want_first = pi_tilde(f, -q + rel + 2)?.pow(w, EXACT, f)?.inv(first_entry_target + 1, f)?;
    let first_entry_residual =
        first.truncate(first_entry_target).residual_valuation(&want_first.truncate(first_entry_target), f);
    let first_reached = first.prec() >= first_entry_target && want_first.prec() >= first_entry_target;

    let pass = reached
        && entry_reached
        && first_reached
        && residual >= target
        && entry_residual >= entry_target
        && first_entry_residual >= first_entry_target;
    Ok(PeriodReport {
        label: label(&fs, f),
        weight,
        theta_digits,
        zeta_valuation: zeta_val,
        residual_valuation: residual,
        target,
        entry_residual,
        entry_target,
        first_entry_residual,
        first_entry_target,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecializationReport {
    pub label: String,
    pub n: u32,
    pub theta_digits: i64,
    pub target: i64,
    pub entries: usize,
    /// Non-final entries of ψ(θ^{q^N}) that are not zero to `target`.
    pub nonzero_entries: Vec<usize>,
    /// ψ_last(θ^{q^N}) against a c^N (ψ_last(θ)/a)^{q^N}.
    pub l_residual: i64,
    /// ψ_last(θ^{q^N}) against a c^N (b ζ / π̃^w)^{q^N}.
    pub last_residual: i64,
    pub pass: bool,
}

pub fn check_specialization(
    ctx: &MotiveContext,
    parts: &[(Index, u32)],
    n_pow: u32,
    theta_digits: i64,
) -> Result<SpecializationReport> {
    if n_pow == 0 {
        return Err(Error::Invalid("specialization needs N >= 1".into()));
    }
    let f = ctx.field();
    let q = f.q() as i64;
    let qn = q.checked_pow(n_pow).ok_or_else(|| Error::Precision("q^N overflows".into()))?;
    let rel = theta_digits * (q - 1);
    let fs = factors(ctx, parts)?;
    let weight: u32 = fs.iter().map(|p| p.index.weight() * p.mult).sum();
    let w = weight as i64;
    let v_last: i64 = fs.iter().map(|p| p.last_val(q) * p.mult as i64).sum();
    let target = qn * v_last + rel;

    let mut col_x = vec![USeries::one()];
    let mut col_theta = vec![USeries::one()];
    for p in &fs {
        let lv = p.last_val(q);
        let cx = psi_column_at(ctx, &p.index, n_pow, qn * lv + rel)?;
        let ct = psi_column_at(ctx, &p.index, 0, lv.max(q * p.index.weight() as i64) + rel)?;
        for _ in 0..p.mult {
            col_x = crate::motive::evaluate::kron_vec(&col_x, &cx, f);
            col_theta = crate::motive::evaluate::kron_vec(&col_theta, &ct, f);
        }
    }
    let entries = col_x.len();
    let nonzero_entries: Vec<usize> =
        (0..entries - 1).filter(|&i| col_x[i].val_bound() < target).collect();
    let last_x = col_x[entries - 1].clone();

    let a = fs.iter().fold(Fe::ONE, |acc, p| f.mul(acc, f.pow(p.a, p.mult as i64).expect("unit")));
    let c = fs.iter().fold(Fe::ONE, |acc, p| f.mul(acc, f.pow(p.c, p.mult as i64).expect("unit")));
    let acn = f.mul(a, f.pow(c, n_pow as i64)?);

    let inner = col_theta[entries - 1].scale(f.inv(a)?, f).frob_twist(n_pow, f);
    let want_l = inner.scale(acn, f);
    let l_residual = last_x.truncate(target).residual_valuation(&want_l.truncate(target), f);

    let b = fs.iter().fold(PolyA::one(), |acc, p| acc.mul(&p.b.pow(p.mult as u64, f), f));
    let z = zeta_product(ctx, &fs, rel)?;
    let om_w = omega_at(f, 0, 0, q + rel + 1)?.pow(w, q * w + rel + 1, f)?;
    let period = z.mul(&om_w, f).mul(&USeries::from_poly(&b, f), f);
    let want_last = period.frob_twist(n_pow, f).scale(acn, f);
    let last_residual = last_x.truncate(target).residual_valuation(&want_last.truncate(target), f);

    let reached = last_x.prec() >= target && want_l.prec() >= target && want_last.prec() >= target;
    let pass = reached && nonzero_entries.is_empty() && l_residual >= target && last_residual >= target;
    Ok(SpecializationReport {
        label: label(&fs, f),
        n: n_pow,
        theta_digits,
        target,
        entries,
        nonzero_entries,
        l_residual,
        last_residual,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Fq;
    use crate::motive::matrices::MotiveParams;
    use crate::motive::THETA_DIGITS;

    fn ctx(p: u32, params: MotiveParams) -> MotiveContext {
        MotiveContext::for_all_signs(p, 1, params).unwrap()
    }

    #[test]
    fn permutation_signs() {
        let ps = permutations(3);
        assert_eq!(ps.len(), 6);
        assert_eq!(ps.iter().filter(|(_, odd)| *odd).count(), 3);
        assert!(ps.contains(&(vec![1, 0, 2], true)));
        assert!(ps.contains(&(vec![1, 2, 0], false)));
    }

    #[test]
    fn depth_one_difference_equation() {
        let c = ctx(3, MotiveParams { prec: 240, t_len: 12, d_max: 5 });
        let idx = Index::plain(&[1]).unwrap();
        let mm = c.build(&idx).unwrap();
        let rep = check_difference_eq(&c, &mm).unwrap();
        assert!(rep.pass, "{:?}", rep.worst);
        // Upper-triangular entries vanish identically.
        assert!(rep.entries.iter().filter(|e| e.col > e.row).all(|e| e.residual_valuation >= EXACT));
    }

    #[test]
    fn corrupted_h_fails_difference_equation() {
        let c = ctx(3, MotiveParams { prec: 120, t_len: 8, d_max: 5 });
        let fq = Fq::new(3, 1).unwrap();
        let idx = Index::parse("1,2;1,1", &fq).unwrap();
        let mm = c.build(&idx).unwrap();
        // Φ now sees a wrong H_1 while Ψ keeps the solved one.
        let f = c.field().clone();
        c.solver().insert(2, crate::motive::AtPoly::new(vec![PolyA::constant(f.from_fp(2))]));
        let rep = check_difference_eq(&c, &mm).unwrap();
        assert!(!rep.pass);
        // H_1 sits in row 2 of Φ, which meets columns 0 and 1 of Ψ.
        assert!(rep.failures().all(|e| e.row == 2 && e.col <= 1));
    }

    #[test]
    fn period_and_specialization_small() {
        let c = ctx(3, MotiveParams::default());
        let fq = Fq::new(3, 1).unwrap();
        for text in ["1;1", "1;2", "1,2;2,2", "2,1;1,2"] {
            let idx = Index::parse(text, &fq).unwrap();
            let rep = check_period(&c, &[(idx.clone(), 1)], THETA_DIGITS).unwrap();
            assert!(rep.pass, "{text}: {rep:?}");
            let sp = check_specialization(&c, &[(idx, 1)], 1, THETA_DIGITS).unwrap();
            assert!(sp.pass, "{text}: {sp:?}");
        }
    }

    #[test]
    fn kronecker_monomial() {
        let c = ctx(3, MotiveParams::default());
        let fq = Fq::new(3, 1).unwrap();
        let parts = vec![(Index::parse("1;2", &fq).unwrap(), 1), (Index::parse("2;2", &fq).unwrap(), 1)];
        let mm = c.kron_build(&parts).unwrap();
        assert_eq!(mm.dim(), 4);
        assert_eq!(mm.weight(), 3);
        let de = check_difference_eq(&c, &mm).unwrap();
        assert!(de.pass, "{:?}", de.worst);
        let pr = check_period(&c, &parts, THETA_DIGITS).unwrap();
        assert!(pr.pass, "{pr:?}");
        let sp = check_specialization(&c, &parts, 1, THETA_DIGITS).unwrap();
        assert!(sp.pass, "{sp:?}");
    }
}
