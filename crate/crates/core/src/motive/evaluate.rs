//! Values of L and of the first column of Ψ at t = θ^{q^N}.
//!
//! Evaluation goes block by block: (H Ω^s)^{(d)}(θ^{q^N}) is H^{(d)}(θ^{q^N}),
//! an exact polynomial, times Ω^{(d)}(θ^{q^N})^s, a convergent product of
//! scalars. The number of d-layers is picked from valuation bounds so that
//! the dropped part of L lies beyond the requested precision.

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};
use crate::index::{Index, Letter};
use crate::motive::matrices::{suffix_weights, MotiveContext};
use crate::motive::omega::{omega_at, qpow};
use crate::useries::{USeries, EXACT};

/// Deepest twist the evaluator will look at.
const MAX_LAYER: u32 = 40;

/// (H_{s−1} Ω^s)^{(d)} at t = θ^{q^N}, to absolute precision `prec`.
pub fn block_at(ctx: &MotiveContext, s: u32, d: u32, n_pow: u32, prec: i64) -> Result<USeries> {
    if n_pow > d {
        return Ok(USeries::zero());
    }
    let f = ctx.field();
    let q = f.q();
    let h = ctx.solver().solve(s)?.eval(d, n_pow, f);
    let hdeg = h.degree().unwrap_or(0) as i64;
    let Some(lead) = qpow(q, d + 1).and_then(|x| x.checked_mul(s as i64)) else {
        return Ok(USeries::zero_to(prec));
    };
    let q1 = q as i64 - 1;
    if lead - q1 * hdeg >= prec {
        return Ok(USeries::zero_to(prec));
    }
    let one = lead / s as i64;
    let p_w = prec - (lead - one) + q1 * hdeg;
    let w = omega_at(f, d, n_pow, p_w)?;
    Ok(w.pow(s as i64, p_w, f)?.mul(&USeries::from_poly(&h, f), f).truncate(prec))
}

/// Valuation lower bound of block_at(s, d, N); EXACT where it vanishes.
fn block_bound(ctx: &MotiveContext, s: u32, d: u32, n_pow: u32) -> Result<i64> {
    if n_pow > d {
        return Ok(EXACT);
    }
    let q = ctx.field().q();
    let h = ctx.solver().solve(s)?;
    let lead = qpow(q, d + 1).and_then(|x| x.checked_mul(s as i64));
    let hdeg = h.eval_degree(d, n_pow, q);
    Ok(match (lead, hdeg) {
        (Some(l), Some(hd)) => (l - (q as i64 - 1) * hd).min(EXACT),
        _ => EXACT,
    })
}

fn min_bound_from(ctx: &MotiveContext, s: u32, start: u32, n_pow: u32) -> Result<i64> {
    let mut m = EXACT;
    for d in start..=start + MAX_LAYER {
        m = m.min(block_bound(ctx, s, d, n_pow)?);
    }
    Ok(m)
}

/// L(letters) at t = θ^{q^N}.
pub fn l_at(ctx: &MotiveContext, letters: &[Letter], n_pow: u32, prec: i64) -> Result<USeries> {
    let f = ctx.field();
    let m = letters.len();
    if m == 0 {
        return Ok(USeries::one());
    }
    // Letter k sits at depth d_k ≥ (m − 1 − k), and only layers d ≥ N survive.
    let floor = |k: usize| ((m - 1 - k) as u32).max(n_pow);
    let mut rest = 0i64;
    let mut margin = 0i64;
    for (k, l) in letters.iter().enumerate() {
        let b = min_bound_from(ctx, l.s, floor(k), n_pow)?;
        margin += (-b).max(0);
        if k > 0 {
            rest = rest.saturating_add(b);
        }
    }
    let mut top = floor(0);
    loop {
        let tail = min_bound_from(ctx, letters[0].s, top + 1, n_pow)?.saturating_add(rest);
        if tail >= prec {
            break;
        }
        top += 1;
        if top > MAX_LAYER {
            return Err(Error::Precision(format!("L does not converge to u^{prec} within {MAX_LAYER} layers")));
        }
    }
    let p_v = prec + margin;
    let term = |l: &Letter, d: u32| -> Result<USeries> {
        let eps = f.pow(f.embed(l.eps), d as i64)?;
        Ok(block_at(ctx, l.s, d, n_pow, p_v)?.scale(eps, f))
    };
    let top = top as usize;
    let last = &letters[m - 1];
    let mut acc = vec![USeries::zero(); top + 2];
    for d in 1..=top + 1 {
        acc[d] = acc[d - 1].add(&term(last, (d - 1) as u32)?, f);
    }
    for l in letters[..m - 1].iter().rev() {
        let mut next = vec![USeries::zero(); top + 2];
        for d in 1..=top + 1 {
            let add = term(l, (d - 1) as u32)?.mul(&acc[d - 1], f);
            next[d] = next[d - 1].add(&add, f);
        }
        acc = next;
    }
    let out = acc[top + 1].truncate(prec);
    if out.prec() < prec {
        return Err(Error::Precision(format!("L reached u^{} of u^{prec}", out.prec())));
    }
    Ok(out)
}

/// First column of Ψ at t = θ^{q^N}: entry i is γ_1⋯γ_i L(s_1..s_i) Ω^{d_{i+1}}.
pub fn psi_column_at(ctx: &MotiveContext, index: &Index, n_pow: u32, prec: i64) -> Result<Vec<USeries>> {
    let f = ctx.field();
    let q = f.q() as i64;
    let letters = index.letters();
    let dsum = suffix_weights(index);
    let mut out = Vec::with_capacity(letters.len() + 1);
    let mut a = Fe::ONE;
    for i in 0..=letters.len() {
        if i > 0 {
            a = f.mul(a, f.gamma(letters[i - 1].eps)?);
        }
        let dk = dsum[i] as i64;
        // Ω vanishes at θ^{q^N} for N ≥ 1; omega_at reports it exactly.
        let om = omega_at(f, 0, n_pow, prec)?;
        if dk > 0 && om.is_exact() && om.is_zero() {
            out.push(USeries::zero());
            continue;
        }
        let l = l_at(ctx, &letters[..i], n_pow, prec - q * dk)?;
        let entry = if dk == 0 {
            l
        } else {
            let vl = l.val_bound().min(prec);
            let p_om = prec - vl - (dk - 1) * q;
            l.mul(&omega_at(f, 0, n_pow, p_om)?.pow(dk, p_om, f)?, f)
        };
        out.push(entry.scale(a, f).truncate(prec));
    }
    Ok(out)
}

pub fn kron_vec(a: &[USeries], b: &[USeries], f: &FieldSpec) -> Vec<USeries> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.mul(y, f))).collect()
}
