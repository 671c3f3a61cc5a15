//! The acceptance suite: thirteen identity- and property-based checks, each
//! reported as one pass/fail line. Shared by the `acceptance` test target and
//! the CLI `selftest` command.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chen::check_chen;
use crate::error::Result;
use crate::exec::Exec;
use crate::gf::{EpsMode, FieldSpec, Fq};
use crate::index::{enumerate_indices, random_index, Index};
use crate::motive::anderson_thakur::theta_degree_bound;
use crate::motive::{
    check_difference_eq, check_interpolation, check_period, check_specialization, MotiveContext,
    MotiveParams, THETA_DIGITS,
};
use crate::powersums::PowerSumEngine;
use crate::relations::RelationSearch;
use crate::shuffle::{verify_lincomb, LinComb, ShuffleEngine};

/// Absolute u-digits for the worked-example residuals (criteria 1, 2).
pub const EXAMPLE_DIGITS: i64 = 120;
/// Wall-clock limits.
pub const EXAMPLE_LIMIT: Duration = Duration::from_secs(10);
pub const RANDOM_LIMIT: Duration = Duration::from_secs(300);
pub const DIFFEQ_LIMIT: Duration = Duration::from_secs(300);
/// Random pairs per q in criterion 4.
pub const RANDOM_PAIRS: usize = 50;
/// Extra θ-digits beyond the largest leading valuation in the Chen oracle.
pub const CHEN_EXTRA_DIGITS: i64 = 40;
/// Relation search precision floor (u-digits) and θ-span in criterion 13.
pub const RELATION_PREC: i64 = 480;
pub const RELATION_THETA_SPAN: u32 = crate::relations::DEFAULT_THETA_SPAN;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<34} {:>8.2}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub seed: u64,
    pub exec: Exec,
}

impl Default for Config {
    fn default() -> Self {
        Config { seed: 20_240_601, exec: Exec::default() }
    }
}

pub const NAMES: [&str; 13] = [
    "worked example q=3",
    "worked example q=5",
    "appendix engine = general engine",
    "random sum-shuffle certification",
    "grading invariants",
    "Chen / partial-fraction oracles",
    "non-vanishing and degree decrease",
    "Anderson-Thakur interpolation",
    "difference equation and det",
    "period identity",
    "specialization at N=1",
    "Kronecker monomial",
    "relations soundness",
];

/// Runs criterion `id` (1-based).
pub fn run_one(id: u32, cfg: &Config) -> Outcome {
    let start = Instant::now();
    let res = match id {
        1 => c1_q3_example(),
        2 => c2_q5_example(),
        3 => c3_appendix(),
        4 => c4_random(cfg),
        5 => c5_grading(cfg),
        6 => c6_chen(cfg),
        7 => c7_nonvanishing(cfg),
        8 => c8_anderson_thakur(),
        9 => c9_difference_equation(cfg),
        10 => c10_period(cfg),
        11 => c11_specialization(cfg),
        12 => c12_kronecker(),
        13 => c13_relations(cfg),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(limit) = limit_for(id) {
        if elapsed > limit {
            pass = false;
            detail = format!("{detail}; over the {}s limit", limit.as_secs());
        }
    }
    Outcome {
        id,
        name: NAMES.get(id as usize - 1).copied().unwrap_or("?"),
        pass,
        detail,
        seconds: elapsed.as_secs_f64(),
    }
}

fn limit_for(id: u32) -> Option<Duration> {
    match id {
        1 | 2 => Some(EXAMPLE_LIMIT),
        4 => Some(RANDOM_LIMIT),
        9 => Some(DIFFEQ_LIMIT),
        _ => None,
    }
}

pub fn run_all(cfg: &Config) -> Vec<Outcome> {
    (1..=13).map(|id| run_one(id, cfg)).collect()
}

type Check = Result<(bool, String)>;

fn field_for(p: u32) -> Result<Arc<FieldSpec>> {
    let fq = Fq::new(p, 1)?;
    Ok(Arc::new(FieldSpec::for_signs(p, 1, &fq.signs())?))
}

fn shown(c: &LinComb, fq: &Fq) -> Vec<(String, u32)> {
    c.terms().map(|(i, c)| (i.format(fq, EpsMode::Residue), c)).collect()
}

fn example(p: u32, left: &str, right: &str, want: &[(&str, u32)]) -> Check {
    let f = field_for(p)?;
    let fq = f.fq().clone();
    let (a, b) = (Index::parse(left, &fq)?, Index::parse(right, &fq)?);
    let combo = ShuffleEngine::new(fq.clone()).zeta_product(&a, &b);
    let mut got = shown(&combo, &fq);
    let mut want: Vec<(String, u32)> = want.iter().map(|(s, c)| (s.to_string(), *c)).collect();
    got.sort();
    want.sort();
    let ps = PowerSumEngine::new(f, EXAMPLE_DIGITS);
    let v = verify_lincomb(&ps, &[(a, b)], &combo, None)?;
    let terms_ok = got == want;
    Ok((
        terms_ok && v.pass,
        format!(
            "{} terms{}; residual u^{} (need {})",
            got.len(),
            if terms_ok { " as expected" } else { " DIFFER" },
            v.residual_valuation,
            EXAMPLE_DIGITS
        ),
    ))
}

fn c1_q3_example() -> Check {
    example(
        3,
        "2;1",
        "1,2;2,2",
        &[("3,2;2,2", 1), ("1,2,2;2,2,1", 2), ("1,2,2;2,1,2", 1), ("1,4;2,2", 1), ("2,1,2;1,2,2", 1)],
    )
}

fn c2_q5_example() -> Check {
    example(5, "2;3", "3;1", &[("5;3", 1), ("2,3;3,1", 1), ("3,2;1,3", 1)])
}

fn indices_upto(w: u32, depth: usize, fq: &Fq) -> Vec<Index> {
    (1..=w).flat_map(|k| enumerate_indices(k, depth, fq)).collect()
}

/// All (depth 2, depth 1) pairs with total weight ≤ 6.
fn appendix_pairs(fq: &Fq) -> Vec<(Index, Index)> {
    let lefts: Vec<Index> = indices_upto(5, 2, fq).into_iter().filter(|i| i.depth() == 2).collect();
    let rights = indices_upto(4, 1, fq);
    let mut out = Vec::new();
    for a in &lefts {
        for b in rights.iter().filter(|b| a.weight() + b.weight() <= 6) {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

fn c3_appendix() -> Check {
    let mut total = 0;
    let mut bad = Vec::new();
    for p in [3u32, 5] {
        let fq = Fq::new(p, 1)?;
        let e = ShuffleEngine::new(fq.clone());
        for (a, b) in appendix_pairs(&fq) {
            total += 1;
            if e.appendix_2x1(&a, &b)? != e.zeta_product(&a, &b) {
                bad.push(format!("q={p} {}x{}", a.format(&fq, EpsMode::Residue), b.format(&fq, EpsMode::Residue)));
            }
        }
    }
    Ok((bad.is_empty(), format!("{}/{} pairs agree{}", total - bad.len(), total, first(&bad))))
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!("; first mismatch {s}")).unwrap_or_default()
}

/// Random pairs with total weight ≤ 7 and depth ≤ 3.
fn random_pairs(fq: &Fq, seed: u64, n: usize) -> Vec<(Index, Index)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fq.q() as u64);
    let mut out = Vec::new();
    while out.len() < n {
        let a = random_index(&mut rng, fq, 6, 3);
        let b = random_index(&mut rng, fq, 7 - a.weight().min(6), 3);
        if a.weight() + b.weight() <= 7 {
            out.push((a, b));
        }
    }
    out
}

fn c4_random(cfg: &Config) -> Check {
    let mut worst: Option<(i64, String)> = None;
    let mut failed = 0;
    let mut total = 0;
    for p in [3u32, 5] {
        let f = field_for(p)?;
        let fq = f.fq().clone();
        let q1 = p as i64 - 1;
        let pairs = random_pairs(&fq, cfg.seed, RANDOM_PAIRS);
        // Relative tolerance: 60 θ-digits past the product's leading term.
        let probe = PowerSumEngine::with_options(f.clone(), 64, crate::ring_a::budget_from_env(), cfg.exec);
        let mut leads = Vec::new();
        for (a, b) in &pairs {
            let lead = probe.nonvanishing_certificate(a)?.valuation + probe.nonvanishing_certificate(b)?.valuation;
            leads.push(lead);
        }
        let need = THETA_DIGITS * q1;
        let top = leads.iter().max().copied().unwrap_or(0) + need;
        let ps = PowerSumEngine::with_options(f.clone(), top, crate::ring_a::budget_from_env(), cfg.exec);
        let shuffle = ShuffleEngine::new(fq.clone());
        let results = cfg.exec.map(&pairs, |(a, b)| {
            let combo = shuffle.zeta_product(a, b);
            verify_lincomb(&ps, &[(a.clone(), b.clone())], &combo, None)
        });
        for ((res, lead), (a, b)) in results.into_iter().zip(&leads).zip(&pairs) {
            let v = res?;
            total += 1;
            let rel = v.residual_valuation.min(top) - lead;
            let label = format!("q={p} {}x{}", a.format(&fq, EpsMode::Residue), b.format(&fq, EpsMode::Residue));
            if rel < need {
                failed += 1;
            }
            let theta = rel / q1;
            if worst.as_ref().is_none_or(|(w, _)| theta < *w) {
                worst = Some((theta, label));
            }
        }
    }
    let (w, label) = worst.unwrap_or((0, String::new()));
    Ok((
        failed == 0,
        format!("{}/{} pairs certified; weakest {} θ-digits ({label})", total - failed, total, w.min(THETA_DIGITS)),
    ))
}

fn c5_grading(cfg: &Config) -> Check {
    let mut terms = 0usize;
    let mut combos = 0usize;
    let mut bad = Vec::new();
    for p in [3u32, 5] {
        let fq = Fq::new(p, 1)?;
        let e = ShuffleEngine::new(fq.clone());
        let mut pairs = appendix_pairs(&fq);
        pairs.extend(random_pairs(&fq, cfg.seed, RANDOM_PAIRS));
        let small = indices_upto(3, 3, &fq);
        for a in &small {
            for b in &small {
                pairs.push((a.clone(), b.clone()));
            }
        }
        for (a, b) in &pairs {
            let mut outs = vec![e.zeta_product(a, b), e.sd_product(a, b), e.sless_product(a, b)];
            if a.depth() == 2 && b.depth() == 1 {
                outs.push(e.appendix_2x1(a, b)?);
            }
            for c in outs {
                combos += 1;
                terms += c.len();
                if let Err(msg) = c.check_grading(a, b, &fq) {
                    bad.push(format!("q={p}: {msg}"));
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{terms} terms in {combos} combinations graded{}", first(&bad))))
}

fn c6_chen(cfg: &Config) -> Check {
    let mut total = 0;
    let mut bad = Vec::new();
    for p in [3u32, 5] {
        let f = Arc::new(FieldSpec::new(p, 1, 1)?);
        let e = PowerSumEngine::with_options(f, 64, crate::ring_a::budget_from_env(), cfg.exec);
        for c in check_chen(&e, 3, 8, CHEN_EXTRA_DIGITS)? {
            total += 1;
            if !c.pass {
                bad.push(format!("q={p} d={} s=({},{})", c.d, c.s1, c.s2));
            }
        }
    }
    Ok((bad.is_empty(), format!("{}/{} (d, s1, s2) cases exact{}", total - bad.len(), total, first(&bad))))
}

fn c7_nonvanishing(cfg: &Config) -> Check {
    let fq = Fq::new(3, 1)?;
    let f = Arc::new(FieldSpec::new(3, 1, 1)?);
    let probe = PowerSumEngine::with_options(f.clone(), 64, crate::ring_a::budget_from_env(), cfg.exec);
    let indices = indices_upto(6, 3, &fq);
    let certs = indices.iter().map(|i| probe.nonvanishing_certificate(i)).collect::<Result<Vec<_>>>()?;
    let top = certs.iter().map(|c| c.valuation).max().unwrap_or(0) + 16;
    let e = PowerSumEngine::with_options(f, top, crate::ring_a::budget_from_env(), cfg.exec);
    let vals = cfg.exec.map(&indices, |i| e.zeta_eval(i));
    let mut bad = Vec::new();
    for ((i, c), v) in indices.iter().zip(&certs).zip(vals) {
        if v?.value.valuation() != Some(c.valuation) {
            bad.push(i.format(&fq, EpsMode::Residue));
        }
    }
    let mut deg_bad = Vec::new();
    for k in 1..=6 {
        let mut prev = None;
        for d in 0..=5 {
            let v = probe.power_sum_valuation(d, k)?;
            if prev.is_some_and(|pv| v <= pv) {
                deg_bad.push(format!("S_{d}({k})"));
            }
            prev = Some(v);
        }
    }
    bad.extend(deg_bad);
    Ok((
        bad.is_empty(),
        format!("{} indices nonzero with certified leading term; degrees decrease for k<=6, d<=5{}", indices.len(), first(&bad)),
    ))
}

fn c8_anderson_thakur() -> Check {
    let mut checks = 0;
    let mut bad = Vec::new();
    for p in [3u32, 5] {
        let ctx = MotiveContext::for_all_signs(p, 1, MotiveParams::default())?;
        let solver = ctx.solver();
        for s in 1..=p + 1 {
            let h = solver.solve(s)?;
            if s <= p && !h.is_one() {
                bad.push(format!("q={p}: H_{} != 1", s - 1));
            }
            if h.deg_theta() > theta_degree_bound(s, p) {
                bad.push(format!("q={p}: deg H_{} = {} too large", s - 1, h.deg_theta()));
            }
            for d in 0..=3 {
                checks += 1;
                let c = check_interpolation(solver, s, d, THETA_DIGITS * (p as i64 - 1))?;
                if !c.pass {
                    bad.push(format!("q={p} s={s} d={d}: residual {} < {}", c.residual_valuation, c.target));
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{checks} interpolation checks at {THETA_DIGITS} θ-digits{}", first(&bad))))
}

/// Depth ≤ 2, weight ≤ 5, every sign.
fn motive_indices(fq: &Fq) -> Vec<Index> {
    indices_upto(5, 2, fq)
}

fn c9_difference_equation(cfg: &Config) -> Check {
    let mut total = 0;
    let mut bad = Vec::new();
    let mut weakest = i64::MAX;
    for p in [3u32, 5] {
        let ctx = MotiveContext::for_all_signs(p, 1, MotiveParams::default())?;
        let fq = ctx.field().fq().clone();
        let idx = motive_indices(&fq);
        let reports = cfg.exec.map(&idx, |i| ctx.build(i).and_then(|mm| check_difference_eq(&ctx, &mm)));
        for (i, r) in idx.iter().zip(reports) {
            let r = r?;
            total += 1;
            weakest = weakest.min(r.entries.iter().map(|e| e.required).min().unwrap_or(r.prec));
            if !r.pass {
                bad.push(format!("q={p} {}", i.format(&fq, EpsMode::Residue)));
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{}/{} indices satisfy Ψ = Φ^(1)Ψ^(1) to t^15 and det Ψ = Ω^Σd; every entry checked to >= {} u-digits{}",
            total - bad.len(),
            total,
            weakest,
            first(&bad)
        ),
    ))
}

fn c10_period(cfg: &Config) -> Check {
    let mut total = 0;
    let mut bad = Vec::new();
    for p in [3u32, 5] {
        let ctx = MotiveContext::for_all_signs(p, 1, MotiveParams::default())?;
        let fq = ctx.field().fq().clone();
        let idx = motive_indices(&fq);
        let reports = cfg.exec.map(&idx, |i| check_period(&ctx, &[(i.clone(), 1)], THETA_DIGITS));
        for (i, r) in idx.iter().zip(reports) {
            total += 1;
            if !r?.pass {
                bad.push(format!("q={p} {}", i.format(&fq, EpsMode::Residue)));
            }
        }
    }
    Ok((bad.is_empty(), format!("{}/{} indices match ζ to {THETA_DIGITS} θ-digits{}", total - bad.len(), total, first(&bad))))
}

fn c11_specialization(cfg: &Config) -> Check {
    let ctx = MotiveContext::for_all_signs(3, 1, MotiveParams::default())?;
    let fq = ctx.field().fq().clone();
    let idx = motive_indices(&fq);
    let reports = cfg.exec.map(&idx, |i| check_specialization(&ctx, &[(i.clone(), 1)], 1, THETA_DIGITS));
    let mut bad = Vec::new();
    for (i, r) in idx.iter().zip(reports) {
        if !r?.pass {
            bad.push(i.format(&fq, EpsMode::Residue));
        }
    }
    Ok((bad.is_empty(), format!("{}/{} indices, q=3, N=1{}", idx.len() - bad.len(), idx.len(), first(&bad))))
}

fn c12_kronecker() -> Check {
    let ctx = MotiveContext::for_all_signs(3, 1, MotiveParams::default())?;
    let fq = ctx.field().fq().clone();
    let mut bad = Vec::new();
    let mut n = 0;
    for e1 in fq.signs() {
        for e2 in fq.signs() {
            n += 1;
            let parts = vec![(Index::new(&[1], &[e1])?, 1), (Index::new(&[2], &[e2])?, 1)];
            let mm = ctx.kron_build(&parts)?;
            let de = check_difference_eq(&ctx, &mm)?;
            let pr = check_period(&ctx, &parts, THETA_DIGITS)?;
            let sp = check_specialization(&ctx, &parts, 1, THETA_DIGITS)?;
            if !(mm.dim() == 4 && mm.weight() == 3 && de.pass && pr.pass && sp.pass) {
                bad.push(mm.label(ctx.field(), EpsMode::Residue));
            }
        }
    }
    Ok((bad.is_empty(), format!("{}/{n} sign choices pass criteria 9-11 with w=3{}", n - bad.len(), first(&bad))))
}

fn c13_relations(cfg: &Config) -> Check {
    let fq = Fq::new(3, 1)?;
    let mut bad = Vec::new();
    let mut ids = 0;
    let mut tally = [0usize; 3];
    for w in 1..=4u32 {
        let r = RelationSearch::new(fq.clone(), w, w as usize, RELATION_PREC)
            .theta_span(RELATION_THETA_SPAN)
            .exec(cfg.exec)
            .run()?;
        ids += r.shuffle_identities;
        for rel in &r.relations {
            tally[rel.status as usize] += 1;
        }
        if !r.is_sound() {
            bad.push(format!("w={w}: {}/{} identities in kernel", r.shuffle_identities_in_kernel, r.shuffle_identities));
        }
    }
    // Planted x_0 + 2x_1 at weight 3 without θ-multiples: kernel grows by one.
    let base = RelationSearch::new(fq.clone(), 3, 3, RELATION_PREC).theta_span(0).products(false).exec(cfg.exec);
    let r0 = base.run()?;
    let r1 = RelationSearch::new(fq, 3, 3, RELATION_PREC)
        .theta_span(0)
        .products(false)
        .plant(0, 1, 2)
        .exec(cfg.exec)
        .run()?;
    let planted_ok = r1.relations.len() == r0.relations.len() + 1 && r1.relations.iter().any(|r| r.certified && r.stable);
    if !planted_ok {
        bad.push("planted dependency not recovered".into());
    }
    Ok((
        bad.is_empty(),
        format!(
            "w<=4, J={RELATION_THETA_SPAN}: {ids} shuffle identities in kernel; {} certified, {} numeric-only, {} artifacts; planted relation {}{}",
            tally[0],
            tally[1],
            tally[2],
            if planted_ok { "found" } else { "missing" },
            first(&bad)
        ),
    ))
}
