use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use amzv::acceptance::{self, Config};
use amzv::exec::Exec;
use amzv::gf::{EpsMode, FieldSpec, Fq};
use amzv::index::Index;
use amzv::motive::{
    check_difference_eq, check_period, check_specialization, MotiveContext, MotiveParams, THETA_DIGITS,
};
use amzv::powersums::{Level, PowerSumEngine};
use amzv::relations::RelationSearch;
use amzv::shuffle::{verify_lincomb, LinComb, ShuffleEngine};

#[derive(Parser)]
#[command(name = "amzv", version, about = "Alternating multizeta values over F_q[θ]")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Field size q = p^e.
    #[arg(long, global = true, default_value_t = 3)]
    q: u64,
    /// Tower degree M of the scalar field F_{q^M}.
    #[arg(long, global = true)]
    m: Option<u32>,
    /// Absolute precision in u-digits (u = 1/θ^{1/(q-1)}).
    #[arg(long, global = true, default_value_t = 120)]
    prec: i64,
    /// Number of t-coefficients kept for Ψ.
    #[arg(long, global = true, default_value_t = 16)]
    t: usize,
    /// L-series truncation: terms with d_1 <= D.
    #[arg(long, global = true, default_value_t = 5)]
    d: u32,
    /// Cap on q^d for monic enumeration.
    #[arg(long, global = true, env = "AMZV_BUDGET", default_value_t = amzv::ring_a::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, global = true, value_enum)]
    eps_mode: Option<EpsArg>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for the randomized acceptance pairs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Disable the rayon thread pool.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum EpsArg {
    Residue,
    Genexp,
}

#[derive(Copy, Clone, ValueEnum)]
enum LevelArg {
    Zeta,
    Sd,
    Sless,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ζ(s;ε) as a u-series.
    Eval {
        #[arg(long)]
        index: String,
    },
    /// Expand a product of two indices symbolically.
    Shuffle {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, value_enum, default_value = "zeta")]
        level: LevelArg,
    },
    /// Expand a product and check it numerically.
    VerifyShuffle {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, value_enum, default_value = "zeta")]
        level: LevelArg,
        /// Degree for the S_d and S_{<d} levels.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Power sum S_d(s), or S_d(s;ε) with --eps.
    Powersum {
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Difference equation, determinant and period checks; repeat --index
    /// for a Kronecker monomial.
    MotiveCheck {
        #[arg(long, required = true)]
        index: Vec<String>,
    },
    /// ψ(θ^{q^N}) specialization check.
    MotiveSpecialize {
        #[arg(long, required = true)]
        index: Vec<String>,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Kernel search for F_p-linear relations at one weight.
    Relations {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = amzv::relations::DEFAULT_THETA_SPAN)]
        theta_span: u32,
    },
    /// Run the acceptance suite; pass criterion numbers to run a subset.
    Selftest { ids: Vec<u32> },
}

enum Failure {
    Usage(String),
    Check(Vec<Value>),
    Compute(amzv::Error),
}

impl From<amzv::Error> for Failure {
    fn from(e: amzv::Error) -> Self {
        Failure::Compute(e)
    }
}

type Out = Result<Vec<Value>, Failure>;

struct Ctx {
    run: RunArgs,
    fq: Fq,
    mode: EpsMode,
    exec: Exec,
}

impl Ctx {
    fn new(run: RunArgs) -> Result<Self, Failure> {
        if run.prec < 8 {
            return Err(Failure::Usage(format!("--prec must be at least 8, got {}", run.prec)));
        }
        let fq = Fq::from_q(run.q).map_err(|e| Failure::Usage(e.to_string()))?;
        let mode = match run.eps_mode {
            Some(EpsArg::Residue) if fq.e() > 1 => {
                return Err(Failure::Usage(format!("residue eps mode needs prime q, got q = {}", run.q)))
            }
            Some(EpsArg::Residue) => EpsMode::Residue,
            Some(EpsArg::Genexp) => EpsMode::GenExp,
            None if fq.e() > 1 => EpsMode::GenExp,
            None => EpsMode::Residue,
        };
        let exec = if run.sequential { Exec::Sequential } else { Exec::Parallel };
        Ok(Ctx { run, fq, mode, exec })
    }

    fn index(&self, text: &str) -> Result<Index, Failure> {
        Index::parse(text, &self.fq).map_err(|e| Failure::Usage(format!("{text:?}: {e}")))
    }

    fn show(&self, i: &Index) -> String {
        i.format(&self.fq, self.mode)
    }

    /// F_{q^M} with M from --m, else M = 1 (enough for power sums and ζ).
    fn field(&self) -> Result<Arc<FieldSpec>, Failure> {
        let m = self.run.m.unwrap_or(1);
        FieldSpec::new(self.fq.p(), self.fq.e(), m).map(Arc::new).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn engine(&self, f: Arc<FieldSpec>) -> PowerSumEngine {
        PowerSumEngine::with_options(f, self.run.prec, self.run.budget, self.exec)
    }

    fn motive(&self) -> Result<MotiveContext, Failure> {
        let params = MotiveParams { prec: self.run.prec, t_len: self.run.t, d_max: self.run.d };
        let ctx = match self.run.m {
            Some(m) => {
                let f = FieldSpec::new(self.fq.p(), self.fq.e(), m).map_err(|e| Failure::Usage(e.to_string()))?;
                MotiveContext::new(Arc::new(f), params)
            }
            None => MotiveContext::for_all_signs(self.fq.p(), self.fq.e(), params)
                .map_err(|e| Failure::Usage(e.to_string()))?,
        };
        Ok(ctx)
    }

    fn parts(&self, texts: &[String]) -> Result<Vec<(Index, u32)>, Failure> {
        let mut parts: Vec<(Index, u32)> = Vec::new();
        for t in texts {
            let idx = self.index(t)?;
            match parts.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, m)) => *m += 1,
                None => parts.push((idx, 1)),
            }
        }
        Ok(parts)
    }
}

fn with_field(f: &FieldSpec, mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("field".into(), serde_json::to_value(f.meta()).expect("field metadata"));
    }
    v
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn level_of(l: LevelArg) -> Level {
    match l {
        LevelArg::Zeta => Level::Zeta,
        LevelArg::Sd => Level::Sd,
        LevelArg::Sless => Level::Sless,
    }
}

fn product(engine: &ShuffleEngine, level: Level, a: &Index, b: &Index) -> LinComb {
    match level {
        Level::Zeta => engine.zeta_product(a, b),
        Level::Sd => engine.sd_product(a, b),
        Level::Sless => engine.sless_product(a, b),
    }
}

fn eval(cx: &Ctx, text: &str) -> Out {
    let idx = cx.index(text)?;
    let f = cx.field()?;
    let e = cx.engine(f.clone());
    let z = e.zeta_eval(&idx)?;
    let cert = e.nonvanishing_certificate(&idx)?;
    Ok(vec![with_field(
        &f,
        json!({
            "index": idx.to_json(&cx.fq, cx.mode),
            "label": cx.show(&idx),
            "value": z.value.to_json(&f),
            "d_max_used": z.d_max_used,
            "tail_valuation_bound": z.tail_valuation_bound,
            "certificate": {
                "valuation": cert.valuation,
                "theta_degree": cert.theta_degree.to_string(),
            },
        }),
    )])
}

fn shuffle(cx: &Ctx, left: &str, right: &str, level: LevelArg) -> Out {
    let (a, b) = (cx.index(left)?, cx.index(right)?);
    let f = cx.field()?;
    let engine = ShuffleEngine::new(cx.fq.clone());
    let level = level_of(level);
    let general = product(&engine, level, &a, &b);
    let (combo, engine_name, cross) = if level == Level::Zeta && a.depth() == 2 && b.depth() == 1 {
        let app = engine.appendix_2x1(&a, &b)?;
        let agree = app == general;
        (app, "appendix_2x1", Some(agree))
    } else {
        (general.clone(), "general", None)
    };
    let grading = combo.check_grading(&a, &b, &cx.fq);
    let mut out = json!({
        "left": cx.show(&a),
        "right": cx.show(&b),
        "engine": engine_name,
        "lincomb": combo.to_json(&cx.fq, cx.mode),
        "grading": grading.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.clone()),
    });
    if let Some(agree) = cross {
        out["cross_check"] = json!(if agree { "agree" } else { "MISMATCH" });
        if !agree {
            out["general"] = to_json(&general.to_json(&cx.fq, cx.mode));
        }
    }
    let out = with_field(&f, out);
    if cross == Some(false) || grading.is_err() {
        return Err(Failure::Check(vec![out]));
    }
    Ok(vec![out])
}

fn verify_shuffle(cx: &Ctx, left: &str, right: &str, level: LevelArg, degree: Option<u32>) -> Out {
    let (a, b) = (cx.index(left)?, cx.index(right)?);
    let level = level_of(level);
    if level != Level::Zeta && degree.is_none() {
        return Err(Failure::Usage("--degree is required for the sd and sless levels".into()));
    }
    let f = cx.field()?;
    let combo = product(&ShuffleEngine::new(cx.fq.clone()), level, &a, &b);
    let v = verify_lincomb(&cx.engine(f.clone()), &[(a.clone(), b.clone())], &combo, degree)?;
    let out = with_field(
        &f,
        json!({
            "result": if v.pass { "PASS" } else { "FAIL" },
            "left": cx.show(&a),
            "right": cx.show(&b),
            "lincomb": combo.to_json(&cx.fq, cx.mode),
            "residual_valuation": v.residual_valuation,
            "prec": v.prec,
        }),
    );
    if v.pass {
        Ok(vec![out])
    } else {
        Err(Failure::Check(vec![out]))
    }
}

fn powersum(cx: &Ctx, degree: u32, s: u32, eps: Option<&str>) -> Out {
    let f = cx.field()?;
    let e = cx.engine(f.clone());
    let (value, sign) = match eps {
        Some(t) => {
            let sign = cx.fq.parse_sign(t).map_err(|e| Failure::Usage(e.to_string()))?;
            (e.alt_power_sum(degree, s, sign)?, Some(cx.fq.format_sign(sign, cx.mode)))
        }
        None => ((*e.power_sum(degree, s)?).clone(), None),
    };
    Ok(vec![with_field(
        &f,
        json!({ "degree": degree, "s": s, "eps": sign, "value": value.to_json(&f) }),
    )])
}

fn motive_check(cx: &Ctx, texts: &[String]) -> Out {
    let ctx = cx.motive()?;
    let parts = cx.parts(texts)?;
    let mm = if parts.len() == 1 && parts[0].1 == 1 { ctx.build(&parts[0].0)? } else { ctx.kron_build(&parts)? };
    let de = check_difference_eq(&ctx, &mm)?;
    let per = check_period(&ctx, &parts, THETA_DIGITS)?;
    let pass = de.pass && per.pass;
    let out = with_field(
        ctx.field(),
        json!({
            "label": mm.label(ctx.field(), cx.mode),
            "dim": mm.dim(),
            "weight": mm.weight(),
            "pass": pass,
            "difference_equation": to_json(&de),
            "period": to_json(&per),
        }),
    );
    if pass {
        Ok(vec![out])
    } else {
        Err(Failure::Check(vec![out]))
    }
}

fn motive_specialize(cx: &Ctx, texts: &[String], n: u32) -> Out {
    let ctx = cx.motive()?;
    let parts = cx.parts(texts)?;
    let r = check_specialization(&ctx, &parts, n, THETA_DIGITS)?;
    let pass = r.pass;
    let out = with_field(ctx.field(), to_json(&r));
    if pass {
        Ok(vec![out])
    } else {
        Err(Failure::Check(vec![out]))
    }
}

/// One header line, then one line per kernel vector.
fn relations(cx: &Ctx, weight: u32, max_depth: Option<usize>, theta_span: u32) -> Out {
    if weight == 0 {
        return Err(Failure::Usage("--weight must be at least 1".into()));
    }
    let f = cx.field()?;
    let r = RelationSearch::new(cx.fq.clone(), weight, max_depth.unwrap_or(weight as usize), cx.run.prec)
        .theta_span(theta_span)
        .budget(cx.run.budget)
        .exec(cx.exec)
        .run()?;
    let mut header = to_json(&r);
    let rels = header.as_object_mut().and_then(|m| m.remove("relations"));
    header["sound"] = json!(r.is_sound());
    let mut lines = vec![with_field(&f, header)];
    for rel in rels.and_then(|v| v.as_array().cloned()).unwrap_or_default() {
        lines.push(with_field(&f, json!({ "relation": rel })));
    }
    if r.is_sound() {
        Ok(lines)
    } else {
        Err(Failure::Check(lines))
    }
}

fn selftest(cx: &Ctx, ids: &[u32]) -> Out {
    let mut cfg = Config { exec: cx.exec, ..Config::default() };
    if let Some(seed) = cx.run.seed {
        cfg.seed = seed;
    }
    let ids: Vec<u32> = if ids.is_empty() { (1..=13).collect() } else { ids.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=13).contains(&i)) {
        return Err(Failure::Usage(format!("no acceptance criterion {bad}")));
    }
    let outcomes: Vec<_> = ids.iter().map(|&id| acceptance::run_one(id, &cfg)).collect();
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let f = cx.field()?;
    let mut lines: Vec<Value> = outcomes.iter().map(|o| with_field(&f, to_json(o))).collect();
    lines.push(with_field(&f, json!({ "seed": cfg.seed, "pass": pass })));
    if pass {
        Ok(lines)
    } else {
        Err(Failure::Check(lines))
    }
}

fn dispatch(cx: &Ctx, cmd: &Command) -> Out {
    match cmd {
        Command::Eval { index } => eval(cx, index),
        Command::Shuffle { left, right, level } => shuffle(cx, left, right, *level),
        Command::VerifyShuffle { left, right, level, degree } => verify_shuffle(cx, left, right, *level, *degree),
        Command::Powersum { degree, s, eps } => powersum(cx, *degree, *s, eps.as_deref()),
        Command::MotiveCheck { index } => motive_check(cx, index),
        Command::MotiveSpecialize { index, n } => motive_specialize(cx, index, *n),
        Command::Relations { weight, max_depth, theta_span } => relations(cx, *weight, *max_depth, *theta_span),
        Command::Selftest { ids } => selftest(cx, ids),
    }
}

fn emit(lines: &[Value], path: Option<&PathBuf>) -> std::io::Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&serde_json::to_string(l).expect("json"));
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    let output = cli.run.output.clone();
    let result = Ctx::new(cli.run).and_then(|cx| dispatch(&cx, &cli.cmd));
    let (lines, code) = match result {
        Ok(lines) => (lines, 0),
        Err(Failure::Check(lines)) => (lines, 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", error_json("usage", &msg));
            return ExitCode::from(2);
        }
        Err(Failure::Compute(e)) => {
            eprintln!("{}", error_json("compute", &e.to_string()));
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&lines, output.as_ref()) {
        eprintln!("{}", error_json("io", &e.to_string()));
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
