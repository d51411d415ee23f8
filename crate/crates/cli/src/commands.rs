//! Subcommands. Every command produces a [`RunReport`]; failures to read
//! or validate input become ERROR reports rather than panics.

use crate::report::{inputs_digest, RunReport, Status};
use crate::suite::{self, SuiteOptions};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;
use syz_core::ainfty::{bar_check, first_relation_failure, morphism_defect, pre_category_check, PreCategoryReport};
use syz_core::corpus::{random_dga, random_retraction};
use syz_core::fukaya_oh::{fo_category, mk_vanishing_certificate, AffineLagrangian};
use syz_core::mirror::{compare_tables, functor_on_objects, mirror_tables, theta_basis};
use syz_core::monge::{
    hessian_duality_check, involution_error, legendre, ma_residual, ConvexGridFunction, GridBox,
};
use syz_core::morse::{critical_points, morse_category, morse_category_weighted, morse_differential, TrigPolynomial};
use syz_core::rational::{fmt_q, parse_q, q_from_json, Q};
use syz_core::transfer::{transfer_morphism, transfer_structure, RetractionData};
use syz_core::{AInftyStructure, QMatrix, Scalar};

#[derive(Parser, Debug)]
#[command(name = "syz", version, about = "Exact A-infinity, Fukaya-Oh and theta-function computations")]
pub struct Cli {
    /// Novikov truncation Λ (rational, e.g. 25 or 7/2).
    #[arg(long, global = true)]
    pub cutoff: Option<String>,
    /// Highest arity to check.
    #[arg(long, global = true)]
    pub max_arity: Option<usize>,
    /// Seed for every randomized input.
    #[arg(long, global = true, default_value_t = suite::DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Include wall-clock timings (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the A∞ relations of a structure given as JSON.
    CheckAinfty { file: PathBuf },
    /// Transfer a structure along a retraction; without FILE a seeded random
    /// dg-algebra and retraction are used.
    Transfer { file: Option<PathBuf> },
    /// Morse complexes of trigonometric polynomials on the circle.
    Morse {
        #[command(subcommand)]
        cmd: MorseCmd,
    },
    /// Affine Lagrangian sections of the torus fibration.
    Fo {
        #[command(subcommand)]
        cmd: FoCmd,
    },
    /// Fukaya-Oh products against theta functions.
    Mirror {
        #[command(subcommand)]
        cmd: MirrorCmd,
    },
    /// Discrete Legendre transform and Monge-Ampère checks.
    Legendre(LegendreArgs),
    /// Run the acceptance matrix.
    Suite(SuiteArgs),
}

#[derive(Subcommand, Debug)]
pub enum MorseCmd {
    /// Critical points of each function in FILE.
    Crit { file: PathBuf },
    /// Morse differential and cohomology of every pair fi − fj, i < j.
    Diff { file: PathBuf },
    /// m2 of the first three functions, with the Leibniz check.
    M2 { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum FoCmd {
    /// m2 tables of a sequence of affine Lagrangians, with associativity.
    M2 { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum MirrorCmd {
    /// Compare rescaled m2 against theta multiplication.
    Compare(CompareArgs),
    /// Theta basis of the line bundle of one Lagrangian.
    Theta(ThetaArgs),
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Comma-separated integer slopes (one-dimensional case).
    #[arg(long)]
    pub slopes: Option<String>,
    /// Comma-separated rational shifts.
    #[arg(long)]
    pub shifts: Option<String>,
    /// Comma-separated nonzero rational holonomies.
    #[arg(long)]
    pub holonomies: Option<String>,
    /// JSON file `{"objects": [L0, L1, L2]}` for any dimension.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Perturb one theta structure constant before comparing.
    #[arg(long)]
    pub perturb: bool,
}

#[derive(Args, Debug)]
pub struct ThetaArgs {
    #[arg(long)]
    pub slope: Option<i64>,
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long)]
    pub holonomy: Option<String>,
    /// JSON file holding one Lagrangian.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LegendreArgs {
    /// Built-in family: quadratic, quartic or monge-ampere.
    #[arg(long)]
    pub family: Option<String>,
    /// Grid spacing 1/N for the built-in family.
    #[arg(long, default_value_t = 16)]
    pub steps: i64,
    /// JSON file `{"grid": {lo, hi, h}, "values": [...], "dual": {lo, hi, h}, "back": {...}?}`.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// Comma-separated criteria (numbers or names); default all.
    #[arg(long)]
    pub only: Option<String>,
    /// Run one criterion with a deliberately broken ingredient.
    #[arg(long)]
    pub fault: Option<String>,
}

const DEFAULT_CUTOFF: i64 = 10;

struct Ctx<'a> {
    cli: &'a Cli,
    digest_parts: Vec<Vec<u8>>,
}

impl Ctx<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<Value> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let v = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        self.digest_parts.push(bytes);
        Ok(v)
    }

    fn note(&mut self, what: &str, value: impl std::fmt::Display) {
        self.digest_parts.push(format!("{what}={value}").into_bytes());
    }

    fn cutoff(&mut self) -> Result<Q> {
        let c = match &self.cli.cutoff {
            Some(s) => parse_q(s).ok_or_else(|| anyhow!("bad cutoff {s:?}"))?,
            None => Q::from_integer(DEFAULT_CUTOFF.into()),
        };
        self.note("cutoff", fmt_q(&c));
        Ok(c)
    }

    fn max_arity(&mut self, default: usize) -> usize {
        let n = self.cli.max_arity.unwrap_or(default);
        self.note("max_arity", n);
        n
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::CheckAinfty { .. } => "check-ainfty".into(),
        Command::Transfer { .. } => "transfer".into(),
        Command::Morse { cmd } => match cmd {
            MorseCmd::Crit { .. } => "morse crit".into(),
            MorseCmd::Diff { .. } => "morse diff".into(),
            MorseCmd::M2 { .. } => "morse m2".into(),
        },
        Command::Fo { .. } => "fo m2".into(),
        Command::Mirror { cmd } => match cmd {
            MirrorCmd::Compare(_) => "mirror compare".into(),
            MirrorCmd::Theta(_) => "mirror theta".into(),
        },
        Command::Legendre(_) => "legendre".into(),
        Command::Suite(_) => "suite".into(),
    }
}

/// Runs one command to a report. Input errors give status ERROR with the
/// message as payload.
pub fn execute(cli: &Cli) -> RunReport {
    let start = Instant::now();
    let name = command_name(&cli.command);
    let mut ctx = Ctx { cli, digest_parts: vec![name.clone().into_bytes()] };
    let (status, payload) = match dispatch(&mut ctx) {
        Ok(r) => r,
        Err(e) => (Status::Error, json!({ "error": format!("{e:#}") })),
    };
    let parts: Vec<&[u8]> = ctx.digest_parts.iter().map(Vec::as_slice).collect();
    RunReport {
        command: name,
        inputs_digest: inputs_digest(&parts),
        status,
        payload,
        timing: cli.timing.then(|| start.elapsed()),
    }
}

fn dispatch(ctx: &mut Ctx) -> Result<(Status, Value)> {
    match &ctx.cli.command {
        Command::CheckAinfty { file } => check_ainfty(ctx, file),
        Command::Transfer { file } => transfer(ctx, file.as_ref()),
        Command::Morse { cmd } => match cmd {
            MorseCmd::Crit { file } => morse_crit(ctx, file),
            MorseCmd::Diff { file } => morse_diff(ctx, file),
            MorseCmd::M2 { file } => morse_m2(ctx, file),
        },
        Command::Fo { cmd: FoCmd::M2 { file } } => fo_m2(ctx, file),
        Command::Mirror { cmd } => match cmd {
            MirrorCmd::Compare(a) => mirror_compare(ctx, a),
            MirrorCmd::Theta(a) => mirror_theta(ctx, a),
        },
        Command::Legendre(a) => legendre_cmd(ctx, a),
        Command::Suite(a) => suite_cmd(ctx, a),
    }
}

fn relation_report(s: &AInftyStructure<Q>, max_arity: usize) -> (bool, Value) {
    let failure = first_relation_failure(s, max_arity);
    let bar = bar_check(s, max_arity.min(4));
    let loc = failure.as_ref().map(|(n, ins, out, c)| json!({"arity": n, "inputs": ins, "output": out, "value": c.to_json()}));
    (
        failure.is_none(),
        json!({
            "max_arity": max_arity,
            "first_failure": loc,
            "bar_check": {"max_word": bar.max_word, "words_checked": bar.words_checked, "first_failure": bar.first_failure},
        }),
    )
}

fn check_ainfty(ctx: &mut Ctx, file: &PathBuf) -> Result<(Status, Value)> {
    let v = ctx.read(file)?;
    let max_arity = ctx.max_arity(4);
    let s = AInftyStructure::<Q>::from_json(&v)?;
    let (ok, rep) = relation_report(&s, max_arity);
    Ok((Status::from_bool(ok), rep))
}

fn transfer(ctx: &mut Ctx, file: Option<&PathBuf>) -> Result<(Status, Value)> {
    let r: RetractionData<Q> = match file {
        Some(f) => {
            let v = ctx.read(f)?;
            let ambient = AInftyStructure::from_json(v.get("ambient").ok_or_else(|| anyhow!("missing \"ambient\""))?)?;
            RetractionData::from_json(ambient, v.get("retraction").ok_or_else(|| anyhow!("missing \"retraction\""))?)?
        }
        None => {
            let seed = ctx.cli.seed;
            ctx.note("seed", seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_dga(&mut rng, suite::TRANSFER_MAX_DIM);
            let extra = rng.gen_bool(0.25);
            random_retraction(&a, &mut rng, extra)
        }
    };
    let max_arity = ctx.max_arity(4);
    let check = r.validate();
    if !check.is_valid() {
        let fails: Vec<Value> = check.failures.iter().map(|(w, a, b, c)| json!([w, a, b, c])).collect();
        return Ok((Status::Fail, json!({ "retraction_failures": fails })));
    }
    let b = transfer_structure(&r, max_arity)?;
    let f = transfer_morphism(&r, max_arity)?;
    let (rel_ok, rel) = relation_report(&b, max_arity);
    let morph = (1..=max_arity).find_map(|n| {
        morphism_defect(&f, n).first_entry().map(|(ins, out, c)| json!({"arity": n, "inputs": ins, "output": out, "value": c.to_json()}))
    });
    let ok = rel_ok && morph.is_none();
    let mut payload = json!({
        "structure": b.to_json(),
        "relations": rel,
        "morphism_first_failure": morph,
    });
    if file.is_none() {
        payload["input"] = json!({"ambient": r.ambient.to_json(), "retraction": r.to_json()});
    }
    Ok((Status::from_bool(ok), payload))
}

fn functions(v: &Value) -> Result<Vec<TrigPolynomial>> {
    let arr = v.get("functions").and_then(Value::as_array).ok_or_else(|| anyhow!("expected {{\"functions\": [...]}}"))?;
    arr.iter().map(|f| Ok(TrigPolynomial::from_json(f)?)).collect()
}

fn morse_crit(ctx: &mut Ctx, file: &PathBuf) -> Result<(Status, Value)> {
    let fs = functions(&ctx.read(file)?)?;
    let mut out = Vec::new();
    for f in &fs {
        out.push(json!({"function": f.to_string(), "critical_points": critical_points(f)?.to_json()}));
    }
    Ok((Status::Pass, Value::Array(out)))
}

fn morse_diff(ctx: &mut Ctx, file: &PathBuf) -> Result<(Status, Value)> {
    let fs = functions(&ctx.read(file)?)?;
    if fs.len() < 2 {
        bail!("need at least two functions");
    }
    let mut ok = true;
    let mut out = Vec::new();
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let d = morse_differential(&fs[i], &fs[j])?;
            let (h0, h1) = suite::morse_cohomology(&fs[i], &fs[j]).map_err(|e| anyhow!(e))?;
            ok &= (h0, h1) == (1, 1);
            out.push(json!({"pair": [i, j], "differential": d.entries_json(), "cohomology": [h0, h1]}));
        }
    }
    Ok((Status::from_bool(ok), Value::Array(out)))
}

fn category_json(rep: &PreCategoryReport) -> Value {
    json!({
        "sequences_checked": rep.sequences_checked,
        "closure_violations": rep.closure_violations,
        "defects": rep.defects.iter().map(|d| json!({
            "sequence": d.sequence, "arity": d.arity, "inputs": d.inputs, "output": d.output, "value": d.value,
        })).collect::<Vec<_>>(),
    })
}

fn morse_m2(ctx: &mut Ctx, file: &PathBuf) -> Result<(Status, Value)> {
    let fs = functions(&ctx.read(file)?)?;
    if fs.len() < 3 {
        bail!("need three functions");
    }
    let fs = &fs[..3];
    let mc = morse_category(fs)?;
    let rep = pre_category_check(&mc.category, 3)?;
    let mut payload = json!({"m2": mc.m2().entries_json(), "relations": category_json(&rep)});
    if ctx.cli.cutoff.is_some() {
        let cutoff = ctx.cutoff()?;
        payload["m2_weighted"] = morse_category_weighted(fs, &cutoff)?.m2().entries_json();
    }
    Ok((Status::from_bool(rep.passed()), payload))
}

fn lagrangians(v: &Value) -> Result<Vec<AffineLagrangian>> {
    let arr = v.get("objects").and_then(Value::as_array).ok_or_else(|| anyhow!("expected {{\"objects\": [...]}}"))?;
    arr.iter().map(|o| Ok(AffineLagrangian::from_json(o)?)).collect()
}

fn fo_m2(ctx: &mut Ctx, file: &PathBuf) -> Result<(Status, Value)> {
    let ls = lagrangians(&ctx.read(file)?)?;
    let cutoff = ctx.cutoff()?;
    let max_arity = ctx.max_arity(3);
    let cat = fo_category(&ls, &cutoff)?;
    let rep = pre_category_check(&cat.category, max_arity)?;
    let certs: Vec<Value> = (3..ls.len())
        .map(|k| match mk_vanishing_certificate(&ls, k) {
            Ok(c) => c.to_json(),
            Err(e) => json!({"k": k, "certified": false, "reason": e.to_string()}),
        })
        .collect();
    Ok((
        Status::from_bool(rep.passed()),
        json!({"category": cat.to_json(), "relations": category_json(&rep), "vanishing": certs}),
    ))
}

fn parse_list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(|x| parse_q(x.trim()).ok_or_else(|| anyhow!("bad rational {x:?}"))).collect()
}

fn mirror_compare(ctx: &mut Ctx, a: &CompareArgs) -> Result<(Status, Value)> {
    let ls = match (&a.file, &a.slopes) {
        (Some(f), _) => lagrangians(&ctx.read(f)?)?,
        (None, Some(sl)) => {
            ctx.note("slopes", sl);
            let slopes = parse_list(sl)?;
            let shifts = match &a.shifts {
                Some(s) => {
                    ctx.note("shifts", s);
                    parse_list(s)?
                }
                None => vec![Q::from_integer(0.into()); slopes.len()],
            };
            let hol = match &a.holonomies {
                Some(s) => {
                    ctx.note("holonomies", s);
                    parse_list(s)?
                }
                None => vec![Q::from_integer(1.into()); slopes.len()],
            };
            if shifts.len() != slopes.len() || hol.len() != slopes.len() {
                bail!("slopes, shifts and holonomies must have equal length");
            }
            slopes
                .iter()
                .zip(&shifts)
                .zip(&hol)
                .map(|((s, b), u)| {
                    if !s.is_integer() {
                        bail!("slope {} is not an integer", fmt_q(s));
                    }
                    Ok(AffineLagrangian::new(QMatrix::from_rows(vec![vec![s.clone()]]), vec![b.clone()], vec![u.clone()])?)
                })
                .collect::<Result<_>>()?
        }
        (None, None) => bail!("give --slopes or --file"),
    };
    if ls.len() != 3 {
        bail!("need exactly three Lagrangians, got {}", ls.len());
    }
    let cutoff = ctx.cutoff()?;
    ctx.note("perturb", a.perturb);
    let mut t = mirror_tables([&ls[0], &ls[1], &ls[2]], &cutoff)?;
    if a.perturb {
        suite::perturb_theta(&mut t);
    }
    let r = compare_tables(&t);
    Ok((Status::from_bool(r.equal()), r.to_json()))
}

fn mirror_theta(ctx: &mut Ctx, a: &ThetaArgs) -> Result<(Status, Value)> {
    let l = match (&a.file, a.slope) {
        (Some(f), _) => AffineLagrangian::from_json(&ctx.read(f)?)?,
        (None, Some(s)) => {
            let b = a.shift.as_deref().map(parse_q).unwrap_or(Some(Q::from_integer(0.into()))).ok_or_else(|| anyhow!("bad shift"))?;
            let u = a.holonomy.as_deref().map(parse_q).unwrap_or(Some(Q::from_integer(1.into()))).ok_or_else(|| anyhow!("bad holonomy"))?;
            ctx.note("line", format!("{s} {} {}", fmt_q(&b), fmt_q(&u)));
            AffineLagrangian::line(s, b, u)?
        }
        (None, None) => bail!("give --slope or --file"),
    };
    let cutoff = ctx.cutoff()?;
    let e = functor_on_objects(&l)?;
    let basis = theta_basis(&e, &cutoff)?;
    Ok((Status::Pass, json!({"bundle": l.to_json(), "theta": basis.to_json()})))
}

fn grid_from_json(v: &Value) -> Result<GridBox> {
    let list = |k: &str| -> Result<Vec<Q>> {
        v.get(k)
            .and_then(Value::as_array)
            .ok_or_else(|| anyhow!("grid needs {k}"))?
            .iter()
            .map(|x| q_from_json(x).ok_or_else(|| anyhow!("bad rational in {k}")))
            .collect()
    };
    let h = v.get("h").and_then(q_from_json).ok_or_else(|| anyhow!("grid needs h"))?;
    Ok(GridBox::new(list("lo")?, list("hi")?, h)?)
}

fn legendre_cmd(ctx: &mut Ctx, a: &LegendreArgs) -> Result<(Status, Value)> {
    if let Some(fam) = &a.family {
        ctx.note("family", fam);
        ctx.note("steps", a.steps);
        let (ok, row) = suite::legendre_at(fam, a.steps).map_err(|e| anyhow!(e))?;
        return Ok((Status::from_bool(ok), row));
    }
    let Some(file) = &a.file else {
        bail!("give --family ({}) or --file", suite::family_names().join(", "));
    };
    let v = ctx.read(file)?;
    let grid = grid_from_json(v.get("grid").ok_or_else(|| anyhow!("missing grid"))?)?;
    let values: Vec<f64> = v
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("missing values"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| anyhow!("values must be numbers")))
        .collect::<Result<_>>()?;
    let dual = grid_from_json(v.get("dual").ok_or_else(|| anyhow!("missing dual"))?)?;
    let k = ConvexGridFunction::from_values(grid, values)?;
    let kh = legendre(&k, &dual)?;
    let mut payload = json!({
        "conjugate": kh.to_json(),
        "ma_residual": ma_residual(&k),
        "dual_ma_residual": ma_residual(&kh),
        "duality": hessian_duality_check(&k, &kh).map(|r| r.to_json()).unwrap_or(Value::Null),
    });
    if let Some(b) = v.get("back") {
        payload["involution_error"] = json!(involution_error(&k, &dual, &grid_from_json(b)?)?);
    }
    Ok((Status::Pass, payload))
}

fn suite_cmd(ctx: &mut Ctx, a: &SuiteArgs) -> Result<(Status, Value)> {
    let seed = ctx.cli.seed;
    ctx.note("seed", seed);
    let only: Vec<u8> = match &a.only {
        Some(s) => {
            ctx.note("only", s);
            s.split(',').map(|x| suite::resolve(x).ok_or_else(|| anyhow!("unknown criterion {x:?}"))).collect::<Result<_>>()?
        }
        None => Vec::new(),
    };
    let fault = match &a.fault {
        Some(s) => {
            ctx.note("fault", s);
            Some(suite::resolve(s).ok_or_else(|| anyhow!("unknown criterion {s:?}"))?)
        }
        None => None,
    };
    let outcomes = suite::run(&only, &SuiteOptions { seed, fault });
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let ok = outcomes.iter().all(|o| o.passed);
    Ok((
        Status::from_bool(ok),
        json!({
            "seed": seed,
            "fault": fault,
            "criteria": outcomes.iter().map(|o| o.to_json(ctx.cli.timing)).collect::<Vec<_>>(),
        }),
    ))
}
