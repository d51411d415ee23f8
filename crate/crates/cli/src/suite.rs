//! The acceptance matrix. Each criterion is a deterministic function of the
//! seed; every tolerance and size below is fixed here and nowhere else.
//!
//! `fault` runs a criterion with a deliberately broken ingredient. A
//! faulted criterion is expected to report FAIL; that is how the checks are
//! shown to be able to fail at all.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::thread;
use std::time::{Duration, Instant};
use syz_core::ainfty::{bar_check, first_relation_failure, morphism_defect, pre_category_check};
use syz_core::corpus::{self, corrupt, random_dga, random_retraction};
use syz_core::fukaya_oh::{fo_category, mk_vanishing_certificate, AffineLagrangian};
use syz_core::mirror::{compare_tables, mirror_tables};
use syz_core::monge::{
    hessian_duality_check_within, involution_error, legendre, ma_residual, observed_orders, ConvexGridFunction, GridBox,
};
use syz_core::morse::{critical_points, morse_category, morse_differential, CriticalSet, TrigPolynomial};
use syz_core::rational::{fmt_q, q, qi, Q};
use syz_core::transfer::{transfer_morphism, transfer_structure, RetractionData};
use syz_core::trees::{enumerate, enumerate_binary};
use syz_core::{AInftyStructure, NovikovElem, QMatrix, Scalar, Valuation};

pub const DEFAULT_SEED: u64 = 20_240_917;

// Criteria 1 and 2.
pub const TRANSFER_CASES: usize = 50;
pub const TRANSFER_MAX_DIM: usize = 6;
pub const RELATION_ARITY: usize = 5;
pub const MORPHISM_ARITY: usize = 4;
pub const TRANSFER_LIMIT: Duration = Duration::from_secs(120);
// Criterion 3.
pub const SIGN_CASES: usize = 100;
pub const SIGN_CORRUPTED: usize = 20;
pub const BAR_WORD: usize = 4;
// Criterion 4.
pub const MIRROR_CUTOFF: i64 = 25;
pub const MIRROR_LIMIT: Duration = Duration::from_secs(60);
// Criterion 5.
pub const FO_CUTOFF: i64 = 20;
pub const FO_TRIALS: usize = 4;
// Criterion 6.
pub const MORSE_TRIPLES: usize = 20;
pub const MORSE_MAX_FREQ: u32 = 2;
pub const MORSE_LIMIT: Duration = Duration::from_secs(60);
// Criterion 7.
pub const NOVIKOV_CASES: usize = 1000;
// Criterion 8.
pub const MONGE_C: f64 = 1.0;
pub const MONGE_DUAL_FACTOR: f64 = 10.0;
pub const MONGE_MIN_ORDER: f64 = 1.8;
/// Errors at or below this level are roundoff; no order is read off them.
pub const MONGE_NOISE_FLOOR: f64 = 1e-10;
pub const MONGE_LIMIT: Duration = Duration::from_secs(30);
// Criterion 9.
pub const TREE_MAX_LEAVES: usize = 7;

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub fault: Option<u8>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: DEFAULT_SEED, fault: None }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub detail: Value,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.2}s)",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.summary,
            self.elapsed.as_secs_f64()
        )
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let mut v = json!({
            "id": self.id,
            "name": self.name,
            "status": if self.passed { "PASS" } else { "FAIL" },
            "summary": self.summary,
            "detail": self.detail,
            "limit_s": self.limit.map(|l| l.as_secs()),
        });
        if timing {
            v["elapsed_s"] = json!(self.elapsed.as_secs_f64());
        }
        v
    }
}

type Check = fn(&SuiteOptions) -> (bool, String, Value);

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub limit: Option<Duration>,
    check: Check,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "transfer", limit: Some(TRANSFER_LIMIT), check: transfer_relations },
    Criterion { id: 2, name: "transfer-morphism", limit: Some(TRANSFER_LIMIT), check: transfer_morphisms },
    Criterion { id: 3, name: "signs", limit: None, check: sign_cross_validation },
    Criterion { id: 4, name: "mirror", limit: Some(MIRROR_LIMIT), check: mirror_grid },
    Criterion { id: 5, name: "fo", limit: None, check: fo_associativity },
    Criterion { id: 6, name: "morse", limit: Some(MORSE_LIMIT), check: morse_suite },
    Criterion { id: 7, name: "novikov", limit: None, check: novikov_laws },
    Criterion { id: 8, name: "legendre", limit: Some(MONGE_LIMIT), check: legendre_duality },
    Criterion { id: 9, name: "trees", limit: None, check: tree_counts },
];

/// Resolves a selector (`"4"` or `"mirror"`) to a criterion id.
pub fn resolve(sel: &str) -> Option<u8> {
    let sel = sel.trim();
    CRITERIA.iter().find(|c| c.name == sel || c.id.to_string() == sel).map(|c| c.id)
}

fn run_one(c: &Criterion, opts: &SuiteOptions) -> Outcome {
    let start = Instant::now();
    let (ok, summary, detail) = (c.check)(opts);
    let elapsed = start.elapsed();
    let in_time = c.limit.is_none_or(|l| elapsed <= l);
    let summary = if in_time { summary } else { format!("{summary}; over the {}s limit", c.limit.unwrap().as_secs()) };
    Outcome { id: c.id, name: c.name, passed: ok && in_time, summary, detail, elapsed, limit: c.limit }
}

/// Runs the selected criteria (all if `only` is empty) concurrently and
/// returns the outcomes in id order.
pub fn run(only: &[u8], opts: &SuiteOptions) -> Vec<Outcome> {
    let picked: Vec<&Criterion> = CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)).collect();
    thread::scope(|s| {
        let handles: Vec<_> = picked.iter().map(|c| s.spawn(move || run_one(c, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    })
}

fn faulted(opts: &SuiteOptions, id: u8) -> bool {
    opts.fault == Some(id)
}

fn rng_for(opts: &SuiteOptions, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ (u64::from(id) << 56))
}

// ---------------------------------------------------------------- transfer

/// Seeded random dg-algebras (dim ≤ 6) with validated retractions.
pub fn transfer_corpus(seed: u64, count: usize) -> Vec<RetractionData<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = random_dga(&mut rng, TRANSFER_MAX_DIM);
        let extra = rng.gen_bool(0.25);
        let r = random_retraction(&a, &mut rng, extra);
        if r.validate().is_valid() {
            out.push(r);
        }
    }
    out
}

fn transfer_relations(opts: &SuiteOptions) -> (bool, String, Value) {
    let corpus = transfer_corpus(opts.seed, TRANSFER_CASES);
    let mut rng = rng_for(opts, 1);
    let mut failures = Vec::new();
    let mut higher = 0;
    for (case, r) in corpus.iter().enumerate() {
        let mut b = match transfer_structure(r, RELATION_ARITY) {
            Ok(b) => b,
            Err(e) => {
                failures.push(json!({"case": case, "error": e.to_string()}));
                continue;
            }
        };
        if case == 0 && faulted(opts, 1) {
            b = corrupt(&b, &mut rng, 2).unwrap_or(b);
        }
        if (3..=RELATION_ARITY).any(|k| b.op(k).is_some_and(|op| !op.is_zero())) {
            higher += 1;
        }
        if let Some((n, ins, out, c)) = first_relation_failure(&b, RELATION_ARITY) {
            failures.push(json!({"case": case, "arity": n, "inputs": ins, "output": out, "value": c.to_json()}));
        }
    }
    let ok = failures.is_empty() && corpus.len() >= TRANSFER_CASES;
    let summary = format!(
        "{} dg-algebras, relations n ≤ {RELATION_ARITY}: {} failing; {higher} with nonzero m≥3",
        corpus.len(),
        failures.len()
    );
    (ok, summary, json!({"cases": corpus.len(), "with_higher_products": higher, "failures": failures}))
}

fn transfer_morphisms(opts: &SuiteOptions) -> (bool, String, Value) {
    let corpus = transfer_corpus(opts.seed, TRANSFER_CASES);
    let mut failures = Vec::new();
    for (case, r) in corpus.iter().enumerate() {
        let mut f = match transfer_morphism(r, MORPHISM_ARITY) {
            Ok(f) => f,
            Err(e) => {
                failures.push(json!({"case": case, "error": e.to_string()}));
                continue;
            }
        };
        if faulted(opts, 2) {
            // 2·i is still a chain map but no longer multiplicative.
            let f1 = f.component(1).expect("f1 = i").scaled(&qi(2));
            f.set_component(f1).expect("same shape");
        }
        for n in 1..=MORPHISM_ARITY {
            if let Some((ins, out, c)) = morphism_defect(&f, n).first_entry() {
                failures.push(json!({"case": case, "arity": n, "inputs": ins, "output": out, "value": c.to_json()}));
                break;
            }
        }
    }
    let ok = failures.is_empty();
    let summary = format!("{} morphisms, defects n ≤ {MORPHISM_ARITY}: {} failing", corpus.len(), failures.len());
    (ok, summary, json!({"cases": corpus.len(), "failures": failures}))
}

// ------------------------------------------------------------------- signs

/// 80 intact structures (transferred, corpus blocks, random dgas) and 20
/// corrupted ones; the corrupted ones are drawn until a relation breaks.
fn sign_corpus(opts: &SuiteOptions) -> Vec<(AInftyStructure<Q>, bool)> {
    let mut rng = rng_for(opts, 3);
    let mut intact: Vec<AInftyStructure<Q>> = vec![
        corpus::ground(),
        corpus::exterior(),
        corpus::square_zero(),
        corpus::endomorphisms(1, false),
        corpus::endomorphisms(2, false),
        corpus::endomorphisms(1, true),
        corpus::massey(1),
        corpus::massey(-2),
        corpus::tensor(&corpus::exterior(), &corpus::exterior()),
        corpus::product(&corpus::exterior(), &corpus::square_zero()),
    ];
    for r in transfer_corpus(opts.seed.wrapping_add(3), 40) {
        intact.push(transfer_structure(&r, RELATION_ARITY).expect("validated retraction"));
    }
    while intact.len() < SIGN_CASES - SIGN_CORRUPTED {
        intact.push(random_dga(&mut rng, TRANSFER_MAX_DIM));
    }
    let mut out: Vec<(AInftyStructure<Q>, bool)> = intact.iter().cloned().map(|s| (s, false)).collect();
    let mut k = 0;
    while out.len() < SIGN_CASES {
        let base = &intact[k % intact.len()];
        k += 1;
        let arity = 1 + k % 3;
        if let Some(c) = corrupt(base, &mut rng, arity) {
            if first_relation_failure(&c, BAR_WORD).is_some() {
                out.push((c, true));
            }
        }
    }
    out
}

fn sign_cross_validation(opts: &SuiteOptions) -> (bool, String, Value) {
    let cases = sign_corpus(opts);
    let mut disagreements = Vec::new();
    let (mut failing, mut corrupted) = (0, 0);
    for (case, (s, is_corrupt)) in cases.iter().enumerate() {
        let rel = first_relation_failure(s, BAR_WORD).map(|f| f.0);
        let bar = if faulted(opts, 3) && *is_corrupt {
            // Checking the wrong structure: the uncorrupted twin.
            bar_check(&corpus::ground(), BAR_WORD).first_failure
        } else {
            bar_check(s, BAR_WORD).first_failure
        };
        corrupted += usize::from(*is_corrupt);
        failing += usize::from(rel.is_some());
        if rel != bar {
            disagreements.push(json!({"case": case, "relation_arity": rel, "bar_word": bar}));
        }
    }
    let ok = disagreements.is_empty() && cases.len() == SIGN_CASES && corrupted == SIGN_CORRUPTED && failing >= SIGN_CORRUPTED;
    let summary = format!(
        "{} structures ({corrupted} corrupted, {failing} failing), words ≤ {BAR_WORD}: {} disagreements",
        cases.len(),
        disagreements.len()
    );
    (ok, summary, json!({"cases": cases.len(), "corrupted": corrupted, "failing": failing, "disagreements": disagreements}))
}

// ------------------------------------------------------------------ mirror

fn line(a: i64, b: Q, u: Q) -> AffineLagrangian {
    AffineLagrangian::line(a, b, u).expect("rank-one slope is valid")
}

/// Adds `q^v` to the first nonzero theta entry, `v` its valuation.
pub fn perturb_theta(t: &mut syz_core::mirror::MirrorTables) {
    if let Some((key, v)) = t.theta.iter().find(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())) {
        let e = v.val().finite().cloned().unwrap_or_else(|| qi(0));
        t.theta.insert(key, v.add(&NovikovElem::q_pow(e)));
    }
}

fn mirror_grid(opts: &SuiteOptions) -> (bool, String, Value) {
    let shifts = [qi(0), q(1, 2)];
    let cutoff = qi(MIRROR_CUTOFF);
    let mut rows = Vec::new();
    let mut ok = true;
    for a in 0..4 {
        for b in a + 1..4 {
            for c in b + 1..4 {
                for mask in 0..8usize {
                    let s = |i: usize| shifts[(mask >> i) & 1].clone();
                    let ls = [line(a, s(0), qi(1)), line(b, s(1), qi(1)), line(c, s(2), qi(1))];
                    let row = match mirror_tables([&ls[0], &ls[1], &ls[2]], &cutoff) {
                        Ok(mut t) => {
                            if faulted(opts, 4) && rows.is_empty() {
                                perturb_theta(&mut t);
                            }
                            let r = compare_tables(&t);
                            let nonzero = r.entries.iter().filter(|e| !e.fo.is_zero()).count();
                            ok &= r.equal() && nonzero > 0;
                            json!({
                                "slopes": [a, b, c],
                                "shifts": [fmt_q(&s(0)), fmt_q(&s(1)), fmt_q(&s(2))],
                                "status": if r.equal() { "EQUAL" } else { "DIFFER" },
                                "entries": r.entries.len(),
                                "nonzero": nonzero,
                            })
                        }
                        Err(e) => {
                            ok = false;
                            json!({"slopes": [a, b, c], "error": e.to_string()})
                        }
                    };
                    rows.push(row);
                }
            }
        }
    }
    let equal = rows.iter().filter(|r| r["status"] == "EQUAL").count();
    let summary = format!("{equal}/{} triples EQUAL at Λ = {MIRROR_CUTOFF}", rows.len());
    (ok && rows.len() == 32, summary, json!({"cutoff": MIRROR_CUTOFF, "cases": rows}))
}

// ---------------------------------------------------------------------- fo

fn random_shift(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-3..=3), rng.gen_range(1..=4))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Q {
    let n = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    q(n, rng.gen_range(1..=3))
}

fn fo_associativity(opts: &SuiteOptions) -> (bool, String, Value) {
    let mut rng = rng_for(opts, 5);
    let cutoff = qi(FO_CUTOFF);
    let mut rows = Vec::new();
    let mut ok = true;
    for slopes in [[0, 1, 2, 3], [0, 1, 3, 4]] {
        for trial in 0..FO_TRIALS {
            let ls: Vec<AffineLagrangian> = slopes
                .iter()
                .map(|&a| {
                    if trial == 0 {
                        line(a, qi(0), qi(1))
                    } else {
                        line(a, random_shift(&mut rng), random_unit(&mut rng))
                    }
                })
                .collect();
            let row = (|| -> Result<Value, String> {
                let mut cat = fo_category(&ls, &cutoff).map_err(|e| e.to_string())?;
                if faulted(opts, 5) && trial == 0 {
                    cat.category
                        .add_composition(&[0, 1, 3], &["p0", "p0"], "p0", &NovikovElem::q_pow(qi(1)))
                        .map_err(|e| e.to_string())?;
                }
                let rep = pre_category_check(&cat.category, 3).map_err(|e| e.to_string())?;
                let cert = mk_vanishing_certificate(&ls, 3).map_err(|e| e.to_string())?;
                let m3_zero = cat.structure().op(3).is_none_or(|op| op.is_zero());
                let good = rep.passed() && cert.target_degree == -1 && m3_zero;
                ok &= good;
                Ok(json!({
                    "slopes": slopes,
                    "trial": trial,
                    "shifts": ls.iter().map(|l| fmt_q(&l.shift()[0])).collect::<Vec<_>>(),
                    "holonomies": ls.iter().map(|l| fmt_q(&l.holonomy()[0])).collect::<Vec<_>>(),
                    "sequences_checked": rep.sequences_checked,
                    "defects": rep.defects.len(),
                    "m3_certificate": cert.to_json(),
                    "passed": good,
                }))
            })()
            .unwrap_or_else(|e| {
                ok = false;
                json!({"slopes": slopes, "trial": trial, "error": e})
            });
            rows.push(row);
        }
    }
    let passed = rows.iter().filter(|r| r["passed"] == true).count();
    let summary = format!("{passed}/{} quadruples associative to Λ = {FO_CUTOFF}, m3 certified zero", rows.len());
    (ok, summary, json!({"cutoff": FO_CUTOFF, "cases": rows}))
}

// ------------------------------------------------------------------- morse

fn random_trig(rng: &mut ChaCha8Rng) -> TrigPolynomial {
    let mut coef = || q(rng.gen_range(-3..=3), rng.gen_range(1..=3));
    let cos: Vec<(u32, Q)> = (1..=MORSE_MAX_FREQ).map(|k| (k, coef())).collect();
    let sin: Vec<(u32, Q)> = (1..=MORSE_MAX_FREQ).map(|k| (k, coef())).collect();
    TrigPolynomial::new(qi(0), cos, sin)
}

/// Seeded transversal triples; draws that fail transversality are skipped.
pub fn morse_triples(seed: u64, count: usize) -> Vec<[TrigPolynomial; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let fs = [random_trig(&mut rng), random_trig(&mut rng), random_trig(&mut rng)];
        if morse_category(&fs).is_ok() {
            out.push(fs);
        }
    }
    out
}

/// `(dim H⁰, dim H¹)` of the Morse complex of `f0 − f1`.
pub fn morse_cohomology(f0: &TrigPolynomial, f1: &TrigPolynomial) -> Result<(usize, usize), String> {
    let crit = critical_points(&f0.sub(f1)).map_err(|e| e.to_string())?;
    let d = morse_differential(f0, f1).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<Q>> = crit.maxima().map(|o| crit.minima().map(|s| d.coeff(&[s], o)).collect()).collect();
    let mins = crit.minima().count();
    let maxs = crit.maxima().count();
    let rank = if rows.is_empty() { 0 } else { QMatrix::from_rows(rows).rank() };
    Ok((mins - rank, maxs - rank))
}

fn morse_suite(opts: &SuiteOptions) -> (bool, String, Value) {
    let triples = morse_triples(opts.seed.wrapping_add(6), MORSE_TRIPLES);
    let mut rows = Vec::new();
    let mut ok = true;
    for (case, fs) in triples.iter().enumerate() {
        let mut mc = morse_category(fs).expect("drawn transversal");
        if faulted(opts, 6) && case == 0 {
            let s01 = &mc.critical[&(0, 1)];
            let s12 = &mc.critical[&(1, 2)];
            let s02 = &mc.critical[&(0, 2)];
            let (a, b, c) = (s01.minima().next(), s12.minima().next(), s02.minima().next());
            if let (Some(a), Some(b), Some(c)) = (a, b, c) {
                mc.category
                    .add_composition(
                        &[0, 1, 2],
                        &[&CriticalSet::label(a), &CriticalSet::label(b)],
                        &CriticalSet::label(c),
                        &qi(1),
                    )
                    .expect("degree-0 entry");
            }
        }
        let rep = pre_category_check(&mc.category, 3).expect("well-formed");
        let mut ranks = Vec::new();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            match morse_cohomology(&fs[i], &fs[j]) {
                Ok(r) => ranks.push(r),
                Err(_) => ranks.push((usize::MAX, usize::MAX)),
            }
        }
        let good = rep.passed() && ranks.iter().all(|&r| r == (1, 1));
        ok &= good;
        rows.push(json!({
            "case": case,
            "critical_points": [mc.critical[&(0, 1)].len(), mc.critical[&(1, 2)].len(), mc.critical[&(0, 2)].len()],
            "relation_defects": rep.defects.len(),
            "cohomology": ranks.iter().map(|r| json!([r.0, r.1])).collect::<Vec<_>>(),
            "passed": good,
        }));
    }
    let passed = rows.iter().filter(|r| r["passed"] == true).count();
    let summary = format!("{passed}/{} triples: Leibniz exact, cohomology (1,1) on every pair", rows.len());
    (ok && rows.len() >= MORSE_TRIPLES, summary, json!({"cases": rows}))
}

// ----------------------------------------------------------------- novikov

fn random_exact(rng: &mut ChaCha8Rng) -> NovikovElem {
    let n = rng.gen_range(0..5);
    let terms = (0..n).map(|_| (q(rng.gen_range(0..=40), 4), q(rng.gen_range(-5..=5), rng.gen_range(1..=3)))).collect();
    NovikovElem::new(terms, None)
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> NovikovElem {
    let e = q(rng.gen_range(0..=40), 4);
    let c = q(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=3));
    let rest = random_exact(rng);
    let mut terms = vec![(e.clone(), c)];
    terms.extend(rest.terms().iter().map(|(x, y)| (&e + x + q(1, 4), y.clone())));
    NovikovElem::new(terms, None)
}

fn val_plus(a: &Valuation, b: &Valuation) -> Valuation {
    match (a.finite(), b.finite()) {
        (Some(x), Some(y)) => Valuation::Finite(x + y),
        _ => Valuation::Infinite,
    }
}

fn val_at_least(a: &Valuation, b: &Valuation) -> bool {
    match (a.finite(), b.finite()) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x >= y,
    }
}

fn val_min(a: &Valuation, b: &Valuation) -> Valuation {
    if val_at_least(a, b) {
        b.clone()
    } else {
        a.clone()
    }
}

/// One case of every law; returns the name of the first law that fails.
fn novikov_case(rng: &mut ChaCha8Rng, mul: &dyn Fn(&NovikovElem, &NovikovElem) -> NovikovElem) -> Option<&'static str> {
    let (x, y, z) = (random_exact(rng), random_exact(rng), random_exact(rng));
    let l = q(rng.gen_range(8..=48), 4);
    if x.add(&y) != y.add(&x) || mul(&x, &y) != mul(&y, &x) {
        return Some("commutativity");
    }
    if x.add(&y).add(&z) != x.add(&y.add(&z)) || mul(&mul(&x, &y), &z) != mul(&x, &mul(&y, &z)) {
        return Some("associativity");
    }
    if mul(&x, &y.add(&z)) != mul(&x, &y).add(&mul(&x, &z)) {
        return Some("distributivity");
    }
    if x.add(&NovikovElem::zero()) != x || mul(&x, &NovikovElem::one()) != x || !x.sub(&x).is_zero() {
        return Some("identities");
    }
    let (xt, yt, zt) = (x.truncate(&l), y.truncate(&l), z.truncate(&l));
    if !mul(&mul(&xt, &yt), &zt).eq_upto(&mul(&xt, &mul(&yt, &zt)), &l)
        || !mul(&xt, &yt.add(&zt)).eq_upto(&mul(&xt, &yt).add(&mul(&xt, &zt)), &l)
    {
        return Some("truncated ring laws");
    }
    let u = random_nonzero(rng);
    let prod = mul(&u, &u.inv_to(&l).ok()?);
    match prod.cutoff() {
        Some(c) if c >= &l && prod.eq_upto(&NovikovElem::one(), c) => {}
        _ => return Some("inverse"),
    }
    if mul(&x, &y).val() != val_plus(&x.val(), &y.val()) {
        return Some("valuation of products");
    }
    let s = x.add(&y);
    let m = val_min(&x.val(), &y.val());
    if !val_at_least(&s.val(), &m) || (x.val() != y.val() && s.val() != m) {
        return Some("valuation of sums");
    }
    let t = |e: &NovikovElem| e.truncate(&l);
    if t(&mul(&x, &y)) != t(&mul(&t(&x), &t(&y))) || t(&x.add(&y)) != t(&t(&x).add(&t(&y))) {
        return Some("truncation homomorphism");
    }
    None
}

fn novikov_laws(opts: &SuiteOptions) -> (bool, String, Value) {
    let mut rng = rng_for(opts, 7);
    let honest = |a: &NovikovElem, b: &NovikovElem| a.mul(b);
    // A convolution that forgets its top term.
    let broken = |a: &NovikovElem, b: &NovikovElem| {
        let p = a.mul(b);
        let mut t = p.terms().to_vec();
        if t.len() > 1 {
            t.pop();
        }
        NovikovElem::new(t, p.cutoff().cloned())
    };
    let mul: &dyn Fn(&NovikovElem, &NovikovElem) -> NovikovElem = if faulted(opts, 7) { &broken } else { &honest };
    let mut failures = Vec::new();
    for case in 0..NOVIKOV_CASES {
        if let Some(law) = novikov_case(&mut rng, mul) {
            failures.push(json!({"case": case, "law": law}));
        }
    }
    let summary = format!("{NOVIKOV_CASES} cases: {} law violations", failures.len());
    (failures.is_empty(), summary, json!({"cases": NOVIKOV_CASES, "failures": failures}))
}

// ---------------------------------------------------------------- legendre

fn grid(lo: &[Q], hi: &[Q], h: &Q) -> GridBox {
    GridBox::new(lo.to_vec(), hi.to_vec(), h.clone()).expect("box is a whole number of steps")
}

/// Measured orders on pairs whose coarse error is above the noise floor.
pub fn measurable_orders(errors: &[f64]) -> Vec<f64> {
    observed_orders(errors).into_iter().zip(errors).filter(|(_, e)| **e > MONGE_NOISE_FLOOR).map(|(o, _)| o).collect()
}

struct Family {
    name: &'static str,
    steps: [i64; 3],
    k: fn(&Q) -> GridBox,
    f: fn(&[f64]) -> f64,
    dual: fn(&Q) -> GridBox,
    back: Option<fn(&Q) -> GridBox>,
    region: (&'static [f64], &'static [f64]),
    ma: bool,
}

fn families() -> [Family; 3] {
    [
        Family {
            name: "quadratic",
            steps: [8, 16, 32],
            k: |h| grid(&[qi(-1), qi(-1)], &[qi(1), qi(1)], h),
            f: |x| x[0] * x[0] + 0.25 * x[1] * x[1],
            dual: |h| grid(&[qi(-1), q(-1, 4)], &[qi(1), q(1, 4)], h),
            back: Some(|h| grid(&[q(-3, 8), q(-3, 8)], &[q(3, 8), q(3, 8)], h)),
            region: (&[-0.3, -0.3], &[0.3, 0.3]),
            ma: true,
        },
        Family {
            name: "quartic",
            steps: [16, 32, 64],
            k: |h| grid(&[q(1, 2)], &[qi(1)], h),
            f: |x| x[0].powi(4) / 4.0,
            dual: |h| grid(&[q(1, 4)], &[q(7, 8)], h),
            back: Some(|h| grid(&[q(11, 16)], &[q(15, 16)], h)),
            region: (&[0.68], &[0.93]),
            ma: false,
        },
        Family {
            name: "monge-ampere",
            steps: [8, 16, 32],
            k: |h| grid(&[q(-1, 2), qi(1)], &[q(1, 2), qi(2)], h),
            f: |x| x[0] * x[0] / (2.0 * x[1]) + x[1].powi(3) / 6.0,
            dual: |h| grid(&[q(-1, 4), q(3, 4)], &[q(1, 4), q(3, 2)], h),
            back: None,
            region: (&[-0.15, 1.35], &[0.15, 1.6]),
            ma: true,
        },
    ]
}

struct StepResult {
    ok: bool,
    row: Value,
    det: f64,
    inv: Option<f64>,
}

fn legendre_step(fam: &Family, steps: i64, fault: bool) -> Result<StepResult, String> {
    let h = q(1, steps);
    let hf = 1.0 / steps as f64;
    let bound = MONGE_C * hf * hf;
    let k = ConvexGridFunction::sample((fam.k)(&h), fam.f).map_err(|e| e.to_string())?;
    let kh = if fault {
        // The conjugate of a different potential.
        let other = ConvexGridFunction::sample((fam.k)(&h), |x| 1.01 * (fam.f)(x)).map_err(|e| e.to_string())?;
        legendre(&other, &(fam.dual)(&h))
    } else {
        legendre(&k, &(fam.dual)(&h))
    }
    .map_err(|e| e.to_string())?;
    let d = hessian_duality_check_within(&k, &kh, fam.region.0, fam.region.1).map_err(|e| e.to_string())?;
    let mut ok = d.det_error <= bound;
    let mut row = json!({
        "family": fam.name,
        "h": fmt_q(&h),
        "bound": bound,
        "det_error": d.det_error,
        "metric_error": d.metric_error,
        "matched": d.matched,
    });
    let mut inv = None;
    if let Some(back) = fam.back {
        let e = involution_error(&k, &(fam.dual)(&h), &back(&h)).map_err(|e| e.to_string())?;
        ok &= e <= bound;
        inv = Some(e);
        row["involution_error"] = json!(e);
    }
    if fam.ma {
        let (rk, rkh) = (ma_residual(&k), ma_residual(&kh));
        ok &= rk <= bound && rkh <= MONGE_DUAL_FACTOR * bound;
        row["ma_residual"] = json!(rk);
        row["dual_ma_residual"] = json!(rkh);
    }
    Ok(StepResult { ok, row, det: d.det_error, inv })
}

pub fn family_names() -> Vec<&'static str> {
    families().iter().map(|f| f.name).collect()
}

/// One family at spacing `1/steps`: errors and whether they meet the
/// criterion bounds at that spacing.
pub fn legendre_at(name: &str, steps: i64) -> Result<(bool, Value), String> {
    let fam = families().into_iter().find(|f| f.name == name).ok_or_else(|| format!("unknown family {name:?}"))?;
    let r = legendre_step(&fam, steps, false)?;
    Ok((r.ok, r.row))
}

fn legendre_family(fam: &Family, fault: bool) -> Result<(bool, Value), String> {
    let mut inv = Vec::new();
    let mut det = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for &steps in &fam.steps {
        let r = legendre_step(fam, steps, fault)?;
        ok &= r.ok;
        det.push(r.det);
        inv.extend(r.inv);
        rows.push(r.row);
    }
    let orders_det = measurable_orders(&det);
    let orders_inv = measurable_orders(&inv);
    ok &= orders_det.iter().chain(&orders_inv).all(|&o| o >= MONGE_MIN_ORDER);
    Ok((
        ok,
        json!({
            "family": fam.name,
            "grids": rows,
            "det_orders": orders_det,
            "involution_orders": orders_inv,
            "passed": ok,
        }),
    ))
}

fn legendre_duality(opts: &SuiteOptions) -> (bool, String, Value) {
    let mut ok = true;
    let mut out = Vec::new();
    let mut names = Vec::new();
    for fam in families() {
        match legendre_family(&fam, faulted(opts, 8)) {
            Ok((good, v)) => {
                ok &= good;
                if good {
                    names.push(fam.name);
                }
                out.push(v);
            }
            Err(e) => {
                ok = false;
                out.push(json!({"family": fam.name, "error": e}));
            }
        }
    }
    let summary = format!(
        "{}/3 families within C·h² (C = {MONGE_C}), dual MA within {MONGE_DUAL_FACTOR}·C·h², orders ≥ {MONGE_MIN_ORDER}",
        names.len()
    );
    (ok, summary, json!({"families": out}))
}

// ------------------------------------------------------------------- trees

/// Little Schröder numbers by splitting `n` leaves among `k ≥ 2` subtrees.
pub fn schroeder_oracle(max: usize) -> Vec<u64> {
    let mut s = vec![0u64; max + 1];
    if max >= 1 {
        s[1] = 1;
    }
    for n in 2..=max {
        let mut f = vec![vec![0u64; n + 1]; n + 1];
        f[0][0] = 1;
        for k in 1..=n {
            for m in k..=n {
                f[k][m] = (1..=m - (k - 1)).map(|a| s[a] * f[k - 1][m - a]).sum();
            }
        }
        s[n] = (2..=n).map(|k| f[k][n]).sum();
    }
    s
}

pub fn catalan_oracle(max: usize) -> Vec<u64> {
    let mut c = vec![1u64; max + 1];
    for n in 1..=max {
        c[n] = (0..n).map(|i| c[i] * c[n - 1 - i]).sum();
    }
    c
}

fn tree_counts(opts: &SuiteOptions) -> (bool, String, Value) {
    let s = schroeder_oracle(TREE_MAX_LEAVES);
    let c = catalan_oracle(TREE_MAX_LEAVES);
    let valency = if faulted(opts, 9) { 3 } else { 2 };
    let all: Vec<u64> = (1..=TREE_MAX_LEAVES).map(|n| enumerate(n, valency).len() as u64).collect();
    // enumerate_binary needs n ≥ 2; the single-leaf tree counts as C₀ = 1.
    let binary: Vec<u64> =
        (1..=TREE_MAX_LEAVES).map(|n| if n == 1 { 1 } else { enumerate_binary(n).len() as u64 }).collect();
    let ok = all == s[1..] && binary == c[..TREE_MAX_LEAVES];
    let summary = format!("n ≤ {TREE_MAX_LEAVES}: planar {all:?}, binary {binary:?}");
    (
        ok,
        summary,
        json!({"planar": all, "schroeder": &s[1..], "binary": binary, "catalan": &c[..TREE_MAX_LEAVES]}),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_match_known_prefixes() {
        assert_eq!(&schroeder_oracle(6)[1..], &[1, 1, 3, 11, 45, 197]);
        assert_eq!(&catalan_oracle(5)[..], &[1, 1, 2, 5, 14, 42]);
    }

    #[test]
    fn selectors() {
        assert_eq!(resolve("4"), Some(4));
        assert_eq!(resolve("mirror"), Some(4));
        assert_eq!(resolve("nope"), None);
    }

    #[test]
    fn noise_floor_skips_exact_pairs() {
        assert_eq!(measurable_orders(&[1e-13, 1e-14, 4e-13]), Vec::<f64>::new());
        assert_eq!(measurable_orders(&[4e-3, 1e-3]), vec![2.0]);
    }

    #[test]
    fn faults_are_detected_in_cheap_criteria() {
        for id in [7u8, 9] {
            let opts = SuiteOptions { fault: Some(id), ..SuiteOptions::default() };
            assert!(!run(&[id], &opts)[0].passed, "criterion {id}");
        }
    }
}
