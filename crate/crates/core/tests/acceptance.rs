//! Acceptance run: one PASS/FAIL line per criterion, then sub-check details
//! for anything that failed. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nomrec_core::corecursors::{
    broken_swap_comodel, check_coprop, check_coprops, comorphism_report, corec, full_corec5, iterm_comodel,
    psubst_comodel, random_env, sum_comodel, CoProp, DProp, PsState, Rebind,
};
use nomrec_core::counterexamples::{adjoin_model, obstruction_r1, obstruction_r2, stream_model};
use nomrec_core::examples::{
    broken_lm_model, enf_model, hoas_encode, hoas_model, noccs, noccs_model, noccs_ren_model, pitts_submodel,
    raw_ren_model, sem_direct, sem_model, sem_via_submodel, size_model, size_of, subst_model, subst_via_r1,
    Env as DEnv, ExtTerm,
};
use nomrec_core::gen::{default_pool, random_term, sub_rng, MAX_SIZE};
use nomrec_core::infinitary::{co_alpha_eq, embed, psubst, random_coterm, Env, EqMode};
use nomrec_core::models::{check_props, props_of, term_model, term_model_full, CheckCfg, Model, PropId};
use nomrec_core::recursors::{morphism_report, morphism_report_enhanced, rec, rec_enhanced, uniqueness_check, Mode};
use nomrec_core::term::Node;
use nomrec_core::transforms::{edge, quasi_definability_check, triple_rename_choice_check};
use nomrec_core::{alpha_eq, NomError, Term, Var};

const SEED: u64 = 20240611;
const DEPTH: usize = 30;

/// Sub-check outcomes for one criterion.
struct Crit {
    fails: Vec<String>,
    checks: usize,
}

impl Crit {
    fn new() -> Crit {
        Crit { fails: Vec::new(), checks: 0 }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks += 1;
        if !ok {
            self.fails.push(what.into());
        }
    }

    fn result(&mut self, what: &str, r: Result<bool, NomError>) {
        match r {
            Ok(ok) => self.check(what, ok),
            Err(e) => self.check(format!("{what}: {e}"), false),
        }
    }
}

fn terms(label: &str, n: usize) -> Vec<Term> {
    let mut rng = sub_rng(SEED, label);
    let pool = default_pool();
    (0..n).map(|_| random_term(&mut rng, &pool, MAX_SIZE)).collect()
}

fn suite_passes<C: Clone + 'static>(m: &Model<C>, i: usize, n: usize) -> Result<bool, NomError> {
    let r = check_props(m, &props_of(i)?, &CheckCfg::with_seed(SEED, n))?;
    if !r.ok() {
        eprintln!("{r}");
    }
    Ok(r.ok())
}

// ------------------------------------------------------------------ 1

fn term_suites() -> Crit {
    let mut c = Crit::new();
    for i in 1..=9 {
        c.result(&format!("term{i} laws at n=500"), term_model(i).and_then(|m| suite_passes(&m, i, 500)));
    }
    let all = check_props(&term_model_full(), PropId::ALL, &CheckCfg::with_seed(SEED, 500));
    c.result(
        "every law at n=500 with >=20 hits",
        all.map(|r| {
            if !r.ok() {
                eprintln!("{r}");
            }
            r.ok() && r.lines.iter().all(|l| l.hits >= 20)
        }),
    );
    c
}

// ------------------------------------------------------------------ 2

fn morphism_ok<C: Clone + Send + Sync + 'static>(i: usize, m: &Model<C>) -> Result<bool, NomError> {
    let r = rec(i, m)?;
    let rep = morphism_report(i, m, &r, 200, SEED);
    if !rep.ok() {
        eprintln!("{rep}");
    }
    Ok(rep.ok())
}

fn initiality() -> Crit {
    let mut c = Crit::new();
    let ts = terms("identity", 200);
    for i in 1..=9 {
        let ok = term_model(i).and_then(|m| rec(i, &m)).map(|r| ts.iter().all(|t| alpha_eq(&r.eval(t), t)));
        c.result(&format!("rec{i} on terms is the identity"), ok);
        c.result(&format!("term{i} morphism"), term_model(i).and_then(|m| morphism_ok(i, &m)));
    }
    c.result("noccs morphism", morphism_ok(6, &noccs_model()));
    c.result("noccs-ren morphism", morphism_ok(9, &noccs_ren_model()));
    c.result("size morphism", morphism_ok(4, &size_model()));
    c.result("hoas morphism", morphism_ok(7, &hoas_model()));
    c.result("sem morphism", morphism_ok(2, &sem_model()));
    c.result("pitts morphism", morphism_ok(1, &pitts_submodel()));
    c.result("stream morphism", morphism_ok(2, &stream_model()));
    c.result("adjoin morphism", morphism_ok(4, &adjoin_model()));
    let enf = enf_model();
    c.result("enf morphism", rec_enhanced(4, &enf).map(|r| morphism_report_enhanced(&enf, &r, 200, SEED).ok()));
    for (s, y) in [("\\a. a b", 1), ("c", 0), ("v2 v0", 2)] {
        let s = nomrec_core::parse(s).unwrap();
        let m = subst_model(&s, Var(y));
        c.result(
            &format!("subst[{s}/v{y}] morphism"),
            rec_enhanced(1, &m).map(|r| morphism_report_enhanced(&m, &r, 200, SEED).ok()),
        );
    }
    c
}

// ------------------------------------------------------------------ 3

fn edge_ok<C: Clone + Send + Sync + 'static>(j: usize, i: usize, m: &Model<C>) -> Result<bool, NomError> {
    let t = edge(j, i, m)?;
    let laws = suite_passes(&t, i, 300)?;
    let (gj, gi) = (rec(j, m)?, rec(i, &t)?);
    let agree = uniqueness_check(i, &t, &|x| gj.eval(x), &|x| gi.eval(x), 200, SEED);
    if !agree.ok() {
        eprintln!("{agree}");
    }
    Ok(laws && agree.ok())
}

fn edges() -> Crit {
    let mut c = Crit::new();
    for (j, i) in nomrec_core::transforms::EDGES {
        let what = format!("edge r{j}>r{i}");
        c.result(&format!("{what} on term{j}"), term_model(j).and_then(|m| edge_ok(j, i, &m)));
        match j {
            1 => c.result(&format!("{what} on pitts"), edge_ok(j, i, &pitts_submodel())),
            2 => {
                c.result(&format!("{what} on sem"), edge_ok(j, i, &sem_model()));
                c.result(&format!("{what} on stream"), edge_ok(j, i, &stream_model()));
            }
            4 => {
                c.result(&format!("{what} on size"), edge_ok(j, i, &size_model()));
                c.result(&format!("{what} on adjoin"), edge_ok(j, i, &adjoin_model()));
            }
            5 => c.result(&format!("{what} on noccs"), edge_ok(j, i, &noccs_model())),
            7 => c.result(&format!("{what} on hoas"), edge_ok(j, i, &hoas_model())),
            8 => c.result(&format!("{what} on noccs-ren"), edge_ok(j, i, &noccs_ren_model())),
            _ => {}
        }
    }
    c
}

// ------------------------------------------------------------------ 4

fn quasi_ok<C: Clone + Send + Sync + 'static>(s: usize, w: usize, m: &Model<C>) -> Result<bool, NomError> {
    let r = quasi_definability_check(s, w, m, 200, SEED)?;
    if !r.ok() {
        eprintln!("{r}");
    }
    Ok(r.ok())
}

fn quasi() -> Crit {
    let mut c = Crit::new();
    c.result("(3,6) on term6", term_model(6).and_then(|m| quasi_ok(3, 6, &m)));
    c.result("(3,6) on noccs", quasi_ok(3, 6, &noccs_model()));
    c.result("(8,9) on term9", term_model(9).and_then(|m| quasi_ok(8, 9, &m)));
    c.result("(8,9) on noccs-ren", quasi_ok(8, 9, &noccs_ren_model()));
    c.result("(6,8) on term8", term_model(8).and_then(|m| quasi_ok(6, 8, &m)));
    c.result("(6,8) on noccs-ren", quasi_ok(6, 8, &noccs_ren_model()));
    c.result(
        "swap choice on term8",
        term_model(8).and_then(|m| triple_rename_choice_check(&m, 200, SEED)).map(|l| l.passed()),
    );
    c.result("swap choice on noccs-ren", triple_rename_choice_check(&noccs_ren_model(), 200, SEED).map(|l| l.passed()));
    c
}

// ------------------------------------------------------------------ 5

fn separations() -> Crit {
    let mut c = Crit::new();
    c.result("stream model laws at n=300", suite_passes(&stream_model(), 2, 300));
    c.result("adjoin model laws at n=300", suite_passes(&adjoin_model(), 4, 300));
    for (name, r) in [("r1", obstruction_r1(300, SEED)), ("r2", obstruction_r2(300, SEED))] {
        let witnessed = r.ok() && r.trailer.iter().any(|t| t == "SEPARATION WITNESSED");
        if !witnessed {
            eprintln!("{r}");
        }
        c.check(format!("obstruction {name}"), witnessed);
    }
    let r1 = obstruction_r1(300, SEED);
    let fcb_refuted = r1.line("c:FCB").is_some_and(|l| !l.passed() && l.note.as_deref() == Some("refuted=8/8"));
    c.check("FCB refuted for all 8 candidates", fcb_refuted);
    let r2 = obstruction_r2(300, SEED);
    c.check("PmAp refuted by a permutation witness", r2.line("3:PmAp").is_some_and(|l| !l.passed() && l.cex.is_some()));
    c.check("obstruction reports are deterministic", obstruction_r1(300, SEED) == r1);
    c
}

// ------------------------------------------------------------------ 6

/// Free occurrences, counted directly.
fn count_free(t: &Term, x: Var) -> u32 {
    match t.node() {
        Node::Vr(y) => u32::from(*y == x),
        Node::Ap(a, b) => count_free(a, x) + count_free(b, x),
        Node::Lm(y, b) if *y == x => 0,
        Node::Lm(_, b) => count_free(b, x),
    }
}

fn count_nodes(t: &Term) -> u64 {
    match t.node() {
        Node::Vr(_) => 1,
        Node::Ap(a, b) => 1 + count_nodes(a) + count_nodes(b),
        Node::Lm(_, b) => 1 + count_nodes(b),
    }
}

fn examples() -> Crit {
    let mut c = Crit::new();
    let ts = terms("examples", 300);
    let pool = default_pool();
    c.check("noccs matches direct count", ts.iter().all(|t| pool.iter().all(|x| noccs(t, *x) == count_free(t, *x))));
    c.check("size matches node count", ts.iter().all(|t| size_of(t) == count_nodes(t)));
    let ss = terms("subst-args", 300);
    let mut rng = sub_rng(SEED, "subst-var");
    let exact = ts.iter().zip(&ss).all(|(t, s)| {
        let y = pool[rand::Rng::gen_range(&mut rng, 0..pool.len())];
        alpha_eq(&subst_via_r1(t, s, y), &t.subst(s, y))
    });
    c.check("subst through r1 equals substitution on 300 samples", exact);
    let hoas_ok = ts.iter().take(200).all(|t| {
        let e = hoas_encode(t);
        match t.node() {
            Node::Vr(x) => e == ExtTerm::vr(*x),
            Node::Ap(a, b) => e == ExtTerm::ap(ExtTerm::ap(ExtTerm::ct("ap"), hoas_encode(a)), hoas_encode(b)),
            Node::Lm(x, b) => e == ExtTerm::ap(ExtTerm::ct("lm"), ExtTerm::lm(*x, hoas_encode(b))),
        }
    });
    c.check("hoas encoding clauses on 200 samples", hoas_ok);
    let mut rng = sub_rng(SEED, "sem-env");
    let agree = ts.iter().take(100).all(|t| {
        let env = DEnv::random(&mut rng, 8);
        sem_direct(t, &env) == sem_via_submodel(t, &env)
    });
    c.check("semantic routes agree on 100 samples", agree);
    c
}

// ------------------------------------------------------------------ 7

fn corecursion() -> Crit {
    let mut c = Crit::new();
    let cm = iterm_comodel(DEPTH);
    let cfg = CheckCfg::with_seed(SEED, 200);
    for i in [1, 2, 3, 5, 6, 7, 8, 9] {
        c.result(
            &format!("iterm co-suite cr{i}"),
            check_coprops(&cm, i, &cfg).map(|r| {
                if !r.ok() {
                    eprintln!("{r}");
                }
                r.ok()
            }),
        );
        let ident = corec(i, &cm).map(|k| {
            let mut rng = sub_rng(SEED, "corec-identity");
            (0..200).all(|_| {
                let t = cm.base.draw(&mut rng);
                co_alpha_eq(&k.apply(&t), &t, EqMode::Exact).unwrap_or(false)
            })
        });
        c.result(&format!("corec{i} on iterms is the identity"), ident);
        let morph = corec(i, &cm).and_then(|k| comorphism_report(i, &cm, &|s| k.apply(s), &cfg, DEPTH)).map(|r| r.ok());
        c.result(&format!("corec{i} comorphism"), morph);
    }
    let sum = sum_comodel(&psubst_comodel(DEPTH), DEPTH);
    c.result(
        "substitution comodel co-suite cr5",
        check_coprops(&sum, 5, &cfg).map(|r| {
            if !r.ok() {
                eprintln!("{r}");
            }
            r.ok()
        }),
    );
    let ts = terms("psubst-t", 200);
    let ss = terms("psubst-s", 200);
    let pool = default_pool();
    let ok = ts.iter().zip(&ss).enumerate().all(|(k, (t, s))| {
        let y = pool[k % pool.len()];
        let got = psubst(&embed(t), &Env::single(y, embed(s)));
        got.and_then(|g| co_alpha_eq(&g, &embed(&t.subst(s, y)), EqMode::Exact)).unwrap_or(false)
    });
    c.check("psubst matches finitary substitution on 200 samples", ok);
    let full = full_corec5(&psubst_comodel(DEPTH), DEPTH).map(|f| {
        let mut rng = sub_rng(SEED, "full-corec");
        (0..100).all(|_| {
            let t = random_coterm(&mut rng, &pool);
            let rho = random_env(&mut rng, &pool);
            let a = f(&PsState::new(t.clone(), rho.clone()).expect("regular env"));
            let b = psubst(&t, &rho).expect("regular env");
            co_alpha_eq(&a, &b, EqMode::Depth(20)).unwrap_or(false)
        })
    });
    c.result("full corecursion equals psubst to depth 20 on 100 samples", full);
    c
}

// ------------------------------------------------------------------ 8

fn first_instability<C: Clone + Send + Sync + 'static>(i: usize, m: &Model<C>) -> Result<bool, NomError> {
    let r = rec(i, m)?.with_mode(Mode::Checked);
    Ok(terms("instability", 500).iter().any(|t| matches!(r.apply(t), Err(NomError::AlphaInstability(_)))))
}

fn controls() -> Crit {
    let mut c = Crit::new();
    let r = check_props(&broken_lm_model(), &props_of(6).unwrap(), &CheckCfg::with_seed(SEED, 500));
    c.result(
        "broken-lm fails SwCg or FrLm",
        r.map(|r| ["SwCg", "FrLm"].iter().any(|p| r.line(p).is_some_and(|l| !l.passed()))),
    );
    c.result("broken-lm is alpha-unstable in checked mode", first_instability(6, &broken_lm_model()));
    c.result("raw-ren is alpha-unstable in checked mode", first_instability(9, &raw_ren_model()));
    let term6_stable = term_model(6).and_then(|m| first_instability(6, &m)).map(|b| !b);
    c.result("law-abiding term6 stays stable", term6_stable);
    let b = broken_swap_comodel(DEPTH);
    let cfg = CheckCfg::with_seed(SEED, 500);
    c.result(
        "broken-sw fails SwLm∞",
        check_coprop(&b, CoProp::D(DProp::SwLm), Rebind::Swap, &cfg).map(|l| !l.passed()),
    );
    let dest_l = corec(5, &b)
        .and_then(|k| comorphism_report(5, &b, &|s| k.apply(s), &cfg, DEPTH))
        .map(|r| r.line("dest-L").is_some_and(|l| !l.passed() && l.cex.is_some()));
    c.result("broken-sw breaks the abstraction clause", dest_l);
    c
}

type Criterion = (&'static str, fn() -> Crit);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("term-model law suites", term_suites),
        ("initiality and morphisms", initiality),
        ("transform edges", edges),
        ("quasi-definability", quasi),
        ("separations", separations),
        ("examples against oracles", examples),
        ("corecursion", corecursion),
        ("negative controls", controls),
    ];
    let mut all = true;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let c = f();
        let ok = c.fails.is_empty();
        all &= ok;
        println!(
            "CRITERION {} {} {name} checks={} time={:.1}s",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            c.checks,
            t0.elapsed().as_secs_f64()
        );
        for f in &c.fails {
            println!("  failed: {f}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
