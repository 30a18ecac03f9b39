use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nomrec_core::corecursors::{
    broken_swap_comodel, check_coprops, comorphism_report, corec, iterm_comodel, psubst_comodel, sum_comodel,
};
use nomrec_core::counterexamples::{adjoin_model, obstruction_r1_with, obstruction_r2, stream_model};
use nomrec_core::examples::{
    broken_lm_model, enf, hoas_encode, hoas_model, noccs, noccs_model, noccs_ren_model, pitts_submodel, raw_ren_model,
    sem_direct, sem_model, sem_via_submodel, size_model, size_of, subst_via_r1, Env as DEnv,
};
use nomrec_core::infinitary::{
    co_alpha_eq, co_fresh_auto, co_fv_upto, parse_spec_with, psubst, truncate_with, Env, EqMode,
};
use nomrec_core::models::{check_props, props_of, term_model_full, CheckCfg, PropId};
use nomrec_core::recursors::{rec, Mode};
use nomrec_core::{parse_perm, parse_with, Model, Names, NomError, PropReport, Term, Var};

#[derive(Parser)]
#[command(name = "nomrec", version, about = "Nominal recursion and corecursion over lambda terms")]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug)]
struct Config {
    #[arg(long, global = true, env = "NOMREC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, env = "NOMREC_SAMPLES", default_value_t = 300, value_parser = positive)]
    samples: usize,
    #[arg(long, global = true, env = "NOMREC_DEPTH", default_value_t = 30, value_parser = positive)]
    depth: usize,
    #[arg(long, global = true, env = "NOMREC_FCB_CANDIDATES", default_value_t = 8, value_parser = positive)]
    fcb_candidates: usize,
    #[arg(long, global = true, env = "NOMREC_PROBES", default_value_t = 3, value_parser = positive)]
    probes: usize,
    /// Fold an α-variant alongside each input and fail on disagreement.
    #[arg(long, global = true, env = "NOMREC_CHECKED")]
    checked: bool,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl Config {
    fn check(&self) -> CheckCfg {
        CheckCfg {
            seed: self.seed,
            samples: self.samples,
            fcb_candidates: self.fcb_candidates,
            probes: self.probes,
            ..CheckCfg::default()
        }
    }

    fn echo(&self) -> String {
        format!(
            "# config seed={} samples={} depth={} fcb_candidates={} probes={} checked={}",
            self.seed, self.samples, self.depth, self.fcb_candidates, self.probes, self.checked
        )
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one term operator: subst T S Y | swap T X Y | perm T P | rename T X Y | fv T | fresh X T | alpha-eq T S
    Op { name: String, args: Vec<String> },
    /// Check a law suite: a recursor id (1-9), `all`, or comma-separated law names
    Laws { model: String, suite: String },
    /// Apply recursor i with an example model to a term
    Recursor { i: usize, model: String, term: String },
    /// Apply corecursor i to a state of a coterm spec file
    Corecursor { i: usize, spec: String, state: String },
    /// Run an obstruction suite: r1 or r2
    Counterexample { which: String },
    /// Run an example function: noccs T X | size T | enf T | hoas T | sem T | subst T S Y
    Example { name: String, args: Vec<String> },
    /// Coterm operations on spec files: alpha-eq A B | fresh X A | fv A | psubst A Y B [Y B ...]
    Coterm { op: String, args: Vec<String> },
}

/// Failure classes: usage problems exit 2, everything else exits 1.
enum CliErr {
    Usage(String),
    Run(String),
}

impl From<NomError> for CliErr {
    fn from(e: NomError) -> Self {
        match e {
            NomError::UnknownProperty(_)
            | NomError::BadRecursor(_)
            | NomError::BadCorecursor(_)
            | NomError::Spec(_) => CliErr::Usage(e.to_string()),
            _ => CliErr::Run(e.to_string()),
        }
    }
}

fn usage(m: impl Into<String>) -> CliErr {
    CliErr::Usage(m.into())
}

/// Report text plus whether every check passed.
struct Out {
    text: String,
    ok: bool,
}

impl Out {
    fn new() -> Out {
        Out { text: String::new(), ok: true }
    }
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
    fn report(&mut self, r: &PropReport) {
        let _ = write!(self.text, "{r}");
        self.ok &= r.ok();
    }
}

fn arity(args: &[String], n: usize, form: &str) -> Result<(), CliErr> {
    if args.len() == n {
        Ok(())
    } else {
        Err(usage(format!("expected: {form}")))
    }
}

fn term(src: &str, names: &mut Names) -> Result<Term, CliErr> {
    parse_with(src, names).map_err(|e| usage(format!("in `{src}`: {e}")))
}

fn var(s: &str, names: &mut Names) -> Result<Var, CliErr> {
    let ok = s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(names.intern(s))
    } else {
        Err(usage(format!("not a variable: `{s}`")))
    }
}

fn legend(names: &Names, upto: usize) -> String {
    let parts: Vec<String> = (0..upto as u32).map(|i| format!("{}={}", names.name(Var(i)), Var(i))).collect();
    format!("# names {}", parts.join(" "))
}

fn run_op(name: &str, args: &[String], out: &mut Out) -> Result<(), CliErr> {
    let mut n = Names::new();
    let res = match name {
        "subst" => {
            arity(args, 3, "op subst T S Y")?;
            let t = term(&args[0], &mut n)?;
            let s = term(&args[1], &mut n)?;
            let y = var(&args[2], &mut n)?;
            n.show(&t.subst(&s, y))
        }
        "swap" => {
            arity(args, 3, "op swap T X Y")?;
            let t = term(&args[0], &mut n)?;
            let (x, y) = (var(&args[1], &mut n)?, var(&args[2], &mut n)?);
            n.show(&t.swap(x, y))
        }
        "perm" => {
            arity(args, 2, "op perm T P")?;
            let t = term(&args[0], &mut n)?;
            let p = parse_perm(&args[1], &mut |s| n.intern(s)).map_err(|e| usage(format!("in `{}`: {e}", args[1])))?;
            n.show(&t.permute(&p))
        }
        "rename" => {
            arity(args, 3, "op rename T X Y  (replace free Y by X)")?;
            let t = term(&args[0], &mut n)?;
            let (x, y) = (var(&args[1], &mut n)?, var(&args[2], &mut n)?);
            n.show(&t.rename(x, y))
        }
        "fv" => {
            arity(args, 1, "op fv T")?;
            let t = term(&args[0], &mut n)?;
            let fv: Vec<String> = t.fv_set().into_iter().map(|v| n.name(v)).collect();
            format!("{{{}}}", fv.join(", "))
        }
        "fresh" => {
            arity(args, 2, "op fresh X T")?;
            let x = var(&args[0], &mut n)?;
            let t = term(&args[1], &mut n)?;
            t.fresh(x).to_string()
        }
        "alpha-eq" => {
            arity(args, 2, "op alpha-eq T S")?;
            let t = term(&args[0], &mut n)?;
            let s = term(&args[1], &mut n)?;
            nomrec_core::alpha_eq(&t, &s).to_string()
        }
        _ => return Err(usage(format!("unknown operator `{name}`"))),
    };
    out.line(res);
    Ok(())
}

fn suite_of<C: Clone + 'static>(m: &Model<C>, suite: &str) -> Result<Vec<PropId>, CliErr> {
    if let Ok(i) = suite.parse::<usize>() {
        return Ok(props_of(i)?);
    }
    if suite == "all" {
        let sig = m.signature();
        return Ok(PropId::ALL
            .iter()
            .copied()
            .filter(|p| p.syms().is_subset(sig) && (!p.needs_support() || m.supp.is_some()))
            .collect());
    }
    suite.split(',').map(|s| PropId::from_name(s.trim()).map_err(CliErr::from)).collect()
}

fn laws_of<C: Clone + 'static>(m: Model<C>, suite: &str, cfg: &Config, out: &mut Out) -> Result<(), CliErr> {
    let props = suite_of(&m, suite)?;
    out.report(&check_props(&m, &props, &cfg.check())?);
    Ok(())
}

fn co_id(suite: &str) -> Result<usize, CliErr> {
    suite.parse().map_err(|_| usage(format!("comodel suites are corecursor ids, got `{suite}`")))
}

const MODELS: &str =
    "term, noccs, noccs-ren, size, hoas, sem, pitts, stream, adjoin, broken-lm, raw-ren, iterm, psubst, broken-sw";

fn run_laws(model: &str, suite: &str, cfg: &Config, out: &mut Out) -> Result<(), CliErr> {
    match model {
        "term" => laws_of(term_model_full(), suite, cfg, out),
        "noccs" => laws_of(noccs_model(), suite, cfg, out),
        "noccs-ren" => laws_of(noccs_ren_model(), suite, cfg, out),
        "size" => laws_of(size_model(), suite, cfg, out),
        "hoas" => laws_of(hoas_model(), suite, cfg, out),
        "sem" => laws_of(sem_model(), suite, cfg, out),
        "pitts" => laws_of(pitts_submodel(), suite, cfg, out),
        "stream" => laws_of(stream_model(), suite, cfg, out),
        "adjoin" => laws_of(adjoin_model(), suite, cfg, out),
        "broken-lm" => laws_of(broken_lm_model(), suite, cfg, out),
        "raw-ren" => laws_of(raw_ren_model(), suite, cfg, out),
        "iterm" => {
            out.report(&check_coprops(&iterm_comodel(cfg.depth), co_id(suite)?, &cfg.check())?);
            Ok(())
        }
        "psubst" => {
            let cm = sum_comodel(&psubst_comodel(cfg.depth), cfg.depth);
            out.report(&check_coprops(&cm, co_id(suite)?, &cfg.check())?);
            Ok(())
        }
        "broken-sw" => {
            out.report(&check_coprops(&broken_swap_comodel(cfg.depth), co_id(suite)?, &cfg.check())?);
            Ok(())
        }
        _ => Err(usage(format!("unknown model `{model}`; known: {MODELS}"))),
    }
}

fn fold_with<C: Clone + Send + Sync + 'static>(
    i: usize,
    m: Model<C>,
    t: &Term,
    cfg: &Config,
    show: impl Fn(&C) -> String,
    out: &mut Out,
) -> Result<(), CliErr> {
    let mode = if cfg.checked { Mode::Checked } else { Mode::Plain };
    let r = rec(i, &m)?.with_mode(mode);
    let c = r.apply(t)?;
    out.line(show(&c));
    Ok(())
}

fn run_recursor(i: usize, model: &str, src: &str, cfg: &Config, out: &mut Out) -> Result<(), CliErr> {
    let mut n = Names::new();
    let t = term(src, &mut n)?;
    let names = n.clone();
    match model {
        "term" => fold_with(i, term_model_full(), &t, cfg, |c| names.show(c), out)?,
        "broken-lm" => fold_with(i, broken_lm_model(), &t, cfg, |c| names.show(c), out)?,
        "raw-ren" => fold_with(i, raw_ren_model(), &t, cfg, |c| names.show(c), out)?,
        "noccs" => {
            let m = noccs_model();
            let show = m.show.clone();
            fold_with(i, m, &t, cfg, |c| show(c), out)?
        }
        "size" => fold_with(i, size_model(), &t, cfg, |c| c.to_string(), out)?,
        "hoas" => {
            let m = hoas_model();
            let show = m.show.clone();
            fold_with(i, m, &t, cfg, |c| show(c), out)?
        }
        "sem" => {
            let m = sem_model();
            let show = m.show.clone();
            fold_with(i, m, &t, cfg, |c| show(c), out)?
        }
        _ => {
            return Err(usage(format!(
                "unknown recursion model `{model}`; known: term, noccs, size, hoas, sem, broken-lm, raw-ren"
            )))
        }
    }
    out.line(legend(&n, t.all_names().len().max(1)));
    Ok(())
}

fn read_spec(path: &str, root: Option<&str>, names: &mut Names) -> Result<nomrec_core::infinitary::CoTerm, CliErr> {
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
    let src = match root {
        Some(r) => {
            let mut s: String = src
                .lines()
                .filter(|l| !l.split('#').next().unwrap_or("").trim_start().starts_with("root"))
                .map(|l| format!("{l}\n"))
                .collect();
            s.push_str(&format!("root {r}\n"));
            s
        }
        None => src,
    };
    parse_spec_with(&src, names).map_err(|e| usage(format!("{path}: {e}")))
}

fn run_corecursor(i: usize, spec: &str, state: &str, cfg: &Config, out: &mut Out) -> Result<(), CliErr> {
    let mut n = Names::new();
    let t = read_spec(spec, Some(state), &mut n)?;
    let cm = iterm_comodel(cfg.depth);
    let c = corec(i, &cm)?;
    let g = c.apply(&t);
    let path: Vec<String> = c.path.iter().map(|k| format!("cr{k}")).collect();
    out.line(format!("# path {}", path.join(" > ")));
    out.line(truncate_with(&g, cfg.depth, &|v| n.name(v)));
    let same = co_alpha_eq(&g, &t, EqMode::auto(&[&g, &t], cfg.depth))?;
    out.line(format!("PROP identity {} n=1 hits=1", if same { "PASS" } else { "FAIL" }));
    out.ok &= same;
    let r = comorphism_report(i, &cm, &|s| c.apply(s), &cfg.check(), cfg.depth)?;
    out.report(&r);
    Ok(())
}

fn run_example(name: &str, args: &[String], out: &mut Out) -> Result<(), CliErr> {
    let mut n = Names::new();
    match name {
        "noccs" => {
            arity(args, 2, "example noccs T X")?;
            let t = term(&args[0], &mut n)?;
            let x = var(&args[1], &mut n)?;
            out.line(noccs(&t, x).to_string());
        }
        "size" => {
            arity(args, 1, "example size T")?;
            out.line(size_of(&term(&args[0], &mut n)?).to_string());
        }
        "enf" => {
            arity(args, 1, "example enf T")?;
            out.line(enf(&term(&args[0], &mut n)?).to_string());
        }
        "hoas" => {
            arity(args, 1, "example hoas T")?;
            let t = term(&args[0], &mut n)?;
            out.line(hoas_encode(&t).to_string());
            out.line(legend(&n, t.all_names().len().max(1)));
        }
        "sem" => {
            arity(args, 1, "example sem T")?;
            let t = term(&args[0], &mut n)?;
            let mut agree = true;
            for k in 0..5u8 {
                let env = DEnv::constant(k);
                let (a, b) = (sem_direct(&t, &env), sem_via_submodel(&t, &env));
                agree &= a == b;
                out.line(format!("env=const {k} value={a} via-submodel={b}"));
            }
            out.line(format!("PROP route-agreement {} n=5 hits=5", if agree { "PASS" } else { "FAIL" }));
            out.ok &= agree;
        }
        "subst" => {
            arity(args, 3, "example subst T S Y")?;
            let t = term(&args[0], &mut n)?;
            let s = term(&args[1], &mut n)?;
            let y = var(&args[2], &mut n)?;
            let r = subst_via_r1(&t, &s, y);
            let ok = nomrec_core::alpha_eq(&r, &t.subst(&s, y));
            out.line(n.show(&r));
            out.line(format!("PROP matches-subst {} n=1 hits=1", if ok { "PASS" } else { "FAIL" }));
            out.ok &= ok;
        }
        _ => return Err(usage(format!("unknown example `{name}`; known: noccs, size, enf, hoas, sem, subst"))),
    }
    Ok(())
}

fn run_coterm(op: &str, args: &[String], cfg: &Config, out: &mut Out) -> Result<(), CliErr> {
    let mut n = Names::new();
    let k = cfg.depth;
    match op {
        "alpha-eq" => {
            arity(args, 2, "coterm alpha-eq A B")?;
            let a = read_spec(&args[0], None, &mut n)?;
            let b = read_spec(&args[1], None, &mut n)?;
            let mode = EqMode::auto(&[&a, &b], k);
            out.line(format!("{} mode={}", co_alpha_eq(&a, &b, mode)?, mode.label()));
        }
        "fresh" => {
            arity(args, 2, "coterm fresh X A")?;
            let x = var(&args[0], &mut n)?;
            let a = read_spec(&args[1], None, &mut n)?;
            out.line(co_fresh_auto(x, &a, k).to_string());
        }
        "fv" => {
            arity(args, 1, "coterm fv A")?;
            let a = read_spec(&args[0], None, &mut n)?;
            let fv: Vec<String> =
                co_fv_upto(&a, if a.is_regular() { usize::MAX } else { k }).into_iter().map(|v| n.name(v)).collect();
            out.line(format!("{{{}}}", fv.join(", ")));
        }
        "psubst" => {
            if args.len() < 3 || args.len().is_multiple_of(2) {
                return Err(usage("expected: coterm psubst A Y B [Y B ...]"));
            }
            let a = read_spec(&args[0], None, &mut n)?;
            let mut rho = Env::identity();
            for pair in args[1..].chunks(2) {
                let y = var(&pair[0], &mut n)?;
                rho = rho.with(y, read_spec(&pair[1], None, &mut n)?);
            }
            out.line(truncate_with(&psubst(&a, &rho)?, k, &|v| n.name(v)));
        }
        _ => return Err(usage(format!("unknown coterm operation `{op}`; known: alpha-eq, fresh, fv, psubst"))),
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut Out) -> Result<(), CliErr> {
    let cfg = &cli.cfg;
    match &cli.cmd {
        Cmd::Op { name, args } => run_op(name, args, out),
        Cmd::Laws { model, suite } => run_laws(model, suite, cfg, out),
        Cmd::Recursor { i, model, term } => run_recursor(*i, model, term, cfg, out),
        Cmd::Corecursor { i, spec, state } => run_corecursor(*i, spec, state, cfg, out),
        Cmd::Counterexample { which } => {
            let r = match which.as_str() {
                "r1" => obstruction_r1_with(cfg.samples, cfg.seed, cfg.fcb_candidates),
                "r2" => obstruction_r2(cfg.samples, cfg.seed),
                _ => return Err(usage(format!("unknown counterexample `{which}`; known: r1, r2"))),
            };
            out.report(&r);
            Ok(())
        }
        Cmd::Example { name, args } => run_example(name, args, out),
        Cmd::Coterm { op, args } => run_coterm(op, args, cfg, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out::new();
    out.line(cli.cfg.echo());
    let res = run(&cli, &mut out);
    print!("{}", out.text);
    match res {
        Ok(()) if out.ok => ExitCode::SUCCESS,
        Ok(()) => ExitCode::from(1),
        Err(CliErr::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliErr::Run(m)) => {
            println!("ERROR {m}");
            ExitCode::from(1)
        }
    }
}
