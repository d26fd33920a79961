use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lam_core::analysis::{
    bt_recip_sum, chain_bound, chain_count, dickman_rho, distribution_report,
    power_exact_divisor_count, prop_bound_eval, smooth_count, DistributionParams,
};
use lam_core::model::{
    coefficient, coefficient_max, excess_report, expected_level_size, prob_no_hit, ExcessParams,
};
use lam_core::pratt::{self, build_tree, render_tree, LevelMode, PrattNode, TreeFormat};
use lam_core::rangesieve::{
    read_table, sieve_heights, sieve_l, sieve_lambda, write_table, DEFAULT_MEM_BUDGET,
};
use lam_core::verify::{run_suite, SUITES};
use lam_core::{big_l, carmichael_lambda, lambda_chain, LambdaVariant, SieveConfig, TableKind};

const MIN_BUDGET: u64 = 64 << 20;

#[derive(Parser)]
#[command(name = "lam", version, about = "Iterated Carmichael lambda toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, value_enum, default_value_t = Variant::Standard)]
    variant: Variant,
    /// Worker threads for the range sieves [env: LAM_WORKERS] [default: available parallelism]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Memory budget for table builds; accepts K, M, G suffixes (binary)
    #[arg(long, global = true, value_parser = parse_budget, default_value_t = DEFAULT_MEM_BUDGET)]
    mem_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Standard,
    TwoAdic,
}

impl From<Variant> for LambdaVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Standard => LambdaVariant::Standard,
            Variant::TwoAdic => LambdaVariant::TwoAdic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Dot => "dot",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lambda,
    #[value(name = "L")]
    L,
    #[value(name = "H")]
    H,
}

#[derive(Subcommand)]
enum Cmd {
    /// Carmichael lambda of n
    Lambda { n: u64 },
    /// The iterates n, λ(n), …, 1
    Chain { n: u64 },
    /// Number of λ iterations taking n to 1
    #[command(name = "L")]
    L { n: u64 },
    /// Pratt tree of a prime
    Pratt { p: u64 },
    /// Pratt tree height H(p)
    Height { p: u64 },
    /// Node count at each depth of the Pratt tree
    Levels {
        p: u64,
        /// Count distinct primes per level instead of node instances
        #[arg(long)]
        distinct: bool,
    },
    /// Largest Σ(α - 1) along a Pratt branch
    Excess { p: u64 },
    /// Split of L(p) - H(p) over the primes up to a limit, per dyadic bucket
    ExcessReport {
        #[arg(long)]
        limit: u64,
        /// Also report the excess carried by edges into primes above Y
        #[arg(long)]
        y_cut: Option<u64>,
        /// Write the CSV here instead of standard output
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a lambda, L, or H table and write it in the binary table format
    Sieve {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-decade statistics of L and H
    Stats {
        #[arg(long, required_unless_present = "table")]
        limit: Option<u64>,
        /// Reuse a previously written L table
        #[arg(long)]
        table: Option<PathBuf>,
        /// Write the CSV here instead of standard output
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = DistributionParams::default().c)]
        c: f64,
        #[arg(long, default_value_t = DistributionParams::default().gamma)]
        gamma: f64,
    },
    /// Dickman's function ρ(u), 0 <= u <= 20
    Dickman { u: f64 },
    /// Ψ(x, z): count of n <= x with every prime factor <= z
    Smooth { x: u64, z: u64 },
    /// Σ 1/p over primes p <= x with p ≡ 1 (mod m)
    Btsum { x: u64, m: u64 },
    /// Chains of primes p_k -> … -> p_0 <= x with q^alpha | p_k - 1
    Chains {
        x: u64,
        q: u64,
        alpha: u32,
        k: u32,
        /// Constant for the reported bound x (c log log x)^k / q^alpha
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Count of n <= x divisible by p^a for some prime p > Y
    Powers {
        x: u64,
        #[arg(value_name = "Y")]
        y: u64,
        a: u32,
    },
    /// x (c y)^((log x)^γ + 1) / 2^(b (log x)^γ ψ - 2) with y = log log x, and its ratio to x
    Propbound {
        x: f64,
        gamma: f64,
        b: f64,
        psi: f64,
        c: f64,
    },
    /// Heuristic quantities
    Model {
        #[command(subcommand)]
        op: ModelCmd,
    },
    /// Run a named property suite ("all" runs every suite)
    Verify {
        #[arg(long)]
        suite: String,
        /// Scale for the exhaustive ranges
        #[arg(long, default_value_t = 100_000)]
        limit: u64,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// f(c) = c + c ln(e/c) / d
    Coeff { c: f64, d: f64 },
    /// Maximum of f over (0, e]
    Coeffmax { d: f64 },
    /// Chance that none of n primes is 1 mod r^a
    Prob { n: u64, r: u64, a: u32 },
    /// Expected Pratt level size y^n / n!
    Levelsize { y: f64, n: u32 },
}

fn parse_budget(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let upper = t.to_ascii_uppercase();
    let digits = upper.trim_end_matches("IB").trim_end_matches('B');
    let (num, shift) = match digits.chars().last() {
        Some('K') => (&digits[..digits.len() - 1], 10),
        Some('M') => (&digits[..digits.len() - 1], 20),
        Some('G') => (&digits[..digits.len() - 1], 30),
        _ => (digits, 0),
    };
    let n: u64 = num.trim().parse().map_err(|_| format!("`{s}` is not a byte count"))?;
    let bytes = n.checked_shl(shift).filter(|b| b >> shift == n).ok_or("byte count overflows")?;
    if bytes < MIN_BUDGET {
        return Err(format!("memory budget must be at least 64 MiB, got {bytes} bytes"));
    }
    Ok(bytes)
}

struct Ctx {
    variant: LambdaVariant,
    cfg: SieveConfig,
    format: Format,
    out: BufWriter<io::StdoutLock<'static>>,
}

impl Ctx {
    /// Fails with a usage error when `--format` is not one of `allowed`.
    fn formats(&self, allowed: &[Format]) {
        if !allowed.contains(&self.format) {
            let names: Vec<_> = allowed.iter().map(|f| f.name()).collect();
            Cli::command()
                .error(
                    clap::error::ErrorKind::InvalidValue,
                    format!(
                        "--format {} is not available here; use one of: {}",
                        self.format.name(),
                        names.join(", ")
                    ),
                )
                .exit();
        }
    }

    /// A single value: bare in text mode, an object in JSON mode.
    fn scalar(&mut self, text: impl std::fmt::Display, obj: serde_json::Value) -> anyhow::Result<()> {
        self.formats(&[Format::Text, Format::Json]);
        match self.format {
            Format::Json => writeln!(self.out, "{obj}")?,
            _ => writeln!(self.out, "{text}")?,
        }
        Ok(())
    }
}

fn write_pratt_text(out: &mut impl Write, node: &PrattNode, alpha: Option<u32>, depth: usize) -> io::Result<()> {
    let indent = "  ".repeat(depth);
    match alpha {
        Some(a) if a > 1 => writeln!(out, "{indent}{}^{a}", node.prime())?,
        _ => writeln!(out, "{indent}{}", node.prime())?,
    }
    for e in node.children() {
        write_pratt_text(out, &e.node, Some(e.alpha), depth + 1)?;
    }
    Ok(())
}

fn csv_sink(path: &Option<PathBuf>) -> anyhow::Result<Option<BufWriter<File>>> {
    path.as_ref()
        .map(|p| {
            File::create(p)
                .map(BufWriter::new)
                .with_context(|| format!("cannot create {}", p.display()))
        })
        .transpose()
}

/// `--workers` wins over `LAM_WORKERS`, which wins over the machine default.
fn resolve_workers(flag: Option<u64>) -> Option<usize> {
    if flag.is_some() {
        return flag.map(|w| w as usize);
    }
    let raw = std::env::var("LAM_WORKERS").ok()?;
    match raw.trim().parse::<usize>() {
        Ok(w) if w >= 1 => Some(w),
        _ => Cli::command()
            .error(
                clap::error::ErrorKind::InvalidValue,
                format!("LAM_WORKERS must be an integer >= 1, got `{raw}`"),
            )
            .exit(),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let g = cli.global;
    let mut cfg = SieveConfig::default().with_mem_budget(g.mem_budget);
    if let Some(w) = resolve_workers(g.workers) {
        cfg = cfg.with_workers(w);
    }
    let mut ctx = Ctx {
        variant: g.variant.into(),
        cfg,
        format: g.format,
        out: BufWriter::new(io::stdout().lock()),
    };
    let v = ctx.variant;
    let vname = v.to_string();
    match cli.cmd {
        Cmd::Lambda { n } => {
            let lam = carmichael_lambda(n, v)?;
            ctx.scalar(lam, json!({"n": n, "variant": vname, "lambda": lam}))?;
        }
        Cmd::Chain { n } => {
            let chain = lambda_chain(n, v)?;
            let text: Vec<String> = chain.values().iter().map(u64::to_string).collect();
            ctx.scalar(
                text.join(" "),
                json!({"n": n, "variant": vname, "chain": chain.values(), "L": chain.len()}),
            )?;
        }
        Cmd::L { n } => {
            let l = big_l(n, v)?;
            ctx.scalar(l, json!({"n": n, "variant": vname, "L": l}))?;
        }
        Cmd::Pratt { p } => {
            ctx.formats(&[Format::Text, Format::Json, Format::Dot]);
            let tree = build_tree(p, None)?;
            match ctx.format {
                Format::Json => writeln!(ctx.out, "{}", render_tree(&tree, TreeFormat::Json))?,
                Format::Dot => write!(ctx.out, "{}", render_tree(&tree, TreeFormat::Dot))?,
                _ => write_pratt_text(&mut ctx.out, tree.root(), None, 0)?,
            }
        }
        Cmd::Height { p } => {
            let h = pratt::height(p)?;
            ctx.scalar(h, json!({"p": p, "H": h}))?;
        }
        Cmd::Levels { p, distinct } => {
            ctx.formats(&[Format::Text, Format::Json, Format::Csv]);
            let mode = if distinct { LevelMode::DistinctPrimes } else { LevelMode::Instances };
            let counts = pratt::level_counts(p, mode)?;
            match ctx.format {
                Format::Json => writeln!(ctx.out, "{}", json!({"p": p, "levels": counts}))?,
                Format::Csv => {
                    writeln!(ctx.out, "level,count")?;
                    for (i, c) in counts.iter().enumerate() {
                        writeln!(ctx.out, "{i},{c}")?;
                    }
                }
                _ => {
                    let text: Vec<String> = counts.iter().map(u64::to_string).collect();
                    writeln!(ctx.out, "{}", text.join(" "))?;
                }
            }
        }
        Cmd::Excess { p } => {
            let e = pratt::branch_excess(p)?;
            ctx.scalar(e, json!({"p": p, "branch_excess": e}))?;
        }
        Cmd::ExcessReport { limit, y_cut, csv } => {
            ctx.formats(&[Format::Text, Format::Csv, Format::Json]);
            let l = sieve_l(limit, v, &ctx.cfg)?;
            let h = sieve_heights(limit, &ctx.cfg)?;
            let rep = excess_report(&l, &h, ExcessParams { y_cut })?;
            if ctx.format == Format::Json {
                writeln!(ctx.out, "{}", serde_json::to_string(&rep)?)?;
            }
            match csv_sink(&csv)? {
                Some(mut f) => {
                    rep.write_csv(&mut f)?;
                    f.flush()?;
                }
                None if ctx.format != Format::Json => rep.write_csv(&mut ctx.out)?,
                None => {}
            }
        }
        Cmd::Sieve { kind, limit, out } => {
            let table = match kind {
                Kind::Lambda => sieve_lambda(limit, v, &ctx.cfg)?,
                Kind::L => sieve_l(limit, v, &ctx.cfg)?,
                Kind::H => sieve_heights(limit, &ctx.cfg)?,
            };
            write_table(&table, &out).with_context(|| format!("cannot write {}", out.display()))?;
            eprintln!("wrote {} table for n <= {limit} to {}", table.kind().name(), out.display());
        }
        Cmd::Stats { limit, table, csv, c, gamma } => {
            ctx.formats(&[Format::Text, Format::Csv, Format::Json]);
            let l = match &table {
                Some(path) => {
                    let t = read_table(path).with_context(|| format!("cannot read {}", path.display()))?;
                    t.require_kind(TableKind::L8)?;
                    if let Some(n) = limit.filter(|&n| n != t.limit()) {
                        bail!("--limit {n} does not match the table limit {}", t.limit());
                    }
                    t
                }
                None => sieve_l(limit.expect("clap requires --limit without --table"), v, &ctx.cfg)?,
            };
            let h = sieve_heights(l.limit(), &ctx.cfg)?;
            let rep = distribution_report(&l, &h, DistributionParams { c, gamma })?;
            if ctx.format == Format::Json {
                writeln!(ctx.out, "{}", serde_json::to_string(&rep)?)?;
            }
            match csv_sink(&csv)? {
                Some(mut f) => {
                    rep.write_csv(&mut f)?;
                    f.flush()?;
                }
                None if ctx.format != Format::Json => rep.write_csv(&mut ctx.out)?,
                None => {}
            }
        }
        Cmd::Dickman { u } => {
            let r = dickman_rho(u)?;
            ctx.scalar(r, json!({"u": u, "rho": r}))?;
        }
        Cmd::Smooth { x, z } => {
            let n = smooth_count(x, z)?;
            ctx.scalar(n, json!({"x": x, "z": z, "psi": n}))?;
        }
        Cmd::Btsum { x, m } => {
            let s = bt_recip_sum(x, m)?;
            ctx.scalar(
                format!("{} {}", s.sum, s.count),
                json!({"x": x, "m": m, "sum": s.sum, "count": s.count}),
            )?;
        }
        Cmd::Chains { x, q, alpha, k, c } => {
            let n = chain_count(x, q, alpha, k)?;
            let bound = chain_bound(x as f64, q, alpha, k, c);
            ctx.scalar(
                format!("{} {} {}", n.distinct, n.with_multiplicity, bound),
                json!({"x": x, "q": q, "alpha": alpha, "k": k, "c": c,
                       "distinct": n.distinct, "with_multiplicity": n.with_multiplicity,
                       "bound": bound}),
            )?;
        }
        Cmd::Powers { x, y, a } => {
            let n = power_exact_divisor_count(x, y, a)?;
            ctx.scalar(n, json!({"x": x, "Y": y, "a": a, "count": n}))?;
        }
        Cmd::Propbound { x, gamma, b, psi, c } => {
            let r = prop_bound_eval(x, gamma, b, psi, c)?;
            ctx.scalar(
                format!("{} {} {}", r.value, r.ratio, r.ln_value),
                json!({"x": x, "value": r.value, "ratio": r.ratio, "ln_value": r.ln_value}),
            )?;
        }
        Cmd::Model { op } => match op {
            ModelCmd::Coeff { c, d } => {
                let f = coefficient(c, d)?;
                ctx.scalar(f, json!({"c": c, "d": d, "f": f}))?;
            }
            ModelCmd::Coeffmax { d } => {
                let m = coefficient_max(d)?;
                ctx.scalar(format!("{} {}", m.c_star, m.f_star), serde_json::to_value(m)?)?;
            }
            ModelCmd::Prob { n, r, a } => {
                let pr = prob_no_hit(n, r, a)?;
                ctx.scalar(pr, json!({"n": n, "r": r, "a": a, "prob": pr}))?;
            }
            ModelCmd::Levelsize { y, n } => {
                let s = expected_level_size(y, n)?;
                ctx.scalar(s, json!({"y": y, "n": n, "expected": s}))?;
            }
        },
        Cmd::Verify { suite, limit } => {
            ctx.formats(&[Format::Text, Format::Json]);
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut outcomes = Vec::new();
            for name in names {
                let o = run_suite(name, limit, &ctx.cfg)?;
                if ctx.format == Format::Text {
                    writeln!(ctx.out, "{o}")?;
                    ctx.out.flush()?;
                }
                outcomes.push(o);
            }
            if ctx.format == Format::Json {
                writeln!(ctx.out, "{}", serde_json::to_string(&outcomes)?)?;
            }
            ctx.out.flush()?;
            return Ok(outcomes.iter().all(|o| o.passed));
        }
    }
    ctx.out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lam: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
