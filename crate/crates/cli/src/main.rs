//! Command-line front end: classification, rank, growth exponent and exact
//! support counting for m-automata given as AUT files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cobham_lab::arborescence::{arborize_with_cap, rank_of_sparseness, DEFAULT_STATE_CAP};
use cobham_lab::corpus::{self, CorpusEntry};
use cobham_lab::counting::{count_support, growth_report, count_power_table_with_budget, Method, DEFAULT_TABLE_BUDGET};
use cobham_lab::report::check_entry;
use cobham_lab::sequence::{eval_term_big, support_bruteforce, DEFAULT_BRUTE_BUDGET};
use cobham_lab::spectral::checks::wk_diagnostic_table;
use cobham_lab::spectral::matrix::{count_walks_with_budget, cumulative, omega_table, table_csv, DEFAULT_WALK_BUDGET};
use cobham_lab::spectral::perron::perron_certificate;
use cobham_lab::spectral::poly::format_poly;
use cobham_lab::spectral::witness::{witness_family_with_budget, DEFAULT_MEMBER_BUDGET};
use cobham_lab::spectral::{growth_exponent, strongly_connected_subdigraph};
use cobham_lab::structure::{classify_sparse, tied_vertices};
use cobham_lab::{parse_automaton, serialize_automaton, validate, Automaton};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cobham-lab", version, about = "Analyze automatic sequences given by m-automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides the default budget of the command.
    #[arg(long, global = true, env = "COBHAM_LAB_BUDGET")]
    budget: Option<u64>,
    /// Counting method: dp, brute or matrix.
    #[arg(long, global = true, default_value = "dp")]
    method: Method,
    /// Write output to a file instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the defining properties of an m-automaton.
    Validate { aut: String },
    /// Evaluate terms of the sequence.
    Eval {
        aut: String,
        #[arg(required = true)]
        k: Vec<BigUint>,
    },
    /// Sparse/non-sparse verdict, tied states and components.
    Classify { aut: String },
    /// Rank of sparseness of a sparse automaton.
    Rank { aut: String },
    /// Unfold a tied-free automaton into a cycle arborescence (AUT output).
    Arborize { aut: String },
    /// Growth exponent B and per-component spectral data.
    Exponent { aut: String },
    /// Perron certificate of each tied component.
    Perron { aut: String },
    /// Exact number of nonzero terms with index in [1, N].
    Count {
        aut: String,
        n: BigUint,
        /// List the members (brute force only).
        #[arg(long)]
        members: bool,
    },
    /// Counts at N = m^k - 1 for k = 1..k_max with growth fits.
    Table {
        aut: String,
        #[arg(long, default_value_t = 60)]
        k_max: usize,
    },
    /// Number of walks of length n between two states.
    Walks {
        aut: String,
        from: String,
        to: String,
        n: usize,
        /// Count walks of length at most n.
        #[arg(long)]
        cumulative: bool,
        /// Emit the table for every length up to n as CSV.
        #[arg(long)]
        table: bool,
    },
    /// Family of 2^k support members built from a tied state.
    Witness { aut: String, state: String, k: usize },
    /// The W_k convolution diagnostic for a list of tied states.
    Wk {
        aut: String,
        k: usize,
        /// Comma-separated tied states (default: all tied states).
        #[arg(long, value_delimiter = ',')]
        states: Vec<String>,
    },
    /// Recompute the expected values of corpus entries.
    Report {
        /// Corpus ids or AUT paths with a sibling .json file (default: whole corpus).
        entries: Vec<String>,
        /// Random bounds per entry at which dp and brute force are compared.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
    /// Output is still printed, but the run counts as a domain failure.
    Failed(String),
}

type CliResult = Result<String, CliError>;

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn bundled(id: &str) -> Option<CorpusEntry> {
    corpus::entries().into_iter().find(|e| e.id == id)
}

/// Parses an AUT file, or a bundled corpus entry by id when no such file
/// exists.
fn parse(path: &str) -> Result<Automaton, CliError> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| bundled(path).map(|b| b.aut_text).ok_or(e))
        .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    parse_automaton(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

/// Parses and validates.
fn load(path: &str) -> Result<Automaton, CliError> {
    let a = parse(path)?;
    let report = validate(&a);
    if !report.ok {
        let v = &report.violations[0];
        return Err(CliError::Domain(format!("invalid automaton: {} at {}: {}", v.rule, v.at, v.message)));
    }
    Ok(a)
}

fn state(a: &Automaton, name: &str) -> Result<usize, CliError> {
    a.find_state(name).ok_or_else(|| CliError::Usage(format!("unknown state {name:?}")))
}

fn names(a: &Automaton, states: &[usize]) -> String {
    states.iter().map(|&s| a.name(s)).collect::<Vec<_>>().join(", ")
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

fn run(cli: &Cli) -> CliResult {
    let json = cli.json;
    match &cli.command {
        Command::Validate { aut } => {
            let report = validate(&parse(aut)?);
            let out = if json {
                pretty(&serde_json::to_value(&report).unwrap())
            } else if report.ok {
                "ok\n".to_string()
            } else {
                report
                    .violations
                    .iter()
                    .map(|v| format!("{}: {} ({})\n", v.rule, v.at, v.message))
                    .collect()
            };
            if report.ok {
                Ok(out)
            } else {
                Err(CliError::Failed(out))
            }
        }
        Command::Eval { aut, k } => {
            let a = load(aut)?;
            if json {
                let terms: Vec<Value> = k
                    .iter()
                    .map(|k| json!({"k": k.to_string(), "value": eval_term_big(&a, k).as_str()}))
                    .collect();
                Ok(pretty(&Value::Array(terms)))
            } else {
                Ok(k.iter().map(|k| format!("{}\n", eval_term_big(&a, k))).collect())
            }
        }
        Command::Classify { aut } => {
            let a = load(aut)?;
            let r = classify_sparse(&a);
            if json {
                return Ok(pretty(&r.to_json(&a)));
            }
            let mut out = format!("verdict: {}\ntied: {}\n", r.verdict, names(&a, &r.tied));
            for (i, c) in r.scc.components.iter().enumerate() {
                let kind = if c.nontrivial { "cycle" } else { "trivial" };
                writeln!(out, "component {i}: {} ({kind})", names(&a, &c.members)).unwrap();
            }
            if let Some(cases) = &r.cases {
                for (s, c) in cases.iter().enumerate() {
                    writeln!(out, "{}: {}", a.name(s), c.as_str()).unwrap();
                }
            }
            Ok(out)
        }
        Command::Rank { aut } => {
            let a = load(aut)?;
            let r = rank_of_sparseness(&a).map_err(domain)?;
            if json {
                return Ok(pretty(&serde_json::to_value(&r).unwrap()));
            }
            let chain: Vec<String> = r.live_cycle_chain.iter().map(|c| format!("{{{}}}", c.join(", "))).collect();
            Ok(format!("rank: {}\nheight: {}\nchain: {}\n", r.rank, r.height, chain.join(" -> ")))
        }
        Command::Arborize { aut } => {
            let a = load(aut)?;
            let cap = cli.budget.map_or(DEFAULT_STATE_CAP, |b| b as usize);
            let ca = arborize_with_cap(&a, cap).map_err(domain)?;
            let text = serialize_automaton(&ca.automaton);
            if json {
                let mut v = ca.sidecar_json();
                v["aut"] = json!(text);
                return Ok(pretty(&v));
            }
            if let Some(path) = &cli.output {
                // the sidecar goes next to the AUT output
                let sidecar = path.with_extension("json");
                std::fs::write(&sidecar, pretty(&ca.sidecar_json()))
                    .map_err(|e| CliError::Usage(format!("{}: {e}", sidecar.display())))?;
            }
            Ok(text)
        }
        Command::Exponent { aut } => {
            let a = load(aut)?;
            let r = growth_exponent(&a).map_err(domain)?;
            if json {
                return Ok(pretty(&r.to_json(&a)));
            }
            let mut out = format!("B = {:.12}\nbeta = {:.12}\n", r.B(), r.beta_f64());
            for c in &r.components {
                writeln!(
                    out,
                    "{{{}}}: char poly {}, rho in [{:.15}, {:.15}]",
                    names(&a, &c.members),
                    format_poly(&c.radius.char_poly),
                    c.radius.rho.lo_f64(),
                    c.radius.rho.hi_f64()
                )
                .unwrap();
            }
            Ok(out)
        }
        Command::Perron { aut } => {
            let a = load(aut)?;
            let r = growth_exponent(&a).map_err(domain)?;
            let mut certs = Vec::new();
            for c in &r.components {
                let cert = perron_certificate(&strongly_connected_subdigraph(&a, c.members[0])).map_err(domain)?;
                certs.push((c, cert));
            }
            if json {
                let v: Vec<Value> = certs
                    .iter()
                    .map(|(c, p)| {
                        let mut v = p.to_json();
                        v["members"] = json!(c.members.iter().map(|&s| a.name(s)).collect::<Vec<_>>());
                        v["period"] = json!(p.period);
                        v["root_gaps"] = json!(p.root_gaps);
                        v["eigvec"] = json!(p.eigvec);
                        v["residual"] = json!(p.residual);
                        v
                    })
                    .collect();
                return Ok(pretty(&Value::Array(v)));
            }
            let mut out = String::new();
            for (c, p) in &certs {
                writeln!(
                    out,
                    "{{{}}}: p = {}, poly {}, period {}, min gap {}, residual {:.1e}, {}",
                    names(&a, &c.members),
                    p.p,
                    format_poly(&p.poly),
                    p.period,
                    p.root_gaps
                        .iter()
                        .cloned()
                        .reduce(f64::min)
                        .map_or("none".to_string(), |g| format!("{g:.3e}")),
                    p.residual,
                    if p.ok { "certified" } else { "NOT certified" }
                )
                .unwrap();
            }
            Ok(out)
        }
        Command::Count { aut, n, members } => {
            let a = load(aut)?;
            let budget = cli.budget.unwrap_or(DEFAULT_BRUTE_BUDGET);
            if *members {
                let n = u64::try_from(n).map_err(|_| CliError::Domain(format!("N = {n} exceeds budget {budget}")))?;
                let sample = support_bruteforce(&a, n, budget).map_err(domain)?;
                return Ok(if json { pretty(&sample.to_json(usize::MAX)) } else { sample.to_csv() });
            }
            let r = count_support(&a, n, cli.method, budget).map_err(domain)?;
            Ok(if json { pretty(&r.to_json()) } else { format!("{}\n", r.count) })
        }
        Command::Table { aut, k_max } => {
            let a = load(aut)?;
            let budget = cli.budget.map_or(DEFAULT_TABLE_BUDGET, |b| b as usize);
            let table = count_power_table_with_budget(&a, *k_max, budget).map_err(domain)?;
            if json {
                return Ok(pretty(&growth_report(&a, *k_max).map_err(domain)?.to_json()));
            }
            Ok(table.to_csv())
        }
        Command::Walks {
            aut,
            from,
            to,
            n,
            cumulative: cum,
            table,
        } => {
            let a = load(aut)?;
            let (u, v) = (state(&a, from)?, state(&a, to)?);
            let budget = cli.budget.map_or(DEFAULT_WALK_BUDGET, |b| b as usize);
            if *table {
                if *n > budget {
                    return Err(domain(format!("walk length {n} exceeds budget {budget}")));
                }
                let t = omega_table(&a, u, v, *n);
                let t = if *cum { cumulative(&t) } else { t };
                if json {
                    let rows: Vec<Value> = t
                        .iter()
                        .enumerate()
                        .map(|(i, x)| json!({"n": i, "value": x.to_string()}))
                        .collect();
                    return Ok(pretty(&Value::Array(rows)));
                }
                return Ok(table_csv(&t));
            }
            let c = count_walks_with_budget(&a, u, v, *n, *cum, budget).map_err(domain)?;
            Ok(if json {
                pretty(&json!({"from": from, "to": to, "n": n, "cumulative": cum, "count": c.to_string()}))
            } else {
                format!("{c}\n")
            })
        }
        Command::Witness { aut, state: name, k } => {
            let a = load(aut)?;
            let v = state(&a, name)?;
            let budget = cli.budget.map_or(DEFAULT_MEMBER_BUDGET, |b| b as usize);
            let f = witness_family_with_budget(&a, v, *k, budget).map_err(domain)?;
            let verified = f.verify(&a);
            let digits = |w: &cobham_lab::sequence::Walk| w.digits().iter().map(|d| d.to_string()).collect::<String>();
            if json {
                return Ok(pretty(&json!({
                    "state": name,
                    "k": k,
                    "walks": {"ws": digits(&f.ws), "w1": digits(&f.w1), "w2": digits(&f.w2), "we": digits(&f.we)},
                    "x": f.x(), "y": f.y(), "z": f.z(),
                    "bound": f.bound(a.base()).to_string(),
                    "members": f.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "verified": verified,
                })));
            }
            let mut out = format!(
                "walks (least significant digit first): ws = {}, w1 = {}, w2 = {}, we = {}\nbound m^{} = {}\nverified: {verified}\n",
                digits(&f.ws),
                digits(&f.w1),
                digits(&f.w2),
                digits(&f.we),
                f.length(),
                f.bound(a.base())
            );
            for m in &f.members {
                writeln!(out, "{m}").unwrap();
            }
            Ok(out)
        }
        Command::Wk { aut, k, states } => {
            let a = load(aut)?;
            let tied = if states.is_empty() {
                tied_vertices(&a)
            } else {
                states.iter().map(|s| state(&a, s)).collect::<Result<_, _>>()?
            };
            let rows = wk_diagnostic_table(&a, &tied, *k).map_err(domain)?;
            if json {
                let v: Vec<Value> = rows
                    .iter()
                    .map(|r| json!({"k": r.k, "value": r.value.to_string(), "within_envelope": r.within_envelope}))
                    .collect();
                return Ok(pretty(&Value::Array(v)));
            }
            let mut out = String::from("n,value\n");
            for r in &rows {
                writeln!(out, "{},{}", r.k, r.value).unwrap();
            }
            Ok(out)
        }
        Command::Report { entries, samples } => report(entries, *samples, cli.seed, json),
    }
}

fn report_entry(path: &str) -> Result<CorpusEntry, CliError> {
    if let Some(e) = bundled(path) {
        return Ok(e);
    }
    let aut = Path::new(path);
    let meta = aut.with_extension("json");
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())));
    corpus::parse_entry(&read(aut)?, &read(&meta)?).map_err(|e| CliError::Usage(format!("{}: {e}", meta.display())))
}

fn report(ids: &[String], samples: usize, seed: u64, json: bool) -> CliResult {
    let entries: Vec<CorpusEntry> = if ids.is_empty() {
        corpus::entries()
    } else {
        ids.iter().map(|p| report_entry(p)).collect::<Result<_, _>>()?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut out = String::new();
    let mut all = Vec::new();
    for entry in &entries {
        let mut checks = check_entry(entry);
        let a = entry.automaton();
        let brute = support_bruteforce(&a, 100_000, 100_000).map_err(domain)?;
        for _ in 0..samples {
            let n: u64 = rng.gen_range(0..=100_000);
            let want = brute.members.iter().take_while(|&&k| k <= n).count();
            let got = count_support(&a, &BigUint::from(n), Method::Dp, 0).map_err(domain)?.count;
            checks.push(cobham_lab::report::ExpectationCheck {
                field: format!("dp count at {n}"),
                expected: want.to_string(),
                ok: got == BigUint::from(want),
                actual: got.to_string(),
            });
        }
        for c in &checks {
            if !c.ok {
                failures += 1;
            }
            writeln!(
                out,
                "{} {} {}: expected {}, got {}",
                if c.ok { "PASS" } else { "FAIL" },
                entry.id,
                c.field,
                c.expected,
                c.actual
            )
            .unwrap();
        }
        all.push(json!({"id": entry.id, "checks": checks}));
    }
    let text = if json { pretty(&Value::Array(all)) } else { out };
    if failures > 0 {
        eprintln!("{failures} checks failed");
        Err(CliError::Failed(text))
    } else {
        Ok(text)
    }
}

fn emit(cli: &Cli, text: &str, code: u8) -> ExitCode {
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => emit(&cli, &text, 0),
        Err(CliError::Failed(text)) => emit(&cli, &text, 1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
