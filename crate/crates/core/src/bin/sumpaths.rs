use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sumpaths::budget::DEFAULT_PATH_BUDGET;
use sumpaths::circuit::random::random_circuit;
use sumpaths::experiments::report::{
    complex, distribution, distribution_rows, finish, render_csv, render_json,
};
use sumpaths::experiments::{
    corpus, epr, lambda_route, marginal, parse_subsystem, path_dump, perturb, trace, verify,
};
use sumpaths::experiments::{Method, Options};
use sumpaths::{Circuit, Error, PathBudget, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "sumpaths",
    version,
    about = "Sum-over-paths marginals and hidden-variable traces"
)]
struct Cli {
    /// Circuit JSON file.
    #[arg(long, global = true)]
    circuit: Option<PathBuf>,
    /// Comma-separated particle indices.
    #[arg(long, global = true, default_value = "0")]
    subsystem: String,
    /// Tolerance for comparisons against the dense oracle.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Maximum number of path combinations a command may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_PATH_BUDGET)]
    budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Particle limit of the dense oracle.
    #[arg(long, global = true, default_value_t = 12)]
    max_particles: usize,
    /// Add wall-clock timings to verify reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Marginal distribution of the subsystem.
    Marginal {
        #[arg(long, default_value = "lambda")]
        method: String,
    },
    /// λ trajectory of one path pair.
    Trace {
        /// Lexicographic indices of the two paths, `i,j`.
        #[arg(long, default_value = "0,1")]
        pair: String,
        /// Endpoint modes of the subsystem, e.g. `01`. Defaults to all zeros.
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Runs every applicable invariant check.
    Verify {
        /// Corpus manifest; verifies every listed circuit instead of `--circuit`.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// EPR-B demo with measurement gates `I`, `H`, `X`, `Z`, `rot:θ`, `phase:α` or a JSON matrix.
    Epr {
        #[arg(long, default_value = "I")]
        a2: String,
        #[arg(long, default_value = "I")]
        b2: String,
        /// Run this many demos with random measurement gates drawn from `--seed`.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Marginal with every cross-pair λ capped at `--clamp` (`inf` allowed).
    Perturb {
        #[arg(long)]
        clamp: String,
    },
    /// Paths of one particle with their amplitudes.
    Paths {
        #[arg(long, default_value_t = 0)]
        particle: usize,
        #[arg(long, default_value_t = 0)]
        endpoint: u8,
    },
    /// Writes a seeded random circuit to stdout, or the whole corpus to `--corpus`.
    Generate {
        #[arg(long, default_value_t = 2)]
        particles: usize,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// With `--corpus`: compare the directory against a regeneration instead of writing.
        #[arg(long)]
        check: bool,
    },
}

/// What a command produced: the text for stdout and whether its checks passed.
struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn ok(text: String) -> Output {
        Output { text, pass: true }
    }
}

fn load(cli: &Cli) -> Result<Circuit> {
    let path = cli
        .circuit
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--circuit is required".into()))?;
    Circuit::load(path)
}

fn run(cli: &Cli) -> Result<Output> {
    if cli.tol.is_nan() || cli.tol < 0.0 {
        return Err(Error::InvalidArgument(format!("bad tolerance {}", cli.tol)));
    }
    let opts = Options {
        tol: cli.tol,
        budget: PathBudget(cli.budget),
        max_particles: cli.max_particles,
        timing: cli.timing,
    };
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Marginal { method } => {
            let method: Method = method.parse()?;
            let c = load(cli)?;
            let sub = parse_subsystem(&cli.subsystem)?;
            let d = marginal(&c, &sub, method, &opts)?;
            if csv {
                return Ok(Output::ok(render_csv(
                    &["outcome", "probability"],
                    &distribution_rows(&d),
                )));
            }
            let mut body = json!({
                "subsystem": d.subsystem(),
                "method": method.as_str(),
                "distribution": distribution(&d),
            });
            if method == Method::Lambda {
                body["route"] = json!(lambda_route(&c, d.subsystem()));
            }
            Ok(Output::ok(render_json(&finish("marginal", body))))
        }
        Command::Trace { pair, endpoint } => {
            let c = load(cli)?;
            let sub = parse_subsystem(&cli.subsystem)?;
            let endpoint = endpoint.as_deref().map(trace::parse_modes).transpose()?;
            let t = trace::trace(
                &c,
                &sub,
                endpoint.as_deref(),
                trace::parse_pair(pair)?,
                opts.budget,
            )?;
            Ok(Output::ok(if csv {
                t.to_csv()
            } else {
                render_json(&t.to_json())
            }))
        }
        Command::Verify {
            manifest: Some(path),
        } => {
            let report = corpus::verify_manifest(path, &opts)?;
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            Ok(Output {
                text: render_json(&report.to_json()),
                pass: report.pass(),
            })
        }
        Command::Verify { manifest: None } => {
            let report = verify::verify_circuit(&load(cli)?, &opts)?;
            for check in report.failures() {
                eprintln!(
                    "FAIL {} {:?} {}",
                    check.name,
                    check.max_error,
                    check.note.clone().unwrap_or_default()
                );
            }
            let text = if csv {
                report.to_csv()
            } else {
                render_json(&report.to_json())
            };
            Ok(Output {
                text,
                pass: report.pass(),
            })
        }
        Command::Epr { a2, b2, sweep } => {
            if let Some(count) = sweep {
                let seed = cli.seed.unwrap_or(0);
                let reports = epr::sweep(seed, *count, &opts)?;
                let pass = reports.iter().all(epr::EprReport::pass);
                return Ok(Output {
                    text: render_json(&epr::sweep_json(&reports, seed)),
                    pass,
                });
            }
            let r = epr::run_epr(epr::parse_gate(a2)?, epr::parse_gate(b2)?, &opts)?;
            let text = if csv {
                let rows: Vec<Vec<String>> = r
                    .marginals
                    .iter()
                    .flat_map(|(m, d)| {
                        distribution_rows(d).into_iter().map(move |mut row| {
                            row.insert(0, m.to_string());
                            row
                        })
                    })
                    .collect();
                render_csv(&["method", "outcome", "probability"], &rows)
            } else {
                render_json(&r.to_json())
            };
            Ok(Output {
                text,
                pass: r.pass(),
            })
        }
        Command::Perturb { clamp } => {
            let clamp = perturb::parse_clamp(clamp)?;
            let c = load(cli)?;
            let r = perturb::perturb(&c, &parse_subsystem(&cli.subsystem)?, clamp, &opts)?;
            Ok(Output::ok(if csv {
                r.to_csv()
            } else {
                render_json(&r.to_json())
            }))
        }
        Command::Paths { particle, endpoint } => {
            let c = load(cli)?;
            let rows = path_dump(&c, *particle, *endpoint, opts.budget)?;
            if csv {
                let rows: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(p, a)| vec![p.bitstring(), a.re.to_string(), a.im.to_string()])
                    .collect();
                return Ok(Output::ok(render_csv(&["path", "re", "im"], &rows)));
            }
            let list: Vec<_> = rows
                .iter()
                .map(|(p, a)| json!({"path": p.bitstring(), "amplitude": complex(*a)}))
                .collect();
            let body = json!({"particle": particle, "endpoint": endpoint, "paths": list});
            Ok(Output::ok(render_json(&finish("paths", body))))
        }
        Command::Generate {
            particles,
            layers,
            corpus: Some(dir),
            check,
        } => {
            let _ = (particles, layers);
            if *check {
                let bad = corpus::regeneration_mismatches(dir)?;
                for f in &bad {
                    eprintln!("differs: {f}");
                }
                return Ok(Output {
                    text: String::new(),
                    pass: bad.is_empty(),
                });
            }
            let m = corpus::write_corpus(dir, cli.seed.unwrap_or(corpus::DEFAULT_BASE_SEED))?;
            eprintln!("wrote {} circuits to {}", m.entries.len(), dir.display());
            Ok(Output::ok(String::new()))
        }
        Command::Generate {
            particles,
            layers,
            corpus: None,
            ..
        } => {
            if *particles == 0 || *particles > cli.max_particles {
                return Err(Error::InvalidArgument(format!(
                    "bad particle count {particles}"
                )));
            }
            Ok(Output::ok(
                random_circuit(cli.seed.unwrap_or(0), *particles, *layers).to_json(),
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let debug = format!("{e:?}");
            let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
            eprintln!("error [{kind}]: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
