use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dynrepset::bench::{bench_csv, BenchConfig};
use dynrepset::circuit::{automatic_cap, brute_force_expand, monomial_sum, parse_circuit};
use dynrepset::error::{Error, Result};
use dynrepset::factorization::{ContextOptions, FactorizationContext, MAX_K};
use dynrepset::kpath::{
    brute_force_kpath, parse_graph, solve_kpath_decision_with, solve_kpath_with, SolveOptions,
};
use dynrepset::oracle::Defect;
use dynrepset::pseudorandom::{
    verify_splitter, verify_universal, FamilyCache, DEFAULT_CONSTRUCTION_BUDGET, DEFAULT_VERIFY_BUDGET, FAMILY_SEED,
};
use dynrepset::selftest::{self, SelftestConfig};
use dynrepset::semiring::{Boolean, CappedMinPlus};

/// Min-weight k-paths and skewed-circuit monomial sums through
/// representative-set vectors.
#[derive(Parser, Debug)]
#[command(name = "dynrepset", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for constructed hash and set families.
    #[arg(long, global = true, default_value = ".dynrepset-cache")]
    cache_dir: PathBuf,
    /// Build families in memory only.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum-weight simple path on k vertices.
    Kpath {
        #[arg(long)]
        graph: PathBuf,
        /// Overrides the k from the file header.
        #[arg(long)]
        k: Option<usize>,
        /// Only decide whether a k-vertex path exists.
        #[arg(long)]
        decision: bool,
        /// Compare against exhaustive search.
        #[arg(long)]
        oracle_check: bool,
        /// Overrides the min-plus cap k · max weight.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Sum of the degree-k multilinear coefficients of a skewed circuit.
    Circuit {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = SemiringArg::Minplus)]
        semiring: SemiringArg,
        /// Min-plus cap; defaults to the largest reachable coefficient.
        #[arg(long)]
        cap: Option<u64>,
        /// Compare against full expansion.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Build (or load) the families for (n, k) and print their sizes.
    Families {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_VERIFY_BUDGET)]
        budget: u128,
    },
    /// Run the oracle checks and print one line per check.
    Selftest {
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_k: usize,
        #[arg(long, default_value_t = DEFAULT_CONSTRUCTION_BUDGET)]
        budget: u128,
        #[arg(long, default_value_t = FAMILY_SEED)]
        seed: u64,
        /// Seed a defect the checks must catch.
        #[arg(long, value_parser = parse_defect)]
        mutate: Option<Defect>,
    },
    /// Time context builds, convolutions and solves; prints CSV.
    Bench {
        /// Grid points as `n:k`, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_point)]
        grid: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Out-degree of the generated graphs.
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SemiringArg {
    Boolean,
    Minplus,
}

fn parse_defect(s: &str) -> std::result::Result<Defect, String> {
    Defect::parse(s).map_err(|_| {
        let names: Vec<&str> = Defect::ALL.iter().map(|d| d.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_point(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, k) = s.split_once(':').ok_or("expected n:k")?;
    Ok((n.parse().map_err(|_| "bad n")?, k.parse().map_err(|_| "bad k")?))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) | Error::Construction(_) => 3,
        _ => 2,
    }
}

fn report<T: Display + PartialEq>(answer: T, oracle: Option<Result<T>>) -> Result<ExitCode> {
    println!("answer {answer}");
    match oracle {
        None => Ok(ExitCode::SUCCESS),
        Some(expected) => {
            let expected = expected?;
            let ok = expected == answer;
            println!("oracle {expected} {}", if ok { "match" } else { "MISMATCH" });
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn k_or(k: Option<usize>, header: Option<usize>) -> Result<usize> {
    let k = k.or(header).ok_or_else(|| Error::Usage("no k given on the command line or in the file header".into()))?;
    if k > MAX_K {
        return Err(Error::Resource(format!("k={k} exceeds the supported maximum {MAX_K}")));
    }
    Ok(k)
}

fn run(cli: Cli) -> Result<ExitCode> {
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    let context = ContextOptions {
        cache: (!cli.no_cache).then(|| FamilyCache::new(&cli.cache_dir)),
        ..ContextOptions::default()
    };
    match cli.command {
        Command::Kpath { graph, k, decision, oracle_check, cap } => {
            let g = parse_graph(&graph)?;
            let k = k_or(k, g.k())?;
            let opts = SolveOptions { context, cap };
            let oracle = oracle_check.then(|| brute_force_kpath(&g, k));
            if decision {
                let answer = solve_kpath_decision_with(&g, k, &opts)?;
                report(answer, oracle.map(|o| o.map(|c| !c.is_inf())))
            } else {
                report(solve_kpath_with(&g, k, &opts)?, oracle)
            }
        }
        Command::Circuit { file, k, semiring, cap, oracle_check } => {
            let c = parse_circuit(&file)?;
            let k = k_or(k, c.k())?;
            match semiring {
                SemiringArg::Boolean => {
                    let answer = monomial_sum(&c, k, &Boolean, &context)?;
                    report(answer, oracle_check.then(|| brute_force_expand(&c, k, &Boolean)))
                }
                SemiringArg::Minplus => {
                    let sr = CappedMinPlus::new(cap.unwrap_or_else(|| automatic_cap(&c)))?;
                    let answer = monomial_sum(&c, k, &sr, &context)?;
                    report(answer, oracle_check.then(|| brute_force_expand(&c, k, &sr)))
                }
            }
        }
        Command::Families { n, k, verify, budget } => {
            let opts = ContextOptions { verify_budget: budget, ..context };
            let ctx = FactorizationContext::build(n, k, &opts)?;
            println!("n {} k {} padding {} s {} u {}", ctx.n(), ctx.k_user(), ctx.padding(), ctx.s(), ctx.u());
            println!("outer {} maps onto {}", ctx.outer().len(), ctx.outer().ell());
            println!("inner {} maps onto {}", ctx.inner().len(), ctx.inner().ell());
            println!("universal {} sets", ctx.family().len());
            println!("h {} ell {} r {}", ctx.h(), ctx.ell(), ctx.r());
            if verify {
                println!("verify outer {}", verify_splitter(ctx.outer(), budget).label());
                println!("verify inner {}", verify_splitter(ctx.inner(), budget).label());
                println!("verify universal {}", verify_universal(ctx.family(), budget).label());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { max_n, max_k, budget, seed, mutate } => {
            let cfg = SelftestConfig { max_n, max_k, budget, seed, mutate, context };
            let report = selftest::run(&cfg);
            print!("{}", report.to_text());
            Ok(if report.failed() == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench { grid, seed, degree } => {
            let mut cfg = BenchConfig { seed, degree, context, ..BenchConfig::default() };
            if !grid.is_empty() {
                cfg.grid = grid;
            }
            print!("{}", bench_csv(&cfg));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
