use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use imc_dse::config::{build_experiment, out_dir, Command, Settings, OUT_DIR_ENV};
use imc_dse::engine::{Experiment, RunResult, Strategy};
use imc_dse::experiments::{aggregation_study, repeat, RepeatStudy};
use imc_dse::objective::Aggregation;
use imc_dse::oracle::{exhaustive, DEFAULT_MAX_POINTS};
use imc_dse::pareto::{tech_sweep, write_csv};
use imc_dse::report::{write_file, write_run};
use imc_dse::space::SystemMode;
use imc_dse::{DseError, Result};

#[derive(Parser)]
#[command(name = "imc-dse", version, about = "Design-space exploration for in-memory-computing accelerators")]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Joint search with diversity sampling and the four-phase GA.
    Optimize(Common),
    /// Run a baseline search strategy.
    Baseline(Common),
    /// Compare the Max, All and Mean aggregation schemes.
    AggregationStudy {
        #[command(flatten)]
        common: Common,
        /// Seeds whose wall time is summed per scheme.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Search over technology nodes and extract the EDAP-cost Pareto front.
    TechSweep(Common),
    /// Enumerate a small space exhaustively and rank a GA run against it.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS as u64)]
        max_points: u64,
    },
    /// Repeat a strategy over consecutive seeds and report mean and std.
    Repeat {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long, default_value_t = 25)]
        runs: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment file (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    workloads: Option<PathBuf>,
    /// edap, edp, energy, latency, area or ed-cost.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, value_parser = parse_from_str::<Aggregation>)]
    aggregation: Option<Aggregation>,
    #[arg(long, value_parser = parse_from_str::<SystemMode>)]
    mode: Option<SystemMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// GA population size.
    #[arg(long)]
    pga: Option<usize>,
    /// Random candidates drawn before diversity selection.
    #[arg(long)]
    ph: Option<usize>,
    /// Diverse candidates evaluated to pick the initial population.
    #[arg(long)]
    pe: Option<usize>,
    /// Generations per phase.
    #[arg(long)]
    generations: Option<usize>,
    /// Evaluator coefficient file (JSON).
    #[arg(long)]
    coefficients: Option<PathBuf>,
    #[arg(long)]
    area_constraint: Option<f64>,
    /// plain-ga, separate, largest, sequential-max or sequential-median.
    #[arg(long, value_parser = parse_from_str::<Strategy>)]
    strategy: Option<Strategy>,
    /// Output directory (also settable through IMC_DSE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disable evaluation memoization.
    #[arg(long)]
    no_cache: bool,
}

fn parse_from_str<T: std::str::FromStr<Err = DseError>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: DseError| e.to_string())
}

impl Common {
    fn settings(&self) -> Result<(Settings, PathBuf)> {
        let file = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            space: self.space.clone(),
            workloads: self.workloads.clone(),
            objective: self.objective.clone(),
            aggregation: self.aggregation,
            mode: self.mode,
            seed: self.seed,
            pga: self.pga,
            ph: self.ph,
            pe: self.pe,
            generations: self.generations,
            coefficients: self.coefficients.clone(),
            area_constraint_mm2: self.area_constraint,
            strategy: self.strategy,
            out: None,
            no_cache: self.no_cache.then_some(true),
        };
        let env = std::env::var(OUT_DIR_ENV).ok();
        let out = out_dir(self.out.as_deref(), env.as_deref(), file.out.as_deref());
        Ok((flags.or(&file), out))
    }
}

fn json_file(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    write_file(path, serde_json::to_string_pretty(value).expect("json").as_bytes())
}

fn summarize(label: &str, r: &RunResult) {
    let s = r.joint_score();
    println!(
        "{label}: score {} ({}), area {:.3} mm2, {} evaluations, design {}",
        s.value,
        if s.feasible { "feasible" } else { "INFEASIBLE" },
        s.area_mm2,
        r.outcome.eval_count,
        r.best().design
    );
}

/// Exit status for a finished run: 3 when the best design is infeasible.
fn run_status(results: &[&RunResult]) -> ExitCode {
    if results.iter().all(|r| r.joint_score().feasible) {
        ExitCode::SUCCESS
    } else {
        eprintln!("no feasible design found");
        ExitCode::from(3)
    }
}

fn optimize(common: &Common, command: Command) -> Result<ExitCode> {
    let (settings, out) = common.settings()?;
    let exp = build_experiment(&settings, command)?;
    if command == Command::Baseline && exp.strategy == Strategy::Separate {
        let mut runs = Vec::new();
        for w in &exp.workloads {
            let single = Experiment {
                workloads: vec![w.clone()],
                ..exp.clone()
            };
            let r = single.run()?;
            write_run(&out, &format!("{}_", w.name), &r)?;
            summarize(&w.name, &r);
            runs.push(r);
        }
        return Ok(run_status(&runs.iter().collect::<Vec<_>>()));
    }
    let r = exp.run()?;
    write_run(&out, "", &r)?;
    summarize(exp.strategy.as_str(), &r);
    if let Some(w) = &r.largest_workload {
        println!("optimized for largest workload {w}; score above is on all workloads");
    }
    Ok(run_status(&[&r]))
}

fn aggregation(common: &Common, seeds: u64) -> Result<ExitCode> {
    let (settings, out) = common.settings()?;
    let exp = build_experiment(&settings, Command::AggregationStudy)?;
    let seed_list: Vec<u64> = (exp.seed..exp.seed + seeds.max(1)).collect();
    let study = aggregation_study(&exp, &Aggregation::ALL, &seed_list)?;
    let mut buf = Vec::new();
    study.write_csv(&mut buf).map_err(|e| DseError::io(&out, e))?;
    write_file(&out.join("aggregation.csv"), &buf)?;
    json_file(&out.join("aggregation.json"), &study)?;
    print!("{:<6} {:>12}", "scheme", "wall_s");
    for w in &study.workloads {
        print!(" {:>14}", w);
    }
    println!();
    for r in &study.rows {
        print!("{:<6} {:>12.4}", r.scheme.as_str(), r.wall_s);
        for e in &r.per_workload_edap {
            print!(" {e:>14.4e}");
        }
        println!();
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(common: &Common) -> Result<ExitCode> {
    let (settings, out) = common.settings()?;
    let exp = build_experiment(&settings, Command::TechSweep)?;
    let problem = exp.problem()?;
    let result = tech_sweep(&problem, &exp.phases, exp.sizes, exp.seed)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &exp.space, &result.points, &result.front).map_err(|e| DseError::io(&out, e))?;
    write_file(&out.join("pareto.csv"), &buf)?;
    let run = RunResult {
        config: exp,
        outcome: result.run,
        largest_workload: None,
        rescored: None,
    };
    write_run(&out, "", &run)?;
    println!("{} feasible designs, {} on the front", result.points.len(), result.front.len());
    println!("{:>14} {:>14} {:>8}", "cost", "edap", "tech_nm");
    for p in &result.front {
        println!("{:>14.4} {:>14.4e} {:>8}", p.cost, p.edap, p.tech_nm);
    }
    Ok(run_status(&[&run]))
}

fn oracle(common: &Common, max_points: u64) -> Result<ExitCode> {
    let (settings, out) = common.settings()?;
    let exp = build_experiment(&settings, Command::Oracle)?;
    let landscape = exhaustive(&exp.problem()?, max_points as u128)?;
    let mut buf = Vec::new();
    landscape.write_csv(&mut buf, &exp.space).map_err(|e| DseError::io(&out, e))?;
    write_file(&out.join("landscape.csv"), &buf)?;

    let run = exp.run()?;
    write_run(&out, "", &run)?;
    let rank = landscape.rank_of(&run.best().design)?;
    let global = landscape.global_min().map(|(d, s)| {
        json!({
            "design": d,
            "values": exp.space.values(d),
            "score": s,
        })
    });
    let report = json!({
        "size": landscape.len(),
        "feasible_count": landscape.feasible_count,
        "global_min": global,
        "search_best": run.best(),
        "search_rank": rank,
    });
    json_file(&out.join("oracle.json"), &report)?;
    println!("{} designs, {} feasible", landscape.len(), landscape.feasible_count);
    match landscape.global_min() {
        Some((d, s)) => println!("global minimum {} at {d}", s.value),
        None => println!("no feasible design"),
    }
    println!("search best {} ranks {rank}", run.best().score.value);
    Ok(if landscape.feasible_count == 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn repeats(common: &Common, runs: u64) -> Result<ExitCode> {
    let (settings, out) = common.settings()?;
    let exp = build_experiment(&settings, Command::Repeat)?;
    let seeds: Vec<u64> = (exp.seed..exp.seed + runs.max(1)).collect();
    let mut studies: Vec<RepeatStudy> = vec![repeat(&exp, &seeds)?];
    if exp.strategy != Strategy::Proposed {
        studies.push(repeat(&exp.clone().with_strategy(Strategy::Proposed), &seeds)?);
    }
    let mut buf = b"strategy,".to_vec();
    for (i, s) in studies.iter().enumerate() {
        let mut rows = Vec::new();
        s.write_csv(&mut rows).map_err(|e| DseError::io(&out, e))?;
        for (j, line) in String::from_utf8(rows).expect("utf8").lines().enumerate() {
            if j == 0 {
                if i == 0 {
                    buf.extend_from_slice(format!("{line}\n").as_bytes());
                }
            } else {
                buf.extend_from_slice(format!("{},{line}\n", s.strategy).as_bytes());
            }
        }
    }
    write_file(&out.join("repeat.csv"), &buf)?;
    json_file(&out.join("repeat.json"), &studies)?;
    println!("{:<18} {:>14} {:>14} {:>10}", "strategy", "mean", "std", "std/mean");
    for s in &studies {
        println!("{:<18} {:>14.4e} {:>14.4e} {:>10.4}", s.strategy, s.mean, s.std, s.cv());
    }
    if let [a, b] = &studies[..] {
        println!("std ratio {} / {}: {:.3}", a.strategy, b.strategy, a.std / b.std);
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| DseError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Cmd::Optimize(c) => optimize(c, Command::Optimize),
        Cmd::Baseline(c) => {
            if c.strategy.is_none() {
                return Err(DseError::Config("baseline requires --strategy".into()));
            }
            optimize(c, Command::Baseline)
        }
        Cmd::AggregationStudy { common, seeds } => aggregation(common, *seeds),
        Cmd::TechSweep(c) => sweep(c),
        Cmd::Oracle { common, max_points } => oracle(common, *max_points),
        Cmd::Repeat { common, runs } => repeats(common, *runs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
