use clap::{Parser, Subcommand};
use seqstr::bench::{gen_template, summarize, BenchRecord};
use seqstr::engine::{format_model, solve, SolveOptions, Verdict};
use seqstr::frontend::{check_straight_line, normalize, parse_script};
use seqstr::interp::check_model;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(name = "seqstr", version, about = "Decision procedure for straight-line string sequence constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide an SMT-LIB script.
    Solve {
        file: PathBuf,
        /// Print a model after `sat`.
        #[arg(long)]
        model: bool,
        /// Re-check a `sat` model against the script.
        #[arg(long)]
        check_model: bool,
        #[arg(long)]
        timeout_ms: Option<u64>,
        #[arg(long, default_value_t = 200_000)]
        max_product_states: usize,
    },
    /// Generate benchmark scripts.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        template: u8,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        symbolic_indices: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the solver on every `.smt2` file of a directory.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 60_000)]
        timeout_ms: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

const INPUT_ERROR: u8 = 2;
const INTERNAL_ERROR: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Solve {
            file,
            model,
            check_model,
            timeout_ms,
            max_product_states,
        } => {
            let opts = SolveOptions {
                timeout: timeout_ms.map(Duration::from_millis),
                max_product_states,
                ..SolveOptions::default()
            };
            run_solve(&file, model, check_model, &opts)
        }
        Cmd::Gen {
            template,
            count,
            seed,
            symbolic_indices,
            out,
        } => run_gen(template, count, seed, symbolic_indices, &out),
        Cmd::Bench { dir, timeout_ms, csv } => run_bench(&dir, timeout_ms, csv.as_deref()),
    }
}

fn run_solve(file: &Path, print_model: bool, recheck: bool, opts: &SolveOptions) -> ExitCode {
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", file.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    if let Err(v) = check_straight_line(&normalize(&script)) {
        eprintln!("error: {}: not in the straight-line fragment: {v}", file.display());
        return ExitCode::from(INPUT_ERROR);
    }
    let verdict = match solve(&script, opts) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INTERNAL_ERROR);
        }
    };
    println!("{verdict}");
    match &verdict {
        Verdict::Sat(m) => {
            if recheck && !check_model(&script, m) {
                eprintln!("error: model does not satisfy the script");
                eprintln!("{}", format_model(&script, m));
                return ExitCode::from(INTERNAL_ERROR);
            }
            if print_model {
                println!("{}", format_model(&script, m));
            }
        }
        Verdict::Unknown(why) => eprintln!("reason: {why}"),
        Verdict::Unsat => {}
    }
    ExitCode::SUCCESS
}

fn run_gen(template: u8, count: u64, seed: u64, symbolic: bool, out: &Path) -> ExitCode {
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(INPUT_ERROR);
    }
    for k in 0..count {
        let inst = gen_template(template, seed + k, symbolic);
        let path = out.join(format!("{}.smt2", inst.name));
        if let Err(e) = std::fs::write(&path, &inst.script) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(INTERNAL_ERROR);
        }
    }
    ExitCode::SUCCESS
}

/// Runs one instance in a child process so that a hung solve can be killed.
fn run_instance(exe: &Path, file: &Path, timeout_ms: u64) -> (String, u64) {
    let start = Instant::now();
    let child = Command::new(exe)
        .arg("solve")
        .arg("--check-model")
        .arg("--timeout-ms")
        .arg(timeout_ms.to_string())
        .arg(file)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(_) => return ("error".into(), 0),
    };
    // the solver polls its own deadline; the grace period covers slow steps
    let hard_limit = Duration::from_millis(timeout_ms) + Duration::from_secs(2);
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() > hard_limit => {
                let _ = child.kill();
                let _ = child.wait();
                return ("unknown".into(), start.elapsed().as_millis() as u64);
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(_) => return ("error".into(), start.elapsed().as_millis() as u64),
        }
    }
    let elapsed = start.elapsed().as_millis() as u64;
    let out = match child.wait_with_output() {
        Ok(o) => o,
        Err(_) => return ("error".into(), elapsed),
    };
    let text = String::from_utf8_lossy(&out.stdout);
    let verdict = match (out.status.code(), text.lines().next()) {
        (Some(0), Some(v @ ("sat" | "unsat" | "unknown"))) => v.to_string(),
        _ => "error".to_string(),
    };
    (verdict, elapsed)
}

fn run_bench(dir: &Path, timeout_ms: u64, csv_path: Option<&Path>) -> ExitCode {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "smt2"))
        .collect();
    files.sort();
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot locate the solver binary: {e}");
            return ExitCode::from(INTERNAL_ERROR);
        }
    };
    let mut records = Vec::new();
    for f in &files {
        let (verdict, time_ms) = run_instance(&exe, f, timeout_ms);
        let instance = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        records.push(BenchRecord {
            instance,
            verdict,
            time_ms,
        });
    }
    if let Some(path) = csv_path {
        if let Err(e) = write_csv(path, &records) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(INTERNAL_ERROR);
        }
    }
    let s = summarize(&records);
    println!("instances          {}", records.len());
    println!("sat                {}", s.sat);
    println!("unsat              {}", s.unsat);
    println!("solved             {}", s.solved);
    println!("unknown/timeout    {}", s.unknown);
    println!("avg. time (ms)     {:.1}", s.avg_time_ms);
    ExitCode::SUCCESS
}

fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance", "verdict", "time_ms"])?;
    for r in records {
        w.write_record([r.instance.as_str(), r.verdict.as_str(), &r.time_ms.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
