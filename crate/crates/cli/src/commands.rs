use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vqspec_core::linalg::group_degeneracies;
use vqspec_core::varqite::{compare_methods, exact_spectrum, run_spectrum, trajectory_csv};
use vqspec_core::SpectrumRun;

use crate::args::{CompareArgs, DiagArgs, Gen3satArgs, SatSpec, SolveArgs, VerifyArgs};
use crate::eigenstate;
use crate::error::{exit, CliError, CliResult};
use crate::inputs::{self, Source};
use crate::report::{self, MergedReport, RunSummary};
use crate::verify::{self, VerifyOptions};

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn thread_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        b = b.num_threads(j);
    }
    b.build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

struct Job<'a> {
    index: usize,
    source: &'a Source,
    seed: u64,
}

fn ansatz_label(args: &SolveArgs) -> String {
    format!("{:?}", args.ansatz.ansatz).to_lowercase()
}

fn run_job(args: &SolveArgs, job: &Job<'_>, out: &Path) -> CliResult<RunSummary> {
    let h = &job.source.hamiltonian;
    let ansatz = inputs::build_ansatz(&args.ansatz, h.num_qubits())?;
    let config = args.engine.config(args.states, job.seed, !args.no_oracle);
    let prior = inputs::load_deflations(&args.deflate, h, config.alpha)?;
    let run: SpectrumRun = run_spectrum(&ansatz, h, &config, &prior)?;

    let name = format!("{:03}-{}-seed{}", job.index, job.source.name, job.seed);
    let dir = out.join(&name);
    create_dir(&dir)?;
    write_file(&dir.join("trajectory.csv"), trajectory_csv(&run.trajectory))?;
    for (k, entry) in run.deflations.iter().enumerate() {
        eigenstate::write(&dir.join(format!("eigenstate-{k:03}.bin")), &entry.state)?;
    }
    Ok(RunSummary {
        name,
        hamiltonian: job.source.origin.clone(),
        seed: job.seed,
        output_dir: dir.display().to_string(),
        ansatz: ansatz_label(args),
        max_pairwise_overlap: report::max_pairwise_overlap(&run.deflations),
        oracle_errors: report::oracle_errors(&run.report),
        report: run.report,
    })
}

pub fn solve(args: &SolveArgs) -> CliResult<i32> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    let sources = inputs::load_sources(&args.source)?;
    // Reject bad deflation files before any work starts.
    for s in &sources {
        inputs::load_deflations(&args.deflate, &s.hamiltonian, args.engine.alpha)?;
    }
    let jobs: Vec<Job> = sources
        .iter()
        .flat_map(|s| (0..args.repeats as u64).map(move |r| (s, args.seed + r)))
        .enumerate()
        .map(|(index, (source, seed))| Job {
            index,
            source,
            seed,
        })
        .collect();
    let out: &PathBuf = &args.out;
    create_dir(out)?;
    let pool = thread_pool(args.jobs)?;
    let results: Vec<CliResult<RunSummary>> =
        pool.install(|| jobs.par_iter().map(|j| run_job(args, j, out)).collect());
    let runs = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let merged = MergedReport {
        complete: runs.iter().all(|r| r.report.complete),
        runs,
    };
    let text = report::render_text(&merged);
    write_file(&out.join("report.txt"), &text)?;
    let json = serde_json::to_string_pretty(&merged).expect("report serializes");
    write_file(&out.join("report.json"), json + "\n")?;
    print!("{text}");
    if merged.complete {
        Ok(exit::OK)
    } else {
        eprintln!("error: not every run discovered the requested number of states");
        Ok(exit::INCOMPLETE)
    }
}

pub fn diag(args: &DiagArgs) -> CliResult<i32> {
    let sources = inputs::load_sources(&args.source)?;
    let many = sources.len() > 1;
    for s in &sources {
        let values = exact_spectrum(&s.hamiltonian)?;
        if many {
            println!("# {}", s.origin);
        }
        print!(
            "{}",
            report::format_levels(&group_degeneracies(&values, args.tol))
        );
    }
    Ok(exit::OK)
}

pub fn gen3sat(args: &Gen3satArgs) -> CliResult<i32> {
    let spec = SatSpec {
        vars: args.vars,
        clauses: args.clauses,
        seed: args.seed,
    };
    let dimacs = inputs::generate(spec, args.max_attempts)?.to_dimacs();
    match &args.out {
        Some(path) => write_file(path, &dimacs)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(dimacs.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(exit::OK)
}

pub fn verify(args: &VerifyArgs) -> CliResult<i32> {
    let props = verify::run_all(VerifyOptions {
        seed: args.seed,
        flip_v_sign: args.inject_v_sign_flip,
    });
    let mut failed = 0;
    for p in &props {
        match &p.outcome {
            Ok(detail) => println!("ok    {}: {detail}", p.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}: {detail}", p.name);
            }
        }
    }
    println!("{} of {} properties ok", props.len() - failed, props.len());
    Ok(if failed == 0 { exit::OK } else { exit::VERIFY })
}

pub fn compare(args: &CompareArgs) -> CliResult<i32> {
    let sources = inputs::load_sources(&args.source)?;
    let [source] = &sources[..] else {
        return Err(CliError::Usage("compare takes a single Hamiltonian".into()));
    };
    let h = &source.hamiltonian;
    let ansatz = inputs::build_ansatz(&args.ansatz, h.num_qubits())?;
    let base = args.engine.config(1, args.seed, false);
    let seeds: Vec<u64> = (args.seed..args.seed + args.seeds).collect();
    let cmp = compare_methods(&ansatz, h, &base, &seeds, args.eigen_tol)?;

    create_dir(&args.out)?;
    let path = args.out.join("compare.json");
    let json = serde_json::to_string_pretty(&cmp).expect("comparison serializes");
    write_file(&path, json + "\n")?;

    println!("hamiltonian: {}", source.origin);
    println!("seeds: {}", seeds.len());
    println!("{:>6}  {:>12}  {:>12}", "seed", "imaginary", "gradient");
    for ((s, a), b) in seeds
        .iter()
        .zip(&cmp.imaginary_residuals)
        .zip(&cmp.gradient_residuals)
    {
        println!("{s:>6}  {a:>12.4e}  {b:>12.4e}");
    }
    println!(
        "median residual: imaginary {:.4e}, gradient {:.4e}",
        cmp.imaginary_median, cmp.gradient_median
    );
    println!(
        "fraction above {:e}: imaginary {:.2}, gradient {:.2}",
        cmp.eigen_tol, cmp.imaginary_non_eigenstate_fraction, cmp.gradient_non_eigenstate_fraction
    );
    println!("written: {}", path.display());
    Ok(exit::OK)
}
