//! Command-line front end.
//!
//! Every command writes a `# seed=… config=…` line ahead of its output (JSON
//! output carries the same data in a `meta` field instead). Exit codes: 0 ok,
//! 1 usage, 2 infeasible, 3 non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::densities::sample_graph;
use crate::diagram::{
    detect_transitions, grid_svg, records_to_csv, scan_grid, scan_line_with, transitions_to_csv, LineOptions,
    LowerBoundary, DEFAULT_SLOPE_JUMP_TOL,
};
use crate::error::Error;
use crate::families::{a_stable_at, stability_boundary, StabilityCurve};
use crate::graphon::{classify, ConstraintPoint, Family, MultipodalGraphon, DEFAULT_CLASSIFY_TOL};
use crate::optimize::{solve, solve_in_family, SolveConfig, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "GRAPHON_LAB_THREADS";

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "graphon-lab",
    version,
    about = "Entropy-maximizing graphons under edge/triangle constraints"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Maximize entropy at one point, optionally within a family.
    Solve(SolveArgs),
    /// Solve along a vertical line or over a grid.
    Scan(ScanArgs),
    /// Roots of det H(S) for A(n,0) and, optionally, the stable region.
    Stability(StabilityArgs),
    /// Phase label of a graphon JSON file.
    Classify(ClassifyArgs),
    /// Sample a finite graph from a graphon JSON file as an edge list.
    Sample(SampleArgs),
    /// Compute the lower boundary cache on an ε mesh.
    Boundary(BoundaryArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 6)]
    pub max_podes: usize,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub window: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 12)]
    pub candidates: usize,
    #[arg(long, default_value_t = 32)]
    pub family_starts: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
}

impl SolverFlags {
    fn config(&self, seed: u64) -> SolveConfig {
        SolveConfig {
            max_podes: self.max_podes,
            samples: self.samples,
            window: self.window,
            refine_tol: self.refine_tol,
            seed,
            candidates: self.candidates,
            family_starts: self.family_starts,
            max_iter: self.max_iter,
            ..SolveConfig::default()
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eps: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: f64,
    /// Restrict to a family (A, B, C, F); needs --m.
    #[arg(long, requires = "m")]
    pub family: Option<Family>,
    #[arg(long, requires = "family")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    /// Scan the vertical line at one ε (otherwise a grid).
    #[arg(long)]
    pub line: bool,
    /// `ε` for a line, `lo:hi` for a grid.
    #[arg(long)]
    pub eps: String,
    /// `lo:hi`.
    #[arg(long, value_parser = parse_range)]
    pub tau: (f64, f64),
    /// Points along τ (and along ε for a grid unless --eps-steps is given).
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long)]
    pub eps_steps: Option<usize>,
    /// Skip neighbor warm starts on a line scan.
    #[arg(long)]
    pub cold_only: bool,
    #[arg(long, default_value_t = DEFAULT_SLOPE_JUMP_TOL)]
    pub slope_jump_tol: f64,
    /// Transition events of a line scan.
    #[arg(long)]
    pub transitions: Option<PathBuf>,
    /// Lower-boundary cache used to skip infeasible grid points.
    #[arg(long)]
    pub boundary_cache: Option<PathBuf>,
    /// Static SVG of a grid scan.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct StabilityArgs {
    #[arg(long)]
    pub n: usize,
    /// `lo:hi`.
    #[arg(long, value_parser = parse_range)]
    pub eps: (f64, f64),
    #[arg(long, default_value_t = 100)]
    pub eps_steps: usize,
    #[arg(long, default_value_t = 2000)]
    pub tau_steps: usize,
    /// Also write the stable region on a grid over this `τ` range.
    #[arg(long, value_parser = parse_range)]
    pub region_tau: Option<(f64, f64)>,
    #[arg(long, default_value_t = 100)]
    pub region_resolution: usize,
    /// Region CSV `epsilon,tau,stable`.
    #[arg(long, requires = "region_tau")]
    pub region_output: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// Graphon JSON, or a `solve` output containing one.
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    pub input: PathBuf,
    /// Node count.
    #[arg(long)]
    pub nodes: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundaryArgs {
    /// `lo:hi`.
    #[arg(long, value_parser = parse_range, default_value = "0:1")]
    pub mesh: (f64, f64),
    /// Mesh intervals.
    #[arg(long, default_value_t = 100)]
    pub mesh_steps: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `lo:hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if !(lo <= hi) {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. }
            | Error::AboveErCurve { .. }
            | Error::NotInterior { .. }
            | Error::FamilyInfeasible { .. } => EXIT_INFEASIBLE,
            Error::NoCandidates => EXIT_NONCONVERGENCE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()));
    let outcome = match threads {
        Some(0) => Err(Failure::usage("--threads must be positive")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::usage(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let meta = metadata(cli);
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, cli.seed, &meta),
        Command::Scan(a) => cmd_scan(a, cli.seed, &meta),
        Command::Stability(a) => cmd_stability(a, &meta),
        Command::Classify(a) => cmd_classify(a, &meta),
        Command::Sample(a) => cmd_sample(a, cli.seed, &meta),
        Command::Boundary(a) => cmd_boundary(a, cli.seed, &meta),
    }
}

/// `# seed=… config=…` with the full parsed command line as JSON.
pub fn metadata(cli: &Cli) -> String {
    let config = serde_json::to_string(&cli.command).expect("config serializes");
    format!("# seed={} config={config}", cli.seed)
}

fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn cmd_solve(a: &SolveArgs, seed: u64, meta: &str) -> CmdResult {
    let pt = ConstraintPoint::new(a.eps, a.tau)?;
    let cfg = a.solver.config(seed);
    let result = match (a.family, a.m) {
        (Some(f), Some(m)) => solve_in_family(f, m, pt, &cfg)?,
        _ => solve(pt, &cfg)?,
    };
    let mut json = result.to_json_value();
    json["meta"] = serde_json::Value::String(meta.to_string());
    let text = serde_json::to_string_pretty(&json).expect("json") + "\n";
    emit(a.output.as_deref(), &text)?;
    Ok(match result.status {
        Status::Converged => EXIT_OK,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::MaxIterations => EXIT_NONCONVERGENCE,
    })
}

fn cmd_scan(a: &ScanArgs, seed: u64, meta: &str) -> CmdResult {
    let cfg = a.solver.config(seed);
    if a.line {
        let eps: f64 = a
            .eps
            .parse()
            .map_err(|_| Failure::usage(format!("--line needs a single --eps, got {:?}", a.eps)))?;
        let opts = LineOptions {
            cold_only: a.cold_only,
            ..LineOptions::default()
        };
        let records = scan_line_with(eps, a.tau, a.steps, &cfg, &opts)?;
        emit(a.output.as_deref(), &records_to_csv(&records, Some(meta))?)?;
        if let Some(p) = &a.transitions {
            let solved: Vec<_> = records.iter().filter(|r| r.is_solved()).cloned().collect();
            let events = detect_transitions(&solved, a.slope_jump_tol)?;
            std::fs::write(p, transitions_to_csv(&events, Some(meta))?)?;
        }
    } else {
        let eps = parse_range(&a.eps).map_err(Failure::usage)?;
        let lower = match &a.boundary_cache {
            Some(p) => Some(LowerBoundary::load_or_compute(p, &LowerBoundary::default_mesh(), &cfg)?),
            None => None,
        };
        let res = (a.eps_steps.unwrap_or(a.steps), a.steps);
        let records = scan_grid(eps, a.tau, res, &cfg, lower.as_ref())?;
        emit(a.output.as_deref(), &records_to_csv(&records, Some(meta))?)?;
        if let Some(p) = &a.svg {
            std::fs::write(p, grid_svg(&records, &[], eps, a.tau))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_stability(a: &StabilityArgs, meta: &str) -> CmdResult {
    let curve: StabilityCurve = stability_boundary(a.n, a.eps, a.eps_steps, a.tau_steps)?;
    emit(a.output.as_deref(), &format!("{meta}\n{}", curve.to_csv()))?;
    if let (Some(tau), Some(path)) = (a.region_tau, &a.region_output) {
        let r = a.region_resolution.clamp(2, crate::diagram::MAX_GRID);
        let axis =
            |(lo, hi): (f64, f64)| -> Vec<f64> { (0..r).map(|k| lo + (hi - lo) * k as f64 / (r - 1) as f64).collect() };
        let mut s = format!("{meta}\nepsilon,tau,stable\n");
        for e in axis(a.eps) {
            for t in axis(tau) {
                let stable = ConstraintPoint::new(e, t).is_ok_and(|pt| a_stable_at(a.n, pt));
                s.push_str(&format!("{e:.14e},{t:.14e},{}\n", u8::from(stable)));
            }
        }
        std::fs::write(path, s)?;
    }
    Ok(EXIT_OK)
}

/// Reads a graphon from a bare `{sizes, probs}` object or a `solve` output.
pub fn read_graphon(path: &Path) -> std::result::Result<MultipodalGraphon, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::usage(e.to_string()))?;
    let inner = value.get("graphon").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_classify(a: &ClassifyArgs, meta: &str) -> CmdResult {
    let g = read_graphon(&a.input)?;
    let label = classify(&g, a.tol, None);
    emit(None, &format!("{meta}\n{}\n", label.name()))?;
    Ok(EXIT_OK)
}

fn cmd_sample(a: &SampleArgs, seed: u64, meta: &str) -> CmdResult {
    let g = read_graphon(&a.input)?;
    let graph = sample_graph(&g, a.nodes, seed)?;
    let text = format!("{meta}\n# nodes={}\n{}", graph.node_count(), graph.to_edge_list());
    emit(a.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_boundary(a: &BoundaryArgs, seed: u64, meta: &str) -> CmdResult {
    if a.mesh_steps == 0 || a.mesh.0 < 0.0 || a.mesh.1 > 1.0 {
        return Err(Failure::usage("mesh must lie in [0, 1] with at least one step"));
    }
    let (lo, hi) = a.mesh;
    let mesh: Vec<f64> = (0..=a.mesh_steps)
        .map(|k| lo + (hi - lo) * k as f64 / a.mesh_steps as f64)
        .collect();
    let b = LowerBoundary::compute(&mesh, &a.solver.config(seed))?;
    emit(a.output.as_deref(), &b.to_csv(Some(meta)))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.3504:0.3971"), Ok((0.3504, 0.3971)));
        assert!(parse_range("0.4").is_err());
        assert!(parse_range("0.5:0.4").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["graphon-lab", "solve", "--eps", "0.5"]), EXIT_USAGE);
        assert_eq!(run(["graphon-lab", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            run(["graphon-lab", "solve", "--eps", "1.5", "--tau", "0.1"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn metadata_embeds_seed_and_args() {
        let cli = Cli::try_parse_from(["graphon-lab", "--seed", "7", "classify", "x.json"]).unwrap();
        let m = metadata(&cli);
        assert!(m.starts_with("# seed=7 config={"));
        assert!(m.contains("\"command\":\"classify\""));
    }
}
