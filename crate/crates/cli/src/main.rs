use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nodalkit_core::basis::{
    analyze_eigenspace, construct_signed_basis, construct_strong_support_basis, perturbation_stability_test,
    validate_signed_basis, ConstructionConfig, PerturbationReport, SignedBasisResult, StrongBasisConfig,
    StrongBasisResult, StructureConfig, ValidationConfig, ValidationReport,
};
use nodalkit_core::frustration::{frustration_index_exact_capped, frustration_index_heuristic, FrustrationResult};
use nodalkit_core::graph::{GraphInvariants, DEFAULT_ZERO_TOL};
use nodalkit_core::io::read_matrix;
use nodalkit_core::nodal::{
    inertia_counts, minimal_nodal_decomposition_heuristic, nodal_count, path_domain_counts, BoundContext,
    BoundReport, ExactConfig, InertiaCounts, NodalDecomposition, PathDomainCounts, SignConvention,
};
use nodalkit_core::random::{run_experiment, CliqueDomainConfig, EigenvectorStats, GnpqParams};
use nodalkit_core::spectral::{eigendecompose, group_eigenvalues, EigenGroup, DEFAULT_ENTRY_TOL, DEFAULT_GROUP_TOL};
use nodalkit_core::{DenseSymmetricMatrix, SignedGraph};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nodalkit", version, about = "Nodal domain counts and signed eigenbases of symmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the nodal bounds for every eigenvector of a matrix.
    Analyze(AnalyzeArgs),
    /// Build and validate a signed basis of a repeated eigenspace.
    ConstructBasis(ConstructArgs),
    /// Eigenvector statistics over G(n, p, q) samples.
    Experiment(ExperimentArgs),
    /// Frustration index of the signed graph of a matrix.
    Frustration(FrustrationArgs),
    /// Minimal nodal decomposition of a given vector.
    Nodal(NodalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    Laplacian,
    Adjacency,
}

impl From<Convention> for SignConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Laplacian => SignConvention::LaplacianLike,
            Convention::Adjacency => SignConvention::AdjacencyLike,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Matrix Market or signed edge-list file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "laplacian")]
    convention: Convention,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[arg(long, default_value_t = DEFAULT_GROUP_TOL)]
    group_tol: f64,
    /// Largest vertex count handled by the exact searches.
    #[arg(long, default_value_t = 20)]
    exact_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    /// The matrix in the Laplacian-like convention: adjacency-like input is negated.
    fn matrix(&self) -> Result<DenseSymmetricMatrix> {
        let m = read_matrix(&self.input).with_context(|| format!("reading {}", self.input.display()))?;
        Ok(match self.convention {
            Convention::Laplacian => m,
            Convention::Adjacency => m.negated(),
        })
    }

    fn exact(&self) -> ExactConfig {
        ExactConfig { cap: self.exact_cap, ..ExactConfig::default() }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    common: Common,
    /// 1-based eigenvalue index; defaults to every repeated eigenvalue.
    #[arg(long)]
    index: Option<usize>,
    /// Build the strong-support basis instead.
    #[arg(long)]
    strong: bool,
    /// Random rotation trials for the stability check.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Rotation radius relative to the guaranteed one.
    #[arg(long, default_value_t = 1.0)]
    upsilon_scale: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Clique size of the scanned domains.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Scan-set size.
    #[arg(long)]
    s: Option<usize>,
    /// Consecutive failed scans before stopping.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FrustrationArgs {
    #[command(flatten)]
    common: Common,
    /// Local search restarts when above the exact cap.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
}

#[derive(Args)]
struct NodalArgs {
    #[command(flatten)]
    common: Common,
    /// Vector entries separated by whitespace or commas.
    #[arg(long)]
    vector: PathBuf,
    /// Use the greedy heuristic only.
    #[arg(long)]
    heuristic: bool,
}

/// Result of a command: what to print and whether it found a violation.
struct Outcome {
    body: String,
    violation: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let (outcome, out) = match &cli.command {
        Command::Analyze(a) => (analyze(a), &a.common.out),
        Command::ConstructBasis(a) => (construct(a), &a.common.out),
        Command::Experiment(a) => (experiment(a), &a.out),
        Command::Frustration(a) => (frustration(a), &a.common.out),
        Command::Nodal(a) => (nodal(a), &a.common.out),
    };
    match outcome.and_then(|o| emit(&o.body, out.as_deref()).map(|()| o.violation)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NODALKIT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("NODALKIT_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn reject_csv(f: Format) -> Result<()> {
    if f == Format::Csv {
        bail!("csv output is only available for `experiment`");
    }
    Ok(())
}

fn frustration_of(g: &SignedGraph, cap: usize, seed: u64, restarts: usize) -> Result<FrustrationResult> {
    if g.n() <= cap {
        Ok(frustration_index_exact_capped(g, cap)?)
    } else {
        Ok(frustration_index_heuristic(g, seed, restarts))
    }
}

#[derive(Serialize)]
struct EigenvectorReport {
    index: usize,
    lambda: f64,
    /// `None` when the eigenvector vanishes somewhere.
    bounds: Option<BoundReport>,
    inertia: Option<InertiaCounts>,
    path_bounds_hold: Option<bool>,
    violation: bool,
}

#[derive(Serialize)]
struct AnalyzeReport {
    n: usize,
    invariants: GraphInvariants,
    f: usize,
    f_exact: bool,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<EigenvectorReport>,
    violations: usize,
}

fn analyze(a: &AnalyzeArgs) -> Result<Outcome> {
    let c = &a.common;
    reject_csv(c.format)?;
    let m = c.matrix()?;
    let mut ctx = BoundContext::new(&m)?;
    ctx.exact = c.exact();
    let spec = eigendecompose(&m)?;
    let groups = group_eigenvalues(&spec, c.group_tol);
    let mut rows = Vec::with_capacity(m.n());
    for g in &groups {
        for (j, phi) in g.basis.iter().enumerate() {
            let index = g.index_k + j;
            let single = EigenGroup { basis: vec![phi.clone()], ..g.clone() };
            let row = match ctx.verify(&m, g, phi) {
                Ok(b) => {
                    let inertia = inertia_counts(&m, &single, phi)?;
                    let paths = b.path_bounds_hold();
                    let violation = (b.exact_n && !b.satisfied) || !paths || !inertia.holds() || !b.refined_holds();
                    EigenvectorReport {
                        index,
                        lambda: g.lambda,
                        bounds: Some(b),
                        inertia: Some(inertia),
                        path_bounds_hold: Some(paths),
                        violation,
                    }
                }
                Err(nodalkit_core::NodalError::Vanishing { .. }) => EigenvectorReport {
                    index,
                    lambda: g.lambda,
                    bounds: None,
                    inertia: None,
                    path_bounds_hold: None,
                    violation: false,
                },
                Err(e) => return Err(e.into()),
            };
            rows.push(row);
        }
    }
    let violations = rows.iter().filter(|r| r.violation).count();
    let report = AnalyzeReport {
        n: m.n(),
        invariants: ctx.graph.invariants(),
        f: ctx.f,
        f_exact: ctx.f_exact,
        eigenvalues: spec.eigenvalues.clone(),
        eigenvectors: rows,
        violations,
    };
    let body = match c.format {
        Format::Json => json(&report)?,
        _ => analyze_text(&report),
    };
    Ok(Outcome { body, violation: violations > 0 })
}

fn analyze_text(r: &AnalyzeReport) -> String {
    let inv = &r.invariants;
    let mut s = format!(
        "n={} edges={} (+{} -{}) nu={} f={}{}\n",
        r.n,
        inv.e_total,
        inv.e_pos,
        inv.e_neg,
        inv.nu,
        r.f,
        if r.f_exact { "" } else { " (heuristic)" }
    );
    s += "idx      lambda   k  r    N  lower  upper  ok\n";
    for e in &r.eigenvectors {
        match &e.bounds {
            Some(b) => {
                s += &format!(
                    "{:>3} {:>11.6} {:>3} {:>2} {:>4}{} {:>6} {:>6}  {}\n",
                    e.index,
                    e.lambda,
                    b.k,
                    b.r,
                    b.n_value,
                    if b.exact_n { ' ' } else { '~' },
                    b.lower,
                    b.upper,
                    if e.violation { "VIOLATION" } else { "yes" }
                )
            }
            None => s += &format!("{:>3} {:>11.6}  vanishing entries, skipped\n", e.index, e.lambda),
        }
    }
    s += &format!("violations: {}\n", r.violations);
    s
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BasisOutput {
    Signed {
        result: SignedBasisResult,
        validation: ValidationReport,
        perturbation: Option<PerturbationReport>,
    },
    Strong {
        result: StrongBasisResult,
    },
}

impl BasisOutput {
    fn ok(&self) -> bool {
        match self {
            BasisOutput::Signed { result, validation, perturbation } => {
                validation.all_pass
                    && validation.complete
                    && result.bounds_hold()
                    && perturbation.as_ref().is_none_or(|p| p.fraction == 1.0)
            }
            BasisOutput::Strong { result } => result.bounds_hold(),
        }
    }
}

fn construct(a: &ConstructArgs) -> Result<Outcome> {
    let c = &a.common;
    reject_csv(c.format)?;
    let m = c.matrix()?;
    let spec = eigendecompose(&m)?;
    let groups = group_eigenvalues(&spec, c.group_tol);
    let selected: Vec<&EigenGroup> = match a.index {
        Some(i) => {
            let g = groups
                .iter()
                .find(|g| g.index_k <= i && i < g.index_k + g.multiplicity_r)
                .with_context(|| format!("eigenvalue index {i} is out of range 1..={}", m.n()))?;
            vec![g]
        }
        None => groups.iter().filter(|g| g.multiplicity_r > 1).collect(),
    };
    let mut outputs = Vec::with_capacity(selected.len());
    for g in selected {
        let out = if a.strong {
            let cfg = StrongBasisConfig { exact: c.exact(), ..StrongBasisConfig::default() };
            BasisOutput::Strong { result: construct_strong_support_basis(&m, &spec, g, &cfg)? }
        } else {
            let st_cfg = StructureConfig { seed: c.seed, ..StructureConfig::default() };
            let st = analyze_eigenspace(&m, g, &st_cfg)?;
            let cfg = ConstructionConfig { seed: c.seed, exact: c.exact(), ..ConstructionConfig::default() };
            let result = construct_signed_basis(&m, g, &st, &cfg)?;
            let vcfg = ValidationConfig { exact: c.exact(), ..ValidationConfig::default() };
            let validation = validate_signed_basis(&m, g, &result, result.f, &vcfg)?;
            let perturbation = if a.trials > 0 {
                Some(perturbation_stability_test(&m, &result, a.upsilon_scale, a.trials, c.seed)?)
            } else {
                None
            };
            BasisOutput::Signed { result, validation, perturbation }
        };
        outputs.push(out);
    }
    let violation = outputs.iter().any(|o| !o.ok());
    let body = match c.format {
        Format::Json => json(&outputs)?,
        _ => construct_text(&outputs),
    };
    Ok(Outcome { body, violation })
}

fn construct_text(outputs: &[BasisOutput]) -> String {
    let mut s = String::new();
    if outputs.is_empty() {
        s += "no repeated eigenvalues\n";
    }
    for o in outputs {
        match o {
            BasisOutput::Signed { result, validation, perturbation } => {
                s += &format!(
                    "lambda={:.6} k={} r={} f={}{}\n",
                    result.eigenvalue,
                    result.k,
                    result.r,
                    result.f,
                    if result.certified { "" } else { " (uncertified)" }
                );
                for (v, chk) in result.vectors.iter().zip(&validation.vectors) {
                    s += &format!(
                        "  s={} N={} bound={} residual={:.1e} overlap={:.1e} {}\n",
                        chk.s,
                        v.n_value,
                        v.bound,
                        chk.residual,
                        chk.max_overlap,
                        if chk.passes(&ValidationConfig::default()) { "ok" } else { "FAIL" }
                    );
                }
                if let Some(p) = perturbation {
                    s += &format!("  perturbation: {}/{} stable at upsilon={:.3e}\n", p.passed, p.trials, p.upsilon);
                }
            }
            BasisOutput::Strong { result } => {
                s += &format!("lambda={:.6} k={} r={} f={} (strong)\n", result.eigenvalue, result.k, result.r, result.f);
                for (i, v) in result.vectors.iter().enumerate() {
                    s += &format!(
                        "  s={} support={} Ns={} bound={} {}\n",
                        i + 1,
                        v.support.len(),
                        v.ns,
                        v.bound,
                        if v.ns <= v.bound { "ok" } else { "FAIL" }
                    );
                }
            }
        }
    }
    s
}

/// One CSV row of the experiment output.
#[derive(Serialize)]
struct ExperimentRow {
    seed: u64,
    i: usize,
    kappa_gt: usize,
    #[serde(rename = "N_heur")]
    n_heur: usize,
    clique_count: usize,
    leftover: usize,
    max_size: usize,
    bound_ok: bool,
}

impl From<&EigenvectorStats> for ExperimentRow {
    fn from(s: &EigenvectorStats) -> Self {
        Self {
            seed: s.seed,
            i: s.index,
            kappa_gt: s.paths.kappa_gt,
            n_heur: s.n_heuristic,
            clique_count: s.clique_count,
            leftover: s.leftover,
            max_size: s.max_size,
            bound_ok: s.bound_ok,
        }
    }
}

fn experiment(a: &ExperimentArgs) -> Result<Outcome> {
    GnpqParams { n: a.n, p: a.p, q: a.q, seed: a.seed }.validate()?;
    let seeds: Vec<u64> = (0..a.samples).map(|i| a.seed.wrapping_add(i)).collect();
    let cfg = CliqueDomainConfig { k: a.k, s: a.s, budget: a.budget };
    let stats = run_experiment(a.n, a.p, a.q, &seeds, &cfg)?;
    let rows: Vec<ExperimentRow> = stats.iter().map(ExperimentRow::from).collect();
    let violation = rows.iter().any(|r| !r.bound_ok);
    let body = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        Format::Json => json(&stats)?,
        Format::Text => {
            let n = rows.len().max(1) as f64;
            let trivial = rows.iter().filter(|r| r.kappa_gt == 1).count();
            let leftover: usize = rows.iter().map(|r| r.leftover).sum();
            let max_size = rows.iter().map(|r| r.max_size).max().unwrap_or(0);
            format!(
                "samples={} eigenvectors={}\npath-trivial fraction={:.4}\nmean leftover={:.3}\nlargest domain={} ({})\n",
                seeds.len(),
                rows.len(),
                trivial as f64 / n,
                leftover as f64 / n,
                max_size,
                if violation { "exceeds bound" } else { "within bound" }
            )
        }
    };
    Ok(Outcome { body, violation })
}

fn frustration(a: &FrustrationArgs) -> Result<Outcome> {
    let c = &a.common;
    reject_csv(c.format)?;
    let m = c.matrix()?;
    let g = SignedGraph::from_symmetric_matrix(&m, c.zero_tol)?;
    let res = frustration_of(&g, c.exact_cap.max(nodalkit_core::frustration::DEFAULT_FRUSTRATION_CAP), c.seed, a.restarts)?;
    let body = match c.format {
        Format::Json => json(&res)?,
        _ => {
            let w: Vec<String> = res.witness.values().iter().map(|v| v.to_string()).collect();
            format!("f={}{}\nwitness={}\n", res.f, if res.exact { "" } else { " (heuristic)" }, w.join(" "))
        }
    };
    Ok(Outcome { body, violation: false })
}

#[derive(Serialize)]
struct NodalReport {
    decomposition: NodalDecomposition,
    paths: PathDomainCounts,
}

fn parse_vector(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let x: Vec<f64> = text
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad vector entry {t:?}")))
        .collect::<Result<_>>()?;
    if x.len() != n {
        bail!("vector has {} entries, matrix has {n} rows", x.len());
    }
    Ok(x)
}

fn nodal(a: &NodalArgs) -> Result<Outcome> {
    let c = &a.common;
    reject_csv(c.format)?;
    // The convention is applied to the decomposition, not by negating the input.
    let m = read_matrix(&c.input).with_context(|| format!("reading {}", c.input.display()))?;
    let g = SignedGraph::from_symmetric_matrix(&m, c.zero_tol)?;
    let x = parse_vector(&a.vector, m.n())?;
    let conv = c.convention.into();
    let decomposition = if a.heuristic {
        minimal_nodal_decomposition_heuristic(&g, &m, &x, conv, c.seed)?
    } else {
        nodal_count(&g, &m, &x, conv, &c.exact())?
    };
    let paths = path_domain_counts(&g, &m, &x, conv, DEFAULT_ENTRY_TOL);
    let report = NodalReport { decomposition, paths };
    let body = match c.format {
        Format::Json => json(&report)?,
        _ => {
            let d = &report.decomposition;
            let mut s = format!("N={}{}\n", d.size, if d.certified_minimal { "" } else { " (upper bound)" });
            for p in &d.parts {
                let v: Vec<String> = p.iter().map(|i| (i + 1).to_string()).collect();
                s += &format!("  {{{}}}\n", v.join(","));
            }
            s
        }
    };
    Ok(Outcome { body, violation: false })
}
