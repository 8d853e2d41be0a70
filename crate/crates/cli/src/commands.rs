use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use voronoigram::asymptotics::limit_constants;
use voronoigram::estimators::{fit_graph_tvd, fit_voronoigram, PiecewiseConstantFn};
use voronoigram::experiments::{
    mse_sweep, render_fit, simulate_dataset, summarize_mse, summarize_tv, tv_estimation_sweep,
    write_csv, ExperimentConfig, RunManifest, SamplingModel,
};
use voronoigram::graph::{discrete_tv, parse_graph, WeightScheme};
use voronoigram::io::{parse_run_config, parse_values, read_dataset, write_dataset_csv};
use voronoigram::solver::{ComponentStat, Diagnostics, TvFit};

use crate::GraphArg;

/// A solver run that did not meet its stopping rule.
#[derive(Debug)]
struct NonConvergence {
    details: Value,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "solver did not converge")
    }
}

impl std::error::Error for NonConvergence {}

/// Invalid flag or config combination.
#[derive(Debug)]
struct BadConfig(String);

impl fmt::Display for BadConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadConfig {}

fn bad_config(msg: impl Into<String>) -> anyhow::Error {
    BadConfig(msg.into()).into()
}

/// The JSON error object printed on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    kind: String,
    message: String,
    context: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Value>,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self {
            kind: "usage".into(),
            message,
            context: Vec::new(),
            details: None,
        }
    }
}

fn kind_of(e: &voronoigram::Error) -> &'static str {
    use voronoigram::Error::*;
    match e {
        DegenerateInput(_) => "degenerate_input",
        ShapeMismatch { .. } => "shape_mismatch",
        InvalidParameter(_) => "invalid_parameter",
        DivergentIntegral(_) => "divergent_integral",
        UnsupportedDescriptor(_) => "unsupported_descriptor",
        Parse { .. } => "parse",
        Io(_) => "io",
        Csv(_) => "csv",
        Json(_) => "json",
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        let mut kind = "other".to_string();
        let mut details = None;
        for cause in e.chain() {
            if let Some(lib) = cause.downcast_ref::<voronoigram::Error>() {
                kind = kind_of(lib).into();
                break;
            } else if let Some(nc) = cause.downcast_ref::<NonConvergence>() {
                kind = "non_convergence".into();
                details = Some(nc.details.clone());
                break;
            } else if cause.is::<BadConfig>() {
                kind = "bad_config".into();
                break;
            } else if cause.is::<std::io::Error>() {
                kind = "io".into();
                break;
            } else if cause.is::<serde_json::Error>() {
                kind = "json".into();
                break;
            }
        }
        let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
        let (message, context) = chain
            .split_last()
            .map_or((String::new(), Vec::new()), |(m, c)| {
                (m.clone(), c.to_vec())
            });
        Self {
            kind,
            message,
            context,
            details,
        }
    }
}

pub fn report(e: &CliError) {
    let text = serde_json::to_string(&json!({ "error": e })).unwrap_or_else(|_| format!("{e:?}"));
    eprintln!("{text}");
}

pub fn set_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(bad_config("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn load_config(source: Option<&str>) -> Result<ExperimentConfig> {
    match source {
        None | Some("default") => Ok(ExperimentConfig::default()),
        Some(path) => {
            let text = read(Path::new(path))?;
            parse_run_config(&text).with_context(|| format!("loading run config {path}"))
        }
    }
}

pub fn gen_data(
    model: &str,
    n: usize,
    seed: u64,
    snr: f64,
    noiseless: bool,
    out: &Path,
) -> Result<()> {
    let model: SamplingModel = model
        .parse()
        .map_err(|e: voronoigram::Error| bad_config(e.to_string()))?;
    if n == 0 {
        return Err(bad_config("--n must be at least 1"));
    }
    let data = simulate_dataset(model, n, snr, seed)?;
    let y = if noiseless {
        data.truth
            .clone()
            .expect("simulated data carries the truth")
    } else {
        data.y.clone()
    };
    let mut buf = Vec::new();
    write_dataset_csv(&data.points, &y, &mut buf)?;
    write(out, &buf)
}

pub struct FitArgs {
    pub graph: GraphArg,
    pub lambda: f64,
    pub input: PathBuf,
    pub out: PathBuf,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub c0: f64,
    pub config: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// On-disk fit: enough to re-render without refitting.
#[derive(Debug, Serialize, Deserialize)]
struct FitFile {
    scheme: WeightScheme,
    lambda: f64,
    #[serde(rename = "K")]
    k: usize,
    theta: Vec<f64>,
    labels: Vec<usize>,
    fuse_tol: f64,
    component_stats: Vec<ComponentStat>,
    diagnostics: Diagnostics,
}

impl FitFile {
    fn new(scheme: WeightScheme, fit: &TvFit) -> Self {
        Self {
            scheme,
            lambda: fit.lambda,
            k: fit.n_components,
            theta: fit.theta.clone(),
            labels: fit.labels.clone(),
            fuse_tol: fit.fuse_tol,
            component_stats: fit.component_stats.clone(),
            diagnostics: fit.diagnostics.clone(),
        }
    }

    fn into_fit(self) -> TvFit {
        TvFit {
            theta: self.theta,
            lambda: self.lambda,
            fuse_tol: self.fuse_tol,
            labels: self.labels,
            n_components: self.k,
            component_stats: self.component_stats,
            diagnostics: self.diagnostics,
        }
    }
}

pub fn fit(args: FitArgs) -> Result<()> {
    let cfg = load_config(args.config.as_ref().and_then(|p| p.to_str()))?;
    let data = read_dataset(&read(&args.input)?)
        .with_context(|| format!("loading data {}", args.input.display()))?;
    let n = data.len();
    let scheme = match args.graph {
        GraphArg::Voronoi => WeightScheme::ExactVoronoi,
        GraphArg::VoronoiUnit => WeightScheme::UnitVoronoi,
        GraphArg::VoronoiClipped => WeightScheme::ClippedVoronoi { c0: args.c0 },
        GraphArg::Eps => WeightScheme::Epsilon {
            eps: args.eps.unwrap_or_else(|| cfg.eps(n)),
        },
        GraphArg::Knn => WeightScheme::Knn {
            k: args.k.unwrap_or_else(|| cfg.knn_k(n)),
        },
    };
    let (fit, f) = if scheme.is_voronoi() {
        fit_voronoigram(&data, args.lambda, scheme, &cfg.solver)
    } else {
        fit_graph_tvd(&data, scheme, args.lambda, &cfg.solver)
    }
    .with_context(|| format!("fitting {scheme:?} at lambda = {}", args.lambda))?;

    let file = FitFile::new(scheme, &fit);
    write(&args.out, serde_json::to_string_pretty(&file)?.as_bytes())?;
    if let Some(svg) = &args.svg {
        if let Some(dir) = svg.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        render_fit(&f, &fit, svg).with_context(|| format!("rendering {}", svg.display()))?;
    }
    if !fit.diagnostics.converged {
        return Err(NonConvergence {
            details: serde_json::to_value(&fit.diagnostics)?,
        }
        .into());
    }
    Ok(())
}

pub fn dtv(graph: &Path, values: &Path) -> Result<()> {
    let g =
        parse_graph(&read(graph)?).with_context(|| format!("parsing graph {}", graph.display()))?;
    let v = parse_values(&read(values)?)
        .with_context(|| format!("parsing values {}", values.display()))?;
    let d = discrete_tv(&g, &v)?;
    print_json(&json!({ "dtv": d, "n": g.n(), "m": g.m() }))
}

pub fn constants(d: usize) -> Result<()> {
    print_json(&limit_constants(d).with_context(|| format!("limit constants in dimension {d}"))?)
}

#[derive(clap::Args, Debug)]
pub struct SweepArgs {
    /// Run config or manifest JSON; `default` for the built-in settings.
    #[arg(long, default_value = "default")]
    config: String,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Comma-separated sample sizes (TV sweep: n_values, risk sweep: mse_n_values).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated sampling models.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Row CSV (default: <output_dir>/<sweep>.csv, or stdout without an output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell means as CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Run manifest JSON (default: next to --out).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = load_config(Some(&self.config))?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.repetitions {
            cfg.repetitions = r;
        }
        if let Some(models) = &self.models {
            cfg.models = models
                .iter()
                .map(|m| {
                    m.parse()
                        .map_err(|e: voronoigram::Error| bad_config(e.to_string()))
                })
                .collect::<Result<_>>()?;
        }
        cfg.validate().map_err(|e| bad_config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Writes rows (and optional summary) plus the manifest.
fn emit<R: Serialize, S: Serialize>(
    args: &SweepArgs,
    cfg: &ExperimentConfig,
    command: &str,
    rows: &[R],
    summary: &[S],
) -> Result<()> {
    let out = args.out.clone().or_else(|| {
        cfg.output_dir
            .as_ref()
            .map(|d| d.join(format!("{command}.csv")))
    });
    let mut manifest = RunManifest::new(command, cfg)?;
    let mut csv = Vec::new();
    write_csv(rows, &mut csv)?;
    match &out {
        Some(path) => {
            write(path, &csv)?;
            manifest.add_output(&path.display().to_string(), &csv);
        }
        None => std::io::stdout().lock().write_all(&csv)?,
    }
    if let Some(path) = &args.summary {
        let mut s = Vec::new();
        write_csv(summary, &mut s)?;
        write(path, &s)?;
        manifest.add_output(&path.display().to_string(), &s);
    }
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| out.as_ref().map(|p| p.with_extension("manifest.json")));
    if let Some(path) = manifest_path {
        write(&path, manifest.to_json_pretty()?.as_bytes())?;
    }
    Ok(())
}

pub fn sweep_tv(args: &SweepArgs) -> Result<()> {
    let mut cfg = args.config()?;
    if let Some(n) = &args.n {
        cfg.n_values = n.clone();
    }
    cfg.validate().map_err(|e| bad_config(e.to_string()))?;
    let rows = tv_estimation_sweep(&cfg).context("running the TV sweep")?;
    emit(args, &cfg, "sweep-tv", &rows, &summarize_tv(&rows))
}

pub fn sweep_mse(args: &SweepArgs) -> Result<()> {
    let mut cfg = args.config()?;
    if let Some(n) = &args.n {
        cfg.mse_n_values = n.clone();
    }
    cfg.validate().map_err(|e| bad_config(e.to_string()))?;
    let rows = mse_sweep(&cfg).context("running the risk sweep")?;
    emit(args, &cfg, "sweep-mse", &rows, &summarize_mse(&rows))?;
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        bail!(NonConvergence {
            details: json!({ "failed_fits": failed, "total_fits": rows.len() }),
        });
    }
    Ok(())
}

pub fn render(input: &Path, fit: &Path, out: &Path) -> Result<()> {
    let data =
        read_dataset(&read(input)?).with_context(|| format!("loading data {}", input.display()))?;
    let file: FitFile = serde_json::from_str(&read(fit)?)
        .with_context(|| format!("parsing fit {}", fit.display()))?;
    if file.theta.len() != data.len() {
        return Err(anyhow!(voronoigram::Error::ShapeMismatch {
            expected: data.len(),
            got: file.theta.len(),
        }))
        .context("fit does not match the data");
    }
    let f = PiecewiseConstantFn::new(&data.points, file.theta.clone())?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let summary = render_fit(&f, &file.into_fit(), out)?;
    print_json(&summary)
}
