//! Command-line front end: `match`, `generate`, `bench` and `acppr`.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 degenerate input,
//! 4 internal invariant violation.

pub mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dpmatch::eval::series_csv;
use dpmatch::io::{
    format_match_csv, format_point_set, format_truth_csv, parse_match_csv, parse_point_set,
    parse_truth_csv,
};
use dpmatch::matcher::match_point_sets_with;
use dpmatch::{
    emit_figure_series, generate_scene, run_grid, Figure, GridSpec, GroundTruth, IterationConfig,
    MatchConfig, Matching, PlantedTransform, PointSet, RigidTransform, SimilarityThresholds,
    SynthConfig, DEFAULT_RANGE,
};
use thiserror::Error;

use crate::config::{resolve, resolve_list, resolve_opt, ConfigFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: dpmatch::Error,
    },
    #[error(transparent)]
    Core(#[from] dpmatch::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        fn core_code(e: &dpmatch::Error) -> i32 {
            use dpmatch::Error as E;
            match e {
                E::Parse { .. } | E::InvalidConfig(_) => 2,
                E::Degenerate(_) | E::NoCorrespondences | E::UndefinedMetric => 3,
                E::ShapeMismatch { .. } => 4,
                E::Trial { source, .. } => core_code(source),
            }
        }
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Input { source, .. } | CliError::Core(source) => core_code(source),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "dpmatch",
    version,
    about = "Robust directed point-set matching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match two point-set files and print `i,j,score` rows.
    Match(MatchArgs),
    /// Write a synthetic scene: a.txt, b.txt and truth.csv.
    Generate(GenerateArgs),
    /// Run the ACPPR grid and write one table per K.
    Bench(BenchArgs),
    /// Score a match CSV against a ground-truth CSV.
    Acppr(AcpprArgs),
}

/// Matching parameters shared by `match` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct MatchFlags {
    /// Neighbor count K.
    #[arg(long)]
    pub k: Option<usize>,
    /// x-translation threshold.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// y-translation threshold.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Rotation threshold in radians.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Stop once no score changes by this much between iterations.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Drop matched pairs whose final score is below this value.
    #[arg(long)]
    pub tau: Option<f64>,
}

const MATCH_KEYS: &[&str] = &["k", "alpha", "beta", "delta", "max-iter", "tol", "tau"];

impl MatchFlags {
    fn resolve(&self, file: &ConfigFile) -> Result<MatchConfig> {
        let d = SimilarityThresholds::default();
        let thresholds = SimilarityThresholds::new(
            resolve(self.alpha, file, "alpha", d.alpha())?,
            resolve(self.beta, file, "beta", d.beta())?,
            resolve(self.delta, file, "delta", d.delta())?,
        )?;
        let it = IterationConfig::default();
        let iteration = IterationConfig::new(
            resolve(self.max_iter, file, "max-iter", it.max_iterations())?,
            resolve(self.tol, file, "tol", it.convergence_tol())?,
        )?;
        let k = resolve(self.k, file, "k", MatchConfig::default().k())?;
        let tau = resolve_opt(self.tau, file, "tau")?;
        Ok(MatchConfig::new(k, thresholds, iteration, tau)?)
    }
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    pub file_a: PathBuf,
    pub file_b: PathBuf,
    #[command(flatten)]
    pub params: MatchFlags,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump the normalized score matrix of every iteration into this
    /// directory as scores_iterNNN.csv.
    #[arg(long)]
    pub dump_scores: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SceneFlags {
    /// Number of points per set.
    #[arg(long)]
    pub n: Option<usize>,
    /// Side length of the square scene.
    #[arg(long)]
    pub range: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scene: SceneFlags,
    /// Fraction of pairs replaced by noise.
    #[arg(long)]
    pub outlier: Option<f64>,
    /// Jitter range as a fraction of the scene range.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// `random` or `theta,tx,ty`.
    #[arg(long, allow_hyphen_values = true)]
    pub transform: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub scene: SceneFlags,
    #[command(flatten)]
    pub params: MatchFlags,
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub outlier_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub jitter_list: Option<Vec<f64>>,
    /// Trials per grid cell.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Also write figN.csv for each listed figure (1, 2, 3).
    #[arg(long, value_delimiter = ',')]
    pub emit_fig: Option<Vec<u8>>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AcpprArgs {
    /// Output of `dpmatch match`.
    pub pairs: PathBuf,
    /// truth.csv from `dpmatch generate`.
    pub truth: PathBuf,
}

fn load_config(path: &Option<PathBuf>, allowed: &[&str]) -> Result<ConfigFile> {
    let file = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    file.check_keys(allowed)?;
    Ok(file)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_points(path: &Path) -> Result<PointSet> {
    parse_point_set(&read_text(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes via a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn cmd_match(args: &MatchArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
    let file = load_config(&args.config, MATCH_KEYS)?;
    let cfg = args.params.resolve(&file)?;
    let a = read_points(&args.file_a)?;
    let b = read_points(&args.file_b)?;

    let mut dumps = Vec::new();
    let result = match_point_sets_with(&a, &b, &cfg, |step| {
        if args.dump_scores.is_some() {
            dumps.push((step.iteration, step.normalized.to_csv()));
        }
    })?;
    if let Some(dir) = &args.dump_scores {
        ensure_dir(dir)?;
        for (iteration, csv) in &dumps {
            write_atomic(&dir.join(format!("scores_iter{iteration:03}.csv")), csv)?;
        }
    }

    let csv = format_match_csv(&result);
    match &args.out {
        Some(path) => write_atomic(path, &csv),
        None => stdout
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn parse_transform(spec: &str) -> Result<PlantedTransform> {
    if spec.eq_ignore_ascii_case("random") {
        return Ok(PlantedTransform::Random);
    }
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "--transform: expected `random` or `theta,tx,ty`, got {spec:?}"
            ))
        })?;
    match parts[..] {
        [theta, tx, ty] if parts.iter().all(|v| v.is_finite()) => {
            Ok(PlantedTransform::Fixed(RigidTransform::new(theta, tx, ty)))
        }
        _ => Err(CliError::Usage(format!(
            "--transform: expected three finite numbers, got {spec:?}"
        ))),
    }
}

const SCENE_KEYS: &[&str] = &["n", "range", "seed"];

impl SceneFlags {
    fn resolve(&self, file: &ConfigFile) -> Result<SynthConfig> {
        let n = resolve(self.n, file, "n", 50)?;
        let range = resolve(self.range, file, "range", DEFAULT_RANGE)?;
        let seed = resolve(self.seed, file, "seed", 0)?;
        Ok(SynthConfig::new(n, 0.0, 0.0)
            .with_range(range)
            .with_seed(seed))
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let keys: Vec<&str> = SCENE_KEYS
        .iter()
        .copied()
        .chain(["outlier", "jitter", "transform"])
        .collect();
    let file = load_config(&args.config, &keys)?;
    let transform = match resolve_opt(args.transform.clone(), &file, "transform")? {
        Some(s) => parse_transform(&s)?,
        None => PlantedTransform::Random,
    };
    let cfg = args
        .scene
        .resolve(&file)?
        .with_ratios(
            resolve(args.outlier, &file, "outlier", 0.0)?,
            resolve(args.jitter, &file, "jitter", 0.0)?,
        )
        .with_planted(transform);
    let (a, b, gt) = generate_scene(&cfg)?;

    ensure_dir(&args.out_dir)?;
    let t = gt.planted_transform();
    let header = format!(
        "# n={} range={} outlier={} jitter={} seed={}\n# planted transform {} {} {}\n",
        cfg.n(),
        cfg.range(),
        cfg.outlier_ratio(),
        cfg.jitter_ratio(),
        cfg.seed(),
        t.theta(),
        t.tx(),
        t.ty()
    );
    write_atomic(
        &args.out_dir.join("a.txt"),
        &(header.clone() + &format_point_set(&a)),
    )?;
    write_atomic(
        &args.out_dir.join("b.txt"),
        &(header + &format_point_set(&b)),
    )?;
    write_atomic(&args.out_dir.join("truth.csv"), &format_truth_csv(&gt))?;
    Ok(())
}

/// A fully resolved `bench` invocation.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub spec: GridSpec,
    pub figures: Vec<Figure>,
    pub threads: Option<usize>,
}

/// Assembles the grid from flags, config file and defaults.
pub fn resolve_bench(args: &BenchArgs) -> Result<BenchPlan> {
    let keys: Vec<&str> = SCENE_KEYS
        .iter()
        .chain(MATCH_KEYS)
        .copied()
        .chain([
            "k-list",
            "outlier-list",
            "jitter-list",
            "trials",
            "emit-fig",
            "threads",
        ])
        .collect();
    let file = load_config(&args.config, &keys)?;
    let d = GridSpec::default();
    let scene = args.scene.resolve(&file)?;
    let spec = GridSpec {
        k_values: resolve_list(args.k_list.clone(), &file, "k-list", d.k_values)?,
        outlier_ratios: resolve_list(
            args.outlier_list.clone(),
            &file,
            "outlier-list",
            d.outlier_ratios,
        )?,
        jitter_ratios: resolve_list(
            args.jitter_list.clone(),
            &file,
            "jitter-list",
            d.jitter_ratios,
        )?,
        trials: resolve(args.trials, &file, "trials", d.trials)?,
        seed: scene.seed(),
        scene,
        matching: args.params.resolve(&file)?,
    };
    spec.validate()?;
    let figures = resolve_list(args.emit_fig.clone(), &file, "emit-fig", Vec::new())?
        .into_iter()
        .map(Figure::from_number)
        .collect::<std::result::Result<_, _>>()?;
    let threads = resolve_opt(args.threads, &file, "threads")?;
    Ok(BenchPlan {
        spec,
        figures,
        threads,
    })
}

pub fn cmd_bench(args: &BenchArgs, log: &mut dyn std::io::Write) -> Result<()> {
    let BenchPlan {
        spec,
        figures,
        threads,
    } = resolve_bench(args)?;
    let result = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(|| run_grid(&spec))?,
        None => run_grid(&spec)?,
    };

    // Render everything before touching the filesystem.
    let mut outputs: Vec<(PathBuf, String)> = result
        .tables
        .iter()
        .map(|t| {
            (
                args.out_dir.join(format!("acppr_k{}.csv", t.k)),
                result.table_csv(t),
            )
        })
        .collect();
    for fig in figures {
        let series = emit_figure_series(&result, fig)?;
        outputs.push((
            args.out_dir.join(format!("fig{}.csv", fig.number())),
            series_csv(fig, &series),
        ));
    }
    ensure_dir(&args.out_dir)?;
    for (path, csv) in &outputs {
        write_atomic(path, csv)?;
    }
    for t in &result.tables {
        let _ = writeln!(
            log,
            "K={:<3} mean ACPPR {:.1}%",
            t.k,
            100.0 * t.grand_mean()
        );
    }
    Ok(())
}

pub fn cmd_acppr(args: &AcpprArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
    let parsed = parse_match_csv(&read_text(&args.pairs)?).map_err(|source| CliError::Input {
        path: args.pairs.clone(),
        source,
    })?;
    let rows = parse_truth_csv(&read_text(&args.truth)?).map_err(|source| CliError::Input {
        path: args.truth.clone(),
        source,
    })?;
    let gt = GroundTruth::from_rows(&rows, RigidTransform::IDENTITY);
    let value = dpmatch::acppr(&Matching::new(parsed.pairs), &gt)?;
    let hits = (value * gt.true_pairs().len() as f64).round() as usize;
    writeln!(
        stdout,
        "acppr {value} ({hits}/{} true pairs)",
        gt.true_pairs().len()
    )
    .map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Runs a parsed command line, writing normal output to `stdout` and
/// progress to `stderr`.
pub fn run(
    cli: &Cli,
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
) -> Result<()> {
    match &cli.command {
        Command::Match(a) => cmd_match(a, stdout),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a, stderr),
        Command::Acppr(a) => cmd_acppr(a, stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dpmatch").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn transform_specs() {
        assert_eq!(parse_transform("random").unwrap(), PlantedTransform::Random);
        assert_eq!(
            parse_transform("0.5,-3,4").unwrap(),
            PlantedTransform::Fixed(RigidTransform::new(0.5, -3.0, 4.0))
        );
        assert!(parse_transform("1,2").is_err());
        assert!(parse_transform("a,b,c").is_err());
    }

    #[test]
    fn bench_defaults_cover_the_standard_grid() {
        let Command::Bench(args) = parse(&["bench"]).command else {
            panic!("expected bench");
        };
        let spec = resolve_bench(&args).unwrap().spec;
        assert_eq!(spec.k_values, vec![6, 12, 25, 50]);
        assert_eq!(spec.outlier_ratios.len(), 7);
        assert_eq!(spec.jitter_ratios.len(), 7);
        assert_eq!(spec.trials, 20);
        assert_eq!(spec.scene.n(), 50);
        let th = spec.matching.thresholds;
        assert_eq!((th.alpha(), th.beta()), (10.0, 10.0));
        assert_eq!(th.delta(), std::f64::consts::FRAC_PI_6);
    }

    #[test]
    fn config_file_and_flags_layer() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("grid.conf");
        fs::write(&cfg, "trials = 3\nk_list = 4, 8\nalpha = 7\nseed = 9\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        let Command::Bench(args) = parse(&["bench", "--config", cfg, "--trials", "5"]).command
        else {
            panic!("expected bench");
        };
        let spec = resolve_bench(&args).unwrap().spec;
        assert_eq!(spec.trials, 5);
        assert_eq!(spec.k_values, vec![4, 8]);
        assert_eq!(spec.matching.thresholds.alpha(), 7.0);
        assert_eq!(spec.matching.thresholds.beta(), 10.0);
        assert_eq!(spec.seed, 9);
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.conf");
        fs::write(&cfg, "trails = 3\n").unwrap();
        let Command::Bench(args) = parse(&["bench", "--config", cfg.to_str().unwrap()]).command
        else {
            panic!("expected bench");
        };
        let err = resolve_bench(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
        assert_eq!(
            CliError::Core(dpmatch::Error::Degenerate(String::new())).exit_code(),
            3
        );
        let trial = dpmatch::Error::Trial {
            k: 1,
            outlier: 0.0,
            jitter: 0.0,
            trial: 0,
            source: Box::new(dpmatch::Error::ShapeMismatch {
                expected: String::new(),
                actual: String::new(),
            }),
        };
        assert_eq!(CliError::Core(trial).exit_code(), 4);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
