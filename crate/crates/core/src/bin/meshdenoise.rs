//! Command-line front end: denoise, add-noise, metrics, feature-edges, and
//! stats subcommands over OBJ/PLY meshes, with JSON logs and reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mesh_denoise::error::MeshError;
use mesh_denoise::field::{FaceField, MeshStats};
use mesh_denoise::filter::SimilarityKernel;
use mesh_denoise::io::{self, MeshFormat};
use mesh_denoise::mesh::Mesh;
use mesh_denoise::metrics::{self, ParamsEcho};
use mesh_denoise::noise::{self, NoiseDirection, NoiseDistribution, NoiseSpec};
use mesh_denoise::pipeline::{self, DenoiseConfig, IterationRecord};

#[derive(Parser)]
#[command(
    name = "meshdenoise",
    version,
    about = "Feature-preserving triangle-mesh denoising",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a mesh and write the result plus an iteration log.
    Denoise(DenoiseArgs),
    /// Corrupt a clean mesh with synthetic noise for benchmarking.
    AddNoise(AddNoiseArgs),
    /// Score a denoised mesh against its clean reference.
    Metrics(MetricsArgs),
    /// List edges whose dihedral angle marks them as sharp features.
    FeatureEdges(FeatureEdgesArgs),
    /// Print summary statistics for a mesh.
    Stats(StatsArgs),
}

#[derive(Args)]
struct DenoiseArgs {
    /// Input mesh (.obj or .ply).
    input: PathBuf,

    /// Output mesh path; format follows the extension.
    #[arg(short, long)]
    output: PathBuf,

    /// Similarity kernel scale on the face-normal difference.
    #[arg(long)]
    sigma_s: Option<f64>,

    /// Initial fidelity weight; decays each iteration.
    #[arg(long)]
    lambda: Option<f64>,

    /// Outer iterations (filter pass + vertex pass each).
    #[arg(long)]
    iters: Option<usize>,

    /// Spatial kernel scale; defaults to the mean adjacent-centroid distance.
    #[arg(long)]
    sigma_c: Option<f64>,

    /// Neighborhood disk radius; defaults to twice the mean adjacent-centroid
    /// distance.
    #[arg(long)]
    radius: Option<f64>,

    /// Per-iteration multiplier on lambda.
    #[arg(long)]
    decay: Option<f64>,

    /// Vertex (Jacobi) passes per outer iteration.
    #[arg(long)]
    inner_vertex_iters: Option<usize>,

    /// Rebuild the neighborhood disks from the moved mesh every iteration.
    #[arg(long)]
    recompute_disks: bool,

    /// Similarity kernel; gaussian exists for ablation runs.
    #[arg(long, value_enum)]
    similarity: Option<KernelArg>,

    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Iteration log path (default: output path with a .log.json extension).
    #[arg(long)]
    log: Option<PathBuf>,

    /// Write PLY output as ASCII instead of binary little-endian.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct AddNoiseArgs {
    /// Clean input mesh (.obj or .ply).
    input: PathBuf,

    /// Output mesh path; format follows the extension.
    #[arg(short, long)]
    output: PathBuf,

    /// Noise magnitude distribution.
    #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
    dist: DistArg,

    /// Displacement direction model.
    #[arg(long, value_enum, default_value_t = DirArg::Random)]
    dir: DirArg,

    /// Noise intensity as a multiple of the mean edge length.
    #[arg(long)]
    k: f64,

    /// RNG seed; identical seeds reproduce the corruption bit for bit.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Provenance sidecar path (default: output path with a
    /// .provenance.json extension).
    #[arg(long)]
    provenance: Option<PathBuf>,

    /// Write PLY output as ASCII instead of binary little-endian.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Denoised mesh.
    denoised: PathBuf,

    /// Clean reference mesh with identical connectivity.
    #[arg(long)]
    reference: PathBuf,

    /// Dihedral angle threshold for feature-edge counting, degrees.
    #[arg(long, default_value_t = 65.0)]
    theta: f64,

    /// Echo these run parameters into the report (all three or none).
    #[arg(long)]
    sigma_s: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,

    /// Print the report as JSON instead of the aligned table.
    #[arg(long)]
    json: bool,

    /// Also write the JSON report to this path.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureEdgesArgs {
    /// Input mesh.
    input: PathBuf,

    /// Dihedral angle threshold, degrees.
    #[arg(long, default_value_t = 65.0)]
    theta: f64,

    /// Write the edge list to this path instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Input mesh.
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Tukey,
    Gaussian,
}

impl From<KernelArg> for SimilarityKernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Tukey => SimilarityKernel::Tukey,
            KernelArg::Gaussian => SimilarityKernel::Gaussian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Uniform,
}

impl From<DistArg> for NoiseDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Gaussian => NoiseDistribution::Gaussian,
            DistArg::Uniform => NoiseDistribution::Uniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Random,
    VertexNormal,
}

impl From<DirArg> for NoiseDirection {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Random => NoiseDirection::Random,
            DirArg::VertexNormal => NoiseDirection::VertexNormal,
        }
    }
}

enum CliError {
    Usage(String),
    Data(MeshError),
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: cannot configure {} threads: {e}", cli.threads);
            return ExitCode::from(1);
        }
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Denoise(args) => run_denoise(args),
        Command::AddNoise(args) => run_add_noise(args),
        Command::Metrics(args) => run_metrics(args),
        Command::FeatureEdges(args) => run_feature_edges(args),
        Command::Stats(args) => run_stats(args),
    }
}

/// Optional mirror of `DenoiseConfig` for --config files, so a file can
/// carry any subset of fields and flags fill in the rest.
#[derive(Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sigma_s: Option<f64>,
    lambda: Option<f64>,
    iterations: Option<usize>,
    sigma_c: Option<f64>,
    radius: Option<f64>,
    decay: Option<f64>,
    inner_vertex_iters: Option<usize>,
    recompute_disks: Option<bool>,
    similarity: Option<SimilarityKernel>,
}

fn build_config(args: &DenoiseArgs) -> Result<DenoiseConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io {
                path: path.clone(),
                source: e,
            })?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| {
                CliError::Usage(format!("config {}: {e}", path.display()))
            })?
        }
        None => ConfigFile::default(),
    };

    let require = |flag: Option<f64>, field: Option<f64>, name: &str| {
        flag.or(field)
            .ok_or_else(|| CliError::Usage(format!("missing --{name} (or a config file providing it)")))
    };
    let mut config = DenoiseConfig::new(
        require(args.sigma_s, file.sigma_s, "sigma-s")?,
        require(args.lambda, file.lambda, "lambda")?,
        args.iters
            .or(file.iterations)
            .ok_or_else(|| CliError::Usage("missing --iters (or a config file providing it)".into()))?,
    );
    config.sigma_c = args.sigma_c.or(file.sigma_c);
    config.radius = args.radius.or(file.radius);
    if let Some(decay) = args.decay.or(file.decay) {
        config.decay = decay;
    }
    if let Some(inner) = args.inner_vertex_iters.or(file.inner_vertex_iters) {
        config.inner_vertex_iters = inner;
    }
    config.recompute_disks = args.recompute_disks || file.recompute_disks.unwrap_or(false);
    if let Some(similarity) = args.similarity.map(SimilarityKernel::from).or(file.similarity) {
        config.similarity = similarity;
    }
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

/// Output format from the output extension; `.ply` inherits the input's
/// flavor unless --ascii forces text.
fn output_format(path: &Path, input: MeshFormat, ascii: bool) -> Result<MeshFormat, CliError> {
    Ok(match io::format_for(path)? {
        MeshFormat::Obj => MeshFormat::Obj,
        _ if ascii => MeshFormat::PlyAscii,
        _ if input == MeshFormat::PlyAscii => MeshFormat::PlyAscii,
        _ => MeshFormat::PlyBinary,
    })
}

/// Prints to stdout, treating a broken pipe (e.g. piping into `head`) as a
/// clean early exit rather than a panic.
fn print_stdout(text: std::fmt::Arguments) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_fmt(text).and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(CliError::Data(MeshError::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| {
        CliError::Data(MeshError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

#[derive(Serialize)]
struct RunLog<'a> {
    input: &'a Path,
    output: &'a Path,
    config: &'a DenoiseConfig,
    /// Neighborhood radius actually used (config override or mesh-derived).
    radius: f64,
    /// Spatial kernel scale actually used.
    sigma_c: f64,
    iterations: &'a [IterationRecord],
}

fn run_denoise(args: DenoiseArgs) -> Result<(), CliError> {
    let config = build_config(&args)?;
    let (mesh, input_format) = io::load_mesh_detected(&args.input)?;
    let format = output_format(&args.output, input_format, args.ascii)?;
    let result = pipeline::denoise(&mesh, &config)?;
    io::save_mesh(&result.mesh, &args.output, format)?;

    let log_path = args
        .log
        .unwrap_or_else(|| args.output.with_extension("log.json"));
    write_json(
        &log_path,
        &RunLog {
            input: &args.input,
            output: &args.output,
            config: &config,
            radius: result.radius,
            sigma_c: result.sigma_c,
            iterations: &result.log,
        },
    )?;

    print_stdout(format_args!(
        "wrote {} ({} vertices, {} faces, {} iterations; log: {})\n",
        args.output.display(),
        result.mesh.vertex_count(),
        result.mesh.face_count(),
        result.log.len(),
        log_path.display()
    ))
}

#[derive(Serialize)]
struct Provenance<'a> {
    input: &'a Path,
    output: &'a Path,
    #[serde(flatten)]
    spec: &'a NoiseSpec,
    /// Absolute noise scale `intensity * avg_edge_length`.
    sigma_n: f64,
    avg_edge_length: f64,
}

fn run_add_noise(args: AddNoiseArgs) -> Result<(), CliError> {
    let (mesh, input_format) = io::load_mesh_detected(&args.input)?;
    let format = output_format(&args.output, input_format, args.ascii)?;
    let spec = NoiseSpec {
        distribution: args.dist.into(),
        direction: args.dir.into(),
        intensity: args.k,
        seed: args.seed,
    };
    let stats = MeshStats::of(&mesh)?;
    let noisy = noise::add_noise(&mesh, &spec)?;
    io::save_mesh(&noisy, &args.output, format)?;

    let provenance_path = args
        .provenance
        .unwrap_or_else(|| args.output.with_extension("provenance.json"));
    write_json(
        &provenance_path,
        &Provenance {
            input: &args.input,
            output: &args.output,
            spec: &spec,
            sigma_n: spec.intensity * stats.avg_edge_length,
            avg_edge_length: stats.avg_edge_length,
        },
    )?;

    print_stdout(format_args!(
        "wrote {} (sigma_n = {:.6}; provenance: {})\n",
        args.output.display(),
        spec.intensity * stats.avg_edge_length,
        provenance_path.display()
    ))
}

fn run_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let params = match (args.sigma_s, args.lambda, args.iters) {
        (Some(sigma_s), Some(lambda), Some(iterations)) => Some(ParamsEcho {
            sigma_s,
            lambda,
            iterations,
        }),
        (None, None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "parameter echo needs --sigma-s, --lambda, and --iters together".into(),
            ))
        }
    };
    let denoised = load(&args.denoised)?;
    let reference = load(&args.reference)?;
    let report = metrics::evaluate(&denoised, &reference, args.theta, params)?;

    if args.json {
        print_stdout(format_args!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("report serialization cannot fail")
        ))?;
    } else {
        print_stdout(format_args!("{}", report.table()))?;
    }
    if let Some(path) = &args.output {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FeatureEdgeList {
    threshold_degrees: f64,
    count: usize,
    /// Vertex index pairs, each sorted low-high, list sorted lexicographically.
    edges: Vec<(u32, u32)>,
}

fn run_feature_edges(args: FeatureEdgesArgs) -> Result<(), CliError> {
    if !(args.theta > 0.0 && args.theta < 180.0) {
        return Err(CliError::Usage("--theta must be in (0, 180) degrees".into()));
    }
    let mesh = load(&args.input)?;
    let field = FaceField::of(&mesh);
    let edges = metrics::feature_edges(&mesh, &field, args.theta);
    let list = FeatureEdgeList {
        threshold_degrees: args.theta,
        count: edges.len(),
        edges,
    };
    match &args.output {
        Some(path) => {
            write_json(path, &list)?;
            Ok(())
        }
        None => print_stdout(format_args!(
            "{}\n",
            serde_json::to_string_pretty(&list).expect("edge list serialization cannot fail")
        )),
    }
}

#[derive(Serialize)]
struct StatsOut<'a> {
    path: &'a Path,
    format: &'static str,
    vertices: usize,
    faces: usize,
    edges: usize,
    degenerate_faces: usize,
    avg_edge_length: f64,
    avg_centroid_distance: f64,
    bbox_diagonal: f64,
}

fn run_stats(args: StatsArgs) -> Result<(), CliError> {
    let (mesh, format) = io::load_mesh_detected(&args.input)?;
    let stats = MeshStats::of(&mesh)?;
    let field = FaceField::of(&mesh);
    let out = StatsOut {
        path: &args.input,
        format: match format {
            MeshFormat::Obj => "obj",
            MeshFormat::PlyAscii => "ply-ascii",
            MeshFormat::PlyBinary => "ply-binary",
        },
        vertices: mesh.vertex_count(),
        faces: mesh.face_count(),
        edges: mesh.edges().len(),
        degenerate_faces: field.degenerate.iter().filter(|&&d| d).count(),
        avg_edge_length: stats.avg_edge_length,
        avg_centroid_distance: stats.avg_centroid_distance,
        bbox_diagonal: stats.bbox_diagonal,
    };
    print_stdout(format_args!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("stats serialization cannot fail")
    ))
}

fn load(path: &Path) -> Result<Mesh, CliError> {
    Ok(io::load_mesh_detected(path)?.0)
}
