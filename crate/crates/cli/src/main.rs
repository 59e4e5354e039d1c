use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sepkit::dynamics::{decoherence_factors, evolve_reduced, linspace, ConditionalHamiltonians};
use sepkit::format::{MatrixFile, VectorFile};
use sepkit::linalg::{self, CMat, C64};
use sepkit::models::{hydrogen_analog, random_state, rng_from_seed};
use sepkit::search::{
    bipartition_scan, search_separating_unitary, weighted_measure, SearchConfig, UnitaryClass,
};
use sepkit::{
    analyze, pointer_bases, spectral_form, BipartiteOperator, FactorSpace, SepError,
    ToleranceProfile,
};

const EXIT_ERROR: u8 = 1;
const EXIT_NONSEPARABLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sep-kit",
    version,
    about = "Separability analysis for bipartite Hamiltonians"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Input Hamiltonian (JSON matrix file).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output path; stdout when omitted. A directory for `demo`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    tol_herm: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_commute: Option<f64>,
    #[arg(long, global = true)]
    tol_recon: Option<f64>,
    /// Time grid as start:stop:steps.
    #[arg(long, global = true, default_value = "0:10:101")]
    times: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide separability and extract pointer bases when they exist.
    Analyze,
    /// Rank every bipartition of a multi-factor operator.
    Scan {
        /// Factor dimensions, e.g. "2,2,2,2"; defaults to the file's dims.
        #[arg(long)]
        factors: Option<String>,
        #[arg(long, default_value_t = 1024)]
        max_partitions: usize,
    },
    /// Search for a frame change that makes the operator separable.
    Search {
        /// `full` or `circuit:<depth>`.
        #[arg(long, default_value = "full")]
        class: String,
        /// Objective evaluations per restart.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
    /// Evolve ρ_S ⊗ |χ⟩⟨χ| and report the reduced system state.
    Simulate {
        /// Initial system density matrix ({"real", "imag"}); random pure state when omitted.
        #[arg(long)]
        rho: Option<PathBuf>,
        /// Initial environment state ({"real", "imag"}); random when omitted.
        #[arg(long)]
        chi: Option<PathBuf>,
    },
    /// Generate a planted example.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Two coupled d-level sites, separable only in a hidden frame.
    Hydrogen {
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
}

#[derive(Debug)]
struct CliError {
    kind: String,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<SepError> for CliError {
    fn from(e: SepError) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            kind: "Io".into(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        kind: "Usage".into(),
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A plain complex matrix without factor metadata.
#[derive(Debug, Serialize, Deserialize)]
struct PlainMatrix {
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
}

impl PlainMatrix {
    fn from_matrix(m: &CMat) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            real: rows(|z| z.re),
            imag: rows(|z| z.im),
        }
    }

    fn to_matrix(&self) -> CliResult<CMat> {
        let n = self.real.len();
        let square =
            self.imag.len() == n && self.real.iter().chain(&self.imag).all(|r| r.len() == n);
        if !square || n == 0 {
            return Err(SepError::Parse(
                "matrix must be square with matching real/imag blocks".into(),
            )
            .into());
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            C64::new(self.real[i][j], self.imag[i][j])
        }))
    }
}

fn tolerances(g: &Global) -> CliResult<ToleranceProfile> {
    let mut t = ToleranceProfile::default();
    t.tol_herm = g.tol_herm.unwrap_or(t.tol_herm);
    t.tol_rank = g.tol_rank.unwrap_or(t.tol_rank);
    t.tol_commute = g.tol_commute.unwrap_or(t.tol_commute);
    t.tol_recon = g.tol_recon.unwrap_or(t.tol_recon);
    t.validate()?;
    Ok(t)
}

fn parse_times(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || usage(format!("--times expects start:stop:steps, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    Ok(linspace(start, stop, steps))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        kind: "Io".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| SepError::Parse(format!("{}: {e}", path.display())).into())
}

fn input_file(g: &Global) -> CliResult<MatrixFile> {
    let path = g
        .input
        .as_deref()
        .ok_or_else(|| usage("--input is required"))?;
    Ok(MatrixFile::from_json(&read_text(path)?)?)
}

fn load_operator(g: &Global, tols: &ToleranceProfile) -> CliResult<BipartiteOperator> {
    Ok(input_file(g)?.to_operator(tols.tol_herm)?)
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so a failed run never leaves a partial artifact.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

fn emit(g: &Global, v: &Value) -> CliResult<()> {
    let text = to_pretty(v);
    match &g.out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn header(command: &str, g: &Global, tols: &ToleranceProfile) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!("sep-kit"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(g.seed));
    m.insert("tolerances".into(), json!(tols));
    m
}

fn analysis_bundle(
    h: &BipartiteOperator,
    seed: u64,
    tols: &ToleranceProfile,
) -> CliResult<(Value, bool)> {
    let (sd, report) = analyze(h, tols)?;
    let mut bundle = json!({
        "input": {
            "dims": h.space().dims(),
            "cut": h.cut(),
            "fro_norm": h.fro_norm(),
        },
        "schmidt": {
            "d_s": sd.d_s,
            "d_e": sd.d_e,
            "rank": sd.rank(),
            "weights": sd.weights,
        },
        "report": report,
        "pointer_bases": Value::Null,
        "spectral_form": Value::Null,
    });
    if report.is_separable() {
        let pb = pointer_bases(h, &sd, tols, seed)?;
        bundle["pointer_bases"] = json!({
            "u_s": PlainMatrix::from_matrix(&pb.u_s),
            "u_e": PlainMatrix::from_matrix(&pb.u_e),
            "residual": pb.residual,
        });
        bundle["spectral_form"] = match spectral_form(h, &pb, tols) {
            Ok(sf) => json!({
                "gammas": sf.gammas,
                "s_blocks": sf.s_blocks,
                "e_blocks": sf.e_blocks,
            }),
            Err(e) => json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
        };
    }
    Ok((bundle, report.is_separable()))
}

fn cmd_analyze(g: &Global) -> CliResult<u8> {
    let tols = tolerances(g)?;
    let h = load_operator(g, &tols)?;
    let (bundle, separable) = analysis_bundle(&h, g.seed, &tols)?;
    let mut out = header("analyze", g, &tols);
    for (k, v) in bundle.as_object().expect("bundle is an object") {
        out.insert(k.clone(), v.clone());
    }
    emit(g, &Value::Object(out))?;
    Ok(if separable { 0 } else { EXIT_NONSEPARABLE })
}

fn cmd_scan(g: &Global, factors: Option<&str>, max_partitions: usize) -> CliResult<u8> {
    let tols = tolerances(g)?;
    let file = input_file(g)?;
    let dims = match factors {
        Some(text) => text
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| {
                usage(format!(
                    "--factors expects comma-separated dimensions, got {text:?}"
                ))
            })?,
        None => file.dims.clone(),
    };
    let m = file.to_matrix()?;
    let space = FactorSpace::new(dims)?;
    if space.total_dim() != m.nrows() {
        return Err(SepError::InvalidDimensions(format!(
            "factors multiply to {} but the matrix is {}x{}",
            space.total_dim(),
            m.nrows(),
            m.ncols()
        ))
        .into());
    }
    if linalg::hermitian_deviation(&m) > tols.tol_herm {
        return Err(SepError::NotHermitian {
            max_dev: linalg::hermitian_deviation(&m),
        }
        .into());
    }
    let scan = bipartition_scan(&m, &space, max_partitions, None, &tols)?;
    let rows: Vec<Value> = scan
        .iter()
        .map(|p| {
            json!({
                "s_factors": p.s_factors,
                "e_factors": p.e_factors,
                "perm": p.perm,
                "cut": p.cut,
                "objective": p.objective,
                "measure": p.measure,
                "report": p.report,
            })
        })
        .collect();
    let mut out = header("scan", g, &tols);
    out.insert("dims".into(), json!(space.dims()));
    out.insert("partitions".into(), json!(rows));
    emit(g, &Value::Object(out))?;
    Ok(0)
}

fn cmd_search(
    g: &Global,
    class: &str,
    budget: usize,
    restarts: usize,
    threshold: f64,
) -> CliResult<u8> {
    let tols = tolerances(g)?;
    let class: UnitaryClass = class.parse()?;
    let h = load_operator(g, &tols)?;
    let config = SearchConfig {
        budget,
        restarts,
        seed: g.seed,
        success_threshold: threshold,
    };
    let cand = search_separating_unitary(&h, class, &config, &tols)?;
    let mut out = header("search", g, &tols);
    out.insert("class".into(), json!(class.to_string()));
    out.insert("config".into(), json!(config));
    out.insert("candidate".into(), cand.to_json_value());
    emit(g, &Value::Object(out))?;
    Ok(0)
}

fn cmd_simulate(g: &Global, rho: Option<&Path>, chi: Option<&Path>) -> CliResult<u8> {
    let tols = tolerances(g)?;
    let times = parse_times(&g.times)?;
    let h = load_operator(g, &tols)?;
    let mut rng = rng_from_seed(g.seed);
    let rho_s = match rho {
        Some(p) => parse_json::<PlainMatrix>(p)?.to_matrix()?,
        None => linalg::projector(&random_state(h.d_s(), &mut rng)),
    };
    let chi_e = match chi {
        Some(p) => parse_json::<VectorFile>(p)?.to_vector()?,
        None => random_state(h.d_e(), &mut rng),
    };

    let (sd, report) = analyze(&h, &tols)?;
    let pb = if report.is_separable() {
        Some(pointer_bases(&h, &sd, &tols, g.seed)?)
    } else {
        None
    };
    let trace = evolve_reduced(&h, &rho_s, &chi_e, &times, pb.as_ref().map(|p| &p.u_s))?;

    let mut out = header("simulate", g, &tols);
    out.insert("verdict".into(), json!(report.verdict));
    out.insert(
        "frame".into(),
        json!(if pb.is_some() {
            "pointer"
        } else {
            "computational"
        }),
    );
    out.insert("rows".into(), trace.rows_json());
    let factors = pb.as_ref().map(|pb| {
        ConditionalHamiltonians::from_pointer_bases(&h, pb, &tols)
            .and_then(|ch| decoherence_factors(&ch, &chi_e, &times))
    });
    out.insert(
        "decoherence_factors".into(),
        match factors {
            Some(Ok(z)) => json!(z
                .iter()
                .zip(&times)
                .map(|(zk, t)| json!({"t": t, "abs": PlainMatrix::from_matrix(&zk.map(|v| C64::new(v.norm(), 0.0))).real}))
                .collect::<Vec<_>>()),
            Some(Err(e)) => json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
            None => Value::Null,
        },
    );
    emit(g, &Value::Object(out))?;
    Ok(0)
}

fn cmd_demo_hydrogen(g: &Global, dim: usize) -> CliResult<u8> {
    let tols = tolerances(g)?;
    let dir = g
        .out
        .as_deref()
        .ok_or_else(|| usage("demo needs --out <directory>"))?;
    let inst = hydrogen_analog(dim, g.seed)?;
    std::fs::create_dir_all(dir)?;

    let (mixed, _) = analysis_bundle(&inst.h, g.seed, &tols)?;
    let (separable, _) = analysis_bundle(&inst.h_separable, g.seed, &tols)?;
    let mut report = header("demo hydrogen", g, &tols);
    report.insert("dim".into(), json!(dim));
    report.insert("resamples".into(), json!(inst.resamples));
    report.insert(
        "mixed_frame".into(),
        json!({"measure": weighted_measure(&inst.h)?, "analysis": mixed}),
    );
    report.insert(
        "separable_frame".into(),
        json!({"measure": weighted_measure(&inst.h_separable)?, "analysis": separable}),
    );

    let g_true = MatrixFile::from_matrix(&inst.g_true, vec![dim, dim], 1);
    write_atomic(
        &dir.join("h.json"),
        &MatrixFile::from_operator(&inst.h).to_json(),
    )?;
    write_atomic(
        &dir.join("h_separable.json"),
        &MatrixFile::from_operator(&inst.h_separable).to_json(),
    )?;
    write_atomic(&dir.join("g_true.json"), &g_true.to_json())?;
    write_atomic(&dir.join("report.json"), &to_pretty(&Value::Object(report)))?;
    Ok(0)
}

fn run(cli: &Cli) -> CliResult<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze => cmd_analyze(g),
        Command::Scan {
            factors,
            max_partitions,
        } => cmd_scan(g, factors.as_deref(), *max_partitions),
        Command::Search {
            class,
            budget,
            restarts,
            threshold,
        } => cmd_search(g, class, *budget, *restarts, *threshold),
        Command::Simulate { rho, chi } => cmd_simulate(g, rho.as_deref(), chi.as_deref()),
        Command::Demo {
            which: Demo::Hydrogen { dim },
        } => cmd_demo_hydrogen(g, *dim),
    }
}

fn report_error(e: &CliError) {
    let v = json!({"error": {"kind": e.kind, "message": e.message}});
    eprintln!(
        "{}",
        serde_json::to_string(&v).expect("JSON values always serialize")
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error(&usage(e.to_string().trim_end()));
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report_error(&e);
            ExitCode::from(EXIT_ERROR)
        }
    }
}
