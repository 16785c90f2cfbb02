//! The `modulaire` command line: JSON inputs, one subcommand per
//! computation, a JSON report on stdout (or `--out`).
//!
//! Exit status is 0 on success, 2 when an input is unreadable, malformed or
//! violates a precondition, and 1 for anything else.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::entropy::{
    araki_relative_entropy_on, entanglement_entropy, relative_entropy_oracle, von_neumann_entropy, EntropyReport,
};
use crate::factorlab::{
    classify_type, sector_overlap, trace_property_test, ChainOptions, OverlapRule, TailRule, TensorChainState,
};
use crate::linalg::{round_significant, ComplexMatrix, Subsystem, Tolerances, C64};
use crate::modular::{modular_flow, ModularData};
use crate::projlat::{
    leq_positive, mvn_equivalent, mvn_equivalent_in_blocks, preceq, preceq_in_blocks, spectral_pvm, Projector,
};
use crate::staralg::{analyze, commutant, generate_algebra, StarAlgebra};
use crate::states::{schmidt, state_from_schmidt, DensityMatrix};

/// Environment variable overriding the default `τ_eig`.
pub const TOL_ENV: &str = "MODULAIRE_TOL";

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit status 2.
    Input(String),
    /// Anything else; exit status 1.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "modulaire",
    version,
    about = "Finite-dimensional operator algebras and modular theory"
)]
struct Cli {
    /// Override τ_eig (default 1e-10, or $MODULAIRE_TOL).
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    /// Override τ_rank (default 1e-9).
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Override τ_cluster (default 1e-8).
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Commutant of the *-algebra generated by a set of matrices.
    Commutant {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Commutant, bicommutant, center and factor test.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Spectral projection-valued measure of a Hermitian matrix.
    Pvm {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Murray-von Neumann comparison of two projectors.
    Equiv {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Block sizes of a block-diagonal algebra, e.g. `2,1`.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
    },
    /// Minimality of a projector in a generated algebra.
    Minimal {
        #[arg(long)]
        projector: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Schmidt decomposition of a bipartite pure state.
    Schmidt {
        #[arg(long)]
        state: PathBuf,
    },
    /// Entanglement entropy of a state or von Neumann entropy of a density.
    Entropy {
        #[arg(long, conflicts_with = "density", required_unless_present = "density")]
        state: Option<PathBuf>,
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Araki relative entropy, with the reduced-density cross-check.
    RelEntropy {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        /// Tensor slot of the algebra (1 or 2).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        slot: u8,
    },
    /// Modular data and identity residuals of a cyclic-separating state.
    Modular {
        #[arg(long)]
        state: PathBuf,
    },
    /// Modular flow ρ₁^{is} a ρ₁^{-is} of a first-slot operator.
    Flow {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        op: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Trace-property test and type classification of a chain tail.
    FactorLab {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sector overlap Π c_k of two product states.
    Sector {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "{}: invalid input at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse(path, &read(path)?)
}

/// Reads a matrix literal `{"rows", "cols", "data": [[re, im], ...]}`.
pub fn load_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    load(path)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchmidtLiteral {
    coefficients: Vec<[f64; 2]>,
    left: ComplexMatrix,
    right: ComplexMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dims: (usize, usize),
    #[serde(default)]
    vector: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    schmidt: Option<SchmidtLiteral>,
}

fn complex(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// Reads `{"dims": [n, m], "vector": [[re, im], ...]}` or
/// `{"dims": [n, m], "schmidt": {"coefficients", "left", "right"}}`.
pub fn load_state(path: &Path) -> CliResult<(Vec<C64>, (usize, usize))> {
    let file: StateFile = load(path)?;
    let (n, m) = file.dims;
    let psi = match (file.vector, file.schmidt) {
        (Some(v), None) => complex(&v),
        (None, Some(s)) => state_from_schmidt(&complex(&s.coefficients), &s.left, &s.right)?,
        _ => {
            return Err(CliError::Input(format!(
                "{}: state file needs exactly one of \"vector\" and \"schmidt\"",
                path.display()
            )))
        }
    };
    if psi.len() != n * m {
        return Err(crate::Error::Dimension(format!(
            "{}: vector of length {} for dims [{n}, {m}]",
            path.display(),
            psi.len()
        ))
        .into());
    }
    Ok((psi, file.dims))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorsFile {
    ambient_dim: usize,
    generators: Vec<ComplexMatrix>,
}

/// Reads generators as a bare array of matrices or as
/// `{"ambient_dim", "generators"}`.
pub fn load_generators(path: &Path) -> CliResult<(usize, Vec<ComplexMatrix>)> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        let gens: Vec<ComplexMatrix> = parse(path, &text)?;
        let n = gens.first().map(|g| g.rows()).ok_or_else(|| {
            CliError::Input(format!(
                "{}: empty generator list needs \"ambient_dim\"",
                path.display()
            ))
        })?;
        Ok((n, gens))
    } else {
        let file: GeneratorsFile = parse(path, &text)?;
        Ok((file.ambient_dim, file.generators))
    }
}

fn load_algebra(path: &Path, tol: &Tolerances) -> CliResult<StarAlgebra> {
    let (n, gens) = load_generators(path)?;
    Ok(generate_algebra(n, &gens, tol)?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorLabConfig {
    tail: TailRule,
    truncation: usize,
    trials: usize,
    seed: u64,
    #[serde(default)]
    prefix: Vec<ComplexMatrix>,
    /// Classification window; defaults to `min(truncation, 1000)`.
    #[serde(default)]
    window: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectorConfig {
    overlaps: OverlapRule,
    truncation: usize,
    #[serde(default)]
    window: Option<usize>,
    #[serde(default)]
    tau_chain: Option<f64>,
}

fn tolerances(cli: &Cli) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var(TOL_ENV) {
        tol.eig = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{TOL_ENV}={raw:?} is not a number")))?;
    }
    if let Some(x) = cli.tol_eig {
        tol.eig = x;
    }
    if let Some(x) = cli.tol_rank {
        tol.rank = x;
    }
    if let Some(x) = cli.tol_cluster {
        tol.cluster = x;
    }
    tol.validate()?;
    Ok(tol)
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    serde_json::to_value(m).expect("matrix literal serializes")
}

/// Entropy in nats at 12 significant digits; `+∞` as the string `"+inf"`.
fn entropy_value(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("+inf")
    } else {
        json!(round_significant(x, 12))
    }
}

fn entropy_json(r: &EntropyReport) -> Value {
    let mut v = json!({
        "value": entropy_value(r.value),
        "method": r.method,
        "support_dim": r.support_dim,
    });
    if let Some(d) = &r.diagnostic {
        v["diagnostic"] = json!(d);
    }
    v
}

fn require_square(dims: (usize, usize), path: &Path) -> CliResult<()> {
    if dims.0 == dims.1 {
        return Ok(());
    }
    Err(crate::Error::Dimension(format!(
        "{}: expected an n x n bipartition, got [{}, {}]",
        path.display(),
        dims.0,
        dims.1
    ))
    .into())
}

fn dispatch(command: &Command, tol: &Tolerances) -> CliResult<Value> {
    let report = match command {
        Command::Commutant { input } => {
            let alg = load_algebra(input, tol)?;
            let comm = commutant(&alg, tol);
            json!({
                "command": "commutant",
                "ambient_dim": alg.ambient_dim(),
                "algebra_dim": alg.dim(),
                "dim": comm.dim(),
                "basis": comm.basis().iter().map(matrix_json).collect::<Vec<_>>(),
            })
        }
        Command::Analyze { input } => {
            let alg = load_algebra(input, tol)?;
            let r = analyze(&alg, tol);
            json!({
                "command": "analyze",
                "ambient_dim": alg.ambient_dim(),
                "dimension": r.dimension,
                "commutant_dim": r.commutant.dim(),
                "bicommutant_dim": r.bicommutant.dim(),
                "center_dim": r.center_dim,
                "center": r.center.iter().map(matrix_json).collect::<Vec<_>>(),
                "is_factor": r.is_factor,
                "is_von_neumann": r.is_von_neumann,
            })
        }
        Command::Pvm { input } => {
            let x = load_matrix(input)?;
            let pvm = spectral_pvm(&x, tol)?;
            let error = (&pvm.reconstruct() - &x).norm();
            json!({
                "command": "pvm",
                "values": pvm.values,
                "projectors": pvm.values.iter().zip(&pvm.projectors).map(|(v, p)| json!({
                    "value": v,
                    "rank": p.rank(),
                    "matrix": matrix_json(p.matrix()),
                })).collect::<Vec<_>>(),
                "reconstruction_error": error,
            })
        }
        Command::Equiv { p, q, blocks } => {
            let pp = Projector::new(load_matrix(p)?, tol)?;
            let qq = Projector::new(load_matrix(q)?, tol)?;
            let (u, pre) = match blocks {
                Some(b) => (
                    mvn_equivalent_in_blocks(&pp, &qq, b, tol)?,
                    preceq_in_blocks(&pp, &qq, b, tol)?,
                ),
                None => (mvn_equivalent(&pp, &qq, tol)?, preceq(&pp, &qq, tol)?),
            };
            json!({
                "command": "equiv",
                "rank_p": pp.rank(),
                "rank_q": qq.rank(),
                "blocks": blocks,
                "equivalent": u.is_some(),
                "partial_isometry": u.as_ref().map(|u| matrix_json(&u.matrix)),
                "preceq": pre,
                "leq": leq_positive(&pp, &qq, tol)?,
            })
        }
        Command::Minimal { projector, input } => {
            let p = Projector::new(load_matrix(projector)?, tol)?;
            let alg = load_algebra(input, tol)?;
            json!({
                "command": "minimal",
                "rank": p.rank(),
                "algebra_dim": alg.dim(),
                "minimal": crate::projlat::is_minimal(&p, &alg, tol)?,
            })
        }
        Command::Schmidt { state } => {
            let (psi, dims) = load_state(state)?;
            let s = schmidt(&psi, dims, tol)?;
            json!({
                "command": "schmidt",
                "dims": [dims.0, dims.1],
                "coefficients": s.coefficients,
                "schmidt_rank": s.schmidt_rank,
                "entangled": s.schmidt_rank >= 2,
                "left_basis": matrix_json(&s.left_basis),
                "right_basis": matrix_json(&s.right_basis),
            })
        }
        Command::Entropy { state, density } => {
            let report = match (state, density) {
                (Some(path), _) => {
                    let (psi, dims) = load_state(path)?;
                    entanglement_entropy(&psi, dims, tol)?
                }
                (None, Some(path)) => von_neumann_entropy(&DensityMatrix::new(load_matrix(path)?, tol)?, tol),
                (None, None) => return Err(CliError::Input("entropy needs --state or --density".into())),
            };
            let mut v = entropy_json(&report);
            v["command"] = json!("entropy");
            v
        }
        Command::RelEntropy { psi, phi, slot } => {
            let (a, dims) = load_state(psi)?;
            let (b, dims_b) = load_state(phi)?;
            if dims != dims_b {
                return Err(crate::Error::Dimension(format!(
                    "states on [{}, {}] and [{}, {}]",
                    dims.0, dims.1, dims_b.0, dims_b.1
                ))
                .into());
            }
            let sub = if *slot == 1 {
                Subsystem::First
            } else {
                Subsystem::Second
            };
            let report = araki_relative_entropy_on(&a, &b, dims, sub, tol)?;
            let rho = DensityMatrix::pure(&a, tol)?.reduce(dims, sub)?;
            let sigma = DensityMatrix::pure(&b, tol)?.reduce(dims, sub)?;
            let oracle = relative_entropy_oracle(&rho, &sigma, tol)?;
            let mut v = entropy_json(&report);
            v["command"] = json!("rel-entropy");
            v["slot"] = json!(slot);
            v["oracle"] = entropy_json(&oracle);
            v
        }
        Command::Modular { state } => {
            let (psi, dims) = load_state(state)?;
            require_square(dims, state)?;
            let md = ModularData::new(&psi, dims, tol)?;
            let n = md.dim();
            let ratios: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| md.delta_eigenvalue(i, j)).collect())
                .collect();
            json!({
                "command": "modular",
                "dims": [dims.0, dims.1],
                "cyclic_separating": true,
                "schmidt_coefficients": md.coefficients(),
                "delta_eigenvalues": ratios,
                "rho1": matrix_json(md.rho1().matrix()),
                "rho2": matrix_json(md.rho2().matrix()),
                "residuals": md.residuals(),
            })
        }
        Command::Flow { state, op, s } => {
            let (psi, dims) = load_state(state)?;
            require_square(dims, state)?;
            let md = ModularData::new(&psi, dims, tol)?;
            let a = load_matrix(op)?;
            let flowed = modular_flow(&md, &a, *s)?;
            json!({
                "command": "flow",
                "s": s,
                "flowed": matrix_json(&flowed),
            })
        }
        Command::FactorLab { config } => {
            let cfg: FactorLabConfig = load(config)?;
            let state = TensorChainState::new(cfg.prefix.clone(), cfg.tail.clone(), cfg.truncation, tol)?;
            let trace = trace_property_test(&state, cfg.trials, cfg.seed, tol)?;
            let window = cfg.window.unwrap_or(cfg.truncation.min(1000));
            let class = classify_type(&cfg.tail, window, tol)?;
            json!({
                "command": "factor-lab",
                "tail": cfg.tail,
                "truncation": cfg.truncation,
                "trials": trace.trials,
                "seed": trace.seed,
                "verdict": trace.verdict,
                "max_deviation": trace.max_deviation,
                "witness": trace.witness,
                "classification_window": window,
                "classification": class,
            })
        }
        Command::Sector { config } => {
            let cfg: SectorConfig = load(config)?;
            let defaults = ChainOptions::default();
            let opts = ChainOptions {
                window: cfg.window.unwrap_or(defaults.window),
                tau_chain: cfg.tau_chain.unwrap_or(defaults.tau_chain),
            };
            if opts.window == 0 || !(opts.tau_chain > 0.0) {
                return Err(CliError::Input("window and tau_chain must be positive".into()));
            }
            let r = sector_overlap(&cfg.overlaps, cfg.truncation, &opts)?;
            json!({
                "command": "sector",
                "overlaps": cfg.overlaps,
                "truncation": cfg.truncation,
                "window": opts.window,
                "tau_chain": opts.tau_chain,
                "verdict": r.verdict,
                "product": r.product,
                "decay_exponent": r.decay_exponent,
                "dropped_zeros": r.dropped_zeros,
                "partial_products": r.partial_products,
                "log_partial_sums": r.log_partial_sums,
            })
        }
    };
    Ok(report)
}

/// Parses `args` (including the program name) and produces the report.
pub fn run(args: &[String]) -> CliResult<(Value, Option<PathBuf>)> {
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Input(e.to_string()))?;
    let tol = tolerances(&cli)?;
    let mut report = dispatch(&cli.command, &tol)?;
    report["tolerances"] = json!(tol);
    Ok((report, cli.out))
}

/// Entry point of the binary; returns the exit status.
pub fn main_with_args(args: &[String]) -> u8 {
    if let Err(e) = Cli::try_parse_from(args) {
        use clap::error::ErrorKind;
        let _ = e.print();
        return match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
            _ => 2,
        };
    }
    match run(args) {
        Ok((report, out)) => {
            let text = match serde_json::to_string_pretty(&report) {
                Ok(t) => t + "\n",
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            };
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => print!("{text}"),
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
