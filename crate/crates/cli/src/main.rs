use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algebroid_cli::api::{self, ApiError, ContinueRequest, HolonomyRequest, OracleRequest, PolicyName};
use algebroid_cli::dto::{BranchFileSpec, Cx, FiberDto, ModelFile, PathFile};
use clap::{Parser, Subcommand};

/// Analytic continuation and holonomy of solutions of y' = P(x,y)/Q(x,y).
#[derive(Parser)]
#[command(name = "algebroid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed singular locus, singular set and discriminant of a model.
    Sigma { model: PathBuf },
    /// Continue a solution along a path.
    Continue {
        model: PathBuf,
        path: PathBuf,
        /// Initial value: `re`, `re,im`, `[re,im]` or `infinity`.
        #[arg(long, allow_hyphen_values = true)]
        y0: String,
        #[arg(long, value_enum, default_value = "halt")]
        policy: Policy,
        /// Comma separated winding numbers for the scripted policy.
        #[arg(long, allow_hyphen_values = true)]
        script: Option<String>,
        /// Upper bound for detour radii.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        max_windings: Option<usize>,
        /// Write the trace as CSV to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Holonomy map of a disk of initial values along a path.
    Holonomy {
        model: PathBuf,
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        y0_center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        max_windings: Option<usize>,
    },
    /// Evaluate a closed-form solution from the oracle catalog.
    Oracle {
        id: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Branch as JSON, e.g. `{"type":"sheet","n":1}`.
        #[arg(long)]
        branch: Option<String>,
        /// Two corners `[[re,im],[re,im]]` of the region searched for singularities.
        #[arg(long)]
        region: Option<String>,
        /// Point `[[x],[y]]` selecting a leaf.
        #[arg(long)]
        leaf: Option<String>,
    },
    /// Serve the HTTP JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Policy {
    Halt,
    Scripted,
    Enumerate,
}

impl From<Policy> for PolicyName {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Halt => PolicyName::Halt,
            Policy::Scripted => PolicyName::Scripted,
            Policy::Enumerate => PolicyName::Enumerate,
        }
    }
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ApiError> {
    let text = std::fs::read_to_string(path).map_err(|e| ApiError::malformed(format!("{}: {e}", path.display())))?;
    api::parse(&text)
}

fn complex(s: &str) -> Result<Cx, ApiError> {
    let s = s.trim();
    if s.starts_with('[') {
        return api::parse(s);
    }
    let parts: Vec<_> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match parts.as_slice() {
        [Ok(re)] => Ok([*re, 0.0]),
        [Ok(re), Ok(im)] => Ok([*re, *im]),
        _ => Err(ApiError::malformed(format!("not a complex number: {s}"))),
    }
}

fn fiber(s: &str) -> Result<FiberDto, ApiError> {
    match s.trim() {
        "infinity" | "inf" => Ok(FiberDto::Infinity),
        other => complex(other).map(FiberDto::Finite),
    }
}

fn script(s: &str) -> Result<Vec<i64>, ApiError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| ApiError::malformed(format!("bad winding: {p}"))))
        .collect()
}

fn run(command: Command) -> Result<String, ApiError> {
    match command {
        Command::Sigma { model } => api::sigma(&read::<ModelFile>(&model)?).map(|f| api::render(&f)),
        Command::Continue { model, path, y0, policy, script: s, epsilon, max_windings, trace } => {
            let req = ContinueRequest {
                model: read(&model)?,
                path: read::<PathFile>(&path)?,
                y0: fiber(&y0)?,
                policy: policy.into(),
                script: s.as_deref().map(script).transpose()?.unwrap_or_default(),
                epsilon,
                max_windings,
                trace: false,
            };
            let out = api::continuation(&req, None)?;
            if let Some(file) = trace {
                std::fs::write(&file, &out.trace_csv).map_err(|e| ApiError::malformed(format!("{}: {e}", file.display())))?;
            }
            Ok(api::render(&out.file))
        }
        Command::Holonomy { model, path, y0_center, radius, grid, epsilon, max_windings } => {
            let req = HolonomyRequest {
                model: read(&model)?,
                path: read(&path)?,
                y0_center: fiber(&y0_center)?,
                radius,
                grid,
                epsilon,
                max_windings,
            };
            api::holonomy(&req, None).map(|f| api::render(&f))
        }
        Command::Oracle { id, x, branch, region, leaf } => {
            let req = OracleRequest {
                id,
                x: x.as_deref().map(complex).transpose()?,
                branch: branch.as_deref().map(api::parse::<BranchFileSpec>).transpose()?,
                region: region.as_deref().map(api::parse).transpose()?,
                leaf: leaf.as_deref().map(api::parse).transpose()?,
            };
            api::oracle(&req).map(|f| api::render(&f))
        }
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port, host } = cli.command {
        let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
        let addr = std::net::SocketAddr::new(host, port);
        eprintln!("listening on http://{addr}");
        return match rt.block_on(algebroid_cli::server::serve(addr)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        };
    }
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
