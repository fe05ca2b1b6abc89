use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helmholtz_dd::coefficients::{EtaMode, FieldKind};
use helmholtz_dd::krylov::Side;
use helmholtz_dd::preconditioner::Variant;
use helmholtz_dd_cli::config::{CoarseRule, EpsRule, InnerProductKind, OverlapRule, RunConfig};
use helmholtz_dd_cli::run::{max_dofs, run};
use helmholtz_dd_cli::sweep::{sweep, table, TABLE_IDS};
use helmholtz_dd_cli::RunError;

/// Schwarz-preconditioned GMRES for the Helmholtz equation on the unit square.
///
/// Without a subcommand, runs a single configuration and writes its JSON
/// record to --out (or stdout). Exit status: 0 converged, 2 not converged,
/// 3 config error, 4 system above the dof cap (HELMHOLTZ_DD_MAX_DOFS).
#[derive(Parser)]
#[command(name = "helmholtz-dd", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a reference table and write a summary CSV.
    Sweep {
        /// Table id, table1 .. table16.
        table: String,
        /// Directory for the per-run records and <table>.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "left")]
        side: Side,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the table ids known to `sweep`.
    Tables,
}

/// Run flags. Unset flags fall back to --config, then to the defaults
/// (k = 40, p = 3, eps = pow:1.5, Strategy 1, H = pow:0.3, SORAS).
#[derive(Args)]
struct RunArgs {
    /// JSON config to start from, e.g. the `config` of an earlier record.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    /// Polynomial degree, 1..=4.
    #[arg(long)]
    p: Option<usize>,
    /// zero, pow:<gamma> (eps = k^gamma) or value:<eps>.
    #[arg(long)]
    eps: Option<EpsRule>,
    /// Impedance parameter: k, sign_eps_k or sqrt.
    #[arg(long)]
    eta: Option<EtaMode>,
    /// 1: coarse-vertex patches; 2: coarse squares extended by --overlap.
    #[arg(long)]
    strategy: Option<u8>,
    /// pow:<alpha> (H ~ k^-alpha) or fixed:<M> (H = 1/M).
    #[arg(long = "H")]
    coarse: Option<CoarseRule>,
    /// Hfrac:<c> (H/c), wavelengths:<c> (c/k) or cells:<c> (c h).
    #[arg(long)]
    overlap: Option<OverlapRule>,
    /// soras or oras.
    #[arg(long)]
    precond: Option<Variant>,
    /// GMRES inner product: euclidean or weighted.
    #[arg(long)]
    ip: Option<InnerProductKind>,
    /// Preconditioning side: left or right.
    #[arg(long)]
    side: Option<Side>,
    #[arg(long = "profile-A")]
    profile_a: Option<FieldKind>,
    #[arg(long = "profile-n")]
    profile_n: Option<FieldKind>,
    #[arg(long = "cmin-A")]
    cmin_a: Option<f64>,
    #[arg(long = "cmax-A")]
    cmax_a: Option<f64>,
    #[arg(long = "cmin-n")]
    cmin_n: Option<f64>,
    #[arg(long = "cmax-n")]
    cmax_n: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Element quadrature degree (default 2p - 2).
    #[arg(long)]
    quad_degree: Option<usize>,
    /// Write the field-of-values boundary as CSV next to the record.
    #[arg(long)]
    fov: bool,
    /// Compute the FoV lower bound and energy norm.
    #[arg(long)]
    bounds: bool,
    #[arg(long)]
    angles: Option<usize>,
    /// Record path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, RunError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:expr => $value:expr),* $(,)?) => {
                $(if let Some(v) = $value { $field = v; })*
            };
        }
        set! {
            c.k => self.k, c.p => self.p, c.eps => self.eps, c.eta => self.eta,
            c.strategy => self.strategy, c.coarse => self.coarse, c.overlap => self.overlap,
            c.precond => self.precond, c.ip => self.ip, c.side => self.side,
            c.a.profile => self.profile_a, c.n.profile => self.profile_n,
            c.a.cmin => self.cmin_a, c.a.cmax => self.cmax_a,
            c.n.cmin => self.cmin_n, c.n.cmax => self.cmax_n,
            c.tol => self.tol, c.maxit => self.maxit, c.seed => self.seed,
            c.angles => self.angles,
        }
        if self.quad_degree.is_some() {
            c.quad_degree = self.quad_degree;
        }
        c.fov |= self.fov;
        c.bounds |= self.bounds;
        if let Some(out) = self.out {
            c.out = Some(out.to_string_lossy().into_owned());
        }
        c.validate()?;
        Ok(c)
    }
}

/// `<out>` with its extension replaced by `fov.csv`, or `fov.csv`.
fn fov_path(out: Option<&str>) -> PathBuf {
    match out {
        Some(o) => Path::new(o).with_extension("fov.csv"),
        None => PathBuf::from("fov.csv"),
    }
}

fn single(args: RunArgs) -> Result<ExitCode, RunError> {
    let config = args.into_config()?;
    let mut outcome = run(&config)?;
    if let Some(fov) = &outcome.fov {
        let path = fov_path(config.out.as_deref());
        fs::write(&path, fov.to_csv())?;
        outcome.record.fov_csv = Some(path.to_string_lossy().into_owned());
    }
    let json = outcome.record.to_json();
    match &config.out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    let r = &outcome.record;
    eprintln!(
        "ndofs {} subdomains {} iterations {}{}",
        r.ndofs,
        r.subdomains,
        r.iterations,
        if r.converged { "" } else { " (not converged)" }
    );
    Ok(if r.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        None => single(cli.run),
        Some(Command::Tables) => {
            for id in TABLE_IDS {
                println!("{id}\t{}", table(id).map(|t| t.title).unwrap_or_default());
            }
            Ok(ExitCode::SUCCESS)
        }
        Some(Command::Sweep {
            table: id,
            out,
            side,
            seed,
        }) => table(&id).and_then(|t| {
            eprintln!("{}: {} ({} cells)", t.id, t.title, t.cells.len());
            sweep(&t, &out, side, seed, max_dofs(), |row| {
                eprintln!(
                    "  {} {}: reference {} measured {} [{}]",
                    row.row, row.column, row.reference, row.measured, row.status
                );
            })
            .map(|_| ExitCode::SUCCESS)
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code() as u8)
    })
}
