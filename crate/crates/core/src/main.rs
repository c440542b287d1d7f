use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use geotransport::angular::{AngularBasis, AngularMatrices, BasisKind, DEFAULT_DISSIPATION};
use geotransport::geodesic_grid::GeodesicGrid;
use geotransport::io::export::{export_grid, export_matrices};
use geotransport::io::{ConfigMap, FieldFile, RunConfig};
use geotransport::problems::{l1_error, linf_error};
use geotransport::runner::run;
use geotransport::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "geotransport", version, about = "Angular finite-element radiation transport in 2D")]
struct Cli {
    /// Worker threads (falls back to GEOTRANSPORT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ProblemArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Refinement level for femn/sn.
    #[arg(long)]
    k: Option<usize>,
    /// Highest harmonic degree for fpn.
    #[arg(long)]
    lmax: Option<usize>,
    /// Multiplies the cell counts and divides the time step.
    #[arg(long)]
    scale: Option<f64>,
    /// Any configuration key, `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Vertex, edge and triangle counts of a geodesic grid.
    GridInfo {
        #[arg(long)]
        k: usize,
        /// Also write the grid as text.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Writes the angular matrices of a basis as binary files.
    ExportMatrices {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_DISSIPATION)]
        dissipation: f64,
        #[arg(long, default_value = "matrices")]
        out: PathBuf,
    },
    /// Runs a benchmark problem.
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// L1 and L∞ difference of the energy in two field files, or of one
    /// file against the problem oracle at the file's time.
    Error {
        numerical: PathBuf,
        reference: Option<PathBuf>,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Writes the oracle energy field of a problem.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::NonFinite { .. } => EXIT_BLOW_UP,
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

fn config_map(args: &ProblemArgs) -> Result<ConfigMap, Error> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    let flags = [
        ("problem", args.problem.clone()),
        ("scheme", args.scheme.clone()),
        ("k", args.k.map(|v| v.to_string())),
        ("lmax", args.lmax.map(|v| v.to_string())),
        ("scale", args.scale.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            map.set(key, &v);
        }
    }
    for s in &args.set {
        map.apply_override(s)?;
    }
    Ok(map)
}

fn init_threads(flag: Option<usize>, config: Option<usize>) -> Result<(), Error> {
    let env = std::env::var("GEOTRANSPORT_THREADS").ok();
    let threads = match (flag, config, env) {
        (Some(n), _, _) | (None, Some(n), _) => Some(n),
        (None, None, Some(s)) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("GEOTRANSPORT_THREADS=`{s}` is not a thread count")))?,
        ),
        _ => None,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn resolution(scheme: BasisKind, k: Option<usize>, lmax: Option<usize>) -> Result<usize, Error> {
    match (scheme, k, lmax) {
        (BasisKind::Fpn, None, Some(l)) => Ok(l),
        (BasisKind::Femn | BasisKind::Sn, Some(k), None) => Ok(k),
        (BasisKind::Fpn, _, _) => Err(Error::Config("fpn needs --lmax".into())),
        _ => Err(Error::Config(format!("{scheme} needs --k"))),
    }
}

fn energy_of(file: &FieldFile) -> Result<Vec<f64>, Error> {
    match file.payload {
        geotransport::io::Payload::Energy => Ok(file.data.clone()),
        geotransport::io::Payload::Coefficients => {
            let scheme: BasisKind = file.scheme.parse()?;
            let basis = AngularBasis::new(scheme, file.level)?;
            let m = AngularMatrices::assemble(&basis)?;
            file.energy_values(Some(&m.basis_integrals))
        }
    }
}

fn write_oracle(config: &RunConfig, time: f64, out: &Path) -> Result<(), Error> {
    let grid = config.spec.grid()?;
    let field = config
        .spec
        .oracle_field(&grid, time)?
        .ok_or_else(|| Error::Config(format!("{} has no oracle", config.problem)))?;
    FieldFile::energy("oracle", 0, 0, grid, time, field)?.save(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::GridInfo { k, export } => {
            init_threads(cli.threads, None)?;
            if k > 8 {
                return Err(Error::Config(format!("refinement level {k} is too large")));
            }
            let g = GeodesicGrid::with_level(k);
            let (np, ne, nt) = g.counts();
            let areas: Vec<f64> = (0..nt).map(|t| g.spherical_area(t)).collect();
            let min = areas.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = areas.iter().cloned().fold(0.0, f64::max);
            println!("level {k}: {np} vertices, {ne} edges, {nt} triangles");
            println!("triangle area min {min:.6e} max {max:.6e} ratio {:.4}", max / min);
            println!("total area {:.15}", areas.iter().sum::<f64>());
            if let Some(path) = export {
                export_grid(&g, &path)?;
                println!("wrote {}", path.display());
            }
        }
        Command::ExportMatrices {
            scheme,
            k,
            lmax,
            dissipation,
            out,
        } => {
            init_threads(cli.threads, None)?;
            let scheme: BasisKind = scheme.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            let res = resolution(scheme, k, lmax)?;
            let basis = AngularBasis::new(scheme, res)?;
            let m = AngularMatrices::assemble_with(&basis, dissipation)?;
            let files = export_matrices(&m, &out)?;
            println!("wrote {} files ({}x{} matrices) to {}", files.len(), m.n, m.n, out.display());
        }
        Command::Run { problem, output } => {
            let mut map = config_map(&problem)?;
            if let Some(dir) = output {
                map.set("output_dir", &dir.to_string_lossy());
            }
            let config = RunConfig::from_map(&map)?;
            init_threads(cli.threads, config.threads)?;
            run(&config, &mut std::io::stderr())?;
        }
        Command::Error {
            numerical,
            reference,
            problem,
        } => {
            init_threads(cli.threads, None)?;
            let num = FieldFile::load(&numerical)?;
            let e_num = energy_of(&num)?;
            let e_ref = match reference {
                Some(path) => {
                    let r = FieldFile::load(&path)?;
                    if r.grid.nx != num.grid.nx || r.grid.ny != num.grid.ny {
                        return Err(Error::Shape(format!(
                            "grids differ: {}x{} vs {}x{}",
                            num.grid.nx, num.grid.ny, r.grid.nx, r.grid.ny
                        )));
                    }
                    energy_of(&r)?
                }
                None => {
                    let config = RunConfig::from_map(&config_map(&problem)?)?;
                    config
                        .spec
                        .oracle_field(&num.grid, num.time)?
                        .ok_or_else(|| Error::Config(format!("{} has no oracle", config.problem)))?
                }
            };
            println!("l1_error = {:?}", l1_error(&e_num, &e_ref)?);
            println!("linf_error = {:?}", linf_error(&e_num, &e_ref)?);
        }
        Command::Oracle { problem, time, out } => {
            let config = RunConfig::from_map(&config_map(&problem)?)?;
            init_threads(cli.threads, config.threads)?;
            write_oracle(&config, time.unwrap_or(config.spec.t_end), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
