use std::path::PathBuf;
use std::process::ExitCode;

use cellhom::geometry::ElementOrder;
use cellhom::homogenize::KappaNormalization;
use cellhom::{Error, Result};
use cellhom_cli::config::RunConfig;
use cellhom_cli::pipeline::{fields_path, run_generate_mesh, run_homogenize, run_verify};
use cellhom_cli::report::Report;
use cellhom_cli::{exit_code, EXIT_OK, EXIT_VERIFY};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cellhom", version, about = "Periodic-cell homogenization of porous thermoelastic solids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the cell problems and write the homogenized parameters.
    Homogenize {
        config: PathBuf,
        #[command(flatten)]
        mesh: MeshFlags,
        #[arg(long)]
        kappa_norm: Option<KappaNormalization>,
        /// Sequential execution, bit-identical across runs.
        #[arg(long)]
        deterministic: bool,
        /// Also write the nodal corrector fields next to the report.
        #[arg(long)]
        dump_fields: bool,
        /// Report path, overriding `output.report`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare a report against a reference report.
    Verify {
        report: PathBuf,
        reference: PathBuf,
        /// Relative tolerance for every tensor.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Config whose `[verify]` block supplies per-tensor tolerances.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Rows of the worst-offender table.
        #[arg(long, default_value_t = 10)]
        show: usize,
    },
    /// Generate (or import) the mesh only and write MSH and JSON files.
    Mesh {
        config: PathBuf,
        #[command(flatten)]
        mesh: MeshFlags,
        /// Output base path; `.msh` and `.json` are appended.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshFlags {
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long, value_parser = parse_order)]
    order: Option<ElementOrder>,
    /// Seed for placing `random4` pores when no centers are given.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_order(s: &str) -> std::result::Result<ElementOrder, String> {
    let v: u8 = s.parse().map_err(|_| format!("element order must be 1 or 2, got `{s}`"))?;
    ElementOrder::try_from(v)
}

impl MeshFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(r) = self.resolution {
            cfg.geometry.resolution = r;
        }
        if let Some(o) = self.order {
            cfg.geometry.order = o;
        }
        if let Some(s) = self.seed {
            cfg.geometry.random_seed = Some(s);
        }
    }
}

fn homogenize_cmd(
    config: PathBuf,
    mesh: MeshFlags,
    kappa_norm: Option<KappaNormalization>,
    deterministic: bool,
    dump_fields: bool,
    output: Option<PathBuf>,
) -> i32 {
    let mut cfg = match RunConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    mesh.apply(&mut cfg);
    if let Some(k) = kappa_norm {
        cfg.physics.kappa_normalization = k;
    }
    cfg.physics.deterministic |= deterministic;
    cfg.output.dump_fields |= dump_fields;
    if output.is_some() {
        cfg.output.report = output;
    }
    match run_homogenize(&cfg) {
        Ok(report) => {
            match &cfg.output.report {
                Some(p) => {
                    eprintln!("report written to {}", p.display());
                    if cfg.output.dump_fields {
                        eprintln!("fields written to {}", fields_path(p).display());
                    }
                }
                None => match report.to_json() {
                    Ok(t) => println!("{t}"),
                    Err(e) => return fail(&e),
                },
            }
            EXIT_OK
        }
        Err(e) => {
            if let Some(p) = &cfg.output.report {
                if let Err(w) = Report::failure(&e).write(p) {
                    eprintln!("could not write error report: {w}");
                }
            }
            fail(&e)
        }
    }
}

fn verify_cmd(report: PathBuf, reference: PathBuf, tolerance: Option<f64>, config: Option<PathBuf>, show: usize) -> Result<i32> {
    let mut tol = match config {
        Some(c) => RunConfig::load(&c)?.verify,
        None => Default::default(),
    };
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {t}")));
        }
        tol.default_tolerance = Some(t);
        tol.tolerances.clear();
    }
    let v = run_verify(&report, &reference, &tol)?;
    print!("{}", v.table(show));
    if v.passed() {
        println!("PASS");
        Ok(EXIT_OK)
    } else {
        let names: Vec<String> = v.failures().map(|e| e.label()).collect();
        println!("FAIL: {}", names.join(", "));
        Ok(EXIT_VERIFY)
    }
}

fn mesh_cmd(config: PathBuf, mesh: MeshFlags, output: Option<PathBuf>) -> Result<i32> {
    let mut cfg = RunConfig::load(&config)?;
    mesh.apply(&mut cfg);
    if output.is_some() {
        cfg.output.mesh = output;
    }
    let (msh, json) = run_generate_mesh(&cfg)?;
    eprintln!("mesh written to {} and {}", msh.display(), json.display());
    Ok(EXIT_OK)
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Homogenize {
            config,
            mesh,
            kappa_norm,
            deterministic,
            dump_fields,
            output,
        } => homogenize_cmd(config, mesh, kappa_norm, deterministic, dump_fields, output),
        Command::Verify {
            report,
            reference,
            tolerance,
            config,
            show,
        } => verify_cmd(report, reference, tolerance, config, show).unwrap_or_else(|e| fail(&e)),
        Command::Mesh { config, mesh, output } => mesh_cmd(config, mesh, output).unwrap_or_else(|e| fail(&e)),
    };
    ExitCode::from(code as u8)
}
