use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use couple_stress::config::{Config, Mode, SurfaceChoice};
use couple_stress::identity_suite::{run_integrals, run_selected};
use couple_stress::poly_fields::parse_poly_vec;
use couple_stress::report;
use couple_stress::scalar::parse_rational;
use couple_stress::tensor_core::Vec3;

/// Exact verification of couple stress constitutive and boundary identities.
#[derive(Parser)]
#[command(name = "couple-stress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite and write report.json and summary.md.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run a single catalogue item, by full id or `Inn` prefix.
        #[arg(long)]
        check: Option<String>,
    },
    /// Print bulk tensors and tractions for one field at one point.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Field literal `u1; u2; u3`, e.g. "x2^2; 0; 0".
        #[arg(long)]
        field: String,
        /// Comma-separated rational coordinates, e.g. "1/2,0,-1".
        #[arg(long)]
        point: String,
        #[arg(long, value_enum)]
        surface: Option<SurfaceArg>,
    },
    /// Run the integral identities under quadrature refinement.
    Integrals {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SurfaceArg {
    Plane,
    Sphere,
    Ellipsoid,
    Saddle,
}

impl From<SurfaceArg> for SurfaceChoice {
    fn from(s: SurfaceArg) -> Self {
        match s {
            SurfaceArg::Plane => SurfaceChoice::Plane,
            SurfaceArg::Sphere => SurfaceChoice::Sphere,
            SurfaceArg::Ellipsoid => SurfaceChoice::Ellipsoid,
            SurfaceArg::Saddle => SurfaceChoice::Saddle,
        }
    }
}

enum Failure {
    Checks,
    Usage(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

impl Common {
    fn load(&self) -> Result<Config, Failure> {
        let mut config = match &self.config {
            Some(path) => Config::load(path).map_err(usage)?,
            None => Config::default(),
        };
        if let Some(mode) = self.mode {
            config.mode = mode;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

fn parse_point(text: &str) -> Result<Vec3<couple_stress::scalar::Rational>, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!("point `{text}` needs 3 comma-separated coordinates")));
    }
    let mut coords = Vec::with_capacity(3);
    for p in parts {
        coords.push(parse_rational(p).map_err(|e| format!("point coordinate `{p}`: {e}"))?);
    }
    Ok(Vec3::from_fn(|i| coords[i].clone()))
}

fn verify(common: &Common, check: Option<&str>) -> Result<(), Failure> {
    let config = common.load()?;
    let result = run_selected(&config, check).map_err(usage)?;
    let (json, md) = report::write_suite_outputs(&result, &config.output.dir).map_err(usage)?;
    for c in &result.checks {
        println!("{:<26} {:<8} {:>8} evals  max {}", c.id, format!("{:?}", c.status).to_lowercase(), c.evaluations, c.max_residual);
    }
    for w in &result.warnings {
        println!("warning: {w}");
    }
    println!("wrote {} and {}", json.display(), md.display());
    if result.all_passed {
        Ok(())
    } else {
        eprint!("{}", report::render_failures(&result));
        Err(Failure::Checks)
    }
}

fn evaluate(common: &Common, field: &str, point: &str, surface: Option<SurfaceArg>) -> Result<(), Failure> {
    let config = common.load()?;
    let u = parse_poly_vec(field).map_err(|e| format!("field literal: {e}"))?;
    let x = parse_point(point)?;
    let surface = surface.map(|s| SurfaceChoice::from(s).surface());
    let result = report::evaluate_point(&config, &u, &x, surface.as_ref()).map_err(usage)?;
    print!("{}", report::render_evaluation(&result));
    Ok(())
}

fn integrals(common: &Common) -> Result<(), Failure> {
    let config = common.load()?;
    let result = run_integrals(&config).map_err(usage)?;
    print!("{}", report::render_integrals(&result));
    let path = report::write_integrals(&result, Path::new(&config.output.dir)).map_err(usage)?;
    println!("wrote {}", path.display());
    if result.all_converged {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify { common, check } => verify(common, check.as_deref()),
        Command::Evaluate { common, field, point, surface } => evaluate(common, field, point, *surface),
        Command::Integrals { common } => integrals(common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
