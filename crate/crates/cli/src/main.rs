use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fanning_lab::{load_config, run, EXIT_OK, EXIT_TOLERANCE};
use fanning_lab_core::finsler::zoo::ZOO;
use fanning_lab_core::validation::{run_all, Settings};

#[derive(Parser)]
#[command(name = "fanning-lab", version, about = "Flag curvature experiments on Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory for `<name>.csv` and `<name>.summary.json`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        /// Step of every `t`-stencil; large values degrade the results.
        #[arg(long)]
        stencil_h: Option<f64>,
        #[arg(long)]
        steps_per_unit: Option<usize>,
    },
    /// List the named metrics accepted in configs.
    ListMetrics,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => match load_config(&config).and_then(|cfg| run(&cfg, &out)) {
            Ok(report) => {
                print!("{}", report.summary.to_json());
                eprintln!("wrote {} and {}", report.csv_path.display(), report.summary_path.display());
                report.exit_code()
            }
            Err(e) => {
                eprintln!("fanning-lab: {e}");
                e.exit_code()
            }
        },
        Command::Selftest { seed, stencil_h, steps_per_unit } => {
            let mut s = Settings::default();
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(h) = stencil_h {
                if !(h > 0.0 && h.is_finite()) {
                    eprintln!("fanning-lab: config error: --stencil-h must be positive and finite");
                    return ExitCode::from(2);
                }
                s.stencil.h = h;
                s.transport.stencil_h = h;
            }
            if let Some(k) = steps_per_unit {
                if k == 0 {
                    eprintln!("fanning-lab: config error: --steps-per-unit must be positive");
                    return ExitCode::from(2);
                }
                s.transport.steps_per_unit = k;
            }
            let reports = run_all(&s);
            for r in &reports {
                println!("{r}");
            }
            let passed = reports.iter().filter(|r| r.passed()).count();
            println!("{passed}/{} criteria passed", reports.len());
            if passed == reports.len() {
                EXIT_OK
            } else {
                EXIT_TOLERANCE
            }
        }
        Command::ListMetrics => {
            for (id, about) in ZOO {
                println!("{id:<22} {about}");
            }
            EXIT_OK
        }
    };
    ExitCode::from(code)
}
