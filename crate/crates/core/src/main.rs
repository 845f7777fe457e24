use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pu_convex::experiment::{
    export_error_field, format_table, run_experiment_detailed, run_table, shape_sweep, with_threads, write_records,
    write_sweep, DomainSpec, ExperimentConfig, SampleSize, SweepRange, DEFAULT_MAX_N_3D,
};
use pu_convex::geometry::GridLayout;
use pu_convex::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "pu-convex", version, about = "Partition of unity RBF benchmarks on convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit and evaluate one configuration.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        size: Size,
        /// Write the run record as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run k-levels 1 to 5 and print the results table.
    Table {
        #[command(flatten)]
        common: Common,
        /// Skip levels with more data points than this (3D default: 30000).
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary the shape parameter on fixed data.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value_t = 0.1)]
        shape_min: f64,
        #[arg(long, default_value_t = 3.0)]
        shape_max: f64,
        #[arg(long, default_value_t = 30)]
        samples: usize,
        /// Two-column `shape,rmse` series.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export true, interpolated and absolute error values on the evaluation grid.
    Field {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// triangle, disk, hexagon, pyramid, cylinder, hexprism, cube or hull:FILE.
    #[arg(long)]
    domain: DomainSpec,
    /// Defaults to the domain's own dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Wendland shape parameter.
    #[arg(long, default_value_t = 0.1)]
    shape: f64,
    #[arg(long, default_value_t = 40)]
    eval_per_axis: usize,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Layout of the subdomain and evaluation grids: inclusive or cell.
    #[arg(long, default_value = "inclusive")]
    grid: GridLayout,
    #[arg(long, default_value_t = 1.0)]
    radius_scale: f64,
    /// Diagonal shift added to every local matrix.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Interpolate f = 1 instead of the Franke function.
    #[arg(long)]
    constant_data: bool,
}

#[derive(Args, Debug)]
struct Size {
    /// Draw (10 K)^dim Halton candidates.
    #[arg(long, conflicts_with = "n")]
    k_level: Option<u32>,
    /// Keep exactly N points inside the domain.
    #[arg(long)]
    n: Option<usize>,
}

impl Size {
    fn resolve(&self) -> SampleSize {
        match (self.k_level, self.n) {
            (_, Some(n)) => SampleSize::Count(n),
            (Some(k), None) => SampleSize::KLevel(k),
            (None, None) => SampleSize::KLevel(4),
        }
    }
}

impl Common {
    fn config(&self, size: SampleSize) -> Result<ExperimentConfig> {
        let dim = match (self.dim, self.domain.native_dim()) {
            (Some(d), _) => d,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::Config(format!("--dim is required for `{}`", self.domain))),
        };
        let config = ExperimentConfig {
            kernel_shape: self.shape,
            eval_per_axis: self.eval_per_axis,
            grid_layout: self.grid,
            radius_scale: self.radius_scale,
            jitter: self.jitter,
            constant_data: self.constant_data,
            ..ExperimentConfig::new(self.domain.clone(), dim, size)
        };
        config.validate()?;
        Ok(config)
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { common, size, out } => {
            let config = common.config(size.resolve())?;
            let record = with_threads(common.threads, || run_experiment_detailed(&config))??.record;
            print!("{}", format_table(std::slice::from_ref(&record)));
            if record.uncovered_count > 0 {
                println!("{} evaluation points fell outside every subdomain", record.uncovered_count);
            }
            if let Some(path) = out {
                write_records(&path, &[record])?;
            }
        }
        Command::Table { common, max_n, out } => {
            let config = common.config(SampleSize::KLevel(1))?;
            let cap = max_n.or((config.dim == 3).then_some(DEFAULT_MAX_N_3D));
            let rows = with_threads(common.threads, || run_table(&config, cap))??;
            print!("{}", format_table(&rows));
            if let Some(path) = out {
                write_records(&path, &rows)?;
            }
        }
        Command::Sweep {
            common,
            size,
            shape_min,
            shape_max,
            samples,
            out,
        } => {
            let config = common.config(size.resolve())?;
            let range = SweepRange {
                min: shape_min,
                max: shape_max,
                samples,
            };
            let sweep = with_threads(common.threads, || shape_sweep(&config, range))??;
            for (shape, r) in &sweep {
                println!("{shape:>10.4} {:>10}", pu_convex::experiment::sci3(r.rmse));
            }
            if let Some(path) = out {
                write_sweep(&path, &sweep)?;
            }
        }
        Command::Field { common, size, out } => {
            let config = common.config(size.resolve())?;
            let run = with_threads(common.threads, || run_experiment_detailed(&config))??;
            export_error_field(&run, &out)?;
            print!("{}", format_table(std::slice::from_ref(&run.record)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
