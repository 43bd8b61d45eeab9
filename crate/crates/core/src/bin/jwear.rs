use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use junction_wear::energy::SplitKind;
use junction_wear::io::{self, RunConfig};
use junction_wear::pipeline::{reclassify_dir, run_case_observed, write_case};
use junction_wear::study::{
    fit_transition, macro_persistence_violations, parse_value_list, preset, sweep_interaction, sweep_single, SweepGrid,
};

#[derive(Parser)]
#[command(name = "jwear", version, about = "Phase-field fracture of sheared asperity junctions")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML); defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    split: Option<SplitKind>,
    /// Store field snapshots every N load steps.
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Mesh seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Workers {
    /// Concurrent simulations.
    #[arg(long, env = "JWEAR_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Single-junction grid over J and H/D (and optionally ell/D).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        workers: Workers,
        /// Junction ratios, `a,b,c` or `start:end:step`.
        #[arg(long, default_value = "0.1:1.0:0.1")]
        js: String,
        #[arg(long, default_value = "0.3:0.8:0.1")]
        h_over_d: String,
        #[arg(long)]
        ell_over_d: Option<String>,
        /// Named regularization study (G1 or G2); replaces the grid flags.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Double-junction runs over the gap grid.
    Interact {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        workers: Workers,
        /// Geometries as `J/H_over_D` pairs, comma separated.
        #[arg(long, default_value = "0.7/0.6")]
        geometries: String,
        /// Gaps in units of D.
        #[arg(long, default_value = "1.0,1.5")]
        deltas: String,
        /// Transition constant for the interaction coordinates.
        #[arg(long, default_value_t = 0.27)]
        c: f64,
    },
    /// Re-classify stored runs, optionally with the thresholds of another configuration.
    Classify {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit the transition constant to a sweep table.
    Fit { sweep: PathBuf },
    /// Summarize a run directory or report file.
    Report { path: PathBuf },
}

fn load(common: &Common) -> junction_wear::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => io::load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.output.directory = o.clone();
    }
    if let Some(s) = common.split {
        cfg.split = s;
    }
    if let Some(n) = common.snapshot_every {
        cfg.output.snapshot_every = n;
    }
    if let Some(s) = common.seed {
        cfg.mesh.seed = s;
    }
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn jobs(w: &Workers) -> usize {
    w.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn write_config_copy(cfg: &RunConfig) -> junction_wear::Result<()> {
    std::fs::create_dir_all(&cfg.output.directory)?;
    std::fs::write(cfg.output.directory.join("base_config.toml"), cfg.to_toml())?;
    Ok(())
}

fn execute(cmd: Command) -> junction_wear::Result<()> {
    match cmd {
        Command::Run { common } => {
            let cfg = load(&common)?;
            let mut progress = |r: &junction_wear::solver::StepRecord| {
                eprintln!(
                    "step {:4}  u_t {:.5}  reaction {:.5}  max alpha {:.4}  iters {}",
                    r.step, r.u_t, r.reaction, r.max_alpha, r.altmin_iterations
                );
            };
            let res = run_case_observed(&cfg, &mut progress)?;
            write_case(&res, &cfg, &cfg.output.directory)?;
            print!("{}", res.report.summary());
            println!("written to {}", cfg.output.directory.display());
        }
        Command::Sweep {
            common,
            workers,
            js,
            h_over_d,
            ell_over_d,
            preset: name,
        } => {
            let cfg = load(&common)?;
            let grid = match name {
                Some(n) => {
                    preset(&n)
                        .ok_or_else(|| junction_wear::Error::InvalidParameter {
                            name: "preset".into(),
                            reason: format!("unknown preset `{n}`"),
                        })?
                        .grid
                }
                None => SweepGrid {
                    js: parse_value_list(&js)?,
                    h_over_ds: parse_value_list(&h_over_d)?,
                    ell_over_ds: ell_over_d.as_deref().map(parse_value_list).transpose()?.unwrap_or_default(),
                },
            };
            write_config_copy(&cfg)?;
            let dir = cfg.output.directory.clone();
            let pts = sweep_single(&grid, &cfg, jobs(&workers), Some(&dir))?;
            io::write_sweep_csv(&dir.join("sweep.csv"), &pts)?;
            for p in &pts {
                println!(
                    "J {:.3}  H/D {:.3}  ell/D {:.4}  {:<16} {}",
                    p.j,
                    p.h_over_d,
                    p.ell_over_d,
                    p.mode.to_string(),
                    p.meta.error.as_deref().unwrap_or("")
                );
            }
            println!("sweep table: {}", dir.join("sweep.csv").display());
        }
        Command::Interact {
            common,
            workers,
            geometries,
            deltas,
            c,
        } => {
            let mut cfg = load(&common)?;
            if common.split.is_none() && common.config.is_none() {
                cfg.split = SplitKind::PositiveHydrostatic;
            }
            let geoms = geometries
                .split(',')
                .map(|g| {
                    let (j, h) = g.split_once('/').ok_or_else(|| junction_wear::Error::InvalidParameter {
                        name: "geometries".into(),
                        reason: format!("`{g}` is not J/H_over_D"),
                    })?;
                    let p = |t: &str| parse_value_list(t).map(|v| v[0]);
                    Ok((p(j)?, p(h)?))
                })
                .collect::<junction_wear::Result<Vec<_>>>()?;
            write_config_copy(&cfg)?;
            let dir = cfg.output.directory.clone();
            let pts = sweep_interaction(&geoms, &parse_value_list(&deltas)?, &cfg, c, jobs(&workers), Some(&dir))?;
            io::write_interaction_csv(&dir.join("interaction.csv"), &pts)?;
            for p in &pts {
                println!(
                    "J {:.3}  H/D {:.3}  Delta/D {:.3}  j_r {:.4}  j_a {:.4}  {} ({} events)",
                    p.j, p.h_over_d, p.delta_gap, p.j_r, p.j_a, p.mode, p.particle_events
                );
            }
            for v in macro_persistence_violations(&pts) {
                eprintln!("warning: {v}");
            }
        }
        Command::Classify { dirs, config } => {
            let thresholds = config.map(|p| io::load_config(&p)).transpose()?.map(|c| c.classifier);
            for d in &dirs {
                let c = reclassify_dir(d, thresholds.as_ref())?;
                println!("{}: {} ({} events)", d.display(), c.mode, c.particle_events);
            }
        }
        Command::Fit { sweep } => {
            let fit = fit_transition(&io::read_sweep_csv(&sweep)?)?;
            for (h, why) in &fit.excluded {
                eprintln!("warning: H/D = {h} excluded: {why}");
            }
            for b in &fit.brackets {
                println!(
                    "H/D {:.3}: J* in [{:.3}, {:.3}], midpoint {:.4}",
                    b.h_over_d,
                    b.j_small,
                    b.j_large,
                    b.midpoint()
                );
            }
            println!("C = {:.4} +/- {:.4} (rms residual {:.4})", fit.c, fit.c_uncertainty, fit.residual);
        }
        Command::Report { path } => {
            let file = if path.is_dir() { path.join("report.toml") } else { path };
            print!("{}", report_text(&file)?);
        }
    }
    Ok(())
}

fn report_text(file: &Path) -> junction_wear::Result<String> {
    Ok(io::parse_report(&std::fs::read_to_string(file)?)?.summary())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
