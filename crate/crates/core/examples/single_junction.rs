//! Shears one asperity junction at desk resolution, classifies the failure and writes
//! the run directory.
//!
//! `cargo run --release --example single_junction -- [ph|hd|nosplit] [H/D] [J] [out_dir]`

use std::path::PathBuf;
use std::time::Instant;

use junction_wear::io::RunConfig;
use junction_wear::pipeline::{run_case_observed, write_case};
use junction_wear::solver::StepRecord;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RunConfig::desk();
    cfg.split = args.first().map_or("ph", String::as_str).parse()?;
    cfg.geometry.h_over_d = args.get(1).map_or(Ok(0.5), |s| s.parse())?;
    cfg.geometry.j = args.get(2).map_or(Ok(0.5), |s| s.parse())?;
    cfg.output.directory = PathBuf::from(args.get(3).map_or("out/single_junction", String::as_str));
    cfg.validate()?;

    let t0 = Instant::now();
    println!("step      u_t   elastic  fracture   reaction  max_alpha  iters");
    let mut show = |r: &StepRecord| {
        println!(
            "{:4} {:8.5} {:9.5} {:9.5} {:10.5} {:10.4} {:6}{}",
            r.step,
            r.u_t,
            r.elastic,
            r.fracture,
            r.reaction,
            r.max_alpha,
            r.altmin_iterations,
            if r.converged { "" } else { " (not converged)" }
        );
    };
    let res = run_case_observed(&cfg, &mut show)?;
    write_case(&res, &cfg, &cfg.output.directory)?;
    print!("{}", res.report.summary());
    println!("solved in {:.1?}, written to {}", t0.elapsed(), cfg.output.directory.display());
    Ok(())
}
