use clap::{Parser, Subcommand};
use frg_cli::report::to_json_bytes;
use frg_cli::runner;
use frg_cli::scenario::{load_scenario, CompiledScenario};
use frg_core::maxwell::VelocitySection;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "frg",
    about = "Finsler-Randers geometrodynamics engine: tensor pipelines, geodesics, and field-equation residuals over analytic scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the sampled probe count of the scenario's probe box.
    #[arg(long)]
    probes: Option<usize>,
    /// Override the probe-sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report depth: 1 = pointwise tensors, 2 = + curvature bundle,
    /// 3 = + divergence probe.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
    order: u8,
    /// Velocity section override: `constant:y0,y1,y2,y3` or
    /// `exprs:e0;e1;e2;e3`.
    #[arg(long)]
    section: Option<String>,
    /// Enable a named toggle (repeatable): drop_beta_over_L,
    /// connection_corrected_maxwell, classical_em.
    #[arg(long)]
    toggle: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every tensor bundle at the scenario probes.
    Inspect(CommonArgs),
    /// Run the invariant suite; exits nonzero on any failure.
    Validate(CommonArgs),
    /// Integrate the scenario's geodesics and export CSV trajectories.
    Geodesic(CommonArgs),
    /// Sweep the generalized Maxwell residuals over the probes into CSV.
    MaxwellSweep(CommonArgs),
    /// Berwald diagnostics over the probes.
    BerwaldCheck(CommonArgs),
}

fn apply_overrides(sc: &mut CompiledScenario, args: &CommonArgs) -> Result<(), String> {
    for t in &args.toggle {
        match t.as_str() {
            "drop_beta_over_L" => sc.drop_beta_over_l = true,
            "connection_corrected_maxwell" => sc.connection_corrected = true,
            "classical_em" => sc.classical_em = true,
            other => return Err(format!("unknown toggle `{other}`")),
        }
    }
    if let Some(spec) = &args.section {
        if let Some(rest) = spec.strip_prefix("constant:") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("bad section constant: {e}"))?;
            if parts.len() != 4 {
                return Err("section constant needs 4 components".into());
            }
            sc.section = VelocitySection::Constant([parts[0], parts[1], parts[2], parts[3]]);
        } else if let Some(rest) = spec.strip_prefix("exprs:") {
            let parts: Vec<&str> = rest.split(';').collect();
            if parts.len() != 4 {
                return Err("section exprs needs 4 ;-separated expressions".into());
            }
            let names: Vec<String> = sc.background.param_names().to_vec();
            sc.section = VelocitySection::from_sources(
                [parts[0], parts[1], parts[2], parts[3]],
                &names,
            )
            .map_err(|e| format!("section: {e}"))?;
        } else {
            return Err("section must start with `constant:` or `exprs:`".into());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, String> {
    let args = match &cli.command {
        Command::Inspect(a)
        | Command::Validate(a)
        | Command::Geodesic(a)
        | Command::MaxwellSweep(a)
        | Command::BerwaldCheck(a) => a,
    };
    let start = Instant::now();
    let mut sc = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    apply_overrides(&mut sc, args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
    let probes = sc.probes(args.probes, args.seed);
    let order = args.order as usize;

    let code = match &cli.command {
        Command::Inspect(_) => {
            let report = runner::run_inspect(&sc, &probes, order);
            std::fs::write(args.out.join("report.json"), to_json_bytes(&report))
                .map_err(|e| e.to_string())?;
            eprintln!(
                "inspect: {} probes ({} failed) in {:.2?}",
                report.probes.len(),
                report.probes.iter().filter(|p| p.error.is_some()).count(),
                start.elapsed()
            );
            0
        }
        Command::Validate(_) => {
            let report = runner::run_validate(&sc, &probes);
            std::fs::write(args.out.join("report.json"), to_json_bytes(&report))
                .map_err(|e| e.to_string())?;
            let mut failed = 0;
            for row in &report.invariants {
                let status = if row.pass { "pass" } else { "FAIL" };
                eprintln!(
                    "{status}  {:<32} measured {:>12.3e}  tol {:>8.1e}  skips {}",
                    row.id, row.measured, row.tolerance, row.domain_skips
                );
                if !row.pass {
                    failed += 1;
                }
            }
            eprintln!(
                "validate: {} invariants, {failed} failed, {} probes in {:.2?}",
                report.invariants.len(),
                probes.len(),
                start.elapsed()
            );
            if failed > 0 {
                1
            } else {
                0
            }
        }
        Command::Geodesic(_) => {
            let report = runner::run_geodesics(&sc, &args.out).map_err(|e| e.to_string())?;
            std::fs::write(args.out.join("report.json"), to_json_bytes(&report))
                .map_err(|e| e.to_string())?;
            for t in &report.trajectories {
                eprintln!(
                    "trajectory {}: {} samples, drift {:.3e}, domain_exit {}",
                    t.index, t.samples, t.conservation_drift, t.domain_exit
                );
            }
            eprintln!("geodesic: done in {:.2?}", start.elapsed());
            0
        }
        Command::MaxwellSweep(_) => {
            runner::run_maxwell_sweep(&sc, &probes, &args.out).map_err(|e| e.to_string())?;
            eprintln!(
                "maxwell-sweep: {} probes in {:.2?} -> maxwell_sweep.csv",
                probes.len(),
                start.elapsed()
            );
            0
        }
        Command::BerwaldCheck(_) => {
            let check = runner::run_berwald_check(&sc, &probes);
            let json = serde_json::to_string_pretty(&check).map_err(|e| e.to_string())?;
            std::fs::write(args.out.join("berwald_check.json"), json + "\n")
                .map_err(|e| e.to_string())?;
            eprintln!(
                "berwald-check: {}/{} probes Berwald, max |B_cov| = {:.3e} in {:.2?}",
                check.berwald_probes,
                check.probes,
                check.max_b_cov,
                start.elapsed()
            );
            0
        }
    };
    Ok(code)
}
