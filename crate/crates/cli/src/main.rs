use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vbi_core::experiment::{
    run_identification, run_simulation, write_identification, write_simulation, ExperimentConfig, Scenario,
};
use vbi_validation as validation;
use vbi_core::Error;

/// Vehicle-bridge interaction simulation and drive-by identification.
#[derive(Parser)]
#[command(name = "vbi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one crossing and write channel CSVs plus a JSON summary.
    Simulate(Common),
    /// Run repeated identifications and write posterior/prior samples.
    Identify(Common),
    /// Run the acceptance checks; exit status 2 when any fails.
    Validate(Common),
    /// Write the configured road profile as CSV.
    GenerateRoad(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration (defaults used for missing fields).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_parser = ["intact", "damaged"])]
    scenario: Option<String>,
    /// Noise standard deviation as a fraction of signal RMS.
    #[arg(long, value_name = "FLOAT")]
    noise: Option<f64>,
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
    /// Particles per swarm.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = &self.scenario {
            cfg.scenario = s.parse::<Scenario>()?;
        }
        if let Some(n) = self.noise {
            cfg.noise_pct = n;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(s) = self.samples {
            cfg.pso.samples = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = match &cli.command {
        Command::Simulate(c) | Command::Identify(c) | Command::Validate(c) | Command::GenerateRoad(c) => c,
    };
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let cfg = match common.load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Simulate(_) => simulate(&cfg),
        Command::Identify(_) => identify(&cfg),
        Command::Validate(_) => return validate(&cfg),
        Command::GenerateRoad(_) => generate_road(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<(), Error> {
    let sim = run_simulation(cfg)?;
    write_simulation(&sim, &cfg.out_dir)?;
    println!("{}", serde_json::to_string_pretty(&sim.summary)?);
    if !sim.summary.converged {
        eprintln!(
            "warning: fixed-point iteration did not converge (ε = {:.3e} after {} iterations)",
            sim.summary.epsilon, sim.summary.iterations
        );
    }
    Ok(())
}

fn identify(cfg: &ExperimentConfig) -> Result<(), Error> {
    let batch = run_identification(cfg)?;
    write_identification(cfg, &batch, &cfg.out_dir)?;
    let ok = batch.successes().count();
    println!(
        "{ok}/{} runs completed ({} scenario, noise {})",
        cfg.runs, cfg.scenario, cfg.noise_pct
    );
    for name in ["m_s1", "m_s2", "alpha_c", "beta_c"] {
        if let Some((prior, post)) = batch.deviation(name) {
            println!("{name:>8}: mean |x-1| prior {prior:.4}, posterior {post:.4}");
        }
    }
    for (i, r) in batch.runs.iter().enumerate() {
        if let Err(e) = r {
            eprintln!("run {i} failed: {e}");
        }
    }
    println!("outputs written to {}", cfg.out_dir.display());
    Ok(())
}

fn validate(cfg: &ExperimentConfig) -> ExitCode {
    let checks = match validation::run_all(cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn generate_road(cfg: &ExperimentConfig) -> Result<(), Error> {
    let road = cfg.road()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("road.csv");
    road.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!(
        "{} samples from {:.2} m to {:.2} m, RMS {:.4} m -> {}",
        road.len(),
        road.x0(),
        road.x_end(),
        road.rms(),
        path.display()
    );
    Ok(())
}
