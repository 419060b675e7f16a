use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zeno_gate::experiments::{
    format_zeno_table, gate_time_report, run_fig2, run_fig3, run_fig4, run_fig6, run_truth_table,
    run_zeno_check, ExperimentConfig, DEFAULT_DELTA, DEFAULT_OMEGA,
};
use zeno_gate::model::{GammaSpec, RateSpec};
use zeno_gate::units::DEFAULT_G_MHZ;
use zeno_gate::zeno::Regime;

#[derive(Parser)]
#[command(
    name = "zeno-gate",
    version,
    about = "Zeno-blockade multiqubit phase gate simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare H2 spectra and eigenvectors of the three-qubit sectors with closed forms
    ZenoCheck,
    /// Seed amplitudes of the three sectors over time
    Fig2 {
        variant: Fig2Variant,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Gate fidelity over coupling mismatches (dg1, dg2)
    Fig3 {
        variant: PairVariant,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Gate fidelity over photon loss and qudit relaxation rates
    Fig4 {
        variant: PairVariant,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Seven-qubit flagged-state amplitude over time
    Fig6 {
        variant: PairVariant,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Return amplitude and phase of every computational input
    TruthTable {
        /// Run the resonant gate instead of the dispersive one
        #[arg(long)]
        resonant: bool,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Gate durations for N qubits
    GateTime {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g_mhz: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_OMEGA)]
        omega: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig2Variant {
    /// Dispersive (Delta = g)
    A,
    /// Resonant (Delta = 0)
    C,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairVariant {
    /// Dispersive (Delta = g)
    A,
    /// Resonant (Delta = 0)
    B,
}

impl From<Fig2Variant> for Regime {
    fn from(v: Fig2Variant) -> Self {
        match v {
            Fig2Variant::A => Regime::NonResonant,
            Fig2Variant::C => Regime::Resonant,
        }
    }
}

impl From<PairVariant> for Regime {
    fn from(v: PairVariant) -> Self {
        match v {
            PairVariant::A => Regime::NonResonant,
            PairVariant::B => Regime::Resonant,
        }
    }
}

#[derive(Args, Clone, Default)]
struct RunOpts {
    /// TOML config; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Uniform photon loss rate
    #[arg(long)]
    kappa: Option<f64>,
    /// Uniform qudit relaxation rate, every channel out of |e>
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dg1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dg2: Option<f64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    /// Evolution time in 1/g; defaults to the gate time
    #[arg(long)]
    duration: Option<f64>,
    /// Points per sweep axis
    #[arg(long)]
    grid: Option<usize>,
    /// Coupling in MHz; adds a t_ns column
    #[arg(long)]
    g_mhz: Option<f64>,
}

impl RunOpts {
    fn resolve(&self) -> zeno_gate::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.omega.is_some() {
            cfg.model.omega = self.omega;
        }
        if self.delta.is_some() {
            cfg.model.delta = self.delta;
        }
        if let Some(k) = self.kappa {
            cfg.model.kappa = Some(RateSpec::Uniform(k));
        }
        if let Some(g) = self.gamma {
            cfg.model.gamma = Some(GammaSpec::Uniform(g));
        }
        if self.dg1.is_some() || self.dg2.is_some() {
            let mut dg = cfg.dg.clone().unwrap_or_else(|| vec![0.0, 0.0]);
            if dg.len() < 2 {
                dg.resize(2, 0.0);
            }
            if let Some(x) = self.dg1 {
                dg[0] = x;
            }
            if let Some(x) = self.dg2 {
                dg[1] = x;
            }
            cfg.dg = Some(dg);
        }
        if self.samples.is_some() {
            cfg.samples = self.samples;
        }
        if self.duration.is_some() {
            cfg.duration = self.duration;
        }
        if self.grid.is_some() {
            cfg.grid_points = self.grid;
        }
        if self.g_mhz.is_some() {
            cfg.g_mhz = self.g_mhz;
        }
        Ok(cfg)
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> zeno_gate::Result<bool> {
    match cli.command {
        Command::ZenoCheck => {
            let rows = run_zeno_check()?;
            print!("{}", format_zeno_table(&rows));
            Ok(rows
                .iter()
                .all(|r| r.eigenvalue_error < 1e-12 && r.eigenvector_residual < 1e-12))
        }
        Command::Fig2 { variant, opts } => {
            let out = run_fig2(&opts.resolve()?, variant.into())?;
            out.write_csv(&mut opts.sink()?)?;
            Ok(true)
        }
        Command::Fig3 { variant, opts } => {
            let out = run_fig3(&opts.resolve()?, variant.into())?;
            out.write_csv(&mut opts.sink()?)?;
            Ok(true)
        }
        Command::Fig4 { variant, opts } => {
            let out = run_fig4(&opts.resolve()?, variant.into())?;
            out.write_csv(&mut opts.sink()?)?;
            Ok(true)
        }
        Command::Fig6 { variant, opts } => {
            let out = run_fig6(&opts.resolve()?, variant.into())?;
            out.write_csv(&mut opts.sink()?)?;
            Ok(true)
        }
        Command::TruthTable { resonant, opts } => {
            let regime = if resonant {
                Regime::Resonant
            } else {
                Regime::NonResonant
            };
            let table = run_truth_table(&opts.resolve()?, regime)?;
            table.write_csv(&mut opts.sink()?)?;
            Ok(table.all_pass())
        }
        Command::GateTime {
            n,
            g_mhz,
            omega,
            delta,
        } => {
            let r = gate_time_report(n, omega, delta, g_mhz.unwrap_or(DEFAULT_G_MHZ))?;
            println!("qubits          {}", r.n_qubits);
            println!("omega / g       {}", r.omega);
            println!("g / 2pi [MHz]   {}", r.g_mhz);
            println!("resonant gt     {:.6}", r.resonant_gt);
            println!("resonant ns     {:.3}", r.resonant_ns);
            if let (Some(gt), Some(ns)) = (r.nonresonant_gt, r.nonresonant_ns) {
                println!("dispersive gt   {gt:.6}  (delta / g = {})", r.delta);
                println!("dispersive ns   {ns:.3}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
