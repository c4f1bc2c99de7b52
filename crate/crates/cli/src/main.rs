use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ap3t::error::{Error, Result};
use ap3t::integrator::TimeScheme;
use ap3t::output::{write_compare, write_convergence, write_energy_audit, write_profile, write_series};
use ap3t::runner::{initial_energy, run};
use ap3t::scenarios::{builtin, ScenarioConfig, SolverKind};
use ap3t::spatial::ReconstructionMode;
use ap3t::studies::{convergence_study, profile_differences};

#[derive(Parser)]
#[command(
    name = "ap3t",
    version,
    about = "Slab three-temperature radiative transfer benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write profiles and a time series.
    Run(Common),
    /// Resolution sweep against a fine self-reference.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
        resolutions: Vec<usize>,
        #[arg(long, default_value_t = 1600)]
        reference: usize,
    },
    /// Run the scenario with two solvers and write L2 differences per output time.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Second solver.
        #[arg(long)]
        against: String,
        /// Cell count of the second run (defaults to --n).
        #[arg(long)]
        against_n: Option<usize>,
    },
    /// Track the total energy over a fixed number of steps.
    EnergyAudit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Builtin scenario name.
    name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    builtin: Option<String>,
    /// TOML scenario file.
    #[arg(long, conflicts_with_all = ["name", "builtin"])]
    config: Option<PathBuf>,
    /// Knudsen number; a list sweeps in `convergence`.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Constant electron-ion coupling; a list sweeps in `convergence`.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m_order: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    reconstruction: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Discrete-ordinates directions.
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Significant digits in the CSV output.
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, env = "AP3T_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn base(&self) -> Result<ScenarioConfig> {
        match (&self.config, self.name.as_ref().or(self.builtin.as_ref())) {
            (Some(path), _) => {
                let text =
                    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                ScenarioConfig::from_toml(&text).map_err(|e| match e {
                    Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                    e => e,
                })
            }
            (None, Some(name)) => builtin(name),
            (None, None) => Err(Error::Config("give a builtin name or --config".into())),
        }
    }

    /// Scenario with every override applied except the epsilon/kappa lists.
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = self.base()?;
        if let Some(n) = self.n {
            cfg.grid.n = n;
        }
        if let Some(m) = self.m_order {
            cfg.moments = m;
        }
        if let Some(c) = self.cfl {
            cfg.time.cfl = c;
            cfg.time.dt = None;
        }
        if let Some(dt) = self.dt {
            cfg.time.dt = Some(dt);
        }
        if let Some(t) = self.t_end {
            cfg.time.t_end = t;
            cfg.time.snapshots.retain(|&s| s <= t);
        }
        if let Some(s) = &self.snapshots {
            cfg.time.snapshots.clone_from(s);
        }
        if let Some(s) = &self.solver {
            cfg.solver = s.parse()?;
        }
        if let Some(r) = &self.reconstruction {
            cfg.reconstruction = r.parse::<ReconstructionMode>()?;
        }
        if let Some(s) = &self.scheme {
            cfg.scheme = s.parse::<TimeScheme>()?;
        }
        if let Some(d) = self.directions {
            cfg.directions = d;
        }
        if let Some(t) = self.tol {
            cfg.iteration.tol = t;
        }
        if let Some(p) = self.precision {
            cfg.output.precision = p;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = Some(d.display().to_string());
        }
        Ok(cfg)
    }

    /// One scenario per (epsilon, kappa) pair, with a file-name suffix.
    fn sweep(&self) -> Result<Vec<(String, ScenarioConfig)>> {
        let base = self.scenario()?;
        let eps: Vec<Option<f64>> = if self.epsilon.is_empty() {
            vec![None]
        } else {
            self.epsilon.iter().map(|&e| Some(e)).collect()
        };
        let kap: Vec<Option<f64>> = if self.kappa.is_empty() {
            vec![None]
        } else {
            self.kappa.iter().map(|&k| Some(k)).collect()
        };
        let mut out = Vec::new();
        for e in &eps {
            for k in &kap {
                let mut cfg = base.clone();
                let mut tag = String::new();
                if let Some(e) = e {
                    cfg.physics.epsilon = *e;
                    tag.push_str(&format!("_eps{e}"));
                }
                if let Some(k) = k {
                    cfg.set_kappa(*k);
                    tag.push_str(&format!("_kappa{k}"));
                }
                cfg.validate()?;
                out.push((tag, cfg));
            }
        }
        Ok(out)
    }

    fn single(&self) -> Result<ScenarioConfig> {
        if self.epsilon.len() > 1 || self.kappa.len() > 1 {
            return Err(Error::Config(
                "epsilon and kappa lists are only accepted by convergence".into(),
            ));
        }
        Ok(self.sweep()?.remove(0).1)
    }
}

fn out_dir(cfg: &ScenarioConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.output.dir.as_deref().unwrap_or("output"));
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    std::io::Write::flush(&mut w)?;
    println!("{}", path.display());
    Ok(())
}

fn command_run(common: &Common) -> Result<()> {
    let cfg = common.single()?;
    let dir = out_dir(&cfg)?;
    let out = run(&cfg, |_| {})?;
    let digits = cfg.output.precision;
    let stem = format!("{}_{}", cfg.name, out.solver.name());
    for p in &out.profiles {
        let path = dir.join(format!("{stem}_t{}.csv", p.t));
        write_file(&path, |w| write_profile(w, p, digits, cfg.output.moments))?;
    }
    write_file(&dir.join(format!("{stem}_series.csv")), |w| {
        write_series(w, &out.reports, digits)
    })
}

fn command_convergence(common: &Common, resolutions: &[usize], reference: usize) -> Result<()> {
    for (tag, cfg) in common.sweep()? {
        let dir = out_dir(&cfg)?;
        let table = convergence_study(&cfg, resolutions, reference)?;
        let path = dir.join(format!("{}_convergence{tag}.csv", cfg.name));
        write_file(&path, |w| write_convergence(w, &table, cfg.output.precision))?;
    }
    Ok(())
}

fn command_compare(common: &Common, against: &str, against_n: Option<usize>) -> Result<()> {
    let a = common.single()?;
    let mut b = a.clone();
    b.solver = against.parse::<SolverKind>()?;
    if let Some(n) = against_n {
        b.grid.n = n;
    }
    b.validate()?;
    let (fine, coarse) = if a.grid.n >= b.grid.n {
        (a.grid.n, b.grid.n)
    } else {
        (b.grid.n, a.grid.n)
    };
    if fine % coarse != 0 {
        return Err(Error::Config(format!(
            "cell counts {coarse} and {fine} are not nested"
        )));
    }
    let dir = out_dir(&a)?;
    let (ra, rb) = std::thread::scope(|s| {
        let hb = s.spawn(|| run(&b, |_| {}));
        let ra = run(&a, |_| {});
        let rb = hb
            .join()
            .unwrap_or_else(|_| Err(Error::Internal("worker panicked".into())));
        (ra, rb)
    });
    let diffs = profile_differences(&ra?, &rb?, a.grid.x_max - a.grid.x_min)?;
    let path = dir.join(format!(
        "{}_compare_{}_{}.csv",
        a.name,
        a.solver.name(),
        b.solver.name()
    ));
    write_file(&path, |w| write_compare(w, &diffs, a.output.precision))
}

fn command_energy_audit(common: &Common, steps: usize) -> Result<()> {
    let mut cfg = common.single()?;
    cfg.time.t_end = cfg.dt() * steps as f64;
    cfg.time.snapshots.clear();
    let dir = out_dir(&cfg)?;
    let e0 = initial_energy(&cfg)?;
    let out = run(&cfg, |_| {})?;
    let path = dir.join(format!("{}_{}_energy.csv", cfg.name, out.solver.name()));
    write_file(&path, |w| {
        write_energy_audit(w, e0, &out.reports, cfg.output.precision)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => command_run(c),
        Command::Convergence {
            common,
            resolutions,
            reference,
        } => command_convergence(common, resolutions, *reference),
        Command::Compare {
            common,
            against,
            against_n,
        } => command_compare(common, against, *against_n),
        Command::EnergyAudit { common, steps } => command_energy_audit(common, *steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(cell) = e.cell() {
                eprintln!("  cell: {cell}");
            }
            ExitCode::FAILURE
        }
    }
}
