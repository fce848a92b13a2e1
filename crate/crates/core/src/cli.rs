//! Command-line front end: `run`, `subspaces`, `check` and `verify`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::bifurcation::explore;
use crate::io::{
    branch_csv, default_functional, format_automorphisms, format_lattice, format_subspace, format_subspaces, load_inputs,
    parse_matrix, read_file, render_svg, verify_record, write_file, ForestRecord, IoError, RunConfig,
};
use crate::polydiag::{build_lattice, enumerate_invariant, DEFAULT_N_MAX};
use crate::symmetry::SymmetryGroup;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "netbif", version, about = "Equilibrium bifurcation diagrams of coupled cell networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Explore the bifurcation diagram and write JSON, CSV and SVG outputs.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Enumerate the invariant polydiagonal subspaces of a matrix.
    Subspaces {
        matrix: PathBuf,
        /// Print every subspace and the cover relations, not just orbit representatives.
        #[arg(long)]
        all: bool,
        /// Leave out anti-synchrony subspaces.
        #[arg(long)]
        synchrony_only: bool,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
    },
    /// Validate a configuration and its input files without computing branches.
    Check {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-evaluate the residuals and invariants of a saved forest.json.
    Verify { forest: PathBuf },
}

#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    smin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    smax: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "seed_x")]
    seed_s: Option<f64>,
    /// Comma-separated starting state.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "seed_s")]
    seed_x: Option<Vec<f64>>,
}

impl Overrides {
    fn apply(&self, path: &Path) -> Result<RunConfig, IoError> {
        let mut cfg = RunConfig::load(path)?;
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        cfg.s_min = self.smin.unwrap_or(cfg.s_min);
        cfg.s_max = self.smax.unwrap_or(cfg.s_max);
        if let (Some(s), Some(x)) = (self.seed_s, &self.seed_x) {
            cfg.start_s = Some(s);
            cfg.start_x = Some(x.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Run { config, overrides } => run(&config, &overrides),
        Command::Subspaces { matrix, all, synchrony_only, n_max } => subspaces(&matrix, all, !synchrony_only, n_max),
        Command::Check { config, overrides } => check(&config, &overrides),
        Command::Verify { forest } => verify(&forest),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn functional_of(cfg: &RunConfig, n: usize) -> Result<Vec<f64>, Error> {
    match &cfg.functional {
        Some(c) if c.len() != n => Err(IoError::Config(format!("functional has {} entries, expected {n}", c.len())).into()),
        Some(c) => Ok(c.clone()),
        None => Ok(default_functional(n)),
    }
}

fn run(path: &Path, overrides: &Overrides) -> Result<i32, Error> {
    let clock = Instant::now();
    let cfg = overrides.apply(path)?;
    let inputs = load_inputs(&cfg)?;
    for n in &inputs.notices {
        eprintln!("note: {n}");
    }
    let functional = functional_of(&cfg, inputs.system.n())?;
    let settings = cfg.explore_settings();
    let start = cfg.start();
    let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &settings, start.as_ref())?;
    let record = ForestRecord::new(Some(&cfg), &inputs.system, &inputs.lattice, &inputs.group, &settings, &functional, &forest);

    let out = if cfg.output.is_absolute() { cfg.output.clone() } else { cfg.resolve(&cfg.output) };
    let branches_dir = out.join("branches");
    fs::create_dir_all(&branches_dir).map_err(|source| IoError::File { path: branches_dir.clone(), source })?;
    write_file(&out.join("forest.json"), &record.to_json())?;
    for b in &record.branches {
        write_file(&branches_dir.join(format!("{}.csv", b.id)), &branch_csv(b, &functional))?;
    }
    write_file(&out.join("diagram.svg"), &render_svg(&record, &functional))?;
    write_file(&out.join("subspaces.txt"), &format_subspaces(inputs.lattice.subspaces()))?;
    write_file(&out.join("lattice.txt"), &format_lattice(&inputs.lattice))?;
    write_file(&out.join("automorphisms.txt"), &format_automorphisms(inputs.group.permutations(), inputs.group.has_sign_flip()))?;

    let points: usize = record.branches.iter().map(|b| b.points.len()).sum();
    println!(
        "{} branches, {} points, {} events, {} notes written to {}",
        record.branches.len(),
        points,
        record.events.len(),
        record.notes.len(),
        out.display()
    );
    for e in &record.events {
        println!("  {} s = {:.10} on {} ({}) -> {}", e.id, e.s_star, e.mother, e.mother_branch, e.daughter);
    }
    println!("wall time {:.3} s", clock.elapsed().as_secs_f64());
    Ok(0)
}

fn subspaces(path: &Path, all: bool, include_anti: bool, n_max: usize) -> Result<i32, Error> {
    let m = parse_matrix(&read_file(path)?, &path.display().to_string())?;
    let subs = enumerate_invariant(&m, include_anti, n_max)?;
    let group = SymmetryGroup::from_matrix(&m, include_anti);
    let lattice = build_lattice(subs, &group)?;
    if all {
        print!("{}", format_subspaces(lattice.subspaces()));
        print!("{}", format_lattice(&lattice));
    } else {
        for orbit in lattice.orbits() {
            let rep = lattice.get(orbit[0]);
            if orbit.len() > 1 {
                let others: Vec<&str> = orbit[1..].iter().map(|&k| lattice.get(k).id.as_str()).collect();
                println!("{}  # orbit with {}", format_subspace(rep), others.join(" "));
            } else {
                println!("{}", format_subspace(rep));
            }
        }
    }
    Ok(0)
}

fn check(path: &Path, overrides: &Overrides) -> Result<i32, Error> {
    let cfg = overrides.apply(path)?;
    let inputs = load_inputs(&cfg)?;
    functional_of(&cfg, inputs.system.n())?;
    for n in &inputs.notices {
        eprintln!("note: {n}");
    }
    println!(
        "ok: n = {}, {} subspaces in {} orbits, automorphism group of order {}",
        inputs.system.n(),
        inputs.lattice.len(),
        inputs.lattice.orbits().len(),
        inputs.group.order()
    );
    Ok(0)
}

fn verify(path: &Path) -> Result<i32, Error> {
    let record = ForestRecord::from_json(&read_file(path)?)?;
    let report = verify_record(&record)?;
    println!(
        "{} points, {} events checked; max residual {:.3e}",
        report.points_checked, report.events_checked, report.max_residual
    );
    if report.ok() {
        println!("ok");
        Ok(0)
    } else {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        Ok(2)
    }
}
