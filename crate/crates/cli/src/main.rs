//! `levy-minorant`: simulate Lévy paths, their convex minorants and the
//! stick-breaking representation, and run the Monte Carlo check suite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minorant_core::csv::fmt_f64;
use minorant_core::minorant::Face;
use minorant_core::sticks::{face_law_sample, intensity_mass, ppp_exponential_horizon, write_face_points_csv, Region, Weight};
use minorant_core::transforms::{invariant_transform, recursive_face_discovery};
use minorant_core::verify::{replicate, run_entry, select, summary_table, TestReport};
use minorant_core::{convex_minorant, Error, GridPath, LevyModel, RngStream};
use serde_json::{json, Value};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "levy-minorant", version, about = "Convex minorants of Lévy process paths")]
#[command(after_help = "Every run is reproducible: the same arguments, model file and seed give byte-identical output \
for any --jobs. CSV numbers use 17 significant digits and LF line endings.")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed.
    #[arg(long, global = true, env = "LEVY_MINORANT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct ModelArg {
    /// Model as a JSON file or inline JSON, e.g. '{"family":"brownian","sigma":1,"drift":0}'.
    /// Families: brownian (sigma, drift), cauchy (scale), stable (alpha, beta, scale), gamma.
    #[arg(long, default_value = r#"{"family":"brownian","sigma":1.0,"drift":0.0}"#)]
    model: String,
}

impl ModelArg {
    fn load(&self) -> Result<LevyModel, Error> {
        let text = if self.model.trim_start().starts_with('{') {
            self.model.clone()
        } else {
            std::fs::read_to_string(&self.model).map_err(|e| Error::Domain(format!("reading model file {}: {e}", self.model)))?
        };
        LevyModel::from_json(&text)
    }
}

#[derive(Args, Debug, Clone)]
struct PathArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Grid steps.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Horizon.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Read the path from a `time,value` CSV instead of simulating one.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl PathArgs {
    fn path(&self, seed: u64) -> Result<GridPath, Error> {
        match &self.input {
            Some(p) => {
                let f = File::open(p).map_err(|e| Error::Domain(format!("opening {}: {e}", p.display())))?;
                GridPath::read_csv(io::BufReader::new(f))
            }
            None => {
                if self.n == 0 {
                    return Err(Error::Domain("--n must be at least 1".into()));
                }
                self.model.load()?.path_sample(self.t, self.n, &mut RngStream::new(seed, 0))
            }
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a path on a regular grid.
    #[command(after_help = "CSV: time,value with n+1 rows. JSON: {\"t0\",\"dt\",\"values\"}.")]
    SamplePath(PathArgs),

    /// Convex minorant of a simulated or given path.
    #[command(after_help = "CSV: g,d,length,increment,slope, one row per face in time order. \
JSON: {\"faces\":[{g,d,length,increment,slope}],\"start_value\"}.")]
    Minorant(PathArgs),

    /// Face points from uniform stick-breaking of [0, t].
    #[command(after_help = "CSV: replicate,i,length,increment,slope, sticks in breaking order. \
JSON: [{\"replicate\",\"points\":[{length,increment}]}].")]
    Sticks {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        n_sticks: usize,
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },

    /// Stick-breaking face points over an exponential horizon.
    #[command(after_help = "CSV: replicate,horizon,i,length,increment,slope. \
JSON: [{\"replicate\",\"horizon\",\"points\":[{length,increment}]}].")]
    Ppp {
        #[command(flatten)]
        model: ModelArg,
        /// Rate of the exponential horizon.
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        n_sticks: usize,
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },

    /// Invariant transformation at a time u (uniform when absent).
    #[command(after_help = "CSV: time,value of the transformed path. \
JSON: {\"u\",\"face\":{g,d,length,increment,slope},\"uniform_length\",\"path\":{t0,dt,values}}.")]
    Transform {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long)]
        u: Option<f64>,
    },

    /// Recursive size-biased discovery of k faces by iterated transformation.
    #[command(after_help = "CSV: step,relative_length,g,d,length,increment,slope. \
JSON: {\"steps\":[{relative_length,face}],\"collisions\",\"stopped_early\",\"path\":{t0,dt,values}}.")]
    Discover {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },

    /// Run one named check, every check under a prefix, or `all`.
    #[command(after_help = "Writes one JSON report per line (fields name, statistic, p_value, z_score, threshold, pass, \
negative_control, n_replicates, n_grid, master_seed, notes, components) to --out or standard output, and a summary \
table to standard output (standard error when the reports go to standard output). Exits 1 if any check other than a \
negative control fails. Checks run in catalog order; each uses a seed derived from --seed and its name.")]
    Verify {
        /// Check name, family prefix such as `face_law`, or `all`.
        check: String,
        /// Override the default replicate count of every selected check.
        #[arg(long)]
        reps: Option<u64>,
        /// List the matching checks instead of running them.
        #[arg(long)]
        list: bool,
    },

    /// Intensity mass of a (length, increment) rectangle.
    #[command(after_help = "Prints one number: the integral over t in [t1, t2] of w(t) P(X_t in [x1, x2]) dt/t, with \
w(t) = exp(-theta t) under --theta, 1{x < slope t} under --slope, and 1 otherwise.")]
    Intensity {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, required = true, num_args = 2, value_names = ["T1", "T2"], allow_negative_numbers = true)]
        t: Vec<f64>,
        #[arg(long, required = true, num_args = 2, value_names = ["X1", "X2"], allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, conflicts_with = "slope")]
        theta: Option<f64>,
        #[arg(long)]
        slope: Option<f64>,
    },
}

fn path_json(p: &GridPath) -> Value {
    json!({ "t0": p.t0(), "dt": p.dt(), "values": p.values() })
}

fn write_path(w: &mut dyn Write, p: &GridPath, format: Format) -> Result<(), Error> {
    match format {
        Format::Csv => p.write_csv(w),
        Format::Json => write_json(w, &path_json(p)),
    }
}

fn write_json(w: &mut dyn Write, v: &Value) -> Result<(), Error> {
    serde_json::to_writer(&mut *w, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn face_row(f: &Face) -> String {
    [f.g, f.d, f.length, f.increment, f.slope].map(fmt_f64).join(",")
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("creating {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    if let Command::Verify { check, reps, list } = &cli.command {
        return verify(g, check, *reps, *list);
    }
    let mut w = output(&g.out)?;
    match &cli.command {
        Command::SamplePath(args) => write_path(&mut w, &args.path(g.seed)?, g.format)?,
        Command::Minorant(args) => {
            let dec = convex_minorant(&args.path(g.seed)?);
            match g.format {
                Format::Csv => dec.write_csv(&mut w)?,
                Format::Json => write_json(
                    &mut w,
                    &json!({ "faces": dec.faces(), "start_value": dec.vertex_values().first() }),
                )?,
            }
        }
        Command::Sticks { model, t, n_sticks, reps } => {
            let model = model.load()?;
            let sets = replicate(g.seed, *reps, |rng| face_law_sample(&model, *t, *n_sticks, rng))?;
            match g.format {
                Format::Csv => write_face_points_csv(&mut w, sets.iter().enumerate().map(|(r, p)| (r as u64, p.as_slice())))?,
                Format::Json => {
                    let v: Vec<Value> = sets
                        .iter()
                        .enumerate()
                        .map(|(r, p)| json!({ "replicate": r, "points": p }))
                        .collect();
                    write_json(&mut w, &Value::Array(v))?
                }
            }
        }
        Command::Ppp { model, theta, n_sticks, reps } => {
            let model = model.load()?;
            let sets = replicate(g.seed, *reps, |rng| ppp_exponential_horizon(&model, *theta, *n_sticks, rng))?;
            match g.format {
                Format::Csv => {
                    writeln!(w, "replicate,horizon,i,length,increment,slope")?;
                    for (r, (horizon, points)) in sets.iter().enumerate() {
                        for (i, p) in points.iter().enumerate() {
                            writeln!(
                                w,
                                "{r},{},{},{},{},{}",
                                fmt_f64(*horizon),
                                i + 1,
                                fmt_f64(p.length),
                                fmt_f64(p.increment),
                                fmt_f64(p.slope())
                            )?;
                        }
                    }
                }
                Format::Json => {
                    let v: Vec<Value> = sets
                        .iter()
                        .enumerate()
                        .map(|(r, (h, p))| json!({ "replicate": r, "horizon": h, "points": p }))
                        .collect();
                    write_json(&mut w, &Value::Array(v))?
                }
            }
        }
        Command::Transform { path, u } => {
            let p = path.path(g.seed)?;
            let u = match u {
                Some(u) => *u,
                None => p.t0() + RngStream::new(g.seed, 1).open01() * p.duration(),
            };
            let res = invariant_transform(&p, u)?;
            match g.format {
                Format::Csv => res.transformed.write_csv(&mut w)?,
                Format::Json => write_json(
                    &mut w,
                    &json!({
                        "u": u,
                        "face": res.face,
                        "uniform_length": res.uniform_length,
                        "path": path_json(&res.transformed),
                    }),
                )?,
            }
        }
        Command::Discover { path, k } => {
            let p = path.path(g.seed)?;
            let d = recursive_face_discovery(&p, *k, &mut RngStream::new(g.seed, 1))?;
            match g.format {
                Format::Csv => {
                    writeln!(w, "step,relative_length,g,d,length,increment,slope")?;
                    for (i, s) in d.steps.iter().enumerate() {
                        writeln!(w, "{},{},{}", i + 1, fmt_f64(s.relative_length), face_row(&s.face))?;
                    }
                }
                Format::Json => {
                    let steps: Vec<Value> = d
                        .steps
                        .iter()
                        .map(|s| json!({ "relative_length": s.relative_length, "face": s.face }))
                        .collect();
                    write_json(
                        &mut w,
                        &json!({
                            "steps": steps,
                            "collisions": d.collisions,
                            "stopped_early": d.stopped_early,
                            "path": path_json(&d.transformed),
                        }),
                    )?
                }
            }
        }
        Command::Intensity { model, t, x, theta, slope } => {
            let model = model.load()?;
            let (t, x) = match (t.as_slice(), x.as_slice()) {
                ([t1, t2], [x1, x2]) => ((*t1, *t2), (*x1, *x2)),
                _ => return Err(Error::Domain("--t and --x each take two numbers".into())),
            };
            let weight = match (theta, slope) {
                (Some(theta), _) => Weight::ExpDecay { theta: *theta },
                (_, Some(slope)) => Weight::Indicator { slope: *slope },
                _ => Weight::Unit,
            };
            let mass = intensity_mass(&model, &Region { t1: t.0, t2: t.1, x1: x.0, x2: x.1 }, weight)?;
            match g.format {
                Format::Csv => writeln!(w, "{}", fmt_f64(mass))?,
                Format::Json => write_json(&mut w, &json!({ "mass": mass }))?,
            }
        }
        Command::Verify { .. } => unreachable!(),
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn verify(g: &Global, check: &str, reps: Option<u64>, list: bool) -> Result<ExitCode, Error> {
    let entries = select(check)?;
    if list {
        let mut out = io::stdout().lock();
        for e in &entries {
            let tag = if e.negative_control { "  (negative control)" } else { "" };
            writeln!(out, "{:<52} reps={}{tag}", e.name, e.default_reps)?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let mut w = output(&g.out)?;
    let mut reports: Vec<TestReport> = Vec::with_capacity(entries.len());
    for e in &entries {
        let r = run_entry(e, g.seed, reps)?;
        writeln!(w, "{}", r.to_json_line())?;
        w.flush()?;
        reports.push(r);
    }
    let table = summary_table(&reports);
    if g.out.is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    let failed = reports.iter().filter(|r| !r.negative_control && !r.pass).count();
    let surprising = reports.iter().filter(|r| r.negative_control && r.pass).count();
    if surprising > 0 {
        eprintln!("warning: {surprising} negative control(s) did not fail");
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
