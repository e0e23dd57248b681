use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use welander_core::nonsmooth::{bifurcation_diagram, homoclinic_family, verify_homoclinic, AttractorKind, DiagramRow};
use welander_core::nonsmooth::find_pseudoequilibria_with;
use welander_core::smooth::{integrate_smooth, limit_study};
use welander_core::{
    build_nonsmooth, build_smooth, integrate, IntegratorOptions, Params, SmoothingParam, State, Trajectory,
    UnstableSlidePolicy,
};

use crate::args::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(welander_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Unverified(String),
}

impl From<welander_core::Error> for CliError {
    fn from(e: welander_core::Error) -> Self {
        use welander_core::Error as E;
        match e {
            E::Domain(m) | E::Precondition(m) => CliError::Usage(m),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) | CliError::Json(_) => 2,
            CliError::Unverified(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn config_line(command: &str, cfg: &impl Serialize) -> Result<String> {
    Ok(format!("# welander {command} {}", serde_json::to_string(cfg)?))
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn params(m: &ModelArgs) -> Result<Params> {
    Ok(Params::new(m.alpha, m.beta, m.epsilon)?)
}

fn events_path(args: &SimulateArgs) -> Option<PathBuf> {
    args.events.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".events.jsonl");
            PathBuf::from(s)
        })
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let p = params(&args.params)?;
    let smoothing = match (args.model, args.a) {
        (Model::Smooth, None) => return Err(CliError::Usage("--a is required with --model smooth".into())),
        (Model::Smooth, Some(a)) => Some(SmoothingParam::new(a)?),
        (Model::Nonsmooth, _) => None,
    };
    let opts = IntegratorOptions {
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        max_step: args.max_step,
        t_max: args.t_max,
        unstable_slide_policy: match args.policy {
            Policy::EscapeUpper => UnstableSlidePolicy::EscapeUpper,
            Policy::EscapeLower => UnstableSlidePolicy::EscapeLower,
        },
        ..IntegratorOptions::default()
    };
    opts.validate()?;
    let s0 = State::new(args.x0, args.y0);
    let run = match smoothing {
        Some(a) => integrate_smooth(&build_smooth(&p, a), s0, &opts),
        None => integrate(&build_nonsmooth(&p), s0, &opts),
    };
    let mut out = open(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            writeln!(out, "{}", config_line("simulate", args)?)?;
            let traj = match run {
                Ok(t) => t,
                Err(e) => {
                    writeln!(out, "# INCOMPLETE: {e}")?;
                    out.flush()?;
                    return Err(e.into());
                }
            };
            write_trajectory_csv(&mut *out, &traj)?;
            if let Some(path) = events_path(args) {
                let mut ev = BufWriter::new(File::create(path)?);
                for e in &traj.events {
                    serde_json::to_writer(&mut ev, e)?;
                    writeln!(ev)?;
                }
                ev.flush()?;
            }
            Ok(())
        }
        Format::Json => {
            let traj = run?;
            write_json(&mut *out, &json!({ "config": args, "trajectory": traj }))
        }
    }
}

fn write_trajectory_csv(out: &mut dyn Write, traj: &Trajectory) -> Result<()> {
    writeln!(out, "t,x,y,region")?;
    for s in &traj.samples {
        writeln!(out, "{},{},{},{}", s.time, s.state.x, s.state.y, s.region)?;
    }
    out.flush()?;
    Ok(())
}

fn attractor_name(k: AttractorKind) -> &'static str {
    match k {
        AttractorKind::RealEquilibrium => "real_equilibrium",
        AttractorKind::Pseudoequilibrium => "pseudoequilibrium",
        AttractorKind::PeriodicOrbit => "periodic_orbit",
    }
}

/// Equilibria are written as a degenerate orbit: `x_left = x_right = x` and
/// zero amplitude, so the columns plot as one diagram.
fn diagram_columns(r: &DiagramRow) -> Option<(&'static str, f64, f64, f64)> {
    let kind = r.attractor?;
    match kind {
        AttractorKind::PeriodicOrbit => Some((attractor_name(kind), r.x_left?, r.x_right?, r.amplitude?)),
        _ => Some((attractor_name(kind), r.x?, r.x?, 0.0)),
    }
}

pub fn diagram(args: &DiagramArgs) -> Result<()> {
    let (lo, hi) = (args.range[0], args.range[1]);
    if !(lo < hi) {
        return Err(CliError::Usage(format!("range must satisfy LO < HI, got {lo} {hi}")));
    }
    if args.n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {}", args.n)));
    }
    let rows = bifurcation_diagram((lo, hi), args.n)?;
    let mut out = open(args.output.as_deref())?;
    if args.format == Format::Json {
        write_json(&mut *out, &json!({ "config": args, "rows": rows }))?;
        return match rows.iter().find(|r| r.attractor.is_none()) {
            Some(r) => Err(incomplete(r)),
            None => Ok(()),
        };
    }
    writeln!(out, "{}", config_line("diagram", args)?)?;
    writeln!(out, "epsilon,attractor,x_left,x_right,amplitude")?;
    for r in &rows {
        match diagram_columns(r) {
            Some((kind, xl, xr, amp)) => writeln!(out, "{},{kind},{xl},{xr},{amp}", r.epsilon)?,
            None => {
                let err = incomplete(r);
                writeln!(out, "# INCOMPLETE: {err}")?;
                out.flush()?;
                return Err(err);
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn incomplete(r: &DiagramRow) -> CliError {
    CliError::Numeric(welander_core::Error::Domain(format!(
        "no attractor at epsilon = {}: {}",
        r.epsilon,
        r.note.as_deref().unwrap_or("unclassified")
    )))
}

pub fn homoclinic(args: &HomoclinicArgs) -> Result<()> {
    let report = verify_homoclinic(args.delta, args.tol)?;
    let family = if args.slide_times.is_empty() {
        Vec::new()
    } else {
        homoclinic_family(&args.slide_times, args.tol)?
    };
    let mut out = open(args.output.as_deref())?;
    write_json(
        &mut *out,
        &json!({ "config": args, "report": report, "family": family }),
    )?;
    let failed = std::iter::once(&report).chain(&family).filter(|r| !r.verified).count();
    if failed > 0 {
        return Err(CliError::Unverified(format!("{failed} orbit(s) not verified")));
    }
    Ok(())
}

pub fn pseudo(args: &PseudoArgs) -> Result<()> {
    let list = find_pseudoequilibria_with(&params(&args.params)?)?;
    let mut out = open(args.output.as_deref())?;
    write_json(&mut *out, &json!({ "config": args, "pseudoequilibria": list }))
}

pub fn smoothbif(args: &SmoothbifArgs) -> Result<()> {
    let rows = limit_study(&args.a)?;
    let mut out = open(args.output.as_deref())?;
    write_json(&mut *out, &json!({ "config": args, "rows": rows }))
}
