use std::path::PathBuf;

use adversim_core::complex::{self, ComplexError, ExportFormat};
use adversim_core::PairSchedule;
use clap::Args;

use crate::config::{emit_text, Verbosity};
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct ComplexArgs {
    #[arg(long)]
    pub n: usize,
    /// Pair schedule, e.g. `1-2,0-1,0-2` (default round-robin).
    #[arg(long)]
    pub schedule: Option<String>,
    /// Splits to apply (default: one per scheduled pair).
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated initial items (default 0..n).
    #[arg(long)]
    pub inputs: Option<String>,
    /// Complex JSON file; printed to stdout when no output is requested.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Planar drawing, n = 3 only.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Compare against every TP-pairs execution of the same schedule.
    #[arg(long)]
    pub cross_validate: bool,
}

fn complex_error(e: ComplexError) -> CliError {
    match e {
        ComplexError::UnsupportedDimension { .. } => CliError::Unsupported(e.to_string()),
        ComplexError::Engine(_) => CliError::Budget(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

pub fn run(args: ComplexArgs, verbosity: Verbosity) -> CliResult {
    let n = args.n;
    if n == 0 || n > 64 {
        return Err(CliError::Usage("--n must be between 1 and 64".into()));
    }
    if args.svg.is_some() && n != 3 {
        return Err(CliError::Unsupported(format!("svg2d export needs n = 3, got n = {n}")));
    }
    let schedule = match (&args.schedule, n) {
        (Some(s), _) => Some(PairSchedule::parse(n, s)),
        (None, 1) => None,
        (None, _) => Some(PairSchedule::round_robin(n)),
    }
    .transpose()
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let k = args.k.unwrap_or(schedule.as_ref().map_or(0, PairSchedule::len));
    if k > 0 && schedule.is_none() {
        return Err(CliError::Usage("a single processor has no pairs to split".into()));
    }
    let inputs: Vec<u64> = match &args.inputs {
        None => (0..n as u64).collect(),
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(format!("--inputs: {e}")))?,
    };
    if inputs.len() != n {
        return Err(CliError::Usage(format!("--inputs needs {n} items")));
    }

    let c = match &schedule {
        Some(s) => complex::build(n, s, k, &inputs).map_err(complex_error)?,
        None => complex::initial_complex(n, &inputs),
    };
    let chromatic = complex::check_chromatic(&c);
    let sperner = complex::check_sperner(&c);
    let carriers = complex::check_carriers(&c);
    if verbosity > Verbosity::Quiet {
        eprintln!(
            "complex: n={n} k={k}: {} vertices, {} top simplices; chromatic {chromatic}, sperner {sperner}, carriers {carriers}",
            c.vertices.len(),
            c.tops.len()
        );
    }

    let mut wrote = false;
    for (path, format) in [
        (&args.json, ExportFormat::Json),
        (&args.dot, ExportFormat::Dot),
        (&args.svg, ExportFormat::Svg2d),
    ] {
        if let Some(path) = path {
            let mut text = c.export(format).map_err(complex_error)?;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit_text(&text, Some(path))?;
            wrote = true;
        }
    }
    if !wrote {
        emit_text(&format!("{}\n", c.to_json()), None)?;
    }
    if !(chromatic && sperner && carriers) {
        return Err(CliError::Violation("complex fails its structural checks".into()));
    }

    if args.cross_validate {
        let cv = match &schedule {
            Some(s) => complex::cross_validate(&c, s, k, &inputs).map_err(complex_error)?,
            None => complex::CrossValidation::Bijection { executions: 1 },
        };
        if verbosity > Verbosity::Quiet {
            eprintln!("complex: cross-validation {cv:?}");
        }
        if !cv.holds() {
            return Err(CliError::Violation(format!("cross-validation failed: {cv:?}")));
        }
    }
    Ok(())
}
