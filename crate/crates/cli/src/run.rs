use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use repnum::assembly::dump_matrices;
use repnum::benchmarks::sweep::discretize;
use repnum::benchmarks::{builtin, convergence_sweep, hbv_model, parameter_scan_r0, Builtin, SweepOptions};
use repnum::config::load_config;
use repnum::spectral::eigenfunction;
use repnum::{reproduction_number, DiscreteOperators, Error, Execution, Model, SplittingSpec};

use crate::args::{CommandKind, ModelSource, RunRequest};

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Lib(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Lib(Error::Io(e))
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Lib(e) => match e {
                Error::Io(_) | Error::MatrixFormat(_) => 4,
                e if e.is_numerical() => 3,
                Error::OutOfRange { .. } => 3,
                _ => 2,
            },
        }
    }

    /// `error: code=... module=... message=...` on one line.
    pub fn line(&self) -> String {
        let (code, module, message) = match self {
            RunError::Usage(m) => ("USAGE", "cli", m.clone()),
            RunError::Lib(e) => (e.code(), e.module(), e.to_string()),
        };
        let message = message.replace(['\n', '\r'], " ");
        format!("error: code={code} module={module} message={message}")
    }
}

/// Positional notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x:.16}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=16).contains(&exp) {
        return format!("{x:.16e}");
    }
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

struct Loaded {
    model: Model,
    splitting: SplittingSpec,
    reference: Option<(f64, String)>,
}

fn load(req: &RunRequest) -> Result<Loaded, RunError> {
    match &req.source {
        ModelSource::Builtin(which, params) => {
            let splitting = req.splitting.clone().unwrap_or(SplittingSpec::R0);
            let b = builtin(*which, params, &splitting)?;
            Ok(Loaded {
                model: b.model,
                splitting,
                reference: b.reference,
            })
        }
        ModelSource::Config(path) => {
            let cfg = load_config(path)?;
            Ok(Loaded {
                model: cfg.model,
                splitting: req.splitting.clone().unwrap_or(cfg.splitting),
                reference: None,
            })
        }
    }
}

fn operators(req: &RunRequest, loaded: &Loaded, n: usize, exec: Execution) -> Result<DiscreteOperators, RunError> {
    let coeffs = repnum::model::split(&loaded.model, &loaded.splitting)?;
    Ok(discretize(&coeffs, req.family, n, req.pieces, exec)?)
}

fn write_out(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes `main` to the output file or stdout, and `side` to stdout or stderr respectively.
fn emit(req: &RunRequest, main: &str, side: &str) -> Result<(), RunError> {
    match &req.output {
        Some(path) => {
            write_out(path, main)?;
            print!("{side}");
        }
        None => {
            print!("{main}");
            eprint!("{side}");
        }
    }
    std::io::stdout().flush()?;
    Ok(())
}

pub fn run(req: &RunRequest, exec: Execution) -> Result<(), RunError> {
    let loaded = load(req)?;
    log::info!(
        "{} with splitting {}, family {}, ordering {}",
        match req.command {
            CommandKind::Compute => "compute",
            CommandKind::Sweep => "sweep",
            CommandKind::Scan => "scan",
            CommandKind::Eigenfunction => "eigenfunction",
            CommandKind::DumpMatrices => "dump-matrices",
        },
        loaded.splitting.label(),
        req.family.label(),
        req.ordering.label()
    );
    match req.command {
        CommandKind::Compute => compute(req, &loaded, exec),
        CommandKind::Sweep => sweep(req, &loaded, exec),
        CommandKind::Scan => scan(req, &loaded, exec),
        CommandKind::Eigenfunction => eigen(req, &loaded, exec),
        CommandKind::DumpMatrices => dump(req, &loaded, exec),
    }
}

fn compute(req: &RunRequest, loaded: &Loaded, exec: Execution) -> Result<(), RunError> {
    let mut text = String::new();
    for &n in &req.ns {
        let ops = operators(req, loaded, n, exec)?;
        let r = reproduction_number(&ops, req.ordering)?;
        writeln!(text, "N = {n}").unwrap();
        writeln!(text, "splitting = {}", loaded.splitting.label()).unwrap();
        writeln!(text, "R_N = {}", fmt17(r.r_n)).unwrap();
        writeln!(text, "residual = {:.16e}", r.residual).unwrap();
        writeln!(text, "cond_M = {:.16e}", r.cond_m).unwrap();
        if let Some((value, source)) = &loaded.reference {
            writeln!(text, "reference = {} ({source})", fmt17(*value)).unwrap();
            writeln!(text, "abs_err = {:.16e}", (r.r_n - value).abs()).unwrap();
        }
    }
    if let Some(path) = &req.output {
        write_out(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn sweep(req: &RunRequest, loaded: &Loaded, exec: Execution) -> Result<(), RunError> {
    let (reference, source) = match (req.reference, &loaded.reference) {
        (Some(v), _) => (v, "user".to_string()),
        (None, Some((v, s))) => (*v, s.clone()),
        (None, None) => {
            let n_ref = 2 * req.ns.iter().max().copied().unwrap_or(1);
            let ops = operators(req, loaded, n_ref, exec)?;
            let r = reproduction_number(&ops, req.ordering)?;
            (r.r_n, format!("computed at N = {n_ref}"))
        }
    };
    let opts = SweepOptions {
        family: req.family,
        ordering: req.ordering,
        pieces: req.pieces,
        window: req.window,
        exec,
    };
    let report = convergence_sweep(&loaded.model, &loaded.splitting, &req.ns, reference, &source, &opts)?;
    emit(req, &report.to_csv(req.timing), &report.summary())
}

fn scan(req: &RunRequest, loaded: &Loaded, exec: Execution) -> Result<(), RunError> {
    let ModelSource::Builtin(Builtin::Hbv, _) = &req.source else {
        return Err(RunError::Usage("scan needs --builtin hbv".into()));
    };
    let opts = SweepOptions {
        family: req.family,
        ordering: req.ordering,
        pieces: req.pieces,
        window: None,
        exec,
    };
    let result = parameter_scan_r0(hbv_model, &req.nu_grid, &req.theta_grid, &loaded.splitting, req.ns[0], &opts);
    let failed = result.values.iter().flatten().filter(|v| v.is_none()).count();
    let side = format!(
        "scanned {} x {} grid at N = {}, {failed} failed cells\n",
        result.nu.len(),
        result.theta.len(),
        req.ns[0]
    );
    emit(req, &result.to_csv(), &side)
}

fn eigen(req: &RunRequest, loaded: &Loaded, exec: Execution) -> Result<(), RunError> {
    let ops = operators(req, loaded, req.ns[0], exec)?;
    let r = reproduction_number(&ops, req.ordering)?;
    let ef = eigenfunction(&r, &ops)?;
    emit(req, &ef.to_csv(req.points)?, &format!("R_N = {}\n", fmt17(r.r_n)))
}

fn dump(req: &RunRequest, loaded: &Loaded, exec: Execution) -> Result<(), RunError> {
    let dir = req.output.as_deref().expect("checked by parse_args");
    let ops = operators(req, loaded, req.ns[0], exec)?;
    std::fs::create_dir_all(dir)?;
    dump_matrices(&ops, dir)?;
    let r = reproduction_number(&ops, req.ordering)?;
    println!("wrote B.csv, M.csv, nodes.csv to {}", dir.display());
    println!("R_N = {}", fmt17(r.r_n));
    Ok(())
}
