use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lindstedt_core::diagnostics::{
    discrepancy, embedding_norms, fit_gevrey, gamma_n, gevrey_bound, log_space, residual_scan, theta_grid,
};
use lindstedt_core::{direct_expansion, hull_to_embedding, run_doubling, Embedding, MapSpec, Real, ScalarSeries};

use crate::coefficients::CoefficientFile;
use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "lindstedt", version, about = "Lindstedt series for the dissipative standard map")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "N0")]
    pub n0: Option<usize>,
    #[arg(long = "h")]
    pub h: Option<usize>,
    #[arg(long)]
    pub alpha: Option<usize>,
    /// `golden` or a literal rotation number.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub rho: Option<Real>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            n: self.n,
            n0: self.n0,
            h: self.h,
            alpha: self.alpha,
            omega: self.omega.clone(),
            rho: self.rho,
        })?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Direct order-by-order expansion through order N.
    Expand(RunArgs),
    /// Seed at N0 and double h times.
    Newton {
        #[command(flatten)]
        run: RunArgs,
        /// Schedule report path. Without it the report goes to stdout,
        /// unless the coefficients already do.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Per-order relative discrepancy between two coefficient files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gevrey fit of the coefficient norms.
    Fit {
        #[command(flatten)]
        run: RunArgs,
        /// Analyse this coefficient file instead of expanding.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Invariance residual against ε through the map itself.
    Residual {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

pub fn expand(cfg: &RunConfig) -> Result<CoefficientFile, CliError> {
    let map = cfg.map()?;
    let h = direct_expansion(&map, cfg.n)?;
    let k = hull_to_embedding(&h, &map);
    Ok(CoefficientFile::new(&map, cfg.omega.provenance(), &k, &h.mu))
}

/// Coefficient file and the schedule report.
pub fn newton(cfg: &RunConfig) -> Result<(CoefficientFile, String), CliError> {
    let map = cfg.map()?;
    let run = run_doubling(&map, cfg.n0, cfg.h, cfg.rho)?;
    let file = CoefficientFile::new(&map, cfg.omega.provenance(), &run.state.k, &run.state.mu);
    let tau = map.freq().tau();
    let mut out = String::new();
    writeln!(out, "# N0 = {}, h = {}, rho0 = {:e}", cfg.n0, cfg.h, cfg.rho).unwrap();
    writeln!(
        out,
        "# expected gamma ratio 2^(-tau/alpha) = {:e}",
        (2.0 as Real).powf(-tau / map.alpha() as Real)
    )
    .unwrap();
    writeln!(
        out,
        "h,N_from,N_to,rho,gamma,gamma_ratio,input_lead,output_lead,required_lead,reducibility_lead,audit,block_condition,error_norm,delta_norm,sigma_norm"
    )
    .unwrap();
    let mut prev_gamma: Option<Real> = None;
    for s in &run.steps {
        let ratio = prev_gamma.map(|g| decimal(s.gamma / g)).unwrap_or_default();
        prev_gamma = Some(s.gamma);
        writeln!(
            out,
            "{},{},{},{:e},{:e},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            s.h,
            s.n_from,
            s.n_to,
            s.rho,
            s.gamma,
            ratio,
            lead(s.input_lead),
            lead(s.output_lead),
            2 * s.n_from + 1,
            lead(s.reducibility_lead),
            s.audit,
            s.block_condition,
            s.error_norm,
            s.delta_norm,
            s.sigma_norm
        )
        .unwrap();
    }
    Ok((file, out))
}

fn lead(l: Option<usize>) -> String {
    l.map_or_else(|| "none".into(), |v| v.to_string())
}

fn decimal(x: Real) -> String {
    format!("{x:e}")
}

pub fn compare(a: &CoefficientFile, b: &CoefficientFile) -> Result<(Vec<Real>, String), CliError> {
    a.same_problem(b)?;
    let (ka, ma) = a.solution()?;
    let (kb, mb) = b.solution()?;
    let d = discrepancy((&ka, &ma), (&kb, &mb));
    let mut out = String::new();
    writeln!(out, "# max relative discrepancy = {:e}", d.iter().cloned().fold(0.0, Real::max)).unwrap();
    writeln!(out, "n,discrepancy").unwrap();
    for (n, v) in d.iter().enumerate() {
        writeln!(out, "{n},{v:e}").unwrap();
    }
    Ok((d, out))
}

/// The solution analysed by `fit` and `residual`: a coefficient file when
/// given, otherwise a direct expansion from the config.
fn subject(cfg: &RunConfig, file: Option<&Path>) -> Result<(MapSpec, Embedding, ScalarSeries), CliError> {
    match file {
        Some(p) => {
            let f = CoefficientFile::read(p)?;
            let (k, mu) = f.solution()?;
            Ok((f.map()?, k, mu))
        }
        None => {
            let map = cfg.map()?;
            let h = direct_expansion(&map, cfg.n)?;
            let k = hull_to_embedding(&h, &map);
            Ok((map, k, h.mu))
        }
    }
}

pub fn fit(cfg: &RunConfig, file: Option<&Path>) -> Result<String, CliError> {
    let (map, k, _) = subject(cfg, file)?;
    let order = k.order();
    let n_min = cfg.fit.n_min.unwrap_or(order / 4);
    let n_max = cfg.fit.n_max.unwrap_or(order);
    if n_max > order || n_max < n_min + 8 {
        return Err(CliError::Validation(format!(
            "fit window [{n_min}, {n_max}] must lie in [0, {order}] and span at least 8 orders"
        )));
    }
    let norms = embedding_norms(&k, cfg.rho);
    let f = fit_gevrey(&norms, n_min, n_max, gevrey_bound(&map))?;
    let mut out = String::new();
    writeln!(out, "# sigma = {:e}", f.sigma).unwrap();
    writeln!(out, "# bound 2tau/alpha = {:e}", f.bound).unwrap();
    writeln!(
        out,
        "# log_R = {:e}, log_C = {:e}, window = [{}, {}], rms residual = {:e}, rho = {:e}",
        f.log_r, f.log_c, f.n_min, f.n_max, f.residual, cfg.rho
    )
    .unwrap();
    writeln!(out, "n,norm,log_norm,model_log_norm,in_window").unwrap();
    for &(n, v) in norms.iter().skip(1) {
        let x = n as Real;
        let model = f.log_c + x * f.log_r + f.sigma * x * x.ln();
        writeln!(
            out,
            "{n},{v:e},{:e},{model:e},{}",
            v.ln(),
            (n_min..=n_max).contains(&n) as u8
        )
        .unwrap();
    }
    Ok(out)
}

pub fn residual(cfg: &RunConfig, file: Option<&Path>) -> Result<String, CliError> {
    let (map, k, mu) = subject(cfg, file)?;
    let r = &cfg.residual;
    if !(r.eps_min > 0.0 && r.eps_min <= r.eps_max) || r.eps_count < 2 || r.theta_count == 0 {
        return Err(CliError::Validation(format!(
            "need 0 < eps_min ≤ eps_max, eps_count ≥ 2, theta_count ≥ 1 (got {:e}, {:e}, {}, {})",
            r.eps_min, r.eps_max, r.eps_count, r.theta_count
        )));
    }
    let order = k.order().min(mu.order());
    let gamma = gamma_n(&map, order.max(1));
    if r.eps_max > gamma {
        return Err(CliError::Validation(format!(
            "eps_max = {:e} exceeds the domain radius {gamma:e} for N = {order}",
            r.eps_max
        )));
    }
    let scan = residual_scan(
        &map,
        &k,
        &mu,
        &log_space(r.eps_min, r.eps_max, r.eps_count),
        &theta_grid(r.theta_count),
    );
    let opt = |v: Option<Real>| v.map(decimal).unwrap_or_else(|| "none".into());
    let mut out = String::new();
    writeln!(out, "# N = {order}, expected slope = {}", order + 1).unwrap();
    writeln!(out, "# slope = {}, offset = {}", opt(scan.slope), opt(scan.offset)).unwrap();
    writeln!(out, "eps,residual,floor,fitted").unwrap();
    for s in &scan.samples {
        writeln!(out, "{:e},{:e},{:e},{}", s.eps, s.residual, s.floor, s.fitted as u8).unwrap();
    }
    Ok(out)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Expand(run) => {
            let cfg = run.resolve()?;
            let file = expand(&cfg)?;
            emit(run.out.as_deref().or(cfg.output.coefficients.as_deref()), &file.to_json())
        }
        Command::Newton { run, report } => {
            let cfg = run.resolve()?;
            let (file, table) = newton(&cfg)?;
            let out = run.out.as_deref().or(cfg.output.coefficients.as_deref());
            emit(out, &file.to_json())?;
            match report.as_deref().or(cfg.output.report.as_deref()) {
                Some(p) => emit(Some(p), &table),
                None if out.is_some() => emit(None, &table),
                None => Ok(()),
            }
        }
        Command::Compare { a, b, out } => {
            let (_, table) = compare(&CoefficientFile::read(&a)?, &CoefficientFile::read(&b)?)?;
            emit(out.as_deref(), &table)
        }
        Command::Fit { run, file, n_min, n_max } => {
            let mut cfg = run.resolve()?;
            cfg.fit.n_min = n_min.or(cfg.fit.n_min);
            cfg.fit.n_max = n_max.or(cfg.fit.n_max);
            let table = fit(&cfg, file.as_deref())?;
            emit(run.out.as_deref().or(cfg.output.table.as_deref()), &table)
        }
        Command::Residual { run, file } => {
            let cfg = run.resolve()?;
            let table = residual(&cfg, file.as_deref())?;
            emit(run.out.as_deref().or(cfg.output.table.as_deref()), &table)
        }
    }
}
