//! Task execution: one validated config in, report files out.

use std::path::{Path, PathBuf};

use logicint::matrix::{c64, frobenius_distance, unitary_defect};
use logicint::montecarlo::mc_estimate_traced;
use logicint::span::{all_permutations, least_squares_decompose};
use logicint::{
    build_hamiltonian, hermitian_evolve, perm_span_membership, series_expand, transfer_matrix,
    unit_modulus_search, unitarity_defect, IsingCouplings,
};

use crate::config::{self, ConfigError, RunConfig, TaskKind};
use crate::report::{
    gate_sum_json, matrix_json, render_json, Report, Results, ToolInfo, REPORT_FILE, TRACE_FILE,
};

pub enum RunError {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<logicint::Error> for RunError {
    fn from(e: logicint::Error) -> Self {
        RunError::Config(ConfigError::Semantic(e))
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

pub struct RunOutcome {
    pub report_path: PathBuf,
    pub trace_path: Option<PathBuf>,
}

/// Validate without executing: parse plus every semantic check the tasks
/// would perform before doing real work.
pub fn validate(path: &Path) -> Result<RunConfig, ConfigError> {
    let cfg = config::load(path)?;
    let sys = config::build_system(&cfg)?;
    let t = &cfg.task;
    match t.kind {
        TaskKind::Exact => {
            config::require(t.beta, "beta", t.kind)?;
            sys.hilbert_dim()?;
        }
        TaskKind::Series => {
            config::require(t.beta, "beta", t.kind)?;
            sys.hilbert_dim()?;
        }
        TaskKind::Mc => {
            config::require(t.beta, "beta", t.kind)?;
            config::require(t.samples, "samples", t.kind)?;
            sys.hilbert_dim()?;
        }
        TaskKind::SpanTest | TaskKind::UnitModulus => {
            config::require(t.gamma, "gamma", t.kind)?;
            config::beta1_from_sign(t)?;
            IsingCouplings::new(cfg.system.sites, c64(0.0, 0.0), c64(0.0, 0.0))?;
        }
        TaskKind::IsingUnitarity => {
            config::require(t.gamma, "gamma", t.kind)?;
            IsingCouplings::new(cfg.system.sites, c64(0.0, 0.0), c64(0.0, 0.0))?;
        }
        TaskKind::IsingPartition => {
            config::require(t.tau, "tau", t.kind)?;
            config::require(t.coupling_time, "coupling_time", t.kind)?;
            config::require(t.coupling_space, "coupling_space", t.kind)?;
            config::beta1_from_sign(t)?;
            IsingCouplings::new(cfg.system.sites, c64(0.0, 0.0), c64(0.0, 0.0))?;
        }
    }
    Ok(cfg)
}

/// Logarithmic checkpoint schedule for convergence traces.
fn trace_checkpoints(samples: usize) -> Vec<usize> {
    let mut marks: Vec<usize> = [
        0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0,
    ]
    .iter()
    .map(|f| ((samples as f64 * f) as usize).max(2))
    .collect();
    marks.dedup();
    marks
}

pub fn run(
    path: &Path,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<RunOutcome, RunError> {
    let cfg = validate(path)?;
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", out_dir.display())))?;

    let seed = seed_override.or(cfg.task.seed);
    let mut trace_path = None;
    let task = cfg.task.clone();
    let results = match task.kind {
        TaskKind::Exact => {
            let sys = config::build_system(&cfg)?;
            let beta = config::require(task.beta, "beta", task.kind)?;
            let u = hermitian_evolve(&build_hamiltonian(&sys)?, beta)?;
            Results::Exact {
                beta,
                unitarity_defect: unitary_defect(&u),
                unitary: matrix_json(&u),
            }
        }
        TaskKind::Series => {
            let sys = config::build_system(&cfg)?;
            let beta = config::require(task.beta, "beta", task.kind)?;
            let order = task.order.unwrap_or(12);
            let series = series_expand(&sys, beta, order)?;
            let rendered = series.sum.render();
            let exact = hermitian_evolve(&build_hamiltonian(&sys)?, beta)?;
            Results::Series {
                beta,
                order,
                truncation_bound: series.truncation_bound,
                gate_sum: gate_sum_json(&series.sum),
                rendered: matrix_json(&rendered),
                frobenius_error_vs_exact: frobenius_distance(&rendered, &exact),
            }
        }
        TaskKind::Mc => {
            let sys = config::build_system(&cfg)?;
            let beta = config::require(task.beta, "beta", task.kind)?;
            let samples = config::require(task.samples, "samples", task.kind)?;
            let seed = seed.unwrap_or(0);
            let exact = hermitian_evolve(&build_hamiltonian(&sys)?, beta)?;
            let (est, trace) =
                mc_estimate_traced(&sys, beta, samples, seed, &trace_checkpoints(samples))?;

            let mut csv = String::from("sample_count,frobenius_error,stderr\n");
            for point in &trace {
                let err = frobenius_distance(&point.mean, &exact);
                csv.push_str(&format!("{},{},{}\n", point.samples, err, point.stderr));
            }
            let tp = out_dir.join(TRACE_FILE);
            std::fs::write(&tp, csv)
                .map_err(|e| RunError::Io(format!("cannot write {}: {e}", tp.display())))?;
            trace_path = Some(tp);

            Results::Mc {
                beta,
                samples,
                stderr: est.stderr,
                frobenius_error_vs_exact: frobenius_distance(&est.mean, &exact),
                mean: matrix_json(&est.mean),
            }
        }
        TaskKind::SpanTest => {
            let gamma = config::require(task.gamma, "gamma", task.kind)?;
            let beta1 = config::beta1_from_sign(&task)?;
            let couplings = IsingCouplings::new(cfg.system.sites, beta1, c64(0.0, gamma))?;
            let m = transfer_matrix(&couplings)?.without_prefactor();
            let report = perm_span_membership(&m)?;
            let ls = if m.nrows() <= 6 {
                let gates = all_permutations(m.nrows())?;
                Some(least_squares_decompose(&m, &gates)?.1)
            } else {
                None
            };
            Results::SpanTest {
                gamma,
                matrix: matrix_json(&m),
                member: report.member,
                common_sum: report.common_sum.map(Into::into),
                residual: report.residual,
                least_squares_residual_all_gates: ls,
                coefficients: report.coefficients.as_ref().map(gate_sum_json),
            }
        }
        TaskKind::UnitModulus => {
            let gamma = config::require(task.gamma, "gamma", task.kind)?;
            let max_support = task.max_support.unwrap_or(4);
            let beta1 = config::beta1_from_sign(&task)?;
            let couplings = IsingCouplings::new(cfg.system.sites, beta1, c64(0.0, gamma))?;
            let m = transfer_matrix(&couplings)?.without_prefactor();
            let found = unit_modulus_search(&m, max_support)?;
            Results::UnitModulus {
                gamma,
                max_support,
                matrix: matrix_json(&m),
                count: found.len(),
                decompositions: found.iter().map(gate_sum_json).collect(),
            }
        }
        TaskKind::IsingUnitarity => {
            let gamma = config::require(task.gamma, "gamma", task.kind)?;
            let n_sites = cfg.system.sites;
            let space = c64(0.0, gamma);
            let minus = IsingCouplings::new(n_sites, c64(0.0, -std::f64::consts::FRAC_PI_4), space)?;
            let plus = IsingCouplings::new(n_sites, c64(0.0, std::f64::consts::FRAC_PI_4), space)?;
            Results::IsingUnitarity {
                n_sites,
                gamma,
                defect_minus: unitarity_defect(&minus)?,
                defect_plus: unitarity_defect(&plus)?,
            }
        }
        TaskKind::IsingPartition => {
            let tau = config::require(task.tau, "tau", task.kind)?;
            let bt = config::require(task.coupling_time, "coupling_time", task.kind)?;
            let bs = config::require(task.coupling_space, "coupling_space", task.kind)?;
            let n_sites = cfg.system.sites;
            let couplings = IsingCouplings::new(n_sites, c64(bt, 0.0), c64(bs, 0.0))?;
            let check = logicint::partition_check(&couplings, tau)?;
            Results::IsingPartition {
                n_sites,
                tau,
                coupling_time: bt,
                coupling_space: bs,
                z_brute: check.z_brute.into(),
                z_transfer: check.z_transfer.into(),
                ratio: check.ratio.into(),
            }
        }
    };

    let report = Report {
        schema_version: config::SCHEMA_VERSION,
        tool: ToolInfo::current(),
        task: cfg.task.kind.name(),
        inputs: cfg,
        seed,
        results,
    };
    let report_path = out_dir.join(REPORT_FILE);
    std::fs::write(&report_path, render_json(&report))
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", report_path.display())))?;
    Ok(RunOutcome {
        report_path,
        trace_path,
    })
}
