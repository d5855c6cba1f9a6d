//! Machine-readable report documents. Complex values serialize as
//! explicit `{re, im}` pairs and permutation gates as image arrays, so
//! reports are canonical and diff-friendly; nothing in a report depends
//! on wall-clock time.

use logicint::matrix::CMatrix;
use logicint::GateSum;
use serde::Serialize;

use crate::config::{ComplexPair, RunConfig};

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub task: &'static str,
    pub inputs: RunConfig,
    /// Seed actually used (a `--seed` flag overrides the config).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Results,
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "logicint",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Results {
    Exact {
        beta: f64,
        unitary: MatrixJson,
        unitarity_defect: f64,
    },
    Series {
        beta: f64,
        order: usize,
        truncation_bound: f64,
        gate_sum: Vec<GateTermJson>,
        rendered: MatrixJson,
        frobenius_error_vs_exact: f64,
    },
    Mc {
        beta: f64,
        samples: usize,
        stderr: f64,
        mean: MatrixJson,
        frobenius_error_vs_exact: f64,
    },
    SpanTest {
        gamma: f64,
        matrix: MatrixJson,
        member: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        common_sum: Option<ComplexPair>,
        residual: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        least_squares_residual_all_gates: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        coefficients: Option<Vec<GateTermJson>>,
    },
    UnitModulus {
        gamma: f64,
        max_support: usize,
        matrix: MatrixJson,
        count: usize,
        decompositions: Vec<Vec<GateTermJson>>,
    },
    IsingUnitarity {
        n_sites: usize,
        gamma: f64,
        defect_minus: f64,
        defect_plus: f64,
    },
    IsingPartition {
        n_sites: usize,
        tau: usize,
        coupling_time: f64,
        coupling_space: f64,
        z_brute: ComplexPair,
        z_transfer: ComplexPair,
        ratio: ComplexPair,
    },
}

pub type MatrixJson = Vec<Vec<ComplexPair>>;

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct GateTermJson {
    pub permutation: Vec<usize>,
    pub coefficient: ComplexPair,
}

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].into()).collect())
        .collect()
}

pub fn gate_sum_json(gs: &GateSum) -> Vec<GateTermJson> {
    gs.terms()
        .map(|(gate, coeff)| GateTermJson {
            permutation: gate.image().to_vec(),
            coefficient: coeff.into(),
        })
        .collect()
}

pub fn render_json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}
