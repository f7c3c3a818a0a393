//! Seeded experiment sweeps.
//!
//! Test case 1 perturbs the true eigenbasis by a Cayley rotation of
//! prescribed size; test case 2 replaces it with the eigenbasis of the sample
//! covariance. Each grid cell owns an RNG stream derived from the master seed
//! and the cell's index tuple, so results do not depend on scheduling.

use serde::{Deserialize, Serialize};

use crate::bdog::{solve_bdog, BdogConfig};
use crate::bounds::{self, BoundParams};
use crate::error::{input, Error, Result};
use crate::exec::ordered_map;
use crate::filters::{
    apply_spectral, controlled_inverse_response, node_operator, random_unit_perturbed_taps,
    sample_bernoulli_gaussian, SparseSignal, DEFAULT_MIN_ABS,
};
use crate::graph::sample_experiment_graph;
use crate::linalg::{norm2, norm_1_1, DenseMatrix};
use crate::metrics::{self, acc_x, node_domain_errors, re_g};
use crate::perturbation::{
    cayley_perturb, covariance_eigenbasis, random_unit_skew, xi_for_target_delta,
};
use crate::rbdogs::{rbdogs, RbdogsConfig};
use crate::rng::{cell_seed, stream_seed};

/// Realizations per cell with `--full`.
pub const FULL_REALIZATIONS: usize = 100;

const TC1_TAG: u64 = 1;
const TC2_TAG: u64 = 2;
const CALIBRATION_TAG: u64 = 3;
const ROLE_GRAPH: u64 = 1;
const ROLE_FILTER: u64 = 2;
const ROLE_SIGNAL: u64 = 3;
const ROLE_SKEW: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub alpha: f64,
    pub target_delta: f64,
    pub n_train: usize,
    pub n_heldout: usize,
    /// Cap on held-out draws while collecting instances with a positive
    /// denominator.
    pub max_heldout_draws: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            target_delta: 0.1,
            n_train: 20,
            n_heldout: 40,
            max_heldout_draws: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p_edge: f64,
    #[serde(rename = "P")]
    pub samples: usize,
    pub theta: f64,
    pub tau: f64,
    pub alpha_grid: Vec<f64>,
    pub target_delta_grid: Vec<f64>,
    #[serde(rename = "P_grid")]
    pub samples_grid: Vec<usize>,
    #[serde(rename = "L")]
    pub taps_len: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub bdog: BdogConfig,
    pub rbdogs: RbdogsConfig,
    /// `None` uses [`BoundParams::defaults`] at `theta`.
    pub bounds: Option<BoundParams>,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            p_edge: 0.4,
            samples: 60,
            theta: 0.15,
            tau: metrics::DEFAULT_TAU,
            alpha_grid: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            target_delta_grid: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
            samples_grid: vec![30, 60, 120, 240],
            taps_len: 5,
            n_realizations: 20,
            master_seed: 0,
            bdog: BdogConfig::default(),
            rbdogs: RbdogsConfig::default(),
            bounds: None,
            calibration: CalibrationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n < 2 {
            bad.push("n must be at least 2".to_string());
        }
        if !(self.p_edge > 0.0 && self.p_edge <= 1.0) {
            bad.push(format!("p_edge = {} not in (0, 1]", self.p_edge));
        }
        if self.samples < 2 || self.samples_grid.iter().any(|&p| p < 2) {
            bad.push("sample counts must be at least 2".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            bad.push(format!("theta = {} not in (0, 1)", self.theta));
        }
        if !(self.tau > 0.0) {
            bad.push(format!("tau = {} must be positive", self.tau));
        }
        if self.alpha_grid.is_empty()
            || self.target_delta_grid.is_empty()
            || self.samples_grid.is_empty()
        {
            bad.push("grids must be non-empty".into());
        }
        if self
            .alpha_grid
            .iter()
            .chain(&self.target_delta_grid)
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            bad.push("alpha and target_delta grid values must be finite and non-negative".into());
        }
        if self.taps_len == 0 || self.taps_len > self.n {
            bad.push(format!("L = {} not in [1, n]", self.taps_len));
        }
        if self.n_realizations == 0 {
            bad.push("n_realizations must be at least 1".into());
        }
        let c = &self.calibration;
        if c.n_train == 0 || c.n_heldout == 0 || c.max_heldout_draws < c.n_heldout {
            bad.push(
                "calibration counts must be positive and max_heldout_draws ≥ n_heldout".into(),
            );
        }
        if !bad.is_empty() {
            return input(format!("invalid experiment config: {}", bad.join("; ")));
        }
        self.bdog.validate()?;
        self.rbdogs.validate()?;
        self.bound_params().validate()
    }

    pub fn bound_params(&self) -> BoundParams {
        self.bounds
            .clone()
            .unwrap_or_else(|| BoundParams::defaults(self.theta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bdog,
    Rbdogs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bdog => "bdog",
            Method::Rbdogs => "rbdogs",
        }
    }
}

/// One solver run on one realization of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub method: Method,
    pub alpha: Option<f64>,
    pub target_delta: Option<f64>,
    pub xi: Option<f64>,
    pub samples: usize,
    pub realization: usize,
    pub re_g: Option<f64>,
    pub acc_x: Option<f64>,
    pub re_gop: Option<f64>,
    pub re_hop: Option<f64>,
    pub re_x: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
    /// `ok`, or the error that stopped this run.
    pub status: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    ReG,
    AccX,
    ReGop,
    ReHop,
    ReX,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::ReG,
        Metric::AccX,
        Metric::ReGop,
        Metric::ReHop,
        Metric::ReX,
    ];

    /// Column name in CSV output.
    pub fn column(self) -> &'static str {
        match self {
            Metric::ReG => "re_g",
            Metric::AccX => "acc_x",
            Metric::ReGop => "re_G",
            Metric::ReHop => "re_H",
            Metric::ReX => "re_X",
        }
    }

    pub fn get(self, row: &MetricRow) -> Option<f64> {
        match self {
            Metric::ReG => row.re_g,
            Metric::AccX => row.acc_x,
            Metric::ReGop => row.re_gop,
            Metric::ReHop => row.re_hop,
            Metric::ReX => row.re_x,
        }
    }
}

/// Ground truth and perturbed basis for one realization.
#[derive(Clone, Debug)]
pub struct Instance {
    pub v: DenseMatrix,
    pub v_p: DenseMatrix,
    /// Inverse-filter response, scaled so that `1ᵀg0 = N`.
    pub g0: Vec<f64>,
    pub h0: Vec<f64>,
    pub signal: SparseSignal,
    pub y: DenseMatrix,
    pub xi: Option<f64>,
}

impl Instance {
    fn truth_operators(&self) -> (DenseMatrix, DenseMatrix) {
        (
            node_operator(&self.v, &self.g0),
            node_operator(&self.v, &self.h0),
        )
    }
}

/// Controlled-conditioning instance with a Cayley-perturbed basis.
pub fn cayley_instance(
    n: usize,
    p_edge: f64,
    samples: usize,
    theta: f64,
    alpha: f64,
    target_delta: f64,
    seed: u64,
) -> Result<Instance> {
    let graph = sample_experiment_graph(n, p_edge, stream_seed(seed, ROLE_GRAPH))?;
    let (g0, h0) = controlled_inverse_response(n, alpha, stream_seed(seed, ROLE_FILTER))?;
    let signal = sample_bernoulli_gaussian(n, samples, theta, stream_seed(seed, ROLE_SIGNAL))?;
    let v = graph.basis.vectors;
    let y = apply_spectral(&v, &h0, &signal.x);
    let w = random_unit_skew(n, stream_seed(seed, ROLE_SKEW))?;
    let xi = xi_for_target_delta(&w, target_delta, 1e-12)?;
    let v_p = cayley_perturb(&v, &w, xi)?;
    Ok(Instance {
        v,
        v_p,
        g0,
        h0,
        signal,
        y,
        xi: Some(xi),
    })
}

/// Tap-built filter observed through the sample-covariance eigenbasis.
///
/// The estimators fix `1ᵀĝ = N`, so the truth is rescaled to that trace:
/// `g0 ← g0/c`, `h0 ← c·h0`, `X0 ← X0/c` with `c = 1ᵀg0/N`. `Y` is unchanged.
pub fn covariance_instance(
    n: usize,
    p_edge: f64,
    samples: usize,
    theta: f64,
    taps_len: usize,
    seed: u64,
) -> Result<Instance> {
    let graph = sample_experiment_graph(n, p_edge, stream_seed(seed, ROLE_GRAPH))?;
    let filter = random_unit_perturbed_taps(
        &graph.basis,
        taps_len,
        DEFAULT_MIN_ABS,
        stream_seed(seed, ROLE_FILTER),
    )?;
    let mut signal = sample_bernoulli_gaussian(n, samples, theta, stream_seed(seed, ROLE_SIGNAL))?;
    let y = filter.apply(&signal.x);
    let v_p = covariance_eigenbasis(&y)?.vectors;
    let g_raw: Vec<f64> = filter.freq_response().iter().map(|h| 1.0 / h).collect();
    let c = g_raw.iter().sum::<f64>() / n as f64;
    if c.abs() < 1e-8 {
        return Err(Error::Numerical(format!(
            "inverse filter has near-zero trace ({c:e})"
        )));
    }
    let g0 = g_raw.iter().map(|g| g / c).collect();
    let h0 = filter.freq_response().iter().map(|h| h * c).collect();
    signal.x = signal.x.scale(1.0 / c);
    Ok(Instance {
        v: graph.basis.vectors,
        v_p,
        g0,
        h0,
        signal,
        y,
        xi: None,
    })
}

struct RowKey {
    alpha: Option<f64>,
    target_delta: Option<f64>,
    samples: usize,
    realization: usize,
}

impl RowKey {
    fn row(&self, method: Method, xi: Option<f64>) -> MetricRow {
        MetricRow {
            method,
            alpha: self.alpha,
            target_delta: self.target_delta,
            xi,
            samples: self.samples,
            realization: self.realization,
            re_g: None,
            acc_x: None,
            re_gop: None,
            re_hop: None,
            re_x: None,
            iterations: 0,
            converged: false,
            wall_time: 0.0,
            status: "ok".into(),
        }
    }

    fn failed(&self, err: &Error) -> Vec<MetricRow> {
        [Method::Bdog, Method::Rbdogs]
            .into_iter()
            .map(|m| MetricRow {
                status: status_text(err),
                ..self.row(m, None)
            })
            .collect()
    }
}

fn status_text(err: &Error) -> String {
    format!("error: {err}").replace([',', '\n', '\r', '"'], " ")
}

struct Estimate {
    v_hat: DenseMatrix,
    g_hat: Vec<f64>,
    x_hat: DenseMatrix,
    iterations: usize,
    converged: bool,
    wall_time: f64,
}

fn run_method(method: Method, inst: &Instance, cfg: &ExperimentConfig) -> Result<Estimate> {
    match method {
        Method::Bdog => {
            let r = solve_bdog(&inst.y, &inst.v_p, &cfg.bdog, None)?;
            let x_hat = apply_spectral(&inst.v_p, &r.g_hat, &inst.y);
            Ok(Estimate {
                v_hat: inst.v_p.clone(),
                g_hat: r.g_hat,
                x_hat,
                iterations: r.iterations,
                converged: r.converged,
                wall_time: r.wall_time,
            })
        }
        Method::Rbdogs => {
            let r = rbdogs(&inst.y, &inst.v_p, &cfg.rbdogs)?;
            Ok(Estimate {
                v_hat: r.v_hat,
                g_hat: r.g_hat,
                x_hat: r.x_hat,
                iterations: r.outer_iterations,
                converged: r.converged,
                wall_time: r.wall_time,
            })
        }
    }
}

/// Runs both methods on one instance. `with_re_g` is false when the
/// estimated frequencies are not aligned with the true ones.
fn evaluate_instance(
    inst: &Instance,
    key: &RowKey,
    cfg: &ExperimentConfig,
    with_re_g: bool,
) -> Vec<MetricRow> {
    let (g_true, h_true) = inst.truth_operators();
    [Method::Bdog, Method::Rbdogs]
        .into_iter()
        .map(|m| {
            let mut row = key.row(m, inst.xi);
            let outcome = run_method(m, inst, cfg).and_then(|est| {
                row.iterations = est.iterations;
                row.converged = est.converged;
                row.wall_time = est.wall_time;
                let (rg, rh, rx) = node_domain_errors(
                    &est.v_hat,
                    &est.g_hat,
                    &est.x_hat,
                    &g_true,
                    &h_true,
                    &inst.signal.x,
                )?;
                row.re_gop = Some(rg);
                row.re_hop = Some(rh);
                row.re_x = Some(rx);
                if with_re_g {
                    row.re_g = Some(re_g(&est.g_hat, &inst.g0)?);
                }
                row.acc_x = Some(acc_x(&est.x_hat, &inst.signal.x, cfg.tau)?);
                Ok(())
            });
            if let Err(e) = outcome {
                row.status = status_text(&e);
            }
            row
        })
        .collect()
}

/// Seed of test-case-1 cell `(alpha index, delta index, realization)`.
pub fn tc1_seed(master: u64, ia: usize, id: usize, r: usize) -> u64 {
    cell_seed(master, &[TC1_TAG, ia as u64, id as u64, r as u64])
}

/// Seed of test-case-2 cell `(P index, realization)`.
pub fn tc2_seed(master: u64, ip: usize, r: usize) -> u64 {
    cell_seed(master, &[TC2_TAG, ip as u64, r as u64])
}

/// Cayley-perturbation sweep over `alpha_grid × target_delta_grid ×
/// realizations`. Rows come out in that nesting order, BDoG before RBDoGS.
pub fn run_testcase1(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MetricRow>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for ia in 0..cfg.alpha_grid.len() {
        for id in 0..cfg.target_delta_grid.len() {
            for r in 0..cfg.n_realizations {
                cells.push((ia, id, r));
            }
        }
    }
    let per_cell = ordered_map(&cells, workers, |&(ia, id, r)| {
        let (alpha, delta) = (cfg.alpha_grid[ia], cfg.target_delta_grid[id]);
        let key = RowKey {
            alpha: Some(alpha),
            target_delta: Some(delta),
            samples: cfg.samples,
            realization: r,
        };
        let seed = tc1_seed(cfg.master_seed, ia, id, r);
        match cayley_instance(
            cfg.n,
            cfg.p_edge,
            cfg.samples,
            cfg.theta,
            alpha,
            delta,
            seed,
        ) {
            Ok(inst) => evaluate_instance(&inst, &key, cfg, true),
            Err(e) => key.failed(&e),
        }
    })?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Covariance-eigenbasis sweep over `P_grid × realizations`.
pub fn run_testcase2(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MetricRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.samples_grid.len())
        .flat_map(|ip| (0..cfg.n_realizations).map(move |r| (ip, r)))
        .collect();
    let per_cell = ordered_map(&cells, workers, |&(ip, r)| {
        let samples = cfg.samples_grid[ip];
        let key = RowKey {
            alpha: None,
            target_delta: None,
            samples,
            realization: r,
        };
        let seed = tc2_seed(cfg.master_seed, ip, r);
        match covariance_instance(cfg.n, cfg.p_edge, samples, cfg.theta, cfg.taps_len, seed) {
            Ok(inst) => evaluate_instance(&inst, &key, cfg, false),
            Err(e) => key.failed(&e),
        }
    })?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Per-cell aggregate over realizations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub alpha: Option<f64>,
    pub target_delta: Option<f64>,
    pub samples: usize,
    pub count: usize,
    pub failures: usize,
    pub mean: [Option<f64>; 5],
    pub median: [Option<f64>; 5],
}

impl SummaryRow {
    pub fn mean_of(&self, m: Metric) -> Option<f64> {
        self.mean[Metric::ALL.iter().position(|&x| x == m).unwrap()]
    }

    pub fn median_of(&self, m: Metric) -> Option<f64> {
        self.median[Metric::ALL.iter().position(|&x| x == m).unwrap()]
    }
}

fn same_cell(a: &MetricRow, b: &MetricRow) -> bool {
    a.method == b.method
        && a.alpha == b.alpha
        && a.target_delta == b.target_delta
        && a.samples == b.samples
}

/// Groups rows by `(method, alpha, target_delta, samples)` in order of first
/// appearance; means and medians skip missing values.
pub fn summarize(rows: &[MetricRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<Vec<&MetricRow>> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|g| same_cell(g[0], row)) {
            Some(g) => g.push(row),
            None => groups.push(vec![row]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let first = g[0];
            let values = |m: Metric| -> Vec<f64> { g.iter().filter_map(|r| m.get(r)).collect() };
            SummaryRow {
                method: first.method,
                alpha: first.alpha,
                target_delta: first.target_delta,
                samples: first.samples,
                count: g.len(),
                failures: g.iter().filter(|r| r.status != "ok").count(),
                mean: Metric::ALL.map(|m| metrics::mean(&values(m))),
                median: Metric::ALL.map(|m| metrics::median(&values(m))),
            }
        })
        .collect()
}

/// Bound ingredients for one realization, with `C1 = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundInstance {
    pub index: usize,
    pub a0: f64,
    pub recovery_holds: bool,
    /// `Q` at `C1 = 1`.
    pub q_unit: f64,
    pub numerator: f64,
    /// `a0‖E_c‖_{1,1} + ‖E_cᵀV ⊙ V‖_{1→2}`.
    pub offset: f64,
    /// Observed `‖ĝ − g0‖₂` of the convex estimator.
    pub error: f64,
    pub samples: usize,
}

impl BoundInstance {
    pub fn denominator(&self, c1: f64) -> f64 {
        self.samples as f64 * c1 * self.q_unit - self.offset
    }

    /// Bound at `c1`, `None` when infeasible.
    pub fn bound(&self, c1: f64) -> Option<f64> {
        let d = self.denominator(c1);
        (d > 0.0).then(|| self.numerator / d)
    }

    /// Largest `C1` for which the bound still covers the observed error.
    pub fn c1_max(&self) -> Option<f64> {
        (self.error > 0.0 && self.q_unit > 0.0).then(|| {
            (self.numerator / self.error + self.offset) / (self.samples as f64 * self.q_unit)
        })
    }
}

/// Evaluates the bound ingredients on the calibration scenario.
/// `role` separates training (0) from held-out (1) streams.
pub fn bound_instance(cfg: &ExperimentConfig, role: u64, index: usize) -> Result<BoundInstance> {
    let cal = &cfg.calibration;
    let seed = cell_seed(cfg.master_seed, &[CALIBRATION_TAG, role, index as u64]);
    let inst = cayley_instance(
        cfg.n,
        cfg.p_edge,
        cfg.samples,
        cfg.theta,
        cal.alpha,
        cal.target_delta,
        seed,
    )?;
    let unit = BoundParams {
        c1: 1.0,
        ..cfg.bound_params()
    };
    let thr = bounds::a0(&inst.v, &unit)?.a0;
    let alpha = norm2(&crate::linalg::project_ones_complement(&inst.g0));
    let recovery_holds = alpha <= thr;
    let q_unit = if recovery_holds {
        bounds::q_factor(&inst.g0, thr, &unit)?
    } else {
        0.0
    };
    let e = bounds::error_matrix_e(&inst.v, &inst.v_p, &inst.g0, &inst.h0, &inst.signal.x)?;
    let e_comp = bounds::restrict_complement(&e, &inst.signal.support)?;
    let sb = bounds::stability_bound(&inst.g0, &e_comp, &inst.v, thr, q_unit, cfg.samples)?;
    let fit = solve_bdog(&inst.y, &inst.v_p, &cfg.bdog, None)?;
    let diff: Vec<f64> = fit.g_hat.iter().zip(&inst.g0).map(|(a, b)| a - b).collect();
    Ok(BoundInstance {
        index,
        a0: thr,
        recovery_holds,
        q_unit,
        numerator: sb.numerator,
        offset: thr * norm_1_1(&e_comp) + sb.khatri_rao_term,
        error: norm2(&diff),
        samples: cfg.samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub c1: f64,
    pub train: Vec<BoundInstance>,
    /// Held-out instances whose denominator is positive at `c1`.
    pub heldout: Vec<BoundInstance>,
    pub heldout_draws: usize,
    pub heldout_holding: usize,
    pub fraction_holding: f64,
}

/// Fits `C1` as the tightest value that keeps the bound valid on every
/// training instance, then checks it on held-out instances with a positive
/// denominator.
pub fn calibrate_c1(cfg: &ExperimentConfig, workers: usize) -> Result<CalibrationReport> {
    cfg.validate()?;
    let cal = &cfg.calibration;
    let train_idx: Vec<usize> = (0..cal.n_train).collect();
    let train = ordered_map(&train_idx, workers, |&i| bound_instance(cfg, 0, i))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let c1 = train
        .iter()
        .filter(|b| b.recovery_holds)
        .filter_map(BoundInstance::c1_max)
        .fold(f64::INFINITY, f64::min);
    if !c1.is_finite() {
        return Err(Error::Numerical(
            "no training instance satisfies the recovery condition with a measurable error".into(),
        ));
    }
    let mut heldout = Vec::new();
    let mut draws = 0;
    while heldout.len() < cal.n_heldout && draws < cal.max_heldout_draws {
        let batch: Vec<usize> =
            (draws..(draws + cal.n_heldout).min(cal.max_heldout_draws)).collect();
        draws += batch.len();
        for b in ordered_map(&batch, workers, |&i| bound_instance(cfg, 1, i))? {
            let b = b?;
            if heldout.len() < cal.n_heldout && b.recovery_holds && b.denominator(c1) > 0.0 {
                heldout.push(b);
            }
        }
    }
    let holding = heldout
        .iter()
        .filter(|b| b.bound(c1).is_some_and(|v| v >= b.error))
        .count();
    let fraction = if heldout.is_empty() {
        0.0
    } else {
        holding as f64 / heldout.len() as f64
    };
    Ok(CalibrationReport {
        c1,
        train,
        heldout,
        heldout_draws: draws,
        heldout_holding: holding,
        fraction_holding: fraction,
    })
}
