//! Config schemas and runners for each subcommand.

use std::path::PathBuf;
use std::sync::Arc;

use gtpb_core::complexity::{
    construct_cover, covering_number_bound, cover_radius_check, dudley_rademacher_bound,
    rademacher_bound_min, rademacher_bound_v1, rademacher_bound_v2, rademacher_mc, rademacher_sup_closed_form,
    DudleyConfig, DEFAULT_COVER_CAP,
};
use gtpb_core::encoding::{
    bound_total_amgm, omega_coordinate, omega_total_capped, scaling_exponent_fit, EncodingStrategy, FrequencySet,
    StrategyDescriptor, DEFAULT_CARDINALITY_CAP,
};
use gtpb_core::genbounds::{encoding_bound_report, sample_size_for_gap, ClassParams, EncodingBoundRequest, LossSpec, Route};
use gtpb_core::gtp::{to_real_coefficients, GtpModel};
use gtpb_core::learn::{
    coverage_experiment, encoding_bound_family, srm_multi, srm_select, synth_data, Candidate, CoverageConfig,
    DataSet, MultiCandidate, SrmResult, XDistribution,
};
use gtpb_core::operators::{HamiltonianSpec, DEFAULT_DEDUP_TOL};
use gtpb_core::qsim::{conjecture_probe, CircuitSpec, LayerSpec, ProbeFamily};
use gtpb_core::{rng, Error};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

/// Rows for `--format csv`.
#[derive(Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    fn key_values(pairs: &[(&str, String)]) -> Self {
        let mut t = Table::new(&["quantity", "value"]);
        for (k, v) in pairs {
            t.push([k.to_string(), v.clone()]);
        }
        t
    }
}

pub struct Output {
    /// Config after defaults and the seed override are applied.
    pub resolved: Value,
    pub result: Value,
    pub table: Table,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse<T: for<'de> Deserialize<'de>>(raw: Value) -> Result<T, CliError> {
    serde_json::from_value(raw).map_err(|e| CliError::Config(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn max_abs_per_axis(d: usize, omega_plus: &[Vec<f64>]) -> f64 {
    (0..d).map(|i| omega_plus.iter().map(|w| w[i].abs()).fold(0.0, f64::max)).sum()
}

fn check_dims(d: usize, omega_plus: &[Vec<f64>]) -> Result<(), CliError> {
    if d == 0 || omega_plus.iter().any(|w| w.len() != d) {
        return Err(Error::Validation(format!("every frequency needs {d} ≥ 1 components")).into());
    }
    Ok(())
}

fn default_tol() -> f64 {
    DEFAULT_DEDUP_TOL
}

fn default_cap() -> usize {
    DEFAULT_CARDINALITY_CAP
}

// ---------------------------------------------------------------- omega

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaConfig {
    pub strategy: StrategyDescriptor,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// List `Ω₊` in the report when `|Ω|` is at most this.
    #[serde(default = "default_list_limit")]
    pub list_limit: usize,
}

fn default_list_limit() -> usize {
    1000
}

pub fn omega(raw: Value) -> Result<Output, CliError> {
    let cfg: OmegaConfig = parse(raw)?;
    let strategy = cfg.strategy.build()?;
    let d = strategy.d();
    let bounds = cfg.strategy.closed_form_bounds(cfg.tol)?;
    let mut per_coord = Vec::with_capacity(d);
    let mut product: u128 = 1;
    let mut table = Table::new(&[
        "coordinate", "gates", "cardinality", "K", "pauli", "repeated", "klocal_tight", "klocal_one_sided",
    ]);
    for (axis, b) in bounds.iter().enumerate() {
        let part = omega_coordinate(&strategy, axis, cfg.tol, cfg.cap)?;
        let k = part.k_per_coordinate()[axis];
        product = product.saturating_mul(part.len() as u128);
        per_coord.push(json!({
            "coordinate": axis + 1,
            "cardinality": part.len(),
            "K": k,
            "bounds": b,
            "best_bound": b.best(),
        }));
        table.push([
            (axis + 1).to_string(),
            b.gates.to_string(),
            part.len().to_string(),
            k.to_string(),
            opt(b.pauli),
            opt(b.repeated),
            opt(b.klocal_tight),
            opt(b.klocal_one_sided),
        ]);
    }
    // The product law makes the cardinality exact even when the full set is
    // too large to list.
    let (full, enumerated) = match omega_total_capped(&strategy, cfg.tol, cfg.cap) {
        Ok(set) => (Some(set), true),
        Err(Error::Resource(_)) => (None, false),
        Err(e) => return Err(e.into()),
    };
    let best: Option<Vec<f64>> = bounds.iter().map(|b| b.best()).collect();
    let amgm = match &best {
        Some(v) if d > 0 => Some(bound_total_amgm(v, d)?),
        _ => None,
    };
    let product_bound = best.as_ref().map(|v| v.iter().product::<f64>());
    let mut result = json!({
        "d": d,
        "gates_per_coordinate": strategy.gate_counts(),
        "omega_cardinality": product,
        "enumerated": enumerated,
        "per_coordinate": per_coord,
        "K": full.as_ref().map(FrequencySet::k_total),
        "integer_spectrum": full.as_ref().map(FrequencySet::is_integer),
        "bound_product": product_bound,
        "bound_amgm": amgm,
    });
    if let Some(set) = &full {
        if set.len() <= cfg.list_limit {
            result["omega_plus"] = to_value(&set.omega_plus());
        }
    }
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub request: EncodingBoundRequest,
    /// Target gaps for the sample-size inversion.
    #[serde(default)]
    pub epsilons: Vec<f64>,
}

pub fn bounds(raw: Value) -> Result<Output, CliError> {
    let cfg: BoundsConfig = parse(raw)?;
    let report = encoding_bound_report(&cfg.request)?;
    let class = ClassParams {
        b: report.b,
        b_tilde: report.b_tilde,
        n_omega: report.n_omega_used,
        k: report.k,
        d: cfg.request.d,
    };
    let routes = [Route::Rademacher, Route::Covering, Route::Best];
    let mut inversions = Vec::new();
    let mut headers = vec!["route".to_string(), "bound_at_m".to_string()];
    headers.extend(cfg.epsilons.iter().map(|e| format!("m_for_eps_{e}")));
    let mut table = Table {
        headers,
        rows: Vec::new(),
    };
    for route in routes {
        let at_m = match route {
            Route::Rademacher => report.rademacher_route,
            Route::Covering => report.covering_route,
            Route::Best => report.chosen,
        };
        let mut row = vec![route_name(route).to_string(), at_m.to_string()];
        for &eps in &cfg.epsilons {
            let m = sample_size_for_gap(eps, cfg.request.delta, &class, &cfg.request.loss, route)?;
            inversions.push(json!({"route": route, "epsilon": eps, "m": m}));
            row.push(m.to_string());
        }
        table.rows.push(row);
    }
    let mut result = to_value(&report);
    result["sample_sizes"] = Value::Array(inversions);
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Rademacher => "rademacher",
        Route::Covering => "covering",
        Route::Best => "best",
    }
}

// ---------------------------------------------------------------- rademacher

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RademacherConfig {
    pub d: usize,
    pub omega_plus: Vec<Vec<f64>>,
    #[serde(rename = "B_tilde")]
    pub b_tilde: f64,
    /// Sup-norm bound for the chaining bound; defaults to the largest sup
    /// norm on the coefficient ball, `B̃·√(1/4 + |Ω₊|)`.
    #[serde(default, rename = "B")]
    pub b: Option<f64>,
    pub m: usize,
    #[serde(default = "default_sigma_samples")]
    pub n_sigma_samples: usize,
    /// Number of single-σ closed-form values to report.
    #[serde(default = "default_sanity")]
    pub closed_form_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_sigma_samples() -> usize {
    10_000
}

fn default_sanity() -> usize {
    5
}

pub fn rademacher(raw: Value, seed: Option<u64>) -> Result<Output, CliError> {
    let mut cfg: RademacherConfig = parse(raw)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    check_dims(cfg.d, &cfg.omega_plus)?;
    if cfg.m == 0 {
        return Err(Error::Validation("m must be at least 1".into()).into());
    }
    // Stream 0 draws the points, stream 1 the sanity signs; the estimator
    // uses its own streams under a derived seed.
    let mut r = rng::stream(cfg.seed, 0);
    let xs: Vec<Vec<f64>> = (0..cfg.m)
        .map(|_| (0..cfg.d).map(|_| r.random::<f64>() * std::f64::consts::TAU).collect())
        .collect();
    let est = rademacher_mc(&cfg.omega_plus, cfg.b_tilde, &xs, cfg.n_sigma_samples, rng::derive_seed(cfg.seed, 2))?;
    let mut r = rng::stream(cfg.seed, 1);
    let sanity: Vec<f64> = (0..cfg.closed_form_samples)
        .map(|_| {
            let sigma: Vec<f64> = (0..cfg.m).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect();
            rademacher_sup_closed_form(&cfg.omega_plus, cfg.b_tilde, &xs, &sigma)
        })
        .collect::<Result<_, _>>()?;
    let n_omega = 2 * cfg.omega_plus.len() + 1;
    let k = max_abs_per_axis(cfg.d, &cfg.omega_plus);
    let b = cfg
        .b
        .unwrap_or(cfg.b_tilde * (0.25 + cfg.omega_plus.len() as f64).sqrt());
    // Some bounds are undefined for tiny classes; those are reported, not fatal.
    let mut unavailable = serde_json::Map::new();
    let mut keep = |name: &str, r: gtpb_core::Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            unavailable.insert(name.to_string(), Value::String(e.to_string()));
            None
        }
    };
    let v1 = keep("bound_v1", rademacher_bound_v1(k, cfg.b_tilde, cfg.omega_plus.len(), cfg.d, cfg.m));
    let v2 = keep("bound_v2", rademacher_bound_v2(cfg.b_tilde, n_omega, cfg.m));
    let min = keep("bound_min", rademacher_bound_min(k, cfg.b_tilde, n_omega, cfg.d, cfg.m));
    let dudley = keep(
        "dudley",
        dudley_rademacher_bound(b, cfg.b_tilde, n_omega, cfg.m, &DudleyConfig::default()),
    );
    let slack = 3.0 * est.std_error;
    let sound = [min, dudley].iter().flatten().all(|&bound| est.mean <= bound + slack);
    let result = json!({
        "estimate": est,
        "closed_form_sample": sanity,
        "K": k,
        "n_omega": n_omega,
        "bound_v1": v1,
        "bound_v2": v2,
        "bound_min": min,
        "dudley": dudley,
        "unavailable": unavailable,
        "sound": sound,
    });
    let table = Table::key_values(&[
        ("mean", est.mean.to_string()),
        ("std_error", est.std_error.to_string()),
        ("bound_v1", opt(v1)),
        ("bound_v2", opt(v2)),
        ("bound_min", opt(min)),
        ("dudley", opt(dudley)),
        ("sound", sound.to_string()),
    ]);
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

// ---------------------------------------------------------------- cover-check

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    pub d: usize,
    pub omega_plus: Vec<Vec<f64>>,
    #[serde(rename = "B_tilde")]
    pub b_tilde: f64,
    pub epsilon: f64,
    #[serde(default = "default_cover_samples")]
    pub n_samples: usize,
    /// Evaluation grid; defaults to `4K_i + 1` points per coordinate.
    #[serde(default)]
    pub grid_counts: Option<Vec<usize>>,
    #[serde(default = "default_cover_cap")]
    pub cap: u128,
    #[serde(default)]
    pub seed: u64,
}

fn default_cover_samples() -> usize {
    1000
}

fn default_cover_cap() -> u128 {
    DEFAULT_COVER_CAP
}

pub fn cover_check(raw: Value, seed: Option<u64>) -> Result<Output, CliError> {
    let mut cfg: CoverConfig = parse(raw)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    check_dims(cfg.d, &cfg.omega_plus)?;
    let counts = match &cfg.grid_counts {
        Some(c) => c.clone(),
        None => (0..cfg.d)
            .map(|i| {
                let k = cfg.omega_plus.iter().map(|w| w[i].abs()).fold(0.0, f64::max);
                4 * k.ceil() as usize + 1
            })
            .collect(),
    };
    cfg.grid_counts = Some(counts.clone());
    let net = construct_cover(cfg.d, cfg.omega_plus.clone(), cfg.b_tilde, cfg.epsilon, cfg.cap)?;
    let n_omega = 2 * cfg.omega_plus.len() + 1;
    let bound = covering_number_bound(cfg.b_tilde, n_omega, cfg.epsilon)?;
    let radii = cover_radius_check(&net, cfg.n_samples, &counts, cfg.seed)?;
    let radius = radii.iter().copied().fold(0.0, f64::max);
    let failures = radii.iter().filter(|&&r| r > cfg.epsilon).count();
    let result = json!({
        "net_size": net.len(),
        "n_omega": n_omega,
        "bound": bound,
        "net_exceeds_bound": net.len() as f64 > bound.value,
        "empirical_radius": radius,
        "failures": failures,
        "radius_ok": failures == 0,
    });
    let table = Table::key_values(&[
        ("net_size", net.len().to_string()),
        ("bound_log2", bound.log2.to_string()),
        ("empirical_radius", radius.to_string()),
        ("failures", failures.to_string()),
    ]);
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub n_trials: usize,
    /// Defaults to the circuit's encodings and observable.
    #[serde(default)]
    pub family: Option<ProbeFamily>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub circuit: CircuitSpec,
    /// Trainable parameters; drawn uniformly from `[0, 2π)` when absent.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub grid_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub seed: u64,
}

pub fn simulate(raw: Value, seed: Option<u64>) -> Result<Output, CliError> {
    let mut cfg: SimulateConfig = parse(raw)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let circuit = cfg.circuit.build()?;
    let theta = match &cfg.theta {
        Some(t) => t.clone(),
        None => {
            let mut r = rng::stream(cfg.seed, 0);
            (0..circuit.n_params()).map(|_| r.random::<f64>() * std::f64::consts::TAU).collect()
        }
    };
    cfg.theta = Some(theta.clone());
    let ext = circuit.extract_fourier(&theta, cfg.grid_sizes.as_deref())?;
    let norm = circuit.observable_norm()?;
    let mut table = Table::new(&["omega", "re", "im", "abs"]);
    let coeffs: Vec<Value> = ext
        .coefficients
        .entries()
        .iter()
        .map(|(w, c)| {
            table.push([format!("{w:?}"), c.re.to_string(), c.im.to_string(), c.norm().to_string()]);
            json!({"omega": w, "re": c.re, "im": c.im})
        })
        .collect();
    // Coefficients sum to f on the grid; the real form has ‖·‖ ≤ 2‖f‖∞ ≤ 2‖M‖.
    let real = to_real_coefficients(&ext.coefficients, 2.0 * norm.max(f64::MIN_POSITIVE), 1e-9);
    let probe = match &cfg.probe {
        Some(p) => {
            let family = match &p.family {
                Some(f) => f.clone(),
                None => ProbeFamily {
                    n_qubits: cfg.circuit.n_qubits,
                    d: cfg.circuit.d,
                    encodings: cfg
                        .circuit
                        .layers
                        .iter()
                        .filter(|l| matches!(l, LayerSpec::Encoding { .. }))
                        .cloned()
                        .collect(),
                    observable: cfg.circuit.observable.clone(),
                    random_trainables: true,
                },
            };
            Some(to_value(&conjecture_probe(&family, p.n_trials, rng::derive_seed(cfg.seed, 1))?))
        }
        None => None,
    };
    let result = json!({
        "omega_cardinality": ext.omega.len(),
        "grid_sizes": ext.grid_sizes,
        "coefficients": coeffs,
        "max_offgrid_leakage": ext.max_offgrid_leakage,
        "hermitian_defect": ext.hermitian_defect(),
        "omega_agreement": ext.max_offgrid_leakage <= 1e-9,
        "observable_norm": norm,
        "max_abs_coefficient": ext.max_abs_coefficient(),
        "real_form": real.ok(),
        "probe": probe,
    });
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

// ---------------------------------------------------------------- srm

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Explicit GTP model.
    Model { model: GtpModel },
    /// Output of a circuit at fixed parameters, via its Fourier series.
    Circuit {
        circuit: CircuitSpec,
        theta: Vec<f64>,
    },
}

impl TargetSpec {
    fn build(&self) -> Result<GtpModel, CliError> {
        match self {
            TargetSpec::Model { model } => Ok(model.clone()),
            TargetSpec::Circuit { circuit, theta } => {
                let c = circuit.build()?;
                let ext = c.extract_fourier(theta, None)?;
                let norm = c.observable_norm()?;
                Ok(to_real_coefficients(&ext.coefficients, 2.0 * norm.max(f64::MIN_POSITIVE), 1e-9)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
    },
    Synth {
        target: TargetSpec,
        noise_sigma: f64,
        m: usize,
        #[serde(default = "uniform")]
        x_distribution: XDistribution,
    },
}

fn uniform() -> XDistribution {
    XDistribution::Uniform
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSpec {
    List { candidates: Vec<Candidate> },
    /// `Ω₊ = {2, 4, …, 2k}` for `k = 1..=k_max`, the one-qubit Pauli ladder.
    PauliLadder {
        k_max: usize,
        #[serde(rename = "B_tilde")]
        b_tilde: f64,
    },
}

impl CandidateSpec {
    fn build(&self) -> Vec<Candidate> {
        match self {
            CandidateSpec::List { candidates } => candidates.clone(),
            CandidateSpec::PauliLadder { k_max, b_tilde } => (1..=*k_max)
                .map(|k| Candidate {
                    k,
                    omega_plus: (1..=k).map(|j| vec![2.0 * j as f64]).collect(),
                    b_tilde: *b_tilde,
                    b: None,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub n_trials: usize,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
}

fn default_n_eval() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrmConfig {
    pub candidates: CandidateSpec,
    pub data: DataSource,
    pub delta: f64,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default = "best_route")]
    pub route: Route,
    /// Bound each candidate by the smaller of both routes at `δ/2`.
    #[serde(default)]
    pub combine_routes: bool,
    #[serde(default)]
    pub coverage: Option<CoverageSpec>,
    /// Write the training data here as CSV.
    #[serde(default)]
    pub save_data: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn best_route() -> Route {
    Route::Best
}

pub fn read_dataset(path: &PathBuf) -> Result<DataSet, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Config(e.to_string()))?.clone();
    let d = headers.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
        CliError::Config("data CSV needs columns x1..xd,y".to_string())
    })?;
    for (i, h) in headers.iter().enumerate() {
        let want = if i == d { "y".to_string() } else { format!("x{}", i + 1) };
        if h.trim() != want {
            return Err(CliError::Config(format!("column {} should be {want}, found {h}", i + 1)));
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in rdr.deserialize::<Vec<f64>>() {
        let row = rec.map_err(|e| CliError::Config(e.to_string()))?;
        let (x, y) = row.split_at(d);
        if x.iter().any(|v| !(0.0..std::f64::consts::TAU).contains(v)) {
            return Err(Error::Validation(format!("point {x:?} outside [0, 2π)^d")).into());
        }
        xs.push(x.to_vec());
        ys.push(y[0]);
    }
    Ok(DataSet::new(d, xs, ys)?)
}

pub fn write_dataset<W: std::io::Write>(s: &DataSet, w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=s.d()).map(|i| format!("x{i}")).collect();
    header.push("y".to_string());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    wtr.write_record(&header).map_err(io)?;
    for (x, y) in s.xs().iter().zip(s.ys()) {
        let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
        row.push(y.to_string());
        wtr.write_record(&row).map_err(io)?;
    }
    wtr.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn srm(raw: Value, seed: Option<u64>) -> Result<Output, CliError> {
    let mut cfg: SrmConfig = parse(raw)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.loss.validate()?;
    let candidates = cfg.candidates.build();
    let (data, target) = match &cfg.data {
        DataSource::Csv { path } => (read_dataset(path)?, None),
        DataSource::Synth {
            target,
            noise_sigma,
            m,
            x_distribution,
        } => {
            let t = target.build()?;
            let s = synth_data(&t, *noise_sigma, *m, rng::derive_seed(cfg.seed, 0), x_distribution)?;
            (s, Some((t, *noise_sigma)))
        }
    };
    if let Some(p) = &cfg.save_data {
        let f = std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        write_dataset(&data, f)?;
    }
    let d = data.d();
    let res: SrmResult = if cfg.combine_routes {
        let multi: Vec<MultiCandidate> = candidates
            .iter()
            .map(|c| MultiCandidate {
                k1: c.k,
                k2: c.k,
                candidate: c.clone(),
            })
            .collect();
        let g1 = encoding_bound_family(d, cfg.loss, Route::Rademacher);
        let g2 = encoding_bound_family(d, cfg.loss, Route::Covering);
        srm_multi(&multi, &g1, &g2, &data, cfg.delta, &cfg.loss)?
    } else {
        let g = encoding_bound_family(d, cfg.loss, cfg.route);
        srm_select(&candidates, &data, cfg.delta, &cfg.loss, &g)?
    };
    let mut table = Table::new(&["k", "empirical_risk", "bound_value", "total", "error"]);
    for row in &res.rows {
        let k: Vec<String> = row.k.iter().map(usize::to_string).collect();
        table.push([
            k.join(";"),
            opt(row.empirical_risk),
            opt(row.bound_value),
            opt(row.total),
            row.error.clone().unwrap_or_default(),
        ]);
    }
    let coverage = match (&cfg.coverage, target) {
        (Some(spec), Some((t, noise))) => Some(to_value(&coverage_experiment(
            &candidates,
            &CoverageConfig {
                target: t,
                noise_sigma: noise,
                m: data.len(),
                delta: cfg.delta,
                loss: cfg.loss,
                route: cfg.route,
                n_trials: spec.n_trials,
                n_eval: spec.n_eval,
                seed: rng::derive_seed(cfg.seed, 1),
            },
        )?)),
        (Some(_), None) => {
            return Err(Error::Validation("coverage trials need a synthetic data source".into()).into())
        }
        _ => None,
    };
    let result = json!({
        "m": data.len(),
        "d": d,
        "rows": res.rows,
        "k_opt": res.k_opt,
        "selected": res.selected,
        "coverage": coverage,
    });
    Ok(Output {
        resolved: to_value(&cfg),
        result,
        table,
    })
}

// ---------------------------------------------------------------- table1

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SlopeCheck {
    /// Measured slope at most the exponent plus slack.
    #[default]
    Upper,
    /// Measured slope within slack of the exponent.
    Match,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    /// Repeated on a single coordinate `N` times.
    pub hamiltonian: HamiltonianSpec,
    pub n_values: Vec<usize>,
    pub exponent: f64,
    #[serde(default)]
    pub check: SlopeCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    pub families: Vec<FamilySpec>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_slack() -> f64 {
    0.15
}

pub fn table1(raw: Value) -> Result<Output, CliError> {
    let cfg: Table1Config = parse(raw)?;
    let mut table = Table::new(&["family", "exponent", "slope", "check", "pass"]);
    let mut rows = Vec::new();
    for fam in &cfg.families {
        let op = Arc::new(fam.hamiltonian.build()?);
        let mut cards = Vec::new();
        let slope = scaling_exponent_fit(
            |n| {
                let s = EncodingStrategy::same_hamiltonian_repeat(op.clone(), &[n])?;
                let set = omega_total_capped(&s, cfg.tol, cfg.cap)?;
                cards.push(set.len());
                Ok(set)
            },
            &fam.n_values,
        )?;
        let pass = match fam.check {
            SlopeCheck::Upper => slope <= fam.exponent + cfg.slack,
            SlopeCheck::Match => (slope - fam.exponent).abs() <= cfg.slack,
        };
        table.push([
            fam.name.clone(),
            fam.exponent.to_string(),
            slope.to_string(),
            format!("{:?}", fam.check).to_lowercase(),
            pass.to_string(),
        ]);
        rows.push(json!({
            "family": fam.name,
            "n_values": fam.n_values,
            "cardinalities": cards,
            "exponent": fam.exponent,
            "slope": slope,
            "check": fam.check,
            "pass": pass,
        }));
    }
    let all_pass = rows.iter().all(|r| r["pass"] == json!(true));
    Ok(Output {
        resolved: to_value(&cfg),
        result: json!({"families": rows, "all_pass": all_pass}),
        table,
    })
}
