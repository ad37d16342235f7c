//! Empirical and true risk, norm-constrained least-squares fitting of GTP
//! models, synthetic data and structural risk minimization.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::DudleyConfig;
use crate::error::{Error, Result};
use crate::genbounds::{BoundEvaluator, ClassParams, LossSpec, Route};
use crate::gtp::{coefficient_norm, feature_map_into, for_each_grid_point, GtpModel};
use crate::linalg::symmetric_eigen;
use crate::rng;

/// Labelled sample `S = {(x_i, y_i)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    d: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

impl DataSet {
    pub fn new(d: usize, xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("data dimension must be at least 1"));
        }
        if xs.len() != ys.len() {
            return Err(Error::validation("need one label per point"));
        }
        if xs.iter().any(|x| x.len() != d) {
            return Err(Error::validation("point of wrong dimension"));
        }
        if xs.iter().flatten().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::validation("data must be finite"));
        }
        Ok(DataSet { d, xs, ys })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

fn check_nonempty(s: &DataSet) -> Result<()> {
    if s.is_empty() {
        Err(Error::validation("data set is empty"))
    } else {
        Ok(())
    }
}

/// `(1/|S|) Σ ℓ(y_i, f(x_i))`.
pub fn empirical_risk(model: &GtpModel, s: &DataSet, loss: &LossSpec) -> Result<f64> {
    check_nonempty(s)?;
    let mut acc = 0.0;
    for (x, y) in s.xs.iter().zip(&s.ys) {
        acc += loss.eval(*y, model.evaluate(x)?);
    }
    Ok(acc / s.len() as f64)
}

/// Source of fresh labelled points. Draw `index` under `seed` must be a pure
/// function of the two, so parallel estimates are reproducible.
pub trait Sampler: Sync {
    fn d(&self) -> usize;
    fn draw(&self, seed: u64, index: u64) -> (Vec<f64>, f64);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum XDistribution {
    /// Uniform on `[0, 2π)^d`.
    Uniform,
    /// Equispaced product grid with `counts[i]` points on coordinate `i`.
    Grid { counts: Vec<usize> },
}

/// `y = target(x) + N(0, σ²)` with `x` uniform on `[0, 2π)^d`.
#[derive(Debug, Clone)]
pub struct TargetSampler {
    pub target: GtpModel,
    pub noise_sigma: f64,
}

impl Sampler for TargetSampler {
    fn d(&self) -> usize {
        self.target.d()
    }

    fn draw(&self, seed: u64, index: u64) -> (Vec<f64>, f64) {
        let mut r = rng::stream(seed, index);
        let x: Vec<f64> = (0..self.target.d())
            .map(|_| r.random::<f64>() * std::f64::consts::TAU)
            .collect();
        let y = self.target.evaluate(&x).expect("dimension matches") + noise(&mut r, self.noise_sigma);
        (x, y)
    }
}

fn noise<R: Rng>(r: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("σ checked").sample(r)
    }
}

/// Cycles through a fixed data set, ignoring the seed.
#[derive(Debug, Clone)]
pub struct ReplaySampler<'a> {
    pub data: &'a DataSet,
}

impl Sampler for ReplaySampler<'_> {
    fn d(&self) -> usize {
        self.data.d
    }

    fn draw(&self, _seed: u64, index: u64) -> (Vec<f64>, f64) {
        let i = (index % self.data.len() as u64) as usize;
        (self.data.xs[i].clone(), self.data.ys[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_eval: usize,
}

/// Monte Carlo estimate of `R(h) = E ℓ(y, h(x))` from `n_eval` fresh draws.
pub fn estimate_true_risk(
    model: &GtpModel,
    sampler: &dyn Sampler,
    n_eval: usize,
    seed: u64,
    loss: &LossSpec,
) -> Result<RiskEstimate> {
    if n_eval < 2 {
        return Err(Error::validation("need at least two evaluation draws"));
    }
    if sampler.d() != model.d() {
        return Err(Error::validation("sampler and model dimensions differ"));
    }
    let losses: Vec<f64> = (0..n_eval as u64)
        .into_par_iter()
        .map(|i| {
            let (x, y) = sampler.draw(seed, i);
            model.evaluate(&x).map(|z| loss.eval(y, z))
        })
        .collect::<Result<_>>()?;
    let k = n_eval as f64;
    let mean = losses.iter().sum::<f64>() / k;
    let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(RiskEstimate {
        mean,
        std_error: (var / k).sqrt(),
        n_eval,
    })
}

/// `R(h) − R̂_S(h)`, with `R(h)` estimated by Monte Carlo.
pub fn generalization_gap(
    model: &GtpModel,
    s: &DataSet,
    sampler: &dyn Sampler,
    n_eval: usize,
    seed: u64,
    loss: &LossSpec,
) -> Result<f64> {
    Ok(estimate_true_risk(model, sampler, n_eval, seed, loss)?.mean - empirical_risk(model, s, loss)?)
}

/// Labels `target(x) + N(0, σ²)` at `m` points drawn from `dist`.
pub fn synth_data(
    target: &GtpModel,
    noise_sigma: f64,
    m: usize,
    seed: u64,
    dist: &XDistribution,
) -> Result<DataSet> {
    if m == 0 {
        return Err(Error::validation("need at least one point"));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::validation("noise level must be finite and ≥ 0"));
    }
    let d = target.d();
    let xs: Vec<Vec<f64>> = match dist {
        XDistribution::Uniform => {
            let sampler = TargetSampler {
                target: target.clone(),
                noise_sigma,
            };
            let (xs, ys): (Vec<_>, Vec<_>) = (0..m as u64).map(|i| sampler.draw(seed, i)).unzip();
            return DataSet::new(d, xs, ys);
        }
        XDistribution::Grid { counts } => {
            let mut xs = Vec::new();
            for_each_grid_point(d, counts, |x| xs.push(x.to_vec()))?;
            if xs.len() != m {
                return Err(Error::validation(format!(
                    "grid {counts:?} has {} points, but m = {m}",
                    xs.len()
                )));
            }
            xs
        }
    };
    let ys = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut r = rng::stream(seed, i as u64);
            Ok(target.evaluate(x)? + noise(&mut r, noise_sigma))
        })
        .collect::<Result<_>>()?;
    DataSet::new(d, xs, ys)
}

/// Relative eigenvalue cutoff of the Gram matrix below which directions are
/// dropped from the unconstrained solution.
pub const GRAM_CUTOFF: f64 = 1e-12;
/// Absolute accuracy of `‖coeffs‖₂ = B̃` on the constrained branch.
pub const NORM_MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: GtpModel,
    /// True when the norm constraint is active.
    pub constrained: bool,
    /// Ridge multiplier `μ` on the constrained branch, else 0.
    pub multiplier: f64,
    /// Largest over smallest retained Gram eigenvalue.
    pub condition_estimate: f64,
    /// Number of Gram directions dropped as numerically null.
    pub dropped_directions: usize,
}

/// Least squares `y ≈ ⟨coeffs, φ(x)⟩` over the ball `‖coeffs‖₂ ≤ B̃`.
///
/// The unconstrained minimum-norm solution comes from an eigendecomposition
/// of the Gram matrix. If it leaves the ball, the optimum lies on the ridge
/// path `(G + μI)⁻¹Φᵀy`, whose norm decreases in `μ`; `μ` is found by
/// bisection.
pub fn fit_gtp(d: usize, omega_plus: Vec<Vec<f64>>, b_tilde: f64, s: &DataSet) -> Result<FitResult> {
    check_nonempty(s)?;
    if s.d != d {
        return Err(Error::validation("data and frequency dimensions differ"));
    }
    if !(b_tilde.is_finite() && b_tilde > 0.0) {
        return Err(Error::validation("norm budget must be positive and finite"));
    }
    let n = 2 * omega_plus.len() + 1;
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut phi = vec![0.0; n];
    for (x, y) in s.xs.iter().zip(&s.ys) {
        feature_map_into(&omega_plus, x, &mut phi)?;
        for i in 0..n {
            rhs[i] += phi[i] * y;
            for j in 0..n {
                gram[i * n + j] += phi[i] * phi[j];
            }
        }
    }
    let (vals, vecs) = symmetric_eigen(n, &gram)?;
    let lam_max = vals.iter().copied().fold(0.0, f64::max);
    if !(lam_max.is_finite() && lam_max > 0.0) {
        return Err(Error::numeric("Gram matrix is zero or not finite", lam_max));
    }
    // Project the right-hand side onto the eigenbasis (columns of `vecs`).
    let proj: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|i| vecs[i * n + k] * rhs[i]).sum())
        .collect();
    let solve = |mu: f64| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for k in 0..n {
            let denom = vals[k] + mu;
            if mu == 0.0 && vals[k] <= GRAM_CUTOFF * lam_max {
                continue;
            }
            let w = proj[k] / denom;
            for i in 0..n {
                c[i] += vecs[i * n + k] * w;
            }
        }
        c
    };
    let kept: Vec<f64> = vals.iter().copied().filter(|&v| v > GRAM_CUTOFF * lam_max).collect();
    let lam_min = kept.iter().copied().fold(f64::INFINITY, f64::min);
    let dropped = n - kept.len();

    let mut coeffs = solve(0.0);
    let mut multiplier = 0.0;
    let mut constrained = false;
    if coefficient_norm(&coeffs, 2.0)? > b_tilde {
        constrained = true;
        let r_norm = coefficient_norm(&rhs, 2.0)?;
        let (mut lo, mut hi) = (0.0f64, r_norm / b_tilde);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if coefficient_norm(&solve(mid), 2.0)? > b_tilde {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        multiplier = hi;
        coeffs = solve(hi);
        let norm = coefficient_norm(&coeffs, 2.0)?;
        if norm == 0.0 || (norm - b_tilde).abs() > 1e-3 * b_tilde {
            return Err(Error::numeric("ridge bisection did not reach the budget", (norm - b_tilde).abs()));
        }
        // Remove the last bisection residual so the norm matches to NORM_MATCH_TOL.
        let scale = b_tilde / norm;
        coeffs.iter_mut().for_each(|c| *c *= scale);
    }
    let model = GtpModel::from_coefficients(d, omega_plus, &coeffs, b_tilde)?;
    Ok(FitResult {
        model,
        constrained,
        multiplier,
        condition_estimate: lam_max / lam_min,
        dropped_directions: dropped,
    })
}

/// One hypothesis class in an SRM sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub k: usize,
    pub omega_plus: Vec<Vec<f64>>,
    #[serde(rename = "B_tilde")]
    pub b_tilde: f64,
    /// Sup-norm bound of the class; defaults to `B̃/2`.
    #[serde(default, rename = "B")]
    pub b: Option<f64>,
}

impl Candidate {
    pub fn d(&self) -> Option<usize> {
        self.omega_plus.first().map(Vec::len)
    }

    /// `|Ω|`, `K` and the budgets, as the bound evaluators need them.
    pub fn class_params(&self, d: usize) -> ClassParams {
        let k: f64 = (0..d)
            .map(|i| {
                self.omega_plus
                    .iter()
                    .map(|w| w[i].abs())
                    .fold(0.0, f64::max)
            })
            .sum();
        ClassParams {
            b: self.b.unwrap_or(self.b_tilde / 2.0),
            b_tilde: self.b_tilde,
            n_omega: (2 * self.omega_plus.len() + 1) as f64,
            k: Some(k),
            d,
        }
    }
}

/// `g(candidate, m, δ)`.
pub type BoundFamily<'a> = dyn Fn(&Candidate, usize, f64) -> Result<f64> + Sync + 'a;

/// The explicit-constant bound of `route` for a candidate's class.
pub fn encoding_bound_family(d: usize, loss: LossSpec, route: Route) -> impl Fn(&Candidate, usize, f64) -> Result<f64> + Sync {
    move |c: &Candidate, m: usize, delta: f64| {
        BoundEvaluator::new(&c.class_params(d), &loss, &DudleyConfig::default())?.value(route, m as f64, delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrmRow {
    /// Hyper-parameters of the row; one entry for single-family SRM.
    pub k: Vec<usize>,
    pub empirical_risk: Option<f64>,
    pub bound_value: Option<f64>,
    pub total: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrmResult {
    pub rows: Vec<SrmRow>,
    pub k_opt: Vec<usize>,
    pub selected_index: usize,
    pub selected: GtpModel,
}

fn srm_core<B>(
    keys: Vec<Vec<usize>>,
    candidates: &[&Candidate],
    s: &DataSet,
    loss: &LossSpec,
    bound: B,
) -> Result<SrmResult>
where
    B: Fn(&Candidate) -> Result<f64> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::validation("need at least one candidate"));
    }
    check_nonempty(s)?;
    let fitted: Vec<Result<(GtpModel, f64, f64)>> = candidates
        .par_iter()
        .map(|c| {
            let fit = fit_gtp(s.d, c.omega_plus.clone(), c.b_tilde, s)?;
            let risk = empirical_risk(&fit.model, s, loss)?;
            let g = bound(c)?;
            Ok((fit.model, risk, g))
        })
        .collect();
    let mut rows = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    let mut first_error = None;
    for (i, (res, key)) in fitted.iter().zip(&keys).enumerate() {
        match res {
            Ok((_, risk, g)) => {
                let total = risk + g;
                rows.push(SrmRow {
                    k: key.clone(),
                    empirical_risk: Some(*risk),
                    bound_value: Some(*g),
                    total: Some(total),
                    error: None,
                });
                let better = match best {
                    None => true,
                    Some((j, t)) => total < t || (total == t && key < &keys[j]),
                };
                if better {
                    best = Some((i, total));
                }
            }
            Err(e) => {
                first_error.get_or_insert_with(|| e.clone());
                rows.push(SrmRow {
                    k: key.clone(),
                    empirical_risk: None,
                    bound_value: None,
                    total: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let (i, _) = match best {
        Some(b) => b,
        None => return Err(first_error.expect("every row failed")),
    };
    let selected = fitted[i].as_ref().expect("selected row succeeded").0.clone();
    Ok(SrmResult {
        rows,
        k_opt: keys[i].clone(),
        selected_index: i,
        selected,
    })
}

/// `k_opt = argmin_k R̂_S(h_k) + g(k, m, δ)`, smallest `k` on ties. Rows whose
/// fit or bound fails are kept with their error and skipped.
pub fn srm_select(
    candidates: &[Candidate],
    s: &DataSet,
    delta: f64,
    loss: &LossSpec,
    bound: &BoundFamily<'_>,
) -> Result<SrmResult> {
    let keys = candidates.iter().map(|c| vec![c.k]).collect();
    let refs: Vec<&Candidate> = candidates.iter().collect();
    let m = s.len();
    srm_core(keys, &refs, s, loss, |c| bound(c, m, delta))
}

/// A candidate indexed by two hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiCandidate {
    pub k1: usize,
    pub k2: usize,
    pub candidate: Candidate,
}

/// SRM with the bound `min(g1(δ/2), g2(δ/2))` per candidate.
pub fn srm_multi(
    candidates: &[MultiCandidate],
    g1: &BoundFamily<'_>,
    g2: &BoundFamily<'_>,
    s: &DataSet,
    delta: f64,
    loss: &LossSpec,
) -> Result<SrmResult> {
    let keys = candidates.iter().map(|c| vec![c.k1, c.k2]).collect();
    let refs: Vec<&Candidate> = candidates.iter().map(|c| &c.candidate).collect();
    let m = s.len();
    let half = delta / 2.0;
    srm_core(keys, &refs, s, loss, |c| Ok(g1(c, m, half)?.min(g2(c, m, half)?)))
}

/// Settings for repeated SRM runs on fresh samples.
#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub target: GtpModel,
    pub noise_sigma: f64,
    pub m: usize,
    pub delta: f64,
    pub loss: LossSpec,
    pub route: Route,
    pub n_trials: usize,
    pub n_eval: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageTrial {
    pub k_opt: usize,
    pub empirical_risk: f64,
    pub gap: f64,
    pub bound: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trials: Vec<CoverageTrial>,
    /// Fraction of trials whose selected model has gap ≤ its bound.
    pub coverage: f64,
    pub max_gap_to_bound: f64,
}

/// Trial `t` draws training data with seed `(seed, 2t)` and evaluation data
/// with `(seed, 2t+1)`, so trials are independent and reproducible.
pub fn coverage_experiment(candidates: &[Candidate], cfg: &CoverageConfig) -> Result<CoverageReport> {
    if cfg.n_trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let d = cfg.target.d();
    // g depends on the class, m and δ only, not on the sample.
    let family = encoding_bound_family(d, cfg.loss, cfg.route);
    let bounds: Vec<f64> = candidates
        .iter()
        .map(|c| family(c, cfg.m, cfg.delta))
        .collect::<Result<_>>()?;
    let lookup = |c: &Candidate, _m: usize, _d: f64| -> Result<f64> {
        let i = candidates.iter().position(|x| x.k == c.k).expect("known candidate");
        Ok(bounds[i])
    };
    let sampler = TargetSampler {
        target: cfg.target.clone(),
        noise_sigma: cfg.noise_sigma,
    };
    let trials: Vec<CoverageTrial> = (0..cfg.n_trials)
        .map(|t| {
            let train_seed = rng::derive_seed(cfg.seed, 2 * t as u64);
            let eval_seed = rng::derive_seed(cfg.seed, 2 * t as u64 + 1);
            let s = synth_data(&cfg.target, cfg.noise_sigma, cfg.m, train_seed, &XDistribution::Uniform)?;
            let res = srm_select(candidates, &s, cfg.delta, &cfg.loss, &lookup)?;
            let row = &res.rows[res.selected_index];
            let risk = row.empirical_risk.expect("selected row succeeded");
            let bound = row.bound_value.expect("selected row succeeded");
            let truth = estimate_true_risk(&res.selected, &sampler, cfg.n_eval, eval_seed, &cfg.loss)?;
            let gap = truth.mean - risk;
            Ok(CoverageTrial {
                k_opt: res.k_opt[0],
                empirical_risk: risk,
                gap,
                bound,
                covered: gap <= bound,
            })
        })
        .collect::<Result<_>>()?;
    let covered = trials.iter().filter(|t| t.covered).count();
    Ok(CoverageReport {
        coverage: covered as f64 / trials.len() as f64,
        max_gap_to_bound: trials.iter().map(|t| t.gap / t.bound).fold(f64::NEG_INFINITY, f64::max),
        trials,
    })
}
