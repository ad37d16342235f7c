//! Rademacher complexity of the GTP class: exact per-σ supremum, Monte Carlo
//! estimates, analytic upper bounds, covering nets and the Dudley bound.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gtp::{coefficient_norm, feature_map_into, for_each_grid_point, random_ball_vector, GtpModel, SampleMode};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::rng;

/// Monte Carlo estimate of the empirical Rademacher complexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_sigma_samples: usize,
    pub seed: u64,
}

fn check_budget(b_tilde: f64) -> Result<()> {
    if b_tilde.is_finite() && b_tilde > 0.0 {
        Ok(())
    } else {
        Err(Error::validation("B̃ must be positive and finite"))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Row-major `m × (2|Ω₊|+1)` matrix of feature vectors.
fn feature_matrix(omega_plus: &[Vec<f64>], xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = 2 * omega_plus.len() + 1;
    let mut phi = vec![0.0; xs.len() * n];
    for (row, x) in phi.chunks_mut(n).zip(xs) {
        feature_map_into(omega_plus, x, row)?;
    }
    Ok(phi)
}

fn sup_from_features(phi: &[f64], n: usize, sigma: &[f64], b_tilde: f64) -> f64 {
    let m = sigma.len();
    let mut acc = vec![0.0; n];
    for (row, s) in phi.chunks(n).zip(sigma) {
        for (a, p) in acc.iter_mut().zip(row) {
            *a += s * p;
        }
    }
    b_tilde / m as f64 * coefficient_norm(&acc, 2.0).expect("p = 2 is valid")
}

/// `sup_f (1/m) Σ σ_i f(x_i) = (B̃/m)·‖Σ σ_i φ(x_i)‖₂` over the `B̃`-ball.
pub fn rademacher_sup_closed_form(
    omega_plus: &[Vec<f64>],
    b_tilde: f64,
    xs: &[Vec<f64>],
    sigma: &[f64],
) -> Result<f64> {
    check_budget(b_tilde)?;
    if xs.is_empty() || xs.len() != sigma.len() {
        return Err(Error::validation(format!(
            "need m ≥ 1 points and as many signs, got {} and {}",
            xs.len(),
            sigma.len()
        )));
    }
    let phi = feature_matrix(omega_plus, xs)?;
    Ok(sup_from_features(&phi, 2 * omega_plus.len() + 1, sigma, b_tilde))
}

/// Mean and standard error of the closed-form supremum over uniform σ.
/// Sample `s` draws its signs from stream `(seed, s)`, so the result does not
/// depend on how work is scheduled.
pub fn rademacher_mc(
    omega_plus: &[Vec<f64>],
    b_tilde: f64,
    xs: &[Vec<f64>],
    n_samples: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    check_budget(b_tilde)?;
    if n_samples == 0 {
        return Err(Error::validation("need at least one σ sample"));
    }
    if xs.is_empty() {
        return Err(Error::validation("need at least one sample point"));
    }
    let n = 2 * omega_plus.len() + 1;
    let phi = feature_matrix(omega_plus, xs)?;
    let m = xs.len();
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |sigma, s| {
                let mut r = rng::stream(seed, s as u64);
                for v in sigma.iter_mut() {
                    *v = if r.random::<bool>() { 1.0 } else { -1.0 };
                }
                sup_from_features(&phi, n, sigma, b_tilde)
            },
        )
        .collect();
    let k = n_samples as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std_error = if n_samples > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    Ok(RademacherEstimate {
        mean,
        std_error,
        n_sigma_samples: n_samples,
        seed,
    })
}

/// `(2π·max{K, B̃√|Ω₊|}·√(2 log 2d) + max{π, B̃}) / √m`.
pub fn rademacher_bound_v1(k: f64, b_tilde: f64, n_omega_plus: usize, d: usize, m: usize) -> Result<f64> {
    bound_v1(k, b_tilde, n_omega_plus as f64, d, m as f64)
}

/// `B̃/√m + 2B̃√|Ω|·√(2 log|Ω|)/√m`.
pub fn rademacher_bound_v2(b_tilde: f64, n_omega: usize, m: usize) -> Result<f64> {
    bound_v2(b_tilde, n_omega as f64, m as f64)
}

/// `min(v1, v2)`; only `v1` applies when `|Ω| = 1`.
pub fn rademacher_bound_min(k: f64, b_tilde: f64, n_omega: usize, d: usize, m: usize) -> Result<f64> {
    if n_omega == 0 || n_omega.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "a symmetric frequency set has odd cardinality, got {n_omega}"
        )));
    }
    bound_min(k, b_tilde, n_omega as f64, d, m as f64)
}

// The variants below take cardinalities as reals so that closed-form bounds
// far beyond the integer range can be plugged in.

pub(crate) fn bound_v1(k: f64, b_tilde: f64, n_omega_plus: f64, d: usize, m: f64) -> Result<f64> {
    check_budget(b_tilde)?;
    if !(k.is_finite() && k >= 0.0) || d == 0 || !(m >= 1.0) {
        return Err(Error::validation("need K ≥ 0, d ≥ 1 and m ≥ 1"));
    }
    let lead = k.max(b_tilde * n_omega_plus.sqrt());
    let v = 2.0 * PI * lead * (2.0 * (2.0 * d as f64).ln()).sqrt() + PI.max(b_tilde);
    Ok(v / m.sqrt())
}

pub(crate) fn bound_v2(b_tilde: f64, n_omega: f64, m: f64) -> Result<f64> {
    check_budget(b_tilde)?;
    if !(n_omega >= 2.0) {
        return Err(Error::Domain(format!(
            "this bound needs |Ω| ≥ 2, got {n_omega}"
        )));
    }
    if !(m >= 1.0) {
        return Err(Error::validation("m must be at least 1"));
    }
    let sm = m.sqrt();
    Ok(b_tilde / sm + 2.0 * b_tilde * n_omega.sqrt() * (2.0 * n_omega.ln()).sqrt() / sm)
}

pub(crate) fn bound_min(k: f64, b_tilde: f64, n_omega: f64, d: usize, m: f64) -> Result<f64> {
    let v1 = bound_v1(k, b_tilde, ((n_omega - 1.0) / 2.0).max(0.0), d, m)?;
    if n_omega < 2.0 {
        return Ok(v1);
    }
    Ok(v1.min(bound_v2(b_tilde, n_omega, m)?))
}

/// `r·√(2 log|A|) / N`.
pub fn massart_bound(r: f64, set_size: usize, n: usize) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) || set_size == 0 || n == 0 {
        return Err(Error::validation("need r ≥ 0, |A| ≥ 1, N ≥ 1"));
    }
    Ok(r * (2.0 * (set_size as f64).ln()).sqrt() / n as f64)
}

/// `B̃|Ω|^{1/q}/√m` for a `p`-norm budget (`1/p + 1/q = 1`), optionally times
/// `√(2 log(2|Ω|))` as a stand-in for the hidden logarithmic factor.
pub fn pnorm_rademacher_bound(b_tilde: f64, n_omega: usize, p: f64, m: usize, log_factor: bool) -> Result<f64> {
    check_budget(b_tilde)?;
    if p.is_nan() || p < 1.0 || n_omega == 0 || m == 0 {
        return Err(Error::validation("need p ≥ 1, |Ω| ≥ 1, m ≥ 1"));
    }
    let inv_q = 1.0 - 1.0 / p;
    let w = n_omega as f64;
    let mut v = b_tilde * w.powf(inv_q) / (m as f64).sqrt();
    if log_factor {
        v *= (2.0 * (2.0 * w).ln()).sqrt();
    }
    Ok(v)
}

/// Sup-norm covering-number bound for the GTP class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringBound {
    /// `(6B̃√|Ω|/ε)^{|Ω|}`; infinite when it overflows.
    pub value: f64,
    pub log2: f64,
    /// `(3B̃/ε̃)^{|Ω|}` with `ε̃ = ε/√|Ω|`, the coefficient-space net size.
    pub inner_value: f64,
    pub inner_log2: f64,
}

pub fn covering_number_bound(b_tilde: f64, n_omega: usize, epsilon: f64) -> Result<CoveringBound> {
    check_budget(b_tilde)?;
    check_positive("ε", epsilon)?;
    if n_omega == 0 {
        return Err(Error::validation("|Ω| must be at least 1"));
    }
    let w = n_omega as f64;
    let log2 = w * (6.0 * b_tilde * w.sqrt() / epsilon).log2();
    let eps_t = epsilon / w.sqrt();
    let inner_log2 = w * (3.0 * b_tilde / eps_t).log2();
    Ok(CoveringBound {
        value: log2.exp2(),
        log2,
        inner_value: inner_log2.exp2(),
        inner_log2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverNorm {
    SupGrid,
    Empirical2,
}

/// A finite set of class members, stored as coefficient vectors.
#[derive(Debug, Clone)]
pub struct CoverNet {
    d: usize,
    omega_plus: Vec<Vec<f64>>,
    b_tilde: f64,
    members: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub norm: CoverNorm,
}

/// Default cap on the number of grid points [`construct_cover`] may visit.
pub const DEFAULT_COVER_CAP: u128 = 2_000_000;

impl CoverNet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_coefficients(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn member(&self, i: usize) -> Result<GtpModel> {
        GtpModel::from_coefficients(self.d, self.omega_plus.clone(), &self.members[i], self.b_tilde)
    }

    /// Member nearest to `coeffs` in coefficient 2-norm, with that distance.
    pub fn nearest(&self, coeffs: &[f64]) -> (usize, f64) {
        self.members
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d2: f64 = c.iter().zip(coeffs).map(|(p, q)| (p - q).powi(2)).sum();
                (i, d2.sqrt())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nets are nonempty")
    }
}

/// Net of the `B̃`-ball whose members are within `ε` of every class member in
/// sup norm: a cubic grid of spacing `2ε̃/√n` (`n = |Ω|` coefficients,
/// `ε̃ = ε/√n`), restricted to radius `B̃ + ε̃` and projected onto the ball.
pub fn construct_cover(
    d: usize,
    omega_plus: Vec<Vec<f64>>,
    b_tilde: f64,
    epsilon: f64,
    cap: u128,
) -> Result<CoverNet> {
    check_budget(b_tilde)?;
    check_positive("ε", epsilon)?;
    let n = 2 * omega_plus.len() + 1;
    let eps_t = epsilon / (n as f64).sqrt();
    let mut net = CoverNet {
        d,
        omega_plus,
        b_tilde,
        members: Vec::new(),
        epsilon,
        norm: CoverNorm::SupGrid,
    };
    if eps_t >= b_tilde {
        net.members.push(vec![0.0; n]);
        return Ok(net);
    }
    let h = 2.0 * eps_t / (n as f64).sqrt();
    let k = (b_tilde / h).ceil() as i64;
    let side = (2 * k + 1) as u128;
    let required = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::Resource(format!(
            "cover grid needs {side}^{n} = {required} points, cap is {cap}"
        )));
    }
    let keep = b_tilde + eps_t;
    let mut idx = vec![-k; n];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        let r = coefficient_norm(&p, 2.0)?;
        if r <= keep {
            let p = if r > b_tilde {
                p.iter().map(|x| x * b_tilde / r).collect()
            } else {
                p
            };
            net.members.push(p);
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(net);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] <= k {
                break;
            }
            idx[j] = -k;
        }
    }
}

/// For each of `n_samples` random class members, the sup-grid distance to its
/// coefficient-nearest net member. The largest of these upper-bounds the
/// covering radius over the sample.
pub fn cover_radius_check(
    net: &CoverNet,
    n_samples: usize,
    grid_counts: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    let n = 2 * net.omega_plus.len() + 1;
    (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            let c = random_ball_vector(&mut r, n, net.b_tilde, SampleMode::Ball);
            let (i, _) = net.nearest(&c);
            let diff: Vec<f64> = c.iter().zip(&net.members[i]).map(|(p, q)| p - q).collect();
            let g = GtpModel::from_coefficients(net.d, net.omega_plus.clone(), &diff, 2.0 * net.b_tilde)?;
            sup_abs_on_grid(&g, grid_counts)
        })
        .collect()
}

fn sup_abs_on_grid(g: &GtpModel, counts: &[usize]) -> Result<f64> {
    let mut best = 0.0f64;
    for_each_grid_point(g.d(), counts, |x| {
        best = best.max(g.evaluate(x).expect("grid matches model").abs());
    })?;
    Ok(best)
}

/// Cutoff grid and quadrature settings for [`dudley_rademacher_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DudleyConfig {
    pub quadrature: QuadratureConfig,
    /// Number of equispaced cutoffs in `[0, B/2)`.
    pub cutoffs: usize,
}

impl Default for DudleyConfig {
    fn default() -> Self {
        DudleyConfig {
            quadrature: QuadratureConfig::default(),
            cutoffs: 200,
        }
    }
}

/// `√(|Ω|(log(3B̃) + ½ log|Ω| + log(2/β)))`, clamped at zero.
pub fn dudley_integrand(b_tilde: f64, n_omega: f64, beta: f64) -> f64 {
    (n_omega * ((3.0 * b_tilde).ln() + 0.5 * n_omega.ln() + (2.0 / beta).ln()))
        .max(0.0)
        .sqrt()
}

/// `∫_ε^B` of [`dudley_integrand`]. The substitution `β = B·e^{−s}` removes
/// the endpoint singularity at `β = 0`.
pub fn dudley_integral(b: f64, b_tilde: f64, n_omega: f64, epsilon: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_positive("B", b)?;
    check_budget(b_tilde)?;
    if !(n_omega >= 1.0) || !(0.0..=b).contains(&epsilon) {
        return Err(Error::validation("need |Ω| ≥ 1 and 0 ≤ ε ≤ B"));
    }
    // Past s = 60 the integrand is below B·e^{-60}·O(√s).
    let s_max = if epsilon > 0.0 { (b / epsilon).ln().min(60.0) } else { 60.0 };
    integrate(
        |s| {
            let beta = b * (-s).exp();
            dudley_integrand(b_tilde, n_omega, beta) * beta
        },
        0.0,
        s_max,
        cfg,
    )
}

/// Entropy integrals at every grid cutoff; these do not depend on `m`, so one
/// table serves any number of sample sizes.
#[derive(Debug, Clone)]
pub struct DudleyTable {
    b: f64,
    b_tilde: f64,
    n_omega: f64,
    cfg: QuadratureConfig,
    cutoffs: Vec<(f64, f64)>,
}

impl DudleyTable {
    pub fn new(b: f64, b_tilde: f64, n_omega: f64, cfg: &DudleyConfig) -> Result<Self> {
        check_positive("B", b)?;
        if cfg.cutoffs == 0 {
            return Err(Error::validation("need at least one cutoff"));
        }
        let cutoffs = (0..cfg.cutoffs)
            .map(|j| {
                let eps = 0.5 * b * j as f64 / cfg.cutoffs as f64;
                Ok((eps, dudley_integral(b, b_tilde, n_omega, eps, &cfg.quadrature)?))
            })
            .collect::<Result<_>>()?;
        Ok(DudleyTable {
            b,
            b_tilde,
            n_omega,
            cfg: cfg.quadrature,
            cutoffs,
        })
    }

    /// `min_ε 4ε + (12/√m)∫_ε^B √(log N(β)) dβ` over the cutoff grid plus the
    /// stationary point of the (convex) objective when it lies in `[0, B/2)`.
    pub fn bound(&self, m: f64) -> Result<f64> {
        if !(m >= 1.0) {
            return Err(Error::validation("m must be at least 1"));
        }
        let scale = 12.0 / m.sqrt();
        let mut best = self
            .cutoffs
            .iter()
            .map(|(eps, integral)| 4.0 * eps + scale * integral)
            .fold(f64::INFINITY, f64::min);
        // 4 = (12/√m)·g(ε*) ⇔ |Ω|(log 3B̃ + ½log|Ω| + log 2/ε*) = m/9.
        let w = self.n_omega;
        let star = 2.0 * ((3.0 * self.b_tilde).ln() + 0.5 * w.ln() - m / (9.0 * w)).exp();
        if star > 0.0 && star < 0.5 * self.b {
            let v = 4.0 * star + scale * dudley_integral(self.b, self.b_tilde, w, star, &self.cfg)?;
            best = best.min(v);
        }
        Ok(best)
    }
}

/// Dudley-integral bound on the empirical Rademacher complexity of a class
/// with sup norm at most `B` and `|Ω|` frequencies under budget `B̃`.
pub fn dudley_rademacher_bound(b: f64, b_tilde: f64, n_omega: usize, m: usize, cfg: &DudleyConfig) -> Result<f64> {
    if n_omega == 0 {
        return Err(Error::validation("|Ω| must be at least 1"));
    }
    DudleyTable::new(b, b_tilde, n_omega as f64, cfg)?.bound(m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtp::feature_map;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(m: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| (0..d).map(|_| r.random::<f64>() * 2.0 * PI).collect())
            .collect()
    }

    #[test]
    fn closed_form_constant_class() {
        let v = rademacher_sup_closed_form(&[], 1.0, &[vec![0.3]], &[1.0]).unwrap();
        assert_eq!(v, 0.5);
        assert!(rademacher_sup_closed_form(&[], 1.0, &[vec![0.3]], &[1.0, 1.0]).is_err());
    }

    // Oracle: grid search over the 3-dimensional coefficient ball.
    #[test]
    fn closed_form_matches_grid_search() {
        let om = vec![vec![1.0]];
        let xs = random_points(5, 1, 1);
        let sigma = [1.0, -1.0, -1.0, 1.0, 1.0];
        let exact = rademacher_sup_closed_form(&om, 1.0, &xs, &sigma).unwrap();
        let feats: Vec<Vec<f64>> = xs.iter().map(|x| feature_map(&om, x).unwrap()).collect();
        let mut best = f64::NEG_INFINITY;
        let g = 46;
        for i in 0..=g {
            for j in 0..=g {
                for k in 0..=g {
                    let c = [
                        -1.0 + 2.0 * i as f64 / g as f64,
                        -1.0 + 2.0 * j as f64 / g as f64,
                        -1.0 + 2.0 * k as f64 / g as f64,
                    ];
                    let n = coefficient_norm(&c, 2.0).unwrap();
                    if n > 1.0 {
                        continue;
                    }
                    let val: f64 = feats
                        .iter()
                        .zip(&sigma)
                        .map(|(f, s)| s * f.iter().zip(&c).map(|(p, q)| p * q).sum::<f64>())
                        .sum::<f64>()
                        / 5.0;
                    best = best.max(val);
                }
            }
        }
        assert!(best <= exact + 1e-12);
        // grid step 2/46 in each of 3 coordinates
        let resolution = (2.0 / g as f64) * 3f64.sqrt();
        let max_feature = feats.iter().map(|f| coefficient_norm(f, 2.0).unwrap()).fold(0.0, f64::max);
        assert!(exact - best <= resolution * max_feature, "{exact} vs {best}");
    }

    #[test]
    fn mc_examples() {
        let e = rademacher_mc(&[], 1.5, &[vec![1.0]], 200, 4).unwrap();
        assert_eq!(e.mean, 0.75);
        assert_eq!(e.std_error, 0.0);

        let om = vec![vec![1.0], vec![2.0]];
        let xs = random_points(30, 1, 2);
        let a = rademacher_mc(&om, 1.0, &xs, 4000, 10).unwrap();
        let b = rademacher_mc(&om, 1.0, &xs, 4000, 11).unwrap();
        assert_eq!(a, rademacher_mc(&om, 1.0, &xs, 4000, 10).unwrap());
        assert!((a.mean - b.mean).abs() <= 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt());
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let om = vec![vec![1.0], vec![3.0]];
        let xs = random_points(20, 1, 3);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| rademacher_mc(&om, 2.0, &xs, 500, 8).unwrap());
        assert_eq!(single, rademacher_mc(&om, 2.0, &xs, 500, 8).unwrap());
    }

    #[test]
    fn v1_examples() {
        let v = rademacher_bound_v1(1.0, 1.0, 1, 1, 1).unwrap();
        assert!((v - (2.0 * PI * (2.0 * 2f64.ln()).sqrt() + PI)).abs() < 1e-12);
        let a = rademacher_bound_v1(3.0, 2.0, 4, 2, 10).unwrap();
        let b = rademacher_bound_v1(3.0, 2.0, 4, 2, 40).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn v2_examples() {
        let v = rademacher_bound_v2(1.0, 3, 1).unwrap();
        assert!((v - (1.0 + 2.0 * 3f64.sqrt() * (2.0 * 3f64.ln()).sqrt())).abs() < 1e-12);
        let a = rademacher_bound_v2(1.0, 7, 5).unwrap();
        assert!((rademacher_bound_v2(3.0, 7, 5).unwrap() - 3.0 * a).abs() < 1e-12);
        assert!((a / rademacher_bound_v2(1.0, 7, 20).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(rademacher_bound_v2(1.0, 1, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn min_examples() {
        let v1 = rademacher_bound_v1(1.0, 1.0, 1, 1, 10).unwrap();
        let v2 = rademacher_bound_v2(1.0, 3, 10).unwrap();
        let m = rademacher_bound_min(1.0, 1.0, 3, 1, 10).unwrap();
        assert_eq!(m, v1.min(v2));
        let big_d = rademacher_bound_min(1.0, 1.0, 3, 1_000_000, 10).unwrap();
        assert_eq!(big_d, v2);
        assert_eq!(
            rademacher_bound_min(1.0, 1.0, 1, 1, 10).unwrap(),
            rademacher_bound_v1(1.0, 1.0, 0, 1, 10).unwrap()
        );
    }

    #[test]
    fn massart_examples() {
        assert_eq!(massart_bound(3.0, 1, 4).unwrap(), 0.0);
        let m = 50usize;
        let v = massart_bound((m as f64).sqrt(), 7, m).unwrap();
        assert!((v - (2.0 * 7f64.ln()).sqrt() / (m as f64).sqrt()).abs() < 1e-12);
        assert_eq!(massart_bound(2.0, 7, 3).unwrap(), 2.0 * massart_bound(1.0, 7, 3).unwrap());
    }

    #[test]
    fn pnorm_reduces_to_sqrt_for_p2() {
        let v = pnorm_rademacher_bound(2.0, 9, 2.0, 4, false).unwrap();
        assert!((v - 2.0 * 3.0 / 2.0).abs() < 1e-12);
        assert!((pnorm_rademacher_bound(2.0, 9, 1.0, 4, false).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covering_examples() {
        let c = covering_number_bound(1.0, 1, 6.0).unwrap();
        assert_eq!(c.value, 1.0);
        let a = covering_number_bound(2.0, 5, 0.1).unwrap();
        let b = covering_number_bound(2.0, 5, 0.05).unwrap();
        assert!((b.value / a.value / 32.0 - 1.0).abs() < 1e-12);
        assert!((a.log2 - 5.0 * (6.0 * 2.0 * 5f64.sqrt() / 0.1).log2()).abs() < 1e-12);
        assert!(covering_number_bound(1.0, 3, 0.0).is_err());
    }

    #[test]
    fn metric_entropy_shape() {
        for &bt in &[2.0, 4.0, 8.0] {
            for &n in &[3usize, 9, 27, 81] {
                for &eps in &[0.1, 0.01, 0.001] {
                    let c = covering_number_bound(bt, n, eps).unwrap();
                    let w = n as f64;
                    let shape = w * (bt.ln() + w.ln() + (1.0 / eps).ln());
                    let ratio = c.log2 * 2f64.ln() / shape;
                    assert!(ratio <= 3.0, "ratio {ratio}");
                }
            }
        }
    }

    // Oracle: exhaustive 1-d check of the constant-function cover.
    #[test]
    fn cover_constant_class() {
        let net = construct_cover(1, vec![], 1.0, 0.25, DEFAULT_COVER_CAP).unwrap();
        let mut worst = 0.0f64;
        for i in 0..=20_000 {
            let a0 = -1.0 + 2.0 * i as f64 / 20_000.0;
            let d = net
                .member_coefficients()
                .iter()
                .map(|c| (a0 - c[0]).abs() / 2.0)
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        assert!(worst <= 0.25, "{worst}");
    }

    #[test]
    fn cover_trivial_and_cap() {
        let net = construct_cover(1, vec![vec![1.0]], 1.0, 2.0 * 3f64.sqrt(), DEFAULT_COVER_CAP).unwrap();
        assert_eq!(net.len(), 1);
        assert!(matches!(
            construct_cover(1, vec![vec![1.0], vec![2.0], vec![3.0]], 1.0, 0.01, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn cover_radius_three_coefficients() {
        let om = vec![vec![1.0]];
        let net = construct_cover(1, om, 1.0, 0.5, DEFAULT_COVER_CAP).unwrap();
        for c in net.member_coefficients() {
            assert!(coefficient_norm(c, 2.0).unwrap() <= 1.0 + 1e-12);
        }
        let dists = cover_radius_check(&net, 1000, &[5], 9).unwrap();
        assert!(dists.iter().all(|&x| x <= 0.5), "{:?}", dists.iter().fold(0.0f64, |a, b| a.max(*b)));
    }

    // Oracle: composite trapezoid on the substituted integrand.
    fn trapezoid_integral(b: f64, bt: f64, n: f64, eps: f64) -> f64 {
        let s_max = if eps > 0.0 { (b / eps).ln() } else { 60.0 };
        let steps = 2_000_000;
        let h = s_max / steps as f64;
        let f = |s: f64| {
            let beta = b * (-s).exp();
            dudley_integrand(bt, n, beta) * beta
        };
        let mut acc = 0.5 * (f(0.0) + f(s_max));
        for i in 1..steps {
            acc += f(i as f64 * h);
        }
        acc * h
    }

    #[test]
    fn dudley_integral_matches_trapezoid() {
        let cfg = QuadratureConfig::default();
        for &eps in &[0.0, 0.1, 0.45] {
            let q = dudley_integral(1.0, 1.0, 1.0, eps, &cfg).unwrap();
            let t = trapezoid_integral(1.0, 1.0, 1.0, eps);
            assert!((q - t).abs() < 1e-4, "{eps}: {q} vs {t}");
        }
    }

    #[test]
    fn dudley_bound_examples() {
        let cfg = DudleyConfig::default();
        // m = 1: the stationary point lies beyond B/2, so the last grid cutoff wins.
        let v = dudley_rademacher_bound(1.0, 1.0, 1, 1, &cfg).unwrap();
        let last = 0.5 * 199.0 / 200.0;
        let oracle = 4.0 * last + 12.0 * trapezoid_integral(1.0, 1.0, 1.0, last);
        assert!((v - oracle).abs() < 1e-4, "{v} vs {oracle}");
        let full = 12.0 * dudley_integral(1.0, 1.0, 1.0, 0.0, &cfg.quadrature).unwrap();
        assert!(v <= full);
        let a = dudley_rademacher_bound(1.0, 2.0, 9, 50, &cfg).unwrap();
        let b = dudley_rademacher_bound(1.0, 2.0, 9, 200, &cfg).unwrap();
        assert!(b <= a);
    }

    proptest! {
        #[test]
        fn sup_is_sign_symmetric(signs in prop::collection::vec(any::<bool>(), 1..20), seed in 0u64..100) {
            let sigma: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
            let neg: Vec<f64> = sigma.iter().map(|s| -s).collect();
            let xs = random_points(sigma.len(), 2, seed);
            let om = vec![vec![1.0, 0.0], vec![1.0, 2.0]];
            let a = rademacher_sup_closed_form(&om, 1.3, &xs, &sigma).unwrap();
            let b = rademacher_sup_closed_form(&om, 1.3, &xs, &neg).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn bounds_monotone(bt in 0.1f64..4.0, n in 1usize..40, m in 1usize..300, k in 0.0f64..20.0) {
            let n_omega = 2 * n + 1;
            let base = rademacher_bound_min(k, bt, n_omega, 2, m).unwrap();
            prop_assert!(rademacher_bound_min(k, bt * 1.5, n_omega, 2, m).unwrap() >= base);
            prop_assert!(rademacher_bound_min(k, bt, n_omega + 2, 2, m).unwrap() >= base);
            prop_assert!(rademacher_bound_min(k, bt, n_omega, 2, m + 7).unwrap() <= base);
            let c = covering_number_bound(bt, n_omega, 0.1).unwrap();
            prop_assert!(covering_number_bound(bt * 1.5, n_omega, 0.1).unwrap().log2 >= c.log2);
            prop_assert!(covering_number_bound(bt, n_omega + 2, 0.1).unwrap().log2 >= c.log2);
        }
    }
}
