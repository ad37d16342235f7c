//! Generalization bounds for encoding-dependent model classes, sample-size
//! inversion and the union-bound combiner.
//!
//! All constants are the explicit ones from the underlying proofs; nothing is
//! dropped into O-notation.

use serde::{Deserialize, Serialize};

use crate::complexity::{bound_min, bound_v2, DudleyConfig, DudleyTable};
use crate::encoding::{
    bound_klocal_worstcase, bound_pauli, bound_repeated, max_positive_differences, omega_total_capped,
    EncodingStrategy, DEFAULT_CARDINALITY_CAP,
};
use crate::error::{Error, Result};
use crate::operators::{difference_set, eigenvalues, HamiltonianSpec, DEFAULT_DEDUP_TOL, DEFAULT_RECONSTRUCTION_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `min(|y − z|, c)`.
    #[default]
    ClippedAbsolute,
    /// `min((y − z)², c)`.
    ClippedSquared,
}

/// A bounded loss with values in `[0, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub kind: LossKind,
    pub c: f64,
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec {
            kind: LossKind::ClippedAbsolute,
            c: 1.0,
        }
    }
}

impl LossSpec {
    pub fn new(kind: LossKind, c: f64) -> Result<Self> {
        let l = LossSpec { kind, c };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_finite() && self.c > 0.0 {
            Ok(())
        } else {
            Err(Error::validation("loss bound c must be positive and finite"))
        }
    }

    /// Lipschitz constant of `z ↦ ℓ(y, z)`. The clipped square only grows
    /// while `|y − z| ≤ √c`, where its slope is at most `2√c`.
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            LossKind::ClippedAbsolute => 1.0,
            LossKind::ClippedSquared => 2.0 * self.c.sqrt(),
        }
    }

    pub fn eval(&self, y: f64, z: f64) -> f64 {
        match self.kind {
            LossKind::ClippedAbsolute => (y - z).abs().min(self.c),
            LossKind::ClippedSquared => (y - z).powi(2).min(self.c),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("δ must lie in (0, 1), got {delta}")))
    }
}

/// `3c√(log(2/δ)/(2m))`.
pub fn confidence_term(c: f64, m: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(m >= 1.0) {
        return Err(Error::validation("m must be at least 1"));
    }
    Ok(3.0 * c * ((2.0 / delta).ln() / (2.0 * m)).sqrt())
}

/// `2·L·rad + 3c√(log(2/δ)/(2m))`.
pub fn gen_gap_bound_rademacher(rad: f64, loss: &LossSpec, m: usize, delta: f64) -> Result<f64> {
    loss.validate()?;
    if !(rad.is_finite() && rad >= 0.0) {
        return Err(Error::validation("Rademacher complexity must be finite and ≥ 0"));
    }
    Ok(2.0 * loss.lipschitz() * rad + confidence_term(loss.c, m as f64, delta)?)
}

/// Covering route: `2·L·dudley(B, B̃, |Ω|, m) + 3c√(log(2/δ)/(2m))`.
pub fn gen_gap_bound_covering(
    b: f64,
    b_tilde: f64,
    n_omega: usize,
    loss: &LossSpec,
    m: usize,
    delta: f64,
) -> Result<f64> {
    let class = ClassParams {
        b,
        b_tilde,
        n_omega: n_omega as f64,
        k: None,
        d: 1,
    };
    BoundEvaluator::new(&class, loss, &DudleyConfig::default())?.value(Route::Covering, m as f64, delta)
}

/// Everything the two routes need to know about a model class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassParams {
    /// Sup-norm bound on the model outputs.
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B_tilde")]
    pub b_tilde: f64,
    /// `|Ω|` or an upper bound on it.
    pub n_omega: f64,
    /// `K = Σ K_i`, when known.
    #[serde(default)]
    pub k: Option<f64>,
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Rademacher,
    Covering,
    /// The smaller of the two.
    Best,
}

/// Evaluates both routes for one class at any `m` and `δ`.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    class: ClassParams,
    loss: LossSpec,
    dudley: DudleyTable,
}

impl BoundEvaluator {
    pub fn new(class: &ClassParams, loss: &LossSpec, cfg: &DudleyConfig) -> Result<Self> {
        loss.validate()?;
        if class.d == 0 {
            return Err(Error::validation("d must be at least 1"));
        }
        if !(class.n_omega >= 1.0) {
            return Err(Error::validation("|Ω| must be at least 1"));
        }
        Ok(BoundEvaluator {
            class: *class,
            loss: *loss,
            dudley: DudleyTable::new(class.b, class.b_tilde, class.n_omega, cfg)?,
        })
    }

    /// Analytic Rademacher bound: `min(v1, v2)` when `K` is known, else `v2`.
    pub fn rademacher_complexity(&self, m: f64) -> Result<f64> {
        let c = &self.class;
        match c.k {
            Some(k) => bound_min(k, c.b_tilde, c.n_omega, c.d, m),
            None if c.n_omega >= 2.0 => bound_v2(c.b_tilde, c.n_omega, m),
            None => bound_min(0.0, c.b_tilde, c.n_omega, c.d, m),
        }
    }

    pub fn dudley_complexity(&self, m: f64) -> Result<f64> {
        self.dudley.bound(m)
    }

    pub fn value(&self, route: Route, m: f64, delta: f64) -> Result<f64> {
        let conf = confidence_term(self.loss.c, m, delta)?;
        let l2 = 2.0 * self.loss.lipschitz();
        Ok(match route {
            Route::Rademacher => l2 * self.rademacher_complexity(m)? + conf,
            Route::Covering => l2 * self.dudley_complexity(m)? + conf,
            Route::Best => {
                l2 * self.rademacher_complexity(m)?.min(self.dudley_complexity(m)?) + conf
            }
        })
    }
}

/// Largest sample size the inversion will consider.
pub const MAX_SAMPLE_SIZE: u64 = 1 << 52;

/// Smallest `m` with `g(m) ≤ ε` for a nonincreasing `g`, by doubling and then
/// bisection. The result satisfies `g(m) ≤ ε < g(m − 1)`.
pub fn invert_sample_size<G>(epsilon: f64, mut g: G) -> Result<u64>
where
    G: FnMut(u64) -> Result<f64>,
{
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::validation("target gap must be positive"));
    }
    let mut prev = g(1)?;
    if prev <= epsilon {
        return Ok(1);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    loop {
        let v = g(hi)?;
        if v > prev * (1.0 + 1e-12) {
            return Err(Error::Internal(format!(
                "bound increases in m: g({lo}) = {prev}, g({hi}) = {v}"
            )));
        }
        if v <= epsilon {
            break;
        }
        prev = v;
        lo = hi;
        hi *= 2;
        if hi > MAX_SAMPLE_SIZE {
            return Err(Error::Resource(format!(
                "no sample size up to {MAX_SAMPLE_SIZE} reaches a gap of {epsilon}"
            )));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if g(mid)? <= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at = g(hi)?;
    let before = g(hi - 1)?;
    if at > epsilon || before <= epsilon {
        return Err(Error::Internal(format!(
            "bound is not monotone in m near {hi}: g({hi}) = {at}, g({}) = {before}",
            hi - 1
        )));
    }
    Ok(hi)
}

/// Smallest `m` whose bound on the generalization gap is at most `ε`.
pub fn sample_size_for_gap(
    epsilon: f64,
    delta: f64,
    class: &ClassParams,
    loss: &LossSpec,
    route: Route,
) -> Result<u64> {
    check_delta(delta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::validation(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let ev = BoundEvaluator::new(class, loss, &DudleyConfig::default())?;
    invert_sample_size(epsilon, |m| ev.value(route, m as f64, delta))
}

/// The minimum of several bounds, each evaluated by the caller at `δ/n`.
pub fn union_bound_combine(bounds: &[(String, f64)]) -> Result<(String, f64)> {
    bounds
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .ok_or_else(|| Error::validation("need at least one bound to combine"))
}

/// Encoding families with closed-form spectrum bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodingKind {
    /// Repeated Pauli-string encodings.
    #[serde(rename = "pauli")]
    Pauli,
    /// Repetitions of one Hamiltonian with `2T + 1` frequencies.
    #[serde(rename = "same_T", alias = "same_t")]
    SameT,
    /// Repetitions of one `κ`-local Hamiltonian.
    #[serde(rename = "same_klocal")]
    SameKlocal,
    /// Different `κ`-local Hamiltonians in every gate.
    #[serde(rename = "diff_klocal")]
    DiffKlocal,
}

/// Input to [`encoding_bound_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingBoundRequest {
    pub kind: EncodingKind,
    /// Total number of encoding gates, split as evenly as possible over `d`.
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(default, rename = "T")]
    pub t: Option<usize>,
    #[serde(default)]
    pub kappa: Option<u32>,
    /// Operator-norm bound on the observable; the model class is bounded by it.
    pub m_norm: f64,
    #[serde(default)]
    pub loss: LossSpec,
    pub m: usize,
    pub delta: f64,
    #[serde(default)]
    pub use_exact_omega: bool,
    /// Concrete Hamiltonian for the repeated kinds; enables exact enumeration
    /// and fixes `K`.
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    /// Accept `B̃ = 2√|Ω|·B` for non-integer spectra. This value is unproven.
    #[serde(default)]
    pub allow_conjecture: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: EncodingBoundRequest,
    pub gates_per_coordinate: Vec<usize>,
    /// `|Ω|` enumerated exactly, when requested and feasible.
    pub n_omega_exact: Option<u128>,
    /// Closed-form upper bound on `|Ω|`.
    pub n_omega_bound: f64,
    /// The value plugged into both routes.
    pub n_omega_used: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B_tilde")]
    pub b_tilde: f64,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub rademacher_complexity: f64,
    pub dudley_complexity: f64,
    pub rademacher_route: f64,
    pub covering_route: f64,
    pub chosen: f64,
    pub chosen_route: Route,
    pub exponential_regime: bool,
    pub conjectural: bool,
    pub notes: Vec<String>,
}

fn split_gates(n: usize, d: usize) -> Vec<usize> {
    (0..d).map(|i| n / d + usize::from(i < n % d)).collect()
}

/// Bounds for a model built from one encoding family, through both routes.
pub fn encoding_bound_report(req: &EncodingBoundRequest) -> Result<BoundReport> {
    if req.d == 0 {
        return Err(Error::validation("d must be at least 1"));
    }
    if !(req.m_norm.is_finite() && req.m_norm > 0.0) {
        return Err(Error::validation("observable norm must be positive"));
    }
    if req.m == 0 {
        return Err(Error::validation("m must be at least 1"));
    }
    check_delta(req.delta)?;
    req.loss.validate()?;

    let gates = split_gates(req.n, req.d);
    let mut notes = vec!["constants are those of the proofs, not of the O-form statements".to_string()];
    let hamiltonian = req.hamiltonian.as_ref().map(HamiltonianSpec::build).transpose()?;
    if hamiltonian.is_some() && matches!(req.kind, EncodingKind::Pauli | EncodingKind::DiffKlocal) {
        return Err(Error::validation(
            "a Hamiltonian may only be given for the repeated kinds same_T and same_klocal",
        ));
    }

    // Positive-difference count T and largest frequency of one gate, if known.
    let (t, max_gap, integer) = match (&req.kind, &hamiltonian) {
        (EncodingKind::Pauli, _) => (Some(1usize), Some(2.0), true),
        (_, Some(h)) => {
            let delta_set = difference_set(&eigenvalues(h, DEFAULT_RECONSTRUCTION_TOL)?, DEFAULT_DEDUP_TOL)?;
            (
                Some(delta_set.positive_count()),
                Some(delta_set.max_abs()),
                delta_set.integer.is_some(),
            )
        }
        (_, None) => (None, None, true),
    };

    let kappa = req.kappa;
    let per_coord_bound = |n_i: usize| -> Result<f64> {
        let n_i = n_i as u64;
        Ok(match req.kind {
            EncodingKind::Pauli => bound_pauli(n_i) as f64,
            EncodingKind::SameT => {
                let t = req.t.or(t).ok_or_else(|| Error::validation("same_T needs T or a Hamiltonian"))?;
                if n_i == 0 || t == 0 {
                    1.0
                } else {
                    bound_repeated(n_i, t as u64)?
                }
            }
            EncodingKind::SameKlocal => {
                let k = kappa.ok_or_else(|| Error::validation("same_klocal needs kappa"))?;
                let t = max_positive_differences(k);
                if n_i == 0 {
                    1.0
                } else {
                    bound_repeated(n_i, t)?
                }
            }
            EncodingKind::DiffKlocal => {
                let k = kappa.ok_or_else(|| Error::validation("diff_klocal needs kappa"))?;
                bound_klocal_worstcase(n_i, k, true)?
            }
        })
    };

    if let (EncodingKind::SameT, Some(given), Some(found)) = (req.kind, req.t, t) {
        if given != found {
            return Err(Error::validation(format!(
                "T = {given} given, but the Hamiltonian has {found} positive differences"
            )));
        }
    }
    if let (Some(k), Some(h)) = (kappa, &hamiltonian) {
        if h.dim() > 1usize << k {
            return Err(Error::validation(format!(
                "Hamiltonian of dimension {} is not {k}-local",
                h.dim()
            )));
        }
    }

    let n_omega_bound = gates
        .iter()
        .map(|&n| per_coord_bound(n))
        .product::<Result<f64>>()?;
    let exponential_regime = req.kind == EncodingKind::DiffKlocal;
    if exponential_regime {
        notes.push("different κ-local gates: |Ω| may grow exponentially in N".into());
    }

    let mut n_omega_exact = None;
    let mut k_total = max_gap.map(|g| g * req.n as f64);
    if req.n == 0 {
        k_total = Some(0.0);
    }
    if req.use_exact_omega {
        let strategy = match (&req.kind, &hamiltonian) {
            (EncodingKind::Pauli, _) => Some(EncodingStrategy::pauli_repeat(&gates, "Z")?),
            (_, Some(h)) => Some(EncodingStrategy::same_hamiltonian_repeat(
                std::sync::Arc::new(h.clone()),
                &gates,
            )?),
            _ => None,
        };
        match strategy {
            Some(s) => match omega_total_capped(&s, DEFAULT_DEDUP_TOL, DEFAULT_CARDINALITY_CAP) {
                Ok(om) => {
                    n_omega_exact = Some(om.len() as u128);
                    k_total = Some(om.k_total());
                }
                Err(Error::Resource(msg)) => {
                    notes.push(format!("exact enumeration skipped: {msg}"));
                }
                Err(e) => return Err(e),
            },
            None => notes.push("exact enumeration needs a concrete Hamiltonian".into()),
        }
    }
    let n_omega_used = n_omega_exact.map(|v| v as f64).unwrap_or(n_omega_bound);
    if k_total.is_none() {
        notes.push("largest frequency unknown: only the |Ω|-based Rademacher bound is used".into());
    }

    let b = req.m_norm;
    let (b_tilde, conjectural) = if integer {
        (2.0 * b, false)
    } else if req.allow_conjecture {
        notes.push("non-integer spectrum: B̃ = 2√|Ω|·B rests on an unproven conjecture".into());
        (2.0 * n_omega_used.sqrt() * b, true)
    } else {
        return Err(Error::Capability(
            "the coefficient budget B̃ = 2B is only justified for integer frequencies; \
             set allow_conjecture to use the conjectured B̃ = 2√|Ω|·B"
                .into(),
        ));
    };

    let class = ClassParams {
        b,
        b_tilde,
        n_omega: n_omega_used,
        k: k_total,
        d: req.d,
    };
    let ev = BoundEvaluator::new(&class, &req.loss, &DudleyConfig::default())?;
    let m = req.m as f64;
    let rademacher_route = ev.value(Route::Rademacher, m, req.delta)?;
    let covering_route = ev.value(Route::Covering, m, req.delta)?;
    let (chosen, chosen_route) = if rademacher_route <= covering_route {
        (rademacher_route, Route::Rademacher)
    } else {
        (covering_route, Route::Covering)
    };
    Ok(BoundReport {
        inputs: req.clone(),
        gates_per_coordinate: gates,
        n_omega_exact,
        n_omega_bound,
        n_omega_used,
        b,
        b_tilde,
        k: k_total,
        rademacher_complexity: ev.rademacher_complexity(m)?,
        dudley_complexity: ev.dudley_complexity(m)?,
        rademacher_route,
        covering_route,
        chosen,
        chosen_route,
        exponential_regime,
        conjectural,
        notes,
    })
}
