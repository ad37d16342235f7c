//! Data-encoding strategies and the frequency spectra they generate.
//!
//! A strategy assigns to every data coordinate an ordered list of encoding
//! Hamiltonians. Each Hamiltonian contributes its eigenvalue-difference set
//! along its coordinate axis, and the full spectrum is the Minkowski sum of
//! all contributions.
//!
//! Frequencies are stored as integer keys. On the exact path the key is the
//! frequency itself; on the real path it is the frequency rounded to a grid of
//! spacing `tol`. Sums of keys are exact either way, and negation symmetry
//! survives the rounding.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    difference_set, eigenvalues, make_diagonal, pauli, HamiltonianSpec, HermitianOperator,
    DEFAULT_DEDUP_TOL, DEFAULT_RECONSTRUCTION_TOL,
};

/// Default cap on the number of frequency vectors any enumeration may produce.
pub const DEFAULT_CARDINALITY_CAP: usize = 10_000_000;

/// Per-coordinate lists of encoding Hamiltonians.
#[derive(Debug, Clone)]
pub struct EncodingStrategy {
    per_coordinate: Vec<Vec<Arc<HermitianOperator>>>,
}

impl EncodingStrategy {
    pub fn new(per_coordinate: Vec<Vec<Arc<HermitianOperator>>>) -> Result<Self> {
        if per_coordinate.is_empty() {
            return Err(Error::validation("data dimension must be at least 1"));
        }
        Ok(EncodingStrategy { per_coordinate })
    }

    /// `n[i]` copies of the Pauli string `labels` on coordinate `i`.
    pub fn pauli_repeat(n: &[usize], labels: &str) -> Result<Self> {
        let op = Arc::new(pauli(labels)?);
        Self::same_hamiltonian_repeat(op, n)
    }

    /// `n[i]` copies of the same operator on coordinate `i`.
    pub fn same_hamiltonian_repeat(op: Arc<HermitianOperator>, n: &[usize]) -> Result<Self> {
        Self::new(n.iter().map(|&k| vec![op.clone(); k]).collect())
    }

    pub fn d(&self) -> usize {
        self.per_coordinate.len()
    }

    pub fn coordinate(&self, i: usize) -> &[Arc<HermitianOperator>] {
        &self.per_coordinate[i]
    }

    /// `N^(i)` for every coordinate.
    pub fn gate_counts(&self) -> Vec<usize> {
        self.per_coordinate.iter().map(Vec::len).collect()
    }

    /// `N = Σ N^(i)`.
    pub fn total_gates(&self) -> usize {
        self.per_coordinate.iter().map(Vec::len).sum()
    }

    /// True when every operator on coordinate `i` has a declared integer spectrum.
    pub fn integer_declared(&self, i: usize) -> bool {
        self.per_coordinate[i]
            .iter()
            .all(|h| h.integer_spectrum().is_some())
    }

    pub fn all_integer(&self) -> bool {
        (0..self.d()).all(|i| self.integer_declared(i))
    }
}

/// Symmetric set of `d`-dimensional frequency vectors containing zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    d: usize,
    /// Sorted lexicographically, deduplicated.
    keys: Vec<Vec<i64>>,
    /// `None` for exact integer frequencies, otherwise the grid spacing.
    scale: Option<f64>,
}

impl FrequencySet {
    /// The set `{0}` in dimension `d`.
    pub fn zero(d: usize) -> Self {
        FrequencySet {
            d,
            keys: vec![vec![0; d]],
            scale: None,
        }
    }

    /// Builds an exact integer set, checking symmetry and zero membership.
    pub fn from_integer_vectors(d: usize, vectors: Vec<Vec<i64>>) -> Result<Self> {
        Self::from_keys(d, vectors, None)
    }

    /// Builds a real set by rounding onto a grid of spacing `tol`.
    pub fn from_real_vectors(d: usize, vectors: &[Vec<f64>], tol: f64) -> Result<Self> {
        check_tol(tol)?;
        let keys = vectors
            .iter()
            .map(|v| v.iter().map(|&x| to_key(x, tol)).collect())
            .collect();
        Self::from_keys(d, keys, Some(tol))
    }

    /// `{δ·e_axis : δ ∈ values}` on the exact path. `values` must be symmetric.
    pub fn axis_integers(axis: usize, d: usize, values: &[i64]) -> Result<Self> {
        if axis >= d {
            return Err(Error::validation(format!("axis {axis} out of range for d={d}")));
        }
        let vecs = values
            .iter()
            .map(|&v| {
                let mut e = vec![0; d];
                e[axis] = v;
                e
            })
            .collect();
        Self::from_integer_vectors(d, vecs)
    }

    fn from_keys(d: usize, mut keys: Vec<Vec<i64>>, scale: Option<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("dimension must be at least 1"));
        }
        if keys.iter().any(|k| k.len() != d) {
            return Err(Error::validation("frequency vector of wrong dimension"));
        }
        keys.sort();
        keys.dedup();
        let set = FrequencySet { d, keys, scale };
        set.check_symmetry()?;
        Ok(set)
    }

    fn check_symmetry(&self) -> Result<()> {
        if self.keys.binary_search(&vec![0; self.d]).is_err() {
            return Err(Error::validation("frequency set must contain the zero vector"));
        }
        for k in &self.keys {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            if self.keys.binary_search(&neg).is_err() {
                return Err(Error::validation(format!(
                    "frequency set is not closed under negation (missing {:?})",
                    self.key_to_f64(&neg)
                )));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.scale.is_none()
    }

    /// Grid spacing on the real path.
    pub fn tolerance(&self) -> Option<f64> {
        self.scale
    }

    fn key_to_f64(&self, k: &[i64]) -> Vec<f64> {
        match self.scale {
            None => k.iter().map(|&x| x as f64).collect(),
            Some(s) => k.iter().map(|&x| x as f64 * s).collect(),
        }
    }

    /// Exact vectors on the integer path.
    pub fn integer_vectors(&self) -> Option<&[Vec<i64>]> {
        self.scale.is_none().then_some(self.keys.as_slice())
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.keys.iter().map(|k| self.key_to_f64(k)).collect()
    }

    pub fn contains(&self, omega: &[f64]) -> bool {
        if omega.len() != self.d {
            return false;
        }
        let key: Vec<i64> = match self.scale {
            None => {
                if omega.iter().any(|x| x.fract() != 0.0) {
                    return false;
                }
                omega.iter().map(|&x| x as i64).collect()
            }
            Some(s) => omega.iter().map(|&x| to_key(x, s)).collect(),
        };
        self.keys.binary_search(&key).is_ok()
    }

    /// Canonical half-set: one representative of every `{ω, −ω}` pair, the
    /// one whose first nonzero coordinate is positive, in lexicographic order.
    pub fn omega_plus_keys(&self) -> Vec<Vec<i64>> {
        self.keys
            .iter()
            .filter(|k| k.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
            .cloned()
            .collect()
    }

    pub fn omega_plus(&self) -> Vec<Vec<f64>> {
        self.omega_plus_keys()
            .iter()
            .map(|k| self.key_to_f64(k))
            .collect()
    }

    /// `K_i = max |ω_i|`.
    pub fn k_per_coordinate(&self) -> Vec<f64> {
        (0..self.d)
            .map(|i| {
                let m = self.keys.iter().map(|k| k[i].abs()).max().unwrap_or(0);
                match self.scale {
                    None => m as f64,
                    Some(s) => m as f64 * s,
                }
            })
            .collect()
    }

    /// `K = Σ K_i`.
    pub fn k_total(&self) -> f64 {
        self.k_per_coordinate().iter().sum()
    }

    /// Projection onto one coordinate: the distinct values of `ω_axis`.
    pub fn axis_cardinality(&self, axis: usize) -> usize {
        let mut vals: Vec<i64> = self.keys.iter().map(|k| k[axis]).collect();
        vals.sort_unstable();
        vals.dedup();
        vals.len()
    }

    fn rescaled_keys(&self, target: Option<f64>) -> Result<Vec<Vec<i64>>> {
        match (self.scale, target) {
            (a, b) if a == b => Ok(self.keys.clone()),
            (None, Some(t)) => Ok(self
                .keys
                .iter()
                .map(|k| k.iter().map(|&x| to_key(x as f64, t)).collect())
                .collect()),
            (Some(s), Some(t)) => Ok(self
                .keys
                .iter()
                .map(|k| k.iter().map(|&x| to_key(x as f64 * s, t)).collect())
                .collect()),
            (Some(_), None) => Err(Error::Internal("cannot rescale real set to integers".into())),
            _ => unreachable!(),
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::validation("tolerance must be positive and finite"))
    }
}

#[inline]
fn to_key(x: f64, tol: f64) -> i64 {
    // f64::round rounds half away from zero, so to_key(-x) == -to_key(x).
    (x / tol).round() as i64
}

/// `Ω(H)` placed on coordinate `coordinate` (1-based) of a `d`-dimensional space.
pub fn omega_of_hamiltonian(
    h: &HermitianOperator,
    coordinate: usize,
    d: usize,
    tol: f64,
) -> Result<FrequencySet> {
    if coordinate == 0 || coordinate > d {
        return Err(Error::validation(format!(
            "coordinate {coordinate} out of range 1..={d}"
        )));
    }
    check_tol(tol)?;
    let spectrum = eigenvalues(h, DEFAULT_RECONSTRUCTION_TOL)?;
    let delta = difference_set(&spectrum, tol)?;
    let axis = coordinate - 1;
    match &delta.integer {
        Some(ints) => FrequencySet::axis_integers(axis, d, ints),
        None => {
            let vecs: Vec<Vec<f64>> = delta
                .values
                .iter()
                .map(|&v| {
                    let mut e = vec![0.0; d];
                    e[axis] = v;
                    e
                })
                .collect();
            FrequencySet::from_real_vectors(d, &vecs, tol)
        }
    }
}

/// Minkowski sum with the default cardinality cap.
pub fn minkowski_sum(a: &FrequencySet, b: &FrequencySet, tol: f64) -> Result<FrequencySet> {
    minkowski_sum_capped(a, b, tol, DEFAULT_CARDINALITY_CAP)
}

/// `{a + b}` deduplicated. Mixed exact/real inputs are summed on the real grid
/// of spacing `tol`.
pub fn minkowski_sum_capped(
    a: &FrequencySet,
    b: &FrequencySet,
    tol: f64,
    cap: usize,
) -> Result<FrequencySet> {
    if a.d != b.d {
        return Err(Error::validation(format!(
            "dimension mismatch in Minkowski sum: {} vs {}",
            a.d, b.d
        )));
    }
    let scale = match (a.scale, b.scale) {
        (None, None) => None,
        (Some(s), Some(t)) if s == t => Some(s),
        _ => {
            check_tol(tol)?;
            Some(tol)
        }
    };
    let ka = a.rescaled_keys(scale)?;
    let kb = b.rescaled_keys(scale)?;
    let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(ka.len().max(kb.len()));
    for x in &ka {
        for y in &kb {
            let s: Vec<i64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
            seen.insert(s);
            if seen.len() > cap {
                return Err(Error::Resource(format!(
                    "Minkowski sum exceeds the cap of {cap} frequency vectors"
                )));
            }
        }
    }
    let mut keys: Vec<Vec<i64>> = seen.into_iter().collect();
    keys.sort();
    Ok(FrequencySet {
        d: a.d,
        keys,
        scale,
    })
}

/// `Ω^(i)` for one coordinate (0-based `axis`), embedded in dimension `d`.
pub fn omega_coordinate(
    strategy: &EncodingStrategy,
    axis: usize,
    tol: f64,
    cap: usize,
) -> Result<FrequencySet> {
    let d = strategy.d();
    let mut acc = FrequencySet::zero(d);
    for h in strategy.coordinate(axis) {
        let om = omega_of_hamiltonian(h, axis + 1, d, tol)?;
        acc = minkowski_sum_capped(&acc, &om, tol, cap).map_err(|e| match e {
            Error::Resource(msg) => Error::Resource(format!("coordinate {}: {msg}", axis + 1)),
            other => other,
        })?;
    }
    Ok(acc)
}

/// `Ω(D)`: the sum over every encoding Hamiltonian of `Ω(H)`.
pub fn omega_total(strategy: &EncodingStrategy, tol: f64) -> Result<FrequencySet> {
    omega_total_capped(strategy, tol, DEFAULT_CARDINALITY_CAP)
}

pub fn omega_total_capped(
    strategy: &EncodingStrategy,
    tol: f64,
    cap: usize,
) -> Result<FrequencySet> {
    let d = strategy.d();
    let mut parts = Vec::with_capacity(d);
    let mut product: u128 = 1;
    for axis in 0..d {
        let part = omega_coordinate(strategy, axis, tol, cap)?;
        product = product.saturating_mul(part.len() as u128);
        if product > cap as u128 {
            return Err(Error::Resource(format!(
                "coordinate {}: |Ω| would reach at least {product}, above the cap of {cap}",
                axis + 1
            )));
        }
        parts.push(part);
    }
    let mut total = FrequencySet::zero(d);
    for part in &parts {
        total = minkowski_sum_capped(&total, part, tol, cap)?;
    }
    if total.len() as u128 != product {
        return Err(Error::Internal(format!(
            "|Ω| = {} differs from the product of coordinate cardinalities {product}",
            total.len()
        )));
    }
    Ok(total)
}

/// `n`-fold Minkowski sum of `base` with itself.
pub fn repeat_sumset(base: &FrequencySet, n: usize, cap: usize) -> Result<FrequencySet> {
    let tol = base.tolerance().unwrap_or(DEFAULT_DEDUP_TOL);
    let mut acc = FrequencySet::zero(base.d());
    acc.scale = base.scale;
    for _ in 0..n {
        acc = minkowski_sum_capped(&acc, base, tol, cap)?;
    }
    Ok(acc)
}

/// Number of weak compositions of `n` into `t` parts, `C(n+t−1, n)`.
pub fn weak_composition_count(n: u64, t: u64) -> Result<BigUint> {
    if t == 0 {
        return Err(Error::validation("number of parts must be at least 1"));
    }
    Ok(binomial(n + t - 1, n))
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Exact `|Ω^(i)|` for `N` repeated Pauli encodings: `2N + 1`.
pub fn bound_pauli(n: u64) -> u128 {
    2 * n as u128 + 1
}

/// `C(N+T−1, N)·(2N/T + 1)^T`, the bound for `N` repetitions of one
/// Hamiltonian with `2T + 1` distinct frequencies.
pub fn bound_repeated(n: u64, t: u64) -> Result<f64> {
    if n == 0 || t == 0 {
        return Err(Error::validation("bound_repeated needs N ≥ 1 and T ≥ 1"));
    }
    let c = weak_composition_count(n, t)?
        .to_f64()
        .unwrap_or(f64::INFINITY);
    Ok(c * (2.0 * n as f64 / t as f64 + 1.0).powi(t as i32))
}

/// Exact integer value of [`bound_repeated`] when `T` divides `2N`.
pub fn bound_repeated_exact(n: u64, t: u64) -> Option<BigUint> {
    if n == 0 || t == 0 || !(2 * n).is_multiple_of(t) {
        return None;
    }
    let c = binomial(n + t - 1, n);
    Some(c * BigUint::from(2 * n / t + 1).pow(t as u32))
}

/// `(D(D−1)/2 + 1)^N` (one-sided count) or `(D(D−1) + 1)^N` (both signs)
/// with `D = 2^κ`.
pub fn bound_klocal_worstcase(n: u64, kappa: u32, corrected: bool) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::validation("locality must be at least 1"));
    }
    let dd = 2f64.powi(kappa as i32);
    let per_gate = if corrected {
        dd * (dd - 1.0) + 1.0
    } else {
        dd * (dd - 1.0) / 2.0 + 1.0
    };
    Ok(per_gate.powf(n as f64))
}

/// `(Σ b_i / d)^d ≥ Π b_i`.
pub fn bound_total_amgm(per_coordinate: &[f64], d: usize) -> Result<f64> {
    if per_coordinate.len() != d || d == 0 {
        return Err(Error::validation("need exactly d ≥ 1 per-coordinate bounds"));
    }
    if per_coordinate.iter().any(|&b| b.is_nan() || b < 1.0) {
        return Err(Error::validation("per-coordinate bounds must be ≥ 1"));
    }
    let mean = per_coordinate.iter().sum::<f64>() / d as f64;
    Ok(mean.powi(d as i32))
}

/// Maximum number of positive differences for a `κ`-local Hamiltonian,
/// `2^{κ−1}(2^κ − 1)`.
pub fn max_positive_differences(kappa: u32) -> u64 {
    let dd = 1u64 << kappa;
    dd * (dd - 1) / 2
}

/// Least-squares slope of `log|Ω|` against `log N` over a family of spectra.
pub fn scaling_exponent_fit<F>(mut family: F, n_values: &[usize]) -> Result<f64>
where
    F: FnMut(usize) -> Result<FrequencySet>,
{
    if n_values.len() < 3 {
        return Err(Error::validation("need at least three values of N"));
    }
    if n_values.contains(&0) {
        return Err(Error::validation("N must be positive for a log-log fit"));
    }
    let mut pts = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let card = family(n)?.len();
        pts.push(((n as f64).ln(), (card as f64).ln()));
    }
    Ok(least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Strategy descriptors accepted in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyDescriptor {
    /// `n[i]` repetitions of a Pauli string (default `"Z"`) per coordinate.
    PauliRepeat {
        n: Vec<usize>,
        #[serde(default = "default_pauli")]
        labels: String,
    },
    /// `n[i]` repetitions of one Hamiltonian per coordinate.
    SameHamiltonianRepeat {
        n: Vec<usize>,
        hamiltonian: HamiltonianSpec,
    },
    /// Arbitrary Hamiltonians acting on at most `kappa` qubits.
    KlocalList {
        kappa: u32,
        hamiltonians: Vec<Vec<HamiltonianSpec>>,
    },
    /// Arbitrary Hamiltonians with no structural promise.
    Explicit { hamiltonians: Vec<Vec<HamiltonianSpec>> },
}

fn default_pauli() -> String {
    "Z".to_string()
}

/// Closed-form upper bounds on one coordinate's `|Ω^(i)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateBounds {
    pub gates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pauli: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeated: Option<f64>,
    /// `T` of the repeated Hamiltonian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeated_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub klocal_tight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub klocal_one_sided: Option<f64>,
}

impl CoordinateBounds {
    /// Smallest of the rigorous bounds (the one-sided k-local count is not one).
    pub fn best(&self) -> Option<f64> {
        [
            self.pauli.map(|p| p as f64),
            self.repeated,
            self.klocal_tight,
        ]
        .into_iter()
        .flatten()
        .reduce(f64::min)
    }
}

fn build_lists(lists: &[Vec<HamiltonianSpec>]) -> Result<Vec<Vec<Arc<HermitianOperator>>>> {
    lists
        .iter()
        .map(|row| row.iter().map(|s| s.build().map(Arc::new)).collect())
        .collect()
}

impl StrategyDescriptor {
    pub fn d(&self) -> usize {
        match self {
            StrategyDescriptor::PauliRepeat { n, .. }
            | StrategyDescriptor::SameHamiltonianRepeat { n, .. } => n.len(),
            StrategyDescriptor::KlocalList { hamiltonians, .. }
            | StrategyDescriptor::Explicit { hamiltonians } => hamiltonians.len(),
        }
    }

    pub fn build(&self) -> Result<EncodingStrategy> {
        match self {
            StrategyDescriptor::PauliRepeat { n, labels } => {
                EncodingStrategy::pauli_repeat(n, labels)
            }
            StrategyDescriptor::SameHamiltonianRepeat { n, hamiltonian } => {
                EncodingStrategy::same_hamiltonian_repeat(Arc::new(hamiltonian.build()?), n)
            }
            StrategyDescriptor::KlocalList {
                kappa,
                hamiltonians,
            } => {
                if *kappa == 0 {
                    return Err(Error::validation("kappa must be at least 1"));
                }
                let lists = build_lists(hamiltonians)?;
                for h in lists.iter().flatten() {
                    if h.dim() > 1usize << kappa {
                        return Err(Error::validation(format!(
                            "operator of dimension {} is not {kappa}-local",
                            h.dim()
                        )));
                    }
                }
                EncodingStrategy::new(lists)
            }
            StrategyDescriptor::Explicit { hamiltonians } => {
                EncodingStrategy::new(build_lists(hamiltonians)?)
            }
        }
    }

    /// Every closed-form bound that applies to this descriptor, per coordinate.
    pub fn closed_form_bounds(&self, tol: f64) -> Result<Vec<CoordinateBounds>> {
        let strategy = self.build()?;
        let mut out = Vec::with_capacity(strategy.d());
        for i in 0..strategy.d() {
            let ops = strategy.coordinate(i);
            let n = ops.len() as u64;
            let mut b = CoordinateBounds {
                gates: ops.len(),
                pauli: None,
                repeated: None,
                repeated_t: None,
                klocal_tight: None,
                klocal_one_sided: None,
            };
            // Locality from the operators' dimension; ⌈log2 dim⌉ qubits.
            let kappa = match self {
                StrategyDescriptor::KlocalList { kappa, .. } => Some(*kappa),
                _ => ops
                    .iter()
                    .map(|h| h.dim().next_power_of_two().trailing_zeros().max(1))
                    .max(),
            };
            if let Some(k) = kappa {
                b.klocal_tight = Some(bound_klocal_worstcase(n, k, true)?);
                b.klocal_one_sided = Some(bound_klocal_worstcase(n, k, false)?);
            } else {
                b.klocal_tight = Some(1.0);
                b.klocal_one_sided = Some(1.0);
            }
            match self {
                StrategyDescriptor::PauliRepeat { labels, .. } => {
                    if labels.chars().any(|c| c != 'I' && c != 'i') {
                        b.pauli = Some(bound_pauli(n));
                    }
                    if n >= 1 {
                        b.repeated = Some(bound_repeated(n, 1)?);
                        b.repeated_t = Some(1);
                    }
                }
                StrategyDescriptor::SameHamiltonianRepeat { .. } if n >= 1 => {
                    let spec = eigenvalues(&ops[0], DEFAULT_RECONSTRUCTION_TOL)?;
                    let t = difference_set(&spec, tol)?.positive_count();
                    if t >= 1 {
                        b.repeated = Some(bound_repeated(n, t as u64)?);
                    } else {
                        b.repeated = Some(1.0);
                    }
                    b.repeated_t = Some(t);
                }
                _ => {}
            }
            out.push(b);
        }
        Ok(out)
    }
}

/// Geometric spectrum `{0} ∪ {3^j}` on `2^κ` levels, which attains the tight
/// difference count `D(D−1)+1`.
pub fn saturating_hamiltonian(kappa: u32) -> Result<HermitianOperator> {
    let dim = 1usize << kappa;
    let vals: Vec<f64> = (0..dim).map(|j| 3f64.powi(j as i32)).collect();
    make_diagonal(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_diagonal, pauli, Spectrum};
    use proptest::prelude::*;

    const TOL: f64 = DEFAULT_DEDUP_TOL;

    fn ints(set: &FrequencySet) -> Vec<Vec<i64>> {
        set.integer_vectors().unwrap().to_vec()
    }

    #[test]
    fn omega_of_pauli_z() {
        let s = omega_of_hamiltonian(&pauli("Z").unwrap(), 1, 2, TOL).unwrap();
        assert_eq!(ints(&s), vec![vec![-2, 0], vec![0, 0], vec![2, 0]]);
        let s = omega_of_hamiltonian(&make_diagonal(&[0.0, 3.0]).unwrap(), 2, 2, TOL).unwrap();
        assert_eq!(ints(&s), vec![vec![0, -3], vec![0, 0], vec![0, 3]]);
        let id = omega_of_hamiltonian(&pauli("II").unwrap(), 1, 3, TOL).unwrap();
        assert_eq!(ints(&id), vec![vec![0, 0, 0]]);
        assert!(omega_of_hamiltonian(&pauli("Z").unwrap(), 3, 2, TOL).is_err());
    }

    #[test]
    fn minkowski_examples() {
        let a = FrequencySet::axis_integers(0, 1, &[-2, 0, 2]).unwrap();
        let s = minkowski_sum(&a, &a, TOL).unwrap();
        assert_eq!(ints(&s), vec![vec![-4], vec![-2], vec![0], vec![2], vec![4]]);
        assert_eq!(minkowski_sum(&a, &FrequencySet::zero(1), TOL).unwrap(), a);

        let e1 = FrequencySet::axis_integers(0, 2, &[-1, 0, 1]).unwrap();
        let e2 = FrequencySet::axis_integers(1, 2, &[-1, 0, 1]).unwrap();
        assert_eq!(minkowski_sum(&e1, &e2, TOL).unwrap().len(), 9);
        assert!(matches!(
            minkowski_sum(&a, &e1, TOL),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn omega_total_examples() {
        let s = EncodingStrategy::pauli_repeat(&[3], "Z").unwrap();
        let om = omega_total(&s, TOL).unwrap();
        assert_eq!(om.len(), 7);
        assert_eq!(
            ints(&om),
            (-3..=3).map(|k| vec![2 * k]).collect::<Vec<_>>()
        );
        let s2 = EncodingStrategy::pauli_repeat(&[1, 1], "Z").unwrap();
        assert_eq!(omega_total(&s2, TOL).unwrap().len(), 9);
        let empty = EncodingStrategy::pauli_repeat(&[0, 0], "Z").unwrap();
        assert_eq!(omega_total(&empty, TOL).unwrap().len(), 1);
    }

    #[test]
    fn omega_total_cap_names_coordinate() {
        let s = EncodingStrategy::pauli_repeat(&[3, 40], "Z").unwrap();
        match omega_total_capped(&s, TOL, 100) {
            Err(Error::Resource(msg)) => assert!(msg.contains("coordinate 2"), "{msg}"),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn omega_plus_and_k() {
        let s = EncodingStrategy::pauli_repeat(&[2, 1], "Z").unwrap();
        let om = omega_total(&s, TOL).unwrap();
        assert_eq!(om.len(), 15);
        let plus = om.omega_plus();
        assert_eq!(plus.len(), 7);
        assert_eq!(plus[0], vec![0.0, 2.0]);
        for w in &plus {
            let first = w.iter().find(|x| **x != 0.0).unwrap();
            assert!(*first > 0.0);
        }
        assert_eq!(om.k_per_coordinate(), vec![4.0, 2.0]);
        assert_eq!(om.k_total(), 6.0);
    }

    #[test]
    fn real_path_keeps_symmetry() {
        let h = make_diagonal(&[0.0, 0.7, 1.9]).unwrap();
        let s = EncodingStrategy::same_hamiltonian_repeat(Arc::new(h), &[2]).unwrap();
        let om = omega_total(&s, 1e-9).unwrap();
        assert!(!om.is_integer());
        for v in om.vectors() {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            assert!(om.contains(&neg));
        }
        assert_eq!(om.len(), 2 * om.omega_plus().len() + 1);
    }

    // Oracle: enumerate all compositions of N into T parts.
    fn brute_weak_compositions(n: u64, t: u64) -> u64 {
        fn rec(rem: u64, parts: u64) -> u64 {
            if parts == 1 {
                return 1;
            }
            (0..=rem).map(|k| rec(rem - k, parts - 1)).sum()
        }
        rec(n, t)
    }

    #[test]
    fn weak_compositions() {
        assert_eq!(weak_composition_count(2, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(weak_composition_count(3, 2).unwrap(), BigUint::from(4u32));
        assert_eq!(weak_composition_count(17, 1).unwrap(), BigUint::from(1u32));
        for n in 0..7 {
            for t in 1..5 {
                assert_eq!(
                    weak_composition_count(n, t).unwrap(),
                    BigUint::from(brute_weak_compositions(n, t))
                );
            }
        }
        assert!(weak_composition_count(3, 0).is_err());
    }

    #[test]
    fn pauli_bound() {
        assert_eq!(bound_pauli(3), 7);
        assert_eq!(bound_pauli(0), 1);
        assert_eq!(bound_pauli(8), 17);
    }

    #[test]
    fn repeated_bound_examples() {
        assert_eq!(bound_repeated(4, 1).unwrap(), 9.0);
        assert_eq!(bound_repeated_exact(4, 1), Some(BigUint::from(9u32)));
        assert_eq!(bound_repeated(2, 2).unwrap(), 27.0);
        // {0,±1,±3} twice: {0,±1,±2,±3,±4,±6}
        let base = FrequencySet::axis_integers(0, 1, &[-3, -1, 0, 1, 3]).unwrap();
        let exact = repeat_sumset(&base, 2, 1000).unwrap().len();
        assert_eq!(exact, 11);
        assert!(exact as f64 <= 27.0);
        for t in 1..6 {
            let b = bound_repeated(1, t).unwrap();
            assert!(b >= (2 * t + 1) as f64);
            assert_eq!(b, t as f64 * (2.0 / t as f64 + 1.0).powi(t as i32));
        }
        assert!(bound_repeated(0, 1).is_err());
        assert_eq!(bound_repeated_exact(3, 4), None);
    }

    #[test]
    fn klocal_bound_examples() {
        assert_eq!(bound_klocal_worstcase(1, 1, false).unwrap(), 2.0);
        assert_eq!(bound_klocal_worstcase(1, 1, true).unwrap(), 3.0);
        let exact = difference_set(&Spectrum::from_integers(vec![0, 5]), TOL).unwrap();
        assert_eq!(exact.len(), 3);
        assert_eq!(bound_klocal_worstcase(0, 3, true).unwrap(), 1.0);
        assert_eq!(bound_klocal_worstcase(0, 3, false).unwrap(), 1.0);
    }

    #[test]
    fn amgm_examples() {
        assert_eq!(bound_total_amgm(&[3.0, 3.0], 2).unwrap(), 9.0);
        assert_eq!(bound_total_amgm(&[1.0, 9.0], 2).unwrap(), 25.0);
        assert_eq!(bound_total_amgm(&[7.0], 1).unwrap(), 7.0);
        assert!(bound_total_amgm(&[0.5], 1).is_err());
        assert!(bound_total_amgm(&[1.0], 2).is_err());
    }

    #[test]
    fn saturating_spectrum_hits_tight_count() {
        for kappa in 1..=3 {
            let h = saturating_hamiltonian(kappa).unwrap();
            let om = omega_of_hamiltonian(&h, 1, 1, TOL).unwrap();
            let dd = 1u128 << kappa;
            assert_eq!(om.len() as u128, dd * (dd - 1) + 1);
        }
    }

    #[test]
    fn pauli_exactness_small() {
        for n in 1..=8usize {
            let s = EncodingStrategy::pauli_repeat(&[n], "XZ").unwrap();
            assert_eq!(omega_total(&s, TOL).unwrap().len(), 2 * n + 1);
        }
    }

    #[test]
    fn slope_examples() {
        let pauli_fam = |n: usize| omega_total(&EncodingStrategy::pauli_repeat(&[n], "Z")?, TOL);
        let s = scaling_exponent_fit(pauli_fam, &[2, 4, 8]).unwrap();
        assert!((s - 1.0).abs() <= 0.15, "slope {s}");

        let base = FrequencySet::axis_integers(0, 1, &[-3, -1, 0, 1, 3]).unwrap();
        let s = scaling_exponent_fit(|n| repeat_sumset(&base, n, 100_000), &[2, 3, 4, 5, 6]).unwrap();
        assert!(s <= 3.1, "slope {s}");

        let s = scaling_exponent_fit(|_| Ok(FrequencySet::zero(1)), &[2, 4, 8]).unwrap();
        assert_eq!(s, 0.0);
        assert!(scaling_exponent_fit(|_| Ok(FrequencySet::zero(1)), &[2, 4]).is_err());
    }

    #[test]
    fn descriptor_bounds_present() {
        let desc: StrategyDescriptor = serde_json::from_str(
            r#"{"kind":"same_hamiltonian_repeat","n":[4],"hamiltonian":{"type":"diagonal","values":[0,1]}}"#,
        )
        .unwrap();
        let bounds = desc.closed_form_bounds(TOL).unwrap();
        let exact = omega_total(&desc.build().unwrap(), TOL).unwrap().len();
        assert_eq!(exact, 9);
        assert!(exact as f64 <= bounds[0].repeated.unwrap());
        assert!(exact as f64 <= bounds[0].klocal_tight.unwrap());
        assert_eq!(bounds[0].repeated_t, Some(1));
    }

    #[test]
    fn klocal_descriptor_rejects_wide_operator() {
        let desc = StrategyDescriptor::KlocalList {
            kappa: 1,
            hamiltonians: vec![vec![HamiltonianSpec::Pauli {
                labels: "ZZ".into(),
            }]],
        };
        assert!(desc.build().is_err());
    }

    fn arb_int_set() -> impl Strategy<Value = FrequencySet> {
        prop::collection::vec(1i64..6, 0..3).prop_map(|pos| {
            let mut v: Vec<i64> = pos.iter().flat_map(|&p| [p, -p]).collect();
            v.push(0);
            FrequencySet::axis_integers(0, 1, &v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn minkowski_commutative_associative(a in arb_int_set(), b in arb_int_set(), c in arb_int_set()) {
            let ab = minkowski_sum(&a, &b, TOL).unwrap();
            let ba = minkowski_sum(&b, &a, TOL).unwrap();
            prop_assert_eq!(&ab, &ba);
            let ab_c = minkowski_sum(&ab, &c, TOL).unwrap();
            let a_bc = minkowski_sum(&a, &minkowski_sum(&b, &c, TOL).unwrap(), TOL).unwrap();
            prop_assert_eq!(&ab_c, &a_bc);
            prop_assert!(ab_c.contains(&[0.0]));
            for v in ab_c.vectors() {
                prop_assert!(ab_c.contains(&[-v[0]]));
            }
        }

        #[test]
        fn product_law(n1 in 0usize..4, n2 in 0usize..4, spec in prop::collection::vec(0i64..6, 1..4)) {
            let vals: Vec<f64> = spec.iter().map(|&v| v as f64).collect();
            let h = Arc::new(make_diagonal(&vals).unwrap());
            let s = EncodingStrategy::new(vec![vec![h.clone(); n1], vec![h; n2]]).unwrap();
            let total = omega_total(&s, TOL).unwrap();
            let c0 = omega_coordinate(&s, 0, TOL, DEFAULT_CARDINALITY_CAP).unwrap().len();
            let c1 = omega_coordinate(&s, 1, TOL, DEFAULT_CARDINALITY_CAP).unwrap().len();
            prop_assert_eq!(total.len(), c0 * c1);
            prop_assert_eq!(total.axis_cardinality(0), c0);
        }
    }
}
