//! Generalized trigonometric polynomials
//! `f(x) = a0/2 + Σ_{ω∈Ω₊} (a_ω cos(ω·x) + b_ω sin(ω·x))`
//! with a 2-norm budget `B̃` on the coefficient vector `(a0, a, b)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::encoding::FrequencySet;
use crate::error::{Error, Result};
use crate::rng;

/// Slack allowed when checking the norm budget on construction.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtpModel {
    d: usize,
    omega_plus: Vec<Vec<f64>>,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    #[serde(rename = "B_tilde")]
    b_tilde: f64,
}

impl GtpModel {
    pub fn new(
        omega_plus: Vec<Vec<f64>>,
        a0: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        b_tilde: f64,
    ) -> Result<Self> {
        let d = check_omega_plus(&omega_plus, None)?;
        Self::with_dim(d, omega_plus, a0, a, b, b_tilde)
    }

    /// Like [`GtpModel::new`] but with an explicit dimension, needed when
    /// `omega_plus` is empty.
    pub fn with_dim(
        d: usize,
        omega_plus: Vec<Vec<f64>>,
        a0: f64,
        a: Vec<f64>,
        b: Vec<f64>,
        b_tilde: f64,
    ) -> Result<Self> {
        check_omega_plus(&omega_plus, Some(d))?;
        if a.len() != omega_plus.len() || b.len() != omega_plus.len() {
            return Err(Error::validation(format!(
                "expected {} cosine and sine coefficients, got {} and {}",
                omega_plus.len(),
                a.len(),
                b.len()
            )));
        }
        check_budget(b_tilde)?;
        let model = GtpModel {
            d,
            omega_plus,
            a0,
            a,
            b,
            b_tilde,
        };
        let norm = model.coefficient_norm(2.0)?;
        if !norm.is_finite() || norm > b_tilde * (1.0 + NORM_SLACK) {
            return Err(Error::validation(format!(
                "coefficient norm {norm} exceeds the budget {b_tilde}"
            )));
        }
        Ok(model)
    }

    /// Builds a model from a flat vector `(a0, a…, b…)`.
    pub fn from_coefficients(
        d: usize,
        omega_plus: Vec<Vec<f64>>,
        coeffs: &[f64],
        b_tilde: f64,
    ) -> Result<Self> {
        let p = omega_plus.len();
        if coeffs.len() != 2 * p + 1 {
            return Err(Error::validation(format!(
                "expected {} coefficients, got {}",
                2 * p + 1,
                coeffs.len()
            )));
        }
        Self::with_dim(
            d,
            omega_plus,
            coeffs[0],
            coeffs[1..=p].to_vec(),
            coeffs[p + 1..].to_vec(),
            b_tilde,
        )
    }

    pub fn zero(d: usize, omega_plus: Vec<Vec<f64>>, b_tilde: f64) -> Result<Self> {
        let p = omega_plus.len();
        Self::with_dim(d, omega_plus, 0.0, vec![0.0; p], vec![0.0; p], b_tilde)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn omega_plus(&self) -> &[Vec<f64>] {
        &self.omega_plus
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_tilde(&self) -> f64 {
        self.b_tilde
    }

    /// Flat coefficient vector `(a0, a…, b…)`, matching [`feature_map`].
    pub fn coefficients(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.a.len() + 1);
        v.push(self.a0);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_point(self.d, x)?;
        let mut s = 0.5 * self.a0;
        for (k, w) in self.omega_plus.iter().enumerate() {
            let t = dot(w, x);
            s += self.a[k] * t.cos() + self.b[k] * t.sin();
        }
        Ok(s)
    }

    pub fn coefficient_norm(&self, p: f64) -> Result<f64> {
        coefficient_norm(&self.coefficients(), p)
    }

    pub fn to_complex(&self) -> ComplexCoefficients {
        let mut entries = Vec::with_capacity(2 * self.omega_plus.len() + 1);
        entries.push((vec![0.0; self.d], Complex64::new(self.a0 / 2.0, 0.0)));
        for (k, w) in self.omega_plus.iter().enumerate() {
            let c = Complex64::new(self.a[k], self.b[k]) / 2.0;
            entries.push((w.clone(), c));
            entries.push((w.iter().map(|x| -x).collect(), c.conj()));
        }
        ComplexCoefficients { d: self.d, entries }
    }

    /// `max |f|` over the product grid with `counts[i]` points on coordinate `i`.
    pub fn sup_on_grid(&self, counts: &[usize]) -> Result<f64> {
        let mut best = 0.0f64;
        for_each_grid_point(self.d, counts, |x| {
            best = best.max(self.evaluate(x).expect("grid point has model dimension").abs());
        })?;
        Ok(best)
    }

    /// `‖f‖₂` over `[0, 2π)^d` by the rectangle rule; exact for integer
    /// frequencies once `counts[i] > 2K_i`.
    pub fn l2_norm_on_grid(&self, counts: &[usize]) -> Result<f64> {
        let mut acc = 0.0;
        let mut n = 0usize;
        for_each_grid_point(self.d, counts, |x| {
            acc += self.evaluate(x).expect("grid point has model dimension").powi(2);
            n += 1;
        })?;
        let volume = (2.0 * std::f64::consts::PI).powi(self.d as i32);
        Ok((acc / n as f64 * volume).sqrt())
    }
}

fn check_budget(b_tilde: f64) -> Result<()> {
    if b_tilde.is_finite() && b_tilde > 0.0 {
        Ok(())
    } else {
        Err(Error::validation("norm budget must be positive and finite"))
    }
}

fn check_omega_plus(omega_plus: &[Vec<f64>], d: Option<usize>) -> Result<usize> {
    let d = match (d, omega_plus.first()) {
        (Some(d), _) => d,
        (None, Some(w)) => w.len(),
        (None, None) => {
            return Err(Error::validation(
                "empty frequency list needs an explicit dimension",
            ))
        }
    };
    if d == 0 {
        return Err(Error::validation("dimension must be at least 1"));
    }
    if omega_plus.iter().any(|w| w.len() != d) {
        return Err(Error::validation("frequency vector of wrong dimension"));
    }
    Ok(d)
}

fn check_point(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::validation(format!(
            "point has dimension {}, model has {d}",
            x.len()
        )));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// `(1/2, cos(ω·x)…, sin(ω·x)…)` in `omega_plus` order.
pub fn feature_map(omega_plus: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; 2 * omega_plus.len() + 1];
    feature_map_into(omega_plus, x, &mut out)?;
    Ok(out)
}

/// Writes the feature vector into `out`, which must have length `2|Ω₊|+1`.
pub fn feature_map_into(omega_plus: &[Vec<f64>], x: &[f64], out: &mut [f64]) -> Result<()> {
    let p = omega_plus.len();
    if out.len() != 2 * p + 1 {
        return Err(Error::validation("feature buffer has the wrong length"));
    }
    out[0] = 0.5;
    for (k, w) in omega_plus.iter().enumerate() {
        check_point(w.len(), x)?;
        let (s, c) = dot(w, x).sin_cos();
        out[1 + k] = c;
        out[1 + p + k] = s;
    }
    Ok(())
}

/// `‖v‖_p` for `p ∈ [1, ∞]`.
pub fn coefficient_norm(v: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::validation(format!("p must lie in [1, ∞], got {p}")));
    }
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    if p == 2.0 {
        return Ok(v.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    Ok(v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Radial projection onto the 2-norm ball of radius `b_tilde`.
pub fn project_to_ball(coeffs: &[f64], b_tilde: f64, p: f64) -> Result<Vec<f64>> {
    check_budget(b_tilde)?;
    if p != 2.0 {
        return Err(Error::Capability(format!(
            "projection onto the {p}-norm ball is not supported"
        )));
    }
    let n = coefficient_norm(coeffs, 2.0)?;
    if n <= b_tilde {
        return Ok(coeffs.to_vec());
    }
    let s = b_tilde / n;
    Ok(coeffs.iter().map(|x| x * s).collect())
}

/// `B̃ = 2B`, valid when every frequency is an integer vector.
pub fn btilde_for_integer_spectrum(b: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::validation("B must be positive and finite"));
    }
    Ok(2.0 * b)
}

/// `B̃ = 2√|Ω|·B`. Unproven for non-integer spectra; callers must flag it.
pub fn btilde_conjectural(b: f64, n_omega: usize) -> Result<f64> {
    Ok(btilde_for_integer_spectrum(b)? * (n_omega as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Sphere,
    Ball,
}

/// Coefficients uniform on the sphere or ball of radius `b_tilde`.
pub fn random_model(
    d: usize,
    omega_plus: Vec<Vec<f64>>,
    b_tilde: f64,
    mode: SampleMode,
    seed: u64,
) -> Result<GtpModel> {
    check_budget(b_tilde)?;
    let n = 2 * omega_plus.len() + 1;
    let mut r = rng::stream(seed, 0);
    let coeffs = random_ball_vector(&mut r, n, b_tilde, mode);
    let coeffs = project_to_ball(&coeffs, b_tilde, 2.0)?;
    GtpModel::from_coefficients(d, omega_plus, &coeffs, b_tilde)
}

pub(crate) fn random_ball_vector<R: Rng>(r: &mut R, n: usize, radius: f64, mode: SampleMode) -> Vec<f64> {
    let g: Vec<f64> = loop {
        let g: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        if g.iter().any(|x: &f64| *x != 0.0) {
            break g;
        }
    };
    let norm = coefficient_norm(&g, 2.0).expect("p = 2 is valid");
    let scale = match mode {
        SampleMode::Sphere => radius / norm,
        SampleMode::Ball => radius * r.random::<f64>().powf(1.0 / n as f64) / norm,
    };
    g.into_iter().map(|x| x * scale).collect()
}

/// Complex Fourier coefficients `c_ω` of `f(x) = Σ_ω c_ω e^{−iω·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCoefficients {
    d: usize,
    entries: Vec<(Vec<f64>, Complex64)>,
}

/// Largest tolerated `|c_{−ω} − conj(c_ω)|`.
pub const HERMITIAN_SYMMETRY_TOL: f64 = 1e-8;

impl ComplexCoefficients {
    pub fn new(d: usize, entries: Vec<(Vec<f64>, Complex64)>) -> Result<Self> {
        if d == 0 || entries.iter().any(|(w, _)| w.len() != d) {
            return Err(Error::validation("frequency vectors must share a positive dimension"));
        }
        Ok(ComplexCoefficients { d, entries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[(Vec<f64>, Complex64)] {
        &self.entries
    }

    fn find(&self, w: &[f64], tol: f64) -> Option<Complex64> {
        self.entries
            .iter()
            .find(|(v, _)| v.iter().zip(w).all(|(p, q)| (p - q).abs() <= tol))
            .map(|(_, c)| *c)
    }

    /// `Σ_ω c_ω e^{−iω·x}`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        check_point(self.d, x)?;
        Ok(self
            .entries
            .iter()
            .map(|(w, c)| c * Complex64::from_polar(1.0, -dot(w, x)))
            .sum())
    }

    /// `‖(c_ω)‖₂` over all stored frequencies.
    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Real form `(Ω₊, a0, a, b)` of Hermitian-symmetric complex coefficients.
/// Frequencies are matched with tolerance `freq_tol`; missing partners count
/// as zero coefficients.
pub fn to_real_coefficients(
    c: &ComplexCoefficients,
    b_tilde: f64,
    freq_tol: f64,
) -> Result<GtpModel> {
    let is_positive = |w: &[f64]| {
        w.iter()
            .find(|x| x.abs() > freq_tol)
            .is_some_and(|&x| x > 0.0)
    };
    let is_zero = |w: &[f64]| w.iter().all(|x| x.abs() <= freq_tol);
    let mut c0 = Complex64::new(0.0, 0.0);
    let mut plus: Vec<(Vec<f64>, Complex64)> = Vec::new();
    for (w, cw) in &c.entries {
        if is_zero(w) {
            c0 += cw;
        } else if is_positive(w) {
            plus.push((w.clone(), *cw));
        }
    }
    if c0.im.abs() > HERMITIAN_SYMMETRY_TOL {
        return Err(Error::validation(format!(
            "constant coefficient has imaginary part {}",
            c0.im
        )));
    }
    for (w, cw) in &c.entries {
        if is_zero(w) {
            continue;
        }
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        let partner = c.find(&neg, freq_tol).unwrap_or_default();
        let defect = (partner - cw.conj()).norm();
        if defect > HERMITIAN_SYMMETRY_TOL {
            return Err(Error::validation(format!(
                "coefficients at ±{w:?} violate Hermitian symmetry by {defect:e}"
            )));
        }
    }
    plus.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite frequencies"));
    let omega_plus: Vec<Vec<f64>> = plus.iter().map(|(w, _)| w.clone()).collect();
    let a = plus.iter().map(|(_, z)| 2.0 * z.re).collect();
    let b = plus.iter().map(|(_, z)| 2.0 * z.im).collect();
    GtpModel::with_dim(c.d, omega_plus, 2.0 * c0.re, a, b, b_tilde)
}

/// `4K_i + 1` points per coordinate.
pub fn nyquist_grid_counts(omega: &FrequencySet) -> Vec<usize> {
    omega
        .k_per_coordinate()
        .iter()
        .map(|k| 4 * k.ceil() as usize + 1)
        .collect()
}

/// Largest grid this module will walk.
pub const GRID_POINT_CAP: usize = 50_000_000;

/// Calls `f` on every point of the equispaced product grid over `[0, 2π)^d`.
pub fn for_each_grid_point<F: FnMut(&[f64])>(d: usize, counts: &[usize], mut f: F) -> Result<()> {
    if counts.len() != d || counts.contains(&0) {
        return Err(Error::validation("need a positive grid size per coordinate"));
    }
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .filter(|&t| t <= GRID_POINT_CAP)
        .ok_or_else(|| {
            Error::Resource(format!("grid {counts:?} exceeds {GRID_POINT_CAP} points"))
        })?;
    let steps: Vec<f64> = counts
        .iter()
        .map(|&c| 2.0 * std::f64::consts::PI / c as f64)
        .collect();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    for _ in 0..total {
        for i in 0..d {
            x[i] = idx[i] as f64 * steps[i];
        }
        f(&x);
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    Ok(())
}
