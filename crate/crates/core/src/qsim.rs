//! Statevector simulation of circuits that interleave trainable gates with
//! data-encoding gates `exp(−i x_i H)`, and Fourier analysis of their outputs.
//!
//! Qubit 0 is the most significant bit of a basis-state index. Multi-qubit
//! operators act on their listed qubits in order, the first listed qubit being
//! the most significant factor of the operator.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::encoding::{omega_total, EncodingStrategy, FrequencySet};
use crate::error::{Error, Result};
use crate::gtp::{for_each_grid_point, ComplexCoefficients};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::operators::{make_pauli_string, HamiltonianSpec, HermitianOperator, Pauli, DEFAULT_DEDUP_TOL};
use crate::rng;

/// Largest accepted `‖U†U − I‖_F` for trainable unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Largest register this simulator accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone)]
enum Gate {
    Unitary(CMatrix),
    /// `exp(−iθ/2·P)` with `θ = theta[param]`.
    Rotation { pauli: CMatrix, param: usize },
    Encoding {
        coordinate: usize,
        hamiltonian: Arc<HermitianOperator>,
        eigen: HermitianEigen,
        vectors_adj: CMatrix,
    },
}

#[derive(Debug, Clone)]
struct Layer {
    qubits: Vec<usize>,
    gate: Gate,
}

/// A validated circuit with an observable.
#[derive(Debug, Clone)]
pub struct Circuit {
    n_qubits: usize,
    d: usize,
    layers: Vec<Layer>,
    observable: HermitianOperator,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, d: usize, observable: HermitianOperator) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::validation(format!(
                "qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if d == 0 {
            return Err(Error::validation("data dimension must be at least 1"));
        }
        if observable.dim() != 1 << n_qubits {
            return Err(Error::validation(format!(
                "observable has dimension {}, register needs {}",
                observable.dim(),
                1usize << n_qubits
            )));
        }
        Ok(Circuit {
            n_qubits,
            d,
            layers: Vec::new(),
            observable,
            n_params: 0,
        })
    }

    fn check_support(&self, qubits: &[usize], dim: usize) -> Result<()> {
        if qubits.is_empty() {
            return Err(Error::validation("gate needs at least one qubit"));
        }
        for (k, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::validation(format!(
                    "qubit {q} outside a {}-qubit register",
                    self.n_qubits
                )));
            }
            if qubits[..k].contains(&q) {
                return Err(Error::validation(format!("qubit {q} listed twice")));
            }
        }
        if dim != 1 << qubits.len() {
            return Err(Error::validation(format!(
                "operator of dimension {dim} cannot act on {} qubits",
                qubits.len()
            )));
        }
        Ok(())
    }

    pub fn push_unitary(&mut self, qubits: &[usize], u: CMatrix) -> Result<()> {
        self.check_support(qubits, u.dim())?;
        let defect = u.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::validation(format!(
                "matrix is not unitary: ‖U†U − I‖_F = {defect:e}"
            )));
        }
        self.layers.push(Layer {
            qubits: qubits.to_vec(),
            gate: Gate::Unitary(u),
        });
        Ok(())
    }

    /// Adds `exp(−iθ_param/2·P)` for a Pauli string `P` on `qubits`.
    pub fn push_rotation(&mut self, qubits: &[usize], pauli: &[Pauli], param: usize) -> Result<()> {
        let p = make_pauli_string(pauli)?;
        self.check_support(qubits, p.dim())?;
        self.n_params = self.n_params.max(param + 1);
        self.layers.push(Layer {
            qubits: qubits.to_vec(),
            gate: Gate::Rotation {
                pauli: p.matrix().clone(),
                param,
            },
        });
        Ok(())
    }

    /// Adds `exp(−i x_coordinate H)` on `qubits` (coordinate is 0-based).
    pub fn push_encoding(&mut self, coordinate: usize, qubits: &[usize], h: Arc<HermitianOperator>) -> Result<()> {
        if coordinate >= self.d {
            return Err(Error::validation(format!(
                "coordinate {coordinate} outside data dimension {}",
                self.d
            )));
        }
        self.check_support(qubits, h.dim())?;
        let eigen = h.eigen()?;
        let vectors_adj = eigen.vectors.adjoint();
        self.layers.push(Layer {
            qubits: qubits.to_vec(),
            gate: Gate::Encoding {
                coordinate,
                hamiltonian: h,
                eigen,
                vectors_adj,
            },
        });
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of trainable parameters the circuit reads.
    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn observable(&self) -> &HermitianOperator {
        &self.observable
    }

    /// `‖M‖_∞`, the output bound `B`.
    pub fn observable_norm(&self) -> Result<f64> {
        self.observable.operator_norm()
    }

    /// The encoding Hamiltonians grouped by coordinate, in circuit order.
    pub fn encoding_strategy(&self) -> Result<EncodingStrategy> {
        let mut per = vec![Vec::new(); self.d];
        for l in &self.layers {
            if let Gate::Encoding {
                coordinate,
                hamiltonian,
                ..
            } = &l.gate
            {
                per[*coordinate].push(hamiltonian.clone());
            }
        }
        EncodingStrategy::new(per)
    }

    /// `Ω(D)` of the circuit's encoding layers.
    pub fn derived_omega(&self) -> Result<FrequencySet> {
        omega_total(&self.encoding_strategy()?, DEFAULT_DEDUP_TOL)
    }

    fn check_inputs(&self, theta: &[f64], x: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::validation(format!(
                "expected {} parameters, got {}",
                self.n_params,
                theta.len()
            )));
        }
        if x.len() != self.d {
            return Err(Error::validation(format!(
                "expected a {}-dimensional input, got {}",
                self.d,
                x.len()
            )));
        }
        Ok(())
    }

    /// `U_θ(x)|0…0⟩`.
    pub fn statevector(&self, theta: &[f64], x: &[f64]) -> Result<Vec<Complex64>> {
        self.check_inputs(theta, x)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        psi[0] = Complex64::new(1.0, 0.0);
        for l in &self.layers {
            match &l.gate {
                Gate::Unitary(u) => apply_local(&mut psi, self.n_qubits, &l.qubits, |v| u.matvec(v)),
                Gate::Rotation { pauli, param } => {
                    let (s, c) = (0.5 * theta[*param]).sin_cos();
                    apply_local(&mut psi, self.n_qubits, &l.qubits, |v| {
                        let pv = pauli.matvec(v);
                        v.iter()
                            .zip(pv)
                            .map(|(a, b)| a * c - Complex64::i() * s * b)
                            .collect()
                    })
                }
                Gate::Encoding {
                    coordinate,
                    eigen,
                    vectors_adj,
                    ..
                } => {
                    let t = x[*coordinate];
                    apply_local(&mut psi, self.n_qubits, &l.qubits, |v| {
                        let mut w = vectors_adj.matvec(v);
                        for (wk, lam) in w.iter_mut().zip(&eigen.values) {
                            *wk *= Complex64::from_polar(1.0, -t * lam);
                        }
                        eigen.vectors.matvec(&w)
                    })
                }
            }
        }
        Ok(psi)
    }

    /// `⟨ψ|M|ψ⟩` as a complex number; the imaginary part is rounding noise.
    pub fn expectation_complex(&self, theta: &[f64], x: &[f64]) -> Result<Complex64> {
        let psi = self.statevector(theta, x)?;
        let mpsi = self.observable.matrix().matvec(&psi);
        Ok(psi.iter().zip(&mpsi).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn expectation(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        Ok(self.expectation_complex(theta, x)?.re)
    }

    /// Fourier coefficients of `x ↦ ⟨M⟩` from samples on an equispaced grid.
    /// `grid_sizes` defaults to `2K_i + 1` points per coordinate.
    pub fn extract_fourier(&self, theta: &[f64], grid_sizes: Option<&[usize]>) -> Result<FourierExtraction> {
        let omega = self.derived_omega()?;
        let ints = omega.integer_vectors().ok_or_else(|| {
            Error::Capability(
                "Fourier extraction needs integer frequencies; this spectrum has no common period".into(),
            )
        })?;
        let k = omega.k_per_coordinate();
        let minimal: Vec<usize> = k.iter().map(|&ki| 2 * ki as usize + 1).collect();
        let sizes = match grid_sizes {
            Some(g) => {
                if g.len() != self.d {
                    return Err(Error::validation("one grid size per coordinate is required"));
                }
                for (i, (&gi, &mi)) in g.iter().zip(&minimal).enumerate() {
                    if gi < mi {
                        return Err(Error::validation(format!(
                            "grid size {gi} on coordinate {i} is below the Nyquist minimum {mi}"
                        )));
                    }
                }
                g.to_vec()
            }
            None => minimal,
        };
        let mut points = Vec::new();
        for_each_grid_point(self.d, &sizes, |x| points.push(x.to_vec()))?;
        let mut data: Vec<Complex64> = points
            .par_iter()
            .map(|x| self.expectation(theta, x).map(|v| Complex64::new(v, 0.0)))
            .collect::<Result<_>>()?;
        inverse_dft_nd(&mut data, &sizes);

        let total = data.len() as f64;
        let mut entries = Vec::with_capacity(ints.len());
        let mut leakage = 0.0f64;
        let mut idx = vec![0usize; self.d];
        for c in data.iter() {
            let w: Vec<i64> = idx
                .iter()
                .zip(&sizes)
                .map(|(&j, &n)| if 2 * j <= n { j as i64 } else { j as i64 - n as i64 })
                .collect();
            let c = c / total;
            if ints.binary_search(&w).is_ok() {
                entries.push((w.iter().map(|&v| v as f64).collect::<Vec<f64>>(), c));
            } else {
                leakage = leakage.max(c.norm());
            }
            for i in (0..self.d).rev() {
                idx[i] += 1;
                if idx[i] < sizes[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        Ok(FourierExtraction {
            coefficients: ComplexCoefficients::new(self.d, entries)?,
            grid_sizes: sizes,
            max_offgrid_leakage: leakage,
            omega,
        })
    }
}

/// Applies an operator on `qubits` by gathering, transforming and scattering
/// the amplitudes of every coset of the support.
fn apply_local<F>(psi: &mut [Complex64], n: usize, qubits: &[usize], op: F)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let k = qubits.len();
    let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (n - 1 - q)).collect();
    let support: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|j| {
            (0..k)
                .filter(|&t| (j >> (k - 1 - t)) & 1 == 1)
                .map(|t| masks[t])
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); 1 << k];
    for base in 0..psi.len() {
        if base & support != 0 {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = psi[base + o];
        }
        let out = op(&buf);
        for (v, &o) in out.into_iter().zip(&offsets) {
            psi[base + o] = v;
        }
    }
}

/// In place `Σ_j a_j e^{+2πi jk/n}` along every axis of a row-major array
/// (last axis fastest), without normalization.
fn inverse_dft_nd(data: &mut [Complex64], sizes: &[usize]) {
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1usize;
    for &n in sizes.iter().rev() {
        let fft = planner.plan_fft(n, FftDirection::Inverse);
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[outer + inner + j * stride];
                }
                fft.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    data[outer + inner + j * stride] = *l;
                }
            }
        }
        stride = block;
    }
}

/// Fourier coefficients on `Ω(D)` plus the largest magnitude seen elsewhere.
#[derive(Debug, Clone)]
pub struct FourierExtraction {
    pub coefficients: ComplexCoefficients,
    pub grid_sizes: Vec<usize>,
    pub max_offgrid_leakage: f64,
    pub omega: FrequencySet,
}

impl FourierExtraction {
    /// `max |c_{−ω} − conj(c_ω)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let e = self.coefficients.entries();
        e.iter()
            .map(|(w, c)| {
                let neg: Vec<f64> = w.iter().map(|x| -x).collect();
                let partner = e
                    .iter()
                    .find(|(v, _)| *v == neg)
                    .map(|(_, z)| *z)
                    .unwrap_or_default();
                (partner - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients
            .entries()
            .iter()
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Haar-random unitary of dimension `dim` (QR of a complex Ginibre matrix
/// with the phases of `R`'s diagonal absorbed).
pub fn haar_unitary<R: Rng>(dim: usize, r: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
                .collect()
        })
        .collect();
    // Modified Gram–Schmidt; the diagonal of R is real and positive, so Q
    // is already Haar distributed.
    for j in 0..dim {
        for i in 0..j {
            let (head, tail) = cols.split_at_mut(j);
            let qi = &head[i];
            let proj: Complex64 = qi.iter().zip(&tail[0]).map(|(a, b)| a.conj() * b).sum();
            for (t, a) in tail[0].iter_mut().zip(qi) {
                *t -= proj * a;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut m = CMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

/// Layer descriptors accepted in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    /// Explicit unitary, row-major `[re, im]` entries.
    Unitary { qubits: Vec<usize>, entries: Vec<[f64; 2]> },
    /// Haar-random unitary drawn from stream `seed`.
    Haar { qubits: Vec<usize>, seed: u64 },
    /// `exp(−iθ_param/2·P)`.
    Rotation {
        qubits: Vec<usize>,
        pauli: String,
        param: usize,
    },
    /// `exp(−i x_coordinate H)`, coordinate 0-based.
    Encoding {
        coordinate: usize,
        qubits: Vec<usize>,
        hamiltonian: HamiltonianSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub d: usize,
    pub layers: Vec<LayerSpec>,
    pub observable: HamiltonianSpec,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n_qubits, self.d, self.observable.build()?)?;
        for l in &self.layers {
            match l {
                LayerSpec::Unitary { qubits, entries } => {
                    let dim = 1usize << qubits.len();
                    let data = entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                    c.push_unitary(qubits, CMatrix::from_row_major(dim, data)?)?;
                }
                LayerSpec::Haar { qubits, seed } => {
                    let mut r = rng::stream(*seed, 0);
                    c.push_unitary(qubits, haar_unitary(1 << qubits.len(), &mut r))?;
                }
                LayerSpec::Rotation { qubits, pauli, param } => {
                    c.push_rotation(qubits, &Pauli::parse_string(pauli)?, *param)?;
                }
                LayerSpec::Encoding {
                    coordinate,
                    qubits,
                    hamiltonian,
                } => c.push_encoding(*coordinate, qubits, Arc::new(hamiltonian.build()?))?,
            }
        }
        Ok(c)
    }
}

/// Circuit family for the coefficient-magnitude probe: Haar-random unitaries
/// on the whole register before every encoding gate and after the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFamily {
    pub n_qubits: usize,
    pub d: usize,
    /// Encoding layers; their order is kept.
    pub encodings: Vec<LayerSpec>,
    pub observable: HamiltonianSpec,
    #[serde(default = "default_true")]
    pub random_trainables: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeViolation {
    pub trial: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    /// Largest `max_ω |c_ω| / ‖M‖_∞` over all trials.
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub violations: Vec<ProbeViolation>,
    pub observable_norm: f64,
    pub max_leakage: f64,
}

/// Ratios above `1 + PROBE_SLACK` are recorded as violations.
pub const PROBE_SLACK: f64 = 1e-6;

/// Measures `max_ω |c_ω| / ‖M‖_∞` on random members of a circuit family.
/// Trial `t` draws its unitaries from stream `(seed, t)`.
pub fn conjecture_probe(family: &ProbeFamily, n_trials: usize, seed: u64) -> Result<ProbeReport> {
    if n_trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    if family.encodings.iter().any(|l| !matches!(l, LayerSpec::Encoding { .. })) {
        return Err(Error::validation("probe families list encoding layers only"));
    }
    let observable = family.observable.build()?;
    let norm = observable.operator_norm()?;
    if norm == 0.0 {
        return Err(Error::validation("observable must be nonzero"));
    }
    let all: Vec<usize> = (0..family.n_qubits).collect();
    let results: Vec<(f64, f64)> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t as u64);
            let mut c = Circuit::new(family.n_qubits, family.d, observable.clone())?;
            for l in &family.encodings {
                if family.random_trainables {
                    c.push_unitary(&all, haar_unitary(1 << family.n_qubits, &mut r))?;
                }
                if let LayerSpec::Encoding {
                    coordinate,
                    qubits,
                    hamiltonian,
                } = l
                {
                    c.push_encoding(*coordinate, qubits, Arc::new(hamiltonian.build()?))?;
                }
            }
            if family.random_trainables {
                c.push_unitary(&all, haar_unitary(1 << family.n_qubits, &mut r))?;
            }
            let fx = c.extract_fourier(&[], None)?;
            Ok((fx.max_abs_coefficient() / norm, fx.max_offgrid_leakage))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = results.iter().map(|r| r.0).collect();
    let violations = ratios
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 1.0 + PROBE_SLACK)
        .map(|(trial, &ratio)| ProbeViolation { trial, ratio })
        .collect();
    Ok(ProbeReport {
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        max_leakage: results.iter().map(|r| r.1).fold(0.0, f64::max),
        ratios,
        violations,
        observable_norm: norm,
    })
}
