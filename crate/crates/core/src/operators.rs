//! Hermitian operators, their spectra, and eigenvalue-difference sets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, HermitianEigen};

/// Absolute tolerance for the Hermiticity check, relative to `max(1, max|h_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default tolerance used to merge nearly equal eigenvalue differences.
pub const DEFAULT_DEDUP_TOL: f64 = 1e-9;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::validation(format!("invalid Pauli label {other:?}"))),
        }
    }

    pub fn parse_string(labels: &str) -> Result<Vec<Pauli>> {
        labels.chars().map(Pauli::from_char).collect()
    }

    pub fn matrix(self) -> CMatrix {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![one, z, z, one],
            Pauli::X => vec![z, one, one, z],
            Pauli::Y => vec![z, -i, i, z],
            Pauli::Z => vec![one, z, z, -one],
        };
        CMatrix::from_row_major(2, data).expect("2x2")
    }
}

/// Dense Hermitian operator.
///
/// When the spectrum is known to be integer-valued (Pauli strings, integer
/// diagonals, or an explicit declaration) it is stored exactly and all
/// downstream frequency arithmetic runs on integers.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    integer_spectrum: Option<Vec<i64>>,
}

impl HermitianOperator {
    /// Wraps a matrix after checking Hermiticity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::validation("operator dimension must be at least 1"));
        }
        let tol = HERMITIAN_TOL * matrix.max_abs().max(1.0);
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (defect {defect:e} > {tol:e})"
            )));
        }
        Ok(HermitianOperator {
            matrix,
            integer_spectrum: None,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Number of qubits if the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn integer_spectrum(&self) -> Option<&[i64]> {
        self.integer_spectrum.as_deref()
    }

    /// Marks the spectrum as integer-valued after verifying that every
    /// eigenvalue lies within `tol` of an integer.
    pub fn declare_integer_spectrum(mut self, tol: f64) -> Result<Self> {
        if self.integer_spectrum.is_some() {
            return Ok(self);
        }
        let eig = hermitian_eigen(&self.matrix)?;
        let mut ints = Vec::with_capacity(eig.values.len());
        for &v in &eig.values {
            let r = v.round();
            if (v - r).abs() > tol {
                return Err(Error::validation(format!(
                    "eigenvalue {v} is not within {tol:e} of an integer"
                )));
            }
            ints.push(r as i64);
        }
        ints.sort_unstable();
        self.integer_spectrum = Some(ints);
        Ok(self)
    }

    /// Full eigen-decomposition via Jacobi rotations.
    pub fn eigen(&self) -> Result<HermitianEigen> {
        hermitian_eigen(&self.matrix)
    }

    /// Operator norm `max |λ|`.
    pub fn operator_norm(&self) -> Result<f64> {
        let spec = eigenvalues(self, DEFAULT_RECONSTRUCTION_TOL)?;
        Ok(spec
            .values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max))
    }
}

/// Tensor product of Pauli matrices; the first label acts on the most
/// significant qubit.
pub fn make_pauli_string(labels: &[Pauli]) -> Result<HermitianOperator> {
    if labels.is_empty() {
        return Err(Error::validation("Pauli string must be nonempty"));
    }
    let mut m = labels[0].matrix();
    for p in &labels[1..] {
        m = m.kron(&p.matrix());
    }
    let n = labels.len();
    let non_identity = labels.iter().filter(|&&p| p != Pauli::I).count();
    let dim = 1usize << n;
    let spectrum = if non_identity == 0 {
        vec![1; dim]
    } else {
        let half = dim / 2;
        let mut s = vec![-1; half];
        s.extend(std::iter::repeat_n(1, half));
        s
    };
    Ok(HermitianOperator {
        matrix: m,
        integer_spectrum: Some(spectrum),
    })
}

/// Convenience wrapper taking a label string such as `"ZZI"`.
pub fn pauli(labels: &str) -> Result<HermitianOperator> {
    make_pauli_string(&Pauli::parse_string(labels)?)
}

/// Diagonal operator with the given entries. Integer-valued entries enable
/// the exact frequency path.
pub fn make_diagonal(values: &[f64]) -> Result<HermitianOperator> {
    if values.is_empty() {
        return Err(Error::validation("diagonal must be nonempty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("diagonal entries must be finite"));
    }
    let integer = values
        .iter()
        .all(|v| v.fract() == 0.0 && v.abs() < (1u64 << 52) as f64);
    let integer_spectrum = integer.then(|| {
        let mut s: Vec<i64> = values.iter().map(|&v| v as i64).collect();
        s.sort_unstable();
        s
    });
    Ok(HermitianOperator {
        matrix: CMatrix::from_diagonal(values),
        integer_spectrum,
    })
}

/// Ascending eigenvalues with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Exact values when the source operator has a declared integer spectrum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integer: Option<Vec<i64>>,
}

impl Spectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum {
            values,
            integer: None,
        }
    }

    pub fn from_integers(mut values: Vec<i64>) -> Self {
        values.sort_unstable();
        Spectrum {
            values: values.iter().map(|&v| v as f64).collect(),
            integer: Some(values),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub const DEFAULT_RECONSTRUCTION_TOL: f64 = 1e-10;

/// Eigenvalues of `h`, sorted ascending.
///
/// Declared integer spectra are returned exactly. Otherwise the Jacobi
/// decomposition is computed and its reconstruction residual checked against
/// `tol·‖H‖_F`.
pub fn eigenvalues(h: &HermitianOperator, tol: f64) -> Result<Spectrum> {
    if let Some(ints) = h.integer_spectrum() {
        return Ok(Spectrum::from_integers(ints.to_vec()));
    }
    let eig = h.eigen()?;
    let norm = h.matrix.frobenius_norm();
    let residual = h.matrix.sub(&eig.reconstruct()).frobenius_norm();
    if residual > tol * norm.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::numeric(
            "eigen-decomposition reconstruction residual too large",
            residual / norm.max(f64::MIN_POSITIVE),
        ));
    }
    Ok(Spectrum::from_values(eig.values))
}

/// Set of pairwise eigenvalue differences `{λ_i − λ_j}`, deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceSet {
    /// Sorted ascending; symmetric about zero and always containing zero.
    pub values: Vec<f64>,
    pub tolerance: f64,
    /// Exact values on the integer path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integer: Option<Vec<i64>>,
}

impl DifferenceSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `T` in `|Δ| = 2T + 1`.
    pub fn positive_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// All pairwise differences of the spectrum, merged when closer than `tol`.
///
/// Only nonnegative differences are clustered; the negative half is the
/// exact mirror image, so the result is symmetric by construction.
pub fn difference_set(s: &Spectrum, tol: f64) -> Result<DifferenceSet> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::validation("difference tolerance must be positive"));
    }
    if s.is_empty() {
        return Err(Error::validation("empty spectrum"));
    }
    if let Some(ints) = &s.integer {
        let mut pos: Vec<i64> = Vec::new();
        for (i, &a) in ints.iter().enumerate() {
            for &b in &ints[i + 1..] {
                if b != a {
                    pos.push(b - a);
                }
            }
        }
        pos.sort_unstable();
        pos.dedup();
        let mut all: Vec<i64> = pos.iter().rev().map(|&p| -p).collect();
        all.push(0);
        all.extend(pos.iter().copied());
        return Ok(DifferenceSet {
            values: all.iter().map(|&v| v as f64).collect(),
            tolerance: tol,
            integer: Some(all),
        });
    }

    let vals = &s.values;
    let mut pos: Vec<f64> = Vec::new();
    for (i, &a) in vals.iter().enumerate() {
        for &b in &vals[i + 1..] {
            pos.push((b - a).abs());
        }
    }
    pos.sort_by(f64::total_cmp);
    // Greedy clustering: a new representative starts once the gap to the
    // current one exceeds tol; zero absorbs everything within tol of it.
    let mut reps: Vec<f64> = Vec::new();
    let mut anchor = 0.0;
    for d in pos {
        if d - anchor > tol {
            reps.push(d);
            anchor = d;
        }
    }
    let mut all: Vec<f64> = reps.iter().rev().map(|&p| -p).collect();
    all.push(0.0);
    all.extend(reps.iter().copied());
    Ok(DifferenceSet {
        values: all,
        tolerance: tol,
        integer: None,
    })
}

/// Upper bounds on `|Δ(H)|` for an operator with `D` distinct eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DifferenceCount {
    /// `D(D−1) + 1`: both signs of every difference plus zero. Attained by
    /// geometric spectra such as `{3^j}`.
    pub tight: u128,
    /// `D(D−1)/2 + 1`, the count with only one sign per pair.
    pub one_sided: u128,
}

pub fn max_distinct_differences(num_distinct_eigenvalues: u64) -> Result<DifferenceCount> {
    if num_distinct_eigenvalues == 0 {
        return Err(Error::validation("need at least one eigenvalue"));
    }
    let d = num_distinct_eigenvalues as u128;
    let pairs = d * (d - 1);
    Ok(DifferenceCount {
        tight: pairs + 1,
        one_sided: pairs / 2 + 1,
    })
}

/// Serializable description of a Hamiltonian as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// Tensor product of Paulis, e.g. `"ZZI"`.
    Pauli { labels: String },
    /// Diagonal operator given by its entries.
    Diagonal { values: Vec<f64> },
    /// Dense row-major matrix of `[re, im]` pairs.
    Dense {
        dim: usize,
        entries: Vec<[f64; 2]>,
        #[serde(default)]
        integer_spectrum: bool,
    },
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<HermitianOperator> {
        match self {
            HamiltonianSpec::Pauli { labels } => pauli(labels),
            HamiltonianSpec::Diagonal { values } => make_diagonal(values),
            HamiltonianSpec::Dense {
                dim,
                entries,
                integer_spectrum,
            } => {
                let data = entries
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect();
                let op = HermitianOperator::new(CMatrix::from_row_major(*dim, data)?)?;
                if *integer_spectrum {
                    op.declare_integer_spectrum(DEFAULT_DEDUP_TOL)
                } else {
                    Ok(op)
                }
            }
        }
    }
}
