//! Complex matrix algebra of dynamical variables and observables.
//!
//! `ComplexMatrix` is a square matrix over ℂ (the dynamical variables),
//! `Observable` is a validated Hermitian matrix, and `SpectralDecomposition`
//! carries distinct eigenvalues with their orthogonal projectors.  The norm
//! is the operator (C*) norm `‖R‖ = sqrt(λ_max(R†R))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default gate for accepting nearly-Hermitian input before symmetrization.
pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-10;

/// Default eigenvalue-clustering threshold, relative to the operator norm.
pub const DEFAULT_DEGENERACY_TOL_FACTOR: f64 = 1e-9;

/// Square complex matrix; an element of the algebra of dynamical variables.
///
/// Invariants: square, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Wrap a square matrix, rejecting NaN/Inf entries.
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimMismatch {
                left: inner.nrows(),
                right: inner.ncols(),
            });
        }
        if !inner.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner })
    }

    /// Build from separate real and imaginary parts, row-major.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::DimMismatch {
                left: n,
                right: im.len(),
            });
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if re[i].len() != n || im[i].len() != n {
                return Err(Error::DimMismatch {
                    left: n,
                    right: re[i].len().max(im[i].len()),
                });
            }
            for j in 0..n {
                m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
            }
        }
        Self::new(m)
    }

    /// Build from a row-major table of entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            for (j, &c) in row.iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        Self::new(m)
    }

    /// Build from a row-major table of real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let table: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&table)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            inner: self.inner.map(|x| x * c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    /// Kronecker (tensor) product.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry magnitude.
    pub fn off_diagonal_residue(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.inner[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Deviation from Hermiticity: `max |M - M†|` entrywise.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }
}

/// Wire format: `{"dim": n, "re": [[..]], "im": [[..]]}`, row-major doubles.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut re = vec![vec![0.0; n]; n];
        let mut im = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                re[i][j] = self.inner[(i, j)].re;
                im[i][j] = self.inner[(i, j)].im;
            }
        }
        MatrixWire { dim: n, re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        if wire.re.len() != wire.dim || wire.im.len() != wire.dim {
            return Err(D::Error::custom("matrix row count does not match dim"));
        }
        ComplexMatrix::from_parts(&wire.re, &wire.im).map_err(D::Error::custom)
    }
}

/// Hermitian element of the algebra; a measurable quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Observable {
    matrix: ComplexMatrix,
    hermiticity_tol: f64,
}

impl Observable {
    /// Validate Hermiticity within `tol`, then symmetrize to `(M + M†)/2` so
    /// rounding noise from file-loaded data does not propagate.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let deviation = matrix.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        let sym = matrix
            .inner
            .adjoint()
            .zip_map(&matrix.inner, |a, m| (a + m) * Complex64::new(0.5, 0.0));
        Ok(Self {
            matrix: ComplexMatrix { inner: sym },
            hermiticity_tol: tol,
        })
    }

    /// `new` with the default tolerance gate.
    pub fn hermitian(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, DEFAULT_HERMITICITY_TOL)
    }

    /// Symmetrize unconditionally. For matrices that are Hermitian by
    /// construction up to rounding (e.g. `U†AU`).
    pub(crate) fn symmetrized(matrix: ComplexMatrix) -> Self {
        let sym = matrix
            .inner
            .adjoint()
            .zip_map(&matrix.inner, |a, m| (a + m) * Complex64::new(0.5, 0.0));
        Self {
            matrix: ComplexMatrix { inner: sym },
            hermiticity_tol: DEFAULT_HERMITICITY_TOL,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            hermiticity_tol: DEFAULT_HERMITICITY_TOL,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermiticity_tol(&self) -> f64 {
        self.hermiticity_tol
    }
}

/// Build an observable from raw entries: the tolerance-gated constructor.
pub fn make_observable(rows: &[Vec<Complex64>], tol: f64) -> Result<Observable> {
    Observable::new(ComplexMatrix::from_rows(rows)?, tol)
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Distinct eigenvalues (ascending) with orthogonal spectral projectors.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    pub multiplicities: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `Σ λᵢ Pᵢ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.projectors[0].dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc += p.as_dmatrix().map(|c| c * Complex64::new(*lambda, 0.0));
        }
        ComplexMatrix { inner: acc }
    }
}

/// Eigen-decompose a Hermitian matrix; eigenvalues ascending with matching
/// eigenvector columns.
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dim = m.nrows();
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100 * dim.max(10))
        .ok_or(Error::ConvergenceFailure { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Spectral decomposition of an observable, clustering eigenvalues whose gap
/// is below `degeneracy_tol` into one projector.
pub fn spectral_decomposition(
    a: &Observable,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition> {
    let (values, vectors) = hermitian_eigen(a.matrix().as_dmatrix())?;
    let n = values.len();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut multiplicities = Vec::new();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < degeneracy_tol {
            end += 1;
        }
        let members = &values[start..end];
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        let mut proj = DMatrix::<Complex64>::zeros(n, n);
        for k in start..end {
            let v: DVector<Complex64> = vectors.column(k).into();
            proj += &v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(ComplexMatrix { inner: proj });
        multiplicities.push(end - start);
        start = end;
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        multiplicities,
    })
}

/// Spectral decomposition with the default clustering threshold
/// `1e-9 · ‖A‖`.
pub fn spectral_decomposition_default(a: &Observable) -> Result<SpectralDecomposition> {
    let scale = cstar_norm(a.matrix()).max(1.0);
    spectral_decomposition(a, DEFAULT_DEGENERACY_TOL_FACTOR * scale)
}

/// The eigenvalue set of an observable, ascending.
pub fn spectrum(a: &Observable) -> Result<Vec<f64>> {
    Ok(spectral_decomposition_default(a)?.eigenvalues)
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration.
/// Deterministic start; only used when the QR algorithm gives up.
fn psd_top_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut v = DVector::<Complex64>::from_fn(n, |i, _| {
        Complex64::new(1.0 + (i as f64) / (n as f64), 0.3 * (i as f64 + 1.0) / (n as f64))
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / Complex64::new(norm, 0.0);
        if (next - lambda).abs() <= 1e-15 * next.max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Operator norm `‖R‖ = sqrt(λ_max(R†R))`.
pub fn cstar_norm(r: &ComplexMatrix) -> f64 {
    let gram = r.inner.adjoint() * &r.inner;
    let dim = gram.nrows();
    let top = match gram.clone().try_symmetric_eigen(f64::EPSILON, 100 * dim.max(10)) {
        Some(eig) => eig.eigenvalues.iter().copied().fold(0.0, f64::max),
        None => psd_top_eigenvalue(&gram),
    };
    top.max(0.0).sqrt()
}

/// Check `‖R*R‖ = ‖R‖²` within relative tolerance `tol`.
pub fn check_cstar_identity(r: &ComplexMatrix, tol: f64) -> bool {
    let norm = cstar_norm(r);
    let gram = ComplexMatrix {
        inner: r.inner.adjoint() * &r.inner,
    };
    let lhs = cstar_norm(&gram);
    let rhs = norm * norm;
    (lhs - rhs).abs() <= tol * rhs.max(f64::MIN_POSITIVE)
}

/// Hermitian square root of `R†R`; the observable with `A² = R*R`.
pub fn positive_sqrt(r: &ComplexMatrix) -> Result<Observable> {
    let gram = ComplexMatrix {
        inner: r.inner.adjoint() * &r.inner,
    };
    let herm = Observable::symmetrized(gram);
    let decomp = spectral_decomposition_default(&herm)?;
    let n = herm.dim();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (lambda, p) in decomp.eigenvalues.iter().zip(&decomp.projectors) {
        let root = lambda.max(0.0).sqrt();
        acc += p.as_dmatrix().map(|c| c * Complex64::new(root, 0.0));
    }
    Ok(Observable::symmetrized(ComplexMatrix { inner: acc }))
}

/// Pauli matrices τ₁, τ₂, τ₃.
pub fn pauli(k: usize) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let rows = match k {
        1 => vec![vec![z, one], vec![one, z]],
        2 => vec![vec![z, -i], vec![i, z]],
        3 => vec![vec![one, z], vec![z, -one]],
        _ => panic!("pauli index must be 1, 2, or 3"),
    };
    ComplexMatrix::from_rows(&rows).expect("pauli matrices are well-formed")
}

/// `τ(n̄) = n₁τ₁ + n₂τ₂ + n₃τ₃` for a unit 3-vector.
pub fn pauli_along(n: [f64; 3]) -> Observable {
    let m = pauli(1)
        .scale(Complex64::new(n[0], 0.0))
        .add(&pauli(2).scale(Complex64::new(n[1], 0.0)))
        .and_then(|s| s.add(&pauli(3).scale(Complex64::new(n[2], 0.0))))
        .expect("2x2 dimensions always match");
    Observable::symmetrized(m)
}

/// Spin-1 component matrices `(Sx, Sy, Sz)` in the Sz eigenbasis.
pub fn spin_one_matrices() -> [Observable; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    let sx = make_observable(
        &[
            vec![c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)],
            vec![c(s, 0.0), c(0.0, 0.0), c(s, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)],
        ],
        1e-12,
    )
    .expect("spin-1 Sx is Hermitian");
    let sy = make_observable(
        &[
            vec![c(0.0, 0.0), c(0.0, -s), c(0.0, 0.0)],
            vec![c(0.0, s), c(0.0, 0.0), c(0.0, -s)],
            vec![c(0.0, 0.0), c(0.0, s), c(0.0, 0.0)],
        ],
        1e-12,
    )
    .expect("spin-1 Sy is Hermitian");
    let sz = make_observable(
        &[
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        ],
        1e-12,
    )
    .expect("spin-1 Sz is Hermitian");
    [sx, sy, sz]
}

/// Squared spin-1 component along a unit direction: `(S·n̄)²`.
pub fn spin_one_square_along(n: [f64; 3]) -> Observable {
    let [sx, sy, sz] = spin_one_matrices();
    let combo = sx
        .matrix()
        .scale(Complex64::new(n[0], 0.0))
        .add(&sy.matrix().scale(Complex64::new(n[1], 0.0)))
        .and_then(|m| m.add(&sz.matrix().scale(Complex64::new(n[2], 0.0))))
        .expect("3x3 dimensions always match");
    Observable::symmetrized(combo.mul(&combo).expect("same dim"))
}

/// Matrix with independent standard-normal real and imaginary parts.
pub fn random_matrix(rng: &mut crate::rng::CounterRng, dim: usize) -> ComplexMatrix {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.next_normal(), rng.next_normal())
    });
    ComplexMatrix { inner: m }
}

/// Random Hermitian observable (symmetrized Gaussian matrix).
pub fn random_hermitian(rng: &mut crate::rng::CounterRng, dim: usize) -> Observable {
    Observable::symmetrized(random_matrix(rng, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn make_observable_identity() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let obs = make_observable(&[vec![one, z], vec![z, one]], 1e-12).unwrap();
        assert_eq!(obs.dim(), 2);
        assert!((obs.matrix().get(0, 0) - one).norm() < 1e-15);
    }

    #[test]
    fn make_observable_accepts_pauli_x() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let obs = make_observable(&[vec![z, one], vec![one, z]], 1e-12).unwrap();
        assert!((obs.matrix().sub(&pauli(1)).unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn make_observable_rejects_non_hermitian() {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let err = make_observable(&[vec![z, i], vec![z, z]], 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn make_observable_rejects_non_finite() {
        let err = ComplexMatrix::from_real_rows(&[vec![f64::NAN, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(err.unwrap_err(), Error::NonFinite));
    }

    #[test]
    fn commutator_of_equal_vanishes() {
        let t1 = pauli(1);
        let c = commutator(&t1, &t1).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn pauli_commutator_closed_form() {
        // [τ₁, τ₂] = 2iτ₃, checked against direct 2x2 multiplication.
        let lhs = commutator(&pauli(1), &pauli(2)).unwrap();
        let rhs = pauli(3).scale(Complex64::new(0.0, 2.0));
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn commutator_dim_mismatch() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(
            commutator(&a, &b).unwrap_err(),
            Error::DimMismatch { .. }
        ));
    }

    #[test]
    fn spectral_decomposition_two_level() {
        // diag(E0, -E0) -> eigenvalues [-1, 1] with basis projectors.
        let h = make_observable(
            &[
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
            ],
            1e-12,
        )
        .unwrap();
        let d = spectral_decomposition_default(&h).unwrap();
        assert_eq!(d.eigenvalues.len(), 2);
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-12);
        // projector for -1 is diag(0,1)
        assert!((d.projectors[0].get(1, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((d.projectors[1].get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spectral_decomposition_identity_clusters() {
        let n = 5;
        let a = Observable::identity(n);
        let d = spectral_decomposition_default(&a).unwrap();
        assert_eq!(d.eigenvalues.len(), 1);
        assert_eq!(d.multiplicities[0], n);
        assert!(d.projectors[0]
            .sub(&ComplexMatrix::identity(n))
            .unwrap()
            .max_abs()
            .abs()
            < 1e-12);
    }

    #[test]
    fn pauli_direction_spectrum_is_pm_one() {
        let mut rng = CounterRng::new(11, 0);
        for _ in 0..20 {
            let v = [rng.next_normal(), rng.next_normal(), rng.next_normal()];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm < 1e-6 {
                continue;
            }
            let n = [v[0] / norm, v[1] / norm, v[2] / norm];
            let spec = spectrum(&pauli_along(n)).unwrap();
            assert_eq!(spec.len(), 2);
            assert!((spec[0] + 1.0).abs() < 1e-10);
            assert!((spec[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn projector_spectrum() {
        let p = make_observable(
            &[
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            ],
            1e-12,
        )
        .unwrap();
        let spec = spectrum(&p).unwrap();
        assert_eq!(spec.len(), 2);
        assert!(spec[0].abs() < 1e-12 && (spec[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_invariants_hold_on_random_matrices() {
        let mut rng = CounterRng::new(3, 0);
        for &dim in &[2usize, 3, 5, 8, 16, 64] {
            let a = random_hermitian(&mut rng, dim);
            let d = spectral_decomposition_default(&a).unwrap();
            // completeness
            let mut sum = ComplexMatrix::zeros(dim);
            for p in &d.projectors {
                sum = sum.add(p).unwrap();
            }
            assert!(
                sum.sub(&ComplexMatrix::identity(dim)).unwrap().max_abs() < 1e-10,
                "completeness at dim {dim}"
            );
            // idempotence and orthogonality
            for (i, p) in d.projectors.iter().enumerate() {
                for (j, q) in d.projectors.iter().enumerate() {
                    let prod = p.mul(q).unwrap();
                    let expect = if i == j { p.clone() } else { ComplexMatrix::zeros(dim) };
                    assert!(
                        prod.sub(&expect).unwrap().max_abs() < 1e-10,
                        "orthogonality at dim {dim}"
                    );
                }
            }
            // multiplicities sum to dim, reconstruction reproduces A
            assert_eq!(d.dim(), dim);
            assert!(d.reconstruct().sub(a.matrix()).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn cstar_norm_basics() {
        assert!((cstar_norm(&pauli(1)) - 1.0).abs() < 1e-12);
        assert_eq!(cstar_norm(&ComplexMatrix::zeros(3)), 0.0);
        // [[0,2],[0,0]]: R†R = diag(0,4), norm 2
        let r = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((cstar_norm(&r) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn norm_zero_implies_zero() {
        let mut rng = CounterRng::new(17, 0);
        for _ in 0..50 {
            let r = random_matrix(&mut rng, 4);
            if cstar_norm(&r) == 0.0 {
                assert_eq!(r.max_abs(), 0.0);
            }
            // contrapositive on a visibly nonzero matrix
            assert!(cstar_norm(&r) > 0.0 || r.max_abs() == 0.0);
        }
    }

    #[test]
    fn cstar_identity_and_submultiplicativity_random() {
        let mut rng = CounterRng::new(5, 0);
        for trial in 0..1000 {
            let dim = 2 + trial % 5;
            let r = random_matrix(&mut rng, dim);
            let s = random_matrix(&mut rng, dim);
            assert!(check_cstar_identity(&r, 1e-10), "identity at trial {trial}");
            let prod = r.mul(&s).unwrap();
            assert!(
                cstar_norm(&prod) <= cstar_norm(&r) * cstar_norm(&s) * (1.0 + 1e-10) + 1e-12,
                "submultiplicative at trial {trial}"
            );
        }
    }

    #[test]
    fn cstar_identity_on_truncated_ladder() {
        // lowering operator at truncation 8
        let n = 8;
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for k in 1..n {
            rows[k - 1][k] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        let lower = ComplexMatrix::from_rows(&rows).unwrap();
        assert!(check_cstar_identity(&lower, 1e-10));
    }

    #[test]
    fn spectrum_bounded_by_norm() {
        let mut rng = CounterRng::new(23, 0);
        for _ in 0..30 {
            let a = random_hermitian(&mut rng, 6);
            let norm = cstar_norm(a.matrix());
            for lambda in spectrum(&a).unwrap() {
                assert!(lambda.abs() <= norm + 1e-10);
            }
        }
    }

    #[test]
    fn every_gram_is_a_square() {
        // For any R there is Hermitian A with A² = R†R.
        let mut rng = CounterRng::new(29, 0);
        for _ in 0..20 {
            let r = random_matrix(&mut rng, 5);
            let a = positive_sqrt(&r).unwrap();
            let gram = r.adjoint().mul(&r).unwrap();
            let square = a.matrix().mul(a.matrix()).unwrap();
            assert!(square.sub(&gram).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = ComplexMatrix::from_parts(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![0.0, -1.0], vec![1.0, 0.5]],
        )
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"dim\":2"));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert!(back.sub(&m).unwrap().max_abs() == 0.0);
    }
}
