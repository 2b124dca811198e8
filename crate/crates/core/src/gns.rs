//! GNS construction: the Hilbert-space representation generated by a state
//! functional on the full matrix algebra.
//!
//! Elements `R`, `S` are equivalent when `Ψ(K*(R−S)) = 0` for all `K`; the
//! quotient inherits the inner product `⟨Φ(R), Φ(S)⟩ = Ψ(R*S)` and the
//! algebra acts by left multiplication, `Π(S)Φ(R) = Φ(SR)`.  In finite
//! dimension the quotient is computed from the Gram matrix over the standard
//! matrix units `E_ij`, cutting its null space at a relative singular-value
//! threshold.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{cstar_norm, random_matrix, ComplexMatrix};
use crate::error::{Error, Result};
use crate::probability::{quantum_average, StateFunctional};
use crate::rng::CounterRng;

/// Default relative singular-value threshold for the null-space cut.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// The GNS representation of a state functional on the n×n matrix algebra.
#[derive(Debug, Clone)]
pub struct GnsRepresentation {
    algebra_dim: usize,
    rep_dim: usize,
    /// kept Gram eigenvectors, one column per representation dimension
    modes: DMatrix<Complex64>,
    /// square roots of the kept Gram eigenvalues
    scales: Vec<f64>,
    functional: StateFunctional,
    cyclic: DVector<Complex64>,
    /// order of the matrix units: unit_order[c] = (i, j) for coordinate c
    unit_order: Vec<(usize, usize)>,
}

impl GnsRepresentation {
    /// Dimension n of the underlying matrix algebra.
    pub fn algebra_dim(&self) -> usize {
        self.algebra_dim
    }

    /// Dimension of the representation space (rank of the Gram matrix).
    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    /// The class vector of the unit element.
    pub fn cyclic_vector(&self) -> &DVector<Complex64> {
        &self.cyclic
    }

    pub fn functional(&self) -> &StateFunctional {
        &self.functional
    }

    fn vectorize(&self, r: &ComplexMatrix) -> DVector<Complex64> {
        DVector::from_iterator(
            self.unit_order.len(),
            self.unit_order.iter().map(|&(i, j)| r.get(i, j)),
        )
    }

    /// Class vector `Φ(R)` in the orthonormal quotient coordinates.
    pub fn embed(&self, r: &ComplexMatrix) -> Result<DVector<Complex64>> {
        if r.dim() != self.algebra_dim {
            return Err(Error::DimMismatch {
                left: r.dim(),
                right: self.algebra_dim,
            });
        }
        let coeffs = self.modes.adjoint() * self.vectorize(r);
        Ok(DVector::from_iterator(
            self.rep_dim,
            coeffs
                .iter()
                .zip(&self.scales)
                .map(|(c, &s)| c * Complex64::new(s, 0.0)),
        ))
    }

    /// The operator `Π(S)` acting on the quotient: `Π(S)Φ(R) = Φ(SR)`.
    pub fn rep_map(&self, s: &ComplexMatrix) -> Result<DMatrix<Complex64>> {
        if s.dim() != self.algebra_dim {
            return Err(Error::DimMismatch {
                left: s.dim(),
                right: self.algebra_dim,
            });
        }
        let n = self.algebra_dim;
        let coords = self.unit_order.len();
        // left multiplication in unit coordinates: vec(S E_ij) column per (i,j)
        let mut left = DMatrix::<Complex64>::zeros(coords, coords);
        for (col, &(i, j)) in self.unit_order.iter().enumerate() {
            // S E_ij has S[:, i] in column j
            for row_idx in 0..n {
                let value = s.get(row_idx, i);
                if value != Complex64::new(0.0, 0.0) {
                    let row = self
                        .unit_order
                        .iter()
                        .position(|&(a, b)| a == row_idx && b == j)
                        .expect("unit order covers all (i, j)");
                    left[(row, col)] = value;
                }
            }
        }
        // conjugate into quotient coordinates: D^{1/2} V† L V D^{-1/2}
        let v = &self.modes;
        let core = v.adjoint() * left * v;
        let mut out = DMatrix::<Complex64>::zeros(self.rep_dim, self.rep_dim);
        for a in 0..self.rep_dim {
            for b in 0..self.rep_dim {
                out[(a, b)] = core[(a, b)]
                    * Complex64::new(self.scales[a] / self.scales[b], 0.0);
            }
        }
        Ok(out)
    }

    /// `⟨x, y⟩` with the convention conjugate-linear in the first slot.
    pub fn inner(x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
        x.dotc(y)
    }

    /// JSON dump: dimensions, kept modes, scales, cyclic vector.
    pub fn to_json(&self) -> serde_json::Value {
        let complex_list = |v: &DVector<Complex64>| -> Vec<serde_json::Value> {
            v.iter()
                .map(|c| serde_json::json!({"re": c.re, "im": c.im}))
                .collect()
        };
        let mode_cols: Vec<Vec<serde_json::Value>> = (0..self.rep_dim)
            .map(|k| complex_list(&self.modes.column(k).into()))
            .collect();
        serde_json::json!({
            "algebra_dim": self.algebra_dim,
            "rep_dim": self.rep_dim,
            "scales": self.scales,
            "modes": mode_cols,
            "cyclic_vector": complex_list(&self.cyclic),
        })
    }
}

/// Run the construction for the functional `psi` over the n×n algebra.
///
/// The Gram matrix over the standard matrix units is
/// `G[(ij),(kl)] = Ψ(E_ij* E_kl)`; its null space is cut at
/// `rank_tol · σ_max` and the rest is orthonormalized.
pub fn gns_construct(
    dim: usize,
    psi: &StateFunctional,
    rank_tol: f64,
) -> Result<GnsRepresentation> {
    gns_construct_with_order(dim, psi, rank_tol, standard_unit_order(dim))
}

fn standard_unit_order(dim: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            order.push((i, j));
        }
    }
    order
}

fn gns_construct_with_order(
    dim: usize,
    psi: &StateFunctional,
    rank_tol: f64,
    unit_order: Vec<(usize, usize)>,
) -> Result<GnsRepresentation> {
    if psi.dim() != dim {
        return Err(Error::DimMismatch {
            left: psi.dim(),
            right: dim,
        });
    }
    let coords = dim * dim;
    let w = psi.weight().as_dmatrix();
    // Ψ(E_ij* E_kl) = δ_ik · W[l, j]
    let mut gram = DMatrix::<Complex64>::zeros(coords, coords);
    for (row, &(i, j)) in unit_order.iter().enumerate() {
        for (col, &(k, l)) in unit_order.iter().enumerate() {
            if i == k {
                gram[(row, col)] = w[(l, j)];
            }
        }
    }

    let eig = gram
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100 * coords.max(10))
        .ok_or(Error::ConvergenceFailure { dim: coords })?;
    let sigma_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cut = rank_tol * sigma_max.max(f64::MIN_POSITIVE);
    if let Some(&lowest) = eig
        .eigenvalues
        .iter()
        .min_by(|a, b| a.total_cmp(b))
    {
        if lowest < -cut {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
    }

    let mut kept: Vec<usize> = (0..coords).filter(|&k| eig.eigenvalues[k] > cut).collect();
    // deterministic order: descending eigenvalue, then index
    kept.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let rep_dim = kept.len();
    let mut modes = DMatrix::<Complex64>::zeros(coords, rep_dim);
    let mut scales = Vec::with_capacity(rep_dim);
    for (slot, &k) in kept.iter().enumerate() {
        modes.set_column(slot, &eig.eigenvectors.column(k));
        scales.push(eig.eigenvalues[k].sqrt());
    }

    let mut rep = GnsRepresentation {
        algebra_dim: dim,
        rep_dim,
        modes,
        scales,
        functional: psi.clone(),
        cyclic: DVector::zeros(rep_dim),
        unit_order,
    };
    rep.cyclic = rep.embed(&ComplexMatrix::identity(dim))?;
    Ok(rep)
}

/// One failed representation law at a sampled pair.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationViolation {
    pub trial: usize,
    pub law: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub trials: usize,
    pub max_residual: f64,
    pub violations: Vec<RepresentationViolation>,
}

impl RepresentationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify on random pairs that the representation respects products,
/// adjoints, the cyclic-vector reconstruction of `Ψ`, and the intertwining
/// law `Π(S)Φ(R) = Φ(SR)`, all within `tol`.
pub fn verify_representation(
    rep: &GnsRepresentation,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<RepresentationReport> {
    let n = rep.algebra_dim();
    let mut rng = CounterRng::new(seed, 0x6E5);
    let mut violations = Vec::new();
    let mut max_residual = 0.0f64;

    let record = |trial: usize, law: &str, residual: f64, violations: &mut Vec<_>| {
        if residual > tol {
            violations.push(RepresentationViolation {
                trial,
                law: law.to_string(),
                residual,
            });
        }
    };

    for trial in 0..trials {
        let r = random_matrix(&mut rng, n);
        let s = random_matrix(&mut rng, n);

        let pi_r = rep.rep_map(&r)?;
        let pi_s = rep.rep_map(&s)?;

        // multiplicativity
        let pi_rs = rep.rep_map(&r.mul(&s)?)?;
        let res_mul = max_abs(&(&pi_r * &pi_s - &pi_rs));
        max_residual = max_residual.max(res_mul);
        record(trial, "rep(RS) = rep(R)rep(S)", res_mul, &mut violations);

        // adjoints
        let pi_r_star = rep.rep_map(&r.adjoint())?;
        let res_adj = max_abs(&(pi_r.adjoint() - &pi_r_star));
        max_residual = max_residual.max(res_adj);
        record(trial, "rep(R*) = rep(R)†", res_adj, &mut violations);

        // cyclic vector reproduces the functional
        let expected = quantum_average(rep.functional(), &r)?;
        let got = GnsRepresentation::inner(rep.cyclic_vector(), &(&pi_r * rep.cyclic_vector()));
        let res_cyc = (got - expected).norm();
        max_residual = max_residual.max(res_cyc);
        record(trial, "⟨Ω, rep(R)Ω⟩ = Ψ(R)", res_cyc, &mut violations);

        // intertwining with the embedding
        let lhs = &pi_s * rep.embed(&r)?;
        let rhs = rep.embed(&s.mul(&r)?)?;
        let res_embed = (lhs - rhs).norm();
        max_residual = max_residual.max(res_embed);
        record(trial, "rep(S)·embed(R) = embed(SR)", res_embed, &mut violations);
    }

    Ok(RepresentationReport {
        trials,
        max_residual,
        violations,
    })
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
