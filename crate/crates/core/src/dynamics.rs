//! Unitary time evolution, time averaging, and the ground-state functional.
//!
//! The evolution operator is `U(t) = Σ_n e^{iE_n t} p̂_n` over the spectral
//! projectors of the Hamiltonian, and observables evolve as
//! `A(t) = U(t)⁻¹ A U(t)`; with this sign a two-level `H = E₀τ₃` rotates
//! off-diagonals by `e^{∓2iE₀t}`.  The infinite-time average of `A(t)` for a
//! discrete spectrum is the pinching `Ā = Σ_n p̂_n A p̂_n`, computed in closed
//! form.  A nondegenerate ground level yields the rank-1 projector `p̂₀` and
//! the functional `Ψ₀` with `p̂₀ A p̂₀ = Ψ₀(A) p̂₀`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{
    cstar_norm, spectral_decomposition, ComplexMatrix, Observable, SpectralDecomposition,
    DEFAULT_DEGENERACY_TOL_FACTOR,
};
use crate::contexts::Context;
use crate::error::{Error, Result};
use crate::probability::{quantum_average, StateFunctional};
use crate::states::{evaluate, PhysicalState};

/// Observable generating the dynamics, with its spectral decomposition
/// cached.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    observable: Observable,
    decomposition: SpectralDecomposition,
}

impl Hamiltonian {
    pub fn new(observable: Observable, degeneracy_tol: f64) -> Result<Self> {
        let decomposition = spectral_decomposition(&observable, degeneracy_tol)?;
        Ok(Self {
            observable,
            decomposition,
        })
    }

    /// `new` with the default clustering threshold `1e-9 · ‖H‖`.
    pub fn from_observable(observable: Observable) -> Result<Self> {
        let scale = cstar_norm(observable.matrix()).max(1.0);
        Self::new(observable, DEFAULT_DEGENERACY_TOL_FACTOR * scale)
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    pub fn ground_energy(&self) -> f64 {
        self.decomposition.eigenvalues[0]
    }

    pub fn ground_nondegenerate(&self) -> bool {
        self.decomposition.multiplicities[0] == 1
    }

    /// `U(t) = Σ_n e^{iE_n t} p̂_n`.
    pub fn evolution_operator(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (energy, proj) in self
            .decomposition
            .eigenvalues
            .iter()
            .zip(&self.decomposition.projectors)
        {
            let phase = Complex64::new(0.0, energy * t).exp();
            acc += proj.as_dmatrix().map(|c| c * phase);
        }
        ComplexMatrix::new(acc).expect("finite by construction")
    }
}

/// Heisenberg evolution `A(t) = U(t)⁻¹ A U(t)`; preserves Hermiticity and
/// spectrum.
pub fn evolve(a: &Observable, h: &Hamiltonian, t: f64) -> Result<Observable> {
    if a.dim() != h.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: h.dim(),
        });
    }
    if !t.is_finite() {
        return Err(Error::InvalidInput("time must be finite".into()));
    }
    let u = h.evolution_operator(t);
    let evolved = u.as_dmatrix().adjoint() * a.matrix().as_dmatrix() * u.as_dmatrix();
    Ok(Observable::symmetrized(
        ComplexMatrix::new(evolved).expect("finite"),
    ))
}

/// Evolve the observable, then evaluate the physical state on it in the
/// given context. Evolution generically leaves the original context; the
/// caller must supply one that contains `A(t)`.
pub fn evolve_state_eval(
    phi: &PhysicalState,
    a: &Observable,
    ctx: &Context,
    h: &Hamiltonian,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let evolved = evolve(a, h, t)?;
    evaluate(phi, &evolved, ctx, tol)
}

/// Infinite-time average of `A(t)`: the pinching `Ā = Σ_n p̂_n A p̂_n`.
pub fn time_average(a: &Observable, h: &Hamiltonian) -> Result<Observable> {
    if a.dim() != h.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: h.dim(),
        });
    }
    let n = a.dim();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for p in &h.decomposition.projectors {
        acc += p.as_dmatrix() * a.matrix().as_dmatrix() * p.as_dmatrix();
    }
    Ok(Observable::symmetrized(
        ComplexMatrix::new(acc).expect("finite"),
    ))
}

/// Rank-1 projector onto the nondegenerate ground level.
pub fn ground_projector(h: &Hamiltonian) -> Result<ComplexMatrix> {
    if !h.ground_nondegenerate() {
        return Err(Error::DegenerateGround {
            multiplicity: h.decomposition.multiplicities[0],
        });
    }
    Ok(h.decomposition.projectors[0].clone())
}

/// The ground functional `Ψ₀` with weight `p̂₀`: satisfies
/// `p̂₀ A p̂₀ = Ψ₀(A) p̂₀` and `Ψ₀(Î) = 1`.
pub fn ground_functional(h: &Hamiltonian) -> Result<StateFunctional> {
    let p0 = ground_projector(h)?;
    StateFunctional::from_weight(p0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityReport {
    /// `Ψ₀(A)`: quantum mean in the ground state.
    pub quantum_mean: f64,
    /// `φ₀(Ā)`: the time-averaged observable evaluated in a physical ground
    /// state.
    pub time_average_value: f64,
    pub gap: f64,
}

/// Check `Ψ₀(A) = φ₀(Ā)` for a physical ground state `φ₀` (one that
/// evaluates `p̂₀` to 1) in the Hamiltonian eigenbasis context.
pub fn ergodicity_check(
    h: &Hamiltonian,
    a: &Observable,
    phi0: &PhysicalState,
    ctx: &Context,
    tol: f64,
) -> Result<ErgodicityReport> {
    let p0 = ground_projector(h)?;
    let p0_value = evaluate(phi0, &Observable::symmetrized(p0), ctx, tol)?;
    if (p0_value - 1.0).abs() > tol.max(1e-9) {
        return Err(Error::NotGroundState);
    }
    let psi0 = ground_functional(h)?;
    let quantum_mean = quantum_average(&psi0, a.matrix())?.re;
    let averaged = time_average(a, h)?;
    let time_average_value = evaluate(phi0, &averaged, ctx, tol)?;
    Ok(ErgodicityReport {
        quantum_mean,
        time_average_value,
        gap: (quantum_mean - time_average_value).abs(),
    })
}
