//! Physical states: multivalued contextual valuations.
//!
//! A physical state assigns one outcome index (one joint eigenvector) to each
//! context it knows about; restricted to a single context this is exactly a
//! real homomorphism on the corresponding commutative subalgebra.  Across
//! contexts the induced functional may be multivalued.  A quantum state is
//! the equivalence class of physical states sharing the assignment on one
//! anchor context; operationally, a preparation.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{ComplexMatrix, Observable};
use crate::contexts::{in_context, restrict, Context};
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Squared-overlap threshold above which two basis vectors are treated as
/// the same rank-1 eigenprojector.
const SHARED_PROJECTOR_TOL: f64 = 1e-9;

/// Outcome-index assignment per context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhysicalState {
    assignments: BTreeMap<String, usize>,
    dim: usize,
}

impl PhysicalState {
    pub fn from_assignments(assignments: BTreeMap<String, usize>, dim: usize) -> Result<Self> {
        for (ctx, &k) in &assignments {
            if k >= dim {
                return Err(Error::InvalidInput(format!(
                    "outcome {k} out of range for dim {dim} in context {ctx}"
                )));
            }
        }
        Ok(Self { assignments, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn assignments(&self) -> &BTreeMap<String, usize> {
        &self.assignments
    }

    pub fn outcome(&self, context_id: &str) -> Option<usize> {
        self.assignments.get(context_id).copied()
    }
}

/// Rank-1 preparation: an anchor context with a chosen outcome.
#[derive(Debug, Clone, Serialize)]
pub struct QuantumState {
    anchor_context: String,
    outcome: usize,
    projector: ComplexMatrix,
}

impl QuantumState {
    /// Preparation selecting outcome `k` of a context.
    pub fn new(ctx: &Context, outcome: usize) -> Result<Self> {
        if outcome >= ctx.dim() {
            return Err(Error::InvalidInput(format!(
                "outcome {outcome} out of range for dim {}",
                ctx.dim()
            )));
        }
        Ok(Self {
            anchor_context: ctx.id().to_string(),
            outcome,
            projector: ctx.projector(outcome),
        })
    }

    pub fn anchor_context(&self) -> &str {
        &self.anchor_context
    }

    pub fn outcome(&self) -> usize {
        self.outcome
    }

    /// Rank-1 projector `e_k e_k†`.
    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }
}

/// The set of values a physical state takes on one observable, with the
/// contexts contributing each value.
#[derive(Debug, Clone, Serialize)]
pub struct ValueSet {
    entries: Vec<ValueEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValueEntry {
    pub value: f64,
    pub contexts: Vec<String>,
}

impl ValueSet {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn entries(&self) -> &[ValueEntry] {
        &self.entries
    }

    pub fn is_singleton(&self) -> bool {
        self.entries.len() == 1
    }
}

/// Value of the observable under the state's assignment in one context.
pub fn evaluate(phi: &PhysicalState, a: &Observable, ctx: &Context, tol: f64) -> Result<f64> {
    let outcome = phi
        .outcome(ctx.id())
        .ok_or_else(|| Error::UnassignedContext {
            context_id: ctx.id().to_string(),
        })?;
    let values = restrict(a, ctx, tol)?;
    Ok(values[outcome])
}

/// Values over every assigned context containing the observable, grouped
/// within 1e-9.
pub fn evaluate_multivalued(
    phi: &PhysicalState,
    a: &Observable,
    contexts: &[Context],
    tol: f64,
) -> Result<ValueSet> {
    let mut raw: Vec<(f64, String)> = Vec::new();
    for ctx in contexts {
        if phi.outcome(ctx.id()).is_none() {
            continue;
        }
        if !in_context(a, ctx, tol)? {
            continue;
        }
        let value = evaluate(phi, a, ctx, tol)?;
        raw.push((value, ctx.id().to_string()));
    }
    if raw.is_empty() {
        return Err(Error::NoContainingContext);
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut entries: Vec<ValueEntry> = Vec::new();
    for (value, id) in raw {
        match entries.last_mut() {
            Some(last) if (value - last.value).abs() <= 1e-9 => last.contexts.push(id),
            _ => entries.push(ValueEntry {
                value,
                contexts: vec![id],
            }),
        }
    }
    Ok(ValueSet { entries })
}

/// True when the state is single-valued on the observable over the family.
pub fn is_stable(
    phi: &PhysicalState,
    a: &Observable,
    contexts: &[Context],
    tol: f64,
) -> Result<bool> {
    Ok(evaluate_multivalued(phi, a, contexts, tol)?.is_singleton())
}

/// Indices of basis vectors of `ctx` that coincide (up to phase) with basis
/// vectors of `anchor`: pairs `(k_ctx, k_anchor)`.
fn shared_projectors(ctx: &Context, anchor: &Context) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let n = ctx.dim();
    for j in 0..n {
        let fj: DVector<Complex64> = ctx.column(j);
        for m in 0..n {
            let em: DVector<Complex64> = anchor.column(m);
            let overlap = em.dotc(&fj).norm_sqr();
            if overlap >= 1.0 - SHARED_PROJECTOR_TOL {
                pairs.push((j, m));
            }
        }
    }
    pairs
}

/// Construct a physical state: fix the anchor assignment, then give every
/// other context an outcome drawn uniformly (seeded) from the outcomes
/// consistent with the anchor on shared rank-1 eigenprojectors.
///
/// Where a context shares the anchor's chosen eigenvector the outcome is
/// forced; where it shares a different anchor eigenvector that outcome is
/// excluded; everything else is free. The result is single-valued on all
/// observables of the anchor context. Bit-reproducible for a given seed.
pub fn construct_physical_state(
    contexts: &[Context],
    anchor_id: &str,
    anchor_outcome: usize,
    seed: u64,
) -> Result<PhysicalState> {
    let anchor = contexts
        .iter()
        .find(|c| c.id() == anchor_id)
        .ok_or_else(|| Error::UnassignedContext {
            context_id: anchor_id.to_string(),
        })?;
    let dim = anchor.dim();
    if anchor_outcome >= dim {
        return Err(Error::InvalidInput(format!(
            "anchor outcome {anchor_outcome} out of range for dim {dim}"
        )));
    }

    // deterministic context order regardless of input order
    let mut order: Vec<&Context> = contexts.iter().collect();
    order.sort_by(|a, b| a.id().cmp(b.id()));
    order.dedup_by(|a, b| a.id() == b.id());

    let mut assignments = BTreeMap::new();
    assignments.insert(anchor_id.to_string(), anchor_outcome);

    for (index, ctx) in order.iter().enumerate() {
        if ctx.id() == anchor_id {
            continue;
        }
        if ctx.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: ctx.dim(),
            });
        }
        let mut forced: Option<usize> = None;
        let mut allowed = vec![true; ctx.dim()];
        for (j, m) in shared_projectors(ctx, anchor) {
            if m == anchor_outcome {
                forced = Some(j);
            } else {
                allowed[j] = false;
            }
        }
        let outcome = if let Some(j) = forced {
            j
        } else {
            let candidates: Vec<usize> = (0..ctx.dim()).filter(|&j| allowed[j]).collect();
            if candidates.is_empty() {
                return Err(Error::InconsistentIntersection {
                    context_id: ctx.id().to_string(),
                });
            }
            let mut rng = CounterRng::new(seed, index as u64);
            candidates[rng.next_index(candidates.len())]
        };
        assignments.insert(ctx.id().to_string(), outcome);
    }

    Ok(PhysicalState { assignments, dim })
}

/// One detected violation of linearity or multiplicativity within a context.
#[derive(Debug, Clone, Serialize)]
pub struct HomomorphismViolation {
    pub trial: usize,
    pub additive_residual: f64,
    pub multiplicative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomomorphismReport {
    pub trials: usize,
    pub max_additive_residual: f64,
    pub max_multiplicative_residual: f64,
    pub violations: Vec<HomomorphismViolation>,
}

impl HomomorphismReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that the valuation restricted to `ctx` is a real homomorphism:
/// `φ(A+B) = φ(A)+φ(B)` and `φ(AB) = φ(A)φ(B)` on random pairs of
/// observables diagonal in the context basis.
pub fn check_homomorphism(
    phi: &PhysicalState,
    ctx: &Context,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<HomomorphismReport> {
    if phi.outcome(ctx.id()).is_none() {
        return Err(Error::UnassignedContext {
            context_id: ctx.id().to_string(),
        });
    }
    let n = ctx.dim();
    let mut rng = CounterRng::new(seed, 0x40404);
    let mut max_add = 0.0f64;
    let mut max_mul = 0.0f64;
    let mut violations = Vec::new();

    for trial in 0..trials {
        let diag_a: Vec<f64> = (0..n).map(|_| rng.next_range_f64(-2.0, 2.0)).collect();
        let diag_b: Vec<f64> = (0..n).map(|_| rng.next_range_f64(-2.0, 2.0)).collect();
        let a = diagonal_in_context(ctx, &diag_a);
        let b = diagonal_in_context(ctx, &diag_b);
        let sum = Observable::symmetrized(a.matrix().add(b.matrix())?);
        let product = Observable::symmetrized(a.matrix().mul(b.matrix())?);

        let va = evaluate(phi, &a, ctx, tol)?;
        let vb = evaluate(phi, &b, ctx, tol)?;
        let vsum = evaluate(phi, &sum, ctx, tol)?;
        let vprod = evaluate(phi, &product, ctx, tol)?;

        let additive = (vsum - va - vb).abs();
        let multiplicative = (vprod - va * vb).abs();
        max_add = max_add.max(additive);
        max_mul = max_mul.max(multiplicative);
        if additive > tol || multiplicative > tol {
            violations.push(HomomorphismViolation {
                trial,
                additive_residual: additive,
                multiplicative_residual: multiplicative,
            });
        }
    }
    Ok(HomomorphismReport {
        trials,
        max_additive_residual: max_add,
        max_multiplicative_residual: max_mul,
        violations,
    })
}

/// Observable with the given diagonal in the context basis.
pub fn diagonal_in_context(ctx: &Context, diagonal: &[f64]) -> Observable {
    let b = ctx.basis().as_dmatrix();
    let diag = nalgebra::DMatrix::from_diagonal(&DVector::from_iterator(
        diagonal.len(),
        diagonal.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    Observable::symmetrized(
        ComplexMatrix::new(b * diag * b.adjoint()).expect("finite by construction"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli_along, spectrum, Observable};
    use crate::contexts::{joint_context, maximal_contexts, ObservableFamily, DEFAULT_CONTEXT_TOL};

    const TOL: f64 = DEFAULT_CONTEXT_TOL;

    fn tau_z_context() -> Context {
        joint_context(&[pauli_along([0.0, 0.0, 1.0])], TOL).unwrap()
    }

    fn state_with(ctx: &Context, k: usize) -> PhysicalState {
        let mut map = BTreeMap::new();
        map.insert(ctx.id().to_string(), k);
        PhysicalState::from_assignments(map, ctx.dim()).unwrap()
    }

    #[test]
    fn identity_evaluates_to_one_and_zero_to_zero() {
        let ctx = tau_z_context();
        for k in 0..2 {
            let phi = state_with(&ctx, k);
            let one = evaluate(&phi, &Observable::identity(2), &ctx, TOL).unwrap();
            assert!((one - 1.0).abs() < 1e-12);
            let zero_obs = Observable::symmetrized(crate::algebra::ComplexMatrix::zeros(2));
            let zero = evaluate(&phi, &zero_obs, &ctx, TOL).unwrap();
            assert_eq!(zero, 0.0);
        }
    }

    #[test]
    fn ground_branch_of_tau_z() {
        // the state picking the f(z)=-1 branch evaluates τ₃ to -1
        let ctx = tau_z_context();
        let tau3 = pauli_along([0.0, 0.0, 1.0]);
        let values = restrict(&tau3, &ctx, TOL).unwrap();
        let k_minus = values.iter().position(|&v| (v + 1.0).abs() < 1e-9).unwrap();
        let phi = state_with(&ctx, k_minus);
        assert!((evaluate(&phi, &tau3, &ctx, TOL).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unassigned_context_is_an_error() {
        let ctx = tau_z_context();
        let other = joint_context(&[pauli_along([1.0, 0.0, 0.0])], TOL).unwrap();
        let phi = state_with(&ctx, 0);
        let err = evaluate(&phi, &Observable::identity(2), &other, TOL).unwrap_err();
        assert!(matches!(err, Error::UnassignedContext { .. }));
    }

    fn spin_one_squares() -> (Observable, Observable, Observable) {
        (
            crate::algebra::spin_one_square_along([1.0, 0.0, 0.0]),
            crate::algebra::spin_one_square_along([0.0, 1.0, 0.0]),
            crate::algebra::spin_one_square_along([0.0, 0.0, 1.0]),
        )
    }

    // squares of the y/z spin components rotated about x by alpha
    fn rotated_spin_one(alpha: f64) -> (Observable, Observable) {
        (
            crate::algebra::spin_one_square_along([0.0, alpha.cos(), alpha.sin()]),
            crate::algebra::spin_one_square_along([0.0, -alpha.sin(), alpha.cos()]),
        )
    }

    #[test]
    fn multivalued_on_discordant_spin_one_contexts() {
        let (x2, y2, z2) = spin_one_squares();
        let alpha: f64 = 0.7;
        let (yp, zp) = rotated_spin_one(alpha);
        let ctx1 = joint_context(&[x2.clone(), y2, z2], TOL).unwrap();
        let ctx2 = joint_context(&[x2.clone(), yp, zp], TOL).unwrap();
        assert_ne!(ctx1.id(), ctx2.id());

        // choose outcomes where S²x disagrees: 0 in one context, 1 in the other
        let v1 = restrict(&x2, &ctx1, TOL).unwrap();
        let v2 = restrict(&x2, &ctx2, TOL).unwrap();
        let k1 = v1.iter().position(|&v| v.abs() < 1e-9).unwrap();
        let k2 = v2.iter().position(|&v| (v - 1.0).abs() < 1e-9).unwrap();
        let mut map = BTreeMap::new();
        map.insert(ctx1.id().to_string(), k1);
        map.insert(ctx2.id().to_string(), k2);
        let phi = PhysicalState::from_assignments(map, 3).unwrap();

        let contexts = vec![ctx1, ctx2];
        let set = evaluate_multivalued(&phi, &x2, &contexts, TOL).unwrap();
        assert_eq!(set.values().len(), 2);
        assert!(!is_stable(&phi, &x2, &contexts, TOL).unwrap());

        // the identity stays single-valued
        let one = evaluate_multivalued(&phi, &Observable::identity(3), &contexts, TOL).unwrap();
        assert!(one.is_singleton());
        assert!((one.values()[0] - 1.0).abs() < 1e-12);
    }


    #[test]
    fn no_containing_context_is_an_error() {
        let ctx = tau_z_context();
        let phi = state_with(&ctx, 0);
        let tau1 = pauli_along([1.0, 0.0, 0.0]);
        let err = evaluate_multivalued(&phi, &tau1, &[ctx], TOL).unwrap_err();
        assert!(matches!(err, Error::NoContainingContext));
    }

    #[test]
    fn single_context_family_construction() {
        let ctx = tau_z_context();
        let phi = construct_physical_state(&[ctx.clone()], ctx.id(), 1, 99).unwrap();
        assert_eq!(phi.assignments().len(), 1);
        assert_eq!(phi.outcome(ctx.id()), Some(1));
    }

    #[test]
    fn pauli_direction_family_gives_sign_function() {
        // family of τ(n̄ᵢ) contexts: the constructed state is a ±1 sign
        // function with f(-n̄) = -f(n̄)
        let dirs = [
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.6, 0.0, 0.8],
            [0.0, 0.8, -0.6],
        ];
        let mut contexts = Vec::new();
        for d in dirs {
            contexts.push(joint_context(&[pauli_along(d)], TOL).unwrap());
        }
        let anchor_id = contexts[0].id().to_string();
        for seed in [1u64, 2, 3] {
            let phi = construct_physical_state(&contexts, &anchor_id, 0, seed).unwrap();
            for (ctx, d) in contexts.iter().zip(dirs) {
                let plus = pauli_along(d);
                let minus = pauli_along([-d[0], -d[1], -d[2]]);
                let f = evaluate(&phi, &plus, ctx, TOL).unwrap();
                let g = evaluate(&phi, &minus, ctx, TOL).unwrap();
                assert!((f.abs() - 1.0).abs() < 1e-10, "values are ±1");
                assert!((f + g).abs() < 1e-10, "antisymmetry under n -> -n");
            }
        }
    }

    #[test]
    fn anchor_observables_are_stable_after_construction() {
        let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.8, 0.0]];
        let contexts: Vec<Context> = dirs
            .iter()
            .map(|&d| joint_context(&[pauli_along(d)], TOL).unwrap())
            .collect();
        let anchor = contexts[0].clone();
        let phi = construct_physical_state(&contexts, anchor.id(), 0, 5).unwrap();
        let tau3 = pauli_along([0.0, 0.0, 1.0]);
        assert!(is_stable(&phi, &tau3, &contexts, TOL).unwrap());
    }

    #[test]
    fn construction_is_seed_reproducible() {
        let dirs = [
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.6, 0.0, 0.8],
        ];
        let contexts: Vec<Context> = dirs
            .iter()
            .map(|&d| joint_context(&[pauli_along(d)], TOL).unwrap())
            .collect();
        let anchor_id = contexts[2].id().to_string();
        let a = construct_physical_state(&contexts, &anchor_id, 1, 1234).unwrap();
        let b = construct_physical_state(&contexts, &anchor_id, 1, 1234).unwrap();
        assert_eq!(a, b);
        // and in permuted input order
        let mut shuffled = contexts.clone();
        shuffled.reverse();
        let c = construct_physical_state(&shuffled, &anchor_id, 1, 1234).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn shared_projector_forces_agreement() {
        // the two spin-1 contexts share the S²x = 0 eigenvector; anchoring
        // on it forces the other context onto the same vector
        let (x2, y2, z2) = spin_one_squares();
        let (yp, zp) = rotated_spin_one(0.7);
        let ctx1 = joint_context(&[x2.clone(), y2, z2], TOL).unwrap();
        let ctx2 = joint_context(&[x2.clone(), yp, zp], TOL).unwrap();
        let contexts = vec![ctx1.clone(), ctx2.clone()];

        let v1 = restrict(&x2, &ctx1, TOL).unwrap();
        let k_zero = v1.iter().position(|&v| v.abs() < 1e-9).unwrap();
        for seed in 0..5 {
            let phi = construct_physical_state(&contexts, ctx1.id(), k_zero, seed).unwrap();
            let a = evaluate(&phi, &x2, &ctx1, TOL).unwrap();
            let b = evaluate(&phi, &x2, &ctx2, TOL).unwrap();
            assert!(a.abs() < 1e-9 && b.abs() < 1e-9);
            assert!(is_stable(&phi, &x2, &contexts, TOL).unwrap());
        }
    }

    #[test]
    fn homomorphism_report_is_clean() {
        let mut rng = CounterRng::new(4, 0);
        let a = crate::algebra::random_hermitian(&mut rng, 4);
        let ctx = joint_context(&[a], 1e-8).unwrap();
        let phi = state_with(&ctx, 2);
        let report = check_homomorphism(&phi, &ctx, 100, 11, 1e-9).unwrap();
        assert!(report.is_clean(), "residuals: {report:?}");
        assert!(report.max_additive_residual <= 1e-9);
        assert!(report.max_multiplicative_residual <= 1e-9);
    }

    #[test]
    fn squares_evaluate_to_squares() {
        // φ(τ₃²) = φ(τ₃)² = 1
        let ctx = tau_z_context();
        let tau3 = pauli_along([0.0, 0.0, 1.0]);
        let sq = Observable::symmetrized(tau3.matrix().mul(tau3.matrix()).unwrap());
        for k in 0..2 {
            let phi = state_with(&ctx, k);
            let v = evaluate(&phi, &tau3, &ctx, TOL).unwrap();
            let vsq = evaluate(&phi, &sq, &ctx, TOL).unwrap();
            assert!((vsq - v * v).abs() < 1e-12);
        }
    }

    #[test]
    fn valuation_lands_in_spectrum_and_exhausts_it() {
        // φ(A) ∈ σ(A), and every spectrum point is reached by some outcome
        let mut rng = CounterRng::new(8, 0);
        for dim in [2usize, 3, 4] {
            let a = crate::algebra::random_hermitian(&mut rng, dim);
            let ctx = joint_context(&[a.clone()], 1e-8).unwrap();
            let spec = spectrum(&a).unwrap();
            let mut reached = vec![false; spec.len()];
            for k in 0..dim {
                let phi = state_with(&ctx, k);
                let v = evaluate(&phi, &a, &ctx, TOL).unwrap();
                let idx = spec
                    .iter()
                    .position(|&s| (s - v).abs() < 1e-8)
                    .expect("value must be a spectrum point");
                reached[idx] = true;
            }
            assert!(reached.iter().all(|&r| r));
        }
    }

    #[test]
    fn projector_family_construction_always_succeeds() {
        // rank-1 projector family: one orthogonal triad in dim 3
        let e = |k: usize| {
            let mut rows = vec![vec![Complex64::new(0.0, 0.0); 3]; 3];
            rows[k][k] = Complex64::new(1.0, 0.0);
            crate::algebra::make_observable(&rows, 1e-12).unwrap()
        };
        let family = ObservableFamily::new(
            vec!["p0".into(), "p1".into(), "p2".into()],
            vec![e(0), e(1), e(2)],
        )
        .unwrap();
        let contexts = maximal_contexts(&family, TOL, 1000).unwrap();
        let anchor = contexts[0].id().to_string();
        for seed in 0..10 {
            assert!(construct_physical_state(&contexts, &anchor, 0, seed).is_ok());
        }
    }
}
