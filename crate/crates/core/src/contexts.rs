//! Measurement contexts: maximal commutative subalgebras represented by
//! joint orthonormal eigenbases.
//!
//! A context is discovered from a commuting family of observables by
//! sequential eigenspace refinement and brought to a canonical form (phase-
//! fixed, lexicographically sorted columns) so equal subalgebras compare
//! equal. Context discovery over a finite observable family enumerates the
//! maximal commuting subsets via the commutation graph.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{cstar_norm, hermitian_eigen, ComplexMatrix, Observable};
use crate::error::{Error, Result};

/// Default relative tolerance for commutation and diagonality checks.
pub const DEFAULT_CONTEXT_TOL: f64 = 1e-9;

/// Default cap on the number of maximal cliques enumerated from a family.
pub const DEFAULT_CLIQUE_CAP: usize = 1_000_000;

/// Phase below which a component is ignored when fixing column phases.
const PHASE_EPS: f64 = 1e-12;

/// Resolution used for canonical sorting and context tokens.
const CANONICAL_RESOLUTION: f64 = 1e-8;

/// A maximal commutative subalgebra, represented by a joint eigenbasis.
///
/// The basis is unitary (columns are the joint eigenvectors) and canonical:
/// the first component of magnitude above 1e-12 in each column is real
/// positive, and columns are sorted lexicographically by their components
/// rounded at 1e-8 resolution.
#[derive(Debug, Clone, Serialize)]
pub struct Context {
    id: String,
    basis: ComplexMatrix,
    source_observables: Vec<String>,
    maximal_within_family: bool,
}

impl Context {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn source_observables(&self) -> &[String] {
        &self.source_observables
    }

    /// False when a degenerate joint eigenspace had to be completed by a
    /// deterministic orthonormal completion, so the subalgebra generated by
    /// the sources alone is not maximal.
    pub fn maximal_within_family(&self) -> bool {
        self.maximal_within_family
    }

    /// k-th basis vector.
    pub fn column(&self, k: usize) -> DVector<Complex64> {
        self.basis.as_dmatrix().column(k).into()
    }

    /// Rank-1 projector onto the k-th basis vector.
    pub fn projector(&self, k: usize) -> ComplexMatrix {
        let v = self.column(k);
        ComplexMatrix::new(&v * v.adjoint()).expect("projector entries are finite")
    }

    /// Rank-1 projector as an observable.
    pub fn projector_observable(&self, k: usize) -> Observable {
        Observable::symmetrized(self.projector(k))
    }
}

/// A labelled finite family of equal-dimension observables.
#[derive(Debug, Clone)]
pub struct ObservableFamily {
    labels: Vec<String>,
    observables: Vec<Observable>,
}

impl ObservableFamily {
    pub fn new(labels: Vec<String>, observables: Vec<Observable>) -> Result<Self> {
        if labels.len() != observables.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} observables",
                labels.len(),
                observables.len()
            )));
        }
        if observables.is_empty() {
            return Err(Error::InvalidInput("family is empty".into()));
        }
        let dim = observables[0].dim();
        for obs in &observables {
            if obs.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: obs.dim(),
                });
            }
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::InvalidInput("duplicate labels in family".into()));
        }
        Ok(Self {
            labels,
            observables,
        })
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }
}

fn round_component(x: f64) -> i64 {
    let scaled = x / CANONICAL_RESOLUTION;
    // round half away from zero, with -0.0 folded to 0
    let r = scaled.round();
    if r == 0.0 {
        0
    } else {
        r as i64
    }
}

fn column_sort_key(col: &DVector<Complex64>) -> Vec<(i64, i64)> {
    col.iter()
        .map(|c| (round_component(c.re), round_component(c.im)))
        .collect()
}

/// Bring a unitary basis to canonical form: fix each column's phase so its
/// first significant component is real positive, then sort columns by their
/// rounded components. Idempotent bit-exactly.
pub(crate) fn canonicalize_basis(basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = basis.nrows();
    let mut columns: Vec<DVector<Complex64>> = (0..n).map(|k| basis.column(k).into()).collect();
    for col in &mut columns {
        if let Some(idx) = col.iter().position(|c| c.norm() > PHASE_EPS) {
            let first = col[idx];
            // already real positive: leave bits untouched so canonicalization
            // is idempotent
            if first.im == 0.0 && first.re > 0.0 {
                continue;
            }
            let phase = first.conj() / Complex64::new(first.norm(), 0.0);
            for c in col.iter_mut() {
                *c *= phase;
            }
            // the pivot component is |first| by construction; pin it so a
            // second pass sees exactly im == 0
            col[idx] = Complex64::new(col[idx].re.abs(), 0.0);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let keys: Vec<Vec<(i64, i64)>> = columns.iter().map(column_sort_key).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = DMatrix::zeros(n, n);
    for (slot, &k) in order.iter().enumerate() {
        out.set_column(slot, &columns[k]);
    }
    out
}

/// Stable token for a canonical basis: FNV-1a over the rounded components.
fn basis_token(basis: &DMatrix<Complex64>) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |v: i64| {
        for byte in v.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
    };
    feed(basis.nrows() as i64);
    for c in basis.iter() {
        feed(round_component(c.re));
        feed(round_component(c.im));
    }
    format!("ctx-{hash:016x}")
}

/// Deterministic orthonormal completion of a subspace given by orthonormal
/// columns: project the standard basis vectors onto the subspace and
/// Gram-Schmidt them in index order.
fn complete_subspace(dim: usize, span: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let target = span.len();
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(target);
    for k in 0..dim {
        if out.len() == target {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(dim);
        // projection of e_k onto the span
        for b in span {
            let coeff = b[k].conj();
            v += b.map(|c| c * coeff);
        }
        for b in &out {
            let coeff = b.dotc(&v);
            v -= b.map(|c| c * coeff);
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / Complex64::new(norm, 0.0));
        }
    }
    assert_eq!(out.len(), target, "orthonormal completion must fill the subspace");
    out
}

struct RefinedBasis {
    vectors: DMatrix<Complex64>,
    /// block boundaries of joint eigenspaces (start indices, then dim)
    blocks: Vec<(usize, usize)>,
}

/// Simultaneously diagonalize a commuting family by refining eigenspaces one
/// observable at a time.
fn refine_jointly(observables: &[Observable], degeneracy_tol: f64) -> Result<RefinedBasis> {
    let dim = observables[0].dim();
    let mut vectors = DMatrix::<Complex64>::identity(dim, dim);
    let mut blocks: Vec<(usize, usize)> = vec![(0, dim)];
    for obs in observables {
        let mut next_blocks = Vec::new();
        for &(start, len) in &blocks {
            if len == 1 {
                next_blocks.push((start, 1));
                continue;
            }
            let sub = vectors.columns(start, len).into_owned();
            let compressed = sub.adjoint() * obs.matrix().as_dmatrix() * &sub;
            // symmetrize rounding noise before the eigensolve
            let herm = compressed.map_with_location(|i, j, c| {
                (c + compressed[(j, i)].conj()) * Complex64::new(0.5, 0.0)
            });
            let (values, inner_vectors) = hermitian_eigen(&herm)?;
            let rotated = &sub * &inner_vectors;
            for (offset, col) in rotated.column_iter().enumerate() {
                vectors.set_column(start + offset, &col);
            }
            // split the block wherever the eigenvalue gap exceeds the tol
            let mut block_start = 0;
            for k in 1..=len {
                if k == len || values[k] - values[k - 1] >= degeneracy_tol {
                    next_blocks.push((start + block_start, k - block_start));
                    block_start = k;
                }
            }
        }
        next_blocks.sort();
        blocks = next_blocks;
    }
    Ok(RefinedBasis { vectors, blocks })
}

fn commutation_residual(a: &Observable, b: &Observable) -> f64 {
    let comm = crate::algebra::commutator(a.matrix(), b.matrix())
        .expect("family dims are validated equal");
    cstar_norm(&comm)
}

fn joint_context_impl(
    observables: &[Observable],
    labels: Vec<String>,
    tol: f64,
) -> Result<Context> {
    if observables.is_empty() {
        return Err(Error::InvalidInput("no observables supplied".into()));
    }
    let dim = observables[0].dim();
    for obs in observables {
        if obs.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: obs.dim(),
            });
        }
    }
    // all pairs must commute within tol (relative to the norms involved)
    for i in 0..observables.len() {
        for j in (i + 1)..observables.len() {
            let residual = commutation_residual(&observables[i], &observables[j]);
            let scale = cstar_norm(observables[i].matrix())
                * cstar_norm(observables[j].matrix());
            if residual > tol * scale.max(1.0) {
                return Err(Error::NotCommuting { i, j, residual });
            }
        }
    }

    let scale: f64 = observables
        .iter()
        .map(|o| cstar_norm(o.matrix()))
        .fold(1.0, f64::max);
    let degeneracy_tol = tol.max(1e-12) * scale;

    let refined = refine_jointly(observables, degeneracy_tol)?;
    if let Some(ctx) = finish_context(&refined, observables, labels.clone(), tol, dim)? {
        return Ok(ctx);
    }
    // Fallback: diagonalize a fixed-seed random linear combination of the
    // sources and verify post hoc.
    let refined = refine_by_random_combination(observables, degeneracy_tol)?;
    match finish_context(&refined, observables, labels, tol, dim)? {
        Some(ctx) => Ok(ctx),
        None => Err(Error::ConvergenceFailure { dim }),
    }
}

/// Complete degenerate blocks, canonicalize, and verify that the basis
/// diagonalizes every source. Returns `None` when verification fails.
fn finish_context(
    refined: &RefinedBasis,
    observables: &[Observable],
    labels: Vec<String>,
    tol: f64,
    dim: usize,
) -> Result<Option<Context>> {
    let mut vectors = refined.vectors.clone();
    let mut maximal = true;
    for &(start, len) in &refined.blocks {
        if len > 1 {
            maximal = false;
            let span: Vec<DVector<Complex64>> =
                (start..start + len).map(|k| vectors.column(k).into()).collect();
            for (offset, v) in complete_subspace(dim, &span).into_iter().enumerate() {
                vectors.set_column(start + offset, &v);
            }
        }
    }

    let canonical = canonicalize_basis(&vectors);

    for obs in observables {
        let transformed = canonical.adjoint() * obs.matrix().as_dmatrix() * &canonical;
        let residue = ComplexMatrix::new(transformed)
            .expect("finite")
            .off_diagonal_residue();
        let norm = cstar_norm(obs.matrix()).max(1.0);
        if residue > tol * norm * 10.0 {
            return Ok(None);
        }
    }

    let id = basis_token(&canonical);
    Ok(Some(Context {
        id,
        basis: ComplexMatrix::new(canonical).expect("canonical basis is finite"),
        source_observables: labels,
        maximal_within_family: maximal,
    }))
}

/// Eigenbasis of `Σ cᵢ Aᵢ` with fixed-seed coefficients; blocks are the
/// eigenvalue clusters of the combination.
fn refine_by_random_combination(
    observables: &[Observable],
    degeneracy_tol: f64,
) -> Result<RefinedBasis> {
    let dim = observables[0].dim();
    let mut rng = crate::rng::CounterRng::new(0x7C3A_11CE, observables.len() as u64);
    let mut combo = DMatrix::<Complex64>::zeros(dim, dim);
    for obs in observables {
        let coeff = Complex64::new(rng.next_range_f64(0.25, 1.0), 0.0);
        combo += obs.matrix().as_dmatrix().map(|c| c * coeff);
    }
    let (values, vectors) = hermitian_eigen(&combo)?;
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=dim {
        if k == dim || values[k] - values[k - 1] >= degeneracy_tol {
            blocks.push((start, k - start));
            start = k;
        }
    }
    Ok(RefinedBasis { vectors, blocks })
}

/// Joint eigenbasis context of a commuting set of observables.
///
/// Degenerate joint eigenspaces are completed deterministically and flagged
/// via `maximal_within_family == false`.
pub fn joint_context(observables: &[Observable], tol: f64) -> Result<Context> {
    let labels = (0..observables.len()).map(|k| k.to_string()).collect();
    joint_context_impl(observables, labels, tol)
}

/// `joint_context` with caller-supplied source labels.
pub fn joint_context_labeled(
    observables: &[Observable],
    labels: &[String],
    tol: f64,
) -> Result<Context> {
    if labels.len() != observables.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} observables",
            labels.len(),
            observables.len()
        )));
    }
    joint_context_impl(observables, labels.to_vec(), tol)
}

/// Bron–Kerbosch maximal-clique enumeration with pivoting.
fn maximal_cliques(adjacency: &[Vec<bool>], cap: usize) -> Result<Vec<Vec<usize>>> {
    fn recurse(
        adjacency: &[Vec<bool>],
        r: &mut Vec<usize>,
        p: Vec<usize>,
        x: Vec<usize>,
        cliques: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if p.is_empty() && x.is_empty() {
            if cliques.len() >= cap {
                return Err(Error::FamilyTooLarge { cap });
            }
            cliques.push(r.clone());
            return Ok(());
        }
        // pivot on the candidate with the most neighbors in p
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| adjacency[u][v]).count())
            .expect("p or x nonempty");
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|&v| !adjacency[pivot][v])
            .collect();
        let mut p = p;
        let mut x = x;
        for v in candidates {
            let next_p = p.iter().copied().filter(|&w| adjacency[v][w]).collect();
            let next_x = x.iter().copied().filter(|&w| adjacency[v][w]).collect();
            r.push(v);
            recurse(adjacency, r, next_p, next_x, cliques, cap)?;
            r.pop();
            p.retain(|&w| w != v);
            x.push(v);
        }
        Ok(())
    }

    let n = adjacency.len();
    let mut cliques = Vec::new();
    recurse(
        adjacency,
        &mut Vec::new(),
        (0..n).collect(),
        Vec::new(),
        &mut cliques,
        cap,
    )?;
    for clique in &mut cliques {
        clique.sort();
    }
    cliques.sort();
    Ok(cliques)
}

/// Enumerate all maximal commuting subsets of the family and return one
/// context per subset, deduplicated by canonical basis form and sorted by id.
pub fn maximal_contexts(
    family: &ObservableFamily,
    tol: f64,
    clique_cap: usize,
) -> Result<Vec<Context>> {
    let n = family.len();
    let obs = family.observables();
    let mut adjacency = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let residual = commutation_residual(&obs[i], &obs[j]);
            let scale = cstar_norm(obs[i].matrix()) * cstar_norm(obs[j].matrix());
            let commutes = residual <= tol * scale.max(1.0);
            adjacency[i][j] = commutes;
            adjacency[j][i] = commutes;
        }
    }
    let cliques = maximal_cliques(&adjacency, clique_cap)?;

    let mut contexts: Vec<Context> = Vec::new();
    for clique in &cliques {
        let members: Vec<Observable> = clique.iter().map(|&k| obs[k].clone()).collect();
        let labels: Vec<String> = clique.iter().map(|&k| family.labels()[k].clone()).collect();
        let ctx = joint_context_impl(&members, labels, tol)?;
        if let Some(existing) = contexts.iter_mut().find(|c| c.id == ctx.id) {
            // same subalgebra reached through different generators
            for label in ctx.source_observables {
                if !existing.source_observables.contains(&label) {
                    existing.source_observables.push(label);
                }
            }
        } else {
            contexts.push(ctx);
        }
    }
    contexts.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(contexts)
}

/// True when the observable is diagonal in the context basis (off-diagonal
/// residue at most `tol · ‖A‖`).
pub fn in_context(a: &Observable, ctx: &Context, tol: f64) -> Result<bool> {
    if a.dim() != ctx.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: ctx.dim(),
        });
    }
    Ok(context_residue(a, ctx) <= tol * cstar_norm(a.matrix()).max(1.0))
}

fn context_residue(a: &Observable, ctx: &Context) -> f64 {
    let b = ctx.basis().as_dmatrix();
    let transformed = b.adjoint() * a.matrix().as_dmatrix() * b;
    ComplexMatrix::new(transformed)
        .expect("finite")
        .off_diagonal_residue()
}

/// The diagonal values `⟨e_k|A|e_k⟩` of an observable in a containing
/// context, in context order.
pub fn restrict(a: &Observable, ctx: &Context, tol: f64) -> Result<Vec<f64>> {
    if a.dim() != ctx.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: ctx.dim(),
        });
    }
    let b = ctx.basis().as_dmatrix();
    let transformed = b.adjoint() * a.matrix().as_dmatrix() * b;
    let residue = ComplexMatrix::new(transformed.clone())
        .expect("finite")
        .off_diagonal_residue();
    if residue > tol * cstar_norm(a.matrix()).max(1.0) {
        return Err(Error::NotInContext {
            context_id: ctx.id().to_string(),
            residue,
        });
    }
    Ok((0..ctx.dim()).map(|k| transformed[(k, k)].re).collect())
}
