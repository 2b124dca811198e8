//! Per-device probability spaces and quantum averages.
//!
//! Each measurement context carries its own event algebra: samples are
//! tagged with the context id they were drawn in, and any attempt to
//! aggregate across tags is a hard `ContextMismatch` error.  The measure
//! over outcomes is the Born measure induced by the preparation projector —
//! the one physical input of the model.  Sampling uses one counter-based
//! substream per trial index, so histograms do not depend on how trials are
//! chunked or parallelized.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{ComplexMatrix, Observable};
use crate::contexts::{restrict, Context};
use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::states::QuantumState;

/// A sampling plan: preparation, measuring device (context id), trial count,
/// seed.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementConfig {
    pub preparation: QuantumState,
    pub measurement_context: String,
    pub trials: u64,
    pub seed: u64,
}

impl MeasurementConfig {
    pub fn new(
        preparation: QuantumState,
        measurement_context: &str,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        Ok(Self {
            preparation,
            measurement_context: measurement_context.to_string(),
            trials,
            seed,
        })
    }
}

/// Outcome histogram drawn in one context; the context id is the σ-algebra
/// tag.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    context_id: String,
    outcome_counts: Vec<u64>,
    trials: u64,
    seed: u64,
}

impl SampleSet {
    pub fn context_id(&self) -> &str {
        &self.context_id
    }

    pub fn outcome_counts(&self) -> &[u64] {
        &self.outcome_counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Empirical outcome frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        self.outcome_counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    /// CSV rows `context_id,outcome,count` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("context_id,outcome,count\n");
        for (k, count) in self.outcome_counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.context_id, k, count));
        }
        out
    }
}

/// Positive normalized linear functional on the matrix algebra, represented
/// by its weight matrix (Hermitian, PSD, unit trace).
#[derive(Debug, Clone, Serialize)]
pub struct StateFunctional {
    weight: ComplexMatrix,
}

impl StateFunctional {
    /// Validate and wrap a weight matrix.
    pub fn from_weight(weight: ComplexMatrix) -> Result<Self> {
        let dev = weight.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::InvalidStateFunctional(format!(
                "weight is not Hermitian (deviation {dev:.3e})"
            )));
        }
        let herm = Observable::symmetrized(weight);
        let trace = herm.matrix().trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidStateFunctional(format!(
                "trace {trace} is not 1"
            )));
        }
        let eigenvalues = crate::algebra::spectrum(&herm)?;
        if let Some(&lowest) = eigenvalues.first() {
            if lowest < -1e-12 {
                return Err(Error::InvalidStateFunctional(format!(
                    "negative eigenvalue {lowest:.3e}"
                )));
            }
        }
        Ok(Self {
            weight: herm.matrix().clone(),
        })
    }

    /// The rank-1 functional of a preparation.
    pub fn pure(prep: &QuantumState) -> Self {
        Self {
            weight: prep.projector().clone(),
        }
    }

    /// The tracial functional `R ↦ tr(R)/n`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            weight: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn weight(&self) -> &ComplexMatrix {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    /// `Ψ(R) = tr(weight · R)`.
    pub fn apply(&self, r: &ComplexMatrix) -> Result<Complex64> {
        quantum_average(self, r)
    }
}

/// Born outcome weights of a preparation in a measurement context:
/// `p_k = ⟨e_k|P|e_k⟩` for the preparation projector `P`.
pub fn born_weights(prep: &QuantumState, ctx: &Context) -> Result<Vec<f64>> {
    if prep.dim() != ctx.dim() {
        return Err(Error::DimMismatch {
            left: prep.dim(),
            right: ctx.dim(),
        });
    }
    let b = ctx.basis().as_dmatrix();
    let transformed = b.adjoint() * prep.projector().as_dmatrix() * b;
    let weights: Vec<f64> = (0..ctx.dim())
        .map(|k| transformed[(k, k)].re.max(0.0))
        .collect();
    Ok(weights)
}

/// Draw `trials` outcomes from the Born weights, one counter-based substream
/// per trial index. Deterministic for a given config, independent of the
/// degree of parallelism.
pub fn sample(cfg: &MeasurementConfig, ctx: &Context) -> Result<SampleSet> {
    if ctx.id() != cfg.measurement_context {
        return Err(Error::ContextMismatch {
            sample_context: ctx.id().to_string(),
            requested_context: cfg.measurement_context.clone(),
        });
    }
    let weights = born_weights(&cfg.preparation, ctx)?;
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut counts = vec![0u64; weights.len()];
    for trial in 0..cfg.trials {
        let u = CounterRng::new(cfg.seed, trial).next_f64() * acc;
        let k = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(weights.len() - 1);
        counts[k] += 1;
    }
    Ok(SampleSet {
        context_id: ctx.id().to_string(),
        outcome_counts: counts,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Sample mean of an observable over a sample set drawn in the same context.
///
/// Refuses cross-context aggregation: the sample's σ-algebra tag must match
/// the context the observable is restricted in.
pub fn empirical_mean(s: &SampleSet, a: &Observable, ctx: &Context, tol: f64) -> Result<f64> {
    if s.context_id != ctx.id() {
        return Err(Error::ContextMismatch {
            sample_context: s.context_id.clone(),
            requested_context: ctx.id().to_string(),
        });
    }
    let values = restrict(a, ctx, tol)?;
    let total: f64 = s
        .outcome_counts
        .iter()
        .zip(&values)
        .map(|(&c, &v)| c as f64 * v)
        .sum();
    Ok(total / s.trials as f64)
}

/// `Ψ(R) = tr(weight · R)`; the quantum average, extended linearly to the
/// full algebra.
pub fn quantum_average(psi: &StateFunctional, r: &ComplexMatrix) -> Result<Complex64> {
    if psi.dim() != r.dim() {
        return Err(Error::DimMismatch {
            left: psi.dim(),
            right: r.dim(),
        });
    }
    Ok((psi.weight.as_dmatrix() * r.as_dmatrix()).trace())
}

/// Distribution of an observable's value in a context: push the Born weights
/// forward along the restriction, aggregating outcomes with equal eigenvalue
/// (within 1e-9). Returns `(value, probability)` pairs, values ascending.
pub fn marginal_distribution(
    prep: &QuantumState,
    ctx: &Context,
    a: &Observable,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let weights = born_weights(prep, ctx)?;
    let values = restrict(a, ctx, tol)?;
    let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (value, p) in pairs {
        match out.last_mut() {
            Some(last) if (value - last.0).abs() <= 1e-9 => last.1 += p,
            _ => out.push((value, p)),
        }
    }
    Ok(out)
}
