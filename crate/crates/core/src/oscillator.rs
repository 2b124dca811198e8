//! Truncated-Fock harmonic oscillator: ladder algebra, ground-projector
//! limit, and chronological Green functions.
//!
//! Green functions of the position operator are computed along two
//! independent routes: the operator route takes the (0,0) element of the
//! time-ordered product of Heisenberg operators `Q(t) = e^{iHt} Q e^{-iHt}`
//! in the truncation, and the pairing route sums over perfect pairings of
//! the time arguments with one causal-propagator factor per pair (the
//! combinatorics the generating functional's derivatives induce).  Odd
//! orders vanish identically.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{cstar_norm, ComplexMatrix, Observable};
use crate::error::{Error, Result};

/// Finite Fock-space truncation of the oscillator ladder algebra.
#[derive(Debug, Clone)]
pub struct FockTruncation {
    levels: usize,
    frequency: f64,
    lowering: ComplexMatrix,
    raising: ComplexMatrix,
}

impl FockTruncation {
    /// Build the N-level truncation at frequency ν: the lowering operator
    /// has `√k` on the superdiagonal.
    pub fn new(levels: usize, frequency: f64) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidInput("need at least 2 levels".into()));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidInput("frequency must be positive".into()));
        }
        let mut lower = DMatrix::<Complex64>::zeros(levels, levels);
        for k in 1..levels {
            lower[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
        }
        let raise = lower.adjoint();
        Ok(Self {
            levels,
            frequency,
            lowering: ComplexMatrix::new(lower).expect("finite"),
            raising: ComplexMatrix::new(raise).expect("finite"),
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn lowering(&self) -> &ComplexMatrix {
        &self.lowering
    }

    pub fn raising(&self) -> &ComplexMatrix {
        &self.raising
    }

    /// Number operator `â⁺â⁻` (diagonal `0..N-1`).
    pub fn number(&self) -> ComplexMatrix {
        let mut m = DMatrix::<Complex64>::zeros(self.levels, self.levels);
        for k in 0..self.levels {
            m[(k, k)] = Complex64::new(k as f64, 0.0);
        }
        ComplexMatrix::new(m).expect("finite")
    }

    /// Position `Q̂ = (â⁻ + â⁺)/√(2ν)`.
    pub fn position(&self) -> Observable {
        let scale = 1.0 / (2.0 * self.frequency).sqrt();
        Observable::symmetrized(
            self.lowering
                .add(&self.raising)
                .expect("same dim")
                .scale(Complex64::new(scale, 0.0)),
        )
    }

    /// Momentum `P̂ = i√(ν/2)(â⁺ − â⁻)`.
    pub fn momentum(&self) -> Observable {
        let scale = (self.frequency / 2.0).sqrt();
        Observable::symmetrized(
            self.raising
                .sub(&self.lowering)
                .expect("same dim")
                .scale(Complex64::new(0.0, scale)),
        )
    }

    /// Hamiltonian `Ĥ = ν(â⁺â⁻ + ½)`, diagonal with values `ν(k + ½)`.
    pub fn hamiltonian(&self) -> Observable {
        let half = ComplexMatrix::identity(self.levels).scale(Complex64::new(0.5, 0.0));
        Observable::symmetrized(
            self.number()
                .add(&half)
                .expect("same dim")
                .scale(Complex64::new(self.frequency, 0.0)),
        )
    }

    /// `exp(-r â⁺â⁻)`, diagonal `e^{-rk}`.
    pub fn damped_number_exp(&self, r: f64) -> ComplexMatrix {
        let mut m = DMatrix::<Complex64>::zeros(self.levels, self.levels);
        for k in 0..self.levels {
            m[(k, k)] = Complex64::new((-r * k as f64).exp(), 0.0);
        }
        ComplexMatrix::new(m).expect("finite")
    }

    /// Heisenberg position `Q̂(t) = e^{iĤt} Q̂ e^{-iĤt}`: entry `(a, b)`
    /// picks up the phase `e^{iν(a-b)t}`.
    pub fn heisenberg_position(&self, t: f64) -> ComplexMatrix {
        let q = self.position();
        let n = self.levels;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let value = q.matrix().get(a, b);
                if value != Complex64::new(0.0, 0.0) {
                    let phase =
                        Complex64::new(0.0, self.frequency * (a as f64 - b as f64) * t).exp();
                    m[(a, b)] = value * phase;
                }
            }
        }
        ComplexMatrix::new(m).expect("finite")
    }
}

/// A Green-function evaluation request: a time tuple over one truncation.
#[derive(Debug, Clone)]
pub struct GreenRequest {
    truncation: FockTruncation,
    times: Vec<f64>,
}

impl GreenRequest {
    pub fn new(truncation: FockTruncation, times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("times must be finite".into()));
        }
        Ok(Self { truncation, times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn truncation(&self) -> &FockTruncation {
        &self.truncation
    }
}

/// Causal (time-ordered) propagator: `D^c(t) = (i/2ν) e^{-iν|t|}`, the
/// closed form of `(1/2π)∫dE e^{-itE}/(ν² - E² - i0)`.
pub fn causal_propagator(t: f64, nu: f64) -> Complex64 {
    Complex64::new(0.0, 1.0 / (2.0 * nu)) * Complex64::new(0.0, -nu * t.abs()).exp()
}

/// Pairing-sum route: sum over perfect pairings of the time arguments with a
/// factor `-i D^c(t_a - t_b)` per pair. Odd orders return exactly 0.
pub fn green_wick(req: &GreenRequest) -> Complex64 {
    let times = &req.times;
    let n = times.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let nu = req.truncation.frequency();
    let mut used = vec![false; n];
    pairing_sum(times, nu, &mut used)
}

fn pairing_sum(times: &[f64], nu: f64, used: &mut Vec<bool>) -> Complex64 {
    let first = match used.iter().position(|&u| !u) {
        Some(k) => k,
        None => return Complex64::new(1.0, 0.0),
    };
    used[first] = true;
    let mut total = Complex64::new(0.0, 0.0);
    for partner in (first + 1)..times.len() {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        let factor =
            Complex64::new(0.0, -1.0) * causal_propagator(times[first] - times[partner], nu);
        total += factor * pairing_sum(times, nu, used);
        used[partner] = false;
    }
    used[first] = false;
    total
}

/// Operator route: `⟨0| T(Q̂(t₁)…Q̂(t_n)) |0⟩` in the truncation. Times are
/// ordered descending (chronological ordering), ties kept in input order.
pub fn green_operator(req: &GreenRequest) -> Complex64 {
    let trunc = &req.truncation;
    if req.times.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let mut ordered = req.times.clone();
    ordered.sort_by(|a, b| b.total_cmp(a));
    let mut product = DMatrix::<Complex64>::identity(trunc.levels(), trunc.levels());
    for &t in &ordered {
        product *= trunc.heisenberg_position(t).as_dmatrix();
    }
    product[(0, 0)]
}

/// Operator route with a truncation-adequacy gate: recompute at `2N` and
/// fail if the value moved by more than `tol` (relative to the magnitude).
pub fn green_operator_checked(req: &GreenRequest, tol: f64) -> Result<Complex64> {
    let value = green_operator(req);
    let doubled = FockTruncation::new(2 * req.truncation.levels(), req.truncation.frequency())?;
    let value2 = green_operator(&GreenRequest::new(doubled, req.times.clone())?);
    let gap = (value - value2).norm();
    if gap > tol * value2.norm().max(1.0) {
        return Err(Error::TruncationInsufficient {
            levels: req.truncation.levels(),
            gap,
            tol,
        });
    }
    Ok(value)
}

/// One row of the ground-projector limit report.
#[derive(Debug, Clone, Serialize)]
pub struct GroundLimitRow {
    pub r: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundLimitReport {
    pub rows: Vec<GroundLimitRow>,
    /// distances decay monotonically
    pub monotone: bool,
    /// each distance equals `e^{-r}` (exact in truncation)
    pub geometric: bool,
    /// the large-r limit matrix coincides with the ground projector of `Ĥ`
    pub limit_matches_ground_projector: bool,
}

/// Distances `‖exp(-r â⁺â⁻) − |0⟩⟨0|‖` over increasing `r`. The difference
/// is diagonal in the Fock basis, so its operator norm is the largest
/// diagonal magnitude: `e^{-r}` exactly.
pub fn ground_projector_limit(trunc: &FockTruncation, r_values: &[f64]) -> Result<GroundLimitReport> {
    if r_values.is_empty() {
        return Err(Error::InvalidInput("need at least one r value".into()));
    }
    if r_values.windows(2).any(|w| w[1] <= w[0]) || r_values[0] < 0.0 {
        return Err(Error::InvalidInput(
            "r values must be nonnegative and increasing".into(),
        ));
    }
    let n = trunc.levels();
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let exp = trunc.damped_number_exp(r);
        let mut distance = 0.0f64;
        for k in 0..n {
            let target = if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            distance = distance.max((exp.get(k, k) - target).norm());
        }
        rows.push(GroundLimitRow { r, distance });
    }
    let monotone = rows.windows(2).all(|w| w[1].distance <= w[0].distance);
    let geometric = rows
        .iter()
        .all(|row| (row.distance - (-row.r).exp()).abs() == 0.0);

    // compare the largest-r matrix with the spectral ground projector
    let h = crate::dynamics::Hamiltonian::from_observable(trunc.hamiltonian())?;
    let p0 = crate::dynamics::ground_projector(&h)?;
    let last = trunc.damped_number_exp(*r_values.last().expect("nonempty"));
    let gap = cstar_norm(&last.sub(&p0)?);
    let limit_matches_ground_projector = gap <= (-r_values.last().unwrap()).exp() + 1e-10;

    Ok(GroundLimitReport {
        rows,
        monotone,
        geometric,
        limit_matches_ground_projector,
    })
}

/// Norm of `exp(-r â⁺â⁻) (â⁺)^k (â⁻)^l exp(-r â⁺â⁻)`; vanishes like
/// `e^{-r(k+l)}` up to a polynomial factor as `r` grows.
pub fn auxiliary_vanishing(trunc: &FockTruncation, k: usize, l: usize, r: f64) -> f64 {
    let mut m = trunc.damped_number_exp(r);
    for _ in 0..k {
        m = m.mul(&trunc.raising).expect("same dim");
    }
    for _ in 0..l {
        m = m.mul(&trunc.lowering).expect("same dim");
    }
    m = m.mul(&trunc.damped_number_exp(r)).expect("same dim");
    cstar_norm(&m)
}

/// CLI-facing comparison of the two Green-function routes.
#[derive(Debug, Clone, Serialize)]
pub struct GreenReport {
    pub times: Vec<f64>,
    pub wick_value: ComplexParts,
    pub operator_value: ComplexParts,
    pub levels: usize,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexParts {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexParts {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

pub fn green_report(req: &GreenRequest) -> GreenReport {
    let wick = green_wick(req);
    let operator = green_operator(req);
    let scale = wick.norm().max(operator.norm()).max(f64::MIN_POSITIVE);
    GreenReport {
        times: req.times.clone(),
        wick_value: wick.into(),
        operator_value: operator.into(),
        levels: req.truncation.levels(),
        relative_gap: (wick - operator).norm() / scale,
    }
}
