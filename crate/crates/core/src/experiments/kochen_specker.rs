//! Kochen–Specker colorability by exhaustive backtracking.
//!
//! An instance is a finite family of rays grouped into orthogonal contexts;
//! a coloring assigns 0/1 to rays with exactly one 1 per context,
//! consistently across shared rays.  The builtin instance is the standard
//! 18-ray, 9-context set in dimension 4, which admits no coloring.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthogonality tolerance for validating instance contexts.
const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Cap on stored witnesses; the search keeps counting past it.
const WITNESS_CAP: usize = 4096;

/// A ray family with its orthogonal contexts.
#[derive(Debug, Clone)]
pub struct KsInstance {
    dim: usize,
    rays: Vec<DVector<Complex64>>,
    contexts: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RayWire {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

/// Wire format: `{"dim": d, "rays": [{"re": [...], "im": [...]?}], "contexts": [[...]]}`.
#[derive(Serialize, Deserialize)]
pub struct KsInstanceWire {
    dim: usize,
    rays: Vec<RayWire>,
    contexts: Vec<Vec<usize>>,
}

impl KsInstance {
    /// Validate and normalize an instance: every context must consist of
    /// mutually orthogonal rays spanning the space.
    pub fn new(
        dim: usize,
        rays: Vec<DVector<Complex64>>,
        contexts: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInstance("dimension must be positive".into()));
        }
        let mut normalized = Vec::with_capacity(rays.len());
        for (k, ray) in rays.into_iter().enumerate() {
            if ray.len() != dim {
                return Err(Error::InvalidInstance(format!(
                    "ray {k} has length {} (dim {dim})",
                    ray.len()
                )));
            }
            let norm = ray.norm();
            if !(norm.is_finite() && norm > 1e-12) {
                return Err(Error::InvalidInstance(format!("ray {k} is null")));
            }
            normalized.push(ray / Complex64::new(norm, 0.0));
        }
        if contexts.is_empty() {
            return Err(Error::InvalidInstance("no contexts given".into()));
        }
        for (c, ctx) in contexts.iter().enumerate() {
            if ctx.len() != dim {
                return Err(Error::InvalidInstance(format!(
                    "context {c} has {} rays, need {dim} to span",
                    ctx.len()
                )));
            }
            for (pos, &i) in ctx.iter().enumerate() {
                if i >= normalized.len() {
                    return Err(Error::InvalidInstance(format!(
                        "context {c} references missing ray {i}"
                    )));
                }
                for &j in &ctx[pos + 1..] {
                    if i == j {
                        return Err(Error::InvalidInstance(format!(
                            "context {c} repeats ray {i}"
                        )));
                    }
                    let overlap = normalized[i].dotc(&normalized[j]).norm();
                    if overlap > ORTHOGONALITY_TOL {
                        return Err(Error::InvalidInstance(format!(
                            "context {c}: rays {i}, {j} overlap {overlap:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            rays: normalized,
            contexts,
        })
    }

    /// The standard 18-ray, 9-context set in dimension 4.
    pub fn builtin_18ray() -> Self {
        let table: [[f64; 4]; 18] = [
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, -1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, -1.0, 0.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, -1.0, 0.0],
            [1.0, 1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0, -1.0],
            [-1.0, 1.0, 1.0, 1.0],
        ];
        let contexts = vec![
            vec![0, 1, 2, 3],
            vec![0, 4, 5, 6],
            vec![7, 8, 2, 9],
            vec![7, 10, 6, 11],
            vec![1, 4, 12, 13],
            vec![8, 10, 13, 14],
            vec![15, 16, 3, 9],
            vec![15, 17, 5, 11],
            vec![16, 17, 12, 14],
        ];
        let rays = table
            .iter()
            .map(|row| {
                DVector::from_iterator(4, row.iter().map(|&x| Complex64::new(x, 0.0)))
            })
            .collect();
        Self::new(4, rays, contexts).expect("builtin instance is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[DVector<Complex64>] {
        &self.rays
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    pub fn from_wire(wire: KsInstanceWire) -> Result<Self> {
        let rays = wire
            .rays
            .iter()
            .map(|ray| {
                let n = ray.re.len();
                let im = ray.im.clone().unwrap_or_else(|| vec![0.0; n]);
                if im.len() != n {
                    return Err(Error::InvalidInstance(
                        "ray re/im length mismatch".into(),
                    ));
                }
                Ok(DVector::from_iterator(
                    n,
                    ray.re
                        .iter()
                        .zip(&im)
                        .map(|(&re, &im)| Complex64::new(re, im)),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(wire.dim, rays, wire.contexts)
    }

    pub fn to_wire(&self) -> KsInstanceWire {
        KsInstanceWire {
            dim: self.dim,
            rays: self
                .rays
                .iter()
                .map(|ray| RayWire {
                    re: ray.iter().map(|c| c.re).collect(),
                    im: Some(ray.iter().map(|c| c.im).collect()),
                })
                .collect(),
            contexts: self.contexts.clone(),
        }
    }
}

/// Outcome of the exhaustive search.
#[derive(Debug, Clone, Serialize)]
pub enum KsVerdict {
    Colorable {
        witness_count: u64,
        /// stored witnesses (capped); each is one 0/1 assignment per ray
        witnesses: Vec<Vec<u8>>,
        nodes: u64,
    },
    Unsat {
        nodes: u64,
    },
}

impl KsVerdict {
    pub fn is_colorable(&self) -> bool {
        matches!(self, KsVerdict::Colorable { .. })
    }

    pub fn nodes(&self) -> u64 {
        match self {
            KsVerdict::Colorable { nodes, .. } | KsVerdict::Unsat { nodes } => *nodes,
        }
    }
}

struct Search<'a> {
    contexts: &'a [Vec<usize>],
    assignment: Vec<Option<u8>>,
    nodes: u64,
    witnesses: Vec<Vec<u8>>,
    witness_count: u64,
}

impl Search<'_> {
    fn feasible(&self) -> bool {
        for ctx in self.contexts {
            let mut ones = 0usize;
            let mut unknown = 0usize;
            for &ray in ctx {
                match self.assignment[ray] {
                    Some(1) => ones += 1,
                    None => unknown += 1,
                    _ => {}
                }
            }
            if ones > 1 || (unknown == 0 && ones != 1) {
                return false;
            }
        }
        true
    }

    fn run(&mut self, ray: usize) {
        self.nodes += 1;
        if ray == self.assignment.len() {
            if self.feasible() {
                self.witness_count += 1;
                if self.witnesses.len() < WITNESS_CAP {
                    self.witnesses.push(
                        self.assignment
                            .iter()
                            .map(|v| v.expect("complete assignment"))
                            .collect(),
                    );
                }
            }
            return;
        }
        for value in [0u8, 1] {
            self.assignment[ray] = Some(value);
            if self.feasible() {
                self.run(ray + 1);
            }
        }
        self.assignment[ray] = None;
    }
}

/// Exhaustive backtracking search for a 0/1 coloring with exactly one 1 per
/// context. Rays shared between contexts carry one value by construction.
pub fn ks_check(instance: &KsInstance) -> KsVerdict {
    let mut search = Search {
        contexts: instance.contexts(),
        assignment: vec![None; instance.ray_count()],
        nodes: 0,
        witnesses: Vec::new(),
        witness_count: 0,
    };
    search.run(0);
    if search.witness_count > 0 {
        KsVerdict::Colorable {
            witness_count: search.witness_count,
            witnesses: search.witnesses,
            nodes: search.nodes,
        }
    } else {
        KsVerdict::Unsat {
            nodes: search.nodes,
        }
    }
}
