//! Positive spanning sets of `ℝᵐ` for the direct-search step.
//!
//! A set of vectors positively spans `ℝᵐ` when every vector is a
//! nonnegative combination of its members. Direction order is part of each
//! construction's contract: the direct search takes the first improving
//! direction, so order determines trajectories.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DcError;
use crate::linalg::{dot, norm};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PssKind {
    /// `{±e₁, …, ±eₘ}`
    D1,
    /// `{e₁, …, eₘ, −Σeᵢ}`
    D2,
    /// Vertices of a regular simplex centered at the origin.
    D3,
    Custom,
}

impl PssKind {
    pub fn build(self, m: usize) -> Result<PositiveSpanningSet, DcError> {
        match self {
            PssKind::D1 => make_d1(m),
            PssKind::D2 => make_d2(m),
            PssKind::D3 => make_d3(m),
            PssKind::Custom => Err(DcError::InvalidInput(
                "custom spanning sets are built with PositiveSpanningSet::custom".into(),
            )),
        }
    }
}

impl fmt::Display for PssKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PssKind::D1 => "d1",
            PssKind::D2 => "d2",
            PssKind::D3 => "d3",
            PssKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for PssKind {
    type Err = DcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(PssKind::D1),
            "d2" => Ok(PssKind::D2),
            "d3" => Ok(PssKind::D3),
            other => Err(DcError::InvalidInput(format!(
                "unknown spanning set '{other}' (expected d1, d2 or d3)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveSpanningSet {
    dim: usize,
    directions: Vec<Point>,
    kind: PssKind,
}

impl PositiveSpanningSet {
    /// Wraps an arbitrary list of directions. Only nonzero-ness and
    /// dimensions are checked; use [`check_positive_spanning`] to test the
    /// spanning property.
    pub fn custom(dim: usize, directions: Vec<Point>) -> Result<Self, DcError> {
        if dim == 0 || directions.is_empty() {
            return Err(DcError::InvalidInput(
                "spanning set needs a positive dimension and at least one direction".into(),
            ));
        }
        for v in &directions {
            if v.len() != dim {
                return Err(DcError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().all(|&c| c == 0.0) {
                return Err(DcError::InvalidInput(
                    "zero direction in spanning set".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            directions,
            kind: PssKind::Custom,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> PssKind {
        self.kind
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

fn require_dim(m: usize) -> Result<(), DcError> {
    if m == 0 {
        return Err(DcError::InvalidInput("dimension must be at least 1".into()));
    }
    Ok(())
}

fn unit(m: usize, i: usize, value: f64) -> Point {
    let mut v = vec![0.0; m];
    v[i] = value;
    v
}

/// `e₁, −e₁, e₂, −e₂, …, eₘ, −eₘ`.
pub fn make_d1(m: usize) -> Result<PositiveSpanningSet, DcError> {
    require_dim(m)?;
    let directions = (0..m)
        .flat_map(|i| [unit(m, i, 1.0), unit(m, i, -1.0)])
        .collect();
    Ok(PositiveSpanningSet {
        dim: m,
        directions,
        kind: PssKind::D1,
    })
}

/// `e₁, …, eₘ` followed by `(−1, …, −1)`.
pub fn make_d2(m: usize) -> Result<PositiveSpanningSet, DcError> {
    require_dim(m)?;
    let mut directions: Vec<Point> = (0..m).map(|i| unit(m, i, 1.0)).collect();
    directions.push(vec![-1.0; m]);
    Ok(PositiveSpanningSet {
        dim: m,
        directions,
        kind: PssKind::D2,
    })
}

/// `m + 1` unit vectors with pairwise inner products `−1/m`.
///
/// The standard basis vectors of `ℝᵐ⁺¹` are centered at their centroid,
/// which puts them in the hyperplane orthogonal to `𝟙`. An orthonormal basis
/// of that hyperplane comes from modified Gram–Schmidt on
/// `eᵢ − eₘ₊₁, i = 1..m`; coordinates in this basis are then normalized.
pub fn make_d3(m: usize) -> Result<PositiveSpanningSet, DcError> {
    require_dim(m)?;
    let n = m + 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        w[m] = -1.0;
        // two passes keep the basis orthonormal to ~1e-16 for large m
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let len = norm(&w);
        w.iter_mut().for_each(|wi| *wi /= len);
        basis.push(w);
    }

    let centroid = 1.0 / n as f64;
    let directions = (0..n)
        .map(|i| {
            let mut v: Point = basis
                .iter()
                .map(|b| {
                    let shift: f64 = b.iter().sum::<f64>() * centroid;
                    b[i] - shift
                })
                .collect();
            let len = norm(&v);
            v.iter_mut().for_each(|c| *c /= len);
            v
        })
        .collect();
    Ok(PositiveSpanningSet {
        dim: m,
        directions,
        kind: PssKind::D3,
    })
}

/// Sampled necessary condition for positive spanning.
///
/// Draws `n_samples` uniform unit vectors `d` and requires, for each, some
/// member `v` with `⟨v, d⟩ > 0`. A set that fails is certainly not positively
/// spanning; a set that passes is very likely to be, but this is not a proof.
pub fn check_positive_spanning(pss: &PositiveSpanningSet, n_samples: usize, rng_seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let m = pss.dim();
    let mut d = vec![0.0; m];
    for _ in 0..n_samples {
        loop {
            d.iter_mut()
                .for_each(|c| *c = StandardNormal.sample(&mut rng));
            let len = norm(&d);
            if len > 0.0 {
                d.iter_mut().for_each(|c| *c /= len);
                break;
            }
        }
        let best = pss
            .directions()
            .iter()
            .map(|v| dot(v, &d))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(best > 0.0) {
            return false;
        }
    }
    true
}
