use rand::Rng;

use crate::dc::DcProblem;
use crate::error::DcError;
use crate::problems::ClusterData;
use crate::Point;

/// Minimum Sum-of-Squares Clustering,
/// `φ(x¹, …, xᵏ) = (1/n) Σᵢ minⱼ ‖xʲ − aⁱ‖²`, with the DC split
///
/// ```text
/// g(X) = (1/n) Σᵢ Σⱼ ‖xʲ − aⁱ‖²            + (ρ/2) Σⱼ ‖xʲ‖²
/// h(X) = (1/n) Σᵢ maxⱼ Σ_{t≠j} ‖xᵗ − aⁱ‖²  + (ρ/2) Σⱼ ‖xʲ‖²
/// ```
///
/// The decision vector is the concatenation of the `k` centroids.
#[derive(Debug, Clone)]
pub struct MsscProblem {
    data: ClusterData,
    k: usize,
    rho: f64,
}

impl MsscProblem {
    /// Uses `ρ = 1/(n·k)`.
    pub fn new(data: ClusterData, k: usize) -> Result<Self, DcError> {
        let rho = 1.0 / (data.len() as f64 * k as f64);
        Self::with_rho(data, k, rho)
    }

    pub fn with_rho(data: ClusterData, k: usize, rho: f64) -> Result<Self, DcError> {
        if k == 0 {
            return Err(DcError::InvalidInput("k must be at least 1".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(DcError::InvalidParams("rho must be positive".into()));
        }
        Ok(Self { data, k, rho })
    }

    pub fn data(&self) -> &ClusterData {
        &self.data
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Centroids drawn uniformly from the data bounding box.
    pub fn random_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let bounds = self.data.bounding_box();
        (0..self.k)
            .flat_map(|_| {
                bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn centroid<'a>(&self, x: &'a [f64], j: usize) -> &'a [f64] {
        let p = self.data.dim_space();
        &x[j * p..(j + 1) * p]
    }

    /// Index of the closest centroid to `a` (ties go to the smallest index)
    /// together with all squared distances.
    fn distances(&self, x: &[f64], a: &[f64], out: &mut [f64]) -> usize {
        let mut best = 0;
        for j in 0..self.k {
            out[j] = sq_dist(self.centroid(x, j), a);
            if out[j] < out[best] {
                best = j;
            }
        }
        best
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Subgradient of `h` that, for every data point, differentiates the branch
/// `Σ_{t≠j} ‖xᵗ − aⁱ‖²` with `j` the closest centroid.
pub fn mssc_subgrad_h(x: &[f64], data: &ClusterData, rho: f64) -> Point {
    let p = data.dim_space();
    let k = x.len() / p;
    let n = data.len() as f64;
    // (2/n) Σ_{i: jᵢ≠t} (xᵗ − aⁱ) = (2/n)[(n − m_t)xᵗ − (nā − S_t)]
    let mut assigned = vec![0usize; k];
    let mut sums = vec![0.0; k * p];
    for a in data.points() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for j in 0..k {
            let d = sq_dist(&x[j * p..(j + 1) * p], a);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        assigned[best] += 1;
        sums[best * p..(best + 1) * p]
            .iter_mut()
            .zip(a)
            .for_each(|(s, c)| *s += c);
    }
    let mean = data.mean();
    let mut grad = vec![0.0; k * p];
    for (t, &count) in assigned.iter().enumerate() {
        let others = n - count as f64;
        for (c, &m) in mean.iter().enumerate() {
            let idx = t * p + c;
            let rest_sum = n * m - sums[idx];
            grad[idx] = 2.0 / n * (others * x[idx] - rest_sum) + rho * x[idx];
        }
    }
    grad
}

/// Blockwise `xʲ = (uʲ + 2ā)/(2 + ρ)`.
pub fn mssc_solve_subproblem(u: &[f64], data: &ClusterData, rho: f64) -> Point {
    let mean = data.mean();
    let p = data.dim_space();
    u.iter()
        .enumerate()
        .map(|(idx, &ui)| (ui + 2.0 * mean[idx % p]) / (2.0 + rho))
        .collect()
}

impl DcProblem for MsscProblem {
    fn dim(&self) -> usize {
        self.k * self.data.dim_space()
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn eval_g(&self, x: &[f64]) -> f64 {
        let n = self.data.len() as f64;
        let mut total = 0.0;
        for a in self.data.points() {
            for j in 0..self.k {
                total += sq_dist(self.centroid(x, j), a);
            }
        }
        total / n + 0.5 * self.rho * x.iter().map(|c| c * c).sum::<f64>()
    }

    fn eval_h(&self, x: &[f64]) -> f64 {
        let n = self.data.len() as f64;
        let mut dists = vec![0.0; self.k];
        let mut total = 0.0;
        for a in self.data.points() {
            self.distances(x, a, &mut dists);
            let sum: f64 = dists.iter().sum();
            // maxⱼ Σ_{t≠j} dₜ = Σₜ dₜ − minⱼ dⱼ
            let branch = dists
                .iter()
                .map(|&dj| sum - dj)
                .fold(f64::NEG_INFINITY, f64::max);
            total += branch;
        }
        total / n + 0.5 * self.rho * x.iter().map(|c| c * c).sum::<f64>()
    }

    fn grad_g(&self, x: &[f64]) -> Point {
        // (2/n) Σᵢ (xʲ − aⁱ) + ρxʲ = (2 + ρ)xʲ − 2ā
        let mean = self.data.mean();
        let p = self.data.dim_space();
        x.iter()
            .enumerate()
            .map(|(idx, &c)| (2.0 + self.rho) * c - 2.0 * mean[idx % p])
            .collect()
    }

    fn subgrad_h(&self, x: &[f64]) -> Point {
        mssc_subgrad_h(x, &self.data, self.rho)
    }

    fn solve_subproblem(&self, u: &[f64]) -> Point {
        mssc_solve_subproblem(u, &self.data, self.rho)
    }

    /// `h′(X; D) = (1/n) Σᵢ [Tᵢ + max_{j∈Jᵢ} −2⟨xʲ − aⁱ, Dʲ⟩] + ρ⟨X, D⟩`, where
    /// `Tᵢ = Σₜ 2⟨xᵗ − aⁱ, Dᵗ⟩` and `Jᵢ` is the set of closest centroids.
    fn dir_deriv_h(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        let n = self.data.len() as f64;
        let mut dists = vec![0.0; self.k];
        let mut slopes = vec![0.0; self.k];
        let mut total = 0.0;
        for a in self.data.points() {
            let best = self.distances(x, a, &mut dists);
            let min_d = dists[best];
            let mut all = 0.0;
            for (j, slope) in slopes.iter_mut().enumerate() {
                let xj = self.centroid(x, j);
                let dj = self.centroid(d, j);
                *slope = 2.0
                    * xj.iter()
                        .zip(a)
                        .zip(dj)
                        .map(|((xc, ac), dc)| (xc - ac) * dc)
                        .sum::<f64>();
                all += *slope;
            }
            let active_max = (0..self.k)
                .filter(|&j| dists[j] == min_d)
                .map(|j| -slopes[j])
                .fold(f64::NEG_INFINITY, f64::max);
            total += all + active_max;
        }
        let quad: f64 = x.iter().zip(d).map(|(a, b)| a * b).sum();
        Some(total / n + self.rho * quad)
    }

    fn phi_direct(&self, x: &[f64]) -> Option<f64> {
        let n = self.data.len() as f64;
        let total: f64 = self
            .data
            .points()
            .map(|a| {
                (0..self.k)
                    .map(|j| sq_dist(self.centroid(x, j), a))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        Some(total / n)
    }
}
