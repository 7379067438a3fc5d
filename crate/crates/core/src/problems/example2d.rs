use crate::dc::DcProblem;
use crate::Point;

/// `φ(x, y) = x² + y² + x + y − |x| − |y|`, split as
/// `g = (3/2)(x² + y²) + x + y` and `h = |x| + |y| + (1/2)(x² + y²)`.
///
/// Critical points are `(0,0)`, `(−1,0)`, `(0,−1)` and `(−1,−1)`; only the
/// last is d-stationary (and it is the global minimum, `φ = −2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2dProblem {
    /// Value used for `sign(0)` when selecting a subgradient of `|·|` at 0.
    pub sign_at_zero: f64,
}

impl Default for Example2dProblem {
    fn default() -> Self {
        Self { sign_at_zero: 1.0 }
    }
}

impl Example2dProblem {
    pub fn new(sign_at_zero: f64) -> Self {
        assert!(
            (-1.0..=1.0).contains(&sign_at_zero),
            "sign_at_zero must lie in [-1, 1]"
        );
        Self { sign_at_zero }
    }

    /// The four critical points with their display labels.
    pub fn critical_points() -> Vec<(String, Point)> {
        vec![
            ("(-1,-1)".to_string(), vec![-1.0, -1.0]),
            ("(-1,0)".to_string(), vec![-1.0, 0.0]),
            ("(0,-1)".to_string(), vec![0.0, -1.0]),
            ("(0,0)".to_string(), vec![0.0, 0.0]),
        ]
    }
}

fn select_sign(t: f64, at_zero: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        at_zero
    }
}

/// Componentwise `s(xᵢ) + xᵢ`, with `s` the sign function and
/// `s(0) = sign_at_zero`.
pub fn example2d_subgrad_h(x: &[f64], sign_at_zero: f64) -> Point {
    x.iter()
        .map(|&t| select_sign(t, sign_at_zero) + t)
        .collect()
}

/// Solves `3y + 1 = u` componentwise.
pub fn example2d_solve_subproblem(u: &[f64]) -> Point {
    u.iter().map(|&ui| (ui - 1.0) / 3.0).collect()
}

impl DcProblem for Example2dProblem {
    fn dim(&self) -> usize {
        2
    }

    fn rho(&self) -> f64 {
        1.0
    }

    fn eval_g(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| 1.5 * t * t + t).sum()
    }

    fn eval_h(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| t.abs() + 0.5 * t * t).sum()
    }

    fn grad_g(&self, x: &[f64]) -> Point {
        x.iter().map(|&t| 3.0 * t + 1.0).collect()
    }

    fn subgrad_h(&self, x: &[f64]) -> Point {
        example2d_subgrad_h(x, self.sign_at_zero)
    }

    fn solve_subproblem(&self, u: &[f64]) -> Point {
        example2d_solve_subproblem(u)
    }

    fn dir_deriv_h(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        Some(
            x.iter()
                .zip(d)
                .map(|(&t, &di)| {
                    let abs_part = if t == 0.0 { di.abs() } else { t.signum() * di };
                    abs_part + t * di
                })
                .sum(),
        )
    }

    fn phi_direct(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().map(|&t| t * t + t - t.abs()).sum())
    }
}
