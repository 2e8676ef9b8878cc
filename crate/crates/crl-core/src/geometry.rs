//! Exact Euclidean projections onto the convex sets the dynamics project onto:
//! the probability simplex, the nonnegative L1 ball, and axis-aligned boxes.

use ndarray::Array1;
use thiserror::Error;

/// Default tolerance when checking that a point already lies in a set.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("vector has dimension {got} but the set has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point violates set membership by {violation:.3e} (tolerance {tol:.1e})")]
    NotInSet { violation: f64, tol: f64 },
    #[error("input vector contains a non-finite entry")]
    NonFinite,
}

/// A projection target.
///
/// `Simplex` is the full probability simplex `{x >= 0, sum x = 1}`,
/// `NonnegL1Ball` is `{x >= 0, ||x||_1 <= radius}`, and `Box` is
/// `{lower <= x <= upper}` elementwise.
#[derive(Debug, Clone)]
pub enum ConvexSet {
    Simplex { dim: usize },
    NonnegL1Ball { dim: usize, radius: f64 },
    Box { lower: Array1<f64>, upper: Array1<f64> },
}

impl ConvexSet {
    pub fn simplex(dim: usize) -> Self {
        assert!(dim >= 1, "simplex dimension must be at least 1");
        ConvexSet::Simplex { dim }
    }

    pub fn nonneg_l1_ball(dim: usize, radius: f64) -> Self {
        assert!(dim >= 1, "ball dimension must be at least 1");
        assert!(radius > 0.0, "ball radius must be positive");
        ConvexSet::NonnegL1Ball { dim, radius }
    }

    /// Ball constructor that tolerates zero dimension, for problems with no
    /// inequality constraints (the mu block is then empty).
    pub(crate) fn nonneg_l1_ball_maybe_empty(dim: usize, radius: f64) -> Self {
        ConvexSet::NonnegL1Ball {
            dim,
            radius: if dim == 0 { 1.0 } else { radius },
        }
    }

    pub fn bounds(lower: Array1<f64>, upper: Array1<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound vectors must match");
        assert!(!lower.is_empty(), "box dimension must be at least 1");
        assert!(
            lower.iter().zip(upper.iter()).all(|(l, u)| l <= u),
            "lower bound exceeds upper bound"
        );
        ConvexSet::Box { lower, upper }
    }

    /// Box `[-radius, radius]^dim`.
    pub fn symmetric_box(dim: usize, radius: f64) -> Self {
        assert!(radius >= 0.0);
        Self::bounds(Array1::from_elem(dim, -radius), Array1::from_elem(dim, radius))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Simplex { dim } => *dim,
            ConvexSet::NonnegL1Ball { dim, .. } => *dim,
            ConvexSet::Box { lower, .. } => lower.len(),
        }
    }

    /// How far `x` is from satisfying the set's defining constraints
    /// (infinity-norm of the constraint violations; 0 for members).
    pub fn membership_violation(&self, x: &Array1<f64>) -> f64 {
        match self {
            ConvexSet::Simplex { .. } => {
                let neg = x.iter().fold(0.0f64, |m, &xi| m.max(-xi));
                let sum: f64 = x.sum();
                neg.max((sum - 1.0).abs())
            }
            ConvexSet::NonnegL1Ball { radius, .. } => {
                let neg = x.iter().fold(0.0f64, |m, &xi| m.max(-xi));
                let sum: f64 = x.iter().map(|&xi| xi.max(0.0)).sum();
                neg.max((sum - radius).max(0.0))
            }
            ConvexSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter())
                .zip(upper.iter())
                .fold(0.0f64, |m, ((&xi, &l), &u)| m.max(l - xi).max(xi - u)),
        }
    }

    pub fn contains(&self, x: &Array1<f64>, tol: f64) -> bool {
        x.len() == self.dim() && self.membership_violation(x) <= tol
    }

    /// Euclidean projection: the nearest point of the set to `y`.
    pub fn project(&self, y: &Array1<f64>) -> Result<Array1<f64>, GeometryError> {
        if y.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(match self {
            ConvexSet::Simplex { .. } => project_simplex(y),
            ConvexSet::NonnegL1Ball { radius, .. } => project_nonneg_l1_ball(y, *radius),
            ConvexSet::Box { lower, upper } => {
                let mut z = y.clone();
                z.zip_mut_with(lower, |zi, &l| *zi = zi.max(l));
                z.zip_mut_with(upper, |zi, &u| *zi = zi.min(u));
                z
            }
        })
    }

    /// Forward-Euler discretization of the projected vector field:
    /// the projection of `x + delta * direction` back onto the set.
    ///
    /// `x` must already lie in the set (within [`MEMBERSHIP_TOL`]); the secant
    /// `(result - x) / delta` converges to the projected field as `delta -> 0`.
    pub fn projected_step(
        &self,
        x: &Array1<f64>,
        direction: &Array1<f64>,
        delta: f64,
    ) -> Result<Array1<f64>, GeometryError> {
        assert!(delta > 0.0, "step size must be positive");
        if x.len() != self.dim() || direction.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: x.len().max(direction.len()),
            });
        }
        let violation = self.membership_violation(x);
        if violation > MEMBERSHIP_TOL {
            return Err(GeometryError::NotInSet {
                violation,
                tol: MEMBERSHIP_TOL,
            });
        }
        self.project(&(x + &(direction * delta)))
    }

    /// The inner product `<b - P(c), c - P(c)>` where `P` is the projection.
    /// Nonpositive for every `b` in the set, by the projection theorem.
    pub fn variational_inequality_gap(
        &self,
        b: &Array1<f64>,
        c: &Array1<f64>,
    ) -> Result<f64, GeometryError> {
        let p = self.project(c)?;
        if b.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: b.len(),
            });
        }
        Ok((b - &p).dot(&(c - &p)))
    }
}

/// Sort-based threshold projection onto the probability simplex.
fn project_simplex(y: &Array1<f64>) -> Array1<f64> {
    let n = y.len();
    let mut sorted: Vec<f64> = y.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite entries"));

    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in sorted.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut z = y.mapv(|yi| (yi - theta).max(0.0));
    let sum = z.sum();
    // the threshold leaves the sum within rounding of 1; renormalize exactly
    if sum > 0.0 {
        z.mapv_inplace(|zi| zi / sum);
    } else {
        z.fill(1.0 / n as f64);
    }
    z
}

/// Projection onto `{x >= 0, ||x||_1 <= radius}`: clamp negatives, and if the
/// remaining mass still exceeds the radius, soft-threshold down to it.
fn project_nonneg_l1_ball(y: &Array1<f64>, radius: f64) -> Array1<f64> {
    let mut z = y.mapv(|yi| yi.max(0.0));
    let sum = z.sum();
    if sum <= radius {
        return z;
    }
    let mut sorted: Vec<f64> = z.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in sorted.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - radius) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    z.mapv_inplace(|zi| (zi - theta).max(0.0));
    let sum = z.sum();
    if sum > 0.0 {
        z.mapv_inplace(|zi| zi * (radius / sum));
    }
    z
}
