//! Orientation-preserving circle diffeomorphisms `phi(x) = x + f(x)` with
//! periodic displacement, composition of fields with diffeomorphisms,
//! numerical inversion, conjugated multipliers and the right-invariant
//! metric at `phi`.

use crate::error::{Error, Result};
use crate::multiplier::MultiplierSymbol;
use crate::scalar::{from_mode, lit, period, to_f64, Scalar};
use crate::spectral::{GridSpec, PeriodicField};

/// Default residual tolerance for the per-node inversion solves.
pub const DEFAULT_INVERT_TOL: f64 = 1e-12;

/// How `v` composed with `phi^{-1}` is discretized.
///
/// Both realize the same operator. `InvertThenEvaluate` reconstructs the
/// band-limited inverse displacement and evaluates through it;
/// `DirectSolve` evaluates `v` at the per-node solutions of
/// `phi(y) = x_j`, skipping one reconstruction round trip, and is pinned
/// as the default (the reconstruction path caps the accuracy at the
/// spectral tail of the inverse displacement).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InverseStrategy {
    InvertThenEvaluate,
    #[default]
    DirectSolve,
}

/// Circle diffeomorphism, stored as its periodic displacement plus cached
/// node samples of `phi` and `phi_x`.
#[derive(Clone, Debug)]
pub struct Diffeo<T: Scalar> {
    displacement: PeriodicField<T>,
    phi_nodes: Vec<T>,
    phi_x_nodes: Vec<T>,
    sup_displacement: T,
}

impl<T: Scalar> Diffeo<T> {
    /// Wrap a displacement; fails when `phi_x = 1 + f_x` dips to zero or
    /// below anywhere on a 4x-refined grid (band-limited slopes can dip
    /// between nodes).
    pub fn from_displacement(displacement: PeriodicField<T>) -> Result<Self> {
        let grid = displacement.grid();
        let slope = displacement.differentiate();
        let refine = 4;
        let m = grid.n_points() * refine;
        let h = period::<T>() / from_mode(m as i64);
        let mut min_slope = T::infinity();
        let mut sup_disp = T::zero();
        for i in 0..m {
            let x = from_mode::<T>(i as i64) * h;
            let s = T::one() + slope.synthesize_at(x)?;
            min_slope = min_slope.min(s);
            sup_disp = sup_disp.max(displacement.synthesize_at(x)?.abs());
        }
        // negated comparison so a NaN slope also fails the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(min_slope > T::zero()) {
            return Err(Error::NotADiffeomorphism {
                min_slope: to_f64(min_slope),
            });
        }
        let nodes = grid.nodes::<T>();
        let mut phi_nodes = Vec::with_capacity(nodes.len());
        let mut phi_x_nodes = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            phi_nodes.push(x + displacement.synthesize_at(x)?);
            phi_x_nodes.push(T::one() + slope.synthesize_at(x)?);
        }
        Ok(Self {
            displacement,
            phi_nodes,
            phi_x_nodes,
            sup_displacement: sup_disp,
        })
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self::from_displacement(PeriodicField::zero(grid)).expect("identity is a diffeomorphism")
    }

    /// Rigid rotation by `s`.
    pub fn rotation(grid: GridSpec, s: T) -> Self {
        Self::from_displacement(PeriodicField::constant(grid, s))
            .expect("rotations are diffeomorphisms")
    }

    pub fn grid(&self) -> GridSpec {
        self.displacement.grid()
    }

    pub fn displacement(&self) -> &PeriodicField<T> {
        &self.displacement
    }

    /// phi(x) = x + f(x) at an arbitrary point.
    pub fn phi_at(&self, x: T) -> Result<T> {
        Ok(x + self.displacement.synthesize_at(x)?)
    }

    /// phi'(x) at an arbitrary point.
    pub fn phi_x_at(&self, x: T) -> Result<T> {
        Ok(T::one() + self.displacement.differentiate().synthesize_at(x)?)
    }

    /// Cached phi at the grid nodes.
    pub fn phi_nodes(&self) -> &[T] {
        &self.phi_nodes
    }

    /// Cached phi_x at the grid nodes.
    pub fn phi_x_nodes(&self) -> &[T] {
        &self.phi_x_nodes
    }

    pub fn sup_displacement(&self) -> T {
        self.sup_displacement
    }

    /// Composition `self . other` (displacement arithmetic on the
    /// universal cover: f = f_other + f_self(other(x))).
    pub fn compose(&self, other: &Diffeo<T>) -> Result<Self> {
        let warped = compose_field(&self.displacement, other);
        Self::from_displacement(&other.displacement + &warped)
    }

    /// Values of `phi^{-1}` at the grid nodes: per-node monotone solve of
    /// `phi(y) = x_j` by bisection bracketing with Newton polish. Newton
    /// steps that leave the bracket or stall fall back to bisection.
    pub fn inverse_node_values(&self, tol: T) -> Result<Vec<T>> {
        let grid = self.grid();
        let slope = self.displacement.differentiate();
        let nodes = grid.nodes::<T>();
        let margin = self.sup_displacement + lit(0.1);
        // polish well below tol so the band-limited reconstruction of the
        // inverse keeps the composite residual under 10 tol
        let target_resid = (tol * lit(1e-2)).max(T::epsilon() * lit(64.0));
        let mut out = Vec::with_capacity(nodes.len());
        for &target in &nodes {
            // phi(y) - y is bounded by the sup displacement
            let mut lo = target - margin;
            let mut hi = target + margin;
            let mut y = target - self.displacement.synthesize_at(target)?; // first-order guess
            let mut f_y = self.phi_at(y)? - target;
            for _ in 0..200 {
                if f_y.abs() <= target_resid {
                    break;
                }
                if f_y > T::zero() {
                    hi = y;
                } else {
                    lo = y;
                }
                let deriv = T::one() + slope.synthesize_at(y)?;
                let newton = y - f_y / deriv;
                y = if newton > lo && newton < hi {
                    newton
                } else {
                    (lo + hi) / lit(2.0)
                };
                f_y = self.phi_at(y)? - target;
            }
            if f_y.abs() > tol {
                return Err(Error::Internal(format!(
                    "inverse solve stalled at residual {:e}",
                    to_f64(f_y.abs())
                )));
            }
            out.push(y);
        }
        Ok(out)
    }

    /// Numerical inverse as a `Diffeo`: per-node solves, analysis of the
    /// inverse displacement, and a composite residual check
    /// `sup |phi(phi^{-1}(x_j)) - x_j| <= 10 tol` on the reconstruction.
    pub fn invert(&self, tol: T) -> Result<Self> {
        let grid = self.grid();
        let ys = self.inverse_node_values(tol)?;
        let nodes = grid.nodes::<T>();
        let disp: Vec<T> = ys.iter().zip(nodes.iter()).map(|(&y, &x)| y - x).collect();
        let inverse = Self::from_displacement(PeriodicField::analyze(grid, &disp)?)?;
        let mut worst = T::zero();
        for (j, &x) in nodes.iter().enumerate() {
            let resid = (self.phi_at(inverse.phi_nodes[j])? - x).abs();
            worst = worst.max(resid);
        }
        if worst > tol * lit(10.0) {
            let k = grid.max_mode();
            let mut nyq = T::zero();
            for (j, &d) in disp.iter().enumerate() {
                nyq = if j % 2 == 0 { nyq + d } else { nyq - d };
            }
            return Err(Error::Internal(format!(
                "composite inverse residual {:e} exceeds 10 tol = {:e} (sup disp {:e}, tail |g^({k})| = {:e}, nyquist {:e}); raise the resolution",
                to_f64(worst),
                to_f64(tol * lit(10.0)),
                to_f64(self.sup_displacement),
                to_f64(inverse.displacement.coeff(k).norm()),
                to_f64(nyq.abs() / from_mode(grid.n_points() as i64))
            )));
        }
        Ok(inverse)
    }
}

/// `v . phi`: evaluate the series at the warped nodes and re-analyze.
pub fn compose_field<T: Scalar>(v: &PeriodicField<T>, phi: &Diffeo<T>) -> PeriodicField<T> {
    let grid = phi.grid();
    let samples: Vec<T> = phi
        .phi_nodes()
        .iter()
        .map(|&y| v.synthesize_at(y).expect("real field"))
        .collect();
    PeriodicField::analyze(grid, &samples).expect("sample count matches the grid")
}

/// `v . phi^{-1}` under the chosen discretization.
pub fn compose_with_inverse<T: Scalar>(
    v: &PeriodicField<T>,
    phi: &Diffeo<T>,
    tol: T,
    strategy: InverseStrategy,
) -> Result<PeriodicField<T>> {
    match strategy {
        InverseStrategy::InvertThenEvaluate => Ok(compose_field(v, &phi.invert(tol)?)),
        InverseStrategy::DirectSolve => {
            let ys = phi.inverse_node_values(tol)?;
            let samples: Vec<T> = ys
                .iter()
                .map(|&y| v.synthesize_at(y))
                .collect::<Result<_>>()?;
            PeriodicField::analyze(phi.grid(), &samples)
        }
    }
}

/// Conjugated operator `P_phi v = (P (v . phi^{-1})) . phi`.
pub fn conjugate_apply<T: Scalar>(
    symbol: &MultiplierSymbol<T>,
    phi: &Diffeo<T>,
    v: &PeriodicField<T>,
) -> Result<PeriodicField<T>> {
    let pulled = compose_with_inverse(v, phi, lit(DEFAULT_INVERT_TOL), InverseStrategy::default())?;
    Ok(compose_field(&symbol.apply(&pulled), phi))
}

/// Right-invariant inner product at `phi`:
/// `(1/2pi) int eta (A_phi xi) phi_x dx` by node quadrature.
pub fn metric_inner<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    phi: &Diffeo<T>,
    xi: &PeriodicField<T>,
    eta: &PeriodicField<T>,
) -> Result<T> {
    let conjugated = conjugate_apply(inertia, phi, xi)?;
    let eta_samples = eta.grid_samples();
    let a_samples = conjugated.grid_samples();
    let mut sum = T::zero();
    for ((e, a), px) in eta_samples
        .iter()
        .zip(a_samples.iter())
        .zip(phi.phi_x_nodes().iter())
    {
        sum += *e * *a * *px;
    }
    Ok(sum / from_mode(phi.grid().n_points() as i64))
}
