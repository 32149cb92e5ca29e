//! Constrained geodesic flows on the homogeneous spaces of the circle
//! diffeomorphism group: one fixed point (quotient by rotations) and
//! three fixed points (quotient by the Moebius group), with the
//! kernel-corrected inversion of the degenerate inertia operator and the
//! equivariance verifier.

use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::geodesic::{
    integrate_lagrangian_with, product, GeodesicState, IntegratorConfig, Trajectory,
};
use crate::multiplier::{MultiplierSymbol, DEFAULT_RANGE_TOL};
use crate::scalar::{lit, period, to_f64, Scalar};
use crate::solve::{condition_estimate, solve_dense};
use crate::spectral::{GridSpec, PeriodicField};

/// Tolerance for "vanishes at the constraint points" preconditions.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Per-step drift threshold that triggers re-projection during
/// constrained integration.
pub const REPROJECT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// One fixed point; kernel of A spanned by the constants.
    Fix1,
    /// Three fixed points; kernel of A spanned by {1, cos, sin}.
    Fix3,
}

/// Fixed-point constraint: the points and the kernel basis of the
/// degenerate inertia operator.
#[derive(Clone, Debug)]
pub struct Constraint<T: Scalar> {
    kind: ConstraintKind,
    points: Vec<T>,
}

impl<T: Scalar> Constraint<T> {
    pub fn fix1(x0: T) -> Result<Self> {
        Self::new(ConstraintKind::Fix1, vec![x0])
    }

    /// Default single fixed point x_0 = 0.
    pub fn fix1_default() -> Self {
        Self::fix1(T::zero()).expect("default point is valid")
    }

    pub fn fix3(points: [T; 3]) -> Result<Self> {
        Self::new(ConstraintKind::Fix3, points.to_vec())
    }

    /// Best-conditioned symmetric choice (0, 2pi/3, 4pi/3).
    pub fn fix3_default() -> Self {
        let third = period::<T>() / lit(3.0);
        Self::fix3([T::zero(), third, third + third]).expect("default points are valid")
    }

    fn new(kind: ConstraintKind, points: Vec<T>) -> Result<Self> {
        let expected = match kind {
            ConstraintKind::Fix1 => 1,
            ConstraintKind::Fix3 => 3,
        };
        if points.len() != expected {
            return Err(Error::Config(format!(
                "{kind:?} needs {expected} points, got {}",
                points.len()
            )));
        }
        for &p in &points {
            if p < T::zero() || p >= period() {
                return Err(Error::Config(format!(
                    "constraint point {} outside [0, 2pi)",
                    to_f64(p)
                )));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if (points[i] - points[j]).abs() < lit(1e-9) {
                    return Err(Error::DegeneratePoints(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        let c = Self { kind, points };
        // the interpolation system must be solvable
        let cond = c.condition_number();
        if !cond.is_finite() {
            return Err(Error::DegeneratePoints(
                "kernel basis is singular at the given points".into(),
            ));
        }
        Ok(c)
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Kernel modes of a compatible inertia operator.
    pub fn kernel_modes(&self) -> &'static [i64] {
        match self.kind {
            ConstraintKind::Fix1 => &[0],
            ConstraintKind::Fix3 => &[-1, 0, 1],
        }
    }

    /// Fields spanning the kernel of A on the given grid.
    pub fn kernel_basis(&self, grid: GridSpec) -> Vec<PeriodicField<T>> {
        match self.kind {
            ConstraintKind::Fix1 => vec![PeriodicField::constant(grid, T::one())],
            ConstraintKind::Fix3 => vec![
                PeriodicField::constant(grid, T::one()),
                PeriodicField::harmonic_cos(grid, 1, T::one()),
                PeriodicField::harmonic_sin(grid, 1, T::one()),
            ],
        }
    }

    /// Interpolation matrix `basis_j(x_i)`.
    fn interpolation_matrix(&self) -> Vec<Vec<T>> {
        match self.kind {
            ConstraintKind::Fix1 => vec![vec![T::one()]],
            ConstraintKind::Fix3 => self
                .points
                .iter()
                .map(|&x| vec![T::one(), x.cos(), x.sin()])
                .collect(),
        }
    }

    /// Recorded (Frobenius) condition estimate of the interpolation
    /// system.
    pub fn condition_number(&self) -> T {
        condition_estimate(&self.interpolation_matrix())
    }

    /// Coefficients of the kernel-basis interpolant matching `values` at
    /// the constraint points.
    fn interpolant_coefficients(&self, values: &[T]) -> Result<Vec<T>> {
        solve_dense(&self.interpolation_matrix(), values)
    }

    fn values_at_points(&self, u: &PeriodicField<T>) -> Result<Vec<T>> {
        self.points.iter().map(|&x| u.synthesize_at(x)).collect()
    }
}

/// Remove the kernel-basis interpolant so the result vanishes at the
/// constraint points; identity on fields that already vanish there.
pub fn project_to_fixed<T: Scalar>(
    u: &PeriodicField<T>,
    constraint: &Constraint<T>,
) -> Result<PeriodicField<T>> {
    let values = constraint.values_at_points(u)?;
    let coeffs = constraint.interpolant_coefficients(&values)?;
    let mut out = u.clone();
    for (c, basis) in coeffs.iter().zip(constraint.kernel_basis(u.grid())) {
        out = &out - &basis.scaled(*c);
    }
    Ok(out)
}

fn check_kernel_compatible<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    constraint: &Constraint<T>,
) -> Result<()> {
    if inertia.kernel_modes() != constraint.kernel_modes() {
        return Err(Error::Config(format!(
            "operator {} has kernel modes {:?}, constraint expects {:?}",
            inertia.name(),
            inertia.kernel_modes(),
            constraint.kernel_modes()
        )));
    }
    Ok(())
}

/// Invert the degenerate inertia operator between the constrained and
/// hatted subspaces: symbol division off the kernel plus the kernel
/// correction that makes the result vanish at the constraint points.
/// `A(constrained_invert(m))` returns `m` on the non-kernel modes.
pub fn constrained_invert<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    m: &PeriodicField<T>,
    constraint: &Constraint<T>,
    tol: T,
) -> Result<PeriodicField<T>> {
    check_kernel_compatible(inertia, constraint)?;
    let particular = inertia.invert_on_range(m, tol)?;
    project_to_fixed(&particular, constraint)
}

/// Euler equation on the homogeneous space:
/// u_t = -A^{-1}{ (Au)_x u + 2 (Au) u_x } with the constrained inverse.
pub fn constrained_euler_rhs<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    u: &PeriodicField<T>,
    constraint: &Constraint<T>,
) -> Result<PeriodicField<T>> {
    check_kernel_compatible(inertia, constraint)?;
    let scale = T::one().max(u.l2_norm());
    for (&x, v) in constraint
        .points()
        .iter()
        .zip(constraint.values_at_points(u)?)
    {
        if v.abs() > lit::<T>(CONSTRAINT_TOL) * scale {
            return Err(Error::Validation(format!(
                "u({}) = {:e} does not vanish at a constraint point",
                to_f64(x),
                to_f64(v)
            )));
        }
    }
    let au = inertia.apply(u);
    let bracket = &(&au.differentiate() * u) + &(&au * &u.differentiate()).scaled(lit(2.0));
    Ok(-&constrained_invert(
        inertia,
        &bracket,
        constraint,
        lit(DEFAULT_RANGE_TOL),
    )?)
}

/// Residual of the equivariance condition `ad*_w (A u) = A (ad_w u)`:
///
///   || A(w_x u - w u_x) + w (Au)_x + 2 w_x (Au) ||_{L2}
///
/// compared over the modes |k| <= K - 2 (products with the low-mode w are
/// exact there). Under the L2 pairing `ad*_w m = -(w m_x + 2 w_x m)`,
/// which fixes the relative sign of the two groups of terms.
pub fn verify_equivariance<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    w: &PeriodicField<T>,
    u: &PeriodicField<T>,
) -> T {
    let ad_w_u = &(&w.differentiate() * u) - &(w * &u.differentiate());
    let au = inertia.apply(u);
    let ad_star = &(w * &au.differentiate()) + &(&w.differentiate() * &au).scaled(lit(2.0));
    let residual = &inertia.apply(&ad_w_u) + &ad_star;
    let cutoff = u.grid().max_mode() - 2;
    residual.truncated(cutoff).l2_norm()
}

/// Integrate the constrained Lagrangian flow from the identity with
/// initial velocity `u0` (which must vanish at the constraint points).
/// The fixed points are monitored every step and the state re-projected
/// onto the constrained subspace when the drift exceeds `REPROJECT_TOL`.
pub fn integrate_constrained<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    constraint: &Constraint<T>,
    u0: &PeriodicField<T>,
    config: &IntegratorConfig<T>,
) -> Result<Trajectory<GeodesicState<T>, T>> {
    check_kernel_compatible(inertia, constraint)?;
    let scale = T::one().max(u0.l2_norm());
    for v in constraint.values_at_points(u0)? {
        if v.abs() > lit::<T>(CONSTRAINT_TOL) * scale {
            return Err(Error::Validation(
                "initial velocity does not vanish at the constraint points".into(),
            ));
        }
    }
    let grid = u0.grid();
    let state0 = GeodesicState::new(Diffeo::identity(grid), u0.clone(), T::zero());
    let invert =
        |m: &PeriodicField<T>| constrained_invert(inertia, m, constraint, lit(DEFAULT_RANGE_TOL));
    let constraint_clone = constraint.clone();
    let mut hook = move |pair: &mut crate::geodesic::LagPair<T>| -> Result<()> {
        let drift_f = max_abs_at_points(&pair.f, &constraint_clone)?;
        let drift_v = max_abs_at_points(&pair.v, &constraint_clone)?;
        if drift_f > lit(REPROJECT_TOL) || drift_v > lit(REPROJECT_TOL) {
            pair.f = project_to_fixed(&pair.f, &constraint_clone)?;
            pair.v = project_to_fixed(&pair.v, &constraint_clone)?;
            let restored = max_abs_at_points(&pair.f, &constraint_clone)?
                .max(max_abs_at_points(&pair.v, &constraint_clone)?);
            if restored > lit(REPROJECT_TOL) {
                return Err(Error::ConstraintDrift {
                    drift: to_f64(restored),
                    tolerance: REPROJECT_TOL,
                });
            }
        }
        Ok(())
    };
    integrate_lagrangian_with(inertia, &state0, config, &invert, Some(&mut hook))
}

fn max_abs_at_points<T: Scalar>(u: &PeriodicField<T>, c: &Constraint<T>) -> Result<T> {
    let mut worst = T::zero();
    for &x in c.points() {
        worst = worst.max(u.synthesize_at(x)?.abs());
    }
    Ok(worst)
}

/// Sup of |phi(x_i) - x_i| over the constraint points of a trajectory
/// state (the monitored constraint drift).
pub fn constraint_drift<T: Scalar>(state: &GeodesicState<T>, c: &Constraint<T>) -> Result<T> {
    max_abs_at_points(state.phi.displacement(), c)
}

/// Kernel-mode coefficients of `ad*_u A u = (Au)_x u + 2 (Au) u_x`; for
/// compatible operators these vanish (the range condition), which is what
/// makes the constrained inversion well posed along the flow.
pub fn range_condition_residual<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    u: &PeriodicField<T>,
    constraint: &Constraint<T>,
) -> T {
    let au = inertia.apply(u);
    let bracket = &product(&au.differentiate(), u, None)
        + &product(&au, &u.differentiate(), None).scaled(lit(2.0));
    let mut worst = T::zero();
    for &k in constraint.kernel_modes() {
        worst = worst.max(bracket.coeff(k).norm());
    }
    worst
}
