//! Riemannian exponential map at the identity, its inversion by shooting
//! (log map), polar coordinates and discrete path lengths.

use crate::diffeo::{metric_inner, Diffeo};
use crate::error::{Error, Result};
use crate::geodesic::{integrate_lagrangian, GeodesicState, IntegratorConfig};
use crate::multiplier::MultiplierSymbol;
use crate::scalar::{lit, to_f64, Scalar};
use crate::solve::solve_dense;
use crate::spectral::PeriodicField;

/// Polar coordinates of a diffeomorphism in the normal chart:
/// `phi = exp(rho w)` with `|w|_{H^s} = 1`.
#[derive(Clone, Debug)]
pub struct PolarCoords<T: Scalar> {
    pub rho: T,
    /// Unit-norm direction; a zero placeholder when rho = 0.
    pub w: PeriodicField<T>,
}

/// Shooting parameters for the log map.
#[derive(Clone, Copy, Debug)]
pub struct ShootingParams<T: Scalar> {
    /// Step size of each exponential-map integration.
    pub dt: T,
    pub max_iter: usize,
    /// Convergence threshold on the l2 norm of the reduced residual.
    pub tol: T,
    /// Centered-difference step for the shooting Jacobian.
    pub fd_step: T,
    /// Reduced mode basis |k| <= min(K, basis_limit); the Jacobian is
    /// square over this basis and the out-of-basis residual is monitored.
    pub basis_limit: i64,
    /// Maximum step halvings in the line search.
    pub max_halvings: usize,
}

impl<T: Scalar> Default for ShootingParams<T> {
    fn default() -> Self {
        Self {
            dt: lit(0.01),
            max_iter: 30,
            tol: lit(1e-10),
            fd_step: lit(1e-5),
            basis_limit: 16,
            max_halvings: 8,
        }
    }
}

/// Riemannian exponential at the identity: time-one point of the
/// geodesic with initial velocity `v0`. A flow that leaves the chart
/// before t = 1 is reported as outside the domain with the attained time.
pub fn exp_id<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    v0: &PeriodicField<T>,
    dt: T,
) -> Result<Diffeo<T>> {
    let grid = v0.grid();
    let state0 = GeodesicState::new(Diffeo::identity(grid), v0.clone(), T::zero());
    let config = IntegratorConfig::new(dt, T::one()).with_stride(usize::MAX / 2);
    let traj = integrate_lagrangian(inertia, &state0, &config)?;
    if let Some(b) = traj.blowup {
        return Err(Error::OutsideDomain {
            attained: to_f64(b.time),
        });
    }
    Ok(traj.final_state().phi.clone())
}

/// Invert the exponential map by Gauss-Newton shooting on the residual
/// `r(v) = coefficients(exp(v) - phi_target)` over the reduced basis,
/// with the Jacobian assembled column-by-column from centered finite
/// differences (each column costs two flow integrations). Non-convergence
/// signals that the target may lie outside the normal neighbourhood.
pub fn log_map<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    target: &Diffeo<T>,
    v_init: &PeriodicField<T>,
    params: &ShootingParams<T>,
) -> Result<PeriodicField<T>> {
    let grid = target.grid();
    let k_newton = grid.max_mode().min(params.basis_limit);
    let dim = (2 * k_newton + 1) as usize;

    let residual = |v: &PeriodicField<T>| -> Result<(Vec<T>, T)> {
        let phi = exp_id(inertia, v, params.dt)?;
        let diff = &phi.displacement().clone() - target.displacement();
        let reduced = field_to_vec(&diff, k_newton);
        let mut outside = T::zero();
        for k in k_newton + 1..=grid.max_mode() {
            outside = outside.max(diff.coeff(k).norm());
        }
        Ok((reduced, outside))
    };

    let assemble_jacobian = |v: &PeriodicField<T>| -> Result<Vec<Vec<T>>> {
        let mut jacobian = vec![vec![T::zero(); dim]; dim];
        for col in 0..dim {
            let mut dv = vec![T::zero(); dim];
            dv[col] = params.fd_step;
            let v_plus = add_reduced(v, &dv, k_newton);
            dv[col] = -params.fd_step;
            let v_minus = add_reduced(v, &dv, k_newton);
            let (r_plus, _) = residual(&v_plus)?;
            let (r_minus, _) = residual(&v_minus)?;
            for (row, jac_row) in jacobian.iter_mut().enumerate() {
                jac_row[col] = (r_plus[row] - r_minus[row]) / (params.fd_step + params.fd_step);
            }
        }
        Ok(jacobian)
    };

    let mut v = v_init.clone();
    let (mut r, mut outside) = residual(&v)?;
    let mut r_norm = norm2(&r);
    // chord variant: the Jacobian is reused until a step stops making
    // progress, then reassembled at the current iterate once
    let mut jacobian: Option<Vec<Vec<T>>> = None;
    let mut jacobian_age = 0usize;
    for iteration in 0..params.max_iter {
        if r_norm <= params.tol && outside <= params.tol {
            return Ok(v);
        }
        if jacobian.is_none() {
            jacobian = Some(assemble_jacobian(&v)?);
            jacobian_age = 0;
        }
        let neg_r: Vec<T> = r.iter().map(|&x| -x).collect();
        let delta = solve_dense(jacobian.as_ref().unwrap(), &neg_r).map_err(|_| {
            Error::OutsideNormalNeighborhood {
                iterations: iteration,
                residual: to_f64(r_norm),
            }
        })?;
        // Armijo halving on |r|^2
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..=params.max_halvings {
            let scaled: Vec<T> = delta.iter().map(|&d| d * alpha).collect();
            let trial = add_reduced(&v, &scaled, k_newton);
            // a trial that left the chart just shrinks the step
            if let Ok((r_trial, out_trial)) = residual(&trial) {
                let trial_norm = norm2(&r_trial);
                if trial_norm * trial_norm <= r_norm * r_norm * (T::one() - lit::<T>(1e-4) * alpha)
                {
                    v = trial;
                    r = r_trial;
                    r_norm = trial_norm;
                    outside = out_trial;
                    accepted = true;
                    break;
                }
            }
            alpha /= lit(2.0);
        }
        if accepted {
            jacobian_age += 1;
        } else {
            if jacobian_age > 0 && iteration + 1 < params.max_iter {
                // stale chord Jacobian; reassemble at the current iterate
                jacobian = None;
                continue;
            }
            return Err(Error::OutsideNormalNeighborhood {
                iterations: iteration + 1,
                residual: to_f64(r_norm),
            });
        }
    }
    if r_norm <= params.tol && outside <= params.tol {
        Ok(v)
    } else {
        Err(Error::OutsideNormalNeighborhood {
            iterations: params.max_iter,
            residual: to_f64(r_norm.max(outside)),
        })
    }
}

/// Polar coordinates (rho, w) of `phi` for the H^s norm defined by the
/// shooting inversion of the exponential map.
pub fn polar_coords<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    s: T,
    phi: &Diffeo<T>,
    params: &ShootingParams<T>,
) -> Result<PolarCoords<T>> {
    let v = log_map(inertia, phi, &PeriodicField::zero(phi.grid()), params)?;
    let rho = v.sobolev_norm(s);
    let w = if rho > T::zero() {
        v.scaled(T::one() / rho)
    } else {
        PeriodicField::zero(phi.grid())
    };
    Ok(PolarCoords { rho, w })
}

/// Length of a discrete path of diffeomorphisms with tangent vectors
/// `velocities`, by the composite trapezoid rule on the metric speed.
/// The path parameter is uniform on [0, 1]; the velocities must agree
/// with finite differences of the path within `consistency_tol` (sup of
/// coefficient distance; second-order stencils).
pub fn path_length<T: Scalar>(
    inertia: &MultiplierSymbol<T>,
    path: &[Diffeo<T>],
    velocities: &[PeriodicField<T>],
    consistency_tol: T,
) -> Result<T> {
    if path.len() < 2 || path.len() != velocities.len() {
        return Err(Error::Validation(
            "path needs >= 2 samples and one velocity per sample".into(),
        ));
    }
    let n = path.len();
    let dt = T::one() / crate::scalar::from_mode((n - 1) as i64);
    for i in 0..n {
        let fd = if i == 0 {
            // (-3 f0 + 4 f1 - f2) / (2 dt)
            &(&path[1].displacement().scaled(lit(4.0)) - &path[0].displacement().scaled(lit(3.0)))
                - &path[2].displacement().clone()
        } else if i == n - 1 {
            &(&path[n - 1].displacement().scaled(lit(3.0))
                - &path[n - 2].displacement().scaled(lit(4.0)))
                + &path[n - 3].displacement().clone()
        } else {
            &path[i + 1].displacement().clone() - path[i - 1].displacement()
        }
        .scaled(T::one() / (dt + dt));
        let err = (&fd - &velocities[i]).max_abs_coeff();
        if err > consistency_tol {
            return Err(Error::Validation(format!(
                "velocity {i} deviates from the path finite difference by {:e} (tolerance {:e})",
                to_f64(err),
                to_f64(consistency_tol)
            )));
        }
    }
    let mut speeds = Vec::with_capacity(n);
    for (phi, xi) in path.iter().zip(velocities.iter()) {
        let g = metric_inner(inertia, phi, xi, xi)?;
        speeds.push(g.max(T::zero()).sqrt());
    }
    let mut sum = (speeds[0] + speeds[n - 1]) / lit(2.0);
    for s in &speeds[1..n - 1] {
        sum += *s;
    }
    Ok(sum * dt)
}

fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Real coordinates of the modes 0..k_max: [c0.re, c1.re, c1.im, ...].
fn field_to_vec<T: Scalar>(f: &PeriodicField<T>, k_max: i64) -> Vec<T> {
    let mut out = Vec::with_capacity((2 * k_max + 1) as usize);
    out.push(f.coeff(0).re);
    for k in 1..=k_max {
        out.push(f.coeff(k).re);
        out.push(f.coeff(k).im);
    }
    out
}

/// Add reduced coordinates onto a field (Hermitian mirror applied).
fn add_reduced<T: Scalar>(f: &PeriodicField<T>, dv: &[T], k_max: i64) -> PeriodicField<T> {
    let mut out = f.clone();
    let c0 = out.coeff(0);
    out.set_coeff(0, num_complex::Complex::new(c0.re + dv[0], T::zero()));
    for k in 1..=k_max {
        let idx = (2 * k - 1) as usize;
        let c = out.coeff(k) + num_complex::Complex::new(dv[idx], dv[idx + 1]);
        out.set_coeff(k, c);
        out.set_coeff(-k, c.conj());
    }
    out
}
