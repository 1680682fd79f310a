//! Measurement functionals on cell fields and trajectories.

use crate::error::{Error, Result};
use crate::flux::{FluxSpec, NumericalFluxKind};
use crate::mesh::CellField;
use crate::solver::Trajectory;

/// `Σ |v_{i+1} − v_i|`, plus the wrap-around jump when `periodic`.
pub fn tv_of(values: &[f64], periodic: bool) -> f64 {
    let interior: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    match (periodic, values.first(), values.last()) {
        (true, Some(first), Some(last)) => interior + (first - last).abs(),
        _ => interior,
    }
}

/// Total variation over interior jumps only (outflow convention).
pub fn total_variation(v: &CellField) -> f64 {
    tv_of(v.values(), false)
}

/// Total variation including the jump between the last and first cell.
pub fn total_variation_periodic(v: &CellField) -> f64 {
    tv_of(v.values(), true)
}

fn lip_plus_of(values: &[f64], dx: f64, periodic: bool) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "Lip+ seminorm needs at least two cells".into(),
        ));
    }
    let mut best = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if periodic {
        best = best.max(values[0] - values[values.len() - 1]);
    }
    Ok(best / dx)
}

/// Discrete Lip⁺ seminorm `max_i (v_{i+1} − v_i)/Δx` over interior pairs.
///
/// Signed: nonincreasing data gives a value ≤ 0.
pub fn lip_plus(v: &CellField) -> Result<f64> {
    lip_plus_of(v.values(), v.grid().dx(), false)
}

/// [`lip_plus`] including the wrap-around pair.
pub fn lip_plus_periodic(v: &CellField) -> Result<f64> {
    lip_plus_of(v.values(), v.grid().dx(), true)
}

/// L¹ distance between the piecewise-constant functions `a` and `b`, where
/// `b` lives on the same or a finer nested grid: `Δx_b · Σ_j |a_{j/r} − b_j|`
/// with `r` the refinement factor. Sub-cell structure of `b` counts, so this
/// is the exact function-space norm, not a distance between cell averages.
pub fn l1_distance(a: &CellField, b: &CellField) -> Result<f64> {
    let (ga, gb) = (a.grid(), b.grid());
    if !ga.same_domain(gb) {
        return Err(Error::IncompatibleGrids(format!(
            "domains [{}, {}] and [{}, {}] differ",
            ga.x_left(),
            ga.x_right(),
            gb.x_left(),
            gb.x_right()
        )));
    }
    if gb.n_cells() % ga.n_cells() != 0 {
        return Err(Error::IncompatibleGrids(format!(
            "{} cells is not a refinement of {} cells",
            gb.n_cells(),
            ga.n_cells()
        )));
    }
    let r = gb.n_cells() / ga.n_cells();
    Ok(gb.dx()
        * a.values()
            .iter()
            .zip(b.values().chunks(r))
            .map(|(x, children)| children.iter().map(|y| (x - y).abs()).sum::<f64>())
            .sum::<f64>())
}

/// `Σ_{n=0}^{N} TV(v^n) Δt_n`.
///
/// Time point 0 is weighted by the nominal step and every later point by the
/// length of the step that produced it, so both endpoints are included. A
/// trajectory without steps has zero time integral.
pub fn tv_time_integral(traj: &Trajectory) -> f64 {
    if traj.times.len() < 2 {
        return 0.0;
    }
    let head = traj.per_step_tv[0] * traj.dt_used;
    head + traj
        .times
        .windows(2)
        .zip(&traj.per_step_tv[1..])
        .map(|(w, tv)| tv * (w[1] - w[0]))
        .sum::<f64>()
}

/// Inputs of the time-integrated TV bound and the Kuznetsov-type error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Lip⁺ seminorm of the initial data.
    pub lip_plus_0: f64,
    pub dt: f64,
    pub dx: f64,
    /// Time of the last time point entering the sum.
    pub t_n: f64,
    /// One-step Lip⁺ decay rate.
    pub beta: f64,
    /// Support radius bound.
    pub m: f64,
    /// Local Lipschitz constant of the numerical flux.
    pub c_f: f64,
    /// Lipschitz constant of the flux function.
    pub lip_f: f64,
    /// TV of the initial data.
    pub tv0: f64,
    pub eps: f64,
    pub eps0: f64,
    /// Kernel constant; unknown in closed form, 1 by default.
    pub c: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            lip_plus_0: 0.0,
            dt: 0.0,
            dx: 0.0,
            t_n: 0.0,
            beta: BURGERS_GODUNOV_BETA,
            m: 0.5,
            c_f: 1.0,
            lip_f: 1.0,
            tv0: 0.0,
            eps: 1.0,
            eps0: 1.0,
            c: 1.0,
        }
    }
}

impl BoundInputs {
    fn check_finite(&self) -> Result<()> {
        let fields = [
            ("lip_plus_0", self.lip_plus_0),
            ("dt", self.dt),
            ("dx", self.dx),
            ("t_n", self.t_n),
            ("beta", self.beta),
            ("m", self.m),
            ("c_f", self.c_f),
            ("lip_f", self.lip_f),
            ("tv0", self.tv0),
            ("eps", self.eps),
            ("eps0", self.eps0),
            ("c", self.c),
        ];
        match fields.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, v)) => Err(Error::InvalidArgument(format!("bound input {name} = {v}"))),
            None => Ok(()),
        }
    }
}

/// Lip⁺ decay rate for Burgers' equation with the Godunov flux.
pub const BURGERS_GODUNOV_BETA: f64 = 0.125;

/// The known decay rate for a scheme, if any. All other pairs need `β`
/// supplied explicitly.
pub fn default_beta(flux: FluxSpec, numflux: NumericalFluxKind) -> Option<f64> {
    (flux == FluxSpec::Burgers && numflux == NumericalFluxKind::Godunov).then_some(BURGERS_GODUNOV_BETA)
}

/// `2M (L Δt + (1/β) ln(1 + β t_N L))` with `L` the initial Lip⁺ seminorm.
pub fn lip_bound_rhs(b: &BoundInputs) -> Result<f64> {
    b.check_finite()?;
    if !(b.lip_plus_0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "TV integral bound needs a positive initial Lip+ seminorm, got {}",
            b.lip_plus_0
        )));
    }
    if !(b.beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {}", b.beta)));
    }
    let l = b.lip_plus_0;
    Ok(2.0 * b.m * (l * b.dt + (b.beta * b.t_n * l).ln_1p() / b.beta))
}

/// Bound over measured value: [`lip_bound_rhs`] divided by
/// [`tv_time_integral`].
pub fn sharpness_ratio(traj: &Trajectory, b: &BoundInputs) -> Result<f64> {
    let measured = tv_time_integral(traj);
    if !(measured > 0.0) {
        return Err(Error::InvalidArgument(
            "time-integrated total variation is zero; sharpness ratio undefined".into(),
        ));
    }
    Ok(lip_bound_rhs(b)? / measured)
}

/// Kuznetsov-type a-priori L¹ error bound
///
/// ```text
/// 2‖u₀ − v₀‖ + TV(v₀)(2ε + ε₀‖f‖ + 2C_F max(ε₀, Δt))
///   + C (C_F Δx/ε + ‖f‖ Δt/ε₀) Σ TV(vⁿ) Δt
/// ```
pub fn kuznetsov_bound(b: &BoundInputs, tv_integral: f64, l1_init_err: f64) -> Result<f64> {
    b.check_finite()?;
    if !(b.eps > 0.0 && b.eps0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps and eps0 must be positive, got {} and {}",
            b.eps, b.eps0
        )));
    }
    let initial = 2.0 * l1_init_err;
    let smoothing = b.tv0 * (2.0 * b.eps + b.eps0 * b.lip_f + 2.0 * b.c_f * b.eps0.max(b.dt));
    let consistency = b.c * (b.c_f * b.dx / b.eps + b.lip_f * b.dt / b.eps0) * tv_integral;
    Ok(initial + smoothing + consistency)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` has no spread.
    pub r_squared: f64,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "line fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Least-squares fit of `ln e = slope · ln h + intercept`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<LinearFit> {
    if let Some(&(h, e)) = points.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs positive mesh widths and errors, got ({h}, {e})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(h, e)| (h.ln(), e.ln())).collect();
    linear_fit(&logs)
}
