//! Analytic flux functions and two-point numerical fluxes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in flux functions `f(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxSpec {
    /// `u²/2`
    Burgers,
    /// `u³/3`
    Cubic,
    /// `u`
    Linear,
}

impl FluxSpec {
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        match self {
            FluxSpec::Burgers => 0.5 * u * u,
            FluxSpec::Cubic => u * u * u / 3.0,
            FluxSpec::Linear => u,
        }
    }

    #[inline]
    pub fn deriv(self, u: f64) -> f64 {
        match self {
            FluxSpec::Burgers => u,
            FluxSpec::Cubic => u * u,
            FluxSpec::Linear => 1.0,
        }
    }

    /// Interior critical points of `f` (where `f′` vanishes).
    pub fn critical_points(self) -> &'static [f64] {
        match self {
            FluxSpec::Burgers | FluxSpec::Cubic => &[0.0],
            FluxSpec::Linear => &[],
        }
    }

    /// `max |f′|` over `[u_min, u_max]`.
    pub fn max_wave_speed(self, u_min: f64, u_max: f64) -> Result<f64> {
        if !(u_min <= u_max) {
            return Err(Error::InvalidArgument(format!(
                "wave speed range [{u_min}, {u_max}] is empty"
            )));
        }
        Ok(match self {
            FluxSpec::Burgers => u_min.abs().max(u_max.abs()),
            FluxSpec::Cubic => (u_min * u_min).max(u_max * u_max),
            FluxSpec::Linear => 1.0,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FluxSpec::Burgers => "burgers",
            FluxSpec::Cubic => "cubic",
            FluxSpec::Linear => "linear",
        }
    }
}

impl fmt::Display for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FluxSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "burgers" => Ok(FluxSpec::Burgers),
            "cubic" => Ok(FluxSpec::Cubic),
            "linear" => Ok(FluxSpec::Linear),
            other => Err(format!(
                "unknown equation `{other}` (expected burgers, cubic or linear)"
            )),
        }
    }
}

/// Numerical flux family without the Lax–Friedrichs ratio attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericalFluxKind {
    Godunov,
    Rusanov,
    LaxFriedrichs,
    EngquistOsher,
    Upwind,
}

impl NumericalFluxKind {
    pub const ALL: [NumericalFluxKind; 5] = [
        NumericalFluxKind::Godunov,
        NumericalFluxKind::Rusanov,
        NumericalFluxKind::LaxFriedrichs,
        NumericalFluxKind::EngquistOsher,
        NumericalFluxKind::Upwind,
    ];

    /// Attach the mesh ratio `lambda = Δt/Δx`; only Lax–Friedrichs uses it.
    pub fn with_ratio(self, lambda: f64) -> NumericalFlux {
        match self {
            NumericalFluxKind::Godunov => NumericalFlux::Godunov,
            NumericalFluxKind::Rusanov => NumericalFlux::Rusanov,
            NumericalFluxKind::LaxFriedrichs => NumericalFlux::LaxFriedrichs { lambda },
            NumericalFluxKind::EngquistOsher => NumericalFlux::EngquistOsher,
            NumericalFluxKind::Upwind => NumericalFlux::Upwind,
        }
    }

    /// Whether this family can be paired with `flux`.
    pub fn supports(self, flux: FluxSpec) -> bool {
        self != NumericalFluxKind::Upwind || flux == FluxSpec::Linear
    }

    pub fn name(self) -> &'static str {
        match self {
            NumericalFluxKind::Godunov => "godunov",
            NumericalFluxKind::Rusanov => "rusanov",
            NumericalFluxKind::LaxFriedrichs => "lax_friedrichs",
            NumericalFluxKind::EngquistOsher => "engquist_osher",
            NumericalFluxKind::Upwind => "upwind",
        }
    }
}

impl fmt::Display for NumericalFluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NumericalFluxKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        NumericalFluxKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown numflux `{s}` (expected godunov, rusanov, lax_friedrichs, engquist_osher or upwind)"
                )
            })
    }
}

/// A fully specified two-point numerical flux `F(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericalFlux {
    Godunov,
    Rusanov,
    /// Classical Lax–Friedrichs with `lambda = Δt/Δx`.
    LaxFriedrichs { lambda: f64 },
    EngquistOsher,
    /// Upwinding for the linear flux (wave speed +1).
    Upwind,
}

impl NumericalFlux {
    pub fn kind(&self) -> NumericalFluxKind {
        match self {
            NumericalFlux::Godunov => NumericalFluxKind::Godunov,
            NumericalFlux::Rusanov => NumericalFluxKind::Rusanov,
            NumericalFlux::LaxFriedrichs { .. } => NumericalFluxKind::LaxFriedrichs,
            NumericalFlux::EngquistOsher => NumericalFluxKind::EngquistOsher,
            NumericalFlux::Upwind => NumericalFluxKind::Upwind,
        }
    }

    /// Validate the pairing with `flux` once so the result can be evaluated
    /// in inner loops without further checks.
    pub fn bind(self, flux: FluxSpec) -> Result<BoundFlux> {
        if let NumericalFlux::LaxFriedrichs { lambda } = self {
            check_lambda(lambda)?;
        }
        if !self.kind().supports(flux) {
            return Err(Error::UnsupportedFlux {
                numflux: self.kind().name(),
                flux: flux.name(),
            });
        }
        Ok(BoundFlux {
            flux,
            numflux: self,
        })
    }

    /// Evaluate `F(a, b)`, validating the pairing first.
    pub fn evaluate(self, flux: FluxSpec, a: f64, b: f64) -> Result<f64> {
        Ok(self.bind(flux)?.eval(a, b))
    }
}

/// A numerical flux whose pairing with an analytic flux has been checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundFlux {
    flux: FluxSpec,
    numflux: NumericalFlux,
}

impl BoundFlux {
    pub fn flux(&self) -> FluxSpec {
        self.flux
    }

    pub fn numflux(&self) -> NumericalFlux {
        self.numflux
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self.numflux {
            NumericalFlux::Godunov => godunov_flux(self.flux, a, b),
            NumericalFlux::Rusanov => rusanov_flux(self.flux, a, b),
            NumericalFlux::LaxFriedrichs { lambda } => lf_unchecked(self.flux, a, b, lambda),
            NumericalFlux::EngquistOsher => engquist_osher_flux(self.flux, a, b),
            // bind() only admits the linear flux here
            NumericalFlux::Upwind => a,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Lax-Friedrichs ratio must be positive, got {lambda}"
        )))
    }
}

/// Exact Riemann-solver flux: `min f` over `[a, b]` when `a ≤ b`, otherwise
/// `max f` over `[b, a]`.
#[inline]
pub fn godunov_flux(flux: FluxSpec, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut best = flux.value(a);
    let fb = flux.value(b);
    let pick = |x: f64, y: f64| if a <= b { x.min(y) } else { x.max(y) };
    best = pick(best, fb);
    for &c in flux.critical_points() {
        if lo < c && c < hi {
            best = pick(best, flux.value(c));
        }
    }
    best
}

/// Local Lax–Friedrichs: `½(f(a)+f(b)) − ½ s (b−a)` with
/// `s = max(|f′(a)|, |f′(b)|)`.
#[inline]
pub fn rusanov_flux(flux: FluxSpec, a: f64, b: f64) -> f64 {
    let s = flux.deriv(a).abs().max(flux.deriv(b).abs());
    0.5 * (flux.value(a) + flux.value(b)) - 0.5 * s * (b - a)
}

/// Classical Lax–Friedrichs: `½(f(a)+f(b)) − (b−a)/(2λ)`.
pub fn lax_friedrichs_flux(flux: FluxSpec, a: f64, b: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lf_unchecked(flux, a, b, lambda))
}

#[inline]
fn lf_unchecked(flux: FluxSpec, a: f64, b: f64, lambda: f64) -> f64 {
    0.5 * (flux.value(a) + flux.value(b)) - (b - a) / (2.0 * lambda)
}

/// Flux-splitting form `f⁺(a) + f⁻(b)` where `f±(u) = ∫₀ᵘ max/min(f′, 0)`.
#[inline]
pub fn engquist_osher_flux(flux: FluxSpec, a: f64, b: f64) -> f64 {
    match flux {
        FluxSpec::Burgers => {
            let ap = a.max(0.0);
            let bm = b.min(0.0);
            0.5 * ap * ap + 0.5 * bm * bm
        }
        // f′ = u² ≥ 0, so the whole flux is carried by f⁺
        FluxSpec::Cubic => a * a * a / 3.0,
        FluxSpec::Linear => a,
    }
}

/// Upwind flux for the linear equation.
pub fn upwind_flux(flux: FluxSpec, a: f64, b: f64) -> Result<f64> {
    NumericalFlux::Upwind.evaluate(flux, a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub monotone: bool,
    /// Number of (a, b) pairs probed.
    pub pairs_checked: usize,
    pub violations: usize,
    /// Largest violation magnitude beyond the tolerance, 0 when monotone.
    pub worst_violation: f64,
    pub worst_at: Option<(f64, f64)>,
}

pub const MONOTONE_TOLERANCE: f64 = 1e-10;

/// Finite-difference probe of `F` over a uniform sampling of
/// `[lo, hi]²`: `F` must not decrease in `a` and not increase in `b`.
pub fn check_monotone(
    numflux: NumericalFlux,
    flux: FluxSpec,
    (lo, hi): (f64, f64),
    samples_per_axis: usize,
) -> Result<MonotonicityReport> {
    if samples_per_axis < 2 {
        return Err(Error::InvalidArgument(
            "monotonicity probe needs at least 2 samples per axis".into(),
        ));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty probe box [{lo}, {hi}]")));
    }
    let bound = numflux.bind(flux)?;
    let delta = (hi - lo) / samples_per_axis as f64;
    let mut report = MonotonicityReport {
        monotone: true,
        pairs_checked: 0,
        violations: 0,
        worst_violation: 0.0,
        worst_at: None,
    };
    for i in 0..samples_per_axis {
        let a = lo + i as f64 * delta;
        for j in 0..samples_per_axis {
            let b = lo + j as f64 * delta;
            let f0 = bound.eval(a, b);
            let drop_in_a = f0 - bound.eval(a + delta, b);
            let rise_in_b = bound.eval(a, b + delta) - f0;
            report.pairs_checked += 1;
            let excess = drop_in_a.max(rise_in_b) - MONOTONE_TOLERANCE;
            if excess > 0.0 {
                report.monotone = false;
                report.violations += 1;
                if excess > report.worst_violation {
                    report.worst_violation = excess;
                    report.worst_at = Some((a, b));
                }
            }
        }
    }
    Ok(report)
}
