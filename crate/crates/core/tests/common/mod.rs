//! Independent oracles and the scheme-invariant suite shared by the
//! integration tests and the acceptance run.

#![allow(dead_code)]

use roughwave::flux::{FluxSpec, NumericalFlux, NumericalFluxKind};
use roughwave::initial_data::RngState;
use roughwave::mesh::{CellField, Grid};
use roughwave::solver::{step, Boundary, SchemeConfig};

pub const FLUXES: [FluxSpec; 3] = [FluxSpec::Burgers, FluxSpec::Cubic, FluxSpec::Linear];

/// Physical fluxes written out independently of the library.
pub fn f(flux: FluxSpec, u: f64) -> f64 {
    match flux {
        FluxSpec::Burgers => 0.5 * u * u,
        FluxSpec::Cubic => u * u * u / 3.0,
        FluxSpec::Linear => u,
    }
}

pub fn df(flux: FluxSpec, u: f64) -> f64 {
    match flux {
        FluxSpec::Burgers => u,
        FluxSpec::Cubic => u * u,
        FluxSpec::Linear => 1.0,
    }
}

/// `max |f′|` on `[-1, 1]`.
pub fn max_speed(flux: FluxSpec) -> f64 {
    match flux {
        FluxSpec::Burgers | FluxSpec::Cubic | FluxSpec::Linear => 1.0,
    }
}

/// Every supported `(flux, numerical flux)` pair, Lax–Friedrichs bound with
/// `λ = 1 / max|f′|`.
pub fn all_pairs() -> Vec<(FluxSpec, NumericalFlux)> {
    let mut out = Vec::new();
    for flux in FLUXES {
        for kind in NumericalFluxKind::ALL {
            if kind.supports(flux) {
                out.push((flux, kind.with_ratio(1.0 / max_speed(flux))));
            }
        }
    }
    out
}

pub fn uniform(rng: &mut RngState, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_uniform()
}

/// Godunov flux by brute force over `samples + 1` equispaced states.
pub fn godunov_dense(flux: FluxSpec, a: f64, b: f64, samples: usize) -> f64 {
    fn extremum(g: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let h = (hi - lo) / samples as f64;
        // the maximum of g is minus the minimum of −g
        let sign = if a <= b { 1.0 } else { -1.0 };
        let mut acc = [f64::INFINITY; 8];
        let mut i = 0;
        while i + 8 <= samples + 1 {
            for (lane, m) in acc.iter_mut().enumerate() {
                let v = sign * g(lo + h * (i + lane) as f64);
                *m = if v < *m { v } else { *m };
            }
            i += 8;
        }
        let mut best = acc.iter().copied().fold(f64::INFINITY, f64::min);
        for j in i..=samples {
            best = best.min(sign * g(lo + h * j as f64));
        }
        sign * best
    }
    match flux {
        FluxSpec::Burgers => extremum(|u| 0.5 * u * u, a, b, samples),
        FluxSpec::Cubic => extremum(|u| u * u * u / 3.0, a, b, samples),
        FluxSpec::Linear => extremum(|u| u, a, b, samples),
    }
}

/// Engquist–Osher flux from its integral definition, by composite Simpson.
pub fn engquist_osher_integral(flux: FluxSpec, a: f64, b: f64) -> f64 {
    fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let mut s = g(lo) + g(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(lo + i as f64 * h);
        }
        s * h / 3.0
    }
    f(flux, 0.0) + simpson(|s| df(flux, s).max(0.0), 0.0, a) + simpson(|s| df(flux, s).min(0.0), 0.0, b)
}

pub fn random_field(rng: &mut RngState, n: usize) -> CellField {
    let grid = Grid::new(0.0, 1.0, n).unwrap();
    let values = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    CellField::new(grid, values).unwrap()
}

pub fn periodic_tv(v: &[f64]) -> f64 {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[i]).abs()).sum()
}

/// Fixed step `cfl·dx / max|f′|` over `[-1, 1]`.
pub fn fixed_dt(flux: FluxSpec, dx: f64, cfl: f64) -> f64 {
    cfl * dx / max_speed(flux)
}

#[derive(Debug, Default)]
pub struct SuiteReport {
    pub checks: Vec<(String, bool, String)>,
}

impl SuiteReport {
    fn record(&mut self, name: impl Into<String>, ok: bool, detail: String) {
        self.checks.push((name.into(), ok, detail));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.1)
            .map(|c| format!("{}: {}", c.0, c.2))
            .collect()
    }
}

pub const INSTANCES: usize = 20;
const CELLS: usize = 128;
const STEPS: usize = 100;
const CFL: f64 = 0.9;

/// CFL number up to which the three-point scheme is monotone for data in
/// `[-1, 1]`. The Rusanov viscosity depends on the states, which adds up to
/// `½|b − a|·|f″|` to `∂F`; bounding `sup ∂ₐF − inf ∂_bF` gives 4 for Burgers
/// and 5 for the cubic flux.
pub fn ordering_cfl(kind: NumericalFluxKind) -> f64 {
    match kind {
        NumericalFluxKind::Rusanov => 0.2,
        _ => CFL,
    }
}

/// Consistency, monotonicity, maximum principle, TVD, conservation and
/// ordering over seeded random instances for every supported pair.
pub fn invariants_suite() -> SuiteReport {
    let mut report = SuiteReport::default();
    let mut rng = RngState::new(0xC0FFEE);

    for (flux, nf) in all_pairs() {
        let label = format!("{flux}/{}", nf.kind());

        // consistency
        let worst = (0..10_000)
            .map(|_| {
                let a = uniform(&mut rng, -1.0, 1.0);
                (nf.evaluate(flux, a, a).unwrap() - f(flux, a)).abs()
            })
            .fold(0.0, f64::max);
        report.record(format!("consistency {label}"), worst <= 1e-12, format!("max |F(a,a)-f(a)| = {worst:e}"));

        // monotonicity: F nondecreasing in a, nonincreasing in b
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let a = uniform(&mut rng, -1.0, 1.0);
            let a2 = uniform(&mut rng, a, 1.0);
            let b = uniform(&mut rng, -1.0, 1.0);
            let b2 = uniform(&mut rng, b, 1.0);
            let da = nf.evaluate(flux, a, b).unwrap() - nf.evaluate(flux, a2, b).unwrap();
            let db = nf.evaluate(flux, a, b2).unwrap() - nf.evaluate(flux, a, b).unwrap();
            worst = worst.max(da).max(db);
        }
        let probe = roughwave::flux::check_monotone(nf, flux, (-1.0, 1.0), 64).unwrap();
        report.record(
            format!("monotonicity {label}"),
            worst <= 1e-12 && probe.monotone,
            format!("worst random violation {worst:e}, grid probe violations {}", probe.violations),
        );

        for boundary in [Boundary::Outflow, Boundary::Periodic] {
            let scheme = SchemeConfig::new(flux, nf.kind(), CFL, boundary, 1.0).unwrap();
            let order_cfl = ordering_cfl(nf.kind());
            let order_scheme = SchemeConfig::new(flux, nf.kind(), order_cfl, boundary, 1.0).unwrap();
            let mut max_principle: f64 = 0.0;
            let mut tv_increase: f64 = 0.0;
            let mut mass_drift: f64 = 0.0;
            let mut order_violation: f64 = 0.0;
            for _ in 0..INSTANCES {
                let u0 = random_field(&mut rng, CELLS);
                let dx = u0.grid().dx();
                let dt = fixed_dt(flux, dx, CFL);
                let bump: Vec<f64> = u0
                    .values()
                    .iter()
                    .map(|&u| (u + uniform(&mut rng, 0.0, 0.5)).min(1.0))
                    .collect();
                let w0 = CellField::new(*u0.grid(), bump).unwrap();
                let (lo, hi) = u0.range();
                let mass0 = u0.mass();
                let l1 = u0.values().iter().map(|v| v.abs()).sum::<f64>() * dx;
                let order_dt = fixed_dt(flux, dx, order_cfl);
                let (mut u, mut lower, mut upper) = (u0.clone(), u0, w0);
                for _ in 0..STEPS {
                    let next = step(&u, &scheme, dt).unwrap();
                    let (nlo, nhi) = next.range();
                    max_principle = max_principle.max(lo - nlo).max(nhi - hi);
                    if boundary.is_periodic() {
                        tv_increase = tv_increase.max(periodic_tv(next.values()) - periodic_tv(u.values()));
                        mass_drift = mass_drift.max((next.mass() - mass0).abs() / l1);
                    }
                    u = next;
                    lower = step(&lower, &order_scheme, order_dt).unwrap();
                    upper = step(&upper, &order_scheme, order_dt).unwrap();
                    for (a, b) in lower.values().iter().zip(upper.values()) {
                        order_violation = order_violation.max(a - b);
                    }
                }
            }
            let b = boundary.name();
            report.record(
                format!("maximum principle {label} {b}"),
                max_principle <= 1e-12,
                format!("max overshoot {max_principle:e}"),
            );
            report.record(
                format!("ordering {label} {b} cfl={order_cfl}"),
                order_violation <= 1e-12,
                format!("max violation {order_violation:e}"),
            );
            if boundary.is_periodic() {
                report.record(format!("TVD {label} periodic"), tv_increase <= 1e-12, format!("max TV increase {tv_increase:e}"));
                report.record(
                    format!("conservation {label} periodic"),
                    mass_drift <= 1e-10,
                    format!("max relative mass drift {mass_drift:e}"),
                );
            }
        }
    }
    report
}
