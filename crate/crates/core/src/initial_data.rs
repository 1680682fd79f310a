//! Seeded random streams and rough initial data.
//!
//! Every random quantity in the crate comes from [`RngState`], a splitmix64
//! generator with Box–Muller normals. The recipe is fixed bit-for-bit so a
//! seed determines an experiment on any IEEE-754 platform:
//!
//! * `next_u64`: splitmix64 with increment `0x9E3779B97F4A7C15`.
//! * uniforms: `(x >> 11) · 2⁻⁵³`, with 0 replaced by `2⁻⁵³`.
//! * normals: `√(−2 ln u₁) · cos(2π u₂)`, the sine partner is returned by the
//!   following call.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{CellField, Grid};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Largest supported midpoint-displacement level (2^26 + 1 points).
pub const MAX_FBM_LEVEL: u32 = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct RngState {
    state: u64,
    spare: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `(0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        let u = (self.next_u64() >> 11) as f64 * UNIT_53;
        if u == 0.0 {
            UNIT_53
        } else {
            u
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let (z0, z1) = box_muller(u1, u2);
        self.spare = Some(z1);
        z0
    }
}

/// The Box–Muller pair `(r cos θ, r sin θ)` with `r = √(−2 ln u₁)`, `θ = 2π u₂`.
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Seed of sample `i` derived from a base seed.
pub fn sample_seed(base_seed: u64, sample: usize) -> u64 {
    base_seed ^ GOLDEN_GAMMA.wrapping_mul(sample as u64 + 1)
}

/// Source of i.i.d. standard normal variables.
pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

impl NormalSource for RngState {
    fn next_normal(&mut self) -> f64 {
        self.standard_normal()
    }
}

/// Degenerate source that always returns 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NormalSource for ZeroNoise {
    fn next_normal(&mut self) -> f64 {
        0.0
    }
}

/// Fractional Brownian motion sampled at `x_j = j·2^{-level}`, `j = 0..=2^level`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub hurst: f64,
    pub level: u32,
    pub points: Vec<f64>,
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Hurst exponent must lie in (0, 1), got {hurst}"
        )))
    }
}

/// Standard deviation of the displacement added at refinement level `l`:
/// `√((1 − 2^{2H−2}) / 2^{2lH})`.
pub fn midpoint_scale(hurst: f64, l: u32) -> f64 {
    ((1.0 - (2.0 * hurst - 2.0).exp2()) / (2.0 * l as f64 * hurst).exp2()).sqrt()
}

/// Random midpoint displacement.
///
/// The left endpoint is 0 and the right endpoint the first normal draw. Each
/// level `l = 0..level` bisects its `2^l` intervals from left to right, the
/// new point being the neighbour average plus `midpoint_scale(H, l)` times a
/// fresh normal draw. Exactly `2^level` normals are consumed.
pub fn fbm_midpoint<S: NormalSource>(hurst: f64, level: u32, noise: &mut S) -> Result<FbmPath> {
    check_hurst(hurst)?;
    if !(1..=MAX_FBM_LEVEL).contains(&level) {
        return Err(Error::InvalidArgument(format!(
            "fBm level must lie in 1..={MAX_FBM_LEVEL}, got {level}"
        )));
    }
    let n = 1usize << level;
    let mut points = vec![0.0; n + 1];
    points[n] = noise.next_normal();
    for l in 0..level {
        let scale = midpoint_scale(hurst, l);
        let width = n >> l;
        let half = width / 2;
        for j in 0..(1usize << l) {
            let left = j * width;
            let right = left + width;
            points[left + half] = 0.5 * (points[left] + points[right]) + scale * noise.next_normal();
        }
    }
    Ok(FbmPath {
        hurst,
        level,
        points,
    })
}

/// Scale a path so that `max |points| = 1`; the zero path is returned as is.
pub fn normalize_to_unit(mut path: FbmPath) -> FbmPath {
    let max = path.points.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    if max > 0.0 {
        for p in &mut path.points {
            *p /= max;
        }
    }
    path
}

fn dyadic_level(grid: &Grid) -> Result<u32> {
    if grid.x_left() != 0.0 || grid.x_right() != 1.0 {
        return Err(Error::InvalidGrid(format!(
            "fBm initial data lives on [0, 1], got [{}, {}]",
            grid.x_left(),
            grid.x_right()
        )));
    }
    let n = grid.n_cells();
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::InvalidGrid(format!(
            "fBm initial data needs 2^k cells with k ≥ 1, got {n}"
        )));
    }
    Ok(n.trailing_zeros())
}

/// Cell field from a path: cell `i` takes the value at its left edge and
/// the final point is dropped.
pub fn path_to_field(path: &FbmPath, grid: &Grid) -> Result<CellField> {
    let level = dyadic_level(grid)?;
    if level != path.level {
        return Err(Error::IncompatibleGrids(format!(
            "path level {} does not match a grid of {} cells",
            path.level,
            grid.n_cells()
        )));
    }
    CellField::new(*grid, path.points[..grid.n_cells()].to_vec())
}

/// Normalized fBm on a `2^k`-cell grid over `[0, 1]`.
pub fn fbm_initial_field(hurst: f64, grid: &Grid, seed: u64) -> Result<CellField> {
    let level = dyadic_level(grid)?;
    let path = fbm_midpoint(hurst, level, &mut RngState::new(seed))?;
    path_to_field(&normalize_to_unit(path), grid)
}

/// Compactly supported `C^α` bump `max(0, (1/4)^α − |x − 1/2|^α)`.
pub fn holder_cap(alpha: f64, x: f64) -> f64 {
    (0.25f64.powf(alpha) - (x - 0.5).abs().powf(alpha)).max(0.0)
}
