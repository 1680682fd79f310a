use roughwave::diagnostics::{fit_rate, total_variation};
use roughwave::initial_data::{fbm_initial_field, fbm_midpoint, holder_cap, RngState};
use roughwave::mesh::{project, CellField, Grid};

#[test]
fn brownian_increment_variance_matches_recursion() {
    // With H = 1/2 each bisection level l adds variance 2^{-(l+1)} to a
    // halved increment: v_{l+1} = v_l / 4 + 2^{-(l+1)}, v_0 = 1.
    let k = 6u32;
    let mut expected = 1.0;
    for l in 0..k {
        expected = expected / 4.0 + (-(l as f64 + 1.0)).exp2();
    }
    assert!((expected - ((1u64 << (k + 1)) - 1) as f64 / 4f64.powi(k as i32)).abs() < 1e-15);

    let (mut sum, mut count) = (0.0, 0usize);
    for seed in 0..10_000u64 {
        let path = fbm_midpoint(0.5, k, &mut RngState::new(seed)).unwrap();
        for w in path.points.windows(2) {
            sum += (w[1] - w[0]).powi(2);
            count += 1;
        }
    }
    let empirical = sum / count as f64;
    assert!((empirical / expected - 1.0).abs() < 0.1, "{empirical} vs {expected}");
}

#[test]
fn brownian_tv_grows_like_inverse_root_dx() {
    let mut slopes = Vec::new();
    for seed in 0..32u64 {
        let pts: Vec<(f64, f64)> = (6..=12)
            .map(|k| {
                let grid = Grid::unit_dyadic(k).unwrap();
                let field = fbm_initial_field(0.5, &grid, seed).unwrap();
                (grid.dx(), total_variation(&field))
            })
            .collect();
        slopes.push(fit_rate(&pts).unwrap().slope);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((mean + 0.5).abs() <= 0.1, "mean slope {mean}");
}

/// L¹ distance between a cell field and `g`, by midpoint sampling with
/// `2^18` points over `[0, 1]`.
fn dense_l1(field: &CellField, g: impl Fn(f64) -> f64) -> f64 {
    let m = 1usize << 18;
    let n = field.len();
    let values = field.values();
    (0..m)
        .map(|j| {
            let x = (j as f64 + 0.5) / m as f64;
            (values[j * n / m] - g(x)).abs()
        })
        .sum::<f64>()
        / m as f64
}

#[test]
fn projection_error_of_single_kink_function() {
    let g = |x: f64| (x - 0.5).abs().powf(0.6).clamp(0.0, 1.0);
    let pts: Vec<(f64, f64)> = (6..=12)
        .map(|k| {
            let grid = Grid::unit_dyadic(k).unwrap();
            let field = project(g, &grid, 8).unwrap();
            (grid.dx(), dense_l1(&field, g))
        })
        .collect();
    assert!(pts.windows(2).all(|w| w[1].1 < w[0].1), "{pts:?}");
    let slope = fit_rate(&pts).unwrap().slope;
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn holder_cap_projection_error_bound() {
    // |g(x) − g(y)| ≤ |x − y|^α and supp g ⊂ [1/4, 3/4], so each cell meeting
    // the support contributes at most Δx^α · Δx.
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let g = |x: f64| holder_cap(alpha, x);
        for k in [4u32, 6, 8, 10] {
            let grid = Grid::unit_dyadic(k).unwrap();
            let dx = grid.dx();
            let err = dense_l1(&project(g, &grid, 8).unwrap(), g);
            let bound = dx.powf(alpha) * (0.5 + 2.0 * dx);
            assert!(err <= bound, "alpha {alpha}, k {k}: {err} > {bound}");
        }
    }
}
