use gtfk::oracles::{
    bond_from_convolution, bond_from_pde, convolution_grid, monte_carlo_bond, short_time_convolution,
    solve_fokker_planck, solve_fokker_planck_x, Boundary, PdeGrid,
};
use gtfk::pricing::vasicek_exact_density;
use gtfk::{NumericsConfig, ShortRateModel, TransformedModel};

fn bk() -> ShortRateModel {
    ShortRateModel::black_karasinski(0.1, 0.04f64.ln(), 0.85).unwrap()
}

fn slope(z: &[f64]) -> f64 {
    ((z[0] - z[1]) / (z[1] - z[2])).abs().log2()
}

#[test]
fn pde_bonds_match_published_values() {
    let cfg = NumericsConfig::default();
    let y0 = 0.06f64.ln();
    let cases = [
        (bk(), y0, 1.0, 0.9331),
        (bk(), y0, 20.0, 0.2683),
        (ShortRateModel::garch(0.1, 0.02, 0.5).unwrap(), 0.01, 10.0, 0.8762),
    ];
    for (m, y0, t, expected) in cases {
        let x0 = m.lamperti(y0).unwrap();
        let grid = PdeGrid::for_model(&m, 1.0, x0, t, &cfg);
        let q = bond_from_pde(&m, 1.0, y0, t, &grid).unwrap();
        assert!((q.value - expected).abs() < 1e-4, "{} T={t}: {}", m.name(), q.value);
        assert!(q.err_estimate < 1e-5);
    }
}

#[test]
fn pde_undiscounted_mass() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    let x0 = 0.06f64.ln();
    let grid = PdeGrid::for_model(&m, 0.0, x0, 5.0, &cfg);
    assert_eq!(grid.bc, Boundary::ZeroFlux);
    let sol = solve_fokker_planck_x(&m, 0.0, x0, 5.0, &grid).unwrap();
    assert!(sol.max_mass_drift < 1e-8);
    let q = bond_from_pde(&m, 0.0, 0.06, 5.0, &grid).unwrap();
    assert!((q.value - 1.0).abs() < 1e-6);
}

#[test]
fn pde_curve_is_in_rate_units() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    let x0 = 0.06f64.ln();
    let grid = PdeGrid::for_model(&m, 0.0, x0, 1.0, &cfg);
    let curve = solve_fokker_planck(&m, 0.0, x0, 1.0, &grid).unwrap();
    assert!((curve.y0 - 0.06).abs() < 1e-15);
    assert!(curve.samples.windows(2).all(|w| w[0].0 < w[1].0));
    assert!((curve.integral() - 1.0).abs() < 1e-4);
}

#[test]
fn pde_is_second_order_in_space_and_time() {
    let cfg = NumericsConfig::default();
    for (m, y0) in [(bk(), 0.06f64.ln()), (ShortRateModel::garch(0.1, 0.04, 0.6).unwrap(), 0.06)] {
        let x0 = m.lamperti(y0).unwrap();
        let base = PdeGrid::for_model(&m, 1.0, x0, 1.0, &cfg);
        let z = |n_space: usize, n_time: usize| {
            let g = PdeGrid {
                n_space,
                n_time,
                ..base
            };
            solve_fokker_planck_x(&m, 1.0, x0, 1.0, &g).unwrap().mass()
        };
        let space: Vec<f64> = [251, 501, 1001].iter().map(|&n| z(n, 4000)).collect();
        let time: Vec<f64> = [25, 50, 100].iter().map(|&k| z(2001, k)).collect();
        for s in [slope(&space), slope(&time)] {
            assert!((1.8..=2.2).contains(&s), "{}: slope {s}", m.name());
        }
    }
}

#[test]
fn convolution_converges_at_first_order() {
    let cfg = NumericsConfig::default();
    let m = bk();
    let y0 = 0.06f64.ln();
    let window = PdeGrid::for_model(&m, 1.0, y0, 1.0, &cfg);
    let pde = bond_from_pde(&m, 1.0, y0, 1.0, &window).unwrap().value;
    let errs: Vec<f64> = [16, 64, 256]
        .iter()
        .map(|&n| {
            let grid = convolution_grid(&m, &window, 1.0, n, cfg.conv_nodes_per_sd);
            (bond_from_convolution(&m, 1.0, y0, 1.0, n, &grid).unwrap().value - pde).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let s = (w[0] / w[1]).ln() / 4f64.ln();
        assert!((0.8..=1.2).contains(&s), "slope {s}");
    }
}

#[test]
fn convolution_reproduces_vasicek() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::vasicek(0.1, 0.0, 0.02).unwrap();
    let (x0, t) = (0.03, 1.0);
    let window = PdeGrid::for_model(&m, 0.0, x0, t, &cfg);
    let grid = convolution_grid(&m, &window, t, 256, cfg.conv_nodes_per_sd);
    let curve = short_time_convolution(&m, 0.0, x0, t, 256, &grid).unwrap();
    let peak = curve.peak();
    for &(y, p) in &curve.samples {
        let exact = vasicek_exact_density(&m, 0.0, x0, y, t).unwrap();
        assert!((p - exact).abs() < 1e-4 * peak);
    }
}

#[test]
fn monte_carlo_reproduces_published_pde_bond() {
    let cfg = NumericsConfig::default();
    let e = monte_carlo_bond(&bk(), 1.0, 0.06f64.ln(), 5.0, 200_000, 1.0 / 250.0, cfg.seed).unwrap();
    assert!((e.value - 0.6598).abs() < 3.0 * e.stderr, "{} +- {}", e.value, e.stderr);
    assert_eq!(e.n_paths, 200_000);
    assert!((e.dt - 0.004).abs() < 1e-15);
}
