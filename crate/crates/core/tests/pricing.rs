use gtfk::models::Rebased;
use gtfk::oracles::{bond_from_pde, short_time_kernel, solve_fokker_planck_x, Convention, PdeGrid};
use gtfk::pricing::{default_y_grid, vasicek_exact_density};
use gtfk::quadrature::integrate_adaptive;
use gtfk::{
    ad_density, ad_density_y, density_curve, price_european, zero_coupon_bond, Interval, Jet,
    NumericsConfig, Payout, ShortRateModel, TransformedModel, Vanilla,
};

fn bk() -> (ShortRateModel, f64) {
    (ShortRateModel::black_karasinski(0.1, 0.04f64.ln(), 0.85).unwrap(), 0.06f64.ln())
}

fn all_models() -> Vec<(ShortRateModel, f64)> {
    vec![
        (ShortRateModel::vasicek(0.1, 0.05, 0.02).unwrap(), 0.03),
        (ShortRateModel::quadratic(0.1, 0.0, 0.02, 1.0, 0.5).unwrap(), 0.03),
        bk(),
        (ShortRateModel::garch(0.1, 0.04, 0.6).unwrap(), 0.06),
    ]
}

/// Horizons at which the undiscounted approximation is normalized to 1e-4.
/// For lambda = 0 the Vasicek, quadratic and Black-Karasinski actions are
/// harmonic and the approximation is exact; the GARCH (Morse) action is not.
fn normalized_horizons(m: &ShortRateModel) -> &'static [f64] {
    match m {
        ShortRateModel::Garch { .. } => &[0.1, 0.5, 1.0],
        _ => &[0.1, 1.0, 5.0, 10.0],
    }
}

#[test]
fn undiscounted_mass_is_one() {
    let cfg = NumericsConfig::default();
    for (m, y0) in all_models() {
        for &t in normalized_horizons(&m) {
            let q = zero_coupon_bond(&m, 0.0, y0, t, &cfg).unwrap();
            assert!((q.value - 1.0).abs() < 1e-4, "{} T={t}: {}", m.name(), q.value);
        }
    }
}

#[test]
fn garch_mass_defect_is_not_numerical() {
    // the long-horizon GARCH mass loss survives a fourfold refinement
    let cfg = NumericsConfig::default();
    let fine = NumericsConfig {
        xbar_order: 4 * cfg.xbar_order,
        xt_order: 4 * cfg.xt_order,
        tail_factor: 16.0,
        edge_tol: 1e-16,
        ..cfg.clone()
    };
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    let a = zero_coupon_bond(&m, 0.0, 0.06, 10.0, &cfg).unwrap();
    let b = zero_coupon_bond(&m, 0.0, 0.06, 10.0, &fine).unwrap();
    assert!((a.value - b.value).abs() < 1e-6);
    assert!(1.0 - a.value > 0.01, "{}", a.value);
}

#[test]
fn undiscounted_curves_integrate_to_one() {
    let cfg = NumericsConfig::default();
    for (m, y0) in all_models() {
        for &t in &normalized_horizons(&m)[1..] {
            let ys = default_y_grid(&m, y0, t, &cfg, 801).unwrap();
            let curve = density_curve(&m, 0.0, y0, t, &ys, &cfg).unwrap();
            assert!(curve.samples.iter().all(|s| s.1 >= 0.0));
            let mass = curve.integral();
            assert!((mass - 1.0).abs() < 1e-4, "{} T={t}: {mass}", m.name());
        }
    }
}

#[test]
fn jacobian_preserves_mass() {
    let cfg = NumericsConfig::default();
    let models = [bk(), (ShortRateModel::garch(0.1, 0.04, 0.6).unwrap(), 0.06)];
    for (m, y0) in models {
        let x0 = m.lamperti(y0).unwrap();
        let (lo, hi) = gtfk::support::support_window(&m, x0, 1.0, 10.0);
        let in_x = integrate_adaptive(lo, hi, 1e-11, &|x| ad_density(&m, 1.0, x0, x, 1.0, &cfg).unwrap());
        let (ylo, yhi) = (m.lamperti_inverse(lo).unwrap(), m.lamperti_inverse(hi).unwrap());
        let in_y = integrate_adaptive(ylo, yhi, 1e-11, &|y| {
            ad_density_y(&m, 1.0, y0, y, 1.0, &cfg).unwrap()
        });
        assert!((in_x - in_y).abs() < 1e-6, "{}: {in_x} vs {in_y}", m.name());
    }
}

#[test]
fn garch_density_in_rate_units() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    for y in [0.02, 0.06, 0.15] {
        let dy = ad_density_y(&m, 1.0, 0.06, y, 2.0, &cfg).unwrap();
        let dx = ad_density(&m, 1.0, 0.06f64.ln(), y.ln(), 2.0, &cfg).unwrap();
        assert!((dy - dx / y).abs() < 1e-12 * dy);
    }
}

#[test]
fn bonds_decrease_with_discount_weight() {
    let cfg = NumericsConfig::default();
    for (m, y0) in [bk(), (ShortRateModel::garch(0.1, 0.04, 0.6).unwrap(), 0.06)] {
        let z: Vec<f64> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&l| zero_coupon_bond(&m, l, y0, 3.0, &cfg).unwrap().value)
            .collect();
        assert!(z[0] > z[1] && z[1] > z[2] && z[2] > 0.0, "{z:?}");
    }
}

#[test]
fn doubling_orders_stays_within_error_estimate() {
    let cfg = NumericsConfig::default();
    let doubled = NumericsConfig {
        xbar_order: 2 * cfg.xbar_order,
        xt_order: 2 * cfg.xt_order,
        ..cfg.clone()
    };
    for (m, y0) in all_models() {
        for t in [1.0, 5.0] {
            let q = zero_coupon_bond(&m, 1.0, y0, t, &cfg).unwrap();
            let q2 = zero_coupon_bond(&m, 1.0, y0, t, &doubled).unwrap();
            assert!(
                (q2.value - q.value).abs() <= q.err_estimate,
                "{} T={t}: shift {:.2e} vs estimate {:.2e}",
                m.name(),
                (q2.value - q.value).abs(),
                q.err_estimate
            );
        }
    }
}

#[test]
fn unit_payout_is_the_bond() {
    let cfg = NumericsConfig::default();
    let (m, y0) = bk();
    let bond = zero_coupon_bond(&m, 1.0, y0, 2.0, &cfg).unwrap().value;
    let price = price_european(&m, &Vanilla::Unit, 1.0, y0, 2.0, &cfg).unwrap().value;
    assert!((bond - price).abs() < 1e-14);
}

#[test]
fn vasicek_digital_is_the_gaussian_tail() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::vasicek(0.1, 0.05, 0.02).unwrap();
    let (y0, t, k) = (0.03, 2.0, 0.04);
    let price = price_european(&m, &Vanilla::Digital { strike: k }, 0.0, y0, t, &cfg).unwrap();
    let tail = integrate_adaptive(k, 1.0, 1e-14, &|x| vasicek_exact_density(&m, 0.0, y0, x, t).unwrap());
    assert!((price.value - tail).abs() < 1e-9, "{} vs {tail}", price.value);
    assert!(price.diagnostics.is_empty());
}

struct RateCall(f64);

impl Payout for RateCall {
    fn value(&self, y: f64) -> f64 {
        (y.exp() - self.0).max(0.0)
    }
    fn kinks(&self) -> Vec<f64> {
        vec![self.0.ln()]
    }
}

#[test]
fn black_karasinski_call_matches_pde_pricing() {
    let cfg = NumericsConfig::default();
    // the Black-Karasinski state is the log-rate; the call is on the rate
    let (m, x0) = bk();
    let k = 0.06;
    let call = RateCall(k);
    let gtfk = price_european(&m, &call, 1.0, x0, 1.0, &cfg).unwrap().value;
    let grid = PdeGrid::for_model(&m, 1.0, x0, 1.0, &cfg);
    let sol = solve_fokker_planck_x(&m, 1.0, x0, 1.0, &grid).unwrap();
    let pde: f64 = sol
        .x
        .iter()
        .zip(&sol.psi)
        .map(|(&x, &p)| sol.spacing * p * (x.exp() - k).max(0.0))
        .sum();
    assert!((gtfk - pde).abs() < 5e-4, "{gtfk} vs {pde}");
}

#[test]
fn black_karasinski_curve_tracks_the_pde() {
    let cfg = NumericsConfig::default();
    let (m, x0) = bk();
    let grid = PdeGrid::for_model(&m, 1.0, x0, 5.0, &cfg);
    let sol = solve_fokker_planck_x(&m, 1.0, x0, 5.0, &grid).unwrap();
    let peak = sol.psi.iter().copied().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (&x, &p) in sol.x.iter().zip(&sol.psi).step_by(10) {
        if p < 1e-8 * peak {
            continue;
        }
        let g = ad_density(&m, 1.0, x0, x, 5.0, &cfg).unwrap();
        worst = worst.max((g - p).abs());
    }
    assert!(worst <= 2e-2 * peak, "{}", worst / peak);
}

#[test]
fn tiny_horizon_matches_one_euler_step() {
    let cfg = NumericsConfig::default();
    let (m, x0) = bk();
    let t = 1e-6_f64;
    let sd = 0.85 * t.sqrt();
    let peak = short_time_kernel(&m, 1.0, x0, x0, t, Convention::Euler);
    for k in [-3.0, -1.0, 0.0, 0.5, 2.0] {
        let x = x0 + k * sd;
        let g = ad_density(&m, 1.0, x0, x, t, &cfg).unwrap();
        let e = short_time_kernel(&m, 1.0, x0, x, t, Convention::Euler);
        assert!((g - e).abs() < 1e-4 * peak, "{k}");
    }
}

#[test]
fn shifting_the_base_point_changes_nothing() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    let shifted = Rebased::new(m, 0.05).unwrap();
    let a = zero_coupon_bond(&m, 1.0, 0.06, 3.0, &cfg).unwrap().value;
    let b = zero_coupon_bond(&shifted, 1.0, 0.06, 3.0, &cfg).unwrap().value;
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

/// Ornstein-Uhlenbeck state with `r = c + x^2`, given only through the
/// required trait methods so that every smear goes through Gauss-Hermite.
struct SquaredRate {
    a: f64,
    sigma: f64,
    c: f64,
}

impl TransformedModel for SquaredRate {
    fn name(&self) -> &str {
        "squared-rate"
    }
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn y_domain(&self) -> Interval {
        Interval::REAL_LINE
    }
    fn x_domain(&self) -> Interval {
        Interval::REAL_LINE
    }
    fn lamperti(&self, y: f64) -> gtfk::Result<f64> {
        Ok(y)
    }
    fn lamperti_inverse(&self, x: f64) -> gtfk::Result<f64> {
        Ok(x)
    }
    fn sigma_y(&self, _y: f64) -> f64 {
        self.sigma
    }
    fn drift_jet(&self, x: f64) -> Jet {
        Jet {
            value: -self.a * x,
            d1: -self.a,
            d2: 0.0,
            d3: 0.0,
        }
    }
    fn rate_jet(&self, x: f64) -> Jet {
        Jet {
            value: self.c + x * x,
            d1: 2.0 * x,
            d2: 2.0,
            d3: 0.0,
        }
    }
}

#[test]
fn user_model_through_generic_smearing() {
    let cfg = NumericsConfig::default();
    let m = SquaredRate {
        a: 0.5,
        sigma: 0.3,
        c: 0.02,
    };
    let (y0, t) = (0.2, 2.0);
    let g = zero_coupon_bond(&m, 1.0, y0, t, &cfg).unwrap();
    let grid = PdeGrid::for_model(&m, 1.0, y0, t, &cfg);
    let p = bond_from_pde(&m, 1.0, y0, t, &grid).unwrap();
    // harmonic action: the approximation is exact
    assert!((g.value - p.value).abs() < 1e-6, "{} vs {}", g.value, p.value);
}

#[test]
fn bad_inputs_are_rejected() {
    let cfg = NumericsConfig::default();
    let m = ShortRateModel::garch(0.1, 0.04, 0.6).unwrap();
    assert!(zero_coupon_bond(&m, 1.0, 0.06, 0.0, &cfg).is_err());
    assert!(ad_density_y(&m, 1.0, 0.06, -0.01, 1.0, &cfg).is_err());
}
