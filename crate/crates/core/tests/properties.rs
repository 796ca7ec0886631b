use gtfk::gtfk::{alpha_of_omega, gaussian_smear, reduced_density};
use gtfk::{solve_self_consistent, ModelConfig, ModelName, NumericsConfig, ShortRateModel, TransformedModel};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = ShortRateModel> {
    let a = 0.02..2.0f64;
    let sigma = 0.05..1.0f64;
    prop_oneof![
        (a.clone(), -0.1..0.1f64, sigma.clone()).prop_map(|(a, b, s)| ShortRateModel::vasicek(a, b, s).unwrap()),
        (a.clone(), -0.1..0.1f64, sigma.clone(), 0.1..2.0f64, 0.1..2.0f64)
            .prop_map(|(a, b, s, be, ga)| ShortRateModel::quadratic(a, b, s, be, ga).unwrap()),
        (a.clone(), -5.0..-1.0f64, sigma.clone())
            .prop_map(|(a, b, s)| ShortRateModel::black_karasinski(a, b, s).unwrap()),
        (a, 0.005..0.1f64, sigma).prop_map(|(a, b, s)| ShortRateModel::garch(a, b, s).unwrap()),
    ]
}

/// A state inside the model's y-domain, as a fraction-controlled value.
fn state_for(model: &ShortRateModel, u: f64) -> f64 {
    match model {
        ShortRateModel::Garch { .. } => 0.001 + 0.3 * u,
        ShortRateModel::BlackKarasinski { .. } => -6.0 + 5.0 * u,
        _ => -0.2 + 0.4 * u,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lamperti_round_trip(model in model_strategy(), u in 0.0..1.0f64) {
        let y = state_for(&model, u);
        let x = model.lamperti(y).unwrap();
        let back = model.lamperti_inverse(x).unwrap();
        prop_assert!((back - y).abs() <= 1e-12 * y.abs().max(1.0));
    }

    #[test]
    fn drift_primitive_is_antisymmetric(model in model_strategy(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let x0 = model.lamperti(state_for(&model, u)).unwrap();
        let x1 = model.lamperti(state_for(&model, v)).unwrap();
        let w01 = model.drift_primitive(x0, x1);
        let w10 = model.drift_primitive(x1, x0);
        prop_assert!((w01 + w10).abs() <= 1e-10 * w01.abs().max(1.0));
    }

    #[test]
    fn reduced_density_is_swap_symmetric(
        model in model_strategy(),
        u in 0.0..1.0f64,
        d0 in -1.0..1.0f64,
        d1 in -1.0..1.0f64,
        t in 0.05..5.0f64,
        lambda in 0.0..1.0f64,
    ) {
        let cfg = NumericsConfig::default();
        let xbar = model.lamperti(state_for(&model, u)).unwrap();
        let scale = model.sigma() * t.sqrt();
        let Ok(p) = solve_self_consistent(&model, lambda, t, xbar, &cfg) else {
            return Ok(());
        };
        let (x0, xt) = (xbar + d0 * scale, xbar + d1 * scale);
        let a = reduced_density(&p, x0, xt).unwrap();
        let b = reduced_density(&p, xt, x0).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300));
    }

    #[test]
    fn smearing_with_zero_width_is_evaluation(x in -5.0..5.0f64, c in -3.0..3.0f64) {
        let cfg = NumericsConfig::default();
        let f = |z: f64| (c * z).sin() + z * z;
        prop_assert_eq!(gaussian_smear(f, x, 0.0, &cfg).unwrap(), f(x));
    }

    #[test]
    fn alpha_is_continuous_and_decreasing(t in 0.01..20.0f64, sigma in 0.01..2.0f64, eps in 1e-12..1e-6f64) {
        let scale = 4.0 / (t * t);
        let plus = alpha_of_omega(eps * scale, t, sigma, 1e-6).unwrap();
        let zero = alpha_of_omega(0.0, t, sigma, 1e-6).unwrap();
        let minus = alpha_of_omega(-eps * scale, t, sigma, 1e-6).unwrap();
        prop_assert!(minus >= zero && zero >= plus);
        prop_assert!((minus - plus) <= 1e-6 * zero);
        prop_assert!((zero - sigma * sigma * t / 12.0).abs() <= 1e-14 * zero);
    }

    #[test]
    fn model_config_text_round_trips(
        model in prop_oneof![Just(ModelName::Vasicek), Just(ModelName::Quadratic), Just(ModelName::Bk), Just(ModelName::Garch)],
        values in proptest::collection::vec(proptest::option::of(-1e6..1e6f64), 8),
    ) {
        let cfg = ModelConfig {
            model: Some(model),
            a: values[0],
            b: values[1],
            sigma: values[2],
            beta: values[3],
            gamma: values[4],
            lambda: values[5],
            y0: values[6],
            r0: values[7],
        };
        let text = cfg.to_string();
        prop_assert_eq!(ModelConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn model_config_parser_never_panics(text in "\\PC{0,200}") {
        let _ = ModelConfig::parse(&text);
    }
}
