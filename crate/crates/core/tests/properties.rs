//! Property tests over randomized models, parameters and evaluation points.

use proptest::prelude::*;

use mvar::copula::CopulaModel;
use mvar::kendall::KendallDistribution;
use mvar::margins::Margin;
use mvar::riskmeasure::conditional_marginal_cdf;

/// A random Archimedean model with an admissible bivariate parameter.
fn bivariate_archimedean() -> impl Strategy<Value = CopulaModel> {
    prop_oneof![
        (-0.99f64..20.0).prop_map(|t| CopulaModel::clayton(t, 2).unwrap()),
        (1.0f64..15.0).prop_map(|t| CopulaModel::gumbel(t, 2).unwrap()),
        (-20.0f64..20.0).prop_map(|t| CopulaModel::frank(t, 2).unwrap()),
        (-1.0f64..0.99).prop_map(|t| CopulaModel::ali_mikhail_haq(t).unwrap()),
        Just(CopulaModel::independence(2).unwrap()),
        Just(CopulaModel::comonotonic(2).unwrap()),
        Just(CopulaModel::counter_monotonic().unwrap()),
    ]
}

fn trivariate_archimedean() -> impl Strategy<Value = CopulaModel> {
    prop_oneof![
        (-0.49f64..10.0).prop_map(|t| CopulaModel::clayton(t, 3).unwrap()),
        (1.0f64..8.0).prop_map(|t| CopulaModel::gumbel(t, 3).unwrap()),
        (0.1f64..10.0).prop_map(|t| CopulaModel::frank(t, 3).unwrap()),
        Just(CopulaModel::independence(3).unwrap()),
        Just(CopulaModel::comonotonic(3).unwrap()),
    ]
}

fn margins() -> impl Strategy<Value = Margin> {
    prop_oneof![
        Just(Margin::uniform()),
        (0.1f64..5.0).prop_map(|r| Margin::exponential(r).unwrap()),
        ((-1.0f64..1.0), (0.1f64..2.0))
            .prop_map(|(mu, sigma)| Margin::log_normal(mu, sigma).unwrap()),
        ((0.5f64..3.0), (1.1f64..5.0))
            .prop_map(|(scale, shape)| Margin::pareto(scale, shape).unwrap()),
    ]
}

proptest! {
    #[test]
    fn cdf_respects_frechet_bounds(
        model in bivariate_archimedean(),
        u in prop::array::uniform2(0.0f64..=1.0),
    ) {
        let c = model.cdf(&u).unwrap();
        let lower = (u[0] + u[1] - 1.0).max(0.0);
        let upper = u[0].min(u[1]);
        prop_assert!(c >= lower - 1e-12, "{model:?} at {u:?}: {c} < {lower}");
        prop_assert!(c <= upper + 1e-12, "{model:?} at {u:?}: {c} > {upper}");
    }

    #[test]
    fn trivariate_cdf_respects_frechet_bounds(
        model in trivariate_archimedean(),
        u in prop::array::uniform3(0.0f64..=1.0),
    ) {
        let c = model.cdf(&u).unwrap();
        let lower = (u.iter().sum::<f64>() - 2.0).max(0.0);
        let upper = u.iter().copied().fold(1.0, f64::min);
        prop_assert!(c >= lower - 1e-12);
        prop_assert!(c <= upper + 1e-12);
    }

    #[test]
    fn cdf_is_two_increasing(
        model in bivariate_archimedean(),
        a in prop::array::uniform2(0.0f64..=1.0),
        b in prop::array::uniform2(0.0f64..=1.0),
    ) {
        let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
        let (y0, y1) = (a[1].min(b[1]), a[1].max(b[1]));
        let volume = model.cdf(&[x1, y1]).unwrap() - model.cdf(&[x0, y1]).unwrap()
            - model.cdf(&[x1, y0]).unwrap()
            + model.cdf(&[x0, y0]).unwrap();
        prop_assert!(volume >= -1e-10, "{model:?} rectangle volume {volume}");
    }

    #[test]
    fn generator_round_trip(model in bivariate_archimedean(), t in 0.001f64..=1.0) {
        if model.is_archimedean() {
            let s = model.generator(t).unwrap();
            prop_assert!(s >= 0.0);
            let back = model.generator_inverse(s).unwrap();
            prop_assert!((back - t).abs() < 1e-10, "{model:?} at {t}: {back}");
        }
    }

    #[test]
    fn generator_is_decreasing_and_convex(
        model in bivariate_archimedean(),
        t in 0.001f64..0.999,
    ) {
        if model.is_archimedean() {
            let step = 1e-4_f64.min((1.0 - t) / 2.0);
            let here = model.generator(t).unwrap();
            let there = model.generator(t + step).unwrap();
            prop_assert!(there <= here + 1e-12);
            let beyond = model.generator(t + 2.0 * step).unwrap();
            let curvature = beyond - 2.0 * there + here;
            prop_assert!(curvature >= -1e-9 * here.abs().max(1.0));
        }
    }

    #[test]
    fn kendall_cdf_stays_above_diagonal(
        model in bivariate_archimedean(),
        alpha in 0.001f64..0.999,
    ) {
        let k = KendallDistribution::new(model).cdf(alpha).unwrap();
        prop_assert!(k >= alpha - 1e-11);
        prop_assert!(k <= 1.0 + 1e-12);
    }

    #[test]
    fn kendall_inverse_round_trip(
        model in bivariate_archimedean(),
        p in 0.001f64..0.999,
    ) {
        if model.is_archimedean() {
            let kendall = KendallDistribution::new(model);
            let x = kendall.inverse(p).unwrap();
            // cdf evaluation clamps at 1e-12, so the public round trip is
            // only exact for roots above the clamp; tail roots are covered
            // by the unit tests against the unclamped form
            if x > 1e-10 {
                prop_assert!((kendall.cdf(x).unwrap() - p).abs() < 1e-9);
            } else {
                prop_assert!(kendall.cdf(x.max(1e-10)).unwrap() >= p);
            }
        }
    }

    #[test]
    fn margin_round_trip(margin in margins(), p in 0.001f64..0.999) {
        let x = margin.quantile(p).unwrap();
        prop_assert!(x >= 0.0);
        prop_assert!((margin.cdf(x) - p).abs() < 1e-9, "{margin} at {p}: {x}");
        let sq = margin.survival_quantile(1.0 - p).unwrap();
        prop_assert!((sq - x).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn conditional_cdf_is_a_distribution_in_u(
        model in bivariate_archimedean(),
        alpha in 0.05f64..0.95,
        u in 0.0f64..=1.0,
        step in 0.001f64..0.2,
    ) {
        if model.is_archimedean() {
            let here = conditional_marginal_cdf(&model, u, alpha).unwrap();
            prop_assert!((0.0..=1.0).contains(&here));
            let there = conditional_marginal_cdf(&model, (u + step).min(1.0), alpha).unwrap();
            prop_assert!(there + 1e-12 >= here);
        }
    }
}
