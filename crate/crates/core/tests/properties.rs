use parisian_core::dual::Side;
use parisian_core::{
    derive_constants, CandidateFunction, HjbOperator, ModelParams, OccupationValue, RestrictedValue, ValueFunction,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.01f64..0.08,
        0.01f64..0.1,
        0.1f64..0.4,
        0.005f64..0.05,
        0.001f64..0.2,
        0.5f64..2.0,
        10.0f64..300.0,
    )
        .prop_map(|(r, excess, sigma, lambda, rho, c, l)| ModelParams {
            r,
            mu: r + excess,
            sigma,
            lambda,
            rho,
            c,
            l,
        })
}

fn grid(p: &ModelParams, n: usize) -> Vec<f64> {
    let (lo, hi) = (-p.l, p.safe_level());
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exponents_obey_vieta_and_order(p in params()) {
        let k = derive_constants(&p).unwrap();
        let tol = 1e-10;
        let sum = (p.r - p.lambda + k.delta) / k.delta;
        prop_assert!(((k.b1 + k.b2) - sum).abs() <= tol * sum.abs().max(1.0));
        prop_assert!((k.b1 * k.b2 + p.lambda / k.delta).abs() <= tol * (p.lambda / k.delta));
        let sum34 = (p.r - p.lambda - p.rho + k.delta) / k.delta;
        prop_assert!(((k.b3 + k.b4) - sum34).abs() <= tol * sum34.abs().max(1.0));
        prop_assert!((k.b3 * k.b4 + (p.lambda + p.rho) / k.delta).abs() <= tol * ((p.lambda + p.rho) / k.delta));
        prop_assert!(k.b1 > 1.0 && k.b2 < 0.0 && k.b4 < k.b2 && k.b3 < k.b1 && k.b3 > 1.0);
        prop_assert!(k.q > 1.0 && k.alpha > 0.0);
    }

    #[test]
    fn psi_is_a_convex_decreasing_probability(p in params()) {
        let v = ValueFunction::new(p).unwrap();
        let vals: Vec<f64> = grid(&p, 200).iter().map(|&w| v.psi(w).unwrap()).collect();
        let top = p.cutoff_value();
        for x in &vals {
            prop_assert!(*x > 0.0 && *x < top);
        }
        for w in vals.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        for w in vals.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12);
        }
        prop_assert!(v.beta > 0.0 && v.beta < top);
    }

    #[test]
    fn pi_star_dominates_pi_zero_and_grows_with_rho(p in params(), bump in 1.1f64..3.0) {
        let v = ValueFunction::new(p).unwrap();
        let v2 = ValueFunction::new(p.with_rho(p.rho * bump)).unwrap();
        let r = RestrictedValue::new(p).unwrap();
        for w in grid(&p, 64) {
            let (a, b, z) = (v.pi_star(w).unwrap(), v2.pi_star(w).unwrap(), r.pi_zero(w).unwrap());
            if w < 0.0 {
                prop_assert!(a > z, "w = {w}: {a} vs {z}");
                prop_assert!(b > a, "w = {w}: {b} vs {a}");
            } else {
                prop_assert!((a - z).abs() <= 1e-10 * z.max(1.0));
            }
        }
    }

    #[test]
    fn hjb_residuals_vanish(p in params()) {
        let v = ValueFunction::new(p).unwrap();
        let m = OccupationValue::new(p).unwrap();
        let opv = HjbOperator::parisian(&p);
        let opm = HjbOperator::occupation(&p);
        let sv = p.lambda * p.cutoff_value();
        for w in grid(&p, 64) {
            prop_assert!(opv.residual(w, Side::Right, &v).unwrap().abs() <= 1e-8 * sv, "psi at {w}");
            prop_assert!(opm.residual(w, Side::Right, &m).unwrap().abs() <= 1e-8, "m at {w}");
        }
        for side in [Side::Left, Side::Right] {
            let j = v.jet(0.0, side).unwrap();
            prop_assert!(j.second > 0.0);
            prop_assert!(opv.residual(0.0, side, &v).unwrap().abs() <= 1e-8 * sv);
        }
    }

    #[test]
    fn cutoff_strategy_is_rho_free(p in params()) {
        let v = ValueFunction::new(p).unwrap();
        let want = 2.0 * p.r / (p.mu - p.r) * (p.safe_level() + p.l);
        prop_assert!((v.pi_star_at_cutoff() - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn sandwich_holds_for_small_rho(p in params(), scale in 0.01f64..0.5) {
        // the comparison needs ρ small relative to λ
        let rho = scale * p.lambda;
        let q = p.with_rho(rho);
        let v = ValueFunction::new(q).unwrap();
        let m = OccupationValue::new(q).unwrap();
        let sq = (rho / p.lambda).powi(2);
        for w in grid(&q, 64) {
            let (psi, rm) = (v.psi(w).unwrap(), rho * m.m(w).unwrap());
            prop_assert!(rm - sq < psi && psi < rm, "w = {w}: {} < {psi} < {rm}", rm - sq);
        }
    }

    #[test]
    fn inversion_round_trips(p in params(), t in 0.0f64..1.0) {
        let v = ValueFunction::new(p).unwrap();
        let w = -p.l * t.max(1e-9);
        let y = v.invert_dual(w).unwrap();
        let back = v.dual_function().slope(y, Side::Right);
        prop_assert!((back - w).abs() <= 1e-11 * w.abs().max(1.0), "{w} -> {y} -> {back}");
    }
}
