use pdm_core::dynamics::{integrate_pdm, InitialState};
use pdm_core::function::Interval;
use pdm_core::integrator::{IntegratorOptions, SampleGrid};
use pdm_core::models::{build_model, ModelFamily, Sign};
use pdm_core::solutions::ClosedFormSolution;
use pdm_core::transform::{catalog_map, compatibility_residual_at, default_center, invert_q, q_anchor, q_from_quadrature};
use pdm_core::ModelDocument;
use proptest::prelude::*;

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

/// Valid members of every family, kept away from the amplitude limits.
fn family() -> impl Strategy<Value = ModelFamily> {
    prop_oneof![
        (sign(), 0.0..0.8f64, 0.3..3.0f64, 0.05..1.0f64, -3.0..3.0f64)
            .prop_map(|(s, l, w, frac, phi)| ModelFamily::ml1(s, l, w, frac * amplitude_limit(s, l)).unwrap().with_phase(phi)),
        (sign(), 0.05..0.8f64, 0.3..3.0f64, 0.05..1.0f64)
            .prop_map(|(s, l, w, frac)| ModelFamily::ml2(s, l, w, frac * amplitude_limit(s, l)).unwrap()),
        (sign(), 0.0..0.8f64, 0.3..3.0f64, -1.5..1.5f64, 0.05..1.0f64, -3.0..3.0f64).prop_map(|(s, l, w, xi, frac, phi)| {
            ModelFamily::shifted(s, l, w, xi, frac * amplitude_limit(s, l)).unwrap().with_phase(phi)
        }),
        (0.0..1.0f64, 0.3..3.0f64, 0.0..0.9f64, -3.0..3.0f64).prop_map(|(l, w, frac, phi)| {
            let a = if l > 0.0 { frac / l } else { frac * 2.0 };
            ModelFamily::quadratic(l, w, a.min(3.0)).unwrap().with_phase(phi)
        }),
        (0.1..1.5f64, 0.3..3.0f64, 0.0..0.9f64, -3.0..3.0f64)
            .prop_map(|(eta, w, a, phi)| ModelFamily::morse(eta, w, a).unwrap().with_phase(phi)),
        (0.0..0.3f64, 0.5..2.0f64, 0.02..0.2f64, 0.8..1.5f64, -3.0..3.0f64)
            .prop_map(|(l, big, beta, a, d)| {
                ModelFamily::isotonic_from_frequency(Sign::Plus, l, big, beta, a).unwrap().with_phase(d)
            }),
    ]
}

/// `1/√λ` capped at 2 on the `1 - λx²` branch; 2 otherwise.
fn amplitude_limit(s: Sign, lambda: f64) -> f64 {
    match s {
        Sign::Minus if lambda > 0.0 => (0.9 / lambda.sqrt()).min(2.0),
        _ => 2.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compatibility_holds_on_every_map(f in family(), u in 0.0..1.0f64) {
        let map = catalog_map(&f).unwrap();
        let w = map.domain().sampling_window(default_center(map.domain()));
        let x = w.lo + u * (w.hi - w.lo);
        let g = map.g.value(x);
        prop_assert!(compatibility_residual_at(&map.mass, &map.f, &map.g, x) <= 1e-12 * (1.0 + g.abs()));
    }

    #[test]
    fn closed_forms_solve_their_equations(f in family(), t in 0.0..200.0f64) {
        let system = build_model(&f).unwrap();
        let k = ClosedFormSolution::new(&f).unwrap().evaluate(t);
        prop_assert!(system.domain().contains(k.x));
        let r = system.el_residual(k.x, k.xdot, k.xddot).unwrap();
        let scale = 1.0 + k.xddot.abs() + k.xdot * k.xdot + k.x.abs();
        prop_assert!(r.abs() <= 1e-10 * scale, "residual {r} at {k:?}");
    }

    #[test]
    fn shifted_with_zero_shift_is_ml1(s in sign(), l in 0.0..0.8f64, w in 0.3..3.0f64, frac in 0.05..1.0f64, t in 0.0..100.0f64) {
        let a = frac * amplitude_limit(s, l);
        let ml = ClosedFormSolution::new(&ModelFamily::ml1(s, l, w, a).unwrap()).unwrap();
        let sh = ClosedFormSolution::new(&ModelFamily::shifted(s, l, w, 0.0, a).unwrap()).unwrap();
        prop_assert_eq!(ml.frequency(), sh.frequency());
        prop_assert_eq!(ml.evaluate(t), sh.evaluate(t));
    }

    #[test]
    fn q_quadrature_and_inversion(f in family(), u in 0.0..1.0f64) {
        let map = catalog_map(&f).unwrap();
        let w = map.domain().sampling_window(default_center(map.domain()));
        let x = w.lo + u * (w.hi - w.lo);
        let (x0, q0) = q_anchor(&f);
        let q = q_from_quadrature(&map.mass, &map.f, x0, x).unwrap() + q0;
        prop_assert!((q - map.q.value(x)).abs() <= 1e-9 * (1.0 + q.abs()));
        let back = invert_q(&map, map.q.value(x), w).unwrap();
        prop_assert!((back - x).abs() <= 1e-8);
    }

    #[test]
    fn energy_is_conserved(f in family()) {
        let system = build_model(&f).unwrap();
        let map = catalog_map(&f).unwrap();
        let sol = ClosedFormSolution::new(&f).unwrap();
        let (x0, v0) = sol.initial_state();
        let opts = IntegratorOptions::default().with_grid(SampleGrid::Count(201));
        let traj = integrate_pdm(&system, &map, InitialState::new(x0, v0), 2.0 * sol.period(), &opts).unwrap();
        prop_assert!(traj.energy_drift() <= 1e-8);
        let last = traj.last();
        let k = sol.evaluate(last.t);
        prop_assert!((last.x - k.x).abs() <= 1e-6 * (1.0 + k.x.abs()));
    }

    #[test]
    fn documents_round_trip(f in family()) {
        let text = ModelDocument::from_family(&f).to_json();
        let back = ModelDocument::from_json(&text).unwrap().to_family().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn interval_intersection_is_commutative(a in -5.0..5.0f64, b in 0.0..5.0f64, c in -5.0..5.0f64, d in 0.0..5.0f64) {
        let i = Interval::new(a, a + b);
        let j = Interval::new(c, c + d);
        prop_assert_eq!(i.intersect(&j), j.intersect(&i));
    }
}

#[test]
fn amplitude_guards_keep_quadratic_and_morse_inside_their_domains() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let lambda = rng.gen_range(0.01..2.0);
        let q = ModelFamily::quadratic(lambda, rng.gen_range(0.2..3.0), rng.gen_range(0.0..0.999) / lambda).unwrap();
        let m = ModelFamily::morse(rng.gen_range(0.05..2.0), rng.gen_range(0.2..3.0), rng.gen_range(0.0..0.999)).unwrap();
        for f in [q, m] {
            let sol = ClosedFormSolution::new(&f).unwrap();
            let domain = build_model(&f).unwrap().domain();
            for i in 0..1000 {
                let x = sol.evaluate(0.1 * i as f64).x;
                assert!(x.is_finite() && domain.contains_closed(x), "{f:?} left its domain: x = {x}");
            }
        }
    }
}
