use std::f64::consts::PI;

use kirchhoff_mp::checkers::{self, SampleSpec, Verdict};
use kirchhoff_mp::cli::{apply_override, profile_csv};
use kirchhoff_mp::functional::Landscape;
use kirchhoff_mp::model::{eval_zigzag, Amplitude, Nonlinearity, Potential, ProblemSpec};
use kirchhoff_mp::{DiffScheme, Functional, RadialGrid};
use proptest::prelude::*;

fn catalog() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        Just(Nonlinearity::Zero),
        (0.5f64..2.0).prop_map(|a| Nonlinearity::KirchhoffExample { amplitude: Amplitude::Constant(a) }),
        (0.1f64..2.0, 0.2f64..1.9).prop_map(|(c3, tau)| Nonlinearity::SublinearOrigin { c3, tau, support: None }),
        (0.1f64..3.0, 2.0f64..6.0).prop_map(|(coefficient, exponent)| Nonlinearity::Power { coefficient, exponent }),
    ]
}

fn field(coeffs: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let r_max = grid.radius();
    grid.nodes()
        .iter()
        .map(|&r| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k as f64 + 0.5) * PI * r / r_max).cos())
                .sum()
        })
        .collect()
}

fn setup(nl: Nonlinearity, a0: f64) -> Functional {
    let grid = RadialGrid::new(5.0, 48, DiffScheme::Staggered4).unwrap();
    Functional::new(&ProblemSpec::new(1.0, Potential::Zigzag { a0 }, nl).shifted(), &grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_breakdown_is_consistent(nl in catalog(), a0 in -3.0f64..2.0, c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let f = setup(nl, a0);
        let u = field(&c, f.grid());
        let e = f.energy_of(&u);
        prop_assert!(e.dirichlet >= 0.0 && e.potential >= 0.0 && e.kirchhoff >= 0.0);
        prop_assert_eq!(e.total, e.dirichlet + e.potential + e.kirchhoff - e.nonlinear);
    }

    #[test]
    fn riesz_represents_the_derivative(nl in catalog(), c in prop::collection::vec(-1.0f64..1.0, 4), d in prop::collection::vec(-1.0f64..1.0, 4)) {
        let f = setup(nl, 0.0);
        let u = field(&c, f.grid());
        let v = field(&d, f.grid());
        let g = f.gradient_of(&u);
        let lhs = f.inner(&g.riesz, &v);
        let rhs = f.directional(&u, &v);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
        prop_assert!(g.cerami >= g.dual_norm && g.dual_norm >= 0.0);
    }

    #[test]
    fn value_difference_matches_values(nl in catalog(), c in prop::collection::vec(-1.0f64..1.0, 4), d in prop::collection::vec(-1.0f64..1.0, 4), t in -6.0f64..0.0) {
        let f = setup(nl, 0.0);
        let u = field(&c, f.grid());
        let step = 10f64.powf(t);
        let v: Vec<f64> = u.iter().zip(field(&d, f.grid())).map(|(a, b)| a + step * b).collect();
        let naive = f.value(&v) - f.value(&u);
        let careful = f.value_difference(&u, &v);
        let scale = 1.0 + f.value(&u).abs() + f.value(&v).abs();
        prop_assert!((naive - careful).abs() <= 1e-12 * scale, "{} vs {}", naive, careful);
    }

    #[test]
    fn shift_is_idempotent_and_lifts_the_potential(a0 in -5.0f64..5.0, r in 0.0f64..20.0) {
        let spec = ProblemSpec::new(1.0, Potential::Zigzag { a0 }, Nonlinearity::Zero);
        let s = spec.shifted();
        prop_assert_eq!(&s.shifted(), &s);
        prop_assert!(s.vtilde(r) >= 1.0 - 1e-12);
        prop_assert_eq!(s.ftilde(r, 1.5) - spec.ftilde(r, 1.5), s.applied_shift * 1.5);
    }

    #[test]
    fn zigzag_is_continuous(n in 1u32..20, a0 in -2.0f64..2.0) {
        let n = n as f64;
        for r in [n, n - 0.5] {
            let gap = (eval_zigzag(r - 1e-12, a0) - eval_zigzag(r + 1e-12, a0)).abs();
            prop_assert!(gap <= 1e-10, "gap {} at {}", gap, r);
        }
    }

    #[test]
    fn primitive_is_the_antiderivative(nl in catalog(), u in -10.0f64..10.0, r in 0.0f64..6.0) {
        // composite Simpson in t with s = u t^m, which smooths the |s|^(tau-1) cusp at 0
        let m = match nl {
            Nonlinearity::SublinearOrigin { tau, .. } => (4.0 / tau).ceil() as i32,
            _ => 1,
        };
        let g = |t: f64| nl.f_radial(r, u * t.powi(m)) * u * m as f64 * t.powi(m - 1);
        let panels = 4000;
        let h = 1.0 / panels as f64;
        let integral: f64 = (0..panels).map(|k| {
            let a = k as f64 * h;
            h / 6.0 * (g(a) + 4.0 * g(a + 0.5 * h) + g(a + h))
        }).sum();
        let big_f = nl.primitive_radial(r, u);
        prop_assert!((big_f - integral).abs() <= 1e-8 * (1.0 + big_f.abs()), "{} vs {}", big_f, integral);
    }

    #[test]
    fn csv_numbers_round_trip(r in prop::num::f64::NORMAL, u in prop::num::f64::NORMAL) {
        let text = profile_csv(&[r], &[u]);
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        prop_assert_eq!(row, vec![r, u]);
    }

    #[test]
    fn overrides_land_at_their_path(a in "[a-z]{1,6}", b in "[a-z]{1,6}", x in -1e6f64..1e6) {
        let mut v = serde_json::json!({});
        apply_override(&mut v, &format!("{a}.{b}={x}")).unwrap();
        prop_assert_eq!(v[&a][&b].as_f64(), Some(x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Denser nested samples can only add constraints.
    #[test]
    fn denser_sampling_keeps_ar_failures(exponent in 2.0f64..7.0) {
        let nl = Nonlinearity::Power { coefficient: 1.0, exponent };
        let coarse = SampleSpec { u_points: 256, x_points: 3, ..Default::default() };
        let fine = SampleSpec { u_points: 1024, ..coarse.clone() };
        let grid = checkers::default_mu_grid();
        let a = checkers::check_ar(&nl, &grid, &coarse).unwrap();
        let b = checkers::check_ar(&nl, &grid, &fine).unwrap();
        if a.verdict == Verdict::Fail {
            prop_assert_eq!(b.verdict, Verdict::Fail);
        }
    }

    #[test]
    fn counterexamples_violate_by_their_slack(exponent in 2.0f64..4.0) {
        let nl = Nonlinearity::Power { coefficient: 1.0, exponent };
        let s = SampleSpec { u_points: 256, x_points: 3, ..Default::default() };
        let r = checkers::check_ar(&nl, &checkers::default_mu_grid(), &s).unwrap();
        let mu = r.fitted["mu"];
        for ce in &r.counterexamples {
            let (x, u) = (ce.x.unwrap(), ce.u.unwrap());
            let big_f = nl.primitive(&x, u);
            let uf = u * nl.f(&x, u);
            let worst = (mu * big_f).min(uf - mu * big_f);
            // slack is the violation divided by 1 + |uf|
            prop_assert!(worst <= 0.0 && worst.abs() >= ce.slack.abs() * (1.0 - 1e-12), "{} vs {}", worst, ce.slack);
        }
    }
}
