use proptest::prelude::*;
use tauleap_core::analysis::{dda, EnsembleStats, MomentAccumulator};
use tauleap_core::chebyshev::{beta, cheb_t, cheb_u, stability_domain_size, ChebyshevCoefficients};
use tauleap_core::network::NetworkBuilder;
use tauleap_core::stability::select_stages;
use tauleap_core::steppers::Simulation;
use tauleap_core::{
    builtin_model, BuiltinModel, EmpiricalPdf, Method, MethodConfig, ModelParams, RngStream,
};

const NAMES: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Clone, Debug)]
struct RandomReaction {
    rate: f64,
    reactants: Vec<(usize, u32)>,
    products: Vec<(usize, u32)>,
}

fn reaction() -> impl Strategy<Value = RandomReaction> {
    (
        0.01f64..10.0,
        prop::collection::vec((0usize..4, 1u32..3), 0..3),
        prop::collection::vec((0usize..4, 1u32..3), 0..3),
    )
        .prop_map(|(rate, reactants, products)| RandomReaction {
            rate,
            reactants,
            products,
        })
}

/// Merges repeated species so each appears once per side.
fn side(terms: &[(usize, u32)], n: usize) -> Vec<(&'static str, u32)> {
    let mut counts = [0u32; 4];
    let mut total = 0;
    for &(i, k) in terms {
        // the library supports reaction orders up to three
        let k = k.min(3 - total);
        counts[i % n] += k;
        total += k;
    }
    (0..n)
        .filter(|&i| counts[i] > 0)
        .map(|i| (NAMES[i], counts[i]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn drift_is_stoichiometry_times_propensities(
        n in 1usize..5,
        reactions in prop::collection::vec(reaction(), 1..5),
        state in prop::collection::vec(0u32..60, 4),
    ) {
        let mut b = NetworkBuilder::new();
        for name in &NAMES[..n] {
            b = b.species(name);
        }
        let mut kept = 0;
        for r in &reactions {
            let (lhs, rhs) = (side(&r.reactants, n), side(&r.products, n));
            if lhs != rhs {
                b = b.reaction(r.rate, &lhs, &rhs);
                kept += 1;
            }
        }
        prop_assume!(kept > 0);
        let net = b.build().unwrap();
        let x: Vec<f64> = state[..n].iter().map(|&v| v as f64).collect();
        let a = net.propensities(&x).unwrap();
        let f = net.drift(&x).unwrap();
        for i in 0..n {
            let expected: f64 = (0..net.n_reactions()).map(|j| net.stoich(i, j) as f64 * a[j]).sum();
            prop_assert!((f[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()), "{} vs {}", f[i], expected);
        }
        prop_assert!(a.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn stability_interval_grows_quadratically(s in 1usize..80, eps in 0.0f64..2.0) {
        let ell = stability_domain_size(s, eps).unwrap();
        prop_assert!(ell >= beta(eps) * (s * s) as f64 * (1.0 - 1e-12));
    }

    #[test]
    fn recurrence_weights_sum_to_one(s in 2usize..80, eps in 0.0f64..1.0) {
        let c = ChebyshevCoefficients::new(s, eps).unwrap();
        for j in 1..s {
            prop_assert!((c.nu[j] + c.kappa[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_pell_identity(s in 1usize..40, x in -1.0f64..1.05) {
        let t = cheb_t(s, x);
        let u = cheb_u(s - 1, x);
        prop_assert!((t * t - (x * x - 1.0) * u * u - 1.0).abs() < 1e-8 * (1.0 + t * t));
    }

    #[test]
    fn chosen_stages_cover_the_stiffness(tau_rho in 0.0f64..5e4, eps in 0.0f64..0.5) {
        let s = select_stages(1.0, tau_rho, eps).unwrap();
        prop_assert!(s >= 2 || tau_rho == 0.0);
        let base = s - 1;
        prop_assert!(beta(eps) * (base * base) as f64 >= tau_rho || (tau_rho == 0.0 && s == 1));
        if base > 1 {
            prop_assert!(tau_rho > beta(eps) * ((base - 1) * (base - 1)) as f64);
        }
    }

    #[test]
    fn dda_is_a_metric(
        a in prop::collection::vec(0.0f64..1.0, 1..12),
        b in prop::collection::vec(0.0f64..1.0, 1..12),
        c in prop::collection::vec(0.0f64..1.0, 1..12),
        shift in -5i64..5,
    ) {
        let pdf = |w: &[f64], offset: i64| {
            let total: f64 = w.iter().sum::<f64>() + 1e-3;
            let support: Vec<i64> = (0..=w.len() as i64).map(|k| k + offset).collect();
            let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
            p.push(1.0 - p.iter().sum::<f64>());
            EmpiricalPdf::new(support, p).unwrap()
        };
        let (p, q, r) = (pdf(&a, 0), pdf(&b, shift), pdf(&c, -shift));
        let pq = dda(&p, &q).unwrap();
        prop_assert!((pq - dda(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!(dda(&p, &p).unwrap().abs() < 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&pq));
        prop_assert!(pq <= dda(&p, &r).unwrap() + dda(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn buffered_species_never_move(
        method in prop::sample::select(vec![
            Method::Ssa, Method::ExplicitTau, Method::SkTauRock, Method::PskTauRock,
            Method::ImplicitTau, Method::PimpTau, Method::TrapezoidalTau,
        ]),
        seed in any::<u64>(),
    ) {
        let m = builtin_model(BuiltinModel::Schlogl, &ModelParams::default()).unwrap();
        let cfg = MethodConfig::new(method, 0.5);
        let mut sim = Simulation::new(&m.network, cfg, &m.initial, RngStream::new(seed, 0)).unwrap();
        sim.advance_to(5.0).unwrap();
        let obs = sim.observe().unwrap();
        prop_assert_eq!(&sim.state().x[1..], &m.initial[1..]);
        prop_assert_eq!(&obs[1..], &m.initial[1..]);
    }

    #[test]
    fn moments_match_two_pass(values in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let mut acc = MomentAccumulator::new(1, false);
        for v in &values {
            acc.push(&[*v]);
        }
        let stats = acc.finish();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((stats.mean[0] - mean).abs() < 1e-9 * (1.0 + mean.abs()));
        prop_assert!((stats.variance[0] - var).abs() < 1e-9 * (1.0 + var));
    }
}

#[test]
fn identical_values_have_zero_variance() {
    let v = [1234.5678f64];
    let stats = EnsembleStats::from_samples(std::iter::repeat(&v[..]).take(1_000_000), 1, false);
    assert_eq!(stats.variance[0], 0.0);
    assert_eq!(stats.mean[0], 1234.5678);
}
