mod common;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use typicality::ensemble::{haar_unitary, make_window, map_samples, micro_average, Sampler, SamplerConfig};
use typicality::fock::{build_observable, ratio_to_f64, BandMatrix, CollectiveObservable, MomentMatrix, TwoModeSpace};
use typicality::scaling::{closed_form_variance, trace_variance};
use typicality::typicality::{exact_fluctuations, first_two_moments, mc_decomposition};

fn arb_moment() -> impl Strategy<Value = MomentMatrix> {
    any::<u64>().prop_map(|seed| common::random_moment(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn arb_case() -> impl Strategy<Value = (u64, u64)> {
    (0u64..=20).prop_flat_map(|h| (Just(2 * h), 0..=h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn observables_are_hermitian(m in arb_moment(), (n, _) in arb_case()) {
        let obs = build_observable(TwoModeSpace::new(n).unwrap(), m).unwrap();
        prop_assert!(obs.is_hermitian());
        prop_assert_eq!(obs.band(), &obs.band().transpose());
    }

    #[test]
    fn observables_conserve_particle_number(m in arb_moment(), (n, _) in arb_case()) {
        let space = TwoModeSpace::new(n).unwrap();
        let obs = build_observable(space, m).unwrap();
        let number = CollectiveObservable::number(space);
        prop_assert!(obs.band().commutator(number.band()).unwrap().is_zero());
        if let Some(exact) = obs.exact_band() {
            let exact_number: BandMatrix<BigRational> = number.exact_band().unwrap();
            prop_assert!(exact.commutator(&exact_number).unwrap().is_zero());
        }
    }

    #[test]
    fn exact_split_is_consistent(m in arb_moment(), (n, k) in arb_case()) {
        let space = TwoModeSpace::new(n).unwrap();
        let e = exact_fluctuations(&make_window(space, k).unwrap(), &build_observable(space, m).unwrap()).unwrap();
        prop_assert!(!e.delta_sq.is_negative());
        prop_assert!(!e.delta_s_sq.is_negative());
        prop_assert!(!e.delta_q_sq.is_negative());
        prop_assert_eq!(&e.delta_s_sq + &e.delta_q_sq, e.delta_sq);
    }

    #[test]
    fn shifting_diagonal_moments_shifts_only_the_mean(m in arb_moment(), (n, k) in arb_case(), c in -50i64..50, d in 1i64..7) {
        let space = TwoModeSpace::new(n).unwrap();
        let w = make_window(space, k).unwrap();
        let c = BigRational::new(c.into(), d.into());
        let a = exact_fluctuations(&w, &build_observable(space, m.clone()).unwrap()).unwrap();
        let b = exact_fluctuations(&w, &build_observable(space, m.shifted(&c)).unwrap()).unwrap();
        prop_assert_eq!(&b.mean - &a.mean, c * BigInt::from(n));
        prop_assert_eq!(a.delta_sq, b.delta_sq);
        prop_assert_eq!(a.delta_s_sq, b.delta_s_sq);
        prop_assert_eq!(a.delta_q_sq, b.delta_q_sq);
    }

    #[test]
    fn closed_form_matches_traces(m in arb_moment(), (n, k) in arb_case()) {
        prop_assert_eq!(closed_form_variance(&m, n, k).unwrap(), trace_variance(&m, n, k).unwrap());
    }

    #[test]
    fn scalar_windows_do_not_fluctuate(c in -30i64..30, (n, k) in arb_case()) {
        // A acts as c·N on every ladder state: A P = c N P for any window
        let q = BigRational::from_integer(c.into());
        let m = MomentMatrix::identity().shifted(&(q - BigRational::from_integer(1.into())));
        let space = TwoModeSpace::new(n).unwrap();
        let w = make_window(space, k).unwrap();
        let obs = build_observable(space, m).unwrap();
        let e = exact_fluctuations(&w, &obs).unwrap();
        prop_assert!(e.delta_sq.is_zero() && e.delta_s_sq.is_zero() && e.delta_q_sq.is_zero());
        let r = mc_decomposition(&w, &obs, c as u64, 200).unwrap();
        prop_assert_eq!((r.delta_sq, r.delta_s_sq, r.delta_q_sq), (0.0, 0.0, 0.0));
    }
}

#[test]
fn diagonal_observables_on_single_states_have_no_quantum_variance() {
    for p in [0u32, 2, 4, 6] {
        let space = TwoModeSpace::new(16).unwrap();
        let w = make_window(space, 0).unwrap();
        let obs = build_observable(space, MomentMatrix::oscillator(p).unwrap()).unwrap();
        assert!(exact_fluctuations(&w, &obs).unwrap().delta_q_sq.is_zero());
        let r = mc_decomposition(&w, &obs, 3, 500).unwrap();
        assert_eq!(r.delta_q_sq, 0.0);
    }
}

#[test]
fn micro_average_matches_sampled_mean() {
    let space = TwoModeSpace::new(30).unwrap();
    for (p, k) in [(2u32, 4u64), (3, 6), (4, 15)] {
        let w = make_window(space, k).unwrap();
        let obs = build_observable(space, MomentMatrix::oscillator(p).unwrap()).unwrap();
        let exact = ratio_to_f64(&micro_average(&w, &obs).unwrap());
        let r = mc_decomposition(&w, &obs, 77, 20_000).unwrap();
        let se = r.mc_stderr.unwrap().mean;
        assert!((r.mean - exact).abs() <= 5.0 * se, "p={p} k={k}: {} vs {exact} (se {se})", r.mean);
    }
}

#[test]
fn global_phase_leaves_moments_unchanged() {
    let space = TwoModeSpace::new(24).unwrap();
    let w = make_window(space, 5).unwrap();
    let obs = build_observable(space, MomentMatrix::oscillator(3).unwrap()).unwrap();
    let phases = [0.3, 1.7, -2.9];
    let out = map_samples(&w, 5, 300, |s| {
        let (a, aa) = first_two_moments(s, &obs).unwrap();
        phases.iter().all(|&t| {
            let (b, bb) = first_two_moments(&s.with_global_phase(t), &obs).unwrap();
            (a - b).abs() <= 1e-12 * aa.max(1.0) && (aa - bb).abs() <= 1e-12 * aa.max(1.0)
        })
    });
    assert!(out.into_iter().all(|ok| ok));
}

#[test]
fn window_unitary_preserves_expectation_distribution() {
    let space = TwoModeSpace::new(20).unwrap();
    let w = make_window(space, 3).unwrap();
    let obs = build_observable(space, MomentMatrix::oscillator(2).unwrap().shifted(&BigRational::new(1.into(), 3.into()))).unwrap();
    let u = haar_unitary(w.dimension(), &mut Sampler::new(SamplerConfig::new(99, 0)));
    let samples = 40_000;
    let plain = map_samples(&w, 123, samples, |s| first_two_moments(s, &obs).unwrap().0);
    let rotated = map_samples(&w, 123, samples, |s| first_two_moments(&s.transformed(&u).unwrap(), &obs).unwrap().0);
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        (m, v, (v / n).sqrt(), ((m4 - v * v) / n).sqrt())
    };
    let (m1, v1, se_m1, se_v1) = stats(&plain);
    let (m2, v2, se_m2, se_v2) = stats(&rotated);
    assert!((m1 - m2).abs() <= 5.0 * (se_m1 * se_m1 + se_m2 * se_m2).sqrt(), "{m1} vs {m2}");
    assert!((v1 - v2).abs() <= 5.0 * (se_v1 * se_v1 + se_v2 * se_v2).sqrt(), "{v1} vs {v2}");
}

#[test]
fn monte_carlo_is_bit_identical_across_worker_counts() {
    let space = TwoModeSpace::new(40).unwrap();
    let w = make_window(space, 6).unwrap();
    let obs = build_observable(space, MomentMatrix::oscillator(3).unwrap()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_decomposition(&w, &obs, 2718, 5000).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a, run(8));
    assert_eq!(a, run(1));
}

#[test]
fn haar_states_have_unit_norm() {
    let space = TwoModeSpace::new(50).unwrap();
    for k in [0u64, 1, 7, 25] {
        let w = make_window(space, k).unwrap();
        let norms = map_samples(&w, k, 2000, |s| {
            let direct: f64 = s.embedded().iter().map(Complex64::norm_sqr).sum();
            (direct - 1.0).abs()
        });
        assert!(norms.into_iter().all(|d| d <= 1e-12));
    }
}
