use std::f64::consts::PI;

use num_complex::Complex64;
use pinching_core::{
    channel_coefficient, effective_channel, validate_pattern, waveguide_response, PatternViolation, Point, Scenario,
    ScenarioParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: f64 = 299_792_458.0;

fn scenario(users: Vec<Point>, n: usize) -> Scenario {
    let params = ScenarioParams {
        antenna_count: n,
        ..ScenarioParams::default()
    };
    Scenario::new(&params, users).unwrap()
}

/// Independent evaluation of one antenna's contribution `g·h` from the raw
/// parameters: free-space amplitude and phase times the in-guide phase.
fn term_oracle(f: f64, n_eff: f64, d: f64, feed_x: f64, user: &Point, x: f64) -> Complex64 {
    let lambda = C / f;
    let eta = lambda * lambda / (16.0 * PI * PI);
    let r = ((x - user.x).powi(2) + user.y.powi(2) + (d - user.z).powi(2)).sqrt();
    let guide_len = (x - feed_x).abs();
    let k0 = 2.0 * PI / lambda;
    let kg = 2.0 * PI / (lambda / n_eff);
    let h = Complex64::new(0.0, -k0 * r).exp() * (eta.sqrt() / r);
    let g = Complex64::new(0.0, -kg * guide_len).exp();
    g * h
}

fn random_positions(rng: &mut ChaCha8Rng, s: &Scenario, n: usize) -> Vec<f64> {
    let (lo, hi) = s.span();
    let delta = s.min_spacing();
    loop {
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).all(|w| w[1] - w[0] >= delta) {
            return xs;
        }
    }
}

#[test]
fn wavelength_and_path_constant_at_28_ghz() {
    let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
    assert!((s.wavelength() - 0.010_706_874).abs() < 1e-9);
    assert!((s.path_constant() - 7.2595e-7).abs() / 7.2595e-7 < 1e-4);
    assert!((s.min_spacing() - 0.005_353_437).abs() < 1e-9);
}

#[test]
fn antenna_above_user_amplitude() {
    let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
    let h = channel_coefficient(&s, 0, Point::new(0.0, 0.0, 3.0)).unwrap();
    assert!((h.norm() - 2.8401e-4).abs() < 1e-8, "{}", h.norm());
}

#[test]
fn effective_channel_matches_term_oracle_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let params = ScenarioParams::default();
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let users: Vec<Point> = (0..3)
            .map(|_| Point::ground(rng.gen_range(-50.0..50.0), rng.gen_range(-20.0..20.0)))
            .collect();
        let s = scenario(users, n);
        let positions = random_positions(&mut rng, &s, n);
        let pattern = validate_pattern(&s, &positions).unwrap();
        let k = rng.gen_range(0..3);
        let got = effective_channel(&s, &pattern, k).unwrap();
        let user = s.users()[k];
        let expect: Complex64 = positions
            .iter()
            .map(|&x| {
                term_oracle(
                    params.carrier_frequency,
                    params.refractive_index,
                    params.waveguide_height,
                    -params.region_length_x / 2.0,
                    &user,
                    x,
                )
            })
            .sum();
        let rel = (got.value - expect).norm() / expect.norm();
        let gain_rel = (got.gain() - expect.norm_sqr()).abs() / expect.norm_sqr();
        assert!(rel < 1e-12, "channel rel error {rel}");
        assert!(gain_rel < 2e-12, "gain rel error {gain_rel}");
    }
}

#[test]
fn effective_channel_matches_alternative_phase_association() {
    // Phase as (2π·r)/λ instead of (2π/λ)·r: agrees up to phase rounding
    // at hundred-metre path lengths.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let users = vec![Point::ground(rng.gen_range(-50.0..50.0), rng.gen_range(-20.0..20.0))];
        let s = scenario(users, 2);
        let positions = random_positions(&mut rng, &s, 2);
        let pattern = validate_pattern(&s, &positions).unwrap();
        let got = effective_channel(&s, &pattern, 0).unwrap().value;
        let (lo, _) = s.span();
        let lambda = s.wavelength();
        let eta = s.path_constant();
        let u = s.users()[0];
        let expect: Complex64 = positions
            .iter()
            .map(|&x| {
                let r = Point::new(x, 0.0, 3.0).distance(&u);
                let phase = 2.0 * PI * r / lambda + 2.0 * PI * (x - lo) * 1.4 / lambda;
                Complex64::from_polar(eta.sqrt() / r, -phase)
            })
            .sum();
        assert!((got - expect).norm() / expect.norm() < 1e-9);
    }
}

#[test]
fn waveguide_half_guided_wavelength_flips_sign() {
    let s = scenario(vec![Point::ground(0.0, 0.0)], 2);
    let x = 1.0;
    let a = validate_pattern(&s, &[x, x + 0.5]).unwrap();
    let b = validate_pattern(&s, &[x, x + 0.5 + s.guided_wavelength() / 2.0]).unwrap();
    let ga = waveguide_response(&s, &a);
    let gb = waveguide_response(&s, &b);
    assert!((ga[0] - gb[0]).norm() < 1e-12);
    assert!((ga[1] + gb[1]).norm() < 1e-9);
}

#[test]
fn validation_examples() {
    let s = scenario(vec![Point::ground(0.0, 0.0)], 2);
    let delta = s.min_spacing();
    assert!(matches!(
        validate_pattern(&s, &[0.0, delta / 2.0]),
        Err(PatternViolation::Spacing { index: 1, .. })
    ));
    assert!(validate_pattern(&s, &[0.0, delta]).is_ok());
    let one = scenario(vec![Point::ground(0.0, 0.0)], 1);
    let (_, hi) = one.span();
    assert!(matches!(
        validate_pattern(&one, &[hi + 1.0]),
        Err(PatternViolation::OutOfSpan { index: 0, .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gain_never_exceeds_coherent_ceiling(
        ux in -50.0..50.0f64, uy in -20.0..20.0f64,
        n in 1usize..=4, start in -49.0..45.0f64,
        gaps in prop::collection::vec(1.0..40.0f64, 3),
    ) {
        let s = scenario(vec![Point::ground(ux, uy)], n);
        let delta = s.min_spacing();
        let mut xs = vec![start];
        for g in gaps.iter().take(n - 1) {
            let next = xs.last().unwrap() + g * delta;
            xs.push(next);
        }
        let pattern = validate_pattern(&s, &xs).unwrap();
        let gain = effective_channel(&s, &pattern, 0).unwrap().gain();
        prop_assert!(gain <= s.gain_ceiling(0) * (1.0 + 1e-12));
    }

    #[test]
    fn translating_by_whole_guided_wavelengths_keeps_channel(
        ux in -30.0..30.0f64, uy in -20.0..20.0f64,
        x0 in -20.0..20.0f64, gap in 1.0..10.0f64,
        wraps in -500i32..500,
    ) {
        // Every free-space distance is unchanged and every in-guide phase
        // advances by a multiple of 2π.
        let s = scenario(vec![Point::ground(ux, uy)], 2);
        let shift = wraps as f64 * s.guided_wavelength();
        let moved = s.with_users(vec![Point::ground(ux + shift, uy)]).unwrap();
        let xs = [x0, x0 + gap * s.min_spacing()];
        let ys = [xs[0] + shift, xs[1] + shift];
        let a = effective_channel(&s, &validate_pattern(&s, &xs).unwrap(), 0).unwrap();
        let b = effective_channel(&moved, &validate_pattern(&moved, &ys).unwrap(), 0).unwrap();
        prop_assert!((a.value - b.value).norm() <= 1e-9 * s.gain_ceiling(0).sqrt());
    }

    #[test]
    fn doubling_distance_halves_magnitude(r in 3.0..200.0f64) {
        let s = scenario(vec![Point::ground(0.0, 0.0)], 1);
        let near = channel_coefficient(&s, 0, Point::new((r * r - 9.0).sqrt(), 0.0, 3.0)).unwrap();
        let far_r = 2.0 * r;
        let far = channel_coefficient(&s, 0, Point::new((far_r * far_r - 9.0).sqrt(), 0.0, 3.0));
        if let Ok(far) = far {
            prop_assert!((near.norm() / far.norm() - 2.0).abs() < 1e-9);
        }
    }
}
