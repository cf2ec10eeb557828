use monoqkd::coding::bin_index;
use monoqkd::cv_gaussian::{
    expected_mismatch_momentum, expected_mismatch_position, floor_integral_check, homodyne_measure,
    rescale_momentum, sample_coset_params, AgwnParams, Damping, GridSpec, Quadrature,
    RegisterSubspace, TestDensity,
};
use monoqkd::seed;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (
        m,
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

#[test]
fn sampled_coset_moments() {
    let d = Damping::new(0.5, 1.0).unwrap();
    let s = RegisterSubspace::new(2_000_000, (0..1_000_000).collect()).unwrap();
    let sample = sample_coset_params(&s, d, 1e6, 1e6, 42).unwrap();
    let (_, vq) = mean_var(&sample.q);
    let (_, vp) = mean_var(&sample.p);
    assert!((vq / d.sample_q_variance() - 1.0).abs() < 0.01, "{vq}");
    assert!((vp / d.sample_p_variance() - 1.0).abs() < 0.01, "{vp}");
    assert_eq!(sample.resamples, 0);
}

#[test]
fn homodyne_moments_and_rescaling() {
    let d = Damping::new(0.3, 2.0).unwrap();
    let trials = 1_000_000;
    let mut rng = seed::rng(5, 1, 0);
    let pos: Vec<f64> = (0..trials)
        .map(|_| {
            homodyne_measure(
                Quadrature::Position,
                0.25,
                d,
                AgwnParams::identity(),
                &mut rng,
            )
        })
        .collect();
    let (m, v) = mean_var(&pos);
    assert!((v / d.position_outcome_variance() - 1.0).abs() < 0.01);
    assert!((m - 0.25).abs() < 3.0 * (v / trials as f64).sqrt());

    let p_true = 1.7;
    let mom: Vec<f64> = (0..trials)
        .map(|_| {
            homodyne_measure(
                Quadrature::Momentum,
                p_true,
                d,
                AgwnParams::identity(),
                &mut rng,
            )
        })
        .collect();
    let (m, v) = mean_var(&mom);
    assert!((v / d.momentum_outcome_variance() - 1.0).abs() < 0.01);
    let expect = -p_true / (1.0 + d.a() / d.b());
    assert!((m - expect).abs() < 3.0 * (v / trials as f64).sqrt());

    let est: Vec<f64> = mom[..100_000]
        .iter()
        .map(|&o| rescale_momentum(o, d))
        .collect();
    let (m, v) = mean_var(&est);
    assert!((m - p_true).abs() < 3.0 * (v / est.len() as f64).sqrt());
}

#[test]
fn agwn_noise_adds_the_expected_variance() {
    let d = Damping::new(0.3, 2.0).unwrap();
    let noise = AgwnParams::new(0.4, 0.2).unwrap();
    let mut rng = seed::rng(6, 1, 0);
    let pos: Vec<f64> = (0..400_000)
        .map(|_| homodyne_measure(Quadrature::Position, 0.0, d, noise, &mut rng))
        .collect();
    let (_, v) = mean_var(&pos);
    assert!((v / (d.position_outcome_variance() + 0.08) - 1.0).abs() < 0.01);
    let mom: Vec<f64> = (0..400_000)
        .map(|_| homodyne_measure(Quadrature::Momentum, 0.0, d, noise, &mut rng))
        .collect();
    let (_, v) = mean_var(&mom);
    assert!((v / (d.momentum_outcome_variance() + 0.02) - 1.0).abs() < 0.01);
}

/// Average bin-index distance between encoded and measured values.
fn empirical_mismatch(
    d: Damping,
    delta: f64,
    eps: f64,
    noise: AgwnParams,
    modes: usize,
) -> (f64, f64) {
    let s = RegisterSubspace::new(2 * modes, (0..modes).collect()).unwrap();
    let sample = sample_coset_params(&s, d, 1e12, 1e12, 77).unwrap();
    let mut rng = seed::rng(77, 9, 0);
    let mut gamma = 0.0;
    let mut dist = 0.0;
    for (&q, &p) in sample.q.iter().zip(&sample.p) {
        let qh = homodyne_measure(Quadrature::Position, q, d, noise, &mut rng);
        gamma += (bin_index(qh, delta) - bin_index(q, delta)).unsigned_abs() as f64;
        let ph = rescale_momentum(
            homodyne_measure(Quadrature::Momentum, p, d, noise, &mut rng),
            d,
        );
        dist += (bin_index(ph, eps) - bin_index(p, eps)).unsigned_abs() as f64;
    }
    (gamma / modes as f64, dist / modes as f64)
}

#[test]
fn mismatch_rates_stay_below_bounds() {
    let grid = [
        (5e-7, 5e5, 4.0, 1.0 / 64.0, 0.0, 0.0),
        (5e-7, 5e5, 4.0, 1.0 / 64.0, 0.0027, 0.0002),
        (0.01, 100.0, 0.5, 0.5, 0.05, 0.01),
        (0.1, 10.0, 1.0, 1.0, 0.1, 0.1),
        (1e-3, 1e3, 0.2, 0.1, 0.0, 0.001),
    ];
    for (a, b, delta, eps, x, y) in grid {
        let d = Damping::new(a, b).unwrap();
        let noise = AgwnParams::new(x, y).unwrap();
        let (g, m) = empirical_mismatch(d, delta, eps, noise, 100_000);
        let gb = expected_mismatch_position(d, delta, x).unwrap();
        let mb = expected_mismatch_momentum(d, eps, y).unwrap();
        assert!(g <= gb, "position a={a} b={b}: {g} > {gb}");
        assert!(m <= mb, "momentum a={a} b={b}: {m} > {mb}");
    }
}

#[test]
fn floor_integral_lemma() {
    let grid = GridSpec::default();
    let gauss = TestDensity::Gaussian { sigma: 1.0 };
    let uniform = TestDensity::Uniform { half_width: 0.5 };
    let v = floor_integral_check(10.0, gauss, grid).unwrap();
    assert!(v <= 0.6 && v > 0.0, "{v}");
    let v = floor_integral_check(1.0, uniform, grid).unwrap();
    assert!(v <= 6.0 && v > 0.0, "{v}");
    let v = floor_integral_check(1e4, gauss, grid).unwrap();
    assert!(v < 1e-3, "{v}");
}
