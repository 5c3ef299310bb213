use fracdo::cutoff::bump;
use fracdo::grid::{sobolev_norm, DomainKind, DomainMask, GridFunction, TorusGrid};
use fracdo::order_reduce::*;
use fracdo::symbols::Sign;
use fracdo::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

fn random(grid: TorusGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GridFunction::new(grid, v).unwrap()
}

fn bump_at(center: f64, radius: f64) -> impl Fn(&[f64]) -> f64 {
    move |x| bump((x[x.len() - 1] - center) / radius)
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().sup_norm()
}

#[test]
fn multiplier_algebra() {
    for grid in [TorusGrid::line(128, 10.0), TorusGrid::square(32, 10.0)] {
        let u = random(grid, 3);
        assert_eq!(apply_order_reducer(0.0, Sign::Plus, &u), u);
        let a = apply_order_reducer(0.7, Sign::Plus, &apply_order_reducer(-1.3, Sign::Plus, &u));
        let b = apply_order_reducer(-0.6, Sign::Plus, &u);
        assert!(max_diff(&a, &b) < 1e-12 * u.sup_norm().max(1.0));
    }
    let grid = TorusGrid::line(256, 12.0);
    let u = GridFunction::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
    let du = u.multiply_spectrum(|xi| Complex64::new(0.0, xi[0]));
    let got = apply_order_reducer(1.0, Sign::Plus, &u);
    assert!(max_diff(&got, &du.add(&u).unwrap()) < 1e-12);
}

#[test]
fn adjoint_and_isometry() {
    let grid = TorusGrid::square(32, 9.0);
    let u = random(grid, 1);
    let v = random(grid, 2);
    for t in [-0.8, 0.35, 1.5] {
        let lhs = apply_order_reducer(t, Sign::Plus, &u).inner(&v);
        let rhs = u.inner(&apply_order_reducer(t, Sign::Minus, &v));
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }
    for n in [128, 256, 512] {
        let grid = TorusGrid::line(n, 16.0);
        let u = GridFunction::from_real_fn(grid, bump_at(0.6, 0.5));
        for (s, t) in [(0.3, 0.5), (-0.2, 1.0)] {
            let lhs = sobolev_norm(&apply_order_reducer(t, Sign::Plus, &u), s - t, 2.0).unwrap();
            let rhs = sobolev_norm(&u, s, 2.0).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn support_preservation() {
    // Gaussian cut at x = 0.1, where it is below 1e-14: smooth to round-off,
    // so spectral differentiation is exact to round-off as well.
    let grid = TorusGrid::line(512, 16.0);
    let u = GridFunction::from_real_fn(grid, |x| {
        if x[0] >= 0.1 {
            (-((x[0] - 3.0) / 0.5).powi(2)).exp()
        } else {
            0.0
        }
    });
    assert_eq!(support_leakage(0.0, Sign::Plus, &u).unwrap(), 0.0);
    for t in [1.0, 2.0] {
        let leak = support_leakage(t, Sign::Plus, &u).unwrap();
        assert!(leak <= 1e-10, "t={t}: {leak}");
    }
    let mut prev = f64::INFINITY;
    for n in [256, 512, 1024, 2048] {
        let grid = TorusGrid::line(n, 16.0);
        let u = GridFunction::from_real_fn(grid, bump_at(0.6, 0.5));
        let leak = support_leakage(0.5, Sign::Plus, &u).unwrap();
        assert!(leak < prev, "{n}: {leak} >= {prev}");
        prev = leak;
    }
    let bad = GridFunction::from_real_fn(grid, bump_at(-0.6, 0.5));
    assert!(matches!(support_leakage(0.5, Sign::Plus, &bad), Err(Error::Argument(_))));
    assert!(support_leakage(0.5, Sign::Minus, &bad).is_ok());
}

fn halfline(n: usize) -> (TorusGrid, DomainMask) {
    let grid = TorusGrid::line(n, 16.0);
    (grid, DomainMask::new(grid, DomainKind::Halfspace).unwrap())
}

#[test]
fn regime_boundary_is_exact() {
    let (_, mask) = halfline(64);
    let spec = TransmissionSpaceSpec::new(0.5, 0.0, 2.0, mask.clone()).unwrap();
    assert_eq!(spec.regime(), Regime::Supported);
    let spec = TransmissionSpaceSpec::new(0.5, 1e-12, 2.0, mask.clone()).unwrap();
    assert_eq!(spec.regime(), Regime::Reduced);
    let spec = TransmissionSpaceSpec::new(0.5, -0.25, 3.0, mask.clone()).unwrap();
    assert_eq!(spec.regime(), Regime::Supported);
    assert!(TransmissionSpaceSpec::new(-1.0, 0.0, 2.0, mask.clone()).is_err());
    assert!(TransmissionSpaceSpec::new(0.5, 0.0, 1.0, mask).is_err());
}

#[test]
fn transmission_norm_examples() {
    let (grid, mask) = halfline(1024);
    let g = GridFunction::from_real_fn(grid, bump_at(1.5, 1.0));
    // μ = 0: plain restricted norm
    let spec0 = TransmissionSpaceSpec::new(0.0, 0.3, 2.0, mask.clone()).unwrap();
    let n0 = transmission_norm(&g, &spec0).unwrap();
    assert!((n0 - sobolev_norm(&g, 0.3, 2.0).unwrap()).abs() < 1e-12 * n0);

    let mu = 0.5;
    let spec = TransmissionSpaceSpec::new(mu, 0.8, 2.0, mask.clone()).unwrap();
    let u = apply_order_reducer(-mu, Sign::Plus, &g);
    let got = transmission_norm(&u, &spec).unwrap();
    let want = sobolev_norm(&g, 0.3, 2.0).unwrap();
    assert!((got / want - 1.0).abs() < 0.01);

    let scaled = u.map(|v| v * Complex64::new(-2.0, 1.0));
    let ns = transmission_norm(&scaled, &spec).unwrap();
    assert!((ns - 5f64.sqrt() * got).abs() < 1e-12 * ns);

    let sup = TransmissionSpaceSpec::new(mu, -0.1, 2.0, mask).unwrap();
    assert!(matches!(transmission_norm(&u, &sup), Err(Error::Regime(_))));
}

#[test]
fn membership_supported_window_matches_plain_sobolev() {
    let (grid, mask) = halfline(1024);
    let inside = GridFunction::from_real_fn(grid, bump_at(1.5, 1.0));
    let outside = GridFunction::from_real_fn(grid, bump_at(-1.5, 1.0));
    let (mu, s) = (0.5, 0.7);
    let spec = TransmissionSpaceSpec::new(mu, s, 2.0, mask.clone()).unwrap();
    let plain = TransmissionSpaceSpec::new(s + 1.0, s, 2.0, mask).unwrap();
    assert_eq!(plain.regime(), Regime::Supported);
    for (u, expect) in [(&inside, true), (&outside, false)] {
        let a = transmission_membership(u, &spec, 1e-3).unwrap();
        let b = transmission_membership(u, &plain, 1e-3).unwrap();
        assert_eq!(a.pass, expect, "{a:?}");
        assert_eq!(b.pass, expect, "{b:?}");
    }
}

fn interval_power(mu: f64, n: usize, jump: bool) -> fracdo::Result<(GridFunction, DomainMask)> {
    let grid = TorusGrid::line(n, 8.0);
    let mask = DomainMask::new(grid, DomainKind::Interval { a: -1.0, b: 1.0 })?;
    let u = GridFunction::from_real_fn(grid, move |x| {
        let d = (1.0 - x[0] * x[0]).max(0.0);
        if jump {
            if x[0].abs() < 1.0 && x[0] > 0.2 {
                1.0
            } else {
                0.0
            }
        } else {
            d.powf(mu) * (1.0 + 0.3 * x[0].cos())
        }
    });
    Ok((u, mask))
}

#[test]
fn membership_by_refinement() {
    let mu = 0.5;
    let ok = membership_refinement(
        mu,
        mu + 0.4,
        2.0,
        &[512, 1024, 2048],
        |n| interval_power(mu, n, false),
        1e-3,
        DEFAULT_GROWTH_THRESHOLD,
    )
    .unwrap();
    assert!(ok.pass, "{ok:?}");
    assert!(ok.reports[2].outside_residual <= 1e-3);

    let bad = membership_refinement(
        0.0,
        1.2,
        2.0,
        &[512, 1024, 2048],
        |n| interval_power(0.0, n, true),
        1e-3,
        DEFAULT_GROWTH_THRESHOLD,
    )
    .unwrap();
    assert!(!bad.pass, "{bad:?}");
    assert!(bad.growth.iter().all(|&g| g >= DEFAULT_GROWTH_THRESHOLD), "{bad:?}");
}

#[test]
fn decomposition_examples() {
    let mu = 0.5;
    let grid = TorusGrid::line(1024, 8.0);
    let mask = DomainMask::new(grid, DomainKind::Interval { a: -1.0, b: 1.0 }).unwrap();
    let u = GridFunction::from_fn(grid, |x| {
        let d = (1.0 - x[0].abs()).max(0.0);
        Complex64::new(d.powf(mu), 0.0)
    });
    let spec = TransmissionSpaceSpec::new(mu, 1.2, 2.0, mask.clone()).unwrap();
    let dec = decompose(&u, &spec).unwrap();
    assert_eq!(dec.residual, 0.0);
    for i in mask.interior() {
        assert!((dec.v.values[*i] - 1.0).norm() < 1e-12);
        assert!(dec.w.values[*i].norm() < 1e-8);
    }
    assert!(dec.v_norm.is_finite() && dec.w_norm.is_finite());

    let low = TransmissionSpaceSpec::new(mu, 0.7, 2.0, mask.clone()).unwrap();
    assert!(matches!(decompose(&u, &low), Err(Error::Regime(_))));
    let integer = TransmissionSpaceSpec::new(mu, 2.0, 2.0, mask.clone()).unwrap();
    assert!(matches!(decompose(&u, &integer), Err(Error::Regime(_))));

    // (1-x²)^a / (1-|x|)^a -> 2^a at the boundary
    for a in [0.25, 0.5, 0.75] {
        let u = GridFunction::from_real_fn(grid, move |x| (1.0 - x[0] * x[0]).max(0.0).powf(a));
        let spec = TransmissionSpaceSpec::new(a, a + 0.7, 2.0, mask.clone()).unwrap();
        let dec = decompose(&u, &spec).unwrap();
        let first = mask.interior()[0];
        let last = *mask.interior().last().unwrap();
        for i in [first, last] {
            assert!((dec.v.values[i].re / 2f64.powf(a) - 1.0).abs() < 0.02);
        }
    }
}

#[test]
fn weighted_trace_examples() {
    let mu = 0.4;
    let grid = TorusGrid::line(2048, 8.0);
    let mask = DomainMask::new(grid, DomainKind::Interval { a: -1.0, b: 1.0 }).unwrap();
    let d = |x: f64| (1.0 - x.abs()).max(0.0);
    let g = |x: f64| 2.0 + x.sin();

    let u = GridFunction::from_real_fn(grid, move |x| d(x[0]).powf(mu));
    let tr = weighted_trace(&u, mu, &mask, 1e-3).unwrap();
    for s in &tr.samples {
        assert!((s.value - gamma(mu + 1.0)).norm() < 1e-12);
        assert!(!s.flagged);
    }

    let u = GridFunction::from_real_fn(grid, move |x| d(x[0]).powf(mu) * g(x[0]));
    let tr = weighted_trace(&u, mu, &mask, 1e-2).unwrap();
    for s in &tr.samples {
        let want = gamma(mu + 1.0) * g(s.point[0]);
        assert!((s.value.re / want - 1.0).abs() < 0.01, "{s:?}");
    }

    let u = GridFunction::from_real_fn(grid, move |x| d(x[0]).powf(mu + 1.0));
    let tr = weighted_trace(&u, mu, &mask, 1e-3).unwrap();
    for s in &tr.samples {
        assert!(s.value.norm() < 1e-3, "{s:?}");
    }
}

#[test]
fn weighted_trace_in_two_dimensions() {
    let mu = 0.5;
    let grid = TorusGrid::square(256, 8.0);
    let mask = DomainMask::new(grid, DomainKind::Ellipse { a1: 2.0, a2: 1.5 }).unwrap();
    let dist = mask.dist.clone();
    let u = GridFunction::new(
        grid,
        dist.iter().map(|&d| Complex64::new(d.max(0.0).powf(mu), 0.0)).collect(),
    )
    .unwrap();
    let tr = weighted_trace(&u, mu, &mask, 1e-2).unwrap();
    let good = tr.samples.iter().filter(|s| !s.flagged).count();
    assert!(good as f64 >= 0.9 * tr.samples.len() as f64);
    for s in tr.samples.iter().filter(|s| !s.flagged) {
        assert!((s.value.re / gamma(mu + 1.0) - 1.0).abs() < 0.02, "{s:?}");
    }
}
