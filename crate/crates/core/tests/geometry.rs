use fracdo::geometry::*;
use fracdo::grid::{GridFunction, TorusGrid};
use fracdo::quadrature::gauss_legendre_unit;
use fracdo::quantize::{apply_xy_form, shared, PointAmplitude, DEFAULT_MAX_FLOPS};
use fracdo::symbols::{registry, Parity, Symbol};
use fracdo::Error;
use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

fn rel_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn averaged_jacobian_examples() {
    let id = Diffeomorphism::identity(2);
    let a = averaged_jacobian(&id, &[0.3, -1.0], &[2.0, 0.5]);
    assert_eq!(a.matrix, Matrix2::identity());

    let m = Matrix2::new(1.5, 0.2, -0.3, 0.8);
    let lin = Diffeomorphism::linear(2, m).unwrap();
    let a = averaged_jacobian(&lin, &[0.3, -1.0], &[-2.0, 0.5]);
    assert!((a.matrix - m).abs().max() < 1e-14);

    // F_γ with γ = 0.1 sin: compare with a 64-node rule and the closed form
    let g = BoundaryFunction::eps_sin(0.1, 1.0);
    let f = Diffeomorphism::curved_halfspace(&g);
    let (nodes, weights) = gauss_legendre_unit(64);
    for (x, y) in [([0.0, 0.0], [1.0, 0.3]), ([-1.2, 0.5], [2.1, -0.7]), ([0.4, 0.0], [0.41, 0.0])] {
        let a = averaged_jacobian(&f, &x, &y);
        let reference: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| -0.1 * w * (x[0] + t * (y[0] - x[0])).cos())
            .sum();
        let closed = -0.1 * (y[0].sin() - x[0].sin()) / (y[0] - x[0]);
        assert!((a.matrix[(1, 0)] - reference).abs() < 1e-10);
        assert!((reference - closed).abs() < 1e-13);
        assert_eq!(a.matrix[(0, 0)], 1.0);
        assert_eq!(a.matrix[(1, 1)], 1.0);
        assert_eq!(a.matrix[(0, 1)], 0.0);
    }
    // exact on the diagonal
    let a = averaged_jacobian(&f, &[0.7, 0.1], &[0.7, 0.1]);
    assert_eq!(a.matrix, f.jacobian(&[0.7, 0.1]));
}

#[test]
fn diffeomorphism_invariants() {
    let samples = box_samples(2, 3.0, 21);
    let f = Diffeomorphism::curved_halfspace(&BoundaryFunction::eps_sin(0.3, 1.0));
    assert!(f.inverse_error(&samples) < 1e-10);
    let (c0, c1) = f.measure_det_bounds(&samples);
    assert!((c0 - 1.0).abs() < 1e-14 && (c1 - 1.0).abs() < 1e-14);

    let s = Diffeomorphism::shear_1d(&BoundaryFunction::eps_sin(0.2, 1.0)).unwrap();
    let line = box_samples(1, 3.0, 101);
    assert!(s.inverse_error(&line) < 1e-10);
    assert!(s.det_bounds.0 >= 0.8 - 1e-12 && s.det_bounds.1 <= 1.2 + 1e-12);

    // a fold is rejected
    assert!(matches!(
        Diffeomorphism::shear_1d(&BoundaryFunction::eps_sin(1.0, 1.0)),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn diagonal_cancellation() {
    let f = Diffeomorphism::curved_halfspace(&BoundaryFunction::eps_sin(0.2, 1.3));
    for x in box_samples(2, 2.0, 9) {
        let a = averaged_jacobian(&f, &x, &x);
        let ratio = f.jacobian(&x).determinant().abs() / a.det.abs();
        assert!((ratio - 1.0).abs() < 1e-12);
    }
    // q(x,x,ξ) = p(F(x), ∇F(x)^{-T}ξ)
    let p = shared(registry::variable_even(2, 0.5, 0.3));
    let q = transform_symbol(p.clone(), &f, None).unwrap();
    let x = [0.4, -0.3];
    let xi = [2.0, -1.5];
    let jt = f.jacobian(&x).try_inverse().unwrap().transpose();
    let eta = [jt[(0, 0)] * xi[0] + jt[(0, 1)] * xi[1], jt[(1, 0)] * xi[0] + jt[(1, 1)] * xi[1]];
    let want = p.value(&f.apply(&x), &eta);
    assert!((q.value(&x, &x, &xi) - want).norm() < 1e-13 * want.norm());
}

#[test]
fn identity_transform_reproduces_symbol() {
    let p = shared(registry::variable_even(1, 0.5, 0.3));
    let q = transform_symbol(p.clone(), &Diffeomorphism::identity(1), Some(1.0)).unwrap();
    for (x, y) in [(0.3, 0.1), (-1.0, -0.8), (2.0, 2.45)] {
        for xi in [-7.0, 0.5, 3.0] {
            assert_eq!(q.value(&[x], &[y], &[xi]), p.value(&[x], &[xi]));
        }
    }
    // beyond the cutoff the amplitude vanishes
    assert_eq!(q.value(&[0.0], &[1.5], &[1.0]), Complex64::new(0.0, 0.0));

    let grid = TorusGrid::line(32, 2.0 * PI);
    let e = expand_transformed(q, grid, 1, 0.5).unwrap();
    assert!(e.principal_distance < 1e-12);
    let alpha1 = &e.expansion.terms[1].1;
    assert!(alpha1.rows.iter().flatten().all(|v| v.norm() < 1e-9));
}

/// Twist `x ↦ R(k|x|²)x`: unit Jacobian determinant, but chords between
/// distant points see strongly rotated frames.
fn twist(k: f64) -> Diffeomorphism {
    let rot = move |x: &[f64]| {
        let phi = k * (x[0] * x[0] + x[1] * x[1]);
        (phi.cos(), phi.sin())
    };
    Diffeomorphism::new(
        "twist",
        2,
        f64::INFINITY,
        move |x: &[f64]| {
            let (c, s) = rot(x);
            [c * x[0] - s * x[1], s * x[0] + c * x[1]]
        },
        move |x: &[f64]| {
            let (c, s) = rot(x);
            let r = Matrix2::new(c, -s, s, c);
            let jx = [-x[1], x[0]];
            let g = Matrix2::new(jx[0] * x[0], jx[0] * x[1], jx[1] * x[0], jx[1] * x[1]) * (2.0 * k);
            r * (Matrix2::identity() + g)
        },
    )
    .unwrap()
}

#[test]
fn cutoff_too_large_is_rejected() {
    let f = twist(0.15);
    let samples = box_samples(2, 1.0, 9);
    assert!(f.inverse_error(&samples) < 1e-10);
    assert!((f.det_bounds.0 - 1.0).abs() < 1e-12 && (f.det_bounds.1 - 1.0).abs() < 1e-12);
    let p = shared(registry::bessel(2, 1.0));
    let safe = auto_cutoff_radius(&f, SAMPLE_BOX, 17);
    assert!(safe.is_finite() && safe > 0.0);
    assert!(matches!(transform_symbol(p.clone(), &f, Some(4.0 * safe)), Err(Error::Geometry(_))));
    let q = transform_symbol(p, &f, Some(safe)).unwrap();
    assert_eq!(q.delta, safe);
}

#[test]
fn linear_map_matches_pullback() {
    let grid = TorusGrid::line(128, 16.0);
    let f = Diffeomorphism::linear(1, Matrix2::new(0.5, 0.0, 0.0, 1.0)).unwrap();
    let p = shared(registry::bessel(1, 1.0));
    let q = transform_symbol(p.clone(), &f, None).unwrap();
    assert!(q.delta.is_infinite());
    let u = GridFunction::from_real_fn(grid, |x| (-2.0 * x[0] * x[0]).exp());
    let direct = apply_xy_form(q.as_ref(), &u, DEFAULT_MAX_FLOPS).unwrap();
    let oracle = pullback_apply(&p, &f, &u).unwrap();
    let err = rel_l2(&direct, &oracle);
    assert!(err < 0.02, "relative L2 {err}");
}

fn shear(eps: f64) -> Diffeomorphism {
    Diffeomorphism::shear_1d(&BoundaryFunction::eps_sin(eps, 1.0)).unwrap()
}

#[test]
fn principal_distance_decays_linearly() {
    let p = shared(registry::bessel(1, 1.0));
    let grid = TorusGrid::line(64, 2.0 * PI);
    let eps = [0.2, 0.1, 0.05];
    let xs: Vec<Vec<f64>> = (0..64).map(|i| vec![-PI + 2.0 * PI * i as f64 / 64.0]).collect();
    let xis: Vec<Vec<f64>> = [-20.0, -3.0, 0.0, 1.0, 5.0, 40.0].iter().map(|&v| vec![v]).collect();
    let mut grid_d = Vec::new();
    let mut closed_d = Vec::new();
    for &e in &eps {
        let f = shear(e);
        let q = transform_symbol(p.clone(), &f, None).unwrap();
        grid_d.push(expand_transformed(q, grid, 0, 0.5).unwrap().principal_distance);
        closed_d.push(principal_distance(&p, &f, 2, 0.5, &xs, &xis).unwrap());
    }
    for d in [&grid_d, &closed_d] {
        assert!(d[0] > d[1] && d[1] > d[2]);
        let slope = fit_slope(&eps, d);
        assert!(slope >= 0.9, "slope {slope} from {d:?}");
    }
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn three_way_comparison() {
    let grid = TorusGrid::line(128, 2.0 * PI);
    let p = shared(registry::bessel(1, 1.0));
    let u = GridFunction::from_real_fn(grid, |x| x[0].cos() + 0.5 * (2.0 * x[0]).sin() + 0.25 * (3.0 * x[0]).cos());
    for eps in [0.2, 0.05] {
        let f = shear(eps);
        let q = transform_symbol(p.clone(), &f, None).unwrap();
        let oracle = pullback_apply(&p, &f, &u).unwrap();
        let direct = apply_xy_form(q.as_ref(), &u, DEFAULT_MAX_FLOPS).unwrap();
        let e = expand_transformed(q, grid, 1, 0.5).unwrap();
        let expanded = e.expansion.apply(&u, DEFAULT_MAX_FLOPS).unwrap();
        let pairs = [rel_l2(&direct, &oracle), rel_l2(&expanded, &oracle), rel_l2(&expanded, &direct)];
        assert!(pairs.iter().all(|&v| v < 0.05), "{pairs:?}");
    }
}

#[test]
fn evenness_is_preserved() {
    let p = shared(registry::bessel(2, 1.0));
    assert!(p.value(&[0.0, 0.0], &[1.0, 2.0]) == p.value(&[0.0, 0.0], &[-1.0, -2.0]));
    let f = Diffeomorphism::curved_halfspace(&BoundaryFunction::eps_sin(0.2, 1.0));
    let q = transform_symbol(p, &f, None).unwrap();
    let xs = vec![vec![0.1, 0.2], vec![-1.0, 0.7]];
    let ys = vec![vec![0.3, -0.2], vec![-0.9, 0.75], vec![1.5, 1.0]];
    let xis = vec![vec![1.0, 0.0], vec![3.0, -4.0], vec![-0.2, 10.0]];
    assert!(transformed_parity_residual(&q, Parity::Even, &xs, &ys, &xis) < 1e-10);
}

#[test]
fn rescaling_examples() {
    let eta = RadialCutoff::default();
    for r in [1.0, 0.5, 0.125] {
        let z = rescale_boundary(&BoundaryFunction::zero(), r, eta).unwrap();
        assert_eq!(z.norm, 0.0);
        assert_eq!(z.gamma.value(0.7), 0.0);
    }
    let rs = [1.0, 0.5, 0.25, 0.125];
    for g in [BoundaryFunction::square(), BoundaryFunction::sin_squared()] {
        let seq = scaling_sequence(&g, &rs, eta).unwrap();
        let max = seq.iter().cloned().fold(0.0, f64::max);
        let min = seq.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 3.0, "{}: {seq:?}", g.name);
    }
    // γ_R = R η s² exactly for the square
    let g = rescale_boundary(&BoundaryFunction::square(), 0.25, eta).unwrap();
    for s in [0.3, 1.2, 1.7] {
        let want = 0.25 * eta.value(&[s]) * s * s;
        assert!((g.gamma.value(s) - want).abs() < 1e-14);
    }
    let bad = BoundaryFunction::eps_sin(0.1, 1.0);
    assert!(matches!(rescale_boundary(&bad, 0.5, eta), Err(Error::Geometry(_))));
    assert!(rescale_boundary(&BoundaryFunction::square(), 1.5, eta).is_err());
}

#[test]
fn rescaled_symbols() {
    let eta = RadialCutoff::default();
    let p = shared(registry::frac_laplacian(1, 0.4));
    let pr = rescale_symbol(p.clone(), 0.25, eta).unwrap();
    for x in [0.0, 1.3, 5.0] {
        assert_eq!(pr.value(&[x], &[2.5]), p.value(&[x], &[2.5]));
    }
    let v = shared(registry::variable_even(1, 0.5, 0.3));
    let vr = rescale_symbol(v.clone(), 0.5, eta).unwrap();
    for x in [0.5, 1.5, 3.0] {
        let e = eta.value(&[x]);
        let want = v.value(&[0.5 * x], &[2.0]) * e + v.value(&[0.0], &[2.0]) * (1.0 - e);
        assert!((vr.value(&[x], &[2.0]) - want).norm() < 1e-14);
    }
}

#[test]
fn distance_examples() {
    let d = distance_function(DomainSpec::Interval { a: -1.0, b: 1.0 }, 0.01).unwrap();
    for x in [-0.95, -0.6, 0.55, 0.99] {
        let want = f64::min(1.0 - x, 1.0 + x);
        assert!((d.d0(&[x]) - want).abs() < 1e-15);
    }
    let disk = distance_function(DomainSpec::Disk { radius: 1.0 }, 0.01).unwrap();
    for x in [[0.6, 0.0], [0.3, -0.5], [-0.7, 0.7]] {
        assert!((disk.d0(&x) - (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt())).abs() < 1e-15);
    }

    let gamma = BoundaryFunction::eps_sin(0.1, 1.0);
    let hs = distance_function(DomainSpec::CurvedHalfspace { gamma: gamma.clone() }, 0.01).unwrap();
    let mut pts = Vec::new();
    for i in 0..41 {
        for j in 1..=10 {
            let x1 = -3.0 + 6.0 * i as f64 / 40.0;
            pts.push(vec![x1, gamma.value(x1) + 0.02 * j as f64]);
        }
    }
    // d₀ against a brute-force search over a fine graph sampling
    for x in pts.iter().step_by(7) {
        let brute = (0..=60000)
            .map(|k| {
                let s = x[0] - 0.3 + 0.6 * k as f64 / 60000.0;
                (s - x[0]).hypot(gamma.value(s) - x[1])
            })
            .fold(f64::INFINITY, f64::min);
        assert!((hs.d0(x) - brute).abs() < 1e-8);
    }
    let c = hs.equivalence_constant(&pts);
    assert!((1.0..=1.02).contains(&c), "C = {c}");
}

#[test]
fn under_resolved_curve_is_rejected() {
    let m = 16;
    let ts: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let pts: Vec<Point> = ts.iter().map(|t| [(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]).collect();
    let c = ClosedCurve::from_samples("coarse", &ts, &pts).unwrap();
    assert!(matches!(
        distance_function(DomainSpec::Curve(c.clone()), 0.05),
        Err(Error::Geometry(_))
    ));
    assert!(distance_function(DomainSpec::Curve(c), 0.5).is_ok());
}

#[test]
fn circle_atlas() {
    let atlas = build_atlas(&ClosedCurve::circle(1.0).unwrap(), 4).unwrap();
    assert_eq!(atlas.charts.len(), 4);
    for c in &atlas.charts {
        assert!(c.fit_residual < 1e-8);
        for k in 0..=50 {
            let s = -c.radius + 2.0 * c.radius * k as f64 / 50.0;
            let want = 1.0 - (1.0 - s * s).sqrt();
            assert!((c.gamma.eval(s)[0] - want).abs() < 1e-8);
        }
        // the outer normal is sent to -e₂
        let nu = [c.center[0], c.center[1]];
        let r = c.rotation;
        assert!((r[0][0] * nu[0] + r[0][1] * nu[1]).abs() < 1e-12);
        assert!((r[1][0] * nu[0] + r[1][1] * nu[1] + 1.0).abs() < 1e-12);
        // tangent sign convention
        assert!(r[0][0] > 1e-12 || (r[0][0].abs() <= 1e-12 && r[0][1] > 0.0));
    }
    assert!(atlas.partition_residual < 1e-10);
}

#[test]
fn ellipse_atlas_and_obstruction() {
    let curve = ClosedCurve::ellipse(2.0, 1.0).unwrap();
    let atlas = build_atlas(&curve, 8).unwrap();
    assert!(atlas.partition_residual < 1e-10);
    for x in [[0.0, 0.0], [1.9, 0.05], [-0.3, 0.95], [1.2, -0.7]] {
        let w = atlas.weights(x);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(w.iter().all(|&v| v >= 0.0));
    }
    match build_atlas(&curve, 2) {
        Err(Error::Geometry(msg)) => assert!(msg.contains("vertical-line"), "{msg}"),
        other => panic!("expected a vertical-line failure, got {:?}", other.map(|a| a.charts.len())),
    }
}

#[test]
fn boundary_csv_and_atlas_json_roundtrip() {
    let curve = ClosedCurve::ellipse(2.0, 1.0).unwrap();
    let mut buf = Vec::new();
    write_boundary_csv(&curve, 2000, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x1,x2");
    assert_eq!(lines[1].split(',').skip(1).collect::<Vec<_>>(), lines[lines.len() - 1].split(',').skip(1).collect::<Vec<_>>());
    let back = read_boundary_csv("ellipse-csv", std::io::BufReader::new(&buf[..])).unwrap();
    assert!((back.perimeter() - curve.perimeter()).abs() < 1e-8);
    let atlas = build_atlas(&back, 8).unwrap();
    let json = atlas.to_json().unwrap();
    let charts = ChartAtlas::charts_from_json(&json).unwrap();
    assert_eq!(charts.len(), 8);
    for (a, b) in charts[3].gamma.knots.iter().zip(&atlas.charts[3].gamma.knots) {
        assert!((a - b).abs() < 1e-14);
    }

    let broken = "t,x1,x2\n0,1,0\n0.5,abc,0\n";
    match read_boundary_csv("bad", std::io::BufReader::new(broken.as_bytes())) {
        Err(Error::Format(msg)) => assert!(msg.starts_with("line 3"), "{msg}"),
        _ => panic!("expected a format error"),
    }
}
