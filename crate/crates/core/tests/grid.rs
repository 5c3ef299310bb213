use fracdo::grid::hoelder::{hoelder_quotient, PairSample};
use fracdo::grid::io;
use fracdo::grid::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random(grid: TorusGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GridFunction::new(grid, values).unwrap()
}

#[test]
fn round_trip_and_parseval() {
    for grid in [TorusGrid::line(64, 8.0), TorusGrid::square(16, 3.0)] {
        let u = random(grid, 1);
        let c = u.forward();
        let v = GridFunction::inverse(grid, &c).unwrap();
        assert!(v.sub(&u).unwrap().sup_norm() <= 1e-13 * u.sup_norm());
        let lhs = u.l2_norm().powi(2);
        let rhs = grid.length.powi(grid.dim as i32) * c.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }
}

#[test]
fn delta_and_pure_mode() {
    let grid = TorusGrid::line(32, 2.0 * PI);
    let mut d = GridFunction::zeros(grid);
    d.values[0] = Complex64::new(1.0, 0.0);
    let c = d.forward();
    let m0 = c[0].norm();
    assert!(c.iter().all(|v| (v.norm() - m0).abs() < 1e-15));

    let k = 5;
    let xi = grid.freq_1d(k);
    let u = GridFunction::from_fn(grid, |x| Complex64::new(0.0, xi * x[0]).exp());
    let c = u.forward();
    for (i, v) in c.iter().enumerate() {
        let want = if i == k { 1.0 } else { 0.0 };
        assert!((v - want).norm() < 1e-13);
    }
}

#[test]
fn sobolev_examples() {
    let grid = TorusGrid::line(64, 8.0);
    let one = GridFunction::from_real_fn(grid, |_| 1.0);
    for s in [-1.0, 0.0, 2.5] {
        assert!((sobolev_norm(&one, s, 2.0).unwrap() - 8f64.sqrt()).abs() < 1e-13);
    }
    let xi0 = grid.freq_1d(3);
    let mode = GridFunction::from_fn(grid, |x| Complex64::new(0.0, xi0 * x[0]).exp());
    let want = (1.0 + xi0 * xi0).powf(0.75) * 8f64.sqrt();
    assert!((sobolev_norm(&mode, 1.5, 2.0).unwrap() - want).abs() < 1e-12 * want);

    // H¹ norm of a Gaussian vs quadrature of |u|² + |u'|²
    let grid = TorusGrid::line(256, 16.0);
    let u = GridFunction::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
    let h = grid.spacing();
    let direct: f64 = grid
        .nodes()
        .iter()
        .map(|x| {
            let v = (-x[0] * x[0]).exp();
            let d = -2.0 * x[0] * v;
            (v * v + d * d) * h
        })
        .sum::<f64>()
        .sqrt();
    let s1 = sobolev_norm(&u, 1.0, 2.0).unwrap();
    assert!((s1 - direct).abs() < 1e-6 * direct);

    assert!((sobolev_norm(&u, 0.0, 2.0).unwrap() - u.l2_norm()).abs() < 1e-13);
    // the Riemann-sum L_q version agrees with the exact one at q = 2
    assert!(sobolev_norm(&u, 0.5, 1.0).is_err());
    let q2 = sobolev_norm(&u, 0.5, 2.0).unwrap();
    let r = random(grid, 3);
    let mut prev = 0.0;
    for s in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let v = sobolev_norm(&r, s, 2.0).unwrap();
        assert!(v >= prev);
        prev = v;
    }
    let lq = sobolev_norm(&u, 0.5, 3.0).unwrap();
    assert!(lq.is_finite() && lq > 0.0 && q2 > 0.0);
}

#[test]
fn restriction_and_extension() {
    let grid = TorusGrid::line(64, 8.0);
    let mask = DomainMask::new(grid, DomainKind::Interval { a: -1.0, b: 1.0 }).unwrap();
    let all = DomainMask::full(grid);
    let u = random(grid, 4);
    let v = random(grid, 5);
    assert_eq!(all.restrict(&u).unwrap(), u);
    let w = mask.compress(&v).unwrap();
    let ext = mask.extend_by_zero(&w).unwrap();
    assert_eq!(mask.compress(&ext).unwrap(), w);
    // ⟨compress u, w⟩ = ⟨u, extend w⟩ and ⟨restrict u, v⟩ = ⟨u, restrict v⟩
    let lhs: Complex64 = mask.compress(&u).unwrap().iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
    let rhs: Complex64 = u.values.iter().zip(&ext.values).map(|(a, b)| a * b.conj()).sum();
    assert!((lhs - rhs).norm() < 1e-13);
    let l2 = mask.restrict(&u).unwrap().inner(&v);
    let r2 = u.inner(&mask.restrict(&v).unwrap());
    assert!((l2 - r2).norm() < 1e-13);
    for (i, &ins) in mask.inside.iter().enumerate() {
        let x = grid.node(i)[0];
        assert_eq!(ins, x > -1.0 && x < 1.0);
    }
    assert!(mask.extend_by_zero(&[]).is_err());
}

#[test]
fn hoelder_examples() {
    let grid = TorusGrid::line(1024, 4.0);
    let c = GridFunction::from_real_fn(grid, |_| 3.0);
    assert_eq!(hoelder_quotient(&c, 0.5, &PairSample::All { max_sep: 1.0 }, None).unwrap(), 0.0);

    let sigma = 0.4;
    let u = GridFunction::from_real_fn(grid, |x| x[0].abs().powf(sigma));
    let keep: Vec<bool> = grid.nodes().iter().map(|x| x[0].abs() <= 1.0).collect();
    let q = hoelder_quotient(&u, sigma, &PairSample::All { max_sep: 2.0 }, Some(&keep)).unwrap();
    assert!((q - 1.0).abs() < 0.05, "{q}");
    let r = hoelder_quotient(&u, sigma, &PairSample::Random { count: 20000, seed: 9, max_sep: 2.0 }, Some(&keep)).unwrap();
    assert!(r <= q + 1e-12);
    assert!(hoelder_quotient(&u, sigma, &PairSample::Explicit(vec![]), None).is_err());
    assert!(hoelder_quotient(&u, 1.2, &PairSample::All { max_sep: 1.0 }, None).is_err());
}

#[test]
fn serialization_round_trips() {
    for grid in [TorusGrid::line(16, 8.0), TorusGrid::square(8, 2.0)] {
        let u = random(grid, 6);
        let mut csv = Vec::new();
        io::write_csv(&u, &mut csv).unwrap();
        let back = io::read_csv(&csv[..]).unwrap();
        assert_eq!(back, u);
        let mut bin = Vec::new();
        io::write_binary(&u, &mut bin).unwrap();
        assert_eq!(bin.len(), io::HEADER_BYTES + 16 * grid.len());
        assert_eq!(&bin[..4], b"FDGF");
        assert_eq!(io::read_binary(&bin[..]).unwrap(), u);
    }
    let mut bad = Vec::new();
    io::write_binary(&GridFunction::zeros(TorusGrid::line(8, 1.0)), &mut bad).unwrap();
    bad[4] = 9;
    assert!(io::read_binary(&bad[..]).is_err());
}

#[test]
fn grid_validation() {
    assert!(TorusGrid::new(1, 12, 1.0).is_err());
    assert!(TorusGrid::new(3, 16, 1.0).is_err());
    assert!(TorusGrid::new(1, 4, 1.0).is_err());
    assert!(TorusGrid::new(1, 16, -1.0).is_err());
    let g = TorusGrid::line(8, 8.0);
    assert_eq!(g.node_1d(0), -4.0);
    assert!(GridFunction::new(g, vec![Complex64::new(0.0, 0.0); 7]).is_err());
}
