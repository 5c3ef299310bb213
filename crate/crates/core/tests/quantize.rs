use fracdo::grid::{bracket, sobolev_norm, GridFunction, TorusGrid};
use fracdo::quantize::*;
use fracdo::symbols::registry::{bessel, chi_plus, constant, frac_laplacian, frac_laplacian_excised, variable_even};
use fracdo::symbols::{Coefficient, Symbol};
use fracdo::Error;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn smooth_1d(grid: TorusGrid) -> GridFunction {
    GridFunction::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp(), 0.3 * (-(x[0] - 0.5).powi(2)).exp()))
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().sup_norm()
}

#[test]
fn x_form_examples() {
    let grid = TorusGrid::line(64, 8.0);
    let u = smooth_1d(grid);
    let id = apply_x_form(&constant(1, 1.0), &u).unwrap();
    assert!(max_diff(&id, &u) < 1e-14);

    let up = apply_x_form(&bessel(1, 1.3), &u).unwrap();
    let back = apply_x_form(&bessel(1, -1.3), &up).unwrap();
    assert!(max_diff(&back, &u) < 1e-12);

    let xi0 = grid.freq_1d(5);
    let e = GridFunction::from_fn(grid, |x| Complex64::from_polar(1.0, xi0 * x[0]));
    let out = apply_x_form(&frac_laplacian_excised(1, 0.3), &e).unwrap();
    let expect = e.map(|v| v * xi0.abs().powf(0.6));
    assert!(max_diff(&out, &expect) < 1e-12);

    let other = TorusGrid::square(8, 8.0);
    assert!(matches!(apply_x_form(&constant(1, 1.0), &GridFunction::zeros(other)), Err(Error::GridMismatch(_))));
}

#[test]
fn x_dependent_x_form_matches_pointwise_sum() {
    let grid = TorusGrid::line(32, 8.0);
    let p = variable_even(1, 0.4, 0.3);
    let u = smooth_1d(grid);
    let out = apply_x_form(&p, &u).unwrap();
    let uh = u.forward();
    for i in [0, 7, 16, 31] {
        let x = grid.node(i);
        let direct: Complex64 = (0..grid.len())
            .map(|k| {
                let xi = grid.freq(k);
                Complex64::from_polar(1.0, x[0] * xi[0]) * p.value(&x, &xi) * uh[k]
            })
            .sum();
        assert!((direct - out.values[i]).norm() < 1e-12);
    }
}

#[test]
fn xy_form_identities() {
    let grid = TorusGrid::line(64, 8.0);
    let u = smooth_1d(grid);
    let p = shared(bessel(1, 1.0));
    let budget = DEFAULT_MAX_FLOPS;

    let a = LeftSymbol(p.clone());
    let lhs = apply_xy_form(&a, &u, budget).unwrap();
    let rhs = apply_x_form(&p, &u).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-12 * u.sup_norm().max(1.0));

    let pv = shared(variable_even(1, 0.3, 0.3));
    let lhs = apply_xy_form(&LeftSymbol(pv.clone()), &u, budget).unwrap();
    let rhs = apply_x_form(&pv, &u).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-12);

    let phi = Coefficient::real("cos", |x: &[f64]| (2.0 * PI * x[0] / 8.0).cos());
    let sep = Separable {
        phi: phi.clone(),
        p: p.clone(),
    };
    let lhs = apply_xy_form(&sep, &u, budget).unwrap();
    let rhs = apply_x_form(&p, &u.mul_fn(|x| phi.eval(x))).unwrap();
    assert!(max_diff(&lhs, &rhs) < 1e-12);

    let left = LeftFactor { phi: phi.clone(), p: p.clone() };
    let lhs = apply_xy_form(&left, &u, budget).unwrap();
    let rhs = apply_x_form(&p, &u).unwrap().mul_fn(|x| phi.eval(x));
    assert!(max_diff(&lhs, &rhs) < 1e-12);
}

#[test]
fn budget_guard() {
    let grid = TorusGrid::square(64, 8.0);
    let u = GridFunction::zeros(grid);
    let a = LeftSymbol(shared(bessel(2, 1.0)));
    match apply_xy_form(&a, &u, DEFAULT_MAX_FLOPS) {
        Err(Error::Budget { required, budget }) => assert!(required > budget),
        other => panic!("expected a budget error, got {:?}", other.map(|_| ())),
    }
    assert!(xy_form_cost(&TorusGrid::line(128, 1.0)) < DEFAULT_MAX_FLOPS);
}

fn check_reduction(a: Arc<dyn Amplitude>, grid: TorusGrid, l: usize, u: &GridFunction) -> XFormExpansion {
    let exp = reduce_to_x_form(a.clone(), grid, l).unwrap();
    let direct = apply_xy_form(a.as_ref(), u, DEFAULT_MAX_FLOPS).unwrap();
    let split = exp.apply(u, DEFAULT_MAX_FLOPS).unwrap();
    assert!(max_diff(&direct, &split) <= 1e-8 * u.sup_norm(), "{}", a.name());
    assert!(diagonal_residual(exp.remainder.as_ref(), grid) <= 1e-10);
    if let Some(ir) = &exp.integral_remainder {
        assert!(diagonal_residual(ir.as_ref(), grid) <= 1e-10);
    }
    exp
}

#[test]
fn reduction_identity_and_diagonal() {
    let grid = TorusGrid::line(64, 2.0 * PI);
    let u = smooth_1d(grid);
    let p = shared(bessel(1, 1.0));
    let phi = Coefficient::real("sin", |x: &[f64]| x[0].sin());
    let sep: Arc<dyn Amplitude> = Arc::new(Separable { phi: phi.clone(), p: p.clone() });
    for l in 0..=2 {
        check_reduction(sep.clone(), grid, l, &u);
    }
    // l = 0: the principal term is φ(x)p(ξ).
    let exp = check_reduction(sep, grid, 0, &u);
    for i in [0, 11, 30] {
        for k in [0, 5, 40] {
            let expect = phi.eval(&grid.node(i)) * p.value(&grid.node(i), &grid.freq(k));
            assert!((exp.principal().get(i, k) - expect).norm() < 1e-12);
        }
    }
    let pv = shared(variable_even(1, 0.4, 0.3));
    let grid8 = TorusGrid::line(64, 8.0);
    let u8 = smooth_1d(grid8);
    check_reduction(Arc::new(RightSymbol(pv)), grid8, 1, &u8);

    let grid2 = TorusGrid::square(16, 2.0 * PI);
    let u2 = GridFunction::from_real_fn(grid2, |x| (x[0].cos() + 0.5 * x[1].sin()).exp());
    let sep2: Arc<dyn Amplitude> = Arc::new(Separable {
        phi: Coefficient::real("s", |x: &[f64]| x[0].sin() * x[1].cos()),
        p: shared(bessel(2, 1.0)),
    });
    check_reduction(sep2, grid2, 1, &u2);
}

#[test]
fn y_independent_reduction_is_trivial() {
    let grid = TorusGrid::line(32, 8.0);
    let u = smooth_1d(grid);
    let a: Arc<dyn Amplitude> = Arc::new(LeftSymbol(shared(variable_even(1, 0.3, 0.3))));
    let exp = check_reduction(a, grid, 2, &u);
    for (alpha, p) in &exp.terms[1..] {
        let m = p.rows.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(m < 1e-12, "{alpha:?}: {m}");
    }
    let r = apply_xy_form(exp.remainder.as_ref(), &u, DEFAULT_MAX_FLOPS).unwrap();
    assert!(r.sup_norm() < 1e-12);
}

#[test]
fn affine_expansion_is_exact() {
    let grid = TorusGrid::line(64, 4.0);
    let u = GridFunction::from_real_fn(grid, |x| (-4.0 * x[0] * x[0]).exp());
    let a: Arc<dyn Amplitude> = Arc::new(AffineInY {
        c0: 1.0,
        c1: vec![0.7],
        p: shared(bessel(1, 0.8)),
    });
    let exp = check_reduction(a, grid, 1, &u);
    let r = apply_xy_form(exp.remainder.as_ref(), &u, DEFAULT_MAX_FLOPS).unwrap();
    assert!(r.sup_norm() < 1e-10);
}

#[test]
fn reduction_needs_l_below_tau() {
    let grid = TorusGrid::line(16, 4.0);
    let a: Arc<dyn Amplitude> = Arc::new(FnAmplitude {
        name: "rough".into(),
        dim: 1,
        order: 0.0,
        hoelder: 1.5,
        f: Arc::new(|_x, y, _xi| c(y[0].abs().powf(1.5))),
    });
    assert!(reduce_to_x_form(a.clone(), grid, 1).is_ok());
    assert!(matches!(reduce_to_x_form(a, grid, 2), Err(Error::Hypothesis(_))));
}

#[test]
fn analytic_terms_match_closed_form() {
    // a = sin(y)⟨ξ⟩²: p_1 = cos(x)·D_ξ⟨ξ⟩² = -2iξ cos(x), up to O(h²) from the y-stencil.
    let grid = TorusGrid::line(64, 2.0 * PI);
    let sep = Separable {
        phi: Coefficient::real("sin", |x: &[f64]| x[0].sin()),
        p: shared(bessel(1, 2.0)),
    };
    let exp = reduce_to_x_form(Arc::new(Separable { phi: sep.phi.clone(), p: sep.p.clone() }), grid, 1).unwrap();
    let analytic = exp.analytic_terms(&sep).unwrap();
    let h = grid.spacing();
    let fd = h.sin() / h;
    for i in [0, 9, 40] {
        for k in [1, 7, 60] {
            let x = grid.node_1d(i);
            let xi = grid.freq_1d(k);
            let expect = Complex64::new(0.0, -2.0 * xi) * x.cos() * fd;
            assert!((analytic[1].1.get(i, k) - expect).norm() < 1e-9 * bracket(&[xi]));
        }
    }
}

#[test]
fn lattice_terms_approach_analytic_terms_for_decaying_kernels() {
    // ⟨ξ⟩^{-2} has kernel e^{-|x|}/2, so the lattice and analytic ξ-derivatives
    // differ only through the periodic wrap at |x| = L/2.
    let grid = TorusGrid::line(64, 24.0);
    let make = || Separable {
        phi: Coefficient::real("cos", |x: &[f64]| (2.0 * PI * x[0] / 24.0).cos()),
        p: shared(bessel(1, -2.0)),
    };
    let exp = reduce_to_x_form(Arc::new(make()), grid, 1).unwrap();
    let analytic = exp.analytic_terms(&make()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        for k in 0..grid.len() {
            worst = worst.max((exp.terms[1].1.get(i, k) - analytic[1].1.get(i, k)).norm());
        }
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn dyadic_partition_and_kernels() {
    let xis: Vec<Vec<f64>> = (1..400).map(|k| vec![0.013 * k as f64 * (1.0 + 0.01 * k as f64)]).collect();
    assert!(partition_residual(&xis) < 1e-12);
    let xis2: Vec<Vec<f64>> = (1..200).map(|k| vec![0.05 * k as f64, -0.03 * k as f64]).collect();
    assert!(partition_residual(&xis2) < 1e-12);
    for j in [1u32, 3, 6] {
        assert_eq!(dyadic_phi(j, &[2f64.powi(j as i32 - 1) * 0.999]), 0.0);
        assert_eq!(dyadic_phi(j, &[2f64.powi(j as i32 + 1) * 1.001]), 0.0);
        let x = 1.37;
        assert!((dyadic_phi(j, &[x * 2f64.powi(j as i32 - 1)]) - dyadic_phi(1, &[x])).abs() < 1e-15);
    }

    let zero = FnAmplitude {
        name: "zero".into(),
        dim: 1,
        order: 0.0,
        hoelder: f64::INFINITY,
        f: Arc::new(|_, _, _| c(0.0)),
    };
    for j in 0..5 {
        assert_eq!(kernel_dyadic(&zero, &[0], &[0], j, &[0.1], &[0.4], &[1.0]).unwrap(), c(0.0));
    }
    let a = LeftSymbol(shared(bessel(1, -0.5)));
    assert!(matches!(kernel_dyadic(&a, &[0], &[0], 2, &[0.0], &[0.0], &[0.0]), Err(Error::Singularity(_))));
}

#[test]
fn dyadic_decay_matches_integration_by_parts() {
    let a = LeftSymbol(shared(bessel(1, 0.5)));
    let js: Vec<u32> = (3..=8).collect();
    for n_ibp in [2usize, 3, 4] {
        let st = dyadic_decay_study(&a, &[0.2], &[0.3], &[1.0], n_ibp, &js).unwrap();
        assert!(st.slope_error() < 0.15, "{st:?}");
        assert!(st.kernel_below_bound, "{st:?}");
    }
    let a2 = LeftSymbol(shared(bessel(2, -0.5)));
    let st = dyadic_decay_study(&a2, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], 4, &[3, 4, 5, 6]).unwrap();
    assert!(st.slope_error() < 0.15, "{st:?}");
}

#[test]
fn poisson_profile_matches_residue_oracle() {
    let n = 512;
    let grid = TorusGrid::line(n, 20.0);
    let p = chi_plus(1, -1.0);
    let res = poisson_apply(&p, 0, &BoundaryData::Scalar(c(1.0)), grid).unwrap();
    assert!(res.transmission_ok);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = grid.node_1d(i);
        if z > 0.0 {
            worst = worst.max((res.values.values[i] - c((-z).exp())).norm());
        } else if z < 0.0 {
            assert_eq!(res.values.values[i], c(0.0));
        }
    }
    assert!(worst < 0.01, "{worst}");

    let zero = poisson_apply(&p, 0, &BoundaryData::Scalar(c(0.0)), grid).unwrap();
    assert_eq!(zero.values.sup_norm(), 0.0);
}

#[test]
fn poisson_linearity_and_2d_constant_data() {
    let grid = TorusGrid::square(32, 12.0);
    let line = TorusGrid::line(32, 12.0);
    let p = chi_plus(2, -1.0);
    let v1 = GridFunction::from_real_fn(line, |x| (-x[0] * x[0]).exp());
    let v2 = GridFunction::from_real_fn(line, |x| (2.0 * PI * x[0] / 12.0).sin());
    let k1 = poisson_apply(&p, 1, &BoundaryData::Line(v1.clone()), grid).unwrap().values;
    let k2 = poisson_apply(&p, 1, &BoundaryData::Line(v2.clone()), grid).unwrap().values;
    let k12 = poisson_apply(&p, 1, &BoundaryData::Line(v1.add(&v2).unwrap()), grid).unwrap().values;
    assert!(max_diff(&k12, &k1.add(&k2).unwrap()) < 1e-12);

    let ones = GridFunction::from_real_fn(line, |_| 1.0);
    let k = poisson_apply(&p, 0, &BoundaryData::Line(ones), grid).unwrap().values;
    for idx in 0..grid.len() {
        let x = grid.node(idx);
        if x[1] > 0.0 {
            assert!((k.values[idx] - c((-x[1]).exp())).norm() < 0.03);
        }
    }
}

#[test]
fn commutator_reproduces_direct_difference() {
    let grid = TorusGrid::line(256, 2.0 * PI);
    let p = shared(bessel(1, 2.0));
    let phi = SmoothFunction::new("sin", 1, |x| x[0].sin()).with_gradient(|x| [x[0].cos(), 0.0]);
    let u = GridFunction::from_real_fn(grid, |x| x[0].cos().exp());
    let a = commutator_symbol(p.clone(), phi, CommutatorMode::Lattice(grid)).unwrap();
    assert_eq!(a.order(), 1.0);
    let via_amp = apply_xy_form(a.as_ref(), &u, DEFAULT_MAX_FLOPS).unwrap();
    let direct = apply_x_form(&p, &u.mul_fn(|x| c(x[0].sin())))
        .unwrap()
        .sub(&apply_x_form(&p, &u).unwrap().mul_fn(|x| c(x[0].sin())))
        .unwrap();
    let err = max_diff(&via_amp, &direct);
    assert!(err < 1e-8 * u.sup_norm(), "{err}");
}

#[test]
fn commutator_amplitude_properties() {
    let p = shared(frac_laplacian(2, 0.6));
    let flat = SmoothFunction::new("const", 2, |_| 2.5);
    let a = commutator_symbol(p.clone(), flat, CommutatorMode::Analytic).unwrap();
    let pa = a.as_point().unwrap();
    assert_eq!(pa.value(&[0.1, 0.2], &[0.5, -0.3], &[1.0, 2.0]), c(0.0));

    let phi = SmoothFunction::new("wave", 2, |x| (x[0] + 0.3 * x[1]).sin());
    let a = commutator_symbol(p, phi, CommutatorMode::Analytic).unwrap();
    let pa = a.as_point().unwrap();
    let mut worst: f64 = 0.0;
    for (x, y) in [([0.1, 0.2], [0.5, -0.3]), ([-1.0, 0.0], [0.3, 0.9])] {
        for xi in [[1.0, 2.0], [-3.0, 0.5], [0.2, -7.0]] {
            let v = pa.value(&x, &y, &xi);
            let w = pa.value(&x, &y, &[-xi[0], -xi[1]]);
            worst = worst.max((v + w).norm() / bracket(&xi).powf(0.2));
        }
    }
    assert!(worst < 1e-10);
}

fn bump_on(center: f64, radius: f64) -> impl Fn(&[f64]) -> f64 {
    move |x| fracdo::cutoff::bump((x[0] - center) / radius)
}

#[test]
fn disjoint_supports_smooth_out() {
    let p = bessel(1, 1.0);
    let phi = bump_on(-1.5, 0.8);
    let psi = bump_on(1.5, 0.8);
    let mut ratios = Vec::new();
    for n in [64, 128, 256] {
        let grid = TorusGrid::line(n, 8.0);
        let u = GridFunction::from_real_fn(grid, |x| ((7.0 * x[0]).sin() + (x[0] * 3.0).cos()) * (1.0 + x[0].abs()));
        let w = apply_x_form(&p, &u.mul_fn(|x| c(phi(x)))).unwrap().mul_fn(|x| c(psi(x)));
        ratios.push(sobolev_norm(&w, 2.0, 2.0).unwrap() / sobolev_norm(&u, 0.0, 2.0).unwrap());
    }
    for w in ratios.windows(2) {
        assert!(w[1] <= 1.2 * w[0], "{ratios:?}");
    }
}

#[test]
fn operator_norms_are_uniform_in_n() {
    let p = variable_even(1, 0.4, 0.3);
    let mut norms = Vec::new();
    for n in [64, 128, 256] {
        let grid = TorusGrid::line(n, 8.0);
        norms.push(sobolev_operator_norm(&p, grid, 0.5, 0.8, 60).unwrap());
    }
    let mx = norms.iter().cloned().fold(0.0, f64::max);
    let mn = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(mx / mn < 1.2, "{norms:?}");
    assert!(mx < 2.0, "{norms:?}");
}
