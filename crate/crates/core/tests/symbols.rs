use fracdo::symbols::registry::*;
use fracdo::symbols::*;
use fracdo::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn samples_2d() -> Vec<BoundarySample> {
    vec![
        BoundarySample::new(vec![0.0, 0.0], vec![0.0, 1.0]),
        BoundarySample::new(vec![0.3, -0.2], vec![0.6, 0.8]),
        BoundarySample::new(vec![-1.0, 0.5], vec![-1.0, 0.0]),
    ]
}

// points on {xₙ = 0} with normal eₙ: the χ± symbols are adapted to this halfspace only
fn halfspace_2d() -> Vec<BoundarySample> {
    vec![
        BoundarySample::new(vec![0.0, 0.0], vec![0.0, 1.0]),
        BoundarySample::new(vec![-2.5, 0.0], vec![0.0, 1.0]),
    ]
}

fn halfspace_1d() -> Vec<BoundarySample> {
    vec![BoundarySample::new(vec![0.0], vec![1.0])]
}

fn samples_1d() -> Vec<BoundarySample> {
    vec![
        BoundarySample::new(vec![-1.0], vec![1.0]),
        BoundarySample::new(vec![1.0], vec![-1.0]),
    ]
}

#[test]
fn eval_examples() {
    let s = frac_laplacian(2, 0.5);
    assert!((eval_symbol(&s, &[0.3, 0.1], &[0.0, 2.0], &[0, 0]).unwrap() - 2.0).norm() < 1e-15);

    // (1+i)^{1/2} in polar form: 2^{1/4} e^{iπ/8}
    let polar = Complex64::from_polar(2f64.powf(0.25), PI / 8.0);
    let chi = chi_plus(2, 0.5);
    let v = eval_symbol(&chi, &[0.0, 0.0], &[0.0, 1.0], &[0, 0]).unwrap();
    assert!((v - polar).norm() < 1e-14);
    assert!((v - c(1.09868, 0.45509)).norm() < 1e-5);
}

#[test]
fn eval_errors() {
    let s = frac_laplacian(1, 0.25);
    assert!(matches!(eval_symbol(&s, &[0.0], &[0.0], &[1]), Err(Error::Singularity(_))));
    assert!(matches!(eval_symbol(&s, &[0.0], &[1.0], &[5]), Err(Error::Capability(_))));
    // the excised version is smooth at the origin
    let e = frac_laplacian_excised(1, 0.25);
    assert_eq!(eval_symbol(&e, &[0.0], &[0.0], &[1]).unwrap(), c(0.0, 0.0));
}

#[test]
fn excision_transition_derivative_matches_difference_quotient() {
    let e = frac_laplacian_excised(1, 0.4);
    let xi = 0.73;
    let h = 1e-6;
    let fd = (eval_symbol(&e, &[0.0], &[xi + h], &[0]).unwrap() - eval_symbol(&e, &[0.0], &[xi - h], &[0]).unwrap()) / (2.0 * h);
    let d = eval_symbol(&e, &[0.0], &[xi], &[1]).unwrap();
    assert!((fd - d).norm() < 1e-7);
}

#[test]
fn homogeneity_of_derivatives() {
    let syms = [frac_laplacian(2, 0.35), chi_plus(2, 0.7), chi_minus(2, 1.3), variable_even(2, 0.6, 0.3)];
    for s in &syms {
        for alpha in fracdo::multi::up_to(2, 3) {
            for xi in [[1.0, 0.5], [-0.3, 1.7], [2.0, -2.0]] {
                let term = &s.terms[0];
                let k = fracdo::multi::order(&alpha) as f64;
                let at = |z: [f64; 2]| -> Complex64 {
                    let jets: Vec<fracdo::jet::Jet> = (0..2).map(|i| fracdo::jet::Jet::variable(i, z[i])).collect();
                    term.homogeneous().eval(&[0.4, 0.0], &jets).derivative_multi(&alpha)
                };
                let a = at(xi);
                let b = at([2.0 * xi[0], 2.0 * xi[1]]);
                let want = a * 2f64.powf(term.degree - k);
                assert!((b - want).norm() <= 1e-12 * want.norm().max(1e-300), "{} {alpha:?}", s.name);
            }
        }
    }
}

#[test]
fn conjugate_of_chi_plus_is_chi_minus() {
    for t in [-0.7, 0.3, 1.5] {
        let p = chi_plus(2, t);
        let m = chi_minus(2, t);
        for xi in [[0.0, 1.0], [3.0, -2.0], [-0.5, 0.25]] {
            let a = eval_symbol(&p, &[0.0, 0.0], &xi, &[0, 0]).unwrap();
            let b = eval_symbol(&m, &[0.0, 0.0], &xi, &[0, 0]).unwrap();
            assert!((a.conj() - b).norm() < 1e-14);
        }
    }
    let z = chi_plus(1, 0.0);
    assert_eq!(eval_symbol(&z, &[0.0], &[3.0], &[0]).unwrap(), c(1.0, 0.0));
}

#[test]
fn parity_examples() {
    let sample = SymbolSample {
        xs: vec![vec![0.0, 0.0], vec![0.5, -1.0]],
        xis: SymbolSample::shells(2, &[1.0, 3.0], 16, 7),
    };
    let r = check_parity(&frac_laplacian(2, 0.4), Parity::Even, &sample, 1e-12);
    assert_eq!(r.max_residual, 0.0);
    assert!(r.pass);

    // ξ₁|ξ|^{2a-1} as a principal term is odd, so the even check fails by 2|ξ₁||ξ|^{2a-1}
    let a = 0.4;
    let odd = ClassicalSymbol::new(
        "xi1",
        2,
        2.0 * a,
        f64::INFINITY,
        vec![HomogeneousTerm::new(2.0 * a, Expr::mul(Expr::Component(0), Expr::AbsPow(2.0 * a - 1.0)))],
    );
    let r = check_parity(&odd, Parity::Even, &sample, 1e-12);
    let want = sample
        .xis
        .iter()
        .map(|x| 2.0 * x[0].abs() * (x[0] * x[0] + x[1] * x[1]).powf(a - 0.5))
        .fold(0.0, f64::max);
    assert!(!r.pass);
    assert!((r.max_residual - want).abs() < 1e-12 * want);

    // an even symbol with a lower-order term; dropping p₀ leaves an odd symbol
    let two_terms = ClassicalSymbol::new(
        "even2",
        2,
        2.0 * a,
        f64::INFINITY,
        vec![
            HomogeneousTerm::new(2.0 * a, Expr::AbsPow(2.0 * a)),
            HomogeneousTerm::new(
                2.0 * a - 1.0,
                Expr::mul(Expr::Component(1), Expr::AbsPow(2.0 * a - 2.0)),
            ),
        ],
    );
    assert!(check_parity(&two_terms, Parity::Even, &sample, 1e-12).pass);
    let rest = drop_principal(&two_terms).unwrap();
    assert_eq!(rest.order, 2.0 * a - 1.0);
    let r = check_parity(&rest, Parity::Odd, &sample, 1e-12);
    assert_eq!(r.max_residual, 0.0);
}

#[test]
fn strong_ellipticity_examples() {
    let sphere = SymbolSample::sphere(2, 32, 3);
    let xs = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
    let m = check_strong_ellipticity(&frac_laplacian(2, 0.3), &sphere, &xs).unwrap();
    assert!((m - 1.0).abs() < 1e-14);

    let xs_var: Vec<Vec<f64>> = vec![vec![-PI / 2.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]];
    let m = check_strong_ellipticity(&variable_even(2, 0.5, 0.3), &sphere, &xs_var).unwrap();
    assert!((m - 0.7).abs() < 1e-14);

    let a = 0.5;
    let degenerate = ClassicalSymbol::new(
        "deg",
        2,
        2.0 * a,
        f64::INFINITY,
        vec![HomogeneousTerm::new(
            2.0 * a,
            Expr::mul(Expr::mul(Expr::Component(0), Expr::Component(0)), Expr::AbsPow(2.0 * a - 2.0)),
        )],
    );
    let m = check_strong_ellipticity(&degenerate, &[vec![0.0, 1.0], vec![0.0, -1.0]], &xs).unwrap();
    assert_eq!(m, 0.0);
}

#[test]
fn chi_symbols_satisfy_transmission() {
    for mu in [0.3, 0.5, 0.7, 1.0] {
        for (dim, samples) in [(1, halfspace_1d()), (2, halfspace_2d())] {
            let p = chi_plus(dim, mu);
            let r = check_mu_transmission(&p, mu, &samples, TransmissionOrders::default_for(&p), 1e-12).unwrap();
            assert!(r.pass, "chi_plus({mu}) dim {dim}: {}", r.max_residual);
            let m = chi_minus(dim, mu);
            let r = check_mu_transmission(&m, 0.0, &samples, TransmissionOrders::default_for(&m), 1e-12).unwrap();
            assert!(r.pass, "chi_minus({mu}) dim {dim}: {}", r.max_residual);
            // chi_plus is not of 0-transmission type for non-integer μ,
            // and not of μ-transmission type at a boundary with the opposite orientation
            if mu != 1.0 {
                let r = check_mu_transmission(&p, 0.0, &samples, TransmissionOrders::default_for(&p), 1e-8).unwrap();
                assert!(!r.pass);
                let flipped = [BoundarySample::new(vec![0.0; dim], { let mut n = vec![0.0; dim]; n[dim - 1] = -1.0; n })];
                let r = check_mu_transmission(&p, mu, &flipped, TransmissionOrders::default_for(&p), 1e-8).unwrap();
                assert!(!r.pass);
            }
        }
    }
}

#[test]
fn even_symbols_satisfy_a_transmission() {
    for a in [0.25, 0.5, 0.75] {
        for s in [frac_laplacian_excised(2, a), variable_even(2, a, 0.3), frac_laplacian(1, a)] {
            let samples = if s.dim == 1 { samples_1d() } else { samples_2d() };
            let r = check_mu_transmission(&s, a, &samples, TransmissionOrders { terms: 1, xi: 2, x: 1 }, 1e-8).unwrap();
            assert!(r.pass, "{}: {}", s.name, r.max_residual);
        }
        let odd = odd_perturbation(2, a, 0.5);
        let r = check_mu_transmission(&odd, a, &samples_2d(), TransmissionOrders::default_for(&odd), 1e-8).unwrap();
        assert!(r.max_residual > 0.1);
    }
}

#[test]
fn transmission_verdict_invariant_under_positive_scaling() {
    let p = chi_plus(2, 0.5);
    let scaled = multiply_symbols(&constant(2, 7.5), &p).unwrap();
    let o = TransmissionOrders::default_for(&p);
    let r1 = check_mu_transmission(&p, 0.5, &halfspace_2d(), o, 1e-8).unwrap();
    let r2 = check_mu_transmission(&scaled, 0.5, &halfspace_2d(), o, 1e-8).unwrap();
    assert!(r1.pass);
    assert_eq!(r1.pass, r2.pass);
    assert!((r1.max_residual - r2.max_residual).abs() < 1e-14);
}

#[test]
fn too_many_terms_is_a_capability_error() {
    let p = chi_plus(1, 0.5);
    let o = TransmissionOrders { terms: 2, xi: 1, x: 0 };
    assert!(matches!(check_mu_transmission(&p, 0.5, &samples_1d(), o, 1e-8), Err(Error::Capability(_))));
}

#[test]
fn products() {
    // same base: the principal term is χ₊^{s+t}
    let p = multiply_symbols(&chi_plus(2, 0.3), &chi_plus(2, 0.4)).unwrap();
    let q = chi_plus(2, 0.7);
    for xi in [[0.0, 1.0], [1.0, -3.0]] {
        let a = eval_symbol(&p, &[0.0, 0.0], &xi, &[1, 0]).unwrap();
        let b = eval_symbol(&q, &[0.0, 0.0], &xi, &[1, 0]).unwrap();
        assert!((a - b).norm() < 1e-13);
    }
    // even of order 2a times χ₊^{-a} has 0-transmission
    for a in [0.25, 0.5, 0.75] {
        let b = multiply_symbols(&frac_laplacian(2, a), &chi_plus(2, -a)).unwrap();
        let r = check_mu_transmission(&b, 0.0, &halfspace_2d(), TransmissionOrders::default_for(&b), 1e-10).unwrap();
        assert!(r.pass, "{}", r.max_residual);
        // and μ + μ' transmission for the product of χ₊^μ and χ₊^μ'
        let pr = multiply_symbols(&chi_plus(2, a), &chi_plus(2, 0.2)).unwrap();
        let r = check_mu_transmission(&pr, a + 0.2, &halfspace_2d(), TransmissionOrders::default_for(&pr), 1e-10).unwrap();
        assert!(r.pass);
    }
    // identity
    let one = constant(1, 1.0);
    let s = chi_minus(1, 0.6);
    let p = multiply_symbols(&one, &s).unwrap();
    for xi in [-2.0, 0.5, 4.0] {
        let a = eval_symbol(&p, &[0.0], &[xi], &[2]).unwrap();
        let b = eval_symbol(&s, &[0.0], &[xi], &[2]).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn seminorm_examples() {
    let sample = SymbolSample::line(-PI, PI, 201, &[0.0, 1.0, 10.0, 1e3]);
    assert!((seminorm(&constant(1, -2.5), 3, &sample).unwrap() - 2.5).abs() < 1e-14);

    let e = frac_laplacian_excised(1, 0.5);
    let v = seminorm(&e, 0, &sample).unwrap();
    assert!(v <= 1.0 && v > 0.99);

    // sin(x)|ξ|^{2a} with τ = 1.5: the C^{1.5} norm of sin is close to 2;
    // reference: 1 + max_{|x-y|<=1}|cos x - cos y|/|x-y|^{1/2} = 1 + 2 sin(1/2)
    let a = 0.3;
    let s = ClassicalSymbol::new(
        "sin",
        1,
        2.0 * a,
        1.5,
        vec![HomogeneousTerm::new(
            2.0 * a,
            Expr::mul(Expr::Coefficient(Coefficient::real("sin", |x| x[0].sin())), Expr::AbsPow(2.0 * a)),
        )],
    );
    let fine = SymbolSample::line(-PI, PI, 1001, &[1e4]);
    let v = seminorm(&s, 0, &fine).unwrap();
    let reference = 1.0 + 2.0 * 0.5f64.sin();
    assert!((v - reference).abs() < 2e-3 * reference, "{v}");
    assert!((v - 2.0).abs() < 0.05 * 2.0);

    assert!(matches!(seminorm(&e, 0, &SymbolSample::default()), Err(Error::Argument(_))));
}

#[test]
fn registry_by_name() {
    let mut params = serde_json::Map::new();
    params.insert("a".into(), serde_json::json!(0.5));
    let s = build("variable_even", 1, &params).unwrap();
    assert_eq!(s.order, 1.0);
    assert!(s.depends_on_x());
    assert!(build("nope", 1, &params).is_err());
    assert!(build("chi_plus", 1, &params).is_err());
    let names: Vec<_> = entries().iter().map(|e| e.name).collect();
    for n in ["frac_laplacian", "chi_plus", "chi_minus", "variable_even"] {
        assert!(names.contains(&n));
    }
}

proptest! {
    #[test]
    fn principal_chi_is_homogeneous(t in -1.5f64..1.5, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0, s in 1.0f64..4.0) {
        prop_assume!(x1 * x1 + x2 * x2 >= 1.0);
        let p = chi_plus(2, t);
        let e = p.terms[0].homogeneous();
        let a: Complex64 = e.eval(&[0.0, 0.0], &[c(x1, 0.0), c(x2, 0.0)]);
        let b: Complex64 = e.eval(&[0.0, 0.0], &[c(s * x1, 0.0), c(s * x2, 0.0)]);
        let want = a * s.powf(t);
        prop_assert!((b - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn frac_laplacian_is_even_and_homogeneous(a in 0.05f64..0.95, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0) {
        prop_assume!(x1 * x1 + x2 * x2 >= 1.0);
        let p = frac_laplacian_excised(2, a);
        let v = eval_symbol(&p, &[0.0, 0.0], &[x1, x2], &[0, 0]).unwrap();
        let w = eval_symbol(&p, &[0.0, 0.0], &[-x1, -x2], &[0, 0]).unwrap();
        let v2 = eval_symbol(&p, &[0.0, 0.0], &[2.0 * x1, 2.0 * x2], &[0, 0]).unwrap();
        prop_assert_eq!(v, w);
        prop_assert!((v2 - v * 4f64.powf(a)).norm() <= 1e-12 * v2.norm());
    }
}
