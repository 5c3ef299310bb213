//! One function per subcommand. Each fills an [`Output`] with data files
//! and verdict reports.

use crate::config::{AmplitudeKind, BoundarySpec, Config, ConfigError, DomainSpec, FitModelSpec, SampleSet, SymbolSpec};
use crate::output::Output;
use crate::CmdError;
use fracdo::cutoff::bump;
use fracdo::dirichlet::{
    assemble, getoor_solution, getoor_trace, hoelder_growth, regularity_report, solve, write_solution_csv, AssembleOptions,
    FitModel, FitRegions, RefinementRecord, RegularityOptions, RegularityReport,
};
use fracdo::geometry::{
    build_atlas, expand_transformed, principal_distance, pullback_apply, scaling_sequence, transform_symbol, write_boundary_csv,
    BoundaryFunction, ChartAtlas, ClosedCurve, Diffeomorphism, RadialCutoff,
};
use fracdo::grid::io::{read_binary, write_binary, write_csv};
use fracdo::grid::{DomainMask, GridFunction, TorusGrid};
use fracdo::order_reduce::{apply_order_reducer, support_leakage};
use fracdo::quantize::{apply_xy_form, PointAmplitude, diagonal_residual, reduce_to_x_form, shared, AffineInY, Amplitude};
use fracdo::report::{Check, Report};
use fracdo::symbols::{
    check_mu_transmission, check_parity, check_strong_ellipticity, BoundarySample, ClassicalSymbol, Coefficient, Parity, Sign,
    Symbol, SymbolSample, TransmissionOrders,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub out: &'a mut Output,
    pub max_flops: f64,
    pub command: &'a str,
}

fn need<T>(v: Option<T>, key: &str, command: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("experiment.{key}: required by `{command}`")))
}

fn require_dim(cfg: &Config, dims: &[usize], command: &str) -> Result<(), ConfigError> {
    if dims.contains(&cfg.grid.n) {
        Ok(())
    } else {
        Err(ConfigError(format!("grid.n: `{command}` supports dimension {dims:?}, got {}", cfg.grid.n)))
    }
}

fn rel_l2(a: &GridFunction, b: &GridFunction) -> fracdo::Result<f64> {
    Ok(a.sub(b)?.l2_norm() / b.l2_norm())
}

pub fn check_transmission(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    let p = cfg.symbol(cx.command)?;
    let mu = need(cfg.experiment.mu, "mu", cx.command)?;
    let dim = cfg.grid.n;
    require_dim(cfg, &[1, 2], cx.command)?;
    let samples = match (cfg.experiment.samples.unwrap_or(SampleSet::Halfspace), dim) {
        (SampleSet::Halfspace, 1) => vec![BoundarySample::new(vec![0.0], vec![1.0])],
        (SampleSet::Halfspace, _) => vec![
            BoundarySample::new(vec![0.0, 0.0], vec![0.0, 1.0]),
            BoundarySample::new(vec![-2.5, 0.0], vec![0.0, 1.0]),
        ],
        (SampleSet::Curved, 1) => vec![
            BoundarySample::new(vec![-1.0], vec![1.0]),
            BoundarySample::new(vec![1.0], vec![-1.0]),
        ],
        (SampleSet::Curved, _) => vec![
            BoundarySample::new(vec![0.0, 0.0], vec![0.0, 1.0]),
            BoundarySample::new(vec![0.3, -0.2], vec![0.6, 0.8]),
            BoundarySample::new(vec![-1.0, 0.5], vec![-1.0, 0.0]),
        ],
    };
    let tol = cfg.tolerances.transmission.0;
    let t = check_mu_transmission(&p, mu, &samples, TransmissionOrders::default_for(&p), tol)?;
    cx.out.data("transmission.csv", |w| {
        writeln!(w, "term,alpha,beta,sample,residual")?;
        for r in &t.residuals {
            let ix = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            writeln!(w, "{},{},{},{},{:.12e}", r.j, ix(&r.alpha), ix(&r.beta), r.point, r.residual)?;
        }
        Ok(())
    })?;
    let mut r = Report::new(format!("{mu}-transmission of {}", p.name));
    r.push(Check::below("max_relative_residual", t.max_residual, tol));
    r.note(format!("{} residuals, {} skipped", t.residuals.len(), t.skipped));
    cx.out.report("check_transmission", r);
    Ok(())
}

pub fn check_parity_cmd(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    let p = cfg.symbol(cx.command)?;
    require_dim(cfg, &[1, 2], cx.command)?;
    let dim = cfg.grid.n;
    let kind = cfg.experiment.parity.unwrap_or(Parity::Even);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 * cfg.grid.length.0;
    let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..dim).map(|_| rng.gen_range(-half..half)).collect()).collect();
    let xis = SymbolSample::shells(dim, &[1.0, 3.0, 10.0], 8, cfg.seed);
    let samples = SymbolSample { xs: xs.clone(), xis };
    let tol = cfg.tolerances.parity.0;
    let rep = check_parity(&p, kind, &samples, tol);
    cx.out.data("parity_samples.csv", |w| {
        writeln!(w, "role,c1,c2")?;
        for (role, pts) in [("x", &samples.xs), ("xi", &samples.xis)] {
            for v in pts.iter() {
                writeln!(w, "{role},{:.12e},{:.12e}", v[0], v.get(1).copied().unwrap_or(0.0))?;
            }
        }
        Ok(())
    })?;
    let mut r = Report::new(format!("{kind:?} parity of {}", p.name).to_lowercase());
    r.push(Check::at_most("max_relative_residual", rep.max_relative, tol));
    match check_strong_ellipticity(&p, &SymbolSample::sphere(dim, 16, cfg.seed), &xs) {
        Ok(m) => r.note(format!("strong ellipticity margin {m:.6e}")),
        Err(e) => r.note(format!("strong ellipticity not evaluated: {e}")),
    };
    cx.out.report("check_parity", r);
    Ok(())
}

fn smooth_test_function(grid: TorusGrid) -> GridFunction {
    let w = 2.0 * std::f64::consts::PI / grid.length;
    GridFunction::from_fn(grid, |x| {
        let s: f64 = x.iter().map(|v| (w * v).cos()).sum();
        Complex64::new(s.exp(), 0.3 * (2.0 * w * x[0]).sin())
    })
}

pub fn reduce_xform(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    let p = shared(cfg.symbol(cx.command)?);
    let grid = cfg.grid.torus()?;
    let kind = cfg.experiment.amplitude.unwrap_or(AmplitudeKind::Separable);
    let dim = grid.dim;
    let a: Arc<dyn Amplitude> = match kind {
        AmplitudeKind::Left => Arc::new(fracdo::quantize::LeftSymbol(p.clone())),
        AmplitudeKind::Right => Arc::new(fracdo::quantize::RightSymbol(p.clone())),
        AmplitudeKind::Separable => Arc::new(fracdo::quantize::Separable {
            phi: Coefficient::real("sin(y1)", |y: &[f64]| y[0].sin()),
            p: p.clone(),
        }),
        AmplitudeKind::Affine => Arc::new(AffineInY {
            c0: 1.0,
            c1: vec![0.7; dim],
            p: p.clone(),
        }),
        AmplitudeKind::Transformed => {
            require_dim(cfg, &[1], cx.command)?;
            let eps = cfg.experiment.eps.as_ref().and_then(|v| v.first()).map_or(0.1, |e| e.0);
            let f = Diffeomorphism::shear_1d(&BoundaryFunction::eps_sin(eps, 1.0))?;
            transform_symbol(p.clone(), &f, None)?
        }
    };
    let u = smooth_test_function(grid);
    let direct = apply_xy_form(a.as_ref(), &u, cx.max_flops)?;
    let orders = cfg.experiment.orders.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let mut r = Report::new(format!("x-form reduction of {}", a.name()));
    let mut last = None;
    for &l in &orders {
        let exp = reduce_to_x_form(a.clone(), grid, l)?;
        let split = exp.apply(&u, cx.max_flops)?;
        let err = direct.sub(&split)?.sup_norm() / u.sup_norm();
        r.push(Check::at_most(format!("l{l}_identity"), err, cfg.tolerances.identity.0));
        let mut diag = diagonal_residual(exp.remainder.as_ref(), grid);
        if let Some(ir) = &exp.integral_remainder {
            diag = diag.max(diagonal_residual(ir.as_ref(), grid));
        }
        r.push(Check::at_most(format!("l{l}_diagonal"), diag, cfg.tolerances.diagonal.0));
        last = Some(split);
    }
    if let Some(split) = last {
        cx.out.data("reduce_xform.csv", |w| {
            writeln!(w, "node,direct_re,direct_im,split_re,split_im")?;
            for i in 0..grid.len() {
                let (d, s) = (direct.values[i], split.values[i]);
                writeln!(w, "{i},{:.12e},{:.12e},{:.12e},{:.12e}", d.re, d.im, s.re, s.im)?;
            }
            Ok(())
        })?;
    }
    cx.out.report("reduce_xform", r);
    Ok(())
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

pub fn transform_symbol_cmd(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    require_dim(cfg, &[1], cx.command)?;
    let p = shared(cfg.symbol(cx.command)?);
    let grid = cfg.grid.torus()?;
    let eps: Vec<f64> = cfg
        .experiment
        .eps
        .as_ref()
        .map_or_else(|| vec![0.2, 0.1, 0.05], |v| v.iter().map(|e| e.0).collect());
    if eps.len() < 2 {
        return Err(ConfigError("experiment.eps: needs at least two values for a slope".into()).into());
    }
    let tau_prime = cfg.experiment.tau_prime.unwrap_or(0.5);
    let mut r = Report::new(format!("coordinate change of {}", p.name()));

    let id = transform_symbol(p.clone(), &Diffeomorphism::identity(1), Some(1.0))?;
    let mut exact = true;
    for (x, y) in [(0.3, 0.1), (-1.0, -0.8), (2.0, 2.45)] {
        for xi in [-7.0, 0.5, 3.0] {
            exact &= id.value(&[x], &[y], &[xi]) == p.value(&[x], &[xi]);
        }
    }
    r.push(Check::holds("identity_reproduces_p", exact));

    let half = 0.5 * grid.length;
    let xs: Vec<Vec<f64>> = (0..64).map(|i| vec![-half + grid.length * i as f64 / 64.0]).collect();
    let xis: Vec<Vec<f64>> = [-20.0, -3.0, 0.0, 1.0, 5.0, 40.0].iter().map(|&v| vec![v]).collect();
    let u = smooth_test_function(grid);
    let tol = cfg.tolerances.operator.0;
    let mut rows = Vec::new();
    let mut tau = f64::INFINITY;
    for &e in &eps {
        let f = Diffeomorphism::shear_1d(&BoundaryFunction::eps_sin(e, 1.0))?;
        tau = tau.min(f.hoelder).min(Symbol::hoelder(p.as_ref()));
        let q = transform_symbol(p.clone(), &f, None)?;
        let oracle = pullback_apply(&p, &f, &u)?;
        let direct = apply_xy_form(q.as_ref(), &u, cx.max_flops)?;
        let ex = expand_transformed(q, grid, 1, tau_prime)?;
        let expanded = ex.expansion.apply(&u, cx.max_flops)?;
        let gaps = [rel_l2(&direct, &oracle)?, rel_l2(&expanded, &oracle)?, rel_l2(&expanded, &direct)?];
        for (name, g) in ["xy_vs_pullback", "x_vs_pullback", "x_vs_xy"].iter().zip(gaps) {
            r.push(Check::at_most(format!("eps{e}_{name}"), g, tol));
        }
        let closed = principal_distance(p.as_ref(), &f, 2, tau_prime, &xs, &xis)?;
        rows.push((e, ex.principal_distance, closed, gaps));
    }
    let ideal = (tau - tau_prime).min(1.0);
    let need = cfg.tolerances.slope.0 * ideal;
    let grid_d: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let closed_d: Vec<f64> = rows.iter().map(|r| r.2).collect();
    r.push(Check::at_least("slope_grid_seminorm", log_slope(&eps, &grid_d), need));
    r.push(Check::at_least("slope_closed_form_seminorm", log_slope(&eps, &closed_d), need));
    cx.out.data("transform.csv", |w| {
        writeln!(w, "eps,distance_grid,distance_closed_form,xy_vs_pullback,x_vs_pullback,x_vs_xy")?;
        for (e, g, c, gaps) in &rows {
            writeln!(w, "{e},{g:.12e},{c:.12e},{:.12e},{:.12e},{:.12e}", gaps[0], gaps[1], gaps[2])?;
        }
        Ok(())
    })?;
    cx.out.report("transform_symbol", r);
    Ok(())
}

fn boundary(spec: &BoundarySpec) -> BoundaryFunction {
    match spec {
        BoundarySpec::Square => BoundaryFunction::square(),
        BoundarySpec::SinSquared => BoundaryFunction::sin_squared(),
        BoundarySpec::Power { tau } => BoundaryFunction::power(tau.0),
        BoundarySpec::EpsSin { eps } => BoundaryFunction::eps_sin(*eps, 1.0),
    }
}

pub fn scaling_study(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    let specs = cfg
        .experiment
        .boundaries
        .clone()
        .unwrap_or_else(|| vec![BoundarySpec::Square, BoundarySpec::SinSquared]);
    let rs: Vec<f64> = cfg
        .experiment
        .radii
        .as_ref()
        .map_or_else(|| vec![1.0, 0.5, 0.25, 0.125], |v| v.iter().map(|r| r.0).collect());
    let eta = match cfg.experiment.cutoff {
        Some((a, b)) => RadialCutoff::new(a.0, b.0).map_err(|e| ConfigError(format!("experiment.cutoff: {e}")))?,
        None => RadialCutoff::default(),
    };
    let mut r = Report::new("boundary rescaling");
    let mut rows = Vec::new();
    for spec in &specs {
        let g = boundary(spec);
        let seq = scaling_sequence(&g, &rs, eta)?;
        let max = seq.iter().cloned().fold(0.0, f64::max);
        let min = seq.iter().cloned().fold(f64::INFINITY, f64::min);
        r.push(Check::at_most(format!("{}_max_over_min", g.name), max / min, cfg.tolerances.scaling_ratio.0));
        for (rad, v) in rs.iter().zip(&seq) {
            rows.push((g.name.clone(), *rad, *v));
        }
    }
    cx.out.data("scaling.csv", |w| {
        writeln!(w, "boundary,r,normalized_norm")?;
        for (name, rad, v) in &rows {
            writeln!(w, "{name},{rad},{v:.12e}")?;
        }
        Ok(())
    })?;
    cx.out.report("scaling_study", r);
    Ok(())
}

fn random(grid: TorusGrid, rng: &mut ChaCha8Rng) -> fracdo::Result<GridFunction> {
    let v = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::new(grid, v)
}

pub fn order_reduce_demo(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    require_dim(cfg, &[1, 2], cx.command)?;
    let grid = cfg.grid.torus()?;
    let t = cfg.experiment.t.unwrap_or(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u = random(grid, &mut rng)?;
    let v = random(grid, &mut rng)?;
    let tol = cfg.tolerances.reducer.0;
    let mut r = Report::new(format!("order reducers, t = {t}"));
    let scale = u.sup_norm();
    for s in [0.7, -0.4] {
        let lhs = apply_order_reducer(s, Sign::Plus, &apply_order_reducer(t, Sign::Plus, &u));
        let rhs = apply_order_reducer(s + t, Sign::Plus, &u);
        r.push(Check::at_most(format!("composition_s{s}"), lhs.sub(&rhs)?.sup_norm() / scale, tol));
    }
    let lhs = apply_order_reducer(t, Sign::Plus, &u).inner(&v);
    let rhs = u.inner(&apply_order_reducer(t, Sign::Minus, &v));
    r.push(Check::at_most("adjoint", (lhs - rhs).norm() / lhs.norm().max(1.0), tol));

    let (center, width) = cfg.experiment.bump.map_or((0.6, 0.5), |(c, w)| (c, w.0));
    if center - width < 0.0 {
        return Err(ConfigError("experiment.bump: the bump must lie in the upper halfspace".into()).into());
    }
    let sizes = cfg.experiment.sizes.clone().unwrap_or_else(|| vec![256, 512, 1024, 2048]);
    let mut leaks = Vec::new();
    for &n in &sizes {
        let g = TorusGrid::new(1, n, grid.length).map_err(|e| ConfigError(format!("experiment.sizes: {e}")))?;
        let b = GridFunction::from_real_fn(g, |x| bump((x[0] - center) / width));
        leaks.push((n, support_leakage(t, Sign::Plus, &b)?));
    }
    let monotone = leaks.windows(2).all(|w| w[1].1 < w[0].1);
    r.push(Check::holds("leakage_decreases", monotone));
    cx.out.data("leakage.csv", |w| {
        writeln!(w, "N,leakage")?;
        for (n, l) in &leaks {
            writeln!(w, "{n},{l:.12e}")?;
        }
        Ok(())
    })?;
    let g = TorusGrid::new(1, *sizes.last().unwrap_or(&grid.n), grid.length)
        .map_err(|e| ConfigError(format!("experiment.sizes: {e}")))?;
    let reduced = apply_order_reducer(t, Sign::Plus, &GridFunction::from_real_fn(g, |x| bump((x[0] - center) / width)));
    cx.out.data("reduced_bump.csv", |w| write_csv(&reduced, w))?;
    cx.out.data("reduced_bump.bin", |w| write_binary(&reduced, w))?;
    cx.out.report("order_reduce_demo", r);
    Ok(())
}

/// `a`, the half order, of a symbol admissible for the Dirichlet solver.
fn half_order(p: &ClassicalSymbol) -> f64 {
    0.5 * p.order
}

struct Solved {
    p: ClassicalSymbol,
    a: f64,
    mask: DomainMask,
    u: GridFunction,
    residual: Option<f64>,
}

fn solve_configured(cx: &Ctx, p: ClassicalSymbol) -> Result<Solved, CmdError> {
    let cfg = cx.cfg;
    let mask = cfg.mask(cx.command)?;
    let a = half_order(&p);
    let opts = AssembleOptions {
        image_correction: cfg.experiment.image_correction.unwrap_or(true),
        ..AssembleOptions::default()
    };
    let sys = assemble(&p, &mask, &opts)?;
    let c = cfg.experiment.rhs.unwrap_or(1.0);
    let f = GridFunction::from_real_fn(mask.grid, |_| c);
    let sol = solve(&sys, &f)?;
    Ok(Solved {
        p,
        a,
        mask,
        u: sol.u,
        residual: Some(sol.residual),
    })
}

/// The ball solution scaled by the right-hand side, when one applies.
fn closed_form(cfg: &Config, p: &ClassicalSymbol, grid: TorusGrid) -> Option<GridFunction> {
    let lap = matches!(cfg.symbol.as_ref(), Some(SymbolSpec::Named { name, .. }) if name == "frac_laplacian");
    let ball = cfg.domain.as_ref().is_some_and(DomainSpec::is_unit_ball);
    let c = cfg.experiment.rhs.unwrap_or(1.0);
    let a = half_order(p);
    (lap && ball).then(|| GridFunction::from_real_fn(grid, |x| c * getoor_solution(a, x)))
}

fn atlas_for(cx: &Ctx) -> Result<Option<(ClosedCurve, ChartAtlas)>, CmdError> {
    match cx.cfg.domain {
        Some(DomainSpec::Ellipse { a1, a2 }) => {
            let curve = ClosedCurve::ellipse(a1.0, a2.0)?;
            let atlas = build_atlas(&curve, cx.cfg.experiment.charts.unwrap_or(8))?;
            Ok(Some((curve, atlas)))
        }
        _ => Ok(None),
    }
}

pub fn solve_dirichlet(cx: &mut Ctx) -> Result<(), CmdError> {
    let p = cx.cfg.symbol(cx.command)?;
    let s = solve_configured(cx, p)?;
    let mut r = Report::new(format!("Dirichlet problem for {} on {:?}", s.p.name, s.mask.kind));
    if let Some(res) = s.residual {
        r.push(Check::at_most("solver_residual", res, cx.cfg.tolerances.residual.0));
    }
    match closed_form(cx.cfg, &s.p, s.mask.grid) {
        Some(exact) => {
            r.push(Check::at_most("rel_l2_vs_ball_solution", rel_l2(&s.u, &exact)?, cx.cfg.tolerances.l2.0));
        }
        None => {
            r.note("no closed-form solution for this symbol and domain");
        }
    }
    r.note(format!("{} interior nodes", s.mask.count()));
    cx.out.data("solution.csv", |w| write_solution_csv(&s.u, s.a, &s.mask, w))?;
    cx.out.data("solution.bin", |w| write_binary(&s.u, w))?;
    if let Some((curve, atlas)) = atlas_for(cx)? {
        cx.out.data("boundary.csv", |w| write_boundary_csv(&curve, 256, w))?;
        let json = atlas.to_json()?;
        cx.out.data("atlas.json", |w| Ok(w.write_all(json.as_bytes())?))?;
    }
    cx.out.report("solve_dirichlet", r);
    Ok(())
}

fn fit_options(cfg: &Config) -> RegularityOptions {
    RegularityOptions {
        window: cfg.experiment.window.map(|(a, b)| (a.0, b.0)),
        model: match cfg.experiment.fit_model.unwrap_or(FitModelSpec::Augmented) {
            FitModelSpec::Plain => FitModel::Plain,
            FitModelSpec::Augmented => FitModel::Augmented,
        },
        trace_tol: cfg.tolerances.trace.0,
        ..RegularityOptions::default()
    }
}

fn regularity(cx: &Ctx, s: &Solved, atlas: Option<&ChartAtlas>) -> Result<RegularityReport, CmdError> {
    let regions = match (s.mask.grid.dim, atlas) {
        (1, _) => FitRegions::Endpoints,
        (_, Some(a)) => FitRegions::Charts(a),
        _ => {
            return Err(ConfigError("domain: boundary fits in 2D need an ellipse domain".into()).into());
        }
    };
    let res = s.residual.unwrap_or(f64::NAN);
    Ok(regularity_report(&s.u, res, s.a, &s.mask, regions, &fit_options(cx.cfg))?)
}

fn beta_checks(r: &mut Report, prefix: &str, rep: &RegularityReport, a: f64, half_width: f64) {
    for f in &rep.beta_hat {
        r.push(Check::within(format!("{prefix}beta_{}", f.region), f.beta_hat, a - half_width, a + half_width));
    }
}

pub fn verify_regularity(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    let p = cfg.symbol(cx.command)?;
    let s = match &cfg.experiment.solution {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| ConfigError(format!("experiment.solution: {path}: {e}")))?;
            let u = read_binary(std::io::BufReader::new(file))?;
            let mask = cfg.mask(cx.command)?;
            if u.grid != mask.grid {
                return Err(ConfigError(format!("experiment.solution: {path} is not on the configured grid")).into());
            }
            Solved {
                a: half_order(&p),
                p,
                mask,
                u,
                residual: None,
            }
        }
        None => solve_configured(cx, p)?,
    };
    let atlas = atlas_for(cx)?;
    let rep = regularity(cx, &s, atlas.as_ref().map(|x| &x.1))?;
    let tol = &cfg.tolerances;
    let mut r = Report::new(format!("boundary regularity of the solution, a = {}", s.a));
    if let Some(res) = s.residual {
        r.push(Check::at_most("solver_residual", res, tol.residual.0));
    }
    beta_checks(&mut r, "", &rep, s.a, tol.beta.0);
    if let Some(exact) = closed_form(cfg, &s.p, s.mask.grid) {
        r.push(Check::at_most("rel_l2_vs_ball_solution", rel_l2(&s.u, &exact)?, tol.l2.0));
        let c = cfg.experiment.rhs.unwrap_or(1.0);
        let want = c * getoor_trace(s.mask.grid.dim, s.a);
        let samples = rep.trace_samples();
        r.push(Check::holds("trace_sampled", !samples.is_empty()));
        let dev = samples.iter().map(|v| (v.re - want).abs() / want.abs()).fold(0.0, f64::max);
        r.push(Check::at_most("trace_max_rel_deviation", dev, tol.trace.0));
    }
    for h in &rep.hoelder_quotients {
        r.note(format!("Hoelder quotient of u/d^a at order {:.4}: {:.6e}", h.alpha, h.quotient));
    }
    for n in &rep.notes {
        r.note(n.clone());
    }
    cx.out.data("exponents.csv", |w| rep.write_exponent_csv(w))?;
    cx.out.data("hoelder.csv", |w| {
        writeln!(w, "alpha,quotient")?;
        for h in &rep.hoelder_quotients {
            writeln!(w, "{},{:.12e}", h.alpha, h.quotient)?;
        }
        Ok(())
    })?;
    if let Some(t) = &rep.trace {
        cx.out.data("trace.csv", |w| {
            writeln!(w, "x1,x2,value,spread,flagged")?;
            for s in &t.samples {
                let x2 = s.point.get(1).copied().unwrap_or(0.0);
                writeln!(w, "{:.12e},{x2:.12e},{:.12e},{:.12e},{}", s.point[0], s.value.re, s.spread, s.flagged)?;
            }
            Ok(())
        })?;
    }
    cx.out.data("solution.csv", |w| write_solution_csv(&s.u, s.a, &s.mask, w))?;
    cx.out.report("verify_regularity", r);
    Ok(())
}

pub fn universality(cx: &mut Ctx) -> Result<(), CmdError> {
    let cfg = cx.cfg;
    require_dim(cfg, &[1], cx.command)?;
    let base = cfg.symbol(cx.command)?;
    let a = half_order(&base);
    let specs = match &cfg.experiment.symbols {
        Some(v) => v.clone(),
        None => vec![
            cfg.symbol_spec(cx.command)?.clone(),
            SymbolSpec::named("frac_laplacian", &[("a", a)]),
        ],
    };
    let n = cfg.grid.nodes;
    let sizes = cfg.experiment.sizes.clone().unwrap_or_else(|| vec![n / 2, n]);
    let tol = &cfg.tolerances;
    let mut r = Report::new(format!("symbol independence of the boundary exponent, a = {a}"));
    let mut fit_rows = Vec::new();
    let mut hoelder_rows = Vec::new();
    for spec in &specs {
        let label = spec.label();
        let p = spec.build(1).map_err(|e| ConfigError(format!("experiment.symbols: {e}")))?;
        if (half_order(&p) - a).abs() > 1e-12 {
            return Err(ConfigError(format!("experiment.symbols: {label} has order {} but the base symbol {}", p.order, base.order)).into());
        }
        let mut records = Vec::new();
        let mut last = None;
        for &size in &sizes {
            let mut g = cfg.grid.clone();
            g.nodes = size;
            let mask = DomainMask::new(g.torus()?, cfg.domain_spec(cx.command)?.kind())
                .map_err(|e| ConfigError(format!("domain: {e}")))?;
            let sys = assemble(&p, &mask, &AssembleOptions::default())?;
            let sol = solve(&sys, &GridFunction::from_real_fn(mask.grid, |_| cfg.experiment.rhs.unwrap_or(1.0)))?;
            let s = Solved {
                p: p.clone(),
                a,
                mask,
                u: sol.u,
                residual: Some(sol.residual),
            };
            let rep = regularity(cx, &s, None)?;
            for f in &rep.beta_hat {
                fit_rows.push((label.clone(), size, f.clone()));
            }
            for h in &rep.hoelder_quotients {
                hoelder_rows.push((label.clone(), size, h.alpha, h.quotient));
            }
            r.push(Check::at_most(format!("{label}_N{size}_solver_residual"), sol.residual, tol.residual.0));
            records.push(RefinementRecord::from_report(size, &rep));
            last = Some(rep);
        }
        if let Some(rep) = last {
            beta_checks(&mut r, &format!("{label}_"), &rep, a, tol.beta.0);
        }
        for (k, growth) in hoelder_growth(&records).iter().enumerate() {
            if let Some(g) = growth.last() {
                r.push(Check::at_most(format!("{label}_hoelder_growth_{}_to_{}", sizes[k], sizes[k + 1]), *g, tol.hoelder_growth.0));
            }
        }
    }
    cx.out.data("universality.csv", |w| {
        writeln!(w, "symbol,N,region,beta_hat,ci_low,ci_high")?;
        for (label, size, f) in &fit_rows {
            writeln!(w, "{label},{size},{},{:.12e},{:.12e},{:.12e}", f.region, f.beta_hat, f.ci_low, f.ci_high)?;
        }
        Ok(())
    })?;
    cx.out.data("hoelder.csv", |w| {
        writeln!(w, "symbol,N,alpha,quotient")?;
        for (label, size, alpha, q) in &hoelder_rows {
            writeln!(w, "{label},{size},{alpha},{q:.12e}")?;
        }
        Ok(())
    })?;
    cx.out.report("universality", r);
    Ok(())
}
