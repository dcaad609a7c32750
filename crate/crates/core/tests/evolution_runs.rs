use std::f64::consts::PI;

use westervelt_core::{
    analytic_eigenpairs, block_spectrum, build_dirichlet_laplacian, convergence_study,
    fit_decay_rate, lambda_pair, rayleigh_quotient, simulate, CoefficientField,
    ConvergenceScenario, DecayObservable, Field, FitMethod, Grid, Model, NormKind, NormSpec,
    PhysicalParams, Scheme, SchemeConfig, SparseOperator, StateVector, Termination,
};

const SCHEMES: [Scheme; 2] = [Scheme::SemiImplicitEuler, Scheme::ImexTrapezoid];

fn unit() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0, 1.0).unwrap()
}

fn interval(n: usize) -> (Grid, SparseOperator) {
    let g = Grid::interval(PI, n).unwrap();
    let l = build_dirichlet_laplacian(&g);
    (g, l)
}

fn first_mode(g: &Grid, amplitude: f64) -> StateVector {
    let phi = analytic_eigenpairs(g, 1).unwrap().remove(0).field;
    StateVector::new(phi.scaled(amplitude), Field::zeros(g.len())).unwrap()
}

fn lambda0(g: &Grid, l: &SparseOperator, p: &PhysicalParams) -> f64 {
    let a = CoefficientField::uniform(g.len(), 1.0).unwrap();
    block_spectrum(&a, l, p, 1).unwrap().lambda0
}

#[test]
fn zero_data_stays_exactly_zero() {
    let (g, l) = interval(40);
    let p = unit();
    for scheme in SCHEMES {
        let cfg = SchemeConfig::new(&p, 0.01, 2.0).with_scheme(scheme);
        let traj = simulate(&StateVector::zeros(g.len()), &cfg, &g, &l, &p).unwrap();
        assert!(traj.is_completed());
        for s in &traj.states {
            assert!(s.v1.iter().chain(s.v2.iter()).all(|&x| x == 0.0));
        }
        for r in &traj.records {
            assert_eq!(
                (r.norm_u_w2, r.norm_ut_trace, r.max_abs_u, r.min_coeff_a),
                (0.0, 0.0, 0.0, 1.0)
            );
        }
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let (g, l) = interval(50);
    let p = unit();
    let v0 = StateVector::new(
        g.sample(|x, _| 0.04 * x.sin() + 0.01 * (3.0 * x).sin()),
        g.sample(|x, _| 0.02 * (2.0 * x).sin()),
    )
    .unwrap();
    for scheme in SCHEMES {
        let cfg = SchemeConfig::new(&p, 5e-3, 3.0).with_scheme(scheme);
        let a = simulate(&v0, &cfg, &g, &l, &p).unwrap();
        let b = simulate(&v0, &cfg, &g, &l, &p).unwrap();
        let bits = |t: &westervelt_core::Trajectory| -> Vec<u64> {
            t.states
                .iter()
                .flat_map(|s| {
                    s.v1.iter()
                        .chain(s.v2.iter())
                        .map(|x| x.to_bits())
                        .collect::<Vec<_>>()
                })
                .chain(t.times.iter().map(|x| x.to_bits()))
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a, b);
    }
}

#[test]
fn times_increase_and_completed_runs_stay_below_margin() {
    let (g, l) = interval(40);
    let p = unit();
    let cfg = SchemeConfig::new(&p, 1e-2, 5.0);
    let traj = simulate(&first_mode(&g, 0.2), &cfg, &g, &l, &p).unwrap();
    assert!(traj.is_completed());
    assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    assert!(traj
        .records
        .iter()
        .all(|r| r.max_abs_u < cfg.parabolicity_margin));
}

#[test]
fn small_data_keeps_its_amplitude() {
    let (g, l) = interval(64);
    let p = PhysicalParams::new(1.0, 1.0, 2.0).unwrap();
    let bound = p.parabolicity_bound();
    let shapes: [Box<dyn Fn(f64) -> f64>; 3] = [
        Box::new(|x| x.sin()),
        Box::new(|x| (x * (PI - x)) * 4.0 / (PI * PI)),
        Box::new(|x| 0.7 * x.sin() + 0.3 * (3.0 * x).sin()),
    ];
    for shape in &shapes {
        let u0 = g.sample(|x, _| shape(x));
        let peak = u0.max_abs().1;
        let v0 = StateVector::new(
            u0.scaled(0.1 * bound / peak),
            g.sample(|x, _| 0.01 * x.sin()),
        )
        .unwrap();
        let initial = v0.v1.max_abs().1;
        for scheme in SCHEMES {
            let cfg = SchemeConfig::new(&p, 1e-3, 10.0).with_scheme(scheme);
            let traj = simulate(&v0, &cfg, &g, &l, &p).unwrap();
            assert!(traj.is_completed());
            let worst = traj.records.iter().map(|r| r.max_abs_u).fold(0.0, f64::max);
            assert!(worst <= 1.1 * initial, "{worst} vs {initial}");
        }
    }
}

#[test]
fn linear_first_mode_decays_at_the_modal_rate() {
    let (g, l) = interval(100);
    let p = unit();
    let v0 = first_mode(&g, 1.0);
    let a1 = rayleigh_quotient(&l, &v0.v1);
    let expected = lambda_pair(a1, &p).re_minus;
    for scheme in SCHEMES {
        let cfg = SchemeConfig::new(&p, 1e-3, 20.0)
            .with_scheme(scheme)
            .with_model(Model::Linear);
        let traj = simulate(&v0, &cfg, &g, &l, &p).unwrap();
        let obs = DecayObservable::U {
            spec: NormSpec::new(2.0, NormKind::Lp).unwrap(),
        };
        let fit = fit_decay_rate(&traj, &obs, &g, &l, 0.5, FitMethod::PeakEnvelope).unwrap();
        assert!(
            (fit.omega_hat - expected).abs() <= 0.01 * expected,
            "{scheme:?}: {}",
            fit.omega_hat
        );
    }
}

#[test]
fn nonlinear_small_data_decays_at_least_at_spectral_bound() {
    let (g, l) = interval(100);
    let p = unit();
    let l0 = lambda0(&g, &l, &p);
    for scheme in SCHEMES {
        for amplitude in [1e-4, 1e-3, 1e-2] {
            let cfg = SchemeConfig::new(&p, 2e-3, 30.0).with_scheme(scheme);
            let traj = simulate(&first_mode(&g, amplitude), &cfg, &g, &l, &p).unwrap();
            assert_eq!(traj.status, Termination::Completed);
            let fit = fit_decay_rate(
                &traj,
                &DecayObservable::Combined { p: 2.0 },
                &g,
                &l,
                0.5,
                FitMethod::PeakEnvelope,
            )
            .unwrap();
            assert!(
                fit.omega_hat >= 0.9 * l0,
                "{scheme:?} {amplitude}: {}",
                fit.omega_hat
            );
        }
    }
}

fn scenario<'a>(
    g: &'a Grid,
    l: &'a SparseOperator,
    scheme: Scheme,
    model: Model,
) -> ConvergenceScenario<'a> {
    ConvergenceScenario {
        grid: g,
        lap: l,
        params: unit(),
        scheme,
        model,
        shape: analytic_eigenpairs(g, 1).unwrap().remove(0).field,
        y0: 0.05,
        y1: 0.02,
        t_end: 2.0,
    }
}

#[test]
fn linear_convergence_orders() {
    let (g, l) = interval(60);
    let dts = [0.04, 0.02, 0.01, 0.005];
    for (scheme, lo, hi) in [
        (Scheme::SemiImplicitEuler, 0.9, 1.1),
        (Scheme::ImexTrapezoid, 1.8, 2.2),
    ] {
        let rows = convergence_study(&scenario(&g, &l, scheme, Model::Linear), &dts).unwrap();
        assert!(rows[0].observed_order.is_none());
        for r in &rows[1..] {
            let q = r.observed_order.unwrap();
            assert!((lo..=hi).contains(&q), "{scheme:?}: order {q}");
            // refinement ratio e(2dt)/e(dt) = 2^q
            let ratio = 2f64.powf(q);
            assert!((2f64.powf(lo)..=2f64.powf(hi)).contains(&ratio));
        }
    }
}

#[test]
fn quasilinear_convergence_and_agreement() {
    let (g, l) = interval(60);
    let dts = [0.04, 0.02, 0.01, 0.005];
    let mut finals = Vec::new();
    for (scheme, lo, hi) in [
        (Scheme::SemiImplicitEuler, 0.9, 1.1),
        (Scheme::ImexTrapezoid, 1.8, 2.2),
    ] {
        let sc = scenario(&g, &l, scheme, Model::Quasilinear);
        let rows = convergence_study(&sc, &dts).unwrap();
        for r in &rows[1..] {
            let q = r.observed_order.unwrap();
            assert!((lo..=hi).contains(&q), "{scheme:?}: order {q}");
        }
        let mut cfg = SchemeConfig::new(&sc.params, 1.25e-4, sc.t_end).with_scheme(scheme);
        cfg.record_every = cfg.n_steps();
        let v0 = StateVector::new(sc.shape.scaled(sc.y0), sc.shape.scaled(sc.y1)).unwrap();
        finals.push(
            simulate(&v0, &cfg, &g, &l, &sc.params)
                .unwrap()
                .states
                .pop()
                .unwrap(),
        );
    }
    let diff = finals[0]
        .v1
        .iter()
        .zip(finals[1].v1.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-4, "schemes disagree by {diff}");
}

#[test]
fn over_amplitude_violates_at_start() {
    let (g, l) = interval(40);
    let p = unit();
    let cfg = SchemeConfig::new(&p, 1e-3, 1.0);
    let traj = simulate(&first_mode(&g, 0.6), &cfg, &g, &l, &p).unwrap();
    match traj.status {
        Termination::ParabolicityViolation { t, value, .. } => {
            assert_eq!(t, 0.0);
            assert!(value > 0.5);
        }
        other => panic!("unexpected {other:?}"),
    }
}
