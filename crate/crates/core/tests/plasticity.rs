use approx::assert_relative_eq;
use mtpgd_core::plasticity::{deviator, tensor_norm, yield_eval, StrainHistory};
use mtpgd_core::{history_sweep, trial_and_return, Material, Voigt};
use proptest::prelude::*;

fn steel() -> (Material, nalgebra::Matrix4<f64>) {
    let m = Material::steel();
    (m, m.elastic_matrix())
}

/// Strain producing a pure deviatoric trial stress with the given von Mises value.
fn strain_for_q(mat: &Material, q: f64) -> Voigt {
    // pure shear: q = sqrt(3) * tau, tau = G * gamma
    Voigt::new(0.0, 0.0, 0.0, q / (3f64.sqrt() * mat.shear_modulus()))
}

/// Scalar Newton on the consistency condition, used as an oracle for the
/// closed-form multiplier.
fn newton_multiplier(q_trial: f64, ebar: f64, mat: &Material) -> f64 {
    let g = mat.shear_modulus();
    let mut dl = 0.0;
    for _ in 0..50 {
        let phi = q_trial - 3.0 * g * dl - mat.yield_at(ebar + dl);
        let dphi = -3.0 * g - mat.hardening;
        let step = phi / dphi;
        dl -= step;
        if step.abs() <= 1e-16 * dl.abs().max(1e-300) {
            break;
        }
    }
    dl
}

#[test]
fn sub_yield_step_is_elastic() {
    let (mat, c) = steel();
    let eps = Voigt::new(5e-4, -1.5e-4, 0.0, 0.0);
    let r = trial_and_return(&eps, &Voigt::zeros(), 0.0, &mat, &c).unwrap();
    assert!(yield_eval(&r.sigma, 0.0, &mat).q < 205.0);
    assert_eq!(r.dlambda, 0.0);
    assert_eq!(r.eps_p, Voigt::zeros());
    assert_eq!(r.ebar, 0.0);
    assert_eq!(r.sigma, c * eps);
}

#[test]
fn multiplier_for_q_trial_250() {
    let (mat, c) = steel();
    let eps = strain_for_q(&mat, 250.0);
    assert_relative_eq!(yield_eval(&(c * eps), 0.0, &mat).q, 250.0, max_relative = 1e-13);
    let r = trial_and_return(&eps, &Voigt::zeros(), 0.0, &mat, &c).unwrap();
    let expected = 45.0 / (3.0 * mat.shear_modulus() + 2000.0);
    assert_relative_eq!(r.dlambda, expected, max_relative = 1e-12);
    assert!((r.dlambda - 1.8420e-4).abs() < 1e-8);
    assert_relative_eq!(r.dlambda, newton_multiplier(250.0, 0.0, &mat), max_relative = 1e-12);
}

#[test]
fn unloading_after_yield_is_elastic() {
    let (mat, c) = steel();
    let peak = strain_for_q(&mat, 300.0);
    let r1 = trial_and_return(&peak, &Voigt::zeros(), 0.0, &mat, &c).unwrap();
    assert!(r1.dlambda > 0.0);
    for k in 1..=10 {
        // unload by up to twice the yield stress: still inside the expanded surface
        let eps = peak - strain_for_q(&mat, 40.0 * k as f64);
        let r = trial_and_return(&eps, &r1.eps_p, r1.ebar, &mat, &c).unwrap();
        assert_eq!(r.dlambda, 0.0, "unloading step {k}");
        assert_eq!(r.eps_p, r1.eps_p);
    }
}

#[test]
fn q_zero_with_plastic_demand_is_rejected() {
    let (_, c) = steel();
    let bad = Material { yield_stress: -1.0, ..Material::steel() };
    assert!(trial_and_return(&Voigt::zeros(), &Voigt::zeros(), 0.0, &bad, &c).is_err());
}

#[test]
fn ramp_below_yield_leaves_virgin_state() {
    let (mat, _) = steel();
    let nt = 50;
    let mut h = StrainHistory::zeros(3, nt);
    for gp in 0..3 {
        for t in 0..nt {
            let s = 4e-4 * t as f64 / (nt - 1) as f64 * (gp + 1) as f64 / 3.0;
            h.data[gp * nt + t] = Voigt::new(s, -0.3 * s, 0.0, 0.1 * s);
        }
    }
    let st = history_sweep(&h, &mat, true).unwrap();
    assert!(st.is_virgin());
    assert!(st.eps_p.iter().all(|e| *e == Voigt::zeros()));
}

#[test]
fn non_finite_strain_reports_location() {
    let (mat, _) = steel();
    let mut h = StrainHistory::zeros(2, 5);
    h.data[5 + 3][0] = f64::NAN;
    match history_sweep(&h, &mat, false) {
        Err(mtpgd_core::Error::NonFiniteStrain { gauss_point, time }) => {
            assert_eq!((gauss_point, time), (1, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
}

/// Triangular shear strain path 0 -> +a -> -a -> 0 repeated.
fn shear_path(amplitude: f64, n_cycles: usize, per_cycle: usize) -> Vec<f64> {
    let n = n_cycles * per_cycle;
    (0..=n)
        .map(|i| {
            let s = (i % per_cycle) as f64 / per_cycle as f64;
            let u = if s < 0.25 {
                4.0 * s
            } else if s < 0.75 {
                2.0 - 4.0 * s
            } else {
                4.0 * s - 4.0
            };
            amplitude * u
        })
        .collect()
}

/// Independent 1D integrator. Under pure shear the J2 model reduces to a
/// scalar model with stress `sqrt(3) tau`, strain `gamma / sqrt(3)`,
/// modulus 3G and the same hardening law.
fn scalar_oracle(gammas: &[f64], mat: &Material) -> (Vec<f64>, Vec<f64>) {
    let e3 = 3.0 * mat.shear_modulus();
    let mut ep = 0.0;
    let mut eb = 0.0;
    let mut ebars = vec![0.0];
    let mut stress = vec![0.0];
    for &g in &gammas[1..] {
        let e = g / 3f64.sqrt();
        let trial = e3 * (e - ep);
        let dl = if trial.abs() > mat.yield_at(eb) { newton_multiplier(trial.abs(), eb, mat) } else { 0.0 };
        ep += dl * trial.signum();
        eb += dl;
        ebars.push(eb);
        stress.push(e3 * (e - ep) / 3f64.sqrt());
    }
    (ebars, stress)
}

#[test]
fn cyclic_shear_matches_scalar_oracle() {
    let (mat, _) = steel();
    let gammas = shear_path(6e-3, 10, 80);
    let nt = gammas.len();
    let mut h = StrainHistory::zeros(1, nt);
    for (t, g) in gammas.iter().enumerate() {
        h.data[t] = Voigt::new(0.0, 0.0, 0.0, *g);
    }
    let st = history_sweep(&h, &mat, true).unwrap();
    let sig = st.sigma.as_ref().unwrap();
    let (ebar, tau) = scalar_oracle(&gammas, &mat);
    for t in 0..nt {
        assert_relative_eq!(st.ebar_at(0, t), ebar[t], epsilon = 1e-15, max_relative = 1e-11);
        assert_relative_eq!(sig[t][3], tau[t], epsilon = 1e-9, max_relative = 1e-11);
    }
    // per-cycle increments shrink as the yield surface expands; cycles are
    // counted peak to peak since the first cycle from rest only has a
    // quarter-cycle of virgin loading
    let inc: Vec<f64> = (0..9).map(|c| ebar[(c + 1) * 80 + 20] - ebar[c * 80 + 20]).collect();
    assert!(inc.iter().all(|&d| d > 0.0));
    for w in inc.windows(2) {
        assert!(w[1] <= w[0], "{inc:?}");
    }
}

#[test]
fn holding_the_strain_changes_nothing() {
    // a slower clock that pauses at every sample repeats each strain value;
    // without viscosity the repeated steps only see rounding noise
    let (mat, _) = steel();
    let gammas = shear_path(4e-3, 3, 40);
    let nt = gammas.len();
    let strain = |g: f64| Voigt::new(0.25 * g, -2e-4, 0.0, g);
    let mut fast = StrainHistory::zeros(1, nt);
    let mut slow = StrainHistory::zeros(1, 2 * nt - 1);
    for (t, g) in gammas.iter().enumerate() {
        fast.data[t] = strain(*g);
        slow.data[2 * t] = strain(*g);
        if t > 0 {
            slow.data[2 * t - 1] = strain(*g);
        }
    }
    let a = history_sweep(&fast, &mat, true).unwrap();
    let b = history_sweep(&slow, &mat, true).unwrap();
    assert!(a.ebar_at(0, nt - 1) > 0.0);
    for t in 0..nt {
        assert_relative_eq!(a.ebar_at(0, t), b.ebar_at(0, 2 * t), epsilon = 1e-18, max_relative = 1e-12);
        assert_relative_eq!(a.eps_p_at(0, t), b.eps_p_at(0, 2 * t), epsilon = 1e-18, max_relative = 1e-12);
    }
}

fn voigt_strategy(scale: f64) -> impl Strategy<Value = Voigt> {
    prop::array::uniform4(-scale..scale).prop_map(|a| Voigt::new(a[0], a[1], a[2], a[3]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn return_map_invariants(eps in voigt_strategy(8e-3), ep_dev in voigt_strategy(1e-3), ebar in 0.0..0.05f64) {
        let (mat, c) = steel();
        // previous plastic strain must be deviatoric
        let tr = (ep_dev[0] + ep_dev[1] + ep_dev[2]) / 3.0;
        let ep_old = Voigt::new(ep_dev[0] - tr, ep_dev[1] - tr, ep_dev[2] - tr, ep_dev[3]);
        let r = trial_and_return(&eps, &ep_old, ebar, &mat, &c).unwrap();
        let d = r.eps_p - ep_old;
        prop_assert!((d[0] + d[1] + d[2]).abs() <= 1e-14);
        prop_assert!(r.ebar >= ebar);
        let trial = yield_eval(&(c * (eps - ep_old)), ebar, &mat);
        let post = yield_eval(&r.sigma, r.ebar, &mat);
        prop_assert!(post.q >= 0.0);
        if trial.q > 0.0 {
            prop_assert!((tensor_norm(&trial.n_dir) - 1.5f64.sqrt()).abs() < 1e-12);
        }
        if r.dlambda > 0.0 {
            prop_assert!(post.phi.abs() <= 1e-10 * mat.yield_stress);
            let expect = tensor_norm(&trial.s) - 2.0 * mat.shear_modulus() * r.dlambda * 1.5f64.sqrt();
            prop_assert!((tensor_norm(&deviator(&r.sigma)) - expect).abs() <= 1e-10 * expect);
            prop_assert!((r.dlambda - newton_multiplier(trial.q, ebar, &mat)).abs() <= 1e-12 * r.dlambda);
        } else {
            prop_assert!(trial.phi <= 0.0);
            prop_assert_eq!(r.eps_p, ep_old);
        }
    }

    #[test]
    fn sweep_keeps_hardening_monotone(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (mat, _) = steel();
        let (ng, nt) = (4, 60);
        let mut h = StrainHistory::zeros(ng, nt);
        for gp in 0..ng {
            let mut e = Voigt::zeros();
            for t in 1..nt {
                e += Voigt::from_fn(|_, _| rng.gen_range(-1e-3..1e-3));
                h.data[gp * nt + t] = e;
            }
        }
        let st = history_sweep(&h, &mat, false).unwrap();
        for gp in 0..ng {
            prop_assert_eq!(st.ebar_at(gp, 0), 0.0);
            prop_assert_eq!(*st.eps_p_at(gp, 0), Voigt::zeros());
            for w in st.ebar_history(gp).windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            for t in 0..nt {
                let e = st.eps_p_at(gp, t);
                prop_assert!((e[0] + e[1] + e[2]).abs() <= 1e-14);
            }
        }
    }
}
