use std::f64::consts::PI;

use gasrotor_core::bearing::{DimensionalCoefficients, DynamicSolver, DEFAULT_GRID_N, DEFAULT_PERTURBATION};
use gasrotor_core::design::{evaluate_oracle, oracle_modes, reference_design, OracleSettings};
use gasrotor_core::dynamics::*;
use gasrotor_core::fluid::FluidRegistry;
use gasrotor_core::rotor::{mass_properties, Layer, Rotor, RotorElement};
use num_complex::Complex64;
use proptest::prelude::*;

fn symmetric(omega: f64) -> RigidRotorModel {
    RigidRotorModel::new(0.25, 4e-4, 2e-5, -0.03, 0.03, omega).unwrap()
}

fn oscillatory(pairs: &[EigenPair]) -> Vec<Complex64> {
    pairs.iter().map(|p| p.value).filter(|v| v.im > 0.0).collect()
}

#[test]
fn symmetric_isotropic_natural_frequency() {
    let k = 1e5;
    let c = DimensionalCoefficients::isotropic(k, 0.0);
    let pairs = eigen_at(&symmetric(0.0), &c, &c).unwrap();
    assert_eq!(pairs.len(), 8);
    let omega_n = (2.0 * k / 0.25f64).sqrt();
    assert!((omega_n - 894.427_191).abs() < 1e-6);
    let cylindrical: Vec<_> = oscillatory(&pairs).into_iter().filter(|v| (v.im - omega_n).abs() < 1.0).collect();
    assert_eq!(cylindrical.len(), 2, "{pairs:?}");
    for v in cylindrical {
        assert!((v.im - omega_n).abs() / omega_n < 1e-8, "{v}");
        assert!(v.re.abs() < 1e-8 * omega_n);
    }
}

#[test]
fn symmetric_isotropic_damping() {
    let (k, c, m) = (1e5, 10.0, 0.25);
    let bearing = DimensionalCoefficients::isotropic(k, c);
    let pairs = eigen_at(&symmetric(0.0), &bearing, &bearing).unwrap();
    let omega_n = (2.0 * k / m).sqrt();
    let zeta = 2.0 * c / (2.0 * m * omega_n);
    let expected = 2.0 * PI * zeta / (1.0 - zeta * zeta).sqrt();
    assert!((zeta - 0.0447).abs() < 1e-4);
    assert!((expected - 0.281).abs() < 1e-3);
    let damped = omega_n * (1.0 - zeta * zeta).sqrt();
    let cylindrical: Vec<_> = oscillatory(&pairs).into_iter().filter(|v| (v.im - damped).abs() < 1.0).collect();
    assert_eq!(cylindrical.len(), 2);
    for v in cylindrical {
        assert!((log_decrement(v).unwrap() - expected).abs() < 1e-6);
    }
}

#[test]
fn log_decrement_cases() {
    assert!((log_decrement(Complex64::new(-1.0, 10.0)).unwrap() - 0.6283).abs() < 1e-4);
    assert!((log_decrement(Complex64::new(-1.0, 10.0)).unwrap() - 0.2 * PI).abs() < 1e-6);
    assert!((log_decrement(Complex64::new(1.0, 10.0)).unwrap() + 0.2 * PI).abs() < 1e-6);
    assert_eq!(log_decrement(Complex64::new(0.0, 10.0)), Some(0.0));
    assert_eq!(log_decrement(Complex64::new(-3.0, 0.0)), None);
}

#[test]
fn free_body() {
    let pairs = eigen_at(&symmetric(0.0), &DimensionalCoefficients::ZERO, &DimensionalCoefficients::ZERO).unwrap();
    assert!(pairs.iter().all(|p| p.value == Complex64::new(0.0, 0.0)));
}

#[test]
fn assembled_from_rotor_example() {
    let half = RotorElement::new(0.05, vec![Layer::with_density(0.0, 0.02, 8000.0)]);
    let rotor = Rotor::new(vec![half.clone(), half], Some(0), Some(1), None).unwrap();
    let model = assemble(&mass_properties(&rotor), 1000.0).unwrap();
    let m = model.mass_matrix();
    assert!((m[(0, 0)] - 0.2513).abs() < 5e-5);
    assert_eq!(m[(0, 0)], m[(1, 1)]);
    assert!((model.z1 + 0.025).abs() < 1e-15 && (model.z2 - 0.025).abs() < 1e-15);
    let unassigned = Rotor::new(rotor.elements().to_vec(), None, None, None).unwrap();
    assert_eq!(assemble(&mass_properties(&unassigned), 1.0), Err(DynamicsError::JournalsUnassigned));
}

/// Asymmetric rotor with frequency-independent, cross-coupled bearings.
fn constant_case() -> (RigidRotorModel, DimensionalCoefficients) {
    let model = RigidRotorModel::new(0.05, 2e-5, 4e-6, -0.015, 0.03, 3000.0).unwrap();
    let bearing = DimensionalCoefficients { k: [[2e5, 4e4], [-4e4, 2e5]], c: [[30.0, 0.0], [0.0, 30.0]] };
    (model, bearing)
}

#[test]
fn constant_coefficients_root_is_eigenfrequency() {
    let (model, bearing) = constant_case();
    let grid = nu_grid(0.05, 2.0, 0.01).unwrap();
    let results = intersection_sweep(&model, |_| Ok([bearing, bearing]), &grid).unwrap();
    let direct = whirl_modes(&model, &bearing, &bearing).unwrap();
    for (r, d) in results.iter().zip(direct) {
        let ratio = d.eigenvalue.im / model.omega;
        if (0.05..=2.0).contains(&ratio) {
            assert!(r.excited, "{r:?}");
            assert!((r.whirl_speed_ratio.unwrap() - ratio).abs() < 1e-6, "{r:?} vs {ratio}");
            let delta = log_decrement(d.eigenvalue).unwrap();
            assert!((r.log_dec.unwrap() - delta).abs() < 1e-9);
            assert_eq!(r.stable, Some(delta > 0.0));
        } else {
            assert!(!r.excited);
        }
    }
    assert!(results.iter().any(|r| r.excited));
}

#[test]
fn undamped_modes_are_marginal() {
    let model = RigidRotorModel::new(0.05, 2e-5, 4e-6, -0.015, 0.03, 3000.0).unwrap();
    let bearing = DimensionalCoefficients::isotropic(2e5, 0.0);
    let grid = nu_grid(0.05, 2.0, 0.01).unwrap();
    let results = intersection_sweep(&model, |_| Ok([bearing, bearing]), &grid).unwrap();
    let excited: Vec<_> = results.iter().filter(|r| r.excited).collect();
    assert!(!excited.is_empty());
    for r in excited {
        assert_eq!(r.log_dec, Some(0.0));
        assert_eq!(r.stable, Some(false));
    }
}

#[test]
fn zero_speed_sweep_is_rejected() {
    let (model, bearing) = constant_case();
    let err = intersection_sweep(&model.with_speed(0.0), |_| Ok([bearing, bearing]), &[0.1, 0.2]).unwrap_err();
    assert_eq!(err, DynamicsError::ZeroSpeed);
}

struct ReferenceCase {
    model: RigidRotorModel,
    solver: DynamicSolver,
    scale: (f64, f64, f64, f64, f64),
}

impl ReferenceCase {
    fn new(grid_n: usize) -> Self {
        let d = reference_design();
        let mu = FluidRegistry::default().properties("air", 293.15, 1e5).unwrap().mu;
        let model = assemble(&mass_properties(&d.rotor), d.operating.omega()).unwrap();
        let b = d.bearing;
        let lambda = gasrotor_core::bearing::compressibility_number(mu, model.omega, b.radius(), 1e5, b.h_r);
        let solver = DynamicSolver::new(&b.shape(), lambda, DEFAULT_PERTURBATION, grid_n).unwrap();
        Self { model, solver, scale: (1e5, b.radius(), b.length, b.h_r, model.omega) }
    }

    fn coefficients(&self, nu: f64) -> DimensionalCoefficients {
        let (p_a, r, l, h_r, omega) = self.scale;
        self.solver.coefficients(nu).unwrap().to_dimensional(p_a, r, l, h_r, omega)
    }
}

#[test]
fn reference_mode_tracking_is_continuous() {
    let case = ReferenceCase::new(DEFAULT_GRID_N);
    let grid = NuGrid::default().points().unwrap();
    let modes: Vec<[WhirlMode; 4]> = grid
        .iter()
        .map(|&nu| {
            let c = case.coefficients(nu);
            whirl_modes(&case.model, &c, &c).unwrap()
        })
        .collect();
    for (w, nu) in modes.windows(2).zip(&grid) {
        for k in 0..4 {
            let m = mac(&w[0][k].shape, &w[1][k].shape);
            assert!(m >= 0.9, "mode {k} at nu {nu}: MAC {m}");
            for j in (0..4).filter(|&j| j != k) {
                assert!(mac(&w[0][k].shape, &w[1][j].shape) < m, "mode {k} jumps at nu {nu}");
            }
        }
    }
}

#[test]
fn gyroscopic_splitting_of_conical_modes() {
    let case = ReferenceCase::new(DEFAULT_GRID_N);
    for nu in [0.2, 0.6, 1.0, 1.4, 1.8] {
        let c = case.coefficients(nu);
        let mut previous: Option<(f64, f64)> = None;
        for factor in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let model = RigidRotorModel { i_polar: case.model.i_polar * factor, ..case.model };
            let modes = whirl_modes(&model, &c, &c).unwrap();
            let fwd = modes[ModeId::ConicalForward as usize].eigenvalue.im;
            let bwd = modes[ModeId::ConicalBackward as usize].eigenvalue.im;
            if let Some((f0, b0)) = previous {
                assert!(fwd > f0, "nu {nu} factor {factor}: forward {fwd} <= {f0}");
                assert!(bwd < b0, "nu {nu} factor {factor}: backward {bwd} >= {b0}");
            }
            previous = Some((fwd, bwd));
        }
    }
}

#[test]
fn reference_refinement_consistency() {
    let case = ReferenceCase::new(DEFAULT_GRID_N);
    let run = |step| {
        let grid = nu_grid(0.05, 2.0, step).unwrap();
        intersection_sweep(&case.model, |nu| Ok([case.coefficients(nu); 2]), &grid).unwrap()
    };
    let (coarse, fine) = (run(0.01), run(0.005));
    for (a, b) in coarse.iter().zip(&fine) {
        assert_eq!(a.excited, b.excited);
        if a.excited {
            assert!((a.whirl_speed_ratio.unwrap() - b.whirl_speed_ratio.unwrap()).abs() < 1e-4, "{a:?} {b:?}");
            assert!((a.log_dec.unwrap() - b.log_dec.unwrap()).abs() < 1e-3, "{a:?} {b:?}");
        }
    }
}

#[test]
fn reference_case_frozen() {
    let settings = OracleSettings { grid_n: 401, nu: NuGrid { start: 0.05, stop: 2.0, step: 0.001 }, ..Default::default() };
    let eval = evaluate_oracle(&reference_design(), &FluidRegistry::default(), &settings).unwrap();
    let frozen = [
        (ModeId::CylindricalForward, 0.619_410_156_250_000_2, 0.604_264_648_794_772_5),
        (ModeId::CylindricalBackward, 0.757_011_718_75, 5.219_957_124_404_181),
        (ModeId::ConicalForward, 0.798_076_171_875, 1.853_571_425_417_120_3),
        (ModeId::ConicalBackward, 1.077_806_640_625, 6.401_392_806_418_164),
    ];
    for (r, (mode, nu, delta)) in eval.modes.iter().zip(frozen) {
        assert_eq!(r.mode, mode);
        assert!(r.excited);
        assert!((r.whirl_speed_ratio.unwrap() - nu).abs() < 1e-9, "{r:?}");
        assert!((r.log_dec.unwrap() - delta).abs() < 1e-8, "{r:?}");
        assert_eq!(r.stable, Some(true));
    }
}

#[test]
fn oracle_modes_match_dimensional_path() {
    let d = reference_design();
    let mu = FluidRegistry::default().properties("air", 293.15, 1e5).unwrap().mu;
    let model = assemble(&mass_properties(&d.rotor), d.operating.omega()).unwrap();
    let direct = oracle_modes(&model, &d.bearing, 1e5, mu, &OracleSettings::default()).unwrap();
    let eval = evaluate_oracle(&d, &FluidRegistry::default(), &OracleSettings::default()).unwrap();
    assert_eq!(direct, eval.modes);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn results_respect_excitation_invariants(
        k in 1e4..1e6f64,
        kxy in -0.5..0.5f64,
        c in 0.0..50.0f64,
        z1 in -0.04..-0.005f64,
        z2 in 0.005..0.04f64,
        omega in 500.0..5000.0f64,
    ) {
        let model = RigidRotorModel::new(0.05, 2e-5, 4e-6, z1, z2, omega).unwrap();
        let bearing = DimensionalCoefficients { k: [[k, kxy * k], [-kxy * k, k]], c: [[c, 0.0], [0.0, c]] };
        let grid = nu_grid(0.05, 2.0, 0.02).unwrap();
        match intersection_sweep(&model, |_| Ok([bearing, bearing]), &grid) {
            Ok(results) => {
                for (r, mode) in results.iter().zip(ModeId::ALL) {
                    prop_assert_eq!(r.mode, mode);
                    prop_assert_eq!(r.excited, r.whirl_speed_ratio.is_some());
                    prop_assert_eq!(r.excited, r.log_dec.is_some());
                    prop_assert_eq!(r.excited, r.stable.is_some());
                    if r.excited {
                        prop_assert!(r.whirl_speed_ratio.unwrap() > 0.0);
                        prop_assert_eq!(r.stable.unwrap(), r.log_dec.unwrap() > 0.0);
                    }
                }
            }
            Err(e) => prop_assert!(matches!(e, DynamicsError::TrackingAmbiguity { .. }), "{e}"),
        }
    }
}
