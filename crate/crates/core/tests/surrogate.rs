use gasrotor_core::design::{evaluate_oracle, reference_design, Design, OracleSettings};
use gasrotor_core::dynamics::{ModeId, ModeStabilityResult};
use gasrotor_core::fluid::FluidRegistry;
use gasrotor_core::rotor::{Layer, Rotor, RotorElement};
use gasrotor_core::surrogate::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn gradient_check(loss: Loss, head: Head, targets: impl Fn(&[f64]) -> f64) {
    let spec = MlpSpec::new(3, &[3], Activation::Tanh, head);
    assert_eq!(spec.parameter_count(), 16);
    let net = Mlp::random(spec.clone(), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    let rows = uniform_rows(8, 3, 12);
    let xs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let ys: Vec<f64> = rows.iter().map(|r| targets(r)).collect();
    let ws = vec![1.0, 2.0, 0.5, 1.0, 1.5, 1.0, 0.25, 1.0];
    let (_, analytic) = net.loss_and_gradient(&xs, &ys, &ws, loss).unwrap();
    let h = 1e-6;
    for (i, &g) in analytic.iter().enumerate() {
        let at = |delta: f64| {
            let mut p = net.parameters().to_vec();
            p[i] += delta;
            Mlp::from_parameters(spec.clone(), p).unwrap().loss(&xs, &ys, &ws, loss).unwrap()
        };
        let numeric = (at(h) - at(-h)) / (2.0 * h);
        let scale = g.abs().max(numeric.abs()).max(1e-3);
        assert!((g - numeric).abs() <= 1e-5 * scale, "param {i}: analytic {g}, numeric {numeric}");
    }
}

#[test]
fn gradient_matches_finite_differences_cross_entropy() {
    gradient_check(Loss::CrossEntropy, Head::Logistic, |r| if r[0] + 0.5 * r[1] > 0.0 { 1.0 } else { 0.0 });
}

#[test]
fn gradient_matches_finite_differences_mean_squared() {
    gradient_check(Loss::MeanSquared, Head::Identity, |r| r[0] * r[1] - r[2]);
}

proptest! {
    #[test]
    fn normalized_training_features_are_standard(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..60)
    ) {
        let n = Normalizer::fit(&rows);
        let z: Vec<Vec<f64>> = rows.iter().map(|r| n.apply(r)).collect();
        for j in 0..4 {
            let col: Vec<f64> = z.iter().map(|r| r[j]).collect();
            let (mean, std) = ensemble_stats(&col);
            prop_assert!(mean.abs() <= 1e-9);
            let constant = rows.iter().all(|r| r[j] == rows[0][j]);
            if !constant {
                prop_assert!((std - 1.0).abs() <= 1e-9, "std {std}");
            }
        }
    }
}

fn constant_block(task: Task, output: f64) -> EnsembleBlock {
    let spec = MlpSpec::new(FEATURE_COUNT, &[2], Activation::Tanh, task.head());
    let mut net = Mlp::zeros(spec).unwrap();
    let bias = if task.is_classifier() { (output / (1.0 - output)).ln() } else { task.warp(output) };
    *net.parameters_mut().last_mut().unwrap() = bias;
    EnsembleBlock::new(task, Normalizer::identity(FEATURE_COUNT), TargetScaling::IDENTITY, vec![net; ENSEMBLE_SIZE])
        .unwrap()
}

fn constant_pipeline(excited: f64, stable: f64, wsr: f64, logdec: f64) -> ModePipeline {
    ModePipeline {
        excited: constant_block(Task::ExcitedClf, excited),
        stable: constant_block(Task::StableClf, stable),
        wsr: constant_block(Task::WsrReg, wsr),
        logdec: constant_block(Task::LogdecReg, logdec),
    }
}

#[test]
fn identical_members_have_zero_spread() {
    let block = constant_block(Task::WsrReg, 0.37);
    let (mean, spread) = block.predict(&[0.1; FEATURE_COUNT]).unwrap();
    assert!((mean - 0.37).abs() < 1e-15);
    assert_eq!(spread, 0.0);
}

#[test]
fn gate_below_threshold_drops_downstream_outputs() {
    let p = constant_pipeline(0.3, 0.9, 0.45, 0.2);
    let r = predict_mode(&p, ModeId::ConicalForward, &Thresholds::default(), &[0.0; FEATURE_COUNT]).unwrap();
    assert!((r.excited_probability.mean - 0.3).abs() < 1e-12);
    assert_eq!(r.result, ModeStabilityResult::not_excited(ModeId::ConicalForward));
    assert!(r.stable_probability.is_none() && r.whirl_speed_ratio.is_none() && r.log_dec.is_none());
}

#[test]
fn gate_above_threshold_reports_regressors() {
    let p = constant_pipeline(0.9, 0.2, 0.45, -0.1);
    let r = predict_mode(&p, ModeId::CylindricalForward, &Thresholds::default(), &[0.0; FEATURE_COUNT]).unwrap();
    assert!(r.result.excited);
    assert_eq!(r.result.stable, Some(false));
    assert!((r.result.whirl_speed_ratio.unwrap() - 0.45).abs() < 1e-12);
    assert!((r.result.log_dec.unwrap() + 0.1).abs() < 1e-12);
}

fn random_block(task: Task, seed: u64) -> EnsembleBlock {
    let spec = MlpSpec::new(FEATURE_COUNT, &[6], Activation::Tanh, task.head());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = (0..ENSEMBLE_SIZE).map(|_| Mlp::random(spec.clone(), &mut rng).unwrap()).collect();
    EnsembleBlock::new(task, Normalizer::identity(FEATURE_COUNT), TargetScaling { mean: 0.5, std: 0.2 }, members).unwrap()
}

fn random_pipeline(seed: u64) -> ModePipeline {
    ModePipeline {
        excited: random_block(Task::ExcitedClf, seed),
        stable: random_block(Task::StableClf, seed + 1),
        wsr: random_block(Task::WsrReg, seed + 2),
        logdec: random_block(Task::LogdecReg, seed + 3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn gate_is_consistent(x in prop::array::uniform11(-4.0f64..4.0)) {
        thread_local!(static PIPELINE: ModePipeline = random_pipeline(5));
        let r = PIPELINE.with(|p| predict_mode(p, ModeId::ConicalBackward, &Thresholds::default(), &x)).unwrap();
        let excited = r.excited_probability.mean >= 0.5;
        prop_assert_eq!(r.result.excited, excited);
        prop_assert_eq!(r.result.whirl_speed_ratio.is_some(), excited);
        prop_assert_eq!(r.result.log_dec.is_some(), excited);
        prop_assert_eq!(r.result.stable.is_some(), excited);
    }
}

fn synthetic(n: usize, seed: u64, target: impl Fn(&[f64]) -> f64) -> BlockData {
    let x = uniform_rows(n, 3, seed);
    let y = x.iter().map(|r| target(r)).collect();
    BlockData { w: vec![1.0; n], x, y }
}

fn sanity_hyper() -> Hyperparameters {
    Hyperparameters { learning_rate: 1e-2, batch_size: 32, max_epochs: 200, patience: 30 }
}

#[test]
fn regressor_learns_linear_target() {
    let f = |r: &[f64]| 3.0 * r[0] + 1.0;
    let (train, val, test) = (synthetic(300, 1, f), synthetic(100, 2, f), synthetic(100, 3, f));
    let spec = MlpSpec::new(3, &[8], Activation::Tanh, Head::Identity);
    let (block, reports) = train_block(Task::WsrReg, &spec, &train, &val, &sanity_hyper(), 7).unwrap();
    assert!(reports.iter().all(|r| r.best_val_loss <= r.initial_val_loss));
    let predicted: Vec<f64> = test.x.iter().map(|x| block.predict(x).unwrap().0).collect();
    let r2 = r_squared(&test.y, &predicted);
    assert!(r2 >= 0.99, "R² {r2}");
}

#[test]
fn classifier_separates_linear_labels() {
    let f = |r: &[f64]| if r[0] - 0.5 * r[1] + 0.2 > 0.0 { 1.0 } else { 0.0 };
    let (train, val, test) = (synthetic(300, 4, f), synthetic(100, 5, f), synthetic(100, 6, f));
    let spec = MlpSpec::new(3, &[8], Activation::Tanh, Head::Logistic);
    let (block, _) = train_block(Task::ExcitedClf, &spec, &train, &val, &sanity_hyper(), 8).unwrap();
    let correct = test.x.iter().zip(&test.y).filter(|(x, &y)| (block.predict(x).unwrap().0 >= 0.5) == (y > 0.5)).count();
    let accuracy = correct as f64 / test.y.len() as f64;
    assert!(accuracy >= 0.98, "accuracy {accuracy}");
}

#[test]
fn seeded_training_is_bit_reproducible() {
    let f = |r: &[f64]| r[0].sin() + r[1] * r[2];
    let (train, val) = (synthetic(200, 9, f), synthetic(60, 10, f));
    let spec = MlpSpec::new(3, &[6, 6], Activation::Tanh, Head::Identity);
    let hyper = Hyperparameters { max_epochs: 20, ..sanity_hyper() };
    let (a, _) = train_block(Task::WsrReg, &spec, &train, &val, &hyper, 3).unwrap();
    let (b, _) = train_block(Task::WsrReg, &spec, &train, &val, &hyper, 3).unwrap();
    for (ma, mb) in a.members().iter().zip(b.members()) {
        let bits = |m: &Mlp| m.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(ma), bits(mb));
    }
    assert_ne!(a.members()[0].parameters(), a.members()[1].parameters());
}

#[test]
fn divergent_training_aborts() {
    let train = BlockData { x: vec![vec![1.0, 0.0, 0.0]; 4], y: vec![f64::NAN; 4], w: vec![1.0; 4] };
    let spec = MlpSpec::new(3, &[2], Activation::Tanh, Head::Identity);
    let err = train_block(Task::WsrReg, &spec, &train, &train.clone(), &sanity_hyper(), 1).unwrap_err();
    assert!(matches!(err, TrainError::Divergence { .. }), "{err:?}");
}

fn toy_fitness(g: &Genome, _seed: u64) -> f64 {
    (g.learning_rate() - 1e-3).powi(2)
}

const TEN_GENERATIONS: usize = 8 + 10 * 7;

#[test]
fn ga_converges_on_toy_fitness() {
    for seed in 0..5 {
        let r = ga_search(&SearchSpace::default(), &GaSettings::default(), TEN_GENERATIONS, seed, toy_fitness).unwrap();
        let lr = r.best.learning_rate();
        assert!((5e-4..=2e-3).contains(&lr), "seed {seed}: lr {lr}");
        assert_eq!(r.best_per_generation.len(), 11);
        assert!(!r.budget_exhausted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn ga_best_fitness_never_increases(seed in any::<u64>(), budget in 8usize..60) {
        let fitness = |g: &Genome, s: u64| {
            let noise = (s % 1000) as f64 * 1e-4;
            (g.width as f64 - 40.0).abs() + g.hidden_layers as f64 + noise
        };
        let r = ga_search(&SearchSpace::default(), &GaSettings::default(), budget, seed, fitness).unwrap();
        prop_assert!(r.best_per_generation.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(r.history.len(), budget);
        let min = r.history.iter().map(|e| e.fitness).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.best_fitness, min);
        prop_assert_eq!(r.budget_exhausted, (budget - 8) % 7 != 0);
    }
}

#[test]
fn ga_single_generation_returns_best_initial() {
    let r = ga_search(&SearchSpace::default(), &GaSettings::default(), 8, 21, toy_fitness).unwrap();
    assert_eq!(r.history.len(), 8);
    let best = r.history.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness)).unwrap();
    assert_eq!(r.best, best.genome);
    assert!(!r.budget_exhausted);
}

#[test]
fn ga_is_deterministic() {
    let run = || ga_search(&SearchSpace::default(), &GaSettings::default(), 40, 99, toy_fitness).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn ga_rejects_budget_below_population() {
    let err = ga_search(&SearchSpace::default(), &GaSettings::default(), 7, 0, toy_fitness).unwrap_err();
    assert_eq!(err, GaError::BudgetTooSmall { budget: 7, population: 8 });
}

fn fast_settings() -> OracleSettings {
    OracleSettings { grid_n: 41, ..OracleSettings::default() }
}

#[test]
fn dataset_is_deterministic_and_respects_label_invariant() {
    let ranges = FeatureRanges::default();
    let a = generate_dataset(&ranges, 100, 17, &fast_settings()).unwrap();
    let b = generate_dataset(&ranges, 100, 17, &fast_settings()).unwrap();
    assert_eq!(a.to_csv_bytes(), b.to_csv_bytes());
    assert_eq!(a.samples.len() + a.excluded.len(), 100);
    for s in &a.samples {
        for m in &s.modes {
            assert_eq!(m.whirl_speed_ratio.is_some(), m.excited);
            assert_eq!(m.log_dec.is_some(), m.excited);
            assert_eq!(m.stable.is_some(), m.excited);
        }
    }
    let back = TrainingDataset::read_csv(a.to_csv_bytes().as_slice()).unwrap();
    assert_eq!(back.to_csv_bytes(), a.to_csv_bytes());
    assert_eq!(back.samples, a.samples);
}

#[test]
fn dataset_rejects_too_few_samples() {
    let err = generate_dataset(&FeatureRanges::default(), 99, 1, &fast_settings()).unwrap_err();
    assert!(matches!(err, DatasetError::TooFewSamples(99)));
}

#[test]
fn dataset_marginals_are_uniform() {
    let ranges = FeatureRanges::default();
    let labels = |_: &FeatureVector| Ok([ModeStabilityResult::not_excited(ModeId::CylindricalForward); 4]);
    let data = generate_dataset_with(&ranges, 10_000, 5, labels).unwrap();
    for (j, range) in ranges.ranges().iter().enumerate() {
        let u: Vec<f64> = data.samples.iter().map(|s| range.unit(s.features.to_array()[j])).collect();
        let d = ks_uniform(&u);
        assert!(d <= 0.02, "{}: KS {d}", FEATURE_NAMES[j]);
    }
    let splits = [Split::Train, Split::Val, Split::Test].map(|s| data.count(s));
    assert_eq!(splits, [6000, 2000, 2000]);
}

fn air_mu(design: &Design) -> f64 {
    let op = &design.operating;
    FluidRegistry::default().properties(&op.fluid, op.temperature, op.p_a).unwrap().mu
}

#[test]
fn symmetric_rotor_has_centred_bearings() {
    let element = |l: f64| RotorElement::new(l, vec![Layer::with_density(0.0, 0.01, 4500.0)]);
    let rotor = Rotor::new(vec![element(0.01), element(0.03), element(0.01)], Some(0), Some(2), None).unwrap();
    let design = Design { rotor, ..reference_design() };
    let x = featureize(&design, &FluidRegistry::default()).unwrap();
    assert!((x.z1_bar + 0.5).abs() < 1e-12 && (x.z2_bar - 0.5).abs() < 1e-12, "{x:?}");
    assert!((x.polar_ratio - (0.5 * 0.005f64.powi(2)) / (0.25 * 0.005f64.powi(2) + 0.05f64.powi(2) / 12.0)).abs() < 1e-9);
}

#[test]
fn doubling_speed_scales_groups() {
    let base = reference_design();
    let fluids = FluidRegistry::default();
    let a = featureize(&base, &fluids).unwrap();
    let b = featureize(&base.with_speed(2.0 * base.operating.speed_rpm), &fluids).unwrap();
    assert!((b.lambda / a.lambda - 2.0).abs() < 1e-12);
    assert!((b.mass_ratio / a.mass_ratio - 4.0).abs() < 1e-12);
    assert!((b.inertia_ratio / a.inertia_ratio - 4.0).abs() < 1e-12);
    assert_eq!(a.polar_ratio, b.polar_ratio);
}

#[test]
fn reference_compressibility_number() {
    let design = reference_design();
    let x = featureize(&design, &FluidRegistry::default()).unwrap();
    let omega = 50_000.0 * std::f64::consts::PI / 30.0;
    let lambda = 6.0 * air_mu(&design) * omega * (0.005f64 / 1e-5).powi(2) / 1e5;
    assert!((x.lambda / lambda - 1.0).abs() < 1e-12);
    assert_eq!((x.alpha, x.gamma, x.depth_ratio, x.length_ratio), (0.5, 0.8, 2.0, 1.0));
    assert!((x.beta_over_pi - 2.44 / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn reference_feature_vector_is_frozen() {
    let x = featureize(&reference_design(), &FluidRegistry::default()).unwrap().to_array();
    let frozen = [
        0.5,
        2.44 / std::f64::consts::PI,
        0.8,
        2.0,
        1.0,
        FROZEN_LAMBDA,
        FROZEN_MASS,
        FROZEN_INERTIA,
        FROZEN_POLAR,
        FROZEN_Z1,
        FROZEN_Z1 + 1.0,
    ];
    for (j, (v, f)) in x.iter().zip(frozen).enumerate() {
        assert!((v - f).abs() <= 1e-6 * f.abs().max(1e-3), "{}: {v} vs {f}", FEATURE_NAMES[j]);
    }
}

const FROZEN_LAMBDA: f64 = 1.424_179_862_975_6;
const FROZEN_MASS: f64 = 0.368_509_598_345_363;
const FROZEN_INERTIA: f64 = 0.070_102_949_555_408_6;
const FROZEN_POLAR: f64 = 0.072_774_967_810_516_2;
const FROZEN_Z1: f64 = -0.347_218_009_803_25;

#[test]
fn canonical_design_reproduces_dimensional_oracle() {
    let design = reference_design();
    let settings = OracleSettings::default();
    let direct = evaluate_oracle(&design, &FluidRegistry::default(), &settings).unwrap().modes;
    let x = featureize(&design, &FluidRegistry::default()).unwrap();
    let canonical = x.oracle_modes(&settings).unwrap();
    for (d, c) in direct.iter().zip(&canonical) {
        assert_eq!(d.excited, c.excited, "{d:?} vs {c:?}");
        assert_eq!(d.stable, c.stable);
        if let (Some(a), Some(b)) = (d.whirl_speed_ratio, c.whirl_speed_ratio) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        if let (Some(a), Some(b)) = (d.log_dec, c.log_dec) {
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

fn tiny_model() -> SurrogateModel {
    let ranges = FeatureRanges::default();
    let data = generate_dataset(&ranges, 150, 3, &fast_settings()).unwrap();
    let block = BlockConfig {
        hidden: vec![4],
        activation: Activation::Tanh,
        hyper: Hyperparameters { max_epochs: 3, ..Hyperparameters::default() },
    };
    let config = TrainingConfig { classifier: block.clone(), regressor: block, ..TrainingConfig::default() };
    train_surrogate(&data, &config, &ranges, 1).unwrap().0
}

#[test]
fn model_file_round_trip_is_exact() {
    let model = tiny_model();
    let bytes = model_to_bytes(&model);
    let loaded = model_from_bytes(&bytes).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(model_to_bytes(&loaded), bytes);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    save_model(&model, &path).unwrap();
    let from_disk = load_model(&path).unwrap();
    save_model(&from_disk, &dir.path().join("again.bin")).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(dir.path().join("again.bin")).unwrap());

    let ranges = FeatureRanges::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for u in latin_hypercube::<10, _>(100, &mut rng) {
        let x = ranges.at(&u);
        assert_eq!(model.predict(&x).unwrap(), from_disk.predict(&x).unwrap());
    }
}

#[test]
fn model_file_detects_damage() {
    let bytes = model_to_bytes(&tiny_model());
    let mut flipped = bytes.clone();
    let last = flipped.len() - 1;
    flipped[last] ^= 0x01;
    assert!(matches!(model_from_bytes(&flipped), Err(ModelFileError::DigestMismatch)));
    assert!(matches!(model_from_bytes(&bytes[..bytes.len() - 10]), Err(ModelFileError::Truncated)));
    assert!(matches!(model_from_bytes(&bytes[..20]), Err(ModelFileError::Truncated)));
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(matches!(model_from_bytes(&magic), Err(ModelFileError::BadMagic)));
    let mut version = bytes.clone();
    version[4] = 9;
    assert!(matches!(model_from_bytes(&version), Err(ModelFileError::VersionMismatch { found: 9, expected: 1 })));
}
