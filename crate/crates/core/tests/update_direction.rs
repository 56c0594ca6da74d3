//! Adam's first step moves every parameter by `lr` against the sign of its
//! gradient, so comparing that step with finite differences of the losses
//! checks the chain rule and sign conventions of both updates.

use qgan::engine::{losses, Qgan, QganState, TargetState};
use qgan::harness::sample_target;
use qgan::{AdamConfig, ParameterVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

fn state(qgan: &Qgan, n: usize, seed: u64) -> QganState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = sample_target(n, &mut rng).unwrap();
    let g = qgan.generator().random_parameters(&mut rng);
    let d = qgan.discriminator().random_parameters(&mut rng);
    qgan.init_state(target, g, d, AdamConfig::default()).unwrap()
}

fn loss_at(qgan: &Qgan, s: &QganState, generator: bool) -> f64 {
    let (r, f) = qgan.d_values(s).unwrap();
    let l = losses(r, f);
    if generator {
        l.gen
    } else {
        l.disc
    }
}

fn check(n: usize, seed: u64, generator: bool) {
    let qgan = Qgan::new(n).unwrap();
    let s = state(&qgan, n, seed);
    let (next, _) = if generator {
        qgan.generator_update(&s)
    } else {
        qgan.discriminator_update(&s)
    }
    .unwrap();
    let (before, after) = if generator {
        (&s.gen_params, &next.gen_params)
    } else {
        (&s.disc_params, &next.disc_params)
    };
    let lr = AdamConfig::default().lr;
    for j in 0..before.len() {
        let shifted = |delta: f64| {
            let mut p = before.to_vec();
            p[j] += delta;
            let mut t = s.clone();
            let p = ParameterVector::new(p).unwrap();
            if generator {
                t.gen_params = p;
            } else {
                t.disc_params = p;
            }
            loss_at(&qgan, &t, generator)
        };
        let slope = (shifted(H) - shifted(-H)) / (2.0 * H);
        let step = after[j] - before[j];
        if slope.abs() > 1e-6 {
            // |step| = lr·|g|/(|g| + ε), a hair below lr.
            let expected = -lr * slope.signum() * slope.abs() / (slope.abs() + 1e-8);
            assert!(
                (step - expected).abs() < 1e-9,
                "n={n} seed={seed} param {j}: step {step}, slope {slope}"
            );
        } else {
            assert!(step.abs() <= lr * (1.0 + 1e-9));
        }
    }
}

#[test]
fn generator_steps_follow_the_loss_gradient() {
    for n in 1..=3 {
        for seed in 0..5 {
            check(n, seed, true);
        }
    }
}

#[test]
fn discriminator_steps_follow_the_loss_gradient() {
    for n in 1..=3 {
        for seed in 0..5 {
            check(n, seed, false);
        }
    }
}

#[test]
fn perfect_generator_leaves_discriminator_at_chance() {
    // A one-qubit generator can prepare |1⟩ exactly: U(π, 0, 0).
    let qgan = Qgan::new(1).unwrap();
    let target = TargetState::new(qgan::Statevector::basis(1, 1).unwrap());
    let g = ParameterVector::new(vec![std::f64::consts::PI, 0.0, 0.0]).unwrap();
    let d = qgan
        .discriminator()
        .random_parameters(&mut ChaCha8Rng::seed_from_u64(1));
    let s = qgan.init_state(target, g, d, AdamConfig::default()).unwrap();
    let (r, f) = qgan.d_values(&s).unwrap();
    assert!((r - f).abs() < 1e-12);
    assert!(qgan.kl(&s).unwrap() < 1e-20);
    let l = losses(0.5, 0.5);
    assert!((l.disc - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
}
