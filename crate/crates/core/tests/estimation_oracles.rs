//! Independent oracles for the deconvolution stages: exact noiseless
//! recovery, per-block dense-solver equivalence, noise-variance bookkeeping,
//! and the delay-power profile.

use beamsel_core::airlink::{draw_paths, noise_free_observation, steering_vector};
use beamsel_core::dsp::{CirculantSpec, DspError};
use beamsel_core::estimation::{
    deconv_block_avg, deconv_full, power_profile, ObservationKind, ObservationTensor,
};
use beamsel_core::sounding::{gen_training, synthesize_rx, TrainingMode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense complex Gaussian elimination with partial pivoting (independent of
/// the FFT solver under test).
fn dense_solve(mut m: Vec<Vec<Complex64>>, mut rhs: Vec<Complex64>) -> Vec<Complex64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        assert!(m[col][col].norm() > 1e-12, "oracle matrix is singular");
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
            let v = rhs[col];
            rhs[row] -= factor * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for col in row + 1..n {
            acc -= m[row][col] * x[col];
        }
        x[row] = acc / m[row][row];
    }
    x
}

fn circulant_matrix(c: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = c.len();
    (0..n)
        .map(|i| (0..n).map(|j| c[(n + i - j) % n]).collect())
        .collect()
}

// 1. Noiseless full-length deconvolution recovers the noise-free
//    observation exactly: path taps to 1e-10 relative, all other taps zero.
#[test]
fn noiseless_full_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (taps, total) = (16usize, 64usize);
    let paths = draw_paths(&mut rng, 4, taps).unwrap();
    let w = steering_vector(0.5, 8);
    let f = steering_vector(-0.4, 8);
    let rho = 4.0;
    let training = gen_training(total, 1, TrainingMode::Full, 1).unwrap();
    let rx = synthesize_rx(&paths, &w, &f, &training, rho, 0.0, &mut rng);
    let y = deconv_full(&training, &rx).unwrap();
    let expect = noise_free_observation(&paths, &w, &f, rho, total);
    let scale: f64 = expect.energy().sqrt();
    for l in 0..total {
        assert!(
            (y[l] - expect[l]).norm() <= 1e-10 * scale,
            "tap {l}: {} vs {}",
            y[l],
            expect[l]
        );
    }
    for l in taps..total {
        assert!(y[l].norm() <= 1e-10 * scale, "tail tap {l} not clean");
    }
}

// 2. Noiseless block-averaged deconvolution recovers the same coupled taps
//    over one block length.
#[test]
fn noiseless_block_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (block, periods) = (16usize, 8usize);
    let paths = draw_paths(&mut rng, 4, block).unwrap();
    let w = steering_vector(-0.1, 8);
    let f = steering_vector(0.9, 8);
    let rho = 2.25;
    let training = gen_training(block, periods, TrainingMode::Periodic, 1).unwrap();
    let rx = synthesize_rx(&paths, &w, &f, &training, rho, 0.0, &mut rng);
    let y = deconv_block_avg(&training, &rx).unwrap();
    assert_eq!(y.len(), block);
    let expect = noise_free_observation(&paths, &w, &f, rho, block);
    let scale: f64 = expect.energy().sqrt();
    for l in 0..block {
        assert!(
            (y[l] - expect[l]).norm() <= 1e-10 * scale,
            "tap {l}: {} vs {}",
            y[l],
            expect[l]
        );
    }
}

// 3. Block-averaged deconvolution equals the average of per-block dense
//    solves on noisy data: averaging blocks then solving once is the same
//    linear map as solving every block then averaging.
#[test]
fn block_average_matches_per_block_dense_solves() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let (block, periods) = (8usize, 4usize);
    let paths = draw_paths(&mut rng, 3, block).unwrap();
    let w = steering_vector(0.3, 4);
    let f = steering_vector(0.6, 4);
    let training = gen_training(block, periods, TrainingMode::Periodic, 3).unwrap();
    let rx = synthesize_rx(&paths, &w, &f, &training, 5.0, 0.7, &mut rng);

    let fast = deconv_block_avg(&training, &rx).unwrap();

    let gen: Vec<Complex64> = training.samples().as_slice()[..block].to_vec();
    let mut avg = vec![Complex64::new(0.0, 0.0); block];
    for m in 0..periods {
        let chunk = rx.as_slice()[m * block..(m + 1) * block].to_vec();
        let solved = dense_solve(circulant_matrix(&gen), chunk);
        for (a, v) in avg.iter_mut().zip(&solved) {
            *a += v / periods as f64;
        }
    }
    for l in 0..block {
        assert!(
            (fast[l] - avg[l]).norm() < 1e-10,
            "tap {l}: {} vs {}",
            fast[l],
            avg[l]
        );
    }
}

// 4. Unitary noise bookkeeping, full mode: deconvolving pure noise leaves
//    per-tap variance at the receiver value (within 3%).
#[test]
fn full_deconv_preserves_noise_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let total = 64usize;
    let paths = draw_paths(&mut rng, 2, total).unwrap();
    let w = steering_vector(0.2, 4);
    let f = steering_vector(0.2, 4);
    let training = gen_training(total, 1, TrainingMode::Full, 1).unwrap();
    let noise_var = 0.9;
    let mut acc = 0.0;
    let mut count = 0usize;
    for _ in 0..400 {
        let rx = synthesize_rx(&paths, &w, &f, &training, 0.0, noise_var, &mut rng);
        let y = deconv_full(&training, &rx).unwrap();
        acc += y.energy();
        count += y.len();
    }
    let measured = acc / count as f64;
    assert!(
        (measured - noise_var).abs() / noise_var < 0.03,
        "variance {measured} vs {noise_var}"
    );
}

// 5. Averaged noise bookkeeping, periodic mode: per-tap variance drops to
//    the receiver value divided by the period count (within 5%).
#[test]
fn block_average_divides_noise_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let (block, periods) = (16usize, 8usize);
    let paths = draw_paths(&mut rng, 2, block).unwrap();
    let w = steering_vector(0.2, 4);
    let f = steering_vector(0.2, 4);
    let training = gen_training(block, periods, TrainingMode::Periodic, 1).unwrap();
    let noise_var = 1.2;
    let expected = noise_var / periods as f64;
    let mut acc = 0.0;
    let mut count = 0usize;
    for _ in 0..500 {
        let rx = synthesize_rx(&paths, &w, &f, &training, 0.0, noise_var, &mut rng);
        let y = deconv_block_avg(&training, &rx).unwrap();
        acc += y.energy();
        count += y.len();
    }
    let measured = acc / count as f64;
    assert!(
        (measured - expected).abs() / expected < 0.05,
        "variance {measured} vs {expected}"
    );
}

// 6. The delay-power profile matches an explicit triple loop over receive
//    beams, transmit beams, and taps.
#[test]
fn profile_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let (n_rx, n_tx, len) = (3usize, 4usize, 5usize);
    let mut tensor = ObservationTensor::new(ObservationKind::Refined, n_rx, n_tx, len, 0.1);
    for iw in 0..n_rx {
        for jf in 0..n_tx {
            let row: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            tensor.set_row(iw, jf, &row);
        }
    }
    let fast = power_profile(&tensor);
    for l in 0..len {
        let mut slow = 0.0;
        for iw in 0..n_rx {
            for jf in 0..n_tx {
                slow += tensor.row(iw, jf)[l].norm_sqr();
            }
        }
        assert!((fast[l] - slow).abs() < 1e-12, "tap {l}");
    }
}

// 7. A full-length circulant built from tiled periodic training is singular
//    (its spectrum vanishes off the period harmonics), which is why the
//    full-length solver refuses periodic training by type and the periodic
//    path solves at block length instead.
#[test]
fn tiled_training_full_circulant_is_singular() {
    let training = gen_training(8, 4, TrainingMode::Periodic, 1).unwrap();
    let spec = CirculantSpec::new(training.samples().clone());
    match spec.check_invertible() {
        Err(DspError::SingularSpectrum { bin, .. }) => {
            // The first dead bin is the first non-multiple of the period
            // count.
            assert_eq!(bin, 1);
        }
        other => panic!("expected a singular spectrum, got {other:?}"),
    }
}
