//! Independent oracles for the array and channel model: direct per-element
//! steering evaluation, dense matrix-product observations, statistical
//! checks on channel draws.

use beamsel_core::airlink::{
    build_codebook, draw_paths, energy_noise_free, noise_free_observation, steering_vector,
    PathSet,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

// 1. Steering entries match an element-by-element evaluation of
//    (1/sqrt(N)) * exp(+j * pi * k * sin(angle)) at random angles.
#[test]
fn steering_matches_elementwise_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1usize, 2, 7, 32] {
        for _ in 0..10 {
            let angle = rng.gen_range(-PI / 2.0..=PI / 2.0);
            let v = steering_vector(angle, n);
            let amp = 1.0 / (n as f64).sqrt();
            for (k, entry) in v.iter().enumerate() {
                let phase = PI * k as f64 * angle.sin();
                let expect = Complex64::new(amp * phase.cos(), amp * phase.sin());
                assert!(
                    (entry - expect).norm() < 1e-13,
                    "n {n}, angle {angle}, element {k}"
                );
            }
        }
    }
}

// 2. The shipped 32-beam codebook over 32 antennas is an orthonormal basis:
//    its Gram matrix is the identity to 1e-10.
#[test]
fn square_codebook_is_orthonormal() {
    let book = build_codebook(32, 32);
    for i in 0..32 {
        for j in 0..32 {
            let dot: Complex64 = book
                .beam(i)
                .iter()
                .zip(book.beam(j))
                .map(|(a, b)| a.conj() * b)
                .sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!(
                (dot.norm() - expect).abs() < 1e-10,
                "beams {i},{j}: |dot| = {}",
                dot.norm()
            );
        }
    }
}

// 3. Dense oracle: build the per-tap channel matrices
//    H[l] = sum_p alpha_p * a_rx(aoa_p) * a_tx(aod_p)^H at delay l_p and
//    compare sqrt(rho) * w^H H[l] f against the noise-free observation.
#[test]
fn observation_matches_dense_channel_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (n_r, n_t, taps, rho) = (8usize, 8usize, 16usize, 2.7f64);
    let paths = draw_paths(&mut rng, 4, taps).unwrap();

    // Dense per-tap matrices.
    let mut h = vec![vec![vec![Complex64::new(0.0, 0.0); n_t]; n_r]; taps];
    for p in paths.iter() {
        let a_rx = steering_vector(p.aoa, n_r);
        let a_tx = steering_vector(p.aod, n_t);
        for r in 0..n_r {
            for t in 0..n_t {
                h[p.delay][r][t] += p.gain * a_rx[r] * a_tx[t].conj();
            }
        }
    }

    let book_rx = build_codebook(8, n_r);
    let book_tx = build_codebook(8, n_t);
    for iw in [0usize, 3, 7] {
        for jf in [1usize, 4, 6] {
            let w = book_rx.beam(iw);
            let f = book_tx.beam(jf);
            let obs = noise_free_observation(&paths, w, f, rho, taps);
            for (l, h_l) in h.iter().enumerate() {
                // w^H H[l] f by direct summation.
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n_r {
                    for t in 0..n_t {
                        acc += w[r].conj() * h_l[r][t] * f[t];
                    }
                }
                let expect = rho.sqrt() * acc;
                assert!(
                    (obs[l] - expect).norm() < 1e-12,
                    "pair ({iw},{jf}), tap {l}: {} vs {expect}",
                    obs[l]
                );
            }
        }
    }
}

// 4. Scale equivariance: observations scale with sqrt(rho), energies with
//    rho.
#[test]
fn power_scale_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let paths = draw_paths(&mut rng, 5, 32).unwrap();
    let w = steering_vector(0.3, 16);
    let f = steering_vector(-0.8, 16);
    let obs1 = noise_free_observation(&paths, &w, &f, 1.0, 32);
    let obs9 = noise_free_observation(&paths, &w, &f, 9.0, 32);
    for (a, b) in obs1.iter().zip(obs9.iter()) {
        assert!((b - a * 3.0).norm() < 1e-12);
    }
    let e1 = energy_noise_free(&paths, &w, &f, 1.0);
    let e9 = energy_noise_free(&paths, &w, &f, 9.0);
    assert!((e9 - 9.0 * e1).abs() < 1e-12 * e9.max(1e-30));
}

// 5. Energy identity: the noise-free energy equals the observation's summed
//    squared magnitudes (distinct delays make the cross terms vanish).
#[test]
fn energy_equals_observation_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..10 {
        let paths = draw_paths(&mut rng, 6, 64).unwrap();
        let w = steering_vector(rng.gen_range(-1.5..1.5), 16);
        let f = steering_vector(rng.gen_range(-1.5..1.5), 16);
        let obs = noise_free_observation(&paths, &w, &f, 4.0, 64);
        let direct = energy_noise_free(&paths, &w, &f, 4.0);
        assert!(
            (obs.energy() - direct).abs() < 1e-12 * direct.max(1e-30),
            "{} vs {direct}",
            obs.energy()
        );
    }
}

// 6. Delay draws are marginally uniform over the tap range: over 10^4
//    channel draws the per-tap counts pass a generous chi-square bound, no
//    tap is ever out of range, and every tap is hit. (Within one draw the
//    taps are sampled without replacement, which only shrinks the statistic's
//    spread, so the multinomial bound stays valid.)
#[test]
fn delay_marginals_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (p, taps, draws) = (10usize, 128usize, 10_000usize);
    let mut counts = vec![0u64; taps];
    for _ in 0..draws {
        let paths = draw_paths(&mut rng, p, taps).unwrap();
        for &d in paths.delays() {
            assert!(d < taps);
            counts[d] += 1;
        }
    }
    let expected = (draws * p) as f64 / taps as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    // 127 degrees of freedom: mean 127, sd ~16; a gross range bug (for
    // example an excluded tap) would add ~780 on its own.
    assert!(chi2 < 220.0, "chi-square statistic {chi2}");
    assert!(counts.iter().all(|&c| c > 0), "some tap never drawn");
}

// 7. Gain normalization holds for every draw, and gains stay within the
//    jittered-equal band: each alpha^2 lies in [0.75, 1.25] / (sum of draws).
#[test]
fn gain_power_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for _ in 0..200 {
        let paths = draw_paths(&mut rng, 10, 128).unwrap();
        let total: f64 = paths.gains().iter().map(|g| g * g).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for g in paths.gains() {
            let p = g * g;
            // Ten raw powers each in [0.75, 1.25] sum to [7.5, 12.5], so a
            // normalized power can range [0.75/12.5, 1.25/7.5] = [0.06, 1/6].
            assert!((0.06..=0.1667).contains(&p), "normalized power {p}");
        }
    }
}

// 8. Serialization of a path set uses the documented parallel-array field
//    names and round-trips exactly.
#[test]
fn path_set_wire_format() {
    let paths = PathSet::new(
        vec![0.6, 0.8],
        vec![3, 7],
        vec![0.25, -0.5],
        vec![1.0, 0.125],
        16,
    )
    .unwrap();
    let text = serde_json::to_string(&paths).unwrap();
    for key in ["\"gains\"", "\"delays\"", "\"aoa\"", "\"aod\""] {
        assert!(text.contains(key), "missing {key} in {text}");
    }
    let back: PathSet = serde_json::from_str(&text).unwrap();
    assert_eq!(back.gains(), paths.gains());
    assert_eq!(back.delays(), paths.delays());
    assert_eq!(back.aoa(), paths.aoa());
    assert_eq!(back.aod(), paths.aod());
}
