use gaussprg_core::harness::{
    ci_calibration, control_family, exhaustive_independence_test, fooling_gap, GapSeeds, PrgSampler, VectorSampler,
};
use gaussprg_core::poly::from_hermite;
use gaussprg_core::{derive_params, HermiteExpansion, ParamOverrides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[test]
fn exact_uniformity_on_small_fields() {
    for p in [2u64, 3, 5, 7, 11, 13, 17] {
        for t in 1..=3usize {
            let indices: Vec<u64> = (0..p.min(7)).collect();
            let r = exhaustive_independence_test(p, t, t, &indices).unwrap();
            assert!(r.pass, "p={p} t={t}: {:?}", r.first_failure);
            assert_eq!(r.seeds_enumerated, p.pow(t as u32));
        }
    }
}

#[test]
fn under_independence_detected_exhaustively() {
    for p in [5u64, 7, 11] {
        let r = exhaustive_independence_test(p, 1, 2, &[0, 1, 2]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure, Some(vec![0, 1]));
    }
}

#[test]
fn hoeffding_interval_coverage() {
    let coverage = ci_calibration(1000, 2000, 11);
    println!("99% Hoeffding interval coverage over 1000 repetitions: {coverage}");
    assert!(coverage >= 0.99, "coverage {coverage}");
}

#[test]
fn parseval_against_monte_carlo() {
    const N: usize = 100_000;
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for trial in 0..5 {
        let n = 1 + trial % 3;
        let e = HermiteExpansion::random(&mut rng, n, 1 + (trial as u32) % 4);
        let f = from_hermite(&e);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..N {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let v = f.eval(&x).unwrap().powi(2);
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / N as f64;
        let se = ((s2 / N as f64 - mean * mean) / N as f64).sqrt();
        let exact = e.l2_norm().powi(2);
        assert!((mean - exact).abs() <= 3.0 * se, "trial {trial}: {mean} vs {exact} (se {se})");
    }
}

fn coordinate_variance(l: u64) -> (f64, f64) {
    const DRAWS: u64 = 20_000;
    let params = derive_params(
        1,
        1,
        0.5,
        2,
        &ParamOverrides {
            r: Some(2),
            l: Some(l),
            m: Some(20),
            ..Default::default()
        },
    )
    .unwrap();
    let sampler = PrgSampler::new(params, b"variance");
    let mut x = [0.0; 2];
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for i in 0..DRAWS {
        sampler.sample_into(i, &mut x).unwrap();
        s1 += x[0];
        s2 += x[0] * x[0];
        s4 += x[0].powi(4);
    }
    let m = DRAWS as f64;
    let var = s2 / m - (s1 / m).powi(2);
    let se = ((s4 / m - (s2 / m).powi(2)) / m).sqrt();
    (var, se)
}

#[test]
fn block_normalization_preserves_variance() {
    let (v1, se1) = coordinate_variance(1);
    let (v16, se16) = coordinate_variance(16);
    assert!((v1 - v16).abs() <= 3.0 * (se1 * se1 + se16 * se16).sqrt(), "{v1} vs {v16}");
    assert!((v16 - 1.0).abs() <= 3.0 * se16);
}

#[test]
fn under_independent_generator_fails_control() {
    let params = derive_params(
        2,
        2,
        0.1,
        4,
        &ParamOverrides {
            wiseness: Some(1),
            ..ParamOverrides::desk()
        },
    )
    .unwrap();
    assert!(!params.fully_independent());
    let r = fooling_gap(&control_family(4).unwrap(), &params, 2000, &GapSeeds::new(b"ctl", 1), 0.02).unwrap();
    assert!(r.gap > 0.1, "gap {}", r.gap);
    assert!(!r.pass);

    let honest = derive_params(2, 2, 0.1, 4, &ParamOverrides::desk()).unwrap();
    let r = fooling_gap(&control_family(4).unwrap(), &honest, 2000, &GapSeeds::new(b"ctl", 1), 0.02).unwrap();
    assert_eq!(r.gap, 0.0);
}
