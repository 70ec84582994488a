use deepopt::binary::{brute_force_oracle, Bits, HtopInstance, McParityInstance};
use deepopt::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn htop_8_enumeration_matches_closed_form() {
    let h = HtopInstance::new(8).unwrap();
    let (best, argmax) = brute_force_oracle(|x| h.fitness(x).unwrap(), 8).unwrap();
    assert_eq!(best, 3.0);
    assert_eq!(best, h.max_fitness());
    let mut expected = h.global_optima();
    expected.sort();
    assert_eq!(argmax, expected);
    assert_eq!(argmax.len(), 4);
}

#[test]
fn htop_16_enumeration_matches_closed_form() {
    let h = HtopInstance::new(16).unwrap();
    let (best, argmax) = brute_force_oracle(|x| h.fitness(x).unwrap(), 16).unwrap();
    assert_eq!(best, h.max_fitness());
    let mut expected = h.global_optima();
    expected.sort();
    assert_eq!(argmax, expected);
}

#[test]
fn mc_parity_enumeration_matches_closed_form() {
    for modules in 1..=3 {
        let m = McParityInstance::new(modules, 4, 1e-4).unwrap();
        let n = modules * 4;
        let (best, argmax) = brute_force_oracle(|x| m.fitness(x).unwrap(), n).unwrap();
        let closed = modules as f64 + 1e-4 * (modules * modules) as f64;
        assert!((best - closed).abs() < 1e-12, "m={modules}: {best}");
        assert!((best - m.max_fitness()).abs() < 1e-12);
        assert_eq!(argmax.len(), 8, "m={modules}");
        // Every optimum repeats one odd-parity module.
        for s in &argmax {
            let first = &s[..4];
            assert_eq!(first.iter().map(|&b| b as u32).sum::<u32>() % 2, 1);
            assert!(s.chunks(4).all(|c| c == first));
        }
    }
    let m = McParityInstance::new(2, 4, 1e-4).unwrap();
    let (best, _) = brute_force_oracle(|x| m.fitness(x).unwrap(), 8).unwrap();
    assert!((best - 2.0004).abs() < 1e-12);
}

#[test]
fn htop_32_samples_never_exceed_the_optimum() {
    let h = HtopInstance::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x: Bits = vec![0; 32];
    for _ in 0..1_000_000 {
        let word: u32 = rng.gen();
        for (i, b) in x.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
        assert!(h.fitness(&x).unwrap() <= 15.0);
    }
    for opt in h.global_optima() {
        assert_eq!(h.fitness(&opt).unwrap(), 15.0);
    }
}

#[test]
fn random_solutions_have_the_right_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = HtopInstance::new(64).unwrap();
    let m = McParityInstance::with_size(100).unwrap();
    for _ in 0..20 {
        let x = h.random_solution(&mut rng);
        assert_eq!(x.len(), 64);
        assert!(x.iter().all(|&b| b <= 1));
        let y = m.random_solution(&mut rng);
        assert_eq!(y.len(), 100);
        assert!(m.fitness(&y).unwrap() <= m.max_fitness());
    }
}
