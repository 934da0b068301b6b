use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shaping_core::ccdm::CcdmCodebook;
use shaping_core::metrics::{air_n, rbmd, PasRates};
use shaping_core::mpdm::MpdmCodebook;
use shaping_core::pas::{simulate_fer, Builtin, CodeSpec, Demapper, PasConfig};
use shaping_core::shaper::{Shaper, ShaperSpec};
use shaping_core::spsh::{EssTrellis, Precision, SmTables, SphereShaper};
use shaping_core::{entropy, quantize_pmf, AmplitudeAlphabet, BitWord, BrgcLabeling, Composition, Pmf};

fn pmf_strategy(n_a: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.02f64..1.0, n_a).prop_map(|w| Pmf::from_weights(&w).unwrap())
}

fn big_below(bound: &BigUint, seed: u64) -> BigUint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bytes: Vec<u8> = (0..bound.to_bytes_le().len() + 8).map(|_| rng.gen()).collect();
    BigUint::from_bytes_le(&bytes) % bound
}

/// Sphere shapers over 4- or 8-ASK amplitudes at a random admissible radius.
fn sphere_params() -> impl Strategy<Value = (AmplitudeAlphabet, usize, u64)> {
    (2u32..=3, 2usize..=24, 0.0f64..=1.0).prop_map(|(m, n, frac)| {
        let alph = AmplitudeAlphabet::from_bits(m).unwrap();
        let shells = (n as u64 * alph.max_energy() - n as u64) / 8;
        (alph, n, n as u64 + 8 * (frac * shells as f64).round() as u64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ccdm_is_an_order_preserving_bijection(
        counts in prop::collection::vec(0u32..12, 3..=4),
        a in any::<u64>(),
        b in any::<u64>(),
    ) {
        prop_assume!(counts.iter().sum::<u32>() >= 2);
        let comp = Composition::new(counts);
        let cb = CcdmCodebook::new(comp.clone()).unwrap();
        let k = cb.k();
        let bound = BigUint::from(1u8) << k;
        let (wa, wb) = (big_below(&bound, a), big_below(&bound, b));
        let sa = cb.encode(&BitWord::from_index(&wa, k).unwrap()).unwrap();
        let sb = cb.encode(&BitWord::from_index(&wb, k).unwrap()).unwrap();
        let alph = AmplitudeAlphabet::with_size(comp.num_letters()).unwrap();
        prop_assert_eq!(Composition::of_sequence(&sa, &alph).unwrap(), comp);
        prop_assert_eq!(cb.decode(&sa).unwrap().to_index(), wa.clone());
        prop_assert_eq!(wa.cmp(&wb), sa.cmp(&sb));
    }

    #[test]
    fn mpdm_round_trips(counts in prop::collection::vec(1u32..10, 3..=4), a in any::<u64>()) {
        let cb = MpdmCodebook::build(&Composition::new(counts)).unwrap();
        let k = cb.k();
        let w = BitWord::from_index(&big_below(&(BigUint::from(1u8) << k), a), k).unwrap();
        let s = cb.encode(&w).unwrap();
        prop_assert_eq!(s.len(), cb.n());
        prop_assert_eq!(cb.decode(&s).unwrap(), w);
    }

    #[test]
    fn ess_is_a_lexicographic_bijection((alph, n, e_max) in sphere_params(), a in any::<u64>(), b in any::<u64>()) {
        let t = EssTrellis::build(n, &alph, e_max, Precision::Full).unwrap();
        let (ia, ib) = (big_below(t.size(), a), big_below(t.size(), b));
        let (sa, sb) = (t.unrank(&ia).unwrap(), t.unrank(&ib).unwrap());
        prop_assert!(alph.sequence_energy(&sa) <= e_max);
        prop_assert_eq!(t.rank(&sa).unwrap(), ia.clone());
        prop_assert_eq!(ia.cmp(&ib), sa.cmp(&sb));
    }

    #[test]
    fn sm_orders_by_energy((alph, n, e_max) in sphere_params(), a in any::<u64>(), b in any::<u64>()) {
        let t = SmTables::build(n, &alph, e_max, Precision::Full).unwrap();
        let (ia, ib) = (big_below(t.size(), a), big_below(t.size(), b));
        let (sa, sb) = (t.unrank(&ia).unwrap(), t.unrank(&ib).unwrap());
        prop_assert!(alph.sequence_energy(&sa) <= e_max);
        prop_assert_eq!(t.rank(&sa).unwrap(), ia.clone());
        if ia <= ib {
            prop_assert!(alph.sequence_energy(&sa) <= alph.sequence_energy(&sb));
        }
    }

    #[test]
    fn bounded_precision_loss_is_bounded((alph, n, e_max) in sphere_params(), n_m in 3u32..=10) {
        let p = Precision::bounded(n_m, 16);
        let bound = -(1.0 - 2f64.powi(1 - n_m as i32)).log2();
        let ess = (EssTrellis::build(n, &alph, e_max, Precision::Full).unwrap(),
            EssTrellis::build(n, &alph, e_max, p).unwrap());
        let sm = (SmTables::build(n, &alph, e_max, Precision::Full).unwrap(),
            SmTables::build(n, &alph, e_max, p).unwrap());
        for (fp, bp) in [(ess.0.size(), ess.1.size()), (sm.0.size(), sm.1.size())] {
            prop_assert!(bp <= fp);
            let loss = (shaping_core::combinatorics::log2_big(fp)
                - shaping_core::combinatorics::log2_big(bp)) / n as f64;
            prop_assert!(loss <= bound + 1e-12, "loss {} bound {}", loss, bound);
        }
    }

    #[test]
    fn quantized_compositions_are_n_types(p in pmf_strategy(4), n in 1usize..300) {
        let c = quantize_pmf(&p, n).unwrap();
        prop_assert_eq!(c.num_letters(), 4);
        prop_assert_eq!(c.n(), n);
    }

    #[test]
    fn bmd_rate_is_monotone_and_bounded(p in pmf_strategy(4), snr in -5.0f64..30.0, step in 0.1f64..5.0) {
        let lab = BrgcLabeling::new(3).unwrap();
        let (lo, hi) = (rbmd(&p, snr, &lab), rbmd(&p, snr + step, &lab));
        let h_x = entropy(&p) + 1.0;
        prop_assert!(lo >= -1e-9 && hi <= h_x + 1e-9);
        prop_assert!(hi >= lo - 1e-9);
    }

    #[test]
    fn finite_length_rate_stays_below_bmd_rate(p in pmf_strategy(4), snr in 0.0f64..25.0, n in 8usize..400) {
        let lab = BrgcLabeling::new(3).unwrap();
        let k = (entropy(&p) * n as f64 * 0.95).floor() as usize;
        prop_assert!(air_n(&p, k, n, snr, &lab) <= rbmd(&p, snr, &lab) + 1e-12);
    }

    #[test]
    fn pas_budget_adds_up(m in 2u32..=4, rate_idx in 0usize..4, blocks in 1usize..20, frac in 0.0f64..=1.0) {
        let rc = [0.5, 2.0 / 3.0, 0.75, 5.0 / 6.0][rate_idx];
        let n = 12 * blocks;
        let k = (frac * ((m as usize - 1) * n) as f64) as usize;
        if let Ok(r) = PasRates::new(m, rc, n, k) {
            prop_assert_eq!(r.data_bits() + r.redundancy(), m as usize * n);
            prop_assert_eq!(r.shaping_redundancy, (m as usize - 1) * n - k);
            prop_assert!((r.rate - r.data_bits() as f64 / n as f64).abs() < 1e-12);
            prop_assert!((r.gamma - (rc * m as f64 - (m as f64 - 1.0))).abs() < 1e-9);
        } else {
            prop_assert!(rc * (m as f64) < m as f64 - 1.0);
        }
    }

    #[test]
    fn llrs_are_symmetric(p in pmf_strategy(4), sigma2 in 0.05f64..20.0, y in -10.0f64..10.0) {
        let lab = BrgcLabeling::new(3).unwrap();
        let d = Demapper::new(lab, &lab.symmetric_pmf(&p), sigma2);
        prop_assert!((d.llr(y, 0) + d.llr(-y, 0)).abs() < 1e-9);
        for j in 1..3 {
            prop_assert!((d.llr(y, j) - d.llr(-y, j)).abs() < 1e-9);
        }
    }
}

#[test]
fn empirical_amplitudes_follow_the_induced_pmf() {
    let alph = AmplitudeAlphabet::from_bits(3).unwrap();
    let (n, k, words) = (24, 36, 4000);
    let specs = [
        ShaperSpec::Ccdm { composition: None, snr_db: None },
        ShaperSpec::Mpdm { composition: None, snr_db: None },
        ShaperSpec::Ess { e_max: None, precision: Precision::Full },
        ShaperSpec::Sm { e_max: None, precision: Precision::Full },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in specs {
        let shaper: Shaper = spec.build(&alph, n, k).unwrap();
        let target = shaper.induced_pmf().unwrap();
        let mut per_word = vec![Vec::with_capacity(words); alph.len()];
        for _ in 0..words {
            let bits: Vec<u8> = (0..shaper.k()).map(|_| rng.gen_range(0..2)).collect();
            let amps = shaper.shape(&bits).unwrap();
            for (j, col) in per_word.iter_mut().enumerate() {
                let c = amps.iter().filter(|&&a| a == alph.amplitude(j)).count();
                col.push(c as f64 / n as f64);
            }
        }
        for (j, col) in per_word.iter().enumerate() {
            let mean = col.iter().sum::<f64>() / words as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (words - 1) as f64;
            let sigma = (var / words as f64).sqrt().max(1e-9);
            let p = target.probs()[j];
            assert!((mean - p).abs() <= 3.0 * sigma, "{}: letter {j} {mean} vs {p} (σ {sigma})", shaper.name());
        }
    }
}

#[test]
fn fer_is_independent_of_worker_count() {
    let cfg = PasConfig {
        m: 3,
        shaper: ShaperSpec::Ess { e_max: None, precision: Precision::Full },
        code: CodeSpec::Builtin(Builtin::R5_6),
        rate: 2.0,
        gamma: None,
        snr_db: vec![12.5, 13.0],
        max_iterations: 20,
        decoder: Default::default(),
        seed: 99,
        min_frame_errors: 10,
        max_frames: 96,
    };
    let (sys, _) = cfg.system(std::path::Path::new(".")).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_fer(&cfg, &sys).unwrap())
    };
    assert_eq!(run(1), run(4));
}
