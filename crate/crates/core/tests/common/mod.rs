//! Enumeration oracles at small blocklengths, shared by the brute-force and
//! acceptance targets. Each check panics on the first mismatch.
#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shaping_core::ccdm::CcdmCodebook;
use shaping_core::distribution::kl_divergence;
use shaping_core::mpdm::MpdmCodebook;
use shaping_core::spsh::{EssTrellis, Precision, SmTables, SphereShaper};
use shaping_core::{quantize_pmf, AmplitudeAlphabet, BitWord, Composition, Pmf};

/// All `n_a^n` index sequences in lexicographic order.
pub fn all_sequences(n: usize, n_a: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..n).rev().find(|&i| cur[i] + 1 < n_a) else {
            return out;
        };
        cur[pos] += 1;
        cur[pos + 1..].iter_mut().for_each(|x| *x = 0);
    }
}

pub fn all_compositions(n: usize, n_a: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(left: usize, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(left as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c as u32);
            rec(left - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    rec(n, n_a, &mut Vec::new(), &mut out);
    out
}

pub fn energy(seq: &[usize]) -> usize {
    seq.iter().map(|&a| (2 * a + 1) * (2 * a + 1)).sum()
}

fn counts(seq: &[usize], n_a: usize) -> Vec<u32> {
    let mut c = vec![0u32; n_a];
    seq.iter().for_each(|&a| c[a] += 1);
    c
}

fn to_amplitudes(seq: &[usize]) -> Vec<u32> {
    seq.iter().map(|&a| 2 * a as u32 + 1).collect()
}

fn word(i: usize, k: usize) -> BitWord {
    BitWord::from_index(&BigUint::from(i), k).unwrap()
}

/// Shell-mapping order: energy first, then the split of the energy between
/// the halves (first half of length `⌊ℓ/2⌋` ascending), then the first half
/// and the second half recursively.
fn sm_cmp(a: &[usize], b: &[usize]) -> Ordering {
    if a.len() == 1 {
        return energy(a).cmp(&energy(b));
    }
    let h = a.len() / 2;
    energy(a)
        .cmp(&energy(b))
        .then(energy(&a[..h]).cmp(&energy(&b[..h])))
        .then_with(|| sm_cmp(&a[..h], &b[..h]))
        .then_with(|| sm_cmp(&a[h..], &b[h..]))
}

pub fn ccdm_matches_lexicographic_listing() {
    for n_a in 2..=3 {
        for n in 1..=8 {
            let seqs = all_sequences(n, n_a);
            for comp in all_compositions(n, n_a) {
                let listing: Vec<&Vec<usize>> = seqs.iter().filter(|s| counts(s, n_a) == comp).collect();
                let cb = CcdmCodebook::new(Composition::new(comp.clone())).unwrap();
                assert_eq!(cb.size(), &BigUint::from(listing.len()));
                let k = cb.k();
                assert!(1usize << k <= listing.len());
                assert!(listing.len() < 1 << (k + 1));
                for (i, s) in listing.iter().take(1 << k).enumerate() {
                    let amps = cb.encode(&word(i, k)).unwrap();
                    assert_eq!(amps, to_amplitudes(s), "{comp:?} rank {i}");
                    assert_eq!(cb.decode(&amps).unwrap(), word(i, k));
                }
            }
        }
    }
}

pub fn ess_matches_lexicographic_listing() {
    for n_a in 2..=3 {
        let alph = AmplitudeAlphabet::with_size(n_a).unwrap();
        for n in 1..=8 {
            let seqs = all_sequences(n, n_a);
            let e_top = n * (2 * n_a - 1).pow(2);
            for e_max in (n..=e_top).step_by(8) {
                let listing: Vec<&Vec<usize>> = seqs.iter().filter(|s| energy(s) <= e_max).collect();
                let t = EssTrellis::build(n, &alph, e_max as u64, Precision::Full).unwrap();
                assert_eq!(t.size(), &BigUint::from(listing.len()), "n = {n}, E = {e_max}");
                for (i, s) in listing.iter().enumerate() {
                    let idx = BigUint::from(i);
                    assert_eq!(t.unrank(&idx).unwrap(), to_amplitudes(s));
                    assert_eq!(t.rank(&to_amplitudes(s)).unwrap(), idx);
                }
                if let Some(out) = seqs.iter().find(|s| energy(s) > e_max) {
                    assert!(t.rank(&to_amplitudes(out)).is_err());
                }
            }
        }
    }
}

pub fn sm_matches_energy_ordered_listing() {
    for n_a in 2..=3 {
        let alph = AmplitudeAlphabet::with_size(n_a).unwrap();
        for n in 1..=8 {
            let seqs = all_sequences(n, n_a);
            let e_top = n * (2 * n_a - 1).pow(2);
            for e_max in (n..=e_top).step_by(16) {
                let mut listing: Vec<&Vec<usize>> = seqs.iter().filter(|s| energy(s) <= e_max).collect();
                listing.sort_by(|a, b| sm_cmp(a, b));
                let t = SmTables::build(n, &alph, e_max as u64, Precision::Full).unwrap();
                assert_eq!(t.size(), &BigUint::from(listing.len()));
                for (i, s) in listing.iter().enumerate() {
                    let idx = BigUint::from(i);
                    assert_eq!(t.unrank(&idx).unwrap(), to_amplitudes(s), "n = {n}, E = {e_max}, rank {i}");
                    assert_eq!(t.rank(&to_amplitudes(s)).unwrap(), idx);
                }
            }
        }
    }
}

pub fn mpdm_is_a_bijection_onto_its_leaves() {
    for n_a in 2..=3 {
        let seqs_by_n: Vec<Vec<Vec<usize>>> = (0..=8).map(|n| all_sequences(n, n_a)).collect();
        for n in 2..=8 {
            for comp in all_compositions(n, n_a) {
                let cb = MpdmCodebook::build(&Composition::new(comp.clone())).unwrap();
                let k = cb.k();
                let leaves: Vec<Vec<u32>> = cb.leaves().iter().map(|l| l.composition.counts().to_vec()).collect();
                let mut seen = std::collections::HashSet::new();
                let mut last: Option<(usize, usize)> = None;
                for w in 0..1usize << k {
                    let amps = cb.encode(&word(w, k)).unwrap();
                    let idx: Vec<usize> = amps.iter().map(|&a| (a as usize - 1) / 2).collect();
                    let leaf = leaves.iter().position(|c| *c == counts(&idx, n_a)).expect("leaf composition");
                    // Within a leaf, consecutive words follow lexicographic order.
                    let pos = seqs_by_n[n].iter().position(|s| *s == idx).unwrap();
                    if let Some((l, p)) = last {
                        if l == leaf {
                            assert!(pos > p);
                        }
                    }
                    last = Some((leaf, pos));
                    assert!(seen.insert(idx));
                    assert_eq!(cb.decode(&amps).unwrap(), word(w, k));
                }
            }
        }
    }
}

pub fn quantization_minimizes_divergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n_a = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..n_a).map(|_| rng.gen_range(0.01..1.0)).collect();
        let p = Pmf::from_weights(&w).unwrap();
        let kl = |c: &[u32]| {
            let q: Vec<f64> = c.iter().map(|&x| x as f64 / n as f64).collect();
            kl_divergence(&q, p.probs())
        };
        let mut all = all_compositions(n, n_a);
        all.sort();
        let best = all.iter().map(|c| kl(c)).fold(f64::INFINITY, f64::min);
        let lex_first = all.iter().find(|c| kl(c) <= best + 1e-12).unwrap();
        let got = quantize_pmf(&p, n).unwrap();
        assert!(kl(got.counts()) <= best + 1e-12, "{p:?} n = {n}: {got:?} vs {lex_first:?}");
        assert_eq!(got.counts(), &lex_first[..]);
    }
}
