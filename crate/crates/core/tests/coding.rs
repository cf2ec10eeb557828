use monoqkd::coding::{
    gray_decode, gray_encode, hamming_distance, universality_check, xor_bits, LinearCode,
    ToeplitzHash,
};
use proptest::prelude::*;

#[test]
fn gray_round_trip_and_adjacency() {
    for bits in 1..=12 {
        for k in 0..1u64 << bits {
            let g = gray_encode(k, bits).unwrap();
            assert_eq!(gray_decode(&g).unwrap(), k);
            if bits <= 10 && k + 1 < 1 << bits {
                assert_eq!(hamming_distance(&g, &gray_encode(k + 1, bits).unwrap()), 1);
            }
        }
    }
}

#[test]
fn gray_distance_is_dominated_by_index_distance() {
    let codes: Vec<_> = (0..256).map(|k| gray_encode(k, 8).unwrap()).collect();
    for a in 0..256usize {
        for b in 0..256usize {
            assert!(hamming_distance(&codes[a], &codes[b]) <= a.abs_diff(b));
        }
    }
}

fn word(v: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| v >> i & 1 == 1).collect()
}

#[test]
fn hamming_corrects_single_errors_only() {
    let code = LinearCode::hamming74();
    let dec = code.decoder().unwrap();
    let mut two_flip_failures = 0;
    for v in 0..128u64 {
        let w = word(v, 7);
        let syn = code.syndrome(&w).unwrap();
        assert_eq!(dec.decode_with_syndrome(&w, &syn).unwrap(), w);
        for i in 0..7 {
            let mut e = w.clone();
            e[i] ^= true;
            assert_eq!(dec.decode_with_syndrome(&e, &syn).unwrap(), w);
            for j in i + 1..7 {
                let mut e2 = e.clone();
                e2[j] ^= true;
                if dec.decode_with_syndrome(&e2, &syn).unwrap() != w {
                    two_flip_failures += 1;
                }
            }
        }
    }
    assert_eq!(two_flip_failures, 128 * 21);
}

/// Every pattern of weight at most (d-1)/2 is corrected, for every code with
/// a brute-forced distance.
fn corrects_up_to_half_distance(code: &LinearCode) {
    let dec = code.decoder().unwrap();
    let d = code.distance().unwrap();
    let t = (d - 1) / 2;
    let n = code.n();
    let base = word(0x5a5a_5a5a_5a5a_5a5a, n);
    let syn = code.syndrome(&base).unwrap();
    let mut patterns = vec![vec![]];
    for _ in 0..t {
        patterns = patterns
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let start = p.last().map_or(0, |&x| x + 1);
                (start..n).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .chain(std::iter::once(vec![]))
            .collect();
    }
    for p in patterns {
        let mut e = base.clone();
        for j in p {
            e[j] ^= true;
        }
        assert_eq!(dec.decode_with_syndrome(&e, &syn).unwrap(), base, "{code}");
    }
}

#[test]
fn decoding_radius_on_several_codes() {
    corrects_up_to_half_distance(&LinearCode::hamming74());
    corrects_up_to_half_distance(&LinearCode::repetition(7).unwrap());
    corrects_up_to_half_distance(&LinearCode::random(20, 8, 11).unwrap());
    corrects_up_to_half_distance(&LinearCode::random(24, 12, 2).unwrap());
    corrects_up_to_half_distance(&LinearCode::repetition(5).unwrap().direct_sum(4).unwrap());
}

#[test]
fn universality_is_exact() {
    for in_len in 1..=6 {
        for out_len in 1..=in_len.min(3) {
            let p = universality_check(in_len, out_len).unwrap();
            assert_eq!(p, 0.5f64.powi(out_len as i32), "{in_len}x{out_len}");
        }
    }
}

proptest! {
    #[test]
    fn syndrome_is_linear(u in any::<u64>(), v in any::<u64>(), seed in 0u64..50) {
        let code = LinearCode::random(40, 24, seed).unwrap();
        let (a, b) = (word(u, 40), word(v, 40));
        let lhs = code.syndrome(&xor_bits(&a, &b)).unwrap();
        let rhs = xor_bits(&code.syndrome(&a).unwrap(), &code.syndrome(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn toeplitz_is_linear(u in any::<u64>(), v in any::<u64>(), d in any::<u64>()) {
        let h = ToeplitzHash::new(32, 16, word(d, 47)).unwrap();
        let (a, b) = (word(u, 32), word(v, 32));
        let lhs = h.apply(&xor_bits(&a, &b)).unwrap();
        let rhs = xor_bits(&h.apply(&a).unwrap(), &h.apply(&b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn decoded_word_hits_target_and_is_closest(v in any::<u64>(), t in any::<u64>(), seed in 0u64..20) {
        let code = LinearCode::random(14, 6, seed).unwrap();
        let dec = code.decoder().unwrap();
        let w = word(v, 14);
        let target = word(t, 8);
        let out = dec.decode_with_syndrome(&w, &target).unwrap();
        prop_assert_eq!(code.syndrome(&out).unwrap(), target.clone());
        let best = (0..1u64 << 14)
            .map(|c| word(c, 14))
            .filter(|c| code.syndrome(c).unwrap() == target)
            .map(|c| hamming_distance(&c, &w))
            .min()
            .unwrap();
        prop_assert_eq!(hamming_distance(&out, &w), best);
    }
}
