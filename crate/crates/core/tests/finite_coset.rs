mod common;

use common::dihedral::hand_expansion_error;
use monoqkd::finite_coset::{
    all_subgroups, construct_group, finite_bound, overlap_check, register_subspace,
    seesaw_lower_bound, CosetBasis, CosetGame, GroupTable, SeesawOptions, Subgroup,
};
use proptest::prelude::*;

fn group(s: &str) -> GroupTable {
    construct_group(&s.parse().unwrap()).unwrap()
}

#[test]
fn dihedral_states_match_hand_expansion() {
    let (n, p) = (15, 3);
    let g = group("dihedral:15");
    let h = Subgroup::generate(&g, &[5, 15]).unwrap();
    let basis = CosetBasis::new(&g, &h).unwrap();
    assert_eq!(basis.representatives(), &[0, 1, 2, 3, 4]);
    let err = hand_expansion_error(&basis, n, p);
    assert!(err < 1e-10, "max error {err}");
}

#[test]
fn two_dimensional_states_cover_half_the_coset() {
    let g = group("dihedral:15");
    let h = Subgroup::generate(&g, &[5, 15]).unwrap();
    let basis = CosetBasis::new(&g, &h).unwrap();
    for r in 0..basis.representatives().len() {
        for (l, lab) in basis.labels().iter().enumerate() {
            let support = basis
                .column(r, l)
                .iter()
                .filter(|z| z.norm() > 1e-12)
                .count();
            let expect = if lab.irrep == 2 { 3 } else { 6 };
            assert_eq!(support, expect);
        }
    }
}

#[test]
fn every_basis_is_orthonormal_and_complete() {
    for spec in [
        "dihedral:15",
        "z2^4",
        "cyclic:12",
        "dihedral:9",
        "product:cyclic:2*cyclic:4",
    ] {
        let g = group(spec);
        for h in all_subgroups(&g).unwrap() {
            let Ok(basis) = CosetBasis::new(&g, &h) else {
                assert!(!h.is_abelian(&g));
                continue;
            };
            assert_eq!(basis.states().ncols(), g.order());
            assert!(basis.gram_deviation() < 1e-10, "{spec} {}", h.describe(&g));
            assert!(
                basis.completeness_deviation() < 1e-10,
                "{spec} {}",
                h.describe(&g)
            );
        }
    }
}

fn overlap_sweep(g: &GroupTable, subgroups: &[Subgroup]) -> usize {
    let mut checked = 0;
    for h in subgroups {
        let basis = CosetBasis::new(g, h).unwrap();
        for k in subgroups {
            for q in k.coset_representatives(g) {
                for l in 0..basis.labels().len() {
                    let rep = overlap_check(g, h, &basis, k, l, q).unwrap();
                    assert!(
                        rep.holds(),
                        "{} vs {}: {rep:?}",
                        h.describe(g),
                        k.describe(g)
                    );
                    checked += 1;
                }
            }
        }
    }
    checked
}

#[test]
fn overlap_lemma_on_all_d15_subgroups() {
    let g = group("dihedral:15");
    let subs = all_subgroups(&g).unwrap();
    assert_eq!(subs.len(), 28);
    assert!(overlap_sweep(&g, &subs) > 0);
}

#[test]
fn overlap_lemma_on_z2_4_register_subspaces() {
    let g = group("z2^4");
    let subs: Vec<Subgroup> = (0..16u32)
        .map(|mask| {
            let coords: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            register_subspace(&g, 4, &coords).unwrap()
        })
        .collect();
    overlap_sweep(&g, &subs);

    let h = register_subspace(&g, 4, &[0, 1]).unwrap();
    let k = register_subspace(&g, 4, &[2, 3]).unwrap();
    let basis = CosetBasis::new(&g, &h).unwrap();
    let rep = overlap_check(&g, &h, &basis, &k, 0, 0).unwrap();
    assert_eq!(rep.bound, 0.5);
    assert!((rep.norm - 0.5).abs() < 1e-10);
}

#[test]
fn register_game_seesaw_beats_uniform_guessing() {
    let g = group("z2^2");
    let s = vec![
        register_subspace(&g, 2, &[0]).unwrap(),
        register_subspace(&g, 2, &[1]).unwrap(),
    ];
    let game = CosetGame::new(g, s).unwrap();
    let naive = 0.25;
    let res = seesaw_lower_bound(&game, 1, &SeesawOptions::default()).unwrap();
    assert!(res.value >= 0.85 * naive);
    assert!(res.value <= game.bound().unwrap().value + 1e-9);
}

const SMALL_GROUPS: &[&str] = &[
    "cyclic:2",
    "cyclic:3",
    "cyclic:4",
    "z2^2",
    "cyclic:5",
    "cyclic:6",
    "dihedral:3",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn seesaw_never_exceeds_the_bound(which in 0..SMALL_GROUPS.len(), mask in 1u32..64, seed in any::<u64>()) {
        let g = group(SMALL_GROUPS[which]);
        let subs = all_subgroups(&g).unwrap();
        let chosen: Vec<Subgroup> = subs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 6) & 1 == 1)
            .map(|(_, h)| h.clone())
            .take(3)
            .collect();
        prop_assume!(!chosen.is_empty());
        let bound = finite_bound(&g, &chosen).unwrap().value;
        let game = CosetGame::new(g, chosen).unwrap();
        let opts = SeesawOptions { iterations: 15, ..SeesawOptions::default() };
        let res = seesaw_lower_bound(&game, seed, &opts).unwrap();
        prop_assert!(res.value <= bound + 1e-9, "{} > {}", res.value, bound);
    }
}
