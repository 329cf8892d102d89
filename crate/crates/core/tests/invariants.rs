//! Cross-module properties: verdict invariance under automorphisms,
//! agreement between descent and graph certificates, and the necessary
//! conditions every primitive word satisfies.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use whitehead::free_group::{
    abelianize, cyclic_reduce, free_reduce, homology_primitive, Alphabet, Letter, Sign,
    WhiteheadAut, Word,
};
use whitehead::pipeline::gen_wk;
use whitehead::whitehead_decision::{is_primitive, verify_certificate, DEFAULT_RANK_GUARD};
use whitehead::whitehead_graph::{build_whitehead_graph, classify, Connectivity};

fn random_reduced_word(rng: &mut StdRng, rank: usize, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let gen = rng.random_range(0..rank);
        let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let l = Letter { gen, sign };
        if letters.last().is_some_and(|&p| p.is_inverse_of(l)) {
            continue;
        }
        letters.push(l);
    }
    free_reduce(letters)
}

fn random_aut(rng: &mut StdRng, rank: usize) -> WhiteheadAut {
    loop {
        let multiplier = Letter {
            gen: rng.random_range(0..rank),
            sign: if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus },
        };
        let mut support = vec![multiplier];
        for i in 0..2 * rank {
            let l = Letter::from_index(i);
            if l != multiplier && l != multiplier.inverse() && rng.random_bool(0.5) {
                support.push(l);
            }
        }
        if let Ok(aut) = WhiteheadAut::new(rank, multiplier, support) {
            return aut;
        }
    }
}

#[test]
fn verdict_is_automorphism_invariant() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..200 {
        let rank = rng.random_range(2..=3);
        let names: Vec<String> = (1..=rank).map(|i| format!("a{i}")).collect();
        let alphabet = Alphabet::new(names).unwrap();
        let len = rng.random_range(1..=12);
        let w = random_reduced_word(&mut rng, rank, len);
        let aut = random_aut(&mut rng, rank);
        let image = aut.apply(&w).unwrap();
        let before = is_primitive(&w, &alphabet).unwrap().primitive;
        let after = is_primitive(&image, &alphabet).unwrap().primitive;
        assert_eq!(
            before,
            after,
            "verdict changed under an automorphism: {} vs {}",
            w.display(&alphabet),
            image.display(&alphabet)
        );
    }
}

#[test]
fn certificates_concord_on_wk() {
    for k in 1..=3 {
        let (alphabet, word) = gen_wk(k).unwrap();
        let outcome = is_primitive(&word, &alphabet).unwrap();
        assert!(!outcome.primitive);
        assert_eq!(outcome.method(), "both", "w_{k} carries descent and graph evidence");
        for cert in &outcome.certificates {
            assert!(verify_certificate(&word, &alphabet, cert, DEFAULT_RANK_GUARD));
        }
    }
}

#[test]
fn primitive_words_satisfy_necessary_conditions() {
    let mut rng = StdRng::seed_from_u64(43);
    let alphabet = Alphabet::new(["a1", "a2", "a3"]).unwrap();
    let mut primitives = 0;
    for _ in 0..400 {
        let len = rng.random_range(1..=10);
        let w = random_reduced_word(&mut rng, 3, len);
        let outcome = is_primitive(&w, &alphabet).unwrap();
        if !outcome.primitive {
            continue;
        }
        primitives += 1;
        assert!(
            homology_primitive(&abelianize(&w, &alphabet)),
            "primitive {} must be homology-primitive",
            w.display(&alphabet)
        );
        let (c, _) = cyclic_reduce(&w);
        if c.len() >= 2 {
            let status = classify(&build_whitehead_graph(&c, &alphabet)).unwrap();
            assert!(
                matches!(
                    status.connectivity,
                    Connectivity::Disconnected { .. } | Connectivity::CutVertex { .. }
                ),
                "primitive {} must not have a 2-connected graph",
                w.display(&alphabet)
            );
        }
    }
    assert!(primitives > 10, "the sample should contain some primitive words");
}
