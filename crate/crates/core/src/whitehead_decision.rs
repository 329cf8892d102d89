//! Primitivity decision by greedy Whitehead descent.
//!
//! A word is primitive (a member of some free basis) iff its cyclic length
//! can be driven to 1 by type II Whitehead automorphisms; peak reduction
//! guarantees that greedy strictly-decreasing descent finds the orbit
//! minimum. Verdicts carry machine-checkable certificates: a replayable
//! descent trace, a minimal word plus an attestation that the full
//! enumeration fails to shrink it, or a 2-connected Whitehead graph, which
//! certifies non-primitivity outright.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::free_group::{
    cyclic_reduce, enumerate_whitehead_auts, free_reduce, whitehead_aut_count, Alphabet,
    CyclicWord, FreeGroupError, Letter, Sign, WhiteheadAut, Word,
};
use crate::whitehead_graph::{build_whitehead_graph, classify, WhiteheadGraph};

/// Default cap on full automorphism enumeration: rank 11 costs about
/// 2.3e7 candidate applications per descent step.
pub const DEFAULT_RANK_GUARD: usize = 11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WhiteheadDecisionError {
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
    #[error("undecided at rank {rank}: enumeration guard is {guard} and no graph certificate applies")]
    Undecided { rank: usize, guard: usize },
}

/// One descent step: the automorphism applied and what it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentStep {
    pub aut: WhiteheadAut,
    pub result: CyclicWord,
    pub length: usize,
}

/// A strictly length-decreasing sequence of descent steps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DescentTrace {
    pub steps: Vec<DescentStep>,
}

impl DescentTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_length(&self) -> Option<usize> {
        self.steps.last().map(|s| s.length)
    }
}

/// Machine-checkable evidence for a primitivity verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitivityCertificate {
    /// Descent reached cyclic length 1.
    Primitive { trace: DescentTrace },
    /// Descent stalled at length >= 2 (or the word was empty); every one
    /// of `auts_attested` enumerated automorphisms fails to reduce.
    NonPrimitiveMinimal {
        minimal: CyclicWord,
        trace: DescentTrace,
        auts_attested: u128,
    },
    /// The word's own Whitehead graph is connected with no cut vertex;
    /// only issued for cyclic length >= 2.
    NonPrimitiveGraph { graph: WhiteheadGraph },
}

impl PrimitivityCertificate {
    pub fn method(&self) -> &'static str {
        match self {
            PrimitivityCertificate::NonPrimitiveGraph { .. } => "graph",
            _ => "descent",
        }
    }
}

/// Verdict plus every certificate that was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitivityOutcome {
    pub primitive: bool,
    pub certificates: Vec<PrimitivityCertificate>,
}

impl PrimitivityOutcome {
    pub fn method(&self) -> &'static str {
        let descent = self.certificates.iter().any(|c| c.method() == "descent");
        let graph = self.certificates.iter().any(|c| c.method() == "graph");
        match (descent, graph) {
            (true, true) => "both",
            (false, true) => "graph",
            _ => "descent",
        }
    }

    pub fn descent_certificate(&self) -> Option<&PrimitivityCertificate> {
        self.certificates.iter().find(|c| c.method() == "descent")
    }

    pub fn graph_certificate(&self) -> Option<&PrimitivityCertificate> {
        self.certificates.iter().find(|c| c.method() == "graph")
    }
}

/// Find the automorphism achieving the maximal strict decrease in cyclic
/// length, or `None` if no automorphism strictly reduces. Ties go to the
/// least (multiplier position, support mask) pair; enumeration order makes
/// the first strict improvement the tie-broken winner.
pub fn reduce_once(
    c: &CyclicWord,
    alphabet: &Alphabet,
    rank_guard: usize,
) -> Result<Option<(WhiteheadAut, CyclicWord)>, WhiteheadDecisionError> {
    let baseline = c.len();
    if baseline <= 1 {
        return Ok(None);
    }
    let mut best: Option<(WhiteheadAut, CyclicWord)> = None;
    for aut in enumerate_whitehead_auts(alphabet.rank(), rank_guard)? {
        let reduced = aut.apply_to_cyclic(c)?;
        if reduced.len() >= baseline {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| reduced.len() < b.len()) {
            // Nothing can beat length 1, and the first automorphism to
            // reach it is the tie-broken choice.
            let done = reduced.len() == 1;
            best = Some((aut, reduced));
            if done {
                break;
            }
        }
    }
    Ok(best)
}

/// Greedy descent to the orbit minimum; the trace records each step.
pub fn minimize(
    w: &Word,
    alphabet: &Alphabet,
    rank_guard: usize,
) -> Result<(CyclicWord, DescentTrace), WhiteheadDecisionError> {
    let (c, _) = cyclic_reduce(w);
    minimize_cyclic(c, alphabet, rank_guard)
}

fn minimize_cyclic(
    mut c: CyclicWord,
    alphabet: &Alphabet,
    rank_guard: usize,
) -> Result<(CyclicWord, DescentTrace), WhiteheadDecisionError> {
    let mut steps = Vec::new();
    while let Some((aut, reduced)) = reduce_once(&c, alphabet, rank_guard)? {
        steps.push(DescentStep { aut, result: reduced.clone(), length: reduced.len() });
        c = reduced;
    }
    Ok((c, DescentTrace { steps }))
}

/// Issue a graph certificate when the word's Whitehead graph is
/// 2-connected. Cyclic length below 2 never qualifies: a single letter is
/// primitive even though its graph has no cut vertex.
pub fn graph_certificate(c: &CyclicWord, alphabet: &Alphabet) -> Option<PrimitivityCertificate> {
    if c.len() < 2 {
        return None;
    }
    let graph = build_whitehead_graph(c, alphabet);
    match classify(&graph) {
        Ok(status) if status.is_two_connected() => {
            Some(PrimitivityCertificate::NonPrimitiveGraph { graph })
        }
        _ => None,
    }
}

/// Decide primitivity with the default enumeration guard.
pub fn is_primitive(
    w: &Word,
    alphabet: &Alphabet,
) -> Result<PrimitivityOutcome, WhiteheadDecisionError> {
    is_primitive_with_guard(w, alphabet, DEFAULT_RANK_GUARD)
}

/// Decide primitivity. Within the guard both descent and graph
/// certificates are attempted; beyond it only the graph certificate is
/// available, and its absence is an explicit undecided error.
pub fn is_primitive_with_guard(
    w: &Word,
    alphabet: &Alphabet,
    rank_guard: usize,
) -> Result<PrimitivityOutcome, WhiteheadDecisionError> {
    let rank = alphabet.rank();
    let (c, _) = cyclic_reduce(w);
    if c.is_empty() {
        return Ok(PrimitivityOutcome {
            primitive: false,
            certificates: vec![PrimitivityCertificate::NonPrimitiveMinimal {
                minimal: c,
                trace: DescentTrace::default(),
                auts_attested: 0,
            }],
        });
    }
    if c.len() == 1 {
        return Ok(PrimitivityOutcome {
            primitive: true,
            certificates: vec![PrimitivityCertificate::Primitive { trace: DescentTrace::default() }],
        });
    }
    let graph_cert = graph_certificate(&c, alphabet);
    if rank > rank_guard {
        return match graph_cert {
            Some(cert) => Ok(PrimitivityOutcome { primitive: false, certificates: vec![cert] }),
            None => Err(WhiteheadDecisionError::Undecided { rank, guard: rank_guard }),
        };
    }
    let (minimal, trace) = minimize_cyclic(c, alphabet, rank_guard)?;
    if minimal.len() == 1 {
        debug_assert!(graph_cert.is_none(), "primitive word with a 2-connected graph");
        return Ok(PrimitivityOutcome {
            primitive: true,
            certificates: vec![PrimitivityCertificate::Primitive { trace }],
        });
    }
    let mut certificates = vec![PrimitivityCertificate::NonPrimitiveMinimal {
        minimal,
        trace,
        auts_attested: whitehead_aut_count(rank),
    }];
    certificates.extend(graph_cert);
    Ok(PrimitivityOutcome { primitive: false, certificates })
}

/// Re-check a certificate against the word it claims to describe.
pub fn verify_certificate(
    w: &Word,
    alphabet: &Alphabet,
    cert: &PrimitivityCertificate,
    rank_guard: usize,
) -> bool {
    let (start, _) = cyclic_reduce(w);
    match cert {
        PrimitivityCertificate::Primitive { trace } => {
            replay(&start, trace).is_some_and(|c| c.len() == 1)
        }
        PrimitivityCertificate::NonPrimitiveMinimal { minimal, trace, .. } => {
            let Some(replayed) = replay(&start, trace) else {
                return false;
            };
            if replayed != *minimal || minimal.len() == 1 {
                return false;
            }
            if minimal.is_empty() {
                // The identity: non-primitive by definition.
                return true;
            }
            matches!(reduce_once(minimal, alphabet, rank_guard), Ok(None))
        }
        PrimitivityCertificate::NonPrimitiveGraph { graph } => {
            if start.len() < 2 {
                return false;
            }
            let rebuilt = build_whitehead_graph(&start, alphabet);
            rebuilt.edges() == graph.edges()
                && classify(graph).is_ok_and(|s| s.is_two_connected())
        }
    }
}

fn replay(start: &CyclicWord, trace: &DescentTrace) -> Option<CyclicWord> {
    let mut c = start.clone();
    for step in &trace.steps {
        let next = step.aut.apply_to_cyclic(&c).ok()?;
        if next != step.result || next.len() != step.length || next.len() >= c.len() {
            return None;
        }
        c = next;
    }
    Some(c)
}

/// Elementary Nielsen transformations: one generator inversion, or one
/// right multiplication x -> x*y.
#[derive(Debug, Clone, Copy)]
enum NielsenMove {
    Invert(usize),
    RightMultiply { x: usize, y: usize },
}

fn apply_nielsen(m: NielsenMove, w: &Word) -> Word {
    let mut out = Vec::with_capacity(2 * w.len());
    for &l in w.letters() {
        match m {
            NielsenMove::Invert(g) if l.gen == g => out.push(l.inverse()),
            NielsenMove::RightMultiply { x, y } if l.gen == x => match l.sign {
                Sign::Plus => {
                    out.push(l);
                    out.push(Letter::positive(y));
                }
                Sign::Minus => {
                    out.push(Letter::negative(y));
                    out.push(l);
                }
            },
            _ => out.push(l),
        }
    }
    free_reduce(out)
}

/// Images of the first generator under compositions of at most `depth`
/// elementary Nielsen automorphisms, cyclically reduced and truncated to
/// cyclic length at most `max_len`. Every element is primitive by
/// construction, which makes the set an independent oracle.
pub fn nielsen_primitive_corpus(
    alphabet: &Alphabet,
    depth: usize,
    max_len: usize,
) -> BTreeSet<CyclicWord> {
    let rank = alphabet.rank();
    let mut moves = Vec::new();
    for g in 0..rank {
        moves.push(NielsenMove::Invert(g));
    }
    for x in 0..rank {
        for y in 0..rank {
            if x != y {
                moves.push(NielsenMove::RightMultiply { x, y });
            }
        }
    }

    let seed = free_reduce([Letter::positive(0)]);
    let mut corpus = BTreeSet::new();
    let admit = |w: &Word, corpus: &mut BTreeSet<CyclicWord>| {
        let (c, _) = cyclic_reduce(w);
        if c.len() <= max_len {
            corpus.insert(c);
        }
    };
    admit(&seed, &mut corpus);

    let mut seen: BTreeSet<Word> = BTreeSet::from([seed.clone()]);
    let mut frontier = vec![seed];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for &m in &moves {
                let image = apply_nielsen(m, w);
                if seen.insert(image.clone()) {
                    admit(&image, &mut corpus);
                    next.push(image);
                }
            }
        }
        frontier = next;
    }
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::parse_word;

    fn ab() -> Alphabet {
        Alphabet::new(["a1", "a2"]).unwrap()
    }

    fn abg() -> Alphabet {
        Alphabet::new(["a1", "a2", "g"]).unwrap()
    }

    fn w(text: &str, alphabet: &Alphabet) -> Word {
        parse_word(text, alphabet).unwrap()
    }

    const W1_TEXT: &str = "a1 a2 a1 a2 g a1 g^-1 a2 g";

    #[test]
    fn reduce_once_shrinks_a1a2a1() {
        let a = ab();
        let (c, _) = cyclic_reduce(&w("a1 a2 a1", &a));
        let (aut, reduced) = reduce_once(&c, &a, DEFAULT_RANK_GUARD).unwrap().unwrap();
        assert!(reduced.len() <= 2);
        // Replaying the chosen automorphism reproduces the result.
        assert_eq!(aut.apply_to_cyclic(&c).unwrap(), reduced);
    }

    #[test]
    fn reduce_once_none_on_single_letter() {
        let a = ab();
        let (c, _) = cyclic_reduce(&w("a1", &a));
        assert_eq!(reduce_once(&c, &a, DEFAULT_RANK_GUARD).unwrap(), None);
    }

    #[test]
    fn reduce_once_none_at_rank_one() {
        let a1 = Alphabet::new(["a1"]).unwrap();
        let (c, _) = cyclic_reduce(&w("a1 a1", &a1));
        assert_eq!(reduce_once(&c, &a1, DEFAULT_RANK_GUARD).unwrap(), None);
    }

    #[test]
    fn minimize_examples() {
        let a = ab();
        let (min, trace) = minimize(&w("a1 a2 a1", &a), &a, DEFAULT_RANK_GUARD).unwrap();
        assert_eq!(min.len(), 1);
        assert!(!trace.is_empty());
        for pair in trace.steps.windows(2) {
            assert!(pair[1].length < pair[0].length);
        }

        let g = abg();
        let (min, _) = minimize(&w(W1_TEXT, &g), &g, DEFAULT_RANK_GUARD).unwrap();
        assert!(min.len() >= 2);

        let (min, trace) = minimize(&w("a1", &a), &a, DEFAULT_RANK_GUARD).unwrap();
        assert_eq!(min.len(), 1);
        assert!(trace.is_empty());
    }

    #[test]
    fn single_letters_and_conjugates_are_primitive() {
        let a = ab();
        for text in ["a1", "A2", "a1 a2 A1"] {
            let outcome = is_primitive(&w(text, &a), &a).unwrap();
            assert!(outcome.primitive, "{text} should be primitive");
        }
    }

    #[test]
    fn commutator_is_not_primitive() {
        let a = ab();
        let word = w("a1 a2 A1 A2", &a);
        let outcome = is_primitive(&word, &a).unwrap();
        assert!(!outcome.primitive);
        let cert = outcome.descent_certificate().unwrap();
        assert!(matches!(cert, PrimitivityCertificate::NonPrimitiveMinimal { .. }));
        assert!(verify_certificate(&word, &a, cert, DEFAULT_RANK_GUARD));
    }

    #[test]
    fn w1_is_not_primitive_with_both_certificates() {
        let g = abg();
        let word = w(W1_TEXT, &g);
        let outcome = is_primitive(&word, &g).unwrap();
        assert!(!outcome.primitive);
        assert_eq!(outcome.method(), "both");
        for cert in &outcome.certificates {
            assert!(verify_certificate(&word, &g, cert, DEFAULT_RANK_GUARD));
        }
    }

    #[test]
    fn empty_word_is_not_primitive() {
        let a = ab();
        let outcome = is_primitive(&Word::empty(), &a).unwrap();
        assert!(!outcome.primitive);
        let cert = &outcome.certificates[0];
        assert!(verify_certificate(&Word::empty(), &a, cert, DEFAULT_RANK_GUARD));
    }

    #[test]
    fn primitive_traces_replay() {
        let a = ab();
        let word = w("a1 a2 a1", &a);
        let outcome = is_primitive(&word, &a).unwrap();
        assert!(outcome.primitive);
        let cert = outcome.descent_certificate().unwrap();
        assert!(verify_certificate(&word, &a, cert, DEFAULT_RANK_GUARD));
        // The certificate does not verify against a different word.
        assert!(!verify_certificate(&w("a1 a1", &a), &a, cert, DEFAULT_RANK_GUARD));
    }

    #[test]
    fn square_is_non_primitive_and_graph_certified() {
        let a1 = Alphabet::new(["a1"]).unwrap();
        let word = w("a1 a1", &a1);
        let outcome = is_primitive(&word, &a1).unwrap();
        assert!(!outcome.primitive);
        // The square's graph is a doubled edge with no cut vertex, so both
        // certificates apply.
        assert_eq!(outcome.method(), "both");
    }

    #[test]
    fn undecided_beyond_guard_without_graph_certificate() {
        let names: Vec<String> = (1..=12).map(|i| format!("a{i}")).collect();
        let alphabet = Alphabet::new(names).unwrap();
        let word = w("a1 a2", &alphabet);
        let result = is_primitive(&word, &alphabet);
        assert!(matches!(result, Err(WhiteheadDecisionError::Undecided { rank: 12, guard: 11 })));
    }

    #[test]
    fn guard_exceeded_with_graph_certificate_still_decides() {
        let names: Vec<String> = (1..=12).map(|i| format!("a{i}")).collect();
        let alphabet = Alphabet::new(names).unwrap();
        // a1^2 has a 2-connected graph at any rank containing a1.
        let word = w("a1 a1", &alphabet);
        let outcome = is_primitive(&word, &alphabet).unwrap();
        assert!(!outcome.primitive);
        assert_eq!(outcome.method(), "graph");
    }

    #[test]
    fn corpus_small_cases() {
        let a = ab();
        let depth0 = nielsen_primitive_corpus(&a, 0, 8);
        assert_eq!(depth0.len(), 1);
        assert_eq!(depth0.iter().next().unwrap().to_word(), w("a1", &a));

        let depth1 = nielsen_primitive_corpus(&a, 1, 8);
        let inv = cyclic_reduce(&w("A1", &a)).0;
        let prod = cyclic_reduce(&w("a1 a2", &a)).0;
        assert!(depth1.contains(&inv));
        assert!(depth1.contains(&prod));
    }

    #[test]
    fn corpus_rank2_agrees_with_descent() {
        let a = ab();
        for c in nielsen_primitive_corpus(&a, 5, 8) {
            if c.is_empty() {
                continue;
            }
            let outcome = is_primitive(&c.to_word(), &a).unwrap();
            assert!(outcome.primitive, "corpus word {} must be primitive", c.display(&a));
        }
    }
}
