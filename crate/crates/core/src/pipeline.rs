//! End-to-end verification pipeline for the word family `w_k`.
//!
//! For each `k >= 1`, `w_k` lives in the free group of rank `2k+1` on
//! `a1..a2k, g`: the triples `a_i a_(i+1) a_i` for `i = 1..2k-1` followed
//! by `a_2k g a_1 g^-1 a_2k g`. The report assembles, with exact
//! arithmetic: abelianization and its gcd test, Whitehead-graph
//! classification, primitivity certificates, the exact preimage-diameter
//! bound of the loop `f_k`, surjectivity, and the identity between the
//! traced loop word and `w_k`.

use serde::Serialize;
use thiserror::Error;

use crate::free_group::{
    abelianize, cyclic_reduce, free_reduce, homology_primitive, Alphabet, FreeGroupError, Letter,
    Word,
};
use crate::metric_geometry::{
    build_fk, epsilon, find_k_for_epsilon, fraction_to_radians, gk_canonical_tree, is_surjective,
    trace_word, EpsilonReport, MetricGeometryError, Rat,
};
use crate::whitehead_decision::{
    is_primitive, DescentTrace, PrimitivityCertificate, PrimitivityOutcome,
    WhiteheadDecisionError,
};
use crate::whitehead_graph::{build_whitehead_graph, classify, WhiteheadGraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
    #[error(transparent)]
    Decision(#[from] WhiteheadDecisionError),
    #[error(transparent)]
    Geometry(#[from] MetricGeometryError),
    #[error(transparent)]
    Graph(#[from] WhiteheadGraphError),
}

/// Alphabet `a1..a2k, g` of rank `2k+1`.
pub fn wk_alphabet(k: usize) -> Result<Alphabet, PipelineError> {
    if k < 1 {
        return Err(PipelineError::InvalidK);
    }
    let mut names: Vec<String> = (1..=2 * k).map(|i| format!("a{i}")).collect();
    names.push("g".to_string());
    Ok(Alphabet::new(names)?)
}

/// The word `w_k` together with its alphabet. The result has length
/// `6k + 3` and is cyclically reduced as written.
pub fn gen_wk(k: usize) -> Result<(Alphabet, Word), PipelineError> {
    let alphabet = wk_alphabet(k)?;
    let gamma = 2 * k;
    let mut letters = Vec::with_capacity(6 * k + 3);
    for i in 1..2 * k {
        letters.push(Letter::positive(i - 1));
        letters.push(Letter::positive(i));
        letters.push(Letter::positive(i - 1));
    }
    letters.extend([
        Letter::positive(2 * k - 1),
        Letter::positive(gamma),
        Letter::positive(0),
        Letter::negative(gamma),
        Letter::positive(2 * k - 1),
        Letter::positive(gamma),
    ]);
    let word = free_reduce(letters);
    debug_assert_eq!(word.len(), 6 * k + 3);
    Ok((alphabet, word))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutJson {
    pub multiplier: String,
    pub support: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStepJson {
    pub aut: AutJson,
    pub result: String,
    pub length: usize,
}

/// One certificate in the report's `certificates` array.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub verdict: String,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStepJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_word: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_status: Option<String>,
}

fn trace_json(trace: &DescentTrace, alphabet: &Alphabet) -> Vec<TraceStepJson> {
    trace
        .steps
        .iter()
        .map(|step| TraceStepJson {
            aut: AutJson {
                multiplier: step.aut.multiplier().display(alphabet),
                support: step
                    .aut
                    .support_letters()
                    .iter()
                    .map(|l| l.display(alphabet))
                    .collect(),
            },
            result: step.result.display(alphabet),
            length: step.length,
        })
        .collect()
}

pub fn certificate_json(
    cert: &PrimitivityCertificate,
    verdict_primitive: bool,
    alphabet: &Alphabet,
) -> CertificateJson {
    let verdict = if verdict_primitive { "primitive" } else { "non_primitive" }.to_string();
    match cert {
        PrimitivityCertificate::Primitive { trace } => CertificateJson {
            verdict,
            method: "descent".to_string(),
            trace: Some(trace_json(trace, alphabet)),
            minimal_word: None,
            graph_status: None,
        },
        PrimitivityCertificate::NonPrimitiveMinimal { minimal, trace, .. } => CertificateJson {
            verdict,
            method: "descent".to_string(),
            trace: Some(trace_json(trace, alphabet)),
            minimal_word: Some(minimal.display(alphabet)),
            graph_status: None,
        },
        PrimitivityCertificate::NonPrimitiveGraph { .. } => CertificateJson {
            verdict,
            method: "graph".to_string(),
            trace: None,
            minimal_word: None,
            graph_status: Some("two_connected".to_string()),
        },
    }
}

/// Single-object serialization of a whole outcome, merging the descent
/// and graph evidence; `method` becomes `"both"` when both ran.
pub fn outcome_json(outcome: &PrimitivityOutcome, alphabet: &Alphabet) -> serde_json::Value {
    let mut trace = None;
    let mut minimal_word = None;
    let mut graph_status = None;
    for cert in &outcome.certificates {
        match cert {
            PrimitivityCertificate::Primitive { trace: t } => {
                trace = Some(trace_json(t, alphabet));
            }
            PrimitivityCertificate::NonPrimitiveMinimal { minimal, trace: t, .. } => {
                trace = Some(trace_json(t, alphabet));
                minimal_word = Some(minimal.display(alphabet));
            }
            PrimitivityCertificate::NonPrimitiveGraph { .. } => {
                graph_status = Some("two_connected".to_string());
            }
        }
    }
    let merged = CertificateJson {
        verdict: if outcome.primitive { "primitive" } else { "non_primitive" }.to_string(),
        method: outcome.method().to_string(),
        trace,
        minimal_word,
        graph_status,
    };
    serde_json::to_value(merged).expect("certificate serialization cannot fail")
}

/// Everything the pipeline establishes about one `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub k: usize,
    pub word: String,
    pub length: usize,
    pub abelianization: Vec<i64>,
    pub homology_primitive: bool,
    pub graph_status: String,
    pub primitive: bool,
    pub certificates: Vec<CertificateJson>,
    pub epsilon: EpsilonReport,
    pub surjective: bool,
    pub trace_matches: bool,
}

impl VerificationReport {
    pub fn epsilon_fraction(&self) -> Rat {
        Rat::new(self.epsilon.num, self.epsilon.den)
    }
}

/// Run the full pipeline for one `k`.
pub fn verify(k: usize) -> Result<VerificationReport, PipelineError> {
    let (alphabet, word) = gen_wk(k)?;
    let ab = abelianize(&word, &alphabet);
    let hp = homology_primitive(&ab);

    let (cyclic, _) = cyclic_reduce(&word);
    let graph = build_whitehead_graph(&cyclic, &alphabet);
    let status = classify(&graph)?;

    let outcome = is_primitive(&word, &alphabet)?;
    let certificates = outcome
        .certificates
        .iter()
        .map(|c| certificate_json(c, outcome.primitive, &alphabet))
        .collect();

    let lp = build_fk(k)?;
    let eps = epsilon(&lp);
    let surjective = is_surjective(&lp);
    let tree = gk_canonical_tree(lp.graph(), k)?;
    let traced = trace_word(&lp, &tree, &alphabet)?;

    Ok(VerificationReport {
        k,
        word: word.display(&alphabet),
        length: word.len(),
        abelianization: ab.entries().to_vec(),
        homology_primitive: hp,
        graph_status: status.connectivity.label().to_string(),
        primitive: outcome.primitive,
        certificates,
        epsilon: EpsilonReport::from_fraction(eps),
        surjective,
        trace_matches: traced == word,
    })
}

/// Find the least `k` whose loop is an `eps`-map, then verify it.
/// `eps` is a fraction of the full circle.
pub fn verify_eps(eps: Rat) -> Result<VerificationReport, PipelineError> {
    let k = find_k_for_epsilon(eps)?;
    verify(k)
}

pub fn report_radians(report: &VerificationReport) -> f64 {
    fraction_to_radians(report.epsilon_fraction())
}
