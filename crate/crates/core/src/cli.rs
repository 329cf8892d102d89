//! Command-line front end.
//!
//! Subcommands: `genw`, `wgraph`, `primitive`, `epsilon`, `trace`,
//! `verify`. Exit codes: 0 on success, 2 for usage errors, 3 when
//! primitivity is undecided (enumeration guard exceeded with no graph
//! certificate). All diagnostics go to the error stream.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::free_group::{cyclic_reduce, parse_word, Alphabet};
use crate::metric_geometry::{
    build_fk, epsilon, fraction_to_chord, fraction_to_radians, gk_canonical_tree, trace_word, Rat,
};
use crate::pipeline::{gen_wk, outcome_json, verify, verify_eps, wk_alphabet, VerificationReport};
use crate::whitehead_decision::{is_primitive, PrimitivityCertificate, WhiteheadDecisionError};
use crate::whitehead_graph::{build_whitehead_graph, classify, Connectivity, WhiteheadGraphError};

const USAGE: &str = "whitehead — primitivity tests via Whitehead graphs and exact epsilon-map loops

USAGE:
  whitehead genw --k K
  whitehead wgraph --word W (--rank N | --alphabet NAMES) [--dot PATH] [--json]
  whitehead primitive --word W (--rank N | --alphabet NAMES) [--json]
  whitehead epsilon --k K [--chord]
  whitehead trace --k K
  whitehead verify (--k K | --eps NUM[/DEN]) [--json]

Words are space- or *-separated tokens; an uppercase-initial token is an
inverse (A1 = a1^-1) and ^ takes integer exponents. --rank N names the
generators a1..aN; --alphabet takes comma-separated names. --eps is a
fraction of the full circle (1 = 2*pi).

Exit codes: 0 success, 2 usage error, 3 undecided (enumeration guard
exceeded and no graph certificate applies).";

enum CliError {
    Usage(String),
    Undecided(String),
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run(args, out) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            let _ = writeln!(err, "{USAGE}");
            2
        }
        Err(CliError::Undecided(msg)) => {
            let _ = writeln!(err, "undecided: {msg}");
            3
        }
        Err(CliError::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

struct Flags {
    values: BTreeMap<String, String>,
    switches: BTreeSet<String>,
}

impl Flags {
    fn parse(
        args: &[String],
        value_flags: &[&str],
        switch_flags: &[&str],
    ) -> Result<Flags, CliError> {
        let mut values = BTreeMap::new();
        let mut switches = BTreeSet::new();
        let mut i = 0;
        while i < args.len() {
            let arg = args[i].as_str();
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("unexpected argument `{arg}`")))?;
            if value_flags.contains(&name) {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| CliError::Usage(format!("--{name} needs a value")))?;
                if values.insert(name.to_string(), value.clone()).is_some() {
                    return Err(CliError::Usage(format!("--{name} given twice")));
                }
                i += 2;
            } else if switch_flags.contains(&name) {
                switches.insert(name.to_string());
                i += 1;
            } else {
                return Err(CliError::Usage(format!("unknown flag `{arg}`")));
            }
        }
        Ok(Flags { values, switches })
    }

    fn value(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.value(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn switch(&self, name: &str) -> bool {
        self.switches.contains(name)
    }
}

fn parse_k(text: &str) -> Result<usize, CliError> {
    let k: usize = text
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid k `{text}`")))?;
    if k < 1 {
        return Err(CliError::Usage("k must be at least 1".to_string()));
    }
    Ok(k)
}

fn parse_fraction(text: &str) -> Result<Rat, CliError> {
    let bad = || CliError::Usage(format!("invalid fraction `{text}`; expected NUM or NUM/DEN"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: i64 = num.trim().parse().map_err(|_| bad())?;
    let den: i64 = den.trim().parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    let value = Rat::new(num, den);
    if value <= Rat::new(0, 1) {
        return Err(CliError::Usage("epsilon must be positive".to_string()));
    }
    Ok(value)
}

fn alphabet_from(flags: &Flags) -> Result<Alphabet, CliError> {
    if let Some(names) = flags.value("alphabet") {
        let names: Vec<&str> = names
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        return Alphabet::new(names).map_err(|e| CliError::Usage(e.to_string()));
    }
    let rank: usize = flags
        .require("rank")?
        .parse()
        .map_err(|_| CliError::Usage("invalid rank".to_string()))?;
    if rank < 1 {
        return Err(CliError::Usage("rank must be at least 1".to_string()));
    }
    let names: Vec<String> = (1..=rank).map(|i| format!("a{i}")).collect();
    Alphabet::new(names).map_err(|e| CliError::Usage(e.to_string()))
}

fn run(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing subcommand".to_string()));
    };
    let rest = &args[1..];
    match command.as_str() {
        "help" | "--help" | "-h" => {
            writeln!(out, "{USAGE}")?;
            Ok(())
        }
        "genw" => cmd_genw(rest, out),
        "wgraph" => cmd_wgraph(rest, out),
        "primitive" => cmd_primitive(rest, out),
        "epsilon" => cmd_epsilon(rest, out),
        "trace" => cmd_trace(rest, out),
        "verify" => cmd_verify(rest, out),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn cmd_genw(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["k"], &[])?;
    let k = parse_k(flags.require("k")?)?;
    let (alphabet, word) = gen_wk(k).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{}", word.display(&alphabet))?;
    Ok(())
}

fn cmd_wgraph(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["word", "rank", "alphabet", "dot"], &["json"])?;
    let alphabet = alphabet_from(&flags)?;
    let word = parse_word(flags.require("word")?, &alphabet)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (cyclic, _) = cyclic_reduce(&word);
    let graph = build_whitehead_graph(&cyclic, &alphabet);
    if let Some(path) = flags.value("dot") {
        std::fs::write(path, graph.to_dot())?;
    }
    if flags.switch("json") {
        writeln!(out, "{}", graph.to_json())?;
        return Ok(());
    }
    writeln!(out, "rank: {}", graph.rank())?;
    writeln!(out, "edges: {}", graph.edge_count())?;
    match classify(&graph) {
        Ok(status) => {
            match &status.connectivity {
                Connectivity::Disconnected { components } => {
                    writeln!(out, "status: disconnected ({} components)", components.len())?;
                }
                Connectivity::CutVertex { witness } => {
                    writeln!(out, "status: cut_vertex (witness {})", graph.vertex_name(*witness))?;
                }
                Connectivity::TwoConnected => writeln!(out, "status: two_connected")?,
            }
            if !status.isolated_generators.is_empty() {
                let names: Vec<&str> = status
                    .isolated_generators
                    .iter()
                    .map(|&g| alphabet.name(g))
                    .collect();
                writeln!(out, "unused generators: {}", names.join(" "))?;
            }
        }
        Err(WhiteheadGraphError::EmptyGraph) => writeln!(out, "status: empty")?,
    }
    for &(u, v) in graph.edges() {
        writeln!(out, "  {} -- {}", graph.vertex_name(u), graph.vertex_name(v))?;
    }
    Ok(())
}

fn cmd_primitive(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["word", "rank", "alphabet"], &["json"])?;
    let alphabet = alphabet_from(&flags)?;
    let word = parse_word(flags.require("word")?, &alphabet)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = match is_primitive(&word, &alphabet) {
        Ok(outcome) => outcome,
        Err(e @ WhiteheadDecisionError::Undecided { .. }) => {
            return Err(CliError::Undecided(e.to_string()));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    if flags.switch("json") {
        writeln!(out, "{}", outcome_json(&outcome, &alphabet))?;
        return Ok(());
    }
    writeln!(out, "verdict: {}", if outcome.primitive { "primitive" } else { "non_primitive" })?;
    writeln!(out, "method: {}", outcome.method())?;
    for cert in &outcome.certificates {
        match cert {
            PrimitivityCertificate::Primitive { trace }
            | PrimitivityCertificate::NonPrimitiveMinimal { trace, .. } => {
                if let PrimitivityCertificate::NonPrimitiveMinimal { minimal, .. } = cert {
                    writeln!(
                        out,
                        "minimal word: {} (length {})",
                        minimal.display(&alphabet),
                        minimal.len()
                    )?;
                }
                if trace.is_empty() {
                    writeln!(out, "trace: (empty)")?;
                } else {
                    writeln!(out, "trace:")?;
                    for (i, step) in trace.steps.iter().enumerate() {
                        let support: Vec<String> = step
                            .aut
                            .support_letters()
                            .iter()
                            .map(|l| l.display(&alphabet))
                            .collect();
                        writeln!(
                            out,
                            "  {}. multiplier {}, support {{{}}} -> {} (length {})",
                            i + 1,
                            step.aut.multiplier().display(&alphabet),
                            support.join(", "),
                            step.result.display(&alphabet),
                            step.length
                        )?;
                    }
                }
            }
            PrimitivityCertificate::NonPrimitiveGraph { .. } => {
                writeln!(out, "graph status: two_connected")?;
            }
        }
    }
    Ok(())
}

fn cmd_epsilon(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["k"], &["chord"])?;
    let k = parse_k(flags.require("k")?)?;
    let lp = build_fk(k).map_err(|e| CliError::Usage(e.to_string()))?;
    let eps = epsilon(&lp);
    writeln!(out, "epsilon(f_{k}) = {}/{} of 2pi", eps.numer(), eps.denom())?;
    writeln!(out, "radians: {}", fraction_to_radians(eps))?;
    if flags.switch("chord") {
        writeln!(out, "chord: {}", fraction_to_chord(eps))?;
    }
    Ok(())
}

fn cmd_trace(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["k"], &[])?;
    let k = parse_k(flags.require("k")?)?;
    let lp = build_fk(k).map_err(|e| CliError::Usage(e.to_string()))?;
    let tree = gk_canonical_tree(lp.graph(), k).map_err(|e| CliError::Usage(e.to_string()))?;
    let alphabet = wk_alphabet(k).map_err(|e| CliError::Usage(e.to_string()))?;
    let word = trace_word(&lp, &tree, &alphabet).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{}", word.display(&alphabet))?;
    Ok(())
}

fn cmd_verify(args: &[String], out: &mut dyn Write) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["k", "eps"], &["json"])?;
    let report = match (flags.value("k"), flags.value("eps")) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --k or --eps, not both".to_string()));
        }
        (Some(k), None) => verify(parse_k(k)?).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, Some(eps)) => {
            verify_eps(parse_fraction(eps)?).map_err(|e| CliError::Usage(e.to_string()))?
        }
        (None, None) => {
            return Err(CliError::Usage("verify needs --k or --eps".to_string()));
        }
    };
    if flags.switch("json") {
        let json = serde_json::to_string(&report)
            .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
        writeln!(out, "{json}")?;
        return Ok(());
    }
    print_report(&report, out)?;
    Ok(())
}

fn print_report(report: &VerificationReport, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "k: {}", report.k)?;
    writeln!(out, "word: {}", report.word)?;
    writeln!(out, "length: {}", report.length)?;
    writeln!(out, "abelianization: {:?}", report.abelianization)?;
    writeln!(out, "homology_primitive: {}", report.homology_primitive)?;
    writeln!(out, "graph_status: {}", report.graph_status)?;
    writeln!(out, "primitive: {}", report.primitive)?;
    let methods: Vec<&str> = report.certificates.iter().map(|c| c.method.as_str()).collect();
    writeln!(out, "certificates: {}", methods.join(", "))?;
    writeln!(
        out,
        "epsilon: {}/{} of 2pi = {} rad",
        report.epsilon.num, report.epsilon.den, report.epsilon.decimal
    )?;
    writeln!(out, "surjective: {}", report.surjective)?;
    writeln!(out, "trace_matches: {}", report.trace_matches)?;
    Ok(())
}
