use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

use tfag_core::constructions::{cofinite_summands, path_summands};
use tfag_core::decomposition::{
    indecomposable_by_links, search_decomposition, search_tree_decomposition, verify_direct_sum,
    verify_direct_sum_excluding, DecompositionCertificate, Verdict,
};
use tfag_core::presentation::Origin;
use tfag_core::typesystem::{strictly_maximal, structural_characteristic};
use tfag_core::{CeSetSpec, Construction, Element, PathSpec, Result, SummandPair, TreeSpec, TruncationParams};

use crate::{Args, Built, Kind};

pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Serialize)]
struct Bounds {
    bound: u32,
    witness_bound: u32,
    cap: u32,
}

/// One self-contained record per run.
#[derive(Serialize)]
pub struct Report {
    command: &'static str,
    construction: Construction,
    max_stage: usize,
    stage: usize,
    bounds: Bounds,
    basis: Vec<String>,
    certificates: Vec<Value>,
    verdict: &'static str,
    #[serde(skip)]
    lines: Vec<String>,
}

fn verdict_line(cert: &DecompositionCertificate) -> String {
    match &cert.verdict {
        Verdict::Pass => format!(
            "PASS: {} generators split at stage {} ({} skipped)",
            cert.checked_generators, cert.stage, cert.skipped_generators
        ),
        Verdict::Fail { generator, reason } => format!("FAIL at generator {generator}: {reason}"),
    }
}

fn pair_lines(pair: &SummandPair) -> Vec<String> {
    let show = |v: &[Element]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    vec![format!("  A = <{}>", show(&pair.a)), format!("  B = <{}>", show(&pair.b))]
}

fn rule(origin: &Origin) -> Option<(u64, String)> {
    match origin {
        Origin::Basis => None,
        Origin::Tower { prime, .. } => Some((*prime, "divisibility tower".into())),
        Origin::Link { prime, tag: Some(tag) } => Some((*prime, format!("link, tag {tag}"))),
        Origin::Link { prime, tag: None } => Some((*prime, "link".into())),
        Origin::Enumerated { value, prime } => Some((*prime, format!("enumerated value {value}"))),
        Origin::TreeStep { step, prime, .. } => Some((*prime, format!("tree step ({step})"))),
    }
}

impl Report {
    pub fn new(command: &'static str, built: &Built, args: &Args) -> Self {
        let g = &built.group;
        let mut lines = vec![format!(
            "{command} {}: rank {}, stages 0..={}, query stage {}",
            g.label().name(),
            g.rank(),
            g.max_stage(),
            built.stage
        )];
        match &built.kind {
            Kind::Cof(w) => lines.push(format!("W = {}", serde_json::to_string(w).unwrap())),
            Kind::Base(t) => lines.push(truncation_line(t)),
            Kind::Tree(tree, t) => {
                lines.push(truncation_line(t));
                lines.push(format!("tree = {}", serde_json::to_string(tree).unwrap()));
            }
            Kind::Fuchs | Kind::Free(_) => {}
        }
        Self {
            command,
            construction: g.label().clone(),
            max_stage: g.max_stage(),
            stage: built.stage,
            bounds: Bounds {
                bound: args.bound,
                witness_bound: args.witness_bound,
                cap: args.cap.unwrap_or(built.stage.max(1) as u32),
            },
            basis: g.basis().iter().map(ToString::to_string).collect(),
            certificates: Vec::new(),
            verdict: "pass",
            lines,
        }
    }

    fn finish(&mut self, pass: bool, verdict: &'static str) -> Outcome {
        self.verdict = verdict;
        self.lines.push(format!("verdict: {verdict}"));
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn build_summary(&mut self, built: &Built) -> Result<Outcome> {
        let g = &built.group;
        let counts: Vec<usize> = (0..=g.max_stage()).map(|s| g.gen_at(s).map(|v| v.len())).collect::<Result<_>>()?;
        let mut primes: BTreeMap<u64, String> = BTreeMap::new();
        for gen in g.all_generators() {
            if let Some((p, r)) = rule(&gen.origin) {
                primes.entry(p).or_insert(r);
            }
        }
        let mut by_node: BTreeMap<(usize, String), [usize; 4]> = BTreeMap::new();
        for gen in g.all_generators() {
            if let Origin::TreeStep { node, step, .. } = &gen.origin {
                by_node.entry((node.len(), node.to_string())).or_default()[*step as usize - 1] += 1;
            }
        }
        let steps: Vec<(String, [usize; 4])> = by_node.into_iter().map(|((_, n), c)| (n, c)).collect();
        self.lines.push(format!("basis ({}): {}", self.basis.len(), self.basis.join(" ")));
        for (s, n) in counts.iter().enumerate() {
            self.lines.push(format!("stage {s}: {n} generators"));
        }
        self.lines.push(format!("prime table ({} primes):", primes.len()));
        for (p, r) in &primes {
            self.lines.push(format!("  {p}: {r}"));
        }
        for (node, c) in &steps {
            self.lines.push(format!(
                "node {node}: step (1) {}, step (2) {}, step (3) {}, step (4) {}",
                c[0], c[1], c[2], c[3]
            ));
        }
        self.certificates.push(json!({
            "kind": "build",
            "generators_per_stage": counts,
            "primes": primes,
            "tree_steps": steps,
        }));
        Ok(self.finish(true, "built"))
    }

    pub fn characteristics(&mut self, built: &Built, args: &Args) -> Result<Outcome> {
        let g = &built.group;
        let s = built.stage;
        let cap = self.bounds.cap;
        let window: Vec<u64> = g.primes_at(s)?.into_iter().take(12).collect();
        let mut rows = Vec::new();
        for b in g.basis() {
            let chi = structural_characteristic(g.label(), b)?;
            let stage_chi = g.characteristic_at_stage(s, &Element::basis(b.clone()), &window, cap)?;
            let evidence = strictly_maximal(g, b, args.witness_bound, s)?;
            let shown: Vec<String> = window.iter().zip(&stage_chi).map(|(p, h)| format!("{p}:{h}")).collect();
            self.lines.push(format!("{b}: structural {chi}"));
            self.lines.push(format!("  stage {s}: {}", shown.join(" ")));
            self.lines.push(format!(
                "  strictly maximal: {} ({} candidates, {})",
                evidence.strictly_maximal, evidence.candidates_checked, evidence.caveat
            ));
            rows.push(json!({
                "element": b,
                "structural": chi.to_string(),
                "stage_characteristic": window.iter().zip(&stage_chi).map(|(p, h)| json!([p, h.to_string()])).collect::<Vec<_>>(),
                "maximality": evidence,
            }));
        }
        self.certificates.push(json!({ "kind": "characteristics", "primes": window, "elements": rows }));
        Ok(self.finish(true, "reported"))
    }

    pub fn search(&mut self, built: &Built, bound: u32) -> Result<Outcome> {
        let g = &built.group;
        let s = built.stage;
        let out = match built.kind {
            Kind::Tree(..) | Kind::Base(_) => search_tree_decomposition(g, s, bound)?,
            _ => search_decomposition(g, s, bound)?,
        };
        self.certificates.push(json!({ "kind": "search", "outcome": out }));
        match &out.found {
            Some(pair) => {
                self.lines.push(format!("found a decomposition ({}, {} candidates):", out.family, out.candidates));
                self.lines.extend(pair_lines(pair));
                Ok(self.finish(true, "found"))
            }
            None => {
                self.lines.push(format!(
                    "bounded refutation: no decomposition among {} with coefficients <= {bound} at stage {s} ({} candidates); not a proof of indecomposability",
                    out.family, out.candidates
                ));
                Ok(self.finish(false, "refuted"))
            }
        }
    }

    pub fn indecomposable(&mut self, built: &Built, witness_bound: u32) -> Result<Outcome> {
        let g = &built.group;
        let out = indecomposable_by_links(g, built.stage, witness_bound)?;
        let pass = out.certificate.is_some();
        if let Some(cert) = &out.certificate {
            self.lines.push(format!(
                "{} nodes, {} link edges, spanning tree:",
                cert.nodes.len(),
                cert.edges.len()
            ));
            for e in &cert.spanning_tree {
                self.lines.push(format!("  {} -- {} via {}", cert.nodes[e.u], cert.nodes[e.v], e.prime));
            }
            self.lines.push(format!("maximality: bounded-witness verification, witness bound {witness_bound}"));
        } else {
            if !out.not_maximal.is_empty() {
                let names: Vec<String> = out.not_maximal.iter().map(ToString::to_string).collect();
                self.lines.push(format!("not strictly maximal: {}", names.join(", ")));
            }
            if !out.connected {
                self.lines.push("link graph is disconnected".into());
            }
        }
        self.certificates.push(json!({ "kind": "indecomposable", "outcome": out }));
        Ok(self.finish(pass, if pass { "pass" } else { "fail" }))
    }

    fn decomposition(&mut self, cert: DecompositionCertificate, extra: Value) -> Outcome {
        self.lines.extend(pair_lines(&cert.pair));
        if !cert.excluded.is_empty() {
            let names: Vec<String> = cert.excluded.iter().map(ToString::to_string).collect();
            self.lines.push(format!("excluded: {}", names.join(", ")));
        }
        self.lines.push(verdict_line(&cert));
        let pass = cert.passed();
        self.certificates.push(json!({ "kind": "direct_sum", "certificate": cert, "witness": extra }));
        self.finish(pass, if pass { "pass" } else { "fail" })
    }

    pub fn cofinite_split(&mut self, built: &Built, w: &CeSetSpec) -> Result<Outcome> {
        let l = cofinite_summands(w, built.group.max_stage())?;
        self.lines.push(format!("m = {}, a = {}", l.m, l.a));
        let cert = verify_direct_sum(&built.group, built.stage, &l.pair)?;
        Ok(self.decomposition(cert, json!({ "m": l.m.to_string(), "a": l.a, "missing_primes": l.missing })))
    }

    pub fn pair(&mut self, built: &Built, pair: &SummandPair) -> Result<Outcome> {
        let cert = verify_direct_sum(&built.group, built.stage, pair)?;
        Ok(self.decomposition(cert, Value::Null))
    }

    pub fn path(&mut self, built: &Built, tree: &TreeSpec, path: &PathSpec, t: &TruncationParams) -> Result<Outcome> {
        let split = path_summands(tree, path, t)?;
        let cert = verify_direct_sum_excluding(&built.group, built.stage, &split.pair, &split.excluded)?;
        Ok(self.decomposition(cert, json!({ "path": path.0 })))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self, elapsed: Duration) -> String {
        let mut s = self.lines.join("\n");
        s.push_str(&format!("\ntime: {:.3}s\n", elapsed.as_secs_f64()));
        s
    }
}

fn truncation_line(t: &TruncationParams) -> String {
    format!(
        "truncation: n_max {}, depth {}, branch {}, stages {}",
        t.n_max, t.depth, t.branch, t.stages
    )
}
