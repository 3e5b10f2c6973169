//! Direct-sum verification, bounded decomposition search and link certificates.
//!
//! A decomposition is given by two lists of vectors whose union is a rational
//! basis. The summands are the intersections of the stage group with the two
//! rational spans; the split holds at stage `s` iff both projections of every
//! stage-`s` generator lie in the stage group.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Rational, SpanSolver};
use crate::presentation::{
    height_from_coordinates, BasisIndex, Construction, Element, StageHeight, StagedPresentation, Word,
};
use crate::typesystem::{strictly_maximal, MaximalityEvidence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SummandPair {
    pub a: Vec<Element>,
    pub b: Vec<Element>,
}

impl SummandPair {
    pub fn new(a: Vec<Element>, b: Vec<Element>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Input("both summand bases must be nonempty".into()));
        }
        Ok(Self { a, b })
    }

    pub fn combined(&self) -> Vec<Element> {
        self.a.iter().chain(&self.b).cloned().collect()
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// Splits elements along `A ⊕ B` over the rationals.
pub struct Projector {
    basis: Vec<BasisIndex>,
    pair: SummandPair,
    solver: SpanSolver,
}

impl Projector {
    pub fn new(basis: &[BasisIndex], pair: &SummandPair) -> Result<Self> {
        let vectors = pair
            .combined()
            .iter()
            .map(|e| e.to_dense(basis))
            .collect::<Result<Vec<_>>>()?;
        let solver = SpanSolver::new(&vectors, basis.len())?;
        if !solver.is_independent() {
            return Err(Error::Input("summand bases are linearly dependent".into()));
        }
        Ok(Self {
            basis: basis.to_vec(),
            pair: pair.clone(),
            solver,
        })
    }

    /// `(g_A, g_B)` with `g = g_A + g_B`.
    pub fn project(&self, g: &Element) -> Result<(Element, Element)> {
        let q = self.solver.solve(&g.to_dense(&self.basis)?)?.ok_or(Error::OutsideSpan)?;
        let k = self.pair.a.len();
        let part = |vs: &[Element], qs: &[Rational]| {
            vs.iter()
                .zip(qs)
                .fold(Element::zero(), |acc, (v, q)| &acc + &v.scale(q))
        };
        Ok((part(&self.pair.a, &q[..k]), part(&self.pair.b, &q[k..])))
    }
}

/// Do both projections of `g` lie in the stage-`s` group?
pub fn projection_property(p: &StagedPresentation, s: usize, pair: &SummandPair, g: &Element) -> Result<bool> {
    let (ga, gb) = Projector::new(p.basis(), pair)?.project(g)?;
    Ok(p.member(s, &ga)? && p.member(s, &gb)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisVerdict {
    pub independent: bool,
    pub spans: bool,
    pub first_unspanned: Option<Element>,
}

impl BasisVerdict {
    pub fn pass(&self) -> bool {
        self.independent && self.spans
    }
}

/// Independence over the rationals, and every stage-`s` generator in the span.
pub fn is_basis(p: &StagedPresentation, s: usize, candidate: &[Element]) -> Result<BasisVerdict> {
    let vectors = candidate.iter().map(|e| p.dense(e)).collect::<Result<Vec<_>>>()?;
    let solver = SpanSolver::new(&vectors, p.rank())?;
    if !solver.is_independent() || candidate.is_empty() {
        return Ok(BasisVerdict {
            independent: false,
            spans: false,
            first_unspanned: None,
        });
    }
    for g in p.gen_at(s)? {
        if solver.solve(&p.dense(&g.element)?)?.is_none() {
            return Ok(BasisVerdict {
                independent: true,
                spans: false,
                first_unspanned: Some(g.element.clone()),
            });
        }
    }
    Ok(BasisVerdict {
        independent: true,
        spans: true,
        first_unspanned: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { generator: Element, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionCertificate {
    pub pair: SummandPair,
    pub stage: usize,
    pub checked_generators: usize,
    pub skipped_generators: usize,
    pub excluded: Vec<BasisIndex>,
    pub verdict: Verdict,
}

impl DecompositionCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn verify_direct_sum(p: &StagedPresentation, s: usize, pair: &SummandPair) -> Result<DecompositionCertificate> {
    verify_direct_sum_excluding(p, s, pair, &[])
}

/// As [`verify_direct_sum`], over the basis with `excluded` removed; stage
/// generators touching an excluded index are skipped and counted.
pub fn verify_direct_sum_excluding(
    p: &StagedPresentation,
    s: usize,
    pair: &SummandPair,
    excluded: &[BasisIndex],
) -> Result<DecompositionCertificate> {
    let gens = p.gen_at(s)?;
    let excluded_set: BTreeSet<&BasisIndex> = excluded.iter().collect();
    let basis: Vec<BasisIndex> = p.basis().iter().filter(|b| !excluded_set.contains(b)).cloned().collect();
    let mut cert = DecompositionCertificate {
        pair: pair.clone(),
        stage: s,
        checked_generators: 0,
        skipped_generators: 0,
        excluded: excluded.to_vec(),
        verdict: Verdict::Pass,
    };
    let fail = |generator: &Element, reason: String| Verdict::Fail {
        generator: generator.clone(),
        reason,
    };
    let combined = pair.combined();
    if combined.len() != basis.len() {
        cert.verdict = fail(
            &Element::zero(),
            format!("{} basis vectors for rank {}", combined.len(), basis.len()),
        );
        return Ok(cert);
    }
    let projector = match Projector::new(&basis, pair) {
        Ok(pr) => pr,
        Err(e) => {
            cert.verdict = fail(&Element::zero(), e.to_string());
            return Ok(cert);
        }
    };
    for v in &combined {
        if !p.member(s, v)? {
            cert.verdict = fail(v, "summand basis vector is not in the group".into());
            return Ok(cert);
        }
    }
    for g in gens {
        if g.element.support().any(|b| excluded_set.contains(b)) {
            cert.skipped_generators += 1;
            continue;
        }
        cert.checked_generators += 1;
        let (ga, gb) = projector.project(&g.element)?;
        for (part, side) in [(&ga, "A"), (&gb, "B")] {
            if !p.member(s, part)? {
                cert.verdict = fail(&g.element, format!("{side}-projection {part} is not in the group"));
                return Ok(cert);
            }
        }
    }
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkEdge {
    pub u: usize,
    pub v: usize,
    pub prime: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkGraph {
    pub nodes: Vec<Element>,
    pub edges: Vec<LinkEdge>,
}

impl LinkGraph {
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.u == i {
                Some((e.v, e.prime))
            } else if e.v == i {
                Some((e.u, e.prime))
            } else {
                None
            }
        })
    }

    /// BFS spanning tree from node 0, or `None` if disconnected.
    pub fn spanning_tree(&self) -> Option<Vec<LinkEdge>> {
        if self.nodes.is_empty() {
            return Some(Vec::new());
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut tree = Vec::new();
        while let Some(i) = queue.pop_front() {
            let mut next: Vec<(usize, u64)> = self.neighbours(i).filter(|&(j, _)| !seen[j]).collect();
            next.sort();
            next.dedup_by_key(|x| x.0);
            for (j, prime) in next {
                if !seen[j] {
                    seen[j] = true;
                    tree.push(LinkEdge { u: i, v: j, prime });
                    queue.push_back(j);
                }
            }
        }
        seen.iter().all(|&x| x).then_some(tree)
    }
}

/// Edge `(u, v, p)` iff `p` divides `u + v` but neither `u` nor `v` at stage `s`.
pub fn find_links(p: &StagedPresentation, s: usize, nodes: &[Element], primes: &[u64]) -> Result<LinkGraph> {
    let lattice = p.stage_lattice(s)?;
    let coords = nodes
        .iter()
        .map(|e| {
            lattice
                .coordinates(&p.dense(e)?)
                .ok_or_else(|| Error::NotInGroup(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let divisible = |c: &[BigInt], q: u64| {
        c.iter().any(|x| !x.is_zero()) && height_from_coordinates(c, q, 1) == StageHeight::Cap
    };
    let pairs: Vec<(usize, usize)> = (0..nodes.len())
        .flat_map(|i| (i + 1..nodes.len()).map(move |j| (i, j)))
        .collect();
    let edges = pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let sum: Vec<BigInt> = coords[i].iter().zip(&coords[j]).map(|(a, b)| a + b).collect();
            let (ci, cj) = (&coords[i], &coords[j]);
            primes
                .iter()
                .filter(move |&&q| divisible(&sum, q) && !divisible(ci, q) && !divisible(cj, q))
                .map(move |&q| LinkEdge { u: i, v: j, prime: q })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(LinkGraph {
        nodes: nodes.to_vec(),
        edges,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndecompCertificate {
    pub nodes: Vec<Element>,
    pub edges: Vec<LinkEdge>,
    pub spanning_tree: Vec<LinkEdge>,
    pub maximality: Vec<MaximalityEvidence>,
    pub stage: usize,
    pub witness_bound: u32,
}

/// Outcome of [`indecomposable_by_links`]; the certificate is present iff
/// every basis element passed the bounded maximality check and the link
/// graph is connected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndecompOutcome {
    pub certificate: Option<IndecompCertificate>,
    pub not_maximal: Vec<BasisIndex>,
    pub connected: bool,
}

pub fn indecomposable_by_links(p: &StagedPresentation, s: usize, witness_bound: u32) -> Result<IndecompOutcome> {
    let maximality = p
        .basis()
        .par_iter()
        .map(|b| strictly_maximal(p, b, witness_bound, s))
        .collect::<Result<Vec<_>>>()?;
    let not_maximal: Vec<BasisIndex> = maximality
        .iter()
        .filter(|m| !m.strictly_maximal)
        .map(|m| m.element.clone())
        .collect();
    let graph = find_links(p, s, &p.basis_elements(), &p.primes_at(s)?)?;
    let tree = graph.spanning_tree();
    let connected = tree.is_some();
    let certificate = match tree {
        Some(spanning_tree) if not_maximal.is_empty() => Some(IndecompCertificate {
            nodes: graph.nodes,
            edges: graph.edges,
            spanning_tree,
            maximality,
            stage: s,
            witness_bound,
        }),
        _ => None,
    };
    Ok(IndecompOutcome {
        certificate,
        not_maximal,
        connected,
    })
}

/// Result of a bounded search; `found == None` is a refutation relative to
/// the bound and stage only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub found: Option<SummandPair>,
    pub stage: usize,
    pub bound: u32,
    pub family: &'static str,
    pub candidates: usize,
}

/// Coefficients in search order: `0, 1, -1, 2, -2, …`.
fn coefficient_order(bound: i64) -> Vec<i64> {
    std::iter::once(0).chain((1..=bound).flat_map(|c| [c, -c])).collect()
}

/// Primitive integer vectors with entries in `[-bound, bound]` and positive
/// first nonzero entry, in lexicographic search order.
fn primitive_vectors(dim: usize, bound: i64) -> Vec<Vec<i64>> {
    let order = coefficient_order(bound);
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                order.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.into_iter()
        .filter(|v| {
            let first = v.iter().find(|&&c| c != 0);
            first.is_some_and(|&c| c > 0) && v.iter().fold(0i64, |g, &c| num_integer::gcd(g, c)) == 1
        })
        .collect()
}

/// Canonical reduced row echelon form of the span of `rows`.
fn span_key(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| Rational::from_integer(c.into())).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut lead = 0;
    for col in 0..cols {
        let Some(piv) = (lead..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(lead, piv);
        let inv = m[lead][col].recip();
        m[lead].iter_mut().for_each(|x| *x = &*x * &inv);
        let pivot = m[lead].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != lead && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        lead += 1;
    }
    m.truncate(lead);
    m
}

/// Distinct `k`-dimensional subspaces spanned by `k` of the vectors, each with
/// its lexicographically first spanning set.
fn subspaces(vectors: &[Vec<i64>], k: usize) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > vectors.len() {
        return out;
    }
    loop {
        let rows: Vec<Vec<i64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let key = span_key(&rows);
        if key.len() == k && seen.insert(format!("{key:?}")) {
            out.push(idx.clone());
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < vectors.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn to_element(basis: &[BasisIndex], v: &[i64]) -> Element {
    Element::from_terms(
        basis
            .iter()
            .zip(v)
            .map(|(b, &c)| (b.clone(), Rational::from_integer(c.into()))),
    )
}

/// Bounded search over pairs of integer bases with entries in
/// `[-coeff_bound, coeff_bound]`, ordered by the size of the first summand,
/// then lexicographically by coefficients. Rank at most 4.
pub fn search_decomposition(p: &StagedPresentation, s: usize, coeff_bound: u32) -> Result<SearchOutcome> {
    let n = p.rank();
    if n > 4 {
        return Err(Error::Unsupported(format!("search needs rank <= 4, got {n}")));
    }
    let mut outcome = SearchOutcome {
        found: None,
        stage: s,
        bound: coeff_bound,
        family: "integer bases",
        candidates: 0,
    };
    if n < 2 {
        return Ok(outcome);
    }
    p.stage_lattice(s)?;
    let vectors = primitive_vectors(n, coeff_bound as i64);
    let elements: Vec<Element> = vectors.iter().map(|v| to_element(p.basis(), v)).collect();
    for k in 1..=n / 2 {
        let a_spaces = subspaces(&vectors, k);
        let b_spaces = if n - k == k { a_spaces.clone() } else { subspaces(&vectors, n - k) };
        let candidates: Vec<(usize, usize)> = (0..a_spaces.len())
            .flat_map(|i| (0..b_spaces.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| n - k != k || i < j)
            .collect();
        outcome.candidates += candidates.len();
        let check = |&(i, j): &(usize, usize)| -> Option<SummandPair> {
            let pair = SummandPair {
                a: a_spaces[i].iter().map(|&x| elements[x].clone()).collect(),
                b: b_spaces[j].iter().map(|&x| elements[x].clone()).collect(),
            };
            let cert = verify_direct_sum(p, s, &pair).ok()?;
            // equal sizes: report the later space first
            cert.passed().then(|| if 2 * k == n { pair.swapped() } else { pair })
        };
        if let Some(pair) = candidates.par_iter().find_map_first(check) {
            outcome.found = Some(pair);
            return Ok(outcome);
        }
    }
    Ok(outcome)
}

/// Bounded search for a tree-shaped decomposition of a tree group: `A`
/// spanned by every x-element, `B` by `b_j = y_j + Σ c_σ x_σ` over the
/// level-`j` words, `1 <= j <= depth`, with `c_σ ∈ [-bound, bound]`. `y_i`
/// beyond the depth are excluded. Levels are fixed one at a time and checked
/// against the generators whose largest `y` index is that level.
pub fn search_tree_decomposition(p: &StagedPresentation, s: usize, bound: u32) -> Result<SearchOutcome> {
    let (Construction::Tree { truncation: t, .. } | Construction::InfiniteBase { truncation: t }) = p.label() else {
        return Err(Error::Input("tree-shaped search needs a tree group".into()));
    };
    let depth = t.depth;
    let excluded: BTreeSet<BasisIndex> = (depth + 1..=t.n_max).map(BasisIndex::Y).collect();
    let words = t.words();
    let levels: Vec<Vec<Word>> = (1..=depth as usize)
        .map(|j| words.iter().filter(|w| w.len() == j).cloned().collect())
        .collect();
    let mut by_level: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
    for g in p.gen_at(s)? {
        if g.element.support().any(|b| excluded.contains(b)) {
            continue;
        }
        let top = g.element.support().filter_map(|b| match b {
            BasisIndex::Y(j) => Some(*j),
            _ => None,
        });
        if let Some(j) = top.max() {
            by_level.entry(j).or_default().push(g.element.clone());
        }
    }
    let order = coefficient_order(bound as i64);
    let mut outcome = SearchOutcome {
        found: None,
        stage: s,
        bound,
        family: "tree-shaped bases",
        candidates: 0,
    };

    // split g along the current b_1..b_j: B-part = Σ g[y_i] b_i
    let splits = |bs: &[Element], g: &Element| -> Result<bool> {
        let mut b_part = Element::zero();
        for (i, b) in bs.iter().enumerate() {
            let c = g.coeff(&BasisIndex::Y(i as u32 + 1));
            if !c.is_zero() {
                b_part = &b_part + &b.scale(&c);
            }
        }
        let a_part = g - &b_part;
        Ok(p.member(s, &a_part)? && p.member(s, &b_part)?)
    };

    fn assignments(order: &[i64], len: usize) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v| {
                    order.iter().map(move |&c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    let level_options: Vec<Vec<Element>> = levels
        .iter()
        .enumerate()
        .map(|(j, ws)| {
            assignments(&order, ws.len())
                .into_iter()
                .map(|cs| {
                    let mut b = Element::basis(BasisIndex::Y(j as u32 + 1));
                    for (w, c) in ws.iter().zip(cs) {
                        b.add_term(BasisIndex::XSigma(w.clone()), Rational::from_integer(c.into()));
                    }
                    b
                })
                .collect()
        })
        .collect();

    let mut stack: Vec<Element> = Vec::new();
    let mut cursor = vec![0usize; levels.len()];
    let mut level = 0usize;
    'search: loop {
        if level == levels.len() {
            let a: Vec<Element> = p
                .basis()
                .iter()
                .filter(|b| b.is_x_element())
                .cloned()
                .map(Element::basis)
                .collect();
            outcome.found = Some(SummandPair::new(a, stack.clone())?);
            return Ok(outcome);
        }
        while cursor[level] < level_options[level].len() {
            let b = level_options[level][cursor[level]].clone();
            cursor[level] += 1;
            outcome.candidates += 1;
            stack.push(b);
            let gens = by_level.get(&(level as u32 + 1)).map_or(&[][..], Vec::as_slice);
            let ok = gens
                .par_iter()
                .map(|g| splits(&stack, g))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|x| x);
            if ok {
                level += 1;
                if level < levels.len() {
                    cursor[level] = 0;
                }
                continue 'search;
            }
            stack.pop();
        }
        if level == 0 {
            return Ok(outcome);
        }
        level -= 1;
        stack.pop();
    }
}

/// `m | x ⇒ m | a ∧ m | b` at stage `s`, for `x = a + b`.
pub fn divisibility_split_check(
    p: &StagedPresentation,
    s: usize,
    x: &Element,
    a: &Element,
    b: &Element,
    m: &BigInt,
) -> Result<bool> {
    if &(a + b) != x {
        return Err(Error::Input(format!("{x} is not {a} + {b}")));
    }
    if !m.is_positive() {
        return Err(Error::Input("m must be positive".into()));
    }
    let divides = |e: &Element| p.divides_by(s, m, e);
    Ok(!divides(x)? || (divides(a)? && divides(b)?))
}
