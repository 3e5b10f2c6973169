//! Builders for the three group families and the decompositions known for them.
//!
//! * [`fuchs_group`]: the rank-2 indecomposable group with `x1/3^k`, `x2/5^k`
//!   and the link `(x1+x2)/2`.
//! * [`cof_group`]: the rank-2 groups indexed by a c.e. set `W`; decomposable
//!   exactly when `W` is cofinite.
//! * [`infinite_base_group`] / [`tree_group`]: a truncation of the
//!   infinite-rank group built from a tree, decomposable exactly when the tree
//!   has a path through the truncation.
//!
//! Schedules: tower generators `b/p^k` enter at stage `k`; every link, every
//! c.e.-set addition for index `k` (or trace step `k`) and every tree step
//! enters at stage `max(1, k)` or stage 1.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::decomposition::SummandPair;
use crate::error::{Error, Result};
use crate::lattice::Rational;
use crate::presentation::{
    BasisIndex, Construction, Element, Origin, PresentationBuilder, StagedPresentation, Word,
};
use crate::primes::{code_word, nth_prime, prime_for, PrimeAssignment};

/// Finite description of a c.e. set `W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeSetSpec {
    Finite(BTreeSet<u64>),
    CofiniteComplement(BTreeSet<u64>),
    /// `(step, value)` enumeration events.
    #[serde(rename = "trace")]
    StepTrace(Vec<(u64, u64)>),
}

impl CeSetSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: CeSetSpec = serde_json::from_str(text).map_err(|e| Error::Descriptor {
            line: e.line(),
            message: e.to_string(),
        })?;
        if let CeSetSpec::StepTrace(events) = &spec {
            let mut seen = BTreeSet::new();
            for (i, (_, value)) in events.iter().enumerate() {
                if !seen.insert(*value) {
                    return Err(Error::Descriptor {
                        line: nth_inner_array_line(text, i),
                        message: format!("value {value} enumerated twice"),
                    });
                }
            }
        }
        Ok(spec)
    }

    /// The `(stage, value)` pairs this set contributes, for values/steps up
    /// to `max_stage`.
    pub fn enumerated(&self, max_stage: usize) -> Vec<(usize, u64)> {
        let max = max_stage as u64;
        match self {
            CeSetSpec::Finite(set) => set
                .iter()
                .filter(|&&k| k <= max)
                .map(|&k| (k.max(1) as usize, k))
                .collect(),
            CeSetSpec::CofiniteComplement(missing) => (0..=max)
                .filter(|k| !missing.contains(k))
                .map(|k| (k.max(1) as usize, k))
                .collect(),
            CeSetSpec::StepTrace(events) => events
                .iter()
                .filter(|(step, _)| *step <= max)
                .map(|&(step, k)| (step.max(1) as usize, k))
                .collect(),
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        match self {
            CeSetSpec::Finite(set) => set.contains(&k),
            CeSetSpec::CofiniteComplement(missing) => !missing.contains(&k),
            CeSetSpec::StepTrace(events) => events.iter().any(|&(_, v)| v == k),
        }
    }
}

/// A finite prefix-closed set of words, with an enumeration order in which
/// every word follows its initial segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSpec {
    nodes: BTreeSet<Word>,
    order: Vec<Word>,
}

impl Serialize for TreeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let words: Vec<&Vec<u32>> = self.order.iter().map(|w| &w.0).collect();
        words.serialize(s)
    }
}

impl TreeSpec {
    pub fn empty() -> Self {
        Self {
            nodes: BTreeSet::new(),
            order: Vec::new(),
        }
    }

    /// Validates prefix closure and the enumeration order.
    pub fn from_words(words: Vec<Vec<u32>>) -> Result<Self> {
        Self::validate(words.into_iter().map(Word).collect(), |i| i + 1)
    }

    /// `{[], [0], [0,0], …}` up to length `depth`.
    pub fn chain(depth: usize) -> Self {
        Self::from_words((0..=depth).map(|n| vec![0; n]).collect()).unwrap()
    }

    fn validate(order: Vec<Word>, line_of: impl Fn(usize) -> usize) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        for (i, w) in order.iter().enumerate() {
            let fail = |message: String| Error::Descriptor {
                line: line_of(i),
                message,
            };
            if nodes.contains(w) {
                return Err(fail(format!("duplicate node {w}")));
            }
            if !w.is_empty() && !nodes.contains(&w.restrict(w.len() - 1)) {
                let parent = w.restrict(w.len() - 1);
                return Err(fail(if order.contains(&parent) {
                    format!("node {w} listed before its initial segment {parent}")
                } else {
                    format!("tree is not prefix-closed: {parent} missing for {w}")
                }));
            }
            nodes.insert(w.clone());
        }
        Ok(Self { nodes, order })
    }

    /// Parses `[[],[0],[0,0],[1]]`; errors carry the line of the offending entry.
    pub fn parse(text: &str) -> Result<Self> {
        let words: Vec<Vec<u32>> = serde_json::from_str(text).map_err(|e| Error::Descriptor {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::validate(words.into_iter().map(Word).collect(), |i| {
            nth_inner_array_line(text, i)
        })
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.nodes.contains(w)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in processing order: by length, then lexicographically.
    pub fn nodes(&self) -> impl Iterator<Item = &Word> {
        self.nodes.iter()
    }

    /// The order nodes were supplied in.
    pub fn enumeration_order(&self) -> &[Word] {
        &self.order
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Length of the longest node extending `w`, if `w` is in the tree.
    pub fn longest_extension(&self, w: &Word) -> Option<usize> {
        self.nodes
            .iter()
            .filter(|t| w.is_prefix_of(t))
            .map(Word::len)
            .max()
    }
}

/// Line (1-based) of the `i`-th array nested directly inside the outermost array.
fn nth_inner_array_line(text: &str, i: usize) -> usize {
    let mut depth = 0usize;
    let mut count = 0usize;
    let mut line = 1;
    let mut in_string = false;
    for c in text.chars() {
        match c {
            '\n' => line += 1,
            '"' => in_string = !in_string,
            '[' if !in_string => {
                depth += 1;
                if depth == 2 {
                    if count == i {
                        return line;
                    }
                    count += 1;
                }
            }
            ']' if !in_string => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    line
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSpec(pub Word);

impl PathSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<u32> = serde_json::from_str(text).map_err(|e| Error::Descriptor {
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(PathSpec(Word(v)))
    }
}

/// Cut-offs for the infinite-rank construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationParams {
    /// Largest `i` for `x_i`, `y_i`.
    pub n_max: u32,
    /// Largest `|σ|` for `x_σ`.
    pub depth: u32,
    /// Entries of `σ` are `< branch`.
    pub branch: u32,
    pub stages: usize,
}

impl TruncationParams {
    pub fn new(n_max: u32, depth: u32, branch: u32, stages: usize) -> Result<Self> {
        let t = Self {
            n_max,
            depth,
            branch,
            stages,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.depth == 0 || self.branch == 0 || self.stages == 0 {
            return Err(Error::Input("truncation parameters must be positive".into()));
        }
        if self.depth > self.n_max {
            return Err(Error::Input(format!(
                "depth {} exceeds n_max {}",
                self.depth, self.n_max
            )));
        }
        Ok(())
    }

    /// All `σ` with `|σ| <= depth` and entries `< branch`, in word order.
    pub fn words(&self) -> Vec<Word> {
        let mut out = vec![Word::default()];
        let mut frontier = vec![Word::default()];
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for w in &frontier {
                for m in 0..self.branch {
                    next.push(w.child(m));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn fits(&self, w: &Word) -> bool {
        w.len() <= self.depth as usize && w.0.iter().all(|&m| m < self.branch)
    }
}

fn x(i: u32) -> BasisIndex {
    BasisIndex::X(i)
}

fn y(i: u32) -> BasisIndex {
    BasisIndex::Y(i)
}

fn xs(w: &Word) -> BasisIndex {
    BasisIndex::XSigma(w.clone())
}

fn over(e: Element, p: u64, k: u32) -> Element {
    e.div_int(&BigInt::from(p).pow(k))
}

pub fn fuchs_group(stages: usize) -> Result<StagedPresentation> {
    if stages == 0 {
        return Err(Error::Input("stages must be >= 1".into()));
    }
    let mut b = PresentationBuilder::new(Construction::Fuchs, vec![x(1), x(2)], stages);
    b.push(
        over(Element::sum_of([x(1), x(2)]), 2, 1),
        1,
        Origin::Link { prime: 2, tag: None },
    );
    for k in 1..=stages as u32 {
        for (idx, p) in [(x(1), 3), (x(2), 5)] {
            b.push(
                over(Element::basis(idx), p, k),
                k as usize,
                Origin::Tower { prime: p, exponent: k },
            );
        }
    }
    b.finish()
}

/// `Z^rank` on `x1..x_rank`.
pub fn free_group(rank: u32, stages: usize) -> Result<StagedPresentation> {
    if rank == 0 {
        return Err(Error::Input("rank must be >= 1".into()));
    }
    PresentationBuilder::new(Construction::Free { rank }, (1..=rank).map(x).collect(), stages)
        .finish()
}

/// Generated by `g1, g2, (g1+g2)/2`, `g1/p_{2j+1}`, `g2/p_{2j+2}` and
/// `g2/p_{2k+1}` for each `k` enumerated into `W`.
pub fn cof_group(w: &CeSetSpec, stages: usize) -> Result<StagedPresentation> {
    if stages == 0 {
        return Err(Error::Input("stages must be >= 1".into()));
    }
    let g1 = BasisIndex::G1;
    let g2 = BasisIndex::G2;
    let mut b = PresentationBuilder::new(
        Construction::Cof { w: w.clone() },
        vec![g1.clone(), g2.clone()],
        stages,
    );
    b.push(
        over(Element::sum_of([g1.clone(), g2.clone()]), 2, 1),
        1,
        Origin::Link { prime: 2, tag: None },
    );
    for j in 0..=stages as u64 {
        let stage = j.max(1) as usize;
        let p_odd = nth_prime(2 * j + 1);
        let p_even = nth_prime(2 * j + 2);
        b.push(
            over(Element::basis(g1.clone()), p_odd, 1),
            stage,
            Origin::Tower { prime: p_odd, exponent: 1 },
        );
        b.push(
            over(Element::basis(g2.clone()), p_even, 1),
            stage,
            Origin::Tower { prime: p_even, exponent: 1 },
        );
    }
    for (stage, k) in w.enumerated(stages) {
        let p = nth_prime(2 * k + 1);
        b.push(
            over(Element::basis(g2.clone()), p, 1),
            stage,
            Origin::Enumerated { value: k, prime: p },
        );
    }
    b.finish()
}

/// Result of [`cofinite_summands`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CofiniteSplit {
    pub a: Element,
    pub m: BigInt,
    pub missing: Vec<u64>,
    pub pair: SummandPair,
}

/// `m` is the product of the primes dividing `g1` but not `g2` within the
/// truncation, `a = (g1 + m g2)/2`, and the pair is `({a}, {g2})`.
pub fn cofinite_summands(w: &CeSetSpec, stages: usize) -> Result<CofiniteSplit> {
    let CeSetSpec::CofiniteComplement(missing) = w else {
        return Err(Error::Input("cofinite summands need a cofinite W".into()));
    };
    let missing: Vec<u64> = missing
        .iter()
        .filter(|&&c| c <= stages as u64)
        .map(|&c| nth_prime(2 * c + 1))
        .collect();
    let m = missing
        .iter()
        .fold(BigInt::one(), |acc, &p| acc * BigInt::from(p));
    let mut a = Element::basis(BasisIndex::G1);
    a.add_term(BasisIndex::G2, Rational::from_integer(m.clone()));
    let a = a.scale(&Rational::new(1.into(), 2.into()));
    let pair = SummandPair::new(vec![a.clone()], vec![Element::basis(BasisIndex::G2)])?;
    Ok(CofiniteSplit { a, m, missing, pair })
}

pub fn p_tag(tag: u64, payload: u64) -> Result<u64> {
    prime_for(PrimeAssignment::new(tag, payload))
}

pub fn p_pair(tag: u64, i: u64, j: u64) -> Result<u64> {
    prime_for(PrimeAssignment::pair(tag, i, j))
}

/// Prime assignments used by the infinite-rank construction, by role.
pub mod tags {
    use super::*;

    pub fn x_tower(i: u32) -> Result<u64> {
        p_tag(0, i as u64)
    }
    pub fn y_tower(i: u32) -> Result<u64> {
        p_tag(1, i as u64)
    }
    pub fn sigma_tower(w: &Word) -> Result<u64> {
        p_tag(2, code_word(&w.0))
    }
    pub fn xx_link(i: u32, j: u32) -> Result<u64> {
        p_pair(3, i as u64, j as u64)
    }
    pub fn yy_link(i: u32, j: u32) -> Result<u64> {
        p_pair(4, i as u64, j as u64)
    }
    pub fn x_sigma_link(i: u32, w: &Word) -> Result<u64> {
        p_pair(5, i as u64, code_word(&w.0))
    }
    pub fn sigma_sigma_link(a: &Word, b: &Word) -> Result<u64> {
        p_pair(6, code_word(&a.0), code_word(&b.0))
    }
    pub fn y_partial_sum(n: u32) -> Result<u64> {
        p_tag(7, n as u64)
    }
    pub fn xy_link(i: u32) -> Result<u64> {
        p_tag(8, i as u64)
    }
}

fn base_basis(t: &TruncationParams) -> Vec<BasisIndex> {
    let mut basis: Vec<BasisIndex> = (1..=t.n_max).map(x).collect();
    basis.extend((1..=t.n_max).map(y));
    basis.extend(t.words().iter().map(xs));
    basis
}

fn push_base(b: &mut PresentationBuilder, t: &TruncationParams) -> Result<()> {
    let words = t.words();
    let link = |tag: u64, prime: u64| Origin::Link { prime, tag: Some(tag) };
    for k in 1..=t.stages as u32 {
        for i in 1..=t.n_max {
            let p = tags::x_tower(i)?;
            b.push(over(Element::basis(x(i)), p, k), k as usize, Origin::Tower { prime: p, exponent: k });
            let p = tags::y_tower(i)?;
            b.push(over(Element::basis(y(i)), p, k), k as usize, Origin::Tower { prime: p, exponent: k });
        }
        for w in &words {
            let p = tags::sigma_tower(w)?;
            b.push(over(Element::basis(xs(w)), p, k), k as usize, Origin::Tower { prime: p, exponent: k });
        }
    }
    for i in 1..=t.n_max {
        for j in i + 1..=t.n_max {
            let p = tags::xx_link(i, j)?;
            b.push(over(Element::sum_of([x(i), x(j)]), p, 1), 1, link(3, p));
            let p = tags::yy_link(i, j)?;
            b.push(over(Element::sum_of([y(i), y(j)]), p, 1), 1, link(4, p));
        }
    }
    for i in 1..=t.n_max {
        for w in &words {
            let p = tags::x_sigma_link(i, w)?;
            b.push(over(Element::sum_of([x(i), xs(w)]), p, 1), 1, link(5, p));
        }
    }
    for (ai, a) in words.iter().enumerate() {
        for c in &words[ai + 1..] {
            let (lo, hi) = if code_word(&a.0) < code_word(&c.0) { (a, c) } else { (c, a) };
            let p = tags::sigma_sigma_link(lo, hi)?;
            b.push(over(Element::sum_of([xs(lo), xs(hi)]), p, 1), 1, link(6, p));
        }
    }
    for n in 2..=t.n_max {
        let p = tags::y_partial_sum(n)?;
        b.push(over(Element::sum_of((1..=n).map(y)), p, 1), 1, link(7, p));
    }
    for i in 1..=t.n_max {
        let p = tags::xy_link(i)?;
        b.push(over(Element::sum_of([x(i), y(i)]), p, 1), 1, link(8, p));
    }
    Ok(())
}

/// The indecomposable group `G` (the base group plus the `x_i + y_i` links),
/// truncated by `t`.
pub fn infinite_base_group(t: &TruncationParams) -> Result<StagedPresentation> {
    t.validate()?;
    let mut b = PresentationBuilder::new(
        Construction::InfiniteBase { truncation: *t },
        base_basis(t),
        t.stages,
    );
    push_base(&mut b, t)?;
    b.finish()
}

/// `G_T`: the base group plus, for every node `σ` of `T` with `|σ| = n >= 1`,
/// the elements of steps (1)–(4).
pub fn tree_group(tree: &TreeSpec, t: &TruncationParams) -> Result<StagedPresentation> {
    t.validate()?;
    if let Some(w) = tree.nodes().find(|w| !t.fits(w)) {
        return Err(Error::Input(format!("tree node {w} exceeds the truncation")));
    }
    let mut b = PresentationBuilder::new(
        Construction::Tree {
            tree: tree.clone(),
            truncation: *t,
        },
        base_basis(t),
        t.stages,
    );
    push_base(&mut b, t)?;
    for sigma in tree.nodes() {
        let n = sigma.len() as u32;
        if n == 0 {
            continue;
        }
        for (step, first, second, prime) in tree_step_elements(sigma)? {
            let origin = |second_flag| Origin::TreeStep {
                node: sigma.clone(),
                step,
                second: second_flag,
                prime,
            };
            b.push(first, 1, origin(false));
            b.push(second, 1, origin(true));
        }
    }
    b.finish()
}

/// The pairs of elements steps (1)–(4) add for node `σ`, as
/// `(step, first, second, prime)`.
pub fn tree_step_elements(sigma: &Word) -> Result<Vec<(u8, Element, Element, u64)>> {
    let n = sigma.len() as u32;
    let mut out = Vec::new();
    let at = |i: u32| xs(&sigma.restrict(i as usize));
    for i in 1..=n {
        let p = tags::y_tower(i)?;
        out.push((
            1,
            over(Element::sum_of([y(i), at(i)]), p, n),
            over(Element::basis(at(i)), p, n),
            p,
        ));
    }
    for i in 1..n {
        let p = tags::yy_link(i, n)?;
        out.push((
            2,
            over(Element::sum_of([y(i), at(i), y(n), xs(sigma)]), p, 1),
            over(Element::sum_of([at(i), xs(sigma)]), p, 1),
            p,
        ));
    }
    let p = tags::xy_link(n)?;
    out.push((
        3,
        over(Element::sum_of([y(n), xs(sigma)]), p, 1),
        over(&Element::basis(x(n)) - &Element::basis(xs(sigma)), p, 1),
        p,
    ));
    if n >= 2 {
        let p = tags::y_partial_sum(n)?;
        out.push((
            4,
            over(Element::sum_of((1..=n).flat_map(|i| [y(i), at(i)])), p, 1),
            over(Element::sum_of((1..=n).map(at)), p, 1),
            p,
        ));
    }
    Ok(out)
}

/// A path decomposition together with the `y_i` left out of both bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathSplit {
    pub pair: SummandPair,
    pub excluded: Vec<BasisIndex>,
}

/// `A` = every x-element, `B` = `{y_i + x_{π↾i}}`. `π` must be a node of `T`
/// of length exactly `depth`; `y_i` for `depth < i <= n_max` are excluded.
pub fn path_summands(tree: &TreeSpec, path: &PathSpec, t: &TruncationParams) -> Result<PathSplit> {
    let pi = &path.0;
    if pi.len() != t.depth as usize {
        return Err(Error::Input(format!(
            "path {pi} must have length equal to the truncation depth {}",
            t.depth
        )));
    }
    if !tree.contains(pi) {
        return Err(Error::Input(format!("path {pi} is not a branch of the tree")));
    }
    let a: Vec<Element> = base_basis(t)
        .into_iter()
        .filter(BasisIndex::is_x_element)
        .map(Element::basis)
        .collect();
    let b: Vec<Element> = (1..=t.depth)
        .map(|i| Element::sum_of([y(i), xs(&pi.restrict(i as usize))]))
        .collect();
    let excluded = (t.depth + 1..=t.n_max).map(y).collect();
    Ok(PathSplit {
        pair: SummandPair::new(a, b)?,
        excluded,
    })
}

/// Both sides of the divisibility/congruence equivalence for one sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceOutcome {
    pub prime: u64,
    pub combination: Element,
    pub lattice_side: bool,
    pub congruence_side: bool,
}

impl CongruenceOutcome {
    pub fn agree(&self) -> bool {
        self.lattice_side == self.congruence_side
    }
}

/// Compares "`r` divides `Σ k_σ x_σ + Σ l_ρ x_ρ`" (lattice membership in the
/// tree group) against the congruences `c_σ ≡ Σ_{τ ∈ T, |τ| = level+1, τ ⪰ σ}
/// c_τ (mod r)` for every nonempty `σ` of length at most `level + 1`, where
/// `r = p_<7, level+1>` and `c` is the combined coefficient map.
pub fn congruence_system_check(
    p: &StagedPresentation,
    level: usize,
    upper: &BTreeMap<Word, i64>,
    lower: &BTreeMap<Word, i64>,
    s: usize,
) -> Result<CongruenceOutcome> {
    let Construction::Tree { tree, truncation } = p.label() else {
        return Err(Error::Input("congruence check needs a tree group".into()));
    };
    if level == 0 || level >= truncation.depth as usize {
        return Err(Error::Input(format!(
            "level {level} needs 1 <= level < depth {}",
            truncation.depth
        )));
    }
    for (w, want) in upper.keys().map(|w| (w, level)).chain(lower.keys().map(|w| (w, level + 1))) {
        if w.len() != want || !truncation.fits(w) {
            return Err(Error::Input(format!("coefficient for {w} does not sit on level {want}")));
        }
    }
    let r = tags::y_partial_sum(level as u32 + 1)?;
    let coeffs: BTreeMap<&Word, i64> = upper.iter().chain(lower.iter()).map(|(w, &c)| (w, c)).collect();
    let combination = Element::from_terms(
        coeffs
            .iter()
            .map(|(w, &c)| (xs(w), Rational::from_integer(c.into()))),
    );
    let lattice_side = p.divides(s, r, 1, &combination)?;

    let r_big = BigInt::from(r);
    let deepest: Vec<&Word> = tree.nodes().filter(|w| w.len() == level + 1).collect();
    let congruence_side = truncation
        .words()
        .iter()
        .filter(|w| !w.is_empty() && w.len() <= level + 1)
        .all(|w| {
            let c = coeffs.get(w).copied().unwrap_or(0);
            let rhs: i64 = deepest
                .iter()
                .filter(|tau| w.is_prefix_of(tau))
                .map(|tau| coeffs.get(tau).copied().unwrap_or(0))
                .sum();
            (BigInt::from(c) - BigInt::from(rhs)) % &r_big == BigInt::zero()
        });
    Ok(CongruenceOutcome {
        prime: r,
        combination,
        lattice_side,
        congruence_side,
    })
}

/// Reads the branch traced by a tree-shaped `B`: for each level `j`, the
/// words `σ` with `|σ| = j` carrying a nonzero coefficient in the basis
/// vector containing `y_j`. Returns a path choosing one such word per level,
/// each extending the previous, if one exists.
pub fn extract_path(pair: &SummandPair) -> Option<Vec<Word>> {
    let mut levels: BTreeMap<u32, Vec<Word>> = BTreeMap::new();
    for b in &pair.b {
        let ys: Vec<u32> = b
            .support()
            .filter_map(|i| match i {
                BasisIndex::Y(j) => Some(*j),
                _ => None,
            })
            .collect();
        let [j] = ys[..] else { return None };
        let words = b
            .support()
            .filter_map(|i| match i {
                BasisIndex::XSigma(w) if w.len() == j as usize => Some(w.clone()),
                _ => None,
            })
            .collect();
        levels.insert(j, words);
    }
    let depth = levels.keys().copied().take_while(|&j| !levels[&j].is_empty()).count();
    if depth == 0 {
        return None;
    }
    fn go(levels: &BTreeMap<u32, Vec<Word>>, j: u32, depth: u32, acc: &mut Vec<Word>) -> bool {
        if j > depth {
            return true;
        }
        for w in &levels[&j] {
            if acc.last().map_or(true, |prev| prev.is_prefix_of(w)) {
                acc.push(w.clone());
                if go(levels, j + 1, depth, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::new();
    go(&levels, 1, depth as u32, &mut acc).then_some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Element {
        s.parse().unwrap()
    }

    #[test]
    fn fuchs_stage_one_generators() {
        let g = fuchs_group(3).unwrap();
        let shown: Vec<String> = g.gen_at(1).unwrap().iter().map(|g| g.element.to_string()).collect();
        for want in ["1*x1", "1*x2", "1/2*x1 + 1/2*x2", "1/3*x1", "1/5*x2"] {
            assert!(shown.contains(&want.to_string()), "{want} missing from {shown:?}");
        }
        assert_eq!(fuchs_group(6).unwrap().gen_at(6).unwrap().len(), 15);
        assert!(fuchs_group(0).is_err());
    }

    #[test]
    fn fuchs_membership() {
        let g = fuchs_group(5).unwrap();
        assert!(g.member(2, &e("1/9*x1")).unwrap());
        assert!(!g.member(2, &e("1/9*x2")).unwrap());
        assert!(!g.member(5, &e("1/2*x1")).unwrap());
        assert!(g.member(1, &e("1/2*x1 + 1/2*x2")).unwrap());
        assert!(g.member(3, &Element::zero()).unwrap());
    }

    #[test]
    fn cof_empty_w_is_base_group() {
        let base = cof_group(&CeSetSpec::Finite(BTreeSet::new()), 6).unwrap();
        assert!(base.all_generators().iter().all(|g| !matches!(g.origin, Origin::Enumerated { .. })));
    }

    #[test]
    fn cof_cofinite_never_adds_three() {
        let w = CeSetSpec::CofiniteComplement([0].into());
        let g = cof_group(&w, 8).unwrap();
        for s in 0..=8 {
            assert!(!g.member(s, &e("1/3*g2")).unwrap());
        }
        assert!(g.member(8, &e("1/7*g2")).unwrap());
        assert!(g.member(8, &e("1/13*g2")).unwrap());
    }

    #[test]
    fn cof_finite_evens_leaves_odd_values_on_g1_only() {
        let w = CeSetSpec::Finite([0, 2, 4, 6, 8].into());
        let g = cof_group(&w, 10).unwrap();
        // p_3 = 7 (k = 1) and p_7 = 19 (k = 3) divide g1 but not g2
        for p in [7u64, 19] {
            assert!(g.divides(10, p, 1, &e("1*g1")).unwrap());
            assert!(!g.divides(10, p, 1, &e("1*g2")).unwrap());
        }
        assert!(g.divides(10, 3, 1, &e("1*g2")).unwrap());
    }

    #[test]
    fn trace_enumeration_respects_steps() {
        let w = CeSetSpec::StepTrace(vec![(3, 0), (1, 4)]);
        let g = cof_group(&w, 5).unwrap();
        assert!(!g.member(2, &e("1/3*g2")).unwrap());
        assert!(g.member(3, &e("1/3*g2")).unwrap());
        assert!(g.member(1, &BasisIndex::G2.pipe_div(nth_prime(9))).unwrap());
    }

    trait PipeDiv {
        fn pipe_div(self, p: u64) -> Element;
    }
    impl PipeDiv for BasisIndex {
        fn pipe_div(self, p: u64) -> Element {
            over(Element::basis(self), p, 1)
        }
    }

    #[test]
    fn cofinite_summand_values() {
        let l = cofinite_summands(&CeSetSpec::CofiniteComplement([0].into()), 10).unwrap();
        assert_eq!(l.m, BigInt::from(3));
        assert_eq!(l.a, e("1/2*g1 + 3/2*g2"));
        let l = cofinite_summands(&CeSetSpec::CofiniteComplement(BTreeSet::new()), 10).unwrap();
        assert_eq!(l.m, BigInt::from(1));
        assert_eq!(l.a, e("1/2*g1 + 1/2*g2"));
        let l = cofinite_summands(&CeSetSpec::CofiniteComplement([0, 1].into()), 10).unwrap();
        assert_eq!(l.m, BigInt::from(21));
        assert!(cofinite_summands(&CeSetSpec::Finite([1].into()), 10).is_err());
    }

    #[test]
    fn base_group_links_present() {
        let t = TruncationParams::new(3, 2, 2, 2).unwrap();
        let g = infinite_base_group(&t).unwrap();
        let p = tags::yy_link(1, 2).unwrap();
        assert!(g.member(1, &over(e("1*y1 + 1*y2"), p, 1)).unwrap());
        for n in 2..=3 {
            let p = tags::y_partial_sum(n).unwrap();
            let sum = Element::sum_of((1..=n).map(y));
            assert!(g.member(1, &over(sum, p, 1)).unwrap());
        }
        assert_eq!(g.rank(), 3 + 3 + 7);
    }

    #[test]
    fn empty_tree_equals_base() {
        let t = TruncationParams::new(2, 2, 2, 2).unwrap();
        let base = infinite_base_group(&t).unwrap();
        let tree = tree_group(&TreeSpec::empty(), &t).unwrap();
        let a: Vec<_> = base.all_generators().iter().map(|g| &g.element).collect();
        let b: Vec<_> = tree.all_generators().iter().map(|g| &g.element).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn chain_tree_step_elements() {
        let t = TruncationParams::new(3, 3, 1, 3).unwrap();
        let g = tree_group(&TreeSpec::chain(3), &t).unwrap();
        let s0 = Word::new(vec![0]);
        let p1 = tags::y_tower(1).unwrap();
        let p8 = tags::xy_link(1).unwrap();
        assert!(g.member(1, &over(Element::sum_of([y(1), xs(&s0)]), p1, 1)).unwrap());
        assert!(g.member(1, &over(&Element::basis(x(1)) - &Element::basis(xs(&s0)), p8, 1)).unwrap());
        let p7 = tags::y_partial_sum(3).unwrap();
        let sum = Element::sum_of((1..=3).flat_map(|i| [y(i), xs(&Word::new(vec![0; i as usize]))]));
        assert!(g.member(1, &over(sum, p7, 1)).unwrap());
    }

    #[test]
    fn tree_must_fit_truncation() {
        let t = TruncationParams::new(2, 1, 1, 2).unwrap();
        assert!(tree_group(&TreeSpec::chain(2), &t).is_err());
        assert!(TruncationParams::new(2, 3, 1, 1).is_err());
    }

    #[test]
    fn tree_parse_errors_carry_lines() {
        let ok = TreeSpec::parse("[[],[0],[0,0],[1]]").unwrap();
        assert_eq!(ok.len(), 4);
        let err = TreeSpec::parse("[\n [],\n [0],\n [1,0]\n]").unwrap_err();
        assert!(matches!(err, Error::Descriptor { line: 4, .. }), "{err:?}");
        let err = TreeSpec::parse("[\n [],\n [0,0],\n [0]\n]").unwrap_err();
        assert!(matches!(err, Error::Descriptor { line: 3, .. }), "{err:?}");
        let err = TreeSpec::parse("[\n [],\n [0,\n]").unwrap_err();
        assert!(matches!(err, Error::Descriptor { .. }));
    }

    #[test]
    fn ce_set_parse() {
        assert_eq!(
            CeSetSpec::parse(r#"{"finite":[1,2]}"#).unwrap(),
            CeSetSpec::Finite([1, 2].into())
        );
        assert_eq!(
            CeSetSpec::parse(r#"{"cofinite_complement":[0]}"#).unwrap(),
            CeSetSpec::CofiniteComplement([0].into())
        );
        assert_eq!(
            CeSetSpec::parse(r#"{"trace":[[1,5],[2,3]]}"#).unwrap(),
            CeSetSpec::StepTrace(vec![(1, 5), (2, 3)])
        );
        let err = CeSetSpec::parse("{\"trace\":[\n[1,5],\n[2,5]]}").unwrap_err();
        assert!(matches!(err, Error::Descriptor { line: 3, .. }), "{err:?}");
        assert!(CeSetSpec::parse(r#"{"bogus":[1]}"#).is_err());
    }

    #[test]
    fn path_summands_shape() {
        let t = TruncationParams::new(4, 3, 1, 3).unwrap();
        let tree = TreeSpec::chain(3);
        let split = path_summands(&tree, &PathSpec(Word::new(vec![0, 0, 0])), &t).unwrap();
        assert_eq!(split.pair.b.len(), 3);
        assert_eq!(split.pair.a.len(), 4 + 4);
        assert_eq!(split.excluded, vec![y(4)]);
        assert!(path_summands(&tree, &PathSpec(Word::new(vec![0, 0])), &t).is_err());
        assert!(path_summands(&tree, &PathSpec(Word::new(vec![0, 1, 0])), &t).is_err());
    }

    #[test]
    fn extract_path_from_chain() {
        let t = TruncationParams::new(3, 3, 1, 3).unwrap();
        let split = path_summands(&TreeSpec::chain(3), &PathSpec(Word::new(vec![0, 0, 0])), &t).unwrap();
        let path = extract_path(&split.pair).unwrap();
        assert_eq!(path.last().unwrap(), &Word::new(vec![0, 0, 0]));
    }
}
