//! Staged presentations of subgroups of a rational vector space.
//!
//! A presentation fixes a finite tagged basis and a monotone, stage-indexed
//! list of generators. The group at stage `s` is the integer span of every
//! generator introduced at a stage `<= s`. Membership, divisibility and
//! heights are all answered against that span.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::constructions::{CeSetSpec, TreeSpec, TruncationParams};
use crate::error::{Error, Result};
use crate::lattice::{IntLattice, Rational};

/// A finite string of naturals, ordered by length first, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn new(v: impl Into<Vec<u32>>) -> Self {
        Word(v.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ↾ i`
    pub fn restrict(&self, i: usize) -> Word {
        Word(self.0[..i.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, m: u32) -> Word {
        let mut v = self.0.clone();
        v.push(m);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Basis coordinates. The derived order is `G1 < G2 < X(1) < X(2) < … <
/// Y(1) < … < XSigma(σ)`, with words ordered by length then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisIndex {
    G1,
    G2,
    X(u32),
    Y(u32),
    XSigma(Word),
}

impl BasisIndex {
    pub fn is_x_element(&self) -> bool {
        matches!(self, BasisIndex::X(_) | BasisIndex::XSigma(_))
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisIndex::G1 => write!(f, "g1"),
            BasisIndex::G2 => write!(f, "g2"),
            BasisIndex::X(i) => write!(f, "x{i}"),
            BasisIndex::Y(i) => write!(f, "y{i}"),
            BasisIndex::XSigma(w) => write!(f, "x{w}"),
        }
    }
}

impl FromStr for BasisIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Input(format!("bad basis index '{s}'"));
        match s {
            "g1" => return Ok(BasisIndex::G1),
            "g2" => return Ok(BasisIndex::G2),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("x[") {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            let entries = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner
                    .split(',')
                    .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?
            };
            return Ok(BasisIndex::XSigma(Word(entries)));
        }
        let (head, num) = s.split_at(1.min(s.len()));
        let i: u32 = num.parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        match head {
            "x" => Ok(BasisIndex::X(i)),
            "y" => Ok(BasisIndex::Y(i)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BasisIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finitely supported rational vector over [`BasisIndex`]. Zero
/// coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Element {
    coeffs: BTreeMap<BasisIndex, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(b: BasisIndex) -> Self {
        Self::term(Rational::one(), b)
    }

    pub fn term(q: Rational, b: BasisIndex) -> Self {
        let mut e = Self::zero();
        e.add_term(b, q);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BasisIndex, Rational)>) -> Self {
        let mut e = Self::zero();
        for (b, q) in terms {
            e.add_term(b, q);
        }
        e
    }

    /// Sum of the listed basis vectors, each with coefficient 1.
    pub fn sum_of(indices: impl IntoIterator<Item = BasisIndex>) -> Self {
        Self::from_terms(indices.into_iter().map(|b| (b, Rational::one())))
    }

    pub fn add_term(&mut self, b: BasisIndex, q: Rational) {
        if q.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(b.clone()).or_insert_with(Rational::zero);
        *entry += q;
        if entry.is_zero() {
            self.coeffs.remove(&b);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, b: &BasisIndex) -> Rational {
        self.coeffs.get(b).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisIndex, &Rational)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &BasisIndex> {
        self.coeffs.keys()
    }

    pub fn scale(&self, q: &Rational) -> Element {
        if q.is_zero() {
            return Element::zero();
        }
        Element {
            coeffs: self.coeffs.iter().map(|(b, c)| (b.clone(), c * q)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Element {
        self.scale(&Rational::from_integer(n.into()))
    }

    pub fn div_int(&self, n: &BigInt) -> Element {
        self.scale(&Rational::new(BigInt::one(), n.clone()))
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }

    pub fn to_dense(&self, basis: &[BasisIndex]) -> Result<Vec<Rational>> {
        for b in self.coeffs.keys() {
            if !basis.contains(b) {
                return Err(Error::ForeignIndex(b.clone()));
            }
        }
        Ok(basis.iter().map(|b| self.coeff(b)).collect())
    }

    pub fn from_dense(basis: &[BasisIndex], v: &[Rational]) -> Element {
        Element::from_terms(basis.iter().cloned().zip(v.iter().cloned()))
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        for (b, q) in &rhs.coeffs {
            out.add_term(b.clone(), q.clone());
        }
        out
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        for (b, q) in &rhs.coeffs {
            out.add_term(b.clone(), -q.clone());
        }
        out
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_int(-1)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, q)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{q}*{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Element {
    type Err = Error;

    /// Parses the canonical form, e.g. `1/2*x1 + 1/2*x2` or `-3*g2 + 1*x[0,1]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Element::zero());
        }
        let mut e = Element::zero();
        // split on '+' outside of brackets
        let mut depth = 0usize;
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, c) in s.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth = depth.saturating_sub(1),
                '+' if depth == 0 => {
                    pieces.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&s[start..]);
        for piece in pieces {
            let piece = piece.trim();
            let (coeff, index) = match piece.split_once('*') {
                Some((c, b)) => (c.trim(), b.trim()),
                None => ("1", piece),
            };
            let q: Rational = coeff
                .parse()
                .map_err(|_| Error::Input(format!("bad coefficient '{coeff}'")))?;
            e.add_term(index.parse()?, q);
        }
        Ok(e)
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which family a construction belongs to; used for structural queries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    Fuchs,
    Cof { w: CeSetSpec },
    InfiniteBase { truncation: TruncationParams },
    Tree { tree: TreeSpec, truncation: TruncationParams },
    Free { rank: u32 },
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Fuchs => "fuchs",
            Construction::Cof { .. } => "cof",
            Construction::InfiniteBase { .. } => "base",
            Construction::Tree { .. } => "tree",
            Construction::Free { .. } => "free",
        }
    }
}

/// Provenance of a generator, for reports and the identity checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Origin {
    Basis,
    /// `b / p^k`
    Tower { prime: u64, exponent: u32 },
    /// `(u + v + …) / p`
    Link { prime: u64, tag: Option<u64> },
    /// Added because `k` was enumerated into the c.e. set.
    Enumerated { value: u64, prime: u64 },
    /// Tree step `(1)`–`(4)` for `node`; `second` marks the derived element.
    TreeStep { node: Word, step: u8, second: bool, prime: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub element: Element,
    pub stage: usize,
    pub origin: Origin,
}

/// Measured height at a stage: either an exact value or "at least the cap".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StageHeight {
    Finite(u32),
    Cap,
}

impl fmt::Display for StageHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageHeight::Finite(k) => write!(f, "{k}"),
            StageHeight::Cap => write!(f, "CAP"),
        }
    }
}

/// The stage-`s` group as an integer lattice. Coordinate `i` is scaled by
/// `scales[i]`, the lcm of the denominators of that coordinate over all
/// stage generators, so the lattice sits in `Z^d`.
#[derive(Debug)]
pub struct StageLattice {
    scales: Vec<BigInt>,
    lattice: IntLattice,
}

impl StageLattice {
    fn build(vectors: &[Vec<Rational>], dim: usize) -> Self {
        let mut scales = vec![BigInt::one(); dim];
        for v in vectors {
            for (s, q) in scales.iter_mut().zip(v) {
                if !q.denom().is_one() {
                    *s = s.lcm(q.denom());
                }
            }
        }
        let mut lattice = IntLattice::new(dim);
        for v in vectors {
            lattice.insert(Self::scaled(&scales, v).expect("generator denominators divide scales"));
        }
        lattice.canonicalize();
        Self { scales, lattice }
    }

    fn scaled(scales: &[BigInt], v: &[Rational]) -> Option<Vec<BigInt>> {
        v.iter()
            .zip(scales)
            .map(|(q, s)| {
                let (n, rem) = (q.numer() * s).div_rem(q.denom());
                rem.is_zero().then_some(n)
            })
            .collect()
    }

    /// Integer coordinates over the lattice's Hermite basis.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<BigInt>> {
        let scaled = Self::scaled(&self.scales, v)?;
        self.lattice.coordinates(&scaled)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }
}

/// `v_p(n)` for `n != 0`.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// Height of a lattice vector from its coordinates: the minimum p-adic
/// valuation, capped.
pub fn height_from_coordinates(coords: &[BigInt], p: u64, cap: u32) -> StageHeight {
    let mut best = cap;
    for c in coords.iter().filter(|c| !c.is_zero()) {
        best = best.min(valuation(c, p));
        if best == 0 {
            break;
        }
    }
    if best >= cap {
        StageHeight::Cap
    } else {
        StageHeight::Finite(best)
    }
}

pub struct StagedPresentation {
    label: Construction,
    basis: Vec<BasisIndex>,
    generators: Vec<Generator>,
    max_stage: usize,
    cache: Mutex<BTreeMap<usize, Arc<StageLattice>>>,
}

impl fmt::Debug for StagedPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StagedPresentation")
            .field("label", &self.label.name())
            .field("basis", &self.basis.len())
            .field("generators", &self.generators.len())
            .field("max_stage", &self.max_stage)
            .finish()
    }
}

impl Clone for StagedPresentation {
    fn clone(&self) -> Self {
        Self {
            label: self.label.clone(),
            basis: self.basis.clone(),
            generators: self.generators.clone(),
            max_stage: self.max_stage,
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

/// Collects generators for a presentation, dropping exact duplicates at a
/// later stage.
pub struct PresentationBuilder {
    label: Construction,
    basis: Vec<BasisIndex>,
    generators: Vec<Generator>,
    seen: BTreeMap<String, usize>,
    max_stage: usize,
}

impl PresentationBuilder {
    pub fn new(label: Construction, basis: Vec<BasisIndex>, max_stage: usize) -> Self {
        let mut b = Self {
            label,
            basis: Vec::new(),
            generators: Vec::new(),
            seen: BTreeMap::new(),
            max_stage,
        };
        let mut sorted = basis;
        sorted.sort();
        sorted.dedup();
        for idx in &sorted {
            b.push(Element::basis(idx.clone()), 0, Origin::Basis);
        }
        b.basis = sorted;
        b
    }

    pub fn basis(&self) -> &[BasisIndex] {
        &self.basis
    }

    pub fn push(&mut self, element: Element, stage: usize, origin: Origin) {
        if stage > self.max_stage {
            return;
        }
        let key = element.to_string();
        if let Some(&existing) = self.seen.get(&key) {
            if self.generators[existing].stage <= stage {
                return;
            }
        }
        self.seen.insert(key, self.generators.len());
        self.generators.push(Generator { element, stage, origin });
    }

    pub fn finish(mut self) -> Result<StagedPresentation> {
        let basis_set: BTreeSet<_> = self.basis.iter().collect();
        for g in &self.generators {
            if let Some(b) = g.element.support().find(|b| !basis_set.contains(b)) {
                return Err(Error::ForeignIndex(b.clone()));
            }
        }
        self.generators.sort_by_key(|g| g.stage);
        Ok(StagedPresentation {
            label: self.label,
            basis: self.basis,
            generators: self.generators,
            max_stage: self.max_stage,
            cache: Mutex::new(BTreeMap::new()),
        })
    }
}

impl StagedPresentation {
    pub fn label(&self) -> &Construction {
        &self.label
    }

    pub fn basis(&self) -> &[BasisIndex] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn max_stage(&self) -> usize {
        self.max_stage
    }

    pub fn basis_elements(&self) -> Vec<Element> {
        self.basis.iter().cloned().map(Element::basis).collect()
    }

    pub fn all_generators(&self) -> &[Generator] {
        &self.generators
    }

    fn check_stage(&self, s: usize) -> Result<()> {
        if s > self.max_stage {
            return Err(Error::StageOutOfRange {
                stage: s,
                max: self.max_stage,
            });
        }
        Ok(())
    }

    /// Generators introduced at stages `<= s`.
    pub fn gen_at(&self, s: usize) -> Result<Vec<&Generator>> {
        self.check_stage(s)?;
        Ok(self.generators.iter().take_while(|g| g.stage <= s).collect())
    }

    pub fn dense(&self, g: &Element) -> Result<Vec<Rational>> {
        g.to_dense(&self.basis)
    }

    pub fn stage_lattice(&self, s: usize) -> Result<Arc<StageLattice>> {
        self.check_stage(s)?;
        if let Some(l) = self.cache.lock().unwrap().get(&s) {
            return Ok(l.clone());
        }
        let vectors = self
            .gen_at(s)?
            .into_iter()
            .map(|g| self.dense(&g.element))
            .collect::<Result<Vec<_>>>()?;
        let lattice = Arc::new(StageLattice::build(&vectors, self.basis.len()));
        self.cache.lock().unwrap().insert(s, lattice.clone());
        Ok(lattice)
    }

    pub fn member(&self, s: usize, g: &Element) -> Result<bool> {
        let v = self.dense(g)?;
        Ok(self.stage_lattice(s)?.contains(&v))
    }

    /// Does `p^k` divide `g` in the stage-`s` group?
    pub fn divides(&self, s: usize, p: u64, k: u32, g: &Element) -> Result<bool> {
        let pk = BigInt::from(p).pow(k);
        self.member(s, &g.div_int(&pk))
    }

    /// Does the integer `m` divide `g` in the stage-`s` group?
    pub fn divides_by(&self, s: usize, m: &BigInt, g: &Element) -> Result<bool> {
        if m.is_zero() {
            return Err(Error::Input("division by zero".into()));
        }
        self.member(s, &g.div_int(m))
    }

    /// Largest `k <= cap` with `p^k | g` at stage `s`, or `Cap` when `p^cap | g`.
    pub fn height_at_stage(&self, s: usize, p: u64, g: &Element, cap: u32) -> Result<StageHeight> {
        if g.is_zero() {
            return Err(Error::ZeroElement);
        }
        let v = self.dense(g)?;
        let coords = self
            .stage_lattice(s)?
            .coordinates(&v)
            .ok_or_else(|| Error::NotInGroup(g.to_string()))?;
        Ok(height_from_coordinates(&coords, p, cap))
    }

    pub fn characteristic_at_stage(
        &self,
        s: usize,
        g: &Element,
        primes: &[u64],
        cap: u32,
    ) -> Result<Vec<StageHeight>> {
        if g.is_zero() {
            return Err(Error::ZeroElement);
        }
        let v = self.dense(g)?;
        let coords = self
            .stage_lattice(s)?
            .coordinates(&v)
            .ok_or_else(|| Error::NotInGroup(g.to_string()))?;
        Ok(primes
            .iter()
            .map(|&p| height_from_coordinates(&coords, p, cap))
            .collect())
    }

    /// Every prime dividing a generator denominator at stage `s`, ascending.
    pub fn primes_at(&self, s: usize) -> Result<Vec<u64>> {
        let mut out = BTreeSet::new();
        for g in self.gen_at(s)? {
            if let Origin::Tower { prime, .. }
            | Origin::Link { prime, .. }
            | Origin::Enumerated { prime, .. }
            | Origin::TreeStep { prime, .. } = g.origin
            {
                out.insert(prime);
            }
        }
        Ok(out.into_iter().collect())
    }
}
