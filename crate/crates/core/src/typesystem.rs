//! Characteristics, types and the bounded strict-maximality check.
//!
//! A [`Characteristic`] is stored symbolically: a value pattern that repeats
//! over prime *indices* (`p_0 = 2, p_1 = 3, …`) with a fixed period, plus
//! finitely many exceptions keyed by prime. Every characteristic the
//! constructions produce has this shape, and comparisons over all primes
//! reduce to finitely many residue classes and exception primes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{tags, CeSetSpec};
use crate::error::{Error, Result};
use crate::presentation::{
    height_from_coordinates, BasisIndex, Construction, Element, StageHeight, StagedPresentation,
};
use crate::primes::{nth_prime, prime_index};

/// Largest lcm of periods [`type_leq`] will expand.
pub const MAX_PERIOD: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    pub fn is_infinite(self) -> bool {
        self == Height::Infinite
    }
}

impl PartialOrd for Height {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Height {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => a.cmp(b),
            (Height::Finite(_), Height::Infinite) => Ordering::Less,
            (Height::Infinite, Height::Finite(_)) => Ordering::Greater,
            (Height::Infinite, Height::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(k) => write!(f, "{k}"),
            Height::Infinite => write!(f, "inf"),
        }
    }
}

/// Heights over all primes: `pattern[index(p) % period]` unless `p` is an exception.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Characteristic {
    pattern: Vec<Height>,
    exceptions: BTreeMap<u64, Height>,
    /// Human-readable names of the infinite families, for reports.
    families: Vec<String>,
}

impl Characteristic {
    /// Constant `value` at every prime.
    pub fn constant(value: Height) -> Self {
        Self::periodic(vec![value])
    }

    pub fn zero() -> Self {
        Self::constant(Height::Finite(0))
    }

    /// `pattern[i % pattern.len()]` at the `i`-th prime.
    pub fn periodic(pattern: Vec<Height>) -> Self {
        assert!(!pattern.is_empty(), "empty pattern");
        let mut c = Self {
            pattern,
            exceptions: BTreeMap::new(),
            families: Vec::new(),
        };
        c.normalize();
        c
    }

    pub fn with(mut self, p: u64, h: Height) -> Self {
        self.exceptions.insert(p, h);
        self.normalize();
        self
    }

    pub fn named(mut self, family: impl Into<String>) -> Self {
        self.families.push(family.into());
        self
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, Height> {
        &self.exceptions
    }

    fn default_at_index(&self, i: u64) -> Height {
        self.pattern[(i % self.pattern.len() as u64) as usize]
    }

    pub fn at(&self, p: u64) -> Height {
        if let Some(&h) = self.exceptions.get(&p) {
            return h;
        }
        let i = prime_index(p).unwrap_or_else(|| panic!("{p} is not prime"));
        self.default_at_index(i)
    }

    /// Primes with an infinite entry, if there are finitely many.
    pub fn infinite_primes(&self) -> Option<Vec<u64>> {
        if self.pattern.iter().any(|h| h.is_infinite()) {
            return None;
        }
        Some(
            self.exceptions
                .iter()
                .filter(|(_, h)| h.is_infinite())
                .map(|(&p, _)| p)
                .collect(),
        )
    }

    fn normalize(&mut self) {
        let n = self.pattern.len();
        if let Some(d) = (1..n).find(|&d| n % d == 0 && (d..n).all(|i| self.pattern[i] == self.pattern[i - d])) {
            self.pattern.truncate(d);
        }
        let pattern = self.pattern.clone();
        self.exceptions.retain(|&p, h| {
            let i = prime_index(p).expect("exception keys are primes");
            pattern[(i % pattern.len() as u64) as usize] != *h
        });
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut parts: Vec<String> = self.exceptions.iter().map(|(p, h)| format!("{p}:{h}")).collect();
        if self.pattern.len() == 1 {
            parts.push(format!("default:{}", self.pattern[0]));
        } else {
            let n = self.pattern.len();
            for (r, h) in self.pattern.iter().enumerate() {
                parts.push(format!("default[index%{n}={r}]:{h}"));
            }
        }
        write!(f, "{}}}", parts.join(", "))?;
        for family in &self.families {
            write!(f, " inf-family {family}")?;
        }
        Ok(())
    }
}

/// A type, compared through [`char_equiv`].
#[derive(Clone, Debug, Serialize)]
pub struct TypeClass {
    pub representative: Characteristic,
}

impl TypeClass {
    pub fn new(representative: Characteristic) -> Self {
        Self { representative }
    }

    pub fn leq(&self, other: &TypeClass) -> Result<bool> {
        type_leq(&self.representative, &other.representative)
    }
}

impl PartialEq for TypeClass {
    fn eq(&self, other: &Self) -> bool {
        char_equiv(&self.representative, &other.representative).unwrap_or(false)
    }
}

/// `a ⪯ b`: every infinite entry of `a` is infinite in `b`, and `a <= b`
/// at all but finitely many primes.
pub fn type_leq(a: &Characteristic, b: &Characteristic) -> Result<bool> {
    let period = a.period().lcm(&b.period());
    if period > MAX_PERIOD {
        return Err(Error::Unsupported(format!(
            "period {period} too large to compare"
        )));
    }
    // each residue class of prime indices is infinite, so the pattern must
    // satisfy both conditions outright
    for r in 0..period as u64 {
        let (ha, hb) = (a.default_at_index(r), b.default_at_index(r));
        if ha > hb {
            return Ok(false);
        }
    }
    let exceptional: BTreeSet<u64> = a.exceptions.keys().chain(b.exceptions.keys()).copied().collect();
    Ok(exceptional
        .into_iter()
        .all(|p| !(a.at(p).is_infinite() && !b.at(p).is_infinite())))
}

pub fn char_equiv(a: &Characteristic, b: &Characteristic) -> Result<bool> {
    Ok(type_leq(a, b)? && type_leq(b, a)?)
}

/// The characteristic of basis element `b` in the full (untruncated) group,
/// read off the construction rules.
pub fn structural_characteristic(label: &Construction, b: &BasisIndex) -> Result<Characteristic> {
    use BasisIndex::*;
    let foreign = || Error::ForeignIndex(b.clone());
    let one = Height::Finite(1);
    let zero = Height::Finite(0);
    match (label, b) {
        (Construction::Fuchs, X(1)) => Ok(Characteristic::zero().with(3, Height::Infinite).named("3^k")),
        (Construction::Fuchs, X(2)) => Ok(Characteristic::zero().with(5, Height::Infinite).named("5^k")),
        (Construction::Cof { .. }, G1) => Ok(Characteristic::periodic(vec![zero, one])),
        (Construction::Cof { w }, G2) => Ok(match w {
            CeSetSpec::CofiniteComplement(missing) => missing
                .iter()
                .fold(Characteristic::constant(one), |c, &k| c.with(nth_prime(2 * k + 1), zero))
                .with(2, zero),
            CeSetSpec::Finite(set) => set
                .iter()
                .fold(Characteristic::periodic(vec![one, zero]), |c, &k| {
                    c.with(nth_prime(2 * k + 1), one)
                })
                .with(2, zero),
            CeSetSpec::StepTrace(events) => events
                .iter()
                .fold(Characteristic::periodic(vec![one, zero]), |c, &(_, k)| {
                    c.with(nth_prime(2 * k + 1), one)
                })
                .with(2, zero),
        }),
        (Construction::InfiniteBase { truncation: t } | Construction::Tree { truncation: t, .. }, idx) => {
            let inf = |p: u64, name: String| Characteristic::zero().with(p, Height::Infinite).named(name);
            match idx {
                X(i) if *i <= t.n_max => Ok(inf(tags::x_tower(*i)?, format!("p<0,{i}>^k"))),
                Y(i) if *i <= t.n_max => Ok(inf(tags::y_tower(*i)?, format!("p<1,{i}>^k"))),
                XSigma(w) if t.fits(w) => {
                    let c = inf(tags::sigma_tower(w)?, format!("p<2,{w}>^k"));
                    match label {
                        Construction::Tree { tree, .. } if !w.is_empty() => {
                            match tree.longest_extension(w) {
                                Some(n) => Ok(c.with(tags::y_tower(w.len() as u32)?, Height::Finite(n as u32))),
                                None => Ok(c),
                            }
                        }
                        _ => Ok(c),
                    }
                }
                _ => Err(foreign()),
            }
        }
        (Construction::Free { rank }, X(i)) if *i >= 1 && *i <= *rank => Ok(Characteristic::zero()),
        _ => Err(foreign()),
    }
}

pub const BOUNDED_CAVEAT: &str = "bounded-witness verification";

/// Record of a bounded strict-maximality check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityEvidence {
    pub element: BasisIndex,
    pub characteristic: String,
    pub witness_bound: u32,
    pub stage: usize,
    pub cap: u32,
    pub window: usize,
    pub candidates_checked: usize,
    /// First candidate found with type `>=` the structural type, if any.
    pub dominated_by: Option<Element>,
    pub strictly_maximal: bool,
    pub caveat: &'static str,
}

/// Nonzero integer combinations of at most three basis positions with
/// coefficients in `[-w, w]`, first coefficient positive, ordered by support
/// size then position then coefficients.
fn combinations(rank: usize, w: i64) -> Vec<Vec<(usize, i64)>> {
    let coeffs: Vec<i64> = (1..=w).flat_map(|c| [c, -c]).collect();
    let firsts: Vec<i64> = (1..=w).collect();
    let mut out = Vec::new();
    for i in 0..rank {
        for &a in &firsts {
            out.push(vec![(i, a)]);
        }
    }
    for i in 0..rank {
        for j in i + 1..rank {
            for &a in &firsts {
                for &b in &coeffs {
                    out.push(vec![(i, a), (j, b)]);
                }
            }
        }
    }
    for i in 0..rank {
        for j in i + 1..rank {
            for k in j + 1..rank {
                for &a in &firsts {
                    for &b in &coeffs {
                        for &c in &coeffs {
                            out.push(vec![(i, a), (j, b), (k, c)]);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Bounded check that no element independent from `b` has type `>= χ(b)`.
///
/// Candidates are the integer combinations of at most three basis elements
/// with coefficients in `[-witness_bound, witness_bound]` that are not
/// multiples of `b`. Stage-`s` heights with cap `s` are compared on the
/// window of primes occurring in stage-`s` generators: a candidate
/// dominates when it reaches the cap wherever `χ(b)` is infinite and meets
/// `χ(b)` on the upper half of the window.
pub fn strictly_maximal(
    p: &StagedPresentation,
    b: &BasisIndex,
    witness_bound: u32,
    s: usize,
) -> Result<MaximalityEvidence> {
    let chi = structural_characteristic(p.label(), b)?;
    let pos = p
        .basis()
        .iter()
        .position(|x| x == b)
        .ok_or_else(|| Error::ForeignIndex(b.clone()))?;
    let cap = s.max(1) as u32;
    let mut window: BTreeSet<u64> = p.primes_at(s)?.into_iter().collect();
    window.extend(chi.exceptions().keys().copied());
    let window: Vec<u64> = window.into_iter().collect();
    let upper = &window[window.len() / 2..];
    let inf_primes: Vec<u64> = window.iter().copied().filter(|&q| chi.at(q).is_infinite()).collect();
    let finite_targets: Vec<(u64, u32)> = upper
        .iter()
        .filter_map(|&q| match chi.at(q) {
            Height::Finite(h) if h > 0 => Some((q, h)),
            _ => None,
        })
        .collect();

    let lattice = p.stage_lattice(s)?;
    let basis_coords: Vec<Vec<BigInt>> = p
        .basis_elements()
        .iter()
        .map(|e| {
            lattice
                .coordinates(&p.dense(e)?)
                .ok_or_else(|| Error::NotInGroup(e.to_string()))
        })
        .collect::<Result<_>>()?;

    let candidates = combinations(p.rank(), witness_bound as i64);
    let dominates = |combo: &Vec<(usize, i64)>| -> bool {
        if combo.iter().all(|&(i, _)| i == pos) {
            return false;
        }
        let mut coords = vec![BigInt::zero(); basis_coords[0].len()];
        for &(i, c) in combo {
            for (x, y) in coords.iter_mut().zip(&basis_coords[i]) {
                *x += y * c;
            }
        }
        inf_primes
            .iter()
            .all(|&q| height_from_coordinates(&coords, q, cap) == StageHeight::Cap)
            && finite_targets.iter().all(|&(q, h)| {
                match height_from_coordinates(&coords, q, cap.max(h)) {
                    StageHeight::Cap => true,
                    StageHeight::Finite(k) => k >= h,
                }
            })
    };
    let found = candidates.par_iter().position_first(dominates);
    let dominated_by = found.map(|i| {
        Element::from_terms(
            candidates[i]
                .iter()
                .map(|&(j, c)| (p.basis()[j].clone(), crate::lattice::Rational::from_integer(c.into()))),
        )
    });
    Ok(MaximalityEvidence {
        element: b.clone(),
        characteristic: chi.to_string(),
        witness_bound,
        stage: s,
        cap,
        window: window.len(),
        candidates_checked: found.map_or(candidates.len(), |i| i + 1),
        strictly_maximal: dominated_by.is_none(),
        dominated_by,
        caveat: BOUNDED_CAVEAT,
    })
}

/// Is a measured stage height compatible with (at most) the structural value?
pub fn stage_height_within(measured: StageHeight, cap: u32, structural: Height) -> bool {
    match (measured, structural) {
        (_, Height::Infinite) => true,
        (StageHeight::Finite(k), Height::Finite(h)) => k <= h,
        (StageHeight::Cap, Height::Finite(h)) => cap <= h,
    }
}
