//! Prime enumeration and the injective coding of construction data into primes.
//!
//! Every prime a construction needs comes from [`prime_for`], which maps a
//! `(tag, payload)` pair to `p_{1 + cantor(tag, payload)}`. Index 0 (the prime 2)
//! is never handed out by the coder, so it stays free for the small examples.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prime index the coder will hand out.
pub const MAX_PRIME_INDEX: u64 = 2_000_000;

/// Highest tag used by the infinite-rank construction.
pub const MAX_TAG: u64 = 8;

static PRIMES: RwLock<Vec<u64>> = RwLock::new(Vec::new());

fn sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for n in 2..=limit {
        if composite[n] {
            continue;
        }
        out.push(n as u64);
        let mut m = n * n;
        while m <= limit {
            composite[m] = true;
            m += n;
        }
    }
    out
}

fn ensure_index(n: usize) {
    if PRIMES.read().unwrap().len() > n {
        return;
    }
    let mut table = PRIMES.write().unwrap();
    if table.len() > n {
        return;
    }
    // p_n < n (ln n + ln ln n) for n >= 6
    let x = (n as f64).max(6.0);
    let mut bound = (x * (x.ln() + x.ln().ln())) as u64 + 16;
    loop {
        let primes = sieve(bound);
        if primes.len() > n {
            *table = primes;
            return;
        }
        bound *= 2;
    }
}

/// The n-th prime, 0-indexed: `nth_prime(0) == 2`.
pub fn nth_prime(n: u64) -> u64 {
    ensure_index(n as usize);
    PRIMES.read().unwrap()[n as usize]
}

/// Inverse of [`nth_prime`]; `None` when `p` is not prime.
pub fn prime_index(p: u64) -> Option<u64> {
    if p < 2 {
        return None;
    }
    loop {
        {
            let table = PRIMES.read().unwrap();
            if let Some(&last) = table.last() {
                if last >= p {
                    return table.binary_search(&p).ok().map(|i| i as u64);
                }
            }
        }
        let len = PRIMES.read().unwrap().len();
        ensure_index((len * 2).max(64));
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Cantor pairing `(i+j)(i+j+1)/2 + j`.
pub fn cantor(i: u64, j: u64) -> u64 {
    (i + j) * (i + j + 1) / 2 + j
}

/// Inverse of [`cantor`].
pub fn uncantor(z: u64) -> (u64, u64) {
    let w = ((((8 * z + 1) as f64).sqrt() - 1.0) / 2.0).floor() as u64;
    // guard against float rounding at the boundary
    let w = (w.saturating_sub(1)..=w + 1)
        .rev()
        .find(|w| w * (w + 1) / 2 <= z)
        .unwrap();
    let j = z - w * (w + 1) / 2;
    (w - j, j)
}

/// Codes a finite string of naturals as a natural: the empty string is 0,
/// otherwise `1 + cantor(len - 1, t)` where `t` is the right-nested pairing of
/// the entries. The map is a bijection onto the naturals.
pub fn code_word(word: &[u32]) -> u64 {
    match word.split_last() {
        None => 0,
        Some((&last, init)) => {
            let tuple = init
                .iter()
                .rev()
                .fold(last as u64, |acc, &a| cantor(a as u64, acc));
            1 + cantor(word.len() as u64 - 1, tuple)
        }
    }
}

pub fn decode_word(code: u64) -> Vec<u32> {
    if code == 0 {
        return Vec::new();
    }
    let (len_minus_one, mut tuple) = uncantor(code - 1);
    let mut out = Vec::with_capacity(len_minus_one as usize + 1);
    for _ in 0..len_minus_one {
        let (a, rest) = uncantor(tuple);
        out.push(a as u32);
        tuple = rest;
    }
    out.push(tuple as u32);
    out
}

/// A request for the prime `p_<tag, payload>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimeAssignment {
    pub tag: u64,
    pub payload: u64,
}

impl PrimeAssignment {
    pub fn new(tag: u64, payload: u64) -> Self {
        Self { tag, payload }
    }

    pub fn pair(tag: u64, i: u64, j: u64) -> Self {
        Self::new(tag, cantor(i, j))
    }

    pub fn index(&self) -> Result<u64> {
        if self.tag > MAX_TAG {
            return Err(Error::PrimeOverflow(format!("tag {} > {}", self.tag, MAX_TAG)));
        }
        let idx = cantor(self.tag, self.payload)
            .checked_add(1)
            .filter(|&i| i <= MAX_PRIME_INDEX)
            .ok_or_else(|| {
                Error::PrimeOverflow(format!(
                    "payload {} with tag {} exceeds prime index limit {}",
                    self.payload, self.tag, MAX_PRIME_INDEX
                ))
            })?;
        Ok(idx)
    }
}

pub fn prime_for(a: PrimeAssignment) -> Result<u64> {
    Ok(nth_prime(a.index()?))
}
