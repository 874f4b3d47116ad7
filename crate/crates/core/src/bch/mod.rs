//! Narrow-sense binary BCH codes with a bounded-distance decoder.
//!
//! Decoding computes the syndromes `S_1..S_2t`, runs Berlekamp-Massey for
//! the error locator, and finds its roots by Chien search. A word is
//! declared undecodable when the locator degree exceeds `t` or does not
//! match the number of roots in the field.

mod gf;

pub use gf::{GfContext, MAX_M, MIN_M, PRIMITIVE_POLYS};

use serde::Serialize;

use crate::error::{invalid, Result};

/// Result of one bounded-distance decoding attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Corrected { codeword: Vec<u8>, error_positions: Vec<usize> },
    Failure,
}

impl DecodeOutcome {
    pub fn codeword(&self) -> Option<&[u8]> {
        match self {
            DecodeOutcome::Corrected { codeword, .. } => Some(codeword),
            DecodeOutcome::Failure => None,
        }
    }

    pub fn into_codeword(self) -> Option<Vec<u8>> {
        match self {
            DecodeOutcome::Corrected { codeword, .. } => Some(codeword),
            DecodeOutcome::Failure => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BchCode {
    gf: GfContext,
    n: usize,
    k: usize,
    t: usize,
    /// Generator coefficients over GF(2), lowest degree first.
    generator: Vec<u8>,
}

impl BchCode {
    /// Narrow-sense BCH code of length `2^m - 1` and designed radius `t`.
    pub fn new(m: u32, t: usize) -> Result<Self> {
        let gf = GfContext::new(m)?;
        let n = gf.order();
        if t == 0 || 2 * t + 1 > n {
            return invalid(format!("radius t = {t} unsupported for length {n}"));
        }
        let mut generator = vec![1u8];
        let mut covered = vec![false; n];
        for i in 1..=2 * t {
            if covered[i % n] {
                continue;
            }
            let mut coset = Vec::new();
            let mut c = i % n;
            while !covered[c] {
                covered[c] = true;
                coset.push(c);
                c = (2 * c) % n;
            }
            generator = gf2_mul(&generator, &minimal_polynomial(&gf, &coset));
        }
        let k = n - (generator.len() - 1);
        if k == 0 {
            return invalid(format!("radius t = {t} leaves no message bits at length {n}"));
        }
        Ok(Self { gf, n, k, t, generator })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn field(&self) -> &GfContext {
        &self.gf
    }

    pub fn generator(&self) -> &[u8] {
        &self.generator
    }

    /// Systematic encoding: message bits occupy positions `n - k .. n`, the
    /// remainder of `x^{n-k} m(x)` modulo the generator fills `0 .. n - k`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k {
            return invalid(format!("message has {} bits, expected {}", message.len(), self.k));
        }
        let parity = self.n - self.k;
        let mut word = vec![0u8; self.n];
        for (i, &b) in message.iter().enumerate() {
            word[parity + i] = b & 1;
        }
        let mut rem = word.clone();
        for i in (parity..self.n).rev() {
            if rem[i] == 1 {
                for (j, &g) in self.generator.iter().enumerate() {
                    rem[i - parity + j] ^= g;
                }
            }
        }
        word[..parity].copy_from_slice(&rem[..parity]);
        Ok(word)
    }

    /// Syndromes `S_j = r(alpha^j)` for `j = 1..=2t`.
    pub fn syndromes(&self, word: &[u8]) -> Vec<u16> {
        let gf = &self.gf;
        let mut s = vec![0u16; 2 * self.t];
        for (i, _) in word.iter().enumerate().filter(|(_, &b)| b & 1 == 1) {
            for (j, sj) in s.iter_mut().enumerate() {
                *sj ^= gf.alpha_pow(((j + 1) * i) as i64);
            }
        }
        s
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n && self.syndromes(word).iter().all(|&s| s == 0)
    }

    /// Bounded-distance decoding up to `t` errors.
    pub fn decode(&self, word: &[u8]) -> Result<DecodeOutcome> {
        if word.len() != self.n {
            return invalid(format!("word has {} bits, expected {}", word.len(), self.n));
        }
        let s = self.syndromes(word);
        if s.iter().all(|&x| x == 0) {
            return Ok(DecodeOutcome::Corrected { codeword: word.to_vec(), error_positions: Vec::new() });
        }
        let locator = berlekamp_massey(&self.gf, &s);
        let degree = locator.len() - 1;
        if degree > self.t {
            return Ok(DecodeOutcome::Failure);
        }
        let positions = chien_search(&self.gf, &locator, self.n);
        if positions.len() != degree {
            return Ok(DecodeOutcome::Failure);
        }
        let mut codeword = word.to_vec();
        for &i in &positions {
            codeword[i] ^= 1;
        }
        Ok(DecodeOutcome::Corrected { codeword, error_positions: positions })
    }
}

/// `prod_{c in coset} (x - alpha^c)`, which has binary coefficients.
fn minimal_polynomial(gf: &GfContext, coset: &[usize]) -> Vec<u8> {
    let mut poly = vec![1u16];
    for &c in coset {
        let root = gf.alpha_pow(c as i64);
        let mut next = vec![0u16; poly.len() + 1];
        for (i, &a) in poly.iter().enumerate() {
            next[i + 1] ^= a;
            next[i] ^= gf.mul(a, root);
        }
        poly = next;
    }
    poly.into_iter()
        .map(|c| {
            debug_assert!(c <= 1);
            c as u8
        })
        .collect()
}

fn gf2_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 1 {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

/// Error-locator polynomial `Lambda(x)` (lowest degree first, trimmed).
fn berlekamp_massey(gf: &GfContext, s: &[u16]) -> Vec<u16> {
    let mut lambda = vec![1u16];
    let mut prev = vec![1u16];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u16;
    for r in 0..s.len() {
        let mut disc = s[r];
        for i in 1..=l.min(lambda.len() - 1) {
            disc ^= gf.mul(lambda[i], s[r - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = gf.div(disc, prev_disc);
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &b) in prev.iter().enumerate() {
            next[i + shift] ^= gf.mul(coef, b);
        }
        if 2 * l <= r {
            prev = lambda;
            l = r + 1 - l;
            prev_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
        lambda = next;
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    lambda
}

/// Positions `i` with `Lambda(alpha^{-i}) = 0`.
fn chien_search(gf: &GfContext, lambda: &[u16], n: usize) -> Vec<usize> {
    (0..n)
        .filter(|&i| {
            let x = gf.alpha_pow(-(i as i64));
            let mut acc = 0u16;
            let mut pow = 1u16;
            for &c in lambda {
                acc ^= gf.mul(c, pow);
                pow = gf.mul(pow, x);
            }
            acc == 0
        })
        .collect()
}

/// Idealized bounded-distance decoder: succeeds iff `|test ^ error| <= t`.
pub fn genie_bdd(test_pattern: &[u8], true_error: &[u8], t: usize) -> Result<bool> {
    if test_pattern.len() != true_error.len() {
        return invalid(format!(
            "pattern has {} bits but error has {}",
            test_pattern.len(),
            true_error.len()
        ));
    }
    Ok(hamming_distance(test_pattern, true_error) <= t)
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
