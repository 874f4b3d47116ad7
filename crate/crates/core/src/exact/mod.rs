//! Exact list-failure probabilities of stochastic Chase decoding.
//!
//! For an error composition `(N_e, N_c)` and flip probabilities `q`, the
//! errors left after one flip pattern are, per class, an independent sum of
//! `Bin(N_{e,j}, 1 - q_j)` (errors that were not flipped) and
//! `Bin(N_{c,j}, q_j)` (correct bits that were flipped). A trial fails when
//! the total exceeds `t`. All distributions are carried truncated to
//! `0..=t` plus a lumped `> t` mass, so one evaluation costs `O(M t^2)`.
//!
//! The list failure given a class composition sums over error compositions
//! weighted by `prod_j Bin(N_j, p_j)`, raising the single-trial failure to
//! the power `L`.

mod optimize;

pub use optimize::{
    optimize_flip, optimize_flip_with, rdf_vs_optimal_report, FlipOptimum, GridScenario, ListRule,
    OptimizeOptions, ReportRow, StartOutcome,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Maximum number of error compositions summed by one evaluation.
pub const MAX_ENUMERATION_TERMS: f64 = 1e8;
/// Largest block handled by the brute-force oracle.
pub const MAX_BRUTE_FORCE_BITS: u64 = 22;
/// Error compositions whose binomial weight is below `exp(-PRUNE_LOG)`
/// times the class mode are dropped (total dropped mass < N * 1e-40).
const PRUNE_LOG: f64 = 92.1;

/// Errors and correct positions per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorComposition {
    errors: Vec<u64>,
    correct: Vec<u64>,
}

impl ErrorComposition {
    pub fn new(errors: Vec<u64>, correct: Vec<u64>) -> Result<Self> {
        if errors.len() != correct.len() || errors.is_empty() {
            return invalid("error and correct counts must be nonempty and of equal length");
        }
        Ok(Self { errors, correct })
    }

    /// Split a class composition into `n_e` errors and the remaining correct bits.
    pub fn from_composition(composition: &[u64], errors: &[u64]) -> Result<Self> {
        if composition.len() != errors.len() {
            return invalid("composition and error counts differ in length");
        }
        let correct = composition
            .iter()
            .zip(errors)
            .map(|(&n, &e)| {
                n.checked_sub(e)
                    .ok_or_else(|| Error::InvalidInput(format!("{e} errors exceed class size {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(errors.to_vec(), correct)
    }

    pub fn errors(&self) -> &[u64] {
        &self.errors
    }

    pub fn correct(&self) -> &[u64] {
        &self.correct
    }

    pub fn classes(&self) -> usize {
        self.errors.len()
    }

    pub fn total_errors(&self) -> u64 {
        self.errors.iter().sum()
    }

    pub fn block_length(&self) -> u64 {
        self.errors.iter().chain(&self.correct).sum()
    }
}

/// Distribution of the residual error count, truncated at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDistribution {
    /// Entries `0..=t` followed by the lumped mass of `> t`.
    pub pmf: Vec<f64>,
}

impl ResidualDistribution {
    fn point(t: usize) -> Self {
        let mut pmf = vec![0.0; t + 2];
        pmf[0] = 1.0;
        Self { pmf }
    }

    pub fn t(&self) -> usize {
        self.pmf.len() - 2
    }

    /// `Pr(residual <= t)`.
    pub fn success(&self) -> f64 {
        neumaier_sum(self.pmf[..self.pmf.len() - 1].iter().copied())
    }

    pub fn failure(&self) -> f64 {
        self.pmf[self.pmf.len() - 1]
    }

    /// `tails[k] = Pr(residual > k)` for `k = 0..=t`, summed from the top so
    /// small tails keep their relative precision.
    fn tails(&self) -> Vec<f64> {
        let t = self.t();
        let mut tails = vec![0.0; t + 1];
        let mut acc = self.pmf[t + 1];
        for k in (0..=t).rev() {
            tails[k] = acc;
            acc += self.pmf[k];
        }
        tails
    }

    fn convolve(&self, other: &Self) -> Self {
        let t = self.t();
        let mut pmf = vec![0.0; t + 2];
        for (i, &a) in self.pmf[..=t].iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.pmf[..=t - i].iter().enumerate() {
                pmf[i + j] += a * b;
            }
        }
        pmf[t + 1] = self.pmf[t + 1] + Self::cross_tail(&self.pmf[..=t], &other.tails());
        Self { pmf }
    }

    /// `sum_i a_i Pr(B > t - i)`: mass pushed past `t` by adding `B`.
    fn cross_tail(a: &[f64], b_tails: &[f64]) -> f64 {
        let t = a.len() - 1;
        a.iter().enumerate().map(|(i, &x)| x * b_tails[t - i]).sum()
    }
}

pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let s = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - s) + v;
        } else {
            c += (v - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// `ln C(n, k)`.
pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k <= 64 {
        (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
    } else {
        libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
    }
}

fn ln_pow(x: f64, e: u64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * x.ln()
    }
}

/// `ln Pr(Bin(n, pi) = k)`.
pub(crate) fn ln_binomial_pmf(n: u64, k: u64, pi: f64) -> f64 {
    ln_choose(n, k) + ln_pow(pi, k) + (if n - k == 0 { 0.0 } else { (n - k) as f64 * (-pi).ln_1p() })
}

/// `ln C(n, k)` for `k = 0..=min(n, t)`.
fn ln_choose_row(n: u64, t: usize) -> Vec<f64> {
    let top = (t as u64).min(n);
    let mut row = Vec::with_capacity(top as usize + 1);
    let mut acc = 0.0;
    row.push(acc);
    for k in 1..=top {
        acc += ((n - k + 1) as f64 / k as f64).ln();
        row.push(acc);
    }
    row
}

/// `e ln x`, with `0 ln 0 = 0`.
fn times_ln(e: u64, ln_x: f64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * ln_x
    }
}

/// `Bin(n, pi)` truncated to `0..=t` plus the `> t` lump, given
/// `ln C(n, k)`, `ln pi` and `ln(1 - pi)`.
///
/// A small lump is summed term by term past `t` instead of taken as
/// `1 - sum`, which would cancel.
fn truncated_binomial(row: &[f64], n: u64, ln_pi: f64, ln_rest: f64, t: usize) -> ResidualDistribution {
    let term = |k: u64, ln_c: f64| (ln_c + times_ln(k, ln_pi) + times_ln(n - k, ln_rest)).exp();
    let mut pmf = vec![0.0; t + 2];
    for (k, &c) in row.iter().enumerate() {
        pmf[k] = term(k as u64, c);
    }
    let head: f64 = pmf[..=t].iter().sum();
    pmf[t + 1] = if n <= t as u64 {
        0.0
    } else if head < 0.5 {
        (1.0 - head).max(0.0)
    } else {
        let mut ln_c = row[t];
        let mut lump = 0.0;
        for k in t as u64 + 1..=n {
            ln_c += ((n - k + 1) as f64 / k as f64).ln();
            let v = term(k, ln_c);
            lump += v;
            if v <= lump * 1e-17 {
                break;
            }
        }
        lump
    };
    ResidualDistribution { pmf }
}

fn check_flip_vector(q: &[f64], classes: usize) -> Result<()> {
    if q.len() != classes {
        return invalid(format!("flip vector has {} entries, expected {classes}", q.len()));
    }
    if let Some(bad) = q.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return invalid(format!("flip probability {bad} outside [0, 1]"));
    }
    Ok(())
}

/// Rows of `ln C(n, k)` for the error and correct counts of one class.
struct ChooseRows {
    errors: Vec<f64>,
    correct: Vec<f64>,
}

impl ChooseRows {
    fn new(errors: u64, correct: u64, t: usize) -> Self {
        Self { errors: ln_choose_row(errors, t), correct: ln_choose_row(correct, t) }
    }
}

fn class_residual(errors: u64, correct: u64, q: f64, t: usize, rows: &ChooseRows) -> ResidualDistribution {
    let (ln_q, ln_keep) = (q.ln(), (-q).ln_1p());
    truncated_binomial(&rows.errors, errors, ln_keep, ln_q, t)
        .convolve(&truncated_binomial(&rows.correct, correct, ln_q, ln_keep, t))
}

/// Residual error distribution after one flip pattern.
pub fn residual_distribution(comp: &ErrorComposition, q: &[f64], t: u64) -> Result<ResidualDistribution> {
    check_flip_vector(q, comp.classes())?;
    let t = t as usize;
    Ok(comp
        .errors
        .iter()
        .zip(&comp.correct)
        .zip(q)
        .fold(ResidualDistribution::point(t), |acc, ((&e, &c), &qj)| acc.convolve(&class_residual(e, c, qj, t, &ChooseRows::new(e, c, t)))))
}

/// Probability that a single flip pattern leaves more than `t` errors.
pub fn single_trial_failure(comp: &ErrorComposition, q: &[f64], t: u64) -> Result<f64> {
    Ok(residual_distribution(comp, q, t)?.failure())
}

/// Enumerates every flip pattern. Validation oracle for
/// [`single_trial_failure`].
pub fn brute_force_single_trial(comp: &ErrorComposition, q: &[f64], t: u64) -> Result<f64> {
    check_flip_vector(q, comp.classes())?;
    let n = comp.block_length();
    if n > MAX_BRUTE_FORCE_BITS {
        return Err(Error::Budget {
            what: "brute-force enumeration bits",
            requested: n as f64,
            limit: MAX_BRUTE_FORCE_BITS as f64,
        });
    }
    // Position layout: per class, errors then correct bits.
    let mut flip_prob = Vec::with_capacity(n as usize);
    let mut is_error = Vec::with_capacity(n as usize);
    for j in 0..comp.classes() {
        for _ in 0..comp.errors[j] {
            flip_prob.push(q[j]);
            is_error.push(true);
        }
        for _ in 0..comp.correct[j] {
            flip_prob.push(q[j]);
            is_error.push(false);
        }
    }
    let mut total = 0.0;
    for pattern in 0u64..(1u64 << n) {
        let mut prob = 1.0;
        let mut residual = 0u64;
        for i in 0..n as usize {
            let flipped = pattern >> i & 1 == 1;
            prob *= if flipped { flip_prob[i] } else { 1.0 - flip_prob[i] };
            if flipped != is_error[i] {
                residual += 1;
            }
        }
        if residual > t && prob > 0.0 {
            total += prob;
        }
    }
    Ok(total)
}

/// Which error compositions enter the outer sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuterSum {
    /// Only `N_e > t`: blocks already within the decoding radius count as
    /// successes regardless of the patterns.
    BeyondRadius,
    /// Every error composition, matching a decoder that only sees the random
    /// patterns.
    All,
}

struct ClassWindow {
    size: u64,
    first_error_count: u64,
    weights: Vec<f64>,
    rows: Vec<ChooseRows>,
}

/// Precomputed outer-sum structure for a class composition and channel.
pub struct FailureModel {
    t: usize,
    outer: OuterSum,
    classes: Vec<ClassWindow>,
}

impl FailureModel {
    pub fn new(composition: &[u64], p: &[f64], t: u64, outer: OuterSum) -> Result<Self> {
        crate::channel::validate_crossovers(p)?;
        if composition.len() != p.len() {
            return invalid("composition and crossover vector differ in length");
        }
        let mut terms = 1.0f64;
        let classes = composition
            .iter()
            .zip(p)
            .map(|(&n, &pj)| {
                let logs: Vec<f64> = (0..=n).map(|k| ln_binomial_pmf(n, k, pj)).collect();
                let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let keep = |l: f64| l >= peak - PRUNE_LOG;
                let lo = logs.iter().position(|&l| keep(l)).unwrap_or(0);
                let hi = logs.iter().rposition(|&l| keep(l)).unwrap_or(0);
                terms *= (hi - lo + 1) as f64;
                ClassWindow {
                    size: n,
                    first_error_count: lo as u64,
                    weights: logs[lo..=hi].iter().map(|l| l.exp()).collect(),
                    rows: (lo as u64..=hi as u64).map(|e| ChooseRows::new(e, n - e, t as usize)).collect(),
                }
            })
            .collect();
        if terms > MAX_ENUMERATION_TERMS {
            return Err(Error::Budget {
                what: "error-composition enumeration terms",
                requested: terms,
                limit: MAX_ENUMERATION_TERMS,
            });
        }
        Ok(Self { t: t as usize, outer, classes })
    }

    pub fn classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of error compositions visited per evaluation.
    pub fn terms(&self) -> usize {
        self.classes.iter().map(|c| c.weights.len()).product()
    }

    /// `Pr(E_L | N)` for flip vector `q` and list length `list_len`.
    ///
    /// `list_len` may be any real `>= 1`; the per-composition miss
    /// probability is evaluated as `exp(L ln f)` with `f` the single-pattern
    /// failure probability.
    pub fn evaluate(&self, q: &[f64], list_len: f64) -> Result<f64> {
        check_flip_vector(q, self.classes.len())?;
        if !(list_len >= 1.0) {
            return invalid(format!("list length must be at least 1, got {list_len}"));
        }
        let t = self.t;
        let residuals: Vec<Vec<ResidualDistribution>> = self
            .classes
            .iter()
            .zip(q)
            .map(|(c, &qj)| {
                c.rows
                    .iter()
                    .enumerate()
                    .map(|(off, rows)| {
                        let e = c.first_error_count + off as u64;
                        class_residual(e, c.size - e, qj, t, rows)
                    })
                    .collect()
            })
            .collect();
        let last = self.classes.len() - 1;
        let last_tails: Vec<Vec<f64>> = residuals[last].iter().map(ResidualDistribution::tails).collect();
        let ctx = Walk { model: self, residuals: &residuals, last_tails: &last_tails, list_len };

        let first = &self.classes[0];
        let partials: Vec<f64> = (0..first.weights.len())
            .into_par_iter()
            .map(|k| {
                let mut terms = Vec::new();
                ctx.descend(0, k, ResidualDistribution::point(t), 1.0, 0, &mut terms);
                neumaier_sum(terms)
            })
            .collect();
        let v = neumaier_sum(partials);
        if !v.is_finite() {
            return Err(Error::Numerical("list failure probability is not finite".into()));
        }
        Ok(v.clamp(0.0, 1.0))
    }
}

struct Walk<'a> {
    model: &'a FailureModel,
    residuals: &'a [Vec<ResidualDistribution>],
    last_tails: &'a [Vec<f64>],
    list_len: f64,
}

impl Walk<'_> {
    fn descend(&self, class: usize, k: usize, acc: ResidualDistribution, weight: f64, errors: u64, out: &mut Vec<f64>) {
        let window = &self.model.classes[class];
        let weight = weight * window.weights[k];
        let errors = errors + window.first_error_count + k as u64;
        let t = self.model.t;
        if class + 1 == self.model.classes.len() {
            if self.model.outer == OuterSum::BeyondRadius && errors as usize <= t {
                return;
            }
            let failure = acc.pmf[t + 1] + ResidualDistribution::cross_tail(&acc.pmf[..=t], &self.last_tails[k]);
            out.push(weight * miss_power(failure, self.list_len));
            return;
        }
        let acc = acc.convolve(&self.residuals[class][k]);
        for next in 0..self.model.classes[class + 1].weights.len() {
            self.descend(class + 1, next, acc.clone(), weight, errors, out);
        }
    }
}

/// `f^L` for a single-pattern failure probability `f`.
fn miss_power(failure: f64, list_len: f64) -> f64 {
    if failure >= 1.0 {
        1.0
    } else if failure <= 0.0 {
        0.0
    } else {
        (list_len * failure.ln()).exp()
    }
}

/// `Pr(E_L | N)`: probability that none of `L` independent flip patterns
/// brings the residual error count within `t`, summed over error
/// compositions with more than `t` errors.
pub fn list_failure_given_composition(composition: &[u64], p: &[f64], q: &[f64], t: u64, list_len: f64) -> Result<f64> {
    FailureModel::new(composition, p, t, OuterSum::BeyondRadius)?.evaluate(q, list_len)
}

/// Like [`list_failure_given_composition`] but summing over every error
/// composition, i.e. the probability that none of the `L` patterns alone
/// leads to a successful decode.
pub fn list_miss_probability(composition: &[u64], p: &[f64], q: &[f64], t: u64, list_len: f64) -> Result<f64> {
    FailureModel::new(composition, p, t, OuterSum::All)?.evaluate(q, list_len)
}
