//! Reverse water-filling over parallel Bernoulli sources.
//!
//! Each reliability class is a Bernoulli(p_j) error source. Given a total
//! Hamming distortion budget `D = t / N`, the per-class distortions are
//! `D_j = min(nu, p_j)` for a common water level `nu`, and the test flip
//! probabilities follow from the reverse BSC relation
//! `p_j = q_j (1 - D_j) + (1 - q_j) D_j`. The same machinery runs per index
//! for BI-AWGN blocks, and in the large-block limit through an integral over
//! the density of `|y|`.

use serde::{Deserialize, Serialize};

use crate::channel::{crossover_of_llr, validate_crossovers};
use crate::error::{invalid, Error, Result};
use crate::quad;

/// Bisection stops once `|g(nu)|` drops below this.
pub const BISECTION_TOL: f64 = 1e-12;
/// Hard cap on bisection steps.
pub const BISECTION_MAX_ITER: usize = 200;
/// Largest list-size exponent reported as an integer count.
pub const MAX_EXACT_LIST_LOG2: f64 = 50.0;

/// Binary entropy in bits.
///
/// # Panics
///
/// Panics if `x` is outside `[0, 1]`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "binary entropy argument {x} outside [0, 1]");
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (-x).ln_1p() / std::f64::consts::LN_2
}

/// Optimal flip probability of a single Bernoulli(p) source at distortion `d`.
pub fn scalar_flip(p: f64, d: f64) -> f64 {
    if p <= d {
        0.0
    } else {
        (p - d) / (1.0 - 2.0 * d)
    }
}

/// List size `2^{N R}`, as an exponent and, when small enough, a count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ListSize {
    /// `N * R` in bits.
    pub log2: f64,
    /// `max(1, ceil(2^{N R}))`, or `None` when the exponent exceeds
    /// [`MAX_EXACT_LIST_LOG2`].
    pub count: Option<u64>,
}

impl ListSize {
    pub fn is_saturated(&self) -> bool {
        self.count.is_none()
    }

    /// `2^{N R}` as a real number (no rounding).
    pub fn real(&self) -> f64 {
        self.log2.exp2()
    }
}

pub fn list_size(n: u64, rate: f64) -> Result<ListSize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return invalid(format!("rate must be finite and nonnegative, got {rate}"));
    }
    let log2 = n as f64 * rate;
    let count = if log2 > MAX_EXACT_LIST_LOG2 {
        None
    } else {
        Some((log2.exp2().ceil() as u64).max(1))
    };
    Ok(ListSize { log2, count })
}

/// Discrete water-filling problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillInput {
    composition: Vec<u64>,
    p: Vec<f64>,
    t: u64,
    block_length: u64,
}

impl WaterFillInput {
    /// Block length is the total of the composition.
    pub fn new(composition: Vec<u64>, p: Vec<f64>, t: u64) -> Result<Self> {
        let n = composition.iter().sum();
        Self::with_block_length(composition, p, t, n)
    }

    /// Explicit block length for `D = t / N`. Class weights remain
    /// `N_j / sum(N_j)`, so a composition that does not add up to the block
    /// length is still well defined.
    pub fn with_block_length(composition: Vec<u64>, p: Vec<f64>, t: u64, block_length: u64) -> Result<Self> {
        validate_crossovers(&p)?;
        if composition.len() != p.len() {
            return invalid(format!(
                "composition has {} classes but {} crossover probabilities were given",
                composition.len(),
                p.len()
            ));
        }
        if composition.iter().sum::<u64>() == 0 {
            return invalid("composition is empty");
        }
        if block_length == 0 {
            return invalid("block length must be positive");
        }
        if t > block_length {
            return invalid(format!("radius t = {t} exceeds block length {block_length}"));
        }
        Ok(Self { composition, p, t, block_length })
    }

    pub fn composition(&self) -> &[u64] {
        &self.composition
    }

    pub fn crossovers(&self) -> &[f64] {
        &self.p
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn block_length(&self) -> u64 {
        self.block_length
    }

    /// Distortion budget `t / N`.
    pub fn distortion(&self) -> f64 {
        self.t as f64 / self.block_length as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        let total = self.composition.iter().sum::<u64>() as f64;
        self.composition.iter().map(|&c| c as f64 / total).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFillSolution {
    pub nu: f64,
    pub d_star: Vec<f64>,
    pub q: Vec<f64>,
    /// Sum rate in bits per symbol.
    pub rate: f64,
    pub list_size: ListSize,
}

impl WaterFillSolution {
    pub fn log2_list_size(&self) -> f64 {
        self.list_size.log2
    }
}

/// Water level for weighted classes: `sum_j w_j min(nu, p_j) = d`.
///
/// Returns `None` when the budget covers every class (`d >= sum_j w_j p_j`).
fn water_level(weights: &[f64], p: &[f64], d: f64) -> Option<f64> {
    let g = |nu: f64| -> f64 { weights.iter().zip(p).map(|(w, &pj)| w * nu.min(pj)).sum::<f64>() - d };
    let p_max = p.iter().cloned().fold(0.0, f64::max);
    if g(p_max) <= 0.0 {
        return None;
    }
    if d <= 0.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, p_max);
    let mut nu = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITER {
        nu = 0.5 * (lo + hi);
        let v = g(nu);
        if v.abs() < BISECTION_TOL {
            break;
        }
        if v > 0.0 {
            hi = nu;
        } else {
            lo = nu;
        }
    }
    // g is linear between breakpoints: solve exactly on the segment that
    // bisection landed in, keeping the result only if it stays there.
    let (covered, active) = weights.iter().zip(p).fold((0.0, 0.0), |(c, a), (w, &pj)| {
        if pj <= nu {
            (c + w * pj, a)
        } else {
            (c, a + w)
        }
    });
    if active > 0.0 {
        let exact = (d - covered) / active;
        let same_segment = p.iter().all(|&pj| (pj <= nu) == (pj <= exact));
        if exact >= 0.0 && same_segment {
            return Some(exact);
        }
    }
    Some(nu)
}

fn solve_weighted(weights: &[f64], p: &[f64], d: f64) -> (f64, Vec<f64>, Vec<f64>, f64) {
    match water_level(weights, p, d) {
        None => {
            let p_max = p.iter().cloned().fold(0.0, f64::max);
            (p_max, p.to_vec(), vec![0.0; p.len()], 0.0)
        }
        Some(nu) => {
            let d_star: Vec<f64> = p.iter().map(|&pj| nu.min(pj)).collect();
            let q = p.iter().map(|&pj| scalar_flip(pj, nu)).collect();
            let rate = weights
                .iter()
                .zip(p.iter().zip(&d_star))
                .map(|(w, (&pj, &dj))| w * (binary_entropy(pj) - binary_entropy(dj)).max(0.0))
                .sum();
            (nu, d_star, q, rate)
        }
    }
}

pub fn solve_waterfill(input: &WaterFillInput) -> Result<WaterFillSolution> {
    let (nu, d_star, q, rate) = solve_weighted(&input.weights(), &input.p, input.distortion());
    Ok(WaterFillSolution {
        nu,
        d_star,
        q,
        rate,
        list_size: list_size(input.block_length, rate)?,
    })
}

/// Per-index water-filling for a realized BI-AWGN block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnAllocation {
    pub nu: f64,
    pub d_star: Vec<f64>,
    pub q: Vec<f64>,
    /// `(1/N) sum_i max(0, H(p_i) - H(D_i))`.
    pub rate: f64,
}

impl AwgnAllocation {
    pub fn list_size(&self) -> Result<ListSize> {
        list_size(self.d_star.len() as u64, self.rate)
    }
}

/// Water level over per-index crossover probabilities `p(l_i)` with budget
/// `D = t / N`.
pub fn awgn_waterfill(p_seq: &[f64], t: u64) -> Result<AwgnAllocation> {
    let n = p_seq.len();
    if n == 0 {
        return invalid("empty block");
    }
    if t > n as u64 {
        return invalid(format!("radius t = {t} exceeds block length {n}"));
    }
    validate_crossovers(p_seq)?;
    // Group equal probabilities into classes so that a constant block is
    // exactly the single-class problem.
    let mut sorted: Vec<f64> = p_seq.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for v in sorted {
        if values.last() == Some(&v) {
            *counts.last_mut().unwrap() += 1;
        } else {
            values.push(v);
            counts.push(1);
        }
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let d = t as f64 / n as f64;
    let (nu, _, _, rate) = solve_weighted(&weights, &values, d);
    let feasible = water_level(&weights, &values, d).is_some();
    let (d_star, q) = if feasible {
        (
            p_seq.iter().map(|&p| nu.min(p)).collect(),
            p_seq.iter().map(|&p| scalar_flip(p, nu)).collect(),
        )
    } else {
        (p_seq.to_vec(), vec![0.0; n])
    };
    Ok(AwgnAllocation { nu, d_star, q, rate })
}

/// Flip rule `q(l)` for BI-AWGN at a fixed water level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnFlipRule {
    pub sigma: f64,
    pub distortion: f64,
    pub nu: f64,
    /// LLR magnitude at and beyond which no flipping is done.
    pub threshold_llr: f64,
    /// Sampled `(llr, q(llr))` pairs.
    pub table: Vec<(f64, f64)>,
    /// Set when the budget already covers the hard-decision error rate.
    pub no_flip: bool,
}

impl AwgnFlipRule {
    pub fn flip_probability(&self, llr: f64) -> f64 {
        rule_flip(llr, self.nu, self.threshold_llr, self.no_flip)
    }
}

/// Number of `(llr, q)` samples in a rule table.
pub const RULE_TABLE_POINTS: usize = 101;

/// LLR magnitude at which `p(l) = nu`.
pub fn llr_threshold(nu: f64) -> f64 {
    ((1.0 - nu) / nu).ln()
}

/// Density of `|y|` for `y = +-1 + N(0, sigma^2)`.
fn abs_output_density(r: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    ((-(r + 1.0).powi(2) / (2.0 * s2)).exp() + (-(r - 1.0).powi(2) / (2.0 * s2)).exp())
        / (2.0 * std::f64::consts::PI * s2).sqrt()
}

/// `Pr(|y| <= r)`.
fn abs_output_cdf(r: f64, sigma: f64) -> f64 {
    quad::norm_cdf((r - 1.0) / sigma) + quad::norm_cdf((r + 1.0) / sigma) - 1.0
}

/// Expected distortion `E[min(nu, p(2R / sigma^2))]` with `R = |y|`.
pub fn awgn_expected_distortion(nu: f64, sigma: f64) -> f64 {
    let upper = 1.0 + 10.0 * sigma;
    let s2 = sigma * sigma;
    let p_of_r = |r: f64| crossover_of_llr(2.0 * r / s2);
    if nu >= 0.5 {
        return quad::q_function(1.0 / sigma);
    }
    if nu <= 0.0 {
        return 0.0;
    }
    // min(nu, p) = nu below the cutoff radius and p above it.
    let cutoff = 0.5 * s2 * llr_threshold(nu);
    let flat = nu * abs_output_cdf(cutoff, sigma);
    let curved = if cutoff < upper {
        quad::integrate(|r| abs_output_density(r, sigma) * p_of_r(r), cutoff, upper, 1e-13)
    } else {
        0.0
    };
    // Beyond `upper` the density mass is below Q(10) and p(l) is tiny.
    let tail = p_of_r(upper.max(cutoff)) * (1.0 - abs_output_cdf(upper.max(cutoff), sigma));
    flat + curved + tail
}

/// Asymptotic BI-AWGN water level: solves
/// `integral f(r) min(nu, p(2r / sigma^2)) dr = D`.
pub fn awgn_asymptotic_level(sigma: f64, distortion: f64) -> Result<AwgnFlipRule> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("noise standard deviation must be positive, got {sigma}"));
    }
    if !(distortion > 0.0 && distortion < 0.5) {
        return invalid(format!("distortion budget {distortion} outside (0, 1/2)"));
    }
    let hd_rate = quad::q_function(1.0 / sigma);
    if distortion >= hd_rate {
        return Ok(AwgnFlipRule {
            sigma,
            distortion,
            nu: 0.5,
            threshold_llr: 0.0,
            table: table_for(|_| 0.0, 10.0),
            no_flip: true,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut nu = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITER {
        nu = 0.5 * (lo + hi);
        let v = awgn_expected_distortion(nu, sigma) - distortion;
        if v.abs() < BISECTION_TOL || hi - lo < f64::EPSILON * nu {
            break;
        }
        if v > 0.0 {
            hi = nu;
        } else {
            lo = nu;
        }
    }
    if !nu.is_finite() {
        return Err(Error::Numerical("water level bisection diverged".into()));
    }
    let threshold_llr = llr_threshold(nu);
    let table = table_for(|l| rule_flip(l, nu, threshold_llr, false), 1.25 * threshold_llr.max(1.0));
    Ok(AwgnFlipRule { sigma, distortion, nu, threshold_llr, table, no_flip: false })
}

fn rule_flip(llr: f64, nu: f64, threshold: f64, no_flip: bool) -> f64 {
    // Compare LLRs so rounding in p(l) cannot leak a flip past the threshold.
    if no_flip || llr.abs() >= threshold {
        0.0
    } else {
        scalar_flip(crossover_of_llr(llr), nu)
    }
}

fn table_for(q: impl Fn(f64) -> f64, max_llr: f64) -> Vec<(f64, f64)> {
    (0..RULE_TABLE_POINTS)
        .map(|i| {
            let l = max_llr * i as f64 / (RULE_TABLE_POINTS - 1) as f64;
            (l, q(l))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(comp: &[u64], p: &[f64], t: u64) -> WaterFillInput {
        WaterFillInput::new(comp.to_vec(), p.to_vec(), t).unwrap()
    }

    /// Independent oracle: dense scan of g(nu) followed by linear
    /// interpolation on the sign-change cell.
    fn grid_level(weights: &[f64], p: &[f64], d: f64, points: usize) -> f64 {
        let p_max = p.iter().cloned().fold(0.0, f64::max);
        let g = |nu: f64| weights.iter().zip(p).map(|(w, &x)| w * nu.min(x)).sum::<f64>() - d;
        let mut prev = (0.0, g(0.0));
        for i in 1..=points {
            let nu = p_max * i as f64 / points as f64;
            let v = g(nu);
            if v >= 0.0 {
                return prev.0 + (nu - prev.0) * (-prev.1) / (v - prev.1);
            }
            prev = (nu, v);
        }
        p_max
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.11) - 0.499_915_958_164_527_996).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn entropy_rejects_out_of_domain() {
        binary_entropy(1.5);
    }

    #[test]
    fn scalar_flip_values() {
        assert_eq!(scalar_flip(0.01, 0.01), 0.0);
        assert_eq!(scalar_flip(0.5, 0.5), 0.0);
        assert!((scalar_flip(0.001, 0.00098) - 2.003_927_698_288_645_7e-5).abs() < 1e-18);
        assert!((scalar_flip(0.03, 5.0 / 511.0) - 0.020_618_762_475_049_900).abs() < 1e-15);
    }

    #[test]
    fn single_class_reduces_to_scalar_rdf() {
        for &(n, t, p) in &[(511u64, 5u64, 0.03), (1000, 3, 0.01), (63, 1, 0.2), (2041, 2, 0.001)] {
            let sol = solve_waterfill(&input(&[n], &[p], t)).unwrap();
            let d = t as f64 / n as f64;
            assert_eq!(sol.nu, d);
            assert_eq!(sol.q[0], scalar_flip(p, d));
            let rdf = (binary_entropy(p) - binary_entropy(d)).max(0.0);
            assert!((sol.rate - rdf).abs() < 1e-12);
        }
    }

    #[test]
    fn two_class_example() {
        // N = 511 and t = 5 with N_1 = 477, N_2 = 40 reliability classes.
        let inp = WaterFillInput::with_block_length(vec![477, 40], vec![0.02, 0.03], 5, 511).unwrap();
        let sol = solve_waterfill(&inp).unwrap();
        let oracle = grid_level(&inp.weights(), inp.crossovers(), inp.distortion(), 1_000_000);
        assert!((sol.nu - oracle).abs() < 1e-9);
        assert!((sol.nu - 5.0 / 511.0).abs() < 1e-12);
        assert!((sol.q[0] - 0.010_419_161_676_646_707).abs() < 1e-12);
        assert!((sol.q[1] - 0.020_618_762_475_049_900).abs() < 1e-12);
        assert!(sol.rate > 0.0);
        assert_eq!(sol.list_size.log2, 511.0 * sol.rate);
    }

    #[test]
    fn budget_above_mean_crossover_needs_no_flips() {
        let inp = WaterFillInput::with_block_length(vec![477, 40], vec![0.02, 0.03], 11, 511).unwrap();
        let sol = solve_waterfill(&inp).unwrap();
        assert_eq!(sol.q, vec![0.0, 0.0]);
        assert_eq!(sol.rate, 0.0);
        assert_eq!(sol.list_size.count, Some(1));
        assert_eq!(sol.d_star, vec![0.02, 0.03]);
        assert_eq!(sol.nu, 0.03);
    }

    #[test]
    fn rejects_radius_beyond_block() {
        assert!(WaterFillInput::new(vec![3, 2], vec![0.1, 0.2], 6).is_err());
        assert!(WaterFillInput::new(vec![3], vec![0.1, 0.2], 1).is_err());
        assert!(WaterFillInput::new(vec![3], vec![0.7], 1).is_err());
    }

    #[test]
    fn list_size_values() {
        assert_eq!(list_size(511, 0.0).unwrap().count, Some(1));
        let l = list_size(511, 0.001).unwrap();
        assert_eq!(l.count, Some(2));
        let l = list_size(511, 0.1).unwrap();
        assert!(l.is_saturated());
        assert!((l.log2 - 51.1).abs() < 1e-12);
        assert!(list_size(10, -0.1).is_err());
    }

    #[test]
    fn awgn_constant_block_matches_single_class() {
        let p = vec![0.04; 300];
        let a = awgn_waterfill(&p, 4).unwrap();
        let s = solve_waterfill(&input(&[300], &[0.04], 4)).unwrap();
        assert_eq!(a.nu.to_bits(), s.nu.to_bits());
        assert!(a.q.iter().all(|q| q.to_bits() == s.q[0].to_bits()));
    }

    #[test]
    fn awgn_block_budget_covers_noise() {
        let a = awgn_waterfill(&[0.4, 0.1], 1).unwrap();
        assert_eq!(a.q, vec![0.0, 0.0]);
        assert_eq!(a.rate, 0.0);
    }

    #[test]
    fn awgn_block_four_positions() {
        let p = [0.30, 0.20, 0.05, 0.01];
        let a = awgn_waterfill(&p, 1).unwrap();
        // D = 1/4 but mean p = 0.14: budget covers everything.
        assert_eq!(a.q, vec![0.0; 4]);
        // A budget below the mean: N = 4 with t = 0 is trivial, so scale up.
        let p8: Vec<f64> = p.iter().chain(p.iter()).cloned().collect();
        let mut big = Vec::new();
        for _ in 0..25 {
            big.extend_from_slice(&p8);
        }
        let a = awgn_waterfill(&big, 10).unwrap();
        let w = vec![1.0 / big.len() as f64; big.len()];
        let oracle = grid_level(&w, &big, 0.05, 1_000_000);
        assert!((a.nu - oracle).abs() < 1e-9, "{} vs {}", a.nu, oracle);
        let total: f64 = a.d_star.iter().sum();
        assert!((total - 10.0).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_level_small_budget() {
        let r = awgn_asymptotic_level(0.75, 1e-9).unwrap();
        assert!(r.nu < 1e-6);
        assert!(r.threshold_llr > 10.0);
        assert!(!r.no_flip);
    }

    #[test]
    fn asymptotic_level_drops_with_noise() {
        // More noise puts more bits above the water, so the level drops.
        let a = awgn_asymptotic_level(0.5, 0.01).unwrap();
        let b = awgn_asymptotic_level(1.2, 0.01).unwrap();
        assert!(a.nu > b.nu, "{} {}", a.nu, b.nu);
    }

    #[test]
    fn asymptotic_level_no_flip_when_budget_covers_noise() {
        let r = awgn_asymptotic_level(0.5, 0.03).unwrap();
        assert!(r.no_flip);
        assert_eq!(r.nu, 0.5);
        assert!(r.table.iter().all(|&(_, q)| q == 0.0));
        assert!(awgn_asymptotic_level(0.5, 0.0).is_err());
        assert!(awgn_asymptotic_level(-1.0, 0.1).is_err());
    }

    #[test]
    fn asymptotic_rule_cuts_off_at_threshold() {
        let r = awgn_asymptotic_level(0.75, 0.01).unwrap();
        assert!((awgn_expected_distortion(r.nu, 0.75) - 0.01).abs() < 1e-10);
        for &(l, q) in &r.table {
            if l >= r.threshold_llr {
                assert_eq!(q, 0.0);
            } else {
                assert!(q > 0.0);
            }
        }
    }

    #[test]
    fn expected_distortion_at_half_is_hd_rate() {
        let v = awgn_expected_distortion(0.5 - 1e-12, 0.75);
        assert!((v - 0.091_211_219_725_867_87).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn water_is_conserved(
            comp in prop::collection::vec(1u64..400, 1..5),
            p in prop::collection::vec(0.0f64..0.5, 4),
            frac in 0.0f64..1.0,
        ) {
            let m = comp.len();
            let p = p[..m.min(4)].to_vec();
            let comp = comp[..p.len()].to_vec();
            let n: u64 = comp.iter().sum();
            let t = ((n as f64) * frac * 0.5).floor() as u64;
            let inp = WaterFillInput::new(comp, p.clone(), t).unwrap();
            let sol = solve_waterfill(&inp).unwrap();
            let w = inp.weights();
            let mean_p: f64 = w.iter().zip(&p).map(|(w, p)| w * p).sum();
            if inp.distortion() < mean_p {
                let used: f64 = w.iter().zip(&sol.d_star).map(|(w, d)| w * d).sum();
                prop_assert!((used - inp.distortion()).abs() < 1e-9);
            } else {
                prop_assert_eq!(sol.rate, 0.0);
                prop_assert_eq!(&sol.d_star, &p);
            }
            for j in 0..p.len() {
                prop_assert!((sol.d_star[j] - sol.nu.min(p[j])).abs() < 1e-12);
                prop_assert_eq!(sol.q[j] == 0.0, p[j] <= sol.nu);
                prop_assert!(sol.q[j] <= 0.5);
                if sol.q[j] > 0.0 {
                    let conv = sol.q[j] * (1.0 - sol.d_star[j]) + (1.0 - sol.q[j]) * sol.d_star[j];
                    prop_assert!((conv - p[j]).abs() < 1e-12);
                }
            }
            prop_assert!(sol.rate >= 0.0);
        }

        #[test]
        fn splitting_a_class_changes_nothing(
            a in 1u64..300, b in 1u64..300, c in 1u64..300,
            p1 in 0.0f64..0.5, p2 in 0.0f64..0.5, frac in 0.0f64..0.5,
        ) {
            let n = a + b + c;
            let t = (n as f64 * frac).floor() as u64;
            let merged = solve_waterfill(&input(&[a + b, c], &[p1, p2], t)).unwrap();
            let split = solve_waterfill(&input(&[a, b, c], &[p1, p1, p2], t)).unwrap();
            prop_assert!((merged.nu - split.nu).abs() < 1e-12);
            prop_assert!((merged.rate - split.rate).abs() < 1e-12);
            prop_assert!((merged.q[0] - split.q[0]).abs() < 1e-12);
            prop_assert!((merged.q[0] - split.q[1]).abs() < 1e-12);
            prop_assert!((merged.q[1] - split.q[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_is_nonincreasing_in_budget() {
        let comp = [300u64, 150, 60];
        let p = [0.01, 0.05, 0.2];
        let n: u64 = comp.iter().sum();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let t = (n as f64 * 0.12 * i as f64 / 99.0).round() as u64;
            let r = solve_waterfill(&input(&comp, &p, t)).unwrap().rate;
            assert!(r <= prev + 1e-15);
            prev = r;
        }
        assert_eq!(prev, 0.0);
    }
}
