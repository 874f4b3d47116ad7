//! BMS channels viewed as state-dependent binary symmetric channels.
//!
//! Reliability classes are indexed from zero. A block is described by its
//! state vector (class index per position), from which the composition
//! (class counts) follows. The BI-AWGN channel is handled through the same
//! lens: the state is the LLR magnitude and the crossover probability of a
//! position is `1 / (1 + exp(llr))`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Smallest per-index crossover probability used inside likelihoods.
pub const MIN_LIKELIHOOD_P: f64 = 1e-12;

/// Crossover probabilities and class priors of an M-class BMS channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityProfile {
    p: Vec<f64>,
    prior: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn new(p: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        validate_crossovers(&p)?;
        if prior.len() != p.len() {
            return invalid(format!(
                "prior has {} entries but there are {} classes",
                prior.len(),
                p.len()
            ));
        }
        if prior.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return invalid("prior entries must be finite and nonnegative");
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("prior sums to {total}, expected 1"));
        }
        Ok(Self { p, prior })
    }

    /// Profile whose prior is the empirical class frequency of a composition.
    pub fn from_composition(p: Vec<f64>, composition: &CompositionVector) -> Result<Self> {
        let n = composition.total();
        if n == 0 {
            return invalid("composition is empty");
        }
        if composition.counts().len() != p.len() {
            return invalid("composition and crossover vector differ in length");
        }
        let prior = composition
            .counts()
            .iter()
            .map(|&c| c as f64 / n as f64)
            .collect::<Vec<_>>();
        // Renormalize so rounding cannot trip the 1e-12 sum check.
        let total: f64 = prior.iter().sum();
        let prior = prior.into_iter().map(|w| w / total).collect();
        Self::new(p, prior)
    }

    pub fn classes(&self) -> usize {
        self.p.len()
    }

    pub fn crossovers(&self) -> &[f64] {
        &self.p
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}

pub(crate) fn validate_crossovers(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return invalid("at least one reliability class is required");
    }
    if let Some(bad) = p.iter().find(|&&x| !(0.0..=0.5).contains(&x)) {
        return invalid(format!("crossover probability {bad} outside [0, 1/2]"));
    }
    Ok(())
}

/// Per-position reliability class (zero based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVector(Vec<usize>);

impl StateVector {
    pub fn new(states: Vec<usize>, classes: usize) -> Result<Self> {
        if let Some(&s) = states.iter().find(|&&s| s >= classes) {
            return invalid(format!("state {s} out of range for {classes} classes"));
        }
        Ok(Self(states))
    }

    /// Deterministic layout of a composition: class 0 first, then class 1, ...
    pub fn from_composition(composition: &CompositionVector) -> Self {
        let states = composition
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat(j).take(c as usize))
            .collect();
        Self(states)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of positions in each reliability class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionVector(Vec<u64>);

impl CompositionVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Draw `n` i.i.d. states from the profile prior.
pub fn sample_state<R: Rng + ?Sized>(
    profile: &ReliabilityProfile,
    n: usize,
    rng: &mut R,
) -> Result<StateVector> {
    if n == 0 {
        return invalid("block length must be positive");
    }
    let m = profile.classes();
    if m == 1 {
        return Ok(StateVector(vec![0; n]));
    }
    let mut cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &w in profile.prior() {
        acc += w;
        cdf.push(acc);
    }
    let states = (0..n)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * acc;
            // First class whose cumulative prior exceeds u, skipping empty classes.
            cdf.iter()
                .zip(profile.prior())
                .position(|(&c, &w)| u < c && w > 0.0)
                .unwrap_or_else(|| profile.prior().iter().rposition(|&w| w > 0.0).unwrap_or(0))
        })
        .collect();
    Ok(StateVector(states))
}

/// Class counts of a state vector.
pub fn composition(state: &[usize], classes: usize) -> Result<CompositionVector> {
    let mut counts = vec![0u64; classes];
    for &s in state {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => return invalid(format!("state {s} out of range for {classes} classes")),
        }
    }
    Ok(CompositionVector(counts))
}

/// Hard-decision error vector: `E_i ~ Ber(p_{S_i})`.
pub fn sample_errors<R: Rng + ?Sized>(
    state: &StateVector,
    profile: &ReliabilityProfile,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let p = profile.crossovers();
    state
        .as_slice()
        .iter()
        .map(|&s| match p.get(s) {
            Some(&ps) => Ok(u8::from(ps > 0.0 && rng.gen::<f64>() < ps)),
            None => invalid(format!("state {s} out of range for profile")),
        })
        .collect()
}

/// Marginal hard-decision crossover probability `sum_j p_j Pr(S = j)`.
pub fn hd_crossover(profile: &ReliabilityProfile) -> f64 {
    profile
        .crossovers()
        .iter()
        .zip(profile.prior())
        .map(|(p, w)| p * w)
        .sum()
}

/// BPSK over AWGN: `y_i = (-1)^{x_i} + z_i`, `z_i ~ N(0, sigma^2)`.
pub fn awgn_transmit<R: Rng + ?Sized>(codeword: &[u8], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("noise standard deviation must be positive, got {sigma}"));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(codeword
        .iter()
        .map(|&x| if x == 0 { 1.0 } else { -1.0 } + noise.sample(rng))
        .collect())
}

/// Crossover probability of a BSC selected by LLR magnitude `llr`.
pub fn crossover_of_llr(llr: f64) -> f64 {
    // 1 / (1 + e^l) without overflow for large l.
    let e = (-llr).exp();
    e / (1.0 + e)
}

/// Hard decisions and reliabilities of a BI-AWGN block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwgnObservation {
    pub sigma: f64,
    pub y_tilde: Vec<f64>,
    pub hd: Vec<u8>,
    /// LLR magnitudes `2 r_i / sigma^2`.
    pub llr_mag: Vec<f64>,
    pub p_of_llr: Vec<f64>,
    /// `|y_i|`.
    pub r: Vec<f64>,
}

pub fn awgn_observe(y_tilde: &[f64], sigma: f64) -> Result<AwgnObservation> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("noise standard deviation must be positive, got {sigma}"));
    }
    let scale = 2.0 / (sigma * sigma);
    let r: Vec<f64> = y_tilde.iter().map(|y| y.abs()).collect();
    let llr_mag: Vec<f64> = r.iter().map(|r| scale * r).collect();
    Ok(AwgnObservation {
        sigma,
        y_tilde: y_tilde.to_vec(),
        // Ties at exactly zero decide 0.
        hd: y_tilde.iter().map(|&y| u8::from(y < 0.0)).collect(),
        p_of_llr: llr_mag.iter().map(|&l| crossover_of_llr(l)).collect(),
        llr_mag,
        r,
    })
}

/// Log-likelihood of `candidate` given hard decisions `hd` over independent
/// BSCs with crossover `per_index_p[i]`.
pub fn log_likelihood(candidate: &[u8], hd: &[u8], per_index_p: &[f64]) -> Result<f64> {
    if candidate.len() != hd.len() || hd.len() != per_index_p.len() {
        return invalid(format!(
            "length mismatch: candidate {}, hd {}, reliabilities {}",
            candidate.len(),
            hd.len(),
            per_index_p.len()
        ));
    }
    Ok(candidate
        .iter()
        .zip(hd)
        .zip(per_index_p)
        .map(|((&c, &h), &p)| {
            let p = p.clamp(MIN_LIKELIHOOD_P, 0.5);
            if c == h {
                (-p).ln_1p()
            } else {
                p.ln()
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn profile(p: &[f64], prior: &[f64]) -> ReliabilityProfile {
        ReliabilityProfile::new(p.to_vec(), prior.to_vec()).unwrap()
    }

    #[test]
    fn single_class_state_is_constant() {
        let prof = profile(&[0.1], &[1.0]);
        let s = sample_state(&prof, 17, &mut stream(1)).unwrap();
        assert!(s.as_slice().iter().all(|&x| x == 0));
        assert_eq!(s.len(), 17);
    }

    #[test]
    fn degenerate_prior_selects_one_class() {
        let prof = profile(&[0.1, 0.2], &[1.0, 0.0]);
        let s = sample_state(&prof, 5, &mut stream(2)).unwrap();
        assert_eq!(s.as_slice(), &[0, 0, 0, 0, 0]);
        let prof = profile(&[0.1, 0.2], &[0.0, 1.0]);
        let s = sample_state(&prof, 5, &mut stream(2)).unwrap();
        assert_eq!(s.as_slice(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn balanced_prior_composition_concentrates() {
        // 3 sigma for Bin(1e6, 1/2) is 1.5e-3 of N.
        let prof = profile(&[0.1, 0.2], &[0.5, 0.5]);
        let n = 1_000_000;
        let s = sample_state(&prof, n, &mut stream(3)).unwrap();
        let c = composition(s.as_slice(), 2).unwrap();
        let frac = c.counts()[0] as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.002, "{frac}");
    }

    #[test]
    fn zero_length_state_is_rejected() {
        let prof = profile(&[0.1], &[1.0]);
        assert!(sample_state(&prof, 0, &mut stream(0)).is_err());
    }

    #[test]
    fn composition_counts() {
        assert_eq!(composition(&[0, 0, 1, 0], 2).unwrap().counts(), &[3, 1]);
        assert_eq!(composition(&[0, 0, 0], 3).unwrap().counts(), &[3, 0, 0]);
        assert_eq!(composition(&[], 2).unwrap().counts(), &[0, 0]);
        assert!(composition(&[0, 2], 2).is_err());
    }

    #[test]
    fn zero_crossover_gives_no_errors() {
        let prof = profile(&[0.0, 0.0], &[0.5, 0.5]);
        let s = sample_state(&prof, 1000, &mut stream(4)).unwrap();
        let e = sample_errors(&s, &prof, &mut stream(5)).unwrap();
        assert!(e.iter().all(|&b| b == 0));
    }

    #[test]
    fn half_crossover_error_weight() {
        let prof = profile(&[0.5, 0.5], &[0.3, 0.7]);
        let n = 1_000_000;
        let s = sample_state(&prof, n, &mut stream(6)).unwrap();
        let e = sample_errors(&s, &prof, &mut stream(7)).unwrap();
        let w = e.iter().map(|&b| b as usize).sum::<usize>() as f64 / n as f64;
        assert!((w - 0.5).abs() < 0.002, "{w}");
    }

    #[test]
    fn mean_error_weight_bsc() {
        // Np = 15.33, sd of the mean over 1e5 blocks = sqrt(Np(1-p))/sqrt(1e5) ~ 0.0122.
        let prof = profile(&[0.03], &[1.0]);
        let s = StateVector::from_composition(&CompositionVector::new(vec![511]));
        let mut rng = stream(8);
        let trials = 100_000;
        let total: usize = (0..trials)
            .map(|_| sample_errors(&s, &prof, &mut rng).unwrap().iter().map(|&b| b as usize).sum::<usize>())
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 15.33).abs() < 0.1, "{mean}");
    }

    #[test]
    fn per_class_error_rates_within_four_sigma() {
        let prof = profile(&[0.02, 0.3, 0.5], &[0.5, 0.3, 0.2]);
        let n = 2_000_000;
        let s = sample_state(&prof, n, &mut stream(9)).unwrap();
        let e = sample_errors(&s, &prof, &mut stream(10)).unwrap();
        let mut ones = [0u64; 3];
        let mut counts = [0u64; 3];
        for (&st, &b) in s.as_slice().iter().zip(&e) {
            counts[st] += 1;
            ones[st] += b as u64;
        }
        for j in 0..3 {
            let p = prof.crossovers()[j];
            let nj = counts[j] as f64;
            assert!(nj >= 1e5);
            let sd = (p * (1.0 - p) / nj).sqrt();
            let rate = ones[j] as f64 / nj;
            assert!((rate - p).abs() < 4.0 * sd, "class {j}: {rate} vs {p}");
        }
    }

    #[test]
    fn hd_crossover_values() {
        assert_eq!(hd_crossover(&profile(&[0.1], &[1.0])), 0.1);
        assert!((hd_crossover(&profile(&[0.02, 0.03], &[0.5, 0.5])) - 0.025).abs() < 1e-15);
        let p = ReliabilityProfile::from_composition(vec![0.02, 0.03], &CompositionVector::new(vec![477, 40])).unwrap();
        assert!((hd_crossover(&p) - 0.020_773_694_390_715_667).abs() < 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(ReliabilityProfile::new(vec![0.6], vec![1.0]).is_err());
        assert!(ReliabilityProfile::new(vec![0.1, 0.2], vec![0.5, 0.4]).is_err());
        assert!(ReliabilityProfile::new(vec![0.1, 0.2], vec![1.0]).is_err());
        assert!(ReliabilityProfile::new(vec![0.1, 0.1], vec![0.5, 0.5]).is_ok());
        assert!(ReliabilityProfile::new(vec![0.5], vec![1.0]).is_ok());
    }

    #[test]
    fn awgn_noiseless_limit() {
        let x = [0u8, 1, 1, 0, 1];
        let y = awgn_transmit(&x, 1e-9, &mut stream(11)).unwrap();
        for (&b, &v) in x.iter().zip(&y) {
            let want = if b == 0 { 1.0 } else { -1.0 };
            assert!((v - want).abs() < 1e-6);
        }
        assert!(awgn_transmit(&x, 0.0, &mut stream(11)).is_err());
    }

    #[test]
    fn awgn_moments() {
        // sd of mean = 0.5e-3; sd of sample variance = sigma^2 sqrt(2/n) ~ 3.5e-4.
        let n = 1_000_000;
        let y = awgn_transmit(&vec![0u8; n], 0.5, &mut stream(12)).unwrap();
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 0.0015, "{mean}");
        assert!((var - 0.25).abs() < 0.002, "{var}");
        let y = awgn_transmit(&vec![1u8; 100_000], 0.5, &mut stream(13)).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean + 1.0).abs() < 0.01);
    }

    #[test]
    fn observe_examples() {
        let o = awgn_observe(&[0.0], 1.0).unwrap();
        assert_eq!(o.hd, vec![0]);
        assert_eq!(o.llr_mag, vec![0.0]);
        assert_eq!(o.p_of_llr, vec![0.5]);

        let o = awgn_observe(&[1.0], 1.0).unwrap();
        assert_eq!(o.llr_mag[0], 2.0);
        assert!((o.p_of_llr[0] - 0.119_202_922_022_117_56).abs() < 1e-15);

        let o = awgn_observe(&[-0.5], 0.5).unwrap();
        assert_eq!(o.hd, vec![1]);
        assert!((o.llr_mag[0] - 4.0).abs() < 1e-15);
        assert_eq!(o.r, vec![0.5]);
    }

    #[test]
    fn observation_invariants() {
        let y = awgn_transmit(&vec![0u8; 10_000], 0.8, &mut stream(14)).unwrap();
        let o = awgn_observe(&y, 0.8).unwrap();
        for i in 0..y.len() {
            assert!((o.p_of_llr[i] - 1.0 / (1.0 + o.llr_mag[i].exp())).abs() < 1e-12);
            assert_eq!(o.hd[i] == 0, y[i] >= 0.0);
        }
    }

    #[test]
    fn hard_decision_error_rate_matches_gaussian_tail() {
        // Q(1/sigma) for sigma = 0.5, 0.75, 1.2.
        let cases = [
            (0.5, 0.022_750_131_948_179_2),
            (0.75, 0.091_211_219_725_867_9),
            (1.2, 0.202_328_380_963_643_6),
        ];
        let n = 1_000_000;
        for (k, &(sigma, q)) in cases.iter().enumerate() {
            let y = awgn_transmit(&vec![0u8; n], sigma, &mut stream(20 + k as u64)).unwrap();
            let o = awgn_observe(&y, sigma).unwrap();
            let errs = o.hd.iter().filter(|&&b| b == 1).count() as f64 / n as f64;
            let sd = (q * (1.0 - q) / n as f64).sqrt();
            assert!((errs - q).abs() < 4.0 * sd, "sigma {sigma}: {errs} vs {q}");
        }
    }

    #[test]
    fn crossover_of_llr_is_decreasing() {
        assert_eq!(crossover_of_llr(0.0), 0.5);
        let mut prev = crossover_of_llr(0.0);
        for i in 1..=10_000 {
            let v = crossover_of_llr(i as f64 * 0.07);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-300);
        assert_eq!(crossover_of_llr(1e4), 0.0);
    }

    #[test]
    fn likelihood_examples() {
        let ll = log_likelihood(&[0, 1, 1], &[0, 1, 1], &[0.1; 3]).unwrap();
        assert!((ll - 3.0 * 0.9f64.ln()).abs() < 1e-14);
        let ll = log_likelihood(&[0, 1], &[0, 0], &[0.1, 0.2]).unwrap();
        assert!((ll - (0.9f64.ln() + 0.2f64.ln())).abs() < 1e-14);
        let a = log_likelihood(&[0, 1, 0], &[1, 1, 1], &[0.5; 3]).unwrap();
        let b = log_likelihood(&[1, 1, 1], &[1, 1, 1], &[0.5; 3]).unwrap();
        assert_eq!(a, b);
        assert!((a - 3.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!(log_likelihood(&[0], &[0, 1], &[0.1, 0.1]).is_err());
        // Clamped away from zero.
        assert!(log_likelihood(&[1], &[0], &[0.0]).unwrap().is_finite());
    }
}
