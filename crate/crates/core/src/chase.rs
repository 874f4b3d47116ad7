//! Stochastic Chase decoding and Monte Carlo estimation of the list miss
//! probability.
//!
//! A trial draws a channel realization, builds a flip rule, generates `L`
//! random test patterns, runs the bounded-distance decoder on every
//! `hd ^ pattern` and keeps the distinct successful codewords. The list miss
//! event is "the transmitted codeword is not among them".

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bch::{hamming_distance, BchCode};
use crate::channel::{
    awgn_observe, awgn_transmit, log_likelihood, sample_errors, sample_state, CompositionVector, ReliabilityProfile,
    StateVector,
};
use crate::error::{invalid, Error, Result};
use crate::rng::substream;
use crate::waterfill::{
    awgn_asymptotic_level, awgn_waterfill, binary_entropy, list_size, scalar_flip, solve_waterfill, WaterFillInput,
};

/// Default cap on the number of patterns per trial.
pub const DEFAULT_LIST_BUDGET: u64 = 1 << 20;

/// A bounded-distance decoder as seen by the Chase loop.
pub trait BoundedDistanceDecoder {
    /// Codeword within the decoding radius of `word`, if the decoder finds one.
    fn decode_word(&self, word: &[u8]) -> Option<Vec<u8>>;
}

impl BoundedDistanceDecoder for BchCode {
    fn decode_word(&self, word: &[u8]) -> Option<Vec<u8>> {
        self.decode(word).ok().and_then(|o| o.into_codeword())
    }
}

/// Decoder that succeeds exactly when the word is within `t` of a known
/// reference codeword.
#[derive(Debug, Clone, Copy)]
pub struct GenieDecoder<'a> {
    pub reference: &'a [u8],
    pub t: usize,
}

impl BoundedDistanceDecoder for GenieDecoder<'_> {
    fn decode_word(&self, word: &[u8]) -> Option<Vec<u8>> {
        (hamming_distance(word, self.reference) <= self.t).then(|| self.reference.to_vec())
    }
}

/// Scores candidate codewords; larger is more likely.
pub trait LikelihoodScore {
    fn score(&self, candidate: &[u8]) -> f64;
}

/// Independent-BSC log-likelihood around the hard decisions.
#[derive(Debug, Clone, Copy)]
pub struct BscLikelihood<'a> {
    pub hd: &'a [u8],
    pub per_index_p: &'a [f64],
}

impl LikelihoodScore for BscLikelihood<'_> {
    fn score(&self, candidate: &[u8]) -> f64 {
        log_likelihood(candidate, self.hd, self.per_index_p).unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternBatch {
    pub patterns: Vec<Vec<u8>>,
    /// Per-index flip probabilities used to draw the patterns.
    pub rule: Vec<f64>,
}

impl PatternBatch {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Per-index flip probabilities `q_{S_i}` for a class rule.
pub fn per_index_rule(state: &StateVector, q_per_class: &[f64]) -> Result<Vec<f64>> {
    state
        .as_slice()
        .iter()
        .map(|&s| {
            q_per_class
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("no flip probability for class {s}")))
        })
        .collect()
}

fn draw_pattern<R: Rng + ?Sized>(rule: &[f64], rng: &mut R) -> Vec<u8> {
    rule.iter()
        .map(|&q| if q <= 0.0 { 0 } else { u8::from(q >= 1.0 || rng.gen::<f64>() < q) })
        .collect()
}

fn check_rule(rule: &[f64]) -> Result<()> {
    if let Some(bad) = rule.iter().find(|&&q| !(0.0..=1.0).contains(&q)) {
        return invalid(format!("flip probability {bad} outside [0, 1]"));
    }
    Ok(())
}

/// `L` independent patterns with `Pr(pattern_i = 1) = q_{S_i}`.
pub fn gen_patterns<R: Rng + ?Sized>(
    state: &StateVector,
    q_per_class: &[f64],
    list_len: usize,
    rng: &mut R,
) -> Result<PatternBatch> {
    gen_patterns_per_index(&per_index_rule(state, q_per_class)?, list_len, rng)
}

/// `L` independent patterns with per-index flip probabilities.
pub fn gen_patterns_per_index<R: Rng + ?Sized>(rule: &[f64], list_len: usize, rng: &mut R) -> Result<PatternBatch> {
    check_rule(rule)?;
    if list_len == 0 {
        return invalid("list length must be at least 1");
    }
    Ok(PatternBatch { patterns: (0..list_len).map(|_| draw_pattern(rule, rng)).collect(), rule: rule.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub codeword: Vec<u8>,
    pub score: f64,
    /// Index of the first pattern that produced this codeword.
    pub pattern_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaseResult {
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the most likely codeword.
    pub chosen: Option<usize>,
    /// Set in evaluation mode: the transmitted codeword is not in the list.
    pub list_miss: Option<bool>,
    /// Set in evaluation mode: the chosen codeword is not the transmitted one.
    pub decode_error: Option<bool>,
}

impl ChaseResult {
    pub fn chosen_codeword(&self) -> Option<&[u8]> {
        self.chosen.map(|i| &self.candidates[i].codeword[..])
    }
}

/// Chase decoding over a stream of test patterns.
///
/// Candidates are deduplicated by value. The chosen codeword has the highest
/// score; ties go to the candidate produced by the earliest pattern.
pub fn chase_decode_iter<I, D, S>(
    hd: &[u8],
    patterns: I,
    decoder: &D,
    likelihood: &S,
    reference: Option<&[u8]>,
) -> Result<ChaseResult>
where
    I: IntoIterator,
    I::Item: AsRef<[u8]>,
    D: BoundedDistanceDecoder + ?Sized,
    S: LikelihoodScore + ?Sized,
{
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut candidates = Vec::new();
    let mut word = vec![0u8; hd.len()];
    for (index, pattern) in patterns.into_iter().enumerate() {
        let pattern = pattern.as_ref();
        if pattern.len() != hd.len() {
            return invalid(format!("pattern {index} has {} bits, expected {}", pattern.len(), hd.len()));
        }
        for ((w, &h), &e) in word.iter_mut().zip(hd).zip(pattern) {
            *w = h ^ e;
        }
        if let Some(codeword) = decoder.decode_word(&word) {
            if !seen.contains(&codeword) {
                seen.insert(codeword.clone());
                let score = likelihood.score(&codeword);
                candidates.push(Candidate { codeword, score, pattern_index: index });
            }
        }
    }
    let mut chosen: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if chosen.map_or(true, |b| c.score > candidates[b].score) {
            chosen = Some(i);
        }
    }
    let (list_miss, decode_error) = match reference {
        Some(x) => {
            let miss = !seen.contains(x);
            let err = chosen.map_or(true, |i| candidates[i].codeword != x);
            (Some(miss), Some(err))
        }
        None => (None, None),
    };
    Ok(ChaseResult { candidates, chosen, list_miss, decode_error })
}

/// Chase decoding of a materialized pattern batch.
pub fn chase_decode<D, S>(
    hd: &[u8],
    batch: &PatternBatch,
    decoder: &D,
    likelihood: &S,
    reference: Option<&[u8]>,
) -> Result<ChaseResult>
where
    D: BoundedDistanceDecoder + ?Sized,
    S: LikelihoodScore + ?Sized,
{
    chase_decode_iter(hd, &batch.patterns, decoder, likelihood, reference)
}

/// Conventional Chase list exponent `N H(p - t/N)` in bits.
pub fn conventional_chase_size(n: u64, p: f64, t: u64) -> Result<f64> {
    let d = t as f64 / n as f64;
    if p <= d {
        return Ok(0.0);
    }
    if p - d > 0.5 {
        return invalid(format!("p - t/N = {} exceeds 1/2", p - d));
    }
    Ok(n as f64 * binary_entropy(p - d))
}

/// Rate-distortion list exponent `N max(0, H(p) - H(t/N))` in bits.
pub fn rdf_chase_size(n: u64, p: f64, t: u64) -> f64 {
    let d = (t as f64 / n as f64).min(0.5);
    n as f64 * (binary_entropy(p) - binary_entropy(d)).max(0.0)
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// How reliability classes are assigned in a discrete-channel trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassSource {
    /// i.i.d. states from class priors.
    Prior(Vec<f64>),
    /// Fixed composition laid out class by class.
    Composition(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AwgnRuleMode {
    /// Water level solved on each realized LLR vector.
    PerBlock,
    /// Fixed water level from the large-block integral.
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSpec {
    Discrete { p: Vec<f64>, classes: ClassSource },
    Awgn { sigma: f64, rule: AwgnRuleMode },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipSpec {
    /// Water-filling rule of each trial's realization.
    Rdf,
    /// Fixed per-class flip probabilities (discrete channels only).
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListSpec {
    /// `max(1, ceil(2^{N R}))` from each trial's water-filling rate.
    Rdf,
    Fixed(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderSpec {
    Genie,
    /// Narrow-sense BCH code over GF(2^m) with the scenario radius.
    Bch { m: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub t: usize,
    pub channel: ChannelSpec,
    pub flip: FlipSpec,
    pub list: ListSpec,
    pub decoder: DecoderSpec,
    /// Prepend the all-zero pattern (a plain BDD attempt) to every batch.
    #[serde(default)]
    pub include_zero_pattern: bool,
    #[serde(default = "default_budget")]
    pub list_budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_LIST_BUDGET
}

/// Normal-approximation 95% interval `r +- 1.96 sqrt(r (1 - r) / n)`,
/// clipped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub count: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn new(count: u64, trials: u64) -> Self {
        let rate = count as f64 / trials as f64;
        let half = 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt();
        Self { count, rate, ci_low: (rate - half).max(0.0), ci_high: (rate + half).min(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub seed: u64,
    pub miss: RateEstimate,
    pub decode_error: RateEstimate,
    /// Average `log2 L` over trials.
    pub mean_log2_list_size: f64,
    pub scenario: Scenario,
}

impl MonteCarloReport {
    pub fn miss_count(&self) -> u64 {
        self.miss.count
    }

    pub fn miss_rate(&self) -> f64 {
        self.miss.rate
    }
}

enum Codec {
    Genie,
    Bch(BchCode),
}

struct Prepared {
    codec: Codec,
    profile: Option<ReliabilityProfile>,
    fixed_state: Option<StateVector>,
    integral_nu: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("block length must be positive");
        }
        if self.t > self.n {
            return invalid(format!("radius t = {} exceeds block length {}", self.t, self.n));
        }
        if let DecoderSpec::Bch { m } = self.decoder {
            let n = (1usize << m.min(31)) - 1;
            if n != self.n {
                return invalid(format!("BCH over GF(2^{m}) has length {n}, scenario has {}", self.n));
            }
        }
        if let ListSpec::Fixed(l) = self.list {
            if l == 0 {
                return invalid("list length must be at least 1");
            }
            if l > self.list_budget {
                return Err(Error::Budget { what: "list length", requested: l as f64, limit: self.list_budget as f64 });
            }
        }
        match (&self.channel, &self.flip) {
            (ChannelSpec::Discrete { p, classes }, flip) => {
                crate::channel::validate_crossovers(p)?;
                match classes {
                    ClassSource::Prior(w) => {
                        ReliabilityProfile::new(p.clone(), w.clone())?;
                    }
                    ClassSource::Composition(c) => {
                        if c.len() != p.len() {
                            return invalid("composition and crossover vector differ in length");
                        }
                        if c.iter().sum::<u64>() != self.n as u64 {
                            return invalid(format!(
                                "composition sums to {} but block length is {}",
                                c.iter().sum::<u64>(),
                                self.n
                            ));
                        }
                    }
                }
                if let FlipSpec::Fixed(q) = flip {
                    if q.len() != p.len() {
                        return invalid("fixed flip vector and crossover vector differ in length");
                    }
                    check_rule(q)?;
                }
            }
            (ChannelSpec::Awgn { sigma, .. }, flip) => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return invalid(format!("noise standard deviation must be positive, got {sigma}"));
                }
                if matches!(flip, FlipSpec::Fixed(_)) {
                    return invalid("fixed per-class flip vectors are not defined for AWGN scenarios");
                }
            }
        }
        Ok(())
    }

    fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let codec = match self.decoder {
            DecoderSpec::Genie => Codec::Genie,
            DecoderSpec::Bch { m } => Codec::Bch(BchCode::new(m, self.t)?),
        };
        let (profile, fixed_state) = match &self.channel {
            ChannelSpec::Discrete { p, classes: ClassSource::Prior(w) } => {
                (Some(ReliabilityProfile::new(p.clone(), w.clone())?), None)
            }
            ChannelSpec::Discrete { p, classes: ClassSource::Composition(c) } => {
                let comp = CompositionVector::new(c.clone());
                (
                    Some(ReliabilityProfile::from_composition(p.clone(), &comp)?),
                    Some(StateVector::from_composition(&comp)),
                )
            }
            ChannelSpec::Awgn { .. } => (None, None),
        };
        let integral_nu = match &self.channel {
            ChannelSpec::Awgn { sigma, rule: AwgnRuleMode::Integral } => {
                let d = self.t as f64 / self.n as f64;
                if d <= 0.0 {
                    Some(0.0)
                } else if d >= 0.5 {
                    Some(0.5)
                } else {
                    let r = awgn_asymptotic_level(*sigma, d)?;
                    Some(if r.no_flip { 0.5 } else { r.nu })
                }
            }
            _ => None,
        };
        Ok(Prepared { codec, profile, fixed_state, integral_nu })
    }

    fn list_len(&self, log2: f64) -> Result<u64> {
        match self.list {
            ListSpec::Fixed(l) => Ok(l),
            ListSpec::Rdf => {
                let size = list_size(1, log2)?;
                match size.count {
                    Some(c) if c <= self.list_budget => Ok(c),
                    _ => Err(Error::Budget {
                        what: "list length 2^(N R)",
                        requested: log2.exp2(),
                        limit: self.list_budget as f64,
                    }),
                }
            }
        }
    }
}

/// Trial outcome flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub list_miss: bool,
    pub decode_error: bool,
    pub list_len: u64,
}

/// Trial `index` of a scenario. Each trial owns stream `(seed, 2 index)` for
/// noise and patterns and `(seed, 2 index + 1)` for the message, so genie
/// and algebraic decoders see identical noise.
fn run_trial(scenario: &Scenario, prep: &Prepared, seed: u64, index: u64) -> Result<(TrialRecord, f64)> {
    let n = scenario.n;
    let mut rng = substream(seed, 2 * index);
    let transmitted = match &prep.codec {
        Codec::Genie => vec![0u8; n],
        Codec::Bch(code) => {
            let mut msg_rng = substream(seed, 2 * index + 1);
            let msg: Vec<u8> = (0..code.k()).map(|_| msg_rng.gen_range(0..2)).collect();
            code.encode(&msg)?
        }
    };

    let (hd, per_index_p, rule, log2_l) = match &scenario.channel {
        ChannelSpec::Discrete { p, .. } => {
            let profile = prep.profile.as_ref().expect("discrete profile");
            let state = match &prep.fixed_state {
                Some(s) => s.clone(),
                None => sample_state(profile, n, &mut rng)?,
            };
            let errors = sample_errors(&state, profile, &mut rng)?;
            let hd: Vec<u8> = transmitted.iter().zip(&errors).map(|(x, e)| x ^ e).collect();
            let per_index_p = per_index_rule(&state, p)?;
            let comp = crate::channel::composition(state.as_slice(), p.len())?;
            let (q_class, log2_l) = match &scenario.flip {
                FlipSpec::Fixed(q) => (q.clone(), 0.0),
                FlipSpec::Rdf => {
                    let input = WaterFillInput::new(comp.counts().to_vec(), p.clone(), scenario.t as u64)?;
                    let sol = solve_waterfill(&input)?;
                    (sol.q, sol.list_size.log2)
                }
            };
            let log2_l = if matches!(scenario.flip, FlipSpec::Fixed(_)) && matches!(scenario.list, ListSpec::Rdf) {
                let input = WaterFillInput::new(comp.counts().to_vec(), p.clone(), scenario.t as u64)?;
                solve_waterfill(&input)?.list_size.log2
            } else {
                log2_l
            };
            (hd, per_index_p, per_index_rule(&state, &q_class)?, log2_l)
        }
        ChannelSpec::Awgn { sigma, .. } => {
            let y = awgn_transmit(&transmitted, *sigma, &mut rng)?;
            let obs = awgn_observe(&y, *sigma)?;
            let (rule, rate) = match prep.integral_nu {
                None => {
                    let alloc = awgn_waterfill(&obs.p_of_llr, scenario.t as u64)?;
                    (alloc.q, alloc.rate)
                }
                Some(nu) => {
                    let rule: Vec<f64> = obs.p_of_llr.iter().map(|&p| scalar_flip(p, nu)).collect();
                    let rate = obs
                        .p_of_llr
                        .iter()
                        .map(|&p| (binary_entropy(p) - binary_entropy(nu.min(p))).max(0.0))
                        .sum::<f64>()
                        / n as f64;
                    (rule, rate)
                }
            };
            (obs.hd, obs.p_of_llr, rule, n as f64 * rate)
        }
    };

    let list_len = scenario.list_len(log2_l)?;
    let zero = vec![0u8; n];
    let patterns = scenario
        .include_zero_pattern
        .then(|| zero.clone())
        .into_iter()
        .chain((0..list_len).map(|_| draw_pattern(&rule, &mut rng)));
    let scorer = BscLikelihood { hd: &hd, per_index_p: &per_index_p };
    let result = match &prep.codec {
        Codec::Genie => {
            let genie = GenieDecoder { reference: &transmitted, t: scenario.t };
            chase_decode_iter(&hd, patterns, &genie, &scorer, Some(&transmitted))?
        }
        Codec::Bch(code) => chase_decode_iter(&hd, patterns, code, &scorer, Some(&transmitted))?,
    };
    Ok((
        TrialRecord {
            list_miss: result.list_miss.unwrap_or(true),
            decode_error: result.decode_error.unwrap_or(true),
            list_len,
        },
        log2_l,
    ))
}

/// Run `trials` independent trials. The report depends only on
/// `(scenario, trials, seed)`.
pub fn run_monte_carlo(scenario: &Scenario, trials: u64, seed: u64) -> Result<MonteCarloReport> {
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let prep = scenario.prepare()?;
    // Chunks keep the floating-point reduction order fixed.
    const CHUNK: u64 = 4096;
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<(u64, u64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = (0u64, 0u64, 0.0f64);
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let (rec, log2_l) = run_trial(scenario, &prep, seed, i)?;
                acc.0 += u64::from(rec.list_miss);
                acc.1 += u64::from(rec.decode_error);
                acc.2 += log2_l;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let misses = partials.iter().map(|p| p.0).sum();
    let errors = partials.iter().map(|p| p.1).sum();
    let log2_sum: f64 = crate::exact::neumaier_sum(partials.iter().map(|p| p.2));
    Ok(MonteCarloReport {
        trials,
        seed,
        miss: RateEstimate::new(misses, trials),
        decode_error: RateEstimate::new(errors, trials),
        mean_log2_list_size: log2_sum / trials as f64,
        scenario: scenario.clone(),
    })
}

/// Outcome of trial `index`, as [`run_monte_carlo`] would record it.
pub fn trial_record(scenario: &Scenario, seed: u64, index: u64) -> Result<TrialRecord> {
    let prep = scenario.prepare()?;
    Ok(run_trial(scenario, &prep, seed, index)?.0)
}
