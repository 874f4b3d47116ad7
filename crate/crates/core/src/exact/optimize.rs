//! Numerical minimization of the list failure over flip vectors, and the
//! rate-distortion vs. optimum comparison across block lengths.

use serde::{Deserialize, Serialize};

use super::{FailureModel, OuterSum};
use crate::error::{invalid, Result};
use crate::waterfill::{solve_waterfill, WaterFillInput};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
/// Relative tolerance on the line-search argument.
const GOLDEN_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub max_sweeps: usize,
    /// Stop when a full sweep improves the objective by less than this.
    pub tolerance: f64,
    /// Upper end of the per-coordinate search interval.
    pub upper: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { max_sweeps: 50, tolerance: 1e-12, upper: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub start_value: f64,
    pub end: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipOptimum {
    pub q_star: Vec<f64>,
    pub value: f64,
    pub rdf_q: Vec<f64>,
    pub rdf_value: f64,
    pub starts: Vec<StartOutcome>,
}

/// Minimize `Pr(E_L | N)` over `q` in `[0, 1/2]^M` with default options.
pub fn optimize_flip(composition: &[u64], p: &[f64], t: u64, list_len: f64) -> Result<FlipOptimum> {
    optimize_flip_with(composition, p, t, list_len, &OptimizeOptions::default())
}

/// Coordinate descent with bracketed golden-section line searches, started
/// from the water-filling flip vector, the uniform 1/4 vector and zero.
pub fn optimize_flip_with(
    composition: &[u64],
    p: &[f64],
    t: u64,
    list_len: f64,
    options: &OptimizeOptions,
) -> Result<FlipOptimum> {
    let m = p.len();
    let n: u64 = composition.iter().sum();
    let rdf_q = solve_waterfill(&WaterFillInput::new(composition.to_vec(), p.to_vec(), t.min(n))?)?.q;
    if t >= n {
        let zero = vec![0.0; m];
        return Ok(FlipOptimum {
            q_star: zero.clone(),
            value: 0.0,
            rdf_q,
            rdf_value: 0.0,
            starts: vec![StartOutcome { start: zero.clone(), start_value: 0.0, end: zero, value: 0.0, sweeps: 0 }],
        });
    }
    let model = FailureModel::new(composition, p, t, OuterSum::BeyondRadius)?;
    let objective = |q: &[f64]| model.evaluate(q, list_len);
    let rdf_value = objective(&rdf_q)?;

    let starts = [rdf_q.clone(), vec![0.25_f64.min(options.upper); m], vec![0.0; m]];
    let mut outcomes = Vec::with_capacity(starts.len());
    for start in starts {
        outcomes.push(descend(&objective, start, options)?);
    }
    let best = outcomes
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lexicographic(&a.end, &b.end)))
        .expect("at least one start");
    Ok(FlipOptimum { q_star: best.end.clone(), value: best.value, rdf_q, rdf_value, starts: outcomes.clone() })
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn descend<F>(objective: &F, start: Vec<f64>, options: &OptimizeOptions) -> Result<StartOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let start_value = objective(&start)?;
    let mut q = start.clone();
    let mut value = start_value;
    let mut sweeps = 0;
    while sweeps < options.max_sweeps {
        sweeps += 1;
        let before = value;
        let anchor = q.clone();
        for j in 0..q.len() {
            let mut trial = q.clone();
            let (x, v) = minimize_1d(
                |x| {
                    trial[j] = x;
                    objective(&trial)
                },
                q[j],
                value,
                options.upper,
                sweeps == 1,
            )?;
            if v < value {
                q[j] = x;
                value = v;
            }
        }
        if q.len() > 1 {
            // Extrapolate along the sweep displacement; plain coordinate
            // steps zigzag along correlated valleys.
            let d: Vec<f64> = q.iter().zip(&anchor).map(|(a, b)| a - b).collect();
            let reach = max_step(&anchor, &d, options.upper);
            if reach > 1.0 && reach.is_finite() {
                let point = |a: f64| -> Vec<f64> {
                    anchor.iter().zip(&d).map(|(x, dx)| (x + a * dx).clamp(0.0, options.upper)).collect()
                };
                let (a, v) = minimize_1d(|a| objective(&point(a)), 1.0, value, reach, false)?;
                if v < value {
                    q = point(a);
                    value = v;
                }
            }
        }
        if before - value < options.tolerance {
            break;
        }
    }
    Ok(StartOutcome { start, start_value, end: q, value, sweeps })
}

/// Largest `a` with `x + a d` inside `[0, upper]^M`.
fn max_step(x: &[f64], d: &[f64], upper: f64) -> f64 {
    x.iter()
        .zip(d)
        .map(|(&xi, &di)| {
            if di > 0.0 {
                (upper - xi) / di
            } else if di < 0.0 {
                -xi / di
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimize `g` on `[0, hi]` from the current point `x0` with value `v0`.
///
/// With `scan` set, a geometric grid toward zero brackets the minimum;
/// otherwise steps of growing size walk downhill from `x0`. Brent's
/// golden-section search with parabolic steps then refines the bracket.
fn minimize_1d<G>(mut g: G, x0: f64, v0: f64, hi: f64, scan: bool) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
{
    let (a, x, b, fx) = if scan { bracket_grid(&mut g, x0, v0, hi)? } else { bracket_local(&mut g, x0, v0, hi)? };
    let (x, fx) = brent(&mut g, a, b, x, fx)?;
    Ok(if fx < v0 || (fx == v0 && x < x0) { (x, fx) } else { (x0, v0) })
}

fn bracket_grid<G>(g: &mut G, x0: f64, v0: f64, hi: f64) -> Result<(f64, f64, f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut grid: Vec<f64> = (0..=60).map(|i| hi * (-(i as f64) / 2.0).exp2()).collect();
    grid.push(0.0);
    grid.push(x0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(if x == x0 { v0 } else { g(x)? });
    }
    // Lowest value; ties resolve to the smaller argument.
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    Ok((grid[best.saturating_sub(1)], grid[best], grid[(best + 1).min(grid.len() - 1)], values[best]))
}

fn bracket_local<G>(g: &mut G, x0: f64, v0: f64, hi: f64) -> Result<(f64, f64, f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
{
    let h0 = (0.1 * x0).max(1e-9 * hi);
    let sorted = |a: f64, x: f64, b: f64, v: f64| (a.min(b), x, a.max(b), v);
    let mut ends = [x0, x0];
    for (slot, dir) in [(1usize, 1.0f64), (0, -1.0)] {
        let (mut back, mut cur, mut v_cur, mut h) = (x0, x0, v0, h0);
        loop {
            let next = (cur + dir * h).clamp(0.0, hi);
            if next == cur {
                if cur == x0 {
                    break;
                }
                return Ok(sorted(back, cur, cur, v_cur));
            }
            let v = g(next)?;
            if v >= v_cur {
                if cur == x0 {
                    ends[slot] = next;
                    break;
                }
                return Ok(sorted(back, cur, next, v_cur));
            }
            back = cur;
            cur = next;
            v_cur = v;
            h *= 2.0;
        }
    }
    Ok((ends[0], x0, ends[1], v0))
}

/// Brent minimization on `[a, b]` from an interior best point `x`.
fn brent<G>(g: &mut G, mut a: f64, mut b: f64, x: f64, fx: f64) -> Result<(f64, f64)>
where
    G: FnMut(f64) -> Result<f64>,
{
    const CGOLD: f64 = 1.0 - INV_PHI;
    let (mut x, mut w, mut v) = (x, x, x);
    let (mut fx, mut fw, mut fv) = (fx, fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = GOLDEN_RTOL * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u)?;
        if fu < fx || (fu == fx && u < x) {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

/// How the list length is derived from the water-filling exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListRule {
    /// `L = 2^{N R}` as a real number.
    Real,
    /// `L = max(1, ceil(2^{N R}))`.
    Ceil,
}

impl ListRule {
    pub fn apply(self, log2: f64) -> f64 {
        match self {
            ListRule::Real => log2.exp2().max(1.0),
            ListRule::Ceil => log2.exp2().ceil().max(1.0),
        }
    }
}

/// Scenario family indexed by block length: fixed `t / N`, crossovers and
/// class fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScenario {
    pub t_over_n: f64,
    pub p: Vec<f64>,
    pub class_fractions: Vec<f64>,
    pub list_rule: ListRule,
}

impl GridScenario {
    /// Composition with `N_j = round(f_j N)` and the remainder in the last class.
    pub fn composition(&self, n: u64) -> Result<Vec<u64>> {
        if self.class_fractions.len() != self.p.len() || self.p.is_empty() {
            return invalid("class fractions and crossover vector must have equal, nonzero length");
        }
        let total: f64 = self.class_fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.class_fractions.iter().any(|&f| !(f >= 0.0)) {
            return invalid("class fractions must be nonnegative and sum to 1");
        }
        let mut comp: Vec<u64> = self.class_fractions[..self.p.len() - 1]
            .iter()
            .map(|&f| (f * n as f64).round() as u64)
            .collect();
        let used: u64 = comp.iter().sum();
        if used > n {
            return invalid("class fractions exceed block length");
        }
        comp.push(n - used);
        Ok(comp)
    }

    pub fn radius(&self, n: u64) -> u64 {
        (self.t_over_n * n as f64).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub t: u64,
    pub composition: Vec<u64>,
    pub q_rdf: Vec<f64>,
    pub q_opt: Vec<f64>,
    pub pe_rdf: f64,
    pub pe_opt: f64,
    pub l_log2: f64,
    pub list_len: f64,
}

impl ReportRow {
    /// Per-class `|q_opt - q_rdf|`.
    pub fn gap(&self) -> Vec<f64> {
        self.q_opt.iter().zip(&self.q_rdf).map(|(a, b)| (a - b).abs()).collect()
    }
}

/// Water-filling flip vector vs. exact optimum for each block length.
pub fn rdf_vs_optimal_report(grid: &[u64], scenario: &GridScenario) -> Result<Vec<ReportRow>> {
    grid.iter()
        .map(|&n| {
            let composition = scenario.composition(n)?;
            let t = scenario.radius(n);
            let sol = solve_waterfill(&WaterFillInput::new(composition.clone(), scenario.p.clone(), t)?)?;
            let list_len = scenario.list_rule.apply(sol.list_size.log2);
            let opt = optimize_flip(&composition, &scenario.p, t, list_len)?;
            Ok(ReportRow {
                n,
                t,
                composition,
                q_rdf: opt.rdf_q,
                q_opt: opt.q_star,
                pe_rdf: opt.rdf_value,
                pe_opt: opt.value,
                l_log2: sol.list_size.log2,
                list_len,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::list_failure_given_composition;

    #[test]
    fn radius_covering_block_needs_no_flips() {
        let r = optimize_flip(&[5, 3], &[0.2, 0.4], 8, 4.0).unwrap();
        assert_eq!(r.q_star, vec![0.0, 0.0]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn optimum_dominates_all_starts() {
        let comp = [40u64, 24];
        let p = [0.08, 0.15];
        let r = optimize_flip(&comp, &p, 3, 16.0).unwrap();
        assert!(r.value <= r.rdf_value);
        for s in &r.starts {
            assert!(r.value <= s.start_value);
            assert!(r.value <= s.value);
        }
        let direct = list_failure_given_composition(&comp, &p, &r.q_star, 3, 16.0).unwrap();
        assert_eq!(direct, r.value);
        assert!(r.q_star.iter().all(|&q| (0.0..=0.5).contains(&q)));
    }

    #[test]
    fn single_class_optimum_is_a_local_minimum() {
        let (comp, p, t, l) = ([63u64], [0.05], 2u64, 8.0);
        let r = optimize_flip(&comp, &p, t, l).unwrap();
        let q = r.q_star[0];
        for h in [1e-4, 1e-3] {
            for x in [q - h, q + h] {
                if (0.0..=0.5).contains(&x) {
                    let v = list_failure_given_composition(&comp, &p, &[x], t, l).unwrap();
                    assert!(v >= r.value - 1e-15, "{x}: {v} < {}", r.value);
                }
            }
        }
    }

    #[test]
    fn grid_scenario_composition() {
        let s = GridScenario {
            t_over_n: 0.079,
            p: vec![0.083, 0.081],
            class_fractions: vec![0.4, 0.6],
            list_rule: ListRule::Real,
        };
        assert_eq!(s.composition(100).unwrap(), vec![40, 60]);
        assert_eq!(s.composition(201).unwrap(), vec![80, 121]);
        assert_eq!(s.radius(100), 8);
        assert_eq!(s.radius(800), 63);
    }

    #[test]
    fn list_rule_rounding() {
        assert_eq!(ListRule::Real.apply(0.0), 1.0);
        assert_eq!(ListRule::Ceil.apply(0.511), 2.0);
        assert!((ListRule::Real.apply(0.511) - 1.425_037_614_148_784_2).abs() < 1e-15);
    }
}
