use serde_json::{json, Value};

use super::config::{require, AwgnRule, DecoderKind, ExperimentConfig, Kind, Preset};
use super::output::{float, Artifact, Table};
use crate::channel::{awgn_observe, awgn_transmit};
use crate::chase::{
    run_monte_carlo, AwgnRuleMode, ChannelSpec, ClassSource, DecoderSpec, FlipSpec, ListSpec, Scenario,
    DEFAULT_LIST_BUDGET,
};
use crate::error::{invalid, Result};
use crate::exact::{list_failure_given_composition, optimize_flip, GridScenario, ListRule};
use crate::rng::substream;
use crate::waterfill::{awgn_asymptotic_level, awgn_waterfill, solve_waterfill, WaterFillInput};

/// Run `kind` on a config whose preset has already been applied.
pub fn execute(kind: Kind, config: &ExperimentConfig) -> Result<Artifact> {
    config.check_classes()?;
    let (ran, mut artifact) = match kind {
        Kind::Waterfill => (kind, waterfill(config)?),
        Kind::AwgnRule => (kind, awgn_rule(config)?),
        Kind::Exact => (kind, exact(config, false)?),
        Kind::Optimize => (kind, exact(config, true)?),
        Kind::Simulate => (kind, simulate(config)?),
        Kind::Figure => match config.preset {
            Some(Preset::Fig2) => (Kind::Waterfill, waterfill(config)?),
            Some(Preset::Fig3) => (Kind::AwgnRule, awgn_rule(config)?),
            Some(Preset::Fig4 | Preset::Fig5) => (Kind::Optimize, exact(config, true)?),
            None => return invalid("figure requires a preset (fig2, fig3, fig4 or fig5)"),
        },
    };
    artifact.json = json!({
        "command": kind.to_string(),
        "ran": ran.to_string(),
        "config": config,
        "result": artifact.json,
    });
    Ok(artifact)
}

fn waterfill(c: &ExperimentConfig) -> Result<Artifact> {
    let kind = Kind::Waterfill;
    let p = require(&c.p, "p", kind)?.clone();
    let t = *require(&c.t, "t", kind)?;
    let composition = match (&c.composition, c.n) {
        (Some(comp), _) => comp.clone(),
        (None, Some(n)) if p.len() == 1 => vec![n],
        _ => return invalid("waterfill requires `composition` (or `N` with a single class)"),
    };
    let total: u64 = composition.iter().sum();
    // The two-class example preset keeps its stated N with class weights
    // taken from its stated composition.
    let block_length = match c.n {
        Some(n) if n != total && c.preset != Some(Preset::Fig2) => {
            return invalid(format!("composition sums to {total} but N = {n}"))
        }
        Some(n) => n,
        None => total,
    };
    let input = WaterFillInput::with_block_length(composition.clone(), p.clone(), t, block_length)?;
    let sol = solve_waterfill(&input)?;

    let mut table = Table::new(&["class", "N_j", "p_j", "D_star_j", "q_j"]);
    for j in 0..p.len() {
        table.push(vec![
            (j + 1).to_string(),
            composition[j].to_string(),
            float(p[j]),
            float(sol.d_star[j]),
            float(sol.q[j]),
        ]);
    }
    table.push_footer("nu", sol.nu);
    table.push_footer("rate_bits_per_symbol", sol.rate);
    table.push_footer("log2_L", sol.list_size.log2);

    let json = json!({
        "N": block_length,
        "t": t,
        "D": input.distortion(),
        "nu": sol.nu,
        "D_star": sol.d_star,
        "q": sol.q,
        "rate_bits_per_symbol": sol.rate,
        "log2_L": sol.list_size.log2,
        "L": sol.list_size.count,
    });
    Ok(Artifact { table, json })
}

fn awgn_rule(c: &ExperimentConfig) -> Result<Artifact> {
    let kind = Kind::AwgnRule;
    let sigmas = require(&c.sigma, "sigma", kind)?.values();
    if sigmas.is_empty() {
        return invalid("sigma list is empty");
    }
    let d = match (c.d, c.n, c.t) {
        (Some(d), Some(n), Some(t)) if (d - t as f64 / n as f64).abs() > 1e-12 => {
            return invalid(format!("D = {d} disagrees with t / N = {}", t as f64 / n as f64))
        }
        (Some(d), _, _) => d,
        (None, Some(n), Some(t)) if n > 0 => t as f64 / n as f64,
        _ => return invalid("awgn-rule requires `D` or both `N` and `t`"),
    };
    let block = match (c.n, c.t) {
        (Some(n), Some(t)) if n > 0 => Some((n as usize, t)),
        _ => None,
    };
    let seed = c.seed();

    let mut table = Table::new(&["sigma", "kind", "index", "llr", "p_llr", "d_star", "q", "nu"]);
    let mut results = Vec::new();
    for (s_idx, &sigma) in sigmas.iter().enumerate() {
        let rule = awgn_asymptotic_level(sigma, d)?;
        for (i, &(l, q)) in rule.table.iter().enumerate() {
            let p = crate::channel::crossover_of_llr(l);
            table.push(vec![
                float(sigma),
                "curve".into(),
                i.to_string(),
                float(l),
                float(p),
                float(p.min(rule.nu)),
                float(q),
                float(rule.nu),
            ]);
        }
        let block_json = match block {
            None => Value::Null,
            Some((n, t)) => {
                let mut rng = substream(seed, s_idx as u64);
                let y = awgn_transmit(&vec![0u8; n], sigma, &mut rng)?;
                let obs = awgn_observe(&y, sigma)?;
                let alloc = awgn_waterfill(&obs.p_of_llr, t)?;
                // Least reliable first, as in the allocation plots.
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| obs.llr_mag[a].total_cmp(&obs.llr_mag[b]).then(a.cmp(&b)));
                for (rank, &i) in order.iter().enumerate() {
                    table.push(vec![
                        float(sigma),
                        "block".into(),
                        rank.to_string(),
                        float(obs.llr_mag[i]),
                        float(obs.p_of_llr[i]),
                        float(alloc.d_star[i]),
                        float(alloc.q[i]),
                        float(alloc.nu),
                    ]);
                }
                let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<f64>>();
                json!({
                    "N": n,
                    "t": t,
                    "nu": alloc.nu,
                    "rate_bits_per_symbol": alloc.rate,
                    "sum_d_star": crate::exact::neumaier_sum(alloc.d_star.iter().copied()),
                    "llr": pick(&obs.llr_mag),
                    "p_llr": pick(&obs.p_of_llr),
                    "d_star": pick(&alloc.d_star),
                    "q": pick(&alloc.q),
                })
            }
        };
        results.push(json!({ "sigma": sigma, "D": d, "rule": rule, "block": block_json }));
    }
    Ok(Artifact { table, json: Value::Array(results) })
}

/// One `(N, composition, t)` point for the exact and optimize commands.
struct Point {
    n: u64,
    composition: Vec<u64>,
    t: u64,
}

fn points(c: &ExperimentConfig, kind: Kind) -> Result<(Vec<Point>, Vec<f64>)> {
    let p = require(&c.p, "p", kind)?.clone();
    if let Some(grid) = &c.n_grid {
        let scenario = GridScenario {
            t_over_n: *require(&c.t_over_n, "t_over_n", kind)?,
            p: p.clone(),
            class_fractions: match &c.class_fractions {
                Some(f) => f.clone(),
                None if p.len() == 1 => vec![1.0],
                None => return invalid(format!("{kind} over an N grid requires `class_fractions`")),
            },
            list_rule: ListRule::Real,
        };
        if grid.is_empty() {
            return invalid("n_grid is empty");
        }
        let pts = grid
            .iter()
            .map(|&n| Ok(Point { n, composition: scenario.composition(n)?, t: scenario.radius(n) }))
            .collect::<Result<_>>()?;
        return Ok((pts, p));
    }
    let t = *require(&c.t, "t", kind)?;
    let composition = match (&c.composition, c.n) {
        (Some(comp), _) => comp.clone(),
        (None, Some(n)) if p.len() == 1 => vec![n],
        _ => return invalid(format!("{kind} requires `composition`, `N` with one class, or `n_grid`")),
    };
    let total: u64 = composition.iter().sum();
    if let Some(n) = c.n {
        if n != total {
            return invalid(format!("composition sums to {total} but N = {n}"));
        }
    }
    Ok((vec![Point { n: total, composition, t }], p))
}

fn exact(c: &ExperimentConfig, optimize: bool) -> Result<Artifact> {
    let kind = if optimize { Kind::Optimize } else { Kind::Exact };
    let (pts, p) = points(c, kind)?;
    if optimize && c.q.is_some() {
        return invalid("optimize does not take a fixed `q`");
    }
    if let Some(l) = c.l {
        if !(l >= 1.0) || !l.is_finite() {
            return invalid(format!("list length L = {l} must be a finite number >= 1"));
        }
    }
    let rule = c.l_rule.unwrap_or(ListRule::Real);

    let mut table = Table::new(&["N", "class", "q_rdf", "q_opt", "pe_rdf", "pe_opt", "L_log2"]);
    let mut rows = Vec::new();
    for pt in &pts {
        let sol = solve_waterfill(&WaterFillInput::new(pt.composition.clone(), p.clone(), pt.t)?)?;
        let list_len = c.l.unwrap_or_else(|| rule.apply(sol.list_size.log2));
        let (q_rdf, q_opt, pe_rdf, pe_opt) = if optimize {
            let opt = optimize_flip(&pt.composition, &p, pt.t, list_len)?;
            (opt.rdf_q, opt.q_star, opt.rdf_value, opt.value)
        } else {
            let pe_rdf = list_failure_given_composition(&pt.composition, &p, &sol.q, pt.t, list_len)?;
            match &c.q {
                Some(q) => {
                    let pe = list_failure_given_composition(&pt.composition, &p, q, pt.t, list_len)?;
                    (sol.q.clone(), q.clone(), pe_rdf, pe)
                }
                None => (sol.q.clone(), sol.q.clone(), pe_rdf, pe_rdf),
            }
        };
        let l_log2 = list_len.log2();
        for j in 0..p.len() {
            table.push(vec![
                pt.n.to_string(),
                (j + 1).to_string(),
                float(q_rdf[j]),
                float(q_opt[j]),
                float(pe_rdf),
                float(pe_opt),
                float(l_log2),
            ]);
        }
        rows.push(json!({
            "N": pt.n,
            "t": pt.t,
            "composition": pt.composition,
            "nu": sol.nu,
            "q_rdf": q_rdf,
            "q_opt": q_opt,
            "pe_rdf": pe_rdf,
            "pe_opt": pe_opt,
            "L": list_len,
            "L_log2": l_log2,
        }));
    }
    Ok(Artifact { table, json: Value::Array(rows) })
}

/// Monte Carlo scenario described by a config.
pub fn scenario_of(c: &ExperimentConfig) -> Result<Scenario> {
    let kind = Kind::Simulate;
    let n = *require(&c.n, "N", kind)? as usize;
    let t = *require(&c.t, "t", kind)? as usize;
    let channel = match &c.sigma {
        Some(s) => {
            let v = s.values();
            if v.len() != 1 {
                return invalid("simulate takes a single `sigma`");
            }
            if c.p.is_some() || c.composition.is_some() || c.priors.is_some() {
                return invalid("AWGN scenarios take `sigma` only, not `p`, `composition` or `priors`");
            }
            let rule = match c.awgn_rule.unwrap_or(AwgnRule::PerBlock) {
                AwgnRule::PerBlock => AwgnRuleMode::PerBlock,
                AwgnRule::Integral => AwgnRuleMode::Integral,
            };
            ChannelSpec::Awgn { sigma: v[0], rule }
        }
        None => {
            let p = require(&c.p, "p", kind)?.clone();
            let classes = match (&c.composition, &c.priors) {
                (Some(_), Some(_)) => return invalid("give either `composition` or `priors`, not both"),
                (Some(comp), None) => ClassSource::Composition(comp.clone()),
                (None, Some(w)) => ClassSource::Prior(w.clone()),
                (None, None) if p.len() == 1 => ClassSource::Composition(vec![n as u64]),
                (None, None) => return invalid("multi-class simulate requires `composition` or `priors`"),
            };
            ChannelSpec::Discrete { p, classes }
        }
    };
    let list = match (c.l, c.l_rule) {
        (Some(_), Some(_)) => return invalid("give either `L` or `l_rule`, not both"),
        (Some(l), None) => {
            if !(l >= 1.0) || l.fract() != 0.0 || l > u64::MAX as f64 {
                return invalid(format!("simulated list length must be a positive integer, got {l}"));
            }
            ListSpec::Fixed(l as u64)
        }
        (None, Some(ListRule::Real)) => return invalid("simulation needs an integer list length; use l_rule \"ceil\""),
        (None, _) => ListSpec::Rdf,
    };
    let decoder = match c.decoder.unwrap_or(DecoderKind::Genie) {
        DecoderKind::Genie => {
            if c.bch_m.is_some() {
                return invalid("`bch_m` applies to the bch decoder only");
            }
            DecoderSpec::Genie
        }
        DecoderKind::Bch => {
            let m = match c.bch_m {
                Some(m) => m,
                None if (n + 1).is_power_of_two() => (n + 1).trailing_zeros(),
                None => return invalid(format!("N = {n} is not 2^m - 1; set `bch_m`")),
            };
            DecoderSpec::Bch { m }
        }
    };
    let scenario = Scenario {
        n,
        t,
        channel,
        flip: c.q.clone().map_or(FlipSpec::Rdf, FlipSpec::Fixed),
        list,
        decoder,
        include_zero_pattern: c.include_zero_pattern.unwrap_or(false),
        list_budget: c.list_budget.unwrap_or(DEFAULT_LIST_BUDGET),
    };
    scenario.validate()?;
    Ok(scenario)
}

fn simulate(c: &ExperimentConfig) -> Result<Artifact> {
    let trials = *require(&c.trials, "trials", Kind::Simulate)?;
    if trials == 0 {
        return invalid("trials must be positive");
    }
    let scenario = scenario_of(c)?;
    let seed = c.seed();
    let report = run_monte_carlo(&scenario, trials, seed)?;
    let mut table = Table::new(&["trials", "miss_count", "miss_rate", "ci_low", "ci_high", "decode_error_rate", "seed"]);
    table.push(vec![
        trials.to_string(),
        report.miss.count.to_string(),
        float(report.miss.rate),
        float(report.miss.ci_low),
        float(report.miss.ci_high),
        float(report.decode_error.rate),
        seed.to_string(),
    ]);
    let json = serde_json::to_value(&report).or_else(|e| invalid(format!("report: {e}")))?;
    Ok(Artifact { table, json })
}
