//! Evaluation metrics.
//!
//! Votes are scored against ground truth. Predictions are scored against the
//! realized statistic of the OTHER voters' votes on the same question: a top
//! prediction against their modal top choice, a ranking prediction against
//! their modal ranking (rank votes) or their top-count ordering (top votes).
//! Targets with ties are handled either as exact expectations over a uniform
//! tie-break (default) or as a seeded `k`-sample mean.
//!
//! With those targets an uninformative population has exact benchmarks: a
//! random top pick errs 3/4 at four alternatives, and a random ranking sits
//! at half the pair count, KT 3.
//!
//! Aggregated (SP, baseline) outputs are scored per question; vote and
//! prediction metrics are scored per response.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::Rng;
use spvote::baselines::{
    baseline_kt, baseline_top_error, groups_by_score_desc, Profile, VotingRule,
};
use spvote::aggregate::Tournament;
use spvote::model::{Election, Ranking, VoteReport};
use spvote::seed;
use spvote::tournament::{expected_kt_of_groups, kt_distance, ranking_kt, sample_top, top_error};
use spvote::Result as SpResult;

use crate::config::MetricMode;

/// One per-question raw value.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionRow {
    pub question_id: String,
    pub format: String,
    pub domain: String,
    pub metric: String,
    pub value: f64,
}

/// One summary table row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub format: String,
    pub domain: String,
    pub metric: String,
    pub mean: f64,
    /// 95% normal-approximation half-width; absent when n < 2.
    pub half_width: Option<f64>,
    pub n: usize,
}

/// Mean and 95% half-width (1.96 sd / sqrt(n)); the half-width needs n >= 2.
pub fn mean_half_width(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some(1.96 * var.sqrt() / (n as f64).sqrt()))
}

/// Accumulates metric samples keyed by (metric, format, domain).
#[derive(Debug, Default)]
pub struct Samples {
    map: BTreeMap<(String, String, String), Vec<f64>>,
}

impl Samples {
    pub fn push(&mut self, metric: &str, format: &str, domain: &str, value: f64) {
        self.map
            .entry((metric.to_string(), format.to_string(), domain.to_string()))
            .or_default()
            .push(value);
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Summary rows: one per (metric, format, domain), plus a pooled
    /// domain = "all" row whenever a metric/format spans several domains.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut pooled: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for ((metric, format, _), values) in &self.map {
            pooled
                .entry((metric.clone(), format.clone()))
                .or_default()
                .extend_from_slice(values);
        }
        let mut rows = Vec::new();
        for ((metric, format), values) in &pooled {
            let (mean, half_width) = mean_half_width(values);
            rows.push(SummaryRow {
                format: format.clone(),
                domain: "all".to_string(),
                metric: metric.clone(),
                mean,
                half_width,
                n: values.len(),
            });
        }
        let domains: BTreeMap<(&String, &String), usize> = {
            let mut c = BTreeMap::new();
            for (metric, format, _) in self.map.keys() {
                *c.entry((metric, format)).or_insert(0) += 1;
            }
            c
        };
        for ((metric, format, domain), values) in &self.map {
            if domains[&(metric, format)] < 2 {
                continue;
            }
            let (mean, half_width) = mean_half_width(values);
            rows.push(SummaryRow {
                format: format.clone(),
                domain: domain.clone(),
                metric: metric.clone(),
                mean,
                half_width,
                n: values.len(),
            });
        }
        rows.sort_by(|a, b| {
            (&a.metric, &a.format, &a.domain).cmp(&(&b.metric, &b.format, &b.domain))
        });
        rows
    }
}

/// 0/1 error of each response's top choice against the truth top, all
/// responses in order.
pub fn vote_top_errors(e: &Election, truth: &Ranking) -> Vec<f64> {
    e.responses
        .iter()
        .map(|r| if r.vote.top() == truth.top() { 0.0 } else { 1.0 })
        .collect()
}

/// KT distance of each full-ranking vote to the truth; empty for top votes.
pub fn vote_kts(e: &Election, truth: &Ranking) -> SpResult<Vec<f64>> {
    e.responses
        .iter()
        .filter_map(|r| match &r.vote {
            VoteReport::FullRanking(rk) => Some(ranking_kt(rk, truth).map(|k| k as f64)),
            VoteReport::TopChoice(_) => None,
        })
        .collect()
}

fn modal_set(counts: &[usize]) -> Vec<usize> {
    let best = counts.iter().copied().max().unwrap_or(0);
    (0..counts.len()).filter(|&a| counts[a] == best).collect()
}

/// Error of one top prediction against the modal top of `counts`, exact or
/// sampled.
fn top_prediction_error(
    predicted: usize,
    counts: &[usize],
    mode: MetricMode,
    rng: &mut impl Rng,
) -> f64 {
    let modal = modal_set(counts);
    match mode {
        MetricMode::Exact => {
            if modal.contains(&predicted) {
                1.0 - 1.0 / modal.len() as f64
            } else {
                1.0
            }
        }
        MetricMode::Sampled(k) => {
            let mut wrong = 0usize;
            for _ in 0..k {
                let target = modal[rng.random_range(0..modal.len())];
                if target != predicted {
                    wrong += 1;
                }
            }
            wrong as f64 / k as f64
        }
    }
}

/// KT of one ranking prediction against the top-count ordering, exact or
/// sampled: alternatives sort by how many others placed them on top, ties
/// uniform.
fn rank_prediction_kt_vs_counts(
    predicted: &Ranking,
    counts: &[usize],
    mode: MetricMode,
    rng: &mut impl Rng,
) -> SpResult<f64> {
    let groups = groups_by_score_desc(counts);
    match mode {
        MetricMode::Exact => expected_kt_of_groups(&groups, predicted),
        MetricMode::Sampled(k) => {
            let mut total = 0.0;
            for _ in 0..k {
                let mut order = Vec::with_capacity(counts.len());
                for group in &groups {
                    let mut g = group.clone();
                    // Uniform order within the tied group.
                    for i in (1..g.len()).rev() {
                        g.swap(i, rng.random_range(0..=i));
                    }
                    order.extend(g);
                }
                total += ranking_kt(&Ranking::new(order)?, predicted)? as f64;
            }
            Ok(total / k as f64)
        }
    }
}

/// KT of one ranking prediction against the modal ranking(s) of the others,
/// exact (mean over the modal set) or sampled.
fn rank_prediction_kt_vs_modal(
    predicted: &Ranking,
    others: &[&Ranking],
    mode: MetricMode,
    rng: &mut impl Rng,
) -> SpResult<f64> {
    let mut counts: HashMap<&Ranking, usize> = HashMap::new();
    for r in others {
        *counts.entry(r).or_insert(0) += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    let mut modal: Vec<&Ranking> = counts
        .iter()
        .filter(|(_, &c)| c == best)
        .map(|(&r, _)| r)
        .collect();
    modal.sort_by(|a, b| a.order().cmp(b.order()));
    match mode {
        MetricMode::Exact => {
            let total: f64 = modal
                .iter()
                .map(|r| ranking_kt(predicted, r).map(|k| k as f64))
                .sum::<SpResult<f64>>()?;
            Ok(total / modal.len() as f64)
        }
        MetricMode::Sampled(k) => {
            let mut total = 0.0;
            for _ in 0..k {
                let target = modal[rng.random_range(0..modal.len())];
                total += ranking_kt(predicted, target)? as f64;
            }
            Ok(total / k as f64)
        }
    }
}

/// Per-response prediction errors for one election:
/// `(pred_top_errors, pred_kts)`; empty when the format has no predictions.
pub fn prediction_errors(
    e: &Election,
    mode: MetricMode,
    base_seed: u64,
) -> SpResult<(Vec<f64>, Vec<f64>)> {
    let mut top_errors = Vec::new();
    let mut kts = Vec::new();
    if e.responses.len() < 2 {
        return Ok((top_errors, kts));
    }
    let qid = e.question.question_id.clone();
    let m = e.question.m();
    for (i, r) in e.responses.iter().enumerate() {
        let others: Vec<&VoteReport> = e
            .responses
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| &o.vote)
            .collect();
        let mut counts = vec![0usize; m];
        for v in &others {
            counts[v.top()] += 1;
        }
        match &r.prediction {
            spvote::model::PredictionReport::Absent => {}
            spvote::model::PredictionReport::TopChoice(p) => {
                let mut rng = seed::rng(base_seed, &["metric", &qid, "pred_top", &r.voter_id]);
                top_errors.push(top_prediction_error(*p, &counts, mode, &mut rng));
            }
            spvote::model::PredictionReport::FullRanking(p) => {
                let mut rng = seed::rng(base_seed, &["metric", &qid, "pred_top", &r.voter_id]);
                top_errors.push(top_prediction_error(p.top(), &counts, mode, &mut rng));
                let mut rng = seed::rng(base_seed, &["metric", &qid, "pred_kt", &r.voter_id]);
                let rank_votes: Vec<&Ranking> = others
                    .iter()
                    .filter_map(|v| match v {
                        VoteReport::FullRanking(rk) => Some(rk),
                        VoteReport::TopChoice(_) => None,
                    })
                    .collect();
                let kt = if rank_votes.len() == others.len() {
                    rank_prediction_kt_vs_modal(p, &rank_votes, mode, &mut rng)?
                } else {
                    rank_prediction_kt_vs_counts(p, &counts, mode, &mut rng)?
                };
                kts.push(kt);
            }
        }
    }
    Ok((top_errors, kts))
}

/// Per-question SP errors: `(sp_top_error, sp_kt)`.
pub fn sp_errors(
    t: &Tournament,
    truth: &Ranking,
    qid: &str,
    mode: MetricMode,
    base_seed: u64,
) -> SpResult<(f64, f64)> {
    let top = match mode {
        MetricMode::Exact => top_error(t, truth)?,
        MetricMode::Sampled(k) => {
            let mut rng = seed::rng(base_seed, &["metric", qid, "sp_top"]);
            let mut wrong = 0usize;
            for _ in 0..k {
                if sample_top(t, &mut rng)? != truth.top() {
                    wrong += 1;
                }
            }
            wrong as f64 / k as f64
        }
    };
    Ok((top, kt_distance(t, truth)? as f64))
}

/// Per-question baseline errors: `(rule token, top_error, kt)` for all six
/// rules, exact tie-break expectations.
pub fn baseline_errors(profile: &Profile, truth: &Ranking) -> SpResult<Vec<(&'static str, f64, f64)>> {
    VotingRule::ALL
        .iter()
        .map(|rule| {
            Ok((
                rule.token(),
                baseline_top_error(*rule, profile, truth)?,
                baseline_kt(*rule, profile, truth)?,
            ))
        })
        .collect()
}

/// Question-mean of a value list, used for raw per-question rows of
/// response-level metrics.
pub fn question_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
