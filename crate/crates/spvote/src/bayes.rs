//! Generative world model for simulated voters.
//!
//! A world is a prior over all `m!` rankings plus a signal channel giving the
//! probability of observing each ranking conditional on each truth. Voters
//! observe one signal, vote it truthfully (top or full order by format), and
//! derive predictions from the exact posterior over other voters' signals:
//!
//! * top prediction: the alternative with the largest probability of being
//!   another voter's top choice;
//! * rank prediction with a top vote: alternatives ordered by that
//!   probability, descending;
//! * rank prediction with a rank vote: the single most likely other-voter
//!   ranking.
//!
//! Exact ties in any argmax resolve uniformly from the caller's seeded rng.
//! An optional noise layer replaces a prediction with a uniformly random one
//! of the right shape, emulating imperfect respondents. Everything is
//! enumerated exactly, which is why worlds cap at [`MAX_ALTERNATIVES`].

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    AltId, Election, ElicitationFormat, PredictionKind, PredictionReport, Question, Ranking,
    ResponseRecord, VoteKind, VoteReport,
};
use crate::seed;
use crate::tournament::ranking_kt;

/// Largest supported alternative count; worlds enumerate all `m!` rankings.
pub const MAX_ALTERNATIVES: usize = 6;

/// Normalizing constant of the Mallows model: `prod_{i=1..m} (1 + phi + ... +
/// phi^(i-1))`.
pub fn mallows_normalizer(m: usize, phi: f64) -> f64 {
    (1..=m)
        .map(|i| (0..i).map(|k| phi.powi(k as i32)).sum::<f64>())
        .product()
}

/// Probability of each ranking (lexicographic order) under a Mallows model
/// centered at `center`: weight `phi^kt(r, center)`, normalized.
pub fn mallows_pmf(center: &Ranking, phi: f64) -> Result<Vec<f64>> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidDispersion(phi));
    }
    let m = center.len();
    let z = mallows_normalizer(m, phi);
    all_rankings(m)?
        .iter()
        .map(|r| Ok(phi.powi(ranking_kt(r, center)? as i32) / z))
        .collect()
}

fn all_rankings(m: usize) -> Result<Vec<Ranking>> {
    if !(2..=MAX_ALTERNATIVES).contains(&m) {
        return Err(Error::WorldTooLarge {
            got: m,
            max: MAX_ALTERNATIVES,
        });
    }
    Ok((0..m)
        .permutations(m)
        .map(|p| Ranking::new(p).expect("permutation"))
        .collect())
}

fn validate_distribution(dist: &[f64], len: usize, what: &'static str) -> Result<()> {
    let ok = dist.len() == len
        && dist.iter().all(|&p| p > 0.0 && p.is_finite())
        && (dist.iter().sum::<f64>() - 1.0).abs() < 1e-9;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDistribution { what, len })
    }
}

/// Prior plus signal channel over all rankings of `m` alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    m: usize,
    rankings: Vec<Ranking>,
    index: HashMap<Ranking, usize>,
    prior: Vec<f64>,
    /// `signal[t][o]` = probability of observing ranking `o` when `t` is true.
    signal: Vec<Vec<f64>>,
}

impl WorldModel {
    /// World with the given prior and a Mallows signal channel of dispersion
    /// `phi` centered at the truth. `None` prior means uniform.
    pub fn mallows(m: usize, phi: f64, prior: Option<Vec<f64>>) -> Result<Self> {
        let rankings = all_rankings(m)?;
        let k = rankings.len();
        let prior = prior.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        let signal = rankings
            .iter()
            .map(|center| mallows_pmf(center, phi))
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(m, prior, signal)
    }

    /// World from explicit tables. `signal[t][o]` rows must be strictly
    /// positive distributions, as must the prior.
    pub fn explicit(m: usize, prior: Vec<f64>, signal: Vec<Vec<f64>>) -> Result<Self> {
        let rankings = all_rankings(m)?;
        let k = rankings.len();
        validate_distribution(&prior, k, "prior")?;
        if signal.len() != k {
            return Err(Error::InvalidDistribution {
                what: "signal table",
                len: k,
            });
        }
        for row in &signal {
            validate_distribution(row, k, "signal row")?;
        }
        let index = rankings
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, r)| (r, i))
            .collect();
        Ok(WorldModel {
            m,
            rankings,
            index,
            prior,
            signal,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// All rankings in the world's canonical (lexicographic) order.
    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn index_of(&self, r: &Ranking) -> Result<usize> {
        self.index
            .get(r)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("ranking {r} is not over 0..{}", self.m)))
    }

    /// Posterior over truths after observing signal `observed`.
    pub fn posterior(&self, observed: &Ranking) -> Result<Vec<f64>> {
        let o = self.index_of(observed)?;
        let mut post: Vec<f64> = (0..self.rankings.len())
            .map(|t| self.signal[t][o] * self.prior[t])
            .collect();
        let z: f64 = post.iter().sum();
        for p in &mut post {
            *p /= z;
        }
        Ok(post)
    }

    /// Distribution of another voter's signal given one's own: the signal
    /// channel averaged over the posterior.
    pub fn other_vote_distribution(&self, observed: &Ranking) -> Result<Vec<f64>> {
        let post = self.posterior(observed)?;
        let k = self.rankings.len();
        let mut other = vec![0.0; k];
        for (t, &pt) in post.iter().enumerate() {
            for (j, o) in other.iter_mut().enumerate() {
                *o += pt * self.signal[t][j];
            }
        }
        Ok(other)
    }

    /// Probability that each alternative tops another voter's signal.
    pub fn top_mass(&self, observed: &Ranking) -> Result<Vec<f64>> {
        let other = self.other_vote_distribution(observed)?;
        let mut mass = vec![0.0; self.m];
        for (j, r) in self.rankings.iter().enumerate() {
            mass[r.top()] += other[j];
        }
        Ok(mass)
    }

    /// The voter's exact predicted frequency of other voters putting `pair.0`
    /// above `pair.1`.
    pub fn pairwise_prediction(&self, observed: &Ranking, pair: (AltId, AltId)) -> Result<f64> {
        let other = self.other_vote_distribution(observed)?;
        let mut total = 0.0;
        for (j, r) in self.rankings.iter().enumerate() {
            if r.prefers(pair.0, pair.1)? {
                total += other[j];
            }
        }
        Ok(total)
    }

    /// Whether every truth is strictly most believed by its own observers:
    /// `posterior(pi)[pi] > posterior(pi')[pi]` for all distinct `pi, pi'`.
    pub fn self_dominant(&self) -> Result<bool> {
        let k = self.rankings.len();
        let posts: Vec<Vec<f64>> = self
            .rankings
            .iter()
            .map(|r| self.posterior(r))
            .collect::<Result<_>>()?;
        for t in 0..k {
            for o in 0..k {
                if o != t && posts[t][t] <= posts[o][t] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Draws one signal ranking conditional on `truth`.
    pub fn sample_signal(&self, truth: &Ranking, rng: &mut impl Rng) -> Result<Ranking> {
        let t = self.index_of(truth)?;
        let row = &self.signal[t];
        let mut u: f64 = rng.random_range(0.0..1.0);
        for (j, &p) in row.iter().enumerate() {
            if u < p {
                return Ok(self.rankings[j].clone());
            }
            u -= p;
        }
        Ok(self.rankings[self.rankings.len() - 1].clone())
    }
}

/// Uniform draw from the indices achieving the maximum of `values`, with
/// exactly-equal values treated as tied.
fn argmax_uniform(values: &[f64], rng: &mut impl Rng) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] == best)
        .collect();
    ties[rng.random_range(0..ties.len())]
}

/// Orders `0..values.len()` by descending value; exactly-equal runs are
/// shuffled uniformly.
fn sort_desc_ties_uniform(values: &[f64], rng: &mut impl Rng) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..values.len()).collect();
    ids.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite masses"));
    let mut out: Vec<usize> = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        let mut j = i + 1;
        while j < ids.len() && values[ids[j]] == values[ids[i]] {
            j += 1;
        }
        let mut group = ids[i..j].to_vec();
        // Fisher-Yates on the tied run.
        for k in (1..group.len()).rev() {
            group.swap(k, rng.random_range(0..=k));
        }
        out.extend(group);
        i = j;
    }
    out
}

fn exact_prediction(
    world: &WorldModel,
    observed: &Ranking,
    kind: PredictionKind,
    rng: &mut impl Rng,
) -> Result<PredictionReport> {
    match kind {
        PredictionKind::None => Ok(PredictionReport::Absent),
        PredictionKind::Top => {
            let mass = world.top_mass(observed)?;
            Ok(PredictionReport::TopChoice(argmax_uniform(&mass, rng)))
        }
        PredictionKind::Rank => Ok(PredictionReport::FullRanking(
            world.most_likely_rank_prediction(observed, rng)?,
        )),
    }
}

impl WorldModel {
    fn most_likely_rank_prediction(
        &self,
        observed: &Ranking,
        rng: &mut impl Rng,
    ) -> Result<Ranking> {
        // Used for rank predictions with rank votes: the modal other-ranking.
        let other = self.other_vote_distribution(observed)?;
        Ok(self.rankings[argmax_uniform(&other, rng)].clone())
    }

    fn top_mass_order(&self, observed: &Ranking, rng: &mut impl Rng) -> Result<Ranking> {
        // Used for rank predictions with top votes: alternatives by top mass.
        let mass = self.top_mass(observed)?;
        Ranking::new(sort_desc_ties_uniform(&mass, rng))
    }
}

fn random_prediction(
    world: &WorldModel,
    kind: PredictionKind,
    rng: &mut impl Rng,
) -> PredictionReport {
    match kind {
        PredictionKind::None => PredictionReport::Absent,
        PredictionKind::Top => PredictionReport::TopChoice(rng.random_range(0..world.m)),
        PredictionKind::Rank => {
            let k = world.rankings.len();
            PredictionReport::FullRanking(world.rankings[rng.random_range(0..k)].clone())
        }
    }
}

/// Samples one response: signal from the channel, truthful vote, posterior
/// prediction. With probability `noise` the prediction (never the vote) is
/// replaced by a uniformly random one.
pub fn generate_response(
    world: &WorldModel,
    question_id: &str,
    voter_id: &str,
    truth: &Ranking,
    format: ElicitationFormat,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<ResponseRecord> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Invalid(format!(
            "prediction noise must lie in [0, 1], got {noise}"
        )));
    }
    let signal = world.sample_signal(truth, rng)?;
    let vote = match format.vote {
        VoteKind::Top => VoteReport::TopChoice(signal.top()),
        VoteKind::Rank => VoteReport::FullRanking(signal.clone()),
    };
    let prediction = match format.prediction {
        PredictionKind::Rank if format.vote == VoteKind::Top => {
            // Top voters asked for a ranking predict the popularity order of
            // top choices, not the modal full ranking.
            if noise > 0.0 && rng.random_bool(noise) {
                random_prediction(world, PredictionKind::Rank, rng)
            } else {
                PredictionReport::FullRanking(world.top_mass_order(&signal, rng)?)
            }
        }
        kind => {
            if kind != PredictionKind::None && noise > 0.0 && rng.random_bool(noise) {
                random_prediction(world, kind, rng)
            } else {
                exact_prediction(world, &signal, kind, rng)?
            }
        }
    };
    Ok(ResponseRecord {
        question_id: question_id.to_string(),
        voter_id: voter_id.to_string(),
        format,
        vote,
        prediction,
    })
}

/// Generates a full election of `voters` iid responses for one question.
/// Deterministic in `seed`; the question's ground truth is set to `truth`.
#[allow(clippy::too_many_arguments)]
pub fn generate_election(
    world: &WorldModel,
    question_id: &str,
    domain: &str,
    truth: &Ranking,
    format: ElicitationFormat,
    voters: usize,
    noise: f64,
    seed: u64,
) -> Result<Election> {
    if voters == 0 {
        return Err(Error::EmptyElection);
    }
    if truth.len() != world.m {
        return Err(Error::LengthMismatch(truth.len(), world.m));
    }
    let alternatives = (0..world.m)
        .map(|id| crate::model::Alternative {
            id,
            label: format!("alt{id}"),
        })
        .collect();
    let question = Question::new(question_id, domain, alternatives, Some(truth.clone()))?;
    let mut rng = seed::rng(seed, &["gen", question_id, format.token()]);
    let responses = (0..voters)
        .map(|i| {
            generate_response(
                world,
                question_id,
                &format!("v{i:04}"),
                truth,
                format,
                noise,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Election::new(question, responses)
}

/// Two-worlds scenario on a single pair, embedded as an `m = 2` world.
///
/// Truth `[0,1]` emits the signal `[0,1]` at rate `p_high`; truth `[1,0]`
/// emits it at rate `p_low`. With `0.5 < p_low < p_high < 1` and truth
/// `[1,0]`, the majority votes `0` over `1` and is wrong, yet every voter
/// predicts a popular `0` (the posterior top mass of `0` exceeds one half
/// whatever they observe), which is exactly the footprint surprisingly
/// popular aggregation detects. The prior leans toward the majority-wrong
/// world.
pub fn adversarial_world(p_high: f64, p_low: f64) -> Result<WorldModel> {
    if !(0.5 < p_low && p_low < p_high && p_high < 1.0) {
        return Err(Error::Invalid(format!(
            "need 0.5 < p_low < p_high < 1, got p_low={p_low}, p_high={p_high}"
        )));
    }
    WorldModel::explicit(
        2,
        vec![0.4, 0.6],
        vec![
            vec![p_high, 1.0 - p_high],
            vec![p_low, 1.0 - p_low],
        ],
    )
}
