//! Surprisingly-popular aggregation of pairwise reports into a tournament.
//!
//! For each alternative pair, every voter contributes a binary vote and a
//! cardinal prediction of the vote frequency. Each side's vote share is
//! normalized by how strongly it was predicted: a side whose actual support
//! exceeds what voters predicted for it scores high. Per pair, with `n1`
//! voters for the first alternative and `n0` against, `f = n1 / n`, `g11` the
//! mean prediction among supporters and `g10` among opponents, the two scores
//! are
//!
//! ```text
//! score(first)  = f       * (n1 + n0 * (1 - g11) / g10)
//! score(second) = (1 - f) * (n1 * g10 / (1 - g11) + n0)
//! ```
//!
//! The larger score wins; exact ties are recorded and resolved by a seeded
//! coin. A unanimous pair degenerates to unanimity (the empty side scores 0).
//! Pairs are always aggregated in canonical `a < b` orientation: with
//! non-complementary imputation parameters (`beta != 1 - alpha`) the imputed
//! magnitudes are orientation-dependent, so a fixed orientation is part of the
//! method's definition.
//!
//! Prediction-free formats never reach the scorer; they use the fallbacks
//! ([`fallback_top_none`], [`fallback_rank_none`]) instead.

use rand::Rng;

use crate::error::{Error, Result};
use crate::extract::{extract_pair_vote, extract_reports, ExtractionParams, PairwiseReport};
use crate::model::{pairs, AltId, Election, PredictionKind, Ranking, VoteKind};
use crate::seed;

/// Directed results for every alternative pair of one question.
///
/// Edges may be unset while a tournament is under construction; the metric
/// operations require completeness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament {
    m: usize,
    edges: Vec<Option<bool>>,
}

impl Tournament {
    /// A tournament over `m` alternatives with every edge unset.
    pub fn empty(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewAlternatives(m));
        }
        Ok(Tournament {
            m,
            edges: vec![None; m * (m - 1) / 2],
        })
    }

    /// Builds a complete tournament by asking `f` for every canonical pair.
    pub fn from_fn(m: usize, mut f: impl FnMut(AltId, AltId) -> bool) -> Result<Self> {
        let mut t = Tournament::empty(m)?;
        for (a, b) in pairs(m) {
            t.set(a, b, f(a, b))?;
        }
        Ok(t)
    }

    /// The transitive tournament induced by a ranking.
    pub fn from_ranking(r: &Ranking) -> Self {
        Tournament::from_fn(r.len(), |a, b| r.prefers(a, b).expect("ids in range"))
            .expect("ranking has at least one alternative pair")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn index(&self, a: AltId, b: AltId) -> Result<(usize, bool)> {
        if a == b {
            return Err(Error::DegeneratePair(a, b));
        }
        let (lo, hi, flipped) = if a < b { (a, b, false) } else { (b, a, true) };
        if hi >= self.m {
            return Err(Error::UnknownAlternative { id: hi, m: self.m });
        }
        let idx = lo * (2 * self.m - lo - 1) / 2 + (hi - lo - 1);
        Ok((idx, flipped))
    }

    /// Records that `a` beats `b` iff `a_wins`.
    pub fn set(&mut self, a: AltId, b: AltId, a_wins: bool) -> Result<()> {
        let (idx, flipped) = self.index(a, b)?;
        self.edges[idx] = Some(a_wins != flipped);
        Ok(())
    }

    /// Whether `a` beats `b`; errors if the edge is unset.
    pub fn beats(&self, a: AltId, b: AltId) -> Result<bool> {
        let (idx, flipped) = self.index(a, b)?;
        match self.edges[idx] {
            Some(dir) => Ok(dir != flipped),
            None => Err(Error::IncompleteTournament(a.min(b), a.max(b))),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.edges.iter().all(Option::is_some)
    }

    /// Canonical pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(AltId, AltId)> {
        pairs(self.m)
    }
}

/// Which side of a pair won on raw scores, before tie resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOutcome {
    First,
    Second,
    /// Scores were exactly equal; `first_wins` holds the seeded coin result.
    Tie,
}

/// Full audit record of one pair's aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDecision {
    pub pair: (AltId, AltId),
    /// Prediction-normalized score for `pair.0` over `pair.1`.
    pub score_first: f64,
    /// Prediction-normalized score for `pair.1` over `pair.0`.
    pub score_second: f64,
    pub outcome: PairOutcome,
    /// Resolved direction: `true` iff `pair.0` beats `pair.1`.
    pub first_wins: bool,
    /// Fraction of usable voters putting `pair.0` first.
    pub support_first: f64,
    /// Mean prediction among supporters of `pair.0`; absent if none.
    pub mean_pred_supporters: Option<f64>,
    /// Mean prediction among supporters of `pair.1`; absent if none.
    pub mean_pred_opponents: Option<f64>,
}

/// How per-pair scores sum over the evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpMode {
    /// One term per voter (each voter's report normalized individually).
    #[default]
    PerVoter,
    /// One term per distinct signal value, ignoring multiplicity.
    PerSignal,
}

fn check_predictions(reports: &[PairwiseReport]) -> Result<()> {
    for r in reports {
        if !(r.prediction > 0.0 && r.prediction < 1.0) {
            return Err(Error::Invalid(format!(
                "pairwise prediction must lie in (0, 1), got {} from voter {}",
                r.prediction, r.voter_id
            )));
        }
    }
    Ok(())
}

/// Decides one pair from its reports, Alg.-style per-voter sums.
pub fn sp_pair_decision(reports: &[PairwiseReport], rng: &mut impl Rng) -> Result<PairDecision> {
    sp_pair_decision_with_mode(reports, SpMode::PerVoter, rng)
}

/// [`sp_pair_decision`] with an explicit summation mode.
pub fn sp_pair_decision_with_mode(
    reports: &[PairwiseReport],
    mode: SpMode,
    rng: &mut impl Rng,
) -> Result<PairDecision> {
    if reports.is_empty() {
        return Err(Error::NoEvidence(0, 1));
    }
    check_predictions(reports)?;
    let n = reports.len() as f64;
    let n1 = reports.iter().filter(|r| r.vote).count() as f64;
    let n0 = n - n1;
    let support_first = n1 / n;

    let mean = |side: bool| -> Option<f64> {
        let qs: Vec<f64> = reports
            .iter()
            .filter(|r| r.vote == side)
            .map(|r| r.prediction)
            .collect();
        if qs.is_empty() {
            None
        } else {
            Some(qs.iter().sum::<f64>() / qs.len() as f64)
        }
    };
    let g11 = mean(true);
    let g10 = mean(false);

    let (score_first, score_second) = match (g11, g10) {
        // Unanimous pairs degenerate to unanimity: the empty side scores 0.
        (Some(_), None) => match mode {
            SpMode::PerVoter => (n, 0.0),
            SpMode::PerSignal => (1.0, 0.0),
        },
        (None, Some(_)) => match mode {
            SpMode::PerVoter => (0.0, n),
            SpMode::PerSignal => (0.0, 1.0),
        },
        (Some(g11), Some(g10)) => {
            // Surprise ratios: how much more popular each side is among the
            // other side's voters than that side predicted.
            let toward_first = g10 / (1.0 - g11);
            let toward_second = (1.0 - g11) / g10;
            match mode {
                SpMode::PerVoter => (
                    support_first * (n1 + n0 * toward_second),
                    (1.0 - support_first) * (n1 * toward_first + n0),
                ),
                SpMode::PerSignal => (
                    support_first * (1.0 + toward_second),
                    (1.0 - support_first) * (toward_first + 1.0),
                ),
            }
        }
        (None, None) => unreachable!("reports are nonempty"),
    };

    let (outcome, first_wins) = if score_first > score_second {
        (PairOutcome::First, true)
    } else if score_second > score_first {
        (PairOutcome::Second, false)
    } else {
        (PairOutcome::Tie, rng.random_bool(0.5))
    };

    Ok(PairDecision {
        pair: (0, 1),
        score_first,
        score_second,
        outcome,
        first_wins,
        support_first,
        mean_pred_supporters: g11,
        mean_pred_opponents: g10,
    })
}

/// Per-pair audit trail of a full SP aggregation. `decision` is `None` for
/// pairs where every voter was discarded (resolved by fair coin).
#[derive(Debug, Clone, PartialEq)]
pub struct ElectionDecisions {
    pub tournament: Tournament,
    pub decisions: Vec<Option<PairDecision>>,
}

/// Runs SP on every canonical pair of `election` and returns the audit trail.
///
/// Tie and no-evidence coins draw from streams derived from `seed`, the
/// question id, and the pair, so results do not depend on pair iteration
/// order.
pub fn sp_election_decisions(
    election: &Election,
    params: ExtractionParams,
    mode: SpMode,
    seed: u64,
) -> Result<ElectionDecisions> {
    let m = election.question.m();
    let qid = &election.question.question_id;
    let mut tournament = Tournament::empty(m)?;
    let mut decisions = Vec::with_capacity(m * (m - 1) / 2);
    for (a, b) in pairs(m) {
        let reports = extract_reports(election, (a, b), params)?;
        let mut rng = seed::rng(seed, &["sp", qid, &a.to_string(), &b.to_string()]);
        if reports.is_empty() {
            tournament.set(a, b, rng.random_bool(0.5))?;
            decisions.push(None);
            continue;
        }
        let mut d = sp_pair_decision_with_mode(&reports, mode, &mut rng)?;
        d.pair = (a, b);
        tournament.set(a, b, d.first_wins)?;
        decisions.push(Some(d));
    }
    Ok(ElectionDecisions {
        tournament,
        decisions,
    })
}

/// SP aggregation of one election into a tournament.
pub fn aggregate_election(
    election: &Election,
    params: ExtractionParams,
    seed: u64,
) -> Result<Tournament> {
    Ok(sp_election_decisions(election, params, SpMode::PerVoter, seed)?.tournament)
}

/// Fallback for top votes without predictions: direct each pair by plurality
/// score; equal scores fall to a seeded coin per pair.
pub fn fallback_top_none(election: &Election, seed: u64) -> Result<Tournament> {
    let m = election.question.m();
    let qid = &election.question.question_id;
    let mut counts = vec![0usize; m];
    for r in &election.responses {
        counts[r.vote.top()] += 1;
    }
    let mut t = Tournament::empty(m)?;
    for (a, b) in pairs(m) {
        let dir = match counts[a].cmp(&counts[b]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                seed::rng(seed, &["plurality", qid, &a.to_string(), &b.to_string()])
                    .random_bool(0.5)
            }
        };
        t.set(a, b, dir)?;
    }
    Ok(t)
}

/// Fallback for rank votes without predictions: pairwise majority; ties and
/// empty pairs fall to a seeded coin per pair.
pub fn fallback_rank_none(election: &Election, seed: u64) -> Result<Tournament> {
    let m = election.question.m();
    let qid = &election.question.question_id;
    let mut t = Tournament::empty(m)?;
    for (a, b) in pairs(m) {
        let mut first = 0usize;
        let mut second = 0usize;
        for r in &election.responses {
            match extract_pair_vote(&r.vote, (a, b))? {
                Some(true) => first += 1,
                Some(false) => second += 1,
                None => {}
            }
        }
        let dir = match first.cmp(&second) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                seed::rng(seed, &["majority", qid, &a.to_string(), &b.to_string()])
                    .random_bool(0.5)
            }
        };
        t.set(a, b, dir)?;
    }
    Ok(t)
}

/// Routes an election to SP or to the matching prediction-free fallback based
/// on its format. Mixed-format elections take the SP path, where
/// prediction-free voters participate with the uninformative 0.5.
pub fn aggregate_auto(
    election: &Election,
    params: ExtractionParams,
    seed: u64,
) -> Result<Tournament> {
    match election.uniform_format() {
        Some(f) if f.prediction == PredictionKind::None => match f.vote {
            VoteKind::Top => fallback_top_none(election, seed),
            VoteKind::Rank => fallback_rank_none(election, seed),
        },
        _ => aggregate_election(election, params, seed),
    }
}
