//! Classical voting rules over full-ranking profiles, evaluated as exact
//! expectations over uniform tie-break branches.
//!
//! Each rule yields a winner distribution (probability of electing each
//! alternative) and an expected Kendall tau distance for the full ranking it
//! induces. Score rules (plurality, Borda, Copeland, maximin) rank by score
//! descending with tied scores as uniform groups; IRV ranks by reverse
//! elimination order with elimination ties branched uniformly; plurality
//! runoff puts the runoff winner and loser on top and orders the rest by
//! first-place score.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AltId, Election, Ranking, VoteReport};
use crate::tournament::expected_kt_of_groups;

/// A nonempty multiset of full rankings over the same alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    rankings: Vec<Ranking>,
    m: usize,
}

impl Profile {
    pub fn new(rankings: Vec<Ranking>) -> Result<Self> {
        let Some(first) = rankings.first() else {
            return Err(Error::EmptyProfile);
        };
        let m = first.len();
        if m < 2 {
            return Err(Error::TooFewAlternatives(m));
        }
        for r in &rankings {
            if r.len() != m {
                return Err(Error::LengthMismatch(r.len(), m));
            }
        }
        Ok(Profile { rankings, m })
    }

    /// Collects the full-ranking votes of an election; top-only votes are a
    /// contract violation since these rules need complete orders.
    pub fn from_election(election: &Election) -> Result<Self> {
        let rankings = election
            .responses
            .iter()
            .map(|r| match &r.vote {
                VoteReport::FullRanking(rk) => Ok(rk.clone()),
                VoteReport::TopChoice(_) => Err(Error::NonRankVote),
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(rankings)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one ranking
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    fn first_place_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.m];
        for r in &self.rankings {
            counts[r.top()] += 1;
        }
        counts
    }

    /// `counts[a][b]` = number of voters preferring `a` to `b`.
    fn pairwise_counts(&self) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0usize; self.m]; self.m];
        for r in &self.rankings {
            let order = r.order();
            for i in 0..self.m {
                for j in (i + 1)..self.m {
                    counts[order[i]][order[j]] += 1;
                }
            }
        }
        counts
    }
}

/// The six baseline rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingRule {
    Plurality,
    PluralityRunoff,
    Borda,
    Copeland,
    Irv,
    Maximin,
}

impl VotingRule {
    pub const ALL: [Self; 6] = [
        Self::Plurality,
        Self::PluralityRunoff,
        Self::Borda,
        Self::Copeland,
        Self::Irv,
        Self::Maximin,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            Self::Plurality => "plurality",
            Self::PluralityRunoff => "runoff",
            Self::Borda => "borda",
            Self::Copeland => "copeland",
            Self::Irv => "irv",
            Self::Maximin => "maximin",
        }
    }
}

impl fmt::Display for VotingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for VotingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.token() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown voting rule {s:?}")))
    }
}

/// Alternatives grouped by descending score; ids ascend within a group.
pub fn groups_by_score_desc<T: Ord + Copy>(scores: &[T]) -> Vec<Vec<AltId>> {
    let mut distinct: Vec<T> = scores.to_vec();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    distinct
        .into_iter()
        .map(|s| (0..scores.len()).filter(|&a| scores[a] == s).collect())
        .collect()
}

fn uniform_over_top_group(groups: &[Vec<AltId>], m: usize) -> Vec<f64> {
    let mut dist = vec![0.0; m];
    let top = &groups[0];
    for &a in top {
        dist[a] = 1.0 / top.len() as f64;
    }
    dist
}

fn borda_scores(p: &Profile) -> Vec<usize> {
    let m = p.m();
    let mut scores = vec![0usize; m];
    for r in p.rankings() {
        for (pos, &a) in r.order().iter().enumerate() {
            scores[a] += m - 1 - pos;
        }
    }
    scores
}

/// Copeland scores doubled to stay integral: 2 per pairwise win, 1 per tie.
fn copeland_scores_doubled(p: &Profile) -> Vec<usize> {
    let counts = p.pairwise_counts();
    let m = p.m();
    let mut scores = vec![0usize; m];
    for a in 0..m {
        for b in (a + 1)..m {
            match counts[a][b].cmp(&counts[b][a]) {
                std::cmp::Ordering::Greater => scores[a] += 2,
                std::cmp::Ordering::Less => scores[b] += 2,
                std::cmp::Ordering::Equal => {
                    scores[a] += 1;
                    scores[b] += 1;
                }
            }
        }
    }
    scores
}

fn maximin_scores(p: &Profile) -> Vec<usize> {
    let counts = p.pairwise_counts();
    let m = p.m();
    (0..m)
        .map(|a| {
            (0..m)
                .filter(|&b| b != a)
                .map(|b| counts[a][b])
                .min()
                .expect("m >= 2")
        })
        .collect()
}

/// Every IRV branch as (elimination order, survivor, probability).
fn irv_branches(p: &Profile) -> Vec<(Vec<AltId>, AltId, f64)> {
    let m = p.m();
    let mut out = Vec::new();
    let mut eliminated: Vec<AltId> = Vec::new();
    let mut alive = vec![true; m];

    fn recurse(
        p: &Profile,
        alive: &mut Vec<bool>,
        eliminated: &mut Vec<AltId>,
        prob: f64,
        out: &mut Vec<(Vec<AltId>, AltId, f64)>,
    ) {
        let live: Vec<AltId> = (0..alive.len()).filter(|&a| alive[a]).collect();
        if live.len() == 1 {
            out.push((eliminated.clone(), live[0], prob));
            return;
        }
        // Current first places: each voter's best-ranked live alternative.
        let mut counts = vec![0usize; alive.len()];
        for r in p.rankings() {
            let top = r
                .order()
                .iter()
                .copied()
                .find(|&a| alive[a])
                .expect("some alternative is alive");
            counts[top] += 1;
        }
        let min = live.iter().map(|&a| counts[a]).min().expect("nonempty");
        let losers: Vec<AltId> = live.iter().copied().filter(|&a| counts[a] == min).collect();
        let branch_prob = prob / losers.len() as f64;
        for &loser in &losers {
            alive[loser] = false;
            eliminated.push(loser);
            recurse(p, alive, eliminated, branch_prob, out);
            eliminated.pop();
            alive[loser] = true;
        }
    }

    recurse(p, &mut alive, &mut eliminated, 1.0, &mut out);
    out
}

/// Runoff finalist branches as ((first pick, second pick), probability).
fn runoff_branches(p: &Profile) -> Vec<((AltId, AltId), f64)> {
    let counts = p.first_place_counts();
    let m = p.m();
    let best = *counts.iter().max().expect("m >= 2");
    let top1: Vec<AltId> = (0..m).filter(|&a| counts[a] == best).collect();
    let mut out = Vec::new();
    for &x in &top1 {
        let p1 = 1.0 / top1.len() as f64;
        let second_best = (0..m)
            .filter(|&a| a != x)
            .map(|a| counts[a])
            .max()
            .expect("m >= 2");
        let top2: Vec<AltId> = (0..m)
            .filter(|&a| a != x && counts[a] == second_best)
            .collect();
        for &y in &top2 {
            out.push(((x, y), p1 / top2.len() as f64));
        }
    }
    out
}

/// Winner distribution of `rule` on `p`: exact election probabilities under
/// uniform tie-breaking, summing to 1.
pub fn winner_distribution(rule: VotingRule, p: &Profile) -> Vec<f64> {
    let m = p.m();
    match rule {
        VotingRule::Plurality => {
            uniform_over_top_group(&groups_by_score_desc(&p.first_place_counts()), m)
        }
        VotingRule::Borda => uniform_over_top_group(&groups_by_score_desc(&borda_scores(p)), m),
        VotingRule::Copeland => {
            uniform_over_top_group(&groups_by_score_desc(&copeland_scores_doubled(p)), m)
        }
        VotingRule::Maximin => uniform_over_top_group(&groups_by_score_desc(&maximin_scores(p)), m),
        VotingRule::Irv => {
            let mut dist = vec![0.0; m];
            for (_, survivor, prob) in irv_branches(p) {
                dist[survivor] += prob;
            }
            dist
        }
        VotingRule::PluralityRunoff => {
            let counts = p.pairwise_counts();
            let mut dist = vec![0.0; m];
            for ((x, y), prob) in runoff_branches(p) {
                match counts[x][y].cmp(&counts[y][x]) {
                    std::cmp::Ordering::Greater => dist[x] += prob,
                    std::cmp::Ordering::Less => dist[y] += prob,
                    std::cmp::Ordering::Equal => {
                        dist[x] += prob / 2.0;
                        dist[y] += prob / 2.0;
                    }
                }
            }
            dist
        }
    }
}

/// Convenience shorthands for the six rules.
pub fn plurality(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::Plurality, p)
}
pub fn plurality_runoff(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::PluralityRunoff, p)
}
pub fn borda(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::Borda, p)
}
pub fn copeland_rule(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::Copeland, p)
}
pub fn irv(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::Irv, p)
}
pub fn maximin(p: &Profile) -> Vec<f64> {
    winner_distribution(VotingRule::Maximin, p)
}

/// Probability that `rule` fails to elect the true top alternative.
pub fn baseline_top_error(rule: VotingRule, p: &Profile, truth: &Ranking) -> Result<f64> {
    if truth.len() != p.m() {
        return Err(Error::LengthMismatch(truth.len(), p.m()));
    }
    Ok(1.0 - winner_distribution(rule, p)[truth.top()])
}

/// Exact expected Kendall tau distance between the rule's induced ranking and
/// `truth`, over all uniform tie-break branches.
pub fn baseline_kt(rule: VotingRule, p: &Profile, truth: &Ranking) -> Result<f64> {
    if truth.len() != p.m() {
        return Err(Error::LengthMismatch(truth.len(), p.m()));
    }
    match rule {
        VotingRule::Plurality => {
            expected_kt_of_groups(&groups_by_score_desc(&p.first_place_counts()), truth)
        }
        VotingRule::Borda => expected_kt_of_groups(&groups_by_score_desc(&borda_scores(p)), truth),
        VotingRule::Copeland => {
            expected_kt_of_groups(&groups_by_score_desc(&copeland_scores_doubled(p)), truth)
        }
        VotingRule::Maximin => {
            expected_kt_of_groups(&groups_by_score_desc(&maximin_scores(p)), truth)
        }
        VotingRule::Irv => {
            let mut expected = 0.0;
            for (eliminated, survivor, prob) in irv_branches(p) {
                let mut order = vec![survivor];
                order.extend(eliminated.iter().rev());
                let ranking = Ranking::new(order).expect("elimination order is a permutation");
                expected += prob * crate::tournament::ranking_kt(&ranking, truth)? as f64;
            }
            Ok(expected)
        }
        VotingRule::PluralityRunoff => {
            let counts = p.pairwise_counts();
            let firsts = p.first_place_counts();
            let mut expected = 0.0;
            for ((x, y), prob) in runoff_branches(p) {
                let mut rest_scores: Vec<(AltId, usize)> = (0..p.m())
                    .filter(|&a| a != x && a != y)
                    .map(|a| (a, firsts[a]))
                    .collect();
                rest_scores.sort_by(|l, r| r.1.cmp(&l.1).then(l.0.cmp(&r.0)));
                let mut rest_groups: Vec<Vec<AltId>> = Vec::new();
                for (a, s) in rest_scores {
                    match rest_groups.last_mut() {
                        Some(g) if firsts[g[0]] == s => g.push(a),
                        _ => rest_groups.push(vec![a]),
                    }
                }
                let mut eval = |w: AltId, l: AltId, pr: f64| -> Result<()> {
                    let mut groups = vec![vec![w], vec![l]];
                    groups.extend(rest_groups.iter().cloned());
                    expected += pr * expected_kt_of_groups(&groups, truth)?;
                    Ok(())
                };
                match counts[x][y].cmp(&counts[y][x]) {
                    std::cmp::Ordering::Greater => eval(x, y, prob)?,
                    std::cmp::Ordering::Less => eval(y, x, prob)?,
                    std::cmp::Ordering::Equal => {
                        eval(x, y, prob / 2.0)?;
                        eval(y, x, prob / 2.0)?;
                    }
                }
            }
            Ok(expected)
        }
    }
}
