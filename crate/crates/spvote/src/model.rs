//! Core domain types: alternatives, rankings, elicitation formats, responses,
//! questions, and elections.
//!
//! Alternatives are canonical integer ids `0..m`; display labels live on
//! [`Alternative`] and matter only for reporting. A [`Ranking`] is a validated
//! strict total order (best first). Every constructor checks its invariants so
//! downstream algorithms can assume well-formed inputs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Canonical alternative id, an index into a question's alternative list.
pub type AltId = usize;

/// One alternative of a question: canonical id plus display label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub id: AltId,
    pub label: String,
}

/// Strict total order over alternatives, best first.
///
/// Always a permutation of `0..m`; construction fails otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<AltId>,
}

impl Ranking {
    pub fn new(order: Vec<AltId>) -> Result<Self> {
        let m = order.len();
        let mut seen = vec![false; m];
        for &a in &order {
            if a >= m || seen[a] {
                return Err(Error::InvalidRanking { m, got: order });
            }
            seen[a] = true;
        }
        if m == 0 {
            return Err(Error::InvalidRanking { m, got: order });
        }
        Ok(Ranking { order })
    }

    /// The identity order `[0, 1, .., m-1]`.
    pub fn identity(m: usize) -> Self {
        Ranking {
            order: (0..m).collect(),
        }
    }

    /// Number of alternatives ranked.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Alternatives from best to worst.
    pub fn order(&self) -> &[AltId] {
        &self.order
    }

    /// The top-ranked alternative.
    pub fn top(&self) -> AltId {
        self.order[0]
    }

    /// Zero-based position of `a`, best = 0.
    pub fn position_of(&self, a: AltId) -> Option<usize> {
        self.order.iter().position(|&x| x == a)
    }

    /// Whether `a` is ranked strictly above `b`.
    ///
    /// Errors when either id is absent; for distinct present ids exactly one
    /// of `prefers(a, b)` / `prefers(b, a)` holds.
    pub fn prefers(&self, a: AltId, b: AltId) -> Result<bool> {
        if a == b {
            return Err(Error::DegeneratePair(a, b));
        }
        let m = self.len();
        let pa = self
            .position_of(a)
            .ok_or(Error::UnknownAlternative { id: a, m })?;
        let pb = self
            .position_of(b)
            .ok_or(Error::UnknownAlternative { id: b, m })?;
        Ok(pa < pb)
    }

    /// Same order reversed, worst first.
    pub fn reversed(&self) -> Ranking {
        let mut order = self.order.clone();
        order.reverse();
        Ranking { order }
    }

    /// Applies a relabeling `map` (old id -> new id) to every entry.
    pub fn relabeled(&self, map: &[AltId]) -> Result<Ranking> {
        let order = self
            .order
            .iter()
            .map(|&a| {
                map.get(a).copied().ok_or(Error::UnknownAlternative {
                    id: a,
                    m: map.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ranking::new(order)
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.order {
            if !first {
                write!(f, ">")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        Ok(())
    }
}

/// All unordered pairs of `0..m` in lexicographic order, each exactly once.
pub fn pairs(m: usize) -> Vec<(AltId, AltId)> {
    let mut out = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            out.push((a, b));
        }
    }
    out
}

/// What a voter reports as their own answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoteKind {
    Top,
    Rank,
}

/// What a voter reports as a prediction of other voters' answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictionKind {
    None,
    Top,
    Rank,
}

/// One of the six elicitation formats: vote kind crossed with prediction kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElicitationFormat {
    pub vote: VoteKind,
    pub prediction: PredictionKind,
}

impl ElicitationFormat {
    pub const TOP_NONE: Self = Self::new(VoteKind::Top, PredictionKind::None);
    pub const TOP_TOP: Self = Self::new(VoteKind::Top, PredictionKind::Top);
    pub const TOP_RANK: Self = Self::new(VoteKind::Top, PredictionKind::Rank);
    pub const RANK_NONE: Self = Self::new(VoteKind::Rank, PredictionKind::None);
    pub const RANK_TOP: Self = Self::new(VoteKind::Rank, PredictionKind::Top);
    pub const RANK_RANK: Self = Self::new(VoteKind::Rank, PredictionKind::Rank);

    /// All six formats in a fixed reporting order.
    pub const ALL: [Self; 6] = [
        Self::TOP_NONE,
        Self::TOP_TOP,
        Self::TOP_RANK,
        Self::RANK_NONE,
        Self::RANK_TOP,
        Self::RANK_RANK,
    ];

    const fn new(vote: VoteKind, prediction: PredictionKind) -> Self {
        ElicitationFormat { vote, prediction }
    }

    /// Stable wire token, e.g. `"rank-top"`.
    pub fn token(&self) -> &'static str {
        match (self.vote, self.prediction) {
            (VoteKind::Top, PredictionKind::None) => "top-none",
            (VoteKind::Top, PredictionKind::Top) => "top-top",
            (VoteKind::Top, PredictionKind::Rank) => "top-rank",
            (VoteKind::Rank, PredictionKind::None) => "rank-none",
            (VoteKind::Rank, PredictionKind::Top) => "rank-top",
            (VoteKind::Rank, PredictionKind::Rank) => "rank-rank",
        }
    }
}

impl fmt::Display for ElicitationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ElicitationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ElicitationFormat::ALL
            .into_iter()
            .find(|f| f.token() == s)
            .ok_or_else(|| Error::UnknownFormat(s.to_string()))
    }
}

/// A voter's own answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VoteReport {
    TopChoice(AltId),
    FullRanking(Ranking),
}

impl VoteReport {
    pub fn kind(&self) -> VoteKind {
        match self {
            VoteReport::TopChoice(_) => VoteKind::Top,
            VoteReport::FullRanking(_) => VoteKind::Rank,
        }
    }

    /// The alternative this vote puts first.
    pub fn top(&self) -> AltId {
        match self {
            VoteReport::TopChoice(a) => *a,
            VoteReport::FullRanking(r) => r.top(),
        }
    }
}

/// A voter's prediction about the other voters' answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictionReport {
    Absent,
    TopChoice(AltId),
    FullRanking(Ranking),
}

impl PredictionReport {
    pub fn kind(&self) -> PredictionKind {
        match self {
            PredictionReport::Absent => PredictionKind::None,
            PredictionReport::TopChoice(_) => PredictionKind::Top,
            PredictionReport::FullRanking(_) => PredictionKind::Rank,
        }
    }
}

/// One voter's submission for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRecord {
    pub question_id: String,
    pub voter_id: String,
    pub format: ElicitationFormat,
    pub vote: VoteReport,
    pub prediction: PredictionReport,
}

impl ResponseRecord {
    /// Checks format/payload agreement and id bounds against `question`.
    pub fn validate(&self, question: &Question) -> Result<()> {
        let m = question.m();
        if self.vote.kind() != self.format.vote || self.prediction.kind() != self.format.prediction
        {
            return Err(Error::FormatMismatch {
                voter: self.voter_id.clone(),
                format: self.format.token().to_string(),
            });
        }
        let check_id = |a: AltId| {
            if a < m {
                Ok(())
            } else {
                Err(Error::UnknownAlternative { id: a, m })
            }
        };
        let check_ranking = |r: &Ranking| {
            if r.len() == m {
                Ok(())
            } else {
                Err(Error::LengthMismatch(r.len(), m))
            }
        };
        match &self.vote {
            VoteReport::TopChoice(a) => check_id(*a)?,
            VoteReport::FullRanking(r) => check_ranking(r)?,
        }
        match &self.prediction {
            PredictionReport::Absent => {}
            PredictionReport::TopChoice(a) => check_id(*a)?,
            PredictionReport::FullRanking(r) => check_ranking(r)?,
        }
        Ok(())
    }
}

/// A question: id, domain tag, alternatives, and optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Question {
    pub question_id: String,
    pub domain: String,
    pub alternatives: Vec<Alternative>,
    pub ground_truth: Option<Ranking>,
}

impl Question {
    pub fn new(
        question_id: impl Into<String>,
        domain: impl Into<String>,
        alternatives: Vec<Alternative>,
        ground_truth: Option<Ranking>,
    ) -> Result<Self> {
        let m = alternatives.len();
        if m < 2 {
            return Err(Error::TooFewAlternatives(m));
        }
        for (pos, alt) in alternatives.iter().enumerate() {
            if alt.id != pos {
                return Err(Error::NonCanonicalIds { got: alt.id, pos });
            }
        }
        if let Some(truth) = &ground_truth {
            if truth.len() != m {
                return Err(Error::LengthMismatch(truth.len(), m));
            }
        }
        Ok(Question {
            question_id: question_id.into(),
            domain: domain.into(),
            alternatives,
            ground_truth,
        })
    }

    /// Convenience constructor from bare labels; ids follow list order.
    pub fn from_labels(
        question_id: impl Into<String>,
        domain: impl Into<String>,
        labels: &[&str],
        ground_truth: Option<Ranking>,
    ) -> Result<Self> {
        let alternatives = labels
            .iter()
            .enumerate()
            .map(|(id, label)| Alternative {
                id,
                label: (*label).to_string(),
            })
            .collect();
        Question::new(question_id, domain, alternatives, ground_truth)
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    /// All unordered alternative pairs, lexicographic.
    pub fn pairs(&self) -> Vec<(AltId, AltId)> {
        pairs(self.m())
    }
}

/// A question together with the responses collected for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    pub question: Question,
    pub responses: Vec<ResponseRecord>,
}

impl Election {
    /// Validates that responses are nonempty, reference `question`, and are
    /// internally consistent.
    pub fn new(question: Question, responses: Vec<ResponseRecord>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::EmptyElection);
        }
        for r in &responses {
            if r.question_id != question.question_id {
                return Err(Error::ForeignResponse {
                    voter: r.voter_id.clone(),
                    expected: question.question_id.clone(),
                    found: r.question_id.clone(),
                });
            }
            r.validate(&question)?;
        }
        Ok(Election {
            question,
            responses,
        })
    }

    /// The single format used, or `None` when responses mix formats.
    pub fn uniform_format(&self) -> Option<ElicitationFormat> {
        let first = self.responses.first()?.format;
        self.responses
            .iter()
            .all(|r| r.format == first)
            .then_some(first)
    }

    /// Splits responses into per-format elections, fixed format order.
    pub fn split_by_format(&self) -> Vec<(ElicitationFormat, Election)> {
        ElicitationFormat::ALL
            .into_iter()
            .filter_map(|f| {
                let responses: Vec<_> = self
                    .responses
                    .iter()
                    .filter(|r| r.format == f)
                    .cloned()
                    .collect();
                if responses.is_empty() {
                    None
                } else {
                    Some((
                        f,
                        Election {
                            question: self.question.clone(),
                            responses,
                        },
                    ))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranking_rejects_non_permutations() {
        assert!(Ranking::new(vec![]).is_err());
        assert!(Ranking::new(vec![0, 0]).is_err());
        assert!(Ranking::new(vec![0, 2]).is_err());
        assert!(Ranking::new(vec![1, 2, 3]).is_err());
        assert!(Ranking::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn prefers_is_positional() {
        let r = Ranking::new(vec![2, 0, 1]).unwrap();
        assert!(r.prefers(2, 0).unwrap());
        assert!(r.prefers(0, 1).unwrap());
        assert!(!r.prefers(1, 2).unwrap());
        assert_eq!(r.top(), 2);
    }

    #[test]
    fn prefers_errors_on_missing_or_equal_ids() {
        let r = Ranking::new(vec![0, 1]).unwrap();
        assert!(matches!(
            r.prefers(0, 5),
            Err(Error::UnknownAlternative { id: 5, m: 2 })
        ));
        assert!(matches!(r.prefers(1, 1), Err(Error::DegeneratePair(1, 1))));
    }

    #[test]
    fn pairs_are_lexicographic_and_complete() {
        assert_eq!(pairs(2), vec![(0, 1)]);
        assert_eq!(
            pairs(4),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(pairs(6).len(), 15);
    }

    #[test]
    fn format_tokens_round_trip() {
        for f in ElicitationFormat::ALL {
            assert_eq!(f.token().parse::<ElicitationFormat>().unwrap(), f);
        }
        assert!("rank-full".parse::<ElicitationFormat>().is_err());
    }

    #[test]
    fn minimal_two_alternative_question() {
        let q = Question::from_labels("q1", "d", &["a", "b"], Some(Ranking::identity(2))).unwrap();
        assert_eq!(q.m(), 2);
        assert_eq!(q.pairs(), vec![(0, 1)]);
        assert!(Question::from_labels("q2", "d", &["solo"], None).is_err());
    }

    #[test]
    fn question_requires_truth_length_to_match() {
        let err = Question::from_labels("q", "d", &["a", "b", "c"], Some(Ranking::identity(2)));
        assert!(matches!(err, Err(Error::LengthMismatch(2, 3))));
    }

    fn response(voter: &str, format: ElicitationFormat, vote: VoteReport) -> ResponseRecord {
        ResponseRecord {
            question_id: "q".into(),
            voter_id: voter.into(),
            format,
            vote,
            prediction: PredictionReport::Absent,
        }
    }

    #[test]
    fn election_rejects_foreign_and_malformed_responses() {
        let q = Question::from_labels("q", "d", &["a", "b"], None).unwrap();
        let ok = response("v1", ElicitationFormat::TOP_NONE, VoteReport::TopChoice(1));
        assert!(Election::new(q.clone(), vec![ok.clone()]).is_ok());
        assert!(matches!(
            Election::new(q.clone(), vec![]),
            Err(Error::EmptyElection)
        ));

        let mut foreign = ok.clone();
        foreign.question_id = "other".into();
        assert!(Election::new(q.clone(), vec![foreign]).is_err());

        let out_of_range = response("v2", ElicitationFormat::TOP_NONE, VoteReport::TopChoice(7));
        assert!(Election::new(q.clone(), vec![out_of_range]).is_err());

        // Declared format says rank vote, payload is a top choice.
        let mismatched = response("v3", ElicitationFormat::RANK_NONE, VoteReport::TopChoice(0));
        assert!(matches!(
            Election::new(q, vec![mismatched]),
            Err(Error::FormatMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn prefers_is_antisymmetric(order in proptest::sample::subsequence((0..8usize).collect::<Vec<_>>(), 2..8)) {
            // Subsequence of 0..8 relabeled to a dense permutation, then shuffled by reversal mix.
            let m = order.len();
            let mut perm: Vec<usize> = (0..m).collect();
            perm.rotate_left(order[0] % m);
            let r = Ranking::new(perm).unwrap();
            for a in 0..m {
                for b in 0..m {
                    if a != b {
                        prop_assert_ne!(r.prefers(a, b).unwrap(), r.prefers(b, a).unwrap());
                    }
                }
            }
        }
    }
}
