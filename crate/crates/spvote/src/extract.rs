//! Reduction of ordinal ballots to per-pair binary reports.
//!
//! For a pair `(a, b)` each response collapses to a binary vote (`true` means
//! `a` over `b`) plus a cardinal prediction of how often other voters prefer
//! `a`. Ordinal predictions carry direction but no magnitude, so magnitudes
//! are imputed from two calibration parameters: `alpha` is the predicted
//! support a voter implies when their prediction agrees with their own vote on
//! the pair, `beta` when a vote against the pair winner comes with an agreeing
//! prediction. Disagreeing predictions mirror to `1 - alpha` / `1 - beta`, and
//! top predictions naming neither alternative impute the uninformative 0.5.

use crate::error::{Error, Result};
use crate::model::{AltId, Election, PredictionKind, PredictionReport, VoteReport};

/// Imputation parameters for ordinal predictions.
///
/// Requires `0.5 < alpha < 1` and `0 < beta < 0.5`, which keeps every imputed
/// prediction strictly inside `(0, 1)` and oriented the right way: agreement
/// with one's own vote implies predicted support above one half for that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionParams {
    alpha: f64,
    beta: f64,
}

impl ExtractionParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = alpha > 0.5 && alpha < 1.0 && beta > 0.0 && beta < 0.5;
        if !ok || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams { alpha, beta });
        }
        Ok(ExtractionParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// One voter's contribution to a pair: binary vote plus cardinal prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseReport {
    pub voter_id: String,
    /// `true` iff the voter puts the pair's first alternative above the second.
    pub vote: bool,
    /// Predicted frequency of votes for the first alternative, in `(0, 1)`.
    pub prediction: f64,
    /// `false` when the format elicits no prediction and 0.5 was imputed.
    pub has_prediction: bool,
}

fn check_pair(a: AltId, b: AltId) -> Result<()> {
    if a == b {
        return Err(Error::DegeneratePair(a, b));
    }
    Ok(())
}

/// Projects a vote onto `pair`; `None` discards the voter (top choice outside
/// the pair). Full rankings always project.
pub fn extract_pair_vote(vote: &VoteReport, pair: (AltId, AltId)) -> Result<Option<bool>> {
    let (a, b) = pair;
    check_pair(a, b)?;
    match vote {
        VoteReport::FullRanking(r) => Ok(Some(r.prefers(a, b)?)),
        VoteReport::TopChoice(c) if *c == a => Ok(Some(true)),
        VoteReport::TopChoice(c) if *c == b => Ok(Some(false)),
        VoteReport::TopChoice(_) => Ok(None),
    }
}

/// Imputes the cardinal prediction for `pair` given the voter's projected
/// vote. Absent predictions are a contract violation here; prediction-free
/// formats must be routed to the fallback aggregators instead.
pub fn extract_pair_prediction(
    prediction: &PredictionReport,
    vote: bool,
    pair: (AltId, AltId),
    params: ExtractionParams,
) -> Result<f64> {
    let (a, b) = pair;
    check_pair(a, b)?;
    let (alpha, beta) = (params.alpha, params.beta);
    // `Some(true)` reads "the prediction puts a above b"; `None` means the
    // prediction names neither alternative.
    let predicted_first: Option<bool> = match prediction {
        PredictionReport::Absent => return Err(Error::AbsentPrediction),
        PredictionReport::FullRanking(r) => Some(r.prefers(a, b)?),
        PredictionReport::TopChoice(c) if *c == a => Some(true),
        PredictionReport::TopChoice(c) if *c == b => Some(false),
        PredictionReport::TopChoice(_) => None,
    };
    Ok(match (predicted_first, vote) {
        (Some(true), true) => alpha,
        (Some(false), true) => 1.0 - alpha,
        (Some(true), false) => 1.0 - beta,
        (Some(false), false) => beta,
        (None, _) => 0.5,
    })
}

/// Extracts the pairwise reports of every non-discarded voter in `election`.
///
/// Prediction-free responses are kept with an imputed 0.5 and flagged so
/// callers can engage fallbacks; the result may be empty when every top vote
/// named neither alternative.
pub fn extract_reports(
    election: &Election,
    pair: (AltId, AltId),
    params: ExtractionParams,
) -> Result<Vec<PairwiseReport>> {
    let (a, b) = pair;
    check_pair(a, b)?;
    let m = election.question.m();
    for id in [a, b] {
        if id >= m {
            return Err(Error::UnknownAlternative { id, m });
        }
    }
    let mut out = Vec::with_capacity(election.responses.len());
    for resp in &election.responses {
        let Some(vote) = extract_pair_vote(&resp.vote, pair)? else {
            continue;
        };
        let (prediction, has_prediction) = match resp.format.prediction {
            PredictionKind::None => (0.5, false),
            _ => (
                extract_pair_prediction(&resp.prediction, vote, pair, params)?,
                true,
            ),
        };
        out.push(PairwiseReport {
            voter_id: resp.voter_id.clone(),
            vote,
            prediction,
            has_prediction,
        });
    }
    Ok(out)
}
