//! Surprisingly-popular aggregation for ranked votes.
//!
//! Voters report a vote (their top choice or a full ranking) and optionally a
//! prediction of what others will answer. Each question is reduced to its
//! alternative pairs; votes project onto each pair and ordinal predictions are
//! imputed as calibrated agreement probabilities. A pair is then decided by
//! comparing prediction-normalized support, which recovers answers a majority
//! gets wrong whenever a knowledgeable minority anticipates the majority
//! error. Pair verdicts assemble into a tournament from which winners and
//! rankings are read off.
//!
//! The crate also ships the surrounding experiment apparatus: classical
//! baseline rules, generative world models for simulation, parameter
//! calibration by grid search, and tournament scoring utilities. Every random
//! choice flows from explicit seeds, so identical inputs give identical
//! outputs.

pub mod aggregate;
pub mod baselines;
pub mod bayes;
pub mod calib;
pub mod error;
pub mod extract;
pub mod model;
pub mod seed;
pub mod tournament;

pub use aggregate::{
    aggregate_auto, aggregate_election, fallback_rank_none, fallback_top_none,
    sp_election_decisions, sp_pair_decision, ElectionDecisions, PairDecision, PairOutcome, SpMode,
    Tournament,
};
pub use baselines::{
    baseline_kt, baseline_top_error, groups_by_score_desc, winner_distribution, Profile,
    VotingRule,
};
pub use bayes::{adversarial_world, generate_election, WorldModel, MAX_ALTERNATIVES};
pub use calib::{grid_search, split_train_test, CalibResult, GridCell, GridSpec, LossKind};
pub use error::{Error, Result};
pub use extract::{extract_pair_prediction, extract_pair_vote, extract_reports, ExtractionParams};
pub use model::{
    AltId, Alternative, Election, ElicitationFormat, PredictionKind, PredictionReport, Question,
    Ranking, ResponseRecord, VoteKind, VoteReport,
};
pub use tournament::{
    copeland_scores, expected_kt_of_groups, kt_distance, ranking_kt, sample_top, select_top,
    top_error, TopSelection,
};
