//! Grid search must recover planted imputation parameters.
//!
//! Construction: two-alternative questions where every voter reports a top
//! choice and a top prediction. Writing o = n1/n0 for the vote odds, the
//! pairwise verdict reduces to a threshold test on the imputed values:
//!
//! * all voters predict the first alternative ("one-sided" pattern, the
//!   classic case where the minority knows it is the minority):
//!   g11 = alpha, g10 = 1 - beta, and the second alternative wins iff
//!   (1 - beta) / (1 - alpha) > o;
//! * every voter predicts their own choice ("self-assured" pattern):
//!   g11 = alpha, g10 = beta, and the second alternative wins iff
//!   beta / (1 - alpha) > o.
//!
//! Four questions whose odds straddle those thresholds at ratios 3.4/3.6 and
//! 1.4/1.6 are all answered correctly only when
//! (1 - beta)/(1 - alpha) is in (3.4, 3.6) and beta/(1 - alpha) is in
//! (1.4, 1.6). Summing, 1/(1 - alpha) must lie in (4.8, 5.2): on the default
//! 0.025 grid that forces alpha = 0.8 and then beta = 0.3. No other cell can
//! reach zero loss, even with lucky tie coins, because the nearest
//! boundary-exact cells fail one of the other questions outright.

use spvote::calib::{grid_search, GridSpec, LossKind};
use spvote::model::{
    Election, ElicitationFormat, PredictionReport, Question, Ranking, ResponseRecord, VoteReport,
};

/// A two-alternative election: `n1` voters pick the first alternative, `n0`
/// the second, truth given by `truth_first`. `predict_first_only` selects the
/// one-sided pattern; otherwise everyone predicts their own choice.
fn pair_question(
    qid: &str,
    n1: usize,
    n0: usize,
    truth_first: bool,
    predict_first_only: bool,
) -> Election {
    let truth = if truth_first {
        Ranking::new(vec![0, 1]).unwrap()
    } else {
        Ranking::new(vec![1, 0]).unwrap()
    };
    let q = Question::from_labels(qid, "synthetic", &["a", "b"], Some(truth)).unwrap();
    let mut responses = Vec::new();
    for i in 0..(n1 + n0) {
        let own = if i < n1 { 0 } else { 1 };
        let predicted = if predict_first_only { 0 } else { own };
        responses.push(ResponseRecord {
            question_id: qid.to_string(),
            voter_id: format!("v{i:03}"),
            format: ElicitationFormat::TOP_TOP,
            vote: VoteReport::TopChoice(own),
            prediction: PredictionReport::TopChoice(predicted),
        });
    }
    Election::new(q, responses).unwrap()
}

#[test]
fn default_grid_recovers_the_planted_cell() {
    let train = vec![
        // One-sided pattern, odds 17/5 = 3.4, truth second:
        // correct iff (1 - beta)/(1 - alpha) > 3.4.
        pair_question("d-lo", 17, 5, false, true),
        // One-sided pattern, odds 18/5 = 3.6, truth first:
        // correct iff (1 - beta)/(1 - alpha) < 3.6.
        pair_question("d-hi", 18, 5, true, true),
        // Self-assured pattern, odds 7/5 = 1.4, truth second:
        // correct iff beta/(1 - alpha) > 1.4.
        pair_question("a-lo", 7, 5, false, false),
        // Self-assured pattern, odds 8/5 = 1.6, truth first:
        // correct iff beta/(1 - alpha) < 1.6.
        pair_question("a-hi", 8, 5, true, false),
    ];

    let grid = GridSpec::default();
    let result = grid_search(
        &train,
        ElicitationFormat::TOP_TOP,
        &grid,
        LossKind::MseKt,
        20260819,
    )
    .unwrap();

    assert!((result.best.alpha() - 0.8).abs() < 1e-12, "alpha {}", result.best.alpha());
    assert!((result.best.beta() - 0.3).abs() < 1e-12, "beta {}", result.best.beta());
    assert_eq!(result.best_loss, 0.0);

    // The planted cell is the unique zero of the surface; every other cell
    // misdecides at least one question, costing at least 1/4 in mean loss.
    let zeros = result.surface.iter().filter(|c| c.loss == 0.0).count();
    assert_eq!(zeros, 1);
    let second_best = result
        .surface
        .iter()
        .map(|c| c.loss)
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    assert!(second_best >= 0.25 - 1e-12, "second best {second_best}");
    assert_eq!(result.surface.len(), 289);

    // The recovery is seed-independent: tie coins never decide the argmin.
    let again = grid_search(
        &train,
        ElicitationFormat::TOP_TOP,
        &grid,
        LossKind::MseKt,
        7,
    )
    .unwrap();
    assert_eq!(again.best, result.best);
}

#[test]
fn recovery_holds_under_the_top_selection_loss() {
    // With m = 2 the top errs exactly when the pair is misdecided, so the
    // same construction identifies the same cell under mse_top.
    let train = vec![
        pair_question("d-lo", 17, 5, false, true),
        pair_question("d-hi", 18, 5, true, true),
        pair_question("a-lo", 7, 5, false, false),
        pair_question("a-hi", 8, 5, true, false),
    ];
    let result = grid_search(
        &train,
        ElicitationFormat::TOP_TOP,
        &GridSpec::default(),
        LossKind::MseTop,
        20260819,
    )
    .unwrap();
    assert!((result.best.alpha() - 0.8).abs() < 1e-12);
    assert!((result.best.beta() - 0.3).abs() < 1e-12);
    assert_eq!(result.best_loss, 0.0);
}
