//! Experiment orchestration: data loading or simulation, per-format
//! calibration, aggregation, and metric collection.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use spvote::aggregate::aggregate_auto;
use spvote::baselines::Profile;
use spvote::bayes::{adversarial_world, generate_election, WorldModel};
use spvote::calib::{grid_search, split_train_test};
use spvote::extract::ExtractionParams;
use spvote::model::{Election, ElicitationFormat, PredictionKind, Question, Ranking, VoteKind};
use spvote::seed;

use crate::config::{DataSource, ExperimentConfig, WorldKind, WorldSpec};
use crate::error::{CliError, Result};
use crate::io;
use crate::metrics::{
    baseline_errors, prediction_errors, question_mean, sp_errors, vote_kts, vote_top_errors,
    QuestionRow, Samples, SummaryRow,
};

/// One calibration outcome row.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibRow {
    pub format: String,
    pub alpha: f64,
    pub beta: f64,
    pub loss: f64,
    pub train_questions: usize,
}

/// Everything a run produces besides files.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub summary: Vec<SummaryRow>,
    pub raw: Vec<QuestionRow>,
    pub calib: Vec<CalibRow>,
    /// Per-format failures; the run continues past them and reports partial
    /// results plus this manifest.
    pub failures: Vec<String>,
    pub rows_read: usize,
    pub rows_skipped: usize,
}

/// Builds the generative world for a spec.
pub fn build_world(spec: &WorldSpec) -> Result<WorldModel> {
    Ok(match spec.kind {
        WorldKind::Mallows => WorldModel::mallows(spec.m, spec.phi, None)?,
        WorldKind::Adversarial => adversarial_world(spec.p_high, spec.p_low)?,
    })
}

fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Draws a ground truth for one simulated question: from the world prior for
/// Mallows worlds, the designed planted truth for adversarial ones.
pub fn simulated_truth(spec: &WorldSpec, world: &WorldModel, qid: &str, base_seed: u64) -> Ranking {
    match spec.kind {
        WorldKind::Mallows => {
            let mut rng = seed::rng(base_seed, &["truth", qid]);
            world.rankings()[sample_index(world.prior(), &mut rng)].clone()
        }
        // The adversarial construction plants the less-popular-looking
        // ranking as truth; that is the whole point of the world.
        WorldKind::Adversarial => Ranking::new(vec![1, 0]).expect("two alternatives"),
    }
}

/// Simulates questions and one election per (question, format).
pub fn simulate_data(
    spec: &WorldSpec,
    formats: &[ElicitationFormat],
    base_seed: u64,
) -> Result<(Vec<Question>, Vec<Election>)> {
    let world = build_world(spec)?;
    let mut questions = Vec::with_capacity(spec.n_questions);
    let mut elections = Vec::with_capacity(spec.n_questions * formats.len());
    for qi in 0..spec.n_questions {
        let qid = format!("q{qi:04}");
        let domain = format!("d{}", qi % spec.domains);
        let truth = simulated_truth(spec, &world, &qid, base_seed);
        for (fi, format) in formats.iter().enumerate() {
            let e = generate_election(
                &world, &qid, &domain, &truth, *format, spec.voters, spec.noise, base_seed,
            )?;
            if fi == 0 {
                questions.push(e.question.clone());
            }
            elections.push(e);
        }
    }
    Ok((questions, elections))
}

/// Loads or simulates the run's data; elections are uniform-format and
/// restricted to the configured formats.
pub fn load_data(
    config: &ExperimentConfig,
    strict: bool,
) -> Result<(Vec<Question>, Vec<Election>, usize, usize)> {
    match &config.source {
        DataSource::World(spec) => {
            let (questions, elections) = simulate_data(spec, &config.formats, config.seed)?;
            Ok((questions, elections, 0, 0))
        }
        DataSource::Files {
            responses,
            questions,
        } => {
            let qs = io::read_questions(questions)?;
            let report = io::read_responses(responses, &qs, strict)?;
            let wanted: Vec<Election> = report
                .elections
                .into_iter()
                .filter(|e| {
                    e.uniform_format()
                        .map(|f| config.formats.contains(&f))
                        .unwrap_or(false)
                })
                .collect();
            Ok((qs, wanted, report.rows_read, report.skipped.len()))
        }
    }
}

struct FormatSlice<'a> {
    format: ElicitationFormat,
    train: Vec<&'a Election>,
    test: Vec<&'a Election>,
}

fn slice_format<'a>(
    elections: &'a [Election],
    format: ElicitationFormat,
    train_ids: &HashSet<&str>,
    calibrating: bool,
) -> FormatSlice<'a> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for e in elections {
        if e.uniform_format() != Some(format) {
            continue;
        }
        if calibrating && train_ids.contains(e.question.question_id.as_str()) {
            train.push(e);
        } else {
            test.push(e);
        }
    }
    FormatSlice {
        format,
        train,
        test,
    }
}

fn run_slice(
    config: &ExperimentConfig,
    slice: &FormatSlice<'_>,
    samples: &mut Samples,
    out: &mut RunOutput,
) -> Result<()> {
    let token = slice.format.token();
    let params = if config.grid.is_some() && slice.format.prediction != PredictionKind::None {
        let grid = config.grid.as_ref().unwrap();
        let train: Vec<Election> = slice.train.iter().map(|e| (*e).clone()).collect();
        if train.is_empty() {
            return Err(CliError::validation(format!(
                "format {token}: calibration requested but no training elections"
            )));
        }
        let result = grid_search(&train, slice.format, grid, config.loss, config.seed)?;
        out.calib.push(CalibRow {
            format: token.to_string(),
            alpha: result.best.alpha(),
            beta: result.best.beta(),
            loss: result.best_loss,
            train_questions: result.train_question_ids.len(),
        });
        result.best
    } else {
        ExtractionParams::new(config.alpha, config.beta)?
    };

    for e in &slice.test {
        let qid = e.question.question_id.clone();
        let domain = e.question.domain.clone();
        let mut raw = |metric: &str, value: f64| {
            out.raw.push(QuestionRow {
                question_id: qid.clone(),
                format: token.to_string(),
                domain: domain.clone(),
                metric: metric.to_string(),
                value,
            });
        };

        // Prediction metrics never need ground truth.
        let (pred_tops, pred_kts) = prediction_errors(e, config.metric_mode, config.seed)?;
        for v in &pred_tops {
            samples.push("pred_top_error", token, &domain, *v);
        }
        for v in &pred_kts {
            samples.push("pred_kt", token, &domain, *v);
        }
        if let Some(mean) = question_mean(&pred_tops) {
            raw("pred_top_error", mean);
        }
        if let Some(mean) = question_mean(&pred_kts) {
            raw("pred_kt", mean);
        }

        let truth = match &e.question.ground_truth {
            Some(t) => t,
            None => continue,
        };

        let tops = vote_top_errors(e, truth);
        for v in &tops {
            samples.push("vote_top_error", token, &domain, *v);
        }
        raw("vote_top_error", question_mean(&tops).expect("nonempty election"));
        let kts = vote_kts(e, truth)?;
        for v in &kts {
            samples.push("vote_kt", token, &domain, *v);
        }
        if let Some(mean) = question_mean(&kts) {
            raw("vote_kt", mean);
        }

        let tournament = aggregate_auto(e, params, config.seed)?;
        let (sp_top, sp_kt) = sp_errors(&tournament, truth, &qid, config.metric_mode, config.seed)?;
        samples.push("sp_top_error", token, &domain, sp_top);
        samples.push("sp_kt", token, &domain, sp_kt);
        raw("sp_top_error", sp_top);
        raw("sp_kt", sp_kt);

        if slice.format.vote == VoteKind::Rank {
            let profile = Profile::from_election(e)?;
            for (rule, top, kt) in baseline_errors(&profile, truth)? {
                let top_name = format!("base_{rule}_top_error");
                let kt_name = format!("base_{rule}_kt");
                samples.push(&top_name, token, &domain, top);
                samples.push(&kt_name, token, &domain, kt);
                raw(&top_name, top);
                raw(&kt_name, kt);
            }
        }
    }
    Ok(())
}

/// Runs the full experiment: load or simulate, split and calibrate per
/// format when a grid is configured, aggregate the test slice, and score
/// votes, predictions, SP output, and baselines.
///
/// A failing format is recorded in `failures` and the run continues, so the
/// report carries partial results plus the failure manifest.
pub fn run_experiment(config: &ExperimentConfig, strict: bool) -> Result<RunOutput> {
    let (questions, elections, rows_read, rows_skipped) = load_data(config, strict)?;
    let mut out = RunOutput {
        rows_read,
        rows_skipped,
        ..RunOutput::default()
    };

    let train_ids: HashSet<&str> = if config.grid.is_some() {
        let by_id: BTreeMap<&str, &Question> = questions
            .iter()
            .map(|q| (q.question_id.as_str(), q))
            .collect();
        let (train, _) = split_train_test(&questions, config.train_per_domain, config.seed)?;
        train
            .into_iter()
            .map(|id| by_id[id.as_str()].question_id.as_str())
            .collect()
    } else {
        HashSet::new()
    };

    let mut samples = Samples::default();
    for format in &config.formats {
        let slice = slice_format(&elections, *format, &train_ids, config.grid.is_some());
        if slice.train.is_empty() && slice.test.is_empty() {
            out.failures
                .push(format!("{}: no elections carry this format", format.token()));
            continue;
        }
        if let Err(e) = run_slice(config, &slice, &mut samples, &mut out) {
            out.failures.push(format!("{}: {e}", format.token()));
        }
    }
    out.summary = samples.summary();
    Ok(out)
}
