//! Grid calibration of the two prediction-imputation parameters.
//!
//! The imputed magnitudes `alpha` and `beta` are not identified by theory, so
//! they are fit by exhaustive grid search against labeled training questions:
//! every cell is evaluated by aggregating each training election with those
//! parameters and scoring the result against ground truth. Ties prefer the
//! lexicographically smallest `(alpha, beta)`.

use std::collections::BTreeMap;

use crate::aggregate::aggregate_auto;
use crate::error::{Error, Result};
use crate::extract::ExtractionParams;
use crate::model::{Election, ElicitationFormat, Question};
use crate::seed;
use crate::tournament::{kt_distance, top_error};

/// Inclusive axis-aligned grid over `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
}

impl Default for GridSpec {
    /// The standard search range: alpha 0.55..=0.95, beta 0.05..=0.45, both
    /// in steps of 0.025 (17 x 17 = 289 cells).
    fn default() -> Self {
        GridSpec {
            alpha_min: 0.55,
            alpha_max: 0.95,
            alpha_step: 0.025,
            beta_min: 0.05,
            beta_max: 0.45,
            beta_step: 0.025,
        }
    }
}

fn axis(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || max < min {
        return Err(Error::EmptyGrid(format!(
            "axis [{min}, {max}] with step {step}"
        )));
    }
    // Integer stepping avoids drift from repeated addition.
    let count = ((max - min) / step).round() as usize + 1;
    let values: Vec<f64> = (0..count).map(|i| min + i as f64 * step).collect();
    if values.last().copied().unwrap_or(f64::NAN) > max + 1e-9 {
        return Err(Error::EmptyGrid(format!(
            "step {step} does not fit [{min}, {max}]"
        )));
    }
    Ok(values)
}

impl GridSpec {
    pub fn alphas(&self) -> Result<Vec<f64>> {
        axis(self.alpha_min, self.alpha_max, self.alpha_step)
    }

    pub fn betas(&self) -> Result<Vec<f64>> {
        axis(self.beta_min, self.beta_max, self.beta_step)
    }

    /// All `(alpha, beta)` cells, alpha-major, each a valid parameter pair.
    pub fn cells(&self) -> Result<Vec<ExtractionParams>> {
        let mut out = Vec::new();
        for &alpha in &self.alphas()? {
            for &beta in &self.betas()? {
                out.push(ExtractionParams::new(alpha, beta)?);
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid("no cells".into()));
        }
        Ok(out)
    }
}

/// Loss assigned to one aggregated question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    /// Squared Kendall tau distance to truth (the default).
    #[default]
    MseKt,
    /// Squared top-selection error.
    MseTop,
    /// Fraction of pairs directed against truth.
    Pairwise01,
}

impl LossKind {
    pub fn token(&self) -> &'static str {
        match self {
            LossKind::MseKt => "mse_kt",
            LossKind::MseTop => "mse_top",
            LossKind::Pairwise01 => "pairwise01",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mse_kt" => Ok(LossKind::MseKt),
            "mse_top" => Ok(LossKind::MseTop),
            "pairwise01" => Ok(LossKind::Pairwise01),
            _ => Err(Error::Invalid(format!("unknown loss {s:?}"))),
        }
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    pub loss: f64,
}

/// Outcome of a grid search for one format.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibResult {
    pub format: ElicitationFormat,
    pub best: ExtractionParams,
    pub best_loss: f64,
    /// Every cell in alpha-major order.
    pub surface: Vec<GridCell>,
    pub train_question_ids: Vec<String>,
}

fn format_slice(election: &Election, format: ElicitationFormat) -> Option<Election> {
    let responses: Vec<_> = election
        .responses
        .iter()
        .filter(|r| r.format == format)
        .cloned()
        .collect();
    if responses.is_empty() {
        return None;
    }
    Some(Election {
        question: election.question.clone(),
        responses,
    })
}

/// Aggregates `election` with `params` and scores it against its ground
/// truth.
pub fn question_loss(
    election: &Election,
    params: ExtractionParams,
    loss: LossKind,
    seed: u64,
) -> Result<f64> {
    let truth = election.question.ground_truth.as_ref().ok_or_else(|| {
        Error::Invalid(format!(
            "question {} has no ground truth to score against",
            election.question.question_id
        ))
    })?;
    let t = aggregate_auto(election, params, seed)?;
    Ok(match loss {
        LossKind::MseKt => {
            let kt = kt_distance(&t, truth)? as f64;
            kt * kt
        }
        LossKind::MseTop => {
            let e = top_error(&t, truth)?;
            e * e
        }
        LossKind::Pairwise01 => {
            let m = election.question.m();
            kt_distance(&t, truth)? as f64 / (m * (m - 1) / 2) as f64
        }
    })
}

/// Exhaustive grid search over `grid`, scoring each cell as the mean
/// [`question_loss`] across the train elections' `format` slices.
///
/// The same `seed` flows into every cell so tie-break coins cannot favor one
/// cell over another; loss ties prefer the smallest `(alpha, beta)`.
pub fn grid_search(
    train: &[Election],
    format: ElicitationFormat,
    grid: &GridSpec,
    loss: LossKind,
    seed: u64,
) -> Result<CalibResult> {
    let slices: Vec<Election> = train
        .iter()
        .filter_map(|e| format_slice(e, format))
        .collect();
    if slices.is_empty() {
        return Err(Error::Invalid(format!(
            "no training elections carry format {format}"
        )));
    }
    let cells = grid.cells()?;
    let mut surface = Vec::with_capacity(cells.len());
    let mut best: Option<(ExtractionParams, f64)> = None;
    for params in cells {
        let mut total = 0.0;
        for e in &slices {
            total += question_loss(e, params, loss, seed)?;
        }
        let mean = total / slices.len() as f64;
        surface.push(GridCell {
            alpha: params.alpha(),
            beta: params.beta(),
            loss: mean,
        });
        // Strict improvement only: earlier cells win ties, and cells iterate
        // in ascending (alpha, beta) order.
        if best.map_or(true, |(_, b)| mean < b) {
            best = Some((params, mean));
        }
    }
    let (best, best_loss) = best.expect("grid has at least one cell");
    Ok(CalibResult {
        format,
        best,
        best_loss,
        surface,
        train_question_ids: slices
            .iter()
            .map(|e| e.question.question_id.clone())
            .collect(),
    })
}

/// Splits questions into per-domain train/test sets: within each domain the
/// question ids are sorted, shuffled by a domain-specific stream of `seed`,
/// and the first `per_domain` go to train.
pub fn split_train_test(
    questions: &[Question],
    per_domain: usize,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>)> {
    let mut by_domain: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for q in questions {
        by_domain
            .entry(q.domain.as_str())
            .or_default()
            .push(q.question_id.as_str());
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (domain, mut ids) in by_domain {
        if ids.len() < per_domain {
            return Err(Error::InsufficientQuestions {
                domain: domain.to_string(),
                got: ids.len(),
                need: per_domain,
            });
        }
        ids.sort_unstable();
        let mut rng = seed::rng(seed, &["split", domain]);
        // Fisher-Yates; stable given (seed, domain, sorted ids).
        for k in (1..ids.len()).rev() {
            ids.swap(k, rand::Rng::random_range(&mut rng, 0..=k));
        }
        for (i, id) in ids.into_iter().enumerate() {
            if i < per_domain {
                train.push(id.to_string());
            } else {
                test.push(id.to_string());
            }
        }
    }
    Ok((train, test))
}
