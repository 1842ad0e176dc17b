//! Fixture questions cut from one globally ranked list.
//!
//! Each question takes four list items spaced `gap` ranks apart, so every
//! question has the same objective difficulty profile and its ground truth is
//! simply list order. Window start positions (1-based) walk the odd offsets
//! first (1, 3, 5, ...) and then a sparser even sweep (2, 12, 22, ...), which
//! with a 50-item list and gap 6 yields the twenty windows
//! (1,7,13,19), (3,9,15,21), ..., (31,37,43,49), (2,8,14,20), ...,
//! (32,38,44,50).
//!
//! Alternative ids are shuffled per question (seeded) so that id order never
//! encodes the answer; the ground truth ranking records the true list order.

use rand::seq::SliceRandom;
use spvote::model::Question;
use spvote::seed;

use crate::error::{CliError, Result};

const WINDOW: usize = 4;

/// 1-based start positions for `count` windows over a `len`-item list.
pub fn window_starts(len: usize, gap: usize, count: usize) -> Result<Vec<usize>> {
    if gap == 0 {
        return Err(CliError::validation("gap must be positive"));
    }
    let span = (WINDOW - 1) * gap;
    if len < span + 1 {
        return Err(CliError::validation(format!(
            "list of {len} items cannot hold a window spanning {} positions",
            span + 1
        )));
    }
    let max_start = len - span;
    let mut starts = Vec::with_capacity(count);
    let mut odd = 1;
    while odd <= max_start && starts.len() < count {
        starts.push(odd);
        odd += 2;
    }
    let mut even = 2;
    while even <= max_start && starts.len() < count {
        starts.push(even);
        even += 10;
    }
    if starts.len() < count {
        return Err(CliError::validation(format!(
            "only {} windows available, {count} requested",
            starts.len()
        )));
    }
    Ok(starts)
}

/// Builds `count` four-alternative questions from `labels` (a list ranked
/// best to worst). Ground truth is list order; alternative ids are shuffled
/// per question from `seed`.
pub fn generate_fixture_questions(
    labels: &[String],
    gap: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Question>> {
    let starts = window_starts(labels.len(), gap, count)?;
    let mut questions = Vec::with_capacity(count);
    for start in starts {
        // map[j] = the id given to the j-th best item of the window.
        let mut map: Vec<usize> = (0..WINDOW).collect();
        map.shuffle(&mut seed::rng(seed, &["fixture", &start.to_string()]));
        let mut alt_labels = vec![String::new(); WINDOW];
        for (j, id) in map.iter().enumerate() {
            alt_labels[*id] = labels[start - 1 + j * gap].clone();
        }
        let refs: Vec<&str> = alt_labels.iter().map(|s| s.as_str()).collect();
        let truth = spvote::model::Ranking::new(map.clone())?;
        questions.push(Question::from_labels(
            format!("w{start:02}"),
            "fixture",
            &refs,
            Some(truth),
        )?);
    }
    Ok(questions)
}

/// Reads one label per line, trimming blanks.
pub fn read_label_list(path: &std::path::Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read list {}: {e}", path.display()))
    })?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if labels.is_empty() {
        return Err(CliError::validation("label list is empty"));
    }
    Ok(labels)
}
