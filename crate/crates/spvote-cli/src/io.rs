//! CSV ingestion and serialization.
//!
//! Responses: `question_id,voter_id,format,vote,prediction`, one row per
//! response; votes and predictions are a single alternative id or a full
//! ">"-joined ranking of ids; the prediction column is empty exactly for the
//! *-none formats. Questions: `question_id,domain,alt0..alt{m-1},ground_truth`
//! with an optionally empty ">"-joined ground truth.
//!
//! Ingest validates per row and reports offenders by line number; strict mode
//! aborts on the first bad row, lenient mode skips and counts them. On valid
//! files ingest and serialize are mutually inverse.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use spvote::model::{
    Election, ElicitationFormat, PredictionKind, PredictionReport, Question, Ranking,
    ResponseRecord, VoteKind, VoteReport,
};

use crate::error::{CliError, Result};

fn parse_id(s: &str, m: usize) -> Result<usize> {
    let id: usize = s
        .trim()
        .parse()
        .map_err(|_| CliError::validation(format!("not an alternative id: {s:?}")))?;
    if id >= m {
        return Err(CliError::validation(format!(
            "alternative id {id} out of range for {m} alternatives"
        )));
    }
    Ok(id)
}

fn parse_ranking(s: &str, m: usize) -> Result<Ranking> {
    let parts: Vec<&str> = s.split('>').collect();
    if parts.len() != m {
        return Err(CliError::validation(format!(
            "ranking {s:?} has {} entries, expected {m}",
            parts.len()
        )));
    }
    let order = parts
        .iter()
        .map(|p| parse_id(p, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ranking::new(order)?)
}

fn ranking_string(r: &Ranking) -> String {
    r.order()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(">")
}

fn parse_vote(s: &str, kind: VoteKind, m: usize) -> Result<VoteReport> {
    match kind {
        VoteKind::Top => {
            if s.contains('>') {
                return Err(CliError::validation(format!(
                    "top-choice vote must be a single id, got {s:?}"
                )));
            }
            Ok(VoteReport::TopChoice(parse_id(s, m)?))
        }
        VoteKind::Rank => Ok(VoteReport::FullRanking(parse_ranking(s, m)?)),
    }
}

fn parse_prediction(s: &str, kind: PredictionKind, m: usize) -> Result<PredictionReport> {
    match (kind, s.is_empty()) {
        (PredictionKind::None, true) => Ok(PredictionReport::Absent),
        (PredictionKind::None, false) => Err(CliError::validation(
            "prediction present under a no-prediction format".to_string(),
        )),
        (_, true) => Err(CliError::validation(
            "prediction missing under a prediction format".to_string(),
        )),
        (PredictionKind::Top, false) => {
            if s.contains('>') {
                return Err(CliError::validation(format!(
                    "top-choice prediction must be a single id, got {s:?}"
                )));
            }
            Ok(PredictionReport::TopChoice(parse_id(s, m)?))
        }
        (PredictionKind::Rank, false) => Ok(PredictionReport::FullRanking(parse_ranking(s, m)?)),
    }
}

fn vote_string(v: &VoteReport) -> String {
    match v {
        VoteReport::TopChoice(a) => a.to_string(),
        VoteReport::FullRanking(r) => ranking_string(r),
    }
}

fn prediction_string(p: &PredictionReport) -> String {
    match p {
        PredictionReport::Absent => String::new(),
        PredictionReport::TopChoice(a) => a.to_string(),
        PredictionReport::FullRanking(r) => ranking_string(r),
    }
}

/// Reads a questions file, preserving row order.
pub fn read_questions(path: &Path) -> Result<Vec<Question>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.is_io_error() {
            true => CliError::validation(format!("cannot open {}: {e}", path.display())),
            false => e.into(),
        })?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.first() != Some(&"question_id")
        || cols.get(1) != Some(&"domain")
        || cols.last() != Some(&"ground_truth")
        || cols.len() < 5
    {
        return Err(CliError::validation(format!(
            "questions header must be question_id,domain,alt0..,ground_truth, got {cols:?}"
        )));
    }
    let m = cols.len() - 3;
    for (i, col) in cols[2..2 + m].iter().enumerate() {
        if *col != format!("alt{i}") {
            return Err(CliError::validation(format!(
                "alternative column {i} must be named alt{i}, got {col:?}"
            )));
        }
    }
    let mut questions = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let at = |i: usize| record.get(i).unwrap_or("").to_string();
        let qid = at(0);
        if !seen.insert(qid.clone()) {
            return Err(CliError::validation(format!(
                "line {line}: duplicate question id {qid:?}"
            )));
        }
        let labels: Vec<String> = (0..m).map(|i| at(2 + i)).collect();
        let truth_field = at(2 + m);
        let truth = if truth_field.is_empty() {
            None
        } else {
            Some(parse_ranking(&truth_field, m).map_err(|e| {
                CliError::validation(format!("line {line}: ground truth: {e}"))
            })?)
        };
        let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        questions.push(
            Question::from_labels(qid, at(1), &label_refs, truth)
                .map_err(|e| CliError::validation(format!("line {line}: {e}")))?,
        );
    }
    Ok(questions)
}

/// Writes a questions file; all questions must share one alternative count.
pub fn write_questions(path: &Path, questions: &[Question]) -> Result<()> {
    let m = questions
        .first()
        .map(|q| q.m())
        .ok_or_else(|| CliError::validation("no questions to write"))?;
    if let Some(q) = questions.iter().find(|q| q.m() != m) {
        return Err(CliError::validation(format!(
            "question {} has {} alternatives, file requires {m}",
            q.question_id,
            q.m()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["question_id".to_string(), "domain".to_string()];
    header.extend((0..m).map(|i| format!("alt{i}")));
    header.push("ground_truth".to_string());
    writer.write_record(&header)?;
    for q in questions {
        let mut row = vec![q.question_id.clone(), q.domain.clone()];
        row.extend(q.alternatives.iter().map(|a| a.label.clone()));
        row.push(q.ground_truth.as_ref().map(ranking_string).unwrap_or_default());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Outcome of a response ingest.
#[derive(Debug)]
pub struct IngestReport {
    /// One election per (question, format), ordered by question id then by
    /// the canonical format order; responses keep file order.
    pub elections: Vec<Election>,
    pub rows_read: usize,
    /// Lenient mode only: `(line, reason)` for every skipped row.
    pub skipped: Vec<(u64, String)>,
}

fn format_index(f: ElicitationFormat) -> usize {
    ElicitationFormat::ALL.iter().position(|x| *x == f).unwrap()
}

/// Reads a responses file against its questions and groups rows into
/// per-(question, format) elections.
pub fn read_responses(
    path: &Path,
    questions: &[Question],
    strict: bool,
) -> Result<IngestReport> {
    let by_id: BTreeMap<&str, &Question> = questions
        .iter()
        .map(|q| (q.question_id.as_str(), q))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.is_io_error() {
            true => CliError::validation(format!("cannot open {}: {e}", path.display())),
            false => e.into(),
        })?;
    let headers: Vec<&str> = reader.headers()?.iter().collect();
    if headers != ["question_id", "voter_id", "format", "vote", "prediction"] {
        return Err(CliError::validation(format!(
            "responses header must be question_id,voter_id,format,vote,prediction, got {headers:?}"
        )));
    }

    let mut groups: BTreeMap<(String, usize), Vec<ResponseRecord>> = BTreeMap::new();
    let mut seen: HashSet<(String, String, usize)> = HashSet::new();
    let mut skipped = Vec::new();
    let mut rows_read = 0usize;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows_read += 1;
        let parse_row = || -> Result<ResponseRecord> {
            let at = |i: usize| record.get(i).unwrap_or("");
            let qid = at(0);
            let question = by_id.get(qid).ok_or_else(|| {
                CliError::validation(format!("unknown question id {qid:?}"))
            })?;
            let format: ElicitationFormat = at(2)
                .parse()
                .map_err(|e: spvote::Error| CliError::validation(e.to_string()))?;
            let m = question.m();
            let response = ResponseRecord {
                question_id: qid.to_string(),
                voter_id: at(1).to_string(),
                format,
                vote: parse_vote(at(3), format.vote, m)?,
                prediction: parse_prediction(at(4), format.prediction, m)?,
            };
            response.validate(question)?;
            Ok(response)
        };
        let response = match parse_row() {
            Ok(r) => r,
            Err(e) => {
                let reason = format!("line {line}: {e}");
                if strict {
                    return Err(CliError::validation(reason));
                }
                skipped.push((line, reason));
                continue;
            }
        };
        let key = (
            response.question_id.clone(),
            response.voter_id.clone(),
            format_index(response.format),
        );
        if !seen.insert(key) {
            let reason = format!(
                "line {line}: duplicate response for question {:?}, voter {:?}, format {}",
                response.question_id, response.voter_id, response.format
            );
            if strict {
                return Err(CliError::validation(reason));
            }
            skipped.push((line, reason));
            continue;
        }
        groups
            .entry((response.question_id.clone(), format_index(response.format)))
            .or_default()
            .push(response);
    }

    let mut elections = Vec::with_capacity(groups.len());
    for ((qid, _), responses) in groups {
        let question = by_id[qid.as_str()].clone();
        elections.push(Election::new(question, responses)?);
    }
    Ok(IngestReport {
        elections,
        rows_read,
        skipped,
    })
}

/// Writes elections back to the response schema, preserving election and
/// response order.
pub fn write_responses(path: &Path, elections: &[Election]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["question_id", "voter_id", "format", "vote", "prediction"])?;
    for e in elections {
        for r in &e.responses {
            writer.write_record([
                r.question_id.as_str(),
                r.voter_id.as_str(),
                r.format.token(),
                &vote_string(&r.vote),
                &prediction_string(&r.prediction),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}
