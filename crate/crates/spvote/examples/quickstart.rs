//! The README walkthrough: five voters, top choices plus predicted most
//! common top choice, aggregated into a pairwise tournament.

use spvote::{
    aggregate_auto, select_top, Election, ElicitationFormat, ExtractionParams,
    PredictionReport, Question, ResponseRecord, VoteReport,
};

fn main() -> spvote::Result<()> {
    let question = Question::from_labels("q1", "demo", &["w", "x", "y", "z"], None)?;
    let responses: Vec<ResponseRecord> = [(0, 0), (0, 0), (1, 0), (2, 0), (1, 1)]
        .iter()
        .enumerate()
        .map(|(i, &(vote, guess))| ResponseRecord {
            question_id: "q1".into(),
            voter_id: format!("v{i}"),
            format: ElicitationFormat::TOP_TOP,
            vote: VoteReport::TopChoice(vote),
            prediction: PredictionReport::TopChoice(guess),
        })
        .collect();
    let election = Election::new(question, responses)?;
    let tournament = aggregate_auto(&election, ExtractionParams::new(0.75, 0.25)?, 42)?;
    println!("{:?}", select_top(&tournament)?.winners);
    Ok(())
}
