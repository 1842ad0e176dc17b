use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use spvote::aggregate::aggregate_auto;
use spvote::calib::{grid_search, split_train_test, GridSpec};
use spvote::extract::ExtractionParams;
use spvote::model::{Election, PredictionKind, Question, VoteKind};
use spvote::seed;
use spvote::tournament::sample_top;

use spvote_cli::config::{DataSource, ExperimentConfig};
use spvote_cli::error::{CliError, Result};
use spvote_cli::experiment::{run_experiment, simulate_data};
use spvote_cli::fixtures::{generate_fixture_questions, read_label_list};
use spvote_cli::metrics::baseline_errors;
use spvote_cli::{io, report};

#[derive(Parser)]
#[command(
    name = "spvote",
    version,
    about = "Surprisingly-popular ranked voting: simulation, aggregation, and evaluation"
)]
struct Cli {
    /// Base seed for every randomized stage (overrides the config value).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config value).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Abort on the first malformed input row instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured world into questions.csv and responses.csv.
    Simulate,
    /// Aggregate each election into a tournament (aggregate.csv).
    Aggregate {
        #[arg(long)]
        responses: Option<PathBuf>,
        #[arg(long)]
        questions: Option<PathBuf>,
        /// Agreeing-prediction magnitude, overrides the config value.
        #[arg(long)]
        alpha: Option<f64>,
        /// Disagreeing-prediction magnitude, overrides the config value.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Grid-calibrate imputation parameters per format (calibration.csv).
    Train,
    /// Score the six baseline voting rules per election (baselines.csv).
    Baselines {
        #[arg(long)]
        responses: Option<PathBuf>,
        #[arg(long)]
        questions: Option<PathBuf>,
    },
    /// Run the full experiment and write the report tables and charts.
    Evaluate,
    /// Cut four-alternative fixture questions from a ranked label list.
    Fixtures {
        /// Text file with one label per line, ranked best to worst.
        #[arg(long)]
        list: PathBuf,
        #[arg(long, default_value_t = 6)]
        gap: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Re-render charts from an existing summary.csv.
    Report {
        #[arg(long)]
        summary: PathBuf,
    },
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.out = o.clone();
    }
    Ok(config)
}

/// Loads elections from explicit file flags, or falls back to the config
/// source (reading files or simulating the configured world).
fn load_elections(
    cli: &Cli,
    config: &ExperimentConfig,
    responses: &Option<PathBuf>,
    questions: &Option<PathBuf>,
) -> Result<(Vec<Question>, Vec<Election>)> {
    match (responses, questions) {
        (Some(r), Some(q)) => {
            let qs = io::read_questions(q)?;
            let report = io::read_responses(r, &qs, cli.strict)?;
            Ok((qs, report.elections))
        }
        (None, None) => match &config.source {
            DataSource::Files {
                responses,
                questions,
            } => {
                let qs = io::read_questions(questions)?;
                let report = io::read_responses(responses, &qs, cli.strict)?;
                Ok((qs, report.elections))
            }
            DataSource::World(spec) => simulate_data(spec, &config.formats, config.seed),
        },
        _ => Err(CliError::validation(
            "--responses and --questions must be given together",
        )),
    }
}

fn ensure_out(config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&config.out)?;
    Ok(())
}

fn announce(path: &std::path::Path) {
    println!("wrote {}", path.display());
}

fn cmd_simulate(config: &ExperimentConfig) -> Result<()> {
    let spec = match &config.source {
        DataSource::World(spec) => spec,
        DataSource::Files { .. } => {
            return Err(CliError::validation(
                "simulate needs a simulated-world config, not file inputs",
            ))
        }
    };
    let (questions, elections) = simulate_data(spec, &config.formats, config.seed)?;
    ensure_out(config)?;
    let qp = config.out.join("questions.csv");
    io::write_questions(&qp, &questions)?;
    announce(&qp);
    let rp = config.out.join("responses.csv");
    io::write_responses(&rp, &elections)?;
    announce(&rp);
    Ok(())
}

fn cmd_aggregate(
    cli: &Cli,
    config: &ExperimentConfig,
    responses: &Option<PathBuf>,
    questions: &Option<PathBuf>,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> Result<()> {
    let (_, elections) = load_elections(cli, config, responses, questions)?;
    let params = ExtractionParams::new(
        alpha.unwrap_or(config.alpha),
        beta.unwrap_or(config.beta),
    )?;
    ensure_out(config)?;
    let path = config.out.join("aggregate.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(["question_id", "format", "winner", "edges"])?;
    for e in &elections {
        let format = e
            .uniform_format()
            .ok_or_else(|| CliError::validation("mixed-format election"))?;
        let t = aggregate_auto(e, params, config.seed)?;
        let qid = &e.question.question_id;
        let mut rng = seed::rng(config.seed, &["cli", "winner", qid, format.token()]);
        let winner = sample_top(&t, &mut rng)?;
        let edges = e
            .question
            .pairs()
            .iter()
            .map(|&(a, b)| {
                if t.beats(a, b).expect("complete tournament") {
                    format!("{a}>{b}")
                } else {
                    format!("{b}>{a}")
                }
            })
            .collect::<Vec<_>>()
            .join(";");
        writer.write_record([qid.as_str(), format.token(), &winner.to_string(), &edges])?;
    }
    writer.flush()?;
    announce(&path);
    Ok(())
}

fn cmd_train(cli: &Cli, config: &ExperimentConfig) -> Result<()> {
    let (questions, elections) = load_elections(cli, config, &None, &None)?;
    let grid = config.grid.clone().unwrap_or_else(GridSpec::default);
    let (train_ids, _) = split_train_test(&questions, config.train_per_domain, config.seed)?;
    let train_set: std::collections::HashSet<&str> =
        train_ids.iter().map(|s| s.as_str()).collect();
    let train: Vec<Election> = elections
        .iter()
        .filter(|e| train_set.contains(e.question.question_id.as_str()))
        .cloned()
        .collect();

    ensure_out(config)?;
    let mut rows = Vec::new();
    for format in &config.formats {
        if format.prediction == PredictionKind::None {
            continue;
        }
        if !train
            .iter()
            .any(|e| e.uniform_format() == Some(*format))
        {
            continue;
        }
        let result = grid_search(&train, *format, &grid, config.loss, config.seed)?;
        let surface_path = config.out.join(format!("surface_{}.csv", format.token()));
        let mut writer = csv::Writer::from_path(&surface_path)?;
        writer.write_record(["alpha", "beta", "loss"])?;
        for cell in &result.surface {
            writer.write_record([
                format!("{:.6}", cell.alpha),
                format!("{:.6}", cell.beta),
                format!("{:.6}", cell.loss),
            ])?;
        }
        writer.flush()?;
        announce(&surface_path);
        rows.push(spvote_cli::experiment::CalibRow {
            format: format.token().to_string(),
            alpha: result.best.alpha(),
            beta: result.best.beta(),
            loss: result.best_loss,
            train_questions: result.train_question_ids.len(),
        });
    }
    if rows.is_empty() {
        return Err(CliError::validation(
            "no prediction-bearing format has training data",
        ));
    }
    let path = config.out.join("calibration.csv");
    report::write_calib(&path, &rows)?;
    announce(&path);
    Ok(())
}

fn cmd_baselines(
    cli: &Cli,
    config: &ExperimentConfig,
    responses: &Option<PathBuf>,
    questions: &Option<PathBuf>,
) -> Result<()> {
    let (_, elections) = load_elections(cli, config, responses, questions)?;
    ensure_out(config)?;
    let path = config.out.join("baselines.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(["question_id", "format", "rule", "top_error", "kt"])?;
    let mut scored = 0usize;
    for e in &elections {
        let format = match e.uniform_format() {
            Some(f) if f.vote == VoteKind::Rank => f,
            _ => continue,
        };
        let truth = match &e.question.ground_truth {
            Some(t) => t,
            None => continue,
        };
        let profile = spvote::baselines::Profile::from_election(e)?;
        for (rule, top, kt) in baseline_errors(&profile, truth)? {
            writer.write_record([
                e.question.question_id.as_str(),
                format.token(),
                rule,
                &format!("{top:.6}"),
                &format!("{kt:.6}"),
            ])?;
        }
        scored += 1;
    }
    writer.flush()?;
    if scored == 0 {
        return Err(CliError::validation(
            "no rank-vote elections with ground truth to score",
        ));
    }
    announce(&path);
    Ok(())
}

fn cmd_evaluate(cli: &Cli, config: &ExperimentConfig) -> Result<()> {
    let out = run_experiment(config, cli.strict)?;
    let paths = report::write_report(&config.out, &out)?;
    for p in &paths {
        announce(p);
    }
    println!(
        "{} summary rows, {} raw rows, {} calibrations",
        out.summary.len(),
        out.raw.len(),
        out.calib.len()
    );
    if out.rows_skipped > 0 {
        println!("skipped {} malformed rows", out.rows_skipped);
    }
    if !out.failures.is_empty() {
        return Err(CliError::validation(format!(
            "{} format slice(s) failed; see failures.txt",
            out.failures.len()
        )));
    }
    Ok(())
}

fn cmd_fixtures(config: &ExperimentConfig, list: &PathBuf, gap: usize, count: usize) -> Result<()> {
    let labels = read_label_list(list)?;
    let questions = generate_fixture_questions(&labels, gap, count, config.seed)?;
    ensure_out(config)?;
    let path = config.out.join("questions.csv");
    io::write_questions(&path, &questions)?;
    announce(&path);
    Ok(())
}

fn cmd_report(config: &ExperimentConfig, summary: &PathBuf) -> Result<()> {
    let rows = report::read_summary(summary)?;
    if rows.is_empty() {
        return Err(CliError::validation("summary table has no rows"));
    }
    ensure_out(config)?;
    for p in report::write_charts(&config.out, &rows)? {
        announce(&p);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let config = effective_config(cli)?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&config),
        Command::Aggregate {
            responses,
            questions,
            alpha,
            beta,
        } => cmd_aggregate(cli, &config, responses, questions, *alpha, *beta),
        Command::Train => cmd_train(cli, &config),
        Command::Baselines {
            responses,
            questions,
        } => cmd_baselines(cli, &config, responses, questions),
        Command::Evaluate => cmd_evaluate(cli, &config),
        Command::Fixtures { list, gap, count } => cmd_fixtures(&config, list, *gap, *count),
        Command::Report { summary } => cmd_report(&config, summary),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
