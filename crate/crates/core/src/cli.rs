//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when inputs load but fail validation (bad
//! references, missing distributions, panels without profiles), 2 when a
//! file cannot be read, parsed or written.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::{debug, info};

use crate::corpus::{load_corpus, Corpus, CorpusError, CorpusPaths, YearRange};
use crate::gev::{score_corpus, GevError, ProfileSet, ScoredSet};
use crate::reference::{ReferenceError, ReferenceLibrary};
use crate::report::{average_table, render_markdown, scenario_table, ScenarioTable};
use crate::selection::{build_sets, error_metrics, run_scenario, write_selection_csv, PortfolioSets, ScenarioTag, Selection};

/// Environment variable holding the log filter (`info`, `debug`, ...).
pub const LOG_ENV: &str = "ASSESS_OPT_LOG";

#[derive(Parser, Debug)]
#[command(name = "assess-opt", version, about = "Score research products and compare selection strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and cross-check corpus, profiles and reference data
    Validate(Inputs),
    /// Compute percentile thresholds from a world-values file
    BuildDist {
        /// CSV of `indicator,category_group,year,doc_split,value`
        #[arg(long)]
        worldvalues: PathBuf,
        /// Destination thresholds file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score every authorship and write scored.csv
    Score {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run selection scenarios and write every output file
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        scenarios: ScenarioArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Measure researchers' selection errors and write errors.csv
    Errors {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Render the comparison report (to stdout unless -o is given)
    Report {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        scenarios: ScenarioArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Inputs {
    /// Directory with researchers.csv, products.csv, authorships.csv and
    /// optionally corpus.json
    #[arg(long)]
    corpus: PathBuf,
    /// Panel profiles (JSON); the built-in pack when omitted
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Reference directory with thresholds.csv and/or worldvalues.csv, and
    /// optionally mergemap.csv
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Evaluation window override, e.g. 2004:2010
    #[arg(long)]
    window: Option<YearRange>,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Comma-separated scenarios among 1, 2, 3, exact-A, exact-C
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,exact-A,exact-C")]
    scenarios: Vec<ScenarioTag>,
}

/// An error tagged with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn validation(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, error: error.into() }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Invalid(_) => Failure::validation(e),
            CorpusError::Io { .. } | CorpusError::Parse { .. } => Failure::io(e),
        }
    }
}

impl From<ReferenceError> for Failure {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::MissingDistribution(_) => Failure::validation(e),
            _ => Failure::io(e),
        }
    }
}

impl From<GevError> for Failure {
    fn from(e: GevError) -> Self {
        match e {
            GevError::Io { .. } | GevError::Config(_) => Failure::io(e),
            _ => Failure::validation(e),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            if let Some(CorpusError::Invalid(violations)) = error.downcast_ref::<CorpusError>() {
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            ExitCode::from(code)
        }
    }
}

struct Loaded {
    corpus: Corpus,
    scored: ScoredSet,
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let mut corpus = load_corpus(&CorpusPaths::in_dir(&inputs.corpus))?;
    if let Some(w) = inputs.window {
        if w.is_empty() {
            return Err(Failure::validation(anyhow!("evaluation window {w} is empty")));
        }
        corpus = corpus.with_window(w);
    }
    info!(
        "corpus: {} researchers, {} products, {} authorships, window {}",
        corpus.researchers().count(),
        corpus.products().count(),
        corpus.authorships().len(),
        corpus.window()
    );
    let profiles = match &inputs.profiles {
        Some(path) => ProfileSet::load(path)?,
        None => ProfileSet::default_pack(),
    };
    let library = ReferenceLibrary::load_dir(&inputs.reference)?;
    debug!("reference library: {} distributions", library.len());
    let scored = score_corpus(&corpus, &profiles, &library)?;
    Ok(Loaded { corpus, scored })
}

fn sets_of(loaded: &Loaded) -> Result<PortfolioSets> {
    build_sets(&loaded.corpus, &loaded.scored).map_err(Failure::validation)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Failure::io)
}

/// Writes a file through `fill`, mapping any failure to exit code 2.
fn write_file<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
{
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(Failure::io)?;
    let mut w = BufWriter::new(file);
    fill(&mut w)
        .and_then(|()| w.flush().map_err(Into::into))
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::io)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn run_scenarios(sets: &PortfolioSets, tags: &[ScenarioTag]) -> Result<Vec<Selection>> {
    let mut tags = tags.to_vec();
    tags.sort();
    tags.dedup();
    if tags.is_empty() {
        return Err(Failure::validation(anyhow!("no scenario requested")));
    }
    Ok(tags
        .into_iter()
        .map(|t| {
            let sel = run_scenario(t, sets);
            info!("scenario {t}: total {}", sel.total_score);
            sel
        })
        .collect())
}

fn write_reports(dir: &Path, table: &ScenarioTable, markdown: &str) -> Result<()> {
    write_file(&dir.join("report.md"), |w| Ok(w.write_all(markdown.as_bytes())?))?;
    write_file(&dir.join("report.csv"), |w| Ok(table.table().write_csv(w)?))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate(inputs) => {
            let loaded = load(&inputs)?;
            let sets = sets_of(&loaded)?;
            println!(
                "OK: {} researchers, {} products, {} authorships scored, {} slots due",
                loaded.corpus.researchers().count(),
                loaded.corpus.products().count(),
                loaded.scored.len(),
                sets.iter().map(|r| r.quota).sum::<u32>()
            );
            Ok(())
        }
        Command::BuildDist { worldvalues, output } => {
            let library = ReferenceLibrary::from_world_values(&worldvalues)?;
            write_file(&output, |w| Ok(library.write_thresholds(w)?))?;
            println!("{} distributions written to {}", library.len(), output.display());
            Ok(())
        }
        Command::Score { inputs, output } => {
            let loaded = load(&inputs)?;
            create_dir(&output)?;
            write_file(&output.join("scored.csv"), |w| Ok(loaded.scored.write_csv(w)?))
        }
        Command::Errors { inputs, output } => {
            let loaded = load(&inputs)?;
            let report = error_metrics(&sets_of(&loaded)?);
            create_dir(&output)?;
            write_file(&output.join("errors.csv"), |w| Ok(report.write_csv(w)?))?;
            print!("{}", crate::report::error_table(&report).to_markdown());
            Ok(())
        }
        Command::Simulate { inputs, scenarios, output } => {
            let loaded = load(&inputs)?;
            let sets = sets_of(&loaded)?;
            let selections = run_scenarios(&sets, &scenarios.scenarios)?;
            let errors = error_metrics(&sets);
            let table = scenario_table(&selections).map_err(Failure::validation)?;
            let markdown = render_markdown(Some(&table), &errors, &average_table(&sets));

            create_dir(&output)?;
            write_file(&output.join("scored.csv"), |w| Ok(loaded.scored.write_csv(w)?))?;
            write_file(&output.join("selection.csv"), |w| Ok(write_selection_csv(&selections, w)?))?;
            write_file(&output.join("errors.csv"), |w| Ok(errors.write_csv(w)?))?;
            write_reports(&output, &table, &markdown)
        }
        Command::Report { inputs, scenarios, output } => {
            let loaded = load(&inputs)?;
            let sets = sets_of(&loaded)?;
            let selections = run_scenarios(&sets, &scenarios.scenarios)?;
            let table = scenario_table(&selections).map_err(Failure::validation)?;
            let markdown = render_markdown(Some(&table), &error_metrics(&sets), &average_table(&sets));
            match output {
                Some(dir) => {
                    create_dir(&dir)?;
                    write_reports(&dir, &table, &markdown)
                }
                None => io::stdout()
                    .write_all(markdown.as_bytes())
                    .context("cannot write to stdout")
                    .map_err(Failure::io),
            }
        }
    }
}
