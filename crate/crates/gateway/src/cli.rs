//! The `confsched` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use confsched_core::affinity::{participation_stats, render_stats_table, BlendWeights, Thresholds};
use confsched_core::corpus::{load_dataset_dir, validate_dataset, PersonId};
use confsched_core::records::{to_lines, write_lines};
use confsched_core::recommend::recommend;
use confsched_core::sessionizer::{SessionConfig, SessionRecord, Sessionization};
use confsched_core::scheduler::ScheduleConfig;

use crate::draft::{render_view, Draft, DraftContent, Inputs, Settings};
use crate::server::{serve, AppState};

#[derive(Debug, Parser)]
#[command(name = "confsched", version, about = "Community-sourced conference sessionization and scheduling")]
pub struct Cli {
    /// Directory holding papers, responses, bookmarks and venue records.
    #[arg(long, global = true, default_value = ".")]
    pub data_dir: PathBuf,
    /// Output file (or directory for `export`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    pub restarts: usize,
    /// strong_author:strong_attendee[:big_difference]
    #[arg(long, global = true, value_parser = parse_thresholds)]
    pub thresholds: Option<Thresholds>,
    /// w_att:w_int:w_rel
    #[arg(long, global = true, value_parser = parse_weights)]
    pub weights: Option<BlendWeights>,
    /// Weight of the session-popularity balance penalty.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, global = true, default_value_t = 4)]
    pub min_size: usize,
    #[arg(long, global = true, default_value_t = 5)]
    pub max_size: usize,
    /// Treat author clashes as a penalty instead of a hard constraint.
    #[arg(long, global = true)]
    pub soft_authors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Source {
    Attendee,
    Author,
    Blended,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a dataset.
    Ingest,
    /// Participation statistics for both preference sources.
    Stats,
    /// Pairwise affinity counts.
    Affinity {
        #[arg(long, value_enum, default_value = "blended")]
        source: Source,
    },
    /// Compare author and attendee affinity.
    Compare,
    /// Paper recommendations for one person.
    Recommend {
        #[arg(long)]
        person: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Group papers into sessions.
    Sessionize,
    /// Sessionize (or load sessions) and place sessions into slots and rooms.
    Schedule {
        /// Existing session records to schedule instead of sessionizing.
        #[arg(long)]
        sessions: Option<PathBuf>,
    },
    /// Host the editable draft over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Draft file to resume from and persist to.
        #[arg(long)]
        draft: Option<PathBuf>,
    },
    /// Write every pipeline output into the `--out` directory.
    Export {
        /// Export this saved draft instead of computing a fresh one.
        #[arg(long)]
        draft: Option<PathBuf>,
    },
}

fn parse_numbers(s: &str, lens: &[usize]) -> Result<Vec<f64>, String> {
    let parts: Result<Vec<f64>, _> = s.split(':').map(str::parse::<f64>).collect();
    let parts = parts.map_err(|e| format!("bad number in \"{s}\": {e}"))?;
    if !lens.contains(&parts.len()) {
        return Err(format!("expected {} colon-separated numbers", lens.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ")));
    }
    if parts.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err("values must be finite and non-negative".into());
    }
    Ok(parts)
}

fn parse_thresholds(s: &str) -> Result<Thresholds, String> {
    let v = parse_numbers(s, &[2, 3])?;
    Ok(Thresholds {
        strong_author: v[0],
        strong_attendee: v[1],
        big_difference: v.get(2).copied().unwrap_or(Thresholds::default().big_difference),
    })
}

fn parse_weights(s: &str) -> Result<BlendWeights, String> {
    let v = parse_numbers(s, &[3])?;
    Ok(BlendWeights {
        attendee: v[0],
        interest: v[1],
        relevance: v[2],
    })
}

impl Cli {
    fn settings(&self) -> Settings {
        let hard = !self.soft_authors;
        Settings {
            weights: self.weights.unwrap_or_default(),
            thresholds: self.thresholds.unwrap_or_default(),
            session: SessionConfig {
                min_size: self.min_size,
                max_size: self.max_size,
                balance_weight: self.beta,
                restarts: self.restarts,
                seed: self.seed,
            },
            schedule: ScheduleConfig {
                restarts: self.restarts,
                seed: self.seed,
                hard_author_constraint: hard,
                ..Default::default()
            },
        }
    }

    fn inputs(&self) -> Result<Inputs> {
        let dataset = load_dataset_dir(&self.data_dir)?;
        Ok(Inputs::build(dataset, self.settings())?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_sessions(path: &Path, inputs: &Inputs) -> Result<Sessionization> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records: Vec<SessionRecord> = confsched_core::records::parse_lines(&text)
        .map_err(|(line, msg)| anyhow::anyhow!("{}:{line}: {msg}", path.display()))?
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    let pop = confsched_core::affinity::popularity(&inputs.attendee_prefs);
    let sz = Sessionization::from_records(records, &inputs.blended, &pop, inputs.settings.session.balance_weight)?;
    for s in &sz.sessions {
        for p in &s.paper_ids {
            if !inputs.dataset.has_paper(p) {
                bail!("{}: unknown paper id \"{p}\"", path.display());
            }
        }
    }
    if sz.paper_count() != inputs.dataset.papers.len() {
        bail!(
            "{}: sessions cover {} of {} papers",
            path.display(),
            sz.paper_count(),
            inputs.dataset.papers.len()
        );
    }
    Ok(sz)
}

fn run_command(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest => {
            let dataset = load_dataset_dir(&cli.data_dir)?;
            let report = validate_dataset(&dataset);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} papers, {} persons, {} author responses, {} bookmark sets, {} slots x {} rooms",
                dataset.papers.len(),
                dataset.persons.len(),
                dataset.author_responses.len(),
                dataset.bookmarks.len(),
                dataset.venue.slots.len(),
                dataset.venue.rooms.len()
            );
            cli.emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))
        }
        Command::Stats => {
            let inputs = cli.inputs()?;
            let n = inputs.dataset.papers.len();
            let author = participation_stats(&inputs.author_prefs, n)?;
            let attendee = participation_stats(&inputs.attendee_prefs, n)?;
            print!("{}", render_stats_table(&author, &attendee));
            if let Some(path) = &cli.out {
                let json = serde_json::json!({ "author": author, "attendee": attendee });
                write_file(path, serde_json::to_string_pretty(&json)?.as_bytes())?;
            }
            Ok(())
        }
        Command::Affinity { source } => {
            let inputs = cli.inputs()?;
            let m = match source {
                Source::Attendee => &inputs.attendee,
                Source::Author => &inputs.author,
                Source::Blended => &inputs.blended,
            };
            cli.emit(&to_lines(&m.to_records()))
        }
        Command::Compare => {
            let inputs = cli.inputs()?;
            let c = &inputs.comparison;
            eprintln!(
                "superset violations: {}, weak vs strong: {}, zero vs strong: {}, big difference: {}",
                c.superset_violations.len(),
                c.weak_vs_strong.len(),
                c.zero_vs_strong.len(),
                c.big_difference.len()
            );
            cli.emit(&format!("{}\n", serde_json::to_string_pretty(c)?))
        }
        Command::Recommend { person, k } => {
            let inputs = cli.inputs()?;
            let recs = recommend(&inputs.ratings, &inputs.tfidf, &PersonId::new(person.as_str()), *k)?;
            cli.emit(&to_lines(&recs))
        }
        Command::Sessionize => {
            let inputs = cli.inputs()?;
            let sz = inputs.sessionize()?;
            for w in &sz.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("{} sessions, objective {}", sz.sessions.len(), sz.objective);
            cli.emit(&to_lines(&sz.to_records()))
        }
        Command::Schedule { sessions } => {
            let inputs = cli.inputs()?;
            let sz = match sessions {
                Some(path) => read_sessions(path, &inputs)?,
                None => inputs.sessionize()?,
            };
            let schedule = inputs.schedule(&sz)?;
            for w in sz.warnings.iter().chain(&schedule.warnings) {
                eprintln!("warning: {w}");
            }
            eprint!("{}", schedule.render_grid(&inputs.dataset.venue));
            eprintln!(
                "conflicts: {}, author clashes: {}, room overflow: {}",
                schedule.metrics.conflict_count, schedule.metrics.author_clashes, schedule.metrics.room_overflow
            );
            cli.emit(&to_lines(&schedule.to_records()))
        }
        Command::Serve { port, draft } => {
            let inputs = Arc::new(cli.inputs()?);
            let draft = match draft {
                Some(path) => Draft::open(inputs, path)?,
                None => Draft::new(inputs)?,
            };
            let state = AppState::new(draft);
            let addr = SocketAddr::from(([127, 0, 0, 1], *port));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(state, addr)).with_context(|| format!("serving on {addr}"))
        }
        Command::Export { draft } => {
            let Some(dir) = &cli.out else {
                bail!("export needs --out <directory>");
            };
            let inputs = Arc::new(cli.inputs()?);
            let draft = match draft {
                Some(path) if !path.exists() => bail!("draft file {} does not exist", path.display()),
                Some(path) => Draft::open(Arc::clone(&inputs), path)?,
                None => Draft::new(Arc::clone(&inputs))?,
            };
            export(dir, &inputs, draft.content(), draft.revision())
        }
    }
}

fn export(dir: &Path, inputs: &Inputs, content: &DraftContent, revision: u64) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let jsonl = |name: &str, write: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        write_file(&dir.join(name), &buf)
    };
    jsonl("sessions.jsonl", &|b| write_lines(b, &content.sessionization.to_records()))?;
    jsonl("schedule.jsonl", &|b| write_lines(b, &content.schedule.to_records()))?;
    jsonl("affinity_attendee.jsonl", &|b| write_lines(b, &inputs.attendee.to_records()))?;
    jsonl("affinity_author.jsonl", &|b| write_lines(b, &inputs.author.to_records()))?;
    jsonl("affinity_blended.jsonl", &|b| write_lines(b, &inputs.blended.to_records()))?;
    let view = render_view(inputs, content, revision);
    write_file(&dir.join("view.json"), serde_json::to_string_pretty(&view)?.as_bytes())?;
    write_file(
        &dir.join("comparison.json"),
        serde_json::to_string_pretty(&inputs.comparison)?.as_bytes(),
    )?;
    let n = inputs.dataset.papers.len();
    let table = render_stats_table(
        &participation_stats(&inputs.author_prefs, n)?,
        &participation_stats(&inputs.attendee_prefs, n)?,
    );
    let mut grid = content.schedule.render_grid(&inputs.dataset.venue);
    grid.insert_str(0, &table);
    grid.insert(table.len(), '\n');
    write_file(&dir.join("report.txt"), grid.as_bytes())?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}

/// The error chain joined with ": ", skipping causes whose text the
/// outer message already includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status: 0 success, 1 domain error, 2 usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            1
        }
    }
}
