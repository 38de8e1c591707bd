use std::fmt::Write as _;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use numeracy_core::assessment::{read_external_scores, read_responses, Grade, ItemSet, LowThreshold, ProfileSet, StatsReport};
use numeracy_core::board::{Move, StrawBoard};
use numeracy_core::rectangles::RectDiagram;
use numeracy_core::transcoder::{AnalogRepr, Code, Rendering};
use serde::{Deserialize, Serialize};

use crate::api::*;
use crate::error::{ApiError, ErrorCode};

#[derive(Debug, Parser)]
#[command(name = "workbench", version, about = "Place-value and multiplication workbench")]
pub struct Cli {
    /// Where sessions are stored.
    #[arg(long, global = true, default_value = "workbench-data")]
    pub data_dir: PathBuf,
    /// Seed for battery generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the wire form to this file instead of printing a summary.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Print the wire form instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a number between verbal, symbolic and analog codes.
    Transcode {
        /// A number word, digits, or `hundreds,tens,units`.
        input: String,
        #[arg(long, default_value = "symbolic")]
        from: Code,
        #[arg(long)]
        to: Code,
    },
    /// Derive a product from known facts.
    Derive {
        /// Rectangle as ROWSxCOLS, e.g. 8x6.
        rect: RectDiagram,
        /// Known factors, comma separated.
        #[arg(long, default_value = "2,5,10")]
        base: String,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        depth: u8,
        /// Allow ghost extensions.
        #[arg(long)]
        ghost: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_GHOST)]
        max_ghost: u8,
        /// List every derivation, best first.
        #[arg(long)]
        all: bool,
        /// How many derivations to list with --all.
        #[arg(long)]
        limit: Option<usize>,
        /// Print the derivation step by step.
        #[arg(long)]
        explain: bool,
    },
    /// Print the house of rectangles.
    House {
        #[arg(long, default_value = "2,5,10")]
        base: String,
    },
    /// Simulate straw-board moves.
    Board {
        #[command(subcommand)]
        command: BoardCommand,
    },
    /// Generate and score screening batteries.
    Battery {
        #[command(subcommand)]
        command: BatteryCommand,
    },
    /// Compare two scored cohorts.
    Cohort {
        #[command(subcommand)]
        command: CohortCommand,
    },
    /// Open, inspect and extend stored sessions.
    Session {
        #[command(subcommand)]
        command: SessionCommand,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Debug, Subcommand)]
pub enum BoardCommand {
    /// Apply moves to an empty board: add:N, remove:N, bundle, unbundle,
    /// bundle_hundred, unbundle_hundred.
    Simulate {
        moves: Vec<String>,
        /// Tie every full bundle at the end.
        #[arg(long)]
        canonicalize: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum BatteryCommand {
    /// Generate the item set for a grade.
    Generate {
        /// 1, 2mid or 2end.
        #[arg(long)]
        grade: Grade,
        #[arg(long)]
        items: Option<usize>,
    },
    /// Score a responses CSV against an item set.
    Score {
        #[arg(long)]
        items: PathBuf,
        /// CSV with student_id,subtest,item_index,answer.
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        /// CSV with student_id,score.
        #[arg(long)]
        external: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CohortCommand {
    /// Compare two scored cohorts.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fraction of the battery maximum.
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum SessionCommand {
    /// Start a session for a student on an activity.
    Open {
        #[arg(long)]
        student: String,
        #[arg(long)]
        activity: String,
        #[arg(long)]
        ts: Option<u64>,
    },
    /// Print a session's events and folded state.
    Show {
        id: String,
    },
    /// Post one event, given as JSON `{seq, kind, payload}`.
    Event {
        id: String,
        event: String,
    },
}

// ---------------------------------------------------------------------------
// Board simulation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardStep {
    #[serde(rename = "move")]
    pub action: Move,
    pub board: StrawBoard,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardRun {
    pub version: u32,
    pub steps: Vec<BoardStep>,
    pub board: StrawBoard,
    pub value: u32,
}

pub fn parse_move(token: &str) -> Result<Move, ApiError> {
    let count = |n: &str| {
        n.parse::<u32>()
            .map_err(|_| ApiError::bad_request(format!("bad straw count in {token:?}")))
    };
    match token.split_once(':') {
        Some(("add", n)) => Ok(Move::AddLoose { count: count(n)? }),
        Some(("remove", n)) => Ok(Move::RemoveLoose { count: count(n)? }),
        None => match token {
            "bundle" | "bundle_ten" => Ok(Move::BundleTen),
            "unbundle" | "unbundle_ten" => Ok(Move::UnbundleTen),
            "bundle_hundred" => Ok(Move::BundleHundred),
            "unbundle_hundred" => Ok(Move::UnbundleHundred),
            _ => Err(ApiError::bad_request(format!("unknown move {token:?}"))),
        },
        _ => Err(ApiError::bad_request(format!("unknown move {token:?}"))),
    }
}

pub fn simulate(tokens: &[String], canonicalize: bool) -> Result<BoardRun, ApiError> {
    let mut board = StrawBoard::new();
    let mut steps = Vec::new();
    let mut record = |action: Move, board: StrawBoard| {
        steps.push(BoardStep {
            action,
            board,
            value: board.total_value(),
        })
    };
    for token in tokens {
        let action = parse_move(token)?;
        board = board.apply(action)?;
        record(action, board);
    }
    if canonicalize {
        let mut b = board;
        for action in board.canonicalize().moves {
            b = b.apply(action)?;
            record(action, b);
        }
        board = b;
    }
    Ok(BoardRun {
        version: WIRE_VERSION,
        steps,
        board,
        value: board.total_value(),
    })
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

fn rendering_text(r: &Rendering) -> String {
    match r {
        Rendering::Text(s) => s.clone(),
        Rendering::Analog(a) => a.to_string(),
    }
}

fn board_line(b: &StrawBoard) -> String {
    format!("{} hundreds, {} tens, {} loose = {}", b.hundreds, b.tens, b.loose, b.total_value())
}

fn house_grid(h: &HouseResponse) -> String {
    let mut out = String::new();
    for row in h.cells.chunks(10) {
        let line: Vec<String> = row
            .iter()
            .map(|c| if c.known { format!("[{:>3}]", c.product) } else { format!(" {:>3} ", c.product) })
            .collect();
        let _ = writeln!(out, "{}", line.join(""));
    }
    out
}

fn profiles_summary(set: &ProfileSet) -> String {
    let mut out = format!("{} profiles, {} seed {}\n", set.profiles.len(), set.grade, set.seed);
    for p in &set.profiles {
        let _ = writeln!(
            out,
            "{}: {}/{} correct, {} omitted, {} low{}",
            p.student_id,
            p.total_correct(),
            p.total_max(),
            p.total_omitted(),
            p.low.len(),
            if p.at_risk { ", at risk" } else { "" }
        );
    }
    out
}

fn significance(s: bool) -> &'static str {
    if s {
        "significant"
    } else {
        "not significant"
    }
}

fn report_summary(r: &StatsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cutoff {} of the battery maximum", r.cutoff);
    let _ = writeln!(out, "group a: n={}, {:.1}% below cutoff", r.n_a, r.below_cutoff_pct_a);
    let _ = writeln!(out, "group b: n={}, {:.1}% below cutoff", r.n_b, r.below_cutoff_pct_b);
    for s in &r.subtests {
        let t = s
            .t_test
            .map(|t| format!("t={:.3} {}", t.t, significance(t.significant)))
            .unwrap_or_else(|| "t undefined".into());
        let _ = writeln!(
            out,
            "  {}: a {:.2}±{:.2}, b {:.2}±{:.2}, {t}",
            s.kind, s.group_a.mean, s.group_a.sd, s.group_b.mean, s.group_b.sd
        );
    }
    match r.total_t_test {
        Some(t) => {
            let _ = writeln!(out, "total: t={:.3}, df={}, critical {:.3}, {}", t.t, t.df, t.critical, significance(t.significant));
        }
        None => out.push_str("total: t undefined\n"),
    }
    if let Some(a) = r.alpha {
        let _ = writeln!(out, "alpha {a:.3}");
    }
    if let Some(c) = r.correlation {
        let _ = writeln!(out, "r={:.3} with the external score, n={}, {}", c.r, c.n, significance(c.significant));
    }
    out
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| {
        ApiError::new(
            ErrorCode::Io,
            format!("cannot read {}: {e}", path.display()),
            serde_json::json!({ "path": path.display().to_string() }),
        )
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ApiError> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

fn io(e: std::io::Error) -> ApiError {
    ApiError::new(ErrorCode::Io, e.to_string(), serde_json::json!({}))
}

struct Emitter<'a> {
    output: Option<&'a Path>,
    json: bool,
    out: &'a mut dyn Write,
}

impl Emitter<'_> {
    fn emit<T: Serialize>(&mut self, value: &T, summary: impl FnOnce(&T) -> String) -> Result<(), ApiError> {
        if let Some(path) = self.output {
            return std::fs::write(path, to_wire(value)).map_err(io);
        }
        let text = if self.json { to_wire(value) } else { summary(value) };
        self.out.write_all(text.as_bytes()).map_err(io)
    }
}

/// Runs one command, writing to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), ApiError> {
    let mut emitter = Emitter {
        output: cli.output.as_deref(),
        json: cli.json,
        out,
    };
    let e = &mut emitter;
    match cli.command {
        Command::Transcode { input, from, to } => {
            let rendering = match from {
                Code::Analog => Rendering::Analog(input.parse::<AnalogRepr>()?),
                _ => Rendering::Text(input),
            };
            let req = TranscodeRequest {
                value: None,
                from: Some(from),
                rendering: Some(rendering),
                to,
            };
            e.emit(&Workbench::in_memory().transcode(&req)?, |r| format!("{}\n", rendering_text(&r.rendering)))
        }
        Command::Derive {
            rect,
            base,
            depth,
            ghost,
            max_ghost,
            all,
            limit,
            explain,
        } => {
            let query = DeriveRequest {
                rect,
                base: parse_factors(&base)?,
                max_depth: depth,
                ghost,
                max_ghost,
            };
            let wb = Workbench::in_memory();
            if all {
                let req = EnumerateRequest {
                    query,
                    limit,
                    candidate: None,
                };
                e.emit(&wb.enumerate(&req)?, |r| {
                    let mut s = String::new();
                    for d in &r.derivations {
                        let _ = writeln!(s, "{}", d.headline());
                    }
                    let _ = writeln!(s, "{} derivations, minimal cost {}", r.count, r.min_cost);
                    s
                })
            } else {
                e.emit(&wb.derive(&query)?, |r| {
                    if explain {
                        r.derivation.explain()
                    } else {
                        format!("{}\n", r.headline)
                    }
                })
            }
        }
        Command::House { base } => e.emit(&Workbench::in_memory().house(&parse_factors(&base)?)?, house_grid),
        Command::Board {
            command: BoardCommand::Simulate { moves, canonicalize },
        } => e.emit(&simulate(&moves, canonicalize)?, |run| {
            let mut s = String::new();
            for step in &run.steps {
                let name = serde_json::to_value(step.action).ok();
                let kind = name.as_ref().and_then(|v| v["kind"].as_str()).unwrap_or("move");
                let _ = writeln!(s, "{kind}: {}", board_line(&step.board));
            }
            let _ = writeln!(s, "{}", board_line(&run.board));
            s
        }),
        Command::Battery {
            command: BatteryCommand::Generate { grade, items },
        } => {
            let req = GenerateRequest {
                grade,
                seed: cli.seed.unwrap_or(0),
                items_per_subtest: items,
            };
            e.emit(&Workbench::in_memory().generate(&req)?, |set: &ItemSet| {
                format!(
                    "{} seed {}: {} subtests, {} items\n",
                    set.grade,
                    set.seed,
                    set.subtests.len(),
                    set.total_items()
                )
            })
        }
        Command::Battery {
            command:
                BatteryCommand::Score {
                    items,
                    responses,
                    threshold,
                    external,
                },
        } => {
            let req = ScoreRequest {
                items: read_json(&items)?,
                responses: read_responses(read_file(&responses)?.as_bytes())?,
                low_threshold: threshold.map(LowThreshold::new).transpose()?.unwrap_or_default(),
                external_scores: match external {
                    Some(path) => read_external_scores(read_file(&path)?.as_bytes())?,
                    None => Default::default(),
                },
            };
            e.emit(&Workbench::in_memory().score(&req)?, profiles_summary)
        }
        Command::Cohort {
            command: CohortCommand::Compare { a, b, cutoff },
        } => {
            let req = CohortRequest {
                a: read_json(&a)?,
                b: read_json(&b)?,
                cutoff,
            };
            e.emit(&Workbench::in_memory().compare(&req)?, report_summary)
        }
        Command::Session { command } => {
            let wb = Workbench::with_data_dir(&cli.data_dir)?;
            let view = match command {
                SessionCommand::Open { student, activity, ts } => wb.open_session(&OpenSessionRequest {
                    student_ref: student,
                    activity_id: activity,
                    ts,
                })?,
                SessionCommand::Show { id } => wb.session(&id)?,
                SessionCommand::Event { id, event } => wb.post_event(&id, &serde_json::from_str(&event)?)?,
            };
            e.emit(&view, |v| {
                let s = &v.state;
                format!(
                    "session {} ({}, {}): {} events{}\n{}\n",
                    s.session_id,
                    s.student_ref,
                    s.activity_id,
                    v.events,
                    if s.closed { ", closed" } else { "" },
                    board_line(&s.board)
                )
            })
        }
        Command::Serve { bind } => {
            let wb = Arc::new(Workbench::with_data_dir(&cli.data_dir)?);
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            runtime.block_on(crate::service::serve(bind, wb))
        }
    }
}
