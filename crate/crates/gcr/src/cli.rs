use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcr_core::emit::{code_behind_step, extract_all, run_program};
use gcr_core::tree::{Direction, SearchScope};
use gcr_core::{InteractionId, StepId};
use serde::Serialize;

use crate::ops::{
    self, parse_assignment, ComponentSummary, InteractRequest, ModifyRequest, Project,
    ServiceError, ServiceResult, TreeOp,
};
use crate::server;

pub const DEFAULT_PROJECT: &str = "project.gcr";

#[derive(Debug, Parser)]
#[command(
    name = "gcr",
    version,
    about = "Build programs by interacting with components"
)]
pub struct Cli {
    /// Project file to operate on.
    #[arg(long, global = true, env = "GCR_PROJECT", default_value = DEFAULT_PROJECT)]
    pub project: PathBuf,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Create a project file bound to a component library.
    New {
        path: PathBuf,
        #[arg(long)]
        library: PathBuf,
    },
    #[command(subcommand)]
    Components(ComponentsCmd),
    /// Run a component and add its steps.
    Interact {
        #[arg(long)]
        component: String,
        #[arg(long)]
        anchor: Option<u64>,
        #[arg(long = "set", value_parser = parse_assignment)]
        set: Vec<(String, String)>,
    },
    /// Change the values of an earlier interaction.
    Modify {
        #[arg(long)]
        interaction: u64,
        #[arg(long = "set", value_parser = parse_assignment)]
        set: Vec<(String, String)>,
    },
    /// Remove an interaction and its steps.
    DeleteInteraction {
        #[arg(long)]
        interaction: u64,
    },
    #[command(subcommand)]
    Goal(GoalCmd),
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Print or extract the generated program.
    Emit {
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value = "main")]
        goal: String,
        /// Write every goal plus the span map into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show the code behind one step.
    Code {
        #[arg(long)]
        step: u64,
    },
    /// Move the time machine head.
    Replay {
        #[arg(long)]
        to: usize,
    },
    /// List recorded events.
    Timeline,
    /// Play the construction history as captions.
    Movie {
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long, default_value_t = 0)]
        pace_ms: u64,
    },
    /// Build and run the program with the profile's toolchain.
    Run {
        #[arg(long)]
        profile: Option<String>,
    },
    /// Serve the HTTP API for this project.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ComponentsCmd {
    List {
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value = "")]
        query: String,
    },
    Show {
        id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum GoalCmd {
    Add { name: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum TreeCmd {
    Show {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    #[command(subcommand)]
    Op(OpCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirArg {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScopeArg {
    Name,
    Data,
}

#[derive(Debug, Args)]
pub struct Steps {
    #[arg(long = "step", required = true)]
    steps: Vec<u64>,
}

impl Steps {
    fn ids(&self) -> Vec<StepId> {
        self.steps.iter().map(|s| StepId(*s)).collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum OpCmd {
    AddComment {
        #[arg(long)]
        parent: u64,
        #[arg(long)]
        label: String,
    },
    Edit {
        #[arg(long)]
        step: u64,
        #[arg(long)]
        label: String,
    },
    Delete(Steps),
    Move {
        #[arg(long)]
        step: u64,
        #[arg(long, value_enum)]
        direction: DirArg,
    },
    Enable(Steps),
    Disable(Steps),
    Cut(Steps),
    Copy(Steps),
    Paste {
        #[arg(long)]
        target: u64,
    },
    Search {
        #[arg(long, default_value = "")]
        query: String,
        #[arg(long, value_enum, default_value_t = ScopeArg::Name)]
        scope: ScopeArg,
    },
}

impl OpCmd {
    fn to_op(&self) -> TreeOp {
        match self {
            OpCmd::AddComment { parent, label } => TreeOp::AddComment {
                parent: StepId(*parent),
                label: label.clone(),
            },
            OpCmd::Edit { step, label } => TreeOp::Edit {
                step: StepId(*step),
                label: label.clone(),
            },
            OpCmd::Delete(s) => TreeOp::Delete { steps: s.ids() },
            OpCmd::Move { step, direction } => TreeOp::Move {
                step: StepId(*step),
                direction: match direction {
                    DirArg::Up => Direction::Up,
                    DirArg::Down => Direction::Down,
                },
            },
            OpCmd::Enable(s) => TreeOp::Enable { steps: s.ids() },
            OpCmd::Disable(s) => TreeOp::Disable { steps: s.ids() },
            OpCmd::Cut(s) => TreeOp::Cut { steps: s.ids() },
            OpCmd::Copy(s) => TreeOp::Copy { steps: s.ids() },
            OpCmd::Paste { target } => TreeOp::Paste {
                target: StepId(*target),
            },
            OpCmd::Search { query, scope } => TreeOp::Search {
                query: query.clone(),
                scope: match scope {
                    ScopeArg::Name => SearchScope::Name,
                    ScopeArg::Data => SearchScope::Data,
                },
            },
        }
    }
}

struct Output<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Output<'_> {
    /// JSON when requested, otherwise the text form.
    fn emit<T: Serialize>(
        &mut self,
        value: &T,
        text: impl FnOnce() -> String,
    ) -> std::io::Result<()> {
        if self.json {
            writeln!(
                self.out,
                "{}",
                serde_json::to_string_pretty(value).expect("serializable")
            )
        } else {
            write!(self.out, "{}", text())
        }
    }
}

fn ids_text(ids: &[StepId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs the CLI with explicit streams; returns the exit status.
pub fn run_with_io(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let mut output = Output {
        out,
        json: cli.json,
    };
    match execute(&cli, &mut output) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            1
        }
    }
}

fn execute(cli: &Cli, o: &mut Output<'_>) -> ServiceResult<()> {
    let io = |e: std::io::Error| ServiceError::BadRequest(e.to_string());
    if let Cmd::New { path, library } = &cli.command {
        let project = Project::create(path, library)?;
        return o
            .emit(
                &serde_json::json!({ "project": path, "head": project.ws.head() }),
                || format!("created {}\n", path.display()),
            )
            .map_err(io);
    }
    let mut project = Project::open(&cli.project)?;
    match &cli.command {
        Cmd::New { .. } => unreachable!(),
        Cmd::Components(ComponentsCmd::List { domain, query }) => {
            let list: Vec<ComponentSummary> = project
                .ws
                .library()
                .find_components(domain.as_deref(), query)?
                .into_iter()
                .map(ComponentSummary::from)
                .collect();
            o.emit(&list, || {
                list.iter()
                    .map(|c| format!("{}\t{}\t{}\n", c.id, c.name, c.domain))
                    .collect()
            })
        }
        Cmd::Components(ComponentsCmd::Show { id }) => {
            let c = project
                .ws
                .library()
                .get(id)
                .ok_or_else(|| gcr_core::EngineError::UnknownComponent(id.clone()))?;
            o.emit(c, || c.to_file_string())
        }
        Cmd::Interact {
            component,
            anchor,
            set,
        } => {
            let req = InteractRequest {
                component: component.clone(),
                anchor: anchor.map(StepId),
                values: set.iter().cloned().collect::<BTreeMap<_, _>>(),
            };
            let res = ops::interact(&mut project, &req)?;
            o.emit(&res, || {
                let steps: Vec<StepId> = res.steps.iter().map(|s| s.id).collect();
                format!(
                    "interaction {} steps {}\n",
                    res.interaction,
                    ids_text(&steps)
                )
            })
        }
        Cmd::Modify { interaction, set } => {
            let req = ModifyRequest {
                values: set.iter().cloned().collect(),
            };
            let res = ops::modify(&mut project, InteractionId(*interaction), &req)?;
            o.emit(&res, || {
                format!("modified interaction {}\n", res.interaction)
            })
        }
        Cmd::DeleteInteraction { interaction } => {
            ops::delete_interaction(&mut project, InteractionId(*interaction))?;
            o.emit(&serde_json::json!({ "deleted": interaction }), || {
                format!("deleted interaction {interaction}\n")
            })
        }
        Cmd::Goal(GoalCmd::Add { name }) => {
            let res = ops::apply_tree_op(&mut project, &TreeOp::AddGoal { name: name.clone() })?;
            o.emit(&res, || {
                format!("goal {name} steps {}\n", ids_text(&res.steps))
            })
        }
        Cmd::Tree(TreeCmd::Show { format }) => {
            let view = ops::tree_view(&project.ws);
            match format {
                Format::Json => writeln!(
                    o.out,
                    "{}",
                    serde_json::to_string_pretty(&view).expect("serializable")
                ),
                Format::Text => o.emit(&view, || ops::tree_text(&project.ws)),
            }
        }
        Cmd::Tree(TreeCmd::Op(op)) => {
            let res = ops::apply_tree_op(&mut project, &op.to_op())?;
            o.emit(&res, || match &res.hits {
                Some(hits) => format!("{}\n", ids_text(hits)),
                None if res.steps.is_empty() => "ok\n".into(),
                None => format!("steps {}\n", ids_text(&res.steps)),
            })
        }
        Cmd::Emit { profile, goal, out } => {
            let profile = project.profile(profile.as_deref())?;
            match out {
                Some(dir) => {
                    let program = extract_all(project.ws.state(), &profile, dir)?;
                    o.emit(&program, || {
                        program
                            .files
                            .iter()
                            .map(|f| format!("wrote {}\n", dir.join(&f.path).display()))
                            .collect()
                    })
                }
                None => {
                    let program = project.ws.emit(goal, &profile)?;
                    o.emit(&program, || program.files[0].text.clone())
                }
            }
        }
        Cmd::Code { step } => {
            let code = code_behind_step(project.ws.state(), StepId(*step))?;
            o.emit(&serde_json::json!({ "step": step, "code": code }), || {
                if code.is_empty() {
                    String::new()
                } else {
                    format!("{code}\n")
                }
            })
        }
        Cmd::Replay { to } => {
            let head = ops::seek(&mut project, *to)?;
            o.emit(&serde_json::json!({ "head": head }), || {
                format!("head {head}\n")
            })
        }
        Cmd::Timeline => {
            let tl = project.ws.timeline();
            let events = tl.events();
            o.emit(
                &serde_json::json!({ "head": tl.head(), "length": tl.len(), "events": events }),
                || {
                    let mut s = format!("head {} of {}\n", tl.head(), tl.len());
                    for e in events {
                        s.push_str(&format!("{} {}\n", e.index, e.command.kind()));
                    }
                    s
                },
            )
        }
        Cmd::Movie { from, pace_ms } => {
            let frames = project.ws.movie(*from)?;
            if o.json {
                return o.emit(&frames, String::new).map_err(io);
            }
            for f in &frames {
                writeln!(o.out, "{} {}", f.event.index, f.caption).map_err(io)?;
                if *pace_ms > 0 {
                    std::thread::sleep(Duration::from_millis(*pace_ms));
                }
            }
            Ok(())
        }
        Cmd::Run { profile } => {
            let profile = project.profile(profile.as_deref())?;
            let program = project.ws.emit_all(&profile)?;
            let run = run_program(&program, &profile)?;
            o.emit(&run, || run.stdout.clone())
        }
        Cmd::Serve { port, host } => {
            let addr = format!("{host}:{port}");
            let running = server::start(project, &addr)?;
            writeln!(o.out, "listening on http://{}", running.addr).map_err(io)?;
            o.out.flush().map_err(io)?;
            running.wait();
            Ok(())
        }
    }
    .map_err(io)
}
