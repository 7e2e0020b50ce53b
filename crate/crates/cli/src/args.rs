use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use projabs::abstraction::Framework;

/// Projection abstractions of planning tasks and MDPs.
#[derive(Debug, Parser)]
#[command(name = "projabs", version)]
pub struct Cli {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// PDDL domain file (needs --problem).
    #[arg(long, global = true, requires = "problem", conflicts_with = "graph")]
    pub domain: Option<PathBuf>,
    /// PDDL problem file (needs --domain).
    #[arg(long, global = true, requires = "domain")]
    pub problem: Option<PathBuf>,
    /// Explicit MDP in graph JSON.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Discount factor in [0, 1) as a rational or decimal. Defaults to 9/10,
    /// or to the graph file's own value.
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    /// Value iteration tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub epsilon: f64,
    /// Back up goal states instead of fixing their value at 0.
    #[arg(long, global = true)]
    pub no_absorb_goals: bool,
    /// Overrides the expansion limit on reachable states.
    #[arg(long, global = true, env = "PROJABS_STATE_CAP", hide_env_values = true)]
    pub state_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize the grounded task.
    Ground,
    /// Expand the reachable state space.
    Expand,
    /// Partition the state space by a pattern and build the planning abstraction.
    Abstract {
        #[arg(long)]
        pattern: String,
    },
    /// Run abstraction checks and print their reports.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[arg(long)]
        pattern: String,
        /// Model compared by `equiv`.
        #[arg(long, default_value = "armdp")]
        framework: Framework,
    },
    /// Build or query pattern databases.
    Pdb {
        #[command(subcommand)]
        action: PdbCommand,
    },
    /// Solve a model or search for a plan.
    Solve {
        #[arg(value_enum)]
        solver: Solver,
        /// Solve the abstraction by this pattern instead of the concrete model.
        #[arg(long)]
        pattern: Option<String>,
        /// Solve this framework's abstraction rather than the projected task.
        #[arg(long, requires = "pattern")]
        framework: Option<Framework>,
        /// Pattern database guiding A*.
        #[arg(long, conflicts_with = "pattern")]
        pdb: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Wfa,
    Armdp,
    Abpmdp,
    /// Linearity, representative independence and absence of ambiguity.
    Props,
    /// A framework model against the projected task.
    Equiv,
}

#[derive(Debug, Subcommand)]
pub enum PdbCommand {
    /// Write the database of a pattern in the text format.
    Build {
        #[arg(long)]
        pattern: String,
    },
    /// Look up a state (the initial state by default).
    Query {
        #[arg(long)]
        pdb: PathBuf,
        /// Comma-separated true facts.
        #[arg(long)]
        state: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Vi,
    Ivi,
    Astar,
}
