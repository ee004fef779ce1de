//! Line-oriented operation scripts.
//!
//! ```text
//! # comment
//! build (()(()))
//! insert 1 1 2      # new child of node 1 adopting its children 1..=2
//! insert 0 1 1      # 0 names the virtual parent of the root
//! delete 4
//! q lca 3 5
//! ```
//!
//! Each query prints `name args = answer`; `build` prints the node count and
//! `insert` the position of the new node. Failing lines are reported with
//! their line number and, unless aborting, the script carries on.

use thiserror::Error;

use crate::query::{NodeId, Query};
use crate::tree::{parse_bp, DynamicTree, TreeConfig, TreeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Build(Vec<bool>),
    Insert { y: Option<NodeId>, l: u64, r: u64 },
    Delete(NodeId),
    Ask(Query),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Parses one line; `Ok(None)` for blank lines and comments.
pub fn parse_line(text: &str) -> Result<Option<Command>, String> {
    let text = text.split('#').next().unwrap_or("").trim();
    let Some((word, rest)) = text.split_once(char::is_whitespace).or(Some((text, ""))).filter(|_| !text.is_empty())
    else {
        return Ok(None);
    };
    let numbers = |want: usize| -> Result<Vec<u64>, String> {
        let v = rest
            .split_whitespace()
            .map(|w| w.parse::<u64>().map_err(|_| format!("bad number '{w}'")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.len() != want {
            return Err(format!("'{word}' takes {want} argument(s), got {}", v.len()));
        }
        Ok(v)
    };
    let cmd = match word {
        "build" => Command::Build(parse_bp(rest).map_err(|e| e.to_string())?),
        "insert" => {
            let v = numbers(3)?;
            let y = (v[0] != 0).then_some(v[0] as NodeId);
            Command::Insert { y, l: v[1], r: v[2] }
        }
        "delete" => Command::Delete(numbers(1)?[0] as NodeId),
        "q" => Command::Ask(rest.parse()?),
        other => return Err(format!("unknown command '{other}'")),
    };
    Ok(Some(cmd))
}

/// A tree plus the configuration used when `build` replaces it.
pub struct Session {
    pub tree: DynamicTree,
    cfg: TreeConfig,
}

impl Session {
    pub fn new(cfg: TreeConfig) -> Result<Self, TreeError> {
        Ok(Self { tree: DynamicTree::new(cfg)?, cfg })
    }

    pub fn with_tree(tree: DynamicTree) -> Self {
        let cfg = *tree.config();
        Self { tree, cfg }
    }

    /// Executes one command, returning its output line if it has one.
    pub fn apply(&mut self, cmd: &Command) -> Result<Option<String>, TreeError> {
        Ok(match cmd {
            Command::Build(bits) => {
                self.tree = DynamicTree::from_bp(bits, self.cfg)?;
                Some(format!("nodes = {}", self.tree.node_count()))
            }
            &Command::Insert { y, l, r } => {
                let z = self.tree.insert_node(y, l, r)?;
                Some(format!("insert {} {l} {r} = {z}", y.unwrap_or(0)))
            }
            &Command::Delete(x) => {
                self.tree.delete_node(x)?;
                None
            }
            Command::Ask(q) => Some(format!("{q} = {}", self.tree.query(q)?)),
        })
    }
}

/// Output of a script run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub output: Vec<String>,
    pub errors: Vec<ScriptError>,
    /// Set when execution stopped at the first error.
    pub aborted: bool,
}

/// Runs a whole script.
pub fn run(session: &mut Session, text: &str, abort_on_error: bool) -> Transcript {
    let mut out = Transcript::default();
    for (idx, line) in text.lines().enumerate() {
        let result = parse_line(line).and_then(|cmd| match cmd {
            Some(cmd) => session.apply(&cmd).map_err(|e| e.to_string()),
            None => Ok(None),
        });
        match result {
            Ok(Some(s)) => out.output.push(s),
            Ok(None) => {}
            Err(message) => {
                out.errors.push(ScriptError { line: idx + 1, message });
                if abort_on_error {
                    out.aborted = true;
                    break;
                }
            }
        }
    }
    out
}
