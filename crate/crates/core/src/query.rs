//! The tree-query vocabulary shared by the succinct tree, the oracle and the
//! script runner.

use std::fmt;
use std::str::FromStr;

/// A node is named by the 1-based position of its opening parenthesis.
pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    Depth(NodeId),
    Height(NodeId),
    NumDescendants(NodeId),
    Parent(NodeId),
    Lca(NodeId, NodeId),
    LevelAncestor(NodeId, u64),
    LevelNext(NodeId),
    LevelPrev(NodeId),
    LevelLmost(u64),
    LevelRmost(u64),
    Degree(NodeId),
    ChildRank(NodeId),
    ChildSelect(NodeId, u64),
    FirstChild(NodeId),
    LastChild(NodeId),
    NextSibling(NodeId),
    PrevSibling(NodeId),
}

/// Query names in the order of [`Query::all_for`].
pub const QUERY_NAMES: [&str; 17] = [
    "depth",
    "height",
    "num_descendants",
    "parent",
    "lca",
    "level_ancestor",
    "level_next",
    "level_prev",
    "level_lmost",
    "level_rmost",
    "degree",
    "child_rank",
    "child_select",
    "first_child",
    "last_child",
    "next_sibling",
    "prev_sibling",
];

impl Query {
    pub fn name(&self) -> &'static str {
        use Query::*;
        match self {
            Depth(_) => "depth",
            Height(_) => "height",
            NumDescendants(_) => "num_descendants",
            Parent(_) => "parent",
            Lca(..) => "lca",
            LevelAncestor(..) => "level_ancestor",
            LevelNext(_) => "level_next",
            LevelPrev(_) => "level_prev",
            LevelLmost(_) => "level_lmost",
            LevelRmost(_) => "level_rmost",
            Degree(_) => "degree",
            ChildRank(_) => "child_rank",
            ChildSelect(..) => "child_select",
            FirstChild(_) => "first_child",
            LastChild(_) => "last_child",
            NextSibling(_) => "next_sibling",
            PrevSibling(_) => "prev_sibling",
        }
    }

    pub fn args(&self) -> Vec<u64> {
        use Query::*;
        match *self {
            Depth(x) | Height(x) | NumDescendants(x) | Parent(x) | LevelNext(x) | LevelPrev(x)
            | Degree(x) | ChildRank(x) | FirstChild(x) | LastChild(x) | NextSibling(x)
            | PrevSibling(x) => vec![x as u64],
            Lca(x, y) => vec![x as u64, y as u64],
            LevelAncestor(x, i) | ChildSelect(x, i) => vec![x as u64, i],
            LevelLmost(d) | LevelRmost(d) => vec![d],
        }
    }

    /// Builds a query from its name and numeric arguments.
    pub fn from_parts(name: &str, args: &[u64]) -> Result<Query, String> {
        use Query::*;
        let want = match name {
            "lca" | "level_ancestor" | "child_select" => 2,
            _ if QUERY_NAMES.contains(&name) => 1,
            _ => return Err(format!("unknown query '{name}'")),
        };
        if args.len() != want {
            return Err(format!("query '{name}' takes {want} argument(s), got {}", args.len()));
        }
        let x = args[0] as usize;
        Ok(match name {
            "depth" => Depth(x),
            "height" => Height(x),
            "num_descendants" => NumDescendants(x),
            "parent" => Parent(x),
            "lca" => Lca(x, args[1] as usize),
            "level_ancestor" => LevelAncestor(x, args[1]),
            "level_next" => LevelNext(x),
            "level_prev" => LevelPrev(x),
            "level_lmost" => LevelLmost(args[0]),
            "level_rmost" => LevelRmost(args[0]),
            "degree" => Degree(x),
            "child_rank" => ChildRank(x),
            "child_select" => ChildSelect(x, args[1]),
            "first_child" => FirstChild(x),
            "last_child" => LastChild(x),
            "next_sibling" => NextSibling(x),
            "prev_sibling" => PrevSibling(x),
            _ => unreachable!(),
        })
    }

    /// Every single-node query on `x` plus the two-argument queries with the
    /// given extra arguments.
    pub fn all_for(x: NodeId, other: NodeId, i: u64) -> Vec<Query> {
        use Query::*;
        vec![
            Depth(x),
            Height(x),
            NumDescendants(x),
            Parent(x),
            Lca(x, other),
            LevelAncestor(x, i),
            LevelNext(x),
            LevelPrev(x),
            LevelLmost(i),
            LevelRmost(i),
            Degree(x),
            ChildRank(x),
            ChildSelect(x, i),
            FirstChild(x),
            LastChild(x),
            NextSibling(x),
            PrevSibling(x),
        ]
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for a in self.args() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for Query {
    type Err = String;

    /// Parses `name arg...`, e.g. `lca 2 4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let name = words.next().ok_or("empty query")?;
        let args = words
            .map(|w| w.parse::<u64>().map_err(|_| format!("bad argument '{w}'")))
            .collect::<Result<Vec<_>, _>>()?;
        Query::from_parts(name, &args)
    }
}

/// Answer to a [`Query`]: a number, or a node that may be absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Count(u64),
    Node(Option<NodeId>),
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Count(n) => write!(f, "{n}"),
            Answer::Node(Some(x)) => write!(f, "{x}"),
            Answer::Node(None) => f.write_str("NONE"),
        }
    }
}
