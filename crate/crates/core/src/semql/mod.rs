//! SemQL intermediate representation: grammar, trees, derivation state and
//! the converter from gold SQL.

pub mod convert;
pub mod grammar;
pub mod state;
pub mod tree;

pub use convert::{query_to_semql, sql_to_semql, ConvertedQuery, Unsupported};
pub use grammar::{grammar_table, productions, Kind, Production};
pub use state::{check_legality, valid_next_actions, GrammarError, GrammarState, PathStep, Slot};
pub use tree::{
    Action, AggKind, AggNode, FilterNode, Node, OrderNode, QueryNode, SemQlTree, SuperlativeNode,
    Tail, TreeError,
};
