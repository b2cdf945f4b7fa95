//! Join-path inference over the schema graph.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::SchemaGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinStep {
    /// Already in the plan when this step is taken.
    pub left_table: usize,
    pub right_table: usize,
    pub left_column: usize,
    pub right_column: usize,
}

impl JoinStep {
    pub fn column_pair(&self) -> (usize, usize) {
        (
            self.left_column.min(self.right_column),
            self.left_column.max(self.right_column),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinPlan {
    /// Tables in join order.
    pub tables: Vec<usize>,
    pub steps: Vec<JoinStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JoinError {
    #[error("table {table} cannot be reached from the other mentioned tables")]
    Unreachable { table: usize },
    #[error("table {table} is not a vertex of the schema graph")]
    UnknownTable { table: usize },
}

/// Connect `mentioned` tables: nothing to do for fewer than two, the BFS
/// shortest path for two, and for more the nearest-terminal heuristic
/// (grow a tree from the smallest table index, repeatedly attaching the
/// closest unconnected terminal by a shortest path). Edges are unweighted.
pub fn infer_joins(
    mentioned: &BTreeSet<usize>,
    graph: &SchemaGraph,
) -> Result<JoinPlan, JoinError> {
    if let Some(&t) = mentioned.iter().find(|&&t| t >= graph.vertices) {
        return Err(JoinError::UnknownTable { table: t });
    }
    let mut terminals = mentioned.iter().copied();
    let Some(first) = terminals.next() else {
        return Ok(JoinPlan::default());
    };
    let mut plan = JoinPlan {
        tables: vec![first],
        steps: Vec::new(),
    };
    let mut in_tree = vec![false; graph.vertices];
    in_tree[first] = true;
    let mut pending: Vec<usize> = terminals.collect();

    while !pending.is_empty() {
        // Multi-source BFS from the current tree.
        let mut dist = vec![usize::MAX; graph.vertices];
        let mut parent: Vec<Option<(usize, crate::graph::JoinEdge)>> = vec![None; graph.vertices];
        let mut queue = VecDeque::new();
        for &t in &plan.tables {
            dist[t] = 0;
            queue.push_back(t);
        }
        while let Some(v) = queue.pop_front() {
            for (n, edge) in graph.neighbours(v) {
                if dist[n] == usize::MAX {
                    dist[n] = dist[v] + 1;
                    parent[n] = Some((v, edge));
                    queue.push_back(n);
                }
            }
        }
        let (pos, &target) = pending
            .iter()
            .enumerate()
            .min_by_key(|(_, &t)| (dist[t], t))
            .expect("pending terminals");
        if dist[target] == usize::MAX {
            return Err(JoinError::Unreachable { table: target });
        }
        pending.remove(pos);
        let mut path = Vec::new();
        let mut v = target;
        while !in_tree[v] {
            let (p, edge) = parent[v].expect("bfs parent");
            path.push(JoinStep {
                left_table: p,
                right_table: v,
                left_column: edge.column_a,
                right_column: edge.column_b,
            });
            v = p;
        }
        for step in path.into_iter().rev() {
            in_tree[step.right_table] = true;
            plan.tables.push(step.right_table);
            plan.steps.push(step);
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_schema_graph;

    #[test]
    fn french_pets_bridges_through_has_pet() {
        let schema = fixtures::pets_schema();
        let g = build_schema_graph(&schema);
        let plan = infer_joins(&BTreeSet::from([0, 2]), &g).unwrap();
        assert_eq!(plan.tables, vec![0, 1, 2]);
        assert_eq!(plan.steps.len(), 2);
        let names: Vec<String> = plan
            .steps
            .iter()
            .map(|s| {
                format!(
                    "{}={}",
                    schema.qualified_name(s.left_column),
                    schema.qualified_name(s.right_column)
                )
            })
            .collect();
        assert_eq!(
            names,
            vec!["Student.StuID=Has_Pet.StuID", "Has_Pet.PetID=Pet.PetID"]
        );
    }

    #[test]
    fn trivial_plans() {
        let g = build_schema_graph(&fixtures::pets_schema());
        assert_eq!(
            infer_joins(&BTreeSet::new(), &g).unwrap(),
            JoinPlan::default()
        );
        let one = infer_joins(&BTreeSet::from([0]), &g).unwrap();
        assert_eq!(one.tables, vec![0]);
        assert!(one.steps.is_empty());
    }

    #[test]
    fn path_graph_steiner_includes_bridges() {
        let g = build_schema_graph(&fixtures::path_graph().schema);
        let plan = infer_joins(&BTreeSet::from([0, 2, 4]), &g).unwrap();
        let mut tables = plan.tables.clone();
        tables.sort();
        assert_eq!(tables, vec![0, 1, 2, 3, 4]);
        assert_eq!(plan.steps.len(), 4);
    }

    #[test]
    fn disconnected_terminal_is_named() {
        let g = SchemaGraph::new(3, Vec::new());
        assert_eq!(
            infer_joins(&BTreeSet::from([0, 2]), &g),
            Err(JoinError::Unreachable { table: 2 })
        );
    }

    #[test]
    fn self_loops_are_never_followed() {
        let schema = fixtures::employee_schema();
        let g = build_schema_graph(&schema);
        let plan = infer_joins(&BTreeSet::from([0, 1]), &g).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_ne!(plan.steps[0].left_table, plan.steps[0].right_table);
    }
}
