//! Undirected join graph over tables, one edge per foreign key.

use serde::{Deserialize, Serialize};

use crate::schema::DatabaseSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinEdge {
    pub table_a: usize,
    pub table_b: usize,
    pub column_a: usize,
    pub column_b: usize,
}

impl JoinEdge {
    pub fn is_self_loop(&self) -> bool {
        self.table_a == self.table_b
    }

    /// The same edge seen from `table`'s side, if it touches `table`.
    pub fn oriented_from(&self, table: usize) -> Option<JoinEdge> {
        if self.table_a == table {
            Some(*self)
        } else if self.table_b == table {
            Some(JoinEdge {
                table_a: self.table_b,
                table_b: self.table_a,
                column_a: self.column_b,
                column_b: self.column_a,
            })
        } else {
            None
        }
    }

    /// Unordered column pair, for comparing joins regardless of direction.
    pub fn column_pair(&self) -> (usize, usize) {
        (
            self.column_a.min(self.column_b),
            self.column_a.max(self.column_b),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaGraph {
    pub vertices: usize,
    pub edges: Vec<JoinEdge>,
    /// Per table: indices into `edges`, self-loops excluded.
    adjacency: Vec<Vec<usize>>,
}

impl SchemaGraph {
    pub fn new(vertices: usize, edges: Vec<JoinEdge>) -> Self {
        let mut adjacency = vec![Vec::new(); vertices];
        for (i, e) in edges.iter().enumerate() {
            if e.is_self_loop() {
                continue;
            }
            adjacency[e.table_a].push(i);
            adjacency[e.table_b].push(i);
        }
        SchemaGraph {
            vertices,
            edges,
            adjacency,
        }
    }

    /// Neighbouring tables of `table`, each with the first edge (in foreign-key
    /// order) that reaches it. Self-loops never appear.
    pub fn neighbours(&self, table: usize) -> Vec<(usize, JoinEdge)> {
        let mut out: Vec<(usize, JoinEdge)> = Vec::new();
        for &i in &self.adjacency[table] {
            let e = self.edges[i].oriented_from(table).expect("adjacent edge");
            if !out.iter().any(|(t, _)| *t == e.table_b) {
                out.push((e.table_b, e));
            }
        }
        out
    }

    /// First edge between two distinct tables, oriented `from -> to`.
    pub fn edge_between(&self, from: usize, to: usize) -> Option<JoinEdge> {
        self.adjacency.get(from)?.iter().find_map(|&i| {
            let e = self.edges[i].oriented_from(from)?;
            (e.table_b == to).then_some(e)
        })
    }
}

pub fn build_schema_graph(schema: &DatabaseSchema) -> SchemaGraph {
    let edges = schema
        .foreign_keys
        .iter()
        .filter_map(|&(from, to)| {
            let ta = schema.column_table(from)?;
            let tb = schema.column_table(to)?;
            Some(JoinEdge {
                table_a: ta,
                table_b: tb,
                column_a: from,
                column_b: to,
            })
        })
        .collect();
    SchemaGraph::new(schema.tables.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pets_graph_has_two_bridge_edges() {
        let schema = fixtures::pets_schema();
        let g = build_schema_graph(&schema);
        assert_eq!(g.vertices, 3);
        let pairs: Vec<_> = g.edges.iter().map(|e| (e.table_a, e.table_b)).collect();
        // Has_Pet -> Student, Has_Pet -> Pets
        assert_eq!(pairs, vec![(1, 0), (1, 2)]);
        for e in &g.edges {
            assert_eq!(schema.column_table(e.column_a), Some(e.table_a));
            assert_eq!(schema.column_table(e.column_b), Some(e.table_b));
        }
    }

    #[test]
    fn single_table_schema_has_no_edges() {
        let g = build_schema_graph(&fixtures::airports_schema());
        assert_eq!(g.vertices, 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn self_loop_is_kept_but_not_adjacent() {
        let schema = fixtures::employee_schema();
        let g = build_schema_graph(&schema);
        assert!(g.edges.iter().any(JoinEdge::is_self_loop));
        for t in 0..g.vertices {
            assert!(g.neighbours(t).iter().all(|(n, _)| *n != t));
        }
    }

    #[test]
    fn degree_sum_is_twice_the_foreign_keys() {
        for schema in fixtures::all_schemas() {
            let g = build_schema_graph(&schema);
            let endpoints: usize = g.edges.len() * 2;
            assert_eq!(endpoints, 2 * schema.foreign_keys.len());
        }
    }
}
