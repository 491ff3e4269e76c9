//! Labelled directed graphs over the rose, Stallings folding and cores.
//!
//! A [`StallingsGraph`] is a connected based graph whose edges carry a
//! generator label. Reading an edge forwards spells the generator; reading
//! it backwards spells the inverse. Folding identifies same-labelled edges
//! at a common vertex until the graph immerses into the rose.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::union_find::UnionFind;
use crate::word::{check_rank, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for {count} vertices")]
    InvalidVertex { vertex: usize, count: usize },
    #[error("label {label} out of range for rank {rank}")]
    InvalidLabel { label: usize, rank: u8 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ambient ranks differ: {0} vs {1}")]
    RankMismatch(u8, u8),
    #[error(transparent)]
    Word(#[from] WordError),
}

impl GraphError {
    pub fn name(&self) -> &'static str {
        match self {
            GraphError::InvalidVertex { .. } => "InvalidVertex",
            GraphError::InvalidLabel { .. } => "InvalidLabel",
            GraphError::Disconnected => "Disconnected",
            GraphError::Parse { .. } => "GraphParseError",
            GraphError::RankMismatch(..) => "RankMismatch",
            GraphError::Word(e) => e.name(),
        }
    }
}

/// `source --label--> target`, with `label` a zero-based generator index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StallingsGraph {
    rank: u8,
    vertex_count: usize,
    base: usize,
    edges: Vec<Edge>,
}

/// Result of folding: the folded graph and where each input vertex went.
#[derive(Debug, Clone)]
pub struct Folded {
    pub graph: StallingsGraph,
    pub vertex_map: Vec<usize>,
}

impl StallingsGraph {
    pub fn new(
        rank: u8,
        vertex_count: usize,
        base: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        check_rank(rank as usize)?;
        if base >= vertex_count {
            return Err(GraphError::InvalidVertex {
                vertex: base,
                count: vertex_count,
            });
        }
        for e in &edges {
            for v in [e.source, e.target] {
                if v >= vertex_count {
                    return Err(GraphError::InvalidVertex {
                        vertex: v,
                        count: vertex_count,
                    });
                }
            }
            if e.label >= rank {
                return Err(GraphError::InvalidLabel {
                    label: e.label as usize,
                    rank,
                });
            }
        }
        let graph = StallingsGraph {
            rank,
            vertex_count,
            base,
            edges,
        };
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    pub(crate) fn from_parts_unchecked(
        rank: u8,
        vertex_count: usize,
        base: usize,
        edges: Vec<Edge>,
    ) -> Self {
        StallingsGraph {
            rank,
            vertex_count,
            base,
            edges,
        }
    }

    /// The single-vertex graph with no edges.
    pub fn point(rank: u8) -> Self {
        StallingsGraph::from_parts_unchecked(rank, 1, 0, Vec::new())
    }

    /// One loop per nontrivial word, all attached at the basepoint. Not folded.
    pub fn wedge(words: &[Word], rank: u8) -> Self {
        let mut vertex_count = 1;
        let mut edges = Vec::new();
        for word in words.iter().filter(|w| !w.is_identity()) {
            assert_eq!(word.rank(), rank, "word rank differs from ambient rank");
            let n = word.len();
            let mut current = 0;
            for (i, letter) in word.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    0
                } else {
                    vertex_count += 1;
                    vertex_count - 1
                };
                edges.push(oriented_edge(current, next, *letter));
                current = next;
            }
        }
        StallingsGraph::from_parts_unchecked(rank, vertex_count, 0, edges)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `V − E`
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64
    }

    /// `E − V + 1`, the rank of the fundamental group of a connected graph.
    pub fn first_betti(&self) -> usize {
        (self.edges.len() + 1)
            .checked_sub(self.vertex_count)
            .expect("connected graph has E >= V - 1")
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut degree = vec![0; self.vertex_count];
        for e in &self.edges {
            degree[e.source] += 1;
            degree[e.target] += 1;
        }
        degree
    }

    fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertex_count);
        for e in &self.edges {
            uf.union(e.source, e.target);
        }
        let root = uf.find(0);
        (0..self.vertex_count).all(|v| uf.find(v) == root)
    }

    /// Half-edges at each vertex as `(direction, other end)`.
    fn half_edges(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.source].push((2 * e.label as usize, e.target));
            adj[e.target].push((2 * e.label as usize + 1, e.source));
        }
        adj
    }

    /// No vertex has two half-edges in the same direction.
    pub fn is_folded(&self) -> bool {
        self.half_edges().into_iter().all(|mut list| {
            list.sort_unstable();
            list.windows(2).all(|w| w[0].0 != w[1].0)
        })
    }

    /// Folds to an immersion using union-find on vertices and a worklist of
    /// vertices that may carry a label clash.
    pub fn fold_with_map(&self) -> Folded {
        let n = self.vertex_count;
        let mut uf = UnionFind::new(n);
        let mut adj = self.half_edges();
        let mut work: Vec<usize> = (0..n).rev().collect();

        while let Some(v) = work.pop() {
            let v = uf.find(v);
            let mut list = std::mem::take(&mut adj[v]);
            for entry in list.iter_mut() {
                entry.1 = uf.find(entry.1);
            }
            list.sort_unstable();
            list.dedup();
            let clash = list
                .windows(2)
                .find(|w| w[0].0 == w[1].0)
                .map(|w| (w[0].1, w[1].1));
            adj[v] = list;
            if let Some((x, y)) = clash {
                let root = uf.union(x, y);
                let absorbed = if root == x { y } else { x };
                let moved = std::mem::take(&mut adj[absorbed]);
                adj[root].extend(moved);
                work.push(root);
                work.push(uf.find(v));
            }
        }

        let mut compact = vec![usize::MAX; n];
        let mut count = 0;
        for (v, slot) in compact.iter_mut().enumerate() {
            if uf.find(v) == v {
                *slot = count;
                count += 1;
            }
        }
        let mut edges = Vec::new();
        for v in 0..n {
            if uf.find(v) != v {
                continue;
            }
            let mut list: Vec<(usize, usize)> =
                adj[v].iter().map(|&(d, t)| (d, uf.find(t))).collect();
            list.sort_unstable();
            list.dedup();
            for (d, t) in list {
                if d % 2 == 0 {
                    edges.push(Edge {
                        source: compact[v],
                        target: compact[t],
                        label: (d / 2) as u8,
                    });
                }
            }
        }
        let base = compact[uf.find(self.base)];
        let folded = StallingsGraph::from_parts_unchecked(self.rank, count, base, edges);
        let (graph, renumber) = folded.canonical_with_map();
        let vertex_map = (0..n).map(|v| renumber[compact[uf.find(v)]]).collect();
        Folded { graph, vertex_map }
    }

    pub fn fold(&self) -> StallingsGraph {
        self.fold_with_map().graph
    }

    /// Folds by elementary identifications applied one at a time.
    ///
    /// At each step every pair of distinct edges that share an endpoint and a
    /// label (in the same direction) is a candidate; `choose(n)` returns the
    /// index in `0..n` of the pair to fold. The result is canonically numbered.
    pub fn fold_in_order<F>(&self, mut choose: F) -> StallingsGraph
    where
        F: FnMut(usize) -> usize,
    {
        let mut rename: Vec<usize> = (0..self.vertex_count).collect();
        let mut edges = self.edges.clone();
        loop {
            let mut by_key: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            for (i, e) in edges.iter().enumerate() {
                by_key
                    .entry((e.source, 2 * e.label as usize))
                    .or_default()
                    .push(i);
                by_key
                    .entry((e.target, 2 * e.label as usize + 1))
                    .or_default()
                    .push(i);
            }
            let mut keys: Vec<_> = by_key.into_iter().filter(|(_, v)| v.len() > 1).collect();
            keys.sort_unstable();
            let mut candidates = Vec::new();
            for ((_, direction), list) in &keys {
                for (x, &i) in list.iter().enumerate() {
                    for &j in &list[x + 1..] {
                        candidates.push((*direction, i, j));
                    }
                }
            }
            if candidates.is_empty() {
                break;
            }
            let pick = choose(candidates.len());
            let (direction, i, j) = candidates[pick % candidates.len()];
            let (keep, gone) = if direction % 2 == 0 {
                (edges[i].target, edges[j].target)
            } else {
                (edges[i].source, edges[j].source)
            };
            if keep != gone {
                for e in edges.iter_mut() {
                    if e.source == gone {
                        e.source = keep;
                    }
                    if e.target == gone {
                        e.target = keep;
                    }
                }
                for r in rename.iter_mut() {
                    if *r == gone {
                        *r = keep;
                    }
                }
            }
            edges.swap_remove(j);
        }

        let mut compact = vec![usize::MAX; self.vertex_count];
        let mut count = 0;
        for &r in &rename {
            if compact[r] == usize::MAX {
                compact[r] = count;
                count += 1;
            }
        }
        let edges = edges
            .into_iter()
            .map(|e| Edge {
                source: compact[e.source],
                target: compact[e.target],
                label: e.label,
            })
            .collect();
        let base = compact[rename[self.base]];
        StallingsGraph::from_parts_unchecked(self.rank, count, base, edges).canonical()
    }

    /// Renumbers vertices in breadth-first order from the basepoint, visiting
    /// half-edges in `(label, sign)` order; edges are then sorted.
    pub fn canonical(&self) -> StallingsGraph {
        self.canonical_with_map().0
    }

    fn canonical_with_map(&self) -> (StallingsGraph, Vec<usize>) {
        let mut adj = self.half_edges();
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let mut order = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut queue = VecDeque::from([self.base]);
        order[self.base] = next;
        next += 1;
        while let Some(v) = queue.pop_front() {
            for &(_, t) in &adj[v] {
                if order[t] == usize::MAX {
                    order[t] = next;
                    next += 1;
                    queue.push_back(t);
                }
            }
        }
        debug_assert_eq!(next, self.vertex_count, "canonical numbering needs a connected graph");
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                source: order[e.source],
                target: order[e.target],
                label: e.label,
            })
            .collect();
        edges.sort_unstable_by_key(|e| (e.source, e.label, e.target));
        (
            StallingsGraph::from_parts_unchecked(self.rank, self.vertex_count, 0, edges),
            order,
        )
    }

    /// Repeatedly deletes vertices of degree at most one (never the basepoint
    /// when `keep_base`). Returns surviving vertices in increasing order.
    fn prune(&self, keep_base: bool) -> Vec<usize> {
        let mut degree = self.degrees();
        let mut alive = vec![true; self.vertex_count];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            incident[e.source].push(i);
            if e.target != e.source {
                incident[e.target].push(i);
            }
        }
        let mut edge_alive = vec![true; self.edges.len()];
        let prunable = |v: usize, degree: &[usize]| degree[v] <= 1 && !(keep_base && v == self.base);
        let mut stack: Vec<usize> = (0..self.vertex_count)
            .filter(|&v| prunable(v, &degree))
            .collect();
        while let Some(v) = stack.pop() {
            if !alive[v] || !prunable(v, &degree) {
                continue;
            }
            alive[v] = false;
            for &i in &incident[v] {
                if !edge_alive[i] {
                    continue;
                }
                edge_alive[i] = false;
                let e = self.edges[i];
                let other = if e.source == v { e.target } else { e.source };
                degree[other] -= 1;
                degree[v] -= 1;
                if alive[other] && prunable(other, &degree) {
                    stack.push(other);
                }
            }
        }
        (0..self.vertex_count).filter(|&v| alive[v]).collect()
    }

    fn induced(&self, keep: &[usize], base: usize) -> StallingsGraph {
        let mut index = vec![usize::MAX; self.vertex_count];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.source] != usize::MAX && index[e.target] != usize::MAX)
            .map(|e| Edge {
                source: index[e.source],
                target: index[e.target],
                label: e.label,
            })
            .collect();
        StallingsGraph::from_parts_unchecked(self.rank, keep.len(), index[base], edges)
    }

    /// The based core: hanging trees removed, basepoint kept. Canonically numbered.
    pub fn core(&self) -> StallingsGraph {
        let keep = self.prune(true);
        self.induced(&keep, self.base).canonical()
    }

    /// The unbased core (every vertex of degree at least two), based at its
    /// lowest-numbered surviving vertex, together with the original ids of
    /// that vertex. `None` when the graph is a tree.
    pub fn cyclic_core(&self) -> Option<(StallingsGraph, usize)> {
        let keep = self.prune(false);
        let &first = keep.first()?;
        Some((self.induced(&keep, first).canonical(), first))
    }

    /// Line format: `V <count> BASE <id>` followed by `E <src> <dst> <label>`,
    /// labels being one-based generator indices.
    pub fn to_text(&self) -> String {
        let mut out = format!("V {} BASE {}\n", self.vertex_count, self.base);
        for e in &self.edges {
            out.push_str(&format!("E {} {} {}\n", e.source, e.target, e.label as usize + 1));
        }
        out
    }

    pub fn parse_text(text: &str, rank: usize) -> Result<StallingsGraph, GraphError> {
        let rank = check_rank(rank)?;
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields[0].starts_with('#') {
                continue;
            }
            let number = |s: &str| {
                s.parse::<usize>().map_err(|_| GraphError::Parse {
                    line: line_no,
                    message: format!("expected a non-negative integer, found {s:?}"),
                })
            };
            match fields.as_slice() {
                ["V", count, "BASE", base] if header.is_none() => {
                    header = Some((number(count)?, number(base)?));
                }
                ["E", s, t, l] if header.is_some() => {
                    let label = number(l)?;
                    if label == 0 || label > rank as usize {
                        return Err(GraphError::InvalidLabel { label, rank });
                    }
                    edges.push(Edge {
                        source: number(s)?,
                        target: number(t)?,
                        label: (label - 1) as u8,
                    });
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("unexpected line {line:?}"),
                    })
                }
            }
        }
        let (count, base) = header.ok_or(GraphError::Parse {
            line: 0,
            message: "missing `V <count> BASE <id>` header".into(),
        })?;
        StallingsGraph::new(rank, count, base, edges)
    }

    /// Graphviz rendering; the basepoint is drawn as a double circle.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph stallings {\n  rankdir=LR;\n");
        for v in 0..self.vertex_count {
            let shape = if v == self.base { "doublecircle" } else { "circle" };
            out.push_str(&format!("  v{v} [shape={shape}, label=\"{v}\"];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                e.source,
                e.target,
                Letter::positive(e.label)
            ));
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for StallingsGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn oriented_edge(from: usize, to: usize, letter: Letter) -> Edge {
    if letter.is_inverse() {
        Edge {
            source: to,
            target: from,
            label: letter.generator(),
        }
    } else {
        Edge {
            source: from,
            target: to,
            label: letter.generator(),
        }
    }
}

/// Deterministic transition table of a folded graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Transitions {
    directions: usize,
    table: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Transitions {
    pub(crate) fn new(graph: &StallingsGraph) -> Self {
        let directions = 2 * graph.rank as usize;
        let mut table = vec![NONE; graph.vertex_count * directions];
        for e in &graph.edges {
            let forward = e.source * directions + 2 * e.label as usize;
            let backward = e.target * directions + 2 * e.label as usize + 1;
            debug_assert!(table[forward] == NONE && table[backward] == NONE, "graph not folded");
            table[forward] = e.target as u32;
            table[backward] = e.source as u32;
        }
        Transitions { directions, table }
    }

    pub(crate) fn directions(&self) -> usize {
        self.directions
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.table.len() / self.directions.max(1)
    }

    pub(crate) fn step(&self, vertex: usize, direction: usize) -> Option<usize> {
        match self.table[vertex * self.directions + direction] {
            NONE => None,
            t => Some(t as usize),
        }
    }

    /// Follows `letters` from `vertex`; `None` as soon as an edge is missing.
    pub(crate) fn trace(&self, vertex: usize, letters: &[Letter]) -> Option<usize> {
        letters
            .iter()
            .try_fold(vertex, |v, l| self.step(v, l.direction()))
    }

    pub(crate) fn is_full(&self, vertex: usize) -> bool {
        (0..self.directions).all(|d| self.step(vertex, d).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn words(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| parse_word(s, 2).unwrap()).collect()
    }

    #[test]
    fn wedge_then_fold_duplicate_loop() {
        let g = StallingsGraph::wedge(&words(&["a", "a"]), 2).fold();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges(), &[Edge { source: 0, target: 0, label: 0 }]);
    }

    #[test]
    fn fold_rose_from_ab_abb() {
        let g = StallingsGraph::wedge(&words(&["ab", "abb"]), 2).fold().core();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn fold_map_tracks_vertices() {
        let wedge = StallingsGraph::wedge(&words(&["ab", "aB"]), 2);
        let folded = wedge.fold_with_map();
        assert_eq!(folded.vertex_map[0], folded.graph.base());
        assert!(folded.graph.is_folded());
    }

    #[test]
    fn elementary_folds_match_worklist() {
        let wedge = StallingsGraph::wedge(&words(&["abAB", "aab", "bAbba"]), 2);
        let expected = wedge.fold();
        for seed in 0..10 {
            let mut state = seed;
            let got = wedge.fold_in_order(|n| {
                state = state * 31 + 7;
                state % n
            });
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn core_keeps_base_and_drops_hair() {
        let g = StallingsGraph::wedge(&words(&["baB"]), 2).fold();
        assert_eq!(g.vertex_count(), 2);
        let core = g.core();
        assert_eq!(core.vertex_count(), 2);
        let (cyclic, _) = core.cyclic_core().unwrap();
        assert_eq!(cyclic.vertex_count(), 1);
        assert_eq!(cyclic.edge_count(), 1);
    }

    #[test]
    fn tree_has_no_cyclic_core() {
        let g = StallingsGraph::new(2, 2, 0, vec![Edge { source: 0, target: 1, label: 1 }]).unwrap();
        assert!(g.cyclic_core().is_none());
        assert_eq!(g.core().vertex_count(), 1);
    }

    #[test]
    fn text_round_trip() {
        let g = StallingsGraph::wedge(&words(&["a", "baB"]), 2).fold().core();
        let text = g.to_text();
        assert_eq!(text, "V 2 BASE 0\nE 0 0 1\nE 0 1 2\nE 1 1 1\n");
        assert_eq!(StallingsGraph::parse_text(&text, 2).unwrap(), g);
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(
            StallingsGraph::parse_text("E 0 0 1\n", 2),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            StallingsGraph::parse_text("V 1 BASE 0\nE 0 0 3\n", 2),
            Err(GraphError::InvalidLabel { label: 3, .. })
        ));
        assert_eq!(
            StallingsGraph::parse_text("V 2 BASE 0\n", 2),
            Err(GraphError::Disconnected)
        );
        assert!(matches!(
            StallingsGraph::parse_text("V 1 BASE 4\n", 2),
            Err(GraphError::InvalidVertex { vertex: 4, .. })
        ));
    }

    #[test]
    fn dot_marks_base() {
        let dot = StallingsGraph::wedge(&words(&["ab"]), 2).fold().to_dot();
        assert!(dot.contains("v0 [shape=doublecircle"));
        assert!(dot.contains("[label=\"b\"]"));
    }
}
