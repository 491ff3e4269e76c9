//! Finitely generated subgroups represented by their folded core graphs.

use std::collections::VecDeque;
use std::fmt;

use crate::graph::{Edge, StallingsGraph, Transitions};
use crate::word::{Letter, Word};

/// A finitely generated subgroup of the free group of rank `rank()`.
///
/// Holds the canonically numbered based core of its Stallings graph, so two
/// values are equal exactly when they describe the same subgroup.
#[derive(Debug, Clone)]
pub struct Subgroup {
    graph: StallingsGraph,
    transitions: Transitions,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
    }
}

impl Eq for Subgroup {}

impl std::hash::Hash for Subgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.graph.hash(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => f.write_str("infinite"),
        }
    }
}

impl Subgroup {
    /// Folded core of `⟨gens⟩`. An empty list gives the trivial subgroup.
    pub fn from_generators(gens: &[Word], rank: u8) -> Subgroup {
        Subgroup::from_graph(&StallingsGraph::wedge(gens, rank))
    }

    /// Subgroup carried by an arbitrary connected based graph.
    pub fn from_graph(graph: &StallingsGraph) -> Subgroup {
        Subgroup::from_folded(graph.fold().core())
    }

    /// `graph` must already be a folded, canonically numbered core.
    pub(crate) fn from_folded(graph: StallingsGraph) -> Subgroup {
        let transitions = Transitions::new(&graph);
        Subgroup { graph, transitions }
    }

    pub fn trivial(rank: u8) -> Subgroup {
        Subgroup::from_folded(StallingsGraph::point(rank))
    }

    /// The whole free group.
    pub fn full(rank: u8) -> Subgroup {
        let gens: Vec<Word> = (0..rank).map(|g| Word::generator(rank, g)).collect();
        Subgroup::from_generators(&gens, rank)
    }

    pub fn graph(&self) -> &StallingsGraph {
        &self.graph
    }

    pub fn ambient_rank(&self) -> u8 {
        self.graph.rank()
    }

    /// `#edges − #vertices + 1` of the core.
    pub fn rank(&self) -> usize {
        self.graph.first_betti()
    }

    pub fn is_trivial(&self) -> bool {
        self.graph.edge_count() == 0
    }

    /// Membership by reading `w` from the basepoint of the core.
    pub fn contains(&self, w: &Word) -> bool {
        assert_eq!(w.rank(), self.ambient_rank(), "word rank differs from ambient rank");
        self.transitions.trace(self.graph.base(), w.letters()) == Some(self.graph.base())
    }

    /// Finite index exactly when every core vertex has all `2r` half-edges.
    pub fn index(&self) -> Index {
        let full = (0..self.graph.vertex_count()).all(|v| self.transitions.is_full(v));
        if full {
            Index::Finite(self.graph.vertex_count())
        } else {
            Index::Infinite
        }
    }

    /// Word spelled by the breadth-first tree path from the basepoint to each vertex.
    pub fn tree_paths(&self) -> Vec<Word> {
        self.spanning_tree().0
    }

    /// Breadth-first spanning tree from the basepoint, half-edges taken in
    /// `(label, sign, target)` order. Returns the tree path words and, per
    /// edge of the graph, whether it belongs to the tree.
    fn spanning_tree(&self) -> (Vec<Word>, Vec<bool>) {
        let graph = &self.graph;
        let rank = graph.rank();
        let n = graph.vertex_count();
        let mut incident: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
        for (i, e) in graph.edges().iter().enumerate() {
            incident[e.source].push((2 * e.label as usize, e.target, i));
            incident[e.target].push((2 * e.label as usize + 1, e.source, i));
        }
        for list in incident.iter_mut() {
            list.sort_unstable();
        }
        let mut path: Vec<Option<Vec<Letter>>> = vec![None; n];
        let mut in_tree = vec![false; graph.edge_count()];
        path[graph.base()] = Some(Vec::new());
        let mut queue = VecDeque::from([graph.base()]);
        while let Some(v) = queue.pop_front() {
            for &(direction, target, edge) in &incident[v] {
                if path[target].is_none() {
                    let mut p = path[v].clone().expect("visited");
                    p.push(Letter::from_direction(direction));
                    path[target] = Some(p);
                    in_tree[edge] = true;
                    queue.push_back(target);
                }
            }
        }
        let words = path
            .into_iter()
            .map(|p| Word::from_reduced(rank, p.expect("connected core")))
            .collect();
        (words, in_tree)
    }

    /// Free basis read off the non-tree edges of a breadth-first spanning
    /// tree, in canonical edge order.
    pub fn basis(&self) -> Vec<Word> {
        let (paths, in_tree) = self.spanning_tree();
        self.graph
            .edges()
            .iter()
            .zip(in_tree)
            .filter(|(_, tree)| !tree)
            .map(|(e, _)| {
                let letter = Word::generator(self.ambient_rank(), e.label);
                paths[e.source]
                    .concat(&letter)
                    .concat(&paths[e.target].inverse())
            })
            .collect()
    }

    /// `g · self · g⁻¹`
    pub fn conjugate_by(&self, g: &Word) -> Subgroup {
        let gens: Vec<Word> = self.basis().iter().map(|b| b.conjugate_by(g)).collect();
        Subgroup::from_generators(&gens, self.ambient_rank())
    }
}

/// Greedy left-to-right choice of a freely independent subset: a word is
/// kept when the kept words together with it generate a free group of rank
/// equal to their number. Identity words are skipped.
pub fn select_free_subset(gens: &[Word], rank: u8) -> Vec<Word> {
    let mut chosen: Vec<Word> = Vec::new();
    for candidate in gens.iter().filter(|w| !w.is_identity()) {
        chosen.push(candidate.clone());
        if Subgroup::from_generators(&chosen, rank).rank() != chosen.len() {
            chosen.pop();
        }
    }
    chosen
}

/// Every subgroup of index `index` in the free group of rank `rank`, each
/// given by its covering graph.
///
/// Enumerates complete coset tables whose vertices are numbered in order of
/// first definition while scanning `(vertex, direction)` slots; each subgroup
/// appears exactly once.
pub fn full_covers(rank: u8, index: usize) -> Vec<Subgroup> {
    assert!(index >= 1, "index must be positive");
    let directions = 2 * rank as usize;
    let mut table = vec![usize::MAX; index * directions];
    let mut out = Vec::new();
    fill_cover(&mut table, directions, index, 1, 0, &mut out, rank);
    out
}

fn fill_cover(
    table: &mut [usize],
    directions: usize,
    index: usize,
    defined: usize,
    slot: usize,
    out: &mut Vec<Subgroup>,
    rank: u8,
) {
    let mut slot = slot;
    while slot < defined * directions && table[slot] != usize::MAX {
        slot += 1;
    }
    if slot >= defined * directions {
        if defined == index {
            let mut edges = Vec::with_capacity(index * rank as usize);
            for v in 0..index {
                for label in 0..rank as usize {
                    edges.push(Edge {
                        source: v,
                        target: table[v * directions + 2 * label],
                        label: label as u8,
                    });
                }
            }
            let graph = StallingsGraph::from_parts_unchecked(rank, index, 0, edges).canonical();
            out.push(Subgroup::from_folded(graph));
        }
        return;
    }
    let vertex = slot / directions;
    let direction = slot % directions;
    let reverse = direction ^ 1;
    let candidates = (0..defined).chain((defined < index).then_some(defined));
    for target in candidates {
        if table[target * directions + reverse] != usize::MAX {
            continue;
        }
        table[slot] = target;
        table[target * directions + reverse] = vertex;
        let now_defined = defined.max(target + 1);
        fill_cover(table, directions, index, now_defined, slot + 1, out, rank);
        table[slot] = usize::MAX;
        table[target * directions + reverse] = usize::MAX;
    }
}
