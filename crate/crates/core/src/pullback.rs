//! Fiber products of core graphs, conjugate intersections and malnormality.
//!
//! The fiber product of `core(H)` and `core(K)` over the rose has a vertex
//! for every pair of vertices and an `ℓ`-edge `(u,u') → (v,v')` whenever both
//! factors have an `ℓ`-edge `u → v` and `u' → v'`. Its components with a
//! cycle are in bijection with the double cosets `H g K` for which
//! `H ∩ g K g⁻¹` is nontrivial.

use std::collections::VecDeque;

use crate::graph::{Edge, GraphError, StallingsGraph};
use crate::subgroup::Subgroup;
use crate::word::Word;

/// One connected component of the fiber product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PullbackComponent {
    /// For the based component this is `H ∩ K` itself. For the others it is
    /// the cyclic core based at `vertex`, a representative of a conjugacy
    /// class; trivial when the component is a tree.
    pub subgroup: Subgroup,
    pub non_contractible: bool,
    /// Whether the component contains the pair of basepoints.
    pub based: bool,
    /// Vertex pair used as basepoint of `subgroup`.
    pub vertex: (usize, usize),
    pub vertex_count: usize,
    pub edge_count: usize,
    /// Tree path in `core(H)` from its basepoint to `vertex.0`.
    pub h_path: Word,
    /// Tree path in `core(K)` from its basepoint to `vertex.1`.
    pub k_path: Word,
}

impl PullbackComponent {
    /// `g = h_path · k_path⁻¹`, so that conjugating `subgroup` by `h_path`
    /// gives `H ∩ g K g⁻¹`.
    pub fn conjugator(&self) -> Word {
        self.h_path.concat(&self.k_path.inverse())
    }

    /// `H ∩ g K g⁻¹` for the conjugator above.
    pub fn intersection(&self) -> Subgroup {
        self.subgroup.conjugate_by(&self.h_path)
    }
}

fn check_ranks(h: &Subgroup, k: &Subgroup) -> Result<(), GraphError> {
    if h.ambient_rank() != k.ambient_rank() {
        return Err(GraphError::RankMismatch(h.ambient_rank(), k.ambient_rank()));
    }
    Ok(())
}

/// All components of `core(H) ×_rose core(K)`, ordered by their smallest
/// vertex pair, so the based component comes first.
pub fn pullback(h: &Subgroup, k: &Subgroup) -> Result<Vec<PullbackComponent>, GraphError> {
    check_ranks(h, k)?;
    let rank = h.ambient_rank();
    let gh = h.graph();
    let gk = k.graph();
    let (nh, nk) = (gh.vertex_count(), gk.vertex_count());
    let pair = |u: usize, v: usize| u * nk + v;

    let mut by_label_k: Vec<Vec<(usize, usize)>> = vec![Vec::new(); rank as usize];
    for e in gk.edges() {
        by_label_k[e.label as usize].push((e.source, e.target));
    }
    let mut product_edges: Vec<Edge> = Vec::new();
    for e in gh.edges() {
        for &(s, t) in &by_label_k[e.label as usize] {
            product_edges.push(Edge {
                source: pair(e.source, s),
                target: pair(e.target, t),
                label: e.label,
            });
        }
    }

    let total = nh * nk;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (i, e) in product_edges.iter().enumerate() {
        adjacency[e.source].push(i);
        adjacency[e.target].push(i);
    }
    let mut component = vec![usize::MAX; total];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..total {
        if component[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        component[start] = id;
        let mut list = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &i in &adjacency[v] {
                let e = product_edges[i];
                for w in [e.source, e.target] {
                    if component[w] == usize::MAX {
                        component[w] = id;
                        list.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        list.sort_unstable();
        members.push(list);
    }

    let mut local = vec![0; total];
    for list in &members {
        for (i, &v) in list.iter().enumerate() {
            local[v] = i;
        }
    }
    let mut edges_of: Vec<Vec<Edge>> = vec![Vec::new(); members.len()];
    for e in &product_edges {
        edges_of[component[e.source]].push(Edge {
            source: local[e.source],
            target: local[e.target],
            label: e.label,
        });
    }

    let h_paths = h.tree_paths();
    let k_paths = k.tree_paths();
    let mut out = Vec::with_capacity(members.len());
    for (list, edges) in members.iter().zip(edges_of) {
        let edge_count = edges.len();
        let based = list[0] == 0;
        let graph = StallingsGraph::from_parts_unchecked(rank, list.len(), 0, edges);
        let non_contractible = graph.first_betti() >= 1;

        let (subgroup, base_pair) = if based {
            (Subgroup::from_folded(graph.core()), 0)
        } else {
            match graph.cyclic_core() {
                Some((core, first)) => (Subgroup::from_folded(core), list[first]),
                None => (Subgroup::trivial(rank), list[0]),
            }
        };
        let vertex = (base_pair / nk, base_pair % nk);
        out.push(PullbackComponent {
            subgroup,
            non_contractible,
            based,
            vertex,
            vertex_count: list.len(),
            edge_count,
            h_path: h_paths[vertex.0].clone(),
            k_path: k_paths[vertex.1].clone(),
        });
    }
    Ok(out)
}

/// `H ∩ K` as a based subgroup.
pub fn intersection(h: &Subgroup, k: &Subgroup) -> Result<Subgroup, GraphError> {
    Ok(pullback(h, k)?
        .into_iter()
        .next()
        .expect("pullback has a based component")
        .subgroup)
}

/// True when `H ∩ g K g⁻¹ = 1` for every `g` in the free group, i.e. every
/// component of the fiber product is a tree. No component is exempt, so a
/// nontrivial subgroup never meets its own conjugates trivially.
pub fn conjugates_meet_trivially(h: &Subgroup, k: &Subgroup) -> Result<bool, GraphError> {
    Ok(pullback(h, k)?.iter().all(|c| !c.non_contractible))
}

/// True when `H ∩ g H g⁻¹ = 1` for every `g ∉ H`.
///
/// The component of `(base, base)` in the self fiber product is the diagonal,
/// a copy of `core(H)`; every other component must be a tree.
pub fn is_malnormal(h: &Subgroup) -> bool {
    let components = pullback(h, h).expect("same ambient rank");
    let diagonal = &components[0];
    let n = h.graph().vertex_count();
    debug_assert!(diagonal.based);
    debug_assert_eq!(diagonal.vertex_count, n, "diagonal component maps onto core(H)");
    debug_assert_eq!(diagonal.edge_count, h.graph().edge_count());
    components[1..].iter().all(|c| !c.non_contractible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word_list;

    fn sub(list: &str) -> Subgroup {
        Subgroup::from_generators(&parse_word_list(list, 2).unwrap(), 2)
    }

    #[test]
    fn self_intersection_of_cyclic() {
        let comps = pullback(&sub("a"), &sub("a")).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(comps[0].non_contractible && comps[0].based);
        assert_eq!(comps[0].subgroup, sub("a"));
    }

    #[test]
    fn disjoint_labels() {
        let comps = pullback(&sub("a"), &sub("b")).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(!comps[0].non_contractible);
        assert!(comps[0].subgroup.is_trivial());
    }

    #[test]
    fn two_conjugate_meetings() {
        let comps = pullback(&sub("a,baB"), &sub("a")).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.non_contractible));
        assert_eq!(comps[1].conjugator().to_string(), "b");
        assert_eq!(comps[1].intersection(), sub("baB"));
    }

    #[test]
    fn meets_trivially_examples() {
        assert!(conjugates_meet_trivially(&sub("a"), &sub("b")).unwrap());
        assert!(!conjugates_meet_trivially(&sub("a,baB"), &sub("a")).unwrap());
        assert!(conjugates_meet_trivially(&sub(""), &sub("a,b")).unwrap());
        assert!(!conjugates_meet_trivially(&sub("ab"), &sub("ab")).unwrap());
    }

    #[test]
    fn rank_mismatch() {
        let k = Subgroup::full(3);
        assert_eq!(
            pullback(&sub("a"), &k).unwrap_err(),
            GraphError::RankMismatch(2, 3)
        );
    }

    #[test]
    fn malnormal_examples() {
        assert!(is_malnormal(&sub("ab")));
        assert!(!is_malnormal(&sub("a,baB")));
        assert!(is_malnormal(&sub("")));
        assert!(!is_malnormal(&sub("aa")));
        assert!(is_malnormal(&sub("a")));
        assert!(!is_malnormal(&sub("abab")));
        assert!(is_malnormal(&Subgroup::full(2)));
    }

    #[test]
    fn based_intersection() {
        let i = intersection(&sub("a,b"), &sub("ab,ba")).unwrap();
        assert_eq!(i, sub("ab,ba"));
        let i = intersection(&sub("aa,b"), &sub("aaa,b")).unwrap();
        assert!(i.contains(&parse_word_list("aaaaaa", 2).unwrap()[0]));
        assert!(!i.contains(&parse_word_list("aaa", 2).unwrap()[0]));
    }
}
