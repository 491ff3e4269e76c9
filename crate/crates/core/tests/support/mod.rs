//! Brute-force oracles shared by the integration tests. Everything here works
//! from raw edge lists and explicit word enumeration, not from the library's
//! fiber products or completion search.

#![allow(dead_code)]

use std::collections::VecDeque;

use freefold::{Edge, Letter, StallingsGraph, Subgroup, Word};
use rand::Rng;

/// Deterministic transition table of a folded graph, built from its edges.
pub struct Automaton {
    pub vertices: usize,
    pub base: usize,
    dirs: usize,
    table: Vec<Option<usize>>,
}

impl Automaton {
    pub fn new(graph: &StallingsGraph) -> Automaton {
        let dirs = 2 * graph.rank() as usize;
        let mut table = vec![None; graph.vertex_count() * dirs];
        for e in graph.edges() {
            let forward = e.source * dirs + 2 * e.label as usize;
            let backward = e.target * dirs + 2 * e.label as usize + 1;
            assert!(table[forward].is_none() && table[backward].is_none(), "not folded");
            table[forward] = Some(e.target);
            table[backward] = Some(e.source);
        }
        Automaton {
            vertices: graph.vertex_count(),
            base: graph.base(),
            dirs,
            table,
        }
    }

    pub fn step(&self, v: usize, dir: usize) -> Option<usize> {
        self.table[v * self.dirs + dir]
    }

    pub fn trace(&self, v: usize, w: &Word) -> Option<usize> {
        w.letters()
            .iter()
            .try_fold(v, |at, l| self.step(at, l.direction()))
    }

    pub fn accepts(&self, w: &Word) -> bool {
        self.trace(self.base, w) == Some(self.base)
    }
}

pub fn word(text: &str, rank: u8) -> Word {
    freefold::parse_word(text, rank as usize).unwrap()
}

pub fn subgroup(list: &str, rank: u8) -> Subgroup {
    Subgroup::from_generators(&freefold::parse_word_list(list, rank as usize).unwrap(), rank)
}

/// Reduces by repeatedly cancelling a randomly chosen adjacent inverse pair.
pub fn reduce_in_random_order<R: Rng>(letters: &[(u8, bool)], rng: &mut R) -> Vec<(u8, bool)> {
    let mut out = letters.to_vec();
    loop {
        let spots: Vec<usize> = (0..out.len().saturating_sub(1))
            .filter(|&i| out[i].0 == out[i + 1].0 && out[i].1 != out[i + 1].1)
            .collect();
        if spots.is_empty() {
            return out;
        }
        let i = spots[rng.gen_range(0..spots.len())];
        out.drain(i..i + 2);
    }
}

pub fn random_reduced<R: Rng>(rng: &mut R, rank: u8, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_direction(rng.gen_range(0..2 * rank as usize));
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::from_letters(rank, letters).unwrap()
}

/// Random subgroup from `1..=max_gens` nontrivial words of length
/// `1..=max_len`, rejected until its core has at most `max_vertices` vertices.
pub fn random_subgroup<R: Rng>(
    rng: &mut R,
    rank: u8,
    max_gens: usize,
    max_len: usize,
    max_vertices: usize,
) -> Subgroup {
    loop {
        let count = rng.gen_range(1..=max_gens);
        let gens: Vec<Word> = (0..count)
            .map(|_| {
                let len = rng.gen_range(1..=max_len);
                random_reduced(rng, rank, len)
            })
            .collect();
        let h = Subgroup::from_generators(&gens, rank);
        if h.graph().vertex_count() <= max_vertices {
            return h;
        }
    }
}

/// Every freely reduced word of length at most `max_len`, shortlex order.
pub fn ball(rank: u8, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity(rank)];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for d in 0..2 * rank as usize {
                let l = Letter::from_direction(d);
                if w.last() != Some(&l.inverse()) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().map(|v| Word::from_letters(rank, v.clone()).unwrap()));
        layer = next;
    }
    out
}

/// Whether some nonempty reduced word of length at most `max_len` is a loop
/// at the basepoint of both automata.
pub fn common_loop(a: &Automaton, b: &Automaton, max_len: usize) -> bool {
    let dirs = a.dirs;
    // state: (vertex in a, vertex in b, last direction)
    let index = |p: usize, q: usize, d: usize| (p * b.vertices + q) * dirs + d;
    let mut seen = vec![false; a.vertices * b.vertices * dirs];
    let mut queue = VecDeque::new();
    for d in 0..dirs {
        if let (Some(p), Some(q)) = (a.step(a.base, d), b.step(b.base, d)) {
            if (p, q) == (a.base, b.base) {
                return true;
            }
            seen[index(p, q, d)] = true;
            queue.push_back((p, q, d, 1));
        }
    }
    while let Some((p, q, last, len)) = queue.pop_front() {
        if len == max_len {
            continue;
        }
        for d in (0..dirs).filter(|&d| d != last ^ 1) {
            if let (Some(p2), Some(q2)) = (a.step(p, d), b.step(q, d)) {
                if (p2, q2) == (a.base, b.base) {
                    return true;
                }
                if !seen[index(p2, q2, d)] {
                    seen[index(p2, q2, d)] = true;
                    queue.push_back((p2, q2, d, len + 1));
                }
            }
        }
    }
    false
}

/// Automaton reading exactly the double coset `H g K` from its basepoint to
/// the returned vertex: `core(H)`, a path spelling `g`, `core(K)` hung at its
/// end, folded.
pub struct DoubleCoset {
    automaton: Automaton,
    target: usize,
}

impl DoubleCoset {
    pub fn new(h: &Subgroup, g: &Word, k: &Subgroup) -> DoubleCoset {
        let rank = h.ambient_rank();
        let gh = h.graph();
        let gk = k.graph();
        let mut edges: Vec<Edge> = gh.edges().to_vec();
        let mut count = gh.vertex_count();
        let mut at = gh.base();
        for l in g.letters() {
            let next = count;
            count += 1;
            let (source, target) = if l.is_inverse() { (next, at) } else { (at, next) };
            edges.push(Edge {
                source,
                target,
                label: l.generator(),
            });
            at = next;
        }
        let end = at;
        let mut relabel = vec![end; gk.vertex_count()];
        for (v, slot) in relabel.iter_mut().enumerate() {
            if v != gk.base() {
                *slot = count;
                count += 1;
            }
        }
        for e in gk.edges() {
            edges.push(Edge {
                source: relabel[e.source],
                target: relabel[e.target],
                label: e.label,
            });
        }
        let graph = StallingsGraph::new(rank, count, gh.base(), edges).unwrap();
        let folded = graph.fold_with_map();
        DoubleCoset {
            automaton: Automaton::new(&folded.graph),
            target: folded.vertex_map[end],
        }
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.automaton.trace(self.automaton.base, w) == Some(self.target)
    }
}

/// Representatives `g`, `|g| ≤ max_conj`, of the distinct double cosets
/// `H g K` with `H ∩ g K g⁻¹` containing a nontrivial element of length at
/// most `max_witness`. With `skip_trivial_coset`, the coset `H·1·K` is left
/// out.
pub fn brute_conjugate_meetings(
    h: &Subgroup,
    k: &Subgroup,
    max_conj: usize,
    max_witness: usize,
    skip_trivial_coset: bool,
) -> Vec<Word> {
    let rank = h.ambient_rank();
    let ah = Automaton::new(h.graph());
    let mut found: Vec<(Word, DoubleCoset)> = Vec::new();
    let trivial = DoubleCoset::new(h, &Word::identity(rank), k);
    for g in ball(rank, max_conj) {
        if skip_trivial_coset && trivial.contains(&g) {
            continue;
        }
        if found.iter().any(|(_, dc)| dc.contains(&g)) {
            continue;
        }
        let conj = k.conjugate_by(&g);
        if common_loop(&ah, &Automaton::new(conj.graph()), max_witness) {
            let dc = DoubleCoset::new(h, &g, k);
            found.push((g, dc));
        }
    }
    found.into_iter().map(|(g, _)| g).collect()
}

pub fn brute_is_malnormal(h: &Subgroup, max_conj: usize, max_witness: usize) -> bool {
    brute_conjugate_meetings(h, h, max_conj, max_witness, true).is_empty()
}

/// Whether `w` lies along some immersed cycle of length at most `max_len`
/// in the cyclic core of `h`: a closed, cyclically reduced path `c` at some
/// core vertex such that `w` is a prefix of `c c c …`.
pub fn brute_completable(w: &Word, h: &Subgroup, max_len: usize) -> bool {
    let Some((core, _)) = h.graph().cyclic_core() else {
        return false;
    };
    let a = Automaton::new(&core);
    let target: Vec<usize> = w.letters().iter().map(|l| l.direction()).collect();
    (0..a.vertices).any(|v| {
        let mut path = Vec::new();
        cycle_search(&a, v, v, &target, &mut path, max_len)
    })
}

fn cycle_search(
    a: &Automaton,
    start: usize,
    at: usize,
    target: &[usize],
    path: &mut Vec<usize>,
    max_len: usize,
) -> bool {
    if !path.is_empty() && at == start && path[0] != path[path.len() - 1] ^ 1 {
        let fits = target
            .iter()
            .enumerate()
            .all(|(i, &d)| path[i % path.len()] == d);
        if fits {
            return true;
        }
    }
    if path.len() == max_len {
        return false;
    }
    for d in 0..a.dirs {
        if path.last().is_some_and(|&last| d == last ^ 1) {
            continue;
        }
        if path.len() < target.len() && d != target[path.len()] {
            continue;
        }
        if let Some(next) = a.step(at, d) {
            path.push(d);
            if cycle_search(a, start, next, target, path, max_len) {
                return true;
            }
            path.pop();
        }
    }
    false
}

/// Number of subgroups of index `n` in the free group of rank `r`, by the
/// recurrence `a_n = n (n!)^{r-1} − Σ_{k<n} ((n−k)!)^{r−1} a_k`.
pub fn hall_count(r: u32, n: usize) -> u128 {
    let fact = |m: usize| (1..=m as u128).product::<u128>();
    let mut a: Vec<u128> = vec![0; n + 1];
    for m in 1..=n {
        let total = m as u128 * fact(m).pow(r - 1);
        let sub: u128 = (1..m).map(|k| fact(m - k).pow(r - 1) * a[k]).sum();
        a[m] = total - sub;
    }
    a[n]
}
