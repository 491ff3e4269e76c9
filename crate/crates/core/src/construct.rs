//! Explicit malnormal subgroups that meet every conjugate of a given family
//! of infinite-index subgroups trivially.
//!
//! Given subgroups `F_1, …, F_k`, the cyclic cores of their Stallings graphs
//! form a finite graph `Γ`. A word `f` whose lift at every vertex of `Γ`
//! leaves `Γ` can never be completed to an immersed cycle there. From such an
//! `f` (beginning with `a`, ending with `b`) the two words
//! `b a b^q f² a b` and `a b f² a^p b a` generate a malnormal subgroup of rank
//! two avoiding all conjugates of the `F_i`; other ranks are obtained inside
//! that subgroup.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Transitions;
use crate::pullback::{conjugates_meet_trivially, is_malnormal};
use crate::subgroup::{Index, Subgroup};
use crate::word::{malnormal_generators, parse_word, Letter, Word, WordError};

/// Sampling attempts allowed by default in the randomized search.
pub const DEFAULT_ATTEMPT_CAP: usize = 10_000;

/// Attempts spent on each word length before the length grows.
const ATTEMPTS_PER_LENGTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("word must be nonempty")]
    EmptyWord,
    #[error("invalid avoid set: {0}")]
    InvalidAvoidSet(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("no malnormal tuple found within {0} attempts")]
    SearchBudgetExhausted(usize),
    #[error("certificate check {0} failed")]
    CheckFailed(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

impl ConstructError {
    pub fn name(&self) -> &'static str {
        match self {
            ConstructError::EmptyWord => "EmptyWord",
            ConstructError::InvalidAvoidSet(_) => "InvalidAvoidSet",
            ConstructError::InvalidProblem(_) => "InvalidProblem",
            ConstructError::SearchBudgetExhausted(_) => "SearchBudgetExhausted",
            ConstructError::CheckFailed(_) => "CheckFailed",
            ConstructError::MalformedCertificate(_) => "MalformedCertificate",
            ConstructError::Word(e) => e.name(),
        }
    }
}

/// Cyclic core of one avoided subgroup.
struct CycleCore {
    transitions: Transitions,
}

impl CycleCore {
    fn of(subgroup: &Subgroup) -> Option<CycleCore> {
        let (core, _) = subgroup.graph().cyclic_core()?;
        Some(CycleCore {
            transitions: Transitions::new(&core),
        })
    }

    fn vertex_count(&self) -> usize {
        self.transitions.vertex_count()
    }

    fn directions(&self) -> usize {
        self.transitions.directions()
    }

    fn step(&self, v: usize, direction: usize) -> Option<usize> {
        self.transitions.step(v, direction)
    }

    fn step_avoiding(&self, v: usize, direction: usize, removed: Option<RemovedEdge>) -> Option<usize> {
        if let Some(e) = removed {
            if (v == e.from && direction == e.direction) || (v == e.to && direction == e.direction ^ 1) {
                return None;
            }
        }
        self.step(v, direction)
    }

    /// First direction with no edge at `v`: leaving the core there.
    fn exit_direction(&self, v: usize) -> Option<usize> {
        (0..self.directions()).find(|&d| self.step(v, d).is_none())
    }

    fn trace(&self, v: usize, word: &Word) -> Option<usize> {
        self.transitions.trace(v, word.letters())
    }

    /// Shortest path from `start` that leaves the core, never using
    /// `removed`; ends with the exit letter.
    fn path_to_exit(&self, start: usize, removed: Option<RemovedEdge>) -> Option<Vec<Letter>> {
        let n = self.vertex_count();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            if let Some(exit) = self.exit_direction(v) {
                let mut letters = vec![Letter::from_direction(exit)];
                let mut at = v;
                while let Some((prev, d)) = parent[at] {
                    letters.push(Letter::from_direction(d));
                    at = prev;
                }
                letters.reverse();
                return Some(letters);
            }
            for d in 0..self.directions() {
                if let Some(t) = self.step_avoiding(v, d, removed) {
                    if !seen[t] {
                        seen[t] = true;
                        parent[t] = Some((v, d));
                        queue.push_back(t);
                    }
                }
            }
        }
        None
    }

    /// Shortest reduced nontrivial closed path at `x` avoiding `removed`,
    /// whose first letter is not the inverse of `incoming`.
    fn loop_at(&self, x: usize, incoming: usize, removed: RemovedEdge) -> Option<Vec<Letter>> {
        let dirs = self.directions();
        let state = |v: usize, d: usize| v * dirs + d;
        let mut parent: Vec<Option<usize>> = vec![None; self.vertex_count() * dirs];
        let mut seen = vec![false; self.vertex_count() * dirs];
        let start = state(x, incoming);
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            let (v, last) = (s / dirs, s % dirs);
            for d in (0..dirs).filter(|&d| d != last ^ 1) {
                let Some(t) = self.step_avoiding(v, d, Some(removed)) else {
                    continue;
                };
                let next = state(t, d);
                if t == x {
                    let mut letters = vec![Letter::from_direction(d)];
                    let mut at = s;
                    while at != start {
                        letters.push(Letter::from_direction(at % dirs));
                        at = parent[at].expect("reached from start");
                    }
                    letters.reverse();
                    return Some(letters);
                }
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some(s);
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Continuation for a word whose lift ends inside the core at `x`, having
    /// arrived along `incoming`. Either a path in `core − e` reaches a vertex
    /// with an exit, or `x` lies on the side of the edge cut without one; then
    /// a loop on that side is followed by crossing `e` backwards and heading
    /// for an exit on the other side.
    fn continuation(&self, x: usize, incoming: Letter) -> Vec<Letter> {
        let back = incoming.inverse();
        let y = self.step(x, back.direction()).expect("arrived along this edge");
        let removed = RemovedEdge {
            from: y,
            to: x,
            direction: incoming.direction(),
        };
        if let Some(path) = self.path_to_exit(x, Some(removed)) {
            return path;
        }
        let mut path = self
            .loop_at(x, incoming.direction(), removed)
            .expect("the side of the cut holding x carries a cycle");
        path.push(back);
        path.extend(
            self.path_to_exit(y, Some(removed))
                .expect("the far side of the cut reaches an exit"),
        );
        path
    }
}

#[derive(Debug, Clone, Copy)]
struct RemovedEdge {
    from: usize,
    to: usize,
    direction: usize,
}

/// Shortest immersed cycle in the cyclic core of `h` that contains a lift of
/// `w` as a subpath, spelled starting with `w`; `None` when `w` cannot be
/// completed.
pub fn completion_cycle(w: &Word, h: &Subgroup) -> Result<Option<Word>, ConstructError> {
    let (Some(first), Some(last)) = (w.first(), w.last()) else {
        return Err(ConstructError::EmptyWord);
    };
    let Some(core) = CycleCore::of(h) else {
        return Ok(None);
    };
    let dirs = core.directions();
    let forbidden_end = first.inverse().direction();
    let mut best: Option<Vec<Letter>> = None;
    for v in 0..core.vertex_count() {
        let Some(u) = core.trace(v, w) else { continue };
        if u == v && w.is_cyclically_reduced() {
            return Ok(Some(w.clone()));
        }
        // breadth-first over (vertex, last direction)
        let start = u * dirs + last.direction();
        let mut parent: Vec<Option<usize>> = vec![None; core.vertex_count() * dirs];
        let mut seen = vec![false; core.vertex_count() * dirs];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut found: Option<Vec<Letter>> = None;
        'search: while let Some(s) = queue.pop_front() {
            let (x, prev) = (s / dirs, s % dirs);
            for d in (0..dirs).filter(|&d| d != prev ^ 1) {
                let Some(t) = core.step(x, d) else { continue };
                if t == v && d != forbidden_end {
                    let mut tail = vec![Letter::from_direction(d)];
                    let mut at = s;
                    while at != start {
                        tail.push(Letter::from_direction(at % dirs));
                        at = parent[at].expect("reached from start");
                    }
                    tail.reverse();
                    found = Some(tail);
                    break 'search;
                }
                let next = t * dirs + d;
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some(s);
                    queue.push_back(next);
                }
            }
        }
        if let Some(tail) = found {
            if best.as_ref().is_none_or(|b| tail.len() < b.len()) {
                best = Some(tail);
            }
        }
    }
    Ok(best.map(|tail| {
        let mut letters = w.letters().to_vec();
        letters.extend(tail);
        Word::from_letters(w.rank(), letters).expect("same rank")
    }))
}

/// Whether `w` lifts into the cyclic core of `h` as part of an immersed cycle.
pub fn can_complete(w: &Word, h: &Subgroup) -> Result<bool, ConstructError> {
    Ok(completion_cycle(w, h)?.is_some())
}

fn validate_avoid(avoid: &[Subgroup], rank: u8) -> Result<(), ConstructError> {
    for (i, h) in avoid.iter().enumerate() {
        if h.ambient_rank() != rank {
            return Err(ConstructError::InvalidAvoidSet(format!(
                "entry {i} has ambient rank {} instead of {rank}",
                h.ambient_rank()
            )));
        }
        if h.is_trivial() {
            return Err(ConstructError::InvalidAvoidSet(format!("entry {i} is trivial")));
        }
        if let Index::Finite(n) = h.index() {
            return Err(ConstructError::InvalidAvoidSet(format!(
                "entry {i} has finite index {n}"
            )));
        }
    }
    Ok(())
}

/// True when the lift of `w` at every vertex of every cyclic core leaves it.
fn exits_everywhere(cores: &[CycleCore], w: &Word) -> bool {
    cores
        .iter()
        .all(|c| (0..c.vertex_count()).all(|v| c.trace(v, w).is_none()))
}

/// A freely reduced word whose lift at every vertex of the cyclic cores of
/// `avoid` ends outside them, so it cannot be completed in any of them.
///
/// Vertices are handled one at a time, cores in input order and vertices in
/// canonical order; whenever the current word still lifts inside the core at
/// the next vertex it is extended by the shortest continuation that leaves.
pub fn incompletable_word(avoid: &[Subgroup], rank: u8) -> Result<Word, ConstructError> {
    if rank < 2 {
        return Err(ConstructError::InvalidProblem(
            "ambient rank must be at least 2".into(),
        ));
    }
    validate_avoid(avoid, rank)?;
    if avoid.is_empty() {
        return Err(ConstructError::InvalidAvoidSet("avoid set is empty".into()));
    }
    let cores: Vec<CycleCore> = avoid
        .iter()
        .map(|h| CycleCore::of(h).expect("nontrivial subgroup has a cycle"))
        .collect();
    let mut word = Word::identity(rank);
    for core in &cores {
        for v in 0..core.vertex_count() {
            word = extend_past(core, v, word);
        }
    }
    debug_assert!(exits_everywhere(&cores, &word));
    Ok(word)
}

fn extend_past(core: &CycleCore, v: usize, word: Word) -> Word {
    let Some(end) = core.trace(v, &word) else {
        return word;
    };
    let tail = match word.last() {
        None => core.path_to_exit(v, None).expect("infinite index core has an exit"),
        Some(last) => core.continuation(end, last),
    };
    let mut letters = word.letters().to_vec();
    letters.extend(tail);
    let extended = Word::from_letters(word.rank(), letters).expect("same rank");
    debug_assert!(core.trace(v, &extended).is_none());
    extended
}

/// Prepends and appends the shortest positive words in `a`, `b` so that the
/// result begins with `a`, ends with `b` and stays freely reduced.
fn shape_for_generators(f: &Word) -> Word {
    let a = Letter::positive(0);
    let b = Letter::positive(1);
    let prefix: &[Letter] = match f.first() {
        Some(l) if l == a => &[],
        Some(l) if l == a.inverse() => &[a, b],
        _ => &[a],
    };
    let suffix: &[Letter] = match f.last() {
        Some(l) if l == b => &[],
        Some(l) if l == b.inverse() => &[a, b],
        _ => &[b],
    };
    let letters: Vec<Letter> = prefix
        .iter()
        .chain(f.letters())
        .chain(suffix)
        .copied()
        .collect();
    let shaped = Word::from_letters(f.rank(), letters).expect("same rank");
    debug_assert_eq!(shaped.len(), prefix.len() + f.len() + suffix.len());
    shaped
}

/// Inputs to [`construct_malnormal`].
#[derive(Debug, Clone)]
pub struct AvoidanceProblem {
    pub ambient_rank: u8,
    pub target_rank: usize,
    pub avoid: Vec<Subgroup>,
    pub rng_seed: u64,
    pub attempt_cap: usize,
}

impl AvoidanceProblem {
    pub fn new(ambient_rank: u8, target_rank: usize, avoid: Vec<Subgroup>, rng_seed: u64) -> Self {
        AvoidanceProblem {
            ambient_rank,
            target_rank,
            avoid,
            rng_seed,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), ConstructError> {
        if self.ambient_rank < 2 {
            return Err(ConstructError::InvalidProblem(
                "ambient rank must be at least 2".into(),
            ));
        }
        if self.target_rank == 0 {
            return Err(ConstructError::InvalidProblem(
                "target rank must be at least 1".into(),
            ));
        }
        validate_avoid(&self.avoid, self.ambient_rank)
    }
}

/// A constructed subgroup together with the evidence that it does its job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub subgroup: Subgroup,
    pub generators: Vec<Word>,
    pub target_rank: usize,
    pub f_word: Option<Word>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    /// Bases of the avoided subgroups the checks refer to.
    pub avoid: Vec<Vec<Word>>,
    pub checks: BTreeMap<String, bool>,
}

impl Certificate {
    pub fn ambient_rank(&self) -> u8 {
        self.subgroup.ambient_rank()
    }

    pub fn all_checks_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.values().all(|&ok| ok)
    }

    pub fn avoid_subgroups(&self) -> Vec<Subgroup> {
        self.avoid
            .iter()
            .map(|gens| Subgroup::from_generators(gens, self.ambient_rank()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let record = CertificateRecord {
            ambient_rank: self.ambient_rank(),
            target_rank: self.target_rank,
            generators: self.generators.iter().map(Word::to_string).collect(),
            f: self.f_word.as_ref().map(Word::to_string),
            p: self.p,
            q: self.q,
            avoid: self
                .avoid
                .iter()
                .map(|gens| gens.iter().map(Word::to_string).collect())
                .collect(),
            checks: self.checks.clone(),
        };
        serde_json::to_string_pretty(&record).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Certificate, ConstructError> {
        let record: CertificateRecord = serde_json::from_str(text)
            .map_err(|e| ConstructError::MalformedCertificate(e.to_string()))?;
        let rank = record.ambient_rank as usize;
        let words = |list: &[String]| -> Result<Vec<Word>, ConstructError> {
            list.iter()
                .map(|s| parse_word(s, rank).map_err(ConstructError::from))
                .collect()
        };
        let generators = words(&record.generators)?;
        let avoid = record
            .avoid
            .iter()
            .map(|gens| words(gens))
            .collect::<Result<Vec<_>, _>>()?;
        let f_word = record
            .f
            .as_deref()
            .map(|s| parse_word(s, rank))
            .transpose()?;
        Ok(Certificate {
            subgroup: Subgroup::from_generators(&generators, record.ambient_rank),
            generators,
            target_rank: record.target_rank,
            f_word,
            p: record.p,
            q: record.q,
            avoid,
            checks: record.checks,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateRecord {
    ambient_rank: u8,
    target_rank: usize,
    generators: Vec<String>,
    f: Option<String>,
    p: Option<usize>,
    q: Option<usize>,
    #[serde(default)]
    avoid: Vec<Vec<String>>,
    checks: BTreeMap<String, bool>,
}

/// Recomputes every check from the generators alone.
pub fn verify_certificate(certificate: &Certificate, avoid: &[Subgroup]) -> Certificate {
    let rank = certificate.ambient_rank();
    let subgroup = Subgroup::from_generators(&certificate.generators, rank);
    let mut checks = BTreeMap::new();
    checks.insert(
        "rank_equals_n".to_string(),
        certificate.generators.len() == certificate.target_rank
            && subgroup.rank() == certificate.target_rank,
    );
    checks.insert("is_malnormal".to_string(), is_malnormal(&subgroup));
    for (i, k) in avoid.iter().enumerate() {
        let ok = k.ambient_rank() == rank
            && conjugates_meet_trivially(k, &subgroup).unwrap_or(false);
        checks.insert(format!("meets_trivially_{i}"), ok);
    }
    Certificate {
        subgroup,
        generators: certificate.generators.clone(),
        target_rank: certificate.target_rank,
        f_word: certificate.f_word.clone(),
        p: certificate.p,
        q: certificate.q,
        avoid: avoid.iter().map(Subgroup::basis).collect(),
        checks,
    }
}

fn random_cyclically_reduced<R: Rng>(rng: &mut R, rank: u8, length: usize) -> Word {
    let directions = 2 * rank as usize;
    loop {
        let mut letters: Vec<Letter> = Vec::with_capacity(length);
        for i in 0..length {
            let letter = loop {
                let candidate = Letter::from_direction(rng.gen_range(0..directions));
                if i == 0 || letters[i - 1] != candidate.inverse() {
                    break candidate;
                }
            };
            letters.push(letter);
        }
        let word = Word::from_reduced(rank, letters);
        if word.is_cyclically_reduced() {
            return word;
        }
    }
}

/// Samples tuples of `n` cyclically reduced words of lengths 2, 3, … until
/// one freely generates a malnormal subgroup of rank `n`.
pub fn random_malnormal_tuple<R: Rng>(
    rng: &mut R,
    rank: u8,
    n: usize,
    attempt_cap: usize,
) -> Result<Vec<Word>, ConstructError> {
    for attempt in 0..attempt_cap {
        let length = 2 + attempt / ATTEMPTS_PER_LENGTH;
        let words: Vec<Word> = (0..n)
            .map(|_| random_cyclically_reduced(rng, rank, length))
            .collect();
        let h = Subgroup::from_generators(&words, rank);
        if h.rank() == n && is_malnormal(&h) {
            return Ok(words);
        }
    }
    Err(ConstructError::SearchBudgetExhausted(attempt_cap))
}

/// Builds and certifies a malnormal subgroup of rank `target_rank` meeting
/// every conjugate of every avoided subgroup trivially.
pub fn construct_malnormal(problem: &AvoidanceProblem) -> Result<Certificate, ConstructError> {
    problem.validate()?;
    let rank = problem.ambient_rank;
    let n = problem.target_rank;
    let mut rng = ChaCha8Rng::seed_from_u64(problem.rng_seed);

    let (generators, f_word, p, q) = if problem.avoid.is_empty() {
        let gens = random_malnormal_tuple(&mut rng, rank, n, problem.attempt_cap)?;
        (gens, None, None, None)
    } else {
        let f = malnormal_seed(&problem.avoid, rank)?;
        let p = 3.max(f.max_power(0) + 1);
        let q = 3.max(f.max_power(1) + 1);
        let (x, y) = malnormal_generators(&f, p, q)?;
        let gens = if n == 2 {
            vec![x, y]
        } else {
            let inner = random_malnormal_tuple(&mut rng, 2, n, problem.attempt_cap)?;
            let images = [x, y];
            inner.iter().map(|w| w.substitute(&images)).collect()
        };
        (gens, Some(f), Some(p), Some(q))
    };

    let draft = Certificate {
        subgroup: Subgroup::from_generators(&generators, rank),
        generators,
        target_rank: n,
        f_word,
        p,
        q,
        avoid: Vec::new(),
        checks: BTreeMap::new(),
    };
    let certificate = verify_certificate(&draft, &problem.avoid);
    if let Some((name, _)) = certificate.checks.iter().find(|(_, ok)| !**ok) {
        return Err(ConstructError::CheckFailed(name.clone()));
    }
    Ok(certificate)
}

/// The incompletable word, reshaped to begin with `a` and end with `b`; so
/// every power of it is freely reduced as written and still exits every core.
pub fn malnormal_seed(avoid: &[Subgroup], rank: u8) -> Result<Word, ConstructError> {
    let cores: Vec<CycleCore> = avoid.iter().filter_map(CycleCore::of).collect();
    let mut f = shape_for_generators(&incompletable_word(avoid, rank)?);
    // Prefixes and suffixes preserve the exit property; re-check regardless.
    while !exits_everywhere(&cores, &f) {
        for core in &cores {
            for v in 0..core.vertex_count() {
                f = extend_past(core, v, f);
            }
        }
        f = shape_for_generators(&f);
    }
    Ok(f)
}
