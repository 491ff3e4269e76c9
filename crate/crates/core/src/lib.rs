//! Finitely generated subgroups of free groups via Stallings graphs.
//!
//! The crate covers folding and core graphs, membership, index and bases,
//! fiber products for conjugate intersections and malnormality, an explicit
//! construction of malnormal subgroups avoiding the conjugates of a given
//! family, and a calculator for L²-Betti numbers of groups built by
//! hierarchies of HNN extensions and amalgams over free groups.

pub mod construct;
pub mod decide;
pub mod graph;
pub mod hierarchy;
pub mod pullback;
pub mod subgroup;
mod union_find;
pub mod word;

pub use construct::{
    can_complete, completion_cycle, construct_malnormal, incompletable_word, verify_certificate,
    AvoidanceProblem, Certificate, ConstructError,
};
pub use decide::{bourdon_vfbc, decide_vfbc, DecideError, Decision, Flags, Verdict};
pub use graph::{Edge, Folded, GraphError, StallingsGraph};
pub use hierarchy::{ascending_hnn_betti, one_relator_betti, BettiReport, CdBound, Hierarchy, HierarchyError};
pub use pullback::{conjugates_meet_trivially, intersection, is_malnormal, pullback, PullbackComponent};
pub use subgroup::{full_covers, select_free_subset, Index, Subgroup};
pub use word::{malnormal_generators, parse_word, parse_word_list, Letter, Word, WordError, MAX_RANK};
