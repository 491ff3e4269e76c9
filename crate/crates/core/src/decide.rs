//! Deciding virtual free-by-cyclicity from hypotheses on a group.
//!
//! A hyperbolic, virtually compact special group of rational cohomological
//! dimension at most two is virtually free-by-cyclic exactly when its second
//! L²-Betti number vanishes. The converse direction needs no hypotheses:
//! virtually free-by-cyclic groups always have `b₂ = 0` and `cd_ℚ ≤ 2`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("cd_Q <= 2 and cd_Q > 2 cannot both hold")]
    InconsistentFlags,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl DecideError {
    pub fn name(&self) -> &'static str {
        match self {
            DecideError::InconsistentFlags => "InconsistentFlags",
            DecideError::ParameterOutOfRange(_) => "ParameterOutOfRange",
            DecideError::UnknownPreset(_) => "UnknownPreset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags {
    pub hyperbolic: bool,
    pub virtually_compact_special: bool,
    pub cd_q_at_most_2: bool,
    pub b2_zero: bool,
    pub cd_q_known_exceeds_2: bool,
}

impl Flags {
    pub fn new(hyperbolic: bool, vcs: bool, cd2: bool, b2_zero: bool, cd_exceeds: bool) -> Flags {
        Flags {
            hyperbolic,
            virtually_compact_special: vcs,
            cd_q_at_most_2: cd2,
            b2_zero,
            cd_q_known_exceeds_2: cd_exceeds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

pub fn decide_vfbc(flags: Flags) -> Result<Decision, DecideError> {
    if flags.cd_q_at_most_2 && flags.cd_q_known_exceeds_2 {
        return Err(DecideError::InconsistentFlags);
    }
    let mut reasons = Vec::new();
    if !flags.b2_zero {
        reasons.push("virtually free-by-cyclic groups have vanishing second L²-Betti number".into());
    }
    if flags.cd_q_known_exceeds_2 {
        reasons.push(
            "virtually free-by-cyclic groups have rational cohomological dimension at most 2".into(),
        );
    }
    if !reasons.is_empty() {
        return Ok(Decision {
            verdict: Verdict::No,
            reasons,
        });
    }
    let missing: Vec<&str> = [
        (flags.hyperbolic, "hyperbolic"),
        (flags.virtually_compact_special, "virtually compact special"),
        (flags.cd_q_at_most_2, "cd_Q <= 2"),
    ]
    .into_iter()
    .filter(|(holds, _)| !holds)
    .map(|(_, name)| name)
    .collect();
    if missing.is_empty() {
        return Ok(Decision {
            verdict: Verdict::Yes,
            reasons: vec![
                "hyperbolic, virtually compact special, cd_Q <= 2 and b2 = 0 imply virtually free-by-cyclic"
                    .into(),
            ],
        });
    }
    Ok(Decision {
        verdict: Verdict::Inconclusive,
        reasons: vec![
            format!("not known: {}", missing.join(", ")),
            "b2 = 0 alone does not suffice: BS(1,2^k), k >= 2, has cd_Q = 2 and b2 = 0 but is not free-by-cyclic"
                .into(),
        ],
    })
}

/// Named hypothesis sets for families whose verdict is known.
pub const PRESETS: &[(&str, Flags)] = &[
    ("surface-one-relator", YES),
    ("one-relator-torsion", YES),
    ("negative-immersions", YES),
    ("small-cancellation", YES),
    ("ascending-hnn", YES),
    ("two-complex-h2-zero", YES),
    (
        "baumslag-solitar",
        Flags {
            hyperbolic: false,
            virtually_compact_special: false,
            cd_q_at_most_2: true,
            b2_zero: true,
            cd_q_known_exceeds_2: false,
        },
    ),
];

const YES: Flags = Flags {
    hyperbolic: true,
    virtually_compact_special: true,
    cd_q_at_most_2: true,
    b2_zero: true,
    cd_q_known_exceeds_2: false,
};

pub fn preset(name: &str) -> Result<Flags, DecideError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| *f)
        .ok_or_else(|| DecideError::UnknownPreset(name.to_string()))
}

/// Whether uniform lattices in the Bourdon building `X_{p,q}` are virtually
/// free-by-cyclic.
pub fn bourdon_vfbc(p: u64, q: u64) -> Result<bool, DecideError> {
    if p < 5 {
        return Err(DecideError::ParameterOutOfRange(format!("p = {p} < 5")));
    }
    if q < 2 {
        return Err(DecideError::ParameterOutOfRange(format!("q = {q} < 2")));
    }
    Ok(q < p - 1)
}
