//! Hierarchies of HNN extensions and amalgams over free edge groups, with
//! their Euler characteristics and L²-Betti numbers.
//!
//! Text form:
//!
//! ```text
//! node   := "(free" INT ")" | "(hnn" node "over" INT ")" | "(amal" node node "over" INT ")"
//! pragma := "!no-independence"   marks the node that follows
//! ```
//!
//! Every internal node is taken to have an L²-independent edge group unless
//! marked; the calculator refuses marked hierarchies and lists the
//! assumptions it relied on otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("negative rank at byte {position}")]
    NegativeRank { position: usize },
    #[error("the trivial group has no hierarchy report")]
    TrivialGroup,
    #[error("node at {0} is not assumed L²-independent")]
    IndependenceNotAssumed(String),
    #[error("hierarchy has Euler characteristic {0} > 0, impossible for a nontrivial hierarchy group")]
    NegativeBetti(String),
    #[error("need at least 2 generators, got {0}")]
    TooFewGenerators(u64),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("malformed report: {0}")]
    MalformedReport(String),
}

impl HierarchyError {
    pub fn name(&self) -> &'static str {
        match self {
            HierarchyError::Syntax { .. } => "SyntaxError",
            HierarchyError::NegativeRank { .. } => "NegativeRank",
            HierarchyError::TrivialGroup => "TrivialGroup",
            HierarchyError::IndependenceNotAssumed(_) => "IndependenceNotAssumed",
            HierarchyError::NegativeBetti(_) => "NegativeBetti",
            HierarchyError::TooFewGenerators(_) => "TooFewGenerators",
            HierarchyError::ParameterOutOfRange(_) => "ParameterOutOfRange",
            HierarchyError::MalformedReport(_) => "MalformedReport",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Hierarchy {
    Free(u64),
    Hnn {
        base: Box<Hierarchy>,
        edge_rank: u64,
        independent: bool,
    },
    /// The edge group is assumed L²-independent in `left`.
    Amalgam {
        left: Box<Hierarchy>,
        right: Box<Hierarchy>,
        edge_rank: u64,
        independent: bool,
    },
}

impl Hierarchy {
    pub fn free(rank: u64) -> Hierarchy {
        Hierarchy::Free(rank)
    }

    pub fn hnn(base: Hierarchy, edge_rank: u64) -> Hierarchy {
        Hierarchy::Hnn {
            base: Box::new(base),
            edge_rank,
            independent: true,
        }
    }

    pub fn amalgam(left: Hierarchy, right: Hierarchy, edge_rank: u64) -> Hierarchy {
        Hierarchy::Amalgam {
            left: Box::new(left),
            right: Box::new(right),
            edge_rank,
            independent: true,
        }
    }

    pub fn parse(text: &str) -> Result<Hierarchy, HierarchyError> {
        let mut parser = Parser::new(text);
        let node = parser.node()?;
        parser.skip_space();
        if parser.pos < text.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(node)
    }

    /// Euler characteristic: `1 − n` on free leaves, additive over splittings.
    pub fn euler_char(&self) -> BigRational {
        let free = |n: u64| BigRational::from_integer(BigInt::from(1) - BigInt::from(n));
        match self {
            Hierarchy::Free(n) => free(*n),
            Hierarchy::Hnn { base, edge_rank, .. } => base.euler_char() - free(*edge_rank),
            Hierarchy::Amalgam {
                left,
                right,
                edge_rank,
                ..
            } => left.euler_char() + right.euler_char() - free(*edge_rank),
        }
    }

    fn visit_internal<'a>(&'a self, path: &mut String, out: &mut Vec<(String, &'a Hierarchy)>) {
        match self {
            Hierarchy::Free(_) => {}
            Hierarchy::Hnn { base, .. } => {
                out.push((path.clone(), self));
                let len = path.len();
                path.push_str("/base");
                base.visit_internal(path, out);
                path.truncate(len);
            }
            Hierarchy::Amalgam { left, right, .. } => {
                out.push((path.clone(), self));
                let len = path.len();
                path.push_str("/left");
                left.visit_internal(path, out);
                path.truncate(len);
                path.push_str("/right");
                right.visit_internal(path, out);
                path.truncate(len);
            }
        }
    }

    /// Internal nodes in preorder with their paths from the root.
    fn internal_nodes(&self) -> Vec<(String, &Hierarchy)> {
        let mut out = Vec::new();
        self.visit_internal(&mut "root".to_string(), &mut out);
        out
    }

    /// L²-Betti numbers of the hierarchy group.
    ///
    /// A free leaf of rank `n ≥ 1` has `b₁ = n − 1`. Any other hierarchy has
    /// `b₁ = −χ` and vanishing Betti numbers in every other degree.
    pub fn betti(&self) -> Result<BettiReport, HierarchyError> {
        match self {
            Hierarchy::Free(0) => Err(HierarchyError::TrivialGroup),
            Hierarchy::Free(n) => Ok(BettiReport::from_b1(
                BigRational::from_integer(BigInt::from(*n) - 1),
                Some(1),
                vec![format!("free group of rank {n}")],
            )),
            _ => {
                let mut assumptions = Vec::new();
                for (path, node) in self.internal_nodes() {
                    let (kind, edge_rank, independent, target) = match node {
                        Hierarchy::Hnn {
                            edge_rank,
                            independent,
                            ..
                        } => ("hnn", edge_rank, independent, "the base"),
                        Hierarchy::Amalgam {
                            edge_rank,
                            independent,
                            ..
                        } => ("amal", edge_rank, independent, "the left factor"),
                        Hierarchy::Free(_) => unreachable!("internal nodes only"),
                    };
                    if !independent {
                        return Err(HierarchyError::IndependenceNotAssumed(path));
                    }
                    assumptions.push(format!(
                        "{kind} node at {path}: free edge group of rank {edge_rank} is L²-independent in {target}"
                    ));
                }
                let chi = self.euler_char();
                if chi.is_positive() {
                    return Err(HierarchyError::NegativeBetti(chi.to_string()));
                }
                Ok(BettiReport::from_b1(-chi, Some(2), assumptions))
            }
        }
    }
}

impl fmt::Display for Hierarchy {
    /// Canonical text form; parses back to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pragma = |f: &mut fmt::Formatter<'_>, independent: bool| {
            if independent {
                Ok(())
            } else {
                f.write_str("!no-independence ")
            }
        };
        match self {
            Hierarchy::Free(n) => write!(f, "(free {n})"),
            Hierarchy::Hnn {
                base,
                edge_rank,
                independent,
            } => {
                pragma(f, *independent)?;
                write!(f, "(hnn {base} over {edge_rank})")
            }
            Hierarchy::Amalgam {
                left,
                right,
                edge_rank,
                independent,
            } => {
                pragma(f, *independent)?;
                write!(f, "(amal {left} {right} over {edge_rank})")
            }
        }
    }
}

impl std::str::FromStr for Hierarchy {
    type Err = HierarchyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hierarchy::parse(s)
    }
}

const PRAGMA: &str = "!no-independence";

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn error(&self, message: &str) -> HierarchyError {
        HierarchyError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_space(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn expect(&mut self, token: &str) -> Result<(), HierarchyError> {
        self.skip_space();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn keyword(&mut self) -> Result<&'a str, HierarchyError> {
        self.skip_space();
        let rest = self.rest();
        let len = rest
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a keyword"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn integer(&mut self) -> Result<u64, HierarchyError> {
        self.skip_space();
        let start = self.pos;
        let rest = self.rest();
        let negative = rest.starts_with('-');
        let digits = &rest[negative as usize..];
        let len = digits
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(digits.len());
        if len == 0 {
            return Err(self.error("expected an integer"));
        }
        if negative {
            return Err(HierarchyError::NegativeRank { position: start });
        }
        self.pos += len;
        digits[..len].parse().map_err(|_| HierarchyError::Syntax {
            position: start,
            message: "integer too large".into(),
        })
    }

    fn node(&mut self) -> Result<Hierarchy, HierarchyError> {
        self.skip_space();
        let mut independent = true;
        if self.rest().starts_with(PRAGMA) {
            self.pos += PRAGMA.len();
            independent = false;
            self.skip_space();
        }
        let open = self.pos;
        self.expect("(")?;
        let keyword_at = {
            self.skip_space();
            self.pos
        };
        let node = match self.keyword()? {
            "free" => {
                if !independent {
                    return Err(HierarchyError::Syntax {
                        position: open,
                        message: "pragma applies only to hnn and amal nodes".into(),
                    });
                }
                Hierarchy::Free(self.integer()?)
            }
            "hnn" => {
                let base = self.node()?;
                self.over()?;
                Hierarchy::Hnn {
                    base: Box::new(base),
                    edge_rank: self.integer()?,
                    independent,
                }
            }
            "amal" => {
                let left = self.node()?;
                let right = self.node()?;
                self.over()?;
                Hierarchy::Amalgam {
                    left: Box::new(left),
                    right: Box::new(right),
                    edge_rank: self.integer()?,
                    independent,
                }
            }
            other => {
                return Err(HierarchyError::Syntax {
                    position: keyword_at,
                    message: format!("unknown node kind `{other}`"),
                })
            }
        };
        self.expect(")")?;
        Ok(node)
    }

    fn over(&mut self) -> Result<(), HierarchyError> {
        let at = {
            self.skip_space();
            self.pos
        };
        match self.keyword() {
            Ok("over") => Ok(()),
            _ => Err(HierarchyError::Syntax {
                position: at,
                message: "expected `over`".into(),
            }),
        }
    }
}

/// Upper bound on the rational cohomological dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdBound {
    AtMost(u32),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiReport {
    pub euler_char: BigRational,
    /// L²-Betti numbers by degree; degrees not listed vanish.
    pub betti: BTreeMap<usize, BigRational>,
    pub cd_bound: CdBound,
    pub assumptions: Vec<String>,
}

impl BettiReport {
    fn from_b1(b1: BigRational, cd: Option<u32>, assumptions: Vec<String>) -> BettiReport {
        let betti = BTreeMap::from([
            (0, BigRational::zero()),
            (1, b1.clone()),
            (2, BigRational::zero()),
        ]);
        BettiReport {
            euler_char: -b1,
            betti,
            cd_bound: cd.map_or(CdBound::Unknown, CdBound::AtMost),
            assumptions,
        }
    }

    pub fn b(&self, degree: usize) -> BigRational {
        self.betti.get(&degree).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `Σ (−1)^i b_i`, to be compared with the Euler characteristic.
    pub fn alternating_sum(&self) -> BigRational {
        self.betti
            .iter()
            .map(|(&i, b)| if i % 2 == 0 { b.clone() } else { -b.clone() })
            .sum()
    }

    pub fn to_json(&self) -> String {
        let record = ReportRecord {
            euler_char: self.euler_char.to_string(),
            betti: self
                .betti
                .iter()
                .map(|(i, b)| (i.to_string(), b.to_string()))
                .collect(),
            cd_bound: match self.cd_bound {
                CdBound::AtMost(d) => Some(d),
                CdBound::Unknown => None,
            },
            assumptions: self.assumptions.clone(),
        };
        serde_json::to_string_pretty(&record).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<BettiReport, HierarchyError> {
        let malformed = |e: String| HierarchyError::MalformedReport(e);
        let record: ReportRecord =
            serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let rational = |s: &str| s.parse::<BigRational>().map_err(|e| malformed(e.to_string()));
        let mut betti = BTreeMap::new();
        for (i, b) in &record.betti {
            let degree = i.parse().map_err(|_| malformed(format!("bad degree `{i}`")))?;
            betti.insert(degree, rational(b)?);
        }
        Ok(BettiReport {
            euler_char: rational(&record.euler_char)?,
            betti,
            cd_bound: record.cd_bound.map_or(CdBound::Unknown, CdBound::AtMost),
            assumptions: record.assumptions,
        })
    }
}

impl fmt::Display for BettiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "euler_char {}", self.euler_char)?;
        for (i, b) in &self.betti {
            writeln!(f, "b{i} {b}")?;
        }
        match self.cd_bound {
            CdBound::AtMost(d) => writeln!(f, "cd <= {d}")?,
            CdBound::Unknown => writeln!(f, "cd unknown")?,
        }
        for a in &self.assumptions {
            writeln!(f, "assumes {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportRecord {
    euler_char: String,
    betti: BTreeMap<String, String>,
    cd_bound: Option<u32>,
    assumptions: Vec<String>,
}

/// Ascending HNN extension of `F(A, B)` whose associated subgroup is `F(A)`,
/// with `|A| = a`, `|B| = b`.
pub fn ascending_hnn_betti(a: u64, b: u64) -> Result<BettiReport, HierarchyError> {
    if a == 0 {
        return Err(HierarchyError::ParameterOutOfRange(
            "associated subgroup must have rank at least 1".into(),
        ));
    }
    let base = Hierarchy::Free(a + b);
    let chi = base.euler_char() - Hierarchy::Free(a).euler_char();
    Ok(BettiReport::from_b1(
        -chi,
        Some(2),
        vec![format!(
            "ascending HNN extension of a free group of rank {} along a subgroup of rank {a}",
            a + b
        )],
    ))
}

/// One-relator group on `n` generators; the relator is taken to be
/// cyclically reduced, not a proper power and to mention at least two
/// generators.
pub fn one_relator_betti(n: u64) -> Result<BettiReport, HierarchyError> {
    if n < 2 {
        return Err(HierarchyError::TooFewGenerators(n));
    }
    Ok(BettiReport::from_b1(
        BigRational::from_integer(BigInt::from(n) - 2),
        Some(2),
        vec![
            "relator is cyclically reduced and not a proper power".to_string(),
            "relator mentions at least two generators".to_string(),
        ],
    ))
}
