//! Words in a free group of fixed ambient rank.
//!
//! Generators are numbered from zero internally and written as lowercase
//! ASCII letters (`a` is the first generator); the uppercase letter denotes
//! the inverse. The identity renders as `1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest supported ambient rank (one letter per generator).
pub const MAX_RANK: u8 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown letter {letter:?} at position {position} for rank {rank}")]
    UnknownLetter {
        letter: char,
        position: usize,
        rank: u8,
    },
    #[error("rank {0} is outside 1..=26")]
    RankOutOfRange(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

impl WordError {
    pub fn name(&self) -> &'static str {
        match self {
            WordError::UnknownLetter { .. } => "UnknownLetter",
            WordError::RankOutOfRange(_) => "RankOutOfRange",
            WordError::PreconditionViolated(_) => "PreconditionViolated",
        }
    }
}

pub(crate) fn check_rank(rank: usize) -> Result<u8, WordError> {
    if (1..=MAX_RANK as usize).contains(&rank) {
        Ok(rank as u8)
    } else {
        Err(WordError::RankOutOfRange(rank))
    }
}

/// A generator or its inverse.
///
/// The derived order is `a < A < b < B < ...`, which is the order used for
/// every canonical traversal in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    generator: u8,
    inverse: bool,
}

impl Letter {
    pub const fn new(generator: u8, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub const fn positive(generator: u8) -> Self {
        Letter::new(generator, false)
    }

    pub fn generator(self) -> u8 {
        self.generator
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Letter {
        Letter::new(self.generator, !self.inverse)
    }

    /// Index of this letter among the `2r` directions at a vertex.
    pub fn direction(self) -> usize {
        2 * self.generator as usize + self.inverse as usize
    }

    pub fn from_direction(direction: usize) -> Letter {
        Letter::new((direction / 2) as u8, direction % 2 == 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator) as char;
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: u8,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(rank: u8) -> Word {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn generator(rank: u8, generator: u8) -> Word {
        assert!(generator < rank, "generator {generator} out of rank {rank}");
        Word {
            rank,
            letters: vec![Letter::positive(generator)],
        }
    }

    /// Builds the free reduction of an arbitrary letter sequence.
    pub fn from_letters<I>(rank: u8, letters: I) -> Result<Word, WordError>
    where
        I: IntoIterator<Item = Letter>,
    {
        check_rank(rank as usize)?;
        let mut stack: Vec<Letter> = Vec::new();
        for (position, letter) in letters.into_iter().enumerate() {
            if letter.generator >= rank {
                return Err(WordError::UnknownLetter {
                    letter: letter.to_char(),
                    position,
                    rank,
                });
            }
            if stack.last() == Some(&letter.inverse()) {
                stack.pop();
            } else {
                stack.push(letter);
            }
        }
        Ok(Word {
            rank,
            letters: stack,
        })
    }

    /// Wraps letters that are already known to be freely reduced.
    pub(crate) fn from_reduced(rank: u8, letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1].inverse()));
        Word { rank, letters }
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Product `self · other`, freely reduced.
    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(self.rank, other.rank, "rank mismatch in product");
        let mut keep = self.letters.len();
        let mut skip = 0;
        while keep > 0
            && skip < other.letters.len()
            && self.letters[keep - 1] == other.letters[skip].inverse()
        {
            keep -= 1;
            skip += 1;
        }
        let mut letters = Vec::with_capacity(keep + other.letters.len() - skip);
        letters.extend_from_slice(&self.letters[..keep]);
        letters.extend_from_slice(&other.letters[skip..]);
        Word {
            rank: self.rank,
            letters,
        }
    }

    /// True when `self · other` needs no cancellation.
    pub fn joins_reduced(&self, other: &Word) -> bool {
        match (self.last(), other.first()) {
            (Some(x), Some(y)) => x != y.inverse(),
            _ => true,
        }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 {
            self.inverse()
        } else {
            self.clone()
        };
        let mut out = Word::identity(self.rank);
        for _ in 0..exponent.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `g · self · g⁻¹`
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.concat(self).concat(&g.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(x), Some(y)) => self.len() == 1 || x != y.inverse(),
            _ => true,
        }
    }

    /// Splits `self` as `conjugator · core · conjugator⁻¹` with `core`
    /// cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.letters.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        let core = Word::from_reduced(self.rank, self.letters[k..n - k].to_vec());
        let conjugator = Word::from_reduced(self.rank, self.letters[..k].to_vec());
        (core, conjugator)
    }

    /// Longest run of `generator` or its inverse, scanning the word linearly.
    pub fn max_power(&self, generator: u8) -> usize {
        let mut best = 0;
        let mut run = 0;
        let mut previous: Option<Letter> = None;
        for &letter in &self.letters {
            if letter.generator == generator {
                run = if previous == Some(letter) { run + 1 } else { 1 };
                best = best.max(run);
            } else {
                run = 0;
            }
            previous = Some(letter);
        }
        best
    }

    /// Image under the homomorphism sending generator `i` to `images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        assert_eq!(images.len(), self.rank as usize, "one image per generator");
        let target = images.first().map(|w| w.rank).unwrap_or(self.rank);
        let mut out = Word::identity(target);
        for letter in &self.letters {
            let image = &images[letter.generator as usize];
            out = if letter.inverse {
                out.concat(&image.inverse())
            } else {
                out.concat(image)
            };
        }
        out
    }

    /// Same letters viewed in a larger (or equal) ambient rank.
    pub fn with_rank(&self, rank: u8) -> Result<Word, WordError> {
        Word::from_letters(rank, self.letters.iter().copied())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for letter in &self.letters {
            write!(f, "{}", letter.to_char())?;
        }
        Ok(())
    }
}

/// Parses ASCII text (`a`, `A`, `b`, ...) into its free reduction.
///
/// `"1"` and the empty string both denote the identity.
pub fn parse_word(text: &str, rank: usize) -> Result<Word, WordError> {
    let rank = check_rank(rank)?;
    let text = text.trim();
    if text == "1" {
        return Ok(Word::identity(rank));
    }
    let mut letters = Vec::with_capacity(text.len());
    for (position, c) in text.chars().enumerate() {
        let letter = if c.is_ascii_lowercase() {
            Letter::new(c as u8 - b'a', false)
        } else if c.is_ascii_uppercase() {
            Letter::new(c as u8 - b'A', true)
        } else {
            return Err(WordError::UnknownLetter {
                letter: c,
                position,
                rank,
            });
        };
        if letter.generator >= rank {
            return Err(WordError::UnknownLetter {
                letter: c,
                position,
                rank,
            });
        }
        letters.push(letter);
    }
    Word::from_letters(rank, letters)
}

/// Parses a comma-separated list of words; blank entries are ignored.
pub fn parse_word_list(text: &str, rank: usize) -> Result<Vec<Word>, WordError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_word(s, rank))
        .collect()
}

impl FromStr for Letter {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => Ok(if c.is_ascii_lowercase() {
                Letter::new(c as u8 - b'a', false)
            } else {
                Letter::new(c as u8 - b'A', true)
            }),
            (Some(c), _) => Err(WordError::UnknownLetter {
                letter: c,
                position: 0,
                rank: MAX_RANK,
            }),
            (None, _) => Err(WordError::PreconditionViolated("empty letter".into())),
        }
    }
}

/// The two generators of the rank-two malnormal subgroup built from `f`:
/// `g₂g₁g₂^q f² g₁g₂` and `g₁g₂ f² g₁^p g₂g₁`, where `g₁ = a` and `g₂ = b`.
///
/// `f` must begin with `a` and end with `b`; `p` and `q` must be at least 3
/// and exceed the longest run of `a` (respectively `b`) in `f`. Under these
/// conditions the assembled words need no cancellation.
pub fn malnormal_generators(f: &Word, p: usize, q: usize) -> Result<(Word, Word), WordError> {
    let g1 = Letter::positive(0);
    let g2 = Letter::positive(1);
    if f.rank < 2 {
        return Err(WordError::PreconditionViolated(
            "ambient rank must be at least 2".into(),
        ));
    }
    if f.first() != Some(g1) || f.last() != Some(g2) {
        return Err(WordError::PreconditionViolated(format!(
            "f = {f} must begin with a and end with b"
        )));
    }
    let max_a = f.max_power(0);
    let max_b = f.max_power(1);
    if p < 3 || p <= max_a {
        return Err(WordError::PreconditionViolated(format!(
            "p = {p} must be at least 3 and exceed {max_a}"
        )));
    }
    if q < 3 || q <= max_b {
        return Err(WordError::PreconditionViolated(format!(
            "q = {q} must be at least 3 and exceed {max_b}"
        )));
    }

    let mut first = vec![g2, g1];
    first.extend(std::iter::repeat_n(g2, q));
    first.extend_from_slice(f.letters());
    first.extend_from_slice(f.letters());
    first.extend([g1, g2]);

    let mut second = vec![g1, g2];
    second.extend_from_slice(f.letters());
    second.extend_from_slice(f.letters());
    second.extend(std::iter::repeat_n(g1, p));
    second.extend([g2, g1]);

    let raw_lengths = (first.len(), second.len());
    let first = Word::from_letters(f.rank, first)?;
    let second = Word::from_letters(f.rank, second)?;
    if (first.len(), second.len()) != raw_lengths {
        return Err(WordError::PreconditionViolated(
            "cancellation occurred while assembling generators".into(),
        ));
    }
    Ok((first, second))
}
