//! Words over named labels and their Parikh vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

/// A transition label. Labels are compared lexicographically everywhere.
pub type Label = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("empty label in comma-separated word")]
    EmptyLabel,
    #[error("label {0:?} contains a reserved character")]
    ReservedCharacter(String),
}

/// Characters that would break the line formats or marking names.
pub(crate) const RESERVED: &[char] = &[',', ';', '=', ':', '#', '(', ')', '"'];

pub(crate) fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

/// A finite sequence of labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Label>);

impl Word {
    pub fn new<I, S>(letters: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Label>,
    {
        Word(letters.into_iter().map(Into::into).collect())
    }

    /// Parses `"aacbb"` as single-character labels, or `"go,stop,go"` as
    /// comma-separated labels.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word::default());
        }
        let letters: Vec<Label> = if text.contains(',') {
            text.split(',').map(|s| s.trim().to_string()).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        for l in &letters {
            if l.is_empty() {
                return Err(WordError::EmptyLabel);
            }
            if !valid_label(l) {
                return Err(WordError::ReservedCharacter(l.clone()));
            }
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&str> {
        self.0.first().map(String::as_str)
    }

    pub fn alphabet(&self) -> BTreeSet<Label> {
        self.0.iter().cloned().collect()
    }

    pub fn parikh(&self) -> ParikhVector {
        let mut pv = ParikhVector::default();
        for l in &self.0 {
            pv.increment(l);
        }
        pv
    }

    /// The word read from position `offset` cyclically.
    pub fn rotated(&self, offset: usize) -> Word {
        if self.0.is_empty() {
            return Word::default();
        }
        let k = offset % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(
            std::iter::repeat_n(self.0.iter().cloned(), times)
                .flatten()
                .collect(),
        )
    }

    /// Keeps only the letters in `keep`.
    pub fn project(&self, keep: &[&str]) -> Word {
        Word(
            self.0
                .iter()
                .filter(|l| keep.contains(&l.as_str()))
                .cloned()
                .collect(),
        )
    }

    /// Smallest offset `k` such that `self` equals `other` rotated by `k`.
    pub fn rotation_offset_in(&self, other: &Word) -> Option<usize> {
        if self.len() != other.len() {
            return None;
        }
        if self.is_empty() {
            return Some(0);
        }
        let doubled: Vec<&Label> = other.0.iter().chain(other.0.iter()).collect();
        let n = self.len();
        (0..n).find(|&k| doubled[k..k + n].iter().zip(&self.0).all(|(a, b)| *a == b))
    }

    /// Returns `(root, exponent)` with `self = root^exponent` and `root`
    /// primitive. The root has the smallest period dividing the length.
    pub fn primitive_root(&self) -> (Word, usize) {
        let n = self.len();
        if n == 0 {
            return (Word::default(), 1);
        }
        for p in 1..=n {
            if !n.is_multiple_of(p) {
                continue;
            }
            if (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return (Word(self.0[..p].to_vec()), n / p);
            }
        }
        unreachable!("the full length is always a period")
    }

    /// True when every label is a single character, so the word prints
    /// without separators.
    pub fn is_compact(&self) -> bool {
        self.0.iter().all(|l| l.chars().count() == 1)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_compact() {
            for l in &self.0 {
                f.write_str(l)?;
            }
            Ok(())
        } else {
            f.write_str(&self.0.join(","))
        }
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

/// Occurrence count per label. Only positive counts are stored, so two
/// vectors are equal exactly when they agree on every label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParikhVector {
    counts: BTreeMap<Label, u64>,
}

impl ParikhVector {
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<Label>,
    {
        let mut pv = ParikhVector::default();
        for (l, c) in counts {
            pv.add(&l.into(), c);
        }
        pv
    }

    pub fn get(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn add(&mut self, label: &str, count: u64) {
        if count > 0 {
            *self.counts.entry(label.to_string()).or_insert(0) += count;
        }
    }

    pub fn increment(&mut self, label: &str) {
        self.add(label, 1);
    }

    /// Labels with a positive count, in order.
    pub fn support(&self) -> BTreeSet<Label> {
        self.counts.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(l, c)| (l.as_str(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// gcd of the non-zero counts; 0 for the zero vector.
    pub fn gcd(&self) -> u64 {
        self.counts.values().fold(0, |g, c| g.gcd(c))
    }

    pub fn is_prime(&self) -> bool {
        self.gcd() == 1
    }

    /// Component-wise `self <= other`.
    pub fn le(&self, other: &ParikhVector) -> bool {
        self.counts.iter().all(|(l, c)| *c <= other.get(l))
    }

    /// Component-wise `self <= other` with at least one strict component.
    pub fn lt(&self, other: &ParikhVector) -> bool {
        self.le(other) && self != other
    }

    pub fn plus(&self, other: &ParikhVector) -> ParikhVector {
        let mut r = self.clone();
        for (l, c) in other.iter() {
            r.add(l, c);
        }
        r
    }

    pub fn scaled(&self, factor: u64) -> ParikhVector {
        ParikhVector::from_counts(self.counts.iter().map(|(l, c)| (l.clone(), c * factor)))
    }
}

impl fmt::Display for ParikhVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (l, c)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}:{c}")?;
        }
        f.write_str(")")
    }
}
