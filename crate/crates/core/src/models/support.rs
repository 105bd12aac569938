use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A sorted, deduplicated set of coordinates.
///
/// Indices are stored 0-based. The text form (`Display` / `FromStr`) is the
/// comma-separated list of 1-based indices, e.g. `1,2,5,6`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Builds a set from 0-based indices, validating them against `n`.
    /// Duplicates are rejected rather than silently merged.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("duplicate index {} in support", w[0] + 1)));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::input(format!("index {} out of range 1..={}", last + 1, n)));
            }
        }
        Ok(SupportSet(indices))
    }

    /// Builds a set from 1-based indices (the convention used in text files).
    pub fn one_based(indices: &[usize], n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::input(format!("index {} out of range 1..={}", i, n)));
            }
            zero.push(i - 1);
        }
        Self::new(zero, n)
    }

    /// Caller guarantees `indices` is strictly increasing.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SupportSet(indices)
    }

    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// `{start, start+1, .., end-1}`.
    pub fn range(start: usize, end: usize) -> Self {
        SupportSet((start..end).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        let mut it = other.0.iter();
        'outer: for &x in &self.0 {
            for &y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        SupportSet(out)
    }

    /// The 1-based indices.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i + 1).collect()
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::input(format!(
                "index {} out of range 1..={}",
                last + 1,
                n
            ))),
            _ => Ok(()),
        }
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Parses the 1-based text form. Range validation against `n` is left to
/// [`SupportSet::check_within`] since the text form does not carry `n`.
impl FromStr for SupportSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SupportSet::empty());
        }
        let mut idx = Vec::new();
        for tok in s.split(',') {
            let v: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad support index {:?}", tok)))?;
            if v == 0 {
                return Err(Error::Parse("support indices are 1-based".into()));
            }
            idx.push(v - 1);
        }
        SupportSet::new(idx, usize::MAX)
    }
}
