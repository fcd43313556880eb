//! Collision-free photon patterns and their enumeration.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest mode count a pattern can describe (one bit per mode in a `u64`).
pub const MAX_MODES: usize = 64;

/// Default ceiling on the number of patterns [`enumerate_patterns`] will materialize.
pub const PATTERN_GUARD: u64 = 100_000_000;

/// A binary occupation vector `S = (s_0, …, s_{n-1})` with `s_i ∈ {0, 1}`.
///
/// Bit `i` of the mask is mode `i`. The pattern selects the rows and columns
/// of a matrix that form the submatrix `B_S`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhotonPattern {
    n: u8,
    k: u8,
    mask: u64,
}

impl PhotonPattern {
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n > MAX_MODES {
            return Err(Error::limit(format!("{n} modes exceeds the {MAX_MODES}-mode pattern limit")));
        }
        if n < MAX_MODES && mask >> n != 0 {
            return Err(Error::invalid(format!("mask {mask:#x} has bits beyond mode {n}")));
        }
        Ok(Self {
            n: n as u8,
            k: mask.count_ones() as u8,
            mask,
        })
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in indices {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range for {n} modes")));
            }
            if mask & (1 << i) != 0 {
                return Err(Error::invalid(format!("index {i} repeated")));
            }
            mask |= 1 << i;
        }
        Self::from_mask(n, mask)
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut mask = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 if i < MAX_MODES => mask |= 1 << i,
                1 => return Err(Error::limit("pattern longer than 64 modes")),
                _ => return Err(Error::invalid(format!("entry {b} at mode {i} is not 0 or 1"))),
            }
        }
        Self::from_mask(bits.len(), mask)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_mask(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        let mask = if n == MAX_MODES { u64::MAX } else { (1u64 << n) - 1 };
        Self::from_mask(n, mask)
    }

    /// Mode count.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Photon count (number of ones).
    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n() && self.mask & (1 << i) != 0
    }

    /// Occupied modes in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter(self.mask)
    }

    /// Empty modes in ascending order.
    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&i| self.mask & (1 << i) == 0)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.ones().collect()
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n()).map(|i| u8::from(self.contains(i))).collect()
    }

    /// Number of modes occupied in both patterns.
    pub fn overlap(&self, other: &PhotonPattern) -> usize {
        (self.mask & other.mask).count_ones() as usize
    }

    pub fn union(&self, other: &PhotonPattern) -> Result<PhotonPattern> {
        if self.n != other.n {
            return Err(Error::invalid("union of patterns with different mode counts"));
        }
        Self::from_mask(self.n(), self.mask | other.mask)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Patterns are ordered by mode count, then photon count, then lexicographically
/// by their ascending index tuples; this is the order of [`patterns`].
impl Ord for PhotonPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.k.cmp(&other.k))
            .then_with(|| self.ones().cmp(other.ones()))
    }
}

impl PartialOrd for PhotonPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bitstring form, mode 0 first: `"1010"` occupies modes 0 and 2.
impl fmt::Display for PhotonPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PhotonPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhotonPattern({self})")
    }
}

impl FromStr for PhotonPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::invalid(format!("bad character {:?} in bitstring", c as char))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for PhotonPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PhotonPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact binomial coefficient, `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n-k+i) is divisible by i since acc = C(n-k+i-1, i-1).
        acc = acc * (n as u128 - k as u128 + i) / i;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Streams all `C(n, k)` patterns in lexicographic order of their index tuples,
/// starting at `{0, 1, …, k-1}`.
#[derive(Debug, Clone)]
pub struct Patterns {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Patterns {
    type Item = PhotonPattern;

    fn next(&mut self) -> Option<PhotonPattern> {
        if self.done {
            return None;
        }
        let mask = self.idx.iter().fold(0u64, |m, &i| m | 1 << i);
        let out = PhotonPattern {
            n: self.n as u8,
            k: self.idx.len() as u8,
            mask,
        };
        // advance to the next combination
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

pub fn patterns(n: usize, k: usize) -> Result<Patterns> {
    if n > MAX_MODES {
        return Err(Error::limit(format!("{n} modes exceeds the {MAX_MODES}-mode pattern limit")));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    Ok(Patterns {
        n,
        idx: (0..k).collect(),
        done: false,
    })
}

/// Materializes every pattern of `n` modes with `k` photons, refusing when
/// `C(n, k)` exceeds [`PATTERN_GUARD`].
pub fn enumerate_patterns(n: usize, k: usize) -> Result<Vec<PhotonPattern>> {
    enumerate_patterns_with_limit(n, k, PATTERN_GUARD)
}

pub fn enumerate_patterns_with_limit(n: usize, k: usize, limit: u64) -> Result<Vec<PhotonPattern>> {
    let count = pattern_count(n, k, limit)?;
    let mut out = Vec::with_capacity(count as usize);
    out.extend(patterns(n, k)?);
    Ok(out)
}

/// `C(n, k)`, or a resource-limit error when it exceeds `limit`.
pub(crate) fn pattern_count(n: usize, k: usize, limit: u64) -> Result<u64> {
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    match binomial(n as u64, k as u64) {
        Some(c) if c <= limit => Ok(c),
        _ => Err(Error::limit(format!("C({n}, {k}) patterns exceeds the enumeration limit {limit}"))),
    }
}
