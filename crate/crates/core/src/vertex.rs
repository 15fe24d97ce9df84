//! Vertex identifiers.
//!
//! Vertices of truncated infinite trees are named by their root path, a
//! sequence of child indices. Paths along rays get long, so they are stored
//! run-length encoded: the address of the 10 000th vertex of a ray is a single
//! run `(0, 9999)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A root-to-vertex path of child indices, run-length encoded.
///
/// Ordering is shortlex: shallower addresses come first, addresses of equal
/// depth compare lexicographically. Along a ray `v_1, v_2, ...` this is the
/// ray order, and the root is the minimum of every tree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Address {
    runs: Vec<(u32, u64)>,
    depth: u64,
}

impl Address {
    pub fn root() -> Self {
        Address::default()
    }

    pub fn from_steps(steps: &[u32]) -> Self {
        let mut a = Address::root();
        for &s in steps {
            a.push(s, 1);
        }
        a
    }

    /// Appends `count` copies of child index `child`.
    pub fn push(&mut self, child: u32, count: u64) {
        if count == 0 {
            return;
        }
        self.depth += count;
        match self.runs.last_mut() {
            Some((c, n)) if *c == child => *n += count,
            _ => self.runs.push((child, count)),
        }
    }

    pub fn child(&self, child: u32) -> Self {
        let mut a = self.clone();
        a.push(child, 1);
        a
    }

    pub fn repeated(&self, child: u32, count: u64) -> Self {
        let mut a = self.clone();
        a.push(child, count);
        a
    }

    pub fn concat(&self, other: &Address) -> Self {
        let mut a = self.clone();
        for &(c, n) in &other.runs {
            a.push(c, n);
        }
        a
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    pub fn runs(&self) -> &[(u32, u64)] {
        &self.runs
    }

    pub fn first_step(&self) -> Option<u32> {
        self.runs.first().map(|r| r.0)
    }

    pub fn last_step(&self) -> Option<u32> {
        self.runs.last().map(|r| r.0)
    }

    pub fn parent(&self) -> Option<Address> {
        if self.is_root() {
            return None;
        }
        let mut runs = self.runs.clone();
        let last = runs.last_mut().expect("non-root has a run");
        last.1 -= 1;
        if last.1 == 0 {
            runs.pop();
        }
        Some(Address {
            runs,
            depth: self.depth - 1,
        })
    }

    /// If `prefix` is a prefix of `self`, returns the remaining path.
    pub fn strip_prefix(&self, prefix: &Address) -> Option<Address> {
        if prefix.depth > self.depth {
            return None;
        }
        let mut rest = Address::root();
        let mut i = 0;
        let mut taken_in_run = 0u64;
        for &(pc, pn) in &prefix.runs {
            let mut need = pn;
            while need > 0 {
                let (c, n) = *self.runs.get(i)?;
                if c != pc {
                    return None;
                }
                let avail = n - taken_in_run;
                let take = avail.min(need);
                need -= take;
                taken_in_run += take;
                if taken_in_run == n {
                    i += 1;
                    taken_in_run = 0;
                }
            }
        }
        if i < self.runs.len() {
            let (c, n) = self.runs[i];
            rest.push(c, n - taken_in_run);
            for &(c, n) in &self.runs[i + 1..] {
                rest.push(c, n);
            }
        }
        Some(rest)
    }

    pub fn starts_with(&self, prefix: &Address) -> bool {
        self.strip_prefix(prefix).is_some()
    }

    /// `Some(j)` if the address is exactly `child` repeated `j` times.
    pub fn as_uniform_run(&self, child: u32) -> Option<u64> {
        match self.runs.as_slice() {
            [] => Some(0),
            [(c, n)] if *c == child => Some(*n),
            _ => None,
        }
    }

    /// Splits off the leading run of `child`: returns `(j, rest)` where the
    /// address is `child^j` followed by `rest`, and `rest` does not start
    /// with `child`.
    pub fn split_leading(&self, child: u32) -> (u64, Address) {
        match self.runs.first() {
            Some(&(c, n)) if c == child => {
                let mut rest = Address::root();
                for &(c, n) in &self.runs[1..] {
                    rest.push(c, n);
                }
                (n, rest)
            }
            _ => (0, self.clone()),
        }
    }

    fn steps(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.runs.iter().copied()
    }
}

impl Ord for Address {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.depth.cmp(&other.depth) {
            Ordering::Equal => {}
            o => return o,
        }
        let mut a = self.steps().peekable();
        let mut b = other.steps().peekable();
        let (mut ra, mut rb) = (None::<(u32, u64)>, None::<(u32, u64)>);
        loop {
            if ra.is_none() {
                ra = a.next();
            }
            if rb.is_none() {
                rb = b.next();
            }
            match (ra, rb) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) | (None, Some(_)) => unreachable!("equal depth"),
                (Some((ca, na)), Some((cb, nb))) => {
                    if ca != cb {
                        return ca.cmp(&cb);
                    }
                    let m = na.min(nb);
                    ra = (na > m).then_some((ca, na - m));
                    rb = (nb > m).then_some((cb, nb - m));
                }
            }
        }
    }
}

impl PartialOrd for Address {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text form: `r` for the root, then `.c` per step, with `.c^k` for a run
/// of `k > 1` equal steps. The fifth vertex of a ray is `r.0^4`.
impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("r")?;
        for &(c, n) in &self.runs {
            if n == 1 {
                write!(f, ".{c}")?;
            } else {
                write!(f, ".{c}^{n}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed address {0:?}")]
pub struct AddressParseError(pub String);

impl FromStr for Address {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AddressParseError(s.to_string());
        let mut parts = s.split('.');
        if parts.next() != Some("r") {
            return Err(err());
        }
        let mut a = Address::root();
        for part in parts {
            let (c, n) = match part.split_once('^') {
                Some((c, n)) => (c, n.parse::<u64>().map_err(|_| err())?),
                None => (part, 1),
            };
            let c: u32 = c.parse().map_err(|_| err())?;
            if n == 0 {
                return Err(err());
            }
            a.push(c, n);
        }
        Ok(a)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifier of a vertex in a [`LabeledTree`](crate::tree::LabeledTree).
///
/// Integers name vertices of ad-hoc finite trees, addresses name vertices of
/// truncated generators, and free-form names cover anything else read from
/// a file. Variants order as `Int < Addr < Name`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    Int(u64),
    Addr(Address),
    Name(String),
}

impl VertexId {
    pub fn as_address(&self) -> Option<&Address> {
        match self {
            VertexId::Addr(a) => Some(a),
            _ => None,
        }
    }
}

impl From<u64> for VertexId {
    fn from(n: u64) -> Self {
        VertexId::Int(n)
    }
}

impl From<Address> for VertexId {
    fn from(a: Address) -> Self {
        VertexId::Addr(a)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        s.parse().expect("vertex id parsing is infallible")
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Int(n) => write!(f, "{n}"),
            VertexId::Addr(a) => write!(f, "{a}"),
            VertexId::Name(s) => f.write_str(s),
        }
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VertexId {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(n) = s.parse::<u64>() {
            if n.to_string() == s {
                return Ok(VertexId::Int(n));
            }
        }
        if let Ok(a) = s.parse::<Address>() {
            if a.to_string() == s {
                return Ok(VertexId::Addr(a));
            }
        }
        Ok(VertexId::Name(s.to_string()))
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(s.parse().expect("infallible"))
    }
}
