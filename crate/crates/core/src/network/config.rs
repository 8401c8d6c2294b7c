//! Mixed-radix indexing of parent configurations.
//!
//! A CPT row is addressed by one outcome index per parent, in the node's
//! parent order. Rows are laid out with the last parent varying fastest, so a
//! node with parent radices `(2, 3)` has rows `(0,0), (0,1), (0,2), (1,0), ...`.

use std::fmt;

use super::NetworkError;

/// One joint assignment of outcome indices to a node's parents.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParentConfig(Vec<usize>);

impl ParentConfig {
    pub fn new(assignment: Vec<usize>) -> Self {
        ParentConfig(assignment)
    }

    /// The configuration of a root node.
    pub fn empty() -> Self {
        ParentConfig(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Checks every index against its radix.
    pub fn is_valid_for(&self, radices: &[usize]) -> bool {
        self.0.len() == radices.len() && self.0.iter().zip(radices).all(|(i, r)| i < r)
    }
}

impl From<Vec<usize>> for ParentConfig {
    fn from(v: Vec<usize>) -> Self {
        ParentConfig(v)
    }
}

impl fmt::Display for ParentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

/// Number of configurations for the given radices, i.e. their product.
/// The empty product is 1.
pub fn config_count(radices: &[usize]) -> Result<usize, NetworkError> {
    radices
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .ok_or(NetworkError::ConfigOverflow)
}

/// Encodes a configuration as its row index (last parent fastest).
pub fn config_index(config: &ParentConfig, radices: &[usize]) -> Result<usize, NetworkError> {
    if !config.is_valid_for(radices) {
        return Err(NetworkError::ConfigOutOfRange {
            config: config.to_string(),
            radices: radices.to_vec(),
        });
    }
    let mut index = 0usize;
    for (&digit, &radix) in config.0.iter().zip(radices) {
        index = index
            .checked_mul(radix)
            .and_then(|v| v.checked_add(digit))
            .ok_or(NetworkError::ConfigOverflow)?;
    }
    Ok(index)
}

/// Inverse of [`config_index`].
pub fn config_at(index: usize, radices: &[usize]) -> Result<ParentConfig, NetworkError> {
    let count = config_count(radices)?;
    if index >= count {
        return Err(NetworkError::RowOutOfRange { index, count });
    }
    let mut digits = vec![0; radices.len()];
    let mut rest = index;
    for (slot, &radix) in digits.iter_mut().zip(radices).rev() {
        *slot = rest % radix;
        rest /= radix;
    }
    Ok(ParentConfig(digits))
}

/// Odometer over all configurations of `radices` in row order.
#[derive(Debug, Clone)]
pub struct Configs {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Configs {
    pub fn new(radices: &[usize]) -> Self {
        let next = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Configs {
            radices: radices.to_vec(),
            next,
        }
    }
}

impl Iterator for Configs {
    type Item = ParentConfig;

    fn next(&mut self) -> Option<ParentConfig> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                carried = false;
                break;
            }
            succ[pos] = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(ParentConfig(current))
    }
}
