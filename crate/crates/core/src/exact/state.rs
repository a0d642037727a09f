use std::fmt;

use crate::error::{Error, Result};

/// Compartment of a single node, with its ternary digit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum NodeState {
    S = 0,
    I = 1,
    R = 2,
}

impl NodeState {
    pub fn digit(self) -> u64 {
        self as u64
    }

    pub fn from_digit(d: u64) -> Option<Self> {
        match d {
            0 => Some(Self::S),
            1 => Some(Self::I),
            2 => Some(Self::R),
            _ => None,
        }
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Self::S => 'S',
            Self::I => 'I',
            Self::R => 'R',
        };
        write!(f, "{c}")
    }
}

/// Number of configurations of `n` nodes, if it fits in a `u64`.
pub fn state_count(n: usize) -> Option<u64> {
    3u64.checked_pow(u32::try_from(n).ok()?)
}

/// `k = Σ_i X_i 3^i` with node 0 as the least significant digit.
///
/// Panics if the index does not fit in a `u64` (more than 40 nodes); see
/// [`try_encode`].
pub fn encode(states: &[NodeState]) -> u64 {
    try_encode(states).expect("configuration index overflows u64")
}

pub fn try_encode(states: &[NodeState]) -> Option<u64> {
    states
        .iter()
        .rev()
        .try_fold(0u64, |k, s| k.checked_mul(3)?.checked_add(s.digit()))
}

pub fn decode(index: u64, n: usize) -> Result<Vec<NodeState>> {
    match state_count(n) {
        Some(total) if index < total => {}
        _ => return Err(Error::IndexOutOfRange { index, n }),
    }
    let mut k = index;
    Ok((0..n)
        .map(|_| {
            let s = NodeState::from_digit(k % 3).unwrap();
            k /= 3;
            s
        })
        .collect())
}

/// A full network state together with its ternary index (absent when the
/// index would not fit in a `u64`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkConfiguration {
    states: Vec<NodeState>,
    index: Option<u64>,
}

impl NetworkConfiguration {
    pub fn from_states(states: Vec<NodeState>) -> Self {
        let index = try_encode(&states);
        Self { states, index }
    }

    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        Ok(Self {
            states: decode(index, n)?,
            index: Some(index),
        })
    }

    pub fn all_susceptible(n: usize) -> Self {
        Self::from_states(vec![NodeState::S; n])
    }

    /// Every node susceptible except `node`, which is infected.
    pub fn one_infected(n: usize, node: usize) -> Result<Self> {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
        let mut states = vec![NodeState::S; n];
        states[node] = NodeState::I;
        Ok(Self::from_states(states))
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn index(&self) -> Option<u64> {
        self.index
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn count(&self, s: NodeState) -> usize {
        self.states.iter().filter(|&&x| x == s).count()
    }
}
