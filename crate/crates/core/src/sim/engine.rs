//! Direct-method event loop over per-node clocks.
//!
//! Every node carries one aggregate rate: `beta * (#infected neighbours) +
//! sigma` while susceptible, `delta` while infected, `gamma` while
//! recovered. Rates live in a binary sum tree so drawing the next node and
//! updating a neighbourhood after an event are both logarithmic.

use rand::Rng;

use crate::exact::NodeState;
use crate::graph::Graph;
use crate::params::EpidemicParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// S -> I
    Infection,
    /// I -> R
    Recovery,
    /// R -> S
    ImmunityLoss,
    /// S -> R
    Vaccination,
}

impl Transition {
    pub fn from_to(self) -> (NodeState, NodeState) {
        use NodeState::*;
        match self {
            Self::Infection => (S, I),
            Self::Recovery => (I, R),
            Self::ImmunityLoss => (R, S),
            Self::Vaccination => (S, R),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Infection => "S->I",
            Self::Recovery => "I->R",
            Self::ImmunityLoss => "R->S",
            Self::Vaccination => "S->R",
        }
    }
}

/// Complete binary tree of non-negative rates; internal nodes hold sums.
#[derive(Debug, Clone)]
pub(crate) struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(n: usize) -> Self {
        let leaves = n.next_power_of_two().max(1);
        Self {
            leaves,
            nodes: vec![0.0; 2 * leaves],
        }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut k = self.leaves + i;
        self.nodes[k] = value;
        // recompute from children so sums never accumulate drift
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Leaf `i` with `prefix(i) <= x < prefix(i) + rate(i)`.
    pub fn find(&self, mut x: f64) -> usize {
        let mut k = 1;
        while k < self.leaves {
            let left = self.nodes[2 * k];
            if x < left || self.nodes[2 * k + 1] == 0.0 {
                k *= 2;
            } else {
                x -= left;
                k = 2 * k + 1;
            }
        }
        k - self.leaves
    }
}

pub(crate) struct Engine<'a> {
    g: &'a Graph,
    p: EpidemicParams,
    pub state: Vec<NodeState>,
    infected_neighbours: Vec<u32>,
    rates: SumTree,
    pub infected: usize,
    pub susceptible: usize,
    pub t: f64,
}

impl<'a> Engine<'a> {
    pub fn new(g: &'a Graph, p: EpidemicParams, x0: &[NodeState]) -> Self {
        let n = g.node_count();
        let mut infected_neighbours = vec![0u32; n];
        for (i, c) in infected_neighbours.iter_mut().enumerate() {
            *c = g
                .neighbors(i)
                .iter()
                .filter(|&&j| x0[j] == NodeState::I)
                .count() as u32;
        }
        let mut e = Self {
            g,
            p,
            state: x0.to_vec(),
            infected_neighbours,
            rates: SumTree::new(n),
            infected: x0.iter().filter(|&&s| s == NodeState::I).count(),
            susceptible: x0.iter().filter(|&&s| s == NodeState::S).count(),
            t: 0.0,
        };
        for i in 0..n {
            e.refresh(i);
        }
        e
    }

    fn node_rate(&self, i: usize) -> f64 {
        match self.state[i] {
            NodeState::S => self.p.beta * self.infected_neighbours[i] as f64 + self.p.sigma,
            NodeState::I => self.p.delta,
            NodeState::R => self.p.gamma,
        }
    }

    fn refresh(&mut self, i: usize) {
        let r = self.node_rate(i);
        self.rates.set(i, r);
    }

    /// Advances to the next event if it happens no later than `t_max`.
    /// Returns `None` (leaving `t` untouched) otherwise.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        t_max: f64,
    ) -> Option<(f64, usize, Transition)> {
        let total = self.rates.total();
        if !(total > 0.0) {
            return None;
        }
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / total;
        let t_next = self.t + dt;
        if t_next > t_max {
            return None;
        }
        let x = rng.random::<f64>() * total;
        let node = self.rates.find(x);
        let transition = match self.state[node] {
            NodeState::S => {
                let infection = self.p.beta * self.infected_neighbours[node] as f64;
                let rate = self.rates.get(node);
                if rng.random::<f64>() * rate < infection {
                    Transition::Infection
                } else {
                    Transition::Vaccination
                }
            }
            NodeState::I => Transition::Recovery,
            NodeState::R => Transition::ImmunityLoss,
        };
        self.apply(node, transition);
        self.t = t_next;
        Some((t_next, node, transition))
    }

    fn apply(&mut self, node: usize, transition: Transition) {
        let (from, to) = transition.from_to();
        debug_assert_eq!(self.state[node], from);
        self.state[node] = to;
        match transition {
            Transition::Infection => {
                self.infected += 1;
                self.susceptible -= 1;
            }
            Transition::Recovery => self.infected -= 1,
            Transition::ImmunityLoss => self.susceptible += 1,
            Transition::Vaccination => self.susceptible -= 1,
        }
        self.refresh(node);
        let delta: i32 = match transition {
            Transition::Infection => 1,
            Transition::Recovery => -1,
            _ => 0,
        };
        if delta != 0 {
            for &j in self.g.neighbors(node) {
                self.infected_neighbours[j] = (self.infected_neighbours[j] as i32 + delta) as u32;
                if self.state[j] == NodeState::S {
                    self.refresh(j);
                }
            }
        }
    }
}
