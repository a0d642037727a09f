use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::engine::{Engine, Transition};
use crate::error::{Error, Result};
use crate::exact::{NetworkConfiguration, NodeState};
use crate::graph::Graph;
use crate::params::EpidemicParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub node: usize,
    pub transition: Transition,
}

/// One sampled trajectory up to `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPath {
    pub seed: u64,
    pub t_max: f64,
    pub initial: Vec<NodeState>,
    pub events: Vec<Event>,
    /// First time with no infected node; `None` if censored at `t_max`.
    pub hitting_time_final_set: Option<f64>,
    /// First time with every node susceptible. Only tracked for `sigma = 0`.
    pub hitting_time_all_s: Option<f64>,
}

impl SimulationPath {
    /// Replays the events from the initial state, checking every transition
    /// starts from the node's current state. Returns the final state.
    pub fn replay(&self) -> Result<Vec<NodeState>> {
        let mut state = self.initial.clone();
        let mut last = 0.0;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.time > last) && k > 0 || e.time < 0.0 || e.time > self.t_max {
                return Err(Error::InvalidConfiguration(format!(
                    "event {k} at t={} out of order",
                    e.time
                )));
            }
            let (from, to) = e.transition.from_to();
            if state.get(e.node) != Some(&from) {
                return Err(Error::InvalidConfiguration(format!(
                    "event {k}: {} on node {} in state {:?}",
                    e.transition.label(),
                    e.node,
                    state.get(e.node)
                )));
            }
            state[e.node] = to;
            last = e.time;
        }
        Ok(state)
    }

    /// Number of infected nodes just after time `t`.
    pub fn infected_at(&self, t: f64) -> usize {
        let mut count = self.initial.iter().filter(|&&s| s == NodeState::I).count() as i64;
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.transition {
                Transition::Infection => count += 1,
                Transition::Recovery => count -= 1,
                _ => {}
            }
        }
        count as usize
    }
}

pub fn simulate_path(
    g: &Graph,
    p: &EpidemicParams,
    x0: &NetworkConfiguration,
    seed: u64,
    t_max: f64,
) -> Result<SimulationPath> {
    check_inputs(g, p, x0, t_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut engine = Engine::new(g, *p, x0.states());
    let n = g.node_count();
    let track_all_s = p.sigma == 0.0;
    let mut hit_final = (engine.infected == 0).then_some(0.0);
    let mut hit_all_s = (track_all_s && engine.susceptible == n).then_some(0.0);
    let mut events = Vec::new();
    while let Some((t, node, transition)) = engine.step(&mut rng, t_max) {
        events.push(Event {
            time: t,
            node,
            transition,
        });
        if hit_final.is_none() && engine.infected == 0 {
            hit_final = Some(t);
        }
        if track_all_s && hit_all_s.is_none() && engine.susceptible == n {
            hit_all_s = Some(t);
        }
    }
    Ok(SimulationPath {
        seed,
        t_max,
        initial: x0.states().to_vec(),
        events,
        hitting_time_final_set: hit_final,
        hitting_time_all_s: hit_all_s,
    })
}

pub(crate) fn check_inputs(
    g: &Graph,
    p: &EpidemicParams,
    x0: &NetworkConfiguration,
    t_max: f64,
) -> Result<()> {
    p.validate()?;
    if x0.node_count() != g.node_count() {
        return Err(Error::SizeMismatch {
            expected: g.node_count(),
            found: x0.node_count(),
        });
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "t_max must be finite and > 0, got {t_max}"
        )));
    }
    Ok(())
}
