//! Classical causal loops between two labs with opposite time arrows.
//!
//! A circulating bit passes through machine A and then machine B and must come
//! back unchanged. Deterministic machines either admit such fixed points or
//! they don't (the identity/NOT pair is the paradox). Stochastic machines
//! always settle into a stationary distribution, and an event-level model
//! ranks the histories that reconcile two agents' policies by how many
//! observations must be written off as statistical fluctuations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LoopError {
    #[error("truth table must be two characters of 0/1, got {0:?}")]
    InvalidTable(String),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("fluctuation probability {0} must lie in (0, 1/2)")]
    InvalidEpsilon(f64),
    #[error("fixed-point search needs deterministic machines")]
    NonDeterministic,
    #[error("circulating bit must be 0 or 1, got {0}")]
    InvalidBit(u8),
    #[error("no history is consistent with the policies (this is a bug)")]
    NoConsistentHistory,
    #[error("unknown policy preset {0:?}")]
    UnknownPreset(String),
}

/// A total map {0,1} → {0,1}, written as a 2-character truth table:
/// the output for input 0 followed by the output for input 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitMachine {
    table: [u8; 2],
}

impl BitMachine {
    pub const IDENTITY: Self = Self { table: [0, 1] };
    pub const NOT: Self = Self { table: [1, 0] };
    pub const ZERO: Self = Self { table: [0, 0] };
    pub const ONE: Self = Self { table: [1, 1] };

    pub fn new(out0: bool, out1: bool) -> Self {
        Self {
            table: [u8::from(out0), u8::from(out1)],
        }
    }

    /// All four machines.
    pub fn all() -> [Self; 4] {
        [Self::ZERO, Self::IDENTITY, Self::NOT, Self::ONE]
    }

    pub fn apply(&self, bit: u8) -> u8 {
        self.table[usize::from(bit & 1)]
    }

    pub fn table(&self) -> [u8; 2] {
        self.table
    }
}

impl FromStr for BitMachine {
    type Err = LoopError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        match b {
            [x, y] if matches!(x, b'0' | b'1') && matches!(y, b'0' | b'1') => Ok(Self {
                table: [x - b'0', y - b'0'],
            }),
            _ => Err(LoopError::InvalidTable(s.to_string())),
        }
    }
}

impl fmt::Display for BitMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.table[0], self.table[1])
    }
}

impl Serialize for BitMachine {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitMachine {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A machine that outputs 1 with a probability depending on its input bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticMachine {
    p_out1_given0: f64,
    p_out1_given1: f64,
}

impl StochasticMachine {
    pub fn new(p_out1_given0: f64, p_out1_given1: f64) -> Result<Self, LoopError> {
        for p in [p_out1_given0, p_out1_given1] {
            if !(0.0..=1.0).contains(&p) {
                return Err(LoopError::InvalidProbability(p));
            }
        }
        Ok(Self {
            p_out1_given0,
            p_out1_given1,
        })
    }

    /// `machine` followed by a channel that flips its output with probability `flip`.
    pub fn noisy(machine: BitMachine, flip: f64) -> Result<Self, LoopError> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(LoopError::InvalidProbability(flip));
        }
        let p = |out: u8| if out == 1 { 1.0 - flip } else { flip };
        Self::new(p(machine.apply(0)), p(machine.apply(1)))
    }

    pub fn p_out1(&self, input: u8) -> f64 {
        if input & 1 == 0 {
            self.p_out1_given0
        } else {
            self.p_out1_given1
        }
    }

    /// The deterministic machine this one embeds, if both probabilities are 0 or 1.
    pub fn as_deterministic(&self) -> Option<BitMachine> {
        let bit = |p: f64| match p {
            0.0 => Some(false),
            1.0 => Some(true),
            _ => None,
        };
        Some(BitMachine::new(bit(self.p_out1_given0)?, bit(self.p_out1_given1)?))
    }
}

impl From<BitMachine> for StochasticMachine {
    fn from(m: BitMachine) -> Self {
        Self {
            p_out1_given0: f64::from(m.apply(0)),
            p_out1_given1: f64::from(m.apply(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSystem {
    pub machine_a: StochasticMachine,
    pub machine_b: StochasticMachine,
}

impl LoopSystem {
    pub fn new(machine_a: impl Into<StochasticMachine>, machine_b: impl Into<StochasticMachine>) -> Self {
        Self {
            machine_a: machine_a.into(),
            machine_b: machine_b.into(),
        }
    }

    /// The same machines composed in the opposite order.
    pub fn swapped(&self) -> Self {
        Self {
            machine_a: self.machine_b,
            machine_b: self.machine_a,
        }
    }

    /// `P(next = 1 | current = bit)` for one trip around the loop.
    pub fn transition_to_one(&self, bit: u8) -> f64 {
        let a1 = self.machine_a.p_out1(bit);
        a1 * self.machine_b.p_out1(1) + (1.0 - a1) * self.machine_b.p_out1(0)
    }
}

/// Circulating bits `b` with `f_B(f_A(b)) = b`.
pub fn deterministic_fixed_points(sys: &LoopSystem) -> Result<BTreeSet<u8>, LoopError> {
    let a = sys.machine_a.as_deterministic().ok_or(LoopError::NonDeterministic)?;
    let b = sys.machine_b.as_deterministic().ok_or(LoopError::NonDeterministic)?;
    Ok((0..=1).filter(|&x| b.apply(a.apply(x)) == x).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    /// A unique stationary distribution exists.
    Unique,
    /// Deterministic 2-cycle; the cycle average is returned.
    Periodic,
    /// Both states absorbing; the starting point mass is returned.
    Reducible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationary {
    pub p0: f64,
    pub p1: f64,
    pub kind: ChainKind,
}

/// Stationary distribution of the circulating bit.
///
/// `initial` only matters when the chain is reducible, in which case the point
/// mass it starts in is preserved.
pub fn stationary_distribution(sys: &LoopSystem, initial: u8) -> Result<Stationary, LoopError> {
    if initial > 1 {
        return Err(LoopError::InvalidBit(initial));
    }
    let up = sys.transition_to_one(0);
    let down = 1.0 - sys.transition_to_one(1);
    let rate = up + down;
    if rate == 0.0 {
        let p1 = f64::from(initial);
        return Ok(Stationary {
            p0: 1.0 - p1,
            p1,
            kind: ChainKind::Reducible,
        });
    }
    let kind = if up == 1.0 && down == 1.0 {
        ChainKind::Periodic
    } else {
        ChainKind::Unique
    };
    let p1 = up / rate;
    Ok(Stationary {
        p0: down / rate,
        p1,
        kind,
    })
}

/// Which agent's lab is taken as the reference (stable) time direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationModel {
    epsilon: f64,
    reference: Agent,
}

impl FluctuationModel {
    /// Alice's lab is the reference; Bob's records are the unstable ones.
    pub fn new(epsilon: f64) -> Result<Self, LoopError> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(LoopError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            epsilon,
            reference: Agent::Alice,
        })
    }

    pub fn with_reference(mut self, reference: Agent) -> Self {
        self.reference = reference;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn reference(&self) -> Agent {
        self.reference
    }
}

/// The five events of the two-lab gedanken experiment, in causal order of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    AlicePosts,
    BobSees,
    BobPosts,
    AliceSees,
    AliceFinalAction,
}

impl Event {
    pub const ALL: [Event; 5] = [
        Event::AlicePosts,
        Event::BobSees,
        Event::BobPosts,
        Event::AliceSees,
        Event::AliceFinalAction,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Events {
    pub alice_posts: bool,
    pub bob_sees: bool,
    pub bob_posts: bool,
    pub alice_sees: bool,
    pub alice_final_action: bool,
}

impl Events {
    fn from_bits(bits: u8) -> Self {
        let b = |i: u8| bits >> i & 1 == 1;
        Self {
            alice_posts: b(4),
            bob_sees: b(3),
            bob_posts: b(2),
            alice_sees: b(1),
            alice_final_action: b(0),
        }
    }

    /// Events whose value disagrees with what their upstream cause dictates.
    fn inconsistent(&self, alice: BitMachine, bob: BitMachine) -> Vec<Event> {
        let policy = |m: BitMachine, seen: bool| m.apply(u8::from(seen)) == 1;
        let checks = [
            (Event::AlicePosts, self.alice_posts == self.alice_final_action),
            (Event::BobSees, self.bob_sees == self.alice_posts),
            (Event::BobPosts, self.bob_posts == policy(bob, self.bob_sees)),
            (Event::AliceSees, self.alice_sees == self.bob_posts),
            (
                Event::AliceFinalAction,
                self.alice_final_action == policy(alice, self.alice_sees),
            ),
        ];
        checks.iter().filter(|(_, ok)| !ok).map(|(e, _)| *e).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentHistory {
    pub events: Events,
    /// Events attributed to a statistical fluctuation.
    pub fluctuations: Vec<Event>,
    /// Product of per-event factors before renormalization.
    pub raw_weight: f64,
    /// Share of the consistent set's total weight.
    pub weight: f64,
}

impl AgentHistory {
    pub fn reinterprets(&self, event: Event) -> bool {
        self.fluctuations.contains(&event)
    }
}

/// Named policy pairs `(alice, bob)`: each maps what the agent sees to what it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyPreset {
    /// Alice withholds her message iff she sees a confirmation; Bob confirms iff he sees a message.
    Paradox,
    /// Alice always posts; Bob always confirms.
    Cooperative,
}

impl PolicyPreset {
    pub fn policies(self) -> (BitMachine, BitMachine) {
        match self {
            Self::Paradox => (BitMachine::NOT, BitMachine::IDENTITY),
            Self::Cooperative => (BitMachine::ONE, BitMachine::ONE),
        }
    }
}

impl FromStr for PolicyPreset {
    type Err = LoopError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paradox" => Ok(Self::Paradox),
            "cooperative" => Ok(Self::Cooperative),
            _ => Err(LoopError::UnknownPreset(s.to_string())),
        }
    }
}

/// Raw weight of every one of the 32 event assignments, with its fluctuating events.
pub fn all_histories(alice: BitMachine, bob: BitMachine, fm: &FluctuationModel) -> Vec<(Events, Vec<Event>, f64)> {
    let eps = fm.epsilon;
    (0..32u8)
        .map(|bits| {
            let ev = Events::from_bits(bits);
            let bad = ev.inconsistent(alice, bob);
            let w = eps.powi(bad.len() as i32) * (1.0 - eps).powi(5 - bad.len() as i32);
            (ev, bad, w)
        })
        .collect()
}

/// Histories compatible with both policies, ranked by weight.
///
/// Policy events and Alice's action record are never reinterpreted, and neither
/// is the observation made in the reference agent's lab. What remains free to
/// fluctuate is the observation on the time-reversed side.
pub fn consistent_histories(
    alice: BitMachine,
    bob: BitMachine,
    fm: &FluctuationModel,
) -> Result<Vec<AgentHistory>, LoopError> {
    let stable_observation = match fm.reference {
        Agent::Alice => Event::AliceSees,
        Agent::Bob => Event::BobSees,
    };
    let fixed = [
        Event::AlicePosts,
        Event::BobPosts,
        Event::AliceFinalAction,
        stable_observation,
    ];
    let mut kept: Vec<AgentHistory> = all_histories(alice, bob, fm)
        .into_iter()
        .filter(|(_, bad, _)| !bad.iter().any(|e| fixed.contains(e)))
        .map(|(events, fluctuations, raw_weight)| AgentHistory {
            events,
            fluctuations,
            raw_weight,
            weight: 0.0,
        })
        .collect();
    let total: f64 = kept.iter().map(|h| h.raw_weight).sum();
    if kept.is_empty() || total <= 0.0 {
        return Err(LoopError::NoConsistentHistory);
    }
    for h in &mut kept {
        h.weight = h.raw_weight / total;
    }
    // stable sort keeps enumeration order among ties
    kept.sort_by(|x, y| y.raw_weight.total_cmp(&x.raw_weight));
    Ok(kept)
}
