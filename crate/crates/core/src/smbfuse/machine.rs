use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FusionError, SegKind, State};

/// Position of the walk relative to the single event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Start,
    BeforeEvent,
    InEvent,
    AfterEvent,
    /// After `END_1`: nothing may follow.
    Closed,
}

impl Phase {
    const ALL: [Phase; 5] = [
        Phase::Start,
        Phase::BeforeEvent,
        Phase::InEvent,
        Phase::AfterEvent,
        Phase::Closed,
    ];

    fn index(self) -> usize {
        Phase::ALL.iter().position(|&p| p == self).unwrap()
    }
}

/// Transition table `(from, emitted state, to)` plus the phases in which a
/// sequence may stop.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMachine {
    pub rules: Vec<(Phase, State, Phase)>,
    pub accepting: Vec<Phase>,
}

impl StateMachine {
    /// Single-event sequences: optional leading background, a start, any
    /// continuation, an end, optional trailing background. `START_1` can
    /// only open a sequence and `END_1` can only close one.
    pub fn standard() -> Self {
        use Phase::*;
        use State::*;
        let mut rules = vec![
            (Start, START_1, InEvent),
            (Start, START_2, InEvent),
            (Start, BG_1, BeforeEvent),
            (Start, BG_2, BeforeEvent),
            (BeforeEvent, BG_1, BeforeEvent),
            (BeforeEvent, BG_2, BeforeEvent),
            (BeforeEvent, START_2, InEvent),
        ];
        for s in [CONTINUE_1, CONTINUE_2] {
            rules.push((InEvent, s, InEvent));
        }
        rules.push((InEvent, END_1, Closed));
        rules.push((InEvent, END_2, AfterEvent));
        rules.push((AfterEvent, BG_1, AfterEvent));
        rules.push((AfterEvent, BG_2, AfterEvent));
        StateMachine {
            rules,
            accepting: vec![AfterEvent, Closed],
        }
    }

    /// `table[phase][r]`: whether `r` more segments can be emitted from
    /// `phase` and end in an accepting phase using only `available` states.
    fn reachability(&self, segments: usize, available: &[State]) -> Vec<Vec<bool>> {
        let mut table = vec![vec![false; segments + 1]; Phase::ALL.len()];
        for p in Phase::ALL {
            table[p.index()][0] = self.accepting.contains(&p);
        }
        for r in 1..=segments {
            for p in Phase::ALL {
                table[p.index()][r] = self.rules.iter().any(|&(from, s, to)| {
                    from == p && available.contains(&s) && s.len() <= r && table[to.index()][r - s.len()]
                });
            }
        }
        table
    }
}

impl Default for StateMachine {
    fn default() -> Self {
        StateMachine::standard()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSequence {
    pub states: Vec<State>,
    pub event_class: usize,
}

impl StateSequence {
    pub fn segments(&self) -> usize {
        self.states.iter().map(|s| s.len()).sum()
    }

    pub fn kinds(&self) -> Vec<SegKind> {
        self.states.iter().flat_map(|s| s.pattern().iter().copied()).collect()
    }

    pub fn labels(&self, background: usize) -> Vec<usize> {
        self.kinds()
            .into_iter()
            .map(|k| match k {
                SegKind::Fg => self.event_class,
                SegKind::Bg => background,
            })
            .collect()
    }
}

/// Random walk over `machine` emitting exactly `segments` segments. Each
/// step picks uniformly among the available successors from which an
/// accepting end is still reachable.
pub fn generate_state_sequence<R: Rng + ?Sized>(
    machine: &StateMachine,
    segments: usize,
    available: &[State],
    event_class: usize,
    rng: &mut R,
) -> Result<StateSequence, FusionError> {
    let reach = machine.reachability(segments, available);
    if !reach[Phase::Start.index()][segments] {
        return Err(FusionError::NoValidSequence {
            segments,
            available: available.to_vec(),
        });
    }
    let mut phase = Phase::Start;
    let mut remaining = segments;
    let mut states = Vec::new();
    while remaining > 0 {
        let candidates: Vec<(State, Phase)> = machine
            .rules
            .iter()
            .filter(|&&(from, s, to)| {
                from == phase
                    && available.contains(&s)
                    && s.len() <= remaining
                    && reach[to.index()][remaining - s.len()]
            })
            .map(|&(_, s, to)| (s, to))
            .collect();
        let &(state, next) = candidates.choose(rng).expect("reachability guarantees a successor");
        states.push(state);
        remaining -= state.len();
        phase = next;
    }
    Ok(StateSequence { states, event_class })
}
