//! A strictly local, strictly deterministic branching engine that wins the
//! a⊕b = x∧y game on every round.
//!
//! Each agent carries a box with two buttons and two lights. A button press
//! splits every one of the agent's bubbles into two children, one per light
//! color, each with half the parent's weight; nothing is exchanged between
//! the agents. When the agents later meet, a perfect matching pairs each of
//! one agent's bubbles with exactly one of the other's, chosen so that
//! every matched pair satisfies a⊕b = x∧y on every round. The correlation
//! exists only in the pairing, which is computed from information that is
//! locally available at the meeting point; the event log records this and
//! the [`crate::locality`] auditor certifies it.
//!
//! Everything here except harness input sampling is deterministic:
//! identical input sequences produce identical bubble trees, matchings and
//! event logs.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::locality::{schedule_protocol, EventId, EventKind, Site, SpacetimeEvent, SpacetimePlan};
use crate::{Error, Result, TOL_WEIGHT};

/// A bit, validated to be 0 or 1 at every entry point.
/// Outputs encode light colors: 0 = green, 1 = red.
pub type Bit = u8;

fn check_bit(b: Bit) -> Result<Bit> {
    if b <= 1 {
        Ok(b)
    } else {
        Err(Error::InvalidBit(b))
    }
}

/// The two agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Agent {
    Alice,
    Bob,
}

impl Agent {
    fn site(self) -> Site {
        match self {
            Agent::Alice => Site::A,
            Agent::Bob => Site::B,
        }
    }
}

/// One completed round as an agent experienced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub input: Bit,
    pub output: Bit,
}

/// An agent's local memory: the ordered (button, light) history inside one
/// bubble. This is all a bubble needs to know which partner bubble to
/// interact with at meeting time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    rounds: Vec<Round>,
}

impl Transcript {
    /// Completed rounds, oldest first.
    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    /// Number of completed rounds.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    /// True before the first press.
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The output (light color) bits in round order.
    pub fn outputs(&self) -> Vec<Bit> {
        self.rounds.iter().map(|r| r.output).collect()
    }

    /// The input (button) bits in round order.
    pub fn inputs(&self) -> Vec<Bit> {
        self.rounds.iter().map(|r| r.input).collect()
    }
}

/// One parallel life: an agent copy with its weight and local transcript.
/// After n rounds every bubble of this engine has weight 2^(−n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub agent: Agent,
    pub weight: f64,
    pub transcript: Transcript,
}

/// The full local state of one agent: its bubbles and the spacetime events
/// it has emitted. Worlds share nothing; two worlds can be driven from
/// different threads and joined only at matching time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentWorld {
    agent: Agent,
    position: f64,
    bubbles: Vec<Bubble>,
    events: Vec<SpacetimeEvent>,
    round_times: Vec<f64>,
    round_spacing: f64,
    sub_step: f64,
    round_cursor: usize,
    rounds_done: usize,
    next_id: u64,
    id_stride: u64,
    last_event: Option<EventId>,
}

/// Event id streams: Alice ≡ 0, Bob ≡ 1, meeting ≡ 2 (mod 3), so ids never
/// collide however the logs interleave.
const ALICE_ID_OFFSET: u64 = 0;
const BOB_ID_OFFSET: u64 = 1;
const MEETING_ID_OFFSET: u64 = 2;
const ID_STRIDE: u64 = 3;

impl AgentWorld {
    /// A world positioned and timed by an explicit plan.
    pub fn new(agent: Agent, plan: &SpacetimePlan) -> Self {
        let (position, round_times): (f64, Vec<f64>) = match agent {
            Agent::Alice => (plan.site_a, plan.rounds.iter().map(|r| r.time_a).collect()),
            Agent::Bob => (plan.site_b, plan.rounds.iter().map(|r| r.time_b).collect()),
        };
        let round_spacing = round_times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        AgentWorld {
            agent,
            position,
            bubbles: vec![Bubble {
                agent,
                weight: 1.0,
                transcript: Transcript::default(),
            }],
            events: Vec::new(),
            round_times,
            round_spacing,
            sub_step: plan.sub_step,
            round_cursor: 0,
            rounds_done: 0,
            next_id: match agent {
                Agent::Alice => ALICE_ID_OFFSET,
                Agent::Bob => BOB_ID_OFFSET,
            },
            id_stride: ID_STRIDE,
            last_event: None,
        }
    }

    /// A world with default geometry (separation 10, unit signal speed,
    /// one round per time unit), for driving the engine directly.
    pub fn fresh(agent: Agent) -> Self {
        let plan =
            schedule_protocol(10.0, &[1.0, 2.0, 3.0, 4.0], 1.0).expect("default plan is feasible");
        Self::new(agent, &plan)
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    /// The agent's spatial coordinate.
    pub fn position(&self) -> f64 {
        self.position
    }

    /// All current bubbles; there are 2^rounds of them with distinct
    /// transcripts and weights summing to 1.
    pub fn bubbles(&self) -> &[Bubble] {
        &self.bubbles
    }

    /// Local events emitted so far, in causal order.
    pub fn events(&self) -> &[SpacetimeEvent] {
        &self.events
    }

    /// Number of completed rounds.
    pub fn rounds_completed(&self) -> usize {
        self.rounds_done
    }

    /// The input bits this agent has pressed, in round order. Identical
    /// across the agent's bubbles: splitting only forks the outputs.
    pub fn input_sequence(&self) -> Vec<Bit> {
        self.bubbles[0].transcript.inputs()
    }

    fn fresh_id(&mut self) -> EventId {
        let id = EventId(self.next_id);
        self.next_id += self.id_stride;
        id
    }

    fn emit(&mut self, kind: EventKind, time: f64, deps: Vec<EventId>) -> EventId {
        let id = self.fresh_id();
        self.events.push(SpacetimeEvent {
            id,
            site: self.agent.site(),
            position: self.position,
            time,
            kind,
            deps,
        });
        id
    }

    /// Base time of the next round, extending past the planned schedule if
    /// the world is driven longer than planned.
    fn next_round_time(&self) -> f64 {
        match self.round_times.get(self.round_cursor) {
            Some(&t) => t,
            None => {
                let last = self.round_times.last().copied().unwrap_or(0.0);
                let past = self.round_cursor - self.round_times.len() + 1;
                last + past as f64 * self.round_spacing
            }
        }
    }

    /// Lets the scheduled time of one round pass without pressing; used
    /// when the other agent plays a one-sided round.
    pub fn skip_round(&mut self) {
        self.round_cursor += 1;
    }

    /// Presses one button: every bubble splits into two children, one
    /// seeing the green light (0) and one the red light (1), each with
    /// half the parent's weight. Emits the round's coin-flip, press, split
    /// and flash events; their dependencies reference only this agent's
    /// prior local events, and the coin flip is dependency-free (inputs
    /// are free choices of the harness, never of the worlds).
    pub fn press_button(&mut self, input: Bit) -> Result<()> {
        let input = check_bit(input)?;
        let t = self.next_round_time();
        let step = self.sub_step;

        let coin = self.emit(EventKind::CoinFlip, t, vec![]);
        let mut press_deps = vec![coin];
        if let Some(prev) = self.last_event {
            press_deps.push(prev);
        }
        let press = self.emit(EventKind::ButtonPress, t + step, press_deps);
        let split = self.emit(EventKind::Split, t + 2.0 * step, vec![press]);
        let flash = self.emit(EventKind::LightFlash, t + 3.0 * step, vec![split]);
        self.last_event = Some(flash);

        let mut children = Vec::with_capacity(self.bubbles.len() * 2);
        for parent in self.bubbles.drain(..) {
            for output in [0u8, 1u8] {
                let mut transcript = parent.transcript.clone();
                transcript.rounds.push(Round { input, output });
                children.push(Bubble {
                    agent: parent.agent,
                    weight: parent.weight / 2.0,
                    transcript,
                });
            }
        }
        self.bubbles = children;
        self.round_cursor += 1;
        self.rounds_done += 1;
        Ok(())
    }

    fn emit_depart(&mut self, time: f64) -> EventId {
        let deps = self.last_event.into_iter().collect();
        let id = self.emit(EventKind::Depart, time, deps);
        self.last_event = Some(id);
        id
    }
}

/// One pair of the meeting-time matching, referring into the two bubble
/// lists. Every pair satisfies a⊕b = x∧y on every round both agents
/// played.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub alice_index: usize,
    pub bob_index: usize,
    pub pair_weight: f64,
}

/// Pairs every Alice bubble with the unique Bob bubble whose outputs
/// satisfy bᵢ = aᵢ ⊕ (xᵢ ∧ yᵢ) on every round. Both input sequences are
/// read here: at meeting time they are inside both light cones, so the
/// rule is locally computable by each bubble from its own memory plus the
/// meeting-point data.
///
/// The result is a perfect matching: a bijection between the two 2ⁿ-bubble
/// sets, with the pair weight equal to the (shared) bubble weight.
pub fn match_bubbles(alice: &AgentWorld, bob: &AgentWorld) -> Result<Vec<MatchedPair>> {
    if alice.rounds_completed() != bob.rounds_completed() {
        return Err(Error::RoundCountMismatch(
            alice.rounds_completed(),
            bob.rounds_completed(),
        ));
    }
    let x = alice.input_sequence();
    let y = bob.input_sequence();

    let mut bob_by_outputs: HashMap<Vec<Bit>, usize> = HashMap::with_capacity(bob.bubbles.len());
    for (i, bubble) in bob.bubbles.iter().enumerate() {
        bob_by_outputs.insert(bubble.transcript.outputs(), i);
    }

    let mut bob_used = vec![false; bob.bubbles.len()];
    let mut pairs = Vec::with_capacity(alice.bubbles.len());
    for (alice_index, bubble) in alice.bubbles.iter().enumerate() {
        let target: Vec<Bit> = bubble
            .transcript
            .outputs()
            .iter()
            .zip(x.iter().zip(&y))
            .map(|(&a, (&xi, &yi))| a ^ (xi & yi))
            .collect();
        let bob_index = *bob_by_outputs
            .get(&target)
            .expect("complete binary bubble trees contain every output pattern");
        debug_assert!(!bob_used[bob_index], "matching must be a bijection");
        bob_used[bob_index] = true;
        debug_assert!(
            (bubble.weight - bob.bubbles[bob_index].weight).abs() <= TOL_WEIGHT,
            "matched bubbles carry equal weight"
        );
        pairs.push(MatchedPair {
            alice_index,
            bob_index,
            pair_weight: bubble.weight,
        });
    }
    Ok(pairs)
}

/// Matching for partial protocols, where a round may have been played by
/// only one agent. `participation[r] = (alice_pressed, bob_pressed)` for
/// every global round.
///
/// The game predicate constrains only the rounds both agents played; on
/// one-sided rounds the lone side's fork pairs freely. Each pair carries
/// weight `w_alice · w_bob · 2^shared`, which reduces to the bubble weight
/// when every round is shared and keeps the total weight at 1 in general.
pub fn match_bubbles_masked(
    alice: &AgentWorld,
    bob: &AgentWorld,
    participation: &[(bool, bool)],
) -> Result<Vec<MatchedPair>> {
    let alice_rounds = participation.iter().filter(|(a, _)| *a).count();
    let bob_rounds = participation.iter().filter(|(_, b)| *b).count();
    if alice_rounds != alice.rounds_completed() {
        return Err(Error::RoundCountMismatch(
            alice.rounds_completed(),
            alice_rounds,
        ));
    }
    if bob_rounds != bob.rounds_completed() {
        return Err(Error::RoundCountMismatch(
            bob.rounds_completed(),
            bob_rounds,
        ));
    }
    let shared = participation.iter().filter(|(a, b)| *a && *b).count();
    let weight_scale = (shared as f64).exp2();

    let mut pairs = Vec::new();
    for (alice_index, a_bubble) in alice.bubbles.iter().enumerate() {
        for (bob_index, b_bubble) in bob.bubbles.iter().enumerate() {
            let mut ok = true;
            let (mut ai, mut bi) = (0usize, 0usize);
            for &(pa, pb) in participation {
                match (pa, pb) {
                    (true, true) => {
                        let a = a_bubble.transcript.rounds()[ai];
                        let b = b_bubble.transcript.rounds()[bi];
                        if a.output ^ b.output != a.input & b.input {
                            ok = false;
                            break;
                        }
                        ai += 1;
                        bi += 1;
                    }
                    (true, false) => ai += 1,
                    (false, true) => bi += 1,
                    (false, false) => {}
                }
            }
            if ok {
                pairs.push(MatchedPair {
                    alice_index,
                    bob_index,
                    pair_weight: a_bubble.weight * b_bubble.weight * weight_scale,
                });
            }
        }
    }
    Ok(pairs)
}

/// The inputs of one global round; `None` marks an agent that sat the
/// round out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundInputs {
    pub alice: Option<Bit>,
    pub bob: Option<Bit>,
}

impl RoundInputs {
    /// A round in which both agents press.
    pub fn both(x: Bit, y: Bit) -> Self {
        RoundInputs {
            alice: Some(x),
            bob: Some(y),
        }
    }
}

/// Outcomes of one shared round inside one matched pair, with the pair's
/// weight attached; the flat unit the harness averages over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedRound {
    pub x: Bit,
    pub y: Bit,
    pub alice_output: Bit,
    pub bob_output: Bit,
    pub weight: f64,
}

/// Everything one run produces: the inputs, both bubble trees, the
/// matching, and the complete spacetime event log for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub rounds: Vec<RoundInputs>,
    pub alice_bubbles: Vec<Bubble>,
    pub bob_bubbles: Vec<Bubble>,
    pub matched_pairs: Vec<MatchedPair>,
    pub events: Vec<SpacetimeEvent>,
    pub signal_speed: f64,
    pub one_sided_rounds: bool,
}

impl ExperimentRecord {
    /// Number of global rounds.
    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Flattens the matching into per-shared-round outcome tuples.
    pub fn matched_rounds(&self) -> Vec<MatchedRound> {
        let mut out = Vec::new();
        for pair in &self.matched_pairs {
            let a = &self.alice_bubbles[pair.alice_index].transcript;
            let b = &self.bob_bubbles[pair.bob_index].transcript;
            let (mut ai, mut bi) = (0usize, 0usize);
            for round in &self.rounds {
                match (round.alice, round.bob) {
                    (Some(x), Some(y)) => {
                        out.push(MatchedRound {
                            x,
                            y,
                            alice_output: a.rounds()[ai].output,
                            bob_output: b.rounds()[bi].output,
                            weight: pair.pair_weight,
                        });
                        ai += 1;
                        bi += 1;
                    }
                    (Some(_), None) => ai += 1,
                    (None, Some(_)) => bi += 1,
                    (None, None) => {}
                }
            }
        }
        out
    }
}

/// Runs a full experiment with explicit inputs: schedules the geometry,
/// drives both worlds round by round, departs, meets, matches, and emits
/// the merged event log. Deterministic: no randomness anywhere inside.
pub fn run_with_inputs(rounds: &[RoundInputs]) -> Result<ExperimentRecord> {
    if rounds.is_empty() {
        return Err(Error::EmptyRecord);
    }
    for r in rounds {
        if let Some(x) = r.alice {
            check_bit(x)?;
        }
        if let Some(y) = r.bob {
            check_bit(y)?;
        }
    }
    let n = rounds.len();
    // Separation grows with the round count so that the whole pre-meeting
    // strip stays spacelike-isolated between the sites.
    let separation = 10.0_f64.max(2.0 * (n as f64 + 2.0));
    let times: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let plan = schedule_protocol(separation, &times, 1.0)?;

    let mut alice = AgentWorld::new(Agent::Alice, &plan);
    let mut bob = AgentWorld::new(Agent::Bob, &plan);
    for r in rounds {
        match r.alice {
            Some(x) => alice.press_button(x)?,
            None => alice.skip_round(),
        }
        match r.bob {
            Some(y) => bob.press_button(y)?,
            None => bob.skip_round(),
        }
    }
    let depart_a = alice.emit_depart(plan.depart_time);
    let depart_b = bob.emit_depart(plan.depart_time);

    let one_sided = rounds.iter().any(|r| r.alice.is_some() != r.bob.is_some());
    let matched_pairs = if one_sided {
        let mask: Vec<(bool, bool)> = rounds
            .iter()
            .map(|r| (r.alice.is_some(), r.bob.is_some()))
            .collect();
        match_bubbles_masked(&alice, &bob, &mask)?
    } else {
        match_bubbles(&alice, &bob)?
    };

    // Meeting-point events: one meet, then one match event per pair.
    let mut meeting_events = Vec::with_capacity(1 + matched_pairs.len());
    let mut next_meeting_id = MEETING_ID_OFFSET;
    let mut fresh_meeting_id = || {
        let id = EventId(next_meeting_id);
        next_meeting_id += ID_STRIDE;
        id
    };
    let meet_id = fresh_meeting_id();
    meeting_events.push(SpacetimeEvent {
        id: meet_id,
        site: Site::Meeting,
        position: plan.meet_position,
        time: plan.meet_time,
        kind: EventKind::Meet,
        deps: vec![depart_a, depart_b],
    });
    for _ in &matched_pairs {
        let id = fresh_meeting_id();
        meeting_events.push(SpacetimeEvent {
            id,
            site: Site::Meeting,
            position: plan.meet_position,
            time: plan.meet_time + plan.sub_step,
            kind: EventKind::Match,
            deps: vec![meet_id],
        });
    }

    let mut events =
        Vec::with_capacity(alice.events.len() + bob.events.len() + meeting_events.len());
    events.extend_from_slice(&alice.events);
    events.extend_from_slice(&bob.events);
    events.extend(meeting_events);
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.id.cmp(&b.id)));

    Ok(ExperimentRecord {
        rounds: rounds.to_vec(),
        alice_bubbles: alice.bubbles,
        bob_bubbles: bob.bubbles,
        matched_pairs,
        events,
        signal_speed: plan.signal_speed,
        one_sided_rounds: one_sided,
    })
}

/// Runs an experiment with inputs drawn uniformly and independently for
/// each agent and round from the harness RNG. Inputs never depend on world
/// state, which is what rules superdeterminism out by construction: the
/// worlds cannot see the coins coming.
pub fn run_experiment<R: Rng + ?Sized>(n_rounds: usize, rng: &mut R) -> Result<ExperimentRecord> {
    if n_rounds == 0 {
        return Err(Error::EmptyRecord);
    }
    let rounds: Vec<RoundInputs> = (0..n_rounds)
        .map(|_| {
            let x = u8::from(rng.random_bool(0.5));
            let y = u8::from(rng.random_bool(0.5));
            RoundInputs::both(x, y)
        })
        .collect();
    run_with_inputs(&rounds)
}

/// Weight-averaged fraction of matched-pair rounds satisfying the game
/// predicate a⊕b = x∧y. Exactly 1.0 for records produced by this engine;
/// the function exists so alternative matchings can be scored against it.
pub fn pr_success_probability(record: &ExperimentRecord) -> Result<f64> {
    let rounds = record.matched_rounds();
    if rounds.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let mut total_weight = 0.0;
    let mut satisfied = 0.0;
    for r in &rounds {
        total_weight += r.weight;
        if r.alice_output ^ r.bob_output == r.x & r.y {
            satisfied += r.weight;
        }
    }
    Ok(satisfied / total_weight)
}

/// Total weight of an agent's bubbles showing `output` at local round
/// `round`. For this engine it is exactly ½ for both outputs at every
/// round: local statistics reveal nothing about the other side.
pub fn output_weight(bubbles: &[Bubble], round: usize, output: Bit) -> f64 {
    bubbles
        .iter()
        .filter(|b| b.transcript.rounds().get(round).map(|r| r.output) == Some(output))
        .map(|b| b.weight)
        .sum()
}
