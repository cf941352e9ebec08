//! Spacetime event log and causal auditor.
//!
//! Space is one-dimensional and the signal speed is a parameter (1 in
//! simulation units everywhere in this crate). The audit is structural: it
//! walks declared dependency edges and flags any that would require a
//! signal faster than `c`, plus any dependency that couples the two agent
//! sites before they meet. It never looks at statistics; the claim it
//! certifies is about mechanism, not about distributions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unique identifier of an event within one log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId(pub u64);

/// Where an event happens: one of the two agent sites, or the meeting
/// point where both world lines have converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
    Meeting,
}

/// What an event is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CoinFlip,
    ButtonPress,
    Split,
    LightFlash,
    Depart,
    Meet,
    Match,
}

/// A node in the causal graph: a stamped, typed event with the ids of the
/// events it depends on. Dependencies must appear earlier in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub id: EventId,
    pub site: Site,
    pub position: f64,
    pub time: f64,
    pub kind: EventKind,
    pub deps: Vec<EventId>,
}

/// Why a dependency was flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The dependency would need a signal faster than `c`.
    Superluminal,
    /// A pre-meeting event at one agent site depends on the other site.
    CrossSite,
}

/// One flagged dependency edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub event: EventId,
    pub dep: EventId,
    /// Earliest time the event could legally carry this dependency.
    pub required_time: f64,
    pub actual_time: f64,
    pub kind: ViolationKind,
}

/// Outcome of auditing a log: `passed` holds iff no dependency was flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub n_events: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

/// Audits an event log against a finite signal speed.
///
/// Flags every dependency (event ← dep) with
/// `time(event) − time(dep) < |position(event) − position(dep)| / c`, and
/// every dependency that couples site A to site B while neither end is a
/// meeting event. Errors on structurally broken logs: duplicate ids,
/// unknown dependency ids, or dependencies on events that appear later in
/// the log (which covers cycles, since the log is required to be
/// topologically ordered).
pub fn audit(log: &[SpacetimeEvent], signal_speed: f64) -> Result<CausalReport> {
    if signal_speed <= 0.0 || !signal_speed.is_finite() {
        return Err(Error::InvalidSignalSpeed(signal_speed));
    }
    let mut index: HashMap<EventId, usize> = HashMap::with_capacity(log.len());
    for (i, e) in log.iter().enumerate() {
        if index.insert(e.id, i).is_some() {
            return Err(Error::MalformedLog(format!(
                "duplicate event id {:?}",
                e.id
            )));
        }
    }
    let mut violations = Vec::new();
    for (i, e) in log.iter().enumerate() {
        for &dep_id in &e.deps {
            let j = *index.get(&dep_id).ok_or_else(|| {
                Error::MalformedLog(format!(
                    "event {:?} depends on unknown id {:?}",
                    e.id, dep_id
                ))
            })?;
            if j >= i {
                return Err(Error::MalformedLog(format!(
                    "event {:?} depends on {:?}, which does not precede it (cycle or disorder)",
                    e.id, dep_id
                )));
            }
            let d = &log[j];
            let distance = (e.position - d.position).abs();
            let required_time = d.time + distance / signal_speed;
            if e.time - d.time < distance / signal_speed {
                violations.push(Violation {
                    event: e.id,
                    dep: dep_id,
                    required_time,
                    actual_time: e.time,
                    kind: ViolationKind::Superluminal,
                });
            }
            let cross = matches!((e.site, d.site), (Site::A, Site::B) | (Site::B, Site::A));
            if cross {
                violations.push(Violation {
                    event: e.id,
                    dep: dep_id,
                    required_time,
                    actual_time: e.time,
                    kind: ViolationKind::CrossSite,
                });
            }
        }
    }
    Ok(CausalReport {
        n_events: log.len(),
        passed: violations.is_empty(),
        violations,
    })
}

/// True iff the dependency graphs of the two agent sites are disjoint
/// before the meeting: no chain of declared dependencies (followed in
/// either direction) connects an A-site event to a B-site event without
/// passing through a meeting event.
pub fn cross_site_isolated(log: &[SpacetimeEvent]) -> Result<bool> {
    let mut index: HashMap<EventId, usize> = HashMap::with_capacity(log.len());
    for (i, e) in log.iter().enumerate() {
        if index.insert(e.id, i).is_some() {
            return Err(Error::MalformedLog(format!(
                "duplicate event id {:?}",
                e.id
            )));
        }
    }
    // Union-find over pre-meeting events linked by dependency edges.
    let mut parent: Vec<usize> = (0..log.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, e) in log.iter().enumerate() {
        if e.site == Site::Meeting {
            continue;
        }
        for dep_id in &e.deps {
            let j = *index
                .get(dep_id)
                .ok_or_else(|| Error::MalformedLog(format!("unknown dependency id {dep_id:?}")))?;
            if log[j].site == Site::Meeting {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            parent[ri] = rj;
        }
    }
    let mut component_site: HashMap<usize, Site> = HashMap::new();
    for (i, e) in log.iter().enumerate() {
        if e.site == Site::Meeting {
            continue;
        }
        let root = find(&mut parent, i);
        match component_site.get(&root) {
            None => {
                component_site.insert(root, e.site);
            }
            Some(&s) if s != e.site => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}

/// Timing of one protocol round; the two agents may be offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSlot {
    pub time_a: f64,
    pub time_b: f64,
}

/// A feasible spacetime layout for a whole run: agent positions, per-round
/// base times, the spacing between the sub-events of a round, and the
/// departure/meeting coordinates.
///
/// Feasibility means the two agents' pre-meeting world-line segments are
/// mutually spacelike: the full time span of all pre-meeting events is
/// shorter than the light-crossing time between the sites, so not even a
/// light-speed signal leaving one site at its first coin flip reaches the
/// other site before its last flash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePlan {
    pub signal_speed: f64,
    pub site_a: f64,
    pub site_b: f64,
    /// Gap between consecutive sub-events of one round (coin, press,
    /// split, flash).
    pub sub_step: f64,
    pub rounds: Vec<RoundSlot>,
    pub depart_time: f64,
    pub meet_position: f64,
    pub meet_time: f64,
}

impl SpacetimePlan {
    /// Spatial separation between the agent sites.
    pub fn separation(&self) -> f64 {
        (self.site_b - self.site_a).abs()
    }
}

/// Plans a run in which both agents press simultaneously at each of the
/// given round times. See [`schedule_protocol_offset`] for the general
/// form and the feasibility rule.
pub fn schedule_protocol(
    separation: f64,
    round_times: &[f64],
    signal_speed: f64,
) -> Result<SpacetimePlan> {
    schedule_protocol_offset(separation, round_times, round_times, signal_speed)
}

/// Plans a run with per-agent round times.
///
/// Sites sit at positions 0 and `separation`. Each round expands into four
/// sub-events (coin flip, press, split, flash) spaced by a small step; the
/// departure follows the last flash and the meeting is placed at the
/// spatial midpoint, late enough to be inside both future light cones.
///
/// Errors when the rounds are too spread relative to the separation: every
/// pre-meeting event at one site must stay spacelike-separated from every
/// pre-meeting event at the other, i.e. the full pre-meeting time span must
/// be below `separation / signal_speed`.
pub fn schedule_protocol_offset(
    separation: f64,
    times_a: &[f64],
    times_b: &[f64],
    signal_speed: f64,
) -> Result<SpacetimePlan> {
    if signal_speed <= 0.0 || !signal_speed.is_finite() {
        return Err(Error::InvalidSignalSpeed(signal_speed));
    }
    if separation <= 0.0 || !separation.is_finite() {
        return Err(Error::InfeasibleSchedule(format!(
            "separation must be positive, got {separation}"
        )));
    }
    if times_a.is_empty() || times_a.len() != times_b.len() {
        return Err(Error::InfeasibleSchedule(format!(
            "need matching nonempty round time lists, got {} and {}",
            times_a.len(),
            times_b.len()
        )));
    }
    for times in [times_a, times_b] {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InfeasibleSchedule("non-finite round time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InfeasibleSchedule(
                "round times must be strictly increasing".into(),
            ));
        }
    }

    let light_crossing = separation / signal_speed;
    let min_gap = times_a
        .windows(2)
        .chain(times_b.windows(2))
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    // Four sub-events per round must fit inside a round and stay tiny
    // against the light-crossing time.
    let sub_step = (0.001 * light_crossing).min(min_gap / 8.0);

    let first = f64::min(times_a[0], times_b[0]);
    let last_flash =
        f64::max(times_a[times_a.len() - 1], times_b[times_b.len() - 1]) + 3.0 * sub_step;
    let depart_time = last_flash + sub_step;
    let span = depart_time - first;
    if span >= light_crossing {
        return Err(Error::InfeasibleSchedule(format!(
            "pre-meeting span {span} is not below light-crossing time {light_crossing}; \
             a signal from the first coin flip could reach the other site in time"
        )));
    }

    let rounds = times_a
        .iter()
        .zip(times_b)
        .map(|(&time_a, &time_b)| RoundSlot { time_a, time_b })
        .collect();
    Ok(SpacetimePlan {
        signal_speed,
        site_a: 0.0,
        site_b: separation,
        sub_step,
        rounds,
        depart_time,
        meet_position: separation / 2.0,
        // Twice the midpoint travel time: comfortably inside both cones.
        meet_time: depart_time + light_crossing,
    })
}

/// Deterministically corrupts an honest log in one of five ways, cycling
/// through targets, for auditing the auditor. Returns the mutation's name
/// and the corrupted log; `None` when the log is too small to host the
/// requested variant.
///
/// Every produced mutation contains at least one dependency the audit must
/// flag: an added cross-site edge, a meeting pulled inside the light cone,
/// an effect moved before its cause, or an event teleported away from its
/// dependencies.
pub fn inject_fault(
    log: &[SpacetimeEvent],
    variant: usize,
) -> Option<(String, Vec<SpacetimeEvent>)> {
    let pre_meeting = |site: Site| {
        log.iter()
            .enumerate()
            .filter(move |(_, e)| e.site == site)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    };
    let a_events = pre_meeting(Site::A);
    let b_events = pre_meeting(Site::B);
    if a_events.is_empty() || b_events.is_empty() {
        return None;
    }
    let pick = |candidates: &[usize], salt: usize| candidates[salt % candidates.len()];
    let salt = variant / 5;
    let mut mutated = log.to_vec();
    match variant % 5 {
        0 => {
            // A-site event secretly reads a B-site event.
            let (ai, bi) = (pick(&a_events, salt), pick(&b_events, salt));
            let (target, source) = if ai > bi { (ai, bi) } else { (bi, ai) };
            let dep = mutated[source].id;
            mutated[target].deps.push(dep);
            Some((format!("cross_site_dep_{salt}"), mutated))
        }
        1 => {
            // Same, in the other direction.
            let (ai, bi) = (pick(&a_events, salt + 1), pick(&b_events, salt + 1));
            let (target, source) = if bi > ai { (bi, ai) } else { (ai, bi) };
            let dep = mutated[source].id;
            mutated[target].deps.push(dep);
            Some((format!("cross_site_dep_rev_{salt}"), mutated))
        }
        2 => {
            // Meeting happens before light from the departures arrives.
            let mi = log.iter().position(|e| e.kind == EventKind::Meet)?;
            let earliest_dep = mutated[mi]
                .deps
                .iter()
                .filter_map(|d| log.iter().find(|e| e.id == *d))
                .map(|e| e.time)
                .fold(f64::INFINITY, f64::min);
            let too_early = earliest_dep + 1e-9;
            for e in mutated.iter_mut() {
                if e.kind == EventKind::Meet || e.kind == EventKind::Match {
                    e.time = too_early;
                }
            }
            Some((format!("meeting_inside_light_cone_{salt}"), mutated))
        }
        3 => {
            // An effect is stamped before its cause at the same site.
            let candidates: Vec<usize> = a_events
                .iter()
                .copied()
                .filter(|&i| !mutated[i].deps.is_empty())
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let i = pick(&candidates, salt);
            let dep_time = mutated[i]
                .deps
                .iter()
                .filter_map(|d| log.iter().find(|e| e.id == *d))
                .map(|e| e.time)
                .fold(f64::INFINITY, f64::min);
            mutated[i].time = dep_time - 1.0;
            Some((format!("effect_before_cause_{salt}"), mutated))
        }
        _ => {
            // An event teleports to the far site between cause and effect.
            let candidates: Vec<usize> = b_events
                .iter()
                .copied()
                .filter(|&i| !mutated[i].deps.is_empty())
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let i = pick(&candidates, salt);
            let far = log.iter().find(|e| e.site == Site::A).map(|e| e.position)?;
            mutated[i].position = far;
            Some((format!("teleported_event_{salt}"), mutated))
        }
    }
}
