//! Multi-user resource allocation: the SINR model and the exact search for
//! the (access point, wavelength, receiver element) assignment maximizing the
//! sum of per-user SINRs.
//!
//! For a user assigned to access point `a` on wavelength `l` using element
//! `p`, the received signal current is `R(l) P_tx(a,l) G(u,a,p)`. Every other
//! access point `b != a` contributes its same-wavelength light to exactly one
//! denominator term: interference when `(b, l)` is assigned to another user
//! (the light is modulated), background noise when it is not (the wavelength
//! only illuminates). Receiver noise enters as the RMS noise current. The
//! default model divides plain currents; an electrical-domain variant that
//! squares every term is available behind [`SinrMode::Squared`].
//!
//! The optimizer is an exact depth-first branch-and-bound over users with an
//! admissible bound (partial sum plus each unassigned user's best achievable
//! SINR ignoring channel-sharing constraints), verified against exhaustive
//! enumeration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{bandwidth_3db, BandwidthResult};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::propagation::ChannelDb;
use crate::receivers::ReceiverKind;
use crate::scene::Wavelength;

/// How SINR terms enter the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SinrMode {
    /// Currents divide directly (the default).
    Linear,
    /// Electrical-domain variant: every signal, interference, background and
    /// noise term is squared before entering the ratio.
    Squared,
}

impl SinrMode {
    pub fn name(self) -> &'static str {
        match self {
            SinrMode::Linear => "linear",
            SinrMode::Squared => "squared",
        }
    }

    pub fn parse(s: &str) -> Result<SinrMode> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(SinrMode::Linear),
            "squared" => Ok(SinrMode::Squared),
            other => Err(Error::Allocation(format!(
                "unknown SINR mode '{other}' (expected linear or squared)"
            ))),
        }
    }
}

/// One user to serve: an identifier plus a channel-database location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserSite {
    pub user_id: u32,
    pub location_id: u32,
}

/// An allocation instance over a prebuilt channel database.
#[derive(Debug, Clone)]
pub struct AllocationProblem<'a> {
    pub db: &'a ChannelDb,
    pub users: Vec<UserSite>,
    pub mode: SinrMode,
}

impl<'a> AllocationProblem<'a> {
    pub fn new(db: &'a ChannelDb, users: Vec<UserSite>, mode: SinrMode) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for u in &users {
            if !seen.insert(u.user_id) {
                return Err(Error::Allocation(format!(
                    "duplicate user id {}",
                    u.user_id
                )));
            }
            if !db.locations.iter().any(|l| l.id == u.location_id) {
                return Err(Error::Allocation(format!(
                    "user {}: location {} not in the channel database",
                    u.user_id, u.location_id
                )));
            }
        }
        Ok(AllocationProblem { db, users, mode })
    }

    fn site(&self, user_id: u32) -> Result<&UserSite> {
        self.users
            .iter()
            .find(|u| u.user_id == user_id)
            .ok_or_else(|| Error::Allocation(format!("unknown user id {user_id}")))
    }
}

/// One user's assigned triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAssignment {
    pub user_id: u32,
    pub ap_id: u32,
    pub wavelength: Wavelength,
    pub element_id: u32,
}

/// Full assignment: exactly one triple per user, no (access point,
/// wavelength) pair shared between users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub entries: Vec<UserAssignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MissingUser(u32),
    DuplicateUser(u32),
    UnknownUser(u32),
    UnknownAp { user_id: u32, ap_id: u32 },
    UnknownWavelength { user_id: u32, wavelength: Wavelength },
    InvalidElement { user_id: u32, element_id: u32 },
    SharedChannel { ap_id: u32, wavelength: Wavelength },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingUser(u) => write!(f, "user {u} has no assignment"),
            Violation::DuplicateUser(u) => write!(f, "user {u} assigned more than once"),
            Violation::UnknownUser(u) => write!(f, "assignment names unknown user {u}"),
            Violation::UnknownAp { user_id, ap_id } => {
                write!(f, "user {user_id}: unknown access point {ap_id}")
            }
            Violation::UnknownWavelength {
                user_id,
                wavelength,
            } => write!(f, "user {user_id}: wavelength {wavelength} not in database"),
            Violation::InvalidElement {
                user_id,
                element_id,
            } => write!(f, "user {user_id}: invalid receiver element {element_id}"),
            Violation::SharedChannel { ap_id, wavelength } => write!(
                f,
                "access point {ap_id} wavelength {wavelength} assigned to multiple users"
            ),
        }
    }
}

/// Checks the sharing rules; returns every violation found (empty when the
/// assignment is valid).
pub fn validate_assignment(problem: &AllocationProblem, assignment: &Assignment) -> Vec<Violation> {
    let db = problem.db;
    let mut violations = Vec::new();
    let ne = db.n_elements() as u32;

    for u in &problem.users {
        let n = assignment
            .entries
            .iter()
            .filter(|e| e.user_id == u.user_id)
            .count();
        if n == 0 {
            violations.push(Violation::MissingUser(u.user_id));
        } else if n > 1 {
            violations.push(Violation::DuplicateUser(u.user_id));
        }
    }
    for e in &assignment.entries {
        if !problem.users.iter().any(|u| u.user_id == e.user_id) {
            violations.push(Violation::UnknownUser(e.user_id));
        }
        if !db.access_points.iter().any(|a| a.id == e.ap_id) {
            violations.push(Violation::UnknownAp {
                user_id: e.user_id,
                ap_id: e.ap_id,
            });
        }
        if !db.transmit.iter().any(|t| t.wavelength == e.wavelength) {
            violations.push(Violation::UnknownWavelength {
                user_id: e.user_id,
                wavelength: e.wavelength,
            });
        }
        if e.element_id == 0 || e.element_id > ne {
            violations.push(Violation::InvalidElement {
                user_id: e.user_id,
                element_id: e.element_id,
            });
        }
    }
    let mut channels: Vec<(u32, Wavelength)> = assignment
        .entries
        .iter()
        .map(|e| (e.ap_id, e.wavelength))
        .collect();
    channels.sort_unstable_by_key(|&(a, w)| (a, w.index()));
    for pair in channels.windows(2) {
        if pair[0] == pair[1] {
            let v = Violation::SharedChannel {
                ap_id: pair[0].0,
                wavelength: pair[0].1,
            };
            if !violations.contains(&v) {
                violations.push(v);
            }
        }
    }
    violations
}

/// Received electrical current for one (location, access point, wavelength,
/// element) key: responsivity times transmitted power times DC gain.
pub fn received_current(
    db: &ChannelDb,
    location_id: u32,
    ap_id: u32,
    wavelength: Wavelength,
    element_id: u32,
) -> Result<f64> {
    let gain = db.record(location_id, ap_id, element_id)?.dc_gain;
    Ok(db.responsivity_a_per_w(wavelength)? * db.tx_power_w(ap_id, wavelength)? * gain)
}

/// Per-user SINR decomposition. In the default linear mode,
/// `sinr_linear = signal / (interference + background + receiver_noise)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrBreakdown {
    pub signal_a: f64,
    pub interference_a: f64,
    pub background_a: f64,
    pub receiver_noise_a: f64,
    pub sinr_linear: f64,
    pub sinr_db: f64,
}

/// SINR of one user under a full assignment.
pub fn sinr(
    problem: &AllocationProblem,
    assignment: &Assignment,
    user_id: u32,
) -> Result<SinrBreakdown> {
    let violations = validate_assignment(problem, assignment);
    if let Some(first) = violations.first() {
        return Err(Error::Allocation(format!("invalid assignment: {first}")));
    }
    let entry = assignment
        .entries
        .iter()
        .find(|e| e.user_id == user_id)
        .ok_or_else(|| Error::Allocation(format!("user {user_id} not in assignment")))?;
    breakdown(problem, assignment, entry)
}

fn breakdown(
    problem: &AllocationProblem,
    assignment: &Assignment,
    entry: &UserAssignment,
) -> Result<SinrBreakdown> {
    let db = problem.db;
    let site = problem.site(entry.user_id)?;
    let signal = received_current(
        db,
        site.location_id,
        entry.ap_id,
        entry.wavelength,
        entry.element_id,
    )?;
    let sigma = db.receiver.noise_sigma_a();

    let mut interference = 0.0;
    let mut background = 0.0;
    let mut interference_sq = 0.0;
    let mut background_sq = 0.0;
    for ap in &db.access_points {
        if ap.id == entry.ap_id {
            continue;
        }
        let modulated_elsewhere = assignment.entries.iter().any(|e| {
            e.user_id != entry.user_id && e.ap_id == ap.id && e.wavelength == entry.wavelength
        });
        let current = received_current(
            db,
            site.location_id,
            ap.id,
            entry.wavelength,
            entry.element_id,
        )?;
        if modulated_elsewhere {
            interference += current;
            interference_sq += current * current;
        } else {
            background += current;
            background_sq += current * current;
        }
    }

    let sinr_linear = match problem.mode {
        SinrMode::Linear => signal / (interference + background + sigma),
        SinrMode::Squared => {
            signal * signal / (interference_sq + background_sq + sigma * sigma)
        }
    };
    Ok(SinrBreakdown {
        signal_a: signal,
        interference_a: interference,
        background_a: background,
        receiver_noise_a: sigma,
        sinr_linear,
        sinr_db: 10.0 * sinr_linear.log10(),
    })
}

/// Everything reported for one allocated user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserReport {
    pub user_id: u32,
    pub location_id: u32,
    pub ap_id: u32,
    pub wavelength: Wavelength,
    pub element_id: u32,
    pub sinr: SinrBreakdown,
    pub bandwidth: BandwidthResult,
    pub data_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    pub users: Vec<UserReport>,
    /// Sum of per-user linear SINRs.
    pub objective: f64,
}

impl AllocationReport {
    pub fn assignment(&self) -> Assignment {
        Assignment {
            entries: self
                .users
                .iter()
                .map(|u| UserAssignment {
                    user_id: u.user_id,
                    ap_id: u.ap_id,
                    wavelength: u.wavelength,
                    element_id: u.element_id,
                })
                .collect(),
        }
    }
}

/// Scores a given assignment: per-user SINR, channel bandwidth at the
/// assigned triple, and the receiver-limited data rate.
pub fn evaluate_assignment(
    problem: &AllocationProblem,
    assignment: &Assignment,
) -> Result<AllocationReport> {
    let violations = validate_assignment(problem, assignment);
    if let Some(first) = violations.first() {
        return Err(Error::Allocation(format!("invalid assignment: {first}")));
    }
    let mut users = Vec::with_capacity(problem.users.len());
    let mut objective = 0.0;
    for site in &problem.users {
        let entry = assignment
            .entries
            .iter()
            .find(|e| e.user_id == site.user_id)
            .expect("validated above");
        let sinr = breakdown(problem, assignment, entry)?;
        let record = problem
            .db
            .record(site.location_id, entry.ap_id, entry.element_id)?;
        let bandwidth = bandwidth_3db(&record.ir)?;
        let limiting = problem.db.receiver.bandwidth_hz().min(bandwidth.f3db_hz);
        objective += sinr.sinr_linear;
        users.push(UserReport {
            user_id: site.user_id,
            location_id: site.location_id,
            ap_id: entry.ap_id,
            wavelength: entry.wavelength,
            element_id: entry.element_id,
            sinr,
            bandwidth,
            data_rate_bps: data_rate_bps(limiting),
        });
    }
    Ok(AllocationReport { users, objective })
}

/// Achievable data rate for a limiting bandwidth: `bandwidth / 0.7`,
/// truncated to 0.1 Gbps.
pub fn data_rate_bps(limiting_bandwidth_hz: f64) -> f64 {
    debug_assert!(limiting_bandwidth_hz > 0.0);
    ((limiting_bandwidth_hz / 0.7 / 1e8 + 1e-6).floor()) * 1e8
}

/// Per-user table of received currents over (ap, wavelength, element),
/// shared by the optimizer and the exhaustive oracle.
struct CurrentTable {
    n_aps: usize,
    n_wl: usize,
    n_elems: usize,
    /// [user][ap][wavelength][element], flattened.
    currents: Vec<f64>,
}

impl CurrentTable {
    fn build(problem: &AllocationProblem) -> Result<CurrentTable> {
        let db = problem.db;
        let n_aps = db.access_points.len();
        let n_wl = db.transmit.len();
        let n_elems = db.n_elements();
        let mut currents = Vec::with_capacity(problem.users.len() * n_aps * n_wl * n_elems);
        for site in &problem.users {
            for ap in &db.access_points {
                for t in &db.transmit {
                    for e in 1..=n_elems as u32 {
                        currents.push(received_current(
                            db,
                            site.location_id,
                            ap.id,
                            t.wavelength,
                            e,
                        )?);
                    }
                }
            }
        }
        Ok(CurrentTable {
            n_aps,
            n_wl,
            n_elems,
            currents,
        })
    }

    #[inline]
    fn get(&self, user: usize, ap: usize, wl: usize, elem: usize) -> f64 {
        self.currents
            [((user * self.n_aps + ap) * self.n_wl + wl) * self.n_elems + elem]
    }
}

/// SINR of `user` on triple (ap, wl, elem) assuming every other same-
/// wavelength access point contributes to the denominator (which holds for
/// any completion of the assignment: each such AP lands in either the
/// interference or the background term with the same current).
fn triple_value(table: &CurrentTable, sigma: f64, mode: SinrMode, user: usize, ap: usize, wl: usize, elem: usize) -> f64 {
    let signal = table.get(user, ap, wl, elem);
    let value = match mode {
        SinrMode::Linear => {
            let mut den = sigma;
            for b in 0..table.n_aps {
                if b != ap {
                    den += table.get(user, b, wl, elem);
                }
            }
            signal / den
        }
        SinrMode::Squared => {
            let mut den = sigma * sigma;
            for b in 0..table.n_aps {
                if b != ap {
                    let c = table.get(user, b, wl, elem);
                    den += c * c;
                }
            }
            signal * signal / den
        }
    };
    if value.is_nan() {
        0.0
    } else {
        value
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    ap_idx: u32,
    wl_idx: u32,
    elem_idx: u32,
    value: f64,
}

struct SearchSpace {
    /// Per user, candidates sorted by value descending then key ascending.
    candidates: Vec<Vec<Candidate>>,
    /// suffix_best[d] = sum over users d.. of their best candidate value.
    suffix_best: Vec<f64>,
    n_wl: usize,
}

impl SearchSpace {
    fn build(problem: &AllocationProblem, table: &CurrentTable) -> SearchSpace {
        let sigma = problem.db.receiver.noise_sigma_a();
        let n_users = problem.users.len();
        let mut candidates = Vec::with_capacity(n_users);
        for u in 0..n_users {
            let mut cands = Vec::with_capacity(table.n_aps * table.n_wl * table.n_elems);
            for ap in 0..table.n_aps {
                for wl in 0..table.n_wl {
                    for elem in 0..table.n_elems {
                        cands.push(Candidate {
                            ap_idx: ap as u32,
                            wl_idx: wl as u32,
                            elem_idx: elem as u32,
                            value: triple_value(table, sigma, problem.mode, u, ap, wl, elem),
                        });
                    }
                }
            }
            cands.sort_by(|a, b| {
                b.value
                    .partial_cmp(&a.value)
                    .unwrap()
                    .then_with(|| (a.ap_idx, a.wl_idx, a.elem_idx).cmp(&(b.ap_idx, b.wl_idx, b.elem_idx)))
            });
            candidates.push(cands);
        }
        let mut suffix_best = vec![0.0; n_users + 1];
        for d in (0..n_users).rev() {
            suffix_best[d] = suffix_best[d + 1] + candidates[d][0].value;
        }
        SearchSpace {
            candidates,
            suffix_best,
            n_wl: table.n_wl,
        }
    }

    fn pair_index(&self, c: &Candidate) -> usize {
        c.ap_idx as usize * self.n_wl + c.wl_idx as usize
    }
}

struct Incumbent {
    objective: f64,
    /// (ap_idx, wl_idx, elem_idx) per user; the comparison key for the
    /// deterministic lexicographic tie-break.
    key: Vec<(u32, u32, u32)>,
}

/// Finds an assignment maximizing the sum of per-user SINRs. Exact; among
/// equal optima returns the lexicographically smallest
/// (user, access point, wavelength, element) tuple.
pub fn optimize(problem: &AllocationProblem) -> Result<AllocationReport> {
    let db = problem.db;
    let n_users = problem.users.len();
    if n_users == 0 {
        return Err(Error::Allocation("no users to allocate".into()));
    }
    let n_pairs = db.access_points.len() * db.transmit.len();
    if n_users > n_pairs {
        return Err(Error::Infeasible(format!(
            "{n_users} users cannot share {n_pairs} (access point, wavelength) channels"
        )));
    }

    let table = CurrentTable::build(problem)?;
    let space = SearchSpace::build(problem, &table);

    let mut used = vec![false; n_pairs];
    let mut stack: Vec<(u32, u32, u32)> = Vec::with_capacity(n_users);
    let mut best: Option<Incumbent> = None;
    descend(&space, &mut used, &mut stack, 0.0, 0, &mut best);

    let best = best.expect("at least one valid assignment exists");
    let entries = problem
        .users
        .iter()
        .zip(&best.key)
        .map(|(site, &(ap, wl, elem))| UserAssignment {
            user_id: site.user_id,
            ap_id: db.access_points[ap as usize].id,
            wavelength: db.transmit[wl as usize].wavelength,
            element_id: elem + 1,
        })
        .collect();
    evaluate_assignment(problem, &Assignment { entries })
}

fn descend(
    space: &SearchSpace,
    used: &mut [bool],
    stack: &mut Vec<(u32, u32, u32)>,
    sum: f64,
    depth: usize,
    best: &mut Option<Incumbent>,
) {
    if depth == space.candidates.len() {
        let better = match best {
            None => true,
            Some(inc) => {
                sum > inc.objective || (sum == inc.objective && stack[..] < inc.key[..])
            }
        };
        if better {
            *best = Some(Incumbent {
                objective: sum,
                key: stack.clone(),
            });
        }
        return;
    }
    for cand in &space.candidates[depth] {
        let pair = space.pair_index(cand);
        if used[pair] {
            continue;
        }
        let bound = sum + cand.value + space.suffix_best[depth + 1];
        if let Some(inc) = best {
            // Candidates are sorted by value, so once the optimistic bound
            // falls strictly below the incumbent no later sibling can win.
            if bound < inc.objective {
                break;
            }
        }
        used[pair] = true;
        stack.push((cand.ap_idx, cand.wl_idx, cand.elem_idx));
        descend(space, used, stack, sum + cand.value, depth + 1, best);
        stack.pop();
        used[pair] = false;
    }
}

/// Exhaustive enumeration of every valid assignment; exact reference for
/// [`optimize`]. Refuses search spaces larger than ~1e7 assignments.
pub fn brute_force_oracle(problem: &AllocationProblem) -> Result<AllocationReport> {
    let db = problem.db;
    let n_users = problem.users.len();
    if n_users == 0 {
        return Err(Error::Allocation("no users to allocate".into()));
    }
    let n_pairs = db.access_points.len() * db.transmit.len();
    if n_users > n_pairs {
        return Err(Error::Infeasible(format!(
            "{n_users} users cannot share {n_pairs} (access point, wavelength) channels"
        )));
    }
    let n_elems = db.n_elements();
    let mut space = 1.0f64;
    for k in 0..n_users {
        space *= ((n_pairs - k) * n_elems) as f64;
    }
    if space > 1e7 {
        return Err(Error::Allocation(format!(
            "search space of {space:.3e} assignments too large for exhaustive enumeration"
        )));
    }

    let table = CurrentTable::build(problem)?;
    let sigma = db.receiver.noise_sigma_a();
    let mut chosen: Vec<(usize, usize, usize)> = Vec::with_capacity(n_users);
    let mut best_obj = f64::NEG_INFINITY;
    let mut best_key: Option<Vec<(usize, usize, usize)>> = None;
    enumerate(
        problem,
        &table,
        sigma,
        &mut chosen,
        &mut best_obj,
        &mut best_key,
    );

    let best_key = best_key.expect("at least one valid assignment exists");
    let entries = problem
        .users
        .iter()
        .zip(&best_key)
        .map(|(site, &(ap, wl, elem))| UserAssignment {
            user_id: site.user_id,
            ap_id: db.access_points[ap].id,
            wavelength: db.transmit[wl].wavelength,
            element_id: elem as u32 + 1,
        })
        .collect();
    evaluate_assignment(problem, &Assignment { entries })
}

fn enumerate(
    problem: &AllocationProblem,
    table: &CurrentTable,
    sigma: f64,
    chosen: &mut Vec<(usize, usize, usize)>,
    best_obj: &mut f64,
    best_key: &mut Option<Vec<(usize, usize, usize)>>,
) {
    let n_users = problem.users.len();
    if chosen.len() == n_users {
        // Literal per-user evaluation: partition every other same-wavelength
        // access point into modulated (interference) or unmodulated
        // (background) and form the ratio.
        let mut objective = 0.0;
        for (u, &(a, wl, p)) in chosen.iter().enumerate() {
            let signal = table.get(u, a, wl, p);
            let mut interference = 0.0;
            let mut background = 0.0;
            let mut interference_sq = 0.0;
            let mut background_sq = 0.0;
            for b in 0..table.n_aps {
                if b == a {
                    continue;
                }
                let modulated = chosen
                    .iter()
                    .enumerate()
                    .any(|(m, &(mb, mwl, _))| m != u && mb == b && mwl == wl);
                let c = table.get(u, b, wl, p);
                if modulated {
                    interference += c;
                    interference_sq += c * c;
                } else {
                    background += c;
                    background_sq += c * c;
                }
            }
            let value = match problem.mode {
                SinrMode::Linear => signal / (interference + background + sigma),
                SinrMode::Squared => {
                    signal * signal / (interference_sq + background_sq + sigma * sigma)
                }
            };
            objective += if value.is_nan() { 0.0 } else { value };
        }
        // Enumeration runs in lexicographic key order, so a strict comparison
        // keeps the lexicographically smallest optimum.
        if objective > *best_obj {
            *best_obj = objective;
            *best_key = Some(chosen.clone());
        }
        return;
    }

    for ap in 0..table.n_aps {
        for wl in 0..table.n_wl {
            if chosen.iter().any(|&(a, w, _)| a == ap && w == wl) {
                continue;
            }
            for elem in 0..table.n_elems {
                chosen.push((ap, wl, elem));
                enumerate(problem, table, sigma, chosen, best_obj, best_key);
                chosen.pop();
            }
        }
    }
}

/// A scenario file: users to serve, optionally pinned to a receiver type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// When present, the channel database must use this receiver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<ReceiverKind>,
    pub users: Vec<ScenarioUser>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioUser {
    pub id: u32,
    pub location: Vec3,
}

impl Scenario {
    pub fn from_json_str(json: &str) -> Result<Scenario> {
        serde_json::from_str(json)
            .map_err(|e| Error::Allocation(format!("invalid scenario JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Maps scenario users onto database locations (exact coordinate match
    /// within 1 nm).
    pub fn resolve(&self, db: &ChannelDb) -> Result<Vec<UserSite>> {
        if let Some(kind) = self.receiver {
            if kind != db.receiver.kind() {
                return Err(Error::Allocation(format!(
                    "scenario expects a {kind} receiver but the database was built for {}",
                    db.receiver.kind()
                )));
            }
        }
        if self.users.is_empty() {
            return Err(Error::Allocation("scenario lists no users".into()));
        }
        self.users
            .iter()
            .map(|u| {
                let location = db
                    .locations
                    .iter()
                    .find(|l| (l.position - u.location).norm() <= 1e-9)
                    .ok_or_else(|| {
                        Error::Allocation(format!(
                            "user {}: location ({}, {}, {}) is not in the channel database",
                            u.id, u.location.x, u.location.y, u.location.z
                        ))
                    })?;
                Ok(UserSite {
                    user_id: u.id,
                    location_id: location.id,
                })
            })
            .collect()
    }
}
