//! Scheme state machines. Each run consumes slots from a [`SlotSource`]
//! strictly in order; the delay of a run is `t_K - t_0` (TDMA: `n`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{SlotSource, SubnetworkStream};
use crate::gfq::{FieldVector, PrimeField};

use super::composition::Composition;
use super::recovery::{recovery_check, satisfies_recovery, SlotUse};
use super::SchemeError;

/// Identifies a single-network scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    Ngjv,
    Tdma,
    Jap(Composition),
    JapB(Composition),
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Ngjv => write!(f, "ngjv"),
            SchemeId::Tdma => write!(f, "tdma"),
            SchemeId::Jap(a) => write!(f, "jap{a}"),
            SchemeId::JapB(a) => write!(f, "japb{a}"),
        }
    }
}

/// Limits on a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Give up once a single round has scanned this many slots.
    pub max_wait: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_wait: None }
    }
}

/// One completed round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Position of the matched slot within [`SchemeRun::slots`].
    pub slot_index: usize,
    /// Absolute slot index `t_k`.
    pub slot: u64,
    /// 0-based receivers served.
    pub receivers: Vec<usize>,
    /// Per receiver: coefficients over `slots[0..=slot_index]`.
    pub lambdas: Vec<FieldVector>,
    /// Receiver served by beamforming in this round (JAP-B).
    pub beamformed: Option<usize>,
    /// Slots scanned in this round.
    pub wait: u64,
}

/// A completed run of a single-network scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    pub n: usize,
    pub field: PrimeField,
    /// Matched slots `t_0, t_1, ..` with their transmit gains.
    pub slots: Vec<SlotUse>,
    pub rounds: Vec<RoundRecord>,
    /// NGJV only: how many starting matrices were rejected because `I - H`
    /// had a zero entry.
    pub resamples: u64,
    delay: u64,
}

impl SchemeRun {
    pub fn start_slot(&self) -> u64 {
        self.slots[0].slot()
    }

    /// `t_K - t_0` in slots (`n` for TDMA).
    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn round_waits(&self) -> Vec<u64> {
        self.rounds.iter().map(|r| r.wait).collect()
    }

    /// Round and position that serves `receiver`.
    pub fn serving_round(&self, receiver: usize) -> Option<(&RoundRecord, usize)> {
        self.rounds.iter().find_map(|r| {
            r.receivers
                .iter()
                .position(|&j| j == receiver)
                .map(|pos| (r, pos))
        })
    }

    /// Every receiver served exactly once, rounds in increasing slot order.
    pub fn is_complete(&self) -> bool {
        let mut served = vec![0usize; self.n];
        for r in &self.rounds {
            for &j in &r.receivers {
                served[j] += 1;
            }
        }
        served.iter().all(|&c| c == 1) && self.rounds.windows(2).all(|w| w[0].slot < w[1].slot)
    }
}

fn new_record(
    history: &[SlotUse],
    round: usize,
    receivers: Vec<usize>,
    lambdas: Vec<FieldVector>,
    beamformed: Option<usize>,
    wait: u64,
) -> RoundRecord {
    for (&j, l) in receivers.iter().zip(&lambdas) {
        assert!(
            satisfies_recovery(history, j, l),
            "round {round}: coefficients {l} do not recover receiver {j}"
        );
    }
    let slot_index = history.len() - 1;
    RoundRecord {
        round,
        slot_index,
        slot: history[slot_index].slot(),
        receivers,
        lambdas,
        beamformed,
        wait,
    }
}

fn check_stream<S: SlotSource + ?Sized>(stream: &S, n: usize, needs_alignment: bool) -> Result<(), SchemeError> {
    if stream.users() != n {
        return Err(SchemeError::UserMismatch {
            expected: n,
            found: stream.users(),
        });
    }
    // Over GF(2) every coefficient is 1, so no alignment can ever succeed.
    if needs_alignment && stream.field().q() < 3 {
        return Err(SchemeError::FieldTooSmall(stream.field().q()));
    }
    Ok(())
}

fn check_wait(wait: u64, opts: &RunOptions) -> Result<(), SchemeError> {
    match opts.max_wait {
        Some(cap) if wait >= cap => Err(SchemeError::WaitExceeded(cap)),
        _ => Ok(()),
    }
}

/// NGJV: wait for the exact complement `I - H[t_0]`.
///
/// A starting matrix whose complement has a zero entry (some `h_jj = 1`) is
/// discarded and the next slot becomes the new start; such rejections are
/// counted in [`SchemeRun::resamples`].
pub fn ngjv_run<S: SlotSource + ?Sized>(stream: &mut S) -> Result<SchemeRun, SchemeError> {
    ngjv_run_with(stream, &RunOptions::default())
}

pub fn ngjv_run_with<S: SlotSource + ?Sized>(stream: &mut S, opts: &RunOptions) -> Result<SchemeRun, SchemeError> {
    let n = stream.users();
    check_stream(stream, n, true)?;
    let mut resamples = 0u64;
    let (h0, target) = loop {
        let h0 = stream.next_matrix();
        match h0.identity_complement() {
            Ok(target) => break (h0, target),
            Err(_) => {
                resamples += 1;
                check_wait(resamples, opts)?;
            }
        }
    };
    let mut wait = 0u64;
    let matched = loop {
        check_wait(wait, opts)?;
        let candidate = stream.next_matrix();
        wait += 1;
        if candidate.entries() == target.entries() {
            break candidate;
        }
    };
    let field = h0.field();
    let slots = vec![SlotUse::plain(h0), SlotUse::plain(matched)];
    let ones = FieldVector::new(field, vec![field.one(); 2])?;
    let record = new_record(&slots, 1, (0..n).collect(), vec![ones; n], None, wait);
    let delay = slots[1].slot() - slots[0].slot();
    Ok(SchemeRun {
        scheme: SchemeId::Ngjv,
        n,
        field,
        slots,
        rounds: vec![record],
        resamples,
        delay,
    })
}

/// JAP(a): round `k` accepts the first slot at which all `a_k` of its
/// receivers pass [`recovery_check`] against `t_0, .., t_{k-1}` and that slot.
pub fn jap_run<S: SlotSource + ?Sized>(a: &Composition, stream: &mut S) -> Result<SchemeRun, SchemeError> {
    aligned_run(a, stream, false, &RunOptions::default())
}

/// JAP-B(a): as JAP, but the first receiver `l` of every round is served by
/// beamforming, so only the other `a_k - 1` receivers need a match.
pub fn japb_run<S: SlotSource + ?Sized>(a: &Composition, stream: &mut S) -> Result<SchemeRun, SchemeError> {
    aligned_run(a, stream, true, &RunOptions::default())
}

pub fn jap_run_with<S: SlotSource + ?Sized>(
    a: &Composition,
    stream: &mut S,
    opts: &RunOptions,
) -> Result<SchemeRun, SchemeError> {
    aligned_run(a, stream, false, opts)
}

pub fn japb_run_with<S: SlotSource + ?Sized>(
    a: &Composition,
    stream: &mut S,
    opts: &RunOptions,
) -> Result<SchemeRun, SchemeError> {
    aligned_run(a, stream, true, opts)
}

/// Gains for a round-`k` slot that align receiver `l`'s interference with
/// slot `t_0`.
///
/// Transmitter `i != l` sends `h_li[t_0] / h_li[t_k] * w_i`, so receiver `l`
/// sees the same interference `sum_{i != l} h_li[t_0] w_i` at both slots.
/// Transmitter `l` itself sends `-h_ll[t_0] / h_ll[t_k] * w_l`; subtracting
/// the two observations then leaves `2 h_ll[t_0] w_l`, which is nonzero for
/// odd `q`.
pub fn beamform(start: &SlotUse, candidate: crate::channel::ChannelMatrix, l: usize) -> SlotUse {
    let gains = (0..candidate.n())
        .map(|i| {
            let ratio = start.effective(l, i)
                * candidate
                    .entry(l, i)
                    .inverse()
                    .expect("channel coefficients are nonzero");
            if i == l {
                -ratio
            } else {
                ratio
            }
        })
        .collect();
    SlotUse::with_gains(candidate, gains)
}

fn aligned_run<S: SlotSource + ?Sized>(
    a: &Composition,
    stream: &mut S,
    beamforming: bool,
    opts: &RunOptions,
) -> Result<SchemeRun, SchemeError> {
    let n = a.n();
    check_stream(stream, n, true)?;
    let field = stream.field();
    let mut slots = vec![SlotUse::plain(stream.next_matrix())];
    let mut rounds = Vec::with_capacity(a.len());

    for k in 1..=a.len() {
        let receivers: Vec<usize> = a.round_receivers(k).collect();
        let beamformed = beamforming.then_some(receivers[0]);
        let mut wait = 0u64;
        loop {
            check_wait(wait, opts)?;
            let candidate = stream.next_matrix();
            wait += 1;
            let slot = match beamformed {
                Some(l) => beamform(&slots[0], candidate, l),
                None => SlotUse::plain(candidate),
            };
            slots.push(slot);
            // beamformed receiver last: it always succeeds
            let order = receivers
                .iter()
                .copied()
                .filter(|&j| Some(j) != beamformed)
                .chain(beamformed);
            let mut lambdas = Vec::with_capacity(receivers.len());
            let mut all_ok = true;
            for j in order {
                match recovery_check(&slots, j)? {
                    Some(l) => lambdas.push((j, l)),
                    None => {
                        assert!(Some(j) != beamformed, "beamformed receiver {j} failed to recover");
                        all_ok = false;
                        break;
                    }
                }
            }
            if all_ok {
                lambdas.sort_by_key(|(j, _)| *j);
                let lambdas = lambdas.into_iter().map(|(_, l)| l).collect();
                rounds.push(new_record(&slots, k, receivers, lambdas, beamformed, wait));
                break;
            }
            slots.pop();
        }
    }

    let delay = slots.last().unwrap().slot() - slots[0].slot();
    let scheme = if beamforming {
        SchemeId::JapB(a.clone())
    } else {
        SchemeId::Jap(a.clone())
    };
    Ok(SchemeRun {
        scheme,
        n,
        field,
        slots,
        rounds,
        resamples: 0,
        delay,
    })
}

/// TDMA: `n` consecutive slots, transmitter `j` alone in the `j`-th.
pub fn tdma_run<S: SlotSource + ?Sized>(stream: &mut S) -> Result<SchemeRun, SchemeError> {
    let n = stream.users();
    check_stream(stream, n, false)?;
    let field = stream.field();
    let mut slots = Vec::with_capacity(n);
    let mut rounds = Vec::with_capacity(n);
    for j in 0..n {
        let m = stream.next_matrix();
        let inv = m.entry(j, j).inverse()?;
        slots.push(SlotUse::exclusive(m, j));
        let mut coeffs = vec![field.zero(); j + 1];
        coeffs[j] = inv;
        let lambdas = vec![FieldVector::new(field, coeffs)?];
        rounds.push(new_record(&slots, j + 1, vec![j], lambdas, None, 1));
    }
    Ok(SchemeRun {
        scheme: SchemeId::Tdma,
        n,
        field,
        slots,
        rounds,
        resamples: 0,
        delay: n as u64,
    })
}

/// Parent scheme of a time-shared child, defined for `m` users.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParentScheme {
    Ngjv,
    Tdma,
    Jap(Composition),
    JapB(Composition),
}

impl ParentScheme {
    fn users(&self) -> Option<usize> {
        match self {
            ParentScheme::Jap(a) | ParentScheme::JapB(a) => Some(a.n()),
            _ => None,
        }
    }

    pub fn run<S: SlotSource + ?Sized>(&self, stream: &mut S, opts: &RunOptions) -> Result<SchemeRun, SchemeError> {
        match self {
            ParentScheme::Ngjv => ngjv_run_with(stream, opts),
            ParentScheme::Tdma => tdma_run(stream),
            ParentScheme::Jap(a) => jap_run_with(a, stream, opts),
            ParentScheme::JapB(a) => japb_run_with(a, stream, opts),
        }
    }

    pub fn id(&self) -> SchemeId {
        match self {
            ParentScheme::Ngjv => SchemeId::Ngjv,
            ParentScheme::Tdma => SchemeId::Tdma,
            ParentScheme::Jap(a) => SchemeId::Jap(a.clone()),
            ParentScheme::JapB(a) => SchemeId::JapB(a.clone()),
        }
    }
}

/// The parent's run on one `m`-user sub-network. `run` uses sub-network
/// indices; `users[i]` maps them back to the full network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubnetworkRun {
    pub users: Vec<usize>,
    pub run: SchemeRun,
}

/// A child scheme run: the parent executed once on each of the `C(n, m)`
/// sub-networks, in lexicographic order of the user subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildRun {
    pub parent: ParentScheme,
    pub m: usize,
    pub n: usize,
    pub subruns: Vec<SubnetworkRun>,
}

impl ChildRun {
    /// Mean per-message delay across sub-networks.
    pub fn delay(&self) -> f64 {
        let total: u64 = self.subruns.iter().map(|s| s.run.delay()).sum();
        total as f64 / self.subruns.len() as f64
    }
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..m).rev().find(|&i| cur[i] < n - m + i) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..m {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// Time-shares an `m`-user parent across an `n`-user network. Users outside
/// the active sub-network stay silent. `m == n` is the parent itself.
pub fn child_run(
    parent: &ParentScheme,
    m: usize,
    stream: &mut dyn SlotSource,
    opts: &RunOptions,
) -> Result<ChildRun, SchemeError> {
    let n = stream.users();
    if m == 0 || m > n {
        return Err(SchemeError::ChildSize { m, n });
    }
    if let Some(users) = parent.users() {
        if users != m {
            return Err(SchemeError::UserMismatch {
                expected: m,
                found: users,
            });
        }
    }
    let mut subruns = Vec::new();
    for users in subsets(n, m) {
        let mut sub = SubnetworkStream::new(stream, users.clone());
        let run = parent.run(&mut sub, opts)?;
        subruns.push(SubnetworkRun { users, run });
    }
    Ok(ChildRun {
        parent: parent.clone(),
        m,
        n,
        subruns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelMatrix, RandomStream, ScriptedStream};

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn ngjv_single_user_gf3_always_starts_from_two() {
        let f = gf(3);
        for seed in 0..50 {
            let mut s = RandomStream::new(1, f, seed, 0);
            let run = ngjv_run(&mut s).unwrap();
            assert_eq!(run.slots[0].matrix.entry(0, 0).value(), 2);
            assert_eq!(run.slots[1].matrix.entry(0, 0).value(), 2);
            assert!(run.is_complete());
        }
    }

    #[test]
    fn ngjv_rejects_binary_field() {
        let mut s = RandomStream::new(2, gf(2), 0, 0);
        assert_eq!(ngjv_run(&mut s).unwrap_err(), SchemeError::FieldTooSmall(2));
    }

    #[test]
    fn jap_single_round_matches_ngjv_pair_in_one_slot() {
        let f = gf(5);
        let h0 = ChannelMatrix::from_rows(f, &[&[2, 3, 4], &[1, 3, 2], &[4, 4, 2]], 0).unwrap();
        let h1 = h0.identity_complement().unwrap();
        let mut s = ScriptedStream::new(vec![h0, h1], RandomStream::new(3, f, 9, 0));
        let run = jap_run(&Composition::single(3), &mut s).unwrap();
        assert_eq!(run.delay(), 1);
        assert_eq!(run.rounds[0].wait, 1);
    }

    #[test]
    fn japb_all_ones_completes_in_k_slots() {
        for q in [3u64, 5, 7] {
            for n in 1..6 {
                let mut s = RandomStream::new(n, gf(q), 17, n as u64);
                let run = japb_run(&Composition::ones(n), &mut s).unwrap();
                assert_eq!(run.delay(), n as u64);
                assert!(run.round_waits().iter().all(|&w| w == 1));
                assert!(run.is_complete());
            }
        }
    }

    #[test]
    fn tdma_uses_n_slots() {
        let mut s = RandomStream::new(4, gf(3), 0, 0);
        let run = tdma_run(&mut s).unwrap();
        assert_eq!(run.delay(), 4);
        assert_eq!(run.rounds.len(), 4);
        let mut s = RandomStream::new(1, gf(2), 0, 0);
        assert_eq!(tdma_run(&mut s).unwrap().delay(), 1);
    }

    #[test]
    fn composition_must_match_stream() {
        let mut s = RandomStream::new(4, gf(3), 0, 0);
        let a: Composition = "1,2".parse().unwrap();
        assert!(matches!(jap_run(&a, &mut s), Err(SchemeError::UserMismatch { .. })));
    }

    #[test]
    fn wait_cap_is_enforced() {
        let mut s = RandomStream::new(4, gf(11), 0, 0);
        let opts = RunOptions { max_wait: Some(10) };
        assert_eq!(ngjv_run_with(&mut s, &opts).unwrap_err(), SchemeError::WaitExceeded(10));
    }

    #[test]
    fn subsets_in_lexicographic_order() {
        assert_eq!(
            subsets(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(6, 3).len(), 20);
    }

    #[test]
    fn child_size_errors() {
        let mut s = RandomStream::new(3, gf(5), 0, 0);
        let err = child_run(&ParentScheme::Ngjv, 4, &mut s, &RunOptions::default()).unwrap_err();
        assert_eq!(err, SchemeError::ChildSize { m: 4, n: 3 });
        let err = child_run(
            &ParentScheme::JapB(Composition::single(3)),
            2,
            &mut s,
            &RunOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SchemeError::UserMismatch { .. }));
    }

    #[test]
    fn child_with_full_subnetwork_is_the_parent() {
        let f = gf(5);
        let parent = ParentScheme::JapB(Composition::single(3));
        let mut s1 = RandomStream::new(3, f, 4, 0);
        let child = child_run(&parent, 3, &mut s1, &RunOptions::default()).unwrap();
        let mut s2 = RandomStream::new(3, f, 4, 0);
        let direct = japb_run(&Composition::single(3), &mut s2).unwrap();
        assert_eq!(child.subruns.len(), 1);
        assert_eq!(child.subruns[0].run, direct);
    }
}
