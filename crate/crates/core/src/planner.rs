//! Landmark drop schedules for the three levels of prior tunnel knowledge:
//! length only, length and turn count, and full topology.

use serde::{Deserialize, Serialize};

use crate::error::{param, NavError, Result};
use crate::geometry::{heading_vector, left_normal, pull_for_landmark, Point, TunnelTopology};

const S_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropMode {
    /// One landmark on each side at the same arc length.
    Pair,
    SingleLeft,
    SingleRight,
    /// Left landmark at `s`, right landmark at `s + ds`.
    AngledPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropEvent {
    pub s: f64,
    pub mode: DropMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ds: Option<f64>,
}

impl DropEvent {
    pub fn pair(s: f64) -> Self {
        DropEvent {
            s,
            mode: DropMode::Pair,
            ds: None,
        }
    }

    pub fn landmarks(&self) -> usize {
        match self.mode {
            DropMode::Pair | DropMode::AngledPair => 2,
            DropMode::SingleLeft | DropMode::SingleRight => 1,
        }
    }
}

/// Side of the path a landmark is dropped on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// +1 for left, -1 for right.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropSchedule {
    pub events: Vec<DropEvent>,
    /// Lateral distance of each landmark from the path (meters).
    pub offset: f64,
    /// Landmarks reserved for reactive drops at turns (turn-count level).
    #[serde(default)]
    pub turn_reserve: usize,
}

impl DropSchedule {
    pub fn new(events: Vec<DropEvent>, offset: f64) -> Self {
        DropSchedule {
            events,
            offset,
            turn_reserve: 0,
        }
    }

    /// Landmarks placed by the scheduled events (reserve excluded).
    pub fn landmark_count(&self) -> usize {
        self.events.iter().map(DropEvent::landmarks).sum()
    }

    /// Individual landmark drops `(arc length, side, event index)` in
    /// arc-length order.
    pub fn landmark_drops(&self) -> Vec<(f64, Side, usize)> {
        let mut out = Vec::with_capacity(self.landmark_count());
        for (i, e) in self.events.iter().enumerate() {
            match e.mode {
                DropMode::Pair => {
                    out.push((e.s, Side::Left, i));
                    out.push((e.s, Side::Right, i));
                }
                DropMode::SingleLeft => out.push((e.s, Side::Left, i)),
                DropMode::SingleRight => out.push((e.s, Side::Right, i)),
                DropMode::AngledPair => {
                    out.push((e.s, Side::Left, i));
                    out.push((e.s + e.ds.unwrap_or(0.0), Side::Right, i));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Checks ordering and range against a path of `length` meters.
    pub fn validate(&self, length: f64) -> Result<()> {
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(param("offset", format!("must be >= 0, got {}", self.offset)));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, e) in self.events.iter().enumerate() {
            let end = e.s + e.ds.unwrap_or(0.0);
            if !(e.s >= -S_TOL && end <= length + S_TOL) {
                return Err(NavError::Schedule(format!(
                    "event {i} at s = {} lies outside [0, {length}]",
                    e.s
                )));
            }
            if e.s <= prev {
                return Err(NavError::Schedule(format!(
                    "event {i} at s = {} does not follow the previous event",
                    e.s
                )));
            }
            match (e.mode, e.ds) {
                (DropMode::AngledPair, Some(ds)) if ds >= 0.0 => {}
                (DropMode::AngledPair, _) => {
                    return Err(NavError::Schedule(format!("angled event {i} needs a non-negative ds")))
                }
                _ => {}
            }
            prev = e.s;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullRecord {
    /// Index of the turn in path order.
    pub turn: usize,
    /// Distance every later event was moved toward the start (meters).
    pub dp: f64,
    /// True when the outer landmark lost line of sight first.
    pub outer_limited: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub n_straight: usize,
    pub n_turns: Option<usize>,
    pub n_full: Option<usize>,
    /// Pair events added beyond the straight plan.
    pub n_additional: usize,
    pub pulls: Vec<PullRecord>,
    pub exceptions: Vec<String>,
}

fn check_spacing(length: f64, d_star: f64) -> Result<()> {
    if !(d_star > 0.0 && d_star.is_finite()) {
        return Err(param("d_star", format!("must be positive, got {d_star}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(param("length", format!("must be positive, got {length}")));
    }
    Ok(())
}

/// Pairs every `d_star` meters along a straight tunnel. The count excludes the
/// two known landmarks at the start.
pub fn plan_straight(length: f64, d_star: f64, offset: f64) -> Result<(DropSchedule, usize)> {
    check_spacing(length, d_star)?;
    let k = (length / d_star + 1e-12).floor() as usize;
    let events = (1..=k)
        .map(|i| DropEvent::pair(i as f64 * d_star))
        .filter(|e| e.s <= length + S_TOL)
        .collect::<Vec<_>>();
    let n = 2 * events.len();
    Ok((DropSchedule::new(events, offset), n))
}

/// Straight plan plus a reserve of two landmarks per turn, dropped
/// reactively while negotiating each turn.
pub fn plan_with_turn_count(length: f64, d_star: f64, offset: f64, turns: usize) -> Result<(DropSchedule, usize)> {
    let (mut schedule, n_straight) = plan_straight(length, d_star, offset)?;
    schedule.turn_reserve = 2 * turns;
    Ok((schedule, n_straight + 2 * turns))
}

/// Landmark positions of a pair dropped on the centerline at arc length `s`.
fn pair_positions(topology: &TunnelTopology, s: f64, offset: f64) -> (Point, Point) {
    let (c, h) = topology.pose_at_clamped(s);
    let n = left_normal(&heading_vector(h));
    (c + n * offset, c - n * offset)
}

/// Drop positions adjusted for line-of-sight loss at turns.
///
/// Starting from the straight plan, each turn is processed in path order: the
/// pair dropped last before the corner defines where line of sight is lost on
/// the post-turn segment; if the next drop lies beyond that point, it and every
/// later drop move back by the difference. Gaps longer than `d_star` are then
/// filled with pairs at spacing `d_star`.
pub fn adjust_full_topology(
    topology: &TunnelTopology,
    d_star: f64,
    offset: f64,
) -> Result<(DropSchedule, usize, PlanReport)> {
    adjust_full_topology_with_margin(topology, d_star, offset, 0.0)
}

/// Pull margin used for simulated and deployed plans. Drops trigger on the
/// estimated progress and land up to a tick late, so a schedule built on the
/// exact line-of-sight boundary can lose a landmark for a tick.
pub const DEFAULT_PULL_MARGIN: f64 = 2.0;

/// [`adjust_full_topology`] pulling each drop `margin` meters ahead of the
/// computed pull location.
pub fn adjust_full_topology_with_margin(
    topology: &TunnelTopology,
    d_star: f64,
    offset: f64,
    margin: f64,
) -> Result<(DropSchedule, usize, PlanReport)> {
    let length = topology.length();
    let (straight, n_straight) = plan_straight(length, d_star, offset)?;
    if !(margin >= 0.0) {
        return Err(param("margin", "must be >= 0"));
    }
    let mut s: Vec<f64> = straight.events.iter().map(|e| e.s).collect();
    let mut report = PlanReport {
        n_straight,
        ..PlanReport::default()
    };
    let mut added = 0usize;

    for (ti, turn) in topology.turns().iter().enumerate() {
        // Extend past the corner when nothing is scheduled after it.
        while s.last().is_none_or(|&l| l <= turn.s + S_TOL) {
            let last = s.last().copied().unwrap_or(0.0);
            if last + d_star > length + S_TOL {
                break;
            }
            s.push(last + d_star);
            added += 1;
        }

        let last_idx = s.iter().rposition(|&x| x < turn.s - S_TOL);
        let (s_last, (lm_left, lm_right)) = match last_idx {
            Some(i) => (s[i], pair_positions(topology, s[i], offset)),
            None => {
                let (c, h) = topology.pose_at_clamped(0.0);
                let n = left_normal(&heading_vector(h));
                (0.0, (c + n * offset, c - n * offset))
            }
        };
        if s.iter().any(|&x| (x - turn.s).abs() <= S_TOL) {
            // A pair at the corner already covers the turn.
            continue;
        }
        let (inner, outer) = if turn.is_left() {
            (lm_left, lm_right)
        } else {
            (lm_right, lm_left)
        };
        let inner_pull = pull_for_landmark(&inner, topology, turn)?;
        let outer_pull = pull_for_landmark(&outer, topology, turn)?;
        let (pull_s, outer_limited) = match (inner_pull, outer_pull) {
            (Some(a), Some(b)) if b.1 < a.1 => (b.1, true),
            (Some(a), _) => (a.1, false),
            (None, Some(b)) => (b.1, true),
            (None, None) => continue,
        };
        let pull_s = (pull_s - margin).max(turn.s);

        if pull_s <= s_last + S_TOL {
            report.exceptions.push(format!(
                "turn {ti}: pull location {pull_s:.3} precedes the previous drop at {s_last:.3}; pair added at the corner"
            ));
            let pos = s.partition_point(|&x| x < turn.s);
            s.insert(pos, turn.s);
            added += 1;
            continue;
        }

        let next = s.iter().position(|&x| x > s_last + S_TOL);
        match next {
            Some(j) if s[j] > pull_s + S_TOL => {
                let dp = s[j] - pull_s;
                for x in &mut s[j..] {
                    *x -= dp;
                }
                report.pulls.push(PullRecord {
                    turn: ti,
                    dp,
                    outer_limited,
                });
            }
            Some(_) => {}
            None => {
                if pull_s < length - S_TOL {
                    s.push(pull_s);
                    added += 1;
                    report.exceptions.push(format!(
                        "turn {ti}: no drop left after the corner; pair added at the pull location {pull_s:.3}"
                    ));
                }
            }
        }
    }

    // Restore the maximum spacing, including the final gap to the exit.
    let mut filled = Vec::with_capacity(s.len() + 4);
    let mut prev = 0.0;
    for &x in &s {
        while x - prev > d_star + S_TOL {
            prev += d_star;
            filled.push(prev);
            added += 1;
        }
        filled.push(x);
        prev = x;
    }
    while length - prev > d_star + S_TOL {
        prev += d_star;
        filled.push(prev);
        added += 1;
    }

    let events: Vec<DropEvent> = filled.into_iter().map(DropEvent::pair).collect();
    let n_full = 2 * events.len();
    report.n_additional = added;
    report.n_full = Some(n_full);
    let schedule = DropSchedule::new(events, offset);
    schedule.validate(length)?;
    Ok((schedule, n_full, report))
}

/// Replaces each pair with two single drops: one midway from the previous
/// event (or the start) and one at the pair's own location, alternating left
/// and right starting on the left.
pub fn stagger_half_distance(schedule: &DropSchedule) -> DropSchedule {
    let mut events = Vec::with_capacity(2 * schedule.events.len());
    let mut prev = 0.0;
    let mut left = true;
    let next_side = |left: &mut bool| {
        let m = if *left {
            DropMode::SingleLeft
        } else {
            DropMode::SingleRight
        };
        *left = !*left;
        m
    };
    for e in &schedule.events {
        match e.mode {
            DropMode::Pair => {
                let mid = 0.5 * (prev + e.s);
                events.push(DropEvent {
                    s: mid,
                    mode: next_side(&mut left),
                    ds: None,
                });
                events.push(DropEvent {
                    s: e.s,
                    mode: next_side(&mut left),
                    ds: None,
                });
            }
            _ => events.push(*e),
        }
        prev = e.s;
    }
    DropSchedule {
        events,
        ..schedule.clone()
    }
}

/// Turns pairs within `window` meters of a corner into angled pairs whose
/// right landmark trails the left one by `ds` meters.
pub fn stagger_angled(
    schedule: &DropSchedule,
    topology: &TunnelTopology,
    d_star: f64,
    ds: f64,
    window: f64,
) -> Result<DropSchedule> {
    if !(ds >= 0.0) || ds >= 0.5 * d_star {
        return Err(param(
            "ds",
            format!("must lie in [0, d*/2) = [0, {}), got {ds}", 0.5 * d_star),
        ));
    }
    if ds == 0.0 {
        return Ok(schedule.clone());
    }
    let mut out = schedule.clone();
    let n = out.events.len();
    for i in 0..n {
        let e = out.events[i];
        if e.mode != DropMode::Pair {
            continue;
        }
        let near = topology.turns().iter().any(|t| (t.s - e.s).abs() <= window);
        if !near {
            continue;
        }
        let overrun = if i + 1 < n {
            e.s + ds >= out.events[i + 1].s
        } else {
            e.s + ds > topology.length()
        };
        if overrun {
            return Err(NavError::Schedule(format!(
                "angled pair at s = {} would overrun the next event",
                e.s
            )));
        }
        out.events[i] = DropEvent {
            s: e.s,
            mode: DropMode::AngledPair,
            ds: Some(ds),
        };
    }
    Ok(out)
}

/// Default trailing offset of the right landmark in an angled pair, meters.
pub const DEFAULT_ANGLED_DS: f64 = 5.0;

/// Default corner window for angled staggering.
pub fn default_angled_window(d_star: f64) -> f64 {
    1.5 * d_star
}

/// True iff `n_straight <= n_full <= n_turns`.
pub fn verify_count_relation(n_straight: usize, n_full: usize, n_turns: usize) -> bool {
    n_straight <= n_full && n_full <= n_turns
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_tunnel() -> TunnelTopology {
        TunnelTopology::new(
            &[Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(100.0, -100.0)],
            20.0,
        )
        .unwrap()
    }

    fn three_turn() -> TunnelTopology {
        TunnelTopology::new(
            &[
                Point::new(0.0, 0.0),
                Point::new(110.0, 0.0),
                Point::new(110.0, -90.0),
                Point::new(210.0, -90.0),
                Point::new(210.0, 10.0),
            ],
            24.0,
        )
        .unwrap()
    }

    fn positions(s: &DropSchedule) -> Vec<f64> {
        s.events.iter().map(|e| e.s).collect()
    }

    #[test]
    fn straight_examples() {
        let (s, n) = plan_straight(400.0, 72.0, 10.0).unwrap();
        assert_eq!(positions(&s), vec![72.0, 144.0, 216.0, 288.0, 360.0]);
        assert_eq!(n, 10);
        let (s, n) = plan_straight(50.0, 72.0, 10.0).unwrap();
        assert!(s.events.is_empty());
        assert_eq!(n, 0);
        let (s, n) = plan_straight(400.0, 45.0, 10.0).unwrap();
        assert_eq!((s.events.len(), n), (8, 16));
        assert!(plan_straight(400.0, 0.0, 10.0).is_err());
        assert!(plan_straight(400.0, -3.0, 10.0).is_err());
    }

    #[test]
    fn turn_count_examples() {
        let (s, n) = plan_with_turn_count(400.0, 72.0, 10.0, 3).unwrap();
        assert_eq!(n, 16);
        assert_eq!(s.turn_reserve, 6);
        let (s0, n0) = plan_with_turn_count(400.0, 72.0, 10.0, 0).unwrap();
        let (st, ns) = plan_straight(400.0, 72.0, 10.0).unwrap();
        assert_eq!((s0, n0), (st, ns));
    }

    #[test]
    fn full_topology_on_straight_tunnel_is_straight_plan() {
        let t = TunnelTopology::straight(400.0, 24.0).unwrap();
        let (s, n, r) = adjust_full_topology(&t, 72.0, 10.0).unwrap();
        let (st, ns) = plan_straight(400.0, 72.0, 10.0).unwrap();
        assert_eq!(s, st);
        assert_eq!(n, ns);
        assert!(r.pulls.is_empty());
        assert_eq!(r.n_additional, 0);
    }

    #[test]
    fn l_tunnel_pull_example() {
        // Drops every 60 m: the pair at 60 precedes the corner, the next one at
        // 120 lies beyond the pull location at 100 + 32/3.
        let t = TunnelTopology::new(
            &[Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(100.0, -110.0)],
            20.0,
        )
        .unwrap();
        let (s, _, r) = adjust_full_topology(&t, 60.0, 8.0).unwrap();
        assert_eq!(r.pulls.len(), 1);
        let dp = r.pulls[0].dp;
        assert!((dp - (120.0 - (100.0 + 32.0 / 3.0))).abs() < 1e-9);
        assert!(!r.pulls[0].outer_limited);
        let p = positions(&s);
        assert!((p[0] - 60.0).abs() < 1e-12);
        assert!((p[1] - (100.0 + 32.0 / 3.0)).abs() < 1e-9);
        assert!((p[2] - (180.0 - dp)).abs() < 1e-9);
    }

    #[test]
    fn no_pull_when_next_drop_precedes_pull_location() {
        // d* = 52.5: pairs at 52.5 and 105; 105 < 110.667 needs no pull.
        let t = TunnelTopology::new(
            &[Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(100.0, -110.0)],
            20.0,
        )
        .unwrap();
        let (s, _, r) = adjust_full_topology(&t, 52.5, 8.0).unwrap();
        assert!(r.pulls.is_empty());
        assert_eq!(positions(&s)[..2], [52.5, 105.0]);
    }

    #[test]
    fn gaps_bounded_after_adjustment() {
        for t in [l_tunnel(), three_turn()] {
            for d in [30.0, 45.0, 72.0, 90.0] {
                let (s, n, r) = adjust_full_topology(&t, d, 10.0).unwrap();
                let mut prev = 0.0;
                for x in positions(&s).into_iter().chain([t.length()]) {
                    assert!(x - prev <= d + 1e-9, "gap {} > {d}", x - prev);
                    prev = x;
                }
                let (_, n_turns) = plan_with_turn_count(t.length(), d, 10.0, t.turns().len()).unwrap();
                assert!(verify_count_relation(r.n_straight, n, n_turns), "{r:?}");
            }
        }
    }

    #[test]
    fn three_turn_counts() {
        let t = three_turn();
        let (_, n_full, r) = adjust_full_topology(&t, 72.0, 10.0).unwrap();
        assert_eq!(r.n_straight, 10);
        assert!((10..=16).contains(&n_full));
        assert!(verify_count_relation(10, n_full, 16));
        assert!(verify_count_relation(10, 10, 10));
        assert!(!verify_count_relation(10, 18, 16));
    }

    #[test]
    fn half_distance_stagger() {
        let (s, _) = plan_straight(400.0, 72.0, 10.0).unwrap();
        let st = stagger_half_distance(&s);
        assert_eq!(st.landmark_count(), s.landmark_count());
        let p = positions(&st);
        let expected: Vec<f64> = (1..=10).map(|k| 36.0 * k as f64).collect();
        assert_eq!(p, expected);
        for (k, e) in st.events.iter().enumerate() {
            let m = if k % 2 == 0 {
                DropMode::SingleLeft
            } else {
                DropMode::SingleRight
            };
            assert_eq!(e.mode, m);
        }
    }

    #[test]
    fn angled_stagger() {
        let t = three_turn();
        let (s, _, _) = adjust_full_topology(&t, 72.0, 10.0).unwrap();
        assert_eq!(stagger_angled(&s, &t, 72.0, 0.0, 108.0).unwrap(), s);
        assert!(stagger_angled(&s, &t, 72.0, 36.0, 108.0).is_err());
        let a = stagger_angled(&s, &t, 72.0, 5.0, 108.0).unwrap();
        assert!(a.events.iter().any(|e| e.mode == DropMode::AngledPair));
        assert_eq!(a.landmark_count(), s.landmark_count());
        a.validate(t.length()).unwrap();
        let straight = TunnelTopology::straight(400.0, 24.0).unwrap();
        let (ps, _) = plan_straight(400.0, 72.0, 10.0).unwrap();
        assert_eq!(stagger_angled(&ps, &straight, 72.0, 5.0, 108.0).unwrap(), ps);
    }

    #[test]
    fn landmark_drops_expand_modes() {
        let s = DropSchedule::new(
            vec![
                DropEvent::pair(10.0),
                DropEvent {
                    s: 20.0,
                    mode: DropMode::AngledPair,
                    ds: Some(3.0),
                },
                DropEvent {
                    s: 30.0,
                    mode: DropMode::SingleRight,
                    ds: None,
                },
            ],
            5.0,
        );
        let d = s.landmark_drops();
        assert_eq!(d.len(), 5);
        assert_eq!(d[3], (23.0, Side::Right, 1));
        assert_eq!(s.landmark_count(), 5);
        assert!(s.validate(100.0).is_ok());
        assert!(s.validate(25.0).is_err());
    }

    #[test]
    fn schedule_json_shape() {
        let s = DropSchedule::new(
            vec![
                DropEvent::pair(10.0),
                DropEvent {
                    s: 20.0,
                    mode: DropMode::AngledPair,
                    ds: Some(3.0),
                },
            ],
            5.0,
        );
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["events"][0]["mode"], "pair");
        assert!(j["events"][0].get("ds").is_none());
        assert_eq!(j["events"][1]["mode"], "angled-pair");
        assert_eq!(j["events"][1]["ds"], 3.0);
    }
}
