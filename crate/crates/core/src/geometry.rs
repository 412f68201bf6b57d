//! Tunnel topology: a polyline centerline of fixed width, its miter-joined
//! walls, arc-length parameterisation and line-of-sight queries.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};

pub type Point = Vector2<f64>;

/// Absolute tolerance used by the geometric predicates (meters).
pub const GEOM_TOL: f64 = 1e-9;
/// Tolerance for "inside the tunnel" membership (meters).
pub const INSIDE_TOL: f64 = 1e-6;

#[inline]
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Left-pointing unit normal of a direction.
#[inline]
pub fn left_normal(dir: &Point) -> Point {
    Point::new(-dir.y, dir.x)
}

#[inline]
pub fn heading_vector(psi: f64) -> Point {
    Point::new(psi.cos(), psi.sin())
}

/// A corner of the centerline where the direction changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    /// Index of the centerline waypoint at the corner.
    pub waypoint: usize,
    /// Signed turn angle in radians, positive to the left.
    pub angle: f64,
    /// Arc length of the corner.
    pub s: f64,
    /// Wall vertex on the inside of the turn.
    pub inner_corner: Point,
}

impl Turn {
    pub fn is_left(&self) -> bool {
        self.angle > 0.0
    }
}

/// Solution of `origin + alpha * u = beta * s_fr + (1 - beta) * s_to`, where `u`
/// is the unit direction of the ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionSolution {
    pub alpha: f64,
    pub beta: f64,
    pub point: Point,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunnelTopology {
    centerline: Vec<Point>,
    width: f64,
    left_wall: Vec<Point>,
    right_wall: Vec<Point>,
    turns: Vec<Turn>,
    /// Arc length at each centerline waypoint.
    cumulative: Vec<f64>,
}

impl TunnelTopology {
    /// Builds the topology for a rectangular tunnel of `width` around the
    /// polyline `waypoints`.
    pub fn new(waypoints: &[Point], width: f64) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(NavError::InvalidTunnel("at least two waypoints are required".into()));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(NavError::InvalidTunnel(format!("width must be positive, got {width}")));
        }
        if waypoints.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(NavError::InvalidTunnel("non-finite waypoint".into()));
        }

        let mut dirs = Vec::with_capacity(waypoints.len() - 1);
        let mut cumulative = vec![0.0];
        for (i, w) in waypoints.windows(2).enumerate() {
            let d = w[1] - w[0];
            let len = d.norm();
            if len <= GEOM_TOL {
                return Err(NavError::InvalidTunnel(format!("waypoints {i} and {} coincide", i + 1)));
            }
            dirs.push(d / len);
            cumulative.push(cumulative[i] + len);
        }

        let half = 0.5 * width;
        let n = waypoints.len();
        let mut left_wall = Vec::with_capacity(n);
        let mut right_wall = Vec::with_capacity(n);
        let mut turns = Vec::new();

        for i in 0..n {
            let offset = if i == 0 {
                left_normal(&dirs[0])
            } else if i == n - 1 {
                left_normal(&dirs[n - 2])
            } else {
                let (a, b) = (dirs[i - 1], dirs[i]);
                let angle = cross(&a, &b).atan2(a.dot(&b));
                if angle.abs() >= std::f64::consts::PI - 1e-9 {
                    return Err(NavError::InvalidTunnel(format!(
                        "centerline reverses direction at waypoint {i}"
                    )));
                }
                let (na, nb) = (left_normal(&a), left_normal(&b));
                let miter = (na + nb) / (1.0 + na.dot(&nb));
                if angle.abs() > 1e-9 {
                    let inner = if angle > 0.0 {
                        waypoints[i] + half * miter
                    } else {
                        waypoints[i] - half * miter
                    };
                    turns.push(Turn {
                        waypoint: i,
                        angle,
                        s: cumulative[i],
                        inner_corner: inner,
                    });
                }
                miter
            };
            left_wall.push(waypoints[i] + half * offset);
            right_wall.push(waypoints[i] - half * offset);
        }

        Ok(TunnelTopology {
            centerline: waypoints.to_vec(),
            width,
            left_wall,
            right_wall,
            turns,
            cumulative,
        })
    }

    /// Straight tunnel along +x starting at the origin.
    pub fn straight(length: f64, width: f64) -> Result<Self> {
        Self::new(&[Point::new(0.0, 0.0), Point::new(length, 0.0)], width)
    }

    pub fn centerline(&self) -> &[Point] {
        &self.centerline
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn left_wall(&self) -> &[Point] {
        &self.left_wall
    }

    pub fn right_wall(&self) -> &[Point] {
        &self.right_wall
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    /// Total path length.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arc length of each centerline waypoint.
    pub fn waypoint_arc_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn segment_count(&self) -> usize {
        self.centerline.len() - 1
    }

    /// Unit direction of centerline segment `i`.
    pub fn segment_direction(&self, i: usize) -> Point {
        (self.centerline[i + 1] - self.centerline[i]).normalize()
    }

    /// Index of the segment containing arc length `s`; corners belong to the
    /// outgoing segment.
    pub fn segment_at(&self, s: f64) -> usize {
        let last = self.segment_count() - 1;
        match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Point and heading on the centerline at arc length `s`.
    pub fn pose_at(&self, s: f64) -> Result<(Point, f64)> {
        let length = self.length();
        if !(s >= -GEOM_TOL && s <= length + GEOM_TOL) {
            return Err(NavError::ArcLengthOutOfRange { s, length });
        }
        Ok(self.pose_at_clamped(s))
    }

    /// `pose_at` with `s` clamped to the path.
    pub fn pose_at_clamped(&self, s: f64) -> (Point, f64) {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_at(s);
        let dir = self.segment_direction(i);
        let p = self.centerline[i] + dir * (s - self.cumulative[i]);
        (p, dir.y.atan2(dir.x))
    }

    /// Closest centerline point to `p`, searching only arc lengths within
    /// `[s_lo, s_hi]`. Returns `(arc length, signed lateral offset)` with
    /// positive offsets to the left of the path.
    pub fn project_window(&self, p: &Point, s_lo: f64, s_hi: f64) -> (f64, f64) {
        let s_lo = s_lo.max(0.0);
        let s_hi = s_hi.min(self.length());
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..self.segment_count() {
            let (a0, a1) = (self.cumulative[i], self.cumulative[i + 1]);
            if a1 < s_lo || a0 > s_hi {
                continue;
            }
            let a = self.centerline[i];
            let dir = self.segment_direction(i);
            let t = (p - a).dot(&dir).clamp(s_lo.max(a0) - a0, s_hi.min(a1) - a0);
            let q = a + dir * t;
            let dist = (p - q).norm();
            if dist < best.0 {
                best = (dist, a0 + t, cross(&dir, &(p - a)));
            }
        }
        (best.1, best.2)
    }

    /// Closest centerline point over the whole path.
    pub fn project(&self, p: &Point) -> (f64, f64) {
        self.project_window(p, 0.0, self.length())
    }

    /// All wall segments (left then right). The entrance and exit are open.
    pub fn wall_segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.left_wall
            .windows(2)
            .chain(self.right_wall.windows(2))
            .map(|w| (w[0], w[1]))
    }

    /// Boundary polygon: left wall forward, right wall backward.
    fn polygon(&self) -> impl Iterator<Item = &Point> + '_ {
        self.left_wall.iter().chain(self.right_wall.iter().rev())
    }

    /// Distance from `p` to the closest point of the tunnel boundary polygon.
    fn boundary_distance(&self, p: &Point) -> f64 {
        let pts: Vec<&Point> = self.polygon().collect();
        let k = pts.len();
        (0..k)
            .map(|i| point_segment_distance(p, pts[i], pts[(i + 1) % k]))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if `p` lies inside the tunnel polygon, within [`INSIDE_TOL`].
    pub fn contains(&self, p: &Point) -> bool {
        let pts: Vec<&Point> = self.polygon().collect();
        let k = pts.len();
        let mut inside = false;
        for i in 0..k {
            let (a, b) = (pts[i], pts[(i + 1) % k]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside || self.boundary_distance(p) <= INSIDE_TOL
    }

    /// Line of sight between two points inside the tunnel.
    pub fn has_los(&self, p: &Point, q: &Point) -> Result<bool> {
        for pt in [p, q] {
            if !self.contains(pt) {
                return Err(NavError::OutsideTunnel { x: pt.x, y: pt.y });
            }
        }
        Ok(self.segment_clear(p, q))
    }

    /// True when segment `pq` crosses no wall segment. Grazing contact does
    /// not block. Does not check membership.
    pub fn segment_clear(&self, p: &Point, q: &Point) -> bool {
        if (q - p).norm() <= GEOM_TOL {
            return true;
        }
        !self.wall_segments().any(|(a, b)| segments_cross_strictly(p, q, &a, &b))
    }

    /// Distance from `origin` along unit direction `dir` to the first wall hit.
    pub fn ray_to_wall(&self, origin: &Point, dir: &Point) -> Option<f64> {
        let through = origin + dir;
        self.wall_segments()
            .filter_map(|(a, b)| ray_segment_intersection(origin, &through, &a, &b).ok().flatten())
            .map(|sol| sol.alpha)
            .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |b| b.min(a))))
    }

    fn turn_index(&self, turn: &Turn) -> Result<usize> {
        self.turns
            .iter()
            .position(|t| t.waypoint == turn.waypoint)
            .filter(|&i| {
                let t = &self.turns[i];
                (t.angle - turn.angle).abs() < 1e-12 && (t.s - turn.s).abs() < 1e-9
            })
            .ok_or(NavError::UnknownTurn(turn.waypoint))
    }
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Signed distance of `c` from the line through `a`, `b`.
fn side(a: &Point, b: &Point, c: &Point) -> f64 {
    let ab = b - a;
    cross(&ab, &(c - a)) / ab.norm()
}

/// Proper crossing: each segment's endpoints lie strictly on opposite sides of
/// the other's supporting line.
pub fn segments_cross_strictly(p: &Point, q: &Point, a: &Point, b: &Point) -> bool {
    if (b - a).norm() <= GEOM_TOL {
        return false;
    }
    let o1 = side(p, q, a);
    let o2 = side(p, q, b);
    let o3 = side(a, b, p);
    let o4 = side(a, b, q);
    let opposite = |u: f64, v: f64| (u > GEOM_TOL && v < -GEOM_TOL) || (u < -GEOM_TOL && v > GEOM_TOL);
    opposite(o1, o2) && opposite(o3, o4)
}

/// Intersects the ray from `origin` through `through` with the segment
/// `[s_fr, s_to]`. Parallel overlapping inputs return the solution with the
/// smallest `alpha`.
pub fn ray_segment_intersection(
    origin: &Point,
    through: &Point,
    s_fr: &Point,
    s_to: &Point,
) -> Result<Option<IntersectionSolution>> {
    let d = through - origin;
    let dnorm = d.norm();
    if dnorm <= GEOM_TOL {
        return Err(NavError::DegenerateGeometry(
            "ray origin and through-point coincide".into(),
        ));
    }
    let e = s_fr - s_to;
    let elen = e.norm();
    if elen <= GEOM_TOL {
        return Err(NavError::DegenerateGeometry("segment has zero length".into()));
    }
    let u = d / dnorm;
    let rhs = s_to - origin;
    // alpha * u - beta * e = s_to - origin
    let det = -cross(&u, &e);
    let solution = |alpha: f64, beta: f64| IntersectionSolution {
        alpha,
        beta,
        point: origin + u * alpha,
    };

    if det.abs() <= 1e-12 * elen {
        if cross(&u, &rhs).abs() > GEOM_TOL {
            return Ok(None);
        }
        let a_fr = (s_fr - origin).dot(&u);
        let a_to = (s_to - origin).dot(&u);
        let (lo, hi) = (a_fr.min(a_to), a_fr.max(a_to));
        if hi < -GEOM_TOL {
            return Ok(None);
        }
        let alpha = lo.max(0.0);
        let p = origin + u * alpha;
        let beta = ((p - s_to).dot(&e) / (elen * elen)).clamp(0.0, 1.0);
        return Ok(Some(solution(alpha, beta)));
    }

    let alpha = (-rhs.x * e.y + e.x * rhs.y) / det;
    let beta = (u.x * rhs.y - u.y * rhs.x) / det;
    let btol = GEOM_TOL / elen;
    if alpha < -GEOM_TOL || beta < -btol || beta > 1.0 + btol {
        return Ok(None);
    }
    Ok(Some(solution(alpha.max(0.0), beta.clamp(0.0, 1.0))))
}

/// Post-turn point where line of sight to the landmark pair dropped before
/// `turn` is first lost, together with its arc length.
///
/// The ray is cast from the landmark on the inside of the turn through the
/// inner wall corner and intersected with the post-turn centerline segment.
pub fn pull_location(
    lm_left: &Point,
    lm_right: &Point,
    topology: &TunnelTopology,
    turn: &Turn,
) -> Result<Option<(Point, f64)>> {
    let k = topology.turn_index(turn)?;
    let turn = topology.turns[k];
    let inner = if turn.is_left() { lm_left } else { lm_right };
    pull_for_landmark(inner, topology, &turn)
}

/// Pull location from a single landmark, or `None` when the landmark sits at
/// the corner or its shadow ray misses the post-turn segment.
pub fn pull_for_landmark(landmark: &Point, topology: &TunnelTopology, turn: &Turn) -> Result<Option<(Point, f64)>> {
    let corner = turn.inner_corner;
    if (corner - landmark).norm() <= GEOM_TOL {
        return Ok(None);
    }
    let i = turn.waypoint;
    let s_fr = topology.centerline[i];
    let s_to = topology.centerline[i + 1];
    let Some(sol) = ray_segment_intersection(landmark, &corner, &s_fr, &s_to)? else {
        return Ok(None);
    };
    // The shadow boundary only starts beyond the corner.
    if sol.alpha + GEOM_TOL < (corner - landmark).norm() {
        return Ok(None);
    }
    let seg_len = (s_to - s_fr).norm();
    let s = topology.cumulative[i] + (1.0 - sol.beta) * seg_len;
    Ok(Some((sol.point, s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn l_tunnel() -> TunnelTopology {
        TunnelTopology::new(
            &[Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(100.0, -100.0)],
            20.0,
        )
        .unwrap()
    }

    /// Brute-force LOS: sample the segment densely and test each sample
    /// against the tunnel polygon.
    fn brute_los(t: &TunnelTopology, p: &Point, q: &Point) -> bool {
        (0..=20_000).all(|k| {
            let r = p + (q - p) * (k as f64 / 20_000.0);
            t.contains(&r)
        })
    }

    #[test]
    fn straight_tunnel_walls() {
        let t = TunnelTopology::new(&[Point::new(0.0, 0.0), Point::new(400.0, 0.0)], 20.0).unwrap();
        assert_eq!(t.length(), 400.0);
        assert!(t.turns().is_empty());
        assert!(t.left_wall().iter().all(|p| (p.y - 10.0).abs() < 1e-12));
        assert!(t.right_wall().iter().all(|p| (p.y + 10.0).abs() < 1e-12));
    }

    #[test]
    fn l_tunnel_turn_and_corner() {
        let t = l_tunnel();
        assert_eq!(t.length(), 200.0);
        assert_eq!(t.turns().len(), 1);
        let turn = t.turns()[0];
        assert!(!turn.is_left());
        assert!((turn.angle + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(turn.s, 100.0);
        assert!((turn.inner_corner - Point::new(90.0, -10.0)).norm() < 1e-12);
        // outer miter corner
        assert!((t.left_wall()[1] - Point::new(110.0, 10.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        let p = Point::new(1.0, 1.0);
        assert!(TunnelTopology::new(&[p], 10.0).is_err());
        assert!(TunnelTopology::new(&[p, p], 10.0).is_err());
        assert!(TunnelTopology::new(&[Point::zeros(), p], 0.0).is_err());
        assert!(TunnelTopology::new(&[Point::zeros(), p], -1.0).is_err());
        assert!(TunnelTopology::new(&[Point::zeros(), Point::new(10.0, 0.0), Point::new(0.0, 0.0)], 2.0).is_err());
    }

    #[test]
    fn collinear_waypoints_are_not_turns() {
        let t = TunnelTopology::new(
            &[Point::new(0.0, 0.0), Point::new(50.0, 0.0), Point::new(120.0, 0.0)],
            10.0,
        )
        .unwrap();
        assert!(t.turns().is_empty());
        assert_eq!(t.length(), 120.0);
    }

    #[test]
    fn three_turn_tunnel() {
        let t = TunnelTopology::new(
            &[
                Point::new(0.0, 0.0),
                Point::new(110.0, 0.0),
                Point::new(110.0, -90.0),
                Point::new(210.0, -90.0),
                Point::new(210.0, 10.0),
            ],
            24.0,
        )
        .unwrap();
        assert_eq!(t.turns().len(), 3);
        assert!((t.length() - 400.0).abs() < 1e-12);
    }

    #[test]
    fn pose_queries() {
        let s = TunnelTopology::straight(400.0, 20.0).unwrap();
        let (p, h) = s.pose_at(0.0).unwrap();
        assert_eq!((p, h), (Point::zeros(), 0.0));
        let t = l_tunnel();
        let (p, h) = t.pose_at(150.0).unwrap();
        assert!((p - Point::new(100.0, -50.0)).norm() < 1e-12);
        assert!((h + FRAC_PI_2).abs() < 1e-12);
        let (p, _) = t.pose_at(200.0).unwrap();
        assert!((p - Point::new(100.0, -100.0)).norm() < 1e-12);
        // corner takes the outgoing heading
        let (_, h) = t.pose_at(100.0).unwrap();
        assert!((h + FRAC_PI_2).abs() < 1e-12);
        assert!(t.pose_at(-1.0).is_err());
        assert!(t.pose_at(200.5).is_err());
    }

    #[test]
    fn wall_vertices_are_offset_by_half_width() {
        let t = TunnelTopology::new(
            &[
                Point::new(0.0, 0.0),
                Point::new(30.0, 10.0),
                Point::new(60.0, -5.0),
                Point::new(80.0, 30.0),
            ],
            6.0,
        )
        .unwrap();
        let c = t.centerline();
        for i in 0..c.len() - 1 {
            for wall in [t.left_wall(), t.right_wall()] {
                for v in [wall[i], wall[i + 1]] {
                    let a = c[i];
                    let dir = (c[i + 1] - a).normalize();
                    let dist = cross(&dir, &(v - a)).abs();
                    assert!((dist - 3.0).abs() < 1e-9, "dist {dist}");
                }
            }
        }
    }

    #[test]
    fn los_cases() {
        let s = TunnelTopology::straight(400.0, 20.0).unwrap();
        assert!(s.has_los(&Point::new(5.0, 9.0), &Point::new(390.0, -9.5)).unwrap());
        let t = l_tunnel();
        let p = Point::new(50.0, 0.0);
        let q = Point::new(100.0, -50.0);
        assert!(!brute_los(&t, &p, &q));
        assert!(!t.has_los(&p, &q).unwrap());
        assert!(t.has_los(&p, &p).unwrap());
        assert!(t.has_los(&Point::new(50.0, 0.0), &Point::new(100.0, -5.0)).unwrap());
        assert!(t.has_los(&Point::new(500.0, 0.0), &p).is_err());
    }

    #[test]
    fn los_matches_brute_force_on_l_tunnel() {
        let t = l_tunnel();
        let pts: Vec<Point> = (0..12)
            .flat_map(|i| {
                let s = 5.0 + 16.0 * i as f64;
                let (c, h) = t.pose_at(s).unwrap();
                let n = left_normal(&heading_vector(h));
                [c + n * 7.0, c, c - n * 7.0]
            })
            .collect();
        for p in &pts {
            for q in &pts {
                assert_eq!(t.has_los(p, q).unwrap(), brute_los(&t, p, q), "p={p:?} q={q:?}");
                assert_eq!(t.has_los(p, q).unwrap(), t.has_los(q, p).unwrap());
            }
        }
    }

    #[test]
    fn ray_segment_examples() {
        let o = Point::new(0.0, 0.0);
        let x = Point::new(1.0, 0.0);
        let sol = ray_segment_intersection(&o, &x, &Point::new(2.0, -1.0), &Point::new(2.0, 1.0))
            .unwrap()
            .unwrap();
        assert!((sol.alpha - 2.0).abs() < 1e-12);
        assert!((sol.beta - 0.5).abs() < 1e-12);
        assert!((sol.point - Point::new(2.0, 0.0)).norm() < 1e-12);
        assert!(
            ray_segment_intersection(&o, &x, &Point::new(-2.0, -1.0), &Point::new(-2.0, 1.0))
                .unwrap()
                .is_none()
        );

        let origin = Point::new(60.0, -8.0);
        let sol = ray_segment_intersection(
            &origin,
            &Point::new(90.0, -10.0),
            &Point::new(100.0, -10.0),
            &Point::new(100.0, -110.0),
        )
        .unwrap()
        .unwrap();
        assert!((sol.point - Point::new(100.0, -32.0 / 3.0)).norm() < 1e-9);
        let expected_alpha = (40.0f64.powi(2) + (8.0f64 / 3.0).powi(2)).sqrt();
        assert!((sol.alpha - expected_alpha).abs() < 1e-9);
        // beta weights s_fr: point = beta * s_fr + (1 - beta) * s_to
        assert!((sol.beta - (110.0 - 32.0 / 3.0) / 100.0).abs() < 1e-12);
    }

    #[test]
    fn ray_segment_parallel_cases() {
        let o = Point::new(0.0, 0.0);
        let x = Point::new(1.0, 0.0);
        // parallel, disjoint
        assert!(
            ray_segment_intersection(&o, &x, &Point::new(0.0, 1.0), &Point::new(5.0, 1.0))
                .unwrap()
                .is_none()
        );
        // collinear overlap: first contact at alpha = 3
        let sol = ray_segment_intersection(&o, &x, &Point::new(7.0, 0.0), &Point::new(3.0, 0.0))
            .unwrap()
            .unwrap();
        assert!((sol.alpha - 3.0).abs() < 1e-12);
        assert!((sol.beta - 0.0).abs() < 1e-12);
        // origin inside the segment
        let sol = ray_segment_intersection(&o, &x, &Point::new(-1.0, 0.0), &Point::new(3.0, 0.0))
            .unwrap()
            .unwrap();
        assert_eq!(sol.alpha, 0.0);
        assert!(ray_segment_intersection(&o, &o, &x, &Point::new(2.0, 0.0)).is_err());
        assert!(ray_segment_intersection(&o, &x, &x, &x).is_err());
    }

    #[test]
    fn pull_location_l_tunnel() {
        let t = l_tunnel();
        let turn = t.turns()[0];
        let (p, s) = pull_location(&Point::new(60.0, 8.0), &Point::new(60.0, -8.0), &t, &turn)
            .unwrap()
            .unwrap();
        assert!((p - Point::new(100.0, -32.0 / 3.0)).norm() < 1e-9);
        assert!((s - (100.0 + 32.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn pull_location_boundary_matches_los() {
        let t = l_tunnel();
        let turn = t.turns()[0];
        let lm = Point::new(60.0, -8.0);
        let (_, s_pull) = pull_location(&Point::new(60.0, 8.0), &lm, &t, &turn).unwrap().unwrap();
        for k in 0..200 {
            let s = 100.0 + k as f64 * 0.5;
            if (s - s_pull).abs() <= 1e-6 {
                continue;
            }
            let (p, _) = t.pose_at(s).unwrap();
            assert_eq!(t.has_los(&p, &lm).unwrap(), s < s_pull, "s = {s}");
        }
    }

    #[test]
    fn pull_location_rejects_foreign_turn() {
        let t = l_tunnel();
        let mut turn = t.turns()[0];
        turn.waypoint = 5;
        assert!(pull_location(&Point::zeros(), &Point::zeros(), &t, &turn).is_err());
    }

    #[test]
    fn projection_reports_lateral_offset() {
        let t = l_tunnel();
        let (s, lat) = t.project(&Point::new(40.0, 3.0));
        assert!((s - 40.0).abs() < 1e-12 && (lat - 3.0).abs() < 1e-12);
        let (s, lat) = t.project(&Point::new(98.0, -60.0));
        assert!((s - 160.0).abs() < 1e-12 && (lat + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ray_to_wall_distances() {
        let t = TunnelTopology::straight(100.0, 20.0).unwrap();
        let d = t.ray_to_wall(&Point::new(50.0, 2.0), &Point::new(0.0, 1.0)).unwrap();
        assert!((d - 8.0).abs() < 1e-12);
        let d = t.ray_to_wall(&Point::new(50.0, 2.0), &Point::new(0.0, -1.0)).unwrap();
        assert!((d - 12.0).abs() < 1e-12);
    }
}
