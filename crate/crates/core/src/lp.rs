//! Incremental low-dimensional linear programming over velocity half-planes.
//!
//! The solver finds the velocity closest to a preferred velocity inside a
//! speed disc and a set of half-planes by adding constraints one at a time.
//! Each time the running optimum violates a new constraint, the optimum is
//! re-solved on that constraint's boundary line (a 1D problem). When the
//! constraints have no common point, a second pass minimizes the largest
//! penetration depth over all constraints, again incrementally.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

const PARALLEL_EPS: f64 = 1e-12;

/// One linear velocity constraint. The permitted side is to the left of
/// `direction` when standing on `point`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub point: Vec2,
    /// Unit vector along the boundary line.
    pub direction: Vec2,
}

impl HalfPlane {
    /// Signed distance of `v` into the forbidden side; positive means the
    /// constraint is violated.
    #[inline]
    pub fn penetration(&self, v: Vec2) -> f64 {
        self.direction.det(self.point - v)
    }

    #[inline]
    pub fn contains(&self, v: Vec2) -> bool {
        self.penetration(v) <= 0.0
    }
}

/// Result of [`solve_velocity_detailed`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpSolution {
    pub velocity: Vec2,
    /// False when the half-planes had no common point inside the speed disc
    /// and the minimum-penetration fallback was used.
    pub feasible: bool,
}

/// Velocity of norm at most `v_max` closest to `preferred` that satisfies all
/// `lines`; falls back to the velocity minimizing the largest penetration
/// when that set is empty.
pub fn solve_velocity(lines: &[HalfPlane], preferred: Vec2, v_max: f64) -> Vec2 {
    solve_velocity_detailed(lines, preferred, v_max).velocity
}

pub fn solve_velocity_detailed(lines: &[HalfPlane], preferred: Vec2, v_max: f64) -> LpSolution {
    debug_assert!(v_max > 0.0);
    let mut result = Vec2::ZERO;
    let failed = solve_2d(lines, v_max, preferred, false, &mut result);
    let feasible = failed == lines.len();
    if !feasible {
        solve_min_penetration(lines, 0, failed, v_max, &mut result);
    }
    let n = result.norm();
    if n > v_max {
        result = result * (v_max / n);
    }
    LpSolution {
        velocity: result,
        feasible,
    }
}

/// Optimizes along the boundary of `lines[line_no]` subject to the earlier
/// lines and the disc. Returns false if that segment is empty.
/// Solves over `hard` and `soft` together. When that is infeasible the hard
/// lines are kept exactly and the soft ones relaxed; when the hard lines
/// alone are infeasible the soft ones are dropped and the hard ones relaxed.
pub fn solve_velocity_prioritized(
    hard: &[HalfPlane],
    soft: &[HalfPlane],
    preferred: Vec2,
    v_max: f64,
) -> LpSolution {
    let mut lines = Vec::with_capacity(hard.len() + soft.len());
    lines.extend_from_slice(hard);
    lines.extend_from_slice(soft);
    let mut result = Vec2::ZERO;
    let failed = solve_2d(&lines, v_max, preferred, false, &mut result);
    if failed < hard.len() {
        let mut fallback = solve_velocity_detailed(hard, preferred, v_max);
        fallback.feasible = false;
        return fallback;
    }
    let feasible = failed == lines.len();
    if !feasible {
        solve_min_penetration(&lines, hard.len(), failed, v_max, &mut result);
    }
    let n = result.norm();
    if n > v_max {
        result = result * (v_max / n);
    }
    LpSolution {
        velocity: result,
        feasible,
    }
}

fn solve_1d(
    lines: &[HalfPlane],
    line_no: usize,
    radius: f64,
    optimum: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> bool {
    let line = lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.norm_squared();
    if discriminant < 0.0 {
        // The line misses the disc entirely.
        return false;
    }
    let sqrt_disc = discriminant.sqrt();
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for other in &lines[..line_no] {
        let denominator = line.direction.det(other.direction);
        let numerator = other.direction.det(line.point - other.point);
        if denominator.abs() <= PARALLEL_EPS {
            if numerator < 0.0 {
                return false;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if direction_opt {
        if optimum.dot(line.direction) > 0.0 {
            line.point + t_right * line.direction
        } else {
            line.point + t_left * line.direction
        }
    } else {
        let t = line.direction.dot(optimum - line.point);
        line.point + t.clamp(t_left, t_right) * line.direction
    };
    true
}

/// Returns the index of the first line that made the program infeasible, or
/// `lines.len()` on success.
fn solve_2d(
    lines: &[HalfPlane],
    radius: f64,
    optimum: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> usize {
    *result = if direction_opt {
        // `optimum` is a unit direction here.
        optimum * radius
    } else if optimum.norm_squared() > radius * radius {
        optimum.try_normalize().unwrap_or(Vec2::ZERO) * radius
    } else {
        optimum
    };

    for i in 0..lines.len() {
        if lines[i].penetration(*result) > 0.0 {
            let previous = *result;
            if !solve_1d(lines, i, radius, optimum, direction_opt, result) {
                *result = previous;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimizes the maximum penetration, starting from the partial solution of
/// an infeasible [`solve_2d`] run.
/// Lines before `n_hard` are kept exactly; the rest are relaxed together.
fn solve_min_penetration(
    lines: &[HalfPlane],
    n_hard: usize,
    begin: usize,
    radius: f64,
    result: &mut Vec2,
) {
    let mut distance = 0.0;
    let mut projected: Vec<HalfPlane> = Vec::with_capacity(lines.len());
    for i in begin.max(n_hard)..lines.len() {
        if lines[i].penetration(*result) <= distance {
            continue;
        }
        // Constraint i is the worst so far: restrict to where i is at least as
        // satisfied as each earlier soft line.
        projected.clear();
        projected.extend_from_slice(&lines[..n_hard]);
        for j in n_hard..i {
            let determinant = lines[i].direction.det(lines[j].direction);
            let point = if determinant.abs() <= PARALLEL_EPS {
                if lines[i].direction.dot(lines[j].direction) > 0.0 {
                    // Same orientation; j never binds before i.
                    continue;
                }
                0.5 * (lines[i].point + lines[j].point)
            } else {
                lines[i].point
                    + (lines[j].direction.det(lines[i].point - lines[j].point) / determinant)
                        * lines[i].direction
            };
            let Some(direction) = (lines[j].direction - lines[i].direction).try_normalize() else {
                continue;
            };
            projected.push(HalfPlane { point, direction });
        }
        let previous = *result;
        let toward_i = lines[i].direction.perp();
        if solve_2d(&projected, radius, toward_i, true, result) < projected.len() {
            // Only fails through rounding; the previous value is the best
            // known.
            *result = previous;
        }
        distance = lines[i].penetration(*result);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(px: f64, py: f64, angle: f64) -> HalfPlane {
        HalfPlane {
            point: Vec2::new(px, py),
            direction: Vec2::from_angle(angle),
        }
    }

    #[test]
    fn unconstrained_returns_preferred() {
        let v = Vec2::new(0.3, -0.4);
        assert_eq!(solve_velocity(&[], v, 1.0), v);
    }

    #[test]
    fn unconstrained_clips_to_speed_disc() {
        let v = solve_velocity(&[], Vec2::new(3.0, 4.0), 1.0);
        assert!((v - Vec2::new(0.6, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn satisfied_constraint_is_inert() {
        // Permitted side: y >= -0.5 (left of +x direction).
        let line = hp(0.0, -0.5, 0.0);
        let v = Vec2::new(0.2, 0.1);
        assert_eq!(solve_velocity(&[line], v, 1.0), v);
    }

    #[test]
    fn violated_constraint_projects_onto_boundary() {
        // Permitted side: y >= 0.5.
        let line = hp(0.0, 0.5, 0.0);
        let sol = solve_velocity_detailed(&[line], Vec2::new(0.2, 0.0), 1.0);
        assert!(sol.feasible);
        assert!((sol.velocity - Vec2::new(0.2, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn corner_of_two_constraints() {
        // y >= 0.5 and x >= 0.3 (left of -y direction through (0.3, 0)).
        let lines = [
            hp(0.0, 0.5, 0.0),
            hp(0.3, 0.0, -std::f64::consts::FRAC_PI_2),
        ];
        let v = solve_velocity(&lines, Vec2::ZERO, 2.0);
        assert!((v - Vec2::new(0.3, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn infeasible_pair_splits_the_difference() {
        // y >= 0.5 and y <= -0.5: min-max penetration is 0.5 on y = 0.
        let lines = [hp(0.0, 0.5, 0.0), hp(0.0, -0.5, std::f64::consts::PI)];
        let sol = solve_velocity_detailed(&lines, Vec2::new(0.1, 0.0), 1.0);
        assert!(!sol.feasible);
        assert!(sol.velocity.y.abs() < 1e-9);
        let worst = lines
            .iter()
            .map(|l| l.penetration(sol.velocity))
            .fold(f64::MIN, f64::max);
        assert!((worst - 0.5).abs() < 1e-9);
    }

    #[test]
    fn line_outside_disc_is_infeasible() {
        // y >= 2 with v_max 1: best is (0, 1).
        let sol = solve_velocity_detailed(&[hp(0.0, 2.0, 0.0)], Vec2::new(0.5, 0.0), 1.0);
        assert!(!sol.feasible);
        assert!((sol.velocity - Vec2::new(0.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn prioritized_matches_plain_when_feasible() {
        let hard = [hp(0.0, -0.5, 0.0)];
        let soft = [hp(0.0, 0.5, 0.0)];
        let sol = solve_velocity_prioritized(&hard, &soft, Vec2::new(0.2, 0.0), 1.0);
        assert!(sol.feasible);
        assert!((sol.velocity - Vec2::new(0.2, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn prioritized_keeps_hard_lines() {
        // Hard: y <= -0.2. Soft: y >= 0.5 and x >= 0.3.
        let hard = [hp(0.0, -0.2, std::f64::consts::PI)];
        let soft = [
            hp(0.0, 0.5, 0.0),
            hp(0.3, 0.0, -std::f64::consts::FRAC_PI_2),
        ];
        let sol = solve_velocity_prioritized(&hard, &soft, Vec2::ZERO, 1.0);
        assert!(!sol.feasible);
        assert!(hard[0].penetration(sol.velocity) <= 1e-9);
        assert!((sol.velocity.y + 0.2).abs() < 1e-9);
    }

    #[test]
    fn prioritized_relaxes_infeasible_hard_set() {
        let hard = [hp(0.0, 0.5, 0.0), hp(0.0, -0.5, std::f64::consts::PI)];
        let soft = [hp(0.0, 0.9, 0.0)];
        let sol = solve_velocity_prioritized(&hard, &soft, Vec2::new(0.1, 0.0), 1.0);
        assert!(!sol.feasible);
        assert!(sol.velocity.y.abs() < 1e-9);
    }
}
