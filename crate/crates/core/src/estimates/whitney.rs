//! Whitney pairs of dyadic subintervals of I = [1, 2].

use serde::Serialize;

/// Q = [1 + k·2^{−j}, 1 + (k+1)·2^{−j}] and Q' likewise with k'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WhitneyPair {
    pub j: u32,
    pub k: u64,
    pub k_prime: u64,
}

impl WhitneyPair {
    pub fn len(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    pub fn q(&self) -> (f64, f64) {
        interval(self.j, self.k)
    }

    pub fn q_prime(&self) -> (f64, f64) {
        interval(self.j, self.k_prime)
    }

    /// Gap between the two intervals.
    pub fn distance(&self) -> f64 {
        let (a, b) = (self.q(), self.q_prime());
        (a.0.max(b.0) - a.1.min(b.1)).max(0.0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (a, b) = (self.q(), self.q_prime());
        a.0 <= x && x <= a.1 && b.0 <= y && y <= b.1
    }
}

fn interval(j: u32, k: u64) -> (f64, f64) {
    let h = (-(j as f64)).exp2();
    (1.0 + k as f64 * h, 1.0 + (k + 1) as f64 * h)
}

/// All ordered cousin pairs at scales 1..=j_max: not adjacent, parents adjacent.
pub fn whitney_decompose(j_max: u32) -> Vec<WhitneyPair> {
    let mut out = Vec::new();
    for j in 1..=j_max {
        let count = 1u64 << j;
        for k in 0..count {
            let parent = k / 2;
            // cousins lie in the parent's neighbours
            let lo = (parent.saturating_sub(1)) * 2;
            let hi = ((parent + 1) * 2 + 1).min(count - 1);
            for kp in lo..=hi {
                if kp.abs_diff(k) >= 2 && (kp / 2).abs_diff(parent) == 1 {
                    out.push(WhitneyPair { j, k, k_prime: kp });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_force(j: u32) -> BTreeSet<WhitneyPair> {
        let count = 1u64 << j;
        let h = (-(j as f64)).exp2();
        let mut set = BTreeSet::new();
        for k in 0..count {
            for kp in 0..count {
                let (a, b) = (interval(j, k), interval(j, kp));
                let gap = (a.0.max(b.0) - a.1.min(b.1)).max(0.0);
                let (pa, pb) = (interval(j - 1, k / 2), interval(j - 1, kp / 2));
                let parent_gap = pa.0.max(pb.0) - pa.1.min(pb.1);
                if gap > 0.5 * h && k / 2 != kp / 2 && parent_gap.abs() < 1e-15 {
                    set.insert(WhitneyPair { j, k, k_prime: kp });
                }
            }
        }
        set
    }

    #[test]
    fn first_pairs_appear_at_scale_two() {
        let pairs = whitney_decompose(2);
        assert!(pairs.iter().all(|p| p.j == 2));
        assert_eq!(pairs.len(), 6);
    }

    #[test]
    fn matches_brute_force_enumeration() {
        let pairs = whitney_decompose(7);
        for j in 1..=7 {
            let ours: BTreeSet<_> = pairs.iter().filter(|p| p.j == j).cloned().collect();
            assert_eq!(ours, brute_force(j), "scale {j}");
        }
    }

    #[test]
    fn distances_and_cousin_counts() {
        let pairs = whitney_decompose(8);
        for p in &pairs {
            let d = p.distance();
            assert!(d >= p.len() - 1e-15 && d <= 4.0 * p.len() + 1e-15);
        }
        for j in 1..=8 {
            for k in 0..(1u64 << j) {
                let n = pairs.iter().filter(|p| p.j == j && p.k == k).count();
                assert!(n <= 8);
            }
        }
    }

    #[test]
    fn pairs_cover_the_off_diagonal() {
        let j_max = 9;
        let pairs = whitney_decompose(j_max);
        let steps = 120;
        for a in 0..=steps {
            for b in 0..=steps {
                let (x, y) = (1.0 + a as f64 / steps as f64, 1.0 + b as f64 / steps as f64);
                if (x - y).abs() < 4.0 * (-(j_max as f64)).exp2() {
                    continue;
                }
                assert!(pairs.iter().any(|p| p.contains(x, y)), "({x}, {y}) uncovered");
            }
        }
    }
}
