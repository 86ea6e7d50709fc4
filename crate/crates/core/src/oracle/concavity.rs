#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Concavity {
    /// Largest second difference seen (at most the allowed slack).
    Concave(f64),
    /// First grid index whose second difference exceeds the slack.
    Violation(usize),
}

impl Concavity {
    pub fn is_concave(&self) -> bool {
        matches!(self, Concavity::Concave(_))
    }
}

/// Checks that the second differences of `f` on a sorted grid are at most
/// `1e-6`.
pub fn probe_concavity<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Concavity {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    probe_concavity_values(grid, &values, 1e-6)
}

/// Second differences of tabulated values. On a nonuniform grid the
/// difference at `k` is `2 (h_{k-1} f_{k+1} - (h_{k-1} + h_k) f_k + h_k f_{k-1}) / (h_{k-1} + h_k)`,
/// which reduces to `f_{k+1} - 2 f_k + f_{k-1}` for equal spacing.
pub fn probe_concavity_values(grid: &[f64], values: &[f64], slack: f64) -> Concavity {
    assert!(grid.len() >= 3 && grid.len() == values.len(), "need at least three matching points");
    assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must be strictly increasing");
    let mut worst = f64::NEG_INFINITY;
    for k in 1..grid.len() - 1 {
        let h0 = grid[k] - grid[k - 1];
        let h1 = grid[k + 1] - grid[k];
        let second = 2.0 * (h0 * values[k + 1] - (h0 + h1) * values[k] + h1 * values[k - 1]) / (h0 + h1);
        if second > slack {
            return Concavity::Violation(k);
        }
        worst = worst.max(second);
    }
    Concavity::Concave(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_convex() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        assert!(probe_concavity(|r| r, &grid).is_concave());
        assert!(!probe_concavity(|r| 100.0 * r * r, &grid).is_concave());
        assert!(probe_concavity(|r| -(r * r), &grid).is_concave());
    }

    #[test]
    fn nonuniform_grid() {
        let grid = [0.0, 0.1, 0.5, 0.6, 2.0];
        assert!(probe_concavity(|r| 3.0 * r - 1.0, &grid).is_concave());
        assert!(!probe_concavity(|r| r * r, &grid).is_concave());
    }
}
