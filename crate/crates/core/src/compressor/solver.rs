//! Exact 0-1 integer programming by depth-first branch and bound.
//!
//! Maximizes `sum w_i x_i` over binary `x` subject to rows `sum a_ij x_j <= b_i`
//! with integer coefficients. Weights must be non-negative. Bounding is
//! combinatorial: for every row whose free coefficients are all positive, a
//! fractional knapsack over the free variables (sorted by weight per unit of
//! coefficient) caps what the row still allows, and the tightest cap wins.

/// `sum coeff * x <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: i64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, i64)>, rhs: i64) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn satisfied(&self, x: &[bool]) -> bool {
        self.coeffs.iter().map(|&(i, a)| if x[i] { a } else { 0 }).sum::<i64>() <= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryProgram {
    pub weights: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

/// Relative slack used when comparing objective values.
const EPS: f64 = 1e-12;

impl BinaryProgram {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn feasible(&self, x: &[bool]) -> bool {
        x.len() == self.weights.len() && self.constraints.iter().all(|c| c.satisfied(x))
    }

    /// Objective of `x`, summed in variable order.
    pub fn objective(&self, x: &[bool]) -> f64 {
        let mut total = 0.0;
        for (w, &on) in self.weights.iter().zip(x) {
            if on {
                total += w;
            }
        }
        total
    }
}

struct Search<'a> {
    program: &'a BinaryProgram,
    x: Vec<Option<bool>>,
    best: Option<(f64, Vec<bool>)>,
    /// constraints touching each variable
    touching: Vec<Vec<usize>>,
}

impl Search<'_> {
    /// Smallest achievable left-hand side of row `r` given the fixed variables.
    fn min_lhs(&self, r: usize) -> i64 {
        self.program.constraints[r]
            .coeffs
            .iter()
            .map(|&(i, a)| match self.x[i] {
                Some(true) => a,
                Some(false) => 0,
                None => a.min(0),
            })
            .sum()
    }

    fn bound(&self, from: usize) -> f64 {
        let free: Vec<usize> = (from..self.x.len()).collect();
        let plain: f64 = free.iter().map(|&i| self.program.weights[i]).sum();
        let mut best = plain;
        for c in &self.program.constraints {
            let mut row_free: Vec<(usize, i64)> = c.coeffs.iter().copied().filter(|&(i, _)| self.x[i].is_none()).collect();
            if row_free.is_empty() || row_free.iter().any(|&(_, a)| a <= 0) {
                continue;
            }
            let fixed: i64 = c
                .coeffs
                .iter()
                .filter(|&&(i, _)| self.x[i] == Some(true))
                .map(|&(_, a)| a)
                .sum();
            let mut capacity = (c.rhs - fixed) as f64;
            let in_row: f64 = row_free.iter().map(|&(i, _)| self.program.weights[i]).sum();
            row_free.sort_by(|&(i, a), &(j, b)| {
                let ri = self.program.weights[i] / a as f64;
                let rj = self.program.weights[j] / b as f64;
                rj.partial_cmp(&ri).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
            });
            let mut knapsack = 0.0;
            for (i, a) in row_free {
                if capacity <= 0.0 {
                    break;
                }
                let take = (capacity / a as f64).min(1.0);
                knapsack += take * self.program.weights[i];
                capacity -= take * a as f64;
            }
            best = best.min(plain - in_row + knapsack);
        }
        best
    }

    fn dfs(&mut self, idx: usize, value: f64) {
        if idx == self.x.len() {
            let better = match &self.best {
                None => true,
                Some((b, _)) => value > b + EPS * b.abs().max(1.0),
            };
            if better {
                self.best = Some((value, self.x.iter().map(|v| v.unwrap_or(false)).collect()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if value + self.bound(idx) <= b + EPS * b.abs().max(1.0) {
                return;
            }
        }
        for choice in [true, false] {
            self.x[idx] = Some(choice);
            let ok = self.touching[idx]
                .iter()
                .all(|&r| self.min_lhs(r) <= self.program.constraints[r].rhs);
            if ok {
                let gain = if choice { self.program.weights[idx] } else { 0.0 };
                self.dfs(idx + 1, value + gain);
            }
        }
        self.x[idx] = None;
    }
}

/// Optimal assignment, or `None` when no assignment satisfies every row.
/// Among optimal assignments the one found first (trying 1 before 0 in
/// variable order) is returned.
pub fn solve(program: &BinaryProgram) -> Option<Vec<bool>> {
    let n = program.weights.len();
    let mut touching = vec![Vec::new(); n];
    for (r, c) in program.constraints.iter().enumerate() {
        for &(i, _) in &c.coeffs {
            if !touching[i].contains(&r) {
                touching[i].push(r);
            }
        }
    }
    let mut search = Search {
        program,
        x: vec![None; n],
        best: None,
        touching,
    };
    // rows with no variables at all
    let trivially_broken = program.constraints.iter().any(|c| c.coeffs.is_empty() && c.rhs < 0);
    if trivially_broken || (0..program.constraints.len()).any(|r| search.min_lhs(r) > program.constraints[r].rhs) {
        return None;
    }
    search.dfs(0, 0.0);
    search.best.map(|(_, x)| x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cardinality(n: usize, cap: i64) -> Constraint {
        Constraint::new((0..n).map(|i| (i, 1)).collect(), cap)
    }

    #[test]
    fn forced_deletion_drops_the_cheapest() {
        let p = BinaryProgram {
            weights: vec![0.5, 0.1, 0.9, 0.3],
            constraints: vec![cardinality(4, 3)],
        };
        assert_eq!(solve(&p).unwrap(), vec![true, false, true, true]);
    }

    #[test]
    fn chain_keeps_child_with_parent() {
        // x1 <= x0, child worth far more than the parent
        let p = BinaryProgram {
            weights: vec![0.01, 0.9, 0.2],
            constraints: vec![Constraint::new(vec![(1, 1), (0, -1)], 0), cardinality(3, 2)],
        };
        let x = solve(&p).unwrap();
        assert!(!(x[1] && !x[0]));
        assert_eq!(x, vec![true, true, false]);
    }

    #[test]
    fn single_variable_forced_to_zero() {
        let p = BinaryProgram {
            weights: vec![0.7],
            constraints: vec![cardinality(1, 0)],
        };
        assert_eq!(solve(&p).unwrap(), vec![false]);
    }

    #[test]
    fn infeasible_program() {
        let p = BinaryProgram {
            weights: vec![0.7],
            constraints: vec![Constraint::new(vec![(0, -1)], -1), cardinality(1, 0)],
        };
        assert_eq!(solve(&p), None);
    }

    #[test]
    fn empty_program() {
        let p = BinaryProgram {
            weights: vec![],
            constraints: vec![],
        };
        assert_eq!(solve(&p).unwrap(), Vec::<bool>::new());
    }

    #[test]
    fn weighted_row_knapsack() {
        // 3 x0 + 2 x1 + 2 x2 <= 4
        let p = BinaryProgram {
            weights: vec![0.6, 0.35, 0.35],
            constraints: vec![Constraint::new(vec![(0, 3), (1, 2), (2, 2)], 4)],
        };
        assert_eq!(solve(&p).unwrap(), vec![false, true, true]);
    }
}
