//! Dense two-phase simplex for `min cᵀt` subject to `At = b`, `t ≥ 0`.
//!
//! Bland's rule is used throughout, so the method cannot cycle.

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, solution: Vec<f64> },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-11;

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimises the objective `cost` over columns `0..allowed`.
    /// Returns `false` if unbounded.
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> bool {
        let m = self.basis.len();
        loop {
            // reduced costs
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = (0..m).map(|i| cost[self.basis[i]] * self.rows[i][j]).sum();
                cost[j] - z < -EPS
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(f64, usize, usize)> = None;
            for i in 0..m {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rows[i][self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((best, _, bvar)) => {
                            ratio < best - EPS || (ratio <= best + EPS && self.basis[i] < bvar)
                        }
                    };
                    if better {
                        leave = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match leave {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves `min cᵀt` s.t. `At = b`, `t ≥ 0` with `A` given by rows.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let k = c.len();
    assert_eq!(b.len(), m);
    // columns: k structural, m artificial, then rhs
    let cols = k + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        assert_eq!(a[i].len(), k);
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row: Vec<f64> = a[i].iter().map(|v| sign * v).collect();
        row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
        row.push(sign * b[i]);
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (k..k + m).collect(),
        cols,
    };

    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[k..] {
        *v = 1.0;
    }
    t.optimise(&phase1, cols);
    let infeas: f64 = (0..m).map(|i| phase1[t.basis[i]] * t.rows[i][cols]).sum();
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis
    for r in 0..m {
        if t.basis[r] >= k {
            if let Some(c) = (0..k).find(|&j| t.rows[r][j].abs() > EPS && !t.basis.contains(&j)) {
                t.pivot(r, c);
            }
        }
    }

    // artificials stuck in the basis sit at zero on redundant rows
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(m));
    if !t.optimise(&phase2, k) {
        return LpOutcome::Unbounded;
    }
    let mut solution = vec![0.0; k];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < k {
            solution[bv] = t.rows[i][cols];
        }
    }
    let value = solution.iter().zip(c).map(|(x, ci)| x * ci).sum();
    LpOutcome::Optimal { value, solution }
}
