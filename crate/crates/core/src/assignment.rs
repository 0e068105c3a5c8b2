//! Rectangular linear assignment (Hungarian method, shortest augmenting paths).

/// Minimum-cost assignment on a dense `rows x cols` cost matrix.
///
/// Every row is assigned when `rows <= cols`, otherwise every column is.
/// Returns, for each row, the assigned column.
pub fn solve(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    if rows <= cols {
        solve_wide(rows, cols, |r, c| cost[r][c])
    } else {
        let by_col = solve_wide(cols, rows, |r, c| cost[c][r]);
        let mut out = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        out
    }
}

// n <= m. Potentials u (rows), v (cols); `way` stores the augmenting tree.
fn solve_wide(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    // p[j]: row (1-based) matched to column j; p[0] is the row being inserted.
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Matching restricted to allowed pairs (`Some(cost)`): maximizes the number
/// of pairs first, then minimizes their total cost. Returns `(row, col)`
/// pairs sorted by row.
pub fn max_cardinality_min_cost(cost: &[Vec<Option<f64>>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    let allowed: Vec<f64> = cost.iter().flatten().flatten().copied().collect();
    if allowed.is_empty() {
        return Vec::new();
    }
    let lo = allowed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = allowed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let k = rows.min(cols) as f64;
    // Any extra pair outweighs every possible cost difference.
    let bonus = (k + 1.0) * span + 1.0;
    let dense: Vec<Vec<f64>> = cost
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| c.map_or(0.0, |c| (c - lo) - bonus))
                .collect()
        })
        .collect();
    solve(&dense)
        .into_iter()
        .enumerate()
        .filter_map(|(r, c)| c.filter(|&c| cost[r][c].is_some()).map(|c| (r, c)))
        .collect()
}
