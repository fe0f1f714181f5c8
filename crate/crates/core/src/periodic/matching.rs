//! Assignment problems on small dense cost matrices.

/// Minimum-cost perfect assignment of rows to columns (Hungarian method with
/// potentials, `O(n^2 m)`). Requires `rows ≤ cols`; returns the column for
/// each row.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based arrays as in the classical formulation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// Maximum bipartite matching by augmenting paths. `adj[i]` lists the
/// columns row `i` may use. Returns the matched column of each row.
pub fn max_matching(adj: &[Vec<usize>], cols: usize) -> Vec<Option<usize>> {
    let mut col_owner: Vec<Option<usize>> = vec![None; cols];
    let mut row_match: Vec<Option<usize>> = vec![None; adj.len()];
    for r in 0..adj.len() {
        let mut seen = vec![false; cols];
        augment(r, adj, &mut seen, &mut col_owner, &mut row_match);
    }
    row_match
}

fn augment(
    r: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    col_owner: &mut [Option<usize>],
    row_match: &mut [Option<usize>],
) -> bool {
    for &c in &adj[r] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        let free = match col_owner[c] {
            None => true,
            Some(other) => augment(other, adj, seen, col_owner, row_match),
        };
        if free {
            col_owner[c] = Some(r);
            row_match[r] = Some(c);
            return true;
        }
    }
    false
}
