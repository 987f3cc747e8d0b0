/// Minimum-cost assignment for a rectangular cost matrix (shortest
/// augmenting paths with potentials). Every row is assigned when
/// `rows <= cols`, every column otherwise. Returns `(row, col)` pairs sorted
/// by row. Among equal-cost optima the first found in row/column scan order wins.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows <= cols {
        solve(rows, cols, |i, j| cost[i][j])
    } else {
        let mut pairs: Vec<(usize, usize)> =
            solve(cols, rows, |i, j| cost[j][i]).into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        pairs
    }
}

pub fn assignment_cost(cost: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| cost[i][j]).sum()
}

fn solve(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    // 1-based; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
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
    let mut pairs: Vec<(usize, usize)> = (1..=m).filter(|&j| p[j] != 0).map(|j| (p[j] - 1, j - 1)).collect();
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(cost: &[Vec<f64>]) -> f64 {
        let (r, c) = (cost.len(), cost[0].len());
        let (small, large) = (r.min(c), r.max(c));
        let mut best = f64::INFINITY;
        let mut perm: Vec<usize> = (0..large).collect();
        permute(&mut perm, 0, small, &mut |p| {
            let s: f64 = (0..small).map(|k| if r <= c { cost[k][p[k]] } else { cost[p[k]][k] }).sum();
            best = best.min(s);
        });
        best
    }

    fn permute(p: &mut Vec<usize>, k: usize, depth: usize, f: &mut impl FnMut(&[usize])) {
        if k == depth {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, depth, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn small_cases() {
        let c = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(hungarian(&c), vec![(0, 0), (1, 1)]);
        let c = vec![vec![5.0, 2.0, 7.0]];
        assert_eq!(hungarian(&c), vec![(0, 1)]);
        assert_eq!(assignment_cost(&c, &hungarian(&c)), 2.0);
        assert!(hungarian(&[]).is_empty());
        let tall = vec![vec![3.0], vec![1.0], vec![2.0]];
        assert_eq!(hungarian(&tall), vec![(1, 0)]);
    }

    proptest! {
        #[test]
        fn matches_permutation_oracle(r in 1usize..7, c in 1usize..7, seed in proptest::collection::vec(-10.0f64..10.0, 49)) {
            let cost: Vec<Vec<f64>> = (0..r).map(|i| (0..c).map(|j| seed[i * 7 + j]).collect()).collect();
            let pairs = hungarian(&cost);
            prop_assert_eq!(pairs.len(), r.min(c));
            let rows: std::collections::HashSet<_> = pairs.iter().map(|p| p.0).collect();
            let cols: std::collections::HashSet<_> = pairs.iter().map(|p| p.1).collect();
            prop_assert_eq!(rows.len(), pairs.len());
            prop_assert_eq!(cols.len(), pairs.len());
            prop_assert!((assignment_cost(&cost, &pairs) - brute(&cost)).abs() < 1e-9);
        }
    }
}
