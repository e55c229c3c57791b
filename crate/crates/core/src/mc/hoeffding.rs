//! Hoeffding's D statistic of independence, with midranks for ties.

use super::StatsError;

/// Classical Hoeffding D, scaled so that `x = y` without ties gives 1.
pub fn hoeffding_d(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let n = x.len();
    if n != y.len() {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if n < 5 {
        return Err(StatsError::TooFewPoints { need: 5, got: n });
    }
    let r = midranks(x);
    let s = midranks(y);
    let q = bivariate_ranks(x, y);
    let (mut d1, mut d2, mut d3) = (0.0, 0.0, 0.0);
    for i in 0..n {
        d1 += (q[i] - 1.0) * (q[i] - 2.0);
        d2 += (r[i] - 1.0) * (r[i] - 2.0) * (s[i] - 1.0) * (s[i] - 2.0);
        d3 += (r[i] - 2.0) * (s[i] - 2.0) * (q[i] - 1.0);
    }
    let nf = n as f64;
    let num = (nf - 2.0) * (nf - 3.0) * d1 + d2 - 2.0 * (nf - 2.0) * d3;
    let den = nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0) * (nf - 4.0);
    Ok(30.0 * num / den)
}

/// 1-based ranks, ties sharing the average rank.
fn midranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * ((i + 1) + j) as f64;
        for &k in &idx[i..j] {
            out[k] = rank;
        }
        i = j;
    }
    out
}

/// `Q_i = 1 + #{x_j<x_i, y_j<y_i} + ½#{x_j=x_i, y_j<y_i} + ½#{x_j<x_i, y_j=y_i}
/// + ¼#{j≠i: x_j=x_i, y_j=y_i}` in `O(n log n)`.
fn bivariate_ranks(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    // Dense ranks of y for the Fenwick tree.
    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let ry: Vec<usize> = y.iter().map(|v| ys.partition_point(|u| u < v) + 1).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let mut tree = Fenwick::new(ys.len());
    let mut q = vec![0.0; n];
    let mut g = 0;
    while g < n {
        let mut end = g + 1;
        while end < n && x[order[end]] == x[order[g]] {
            end += 1;
        }
        // Inside the group points are sorted by y.
        let mut t = g;
        while t < end {
            let mut run = t + 1;
            while run < end && y[order[run]] == y[order[t]] {
                run += 1;
            }
            let same_x_below = (t - g) as f64;
            let same_both = (run - t - 1) as f64;
            for &i in &order[t..run] {
                let below = tree.prefix(ry[i] - 1) as f64;
                let level = tree.prefix(ry[i]) as f64 - below;
                q[i] = 1.0 + below + 0.5 * same_x_below + 0.5 * level + 0.25 * same_both;
            }
            t = run;
        }
        for &i in &order[g..end] {
            tree.add(ry[i]);
        }
        g = end;
    }
    q
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}
