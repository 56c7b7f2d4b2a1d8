//! Anderson mixing for the outer fixed-point loop.

use std::collections::VecDeque;

/// Keeps the last `depth + 1` (iterate, image) pairs of a fixed-point map
/// `x -> g(x)` and proposes the next iterate as the image combination that
/// minimises the weighted linearised residual.
#[derive(Debug, Clone)]
pub(crate) struct Anderson {
    depth: usize,
    iterates: VecDeque<Vec<f64>>,
    images: VecDeque<Vec<f64>>,
}

impl Anderson {
    pub(crate) fn new(depth: usize) -> Self {
        Self {
            depth,
            iterates: VecDeque::new(),
            images: VecDeque::new(),
        }
    }

    pub(crate) fn reset(&mut self) {
        self.iterates.clear();
        self.images.clear();
    }

    /// Records `g = G(x)` and returns the next iterate. `weights` scales
    /// each entry of the residual `g - x` in the least-squares fit.
    pub(crate) fn next(&mut self, x: &[f64], g: &[f64], weights: &[f64]) -> Vec<f64> {
        if self.depth == 0 {
            return g.to_vec();
        }
        self.iterates.push_back(x.to_vec());
        self.images.push_back(g.to_vec());
        while self.iterates.len() > self.depth + 1 {
            self.iterates.pop_front();
            self.images.pop_front();
        }
        loop {
            let m = self.iterates.len() - 1;
            if m == 0 {
                return g.to_vec();
            }
            match self.solve(weights) {
                Some(gamma) => {
                    let mut next = g.to_vec();
                    for (c, gam) in gamma.iter().enumerate() {
                        let (a, b) = (&self.images[c], &self.images[c + 1]);
                        for i in 0..next.len() {
                            next[i] -= gam * (b[i] - a[i]);
                        }
                    }
                    return next;
                }
                None => {
                    // ill-conditioned history: forget the oldest pair
                    self.iterates.pop_front();
                    self.images.pop_front();
                }
            }
        }
    }

    /// Least squares `min |W (r_last - dR gamma)|` by modified Gram-Schmidt.
    /// Returns `None` when the difference columns are numerically dependent.
    fn solve(&self, weights: &[f64]) -> Option<Vec<f64>> {
        let m = self.iterates.len() - 1;
        let n = weights.len();
        let residual = |i: usize| -> Vec<f64> {
            (0..n)
                .map(|e| weights[e] * (self.images[i][e] - self.iterates[i][e]))
                .collect()
        };
        let rs: Vec<Vec<f64>> = (0..=m).map(residual).collect();
        let mut q: Vec<Vec<f64>> = (0..m)
            .map(|c| rs[c + 1].iter().zip(&rs[c]).map(|(b, a)| b - a).collect())
            .collect();
        let mut r = vec![vec![0.0; m]; m];
        for c in 0..m {
            let col_norm = dot(&q[c], &q[c]).sqrt();
            for p in 0..c {
                let proj = dot(&q[p], &q[c]);
                r[p][c] = proj;
                let (head, tail) = q.split_at_mut(c);
                for (t, h) in tail[0].iter_mut().zip(&head[p]) {
                    *t -= proj * h;
                }
            }
            let nrm = dot(&q[c], &q[c]).sqrt();
            if !(nrm > 1e-10 * col_norm) || nrm == 0.0 {
                return None;
            }
            r[c][c] = nrm;
            q[c].iter_mut().for_each(|v| *v /= nrm);
        }
        let rhs: Vec<f64> = (0..m).map(|c| dot(&q[c], &rs[m])).collect();
        let mut gamma = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for j in i + 1..m {
                s -= r[i][j] * gamma[j];
            }
            gamma[i] = s / r[i][i];
        }
        gamma.iter().all(|v| v.is_finite()).then_some(gamma)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
