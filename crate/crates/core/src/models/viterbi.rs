//! Exact max-score decoding for first-order chains.

/// Scores of a linear chain over `n` positions and `l` labels.
///
/// `emissions[i][y]` is the score of label `y` at position `i`;
/// `transitions[a * l + b]` scores `a -> b`; `start` and `stop` score the
/// first and last labels.
#[derive(Debug, Clone, Copy)]
pub struct ChainScores<'a> {
    pub emissions: &'a [Vec<f64>],
    pub transitions: &'a [f64],
    pub start: &'a [f64],
    pub stop: &'a [f64],
}

impl ChainScores<'_> {
    pub fn num_labels(&self) -> usize {
        self.start.len()
    }

    /// Total score of a label path.
    pub fn path_score(&self, path: &[usize]) -> f64 {
        let l = self.num_labels();
        let Some((&first, _)) = path.split_first() else {
            return 0.0;
        };
        let mut score = self.start[first] + self.emissions[0][first];
        for i in 1..path.len() {
            score += self.transitions[path[i - 1] * l + path[i]] + self.emissions[i][path[i]];
        }
        score + self.stop[path[path.len() - 1]]
    }
}

/// Returns the highest-scoring path and its score. Ties are broken towards
/// the lowest label index, both at each back-pointer and at the final step.
#[allow(clippy::needless_range_loop)]
pub fn viterbi(chain: &ChainScores<'_>) -> (Vec<usize>, f64) {
    let n = chain.emissions.len();
    let l = chain.num_labels();
    if n == 0 || l == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta: Vec<f64> = (0..l).map(|y| chain.start[y] + chain.emissions[0][y]).collect();
    let mut back = vec![vec![0usize; l]; n];
    let mut next = vec![0.0; l];
    for i in 1..n {
        for y in 0..l {
            let mut best = 0;
            let mut best_score = delta[0] + chain.transitions[y];
            for prev in 1..l {
                let s = delta[prev] + chain.transitions[prev * l + y];
                if s > best_score {
                    best = prev;
                    best_score = s;
                }
            }
            back[i][y] = best;
            next[y] = best_score + chain.emissions[i][y];
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut last = 0;
    let mut best_score = delta[0] + chain.stop[0];
    for y in 1..l {
        let s = delta[y] + chain.stop[y];
        if s > best_score {
            last = y;
            best_score = s;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i][path[i]];
    }
    (path, best_score)
}
