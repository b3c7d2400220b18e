use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, input, Result};

/// Integer state `(value, size)` observed by an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub value: i64,
    pub size: i64,
}

/// Dense action-value table over `value_range × size_range` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub value_range: (i64, i64),
    pub size_range: (i64, i64),
    pub n_actions: usize,
    /// Row-major `[value][size][action]`.
    pub q: Vec<f64>,
}

impl QTable {
    pub fn new(value_range: (i64, i64), size_range: (i64, i64), n_actions: usize, init: f64) -> Result<Self> {
        if value_range.0 > value_range.1 || size_range.0 > size_range.1 {
            return Err(config("empty state range"));
        }
        if n_actions == 0 {
            return Err(config("action grid is empty"));
        }
        let states = (value_range.1 - value_range.0 + 1) as usize * (size_range.1 - size_range.0 + 1) as usize;
        Ok(QTable { value_range, size_range, n_actions, q: vec![init; states * n_actions] })
    }

    pub fn n_states(&self) -> usize {
        self.q.len() / self.n_actions
    }

    pub fn contains(&self, s: State) -> bool {
        (self.value_range.0..=self.value_range.1).contains(&s.value)
            && (self.size_range.0..=self.size_range.1).contains(&s.size)
    }

    fn offset(&self, s: State) -> Result<usize> {
        if !self.contains(s) {
            return Err(input(format!("state ({}, {}) outside the table", s.value, s.size)));
        }
        let sizes = (self.size_range.1 - self.size_range.0 + 1) as usize;
        let row = (s.value - self.value_range.0) as usize * sizes + (s.size - self.size_range.0) as usize;
        Ok(row * self.n_actions)
    }

    pub fn row(&self, s: State) -> Result<&[f64]> {
        let o = self.offset(s)?;
        Ok(&self.q[o..o + self.n_actions])
    }

    pub fn row_mut(&mut self, s: State) -> Result<&mut [f64]> {
        let o = self.offset(s)?;
        let n = self.n_actions;
        Ok(&mut self.q[o..o + n])
    }

    pub fn get(&self, s: State, action: usize) -> Result<f64> {
        self.row(s)?.get(action).copied().ok_or_else(|| input(format!("action {action} out of range")))
    }

    /// Indices of the maximal entries of a state's row.
    pub fn argmax_set(&self, s: State) -> Result<Vec<usize>> {
        let row = self.row(s)?;
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(row.iter().enumerate().filter(|(_, &q)| q == best).map(|(i, _)| i).collect())
    }
}

/// ε-greedy choice: a uniform action with probability `epsilon`, otherwise a
/// uniform pick among the maximisers of the state's row.
pub fn select_action<R: Rng + ?Sized>(table: &QTable, state: State, epsilon: f64, rng: &mut R) -> Result<usize> {
    let row = table.row(state)?;
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..row.len()));
    }
    let best = table.argmax_set(state)?;
    Ok(best[rng.gen_range(0..best.len())])
}

/// Single-step update without discounting: `Q <- (1 - α) Q + α r`.
pub fn q_update(table: &mut QTable, state: State, action: usize, reward: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(config(format!("learning rate {alpha} outside [0, 1]")));
    }
    let cell = table.row_mut(state)?.get_mut(action).ok_or_else(|| input(format!("action {action} out of range")))?;
    // The α = 1 branch keeps `Q = r` exact.
    *cell = if alpha == 1.0 { reward } else { (1.0 - alpha) * *cell + alpha * reward };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table() -> QTable {
        QTable::new((1, 10), (4, 10), 21, 0.0).unwrap()
    }

    const S: State = State { value: 3, size: 5 };

    #[test]
    fn covers_exact_state_space() {
        let t = table();
        assert_eq!(t.n_states(), 70);
        assert!(t.row(State { value: 10, size: 10 }).is_ok());
        assert!(t.row(State { value: 0, size: 5 }).is_err());
        assert!(t.row(State { value: 3, size: 11 }).is_err());
    }

    #[test]
    fn update_formula() {
        let mut t = table();
        q_update(&mut t, S, 4, 5.0, 0.1).unwrap();
        assert_eq!(t.get(S, 4).unwrap(), 0.5);
        q_update(&mut t, S, 4, 3.25, 1.0).unwrap();
        assert_eq!(t.get(S, 4).unwrap(), 3.25);
        assert_eq!(t.q.iter().filter(|&&q| q != 0.0).count(), 1);
        assert!(q_update(&mut t, S, 4, 1.0, 1.5).is_err());
        assert!(q_update(&mut t, S, 21, 1.0, 0.5).is_err());
    }

    #[test]
    fn geometric_convergence() {
        let mut t = table();
        let (alpha, r) = (0.2, -1.0);
        for step in 1..=30 {
            q_update(&mut t, S, 0, r, alpha).unwrap();
            let expect = (1.0f64 - alpha).powi(step) * (0.0 - r);
            assert!(((t.get(S, 0).unwrap() - r).abs() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_unique_maximiser() {
        let mut t = table();
        t.row_mut(S).unwrap()[7] = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(select_action(&t, S, 0.0, &mut rng).unwrap(), 7);
        }
    }

    #[test]
    fn greedy_ties_split_evenly() {
        let mut t = table();
        t.row_mut(S).unwrap()[3] = 1.0;
        t.row_mut(S).unwrap()[9] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let threes = (0..n).filter(|_| select_action(&t, S, 0.0, &mut rng).unwrap() == 3).count();
        // Binomial(n, 1/2): 4 sd is about 283.
        assert!((threes as i64 - n as i64 / 2).abs() < 300, "{threes}");
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut t = table();
        t.row_mut(S).unwrap()[0] = 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 42_000;
        let mut counts = [0usize; 21];
        for _ in 0..n {
            counts[select_action(&t, S, 1.0, &mut rng).unwrap()] += 1;
        }
        // Chi-square with 20 degrees of freedom; 0.999 quantile is 45.3.
        let e = n as f64 / 21.0;
        let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi < 45.3, "chi2 = {chi}");
    }
}
