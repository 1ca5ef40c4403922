//! Constraint-state augmentation of the MDP state.

use crate::automata::StateId;

use super::ConstraintError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    OneHot,
    ProductIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AugmentedState {
    /// MDP state kept as is, recognizer state as a one-hot vector of length |Q|.
    OneHot { mdp_state: usize, one_hot: Vec<u8> },
    /// `mdp_state * |Q| + q`, a single index into the product space.
    ProductIndex { index: usize },
}

pub fn augment(
    s_index: usize,
    q: StateId,
    mode: Encoding,
    num_states: usize,
) -> Result<AugmentedState, ConstraintError> {
    if q >= num_states {
        return Err(ConstraintError::Index(format!(
            "recognizer state {q} out of range 0..{num_states}"
        )));
    }
    Ok(match mode {
        Encoding::OneHot => {
            let mut one_hot = vec![0; num_states];
            one_hot[q] = 1;
            AugmentedState::OneHot {
                mdp_state: s_index,
                one_hot,
            }
        }
        Encoding::ProductIndex => AugmentedState::ProductIndex {
            index: s_index
                .checked_mul(num_states)
                .and_then(|v| v.checked_add(q))
                .ok_or_else(|| ConstraintError::Index("product index overflows".into()))?,
        },
    })
}

/// Mixed-radix product index over several recognizers:
/// `((s * |Q_1| + q_1) * |Q_2| + q_2) ...`.
pub fn product_index(s_index: usize, qs: &[StateId], sizes: &[usize]) -> usize {
    debug_assert_eq!(qs.len(), sizes.len());
    qs.iter()
        .zip(sizes)
        .fold(s_index, |acc, (&q, &n)| acc * n + q)
}

/// Width of the learned embedding for a one-hot recognizer state:
/// ⌊log₂ |Q|⌋.
pub fn embedding_dim(num_states: usize) -> Result<usize, ConstraintError> {
    if num_states < 2 {
        return Err(ConstraintError::Domain(format!(
            "embedding needs at least 2 recognizer states, got {num_states}"
        )));
    }
    Ok(num_states.ilog2() as usize)
}
