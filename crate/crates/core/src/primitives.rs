//! The fixed motion-primitive dictionary.

use crate::dynamics::Action;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrimitiveError {
    #[error("dictionary size K must be >= 1 and odd, got {0}")]
    InvalidSize(usize),
    #[error("horizon H must be >= 1, got {0}")]
    InvalidHorizon(usize),
    #[error("steer_max must be finite and > 0, got {0}")]
    InvalidSteerMax(f64),
}

/// An H-step action sequence with its position in the dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPrimitive {
    index: usize,
    actions: Vec<Action>,
}

impl MotionPrimitive {
    pub fn new(index: usize, actions: Vec<Action>) -> Self {
        Self { index, actions }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn first_action(&self) -> Option<Action> {
        self.actions.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveDictionary {
    primitives: Vec<MotionPrimitive>,
    horizon: usize,
}

impl PrimitiveDictionary {
    /// Constant-steering arcs evenly spaced over `[-steer_max, steer_max]`,
    /// ascending. `k` must be odd so the straight arc is included.
    pub fn constant_arcs(k: usize, horizon: usize, steer_max: f64) -> Result<Self, PrimitiveError> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(PrimitiveError::InvalidSize(k));
        }
        if horizon == 0 {
            return Err(PrimitiveError::InvalidHorizon(horizon));
        }
        if !(steer_max.is_finite() && steer_max > 0.0) {
            return Err(PrimitiveError::InvalidSteerMax(steer_max));
        }
        let primitives = (0..k)
            .map(|i| {
                let steering = if k == 1 {
                    0.0
                } else {
                    steer_max * (2.0 * i as f64 / (k - 1) as f64 - 1.0)
                };
                MotionPrimitive::new(i, vec![Action::new(steering); horizon])
            })
            .collect();
        Ok(Self {
            primitives,
            horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, index: usize) -> Option<&MotionPrimitive> {
        self.primitives.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MotionPrimitive> {
        self.primitives.iter()
    }

    /// `n` i.i.d. indices from Uniform{0..K-1}.
    pub fn uniform_sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        uniform_indices(self.len(), n, rng)
    }
}

impl std::ops::Index<usize> for PrimitiveDictionary {
    type Output = MotionPrimitive;
    fn index(&self, i: usize) -> &MotionPrimitive {
        &self.primitives[i]
    }
}

pub(crate) fn uniform_indices<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn steerings(d: &PrimitiveDictionary) -> Vec<f64> {
        d.iter().map(|p| p.actions()[0].steering).collect()
    }

    #[test]
    fn three_arcs() {
        let d = PrimitiveDictionary::constant_arcs(3, 4, 0.5).unwrap();
        assert_eq!(steerings(&d), vec![-0.5, 0.0, 0.5]);
        assert!(d.iter().all(|p| p.actions().len() == 4));
    }

    #[test]
    fn single_straight_arc() {
        let d = PrimitiveDictionary::constant_arcs(1, 2, 0.5).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].actions(), &[Action::new(0.0); 2]);
    }

    #[test]
    fn twenty_one_arcs() {
        let d = PrimitiveDictionary::constant_arcs(21, 5, 0.4).unwrap();
        let s = steerings(&d);
        assert_eq!(s[10], 0.0);
        for w in s.windows(2) {
            assert!((w[1] - w[0] - 0.04).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_symmetry_and_distinctness() {
        let d = PrimitiveDictionary::constant_arcs(9, 3, 0.3).unwrap();
        let s = steerings(&d);
        for i in 0..9 {
            assert_eq!(s[i], -s[8 - i]);
            assert_eq!(d[i].index(), i);
        }
        for i in 1..9 {
            assert!(s[i] > s[i - 1]);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert_eq!(
            PrimitiveDictionary::constant_arcs(4, 3, 0.3),
            Err(PrimitiveError::InvalidSize(4))
        );
        assert_eq!(
            PrimitiveDictionary::constant_arcs(0, 3, 0.3),
            Err(PrimitiveError::InvalidSize(0))
        );
        assert_eq!(
            PrimitiveDictionary::constant_arcs(3, 0, 0.3),
            Err(PrimitiveError::InvalidHorizon(0))
        );
        assert!(PrimitiveDictionary::constant_arcs(3, 2, -1.0).is_err());
    }

    #[test]
    fn uniform_sample_single() {
        let d = PrimitiveDictionary::constant_arcs(1, 1, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(d.uniform_sample(5, &mut rng), vec![0; 5]);
    }

    #[test]
    fn uniform_sample_is_reproducible() {
        let d = PrimitiveDictionary::constant_arcs(7, 1, 0.3).unwrap();
        let a = d.uniform_sample(100, &mut ChaCha8Rng::seed_from_u64(9));
        let b = d.uniform_sample(100, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
