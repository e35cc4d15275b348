//! Four-stage curriculum: reward weights, promotion thresholds and task sampling.

use super::{TaskError, TaskKind};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Reward weights (exec, valid, struct, sem, func) per stage.
pub const STAGE_WEIGHTS: [[f64; 5]; 4] = [
    [0.40, 0.30, 0.20, 0.10, 0.00],
    [0.15, 0.15, 0.35, 0.25, 0.10],
    [0.10, 0.10, 0.20, 0.20, 0.40],
    [0.05, 0.05, 0.15, 0.15, 0.60],
];

/// Validation TSR needed to leave stages 1 to 3. Stage 4 is terminal.
pub const PROMOTION_THRESHOLDS: [f64; 3] = [0.80, 0.70, 0.60];

/// Sampling probability of T1..T7 per stage.
pub const TASK_SAMPLING: [[f64; 7]; 4] = [
    [0.40, 0.40, 0.10, 0.10, 0.00, 0.00, 0.00],
    [0.10, 0.10, 0.30, 0.30, 0.10, 0.10, 0.00],
    [0.05, 0.05, 0.10, 0.15, 0.30, 0.25, 0.10],
    [0.05, 0.05, 0.05, 0.10, 0.15, 0.15, 0.45],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumState {
    stage: u8,
}

impl Default for CurriculumState {
    fn default() -> Self {
        CurriculumState { stage: 1 }
    }
}

impl CurriculumState {
    pub fn new(stage: u8) -> Result<CurriculumState, TaskError> {
        if !(1..=4).contains(&stage) {
            return Err(TaskError::Curriculum(format!("stage {stage} outside 1..=4")));
        }
        Ok(CurriculumState { stage })
    }

    pub fn stage(&self) -> u8 {
        self.stage
    }

    pub fn weights(&self) -> [f64; 5] {
        STAGE_WEIGHTS[self.stage as usize - 1]
    }

    pub fn promotion_threshold(&self) -> Option<f64> {
        PROMOTION_THRESHOLDS.get(self.stage as usize - 1).copied()
    }

    pub fn task_distribution(&self) -> Vec<(TaskKind, f64)> {
        TaskKind::TRAINING.iter().copied().zip(TASK_SAMPLING[self.stage as usize - 1]).collect()
    }
}

pub fn sample_task_type(state: &CurriculumState, rng: &mut SplitMix64) -> TaskKind {
    let row = &TASK_SAMPLING[state.stage as usize - 1];
    TaskKind::TRAINING[rng.weighted(row)]
}

/// Advances one stage when the validation TSR reaches the threshold.
pub fn curriculum_step(state: &CurriculumState, validation_tsr: f64) -> Result<CurriculumState, TaskError> {
    if !(0.0..=1.0).contains(&validation_tsr) {
        return Err(TaskError::Curriculum(format!("tsr {validation_tsr} outside [0, 1]")));
    }
    Ok(match state.promotion_threshold() {
        Some(t) if validation_tsr >= t => CurriculumState { stage: state.stage + 1 },
        _ => *state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_distributions() {
        for row in STAGE_WEIGHTS {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for row in TASK_SAMPLING {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn promotion_examples() {
        let s1 = CurriculumState::new(1).unwrap();
        assert_eq!(curriculum_step(&s1, 0.82).unwrap().stage(), 2);
        let s3 = CurriculumState::new(3).unwrap();
        assert_eq!(curriculum_step(&s3, 0.59).unwrap().stage(), 3);
        assert_eq!(curriculum_step(&s3, 0.60).unwrap().stage(), 4);
        let s4 = CurriculumState::new(4).unwrap();
        assert_eq!(curriculum_step(&s4, 1.0).unwrap().stage(), 4);
        assert!(curriculum_step(&s1, 1.5).is_err());
        assert!(CurriculumState::new(0).is_err());
    }

    #[test]
    fn stage_one_never_samples_design() {
        let s = CurriculumState::new(1).unwrap();
        let mut rng = SplitMix64::new(11);
        assert!((0..10_000).all(|_| sample_task_type(&s, &mut rng) != TaskKind::T7));
    }
}
