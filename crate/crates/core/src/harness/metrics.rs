use super::episode::EpisodeResult;
use crate::{Error, Result};

/// Aggregate localization accuracy over a batch of episodes.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub n_episodes: usize,
    /// `100·sqrt(mean(final position error²))`.
    pub rmse_position_cm: f64,
    /// `sqrt(mean(wrapped final heading error²))`.
    pub rmse_orientation_rad: f64,
    pub mean_reward: f64,
    pub collisions: usize,
}

/// Root mean square of final errors; an empty batch is an error.
pub fn aggregate(results: &[EpisodeResult]) -> Result<MetricsReport> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate zero episodes".into()));
    }
    let n = results.len() as f64;
    let pos: Vec<f64> = results.iter().map(|r| r.final_position_error).collect();
    let ang: Vec<f64> = results.iter().map(|r| r.final_orientation_error).collect();
    Ok(MetricsReport {
        n_episodes: results.len(),
        rmse_position_cm: 100.0 * rms(&pos),
        rmse_orientation_rad: rms(&ang),
        mean_reward: results.iter().map(|r| r.mean_reward()).sum::<f64>() / n,
        collisions: results.iter().map(|r| r.collisions()).sum(),
    })
}

pub fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{StepRecord, TaskKind};
    use crate::simulator::Action;
    use crate::{angle, Pose};

    fn result(truth: Pose, est: Pose) -> EpisodeResult {
        EpisodeResult {
            policy: "idle".into(),
            task: TaskKind::Tracking,
            map_id: "m".into(),
            seed: 0,
            start: truth,
            steps: vec![StepRecord {
                true_pose: truth,
                est_pose: est,
                action: Action::default(),
                loss: 0.0,
                reward: 0.0,
                collided: false,
            }],
            final_position_error: est.distance(&truth),
            final_orientation_error: angle::diff(est.phi, truth.phi).abs(),
        }
    }

    #[test]
    fn single_episode_in_centimeters() {
        let r = result(Pose::new(0.0, 0.0, 0.0), Pose::new(0.2, 0.0, 0.0));
        assert!((aggregate(&[r]).unwrap().rmse_position_cm - 20.0).abs() < 1e-9);
    }

    #[test]
    fn two_episode_rms() {
        let a = result(Pose::new(0.0, 0.0, 0.0), Pose::new(0.3, 0.0, 0.0));
        let b = result(Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.4, 0.0));
        let m = aggregate(&[a, b]).unwrap();
        assert!((m.rmse_position_cm - 100.0 * ((0.09f64 + 0.16) / 2.0).sqrt()).abs() < 1e-9);
        assert!((m.rmse_position_cm - 35.36).abs() < 0.01);
        assert_eq!(m.n_episodes, 2);
    }

    #[test]
    fn headings_wrap_at_the_boundary() {
        let a = result(Pose::new(0.0, 0.0, -3.1), Pose::new(0.0, 0.0, 3.1));
        let b = result(Pose::new(0.0, 0.0, 3.1), Pose::new(0.0, 0.0, -3.1));
        let m = aggregate(&[a, b]).unwrap();
        let wrapped = std::f64::consts::TAU - 6.2;
        assert!(
            (m.rmse_orientation_rad - wrapped).abs() < 1e-9,
            "{}",
            m.rmse_orientation_rad
        );
    }

    #[test]
    fn empty_batch_is_rejected() {
        assert!(aggregate(&[]).is_err());
    }
}
