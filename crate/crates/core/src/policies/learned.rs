//! Learned active policy: pooled belief and scan features fed through a
//! small tanh MLP.

use crate::belief::{LocalBelief, CHANNELS};
use crate::simulator::{Action, LidarScan};
use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Policy network shape and action scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    /// Side of the local belief crop fed to the policy.
    pub local_size: usize,
    /// The crop is average-pooled to `pool × pool × 4`.
    pub pool: usize,
    /// The scan is min-pooled into this many sectors.
    pub sectors: usize,
    pub hidden: Vec<usize>,
    pub v_max: f64,
    pub w_max: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            local_size: 56,
            pool: 7,
            sectors: 12,
            hidden: vec![64, 64],
            v_max: 0.5,
            w_max: std::f64::consts::FRAC_PI_2,
        }
    }
}

pub const ROBOT_STATE_DIM: usize = 4;
pub const OUTPUT_DIM: usize = 2;

impl Architecture {
    pub fn input_dim(&self) -> usize {
        self.pool * self.pool * CHANNELS + self.sectors + ROBOT_STATE_DIM
    }

    fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(&self.hidden);
        s.push(OUTPUT_DIM);
        s
    }

    /// Number of weights and biases.
    pub fn param_dim(&self) -> usize {
        self.layer_sizes().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Flat parameter vector, layer by layer: row-major weights then biases.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams(pub Vec<f64>);

impl PolicyParams {
    pub fn zeros(arch: &Architecture) -> Self {
        Self(vec![0.0; arch.param_dim()])
    }
}

/// Proprioceptive part of the policy input.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RobotState {
    pub v_prev: f64,
    pub w_prev: f64,
    pub collided: bool,
    /// Remaining steps over horizon, in `[0, 1]`.
    pub steps_remaining: f64,
}

#[derive(Clone, Debug)]
pub struct PolicyInput<'a> {
    pub local_belief: &'a LocalBelief,
    pub scan: &'a LidarScan,
    pub robot_state: RobotState,
}

/// Feature vector: pooled belief (channel-minor) ++ sector minima scaled by
/// `max_range` ++ `(v/v_max, w/w_max, collided, steps_remaining)`.
pub fn features(arch: &Architecture, input: &PolicyInput<'_>) -> Vec<f64> {
    let mut f = input.local_belief.average_pool(arch.pool);
    let n = input.scan.n_beams();
    let mut sectors = vec![input.scan.max_range; arch.sectors];
    for (i, &r) in input.scan.ranges.iter().enumerate() {
        let s = (i * arch.sectors / n.max(1)).min(arch.sectors - 1);
        sectors[s] = sectors[s].min(r);
    }
    f.extend(sectors.iter().map(|r| r / input.scan.max_range));
    let rs = input.robot_state;
    f.push(rs.v_prev / arch.v_max);
    f.push(rs.w_prev / arch.w_max);
    f.push(if rs.collided { 1.0 } else { 0.0 });
    f.push(rs.steps_remaining.clamp(0.0, 1.0));
    f
}

/// Forward pass on a prepared feature vector.
pub fn forward(arch: &Architecture, params: &[f64], feats: &[f64]) -> Result<Action> {
    if params.len() != arch.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.param_dim(),
            actual: params.len(),
        });
    }
    if feats.len() != arch.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim(),
            actual: feats.len(),
        });
    }
    let sizes = arch.layer_sizes();
    let mut act = feats.to_vec();
    let mut off = 0;
    for w in sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &params[off..off + n_in * n_out];
        let bias = &params[off + n_in * n_out..off + n_in * n_out + n_out];
        off += n_in * n_out + n_out;
        act = (0..n_out)
            .map(|o| {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let z: f64 = row.iter().zip(&act).map(|(a, b)| a * b).sum::<f64>() + bias[o];
                z.tanh()
            })
            .collect();
    }
    Ok(Action::new(act[0] * arch.v_max, act[1] * arch.w_max))
}

/// Deterministic action of the learned policy. Outputs are bounded by the
/// tanh head, no clamping involved.
pub fn act_learned(arch: &Architecture, params: &PolicyParams, input: &PolicyInput<'_>) -> Result<Action> {
    forward(arch, &params.0, &features(arch, input))
}

const MAGIC: &str = "APFNPOLICY 1";

fn arch_line(arch: &Architecture) -> String {
    let hidden: Vec<String> = arch.hidden.iter().map(|h| h.to_string()).collect();
    format!(
        "local={} pool={} sectors={} hidden={} v_max={} w_max={} dim={}",
        arch.local_size,
        arch.pool,
        arch.sectors,
        hidden.join(","),
        arch.v_max,
        arch.w_max,
        arch.param_dim()
    )
}

/// Serializes a policy: magic line, architecture line, then the parameters
/// as little-endian f64.
pub fn write_policy<W: Write>(mut out: W, arch: &Architecture, params: &PolicyParams) -> Result<()> {
    if params.0.len() != arch.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.param_dim(),
            actual: params.0.len(),
        });
    }
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "{}", arch_line(arch))?;
    for p in &params.0 {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_policy<R: Read>(mut input: R) -> Result<(Architecture, PolicyParams)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let bad = |m: &str| Error::PolicyFormat(m.to_string());
    let mut lines = bytes.splitn(3, |&b| b == b'\n');
    let magic = lines.next().ok_or_else(|| bad("empty file"))?;
    if magic != MAGIC.as_bytes() {
        return Err(bad("missing APFNPOLICY 1 header"));
    }
    let header = std::str::from_utf8(lines.next().ok_or_else(|| bad("missing architecture line"))?)
        .map_err(|_| bad("architecture line is not UTF-8"))?;
    let body = lines.next().unwrap_or(&[]);

    let mut arch = Architecture::default();
    let mut dim = None;
    for kv in header.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed architecture entry"))?;
        let num = |v: &str| v.parse::<usize>().map_err(|_| bad(&format!("bad value for {k}")));
        let float = |v: &str| v.parse::<f64>().map_err(|_| bad(&format!("bad value for {k}")));
        match k {
            "local" => arch.local_size = num(v)?,
            "pool" => arch.pool = num(v)?,
            "sectors" => arch.sectors = num(v)?,
            "hidden" => {
                arch.hidden = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(num).collect::<Result<_>>()?
                }
            }
            "v_max" => arch.v_max = float(v)?,
            "w_max" => arch.w_max = float(v)?,
            "dim" => dim = Some(num(v)?),
            _ => return Err(bad(&format!("unknown architecture key `{k}`"))),
        }
    }
    let dim = dim.ok_or_else(|| bad("missing dim"))?;
    if dim != arch.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.param_dim(),
            actual: dim,
        });
    }
    if body.len() != dim * 8 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: body.len() / 8,
        });
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect::<Vec<_>>();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(bad("non-finite parameter"));
    }
    Ok((arch, PolicyParams(params)))
}

pub fn save_policy(path: impl AsRef<Path>, arch: &Architecture, params: &PolicyParams) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_policy(f, arch, params)
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<(Architecture, PolicyParams)> {
    read_policy(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{extract_local_belief, project_particles};
    use crate::pfilter::ParticleSet;
    use crate::worldmap::{CellCode, OccupancyGrid, Pose};
    use rand::{Rng, SeedableRng};

    fn belief() -> LocalBelief {
        let g = OccupancyGrid::filled(60, 60, 0.1, CellCode::Free);
        let ps = ParticleSet::uniform(vec![Pose::new(3.0, 3.0, 0.5), Pose::new(3.3, 2.9, 0.4)]);
        extract_local_belief(&project_particles(&ps, &g), &Pose::new(3.0, 3.0, 0.5), 56)
    }

    fn scan(rng: &mut impl Rng) -> LidarScan {
        LidarScan {
            fov: 240f64.to_radians(),
            max_range: 10.0,
            ranges: (0..60).map(|_| rng.random_range(0.1..10.0)).collect(),
        }
    }

    #[test]
    fn default_dimensions() {
        let a = Architecture::default();
        assert_eq!(a.input_dim(), 196 + 12 + 4);
        assert_eq!(a.param_dim(), 212 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
    }

    #[test]
    fn zero_params_give_zero_action() {
        let a = Architecture::default();
        let lb = belief();
        let mut rng = crate::rng::seeded(1);
        let s = scan(&mut rng);
        let input = PolicyInput {
            local_belief: &lb,
            scan: &s,
            robot_state: RobotState::default(),
        };
        assert_eq!(
            act_learned(&a, &PolicyParams::zeros(&a), &input).unwrap(),
            Action::new(0.0, 0.0)
        );
    }

    #[test]
    fn outputs_stay_in_bounds_and_are_deterministic() {
        let a = Architecture::default();
        let lb = belief();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for i in 0..10_000 {
            let scale = [0.01, 1.0, 100.0][i % 3];
            let p = PolicyParams((0..a.param_dim()).map(|_| rng.random_range(-scale..scale)).collect());
            let s = scan(&mut rng);
            let rs = RobotState {
                v_prev: rng.random_range(-0.5..0.5),
                w_prev: rng.random_range(-1.5..1.5),
                collided: rng.random(),
                steps_remaining: rng.random(),
            };
            let input = PolicyInput {
                local_belief: &lb,
                scan: &s,
                robot_state: rs,
            };
            let act = act_learned(&a, &p, &input).unwrap();
            assert!(act.v.abs() <= a.v_max && act.w.abs() <= a.w_max);
            if i % 500 == 0 {
                assert_eq!(act_learned(&a, &p, &input).unwrap(), act);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Architecture::default();
        let lb = belief();
        let mut rng = crate::rng::seeded(1);
        let s = scan(&mut rng);
        let input = PolicyInput {
            local_belief: &lb,
            scan: &s,
            robot_state: RobotState::default(),
        };
        assert!(matches!(
            act_learned(&a, &PolicyParams(vec![0.0; 10]), &input),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn policy_file_round_trip_and_validation() {
        let a = Architecture {
            hidden: vec![8, 4],
            ..Default::default()
        };
        let p = PolicyParams((0..a.param_dim()).map(|i| i as f64 * 0.25 - 3.0).collect());
        let mut buf = Vec::new();
        write_policy(&mut buf, &a, &p).unwrap();
        assert!(buf.starts_with(b"APFNPOLICY 1\nlocal=56 pool=7 sectors=12 hidden=8,4 "));
        let (a2, p2) = read_policy(&buf[..]).unwrap();
        assert_eq!((a2, p2), (a.clone(), p));
        let truncated = &buf[..buf.len() - 8];
        assert!(matches!(read_policy(truncated), Err(Error::DimensionMismatch { .. })));
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_policy(&wrong[..]).is_err());
    }
}
