//! Plain-text particle dump: a `# step N alpha A` header, then one
//! `x y phi log_weight` line per particle.

use super::{Particle, ParticleSet};
use crate::{Error, Pose, Result};
use std::fmt::Write as _;

pub fn write_dump(ps: &ParticleSet, step: usize, alpha: f64) -> String {
    let mut s = String::with_capacity(ps.len() * 64 + 32);
    let _ = writeln!(s, "# step {step} alpha {alpha}");
    for p in ps.particles() {
        let _ = writeln!(s, "{} {} {} {}", p.pose.x, p.pose.y, p.pose.phi, p.log_weight);
    }
    s
}

/// Parses a dump back into `(step, alpha, particles)`.
pub fn parse_dump(src: &str) -> Result<(usize, f64, ParticleSet)> {
    let bad = |line: usize, msg: &str| Error::InvalidArgument(format!("particle dump line {line}: {msg}"));
    let mut lines = src.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty dump"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (step, alpha) = match h.as_slice() {
        ["#", "step", n, "alpha", a] => (
            n.parse().map_err(|_| bad(1, "bad step"))?,
            a.parse().map_err(|_| bad(1, "bad alpha"))?,
        ),
        _ => return Err(bad(1, "expected `# step N alpha A`")),
    };
    let mut particles = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(i + 1, "non-numeric field"))?;
        if v.len() != 4 {
            return Err(bad(i + 1, "expected 4 fields"));
        }
        particles.push(Particle {
            pose: Pose::new(v[0], v[1], v[2]),
            log_weight: v[3],
        });
    }
    Ok((step, alpha, ParticleSet::from_particles_unnormalized(particles)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let ps = ParticleSet::uniform(vec![Pose::new(1.0, 2.0, 0.5), Pose::new(-0.25, 3.0, -1.0)]);
        let text = write_dump(&ps, 7, 0.5);
        assert!(text.starts_with("# step 7 alpha 0.5\n"));
        let (step, alpha, back) = parse_dump(&text).unwrap();
        assert_eq!((step, alpha), (7, 0.5));
        assert_eq!(back.particles(), ps.particles());
        assert!(parse_dump("# step x alpha 1\n").is_err());
    }
}
