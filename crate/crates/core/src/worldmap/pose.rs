use crate::angle;

/// Planar robot pose. `phi` is kept in `[-π, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: angle::normalize(phi),
        }
    }

    /// Composes a motion `(dx, dy, dphi)` expressed in this pose's frame.
    pub fn compose(&self, dx: f64, dy: f64, dphi: f64) -> Pose {
        let (s, c) = self.phi.sin_cos();
        Pose::new(self.x + c * dx - s * dy, self.y + s * dx + c * dy, self.phi + dphi)
    }

    /// Expresses `other` in this pose's frame: the inverse of [`Pose::compose`].
    pub fn relative(&self, other: &Pose) -> (f64, f64, f64) {
        let (s, c) = self.phi.sin_cos();
        let (ex, ey) = (other.x - self.x, other.y - self.y);
        (c * ex + s * ey, -s * ex + c * ey, angle::diff(other.phi, self.phi))
    }

    /// Maps a point given in this pose's frame into the parent frame.
    pub fn transform_point(&self, u: f64, v: f64) -> (f64, f64) {
        let (s, c) = self.phi.sin_cos();
        (self.x + c * u - s * v, self.y + s * u + c * v)
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn compose_in_rotated_frame() {
        let p = Pose::new(0.0, 0.0, FRAC_PI_2).compose(1.0, 0.0, 0.0);
        assert!(p.x.abs() < 1e-12);
        assert!((p.y - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn relative_inverts_compose(
            x in -10.0f64..10.0, y in -10.0f64..10.0, phi in -3.14f64..3.14,
            dx in -2.0f64..2.0, dy in -2.0f64..2.0, dphi in -3.0f64..3.0,
        ) {
            let a = Pose::new(x, y, phi);
            let b = a.compose(dx, dy, dphi);
            let (rx, ry, rphi) = a.relative(&b);
            prop_assert!((rx - dx).abs() < 1e-9);
            prop_assert!((ry - dy).abs() < 1e-9);
            prop_assert!(angle::diff(rphi, dphi).abs() < 1e-9);
        }
    }
}
