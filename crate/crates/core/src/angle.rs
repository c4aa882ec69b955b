use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[-π, π)`.
#[inline]
pub fn normalize(a: f64) -> f64 {
    if (-PI..PI).contains(&a) {
        return a;
    }
    let r = (a + PI).rem_euclid(TAU) - PI;
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Signed shortest difference `a - b`, wrapped into `[-π, π)`.
#[inline]
pub fn diff(a: f64, b: f64) -> f64 {
    normalize(a - b)
}

/// Weighted circular mean `atan2(Σ w sin φ, Σ w cos φ)`.
///
/// Returns `None` when both sums are below `1e-12` in magnitude.
pub fn circular_mean<I>(samples: I) -> Option<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let (mut s, mut c) = (0.0, 0.0);
    for (w, phi) in samples {
        s += w * phi.sin();
        c += w * phi.cos();
    }
    if s.abs() < 1e-12 && c.abs() < 1e-12 {
        None
    } else {
        Some(normalize(s.atan2(c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundary_values() {
        assert_eq!(normalize(PI), -PI);
        assert_eq!(normalize(-PI), -PI);
        assert_eq!(normalize(0.0), 0.0);
        assert!((normalize(3.0 * PI) + PI).abs() < 1e-12);
        assert!((diff(3.1, -3.1) - (6.2 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn circular_mean_of_antipodal_pair_is_undefined() {
        assert!(circular_mean([(0.5, 0.0), (0.5, PI)]).is_none());
        let m = circular_mean([(0.5, 3.0), (0.5, -3.0)]).unwrap();
        assert!((m.abs() - PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalize_lands_in_half_open_range(a in -1e4f64..1e4) {
            let n = normalize(a);
            prop_assert!((-PI..PI).contains(&n));
            prop_assert!(((a - n) / TAU - ((a - n) / TAU).round()).abs() < 1e-9);
        }
    }
}
