use crate::simulator::{Action, LidarScan};

/// Range below which the Avoid policy reacts.
pub const AVOID_THRESHOLD: f64 = 0.5;

/// Turns in place at full angular speed.
pub fn act_turn(w_max: f64) -> Action {
    Action::new(0.0, w_max)
}

/// Minimum range of each of four equal angular quarters, ordered from the
/// rightmost (most negative beam angle) to the leftmost.
pub fn quarter_minima(scan: &LidarScan) -> [f64; 4] {
    let n = scan.n_beams();
    let mut mins = [f64::INFINITY; 4];
    for (i, &r) in scan.ranges.iter().enumerate() {
        let q = (i * 4 / n.max(1)).min(3);
        mins[q] = mins[q].min(r);
    }
    mins
}

/// Drives forward until something is closer than `threshold`; backs up when
/// the closest reading lies in one of the two central quarters, otherwise
/// turns in place away from the side it is on.
pub fn act_avoid(scan: &LidarScan, threshold: f64, v_max: f64, w_max: f64) -> Action {
    let mins = quarter_minima(scan);
    let (closest, dist) = mins.iter().enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, &d)| if d < best.1 { (i, d) } else { best },
    );
    if dist > threshold {
        return Action::new(v_max, 0.0);
    }
    match closest {
        1 | 2 => Action::new(-v_max / 2.0, 0.0),
        // obstacle on the left: turn right
        3 => Action::new(0.0, -w_max),
        _ => Action::new(0.0, w_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const VM: f64 = 0.5;
    const WM: f64 = std::f64::consts::FRAC_PI_2;

    fn scan_with(n: usize, idx: usize, r: f64) -> LidarScan {
        let mut ranges = vec![10.0; n];
        ranges[idx] = r;
        LidarScan {
            fov: 240f64.to_radians(),
            max_range: 10.0,
            ranges,
        }
    }

    #[test]
    fn turn_is_constant() {
        assert_eq!(act_turn(WM), Action::new(0.0, WM));
        assert_eq!(act_turn(WM), act_turn(WM));
    }

    #[test]
    fn avoid_rules() {
        let open = LidarScan {
            fov: 4.0,
            max_range: 10.0,
            ranges: vec![10.0; 60],
        };
        assert_eq!(act_avoid(&open, AVOID_THRESHOLD, VM, WM), Action::new(VM, 0.0));
        // leftmost quarter is the highest beam indices
        assert_eq!(
            act_avoid(&scan_with(60, 55, 0.3), AVOID_THRESHOLD, VM, WM),
            Action::new(0.0, -WM)
        );
        assert_eq!(
            act_avoid(&scan_with(60, 2, 0.3), AVOID_THRESHOLD, VM, WM),
            Action::new(0.0, WM)
        );
        assert_eq!(
            act_avoid(&scan_with(60, 20, 0.3), AVOID_THRESHOLD, VM, WM),
            Action::new(-VM / 2.0, 0.0)
        );
        assert_eq!(
            act_avoid(&scan_with(60, 35, 0.3), AVOID_THRESHOLD, VM, WM),
            Action::new(-VM / 2.0, 0.0)
        );
    }

    proptest! {
        #[test]
        fn avoid_depends_only_on_quarter_minima(
            ranges in proptest::collection::vec(0.05f64..10.0, 8..120),
            bumps in proptest::collection::vec(0.0f64..5.0, 120),
        ) {
            let scan = LidarScan { fov: 4.0, max_range: 10.0, ranges: ranges.clone() };
            let mins = quarter_minima(&scan);
            let n = ranges.len();
            // raise every non-minimal reading; quarter minima stay put
            let perturbed: Vec<f64> = ranges
                .iter()
                .enumerate()
                .map(|(i, &r)| if r == mins[(i * 4 / n).min(3)] { r } else { r + bumps[i] })
                .collect();
            let other = LidarScan { ranges: perturbed, ..scan.clone() };
            prop_assert_eq!(quarter_minima(&other), mins);
            prop_assert_eq!(act_avoid(&other, AVOID_THRESHOLD, VM, WM), act_avoid(&scan, AVOID_THRESHOLD, VM, WM));
        }
    }
}
