//! Eight actigraphy features of one window of tri-axial samples (units g).

use super::stats::{mean, percentile_sorted, sorted, std_dev};
use crate::ingest::StreamSlice;

pub const ACTI_NAMES: [&str; 8] = [
    "meanVM",
    "stdVM",
    "minVM",
    "maxVM",
    "medianVM",
    "meanAbsJerk",
    "SMA",
    "activeFraction",
];

/// |VM - 1 g| above this counts as active.
pub const ACTIVE_THRESHOLD_G: f64 = 0.05;

pub fn acti8(samples: &StreamSlice<'_>) -> [f64; 8] {
    let n = samples.len();
    if n == 0 || samples.width != 3 {
        return [f64::NAN; 8];
    }
    let mut vm = Vec::with_capacity(n);
    let mut sma = 0.0;
    for i in 0..n {
        let s = samples.sample(i);
        vm.push((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt());
        sma += s[0].abs() + s[1].abs() + s[2].abs();
    }
    let sv = sorted(&vm);
    let jerk = if n < 2 {
        f64::NAN
    } else {
        let total: f64 = (1..n)
            .map(|i| {
                let dt = (samples.timestamps[i] - samples.timestamps[i - 1]) as f64 / 1000.0;
                (vm[i] - vm[i - 1]).abs() / dt
            })
            .sum();
        total / (n - 1) as f64
    };
    let active = vm
        .iter()
        .filter(|v| (*v - 1.0).abs() > ACTIVE_THRESHOLD_G)
        .count();
    [
        mean(&vm),
        if sv[0] == sv[n - 1] {
            0.0
        } else {
            std_dev(&vm)
        },
        sv[0],
        sv[n - 1],
        percentile_sorted(&sv, 50.0),
        jerk,
        sma / n as f64,
        active as f64 / n as f64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice<'a>(ts: &'a [i64], vals: &'a [f64]) -> StreamSlice<'a> {
        StreamSlice {
            timestamps: ts,
            values: vals,
            width: 3,
        }
    }

    #[test]
    fn resting_upright() {
        let ts: Vec<i64> = (0..10).map(|i| i * 1000).collect();
        let vals: Vec<f64> = (0..10).flat_map(|_| [0.0, 0.0, 1.0]).collect();
        let f = acti8(&slice(&ts, &vals));
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[5], 0.0);
        assert_eq!(f[6], 1.0);
        assert_eq!(f[7], 0.0);
    }

    #[test]
    fn jerk_is_per_second() {
        let ts = [0, 1000];
        let vals = [0.0, 0.0, 1.0, 0.0, 0.0, 2.0];
        assert_eq!(acti8(&slice(&ts, &vals))[5], 1.0);
        let ts = [0, 500];
        assert_eq!(acti8(&slice(&ts, &vals))[5], 2.0);
    }

    #[test]
    fn active_fraction_counts_departures_from_one_g() {
        let ts = [0, 1000, 2000, 3000];
        let vals = [0.0, 0.0, 1.0, 0.0, 0.0, 1.2, 0.0, 0.0, 1.01, 0.0, 0.0, 0.5];
        assert_eq!(acti8(&slice(&ts, &vals))[7], 0.5);
    }

    #[test]
    fn empty_is_invalid() {
        assert!(acti8(&slice(&[], &[])).iter().all(|v| v.is_nan()));
    }
}
