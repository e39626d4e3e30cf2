//! Hour-of-year bookkeeping.
//!
//! Hours are 1-based throughout the public API (`1..=horizon`). A full
//! horizon is the 8760-hour non-leap year; shorter desk-scale horizons are
//! treated as a compressed year whose month and quarter boundaries are
//! placed proportionally, so that the same code paths serve both.

/// Hours in a non-leap year.
pub const HOURS_PER_YEAR: usize = 8760;

/// Days per month of a non-leap year.
pub const MONTH_DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Peak window is `[PEAK_START, PEAK_END)` in hour-of-day.
pub const PEAK_START: usize = 8;
pub const PEAK_END: usize = 20;

/// Peakload indicator: 1 iff `8 <= h mod 24 < 20`.
pub fn peak_indicator(h: usize) -> u8 {
    let hod = h % 24;
    u8::from((PEAK_START..PEAK_END).contains(&hod))
}

pub fn is_peak(h: usize) -> bool {
    peak_indicator(h) == 1
}

/// Exclusive 0-based end offsets of the twelve months in a horizon of
/// `horizon` hours. `bounds[0] == 0` and `bounds[12] == horizon`.
pub fn month_bounds(horizon: usize) -> [usize; 13] {
    let mut bounds = [0usize; 13];
    let mut cum_days = 0usize;
    for (m, days) in MONTH_DAYS.iter().enumerate() {
        cum_days += days;
        // exact integer arithmetic for the full year: cum_days * 24
        let num = cum_days * horizon;
        bounds[m + 1] = (2 * num + 365) / (2 * 365);
    }
    bounds[12] = horizon;
    bounds
}

/// 0-based month index for every 0-based hour offset of the horizon.
pub fn month_index(horizon: usize) -> Vec<usize> {
    let bounds = month_bounds(horizon);
    let mut out = Vec::with_capacity(horizon);
    for m in 0..12 {
        out.extend(std::iter::repeat_n(m, bounds[m + 1] - bounds[m]));
    }
    out
}

/// Half-open 1-based quarter windows `[start, end)` partitioning `1..=horizon`.
pub fn quarter_windows(horizon: usize) -> [(usize, usize); 4] {
    let edge = |k: usize| 1 + (2 * k * horizon + 4) / 8;
    [
        (edge(0), edge(1)),
        (edge(1), edge(2)),
        (edge(2), edge(3)),
        (edge(3), edge(4)),
    ]
}

/// Segments of consecutive hours that share both a 24-hour day and a month.
/// Returned as 0-based half-open ranges covering `0..horizon`.
pub fn day_month_blocks(horizon: usize) -> Vec<std::ops::Range<usize>> {
    let bounds = month_bounds(horizon);
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < horizon {
        let day_end = (start / 24 + 1) * 24;
        let month_end = bounds
            .iter()
            .copied()
            .find(|&b| b > start)
            .unwrap_or(horizon);
        let end = day_end.min(month_end).min(horizon);
        blocks.push(start..end);
        start = end;
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_boundaries() {
        assert_eq!(peak_indicator(8), 1);
        assert_eq!(peak_indicator(20), 0);
        assert_eq!(peak_indicator(32), 1);
        assert_eq!(peak_indicator(7), 0);
        assert_eq!(peak_indicator(19), 1);
        assert_eq!(peak_indicator(24), 0);
    }

    #[test]
    fn twelve_peak_hours_per_day() {
        let n: usize = (1..=24).map(|h| peak_indicator(h) as usize).sum();
        assert_eq!(n, 12);
    }

    #[test]
    fn full_year_months_align_with_days() {
        let b = month_bounds(HOURS_PER_YEAR);
        let mut cum = 0;
        for m in 0..12 {
            cum += MONTH_DAYS[m] * 24;
            assert_eq!(b[m + 1], cum);
        }
        assert_eq!(month_index(HOURS_PER_YEAR).len(), HOURS_PER_YEAR);
        // March starts on hour 1417 (1-based)
        assert_eq!(month_index(HOURS_PER_YEAR)[1416], 2);
        assert_eq!(month_index(HOURS_PER_YEAR)[1415], 1);
    }

    #[test]
    fn quarters_match_futures_table_starts() {
        let q = quarter_windows(HOURS_PER_YEAR);
        assert_eq!(q[0], (1, 2191));
        assert_eq!(q[1], (2191, 4381));
        assert_eq!(q[2], (4381, 6571));
        assert_eq!(q[3], (6571, 8761));
    }

    #[test]
    fn quarters_partition_short_horizons() {
        for h in [1usize, 5, 24, 48, 100, 168] {
            let q = quarter_windows(h);
            assert_eq!(q[0].0, 1);
            assert_eq!(q[3].1, h + 1);
            for k in 0..3 {
                assert_eq!(q[k].1, q[k + 1].0);
            }
        }
    }

    #[test]
    fn blocks_cover_horizon() {
        for h in [48usize, 100, 8760] {
            let blocks = day_month_blocks(h);
            let total: usize = blocks.iter().map(|b| b.len()).sum();
            assert_eq!(total, h);
            let months = month_index(h);
            for b in &blocks {
                assert!(b.clone().all(|i| months[i] == months[b.start]));
                assert!(b.clone().all(|i| i / 24 == b.start / 24));
            }
        }
        assert_eq!(day_month_blocks(8760).len(), 365);
    }
}
