//! Wall-clock timing of full-hypercube mapping construction.

use std::time::Instant;

use hd_core::{build_mapping, CurveSpec, Layout};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub side: usize,
    pub points: usize,
    pub runs: usize,
    /// Median over `runs` timed builds, after one untimed warm-up build.
    pub median_ms: f64,
}

/// Times `build_mapping` over each full hypercube on the calling thread.
pub fn bench_curve(specs: &[CurveSpec], runs: usize) -> Result<Vec<TimingRow>> {
    let runs = runs.max(5);
    let mut rows = Vec::with_capacity(specs.len());
    for &spec in specs {
        let region = spec.full_region();
        std::hint::black_box(build_mapping(spec, &region, Layout::Padded)?);
        let mut times: Vec<f64> = (0..runs)
            .map(|_| {
                let t0 = Instant::now();
                let table = build_mapping(spec, &region, Layout::Padded);
                let dt = t0.elapsed().as_secs_f64() * 1e3;
                std::hint::black_box(table).map(|_| dt)
            })
            .collect::<std::result::Result<_, _>>()?;
        times.sort_by(f64::total_cmp);
        rows.push(TimingRow {
            n: spec.n(),
            side: spec.side(),
            points: spec.length(),
            runs,
            median_ms: times[runs / 2],
        });
    }
    Ok(rows)
}

/// Aligned-column text rendering of a timing table.
pub fn format_rows(rows: &[TimingRow]) -> String {
    let mut s = format!("{:>2} {:>6} {:>10} {:>12}\n", "n", "side", "points", "median_ms");
    for r in rows {
        s.push_str(&format!("{:>2} {:>6} {:>10} {:>12.3}\n", r.n, r.side, r.points, r.median_ms));
    }
    s
}
