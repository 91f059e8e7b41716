//! Timing of the pipeline phases against the number of assessors.
//!
//! Tablecloths are uniform-random placements on the default sheet. Tablecloth
//! `k` is generated from `seed + k`, so a run with more assessors extends the
//! data of a smaller run instead of replacing it. Phases run sequentially on
//! one thread to keep the timings comparable across sizes.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensograph::{aggregate, consensus_layout, gabriel_graph, LayoutParams, Point2D, Sheet, Tablecloth};

/// A single phase is re-run until at least this much time has passed, and
/// the mean per run is recorded. Keeps sub-millisecond phases above timer
/// and scheduler noise.
const MIN_SAMPLE: Duration = Duration::from_millis(25);

pub fn synthetic_tablecloths(samples: usize, assessors: usize, sheet: Sheet, seed: u64) -> Vec<Tablecloth> {
    (0..assessors)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let positions = (0..samples)
                .map(|_| Point2D::new(rng.gen_range(0.0..sheet.width), rng.gen_range(0.0..sheet.height)));
            Tablecloth::from_positions(format!("R{k}"), sheet, positions)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub assessors: usize,
    pub gabriel: Duration,
    pub aggregate: Duration,
    pub layout: Duration,
    pub layout_iterations: usize,
}

impl BenchRow {
    pub fn counting(&self) -> Duration {
        self.gabriel + self.aggregate
    }

    /// Layout time per node update. The number of updates depends on how
    /// quickly the optimizer settles on the particular matrix, not on A.
    pub fn layout_per_update(&self) -> Duration {
        self.layout / self.layout_iterations.max(1) as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub samples: usize,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
}

/// `later / earlier` for gabriel+aggregate and for layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio {
    pub from: usize,
    pub to: usize,
    pub counting: f64,
    pub layout: f64,
    pub layout_per_update: f64,
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

impl BenchReport {
    pub fn row(&self, assessors: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.assessors == assessors)
    }

    pub fn ratio(&self, from: usize, to: usize) -> Option<Ratio> {
        let a = self.row(from)?;
        let b = self.row(to)?;
        Some(Ratio {
            from,
            to,
            counting: secs(b.counting()) / secs(a.counting()),
            layout: secs(b.layout) / secs(a.layout),
            layout_per_update: secs(b.layout_per_update()) / secs(a.layout_per_update()),
        })
    }

    /// Ratios between consecutive rows.
    pub fn ratios(&self) -> Vec<Ratio> {
        self.rows
            .windows(2)
            .filter_map(|w| self.ratio(w[0].assessors, w[1].assessors))
            .collect()
    }

    pub fn table(&self) -> String {
        let mut out = format!("samples: {}, repeats: {} (median)\n", self.samples, self.repeats);
        let _ = writeln!(
            out,
            "{:>9} {:>12} {:>12} {:>12} {:>12} {:>10} {:>12}",
            "assessors", "gabriel_ms", "aggregate_ms", "layout_ms", "total_ms", "layout_it", "us_per_it"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>9} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>10} {:>12.3}",
                r.assessors,
                secs(r.gabriel) * 1e3,
                secs(r.aggregate) * 1e3,
                secs(r.layout) * 1e3,
                secs(r.gabriel + r.aggregate + r.layout) * 1e3,
                r.layout_iterations,
                secs(r.layout_per_update()) * 1e6,
            );
        }
        for q in self.ratios() {
            let _ = writeln!(
                out,
                "ratio {}->{} (x{:.2}): gabriel+aggregate {:.3}, layout {:.3}, layout per update {:.3}",
                q.from,
                q.to,
                q.to as f64 / q.from as f64,
                q.counting,
                q.layout,
                q.layout_per_update
            );
        }
        out
    }
}

fn measure(mut f: impl FnMut()) -> Duration {
    let start = Instant::now();
    let mut runs = 0u32;
    loop {
        f();
        runs += 1;
        let elapsed = start.elapsed();
        if elapsed >= MIN_SAMPLE {
            return elapsed / runs;
        }
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

pub fn run(samples: usize, assessors: &[usize], repeats: usize, seed: u64) -> sensograph::Result<BenchReport> {
    if samples < 2 {
        return Err(sensograph::Error::Validation("benchmark needs at least 2 samples".into()));
    }
    if repeats == 0 || assessors.contains(&0) {
        return Err(sensograph::Error::Validation("repeats and assessor counts must be positive".into()));
    }
    let sheet = Sheet::default();
    let params = LayoutParams::for_sheet(&sheet);
    let mut rows = Vec::with_capacity(assessors.len());
    for &a in assessors {
        let cloths = synthetic_tablecloths(samples, a, sheet, seed);
        let graphs = cloths.iter().map(gabriel_graph).collect::<sensograph::Result<Vec<_>>>()?;
        let matrix = aggregate(&graphs)?;
        let layout = consensus_layout(&matrix, &params)?;
        let (mut g, mut ag, mut l) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..repeats {
            g.push(measure(|| {
                let graphs: Vec<_> = cloths.iter().map(|t| gabriel_graph(t).expect("valid tablecloth")).collect();
                std::hint::black_box(graphs);
            }));
            ag.push(measure(|| {
                std::hint::black_box(aggregate(&graphs).expect("consistent graphs"));
            }));
            l.push(measure(|| {
                std::hint::black_box(consensus_layout(&matrix, &params).expect("valid matrix"));
            }));
        }
        rows.push(BenchRow {
            assessors: a,
            gabriel: median(g),
            aggregate: median(ag),
            layout: median(l),
            layout_iterations: layout.iterations_used,
        });
    }
    Ok(BenchReport {
        samples,
        repeats,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn larger_runs_extend_smaller_ones() {
        let small = synthetic_tablecloths(5, 3, Sheet::default(), 9);
        let large = synthetic_tablecloths(5, 6, Sheet::default(), 9);
        assert_eq!(small[..], large[..3]);
    }

    #[test]
    fn single_assessor_table_is_well_formed() {
        let report = run(4, &[1], 1, 0).unwrap();
        let row = &report.rows[0];
        assert!(row.gabriel > Duration::ZERO && row.aggregate > Duration::ZERO && row.layout > Duration::ZERO);
        let table = report.table();
        assert_eq!(table.lines().count(), 3);
        assert!(report.ratios().is_empty());
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(run(1, &[1], 1, 0).is_err());
        assert!(run(4, &[0], 1, 0).is_err());
        assert!(run(4, &[1], 0, 0).is_err());
    }
}
