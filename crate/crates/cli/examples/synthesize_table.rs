//! Searches for tablecloths whose Gabriel graphs aggregate exactly to a
//! target similarity matrix, by simulated annealing over sample positions.
//!
//! Prints the result as a coordinate table. Used to build the `table1.csv`
//! test fixture:
//!
//! ```text
//! cargo run --release -p sensograph-cli --example synthesize_table > table1.csv
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensograph::gabriel::gabriel_bruteforce_points;
use sensograph::ingest::{serialize_table, CoordinateTable};
use sensograph::{EdgeSet, Point2D, Sheet};

const TARGET: [[u32; 8]; 8] = [
    [0, 4, 3, 1, 6, 3, 1, 2],
    [4, 0, 7, 6, 1, 0, 4, 4],
    [3, 7, 0, 7, 2, 2, 3, 4],
    [1, 6, 7, 0, 4, 7, 3, 1],
    [6, 1, 2, 4, 0, 3, 6, 5],
    [3, 0, 2, 7, 3, 0, 6, 4],
    [1, 4, 3, 3, 6, 6, 0, 4],
    [2, 4, 4, 1, 5, 4, 4, 0],
];
const ASSESSORS: usize = 11;

fn add(counts: &mut [[i64; 8]; 8], g: &EdgeSet, sign: i64) {
    for (i, j) in g.iter() {
        counts[i][j] += sign;
    }
}

fn cost(counts: &[[i64; 8]; 8]) -> i64 {
    let mut c = 0;
    for i in 0..8 {
        for j in i + 1..8 {
            c += (counts[i][j] - i64::from(TARGET[i][j])).abs();
        }
    }
    c
}

fn snap(v: f64, max: f64) -> f64 {
    (v.clamp(1.0, max - 1.0) * 10.0).round() / 10.0
}

fn main() {
    let sheet = Sheet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cloths: Vec<Vec<Point2D>> = (0..ASSESSORS)
        .map(|_| {
            (0..8)
                .map(|_| Point2D::new(snap(rng.gen_range(0.0..60.0), 60.0), snap(rng.gen_range(0.0..40.0), 40.0)))
                .collect()
        })
        .collect();
    let mut graphs: Vec<EdgeSet> = cloths.iter().map(|c| gabriel_bruteforce_points(c)).collect();
    let mut counts = [[0i64; 8]; 8];
    for g in &graphs {
        add(&mut counts, g, 1);
    }
    let mut current = cost(&counts);
    let mut temperature = 2.0;
    let mut step = 0u64;
    while current > 0 {
        step += 1;
        let a = rng.gen_range(0..ASSESSORS);
        let s = rng.gen_range(0..8);
        let old = cloths[a][s];
        let radius = rng.gen_range(0.5..12.0);
        cloths[a][s] = Point2D::new(
            snap(old.x + rng.gen_range(-radius..radius), sheet.width),
            snap(old.y + rng.gen_range(-radius..radius), sheet.height),
        );
        let g = gabriel_bruteforce_points(&cloths[a]);
        add(&mut counts, &graphs[a], -1);
        add(&mut counts, &g, 1);
        let next = cost(&counts);
        let delta = (next - current) as f64;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
            graphs[a] = g;
            current = next;
        } else {
            add(&mut counts, &g, -1);
            add(&mut counts, &graphs[a], 1);
            cloths[a][s] = old;
        }
        temperature = (temperature * 0.99999).max(0.05);
        if step.is_multiple_of(200_000) {
            eprintln!("step {step}: cost {current}, temperature {temperature:.3}");
        }
    }
    eprintln!("found after {step} steps");

    let table = CoordinateTable {
        sample_names: (1..=8).map(|i| i.to_string()).collect(),
        assessor_ids: (1..=ASSESSORS).map(|a| format!("A{a:02}")).collect(),
        sheet: Some(sheet),
        values: (0..8)
            .map(|s| cloths.iter().flat_map(|c| [c[s].x, c[s].y]).collect())
            .collect(),
    };
    print!("{}", serialize_table(&table));
}
