//! Generates seeded benchmark problems with custom sizes and prints them in
//! the problem file format.

use htnlearn::benchmarks::{gen_logistics, gen_sar, LogisticsConfig, SarConfig};
use htnlearn::format::save_problem;

fn main() {
    let logistics = gen_logistics(&LogisticsConfig {
        cities: 2,
        tasks_per_problem: 2,
        seed: 11,
        ..Default::default()
    });
    print!("{}", save_problem(&logistics));
    let sar = gen_sar(&SarConfig {
        locations: 2,
        survivors: 3,
        seed: 11,
        ..Default::default()
    });
    print!("{}", save_problem(&sar));
}
