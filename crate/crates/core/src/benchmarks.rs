//! Shipped benchmark domains and their seeded problem generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Problem, Task};
use crate::format::parse_domain;
use crate::symbolic::{Atom, State};

pub const SAR_DOMAIN: &str = include_str!("../domains/sar.htn");
pub const LOGISTICS_DOMAIN: &str = include_str!("../domains/logistics.htn");

/// Name of the safe-zone location in generated search-and-rescue problems.
pub const SAFE_ZONE: &str = "safeHaven";
pub const SAR_AREA: &str = "Alpha";

const LOCATION_NAMES: [&str; 10] = [
    "Zulu", "Yankee", "Xray", "Whiskey", "Victor", "Uniform", "Tango", "Sierra", "Romeo", "Quebec",
];
const SURVIVOR_NAMES: [&str; 10] = [
    "Maria", "John", "Ana", "Luis", "Wei", "Fatima", "Omar", "Grace", "Ivan", "Keiko",
];

pub fn sar_domain() -> Domain {
    parse_domain(SAR_DOMAIN).expect("shipped search-and-rescue domain parses")
}

pub fn logistics_domain() -> Domain {
    parse_domain(LOGISTICS_DOMAIN).expect("shipped logistics domain parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchmarkDomain {
    Logistics,
    Sar,
}

impl BenchmarkDomain {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "logistics" => Some(BenchmarkDomain::Logistics),
            "sar" => Some(BenchmarkDomain::Sar),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkDomain::Logistics => "logistics",
            BenchmarkDomain::Sar => "sar",
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            BenchmarkDomain::Logistics => logistics_domain(),
            BenchmarkDomain::Sar => sar_domain(),
        }
    }

    /// Problem for `seed` under the default configuration.
    pub fn generate(self, seed: u64) -> Problem {
        match self {
            BenchmarkDomain::Logistics => gen_logistics(&LogisticsConfig {
                seed,
                ..Default::default()
            }),
            BenchmarkDomain::Sar => gen_sar(&SarConfig {
                seed,
                ..Default::default()
            }),
        }
    }

    /// `count` problems with seeds `seed, seed+1, ...`.
    pub fn generate_many(self, seed: u64, count: usize) -> Vec<Problem> {
        (0..count as u64).map(|i| self.generate(seed + i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogisticsConfig {
    pub cities: usize,
    pub post_offices_per_city: usize,
    pub airports_per_city: usize,
    pub trucks: usize,
    pub airplanes: usize,
    pub tasks_per_problem: usize,
    pub seed: u64,
}

impl Default for LogisticsConfig {
    fn default() -> Self {
        LogisticsConfig {
            cities: 3,
            post_offices_per_city: 2,
            airports_per_city: 1,
            trucks: 3,
            airplanes: 1,
            tasks_per_problem: 5,
            seed: 0,
        }
    }
}

fn fact(pred: &str, args: &[&str]) -> Atom {
    Atom::ground(pred, args)
}

/// Trucks are spread round-robin over cities at random locations, airplanes
/// start at random airports, and each task moves a distinct package between
/// two distinct uniformly drawn locations.
pub fn gen_logistics(cfg: &LogisticsConfig) -> Problem {
    assert!(
        cfg.cities > 0 && cfg.airports_per_city > 0 && cfg.trucks > 0 && cfg.airplanes > 0 && cfg.tasks_per_problem > 0,
        "logistics counts must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = State::new();
    let mut city_locations: Vec<Vec<String>> = Vec::new();
    let mut airports = Vec::new();
    for c in 1..=cfg.cities {
        let city = format!("city{c}");
        state.insert(fact("city", &[&city]));
        let mut locs = Vec::new();
        for k in 1..=cfg.post_offices_per_city {
            locs.push(format!("po{c}_{k}"));
        }
        for k in 1..=cfg.airports_per_city {
            let ap = if cfg.airports_per_city == 1 {
                format!("airport{c}")
            } else {
                format!("airport{c}_{k}")
            };
            state.insert(fact("airport", &[&ap]));
            airports.push(ap.clone());
            locs.push(ap);
        }
        for l in &locs {
            state.insert(fact("location", &[l]));
            state.insert(fact("inCity", &[l, &city]));
        }
        city_locations.push(locs);
    }
    for t in 1..=cfg.trucks {
        let truck = format!("truck{t}");
        let locs = &city_locations[(t - 1) % cfg.cities];
        let at = locs.choose(&mut rng).expect("city has locations");
        state.insert(fact("truck", &[&truck]));
        state.insert(fact("at", &[&truck, at]));
    }
    for a in 1..=cfg.airplanes {
        let plane = format!("plane{a}");
        let at = airports.choose(&mut rng).expect("airports exist");
        state.insert(fact("airplane", &[&plane]));
        state.insert(fact("at", &[&plane, at]));
    }
    let all: Vec<&String> = city_locations.iter().flatten().collect();
    assert!(all.len() >= 2, "need two locations to move packages");
    let mut tasks = Vec::new();
    for p in 1..=cfg.tasks_per_problem {
        let pkg = format!("pkg{p}");
        let from = *all.choose(&mut rng).expect("locations exist");
        let to = loop {
            let l = *all.choose(&mut rng).expect("locations exist");
            if l != from {
                break l;
            }
        };
        state.insert(fact("package", &[&pkg]));
        state.insert(fact("at", &[&pkg, from]));
        tasks.push(Task::compound("transportPackage", &[&pkg, to]));
    }
    Problem {
        id: format!("logistics-{}", cfg.seed),
        seed: cfg.seed,
        state,
        tasks,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SarConfig {
    /// Unsafe locations; the safe zone comes on top.
    pub locations: usize,
    pub drones: usize,
    pub survivors: usize,
    pub seed: u64,
}

impl Default for SarConfig {
    fn default() -> Self {
        SarConfig {
            locations: 3,
            drones: 1,
            survivors: 5,
            seed: 0,
        }
    }
}

fn numeral(k: usize) -> String {
    format!("n{k}")
}

fn indexed_name(names: &[&str], i: usize, fallback: &str) -> String {
    match names.get(i) {
        Some(n) => n.to_string(),
        None => format!("{fallback}{}", i + 1),
    }
}

/// Survivor placement for `cfg`: survivor index to unsafe-location index.
fn place_survivors(cfg: &SarConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..cfg.survivors).map(|_| rng.gen_range(0..cfg.locations)).collect()
}

/// Builds a search-and-rescue state with survivors at the given unsafe
/// locations. Survivors at one location are rescued in list order.
pub fn sar_problem(id: &str, seed: u64, locations: &[&str], drones: usize, survivors: &[(&str, &str)]) -> Problem {
    let mut state = State::new();
    let max_count = survivors.len().max(locations.len());
    for k in 1..=max_count {
        state.insert(fact("succ", &[&numeral(k - 1), &numeral(k)]));
    }
    state.insert(fact("area", &[SAR_AREA]));
    for l in locations.iter().copied().chain(std::iter::once(SAFE_ZONE)) {
        state.insert(fact("location", &[l]));
        state.insert(fact("atLoc", &[l, SAR_AREA]));
    }
    state.insert(fact("safeZone", &[SAFE_ZONE]));
    state.insert(fact("safeHaven", &[SAFE_ZONE]));
    state.insert(fact("unscanned", &[SAR_AREA, &numeral(locations.len())]));
    for d in 1..=drones {
        let drone = format!("Drone{d:02}");
        state.insert(fact("isDrone", &[&drone]));
        state.insert(fact("atDrone", &[&drone, SAFE_ZONE]));
        state.insert(fact("empty", &[&drone]));
    }
    for loc in locations {
        let here: Vec<&str> = survivors.iter().filter(|(_, l)| l == loc).map(|(s, _)| *s).collect();
        state.insert(fact("survivors", &[loc, &numeral(here.len())]));
        for (i, s) in here.iter().enumerate() {
            state.insert(fact("queued", &[loc, &numeral(here.len() - i), s]));
        }
    }
    for (s, l) in survivors {
        state.insert(fact("person", &[s]));
        state.insert(fact("at", &[s, l]));
    }
    Problem {
        id: id.to_string(),
        seed,
        state,
        tasks: vec![Task::compound("searchANDrescue", &[SAR_AREA])],
    }
}

/// Drones start at the safe zone; survivors are placed uniformly among the
/// unsafe locations.
pub fn gen_sar(cfg: &SarConfig) -> Problem {
    assert!(cfg.locations > 0 && cfg.drones > 0, "search-and-rescue counts must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let locations: Vec<String> = (0..cfg.locations)
        .map(|i| indexed_name(&LOCATION_NAMES, i, "Loc"))
        .collect();
    let names: Vec<String> = (0..cfg.survivors)
        .map(|i| indexed_name(&SURVIVOR_NAMES, i, "Survivor"))
        .collect();
    let placement = place_survivors(cfg, &mut rng);
    let pairs: Vec<(&str, &str)> = names
        .iter()
        .zip(&placement)
        .map(|(s, &l)| (s.as_str(), locations[l].as_str()))
        .collect();
    let locs: Vec<&str> = locations.iter().map(String::as_str).collect();
    sar_problem(&format!("sar-{}", cfg.seed), cfg.seed, &locs, cfg.drones, &pairs)
}

/// The two-survivor scenario: Maria and John at Zulu, Maria rescued first.
pub fn two_survivor_problem() -> Problem {
    sar_problem("sar-two-survivors", 0, &["Zulu"], 1, &[("Maria", "Zulu"), ("John", "Zulu")])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_domains_parse_with_expected_methods() {
        let names = |d: &Domain| d.methods.iter().map(|m| m.name.clone()).collect::<Vec<_>>();
        assert_eq!(
            names(&logistics_domain()),
            ["TM1", "TM2", "TM3", "AM1", "AM2", "AM3", "TPM1", "TPM2"]
        );
        assert_eq!(
            names(&sar_domain()),
            ["SCAN1", "SCAN2", "SCAN3", "CS1", "CS2", "RS1", "RS2", "SAR1", "SAR2"]
        );
    }

    #[test]
    fn every_compound_task_is_annotated() {
        for d in [logistics_domain(), sar_domain()] {
            for t in d.compound_task_names() {
                assert!(d.annotated_task(t).is_some(), "{t} in {}", d.name);
            }
        }
    }

    #[test]
    fn logistics_defaults() {
        let p = gen_logistics(&LogisticsConfig { seed: 1, ..Default::default() });
        assert_eq!(p, gen_logistics(&LogisticsConfig { seed: 1, ..Default::default() }));
        assert_eq!(p.state.with_predicate("location").count(), 9);
        assert_eq!(p.tasks.len(), 5);
        assert_eq!(p.state.with_predicate("truck").count(), 3);
        assert_eq!(p.state.with_predicate("airplane").count(), 1);
        logistics_domain().check_problem(&p).unwrap();
    }

    #[test]
    fn sar_defaults() {
        for seed in 0..20 {
            let p = gen_sar(&SarConfig { seed, ..Default::default() });
            assert_eq!(p.state.with_predicate("person").count(), 5);
            assert_eq!(p.state.with_predicate("isDrone").count(), 1);
            assert_eq!(p.state.with_predicate("safeZone").count(), 1);
            sar_domain().check_problem(&p).unwrap();
        }
    }

    #[test]
    fn two_survivor_fixture_queues_maria_first() {
        let p = two_survivor_problem();
        assert!(p.state.contains(&fact("queued", &["Zulu", "n2", "Maria"])));
        assert!(p.state.contains(&fact("queued", &["Zulu", "n1", "John"])));
        assert!(p.state.contains(&fact("survivors", &["Zulu", "n2"])));
    }
}
