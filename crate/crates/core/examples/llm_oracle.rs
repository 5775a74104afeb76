//! Drives the chat-completion oracle through a canned transport, shows the
//! two-prompt exchange and replays the cached answer offline.
//!
//! With a real key in the environment, `LlmOracle::from_env` sends the same
//! prompts over HTTP instead.

use std::sync::Arc;

use htnlearn::benchmarks::{sar_domain, two_survivor_problem};
use htnlearn::domain::Task;
use htnlearn::oracle::{
    ChatTransport, DecompositionOracle, LlmConfig, LlmOracle, OracleRequest, ReplayCache, ReplayOracle,
};

struct Canned;

impl ChatTransport for Canned {
    fn complete(&self, _prompt: &str) -> Result<String, String> {
        Ok("```\n!fly(Drone01,safeHaven,Zulu)\n!pickUpSurvivor(Drone01,Maria,Zulu)\n\
            !fly(Drone01,Zulu,safeHaven)\n!dropSurvivor(Drone01,Maria,safeHaven)\n```"
            .to_string())
    }
}

fn main() {
    let domain = sar_domain();
    let problem = two_survivor_problem();
    let request = OracleRequest {
        task: Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
        annotated: domain.annotated_task("rescueSurvivor").expect("annotation").clone(),
        state: problem.state.clone(),
        operator_catalog: domain.operators.clone(),
    };
    let cache = Arc::new(ReplayCache::in_memory());
    let live = LlmOracle::with_transport(Box::new(Canned), LlmConfig::default(), Some(cache.clone()));
    let response = live.propose(&request).expect("canned answer parses");
    for (i, (prompt, completion)) in response.transcript.iter().enumerate() {
        println!("--- prompt {} ({} chars)", i + 1, prompt.len());
        println!("{completion}");
    }

    let replay = ReplayOracle::new(cache);
    let again = replay.propose(&request).expect("cache hit");
    assert_eq!(again.steps, response.steps);
    println!("replayed {} steps from the cache", again.steps.len());
}
