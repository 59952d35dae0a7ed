//! Serves the mock backend over HTTP and runs the provider contract checks
//! through the real client, the same way a model service is validated.
//!
//! cargo run --example provider_conformance

use comvid::provider::server::{Backend, MockServer};
use comvid::provider::{conformance, HttpProvider, ProviderEndpoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = MockServer::start(Backend::mock(32))?;
    let client = HttpProvider::new(ProviderEndpoint::new(server.base_url()))?;
    println!("mock service at {}", server.base_url());

    let checks = conformance::run(&client);
    for c in &checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {}{}", c.name, if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) });
    }
    println!("{} requests served", server.requests_served());
    if checks.iter().any(|c| !c.passed) {
        std::process::exit(1);
    }
    Ok(())
}
