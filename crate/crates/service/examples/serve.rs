//! Serves preference sessions, persisted under a data directory.
//!
//! cargo run --example serve -- [addr] [data-dir]
//!
//! curl -X POST localhost:8080/sessions -H 'content-type: application/json' \
//!   -d '{"problem":{"coordinates":[{"label":"Kp","lower":0,"upper":5}]}}'

use std::sync::Arc;

use gmrs_service::{serve, Store};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let addr = args.next().unwrap_or_else(|| "127.0.0.1:8080".into());
    let dir = args.next().unwrap_or_else(|| "sessions".into());
    let addr = addr.parse().map_err(std::io::Error::other)?;
    serve(addr, Arc::new(Store::open(dir)?)).await
}
