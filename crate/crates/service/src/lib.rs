//! HTTP front end for officials, kiosks and voter devices.
//!
//! One process holds one election: the ledger file, the key file and the
//! in-memory session store. Sessions are opened with a role and carry that
//! participant's state machine; every step names its session id.

mod api;
mod config;
mod error;
mod service;

use std::sync::Arc;

use trip_core::with_group;
use trip_protocol::SystemClock;

pub use crate::{
    api::{router, ActivationReply, Body, BundleBody},
    config::ServiceConfig,
    error::{ApiError, ServiceError},
    service::{load_election, Service, SessionRole, SessionState},
};

/// Loads the election named in `config` and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let addr = format!("{}:{}", config.bind, config.port);
    let app = with_group!(config.group, G => {
        router(Arc::new(Service::<G>::from_files(config.clone(), Arc::new(SystemClock))?))
    });
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
