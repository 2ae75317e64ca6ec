//! Session service for live derivation editing: create a session from a
//! system or document text, post edits, and get back incremental status
//! deltas, rule listings and rule documentation bound to the student's terms.

pub mod http;
pub mod payload;
pub mod session;

use std::net::SocketAddr;
use std::sync::Arc;

pub use http::router;
pub use session::{ServiceError, SessionStore, Source};

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(SessionStore::new()))).await
}
