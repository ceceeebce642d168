//! HTTP service for reviewing a dendrogram cut, labeling its clusters with
//! categories and exporting the labeled dataset.
//!
//! Routes:
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/dendrogram` | full merge list |
//! | GET | `/api/clusters?k=K` | cluster summaries for a cut (default: session k) |
//! | GET | `/api/cluster/{id}/docs?page=P&page_size=S` | document excerpts |
//! | POST | `/api/labels` | `{cluster, label}`; a `null` label clears it |
//! | POST | `/api/cut` | `{k}` |
//! | POST | `/api/export` | write the labeled dataset |
//! | GET | `/api/session` | session state |

pub mod api;
pub mod error;
pub mod session;
pub mod state;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use axum::Router;
use tower_http::services::ServeDir;

pub use api::router;
pub use error::{ReviewError, Result};
pub use session::{Action, AuditEntry, ReviewSession};
pub use state::AppState;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8787";

/// API routes plus, if given, a static UI bundle at `/`.
pub fn app(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = router(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Opens the session and serves until Ctrl-C.
pub async fn serve(session_path: &Path, addr: SocketAddr, static_dir: Option<PathBuf>) -> Result<()> {
    let state = AppState::open(session_path)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ReviewError::Bind { addr, source })?;
    log::info!("review service listening on http://{addr}");
    axum::serve(listener, app(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ReviewError::io(session_path, e))
}
