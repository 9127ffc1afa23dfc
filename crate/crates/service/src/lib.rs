//! Platform layer for the STAR story reader: a durable job queue with
//! workers, the HTTP API with live progress, the story repository, and the
//! `star` command line.

pub mod api;
pub mod auth;
pub mod cli;
pub mod config;
pub mod jobs;
pub mod run;
pub mod store;

use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;
use tokio::sync::watch;
use tokio::task::JoinHandle;

pub use config::ServiceConfig;

use api::{AppState, LogNotifier};
use jobs::Queue;
use store::{now_ms, Store, StoreError};

const EXAMPLE_STORY: &str = include_str!("../../core/fixtures/phone_story.star");
const EXAMPLE_KNOWLEDGE: &str = include_str!("../../core/fixtures/phone_knowledge.star");

/// A running set of workers plus the state the HTTP layer needs.
pub struct Service {
    pub state: api::Shared,
    shutdown: watch::Sender<bool>,
    tasks: Vec<JoinHandle<()>>,
}

impl Service {
    /// Opens the store, requeues interrupted jobs and loads the example
    /// story. No worker runs until [`Service::start_workers`].
    pub fn open(config: &ServiceConfig) -> Result<Service, StoreError> {
        let store = match &config.store_path {
            Some(p) => Store::open(p)?,
            None => Store::open_in_memory()?,
        };
        let requeued = store.requeue_running()?;
        if requeued > 0 {
            log::info!("requeued {requeued} interrupted job(s)");
        }
        store.ensure_example("Bob, Mary and the phone", EXAMPLE_STORY, EXAMPLE_KNOWLEDGE)?;
        let queue = Arc::new(Queue::new(Arc::new(store), config.queue_capacity));
        let state = Arc::new(AppState {
            queue,
            annotator_url: config.annotator_url.clone(),
            notifier: Box::new(LogNotifier),
        });
        Ok(Service { state, shutdown: watch::channel(false).0, tasks: Vec::new() })
    }

    pub fn start_workers(&mut self, workers: usize) {
        for _ in 0..workers {
            let q = Arc::clone(&self.state.queue);
            self.tasks.push(tokio::spawn(q.work(self.shutdown.subscribe())));
        }
    }

    /// Deletes finished jobs older than the retention period, now and then
    /// hourly.
    pub fn start_retention(&mut self, days: u32) {
        let store = Arc::clone(&self.state.queue.store);
        let mut stop = self.shutdown.subscribe();
        self.tasks.push(tokio::spawn(async move {
            loop {
                let cutoff = now_ms() - i64::from(days) * 86_400_000;
                match store.purge_finished(cutoff) {
                    Ok(0) => {}
                    Ok(n) => log::info!("purged {n} expired job(s)"),
                    Err(e) => log::warn!("purging jobs failed: {e}"),
                }
                tokio::select! {
                    _ = tokio::time::sleep(Duration::from_secs(3600)) => {}
                    _ = stop.changed() => return,
                }
            }
        }));
    }

    pub fn router(&self) -> axum::Router {
        api::router(Arc::clone(&self.state))
    }

    /// Stops claiming jobs and waits for those in progress.
    pub async fn drain(self) {
        let _ = self.shutdown.send(true);
        for t in self.tasks {
            let _ = t.await;
        }
    }
}

/// Serves the API on `listener` until `stop` resolves, then drains workers.
pub async fn serve(
    listener: TcpListener,
    config: &ServiceConfig,
    stop: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let mut service = Service::open(config).map_err(std::io::Error::other)?;
    service.start_workers(config.workers.max(1));
    service.start_retention(config.retention_days);
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, service.router()).with_graceful_shutdown(stop).await?;
    service.drain().await;
    Ok(())
}
