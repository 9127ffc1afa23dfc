//! Queue workers and the per-job progress fan-out behind the event stream.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::{broadcast, watch, Notify};

use star_core::reasoner::ProgressEvent;

use crate::run::{run_domain, RunOptions};
use crate::store::{ClaimedJob, JobState, Store, StoreError};

/// One server-sent event: its name and JSON payload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamEvent {
    pub name: &'static str,
    pub data: Value,
}

impl StreamEvent {
    pub fn is_terminal(&self) -> bool {
        matches!(self.name, "done" | "failed")
    }

    fn state(id: &str, state: JobState) -> StreamEvent {
        StreamEvent { name: "state", data: json!({ "id": id, "state": state }) }
    }

    fn done(id: &str) -> StreamEvent {
        StreamEvent { name: "done", data: json!({ "id": id, "state": JobState::Done }) }
    }

    fn failed(id: &str, error: &str) -> StreamEvent {
        StreamEvent { name: "failed", data: json!({ "id": id, "state": JobState::Failed, "error": error }) }
    }

    pub fn from_progress(e: &ProgressEvent) -> StreamEvent {
        let name = match e {
            ProgressEvent::SessionStarted { .. } => "session",
            ProgressEvent::Grounded { .. } => "grounding",
            ProgressEvent::ArgumentsBuilt { .. } => "arguments",
            ProgressEvent::ExtensionComputed { .. } => "extension",
            ProgressEvent::SessionFinished { .. } => "answers",
        };
        StreamEvent { name, data: serde_json::to_value(e).expect("progress serializes") }
    }
}

struct Channel {
    log: Vec<StreamEvent>,
    tx: broadcast::Sender<StreamEvent>,
}

impl Channel {
    fn new() -> Channel {
        Channel { log: Vec::new(), tx: broadcast::channel(256).0 }
    }
}

/// What a new subscriber receives: events to send right away, then the live
/// feed if the job has not finished.
pub struct Subscription {
    pub backlog: Vec<StreamEvent>,
    pub live: Option<broadcast::Receiver<StreamEvent>>,
}

#[derive(Default)]
pub struct ProgressHub {
    channels: Mutex<HashMap<String, Channel>>,
}

impl ProgressHub {
    /// Subscribes to a job. A finished job yields its terminal event only;
    /// otherwise a state snapshot comes first, followed by every progress
    /// event published so far.
    pub fn subscribe(&self, store: &Store, id: &str) -> Result<Subscription, StoreError> {
        let mut channels = self.channels.lock().unwrap_or_else(|e| e.into_inner());
        let job = store.job(id)?.ok_or(StoreError::NotFound)?;
        match job.state {
            JobState::Done => return Ok(Subscription { backlog: vec![StreamEvent::done(id)], live: None }),
            JobState::Failed => {
                let err = job.error.as_deref().unwrap_or("");
                return Ok(Subscription { backlog: vec![StreamEvent::failed(id, err)], live: None });
            }
            JobState::Queued | JobState::Running => {}
        }
        let ch = channels.entry(id.to_string()).or_insert_with(Channel::new);
        let mut backlog = vec![StreamEvent::state(id, job.state)];
        backlog.extend(ch.log.iter().cloned());
        Ok(Subscription { backlog, live: Some(ch.tx.subscribe()) })
    }

    fn publish(&self, id: &str, event: StreamEvent) {
        let mut channels = self.channels.lock().unwrap_or_else(|e| e.into_inner());
        let ch = channels.entry(id.to_string()).or_insert_with(Channel::new);
        ch.log.push(event.clone());
        let _ = ch.tx.send(event);
    }

    /// Sends the terminal event and forgets the job. Call only after the
    /// terminal state is stored.
    fn close(&self, id: &str, event: StreamEvent) {
        let mut channels = self.channels.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(ch) = channels.remove(id) {
            let _ = ch.tx.send(event);
        }
    }

    fn reset(&self, id: &str) {
        let mut channels = self.channels.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(ch) = channels.get_mut(id) {
            ch.log.clear();
        }
    }
}

/// Shared by the HTTP handlers and the workers.
pub struct Queue {
    pub store: Arc<Store>,
    pub hub: ProgressHub,
    pub capacity: usize,
    wake: Notify,
}

impl Queue {
    pub fn new(store: Arc<Store>, capacity: usize) -> Queue {
        Queue { store, hub: ProgressHub::default(), capacity, wake: Notify::new() }
    }

    pub fn submit(&self, domain: &str, options: &RunOptions) -> Result<String, StoreError> {
        let opts = serde_json::to_string(options).expect("options serialize");
        let id = self.store.enqueue(domain, &opts, self.capacity)?;
        self.wake.notify_one();
        Ok(id)
    }

    /// Runs one claimed job to its terminal state.
    pub async fn process(self: &Arc<Self>, claimed: ClaimedJob) {
        let id = claimed.job.id.clone();
        self.hub.reset(&id);
        let this = Arc::clone(self);
        let job = claimed.job.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            let options: RunOptions = serde_json::from_str(&job.options).map_err(|e| format!("bad options: {e}"))?;
            let mut forward = |e: ProgressEvent| this.hub.publish(&job.id, StreamEvent::from_progress(&e));
            let out = run_domain(&job.domain, &options, &mut forward).map_err(|e| e.to_string())?;
            Ok::<_, String>(serde_json::to_string(&out).expect("output serializes"))
        })
        .await
        .unwrap_or_else(|e| Err(format!("reader crashed: {e}")));

        let stored = match &outcome {
            Ok(result) => self.store.finish(&claimed, Ok(result)),
            Err(msg) => self.store.finish(&claimed, Err(msg)),
        };
        match stored {
            Ok(()) => {
                let event = match &outcome {
                    Ok(_) => StreamEvent::done(&id),
                    Err(msg) => StreamEvent::failed(&id, msg),
                };
                log::info!("job {id} finished: {}", event.name);
                self.hub.close(&id, event);
            }
            Err(e) => log::warn!("job {id}: {e}"),
        }
    }

    /// Claims and runs jobs until `shutdown` turns true. A job in progress
    /// is completed before returning.
    pub async fn work(self: Arc<Self>, mut shutdown: watch::Receiver<bool>) {
        loop {
            if *shutdown.borrow() {
                return;
            }
            match self.store.claim_next() {
                Ok(Some(claimed)) => self.process(claimed).await,
                Ok(None) => {
                    tokio::select! {
                        _ = self.wake.notified() => {}
                        _ = shutdown.changed() => {}
                        _ = tokio::time::sleep(Duration::from_millis(500)) => {}
                    }
                }
                Err(e) => {
                    log::error!("claiming a job failed: {e}");
                    tokio::time::sleep(Duration::from_secs(1)).await;
                }
            }
        }
    }
}
