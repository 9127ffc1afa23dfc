//! Submits the phone story to an in-memory queue, follows its progress
//! events, and prints the finished report.

use std::sync::Arc;

use star_service::jobs::Queue;
use star_service::run::RunOptions;
use star_service::store::Store;

#[tokio::main]
async fn main() {
    let queue = Arc::new(Queue::new(Arc::new(Store::open_in_memory().unwrap()), 16));
    let id = queue.submit(include_str!("../../core/fixtures/phone.star"), &RunOptions::default()).unwrap();
    let mut sub = queue.hub.subscribe(&queue.store, &id).unwrap();

    let (stop, stopped) = tokio::sync::watch::channel(false);
    let worker = tokio::spawn(Arc::clone(&queue).work(stopped));

    for e in sub.backlog.drain(..) {
        println!("{}: {}", e.name, e.data);
    }
    if let Some(rx) = sub.live.as_mut() {
        while let Ok(e) = rx.recv().await {
            println!("{}: {}", e.name, e.data);
            if e.is_terminal() {
                break;
            }
        }
    }
    stop.send(true).unwrap();
    worker.await.unwrap();

    let job = queue.store.job(&id).unwrap().unwrap();
    let out: serde_json::Value = serde_json::from_str(job.result.as_deref().unwrap()).unwrap();
    print!("{}", out["raw"].as_str().unwrap());
}
