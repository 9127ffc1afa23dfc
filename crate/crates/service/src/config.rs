use std::net::SocketAddr;
use std::path::PathBuf;

/// Server settings. Every field can come from the environment; command-line
/// flags override it.
#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub workers: usize,
    /// SQLite file; `None` keeps everything in memory.
    pub store_path: Option<PathBuf>,
    pub retention_days: u32,
    pub queue_capacity: usize,
    /// CoreNLP server used to annotate raw text.
    pub annotator_url: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            workers: 2,
            store_path: Some(PathBuf::from("star.db")),
            retention_days: 7,
            queue_capacity: 1000,
            annotator_url: None,
        }
    }
}

impl ServiceConfig {
    /// Reads `STAR_LISTEN`, `STAR_WORKERS`, `STAR_DB`, `STAR_RETENTION_DAYS`,
    /// `STAR_QUEUE_CAPACITY` and `STAR_ANNOTATOR_URL`.
    pub fn from_env() -> Result<ServiceConfig, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<ServiceConfig, String> {
        let mut c = ServiceConfig::default();
        fn parse<T: std::str::FromStr>(key: &str, v: String) -> Result<T, String> {
            v.parse().map_err(|_| format!("{key}: cannot parse `{v}`"))
        }
        if let Some(v) = get("STAR_LISTEN") {
            c.listen = parse("STAR_LISTEN", v)?;
        }
        if let Some(v) = get("STAR_WORKERS") {
            c.workers = parse("STAR_WORKERS", v)?;
        }
        if let Some(v) = get("STAR_DB") {
            c.store_path = if v == ":memory:" { None } else { Some(PathBuf::from(v)) };
        }
        if let Some(v) = get("STAR_RETENTION_DAYS") {
            c.retention_days = parse("STAR_RETENTION_DAYS", v)?;
        }
        if let Some(v) = get("STAR_QUEUE_CAPACITY") {
            c.queue_capacity = parse("STAR_QUEUE_CAPACITY", v)?;
        }
        if let Some(v) = get("STAR_ANNOTATOR_URL") {
            c.annotator_url = Some(v).filter(|s| !s.is_empty());
        }
        Ok(c)
    }
}
