//! Embedded SQLite store for jobs, stories, comments, accounts and feedback.

use std::path::Path;
use std::sync::{Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use rusqlite::{params, Connection, OptionalExtension, Row};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MIGRATIONS: &[&str] = &[include_str!("../migrations/0001_init.sql"), include_str!("../migrations/0002_accounts_feedback.sql")];

/// Owner of the preloaded example stories.
pub const EXAMPLES_OWNER: &str = "examples";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("database error: {0}")]
    Sql(#[from] rusqlite::Error),
    #[error("not found")]
    NotFound,
    #[error("permission denied")]
    Forbidden,
    #[error("the job queue is full ({0} jobs waiting)")]
    QueueFull(usize),
    #[error("job {id} cannot move from {from} to {to}")]
    InvalidTransition { id: String, from: String, to: String },
    #[error("comments are only allowed on public stories")]
    NotPublic,
    #[error("{0}")]
    Invalid(String),
    #[error("`{0}` is already taken")]
    Taken(String),
}

pub fn now_ms() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as i64).unwrap_or(0)
}

fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn as_str(self) -> &'static str {
        match self {
            JobState::Queued => "queued",
            JobState::Running => "running",
            JobState::Done => "done",
            JobState::Failed => "failed",
        }
    }

    fn parse(s: &str) -> JobState {
        match s {
            "queued" => JobState::Queued,
            "running" => JobState::Running,
            "done" => JobState::Done,
            _ => JobState::Failed,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobRecord {
    pub id: String,
    pub domain: String,
    /// JSON-encoded run options.
    pub options: String,
    pub state: JobState,
    pub submitted_at: i64,
    pub started_at: Option<i64>,
    pub finished_at: Option<i64>,
    /// JSON-encoded run output, set once the job is done.
    pub result: Option<String>,
    pub error: Option<String>,
}

impl JobRecord {
    fn from_row(r: &Row<'_>) -> rusqlite::Result<JobRecord> {
        Ok(JobRecord {
            id: r.get("id")?,
            domain: r.get("domain")?,
            options: r.get("options")?,
            state: JobState::parse(&r.get::<_, String>("state")?),
            submitted_at: r.get("submitted_at")?,
            started_at: r.get("started_at")?,
            finished_at: r.get("finished_at")?,
            result: r.get("result")?,
            error: r.get("error")?,
        })
    }
}

/// A job handed to one worker. The claim token must accompany the terminal
/// transition, so a job requeued behind a worker's back cannot be finished
/// twice.
#[derive(Clone, Debug)]
pub struct ClaimedJob {
    pub job: JobRecord,
    pub claim: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Private,
    Public,
}

impl Visibility {
    fn as_str(self) -> &'static str {
        match self {
            Visibility::Private => "private",
            Visibility::Public => "public",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoryRecord {
    pub id: String,
    pub owner: String,
    pub title: String,
    pub story: String,
    pub knowledge: String,
    pub visibility: Visibility,
    pub example: bool,
    pub created_at: i64,
    pub updated_at: i64,
}

impl StoryRecord {
    fn from_row(r: &Row<'_>) -> rusqlite::Result<StoryRecord> {
        let vis: String = r.get("visibility")?;
        Ok(StoryRecord {
            id: r.get("id")?,
            owner: r.get("owner")?,
            title: r.get("title")?,
            story: r.get("story")?,
            knowledge: r.get("knowledge")?,
            visibility: if vis == "public" { Visibility::Public } else { Visibility::Private },
            example: r.get("example")?,
            created_at: r.get("created_at")?,
            updated_at: r.get("updated_at")?,
        })
    }

    pub fn readable_by(&self, user: Option<&str>) -> bool {
        self.visibility == Visibility::Public || self.example || user == Some(self.owner.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewStory {
    /// Updates the caller's existing story when set.
    #[serde(default)]
    pub id: Option<String>,
    pub title: String,
    #[serde(default)]
    pub story: String,
    #[serde(default)]
    pub knowledge: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Mine,
    Public,
    Examples,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comment {
    pub id: String,
    pub story_id: String,
    pub author: String,
    pub body: String,
    pub created_at: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Credentials {
    pub salt: String,
    pub hash: String,
}

pub struct Store {
    conn: Mutex<Connection>,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Store, StoreError> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Store::init(conn)
    }

    pub fn open_in_memory() -> Result<Store, StoreError> {
        Store::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Store, StoreError> {
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        let store = Store { conn: Mutex::new(conn) };
        store.migrate()?;
        Ok(store)
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn migrate(&self) -> Result<(), StoreError> {
        let mut conn = self.conn();
        let version: usize = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
        for (i, sql) in MIGRATIONS.iter().enumerate().skip(version) {
            let tx = conn.transaction()?;
            tx.execute_batch(sql)?;
            tx.pragma_update(None, "user_version", i + 1)?;
            tx.commit()?;
        }
        Ok(())
    }

    pub fn schema_version(&self) -> Result<usize, StoreError> {
        Ok(self.conn().pragma_query_value(None, "user_version", |r| r.get(0))?)
    }

    // ---- jobs ----

    pub fn enqueue(&self, domain: &str, options: &str, capacity: usize) -> Result<String, StoreError> {
        let conn = self.conn();
        let waiting: usize = conn.query_row("SELECT COUNT(*) FROM jobs WHERE state = 'queued'", [], |r| r.get(0))?;
        if waiting >= capacity {
            return Err(StoreError::QueueFull(waiting));
        }
        let id = new_id();
        conn.execute(
            "INSERT INTO jobs (id, domain, options, state, submitted_at) VALUES (?1, ?2, ?3, 'queued', ?4)",
            params![id, domain, options, now_ms()],
        )?;
        Ok(id)
    }

    pub fn job(&self, id: &str) -> Result<Option<JobRecord>, StoreError> {
        Ok(self.conn().query_row("SELECT * FROM jobs WHERE id = ?1", [id], JobRecord::from_row).optional()?)
    }

    /// Moves the oldest queued job to running.
    pub fn claim_next(&self) -> Result<Option<ClaimedJob>, StoreError> {
        let conn = self.conn();
        let claim = new_id();
        let changed = conn.execute(
            "UPDATE jobs SET state = 'running', claim = ?1, started_at = ?2
             WHERE seq = (SELECT seq FROM jobs WHERE state = 'queued' ORDER BY seq LIMIT 1) AND state = 'queued'",
            params![claim, now_ms()],
        )?;
        if changed == 0 {
            return Ok(None);
        }
        let job = conn.query_row("SELECT * FROM jobs WHERE claim = ?1", [&claim], JobRecord::from_row)?;
        Ok(Some(ClaimedJob { job, claim }))
    }

    /// Records the terminal state of a claimed job.
    pub fn finish(&self, claimed: &ClaimedJob, outcome: Result<&str, &str>) -> Result<(), StoreError> {
        let conn = self.conn();
        let (state, result, error) = match outcome {
            Ok(r) => ("done", Some(r), None),
            Err(e) => ("failed", None, Some(e)),
        };
        let changed = conn.execute(
            "UPDATE jobs SET state = ?1, result = ?2, error = ?3, finished_at = ?4
             WHERE id = ?5 AND state = 'running' AND claim = ?6",
            params![state, result, error, now_ms(), claimed.job.id, claimed.claim],
        )?;
        if changed != 1 {
            let from: Option<String> =
                conn.query_row("SELECT state FROM jobs WHERE id = ?1", [&claimed.job.id], |r| r.get(0)).optional()?;
            return Err(StoreError::InvalidTransition {
                id: claimed.job.id.clone(),
                from: from.unwrap_or_else(|| "missing".into()),
                to: state.into(),
            });
        }
        Ok(())
    }

    /// Puts jobs left running by a previous process back in the queue.
    pub fn requeue_running(&self) -> Result<usize, StoreError> {
        Ok(self
            .conn()
            .execute("UPDATE jobs SET state = 'queued', claim = NULL, started_at = NULL WHERE state = 'running'", [])?)
    }

    /// Deletes finished jobs older than `cutoff` (milliseconds since the epoch).
    pub fn purge_finished(&self, cutoff: i64) -> Result<usize, StoreError> {
        Ok(self
            .conn()
            .execute("DELETE FROM jobs WHERE state IN ('done', 'failed') AND finished_at < ?1", [cutoff])?)
    }

    pub fn queued_count(&self) -> Result<usize, StoreError> {
        Ok(self.conn().query_row("SELECT COUNT(*) FROM jobs WHERE state = 'queued'", [], |r| r.get(0))?)
    }

    // ---- stories ----

    pub fn save_story(&self, owner: &str, story: &NewStory) -> Result<StoryRecord, StoreError> {
        if story.title.trim().is_empty() {
            return Err(StoreError::Invalid("a story needs a title".into()));
        }
        let now = now_ms();
        let id = match &story.id {
            Some(id) => {
                let existing = self.story(id)?.ok_or(StoreError::NotFound)?;
                if existing.owner != owner {
                    return Err(StoreError::Forbidden);
                }
                self.conn().execute(
                    "UPDATE stories SET title = ?1, story = ?2, knowledge = ?3, updated_at = ?4 WHERE id = ?5",
                    params![story.title, story.story, story.knowledge, now, id],
                )?;
                id.clone()
            }
            None => {
                let id = new_id();
                self.conn().execute(
                    "INSERT INTO stories (id, owner, title, story, knowledge, visibility, created_at, updated_at)
                     VALUES (?1, ?2, ?3, ?4, ?5, 'private', ?6, ?6)",
                    params![id, owner, story.title, story.story, story.knowledge, now],
                )?;
                id
            }
        };
        self.story(&id)?.ok_or(StoreError::NotFound)
    }

    pub fn story(&self, id: &str) -> Result<Option<StoryRecord>, StoreError> {
        Ok(self.conn().query_row("SELECT * FROM stories WHERE id = ?1", [id], StoryRecord::from_row).optional()?)
    }

    /// A story as seen by `user`; private stories of others are forbidden.
    pub fn load_story(&self, id: &str, user: Option<&str>) -> Result<StoryRecord, StoreError> {
        let s = self.story(id)?.ok_or(StoreError::NotFound)?;
        if !s.readable_by(user) {
            return Err(StoreError::Forbidden);
        }
        Ok(s)
    }

    pub fn list_stories(&self, scope: Scope, user: Option<&str>) -> Result<Vec<StoryRecord>, StoreError> {
        let conn = self.conn();
        let (sql, arg) = match scope {
            Scope::Mine => ("SELECT * FROM stories WHERE owner = ?1 ORDER BY seq", user.ok_or(StoreError::Forbidden)?),
            Scope::Public => ("SELECT * FROM stories WHERE visibility = 'public' AND example = ?1 ORDER BY seq", "0"),
            Scope::Examples => ("SELECT * FROM stories WHERE example = ?1 ORDER BY seq", "1"),
        };
        let mut stmt = conn.prepare(sql)?;
        let rows = stmt.query_map([arg], StoryRecord::from_row)?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    pub fn share_story(&self, id: &str, user: &str) -> Result<StoryRecord, StoreError> {
        let s = self.story(id)?.ok_or(StoreError::NotFound)?;
        if s.owner != user {
            return Err(StoreError::Forbidden);
        }
        self.conn().execute(
            "UPDATE stories SET visibility = ?1, updated_at = ?2 WHERE id = ?3",
            params![Visibility::Public.as_str(), now_ms(), id],
        )?;
        self.story(id)?.ok_or(StoreError::NotFound)
    }

    /// Inserts a public example story unless one with this title exists.
    pub fn ensure_example(&self, title: &str, story: &str, knowledge: &str) -> Result<(), StoreError> {
        let conn = self.conn();
        let exists: bool = conn.query_row(
            "SELECT EXISTS (SELECT 1 FROM stories WHERE example = 1 AND title = ?1)",
            [title],
            |r| r.get(0),
        )?;
        if !exists {
            let now = now_ms();
            conn.execute(
                "INSERT INTO stories (id, owner, title, story, knowledge, visibility, example, created_at, updated_at)
                 VALUES (?1, ?2, ?3, ?4, ?5, 'public', 1, ?6, ?6)",
                params![new_id(), EXAMPLES_OWNER, title, story, knowledge, now],
            )?;
        }
        Ok(())
    }

    // ---- comments ----

    pub fn add_comment(&self, story_id: &str, author: &str, body: &str) -> Result<Comment, StoreError> {
        if body.trim().is_empty() {
            return Err(StoreError::Invalid("a comment cannot be empty".into()));
        }
        let story = self.story(story_id)?.ok_or(StoreError::NotFound)?;
        if story.visibility != Visibility::Public {
            return Err(StoreError::NotPublic);
        }
        let c = Comment {
            id: new_id(),
            story_id: story_id.into(),
            author: author.into(),
            body: body.into(),
            created_at: now_ms(),
        };
        self.conn().execute(
            "INSERT INTO comments (id, story_id, author, body, created_at) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![c.id, c.story_id, c.author, c.body, c.created_at],
        )?;
        Ok(c)
    }

    pub fn comments(&self, story_id: &str) -> Result<Vec<Comment>, StoreError> {
        let story = self.story(story_id)?.ok_or(StoreError::NotFound)?;
        if story.visibility != Visibility::Public {
            return Err(StoreError::NotPublic);
        }
        let conn = self.conn();
        let mut stmt = conn.prepare("SELECT * FROM comments WHERE story_id = ?1 ORDER BY created_at, seq")?;
        let rows = stmt.query_map([story_id], |r| {
            Ok(Comment {
                id: r.get("id")?,
                story_id: r.get("story_id")?,
                author: r.get("author")?,
                body: r.get("body")?,
                created_at: r.get("created_at")?,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    // ---- feedback ----

    pub fn add_feedback(&self, message: &str, contact: Option<&str>) -> Result<String, StoreError> {
        if message.trim().is_empty() {
            return Err(StoreError::Invalid("feedback message is empty".into()));
        }
        let id = new_id();
        self.conn().execute(
            "INSERT INTO feedback (id, message, contact, created_at) VALUES (?1, ?2, ?3, ?4)",
            params![id, message, contact, now_ms()],
        )?;
        Ok(id)
    }

    pub fn feedback_message(&self, id: &str) -> Result<Option<String>, StoreError> {
        Ok(self.conn().query_row("SELECT message FROM feedback WHERE id = ?1", [id], |r| r.get(0)).optional()?)
    }

    // ---- accounts ----

    pub fn create_account(&self, username: &str, creds: &Credentials) -> Result<(), StoreError> {
        let r = self.conn().execute(
            "INSERT INTO accounts (username, salt, hash, created_at) VALUES (?1, ?2, ?3, ?4)",
            params![username, creds.salt, creds.hash, now_ms()],
        );
        match r {
            Ok(_) => Ok(()),
            Err(rusqlite::Error::SqliteFailure(e, _)) if e.code == rusqlite::ErrorCode::ConstraintViolation => {
                Err(StoreError::Taken(username.into()))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn credentials(&self, username: &str) -> Result<Option<Credentials>, StoreError> {
        Ok(self
            .conn()
            .query_row("SELECT salt, hash FROM accounts WHERE username = ?1", [username], |r| {
                Ok(Credentials { salt: r.get(0)?, hash: r.get(1)? })
            })
            .optional()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> Store {
        Store::open_in_memory().unwrap()
    }

    #[test]
    fn migrations_are_versioned() {
        assert_eq!(store().schema_version().unwrap(), MIGRATIONS.len());
    }

    #[test]
    fn jobs_are_claimed_in_submission_order() {
        let s = store();
        let a = s.enqueue("a", "{}", 10).unwrap();
        let b = s.enqueue("b", "{}", 10).unwrap();
        assert_ne!(a, b);
        let first = s.claim_next().unwrap().unwrap();
        let second = s.claim_next().unwrap().unwrap();
        assert_eq!((first.job.id.as_str(), second.job.id.as_str()), (a.as_str(), b.as_str()));
        assert!(s.claim_next().unwrap().is_none());
    }

    #[test]
    fn terminal_transition_happens_once() {
        let s = store();
        let id = s.enqueue("a", "{}", 10).unwrap();
        let c = s.claim_next().unwrap().unwrap();
        s.finish(&c, Ok("{}")).unwrap();
        let job = s.job(&id).unwrap().unwrap();
        assert_eq!(job.state, JobState::Done);
        assert!(job.finished_at.is_some());
        assert!(matches!(s.finish(&c, Err("again")), Err(StoreError::InvalidTransition { .. })));
    }

    #[test]
    fn stale_claim_cannot_finish_a_requeued_job() {
        let s = store();
        s.enqueue("a", "{}", 10).unwrap();
        let stale = s.claim_next().unwrap().unwrap();
        assert_eq!(s.requeue_running().unwrap(), 1);
        let fresh = s.claim_next().unwrap().unwrap();
        assert!(s.finish(&stale, Ok("{}")).is_err());
        s.finish(&fresh, Ok("{}")).unwrap();
    }

    #[test]
    fn queue_capacity() {
        let s = store();
        s.enqueue("a", "{}", 1).unwrap();
        assert!(matches!(s.enqueue("b", "{}", 1), Err(StoreError::QueueFull(1))));
    }

    #[test]
    fn purge_only_old_finished_jobs() {
        let s = store();
        let done = s.enqueue("a", "{}", 10).unwrap();
        let waiting = s.enqueue("b", "{}", 10).unwrap();
        let c = s.claim_next().unwrap().unwrap();
        s.finish(&c, Ok("{}")).unwrap();
        assert_eq!(s.purge_finished(0).unwrap(), 0);
        assert_eq!(s.purge_finished(now_ms() + 1).unwrap(), 1);
        assert!(s.job(&done).unwrap().is_none());
        assert!(s.job(&waiting).unwrap().is_some());
    }

    #[test]
    fn private_stories_and_sharing() {
        let s = store();
        let rec = s.save_story("ann", &NewStory { title: "t".into(), ..Default::default() }).unwrap();
        assert!(s.list_stories(Scope::Public, None).unwrap().is_empty());
        assert!(matches!(s.load_story(&rec.id, Some("ben")), Err(StoreError::Forbidden)));
        assert!(matches!(s.share_story(&rec.id, "ben"), Err(StoreError::Forbidden)));
        assert!(matches!(s.add_comment(&rec.id, "ben", "hi"), Err(StoreError::NotPublic)));
        s.share_story(&rec.id, "ann").unwrap();
        assert_eq!(s.list_stories(Scope::Public, Some("ben")).unwrap().len(), 1);
        assert_eq!(s.load_story(&rec.id, Some("ben")).unwrap().title, "t");
    }

    #[test]
    fn update_keeps_id_and_checks_owner() {
        let s = store();
        let rec = s.save_story("ann", &NewStory { title: "t".into(), ..Default::default() }).unwrap();
        let upd = NewStory { id: Some(rec.id.clone()), title: "u".into(), ..Default::default() };
        assert_eq!(s.save_story("ann", &upd).unwrap().title, "u");
        assert!(matches!(s.save_story("ben", &upd), Err(StoreError::Forbidden)));
        assert_eq!(s.list_stories(Scope::Mine, Some("ann")).unwrap().len(), 1);
    }

    #[test]
    fn comments_in_order() {
        let s = store();
        let rec = s.save_story("ann", &NewStory { title: "t".into(), ..Default::default() }).unwrap();
        s.share_story(&rec.id, "ann").unwrap();
        s.add_comment(&rec.id, "ben", "first").unwrap();
        s.add_comment(&rec.id, "cat", "second").unwrap();
        let bodies: Vec<String> = s.comments(&rec.id).unwrap().into_iter().map(|c| c.body).collect();
        assert_eq!(bodies, ["first", "second"]);
    }

    #[test]
    fn examples_are_preloaded_once() {
        let s = store();
        s.ensure_example("phone", "a", "b").unwrap();
        s.ensure_example("phone", "a", "b").unwrap();
        let ex = s.list_stories(Scope::Examples, None).unwrap();
        assert_eq!(ex.len(), 1);
        assert!(s.list_stories(Scope::Public, None).unwrap().is_empty());
    }

    #[test]
    fn feedback_is_stored_intact() {
        let s = store();
        assert!(s.add_feedback("  ", None).is_err());
        let long = "x".repeat(10 * 1024);
        let id = s.add_feedback(&long, Some("me@example.org")).unwrap();
        assert_eq!(s.feedback_message(&id).unwrap().unwrap(), long);
    }

    #[test]
    fn usernames_are_unique() {
        let s = store();
        let c = Credentials { salt: "s".into(), hash: "h".into() };
        s.create_account("ann", &c).unwrap();
        assert!(matches!(s.create_account("ann", &c), Err(StoreError::Taken(_))));
        assert_eq!(s.credentials("ann").unwrap(), Some(c));
    }

    #[test]
    fn jobs_survive_reopening() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("star.db");
        let id = {
            let s = Store::open(&path).unwrap();
            let id = s.enqueue("a", "{}", 10).unwrap();
            s.claim_next().unwrap().unwrap();
            id
        };
        let s = Store::open(&path).unwrap();
        assert_eq!(s.requeue_running().unwrap(), 1);
        assert_eq!(s.job(&id).unwrap().unwrap().state, JobState::Queued);
    }
}
