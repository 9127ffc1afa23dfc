//! Accounts, stories, sharing and comments against a throwaway database.

use star_service::auth::{hash_password, verify_password};
use star_service::store::{NewStory, Scope, Store};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path().join("star.db")).unwrap();

    store.create_account("ann", &hash_password("correct horse")).unwrap();
    store.create_account("ben", &hash_password("battery staple")).unwrap();
    let creds = store.credentials("ann").unwrap().unwrap();
    println!("ann signs in: {}", verify_password("correct horse", &creds));

    let draft = NewStory {
        title: "Bob, Mary and the phone".into(),
        story: include_str!("../../core/fixtures/phone_story.star").into(),
        knowledge: include_str!("../../core/fixtures/phone_knowledge.star").into(),
        ..Default::default()
    };
    let saved = store.save_story("ann", &draft).unwrap();
    println!("saved {} as {:?}", saved.id, saved.visibility);
    println!("ben can read it: {}", store.load_story(&saved.id, Some("ben")).is_ok());

    store.share_story(&saved.id, "ann").unwrap();
    store.add_comment(&saved.id, "ben", "The ringing stops at 17.").unwrap();
    for c in store.comments(&saved.id).unwrap() {
        println!("{}: {}", c.author, c.body);
    }
    println!("public stories: {}", store.list_stories(Scope::Public, None).unwrap().len());
}
