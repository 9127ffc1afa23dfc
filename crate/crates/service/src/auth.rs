//! Local accounts with salted SHA-256 credential hashes and HTTP Basic auth.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::store::Credentials;

fn digest(salt: &[u8], password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt);
    h.update(password.as_bytes());
    STANDARD.encode(h.finalize())
}

pub fn hash_password(password: &str) -> Credentials {
    let mut salt = [0u8; 16];
    rand::thread_rng().fill_bytes(&mut salt);
    Credentials { salt: STANDARD.encode(salt), hash: digest(&salt, password) }
}

pub fn verify_password(password: &str, creds: &Credentials) -> bool {
    let Ok(salt) = STANDARD.decode(&creds.salt) else {
        return false;
    };
    let computed = digest(&salt, password);
    computed.len() == creds.hash.len()
        && computed.bytes().zip(creds.hash.bytes()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

/// Splits an `Authorization: Basic ...` header value into user and password.
pub fn parse_basic(header: &str) -> Option<(String, String)> {
    let encoded = header.strip_prefix("Basic ").or_else(|| header.strip_prefix("basic "))?;
    let decoded = String::from_utf8(STANDARD.decode(encoded.trim()).ok()?).ok()?;
    let (user, pass) = decoded.split_once(':')?;
    Some((user.to_string(), pass.to_string()))
}

pub fn basic_header(user: &str, password: &str) -> String {
    format!("Basic {}", STANDARD.encode(format!("{user}:{password}")))
}

pub fn valid_username(name: &str) -> bool {
    (3..=32).contains(&name.len())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && name != crate::store::EXAMPLES_OWNER
}

/// Sign-in through a third-party identity provider. No provider is wired
/// in; the HTTP layer answers 501 for every provider name.
pub trait DelegatedLogin: Send + Sync {
    fn provider(&self) -> &str;
    fn authorize_url(&self, state: &str) -> String;
}
