//! Content-addressed object store and right-metadata documents.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hash::{canonical_json, sha256, Hash32};
use crate::token::TokenId;

const CID_PREFIX: &str = "cidv0-sha256:";

/// Content identifier: SHA-256 of the stored bytes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cid(pub Hash32);

impl Cid {
    pub fn of(bytes: &[u8]) -> Cid {
        Cid(sha256(bytes))
    }

    pub fn digest(&self) -> &Hash32 {
        &self.0
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{CID_PREFIX}{}", self.0)
    }
}

impl fmt::Debug for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cid({self})")
    }
}

impl FromStr for Cid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix(CID_PREFIX)
            .ok_or_else(|| Error::Parse(format!("cid `{s}` must start with {CID_PREFIX}")))?;
        if body.len() != 64 || body.chars().any(|c| c.is_ascii_uppercase()) {
            return Err(Error::Parse(format!("cid `{s}` needs 64 lowercase hex chars")));
        }
        Ok(Cid(body.parse()?))
    }
}

impl Serialize for Cid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Append-only in-memory object store keyed by [`Cid`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectStore {
    objects: BTreeMap<Cid, Vec<u8>>,
}

impl ObjectStore {
    pub fn put(&mut self, bytes: &[u8]) -> Result<Cid> {
        if bytes.is_empty() {
            return Err(Error::EmptyObject);
        }
        let cid = Cid::of(bytes);
        self.objects.entry(cid).or_insert_with(|| bytes.to_vec());
        Ok(cid)
    }

    pub fn get(&self, cid: &Cid) -> Result<&[u8]> {
        self.objects
            .get(cid)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::NotFound(cid.to_string()))
    }

    pub fn contains(&self, cid: &Cid) -> bool {
        self.objects.contains_key(cid)
    }

    pub fn cids(&self) -> impl Iterator<Item = &Cid> {
        self.objects.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cid, &[u8])> {
        self.objects.iter().map(|(c, b)| (c, b.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Inserts bytes claimed to live at `cid`, checking the claim.
    pub fn insert_verified(&mut self, cid: Cid, bytes: Vec<u8>) -> Result<()> {
        if Cid::of(&bytes) != cid {
            return Err(Error::CorruptSnapshot);
        }
        self.objects.insert(cid, bytes);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRef {
    pub name: String,
    pub description: String,
    pub link: String,
}

/// Metadata describing one property right. Unknown top-level fields are
/// carried through to the stored document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RightMetadata {
    pub name_of_right: String,
    pub description: String,
    pub documents: Vec<DocumentRef>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RightMetadata {
    pub fn new(name_of_right: impl Into<String>, description: impl Into<String>, documents: Vec<DocumentRef>) -> Self {
        RightMetadata {
            name_of_right: name_of_right.into(),
            description: description.into(),
            documents,
            extra: BTreeMap::new(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("right metadata: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name_of_right.is_empty() {
            return Err(Error::EmptyObject);
        }
        if self.documents.iter().any(|d| d.link.is_empty()) {
            return Err(Error::InvalidDocumentLink);
        }
        Ok(())
    }

    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        canonical_json(self)
    }
}

/// Validates `meta`, stores its canonical JSON and returns the Cid.
pub fn build_right_metadata(store: &mut ObjectStore, meta: &RightMetadata) -> Result<Cid> {
    meta.validate()?;
    store.put(&meta.canonical_bytes()?)
}

/// Substitutes every `{id}` in `base_uri` with the 64-char hex of `id`.
pub fn resolve_uri(base_uri: &str, id: &TokenId) -> Result<String> {
    if !base_uri.contains("{id}") {
        return Err(Error::MissingPlaceholder);
    }
    Ok(base_uri.replace("{id}", &id.to_hex()))
}
