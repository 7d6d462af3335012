//! Entity annotation behind a pluggable interface.
//!
//! [`OfflineAnnotator`] treats maximal runs of capitalized words as
//! entities. [`RemoteAnnotator`] queries a TAGME-style HTTP service and can
//! fall back to the offline rule when the service is unreachable.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::tokenize::strip_edges;
use super::FeatureError;
use crate::corpus::{Argument, PropositionNode};

/// Environment variable holding the remote annotator's API key.
pub const TAGME_KEY_ENV: &str = "ARGSTRUCT_TAGME_KEY";
pub const DEFAULT_TAGME_ENDPOINT: &str = "https://tagme.d4science.org/tagme/tag";

/// Entity key -> occurrence count for one node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityAnnotation(pub BTreeMap<String, u32>);

impl EntityAnnotation {
    pub fn add(&mut self, key: impl Into<String>) {
        *self.0.entry(key.into()).or_insert(0) += 1;
    }

    pub fn get(&self, key: &str) -> u32 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>> FromIterator<(K, u32)> for EntityAnnotation {
    fn from_iter<I: IntoIterator<Item = (K, u32)>>(iter: I) -> Self {
        EntityAnnotation(
            iter.into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(k, c)| (k.into(), c))
                .collect(),
        )
    }
}

/// Inner product of the two count vectors.
pub fn entity_overlap(text: &EntityAnnotation, hyp: &EntityAnnotation) -> f64 {
    text.0
        .iter()
        .map(|(k, &c)| f64::from(c) * f64::from(hyp.get(k)))
        .sum()
}

pub trait EntityAnnotator: Send + Sync {
    fn annotate(&self, text: &str) -> Result<EntityAnnotation, FeatureError>;

    /// Name recorded in caches and reports.
    fn name(&self) -> &str;
}

pub fn annotate_entities(
    node: &PropositionNode,
    annotator: &dyn EntityAnnotator,
) -> Result<EntityAnnotation, FeatureError> {
    annotator.annotate(&node.text)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OfflineAnnotator;

impl EntityAnnotator for OfflineAnnotator {
    fn annotate(&self, text: &str) -> Result<EntityAnnotation, FeatureError> {
        Ok(capitalized_runs(text))
    }

    fn name(&self) -> &str {
        "offline"
    }
}

/// Maximal runs of capitalized words; trailing punctuation ends a run.
pub fn capitalized_runs(text: &str) -> EntityAnnotation {
    let mut out = EntityAnnotation::default();
    let mut run: Vec<&str> = Vec::new();
    let flush = |run: &mut Vec<&str>, out: &mut EntityAnnotation| {
        if !run.is_empty() {
            out.add(run.join(" ").to_lowercase());
            run.clear();
        }
    };
    for raw in text.split_whitespace() {
        let core = strip_edges(raw);
        let capitalized = core.chars().next().is_some_and(char::is_uppercase);
        let leading = !raw.starts_with(core);
        let trailing = !raw.ends_with(core);
        if !capitalized {
            flush(&mut run, &mut out);
            continue;
        }
        if leading {
            flush(&mut run, &mut out);
        }
        run.push(core);
        if trailing {
            flush(&mut run, &mut out);
        }
    }
    flush(&mut run, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    /// Fall back to the offline rule on transport failure instead of erroring.
    pub fallback: bool,
    pub timeout: Duration,
    /// Annotations below this link probability are dropped.
    pub min_rho: f64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: DEFAULT_TAGME_ENDPOINT.to_owned(),
            api_key: std::env::var(TAGME_KEY_ENV).ok(),
            fallback: true,
            timeout: Duration::from_secs(10),
            min_rho: 0.0,
        }
    }
}

/// HTTP client for a TAGME-compatible service.
///
/// Requests go out one at a time; the service is rate-limited.
pub struct RemoteAnnotator {
    config: RemoteConfig,
    agent: Mutex<ureq::Agent>,
}

#[derive(Deserialize)]
struct TagmeResponse {
    #[serde(default)]
    annotations: Vec<TagmeAnnotation>,
}

#[derive(Deserialize)]
struct TagmeAnnotation {
    title: Option<String>,
    #[serde(default = "one")]
    rho: f64,
}

fn one() -> f64 {
    1.0
}

impl RemoteAnnotator {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        RemoteAnnotator {
            config,
            agent: Mutex::new(agent),
        }
    }

    fn query(&self, text: &str) -> Result<EntityAnnotation, FeatureError> {
        let agent = self.agent.lock().unwrap_or_else(|e| e.into_inner());
        let mut request = agent
            .get(&self.config.endpoint)
            .query("text", text)
            .query("lang", "en");
        if let Some(key) = &self.config.api_key {
            request = request.query("gcube-token", key);
        }
        let body = request
            .call()
            .map_err(|e| FeatureError::Annotator(e.to_string()))?
            .body_mut()
            .read_to_string()
            .map_err(|e| FeatureError::Annotator(e.to_string()))?;
        let parsed: TagmeResponse = serde_json::from_str(&body)
            .map_err(|e| FeatureError::Annotator(format!("bad response: {e}")))?;
        let mut out = EntityAnnotation::default();
        for a in parsed.annotations {
            if let Some(title) = a.title {
                if a.rho >= self.config.min_rho {
                    out.add(title.to_lowercase());
                }
            }
        }
        Ok(out)
    }
}

impl EntityAnnotator for RemoteAnnotator {
    fn annotate(&self, text: &str) -> Result<EntityAnnotation, FeatureError> {
        match self.query(text) {
            Ok(a) => Ok(a),
            Err(e) if self.config.fallback => {
                log::warn!("remote annotator failed ({e}); using offline entities");
                Ok(capitalized_runs(text))
            }
            Err(e) => Err(e),
        }
    }

    fn name(&self) -> &str {
        "remote"
    }
}

/// Memoizes another annotator by node text. Safe to share across threads.
pub struct CachedAnnotator<A> {
    inner: A,
    cache: Mutex<HashMap<String, EntityAnnotation>>,
}

impl<A: EntityAnnotator> CachedAnnotator<A> {
    pub fn new(inner: A) -> Self {
        CachedAnnotator {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }
}

impl<A: EntityAnnotator> EntityAnnotator for CachedAnnotator<A> {
    fn annotate(&self, text: &str) -> Result<EntityAnnotation, FeatureError> {
        if let Some(hit) = self
            .cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(text)
        {
            return Ok(hit.clone());
        }
        let fresh = self.inner.annotate(text)?;
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(text.to_owned(), fresh.clone());
        Ok(fresh)
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}

/// Precomputed annotations for a corpus: argument id -> node id -> entities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityCache {
    pub annotator: String,
    pub arguments: BTreeMap<String, BTreeMap<String, EntityAnnotation>>,
}

impl EntityCache {
    pub fn build(
        corpus: &[Argument],
        annotator: &dyn EntityAnnotator,
    ) -> Result<Self, FeatureError> {
        let mut arguments = BTreeMap::new();
        for arg in corpus {
            let mut nodes = BTreeMap::new();
            for node in &arg.nodes {
                nodes.insert(node.id.clone(), annotate_entities(node, annotator)?);
            }
            arguments.insert(arg.id.clone(), nodes);
        }
        Ok(EntityCache {
            annotator: annotator.name().to_owned(),
            arguments,
        })
    }

    pub fn get(&self, argument: &str, node: &str) -> Option<&EntityAnnotation> {
        self.arguments.get(argument)?.get(node)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| FeatureError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("entity cache serializes");
        fs::write(path, text).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn ann(pairs: &[(&str, u32)]) -> EntityAnnotation {
        pairs.iter().map(|(k, c)| (*k, *c)).collect()
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(
            entity_overlap(&ann(&[("labor", 2), ("bracks", 1)]), &ann(&[("labor", 1)])),
            2.
        );
        assert_eq!(entity_overlap(&ann(&[("a", 1)]), &ann(&[("b", 1)])), 0.);
        assert_eq!(entity_overlap(&ann(&[("e", 3)]), &ann(&[("e", 3)])), 9.);
    }

    #[test]
    fn overlap_is_symmetric_and_linear() {
        let a = ann(&[("x", 2), ("y", 5), ("z", 1)]);
        let b = ann(&[("x", 3), ("z", 4), ("w", 7)]);
        assert_eq!(entity_overlap(&a, &b), entity_overlap(&b, &a));
        let doubled: EntityAnnotation = a.0.iter().map(|(k, c)| (k.clone(), c * 2)).collect();
        assert_eq!(entity_overlap(&doubled, &b), 2. * entity_overlap(&a, &b));
    }

    #[test]
    fn offline_runs() {
        let a = OfflineAnnotator
            .annotate("Steve Bracks backed Labor. Labor won.")
            .unwrap();
        assert_eq!(a, ann(&[("steve bracks", 1), ("labor", 2)]));
        assert!(OfflineAnnotator
            .annotate("all lower case here")
            .unwrap()
            .is_empty());
        let node = PropositionNode::new("n", "we visit New York, then Paris");
        assert_eq!(
            annotate_entities(&node, &OfflineAnnotator).unwrap(),
            ann(&[("new york", 1), ("paris", 1)])
        );
    }

    /// Serves `body` to every request on a local port, counting hits.
    fn serve(body: &'static str) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let mut stream = stream.unwrap();
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                counter.fetch_add(1, Ordering::SeqCst);
                let reply = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        (format!("http://{addr}/tag"), hits)
    }

    fn remote(endpoint: String, fallback: bool) -> RemoteAnnotator {
        RemoteAnnotator::new(RemoteConfig {
            endpoint,
            api_key: Some("k".into()),
            fallback,
            timeout: Duration::from_secs(5),
            min_rho: 0.1,
        })
    }

    #[test]
    fn remote_titles_are_parsed() {
        let (url, _) = serve(
            r#"{"annotations": [{"title": "Steve Bracks", "rho": 0.5},
                                {"title": "Labor", "rho": 0.3},
                                {"title": "Noise", "rho": 0.01},
                                {"spot": "untitled"}]}"#,
        );
        let a = remote(url, false)
            .annotate("Steve Bracks backed Labor")
            .unwrap();
        assert_eq!(a, ann(&[("steve bracks", 1), ("labor", 1)]));
    }

    fn closed_port() -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        format!("http://{addr}/tag")
    }

    #[test]
    fn remote_failure_falls_back() {
        let a = remote(closed_port(), true).annotate("Visit Paris").unwrap();
        assert_eq!(a, ann(&[("visit paris", 1)]));
        assert!(matches!(
            remote(closed_port(), false).annotate("Visit Paris"),
            Err(FeatureError::Annotator(_))
        ));
    }

    #[test]
    fn cache_avoids_repeat_queries() {
        let (url, hits) = serve(r#"{"annotations": [{"title": "Paris"}]}"#);
        let cached = CachedAnnotator::new(remote(url, false));
        for _ in 0..3 {
            assert_eq!(cached.annotate("Paris").unwrap(), ann(&[("paris", 1)]));
        }
        assert_eq!(hits.load(Ordering::SeqCst), 1);
        assert_eq!(cached.cached(), 1);
    }

    #[test]
    fn corpus_cache_round_trip() {
        let arg = crate::corpus::tests::fig1();
        let cache = EntityCache::build(std::slice::from_ref(&arg), &OfflineAnnotator).unwrap();
        assert_eq!(cache.get("9", "271").unwrap(), &ann(&[("steve bracks", 1)]));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("entities.json");
        cache.save(&path).unwrap();
        assert_eq!(EntityCache::load(&path).unwrap(), cache);
    }
}
