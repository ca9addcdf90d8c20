//! Endpoint descriptions and the generic paginated-HTTP list provider.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::archive::{load_archive, AccountId, AccountProfile, ArchiveError};
use super::client::{ClientError, FixtureClient, ListKind, ListProvider, Page};

#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    #[error("endpoint description: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("endpoint description i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture archive: {0}")]
    Fixture(#[from] ArchiveError),
    #[error("environment variable {0} holding the API token is not set")]
    MissingToken(String),
    #[error("http support was not compiled in")]
    HttpDisabled,
}

/// Contents of an endpoint-description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EndpointDescription {
    /// Replay a stored archive; `archive` is relative to the description file.
    Fixture {
        archive: PathBuf,
        #[serde(default = "default_fixture_page")]
        page_size: usize,
    },
    Http(HttpEndpoint),
}

fn default_fixture_page() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpEndpoint {
    pub base_url: String,
    /// Name of the environment variable carrying the API token.
    pub token_env: String,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    /// Header value template; `{token}` is substituted.
    #[serde(default = "default_auth_template")]
    pub auth_template: String,
    /// Path templates; `{handle}` and `{id}` are substituted.
    pub resolve_path: String,
    pub followers_path: String,
    pub followees_path: String,
    pub lookup_path: String,
    #[serde(default = "default_lookup_param")]
    pub lookup_ids_param: String,
    #[serde(default = "default_lookup_batch")]
    pub lookup_batch: usize,
    pub page_size_param: String,
    pub page_size: usize,
    pub cursor_param: String,
    #[serde(default)]
    pub response: ResponseShape,
}

fn default_auth_header() -> String {
    "Authorization".into()
}
fn default_auth_template() -> String {
    "Bearer {token}".into()
}
fn default_lookup_param() -> String {
    "ids".into()
}
fn default_lookup_batch() -> usize {
    100
}

/// Where fields live in response bodies, as JSON pointers and field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseShape {
    pub profile_pointer: String,
    pub items_pointer: String,
    pub next_pointer: String,
    pub id_field: String,
    pub handle_field: String,
    pub bio_field: String,
    pub location_field: String,
    pub url_field: String,
}

impl Default for ResponseShape {
    fn default() -> Self {
        ResponseShape {
            profile_pointer: "/data".into(),
            items_pointer: "/data".into(),
            next_pointer: "/meta/next_token".into(),
            id_field: "id".into(),
            handle_field: "username".into(),
            bio_field: "description".into(),
            location_field: "location".into(),
            url_field: "url".into(),
        }
    }
}

impl ResponseShape {
    fn profile(&self, value: &serde_json::Value) -> Option<AccountProfile> {
        let text = |field: &str| {
            value
                .get(field)
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string()
        };
        let id = match value.get(&self.id_field)? {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            _ => return None,
        };
        Some(AccountProfile {
            id: AccountId::new(id).ok()?,
            handle: text(&self.handle_field),
            bio: text(&self.bio_field),
            declared_location: text(&self.location_field),
            url: text(&self.url_field),
            protected: false,
        })
    }
}

impl EndpointDescription {
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf), EndpointError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let desc: EndpointDescription = toml::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((desc, base))
    }

    /// Build the provider this description names. `base` resolves relative fixture paths.
    pub fn connect(&self, base: &Path) -> Result<Box<dyn ListProvider>, EndpointError> {
        match self {
            EndpointDescription::Fixture { archive, page_size } => {
                let archive = load_archive(base.join(archive))?;
                Ok(Box::new(
                    FixtureClient::from_archive(&archive).with_page_size((*page_size).max(1)),
                ))
            }
            #[cfg(feature = "http")]
            EndpointDescription::Http(endpoint) => {
                let token = std::env::var(&endpoint.token_env)
                    .map_err(|_| EndpointError::MissingToken(endpoint.token_env.clone()))?;
                Ok(Box::new(HttpClient::new(endpoint.clone(), token)))
            }
            #[cfg(not(feature = "http"))]
            EndpointDescription::Http(_) => Err(EndpointError::HttpDisabled),
        }
    }
}

fn fill(template: &str, key: &str, value: &str) -> String {
    template.replace(&format!("{{{key}}}"), value)
}

/// Paginated JSON-over-HTTP list provider.
#[cfg(feature = "http")]
pub struct HttpClient {
    endpoint: HttpEndpoint,
    auth_value: String,
    agent: ureq::Agent,
}

#[cfg(feature = "http")]
impl HttpClient {
    pub fn new(endpoint: HttpEndpoint, token: String) -> Self {
        let auth_value = fill(&endpoint.auth_template, "token", &token);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient {
            endpoint,
            auth_value,
            agent,
        }
    }

    /// Issues a GET; `Ok(Err(status))` carries an access-denied status (401/403).
    fn get(
        &self,
        path: &str,
        query: &[(&str, String)],
    ) -> Result<Result<serde_json::Value, u16>, ClientError> {
        let url = format!("{}{}", self.endpoint.base_url.trim_end_matches('/'), path);
        let mut req = self
            .agent
            .get(&url)
            .header(self.endpoint.auth_header.as_str(), self.auth_value.as_str());
        for (k, v) in query {
            req = req.query(*k, v);
        }
        let resp = req
            .call()
            .map_err(|e| ClientError::Transient(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => resp
                .into_body()
                .read_json::<serde_json::Value>()
                .map(Ok)
                .map_err(|e| ClientError::Transient(format!("{url}: unreadable body: {e}"))),
            404 => Err(ClientError::NotFound(url)),
            401 | 403 => Ok(Err(status)),
            429 | 500..=599 => Err(ClientError::Transient(format!("{url}: status {status}"))),
            _ => Err(ClientError::Fatal(format!("{url}: status {status}"))),
        }
    }
}

#[cfg(feature = "http")]
impl ListProvider for HttpClient {
    fn resolve(&self, handle: &str) -> Result<AccountProfile, ClientError> {
        let path = fill(&self.endpoint.resolve_path, "handle", handle.trim_start_matches('@'));
        let body = self
            .get(&path, &[])?
            .map_err(|status| ClientError::Fatal(format!("{path}: status {status}")))?;
        let shape = &self.endpoint.response;
        body.pointer(&shape.profile_pointer)
            .and_then(|v| shape.profile(v))
            .ok_or_else(|| ClientError::NotFound(handle.to_string()))
    }

    fn list_page(
        &self,
        account: &AccountId,
        kind: ListKind,
        cursor: Option<&str>,
    ) -> Result<Page, ClientError> {
        let template = match kind {
            ListKind::Followers => &self.endpoint.followers_path,
            ListKind::Followees => &self.endpoint.followees_path,
        };
        let path = fill(template, "id", account.as_str());
        let mut query = vec![(
            self.endpoint.page_size_param.as_str(),
            self.endpoint.page_size.to_string(),
        )];
        if let Some(c) = cursor {
            query.push((self.endpoint.cursor_param.as_str(), c.to_string()));
        }
        let body = self
            .get(&path, &query)?
            .map_err(|_| ClientError::Protected(account.clone()))?;
        let shape = &self.endpoint.response;
        let items = match body.pointer(&shape.items_pointer) {
            Some(serde_json::Value::Array(items)) => items.as_slice(),
            None | Some(serde_json::Value::Null) => &[],
            Some(_) => return Err(ClientError::Transient(format!("{path}: items are not an array"))),
        };
        let mut ids = Vec::with_capacity(items.len());
        for item in items {
            let p = shape
                .profile(item)
                .ok_or_else(|| ClientError::Transient(format!("{path}: item without id")))?;
            ids.push(p.id);
        }
        let next = body
            .pointer(&shape.next_pointer)
            .and_then(|v| v.as_str())
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        Ok(Page { ids, next })
    }

    fn lookup_profiles(&self, ids: &[AccountId]) -> Result<Vec<AccountProfile>, ClientError> {
        let joined = ids.iter().map(AccountId::as_str).collect::<Vec<_>>().join(",");
        let body = self.get(
            &self.endpoint.lookup_path,
            &[(self.endpoint.lookup_ids_param.as_str(), joined)],
        )?
        .map_err(|status| ClientError::Fatal(format!("profile lookup: status {status}")))?;
        let shape = &self.endpoint.response;
        Ok(match body.pointer(&shape.items_pointer) {
            Some(serde_json::Value::Array(items)) => {
                items.iter().filter_map(|v| shape.profile(v)).collect()
            }
            _ => Vec::new(),
        })
    }

    fn lookup_batch_size(&self) -> usize {
        self.endpoint.lookup_batch.max(1)
    }
}
