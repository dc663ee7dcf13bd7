use std::fmt;

use serde::{Deserialize, Serialize};

/// Country code as it appears on a publication byline (ISO 3166 alpha-2 in
/// practice; any token without whitespace or `|` is accepted).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Country(String);

impl Country {
    pub fn new(code: impl Into<String>) -> Self {
        Country(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn is_valid_code(code: &str) -> bool {
        !code.is_empty() && !code.contains(|c: char| c.is_whitespace() || c == '|')
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Country {
    fn from(s: &str) -> Self {
        Country::new(s)
    }
}

impl AsRef<str> for Country {
    fn as_ref(&self) -> &str {
        &self.0
    }
}
