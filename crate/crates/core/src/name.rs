use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

/// An interned-by-refcount identifier: type names, field roles, variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with trailing primes and digits removed, so that `bid'`,
    /// `x1` and `int2` all map back to their base type.
    pub fn base(&self) -> Name {
        let trimmed = self.0.trim_end_matches(|c: char| c == '\'' || c.is_ascii_digit());
        if trimmed.is_empty() || trimmed.len() == self.0.len() {
            self.clone()
        } else {
            Name::new(trimmed)
        }
    }

    /// The name with only trailing primes removed.
    pub fn unprimed(&self) -> Name {
        let trimmed = self.0.trim_end_matches('\'');
        if trimmed.len() == self.0.len() || trimmed.is_empty() {
            self.clone()
        } else {
            Name::new(trimmed)
        }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl Deref for Name {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_strips_primes_and_digits() {
        assert_eq!(Name::new("bid'").base().as_str(), "bid");
        assert_eq!(Name::new("x1").base().as_str(), "x");
        assert_eq!(Name::new("min-price-of'").base().as_str(), "min-price-of");
        assert_eq!(Name::new("int2").base().as_str(), "int");
        assert_eq!(Name::new("42").base().as_str(), "42");
        assert_eq!(Name::new("auctioneer'").unprimed().as_str(), "auctioneer");
    }
}
