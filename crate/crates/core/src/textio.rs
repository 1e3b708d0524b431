//! Line-oriented reader shared by the text formats.

use crate::error::{Error, Result};

pub(crate) struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable(), last: 0 }
    }

    /// Next non-blank, non-comment line, split into whitespace tokens.
    pub(crate) fn next_tokens(&mut self) -> Result<Vec<&'a str>> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok(line.split_whitespace().collect());
        }
        Err(Error::parse(self.last + 1, "unexpected end of input"))
    }

    /// Next line, which must start with `keyword`; returns the remaining tokens.
    pub(crate) fn expect(&mut self, keyword: &str) -> Result<Vec<&'a str>> {
        let tokens = self.next_tokens()?;
        if tokens.first() != Some(&keyword) {
            return Err(self.error(format!("expected `{keyword}`, found `{}`", tokens.join(" "))));
        }
        Ok(tokens[1..].to_vec())
    }

    pub(crate) fn line(&self) -> usize {
        self.last
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.last, msg)
    }

    pub(crate) fn parse<T: std::str::FromStr>(&self, token: &str) -> Result<T> {
        token.parse().map_err(|_| self.error(format!("cannot parse `{token}`")))
    }
}

/// Shortest decimal form that reads back bit-exactly (17 significant digits).
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
