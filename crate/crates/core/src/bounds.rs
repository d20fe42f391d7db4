use std::fmt;

use thiserror::Error;

/// Resource caps shared by every bounded search in the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub max_steps: usize,
    pub max_term_size: usize,
    pub max_inst_depth: usize,
    pub max_congr_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_steps: 10_000, max_term_size: 5_000, max_inst_depth: 3, max_congr_depth: 6 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("unknown bound `{0}` (expected maxSteps, maxTermSize, maxInstDepth or maxCongrDepth)")]
    UnknownKey(String),
    #[error("bound `{key}` needs a non-negative integer, got `{value}`")]
    BadValue { key: String, value: String },
    #[error("bound `{0}` must be strictly positive")]
    NotPositive(&'static str),
    #[error("bound override `{0}` is not of the form key=value")]
    Malformed(String),
}

impl Bounds {
    /// Step and size caps must be positive. The two depth caps may be zero,
    /// which turns the corresponding searches into trivial ones.
    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.max_steps == 0 {
            return Err(BoundsError::NotPositive("maxSteps"));
        }
        if self.max_term_size == 0 {
            return Err(BoundsError::NotPositive("maxTermSize"));
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), BoundsError> {
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| BoundsError::BadValue { key: key.to_string(), value: value.to_string() })?;
        match key.trim() {
            "maxSteps" | "max_steps" => self.max_steps = n,
            "maxTermSize" | "max_term_size" => self.max_term_size = n,
            "maxInstDepth" | "max_inst_depth" => self.max_inst_depth = n,
            "maxCongrDepth" | "max_congr_depth" => self.max_congr_depth = n,
            other => return Err(BoundsError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order, then validates.
    pub fn with_overrides<'a, I>(mut self, items: I) -> Result<Bounds, BoundsError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        for item in items {
            for part in item.split(',').filter(|p| !p.trim().is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(|| BoundsError::Malformed(part.to_string()))?;
                self.set(k, v)?;
            }
        }
        self.validate()?;
        Ok(self)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "maxSteps={} maxTermSize={} maxInstDepth={} maxCongrDepth={}",
            self.max_steps, self.max_term_size, self.max_inst_depth, self.max_congr_depth
        )
    }
}
