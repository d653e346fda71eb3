use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// One of the 35 width-10 NLOC bands covering `1..=350`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Stratum(u8);

impl Stratum {
    pub const COUNT: usize = 35;
    pub const WIDTH: usize = 10;
    pub const MAX_NLOC: usize = Self::COUNT * Self::WIDTH;

    pub fn new(index: usize) -> Result<Self, CorpusError> {
        if index < Self::COUNT {
            Ok(Self(index as u8))
        } else {
            Err(CorpusError::StratumOutOfRange(index))
        }
    }

    pub fn for_nloc(nloc: usize) -> Result<Self, CorpusError> {
        if (1..=Self::MAX_NLOC).contains(&nloc) {
            Ok(Self(((nloc - 1) / Self::WIDTH) as u8))
        } else {
            Err(CorpusError::NlocOutOfRange(nloc))
        }
    }

    pub fn all() -> impl Iterator<Item = Stratum> {
        (0..Self::COUNT as u8).map(Stratum)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lower(self) -> usize {
        Self::WIDTH * self.index() + 1
    }

    pub fn upper(self) -> usize {
        Self::WIDTH * self.index() + Self::WIDTH
    }

    pub fn contains(self, nloc: usize) -> bool {
        (self.lower()..=self.upper()).contains(&nloc)
    }
}

impl TryFrom<u8> for Stratum {
    type Error = CorpusError;

    fn try_from(index: u8) -> Result<Self, Self::Error> {
        Self::new(index as usize)
    }
}

impl From<Stratum> for u8 {
    fn from(s: Stratum) -> Self {
        s.0
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lower(), self.upper())
    }
}
