use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// How an evaluation ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResKind {
    Success,
    Fail,
    Error,
}

impl ResKind {
    pub const ALL: [ResKind; 3] = [ResKind::Success, ResKind::Fail, ResKind::Error];
}

impl fmt::Display for ResKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResKind::Success => "success",
            ResKind::Fail => "fail",
            ResKind::Error => "error",
        })
    }
}

impl FromStr for ResKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "success" => Ok(ResKind::Success),
            "fail" => Ok(ResKind::Fail),
            "error" => Ok(ResKind::Error),
            other => Err(format!("unknown result kind `{other}`")),
        }
    }
}
