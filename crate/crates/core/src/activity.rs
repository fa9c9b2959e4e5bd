use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Number of activity classes.
pub const NUM_CLASSES: usize = 7;

/// The fixed activity vocabulary. The declaration order is the class order
/// used by every posterior vector and confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityClass {
    Walking,
    Sitting,
    Standing,
    Jogging,
    Biking,
    Upstairs,
    Downstairs,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; NUM_CLASSES] = [
        ActivityClass::Walking,
        ActivityClass::Sitting,
        ActivityClass::Standing,
        ActivityClass::Jogging,
        ActivityClass::Biking,
        ActivityClass::Upstairs,
        ActivityClass::Downstairs,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivityClass::Walking => "walking",
            ActivityClass::Sitting => "sitting",
            ActivityClass::Standing => "standing",
            ActivityClass::Jogging => "jogging",
            ActivityClass::Biking => "biking",
            ActivityClass::Upstairs => "upstairs",
            ActivityClass::Downstairs => "downstairs",
        }
    }
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivityClass {
    type Err = Error;

    /// Case-insensitive; underscores, dashes and spaces are ignored so that
    /// `walking_upstairs`-style spellings of the two stair classes also parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut buf = [0u8; 32];
        let mut len = 0;
        for b in s.trim().bytes() {
            if b == b'_' || b == b'-' || b == b' ' {
                continue;
            }
            if len == buf.len() {
                return Err(Error::UnknownActivity(s.into()));
            }
            buf[len] = b.to_ascii_lowercase();
            len += 1;
        }
        match &buf[..len] {
            b"walking" | b"walk" => Ok(ActivityClass::Walking),
            b"sitting" | b"sit" => Ok(ActivityClass::Sitting),
            b"standing" | b"stand" => Ok(ActivityClass::Standing),
            b"jogging" | b"jog" => Ok(ActivityClass::Jogging),
            b"biking" | b"bike" => Ok(ActivityClass::Biking),
            b"upstairs" | b"walkingupstairs" => Ok(ActivityClass::Upstairs),
            b"downstairs" | b"walkingdownstairs" => Ok(ActivityClass::Downstairs),
            _ => Err(Error::UnknownActivity(s.into())),
        }
    }
}

/// Sensor placement on the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyPosition {
    Arm,
    Waist,
    Wrist,
}

impl BodyPosition {
    pub const ALL: [BodyPosition; 3] = [BodyPosition::Arm, BodyPosition::Waist, BodyPosition::Wrist];

    pub fn name(self) -> &'static str {
        match self {
            BodyPosition::Arm => "arm",
            BodyPosition::Waist => "waist",
            BodyPosition::Wrist => "wrist",
        }
    }
}

impl fmt::Display for BodyPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BodyPosition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            x if x.eq_ignore_ascii_case("arm") => Ok(BodyPosition::Arm),
            x if x.eq_ignore_ascii_case("waist") => Ok(BodyPosition::Waist),
            x if x.eq_ignore_ascii_case("wrist") => Ok(BodyPosition::Wrist),
            _ => Err(Error::UnknownPosition(s.into())),
        }
    }
}
