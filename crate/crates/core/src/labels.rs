//! Object, room and confidence vocabularies shared by compositing, the study
//! protocol and scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight object categories subjects are asked about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectClass {
    #[serde(rename = "sink")]
    Sink,
    #[serde(rename = "refrigerator")]
    Refrigerator,
    #[serde(rename = "oven/microwave")]
    OvenMicrowave,
    #[serde(rename = "table")]
    Table,
    #[serde(rename = "chair")]
    Chair,
    #[serde(rename = "tv/laptop")]
    TvLaptop,
    #[serde(rename = "bed")]
    Bed,
    #[serde(rename = "couch")]
    Couch,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 8] = [
        ObjectClass::Sink,
        ObjectClass::Refrigerator,
        ObjectClass::OvenMicrowave,
        ObjectClass::Table,
        ObjectClass::Chair,
        ObjectClass::TvLaptop,
        ObjectClass::Bed,
        ObjectClass::Couch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Sink => "sink",
            ObjectClass::Refrigerator => "refrigerator",
            ObjectClass::OvenMicrowave => "oven/microwave",
            ObjectClass::Table => "table",
            ObjectClass::Chair => "chair",
            ObjectClass::TvLaptop => "tv/laptop",
            ObjectClass::Bed => "bed",
            ObjectClass::Couch => "couch",
        }
    }

    /// Detector labels (COCO naming) that map onto each study class.
    pub fn detector_aliases(self) -> &'static [&'static str] {
        match self {
            ObjectClass::Sink => &["sink"],
            ObjectClass::Refrigerator => &["refrigerator", "fridge"],
            ObjectClass::OvenMicrowave => &["oven/microwave", "oven", "microwave"],
            ObjectClass::Table => &["table", "dining table"],
            ObjectClass::Chair => &["chair"],
            ObjectClass::TvLaptop => &["tv/laptop", "tv", "tvmonitor", "laptop"],
            ObjectClass::Bed => &["bed"],
            ObjectClass::Couch => &["couch", "sofa"],
        }
    }

    /// Resolves a detector or study label, case-insensitively.
    pub fn from_label(label: &str) -> Option<Self> {
        let label = label.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|c| c.detector_aliases().contains(&label.as_str()))
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Room types, in the row/column order of the confusion matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Room {
    Bedroom,
    Kitchen,
    DiningRoom,
    LivingRoom,
}

impl Room {
    pub const ALL: [Room; 4] = [Room::Bedroom, Room::Kitchen, Room::DiningRoom, Room::LivingRoom];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Room::Bedroom => "Bedroom",
            Room::Kitchen => "Kitchen",
            Room::DiningRoom => "Dining room",
            Room::LivingRoom => "Living room",
        }
    }
}

impl fmt::Display for Room {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Five-point confidence rating, from definitely-yes to definitely-no.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Likert {
    #[serde(rename = "DY")]
    DefinitelyYes,
    #[serde(rename = "PY")]
    ProbablyYes,
    #[serde(rename = "M")]
    Maybe,
    #[serde(rename = "PN")]
    ProbablyNo,
    #[serde(rename = "DN")]
    DefinitelyNo,
}

impl Likert {
    pub const ALL: [Likert; 5] = [
        Likert::DefinitelyYes,
        Likert::ProbablyYes,
        Likert::Maybe,
        Likert::ProbablyNo,
        Likert::DefinitelyNo,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Likert::DefinitelyYes => "DY",
            Likert::ProbablyYes => "PY",
            Likert::Maybe => "M",
            Likert::ProbablyNo => "PN",
            Likert::DefinitelyNo => "DN",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Likert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Which iconic representation (or none) a frame is rendered from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Raw luminance, no scene processing.
    #[serde(rename = "direct")]
    Direct,
    /// Object silhouettes only.
    #[serde(rename = "om")]
    Om,
    /// Structural edges superimposed on object silhouettes.
    #[serde(rename = "sie-om")]
    SieOm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Om => "om",
            Method::SieOm => "sie-om",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::Direct => "DIRECT",
            Method::Om => "OM",
            Method::SieOm => "SIE-OM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Method::Direct),
            "om" => Ok(Method::Om),
            "sie-om" | "sieom" | "sie_om" => Ok(Method::SieOm),
            other => Err(Error::InvalidValue(format!("unknown method `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_aliases_resolve() {
        assert_eq!(ObjectClass::from_label("Dining Table"), Some(ObjectClass::Table));
        assert_eq!(ObjectClass::from_label("microwave"), Some(ObjectClass::OvenMicrowave));
        assert_eq!(ObjectClass::from_label("book"), None);
        for c in ObjectClass::ALL {
            assert_eq!(ObjectClass::from_label(c.name()), Some(c));
        }
    }

    #[test]
    fn serde_names() {
        assert_eq!(serde_json::to_string(&Likert::Maybe).unwrap(), "\"M\"");
        assert_eq!(serde_json::to_string(&Room::LivingRoom).unwrap(), "\"living_room\"");
        assert_eq!(serde_json::to_string(&Method::SieOm).unwrap(), "\"sie-om\"");
        assert_eq!(
            serde_json::from_str::<ObjectClass>("\"tv/laptop\"").unwrap(),
            ObjectClass::TvLaptop
        );
    }
}
