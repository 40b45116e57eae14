use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of core political issues.
pub const ISSUE_COUNT: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    #[serde(rename = "male")]
    MaleCoded,
    #[serde(rename = "female")]
    FemaleCoded,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::MaleCoded, Group::FemaleCoded];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::MaleCoded => "male",
            Group::FemaleCoded => "female",
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::MaleCoded => Group::FemaleCoded,
            Group::FemaleCoded => Group::MaleCoded,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "male" => Ok(Group::MaleCoded),
            "female" => Ok(Group::FemaleCoded),
            _ => Err(s.to_string()),
        }
    }
}

/// Event kind. Exposures sort before clicks at the same step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Exposure,
    Click,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Exposure => "exposure",
            Kind::Click => "click",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exposure" => Ok(Kind::Exposure),
            "click" => Ok(Kind::Click),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ideology {
    LeftBias,
    LeastBiased,
    RightBias,
}

impl Ideology {
    pub const ALL: [Ideology; 3] = [Ideology::LeftBias, Ideology::LeastBiased, Ideology::RightBias];

    pub fn as_str(self) -> &'static str {
        match self {
            Ideology::LeftBias => "left",
            Ideology::LeastBiased => "neutral",
            Ideology::RightBias => "right",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Ideology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ideology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ideology::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Political issue labels. The declaration order of the first 21 variants is
/// the canonical vector index order and must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Issue {
    Macroeconomics,
    CivilRights,
    Health,
    Agriculture,
    Labor,
    Education,
    Environment,
    Energy,
    Immigration,
    Transportation,
    LawAndCrime,
    SocialWelfare,
    Housing,
    DomesticCommerce,
    Defense,
    Technology,
    ForeignTrade,
    InternationalAffairs,
    GovernmentOperations,
    PublicLands,
    Culture,
    Other,
}

impl Issue {
    /// The 21 core issues in canonical order.
    pub const CORE: [Issue; ISSUE_COUNT] = [
        Issue::Macroeconomics,
        Issue::CivilRights,
        Issue::Health,
        Issue::Agriculture,
        Issue::Labor,
        Issue::Education,
        Issue::Environment,
        Issue::Energy,
        Issue::Immigration,
        Issue::Transportation,
        Issue::LawAndCrime,
        Issue::SocialWelfare,
        Issue::Housing,
        Issue::DomesticCommerce,
        Issue::Defense,
        Issue::Technology,
        Issue::ForeignTrade,
        Issue::InternationalAffairs,
        Issue::GovernmentOperations,
        Issue::PublicLands,
        Issue::Culture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Issue::Macroeconomics => "Macroeconomics",
            Issue::CivilRights => "Civil Rights",
            Issue::Health => "Health",
            Issue::Agriculture => "Agriculture",
            Issue::Labor => "Labor",
            Issue::Education => "Education",
            Issue::Environment => "Environment",
            Issue::Energy => "Energy",
            Issue::Immigration => "Immigration",
            Issue::Transportation => "Transportation",
            Issue::LawAndCrime => "Law and Crime",
            Issue::SocialWelfare => "Social Welfare",
            Issue::Housing => "Housing",
            Issue::DomesticCommerce => "Domestic Commerce",
            Issue::Defense => "Defense",
            Issue::Technology => "Technology",
            Issue::ForeignTrade => "Foreign Trade",
            Issue::InternationalAffairs => "International Affairs",
            Issue::GovernmentOperations => "Government Operations",
            Issue::PublicLands => "Public Lands",
            Issue::Culture => "Culture",
            Issue::Other => "Other",
        }
    }

    /// Vector slot, `None` for `Other`.
    pub fn index(self) -> Option<usize> {
        match self {
            Issue::Other => None,
            core => Some(core as usize),
        }
    }

    pub fn from_index(idx: usize) -> Option<Issue> {
        Issue::CORE.get(idx).copied()
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Issue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "Other" {
            return Ok(Issue::Other);
        }
        Issue::CORE
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_dense() {
        for (i, issue) in Issue::CORE.iter().enumerate() {
            assert_eq!(issue.index(), Some(i));
            assert_eq!(Issue::from_index(i), Some(*issue));
            assert_eq!(issue.as_str().parse::<Issue>(), Ok(*issue));
        }
        assert_eq!(Issue::Other.index(), None);
        assert_eq!("Sports".parse::<Issue>(), Err("Sports".to_string()));
    }

    #[test]
    fn tokens_round_trip() {
        for g in Group::ALL {
            assert_eq!(g.as_str().parse::<Group>(), Ok(g));
        }
        for i in Ideology::ALL {
            assert_eq!(i.as_str().parse::<Ideology>(), Ok(i));
        }
        assert_eq!("click".parse::<Kind>(), Ok(Kind::Click));
        assert!("Click".parse::<Kind>().is_err());
    }
}
