use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Continental region. The Americas stay split here; reports merge them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Africa,
    NorthAmerica,
    SouthAmerica,
    Asia,
    Europe,
    Oceania,
    Unknown,
}

impl Region {
    pub const KNOWN: [Region; 6] = [
        Region::Africa,
        Region::NorthAmerica,
        Region::SouthAmerica,
        Region::Asia,
        Region::Europe,
        Region::Oceania,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Africa => "Africa",
            Region::NorthAmerica => "NorthAmerica",
            Region::SouthAmerica => "SouthAmerica",
            Region::Asia => "Asia",
            Region::Europe => "Europe",
            Region::Oceania => "Oceania",
            Region::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "africa" => Region::Africa,
            "northamerica" | "na" => Region::NorthAmerica,
            "southamerica" | "sa" => Region::SouthAmerica,
            "asia" => Region::Asia,
            "europe" => Region::Europe,
            "oceania" => Region::Oceania,
            "unknown" => Region::Unknown,
            _ => return Err(format!("unknown region `{s}`")),
        })
    }
}

// ISO 3166-1 alpha-2, grouped by UN geoscheme continent. Central America and
// the Caribbean count as North America.
const AFRICA: &[&str] = &[
    "AO", "BF", "BI", "BJ", "BW", "CD", "CF", "CG", "CI", "CM", "CV", "DJ", "DZ", "EG", "EH",
    "ER", "ET", "GA", "GH", "GM", "GN", "GQ", "GW", "IO", "KE", "KM", "LR", "LS", "LY", "MA",
    "MG", "ML", "MR", "MU", "MW", "MZ", "NA", "NE", "NG", "RE", "RW", "SC", "SD", "SH", "SL",
    "SN", "SO", "SS", "ST", "SZ", "TD", "TF", "TG", "TN", "TZ", "UG", "YT", "ZA", "ZM", "ZW",
];

const NORTH_AMERICA: &[&str] = &[
    "AG", "AI", "AW", "BB", "BL", "BM", "BQ", "BS", "BZ", "CA", "CR", "CU", "CW", "DM", "DO",
    "GD", "GL", "GP", "GT", "HN", "HT", "JM", "KN", "KY", "LC", "MF", "MQ", "MS", "MX", "NI",
    "PA", "PM", "PR", "SV", "SX", "TC", "TT", "UM", "US", "VC", "VG", "VI",
];

const SOUTH_AMERICA: &[&str] = &[
    "AR", "BO", "BR", "BV", "CL", "CO", "EC", "FK", "GF", "GS", "GY", "PE", "PY", "SR", "UY",
    "VE",
];

const ASIA: &[&str] = &[
    "AE", "AF", "AM", "AZ", "BD", "BH", "BN", "BT", "CN", "CY", "GE", "HK", "ID", "IL", "IN",
    "IQ", "IR", "JO", "JP", "KG", "KH", "KP", "KR", "KW", "KZ", "LA", "LB", "LK", "MM", "MN",
    "MO", "MV", "MY", "NP", "OM", "PH", "PK", "PS", "QA", "SA", "SG", "SY", "TH", "TJ", "TL",
    "TM", "TR", "TW", "UZ", "VN", "YE",
];

const EUROPE: &[&str] = &[
    "AD", "AL", "AT", "AX", "BA", "BE", "BG", "BY", "CH", "CZ", "DE", "DK", "EE", "ES", "FI",
    "FO", "FR", "GB", "GG", "GI", "GR", "HR", "HU", "IE", "IM", "IS", "IT", "JE", "LI", "LT",
    "LU", "LV", "MC", "MD", "ME", "MK", "MT", "NL", "NO", "PL", "PT", "RO", "RS", "RU", "SE",
    "SI", "SJ", "SK", "SM", "UA", "VA", "XK",
];

const OCEANIA: &[&str] = &[
    "AS", "AU", "CC", "CK", "CX", "FJ", "FM", "GU", "HM", "KI", "MH", "MP", "NC", "NF", "NR",
    "NU", "NZ", "PF", "PG", "PN", "PW", "SB", "TK", "TO", "TV", "VU", "WF", "WS",
];

/// Continent of a two-letter country code. Total: anything unrecognised,
/// including the empty string, maps to [`Region::Unknown`].
pub fn map_region(country_code: &str) -> Region {
    let code = country_code.trim().to_ascii_uppercase();
    // Common non-ISO alias for the United Kingdom.
    let code = if code == "UK" { "GB".to_string() } else { code };
    let tables: [(&[&str], Region); 6] = [
        (AFRICA, Region::Africa),
        (NORTH_AMERICA, Region::NorthAmerica),
        (SOUTH_AMERICA, Region::SouthAmerica),
        (ASIA, Region::Asia),
        (EUROPE, Region::Europe),
        (OCEANIA, Region::Oceania),
    ];
    tables
        .iter()
        .find(|(codes, _)| codes.binary_search(&code.as_str()).is_ok())
        .map_or(Region::Unknown, |&(_, r)| r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_sorted_and_disjoint() {
        let all = [AFRICA, NORTH_AMERICA, SOUTH_AMERICA, ASIA, EUROPE, OCEANIA];
        let mut seen = std::collections::HashSet::new();
        for t in all {
            assert!(t.windows(2).all(|w| w[0] < w[1]), "table not sorted");
            for c in t {
                assert_eq!(c.len(), 2);
                assert!(seen.insert(*c), "{c} listed twice");
            }
        }
        assert!(seen.len() > 240);
    }

    #[test]
    fn canonical_codes() {
        assert_eq!(map_region("US"), Region::NorthAmerica);
        assert_eq!(map_region("br"), Region::SouthAmerica);
        assert_eq!(map_region(" FR "), Region::Europe);
        assert_eq!(map_region("UK"), Region::Europe);
        assert_eq!(map_region("TH"), Region::Asia);
        assert_eq!(map_region("NZ"), Region::Oceania);
        assert_eq!(map_region("NG"), Region::Africa);
    }

    #[test]
    fn unknown_inputs() {
        assert_eq!(map_region(""), Region::Unknown);
        assert_eq!(map_region("(nu"), Region::Unknown);
        assert_eq!(map_region("AQ"), Region::Unknown);
        assert_eq!(map_region("NONE"), Region::Unknown);
    }
}
