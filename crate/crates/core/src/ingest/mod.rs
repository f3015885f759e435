//! Survey export ingestion: delimited text to [`ResponseTable`], cohort
//! filtering and demographic counts.
//!
//! Missing responses are stored as `NaN`. A table that went through
//! [`filter_cohort`] with `require_complete` holds only finite values in
//! `[1, 5]`; the reference corpus codes skipped items as `0`, which that
//! filter drops.

mod region;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use region::{map_region, Region};

pub const LIKERT_MIN: f64 = 1.0;
pub const LIKERT_MAX: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
    Other,
    Unknown,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Other => "other",
            Gender::Unknown => "unknown",
        }
    }

    fn from_label(s: &str) -> Option<Gender> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Some(Gender::Female),
            "male" | "m" => Some(Gender::Male),
            "other" => Some(Gender::Other),
            "unknown" => Some(Gender::Unknown),
            _ => None,
        }
    }
}

impl std::str::FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Gender::from_label(s).ok_or_else(|| Error::pre(format!("unknown gender `{s}`")))
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demographics {
    pub age: Option<u32>,
    pub gender: Gender,
    /// Raw country code as found in the export, trimmed and upper-cased.
    pub country: String,
    pub region: Region,
}

impl Default for Demographics {
    fn default() -> Self {
        Demographics {
            age: None,
            gender: Gender::Unknown,
            country: String::new(),
            region: Region::Unknown,
        }
    }
}

/// Raw-code translations loaded from a `key = value` text file.
///
/// ```text
/// # gender codes from the dataset codebook
/// gender.1 = male
/// gender.2 = female
/// gender.3 = other
/// country.UK = Europe
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    gender: HashMap<String, Gender>,
    country: HashMap<String, Region>,
}

impl Default for Codebook {
    /// Codes of the public ECR export: 1 = male, 2 = female, 3 = other.
    fn default() -> Self {
        Codebook::parse(
            "gender.1 = male\n\
             gender.2 = female\n\
             gender.3 = other\n",
        )
        .expect("built-in codebook")
    }
}

impl Codebook {
    pub fn empty() -> Self {
        Codebook {
            gender: HashMap::new(),
            country: HashMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cb = Codebook::empty();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i as u64 + 1,
                message: m.to_string(),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let (ns, code) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| err("key must look like gender.<code> or country.<code>"))?;
            let value = value.trim();
            match ns {
                "gender" => {
                    let g = Gender::from_label(value)
                        .ok_or_else(|| err("gender must be female, male, other or unknown"))?;
                    cb.gender.insert(code.trim().to_string(), g);
                }
                "country" => {
                    let r: Region = value.parse().map_err(|e: String| err(&e))?;
                    cb.country.insert(code.trim().to_ascii_uppercase(), r);
                }
                _ => return Err(err("unknown key namespace")),
            }
        }
        Ok(cb)
    }

    pub fn gender(&self, raw: &str) -> Gender {
        let raw = raw.trim();
        if let Some(&g) = self.gender.get(raw) {
            return g;
        }
        Gender::from_label(raw).unwrap_or(Gender::Unknown)
    }

    pub fn region(&self, country: &str) -> Region {
        self.country
            .get(country)
            .copied()
            .unwrap_or_else(|| map_region(country))
    }
}

/// Names of the optional demographic columns (matched case-insensitively).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    pub age: String,
    pub gender: String,
    pub country: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            age: "age".into(),
            gender: "gender".into(),
            country: "country".into(),
        }
    }
}

/// Rectangular item-response matrix with per-row demographics.
#[derive(Clone, Debug)]
pub struct ResponseTable {
    items: Vec<String>,
    values: Vec<f64>,
    demographics: Vec<Demographics>,
}

impl PartialEq for ResponseTable {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
            && self.demographics == other.demographics
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

impl ResponseTable {
    pub fn new(
        items: Vec<String>,
        rows: Vec<Vec<f64>>,
        demographics: Vec<Demographics>,
    ) -> Result<Self> {
        if rows.len() != demographics.len() {
            return Err(Error::pre("one demographic record per row is required"));
        }
        let m = items.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != m {
                return Err(Error::pre(format!("row {i} has {} values, expected {m}", r.len())));
            }
            values.extend(r);
        }
        Ok(ResponseTable {
            items,
            values,
            demographics,
        })
    }

    /// Table without demographics, for synthetic data.
    pub fn from_rows(items: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = vec![Demographics::default(); rows.len()];
        ResponseTable::new(items, rows, d)
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn n_rows(&self) -> usize {
        self.demographics.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.items.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn demographics(&self) -> &[Demographics] {
        &self.demographics
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Rows at the given indices, in that order (duplicates allowed).
    pub fn select(&self, rows: &[usize]) -> ResponseTable {
        let m = self.items.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        let mut demographics = Vec::with_capacity(rows.len());
        for &i in rows {
            values.extend_from_slice(self.row(i));
            demographics.push(self.demographics[i].clone());
        }
        ResponseTable {
            items: self.items.clone(),
            values,
            demographics,
        }
    }

    /// Canonical CSV: zero-padded item columns, then `age,gender,country`.
    /// Missing values are written as empty cells.
    pub fn write_canonical<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.items.iter().map(String::as_str).collect();
        header.extend(["age", "gender", "country"]);
        w.write_record(&header)?;
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        for (i, d) in self.demographics.iter().enumerate() {
            rec.clear();
            rec.extend(self.row(i).iter().map(|v| {
                if v.is_nan() {
                    String::new()
                } else {
                    v.to_string()
                }
            }));
            rec.push(d.age.map(|a| a.to_string()).unwrap_or_default());
            rec.push(match d.gender {
                Gender::Unknown => String::new(),
                g => g.as_str().to_string(),
            });
            rec.push(d.country.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Canonical `Q01`-style id for headers such as `Q1`, `q7` or `Q07`.
pub fn canonical_item(name: &str) -> Option<String> {
    let name = name.trim();
    let digits = name.strip_prefix('Q').or_else(|| name.strip_prefix('q'))?;
    if digits.is_empty() || digits.len() > 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: u32 = digits.parse().ok()?;
    if k == 0 {
        return None;
    }
    Some(format!("Q{k:02}"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DroppedRow {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Parsed {
    pub table: ResponseTable,
    pub dropped: Vec<DroppedRow>,
}

/// Parses a comma- or tab-delimited export with a header row. The delimiter
/// is taken from the header line: tab if it contains one, comma otherwise.
pub fn parse_responses<R: Read>(mut input: R, schema: &Schema, codebook: &Codebook) -> Result<Parsed> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();

    let mut item_cols: Vec<(u32, String, usize)> = Vec::new();
    let (mut age_col, mut gender_col, mut country_col) = (None, None, None);
    for (j, h) in headers.iter().enumerate() {
        let h = h.trim();
        if let Some(id) = canonical_item(h) {
            let num: u32 = id[1..].parse().expect("canonical id");
            if item_cols.iter().any(|(_, existing, _)| *existing == id) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("duplicate item column {id}"),
                });
            }
            item_cols.push((num, id, j));
        } else if h.eq_ignore_ascii_case(&schema.age) {
            age_col = Some(j);
        } else if h.eq_ignore_ascii_case(&schema.gender) {
            gender_col = Some(j);
        } else if h.eq_ignore_ascii_case(&schema.country) {
            country_col = Some(j);
        }
    }
    if item_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "header has no item columns (expected Q1..Qm or Q01..Qm)".into(),
        });
    }
    item_cols.sort();
    let items: Vec<String> = item_cols.iter().map(|(_, id, _)| id.clone()).collect();

    let width = headers.len();
    let mut values = Vec::new();
    let mut demographics = Vec::new();
    let mut dropped = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() != width {
            dropped.push(DroppedRow {
                line,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
            continue;
        }
        for &(_, _, j) in &item_cols {
            let v = rec[j].trim().parse::<f64>().ok().filter(|v| v.is_finite());
            values.push(v.unwrap_or(f64::NAN));
        }
        let country = country_col
            .map(|j| rec[j].trim().to_ascii_uppercase())
            .unwrap_or_default();
        demographics.push(Demographics {
            age: age_col.and_then(|j| parse_age(&rec[j])),
            gender: gender_col.map_or(Gender::Unknown, |j| codebook.gender(&rec[j])),
            region: codebook.region(&country),
            country,
        });
    }
    if !dropped.is_empty() {
        log::warn!("dropped {} ragged row(s)", dropped.len());
    }
    Ok(Parsed {
        table: ResponseTable {
            items,
            values,
            demographics,
        },
        dropped,
    })
}

fn parse_age(s: &str) -> Option<u32> {
    let s = s.trim();
    if let Ok(a) = s.parse::<u32>() {
        return Some(a);
    }
    let f: f64 = s.parse().ok()?;
    (f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= u32::MAX as f64).then_some(f as u32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohortFilter {
    pub age_range: (u32, u32),
    pub genders: BTreeSet<Gender>,
    pub regions: BTreeSet<Region>,
    pub require_complete: bool,
}

impl CohortFilter {
    pub fn new(
        age_range: (u32, u32),
        genders: BTreeSet<Gender>,
        regions: BTreeSet<Region>,
        require_complete: bool,
    ) -> Result<Self> {
        let f = CohortFilter {
            age_range,
            genders,
            regions,
            require_complete,
        };
        f.validate()?;
        Ok(f)
    }

    /// Ages 18-60, female or male, a known region, and every item answered
    /// within the Likert range.
    pub fn standard() -> Self {
        CohortFilter {
            age_range: (18, 60),
            genders: [Gender::Female, Gender::Male].into(),
            regions: Region::KNOWN.into_iter().collect(),
            require_complete: true,
        }
    }

    /// Accepts every row, including incomplete ones.
    pub fn everything() -> Self {
        CohortFilter {
            age_range: (0, u32::MAX),
            genders: [Gender::Female, Gender::Male, Gender::Other, Gender::Unknown].into(),
            regions: Region::KNOWN.into_iter().chain([Region::Unknown]).collect(),
            require_complete: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.age_range;
        if lo > hi {
            return Err(Error::pre(format!("age range [{lo}, {hi}] has lo > hi")));
        }
        Ok(())
    }

    fn accepts(&self, d: &Demographics, row: &[f64]) -> bool {
        let (lo, hi) = self.age_range;
        let age_ok = match d.age {
            Some(a) => (lo..=hi).contains(&a),
            // Unknown age only passes an unrestricted range.
            None => lo == 0 && hi == u32::MAX,
        };
        age_ok
            && self.genders.contains(&d.gender)
            && self.regions.contains(&d.region)
            && (!self.require_complete
                || row
                    .iter()
                    .all(|v| v.is_finite() && (LIKERT_MIN..=LIKERT_MAX).contains(v)))
    }
}

pub fn filter_cohort(table: &ResponseTable, filter: &CohortFilter) -> Result<ResponseTable> {
    filter.validate()?;
    let keep: Vec<usize> = (0..table.n_rows())
        .filter(|&i| filter.accepts(&table.demographics[i], table.row(i)))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyCohort);
    }
    Ok(table.select(&keep))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgeBand {
    From18To20,
    From21To30,
    From31To40,
    From41To60,
    /// Outside 18-60 or unknown.
    Other,
}

impl AgeBand {
    pub fn of(age: Option<u32>) -> AgeBand {
        match age {
            Some(18..=20) => AgeBand::From18To20,
            Some(21..=30) => AgeBand::From21To30,
            Some(31..=40) => AgeBand::From31To40,
            Some(41..=60) => AgeBand::From41To60,
            _ => AgeBand::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgeBand::From18To20 => "18-20",
            AgeBand::From21To30 => "21-30",
            AgeBand::From31To40 => "31-40",
            AgeBand::From41To60 => "41-60",
            AgeBand::Other => "other",
        }
    }
}

/// Counts per region, gender and age band. Each dimension sums to the row
/// count of the summarised table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DemographicReport {
    pub n: usize,
    pub region: BTreeMap<Region, usize>,
    pub gender: BTreeMap<Gender, usize>,
    pub age_band: BTreeMap<AgeBand, usize>,
}

impl DemographicReport {
    pub fn region_count(&self, r: Region) -> usize {
        self.region.get(&r).copied().unwrap_or(0)
    }

    pub fn gender_count(&self, g: Gender) -> usize {
        self.gender.get(&g).copied().unwrap_or(0)
    }

    pub fn age_count(&self, b: AgeBand) -> usize {
        self.age_band.get(&b).copied().unwrap_or(0)
    }

    /// `(dimension, group, count)` rows in the published layout, with North
    /// and South America merged.
    pub fn published_rows(&self) -> Vec<(&'static str, String, usize)> {
        let mut rows = vec![(
            "region",
            "America".to_string(),
            self.region_count(Region::NorthAmerica) + self.region_count(Region::SouthAmerica),
        )];
        for r in [Region::Europe, Region::Asia, Region::Oceania, Region::Africa, Region::Unknown] {
            if r != Region::Unknown || self.region_count(r) > 0 {
                rows.push(("region", r.to_string(), self.region_count(r)));
            }
        }
        for g in [Gender::Female, Gender::Male, Gender::Other, Gender::Unknown] {
            if matches!(g, Gender::Female | Gender::Male) || self.gender_count(g) > 0 {
                rows.push(("gender", g.to_string(), self.gender_count(g)));
            }
        }
        for b in [
            AgeBand::From18To20,
            AgeBand::From21To30,
            AgeBand::From31To40,
            AgeBand::From41To60,
            AgeBand::Other,
        ] {
            if b != AgeBand::Other || self.age_count(b) > 0 {
                rows.push(("age", b.as_str().to_string(), self.age_count(b)));
            }
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dimension", "group", "count"])?;
        for (dim, group, count) in self.published_rows() {
            w.write_record([dim, group.as_str(), &count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn demographic_summary(table: &ResponseTable) -> DemographicReport {
    let mut rep = DemographicReport {
        n: table.n_rows(),
        ..Default::default()
    };
    for d in table.demographics() {
        *rep.region.entry(d.region).or_default() += 1;
        *rep.gender.entry(d.gender).or_default() += 1;
        *rep.age_band.entry(AgeBand::of(d.age)).or_default() += 1;
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_header(delim: &str) -> String {
        let mut cols: Vec<String> = (1..=36).map(|i| format!("Q{i}")).collect();
        cols.extend(["age".into(), "gender".into(), "country".into()]);
        cols.join(delim)
    }

    fn full_row(delim: &str, age: u32, gender: &str, country: &str) -> String {
        let mut cols: Vec<String> = (1..=36).map(|i| ((i % 5) + 1).to_string()).collect();
        cols.extend([age.to_string(), gender.to_string(), country.to_string()]);
        cols.join(delim)
    }

    fn parse(text: &str) -> Parsed {
        parse_responses(text.as_bytes(), &Schema::default(), &Codebook::default()).unwrap()
    }

    #[test]
    fn minimal_well_formed_input() {
        let text = format!("{}\n{}\n", full_header(","), full_row(",", 25, "2", "FR"));
        let p = parse(&text);
        assert_eq!(p.table.n_rows(), 1);
        assert_eq!(p.table.n_items(), 36);
        assert_eq!(p.table.items()[0], "Q01");
        assert_eq!(p.table.items()[35], "Q36");
        let d = &p.table.demographics()[0];
        assert_eq!(d.gender, Gender::Female);
        assert_eq!(d.region, Region::Europe);
        assert_eq!(d.age, Some(25));
        assert!(p.dropped.is_empty());
    }

    #[test]
    fn tab_delimited_gives_identical_table() {
        let comma = format!("{}\n{}\n", full_header(","), full_row(",", 25, "1", "US"));
        let tab = format!("{}\n{}\n", full_header("\t"), full_row("\t", 25, "1", "US"));
        assert_eq!(parse(&comma).table, parse(&tab).table);
    }

    #[test]
    fn zero_padded_headers_and_column_order() {
        let text = "Q02,Q01,country\n4,3,US\n";
        let p = parse(text);
        assert_eq!(p.table.items(), ["Q01", "Q02"]);
        assert_eq!(p.table.row(0), [3.0, 4.0]);
        assert_eq!(p.table.demographics()[0].age, None);
        assert_eq!(p.table.demographics()[0].gender, Gender::Unknown);
    }

    #[test]
    fn header_without_items_is_fatal() {
        let err = parse_responses("age,gender\n1,2\n".as_bytes(), &Schema::default(), &Codebook::default())
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn ragged_rows_are_dropped_and_reported() {
        let text = "Q1,Q2,age\n1,2,30\n1,2\n3,4,40\n";
        let p = parse(text);
        assert_eq!(p.table.n_rows(), 2);
        assert_eq!(p.dropped.len(), 1);
        assert_eq!(p.dropped[0].line, 3);
    }

    #[test]
    fn unparseable_cells_become_missing() {
        let p = parse("Q1,Q2\n1,x\n");
        assert_eq!(p.table.row(0)[0], 1.0);
        assert!(p.table.row(0)[1].is_nan());
        assert!(!p.table.is_complete());
    }

    #[test]
    fn impossible_age_range_is_rejected() {
        let f = CohortFilter {
            age_range: (99, 98),
            ..CohortFilter::standard()
        };
        let t = parse("Q1\n1\n").table;
        assert!(matches!(filter_cohort(&t, &f), Err(Error::Precondition(_))));
        assert!(CohortFilter::new((99, 98), BTreeSet::new(), BTreeSet::new(), true).is_err());
    }

    #[test]
    fn standard_filter_drops_sentinels_and_unknowns() {
        let text = "Q1,Q2,age,gender,country\n\
                    1,5,20,1,US\n\
                    0,5,20,1,US\n\
                    1,5,17,1,US\n\
                    1,5,30,3,US\n\
                    1,5,30,2,\n\
                    2,2,60,2,AU\n";
        let t = parse(text).table;
        let kept = filter_cohort(&t, &CohortFilter::standard()).unwrap();
        assert_eq!(kept.n_rows(), 2);
        assert!(kept.is_complete());
    }

    #[test]
    fn empty_cohort_is_an_error() {
        let t = parse("Q1,age\n1,10\n").table;
        assert!(matches!(
            filter_cohort(&t, &CohortFilter::standard()),
            Err(Error::EmptyCohort)
        ));
    }

    #[test]
    fn summary_of_empty_and_single_row() {
        let empty = ResponseTable::from_rows(vec!["Q01".into()], vec![]).unwrap();
        let rep = demographic_summary(&empty);
        assert_eq!(rep.n, 0);
        assert!(rep.published_rows().iter().all(|(_, _, c)| *c == 0));

        let t = parse("Q1,age,gender,country\n3,25,female,FR\n").table;
        let rep = demographic_summary(&t);
        assert_eq!(rep.region_count(Region::Europe), 1);
        assert_eq!(rep.gender_count(Gender::Female), 1);
        assert_eq!(rep.age_count(AgeBand::From21To30), 1);
    }

    #[test]
    fn codebook_overrides() {
        let cb = Codebook::parse("# comment\ngender.9 = other\ncountry.ZZ = Oceania\n").unwrap();
        assert_eq!(cb.gender("9"), Gender::Other);
        assert_eq!(cb.gender("female"), Gender::Female);
        assert_eq!(cb.gender("1"), Gender::Unknown);
        assert_eq!(cb.region("ZZ"), Region::Oceania);
        assert_eq!(cb.region("US"), Region::NorthAmerica);
        assert!(Codebook::parse("gender.1 = robot").is_err());
        assert!(Codebook::parse("nonsense").is_err());
    }
}
