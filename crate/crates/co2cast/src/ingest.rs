//! CSV ingestion: emissions, energy-mix and population files.
//!
//! All inputs are UTF-8, comma-delimited, `.` decimal separator, one header
//! row. Loading is order-insensitive: rows are grouped by country and sorted
//! by year, so shuffled input produces identical canonical objects.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-observation annotations attached to an [`AnnualSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObsFlags {
    /// Interior year absent from the input file; value is a gap sentinel.
    pub missing: bool,
    /// Gap filled by linear interpolation.
    pub interpolated: bool,
    /// Flagged by the Z-score diagnostic.
    pub outlier_zscore: bool,
    /// Flagged by the IQR diagnostic.
    pub outlier_iqr: bool,
}

impl ObsFlags {
    pub fn is_clear(&self) -> bool {
        *self == ObsFlags::default()
    }
}

/// One country's annual CO2 emission series in Mt, with consecutive years.
///
/// Interior years missing from the input are kept as NaN sentinels carrying
/// the `missing` flag until [`crate::preprocess::interpolate_missing`] fills
/// them; every non-missing value is finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    /// ISO-3 country code, as given in the input.
    pub country: String,
    /// Calendar year of the first observation.
    pub start_year: i32,
    /// Emission values in Mt CO2; NaN marks a flagged gap.
    pub values: Vec<f64>,
    /// Annotation set, same length as `values`.
    pub flags: Vec<ObsFlags>,
}

impl AnnualSeries {
    /// Builds a gap-free series with clear flags.
    pub fn new(country: impl Into<String>, start_year: i32, values: Vec<f64>) -> Self {
        let flags = vec![ObsFlags::default(); values.len()];
        AnnualSeries {
            country: country.into(),
            start_year,
            values,
            flags,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Calendar year of observation `index`.
    pub fn year_at(&self, index: usize) -> i32 {
        self.start_year + index as i32
    }

    /// Calendar year of the last observation.
    pub fn last_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    /// Value for a calendar year, if within the span.
    pub fn value_in_year(&self, year: i32) -> Option<f64> {
        let offset = year.checked_sub(self.start_year)?;
        if offset < 0 {
            return None;
        }
        self.values.get(offset as usize).copied()
    }

    /// True if any observation still carries the `missing` flag.
    pub fn has_gaps(&self) -> bool {
        self.flags.iter().any(|f| f.missing)
    }

    /// Checks the type invariants: non-empty, flags aligned, finite
    /// non-negative values everywhere except flagged gaps, gaps interior.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Domain(format!(
                "series for {} is empty",
                self.country
            )));
        }
        if self.flags.len() != self.values.len() {
            return Err(Error::Domain(format!(
                "series for {}: {} flags for {} values",
                self.country,
                self.flags.len(),
                self.values.len()
            )));
        }
        let last = self.values.len() - 1;
        for (i, (&v, f)) in self.values.iter().zip(&self.flags).enumerate() {
            if f.missing {
                if i == 0 || i == last {
                    return Err(Error::UnfillableGap {
                        country: self.country.clone(),
                        year: self.year_at(i),
                    });
                }
            } else if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "series for {}: value {} in {} is not a finite non-negative number",
                    self.country,
                    v,
                    self.year_at(i)
                )));
            }
        }
        Ok(())
    }

    /// Copies observations `[start, start+len)` into a new series.
    pub fn segment(&self, start: usize, len: usize) -> AnnualSeries {
        AnnualSeries {
            country: self.country.clone(),
            start_year: self.start_year + start as i32,
            values: self.values[start..start + len].to_vec(),
            flags: self.flags[start..start + len].to_vec(),
        }
    }
}

/// Per-country, per-year grouped energy shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMixTable {
    pub country: String,
    /// Rows sorted by strictly increasing year.
    pub rows: Vec<MixRow>,
}

/// Grouped shares for one year, as fractions of total primary energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixRow {
    pub year: i32,
    pub fossil_share: f64,
    pub renewable_share: f64,
    pub nuclear_share: f64,
}

/// Optional per-country population counts, for per-capita figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub country: String,
    /// (year, persons) sorted by strictly increasing year.
    pub rows: Vec<(i32, f64)>,
}

/// How energy values are expressed in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMode {
    /// Values are fractions of the year's total; grouped sums must be ~1.
    Shares,
    /// Values are TWh; shares are computed against the year total.
    Generation,
}

/// Grouping of a recognized source label. Every label maps to exactly one
/// group, so the partition is complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SourceGroup {
    Fossil,
    Renewable,
    Nuclear,
}

fn source_group(label: &str) -> Option<SourceGroup> {
    match label {
        "coal" | "oil" | "gas" => Some(SourceGroup::Fossil),
        "hydro" | "solar" | "wind" | "bioenergy" | "geothermal" | "other_renewable" => {
            Some(SourceGroup::Renewable)
        }
        "nuclear" => Some(SourceGroup::Nuclear),
        _ => None,
    }
}

/// Tolerance on the grouped share sum, matching source tables that round to
/// one decimal percent.
pub const SHARE_SUM_TOLERANCE: f64 = 0.01;

fn check_header(reader: &mut csv::Reader<impl std::io::Read>, expected: &[&'static str]) -> Result<()> {
    let headers = reader.headers()?.clone();
    for (i, want) in expected.iter().enumerate() {
        let got = headers.get(i).unwrap_or("").trim();
        if got != *want {
            return Err(Error::Schema {
                expected: want,
                found: got.to_string(),
                position: i,
            });
        }
    }
    if headers.len() != expected.len() {
        return Err(Error::Schema {
            expected: "",
            found: headers.get(expected.len()).unwrap_or("").to_string(),
            position: expected.len(),
        });
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_country(field: &str, line: u64) -> Result<String> {
    let code = field.trim();
    if code.len() != 3 || !code.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(Error::Row {
            line,
            message: format!("country `{code}` is not a 3-letter ISO code"),
        });
    }
    Ok(code.to_string())
}

fn parse_year(field: &str, line: u64) -> Result<i32> {
    let year: i32 = field.trim().parse().map_err(|_| Error::Row {
        line,
        message: format!("year `{field}` is not an integer"),
    })?;
    if !(1000..=9999).contains(&year) {
        return Err(Error::Row {
            line,
            message: format!("year {year} is not a 4-digit year"),
        });
    }
    Ok(year)
}

fn parse_value(field: &str, line: u64, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Row {
        line,
        message: format!("{what} `{field}` is not a number"),
    })
}

/// Loads `country,year,emissions_mt` rows into one [`AnnualSeries`] per
/// country. Interior missing years are admitted as flagged gaps; leading and
/// trailing absences simply shorten the series span.
pub fn load_emissions_csv(path: impl AsRef<Path>) -> Result<Vec<AnnualSeries>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    check_header(&mut reader, &["country", "year", "emissions_mt"])?;

    let mut by_country: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let country = parse_country(record.get(0).unwrap_or(""), line)?;
        let year = parse_year(record.get(1).unwrap_or(""), line)?;
        let value = parse_value(record.get(2).unwrap_or(""), line, "emission")?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Row {
                line,
                message: format!("emission {value} must be finite and non-negative"),
            });
        }
        let entry = by_country.entry(country.clone()).or_default();
        if entry.insert(year, value).is_some() {
            return Err(Error::DuplicateKey { country, year });
        }
    }

    let mut out = Vec::with_capacity(by_country.len());
    for (country, rows) in by_country {
        let first = *rows.keys().next().expect("non-empty group");
        let last = *rows.keys().last().expect("non-empty group");
        let mut values = Vec::with_capacity((last - first + 1) as usize);
        let mut flags = Vec::with_capacity(values.capacity());
        for year in first..=last {
            match rows.get(&year) {
                Some(&v) => {
                    values.push(v);
                    flags.push(ObsFlags::default());
                }
                None => {
                    values.push(f64::NAN);
                    flags.push(ObsFlags {
                        missing: true,
                        ..ObsFlags::default()
                    });
                }
            }
        }
        let series = AnnualSeries {
            country,
            start_year: first,
            values,
            flags,
        };
        series.validate()?;
        out.push(series);
    }
    Ok(out)
}

/// Writes series back to the emissions schema. Gap positions are written as
/// absent rows, so a load/write/load cycle reproduces the same objects.
pub fn write_emissions_csv(series: &[AnnualSeries], mut writer: impl Write) -> Result<()> {
    writeln!(writer, "country,year,emissions_mt")?;
    for s in series {
        for (i, &v) in s.values.iter().enumerate() {
            if s.flags[i].missing {
                continue;
            }
            writeln!(writer, "{},{},{}", s.country, s.year_at(i), v)?;
        }
    }
    Ok(())
}

/// Loads `country,year,source,value` rows and aggregates sources into the
/// fossil / renewable / nuclear grouping. In [`EnergyMode::Generation`] the
/// values are TWh and shares are computed against each year's total; in
/// [`EnergyMode::Shares`] they are fractions whose grouped sum must be ~1.
pub fn load_energy_csv(path: impl AsRef<Path>, mode: EnergyMode) -> Result<Vec<EnergyMixTable>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    check_header(&mut reader, &["country", "year", "source", "value"])?;

    type YearAcc = BTreeMap<i32, [f64; 3]>;
    let mut by_country: BTreeMap<String, YearAcc> = BTreeMap::new();
    let mut seen: std::collections::BTreeSet<(String, i32, String)> = Default::default();

    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let country = parse_country(record.get(0).unwrap_or(""), line)?;
        let year = parse_year(record.get(1).unwrap_or(""), line)?;
        let source = record.get(2).unwrap_or("").trim().to_string();
        let value = parse_value(record.get(3).unwrap_or(""), line, "energy value")?;
        let group = source_group(&source).ok_or(Error::UnknownSource {
            label: source.clone(),
            line,
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Row {
                line,
                message: format!("energy value {value} must be finite and non-negative"),
            });
        }
        if !seen.insert((country.clone(), year, source.clone())) {
            return Err(Error::Row {
                line,
                message: format!("duplicate source `{source}` for {country} in {year}"),
            });
        }
        let acc = by_country.entry(country).or_default().entry(year).or_insert([0.0; 3]);
        match group {
            SourceGroup::Fossil => acc[0] += value,
            SourceGroup::Renewable => acc[1] += value,
            SourceGroup::Nuclear => acc[2] += value,
        }
    }

    let mut out = Vec::with_capacity(by_country.len());
    for (country, years) in by_country {
        let mut rows = Vec::with_capacity(years.len());
        let mut bad_years = Vec::new();
        for (year, [fossil, renewable, nuclear]) in years {
            match mode {
                EnergyMode::Generation => {
                    let total = fossil + renewable + nuclear;
                    if total <= 0.0 {
                        bad_years.push(year);
                        continue;
                    }
                    rows.push(MixRow {
                        year,
                        fossil_share: fossil / total,
                        renewable_share: renewable / total,
                        nuclear_share: nuclear / total,
                    });
                }
                EnergyMode::Shares => {
                    let sum = fossil + renewable + nuclear;
                    if (sum - 1.0).abs() > SHARE_SUM_TOLERANCE {
                        bad_years.push(year);
                        continue;
                    }
                    rows.push(MixRow {
                        year,
                        fossil_share: fossil,
                        renewable_share: renewable,
                        nuclear_share: nuclear,
                    });
                }
            }
        }
        if !bad_years.is_empty() {
            return Err(Error::ShareSum {
                country,
                years: bad_years,
                tolerance: SHARE_SUM_TOLERANCE,
            });
        }
        out.push(EnergyMixTable { country, rows });
    }
    Ok(out)
}

/// Loads optional `country,year,population` rows. The pipeline runs without
/// this input, skipping the per-capita outputs.
pub fn load_population_csv(path: impl AsRef<Path>) -> Result<Vec<PopulationSeries>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    check_header(&mut reader, &["country", "year", "population"])?;

    let mut by_country: BTreeMap<String, BTreeMap<i32, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let country = parse_country(record.get(0).unwrap_or(""), line)?;
        let year = parse_year(record.get(1).unwrap_or(""), line)?;
        let pop = parse_value(record.get(2).unwrap_or(""), line, "population")?;
        if !pop.is_finite() || pop <= 0.0 {
            return Err(Error::Row {
                line,
                message: format!("population {pop} must be positive"),
            });
        }
        let entry = by_country.entry(country.clone()).or_default();
        if entry.insert(year, pop).is_some() {
            return Err(Error::DuplicateKey { country, year });
        }
    }

    Ok(by_country
        .into_iter()
        .map(|(country, rows)| PopulationSeries {
            country,
            rows: rows.into_iter().collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().expect("temp file");
        f.write_all(content.as_bytes()).expect("write");
        f
    }

    #[test]
    fn loads_grouped_sorted_series() {
        let f = write_temp("country,year,emissions_mt\nNGA,2001,70.1\nNGA,2000,68.4\n");
        let series = load_emissions_csv(f.path()).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].country, "NGA");
        assert_eq!(series[0].start_year, 2000);
        assert_eq!(series[0].values, vec![68.4, 70.1]);
        assert!(series[0].flags.iter().all(|fl| fl.is_clear()));
    }

    #[test]
    fn header_only_file_is_empty_set() {
        let f = write_temp("country,year,emissions_mt\n");
        assert!(load_emissions_csv(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_country_year_is_error() {
        let f = write_temp("country,year,emissions_mt\nUSA,2000,5743\nUSA,2000,5800\n");
        match load_emissions_csv(f.path()) {
            Err(Error::DuplicateKey { country, year }) => {
                assert_eq!(country, "USA");
                assert_eq!(year, 2000);
            }
            other => panic!("expected duplicate-key error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_names_offending_column() {
        let f = write_temp("country,yr,emissions_mt\nNGA,2000,68.4\n");
        match load_emissions_csv(f.path()) {
            Err(Error::Schema {
                expected, found, position,
            }) => {
                assert_eq!(expected, "year");
                assert_eq!(found, "yr");
                assert_eq!(position, 1);
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn negative_emission_reports_line_number() {
        let f = write_temp("country,year,emissions_mt\nNGA,2000,68.4\nNGA,2001,-1.0\n");
        match load_emissions_csv(f.path()) {
            Err(Error::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_emission_is_row_error() {
        let f = write_temp("country,year,emissions_mt\nNGA,2000,abc\n");
        assert!(matches!(
            load_emissions_csv(f.path()),
            Err(Error::Row { line: 2, .. })
        ));
    }

    #[test]
    fn interior_gap_is_flagged_missing() {
        let f = write_temp("country,year,emissions_mt\nNGA,2000,100\nNGA,2002,120\n");
        let series = load_emissions_csv(f.path()).unwrap();
        assert_eq!(series[0].len(), 3);
        assert!(series[0].values[1].is_nan());
        assert!(series[0].flags[1].missing);
        assert!(series[0].has_gaps());
    }

    #[test]
    fn leading_and_trailing_absences_shorten_span() {
        // years 1998 and 2005 absent entirely: span is 2000..=2002
        let f = write_temp("country,year,emissions_mt\nNGA,2000,1\nNGA,2001,2\nNGA,2002,3\n");
        let series = load_emissions_csv(f.path()).unwrap();
        assert_eq!(series[0].start_year, 2000);
        assert_eq!(series[0].last_year(), 2002);
    }

    #[test]
    fn emissions_roundtrip_through_csv() {
        let f = write_temp(
            "country,year,emissions_mt\nNGA,2000,68.4\nNGA,2002,70.25\nBRA,2000,319\n",
        );
        let series = load_emissions_csv(f.path()).unwrap();
        let mut buf = Vec::new();
        write_emissions_csv(&series, &mut buf).unwrap();
        let f2 = write_temp(std::str::from_utf8(&buf).unwrap());
        let reloaded = load_emissions_csv(f2.path()).unwrap();
        assert_eq!(series.len(), reloaded.len());
        for (a, b) in series.iter().zip(&reloaded) {
            assert_eq!(a.country, b.country);
            assert_eq!(a.start_year, b.start_year);
            assert_eq!(a.flags, b.flags);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(x == y || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn generation_mode_computes_shares() {
        let f = write_temp(
            "country,year,source,value\n\
             NGA,2000,coal,30\nNGA,2000,oil,30\nNGA,2000,gas,25\n\
             NGA,2000,hydro,10\nNGA,2000,nuclear,5\n",
        );
        let tables = load_energy_csv(f.path(), EnergyMode::Generation).unwrap();
        let row = tables[0].rows[0];
        assert!((row.fossil_share - 0.85).abs() < 1e-12);
        assert!((row.renewable_share - 0.10).abs() < 1e-12);
        assert!((row.nuclear_share - 0.05).abs() < 1e-12);
    }

    #[test]
    fn shares_mode_single_source_mix() {
        let f = write_temp("country,year,source,value\nBRA,2000,hydro,1.0\n");
        let tables = load_energy_csv(f.path(), EnergyMode::Shares).unwrap();
        let row = tables[0].rows[0];
        assert_eq!(row.fossil_share, 0.0);
        assert_eq!(row.renewable_share, 1.0);
        assert_eq!(row.nuclear_share, 0.0);
    }

    #[test]
    fn shares_mode_sum_violation_lists_year() {
        let f = write_temp(
            "country,year,source,value\n\
             USA,2001,coal,0.7\nUSA,2001,hydro,0.2\nUSA,2001,nuclear,0.05\n",
        );
        match load_energy_csv(f.path(), EnergyMode::Shares) {
            Err(Error::ShareSum { country, years, .. }) => {
                assert_eq!(country, "USA");
                assert_eq!(years, vec![2001]);
            }
            other => panic!("expected share-sum error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_source_is_rejected() {
        let f = write_temp("country,year,source,value\nUSA,2000,plutonium,1.0\n");
        assert!(matches!(
            load_energy_csv(f.path(), EnergyMode::Shares),
            Err(Error::UnknownSource { line: 2, .. })
        ));
    }

    #[test]
    fn population_parses_and_sorts() {
        let f = write_temp("country,year,population\nNGA,2001,127000000\nNGA,2000,124000000\n");
        let pops = load_population_csv(f.path()).unwrap();
        assert_eq!(pops[0].rows, vec![(2000, 124_000_000.0), (2001, 127_000_000.0)]);
    }

    #[test]
    fn population_empty_body_is_empty_set() {
        let f = write_temp("country,year,population\n");
        assert!(load_population_csv(f.path()).unwrap().is_empty());
    }

    #[test]
    fn non_positive_population_is_error() {
        let f = write_temp("country,year,population\nNGA,2000,0\n");
        assert!(matches!(
            load_population_csv(f.path()),
            Err(Error::Row { line: 2, .. })
        ));
    }

    #[test]
    fn shuffled_rows_load_identically() {
        let a = write_temp(
            "country,year,emissions_mt\nNGA,2000,1\nBRA,2001,4\nNGA,2001,2\nBRA,2000,3\n",
        );
        let b = write_temp(
            "country,year,emissions_mt\nBRA,2000,3\nNGA,2001,2\nBRA,2001,4\nNGA,2000,1\n",
        );
        assert_eq!(
            load_emissions_csv(a.path()).unwrap(),
            load_emissions_csv(b.path()).unwrap()
        );
    }
}
