//! Energy-mix indices, country archetype classification and descriptive
//! emission statistics (CAGR, cumulative totals, per-capita figures).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AnnualSeries, EnergyMixTable, PopulationSeries};

/// Per-year fossil-dominance and renewable-penetration indices with their
/// period averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixIndices {
    pub country: String,
    /// (year, fossil index, renewable index, nuclear share).
    pub yearly: Vec<(i32, f64, f64, f64)>,
    pub avg_fossil: f64,
    pub avg_renewable: f64,
}

/// The three energy-system archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchetypeLabel {
    FossilDependent,
    TransitionPhase,
    RenewableAccelerated,
}

impl std::fmt::Display for ArchetypeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ArchetypeLabel::FossilDependent => "FossilDependent",
            ArchetypeLabel::TransitionPhase => "TransitionPhase",
            ArchetypeLabel::RenewableAccelerated => "RenewableAccelerated",
        };
        f.write_str(name)
    }
}

/// Classification outcome plus the basis it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryCategory {
    pub label: ArchetypeLabel,
    pub avg_fossil: f64,
    pub avg_renewable: f64,
    pub thresholds: ClassifyThresholds,
}

/// Cut points for the three-way classification. The defaults are the
/// simplest rule separating published archetype examples: renewable
/// averages of 0.5 and up read as renewable-accelerated, fossil averages
/// of 0.8 and up as fossil-dependent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    pub fossil: f64,
    pub renewable: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds {
            fossil: 0.80,
            renewable: 0.50,
        }
    }
}

/// Per-year indices straight from the grouped shares, averaged over all
/// rows present. Row order does not affect the averages.
pub fn compute_indices(mix: &EnergyMixTable) -> Result<MixIndices> {
    if mix.rows.is_empty() {
        return Err(Error::Domain(format!(
            "energy-mix table for {} has no rows",
            mix.country
        )));
    }
    let yearly: Vec<(i32, f64, f64, f64)> = mix
        .rows
        .iter()
        .map(|r| (r.year, r.fossil_share, r.renewable_share, r.nuclear_share))
        .collect();
    let n = yearly.len() as f64;
    let avg_fossil = yearly.iter().map(|r| r.1).sum::<f64>() / n;
    let avg_renewable = yearly.iter().map(|r| r.2).sum::<f64>() / n;
    Ok(MixIndices {
        country: mix.country.clone(),
        yearly,
        avg_fossil,
        avg_renewable,
    })
}

/// Three-way archetype rule: renewable-accelerated when the average
/// renewable index reaches the renewable threshold; otherwise
/// fossil-dependent when the average fossil index reaches the fossil
/// threshold; otherwise transition-phase.
pub fn classify(indices: &MixIndices, thresholds: ClassifyThresholds) -> CountryCategory {
    let label = if indices.avg_renewable >= thresholds.renewable {
        ArchetypeLabel::RenewableAccelerated
    } else if indices.avg_fossil >= thresholds.fossil {
        ArchetypeLabel::FossilDependent
    } else {
        ArchetypeLabel::TransitionPhase
    };
    CountryCategory {
        label,
        avg_fossil: indices.avg_fossil,
        avg_renewable: indices.avg_renewable,
        thresholds,
    }
}

/// Compound annual growth rate in percent per year over a span of
/// `n_years` (23 for a 2000 to 2023 comparison).
pub fn cagr(first_value: f64, last_value: f64, n_years: u32) -> Result<f64> {
    if !(first_value > 0.0) {
        return Err(Error::Domain(format!(
            "CAGR base value {first_value} must be positive"
        )));
    }
    if n_years == 0 {
        return Err(Error::Domain("CAGR span must be at least one year".into()));
    }
    Ok(100.0 * ((last_value / first_value).powf(1.0 / n_years as f64) - 1.0))
}

/// Inclusive sum of annual values over [from_year, to_year].
pub fn cumulative(series: &AnnualSeries, from_year: i32, to_year: i32) -> Result<f64> {
    if to_year < from_year {
        return Err(Error::Domain(format!(
            "reversed range {from_year}..{to_year}"
        )));
    }
    if from_year < series.start_year || to_year > series.last_year() {
        return Err(Error::Domain(format!(
            "range {from_year}..{to_year} outside series span {}..{}",
            series.start_year,
            series.last_year()
        )));
    }
    let start = (from_year - series.start_year) as usize;
    let end = (to_year - series.start_year) as usize;
    Ok(series.values[start..=end].iter().sum())
}

/// Per-capita emissions in tonnes per person for every overlapping year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerCapita {
    /// (year, tonnes per person), ascending by year.
    pub rows: Vec<(i32, f64)>,
    /// Emission years skipped because population was missing.
    pub omitted_years: usize,
}

/// Emission values divided by population, Mt converted to tonnes. Years
/// without population are omitted and counted.
pub fn per_capita(series: &AnnualSeries, population: &PopulationSeries) -> Result<PerCapita> {
    let mut rows = Vec::new();
    let mut omitted_years = 0;
    for (i, &value) in series.values.iter().enumerate() {
        let year = series.year_at(i);
        match population.rows.iter().find(|(y, _)| *y == year) {
            Some((_, pop)) => rows.push((year, value * 1e6 / pop)),
            None => omitted_years += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!(
            "no overlap between emissions for {} and population for {}",
            series.country, population.country
        )));
    }
    Ok(PerCapita {
        rows,
        omitted_years,
    })
}
