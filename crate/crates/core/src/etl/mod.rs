//! Student-record ETL: yearly enrollment/discipline merging with identity
//! conflict detection, all-time aggregation into the 18-variable table, and a
//! synthetic cohort generator.

mod aggregate;
mod records;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::dataset::{student_table, ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::par;

pub use aggregate::{aggregate_all_time, on_track, AllTimeRecord};
pub use records::{
    read_discipline, read_enrollment, write_discipline, write_enrollment, DisciplinaryRecord, EnrollmentRecord, Flag,
    Sex,
};
pub use synth::{generate_synthetic, SyntheticCohort, SynthConfig, YearFiles};

/// Normalized name distance above which two names count as different people.
pub const NAME_DISTANCE_THRESHOLD: f64 = 0.2;

/// An enrollment record joined with that year's discipline flags.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedRecord {
    pub enrollment: EnrollmentRecord,
    pub suspension: Flag,
    pub expulsion: Flag,
}

/// Two records sharing an ssn that look like different people.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityConflict {
    pub ssn: String,
    /// Year of a within-year conflict; `None` when found across years.
    pub school_year: Option<i32>,
    pub first: (String, NaiveDate),
    pub second: (String, NaiveDate),
    pub name_distance: f64,
}

fn canonical_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_uppercase()
}

/// Levenshtein distance of the upper-cased, space-normalized names divided
/// by the longer name's length.
pub fn name_distance(a: &str, b: &str) -> f64 {
    let (a, b) = (canonical_name(a), canonical_name(b));
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    strsim::levenshtein(&a, &b) as f64 / longest as f64
}

/// Same ssn, names further apart than the threshold, and different birth dates.
pub fn is_conflict(a: (&str, NaiveDate), b: (&str, NaiveDate)) -> bool {
    a.1 != b.1 && name_distance(a.0, b.0) > NAME_DISTANCE_THRESHOLD
}

/// First conflicting pair among records of one ssn, in record order.
fn find_conflict<'a>(ids: impl Iterator<Item = (&'a str, NaiveDate)>) -> Option<((String, NaiveDate), (String, NaiveDate))> {
    let mut seen: Vec<(&str, NaiveDate)> = Vec::new();
    for id in ids {
        if seen.contains(&id) {
            continue;
        }
        if let Some(prev) = seen.iter().find(|p| is_conflict(**p, id)) {
            return Some(((prev.0.to_string(), prev.1), (id.0.to_string(), id.1)));
        }
        seen.push(id);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct YearMerge {
    /// Merged records ordered by ssn, then input order.
    pub records: Vec<MergedRecord>,
    pub conflicts: Vec<IdentityConflict>,
}

/// Left-joins one year's enrollment with its discipline records on ssn.
/// Students without discipline records get `N` for both flags. All records
/// of an ssn whose records conflict are dropped and the conflict is logged.
pub fn merge_year(
    enrollment: &[EnrollmentRecord],
    discipline: &[DisciplinaryRecord],
    year: i32,
) -> Result<YearMerge> {
    if let Some(r) = enrollment.iter().find(|r| r.school_year != year) {
        return Err(Error::InvalidValue(format!(
            "enrollment record for {} is from {}, expected {year}",
            r.ssn, r.school_year
        )));
    }
    if let Some(r) = discipline.iter().find(|r| r.school_year != year) {
        return Err(Error::InvalidValue(format!(
            "discipline record for {} is from {}, expected {year}",
            r.ssn, r.school_year
        )));
    }
    let mut flags: BTreeMap<&str, (Flag, Flag)> = BTreeMap::new();
    for d in discipline {
        let e = flags.entry(d.ssn.as_str()).or_insert((Flag::N, Flag::N));
        e.0 = e.0 | d.suspension;
        e.1 = e.1 | d.expulsion;
    }
    let mut by_ssn: BTreeMap<&str, Vec<&EnrollmentRecord>> = BTreeMap::new();
    for r in enrollment {
        by_ssn.entry(r.ssn.as_str()).or_default().push(r);
    }
    let mut out = YearMerge::default();
    for (ssn, recs) in by_ssn {
        if let Some((first, second)) = find_conflict(recs.iter().map(|r| (r.name.as_str(), r.birth_date))) {
            let name_distance = name_distance(&first.0, &second.0);
            out.conflicts.push(IdentityConflict {
                ssn: ssn.to_string(),
                school_year: Some(year),
                first,
                second,
                name_distance,
            });
            continue;
        }
        let (suspension, expulsion) = flags.get(ssn).copied().unwrap_or((Flag::N, Flag::N));
        out.records.extend(recs.into_iter().map(|r| MergedRecord {
            enrollment: r.clone(),
            suspension,
            expulsion,
        }));
    }
    Ok(out)
}

/// Result of the full pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct AllTimeBuild {
    /// One record per non-conflicting ssn, ordered by ssn.
    pub records: Vec<(String, AllTimeRecord)>,
    /// One entry per excluded ssn, ordered by ssn.
    pub conflicts: Vec<IdentityConflict>,
}

impl AllTimeBuild {
    pub fn dataset(&self) -> Result<Dataset> {
        let rows = self.records.iter().map(|(_, r)| r.features()).collect();
        let labels = self.records.iter().map(|(_, r)| r.last_dropout).collect::<Vec<ClassLabel>>();
        if labels.is_empty() {
            return Ok(Dataset::empty(student_table::schema().into()));
        }
        Dataset::new(student_table::schema(), rows, labels)
    }
}

/// Merges every year, applies the identity rule within and across years,
/// and aggregates each remaining student. An ssn with a conflict anywhere is
/// excluded entirely and reported once, preferring its earliest within-year
/// conflict.
pub fn build_all_time(years: &[YearFiles]) -> Result<AllTimeBuild> {
    if years.is_empty() {
        return Err(Error::Config("no school years to merge".into()));
    }
    let merged = par::try_map_slice(years, |y| merge_year(&y.enrollment, &y.discipline, y.year))?;
    let mut conflicts: BTreeMap<String, IdentityConflict> = BTreeMap::new();
    let mut order: Vec<usize> = (0..years.len()).collect();
    order.sort_by_key(|&i| years[i].year);
    for &i in &order {
        for c in &merged[i].conflicts {
            conflicts.entry(c.ssn.clone()).or_insert_with(|| c.clone());
        }
    }
    let excluded: BTreeSet<String> = conflicts.keys().cloned().collect();
    let mut by_ssn: BTreeMap<&str, Vec<&MergedRecord>> = BTreeMap::new();
    for &i in &order {
        for r in &merged[i].records {
            if !excluded.contains(&r.enrollment.ssn) {
                by_ssn.entry(r.enrollment.ssn.as_str()).or_default().push(r);
            }
        }
    }
    let groups: Vec<(&str, Vec<&MergedRecord>)> = by_ssn.into_iter().collect();
    let aggregated = par::map_slice(&groups, |(ssn, recs)| {
        match find_conflict(recs.iter().map(|r| (r.enrollment.name.as_str(), r.enrollment.birth_date))) {
            Some((first, second)) => Err(IdentityConflict {
                ssn: ssn.to_string(),
                school_year: None,
                name_distance: name_distance(&first.0, &second.0),
                first,
                second,
            }),
            None => {
                let owned: Vec<MergedRecord> = recs.iter().map(|r| (*r).clone()).collect();
                Ok((ssn.to_string(), aggregate_all_time(&owned)))
            }
        }
    });
    let mut records = Vec::with_capacity(aggregated.len());
    for a in aggregated {
        match a {
            Ok((ssn, rec)) => records.push((ssn, rec.expect("groups are non-empty"))),
            Err(c) => {
                conflicts.insert(c.ssn.clone(), c);
            }
        }
    }
    Ok(AllTimeBuild {
        records,
        conflicts: conflicts.into_values().collect(),
    })
}

pub fn write_conflicts<W: Write>(conflicts: &[IdentityConflict], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "ssn",
        "school_year",
        "name_a",
        "birth_date_a",
        "name_b",
        "birth_date_b",
        "name_distance",
    ])?;
    for c in conflicts {
        out.write_record([
            c.ssn.clone(),
            c.school_year.map(|y| y.to_string()).unwrap_or_default(),
            c.first.0.clone(),
            c.first.1.to_string(),
            c.second.0.clone(),
            c.second.1.to_string(),
            format!("{:.6}", c.name_distance),
        ])?;
    }
    out.flush().map_err(|e| Error::io("conflicts.csv", e))
}

pub fn enrollment_path(dir: &Path, year: i32) -> PathBuf {
    dir.join(format!("enrollment_{year}.csv"))
}

pub fn discipline_path(dir: &Path, year: i32) -> PathBuf {
    dir.join(format!("discipline_{year}.csv"))
}

fn open(path: &Path) -> Result<impl Read> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<impl Write> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads every `enrollment_<YYYY>.csv` in `dir` with its matching
/// `discipline_<YYYY>.csv`, ordered by year. A missing discipline file is
/// treated as empty.
pub fn read_year_dir(dir: &Path) -> Result<Vec<YearFiles>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut years = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(year) = name
            .strip_prefix("enrollment_")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<i32>().ok())
        {
            years.push(year);
        }
    }
    if years.is_empty() {
        return Err(Error::Config(format!("no enrollment_<YYYY>.csv files in {}", dir.display())));
    }
    years.sort_unstable();
    par::try_map_slice(&years, |&year| {
        let ep = enrollment_path(dir, year);
        let dp = discipline_path(dir, year);
        let enrollment = read_enrollment(open(&ep)?).map_err(|e| with_path(e, &ep))?;
        let discipline = if dp.exists() {
            read_discipline(open(&dp)?).map_err(|e| with_path(e, &dp))?
        } else {
            log::warn!("{} is missing; {year} discipline flags default to N", dp.display());
            Vec::new()
        };
        Ok(YearFiles {
            year,
            enrollment,
            discipline,
        })
    })
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.to_path_buf()),
        other => other,
    }
}

pub fn write_year_dir(dir: &Path, years: &[YearFiles]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for y in years {
        write_enrollment(&y.enrollment, create(&enrollment_path(dir, y.year))?)?;
        write_discipline(&y.discipline, create(&discipline_path(dir, y.year))?)?;
    }
    Ok(())
}

/// Writes `alltime.csv` and `conflicts.csv` into `dir`.
pub fn write_all_time(dir: &Path, build: &AllTimeBuild) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    crate::dataset::write_csv(&build.dataset()?, create(&dir.join("alltime.csv"))?, student_table::LABEL)?;
    write_conflicts(&build.conflicts, create(&dir.join("conflicts.csv"))?)
}

#[cfg(test)]
mod tests;
