use std::io::{Read, Write};
use std::ops::BitOr;

use chrono::NaiveDate;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flag {
    N,
    Y,
}

impl Flag {
    pub fn is_yes(self) -> bool {
        self == Flag::Y
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Flag::Y
        } else {
            Flag::N
        }
    }
}

impl BitOr for Flag {
    type Output = Flag;

    fn bitor(self, rhs: Flag) -> Flag {
        Flag::from_bool(self.is_yes() || rhs.is_yes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrollmentRecord {
    pub ssn: String,
    pub name: String,
    pub birth_date: NaiveDate,
    /// Calendar year in which the school year starts.
    pub school_year: i32,
    pub grade: i32,
    pub age: f64,
    pub sex: Sex,
    pub ethnic: u8,
    pub days_enrolled: u32,
    pub days_absent: u32,
    pub school_id: String,
    pub district_id: String,
    pub dropout: Flag,
    pub homeless: Flag,
    pub free_lunch: Flag,
    pub truancy: Flag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisciplinaryRecord {
    pub ssn: String,
    pub school_year: i32,
    pub suspension: Flag,
    pub expulsion: Flag,
}

fn invalid(row: usize, column: &str, value: impl ToString, reason: &str) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

impl EnrollmentRecord {
    fn check(&self, row: usize) -> Result<()> {
        if self.ssn.trim().is_empty() {
            return Err(invalid(row, "ssn", &self.ssn, "empty ssn"));
        }
        if !(-1..=12).contains(&self.grade) {
            return Err(invalid(row, "grade", self.grade, "grade outside -1..=12"));
        }
        if !(1..=6).contains(&self.ethnic) {
            return Err(invalid(row, "ethnic", self.ethnic, "ethnic code outside 1..=6"));
        }
        if !(self.age.is_finite() && self.age >= 0.0) {
            return Err(invalid(row, "age", self.age, "age must be a non-negative number"));
        }
        Ok(())
    }
}

impl DisciplinaryRecord {
    fn check(&self, row: usize) -> Result<()> {
        if self.ssn.trim().is_empty() {
            return Err(invalid(row, "ssn", &self.ssn, "empty ssn"));
        }
        Ok(())
    }
}

fn read_records<T: DeserializeOwned, R: Read>(reader: R, check: impl Fn(&T, usize) -> Result<()>) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    if rdr.headers()?.is_empty() {
        return Err(Error::EmptyFile(Default::default()));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<T>().enumerate() {
        let rec = rec?;
        check(&rec, i + 1)?;
        out.push(rec);
    }
    Ok(out)
}

fn write_records<T: Serialize, W: Write>(records: &[T], header: &[&str], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| Error::io("<csv writer>", e))
}

const ENROLLMENT_HEADER: [&str; 16] = [
    "ssn",
    "name",
    "birth_date",
    "school_year",
    "grade",
    "age",
    "sex",
    "ethnic",
    "days_enrolled",
    "days_absent",
    "school_id",
    "district_id",
    "dropout",
    "homeless",
    "free_lunch",
    "truancy",
];

const DISCIPLINE_HEADER: [&str; 4] = ["ssn", "school_year", "suspension", "expulsion"];

pub fn read_enrollment<R: Read>(reader: R) -> Result<Vec<EnrollmentRecord>> {
    read_records(reader, EnrollmentRecord::check)
}

pub fn read_discipline<R: Read>(reader: R) -> Result<Vec<DisciplinaryRecord>> {
    read_records(reader, DisciplinaryRecord::check)
}

pub fn write_enrollment<W: Write>(records: &[EnrollmentRecord], w: W) -> Result<()> {
    write_records(records, &ENROLLMENT_HEADER, w)
}

pub fn write_discipline<W: Write>(records: &[DisciplinaryRecord], w: W) -> Result<()> {
    write_records(records, &DISCIPLINE_HEADER, w)
}
