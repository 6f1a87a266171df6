use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::ClassLabel;

use super::records::{Flag, Sex};
use super::MergedRecord;

/// One student's all-time summary: the 17 predictors and the label.
#[derive(Debug, Clone, PartialEq)]
pub struct AllTimeRecord {
    pub last_grade: i32,
    pub last_age: f64,
    pub sex: Sex,
    pub ethnic: u8,
    pub fail: Flag,
    pub move_ahead: Flag,
    pub on_track: Flag,
    pub failed_more_than_2: Flag,
    pub avg_days_enrolled: f64,
    pub avg_days_absent: f64,
    pub avg_school_changes: f64,
    pub avg_district_changes: f64,
    pub ever_homeless: Flag,
    pub ever_truancy: Flag,
    pub ever_free_lunch: Flag,
    pub ever_suspension: Flag,
    pub ever_expulsion: Flag,
    pub last_dropout: ClassLabel,
}

fn bit(f: Flag) -> f64 {
    if f.is_yes() {
        1.0
    } else {
        0.0
    }
}

impl AllTimeRecord {
    /// Encoded predictors in table column order.
    pub fn features(&self) -> Vec<f64> {
        vec![
            f64::from(self.last_grade),
            self.last_age,
            if self.sex == Sex::M { 1.0 } else { 0.0 },
            f64::from(self.ethnic),
            bit(self.fail),
            bit(self.move_ahead),
            bit(self.on_track),
            bit(self.failed_more_than_2),
            self.avg_days_enrolled,
            self.avg_days_absent,
            self.avg_school_changes,
            self.avg_district_changes,
            bit(self.ever_homeless),
            bit(self.ever_truancy),
            bit(self.ever_free_lunch),
            bit(self.ever_suspension),
            bit(self.ever_expulsion),
        ]
    }
}

/// The On Track rule: a student is on track iff they never failed a grade.
pub fn on_track(fail: Flag) -> Flag {
    Flag::from_bool(!fail.is_yes())
}

struct Year<'a> {
    grade: i32,
    age: f64,
    sex: Sex,
    ethnic: u8,
    days_enrolled: u64,
    days_absent: u64,
    schools: BTreeSet<&'a str>,
    districts: BTreeSet<&'a str>,
    dropout: Flag,
    homeless: Flag,
    free_lunch: Flag,
    truancy: Flag,
    suspension: Flag,
    expulsion: Flag,
}

/// Collapses one student's merged yearly records. Within a year, days are
/// summed over schools, grade and age take the maximum and flags are OR-ed.
/// Returns `None` for an empty slice.
pub fn aggregate_all_time(records: &[MergedRecord]) -> Option<AllTimeRecord> {
    let mut years: BTreeMap<i32, Year> = BTreeMap::new();
    for m in records {
        let r = &m.enrollment;
        if r.days_absent > r.days_enrolled {
            log::warn!(
                "ssn {} year {}: {} days absent exceeds {} days enrolled",
                r.ssn,
                r.school_year,
                r.days_absent,
                r.days_enrolled
            );
        }
        let y = years.entry(r.school_year).or_insert_with(|| Year {
            grade: r.grade,
            age: r.age,
            sex: r.sex,
            ethnic: r.ethnic,
            days_enrolled: 0,
            days_absent: 0,
            schools: BTreeSet::new(),
            districts: BTreeSet::new(),
            dropout: Flag::N,
            homeless: Flag::N,
            free_lunch: Flag::N,
            truancy: Flag::N,
            suspension: Flag::N,
            expulsion: Flag::N,
        });
        y.grade = y.grade.max(r.grade);
        y.age = y.age.max(r.age);
        y.days_enrolled += u64::from(r.days_enrolled);
        y.days_absent += u64::from(r.days_absent);
        y.schools.insert(&r.school_id);
        y.districts.insert(&r.district_id);
        y.dropout = y.dropout | r.dropout;
        y.homeless = y.homeless | r.homeless;
        y.free_lunch = y.free_lunch | r.free_lunch;
        y.truancy = y.truancy | r.truancy;
        y.suspension = y.suspension | m.suspension;
        y.expulsion = y.expulsion | m.expulsion;
    }
    let last = years.values().next_back()?;
    let n = years.len() as f64;
    let grades: Vec<i32> = years.values().map(|y| y.grade).collect();
    let fails = grades.windows(2).filter(|w| w[1] <= w[0]).count();
    let fail = Flag::from_bool(fails > 0);
    let any = |f: fn(&Year) -> Flag| years.values().fold(Flag::N, |acc, y| acc | f(y));
    let mean = |f: fn(&Year) -> f64| years.values().map(f).sum::<f64>() / n;
    Some(AllTimeRecord {
        last_grade: last.grade,
        last_age: last.age,
        sex: last.sex,
        ethnic: last.ethnic,
        fail,
        move_ahead: Flag::from_bool(grades.windows(2).any(|w| w[1] >= w[0] + 2)),
        on_track: on_track(fail),
        failed_more_than_2: Flag::from_bool(fails >= 2),
        avg_days_enrolled: mean(|y| y.days_enrolled as f64),
        avg_days_absent: mean(|y| y.days_absent as f64),
        avg_school_changes: mean(|y| y.schools.len().saturating_sub(1) as f64),
        avg_district_changes: mean(|y| y.districts.len().saturating_sub(1) as f64),
        ever_homeless: any(|y| y.homeless),
        ever_truancy: any(|y| y.truancy),
        ever_free_lunch: any(|y| y.free_lunch),
        ever_suspension: any(|y| y.suspension),
        ever_expulsion: any(|y| y.expulsion),
        last_dropout: if last.dropout.is_yes() {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        },
    })
}
