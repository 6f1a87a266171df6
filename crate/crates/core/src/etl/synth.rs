use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::{par, rng};

use super::records::{DisciplinaryRecord, EnrollmentRecord, Flag, Sex};
use super::is_conflict;

/// One school year's raw files.
#[derive(Debug, Clone, PartialEq)]
pub struct YearFiles {
    pub year: i32,
    pub enrollment: Vec<EnrollmentRecord>,
    pub discipline: Vec<DisciplinaryRecord>,
}

/// Log-odds contributions to a student's dropout propensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskCoefficients {
    pub ever_truancy: f64,
    pub ever_suspension: f64,
    pub ever_expulsion: f64,
    pub ever_homeless: f64,
    /// Per average day absent per year.
    pub avg_days_absent: f64,
    /// Per repeated grade.
    pub fail_events: f64,
}

impl Default for RiskCoefficients {
    fn default() -> Self {
        RiskCoefficients {
            ever_truancy: 1.2,
            ever_suspension: 1.0,
            ever_expulsion: 1.5,
            ever_homeless: 1.0,
            avg_days_absent: 0.08,
            fail_events: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub students: usize,
    /// Target share of students flagged as dropping out in their last year.
    pub dropout_rate: f64,
    pub years: usize,
    pub first_year: i32,
    pub seed: u64,
    /// Probability that a student also gets a same-year record under their
    /// ssn with another name and birth date.
    pub conflict_rate: f64,
    pub coefficients: RiskCoefficients,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            students: 20_000,
            dropout_rate: 0.04,
            years: 13,
            first_year: 1999,
            seed: 7,
            conflict_rate: 0.0,
            coefficients: RiskCoefficients::default(),
        }
    }
}

pub const MIN_STUDENTS: usize = 100;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.students < MIN_STUDENTS {
            return Err(Error::Config(format!(
                "at least {MIN_STUDENTS} students are required, got {}",
                self.students
            )));
        }
        if !(self.dropout_rate > 0.0 && self.dropout_rate < 1.0) {
            return Err(Error::Config(format!("dropout rate must lie in (0, 1), got {}", self.dropout_rate)));
        }
        if self.years == 0 {
            return Err(Error::Config("at least one school year is required".into()));
        }
        if !(0.0..=1.0).contains(&self.conflict_rate) {
            return Err(Error::Config(format!("conflict rate must lie in [0, 1], got {}", self.conflict_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub years: Vec<YearFiles>,
    /// Calibrated intercept of the dropout model.
    pub intercept: f64,
    /// Ssns that received a conflicting record, sorted.
    pub injected_conflicts: Vec<String>,
    pub dropouts: usize,
}

const FIRST_NAMES: [&str; 24] = [
    "JAMES", "MARY", "JOHN", "PATRICIA", "ROBERT", "JENNIFER", "MICHAEL", "LINDA", "WILLIAM", "ELIZABETH", "DAVID",
    "BARBARA", "RICHARD", "SUSAN", "JOSEPH", "JESSICA", "THOMAS", "SARAH", "CHARLES", "KAREN", "DANIEL", "NANCY",
    "MATTHEW", "LISA",
];

const LAST_NAMES: [&str; 24] = [
    "SMITH", "JOHNSON", "WILLIAMS", "BROWN", "JONES", "GARCIA", "MILLER", "DAVIS", "RODRIGUEZ", "MARTINEZ",
    "HERNANDEZ", "LOPEZ", "GONZALEZ", "WILSON", "ANDERSON", "THOMAS", "TAYLOR", "MOORE", "JACKSON", "MARTIN", "LEE",
    "PEREZ", "THOMPSON", "WHITE",
];

const ETHNIC_SHARES: [f64; 6] = [0.01, 0.02, 0.44, 0.04, 0.46, 0.03];

const SCHOOLS_PER_DISTRICT: u32 = 20;
const DISTRICTS: u32 = 40;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct YearEntry {
    grade: i32,
    days_absent: u32,
    truancy: bool,
    suspension: bool,
    expulsion: bool,
    homeless: bool,
    free_lunch: bool,
    /// (school, district, days enrolled, days absent) per school attended.
    schools: Vec<(u32, u32, u32, u32)>,
}

struct Student {
    ssn: String,
    name: String,
    birth_date: NaiveDate,
    sex: Sex,
    ethnic: u8,
    start: usize,
    years: Vec<YearEntry>,
    risk: f64,
    dropout_draw: f64,
    conflict: Option<(usize, String, NaiveDate)>,
}

fn ssn_of(i: usize) -> String {
    // Affine map coprime with 10^9: distinct students get distinct ids.
    format!("{:09}", (i as u64 * 7_654_321 + 123_456_789) % 1_000_000_000)
}

fn school_start(year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, 9, 1).expect("valid date")
}

fn age_at(birth: NaiveDate, year: i32) -> f64 {
    let days = (school_start(year) - birth).num_days() as f64;
    (days / 365.25 * 10.0).floor() / 10.0
}

fn simulate(i: usize, cfg: &SynthConfig) -> Student {
    let mut r = rng::stream(cfg.seed, &[rng::label_hash("student"), i as u64]);
    let z: f64 = r.sample(StandardNormal);
    let name = format!(
        "{} {}",
        FIRST_NAMES[r.random_range(0..FIRST_NAMES.len())],
        LAST_NAMES[r.random_range(0..LAST_NAMES.len())]
    );
    let sex = if r.random_bool(0.5) { Sex::M } else { Sex::F };
    let mut u: f64 = r.random();
    let mut ethnic = 6;
    for (k, share) in ETHNIC_SHARES.iter().enumerate() {
        if u < *share {
            ethnic = k as u8 + 1;
            break;
        }
        u -= share;
    }
    let start = if cfg.years == 1 || r.random_bool(0.5) {
        0
    } else {
        r.random_range(1..cfg.years)
    };
    let mut grade: i32 = if start == 0 || r.random_bool(0.4) {
        r.random_range(-1..=12)
    } else {
        -1
    };
    let start_year = cfg.first_year + start as i32;
    let birth_year = start_year - (grade + 6);
    let birth_date = NaiveDate::from_ymd_opt(birth_year - 1, 9, 2).expect("valid date")
        + chrono::Duration::days(r.random_range(0..365));
    let poor = r.random_bool(sigmoid(0.3 + 0.9 * z));
    let absences = Poisson::new(5.0 * (0.5 * z).exp()).expect("positive rate");
    let mut district = r.random_range(0..DISTRICTS);
    let mut school = district * SCHOOLS_PER_DISTRICT + r.random_range(0..SCHOOLS_PER_DISTRICT);
    let mut years = Vec::new();
    for _t in start..cfg.years {
        let days_absent = (absences.sample(&mut r) as u32).min(170);
        let mut schools = Vec::new();
        let days_enrolled = r.random_range(170..=180);
        if r.random_bool((0.06 + 0.04 * z.max(0.0)).min(0.5)) {
            let first_days = r.random_range(30..days_enrolled - 30);
            let first_abs = days_absent * first_days / days_enrolled;
            schools.push((school, district, first_days, first_abs));
            if r.random_bool(0.3) {
                district = (district + r.random_range(1..DISTRICTS)) % DISTRICTS;
            }
            let next = district * SCHOOLS_PER_DISTRICT + r.random_range(0..SCHOOLS_PER_DISTRICT);
            school = if next == school { next + 1 } else { next };
            schools.push((school, district, days_enrolled - first_days, days_absent - first_abs));
        } else {
            schools.push((school, district, days_enrolled, days_absent));
        }
        years.push(YearEntry {
            grade,
            days_absent,
            truancy: r.random_bool(sigmoid(-3.2 + 1.1 * z)),
            suspension: r.random_bool(sigmoid(-2.8 + 1.0 * z)),
            expulsion: r.random_bool(sigmoid(-6.0 + 1.2 * z)),
            homeless: r.random_bool(sigmoid(-4.0 + 0.7 * z)),
            free_lunch: poor && r.random_bool(0.9),
            schools,
        });
        if grade == 12 {
            break;
        }
        let u: f64 = r.random();
        let fail = sigmoid(-3.3 + 0.9 * z);
        grade = if u < fail {
            grade
        } else if u < fail + 0.01 {
            (grade + 2).min(12)
        } else {
            grade + 1
        };
    }
    let conflict = if cfg.conflict_rate > 0.0 && r.random_bool(cfg.conflict_rate) {
        let year = r.random_range(0..years.len());
        let other_birth = birth_date - chrono::Duration::days(r.random_range(400..3000));
        let other_name = loop {
            let n = format!(
                "{} {}",
                FIRST_NAMES[r.random_range(0..FIRST_NAMES.len())],
                LAST_NAMES[r.random_range(0..LAST_NAMES.len())]
            );
            if is_conflict((&name, birth_date), (&n, other_birth)) {
                break n;
            }
        };
        Some((year, other_name, other_birth))
    } else {
        None
    };
    Student {
        ssn: ssn_of(i),
        name,
        birth_date,
        sex,
        ethnic,
        start,
        years,
        risk: 0.0,
        dropout_draw: r.random(),
        conflict,
    }
}

fn risk_score(s: &Student, c: &RiskCoefficients) -> f64 {
    let any = |f: fn(&YearEntry) -> bool| if s.years.iter().any(f) { 1.0 } else { 0.0 };
    let n = s.years.len() as f64;
    let avg_abs = s.years.iter().map(|y| f64::from(y.days_absent)).sum::<f64>() / n;
    let fails = s.years.windows(2).filter(|w| w[1].grade <= w[0].grade).count() as f64;
    c.ever_truancy * any(|y| y.truancy)
        + c.ever_suspension * any(|y| y.suspension)
        + c.ever_expulsion * any(|y| y.expulsion)
        + c.ever_homeless * any(|y| y.homeless)
        + c.avg_days_absent * avg_abs
        + c.fail_events * fails
}

/// Intercept making the mean dropout probability equal `rate`.
fn calibrate(scores: &[f64], rate: f64) -> f64 {
    let mean_p = |b: f64| scores.iter().map(|s| sigmoid(b + s)).sum::<f64>() / scores.len() as f64;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_p(mid) < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Simulates yearly enrollment and discipline files for a cohort.
///
/// Each student gets a latent risk that raises absences, truancy,
/// suspensions, expulsions, homelessness and grade retention. Dropout in the
/// last enrolled year is then drawn from a logistic model in those observed
/// quantities (see [`RiskCoefficients`]) whose intercept is calibrated so the
/// expected dropout share equals `dropout_rate`.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticCohort> {
    cfg.validate()?;
    let mut students = par::map_range(cfg.students, |i| simulate(i, cfg));
    let scores: Vec<f64> = students.iter().map(|s| risk_score(s, &cfg.coefficients)).collect();
    let intercept = calibrate(&scores, cfg.dropout_rate);
    for (s, score) in students.iter_mut().zip(&scores) {
        s.risk = sigmoid(intercept + score);
    }
    let mut years: Vec<YearFiles> = (0..cfg.years)
        .map(|t| YearFiles {
            year: cfg.first_year + t as i32,
            enrollment: Vec::new(),
            discipline: Vec::new(),
        })
        .collect();
    let mut injected = Vec::new();
    let mut dropouts = 0;
    for s in &students {
        let dropped = s.dropout_draw < s.risk;
        dropouts += usize::from(dropped);
        let last = s.years.len() - 1;
        for (k, y) in s.years.iter().enumerate() {
            let t = s.start + k;
            let year = cfg.first_year + t as i32;
            let files = &mut years[t];
            for &(school, district, days_enrolled, days_absent) in &y.schools {
                files.enrollment.push(EnrollmentRecord {
                    ssn: s.ssn.clone(),
                    name: s.name.clone(),
                    birth_date: s.birth_date,
                    school_year: year,
                    grade: y.grade,
                    age: age_at(s.birth_date, year),
                    sex: s.sex,
                    ethnic: s.ethnic,
                    days_enrolled,
                    days_absent,
                    school_id: format!("SCH{school:04}"),
                    district_id: format!("DST{district:03}"),
                    dropout: Flag::from_bool(dropped && k == last),
                    homeless: Flag::from_bool(y.homeless),
                    free_lunch: Flag::from_bool(y.free_lunch),
                    truancy: Flag::from_bool(y.truancy),
                });
            }
            if let Some((_, other_name, other_birth)) = s.conflict.as_ref().filter(|c| c.0 == k) {
                let mut twin = files.enrollment.last().expect("just pushed").clone();
                twin.name = other_name.clone();
                twin.birth_date = *other_birth;
                twin.age = age_at(*other_birth, year);
                twin.school_id = "SCH9999".into();
                twin.dropout = Flag::N;
                files.enrollment.push(twin);
                injected.push(s.ssn.clone());
            }
            if y.suspension || y.expulsion {
                files.discipline.push(DisciplinaryRecord {
                    ssn: s.ssn.clone(),
                    school_year: year,
                    suspension: Flag::from_bool(y.suspension),
                    expulsion: Flag::from_bool(y.expulsion),
                });
            }
        }
    }
    for y in &mut years {
        y.enrollment.sort_by(|a, b| a.ssn.cmp(&b.ssn).then(a.school_id.cmp(&b.school_id)));
        y.discipline.sort_by(|a, b| a.ssn.cmp(&b.ssn));
    }
    injected.sort();
    Ok(SyntheticCohort {
        years,
        intercept,
        injected_conflicts: injected,
        dropouts,
    })
}
