use chrono::NaiveDate;

use super::*;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub(super) fn enr(ssn: &str, name: &str, birth: NaiveDate, year: i32, grade: i32) -> EnrollmentRecord {
    EnrollmentRecord {
        ssn: ssn.into(),
        name: name.into(),
        birth_date: birth,
        school_year: year,
        grade,
        age: f64::from(grade + 6),
        sex: Sex::F,
        ethnic: 3,
        days_enrolled: 180,
        days_absent: 4,
        school_id: "A".into(),
        district_id: "D1".into(),
        dropout: Flag::N,
        homeless: Flag::N,
        free_lunch: Flag::N,
        truancy: Flag::N,
    }
}

fn merged(r: EnrollmentRecord) -> MergedRecord {
    MergedRecord {
        enrollment: r,
        suspension: Flag::N,
        expulsion: Flag::N,
    }
}

#[test]
fn name_distance_examples() {
    assert_eq!(name_distance("JOHN SMITH", "john  smith"), 0.0);
    assert!(name_distance("JOHN SMITH", "MARIA GARCIA") > 0.2);
    // One substitution in a 20-character name.
    assert!((name_distance("JONATHAN RICHARDSONS", "JONATHAN RICHARDSONZ") - 0.05).abs() < 1e-12);
}

#[test]
fn merge_keeps_identical_and_typo_records() {
    let b = date(1990, 1, 1);
    let e = vec![enr("1", "JOHN SMITH", b, 2000, 5), {
        let mut r = enr("1", "JOHN SMITH", b, 2000, 5);
        r.school_id = "B".into();
        r
    }];
    let m = merge_year(&e, &[], 2000).unwrap();
    assert_eq!(m.records.len(), 2);
    assert!(m.conflicts.is_empty());

    let e = vec![
        enr("2", "JONATHAN RICHARDSONS", b, 2000, 5),
        enr("2", "JONATHAN RICHARDSONZ", b, 2000, 5),
    ];
    let m = merge_year(&e, &[], 2000).unwrap();
    assert_eq!(m.records.len(), 2);
}

#[test]
fn merge_excludes_conflicting_ssn() {
    let e = vec![
        enr("3", "JOHN SMITH", date(1990, 1, 1), 2000, 5),
        enr("3", "MARIA GARCIA", date(1991, 6, 2), 2000, 5),
        enr("4", "ANN LEE", date(1990, 1, 1), 2000, 5),
    ];
    let m = merge_year(&e, &[], 2000).unwrap();
    assert_eq!(m.records.len(), 1);
    assert_eq!(m.records[0].enrollment.ssn, "4");
    assert_eq!(m.conflicts.len(), 1);
    assert_eq!(m.conflicts[0].ssn, "3");
    assert!(m.conflicts[0].name_distance > 0.2);
}

#[test]
fn different_names_same_birth_date_still_merge() {
    let b = date(1990, 1, 1);
    let e = vec![enr("5", "JOHN SMITH", b, 2000, 5), enr("5", "MARIA GARCIA", b, 2000, 5)];
    assert!(merge_year(&e, &[], 2000).unwrap().conflicts.is_empty());
}

#[test]
fn left_join_defaults_and_or_of_discipline() {
    let b = date(1990, 1, 1);
    let e = vec![enr("1", "A B", b, 2001, 3), enr("2", "C D", b, 2001, 3)];
    let d = vec![
        DisciplinaryRecord { ssn: "2".into(), school_year: 2001, suspension: Flag::Y, expulsion: Flag::N },
        DisciplinaryRecord { ssn: "2".into(), school_year: 2001, suspension: Flag::N, expulsion: Flag::Y },
        DisciplinaryRecord { ssn: "9".into(), school_year: 2001, suspension: Flag::Y, expulsion: Flag::Y },
    ];
    let m = merge_year(&e, &d, 2001).unwrap();
    assert_eq!(m.records.len(), 2);
    assert_eq!((m.records[0].suspension, m.records[0].expulsion), (Flag::N, Flag::N));
    assert_eq!((m.records[1].suspension, m.records[1].expulsion), (Flag::Y, Flag::Y));
    assert!(merge_year(&e, &d, 2002).is_err());
}

#[test]
fn single_year_student() {
    let mut r = enr("1", "A B", date(1990, 1, 1), 2003, 7);
    r.days_absent = 11;
    r.truancy = Flag::Y;
    let a = aggregate_all_time(&[merged(r)]).unwrap();
    assert_eq!(a.avg_days_enrolled, 180.0);
    assert_eq!(a.avg_days_absent, 11.0);
    assert_eq!(a.avg_school_changes, 0.0);
    assert_eq!((a.fail, a.move_ahead, a.failed_more_than_2), (Flag::N, Flag::N, Flag::N));
    assert_eq!(a.on_track, Flag::Y);
    assert_eq!(a.ever_truancy, Flag::Y);
    assert_eq!(a.last_grade, 7);
    assert!(aggregate_all_time(&[]).is_none());
}

#[test]
fn grade_sequences_drive_the_flags() {
    let b = date(1990, 1, 1);
    let run = |grades: &[i32]| {
        let recs: Vec<MergedRecord> = grades
            .iter()
            .enumerate()
            .map(|(i, g)| merged(enr("1", "A B", b, 2000 + i as i32, *g)))
            .collect();
        aggregate_all_time(&recs).unwrap()
    };
    let a = run(&[9, 9, 10]);
    assert_eq!((a.fail, a.failed_more_than_2, a.on_track), (Flag::Y, Flag::N, Flag::N));
    let a = run(&[3, 3, 4, 4]);
    assert_eq!(a.failed_more_than_2, Flag::Y);
    let a = run(&[3, 5, 6]);
    assert_eq!((a.move_ahead, a.fail), (Flag::Y, Flag::N));
    let a = run(&[4, 3]);
    assert_eq!(a.fail, Flag::Y);
}

#[test]
fn school_changes_and_last_year_values() {
    let b = date(1990, 1, 1);
    let mut recs = vec![];
    let mut r = enr("1", "A B", b, 2000, 1);
    r.days_enrolled = 100;
    recs.push(merged(r.clone()));
    r.school_id = "B".into();
    r.district_id = "D2".into();
    r.days_enrolled = 80;
    recs.push(merged(r.clone()));
    let mut r2 = enr("1", "A B", b, 2001, 2);
    r2.dropout = Flag::Y;
    r2.age = 8.5;
    recs.push(MergedRecord { enrollment: r2, suspension: Flag::Y, expulsion: Flag::N });
    let a = aggregate_all_time(&recs).unwrap();
    assert_eq!(a.avg_school_changes, 0.5);
    assert_eq!(a.avg_district_changes, 0.5);
    assert_eq!(a.avg_days_enrolled, 180.0);
    assert_eq!(a.last_dropout, ClassLabel::Positive);
    assert_eq!(a.last_age, 8.5);
    assert_eq!(a.ever_suspension, Flag::Y);
    assert_eq!(a.features().len(), 17);
}

#[test]
fn build_excludes_cross_year_conflicts() {
    let years = vec![
        YearFiles {
            year: 2000,
            enrollment: vec![
                enr("1", "JOHN SMITH", date(1990, 1, 1), 2000, 4),
                enr("2", "ANN LEE", date(1991, 1, 1), 2000, 3),
            ],
            discipline: vec![],
        },
        YearFiles {
            year: 2001,
            enrollment: vec![
                enr("1", "MARIA GARCIA", date(1992, 3, 3), 2001, 5),
                enr("2", "ANN LEE", date(1991, 1, 1), 2001, 4),
                enr("3", "BO KIM", date(1991, 1, 1), 2001, 4),
            ],
            discipline: vec![],
        },
    ];
    let b = build_all_time(&years).unwrap();
    let ssns: Vec<&str> = b.records.iter().map(|(s, _)| s.as_str()).collect();
    assert_eq!(ssns, vec!["2", "3"]);
    assert_eq!(b.conflicts.len(), 1);
    assert_eq!(b.conflicts[0].school_year, None);
    assert_eq!(b.dataset().unwrap().len(), 2);
    assert!(build_all_time(&[]).is_err());
}

#[test]
fn record_csv_round_trip() {
    let e = vec![enr("1", "A B", date(1990, 1, 1), 2000, -1)];
    let mut buf = Vec::new();
    write_enrollment(&e, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("ssn,name,birth_date,school_year,grade,age,sex,ethnic,"));
    assert!(text.contains("1990-01-01"));
    assert_eq!(read_enrollment(buf.as_slice()).unwrap(), e);
    let bad = text.replace(",-1,", ",13,");
    assert!(matches!(read_enrollment(bad.as_bytes()), Err(Error::Parse { row: 1, .. })));
    assert!(matches!(read_enrollment("".as_bytes()), Err(Error::EmptyFile(_))));
}

#[test]
fn synthetic_cohort_is_clean_and_deterministic() {
    let cfg = SynthConfig { students: 400, seed: 3, ..SynthConfig::default() };
    let a = generate_synthetic(&cfg).unwrap();
    let b = generate_synthetic(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.years.len(), 13);
    assert_eq!(a.years[0].year, 1999);
    let built = build_all_time(&a.years).unwrap();
    assert!(built.conflicts.is_empty());
    assert_eq!(built.records.len(), 400);
    let positives = built.records.iter().filter(|(_, r)| r.last_dropout.is_positive()).count();
    assert_eq!(positives, a.dropouts);
    assert!(generate_synthetic(&SynthConfig { students: 50, ..cfg }).is_err());
}

#[test]
fn injected_conflicts_are_logged() {
    let cfg = SynthConfig { students: 500, seed: 4, conflict_rate: 0.1, ..SynthConfig::default() };
    let cohort = generate_synthetic(&cfg).unwrap();
    let built = build_all_time(&cohort.years).unwrap();
    let logged: Vec<String> = built.conflicts.iter().map(|c| c.ssn.clone()).collect();
    assert_eq!(logged, cohort.injected_conflicts);
    assert_eq!(built.records.len(), 500 - logged.len());
    assert!(!logged.is_empty());
}
