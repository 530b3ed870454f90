use closek_core::data::{
    gen_example1, gen_example2, gen_figure1, load_table, write_table, Scenario,
    DEFAULT_LABEL_COLUMN,
};
use closek_core::{DatasetError, Error};

#[test]
fn generated_sets_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut sets = vec![
        gen_example1(20, 500.0).unwrap(),
        gen_example2(50, 3).unwrap(),
    ];
    sets.extend(
        Scenario::ALL
            .iter()
            .map(|&s| gen_figure1(s, 300, 3).unwrap()),
    );
    for d in sets {
        let path = dir.path().join(format!("{}.csv", d.name));
        write_table(&d, &path).unwrap();
        let back = load_table(&path, DEFAULT_LABEL_COLUMN).unwrap();
        assert_eq!(back.features(), d.features(), "{}", d.name);
        assert_eq!(back.labels(), d.labels(), "{}", d.name);
    }
}

#[test]
fn generators_are_seed_deterministic() {
    for s in Scenario::ALL {
        assert_eq!(
            gen_figure1(s, 400, 9).unwrap(),
            gen_figure1(s, 400, 9).unwrap()
        );
        assert_ne!(
            gen_figure1(s, 400, 9).unwrap().features(),
            gen_figure1(s, 400, 10).unwrap().features()
        );
    }
    assert_eq!(gen_example2(30, 1).unwrap(), gen_example2(30, 1).unwrap());
    assert_eq!(gen_example2(1000, 7).unwrap().len(), 2000);
}

#[test]
fn tab_separated_text_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tsv");
    std::fs::write(&path, "a\tclass\tb\n1.5\tyes\t2\n-1\tno\t0.5\n0\tyes\t1\n").unwrap();
    let d = load_table(&path, "class").unwrap();
    assert_eq!(d.dim(), 2);
    assert_eq!(d.labels(), &[1.0, -1.0, 1.0]);
    assert_eq!(d.row(1), &[-1.0, 0.5]);
}

#[test]
fn load_errors_are_classified() {
    let dir = tempfile::tempdir().unwrap();
    let missing = load_table(dir.path().join("nope.csv"), DEFAULT_LABEL_COLUMN).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }));

    let path = dir.path().join("one_class.csv");
    std::fs::write(&path, "x0,target\n1,1\n2,1\n").unwrap();
    let err = load_table(&path, DEFAULT_LABEL_COLUMN).unwrap_err();
    assert!(matches!(err, Error::Dataset(_)), "{err}");

    let path = dir.path().join("no_label.csv");
    std::fs::write(&path, "x0,x1\n1,1\n2,1\n").unwrap();
    let err = load_table(&path, DEFAULT_LABEL_COLUMN).unwrap_err();
    assert!(
        matches!(err, Error::Dataset(DatasetError::MissingLabelColumn(_))),
        "{err}"
    );
}
