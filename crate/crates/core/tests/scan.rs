use nagumo_core::scan::{describe_contradictions, is_contradiction};
use nagumo_core::{read_csv, scan, write_csv, ScanOptions, SimulatePolicy, Verdict};

fn options(simulate: SimulatePolicy) -> ScanOptions {
    ScanOptions {
        simulate,
        sim_budget: Some(6),
        audit_budget: 4,
        seed: 99,
        sim_n: 256,
        sim_t_end: 400.0,
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let run = || {
        scan(
            (0.3, 0.7),
            (0.0, 0.045),
            12,
            &options(SimulatePolicy::OnUndetermined),
        )
        .unwrap()
        .to_csv_string()
    };
    assert_eq!(run(), run());
}

#[test]
fn seed_changes_only_the_simulated_cells() {
    let a = scan(
        (0.3, 0.7),
        (0.0, 0.045),
        12,
        &options(SimulatePolicy::Always),
    )
    .unwrap();
    let b = scan(
        (0.3, 0.7),
        (0.0, 0.045),
        12,
        &ScanOptions {
            seed: 100,
            ..options(SimulatePolicy::Always)
        },
    )
    .unwrap();
    let verdicts =
        |g: &nagumo_core::RegionGrid| g.cells.iter().map(|c| c.criterion).collect::<Vec<_>>();
    assert_eq!(verdicts(&a), verdicts(&b));
    let simulated =
        |g: &nagumo_core::RegionGrid| g.cells.iter().filter(|c| c.sim_class.is_some()).count();
    assert_eq!(simulated(&a), 10);
    assert_eq!(simulated(&b), 10);
}

#[test]
fn single_cell_grid() {
    let grid = scan((0.4, 0.5), (0.0, 0.02), 1, &ScanOptions::default()).unwrap();
    let csv = grid.to_csv_string();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "a,d,root_count,criterion,gamma,sim_speed,sim_class"
    );
    assert!(
        lines[1].starts_with("0.45,0.02,9,ProvenPinned,"),
        "{}",
        lines[1]
    );
    assert!(lines[1].ends_with(",,"));
}

#[test]
fn two_by_two_is_row_major() {
    let grid = scan((0.0, 1.0), (0.0, 0.06), 2, &ScanOptions::default()).unwrap();
    let csv = grid.to_csv_string();
    let keys: Vec<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let want = [
        ("0.25", "0.03"),
        ("0.25", "0.06"),
        ("0.75", "0.03"),
        ("0.75", "0.06"),
    ];
    assert_eq!(keys, want.map(|(a, d)| (a.to_string(), d.to_string())));
}

#[test]
fn file_round_trip() {
    let grid = scan(
        (0.2, 0.8),
        (0.0, 0.05),
        7,
        &options(SimulatePolicy::OnUndetermined),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("regions.csv");
    write_csv(&grid, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), grid);
}

#[test]
fn missing_file_reports_its_path() {
    let err = read_csv(std::path::Path::new("/nonexistent/regions.csv")).unwrap_err();
    assert!(
        err.to_string().contains("/nonexistent/regions.csv"),
        "{err}"
    );
}

#[test]
fn invalid_ranges_are_rejected() {
    let o = ScanOptions::default();
    assert!(scan((0.0, 1.5), (0.0, 0.05), 4, &o).is_err());
    assert!(scan((0.0, 1.0), (0.0, 0.08), 4, &o).is_err());
    assert!(scan((0.5, 0.5), (0.0, 0.05), 4, &o).is_err());
    assert!(scan((0.0, 1.0), (0.0, 0.05), 0, &o).is_err());
    assert!(scan((0.0, 1.0), (0.0, 0.05), 513, &o).is_err());
}

#[test]
fn audited_scan_has_no_contradictions() {
    let opts = ScanOptions {
        audit_budget: 20,
        ..options(SimulatePolicy::OnUndetermined)
    };
    let grid = scan((0.0, 1.0), (0.0, 0.045), 30, &opts).unwrap();
    assert!(grid
        .cells
        .iter()
        .any(|c| c.sim_class.is_some() && c.criterion != Verdict::Undetermined));
    assert!(
        !grid.cells.iter().any(is_contradiction),
        "{}",
        describe_contradictions(&grid)
    );
}
