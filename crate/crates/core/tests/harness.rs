use cechsim_core::harness::presets::{check_lln, CheckOutcome, Preset};
use cechsim_core::harness::{
    estimate_beta_hat, run_convergence, run_lln_curve, write_gnuplot, write_results_csv, write_summary_json,
    ExperimentConfig, MetricConfig, ProcessKind, SettingConfig,
};
use cechsim_core::limits::{euler_limit, LimitEstimate};
use cechsim_core::DensityConfig;

fn square(n: usize, r_grid: Vec<f64>, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: "square".into(),
        setting: SettingConfig::Euclidean {
            density: DensityConfig::UniformBox { lo: vec![0.0; 2], hi: vec![1.0; 2] },
            metric: MetricConfig::Euclidean,
        },
        process: ProcessKind::Binomial,
        n,
        r_grid,
        trials,
        k_max: 1,
        euler: true,
        master_seed: 77,
        simplex_cap: 20_000_000,
    }
}

#[test]
fn beta_hat_alternating_sum_matches_euler_limit() {
    // The window boundary biases β/L by O(L^{-1/2}); extrapolate it away from L and 4L.
    let r = 0.5;
    let small = estimate_beta_hat(2, 1.0, r, 1e4, 10, 1).unwrap();
    let large = estimate_beta_hat(2, 1.0, r, 4e4, 10, 2).unwrap();
    let value = 2.0 * large.euler.value - small.euler.value;
    let stderr = (4.0 * large.euler.stderr.powi(2) + small.euler.stderr.powi(2)).sqrt();
    let target = euler_limit(2, r).unwrap();
    assert!((value - target).abs() <= 4.0 * stderr, "{value} ± {stderr} vs {target}");
}

#[test]
fn dispersion_shrinks_and_means_agree_across_n() {
    let report = run_convergence(&square(1, vec![0.6], 20), &[1_000, 10_000]).unwrap();
    assert!(report.dispersion_decreases(0, 1));
    let (a, b) = (report.records[0][0].betti[1], report.records[1][0].betti[1]);
    assert!((a.value - b.value).abs() < 5.0 * a.stderr.hypot(b.stderr), "{a:?} vs {b:?}");
    let rerun = run_convergence(&square(1, vec![0.6], 20), &[1_000, 10_000]).unwrap();
    assert!(report.records.iter().flatten().zip(rerun.records.iter().flatten()).all(|(x, y)| x.same_statistics(y)));
}

#[test]
fn result_tables() {
    let config = square(400, vec![0.5, 1.0], 3);
    let records = run_lln_curve(&config).unwrap();
    let header = vec!["run: test".to_string(), "two\nlines".to_string()];

    let mut csv = Vec::new();
    write_results_csv(&mut csv, &config.setting_label(), &header, &records).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(&lines[..3], ["# run: test", "# two", "# lines"]);
    assert_eq!(lines[3], "setting,n,r,k,stat,mean,stderr,trials,seed");
    let rows: Vec<Vec<&str>> = lines[4..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * (2 + 3 + 1));
    assert!(rows.iter().all(|r| r.len() == 9
        && r[0] == "euclidean:square"
        && r[1] == "400"
        && r[7] == "3"
        && r[8] == "77"));
    let euler: Vec<&Vec<&str>> = rows.iter().filter(|r| r[4] == "euler").collect();
    assert_eq!(euler.len(), 2);
    assert_eq!(euler[0][3], "");
    assert_eq!(euler[1][5].parse::<f64>().unwrap(), records[1].euler.unwrap().value);

    let mut json = Vec::new();
    write_summary_json(&mut json, &config, &records).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let back: ExperimentConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!(back, config);
    assert_eq!(v["records"][1]["r"], 1.0);

    let mut dat = Vec::new();
    write_gnuplot(&mut dat, &header, &records).unwrap();
    let dat = String::from_utf8(dat).unwrap();
    assert!(dat.contains("# r beta0 beta0_se beta1 beta1_se euler euler_se"));
    let data: Vec<&str> = dat.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 2);
    assert_eq!(data[0].split(' ').count(), 7);
}

#[test]
fn presets_are_pinned() {
    for p in Preset::ALL {
        assert_eq!(Preset::from_name(p.name()).unwrap(), p);
    }
    let plane = Preset::Figure2Plane.config().unwrap();
    assert_eq!((plane.n, plane.trials, plane.r_grid.clone(), plane.euler), (10_000, 20, vec![0.3, 0.6, 1.0], true));
    let space = Preset::Figure2Space.config().unwrap();
    assert_eq!((space.n, space.trials, space.r_grid.clone()), (10_000, 20, vec![0.3, 0.5]));
    let circle = Preset::CircleBeta0.config().unwrap();
    assert_eq!((circle.n, circle.trials, circle.r_grid.clone()), (10_000, 20, vec![1.0]));
    assert!(Preset::ScalingCheck.config().is_none());
    assert!(Preset::from_name("figure3").is_err());
}

#[test]
fn check_bands() {
    let est = LimitEstimate {
        value: 0.55,
        stderr: 0.001,
        samples: 20,
        method: cechsim_core::limits::EstimateMethod::MonteCarlo,
    };
    assert!(CheckOutcome::two_sided("a".into(), &est, 0.54, 0.02).passed);
    assert!(!CheckOutcome::two_sided("a".into(), &est, 0.5, 0.02).passed);
    assert!(!CheckOutcome::at_most("b".into(), &est, 0.5).passed);

    let config = ExperimentConfig { n: 2_000, trials: 4, r_grid: vec![0.3], ..Preset::Figure2Plane.config().unwrap() };
    let checks = check_lln(Preset::Figure2Plane, &run_lln_curve(&config).unwrap()).unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0].target, euler_limit(2, 0.3).unwrap());
    assert!(checks[0].band >= 0.02);
}
